fn main() {
    std::process::exit(frontlab::cli::run_cli(std::env::args_os()));
}
