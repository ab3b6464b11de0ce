//! Run the fast invariant suite in-process and print its report.

use frontlab::cli::verify::{run_suite, Suite};
use frontlab::particles::Selection;

fn main() -> frontlab::Result<()> {
    let report = run_suite(Suite::Fast, 1, Selection::Rightmost)?;
    print!("{}", report.to_text());
    println!("all passed: {}", report.passed());
    Ok(())
}
