//! The `frontlab` command line.
//!
//! Every subcommand prints its JSON result on stdout. With `--out DIR` it also
//! writes the result, any CSV tables and a `manifest.json` sidecar into `DIR`.
//! Exit status is 0 on success, 1 for invalid input and 2 for failed runs.

pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::{
    self, monotonicity_violations, survival_table, velocity_table, GenerationPlan,
    SurvivalSweepConfig, VelocitySweepConfig,
};
use crate::io::{atomic_write, config_hash, fmt_num, to_json_pretty, Manifest, Table};
use crate::killedbrw::{self, critical_horizon, default_band, BarrierSpec, DEFAULT_CAP};
use crate::particles::{
    check_diameter_bound, diameter_slack, estimate_velocity, run, Instrumentation, Population,
    Selection, VelocityEstimate,
};
use crate::stepdist::StepDistribution;
use crate::theory;

pub use verify::{run_suite, Suite, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const DEFAULT_TOL: f64 = 1e-12;
const DEFAULT_LAMBDA: f64 = 2.0;

#[derive(Debug, Parser)]
#[command(name = "frontlab", version, about = "Branching-selection front simulations and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assumption report and the constants t*, v(p), χ(p).
    Theory(TheoryArgs),
    /// One trajectory of the N-particle chain plus a velocity estimate.
    Simulate(SimulateArgs),
    /// Velocity estimates over a list of N.
    Sweep(SweepArgs),
    /// Survival probability of the killed branching random walk.
    Survival(SurvivalArgs),
    /// Scaling-law fit of a sweep CSV.
    Fit(FitArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct TheoryArgs {
    /// Step law, e.g. gaussian:0:1, bernoulli:0.25, uniform:0:1, point:0.5.
    #[arg(long)]
    dist: Option<StepDistribution>,
    /// Tolerance on t·Λ'(t) − Λ(t) − log 2 at the root.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum InstrumentFlag {
    Diameter,
    Steps,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct SimulateArgs {
    #[arg(long)]
    dist: Option<StepDistribution>,
    /// Number of particles N.
    #[arg(long)]
    particles: Option<usize>,
    /// Measured generations.
    #[arg(long)]
    gens: Option<u64>,
    /// Generations discarded before measuring velocity (default gens/10).
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    instrument: Option<Vec<InstrumentFlag>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct SweepArgs {
    #[arg(long)]
    dist: Option<StepDistribution>,
    /// Strictly ascending particle counts, e.g. 16,32,64.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Fixed measured generations per point; overrides --gens-factor.
    #[arg(long)]
    gens: Option<u64>,
    #[arg(long)]
    burn_in: Option<u64>,
    /// Measured generations = factor·(log₂N)³ (default 200).
    #[arg(long)]
    gens_factor: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    Direct,
    Tilted,
    Exact,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct SurvivalArgs {
    #[arg(long)]
    dist: Option<StepDistribution>,
    /// Killing slope is v(p) − eps.
    #[arg(long)]
    eps: Option<f64>,
    /// Strictly descending ε values; runs a sweep at m = ⌈λ·ε^{−3/2}⌉.
    #[arg(long, value_delimiter = ',', conflicts_with = "eps")]
    eps_list: Option<Vec<f64>>,
    /// Horizon m (default ⌈λ·ε^{−3/2}⌉).
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Alive-vertex cap per front.
    #[arg(long)]
    cap: Option<usize>,
    /// Upper tube wall for the tilted estimator (default 4·ε^{−1/2}).
    #[arg(long)]
    band: Option<f64>,
    #[arg(long)]
    method: Option<MethodArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelArg {
    /// v_inf − v_N against c·(log N + a)⁻² and c·(log N)^{−β}.
    Logsq,
    /// v_inf − v_N against c·N^{−γ}.
    Power,
    /// v_inf − v_N against c·e^{−d·N}.
    Exp,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct FitArgs {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Sweep CSV with columns `n` and `v_point`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Limit velocity (default: from --dist for logsq, 1 otherwise).
    #[arg(long, conflicts_with = "dist")]
    v_inf: Option<f64>,
    #[arg(long)]
    dist: Option<StepDistribution>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SelectionArg {
    Rightmost,
    Leftmost,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Option<Suite>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the selection rule (mutation testing of the suite itself).
    #[arg(long, value_enum, hide = true)]
    mutate_selection: Option<SelectionArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

/// The resolved parameters of one invocation; its hash goes into every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub params: Value,
}

impl RunConfig {
    fn new<T: Serialize>(subcommand: &'static str, params: &T) -> Result<Self> {
        Ok(Self {
            subcommand,
            params: serde_json::to_value(params)?,
        })
    }

    pub fn hash(&self) -> Result<String> {
        config_hash(self)
    }
}

/// Config file values overlaid by any flag given on the command line.
fn merge<T: Serialize + DeserializeOwned>(flags: T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else {
        return Ok(flags);
    };
    let text = fs::read_to_string(path)?;
    let mut base: Value = serde_json::from_str(&text)
        .map_err(|e| Error::param("--config", format!("{}: {e}", path.display())))?;
    let Some(obj) = base.as_object_mut() else {
        return Err(Error::param("--config", "must contain a JSON object"));
    };
    if let Value::Object(over) = serde_json::to_value(&flags)? {
        for (k, v) in over {
            if !v.is_null() {
                obj.insert(k, v);
            }
        }
    }
    serde_json::from_value(base)
        .map_err(|e| Error::param("--config", format!("{}: {e}", path.display())))
}

fn required<T>(value: Option<T>, flag: &'static str) -> Result<T> {
    value.ok_or_else(|| Error::param(flag, "is required"))
}

/// JSON envelope for results: every output carries the config hash and seed.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config_hash: &'a str,
    seed: Option<u64>,
    result: &'a T,
}

struct Outputs {
    dir: Option<PathBuf>,
    config: RunConfig,
    hash: String,
    seed: Option<u64>,
    started: Instant,
}

impl Outputs {
    fn new(dir: Option<PathBuf>, config: RunConfig, seed: Option<u64>) -> Result<Self> {
        let hash = config.hash()?;
        Ok(Self {
            dir,
            config,
            hash,
            seed,
            started: Instant::now(),
        })
    }

    fn result_json<T: Serialize>(&self, result: &T) -> Result<String> {
        to_json_pretty(&Envelope {
            config_hash: &self.hash,
            seed: self.seed,
            result,
        })
    }

    /// Prints `result` and, with `--out`, writes it with the tables and manifest.
    fn finish<T: Serialize>(&self, result: &T, tables: &[(&str, &Table)]) -> Result<()> {
        let json = self.result_json(result)?;
        print!("{json}");
        if let Some(dir) = &self.dir {
            for (name, table) in tables {
                atomic_write(&dir.join(name), table.to_csv().as_bytes())?;
            }
            atomic_write(&dir.join("summary.json"), json.as_bytes())?;
            let manifest = Manifest::new(
                &self.config,
                self.seed.unwrap_or(0),
                self.started.elapsed().as_secs_f64(),
            )?;
            atomic_write(&dir.join("manifest.json"), to_json_pretty(&manifest)?.as_bytes())?;
        }
        Ok(())
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit status. Diagnostics go to stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Theory(a) => {
            let config = a.config.clone();
            cmd_theory(merge(a, config.as_deref())?)
        }
        Command::Simulate(a) => {
            let config = a.config.clone();
            cmd_simulate(merge(a, config.as_deref())?)
        }
        Command::Sweep(a) => {
            let config = a.config.clone();
            cmd_sweep(merge(a, config.as_deref())?)
        }
        Command::Survival(a) => {
            let config = a.config.clone();
            cmd_survival(merge(a, config.as_deref())?)
        }
        Command::Fit(a) => {
            let config = a.config.clone();
            cmd_fit(merge(a, config.as_deref())?)
        }
        Command::Verify(a) => {
            let config = a.config.clone();
            cmd_verify(merge(a, config.as_deref())?)
        }
    }
}

fn positive(value: f64, flag: &'static str) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::param(flag, "must be a positive finite number"))
    }
}

fn constants_for(dist: &StepDistribution, tol: f64) -> Result<theory::TheoryConstants> {
    theory::constants(dist, positive(tol, "--tol")?)
}

#[derive(Serialize)]
struct TheoryOutput {
    dist: StepDistribution,
    #[serde(serialize_with = "crate::io::extended_real")]
    sigma: f64,
    #[serde(serialize_with = "crate::io::extended_real")]
    zeta: f64,
    a3: bool,
    t_star: f64,
    v_inf: f64,
    chi: f64,
}

fn cmd_theory(a: TheoryArgs) -> Result<i32> {
    let dist = required(a.dist, "--dist")?;
    let tol = a.tol.unwrap_or(1e-10);
    #[derive(Serialize)]
    struct Params {
        dist: StepDistribution,
        tol: f64,
    }
    let out = Outputs::new(a.out, RunConfig::new("theory", &Params { dist, tol })?, None)?;
    let report = theory::check_assumptions(&dist);
    let c = constants_for(&dist, tol)?;
    out.finish(
        &TheoryOutput {
            dist,
            sigma: report.sigma,
            zeta: report.zeta,
            a3: report.a3_holds,
            t_star: c.t_star,
            v_inf: c.v_inf,
            chi: c.chi,
        },
        &[],
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimulateParams {
    dist: StepDistribution,
    particles: usize,
    gens: u64,
    burn_in: u64,
    replicas: usize,
    seed: u64,
    diameter: bool,
    steps: bool,
}

#[derive(Serialize)]
struct SimulateOutput {
    velocity: VelocityEstimate,
    final_max: f64,
    final_min: f64,
    diameter_bound_holds: Option<bool>,
    /// Largest d(X_n)/bound over the instrumented trajectory.
    max_diameter_ratio: Option<f64>,
}

fn cmd_simulate(a: SimulateArgs) -> Result<i32> {
    let dist = required(a.dist, "--dist")?;
    let particles = required(a.particles, "--particles")?;
    if particles == 0 {
        return Err(Error::param("--particles", "N must be at least 1"));
    }
    let gens = a.gens.unwrap_or(1000);
    let burn_in = a.burn_in.unwrap_or_else(|| VelocityEstimate::default_burn_in(gens));
    if gens == 0 || gens <= burn_in {
        return Err(Error::param("--gens", "must be positive and exceed --burn-in"));
    }
    let replicas = a.replicas.unwrap_or(4);
    if replicas < 2 {
        return Err(Error::param("--replicas", "at least two replicas are required"));
    }
    let seed = a.seed.unwrap_or(0);
    let flags = a.instrument.unwrap_or_default();
    let params = SimulateParams {
        dist,
        particles,
        gens,
        burn_in,
        replicas,
        seed,
        diameter: flags.contains(&InstrumentFlag::Diameter),
        steps: flags.contains(&InstrumentFlag::Steps),
    };
    let out = Outputs::new(a.out, RunConfig::new("simulate", &params)?, Some(seed))?;
    let inst = Instrumentation {
        diameter: params.diameter,
        steps: params.steps,
    };
    let stats = run(&Population::concentrated(particles, 0.0), &dist, gens, seed, inst);
    let (holds, ratio) = if inst.diameter || inst.steps {
        let slack = diameter_slack(&stats, particles)?;
        let ratio = slack
            .iter()
            .filter(|s| s.bound > 0.0)
            .map(|s| s.diameter / s.bound)
            .fold(0.0, f64::max);
        (Some(check_diameter_bound(&stats, particles)?), Some(ratio))
    } else {
        (None, None)
    };
    let velocity = estimate_velocity(&dist, particles, gens, burn_in, replicas, seed)?;
    let last = stats.records.last().copied();
    let mut table = Table::new(["gen", "max", "min", "diameter", "seed", "config_hash"]);
    if out.dir.is_some() {
        for r in &stats.records {
            table.push(vec![
                r.gen.to_string(),
                fmt_num(r.max),
                fmt_num(r.min),
                fmt_num(r.diameter),
                seed.to_string(),
                out.hash.clone(),
            ]);
        }
    }
    out.finish(
        &SimulateOutput {
            velocity,
            final_max: last.map_or(0.0, |r| r.max),
            final_min: last.map_or(0.0, |r| r.min),
            diameter_bound_holds: holds,
            max_diameter_ratio: ratio,
        },
        &[("trajectory.csv", &table)],
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SweepOutput {
    records: Vec<experiments::SweepRecord>,
    monotonicity_violations: Vec<usize>,
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let dist = required(a.dist, "--dist")?;
    let n_list = required(a.n_list, "--n-list")?;
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::param("--n-list", "needs particle counts of at least 1"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("--n-list", "must be strictly ascending"));
    }
    let plan = match (a.gens, a.gens_factor) {
        (Some(gens), _) => GenerationPlan::Fixed {
            gens,
            burn_in: a.burn_in.unwrap_or_else(|| VelocityEstimate::default_burn_in(gens)),
        },
        (None, factor) => GenerationPlan::LogCubed {
            factor: positive(factor.unwrap_or(200.0), "--gens-factor")?,
        },
    };
    if let GenerationPlan::Fixed { gens, burn_in } = plan {
        if gens == 0 || gens <= burn_in {
            return Err(Error::param("--gens", "must be positive and exceed --burn-in"));
        }
    }
    let replicas = a.replicas.unwrap_or(4);
    if replicas < 2 {
        return Err(Error::param("--replicas", "at least two replicas are required"));
    }
    let config = VelocitySweepConfig {
        dist,
        n_list,
        plan,
        replicas,
        seed: a.seed.unwrap_or(0),
    };
    let out = Outputs::new(a.out, RunConfig::new("sweep", &config)?, Some(config.seed))?;
    let records = experiments::velocity_sweep(&config)?;
    let table = velocity_table(&records);
    let violations = monotonicity_violations(&records, 2.0);
    out.finish(
        &SweepOutput {
            records,
            monotonicity_violations: violations,
        },
        &[("sweep.csv", &table)],
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TiltedOutput {
    method: killedbrw::Method,
    eps: f64,
    horizon: u64,
    band: f64,
    mean: f64,
    std_err: f64,
    replicas: usize,
    delta_tail_bound: f64,
    /// E(Ξ_m) + (m + 1)·exp(−t*·band), an upper bound on ρ(m, ε).
    rho_upper_bound: f64,
}

#[derive(Serialize)]
struct ExactOutput {
    method: killedbrw::Method,
    eps: f64,
    horizon: u64,
    rho: f64,
}

fn cmd_survival(a: SurvivalArgs) -> Result<i32> {
    let dist = required(a.dist, "--dist")?;
    let tol = a.tol.unwrap_or(DEFAULT_TOL);
    let lambda = positive(a.lambda.unwrap_or(DEFAULT_LAMBDA), "--lambda")?;
    let replicas = a.replicas.unwrap_or(10_000);
    if replicas == 0 {
        return Err(Error::param("--replicas", "must be positive"));
    }
    let cap = a.cap.unwrap_or(DEFAULT_CAP);
    if cap == 0 {
        return Err(Error::param("--cap", "must be positive"));
    }
    let seed = a.seed.unwrap_or(0);
    let method = a.method.unwrap_or(MethodArg::Direct);

    if let Some(eps_list) = a.eps_list {
        if method != MethodArg::Direct || a.horizon.is_some() {
            return Err(Error::param("--eps-list", "sweeps use the direct method at m = ⌈λ·ε^(−3/2)⌉"));
        }
        let config = SurvivalSweepConfig {
            dist,
            eps_list,
            lambda,
            replicas,
            cap,
            seed,
        };
        #[derive(Serialize)]
        struct Params<'a> {
            sweep: &'a SurvivalSweepConfig,
            tol: f64,
        }
        let out = Outputs::new(
            a.out,
            RunConfig::new("survival", &Params { sweep: &config, tol })?,
            Some(seed),
        )?;
        let c = constants_for(&dist, tol)?;
        let sweep = experiments::survival_sweep(&config, &c)?;
        let table = survival_table(&sweep.records);
        out.finish(&sweep, &[("survival.csv", &table)])?;
        return Ok(EXIT_OK);
    }

    let eps = positive(required(a.eps, "--eps")?, "--eps")?;
    let horizon = a.horizon.unwrap_or_else(|| critical_horizon(lambda, eps));
    let band = positive(a.band.unwrap_or_else(|| default_band(eps)), "--band")?;
    #[derive(Serialize)]
    struct Params {
        dist: StepDistribution,
        eps: f64,
        horizon: u64,
        replicas: usize,
        cap: usize,
        band: f64,
        method: MethodArg,
        seed: u64,
        tol: f64,
    }
    let params = Params {
        dist,
        eps,
        horizon,
        replicas,
        cap,
        band,
        method,
        seed,
        tol,
    };
    let out = Outputs::new(a.out, RunConfig::new("survival", &params)?, Some(seed))?;
    let c = constants_for(&dist, tol)?;
    match method {
        MethodArg::Direct => {
            if horizon == 0 {
                return Err(Error::param("--horizon", "must be at least 1"));
            }
            let est = killedbrw::estimate_rho(&dist, &c, eps, horizon, replicas, cap, seed)?;
            out.finish(&est, &[])?;
        }
        MethodArg::Tilted => {
            let m = killedbrw::tilted_first_moment(&dist, &c, eps, horizon, band, replicas, seed)?;
            let delta = killedbrw::delta_tail_bound(&c, band, horizon)?;
            out.finish(
                &TiltedOutput {
                    method: killedbrw::Method::TiltedFirstMoment,
                    eps,
                    horizon,
                    band,
                    mean: m.mean,
                    std_err: m.std_err,
                    replicas,
                    delta_tail_bound: delta,
                    rho_upper_bound: m.mean + delta,
                },
                &[],
            )?;
        }
        MethodArg::Exact => {
            let rho = killedbrw::exact_rho_dp_at(&dist, &BarrierSpec::from_constants(&c, eps, horizon)?)?;
            out.finish(
                &ExactOutput {
                    method: killedbrw::Method::ExactDp,
                    eps,
                    horizon,
                    rho,
                },
                &[],
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_fit(a: FitArgs) -> Result<i32> {
    let model = required(a.model, "--model")?;
    let input = required(a.input, "--input")?;
    let tol = a.tol.unwrap_or(DEFAULT_TOL);
    let v_inf = match (a.v_inf, a.dist) {
        (Some(v), _) => v,
        (None, Some(dist)) => constants_for(&dist, tol)?.v_inf,
        (None, None) if model == ModelArg::Logsq => {
            return Err(Error::param("--v-inf", "logsq needs --v-inf or --dist"))
        }
        (None, None) => 1.0,
    };
    if !v_inf.is_finite() {
        return Err(Error::param("--v-inf", "must be finite"));
    }
    let text = fs::read_to_string(&input)?;
    let table = Table::parse_csv(&text)?;
    let ns = table.column("n")?;
    let vs = table.column("v_point")?;
    #[derive(Serialize)]
    struct Params<'a> {
        model: ModelArg,
        input_sha256: String,
        v_inf: f64,
        dist: Option<&'a StepDistribution>,
    }
    let params = Params {
        model,
        input_sha256: config_hash(&text)?,
        v_inf,
        dist: a.dist.as_ref(),
    };
    let out = Outputs::new(a.out, RunConfig::new("fit", &params)?, None)?;
    match model {
        ModelArg::Logsq => {
            let fit = experiments::fit_log_square_xy(&ns, &vs, v_inf)?;
            out.finish(&fit, &[])?;
        }
        ModelArg::Power | ModelArg::Exp => {
            let gaps: Vec<f64> = ns
                .iter()
                .zip(&vs)
                .map(|(&n, &v)| {
                    let gap = v_inf - v;
                    if gap > 0.0 {
                        Ok(gap)
                    } else {
                        Err(Error::NonPositiveGap { control: n, gap })
                    }
                })
                .collect::<Result<_>>()?;
            let fit = if model == ModelArg::Power {
                experiments::fit_power_in_n(&ns, &gaps)?
            } else {
                experiments::fit_exponential_in_n(&ns, &gaps)?
            };
            out.finish(&fit, &[])?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    let suite = a.suite.unwrap_or(Suite::Fast);
    let seed = a.seed.unwrap_or(0);
    let selection = match a.mutate_selection.unwrap_or(SelectionArg::Rightmost) {
        SelectionArg::Rightmost => Selection::Rightmost,
        SelectionArg::Leftmost => Selection::Leftmost,
    };
    #[derive(Serialize)]
    struct Params {
        suite: Suite,
        seed: u64,
        mutate_selection: Option<SelectionArg>,
    }
    let params = Params {
        suite,
        seed,
        mutate_selection: a.mutate_selection,
    };
    let started = Instant::now();
    let config = RunConfig::new("verify", &params)?;
    let report = run_suite(suite, seed, selection)?;
    print!("{}", report.to_text());
    if let Some(dir) = &a.out {
        let hash = config.hash()?;
        let json = to_json_pretty(&Envelope {
            config_hash: &hash,
            seed: Some(seed),
            result: &report,
        })?;
        atomic_write(&dir.join("verify_report.json"), json.as_bytes())?;
        let manifest = Manifest::new(&config, seed, started.elapsed().as_secs_f64())?;
        atomic_write(&dir.join("manifest.json"), to_json_pretty(&manifest)?.as_bytes())?;
    }
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        eprintln!("failed invariants: {}", report.failed().join(", "));
        Ok(EXIT_RUNTIME)
    }
}
