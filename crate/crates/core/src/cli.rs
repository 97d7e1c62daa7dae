//! The `nsch` command line: `run`, `list-cases` and `sample`.
//!
//! Settings resolve in three layers: the case's table row, then a flat
//! `key = value` config file, then flags. Exit codes: 2 for configuration
//! errors, 3 for file errors, 4 for numerical failure.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cases::{all_cases, case_spec, init_state, CaseName, Phi0Kind};
use crate::diagnostics::{axial_section, metrics, AXIS_Y};
use crate::energy::{energy_report, ledger_append};
use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::io::{read_snapshot, write_samples, write_section, write_snapshot, EnergyCsv, MetricsCsv};
use crate::model::Params;
use crate::sampler::{sample_state, SamplerConfig};
use crate::stepper::{StepConfig, Stepper};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Emit {
    Energy,
    Metrics,
    Sections,
    Snapshots,
    Samples,
}

impl Emit {
    pub const ALL: [Emit; 5] = [Emit::Energy, Emit::Metrics, Emit::Sections, Emit::Snapshots, Emit::Samples];
}

impl FromStr for Emit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "energy" => Emit::Energy,
            "metrics" => Emit::Metrics,
            "sections" => Emit::Sections,
            "snapshots" => Emit::Snapshots,
            "samples" => Emit::Samples,
            other => return Err(Error::Param(format!("unknown emit target `{other}`"))),
        })
    }
}

fn parse_emit(s: &str) -> Result<BTreeSet<Emit>> {
    match s.trim() {
        "" | "none" => Ok(BTreeSet::new()),
        "all" => Ok(Emit::ALL.into()),
        list => list.split(',').map(Emit::from_str).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub case: CaseName,
    pub params: Params,
    pub step: StepConfig,
    pub sampler: SamplerConfig,
    pub nx: usize,
    pub ny: usize,
    pub t_end: f64,
    /// Output cadence in simulated time.
    pub output_every: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub emit: BTreeSet<Emit>,
}

impl RunConfig {
    pub fn for_case(case: CaseName) -> Self {
        let spec = case_spec(case);
        Self {
            case,
            params: spec.params,
            step: StepConfig::default(),
            sampler: SamplerConfig::default(),
            nx: 64,
            ny: 32,
            t_end: spec.t_end,
            output_every: spec.window_dt,
            out_dir: PathBuf::from("out"),
            seed: 0,
            emit: [Emit::Energy, Emit::Metrics].into(),
        }
    }

    /// Applies one `key = value` setting. `case` is handled by the caller.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let real = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Param(format!("`{key}` expects a number, got `{value}`")))
        };
        let count = || -> Result<usize> {
            value
                .parse::<usize>()
                .map_err(|_| Error::Param(format!("`{key}` expects a count, got `{value}`")))
        };
        let p = &mut self.params;
        match key.as_str() {
            "eta_b" => p.eta_b = real()?,
            "eta_t" => p.eta_t = real()?,
            "kappa_b" => p.kappa_b = real()?,
            "kappa_t" => p.kappa_t = real()?,
            "nu_b" => p.nu_b = real()?,
            "nu_t" => p.nu_t = real()?,
            "lambda" => p.lambda = real()?,
            "gamma" => p.gamma = real()?,
            "tau" => p.tau = real()?,
            "h" => p.h = real()?,
            "k" => p.k = real()?,
            "rho" => p.rho = real()?,
            "dt" | "dt_max" => self.step.dt = real()?,
            "stab_s" => self.step.stab_s = Some(real()?),
            "visc_split" => self.step.visc_split = Some(real()?),
            "cfl_safety" => self.step.cfl_safety = real()?,
            "sampler.n" | "sampler.n_samples" => self.sampler.n_samples = count()?,
            "sampler.burn_in" => self.sampler.burn_in = count()?,
            "sampler.proposal_std" => self.sampler.proposal_std = real()?,
            "sampler.floor_frac" => self.sampler.floor_frac = real()?,
            "nx" => self.nx = count()?,
            "ny" => self.ny = count()?,
            "t_end" => self.t_end = real()?,
            "output_every" => self.output_every = real()?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Param(format!("`seed` expects an integer, got `{value}`")))?
            }
            "emit" => self.emit = parse_emit(value)?,
            _ => return Err(Error::Param(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.step.validate()?;
        self.sampler.validate()?;
        Grid::channel(self.nx, self.ny)?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Param(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.output_every > 0.0 && self.output_every.is_finite()) {
            return Err(Error::Param(format!("output cadence must be positive, got {}", self.output_every)));
        }
        Ok(())
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Param(format!("config line {}: expected `key = value`", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Builds a run configuration from the three layers. `flags` are applied last.
pub fn resolve(case_flag: Option<&str>, config_text: Option<&str>, flags: &[(String, String)]) -> Result<RunConfig> {
    let file = config_text.map(parse_config).transpose()?.unwrap_or_default();
    let case_name = case_flag
        .map(str::to_string)
        .or_else(|| file.iter().rev().find(|(k, _)| k == "case").map(|(_, v)| v.clone()))
        .unwrap_or_else(|| "A".to_string());
    let mut cfg = RunConfig::for_case(case_name.parse()?);
    for (k, v) in file.iter().filter(|(k, _)| k != "case").chain(flags) {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub t: f64,
    pub e_final: f64,
    pub max_drift: f64,
    pub outputs: usize,
}

fn tag(t: f64) -> String {
    format!("t{t:.4}")
}

/// Runs one case, writing the selected outputs at `t = 0`, at every multiple
/// of the cadence, and at `t_end`. Steps are shortened to land on output times.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let grid = Grid::channel(cfg.nx, cfg.ny)?;
    let mut spec = case_spec(cfg.case);
    spec.params = cfg.params;
    let stepper = Stepper::new(grid, cfg.params, cfg.step)?;
    let init = init_state(&spec, grid);
    let mut state = init.clone();

    let dir = &cfg.out_dir;
    let mut energy_csv = match cfg.emit.contains(&Emit::Energy) {
        true => Some(EnergyCsv::create(&dir.join("energy.csv"))?),
        false => None,
    };
    let mut metrics_csv = match cfg.emit.contains(&Emit::Metrics) {
        true => Some(MetricsCsv::create(&dir.join("metrics.csv"))?),
        false => None,
    };

    let mut prev_report = energy_report(&state, &cfg.params);
    let mut max_drift: f64 = 0.0;
    let mut outputs = 0usize;
    let mut emit = |state: &crate::model::State, report: &crate::energy::EnergyReport| -> Result<f64> {
        let m = metrics(state, &init)?;
        if let Some(w) = energy_csv.as_mut() {
            w.write(report)?;
        }
        if let Some(w) = metrics_csv.as_mut() {
            w.write(&m)?;
        }
        let t = tag(state.t);
        if cfg.emit.contains(&Emit::Sections) {
            write_section(&dir.join(format!("section_{t}.csv")), &axial_section(&state.phi, AXIS_Y))?;
        }
        if cfg.emit.contains(&Emit::Snapshots) {
            write_snapshot(&dir.join(format!("snapshot_{t}")), state)?;
        }
        if cfg.emit.contains(&Emit::Samples) {
            let sc = SamplerConfig { seed: cfg.seed, ..cfg.sampler };
            let chain = sample_state(state, &cfg.params, &sc)?;
            write_samples(&dir.join(format!("samples_{t}.csv")), &chain.points)?;
        }
        outputs += 1;
        Ok(m.mean_phi_drift)
    };
    max_drift = max_drift.max(emit(&state, &prev_report)?);

    let eps = 1e-12 * cfg.output_every.max(1.0);
    let mut next_out = cfg.output_every;
    let mut steps = 0u64;
    while state.t < cfg.t_end - eps {
        let target = next_out.min(cfg.t_end);
        let dt = stepper.cfl_dt(&state).min(target - state.t);
        state = stepper.advance(&state, dt).map_err(|e| Error::Step {
            step: steps,
            source: Box::new(e),
        })?;
        steps += 1;
        if state.t >= target - eps {
            // absorb round-off so output times are exact
            state.t = target;
            let mut report = energy_report(&state, &cfg.params);
            ledger_append(&prev_report, &mut report);
            max_drift = max_drift.max(emit(&state, &report)?);
            prev_report = report;
            if target >= next_out - eps {
                next_out += cfg.output_every;
            }
        }
    }
    Ok(RunSummary {
        steps,
        t: state.t,
        e_final: prev_report.e_total,
        max_drift,
        outputs,
    })
}

pub fn list_cases() -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<4} {:<20} {:>6} {:>6} {:>8} {:>8} {:>8} {:>8} {:>6} {:>8} {:>8} {:>8} {:<6} {:>3} {:>5}",
        "case", "label", "eta_b", "eta_t", "kappa_b", "kappa_t", "nu_b", "nu_t", "h", "gamma", "tau", "lambda", "phi0", "aa", "t_end"
    );
    for c in all_cases() {
        let p = c.params;
        let kind = match c.phi0_kind {
            Phi0Kind::Single => "single",
            Phi0Kind::Two => "two",
        };
        let _ = writeln!(
            s,
            "{:<4} {:<20} {:>6} {:>6} {:>8} {:>8} {:>8} {:>8} {:>6} {:>8} {:>8} {:>8} {:<6} {:>3} {:>5}",
            c.name.as_str(),
            c.label,
            p.eta_b,
            p.eta_t,
            p.kappa_b,
            p.kappa_t,
            p.nu_b,
            p.nu_t,
            p.h,
            p.gamma,
            p.tau,
            p.lambda,
            kind,
            if c.aa_sampling { "yes" } else { "no" },
            c.t_end
        );
    }
    s
}

/// Samples a stored state; returns the CSV path and the acceptance rate.
pub fn sample(cfg: &RunConfig, snapshot: &Path) -> Result<(PathBuf, f64)> {
    let state = read_snapshot(snapshot)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let sc = SamplerConfig { seed: cfg.seed, ..cfg.sampler };
    let chain = sample_state(&state, &cfg.params, &sc)?;
    let path = cfg.out_dir.join("samples.csv");
    write_samples(&path, &chain.points)?;
    Ok((path, chain.acceptance_rate))
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Step { .. } | Error::NonFinite { .. } | Error::Residual { .. } => 4,
        Error::Io(_) | Error::Csv(_) | Error::Format(_) => 3,
        _ => 2,
    }
}

/// Applies `NSCH_THREADS`: unset or 1 runs sequentially, 0 uses every core,
/// larger values size the worker pool.
pub fn configure_threads(var: Option<&str>) -> Result<()> {
    let n: usize = match var {
        None => 1,
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Param(format!("NSCH_THREADS must be a non-negative integer, got `{v}`")))?,
    };
    if n == 1 {
        crate::spectral::set_parallel(false);
        return Ok(());
    }
    if n > 1 {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    crate::spectral::set_parallel(true);
    Ok(())
}

#[derive(Parser, Debug)]
#[command(name = "nsch", version, about = "Thrombus phase-field channel simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a case and write CSV outputs.
    Run(Common),
    /// Print the case table.
    ListCases,
    /// Draw energy-adaptive sample points from a snapshot.
    Sample {
        /// Snapshot stem or its `.phi.bin` file.
        #[arg(long)]
        snapshot: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    case: Option<String>,
    /// Flat `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long = "dt-max")]
    dt_max: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Output cadence in simulated time.
    #[arg(long = "output-every")]
    output_every: Option<f64>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma list of energy, metrics, sections, snapshots, samples; or all / none.
    #[arg(long)]
    emit: Option<String>,
    #[arg(long = "sampler.n")]
    sampler_n: Option<usize>,
    #[arg(long = "sampler.burn-in")]
    sampler_burn_in: Option<usize>,
    #[arg(long = "sampler.proposal-std")]
    sampler_proposal_std: Option<f64>,
    /// Any other setting, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let text = match &self.config {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| {
                Error::Param(format!("cannot read config {}: {e}", p.display()))
            })?),
            None => None,
        };
        let mut flags: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                flags.push((k.to_string(), v));
            }
        };
        push("nx", self.nx.map(|v| v.to_string()));
        push("ny", self.ny.map(|v| v.to_string()));
        push("dt_max", self.dt_max.map(|v| v.to_string()));
        push("t_end", self.t_end.map(|v| v.to_string()));
        push("output_every", self.output_every.map(|v| v.to_string()));
        push("out_dir", self.out_dir.as_ref().map(|v| v.to_string_lossy().into_owned()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("emit", self.emit.clone());
        push("sampler.n", self.sampler_n.map(|v| v.to_string()));
        push("sampler.burn_in", self.sampler_burn_in.map(|v| v.to_string()));
        push("sampler.proposal_std", self.sampler_proposal_std.map(|v| v.to_string()));
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Param(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            flags.push((k.to_string(), v.to_string()));
        }
        resolve(self.case.as_deref(), text.as_deref(), &flags)
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ListCases => {
            print!("{}", list_cases());
        }
        Command::Run(common) => {
            let cfg = common.resolve()?;
            let start = Instant::now();
            let s = run(&cfg)?;
            println!(
                "case {} steps {} t {:.6} wall {:.3}s E_final {:.6e} max_mass_drift {:.3e} outputs {}",
                cfg.case,
                s.steps,
                s.t,
                start.elapsed().as_secs_f64(),
                s.e_final,
                s.max_drift,
                s.outputs
            );
        }
        Command::Sample { snapshot, common } => {
            let cfg = common.resolve()?;
            let (path, acc) = sample(&cfg, &snapshot)?;
            println!("wrote {} (acceptance {acc:.3})", path.display());
        }
    }
    Ok(())
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(std::env::var("NSCH_THREADS").ok().as_deref()) {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
