//! Command-line front end.
//!
//! Settings resolve as flag, then config-file key, then built-in default.
//! Every invalid setting is reported in one usage error before any work starts.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::ambiguity::check_sensing_condition;
use crate::constellation::make_constellation;
use crate::error::{Error, Result};
use crate::grid::{GridKind, GridSpec, DEFAULT_MAX_POINTS};
use crate::harness::{
    all_kinds, analytic_grids_capped, compare, magnitude_kinds, mean_abs_deviation, run_trials_capped,
    sweep_configs, ExperimentPlan, ExperimentResult,
};
use crate::metrics::{mainlobe_region, sensing_metrics};
use crate::modulator::{format_rational, parse_rational, AfdmConfig, Rational};
use crate::output::{emit_outputs, write_json, SCHEMA_VERSION};
use crate::rng::RNG_NAME;

pub const DEFAULT_N: usize = 64;
pub const DEFAULT_ORDER: u32 = 4;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_OUT_DIR: &str = "afdm-out";
pub const OUT_DIR_ENV: &str = "AFDM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "afdm", version, about = "AFDM ambiguity-function statistics and sidelobe metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Empirical, analytic and Rice grids as CSV, plus their metrics.
    Ambiguity(SelectArgs),
    /// PSLR/ISLR of the magnitude grids, without grid CSVs.
    Metrics(SelectArgs),
    /// Metrics over several N and M.
    Sweep(SweepArgs),
    /// Checks that 2·c1·N·τ is an integer ≥ N for every integer delay 1..=τmax.
    SensingCheck(SensingArgs),
    /// Mean absolute deviation between the empirical mean |A| and the Rice mean.
    RiceFit,
}

#[derive(Debug, Args, Default)]
pub struct SelectArgs {
    /// Also run the OFDM baseline (c1 = c2 = 0) with the same N and M.
    #[arg(long)]
    pub ofdm: bool,
    /// Grid kinds to produce, comma separated (default: all that apply).
    #[arg(long, value_delimiter = ',')]
    pub kinds: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Numbers of chirps, comma separated (default: --n).
    #[arg(long, value_delimiter = ',')]
    pub ns: Vec<usize>,
    /// Constellation orders, comma separated (default: --m).
    #[arg(long, value_delimiter = ',')]
    pub ms: Vec<u32>,
    #[arg(long)]
    pub ofdm: bool,
}

#[derive(Debug, Args)]
pub struct SensingArgs {
    /// Largest integer delay checked (default: the grid's τ max, at least 1).
    #[arg(long)]
    pub max_delay: Option<i64>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Number of chirps N.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Constellation order M (square QAM).
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Chirp rate c1 as a rational, e.g. "1" or "1/128".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c2: Option<f64>,
    /// Chirp-segment index entering the common phase.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<i64>,
    /// Chirp-periodic prefix length.
    #[arg(long, global = true)]
    pub cpp: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// "default" (ν step 0.1) or "integer-doppler" (ν step 1).
    #[arg(long, global = true)]
    pub grid_preset: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tau_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tau_max: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tau_step: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub nu_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub nu_max: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub nu_step: Option<f64>,
    /// Largest lattice the run may allocate.
    #[arg(long, global = true)]
    pub max_points: Option<usize>,
    /// TOML file with any of the settings above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

/// Config-file schema. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub m: Option<u32>,
    pub c1: Option<toml::Value>,
    pub c2: Option<f64>,
    pub q: Option<i64>,
    pub cpp: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub grid_preset: Option<String>,
    pub max_points: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub grid: FileGrid,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileGrid {
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub tau_step: Option<f64>,
    pub nu_min: Option<f64>,
    pub nu_max: Option<f64>,
    pub nu_step: Option<f64>,
}

pub fn load_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Usage(format!("{}: {}", path.display(), e.message())))
}

/// Fully resolved and validated settings of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub cfg: AfdmConfig,
    pub trials: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub max_points: usize,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub verbosity: u8,
}

pub fn grid_preset(name: &str) -> Option<GridSpec> {
    match name {
        "default" => Some(GridSpec::default()),
        "integer-doppler" => Some(GridSpec::integer_doppler()),
        _ => None,
    }
}

pub fn parse_config(args: &CommonArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(p) => load_file_config(p)?,
        None => FileConfig::default(),
    };
    let mut errors = Vec::new();

    let n = args.n.or(file.n).unwrap_or(DEFAULT_N);
    let order = args.m.or(file.m).unwrap_or(DEFAULT_ORDER);
    let c1 = match (&args.c1, &file.c1) {
        (Some(s), _) => parse_rational(s),
        (None, Some(toml::Value::String(s))) => parse_rational(s),
        (None, Some(toml::Value::Integer(i))) => Ok(Rational::from_integer(*i)),
        (None, Some(v)) => Err(Error::Usage(format!("c1 must be a string or integer, got {v}"))),
        (None, None) => Ok(Rational::from_integer(1)),
    };
    let c1 = c1.unwrap_or_else(|e| {
        errors.push(e.to_string());
        Rational::from_integer(1)
    });
    let c2 = args.c2.or(file.c2).unwrap_or(0.0);
    let q = args.q.or(file.q).unwrap_or(0);
    let cpp_len = args.cpp.or(file.cpp).unwrap_or(0);
    let trials = args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let max_points = args.max_points.or(file.max_points).unwrap_or(DEFAULT_MAX_POINTS);
    let threads = args.threads.or(file.threads);

    if let Err(e) = make_constellation(order) {
        errors.push(e.to_string());
    }
    let cfg = AfdmConfig { n, c1, c2, order, cpp_len, q, bandwidth_hz: None };
    if let Err(e) = cfg.validate() {
        errors.push(e.to_string());
    }
    if trials == 0 {
        errors.push("trials must be at least 1".into());
    }
    if threads == Some(0) {
        errors.push("threads must be at least 1".into());
    }

    let preset = args.grid_preset.as_deref().or(file.grid_preset.as_deref()).unwrap_or("default");
    let base = grid_preset(preset).unwrap_or_else(|| {
        errors.push(format!("unknown grid preset '{preset}' (expected default or integer-doppler)"));
        GridSpec::default()
    });
    let fg = &file.grid;
    let grid = GridSpec {
        tau_min: args.tau_min.or(fg.tau_min).unwrap_or(base.tau_min),
        tau_max: args.tau_max.or(fg.tau_max).unwrap_or(base.tau_max),
        tau_step: args.tau_step.or(fg.tau_step).unwrap_or(base.tau_step),
        nu_min: args.nu_min.or(fg.nu_min).unwrap_or(base.nu_min),
        nu_max: args.nu_max.or(fg.nu_max).unwrap_or(base.nu_max),
        nu_step: args.nu_step.or(fg.nu_step).unwrap_or(base.nu_step),
    };
    if let Err(e) = grid.validate() {
        errors.push(e.to_string());
    }
    if !errors.is_empty() {
        return Err(Error::Usage(errors.join("; ")));
    }
    grid.check_cap(max_points)?;

    let out_dir = args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok(RunConfig { cfg, trials, seed, grid, max_points, out_dir, threads, verbosity: args.verbose })
}

fn parse_kinds(names: &[String], default: Vec<GridKind>) -> Result<Vec<GridKind>> {
    if names.is_empty() {
        return Ok(default);
    }
    let mut bad = Vec::new();
    let mut kinds = Vec::new();
    for n in names {
        match GridKind::from_name(n.trim()) {
            Some(k) if !kinds.contains(&k) => kinds.push(k),
            Some(_) => {}
            None => bad.push(n.clone()),
        }
    }
    if !bad.is_empty() {
        let known: Vec<&str> = GridKind::ALL.iter().map(|k| k.name()).collect();
        return Err(Error::Usage(format!("unknown grid kind(s) {} (known: {})", bad.join(", "), known.join(", "))));
    }
    Ok(kinds)
}

struct Ctx<'a> {
    rc: RunConfig,
    out: &'a mut (dyn Write + Send),
}

impl Ctx<'_> {
    fn say(&mut self, text: impl AsRef<str>) -> Result<()> {
        writeln!(self.out, "{}", text.as_ref()).map_err(|e| Error::io("<stdout>", e))
    }

    fn progress(&self, text: impl AsRef<str>) {
        if self.rc.verbosity > 0 {
            eprintln!("{}", text.as_ref());
        }
    }

    fn plan(&self, cfgs: Vec<AfdmConfig>, outputs: Vec<GridKind>) -> ExperimentPlan {
        ExperimentPlan {
            cfgs,
            grid: self.rc.grid,
            trials: self.rc.trials,
            base_seed: self.rc.seed,
            outputs,
            max_points: self.rc.max_points,
        }
    }

    fn report(&mut self, result: &ExperimentResult) -> Result<()> {
        self.say(format!("{:<28} {:<28} {:>10} {:>10}", "config", "grid_kind", "pslr_db", "islr_db"))?;
        for c in &result.configs {
            for m in &c.metrics {
                let line = format!(
                    "{:<28} {:<28} {:>10.3} {:>10.3}",
                    c.cfg.label(),
                    m.grid_kind.name(),
                    m.metrics.pslr_db,
                    m.metrics.islr_db
                );
                self.say(line)?;
            }
        }
        Ok(())
    }

    fn experiment(&mut self, cfgs: Vec<AfdmConfig>, outputs: Vec<GridKind>, grids: bool) -> Result<()> {
        let plan = self.plan(cfgs, outputs);
        self.progress(format!(
            "running {} configuration(s), {} trials, {} grid points",
            plan.cfgs.len(),
            plan.trials,
            plan.grid.num_points()
        ));
        let result = compare(&plan)?;
        let manifest = emit_outputs(&result, &self.rc.out_dir, grids)?;
        self.report(&result)?;
        self.say(format!("wrote {} files to {}", manifest.files.len() + 1, self.rc.out_dir.display()))
    }

    fn with_ofdm(&self, ofdm: bool) -> Vec<AfdmConfig> {
        let mut cfgs = vec![self.rc.cfg.clone()];
        if ofdm {
            let base = AfdmConfig { c1: Rational::from_integer(0), c2: 0.0, ..self.rc.cfg.clone() };
            if base != cfgs[0] {
                cfgs.push(base);
            }
        }
        cfgs
    }
}

#[derive(Debug, Serialize)]
struct RiceFitReport {
    schema_version: u32,
    config: AfdmConfig,
    grid: GridSpec,
    trials: usize,
    base_seed: u64,
    rng_name: String,
    mean_abs_deviation: f64,
    max_abs_deviation: f64,
    empirical_pslr_db: f64,
    rice_pslr_db: f64,
    empirical_islr_db: f64,
    rice_islr_db: f64,
}

#[derive(Debug, Serialize)]
struct SensingJson {
    schema_version: u32,
    config: AfdmConfig,
    two_c1_n: String,
    tau_max: i64,
    passed: bool,
    failing_delays: Vec<i64>,
}

fn execute(command: Command, ctx: &mut Ctx) -> Result<()> {
    match command {
        Command::Ambiguity(a) => {
            let kinds = parse_kinds(&a.kinds, all_kinds())?;
            let cfgs = ctx.with_ofdm(a.ofdm);
            ctx.experiment(cfgs, kinds, true)
        }
        Command::Metrics(a) => {
            let kinds = parse_kinds(&a.kinds, magnitude_kinds())?;
            if let Some(k) = kinds.iter().find(|k| !k.is_magnitude()) {
                return Err(Error::Usage(format!("{} is not a magnitude grid; metrics need one", k.name())));
            }
            let cfgs = ctx.with_ofdm(a.ofdm);
            ctx.experiment(cfgs, kinds, false)
        }
        Command::Sweep(s) => {
            let ns = if s.ns.is_empty() { vec![ctx.rc.cfg.n] } else { s.ns };
            let ms = if s.ms.is_empty() { vec![ctx.rc.cfg.order] } else { s.ms };
            let cfgs = sweep_configs(&ctx.rc.cfg, &ns, &ms, s.ofdm).map_err(|e| Error::Usage(e.to_string()))?;
            ctx.experiment(cfgs, magnitude_kinds(), false)
        }
        Command::SensingCheck(s) => {
            let tau_max = s.max_delay.unwrap_or((ctx.rc.grid.tau_max.floor() as i64).max(1));
            if tau_max < 1 {
                return Err(Error::Usage("--max-delay must be at least 1".into()));
            }
            let cfg = ctx.rc.cfg.clone();
            let report = check_sensing_condition(&cfg, tau_max);
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            ctx.say(format!(
                "sensing condition for {}: 2*c1*N = {}, delays 1..={}: {}",
                cfg.label(),
                format_rational(&report.two_c1_n),
                tau_max,
                verdict
            ))?;
            for f in report.failures.iter().take(5) {
                let mut why = Vec::new();
                if f.not_integer {
                    why.push("not an integer");
                }
                if f.below_n {
                    why.push("below N");
                }
                ctx.say(format!("  tau = {}: 2*c1*N*tau = {} ({})", f.tau, format_rational(&f.value), why.join(", ")))?;
            }
            if report.failures.len() > 5 {
                ctx.say(format!("  ... {} failing delays in total", report.failures.len()))?;
            }
            let doc = SensingJson {
                schema_version: SCHEMA_VERSION,
                config: cfg,
                two_c1_n: format_rational(&report.two_c1_n),
                tau_max,
                passed: report.passed(),
                failing_delays: report.failures.iter().map(|f| f.tau).collect(),
            };
            write_json(&ctx.rc.out_dir, "sensing_check.json", &doc)?;
            Ok(())
        }
        Command::RiceFit => {
            let rc = ctx.rc.clone();
            ctx.progress(format!("{} trials on {} points", rc.trials, rc.grid.num_points()));
            let emp = run_trials_capped(&rc.cfg, &rc.grid, rc.trials, rc.seed, rc.max_points)?;
            let ana = analytic_grids_capped(&rc.cfg, &rc.grid, rc.max_points)?;
            let mad = mean_abs_deviation(&emp.mean_magnitude, &ana.rice_mean)?;
            let max = emp
                .mean_magnitude
                .magnitudes()
                .iter()
                .zip(ana.rice_mean.magnitudes())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let region = mainlobe_region(&rc.cfg);
            let me = sensing_metrics(&emp.mean_magnitude, &region)?;
            let mr = sensing_metrics(&ana.rice_mean, &region)?;
            ctx.say(format!("{}: mean |empirical - rice| = {mad:.6}, max = {max:.6}", rc.cfg.label()))?;
            ctx.say(format!("  empirical PSLR {:.3} dB, ISLR {:.3} dB", me.pslr_db, me.islr_db))?;
            ctx.say(format!("  rice      PSLR {:.3} dB, ISLR {:.3} dB", mr.pslr_db, mr.islr_db))?;
            let doc = RiceFitReport {
                schema_version: SCHEMA_VERSION,
                config: rc.cfg,
                grid: rc.grid,
                trials: rc.trials,
                base_seed: rc.seed,
                rng_name: RNG_NAME.to_string(),
                mean_abs_deviation: mad,
                max_abs_deviation: max,
                empirical_pslr_db: me.pslr_db,
                rice_pslr_db: mr.pslr_db,
                empirical_islr_db: me.islr_db,
                rice_islr_db: mr.islr_db,
            };
            write_json(&rc.out_dir, "rice_fit.json", &doc)?;
            Ok(())
        }
    }
}

/// Runs a parsed command line, writing the human-readable report to `out`.
pub fn run(cli: Cli, out: &mut (dyn Write + Send)) -> Result<()> {
    let rc = parse_config(&cli.common)?;
    let command = cli.command.unwrap_or(Command::Ambiguity(SelectArgs::default()));
    let threads = rc.threads;
    let mut ctx = Ctx { rc, out };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(|| execute(command, &mut ctx)),
        None => execute(command, &mut ctx),
    }
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, &mut std::io::stdout()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("afdm: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(args: &[&str]) -> CommonArgs {
        let mut v = vec!["afdm"];
        v.extend_from_slice(args);
        Cli::try_parse_from(v).unwrap().common
    }

    #[test]
    fn defaults() {
        let rc = parse_config(&CommonArgs::default()).unwrap();
        assert_eq!(rc.cfg, AfdmConfig::afdm(64, 4).unwrap());
        assert_eq!(rc.trials, 100);
        assert_eq!(rc.grid, GridSpec::default());
    }

    #[test]
    fn experiment_configuration_flags() {
        let rc = parse_config(&common(&["--n", "128", "--m", "4", "--c1", "1", "--c2", "0", "--trials", "1000", "--seed", "42"]))
            .unwrap();
        assert_eq!(rc.cfg, AfdmConfig::afdm(128, 4).unwrap());
        assert_eq!((rc.trials, rc.seed), (1000, 42));
        let rc = parse_config(&common(&["--c1", "1/128", "--n", "128"])).unwrap();
        assert_eq!(rc.cfg.c1, Rational::new(1, 128));
    }

    #[test]
    fn errors_are_collected() {
        let e = parse_config(&common(&["--m", "8", "--c1", "x/2", "--trials", "0", "--tau-step", "-1"])).unwrap_err();
        let msg = e.to_string();
        assert_eq!(e.exit_code(), 2);
        for part in ["order 8", "malformed rational", "trials", "steps must be positive"] {
            assert!(msg.contains(part), "{msg}");
        }
    }

    #[test]
    fn file_then_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, "n = 32\nm = 16\nc1 = \"1/2\"\ntrials = 7\ngrid_preset = \"integer-doppler\"\n[grid]\ntau_max = 4.0\n").unwrap();
        let path = p.to_str().unwrap();
        let rc = parse_config(&common(&["--config", path, "--m", "64"])).unwrap();
        assert_eq!((rc.cfg.n, rc.cfg.order, rc.trials), (32, 64, 7));
        assert_eq!(rc.cfg.c1, Rational::new(1, 2));
        assert_eq!(rc.grid.nu_step, 1.0);
        assert_eq!(rc.grid.tau_max, 4.0);
        std::fs::write(&p, "bogus = 1\n").unwrap();
        assert_eq!(parse_config(&common(&["--config", path])).unwrap_err().exit_code(), 2);
        let missing = dir.path().join("none.toml");
        assert_eq!(parse_config(&common(&["--config", missing.to_str().unwrap()])).unwrap_err().exit_code(), 4);
    }

    #[test]
    fn resource_cap_exit_code() {
        let e = parse_config(&common(&["--max-points", "100"])).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(main_with_args(["afdm", "--bogus"]), 2);
        assert!(parse_kinds(&["rice_mean".into(), "nope".into()], vec![]).is_err());
    }
}
