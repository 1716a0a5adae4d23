//! The `slv` command line: one subcommand per experiment, TOML configuration,
//! CSV/JSON artifacts and a run manifest.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::classify3d::classify;
use crate::config::{ExperimentConfig, GeometryKind, SimScheme, SweepTargetKind, SystemSpec};
use crate::decomposition::{decomposed_trajectory, level_curve, ConeReference};
use crate::error::{Error, Result};
use crate::experiments::{
    decompose_check, deterministic_limit, median, pullback_convergence, random_equilibrium_samples, ray_check,
    summarize_scalar, support_ladder, EquilibriumSampleOptions,
};
use crate::lv::{integrate_ode, LVSystem, Trajectory};
use crate::measures::{
    default_burn_in, empirical_time_average, sigma_sweep, support_diagnostics, write_sweep_csv, Geometry,
    OrbitParam, SweepOptions, SweepRow, SweepTarget,
};
use crate::paths::sample_path;
use crate::presets;
use crate::sde::{integrate, Scheme, SdeOptions};
use crate::turbulence::{dwell_fraction, dwell_times, nonunique_time_averages, vertex, write_csv};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_CHECK: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "slv", version, about = "Stochastic Lotka-Volterra experiments")]
pub struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in system to use when the configuration has no [system] table.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Evaluate the pass/fail thresholds and exit with 4 on failure.
    #[arg(long, global = true)]
    pub check: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Integrate one trajectory (RK4, Euler-Maruyama, Milstein or decomposition).
    Simulate,
    /// Compare the decomposition with direct SDE integration on shared paths.
    DecomposeCheck,
    /// Pull-back convergence to u(ω)·P.
    Pullback,
    /// Empirical stationary measure, KS statistics and support masses.
    Stationary,
    /// Small-noise limits across a decreasing list of σ.
    SweepSigma,
    /// Structural classification of a 3-species competitive system.
    Classify,
    /// Dwell times and exit-time time averages near a heteroclinic cycle.
    Turbulence,
    /// Built-in systems.
    Examples {
        #[arg(long)]
        list: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::DecomposeCheck => "decompose-check",
            Self::Pullback => "pullback",
            Self::Stationary => "stationary",
            Self::SweepSigma => "sweep-sigma",
            Self::Classify => "classify",
            Self::Turbulence => "turbulence",
            Self::Examples { .. } => "examples",
        }
    }

    /// System used when neither the configuration nor `--preset` names one.
    fn default_system(&self) -> SystemSpec {
        match self {
            Self::DecomposeCheck => SystemSpec {
                sigma: Some(0.3),
                ..SystemSpec::preset("may-leonard-0.8-1.3")
            },
            Self::Pullback | Self::Stationary => SystemSpec::preset("example-4.1"),
            Self::SweepSigma => SystemSpec::preset("example-4.3"),
            _ => SystemSpec::preset("may-leonard-0.8-1.3"),
        }
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::Format(_) | Error::Json(_) => EXIT_CONFIG,
        Error::Budget(_)
        | Error::Resolution { .. }
        | Error::Diverged { .. }
        | Error::Insufficient(_)
        | Error::GridOverflow(_) => EXIT_BUDGET,
        _ => EXIT_FAILURE,
    }
}

/// Outcome of the `--check` thresholds.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Check {
    pub passed: bool,
    pub details: Vec<String>,
    /// Set when the run stopped on its simulation budget; artifacts are
    /// still written and the exit code is 3.
    pub exhausted: Option<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            passed: true,
            details: Vec::new(),
            exhausted: None,
        }
    }

    fn require(&mut self, ok: bool, what: String) {
        self.details.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
        self.passed &= ok;
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: String,
    seed: u64,
    threads: usize,
    files: Vec<String>,
    check: Option<&'a Check>,
    timestamp_unix: u64,
}

struct Output {
    dir: PathBuf,
    format: Format,
    files: Vec<String>,
}

impl Output {
    fn create(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.dir.join(name);
        self.files.push(name.to_string());
        Ok(BufWriter::new(fs::File::create(path)?))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// Writes the report as `<stem>.json`, or calls `csv` to produce
    /// `<stem>.csv` and adds the JSON summary next to it.
    fn report<T: Serialize>(
        &mut self,
        stem: &str,
        report: &T,
        csv: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>,
    ) -> Result<()> {
        match self.format {
            Format::Json => self.json(&format!("{stem}.json"), report),
            Format::Csv => {
                let mut w = self.create(&format!("{stem}.csv"))?;
                csv(&mut w)?;
                w.flush()?;
                self.json(&format!("{stem}.summary.json"), report)
            }
        }
    }
}

fn write_trajectory<W: Write>(t: &Trajectory, mut w: W) -> Result<()> {
    let cols: Vec<String> = (1..=t.dim()).map(|i| format!("y{i}")).collect();
    writeln!(w, "t,{}", cols.join(","))?;
    for (time, y) in t.times().iter().zip(t.states()) {
        let row: Vec<String> = y.iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(w, "{time:.9},{}", row.join(","))?;
    }
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match execute(&cli) {
        Ok((exhausted, check)) => {
            if let Some(msg) = exhausted {
                eprintln!("error: {msg}");
                return EXIT_BUDGET;
            }
            if let Some(c) = check {
                for d in &c.details {
                    println!("{d}");
                }
                if !c.passed {
                    return EXIT_CHECK;
                }
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config {
                field: "--config".into(),
                reason: format!("{}: {e}", path.display()),
            })?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if cfg.system.is_none() {
        cfg.system = Some(match &cli.preset {
            Some(p) => SystemSpec::preset(p),
            None => cli.command.default_system(),
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(Option<String>, Option<Check>)> {
    if let Command::Examples { .. } = cli.command {
        for p in presets::all() {
            println!("{:<22} sigma={:<5} {}", p.name, p.sigma, p.description);
        }
        return Ok((None, None));
    }
    let cfg = load_config(cli)?;
    if let Some(t) = cfg.threads {
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let seed = cfg.seed.unwrap_or(0);
    let (system, y0) = cfg.system.as_ref().expect("filled in by load_config").build()?;
    let dir = cfg.out_dir.as_ref().map(PathBuf::from).unwrap_or_else(|| cli.out_dir.clone());
    fs::create_dir_all(&dir)?;
    let mut out = Output {
        dir: dir.clone(),
        format: cli.format,
        files: Vec::new(),
    };

    let check = match cli.command {
        Command::Simulate => simulate(&cfg, &system, &y0, seed, &mut out)?,
        Command::DecomposeCheck => run_decompose(&cfg, &system, &y0, seed, &mut out)?,
        Command::Pullback => run_pullback(&cfg, &system, &y0, seed, &mut out)?,
        Command::Stationary => run_stationary(&cfg, &system, &y0, seed, &mut out)?,
        Command::SweepSigma => run_sweep(&cfg, &system, &y0, seed, &mut out)?,
        Command::Classify => run_classify(&cfg, &system, &mut out)?,
        Command::Turbulence => run_turbulence(&cfg, &system, &y0, seed, &mut out)?,
        Command::Examples { .. } => unreachable!(),
    };

    let canonical = serde_json::to_vec(&cfg)?;
    let manifest = Manifest {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: hex(&Sha256::digest(&canonical)),
        seed,
        threads: rayon::current_num_threads(),
        files: out.files.clone(),
        check: cli.check.then_some(&check),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    let mut w = BufWriter::new(fs::File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    w.flush()?;
    Ok((check.exhausted.clone(), cli.check.then_some(check)))
}

fn simulate(cfg: &ExperimentConfig, system: &LVSystem, y0: &[f64], seed: u64, out: &mut Output) -> Result<Check> {
    let c = &cfg.simulate;
    let mut check = Check::new();
    let traj = if c.scheme == SimScheme::Ode {
        integrate_ode(&system.with_noise(0.0, system.calculus), y0, c.horizon, c.step)?
    } else {
        let path = sample_path(seed, 0.0, c.horizon, c.step)?;
        if c.path_dump {
            let mut w = out.create("path.bin")?;
            path.dump(&mut w)?;
            w.flush()?;
        }
        match c.scheme {
            SimScheme::Decomposition => decomposed_trajectory(system, &path, y0, c.g0, c.horizon)?,
            scheme => {
                let s = if scheme == SimScheme::Euler { Scheme::EulerMaruyama } else { Scheme::Milstein };
                let opts = SdeOptions {
                    max_clamp_fraction: 1.0,
                };
                let run = integrate(s, system, &path, y0, c.horizon, opts)?;
                let report = run.clamp_report();
                check.require(
                    report.per_10k_steps < c.max_clamps_per_10k,
                    format!("clamps per 1e4 steps {:.3} < {}", report.per_10k_steps, c.max_clamps_per_10k),
                );
                out.json("clamps.json", &report)?;
                run.trajectory
            }
        }
    };
    let thin = traj.thinned(c.output_every.max(1));
    #[derive(Serialize)]
    struct Dump<'a> {
        times: &'a [f64],
        states: Vec<&'a [f64]>,
    }
    let dump = Dump {
        times: thin.times(),
        states: thin.states().collect(),
    };
    out.report("simulate", &dump, |w| write_trajectory(&thin, w))?;
    Ok(check)
}

fn run_decompose(cfg: &ExperimentConfig, system: &LVSystem, y0: &[f64], seed: u64, out: &mut Output) -> Result<Check> {
    let c = &cfg.decompose_check;
    let mut opts = c.options;
    opts.seed = seed;
    let report = decompose_check(system, y0, &opts)?;
    let mut check = Check::new();
    let first = &report.levels[0];
    check.require(
        first.milstein_deviation < c.max_deviation,
        format!("max relative deviation vs Milstein {:.3e} < {}", first.milstein_deviation, c.max_deviation),
    );
    let ratios = if c.check_ratios { report.milstein_ratios.len() } else { 0 };
    for r in &report.milstein_ratios[..ratios] {
        check.require(
            (c.milstein_band[0]..=c.milstein_band[1]).contains(r),
            format!("Milstein refinement ratio {r:.3} in {:?}", c.milstein_band),
        );
    }
    for r in &report.euler_ratios[..ratios.min(report.euler_ratios.len())] {
        check.require(
            (c.euler_band[0]..=c.euler_band[1]).contains(r),
            format!("Euler refinement ratio {r:.3} in {:?}", c.euler_band),
        );
    }
    if let Some(inv) = &report.invariant {
        check.require(
            inv.deterministic < c.invariant_deterministic,
            format!("conserved quantity drift (RK4) {:.3e} < {}", inv.deterministic, c.invariant_deterministic),
        );
        check.require(
            inv.stochastic < c.invariant_stochastic,
            format!("conserved quantity drift (decomposition) {:.3e} < {}", inv.stochastic, c.invariant_stochastic),
        );
    }
    out.report("decompose-check", &report, |w| {
        writeln!(w, "step,milstein_deviation,euler_deviation,milstein_clamps,euler_clamps,milstein_exact_error,euler_exact_error")?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.9e}"));
        for l in &report.levels {
            writeln!(
                w,
                "{},{:.9e},{:.9e},{},{},{},{}",
                l.step,
                l.milstein_deviation,
                l.euler_deviation,
                l.milstein_clamps,
                l.euler_clamps,
                opt(l.milstein_exact_error),
                opt(l.euler_exact_error)
            )?;
        }
        Ok(())
    })?;
    Ok(check)
}

fn run_pullback(cfg: &ExperimentConfig, system: &LVSystem, y0: &[f64], seed: u64, out: &mut Output) -> Result<Check> {
    let c = &cfg.pullback;
    let mut opts = c.options.clone();
    opts.seed = seed;
    let report = pullback_convergence(system, y0, &opts)?;
    let mut check = Check::new();
    let good = report
        .rows
        .iter()
        .filter(|r| r.distances.last().is_some_and(|d| *d < c.tolerance))
        .count();
    check.require(
        good == report.rows.len(),
        format!("{good}/{} seeds within {} of u·P at t = {:?}", report.rows.len(), c.tolerance, report.times.last()),
    );
    out.report("pullback", &report, |w| {
        writeln!(w, "seed,t,distance,u")?;
        for r in &report.rows {
            for (t, d) in report.times.iter().zip(&r.distances) {
                writeln!(w, "{},{},{:.9e},{:.12e}", r.seed, t, d, r.u)?;
            }
        }
        Ok(())
    })?;
    Ok(check)
}

#[derive(Serialize)]
struct StationaryReport {
    scalar: Option<ScalarReport>,
    ray: Option<crate::experiments::RayCheck>,
    support: Option<crate::measures::MassReport>,
    ladder: Vec<crate::experiments::LadderRow>,
}

#[derive(Serialize)]
struct ScalarReport {
    summary: crate::experiments::ScalarSummary,
    median_ks: f64,
    replications: usize,
}

fn run_stationary(cfg: &ExperimentConfig, system: &LVSystem, y0: &[f64], seed: u64, out: &mut Output) -> Result<Check> {
    let c = &cfg.stationary;
    let mut check = Check::new();
    if system.n() == 1 {
        let params = system.logistic();
        let mut all = Vec::new();
        let mut ks = Vec::new();
        let mut first = None;
        for rep in 0..c.replications.max(1) {
            let opts = EquilibriumSampleOptions {
                seed: crate::seed::derive_seed(seed, 1_000_000 + rep as u64),
                ..c.equilibrium
            };
            let u = random_equilibrium_samples(&params, &opts)?;
            let s = summarize_scalar(&params, &u)?;
            ks.push(s.ks);
            if first.is_none() {
                first = Some(s);
                all = u;
            }
        }
        let summary = first.expect("at least one replication");
        let median_ks = median(&mut ks);
        check.require(median_ks < c.max_ks, format!("median KS {median_ks:.4} < {}", c.max_ks));
        let report = StationaryReport {
            scalar: Some(ScalarReport {
                summary,
                median_ks,
                replications: c.replications.max(1),
            }),
            ray: None,
            support: None,
            ladder: Vec::new(),
        };
        out.report("stationary", &report, |w| {
            writeln!(w, "u")?;
            for v in &all {
                writeln!(w, "{v:.12e}")?;
            }
            Ok(())
        })?;
        return Ok(check);
    }

    let sampling = crate::measures::SamplingOptions { seed, ..c.sampling };
    let burn_in = c.burn_in.unwrap_or_else(|| default_burn_in(c.horizon));
    let (measure, ray, support, ladder) = match c.geometry {
        GeometryKind::Ray => {
            let m = empirical_time_average(system, y0, c.horizon, c.path_count, burn_in, &sampling)?;
            let anchor = deterministic_limit(system, y0, 200.0)?;
            let rc = ray_check(system, &m, &anchor, c.tolerance)?;
            check.require(rc.ray.mass > c.min_mass, format!("ray mass {:.4} > {}", rc.ray.mass, c.min_mass));
            check.require(rc.radial_ks < c.max_ks, format!("radial KS {:.4} < {}", rc.radial_ks, c.max_ks));
            (Some(m), Some(rc), None, Vec::new())
        }
        GeometryKind::Cone => {
            let m = empirical_time_average(system, y0, c.horizon, c.path_count, burn_in, &sampling)?;
            let cone = crate::classify3d::cone_params(system)?;
            let v0 = cone.value(y0);
            let census = crate::equilibria::equilibria(system)?;
            let center = census
                .interior()
                .map(|e| e.point.clone())
                .ok_or_else(|| Error::Degenerate("no interior equilibrium to trace the cone around".into()))?;
            // V is maximal or minimal at the interior equilibrium; trace the
            // level curve of a function that peaks there
            let vc = cone.value(&center);
            let sign = if vc > v0 { 1.0 } else { -1.0 };
            let level = c.cone_level.unwrap_or(sign * v0);
            let curve = level_curve(|y| sign * cone.value(y), &center, level, 720)?;
            let geometry = Geometry::Cone(ConeReference::curve(&curve, true)?);
            let s = support_diagnostics(&m, &geometry, c.tolerance);
            check.require(s.mass > c.min_mass, format!("cone mass {:.4} > {}", s.mass, c.min_mass));
            (Some(m), None, Some(s), Vec::new())
        }
        GeometryKind::Axes | GeometryKind::BoundaryPlanes => {
            let ladder = support_ladder(system, y0, &c.horizons, c.path_count, c.tolerance, &sampling)?;
            let axes: Vec<f64> = ladder.iter().map(|r| r.axes.mass).collect();
            let increasing = axes.windows(2).all(|w| w[1] > w[0]);
            check.require(increasing, format!("axes mass increasing in T: {axes:?}"));
            if let Some(last) = axes.last() {
                check.require(*last > 0.8, format!("axes mass at largest T {last:.4} > 0.8"));
            }
            let planes: Vec<f64> = ladder.iter().map(|r| r.planes.mass).collect();
            check.require(planes.windows(2).all(|w| w[1] < w[0]), format!("face-interior mass decreasing: {planes:?}"));
            (None, None, None, ladder)
        }
    };
    let report = StationaryReport {
        scalar: None,
        ray,
        support,
        ladder,
    };
    match &measure {
        Some(m) => out.report("stationary", &report, |w| m.write_csv(w))?,
        None => out.report("stationary", &report, |w| {
            writeln!(w, "T,samples,axes_mass,plane_mass")?;
            for r in &report.ladder {
                writeln!(w, "{},{},{:.6},{:.6}", r.horizon, r.samples, r.axes.mass, r.planes.mass)?;
            }
            Ok(())
        })?,
    }
    Ok(check)
}

#[derive(Serialize)]
struct SweepReport {
    sigmas: Vec<f64>,
    replications: Vec<Vec<SweepRow>>,
    /// Per σ: median of the phase KS (orbit) or of the ball mass (equilibrium).
    medians: Vec<f64>,
}

fn run_sweep(cfg: &ExperimentConfig, system: &LVSystem, y0: &[f64], seed: u64, out: &mut Output) -> Result<Check> {
    let c = &cfg.sweep_sigma;
    let (target, start) = match c.target {
        SweepTargetKind::Equilibrium => {
            let p = deterministic_limit(system, y0, 200.0)?;
            (
                SweepTarget::Equilibrium {
                    point: p,
                    ball_radius: c.ball_radius,
                },
                y0.to_vec(),
            )
        }
        SweepTargetKind::Orbit => {
            let orbit = OrbitParam::trace(system, y0, 1e-3, c.orbit_settle, 10.0 * c.horizon)?;
            let origin = orbit.origin().to_vec();
            (SweepTarget::ClosedOrbit(orbit), origin)
        }
    };
    let mut reps = Vec::new();
    for rep in 0..c.replications.max(1) {
        let opts = SweepOptions {
            horizon: c.horizon,
            burn_in: c.burn_in,
            path_count: c.path_count,
            sampling: crate::measures::SamplingOptions {
                seed: crate::seed::derive_seed(seed, rep as u64),
                ..c.sampling
            },
        };
        reps.push(sigma_sweep(system, &start, &c.sigmas, &target, &opts)?);
    }
    let medians: Vec<f64> = (0..c.sigmas.len())
        .map(|k| {
            let mut v: Vec<f64> = reps
                .iter()
                .map(|r| match c.target {
                    SweepTargetKind::Orbit => r[k].phase_ks.unwrap_or(f64::NAN),
                    SweepTargetKind::Equilibrium => r[k].ball_mass.unwrap_or(f64::NAN),
                })
                .collect();
            median(&mut v)
        })
        .collect();
    let mut check = Check::new();
    match c.target {
        SweepTargetKind::Orbit => check.require(
            medians.windows(2).all(|w| w[1] < w[0]),
            format!("median phase KS strictly decreasing as σ decreases: {medians:?}"),
        ),
        SweepTargetKind::Equilibrium => check.require(
            medians.windows(2).all(|w| w[1] >= w[0]),
            format!("median ball mass increasing as σ decreases: {medians:?}"),
        ),
    }
    let report = SweepReport {
        sigmas: c.sigmas.clone(),
        replications: reps,
        medians,
    };
    out.report("sweep-sigma", &report, |w| {
        let rows: Vec<SweepRow> = report.replications.iter().flatten().cloned().collect();
        write_sweep_csv(&rows, w)
    })?;
    Ok(check)
}

fn run_classify(cfg: &ExperimentConfig, system: &LVSystem, out: &mut Output) -> Result<Check> {
    let report = classify(system, &cfg.classify.budget)?;
    let mut check = Check::new();
    let category = serde_json::to_value(report.category)?;
    let category = category.as_str().unwrap_or_default().to_string();
    if report.budget_exhausted {
        check.exhausted = Some(format!(
            "classification budget of {} steps exhausted; raise classify.max_steps",
            cfg.classify.budget.max_steps
        ));
    }
    if let Some(expect) = &cfg.classify.expect {
        check.require(&category == expect, format!("category {category} == {expect}"));
    }
    // classification reports are structured, so JSON is written in both modes
    out.json("classify.json", &report)?;
    Ok(check)
}

#[derive(Serialize)]
struct TurbulenceOut {
    report: crate::turbulence::TurbulenceReport,
    dwell_fractions: Vec<Vec<f64>>,
}

fn run_turbulence(cfg: &ExperimentConfig, system: &LVSystem, y0: &[f64], seed: u64, out: &mut Output) -> Result<Check> {
    let c = &cfg.turbulence;
    let opts = crate::turbulence::TurbulenceOptions { seed, ..c.options };
    let report = nonunique_time_averages(system, y0, &opts)?;
    let det = integrate_ode(&system.with_noise(0.0, system.calculus), y0, opts.horizon, opts.ode_step)?;
    let mut check = Check::new();
    let mut fractions = Vec::new();
    for i in 1..=system.n() {
        let rec = dwell_times(&det, &vertex(system.n(), i), opts.radius)?;
        let f = dwell_fraction(&rec)?;
        let late = &f[f.len().saturating_sub(c.late_cycles.max(1))..];
        check.require(
            late.iter().all(|v| (c.fraction_band[0]..=c.fraction_band[1]).contains(v)),
            format!("late dwell fractions near R{i} {late:.3?} in {:?}", c.fraction_band),
        );
        fractions.push(f);
    }
    let s = &report.summary;
    check.require(
        s.det_gap >= c.min_gap,
        format!("deterministic gap {:.4} >= {}", s.det_gap, c.min_gap),
    );
    if system.sigma != 0.0 {
        check.require(s.gap >= c.min_gap, format!("stochastic gap {:.4} >= {}", s.gap, c.min_gap));
    }
    let full = TurbulenceOut {
        report,
        dwell_fractions: fractions,
    };
    out.report("turbulence", &full, |w| write_csv(&full.report.rows, w))?;
    Ok(check)
}

/// Path of the manifest written by a run into `dir`.
pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}
