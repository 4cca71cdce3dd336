//! Command-line front end.
//!
//! Every subcommand writes its table to `--out` (stdout when absent). With `--out`, a manifest
//! is written to `<out>.manifest`; `nvlab --replay <manifest>` reruns it. A `--config` file of
//! `key=value` lines supplies flags that are not given on the command line.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{NvError, Result};
use crate::fit::log_grid;
use crate::io::{self, fmt_f64, CsvTable, ExperimentManifest};
use crate::oscillatory::{decay_scan, BumpProfile, IntegralSpec, Region, UGrid};
use crate::solutions::{blowup_scan, eval_solution, l2_growth, mass, nv_residual, SolutionSpec};
use crate::solver::{dt_max, DealiasRule, FieldState, Scheme, Simulation, StepperConfig};
use crate::spectral::Grid;
use crate::stationary::{stationary_set, verify_lemmas};
use crate::Complex64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Global flags that are not recorded as manifest parameters.
const GLOBAL_IDS: [&str; 4] = ["out", "seed", "config", "replay"];

#[derive(Debug, Parser)]
#[command(name = "nvlab", version, about = "Numerical laboratory for the Novikov-Veselov equation")]
pub struct Cli {
    /// Output file for the main table (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `key=value` file of flags; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Rerun the command recorded in a manifest.
    #[arg(long, conflicts_with = "config")]
    pub replay: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the full equation on a periodic box.
    Simulate(SimulateArgs),
    /// Critical points of the reduced phase and their geometry.
    StationaryPoints(StationaryArgs),
    /// Oscillatory integrals over a time grid and their log-log decay slope.
    DispersionScan(ScanArgs),
    /// Closed-form rational solutions.
    Solutions(SolutionsArgs),
    /// Distance lemmas on random parameters.
    VerifyLemmas(LemmaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    IfRk4,
    Etdrk4,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Defaults to 0, or to the snapshot's value for `--ic file:`.
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    /// Points per side, a power of two.
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    /// Half side length `L` of the box `[-L, L)^2`.
    #[arg(long = "box", default_value_t = 20.0)]
    pub box_half: f64,
    /// Time step; defaults to `cfl_safety * dt_max`.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: f64,
    /// `q1ab:a:b`, `q2c:c`, `qn0:n`, `gaussian:amp:width` or `file:<path>`.
    #[arg(long, allow_hyphen_values = true)]
    pub ic: String,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub dealias: OnOff,
    #[arg(long, value_enum, default_value_t = SchemeArg::IfRk4)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0.5)]
    pub cfl_safety: f64,
    /// Write an NVF1 snapshot every this many steps (0: none).
    #[arg(long, default_value_t = 0)]
    pub snapshot_every: usize,
    /// Snapshot files are `<prefix>_<step>.nvf`.
    #[arg(long, default_value = "snapshot")]
    pub snapshot_prefix: String,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub u_re: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub u_im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    Full,
    In,
    Out,
    Largefreq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Exp,
    RaisedCosine,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
    #[arg(long, value_enum, default_value_t = RegionArg::Full)]
    pub region: RegionArg,
    /// Inner radius of the large-frequency region.
    #[arg(long = "cutoff-R", default_value_t = 3.0)]
    pub cutoff_r: f64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Exp)]
    pub profile: ProfileArg,
    #[arg(long, default_value_t = 10.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 12)]
    pub t_points: usize,
    /// `vertices`, `worst-case`, `ring:<radius>:<n>` or `single:<re>:<im>`, in units of `E`.
    #[arg(long, default_value = "vertices", allow_hyphen_values = true)]
    pub u_grid: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Q1ab,
    Q2c,
    Qn0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Action {
    Eval,
    Mass,
    Blowup,
    L2growth,
    Residual,
}

#[derive(Debug, Args)]
pub struct SolutionsArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Comma separated: `a,b` for q1ab, `c` for q2c, `n` for qn0.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub params: String,
    #[arg(long, value_enum)]
    pub action: Action,
    /// `L:N` box half-length and points per side (eval, residual).
    #[arg(long)]
    pub grid: Option<String>,
    /// Times: `t1,t2,...` or `lin:a:b:n` or `log:a:b:n`.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Parameters are drawn uniformly from the disk of this radius.
    #[arg(long, default_value_t = 36.0)]
    pub radius: f64,
}

/// Where a command writes.
struct Sink<'a> {
    out: Option<PathBuf>,
    stdout: &'a mut dyn Write,
}

impl Sink<'_> {
    fn table(&mut self, t: &CsvTable) -> Result<()> {
        match &self.out {
            Some(p) => io::write_csv(p, t),
            None => self.stdout.write_all(t.to_string().as_bytes()).map_err(|e| NvError::io("<stdout>", e)),
        }
    }

    fn text(&mut self, s: &str) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, s).map_err(|e| NvError::io(p, e)),
            None => self.stdout.write_all(s.as_bytes()).map_err(|e| NvError::io("<stdout>", e)),
        }
    }

    fn summary(&mut self, s: &str) -> Result<()> {
        writeln!(self.stdout, "{s}").map_err(|e| NvError::io("<stdout>", e))
    }
}

fn usage(msg: impl Into<String>) -> NvError {
    NvError::InvalidArgument(msg.into())
}

fn exit_code(e: &NvError) -> i32 {
    match e {
        NvError::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run(argv: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run_inner(argv, stdout, stderr, true) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn run_inner(argv: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write, allow_replay: bool) -> Result<i32> {
    let argv = merge_config(argv)?;
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return Ok(code);
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| usage(e.to_string()))?;
    if let Some(manifest) = &cli.replay {
        if !allow_replay {
            return Err(usage("a replayed manifest cannot itself request a replay"));
        }
        if cli.command.is_some() {
            return Err(usage("--replay takes no subcommand"));
        }
        let m = io::read_manifest(manifest)?;
        let mut args: Vec<OsString> = vec!["nvlab".into(), m.command.clone().into()];
        for (k, v) in &m.parameters {
            args.push(format!("--{k}").into());
            args.push(v.into());
        }
        args.push("--seed".into());
        args.push(m.seed.to_string().into());
        if let Some(out) = &cli.out {
            args.push("--out".into());
            args.push(out.into());
        }
        return run_inner(args, stdout, stderr, false);
    }
    let Some(command) = cli.command else {
        let _ = write!(stderr, "{}", Cli::command().render_help());
        return Ok(EXIT_USAGE);
    };
    let (name, sub) = matches.subcommand().expect("subcommand present");
    let manifest = ExperimentManifest::new(name, recorded_parameters(name, sub), cli.seed);
    let mut sink = Sink { out: cli.out.clone(), stdout };
    match command {
        Command::Simulate(a) => simulate(&a, &mut sink)?,
        Command::StationaryPoints(a) => stationary_points(&a, &mut sink)?,
        Command::DispersionScan(a) => dispersion_scan(&a, &mut sink)?,
        Command::Solutions(a) => solutions_cmd(&a, &mut sink)?,
        Command::VerifyLemmas(a) => verify_lemmas_cmd(&a, cli.seed, &mut sink)?,
    }
    if let Some(out) = &cli.out {
        io::write_manifest(&io::manifest_path(out), &manifest)?;
    }
    Ok(EXIT_OK)
}

/// Effective values of every subcommand flag, in declaration order.
fn recorded_parameters(name: &str, sub: &clap::ArgMatches) -> Vec<(String, String)> {
    let cmd = Cli::command();
    let sc = cmd.find_subcommand(name).expect("known subcommand");
    let mut out = Vec::new();
    for arg in sc.get_arguments() {
        let id = arg.get_id().as_str();
        if GLOBAL_IDS.contains(&id) || id == "help" || id == "version" {
            continue;
        }
        let Some(long) = arg.get_long() else { continue };
        if let Some(mut vals) = sub.get_raw(id) {
            if let Some(v) = vals.next() {
                out.push((long.to_string(), v.to_string_lossy().into_owned()));
            }
        }
    }
    out
}

/// Inserts `--key value` pairs from the `--config` file for keys absent from `argv`.
fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|s| s.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, s) in strs.iter().enumerate() {
        if s == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let entries = io::read_config(Path::new(&path))?;
    let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let Some(pos) = strs.iter().position(|s| names.contains(s)) else { return Ok(argv) };
    let mut inject: Vec<OsString> = Vec::new();
    for (k, v) in entries {
        let flag = format!("--{k}");
        let given = strs.iter().any(|s| *s == flag || s.starts_with(&format!("{flag}=")));
        if !given {
            inject.push(flag.into());
            inject.push(v.into());
        }
    }
    let mut out = argv;
    out.splice(pos + 1..pos + 1, inject);
    Ok(out)
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| usage(format!("{what}: cannot parse '{s}' as a number")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| usage(format!("{what}: cannot parse '{s}' as a count")))
}

fn initial_state(a: &SimulateArgs) -> Result<FieldState> {
    let parts: Vec<&str> = a.ic.splitn(2, ':').collect();
    let rest = parts.get(1).copied().unwrap_or("");
    let fields: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let want = |k: usize| -> Result<()> {
        if fields.len() == k {
            Ok(())
        } else {
            Err(usage(format!("--ic {}: expected {k} parameter(s)", a.ic)))
        }
    };
    let closed = |spec: SolutionSpec| -> Result<FieldState> {
        spec.validate().map_err(|e| usage(e.to_string()))?;
        let g = Grid::new(a.grid, a.box_half);
        let mut vals = Vec::with_capacity(a.grid * a.grid);
        for j in 0..a.grid {
            for i in 0..a.grid {
                vals.push(eval_solution(&spec, 0.0, g.coord(i), g.coord(j))?.0);
            }
        }
        FieldState::new(vals, a.grid, a.box_half, a.energy.unwrap_or(0.0), 0.0).map_err(|e| usage(e.to_string()))
    };
    match parts[0] {
        "q1ab" => {
            want(2)?;
            closed(SolutionSpec::Q1ab { a: parse_f64(fields[0], "--ic")?, b: parse_f64(fields[1], "--ic")? })
        }
        "q2c" => {
            want(1)?;
            closed(SolutionSpec::Q2c { c: parse_f64(fields[0], "--ic")? })
        }
        "qn0" => {
            want(1)?;
            closed(SolutionSpec::Qn0 { n: parse_usize(fields[0], "--ic")? })
        }
        "gaussian" => {
            want(2)?;
            let (amp, w) = (parse_f64(fields[0], "--ic")?, parse_f64(fields[1], "--ic")?);
            if !(w > 0.0) {
                return Err(usage("--ic gaussian: width must be positive"));
            }
            FieldState::from_fn(a.grid, a.box_half, a.energy.unwrap_or(0.0), |x, y| {
                amp * (-(x * x + y * y) / (w * w)).exp()
            })
            .map_err(|e| usage(e.to_string()))
        }
        "file" => {
            if rest.is_empty() {
                return Err(usage("--ic file: missing path"));
            }
            let mut s = io::read_snapshot(Path::new(rest))?;
            if let Some(e) = a.energy {
                s.energy = e;
            }
            Ok(s)
        }
        other => Err(usage(format!("unknown initial condition '{other}'"))),
    }
}

fn simulate(a: &SimulateArgs, sink: &mut Sink) -> Result<()> {
    let state = initial_state(a)?;
    let rule = match a.dealias {
        OnOff::On => DealiasRule::TwoThirds,
        OnOff::Off => DealiasRule::None,
    };
    let mut config = StepperConfig::new(1.0);
    config.dealias_rule = rule;
    config.cfl_safety = a.cfl_safety;
    config.scheme = match a.scheme {
        SchemeArg::IfRk4 => Scheme::IntegratingFactorRK4,
        SchemeArg::Etdrk4 => Scheme::Etdrk4,
    };
    let limit = a.cfl_safety * dt_max(state.n, state.half_length, state.energy, rule);
    let dt = a.dt.unwrap_or(limit.min(1e-2));
    let span = a.t_final - state.time;
    if !(span >= 0.0) {
        return Err(usage("--t-final precedes the initial time"));
    }
    let steps = (span / dt - 1e-9).ceil().max(0.0) as usize;
    config.dt = if steps > 0 { span / steps as f64 } else { dt };
    let mut sim = Simulation::new(&state, config).map_err(|e| match e {
        NvError::InvalidArgument(m) => usage(m),
        other => other,
    })?;
    let mut table = CsvTable::new(&["time", "mass", "l2", "linf"]);
    let snap = |sim: &mut Simulation, k: usize| -> Result<()> {
        let p = PathBuf::from(format!("{}_{k:06}.nvf", a.snapshot_prefix));
        io::write_snapshot(&p, &sim.state())
    };
    let record = |sim: &mut Simulation, table: &mut CsvTable| {
        let o = sim.observe();
        table.push_f64(&[o.time, o.mass, o.l2, o.linf]);
    };
    record(&mut sim, &mut table);
    if a.snapshot_every > 0 {
        snap(&mut sim, 0)?;
    }
    let mut failure = None;
    for k in 1..=steps {
        if let Err(e) = sim.step() {
            failure = Some(e);
            break;
        }
        record(&mut sim, &mut table);
        if a.snapshot_every > 0 && (k % a.snapshot_every == 0 || k == steps) {
            snap(&mut sim, k)?;
        }
    }
    sink.table(&table)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// The stationary-point record as JSON.
pub fn stationary_record(u: Complex64) -> Value {
    let s = stationary_set(u);
    let report = verify_lemmas(&s);
    json!({
        "case": s.case_tag.number(),
        "lambdas": s.lambdas.iter().map(|l| [l.re, l.im]).collect::<Vec<_>>(),
        "omega": s.omega,
        "phi": s.phi,
        "omega1": s.omega1,
        "omega2": s.omega2,
        "pairs": [[s.pair1.0, s.pair1.1], [s.pair2.0, s.pair2.1]],
        "lemma_report": report,
    })
}

fn stationary_points(a: &StationaryArgs, sink: &mut Sink) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(&stationary_record(Complex64::new(a.u_re, a.u_im))).expect("record serialises");
    text.push('\n');
    sink.text(&text)
}

fn parse_u_grid(s: &str) -> Result<UGrid> {
    let f: Vec<&str> = s.split(':').collect();
    match f[0] {
        "vertices" if f.len() == 1 => Ok(UGrid::Vertices),
        "worst-case" if f.len() == 1 => Ok(UGrid::WorstCase),
        "ring" if f.len() == 3 => {
            let n = parse_usize(f[2], "--u-grid")?;
            if n == 0 {
                return Err(usage("--u-grid ring needs n >= 1"));
            }
            Ok(UGrid::Ring { radius: parse_f64(f[1], "--u-grid")?, n })
        }
        "single" if f.len() == 3 => {
            Ok(UGrid::Single(Complex64::new(parse_f64(f[1], "--u-grid")?, parse_f64(f[2], "--u-grid")?)))
        }
        _ => Err(usage(format!("unrecognised --u-grid '{s}'"))),
    }
}

fn dispersion_scan(a: &ScanArgs, sink: &mut Sink) -> Result<()> {
    if a.t_points < 2 || !(a.t_min > 0.0 && a.t_max > a.t_min) {
        return Err(usage("need 0 < t-min < t-max and t-points >= 2"));
    }
    let region = match a.region {
        RegionArg::Full => Region::Full,
        RegionArg::In => Region::InsideB2,
        RegionArg::Out => Region::OutsideB2,
        RegionArg::Largefreq => Region::LargeFreq {
            cutoff_r: a.cutoff_r,
            profile: match a.profile {
                ProfileArg::Exp => BumpProfile::Exp,
                ProfileArg::RaisedCosine => BumpProfile::RaisedCosine,
            },
        },
    };
    let spec = IntegralSpec {
        beta: a.beta,
        ..IntegralSpec::new(a.alpha, a.energy, Complex64::new(0.0, 0.0), a.t_min, region)
    };
    spec.validate()?;
    let grid = parse_u_grid(&a.u_grid)?;
    let ts = log_grid(a.t_min, a.t_max, a.t_points);
    let scan = decay_scan(&spec, &ts, &grid)?;
    let mut table = CsvTable::new(&["t", "u_re", "u_im", "abs_I", "re_I", "im_I", "apost_err"]);
    for p in &scan.probes {
        for s in &p.samples {
            table.push_f64(&[s.t, p.spec.u.re, p.spec.u.im, s.value.norm(), s.value.re, s.value.im, s.apost_err]);
        }
    }
    sink.table(&table)?;
    let w = &scan.probes[scan.worst];
    sink.summary(&format!("slope={},ci={}", fmt_f64(w.slope), fmt_f64(w.slope_ci)))
}

fn parse_times(s: Option<&str>, default: &[f64]) -> Result<Vec<f64>> {
    let Some(s) = s else { return Ok(default.to_vec()) };
    let f: Vec<&str> = s.split(':').collect();
    let v = match f[0] {
        "lin" | "log" if f.len() == 4 => {
            let (a, b, n) = (parse_f64(f[1], "--t")?, parse_f64(f[2], "--t")?, parse_usize(f[3], "--t")?);
            if n < 2 || !(b > a) {
                return Err(usage("--t range needs b > a and n >= 2"));
            }
            if f[0] == "log" {
                if !(a > 0.0) {
                    return Err(usage("--t log range needs a > 0"));
                }
                log_grid(a, b, n)
            } else {
                (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
            }
        }
        _ => s.split(',').map(|x| parse_f64(x, "--t")).collect::<Result<Vec<_>>>()?,
    };
    if v.is_empty() {
        return Err(usage("--t is empty"));
    }
    Ok(v)
}

fn solution_spec(a: &SolutionsArgs) -> Result<SolutionSpec> {
    let p: Vec<&str> = if a.params.trim().is_empty() { Vec::new() } else { a.params.split(',').collect() };
    let spec = match (a.family, p.len()) {
        (Family::Q1ab, 2) => SolutionSpec::Q1ab { a: parse_f64(p[0], "--params")?, b: parse_f64(p[1], "--params")? },
        (Family::Q1ab, 0) => SolutionSpec::Q1ab { a: 0.0, b: 0.0 },
        (Family::Q2c, 1) => SolutionSpec::Q2c { c: parse_f64(p[0], "--params")? },
        (Family::Q2c, 0) => SolutionSpec::Q2c { c: 0.0 },
        (Family::Qn0, 1) => SolutionSpec::Qn0 { n: parse_usize(p[0], "--params")? },
        _ => return Err(usage(format!("--params '{}' does not fit the family", a.params))),
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_box(s: Option<&str>, default: (f64, usize)) -> Result<(f64, usize)> {
    let Some(s) = s else { return Ok(default) };
    let (l, n) = s.split_once(':').ok_or_else(|| usage("--grid expects L:N"))?;
    let (l, n) = (parse_f64(l, "--grid")?, parse_usize(n, "--grid")?);
    if !(l > 0.0) || n < 4 || !n.is_power_of_two() {
        return Err(usage("--grid needs L > 0 and N a power of two >= 4"));
    }
    Ok((l, n))
}

fn solutions_cmd(a: &SolutionsArgs, sink: &mut Sink) -> Result<()> {
    let spec = solution_spec(a)?;
    match a.action {
        Action::Eval => {
            let (l, n) = parse_box(a.grid.as_deref(), (10.0, 64))?;
            let g = Grid::new(n, l);
            let mut table = CsvTable::new(&["t", "x", "y", "v", "log_arg"]);
            for t in parse_times(a.t.as_deref(), &[0.0])? {
                for j in 0..n {
                    for i in 0..n {
                        let (x, y) = (g.coord(i), g.coord(j));
                        let (v, d) = eval_solution(&spec, t, x, y)?;
                        table.push_f64(&[t, x, y, v, d]);
                    }
                }
            }
            sink.table(&table)
        }
        Action::Mass => {
            let mut table = CsvTable::new(&["t", "mass"]);
            for t in parse_times(a.t.as_deref(), &[0.0])? {
                table.push_f64(&[t, mass(&spec, t)?]);
            }
            sink.table(&table)
        }
        Action::Blowup => {
            let SolutionSpec::Q2c { c } = spec else {
                return Err(usage("blowup applies to the q2c family"));
            };
            let ts = parse_times(a.t.as_deref(), &lin(0.0, 100.0, 1001))?;
            let scan = blowup_scan(c, &ts)?;
            let mut table = CsvTable::new(&["t", "min_log_arg"]);
            for &(t, m) in &scan.rows {
                table.push_f64(&[t, m]);
            }
            sink.table(&table)?;
            match scan.t_star {
                Some(t) => sink.summary(&format!("t_star={}", fmt_f64(t))),
                None => sink.summary("t_star=none"),
            }
        }
        Action::L2growth => {
            let SolutionSpec::Qn0 { n } = spec else {
                return Err(usage("l2growth applies to the qn0 family"));
            };
            let ts = parse_times(a.t.as_deref(), &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0])?;
            let g = l2_growth(n, &ts)?;
            let mut table = CsvTable::new(&["t", "l2_sq", "root_abs", "root_ratio"]);
            for r in &g.rows {
                table.push_f64(&[r.t, r.l2_sq, r.root_abs, r.root_ratio]);
            }
            sink.table(&table)?;
            sink.summary(&format!("slope={},ci={},monotone={}", fmt_f64(g.fit.slope), fmt_f64(g.fit.ci), g.monotone))
        }
        Action::Residual => {
            let (l, n) = parse_box(a.grid.as_deref(), (30.0, 256))?;
            let g = Grid::new(n, l);
            let mut table = CsvTable::new(&["t", "residual"]);
            for t in parse_times(a.t.as_deref(), &[0.0])? {
                table.push_f64(&[t, nv_residual(&spec, t, &g)?]);
            }
            sink.table(&table)
        }
    }
}

fn lin(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn verify_lemmas_cmd(a: &LemmaArgs, seed: u64, sink: &mut Sink) -> Result<()> {
    if !(a.radius > 0.0) {
        return Err(usage("--radius must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = CsvTable::new(&[
        "index",
        "u_re",
        "u_im",
        "case",
        "omega1",
        "omega2",
        "omega_order_ok",
        "base_point",
        "cluster_j1_ok",
        "cluster_j2_ok",
        "cluster_constant",
        "all_in_k_ball",
        "circle_ratio",
        "degenerate_ratio",
    ]);
    let (mut worst_circle, mut order_failures) = (0.0f64, 0usize);
    for k in 0..a.samples {
        let r = a.radius * rng.gen::<f64>().sqrt();
        let th = 2.0 * PI * rng.gen::<f64>();
        let u = Complex64::from_polar(r, th);
        let s = stationary_set(u);
        let rep = verify_lemmas(&s);
        if !rep.omega_order_ok {
            order_failures += 1;
        }
        if rep.all_in_k_ball {
            worst_circle = worst_circle.max(rep.circle_ratio.unwrap_or(0.0));
        }
        table.push(vec![
            k.to_string(),
            fmt_f64(u.re),
            fmt_f64(u.im),
            s.case_tag.number().to_string(),
            fmt_f64(s.omega1),
            fmt_f64(s.omega2),
            rep.omega_order_ok.to_string(),
            rep.base_point.map(|(a, b, c)| format!("{a}-{b}-{c}")).unwrap_or_default(),
            rep.cluster_j1_ok.to_string(),
            rep.cluster_j2_ok.to_string(),
            opt(rep.cluster_constant),
            rep.all_in_k_ball.to_string(),
            opt(rep.circle_ratio),
            opt(rep.degenerate_ratio),
        ]);
    }
    sink.table(&table)?;
    if sink.out.is_some() {
        sink.summary(&format!(
            "samples={},omega_order_failures={order_failures},max_circle_ratio_in_k_ball={}",
            a.samples,
            fmt_f64(worst_circle)
        ))?;
    }
    Ok(())
}
