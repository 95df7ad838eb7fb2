//! Command-line front end for the `voxfact` library.

pub mod inputs;
pub mod suite;
pub mod tables;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use voxfact::correlator::{
    check_associativity, check_equivariance, check_holomorphy, check_insertion_at_zero, check_meromorphicity,
    check_permutation_invariance, check_skew_symmetry, mu_evaluate, MuOptions, PointConfiguration,
};
use voxfact::expression::EvalOptions;
use voxfact::factorization::{relation_kernel, roundtrip_check, run_counterexample, weiss_cover_check, Cover, RoundtripSample};
use voxfact::{CheckReport, DegreeWindow, Error, GradedVector, OpenSet, Preset, Result, Scalar};

use inputs::{read_exprs, read_states, Geometry};
use suite::{run_suite, Status, SuiteConfig};
use tables::{counterexample_table, emit_tables, suite_tables, Format, Table};

#[derive(Parser, Debug)]
#[command(name = "voxfact", version, about = "Exact and numeric checks for geometric vertex algebras and their factorization models")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// heisenberg, virasoro or affine_sl2.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Virasoro central charge.
    #[arg(long, global = true)]
    pub c: Option<String>,
    /// Affine level.
    #[arg(long, global = true)]
    pub level: Option<String>,
    /// Degree window `lo:hi`.
    #[arg(long, global = true)]
    pub window: Option<String>,
    /// Relative tolerance for numeric checks
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Quadrature nodes per circle
    #[arg(long = "quad-n", global = true)]
    pub quad_n: Option<usize>,
    /// Seed for sampled inputs
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutFormat>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Describe a preset: generators and basis sizes per degree.
    Define,
    /// Compute the mode product `a_(n) b`.
    Mode {
        #[arg(long)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        b: String,
    },
    /// Evaluate the n-point multiplication at a configuration.
    Npoint {
        /// JSON file or array, or `;`-separated token lists.
        #[arg(long)]
        states: String,
        /// Comma-separated points, e.g. `2+0i,1/2,0`.
        #[arg(long, allow_hyphen_values = true)]
        points: String,
    },
    /// Run one axiom check.
    Check(CheckArgs),
    /// Operations on expressions over open subsets of the plane.
    Factor(FactorArgs),
    /// The annulus counterexample for mode `m`.
    Counterexample {
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        m: i64,
    },
    /// Run the full check suite.
    Suite {
        /// Directory for mode, pole, curve and counterexample tables.
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Restrict to these check ids (comma-separated).
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axiom {
    Insertion,
    Equivariance,
    Permutation,
    Skew,
    Associativity,
    Meromorphicity,
    Holomorphy,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub axiom: Axiom,
    #[arg(long)]
    pub states: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Grading parameter for the equivariance check.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Center the inner points are offset from (associativity).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long = "inner-states")]
    pub inner_states: Option<String>,
    #[arg(long = "inner-points", allow_hyphen_values = true)]
    pub inner_points: Option<String>,
    /// Index of the point moved around a circle (holomorphy).
    #[arg(long, default_value_t = 0)]
    pub moving: usize,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FactorOp {
    Multiply,
    Eval,
    Kernel,
    Counterexample,
    Weiss,
    Roundtrip,
}

#[derive(Args, Debug)]
pub struct FactorArgs {
    pub op: FactorOp,
    /// JSON object of named open sets.
    #[arg(long)]
    pub geometry: Option<String>,
    /// JSON expression or array of expressions.
    #[arg(long)]
    pub exprs: Option<String>,
    /// Where to write the report; same as `--out`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Mode index of the counterexample
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub m: i64,
    /// Extra round-trip sample states and points.
    #[arg(long)]
    pub states: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
}

/// Effective settings after merging the config file with flags.
pub struct Settings {
    pub config: SuiteConfig,
    pub preset: Preset,
    pub window: DegreeWindow,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(g: &GlobalArgs) -> Result<Settings> {
        let mut config = match &g.config {
            Some(p) => SuiteConfig::from_json_str(&std::fs::read_to_string(p)?)?,
            None => SuiteConfig::default(),
        };
        if let Some(p) = &g.preset {
            config.preset = p.clone();
        }
        if g.c.is_some() {
            config.c = g.c.clone();
        }
        if g.level.is_some() {
            config.level = g.level.clone();
        }
        if let Some(w) = &g.window {
            config.window = w.clone();
        }
        if let Some(t) = g.tol {
            config.tol = t;
        }
        if g.quad_n.is_some() {
            config.quad_n = g.quad_n;
        }
        if let Some(s) = g.seed {
            config.seed = s;
        }
        if let Some(o) = &g.out {
            config.out = Some(o.display().to_string());
        }
        let preset = Preset::from_spec(&config.preset_spec())?;
        let window: DegreeWindow = config.window.parse()?;
        let format = match g.format {
            Some(OutFormat::Csv) => Format::Csv,
            _ => Format::Json,
        };
        let out = config.out.as_ref().map(PathBuf::from);
        Ok(Settings { config, preset, window, format, out })
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => Ok(std::fs::write(p, text)?),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json(&self, v: &impl Serialize) -> Result<()> {
        self.emit(&(serde_json::to_string_pretty(v)? + "\n"))
    }

    /// Writes a report as JSON, or a one-row CSV summary.
    fn emit_report(&self, r: &CheckReport) -> Result<bool> {
        match self.format {
            Format::Json => self.emit_json(r)?,
            Format::Csv => {
                let mut t = Table::new("report", &["axiom", "pass", "max_err"]);
                t.push(vec![r.axiom.clone(), r.pass.to_string(), format!("{:e}", r.max_err)]);
                self.emit(&t.to_csv()?)?;
            }
        }
        Ok(r.pass)
    }
}

/// Whether an error comes from bad input rather than from a computation.
pub fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_)
            | Error::Config(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::InvalidWindow(..)
            | Error::DivisionByZero
            | Error::UnknownGenerator(..)
            | Error::BasisMismatch(..)
    )
}

/// Runs the command line and returns the process exit code: 0 when every
/// check passes, 1 on a check failure or computational error, 2 on usage or
/// configuration errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

/// Executes a parsed command; `Ok(false)` means a check failed.
pub fn execute(cli: &Cli) -> Result<bool> {
    let s = Settings::resolve(&cli.global)?;
    let p = &s.preset;
    let w = s.window;
    let tol = s.config.tol;
    match &cli.command {
        Command::Define => {
            let gens: Vec<Value> = p
                .generators()
                .iter()
                .map(|&g| json!({"symbol": g.symbol(), "weight": g.weight(), "state": p.generator_state(g).to_string()}))
                .collect();
            let dims: Vec<Value> = w.degrees().map(|k| json!({"degree": k, "dim": p.basis(k).len()})).collect();
            s.emit_json(&json!({"preset": p.spec(), "generators": gens, "basis": dims}))?;
            Ok(true)
        }
        Command::Mode { a, n, b } => {
            let (av, bv) = (one_state(p, a)?, one_state(p, b)?);
            let r = p.state_mode(&av, *n, &bv)?;
            match s.format {
                Format::Json => s.emit_json(&json!({"a": av.to_string(), "n": n, "b": bv.to_string(), "result": r.to_string(), "vector": r}))?,
                Format::Csv => {
                    let mut t = Table::new("modes", &["a", "n", "b", "result"]);
                    t.push(vec![av.to_string(), n.to_string(), bv.to_string(), r.to_string()]);
                    s.emit(&t.to_csv()?)?;
                }
            }
            Ok(true)
        }
        Command::Npoint { states, points } => {
            let states = read_states(p, states)?;
            let config = PointConfiguration::parse(points)?;
            if states.len() != config.len() {
                return Err(Error::Config(format!("{} states for {} points", states.len(), config.len())));
            }
            let v = mu_evaluate(p, &states, &config, w, MuOptions::for_config(tol * 1e-3, &config, w))?;
            match s.format {
                Format::Json => s.emit_json(&json!({"window": w, "exact": v.is_exact(), "value": v.to_graded().to_string(), "components": v}))?,
                Format::Csv => {
                    let mut t = Table::new("npoint", &["degree", "value"]);
                    for k in w.degrees() {
                        t.push(vec![k.to_string(), v.component(k).to_string()]);
                    }
                    s.emit(&t.to_csv()?)?;
                }
            }
            Ok(true)
        }
        Command::Check(args) => {
            let r = run_axiom(&s, args)?;
            s.emit_report(&r)
        }
        Command::Factor(args) => run_factor(&s, args),
        Command::Counterexample { m } => {
            let r = run_counterexample(p, *m)?;
            match s.format {
                Format::Json => s.emit_json(&r)?,
                Format::Csv => s.emit(&counterexample_table([&r]).to_csv()?)?,
            }
            Ok(r.pass)
        }
        Command::Suite { tables, only } => {
            let mut config = s.config.clone();
            if only.is_some() {
                config.only = only.clone();
            }
            if let Some(t) = tables {
                config.tables = Some(t.display().to_string());
            }
            let report = run_suite(&config)?;
            for e in &report.entries {
                let status = match e.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Skipped => "skipped",
                    Status::Error => "ERROR",
                };
                eprintln!("{status:>8}  {}", e.label);
            }
            if let Some(dir) = &config.tables {
                emit_tables(&suite_tables(&report)?, Path::new(dir), s.format)?;
            }
            s.emit_json(&report)?;
            Ok(report.pass)
        }
    }
}

fn one_state(p: &Preset, arg: &str) -> Result<GradedVector> {
    let v = GradedVector::from_tokens(arg)?;
    p.check_vector(&v)?;
    Ok(v)
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

fn paired(p: &Preset, states: &str, points: &str) -> Result<(Vec<GradedVector>, PointConfiguration)> {
    let states = read_states(p, states)?;
    let config = PointConfiguration::parse(points)?;
    if states.len() != config.len() {
        return Err(Error::Config(format!("{} states for {} points", states.len(), config.len())));
    }
    Ok((states, config))
}

fn run_axiom(s: &Settings, a: &CheckArgs) -> Result<CheckReport> {
    let (p, w, tol) = (&s.preset, s.window, s.config.tol);
    let gen = || p.generator_state(p.generators()[0]);
    match a.axiom {
        Axiom::Insertion => check_insertion_at_zero(p, w),
        Axiom::Meromorphicity => check_meromorphicity(p, w),
        Axiom::Equivariance => {
            let (states, config) = paired(p, required(&a.states, "states")?, required(&a.points, "points")?)?;
            let q: Scalar = required(&a.q, "q")?.parse()?;
            check_equivariance(p, &q, &states, &config, w, tol)
        }
        Axiom::Permutation => {
            let (states, config) = paired(p, required(&a.states, "states")?, required(&a.points, "points")?)?;
            check_permutation_invariance(p, &states, &config, w, tol)
        }
        Axiom::Skew => {
            let states = read_states(p, required(&a.states, "states")?)?;
            match states.as_slice() {
                [x, y] => check_skew_symmetry(p, x, y, w),
                _ => Err(Error::Config("skew symmetry takes exactly two states".into())),
            }
        }
        Axiom::Associativity => {
            let (outer, oc) = match (&a.states, &a.points) {
                (Some(st), Some(pt)) => paired(p, st, pt)?,
                _ => (vec![gen()], PointConfiguration::parse("2")?),
            };
            let (inner, ic) = match (&a.inner_states, &a.inner_points) {
                (Some(st), Some(pt)) => paired(p, st, pt)?,
                _ => (vec![gen(), gen()], PointConfiguration::parse("1/2,0")?),
            };
            let center: Scalar = a.center.as_deref().unwrap_or("0").parse()?;
            let zip = |v: Vec<GradedVector>, c: &PointConfiguration| v.into_iter().zip(c.points().iter().cloned()).collect::<Vec<_>>();
            check_associativity(p, &zip(outer, &oc), &center, &zip(inner, &ic), w, tol)
        }
        Axiom::Holomorphy => {
            let (states, config) = match (&a.states, &a.points) {
                (Some(st), Some(pt)) => paired(p, st, pt)?,
                _ => (vec![gen(), gen()], PointConfiguration::parse("2,0")?),
            };
            check_holomorphy(p, &states, &config, a.moving, a.eps, a.samples, w, tol)
        }
    }
}

fn run_factor(s: &Settings, a: &FactorArgs) -> Result<bool> {
    let (p, w) = (&s.preset, s.window);
    let s = &Settings {
        config: s.config.clone(),
        preset: p.clone(),
        window: w,
        format: s.format,
        out: a.report.clone().or_else(|| s.out.clone()),
    };
    let exprs = || read_exprs(required(&a.exprs, "exprs")?);
    let geometry = || Geometry::read(required(&a.geometry, "geometry")?);
    let opts = EvalOptions { quad_n: s.config.quad_n, ..EvalOptions::default() };
    match a.op {
        FactorOp::Multiply => {
            let xs = exprs()?;
            let g = geometry()?;
            let (first, rest) = xs.split_first().ok_or_else(|| Error::Config("no expressions to multiply".into()))?;
            let mut acc = first.clone();
            for x in rest {
                let joint = OpenSet::union(vec![acc.carrier().clone(), x.carrier().clone()])?;
                acc = acc.multiply(x, &joint)?;
            }
            s.emit_json(&acc.extend(g.set("W")?)?.to_json())?;
            Ok(true)
        }
        FactorOp::Eval => {
            let values = exprs()?.iter().map(|x| x.evaluate(p, w, opts)).collect::<Result<Vec<_>>>()?;
            let out: Vec<Value> = values
                .iter()
                .map(|v| json!({"exact": v.is_exact(), "value": v.to_graded().to_string(), "components": v}))
                .collect();
            s.emit_json(&out)?;
            Ok(true)
        }
        FactorOp::Kernel => {
            let xs = exprs()?;
            let kernel = relation_kernel(p, &xs, w)?;
            let vectors: Vec<Vec<String>> = kernel.iter().map(|c| c.iter().map(|x| x.to_string()).collect()).collect();
            s.emit_json(&json!({"family": xs.len(), "rank": xs.len() - kernel.len(), "kernel_dim": kernel.len(), "kernel": vectors}))?;
            Ok(true)
        }
        FactorOp::Counterexample => {
            let r = run_counterexample(p, a.m)?;
            match s.format {
                Format::Json => s.emit_json(&r)?,
                Format::Csv => s.emit(&counterexample_table([&r]).to_csv()?)?,
            }
            Ok(r.pass)
        }
        FactorOp::Weiss => {
            let g = geometry()?;
            let x = g.set("X")?;
            let cover = read_cover(&g)?;
            let r = weiss_cover_check(p, x, &cover, &exprs()?, w)?;
            s.emit_report(&r)
        }
        FactorOp::Roundtrip => {
            let mut samples = Vec::new();
            if let (Some(st), Some(pt)) = (&a.states, &a.points) {
                let (states, config) = paired(p, st, pt)?;
                for k in w.degrees() {
                    samples.push(RoundtripSample { states: states.clone(), points: config.points().to_vec(), k });
                }
            }
            let r = roundtrip_check(p, w, &samples, 1e-9)?;
            s.emit_report(&r)
        }
    }
}

/// `"cover"` is an array of open sets or `{"concentric": {"center", "radius"}}`.
fn read_cover(g: &Geometry) -> Result<Cover> {
    let c = g.raw.get("cover").ok_or_else(|| Error::Config("geometry has no `cover`".into()))?;
    match c {
        Value::Array(items) => Ok(Cover::Finite(items.iter().map(OpenSet::from_json).collect::<Result<_>>()?)),
        Value::Object(m) if m.contains_key("concentric") => {
            let spec = &m["concentric"];
            let field = |k: &str| -> Result<Scalar> {
                spec.get(k)
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Config(format!("concentric cover needs `{k}`")))?
                    .parse()
            };
            Cover::concentric(field("center")?, &field("radius")?)
        }
        _ => Err(Error::Config("`cover` must be an array of open sets or a concentric spec".into())),
    }
}
