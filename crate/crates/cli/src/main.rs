use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lgtime::inequalities::{ElgiSpec, Family, FamilyValues, SlgiSpec, WlgiSpec};
use lgtime::jointmeas::{jm_verdict_with, BiasLaw};
use lgtime::measurement::Statistics;
use lgtime::nsit::{nsit_satisfied, DisturbanceReport, NSIT_TOL};
use lgtime::scan::config::{load_config, parse_angle};
use lgtime::scan::figures::figure_config;
use lgtime::scan::report::{write_records, Format};
use lgtime::scan::threshold::{threshold_eta, Domain, StateChoice, ThresholdOptions, ThresholdQuery};
use lgtime::scan::{scan, GridPoint, ScanConfig, ScanOutput, ScanRecord};
use lgtime::{selftest, Error};

/// Leggett-Garg inequality scans for a qubit under unsharp measurements.
#[derive(Parser)]
#[command(name = "lgscan", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every inequality, disturbance and compatibility check at one point.
    Eval(EvalArgs),
    /// Run the grids of a configuration file.
    Scan(ScanArgs),
    /// Locate the sharpness at which a family starts to be violated.
    Threshold(ThresholdArgs),
    /// Emit the data behind one of the built-in figures (1 to 4).
    Figure(FigureArgs),
    /// Run the randomized invariant suites.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Write records here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).ok_or_else(|| format!("cannot read '{s}' as a number or angle such as pi/3"))
}

fn bias(s: &str) -> Result<BiasLaw, String> {
    match s {
        "zero" => Ok(BiasLaw::Zero),
        "eta-minus-one" => Ok(BiasLaw::EtaMinusOne),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite() && x.abs() <= 1.0)
            .map(BiasLaw::Fixed)
            .ok_or_else(|| format!("bias must be zero, eta-minus-one or a number in [-1, 1], got '{other}'")),
    }
}

#[derive(Args)]
struct StateArgs {
    /// Pure-state angle θ in cosθ|0⟩ + e^{iφ}sinθ|1⟩.
    #[arg(long, value_parser = angle, allow_hyphen_values = true, conflicts_with = "mixed")]
    theta: Option<f64>,
    #[arg(long, value_parser = angle, allow_hyphen_values = true, conflicts_with = "mixed")]
    phi: Option<f64>,
    /// Use the maximally mixed state.
    #[arg(long)]
    mixed: bool,
}

impl StateArgs {
    fn choice(&self) -> StateChoice {
        if self.mixed {
            StateChoice::Mixed
        } else {
            StateChoice::Pure {
                theta: self.theta.unwrap_or(0.0),
                phi: self.phi.unwrap_or(0.0),
            }
        }
    }
}

#[derive(Args)]
struct AxisArgs {
    /// Rotation axis (cosα sinβ, cosα cosβ, sinα); the default is x̂.
    #[arg(long, value_parser = angle, allow_hyphen_values = true, default_value = "0")]
    alpha: f64,
    #[arg(long, value_parser = angle, allow_hyphen_values = true, default_value = "pi/2")]
    beta: f64,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    tau: f64,
    #[arg(long)]
    eta: f64,
    /// zero, eta-minus-one, or a fixed number.
    #[arg(long, value_parser = bias, default_value = "zero", allow_hyphen_values = true)]
    bias: BiasLaw,
    #[command(flatten)]
    axis: AxisArgs,
    /// Disturbances at or below this count as zero.
    #[arg(long, default_value_t = NSIT_TOL)]
    tolerance: f64,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
    /// Override the disturbance tolerance of every run.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Slgi,
    Wlgi,
    Elgi,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Slgi => Family::Slgi,
            FamilyArg::Wlgi => Family::Wlgi,
            FamilyArg::Elgi => Family::Elgi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MaximizeArg {
    /// Maximize over the delay τ for the given state.
    Tau,
    /// Maximize over pure states and τ.
    All,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Restrict to one member of the family by index.
    #[arg(long)]
    spec: Option<usize>,
    #[arg(long, value_parser = bias, default_value = "zero", allow_hyphen_values = true)]
    bias: BiasLaw,
    #[command(flatten)]
    state: StateArgs,
    /// Fixed delay; required unless --maximize is given.
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    tau: Option<f64>,
    #[arg(long, value_enum, conflicts_with = "tau")]
    maximize: Option<MaximizeArg>,
    #[command(flatten)]
    axis: AxisArgs,
    /// Step of the initial η sweep.
    #[arg(long, default_value_t = 1e-3)]
    coarse_step: f64,
    /// Width of the final η bracket.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

#[derive(Args)]
struct FigureArgs {
    /// Figure number, 1 to 4.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
    number: u8,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = selftest::DEFAULT_CASES)]
    cases: usize,
    #[arg(long, default_value_t = selftest::DEFAULT_SEED)]
    seed: u64,
}

/// Raised when a self-test check fails.
#[derive(Debug)]
struct SelftestFailed;

impl std::fmt::Display for SelftestFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("self-test failed")
    }
}

impl std::error::Error for SelftestFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<SelftestFailed>().is_some() {
        return 3;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 2,
        Some(
            Error::Invariant(_)
            | Error::Normalization { .. }
            | Error::NotHermitian { .. }
            | Error::NotPsd { .. },
        ) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("cannot start worker pool")?;
    }
    match cli.command {
        Command::Eval(a) => eval(a),
        Command::Scan(a) => {
            let mut runs = load_config(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
            if let Some(t) = a.tolerance {
                if !(t.is_finite() && t >= 0.0) {
                    bail!("--tolerance must be a non-negative number");
                }
                for r in &mut runs {
                    r.tolerance = t;
                }
            }
            run_scans(&runs, &a.output)
        }
        Command::Threshold(a) => threshold(a),
        Command::Figure(a) => run_scans(&figure_config(a.number as usize)?, &a.output),
        Command::Selftest(a) => {
            let report = selftest::run(a.cases, a.seed);
            for c in &report.checks {
                let status = if c.passed() { "PASS" } else { "FAIL" };
                println!(
                    "{status} {:<28} cases={} failures={} worst={:.3e}",
                    c.name, c.cases, c.failures, c.worst
                );
                if let Some(msg) = &c.first_failure {
                    println!("     first failure: {msg}");
                }
            }
            if report.passed() {
                Ok(())
            } else {
                Err(SelftestFailed.into())
            }
        }
    }
}

fn write_to(path: Option<&Path>, records: &[ScanRecord], format: Format) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            let mut w = BufWriter::new(f);
            write_records(records, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_records(records, format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// With `--out`, everything goes to one file. Otherwise runs that name their
/// own `out` file are written there and the rest go to standard output.
fn run_scans(runs: &[ScanConfig], output: &OutputArgs) -> anyhow::Result<()> {
    let format = Format::from(output.format);
    let mut combined = ScanOutput::default();
    let mut to_stdout = Vec::new();
    for run in runs {
        let out = scan(run, None)?;
        eprintln!(
            "{}: {} points evaluated, {} skipped (|x| + eta > 1), {} records",
            run.name,
            out.evaluated,
            out.skipped,
            out.records.len()
        );
        match (&output.out, &run.out) {
            (None, Some(path)) => write_to(Some(path), &out.records, format)?,
            (None, None) => to_stdout.extend(out.records.iter().cloned()),
            (Some(_), _) => {}
        }
        combined.extend(out);
    }
    match &output.out {
        Some(path) => write_to(Some(path), &combined.records, format),
        None if !to_stdout.is_empty() || runs.iter().all(|r| r.out.is_none()) => write_to(None, &to_stdout, format),
        None => Ok(()),
    }
}

fn eval(a: EvalArgs) -> anyhow::Result<()> {
    let (theta, phi) = match a.state.choice() {
        StateChoice::Pure { theta, phi } => (theta, phi),
        StateChoice::Mixed => (f64::NAN, f64::NAN),
    };
    let x = a.bias.x(a.eta);
    let point = GridPoint {
        theta,
        phi,
        tau: a.tau,
        eta: a.eta,
        x,
        axis_alpha: a.axis.alpha,
        axis_beta: a.axis.beta,
    };
    let setup = point.setup()?;
    let stats = Statistics::collect(&point.state(), &setup)?;
    let values = FamilyValues::from_stats(&stats);
    let report = DisturbanceReport::from_stats(&stats)?;
    let nsit = nsit_satisfied(&report, a.tolerance);
    let jm = jm_verdict_with(&setup, a.bias)?;

    let mut w = BufWriter::new(io::stdout().lock());
    let state = if a.state.mixed {
        "I/2".to_string()
    } else {
        format!("theta={theta} phi={phi}")
    };
    writeln!(w, "state {state}  tau={}  eta={}  x={x}", a.tau, a.eta)?;
    let mark = |v: f64, f: Family| if lgtime::inequalities::is_violation(v, f.bound()) { "  VIOLATED" } else { "" };
    writeln!(w, "\nstandard (bound 1)")?;
    for (s, v) in SlgiSpec::all().iter().zip(&values.slgi) {
        writeln!(w, "  [{}] signs {:?}  {v:+.12}{}", s.index(), s.signs, mark(*v, Family::Slgi))?;
    }
    writeln!(w, "\nwigner form (bound 0)")?;
    for (s, v) in WlgiSpec::all().iter().zip(&values.wlgi) {
        writeln!(w, "  [{:2}] {s}  {v:+.12}{}", s.index(), mark(*v, Family::Wlgi))?;
    }
    writeln!(w, "\nentropic (bound 0)")?;
    for (s, v) in ElgiSpec::all().iter().zip(&values.elgi) {
        writeln!(w, "  [{}] middle {}  {v:+.12}{}", s.index(), s.middle, mark(*v, Family::Elgi))?;
    }
    writeln!(w, "\ndisturbances (arrow-of-time residual {:.2e})", report.aot_residual)?;
    for (name, v) in report.entries() {
        writeln!(w, "  {name:<16} {v:+.12}")?;
    }
    writeln!(
        w,
        "nsit: (1)2={} (1)3={} (2)3={} (1)23={} 1(2)3={}",
        nsit.nsit_12, nsit.nsit_13, nsit.nsit_23, nsit.nsit_123, nsit.nsit_1_2_3
    )?;
    writeln!(w, "\njoint measurability")?;
    for p in &jm.pairwise {
        writeln!(
            w,
            "  ({},{}) compatible={} margin={:+.6e} eta*={:.6}",
            p.pair.0, p.pair.1, p.compatible, p.margin, p.threshold
        )?;
    }
    match jm.triplewise {
        Some(t) => writeln!(
            w,
            "  triple compatible={} margin={:+.6e} eta*={:.6}",
            t.compatible, t.margin, t.threshold
        )?,
        None => writeln!(w, "  triple: not decided for biased measurements")?,
    }
    w.flush()?;
    Ok(())
}

fn threshold(a: ThresholdArgs) -> anyhow::Result<()> {
    let family = Family::from(a.family);
    if let Some(i) = a.spec {
        if i >= family.spec_count() {
            bail!("{family} has {} members; --spec {i} is out of range", family.spec_count());
        }
    }
    let domain = match (a.maximize, a.tau) {
        (Some(MaximizeArg::Tau), _) => Domain::OverTau { state: a.state.choice() },
        (Some(MaximizeArg::All), _) => Domain::OverAll,
        (None, Some(tau)) => Domain::Fixed {
            state: a.state.choice(),
            tau,
        },
        (None, None) => bail!("give --tau or --maximize"),
    };
    let query = ThresholdQuery {
        family,
        spec: a.spec,
        bias: a.bias,
        axis_alpha: a.axis.alpha,
        axis_beta: a.axis.beta,
        domain,
    };
    let opts = ThresholdOptions {
        coarse_step: a.coarse_step,
        tolerance: a.tolerance,
        ..Default::default()
    };
    let r = threshold_eta(&query, &opts)?;
    println!("eta* = {:.6}", r.eta);
    println!("bracket = [{:.8}, {:.8}]", r.bracket.0, r.bracket.1);
    println!(
        "maximizer above threshold: theta={:.6} phi={:.6} tau={:.6} spec={}",
        r.at.theta, r.at.phi, r.at.tau, r.at.spec_index
    );
    Ok(())
}
