//! `spikegof` command-line front end.

mod svg;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use spikegof::boundary::{calibrate_band, verify_band, BoundarySpec, DEFAULT_STEP};
use spikegof::fit::{fit_train, fitted_model_battery, Family};
use spikegof::gof::{any_rejects, run_battery, BatteryConfig, TestReport};
use spikegof::harness::{coverage_csv, coverage_experiment, joint_csv, joint_rejection_experiment, DEFAULT_SIZES};
use spikegof::intensity::DEFAULT_QUAD_TOL;
use spikegof::rescale::time_transform;
use spikegof::simulate::{simulate_renewal, thin_simulate, RngStream};
use spikegof::trains::{parse_spike_file, parse_train, SpikeTrain, TransformedTrain};
use spikegof::{exec, Execution, IntensityModel};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_REJECT: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "spikegof", version, about = "Goodness-of-fit tests for spike-train models")]
struct Cli {
    /// Worker threads for parallel loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for JSON, CSV and SVG outputs.
    #[arg(long, global = true, env = "SPIKEGOF_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Also write SVG plots next to the numeric outputs.
    #[arg(long, global = true)]
    svg: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a train from a model and print it.
    Simulate(SimulateArgs),
    /// Time-transform a train with a model and print the transformed train.
    Transform(TransformArgs),
    /// Run the five-test battery and write reports.json.
    Test(TestArgs),
    /// Fit a renewal family by maximum likelihood and print it as JSON.
    Fit(FitArgs),
    /// Find the boundary slope b for a coverage level at fixed offset a.
    Calibrate(CalibrateArgs),
    /// Print the coverage interval of a boundary a + b√t.
    VerifyBand(VerifyArgs),
    /// Monte Carlo coverage of the Wiener bands; writes coverage.csv.
    Coverage(CoverageArgs),
    /// Monte Carlo joint rejections of the uniform, Berman and Wiener tests; writes joint.csv.
    Joint(JointArgs),
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

impl StreamArgs {
    fn stream(&self) -> RngStream {
        RngStream::new(self.seed, self.stream)
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Model spec (JSON or key = value lines).
    #[arg(long)]
    model: PathBuf,
    /// Observation window (0, horizon]; simulated by thinning.
    #[arg(long, conflicts_with = "events", required_unless_present = "events")]
    horizon: Option<f64>,
    /// Number of renewal intervals to draw instead (renewal models only).
    #[arg(long)]
    events: Option<usize>,
    #[command(flatten)]
    rng: StreamArgs,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Spike-time file, one time per line.
    #[arg(long)]
    train: PathBuf,
    /// Observation horizon; defaults to the file header or the last event.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    input: TrainArgs,
    #[arg(long)]
    model: PathBuf,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BatteryArgs {
    /// Significance level for the exit status.
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// Shuffles for the serial-correlation permutation test.
    #[arg(long, default_value_t = 999)]
    permutations: usize,
    #[command(flatten)]
    rng: StreamArgs,
}

impl BatteryArgs {
    fn config(&self) -> Result<BatteryConfig> {
        if !(self.level > 0.0 && self.level < 0.5) {
            bail!("--level must lie in (0, 0.5), got {}", self.level);
        }
        Ok(BatteryConfig {
            level: self.level,
            permutations: self.permutations,
            stream: self.rng.stream(),
            ..BatteryConfig::default()
        })
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: TrainArgs,
    /// Model spec; may be omitted when the train is already transformed.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    battery: BatteryArgs,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: TrainArgs,
    #[arg(long, default_value = "inverse_gaussian")]
    family: Family,
    /// Ignore the censored gap between the last event and the horizon.
    #[arg(long)]
    no_censored: bool,
    /// Also run the battery on the fitted model and write reports.json.
    #[arg(long)]
    battery: bool,
    #[command(flatten)]
    battery_args: BatteryArgs,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Coverage level (e.g. 0.95) or, below 0.5, the significance level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Fixed boundary offset.
    #[arg(long, default_value_t = 0.3)]
    a: f64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Coverage level (e.g. 0.95) or, below 0.5, the significance level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Boundary offset; defaults to the published band for the level.
    #[arg(long, requires = "b")]
    a: Option<f64>,
    #[arg(long, requires = "a")]
    b: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 10_000)]
    replicates: usize,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CoverageArgs {
    #[command(flatten)]
    mc: McArgs,
    /// Band coverage levels.
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 0.99])]
    levels: Vec<f64>,
}

#[derive(Args)]
struct JointArgs {
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_REJECT),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Ok(false) when a test rejects.
fn run(cli: &Cli) -> Result<bool> {
    if let Some(threads) = cli.threads {
        exec::configure_threads(threads).map_err(anyhow::Error::msg)?;
    }
    match &cli.command {
        Command::Simulate(args) => simulate(args).map(|_| true),
        Command::Transform(args) => transform(args).map(|_| true),
        Command::Test(args) => test(cli, args),
        Command::Fit(args) => fit(cli, args),
        Command::Calibrate(args) => calibrate(args).map(|_| true),
        Command::VerifyBand(args) => verify(args).map(|_| true),
        Command::Coverage(args) => coverage(cli, args).map(|_| true),
        Command::Joint(args) => joint(cli, args).map(|_| true),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_model(path: &Path) -> Result<IntensityModel> {
    IntensityModel::parse_spec(&read(path)?).with_context(|| format!("malformed model spec {}", path.display()))
}

fn load_train(input: &TrainArgs) -> Result<SpikeTrain> {
    let train = parse_train(&read(&input.train)?, input.horizon).with_context(|| format!("in {}", input.train.display()))?;
    if train.is_empty() {
        bail!("{}: no events", input.train.display());
    }
    Ok(train)
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_out(cli: &Cli, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cli.out_dir).with_context(|| format!("cannot create {}", cli.out_dir.display()))?;
    let path = cli.out_dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn write_svg(cli: &Cli, name: &str, document: Option<String>) -> Result<()> {
    match document {
        Some(doc) => {
            write_out(cli, name, &doc)?;
        }
        None => eprintln!("warning: nothing to plot for {name}; no file written"),
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let stream = args.rng.stream();
    let train = match (args.horizon, args.events) {
        (Some(horizon), _) => thin_simulate(&model, horizon, &stream)?,
        (None, Some(n)) => {
            if model.stimulus.is_some() {
                bail!("--events needs a renewal model; use --horizon for models with a stimulus");
            }
            simulate_renewal(&model.hazard, n, &stream)?
        }
        (None, None) => unreachable!("clap requires one of --horizon and --events"),
    };
    emit(&train.to_text(), args.output.as_deref())
}

fn transform(args: &TransformArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let train = load_train(&args.input)?;
    let tt = time_transform(&train, &model, args.tol)?;
    emit(&tt.to_text(), args.output.as_deref())
}

fn transformed_input(args: &TestArgs) -> Result<TransformedTrain> {
    if let Some(model) = &args.model {
        let model = load_model(model)?;
        return Ok(time_transform(&load_train(&args.input)?, &model, DEFAULT_QUAD_TOL)?);
    }
    let text = read(&args.input.train)?;
    let file = parse_spike_file(&text).with_context(|| format!("in {}", args.input.train.display()))?;
    if !file.transformed {
        bail!("--model is required unless the train file is transformed (# scale=lambda)");
    }
    let last = file.values.last().copied().unwrap_or(0.0);
    let total = args.input.horizon.or(file.horizon).unwrap_or(last);
    Ok(TransformedTrain::new(file.values, total)?)
}

fn test(cli: &Cli, args: &TestArgs) -> Result<bool> {
    let config = args.battery.config()?;
    let tt = transformed_input(args)?;
    let reports = run_battery(&tt, &config)?;
    finish_battery(cli, &reports, config.level)
}

fn finish_battery(cli: &Cli, reports: &[TestReport], level: f64) -> Result<bool> {
    let json = serde_json::to_string_pretty(reports)? + "\n";
    let path = write_out(cli, "reports.json", &json)?;
    for r in reports {
        let verdict = match r.passes_at(level) {
            Some(true) => "pass",
            Some(false) => "REJECT",
            None => "n/a",
        };
        match r.p_value {
            Some(p) => println!("{:<20} p = {p:<10.4} {verdict}", r.test_name),
            None => println!("{:<20} {:<14} {verdict}", r.test_name, ""),
        }
        if cli.svg {
            write_svg(cli, &format!("{}.svg", r.test_name), svg::render_plot(&r.test_name, &r.plot_data))?;
        }
    }
    eprintln!("wrote {}", path.display());
    Ok(!any_rejects(reports, level))
}

fn fit(cli: &Cli, args: &FitArgs) -> Result<bool> {
    let train = load_train(&args.input)?;
    if !args.battery {
        let result = fit_train(&train, args.family, !args.no_censored)?;
        println!("{}", serde_json::to_string_pretty(&result)?);
        return Ok(true);
    }
    if args.no_censored {
        bail!("--battery always includes the censored gap");
    }
    let config = args.battery_args.config()?;
    let fitted = fitted_model_battery(&train, args.family, &config)?;
    eprintln!("{}", serde_json::to_string_pretty(&fitted.fit)?);
    finish_battery(cli, &fitted.reports, config.level)
}

/// Coverage from a level that may be given either way round.
fn coverage_level(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        bail!("--level must lie in (0, 1), got {level}");
    }
    Ok(if level >= 0.5 { level } else { 1.0 - level })
}

/// `x` rounded to 15 significant digits.
fn sig15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (14 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn calibrate(args: &CalibrateArgs) -> Result<()> {
    let coverage = coverage_level(args.level)?;
    let spec = calibrate_band(1.0 - coverage, args.a, args.step)?;
    println!("coverage = {coverage}");
    println!("a = {}", sig15(spec.a));
    println!("b = {}", sig15(spec.b));
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<()> {
    let coverage = coverage_level(args.level)?;
    let spec = match (args.a, args.b) {
        (Some(a), Some(b)) => BoundarySpec::new(a, b, coverage, args.step)?,
        _ => match BoundarySpec::published(coverage) {
            Some(p) => BoundarySpec::new(p.a, p.b, coverage, args.step)?,
            None => bail!("no published band for coverage {coverage}; pass --a and --b"),
        },
    };
    let (lo, hi) = verify_band(&spec)?;
    println!("a = {}", sig15(spec.a));
    println!("b = {}", sig15(spec.b));
    println!("nominal = {coverage}");
    println!("coverage in [{}, {}]", sig15(lo), sig15(hi));
    Ok(())
}

fn check_sizes(mc: &McArgs) -> Result<()> {
    if mc.sizes.is_empty() {
        bail!("--sizes is empty");
    }
    Ok(())
}

fn coverage(cli: &Cli, args: &CoverageArgs) -> Result<()> {
    check_sizes(&args.mc)?;
    let bands = args
        .levels
        .iter()
        .map(|&l| Ok(BoundarySpec::for_level(coverage_level(l)?)?))
        .collect::<Result<Vec<_>>>()?;
    let rows = coverage_experiment(&args.mc.sizes, args.mc.replicates, &bands, args.mc.seed, Execution::default())?;
    let path = write_out(cli, "coverage.csv", &coverage_csv(&rows))?;
    eprintln!("wrote {}", path.display());
    if cli.svg {
        write_svg(cli, "coverage.svg", svg::coverage_svg(&rows))?;
    }
    Ok(())
}

fn joint(cli: &Cli, args: &JointArgs) -> Result<()> {
    check_sizes(&args.mc)?;
    let rows = joint_rejection_experiment(&args.mc.sizes, args.mc.replicates, args.level, args.mc.seed, Execution::default())?;
    let path = write_out(cli, "joint.csv", &joint_csv(&rows))?;
    eprintln!("wrote {}", path.display());
    if cli.svg {
        write_svg(cli, "joint.svg", svg::joint_svg(&rows))?;
    }
    Ok(())
}
