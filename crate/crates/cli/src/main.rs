//! `hbral` command-line front end.
//!
//! Exit codes: 0 success / no alert, 1 validation violations,
//! 2 usage, I/O or parse errors, 3 alerts present.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hbral::anomaly::{compute_pdt, parse_usual_times, stream_detect};
use hbral::evaluation::{compare, read_trace_csv, summarize, write_error_csv, write_estimate_csv, write_trace_csv, EstimateTable};
use hbral::fixtures::FixtureSet;
use hbral::grammar::{HbralHierarchy, Scenario};
use hbral::hmm::{Decoder, HmmModel};
use hbral::reproduce::{alert_jsonl, reproduce_bundle, ReproduceOptions};
use hbral::simulator::{simulate, trace_to_scenario, SimulationConfig, DEFAULT_SIGMA};
use hbral::{Error, Hmm};

#[derive(Parser)]
#[command(name = "hbral", version, about = "Smart-home activity recognition and dwell-time alerting")]
struct Cli {
    /// Seed for every random stream; echoed in all outputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a hierarchy, a model and optionally a scenario.
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Simulate a day and write trace.csv and scenario.json.
    Simulate {
        #[command(flatten)]
        inputs: Inputs,
        /// Full simulation config (JSON); overrides --hierarchy/--model.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Decode a trace CSV; writes estimate.csv and errors.csv.
    Decode {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "viterbi")]
        decoder: Decoder,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run dwell-time detection over a scenario.
    Detect {
        #[arg(long)]
        scenario: PathBuf,
        /// Usual minutes per room (JSON object).
        #[arg(long)]
        thresholds: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Simulate, decode and score one run; prints the report.
    Evaluate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value = "viterbi")]
        decoder: Decoder,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the full 07:00-12:00 figure and report bundle.
    ReproducePaper {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        #[arg(long, default_value = "viterbi")]
        decoder: Decoder,
        /// Also evaluate N seeds starting at --seed and report the median.
        #[arg(long, value_name = "N")]
        sweep: Option<usize>,
    },
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    hierarchy: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Violations,
    Alerts,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e).into())
}

fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn create(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path).map_err(|e| Error::io(path, e).into())
}

fn out_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

fn parse_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn fixtures() -> Result<FixtureSet, Failure> {
    Ok(FixtureSet::from_env()?)
}

impl Inputs {
    fn hierarchy(&self, f: &FixtureSet) -> Result<HbralHierarchy, Failure> {
        match &self.hierarchy {
            Some(p) => HbralHierarchy::from_json(&read(p)?).map_err(|e| parse_err(p, e)),
            None => Ok(f.hierarchy.clone()),
        }
    }

    fn model(&self, f: &FixtureSet) -> Result<Hmm, Failure> {
        match &self.model {
            Some(p) => HmmModel::from_json(&read(p)?).map_err(|e| parse_err(p, e)),
            None => Ok(f.model.clone()),
        }
    }
}

fn load_config(
    inputs: &Inputs,
    config: Option<&Path>,
    sigma: Option<f64>,
    seed: u64,
) -> Result<SimulationConfig, Failure> {
    let f = fixtures()?;
    let mut c = match config {
        Some(p) => SimulationConfig::from_json(&read(p)?).map_err(|e| parse_err(p, e))?,
        None => SimulationConfig::new(inputs.hierarchy(&f)?, inputs.model(&f)?, seed),
    };
    c.seed = seed;
    if let Some(s) = sigma {
        c.noise_sigma = s;
    }
    c.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(c)
}

fn validate(seed: u64, inputs: &Inputs, scenario: Option<&Path>) -> CmdResult {
    let f = fixtures()?;
    let hierarchy = inputs.hierarchy(&f)?;
    let (model_name, model) = match &inputs.model {
        Some(p) => (p.display().to_string(), HmmModel::<f64>::from_json_unvalidated(&read(p)?).map_err(|e| parse_err(p, e))?),
        None => ("model.json".to_owned(), f.model.clone()),
    };
    let hierarchy_name = inputs.hierarchy.as_ref().map_or("hierarchy.json".to_owned(), |p| p.display().to_string());

    let mut lines: Vec<String> = Vec::new();
    lines.extend(hierarchy.validate().lines().into_iter().map(|l| format!("{hierarchy_name}: {l}")));
    lines.extend(model.validate().lines().into_iter().map(|l| format!("{model_name}: {l}")));
    if let Some(p) = scenario {
        let s = Scenario::from_json(&read(p)?).map_err(|e| parse_err(p, e))?;
        lines.extend(hierarchy.validate_scenario(&s).lines().into_iter().map(|l| format!("{}: {l}", p.display())));
    }
    for l in &lines {
        println!("{l}");
    }
    println!("seed {seed}: {} violation(s)", lines.len());
    if lines.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violations)
    }
}

fn simulate_cmd(seed: u64, inputs: &Inputs, config: Option<&Path>, sigma: Option<f64>, out: &Path) -> CmdResult {
    let c = load_config(inputs, config, sigma, seed)?;
    let trace = simulate(&c).map_err(Error::from)?;
    let scenario = trace_to_scenario(&trace, &c.hierarchy, seed).map_err(Error::from)?;
    out_dir(out)?;
    let path = out.join("trace.csv");
    write_trace_csv(create(&path)?, &trace).map_err(Error::from)?;
    write(&out.join("scenario.json"), &(scenario.to_json() + "\n"))?;
    println!(
        "seed {seed}: simulated {} steps (sigma {}), {} events -> {}",
        trace.len(),
        c.noise_sigma,
        scenario.events().len(),
        out.display()
    );
    Ok(())
}

fn decode_cmd(seed: u64, inputs: &Inputs, trace_path: &Path, decoder: Decoder, out: &Path) -> CmdResult {
    let model = inputs.model(&fixtures()?)?;
    let file = fs::File::open(trace_path).map_err(|e| Error::io(trace_path, e))?;
    let trace = read_trace_csv(file, model.state_labels().to_vec(), 1).map_err(|e| parse_err(trace_path, e))?;
    let decoded = model.decode(&trace.quantized_observations, decoder).map_err(Error::from)?;
    let series = compare(&trace.hidden_states, &decoded.states, &trace.times).map_err(Error::from)?;
    out_dir(out)?;
    let table = EstimateTable { labels: model.state_labels().to_vec(), times: trace.times.clone(), states: decoded.states };
    write_estimate_csv(create(&out.join("estimate.csv"))?, &table).map_err(Error::from)?;
    write_error_csv(create(&out.join("errors.csv"))?, &series).map_err(Error::from)?;
    println!(
        "seed {seed}: decoded {} steps, {} error(s), rate {:.4}",
        series.len(),
        series.error_count(),
        series.error_count() as f64 / series.len() as f64
    );
    Ok(())
}

fn detect_cmd(seed: u64, scenario: &Path, thresholds: Option<&Path>, out: &Path) -> CmdResult {
    let s = Scenario::from_json(&read(scenario)?).map_err(|e| parse_err(scenario, e))?;
    let usual = match thresholds {
        Some(p) => parse_usual_times(&read(p)?).map_err(|e| parse_err(p, e))?,
        None => fixtures()?.usual,
    };
    let th = compute_pdt(&usual).map_err(Error::from)?;
    let alerts = stream_detect(&s, &th).map_err(Error::from)?;
    for a in &alerts {
        println!("{}", a.human_line());
    }
    out_dir(out)?;
    write(&out.join("alerts.jsonl"), &alert_jsonl(&alerts, Some(seed)))?;
    println!("seed {seed}: {} alert(s)", alerts.len());
    if alerts.is_empty() {
        Ok(())
    } else {
        Err(Failure::Alerts)
    }
}

fn evaluate_cmd(
    seed: u64,
    inputs: &Inputs,
    config: Option<&Path>,
    sigma: Option<f64>,
    decoder: Decoder,
    out: Option<&Path>,
) -> CmdResult {
    let c = load_config(inputs, config, sigma, seed)?;
    let trace = simulate(&c).map_err(Error::from)?;
    let decoded = c.model.decode(&trace.quantized_observations, decoder).map_err(Error::from)?;
    let series = compare(&trace.hidden_states, &decoded.states, &trace.times).map_err(Error::from)?;
    let mut report = summarize(&series, &c.model, &trace.quantized_observations).map_err(Error::from)?;
    report.seed = Some(seed);
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    print!("{json}");
    if let Some(dir) = out {
        out_dir(dir)?;
        write(&dir.join("report.json"), &json)?;
    }
    Ok(())
}

fn reproduce_cmd(seed: u64, out: &Path, sigma: f64, decoder: Decoder, sweep: Option<usize>) -> CmdResult {
    let opts = ReproduceOptions { seed, noise_sigma: sigma, decoder, sweep };
    let summary = reproduce_bundle(&fixtures()?, out, &opts)?;
    let r = &summary.report;
    println!(
        "seed {seed}: {} steps, {} error(s), error rate {:.4}, {} alert(s) -> {}",
        r.steps,
        r.error_count,
        r.error_rate,
        summary.alerts.len(),
        out.display()
    );
    if let Some(s) = &summary.sweep {
        println!("sweep: {} seeds from {seed}, median error rate {:.4}", s.seeds.len(), s.median_error_rate);
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let seed = cli.seed;
    match &cli.command {
        Command::Validate { inputs, scenario } => validate(seed, inputs, scenario.as_deref()),
        Command::Simulate { inputs, config, sigma, out } => simulate_cmd(seed, inputs, config.as_deref(), *sigma, out),
        Command::Decode { inputs, trace, decoder, out } => decode_cmd(seed, inputs, trace, *decoder, out),
        Command::Detect { scenario, thresholds, out } => detect_cmd(seed, scenario, thresholds.as_deref(), out),
        Command::Evaluate { inputs, config, sigma, decoder, out } => {
            evaluate_cmd(seed, inputs, config.as_deref(), *sigma, *decoder, out.as_deref())
        }
        Command::ReproducePaper { out, sigma, decoder, sweep } => reproduce_cmd(seed, out, *sigma, *decoder, *sweep),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violations) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Alerts) => ExitCode::from(3),
    }
}
