//! The full 7:00-12:00 reproduction bundle: figure CSVs, the evaluation
//! report and dwell-time alerts for the simulated day.

use std::path::Path;

use serde_json::json;

use crate::anomaly::{compute_pdt, stream_detect, Alert};
use crate::evaluation::{run_experiment, sweep, EvaluationReport, SweepSummary};
use crate::fixtures::FixtureSet;
use crate::hmm::Decoder;
use crate::simulator::{trace_to_scenario, SimulationConfig, DEFAULT_SIGMA};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub noise_sigma: f64,
    pub decoder: Decoder,
    /// Additionally evaluate seeds `seed..seed + n`.
    pub sweep: Option<usize>,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self { seed: 0, noise_sigma: DEFAULT_SIGMA, decoder: Decoder::Viterbi, sweep: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceSummary {
    pub report: EvaluationReport,
    pub alerts: Vec<Alert>,
    pub sweep: Option<SweepSummary>,
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn alert_jsonl(alerts: &[Alert], seed: Option<u64>) -> String {
    alerts
        .iter()
        .map(|a| {
            let mut v = a.json_value();
            if let Some(seed) = seed {
                v["seed"] = json!(seed);
            }
            v.to_string() + "\n"
        })
        .collect()
}

/// Writes `figure2.csv`, `figure3.csv`, `figure4.csv`, `report.json` and
/// `alerts.jsonl` into `out` (plus `sweep/` when a sweep is requested).
/// The bundle is a pure function of the fixtures and options.
pub fn reproduce_bundle(fixtures: &FixtureSet, out: &Path, opts: &ReproduceOptions) -> Result<ReproduceSummary, Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut config = SimulationConfig::new(fixtures.hierarchy.clone(), fixtures.model.clone(), opts.seed);
    config.noise_sigma = opts.noise_sigma;

    let exp = run_experiment(&config, opts.decoder)?;
    exp.write_figures(out)?;
    write(&out.join("report.json"), &(serde_json::to_string_pretty(&exp.report).expect("report serializes") + "\n"))?;

    let scenario = trace_to_scenario(&exp.trace, &fixtures.hierarchy, opts.seed)?;
    let alerts = stream_detect(&scenario, &compute_pdt(&fixtures.usual)?)?;
    write(&out.join("alerts.jsonl"), &alert_jsonl(&alerts, Some(opts.seed)))?;

    let sweep_summary = match opts.sweep {
        Some(n) if n > 0 => {
            let dir = out.join("sweep");
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let (summary, reports) = sweep(&config, opts.seed..opts.seed + n as u64, opts.decoder)?;
            for r in &reports {
                let name = format!("report_seed_{}.json", r.seed.unwrap_or_default());
                write(&dir.join(name), &(serde_json::to_string_pretty(r).expect("report serializes") + "\n"))?;
            }
            write(&dir.join("summary.json"), &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"))?;
            Some(summary)
        }
        _ => None,
    };
    Ok(ReproduceSummary { report: exp.report, alerts, sweep: sweep_summary })
}
