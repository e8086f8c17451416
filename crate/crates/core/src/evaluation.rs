//! Prediction error `E_t = R_t - P_t` between the simulated hidden states
//! and the decoded ones, summary statistics, and the CSV/JSON artifacts of a
//! run.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::Minute;
use crate::hmm::{Decoder, HmmModel, InferenceError, StatePath};
use crate::simulator::{simulate, SimulationConfig, SimulationTrace};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error("real sequence has {real} step(s) but predicted has {predicted}")]
    LengthMismatch { real: usize, predicted: usize },
    #[error("{states} state step(s) but {times} time stamp(s)")]
    TimesMismatch { states: usize, times: usize },
    #[error("cannot compare empty sequences")]
    Empty,
    #[error("CSV: {0}")]
    Csv(String),
}

impl From<csv::Error> for EvaluationError {
    fn from(e: csv::Error) -> Self {
        EvaluationError::Csv(e.to_string())
    }
}

/// Aligned real and predicted state sequences with their differences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorSeries {
    pub times: Vec<Minute>,
    pub real_states: Vec<usize>,
    pub predicted_states: Vec<usize>,
    pub errors: Vec<i64>,
}

impl ErrorSeries {
    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error_count(&self) -> usize {
        self.errors.iter().filter(|&&e| e != 0).count()
    }
}

pub fn compare(real: &[usize], predicted: &[usize], times: &[Minute]) -> Result<ErrorSeries, EvaluationError> {
    if real.len() != predicted.len() {
        return Err(EvaluationError::LengthMismatch { real: real.len(), predicted: predicted.len() });
    }
    if real.is_empty() {
        return Err(EvaluationError::Empty);
    }
    if times.len() != real.len() {
        return Err(EvaluationError::TimesMismatch { states: real.len(), times: times.len() });
    }
    Ok(ErrorSeries {
        times: times.to_vec(),
        real_states: real.to_vec(),
        predicted_states: predicted.to_vec(),
        errors: real.iter().zip(predicted).map(|(&r, &p)| r as i64 - p as i64).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub steps: usize,
    pub error_count: usize,
    pub error_rate: f64,
    pub min_error: i64,
    pub max_error: i64,
    /// Natural-log `P(O | model)`.
    pub log_likelihood: f64,
    /// `log_likelihood` minus the log-likelihood under a uniform model with
    /// the same state and symbol sets.
    pub log_likelihood_ratio: f64,
    pub errors_within_unit_range: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Counts nonzero errors and attaches the forward log-likelihood of
/// `observations` under `model`.
pub fn summarize(
    series: &ErrorSeries,
    model: &HmmModel<f64>,
    observations: &[usize],
) -> Result<EvaluationReport, InferenceError> {
    let log_likelihood = model.forward_likelihood(observations)?;
    let baseline = model.uniform_like().forward_likelihood(observations)?;
    let error_count = series.error_count();
    let min_error = series.errors.iter().copied().min().unwrap_or(0);
    let max_error = series.errors.iter().copied().max().unwrap_or(0);
    Ok(EvaluationReport {
        steps: series.len(),
        error_count,
        error_rate: error_count as f64 / series.len().max(1) as f64,
        min_error,
        max_error,
        log_likelihood,
        log_likelihood_ratio: log_likelihood - baseline,
        errors_within_unit_range: min_error >= -1 && max_error <= 1,
        seed: None,
    })
}

/// Everything one simulated-and-decoded day produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub trace: SimulationTrace,
    pub decoded: StatePath<f64>,
    pub series: ErrorSeries,
    pub report: EvaluationReport,
}

/// simulate → decode the quantized observations → compare → summarize.
pub fn run_experiment(config: &SimulationConfig, decoder: Decoder) -> Result<Experiment, Error> {
    let trace = simulate(config)?;
    let decoded = config.model.decode(&trace.quantized_observations, decoder)?;
    let series = compare(&trace.hidden_states, &decoded.states, &trace.times)?;
    let mut report = summarize(&series, &config.model, &trace.quantized_observations)?;
    report.seed = Some(config.seed);
    Ok(Experiment { trace, decoded, series, report })
}

impl Experiment {
    /// Writes `figure2.csv`, `figure3.csv` and `figure4.csv` into `dir`.
    pub fn write_figures(&self, dir: &Path) -> Result<(), Error> {
        let file = |name: &str| {
            let p = dir.join(name);
            std::fs::File::create(&p).map_err(|e| Error::io(&p, e))
        };
        write_trace_csv(file("figure2.csv")?, &self.trace)?;
        let estimate = EstimateTable {
            labels: self.trace.state_labels.clone(),
            times: self.trace.times.clone(),
            states: self.decoded.states.clone(),
        };
        write_estimate_csv(file("figure3.csv")?, &estimate)?;
        write_error_csv(file("figure4.csv")?, &self.series)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub noise_sigma: f64,
    pub seeds: Vec<u64>,
    pub error_rates: Vec<f64>,
    pub median_error_rate: f64,
}

/// Runs the experiment once per seed, keeping everything else in `config`.
pub fn sweep(
    config: &SimulationConfig,
    seeds: impl IntoIterator<Item = u64>,
    decoder: Decoder,
) -> Result<(SweepSummary, Vec<EvaluationReport>), Error> {
    let mut reports = Vec::new();
    let mut seed_list = Vec::new();
    for seed in seeds {
        let mut c = config.clone();
        c.seed = seed;
        reports.push(run_experiment(&c, decoder)?.report);
        seed_list.push(seed);
    }
    let error_rates: Vec<f64> = reports.iter().map(|r| r.error_rate).collect();
    let summary = SweepSummary {
        noise_sigma: config.noise_sigma,
        seeds: seed_list,
        median_error_rate: median(&error_rates),
        error_rates,
    };
    Ok((summary, reports))
}

/// Median; mean of the two middle values for even counts, NaN when empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TraceRow {
    minute: Minute,
    hidden_state: usize,
    observation_real: f64,
    observation_symbol: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ErrorRow {
    minute: Minute,
    real_state: usize,
    predicted_state: usize,
    error: i64,
}

/// `minute,hidden_state,observation_real,observation_symbol`
pub fn write_trace_csv<W: Write>(w: W, trace: &SimulationTrace) -> Result<(), EvaluationError> {
    let mut out = csv::Writer::from_writer(w);
    for i in 0..trace.len() {
        out.serialize(TraceRow {
            minute: trace.times[i],
            hidden_state: trace.hidden_states[i],
            observation_real: trace.observations[i],
            observation_symbol: trace.quantized_observations[i],
        })?;
    }
    out.flush().map_err(|e| EvaluationError::Csv(e.to_string()))
}

/// Reads a trace CSV. Labels and step are not part of the file.
pub fn read_trace_csv<R: Read>(
    r: R,
    state_labels: Vec<String>,
    step_minutes: Minute,
) -> Result<SimulationTrace, EvaluationError> {
    let mut trace = SimulationTrace {
        times: Vec::new(),
        hidden_states: Vec::new(),
        observations: Vec::new(),
        quantized_observations: Vec::new(),
        step_minutes,
        state_labels,
    };
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: TraceRow = row?;
        trace.times.push(row.minute);
        trace.hidden_states.push(row.hidden_state);
        trace.observations.push(row.observation_real);
        trace.quantized_observations.push(row.observation_symbol);
    }
    Ok(trace)
}

/// `minute,real_state,predicted_state,error`
pub fn write_error_csv<W: Write>(w: W, series: &ErrorSeries) -> Result<(), EvaluationError> {
    let mut out = csv::Writer::from_writer(w);
    for i in 0..series.len() {
        out.serialize(ErrorRow {
            minute: series.times[i],
            real_state: series.real_states[i],
            predicted_state: series.predicted_states[i],
            error: series.errors[i],
        })?;
    }
    out.flush().map_err(|e| EvaluationError::Csv(e.to_string()))
}

pub fn read_error_csv<R: Read>(r: R) -> Result<ErrorSeries, EvaluationError> {
    let mut s = ErrorSeries { times: vec![], real_states: vec![], predicted_states: vec![], errors: vec![] };
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: ErrorRow = row?;
        s.times.push(row.minute);
        s.real_states.push(row.real_state);
        s.predicted_states.push(row.predicted_state);
        s.errors.push(row.error);
    }
    Ok(s)
}

/// Decoded state per minute, with one 0/1 indicator column per state label
/// (one curve per room).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimateTable {
    pub labels: Vec<String>,
    pub times: Vec<Minute>,
    pub states: Vec<usize>,
}

/// `minute,estimated_state,<label 0>,<label 1>,...`
pub fn write_estimate_csv<W: Write>(w: W, table: &EstimateTable) -> Result<(), EvaluationError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["minute".to_owned(), "estimated_state".to_owned()];
    header.extend(table.labels.iter().cloned());
    out.write_record(&header)?;
    for (&t, &s) in table.times.iter().zip(&table.states) {
        let mut rec = vec![t.to_string(), s.to_string()];
        rec.extend((0..table.labels.len()).map(|k| if k == s { "1" } else { "0" }.to_owned()));
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| EvaluationError::Csv(e.to_string()))
}

pub fn read_estimate_csv<R: Read>(r: R) -> Result<EstimateTable, EvaluationError> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.len() < 2 || &header[0] != "minute" || &header[1] != "estimated_state" {
        return Err(EvaluationError::Csv("expected header minute,estimated_state,...".into()));
    }
    let labels: Vec<String> = header.iter().skip(2).map(str::to_owned).collect();
    let mut table = EstimateTable { labels, times: vec![], states: vec![] };
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<usize, EvaluationError> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| EvaluationError::Csv(format!("row {}: bad column {i}", line + 1)))
        };
        let state = field(1)?;
        for k in 0..table.labels.len() {
            if field(k + 2)? != usize::from(k == state) {
                return Err(EvaluationError::Csv(format!("row {}: indicator columns disagree", line + 1)));
            }
        }
        table.times.push(field(0)? as Minute);
        table.states.push(state);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn compare_examples() {
        let s = compare(&[2, 1, 0], &[0, 1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(s.errors, vec![2, 0, -2]);
        let s = compare(&[1, 1], &[1, 1], &[0, 1]).unwrap();
        assert_eq!(s.error_count(), 0);
        assert_eq!(
            compare(&[1, 1], &[1], &[0, 1]).unwrap_err(),
            EvaluationError::LengthMismatch { real: 2, predicted: 1 }
        );
        assert_eq!(compare(&[], &[], &[]).unwrap_err(), EvaluationError::Empty);
    }

    #[test]
    fn nine_errors_in_three_hundred_steps_is_three_percent() {
        let real = vec![1usize; 300];
        let mut pred = real.clone();
        for i in 0..9 {
            pred[i * 30] = if i % 2 == 0 { 0 } else { 2 };
        }
        let times: Vec<Minute> = (420..720).collect();
        let s = compare(&real, &pred, &times).unwrap();
        let model = fixtures::reference_model();
        let r = summarize(&s, &model, &pred).unwrap();
        assert_eq!(r.error_count, 9);
        assert!((r.error_rate - 0.03).abs() < 1e-15);
        assert!(r.errors_within_unit_range);
        assert_eq!((r.min_error, r.max_error), (-1, 1));
    }

    #[test]
    fn zero_series_summary() {
        let model = fixtures::reference_model();
        let s = compare(&[0, 1, 1], &[0, 1, 1], &[0, 1, 2]).unwrap();
        let r = summarize(&s, &model, &[0, 1, 1]).unwrap();
        assert_eq!((r.error_count, r.error_rate), (0, 0.0));
        assert!(r.log_likelihood < 0.0);
    }

    #[test]
    fn noiseless_identity_run_has_no_errors() {
        let mut c = SimulationConfig::new(fixtures::home_hierarchy(), fixtures::reference_identity_model(), 11);
        c.noise_sigma = 0.0;
        for d in [Decoder::Viterbi, Decoder::Posterior] {
            let e = run_experiment(&c, d).unwrap();
            assert_eq!(e.report.error_rate, 0.0);
        }
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn estimate_csv_rejects_inconsistent_indicators() {
        let text = "minute,estimated_state,K,L\n420,0,0,1\n";
        assert!(read_estimate_csv(text.as_bytes()).is_err());
        let text = "minute,estimated_state,K,L\n420,1,0,1\n";
        let t = read_estimate_csv(text.as_bytes()).unwrap();
        assert_eq!(t.states, vec![1]);
    }

    #[test]
    fn report_json_shape() {
        let c = SimulationConfig::new(fixtures::home_hierarchy(), fixtures::reference_model(), 3);
        let r = run_experiment(&c, Decoder::Viterbi).unwrap().report;
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["steps", "error_count", "error_rate", "min_error", "max_error", "log_likelihood", "seed"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["steps"], 300);
        assert_eq!(v["seed"], 3);
    }
}
