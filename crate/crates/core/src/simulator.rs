//! Seeded day simulation: hidden room-scenario states from the model's
//! Markov chain, observed through an additive Gaussian channel
//! `O_n = Q_n + V_n`, then rounded and clamped to a symbol.
//!
//! One seed drives everything. Each consumer takes its own ChaCha8 stream
//! of that seed:
//!
//! | stream | consumer                          |
//! |--------|-----------------------------------|
//! | 0      | hidden states (same as `sample_path(len, seed)`) |
//! | 1      | observation noise `V_n`           |
//! | 2      | activity choice in [`trace_to_scenario`] |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{hhmm, HbralHierarchy, Minute, RoomType, Scenario, TimedEvent};
use crate::hmm::{HmmModel, InferenceError, ModelViolation};

pub const STREAM_STATES: u64 = 0;
pub const STREAM_NOISE: u64 = 1;
pub const STREAM_ACTIVITIES: u64 = 2;

/// Default observation noise standard deviation, in state-index units.
pub const DEFAULT_SIGMA: f64 = 0.5;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("config field {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("model is not stochastic: {0}")]
    InvalidModel(ModelViolation),
    #[error("state label {0:?} matches no room with activities in the hierarchy")]
    UnknownRoom(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

fn default_start() -> Minute {
    7 * 60
}
fn default_end() -> Minute {
    12 * 60
}
fn default_step() -> Minute {
    1
}
fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub hierarchy: HbralHierarchy,
    pub model: HmmModel<f64>,
    #[serde(with = "hhmm", default = "default_start")]
    pub start: Minute,
    #[serde(with = "hhmm", default = "default_end")]
    pub end: Minute,
    #[serde(default = "default_step")]
    pub step_minutes: Minute,
    #[serde(default = "default_sigma")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SimulationConfig {
    /// 7:00-12:00 at one-minute steps, sigma 0.5.
    pub fn new(hierarchy: HbralHierarchy, model: HmmModel<f64>, seed: u64) -> Self {
        Self {
            hierarchy,
            model,
            start: default_start(),
            end: default_end(),
            step_minutes: default_step(),
            noise_sigma: DEFAULT_SIGMA,
            seed,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SimulationError> {
        serde_json::from_str(text)
            .map_err(|e| SimulationError::InvalidField { field: "config", reason: e.to_string() })
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |field, reason: &str| Err(SimulationError::InvalidField { field, reason: reason.to_owned() });
        if self.end <= self.start {
            return bad("end", "must be after start");
        }
        if self.step_minutes == 0 {
            return bad("step_minutes", "must be at least 1");
        }
        if !(self.end - self.start).is_multiple_of(self.step_minutes) {
            return bad("step_minutes", "must divide end - start");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma", "must be finite and >= 0");
        }
        if let Some(v) = self.model.validate().violations.into_iter().next() {
            return Err(SimulationError::InvalidModel(v));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.end - self.start) / self.step_minutes) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub times: Vec<Minute>,
    pub hidden_states: Vec<usize>,
    pub observations: Vec<f64>,
    pub quantized_observations: Vec<usize>,
    pub step_minutes: Minute,
    pub state_labels: Vec<String>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Minute just after the last sample.
    pub fn end(&self) -> Minute {
        self.times.last().map_or(0, |&t| t + self.step_minutes)
    }
}

/// Rounds to the nearest state index and clamps into `[0, n_states - 1]`.
pub fn quantize(observation: f64, n_states: usize) -> usize {
    let top = (n_states - 1) as f64;
    observation.round().clamp(0.0, top) as usize
}

pub fn simulate(config: &SimulationConfig) -> Result<SimulationTrace, SimulationError> {
    config.validate()?;
    let n = config.steps();
    let mut state_rng = stream_rng(config.seed, STREAM_STATES);
    let (path, _) = config.model.sample_path_with(n, &mut state_rng)?;
    let mut noise_rng = stream_rng(config.seed, STREAM_NOISE);
    let observations: Vec<f64> = path
        .states
        .iter()
        .map(|&q| {
            let z: f64 = noise_rng.sample(StandardNormal);
            q as f64 + config.noise_sigma * z
        })
        .collect();
    let n_states = config.model.n_states();
    Ok(SimulationTrace {
        times: (0..n as Minute).map(|i| config.start + i * config.step_minutes).collect(),
        quantized_observations: observations.iter().map(|&o| quantize(o, n_states)).collect(),
        hidden_states: path.states,
        observations,
        step_minutes: config.step_minutes,
        state_labels: config.model.state_labels().to_vec(),
    })
}

/// Turns each maximal run of one hidden state into a timed event in that
/// state's room, with an activity drawn uniformly from the room and all of
/// that activity's objects.
pub fn trace_to_scenario(
    trace: &SimulationTrace,
    hierarchy: &HbralHierarchy,
    seed: u64,
) -> Result<Scenario, SimulationError> {
    let rooms: Vec<RoomType> = trace
        .state_labels
        .iter()
        .map(|label| {
            let room = RoomType::from(label.as_str());
            if hierarchy.activities_in(&room).is_empty() {
                Err(SimulationError::UnknownRoom(label.clone()))
            } else {
                Ok(room)
            }
        })
        .collect::<Result<_, _>>()?;
    let mut rng = stream_rng(seed, STREAM_ACTIVITIES);
    let mut events = Vec::new();
    let mut prev = None;
    for (i, &q) in trace.hidden_states.iter().enumerate() {
        if prev == Some(q) {
            continue;
        }
        prev = Some(q);
        let room = &rooms[q];
        let acts = hierarchy.activities_in(room);
        let activity = &acts[rng.random_range(0..acts.len())];
        events.push(TimedEvent::new(
            trace.times[i],
            room.clone(),
            activity,
            hierarchy.objects_of(activity).iter().cloned(),
        ));
    }
    let start = trace.times.first().copied().unwrap_or(0);
    Scenario::new(events, start, trace.end().max(start)).map_err(|e| SimulationError::InvalidField {
        field: "times",
        reason: e.to_string(),
    })
}
