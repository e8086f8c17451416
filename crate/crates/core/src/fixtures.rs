//! Shipped reference data: the room/activity/object table, the three-state
//! room-scenario model, the 7:00-12:00 example day and default usual times.
//!
//! The JSON sources are embedded at build time. [`FixtureSet::from_env`]
//! reads a replacement directory from `HBRAL_FIXTURES` instead.

use std::path::{Path, PathBuf};

use crate::anomaly::{parse_usual_times, UsualTimes};
use crate::grammar::{HbralHierarchy, Scenario};
use crate::hmm::HmmModel;
use crate::Error;

pub const HIERARCHY_JSON: &str = include_str!("../fixtures/hierarchy.json");
pub const MODEL_JSON: &str = include_str!("../fixtures/model.json");
pub const DAY_JSON: &str = include_str!("../fixtures/day.json");
pub const THRESHOLDS_JSON: &str = include_str!("../fixtures/thresholds.json");

pub const ENV_VAR: &str = "HBRAL_FIXTURES";

pub fn home_hierarchy() -> HbralHierarchy {
    HbralHierarchy::from_json(HIERARCHY_JSON).expect("embedded hierarchy parses")
}

/// Published `A` and `Π`; `B` completed with cyclic shifts of the published row.
pub fn reference_model() -> HmmModel<f64> {
    HmmModel::from_json(MODEL_JSON).expect("embedded model parses")
}

/// [`reference_model`] with `B = I`.
pub fn reference_identity_model() -> HmmModel<f64> {
    reference_model().with_identity_emission()
}

pub fn example_day() -> Scenario {
    Scenario::from_json(DAY_JSON).expect("embedded day parses")
}

pub fn usual_times() -> UsualTimes {
    parse_usual_times(THRESHOLDS_JSON).expect("embedded thresholds parse")
}

#[derive(Debug, Clone)]
pub struct FixtureSet {
    pub hierarchy: HbralHierarchy,
    pub model: HmmModel<f64>,
    pub day: Scenario,
    pub usual: UsualTimes,
}

impl FixtureSet {
    pub fn embedded() -> Self {
        Self { hierarchy: home_hierarchy(), model: reference_model(), day: example_day(), usual: usual_times() }
    }

    /// Loads `hierarchy.json`, `model.json`, `day.json` and `thresholds.json`.
    pub fn load_dir(dir: &Path) -> Result<Self, Error> {
        let read = |name: &str| {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
        };
        Ok(Self {
            hierarchy: HbralHierarchy::from_json(&read("hierarchy.json")?)?,
            model: HmmModel::from_json(&read("model.json")?)?,
            day: Scenario::from_json(&read("day.json")?)?,
            usual: parse_usual_times(&read("thresholds.json")?)?,
        })
    }

    pub fn from_env() -> Result<Self, Error> {
        match std::env::var_os(ENV_VAR) {
            Some(dir) => Self::load_dir(&PathBuf::from(dir)),
            None => Ok(Self::embedded()),
        }
    }
}
