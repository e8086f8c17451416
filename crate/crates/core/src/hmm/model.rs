use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{safe_ln, Scalar};
use crate::ValidationReport;

/// Which model parameter a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Transition,
    Emission,
    Initial,
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Param::Transition => "transition",
            Param::Emission => "emission",
            Param::Initial => "initial",
        })
    }
}

/// A single stochasticity violation, located to the row (and column) at fault.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelViolation {
    RowSum { param: Param, row: usize, sum: f64 },
    EntryOutOfRange { param: Param, row: usize, col: usize, value: f64 },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelViolation::RowSum { param, row, sum } => {
                write!(f, "{param} row {row} sums to {sum}")
            }
            ModelViolation::EntryOutOfRange { param, row, col, value } => {
                write!(f, "{param} row {row} column {col} = {value} is outside [0, 1]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model needs at least one state and one symbol")]
    Empty,
    #[error("{param} has {found} row(s), expected {expected}")]
    RowCount { param: Param, found: usize, expected: usize },
    #[error("{param} row {row} has {found} column(s), expected {expected}")]
    ColumnCount { param: Param, row: usize, found: usize, expected: usize },
    #[error("{what} has {found} label(s), expected {expected}")]
    LabelCount { what: &'static str, found: usize, expected: usize },
    #[error("declared {what} = {declared} but parameters imply {actual}")]
    DeclaredSize { what: &'static str, declared: usize, actual: usize },
    #[error("{0}")]
    NotStochastic(ModelViolation),
    #[error("model JSON: {0}")]
    Json(String),
}

fn row_violations<T: Scalar>(param: Param, row: usize, entries: &[T]) -> Vec<ModelViolation> {
    let mut out = Vec::new();
    for (col, &p) in entries.iter().enumerate() {
        if !(p >= T::zero() && p <= T::one()) {
            out.push(ModelViolation::EntryOutOfRange { param, row, col, value: p.as_f64() });
        }
    }
    let sum = entries.iter().fold(T::zero(), |a, &b| a + b);
    let off = (sum - T::one()).abs();
    if off.is_nan() || off > T::row_tolerance() {
        out.push(ModelViolation::RowSum { param, row, sum: sum.as_f64() });
    }
    out
}

/// A probability distribution over a finite set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StochasticVector<T>(Vec<T>);

impl<T: Scalar> StochasticVector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self, ModelError> {
        if let Some(v) = row_violations(Param::Initial, 0, &entries).into_iter().next() {
            return Err(ModelError::NotStochastic(v));
        }
        Ok(Self(entries))
    }

    /// Wraps entries without checking that they form a distribution.
    pub fn new_unchecked(entries: Vec<T>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> T {
        self.0.iter().fold(T::zero(), |a, &b| a + b)
    }

    /// Index of the largest entry, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> std::ops::Index<usize> for StochasticVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// A rectangular matrix whose rows are meant to be distributions.
///
/// Construction only enforces the shape; row stochasticity is checked by
/// [`StochasticMatrix::violations`] so that malformed inputs can be reported
/// rather than rejected outright.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix<T> {
    rows: Vec<StochasticVector<T>>,
    n_cols: usize,
}

impl<T: Scalar> StochasticMatrix<T> {
    pub fn from_rows(param: Param, rows: Vec<Vec<T>>) -> Result<Self, ModelError> {
        let n_cols = rows.first().map_or(0, Vec::len);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return Err(ModelError::ColumnCount { param, row, found: r.len(), expected: n_cols });
            }
        }
        Ok(Self { rows: rows.into_iter().map(StochasticVector).collect(), n_cols })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        Self::from_rows(Param::Transition, rows).expect("square by construction")
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &StochasticVector<T> {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i].0[j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &StochasticVector<T>> {
        self.rows.iter()
    }

    pub fn violations(&self, param: Param) -> Vec<ModelViolation> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| row_violations(param, i, &r.0))
            .collect()
    }

    fn to_nested(&self) -> Vec<Vec<T>> {
        self.rows.iter().map(|r| r.0.clone()).collect()
    }

    fn log_flat(&self) -> Vec<T> {
        self.rows.iter().flat_map(|r| r.0.iter().map(|&p| safe_ln(p))).collect()
    }
}

/// A discrete hidden Markov model `(A, B, Π)` with labelled states and symbols.
///
/// Log-space copies of the parameters are cached at construction; the model is
/// immutable afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ModelFile<T>",
    into = "ModelFile<T>",
    bound(
        serialize = "T: Scalar + Serialize",
        deserialize = "T: Scalar + Deserialize<'de>"
    )
)]
pub struct HmmModel<T: Scalar> {
    transition: StochasticMatrix<T>,
    emission: StochasticMatrix<T>,
    initial: StochasticVector<T>,
    state_labels: Vec<String>,
    symbol_labels: Vec<String>,
    pub(crate) log_transition: Vec<T>,
    pub(crate) log_emission: Vec<T>,
    pub(crate) log_initial: Vec<T>,
}

impl<T: Scalar> HmmModel<T> {
    /// Builds a model, rejecting both shape errors and non-stochastic rows.
    pub fn new(
        transition: Vec<Vec<T>>,
        emission: Vec<Vec<T>>,
        initial: Vec<T>,
        state_labels: Vec<String>,
        symbol_labels: Vec<String>,
    ) -> Result<Self, ModelError> {
        let model = Self::from_parts(transition, emission, initial, state_labels, symbol_labels)?;
        match model.validate().violations.into_iter().next() {
            Some(v) => Err(ModelError::NotStochastic(v)),
            None => Ok(model),
        }
    }

    /// Builds a model checking only dimensions. Use [`HmmModel::validate`]
    /// before running inference on the result.
    pub fn from_parts(
        transition: Vec<Vec<T>>,
        emission: Vec<Vec<T>>,
        initial: Vec<T>,
        state_labels: Vec<String>,
        symbol_labels: Vec<String>,
    ) -> Result<Self, ModelError> {
        let n = initial.len();
        if n == 0 {
            return Err(ModelError::Empty);
        }
        let transition = StochasticMatrix::from_rows(Param::Transition, transition)?;
        let emission = StochasticMatrix::from_rows(Param::Emission, emission)?;
        if transition.n_rows() != n {
            return Err(ModelError::RowCount {
                param: Param::Transition,
                found: transition.n_rows(),
                expected: n,
            });
        }
        if transition.n_cols() != n {
            return Err(ModelError::ColumnCount {
                param: Param::Transition,
                row: 0,
                found: transition.n_cols(),
                expected: n,
            });
        }
        if emission.n_rows() != n {
            return Err(ModelError::RowCount {
                param: Param::Emission,
                found: emission.n_rows(),
                expected: n,
            });
        }
        if emission.n_cols() == 0 {
            return Err(ModelError::Empty);
        }
        if state_labels.len() != n {
            return Err(ModelError::LabelCount {
                what: "state_labels",
                found: state_labels.len(),
                expected: n,
            });
        }
        if symbol_labels.len() != emission.n_cols() {
            return Err(ModelError::LabelCount {
                what: "symbol_labels",
                found: symbol_labels.len(),
                expected: emission.n_cols(),
            });
        }
        let log_transition = transition.log_flat();
        let log_emission = emission.log_flat();
        let log_initial = initial.iter().map(|&p| safe_ln(p)).collect();
        Ok(Self {
            transition,
            emission,
            initial: StochasticVector(initial),
            state_labels,
            symbol_labels,
            log_transition,
            log_emission,
            log_initial,
        })
    }

    /// Labels default to `s0..`, `o0..`.
    pub fn unlabeled(
        transition: Vec<Vec<T>>,
        emission: Vec<Vec<T>>,
        initial: Vec<T>,
    ) -> Result<Self, ModelError> {
        let n = initial.len();
        let m = emission.first().map_or(0, Vec::len);
        Self::new(
            transition,
            emission,
            initial,
            (0..n).map(|i| format!("s{i}")).collect(),
            (0..m).map(|k| format!("o{k}")).collect(),
        )
    }

    /// Checks every row of `A`, `B` and `Π` without modifying the model.
    pub fn validate(&self) -> ValidationReport<ModelViolation> {
        let mut violations = self.transition.violations(Param::Transition);
        violations.extend(self.emission.violations(Param::Emission));
        violations.extend(row_violations(Param::Initial, 0, &self.initial.0));
        ValidationReport { violations }
    }

    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.emission.n_cols()
    }

    pub fn transition(&self) -> &StochasticMatrix<T> {
        &self.transition
    }

    pub fn emission(&self) -> &StochasticMatrix<T> {
        &self.emission
    }

    pub fn initial(&self) -> &StochasticVector<T> {
        &self.initial
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn symbol_labels(&self) -> &[String] {
        &self.symbol_labels
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.state_labels.iter().position(|l| l == label)
    }

    pub fn symbol_index(&self, label: &str) -> Option<usize> {
        self.symbol_labels.iter().position(|l| l == label)
    }

    /// Same transitions and initial distribution, with `B = I`.
    pub fn with_identity_emission(&self) -> Self {
        let n = self.n_states();
        let eye = StochasticMatrix::<T>::identity(n);
        Self::from_parts(
            self.transition.to_nested(),
            eye.to_nested(),
            self.initial.0.clone(),
            self.state_labels.clone(),
            self.state_labels.clone(),
        )
        .expect("dimensions unchanged")
    }

    /// Uniform `A`, `B` and `Π` over the same label sets.
    pub fn uniform_like(&self) -> Self {
        let n = self.n_states();
        let m = self.n_symbols();
        let pn = T::one() / T::lit(n as f64);
        let pm = T::one() / T::lit(m as f64);
        Self::from_parts(
            vec![vec![pn; n]; n],
            vec![vec![pm; m]; n],
            vec![pn; n],
            self.state_labels.clone(),
            self.symbol_labels.clone(),
        )
        .expect("dimensions consistent")
    }

    #[inline]
    pub(crate) fn log_a(&self, i: usize, j: usize) -> T {
        self.log_transition[i * self.n_states() + j]
    }

    #[inline]
    pub(crate) fn log_b(&self, i: usize, k: usize) -> T {
        self.log_emission[i * self.n_symbols() + k]
    }

    /// Parses the JSON model format, rejecting non-stochastic rows.
    pub fn from_json(text: &str) -> Result<Self, ModelError>
    where
        T: for<'de> Deserialize<'de>,
    {
        let file: ModelFile<T> = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        Self::try_from(file)
    }

    /// Parses the JSON model format checking dimensions only, so that
    /// stochasticity problems can be reported through [`HmmModel::validate`].
    pub fn from_json_unvalidated(text: &str) -> Result<Self, ModelError>
    where
        T: for<'de> Deserialize<'de>,
    {
        let file: ModelFile<T> = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        file.into_model()
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(&ModelFile::from(self.clone())).expect("model serializes")
    }
}

/// On-disk model document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile<T> {
    pub n_states: usize,
    pub n_symbols: usize,
    pub state_labels: Vec<String>,
    pub symbol_labels: Vec<String>,
    pub transition: Vec<Vec<T>>,
    pub emission: Vec<Vec<T>>,
    pub initial: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<T: Scalar> ModelFile<T> {
    fn into_model(self) -> Result<HmmModel<T>, ModelError> {
        if self.initial.len() != self.n_states {
            return Err(ModelError::DeclaredSize {
                what: "n_states",
                declared: self.n_states,
                actual: self.initial.len(),
            });
        }
        let m = self.emission.first().map_or(0, Vec::len);
        if m != self.n_symbols {
            return Err(ModelError::DeclaredSize { what: "n_symbols", declared: self.n_symbols, actual: m });
        }
        HmmModel::from_parts(
            self.transition,
            self.emission,
            self.initial,
            self.state_labels,
            self.symbol_labels,
        )
    }
}

impl<T: Scalar> TryFrom<ModelFile<T>> for HmmModel<T> {
    type Error = ModelError;

    fn try_from(file: ModelFile<T>) -> Result<Self, Self::Error> {
        let model = file.into_model()?;
        match model.validate().violations.into_iter().next() {
            Some(v) => Err(ModelError::NotStochastic(v)),
            None => Ok(model),
        }
    }
}

impl<T: Scalar> From<HmmModel<T>> for ModelFile<T> {
    fn from(m: HmmModel<T>) -> Self {
        ModelFile {
            n_states: m.n_states(),
            n_symbols: m.n_symbols(),
            transition: m.transition.to_nested(),
            emission: m.emission.to_nested(),
            initial: m.initial.0,
            state_labels: m.state_labels,
            symbol_labels: m.symbol_labels,
            note: None,
        }
    }
}
