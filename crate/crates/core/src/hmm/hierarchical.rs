use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::inference::{InferenceError, StatePath};
use super::model::{HmmModel, ModelError};
use crate::grammar::{HbralHierarchy, RoomType};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyModelError {
    #[error("root has {states} state(s) but {children} child model(s)")]
    ChildCount { states: usize, children: usize },
    #[error("symbol {symbol:?} belongs to both child {first} and child {second}")]
    SharedSymbol { symbol: String, first: usize, second: usize },
    #[error("room {room} hosts no activity")]
    EmptyRoom { room: RoomType },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Two-level model: a root chain over rooms, and one child chain per room
/// over that room's activities. Child alphabets are disjoint, so every
/// activity symbol identifies its room.
#[derive(Debug, Clone)]
pub struct HierarchicalModel<T: Scalar> {
    root: HmmModel<T>,
    children: Vec<HmmModel<T>>,
    owner: HashMap<String, (usize, usize)>,
}

/// Contiguous run of one room in the decoded room path, with the activity
/// path decoded inside it. `path.states` index the room's child model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivitySegment<T> {
    pub room: usize,
    pub start: usize,
    pub path: StatePath<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalPath<T> {
    pub rooms: StatePath<T>,
    pub segments: Vec<ActivitySegment<T>>,
}

impl<T: Scalar> HierarchicalModel<T> {
    pub fn new(root: HmmModel<T>, children: Vec<HmmModel<T>>) -> Result<Self, HierarchyModelError> {
        if children.len() != root.n_states() {
            return Err(HierarchyModelError::ChildCount { states: root.n_states(), children: children.len() });
        }
        let mut owner = HashMap::new();
        for (room, child) in children.iter().enumerate() {
            for (k, sym) in child.symbol_labels().iter().enumerate() {
                if let Some(&(first, _)) = owner.get(sym) {
                    return Err(HierarchyModelError::SharedSymbol { symbol: sym.clone(), first, second: room });
                }
                owner.insert(sym.clone(), (room, k));
            }
        }
        Ok(Self { root, children, owner })
    }

    /// Builds a model from a hierarchy: the root ranges over every room with
    /// activities, each child over its room's activities. Chains stay put
    /// with probability `stay` and each state emits its own symbol with
    /// probability `emit`; remaining mass is spread evenly.
    pub fn sticky_from_hierarchy(h: &HbralHierarchy, stay: T, emit: T) -> Result<Self, HierarchyModelError> {
        let rooms: Vec<&RoomType> = h.activities.keys().collect();
        let root = sticky(rooms.iter().map(|r| r.to_string()).collect(), stay, T::one())?;
        let children = rooms
            .iter()
            .map(|room| {
                let acts = h.activities_in(room);
                if acts.is_empty() {
                    return Err(HierarchyModelError::EmptyRoom { room: (*room).clone() });
                }
                Ok(sticky(acts.to_vec(), stay, emit)?)
            })
            .collect::<Result<_, _>>()?;
        Self::new(root, children)
    }

    pub fn root(&self) -> &HmmModel<T> {
        &self.root
    }

    pub fn children(&self) -> &[HmmModel<T>] {
        &self.children
    }

    pub fn child(&self, room: usize) -> &HmmModel<T> {
        &self.children[room]
    }

    /// `(room index, child symbol index)` owning an activity symbol.
    pub fn owner_of(&self, symbol: &str) -> Option<(usize, usize)> {
        self.owner.get(symbol).copied()
    }

    /// Decodes the room path, treating each observation's owning room as a
    /// noiseless room-level emission, then decodes activities inside every
    /// maximal same-room segment with that room's child model.
    pub fn decode<S: AsRef<str>>(&self, observations: &[S]) -> Result<HierarchicalPath<T>, InferenceError> {
        if observations.is_empty() {
            return Err(InferenceError::EmptySequence);
        }
        let owned: Vec<(usize, usize)> = observations
            .iter()
            .map(|o| self.owner_of(o.as_ref()).ok_or_else(|| InferenceError::UnknownSymbol(o.as_ref().to_owned())))
            .collect::<Result<_, _>>()?;
        let rooms = self.root.viterbi_with(owned.len(), |i, t| {
            if owned[t].0 == i {
                T::zero()
            } else {
                T::neg_infinity()
            }
        });

        let mut segments = Vec::new();
        let mut start = 0;
        while start < owned.len() {
            let room = rooms.states[start];
            let mut end = start + 1;
            while end < owned.len() && rooms.states[end] == room {
                end += 1;
            }
            let symbols: Vec<usize> = owned[start..end].iter().map(|&(_, k)| k).collect();
            let path = self.children[room].viterbi_decode(&symbols)?;
            segments.push(ActivitySegment { room, start, path });
            start = end;
        }
        Ok(HierarchicalPath { rooms, segments })
    }
}

fn sticky<T: Scalar>(labels: Vec<String>, stay: T, emit: T) -> Result<HmmModel<T>, ModelError> {
    let n = labels.len();
    let spread = |p: T| if n > 1 { (T::one() - p) / T::lit((n - 1) as f64) } else { T::zero() };
    let (stay, emit) = if n > 1 { (stay, emit) } else { (T::one(), T::one()) };
    let row = |p: T, i: usize| (0..n).map(|j| if i == j { p } else { spread(p) }).collect::<Vec<T>>();
    HmmModel::new(
        (0..n).map(|i| row(stay, i)).collect(),
        (0..n).map(|i| row(emit, i)).collect(),
        vec![T::one() / T::lit(n as f64); n],
        labels.clone(),
        labels,
    )
}
