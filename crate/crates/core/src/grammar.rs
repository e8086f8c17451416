//! The home-by-room activity hierarchy (home → room → activity → object),
//! timed scenarios over it, and per-room dwell accounting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ValidationReport;

/// Minutes since midnight.
pub type Minute = u32;

/// Room category. The four built-in kinds order first, in the order the
/// alerting rule inspects them; anything else comes from configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoomType {
    Kitchen,
    Bathroom,
    Bedroom,
    LivingRoom,
    Other(String),
}

impl RoomType {
    pub fn as_str(&self) -> &str {
        match self {
            RoomType::Kitchen => "Kitchen",
            RoomType::Bathroom => "Bathroom",
            RoomType::Bedroom => "Bedroom",
            RoomType::LivingRoom => "LivingRoom",
            RoomType::Other(s) => s,
        }
    }

    /// Lower-case spoken name, as used in alert messages.
    pub fn spoken(&self) -> String {
        match self {
            RoomType::LivingRoom => "living room".to_owned(),
            RoomType::Other(s) => s.clone(),
            other => other.as_str().to_lowercase(),
        }
    }
}

impl fmt::Display for RoomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&str> for RoomType {
    fn from(s: &str) -> Self {
        match s {
            "Kitchen" => RoomType::Kitchen,
            "Bathroom" => RoomType::Bathroom,
            "Bedroom" => RoomType::Bedroom,
            "LivingRoom" => RoomType::LivingRoom,
            other => RoomType::Other(other.to_owned()),
        }
    }
}

impl FromStr for RoomType {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(RoomType::from(s))
    }
}

impl Serialize for RoomType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RoomType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(RoomType::from(String::deserialize(d)?.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("invalid time {0:?}: expected 24-hour HH:MM")]
    BadTime(String),
    #[error("event {index} at {} precedes the previous event at {}", format_hhmm(*.time), format_hhmm(*.previous))]
    OutOfOrder { index: usize, time: Minute, previous: Minute },
    #[error("event {index} at {} lies outside the scenario window {}-{}", format_hhmm(*.time), format_hhmm(*.start), format_hhmm(*.end))]
    OutsideWindow { index: usize, time: Minute, start: Minute, end: Minute },
    #[error("scenario end {} precedes start {}", format_hhmm(*.end), format_hhmm(*.start))]
    EmptyWindow { start: Minute, end: Minute },
    #[error("{what} JSON: {message}")]
    Json { what: &'static str, message: String },
}

/// Parses `HH:MM` (24-hour) into minutes since midnight.
pub fn parse_hhmm(text: &str) -> Result<Minute, GrammarError> {
    let bad = || GrammarError::BadTime(text.to_owned());
    let (h, m) = text.split_once(':').ok_or_else(bad)?;
    if h.is_empty() || h.len() > 2 || m.len() != 2 {
        return Err(bad());
    }
    let h: u32 = h.parse().map_err(|_| bad())?;
    let m: u32 = m.parse().map_err(|_| bad())?;
    if h > 24 || m > 59 || (h == 24 && m != 0) {
        return Err(bad());
    }
    Ok(h * 60 + m)
}

pub fn format_hhmm(t: Minute) -> String {
    format!("{:02}:{:02}", t / 60, t % 60)
}

pub(crate) mod hhmm {
    use super::*;

    pub fn serialize<S: Serializer>(t: &Minute, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_hhmm(*t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Minute, D::Error> {
        let s = String::deserialize(d)?;
        parse_hhmm(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    #[serde(rename = "type")]
    pub room_type: RoomType,
    /// Metres; stored only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    pub objects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HierarchyViolation {
    DuplicateRoom { room: RoomType },
    NonPositiveDimension { room: RoomType, field: &'static str },
    UndeclaredRoom { room: RoomType },
    ActivityRoomCount { activity: String, rooms: Vec<RoomType> },
    NoObjects { activity: String },
    ObjectNotInRoom { activity: String, object: String, room: RoomType },
}

impl fmt::Display for HierarchyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HierarchyViolation::DuplicateRoom { room } => write!(f, "rooms: {room} declared more than once"),
            HierarchyViolation::NonPositiveDimension { room, field } => {
                write!(f, "rooms.{room}.{field}: dimension must be > 0")
            }
            HierarchyViolation::UndeclaredRoom { room } => {
                write!(f, "activities.{room}: room not declared in rooms")
            }
            HierarchyViolation::ActivityRoomCount { activity, rooms } => {
                let names: Vec<&str> = rooms.iter().map(RoomType::as_str).collect();
                write!(f, "activity {activity:?} in {} rooms [{}]", rooms.len(), names.join(", "))
            }
            HierarchyViolation::NoObjects { activity } => {
                write!(f, "activity_objects.{activity:?}: activity uses no object")
            }
            HierarchyViolation::ObjectNotInRoom { activity, object, room } => {
                write!(f, "activity_objects.{activity:?}: object {object:?} is not in room {room}")
            }
        }
    }
}

/// Rooms, the activities each room hosts, and the objects each activity uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbralHierarchy {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub rooms: Vec<RoomSpec>,
    pub activities: BTreeMap<RoomType, Vec<String>>,
    pub activity_objects: BTreeMap<String, Vec<String>>,
}

impl HbralHierarchy {
    pub fn from_json(text: &str) -> Result<Self, GrammarError> {
        serde_json::from_str(text).map_err(|e| GrammarError::Json { what: "hierarchy", message: e.to_string() })
    }

    pub fn room(&self, room: &RoomType) -> Option<&RoomSpec> {
        self.rooms.iter().find(|r| &r.room_type == room)
    }

    /// Room hosting `activity`; `None` when unassigned or (in an invalid
    /// hierarchy) ambiguous.
    pub fn room_of(&self, activity: &str) -> Option<&RoomType> {
        let mut hits = self.activities.iter().filter(|(_, acts)| acts.iter().any(|a| a == activity));
        match (hits.next(), hits.next()) {
            (Some((room, _)), None) => Some(room),
            _ => None,
        }
    }

    pub fn activities_in(&self, room: &RoomType) -> &[String] {
        self.activities.get(room).map_or(&[], Vec::as_slice)
    }

    pub fn objects_of(&self, activity: &str) -> &[String] {
        self.activity_objects.get(activity).map_or(&[], Vec::as_slice)
    }

    pub fn validate(&self) -> ValidationReport<HierarchyViolation> {
        let mut violations = Vec::new();
        let mut seen = BTreeSet::new();
        for r in &self.rooms {
            if !seen.insert(r.room_type.clone()) {
                violations.push(HierarchyViolation::DuplicateRoom { room: r.room_type.clone() });
            }
            for (field, v) in [("width", r.width), ("length", r.length), ("height", r.height)] {
                if matches!(v, Some(x) if x.is_nan() || x <= 0.0) {
                    violations.push(HierarchyViolation::NonPositiveDimension { room: r.room_type.clone(), field });
                }
            }
        }
        for room in self.activities.keys() {
            if self.room(room).is_none() {
                violations.push(HierarchyViolation::UndeclaredRoom { room: room.clone() });
            }
        }

        let mut owners: BTreeMap<&str, Vec<RoomType>> = BTreeMap::new();
        for (room, acts) in &self.activities {
            for a in acts {
                owners.entry(a.as_str()).or_default().push(room.clone());
            }
        }
        for a in self.activity_objects.keys() {
            owners.entry(a.as_str()).or_default();
        }
        for (activity, rooms) in &owners {
            if rooms.len() != 1 {
                violations.push(HierarchyViolation::ActivityRoomCount {
                    activity: (*activity).to_owned(),
                    rooms: rooms.clone(),
                });
                continue;
            }
            let room = &rooms[0];
            let objects = self.objects_of(activity);
            if objects.is_empty() {
                violations.push(HierarchyViolation::NoObjects { activity: (*activity).to_owned() });
            }
            let available = self.room(room).map_or(&[][..], |r| r.objects.as_slice());
            for o in objects {
                if !available.contains(o) {
                    violations.push(HierarchyViolation::ObjectNotInRoom {
                        activity: (*activity).to_owned(),
                        object: o.clone(),
                        room: room.clone(),
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// Checks every event of `scenario` against this hierarchy.
    pub fn validate_scenario(&self, scenario: &Scenario) -> ValidationReport<ScenarioViolation> {
        let mut violations = Vec::new();
        for (index, e) in scenario.events().iter().enumerate() {
            let mut push = |kind| violations.push(ScenarioViolation { index, time: e.time, kind });
            if e.activity.is_empty() {
                push(EventFault::LevelSkip("room without activity"));
                continue;
            }
            if e.objects.is_empty() {
                push(EventFault::LevelSkip("activity without object"));
            }
            match self.room_of(&e.activity) {
                None => push(EventFault::UnknownActivity { activity: e.activity.clone() }),
                Some(owner) if owner != &e.room => push(EventFault::WrongRoom {
                    activity: e.activity.clone(),
                    room: e.room.clone(),
                    expected: owner.clone(),
                }),
                Some(_) => {}
            }
            let allowed = self.objects_of(&e.activity);
            for o in &e.objects {
                if !allowed.contains(o) {
                    push(EventFault::ObjectNotUsed { activity: e.activity.clone(), object: o.clone() });
                }
            }
        }
        ValidationReport { violations }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventFault {
    LevelSkip(&'static str),
    UnknownActivity { activity: String },
    WrongRoom { activity: String, room: RoomType, expected: RoomType },
    ObjectNotUsed { activity: String, object: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioViolation {
    pub index: usize,
    pub time: Minute,
    pub kind: EventFault,
}

impl fmt::Display for ScenarioViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "events[{}] ({}): ", self.index, format_hhmm(self.time))?;
        match &self.kind {
            EventFault::LevelSkip(what) => write!(f, "level skip: {what}"),
            EventFault::UnknownActivity { activity } => write!(f, "unknown activity {activity:?}"),
            EventFault::WrongRoom { activity, room, expected } => {
                write!(f, "activity {activity:?} cannot happen in {room} (belongs to {expected})")
            }
            EventFault::ObjectNotUsed { activity, object } => {
                write!(f, "object {object:?} is not used by activity {activity:?}")
            }
        }
    }
}

/// One observed (room, activity, objects) triple. Objects are used jointly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedEvent {
    #[serde(with = "hhmm")]
    pub time: Minute,
    pub room: RoomType,
    pub activity: String,
    pub objects: BTreeSet<String>,
}

impl TimedEvent {
    pub fn new<I, S>(time: Minute, room: RoomType, activity: &str, objects: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            time,
            room,
            activity: activity.to_owned(),
            objects: objects.into_iter().map(Into::into).collect(),
        }
    }
}

/// A time-ordered event list within a `[start, end]` window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    events: Vec<TimedEvent>,
    start: Minute,
    end: Minute,
}

impl Scenario {
    pub fn new(events: Vec<TimedEvent>, start: Minute, end: Minute) -> Result<Self, GrammarError> {
        if end < start {
            return Err(GrammarError::EmptyWindow { start, end });
        }
        let mut previous = start;
        for (index, e) in events.iter().enumerate() {
            if e.time < start || e.time > end {
                return Err(GrammarError::OutsideWindow { index, time: e.time, start, end });
            }
            if e.time < previous {
                return Err(GrammarError::OutOfOrder { index, time: e.time, previous });
            }
            previous = e.time;
        }
        Ok(Self { events, start, end })
    }

    pub fn empty(start: Minute, end: Minute) -> Result<Self, GrammarError> {
        Self::new(Vec::new(), start, end)
    }

    pub fn events(&self) -> &[TimedEvent] {
        &self.events
    }

    pub fn start(&self) -> Minute {
        self.start
    }

    pub fn end(&self) -> Minute {
        self.end
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Accepts either a bare event list (window = first..last event) or an
    /// object `{start, end, events}` with `HH:MM` bounds.
    pub fn from_json(text: &str) -> Result<Self, GrammarError> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| GrammarError::Json { what: "scenario", message: e.to_string() })?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioFile::Window { start: self.start, end: self.end, events: self.events.clone() };
        serde_json::to_string_pretty(&file).expect("scenario serializes")
    }

    /// Partitions events by room, preserving order. Each part keeps the
    /// original window; rooms without events are absent.
    pub fn split_by_room(&self) -> BTreeMap<RoomType, Scenario> {
        let mut parts: BTreeMap<RoomType, Vec<TimedEvent>> = BTreeMap::new();
        for e in &self.events {
            parts.entry(e.room.clone()).or_default().push(e.clone());
        }
        parts
            .into_iter()
            .map(|(room, events)| (room, Scenario { events, start: self.start, end: self.end }))
            .collect()
    }

    /// Maximal same-room runs. A stay lasts until the next room change, the
    /// last one until the scenario end.
    pub fn stays(&self) -> Vec<Stay> {
        let mut out: Vec<Stay> = Vec::new();
        for e in &self.events {
            match out.last_mut() {
                Some(s) if s.room == e.room => {}
                Some(s) => {
                    s.exit = e.time;
                    out.push(Stay { room: e.room.clone(), entry: e.time, exit: e.time });
                }
                None => out.push(Stay { room: e.room.clone(), entry: e.time, exit: e.time }),
            }
        }
        if let Some(s) = out.last_mut() {
            s.exit = self.end;
        }
        out
    }

    /// Observed minutes per room; rooms never visited are absent (zero).
    /// The values sum to `end - first event time`.
    pub fn accumulate_dwell(&self) -> BTreeMap<RoomType, Minute> {
        let mut dwell = BTreeMap::new();
        for s in self.stays() {
            *dwell.entry(s.room).or_insert(0) += s.minutes();
        }
        dwell
    }
}

/// One continuous presence in a room.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stay {
    pub room: RoomType,
    pub entry: Minute,
    pub exit: Minute,
}

impl Stay {
    pub fn minutes(&self) -> Minute {
        self.exit - self.entry
    }
}

/// Usual vs. newly observed time for one room.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DwellRecord {
    pub room: RoomType,
    pub usual_minutes: Minute,
    pub observed_minutes: Minute,
}

/// Joins usual and observed dwell maps; a room missing from either side counts as 0.
pub fn dwell_records(usual: &BTreeMap<RoomType, Minute>, observed: &BTreeMap<RoomType, Minute>) -> Vec<DwellRecord> {
    let rooms: BTreeSet<&RoomType> = usual.keys().chain(observed.keys()).collect();
    rooms
        .into_iter()
        .map(|room| DwellRecord {
            room: room.clone(),
            usual_minutes: usual.get(room).copied().unwrap_or(0),
            observed_minutes: observed.get(room).copied().unwrap_or(0),
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScenarioFile {
    Window {
        #[serde(with = "hhmm")]
        start: Minute,
        #[serde(with = "hhmm")]
        end: Minute,
        events: Vec<TimedEvent>,
    },
    Events(Vec<TimedEvent>),
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = GrammarError;

    fn try_from(f: ScenarioFile) -> Result<Self, Self::Error> {
        match f {
            ScenarioFile::Window { start, end, events } => Scenario::new(events, start, end),
            ScenarioFile::Events(events) => {
                let start = events.first().map_or(0, |e| e.time);
                let end = events.iter().map(|e| e.time).max().unwrap_or(start);
                Scenario::new(events, start, end)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ev(t: &str, room: RoomType, activity: &str, objects: &[&str]) -> TimedEvent {
        TimedEvent::new(parse_hhmm(t).unwrap(), room, activity, objects.iter().copied())
    }

    #[test]
    fn hhmm_parsing() {
        assert_eq!(parse_hhmm("07:00").unwrap(), 420);
        assert_eq!(parse_hhmm("11:45").unwrap(), 705);
        assert_eq!(parse_hhmm("7:10").unwrap(), 430);
        assert_eq!(parse_hhmm("24:00").unwrap(), 1440);
        for bad in ["", "7", "07:60", "25:00", "ab:cd", "07:5", "24:01"] {
            assert!(parse_hhmm(bad).is_err(), "{bad}");
        }
        assert_eq!(format_hhmm(705), "11:45");
    }

    #[test]
    fn room_type_order_and_names() {
        let mut v = vec![RoomType::LivingRoom, RoomType::from("Garage"), RoomType::Bedroom, RoomType::Kitchen, RoomType::Bathroom];
        v.sort();
        assert_eq!(
            v,
            vec![RoomType::Kitchen, RoomType::Bathroom, RoomType::Bedroom, RoomType::LivingRoom, RoomType::from("Garage")]
        );
        assert_eq!(RoomType::LivingRoom.spoken(), "living room");
        assert_eq!(RoomType::Kitchen.spoken(), "kitchen");
        assert_eq!(RoomType::from("kitchen"), RoomType::Other("kitchen".into()));
    }

    #[test]
    fn table_one_hierarchy_is_valid() {
        let h = fixtures::home_hierarchy();
        let r = h.validate();
        assert!(r.is_valid(), "{:?}", r.violations);
        assert_eq!(h.room_of("preparing a meal"), Some(&RoomType::Kitchen));
        assert_eq!(h.room_of("toileting"), Some(&RoomType::Bathroom));
    }

    #[test]
    fn activity_in_two_rooms_is_reported() {
        let mut h = fixtures::home_hierarchy();
        h.activities.get_mut(&RoomType::Kitchen).unwrap().push("sleeping".into());
        let v = h.validate().violations;
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("in 2 rooms"), "{}", v[0]);
        assert_eq!(h.room_of("sleeping"), None);
    }

    #[test]
    fn object_from_another_room_is_reported() {
        let mut h = fixtures::home_hierarchy();
        h.activity_objects.get_mut("washing").unwrap().push("Bath".into());
        assert_eq!(
            h.validate().violations,
            vec![HierarchyViolation::ObjectNotInRoom {
                activity: "washing".into(),
                object: "Bath".into(),
                room: RoomType::Kitchen,
            }]
        );
    }

    #[test]
    fn structural_hierarchy_faults() {
        let mut h = fixtures::home_hierarchy();
        h.rooms[0].width = Some(0.0);
        let dup = h.rooms[1].clone();
        h.rooms.push(dup);
        h.activities.insert(RoomType::from("Attic"), vec![]);
        h.activity_objects.insert("juggling".into(), vec![]);
        let v = h.validate().violations;
        assert!(v.iter().any(|x| matches!(x, HierarchyViolation::NonPositiveDimension { field: "width", .. })));
        assert!(v.iter().any(|x| matches!(x, HierarchyViolation::DuplicateRoom { .. })));
        assert!(v.iter().any(|x| matches!(x, HierarchyViolation::UndeclaredRoom { .. })));
        assert!(v.iter().any(|x| matches!(x, HierarchyViolation::ActivityRoomCount { rooms, .. } if rooms.is_empty())));
    }

    #[test]
    fn scenario_validation() {
        let h = fixtures::home_hierarchy();
        let ok = Scenario::new(vec![ev("08:00", RoomType::Kitchen, "preparing a meal", &["Stove", "Refrigerator"])], 420, 720).unwrap();
        assert!(h.validate_scenario(&ok).is_valid());

        let bad = Scenario::new(
            vec![
                ev("08:00", RoomType::Bedroom, "preparing a meal", &["Stove"]),
                ev("08:10", RoomType::Kitchen, "eating", &[]),
                ev("08:20", RoomType::Kitchen, "washing", &["Bed"]),
                ev("08:30", RoomType::Kitchen, "", &[]),
            ],
            420,
            720,
        )
        .unwrap();
        let v = h.validate_scenario(&bad).violations;
        assert_eq!(v.len(), 4);
        assert!(matches!(v[0].kind, EventFault::WrongRoom { .. }));
        assert_eq!(v[1].to_string(), "events[1] (08:10): level skip: activity without object");
        assert!(matches!(v[2].kind, EventFault::ObjectNotUsed { .. }));
        assert!(matches!(v[3].kind, EventFault::LevelSkip("room without activity")));
    }

    #[test]
    fn scenario_construction_errors() {
        let e = |t| TimedEvent::new(t, RoomType::Kitchen, "eating", ["Table"]);
        assert!(matches!(Scenario::new(vec![e(10), e(5)], 0, 20), Err(GrammarError::OutOfOrder { index: 1, .. })));
        assert!(matches!(Scenario::new(vec![e(30)], 0, 20), Err(GrammarError::OutsideWindow { .. })));
        assert!(matches!(Scenario::new(vec![], 20, 10), Err(GrammarError::EmptyWindow { .. })));
        assert!(Scenario::new(vec![e(10), e(10)], 0, 20).is_ok());
    }

    #[test]
    fn dwell_interval_arithmetic() {
        let s = Scenario::new(
            vec![
                TimedEvent::new(0, RoomType::Kitchen, "eating", ["Table"]),
                TimedEvent::new(60, RoomType::Bedroom, "sleeping", ["Bed"]),
            ],
            0,
            90,
        )
        .unwrap();
        let d = s.accumulate_dwell();
        assert_eq!(d[&RoomType::Kitchen], 60);
        assert_eq!(d[&RoomType::Bedroom], 30);

        let one = Scenario::new(vec![TimedEvent::new(0, RoomType::Bedroom, "sleeping", ["Bed"])], 0, 300).unwrap();
        assert_eq!(one.accumulate_dwell()[&RoomType::Bedroom], 300);
        assert!(Scenario::empty(0, 300).unwrap().accumulate_dwell().is_empty());
    }

    #[test]
    fn example_day_dwell() {
        let day = fixtures::example_day();
        let d = day.accumulate_dwell();
        // 7:00-7:10 + 11:45-12:00, 7:10-8:00, 8:00-9:15 + 11:00-11:45, 9:15-11:00
        assert_eq!(d[&RoomType::Bedroom], 25);
        assert_eq!(d[&RoomType::Bathroom], 50);
        assert_eq!(d[&RoomType::Kitchen], 120);
        assert_eq!(d[&RoomType::LivingRoom], 105);
        assert_eq!(d.values().sum::<Minute>(), 300);
    }

    #[test]
    fn split_edge_cases() {
        assert!(Scenario::empty(0, 10).unwrap().split_by_room().is_empty());
        let s = Scenario::new(
            vec![
                TimedEvent::new(0, RoomType::Kitchen, "eating", ["Table"]),
                TimedEvent::new(5, RoomType::Kitchen, "washing", ["Dishwasher"]),
            ],
            0,
            10,
        )
        .unwrap();
        let parts = s.split_by_room();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[&RoomType::Kitchen], s);
    }

    #[test]
    fn scenario_json_forms() {
        let list = r#"[{"time":"07:00","room":"Bedroom","activity":"sleeping","objects":["Bed"]},
                       {"time":"07:30","room":"Kitchen","activity":"eating","objects":["Table"]}]"#;
        let s = Scenario::from_json(list).unwrap();
        assert_eq!((s.start(), s.end()), (420, 450));
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        let err = Scenario::from_json(r#"[{"time":"7h","room":"Bedroom","activity":"x","objects":[]}]"#).unwrap_err();
        assert!(matches!(err, GrammarError::Json { .. }));
    }

    #[test]
    fn dwell_records_join() {
        let usual = BTreeMap::from([(RoomType::Kitchen, 60)]);
        let obs = BTreeMap::from([(RoomType::Bedroom, 10)]);
        let r = dwell_records(&usual, &obs);
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], DwellRecord { room: RoomType::Kitchen, usual_minutes: 60, observed_minutes: 0 });
    }
}
