//! Dwell-time abnormality rule: a room is abnormal when the time spent in it
//! strictly exceeds its Possible Delay Time, `usual + margin` (30 min default).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{format_hhmm, Minute, RoomType, Scenario, TimedEvent};

/// Default PDT margin in minutes.
pub const DEFAULT_MARGIN: Minute = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnomalyError {
    #[error("usual time for {room} is negative ({minutes} min)")]
    NegativeUsual { room: RoomType, minutes: i64 },
    #[error("usual time for {room} is too large ({minutes} min)")]
    UsualTooLarge { room: RoomType, minutes: i64 },
    #[error("no threshold for room {0}")]
    MissingThreshold(RoomType),
    #[error("event at {} arrives after {}", format_hhmm(*.time), format_hhmm(*.previous))]
    OutOfOrder { time: Minute, previous: Minute },
    #[error("thresholds JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdtThreshold {
    pub room: RoomType,
    pub usual_minutes: Minute,
    pub pdt_minutes: Minute,
}

/// Per-room usual times as read from configuration (may be malformed).
pub type UsualTimes = BTreeMap<RoomType, i64>;
pub type Thresholds = BTreeMap<RoomType, PdtThreshold>;

pub fn parse_usual_times(text: &str) -> Result<UsualTimes, AnomalyError> {
    serde_json::from_str(text).map_err(|e| AnomalyError::Json(e.to_string()))
}

/// `pdt = usual + 30` for every room.
pub fn compute_pdt(usual: &UsualTimes) -> Result<Thresholds, AnomalyError> {
    compute_pdt_with_margins(usual, &BTreeMap::new())
}

/// As [`compute_pdt`], overriding the 30-minute margin for selected rooms.
pub fn compute_pdt_with_margins(
    usual: &UsualTimes,
    margins: &BTreeMap<RoomType, Minute>,
) -> Result<Thresholds, AnomalyError> {
    usual
        .iter()
        .map(|(room, &minutes)| {
            if minutes < 0 {
                return Err(AnomalyError::NegativeUsual { room: room.clone(), minutes });
            }
            let margin = margins.get(room).copied().unwrap_or(DEFAULT_MARGIN);
            let usual_minutes = Minute::try_from(minutes)
                .ok()
                .filter(|u| u.checked_add(margin).is_some())
                .ok_or_else(|| AnomalyError::UsualTooLarge { room: room.clone(), minutes })?;
            let th = PdtThreshold { room: room.clone(), usual_minutes, pdt_minutes: usual_minutes + margin };
            Ok((room.clone(), th))
        })
        .collect()
}

/// Mean per-room dwell over baseline scenarios, rounded to the nearest
/// minute. A room absent from a scenario contributes 0 for it.
pub fn usual_from_baseline(baseline: &[Scenario]) -> UsualTimes {
    let mut totals: BTreeMap<RoomType, u64> = BTreeMap::new();
    for s in baseline {
        for (room, m) in s.accumulate_dwell() {
            *totals.entry(room).or_default() += u64::from(m);
        }
    }
    let n = baseline.len().max(1) as u64;
    totals.into_iter().map(|(room, t)| (room, ((t + n / 2) / n) as i64)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alert {
    pub room: RoomType,
    pub observed_minutes: Minute,
    pub threshold: PdtThreshold,
    pub message: String,
    pub timestamp: Minute,
}

impl Alert {
    fn new(room: &RoomType, observed_minutes: Minute, threshold: PdtThreshold, timestamp: Minute) -> Self {
        Self {
            room: room.clone(),
            observed_minutes,
            threshold,
            message: format!("alert abnormal activity {}", room.spoken()),
            timestamp,
        }
    }

    /// One JSON line: `{time, room, observed, pdt, message}`.
    pub fn to_json_line(&self) -> String {
        self.json_value().to_string()
    }

    pub fn json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "time": format_hhmm(self.timestamp),
            "room": self.room,
            "observed": self.observed_minutes,
            "pdt": self.threshold.pdt_minutes,
            "message": self.message,
        })
    }

    pub fn human_line(&self) -> String {
        format!(
            "{} {} (observed {} min > PDT {} min)",
            format_hhmm(self.timestamp),
            self.message,
            self.observed_minutes,
            self.threshold.pdt_minutes
        )
    }
}

/// Every room whose observed dwell strictly exceeds its PDT, in room order
/// (Kitchen, Bathroom, Bedroom, LivingRoom, then configured rooms). All
/// violating rooms are reported, not just the first.
pub fn detect(
    dwell: &BTreeMap<RoomType, Minute>,
    thresholds: &Thresholds,
    at: Minute,
) -> Result<Vec<Alert>, AnomalyError> {
    let mut alerts = Vec::new();
    for (room, &observed) in dwell {
        let th = thresholds.get(room).ok_or_else(|| AnomalyError::MissingThreshold(room.clone()))?;
        if observed > th.pdt_minutes {
            alerts.push(Alert::new(room, observed, th.clone(), at));
        }
    }
    Ok(alerts)
}

/// Online detector. Tracks the current stay and alerts once per stay at the
/// minute `entry + pdt`, as soon as the clock shows the stay running past it.
#[derive(Debug, Clone)]
pub struct StreamDetector {
    thresholds: Thresholds,
    current: Option<OpenStay>,
    last_time: Option<Minute>,
}

#[derive(Debug, Clone)]
struct OpenStay {
    room: RoomType,
    entry: Minute,
    alerted: bool,
}

impl StreamDetector {
    pub fn new(thresholds: Thresholds) -> Self {
        Self { thresholds, current: None, last_time: None }
    }

    fn check_time(&mut self, time: Minute) -> Result<(), AnomalyError> {
        if let Some(previous) = self.last_time {
            if time < previous {
                return Err(AnomalyError::OutOfOrder { time, previous });
            }
        }
        self.last_time = Some(time);
        Ok(())
    }

    fn poll(&mut self, now: Minute) -> Option<Alert> {
        let stay = self.current.as_mut()?;
        let th = self.thresholds[&stay.room].clone();
        let observed = now - stay.entry;
        if !stay.alerted && observed > th.pdt_minutes {
            stay.alerted = true;
            let at = stay.entry + th.pdt_minutes;
            return Some(Alert::new(&stay.room, observed, th, at));
        }
        None
    }

    /// Advances the clock without a new event.
    pub fn tick(&mut self, now: Minute) -> Result<Option<Alert>, AnomalyError> {
        self.check_time(now)?;
        Ok(self.poll(now))
    }

    /// Feeds the next event; a room change closes the current stay.
    pub fn push(&mut self, event: &TimedEvent) -> Result<Option<Alert>, AnomalyError> {
        if !self.thresholds.contains_key(&event.room) {
            return Err(AnomalyError::MissingThreshold(event.room.clone()));
        }
        self.check_time(event.time)?;
        let alert = self.poll(event.time);
        if self.current.as_ref().is_none_or(|s| s.room != event.room) {
            self.current = Some(OpenStay { room: event.room.clone(), entry: event.time, alerted: false });
        }
        Ok(alert)
    }

    /// Closes the open stay at `end`.
    pub fn finish(&mut self, end: Minute) -> Result<Option<Alert>, AnomalyError> {
        let alert = self.tick(end)?;
        self.current = None;
        Ok(alert)
    }
}

/// Runs [`StreamDetector`] over a whole scenario, closing at its end.
pub fn stream_detect(scenario: &Scenario, thresholds: &Thresholds) -> Result<Vec<Alert>, AnomalyError> {
    let mut det = StreamDetector::new(thresholds.clone());
    let mut alerts = Vec::new();
    for e in scenario.events() {
        alerts.extend(det.push(e)?);
    }
    alerts.extend(det.finish(scenario.end())?);
    Ok(alerts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn usual(pairs: &[(RoomType, i64)]) -> UsualTimes {
        pairs.iter().cloned().collect()
    }

    #[test]
    fn pdt_is_usual_plus_thirty() {
        let t = compute_pdt(&usual(&[(RoomType::Kitchen, 60)])).unwrap();
        assert_eq!(t[&RoomType::Kitchen].pdt_minutes, 90);
        let t = compute_pdt(&usual(&[(RoomType::Bathroom, 0)])).unwrap();
        assert_eq!(t[&RoomType::Bathroom].pdt_minutes, 30);
        let all = usual(&[
            (RoomType::Kitchen, 60),
            (RoomType::Bathroom, 20),
            (RoomType::Bedroom, 480),
            (RoomType::LivingRoom, 90),
        ]);
        let t = compute_pdt(&all).unwrap();
        assert_eq!(t.len(), 4);
        for (room, th) in &t {
            assert_eq!(i64::from(th.pdt_minutes), all[room] + 30);
        }
    }

    #[test]
    fn negative_usual_rejected() {
        let err = compute_pdt(&usual(&[(RoomType::Kitchen, -1)])).unwrap_err();
        assert_eq!(err, AnomalyError::NegativeUsual { room: RoomType::Kitchen, minutes: -1 });
    }

    #[test]
    fn margin_override() {
        let t = compute_pdt_with_margins(
            &usual(&[(RoomType::Kitchen, 60), (RoomType::Bathroom, 10)]),
            &BTreeMap::from([(RoomType::Bathroom, 5)]),
        )
        .unwrap();
        assert_eq!(t[&RoomType::Kitchen].pdt_minutes, 90);
        assert_eq!(t[&RoomType::Bathroom].pdt_minutes, 15);
    }

    #[test]
    fn strict_boundary_and_all_rooms() {
        let th = compute_pdt(&usual(&[(RoomType::Kitchen, 60), (RoomType::Bathroom, 30)])).unwrap();
        let one = detect(&BTreeMap::from([(RoomType::Kitchen, 95)]), &th, 0).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].message, "alert abnormal activity kitchen");
        assert!(detect(&BTreeMap::from([(RoomType::Kitchen, 90)]), &th, 0).unwrap().is_empty());
        let two = detect(&BTreeMap::from([(RoomType::Bathroom, 70), (RoomType::Kitchen, 95)]), &th, 0).unwrap();
        let rooms: Vec<_> = two.iter().map(|a| a.room.clone()).collect();
        assert_eq!(rooms, vec![RoomType::Kitchen, RoomType::Bathroom]);
    }

    #[test]
    fn missing_threshold_names_room() {
        let err = detect(&BTreeMap::from([(RoomType::Bedroom, 1)]), &Thresholds::new(), 0).unwrap_err();
        assert_eq!(err.to_string(), "no threshold for room Bedroom");
    }

    #[test]
    fn stream_alert_at_crossing_minute() {
        let th = compute_pdt(&usual(&[(RoomType::Kitchen, 60), (RoomType::Bedroom, 600)])).unwrap();
        let s = Scenario::new(
            vec![
                TimedEvent::new(0, RoomType::Kitchen, "eating", ["Table"]),
                TimedEvent::new(100, RoomType::Bedroom, "sleeping", ["Bed"]),
            ],
            0,
            110,
        )
        .unwrap();
        let alerts = stream_detect(&s, &th).unwrap();
        assert_eq!(alerts.len(), 1);
        assert_eq!(alerts[0].timestamp, 90);
        assert_eq!(alerts[0].room, RoomType::Kitchen);
    }

    #[test]
    fn stream_short_stay_and_repeated_stays() {
        let th = compute_pdt(&usual(&[(RoomType::Kitchen, 60), (RoomType::Bedroom, 600)])).unwrap();
        let short = Scenario::new(vec![TimedEvent::new(0, RoomType::Kitchen, "eating", ["Table"])], 0, 90).unwrap();
        assert!(stream_detect(&short, &th).unwrap().is_empty());

        let k = |t| TimedEvent::new(t, RoomType::Kitchen, "eating", ["Table"]);
        let twice = Scenario::new(
            vec![k(0), k(50), TimedEvent::new(100, RoomType::Bedroom, "sleeping", ["Bed"]), k(110)],
            0,
            220,
        )
        .unwrap();
        let alerts = stream_detect(&twice, &th).unwrap();
        let stamps: Vec<_> = alerts.iter().map(|a| a.timestamp).collect();
        assert_eq!(stamps, vec![90, 200]);
    }

    #[test]
    fn stream_rejects_out_of_order() {
        let th = compute_pdt(&usual(&[(RoomType::Kitchen, 60)])).unwrap();
        let mut det = StreamDetector::new(th);
        det.push(&TimedEvent::new(50, RoomType::Kitchen, "eating", ["Table"])).unwrap();
        let err = det.push(&TimedEvent::new(40, RoomType::Kitchen, "eating", ["Table"])).unwrap_err();
        assert_eq!(err, AnomalyError::OutOfOrder { time: 40, previous: 50 });
        assert_eq!(err.to_string(), "event at 00:40 arrives after 00:50");
    }

    #[test]
    fn tick_fires_once() {
        let th = compute_pdt(&usual(&[(RoomType::Kitchen, 0)])).unwrap();
        let mut det = StreamDetector::new(th);
        det.push(&TimedEvent::new(0, RoomType::Kitchen, "eating", ["Table"])).unwrap();
        assert!(det.tick(30).unwrap().is_none());
        assert_eq!(det.tick(31).unwrap().unwrap().timestamp, 30);
        assert!(det.tick(40).unwrap().is_none());
    }

    #[test]
    fn baseline_mean() {
        let k = |t| TimedEvent::new(t, RoomType::Kitchen, "eating", ["Table"]);
        let b = |t| TimedEvent::new(t, RoomType::Bedroom, "sleeping", ["Bed"]);
        let s1 = Scenario::new(vec![k(0), b(40)], 0, 100).unwrap();
        let s2 = Scenario::new(vec![k(0)], 0, 61).unwrap();
        let u = usual_from_baseline(&[s1, s2]);
        assert_eq!(u[&RoomType::Kitchen], 51); // (40 + 61) / 2 = 50.5
        assert_eq!(u[&RoomType::Bedroom], 30);
    }

    #[test]
    fn alert_lines() {
        let th = compute_pdt(&usual(&[(RoomType::LivingRoom, 60)])).unwrap();
        let a = &detect(&BTreeMap::from([(RoomType::LivingRoom, 95)]), &th, 720).unwrap()[0];
        assert_eq!(
            a.to_json_line(),
            r#"{"message":"alert abnormal activity living room","observed":95,"pdt":90,"room":"LivingRoom","time":"12:00"}"#
        );
        assert_eq!(a.human_line(), "12:00 alert abnormal activity living room (observed 95 min > PDT 90 min)");
    }
}
