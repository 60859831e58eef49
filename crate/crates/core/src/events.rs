//! Gait events (Zeni), threshold stance detection and the stance-phase timeline.

use std::fmt;

use crate::anthro::Side;
use crate::error::{Error, Result};
use crate::ingest::MarkerTrajectorySet;
use crate::signal::{lowpass, UniformSeries};

pub const DEFAULT_MIN_PERIOD_S: f64 = 0.4;
pub const DEFAULT_STANCE_THRESHOLD_M: f64 = 0.06;

/// Heel strikes and toe-offs of one foot, as sorted frame indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FootEvents {
    pub heel_strikes: Vec<usize>,
    pub toe_offs: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventType {
    HeelStrike,
    ToeOff,
}

impl EventType {
    pub fn tag(self) -> &'static str {
        match self {
            EventType::HeelStrike => "HS",
            EventType::ToeOff => "TO",
        }
    }
}

impl FootEvents {
    /// All events in time order.
    pub fn sequence(&self) -> Vec<(usize, EventType)> {
        let mut all: Vec<_> = self
            .heel_strikes
            .iter()
            .map(|&f| (f, EventType::HeelStrike))
            .chain(self.toe_offs.iter().map(|&f| (f, EventType::ToeOff)))
            .collect();
        all.sort();
        all
    }

    pub fn is_empty(&self) -> bool {
        self.heel_strikes.is_empty() && self.toe_offs.is_empty()
    }

    /// Checks strict alternation and returns the first offending frame otherwise.
    pub fn check_alternation(&self) -> std::result::Result<(), usize> {
        let seq = self.sequence();
        for pair in seq.windows(2) {
            let ((f0, e0), (f1, e1)) = (pair[0], pair[1]);
            if e0 == e1 || f0 == f1 {
                return Err(f1);
            }
        }
        Ok(())
    }

    /// Stance intervals `[HS, TO]`, open-ended ones clipped to the trial.
    pub fn stance_intervals(&self, frame_count: usize) -> Vec<FrameInterval> {
        let mut out = Vec::new();
        let mut open: Option<usize> = None;
        for (i, (frame, kind)) in self.sequence().into_iter().enumerate() {
            match kind {
                EventType::HeelStrike => open = Some(frame),
                EventType::ToeOff => {
                    let start = match open.take() {
                        Some(s) => s,
                        None if i == 0 => 0,
                        None => continue,
                    };
                    out.push(FrameInterval { start, end: frame });
                }
            }
        }
        if let Some(start) = open {
            out.push(FrameInterval {
                start,
                end: frame_count - 1,
            });
        }
        out
    }

    /// Events implied by contact intervals: each interval opens with a heel
    /// strike unless it starts at frame 0, and closes with a toe-off unless it
    /// reaches the last frame.
    pub fn from_stance_intervals(intervals: &[FrameInterval], frame_count: usize) -> Self {
        let mut ev = FootEvents::default();
        for iv in intervals {
            if iv.start > 0 {
                ev.heel_strikes.push(iv.start);
            }
            if iv.end + 1 < frame_count {
                ev.toe_offs.push(iv.end);
            }
        }
        ev
    }
}

/// Inclusive frame range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameInterval {
    pub start: usize,
    pub end: usize,
}

impl FrameInterval {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, frame: usize) -> bool {
        (self.start..=self.end).contains(&frame)
    }
}

/// Interior local maxima; a flat top reports its middle sample.
fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                peaks.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Drops peaks closer than `distance` samples to a higher peak. Ties are
/// resolved in favour of the earlier sample.
fn suppress_close_peaks(x: &[f64], peaks: Vec<usize>, distance: usize) -> Vec<usize> {
    if distance <= 1 {
        return peaks;
    }
    let mut order: Vec<usize> = (0..peaks.len()).collect();
    order.sort_by(|&a, &b| x[peaks[b]].total_cmp(&x[peaks[a]]).then(a.cmp(&b)));
    let mut keep = vec![true; peaks.len()];
    for &i in &order {
        if !keep[i] {
            continue;
        }
        for j in (0..i).rev() {
            if peaks[i] - peaks[j] >= distance {
                break;
            }
            keep[j] = false;
        }
        for j in i + 1..peaks.len() {
            if peaks[j] - peaks[i] >= distance {
                break;
            }
            keep[j] = false;
        }
    }
    peaks
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

fn relative_channel(a: &UniformSeries, b: &UniformSeries) -> Result<Vec<f64>> {
    if a.len() != b.len() || a.sample_rate_hz() != b.sample_rate_hz() {
        return Err(Error::SeriesMismatch(
            "event series must share rate and length".into(),
        ));
    }
    Ok(a.channel(0)
        .iter()
        .zip(b.channel(0))
        .map(|(p, s)| p - s)
        .collect())
}

/// Heel strikes at maxima of heel-minus-sacrum and toe-offs at minima of
/// toe-minus-sacrum along the progression axis. Inputs are single-channel and
/// assumed to progress in the positive direction.
pub fn detect_events_zeni(
    heel_ap: &UniformSeries,
    toe_ap: &UniformSeries,
    sacrum_ap: &UniformSeries,
    min_period_s: f64,
) -> Result<FootEvents> {
    if !(min_period_s > 0.0) {
        return Err(Error::InvalidSeries(format!(
            "min_period_s must be positive, got {min_period_s}"
        )));
    }
    let heel = relative_channel(heel_ap, sacrum_ap)?;
    let toe = relative_channel(toe_ap, sacrum_ap)?;
    if heel.len() < 3 {
        return Err(Error::SeriesTooShort {
            needed: 3,
            got: heel.len(),
        });
    }
    let distance = (min_period_s * sacrum_ap.sample_rate_hz()).round() as usize;
    let neg_toe: Vec<f64> = toe.iter().map(|v| -v).collect();
    Ok(FootEvents {
        heel_strikes: suppress_close_peaks(&heel, local_maxima(&heel), distance),
        toe_offs: suppress_close_peaks(&neg_toe, local_maxima(&neg_toe), distance),
    })
}

/// +1 when the sacrum moves toward +x over the trial, -1 otherwise.
pub fn progression_sign(sacrum_ap: &[f64]) -> f64 {
    match (sacrum_ap.first(), sacrum_ap.last()) {
        (Some(a), Some(b)) if b < a => -1.0,
        _ => 1.0,
    }
}

/// Marker names used for kinematic event detection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventMarkers {
    pub sacrum: String,
    pub heel: [String; 2],
    pub toe: [String; 2],
}

impl Default for EventMarkers {
    fn default() -> Self {
        EventMarkers {
            sacrum: "SACR".into(),
            heel: ["LHEE".into(), "RHEE".into()],
            toe: ["LTOE".into(), "RTOE".into()],
        }
    }
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl EventMarkers {
    pub fn heel(&self, side: Side) -> &str {
        &self.heel[side_slot(side)]
    }

    pub fn toe(&self, side: Side) -> &str {
        &self.toe[side_slot(side)]
    }
}

/// Zeni detection on marker data: AP (x) traces are sign-normalised to the
/// walking direction, low-pass filtered, then searched for extrema.
pub fn detect_events_from_markers(
    traj: &MarkerTrajectorySet,
    markers: &EventMarkers,
    cutoff_hz: f64,
    filter_order: usize,
    min_period_s: f64,
) -> Result<[FootEvents; 2]> {
    let rate = traj.sample_rate_hz();
    let ap = |name: &str| -> Result<Vec<f64>> {
        let track = traj
            .marker(name)
            .ok_or_else(|| Error::UnknownPoint(name.to_string()))?;
        Ok(track.positions.iter().map(|p| p.x).collect())
    };
    let sacrum_raw = ap(&markers.sacrum)?;
    let sign = progression_sign(&sacrum_raw);
    let prepare = |raw: Vec<f64>| -> Result<UniformSeries> {
        let s = UniformSeries::single(rate, raw.into_iter().map(|v| sign * v).collect())?;
        lowpass(&s, cutoff_hz, filter_order)
    };
    let sacrum = prepare(sacrum_raw)?;
    let mut out: [FootEvents; 2] = Default::default();
    for side in [Side::Left, Side::Right] {
        let heel = prepare(ap(markers.heel(side))?)?;
        let toe = prepare(ap(markers.toe(side))?)?;
        out[side_slot(side)] = detect_events_zeni(&heel, &toe, &sacrum, min_period_s)?;
    }
    Ok(out)
}

/// Maximal runs of samples strictly below `threshold_m` in channel 0.
pub fn detect_stance_threshold(foot_z: &UniformSeries, threshold_m: f64) -> Vec<FrameInterval> {
    let z = foot_z.channel(0);
    let mut out = Vec::new();
    let mut start = None;
    for (k, &v) in z.iter().enumerate() {
        match (v < threshold_m, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push(FrameInterval { start: s, end: k - 1 });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(FrameInterval {
            start: s,
            end: z.len() - 1,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    SingleStanceLeft,
    SingleStanceRight,
    DoubleStance,
    /// Neither foot in contact; never decomposed.
    Flight,
}

impl PhaseKind {
    pub fn tag(self) -> &'static str {
        match self {
            PhaseKind::SingleStanceLeft => "SS_L",
            PhaseKind::SingleStanceRight => "SS_R",
            PhaseKind::DoubleStance => "DS",
            PhaseKind::Flight => "FLIGHT",
        }
    }

    pub fn stance_side(self) -> Option<Side> {
        match self {
            PhaseKind::SingleStanceLeft => Some(Side::Left),
            PhaseKind::SingleStanceRight => Some(Side::Right),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub kind: PhaseKind,
    pub interval: FrameInterval,
    /// False for phases cut by the trial edges and for double-stance runs
    /// whose ends are not a heel strike and a contralateral toe-off.
    pub complete: bool,
    /// For complete double stance: the foot that has just struck.
    pub leading: Option<Side>,
}

impl Phase {
    pub fn label(&self) -> String {
        if self.complete {
            self.kind.tag().to_string()
        } else {
            format!("{}_INCOMPLETE", self.kind.tag())
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}, {}]",
            self.label(),
            self.interval.start,
            self.interval.end
        )
    }
}

/// Per-foot events plus the phases that tile the trial.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitTimeline {
    events: [FootEvents; 2],
    phases: Vec<Phase>,
    frame_count: usize,
    sample_rate_hz: f64,
}

impl GaitTimeline {
    pub fn events(&self, side: Side) -> &FootEvents {
        &self.events[side_slot(side)]
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn phase_at(&self, frame: usize) -> Option<&Phase> {
        let i = self
            .phases
            .partition_point(|p| p.interval.end < frame);
        self.phases.get(i).filter(|p| p.interval.contains(frame))
    }

    pub fn double_stance(&self) -> impl Iterator<Item = &Phase> {
        self.phases
            .iter()
            .filter(|p| p.kind == PhaseKind::DoubleStance)
    }

    /// Whether `side` is in contact at `frame`, from the phase labels.
    pub fn in_stance(&self, side: Side, frame: usize) -> bool {
        match self.phase_at(frame).map(|p| p.kind) {
            Some(PhaseKind::DoubleStance) => true,
            Some(k) => k.stance_side() == Some(side),
            None => false,
        }
    }
}

/// Assembles the timeline from per-foot events over `frame_count` frames.
/// Stance is inclusive of both the heel-strike and toe-off frames.
pub fn build_timeline(
    left: &FootEvents,
    right: &FootEvents,
    frame_count: usize,
    sample_rate_hz: f64,
) -> Result<GaitTimeline> {
    if frame_count == 0 {
        return Err(Error::ZeroFrames);
    }
    for (side, ev) in [(Side::Left, left), (Side::Right, right)] {
        ev.check_alternation()
            .map_err(|frame| Error::NonAlternating {
                side: side.to_string(),
                frame,
            })?;
        if let Some(f) = ev.sequence().last().map(|&(f, _)| f).filter(|&f| f >= frame_count) {
            return Err(Error::InvalidBoundary(format!(
                "{side} event at frame {f} outside {frame_count} frames"
            )));
        }
    }
    let contact = |ev: &FootEvents| {
        let mut c = vec![false; frame_count];
        for iv in ev.stance_intervals(frame_count) {
            c[iv.start..=iv.end].iter_mut().for_each(|v| *v = true);
        }
        c
    };
    let contact = [contact(left), contact(right)];
    Ok(GaitTimeline {
        phases: phases_from_contact(&contact, frame_count),
        events: [left.clone(), right.clone()],
        frame_count,
        sample_rate_hz,
    })
}

/// Timeline from contact intervals (e.g. threshold stance detection). Events
/// are the interval edges that fall inside the trial.
pub fn build_timeline_from_stance(
    left: &[FrameInterval],
    right: &[FrameInterval],
    frame_count: usize,
    sample_rate_hz: f64,
) -> Result<GaitTimeline> {
    if frame_count == 0 {
        return Err(Error::ZeroFrames);
    }
    let mut contact = [vec![false; frame_count], vec![false; frame_count]];
    for (slot, intervals) in [left, right].into_iter().enumerate() {
        let mut prev_end: Option<usize> = None;
        for iv in intervals {
            if iv.start > iv.end || iv.end >= frame_count || prev_end.is_some_and(|p| iv.start <= p + 1) {
                return Err(Error::InvalidBoundary(format!(
                    "stance interval [{}, {}] is out of order or outside {frame_count} frames",
                    iv.start, iv.end
                )));
            }
            contact[slot][iv.start..=iv.end].iter_mut().for_each(|v| *v = true);
            prev_end = Some(iv.end);
        }
    }
    Ok(GaitTimeline {
        phases: phases_from_contact(&contact, frame_count),
        events: [
            FootEvents::from_stance_intervals(left, frame_count),
            FootEvents::from_stance_intervals(right, frame_count),
        ],
        frame_count,
        sample_rate_hz,
    })
}

fn phases_from_contact(contact: &[Vec<bool>; 2], n: usize) -> Vec<Phase> {
    let kind_at = |k: usize| match (contact[0][k], contact[1][k]) {
        (true, true) => PhaseKind::DoubleStance,
        (true, false) => PhaseKind::SingleStanceLeft,
        (false, true) => PhaseKind::SingleStanceRight,
        (false, false) => PhaseKind::Flight,
    };
    let rises = |f: usize, k: usize| contact[f][k] && (k == 0 || !contact[f][k - 1]);
    let falls = |f: usize, k: usize| contact[f][k] && (k + 1 == n || !contact[f][k + 1]);

    let mut phases = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k < n && kind_at(k) == kind_at(start) {
            continue;
        }
        let (s, e) = (start, k - 1);
        let kind = kind_at(s);
        let interior = s > 0 && e + 1 < n;
        let (complete, leading) = match kind {
            PhaseKind::DoubleStance => {
                let lead = match (rises(0, s), rises(1, s)) {
                    (true, false) => Some(0),
                    (false, true) => Some(1),
                    _ => None,
                };
                match lead {
                    Some(l) if interior && e > s && falls(1 - l, e) && !falls(l, e) => {
                        (true, Some(if l == 0 { Side::Left } else { Side::Right }))
                    }
                    _ => (false, None),
                }
            }
            PhaseKind::Flight => (false, None),
            _ => (interior, None),
        };
        phases.push(Phase {
            kind,
            interval: FrameInterval { start: s, end: e },
            complete,
            leading,
        });
        start = k;
    }
    phases
}

/// Events CSV: `foot,event_type,frame,time_s`, left foot first.
pub fn write_events_csv(timeline: &GaitTimeline, start_time_s: f64) -> String {
    let mut out = String::from("foot,event_type,frame,time_s\n");
    for side in [Side::Left, Side::Right] {
        for (frame, kind) in timeline.events(side).sequence() {
            let t = start_time_s + frame as f64 / timeline.sample_rate_hz;
            out.push_str(&format!("{},{},{},{}\n", side.tag(), kind.tag(), frame, t));
        }
    }
    out
}
