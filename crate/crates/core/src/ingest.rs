//! Marker-trajectory and force-plate text formats.
//!
//! Marker TSV:
//!
//! ```text
//! RATE    200
//! UNITS   mm
//! MARKERS LASI    RASI    ...
//! 0.000   x1      y1      z1      x2 ...
//! ```
//!
//! An occluded sample is a triplet of empty fields or an exact `(0, 0, 0)`.
//!
//! Force TSV: `RATE`, `PLATES <n>`, then rows of `time` followed by
//! `Fx Fy Fz COPx COPy` per plate, in newtons and meters.

use std::fmt::Write as _;
use std::str::FromStr;

use indexmap::IndexMap;
use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

/// Default longest interior gap that [`fill_gaps`] bridges (50 ms at 200 Hz).
pub const DEFAULT_MAX_GAP_FRAMES: usize = 10;
/// Default vertical-force noise floor in newtons.
pub const DEFAULT_NOISE_FLOOR_N: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthUnit {
    Millimeters,
    Meters,
}

impl LengthUnit {
    pub fn tag(self) -> &'static str {
        match self {
            LengthUnit::Millimeters => "mm",
            LengthUnit::Meters => "m",
        }
    }

    /// Number of these units in one meter.
    pub fn per_meter(self) -> f64 {
        match self {
            LengthUnit::Millimeters => 1000.0,
            LengthUnit::Meters => 1.0,
        }
    }
}

impl FromStr for LengthUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mm" => Ok(LengthUnit::Millimeters),
            "m" => Ok(LengthUnit::Meters),
            other => Err(Error::UnknownUnit(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    /// Unit the caller expects the marker file to declare; `None` accepts either.
    pub unit: Option<LengthUnit>,
    pub noise_floor_n: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            unit: None,
            noise_floor_n: DEFAULT_NOISE_FLOOR_N,
        }
    }
}

/// One marker's samples. Missing samples hold NaN positions.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerTrack {
    pub positions: Vec<Vector3<f64>>,
    pub missing: Vec<bool>,
}

impl MarkerTrack {
    pub fn from_positions(positions: Vec<Vector3<f64>>) -> Self {
        let missing = vec![false; positions.len()];
        MarkerTrack { positions, missing }
    }

    pub fn get(&self, frame: usize) -> Option<Vector3<f64>> {
        if self.missing[frame] {
            None
        } else {
            Some(self.positions[frame])
        }
    }
}

/// Named 3D marker tracks sampled at a fixed rate, in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerTrajectorySet {
    sample_rate_hz: f64,
    start_time_s: f64,
    frame_count: usize,
    markers: IndexMap<String, MarkerTrack>,
}

impl MarkerTrajectorySet {
    pub fn new(
        sample_rate_hz: f64,
        start_time_s: f64,
        markers: IndexMap<String, MarkerTrack>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSeries(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let frame_count = markers.values().next().map_or(0, |t| t.positions.len());
        if frame_count == 0 {
            return Err(Error::ZeroFrames);
        }
        let mut markers = markers;
        for (name, track) in markers.iter_mut() {
            if track.positions.len() != frame_count || track.missing.len() != frame_count {
                return Err(Error::InvalidSeries(format!(
                    "marker `{name}` has {} samples, expected {frame_count}",
                    track.positions.len()
                )));
            }
            for (p, &gap) in track.positions.iter_mut().zip(&track.missing) {
                if gap {
                    *p = Vector3::repeat(f64::NAN);
                } else if !p.iter().all(|c| c.is_finite()) {
                    return Err(Error::NonFinite(format!("marker `{name}`")));
                }
            }
        }
        Ok(MarkerTrajectorySet {
            sample_rate_hz,
            start_time_s,
            frame_count,
            markers,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn start_time_s(&self) -> f64 {
        self.start_time_s
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn time_of(&self, frame: usize) -> f64 {
        self.start_time_s + frame as f64 / self.sample_rate_hz
    }

    pub fn marker(&self, name: &str) -> Option<&MarkerTrack> {
        self.markers.get(name)
    }

    pub fn marker_index(&self, name: &str) -> Option<usize> {
        self.markers.get_index_of(name)
    }

    pub fn track(&self, index: usize) -> &MarkerTrack {
        &self.markers[index]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.markers.keys().map(String::as_str)
    }

    pub fn tracks(&self) -> impl Iterator<Item = (&str, &MarkerTrack)> {
        self.markers.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn marker_count(&self) -> usize {
        self.markers.len()
    }

    /// Whether any marker is flagged missing at `frame`.
    pub fn frame_has_gap(&self, frame: usize) -> bool {
        self.markers.values().any(|t| t.missing[frame])
    }

    pub fn translated(&self, offset: Vector3<f64>) -> Self {
        let mut out = self.clone();
        for track in out.markers.values_mut() {
            for p in track.positions.iter_mut() {
                *p += offset;
            }
        }
        out
    }
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::InvalidNumber {
        line,
        value: field.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::InvalidNumber {
            line,
            value: field.to_string(),
        });
    }
    Ok(v)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    /// Next line with its 1-based number, `\r` stripped.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
    }

    fn header(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (line, text) = self.next_line().ok_or_else(|| Error::MalformedHeader {
            line: 0,
            message: format!("missing `{key}` line"),
        })?;
        let mut fields = text.split('\t');
        match fields.next() {
            Some(k) if k.trim() == key => {}
            _ => {
                return Err(Error::MalformedHeader {
                    line,
                    message: format!("expected `{key}`"),
                })
            }
        }
        let rest: Vec<&str> = fields.collect();
        if rest.is_empty() || rest.iter().all(|f| f.trim().is_empty()) {
            return Err(Error::MalformedHeader {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        Ok((line, rest))
    }

    fn data_rows(self) -> impl Iterator<Item = (usize, &'a str)> {
        self.inner
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty())
    }
}

fn parse_rate(lines: &mut Lines<'_>) -> Result<f64> {
    let (line, fields) = lines.header("RATE")?;
    let rate = parse_number(fields[0], line)?;
    if rate <= 0.0 {
        return Err(Error::MalformedHeader {
            line,
            message: format!("sample rate must be positive, got {rate}"),
        });
    }
    Ok(rate)
}

/// Parses a marker TSV document. Millimeter inputs are scaled to meters.
pub fn parse_marker_file(text: &str, config: &IngestConfig) -> Result<MarkerTrajectorySet> {
    let mut lines = Lines::new(text);
    let rate = parse_rate(&mut lines)?;

    let (_, unit_fields) = lines.header("UNITS")?;
    let unit: LengthUnit = unit_fields[0].trim().parse()?;
    if let Some(expected) = config.unit {
        if expected != unit {
            return Err(Error::UnitMismatch {
                expected: expected.tag().into(),
                found: unit.tag().into(),
            });
        }
    }
    let per_meter = unit.per_meter();

    let (marker_line, names) = lines.header("MARKERS")?;
    let names: Vec<String> = names.iter().map(|n| n.trim().to_string()).collect();
    for (i, n) in names.iter().enumerate() {
        if n.is_empty() || names[..i].contains(n) {
            return Err(Error::MalformedHeader {
                line: marker_line,
                message: format!("empty or duplicate marker name `{n}`"),
            });
        }
    }

    let expected = 1 + 3 * names.len();
    let mut start_time = None;
    let mut tracks: Vec<MarkerTrack> = names
        .iter()
        .map(|_| MarkerTrack {
            positions: Vec::new(),
            missing: Vec::new(),
        })
        .collect();

    for (line, row) in lines.data_rows() {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != expected {
            return Err(Error::ColumnCount {
                line,
                expected,
                found: fields.len(),
            });
        }
        let t = parse_number(fields[0], line)?;
        start_time.get_or_insert(t);
        for (m, track) in tracks.iter_mut().enumerate() {
            let triplet = &fields[1 + 3 * m..4 + 3 * m];
            let blanks = triplet.iter().filter(|f| f.trim().is_empty()).count();
            let (pos, gap) = match blanks {
                3 => (Vector3::repeat(f64::NAN), true),
                0 => {
                    let x = parse_number(triplet[0], line)?;
                    let y = parse_number(triplet[1], line)?;
                    let z = parse_number(triplet[2], line)?;
                    if x == 0.0 && y == 0.0 && z == 0.0 {
                        (Vector3::repeat(f64::NAN), true)
                    } else {
                        (Vector3::new(x, y, z) / per_meter, false)
                    }
                }
                _ => {
                    return Err(Error::MalformedRow {
                        line,
                        message: format!("partially blank triplet for marker `{}`", names[m]),
                    })
                }
            };
            track.positions.push(pos);
            track.missing.push(gap);
        }
    }

    if tracks.first().map_or(true, |t| t.positions.is_empty()) {
        return Err(Error::ZeroFrames);
    }
    let markers = names.into_iter().zip(tracks).collect();
    MarkerTrajectorySet::new(rate, start_time.unwrap_or(0.0), markers)
}

/// Serializes a marker set in the TSV layout accepted by [`parse_marker_file`].
pub fn write_marker_file(set: &MarkerTrajectorySet, unit: LengthUnit) -> String {
    write_marker_file_with_decimals(set, unit, None)
}

/// As [`write_marker_file`], with coordinates rounded to `decimals` places
/// in the output unit when given.
pub fn write_marker_file_with_decimals(
    set: &MarkerTrajectorySet,
    unit: LengthUnit,
    decimals: Option<usize>,
) -> String {
    let inv = unit.per_meter();
    let mut out = String::new();
    let _ = writeln!(out, "RATE\t{}", set.sample_rate_hz);
    let _ = writeln!(out, "UNITS\t{}", unit.tag());
    out.push_str("MARKERS");
    for name in set.names() {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for f in 0..set.frame_count {
        let _ = write!(out, "{}", set.time_of(f));
        for track in set.markers.values() {
            if track.missing[f] {
                out.push_str("\t\t\t");
            } else {
                let p = track.positions[f];
                let s = |v: f64| if unit == LengthUnit::Meters { v } else { v * inv };
                for v in [s(p.x), s(p.y), s(p.z)] {
                    let _ = match decimals {
                        Some(d) => write!(out, "\t{v:.d$}"),
                        None => write!(out, "\t{v}"),
                    };
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Fills interior gaps of at most `max_gap_frames` samples by linear
/// interpolation between the bracketing valid samples. Edge gaps and longer
/// gaps stay flagged.
pub fn fill_gaps(traj: &MarkerTrajectorySet, max_gap_frames: usize) -> MarkerTrajectorySet {
    let mut out = traj.clone();
    for track in out.markers.values_mut() {
        let n = track.positions.len();
        let mut f = 0;
        while f < n {
            if !track.missing[f] {
                f += 1;
                continue;
            }
            let start = f;
            while f < n && track.missing[f] {
                f += 1;
            }
            let end = f; // first valid frame after the gap, or n
            let len = end - start;
            if start == 0 || end == n || len > max_gap_frames {
                continue;
            }
            let (i0, i1) = (start - 1, end);
            let (a, b) = (track.positions[i0], track.positions[i1]);
            let span = (i1 - i0) as f64;
            for k in start..end {
                let w = (k - i0) as f64 / span;
                track.positions[k] = a + (b - a) * w;
                track.missing[k] = false;
            }
        }
    }
    out
}

/// One force plate's samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateRecord {
    pub force_n: Vec<Vector3<f64>>,
    pub cop_m: Vec<Vector2<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcePlateSeries {
    sample_rate_hz: f64,
    start_time_s: f64,
    plates: Vec<PlateRecord>,
    below_noise_floor: Vec<Vec<bool>>,
}

impl ForcePlateSeries {
    pub fn new(
        sample_rate_hz: f64,
        start_time_s: f64,
        plates: Vec<PlateRecord>,
        noise_floor_n: f64,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSeries(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if plates.is_empty() {
            return Err(Error::InvalidSeries("no force plates".into()));
        }
        let n = plates[0].force_n.len();
        if n == 0 {
            return Err(Error::ZeroFrames);
        }
        if plates
            .iter()
            .any(|p| p.force_n.len() != n || p.cop_m.len() != n)
        {
            return Err(Error::InvalidSeries(
                "force plate channels differ in length".into(),
            ));
        }
        let below_noise_floor = plates
            .iter()
            .map(|p| p.force_n.iter().map(|f| f.z < -noise_floor_n).collect())
            .collect();
        Ok(ForcePlateSeries {
            sample_rate_hz,
            start_time_s,
            plates,
            below_noise_floor,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn start_time_s(&self) -> f64 {
        self.start_time_s
    }

    pub fn plates(&self) -> &[PlateRecord] {
        &self.plates
    }

    pub fn frame_count(&self) -> usize {
        self.plates[0].force_n.len()
    }

    /// Per plate, frames whose vertical force is below `-noise_floor_n`.
    pub fn below_noise_floor(&self) -> &[Vec<bool>] {
        &self.below_noise_floor
    }

    /// Sum of all plates' force vectors per frame.
    pub fn total_force(&self) -> Vec<Vector3<f64>> {
        (0..self.frame_count())
            .map(|f| self.plates.iter().map(|p| p.force_n[f]).sum())
            .collect()
    }
}

pub fn parse_force_file(text: &str, config: &IngestConfig) -> Result<ForcePlateSeries> {
    let mut lines = Lines::new(text);
    let rate = parse_rate(&mut lines)?;
    let (line, fields) = lines.header("PLATES")?;
    let n_plates: usize = fields[0]
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::MalformedHeader {
            line,
            message: format!("invalid plate count `{}`", fields[0]),
        })?;

    let expected = 1 + 5 * n_plates;
    let mut start_time = None;
    let mut plates: Vec<PlateRecord> = (0..n_plates)
        .map(|_| PlateRecord {
            force_n: Vec::new(),
            cop_m: Vec::new(),
        })
        .collect();
    for (line, row) in lines.data_rows() {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != expected {
            return Err(Error::ColumnCount {
                line,
                expected,
                found: fields.len(),
            });
        }
        let t = parse_number(fields[0], line)?;
        start_time.get_or_insert(t);
        for (p, plate) in plates.iter_mut().enumerate() {
            let v: Vec<f64> = fields[1 + 5 * p..6 + 5 * p]
                .iter()
                .map(|f| parse_number(f, line))
                .collect::<Result<_>>()?;
            plate.force_n.push(Vector3::new(v[0], v[1], v[2]));
            plate.cop_m.push(Vector2::new(v[3], v[4]));
        }
    }
    if plates[0].force_n.is_empty() {
        return Err(Error::ZeroFrames);
    }
    ForcePlateSeries::new(
        rate,
        start_time.unwrap_or(0.0),
        plates,
        config.noise_floor_n,
    )
}

pub fn write_force_file(series: &ForcePlateSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "RATE\t{}", series.sample_rate_hz);
    let _ = writeln!(out, "PLATES\t{}", series.plates.len());
    for f in 0..series.frame_count() {
        let t = series.start_time_s + f as f64 / series.sample_rate_hz;
        let _ = write!(out, "{t}");
        for p in &series.plates {
            let (force, cop) = (p.force_n[f], p.cop_m[f]);
            let _ = write!(
                out,
                "\t{}\t{}\t{}\t{}\t{}",
                force.x, force.y, force.z, cop.x, cop.y
            );
        }
        out.push('\n');
    }
    out
}
