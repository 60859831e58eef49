//! Pipeline configuration: `key = value` lines with `#` comments.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::anthro::{Sex, SubjectProfile};
use crate::error::{Error, Result};
use crate::events::{EventMarkers, DEFAULT_MIN_PERIOD_S, DEFAULT_STANCE_THRESHOLD_M};
use crate::grf::{DEFAULT_BUTTERFLY_SCALE_M_PER_N, DEFAULT_GRAVITY};
use crate::ingest::{IngestConfig, LengthUnit, DEFAULT_MAX_GAP_FRAMES, DEFAULT_NOISE_FLOOR_N};
use crate::signal::{LowpassSpec, DEFAULT_CUTOFF_HZ, DEFAULT_FILTER_ORDER};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "KINEGRF_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub marker_file: Option<PathBuf>,
    pub force_file: Option<PathBuf>,
    /// `None` selects the bundled reference table.
    pub table_file: Option<PathBuf>,
    /// `None` selects the bundled segment definitions.
    pub segments_file: Option<PathBuf>,
    pub mass_kg: Option<f64>,
    pub height_m: Option<f64>,
    pub sex: Option<Sex>,
    pub units: Option<LengthUnit>,
    pub cutoff_hz: f64,
    pub filter_order: usize,
    pub stance_threshold_m: f64,
    pub min_period_s: f64,
    pub gravity: f64,
    pub max_gap_frames: usize,
    pub noise_floor_n: f64,
    pub butterfly_scale: f64,
    pub compensate_bias: bool,
    pub segment_coms: bool,
    pub output_dir: PathBuf,
    pub markers: EventMarkers,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            marker_file: None,
            force_file: None,
            table_file: None,
            segments_file: None,
            mass_kg: None,
            height_m: None,
            sex: None,
            units: None,
            cutoff_hz: DEFAULT_CUTOFF_HZ,
            filter_order: DEFAULT_FILTER_ORDER,
            stance_threshold_m: DEFAULT_STANCE_THRESHOLD_M,
            min_period_s: DEFAULT_MIN_PERIOD_S,
            gravity: DEFAULT_GRAVITY,
            max_gap_frames: DEFAULT_MAX_GAP_FRAMES,
            noise_floor_n: DEFAULT_NOISE_FLOOR_N,
            butterfly_scale: DEFAULT_BUTTERFLY_SCALE_M_PER_N,
            compensate_bias: false,
            segment_coms: false,
            output_dir: PathBuf::from("."),
            markers: EventMarkers::default(),
        }
    }
}

/// Keys accepted in config files (and mirrored by CLI flags).
pub const KEYS: &[&str] = &[
    "marker_file",
    "force_file",
    "table_file",
    "segments_file",
    "mass_kg",
    "height_m",
    "sex",
    "units",
    "cutoff_hz",
    "filter_order",
    "stance_threshold_m",
    "min_period_s",
    "gravity",
    "max_gap_frames",
    "noise_floor_n",
    "butterfly_scale",
    "compensate_bias",
    "segment_coms",
    "output_dir",
    "sacrum_marker",
    "left_heel_marker",
    "right_heel_marker",
    "left_toe_marker",
    "right_toe_marker",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got `{value}`"))),
    }
}

impl PipelineConfig {
    /// Sets one key. Relative paths are joined onto `base_dir` when given.
    pub fn set(&mut self, key: &str, value: &str, base_dir: Option<&Path>) -> Result<()> {
        let value = value.trim();
        let path = || match base_dir {
            Some(dir) if Path::new(value).is_relative() => dir.join(value),
            _ => PathBuf::from(value),
        };
        match key {
            "marker_file" => self.marker_file = Some(path()),
            "force_file" => self.force_file = Some(path()),
            "table_file" => self.table_file = Some(path()),
            "segments_file" => self.segments_file = Some(path()),
            "mass_kg" => self.mass_kg = Some(parse_num(key, value)?),
            "height_m" => self.height_m = Some(parse_num(key, value)?),
            "sex" => {
                self.sex = Some(
                    value
                        .parse()
                        .map_err(|_| Error::Config(format!("sex: expected F or M, got `{value}`")))?,
                )
            }
            "units" => self.units = Some(value.parse()?),
            "cutoff_hz" => self.cutoff_hz = parse_num(key, value)?,
            "filter_order" => self.filter_order = parse_num(key, value)?,
            "stance_threshold_m" => self.stance_threshold_m = parse_num(key, value)?,
            "min_period_s" => self.min_period_s = parse_num(key, value)?,
            "gravity" => self.gravity = parse_num(key, value)?,
            "max_gap_frames" => self.max_gap_frames = parse_num(key, value)?,
            "noise_floor_n" => self.noise_floor_n = parse_num(key, value)?,
            "butterfly_scale" => self.butterfly_scale = parse_num(key, value)?,
            "compensate_bias" => self.compensate_bias = parse_bool(key, value)?,
            "segment_coms" => self.segment_coms = parse_bool(key, value)?,
            "output_dir" => self.output_dir = path(),
            "sacrum_marker" => self.markers.sacrum = value.to_string(),
            "left_heel_marker" => self.markers.heel[0] = value.to_string(),
            "right_heel_marker" => self.markers.heel[1] = value.to_string(),
            "left_toe_marker" => self.markers.toe[0] = value.to_string(),
            "right_toe_marker" => self.markers.toe[1] = value.to_string(),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a config document on top of `self`.
    pub fn apply_text(&mut self, text: &str, base_dir: Option<&Path>) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value, base_dir)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = PipelineConfig::default();
        c.apply_text(text, None)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cutoff_hz", self.cutoff_hz),
            ("stance_threshold_m", self.stance_threshold_m),
            ("min_period_s", self.min_period_s),
            ("gravity", self.gravity),
            ("butterfly_scale", self.butterfly_scale),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{key} must be positive, got {v}")));
            }
        }
        if !(self.noise_floor_n >= 0.0) {
            return Err(Error::Config("noise_floor_n must not be negative".into()));
        }
        if self.filter_order == 0 || self.filter_order % 2 != 0 {
            return Err(Error::Config(format!(
                "filter_order must be a positive even integer, got {}",
                self.filter_order
            )));
        }
        if self.max_gap_frames == 0 {
            return Err(Error::Config("max_gap_frames must be positive".into()));
        }
        Ok(())
    }

    pub fn subject(&self) -> Result<SubjectProfile> {
        match (self.mass_kg, self.height_m, self.sex) {
            (Some(m), Some(h), Some(s)) => SubjectProfile::new(m, h, s),
            _ => Err(Error::Config(
                "subject profile needs mass_kg, height_m and sex".into(),
            )),
        }
    }

    pub fn lowpass(&self) -> LowpassSpec {
        LowpassSpec {
            cutoff_hz: self.cutoff_hz,
            order: self.filter_order,
        }
    }

    pub fn ingest(&self) -> IngestConfig {
        IngestConfig {
            unit: self.units,
            noise_floor_n: self.noise_floor_n,
        }
    }
}

/// Run header: the effective values of the processing parameters.
impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cutoff_hz={} filter_order={} stance_threshold_m={} min_period_s={} gravity={} max_gap_frames={}",
            self.cutoff_hz,
            self.filter_order,
            self.stance_threshold_m,
            self.min_period_s,
            self.gravity,
            self.max_gap_frames
        )
    }
}
