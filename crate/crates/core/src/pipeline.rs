//! Subcommand runners: load a trial, compute, write result files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use crate::anthro::{load_table, AnthropometricTable, SegmentId, Side, SubjectProfile};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::events::{
    build_timeline, detect_events_from_markers, detect_stance_threshold, write_events_csv,
    FrameInterval, GaitTimeline,
};
use crate::grf::{
    butterfly, decompose_gait_with_flags, total_grf, write_butterfly_csv, write_butterfly_svg,
    write_grf_csv, BilateralGrf, GrfSeries,
};
use crate::ingest::{fill_gaps, parse_force_file, parse_marker_file, ForcePlateSeries, MarkerTrajectorySet};
use crate::kinematics::{com_trajectory, parse_definitions, ComTrajectory, SegmentDefinitions};
use crate::metrics::{compare, ComparisonReport};
use crate::signal::{decimate, lowpass, UniformSeries};

/// Left+right vs total mismatch above this (relative to the force scale)
/// is treated as an internal error.
const CONSTRAINT_TOLERANCE: f64 = 1e-9;

/// A loaded trial ready for processing.
#[derive(Debug, Clone)]
pub struct Trial {
    pub stem: String,
    pub source: PathBuf,
    pub markers: MarkerTrajectorySet,
    /// Frames where at least one marker was reconstructed from a gap.
    pub gap_frames: Vec<bool>,
    pub table: AnthropometricTable,
    pub definitions: SegmentDefinitions,
    pub subject: SubjectProfile,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn trial_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trial".to_string())
}

pub fn load_trial(config: &PipelineConfig) -> Result<Trial> {
    config.validate()?;
    let path = config
        .marker_file
        .clone()
        .ok_or_else(|| Error::Config("no marker file given".into()))?;
    let subject = config.subject()?;
    let table = match &config.table_file {
        Some(p) => load_table(&read(p)?).map_err(|e| Error::in_file(p, e))?,
        None => AnthropometricTable::reference(),
    };
    let definitions = match &config.segments_file {
        Some(p) => parse_definitions(&read(p)?).map_err(|e| Error::in_file(p, e))?,
        None => SegmentDefinitions::cast_default(),
    };
    let raw = parse_marker_file(&read(&path)?, &config.ingest()).map_err(|e| Error::in_file(&path, e))?;
    let gap_frames = (0..raw.frame_count()).map(|f| raw.frame_has_gap(f)).collect();
    Ok(Trial {
        stem: trial_stem(&path),
        markers: fill_gaps(&raw, config.max_gap_frames),
        source: path,
        gap_frames,
        table,
        definitions,
        subject,
    })
}

impl Trial {
    fn in_file(&self, e: Error) -> Error {
        Error::in_file(&self.source, e)
    }

    pub fn com(&self) -> Result<ComTrajectory> {
        com_trajectory(&self.markers, &self.definitions, &self.table, &self.subject).map_err(|e| self.in_file(e))
    }

    /// Kinematic events and the phase timeline.
    pub fn timeline(&self, config: &PipelineConfig) -> Result<GaitTimeline> {
        let events = detect_events_from_markers(
            &self.markers,
            &config.markers,
            config.cutoff_hz,
            config.filter_order,
            config.min_period_s,
        )
        .map_err(|e| match e {
            Error::SeriesTooShort { .. } => Error::NoGaitCycle,
            other => self.in_file(other),
        })?;
        build_timeline(
            &events[0],
            &events[1],
            self.markers.frame_count(),
            self.markers.sample_rate_hz(),
        )
        .map_err(|e| self.in_file(e))
    }

    pub fn total_grf(&self, com: &ComTrajectory, config: &PipelineConfig) -> Result<GrfSeries> {
        total_grf(com, &self.subject, config.gravity, Some(config.lowpass())).map_err(|e| self.in_file(e))
    }
}

/// Output files go to `<output_dir>/<stem>_<suffix>`.
fn write_output(config: &PipelineConfig, stem: &str, suffix: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    let path = config.output_dir.join(format!("{stem}_{suffix}"));
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn write_com_csv(com: &ComTrajectory, with_segments: bool) -> String {
    let mut out = String::from("time_s,com_x,com_y,com_z");
    if with_segments {
        for seg in SegmentId::ALL {
            let _ = write!(out, ",{0}_x,{0}_y,{0}_z", seg.name());
        }
    }
    out.push('\n');
    for (k, c) in com.whole_body().iter().enumerate() {
        let t = com.start_time_s() + k as f64 / com.sample_rate_hz();
        let _ = write!(out, "{t},{},{},{}", c.x, c.y, c.z);
        if with_segments {
            for seg in SegmentId::ALL {
                let s = com.segment_com(k, seg);
                let _ = write!(out, ",{},{},{}", s.x, s.y, s.z);
            }
        }
        out.push('\n');
    }
    out
}

pub fn run_com(config: &PipelineConfig, log: &dyn Fn(&str)) -> Result<Vec<PathBuf>> {
    log(&format!("com: {config}"));
    let trial = load_trial(config)?;
    let com = trial.com()?;
    let path = write_output(config, &trial.stem, "com.csv", &write_com_csv(&com, config.segment_coms))?;
    log(&format!("{} frames -> {}", com.frame_count(), path.display()));
    Ok(vec![path])
}

fn write_stance_csv(intervals: &[(Side, FrameInterval)], start_time_s: f64, rate: f64) -> String {
    let mut out = String::from("foot,start_frame,end_frame,start_s,end_s\n");
    for (side, iv) in intervals {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            side.tag(),
            iv.start,
            iv.end,
            start_time_s + iv.start as f64 / rate,
            start_time_s + iv.end as f64 / rate
        );
    }
    out
}

pub fn run_events(config: &PipelineConfig, log: &dyn Fn(&str)) -> Result<Vec<PathBuf>> {
    log(&format!("events: {config}"));
    let trial = load_trial(config)?;
    let timeline = trial.timeline(config)?;
    let [l, r] = [Side::Left, Side::Right].map(|s| timeline.events(s));
    if l.is_empty() && r.is_empty() {
        return Err(Error::NoGaitCycle);
    }
    let rate = trial.markers.sample_rate_hz();
    let start = trial.markers.start_time_s();
    let mut paths = vec![write_output(config, &trial.stem, "events.csv", &write_events_csv(&timeline, start))?];

    // Foot-height contact as a cross-check on the kinematic events.
    let com = trial.com()?;
    let mut stance = Vec::new();
    for side in [Side::Left, Side::Right] {
        let z: Vec<f64> = com.segment_track(SegmentId::foot(side)).iter().map(|p| p.z).collect();
        let series = UniformSeries::single(rate, z).map_err(|e| trial.in_file(e))?;
        stance.extend(
            detect_stance_threshold(&series, config.stance_threshold_m)
                .into_iter()
                .map(|iv| (side, iv)),
        );
    }
    paths.push(write_output(config, &trial.stem, "stance.csv", &write_stance_csv(&stance, start, rate))?);
    log(&format!(
        "{} heel strikes, {} toe-offs; {} threshold stance intervals",
        l.heel_strikes.len() + r.heel_strikes.len(),
        l.toe_offs.len() + r.toe_offs.len(),
        stance.len()
    ));
    Ok(paths)
}

/// Total and per-limb forces for a trial.
pub fn analyze_grf(trial: &Trial, config: &PipelineConfig) -> Result<(ComTrajectory, BilateralGrf)> {
    let com = trial.com()?;
    let total = trial.total_grf(&com, config)?;
    let timeline = trial.timeline(config)?;
    if !timeline.double_stance().any(|p| p.complete) {
        return Err(Error::NoGaitCycle);
    }
    let bilateral = decompose_gait_with_flags(
        &total,
        &timeline,
        trial.subject.total_mass_kg,
        config.gravity,
        Some(&trial.gap_frames),
    )
    .map_err(|e| trial.in_file(e))?;
    let scale = total.force_n.iter().map(|f| f.amax()).fold(1.0, f64::max);
    let residual = bilateral.max_constraint_residual();
    if residual > CONSTRAINT_TOLERANCE * scale {
        return Err(Error::Invariant(format!(
            "left + right differs from total by {residual:e} N"
        )));
    }
    Ok((com, bilateral))
}

fn foot_tracks(com: &ComTrajectory) -> [Vec<Vector3<f64>>; 2] {
    [Side::Left, Side::Right].map(|s| com.segment_track(SegmentId::foot(s)))
}

fn write_butterfly(
    config: &PipelineConfig,
    trial: &Trial,
    com: &ComTrajectory,
    bilateral: &BilateralGrf,
) -> Result<Vec<PathBuf>> {
    let feet = foot_tracks(com);
    let diagram = butterfly(bilateral, [&feet[0], &feet[1]], config.butterfly_scale)?;
    Ok(vec![
        write_output(config, &trial.stem, "butterfly.csv", &write_butterfly_csv(&diagram))?,
        write_output(config, &trial.stem, "butterfly.svg", &write_butterfly_svg(&diagram))?,
    ])
}

fn load_plates(config: &PipelineConfig) -> Result<Option<ForcePlateSeries>> {
    match &config.force_file {
        Some(p) => Ok(Some(
            parse_force_file(&read(p)?, &config.ingest()).map_err(|e| Error::in_file(p, e))?,
        )),
        None => Ok(None),
    }
}

/// Compares the kinematic total force with the summed plate force after
/// decimating the plates to the marker rate and filtering them identically.
pub fn compare_with_plates(
    total: &GrfSeries,
    plates: &ForcePlateSeries,
    config: &PipelineConfig,
) -> Result<ComparisonReport> {
    let ratio = plates.sample_rate_hz() / total.sample_rate_hz;
    let factor = ratio.round();
    if factor < 1.0 || (ratio - factor).abs() > 1e-6 {
        return Err(Error::Config(format!(
            "force rate {} Hz is not an integer multiple of marker rate {} Hz",
            plates.sample_rate_hz(),
            total.sample_rate_hz
        )));
    }
    let summed = UniformSeries::from_vectors(plates.sample_rate_hz(), &plates.total_force())?;
    let decimated = decimate(&summed, factor as usize)?;
    let plate = lowpass(&decimated, config.cutoff_hz, config.filter_order)?.to_vectors();
    let offset = ((plates.start_time_s() - total.start_time_s) * total.sample_rate_hz).round() as i64;
    let (kin, plate): (&[Vector3<f64>], &[Vector3<f64>]) = if offset >= 0 {
        (total.force_n.get(offset as usize..).unwrap_or(&[]), &plate)
    } else {
        (&total.force_n, plate.get((-offset) as usize..).unwrap_or(&[]))
    };
    let n = kin.len().min(plate.len());
    if n < 2 {
        return Err(Error::SeriesMismatch(
            "force and marker recordings do not overlap".into(),
        ));
    }
    let a = UniformSeries::from_vectors(total.sample_rate_hz, &kin[..n])?;
    let b = UniformSeries::from_vectors(total.sample_rate_hz, &plate[..n])?;
    compare(&a, &b, config.compensate_bias)
}

const FORCE_AXES: [&str; 3] = ["Fx", "Fy", "Fz"];

fn write_comparison(config: &PipelineConfig, stem: &str, report: &ComparisonReport) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write_output(config, stem, "comparison.csv", &report.to_csv(&FORCE_AXES))?,
        write_output(config, stem, "comparison.txt", &report.to_text(&FORCE_AXES, "N"))?,
    ])
}

fn write_diagnostics(bilateral: &BilateralGrf) -> String {
    let mut out = String::from("frame,time_s,message\n");
    for d in &bilateral.diagnostics {
        let _ = writeln!(out, "{},{},{}", d.frame, bilateral.total.time_of(d.frame), d.message);
    }
    out
}

pub fn run_grf(config: &PipelineConfig, log: &dyn Fn(&str)) -> Result<Vec<PathBuf>> {
    log(&format!("grf: {config}"));
    let trial = load_trial(config)?;
    let plates = load_plates(config)?;
    let (com, bilateral) = analyze_grf(&trial, config)?;
    let stem = &trial.stem;
    let mut paths = vec![
        write_output(config, stem, "grf.csv", &write_grf_csv(&bilateral))?,
        write_output(
            config,
            stem,
            "events.csv",
            &write_events_csv(&bilateral.timeline, trial.markers.start_time_s()),
        )?,
    ];
    paths.extend(write_butterfly(config, &trial, &com, &bilateral)?);
    paths.push(write_output(config, stem, "diagnostics.csv", &write_diagnostics(&bilateral))?);
    let analyzed = bilateral.analyzed.iter().filter(|&&a| a).count();
    log(&format!(
        "{analyzed}/{} frames decomposed, {} double-stance intervals, {} diagnostics",
        bilateral.total.len(),
        bilateral.ds_boundaries.len(),
        bilateral.diagnostics.len()
    ));
    if let Some(plates) = plates {
        let report = compare_with_plates(&bilateral.total, &plates, config)?;
        log(&format!("vertical RMSE vs plates: {:.3} N", report.rmse[2]));
        paths.extend(write_comparison(config, stem, &report)?);
    }
    Ok(paths)
}

pub fn run_validate(config: &PipelineConfig, log: &dyn Fn(&str)) -> Result<Vec<PathBuf>> {
    log(&format!("validate: {config}"));
    let plates = load_plates(config)?
        .ok_or_else(|| Error::Config("validate needs force_file".into()))?;
    let trial = load_trial(config)?;
    let com = trial.com()?;
    let total = trial.total_grf(&com, config)?;
    let report = compare_with_plates(&total, &plates, config)?;
    log(&report.to_text(&FORCE_AXES, "N").trim_end().replace('\n', "; "));
    write_comparison(config, &trial.stem, &report)
}

pub fn run_butterfly(config: &PipelineConfig, log: &dyn Fn(&str)) -> Result<Vec<PathBuf>> {
    log(&format!("butterfly: {config}"));
    let trial = load_trial(config)?;
    let (com, bilateral) = analyze_grf(&trial, config)?;
    let paths = write_butterfly(config, &trial, &com, &bilateral)?;
    log(&format!("wrote {}", paths[0].display()));
    Ok(paths)
}

/// Options for writing a synthetic walking trial.
#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub params: crate::synth::WalkerParams,
    pub output_dir: PathBuf,
    pub stem: String,
    pub force_rate_hz: f64,
    /// Decimal places of the millimetre coordinates.
    pub decimals: usize,
}

/// Writes `<stem>.tsv` (markers, mm), `<stem>_force.tsv` and `<stem>.cfg`.
pub fn run_synth(opts: &SynthOptions, log: &dyn Fn(&str)) -> Result<Vec<PathBuf>> {
    use crate::ingest::{write_force_file, write_marker_file_with_decimals, LengthUnit};
    let walk = crate::synth::walker(&opts.params)?;
    let plates = crate::synth::walker_force_plates(
        &walk,
        opts.force_rate_hz,
        crate::grf::DEFAULT_GRAVITY,
        crate::ingest::DEFAULT_NOISE_FLOOR_N,
    )?;
    let dir = &opts.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let put = |name: String, text: String| -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    };
    let s = &opts.params.subject;
    let stem = &opts.stem;
    let cfg = format!(
        "# synthetic walker\nmarker_file = {stem}.tsv\nforce_file = {stem}_force.tsv\nmass_kg = {}\nheight_m = {}\nsex = {}\n",
        s.total_mass_kg,
        s.height_m,
        s.sex
    );
    let paths = vec![
        put(
            format!("{stem}.tsv"),
            write_marker_file_with_decimals(&walk.markers, LengthUnit::Millimeters, Some(opts.decimals)),
        )?,
        put(format!("{stem}_force.tsv"), write_force_file(&plates))?,
        put(format!("{stem}.cfg"), cfg)?,
    ];
    log(&format!(
        "{} frames, {} markers, CoM steering residual {:.1e} m",
        walk.markers.frame_count(),
        walk.markers.marker_count(),
        walk.com_residual_m
    ));
    Ok(paths)
}
