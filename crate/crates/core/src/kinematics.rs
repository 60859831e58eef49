//! Segment frames, segment centres of mass and the whole-body CoM track.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};

use crate::anthro::{segment_mass, AnthropometricTable, SegmentId, SubjectProfile};
use crate::error::{Error, Result};
use crate::ingest::MarkerTrajectorySet;
use crate::signal::UniformSeries;

/// Hand length as a fraction of forearm length.
pub const HAND_LENGTH_RATIO: f64 = 0.74;
/// Hand CoM position along the hand, from the wrist.
pub const HAND_COM_FRACTION: f64 = 0.5;
/// Minimum angle between the primary axis and the lateral reference.
pub const MIN_AXIS_ANGLE_RAD: f64 = 1e-3;

const DEFAULT_DEFINITIONS: &str = include_str!("../data/segments_cast.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimaryAxis {
    /// Longitudinal segment axis, `u_z`.
    Vertical,
    /// Antero-posterior axis, `u_x` (feet).
    AnteroPosterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisRule {
    pub primary: PrimaryAxis,
    pub primary_from: String,
    pub primary_to: String,
    /// `left_from -> left_to` points towards the subject's left.
    pub left_from: String,
    pub left_to: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SegmentGeometry {
    Frame {
        origin: String,
        distal: String,
        axes: AxisRule,
    },
    /// Hand CoM from the wrist and elbow centres when no hand markers exist.
    HandFallback { wrist: String, elbow: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDefinition {
    pub segment: SegmentId,
    pub geometry: SegmentGeometry,
}

/// Definitions for all sixteen segments, indexed by [`SegmentId::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDefinitions {
    defs: Vec<SegmentDefinition>,
}

impl SegmentDefinitions {
    pub fn new(defs: Vec<SegmentDefinition>) -> Result<Self> {
        let mut slots: Vec<Option<SegmentDefinition>> = vec![None; SegmentId::COUNT];
        for d in defs {
            let i = d.segment.index();
            if slots[i].is_some() {
                return Err(Error::InvalidDefinitions(format!(
                    "segment {} defined twice",
                    d.segment
                )));
            }
            slots[i] = Some(d);
        }
        let defs = slots
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                d.ok_or_else(|| {
                    Error::InvalidDefinitions(format!("segment {} not defined", SegmentId::ALL[i]))
                })
            })
            .collect::<Result<_>>()?;
        Ok(SegmentDefinitions { defs })
    }

    /// Bundled definitions for the default CAST-style marker set.
    pub fn cast_default() -> Self {
        parse_definitions(DEFAULT_DEFINITIONS).expect("bundled segment definitions are valid")
    }

    pub fn get(&self, segment: SegmentId) -> &SegmentDefinition {
        &self.defs[segment.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &SegmentDefinition> {
        self.defs.iter()
    }
}

pub fn parse_definitions(text: &str) -> Result<SegmentDefinitions> {
    let mut defs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let f: Vec<&str> = content.split_whitespace().collect();
        let segment: SegmentId = f[0].parse()?;
        let geometry = match f.get(1) {
            Some(&"hand") if f.len() == 4 => SegmentGeometry::HandFallback {
                wrist: f[2].into(),
                elbow: f[3].into(),
            },
            Some(&"hand") => {
                return Err(Error::ColumnCount {
                    line,
                    expected: 4,
                    found: f.len(),
                })
            }
            _ if f.len() == 8 => {
                let primary = match f[3] {
                    "z" => PrimaryAxis::Vertical,
                    "x" => PrimaryAxis::AnteroPosterior,
                    other => {
                        return Err(Error::InvalidDefinitions(format!(
                            "line {line}: unknown axis `{other}`"
                        )))
                    }
                };
                SegmentGeometry::Frame {
                    origin: f[1].into(),
                    distal: f[2].into(),
                    axes: AxisRule {
                        primary,
                        primary_from: f[4].into(),
                        primary_to: f[5].into(),
                        left_from: f[6].into(),
                        left_to: f[7].into(),
                    },
                }
            }
            _ => {
                return Err(Error::ColumnCount {
                    line,
                    expected: 8,
                    found: f.len(),
                })
            }
        };
        defs.push(SegmentDefinition { segment, geometry });
    }
    SegmentDefinitions::new(defs)
}

pub fn write_definitions(defs: &SegmentDefinitions) -> String {
    let mut out = String::new();
    for d in defs.iter() {
        match &d.geometry {
            SegmentGeometry::Frame {
                origin,
                distal,
                axes,
            } => {
                let axis = match axes.primary {
                    PrimaryAxis::Vertical => "z",
                    PrimaryAxis::AnteroPosterior => "x",
                };
                let _ = writeln!(
                    out,
                    "{}\t{origin}\t{distal}\t{axis}\t{}\t{}\t{}\t{}",
                    d.segment, axes.primary_from, axes.primary_to, axes.left_from, axes.left_to
                );
            }
            SegmentGeometry::HandFallback { wrist, elbow } => {
                let _ = writeln!(out, "{}\thand\t{wrist}\t{elbow}", d.segment);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentState {
    pub origin_m: Vector3<f64>,
    /// Columns `u_x` (AP), `u_y` (ML, towards the left), `u_z` (vertical).
    pub basis: Matrix3<f64>,
    pub length_m: f64,
    pub com_m: Vector3<f64>,
}

#[derive(Debug, Clone)]
enum PointExpr {
    Marker(usize),
    Joint { from: usize, to: usize, fraction: f64 },
}

/// Resolves marker and joint-centre names to positions frame by frame.
struct PointResolver<'a> {
    traj: &'a MarkerTrajectorySet,
    rules: HashMap<&'a str, &'a crate::anthro::JointRule>,
    exprs: Vec<PointExpr>,
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl<'a> PointResolver<'a> {
    fn new(
        traj: &'a MarkerTrajectorySet,
        table: &'a AnthropometricTable,
        subject: &SubjectProfile,
    ) -> Self {
        PointResolver {
            traj,
            rules: table
                .joints_for(subject.sex)
                .map(|j| (j.name.as_str(), j))
                .collect(),
            exprs: Vec::new(),
            names: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn compile(&mut self, name: &str) -> Result<usize> {
        self.compile_depth(name, 0)
    }

    fn compile_depth(&mut self, name: &str, depth: usize) -> Result<usize> {
        if let Some(&i) = self.index.get(name) {
            return Ok(i);
        }
        if depth > 64 {
            return Err(Error::InvalidDefinitions(format!(
                "joint `{name}` is defined in terms of itself"
            )));
        }
        let expr = if let Some(m) = self.traj.marker_index(name) {
            PointExpr::Marker(m)
        } else if let Some(rule) = self.rules.get(name).copied() {
            let from = self.compile_depth(&rule.from, depth + 1)?;
            let to = self.compile_depth(&rule.to, depth + 1)?;
            PointExpr::Joint {
                from,
                to,
                fraction: rule.fraction,
            }
        } else {
            return Err(Error::UnknownPoint(name.to_string()));
        };
        self.exprs.push(expr);
        self.names.push(name.to_string());
        let i = self.exprs.len() - 1;
        self.index.insert(name.to_string(), i);
        Ok(i)
    }

    fn eval(&self, point: usize, frame: usize) -> Result<Vector3<f64>> {
        match self.exprs[point] {
            PointExpr::Marker(m) => {
                self.traj
                    .track(m)
                    .get(frame)
                    .ok_or_else(|| Error::MissingMarker {
                        marker: self.names[point].clone(),
                        frame,
                    })
            }
            PointExpr::Joint { from, to, fraction } => {
                let a = self.eval(from, frame)?;
                let b = self.eval(to, frame)?;
                Ok(a + (b - a) * fraction)
            }
        }
    }
}

enum CompiledGeometry {
    Frame {
        origin: usize,
        distal: usize,
        primary: PrimaryAxis,
        primary_from: usize,
        primary_to: usize,
        left_from: usize,
        left_to: usize,
    },
    Hand {
        wrist: usize,
        elbow: usize,
    },
}

struct CompiledSegment {
    segment: SegmentId,
    geometry: CompiledGeometry,
    offsets: [f64; 3],
}

fn compile_segment(
    resolver: &mut PointResolver<'_>,
    def: &SegmentDefinition,
    table: &AnthropometricTable,
    subject: &SubjectProfile,
) -> Result<CompiledSegment> {
    let geometry = match &def.geometry {
        SegmentGeometry::Frame {
            origin,
            distal,
            axes,
        } => CompiledGeometry::Frame {
            origin: resolver.compile(origin)?,
            distal: resolver.compile(distal)?,
            primary: axes.primary,
            primary_from: resolver.compile(&axes.primary_from)?,
            primary_to: resolver.compile(&axes.primary_to)?,
            left_from: resolver.compile(&axes.left_from)?,
            left_to: resolver.compile(&axes.left_to)?,
        },
        SegmentGeometry::HandFallback { wrist, elbow } => CompiledGeometry::Hand {
            wrist: resolver.compile(wrist)?,
            elbow: resolver.compile(elbow)?,
        },
    };
    Ok(CompiledSegment {
        segment: def.segment,
        geometry,
        offsets: table.offsets(def.segment, subject.sex),
    })
}

/// Right-handed orthonormal basis from a primary direction and a reference
/// pointing to the left.
fn build_basis(primary: PrimaryAxis, along: Vector3<f64>, left: Vector3<f64>) -> Result<Matrix3<f64>> {
    let (na, nl) = (along.norm(), left.norm());
    if na == 0.0 || nl == 0.0 {
        return Err(Error::DegenerateBasis("zero-length axis".into()));
    }
    let sin = along.cross(&left).norm() / (na * nl);
    if !(sin >= MIN_AXIS_ANGLE_RAD.sin()) {
        return Err(Error::DegenerateBasis(format!(
            "axis markers nearly collinear (angle {:.2e} rad)",
            sin.asin()
        )));
    }
    let (ux, uz) = match primary {
        PrimaryAxis::Vertical => {
            let uz = along / na;
            (left.cross(&uz).normalize(), uz)
        }
        PrimaryAxis::AnteroPosterior => {
            let ux = along / na;
            (ux, ux.cross(&left).normalize())
        }
    };
    let uy = uz.cross(&ux);
    Ok(Matrix3::from_columns(&[ux, uy, uz]))
}

/// Any orthonormal right-handed basis whose third column is `uz`.
fn complete_basis(uz: Vector3<f64>) -> Matrix3<f64> {
    let helper = if uz.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let uy = uz.cross(&helper).normalize();
    let ux = uy.cross(&uz);
    Matrix3::from_columns(&[ux, uy, uz])
}

/// Hand CoM from the wrist and elbow joint centres: the hand extends the
/// forearm direction beyond the wrist by 0.74 forearm lengths, with its CoM
/// at the hand midpoint.
pub fn hand_com(wrist_center: Vector3<f64>, elbow_center: Vector3<f64>) -> Result<Vector3<f64>> {
    let forearm = wrist_center - elbow_center;
    if !(forearm.norm() > 0.0) {
        return Err(Error::CoincidentPoints("wrist and elbow centres".into()));
    }
    Ok(wrist_center + forearm * (HAND_COM_FRACTION * HAND_LENGTH_RATIO))
}

fn evaluate(
    resolver: &PointResolver<'_>,
    seg: &CompiledSegment,
    frame: usize,
) -> Result<SegmentState> {
    match seg.geometry {
        CompiledGeometry::Frame {
            origin,
            distal,
            primary,
            primary_from,
            primary_to,
            left_from,
            left_to,
        } => {
            let origin_m = resolver.eval(origin, frame)?;
            let distal_m = resolver.eval(distal, frame)?;
            let along = resolver.eval(primary_to, frame)? - resolver.eval(primary_from, frame)?;
            let left = resolver.eval(left_to, frame)? - resolver.eval(left_from, frame)?;
            let basis = build_basis(primary, along, left)?;
            let length_m = (origin_m - distal_m).norm();
            let [ap, ml, si] = seg.offsets;
            let local = basis.column(0) * ap + basis.column(1) * ml + basis.column(2) * si;
            Ok(SegmentState {
                origin_m,
                basis,
                length_m,
                com_m: origin_m + local * length_m,
            })
        }
        CompiledGeometry::Hand { wrist, elbow } => {
            let w = resolver.eval(wrist, frame)?;
            let e = resolver.eval(elbow, frame)?;
            let com_m = hand_com(w, e)?;
            let forearm = w - e;
            Ok(SegmentState {
                origin_m: w,
                basis: complete_basis(-forearm.normalize()),
                length_m: HAND_LENGTH_RATIO * forearm.norm(),
                com_m,
            })
        }
    }
}

/// State of one segment at one frame.
pub fn segment_state(
    traj: &MarkerTrajectorySet,
    def: &SegmentDefinition,
    table: &AnthropometricTable,
    subject: &SubjectProfile,
    frame: usize,
) -> Result<SegmentState> {
    let wrap = |e| Error::Segment {
        segment: def.segment,
        frame,
        source: Box::new(e),
    };
    let mut resolver = PointResolver::new(traj, table, subject);
    let seg = compile_segment(&mut resolver, def, table, subject).map_err(wrap)?;
    evaluate(&resolver, &seg, frame).map_err(wrap)
}

/// Per-segment and whole-body centre-of-mass tracks.
#[derive(Debug, Clone, PartialEq)]
pub struct ComTrajectory {
    sample_rate_hz: f64,
    start_time_s: f64,
    segment_coms: Vec<[Vector3<f64>; SegmentId::COUNT]>,
    segment_masses_kg: [f64; SegmentId::COUNT],
    whole_body: Vec<Vector3<f64>>,
}

impl ComTrajectory {
    /// Builds the trajectory from per-frame segment CoMs; the whole-body
    /// track is their mass-weighted mean.
    pub fn from_segment_coms(
        sample_rate_hz: f64,
        start_time_s: f64,
        segment_coms: Vec<[Vector3<f64>; SegmentId::COUNT]>,
        segment_masses_kg: [f64; SegmentId::COUNT],
    ) -> Result<Self> {
        let total: f64 = segment_masses_kg.iter().sum();
        if !(total > 0.0) || segment_masses_kg.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::InvalidSubject("segment masses must be nonnegative with a positive sum".into()));
        }
        let whole_body = segment_coms
            .iter()
            .map(|coms| {
                let mut acc = Vector3::zeros();
                for (r, &m) in coms.iter().zip(&segment_masses_kg) {
                    acc += r * m;
                }
                acc / total
            })
            .collect();
        Ok(ComTrajectory {
            sample_rate_hz,
            start_time_s,
            segment_coms,
            segment_masses_kg,
            whole_body,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn start_time_s(&self) -> f64 {
        self.start_time_s
    }

    pub fn frame_count(&self) -> usize {
        self.whole_body.len()
    }

    pub fn whole_body(&self) -> &[Vector3<f64>] {
        &self.whole_body
    }

    pub fn segment_com(&self, frame: usize, segment: SegmentId) -> Vector3<f64> {
        self.segment_coms[frame][segment.index()]
    }

    /// The `3 x 16 x N` segment grid, frame-major.
    pub fn segment_coms(&self) -> &[[Vector3<f64>; SegmentId::COUNT]] {
        &self.segment_coms
    }

    pub fn segment_masses_kg(&self) -> &[f64; SegmentId::COUNT] {
        &self.segment_masses_kg
    }

    pub fn total_mass_kg(&self) -> f64 {
        self.segment_masses_kg.iter().sum()
    }

    /// Track of one segment's CoM.
    pub fn segment_track(&self, segment: SegmentId) -> Vec<Vector3<f64>> {
        self.segment_coms
            .iter()
            .map(|c| c[segment.index()])
            .collect()
    }

    pub fn whole_body_series(&self) -> Result<UniformSeries> {
        UniformSeries::from_vectors(self.sample_rate_hz, &self.whole_body)
    }
}

/// Evaluates every segment frame by frame and combines them into the
/// whole-body CoM.
pub fn com_trajectory(
    traj: &MarkerTrajectorySet,
    defs: &SegmentDefinitions,
    table: &AnthropometricTable,
    subject: &SubjectProfile,
) -> Result<ComTrajectory> {
    let mut resolver = PointResolver::new(traj, table, subject);
    let compiled = defs
        .iter()
        .map(|d| {
            compile_segment(&mut resolver, d, table, subject).map_err(|e| Error::Segment {
                segment: d.segment,
                frame: 0,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut masses = [0.0; SegmentId::COUNT];
    for seg in SegmentId::ALL {
        masses[seg.index()] = segment_mass(table, seg, subject);
    }

    let mut coms = Vec::with_capacity(traj.frame_count());
    for frame in 0..traj.frame_count() {
        let mut row = [Vector3::zeros(); SegmentId::COUNT];
        for seg in &compiled {
            let state = evaluate(&resolver, seg, frame).map_err(|e| Error::Segment {
                segment: seg.segment,
                frame,
                source: Box::new(e),
            })?;
            row[seg.segment.index()] = state.com_m;
        }
        coms.push(row);
    }
    ComTrajectory::from_segment_coms(traj.sample_rate_hz(), traj.start_time_s(), coms, masses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anthro::{load_table, Sex};
    use crate::ingest::MarkerTrack;
    use indexmap::IndexMap;

    fn single_frame(points: &[(&str, Vector3<f64>)]) -> MarkerTrajectorySet {
        let markers: IndexMap<String, MarkerTrack> = points
            .iter()
            .map(|(n, p)| (n.to_string(), MarkerTrack::from_positions(vec![*p])))
            .collect();
        MarkerTrajectorySet::new(200.0, 0.0, markers).unwrap()
    }

    fn table_with_thigh(offsets: [f64; 3]) -> AnthropometricTable {
        let mut text = crate::anthro::tests::uniform_table_text();
        text = text.replace(
            "thigh\tM\t0.0625\t0\t0\t0",
            &format!("thigh\tM\t0.0625\t{}\t{}\t{}", offsets[0], offsets[1], offsets[2]),
        );
        load_table(&text).unwrap()
    }

    fn thigh_def() -> SegmentDefinition {
        SegmentDefinition {
            segment: SegmentId::ThighRight,
            geometry: SegmentGeometry::Frame {
                origin: "HIP".into(),
                distal: "KNEE".into(),
                axes: AxisRule {
                    primary: PrimaryAxis::Vertical,
                    primary_from: "KNEE".into(),
                    primary_to: "HIP".into(),
                    left_from: "KNL".into(),
                    left_to: "KNM".into(),
                },
            },
        }
    }

    fn thigh_markers() -> MarkerTrajectorySet {
        single_frame(&[
            ("HIP", Vector3::zeros()),
            ("KNEE", Vector3::new(0.0, 0.0, -0.4)),
            ("KNL", Vector3::new(0.0, -0.05, -0.4)),
            ("KNM", Vector3::new(0.0, 0.05, -0.4)),
        ])
    }

    #[test]
    fn zero_offsets_put_com_at_origin() {
        let subject = SubjectProfile::new(70.0, 1.7, Sex::M).unwrap();
        let table = table_with_thigh([0.0; 3]);
        let s = segment_state(&thigh_markers(), &thigh_def(), &table, &subject, 0).unwrap();
        assert_eq!(s.com_m, s.origin_m);
    }

    #[test]
    fn axis_aligned_offset() {
        let subject = SubjectProfile::new(70.0, 1.7, Sex::M).unwrap();
        let table = table_with_thigh([0.0, 0.0, -0.5]);
        let s = segment_state(&thigh_markers(), &thigh_def(), &table, &subject, 0).unwrap();
        assert!((s.length_m - 0.4).abs() < 1e-15);
        assert!((s.basis - Matrix3::identity()).norm() < 1e-15);
        assert!((s.com_m - Vector3::new(0.0, 0.0, -0.2)).norm() < 1e-15);
    }

    #[test]
    fn collinear_axis_markers_rejected() {
        let subject = SubjectProfile::new(70.0, 1.7, Sex::M).unwrap();
        let table = table_with_thigh([0.0; 3]);
        let markers = single_frame(&[
            ("HIP", Vector3::zeros()),
            ("KNEE", Vector3::new(0.0, 0.0, -0.4)),
            ("KNL", Vector3::new(0.0, 0.0, -0.4)),
            ("KNM", Vector3::new(0.0, 1e-5, 0.0)),
        ]);
        let err = segment_state(&markers, &thigh_def(), &table, &subject, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::Segment { ref source, .. } if matches!(**source, Error::DegenerateBasis(_))
        ));
    }

    #[test]
    fn missing_marker_reported_with_frame() {
        let subject = SubjectProfile::new(70.0, 1.7, Sex::M).unwrap();
        let table = table_with_thigh([0.0; 3]);
        let mut markers: IndexMap<String, MarkerTrack> = IndexMap::new();
        for (n, p) in [
            ("HIP", Vector3::zeros()),
            ("KNEE", Vector3::new(0.0, 0.0, -0.4)),
            ("KNL", Vector3::new(0.0, -0.05, -0.4)),
            ("KNM", Vector3::new(0.0, 0.05, -0.4)),
        ] {
            markers.insert(
                n.into(),
                MarkerTrack {
                    positions: vec![p, p],
                    missing: vec![false, n == "KNM"],
                },
            );
        }
        let set = MarkerTrajectorySet::new(200.0, 0.0, markers).unwrap();
        let err = segment_state(&set, &thigh_def(), &table, &subject, 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("KNM") && msg.contains("frame 1"), "{msg}");
    }

    #[test]
    fn hand_fallback_examples() {
        let c = hand_com(Vector3::new(0.30, 0.0, 0.0), Vector3::zeros()).unwrap();
        assert!((c - Vector3::new(0.411, 0.0, 0.0)).norm() < 1e-15);
        let c = hand_com(Vector3::zeros(), Vector3::new(0.0, 0.0, 0.30)).unwrap();
        assert!((c - Vector3::new(0.0, 0.0, -0.111)).norm() < 1e-15);
        assert!(hand_com(Vector3::zeros(), Vector3::zeros()).is_err());
    }

    #[test]
    fn default_definitions_cover_all_segments() {
        let defs = SegmentDefinitions::cast_default();
        assert_eq!(defs.iter().count(), 16);
        let again = parse_definitions(&write_definitions(&defs)).unwrap();
        assert_eq!(again, defs);
    }

    #[test]
    fn definitions_reject_duplicates_and_gaps() {
        let text = write_definitions(&SegmentDefinitions::cast_default());
        let missing: String = text
            .lines()
            .filter(|l| !l.starts_with("pelvis"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(parse_definitions(&missing)
            .unwrap_err()
            .to_string()
            .contains("pelvis"));
        let dup = format!("{text}pelvis\thand\tA\tB\n");
        assert!(parse_definitions(&dup).is_err());
    }

    #[test]
    fn coincident_segment_coms_give_that_point() {
        let p = Vector3::new(0.3, -1.2, 0.9);
        let masses = {
            let mut m = [0.0; 16];
            for (i, v) in m.iter_mut().enumerate() {
                *v = 1.0 + i as f64;
            }
            m
        };
        let com = ComTrajectory::from_segment_coms(200.0, 0.0, vec![[p; 16]; 3], masses).unwrap();
        for w in com.whole_body() {
            assert!((w - p).norm() < 1e-15);
        }
    }

    #[test]
    fn unknown_joint_reference() {
        let subject = SubjectProfile::new(70.0, 1.7, Sex::M).unwrap();
        let table = table_with_thigh([0.0; 3]);
        let mut def = thigh_def();
        if let SegmentGeometry::Frame { origin, .. } = &mut def.geometry {
            *origin = "NOPE".into();
        }
        let err = segment_state(&thigh_markers(), &def, &table, &subject, 0).unwrap_err();
        assert!(err.to_string().contains("NOPE"));
    }
}
