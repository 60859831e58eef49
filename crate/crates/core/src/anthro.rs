//! Segment inertial parameters.
//!
//! The table file holds one row per `(segment kind, sex)`:
//!
//! ```text
//! segment<TAB>sex<TAB>mass_ratio<TAB>P_AP<TAB>P_ML<TAB>P_SI
//! ```
//!
//! Offsets are fractions of segment length along the segment's
//! antero-posterior, medio-lateral and vertical axes. `P_ML` is given for the
//! right-side segment with the ML axis pointing to the subject's left; left
//! segments use the negated value.
//!
//! Joint-centre rules share the file as `joint<TAB>name<TAB>sex|*<TAB>from<TAB>to<TAB>fraction`,
//! placing the joint at `from + fraction * (to - from)`. `from` and `to` may
//! name markers or joints defined on earlier rows.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sex {
    F,
    M,
}

impl Sex {
    pub const ALL: [Sex; 2] = [Sex::F, Sex::M];
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::F => "F",
            Sex::M => "M",
        })
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "F" | "f" => Ok(Sex::F),
            "M" | "m" => Ok(Sex::M),
            other => Err(Error::InvalidSubject(format!("unknown sex `{other}`"))),
        }
    }
}

/// Segment kind shared by both sides of the body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentKind {
    HeadNeck,
    Thorax,
    Abdomen,
    Pelvis,
    UpperArm,
    Forearm,
    Hand,
    Thigh,
    Shank,
    Foot,
}

impl SegmentKind {
    pub const ALL: [SegmentKind; 10] = [
        SegmentKind::HeadNeck,
        SegmentKind::Thorax,
        SegmentKind::Abdomen,
        SegmentKind::Pelvis,
        SegmentKind::UpperArm,
        SegmentKind::Forearm,
        SegmentKind::Hand,
        SegmentKind::Thigh,
        SegmentKind::Shank,
        SegmentKind::Foot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SegmentKind::HeadNeck => "head_neck",
            SegmentKind::Thorax => "thorax",
            SegmentKind::Abdomen => "abdomen",
            SegmentKind::Pelvis => "pelvis",
            SegmentKind::UpperArm => "upper_arm",
            SegmentKind::Forearm => "forearm",
            SegmentKind::Hand => "hand",
            SegmentKind::Thigh => "thigh",
            SegmentKind::Shank => "shank",
            SegmentKind::Foot => "foot",
        }
    }

    pub fn is_bilateral(self) -> bool {
        !matches!(
            self,
            SegmentKind::HeadNeck | SegmentKind::Thorax | SegmentKind::Abdomen | SegmentKind::Pelvis
        )
    }
}

impl FromStr for SegmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SegmentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidTable(format!("unknown segment kind `{s}`")))
    }
}

/// One of the sixteen body segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentId {
    HeadNeck,
    Thorax,
    Abdomen,
    Pelvis,
    UpperArmLeft,
    UpperArmRight,
    ForearmLeft,
    ForearmRight,
    HandLeft,
    HandRight,
    ThighLeft,
    ThighRight,
    ShankLeft,
    ShankRight,
    FootLeft,
    FootRight,
}

impl SegmentId {
    pub const COUNT: usize = 16;

    pub const ALL: [SegmentId; 16] = [
        SegmentId::HeadNeck,
        SegmentId::Thorax,
        SegmentId::Abdomen,
        SegmentId::Pelvis,
        SegmentId::UpperArmLeft,
        SegmentId::UpperArmRight,
        SegmentId::ForearmLeft,
        SegmentId::ForearmRight,
        SegmentId::HandLeft,
        SegmentId::HandRight,
        SegmentId::ThighLeft,
        SegmentId::ThighRight,
        SegmentId::ShankLeft,
        SegmentId::ShankRight,
        SegmentId::FootLeft,
        SegmentId::FootRight,
    ];

    /// Position in [`SegmentId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn kind(self) -> SegmentKind {
        use SegmentId::*;
        match self {
            HeadNeck => SegmentKind::HeadNeck,
            Thorax => SegmentKind::Thorax,
            Abdomen => SegmentKind::Abdomen,
            Pelvis => SegmentKind::Pelvis,
            UpperArmLeft | UpperArmRight => SegmentKind::UpperArm,
            ForearmLeft | ForearmRight => SegmentKind::Forearm,
            HandLeft | HandRight => SegmentKind::Hand,
            ThighLeft | ThighRight => SegmentKind::Thigh,
            ShankLeft | ShankRight => SegmentKind::Shank,
            FootLeft | FootRight => SegmentKind::Foot,
        }
    }

    pub fn side(self) -> Option<Side> {
        use SegmentId::*;
        match self {
            HeadNeck | Thorax | Abdomen | Pelvis => None,
            UpperArmLeft | ForearmLeft | HandLeft | ThighLeft | ShankLeft | FootLeft => {
                Some(Side::Left)
            }
            _ => Some(Side::Right),
        }
    }

    pub fn foot(side: Side) -> SegmentId {
        match side {
            Side::Left => SegmentId::FootLeft,
            Side::Right => SegmentId::FootRight,
        }
    }

    pub fn name(self) -> String {
        match self.side() {
            None => self.kind().name().to_string(),
            Some(side) => format!("{}_{}", self.kind().name(), side),
        }
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SegmentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SegmentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidDefinitions(format!("unknown segment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentParams {
    pub mass_ratio: f64,
    /// `(P_AP, P_ML, P_SI)`, right-side convention for `P_ML`.
    pub offsets: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointRule {
    pub name: String,
    /// `None` applies to both sexes.
    pub sex: Option<Sex>,
    pub from: String,
    pub to: String,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnthropometricTable {
    entries: BTreeMap<(SegmentKind, Sex), SegmentParams>,
    joints: Vec<JointRule>,
}

/// Accepted band for the per-sex sum of the sixteen mass ratios.
pub const MASS_SUM_RANGE: (f64, f64) = (0.99, 1.01);

const REFERENCE_TABLE: &str = include_str!("../data/anthropometry_reference.tsv");

impl AnthropometricTable {
    pub fn new(
        entries: BTreeMap<(SegmentKind, Sex), SegmentParams>,
        joints: Vec<JointRule>,
    ) -> Result<Self> {
        let table = AnthropometricTable { entries, joints };
        table.validate()?;
        Ok(table)
    }

    /// The bundled reference table shipped in `data/`.
    pub fn reference() -> Self {
        load_table(REFERENCE_TABLE).expect("bundled anthropometric table is valid")
    }

    fn validate(&self) -> Result<()> {
        for sex in Sex::ALL {
            for kind in SegmentKind::ALL {
                let p = self.entries.get(&(kind, sex)).ok_or_else(|| {
                    Error::MissingSegmentEntry {
                        segment: kind.name().into(),
                        sex: sex.to_string(),
                    }
                })?;
                if !(p.mass_ratio > 0.0 && p.mass_ratio < 1.0) {
                    return Err(Error::InvalidTable(format!(
                        "mass ratio {} for {} ({sex}) outside (0, 1)",
                        p.mass_ratio,
                        kind.name()
                    )));
                }
                if p.offsets.iter().any(|o| !(o.abs() <= 1.0)) {
                    return Err(Error::InvalidTable(format!(
                        "offset of {} ({sex}) exceeds one segment length",
                        kind.name()
                    )));
                }
            }
            let sum = self.mass_ratio_sum(sex);
            if !(MASS_SUM_RANGE.0..=MASS_SUM_RANGE.1).contains(&sum) {
                return Err(Error::InvalidTable(format!(
                    "mass ratios for sex {sex} sum to {sum}, outside [{}, {}]",
                    MASS_SUM_RANGE.0, MASS_SUM_RANGE.1
                )));
            }
        }
        for (i, j) in self.joints.iter().enumerate() {
            if !j.fraction.is_finite() {
                return Err(Error::InvalidTable(format!(
                    "joint `{}` has a non-finite fraction",
                    j.name
                )));
            }
            if self.joints[..i]
                .iter()
                .any(|k| k.name == j.name && (k.sex.is_none() || j.sex.is_none() || k.sex == j.sex))
            {
                return Err(Error::InvalidTable(format!(
                    "joint `{}` defined twice",
                    j.name
                )));
            }
        }
        Ok(())
    }

    pub fn params(&self, kind: SegmentKind, sex: Sex) -> SegmentParams {
        self.entries[&(kind, sex)]
    }

    /// Offsets for a concrete segment, with the ML component mirrored for
    /// left-side segments.
    pub fn offsets(&self, segment: SegmentId, sex: Sex) -> [f64; 3] {
        let mut o = self.params(segment.kind(), sex).offsets;
        if segment.side() == Some(Side::Left) {
            o[1] = -o[1];
        }
        o
    }

    pub fn mass_ratio(&self, segment: SegmentId, sex: Sex) -> f64 {
        self.params(segment.kind(), sex).mass_ratio
    }

    /// Sum of mass ratios over all sixteen segments.
    pub fn mass_ratio_sum(&self, sex: Sex) -> f64 {
        SegmentId::ALL
            .iter()
            .map(|s| self.entries.get(&(s.kind(), sex)).map_or(0.0, |p| p.mass_ratio))
            .sum()
    }

    pub fn joints(&self) -> &[JointRule] {
        &self.joints
    }

    /// Joint rules that apply to `sex`, in file order.
    pub fn joints_for(&self, sex: Sex) -> impl Iterator<Item = &JointRule> {
        self.joints
            .iter()
            .filter(move |j| j.sex.is_none_or(|s| s == sex))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubjectProfile {
    pub total_mass_kg: f64,
    pub height_m: f64,
    pub sex: Sex,
}

impl SubjectProfile {
    pub fn new(total_mass_kg: f64, height_m: f64, sex: Sex) -> Result<Self> {
        if !(total_mass_kg.is_finite() && total_mass_kg > 0.0) {
            return Err(Error::InvalidSubject(format!(
                "total mass must be positive, got {total_mass_kg}"
            )));
        }
        if !(height_m.is_finite() && height_m > 0.0) {
            return Err(Error::InvalidSubject(format!(
                "height must be positive, got {height_m}"
            )));
        }
        Ok(SubjectProfile {
            total_mass_kg,
            height_m,
            sex,
        })
    }
}

/// Segment mass as a fraction of total body mass.
pub fn segment_mass(table: &AnthropometricTable, seg: SegmentId, subject: &SubjectProfile) -> f64 {
    subject.total_mass_kg * table.mass_ratio(seg, subject.sex)
}

fn number(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidNumber {
            line,
            value: field.to_string(),
        })
}

pub fn load_table(text: &str) -> Result<AnthropometricTable> {
    let mut entries = BTreeMap::new();
    let mut joints = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split('\t').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(Error::ColumnCount {
                line,
                expected: 6,
                found: fields.len(),
            });
        }
        if fields[0] == "joint" {
            let sex = match fields[2] {
                "*" => None,
                s => Some(s.parse()?),
            };
            joints.push(JointRule {
                name: fields[1].to_string(),
                sex,
                from: fields[3].to_string(),
                to: fields[4].to_string(),
                fraction: number(fields[5], line)?,
            });
            continue;
        }
        let kind: SegmentKind = fields[0].parse()?;
        let sex: Sex = fields[1].parse()?;
        let params = SegmentParams {
            mass_ratio: number(fields[2], line)?,
            offsets: [
                number(fields[3], line)?,
                number(fields[4], line)?,
                number(fields[5], line)?,
            ],
        };
        if entries.insert((kind, sex), params).is_some() {
            return Err(Error::InvalidTable(format!(
                "line {line}: duplicate row for {} ({sex})",
                kind.name()
            )));
        }
    }
    AnthropometricTable::new(entries, joints)
}

pub fn write_table(table: &AnthropometricTable) -> String {
    let mut out = String::from("# segment\tsex\tmass_ratio\tP_AP\tP_ML\tP_SI\n");
    for (&(kind, sex), p) in &table.entries {
        let _ = writeln!(
            out,
            "{}\t{sex}\t{}\t{}\t{}\t{}",
            kind.name(),
            p.mass_ratio,
            p.offsets[0],
            p.offsets[1],
            p.offsets[2]
        );
    }
    for j in &table.joints {
        let sex = j.sex.map_or("*".to_string(), |s| s.to_string());
        let _ = writeln!(
            out,
            "joint\t{}\t{sex}\t{}\t{}\t{}",
            j.name, j.from, j.to, j.fraction
        );
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Every ratio 1/16, zero offsets, both sexes.
    pub(crate) fn uniform_table_text() -> String {
        let mut s = String::new();
        for sex in ["F", "M"] {
            for kind in SegmentKind::ALL {
                s.push_str(&format!("{}\t{sex}\t0.0625\t0\t0\t0\n", kind.name()));
            }
        }
        s
    }

    #[test]
    fn uniform_table_loads() {
        let t = load_table(&uniform_table_text()).unwrap();
        assert_eq!(t.mass_ratio_sum(Sex::F), 1.0);
        assert_eq!(t.mass_ratio_sum(Sex::M), 1.0);
    }

    #[test]
    fn missing_pelvis_row_named() {
        let text: String = uniform_table_text()
            .lines()
            .filter(|l| !l.starts_with("pelvis"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = load_table(&text).unwrap_err();
        assert!(err.to_string().contains("pelvis"), "{err}");
    }

    #[test]
    fn mass_ratio_bounds_and_sum_checked() {
        let text = uniform_table_text().replacen("head_neck\tF\t0.0625", "head_neck\tF\t1.5", 1);
        assert!(matches!(load_table(&text), Err(Error::InvalidTable(_))));
        let text = uniform_table_text().replacen("head_neck\tF\t0.0625", "head_neck\tF\t0.2", 1);
        let err = load_table(&text).unwrap_err();
        assert!(err.to_string().contains("sum"), "{err}");
    }

    #[test]
    fn uniform_segment_mass() {
        let t = load_table(&uniform_table_text()).unwrap();
        let subject = SubjectProfile::new(80.0, 1.8, Sex::M).unwrap();
        for seg in SegmentId::ALL {
            assert_eq!(segment_mass(&t, seg, &subject), 5.0);
        }
    }

    #[test]
    fn ratio_times_participant_mass() {
        let mut text = uniform_table_text();
        text = text.replacen("thorax\tM\t0.0625", "thorax\tM\t0.1", 1);
        text = text.replacen("abdomen\tM\t0.0625", "abdomen\tM\t0.025", 1);
        let t = load_table(&text).unwrap();
        let subject = SubjectProfile::new(83.1, 1.745, Sex::M).unwrap();
        let m = segment_mass(&t, SegmentId::Thorax, &subject);
        assert!((m - 8.31).abs() < 1e-12, "{m}");
    }

    #[test]
    fn reference_table_sums_and_masses() {
        let t = AnthropometricTable::reference();
        for sex in Sex::ALL {
            let sum = t.mass_ratio_sum(sex);
            assert!((0.99..=1.01).contains(&sum), "{sex}: {sum}");
            let subject = SubjectProfile::new(70.0, 1.7, sex).unwrap();
            let total: f64 = SegmentId::ALL
                .iter()
                .map(|&s| segment_mass(&t, s, &subject))
                .sum();
            assert!((total - 70.0).abs() <= 0.7, "{total}");
        }
    }

    #[test]
    fn left_segments_mirror_ml_offset() {
        let t = AnthropometricTable::reference();
        let r = t.offsets(SegmentId::ThighRight, Sex::M);
        let l = t.offsets(SegmentId::ThighLeft, Sex::M);
        assert_eq!(r[0], l[0]);
        assert_eq!(r[1], -l[1]);
        assert_eq!(r[2], l[2]);
    }

    #[test]
    fn subject_validation() {
        assert!(SubjectProfile::new(0.0, 1.7, Sex::F).is_err());
        assert!(SubjectProfile::new(60.0, -1.0, Sex::F).is_err());
    }

    #[test]
    fn segment_id_names_round_trip() {
        for id in SegmentId::ALL {
            assert_eq!(id.name().parse::<SegmentId>().unwrap(), id);
        }
        assert_eq!(SegmentId::ALL.len(), 16);
    }
}
