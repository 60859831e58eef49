//! Synthetic walking trials with scripted events and a prescribed whole-body
//! CoM, plus matching force-plate data and a force-level two-leg generator.

use std::f64::consts::PI;

use indexmap::IndexMap;
use nalgebra::{Vector2, Vector3};

use crate::anthro::{segment_mass, AnthropometricTable, SegmentId, Sex, Side, SubjectProfile};
use crate::error::{Error, Result};
use crate::events::FootEvents;
use crate::grf::GrfSeries;
use crate::ingest::{ForcePlateSeries, MarkerTrack, MarkerTrajectorySet, PlateRecord};
use crate::kinematics::{com_trajectory, SegmentDefinitions};

const THIGH_M: f64 = 0.46;
const SHANK_M: f64 = 0.45;
const UPPER_ARM_M: f64 = 0.30;
const FOREARM_M: f64 = 0.26;
const ANKLE_HEIGHT_M: f64 = 0.075;
const FOOT_HALF_WIDTH_M: f64 = 0.08;
const SWING_LIFT_M: f64 = 0.10;
const ARM_SWING_RAD: f64 = 0.25;
const ELBOW_FLEXION_RAD: f64 = 0.2;

/// Marker names in file order.
pub const MARKER_NAMES: [&str; 40] = [
    "LFHD", "RFHD", "LBHD", "RBHD", "C7", "T12", "CLAV", "STRN", "RBAK", "LSHO", "RSHO", "LELL",
    "LELM", "RELL", "RELM", "LWRR", "LWRU", "RWRR", "RWRU", "LASI", "RASI", "LPSI", "RPSI", "SACR",
    "LGTR", "RGTR", "LKNL", "LKNM", "RKNL", "RKNM", "LANL", "LANM", "RANL", "RANM", "LHEE", "RHEE",
    "LTOE", "RTOE", "LMT5", "RMT5",
];

/// Markers carried by the head, trunk and arms. These are shifted together to
/// steer the whole-body CoM onto its prescribed path.
const UPPER_BODY: [&str; 19] = [
    "LFHD", "RFHD", "LBHD", "RBHD", "C7", "T12", "CLAV", "STRN", "RBAK", "LSHO", "RSHO", "LELL",
    "LELM", "RELL", "RELM", "LWRR", "LWRU", "RWRR", "RWRU",
];

#[derive(Debug, Clone, PartialEq)]
pub struct WalkerParams {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub speed_mps: f64,
    pub cycle_s: f64,
    /// Stance as a fraction of the cycle; double stance lasts `stance - 0.5`.
    pub stance_fraction: f64,
    /// Time of the first left heel strike.
    pub first_heel_strike_s: f64,
    pub pelvis_height_m: f64,
    /// Vertical CoM excursion amplitude (twice per cycle).
    pub vertical_amplitude_m: f64,
    /// Fore-aft CoM oscillation about constant speed (twice per cycle).
    pub ap_amplitude_m: f64,
    /// Side-to-side sway amplitude (once per cycle).
    pub lateral_amplitude_m: f64,
    pub subject: SubjectProfile,
}

impl Default for WalkerParams {
    fn default() -> Self {
        WalkerParams {
            sample_rate_hz: 200.0,
            duration_s: 5.0,
            speed_mps: 1.1,
            cycle_s: 1.1,
            stance_fraction: 0.6,
            first_heel_strike_s: 0.2,
            pelvis_height_m: 0.97,
            vertical_amplitude_m: 0.02,
            ap_amplitude_m: 0.01,
            lateral_amplitude_m: 0.015,
            subject: SubjectProfile {
                total_mass_kg: 83.1,
                height_m: 1.745,
                sex: Sex::M,
            },
        }
    }
}

fn lateral_sign(side: Side) -> f64 {
    match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    }
}

/// Closed-form timing and limb kinematics of the walker.
#[derive(Debug, Clone)]
struct Gait {
    p: WalkerParams,
}

impl Gait {
    fn period(&self) -> f64 {
        self.p.cycle_s
    }

    fn stance_s(&self) -> f64 {
        self.p.stance_fraction * self.p.cycle_s
    }

    fn double_stance_s(&self) -> f64 {
        (self.p.stance_fraction - 0.5) * self.p.cycle_s
    }

    fn swing_s(&self) -> f64 {
        self.period() - self.stance_s()
    }

    /// Phase of the twice-per-cycle CoM oscillation; zero mid double stance.
    fn phase(&self, t: f64) -> f64 {
        let centre = self.p.first_heel_strike_s + self.double_stance_s() / 2.0;
        2.0 * PI * (t - centre) / (self.period() / 2.0)
    }

    fn phase_rate(&self) -> f64 {
        4.0 * PI / self.period()
    }

    fn lateral_phase(&self, t: f64) -> f64 {
        // Peak sway toward the left foot at left mid-stance.
        let left_mid = self.p.first_heel_strike_s + self.stance_s() / 2.0;
        2.0 * PI * (t - left_mid) / self.period() + PI / 2.0
    }

    fn pelvis_centre(&self, t: f64) -> Vector3<f64> {
        let phi = self.phase(t);
        Vector3::new(
            self.p.speed_mps * t + self.p.ap_amplitude_m * phi.sin(),
            0.0,
            self.p.pelvis_height_m - self.p.vertical_amplitude_m * phi.cos(),
        )
    }

    fn sacrum_speed(&self, t: f64) -> f64 {
        self.p.speed_mps + self.p.ap_amplitude_m * self.phase_rate() * self.phase(t).cos()
    }

    fn first_strike(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.p.first_heel_strike_s,
            Side::Right => self.p.first_heel_strike_s + self.period() / 2.0,
        }
    }

    /// Index of the stride whose heel strike is the latest one at or before `t`,
    /// and the time since that strike.
    fn stride_of(&self, side: Side, t: f64) -> (f64, f64) {
        let t_hs0 = self.first_strike(side);
        let k = ((t - t_hs0) / self.period()).floor();
        (k, t - (t_hs0 + k * self.period()))
    }

    /// Ankle x position during stance `k`: under the hip at mid-stance.
    fn placement(&self, side: Side, k: f64) -> f64 {
        let t_hs = self.first_strike(side) + k * self.period();
        self.p.speed_mps * (t_hs + self.stance_s() / 2.0)
    }

    /// Ankle joint centre. The foot stays flat; in swing it travels one stride
    /// with a velocity that starts and ends at twice the sacrum speed.
    fn ankle(&self, side: Side, t: f64) -> Vector3<f64> {
        let (k, tau) = self.stride_of(side, t);
        let y = lateral_sign(side) * FOOT_HALF_WIDTH_M;
        let x0 = self.placement(side, k);
        if tau <= self.stance_s() {
            return Vector3::new(x0, y, ANKLE_HEIGHT_M);
        }
        let ts = self.swing_s();
        let s = (tau - self.stance_s()) / ts;
        let stride = self.p.speed_mps * self.period();
        let end_speed = 2.0 * self.sacrum_speed(self.first_strike(side));
        let boost = stride / ts - end_speed;
        let x = x0 + ts * (end_speed * s + boost * raised_cosine_integral(s));
        Vector3::new(x, y, ANKLE_HEIGHT_M + SWING_LIFT_M * (PI * s).sin().powi(2))
    }

    fn arm_angle(&self, side: Side, t: f64) -> f64 {
        let a = -ARM_SWING_RAD
            * (2.0 * PI * (t - self.p.first_heel_strike_s) / self.period()).cos();
        lateral_sign(side) * a
    }

    /// Scripted heel-strike and toe-off frames inside `[0, frame_count)`.
    fn events(&self, frame_count: usize) -> [FootEvents; 2] {
        let rate = self.p.sample_rate_hz;
        let mut out: [FootEvents; 2] = Default::default();
        for (slot, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let first = self.first_strike(side);
            let mut k = -((first / self.period()).ceil() + 1.0);
            loop {
                let hs = first + k * self.period();
                let to = hs + self.stance_s();
                if hs * rate > frame_count as f64 {
                    break;
                }
                for (t, list) in [
                    (hs, &mut out[slot].heel_strikes),
                    (to, &mut out[slot].toe_offs),
                ] {
                    let f = (t * rate).round();
                    if f >= 0.0 && (f as usize) < frame_count {
                        list.push(f as usize);
                    }
                }
                k += 1.0;
            }
            out[slot].toe_offs.sort_unstable();
        }
        out
    }
}

/// Integral from 0 to `s` of `w(u) = 2 (1 - cos(4 pi (u - 1/4)))` on
/// `[1/4, 3/4]` and zero elsewhere; reaches 1 at `s = 1`.
fn raised_cosine_integral(s: f64) -> f64 {
    let u = (s - 0.25).clamp(0.0, 0.5);
    2.0 * u - (4.0 * PI * u).sin() / (2.0 * PI)
}

/// Knee centre for a two-link leg in the sagittal plane, bending forward.
fn knee(hip: Vector3<f64>, ankle: Vector3<f64>) -> Vector3<f64> {
    let d = ankle - hip;
    let dist = (d.x * d.x + d.z * d.z).sqrt();
    if dist >= THIGH_M + SHANK_M {
        return hip + d * (THIGH_M / dist);
    }
    let (ux, uz) = (d.x / dist, d.z / dist);
    let cos_a = (THIGH_M * THIGH_M + dist * dist - SHANK_M * SHANK_M) / (2.0 * THIGH_M * dist);
    let sin_a = (1.0 - cos_a * cos_a).max(0.0).sqrt();
    // (-uz, ux) points forward when the leg hangs down.
    let dir_x = cos_a * ux + sin_a * -uz;
    let dir_z = cos_a * uz + sin_a * ux;
    Vector3::new(
        hip.x + THIGH_M * dir_x,
        hip.y + d.y * THIGH_M / (THIGH_M + SHANK_M),
        hip.z + THIGH_M * dir_z,
    )
}

fn arm_markers(side: Side, shoulder: Vector3<f64>, angle: f64, out: &mut Vec<(&'static str, Vector3<f64>)>) {
    let y = Vector3::new(0.0, lateral_sign(side), 0.0);
    let upper = Vector3::new(angle.sin(), 0.0, -angle.cos());
    let fore_angle = angle + ELBOW_FLEXION_RAD;
    let fore = Vector3::new(fore_angle.sin(), 0.0, -fore_angle.cos());
    let elbow = shoulder + upper * UPPER_ARM_M;
    let wrist = elbow + fore * FOREARM_M;
    // The shoulder-centre rule puts the centre a tenth of the way from the
    // shoulder marker to the elbow centre.
    let sho = shoulder - upper * (UPPER_ARM_M / 9.0);
    let (names, wrist_pair) = match side {
        Side::Left => (["LSHO", "LELL", "LELM"], ["LWRR", "LWRU"]),
        Side::Right => (["RSHO", "RELL", "RELM"], ["RWRR", "RWRU"]),
    };
    out.push((names[0], sho));
    out.push((names[1], elbow + y * 0.035));
    out.push((names[2], elbow - y * 0.035));
    // Radial marker lateral, ulnar medial.
    out.push((wrist_pair[0], wrist + y * 0.03));
    out.push((wrist_pair[1], wrist - y * 0.03));
}

fn leg_markers(side: Side, hip: Vector3<f64>, ankle: Vector3<f64>, out: &mut Vec<(&'static str, Vector3<f64>)>) {
    let lat = Vector3::new(0.0, lateral_sign(side), 0.0);
    let k = knee(hip, ankle);
    let names = match side {
        Side::Left => ["LKNL", "LKNM", "LANL", "LANM", "LHEE", "LTOE", "LMT5"],
        Side::Right => ["RKNL", "RKNM", "RANL", "RANM", "RHEE", "RTOE", "RMT5"],
    };
    out.push((names[0], k + lat * 0.05));
    out.push((names[1], k - lat * 0.05));
    out.push((names[2], ankle + lat * 0.035));
    out.push((names[3], ankle - lat * 0.035));
    out.push((names[4], ankle + Vector3::new(-0.06, 0.0, -0.04)));
    out.push((names[5], ankle + Vector3::new(0.15, 0.0, -0.045)));
    out.push((names[6], ankle + Vector3::new(0.12, 0.0, -0.05) + lat * 0.04));
}

/// Full marker set for a body whose pelvis centre is `pc`, with the given
/// ankle centres and arm angles.
fn pose(pc: Vector3<f64>, ankles: [Vector3<f64>; 2], arm_angles: [f64; 2]) -> Vec<(&'static str, Vector3<f64>)> {
    let at = |x: f64, y: f64, z: f64| pc + Vector3::new(x, y, z);
    let mut m = vec![
        ("LFHD", at(0.09, 0.07, 0.78)),
        ("RFHD", at(0.09, -0.07, 0.78)),
        ("LBHD", at(-0.08, 0.07, 0.80)),
        ("RBHD", at(-0.08, -0.07, 0.80)),
        ("C7", at(-0.08, 0.0, 0.55)),
        ("T12", at(-0.12, 0.0, 0.28)),
        ("CLAV", at(0.08, 0.0, 0.50)),
        ("STRN", at(0.10, 0.0, 0.32)),
        ("RBAK", at(-0.10, -0.08, 0.42)),
        ("LASI", at(0.06, 0.12, 0.05)),
        ("RASI", at(0.06, -0.12, 0.05)),
        ("LPSI", at(-0.11, 0.045, 0.07)),
        ("RPSI", at(-0.11, -0.045, 0.07)),
        ("SACR", at(-0.12, 0.0, 0.06)),
        ("LGTR", at(0.0, 0.16, -0.07)),
        ("RGTR", at(0.0, -0.16, -0.07)),
    ];
    for (i, side) in [Side::Left, Side::Right].into_iter().enumerate() {
        let y = lateral_sign(side);
        arm_markers(side, at(-0.01, 0.19 * y, 0.47), arm_angles[i], &mut m);
        leg_markers(side, at(0.0, 0.08 * y, -0.07), ankles[i], &mut m);
    }
    m
}

fn to_trajectory_set(
    rate: f64,
    frames: &[Vec<(&'static str, Vector3<f64>)>],
    upper_shift: Option<&[Vector3<f64>]>,
) -> Result<MarkerTrajectorySet> {
    let mut tracks: IndexMap<String, Vec<Vector3<f64>>> = MARKER_NAMES
        .iter()
        .map(|n| (n.to_string(), Vec::with_capacity(frames.len())))
        .collect();
    for (k, frame) in frames.iter().enumerate() {
        for &(name, p) in frame {
            let shift = match upper_shift {
                Some(d) if UPPER_BODY.contains(&name) => d[k],
                _ => Vector3::zeros(),
            };
            tracks
                .get_mut(name)
                .ok_or_else(|| Error::Invariant(format!("unlisted marker {name}")))?
                .push(p + shift);
        }
    }
    MarkerTrajectorySet::new(
        rate,
        0.0,
        tracks
            .into_iter()
            .map(|(n, p)| (n, MarkerTrack::from_positions(p)))
            .collect(),
    )
}

/// Generated trial and its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticWalk {
    pub params: WalkerParams,
    pub markers: MarkerTrajectorySet,
    /// Scripted events per foot (left, right).
    pub events: [FootEvents; 2],
    /// Constant part of the prescribed CoM path.
    pub com_offset_m: Vector3<f64>,
    /// Largest |computed CoM - prescribed CoM| after steering.
    pub com_residual_m: f64,
    gait: Gait,
}

impl SyntheticWalk {
    /// Prescribed whole-body CoM.
    pub fn target_com(&self, t: f64) -> Vector3<f64> {
        target_shape(&self.gait, t) + self.com_offset_m
    }

    /// Analytic second derivative of [`Self::target_com`].
    pub fn target_com_acceleration(&self, t: f64) -> Vector3<f64> {
        let g = &self.gait;
        let phi = g.phase(t);
        let w = g.phase_rate();
        let w_lat = 2.0 * PI / g.period();
        Vector3::new(
            -g.p.ap_amplitude_m * w * w * phi.sin(),
            -g.p.lateral_amplitude_m * w_lat * w_lat * g.lateral_phase(t).sin(),
            g.p.vertical_amplitude_m * w * w * phi.cos(),
        )
    }

    /// Ankle joint centre of `side` at time `t`.
    pub fn ankle(&self, side: Side, t: f64) -> Vector3<f64> {
        self.gait.ankle(side, t)
    }

    /// Whether `side` is on the ground at time `t`.
    pub fn in_stance(&self, side: Side, t: f64) -> bool {
        self.gait.stride_of(side, t).1 <= self.gait.stance_s()
    }
}

fn target_shape(g: &Gait, t: f64) -> Vector3<f64> {
    let phi = g.phase(t);
    Vector3::new(
        g.p.speed_mps * t + g.p.ap_amplitude_m * phi.sin(),
        g.p.lateral_amplitude_m * g.lateral_phase(t).sin(),
        -g.p.vertical_amplitude_m * phi.cos(),
    )
}

fn check_params(p: &WalkerParams) -> Result<()> {
    let ok = p.sample_rate_hz > 0.0
        && p.duration_s > 0.0
        && p.cycle_s > 0.0
        && p.speed_mps > 0.0
        && p.stance_fraction > 0.5
        && p.stance_fraction < 1.0;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidSeries(format!("invalid walker parameters: {p:?}")))
    }
}

/// Walking trial whose whole-body CoM, as computed by this crate's segment
/// model with the reference table, follows the prescribed path to within
/// roundoff. Limb motion is scripted; head, trunk and arms are translated to
/// absorb the difference.
pub fn walker(params: &WalkerParams) -> Result<SyntheticWalk> {
    check_params(params)?;
    let gait = Gait { p: params.clone() };
    let rate = params.sample_rate_hz;
    let n = (params.duration_s * rate).round() as usize;
    let times: Vec<f64> = (0..n).map(|k| k as f64 / rate).collect();
    let frames: Vec<_> = times
        .iter()
        .map(|&t| {
            pose(
                gait.pelvis_centre(t),
                [gait.ankle(Side::Left, t), gait.ankle(Side::Right, t)],
                [gait.arm_angle(Side::Left, t), gait.arm_angle(Side::Right, t)],
            )
        })
        .collect();

    let table = AnthropometricTable::reference();
    let defs = SegmentDefinitions::cast_default();
    let subject = &params.subject;
    let upper_mass: f64 = [
        SegmentId::HeadNeck,
        SegmentId::Thorax,
        SegmentId::UpperArmLeft,
        SegmentId::UpperArmRight,
        SegmentId::ForearmLeft,
        SegmentId::ForearmRight,
        SegmentId::HandLeft,
        SegmentId::HandRight,
    ]
    .iter()
    .map(|&s| segment_mass(&table, s, subject))
    .sum::<f64>()
        + 0.5 * segment_mass(&table, SegmentId::Abdomen, subject);
    let total_mass: f64 = SegmentId::ALL
        .iter()
        .map(|&s| segment_mass(&table, s, subject))
        .sum();
    let gain = total_mass / upper_mass;

    let mut shift = vec![Vector3::zeros(); n];
    let mut offset = None;
    let mut residual = f64::INFINITY;
    for _ in 0..60 {
        let set = to_trajectory_set(rate, &frames, Some(&shift))?;
        let com = com_trajectory(&set, &defs, &table, subject)?;
        let offset = *offset.get_or_insert_with(|| {
            let sum: Vector3<f64> = times
                .iter()
                .zip(com.whole_body())
                .map(|(&t, c)| c - target_shape(&gait, t))
                .sum();
            sum / n as f64
        });
        residual = 0.0;
        for (k, (&t, c)) in times.iter().zip(com.whole_body()).enumerate() {
            let err = target_shape(&gait, t) + offset - c;
            residual = residual.max(err.amax());
            shift[k] += err * gain;
        }
        if residual < 1e-12 {
            break;
        }
    }
    // `shift` has taken one more step than the last measured CoM; rebuild
    // from it and measure once more.
    let markers = to_trajectory_set(rate, &frames, Some(&shift))?;
    let offset = offset.unwrap_or_else(Vector3::zeros);
    let com = com_trajectory(&markers, &defs, &table, subject)?;
    residual = residual.min(
        times
            .iter()
            .zip(com.whole_body())
            .map(|(&t, c)| (target_shape(&gait, t) + offset - c).amax())
            .fold(0.0, f64::max),
    );
    Ok(SyntheticWalk {
        events: gait.events(n),
        params: params.clone(),
        markers,
        com_offset_m: offset,
        com_residual_m: residual,
        gait,
    })
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// Fraction of the instantaneous load carried by `side`: 1 in its single
/// stance, 0 in swing, a smoothstep crossfade through double stance.
fn load_share(walk: &SyntheticWalk, side: Side, t: f64) -> f64 {
    let g = &walk.gait;
    if !walk.in_stance(side, t) {
        return 0.0;
    }
    let (_, tau) = g.stride_of(side, t);
    let ds = g.double_stance_s();
    if tau < ds {
        smoothstep(tau / ds)
    } else if tau > g.stance_s() - ds {
        1.0 - smoothstep((tau - (g.stance_s() - ds)) / ds)
    } else {
        1.0
    }
}

/// Two force plates (left foot, right foot) consistent with the walker's
/// prescribed CoM: the total is `m (a + g)` from the analytic acceleration,
/// shared between the feet. Centre of pressure is the ankle ground point.
pub fn walker_force_plates(
    walk: &SyntheticWalk,
    sample_rate_hz: f64,
    gravity: f64,
    noise_floor_n: f64,
) -> Result<ForcePlateSeries> {
    let n = (walk.params.duration_s * sample_rate_hz).round() as usize;
    let m = walk.params.subject.total_mass_kg;
    let mut plates: Vec<PlateRecord> = (0..2)
        .map(|_| PlateRecord {
            force_n: Vec::with_capacity(n),
            cop_m: Vec::with_capacity(n),
        })
        .collect();
    for k in 0..n {
        let t = k as f64 / sample_rate_hz;
        let total = (walk.target_com_acceleration(t) + Vector3::new(0.0, 0.0, gravity)) * m;
        let shares = [
            load_share(walk, Side::Left, t),
            load_share(walk, Side::Right, t),
        ];
        let sum: f64 = shares.iter().sum();
        for (p, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let a = walk.ankle(side, t);
            plates[p].force_n.push(total * (shares[p] / sum));
            plates[p].cop_m.push(Vector2::new(a.x, a.y));
        }
    }
    ForcePlateSeries::new(sample_rate_hz, 0.0, plates, noise_floor_n)
}

/// Motionless standing pose.
pub fn static_pose(sample_rate_hz: f64, frame_count: usize) -> Result<MarkerTrajectorySet> {
    let pc = Vector3::new(0.0, 0.0, 0.97);
    let ankle = |side| Vector3::new(0.0, lateral_sign(side) * FOOT_HALF_WIDTH_M, ANKLE_HEIGHT_M);
    let frame = pose(pc, [ankle(Side::Left), ankle(Side::Right)], [0.0, 0.0]);
    to_trajectory_set(sample_rate_hz, &vec![frame; frame_count], None)
}

/// Per-leg forces with known ground truth, built directly at force level.
#[derive(Debug, Clone)]
pub struct TwoLegForces {
    pub total: GrfSeries,
    pub left: GrfSeries,
    pub right: GrfSeries,
    pub events: [FootEvents; 2],
    pub body_weight_n: f64,
}

/// Each stance produces a double-hump vertical force, a braking-then-propulsive
/// AP force and a small lateral force; the total is their sum.
pub fn two_leg_forces(params: &WalkerParams, gravity: f64) -> Result<TwoLegForces> {
    check_params(params)?;
    let gait = Gait { p: params.clone() };
    let rate = params.sample_rate_hz;
    let n = (params.duration_s * rate).round() as usize;
    let bw = params.subject.total_mass_kg * gravity;
    let leg = |side: Side, t: f64| -> Vector3<f64> {
        let (_, tau) = gait.stride_of(side, t);
        if tau > gait.stance_s() {
            return Vector3::zeros();
        }
        let s = tau / gait.stance_s();
        let vertical = 1.15 * ((PI * s).sin() + 0.25 * (3.0 * PI * s).sin());
        let ap = -0.2 * (2.0 * PI * s).sin();
        let ml = -lateral_sign(side) * 0.05 * (PI * s).sin();
        Vector3::new(ap, ml, vertical) * bw
    };
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / rate;
        left.push(leg(Side::Left, t));
        right.push(leg(Side::Right, t));
    }
    let total = left.iter().zip(&right).map(|(l, r)| l + r).collect();
    Ok(TwoLegForces {
        total: GrfSeries::new(rate, 0.0, total)?,
        left: GrfSeries::new(rate, 0.0, left)?,
        right: GrfSeries::new(rate, 0.0, right)?,
        events: gait.events(n),
        body_weight_n: bw,
    })
}
