//! Total ground reaction force from CoM acceleration and its split between
//! the legs during double stance.

use std::fmt::Write as _;

use nalgebra::{Vector2, Vector3};

use crate::anthro::{Side, SubjectProfile};
use crate::error::{Error, Result};
use crate::events::{GaitTimeline, PhaseKind};
use crate::kinematics::ComTrajectory;
use crate::signal::{differentiate, lowpass, remove_endpoint_trend, LowpassSpec, UniformSeries};

pub const DEFAULT_GRAVITY: f64 = 9.81;
/// Per-limb vertical force below `-NEGATIVE_FZ_FRACTION * m * g` is reported.
pub const NEGATIVE_FZ_FRACTION: f64 = 0.02;
pub const DEFAULT_BUTTERFLY_SCALE_M_PER_N: f64 = 0.001;

/// Forces in newtons, axes (AP, ML, vertical).
#[derive(Debug, Clone, PartialEq)]
pub struct GrfSeries {
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub force_n: Vec<Vector3<f64>>,
}

impl GrfSeries {
    pub fn new(sample_rate_hz: f64, start_time_s: f64, force_n: Vec<Vector3<f64>>) -> Result<Self> {
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(k) = force_n.iter().position(|f| !f.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite(format!("force at frame {k}")));
        }
        Ok(GrfSeries {
            sample_rate_hz,
            start_time_s,
            force_n,
        })
    }

    pub fn len(&self) -> usize {
        self.force_n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.force_n.is_empty()
    }

    pub fn time_of(&self, frame: usize) -> f64 {
        self.start_time_s + frame as f64 / self.sample_rate_hz
    }

    pub fn vertical(&self) -> Vec<f64> {
        self.force_n.iter().map(|f| f.z).collect()
    }

    pub fn to_series(&self) -> Result<UniformSeries> {
        UniformSeries::from_vectors(self.sample_rate_hz, &self.force_n)
    }
}

/// Second derivative of a position track. With a filter, each channel has its
/// endpoint line removed first so that large constant offsets never enter
/// the arithmetic of the filtered part.
pub fn com_acceleration(
    sample_rate_hz: f64,
    positions: &[Vector3<f64>],
    filter: Option<LowpassSpec>,
) -> Result<Vec<Vector3<f64>>> {
    let raw = UniformSeries::from_vectors(sample_rate_hz, positions)?;
    let smoothed = match filter {
        Some(spec) => {
            let residual = UniformSeries::new(
                sample_rate_hz,
                raw.channels()
                    .iter()
                    .map(|c| remove_endpoint_trend(c))
                    .collect(),
            )?;
            lowpass(&residual, spec.cutoff_hz, spec.order)?
        }
        None => raw,
    };
    Ok(differentiate(&smoothed, 2)?.to_vectors())
}

/// `F = m * (a + g * e_z)` from a whole-body CoM track.
pub fn total_grf_from_positions(
    sample_rate_hz: f64,
    start_time_s: f64,
    positions: &[Vector3<f64>],
    mass_kg: f64,
    gravity: f64,
    filter: Option<LowpassSpec>,
) -> Result<GrfSeries> {
    if !(mass_kg > 0.0) || !(gravity > 0.0) {
        return Err(Error::InvalidSeries(
            "mass and gravity must be positive".into(),
        ));
    }
    let accel = com_acceleration(sample_rate_hz, positions, filter)?;
    let g = Vector3::new(0.0, 0.0, gravity);
    GrfSeries::new(
        sample_rate_hz,
        start_time_s,
        accel.into_iter().map(|a| (a + g) * mass_kg).collect(),
    )
}

pub fn total_grf(
    com: &ComTrajectory,
    subject: &SubjectProfile,
    gravity: f64,
    filter: Option<LowpassSpec>,
) -> Result<GrfSeries> {
    total_grf_from_positions(
        com.sample_rate_hz(),
        com.start_time_s(),
        com.whole_body(),
        subject.total_mass_kg,
        gravity,
        filter,
    )
}

/// One double-stance interval: the leading leg has just struck and takes R2,
/// the trailing leg is about to lift and takes R1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsBoundary {
    pub t0_frame: usize,
    pub t1_frame: usize,
    pub sample_rate_hz: f64,
    pub leading_leg: Side,
}

impl DsBoundary {
    pub fn new(t0_frame: usize, t1_frame: usize, sample_rate_hz: f64, leading_leg: Side) -> Result<Self> {
        if t1_frame <= t0_frame {
            return Err(Error::InvalidBoundary(format!(
                "t1 frame {t1_frame} must follow t0 frame {t0_frame}"
            )));
        }
        if !(sample_rate_hz > 0.0) {
            return Err(Error::InvalidBoundary("sample rate must be positive".into()));
        }
        Ok(DsBoundary {
            t0_frame,
            t1_frame,
            sample_rate_hz,
            leading_leg,
        })
    }

    pub fn trailing_leg(&self) -> Side {
        self.leading_leg.other()
    }

    pub fn duration_s(&self) -> f64 {
        (self.t1_frame - self.t0_frame) as f64 / self.sample_rate_hz
    }

    pub fn sample_count(&self) -> usize {
        self.t1_frame - self.t0_frame + 1
    }

    fn check_span(&self, len: usize) -> Result<()> {
        if self.t1_frame >= len {
            return Err(Error::InvalidBoundary(format!(
                "frame {} outside series of {len} samples",
                self.t1_frame
            )));
        }
        Ok(())
    }
}

fn slice_series(total: &GrfSeries, b: &DsBoundary, force_n: Vec<Vector3<f64>>) -> GrfSeries {
    GrfSeries {
        sample_rate_hz: total.sample_rate_hz,
        start_time_s: total.time_of(b.t0_frame),
        force_n,
    }
}

/// Closed-form minimum rate-of-change split over `[t0, t1]`, per axis.
/// Returns `(R1, R2)`: trailing and leading leg forces.
///
/// With `s = (t - t0) / T_DS`, `R1 = (F + F(t0)) / 2 - s * (F(t1) + F(t0)) / 2`
/// and `R2 = F - R1`, which is the acceleration form multiplied through by
/// `m`. Both boundary values are exact zeros in floating point.
pub fn decompose_ds(
    total: &GrfSeries,
    boundary: &DsBoundary,
    mass_kg: f64,
) -> Result<(GrfSeries, GrfSeries)> {
    if !(mass_kg > 0.0) {
        return Err(Error::InvalidSeries("mass must be positive".into()));
    }
    boundary.check_span(total.len())?;
    let (k0, k1) = (boundary.t0_frame, boundary.t1_frame);
    let f0 = total.force_n[k0];
    let f1 = total.force_n[k1];
    let ramp = (f1 + f0) / 2.0;
    let span = (k1 - k0) as f64;
    let mut r1 = Vec::with_capacity(k1 - k0 + 1);
    let mut r2 = Vec::with_capacity(k1 - k0 + 1);
    for k in k0..=k1 {
        let f = total.force_n[k];
        let s = (k - k0) as f64 / span;
        let trailing = (f + f0) / 2.0 - ramp * s;
        r1.push(trailing);
        r2.push(f - trailing);
    }
    Ok((slice_series(total, boundary, r1), slice_series(total, boundary, r2)))
}

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        assert!(denom != 0.0, "singular tridiagonal system");
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Exact minimiser of `sum (dR1)^2 + (dR2)^2` over the samples subject to
/// `R1 + R2 = F`, `R1(t0) = F(t0)` and `R1(t1) = 0`, for one axis.
pub fn minimise_rate_of_change(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3, "need at least three samples");
    // J(x) = sum_k (x[k+1]-x[k])^2 + (x[k+1]-x[k]-g_k)^2 with g_k = f[k+1]-f[k].
    // Accumulate the normal equations H x = b term by term.
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    let mut b = vec![0.0; n];
    for k in 0..n - 1 {
        let g = f[k + 1] - f[k];
        // Each of the two squares adds [[2, -2], [-2, 2]] to the Hessian.
        diag[k] += 4.0;
        diag[k + 1] += 4.0;
        off[k] -= 4.0;
        // The cross term -2 g (x[k+1] - x[k]) of the second square.
        b[k + 1] += 2.0 * g;
        b[k] -= 2.0 * g;
    }
    let pinned = [f[0], 0.0];
    let m = n - 2;
    let mut lower = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        let k = i + 1;
        rhs[i] = b[k];
        if i > 0 {
            lower[i] = off[k - 1];
        } else {
            rhs[i] -= off[k - 1] * pinned[0];
        }
        if i + 1 < m {
            upper[i] = off[k];
        } else {
            rhs[i] -= off[k] * pinned[1];
        }
    }
    let interior = solve_tridiagonal(&lower, &diag[1..n - 1], &upper, &rhs);
    let mut x = Vec::with_capacity(n);
    x.push(pinned[0]);
    x.extend(interior);
    x.push(pinned[1]);
    x
}

/// Independent discrete solution of the same split, via a linear solve.
pub fn decompose_ds_oracle(total: &GrfSeries, boundary: &DsBoundary) -> Result<(GrfSeries, GrfSeries)> {
    boundary.check_span(total.len())?;
    if boundary.sample_count() < 3 {
        return Err(Error::SeriesTooShort {
            needed: 3,
            got: boundary.sample_count(),
        });
    }
    let window = &total.force_n[boundary.t0_frame..=boundary.t1_frame];
    let axes: Vec<Vec<f64>> = (0..3)
        .map(|a| minimise_rate_of_change(&window.iter().map(|f| f[a]).collect::<Vec<_>>()))
        .collect();
    let r1: Vec<Vector3<f64>> = (0..window.len())
        .map(|k| Vector3::new(axes[0][k], axes[1][k], axes[2][k]))
        .collect();
    let r2 = window.iter().zip(&r1).map(|(f, r)| f - r).collect();
    Ok((slice_series(total, boundary, r1), slice_series(total, boundary, r2)))
}

/// Discrete index `sum_k |R1[k+1]-R1[k]|^2 + |R2[k+1]-R2[k]|^2`.
pub fn rate_of_change_index(r1: &[Vector3<f64>], r2: &[Vector3<f64>]) -> f64 {
    let sq = |x: &[Vector3<f64>]| -> f64 {
        x.windows(2).map(|w| (w[1] - w[0]).norm_squared()).sum()
    };
    sq(r1) + sq(r2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub frame: usize,
    pub message: String,
}

/// Total and per-limb forces over a trial. Per-limb values are meaningful
/// only where `analyzed` is set; elsewhere they hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct BilateralGrf {
    pub total: GrfSeries,
    pub left: GrfSeries,
    pub right: GrfSeries,
    pub timeline: GaitTimeline,
    pub mass_kg: f64,
    pub gravity_mps2: f64,
    pub analyzed: Vec<bool>,
    pub ds_boundaries: Vec<DsBoundary>,
    pub diagnostics: Vec<Diagnostic>,
}

impl BilateralGrf {
    pub fn limb(&self, side: Side) -> &GrfSeries {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn body_weight_n(&self) -> f64 {
        self.mass_kg * self.gravity_mps2
    }

    /// Largest componentwise |left + right - total| over analyzed frames.
    pub fn max_constraint_residual(&self) -> f64 {
        (0..self.total.len())
            .filter(|&k| self.analyzed[k])
            .map(|k| (self.left.force_n[k] + self.right.force_n[k] - self.total.force_n[k]).amax())
            .fold(0.0, f64::max)
    }
}

pub fn decompose_gait(
    total: &GrfSeries,
    timeline: &GaitTimeline,
    mass_kg: f64,
    gravity: f64,
) -> Result<BilateralGrf> {
    decompose_gait_with_flags(total, timeline, mass_kg, gravity, None)
}

/// Splits the total force over every phase of the timeline. Single-stance
/// phases give the whole force to the stance leg. Complete double-stance
/// phases use [`decompose_ds`] unless an endpoint is in `flagged` (frames
/// reconstructed from gaps), in which case the interval is left unanalyzed.
/// Flight and incomplete double stance are never analyzed.
pub fn decompose_gait_with_flags(
    total: &GrfSeries,
    timeline: &GaitTimeline,
    mass_kg: f64,
    gravity: f64,
    flagged: Option<&[bool]>,
) -> Result<BilateralGrf> {
    let n = total.len();
    if timeline.frame_count() != n {
        return Err(Error::SeriesMismatch(format!(
            "timeline covers {} frames, force series has {n}",
            timeline.frame_count()
        )));
    }
    if flagged.is_some_and(|f| f.len() != n) {
        return Err(Error::SeriesMismatch("flag mask length differs".into()));
    }
    let is_flagged = |k: usize| flagged.is_some_and(|f| f[k]);
    let mut left = vec![Vector3::zeros(); n];
    let mut right = vec![Vector3::zeros(); n];
    let mut analyzed = vec![false; n];
    let mut ds_boundaries = Vec::new();
    let mut diagnostics = Vec::new();

    for phase in timeline.phases() {
        let iv = phase.interval;
        match phase.kind {
            PhaseKind::SingleStanceLeft | PhaseKind::SingleStanceRight => {
                let dest = if phase.kind == PhaseKind::SingleStanceLeft {
                    &mut left
                } else {
                    &mut right
                };
                for k in iv.start..=iv.end {
                    dest[k] = total.force_n[k];
                    analyzed[k] = true;
                }
            }
            PhaseKind::DoubleStance => {
                let Some(leading) = phase.leading.filter(|_| phase.complete) else {
                    diagnostics.push(Diagnostic {
                        frame: iv.start,
                        message: format!("{phase} excluded: incomplete double stance"),
                    });
                    continue;
                };
                if is_flagged(iv.start) || is_flagged(iv.end) {
                    diagnostics.push(Diagnostic {
                        frame: iv.start,
                        message: format!("{phase} excluded: boundary frame reconstructed from a gap"),
                    });
                    continue;
                }
                let b = DsBoundary::new(iv.start, iv.end, total.sample_rate_hz, leading)?;
                let (r1, r2) = decompose_ds(total, &b, mass_kg)?;
                let (lead, trail) = match leading {
                    Side::Left => (&mut left, &mut right),
                    Side::Right => (&mut right, &mut left),
                };
                for (i, k) in (iv.start..=iv.end).enumerate() {
                    trail[k] = r1.force_n[i];
                    lead[k] = r2.force_n[i];
                    analyzed[k] = true;
                }
                ds_boundaries.push(b);
            }
            PhaseKind::Flight => {
                diagnostics.push(Diagnostic {
                    frame: iv.start,
                    message: format!("{phase} excluded: no foot in contact"),
                });
            }
        }
    }

    let limit = -NEGATIVE_FZ_FRACTION * mass_kg * gravity;
    for k in (0..n).filter(|&k| analyzed[k]) {
        for (side, f) in [(Side::Left, &left[k]), (Side::Right, &right[k])] {
            if f.z < limit {
                diagnostics.push(Diagnostic {
                    frame: k,
                    message: format!("{side} vertical force {:.3} N below -2% body weight", f.z),
                });
            }
        }
    }
    diagnostics.sort_by_key(|d| d.frame);

    let rate = total.sample_rate_hz;
    let start = total.start_time_s;
    Ok(BilateralGrf {
        total: total.clone(),
        left: GrfSeries::new(rate, start, left)?,
        right: GrfSeries::new(rate, start, right)?,
        timeline: timeline.clone(),
        mass_kg,
        gravity_mps2: gravity,
        analyzed,
        ds_boundaries,
        diagnostics,
    })
}

/// GRF CSV: time, total, left, right, phase label. Per-limb fields are empty
/// on frames that were not analyzed.
pub fn write_grf_csv(bilateral: &BilateralGrf) -> String {
    let mut out =
        String::from("time_s,Fx_total,Fy_total,Fz_total,Fx_L,Fy_L,Fz_L,Fx_R,Fy_R,Fz_R,phase_label\n");
    for k in 0..bilateral.total.len() {
        let t = bilateral.total.force_n[k];
        let _ = write!(out, "{},{},{},{}", bilateral.total.time_of(k), t.x, t.y, t.z);
        for limb in [&bilateral.left, &bilateral.right] {
            if bilateral.analyzed[k] {
                let f = limb.force_n[k];
                let _ = write!(out, ",{},{},{}", f.x, f.y, f.z);
            } else {
                out.push_str(",,,");
            }
        }
        let label = bilateral
            .timeline
            .phase_at(k)
            .map(|p| p.label())
            .unwrap_or_default();
        let _ = writeln!(out, ",{label}");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyEntry {
    pub frame: usize,
    pub side: Side,
    /// Ground projection of the stance foot's CoM.
    pub base_m: Vector2<f64>,
    pub force_n: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyDiagram {
    pub entries: Vec<ButterflyEntry>,
    /// Display length per newton.
    pub scale_m_per_n: f64,
}

impl ButterflyDiagram {
    pub fn tip(&self, e: &ButterflyEntry) -> Vector3<f64> {
        Vector3::new(e.base_m.x, e.base_m.y, 0.0) + e.force_n * self.scale_m_per_n
    }

    pub fn entries_for(&self, side: Side) -> impl Iterator<Item = &ButterflyEntry> {
        self.entries.iter().filter(move |e| e.side == side)
    }
}

/// One vector per analyzed stance frame per stance foot, anchored at the
/// foot CoM dropped to the ground.
pub fn butterfly(
    bilateral: &BilateralGrf,
    foot_coms: [&[Vector3<f64>]; 2],
    scale_m_per_n: f64,
) -> Result<ButterflyDiagram> {
    let n = bilateral.total.len();
    if foot_coms.iter().any(|c| c.len() != n) {
        return Err(Error::SeriesMismatch(
            "foot CoM tracks must match the force series length".into(),
        ));
    }
    let mut entries = Vec::new();
    for k in (0..n).filter(|&k| bilateral.analyzed[k]) {
        for (slot, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            if bilateral.timeline.in_stance(side, k) {
                let c = foot_coms[slot][k];
                entries.push(ButterflyEntry {
                    frame: k,
                    side,
                    base_m: Vector2::new(c.x, c.y),
                    force_n: bilateral.limb(side).force_n[k],
                });
            }
        }
    }
    Ok(ButterflyDiagram {
        entries,
        scale_m_per_n,
    })
}

pub fn write_butterfly_csv(diagram: &ButterflyDiagram) -> String {
    let mut out = String::from("base_x,base_y,tip_x,tip_y,tip_z,foot\n");
    for e in &diagram.entries {
        let tip = diagram.tip(e);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.base_m.x,
            e.base_m.y,
            tip.x,
            tip.y,
            tip.z,
            e.side.tag()
        );
    }
    out
}

/// Sagittal-plane SVG: AP position horizontally, vertical force upward.
pub fn write_butterfly_svg(diagram: &ButterflyDiagram) -> String {
    const PX_PER_M: f64 = 200.0;
    const MARGIN: f64 = 20.0;
    let pts = diagram
        .entries
        .iter()
        .flat_map(|e| {
            let tip = diagram.tip(e);
            [(e.base_m.x, 0.0), (tip.x, tip.z)]
        });
    let (mut x0, mut x1, mut z0, mut z1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, (x, z)) in pts.enumerate() {
        if i == 0 {
            (x0, x1) = (x, x);
        }
        x0 = x0.min(x);
        x1 = x1.max(x);
        z0 = z0.min(z);
        z1 = z1.max(z);
    }
    let width = (x1 - x0) * PX_PER_M + 2.0 * MARGIN;
    let height = (z1 - z0) * PX_PER_M + 2.0 * MARGIN;
    let px = |x: f64| (x - x0) * PX_PER_M + MARGIN;
    let pz = |z: f64| (z1 - z) * PX_PER_M + MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.3}\" height=\"{height:.3}\" viewBox=\"0 0 {width:.3} {height:.3}\">"
    );
    let _ = writeln!(
        out,
        "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"1\"/>",
        px(x0),
        pz(0.0),
        px(x1),
        pz(0.0)
    );
    for side in [Side::Left, Side::Right] {
        let colour = match side {
            Side::Left => "blue",
            Side::Right => "red",
        };
        let _ = writeln!(out, "<g id=\"{side}\" stroke=\"{colour}\" stroke-width=\"0.5\">");
        for e in diagram.entries_for(side) {
            let tip = diagram.tip(e);
            let _ = writeln!(
                out,
                "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\"/>",
                px(e.base_m.x),
                pz(0.0),
                px(tip.x),
                pz(tip.z)
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{build_timeline, FootEvents};

    fn constant(n: usize, f: Vector3<f64>) -> GrfSeries {
        GrfSeries::new(200.0, 0.0, vec![f; n]).unwrap()
    }

    #[test]
    fn stationary_com_weight() {
        let pos = vec![Vector3::new(0.3, -0.1, 0.95); 50];
        let f = total_grf_from_positions(200.0, 0.0, &pos, 83.1, 9.81, None).unwrap();
        for v in &f.force_n {
            assert_eq!(v.x, 0.0);
            assert_eq!(v.y, 0.0);
            assert!((v.z - 815.211).abs() < 1e-9);
        }
    }

    #[test]
    fn free_fall_has_no_force() {
        let pos: Vec<_> = (0..100)
            .map(|k| {
                let t = k as f64 / 200.0;
                Vector3::new(0.0, 0.0, 10.0 - 0.5 * 9.81 * t * t)
            })
            .collect();
        let f = total_grf_from_positions(200.0, 0.0, &pos, 70.0, 9.81, None).unwrap();
        assert!(f.force_n[1..99].iter().all(|v| v.norm() < 1e-6));
    }

    #[test]
    fn constant_force_crossfade() {
        let f0 = Vector3::new(10.0, -4.0, 800.0);
        let total = constant(21, f0);
        let b = DsBoundary::new(0, 20, 200.0, Side::Right).unwrap();
        let (r1, r2) = decompose_ds(&total, &b, 80.0).unwrap();
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            assert!((r1.force_n[k] - f0 * (1.0 - s)).amax() < 1e-12);
            assert!((r2.force_n[k] - f0 * s).amax() < 1e-12);
        }
        assert_eq!(r2.force_n[0], Vector3::zeros());
        assert_eq!(r1.force_n[20], Vector3::zeros());
    }

    #[test]
    fn zero_duration_rejected() {
        assert!(DsBoundary::new(5, 5, 200.0, Side::Left).is_err());
    }

    #[test]
    fn three_sample_oracle_matches_grid_search() {
        let f = [700.0, 900.0, 650.0];
        let x = minimise_rate_of_change(&f);
        let j = |x1: f64| {
            let r1 = [f[0], x1, 0.0];
            let r2 = [0.0, f[1] - x1, f[2]];
            (r1[1] - r1[0]).powi(2) + (r1[2] - r1[1]).powi(2) + (r2[1] - r2[0]).powi(2) + (r2[2] - r2[1]).powi(2)
        };
        let best = (0..=200_000)
            .map(|i| -500.0 + i as f64 * 0.01)
            .min_by(|a, b| j(*a).total_cmp(&j(*b)))
            .unwrap();
        assert!((x[1] - best).abs() <= 0.01, "{} vs {best}", x[1]);
    }

    #[test]
    fn gait_single_stance_left_only() {
        let tl = crate::events::build_timeline_from_stance(
            &[crate::events::FrameInterval { start: 0, end: 9 }],
            &[],
            10,
            200.0,
        )
        .unwrap();
        let total = constant(10, Vector3::new(1.0, 2.0, 700.0));
        let g = decompose_gait(&total, &tl, 70.0, 9.81).unwrap();
        assert!(g.analyzed.iter().all(|&a| a));
        assert_eq!(g.left.force_n, total.force_n);
        assert!(g.right.force_n.iter().all(|f| *f == Vector3::zeros()));
    }

    #[test]
    fn gait_handoff_ramp() {
        // Left stance until 60, right from 40: SS_L, DS [40, 60], SS_R.
        let left = FootEvents {
            heel_strikes: vec![],
            toe_offs: vec![60],
        };
        let right = FootEvents {
            heel_strikes: vec![40],
            toe_offs: vec![],
        };
        let tl = build_timeline(&left, &right, 100, 200.0).unwrap();
        let f0 = Vector3::new(0.0, 0.0, 800.0);
        let g = decompose_gait(&constant(100, f0), &tl, 80.0, 9.81).unwrap();
        assert_eq!(g.ds_boundaries.len(), 1);
        for k in 40..=60 {
            let s = (k - 40) as f64 / 20.0;
            assert!((g.left.force_n[k].z - 800.0 * (1.0 - s)).abs() < 1e-9);
            assert!((g.right.force_n[k].z - 800.0 * s).abs() < 1e-9);
        }
        assert_eq!(g.left.force_n[39], f0);
        assert_eq!(g.right.force_n[61], f0);
        assert_eq!(g.max_constraint_residual(), 0.0);
    }

    #[test]
    fn flagged_boundary_refused() {
        let left = FootEvents {
            heel_strikes: vec![],
            toe_offs: vec![60],
        };
        let right = FootEvents {
            heel_strikes: vec![40],
            toe_offs: vec![],
        };
        let tl = build_timeline(&left, &right, 100, 200.0).unwrap();
        let mut flags = vec![false; 100];
        flags[60] = true;
        let g = decompose_gait_with_flags(&constant(100, Vector3::z() * 800.0), &tl, 80.0, 9.81, Some(&flags))
            .unwrap();
        assert!(g.ds_boundaries.is_empty());
        assert!(!g.analyzed[50]);
        assert!(g.diagnostics.iter().any(|d| d.message.contains("gap")));
    }

    #[test]
    fn butterfly_single_frame() {
        let tl = crate::events::build_timeline_from_stance(
            &[crate::events::FrameInterval { start: 0, end: 1 }],
            &[],
            2,
            200.0,
        )
        .unwrap();
        let total = constant(2, Vector3::new(0.0, 0.0, 700.0));
        let g = decompose_gait(&total, &tl, 70.0, 9.81).unwrap();
        let foot = vec![Vector3::new(1.0, 2.0, 0.05); 2];
        let swing = vec![Vector3::zeros(); 2];
        let d = butterfly(&g, [&foot, &swing], 0.001).unwrap();
        assert_eq!(d.entries.len(), 2);
        assert_eq!(d.entries[0].base_m, Vector2::new(1.0, 2.0));
        assert!((d.tip(&d.entries[0]) - Vector3::new(1.0, 2.0, 0.7)).amax() < 1e-12);
        let csv = write_butterfly_csv(&d);
        assert!(csv.starts_with("base_x,base_y,tip_x,tip_y,tip_z,foot\n1,2,1,2,"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",L"));
        assert!(write_butterfly_svg(&d).contains("stroke=\"blue\""));
    }
}
