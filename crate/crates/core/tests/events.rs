use std::f64::consts::PI;
use std::sync::OnceLock;

use kinegrf::anthro::Side;
use kinegrf::events::{
    build_timeline, detect_events_from_markers, detect_events_zeni, detect_stance_threshold, EventMarkers,
    FootEvents, PhaseKind,
};
use kinegrf::signal::UniformSeries;
use kinegrf::synth::{walker, WalkerParams};
use proptest::prelude::*;

const RATE: f64 = 200.0;

fn series(f: impl Fn(f64) -> f64, seconds: f64) -> UniformSeries {
    let n = (seconds * RATE).round() as usize;
    UniformSeries::single(RATE, (0..n).map(|k| f(k as f64 / RATE)).collect()).unwrap()
}

fn assert_near(found: &[usize], expected_s: &[f64], tol: usize) {
    assert_eq!(found.len(), expected_s.len(), "{found:?} vs {expected_s:?}");
    for (&f, &t) in found.iter().zip(expected_s) {
        let e = (t * RATE).round() as usize;
        assert!(f.abs_diff(e) <= tol, "frame {f}, expected {e}");
    }
}

#[test]
fn sinusoid_heel_strikes_and_toe_offs() {
    let sacrum = series(|t| 1.1 * t, 3.0);
    let rel = series(|t| 1.1 * t + (2.0 * PI * t).sin(), 3.0);
    let ev = detect_events_zeni(&rel, &rel, &sacrum, 0.5).unwrap();
    assert_near(&ev.heel_strikes, &[0.25, 1.25, 2.25], 1);
    assert_near(&ev.toe_offs, &[0.75, 1.75, 2.75], 1);
}

#[test]
fn threshold_intervals_follow_analytic_crossings() {
    let z = series(|t| 0.06 + 0.05 * (2.0 * PI * t).sin(), 3.0);
    let iv = detect_stance_threshold(&z, 0.06);
    // sin < 0 on (k + 0.5, k + 1) seconds.
    assert_eq!(iv.len(), 3);
    for (k, i) in iv.iter().enumerate() {
        let start = ((k as f64 + 0.5) * RATE).round() as usize;
        let end = ((k as f64 + 1.0) * RATE).round() as usize;
        assert!(i.start.abs_diff(start) <= 1, "{i:?}");
        assert!(i.end.abs_diff(end.min(599)) <= 1, "{i:?}");
    }
}

fn walk_10s() -> &'static kinegrf::synth::SyntheticWalk {
    static WALK: OnceLock<kinegrf::synth::SyntheticWalk> = OnceLock::new();
    WALK.get_or_init(|| {
        walker(&WalkerParams {
            duration_s: 10.0,
            ..WalkerParams::default()
        })
        .unwrap()
    })
}

fn max_event_error(found: &FootEvents, truth: &FootEvents) -> (usize, usize) {
    let pair = |a: &[usize], b: &[usize]| {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).max().unwrap_or(0)
    };
    (
        pair(&found.heel_strikes, &truth.heel_strikes).max(pair(&found.toe_offs, &truth.toe_offs)),
        found.heel_strikes.len() + found.toe_offs.len(),
    )
}

#[test]
fn generator_events_recovered_within_two_frames() {
    let walk = walk_10s();
    let found = detect_events_from_markers(&walk.markers, &EventMarkers::default(), 5.0, 4, 0.4).unwrap();
    let mut total = 0;
    for i in 0..2 {
        let (err, count) = max_event_error(&found[i], &walk.events[i]);
        assert!(err <= 2, "side {i}: error {err} frames");
        total += count;
    }
    assert!(total >= 20, "{total} events");
}

#[test]
fn walking_in_negative_direction_gives_same_events() {
    let walk = walk_10s();
    let n = walk.markers.frame_count();
    let mirrored = {
        let mut tracks = indexmap::IndexMap::new();
        for (name, track) in walk.markers.tracks() {
            let mut t = track.clone();
            for p in &mut t.positions {
                p.x = -p.x;
                p.y = -p.y;
            }
            tracks.insert(name.to_string(), t);
        }
        kinegrf::ingest::MarkerTrajectorySet::new(RATE, 0.0, tracks).unwrap()
    };
    let a = detect_events_from_markers(&walk.markers, &EventMarkers::default(), 5.0, 4, 0.4).unwrap();
    let b = detect_events_from_markers(&mirrored, &EventMarkers::default(), 5.0, 4, 0.4).unwrap();
    assert_eq!(a, b);
    assert_eq!(mirrored.frame_count(), n);
}

#[test]
fn timeline_labels_match_generator() {
    let walk = walk_10s();
    let n = walk.markers.frame_count();
    let found = detect_events_from_markers(&walk.markers, &EventMarkers::default(), 5.0, 4, 0.4).unwrap();
    let truth = build_timeline(&walk.events[0], &walk.events[1], n, RATE).unwrap();
    let detected = build_timeline(&found[0], &found[1], n, RATE).unwrap();
    assert_eq!(truth.phases().len(), detected.phases().len());
    for (a, b) in truth.phases().iter().zip(detected.phases()) {
        assert_eq!(a.kind, b.kind);
        assert_eq!(a.complete, b.complete);
        assert!(a.interval.start.abs_diff(b.interval.start) <= 2, "{a} vs {b}");
        assert!(a.interval.end.abs_diff(b.interval.end) <= 2, "{a} vs {b}");
    }
    // Scripted contact agrees with the truth timeline frame by frame, away
    // from the event frames themselves.
    let events: Vec<usize> = walk.events.iter().flat_map(|e| e.sequence()).map(|(f, _)| f).collect();
    for k in (0..n).filter(|k| !events.contains(k)) {
        let t = k as f64 / RATE;
        for side in [Side::Left, Side::Right] {
            if truth.phase_at(k).is_some_and(|p| p.complete) {
                assert_eq!(truth.in_stance(side, k), walk.in_stance(side, t), "frame {k} {side}");
            }
        }
    }
}

#[test]
fn timeline_structure_on_generator() {
    let walk = walk_10s();
    let n = walk.markers.frame_count();
    let tl = build_timeline(&walk.events[0], &walk.events[1], n, RATE).unwrap();
    // Phases tile the trial.
    assert_eq!(tl.phases()[0].interval.start, 0);
    assert_eq!(tl.phases().last().unwrap().interval.end, n - 1);
    for w in tl.phases().windows(2) {
        assert_eq!(w[0].interval.end + 1, w[1].interval.start);
    }
    // Complete DS: HS of the leading foot to TO of the other.
    let mut count = 0;
    for p in tl.double_stance().filter(|p| p.complete) {
        let lead = p.leading.unwrap();
        assert!(tl.events(lead).heel_strikes.contains(&p.interval.start));
        assert!(tl.events(lead.other()).toe_offs.contains(&p.interval.end));
        count += 1;
    }
    assert!(count >= 15, "{count}");
    assert!(tl.phases().iter().all(|p| p.kind != PhaseKind::Flight));
}

fn smooth_trace() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.6f64..1.6, 0.0f64..(2.0 * PI), 0.1f64..0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeni_ignores_common_offset(
        (fh, ph, ah) in smooth_trace(),
        (ft, pt, at) in smooth_trace(),
        speed in 0.5f64..1.8,
        offset in -50.0f64..50.0,
    ) {
        let sacrum = |t: f64| speed * t;
        let heel = move |t: f64| speed * t + ah * (2.0 * PI * fh * t + ph).sin();
        let toe = move |t: f64| speed * t + at * (2.0 * PI * ft * t + pt).sin();
        let base = detect_events_zeni(&series(heel, 4.0), &series(toe, 4.0), &series(sacrum, 4.0), 0.4).unwrap();
        let shifted = detect_events_zeni(
            &series(move |t| heel(t) + offset, 4.0),
            &series(move |t| toe(t) + offset, 4.0),
            &series(move |t| sacrum(t) + offset, 4.0),
            0.4,
        )
        .unwrap();
        prop_assert_eq!(base, shifted);
    }

    #[test]
    fn threshold_intervals_are_maximal_and_disjoint(
        z in prop::collection::vec(0.0f64..0.12, 2..300),
        thr in 0.01f64..0.11,
    ) {
        let s = UniformSeries::single(RATE, z.clone()).unwrap();
        let iv = detect_stance_threshold(&s, thr);
        let mut inside = vec![false; z.len()];
        for w in iv.windows(2) {
            prop_assert!(w[0].end + 1 < w[1].start);
        }
        for i in &iv {
            for k in i.start..=i.end {
                inside[k] = true;
            }
        }
        for k in 0..z.len() {
            prop_assert_eq!(inside[k], z[k] < thr);
        }
    }
}
