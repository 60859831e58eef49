use std::sync::OnceLock;

use indexmap::IndexMap;
use kinegrf::anthro::{load_table, segment_mass, write_table, AnthropometricTable, SegmentId, Sex, SubjectProfile};
use kinegrf::ingest::{MarkerTrack, MarkerTrajectorySet};
use kinegrf::kinematics::{
    com_trajectory, hand_com, parse_definitions, segment_state, write_definitions, ComTrajectory, SegmentDefinitions,
};
use kinegrf::synth::{walker, SyntheticWalk, WalkerParams};
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn short_walk() -> &'static SyntheticWalk {
    static WALK: OnceLock<SyntheticWalk> = OnceLock::new();
    WALK.get_or_init(|| {
        walker(&WalkerParams {
            duration_s: 0.6,
            ..WalkerParams::default()
        })
        .unwrap()
    })
}

fn subject() -> SubjectProfile {
    WalkerParams::default().subject
}

fn transformed(set: &MarkerTrajectorySet, f: impl Fn(Vector3<f64>) -> Vector3<f64>) -> MarkerTrajectorySet {
    let tracks: IndexMap<String, MarkerTrack> = set
        .tracks()
        .map(|(n, t)| (n.to_string(), MarkerTrack::from_positions(t.positions.iter().map(|&p| f(p)).collect())))
        .collect();
    MarkerTrajectorySet::new(set.sample_rate_hz(), set.start_time_s(), tracks).unwrap()
}

fn com(set: &MarkerTrajectorySet) -> ComTrajectory {
    com_trajectory(set, &SegmentDefinitions::cast_default(), &AnthropometricTable::reference(), &subject()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn com_follows_rigid_motion(
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in -3.1f64..3.1,
        shift in prop::array::uniform3(-5.0f64..5.0),
    ) {
        let axis = Vector3::from(axis);
        prop_assume!(axis.norm() > 0.1);
        let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        let v = Vector3::from(shift);
        let base = com(&short_walk().markers);
        let moved = com(&transformed(&short_walk().markers, |p| r * p + v));
        for k in 0..base.frame_count() {
            prop_assert!((moved.whole_body()[k] - (r * base.whole_body()[k] + v)).amax() <= 1e-9);
            for seg in SegmentId::ALL {
                let expect = r * base.segment_com(k, seg) + v;
                prop_assert!((moved.segment_com(k, seg) - expect).amax() <= 1e-9, "{}", seg);
            }
        }
    }

    #[test]
    fn translation_moves_whole_body_by_the_same_vector(shift in prop::array::uniform3(-100.0f64..100.0)) {
        let v = Vector3::from(shift);
        let base = com(&short_walk().markers);
        let moved = com(&short_walk().markers.translated(v));
        for k in 0..base.frame_count() {
            prop_assert!((moved.whole_body()[k] - base.whole_body()[k] - v).amax() <= 1e-12 * (1.0 + v.amax()));
        }
    }

    #[test]
    fn hand_com_sits_at_fixed_fraction_beyond_wrist(
        wrist in prop::array::uniform3(-2.0f64..2.0),
        elbow in prop::array::uniform3(-2.0f64..2.0),
    ) {
        let (w, e) = (Vector3::from(wrist), Vector3::from(elbow));
        prop_assume!((w - e).norm() > 1e-3);
        let c = hand_com(w, e).unwrap();
        prop_assert!(((c - w).norm() - 0.37 * (w - e).norm()).abs() <= 1e-12);
        prop_assert!((c - w).dot(&(w - e)) > 0.0);
    }

    #[test]
    fn segment_mass_is_linear_in_subject_mass(m in 20.0f64..200.0, seg in 0usize..16) {
        let table = AnthropometricTable::reference();
        let seg = SegmentId::ALL[seg];
        let s1 = SubjectProfile::new(m, 1.7, Sex::F).unwrap();
        let s2 = SubjectProfile::new(2.0 * m, 1.7, Sex::F).unwrap();
        prop_assert!((segment_mass(&table, seg, &s2) - 2.0 * segment_mass(&table, seg, &s1)).abs() <= 1e-12 * m);
    }
}

#[test]
fn every_segment_basis_is_orthonormal_and_right_handed() {
    let walk = short_walk();
    let defs = SegmentDefinitions::cast_default();
    let table = AnthropometricTable::reference();
    for def in defs.iter() {
        for k in (0..walk.markers.frame_count()).step_by(7) {
            let st = segment_state(&walk.markers, def, &table, &subject(), k).unwrap();
            let gram = st.basis.transpose() * st.basis;
            assert!((gram - nalgebra::Matrix3::identity()).amax() <= 1e-9, "{:?}", def.segment);
            assert!((st.basis.determinant() - 1.0).abs() <= 1e-9);
            assert!(st.length_m > 0.0);
        }
    }
}

#[test]
fn whole_body_is_mass_weighted_mean_of_segments() {
    let c = com(&short_walk().markers);
    let masses = c.segment_masses_kg();
    let total: f64 = masses.iter().sum();
    for k in 0..c.frame_count() {
        let mut acc = Vector3::zeros();
        for seg in SegmentId::ALL {
            acc += c.segment_com(k, seg) * masses[seg.index()];
        }
        let mean = acc / total;
        assert!((c.whole_body()[k] - mean).amax() <= 1e-12 * mean.amax().max(1.0));
    }
}

#[test]
fn uniform_two_frame_trial_gives_arithmetic_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let points: Vec<[Vector3<f64>; 16]> = (0..2)
        .map(|_| std::array::from_fn(|_| Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0))))
        .collect();
    let c = ComTrajectory::from_segment_coms(100.0, 0.0, points.clone(), [5.0; 16]).unwrap();
    for (k, frame) in points.iter().enumerate() {
        let mean = frame.iter().fold(Vector3::zeros(), |a, p| a + p) / 16.0;
        assert!((c.whole_body()[k] - mean).amax() <= 1e-12);
    }
}

#[test]
fn reference_table_masses_sum_to_subject_mass() {
    let table = AnthropometricTable::reference();
    for sex in Sex::ALL {
        let sum = table.mass_ratio_sum(sex);
        assert!((0.99..=1.01).contains(&sum), "{sex}: {sum}");
        let s = SubjectProfile::new(70.0, 1.7, sex).unwrap();
        let total: f64 = SegmentId::ALL.iter().map(|&g| segment_mass(&table, g, &s)).sum();
        assert!((total - 70.0).abs() <= 0.7, "{sex}: {total}");
        assert!((total - 70.0 * sum).abs() <= 1e-9);
    }
}

#[test]
fn table_and_definitions_round_trip() {
    let table = AnthropometricTable::reference();
    assert_eq!(load_table(&write_table(&table)).unwrap(), table);
    let defs = SegmentDefinitions::cast_default();
    assert_eq!(parse_definitions(&write_definitions(&defs)).unwrap(), defs);
}
