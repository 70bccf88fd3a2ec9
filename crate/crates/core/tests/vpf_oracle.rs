mod support;

use proptest::prelude::*;
use support::oracle::ray_cast_vpf;
use visflock_core::{
    angular_interval, build_vpf, rasterize, AgentState, Arena, Boundary, ModelParams,
};

const FOVS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

fn arb_scene(max_agents: usize, side: f64) -> impl Strategy<Value = Vec<AgentState>> {
    prop::collection::vec(
        (0.0..side, 0.0..side, 0.0..std::f64::consts::TAU),
        2..=max_agents,
    )
    .prop_map(|v| v.into_iter().map(|(x, y, psi)| AgentState::new(x, y, psi, 1.0)).collect())
}

fn distinct(states: &[AgentState]) -> bool {
    states
        .iter()
        .enumerate()
        .all(|(i, a)| states[..i].iter().all(|b| a.position() != b.position()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn build_vpf_matches_ray_casting(
        states in arb_scene(12, 150.0),
        periodic in any::<bool>(),
        fov in 0usize..4,
        short_range in any::<bool>(),
    ) {
        prop_assume!(distinct(&states));
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Reflective };
        let arena = Arena::new(150.0, 150.0, boundary);
        let params = ModelParams {
            fov_fraction: FOVS[fov],
            vision_range: if short_range { 60.0 } else { 2000.0 },
            ..Default::default()
        };
        for focal in 0..states.len() {
            let got = build_vpf(focal, &states, &arena, &params).unwrap();
            let want = ray_cast_vpf(focal, &states, &arena, &params);
            prop_assert_eq!(got.bits(), want.as_slice(), "focal {}", focal);
        }
    }

    #[test]
    fn mirrored_scene_gives_mirrored_field(others in arb_scene(8, 200.0), fov in 0usize..4) {
        // focal at the origin facing +x; reflect the world across the x axis
        let mut states = vec![AgentState::new(0.0, 0.0, 0.0, 1.0)];
        states.extend(others.iter().map(|s| AgentState::new(s.x - 100.0, s.y - 100.0, s.psi, 1.0)));
        prop_assume!(distinct(&states));
        let mirrored: Vec<AgentState> =
            states.iter().map(|s| AgentState::new(s.x, -s.y, -s.psi, 1.0)).collect();
        let arena = Arena::unbounded();
        let params = ModelParams { fov_fraction: FOVS[fov], ..Default::default() };
        let a = build_vpf(0, &states, &arena, &params).unwrap();
        let b = build_vpf(0, &mirrored, &arena, &params).unwrap();
        prop_assert_eq!(a.mirrored(), b);
    }

    #[test]
    fn wider_fov_sees_a_superset(states in arb_scene(10, 300.0), periodic in any::<bool>()) {
        prop_assume!(distinct(&states));
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Reflective };
        let arena = Arena::new(300.0, 300.0, boundary);
        let fields: Vec<_> = FOVS
            .iter()
            .map(|&f| {
                let params = ModelParams { fov_fraction: f, ..Default::default() };
                build_vpf(0, &states, &arena, &params).unwrap()
            })
            .collect();
        for pair in fields.windows(2) {
            for (narrow, wide) in pair[0].bits().iter().zip(pair[1].bits()) {
                prop_assert!(!narrow || *wide);
            }
        }
    }

    #[test]
    fn rasterizing_is_a_union(
        scene in arb_scene(8, 200.0),
        split in 0usize..8,
    ) {
        prop_assume!(distinct(&scene));
        let me = scene[0];
        let intervals: Vec<_> = scene[1..]
            .iter()
            .enumerate()
            .map(|(j, s)| angular_interval(&me, j + 1, s.position(), 5.5).unwrap())
            .collect();
        let all = rasterize(&intervals, 320);
        let mut doubled = intervals.clone();
        doubled.extend(intervals.iter().copied());
        prop_assert_eq!(rasterize(&doubled, 320), all.clone());

        let cut = split.min(intervals.len());
        let left = rasterize(&intervals[..cut], 320);
        let right = rasterize(&intervals[cut..], 320);
        let union: Vec<bool> = left.bits().iter().zip(right.bits()).map(|(a, b)| *a || *b).collect();
        prop_assert_eq!(all.bits(), union.as_slice());
    }
}

#[test]
fn dense_clusters_and_overlapping_discs() {
    // agents closer than one radius see a half circle
    let states = [
        AgentState::new(50.0, 50.0, 0.3, 1.0),
        AgentState::new(53.0, 51.0, 1.0, 1.0),
        AgentState::new(70.0, 40.0, 2.0, 1.0),
        AgentState::new(30.0, 60.0, 4.0, 1.0),
    ];
    for boundary in [Boundary::Periodic, Boundary::Reflective] {
        let arena = Arena::new(100.0, 100.0, boundary);
        for fov in FOVS {
            let params = ModelParams { fov_fraction: fov, ..Default::default() };
            for focal in 0..states.len() {
                let got = build_vpf(focal, &states, &arena, &params).unwrap();
                assert_eq!(got.bits(), ray_cast_vpf(focal, &states, &arena, &params).as_slice());
            }
        }
    }
}
