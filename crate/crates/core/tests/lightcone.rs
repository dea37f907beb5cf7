mod common;

use std::collections::BTreeSet;

use aqec_core::ensembles::{build, EnsembleParams, Family};
use aqec_core::lightcone::{
    choi_floor, depth_lower_bound, disjoint_logical_set, light_cones, Architecture, LayoutGraph,
};
use aqec_core::stream_rng;
use proptest::prelude::*;

/// Set-based cone propagation over explicit (layer, qubit) steps.
fn naive_cone(
    n: usize,
    layers: &[Vec<Vec<usize>>],
    start: usize,
    backward: bool,
) -> BTreeSet<usize> {
    let mut cone: BTreeSet<usize> = [start].into();
    let order: Vec<usize> = if backward {
        (0..layers.len()).rev().collect()
    } else {
        (0..layers.len()).collect()
    };
    for l in order {
        let mut next = cone.clone();
        for gate in &layers[l] {
            if gate.iter().any(|q| cone.contains(q)) {
                next.extend(gate.iter().copied());
            }
        }
        cone = next;
    }
    assert!(cone.iter().all(|&q| q < n));
    cone
}

fn cone_side(mode: Architecture, p: f64, d: u64) -> f64 {
    let l = (1.0 / p).log2();
    match mode {
        Architecture::Lattice(dim) => {
            (2.0 * d as f64).powi(dim as i32) * l + 2.0 * dim as f64 * (2.0 * d as f64).log2()
        }
        Architecture::AllToAll => 2f64.powi(d as i32) * l + 2.0 * d as f64,
    }
}

fn linear_scan(mode: Architecture, p: f64, eps: f64, k: usize) -> u64 {
    let target = (3.0 / (8.0 * eps * eps)).log2() + (k as f64).log2();
    (1..).find(|&d| cone_side(mode, p, d) >= target).unwrap()
}

#[test]
fn empty_circuit_has_unit_cones() {
    let g = LayoutGraph::new(5, vec![], vec![0, 2, 4]).unwrap();
    let cones = light_cones(&g);
    assert_eq!(cones.max_size, 1);
    assert_eq!(disjoint_logical_set(&g, &cones), vec![0, 2, 4]);
    let floor = choi_floor(&g, 0.1).unwrap();
    assert!((floor - (3.0 * 3.0 * 0.1 / 8.0f64).sqrt()).abs() < 1e-15);
    assert_eq!(choi_floor(&g, 1.0).unwrap(), 1.0);
}

#[test]
fn idle_qubits_stay_in_the_cone() {
    let g = LayoutGraph::new(4, vec![vec![vec![0, 1]], vec![vec![2, 3]]], vec![0]).unwrap();
    let cones = light_cones(&g);
    assert_eq!(cones.forward[0].iter_ones().collect::<Vec<_>>(), vec![0, 1]);
    assert_eq!(
        cones.backward[3].iter_ones().collect::<Vec<_>>(),
        vec![2, 3]
    );
    assert_eq!(cones.max_size, 2);
}

#[test]
fn single_full_gate_couples_everything() {
    let spec = build(&EnsembleParams::new(6, 3, 0.5, Family::FullClifford)).unwrap();
    let g = LayoutGraph::from_spec(&spec).unwrap();
    let cones = light_cones(&g);
    assert_eq!(cones.max_size, 6);
    assert_eq!(disjoint_logical_set(&g, &cones).len(), 1);
}

#[test]
fn double_layer_cones_span_three_regions() {
    let spec = build(&EnsembleParams::new(64, 8, 1.0, Family::DoubleLayer).with_xi(4)).unwrap();
    let g = LayoutGraph::from_spec(&spec).unwrap();
    let cones = light_cones(&g);
    assert_eq!(cones.max_size, 16);
}

#[test]
fn invalid_layouts_are_rejected() {
    assert!(LayoutGraph::new(3, vec![vec![vec![0, 1], vec![1, 2]]], vec![0]).is_err());
    assert!(LayoutGraph::new(3, vec![vec![vec![0, 5]]], vec![0]).is_err());
    assert!(LayoutGraph::new(3, vec![], vec![3]).is_err());
}

#[test]
fn depth_bound_hypotheses() {
    assert!(depth_lower_bound(Architecture::AllToAll, 0.1, 0.1, 4).is_err());
    assert!(depth_lower_bound(Architecture::AllToAll, 0.1, 0.0, 4).is_err());
    assert!(depth_lower_bound(Architecture::AllToAll, 0.0, 0.01, 4).is_err());
    assert!(depth_lower_bound(Architecture::AllToAll, 0.1, 0.01, 0).is_err());
    assert!(depth_lower_bound(Architecture::Lattice(0), 0.1, 0.01, 4).is_err());
}

#[test]
fn depth_bound_grows_logarithmically_for_all_to_all() {
    let small = depth_lower_bound(Architecture::AllToAll, 0.1, 0.01, 1 << 10).unwrap();
    let large = depth_lower_bound(Architecture::AllToAll, 0.1, 0.01, 1 << 40).unwrap();
    assert!(large > small && large - small <= 3, "{small} -> {large}");
    let lattice = depth_lower_bound(Architecture::Lattice(1), 0.1, 0.01, 1 << 40).unwrap();
    assert!(lattice > large);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cones_match_naive_propagation(seed in any::<u64>(), n in 1usize..24, depth in 0usize..6) {
        let mut rng = stream_rng(seed, 0);
        let layers = common::random_layers(n, depth, 4, &mut rng);
        let logical: Vec<usize> = (0..n).step_by(3).collect();
        let g = LayoutGraph::new(n, layers.clone(), logical.clone()).unwrap();
        let cones = light_cones(&g);
        for (i, &q) in logical.iter().enumerate() {
            let got: BTreeSet<usize> = cones.forward[i].iter_ones().collect();
            prop_assert_eq!(got, naive_cone(n, &layers, q, false));
        }
        for q in 0..n {
            let got: BTreeSet<usize> = cones.backward[q].iter_ones().collect();
            prop_assert_eq!(got, naive_cone(n, &layers, q, true));
        }
    }

    #[test]
    fn forward_and_backward_are_dual(seed in any::<u64>(), n in 1usize..24, depth in 0usize..6) {
        let mut rng = stream_rng(seed, 1);
        let layers = common::random_layers(n, depth, 3, &mut rng);
        let g = LayoutGraph::new(n, layers, (0..n).collect()).unwrap();
        let cones = light_cones(&g);
        for a in 0..n {
            for b in 0..n {
                prop_assert_eq!(cones.forward[a].get(b), cones.backward[b].get(a));
            }
        }
    }

    #[test]
    fn cones_grow_with_depth(seed in any::<u64>(), n in 1usize..24, depth in 1usize..7) {
        let mut rng = stream_rng(seed, 2);
        let layers = common::random_layers(n, depth, 3, &mut rng);
        let g = LayoutGraph::new(n, layers, vec![0]).unwrap();
        for q in 0..n {
            for l in 0..depth {
                let a = g.forward_cone(q, l);
                let b = g.forward_cone(q, l + 1);
                prop_assert!(a.iter_ones().all(|x| b.get(x)));
            }
        }
    }

    #[test]
    fn disjoint_set_is_disjoint_and_maximal(seed in any::<u64>(), n in 2usize..30, depth in 0usize..4) {
        let mut rng = stream_rng(seed, 3);
        let layers = common::random_layers(n, depth, 3, &mut rng);
        let logical: Vec<usize> = (0..n).filter(|q| q % 2 == 0).collect();
        let g = LayoutGraph::new(n, layers, logical.clone()).unwrap();
        let cones = light_cones(&g);
        let chosen = disjoint_logical_set(&g, &cones);
        let cone_of = |q: usize| &cones.forward[logical.iter().position(|&x| x == q).unwrap()];
        for (i, &a) in chosen.iter().enumerate() {
            for &b in &chosen[i + 1..] {
                prop_assert!(!cone_of(a).intersects(cone_of(b)));
            }
        }
        for &q in &logical {
            if !chosen.contains(&q) {
                prop_assert!(chosen.iter().any(|&c| cone_of(c).intersects(cone_of(q))));
            }
        }
        let floor = choi_floor(&g, 0.2).unwrap();
        prop_assert!((0.0..=1.0).contains(&floor));
    }

    #[test]
    fn depth_bound_matches_linear_scan(
        p in 0.001f64..0.9,
        eps in 1e-6f64..0.0999,
        logk in 0u32..50,
        dim in 1u32..4,
        all in any::<bool>(),
    ) {
        let mode = if all { Architecture::AllToAll } else { Architecture::Lattice(dim) };
        let k = 1usize << logk;
        prop_assert_eq!(depth_lower_bound(mode, p, eps, k).unwrap(), linear_scan(mode, p, eps, k));
    }

    #[test]
    fn depth_bound_is_monotone(p in 0.001f64..0.9, e1 in 1e-6f64..0.0999, e2 in 1e-6f64..0.0999, k in 1usize..1000) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let mode = Architecture::Lattice(2);
        prop_assert!(depth_lower_bound(mode, p, lo, k).unwrap() >= depth_lower_bound(mode, p, hi, k).unwrap());
        prop_assert!(depth_lower_bound(mode, p, lo, 2 * k).unwrap() >= depth_lower_bound(mode, p, lo, k).unwrap());
    }
}
