//! Randomised simulation invariants: determinism, adaptedness across cut
//! points, and agreement of separations across projection.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use dscm_core::dmg::SeparationMode;
use dscm_core::sim::{check_adaptedness, simulate, PathEnsemble, SimConfig};
use dscm_core::verify::{fixtures, oracle, random_solvable_system};

#[test]
fn adaptedness_sweep_over_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..25 {
        let sys = random_solvable_system(&mut rng);
        let cfg = SimConfig::new(0.05, 2, rng.random());
        let k = rng.random_range(0..=20usize);
        let t_cut = k as f64 * 0.05;
        assert!(
            check_adaptedness(&sys, &cfg, t_cut).unwrap(),
            "adaptedness failed at cut {t_cut} for a random system"
        );
    }
}

#[test]
fn simulation_is_deterministic_and_reports_drivers() {
    let sys = dscm_core::parse_model(fixtures::LINEAR4_MODEL).unwrap().system;
    let cfg = SimConfig::new(0.02, 7, 5);
    let a: PathEnsemble<f64> = simulate(&sys, &cfg).unwrap();
    let b: PathEnsemble<f64> = simulate(&sys, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.drivers().len(), 3);
    // Driver increments are retained and reproducible.
    assert_eq!(
        a.driver_increment(1, 3, 10),
        b.driver_increment(1, 3, 10)
    );
    // CSV export carries the expected header and row count.
    let csv = a.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time,process,path,value"));
    assert_eq!(csv.lines().count(), 1 + 4 * 7 * (a.steps() + 1));
}

#[test]
fn f32_and_f64_lanes_agree_on_the_drift() {
    // Same seed, both precisions: trajectories track each other closely on
    // a short horizon.
    let sys = dscm_core::parse_model(fixtures::OU_MODEL).unwrap().system;
    let cfg = SimConfig::new(0.01, 3, 9);
    let hi: PathEnsemble<f64> = simulate(&sys, &cfg).unwrap();
    let lo: PathEnsemble<f32> = simulate(&sys, &cfg).unwrap();
    for path in 0..3 {
        for k in [0, 50, 100] {
            let a = hi.value(0, path, k);
            let b = lo.value(0, path, k) as f64;
            assert!((a - b).abs() < 1e-3, "lane mismatch: {a} vs {b}");
        }
    }
}

#[test]
fn projected_separations_hold_in_the_original_graph() {
    // Spot-check on random graphs: a sigma-separation among kept nodes in a
    // latent projection is confirmed on the unprojected graph by the
    // walk-enumeration oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut confirmed = 0usize;
    for _ in 0..300 {
        let sys = random_solvable_system(&mut rng);
        let aug = sys.graph_of_sdes();
        let n = aug.node_count();
        if n < 4 {
            continue;
        }
        let drop_idx = rng.random_range(0..n);
        let drop: BTreeSet<usize> = [drop_idx].into_iter().collect();
        let proj = match aug.latent_project(&drop) {
            Ok(p) => p,
            Err(_) => continue,
        };
        // Random disjoint singletons among kept nodes.
        let kept: Vec<usize> = (0..n).filter(|v| !drop.contains(v)).collect();
        let a = kept[rng.random_range(0..kept.len())];
        let b = kept[rng.random_range(0..kept.len())];
        if a == b {
            continue;
        }
        let c: BTreeSet<usize> = kept
            .iter()
            .filter(|&&v| v != a && v != b && rng.random_bool(0.4))
            .copied()
            .collect();
        let name = |v: usize| aug.node(v).name();
        let pa = proj.index_of(&name(a)).unwrap();
        let pb = proj.index_of(&name(b)).unwrap();
        let pc: BTreeSet<usize> = c.iter().map(|&v| proj.index_of(&name(v)).unwrap()).collect();
        let sep_proj = proj.sigma_separated(
            &[pa].into_iter().collect(),
            &[pb].into_iter().collect(),
            &pc,
        );
        if sep_proj {
            confirmed += 1;
            let sep_orig = oracle::separated_by_walk_enumeration(
                &aug,
                &[a].into_iter().collect(),
                &[b].into_iter().collect(),
                &c,
                SeparationMode::Sigma,
            );
            assert!(
                sep_orig,
                "projection separated {} from {} given {:?} but the original graph does not",
                name(a),
                name(b),
                c
            );
        }
    }
    assert!(confirmed > 20, "spot-check exercised too few separations: {confirmed}");
}
