use std::sync::{Arc, OnceLock};

use fermisurf::bo_surface::{
    bo_ks, bo_tf, gamma_limit, outside_decomposition_check, profile_from_pairs, qij_tf, tf_sweep, BoPoint,
};
use fermisurf::ks_lda::{make_functional, KsGridPolicy, ScfOptions, XcKind};
use fermisurf::tf_atom::{solve_universal, UniversalTF};
use fermisurf::tf_molecule::{
    screened_tf, solve_tf, tf_grid, AtomSet, GridPolicy, NuclearConfiguration, RegionMask, TfOptions,
};

fn universal() -> Arc<UniversalTF<f64>> {
    static U: OnceLock<Arc<UniversalTF<f64>>> = OnceLock::new();
    U.get_or_init(|| Arc::new(solve_universal(1e6, 1e-12).unwrap())).clone()
}

fn policy(h: f64) -> GridPolicy<f64> {
    GridPolicy {
        h,
        ..GridPolicy::default()
    }
}

#[test]
fn single_nucleus_has_zero_binding() {
    let atom = NuclearConfiguration::atom(4.0).unwrap();
    let p = bo_tf(&atom, &policy(0.2), universal(), &TfOptions::default()).unwrap();
    assert_eq!(p.d, 0.0);
    let xc = make_functional(XcKind::LdaExchange, true).unwrap();
    let k = bo_ks(&atom, &xc, &KsGridPolicy::default(), 2.0, &ScfOptions::default()).unwrap();
    assert_eq!(k.d, 0.0);
    let o = outside_decomposition_check(&atom, 0.3, &policy(0.2), universal(), &TfOptions::default(), 200).unwrap();
    assert_eq!(o.gap, 0.0);
}

#[test]
fn teller_positivity_along_a_sweep() {
    let shape = NuclearConfiguration::diatomic(3.0, 3.0, 1.0).unwrap();
    let curve = tf_sweep(&shape, &[1.0, 0.5, 0.7], &policy(0.125), universal(), &TfOptions::default()).unwrap();
    let rs: Vec<f64> = curve.samples.iter().map(|s| s.r_min).collect();
    assert_eq!(rs, vec![0.5, 0.7, 1.0]);
    assert!(curve.samples.iter().all(|s| s.d > 0.0), "{:?}", curve.samples);
    assert!(curve.samples.windows(2).all(|w| w[1].d < w[0].d));
    for s in &curve.samples {
        assert!((s.d - (s.e_mol - s.e_atoms + s.u_r)).abs() < 1e-9 * s.e_mol.abs());
    }
}

#[test]
fn scaled_limit_sequence_is_homogeneous() {
    let opts = TfOptions::default();
    let near = NuclearConfiguration::diatomic(1.0, 1.0, 1.0).unwrap();
    let far = NuclearConfiguration::diatomic(1.0, 1.0, 2.0).unwrap();
    let a = gamma_limit(&near, &[2.0, 3.0, 4.0], &policy(0.25), universal(), &opts).unwrap();
    let b = gamma_limit(&far, &[1.0, 1.5, 2.0], &policy(0.25), universal(), &opts).unwrap();
    for (x, y) in a.scaled.iter().zip(&b.scaled) {
        assert!((x / y - 128.0).abs() < 1e-9 * 128.0, "{x} {y}");
    }
    for ((p, l), s) in a.points.iter().zip(&a.l_values).zip(&a.scaled) {
        assert_eq!(*s, l.powi(7) * p.d);
    }
    assert!(gamma_limit(&near, &[2.0, 3.0], &policy(0.25), universal(), &opts).is_err());
    assert!(gamma_limit(&near, &[2.0, 1.0, 3.0], &policy(0.25), universal(), &opts).is_err());
}

#[test]
fn cross_terms_are_symmetric_and_reduce_to_point_charges() {
    let config = NuclearConfiguration::new(
        vec![[0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [0.3, 1.7, 0.2]],
        vec![3.0, 5.0, 2.0],
    )
    .unwrap();
    let atoms = AtomSet::new(&config, universal()).unwrap();
    for r in [0.1, 0.4, 0.7] {
        let q = qij_tf(&atoms, &config, r).unwrap();
        for i in 0..3 {
            assert_eq!(q[i][i], 0.0);
            for j in 0..3 {
                assert!((q[i][j] - q[j][i]).abs() < 1e-8);
            }
        }
    }
    let tiny = qij_tf(&atoms, &config, 1e-7).unwrap();
    assert!((tiny[0][1] - 15.0 / 1.5).abs() < 1e-6, "{}", tiny[0][1]);
    assert!(qij_tf(&atoms, &config, 0.9).is_err());
}

#[test]
fn identical_screened_potentials_have_zero_difference() {
    let config = NuclearConfiguration::diatomic(2.0, 2.0, 1.6).unwrap();
    let grid = Arc::new(tf_grid(&config, &policy(0.2)).unwrap());
    let sol = solve_tf(&config, 4.0, grid, universal(), &TfOptions::default()).unwrap();
    let pairs: Vec<_> = [0.1, 0.15, 0.2, 0.3, 0.4]
        .iter()
        .map(|&r| {
            let m = RegionMask::new(&config, r, 200).unwrap();
            let s = screened_tf(&sol, &m).unwrap();
            (s.clone(), s)
        })
        .collect();
    let profile = profile_from_pairs(&pairs);
    assert!(profile.diff_sup.iter().all(|&d| d == 0.0));
    assert!(profile.phi_sup.iter().all(|&p| p > 0.0));
    assert_eq!(profile.per_nucleus.len(), 5);
}

#[test]
fn hydrogen_molecule_binds_in_lda() {
    let config = NuclearConfiguration::diatomic(1.0, 1.0, 1.5).unwrap();
    let xc = make_functional(XcKind::LdaExchange, true).unwrap();
    let policy = KsGridPolicy {
        h: 0.3,
        margin: 4.5,
        ..KsGridPolicy::default()
    };
    let p: BoPoint<f64> = bo_ks(&config, &xc, &policy, 2.0, &ScfOptions::default()).unwrap();
    assert!(p.d < 0.0, "{p:?}");
    assert!((p.grid_h - 0.3).abs() < 1e-12);
}
