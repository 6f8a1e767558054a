mod common;

use std::sync::Arc;

use common::{dense_trace_distance, outer, random_density, random_pure, random_unitary, rng};
use nalgebra::DMatrix;
use proptest::prelude::*;
use scarflow::evolve::evolve_with;
use scarflow::hamiltonian::build;
use scarflow::metrics::{
    degree, negativity, positive_slope_sum, trace_distance, tvd, DistanceSeries, RdmSeries,
};
use scarflow::metrics::{distance_series, tvd_series};
use scarflow::rdm::{eigenvalues_desc, PartialTracePlan};
use scarflow::{BlockadeBasis, EvolutionConfig, ModelSpec, SubsystemSpec, C64};

fn partial_trace_second_qubit(rho: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |a, b| (0..2).map(|e| rho[(2 * a + e, 2 * b + e)]).sum())
}

fn series(values: Vec<f64>) -> DistanceSeries {
    let times = (0..values.len()).map(|k| k as f64 * 0.01).collect();
    DistanceSeries { label: "s".into(), delta: 1.0, spacing: 0.01, times, values }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), dim in 2usize..=16) {
        let mut r = rng(seed);
        let (a, b, c) = (
            random_density(&mut r, dim, 1 + dim / 2),
            random_density(&mut r, dim, dim),
            random_density(&mut r, dim, 1),
        );
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, trace_distance(&b, &a).unwrap());
        prop_assert!(ab >= 0.0 && ab <= 1.0);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
        let ac = trace_distance(&a, &c).unwrap();
        let bc = trace_distance(&b, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((ab - dense_trace_distance(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_is_unitarily_invariant(seed in any::<u64>(), dim in 2usize..=16) {
        let mut r = rng(seed);
        let a = random_density(&mut r, dim, dim);
        let b = random_density(&mut r, dim, 2);
        let u = random_unitary(&mut r, dim);
        let ua = &u * &a * u.adjoint();
        let ub = &u * &b * u.adjoint();
        prop_assert!((trace_distance(&a, &b).unwrap() - trace_distance(&ua, &ub).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_contracts_trace_distance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = outer(&random_pure(&mut r, 4));
        let sigma = outer(&random_pure(&mut r, 4));
        let full = trace_distance(&rho, &sigma).unwrap();
        let reduced = trace_distance(&partial_trace_second_qubit(&rho), &partial_trace_second_qubit(&sigma)).unwrap();
        prop_assert!(reduced <= full + 1e-12);
    }

    #[test]
    fn spectral_distance_never_exceeds_trace_distance(seed in any::<u64>(), dim in 2usize..=16) {
        let mut r = rng(seed);
        let a = random_density(&mut r, dim, dim);
        let b = random_density(&mut r, dim, 1 + dim / 3);
        let v = tvd(&eigenvalues_desc(&a).unwrap(), &eigenvalues_desc(&b).unwrap()).unwrap();
        prop_assert!(v <= trace_distance(&a, &b).unwrap() + 1e-12);
    }

    #[test]
    fn negativity_is_locally_unitarily_invariant(seed in any::<u64>(), k in 1usize..=3) {
        let mut r = rng(seed);
        let da = 1usize << k;
        let rho = random_density(&mut r, 2 * da, 2);
        let u = random_unitary(&mut r, da).kronecker(&random_unitary(&mut r, 2));
        let rotated = &u * &rho * u.adjoint();
        let n0 = negativity(&rho, da, 2).unwrap();
        prop_assert!(n0 >= -1e-15);
        prop_assert!((n0 - negativity(&rotated, da, 2).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn product_states_have_no_negativity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, 4, 4).kronecker(&random_density(&mut r, 2, 2));
        prop_assert!(negativity(&rho, 4, 2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn degree_ignores_offsets_and_monotone_decay(
        values in prop::collection::vec(0.0f64..1.0, 2..200),
        offset in -5.0f64..5.0,
    ) {
        let base = degree(&series(values.clone()), 0.01).unwrap();
        prop_assert!(base >= 0.0);
        let shifted: Vec<f64> = values.iter().map(|v| v + offset).collect();
        let moved = degree(&series(shifted), 0.01).unwrap();
        prop_assert!((base - moved).abs() <= 1e-9 * (1.0 + base));
        let mut sorted = values;
        sorted.sort_by(|a, b| b.total_cmp(a));
        prop_assert_eq!(degree(&series(sorted.clone()), 0.01).unwrap(), 0.0);
        prop_assert_eq!(positive_slope_sum(&sorted, 0.01), 0.0);
    }
}

#[test]
fn bell_state_negativity_is_one_half() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (i, j) in [(0usize, 3usize), (1, 2)] {
        let mut psi = nalgebra::DVector::zeros(4);
        psi[i] = C64::new(s, 0.0);
        psi[j] = C64::new(s, 0.0);
        assert!((negativity(&outer(&psi), 2, 2).unwrap() - 0.5).abs() < 1e-12);
    }
    let mixed = DMatrix::<C64>::identity(4, 4) * C64::new(0.25, 0.0);
    assert!(negativity(&mixed, 2, 2).unwrap().abs() < 1e-15);
}

/// Spectral distances stay below trace distances along a whole N=8 trajectory.
#[test]
fn spectral_distance_bound_holds_on_a_run() {
    let n = 8;
    let basis = Arc::new(BlockadeBasis::new(n).unwrap());
    let cfg = EvolutionConfig { tau: 0.01, t_max: 40.0, snapshot_every: 1 };
    for spec in [ModelSpec::pxp(n), ModelSpec::pxpz(n, 0.05, 3)] {
        let h = build(basis.clone(), &spec).unwrap();
        let subs: Vec<SubsystemSpec> = (1..=3).map(|l| SubsystemSpec::odd_separated(n, l).unwrap()).collect();
        let plans: Vec<_> = subs.iter().map(|s| PartialTracePlan::new(&basis, s).unwrap()).collect();
        let mut store: Vec<RdmSeries> =
            subs.iter().map(|s| RdmSeries { label: s.label(), spacing: 0.01, rdms: Vec::new() }).collect();
        evolve_with(&h, basis.neel_state(), &cfg, |_, t, psi| {
            for (p, s) in plans.iter().zip(store.iter_mut()) {
                s.rdms.push(p.trace(psi, t));
            }
            Ok(())
        })
        .unwrap();
        let mut violations = 0;
        let mut checked = 0;
        for s in &store {
            let spectra = s.spectra().unwrap();
            for delta in [0.5, 1.0, 2.0, 3.0, 4.76] {
                let td = distance_series(s, delta).unwrap();
                let vd = tvd_series(&spectra, delta).unwrap();
                for (a, b) in vd.values.iter().zip(&td.values) {
                    checked += 1;
                    if *a > b + 1e-12 {
                        violations += 1;
                    }
                }
            }
        }
        println!("{}: {violations} violations of V_d <= T_d in {checked} pairs", spec.label());
        assert_eq!(violations, 0);
    }
}
