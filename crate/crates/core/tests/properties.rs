mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use rtcc::cc::{solve_ccsd, solve_lambda, ClusterAmplitudes};
use rtcc::fcidump::{load_fcidump, write_fcidump};
use rtcc::greens::{GreensTrajectory, TimeGrid};
use rtcc::hamiltonian::{build_siam, partition_reference, SiamParams};
use rtcc::oracle::CoreHoleLehmann;
use rtcc::overlap::{channel_greens, overlap_trajectory, ComponentOptions};
use rtcc::qsp::{bessel_j, propagator_coeffs, truncation_bound};
use rtcc::rteom::{cumulant_greens, propagate, AnsatzKind, CoreCoupling, PropagationOptions};
use rtcc::spectra::{find_peaks, fit_qp_weight, fourier_spectrum, OmegaGrid};

use common::{random_complex, random_hamiltonian, siam};

fn poles(grid: TimeGrid, terms: &[(f64, f64)]) -> GreensTrajectory {
    let g = grid
        .times()
        .map(|t| -Complex64::i() * terms.iter().map(|&(w, z)| z * Complex64::cis(-w * t)).sum::<Complex64>())
        .collect();
    GreensTrajectory::new(grid, g, "poles")
}

fn chebyshev_eval(c: &[Complex64], x: f64) -> Complex64 {
    let (mut t0, mut t1) = (1.0, x);
    let mut p = c[0] + c.get(1).copied().unwrap_or_default() * x;
    for ck in c.iter().skip(2) {
        let t2 = 2.0 * x * t1 - t0;
        p += ck * t2;
        t0 = t1;
        t1 = t2;
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn packing_round_trips(no in 1usize..4, nv in 1usize..5, seed in 0u64..1000) {
        let a = random_complex(no, nv, 1.0, seed);
        prop_assert_eq!(a.antisymmetry_error(), 0.0);
        let b = ClusterAmplitudes::unpack(&a.pack(), no, nv);
        prop_assert_eq!(a.pack(), b.pack());
        prop_assert_eq!(b.antisymmetry_error(), 0.0);
    }

    #[test]
    fn spectrum_is_linear(w1 in -3.0f64..0.5, w2 in -3.0f64..0.5, c in -2.0f64..2.0) {
        let grid = TimeGrid::span(0.1, 60.0).unwrap();
        let om = OmegaGrid { lo: -4.0, hi: 1.0, n: 401 };
        let a = fourier_spectrum(&poles(grid, &[(w1, 1.0)]), 0.05, &om).unwrap();
        let b = fourier_spectrum(&poles(grid, &[(w2, c)]), 0.05, &om).unwrap();
        let ab = fourier_spectrum(&poles(grid, &[(w1, 1.0), (w2, c)]), 0.05, &om).unwrap();
        for j in 0..om.n {
            prop_assert!((ab.a[j] - a.a[j] - b.a[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn peaks_do_not_move_under_rescaling(w in -3.0f64..0.5, scale in 0.01f64..50.0) {
        let grid = TimeGrid::span(0.1, 200.0).unwrap();
        let om = OmegaGrid { lo: -4.0, hi: 1.0, n: 1001 };
        let g = poles(grid, &[(w, 0.6), (w - 0.8, 0.4)]);
        let mut scaled = g.clone();
        scaled.g.iter_mut().for_each(|z| *z *= scale);
        let p = find_peaks(&fourier_spectrum(&g, 0.02, &om).unwrap(), 0.02);
        let q = find_peaks(&fourier_spectrum(&scaled, 0.02, &om).unwrap(), 0.02);
        prop_assert_eq!(p.len(), q.len());
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((x.omega - y.omega).abs() < 1e-9);
        }
    }

    #[test]
    fn z_is_stable_under_grid_refinement(w in -2.0f64..0.5, z in 0.3f64..0.95, sep in 0.3f64..1.5) {
        let grid = TimeGrid::span(0.1, 900.0).unwrap();
        let g = poles(grid, &[(w, z), (w - sep, 1.0 - z)]);
        let om = OmegaGrid { lo: -4.0, hi: 1.0, n: 2501 };
        let coarse = fit_qp_weight(&fourier_spectrum(&g, 0.01, &om).unwrap()).unwrap();
        let fine = fit_qp_weight(&fourier_spectrum(&g, 0.01, &om.refined()).unwrap()).unwrap();
        prop_assert!((coarse.z - fine.z).abs() < 0.005, "{} vs {}", coarse.z, fine.z);
    }

    #[test]
    fn bessel_sum_rule(x in -30.0f64..30.0) {
        let j = bessel_j(80, x);
        let s = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
        prop_assert!((s - 1.0).abs() < 1e-12);
        for (k, v) in j.iter().enumerate().skip(1) {
            let bound = (0.5 * x.abs()).powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
            prop_assert!(v.abs() <= bound * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn truncation_error_is_bounded_and_nonincreasing(tau in 0.1f64..10.0) {
        let mut previous = f64::INFINITY;
        for d in [1usize, 3, 5, 7, 9, 11, 15, 21] {
            let c = propagator_coeffs(tau, d - 1, d);
            let err = (0..=200)
                .map(|i| -1.0 + i as f64 / 100.0)
                .map(|x| (chebyshev_eval(&c, x) - Complex64::cis(tau * x)).norm())
                .fold(0.0, f64::max);
            prop_assert!(err <= truncation_bound(tau, d) * (1.0 + 1e-9) + 1e-14);
            prop_assert!(truncation_bound(tau, d) <= previous);
            previous = truncation_bound(tau, d);
        }
    }

    #[test]
    fn fcidump_round_trip(seed in 0u64..500, m in 2usize..5) {
        let h = random_hamiltonian(m, 2, seed);
        let mut buf = Vec::new();
        write_fcidump(&mut buf, &h).unwrap();
        let back = load_fcidump(buf.as_slice()).unwrap();
        prop_assert!((back.h1() - h.h1()).iter().all(|x| x.abs() < 1e-14));
        prop_assert!((back.v2() - h.v2()).iter().all(|x| x.abs() < 1e-14));
    }
}

#[test]
fn decoupled_one_body_siam_keeps_energy_constant() {
    let h = build_siam(&SiamParams { eps_impurity: -1.5, bath_energies: vec![-1.0, 1.0, 2.0], hybridization: 0.0, onsite_u: 0.0 })
        .unwrap();
    let part = partition_reference(&h, 1).unwrap();
    let cc = solve_ccsd(&h, &part).unwrap();
    let lambda = solve_lambda(&h, &part, &cc.t).unwrap().lambda;
    let cp = CoreCoupling::new(&part, &cc.t).unwrap();
    let opts = PropagationOptions { t_max: 50.0, ..Default::default() };
    let exact = CoreHoleLehmann::compute(&h, 1).unwrap().trajectory(TimeGrid::span(0.1, 50.0).unwrap());
    for kind in AnsatzKind::ALL {
        let prop = propagate(kind, &h, &cp, cc.energy, &opts).unwrap();
        let e0 = prop.energy[0];
        let drift = prop.energy.iter().map(|e| (e - e0).norm()).fold(0.0, f64::max);
        assert!(drift < 1e-10, "{kind}: {drift}");
        let d = overlap_trajectory(&prop, &cp, &cc.t, &lambda, &ComponentOptions::default()).unwrap();
        let g = cumulant_greens(&prop, cc.energy, Some(&d.total)).unwrap();
        assert!(g.g.iter().all(|z| (z.norm() - 1.0).abs() < 1e-10), "{kind}");
        let dev = g.g.iter().zip(&exact.g).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "{kind}: {dev}");
    }
}

#[test]
fn initial_values_and_channel_linearity() {
    let h = siam(2.0);
    let part = partition_reference(&h, 1).unwrap();
    let cc = solve_ccsd(&h, &part).unwrap();
    let lambda = solve_lambda(&h, &part, &cc.t).unwrap().lambda;
    let cp = CoreCoupling::new(&part, &cc.t).unwrap();
    let opts = PropagationOptions { t_max: 15.0, ..Default::default() };
    let om = OmegaGrid { lo: -4.0, hi: 1.0, n: 501 };
    for kind in AnsatzKind::ALL {
        let prop = propagate(kind, &h, &cp, cc.energy, &opts).unwrap();
        let d = overlap_trajectory(&prop, &cp, &cc.t, &lambda, &ComponentOptions::default()).unwrap();
        let g = cumulant_greens(&prop, cc.energy, Some(&d.total)).unwrap();
        assert!((g.g[0] + Complex64::i() * d.total[0]).norm() < 1e-14);
        assert!(g.g[0].re.abs() < 1e-14 && g.g[0].im <= 0.0);
        if kind == AnsatzKind::Tdcc {
            assert_eq!(g.g[0], -Complex64::i());
            continue;
        }
        let total = fourier_spectrum(&g, 0.05, &om).unwrap();
        let mut sum = vec![0.0; om.n];
        for (_, cg) in channel_greens(&d, &prop, cc.energy).unwrap() {
            let a = fourier_spectrum(&cg, 0.05, &om).unwrap();
            sum.iter_mut().zip(&a.a).for_each(|(s, x)| *s += x);
        }
        let dev = sum.iter().zip(&total.a).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-8, "{kind}: {dev}");
    }
}

#[test]
fn halving_output_step_leaves_trajectory_unchanged() {
    let h = siam(2.0);
    let part = partition_reference(&h, 1).unwrap();
    let cc = solve_ccsd(&h, &part).unwrap();
    let lambda = solve_lambda(&h, &part, &cc.t).unwrap().lambda;
    let cp = CoreCoupling::new(&part, &cc.t).unwrap();
    for kind in [AnsatzKind::Tdcc, AnsatzKind::Tddcc1] {
        let greens = |dt: f64| {
            let prop = propagate(kind, &h, &cp, cc.energy, &PropagationOptions { dt, t_max: 100.0, ..Default::default() }).unwrap();
            let d = overlap_trajectory(&prop, &cp, &cc.t, &lambda, &ComponentOptions::default()).unwrap();
            cumulant_greens(&prop, cc.energy, Some(&d.total)).unwrap()
        };
        let coarse = greens(0.1);
        let fine = greens(0.05);
        let dev = (0..coarse.g.len()).map(|k| (coarse.g[k] - fine.g[2 * k]).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-6, "{kind}: {dev}");
    }
}
