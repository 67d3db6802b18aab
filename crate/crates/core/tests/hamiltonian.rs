mod common;

use common::{c, h_one, h_two, max_diff, TwoQ};
use proptest::prelude::*;
use trp_core::hamiltonian::{dh_dtau, h1, h2_base, resonance_times, twist_phi4, HermitianMatrix, SweepParams, TwistSense, TwoQubitParams};
use trp_core::linalg::CMatrix;
use trp_core::propagator::eig_hermitian;

fn to_mat(m: &CMatrix) -> common::Mat {
    let n = m.dim();
    (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect()
}

fn sweep(lambda: f64, eta4: f64, tau0: f64) -> SweepParams {
    SweepParams::new(lambda, eta4, tau0).unwrap()
}

fn two(lambda: f64, eta4: f64, d: [f64; 4]) -> TwoQubitParams {
    TwoQubitParams { sweep: sweep(lambda, eta4, 120.0), d1: d[0], d2: d[1], d3: d[2], d4: d[3], c4: 0.0 }
}

fn vcp_like() -> TwoQubitParams {
    two(5.1, 2.4e-4, [11.702, -2.6, -0.41, 6.6650])
}

#[test]
fn twist_phi4_examples() {
    assert_eq!(twist_phi4(0.0, &sweep(5.0, 1e-3, 80.0)), 0.0);
    assert!((twist_phi4(1.0, &sweep(2.0, 4.0, 80.0)) - 1.0).abs() < 1e-15);
    // (η₄ / 2λ) τ⁴ = 2.928e-4 · 2 560 000 / 11.7022
    let expected = 749.568 / 11.7022;
    let got = twist_phi4(40.0, &sweep(5.8511, 2.9280e-4, 80.0));
    assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
}

#[test]
fn h1_at_origin_is_minus_sigma_x() {
    let h = h1(0.0, &sweep(1.0, 0.37, 10.0));
    let want = vec![vec![c(0.0, 0.0), c(-1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]];
    assert!(max_diff(&to_mat(h.matrix()), &want) < 1e-15);
}

#[test]
fn h1_matches_independent_construction() {
    let p = sweep(5.8511, 2.9280e-4, 160.0);
    for &tau in &[-80.0, -58.4, -12.5, 0.0, 3.3, 40.0, 79.9] {
        let lib = to_mat(h1(tau, &p).matrix());
        assert!(max_diff(&lib, &h_one(tau, p.lambda, p.eta4)) < 1e-13, "tau = {tau}");
    }
}

#[test]
fn h1_gap_at_minus_forty() {
    let p = sweep(5.8511, 2.9280e-4, 80.0);
    let f = eig_hermitian(-40.0, &h1(-40.0, &p)).unwrap();
    let gap = f.energies[1] - f.energies[0];
    let want = 2.0 / 5.8511 * 1601f64.sqrt();
    assert!((gap - want).abs() < 1e-12, "{gap} vs {want}");
}

#[test]
fn literal_twist_flips_sigma_y() {
    let p = sweep(3.0, 0.1, 10.0);
    let q = p.with_twist(TwistSense::Literal);
    let tau = 1.7;
    let a = h1(tau, &p).matrix().clone();
    let b = h1(tau, &q).matrix().clone();
    assert!((a[(0, 1)] - b[(0, 1)].conj()).norm() < 1e-15);
    assert!((a[(0, 0)] - b[(0, 0)]).norm() < 1e-15);
}

#[test]
fn h2_base_uncoupled_transverse_sum() {
    let h = h2_base(0.0, &two(1.0, 0.3, [0.0, 0.0, 1.0, 0.0]));
    let sx = common::sx();
    let i2 = common::eye(2);
    let want = common::scale(&common::add(&common::kron(&sx, &i2), &common::kron(&i2, &sx)), -1.0);
    assert!(max_diff(&to_mat(h.matrix()), &want) < 1e-15);
}

#[test]
fn h2_base_matches_independent_construction() {
    let p = vcp_like();
    let oracle = TwoQ { lambda: 5.1, eta4: 2.4e-4, d1: 11.702, d2: -2.6, d3: -0.41, d4: 6.6650 };
    for &tau in &[-60.0, -33.3, 0.0, 7.25, 59.0] {
        assert!(max_diff(&to_mat(h2_base(tau, &p).matrix()), &h_two(tau, &oracle)) < 1e-12, "tau = {tau}");
    }
}

#[test]
fn h2_base_diagonal_at_origin() {
    let (d1, d2, d4) = (11.702, -2.6, 6.6650);
    let h = h2_base(0.0, &vcp_like());
    // basis |00⟩,|01⟩,|10⟩,|11⟩ with σz eigenvalue +1 on |0⟩
    let pattern = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    for (k, (z1, z2)) in pattern.iter().enumerate() {
        let want = -(d1 + d2) / 2.0 * z1 - d2 / 2.0 * z2 - std::f64::consts::FRAC_PI_2 * d4 * z1 * z2;
        assert!((h.matrix()[(k, k)] - c(want, 0.0)).norm() < 1e-12, "entry {k}");
    }
    assert!((h.matrix()[(0, 0)].re - (-4.551 + 1.3 - std::f64::consts::FRAC_PI_2 * 6.665)).abs() < 1e-12);
}

#[test]
fn h2_base_without_qubit1_drive_keeps_qubit1_sectors_apart() {
    let h = h2_base(12.3, &two(4.0, 1e-3, [1.0, 0.5, 0.0, 0.7]));
    for i in 0..2 {
        for j in 2..4 {
            assert_eq!(h.matrix()[(i, j)], c(0.0, 0.0));
        }
    }
}

#[test]
fn dh1_at_origin() {
    let lambda = 2.5;
    let d = dh_dtau(0.0, &sweep(lambda, 0.02, 10.0));
    let want = common::scale(&common::sz(), -1.0 / lambda);
    assert!(max_diff(&to_mat(d.matrix()), &want) < 1e-15);
}

#[test]
fn dh1_transverse_rate_at_unit_time() {
    // λ=2, η₄=4, τ=1: the transverse entry of dH/dτ has modulus
    // (1/λ)·dφ₄/dτ = (1/2)·(2·4/2)·1³ = 2
    let d = dh_dtau(1.0, &sweep(2.0, 4.0, 10.0));
    assert!((d.matrix()[(0, 1)].norm() - 2.0).abs() < 1e-14);
}

#[test]
fn resonance_time_examples() {
    let r = resonance_times(&sweep(5.0, 4e-4, 200.0));
    let taus: Vec<f64> = r.iter().map(|x| x.tau).collect();
    assert!((taus[0] + 50.0).abs() < 1e-12 && taus[1] == 0.0 && (taus[2] - 50.0).abs() < 1e-12);
    assert!(r.iter().all(|x| x.in_window));

    let r = resonance_times(&sweep(5.0, 1.0, 10.0));
    assert!((r[0].tau + 1.0).abs() < 1e-15 && (r[2].tau - 1.0).abs() < 1e-15);

    let r = resonance_times(&sweep(5.8511, 2.9280e-4, 80.0));
    assert!(r[1].in_window && !r[0].in_window && !r[2].in_window);
    assert!((r[2].tau - 58.44).abs() < 5e-3 && (r[0].tau + 58.44).abs() < 5e-3);
}

#[test]
fn resonances_are_detuning_zeros_of_the_physical_sweep() {
    // Independent route: bisection on τ/λ − (1/2)dφ₄/dτ, i.e. at − (ħ/2)φ̇ = 0 in
    // dimensionless form, for the positive root.
    let p = sweep(5.8511, 4e-4, 200.0);
    let f = |t: f64| t / p.lambda - 0.5 * (2.0 * p.eta4 / p.lambda) * t.powi(3);
    let (mut lo, mut hi) = (1.0, 1000.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo).signum() == f(mid).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((resonance_times(&p)[2].tau - 0.5 * (lo + hi)).abs() < 1e-9);
}

#[test]
fn level_shift_keeps_eigenvectors() {
    let p = vcp_like();
    for k in 0..20 {
        let tau = -55.0 + 5.5 * k as f64;
        let h = h2_base(tau, &p);
        let f = eig_hermitian(tau, &h).unwrap();
        let top = f.vector(3);
        let c4 = 5.0003;
        let mut shifted = h.matrix().clone();
        for i in 0..4 {
            for j in 0..4 {
                shifted[(i, j)] += top[i] * top[j].conj() * c4;
            }
        }
        let g = eig_hermitian(tau, &HermitianMatrix::new(shifted.clone()).unwrap()).unwrap();
        // the shifted top level stays on top; the rest are untouched
        for k in 0..3 {
            assert!((g.energies[k] - f.energies[k]).abs() < 1e-12);
        }
        assert!((g.energies[3] - f.energies[3] - c4).abs() < 1e-12);
        for k in 0..4 {
            let v = f.vector(k);
            let hv = shifted.mul_vec(&v);
            let e = if k == 3 { f.energies[3] + c4 } else { f.energies[k] };
            let res: f64 = hv.iter().zip(&v).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-12, "tau {tau} level {k}: residual {res}");
        }
    }
}

fn fd_relative_error(plus: &CMatrix, minus: &CMatrix, analytic: &CMatrix, h: f64) -> f64 {
    let fd = (plus - minus).scale_re(1.0 / (2.0 * h));
    fd.max_abs_diff(analytic) / analytic.frobenius_norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn h1_hermitian_traceless_with_closed_form_spectrum(
        tau in -100.0f64..100.0, lambda in 0.5f64..20.0, eta4 in 1e-6f64..1e-2
    ) {
        let p = sweep(lambda, eta4, 200.0);
        let h = h1(tau, &p);
        prop_assert!(h.matrix().hermiticity_defect() <= 1e-14);
        prop_assert!(h.matrix().trace().norm() < 1e-13);
        let f = eig_hermitian(tau, &h).unwrap();
        let e = (tau * tau + 1.0).sqrt() / lambda;
        prop_assert!((f.energies[0] + e).abs() < 1e-12 * (1.0 + e));
        prop_assert!((f.energies[1] - e).abs() < 1e-12 * (1.0 + e));
    }

    #[test]
    fn h2_hermitian_traceless(
        tau in -80.0f64..80.0, lambda in 0.5f64..20.0, eta4 in 1e-6f64..1e-2,
        d1 in -20.0f64..20.0, d2 in -5.0f64..5.0, d3 in -2.0f64..2.0, d4 in -10.0f64..10.0
    ) {
        let h = h2_base(tau, &two(lambda, eta4, [d1, d2, d3, d4]));
        prop_assert!(h.matrix().hermiticity_defect() <= 1e-14);
        prop_assert!(h.matrix().trace().norm() < 1e-12);
    }

    #[test]
    fn dh1_matches_central_differences(
        tau in -60.0f64..60.0, lambda in 1.0f64..10.0, eta4 in 1e-5f64..1e-3
    ) {
        let p = sweep(lambda, eta4, 200.0);
        let h = 1e-5;
        let err = fd_relative_error(h1(tau + h, &p).matrix(), h1(tau - h, &p).matrix(), dh_dtau(tau, &p).matrix(), h);
        prop_assert!(err < 1e-6, "relative error {}", err);
    }

    #[test]
    fn dh2_matches_central_differences(
        tau in -60.0f64..60.0, lambda in 1.0f64..10.0, eta4 in 1e-5f64..1e-3,
        d1 in -20.0f64..20.0, d2 in -5.0f64..5.0, d3 in -2.0f64..2.0, d4 in -10.0f64..10.0
    ) {
        let p = two(lambda, eta4, [d1, d2, d3, d4]);
        let h = 1e-5;
        let err = fd_relative_error(h2_base(tau + h, &p).matrix(), h2_base(tau - h, &p).matrix(), dh_dtau(tau, &p).matrix(), h);
        prop_assert!(err < 1e-6, "relative error {}", err);
    }

    #[test]
    fn resonance_roots_solve_the_cubic(eta4 in 1e-5f64..10.0, tau0 in 1.0f64..500.0) {
        for r in resonance_times(&sweep(3.0, eta4, tau0)) {
            prop_assert!((r.tau - eta4 * r.tau.powi(3)).abs() < 1e-12);
            prop_assert_eq!(r.in_window, r.tau.abs() <= tau0 / 2.0);
        }
    }
}
