mod common;

use common::{c, charpoly_roots, h_one, h_two, rk4_propagator, TwoQ};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use trp_core::hamiltonian::{dh_dtau, h1, h2_base, HermitianMatrix, SweepModel, SweepParams, TwoQubitParams};
use trp_core::linalg::{inner, pauli, CMatrix};
use trp_core::propagator::{
    assemble_unitary, coupling_matrix, eig_hermitian, fix_gauge, gauge_align, propagate, propagate_column, EigenFrame,
    GaugeConvention, IntegratorOptions, Readout,
};
use trp_core::tables::{one_qubit_preset, vcp_preset};
use trp_core::targets::{target, Gate};

fn to_mat(m: &CMatrix) -> common::Mat {
    let n = m.dim();
    (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect()
}

fn hadamard() -> SweepParams {
    one_qubit_preset(Gate::Hadamard).unwrap()
}

fn short_two_qubit() -> TwoQubitParams {
    let mut p = vcp_preset();
    p.sweep.tau0 = 20.0;
    p
}

fn gauged(tau: f64, h: &HermitianMatrix) -> EigenFrame {
    let mut f = eig_hermitian(tau, h).unwrap();
    fix_gauge(&mut f, GaugeConvention::LargestComponent);
    f
}

#[test]
fn eig_of_diagonal_and_sigma_x() {
    let d = CMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
    let f = eig_hermitian(0.0, &HermitianMatrix::new(d).unwrap()).unwrap();
    assert_eq!(f.energies, vec![1.0, 2.0, 3.0, 4.0]);
    assert!(f.vectors.max_abs_diff(&CMatrix::identity(4)) < 1e-15);

    let f = eig_hermitian(0.0, &HermitianMatrix::new(pauli::x()).unwrap()).unwrap();
    assert!((f.energies[0] + 1.0).abs() < 1e-15 && (f.energies[1] - 1.0).abs() < 1e-15);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let lower = [c(s, 0.0), c(-s, 0.0)];
    let upper = [c(s, 0.0), c(s, 0.0)];
    assert!((inner(&lower, &f.vector(0)).norm() - 1.0).abs() < 1e-14);
    assert!((inner(&upper, &f.vector(1)).norm() - 1.0).abs() < 1e-14);
}

#[test]
fn two_qubit_spectrum_matches_characteristic_polynomial() {
    let p = vcp_preset();
    let h = h2_base(3.7, &p);
    let roots = charpoly_roots(&to_mat(h.matrix()));
    assert_eq!(roots.len(), 4);
    let f = eig_hermitian(3.7, &h).unwrap();
    for (e, r) in f.energies.iter().zip(&roots) {
        assert!((e - r).abs() < 1e-10, "{e} vs {r}");
    }
}

#[test]
fn gauge_align_examples() {
    let p = vcp_preset();
    let prev = gauged(1.0, &h2_base(1.0, &p));

    let same = gauge_align(&prev, prev.clone()).unwrap();
    assert!(same.vectors.max_abs_diff(&prev.vectors) < 1e-15);

    let mut rotated = prev.clone();
    let col: Vec<C64> = rotated.vector(2).iter().map(|v| v * C64::from_polar(1.0, 2.1)).collect();
    rotated.vectors.set_column(2, &col);
    let fixed = gauge_align(&prev, rotated).unwrap();
    assert!(fixed.vectors.max_abs_diff(&prev.vectors) < 1e-14);

    let perm = [2usize, 0, 3, 1];
    let cols: Vec<Vec<C64>> = perm.iter().map(|&k| prev.vector(k)).collect();
    let shuffled = EigenFrame { tau: 1.0, energies: perm.iter().map(|&k| prev.energies[k]).collect(), vectors: CMatrix::from_columns(&cols) };
    let undone = gauge_align(&prev, shuffled).unwrap();
    let overlap = &prev.vectors.adjoint() * &undone.vectors;
    assert!(overlap.max_abs_diff(&CMatrix::identity(4)) < 1e-12);
    assert_eq!(undone.energies, prev.energies);
}

#[test]
fn constant_hamiltonian_has_no_coupling() {
    let f = gauged(0.0, &HermitianMatrix::new(&pauli::x() + &pauli::z().scale_re(0.4)).unwrap());
    let g = coupling_matrix(&f, &HermitianMatrix::new(CMatrix::zeros(2)).unwrap(), &f).unwrap();
    assert!(g.frobenius_norm() < 1e-15);
}

/// `⟨E_k(τ)| dE_l/dτ⟩` by central differences, every frame aligned to `reference`.
fn fd_coupling<M: SweepModel>(model: &M, tau: f64, reference: &EigenFrame, h: f64) -> (EigenFrame, CMatrix) {
    let at = |t: f64| gauge_align(reference, eig_hermitian(t, &model.hamiltonian(t)).unwrap()).unwrap();
    let (f0, fp, fm) = (at(tau), at(tau + h), at(tau - h));
    let n = f0.dim();
    let mut g = CMatrix::zeros(n);
    for l in 0..n {
        let d: Vec<C64> = fp.vector(l).iter().zip(fm.vector(l)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        for k in 0..n {
            g[(k, l)] = inner(&f0.vector(k), &d);
        }
    }
    (f0, g)
}

fn min_gap(f: &EigenFrame) -> f64 {
    f.energies.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

fn check_hellmann_feynman<M: SweepModel>(model: &M, tau: f64) -> Result<(), TestCaseError> {
    // reference frame slightly earlier, as during integration
    let reference = gauged(tau - 0.01, &model.hamiltonian(tau - 0.01));
    prop_assume!(min_gap(&reference) > 0.05);
    let (frame, fd) = fd_coupling(model, tau, &reference, 1e-6);
    let hf = coupling_matrix(&frame, &dh_dtau(tau, model), &reference).unwrap();
    let n = frame.dim();
    let (mut diff, mut size) = (0.0f64, 0.0f64);
    for k in 0..n {
        for l in 0..n {
            diff = diff.max((hf[(k, l)] - fd[(k, l)]).norm());
            size = size.max(hf[(k, l)].norm());
            if k != l {
                prop_assert!((hf[(k, l)] + hf[(l, k)].conj()).norm() < 1e-10);
            }
        }
    }
    prop_assert!(diff <= 1e-6 * size.max(1e-3), "HF {:?} vs FD {:?}", hf, fd);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hellmann_feynman_one_qubit(tau in -80.0f64..80.0, lambda in 2.0f64..10.0, eta4 in 1e-5f64..1e-3) {
        check_hellmann_feynman(&SweepParams::new(lambda, eta4, 160.0).unwrap(), tau)?;
    }

    #[test]
    fn hellmann_feynman_two_qubit(tau in -59.0f64..59.0) {
        check_hellmann_feynman(&vcp_preset(), tau)?;
    }
}

#[test]
fn hadamard_columns_against_lab_frame_rk4() {
    let p = hadamard();
    let prop = propagate(&p, &IntegratorOptions::default()).unwrap();
    let (t0, t1) = p.window();
    let oracle = rk4_propagator(|t| h_one(t, p.lambda, p.eta4), t0, t1, 1_600_000);
    let diff = common::max_diff(&to_mat(&prop.lab_unitary), &oracle);
    assert!(diff < 1e-6, "adaptive eigenbasis vs RK4 lab frame: {diff}");
}

#[test]
fn adaptive_result_is_bracketed_by_step_halving() {
    let p = hadamard();
    let prop = propagate(&p, &IntegratorOptions::default()).unwrap();
    let (t0, t1) = p.window();
    let coarse = rk4_propagator(|t| h_one(t, p.lambda, p.eta4), t0, t1, 200_000);
    let fine = rk4_propagator(|t| h_one(t, p.lambda, p.eta4), t0, t1, 400_000);
    let step_change = common::max_diff(&coarse, &fine);
    let adaptive_vs_fine = common::max_diff(&to_mat(&prop.lab_unitary), &fine);
    assert!(adaptive_vs_fine <= step_change, "{adaptive_vs_fine} > {step_change}");
}

#[test]
fn two_qubit_columns_against_lab_frame_rk4() {
    let p = short_two_qubit();
    let (t0, t1) = p.sweep.window();
    let oracle_params = TwoQ { lambda: p.sweep.lambda, eta4: p.sweep.eta4, d1: p.d1, d2: p.d2, d3: p.d3, d4: p.d4 };
    // The level-4 shift is c₄|E₄⟩⟨E₄| with E₄ the top level; confirm it stays
    // isolated on this window so "top" is unambiguous.
    for k in 0..=200 {
        let t = t0 + (t1 - t0) * k as f64 / 200.0;
        let e = common::charpoly_roots(&h_two(t, &oracle_params));
        assert!(e[3] - e[2] > 0.5, "top level not isolated at {t}");
    }
    let h = |t: f64| {
        let base = h_two(t, &oracle_params);
        let f = eig_hermitian(t, &h2_base(t, &p)).unwrap();
        let top = f.vector(3);
        let mut m = base;
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += top[i] * top[j].conj() * p.c4;
            }
        }
        m
    };
    let oracle = rk4_propagator(h, t0, t1, 100_000);
    let prop = propagate(&p, &IntegratorOptions::default()).unwrap();
    let diff = common::max_diff(&to_mat(&prop.lab_unitary), &oracle);
    assert!(diff < 1e-6, "two-qubit adaptive vs RK4: {diff}");
}

#[test]
fn frozen_qubit1_without_its_drive() {
    let p = TwoQubitParams { sweep: SweepParams::new(5.0, 1e-3, 20.0).unwrap(), d1: 20.0, d2: 0.0, d3: 0.0, d4: 0.0, c4: 0.0 };
    for j in 0..4 {
        let col = propagate_column(&p, j, &IntegratorOptions::default()).unwrap();
        let (stay, leave) = if j < 2 { (0..2, 2..4) } else { (2..4, 0..2) };
        let w_stay: f64 = stay.map(|i| col.state[i].norm_sqr()).sum();
        let w_leave: f64 = leave.map(|i| col.state[i].norm_sqr()).sum();
        assert!(w_leave < 1e-9 && (w_stay - 1.0).abs() < 1e-9, "column {j}: {w_leave}");
    }
}

#[test]
fn hadamard_first_column_is_an_even_split() {
    // The scored matrix is read out in the end-point eigenbases, which differ
    // from the computational basis by a mixing angle of order 1/(2τ) at |τ| = 80.
    let prop = propagate(&hadamard(), &IntegratorOptions::default()).unwrap();
    // Tr P = 8.82e-6 bounds every entry's deviation from U_H by δ = √TrP, hence
    // ||U₀₀|² − 1/2| ≤ 2δ/√2 + δ².
    let delta = 8.82e-6f64.sqrt();
    let bound = std::f64::consts::SQRT_2 * delta + delta * delta;
    let w = prop.unitary[(0, 0)].norm_sqr();
    assert!((w - 0.5).abs() <= bound, "{w} outside 1/2 ± {bound}");
}

#[test]
fn self_convergence_of_final_state() {
    let p = hadamard();
    let loose = propagate_column(&p, 0, &IntegratorOptions::default()).unwrap();
    let tight = propagate_column(&p, 0, &IntegratorOptions { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() }).unwrap();
    let d = loose.state.iter().zip(&tight.state).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(d < 1e-8, "final states differ by {d}");
}

#[test]
fn gauge_convention_does_not_change_the_gate() {
    let p = hadamard();
    for readout in [Readout::Computational, Readout::Eigenbasis] {
        let a = propagate(&p, &IntegratorOptions { gauge: GaugeConvention::LargestComponent, readout, ..Default::default() }).unwrap();
        let b = propagate(&p, &IntegratorOptions { gauge: GaugeConvention::FirstComponent, readout, ..Default::default() }).unwrap();
        assert!(a.unitary.max_abs_diff(&b.unitary) < 1e-6);
    }
}

#[test]
fn published_one_qubit_best_points() {
    for (gate, published) in [(Gate::Hadamard, 8.82e-6), (Gate::Not, 1.10e-5)] {
        let r = assemble_unitary(&one_qubit_preset(gate).unwrap(), &target(gate), &IntegratorOptions::default()).unwrap();
        assert!((r.tr_p / published - 1.0).abs() < 0.05, "{gate}: {} vs {published}", r.tr_p);
        assert!(r.unitary.unitarity_defect() <= 1e-8);
        assert!(r.max_norm_drift <= 1e-9);
        assert!((r.tr_p - 4.0 * (1.0 - r.fidelity)).abs() < 1e-12);
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    assert!(assemble_unitary(&hadamard(), &target(Gate::Vcp), &IntegratorOptions::default()).is_err());
}

#[test]
fn library_hamiltonian_is_what_the_oracle_integrates() {
    let p = hadamard();
    let d = common::max_diff(&to_mat(h1(-33.0, &p).matrix()), &h_one(-33.0, p.lambda, p.eta4));
    assert!(d < 1e-14);
}
