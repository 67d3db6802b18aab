//! Eigenbasis propagation of a TRP sweep and assembly of the realized gate.
//!
//! The state is expanded as `ψ = Σ a_k e^{−iθ_k} |E_k(τ)⟩` with
//! `θ_k = ∫(E_k + shift_k) dτ − ∫γ̇_k dτ`, and the amplitudes obey
//! `da_k/dτ = −Σ_{l≠k} a_l Γ_kl e^{−i(θ_l − θ_k)}`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrpError};
use crate::hamiltonian::{HermitianMatrix, SweepModel};
use crate::linalg::{eigh, inner, norm_sqr, CMatrix, ZERO};
use crate::metrics;
use crate::ode::{self, OdeSystem, StageIssue, StepControl};

/// Energy gaps below this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Permutation scores closer than this make level matching ambiguous.
pub const MATCH_TOL: f64 = 1e-3;
/// Largest tolerated drift of `Σ|a_k|²` from one.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Instantaneous eigenvalues and eigenvectors (as columns) at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenFrame {
    pub tau: f64,
    pub energies: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenFrame {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

/// Phase convention for a freshly diagonalized frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeConvention {
    /// Largest-magnitude component real and positive.
    #[default]
    LargestComponent,
    /// First component real and positive.
    FirstComponent,
}

/// How the final state is turned into the matrix that is scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Matrix elements between instantaneous eigenstates at the two ends of the
    /// sweep, each computational label attached to the eigenstate it dominates,
    /// eigenvectors in the first-component-real gauge.
    #[default]
    Eigenbasis,
    /// Plain propagator in the computational basis.
    Computational,
}

/// Ascending, ungauged eigen-decomposition.
pub fn eig_hermitian(tau: f64, h: &HermitianMatrix) -> Result<EigenFrame> {
    let e = eigh(h.matrix())?;
    Ok(EigenFrame { tau, energies: e.values, vectors: e.vectors })
}

/// Applies `convention` to every column of `frame`.
pub fn fix_gauge(frame: &mut EigenFrame, convention: GaugeConvention) {
    let n = frame.dim();
    for k in 0..n {
        let col = frame.vectors.column(k);
        let pivot = match convention {
            GaugeConvention::FirstComponent if col[0].norm() > 1e-300 => col[0],
            _ => *col.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("non-empty column"),
        };
        let phase = pivot.conj() / pivot.norm();
        let fixed: Vec<C64> = col.iter().map(|v| v * phase).collect();
        frame.vectors.set_column(k, &fixed);
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Best and runner-up permutation assigning column `perm[k]` of a score matrix to row `k`.
fn best_assignment(score: &[Vec<f64>], tau: f64) -> Result<Vec<usize>> {
    let n = score.len();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut second = f64::NEG_INFINITY;
    for p in permutations(n) {
        let s: f64 = p.iter().enumerate().map(|(k, &l)| score[k][l]).sum();
        if s > best.0 {
            second = best.0;
            best = (s, p);
        } else if s > second {
            second = s;
        }
    }
    if n > 1 && best.0 - second < MATCH_TOL {
        return Err(TrpError::AmbiguousMatching { tau, best: best.0, second });
    }
    Ok(best.1)
}

/// Relabels and rephases `next` so that column `k` continues column `k` of `prev`
/// with a real, positive overlap.
pub fn gauge_align(prev: &EigenFrame, next: EigenFrame) -> Result<EigenFrame> {
    let n = prev.dim();
    if next.dim() != n {
        return Err(TrpError::DimensionMismatch { expected: n, got: next.dim() });
    }
    let prev_cols: Vec<Vec<C64>> = (0..n).map(|k| prev.vector(k)).collect();
    let next_cols: Vec<Vec<C64>> = (0..n).map(|k| next.vector(k)).collect();
    let overlap: Vec<Vec<C64>> =
        prev_cols.iter().map(|p| next_cols.iter().map(|q| inner(p, q)).collect()).collect();
    let score: Vec<Vec<f64>> = overlap.iter().map(|row| row.iter().map(|o| o.norm()).collect()).collect();
    let perm = best_assignment(&score, next.tau)?;

    let mut vectors = CMatrix::zeros(n);
    let mut energies = vec![0.0; n];
    for (k, &l) in perm.iter().enumerate() {
        let o = overlap[k][l];
        let phase = if o.norm() > 0.0 { o.conj() / o.norm() } else { C64::new(1.0, 0.0) };
        let col: Vec<C64> = next_cols[l].iter().map(|v| v * phase).collect();
        vectors.set_column(k, &col);
        energies[k] = next.energies[l];
    }
    Ok(EigenFrame { tau: next.tau, energies, vectors })
}

/// Non-adiabatic couplings `Γ_kl = ⟨E_k| d/dτ |E_l⟩` for a frame aligned to `reference`.
///
/// Off-diagonal entries use `⟨E_k|dH|E_l⟩ / (E_l − E_k)`. The diagonal follows
/// from the alignment gauge, `Im⟨ref_k|d/dτ E_k⟩ = 0`, which gives
/// `Γ_kk = −i Im(Σ_{l≠k} ⟨ref_k|E_l⟩ Γ_lk) / ⟨ref_k|E_k⟩`.
pub fn coupling_matrix(frame: &EigenFrame, dh: &HermitianMatrix, reference: &EigenFrame) -> Result<CMatrix> {
    let n = frame.dim();
    let cols: Vec<Vec<C64>> = (0..n).map(|k| frame.vector(k)).collect();
    let mut g = CMatrix::zeros(n);
    for l in 0..n {
        let dhl = dh.matrix().mul_vec(&cols[l]);
        for k in 0..n {
            if k == l {
                continue;
            }
            let gap = frame.energies[l] - frame.energies[k];
            if gap.abs() < DEGENERACY_TOL {
                return Err(TrpError::NearDegeneracy { tau: frame.tau, k: k.min(l), l: k.max(l), gap: gap.abs() });
            }
            g[(k, l)] = inner(&cols[k], &dhl) / gap;
        }
    }
    for k in 0..n {
        let rk = reference.vector(k);
        let mut s = ZERO;
        for (l, col) in cols.iter().enumerate() {
            if l != k {
                s += inner(&rk, col) * g[(l, k)];
            }
        }
        let self_overlap = inner(&rk, &cols[k]).re;
        g[(k, k)] = C64::new(0.0, -s.im / self_overlap);
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    /// Defaults to `tau0 / 1e4`.
    pub initial_step: Option<f64>,
    /// Defaults to `tau0 / 50`.
    pub max_step: Option<f64>,
    pub gauge: GaugeConvention,
    pub readout: Readout,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_steps: 2_000_000,
            initial_step: None,
            max_step: None,
            gauge: GaugeConvention::default(),
            readout: Readout::default(),
        }
    }
}

impl IntegratorOptions {
    fn control(&self, tau0: f64) -> StepControl {
        StepControl {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            initial_step: self.initial_step.unwrap_or(tau0 / 1e4),
            max_step: self.max_step.unwrap_or(tau0 / 50.0),
            min_step: 1e-12,
            max_steps: self.max_steps,
        }
    }
}

/// Amplitudes and accumulated phases at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagationState {
    pub tau: f64,
    pub amplitudes: Vec<C64>,
    /// `∫(E_k + shift_k) dτ`
    pub phase_integrals: Vec<f64>,
    /// `∫γ̇_k dτ`
    pub geometric_integrals: Vec<f64>,
}

impl PropagationState {
    fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(4 * self.amplitudes.len());
        y.extend(self.amplitudes.iter().map(|a| a.re));
        y.extend(self.amplitudes.iter().map(|a| a.im));
        y.extend_from_slice(&self.phase_integrals);
        y.extend_from_slice(&self.geometric_integrals);
        y
    }

    fn unpack(tau: f64, y: &[f64]) -> Self {
        let n = y.len() / 4;
        Self {
            tau,
            amplitudes: (0..n).map(|k| C64::new(y[k], y[n + k])).collect(),
            phase_integrals: y[2 * n..3 * n].to_vec(),
            geometric_integrals: y[3 * n..].to_vec(),
        }
    }

    pub fn norm_drift(&self) -> f64 {
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs()
    }

    /// `Σ a_k e^{−iθ_k} |E_k⟩` in the computational basis.
    pub fn physical_state(&self, frame: &EigenFrame) -> Vec<C64> {
        let n = self.amplitudes.len();
        let mut psi = vec![ZERO; n];
        for k in 0..n {
            let theta = self.phase_integrals[k] - self.geometric_integrals[k];
            let c = self.amplitudes[k] * C64::from_polar(1.0, -theta);
            for (i, v) in frame.vectors.column(k).iter().enumerate() {
                psi[i] += c * v;
            }
        }
        psi
    }
}

struct EigenbasisSystem<'a, M: SweepModel + ?Sized> {
    model: &'a M,
    reference: EigenFrame,
    shifted_level: usize,
    max_norm_drift: f64,
}

impl<M: SweepModel + ?Sized> EigenbasisSystem<'_, M> {
    fn frame_at(&self, tau: f64) -> Result<EigenFrame> {
        gauge_align(&self.reference, eig_hermitian(tau, &self.model.hamiltonian(tau))?)
    }
}

impl<M: SweepModel + ?Sized> OdeSystem for EigenbasisSystem<'_, M> {
    fn rhs(&mut self, tau: f64, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), StageIssue> {
        let n = y.len() / 4;
        let frame = self.frame_at(tau)?;
        let g = coupling_matrix(&frame, &self.model.derivative(tau), &self.reference)?;
        let theta: Vec<f64> = (0..n).map(|k| y[2 * n + k] - y[3 * n + k]).collect();
        for k in 0..n {
            let mut da = ZERO;
            for l in 0..n {
                if l != k {
                    let a = C64::new(y[l], y[n + l]);
                    da -= a * g[(k, l)] * C64::from_polar(1.0, theta[k] - theta[l]);
                }
            }
            dy[k] = da.re;
            dy[n + k] = da.im;
            let shift = if k == self.shifted_level { self.model.top_level_shift() } else { 0.0 };
            dy[2 * n + k] = frame.energies[k] + shift;
            // γ̇_k = iΓ_kk
            dy[3 * n + k] = -g[(k, k)].im;
        }
        Ok(())
    }

    fn accept(&mut self, tau: f64, y: &[f64]) -> Result<()> {
        self.reference = self.frame_at(tau)?;
        let n = y.len() / 4;
        let drift = ((0..n).map(|k| y[k] * y[k] + y[n + k] * y[n + k]).sum::<f64>() - 1.0).abs();
        self.max_norm_drift = self.max_norm_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(TrpError::NormDrift { tau, drift });
        }
        Ok(())
    }
}

/// Final state of one propagated column plus integration diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnResult {
    pub state: Vec<C64>,
    pub final_amplitudes: PropagationState,
    pub final_frame: EigenFrame,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub max_norm_drift: f64,
}

/// Initial frame: ascending levels in the requested gauge.
pub fn initial_frame<M: SweepModel + ?Sized>(model: &M, gauge: GaugeConvention) -> Result<EigenFrame> {
    let (t0, _) = model.sweep().window();
    let mut f = eig_hermitian(t0, &model.hamiltonian(t0))?;
    fix_gauge(&mut f, gauge);
    Ok(f)
}

/// Propagates an arbitrary normalized initial state across the full sweep.
pub fn propagate_state<M: SweepModel + ?Sized>(model: &M, psi0: &[C64], opts: &IntegratorOptions) -> Result<ColumnResult> {
    model.validate()?;
    let dim = model.dim();
    if psi0.len() != dim {
        return Err(TrpError::DimensionMismatch { expected: dim, got: psi0.len() });
    }
    let (t0, t1) = model.sweep().window();
    let frame0 = initial_frame(model, opts.gauge)?;
    let start = PropagationState {
        tau: t0,
        amplitudes: (0..dim).map(|k| inner(&frame0.vector(k), psi0)).collect(),
        phase_integrals: vec![0.0; dim],
        geometric_integrals: vec![0.0; dim],
    };
    let mut y = start.pack();
    let shifted_level = model.shifted_level(&frame0.vectors);
    let mut sys = EigenbasisSystem { model, reference: frame0, shifted_level, max_norm_drift: 0.0 };
    let stats = ode::integrate(&mut sys, t0, t1, &mut y, &opts.control(model.sweep().tau0))?;
    let end = PropagationState::unpack(t1, &y);
    // Integrator drift is reported, not carried into the output: the returned
    // state keeps the input norm so assembled columns have exact unit length.
    let mut state = end.physical_state(&sys.reference);
    let rescale = (norm_sqr(psi0) / norm_sqr(&state)).sqrt();
    state.iter_mut().for_each(|v| *v *= rescale);
    Ok(ColumnResult {
        state,
        final_amplitudes: end,
        final_frame: sys.reference,
        steps_accepted: stats.accepted,
        steps_rejected: stats.rejected,
        max_norm_drift: sys.max_norm_drift,
    })
}

/// Propagates computational basis state `index` from the start to the end of the sweep.
pub fn propagate_column<M: SweepModel + ?Sized>(model: &M, index: usize, opts: &IntegratorOptions) -> Result<ColumnResult> {
    let dim = model.dim();
    if index >= dim {
        return Err(TrpError::InvalidInput(format!("basis index {index} out of range for dimension {dim}")));
    }
    let mut psi0 = vec![ZERO; dim];
    psi0[index] = C64::new(1.0, 0.0);
    propagate_state(model, &psi0, opts)
}

/// Eigenvectors at `tau` in the first-component-real gauge, reordered so that
/// column `j` is the eigenvector whose dominant weight sits on basis state `j`.
pub fn labelled_eigenbasis<M: SweepModel + ?Sized>(model: &M, tau: f64) -> Result<CMatrix> {
    let mut f = eig_hermitian(tau, &model.hamiltonian(tau))?;
    fix_gauge(&mut f, GaugeConvention::FirstComponent);
    let n = f.dim();
    let score: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|k| f.vectors[(j, k)].norm_sqr()).collect()).collect();
    let perm = best_assignment(&score, tau)?;
    let cols: Vec<Vec<C64>> = perm.iter().map(|&k| f.vector(k)).collect();
    Ok(CMatrix::from_columns(&cols))
}

/// Realized propagator and diagnostics, before scoring.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    /// Matrix selected by the readout option.
    pub unitary: CMatrix,
    /// Physical propagator in the computational basis.
    pub lab_unitary: CMatrix,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub max_norm_drift: f64,
}

pub fn propagate<M: SweepModel + ?Sized>(model: &M, opts: &IntegratorOptions) -> Result<Propagation> {
    let dim = model.dim();
    let columns: Vec<ColumnResult> = (0..dim)
        .into_par_iter()
        .map(|j| propagate_column(model, j, opts).map_err(|e| TrpError::Column { column: j, source: Box::new(e) }))
        .collect::<Result<_>>()?;
    let lab = CMatrix::from_columns(&columns.iter().map(|c| c.state.clone()).collect::<Vec<_>>());
    let unitary = match opts.readout {
        Readout::Computational => lab.clone(),
        Readout::Eigenbasis => {
            let (t0, t1) = model.sweep().window();
            let start = labelled_eigenbasis(model, t0)?;
            let end = labelled_eigenbasis(model, t1)?;
            &(&end.adjoint() * &lab) * &start
        }
    };
    Ok(Propagation {
        unitary,
        lab_unitary: lab,
        steps_accepted: columns.iter().map(|c| c.steps_accepted).sum(),
        steps_rejected: columns.iter().map(|c| c.steps_rejected).sum(),
        max_norm_drift: columns.iter().map(|c| c.max_norm_drift).fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub unitary: CMatrix,
    pub tr_p: f64,
    pub fidelity: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub max_norm_drift: f64,
}

/// Simulates every basis column and scores the result against `target`.
pub fn assemble_unitary<M: SweepModel + ?Sized>(model: &M, target: &CMatrix, opts: &IntegratorOptions) -> Result<GateResult> {
    if target.dim() != model.dim() {
        return Err(TrpError::DimensionMismatch { expected: model.dim(), got: target.dim() });
    }
    let p = propagate(model, opts)?;
    Ok(GateResult {
        tr_p: metrics::tr_p(&p.unitary, target)?,
        fidelity: metrics::fidelity(&p.unitary, target)?,
        unitary: p.unitary,
        steps_accepted: p.steps_accepted,
        steps_rejected: p.steps_rejected,
        max_norm_drift: p.max_norm_drift,
    })
}
