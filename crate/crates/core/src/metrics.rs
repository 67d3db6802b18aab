//! Gate-error scores: the Tr P bound, fidelity and per-state error probability.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrpError};
use crate::linalg::{inner, norm_sqr, CMatrix};

fn check_dims(actual: &CMatrix, target: &CMatrix) -> Result<()> {
    if actual.dim() != target.dim() {
        return Err(TrpError::DimensionMismatch { expected: target.dim(), got: actual.dim() });
    }
    Ok(())
}

/// `Tr[(U_a − U_t)†(U_a − U_t)]`, the squared Frobenius distance.
pub fn tr_p(actual: &CMatrix, target: &CMatrix) -> Result<f64> {
    check_dims(actual, target)?;
    Ok(actual.as_slice().iter().zip(target.as_slice()).map(|(a, t)| (a - t).norm_sqr()).sum())
}

/// `(1/2ⁿ) Re Tr(U_a† U_t)`.
pub fn fidelity(actual: &CMatrix, target: &CMatrix) -> Result<f64> {
    check_dims(actual, target)?;
    let overlap: C64 = actual.as_slice().iter().zip(target.as_slice()).map(|(a, t)| a.conj() * t).sum();
    Ok(overlap.re / actual.dim() as f64)
}

/// Which form of the per-state error probability to report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeForm {
    /// `⟨ψ⊥|ψ⊥⟩`
    #[default]
    Norm,
    /// `|⟨ψ⊥|ψ⊥⟩|²`, as literally written in the original definition.
    Squared,
}

/// Error probability of `actual` on `psi`: the weight of `U_a ψ` outside `U_t ψ`.
pub fn pe_state(actual: &CMatrix, target: &CMatrix, psi: &[C64], form: PeForm) -> Result<f64> {
    check_dims(actual, target)?;
    if psi.len() != actual.dim() {
        return Err(TrpError::DimensionMismatch { expected: actual.dim(), got: psi.len() });
    }
    let n = norm_sqr(psi);
    if (n - 1.0).abs() > 1e-12 {
        return Err(TrpError::InvalidInput(format!("state is not normalized (norm² = {n})")));
    }
    Ok(pe_unchecked(actual, target, psi, form))
}

fn pe_unchecked(actual: &CMatrix, target: &CMatrix, psi: &[C64], form: PeForm) -> f64 {
    let pa = actual.mul_vec(psi);
    let pt = target.mul_vec(psi);
    let perp: Vec<C64> = {
        let c = inner(&pt, &pa);
        pa.iter().zip(&pt).map(|(a, t)| a - t * c).collect()
    };
    let w = norm_sqr(&perp).clamp(0.0, 1.0);
    match form {
        PeForm::Norm => w,
        PeForm::Squared => w * w,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseOptions {
    pub samples: usize,
    pub climb_steps: usize,
    pub seed: u64,
}

impl Default for WorstCaseOptions {
    fn default() -> Self {
        Self { samples: 256, climb_steps: 50, seed: 0x7270_6573 }
    }
}

fn random_state(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let n = norm_sqr(&v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Sampled lower estimate of the worst-case error probability: Haar-random
/// starts refined by a shrinking random-perturbation hill climb.
pub fn worst_case_pe(actual: &CMatrix, target: &CMatrix, opts: &WorstCaseOptions) -> Result<f64> {
    check_dims(actual, target)?;
    if opts.samples == 0 {
        return Err(TrpError::InvalidInput("worst_case_pe needs at least one sample".into()));
    }
    let dim = actual.dim();
    let best = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
            let mut psi = random_state(&mut rng, dim);
            let mut val = pe_unchecked(actual, target, &psi, PeForm::Norm);
            let mut step = 0.3;
            for _ in 0..opts.climb_steps {
                let kick = random_state(&mut rng, dim);
                let mut trial: Vec<C64> = psi.iter().zip(&kick).map(|(p, k)| p + k * step).collect();
                let n = norm_sqr(&trial).sqrt();
                trial.iter_mut().for_each(|x| *x /= n);
                let v = pe_unchecked(actual, target, &trial, PeForm::Norm);
                if v > val {
                    psi = trial;
                    val = v;
                } else {
                    step *= 0.8;
                }
            }
            val
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub tr_p: f64,
    pub fidelity: f64,
    pub pe_bound: f64,
    pub worst_case_pe_estimate: f64,
    /// Present for two-qubit scores, where the fidelity sometimes quoted as
    /// `1 − Tr P/4` differs from the `1 − Tr P/8` computed here.
    pub note: Option<String>,
}

pub fn score(actual: &CMatrix, target: &CMatrix, opts: &WorstCaseOptions) -> Result<ScoreReport> {
    let tp = tr_p(actual, target)?;
    let f = fidelity(actual, target)?;
    let worst = worst_case_pe(actual, target, opts)?;
    let note = (actual.dim() == 4).then(|| {
        format!(
            "two-qubit fidelity uses 1 - TrP/8 = {f:.6}; the alternative 1 - TrP/4 would give {:.6}",
            1.0 - tp / 4.0
        )
    });
    Ok(ScoreReport { tr_p: tp, fidelity: f, pe_bound: tp, worst_case_pe_estimate: worst, note })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{target, Gate};

    #[test]
    fn identical_gates_score_perfectly() {
        let h = target(Gate::Hadamard);
        assert_eq!(tr_p(&h, &h).unwrap(), 0.0);
        assert!((fidelity(&h, &h).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(tr_p(&target(Gate::Not), &target(Gate::Vcp)).is_err());
    }

    #[test]
    fn not_against_identity_on_zero() {
        let psi = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let v = pe_state(&target(Gate::Not), &target(Gate::Identity), &psi, PeForm::Norm).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }
}
