//! Dimensionless TRP Hamiltonians, their time derivatives and the quartic twist.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrpError};
use crate::linalg::{pauli, CMatrix};

/// Handedness of the transverse twist.
///
/// With `Resonant` the transverse field rotates so that the detuning and the
/// twist rate cancel at `τ = η₄τ³`, giving three passes through resonance for
/// the quartic profile. `Literal` flips the σ_y sign, which leaves only the
/// `τ = 0` crossing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwistSense {
    #[default]
    Resonant,
    Literal,
}

impl TwistSense {
    /// Sign multiplying the σ_y component of the one-qubit transverse field.
    pub fn one_qubit_sign(self) -> f64 {
        match self {
            TwistSense::Resonant => -1.0,
            TwistSense::Literal => 1.0,
        }
    }

    /// Sign for the two-qubit form, whose longitudinal sweep runs the other way.
    pub fn two_qubit_sign(self) -> f64 {
        -self.one_qubit_sign()
    }
}

/// Dimensionless sweep: inversion rate `lambda`, twist strength `eta4` and
/// total duration `tau0` (the sweep covers `[-tau0/2, tau0/2]`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub lambda: f64,
    pub eta4: f64,
    pub tau0: f64,
    #[serde(default)]
    pub twist: TwistSense,
}

impl SweepParams {
    pub fn new(lambda: f64, eta4: f64, tau0: f64) -> Result<Self> {
        let p = Self { lambda, eta4, tau0, twist: TwistSense::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_twist(mut self, twist: TwistSense) -> Self {
        self.twist = twist;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("eta4", self.eta4), ("tau0", self.tau0)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(TrpError::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `lambda > 1` marks the non-adiabatic regime the gates are designed for.
    pub fn is_nonadiabatic(&self) -> bool {
        self.lambda > 1.0
    }

    pub fn window(&self) -> (f64, f64) {
        (-0.5 * self.tau0, 0.5 * self.tau0)
    }
}

/// Sweep plus the coupling and shift constants of the two-qubit model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitParams {
    pub sweep: SweepParams,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub c4: f64,
}

impl TwoQubitParams {
    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        for (name, v) in [("d1", self.d1), ("d2", self.d2), ("d3", self.d3), ("d4", self.d4), ("c4", self.c4)] {
            if !v.is_finite() {
                return Err(TrpError::InvalidInput(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Hermitian matrix, exactly symmetrized at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Symmetrizes `m` as `(m + m†)/2`. Inputs off by more than `1e-14` are rejected.
    pub fn new(m: CMatrix) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > 1e-14 * (1.0 + m.frobenius_norm()) {
            return Err(TrpError::InvalidInput(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        Ok(Self::symmetrize(m))
    }

    pub(crate) fn symmetrize(m: CMatrix) -> Self {
        let n = m.dim();
        let mut h = m.clone();
        for i in 0..n {
            h[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)].conj());
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        Self(h)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// Quartic twist angle `φ₄(τ) = (η₄ / 2λ) τ⁴`.
pub fn twist_phi4(tau: f64, params: &SweepParams) -> f64 {
    params.eta4 / (2.0 * params.lambda) * tau.powi(4)
}

/// `dφ₄/dτ = (2η₄/λ) τ³`.
pub fn twist_rate(tau: f64, params: &SweepParams) -> f64 {
    2.0 * params.eta4 / params.lambda * tau.powi(3)
}

/// `cos φ σx + s sin φ σy = [[0, e^{-isφ}], [e^{isφ}, 0]]`.
fn transverse(phi: f64, sign: f64) -> CMatrix {
    let e = C64::from_polar(1.0, sign * phi);
    CMatrix::from_rows(&[vec![C64::new(0.0, 0.0), e.conj()], vec![e, C64::new(0.0, 0.0)]])
}

/// `d/dφ` of [`transverse`].
fn transverse_dphi(phi: f64, sign: f64) -> CMatrix {
    let e = C64::from_polar(1.0, sign * phi) * C64::new(0.0, sign);
    CMatrix::from_rows(&[vec![C64::new(0.0, 0.0), e.conj()], vec![e, C64::new(0.0, 0.0)]])
}

/// One-qubit sweep Hamiltonian `−(τ/λ)σz − (1/λ)[cos φ₄ σx ± sin φ₄ σy]`.
pub fn h1(tau: f64, params: &SweepParams) -> HermitianMatrix {
    let phi = twist_phi4(tau, params);
    let z = pauli::z().scale_re(-tau / params.lambda);
    let t = transverse(phi, params.twist.one_qubit_sign()).scale_re(-1.0 / params.lambda);
    HermitianMatrix::symmetrize(&z + &t)
}

pub fn dh1_dtau(tau: f64, params: &SweepParams) -> HermitianMatrix {
    let phi = twist_phi4(tau, params);
    let z = pauli::z().scale_re(-1.0 / params.lambda);
    let t = transverse_dphi(phi, params.twist.one_qubit_sign())
        .scale_re(-twist_rate(tau, params) / params.lambda);
    HermitianMatrix::symmetrize(&z + &t)
}

/// Two-qubit Hamiltonian without the degeneracy-breaking shift. Qubit 1 is the
/// left tensor slot; basis order |00⟩, |01⟩, |10⟩, |11⟩.
pub fn h2_base(tau: f64, params: &TwoQubitParams) -> HermitianMatrix {
    let s = &params.sweep;
    let phi = twist_phi4(tau, s);
    let id = pauli::identity();
    let z = pauli::z();
    let tr = transverse(phi, s.twist.two_qubit_sign());
    let z1 = z.kron(&id).scale_re(-(params.d1 + params.d2) / 2.0 + tau / s.lambda);
    let x1 = tr.kron(&id).scale_re(-params.d3 / s.lambda);
    let z2 = id.kron(&z).scale_re(-params.d2 / 2.0 + tau / s.lambda);
    let x2 = id.kron(&tr).scale_re(-1.0 / s.lambda);
    let zz = z.kron(&z).scale_re(-FRAC_PI_2 * params.d4);
    let h = &(&(&z1 + &x1) + &(&z2 + &x2)) + &zz;
    HermitianMatrix::symmetrize(h)
}

pub fn dh2_dtau(tau: f64, params: &TwoQubitParams) -> HermitianMatrix {
    let s = &params.sweep;
    let phi = twist_phi4(tau, s);
    let rate = twist_rate(tau, s);
    let id = pauli::identity();
    let z = pauli::z();
    let dtr = transverse_dphi(phi, s.twist.two_qubit_sign());
    let z1 = z.kron(&id).scale_re(1.0 / s.lambda);
    let x1 = dtr.kron(&id).scale_re(-params.d3 * rate / s.lambda);
    let z2 = id.kron(&z).scale_re(1.0 / s.lambda);
    let x2 = id.kron(&dtr).scale_re(-rate / s.lambda);
    HermitianMatrix::symmetrize(&(&z1 + &x1) + &(&z2 + &x2))
}

/// Parameter sets that define a sweep Hamiltonian.
pub trait SweepModel: Sync {
    fn dim(&self) -> usize;
    fn sweep(&self) -> &SweepParams;
    fn hamiltonian(&self, tau: f64) -> HermitianMatrix;
    fn derivative(&self, tau: f64) -> HermitianMatrix;
    /// Energy shift added to the level that is on top at the start of the sweep.
    fn top_level_shift(&self) -> f64 {
        0.0
    }
    /// Index (in the ascending order at the start of the sweep) of the level
    /// that receives [`SweepModel::top_level_shift`].
    fn shifted_level(&self, _start_vectors: &CMatrix) -> usize {
        self.dim() - 1
    }
    fn validate(&self) -> Result<()>;
}

impl SweepModel for SweepParams {
    fn dim(&self) -> usize {
        2
    }
    fn sweep(&self) -> &SweepParams {
        self
    }
    fn hamiltonian(&self, tau: f64) -> HermitianMatrix {
        h1(tau, self)
    }
    fn derivative(&self, tau: f64) -> HermitianMatrix {
        dh1_dtau(tau, self)
    }
    fn validate(&self) -> Result<()> {
        SweepParams::validate(self)
    }
}

impl SweepModel for TwoQubitParams {
    fn dim(&self) -> usize {
        4
    }
    fn sweep(&self) -> &SweepParams {
        &self.sweep
    }
    fn hamiltonian(&self, tau: f64) -> HermitianMatrix {
        h2_base(tau, self)
    }
    fn derivative(&self, tau: f64) -> HermitianMatrix {
        dh2_dtau(tau, self)
    }
    fn top_level_shift(&self) -> f64 {
        self.c4
    }
    fn validate(&self) -> Result<()> {
        TwoQubitParams::validate(self)
    }
}

/// Generic time derivative, dispatching on the parameter type.
pub fn dh_dtau<M: SweepModel + ?Sized>(tau: f64, model: &M) -> HermitianMatrix {
    model.derivative(tau)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceTime {
    pub tau: f64,
    pub in_window: bool,
}

/// Roots of `τ = η₄τ³`, ascending, flagged by whether they fall inside the sweep.
pub fn resonance_times(params: &SweepParams) -> Vec<ResonanceTime> {
    let r = 1.0 / params.eta4.sqrt();
    let half = 0.5 * params.tau0;
    [-r, 0.0, r]
        .into_iter()
        .map(|tau| ResonanceTime { tau, in_window: tau.abs() <= half })
        .collect()
}
