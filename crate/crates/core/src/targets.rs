//! Target gates and the identities that make the TRP gate set universal.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::TrpError;
use crate::linalg::{pauli, CMatrix, ONE, ZERO};

/// Dense unitary in the computational basis.
pub type UnitaryMatrix = CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    Hadamard,
    Phase,
    Pi8,
    Not,
    Cnot,
    Cp,
    Vp,
    Vpi8,
    Vcp,
    SigmaZ,
    Identity,
}

impl Gate {
    pub const ALL: [Gate; 11] = [
        Gate::Hadamard,
        Gate::Phase,
        Gate::Pi8,
        Gate::Not,
        Gate::Cnot,
        Gate::Cp,
        Gate::Vp,
        Gate::Vpi8,
        Gate::Vcp,
        Gate::SigmaZ,
        Gate::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gate::Hadamard => "hadamard",
            Gate::Phase => "phase",
            Gate::Pi8 => "pi8",
            Gate::Not => "not",
            Gate::Cnot => "cnot",
            Gate::Cp => "cp",
            Gate::Vp => "vp",
            Gate::Vpi8 => "vpi8",
            Gate::Vcp => "vcp",
            Gate::SigmaZ => "sigma_z",
            Gate::Identity => "identity",
        }
    }

    pub fn qubits(self) -> usize {
        match self {
            Gate::Cnot | Gate::Cp | Gate::Vcp => 2,
            _ => 1,
        }
    }

    pub fn dim(self) -> usize {
        1 << self.qubits()
    }

    pub fn matrix(self) -> UnitaryMatrix {
        target(self)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate {
    type Err = TrpError;
    fn from_str(s: &str) -> Result<Self, TrpError> {
        let key = s.trim().to_ascii_lowercase();
        let gate = match key.as_str() {
            "hadamard" | "h" => Gate::Hadamard,
            "phase" | "p" => Gate::Phase,
            "pi8" => Gate::Pi8,
            "not" => Gate::Not,
            "cnot" => Gate::Cnot,
            "cp" => Gate::Cp,
            "vp" | "v_p" => Gate::Vp,
            "vpi8" | "v_pi8" => Gate::Vpi8,
            "vcp" | "v_cp" => Gate::Vcp,
            "sigma_z" | "sigmaz" => Gate::SigmaZ,
            "identity" | "i" => Gate::Identity,
            _ => return Err(TrpError::UnknownGate(s.to_string())),
        };
        Ok(gate)
    }
}

fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(entries)
}

/// Off-diagonal 2×2 `[[0, e^{iθ}], [e^{−iθ}, 0]]`.
fn twisted_not(theta: f64) -> CMatrix {
    CMatrix::from_rows(&[vec![ZERO, C64::from_polar(1.0, theta)], vec![C64::from_polar(1.0, -theta), ZERO]])
}

pub fn target(gate: Gate) -> UnitaryMatrix {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    match gate {
        Gate::Hadamard => CMatrix::from_rows(&[vec![r, r], vec![r, -r]]),
        Gate::Phase => diag(&[ONE, C64::new(0.0, 1.0)]),
        Gate::Pi8 => diag(&[ONE, C64::from_polar(1.0, FRAC_PI_4)]),
        Gate::Not => pauli::x(),
        Gate::Cnot => CMatrix::from_rows(&[
            vec![ONE, ZERO, ZERO, ZERO],
            vec![ZERO, ONE, ZERO, ZERO],
            vec![ZERO, ZERO, ZERO, ONE],
            vec![ZERO, ZERO, ONE, ZERO],
        ]),
        Gate::Cp => diag(&[ONE, ONE, ONE, -ONE]),
        Gate::Vp => twisted_not(FRAC_PI_4),
        Gate::Vpi8 => twisted_not(FRAC_PI_8),
        Gate::Vcp => diag(&[ONE, ONE, -ONE, ONE]),
        Gate::SigmaZ => pauli::z(),
        Gate::Identity => CMatrix::identity(2),
    }
}

/// Frobenius residuals of the four composition identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniversalityReport {
    /// `U_P − e^{iπ/4} U_NOT V_P`
    pub phase_from_vp: f64,
    /// `U_π/8 − e^{iπ/8} U_NOT V_π/8`
    pub pi8_from_vpi8: f64,
    /// `U_CNOT − (I⊗U_H)(σz⊗I)V_CP(I⊗U_H)`
    pub cnot_from_vcp: f64,
    /// `σz − U_P²`
    pub sigma_z_from_phase: f64,
}

impl UniversalityReport {
    pub fn max_residual(&self) -> f64 {
        self.phase_from_vp.max(self.pi8_from_vpi8).max(self.cnot_from_vcp).max(self.sigma_z_from_phase)
    }
}

pub fn verify_universality() -> UniversalityReport {
    let not = target(Gate::Not);
    let p = &target(Gate::Not) * &target(Gate::Vp);
    let p = p.scale(C64::from_polar(1.0, FRAC_PI_4));
    let p8 = (&not * &target(Gate::Vpi8)).scale(C64::from_polar(1.0, FRAC_PI_8));

    let ih = CMatrix::identity(2).kron(&target(Gate::Hadamard));
    let zi = pauli::z().kron(&CMatrix::identity(2));
    let cnot = &(&ih * &(&zi * &target(Gate::Vcp))) * &ih;

    let up = target(Gate::Phase);
    UniversalityReport {
        phase_from_vp: (&up - &p).frobenius_norm(),
        pi8_from_vpi8: (&target(Gate::Pi8) - &p8).frobenius_norm(),
        cnot_from_vcp: (&target(Gate::Cnot) - &cnot).frobenius_norm(),
        sigma_z_from_phase: (&pauli::z() - &(&up * &up)).frobenius_norm(),
    }
}
