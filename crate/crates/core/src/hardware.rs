//! Physical control schedules for NMR, charge, rf-SQUID and persistent-current qubits.
//!
//! All quantities are SI: energies in joules, times in seconds, capacitance in
//! farads, inductance in henries. Fluxes are reported in units of the flux quantum.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrpError};
use crate::hamiltonian::SweepParams;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Superconducting flux quantum `h/2e`, Wb.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

pub const DEFAULT_SAMPLES: usize = 4096;
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.05;

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(TrpError::InvalidInput(format!("{name} must be positive and finite, got {v}")))
    }
}

/// A TRP sweep in physical units: field `b·cos φ σx + a·t σz` with `φ = B t⁴/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSweep {
    /// Inversion rate, J/s.
    pub a: f64,
    /// Transverse strength, J.
    pub b: f64,
    /// Twist strength, s⁻⁴.
    pub b_twist: f64,
    /// Inversion duration, s.
    pub t0: f64,
}

impl PhysicalSweep {
    pub fn from_dimensionless(params: &SweepParams, b: f64) -> Result<Self> {
        params.validate()?;
        positive("b", b)?;
        let a = params.lambda * b * b / HBAR;
        let sweep = Self { a, b, b_twist: params.eta4 * a.powi(3) / (HBAR * b * b), t0: params.tau0 * b / a };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn to_dimensionless(&self) -> Result<SweepParams> {
        self.validate()?;
        SweepParams::new(HBAR * self.a / (self.b * self.b), HBAR * self.b * self.b * self.b_twist / self.a.powi(3), self.a * self.t0 / self.b)
    }

    pub fn validate(&self) -> Result<()> {
        positive("a", self.a)?;
        positive("b", self.b)?;
        positive("twist strength", self.b_twist)?;
        positive("T0", self.t0)
    }

    /// Looser check for waveform generation: a stopped sweep (`a = 0`) or a
    /// switched-off drive (`b = 0`) still has well-defined controls.
    fn validate_controls(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("twist strength", self.b_twist)] {
            if !v.is_finite() || v < 0.0 {
                return Err(TrpError::InvalidInput(format!("{name} must be non-negative and finite, got {v}")));
            }
        }
        positive("T0", self.t0)
    }

    /// Same `a`, `B` and `T0` with a new transverse strength; the dimensionless
    /// parameters move accordingly.
    pub fn with_b(&self, b: f64) -> Result<Self> {
        positive("b", b)?;
        Ok(Self { b, ..*self })
    }

    pub fn twist_phase(&self, t: f64) -> f64 {
        0.5 * self.b_twist * t.powi(4)
    }

    /// Requested σ_z coefficient `a·t`.
    pub fn z_coefficient(&self, t: f64) -> f64 {
        self.a * t
    }

    /// Requested σ_x coefficient `b·cos φ(t)`.
    pub fn x_coefficient(&self, t: f64) -> f64 {
        self.b * self.twist_phase(t).cos()
    }

    /// Uniform grid over `[-T0/2, T0/2]`.
    pub fn sample_times(&self, samples: usize) -> Result<Vec<f64>> {
        if samples < 2 {
            return Err(TrpError::InvalidInput(format!("need at least 2 samples, got {samples}")));
        }
        let h = self.t0 / (samples - 1) as f64;
        Ok((0..samples).map(|i| if i == samples - 1 { 0.5 * self.t0 } else { -0.5 * self.t0 + i as f64 * h }).collect())
    }
}

/// NMR sweep parameters in the experimentalist's units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmrParams {
    /// `2b/ħ`, s⁻¹.
    pub omega1: f64,
    /// `a·T0/ħ`, s⁻¹.
    pub a_sweep: f64,
    /// `B·T0⁴/2`, dimensionless.
    pub b_script: f64,
    pub t0: f64,
}

pub fn nmr_translate(phys: &PhysicalSweep) -> Result<NmrParams> {
    phys.validate()?;
    Ok(NmrParams {
        omega1: 2.0 * phys.b / HBAR,
        a_sweep: phys.a * phys.t0 / HBAR,
        b_script: 0.5 * phys.b_twist * phys.t0.powi(4),
        t0: phys.t0,
    })
}

impl NmrParams {
    /// Twist constant that realizes `eta4` for given `omega1`, `A` and `T0`.
    pub fn b_script_for(omega1: f64, a_sweep: f64, t0: f64, eta4: f64) -> f64 {
        2.0 * a_sweep.powi(3) * t0 * eta4 / (omega1 * omega1)
    }

    pub fn lambda(&self) -> f64 {
        4.0 * self.a_sweep / (self.omega1 * self.omega1 * self.t0)
    }

    pub fn eta4(&self) -> f64 {
        self.b_script * self.omega1 * self.omega1 / (2.0 * self.a_sweep.powi(3) * self.t0)
    }

    pub fn tau0(&self) -> f64 {
        2.0 * self.a_sweep / self.omega1
    }

    pub fn to_physical(&self) -> Result<PhysicalSweep> {
        let b = 0.5 * HBAR * self.omega1;
        let sweep = PhysicalSweep { a: HBAR * self.a_sweep / self.t0, b, b_twist: 2.0 * self.b_script / self.t0.powi(4), t0: self.t0 };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn to_dimensionless(&self) -> Result<SweepParams> {
        SweepParams::new(self.lambda(), self.eta4(), self.tau0())
    }
}

/// A sampled control channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub channel: String,
    pub units: String,
    pub t0_seconds: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Waveform {
    fn sample(channel: &str, units: &str, phys: &PhysicalSweep, times: &[f64], f: impl Fn(f64) -> f64) -> Self {
        Self {
            channel: channel.into(),
            units: units.into(),
            t0_seconds: phys.t0,
            times: times.to_vec(),
            values: times.iter().map(|&t| f(t)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() || self.times.len() < 2 {
            return Err(TrpError::InvalidInput("waveform needs matching times and values, at least 2 samples".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TrpError::InvalidInput(format!("waveform `{}` times are not strictly increasing", self.channel)));
        }
        let span = 0.5 * self.t0_seconds;
        let tol = 1e-12 * span;
        if (self.times[0] + span).abs() > tol || (self.times[self.times.len() - 1] - span).abs() > tol {
            return Err(TrpError::InvalidInput(format!("waveform `{}` does not span [-T0/2, T0/2]", self.channel)));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# channel={} units={} T0_seconds={:e}\n", self.channel, self.units, self.t0_seconds);
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(s, "{t:e},{v:e}");
        }
        s
    }
}

/// A small-parameter condition and whether it held over the whole sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityFlag {
    pub condition: String,
    pub worst_value: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

impl ValidityFlag {
    fn new(condition: &str, worst_value: f64, threshold: f64) -> Self {
        Self { condition: condition.into(), worst_value, threshold, satisfied: worst_value.abs() <= threshold }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeSchedule {
    pub gate_voltage: Waveform,
    pub squid_flux: Waveform,
    /// The map assumes the junction energy equals `b`; this is `(E_J⁰ − b)/b`.
    pub junction_mismatch: f64,
}

/// Gate voltage and dc-SQUID flux for a charge qubit with `E_J⁰ = b`.
pub fn charge_qubit_schedule(phys: &PhysicalSweep, gate_capacitance: f64, charging_energy: f64, ej0: f64, samples: usize) -> Result<ChargeSchedule> {
    phys.validate_controls()?;
    positive("gate capacitance", gate_capacitance)?;
    positive("charging energy", charging_energy)?;
    positive("E_J0", ej0)?;
    let times = phys.sample_times(samples)?;
    let e_over_cg = ELEMENTARY_CHARGE / gate_capacitance;
    Ok(ChargeSchedule {
        gate_voltage: Waveform::sample("gate_voltage", "V", phys, &times, |t| e_over_cg * (1.0 - phys.a * t / (2.0 * charging_energy))),
        squid_flux: Waveform::sample("squid_flux", "flux_quanta", phys, &times, |t| phys.twist_phase(t) / PI),
        junction_mismatch: (ej0 - phys.b) / phys.b,
    })
}

/// σ_z and σ_x coefficients a charge qubit sees under the given controls.
pub fn charge_qubit_coefficients(voltage: f64, flux_quanta: f64, gate_capacitance: f64, charging_energy: f64, ej0: f64) -> (f64, f64) {
    let n_g = gate_capacitance * voltage / (2.0 * ELEMENTARY_CHARGE);
    (2.0 * charging_energy * (1.0 - 2.0 * n_g), ej0 * (PI * flux_quanta).cos())
}

/// rf-SQUID qubit whose junction is a dc-SQUID of two junctions with energy `ej0`
/// and capacitance `capacitance`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfSquidCircuit {
    pub inductance: f64,
    pub capacitance: f64,
    pub ej0: f64,
    /// Offset of the dc-SQUID bias: `Φ̃ₓ⁰/Φ₀ = 1/2 − ε/π`.
    pub epsilon: f64,
}

impl RfSquidCircuit {
    /// Builds the circuit from `β_L⁰` and `√(LC)` instead of `L` and `C`.
    pub fn from_design(beta_l0: f64, sqrt_lc: f64, ej0: f64, epsilon: f64) -> Result<Self> {
        positive("beta_L0", beta_l0)?;
        positive("sqrt(LC)", sqrt_lc)?;
        positive("E_J0", ej0)?;
        let ej = 2.0 * ej0 * (PI * (0.5 - epsilon / PI)).cos();
        positive("E_J at the operating point", ej)?;
        let inductance = beta_l0 * FLUX_QUANTUM * FLUX_QUANTUM / (4.0 * PI * PI * ej);
        Ok(Self { inductance, capacitance: sqrt_lc * sqrt_lc / inductance, ej0, epsilon })
    }

    fn squid_phase(&self) -> f64 {
        PI * (0.5 - self.epsilon / PI)
    }

    /// `E_J(Φ̃ₓ⁰)`.
    pub fn operating_coupling(&self) -> f64 {
        2.0 * self.ej0 * self.squid_phase().cos()
    }

    pub fn beta_l0(&self) -> f64 {
        self.operating_coupling() / (FLUX_QUANTUM * FLUX_QUANTUM / (4.0 * PI * PI * self.inductance))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfSquidReport {
    /// Operating dc-SQUID bias `Φ̃ₓ⁰/Φ₀`.
    pub squid_bias: f64,
    pub coupling_energy: f64,
    pub beta_l0: f64,
    /// Attempt frequency, s⁻¹.
    pub omega_star: f64,
    /// WKB exponent at the operating point.
    pub i0: f64,
    pub c: f64,
    pub d: f64,
    pub validity: Vec<ValidityFlag>,
}

impl RfSquidReport {
    pub fn all_valid(&self) -> bool {
        self.validity.iter().all(|f| f.satisfied)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfSquidSchedule {
    pub loop_flux: Waveform,
    pub squid_flux_offset: Waveform,
    pub report: RfSquidReport,
}

pub fn rfsquid_schedule(phys: &PhysicalSweep, circuit: &RfSquidCircuit, samples: usize, threshold: f64) -> Result<RfSquidSchedule> {
    phys.validate_controls()?;
    positive("inductance", circuit.inductance)?;
    positive("capacitance", circuit.capacitance)?;
    positive("E_J0", circuit.ej0)?;
    positive("validity threshold", threshold)?;
    let ej = circuit.operating_coupling();
    let beta = circuit.beta_l0();
    if !(beta > 1.0) {
        return Err(TrpError::NoDoubleWell { beta });
    }
    let theta0 = circuit.squid_phase();
    let sqrt_lc = (circuit.inductance * circuit.capacitance).sqrt();
    let omega_star = ((beta - 1.0) / (circuit.inductance * circuit.capacitance)).sqrt();
    let i0 = 8.0 * sqrt_lc / HBAR * (beta - 1.0).powf(1.5) * ej;
    let shape = 1.0 / (theta0.sin() * (5.0 * beta - 2.0) * (beta - 1.0).sqrt());
    let d = shape * HBAR / (8.0 * sqrt_lc * circuit.ej0);
    let c = d * (phys.b / HBAR) * (2.0 * PI / omega_star) * i0.exp();

    let times = phys.sample_times(samples)?;
    let z_scale = PI * ej * (6.0 * (beta - 1.0)).sqrt();
    let loop_flux = Waveform::sample("loop_flux", "flux_quanta", phys, &times, |t| 0.5 * (1.0 + phys.a * t / z_scale));
    let offset = Waveform::sample("squid_flux_offset", "flux_quanta", phys, &times, |t| (c * phys.twist_phase(t).cos() - d) / PI);

    let worst_phase = offset.values.iter().fold(0.0f64, |m, v| m.max((PI * v).abs()));
    let worst_ej = theta0.tan() * worst_phase;
    let worst_beta = beta * worst_ej / (beta - 1.0);
    let validity = vec![
        ValidityFlag::new("pi*dPhi_squid/Phi0 << 1", worst_phase, threshold),
        ValidityFlag::new("|dE_J|/E_J << 1", worst_ej, threshold),
        ValidityFlag::new("|dbeta_L|/(beta_L0 - 1) << 1", worst_beta, threshold),
    ];
    Ok(RfSquidSchedule {
        loop_flux,
        squid_flux_offset: offset,
        report: RfSquidReport { squid_bias: theta0 / PI, coupling_energy: ej, beta_l0: beta, omega_star, i0, c, d, validity },
    })
}

/// σ_z and σ_x coefficients of the linearized rf-SQUID model for the given
/// loop flux and dc-SQUID flux offset (both in flux quanta).
pub fn rfsquid_coefficients(report: &RfSquidReport, loop_flux: f64, squid_offset: f64) -> (f64, f64) {
    let beta = report.beta_l0;
    let z = 2.0 * PI * (loop_flux - 0.5) * report.coupling_energy * (6.0 * (beta - 1.0)).sqrt();
    let relative_dej = -(PI * report.squid_bias).tan() * PI * squid_offset;
    let x = HBAR * report.omega_star / (2.0 * PI)
        * (-report.i0).exp()
        * (1.0 - 0.5 * report.i0 * (5.0 * beta - 2.0) / (beta - 1.0) * relative_dej);
    (z, x)
}

/// Linear response of a persistent-current qubit about its operating point,
/// in units of `E_J⁰`: σ_z coefficient `z0 − z1·δ1 − z2·δ2`, σ_x coefficient `x1·δ1 + x2·δ2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcqCoefficients {
    pub z0: f64,
    pub z1: f64,
    pub z2: f64,
    pub x1: f64,
    pub x2: f64,
}

impl PcqCoefficients {
    pub fn determinant(&self) -> f64 {
        self.x1 * self.z2 - self.x2 * self.z1
    }

    /// Prefactors in `δ1 = p1·(z0 − rτ) + q1·r cos φ`, `δ2 = p2·(rτ − z0) + q2·r cos φ`
    /// with `r = b/E_J⁰`.
    pub fn prefactors(&self) -> Result<PcqPrefactors> {
        let g = self.determinant();
        if !(g.abs() > 1e-12) {
            return Err(TrpError::SingularControl { g });
        }
        Ok(PcqPrefactors { p1: -self.x2 / g, q1: self.z2 / g, p2: -self.x1 / g, q2: -self.z1 / g })
    }

    /// `(σ_z, σ_x)` coefficients over `E_J⁰` for the given detunings.
    pub fn coefficients(&self, delta1: f64, delta2: f64) -> (f64, f64) {
        (self.z0 - self.z1 * delta1 - self.z2 * delta2, self.x1 * delta1 + self.x2 * delta2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcqPrefactors {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcqSchedule {
    pub delta1: Waveform,
    pub delta2: Waveform,
    pub prefactors: PcqPrefactors,
    /// `b/E_J⁰`.
    pub drive_ratio: f64,
}

pub fn pcq_schedule(phys: &PhysicalSweep, ej0: f64, coeffs: &PcqCoefficients, samples: usize) -> Result<PcqSchedule> {
    phys.validate_controls()?;
    positive("E_J0", ej0)?;
    if !coeffs.z0.is_finite() {
        return Err(TrpError::InvalidInput("z0 must be finite".into()));
    }
    let pf = coeffs.prefactors()?;
    let r = phys.b / ej0;
    let times = phys.sample_times(samples)?;
    // r·τ = (b/E_J⁰)(a t/b), written so that b = 0 stays finite
    let sweep = |t: f64| phys.a * t / ej0;
    Ok(PcqSchedule {
        delta1: Waveform::sample("delta1", "frustration", phys, &times, |t| pf.p1 * (coeffs.z0 - sweep(t)) + pf.q1 * r * phys.twist_phase(t).cos()),
        delta2: Waveform::sample("delta2", "frustration", phys, &times, |t| pf.p2 * (sweep(t) - coeffs.z0) + pf.q2 * r * phys.twist_phase(t).cos()),
        prefactors: pf,
        drive_ratio: r,
    })
}
