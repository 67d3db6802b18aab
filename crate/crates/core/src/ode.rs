//! Adaptive Dormand–Prince 5(4) integrator for real state vectors.

use crate::error::{Result, TrpError};

/// Outcome of a right-hand-side evaluation that could not be completed.
#[derive(Debug)]
pub enum StageIssue {
    /// The step is too long for the system to evaluate reliably; retry shorter.
    Retry,
    /// Unrecoverable failure.
    Fail(TrpError),
}

impl From<TrpError> for StageIssue {
    fn from(e: TrpError) -> Self {
        match e {
            TrpError::AmbiguousMatching { .. } => StageIssue::Retry,
            other => StageIssue::Fail(other),
        }
    }
}

pub trait OdeSystem {
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), StageIssue>;

    /// Called after every accepted step with the new time and state.
    fn accept(&mut self, _t: f64, _y: &[f64]) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `sys` from `t0` to `t1` (`t1 > t0`), overwriting `y`.
pub fn integrate<S: OdeSystem>(sys: &mut S, t0: f64, t1: f64, y: &mut [f64], ctl: &StepControl) -> Result<StepStats> {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut h = ctl.initial_step.min(ctl.max_step).min(t1 - t0);

    while t < t1 {
        if stats.accepted + stats.rejected >= ctl.max_steps {
            return Err(TrpError::IntegrationFailure { tau: t, reason: format!("step budget of {} exhausted", ctl.max_steps) });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        let mut retry = false;
        for s in 0..7 {
            tmp.copy_from_slice(y);
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..n {
                        tmp[i] += h * a * kj[i];
                    }
                }
            }
            let (ks, _) = k.split_at_mut(s + 1);
            match sys.rhs(t + C[s] * h, &tmp, &mut ks[s]) {
                Ok(()) => {}
                Err(StageIssue::Retry) => {
                    retry = true;
                    break;
                }
                Err(StageIssue::Fail(e)) => return Err(e),
            }
        }

        let err = if retry {
            f64::INFINITY
        } else {
            let mut acc = 0.0;
            for i in 0..n {
                let mut yn = y[i];
                let mut e = 0.0;
                for s in 0..7 {
                    yn += h * B5[s] * k[s][i];
                    e += h * E[s] * k[s][i];
                }
                y_new[i] = yn;
                let sc = ctl.abs_tol + ctl.rel_tol * y[i].abs().max(yn.abs());
                acc += (e / sc).powi(2);
            }
            (acc / n as f64).sqrt()
        };

        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&y_new);
            stats.accepted += 1;
            sys.accept(t, y)?;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(ctl.max_step);
        } else {
            stats.rejected += 1;
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.5 };
            h *= factor;
            if h < ctl.min_step {
                return Err(TrpError::IntegrationFailure { tau: t, reason: format!("step size {h:.3e} below minimum") });
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), StageIssue> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        }
    }

    #[test]
    fn harmonic_oscillator_matches_closed_form() {
        let ctl = StepControl { abs_tol: 1e-12, rel_tol: 1e-10, initial_step: 1e-3, max_step: 1.0, min_step: 1e-12, max_steps: 100_000 };
        let mut y = [1.0, 0.0];
        integrate(&mut Oscillator, 0.0, 10.0, &mut y, &ctl).unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
    }
}
