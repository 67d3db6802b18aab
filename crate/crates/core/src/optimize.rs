//! Parameter search over Tr P: downhill simplex and simulated annealing.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrpError};
use crate::hamiltonian::{SweepModel, SweepParams, TwoQubitParams};
use crate::propagator::{assemble_unitary, GateResult, IntegratorOptions};
use crate::targets::{target, Gate};

/// Tunable fields of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamName {
    Lambda,
    Eta4,
    D1,
    D2,
    D3,
    D4,
    C4,
}

impl ParamName {
    pub fn name(self) -> &'static str {
        match self {
            ParamName::Lambda => "lambda",
            ParamName::Eta4 => "eta4",
            ParamName::D1 => "d1",
            ParamName::D2 => "d2",
            ParamName::D3 => "d3",
            ParamName::D4 => "d4",
            ParamName::C4 => "c4",
        }
    }

    /// Searched on a log scale because the value is tiny and strictly positive.
    pub fn is_log_scaled(self) -> bool {
        matches!(self, ParamName::Eta4)
    }

    fn two_qubit_only(self) -> bool {
        !matches!(self, ParamName::Lambda | ParamName::Eta4)
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamName {
    type Err = TrpError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "lambda" => ParamName::Lambda,
            "eta4" => ParamName::Eta4,
            "d1" => ParamName::D1,
            "d2" => ParamName::D2,
            "d3" => ParamName::D3,
            "d4" => ParamName::D4,
            "c4" => ParamName::C4,
            other => return Err(TrpError::InvalidInput(format!("unknown parameter `{other}`"))),
        })
    }
}

/// A complete parameter point for either model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ParamSet {
    OneQubit(SweepParams),
    TwoQubit(TwoQubitParams),
}

impl ParamSet {
    pub fn dim(&self) -> usize {
        match self {
            ParamSet::OneQubit(_) => 2,
            ParamSet::TwoQubit(_) => 4,
        }
    }

    pub fn sweep(&self) -> &SweepParams {
        match self {
            ParamSet::OneQubit(p) => p,
            ParamSet::TwoQubit(p) => &p.sweep,
        }
    }

    pub fn get(&self, name: ParamName) -> Result<f64> {
        let s = self.sweep();
        match (name, self) {
            (ParamName::Lambda, _) => Ok(s.lambda),
            (ParamName::Eta4, _) => Ok(s.eta4),
            (ParamName::D1, ParamSet::TwoQubit(p)) => Ok(p.d1),
            (ParamName::D2, ParamSet::TwoQubit(p)) => Ok(p.d2),
            (ParamName::D3, ParamSet::TwoQubit(p)) => Ok(p.d3),
            (ParamName::D4, ParamSet::TwoQubit(p)) => Ok(p.d4),
            (ParamName::C4, ParamSet::TwoQubit(p)) => Ok(p.c4),
            _ => Err(TrpError::InvalidInput(format!("parameter `{name}` needs the two-qubit model"))),
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) -> Result<()> {
        let slot = match (name, self) {
            (ParamName::Lambda, ParamSet::OneQubit(p)) => &mut p.lambda,
            (ParamName::Eta4, ParamSet::OneQubit(p)) => &mut p.eta4,
            (ParamName::Lambda, ParamSet::TwoQubit(p)) => &mut p.sweep.lambda,
            (ParamName::Eta4, ParamSet::TwoQubit(p)) => &mut p.sweep.eta4,
            (ParamName::D1, ParamSet::TwoQubit(p)) => &mut p.d1,
            (ParamName::D2, ParamSet::TwoQubit(p)) => &mut p.d2,
            (ParamName::D3, ParamSet::TwoQubit(p)) => &mut p.d3,
            (ParamName::D4, ParamSet::TwoQubit(p)) => &mut p.d4,
            (ParamName::C4, ParamSet::TwoQubit(p)) => &mut p.c4,
            _ => return Err(TrpError::InvalidInput(format!("parameter `{name}` needs the two-qubit model"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn with(mut self, name: ParamName, value: f64) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ParamSet::OneQubit(p) => p.validate(),
            ParamSet::TwoQubit(p) => p.validate(),
        }
    }

    pub fn simulate(&self, target: &crate::targets::UnitaryMatrix, opts: &IntegratorOptions) -> Result<GateResult> {
        match self {
            ParamSet::OneQubit(p) => assemble_unitary(p, target, opts),
            ParamSet::TwoQubit(p) => assemble_unitary(p, target, opts),
        }
    }

    pub fn as_model(&self) -> &dyn SweepModel {
        match self {
            ParamSet::OneQubit(p) => p,
            ParamSet::TwoQubit(p) => p,
        }
    }
}

/// What to minimize: Tr P of the simulated gate against `target`, as a function
/// of the `free` fields of `template`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub target: Gate,
    pub template: ParamSet,
    pub free: Vec<ParamName>,
    /// Optional `(low, high)` per free parameter, in natural units.
    pub bounds: Option<Vec<(f64, f64)>>,
    pub integrator: IntegratorOptions,
}

impl ObjectiveSpec {
    pub fn new(target: Gate, template: ParamSet, free: Vec<ParamName>) -> Result<Self> {
        let spec = Self { target, template, free, bounds: None, integrator: IntegratorOptions::default() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.free.is_empty() {
            return Err(TrpError::InvalidInput("at least one parameter must be free".into()));
        }
        if self.target.dim() != self.template.dim() {
            return Err(TrpError::DimensionMismatch { expected: self.template.dim(), got: self.target.dim() });
        }
        for p in &self.free {
            if p.two_qubit_only() && matches!(self.template, ParamSet::OneQubit(_)) {
                return Err(TrpError::InvalidInput(format!("parameter `{p}` needs the two-qubit model")));
            }
        }
        if let Some(b) = &self.bounds {
            if b.len() != self.free.len() || b.iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi) {
                return Err(TrpError::InvalidInput("bounds must be finite, ordered and one per free parameter".into()));
            }
        }
        self.template.validate()
    }

    /// Free-parameter values of `point`, in natural units.
    pub fn extract(&self, point: &ParamSet) -> Result<Vec<f64>> {
        self.free.iter().map(|&p| point.get(p)).collect()
    }

    pub fn point(&self, values: &[f64]) -> Result<ParamSet> {
        if values.len() != self.free.len() {
            return Err(TrpError::DimensionMismatch { expected: self.free.len(), got: values.len() });
        }
        let mut p = self.template;
        for (&name, &v) in self.free.iter().zip(values) {
            p.set(name, v)?;
        }
        Ok(p)
    }

    pub fn to_internal(&self, values: &[f64]) -> Vec<f64> {
        self.free.iter().zip(values).map(|(p, &v)| if p.is_log_scaled() { v.ln() } else { v }).collect()
    }

    pub fn to_external(&self, internal: &[f64]) -> Vec<f64> {
        self.free.iter().zip(internal).map(|(p, &v)| if p.is_log_scaled() { v.exp() } else { v }).collect()
    }

    /// Tr P at a natural-units point; failed or out-of-bounds simulations score `+∞`.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        if let Some(b) = &self.bounds {
            if values.iter().zip(b).any(|(v, (lo, hi))| v < lo || v > hi) {
                return f64::INFINITY;
            }
        }
        let Ok(point) = self.point(values) else { return f64::INFINITY };
        if point.validate().is_err() {
            return f64::INFINITY;
        }
        match point.simulate(&target(self.target), &self.integrator) {
            Ok(r) if r.tr_p.is_finite() => r.tr_p,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub params: Vec<f64>,
    pub tr_p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ObjectiveSpread,
    SimplexCollapsed,
    EvaluationCap,
    ScheduleComplete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub evaluations: Vec<Evaluation>,
    pub best: Evaluation,
    pub termination_reason: Termination,
}

impl OptimizationTrace {
    fn from_evaluations(evaluations: Vec<Evaluation>, termination_reason: Termination) -> Self {
        let best = evaluations
            .iter()
            .min_by(|a, b| a.tr_p.total_cmp(&b.tr_p))
            .cloned()
            .unwrap_or(Evaluation { params: Vec::new(), tr_p: f64::INFINITY });
        Self { evaluations, best, termination_reason }
    }

    fn map_params(mut self, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        for e in &mut self.evaluations {
            e.params = f(&e.params);
        }
        self.best.params = f(&self.best.params);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once `max f − min f` over the vertices drops below this.
    pub f_tol: f64,
    /// Stop once the largest vertex distance from the best vertex drops below this.
    pub x_tol: f64,
    pub max_evaluations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { reflection: 1.0, expansion: 2.0, contraction: 0.5, shrink: 0.5, f_tol: 1e-12, x_tol: 1e-10, max_evaluations: 500 }
    }
}

/// Checks that `simplex` spans its space (rank of vertex differences is full).
fn check_simplex(simplex: &[Vec<f64>]) -> Result<usize> {
    let n = simplex.first().map(Vec::len).unwrap_or(0);
    if n == 0 || simplex.len() != n + 1 || simplex.iter().any(|v| v.len() != n) {
        return Err(TrpError::InvalidInput(format!(
            "simplex needs {} vertices of dimension {n}, got {}",
            n + 1,
            simplex.len()
        )));
    }
    if simplex.iter().flatten().any(|v| !v.is_finite()) {
        return Err(TrpError::InvalidInput("simplex vertices must be finite".into()));
    }
    let mut m: Vec<Vec<f64>> = simplex[1..].iter().map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| a - b).collect()).collect();
    let scale = m.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).expect("rows");
        if m[pivot][col].abs() <= 1e-12 * scale || scale == 0.0 {
            return Err(TrpError::InvalidInput("degenerate simplex: vertices are affinely dependent".into()));
        }
        m.swap(col, pivot);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    Ok(n)
}

/// Downhill simplex minimization of `f` from `simplex` (dimension + 1 vertices).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, simplex: Vec<Vec<f64>>, opts: &SimplexOptions) -> Result<OptimizationTrace> {
    let n = check_simplex(&simplex)?;
    let mut evals: Vec<Evaluation> = Vec::new();
    let mut eval = |x: &[f64], evals: &mut Vec<Evaluation>| {
        let v = f(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        evals.push(Evaluation { params: x.to_vec(), tr_p: v });
        v
    };
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    for v in simplex {
        let fv = eval(&v, &mut evals);
        pts.push((v, fv));
    }

    let termination = loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = pts[n].1 - pts[0].1;
        if spread.is_finite() && spread <= opts.f_tol {
            break Termination::ObjectiveSpread;
        }
        let diameter = pts[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&pts[0].0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if diameter <= opts.x_tol {
            break Termination::SimplexCollapsed;
        }
        if evals.len() >= opts.max_evaluations {
            break Termination::EvaluationCap;
        }

        let centroid: Vec<f64> = (0..n).map(|i| pts[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n].0).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(opts.reflection);
        let fr = eval(&xr, &mut evals);
        if fr < pts[0].1 {
            let xe = along(opts.reflection * opts.expansion);
            let fe = eval(&xe, &mut evals);
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < pts[n].1 {
            let xc = along(opts.reflection * opts.contraction);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-opts.contraction);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < pts[n].1.min(fr) {
            pts[n] = (xc, fc);
            continue;
        }
        let best = pts[0].0.clone();
        for p in pts.iter_mut().skip(1) {
            let x: Vec<f64> = best.iter().zip(&p.0).map(|(b, v)| b + opts.shrink * (v - b)).collect();
            let fx = eval(&x, &mut evals);
            *p = (x, fx);
        }
    };
    Ok(OptimizationTrace::from_evaluations(evals, termination))
}

/// Axis-aligned starting simplex: `center` plus one vertex per coordinate
/// displaced by `step · |x_i|` (or `step` when `x_i` is zero).
pub fn axis_simplex(center: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut s = vec![center.to_vec()];
    for i in 0..center.len() {
        let mut v = center.to_vec();
        v[i] += if center[i] == 0.0 { step } else { step * center[i].abs() };
        s.push(v);
    }
    s
}

/// Simplex search of `spec` from a simplex given in natural units.
pub fn minimize_simplex(spec: &ObjectiveSpec, initial_simplex: &[Vec<f64>], opts: &SimplexOptions) -> Result<OptimizationTrace> {
    spec.validate()?;
    let internal: Vec<Vec<f64>> = initial_simplex.iter().map(|v| spec.to_internal(v)).collect();
    let trace = nelder_mead(|x| spec.evaluate(&spec.to_external(x)), internal, opts)?;
    Ok(trace.map_params(|x| spec.to_external(x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    /// Initial temperature as a multiple of the starting objective value.
    pub t0_factor: f64,
    /// Explicit initial temperature, overriding `t0_factor` when set.
    pub t0: Option<f64>,
    pub decay: f64,
    pub proposals_per_temperature: usize,
    pub temperature_floor: f64,
    pub temperature_steps: usize,
    /// Proposal standard deviation relative to each parameter's starting magnitude.
    pub proposal_scale: f64,
    pub proposal_floor: f64,
    /// Simplex evaluations spent polishing the annealing result; 0 disables it.
    pub polish_evaluations: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            t0_factor: 10.0,
            t0: None,
            decay: 0.95,
            proposals_per_temperature: 50,
            temperature_floor: 1e-12,
            temperature_steps: 20,
            proposal_scale: 1e-3,
            proposal_floor: 1e-6,
            polish_evaluations: 100,
        }
    }
}

/// Metropolis search with Gaussian proposals of per-coordinate width `sigma`,
/// geometric cooling, and a closing simplex polish around the best point.
pub fn anneal<F: FnMut(&[f64]) -> f64>(mut f: F, start: &[f64], sigma: &[f64], schedule: &AnnealSchedule, seed: u64) -> Result<OptimizationTrace> {
    if start.is_empty() || sigma.len() != start.len() {
        return Err(TrpError::InvalidInput("annealing needs a non-empty start and one proposal width per coordinate".into()));
    }
    if !(schedule.decay > 0.0 && schedule.decay <= 1.0) {
        return Err(TrpError::InvalidInput(format!("decay must lie in (0, 1], got {}", schedule.decay)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evals: Vec<Evaluation> = Vec::new();
    let mut current = start.to_vec();
    let mut f_current = {
        let v = f(&current);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        evals.push(Evaluation { params: current.clone(), tr_p: v });
        v
    };
    let mut temperature = match schedule.t0 {
        Some(t) => t,
        None if f_current.is_finite() => schedule.t0_factor * f_current,
        None => 1.0,
    };

    for _ in 0..schedule.temperature_steps {
        for _ in 0..schedule.proposals_per_temperature {
            let trial: Vec<f64> = current
                .iter()
                .zip(sigma)
                .map(|(x, s)| x + s * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let f_trial = f(&trial);
            let f_trial = if f_trial.is_nan() { f64::INFINITY } else { f_trial };
            evals.push(Evaluation { params: trial.clone(), tr_p: f_trial });
            // always draw so the random stream does not depend on outcomes
            let u: f64 = rng.gen();
            let delta = f_trial - f_current;
            let accept = if !f_trial.is_finite() {
                false
            } else if delta <= 0.0 {
                true
            } else if temperature > 0.0 {
                u < (-delta / temperature).exp()
            } else {
                false
            };
            if accept {
                current = trial;
                f_current = f_trial;
            }
        }
        if temperature > 0.0 {
            temperature = (temperature * schedule.decay).max(schedule.temperature_floor);
        }
    }

    let mut termination = Termination::ScheduleComplete;
    if schedule.polish_evaluations > 0 {
        let best = evals.iter().min_by(|a, b| a.tr_p.total_cmp(&b.tr_p)).expect("at least one evaluation").params.clone();
        let mut simplex = vec![best.clone()];
        for i in 0..best.len() {
            let mut v = best.clone();
            v[i] += sigma[i].max(f64::EPSILON);
            simplex.push(v);
        }
        let polish = nelder_mead(&mut f, simplex, &SimplexOptions { max_evaluations: schedule.polish_evaluations, ..Default::default() })?;
        evals.extend(polish.evaluations);
        if polish.termination_reason != Termination::EvaluationCap {
            termination = polish.termination_reason;
        }
    }
    Ok(OptimizationTrace::from_evaluations(evals, termination))
}

/// Proposal widths in internal coordinates for a natural-units start point.
pub fn proposal_widths(spec: &ObjectiveSpec, start: &[f64], schedule: &AnnealSchedule) -> Vec<f64> {
    spec.free
        .iter()
        .zip(start)
        .map(|(p, &v)| {
            if p.is_log_scaled() {
                schedule.proposal_scale
            } else {
                (schedule.proposal_scale * v.abs()).max(schedule.proposal_floor)
            }
        })
        .collect()
}

/// Simulated annealing of `spec` from a natural-units start point.
pub fn simulated_annealing(spec: &ObjectiveSpec, start: &[f64], schedule: &AnnealSchedule, seed: u64) -> Result<OptimizationTrace> {
    spec.validate()?;
    if start.len() != spec.free.len() {
        return Err(TrpError::DimensionMismatch { expected: spec.free.len(), got: start.len() });
    }
    if let Some(b) = &spec.bounds {
        if start.iter().zip(b).any(|(v, (lo, hi))| v < lo || v > hi) {
            return Err(TrpError::InvalidInput("annealing start lies outside the bounds".into()));
        }
    }
    let sigma = proposal_widths(spec, start, schedule);
    let trace = anneal(|x| spec.evaluate(&spec.to_external(x)), &spec.to_internal(start), &sigma, schedule, seed)?;
    Ok(trace.map_params(|x| spec.to_external(x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub value: f64,
    pub tr_p: f64,
}

/// Tr P along one parameter axis with everything else held at `center`.
/// Rows are simulated in parallel and returned in input order.
pub fn sensitivity_table(
    target_gate: Gate,
    center: &ParamSet,
    axis: ParamName,
    values: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<SensitivityRow>> {
    center.get(axis)?;
    let u = target(target_gate);
    values
        .par_iter()
        .enumerate()
        .map(|(row, &value)| {
            let annotate = |e: TrpError| TrpError::Row { row, source: Box::new(e) };
            let point = center.with(axis, value).map_err(annotate)?;
            let r = point.simulate(&u, opts).map_err(annotate)?;
            Ok(SensitivityRow { value, tr_p: r.tr_p })
        })
        .collect()
}
