use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use trp_core::hamiltonian::{SweepParams, TwistSense, TwoQubitParams};
use trp_core::hardware::{
    charge_qubit_schedule, nmr_translate, pcq_schedule, rfsquid_schedule, NmrParams, PcqCoefficients, PhysicalSweep, RfSquidCircuit, Waveform,
    DEFAULT_SAMPLES, DEFAULT_VALIDITY_THRESHOLD, HBAR,
};
use trp_core::linalg::CMatrix;
use trp_core::metrics;
use trp_core::optimize::{
    axis_simplex, minimize_simplex, simulated_annealing, AnnealSchedule, ObjectiveSpec, OptimizationTrace, ParamName, ParamSet, SimplexOptions,
};
use trp_core::propagator::{GaugeConvention, IntegratorOptions, Readout};
use trp_core::tables::{reproduce, table};
use trp_core::targets::{target, verify_universality, Gate};

use crate::config::RunConfig;
use crate::error::CliError;

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Io(format!("serialization failed: {e}")))
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file), text)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn matrix_json(m: &CMatrix) -> Value {
    json!({ "re": m.re_rows(), "im": m.im_rows() })
}

fn gate(cfg: &RunConfig) -> Result<Gate, CliError> {
    Ok(cfg.require_string("target.name")?.parse()?)
}

fn twist(cfg: &RunConfig) -> Result<TwistSense, CliError> {
    match cfg.string("sweep.twist")?.as_deref() {
        None | Some("resonant") => Ok(TwistSense::Resonant),
        Some("literal") => Ok(TwistSense::Literal),
        Some(other) => Err(CliError::Config(format!("sweep.twist must be `resonant` or `literal`, got `{other}`"))),
    }
}

fn sweep(cfg: &RunConfig) -> Result<SweepParams, CliError> {
    let p = SweepParams {
        lambda: cfg.require_f64("sweep.lambda")?,
        eta4: cfg.require_f64("sweep.eta4")?,
        tau0: cfg.require_f64("sweep.tau0")?,
        twist: twist(cfg)?,
    };
    p.validate()?;
    Ok(p)
}

fn params(cfg: &RunConfig, dim: usize) -> Result<ParamSet, CliError> {
    let s = sweep(cfg)?;
    if dim == 2 {
        return Ok(ParamSet::OneQubit(s));
    }
    let p = TwoQubitParams {
        sweep: s,
        d1: cfg.require_f64("twoqubit.d1")?,
        d2: cfg.require_f64("twoqubit.d2")?,
        d3: cfg.require_f64("twoqubit.d3")?,
        d4: cfg.require_f64("twoqubit.d4")?,
        c4: cfg.require_f64("twoqubit.c4")?,
    };
    p.validate()?;
    Ok(ParamSet::TwoQubit(p))
}

fn integrator(cfg: &RunConfig) -> Result<IntegratorOptions, CliError> {
    let mut o = IntegratorOptions::default();
    if let Some(v) = cfg.f64("integrator.abs_tol")? {
        o.abs_tol = v;
    }
    if let Some(v) = cfg.f64("integrator.rel_tol")? {
        o.rel_tol = v;
    }
    if let Some(v) = cfg.usize("integrator.max_steps")? {
        o.max_steps = v;
    }
    o.initial_step = cfg.f64("integrator.initial_step")?;
    o.max_step = cfg.f64("integrator.max_step")?;
    o.gauge = match cfg.string("integrator.gauge")?.as_deref() {
        None | Some("largest_component") => GaugeConvention::LargestComponent,
        Some("first_component") => GaugeConvention::FirstComponent,
        Some(other) => return Err(CliError::Config(format!("unknown integrator.gauge `{other}`"))),
    };
    o.readout = match cfg.string("integrator.readout")?.as_deref() {
        None | Some("eigenbasis") => Readout::Eigenbasis,
        Some("computational") => Readout::Computational,
        Some(other) => return Err(CliError::Config(format!("unknown integrator.readout `{other}`"))),
    };
    for (k, v) in [("integrator.abs_tol", o.abs_tol), ("integrator.rel_tol", o.rel_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("`{k}` must be positive, got {v}")));
        }
    }
    Ok(o)
}

pub fn simulate(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let g = gate(cfg)?;
    let p = params(cfg, g.dim())?;
    let opts = integrator(cfg)?;
    let u_t = target(g);
    let r = p.simulate(&u_t, &opts)?;
    let note = (g.dim() == 4).then(|| format!("fidelity uses 1 - TrP/8; 1 - TrP/4 would give {:.6}", 1.0 - r.tr_p / 4.0));
    let doc = json!({
        "target": g.name(),
        "params": p,
        "tr_p": r.tr_p,
        "fidelity": r.fidelity,
        "unitary": matrix_json(&r.unitary),
        "diagnostics": {
            "steps_accepted": r.steps_accepted,
            "steps_rejected": r.steps_rejected,
            "max_norm_drift": r.max_norm_drift,
            "unitarity_defect": r.unitary.unitarity_defect(),
            "readout": opts.readout,
            "note": note,
        },
    });
    emit(out, "simulate.json", &to_json(&doc)?)
}

fn free_params(cfg: &RunConfig, template: &ParamSet) -> Result<Vec<ParamName>, CliError> {
    match cfg.list("optimize.free")? {
        Some(names) => names.iter().map(|n| n.parse::<ParamName>().map_err(CliError::from)).collect(),
        None => Ok(match template {
            ParamSet::OneQubit(_) => vec![ParamName::Lambda, ParamName::Eta4],
            ParamSet::TwoQubit(_) => vec![
                ParamName::Lambda,
                ParamName::Eta4,
                ParamName::D1,
                ParamName::D2,
                ParamName::D3,
                ParamName::D4,
                ParamName::C4,
            ],
        }),
    }
}

fn bounds(cfg: &RunConfig, free: &[ParamName]) -> Result<Option<Vec<(f64, f64)>>, CliError> {
    let mut given = Vec::new();
    for (name, v) in cfg.bounds() {
        let p: ParamName = name.parse()?;
        let pair = v
            .as_array()
            .filter(|a| a.len() == 2)
            .and_then(|a| Some((a[0].as_float().or(a[0].as_integer().map(|i| i as f64))?, a[1].as_float().or(a[1].as_integer().map(|i| i as f64))?)))
            .ok_or_else(|| CliError::Config(format!("optimize.bounds.{name} must be [low, high]")))?;
        if !free.contains(&p) {
            return Err(CliError::Config(format!("optimize.bounds.{name} given but `{name}` is not free")));
        }
        given.push((p, pair));
    }
    if given.is_empty() {
        return Ok(None);
    }
    Ok(Some(
        free.iter()
            .map(|p| given.iter().find(|(q, _)| q == p).map(|g| g.1).unwrap_or((f64::MIN, f64::MAX)))
            .collect(),
    ))
}

fn schedule(cfg: &RunConfig) -> Result<AnnealSchedule, CliError> {
    let mut s = AnnealSchedule::default();
    s.t0 = cfg.f64("optimize.schedule.t0")?;
    macro_rules! take {
        ($field:ident, f64) => {
            if let Some(v) = cfg.f64(concat!("optimize.schedule.", stringify!($field)))? {
                s.$field = v;
            }
        };
        ($field:ident, usize) => {
            if let Some(v) = cfg.usize(concat!("optimize.schedule.", stringify!($field)))? {
                s.$field = v;
            }
        };
    }
    take!(t0_factor, f64);
    take!(decay, f64);
    take!(proposals_per_temperature, usize);
    take!(temperature_floor, f64);
    take!(temperature_steps, usize);
    take!(proposal_scale, f64);
    take!(proposal_floor, f64);
    take!(polish_evaluations, usize);
    Ok(s)
}

#[derive(Serialize)]
struct BestSummary<'a> {
    target: &'a str,
    algorithm: &'a str,
    free: &'a [ParamName],
    best_params: &'a [f64],
    best_point: ParamSet,
    tr_p: f64,
    evaluations: usize,
    termination_reason: trp_core::optimize::Termination,
}

pub fn optimize(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let g = gate(cfg)?;
    let template = params(cfg, g.dim())?;
    let algorithm = cfg.require_string("optimize.algorithm")?;
    let free = free_params(cfg, &template)?;
    let mut spec = ObjectiveSpec::new(g, template, free.clone())?;
    spec.bounds = bounds(cfg, &free)?;
    spec.integrator = integrator(cfg)?;
    spec.validate()?;
    let start = spec.extract(&template)?;

    let trace: OptimizationTrace = match algorithm.as_str() {
        "simplex" => {
            if g.dim() != 2 {
                eprintln!("warning: the simplex search is usually paired with one-qubit gates");
            }
            let step = cfg.f64("optimize.simplex_step")?.unwrap_or(1e-3);
            let mut o = SimplexOptions::default();
            if let Some(v) = cfg.usize("optimize.max_evaluations")? {
                o.max_evaluations = v;
            }
            if let Some(v) = cfg.f64("optimize.f_tol")? {
                o.f_tol = v;
            }
            if let Some(v) = cfg.f64("optimize.x_tol")? {
                o.x_tol = v;
            }
            minimize_simplex(&spec, &axis_simplex(&start, step), &o)?
        }
        "anneal" => {
            if g.dim() != 4 {
                eprintln!("warning: annealing is usually paired with the two-qubit gate");
            }
            let seed = cfg.u64("optimize.seed")?.ok_or_else(|| CliError::Config("missing required key `optimize.seed` for annealing".into()))?;
            simulated_annealing(&spec, &start, &schedule(cfg)?, seed)?
        }
        other => return Err(CliError::Config(format!("optimize.algorithm must be `simplex` or `anneal`, got `{other}`"))),
    };

    let best_point = spec.point(&trace.best.params)?;
    let summary = BestSummary {
        target: g.name(),
        algorithm: &algorithm,
        free: &free,
        best_params: &trace.best.params,
        best_point,
        tr_p: trace.best.tr_p,
        evaluations: trace.evaluations.len(),
        termination_reason: trace.termination_reason,
    };
    match out {
        Some(_) => {
            emit(out, "trace.json", &to_json(&trace)?)?;
            emit(out, "best.json", &to_json(&summary)?)
        }
        None => emit(None, "", &to_json(&json!({ "trace": trace, "best": summary }))?),
    }
}

fn energy(cfg: &RunConfig, key: &str) -> Result<f64, CliError> {
    Ok(HBAR * cfg.require_f64(key)?)
}

fn write_waveforms(out: Option<&Path>, waves: &[&Waveform]) -> Result<(), CliError> {
    match out {
        Some(_) => {
            for w in waves {
                w.validate()?;
                emit(out, &format!("{}.csv", w.channel), &w.to_csv())?;
            }
        }
        None => eprintln!("note: waveform CSVs are only written with --out"),
    }
    Ok(())
}

pub fn translate(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let backend = cfg.require_string("hardware.backend")?;
    let samples = cfg.usize("hardware.samples")?.unwrap_or(DEFAULT_SAMPLES);
    let threshold = cfg.f64("hardware.threshold")?.unwrap_or(DEFAULT_VALIDITY_THRESHOLD);

    if backend == "nmr" && cfg.contains("hardware.omega1") {
        let omega1 = cfg.require_f64("hardware.omega1")?;
        let a_sweep = cfg.require_f64("hardware.a_sweep")?;
        let t0 = cfg.require_f64("hardware.t0")?;
        let eta4 = cfg.require_f64("sweep.eta4")?;
        let nmr = NmrParams { omega1, a_sweep, b_script: NmrParams::b_script_for(omega1, a_sweep, t0, eta4), t0 };
        let dimensionless = nmr.to_dimensionless()?;
        let report = json!({ "backend": "nmr", "nmr": nmr, "dimensionless": dimensionless });
        return emit(out, "report.json", &to_json(&report)?);
    }

    let params = sweep(cfg)?;
    let phys = PhysicalSweep::from_dimensionless(&params, energy(cfg, "hardware.b_over_hbar")?)?;
    let report = match backend.as_str() {
        "nmr" => {
            let nmr = nmr_translate(&phys)?;
            let times = phys.sample_times(samples)?;
            let z = Waveform { channel: "z_field".into(), units: "rad_per_s".into(), t0_seconds: phys.t0, times: times.clone(), values: times.iter().map(|&t| phys.z_coefficient(t) / HBAR).collect() };
            let phase = Waveform { channel: "twist_phase".into(), units: "rad".into(), t0_seconds: phys.t0, times: times.clone(), values: times.iter().map(|&t| phys.twist_phase(t)).collect() };
            write_waveforms(out, &[&z, &phase])?;
            json!({ "backend": "nmr", "physical": phys, "nmr": nmr })
        }
        "charge" => {
            let ej0 = match cfg.f64("hardware.ej0_over_hbar")? {
                Some(v) => HBAR * v,
                None => phys.b,
            };
            let s = charge_qubit_schedule(&phys, cfg.require_f64("hardware.gate_capacitance")?, energy(cfg, "hardware.charging_energy_over_hbar")?, ej0, samples)?;
            if s.junction_mismatch.abs() > 1e-12 {
                eprintln!("warning: E_J0 differs from b by a relative {:.3e}; the map assumes they are equal", s.junction_mismatch);
            }
            write_waveforms(out, &[&s.gate_voltage, &s.squid_flux])?;
            json!({ "backend": "charge", "physical": phys, "junction_mismatch": s.junction_mismatch })
        }
        "rfsquid" => {
            let ej0 = energy(cfg, "hardware.ej0_over_hbar")?;
            let epsilon = cfg.require_f64("hardware.epsilon")?;
            let circuit = match (cfg.f64("hardware.inductance")?, cfg.f64("hardware.capacitance")?) {
                (Some(l), Some(c)) => RfSquidCircuit { inductance: l, capacitance: c, ej0, epsilon },
                (None, None) => RfSquidCircuit::from_design(cfg.require_f64("hardware.beta_l0")?, cfg.require_f64("hardware.sqrt_lc")?, ej0, epsilon)?,
                _ => return Err(CliError::Config("give both hardware.inductance and hardware.capacitance, or neither".into())),
            };
            let s = rfsquid_schedule(&phys, &circuit, samples, threshold)?;
            for f in s.report.validity.iter().filter(|f| !f.satisfied) {
                eprintln!("warning: validity condition {} violated ({:.3e} > {:.3e})", f.condition, f.worst_value, f.threshold);
            }
            write_waveforms(out, &[&s.loop_flux, &s.squid_flux_offset])?;
            json!({ "backend": "rfsquid", "physical": phys, "circuit": circuit, "constants": s.report })
        }
        "pcq" => {
            let coeffs = PcqCoefficients {
                z0: cfg.require_f64("hardware.z0")?,
                z1: cfg.require_f64("hardware.z1")?,
                z2: cfg.require_f64("hardware.z2")?,
                x1: cfg.require_f64("hardware.x1")?,
                x2: cfg.require_f64("hardware.x2")?,
            };
            let s = pcq_schedule(&phys, energy(cfg, "hardware.ej0_over_hbar")?, &coeffs, samples)?;
            write_waveforms(out, &[&s.delta1, &s.delta2])?;
            json!({ "backend": "pcq", "physical": phys, "coefficients": coeffs, "prefactors": s.prefactors, "drive_ratio": s.drive_ratio })
        }
        other => return Err(CliError::Config(format!("hardware.backend must be one of nmr, charge, rfsquid, pcq; got `{other}`"))),
    };
    emit(out, "report.json", &to_json(&report)?)
}

pub fn tables(cfg: &RunConfig, which: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    let specs = which.iter().map(|&n| table(n)).collect::<Result<Vec<_>, _>>()?;
    let opts = integrator(cfg)?;
    for spec in &specs {
        let t = reproduce(spec, &opts)?;
        emit(out, &format!("table{}.csv", spec.number), t.to_csv().trim_end())?;
    }
    Ok(())
}

pub fn verify(out: Option<&Path>) -> Result<(), CliError> {
    let report = verify_universality();
    // fidelity and Tr P must satisfy F = 1 - TrP / 2^(n+1) for every pair of same-size gates
    let mut identity_residual: f64 = 0.0;
    for a in Gate::ALL {
        for b in Gate::ALL.iter().filter(|b| b.dim() == a.dim()) {
            let (ua, ub) = (target(a), target(*b));
            let f = metrics::fidelity(&ua, &ub)?;
            let tp = metrics::tr_p(&ua, &ub)?;
            identity_residual = identity_residual.max((f - (1.0 - tp / (2.0 * a.dim() as f64))).abs());
        }
    }
    let passed = report.max_residual() <= 1e-14 && identity_residual <= 1e-12;
    let doc = json!({
        "universality": report,
        "universality_max_residual": report.max_residual(),
        "fidelity_identity_max_residual": identity_residual,
        "passed": passed,
    });
    emit(out, "verify.json", &to_json(&doc)?)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Check("identity residuals exceed tolerance".into()))
    }
}
