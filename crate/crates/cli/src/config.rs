//! Flat dotted-key run configuration.
//!
//! Files are TOML; dotted keys such as `sweep.lambda = 5.85` are flattened back
//! into a single key space. `--set key=value` overrides accept TOML values and
//! fall back to bare strings.

use std::collections::BTreeMap;
use std::path::Path;

use toml::Value;

use crate::error::CliError;

const KEYS: &[&str] = &[
    "sweep.lambda",
    "sweep.eta4",
    "sweep.tau0",
    "sweep.twist",
    "twoqubit.d1",
    "twoqubit.d2",
    "twoqubit.d3",
    "twoqubit.d4",
    "twoqubit.c4",
    "target.name",
    "integrator.abs_tol",
    "integrator.rel_tol",
    "integrator.max_steps",
    "integrator.initial_step",
    "integrator.max_step",
    "integrator.gauge",
    "integrator.readout",
    "optimize.algorithm",
    "optimize.seed",
    "optimize.free",
    "optimize.max_evaluations",
    "optimize.simplex_step",
    "optimize.f_tol",
    "optimize.x_tol",
    "optimize.schedule.t0",
    "optimize.schedule.t0_factor",
    "optimize.schedule.decay",
    "optimize.schedule.proposals_per_temperature",
    "optimize.schedule.temperature_floor",
    "optimize.schedule.temperature_steps",
    "optimize.schedule.proposal_scale",
    "optimize.schedule.proposal_floor",
    "optimize.schedule.polish_evaluations",
    "hardware.backend",
    "hardware.b_over_hbar",
    "hardware.samples",
    "hardware.threshold",
    "hardware.gate_capacitance",
    "hardware.charging_energy_over_hbar",
    "hardware.ej0_over_hbar",
    "hardware.inductance",
    "hardware.capacitance",
    "hardware.beta_l0",
    "hardware.sqrt_lc",
    "hardware.epsilon",
    "hardware.z0",
    "hardware.z1",
    "hardware.z2",
    "hardware.x1",
    "hardware.x2",
    "hardware.omega1",
    "hardware.a_sweep",
    "hardware.t0",
    "output.path",
    "output.format",
];

const BOUND_PREFIX: &str = "optimize.bounds.";

fn known(key: &str) -> bool {
    KEYS.contains(&key) || key.strip_prefix(BOUND_PREFIX).is_some_and(|p| p.parse::<trp_core::optimize::ParamName>().is_ok())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(format!("config parse error: {}", e.message())))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        let cfg = Self { values };
        cfg.check_keys()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check_keys(&self) -> Result<(), CliError> {
        match self.values.keys().find(|k| !known(k)) {
            Some(k) => Err(CliError::Config(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not of the form key=value")))?;
        let key = key.trim();
        if !known(key) {
            return Err(CliError::Config(format!("unknown config key `{key}`")));
        }
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(Value::String(s)) => s.trim().parse().map(Some).map_err(|_| CliError::Config(format!("`{key}` must be a number, got `{s}`"))),
            Some(v) => Err(CliError::Config(format!("`{key}` must be a number, got {v}"))),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, CliError> {
        self.f64(key)?.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(Value::String(s)) => s.trim().parse().map(Some).map_err(|_| CliError::Config(format!("`{key}` must be a non-negative integer, got `{s}`"))),
            Some(v) => Err(CliError::Config(format!("`{key}` must be a non-negative integer, got {v}"))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(CliError::Config(format!("`{key}` must be a string, got {v}"))),
        }
    }

    pub fn require_string(&self, key: &str) -> Result<String, CliError> {
        self.string(key)?.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    /// A list given either as a TOML array or a comma-separated string.
    pub fn list(&self, key: &str) -> Result<Option<Vec<String>>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect())),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.clone()),
                    Value::Float(f) => Ok(f.to_string()),
                    Value::Integer(i) => Ok(i.to_string()),
                    other => Err(CliError::Config(format!("`{key}` entries must be scalars, got {other}"))),
                })
                .collect::<Result<_, _>>()
                .map(Some),
            Some(v) => Err(CliError::Config(format!("`{key}` must be a list, got {v}"))),
        }
    }

    pub fn bounds(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.values.iter().filter_map(|(k, v)| k.strip_prefix(BOUND_PREFIX).map(|p| (p, v)))
    }
}
