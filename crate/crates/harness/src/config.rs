//! `key = value` configuration files with sections, layered over a preset.

use std::path::Path;

use toml::{Table, Value};

use crate::error::HarnessError;
use crate::presets::{preset, DEFAULT_PRESET, PRESET_NAMES};
use crate::scenario::{FormulationSpec, Scenario};

/// Command-line values that replace file values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub half_length: Option<f64>,
    pub t_final: Option<f64>,
    pub cfl: Option<f64>,
    pub formulation: Option<FormulationSpec>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) {
        if let Some(n) = self.n {
            s.grid.n = n;
        }
        if let Some(l) = self.half_length {
            s.grid.half_length = l;
        }
        if let Some(t) = self.t_final {
            s.control.t_final = t;
        }
        if let Some(c) = self.cfl {
            s.control.cfl = c;
        }
        if let Some(f) = self.formulation {
            s.control.formulation = f;
        }
    }
}

/// Tables replaced wholesale when the file names a new `profile`.
const PROFILE_TABLES: [&str; 2] = ["initial.u", "initial.rho"];

fn merge(base: &mut Table, user: &Table, path: &str, issues: &mut Vec<String>) {
    for (key, value) in user {
        let full = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
        match (base.get_mut(key), value) {
            (None, _) => issues.push(format!("unknown key `{full}`")),
            (Some(Value::Table(b)), Value::Table(u)) => {
                if PROFILE_TABLES.contains(&full.as_str()) && u.contains_key("profile") {
                    *b = u.clone();
                } else {
                    merge(b, u, &full, issues);
                }
            }
            (Some(slot), v) => *slot = v.clone(),
        }
    }
}

/// Scenario from config text. `preset_name` wins over a `preset` key in the
/// text; without either the default preset is the base.
pub fn parse_config(text: &str, preset_name: Option<&str>) -> Result<Scenario, HarnessError> {
    let mut user: Table = text.parse().map_err(|e: toml::de::Error| HarnessError::config(e.to_string()))?;
    let from_file = match user.remove("preset") {
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(HarnessError::config("`preset` must be a string")),
        None => None,
    };
    let name = preset_name.map(str::to_owned).or(from_file).unwrap_or_else(|| DEFAULT_PRESET.into());
    let base = preset(&name)
        .ok_or_else(|| HarnessError::config(format!("unknown preset `{name}` (known: {})", PRESET_NAMES.join(", "))))?;
    let mut table = Table::try_from(&base).map_err(|e| HarnessError::Orchestration(e.to_string()))?;
    let mut issues = Vec::new();
    merge(&mut table, &user, "", &mut issues);
    if !issues.is_empty() {
        return Err(HarnessError::Config(issues));
    }
    Value::Table(table).try_into().map_err(|e: toml::de::Error| HarnessError::config(e.to_string()))
}

/// Reads, layers, overrides and validates.
pub fn load(path: &Path, preset_name: Option<&str>, overrides: &Overrides) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut s = parse_config(&text, preset_name)?;
    overrides.apply(&mut s);
    s.validate()?;
    Ok(s)
}

/// The scenario as config text that reproduces it.
pub fn render(s: &Scenario) -> Result<String, HarnessError> {
    toml::to_string(s).map_err(|e| HarnessError::Orchestration(e.to_string()))
}
