use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::measurement::{ModelParams, Potential, Window};
use crate::{Error, Result};

/// Every recognized key with its default, as TOML source.
const DEFAULTS: &str = r#"
length = 20.0
n = 1024
mass = 1.0
probe_mass = 1.0
omega = 1.0
coupling = 1.0
p_true = 2.0
potential = "harmonic"
quartic_strength = 0.25
window = "gaussian"
window_sigma = 0.0
omega_sweep = [1.0, 0.25, 0.0625]
gammas = [0.5, 1.0, 2.0]
deficiency_length = 40.0
seed = 42
n_random_kernels = 20
deviation_scales = [0.5, 1.0, 2.0]
povm_n = 128
povm_length = 10.0
outdir = "out"
"#;

/// Validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Half-line extent in units of the oscillator length.
    pub length: f64,
    /// Half-line points for the distribution chain.
    pub n: usize,
    pub model: ModelParams,
    /// Explicit window width; 0 selects `8/√(mω)` per frequency.
    pub window_sigma: f64,
    pub omega_sweep: Vec<f64>,
    pub gammas: Vec<f64>,
    pub deficiency_length: f64,
    pub seed: u64,
    pub n_random_kernels: usize,
    pub deviation_scales: Vec<f64>,
    /// Grid size for the matrix-level checks.
    pub povm_n: usize,
    pub povm_length: f64,
    pub outdir: PathBuf,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Configuration(msg.into())
}

/// Parses a `--key value` override as a TOML value, falling back to a
/// bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Merges defaults, the optional file and command-line overrides (later
/// sources win) and validates the result.
pub fn load(file: Option<&Path>, overrides: &[String], env_outdir: Option<&str>) -> Result<RunConfig> {
    let mut table: Table = DEFAULTS.parse().expect("built-in defaults parse");
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let user: Table = text.parse().map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        merge(&mut table, user)?;
    }
    if overrides.len() % 2 != 0 {
        return Err(config_err("overrides must come in --key value pairs"));
    }
    let mut cli = Table::new();
    for pair in overrides.chunks(2) {
        let key = pair[0]
            .strip_prefix("--")
            .ok_or_else(|| config_err(format!("expected --key, got {}", pair[0])))?;
        cli.insert(key.replace('-', "_"), parse_value(&pair[1]));
    }
    merge(&mut table, cli)?;
    if let Some(dir) = env_outdir {
        table.insert("outdir".into(), Value::String(dir.to_string()));
    }
    RunConfig::from_table(&table)
}

fn merge(base: &mut Table, layer: Table) -> Result<()> {
    for (key, value) in layer {
        if !base.contains_key(&key) {
            return Err(config_err(format!("unknown configuration key `{key}`")));
        }
        base.insert(key, value);
    }
    Ok(())
}

fn float(t: &Table, key: &str) -> Result<f64> {
    match &t[key] {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(config_err(format!("`{key}` must be a number, got {other}"))),
    }
}

fn positive(t: &Table, key: &str) -> Result<f64> {
    let x = float(t, key)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(config_err(format!("`{key}` must be positive, got {x}")));
    }
    Ok(x)
}

fn count(t: &Table, key: &str) -> Result<usize> {
    match &t[key] {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(config_err(format!("`{key}` must be a non-negative integer, got {other}"))),
    }
}

fn string<'a>(t: &'a Table, key: &str) -> Result<&'a str> {
    t[key].as_str().ok_or_else(|| config_err(format!("`{key}` must be a string")))
}

fn float_list(t: &Table, key: &str) -> Result<Vec<f64>> {
    let items = t[key].as_array().ok_or_else(|| config_err(format!("`{key}` must be an array")))?;
    let values: Vec<f64> = items
        .iter()
        .map(|v| match v {
            Value::Float(x) => Ok(*x),
            Value::Integer(i) => Ok(*i as f64),
            other => Err(config_err(format!("`{key}` entries must be numbers, got {other}"))),
        })
        .collect::<Result<_>>()?;
    if values.is_empty() || values.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(config_err(format!("`{key}` must be a non-empty list of positive numbers")));
    }
    Ok(values)
}

impl RunConfig {
    fn from_table(t: &Table) -> Result<Self> {
        let mass = positive(t, "mass")?;
        let omega = float(t, "omega")?;
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(config_err(format!("`omega` must be non-negative, got {omega}")));
        }
        let coupling = float(t, "coupling")?;
        if !coupling.is_finite() || coupling == 0.0 {
            return Err(config_err("`coupling` must be finite and nonzero"));
        }
        let potential = match string(t, "potential")? {
            "harmonic" => Potential::Harmonic,
            "quartic" => Potential::Quartic { strength: positive(t, "quartic_strength")? },
            "flat" => Potential::Flat,
            other => return Err(config_err(format!("unknown potential `{other}`"))),
        };
        let window_sigma = float(t, "window_sigma")?;
        if !(window_sigma.is_finite() && window_sigma >= 0.0) {
            return Err(config_err("`window_sigma` must be non-negative"));
        }
        let window = match string(t, "window")? {
            "gaussian" => Window::Gaussian { sigma: window_sigma },
            "hard" => Window::Hard,
            other => return Err(config_err(format!("unknown window `{other}`"))),
        };
        let p_true = float(t, "p_true")?;
        if !p_true.is_finite() {
            return Err(config_err("`p_true` must be finite"));
        }
        let seed = match &t["seed"] {
            Value::Integer(i) if *i >= 0 => *i as u64,
            other => return Err(config_err(format!("`seed` must be a non-negative integer, got {other}"))),
        };
        let n = count(t, "n")?;
        let povm_n = count(t, "povm_n")?;
        for (key, value) in [("n", n), ("povm_n", povm_n)] {
            if value < crate::grid::MIN_POINTS || value % 2 != 0 {
                return Err(config_err(format!(
                    "`{key}` must be even and at least {}, got {value}",
                    crate::grid::MIN_POINTS
                )));
            }
        }
        Ok(Self {
            length: positive(t, "length")?,
            n,
            model: ModelParams {
                mass,
                probe_mass: positive(t, "probe_mass")?,
                omega,
                coupling,
                potential,
                p_true,
                window,
            },
            window_sigma,
            omega_sweep: float_list(t, "omega_sweep")?,
            gammas: float_list(t, "gammas")?,
            deficiency_length: positive(t, "deficiency_length")?,
            seed,
            n_random_kernels: count(t, "n_random_kernels")?,
            deviation_scales: float_list(t, "deviation_scales")?,
            povm_n,
            povm_length: positive(t, "povm_length")?,
            outdir: PathBuf::from(string(t, "outdir")?),
        })
    }

    /// Model parameters at trap frequency `omega`, with the window resolved.
    pub fn model_at(&self, omega: f64) -> ModelParams {
        let mut m = ModelParams { omega, ..self.model };
        if let Window::Gaussian { sigma } = m.window {
            if sigma == 0.0 {
                m.window = Window::Gaussian { sigma: crate::measurement::DEFAULT_WINDOW_WIDTHS * m.length_scale() };
            }
        }
        m
    }
}
