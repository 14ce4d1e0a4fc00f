//! Strict TOML configuration: unknown keys are rejected so typos surface as
//! errors naming the offending key, and all physical validation is delegated
//! to the core types.

use serde::Deserialize;
use zenochem_core::model::{CreationRate, SimParams, Theory};
use zenochem_core::spin::{Electron, NucleusSpec, Spin, SystemSpec};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: Option<SystemSection>,
    pub params: Option<ParamsSection>,
    pub scenario: Option<ScenarioSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default)]
    pub nuclei: Vec<NucleusEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NucleusEntry {
    pub spin: f64,
    /// Full 3x3 coupling tensor, rows in x, y, z order, 1/us.
    pub hyperfine: [[f64; 3]; 3],
    /// Which electron the nucleus sits on: 1 or 2.
    #[serde(default = "default_electron")]
    pub coupled_electron: u8,
}

fn default_electron() -> u8 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default, rename = "kS")]
    pub k_s: f64,
    #[serde(default, rename = "kT")]
    pub k_t: f64,
    #[serde(default, rename = "kSR")]
    pub k_sr: f64,
    /// Pair-creation rate in 1/us, or the string "inf" for pairs all
    /// present at t = 0 (the default).
    #[serde(default, rename = "kCR")]
    pub k_cr: Option<CreationValue>,
    #[serde(default, rename = "B_uT")]
    pub b_ut: Option<FieldValue>,
    /// When set, a second propagation runs at this reference field and the
    /// CSV gains an `mfe` column (signal minus reference population).
    #[serde(rename = "B_ref_uT")]
    pub b_ref_ut: Option<FieldValue>,
    #[serde(default = "default_theory")]
    pub theory: TheoryName,
    #[serde(default = "default_t_max")]
    pub t_max_us: f64,
    #[serde(default = "default_dt")]
    pub dt_us: f64,
    #[serde(default = "default_omega_scale")]
    pub omega_scale: f64,
}

fn default_theory() -> TheoryName {
    TheoryName::Quantum
}
fn default_t_max() -> f64 {
    10.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_omega_scale() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryName {
    Quantum,
    Phenomenological,
}

impl From<TheoryName> for Theory {
    fn from(t: TheoryName) -> Theory {
        match t {
            TheoryName::Quantum => Theory::Quantum,
            TheoryName::Phenomenological => Theory::Phenomenological,
        }
    }
}

/// `kCR = 4.0` or `kCR = "inf"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum CreationValue {
    Rate(f64),
    Sentinel(String),
}

impl CreationValue {
    pub fn to_creation(&self) -> Result<CreationRate, CliError> {
        match self {
            CreationValue::Rate(r) => Ok(CreationRate::Rate(*r)),
            CreationValue::Sentinel(s) if s == "inf" => Ok(CreationRate::Instantaneous),
            CreationValue::Sentinel(s) => Err(CliError::config(format!(
                "kCR must be a rate in 1/us or the string \"inf\", got {s:?}"
            ))),
        }
    }
}

/// `B_uT = 49.0` (field along z) or `B_uT = [x, y, z]`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Scalar(f64),
    Vector([f64; 3]),
}

impl FieldValue {
    pub fn to_vector(self) -> [f64; 3] {
        match self {
            FieldValue::Scalar(z) => [0.0, 0.0, z],
            FieldValue::Vector(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// File name for inline runs, relative to the output directory.
    pub csv_path: Option<String>,
    #[serde(default)]
    pub emit_plot_script: bool,
    pub rho_sample_stride: Option<usize>,
}

/// Either a named built-in scenario or an inline (system, params) pair.
#[derive(Debug)]
pub enum RunPlan {
    Scenario(String),
    Inline {
        spec: SystemSpec,
        params: SimParams,
        reference_field_ut: Option<[f64; 3]>,
    },
}

pub fn load(path: &std::path::Path) -> Result<(ConfigFile, RunPlan), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let config: ConfigFile = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("malformed config {}: {e}", path.display())))?;
    let plan = plan_from(&config)?;
    Ok((config, plan))
}

fn plan_from(config: &ConfigFile) -> Result<RunPlan, CliError> {
    match (&config.scenario, &config.params) {
        (Some(_), Some(_)) => Err(CliError::config(
            "config sets both [scenario] and inline [params]; choose one".into(),
        )),
        (Some(sc), None) => {
            if config.system.is_some() {
                return Err(CliError::config(
                    "config sets both [scenario] and inline [system]; choose one".into(),
                ));
            }
            if config.output.csv_path.is_some() {
                return Err(CliError::config(
                    "output.csv_path applies to inline runs only; scenario runs name \
                     their files after field and theory"
                        .into(),
                ));
            }
            Ok(RunPlan::Scenario(sc.name.clone()))
        }
        (None, Some(params)) => Ok(inline_plan(config, params)?),
        (None, None) => Err(CliError::config(
            "config needs a [scenario] name or inline [params]".into(),
        )),
    }
}

fn inline_plan(config: &ConfigFile, params: &ParamsSection) -> Result<RunPlan, CliError> {
    let mut nuclei = Vec::new();
    if let Some(system) = &config.system {
        for (i, entry) in system.nuclei.iter().enumerate() {
            let spin = Spin::new(entry.spin)
                .map_err(|e| CliError::config(format!("system.nuclei[{i}]: {e}")))?;
            let coupled_electron = match entry.coupled_electron {
                1 => Electron::First,
                2 => Electron::Second,
                other => {
                    return Err(CliError::config(format!(
                        "system.nuclei[{i}]: coupled_electron must be 1 or 2, got {other}"
                    )))
                }
            };
            nuclei.push(NucleusSpec {
                spin,
                hyperfine: entry.hyperfine,
                coupled_electron,
            });
        }
    }
    let spec = SystemSpec::new(nuclei);

    let creation = match &params.k_cr {
        Some(v) => v.to_creation()?,
        None => CreationRate::Instantaneous,
    };
    let sim = SimParams {
        k_s: params.k_s,
        k_t: params.k_t,
        k_sr: params.k_sr,
        creation,
        b_field_ut: params.b_ut.map(FieldValue::to_vector).unwrap_or([0.0; 3]),
        theory: params.theory.into(),
        t_max_us: params.t_max_us,
        dt_us: params.dt_us,
        omega_scale: params.omega_scale,
        rho_sample_stride: config.output.rho_sample_stride.unwrap_or(0),
    };
    Ok(RunPlan::Inline {
        spec,
        params: sim,
        reference_field_ut: params.b_ref_ut.map(FieldValue::to_vector),
    })
}
