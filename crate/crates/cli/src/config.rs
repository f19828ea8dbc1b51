//! TOML run configuration.
//!
//! ```toml
//! [system]
//! omega = 1.0
//! omega_a = 1.1
//! omega_b = 1.1
//! g_a = 0.001
//! g_b = 0.001
//!
//! [scenario]
//! type = "werner"      # or "pure"
//! gamma = 0.8181818181818182
//! bell = "phi+"        # phi+ | phi- | psi+ | psi-
//! # psi = "theta:0"    # pure only: "0", "1" or "theta:<radians>"
//! # phi = "theta:0"
//!
//! [field]
//! kind = "coherent"    # fock | coherent | thermal
//! intensity = 20.0     # mean photon number for evolve and beats
//!
//! [grid]
//! tau_min_pi = 0.0
//! tau_max_pi = 4.0
//! tau_steps = 800
//! intensity_min = 0.0
//! intensity_max = 10.0
//! intensity_steps = 400
//!
//! [output]
//! path = "out.csv"
//! precision = 9
//! ```
//!
//! Every section and key is optional; unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ebeats_core::dynamics::EvolutionRoute;
use ebeats_core::entanglement::linspace;
use ebeats_core::model::SystemParams;
use ebeats_core::scan::{FieldFamily, ScanSpec, Scenario};
use ebeats_core::states::{theta_state, BellState, QubitState};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_PRECISION: usize = 9;
pub const DEFAULT_TAU_STEPS: usize = 800;
pub const DEFAULT_INTENSITY_STEPS: usize = 400;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub field: FieldSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub omega: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub g_a: f64,
    pub g_b: f64,
}

/// g/Δ = 0.01 with ω = 1, Δ = 0.1.
impl Default for SystemSection {
    fn default() -> Self {
        Self {
            omega: 1.0,
            omega_a: 1.1,
            omega_b: 1.1,
            g_a: 0.001,
            g_b: 0.001,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioType {
    #[default]
    Pure,
    Werner,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    #[serde(rename = "type")]
    pub kind: ScenarioType,
    pub psi: String,
    pub phi: String,
    pub gamma: f64,
    pub bell: String,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            kind: ScenarioType::Pure,
            psi: "theta:0".into(),
            phi: "theta:0".into(),
            gamma: 9.0 / 11.0,
            bell: "phi+".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FieldKindName {
    Fock,
    #[default]
    Coherent,
    Thermal,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSection {
    pub kind: FieldKindName,
    pub intensity: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub tau_min_pi: f64,
    pub tau_max_pi: f64,
    /// `None` lets each command pick its own default.
    pub tau_steps: Option<usize>,
    pub intensity_min: f64,
    pub intensity_max: f64,
    pub intensity_steps: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            tau_min_pi: 0.0,
            tau_max_pi: 4.0,
            tau_steps: None,
            intensity_min: 0.0,
            intensity_max: 10.0,
            intensity_steps: DEFAULT_INTENSITY_STEPS,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    /// Significant digits.
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            path: None,
            precision: DEFAULT_PRECISION,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Parses `"0"`, `"1"` or `"theta:<radians>"`.
pub fn parse_qubit(s: &str) -> Result<QubitState, CliError> {
    match s.trim() {
        "0" => Ok(QubitState::zero()),
        "1" => Ok(QubitState::one()),
        other => {
            let theta = other
                .strip_prefix("theta:")
                .and_then(|x| x.trim().parse::<f64>().ok())
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    config_err(format!(
                        "qubit state {other:?}: expected \"0\", \"1\" or \"theta:<radians>\""
                    ))
                })?;
            Ok(theta_state(theta))
        }
    }
}

pub fn parse_bell(s: &str) -> Result<BellState, CliError> {
    match s.trim() {
        "phi+" => Ok(BellState::PhiPlus),
        "phi-" => Ok(BellState::PhiMinus),
        "psi+" => Ok(BellState::PsiPlus),
        "psi-" => Ok(BellState::PsiMinus),
        other => Err(config_err(format!(
            "Bell state {other:?}: expected phi+, phi-, psi+ or psi-"
        ))),
    }
}

pub fn parse_route(s: &str) -> Result<EvolutionRoute, CliError> {
    match s {
        "exact" => Ok(EvolutionRoute::Exact),
        "effective" => Ok(EvolutionRoute::EffectiveNumeric),
        "closed" => Ok(EvolutionRoute::ClosedForm),
        other => Err(config_err(format!(
            "route {other:?}: expected exact, effective or closed"
        ))),
    }
}

pub fn route_name(r: EvolutionRoute) -> &'static str {
    match r {
        EvolutionRoute::Exact => "exact",
        EvolutionRoute::EffectiveNumeric => "effective",
        EvolutionRoute::ClosedForm => "closed",
    }
}

impl RunConfig {
    /// Parses TOML text. Syntax and schema errors carry line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(config_err)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn check(&self) -> Result<(), CliError> {
        self.params()?;
        self.scenario()?;
        let g = &self.grid;
        if !(g.tau_min_pi.is_finite() && g.tau_max_pi.is_finite()) {
            return Err(config_err("grid: tau bounds must be finite"));
        }
        if g.tau_steps == Some(0) || g.tau_steps == Some(1) || !(g.tau_max_pi > g.tau_min_pi) {
            return Err(config_err(
                "grid: empty tau grid (need tau_max_pi > tau_min_pi and tau_steps ≥ 2)",
            ));
        }
        if g.intensity_steps == 0 || g.intensity_max < g.intensity_min {
            return Err(config_err(
                "grid: empty intensity grid (need intensity_max ≥ intensity_min and intensity_steps ≥ 1)",
            ));
        }
        if !(1..=17).contains(&self.output.precision) {
            return Err(config_err("output: precision must be between 1 and 17"));
        }
        self.family()
            .statistics(self.field.intensity)
            .map_err(config_err)?;
        Ok(())
    }

    pub fn params(&self) -> Result<SystemParams, CliError> {
        let s = &self.system;
        SystemParams::new(s.omega, s.omega_a, s.omega_b, s.g_a, s.g_b)
            .map_err(|e| config_err(format!("system: {e}")))
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let s = &self.scenario;
        let scenario = match s.kind {
            ScenarioType::Pure => Scenario::PurePure(parse_qubit(&s.psi)?, parse_qubit(&s.phi)?),
            ScenarioType::Werner => Scenario::Werner {
                gamma: s.gamma,
                bell: parse_bell(&s.bell)?,
            },
        };
        scenario
            .initial_atoms()
            .map_err(|e| config_err(format!("scenario: {e}")))?;
        Ok(scenario)
    }

    pub fn family(&self) -> FieldFamily {
        match self.field.kind {
            FieldKindName::Fock => FieldFamily::Fock,
            FieldKindName::Coherent => FieldFamily::Coherent,
            FieldKindName::Thermal => FieldFamily::Thermal,
        }
    }

    pub fn tau_bounds(&self) -> (f64, f64) {
        (self.grid.tau_min_pi * PI, self.grid.tau_max_pi * PI)
    }

    pub fn tau_axis(&self, default_steps: usize) -> Result<Vec<f64>, CliError> {
        let (a, b) = self.tau_bounds();
        linspace(a, b, self.grid.tau_steps.unwrap_or(default_steps)).map_err(config_err)
    }

    pub fn intensity_axis(&self) -> Result<Vec<f64>, CliError> {
        let g = &self.grid;
        if g.intensity_steps == 1 || g.intensity_max == g.intensity_min {
            return Ok(vec![g.intensity_min; 1]);
        }
        linspace(g.intensity_min, g.intensity_max, g.intensity_steps).map_err(config_err)
    }

    /// The heatmap scan described by this configuration.
    pub fn scan_spec(&self, route: Option<EvolutionRoute>) -> Result<ScanSpec, CliError> {
        let spec = ScanSpec {
            scenario: self.scenario()?,
            field_kind: self.family(),
            intensity_axis: self.intensity_axis()?,
            tau_axis: self.tau_axis(DEFAULT_TAU_STEPS)?,
            params: self.params()?,
            route,
        };
        spec.validate().map_err(config_err)?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let p = cfg.params().unwrap();
        assert!((p.eps_a() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn full_config_round_trip() {
        let cfg = RunConfig::parse(
            r#"
[system]
omega = 1.0
omega_a = 1.2
omega_b = 1.2
g_a = 0.002
g_b = 0.002

[scenario]
type = "werner"
gamma = 0.5
bell = "psi-"

[field]
kind = "thermal"
intensity = 3.0

[grid]
tau_min_pi = 0.0
tau_max_pi = 2.0
tau_steps = 11
intensity_min = 1.0
intensity_max = 2.0
intensity_steps = 3

[output]
path = "x.csv"
precision = 6
"#,
        )
        .unwrap();
        assert_eq!(
            cfg.scenario().unwrap(),
            Scenario::Werner {
                gamma: 0.5,
                bell: BellState::PsiMinus
            }
        );
        assert_eq!(cfg.intensity_axis().unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(cfg.tau_axis(99).unwrap().len(), 11);
        assert_eq!(cfg.output.precision, 6);
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let err = RunConfig::parse("[system]\nomega = 1.0\nfrobnicate = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("frobnicate"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let msg = RunConfig::parse("[grid]\n\ntau_steps = = 3\n")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn semantic_errors() {
        for bad in [
            "[grid]\ntau_steps = 0",
            "[grid]\ntau_min_pi = 2.0\ntau_max_pi = 1.0",
            "[scenario]\ntype = \"werner\"\ngamma = 1.5",
            "[scenario]\npsi = \"up\"",
            "[scenario]\ntype = \"werner\"\nbell = \"phi\"",
            "[system]\nomega_a = 1.0",
            "[field]\nkind = \"fock\"\nintensity = 1.5",
            "[output]\nprecision = 0",
        ] {
            assert!(
                matches!(RunConfig::parse(bad), Err(CliError::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn qubit_strings() {
        assert_eq!(parse_qubit("0").unwrap(), QubitState::zero());
        assert_eq!(parse_qubit("theta:0").unwrap(), theta_state(0.0));
        assert_eq!(parse_qubit(" theta: 1.5 ").unwrap(), theta_state(1.5));
        assert!(parse_qubit("theta:x").is_err());
    }
}
