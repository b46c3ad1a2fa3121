use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{load_case, GridCase, IeeeSystem};

/// Bundled IEEE system or a case file on disk (`custom:<path>`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SystemSpec {
    Ieee(IeeeSystem),
    Custom(String),
}

impl SystemSpec {
    pub fn load(&self) -> Result<GridCase> {
        match self {
            SystemSpec::Ieee(sys) => Ok(sys.load()),
            SystemSpec::Custom(path) => load_case(path),
        }
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemSpec::Ieee(sys) => write!(f, "{sys}"),
            SystemSpec::Custom(path) => write!(f, "custom:{path}"),
        }
    }
}

impl FromStr for SystemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("custom:") {
            Some(path) if !path.is_empty() => Ok(SystemSpec::Custom(path.to_string())),
            Some(_) => Err(Error::Config("custom system needs a path".into())),
            None => s
                .parse::<IeeeSystem>()
                .map(SystemSpec::Ieee)
                .map_err(|_| Error::Config(format!("unknown system '{s}'"))),
        }
    }
}

impl TryFrom<String> for SystemSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SystemSpec> for String {
    fn from(s: SystemSpec) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    Tla,
    Tsa,
    Sla,
    Ssa,
    RandomAttackDetectDistributed,
    RandomAttackDetectCollaborative,
    DistributedAttack,
    CollectiveAttack,
}

impl fmt::Display for ExperimentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

impl FromStr for ExperimentMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown mode '{s}'")))
    }
}

/// How the cluster count `G` is picked per realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GPolicy {
    #[default]
    One,
    /// Uniform over the prime divisors of the split dimension.
    PrimeDivisorRandom,
    Fixed(usize),
}

impl fmt::Display for GPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GPolicy::One => f.write_str("one"),
            GPolicy::PrimeDivisorRandom => f.write_str("prime_divisor_random"),
            GPolicy::Fixed(g) => write!(f, "fixed:{g}"),
        }
    }
}

impl FromStr for GPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(GPolicy::One),
            "prime_divisor_random" => Ok(GPolicy::PrimeDivisorRandom),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|g| g.trim().parse().ok())
                .map(GPolicy::Fixed)
                .ok_or_else(|| Error::Config(format!("unknown G policy '{s}'"))),
        }
    }
}

impl TryFrom<String> for GPolicy {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GPolicy> for String {
    fn from(p: GPolicy) -> String {
        p.to_string()
    }
}

fn default_realizations() -> usize {
    100
}
fn default_c() -> f64 {
    0.5
}
fn default_rho() -> f64 {
    1.0
}
fn default_eps_abs() -> f64 {
    1e-4
}
fn default_eps_rel() -> f64 {
    1e-2
}
fn default_max_iter() -> usize {
    10_000
}
fn default_noise_sigma() -> f64 {
    crate::grid::DEFAULT_NOISE_SIGMA
}
fn default_targeted() -> usize {
    2
}
fn default_psi() -> f64 {
    1.0
}

/// Monte-Carlo sweep description. Keys mirror the field names; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub mode: ExperimentMode,
    #[serde(rename = "k_over_N_grid")]
    pub k_over_n_grid: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    /// `λ = C·λ_max`.
    #[serde(rename = "C", default = "default_c")]
    pub c: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_eps_abs")]
    pub eps_abs: f64,
    #[serde(default = "default_eps_rel")]
    pub eps_rel: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "G_policy", default)]
    pub g_policy: GPolicy,
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma: f64,
    /// Size of the targeted set `I` in targeted modes.
    #[serde(default = "default_targeted")]
    pub targeted: usize,
    /// `ψ` for strategic modes.
    #[serde(default = "default_psi")]
    pub psi: f64,
}

impl ExperimentConfig {
    /// Config with every optional key at its default.
    pub fn new(system: SystemSpec, mode: ExperimentMode, k_over_n_grid: Vec<f64>) -> Self {
        ExperimentConfig {
            system,
            mode,
            k_over_n_grid,
            realizations: default_realizations(),
            c: default_c(),
            rho: default_rho(),
            eps_abs: default_eps_abs(),
            eps_rel: default_eps_rel(),
            max_iter: default_max_iter(),
            seed: 0,
            g_policy: GPolicy::One,
            noise_sigma: default_noise_sigma(),
            targeted: default_targeted(),
            psi: default_psi(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let grid = &self.k_over_n_grid;
        if grid.iter().any(|v| !(v.is_finite() && *v > 0.0 && *v <= 1.0)) {
            return Err(Error::Config("k_over_N_grid entries must lie in (0, 1]".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("k_over_N_grid must be strictly increasing".into()));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be >= 1".into()));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::Config("C must be >= 0".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma > 0.0) {
            return Err(Error::Config("noise_sigma must be > 0".into()));
        }
        if !(self.psi.is_finite() && self.psi >= 0.0) {
            return Err(Error::Config("psi must be >= 0".into()));
        }
        if self.targeted == 0 {
            return Err(Error::Config("targeted must be >= 1".into()));
        }
        if let GPolicy::Fixed(0) = self.g_policy {
            return Err(Error::Config("fixed G must be >= 1".into()));
        }
        self.solver().validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn solver(&self) -> crate::admm::SolverConfig {
        crate::admm::SolverConfig {
            rho: self.rho,
            lambda: 0.0,
            eps_abs: self.eps_abs,
            eps_rel: self.eps_rel,
            max_iter: self.max_iter,
        }
    }

    /// Parses TOML or JSON; the format follows the extension, or the
    /// first character when there is none.
    pub fn from_text(text: &str, toml_hint: Option<bool>) -> Result<Self> {
        let is_toml = toml_hint.unwrap_or_else(|| !text.trim_start().starts_with('{'));
        let cfg: ExperimentConfig = if is_toml {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let hint = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Some(true),
            Some("json") => Some(false),
            _ => None,
        };
        ExperimentConfig::from_text(&text, hint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_with_defaults() {
        let cfg = ExperimentConfig::from_text(
            "system = \"ieee57\"\nmode = \"random_attack_detect_distributed\"\nk_over_N_grid = [0.1, 0.5]\nG_policy = \"fixed:3\"\n",
            None,
        )
        .unwrap();
        assert_eq!(cfg.system, SystemSpec::Ieee(IeeeSystem::Ieee57));
        assert_eq!(cfg.realizations, 100);
        assert_eq!(cfg.c, 0.5);
        assert_eq!(cfg.g_policy, GPolicy::Fixed(3));
    }

    #[test]
    fn json_and_unknown_keys() {
        let ok = r#"{"system":"custom:/tmp/x.m","mode":"tla","k_over_N_grid":[0.2],"C":0.1}"#;
        let cfg = ExperimentConfig::from_text(ok, None).unwrap();
        assert_eq!(cfg.system, SystemSpec::Custom("/tmp/x.m".into()));
        let bad = r#"{"system":"ieee9","mode":"tla","k_over_N_grid":[0.2],"lambda":0.1}"#;
        assert!(ExperimentConfig::from_text(bad, None).is_err());
    }

    #[test]
    fn grid_must_be_sorted_and_in_range() {
        let mut cfg = ExperimentConfig::new(SystemSpec::Ieee(IeeeSystem::Ieee9), ExperimentMode::Tla, vec![0.5, 0.2]);
        assert!(cfg.validate().is_err());
        cfg.k_over_n_grid = vec![0.0, 0.5];
        assert!(cfg.validate().is_err());
        cfg.k_over_n_grid = vec![0.2, 1.0];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn names_round_trip() {
        for mode in ["tla", "ssa", "random_attack_detect_collaborative", "collective_attack"] {
            assert_eq!(mode.parse::<ExperimentMode>().unwrap().to_string(), mode);
        }
        assert_eq!("fixed:7".parse::<GPolicy>().unwrap().to_string(), "fixed:7");
        assert!("fixed:x".parse::<GPolicy>().is_err());
    }
}
