//! Scenario configuration, read from TOML. Unknown keys are errors.

use std::path::{Path, PathBuf};

use hwl_core::dyadic::MAX_DEPTH;
use serde::{Deserialize, Serialize};

use crate::weights::WeightSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Every analysis a scenario can request, in execution order:
/// conditions, then norms, then certificates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisId {
    JointA2,
    #[serde(rename = "cond_12")]
    Cond12,
    #[serde(rename = "cond_13")]
    Cond13,
    SawyerTsigma,
    SawyerT0,
    SigmaK,
    #[serde(rename = "lemma33")]
    Lemma33,
    Bump,
    Fkp,
    Doubling,
    EmbeddingTesting,
    SquareTesting,
    SupSignNorm,
    T0Norm,
    SquareNorm,
    EmbeddingNorm,
    ChainBound,
    CertAlphaSmall,
    CertAlphaLarge,
    CertEmbedding,
    CertSeven,
    CertNine,
    /// Shorthand for every analysis above.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    Conditions,
    Norms,
    Certificates,
}

impl AnalysisId {
    pub const EVERY: [AnalysisId; 22] = [
        AnalysisId::JointA2,
        AnalysisId::Cond12,
        AnalysisId::Cond13,
        AnalysisId::SawyerTsigma,
        AnalysisId::SawyerT0,
        AnalysisId::SigmaK,
        AnalysisId::Lemma33,
        AnalysisId::Bump,
        AnalysisId::Fkp,
        AnalysisId::Doubling,
        AnalysisId::EmbeddingTesting,
        AnalysisId::SquareTesting,
        AnalysisId::SupSignNorm,
        AnalysisId::T0Norm,
        AnalysisId::SquareNorm,
        AnalysisId::EmbeddingNorm,
        AnalysisId::ChainBound,
        AnalysisId::CertAlphaSmall,
        AnalysisId::CertAlphaLarge,
        AnalysisId::CertEmbedding,
        AnalysisId::CertSeven,
        AnalysisId::CertNine,
    ];

    pub fn group(self) -> Group {
        use AnalysisId::*;
        match self {
            SupSignNorm | T0Norm | SquareNorm | EmbeddingNorm | ChainBound => Group::Norms,
            CertAlphaSmall | CertAlphaLarge | CertEmbedding | CertSeven | CertNine => {
                Group::Certificates
            }
            _ => Group::Conditions,
        }
    }

    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default()
    }

    /// Whether the analysis draws random signs under a sampled or greedy mode.
    fn uses_sign_search(self) -> bool {
        matches!(self, AnalysisId::SawyerTsigma | AnalysisId::SupSignNorm)
    }
}

/// Expands `all`, removes duplicates and sorts into execution order.
pub fn normalize_analyses(ids: &[AnalysisId]) -> Vec<AnalysisId> {
    let mut out: Vec<AnalysisId> = ids
        .iter()
        .flat_map(|&id| {
            if id == AnalysisId::All {
                AnalysisId::EVERY.to_vec()
            } else {
                vec![id]
            }
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignSearch {
    #[default]
    Exhaustive,
    Sampled,
    Greedy,
}

/// Mode parameters: sign search, sampler sizes, seeds and the free
/// parameters of individual analyses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeConfig {
    pub sign_search: SignSearch,
    pub sign_samples: u64,
    pub greedy_restarts: u32,
    pub sign_seed: Option<u64>,
    pub certificate_samples: usize,
    pub certificate_seed: Option<u64>,
    pub shards: usize,
    pub alphas_small: Vec<f64>,
    pub alphas_large: Vec<f64>,
    pub c_dom: f64,
    pub q: f64,
    pub lemma33_exponent: f64,
    pub bump_eta: f64,
}

impl Default for ModeConfig {
    fn default() -> Self {
        ModeConfig {
            sign_search: SignSearch::Exhaustive,
            sign_samples: 1000,
            greedy_restarts: 8,
            sign_seed: None,
            certificate_samples: 100_000,
            certificate_seed: None,
            shards: 8,
            alphas_small: vec![0.1, 0.25, 0.4, 0.49],
            alphas_large: vec![0.6, 0.75, 1.0],
            c_dom: 1.0,
            q: 0.5,
            lemma33_exponent: 0.25,
            bump_eta: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Standard output when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Record wall time in the metadata; off by default so that reruns are
    /// byte-identical.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub depth: u32,
    pub weight_spec_v: WeightSpec,
    pub weight_spec_w: WeightSpec,
    pub analyses: Vec<AnalysisId>,
    #[serde(default)]
    pub mode: ModeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Structural checks. Analyses that exceed a size cap at this depth are
    /// not config errors; they become skip records.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            return bad(format!(
                "depth must lie in 1..={MAX_DEPTH}, got {}",
                self.depth
            ));
        }
        if self.analyses.is_empty() {
            return bad("no analyses requested".into());
        }
        self.weight_spec_v
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("weight_spec_v: {e}")))?;
        self.weight_spec_w
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("weight_spec_w: {e}")))?;
        let ids = normalize_analyses(&self.analyses);
        let m = &self.mode;
        if m.sign_search != SignSearch::Exhaustive
            && m.sign_seed.is_none()
            && ids.iter().any(|a| a.uses_sign_search())
        {
            return bad("mode.sign_seed is required for sampled or greedy sign search".into());
        }
        if ids.iter().any(|a| a.group() == Group::Certificates) {
            if m.certificate_seed.is_none() {
                return bad("mode.certificate_seed is required for certificates".into());
            }
            if m.certificate_samples == 0 || m.shards == 0 {
                return bad("mode.certificate_samples and mode.shards must be positive".into());
            }
        }
        if m.sign_search == SignSearch::Sampled && m.sign_samples == 0 {
            return bad("mode.sign_samples must be positive".into());
        }
        if m.sign_search == SignSearch::Greedy && m.greedy_restarts == 0 {
            return bad("mode.greedy_restarts must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
depth = 3
analyses = ["joint_a2", "cond_12"]
[weight_spec_v]
kind = "constant"
value = 1.0
[weight_spec_w]
kind = "explicit"
values = [1, 2, 3, 4, 5, 6, 7, 8]
"#;

    #[test]
    fn parses_minimal() {
        let cfg = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.depth, 3);
        assert_eq!(cfg.mode, ModeConfig::default());
        assert_eq!(cfg.output.format, Format::Json);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = MINIMAL.replace("depth = 3", "depth = 3\nspeed = 9");
        assert!(matches!(
            ScenarioConfig::from_toml(&text),
            Err(ConfigError::Parse(_))
        ));
        let text = MINIMAL.replace("value = 1.0", "value = 1.0\nextra = 2");
        assert!(ScenarioConfig::from_toml(&text).is_err());
        let text = format!("{MINIMAL}[mode]\nsign_serch = \"greedy\"\n");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn seeds_required_for_random_modes() {
        let text = MINIMAL.replace("\"cond_12\"]", "\"cert_nine\"]");
        assert!(matches!(
            ScenarioConfig::from_toml(&text),
            Err(ConfigError::Invalid(_))
        ));
        let ok = format!("{text}[mode]\ncertificate_seed = 4\n");
        assert!(ScenarioConfig::from_toml(&ok).is_ok());
        let text = MINIMAL.replace("\"cond_12\"]", "\"sup_sign_norm\"]");
        let greedy = format!("{text}[mode]\nsign_search = \"greedy\"\n");
        assert!(ScenarioConfig::from_toml(&greedy).is_err());
    }

    #[test]
    fn depth_range() {
        let text = MINIMAL.replace("depth = 3", "depth = 0");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn all_expands_in_order() {
        let ids = normalize_analyses(&[AnalysisId::CertNine, AnalysisId::All, AnalysisId::JointA2]);
        assert_eq!(ids, AnalysisId::EVERY.to_vec());
        assert_eq!(AnalysisId::Cond12.name(), "cond_12");
        assert_eq!(AnalysisId::CertAlphaSmall.group(), Group::Certificates);
    }
}
