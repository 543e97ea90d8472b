//! Run configuration: TOML file, command-line overrides, built-in
//! defaults — in that precedence order (flags win).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use grasp_core::engine::{StrategyId, Tau};
use grasp_core::provider::{HttpConfig, Pricing};
use grasp_core::rational::Rational;

use crate::error::CliError;

/// Defaults: 25 samples per scenario, threshold 3, k ∈ {1, 5, 10, 15, 25}.
pub const DEFAULT_SAMPLES: u32 = 25;
pub const DEFAULT_TAU: u8 = 3;
pub const DEFAULT_KS: [u32; 5] = [1, 5, 10, 15, 25];

/// A pricing rate in the config file: a decimal string keeps the value
/// exact; a bare TOML float is converted through its shortest decimal
/// form.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RateRepr {
    Text(String),
    Number(f64),
}

impl RateRepr {
    fn to_rational(&self) -> Result<Rational, CliError> {
        match self {
            RateRepr::Text(s) => Rational::parse_decimal(s),
            RateRepr::Number(f) => Rational::from_f64_literal(*f),
        }
        .map_err(|e| CliError::domain(format!("bad pricing rate: {e}")))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSection {
    pub input_rate: Option<RateRepr>,
    pub output_rate: Option<RateRepr>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub api_key_env: Option<String>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderSection {
    /// "replay", "live", or "record".
    pub kind: Option<String>,
    /// Transcript file for replay.
    pub fixtures: Option<String>,
    /// Transcript file the recording wrapper appends to.
    pub record_to: Option<String>,
    /// Replay misses fall back to this reply instead of erroring.
    pub fallback_reply: Option<String>,
}

/// The config file shape. Everything is optional; flags fill the rest.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub graph: Option<String>,
    pub manifest: Option<String>,
    pub strategy: Option<String>,
    pub tau: Option<u8>,
    pub samples_per_scenario: Option<u32>,
    pub ks: Option<Vec<u32>>,
    pub workers: Option<usize>,
    pub output_dir: Option<String>,
    pub model_id: Option<String>,
    pub templates_dir: Option<String>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub pricing: PricingSection,
    #[serde(default)]
    pub provider: ProviderSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::environment(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::domain(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub graph_path: Option<PathBuf>,
    pub manifest_path: Option<PathBuf>,
    pub strategy: StrategyId,
    pub tau: Tau,
    pub samples_per_scenario: u32,
    pub ks: Vec<u32>,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub model_id: String,
    pub templates_dir: Option<PathBuf>,
    pub http: HttpConfig,
    pub pricing: Pricing,
    pub provider_kind: String,
    pub fixtures: Option<PathBuf>,
    pub record_to: Option<PathBuf>,
    pub fallback_reply: Option<String>,
}

/// Flag-level overrides collected by the subcommands.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub graph: Option<String>,
    pub manifest: Option<String>,
    pub strategy: Option<String>,
    pub tau: Option<u8>,
    pub samples: Option<u32>,
    pub ks: Option<Vec<u32>>,
    pub workers: Option<usize>,
    pub output_dir: Option<String>,
    pub model_id: Option<String>,
    pub provider_kind: Option<String>,
    pub fixtures: Option<String>,
    pub record_to: Option<String>,
    pub fallback_reply: Option<String>,
}

pub fn resolve(file: FileConfig, flags: Overrides) -> Result<RunConfig, CliError> {
    let strategy_name = flags.strategy.or(file.strategy).unwrap_or_else(|| "grasp".to_string());
    let strategy: StrategyId =
        strategy_name.parse().map_err(|e| CliError::domain(format!("{e}")))?;

    let tau_value = flags.tau.or(file.tau).unwrap_or(DEFAULT_TAU);
    let tau = Tau::new(tau_value).map_err(|e| CliError::domain(e.to_string()))?;

    let samples = flags.samples.or(file.samples_per_scenario).unwrap_or(DEFAULT_SAMPLES);
    if samples < 1 {
        return Err(CliError::domain("samples_per_scenario must be at least 1"));
    }

    // Explicit ks must fit inside the sample count; the built-in list
    // just clamps to it.
    let explicit_ks = flags.ks.or(file.ks).filter(|ks| !ks.is_empty());
    let mut ks = match explicit_ks {
        Some(ks) => {
            if let Some(&too_big) = ks.iter().find(|&&k| k > samples) {
                return Err(CliError::domain(format!(
                    "k={too_big} exceeds samples_per_scenario={samples}"
                )));
            }
            if ks.contains(&0) {
                return Err(CliError::domain("k values must be at least 1"));
            }
            ks
        }
        None => DEFAULT_KS.iter().copied().filter(|&k| k <= samples).collect(),
    };
    if ks.is_empty() {
        ks = vec![1];
    }
    ks.sort_unstable();
    ks.dedup();

    let workers = flags.workers.or(file.workers).unwrap_or(1).max(1);

    let defaults = HttpConfig::default();
    let http = HttpConfig {
        base_url: file.model.base_url.unwrap_or(defaults.base_url),
        model: file.model.model.unwrap_or(defaults.model),
        temperature: file.model.temperature,
        api_key_env: file.model.api_key_env.unwrap_or(defaults.api_key_env),
        timeout_secs: file.model.timeout_secs.unwrap_or(defaults.timeout_secs),
    };

    // GPT-4o-mini list prices per million tokens as the default.
    let input_rate = match file.pricing.input_rate {
        Some(rate) => rate.to_rational()?,
        None => Rational::parse_decimal("0.150").expect("literal parses"),
    };
    let output_rate = match file.pricing.output_rate {
        Some(rate) => rate.to_rational()?,
        None => Rational::parse_decimal("0.600").expect("literal parses"),
    };

    Ok(RunConfig {
        graph_path: flags.graph.or(file.graph).map(PathBuf::from),
        manifest_path: flags.manifest.or(file.manifest).map(PathBuf::from),
        strategy,
        tau,
        samples_per_scenario: samples,
        ks,
        workers,
        output_dir: PathBuf::from(
            flags.output_dir.or(file.output_dir).unwrap_or_else(|| "out".to_string()),
        ),
        model_id: flags.model_id.or(file.model_id).unwrap_or_else(|| "unspecified".to_string()),
        templates_dir: file.templates_dir.map(PathBuf::from),
        http,
        pricing: Pricing { input_rate, output_rate },
        provider_kind: flags
            .provider_kind
            .or(file.provider.kind)
            .unwrap_or_else(|| "replay".to_string()),
        fixtures: flags.fixtures.or(file.provider.fixtures).map(PathBuf::from),
        record_to: flags.record_to.or(file.provider.record_to).map(PathBuf::from),
        fallback_reply: flags.fallback_reply.or(file.provider.fallback_reply),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_apply_without_config() {
        let config = resolve(FileConfig::default(), Overrides::default()).unwrap();
        assert_eq!(config.samples_per_scenario, 25);
        assert_eq!(config.tau.get(), 3);
        assert_eq!(config.ks, vec![1, 5, 10, 15, 25]);
        assert_eq!(config.strategy, StrategyId::Grasp);
        assert_eq!(config.workers, 1);
    }

    #[test]
    fn flags_beat_config_file() {
        let file: FileConfig =
            toml::from_str("tau = 2\nsamples_per_scenario = 10\nks = [1, 5]").unwrap();
        let flags = Overrides { tau: Some(4), ..Overrides::default() };
        let config = resolve(file, flags).unwrap();
        assert_eq!(config.tau.get(), 4);
        assert_eq!(config.samples_per_scenario, 10);
        assert_eq!(config.ks, vec![1, 5]);
    }

    #[test]
    fn ks_must_fit_inside_samples() {
        let flags = Overrides { samples: Some(10), ks: Some(vec![1, 25]), ..Overrides::default() };
        let err = resolve(FileConfig::default(), flags).unwrap_err();
        assert!(err.to_string().contains("k=25"));
    }

    #[test]
    fn default_ks_clamp_to_the_sample_count() {
        let flags = Overrides { samples: Some(5), ..Overrides::default() };
        let config = resolve(FileConfig::default(), flags).unwrap();
        assert_eq!(config.ks, vec![1, 5]);
    }

    #[test]
    fn bad_strategy_and_tau_are_domain_errors() {
        let flags = Overrides { strategy: Some("magic".into()), ..Overrides::default() };
        assert!(resolve(FileConfig::default(), flags).is_err());
        let flags = Overrides { tau: Some(9), ..Overrides::default() };
        assert!(resolve(FileConfig::default(), flags).is_err());
    }

    #[test]
    fn pricing_accepts_strings_and_floats() {
        let file: FileConfig =
            toml::from_str("[pricing]\ninput_rate = \"0.150\"\noutput_rate = 0.6").unwrap();
        let config = resolve(file, Overrides::default()).unwrap();
        assert_eq!(config.pricing.input_rate, Rational::new(3, 20));
        assert_eq!(config.pricing.output_rate, Rational::new(3, 5));
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        let parsed: Result<FileConfig, _> = toml::from_str("taus = 3");
        assert!(parsed.is_err());
    }
}
