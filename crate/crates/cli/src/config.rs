//! Run configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wallrom::pgd::{Interpolation, StoppingCriteria};
use wallrom::studies::{
    load_measurements, synthetic_fixture, FixtureSettings, LearningPeriod, MeasurementSet, ModelSettings,
    PracticalCaseConfig, RadiationConfig, TheoreticalCaseConfig,
};
use wallrom::BasisKind;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    #[default]
    Theoretical,
    Practical,
}

/// Where the practical measurements come from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// CSV with `time_s,T01_C,..,T04_C`; the synthetic fixture when absent.
    pub measurements: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    pub basis: BasisKind,
    pub n: usize,
    pub delta_zeta: f64,
    pub interpolation: Interpolation,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            basis: BasisKind::Chebyshev,
            n: 4,
            delta_zeta: 1e-4,
            interpolation: Interpolation::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// `chebyshev`, `legendre`, `pod` or `pod:<period>`.
    pub bases: Vec<String>,
    pub n: Vec<usize>,
    pub delta_zeta: Vec<f64>,
    /// Any of `epsilon`, `mu`, `nu`, `modes`.
    pub metrics: Vec<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            bases: vec!["chebyshev".into(), "legendre".into(), "pod".into()],
            n: vec![2, 3, 4, 5],
            delta_zeta: vec![1e-2, 1e-3, 1e-4, 1e-5],
            metrics: vec!["epsilon".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseKind,
    pub theoretical: TheoreticalCaseConfig,
    pub practical: PracticalCaseConfig,
    pub data: DataConfig,
    pub model: ModelSettings,
    pub criteria: StoppingCriteria,
    pub radiation: RadiationConfig,
    pub build: BuildConfig,
    pub sweep: SweepConfig,
}

impl RunConfig {
    /// Reads `path`; relative data paths are resolved against its folder.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(m) = &cfg.data.measurements {
            if m.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.data.measurements = Some(base.join(m));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.theoretical.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.criteria.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// SHA-256 of the effective configuration.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("configuration serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn measurements(&self) -> CliResult<MeasurementSet> {
        Ok(match &self.data.measurements {
            Some(path) => load_measurements(path, &self.practical)?,
            None => synthetic_fixture(&self.practical, &FixtureSettings::default())?,
        })
    }
}

/// One basis column of a sweep: a kind plus, for POD, its learning window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub period: Option<LearningPeriod>,
}

impl BasisSpec {
    pub fn label(&self) -> String {
        match self.period {
            Some(p) => format!("{}-{}", self.kind.name(), p.name()),
            None => self.kind.name().to_owned(),
        }
    }
}

impl std::str::FromStr for BasisSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (kind, period) = match s.split_once(':') {
            Some((k, p)) => (k, Some(p.parse::<LearningPeriod>()?)),
            None => (s, None),
        };
        let kind: BasisKind = kind.parse()?;
        if period.is_some() && kind != BasisKind::Pod {
            return Err(CliError::Config(format!("only POD bases take a learning period: '{s}'")));
        }
        Ok(Self { kind, period })
    }
}
