//! Output artifacts and the run manifest embedded in every one of them.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use epifit::{
    EffectNetwork, EvaluationMetrics, FitMethod, IntegratorConfig, ModelVariant, RateParameters,
    TrainingConfig,
};

/// Everything needed to re-execute a run, embedded verbatim in each output
/// file so any artifact alone identifies how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub data: String,
    pub region_config: String,
    pub variant: ModelVariant,
    pub method: FitMethod,
    /// Integrator used for inference (metrics, forecasts, exports).
    /// Gradient training always integrates with Euler at the training
    /// config's substep count.
    pub integrator: IntegratorConfig,
    pub training: TrainingConfig,
    pub test_days: usize,
    pub out: String,
}

/// The `fit.json` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub manifest: RunManifest,
    pub variant: ModelVariant,
    pub method: FitMethod,
    pub params: RateParameters,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub network: Option<EffectNetwork>,
    /// Loss of the returned parameters on the training window.
    pub final_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diverged_at: Option<u32>,
    /// Holdout metrics; absent when `test_days` is zero or the fit diverged.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<EvaluationMetrics>,
    pub wall_time_secs: f64,
}

/// The `evaluation.json` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationArtifact {
    /// Manifest of the fit being evaluated.
    pub manifest: RunManifest,
    pub fit: String,
    pub metrics: EvaluationMetrics,
}

/// Serializes a manifest to a single compact line for CSV headers.
pub fn manifest_line(manifest: &RunManifest) -> String {
    let json = serde_json::to_string(manifest).expect("manifest serializes");
    format!("# manifest: {json}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body)
}

pub fn read_fit_artifact(path: &Path) -> anyhow::Result<FitArtifact> {
    let body = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read fit artifact {}: {e}", path.display()))?;
    let artifact: FitArtifact = serde_json::from_str(&body)
        .map_err(|e| anyhow::anyhow!("malformed fit artifact {}: {e}", path.display()))?;
    Ok(artifact)
}
