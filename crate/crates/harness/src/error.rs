use hoch_core::characteristics::CharacteristicsError;
use hoch_core::dynamics::DynamicsError;
use hoch_core::weights::WeightError;
use hoch_core::SpectralError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("dynamics: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("characteristics: {0}")]
    Characteristics(#[from] CharacteristicsError),
    #[error("spectral: {0}")]
    Spectral(#[from] SpectralError),
    #[error("weights: {0}")]
    Weights(#[from] WeightError),
    #[error("orchestration: {0}")]
    Orchestration(String),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(vec![msg.into()])
    }

    /// 1 for configuration errors, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}
