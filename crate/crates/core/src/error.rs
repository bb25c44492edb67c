use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("rate is undefined over an empty dataset")]
    UndefinedRate,

    #[error("instance {instance_id}: {message}")]
    Schema { instance_id: String, message: String },

    #[error("{0}")]
    Reconciliation(#[from] ReconciliationError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    /// Attaches an instance id, turning the error into a schema error.
    pub fn for_instance(self, instance_id: &str) -> Self {
        match self {
            Error::Schema { .. } => self,
            other => Error::Schema { instance_id: instance_id.to_string(), message: other.to_string() },
        }
    }
}

/// Prediction records and split instances that could not be paired up.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReconciliationError {
    /// Labeled split instances with no prediction record.
    pub missing_predictions: Vec<String>,
    /// Prediction records naming an id absent from the split.
    pub unknown_instances: Vec<String>,
    /// Instances that have a prediction but no ground truth.
    pub missing_ground_truth: Vec<String>,
}

impl ReconciliationError {
    pub fn is_empty(&self) -> bool {
        self.missing_predictions.is_empty() && self.unknown_instances.is_empty() && self.missing_ground_truth.is_empty()
    }
}

impl std::fmt::Display for ReconciliationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "predictions do not match the split")?;
        if !self.missing_predictions.is_empty() {
            write!(f, "; missing predictions for: {}", self.missing_predictions.join(", "))?;
        }
        if !self.unknown_instances.is_empty() {
            write!(f, "; unknown instance ids: {}", self.unknown_instances.join(", "))?;
        }
        if !self.missing_ground_truth.is_empty() {
            write!(f, "; no ground truth for: {}", self.missing_ground_truth.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ReconciliationError {}
