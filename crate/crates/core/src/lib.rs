//! Scene representations and evaluation tooling for trajectory prediction.
//!
//! The crate turns traffic scenes into two model inputs, an agent-centric
//! raster image ([`raster`]) and a structured text prompt ([`prompting`])
//! whose lanes are compressed into cubic Bézier curves ([`bezier`]). It also
//! builds ε-cover candidate trajectory sets ([`coverset`]), runs kinematic
//! baselines ([`predictors`]) and scores predictions with minADE / minFDE /
//! miss-rate ([`metrics`]).
//!
//! All coordinates handed between modules live in the *agent frame*: the
//! target agent sits at the origin and faces +y, with +x to its right.

pub mod bezier;
pub mod coverset;
pub mod error;
pub mod metrics;
pub mod predictors;
pub mod prompting;
pub mod raster;
pub mod scene;
pub mod synthetic;
pub mod tokenizer;

pub use error::{Error, Result};
pub use scene::{AgentState, Lane, LaneRole, MapLayers, Point2, Pose, PredictionInstance, Trajectory};
