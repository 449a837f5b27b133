//! Near-duplicate video detection from coupled temporal and perceptual shot
//! signatures.

pub mod baselines;
pub mod color;
pub mod error;
pub mod index;
pub mod ingest;
pub mod lattice;
pub mod matcher;
pub mod texture;

pub use color::{ColorConceptId, ColorSignature};
pub use error::{Error, Result};
pub use index::Config;
pub use matcher::{MatchConfig, MatchResult, ShotSignature, VideoSignature};
pub use texture::{TextureConceptId, TextureSignature, TrainedSvmModel};
