//! Ground-truth clusters, constrained triplets and Latin-square sessions.

pub mod cluster;
pub mod session;
pub mod triplet;

pub use cluster::{assign_clusters, pools, Cell, ClusteredStimulus, LabelManifest, SourceType};
pub use session::{balanced_conditions, build_session, build_session_over, latin_row, Session, Trial};
pub use triplet::{make_triplet, randomize_placement, Condition, InGroup, Placement, Triplet};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("real stimulus {0} has no cluster label in the manifest")]
    MissingLabel(String),
    #[error("pool for {0} cannot supply the requested condition")]
    PoolInsufficient(String),
    #[error("pool for {0} mixes condition cells")]
    MixedCell(String),
    #[error("catalog cannot fill cell {0}")]
    CoverageGap(String),
    #[error("invalid triplet {0}")]
    InvalidTriplet(String),
    #[error("invalid session {0}")]
    InvalidSession(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
