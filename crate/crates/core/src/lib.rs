//! Agent-based models of Web navigation (PageRank walkers, BookRank and
//! ABC), logical-session reconstruction from request logs, and the traffic
//! statistics used to compare the two.

pub mod agents;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod run;
pub mod session;

pub use agents::{AgentState, BookmarkList, Model, ModelParams, StepOutcome};
pub use error::{Error, Result};
pub use graph::{GrowthParams, NodeId, WebGraph};
pub use session::{SessionDescriptor, SessionTree, TrafficTally, UserId};
