//! One complete run: the 500 Hz loop wiring motion, pacing and speech
//! together, the simulated and live users, logging and summary metrics.

mod config;
mod live;
mod log;
mod runner;
mod summary;
mod user;

pub use config::{apply_override, ControlScheme, SessionConfig};
pub use live::{ControlMsg, ControlTrace, LiveInput, LiveUser, TraceEntry};
pub use log::{csv_header, Outcome, SessionLog, TickRecord};
pub use runner::{run_config, run_session, ClampFlags, Session, SessionParams};
pub use summary::{compute_summary, ks_distance, SchemeSamples, SchemeSummary, Stats, Summary};
pub use user::{user_force, ForceSource, ProfileSpec, Push, ResistanceProfile, Segment, UserConfig, UserKind, UserModel};
