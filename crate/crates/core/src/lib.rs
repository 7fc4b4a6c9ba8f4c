//! Aligns spoken instructions with robot-guided motion.
//!
//! A variable admittance controller whose physical pace `p` reparameterizes
//! the virtual dynamics, an audio pace `a` that time-scales speech, and a
//! phrasing graph that picks a paraphrase whose length fits the remaining
//! motion. Both paces are driven toward the closed-form pair that makes the
//! two channels finish together, with the audio slowed further when the
//! user resists.

pub mod error;
pub mod motion;
pub mod pacing;
pub mod session;
pub mod speech;
pub mod trajectory;

/// Spatial vector. Trajectories with fewer than three dimensions keep the
/// unused components at zero.
pub type Vec3 = nalgebra::Vector3<f64>;

pub use error::{Error, Result};
pub use motion::{MotionConfig, MotionParams, MotionState};
pub use pacing::{ideal_paces, PacingParams, PacingState};
pub use session::{run_session, ControlScheme, SessionConfig, SessionLog, TickRecord, UserModel};
pub use speech::{PhrasingGraph, VertexIx};
pub use trajectory::{Interpolation, ProjectionResult, Trajectory};
