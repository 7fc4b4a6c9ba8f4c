use super::graph::{select_next_vertex, PhrasingGraph, VertexIx};

/// Crossing tolerance on the playhead.
const PLAYHEAD_EPS: f64 = 1e-9;

/// How the next phrase is chosen when the current one finishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathPolicy {
    /// Always follow the authored natural path.
    Natural,
    /// Pick the successor whose remaining speech duration best matches the
    /// motion time-to-completion.
    Adaptive,
}

impl PathPolicy {
    pub fn next(self, graph: &PhrasingGraph, current: VertexIx, etc_motion: f64) -> Option<VertexIx> {
        match self {
            PathPolicy::Natural => graph.natural_next(current),
            PathPolicy::Adaptive => select_next_vertex(graph, current, etc_motion),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeechState {
    pub current: VertexIx,
    /// Seconds of the current clip consumed, measured at base pace.
    pub playhead_s: f64,
    pub finished: bool,
    pub committed_path: Vec<VertexIx>,
}

impl SpeechState {
    pub fn new(graph: &PhrasingGraph) -> Self {
        SpeechState {
            current: graph.start(),
            playhead_s: 0.0,
            finished: false,
            committed_path: vec![graph.start()],
        }
    }
}

/// What happened during one playhead advance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdvanceOutcome {
    /// Vertices entered during this step, in order.
    pub entered: Vec<VertexIx>,
    /// Wall time between the end of speech and the end of the step, set when
    /// the final clip completed during this step.
    pub finished_early_by: Option<f64>,
}

/// Consumes `pace * dt` seconds of audio. Time left over when a clip ends
/// carries into the next one, so the timeline has no gaps.
pub fn advance_playhead(
    graph: &PhrasingGraph,
    state: &mut SpeechState,
    policy: PathPolicy,
    pace: f64,
    dt: f64,
    etc_motion: f64,
) -> AdvanceOutcome {
    let mut outcome = AdvanceOutcome::default();
    if state.finished {
        return outcome;
    }
    state.playhead_s += pace * dt;
    loop {
        let duration = graph.vertex(state.current).duration_s;
        if state.playhead_s + PLAYHEAD_EPS < duration {
            break;
        }
        let excess = (state.playhead_s - duration).max(0.0);
        match policy.next(graph, state.current, etc_motion) {
            Some(next) => {
                state.current = next;
                state.playhead_s = excess;
                state.committed_path.push(next);
                outcome.entered.push(next);
            }
            None => {
                state.playhead_s = duration;
                state.finished = true;
                outcome.finished_early_by = Some(excess / pace);
                break;
            }
        }
    }
    outcome
}

/// Remaining speech time at base pace: what is left of the current clip plus
/// the durations along the path the policy would choose from here.
///
/// Each hop is decided with the motion estimate that will remain when that
/// hop is reached, `etc_motion` minus the speech queued before it, which is
/// what the live selection sees if both channels keep their base pace.
pub fn estimate_audio_etc(graph: &PhrasingGraph, state: &SpeechState, policy: PathPolicy, etc_motion: f64) -> f64 {
    if state.finished {
        return 0.0;
    }
    let mut total = (graph.vertex(state.current).duration_s - state.playhead_s).max(0.0);
    let mut v = state.current;
    while let Some(next) = policy.next(graph, v, etc_motion - total) {
        total += graph.vertex(next).duration_s;
        v = next;
    }
    total
}
