//! The verbal half: phrasing graphs, the pace-driven playback timeline, audio
//! time-to-completion and phase-vocoder time scaling.
//!
//! Simulation only needs phrase durations, so sessions run in timeline-only
//! mode. PCM is touched when a spoken path is rendered to a WAV file.

mod audio;
mod graph;
mod timeline;
mod vocoder;

pub use audio::{AudioClip, WavFormat, SUPPORTED_RATES};
pub use graph::{precompute_bounds, select_next_vertex, Bounds, GraphFile, PhrasingGraph, Vertex, VertexFile, VertexIx};
pub use timeline::{advance_playhead, estimate_audio_etc, AdvanceOutcome, PathPolicy, SpeechState};
pub use vocoder::{time_scale, HOP, WINDOW};

use crate::error::Result;

/// One spoken phrase and the mean audio pace it was played at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpokenPhrase {
    pub vertex: VertexIx,
    pub pace: f64,
}

/// Renders a spoken path to PCM. Phrases without a readable audio file are
/// replaced by a tone of the same duration; every phrase is time-scaled by
/// its pace.
pub fn render_speech(graph: &PhrasingGraph, phrases: &[SpokenPhrase], sample_rate: u32) -> Result<AudioClip> {
    let mut clips = Vec::with_capacity(phrases.len());
    for (i, phrase) in phrases.iter().enumerate() {
        let vertex = graph.vertex(phrase.vertex);
        let clip = vertex
            .audio
            .as_deref()
            .and_then(|p| AudioClip::read_wav(p).ok())
            .filter(|c| c.sample_rate() == sample_rate);
        let clip = match clip {
            Some(c) => c,
            // Alternate pitches so phrase boundaries stay audible.
            None => AudioClip::tone(if i % 2 == 0 { 220.0 } else { 277.2 }, vertex.duration_s, 0.3, sample_rate)?,
        };
        let pace = phrase.pace.clamp(0.6 + 1e-6, 1.4 - 1e-6);
        clips.push(time_scale(&clip, pace)?);
    }
    if clips.is_empty() {
        return AudioClip::new(Vec::new(), sample_rate);
    }
    AudioClip::concat(&clips)
}
