use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ControlScheme;
use super::log::SessionLog;

/// Order statistics of a sample. Quantiles use linear interpolation between
/// order statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub min: f64,
    pub q10: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
    pub mean: f64,
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Stats {
    /// Returns zeroed stats with `n = 0` for an empty sample.
    pub fn of(values: &[f64]) -> Stats {
        if values.is_empty() {
            return Stats::default();
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Stats {
            n: sorted.len(),
            min: sorted[0],
            q10: quantile_sorted(&sorted, 0.10),
            q25: quantile_sorted(&sorted, 0.25),
            median: quantile_sorted(&sorted, 0.5),
            q75: quantile_sorted(&sorted, 0.75),
            q90: quantile_sorted(&sorted, 0.90),
            max: sorted[sorted.len() - 1],
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        }
    }
}

/// Two-sample Kolmogorov-Smirnov statistic, `sup |F_a - F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        let fa = i as f64 / a.len() as f64;
        let fb = j as f64 / b.len() as f64;
        best = best.max((fa - fb).abs());
    }
    best
}

/// Per-tick samples pooled from the logs of one scheme.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemeSamples {
    /// Signed actual misalignment per session that observed both endpoints.
    pub am: Vec<f64>,
    /// `|EM|` while both channels are still running.
    pub abs_em: Vec<f64>,
    /// Audio pace while speech is playing.
    pub a: Vec<f64>,
    /// Physical pace while the motion is running.
    pub p: Vec<f64>,
    /// Cooperation while the motion is running.
    pub c: Vec<f64>,
    pub sessions: usize,
    pub cap_hits: usize,
}

impl SchemeSamples {
    pub fn add(&mut self, log: &SessionLog) {
        self.sessions += 1;
        if log.outcome.cap_hit {
            self.cap_hits += 1;
        }
        if let Some(am) = log.outcome.actual_misalignment {
            self.am.push(am);
        }
        let motion_end = log.outcome.motion_end_t.unwrap_or(f64::INFINITY);
        let audio_end = log.outcome.audio_end_t.unwrap_or(f64::INFINITY);
        for r in &log.records {
            let moving = r.t < motion_end;
            let speaking = r.t < audio_end;
            if moving && speaking {
                self.abs_em.push(r.em.abs());
            }
            if speaking {
                self.a.push(r.a);
            }
            if moving {
                self.p.push(r.p);
                self.c.push(r.c);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: ControlScheme,
    pub sessions: usize,
    pub cap_hits: usize,
    pub am: Stats,
    pub abs_am: Stats,
    pub abs_em: Stats,
    pub a: Stats,
    pub p: Stats,
    pub c: Stats,
    /// Fraction of speaking time with `|a - 1| < 0.05`.
    pub frac_a_near_1: f64,
}

impl SchemeSummary {
    pub fn from_samples(scheme: ControlScheme, s: &SchemeSamples) -> Self {
        let abs_am: Vec<f64> = s.am.iter().map(|v| v.abs()).collect();
        let near = s.a.iter().filter(|a| (*a - 1.0).abs() < 0.05).count();
        SchemeSummary {
            scheme,
            sessions: s.sessions,
            cap_hits: s.cap_hits,
            am: Stats::of(&s.am),
            abs_am: Stats::of(&abs_am),
            abs_em: Stats::of(&s.abs_em),
            a: Stats::of(&s.a),
            p: Stats::of(&s.p),
            c: Stats::of(&s.c),
            frac_a_near_1: if s.a.is_empty() { 0.0 } else { near as f64 / s.a.len() as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schemes: Vec<SchemeSummary>,
    /// Largest pairwise KS distance between the schemes' cooperation samples.
    pub cooperation_ks_max: f64,
}

impl Summary {
    pub fn scheme(&self, scheme: ControlScheme) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }
}

/// Pools logs by scheme into distribution statistics.
pub fn compute_summary<'a, I>(logs: I) -> Summary
where
    I: IntoIterator<Item = &'a SessionLog>,
{
    let mut samples: BTreeMap<ControlScheme, SchemeSamples> = BTreeMap::new();
    for log in logs {
        samples.entry(log.scheme).or_default().add(log);
    }
    let mut ks: f64 = 0.0;
    let keys: Vec<_> = samples.keys().copied().collect();
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i + 1..] {
            ks = ks.max(ks_distance(&samples[a].c, &samples[b].c));
        }
    }
    Summary {
        schemes: samples.iter().map(|(k, s)| SchemeSummary::from_samples(*k, s)).collect(),
        cooperation_ks_max: ks,
    }
}
