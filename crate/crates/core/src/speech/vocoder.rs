//! STFT phase vocoder: changes clip duration by `1 / pace` while keeping
//! pitch, by re-synthesizing frames at a scaled hop with phases advanced at
//! each bin's instantaneous frequency.

use std::f64::consts::{PI, TAU};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::audio::AudioClip;
use crate::error::{Error, Result};

pub const WINDOW: usize = 2048;
pub const HOP: usize = 512;

pub const MIN_PACE: f64 = 0.6;
pub const MAX_PACE: f64 = 1.4;

fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (TAU * i as f64 / n as f64).cos()).collect()
}

fn wrap_phase(x: f64) -> f64 {
    x - TAU * ((x + PI) / TAU).floor()
}

/// Time-scales `clip` so that it plays `pace` times faster; the output lasts
/// `duration / pace`.
pub fn time_scale(clip: &AudioClip, pace: f64) -> Result<AudioClip> {
    if !(pace > MIN_PACE && pace < MAX_PACE) {
        return Err(Error::OutOfRange(format!("audio pace {pace} outside ({MIN_PACE}, {MAX_PACE})")));
    }
    let input = clip.samples();
    let out_len = (input.len() as f64 / pace).round() as usize;
    if input.is_empty() {
        return AudioClip::new(Vec::new(), clip.sample_rate());
    }

    let n = WINDOW;
    let half = n / 2;
    let window = hann(n);
    let frames = input.len().div_ceil(HOP) + 1;

    // Frame m is centred on input sample m * HOP; the padding puts that
    // centre at padded index m * HOP + half.
    let mut padded = vec![0.0f64; frames * HOP + n];
    for (i, &s) in input.iter().enumerate() {
        padded[half + i] = s as f64;
    }
    let out_pos: Vec<usize> = (0..frames).map(|m| (m as f64 * HOP as f64 / pace).round() as usize).collect();
    let out_buf_len = out_pos.last().unwrap() + n;
    let mut output = vec![0.0f64; out_buf_len];
    let mut norm = vec![0.0f64; out_buf_len];

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    let bins = half + 1;
    let omega: Vec<f64> = (0..bins).map(|k| TAU * k as f64 / n as f64).collect();
    let mut prev_phase = vec![0.0f64; bins];
    let mut synth_phase = vec![0.0f64; bins];
    let mut buf = vec![Complex::new(0.0, 0.0); n];

    for m in 0..frames {
        let start = m * HOP;
        for (j, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(padded[start + j] * window[j], 0.0);
        }
        fft.process(&mut buf);

        let synth_hop = if m == 0 { 0.0 } else { (out_pos[m] - out_pos[m - 1]) as f64 };
        for k in 0..bins {
            let phase = buf[k].arg();
            if m == 0 {
                synth_phase[k] = phase;
            } else {
                let deviation = wrap_phase(phase - prev_phase[k] - omega[k] * HOP as f64);
                let inst_freq = omega[k] + deviation / HOP as f64;
                synth_phase[k] += inst_freq * synth_hop;
            }
            prev_phase[k] = phase;
        }
        for k in 0..bins {
            buf[k] = Complex::from_polar(buf[k].norm(), synth_phase[k]);
        }
        // Real-signal spectrum: mirror the upper half.
        for k in 1..half {
            buf[n - k] = buf[k].conj();
        }
        buf[0] = Complex::new(buf[0].re, 0.0);
        buf[half] = Complex::new(buf[half].re, 0.0);
        ifft.process(&mut buf);

        let offset = out_pos[m];
        for j in 0..n {
            output[offset + j] += buf[j].re / n as f64 * window[j];
            norm[offset + j] += window[j] * window[j];
        }
    }

    let samples: Vec<f32> = (0..out_len)
        .map(|i| {
            let idx = half + i;
            let w = norm[idx];
            if w > 1e-6 {
                (output[idx] / w) as f32
            } else {
                0.0
            }
        })
        .collect();
    AudioClip::new(samples, clip.sample_rate())
}
