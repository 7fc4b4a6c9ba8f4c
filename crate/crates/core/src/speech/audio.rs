use std::f64::consts::TAU;
use std::path::Path;

use crate::error::{Error, Result};

pub const SUPPORTED_RATES: [u32; 4] = [16_000, 22_050, 44_100, 48_000];

/// Mono PCM clip with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if !SUPPORTED_RATES.contains(&sample_rate) {
            return Err(Error::Audio(format!("unsupported sample rate {sample_rate} Hz")));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Audio("clip contains non-finite samples".into()));
        }
        Ok(AudioClip { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.samples.iter().map(|&s| (s as f64) * (s as f64)).sum();
        (sum / self.samples.len() as f64).sqrt()
    }

    /// Sine tone, used as a stand-in for phrases without recorded audio.
    pub fn tone(freq_hz: f64, duration_s: f64, amplitude: f64, sample_rate: u32) -> Result<Self> {
        let n = (duration_s * sample_rate as f64).round() as usize;
        let samples = (0..n)
            .map(|i| (amplitude * (TAU * freq_hz * i as f64 / sample_rate as f64).sin()) as f32)
            .collect();
        AudioClip::new(samples, sample_rate)
    }

    pub fn concat(clips: &[AudioClip]) -> Result<Self> {
        let Some(first) = clips.first() else {
            return Err(Error::Audio("nothing to concatenate".into()));
        };
        if clips.iter().any(|c| c.sample_rate != first.sample_rate) {
            return Err(Error::Audio("cannot concatenate clips with different sample rates".into()));
        }
        let samples = clips.iter().flat_map(|c| c.samples.iter().copied()).collect();
        AudioClip::new(samples, first.sample_rate)
    }

    /// Reads 16-bit integer or 32-bit float WAV; multichannel input is
    /// downmixed to mono.
    pub fn read_wav(path: &Path) -> Result<Self> {
        let mut reader = hound::WavReader::open(path).map_err(|e| Error::Asset {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let spec = reader.spec();
        let wav_err = |e: hound::Error| Error::Asset { path: path.to_path_buf(), message: e.to_string() };
        let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
            (hound::SampleFormat::Int, 16) => reader
                .samples::<i16>()
                .map(|s| s.map(|v| v as f32 / 32768.0))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err)?,
            (hound::SampleFormat::Float, 32) => {
                reader.samples::<f32>().collect::<std::result::Result<_, _>>().map_err(wav_err)?
            }
            (fmt, bits) => {
                return Err(Error::Asset {
                    path: path.to_path_buf(),
                    message: format!("unsupported WAV encoding {fmt:?} {bits}-bit"),
                })
            }
        };
        let channels = spec.channels.max(1) as usize;
        let samples = interleaved
            .chunks(channels)
            .map(|frame| frame.iter().sum::<f32>() / channels as f32)
            .collect();
        AudioClip::new(samples, spec.sample_rate)
    }

    pub fn write_wav(&self, path: &Path, format: WavFormat) -> Result<()> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: match format {
                WavFormat::Pcm16 => 16,
                WavFormat::Float32 => 32,
            },
            sample_format: match format {
                WavFormat::Pcm16 => hound::SampleFormat::Int,
                WavFormat::Float32 => hound::SampleFormat::Float,
            },
        };
        let to_err = |e: hound::Error| Error::Audio(format!("{}: {e}", path.display()));
        let mut writer = hound::WavWriter::create(path, spec).map_err(to_err)?;
        for &s in &self.samples {
            match format {
                WavFormat::Pcm16 => writer
                    .write_sample((s.clamp(-1.0, 1.0) * 32767.0).round() as i16)
                    .map_err(to_err)?,
                WavFormat::Float32 => writer.write_sample(s).map_err(to_err)?,
            }
        }
        writer.finalize().map_err(to_err)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavFormat {
    Pcm16,
    Float32,
}
