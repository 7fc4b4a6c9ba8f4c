use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ControlScheme;
use crate::error::{Error, Result};
use crate::speech::{SpokenPhrase, VertexIx};
use crate::Vec3;

/// State at the start of one tick together with the decisions applied
/// during that tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub t: f64,
    pub x: Vec3,
    pub x_dot: Vec3,
    pub v_ref: Vec3,
    pub f_ext: Vec3,
    /// Projection parameter of `x`.
    pub d: f64,
    pub p: f64,
    pub a: f64,
    pub c: f64,
    pub etc_x: f64,
    pub etc_a: f64,
    /// `etc_a - etc_x`.
    pub em: f64,
    pub vertex: VertexIx,
    pub playhead: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub motion_end_t: Option<f64>,
    pub audio_end_t: Option<f64>,
    /// Audio end minus motion end; positive when the motion finished first.
    pub actual_misalignment: Option<f64>,
    pub cap_hit: bool,
    pub phrase_path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub scheme: ControlScheme,
    pub dims: usize,
    pub vertex_ids: Vec<String>,
    pub records: Vec<TickRecord>,
    pub outcome: Outcome,
}

const AXES: [&str; 3] = ["x", "y", "z"];

/// Column order of [`SessionLog::write_csv`], for `dims` active axes.
pub fn csv_header(dims: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for prefix in ["x", "xdot", "vref", "fext"] {
        for axis in &AXES[..dims] {
            cols.push(format!("{prefix}_{axis}"));
        }
    }
    for c in ["d", "p", "a", "c", "etc_x", "etc_a", "em", "vertex", "playhead"] {
        cols.push(c.to_string());
    }
    cols
}

impl SessionLog {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(csv_header(self.dims)).map_err(csv_err)?;
        let mut row: Vec<String> = Vec::new();
        for r in &self.records {
            row.clear();
            row.push(r.t.to_string());
            for v in [&r.x, &r.x_dot, &r.v_ref, &r.f_ext] {
                for i in 0..self.dims {
                    row.push(v[i].to_string());
                }
            }
            for v in [r.d, r.p, r.a, r.c, r.etc_x, r.etc_a, r.em] {
                row.push(v.to_string());
            }
            row.push(self.vertex_ids[r.vertex].clone());
            row.push(r.playhead.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Spoken phrases in order with the mean audio pace over each, for
    /// rendering.
    pub fn spoken_phrases(&self) -> Vec<SpokenPhrase> {
        let mut phrases: Vec<SpokenPhrase> = Vec::new();
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut current: Option<VertexIx> = None;
        for r in &self.records {
            if current != Some(r.vertex) {
                if let Some(v) = current {
                    phrases.push(SpokenPhrase { vertex: v, pace: sum / n as f64 });
                }
                current = Some(r.vertex);
                sum = 0.0;
                n = 0;
            }
            sum += r.a;
            n += 1;
        }
        if let Some(v) = current {
            phrases.push(SpokenPhrase { vertex: v, pace: sum / n as f64 });
        }
        phrases
    }
}
