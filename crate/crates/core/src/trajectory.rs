//! Directed reference curves `[0, 1] -> R^N` and the geometric queries the
//! guide and propell forces are built on.
//!
//! Points are stored as [`Vec3`] regardless of the configured dimension;
//! unused trailing components are zero and stay zero, since every force the
//! controller produces is a combination of vectors lying in the same
//! subspace.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// Number of uniform parameter intervals used for coarse sampling.
pub const COARSE_SAMPLES: usize = 1024;

const GOLDEN_ITERATIONS: usize = 80;
const TRACKING_WINDOW: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Linear,
    Cubic,
}

/// On-disk trajectory description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub dims: usize,
    pub interpolation: Interpolation,
    pub points: Vec<Vec<f64>>,
}

/// Closest point on a trajectory together with the local direction of travel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResult {
    pub d: f64,
    pub point: Vec3,
    /// Unit forward tangent at `d`; the left limit at `d = 1`.
    pub tangent: Vec3,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    dims: usize,
    interpolation: Interpolation,
    points: Vec<Vec3>,
    /// Parameter value of each control point (normalized chord length).
    knots: Vec<f64>,
    /// Second derivatives of the natural cubic spline at each knot.
    second_derivs: Vec<Vec3>,
    /// Curve evaluated at `i / COARSE_SAMPLES`.
    samples: Vec<Vec3>,
    /// Cumulative arc length at each coarse sample, meters.
    arc_length: Vec<f64>,
}

impl Trajectory {
    pub fn new(dims: usize, interpolation: Interpolation, points: Vec<Vec<f64>>) -> Result<Self> {
        if !(1..=3).contains(&dims) {
            return Err(Error::InvalidTrajectory(format!(
                "dims must be 1, 2 or 3 (got {dims})"
            )));
        }
        let mut pts: Vec<Vec3> = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dims {
                return Err(Error::InvalidTrajectory(format!(
                    "point {i} has {} coordinates, expected {dims}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTrajectory(format!("point {i} is not finite")));
            }
            let mut v = Vec3::zeros();
            for (k, c) in p.iter().enumerate() {
                v[k] = *c;
            }
            // Repeated consecutive points carry no geometry.
            if pts.last().is_some_and(|last| (last - v).norm() == 0.0) {
                continue;
            }
            pts.push(v);
        }
        if pts.len() < 2 {
            return Err(Error::InvalidTrajectory(
                "trajectory needs at least 2 distinct control points".into(),
            ));
        }

        let mut knots = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        knots.push(0.0);
        for w in pts.windows(2) {
            acc += (w[1] - w[0]).norm();
            knots.push(acc);
        }
        for k in knots.iter_mut() {
            *k /= acc;
        }
        *knots.last_mut().unwrap() = 1.0;

        let second_derivs = match interpolation {
            Interpolation::Linear => Vec::new(),
            Interpolation::Cubic => natural_spline_second_derivs(&pts, &knots),
        };

        let mut traj = Trajectory {
            dims,
            interpolation,
            points: pts,
            knots,
            second_derivs,
            samples: Vec::new(),
            arc_length: Vec::new(),
        };
        let samples: Vec<Vec3> = (0..=COARSE_SAMPLES)
            .map(|i| traj.eval(i as f64 / COARSE_SAMPLES as f64))
            .collect();
        let mut arc_length = Vec::with_capacity(samples.len());
        let mut acc = 0.0;
        arc_length.push(0.0);
        for w in samples.windows(2) {
            acc += (w[1] - w[0]).norm();
            arc_length.push(acc);
        }
        traj.samples = samples;
        traj.arc_length = arc_length;
        Ok(traj)
    }

    pub fn from_file_data(file: TrajectoryFile) -> Result<Self> {
        Self::new(file.dims, file.interpolation, file.points)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::asset_io(path, e))?;
        let file: TrajectoryFile = serde_json::from_str(&text).map_err(|e| Error::Asset {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_file_data(file).map_err(|e| Error::Asset {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_file_data(&self) -> TrajectoryFile {
        TrajectoryFile {
            dims: self.dims,
            interpolation: self.interpolation,
            points: self
                .points
                .iter()
                .map(|p| p.iter().take(self.dims).copied().collect())
                .collect(),
        }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn control_points(&self) -> &[Vec3] {
        &self.points
    }

    /// Parameter value of each control point.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Cumulative arc length sampled at `i / COARSE_SAMPLES`.
    pub fn arc_length_table(&self) -> &[f64] {
        &self.arc_length
    }

    pub fn length(&self) -> f64 {
        *self.arc_length.last().unwrap()
    }

    pub fn start(&self) -> Vec3 {
        self.points[0]
    }

    pub fn end(&self) -> Vec3 {
        *self.points.last().unwrap()
    }

    /// Evaluates the curve at `d`, rejecting parameters outside `[0, 1]`.
    pub fn point_at(&self, d: f64) -> Result<Vec3> {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::OutOfRange(format!("trajectory parameter {d} outside [0, 1]")));
        }
        Ok(self.eval(d))
    }

    fn segment_index(&self, d: f64) -> usize {
        // Last knot <= d, so interior knots select the downstream segment.
        let n = self.points.len();
        match self.knots.binary_search_by(|k| k.partial_cmp(&d).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn eval(&self, d: f64) -> Vec3 {
        let d = d.clamp(0.0, 1.0);
        let i = self.segment_index(d);
        let (k0, k1) = (self.knots[i], self.knots[i + 1]);
        let h = k1 - k0;
        let (p0, p1) = (self.points[i], self.points[i + 1]);
        match self.interpolation {
            Interpolation::Linear => {
                let s = (d - k0) / h;
                p0 * (1.0 - s) + p1 * s
            }
            Interpolation::Cubic => {
                let (m0, m1) = (self.second_derivs[i], self.second_derivs[i + 1]);
                let a = (k1 - d) / h;
                let b = (d - k0) / h;
                p0 * a + p1 * b + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0)
            }
        }
    }

    fn derivative(&self, d: f64) -> Vec3 {
        let d = d.clamp(0.0, 1.0);
        let i = self.segment_index(d);
        let (k0, k1) = (self.knots[i], self.knots[i + 1]);
        let h = k1 - k0;
        let (p0, p1) = (self.points[i], self.points[i + 1]);
        match self.interpolation {
            Interpolation::Linear => (p1 - p0) / h,
            Interpolation::Cubic => {
                let (m0, m1) = (self.second_derivs[i], self.second_derivs[i + 1]);
                let a = (k1 - d) / h;
                let b = (d - k0) / h;
                (p1 - p0) / h + (m1 * (3.0 * b * b - 1.0) - m0 * (3.0 * a * a - 1.0)) * (h / 6.0)
            }
        }
    }

    /// Unit forward tangent at `d`.
    pub fn tangent_at(&self, d: f64) -> Vec3 {
        let deriv = self.derivative(d);
        let n = deriv.norm();
        if n > 1e-12 {
            return deriv / n;
        }
        // Degenerate derivative: fall back to a one-sided chord.
        let step = 1e-6;
        let (a, b) = if d + step <= 1.0 { (d, d + step) } else { (d - step, d) };
        let chord = self.eval(b) - self.eval(a);
        chord / chord.norm()
    }

    fn result_at(&self, d: f64, x: &Vec3) -> ProjectionResult {
        let point = self.eval(d);
        ProjectionResult {
            d,
            point,
            tangent: self.tangent_at(d),
            distance: (point - x).norm(),
        }
    }

    /// Global closest point. Ties resolve to the smallest parameter.
    pub fn project(&self, x: &Vec3) -> ProjectionResult {
        match self.interpolation {
            Interpolation::Linear => self.project_segments(x, 0, self.points.len() - 1),
            Interpolation::Cubic => self.project_sampled(x, 0, COARSE_SAMPLES),
        }
    }

    /// Closest point searched only near `hint`; used by forward simulations
    /// that move continuously along the curve.
    pub fn project_tracking(&self, x: &Vec3, hint: f64) -> ProjectionResult {
        match self.interpolation {
            Interpolation::Linear => {
                let seg = self.segment_index(hint.clamp(0.0, 1.0));
                let lo = seg.saturating_sub(4);
                let hi = (seg + 5).min(self.points.len() - 1);
                self.project_segments(x, lo, hi)
            }
            Interpolation::Cubic => {
                let centre = (hint.clamp(0.0, 1.0) * COARSE_SAMPLES as f64).round() as usize;
                let lo = centre.saturating_sub(TRACKING_WINDOW);
                let hi = (centre + TRACKING_WINDOW).min(COARSE_SAMPLES);
                self.project_sampled(x, lo, hi)
            }
        }
    }

    /// Exact projection onto segments `lo..hi` of the polyline.
    fn project_segments(&self, x: &Vec3, lo: usize, hi: usize) -> ProjectionResult {
        let mut best_d = self.knots[lo];
        let mut best_dist2 = f64::INFINITY;
        for i in lo..hi {
            let (a, b) = (self.points[i], self.points[i + 1]);
            let ab = b - a;
            let s = ((x - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
            let q = a + ab * s;
            let dist2 = (q - x).norm_squared();
            if dist2 < best_dist2 {
                best_dist2 = dist2;
                best_d = self.knots[i] + s * (self.knots[i + 1] - self.knots[i]);
            }
        }
        self.result_at(best_d.clamp(0.0, 1.0), x)
    }

    /// Coarse sampling over sample indices `lo..=hi` followed by
    /// golden-section refinement on the bracketing interval.
    fn project_sampled(&self, x: &Vec3, lo: usize, hi: usize) -> ProjectionResult {
        let mut best = lo;
        let mut best_dist2 = f64::INFINITY;
        for i in lo..=hi {
            let dist2 = (self.samples[i] - x).norm_squared();
            if dist2 < best_dist2 {
                best_dist2 = dist2;
                best = i;
            }
        }
        let step = 1.0 / COARSE_SAMPLES as f64;
        let a = best.saturating_sub(1) as f64 * step;
        let b = ((best + 1).min(COARSE_SAMPLES)) as f64 * step;
        let f = |d: f64| (self.eval(d) - x).norm_squared();
        let d_ref = golden_section(a, b, f);
        let sample_d = best as f64 * step;
        let d = if f(d_ref) < best_dist2 { d_ref } else { sample_d };
        self.result_at(d, x)
    }
}

fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if b - a < 1e-14 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // Endpoints matter when the minimum sits on the domain boundary.
    let mid = 0.5 * (a + b);
    [a, mid, b]
        .into_iter()
        .min_by(|p, q| f(*p).partial_cmp(&f(*q)).unwrap())
        .unwrap()
}

/// Natural cubic spline second derivatives (zero at both ends), one tridiagonal
/// solve per coordinate.
fn natural_spline_second_derivs(points: &[Vec3], knots: &[f64]) -> Vec<Vec3> {
    let n = points.len();
    let mut m = vec![Vec3::zeros(); n];
    if n < 3 {
        return m;
    }
    let interior = n - 2;
    let mut diag = vec![0.0; interior];
    let mut upper = vec![0.0; interior];
    let mut rhs = vec![Vec3::zeros(); interior];
    for j in 0..interior {
        let i = j + 1;
        let h0 = knots[i] - knots[i - 1];
        let h1 = knots[i + 1] - knots[i];
        diag[j] = 2.0 * (h0 + h1);
        upper[j] = h1;
        rhs[j] = ((points[i + 1] - points[i]) / h1 - (points[i] - points[i - 1]) / h0) * 6.0;
    }
    // Thomas algorithm; lower diagonal entry for row j is h0 of row j.
    for j in 1..interior {
        let lower = knots[j + 1] - knots[j];
        let w = lower / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        let prev = rhs[j - 1];
        rhs[j] -= prev * w;
    }
    let mut sol = vec![Vec3::zeros(); interior];
    sol[interior - 1] = rhs[interior - 1] / diag[interior - 1];
    for j in (0..interior - 1).rev() {
        sol[j] = (rhs[j] - sol[j + 1] * upper[j]) / diag[j];
    }
    m[1..(interior + 1)].copy_from_slice(&sol);
    m
}

/// Points on a circular arc in the xy-plane, counter-clockwise from
/// `start_angle` to `end_angle` (radians).
pub fn arc_points(center: [f64; 2], radius: f64, start_angle: f64, end_angle: f64, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let th = start_angle + (end_angle - start_angle) * i as f64 / (n - 1) as f64;
            vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()]
        })
        .collect()
}
