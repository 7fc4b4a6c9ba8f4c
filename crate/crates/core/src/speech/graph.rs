use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense vertex index into a [`PhrasingGraph`].
pub type VertexIx = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexFile {
    pub id: String,
    pub text: String,
    pub duration_s: f64,
    #[serde(default)]
    pub audio: Option<PathBuf>,
}

/// On-disk phrasing graph.
///
/// `natural_path` is optional; without it the natural path follows the first
/// listed outgoing edge of every vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub start: String,
    pub vertices: Vec<VertexFile>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub natural_path: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub text: String,
    pub duration_s: f64,
    pub audio: Option<PathBuf>,
}

/// Shortest and longest remaining speech time starting at each vertex,
/// including the vertex's own phrase.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub t_min: Vec<f64>,
    pub t_max: Vec<f64>,
}

/// A DAG of phrase fragments; root-to-terminal paths are alternative
/// wordings of the same instruction. Immutable once loaded.
#[derive(Debug, Clone)]
pub struct PhrasingGraph {
    vertices: Vec<Vertex>,
    successors: Vec<Vec<VertexIx>>,
    start: VertexIx,
    natural_next: Vec<Option<VertexIx>>,
    topo_order: Vec<VertexIx>,
    bounds: Bounds,
}

impl PhrasingGraph {
    pub fn from_file_data(file: GraphFile) -> Result<Self> {
        if file.vertices.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut index = HashMap::new();
        let mut vertices = Vec::with_capacity(file.vertices.len());
        for v in file.vertices {
            if !(v.duration_s.is_finite() && v.duration_s > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "vertex {:?} has non-positive duration {}",
                    v.id, v.duration_s
                )));
            }
            if index.insert(v.id.clone(), vertices.len()).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {:?}", v.id)));
            }
            vertices.push(Vertex { id: v.id, text: v.text, duration_s: v.duration_s, audio: v.audio });
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("unknown vertex id {id:?}")))
        };
        let mut successors = vec![Vec::new(); vertices.len()];
        for (u, v) in &file.edges {
            let (ui, vi) = (lookup(u)?, lookup(v)?);
            if successors[ui].contains(&vi) {
                return Err(Error::InvalidGraph(format!("duplicate edge {u:?} -> {v:?}")));
            }
            successors[ui].push(vi);
        }
        let start = lookup(&file.start)?;

        let topo_order = topological_order(&successors).map_err(|cycle| {
            Error::Cycle(cycle.into_iter().map(|i| vertices[i].id.clone()).collect())
        })?;

        let mut natural_next: Vec<Option<VertexIx>> = successors.iter().map(|s| s.first().copied()).collect();
        if let Some(path) = &file.natural_path {
            let ids = path.iter().map(|id| lookup(id)).collect::<Result<Vec<_>>>()?;
            if ids.first() != Some(&start) {
                return Err(Error::InvalidGraph("natural_path must begin at the start vertex".into()));
            }
            for w in ids.windows(2) {
                if !successors[w[0]].contains(&w[1]) {
                    return Err(Error::InvalidGraph(format!(
                        "natural_path step {:?} -> {:?} is not an edge",
                        vertices[w[0]].id, vertices[w[1]].id
                    )));
                }
                natural_next[w[0]] = Some(w[1]);
            }
            let last = *ids.last().unwrap();
            if !successors[last].is_empty() {
                return Err(Error::InvalidGraph("natural_path must end at a terminal vertex".into()));
            }
        }

        let mut graph = PhrasingGraph {
            vertices,
            successors,
            start,
            natural_next,
            topo_order,
            bounds: Bounds { t_min: Vec::new(), t_max: Vec::new() },
        };
        // In a finite DAG every walk ends at a sink, so every vertex reaches
        // a terminal once acyclicity holds.
        graph.bounds = precompute_bounds(&graph);
        Ok(graph)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::asset_io(path, e))?;
        let mut file: GraphFile = serde_json::from_str(&text).map_err(|e| Error::Asset {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        // Audio paths are relative to the graph file.
        let base = path.parent().unwrap_or(Path::new("."));
        for v in &mut file.vertices {
            if let Some(a) = &v.audio {
                if a.is_relative() {
                    v.audio = Some(base.join(a));
                }
            }
        }
        Self::from_file_data(file).map_err(|e| match e {
            Error::Cycle(_) => e,
            other => Error::Asset { path: path.to_path_buf(), message: other.to_string() },
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, ix: VertexIx) -> &Vertex {
        &self.vertices[ix]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn index_of(&self, id: &str) -> Option<VertexIx> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn successors(&self, ix: VertexIx) -> &[VertexIx] {
        &self.successors[ix]
    }

    pub fn is_terminal(&self, ix: VertexIx) -> bool {
        self.successors[ix].is_empty()
    }

    pub fn start(&self) -> VertexIx {
        self.start
    }

    pub fn natural_next(&self, ix: VertexIx) -> Option<VertexIx> {
        self.natural_next[ix]
    }

    /// Vertices of the natural path from the start vertex.
    pub fn natural_path(&self) -> Vec<VertexIx> {
        let mut path = vec![self.start];
        while let Some(next) = self.natural_next[*path.last().unwrap()] {
            path.push(next);
        }
        path
    }

    pub fn natural_duration(&self) -> f64 {
        self.natural_path().iter().map(|&v| self.vertices[v].duration_s).sum()
    }

    pub fn topological_order(&self) -> &[VertexIx] {
        &self.topo_order
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn t_min(&self, ix: VertexIx) -> f64 {
        self.bounds.t_min[ix]
    }

    pub fn t_max(&self, ix: VertexIx) -> f64 {
        self.bounds.t_max[ix]
    }
}

/// Kahn's algorithm. On failure returns one cycle, first vertex repeated at
/// the end.
fn topological_order(successors: &[Vec<VertexIx>]) -> std::result::Result<Vec<VertexIx>, Vec<VertexIx>> {
    let n = successors.len();
    let mut indegree = vec![0usize; n];
    for s in successors {
        for &v in s {
            indegree[v] += 1;
        }
    }
    let mut queue: std::collections::VecDeque<VertexIx> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in &successors[u] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    Err(find_cycle(successors, &indegree))
}

fn find_cycle(successors: &[Vec<VertexIx>], indegree: &[usize]) -> Vec<VertexIx> {
    // Every vertex left with positive indegree lies on or downstream of a
    // cycle; following remaining edges must revisit a vertex.
    let mut current = indegree.iter().position(|&d| d > 0).unwrap();
    let mut seen = vec![usize::MAX; successors.len()];
    let mut walk = Vec::new();
    loop {
        if seen[current] != usize::MAX {
            let mut cycle = walk[seen[current]..].to_vec();
            cycle.push(current);
            return cycle;
        }
        seen[current] = walk.len();
        walk.push(current);
        current = *successors[current].iter().find(|&&v| indegree[v] > 0).unwrap();
    }
}

/// Reverse-topological dynamic program for the shortest and longest speech
/// durations from every vertex.
pub fn precompute_bounds(graph: &PhrasingGraph) -> Bounds {
    let n = graph.vertices.len();
    let mut t_min = vec![0.0; n];
    let mut t_max = vec![0.0; n];
    for &u in graph.topo_order.iter().rev() {
        let succ = &graph.successors[u];
        let (lo, hi) = if succ.is_empty() {
            (0.0, 0.0)
        } else {
            succ.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(t_min[v]), hi.max(t_max[v]))
            })
        };
        t_min[u] = graph.vertices[u].duration_s + lo;
        t_max[u] = graph.vertices[u].duration_s + hi;
    }
    Bounds { t_min, t_max }
}

/// Picks the successor whose midpoint duration `(t_min + t_max) / 2` is closest
/// to the motion time-to-completion. Paces play no part in the choice.
/// Returns `None` at a terminal vertex; ties go to the smallest vertex id.
pub fn select_next_vertex(graph: &PhrasingGraph, current: VertexIx, etc_motion: f64) -> Option<VertexIx> {
    graph.successors[current]
        .iter()
        .copied()
        .map(|u| {
            let mid = 0.5 * (graph.t_min(u) + graph.t_max(u));
            ((etc_motion - mid).abs(), u)
        })
        .min_by(|(ea, ua), (eb, ub)| {
            ea.partial_cmp(eb)
                .unwrap()
                .then_with(|| graph.vertices[*ua].id.cmp(&graph.vertices[*ub].id))
        })
        .map(|(_, u)| u)
}
