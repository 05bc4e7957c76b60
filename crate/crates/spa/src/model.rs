//! Model parameters and the generated-graph data model shared by the
//! generator, the analysis routines and persistence.

use crate::torus::TorusMetric;
use crate::{Result, SpaError};

/// Parameters of the SPA process.
///
/// `n` is the end time and final vertex count, `p` the link probability and
/// `A1`, `A2` the sphere-of-influence coefficients. The process requires
/// `p*A1 < 1` strictly, otherwise the graph densifies.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n: u64,
    pub p: f64,
    pub a1: f64,
    pub a2: f64,
    pub metric: TorusMetric,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: u64, p: f64, a1: f64, a2: f64, metric: TorusMetric, seed: u64) -> Result<Self> {
        let params = ModelParams {
            n,
            p,
            a1,
            a2,
            metric,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    /// Re-checks every constructor invariant. Used when parameters arrive
    /// from a file or the command line.
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(SpaError::InvalidArgument(format!(
                "n must be at least 1, got {}",
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(SpaError::InvalidArgument(format!(
                "link probability p must lie in [0,1], got {}",
                self.p
            )));
        }
        if !(self.a1 > 0.0 && self.a1.is_finite()) {
            return Err(SpaError::InvalidArgument(format!(
                "A1 must be a positive real, got {}",
                self.a1
            )));
        }
        if !(self.a2 > 0.0 && self.a2.is_finite()) {
            return Err(SpaError::InvalidArgument(format!(
                "A2 must be a positive real, got {}",
                self.a2
            )));
        }
        if self.p * self.a1 >= 1.0 {
            return Err(SpaError::Constraint(format!(
                "p*A1 = {} violates the strict inequality p*A1 < 1",
                self.p * self.a1
            )));
        }
        Ok(())
    }

    /// The recurring exponent p*A1.
    pub fn pa1(&self) -> f64 {
        self.p * self.a1
    }
}

/// Sphere of influence of a vertex at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereState {
    pub vertex: u32,
    pub volume: f64,
    pub radius: f64,
}

/// Volume and radius of `S(v, t)` given the in-degree of `v` at time `t`:
/// volume `min(1, (A1*deg + A2)/t)`.
pub fn sphere_of_influence(
    params: &ModelParams,
    vertex: u32,
    t: u64,
    in_degree: u32,
) -> Result<SphereState> {
    if vertex == 0 {
        return Err(SpaError::InvalidArgument("vertex ids start at 1".into()));
    }
    if t < vertex as u64 {
        return Err(SpaError::InvalidArgument(format!(
            "sphere of vertex {vertex} requested at time {t}, before its birth"
        )));
    }
    let volume = ((params.a1 * in_degree as f64 + params.a2) / t as f64).min(1.0);
    let radius = params.metric.radius_for_volume(volume)?;
    Ok(SphereState {
        vertex,
        volume,
        radius,
    })
}

/// In-degree vector recorded after step `t` completed.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSnapshot {
    pub t: u64,
    pub in_degree: Vec<u32>,
}

/// A generated SPA graph: birth-ordered vertex positions, the directed edge
/// list (younger source to older target) and final in-degrees, plus optional
/// in-degree snapshots.
///
/// Vertex identity is the 1-based birth index. The graph is immutable after
/// generation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaGraph {
    pub params: ModelParams,
    /// Flat coordinate storage, `m` entries per vertex in birth order.
    pub(crate) coords: Vec<f64>,
    /// Directed edges `(source, target)` with `source > target`, sorted.
    pub edges: Vec<(u32, u32)>,
    /// Final in-degree per vertex, indexed by `id - 1`.
    pub in_degree: Vec<u32>,
    /// Snapshots in ascending time order; empty when not requested.
    pub snapshots: Vec<DegreeSnapshot>,
}

impl SpaGraph {
    pub(crate) fn from_parts(
        params: ModelParams,
        coords: Vec<f64>,
        edges: Vec<(u32, u32)>,
        in_degree: Vec<u32>,
        snapshots: Vec<DegreeSnapshot>,
    ) -> Result<Self> {
        let g = SpaGraph {
            params,
            coords,
            edges,
            in_degree,
            snapshots,
        };
        g.check_invariants()?;
        Ok(g)
    }

    pub fn n(&self) -> u64 {
        self.in_degree.len() as u64
    }

    pub fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }

    /// Flat coordinate storage, `m` entries per vertex in birth order.
    pub fn positions(&self) -> &[f64] {
        &self.coords
    }

    /// Position of a vertex (1-based birth index).
    pub fn position(&self, id: u32) -> &[f64] {
        let m = self.params.metric.m() as usize;
        let i = (id as usize - 1) * m;
        &self.coords[i..i + m]
    }

    /// Torus distance between two vertices.
    pub fn distance_between(&self, a: u32, b: u32) -> f64 {
        self.params
            .metric
            .distance_unchecked(self.position(a), self.position(b))
    }

    /// In-neighbour lists indexed by `id - 1`; each list is ascending in
    /// birth index because edges are stored in generation order.
    pub fn in_neighbour_lists(&self) -> Vec<Vec<u32>> {
        let mut lists = vec![Vec::new(); self.in_degree.len()];
        for &(s, u) in &self.edges {
            lists[u as usize - 1].push(s);
        }
        lists
    }

    /// Out-neighbour (target) lists indexed by `id - 1`, ascending.
    pub fn out_neighbour_lists(&self) -> Vec<Vec<u32>> {
        let mut lists = vec![Vec::new(); self.in_degree.len()];
        for &(s, u) in &self.edges {
            lists[s as usize - 1].push(u);
        }
        lists
    }

    /// Validates the structural invariants: edge orientation, bounds,
    /// no duplicates or self-loops, and degree/edge consistency.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n();
        let m = self.params.metric.m() as usize;
        if self.params.n != n {
            return Err(SpaError::Constraint(format!(
                "params.n = {} but graph holds {} vertices",
                self.params.n, n
            )));
        }
        if self.coords.len() != n as usize * m {
            return Err(SpaError::Constraint(
                "coordinate storage does not match n*m".into(),
            ));
        }
        for &c in &self.coords {
            if !(0.0..1.0).contains(&c) {
                return Err(SpaError::Constraint(format!(
                    "vertex coordinate {c} outside [0,1)"
                )));
            }
        }
        let mut degrees = vec![0u32; n as usize];
        for &(s, u) in &self.edges {
            if s <= u {
                return Err(SpaError::Constraint(format!(
                    "edge ({s},{u}) does not point from younger to older"
                )));
            }
            if s as u64 > n || u == 0 {
                return Err(SpaError::Constraint(format!(
                    "edge ({s},{u}) references a vertex outside 1..={n}"
                )));
            }
            degrees[u as usize - 1] += 1;
        }
        if degrees != self.in_degree {
            return Err(SpaError::Constraint(
                "stored in-degrees disagree with the edge list".into(),
            ));
        }
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(SpaError::Constraint("duplicate edge".into()));
        }
        for snap in &self.snapshots {
            if snap.in_degree.len() != n as usize {
                return Err(SpaError::Constraint(format!(
                    "snapshot at t = {} has {} entries, expected {}",
                    snap.t,
                    snap.in_degree.len(),
                    n
                )));
            }
            if snap.t > n {
                return Err(SpaError::Constraint(format!(
                    "snapshot time {} exceeds n = {}",
                    snap.t, n
                )));
            }
        }
        Ok(())
    }
}
