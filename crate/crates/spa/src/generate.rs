//! The SPA process itself.
//!
//! At each step `t` a new vertex lands uniformly at random on the torus and,
//! independently for every older vertex `u` whose sphere of influence
//! `S(u, t-1)` contains it, links to `u` with probability `p`. Two engines
//! share the same keyed randomness and the same membership test and are
//! therefore bit-identical: a naive scan over all older vertices, and the
//! layered grid index.

use crate::grid::LayeredGrid;
use crate::model::{DegreeSnapshot, ModelParams, SpaGraph};
use crate::rng::{KeyedRng, Stream};
use crate::torus::TorusMetric;
use crate::{Result, SpaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Grid,
    Naive,
}

impl Engine {
    pub fn token(self) -> &'static str {
        match self {
            Engine::Grid => "grid",
            Engine::Naive => "naive",
        }
    }

    pub fn parse(s: &str) -> Result<Engine> {
        match s {
            "grid" => Ok(Engine::Grid),
            "naive" => Ok(Engine::Naive),
            other => Err(SpaError::InvalidArgument(format!(
                "unknown engine {other:?}, expected \"grid\" or \"naive\""
            ))),
        }
    }
}

/// Which in-degree snapshots to record during generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SnapshotSpec {
    None,
    /// The geometric grid `ceil(n / 2^j)` for `j = 0, 1, ...` down to 1.
    Geometric,
    /// Explicit times; values outside `1..=n` are ignored.
    Times(Vec<u64>),
}

#[derive(Debug, Clone)]
pub struct GenOptions {
    pub engine: Engine,
    pub snapshots: SnapshotSpec,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            engine: Engine::Grid,
            snapshots: SnapshotSpec::None,
        }
    }
}

/// Resolved snapshot times: ascending, deduplicated, within `1..=n`.
pub fn snapshot_times(spec: &SnapshotSpec, n: u64) -> Vec<u64> {
    let mut times = match spec {
        SnapshotSpec::None => Vec::new(),
        SnapshotSpec::Geometric => {
            let mut ts = Vec::new();
            let mut denom = 1u64;
            loop {
                ts.push(n.div_ceil(denom));
                if denom >= n {
                    break;
                }
                denom *= 2;
            }
            ts
        }
        SnapshotSpec::Times(ts) => ts.clone(),
    };
    times.retain(|&t| (1..=n).contains(&t));
    times.sort_unstable();
    times.dedup();
    times
}

/// Runs the process with the engine named in `options`.
pub fn generate(params: &ModelParams, options: &GenOptions) -> Result<SpaGraph> {
    params.validate()?;
    match options.engine {
        Engine::Naive => run(params, options, NaiveScan { count: 0 }),
        Engine::Grid => {
            if !LayeredGrid::supports(&params.metric) {
                return Err(SpaError::InvalidArgument(
                    "the grid engine supports at most 16 dimensions; use the naive engine".into(),
                ));
            }
            run(
                params,
                options,
                GridSource {
                    grid: LayeredGrid::new(params.metric),
                },
            )
        }
    }
}

/// Reference implementation scanning all older vertices at every step.
/// Identical output contract to the grid engine; intended for n up to ~10^4.
pub fn generate_naive(params: &ModelParams, options: &GenOptions) -> Result<SpaGraph> {
    let opts = GenOptions {
        engine: Engine::Naive,
        snapshots: options.snapshots.clone(),
    };
    generate(params, &opts)
}

/// Supplies, for the new point `x` at step `t`, every older vertex whose
/// sphere (evaluated at time `t-1`) contains `x`.
trait CandidateSource {
    fn step_begin(&mut self, _t: u64, _coords: &[f64], _numerators: &[f64]) {}
    fn vertex_inserted(&mut self, _id: u32, _pos: &[f64], _numerator: f64, _t: u64) {}
    fn degree_updated(&mut self, _id: u32, _pos: &[f64], _numerator: f64, _t: u64) {}
    /// Pushes containing vertices into `out` (any order).
    fn containing(
        &self,
        metric: &TorusMetric,
        x: &[f64],
        sphere_time: u64,
        coords: &[f64],
        numerators: &[f64],
        out: &mut Vec<u32>,
    );
}

struct NaiveScan {
    count: usize,
}

impl CandidateSource for NaiveScan {
    fn vertex_inserted(&mut self, _id: u32, _pos: &[f64], _numerator: f64, _t: u64) {
        self.count += 1;
    }

    fn containing(
        &self,
        metric: &TorusMetric,
        x: &[f64],
        sphere_time: u64,
        coords: &[f64],
        numerators: &[f64],
        out: &mut Vec<u32>,
    ) {
        let m = metric.m() as usize;
        let denom = sphere_time as f64;
        for idx in 0..self.count {
            let pos = &coords[idx * m..(idx + 1) * m];
            let dist = metric.distance_unchecked(x, pos);
            let vol = (numerators[idx] / denom).min(1.0);
            if metric.ball_contains(dist, vol) {
                out.push(idx as u32 + 1);
            }
        }
    }
}

struct GridSource {
    grid: LayeredGrid,
}

impl CandidateSource for GridSource {
    fn step_begin(&mut self, t: u64, coords: &[f64], numerators: &[f64]) {
        self.grid.maybe_rebuild(t, coords, numerators);
    }

    fn vertex_inserted(&mut self, id: u32, pos: &[f64], numerator: f64, t: u64) {
        self.grid.insert(id, pos, numerator, t);
    }

    fn degree_updated(&mut self, id: u32, pos: &[f64], numerator: f64, t: u64) {
        self.grid.degree_updated(id, pos, numerator, t);
    }

    fn containing(
        &self,
        _metric: &TorusMetric,
        x: &[f64],
        sphere_time: u64,
        coords: &[f64],
        numerators: &[f64],
        out: &mut Vec<u32>,
    ) {
        self.grid.query_containing(x, sphere_time, coords, numerators, out);
    }
}

fn run<S: CandidateSource>(
    params: &ModelParams,
    options: &GenOptions,
    mut source: S,
) -> Result<SpaGraph> {
    let n = params.n;
    let m = params.metric.m() as usize;
    let metric = params.metric;
    let rng = KeyedRng::new(params.seed);

    if (n as u128) * (m as u128) > usize::MAX as u128 / 16 {
        return Err(SpaError::InvalidArgument(format!(
            "n = {n} at m = {m} exceeds addressable memory"
        )));
    }

    let mut coords: Vec<f64> = Vec::with_capacity(n as usize * m);
    let mut numerators: Vec<f64> = Vec::with_capacity(n as usize);
    let mut in_degree: Vec<u32> = Vec::with_capacity(n as usize);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let snap_times = snapshot_times(&options.snapshots, n);
    let mut snapshots: Vec<DegreeSnapshot> = Vec::with_capacity(snap_times.len());
    let mut next_snap = 0usize;

    let mut pos_buf: Vec<f64> = vec![0.0; m];
    let mut candidates: Vec<u32> = Vec::new();
    let mut step_targets: Vec<u32> = Vec::new();

    for t in 1..=n {
        for (axis, slot) in pos_buf.iter_mut().enumerate() {
            *slot = rng.unit(Stream::Position, t, axis as u64);
        }

        step_targets.clear();
        if t >= 2 {
            source.step_begin(t, &coords, &numerators);
            candidates.clear();
            source.containing(&metric, &pos_buf, t - 1, &coords, &numerators, &mut candidates);
            candidates.sort_unstable();
            for &u in &candidates {
                if rng.unit(Stream::Link, t, u as u64) < params.p {
                    edges.push((t as u32, u));
                    step_targets.push(u);
                }
            }
        }

        coords.extend_from_slice(&pos_buf);
        numerators.push(params.a2);
        in_degree.push(0);
        source.vertex_inserted(t as u32, &pos_buf, params.a2, t);

        for &u in &step_targets {
            let idx = u as usize - 1;
            in_degree[idx] += 1;
            numerators[idx] += params.a1;
            let pos = coords[idx * m..(idx + 1) * m].to_vec();
            source.degree_updated(u, &pos, numerators[idx], t);
        }

        if next_snap < snap_times.len() && snap_times[next_snap] == t {
            // vertices not yet born are recorded with in-degree zero
            let mut degs = in_degree.clone();
            degs.resize(n as usize, 0);
            snapshots.push(DegreeSnapshot { t, in_degree: degs });
            next_snap += 1;
        }
    }

    let graph = SpaGraph {
        params: params.clone(),
        coords,
        edges,
        in_degree,
        snapshots,
    };
    #[cfg(debug_assertions)]
    if let Err(e) = graph.check_invariants() {
        panic!("generated graph violates invariants: {e}");
    }
    Ok(graph)
}
