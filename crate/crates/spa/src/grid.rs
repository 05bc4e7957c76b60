//! Layered spatial index for sphere-membership queries on the torus.
//!
//! Vertices are bucketed by the radius class of their sphere of influence:
//! layer `j` holds vertices whose current radius is at most `2^-j`, on a
//! grid whose cells match that scale. A query point inspects a constant
//! number of cells per layer instead of a single box sized by the largest
//! sphere in the graph. That matters because with `pA1` close to 1 the top
//! vertex keeps a Theta(1) radius for the whole run, which would degrade a
//! single shared grid to a full scan at every step.
//!
//! The index is a prefilter plus the exact membership test: a vertex may sit
//! in a coarser layer than its current radius strictly requires (radii only
//! shrink as `t` grows between degree updates), but never in a finer one, so
//! no containing sphere is ever missed.

use crate::torus::TorusMetric;

const MAX_DIM: usize = 16;
/// Upper bound on log2(cells) in the finest layer.
const CELL_BUDGET_LOG2: u32 = 16;

struct Layer {
    /// Cells per axis; always a power of two.
    g: u32,
    buckets: Vec<Vec<u32>>,
}

impl Layer {
    fn new(g: u32, m: usize) -> Self {
        let cells = (g as usize).pow(m as u32);
        Layer {
            g,
            buckets: vec![Vec::new(); cells],
        }
    }

    /// Flat index of the cell containing a point of [0,1)^m. Exact because
    /// g is a power of two, so x*g < g whenever x < 1.
    #[inline]
    fn cell_of(&self, pos: &[f64]) -> u32 {
        let mut idx = 0u64;
        for &x in pos {
            idx = idx * self.g as u64 + (x * self.g as f64) as u64;
        }
        idx as u32
    }
}

#[derive(Clone, Copy)]
struct VertexLoc {
    layer: u8,
    cell: u32,
}

pub struct LayeredGrid {
    metric: TorusMetric,
    j_cap: u32,
    layers: Vec<Layer>,
    loc: Vec<VertexLoc>,
    last_rebuild_t: u64,
}

impl LayeredGrid {
    /// The grid engine supports up to 16 dimensions; the naive engine has no
    /// such limit.
    pub fn supports(metric: &TorusMetric) -> bool {
        (metric.m() as usize) <= MAX_DIM
    }

    pub fn new(metric: TorusMetric) -> Self {
        assert!(LayeredGrid::supports(&metric), "grid index needs m <= {MAX_DIM}");
        let m = metric.m();
        let j_cap = (CELL_BUDGET_LOG2 / m).max(1);
        // layers 0..=j_cap at their natural scale plus one merged finest
        // layer holding everything smaller
        let layers = (0..=j_cap + 1)
            .map(|j| Layer::new(1u32 << j.min(j_cap), m as usize))
            .collect();
        LayeredGrid {
            metric,
            j_cap,
            layers,
            loc: Vec::new(),
            last_rebuild_t: 1,
        }
    }

    /// Radius class for a sphere numerator `A1*deg + A2` at time `denom_t`:
    /// the largest `j` with `2^-j` still at least the sphere radius,
    /// clamped into the layer range. Verified with an exact volume
    /// comparison so float rounding in the logarithm can never put a vertex
    /// in a too-fine layer.
    fn class_of(&self, numerator: f64, denom_t: u64) -> u8 {
        let vol = (numerator / denom_t as f64).min(1.0);
        let m = self.metric.m() as i32;
        let cm = self.metric.unit_ball_volume();
        let r = (vol / cm).powf(1.0 / m as f64);
        let j_last = (self.layers.len() - 1) as i64;
        let mut j = if r >= 1.0 {
            0
        } else {
            ((-r.log2()).floor() as i64).clamp(0, j_last)
        };
        // class j is valid when vol <= c_m (2^-j)^m, i.e. the bound radius
        // covers the sphere; coarsen until that holds exactly
        while j > 0 && vol > cm * 0.5f64.powi(j as i32).powi(m) {
            j -= 1;
        }
        j as u8
    }

    /// Inserts the vertex born at step `t`; its first query happens at step
    /// `t+1` where spheres are evaluated at time `t`.
    pub fn insert(&mut self, id: u32, pos: &[f64], numerator: f64, t: u64) {
        let j = self.class_of(numerator, t);
        let layer = &mut self.layers[j as usize];
        let cell = layer.cell_of(pos);
        layer.buckets[cell as usize].push(id);
        debug_assert_eq!(self.loc.len(), id as usize - 1);
        self.loc.push(VertexLoc { layer: j, cell });
    }

    /// Re-files a vertex whose sphere grew at step `t` (an in-edge arrived).
    pub fn degree_updated(&mut self, id: u32, pos: &[f64], numerator: f64, t: u64) {
        let j = self.class_of(numerator, t);
        let old = self.loc[id as usize - 1];
        if j == old.layer {
            return;
        }
        let bucket = &mut self.layers[old.layer as usize].buckets[old.cell as usize];
        let at = bucket.iter().position(|&v| v == id).expect("vertex in its bucket");
        bucket.swap_remove(at);
        let layer = &mut self.layers[j as usize];
        let cell = layer.cell_of(pos);
        layer.buckets[cell as usize].push(id);
        self.loc[id as usize - 1] = VertexLoc { layer: j, cell };
    }

    /// Reclassifies everything once `t` doubles: spheres shrink as time
    /// passes, so stale classes are safe but increasingly wasteful. Called
    /// at the start of step `t`, before the query that evaluates spheres at
    /// `t-1`.
    pub fn maybe_rebuild(&mut self, t: u64, coords: &[f64], numerators: &[f64]) {
        if t < 2 * self.last_rebuild_t {
            return;
        }
        self.last_rebuild_t = t;
        for layer in &mut self.layers {
            for bucket in &mut layer.buckets {
                bucket.clear();
            }
        }
        let m = self.metric.m() as usize;
        self.loc.clear();
        for (idx, &num) in numerators.iter().enumerate() {
            let id = idx as u32 + 1;
            let pos = &coords[idx * m..(idx + 1) * m];
            let j = self.class_of(num, t - 1);
            let layer = &mut self.layers[j as usize];
            let cell = layer.cell_of(pos);
            layer.buckets[cell as usize].push(id);
            self.loc.push(VertexLoc { layer: j, cell });
        }
    }

    /// Collects every vertex whose sphere of influence, evaluated at time
    /// `sphere_time`, contains `x`. Equals the exhaustive scan over all
    /// inserted vertices; the result is in arbitrary order.
    pub fn query_containing(
        &self,
        x: &[f64],
        sphere_time: u64,
        coords: &[f64],
        numerators: &[f64],
        out: &mut Vec<u32>,
    ) {
        let m = self.metric.m() as usize;
        let denom = sphere_time as f64;
        let mut lo = [0i64; MAX_DIM];
        let mut count = [0usize; MAX_DIM];
        let mut digit = [0usize; MAX_DIM];
        for (j, layer) in self.layers.iter().enumerate() {
            let g = layer.g as i64;
            let radius = 0.5f64.powi(j.min(self.j_cap as usize + 1) as i32);
            // cell box covering [x - radius, x + radius] per axis, widened
            // by one cell against boundary rounding
            let mut total = 1usize;
            for axis in 0..m {
                let a = ((x[axis] - radius) * g as f64).floor() as i64 - 1;
                let b = ((x[axis] + radius) * g as f64).floor() as i64 + 1;
                let span = ((b - a + 1).max(1) as usize).min(g as usize);
                lo[axis] = a;
                count[axis] = span;
                total *= span;
            }
            digit[..m].fill(0);
            for _ in 0..total {
                let mut cell = 0u64;
                for axis in 0..m {
                    let c = (lo[axis] + digit[axis] as i64).rem_euclid(g) as u64;
                    cell = cell * g as u64 + c;
                }
                for &id in &layer.buckets[cell as usize] {
                    let idx = id as usize - 1;
                    let pos = &coords[idx * m..(idx + 1) * m];
                    let dist = self.metric.distance_unchecked(x, pos);
                    let vol = (numerators[idx] / denom).min(1.0);
                    if self.metric.ball_contains(dist, vol) {
                        out.push(id);
                    }
                }
                // odometer over the m-dimensional cell box
                for axis in (0..m).rev() {
                    digit[axis] += 1;
                    if digit[axis] < count[axis] {
                        break;
                    }
                    digit[axis] = 0;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{KeyedRng, Stream};
    use crate::torus::Norm;

    /// Brute-force reference: scan every vertex.
    fn scan_containing(
        metric: &TorusMetric,
        x: &[f64],
        sphere_time: u64,
        coords: &[f64],
        numerators: &[f64],
    ) -> Vec<u32> {
        let m = metric.m() as usize;
        let mut out = Vec::new();
        for idx in 0..numerators.len() {
            let pos = &coords[idx * m..(idx + 1) * m];
            let dist = metric.distance_unchecked(x, pos);
            let vol = (numerators[idx] / sphere_time as f64).min(1.0);
            if metric.ball_contains(dist, vol) {
                out.push(idx as u32 + 1);
            }
        }
        out
    }

    #[test]
    fn empty_grid_returns_nothing() {
        let metric = TorusMetric::new(2, Norm::L2).unwrap();
        let grid = LayeredGrid::new(metric);
        let mut out = Vec::new();
        grid.query_containing(&[0.5, 0.5], 10, &[], &[], &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn single_covering_sphere_is_found() {
        let metric = TorusMetric::new(2, Norm::L2).unwrap();
        let mut grid = LayeredGrid::new(metric);
        let coords = vec![0.9, 0.9];
        let numerators = vec![1.0];
        grid.insert(1, &coords, 1.0, 1);
        let mut out = Vec::new();
        // at sphere time 1 the volume caps at 1: the whole torus
        grid.query_containing(&[0.2, 0.3], 1, &coords, &numerators, &mut out);
        assert_eq!(out, vec![1]);
    }

    #[test]
    fn matches_exhaustive_scan_on_random_states() {
        for (m, norm) in [(1, Norm::L2), (2, Norm::L2), (2, Norm::Linf), (3, Norm::Linf)] {
            let metric = TorusMetric::new(m, Norm::L2).unwrap();
            let metric = TorusMetric::new(m, norm).unwrap_or(metric);
            let rng = KeyedRng::new(977 + m as u64);
            let n = 600usize;
            let mut grid = LayeredGrid::new(metric);
            let mut coords = Vec::new();
            let mut numerators = Vec::new();
            for id in 1..=n as u64 {
                let mut pos = Vec::new();
                for axis in 0..m as u64 {
                    pos.push(rng.unit(Stream::Position, id, axis));
                }
                // degree profile with a few heavy vertices
                let deg = if id % 97 == 0 {
                    (4000 / id).max(1)
                } else {
                    (rng.unit(Stream::Link, id, 0) * 3.0) as u64
                };
                let numerator = 1.0 + deg as f64;
                grid.insert(id as u32, &pos, numerator, id);
                coords.extend_from_slice(&pos);
                numerators.push(numerator);
                if id % 151 == 0 {
                    grid.maybe_rebuild(id, &coords, &numerators);
                }
            }
            let sphere_time = n as u64;
            for probe in 0..200u64 {
                let mut x = Vec::new();
                for axis in 0..m as u64 {
                    x.push(rng.unit(Stream::Position, 1_000_000 + probe, axis));
                }
                let mut got = Vec::new();
                grid.query_containing(&x, sphere_time, &coords, &numerators, &mut got);
                got.sort_unstable();
                let want = scan_containing(&metric, &x, sphere_time, &coords, &numerators);
                assert_eq!(got, want, "m = {m}, probe = {probe}");
            }
        }
    }

    #[test]
    fn degree_updates_promote_between_layers() {
        let metric = TorusMetric::new(2, Norm::L2).unwrap();
        let mut grid = LayeredGrid::new(metric);
        let coords = vec![0.25, 0.25, 0.75, 0.75];
        let mut numerators = vec![1.0, 1.0];
        grid.insert(1, &coords[0..2], 1.0, 200);
        grid.insert(2, &coords[2..4], 1.0, 200);
        // vertex 1 gains a large degree: sphere jumps several classes
        // (volume 0.6 at t = 200, radius ~0.44)
        numerators[0] = 120.0;
        grid.degree_updated(1, &coords[0..2], 120.0, 200);
        let mut out = Vec::new();
        grid.query_containing(&[0.5, 0.5], 200, &coords, &numerators, &mut out);
        let want = scan_containing(&metric, &[0.5, 0.5], 200, &coords, &numerators);
        out.sort_unstable();
        assert_eq!(out, want);
        assert!(out.contains(&1), "probe at distance 0.354 lies inside");
        assert!(!out.contains(&2), "vertex 2 keeps its tiny sphere");
    }
}
