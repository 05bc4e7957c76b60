//! Empirical measurement on generated graphs and comparison against the
//! closed-form predictions: common-neighbour counting, pair eligibility
//! filtering and distance estimation, edge-length survival curves, degree
//! histograms and trajectory concentration checks.

use crate::model::SpaGraph;
use crate::theory::{Regime, TheoryContext};
use crate::{Result, SpaError};
use std::collections::BTreeMap;

/// Number of common in-neighbours of `u` and `v`: vertices with directed
/// links to both. Symmetric in its arguments.
pub fn common_neighbours(g: &SpaGraph, u: u32, v: u32) -> Result<u32> {
    let n = g.n();
    if u == v {
        return Err(SpaError::InvalidArgument(
            "common neighbours of a vertex with itself are undefined".into(),
        ));
    }
    if u == 0 || v == 0 || u as u64 > n || v as u64 > n {
        return Err(SpaError::InvalidArgument(format!(
            "vertex pair ({u},{v}) outside 1..={n}"
        )));
    }
    let mut in_u: Vec<u32> = Vec::new();
    let mut in_v: Vec<u32> = Vec::new();
    for &(s, t) in &g.edges {
        if t == u {
            in_u.push(s);
        } else if t == v {
            in_v.push(s);
        }
    }
    Ok(merge_count(&in_u, &in_v))
}

/// Size of the intersection of two ascending lists.
fn merge_count(a: &[u32], b: &[u32]) -> u32 {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// An unordered vertex pair surviving the co-citation filter, ordered so
/// that `deg(id_k) >= deg(id_ell)` (ties break to the older vertex).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCandidate {
    pub id_k: u32,
    pub id_ell: u32,
    pub k: u32,
    pub ell: u32,
    pub cn: u32,
}

/// All unordered pairs with at least `min_cn` common in-neighbours.
///
/// Pairs are harvested by inverting the adjacency: two targets share a
/// common in-neighbour exactly when some vertex links to both, so scanning
/// each vertex's out-neighbourhood finds every pair with `cn >= 1`. Targets
/// with in-degree below `min_cn` cannot reach the threshold (cn is at most
/// the smaller degree) and are dropped up front.
pub fn cocitation_pairs(g: &SpaGraph, min_cn: u32) -> Result<Vec<PairCandidate>> {
    if min_cn < 1 {
        return Err(SpaError::InvalidArgument("min_cn must be at least 1".into()));
    }
    let eligible: Vec<bool> = g.in_degree.iter().map(|&d| d >= min_cn).collect();
    // one u64 key per co-cited pair occurrence; the multiplicity of a key
    // is exactly the pair's common-neighbour count
    let mut keys: Vec<u64> = Vec::new();
    let mut targets: Vec<u32> = Vec::new();
    let mut at = 0usize;
    while at < g.edges.len() {
        let source = g.edges[at].0;
        targets.clear();
        while at < g.edges.len() && g.edges[at].0 == source {
            let t = g.edges[at].1;
            if eligible[t as usize - 1] {
                targets.push(t);
            }
            at += 1;
        }
        for i in 0..targets.len() {
            for j in i + 1..targets.len() {
                let (a, b) = if targets[i] < targets[j] {
                    (targets[i], targets[j])
                } else {
                    (targets[j], targets[i])
                };
                keys.push((a as u64) << 32 | b as u64);
            }
        }
    }
    keys.sort_unstable();

    let mut out = Vec::new();
    let mut i = 0usize;
    while i < keys.len() {
        let key = keys[i];
        let mut j = i + 1;
        while j < keys.len() && keys[j] == key {
            j += 1;
        }
        let cn = (j - i) as u32;
        if cn >= min_cn {
            let a = (key >> 32) as u32;
            let b = key as u32;
            let (da, db) = (g.in_degree[a as usize - 1], g.in_degree[b as usize - 1]);
            let (id_k, id_ell, k, ell) = if da > db || (da == db && a < b) {
                (a, b, da, db)
            } else {
                (b, a, db, da)
            };
            out.push(PairCandidate {
                id_k,
                id_ell,
                k,
                ell,
                cn,
            });
        }
        i = j;
    }
    Ok(out)
}

/// The full eligibility filter: at least `min_cn` common neighbours and
/// `cn < close_ratio * p * min(k, ell)`, which drops pairs whose
/// common-neighbour count carries the too-close signature `cn ~ p*ell`.
pub fn eligible_pairs(g: &SpaGraph, min_cn: u32, close_ratio: f64) -> Result<Vec<PairCandidate>> {
    if !(close_ratio > 0.0 && close_ratio < 1.0) {
        return Err(SpaError::InvalidArgument(format!(
            "close_ratio must lie strictly between 0 and 1, got {close_ratio}"
        )));
    }
    let mut pairs = cocitation_pairs(g, min_cn)?;
    let p = g.params.p;
    pairs.retain(|c| (c.cn as f64) < close_ratio * p * c.ell.min(c.k) as f64);
    Ok(pairs)
}

/// A pair with its actual and estimated distances filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEstimate {
    pub id_k: u32,
    pub id_ell: u32,
    pub k: u32,
    pub ell: u32,
    pub cn: u32,
    pub regime: Regime,
    pub d_actual: f64,
    pub d_hat: f64,
    pub d_hat_adjusted: f64,
}

/// Fills distance estimates for candidate pairs: the basic estimator, the
/// adjusted estimator with convex weight `c_weight`, the actual torus
/// distance from the stored positions, and the regime classification of the
/// actual distance under `threshold`.
pub fn estimate_pair_distances(
    g: &SpaGraph,
    ctx: &TheoryContext,
    pairs: &[PairCandidate],
    c_weight: f64,
    threshold: f64,
) -> Result<Vec<PairEstimate>> {
    let mut out = Vec::with_capacity(pairs.len());
    for c in pairs {
        if c.cn == 0 {
            return Err(SpaError::InvalidArgument(
                "pair with zero common neighbours cannot be estimated".into(),
            ));
        }
        let i_k = ctx.nominal_birth_time(c.k as f64)?;
        let i_ell = ctx.nominal_birth_time(c.ell as f64)?;
        let d_actual = g.distance_between(c.id_k, c.id_ell);
        let d_hat = ctx.distance_estimate_basic(c.cn as f64, i_k, i_ell)?;
        let d_hat_adjusted =
            ctx.distance_estimate_adjusted(c.cn as f64, i_k, i_ell, c_weight)?;
        let regime = ctx.classify_pair(c.k as f64, c.ell as f64, d_actual, threshold)?;
        out.push(PairEstimate {
            id_k: c.id_k,
            id_ell: c.id_ell,
            k: c.k,
            ell: c.ell,
            cn: c.cn,
            regime,
            d_actual,
            d_hat,
            d_hat_adjusted,
        });
    }
    out.sort_by(|a, b| (a.id_k, a.id_ell).cmp(&(b.id_k, b.id_ell)));
    Ok(out)
}

/// One sampled point of the edge-length survival curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLengthRow {
    pub alpha: f64,
    pub r_alpha: f64,
    /// Number of edges at least `r_alpha` long.
    pub e_alpha: u64,
    pub e_alpha_predicted: Option<f64>,
    pub log_slope_predicted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeLengthCurve {
    pub rows: Vec<EdgeLengthRow>,
}

/// Counts, for each `alpha`, the edges whose endpoint distance is at least
/// `r_alpha = (n^-alpha / c_m)^{1/m}`, attaching the theory predictions
/// where they exist.
pub fn edge_length_survival(g: &SpaGraph, alphas: &[f64]) -> Result<EdgeLengthCurve> {
    if alphas.is_empty() {
        return Err(SpaError::InvalidArgument(
            "edge-length survival needs at least one alpha".into(),
        ));
    }
    let ctx = TheoryContext::new(&g.params).ok();
    let metric = g.params.metric;
    let n = g.n() as f64;
    let m = metric.m() as f64;

    let mut lengths: Vec<f64> = g
        .edges
        .iter()
        .map(|&(s, u)| g.distance_between(s, u))
        .collect();
    lengths.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if !(alpha >= 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        let r_alpha = (n.powf(-alpha) / metric.unit_ball_volume()).powf(1.0 / m);
        // edges with length >= r_alpha, via the sorted lengths
        let below = lengths.partition_point(|&len| len < r_alpha);
        let e_alpha = (lengths.len() - below) as u64;
        let (pred, slope) = match &ctx {
            Some(ctx) => (
                ctx.long_edge_count_predicted(alpha)?,
                ctx.long_edge_log_slope(alpha)?,
            ),
            None => (None, None),
        };
        rows.push(EdgeLengthRow {
            alpha,
            r_alpha,
            e_alpha,
            e_alpha_predicted: pred,
            log_slope_predicted: slope,
        });
    }
    Ok(EdgeLengthCurve { rows })
}

/// Histogram of final in-degrees: `counts[k]` is the number of vertices of
/// final in-degree `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeHistogram {
    pub counts: BTreeMap<u32, u64>,
}

impl DegreeHistogram {
    pub fn total_vertices(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn total_edges(&self) -> u64 {
        self.counts.iter().map(|(&k, &c)| k as u64 * c).sum()
    }

    /// Number of vertices with in-degree at least `k`.
    pub fn ccdf(&self, k: u32) -> u64 {
        self.counts.range(k..).map(|(_, &c)| c).sum()
    }
}

pub fn degree_histogram(g: &SpaGraph) -> DegreeHistogram {
    let mut counts = BTreeMap::new();
    for &d in &g.in_degree {
        *counts.entry(d).or_insert(0u64) += 1;
    }
    DegreeHistogram { counts }
}

/// Least-squares slope of log complementary cumulative count against log k
/// over `k_min..=k_max`, reported as a power-law exponent estimate
/// (one minus the fitted slope, the slope being negative).
pub fn powerlaw_fit(h: &DegreeHistogram, k_min: u32, k_max: u32) -> Result<f64> {
    if k_min < 1 || k_min >= k_max {
        return Err(SpaError::InvalidArgument(format!(
            "fit range needs 1 <= k_min < k_max, got [{k_min}, {k_max}]"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in k_min..=k_max {
        let c = h.ccdf(k);
        if c > 0 {
            xs.push((k as f64).ln());
            ys.push((c as f64).ln());
        }
    }
    if xs.len() < 2 {
        return Err(SpaError::InvalidArgument(format!(
            "fit range [{k_min}, {k_max}] has fewer than two populated points"
        )));
    }
    let slope = least_squares_slope(&xs, &ys);
    Ok(1.0 - slope)
}

/// Ordinary least-squares slope of y against x.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Distribution of relative deviations of recorded trajectories from the
/// concentrated curve `k (t/n)^{pA1}`.
#[derive(Debug, Clone)]
pub struct TrajectoryReport {
    /// Sorted ascending.
    pub deviations: Vec<f64>,
    pub vertices_considered: u64,
}

impl TrajectoryReport {
    pub fn len(&self) -> usize {
        self.deviations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deviations.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.deviations.last().copied().unwrap_or(0.0)
    }

    pub fn median(&self) -> f64 {
        self.percentile(0.5)
    }

    /// Nearest-rank percentile, `q` in (0, 1].
    pub fn percentile(&self, q: f64) -> f64 {
        if self.deviations.is_empty() {
            return 0.0;
        }
        let rank = (q * self.deviations.len() as f64).ceil() as usize;
        self.deviations[rank.clamp(1, self.deviations.len()) - 1]
    }
}

/// Compares every snapshot at `t >= min_t` against the concentrated
/// trajectory for every vertex of final in-degree at least `degree_floor`.
pub fn trajectory_check(
    g: &SpaGraph,
    ctx: &TheoryContext,
    degree_floor: u32,
    min_t: u64,
) -> Result<TrajectoryReport> {
    if degree_floor < 1 {
        return Err(SpaError::InvalidArgument(
            "degree floor must be at least 1".into(),
        ));
    }
    if g.snapshots.is_empty() {
        return Err(SpaError::InvalidArgument(
            "trajectory check needs recorded snapshots".into(),
        ));
    }
    let n = g.n() as f64;
    let pa1 = ctx.pa1();
    let mut deviations = Vec::new();
    let mut vertices = 0u64;
    for (idx, &k) in g.in_degree.iter().enumerate() {
        if k < degree_floor {
            continue;
        }
        vertices += 1;
        for snap in &g.snapshots {
            if snap.t < min_t {
                continue;
            }
            let expected = k as f64 * (snap.t as f64 / n).powf(pa1);
            let actual = snap.in_degree[idx] as f64;
            deviations.push((actual - expected).abs() / expected);
        }
    }
    deviations.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(TrajectoryReport {
        deviations,
        vertices_considered: vertices,
    })
}
