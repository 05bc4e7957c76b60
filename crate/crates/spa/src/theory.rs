//! Closed-form predictions for the SPA process: expected degree growth, the
//! final-degree curve and its inverse, degree-distribution coefficients,
//! common-neighbour counts with the sphere-overlap window, distance
//! estimators, and the long-edge distribution.
//!
//! Everything here is a deterministic pure function of the model parameters;
//! products over long index ranges are evaluated as sums of logarithms.

use crate::model::ModelParams;
use crate::{Result, SpaError};
use statrs::function::gamma::ln_gamma;
use std::fmt;

/// Default weight of the upper-bound term in the adjusted distance
/// estimator.
pub const DEFAULT_COCITATION_WEIGHT: f64 = 0.005;

/// Outcome of classifying a vertex pair for distance estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Spheres separated for essentially the whole process; common
    /// neighbours only bound the distance from below.
    TooFar,
    /// The smaller sphere stays inside the larger one; common neighbours
    /// only bound the distance from above.
    TooClose,
    /// The spheres separate mid-process and the distance can be estimated.
    Estimable,
}

impl Regime {
    pub fn token(self) -> &'static str {
        match self {
            Regime::TooFar => "TooFar",
            Regime::TooClose => "TooClose",
            Regime::Estimable => "Estimable",
        }
    }

    pub fn parse(s: &str) -> Result<Regime> {
        match s {
            "TooFar" => Ok(Regime::TooFar),
            "TooClose" => Ok(Regime::TooClose),
            "Estimable" => Ok(Regime::Estimable),
            other => Err(SpaError::InvalidArgument(format!(
                "unknown regime token {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Nominal birth times, separation and sphere-overlap window of a vertex
/// pair. `t_minus` is the first time the smaller sphere touches the larger
/// one's boundary from inside; `t_plus` the last time they overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub i_k: f64,
    pub i_ell: f64,
    pub d: f64,
    pub t_minus: f64,
    pub t_plus: f64,
}

/// Model parameters plus the derived quantities every formula needs.
#[derive(Debug, Clone)]
pub struct TheoryContext {
    params: ModelParams,
    pa1: f64,
    cm: f64,
    n: f64,
}

impl TheoryContext {
    /// Requires `0 < p*A1 < 1`: with `p = 0` none of the predictions are
    /// meaningful and most exponents degenerate.
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let pa1 = params.pa1();
        if pa1 <= 0.0 {
            return Err(SpaError::Constraint(
                "theory context requires p*A1 > 0".into(),
            ));
        }
        Ok(TheoryContext {
            params: params.clone(),
            pa1,
            cm: params.metric.unit_ball_volume(),
            n: params.n as f64,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn pa1(&self) -> f64 {
        self.pa1
    }

    /// Concrete stand-in for the asymptotic threshold "omega log n" used by
    /// regime classification and trajectory checks: `20 ln n`.
    pub fn default_threshold(&self) -> f64 {
        20.0 * self.n.ln()
    }

    /// Exact expectation of the in-degree of the vertex born at `i` at time
    /// `t`, under the uncapped sphere-volume recurrence:
    /// `(A2/A1) * (prod_{j=i}^{t-1} (1 + pA1/j) - 1)`.
    pub fn expected_indegree_exact(&self, i: u64, t: u64) -> Result<f64> {
        if i < 1 {
            return Err(SpaError::InvalidArgument("birth time must be >= 1".into()));
        }
        if i > t {
            return Err(SpaError::InvalidArgument(format!(
                "birth time {i} after evaluation time {t}"
            )));
        }
        let mut log_prod = 0.0;
        for j in i..t {
            log_prod += (self.pa1 / j as f64).ln_1p();
        }
        Ok(self.params.a2 / self.params.a1 * log_prod.exp_m1())
    }

    /// Asymptotic form of the same expectation:
    /// `(A2/A1) * ((t/i)^{pA1} - 1)`.
    pub fn expected_indegree_asymptotic(&self, i: f64, t: f64) -> Result<f64> {
        if !(i > 0.0 && t > 0.0) {
            return Err(SpaError::InvalidArgument(
                "times must be strictly positive".into(),
            ));
        }
        Ok(self.params.a2 / self.params.a1 * ((t / i).powf(self.pa1) - 1.0))
    }

    /// The curve `f(i) = (A2/A1) (n/i)^{pA1}`: expected in-degree at the end
    /// of the process of a vertex born at time `i`.
    pub fn expected_final_indegree(&self, i: f64) -> Result<f64> {
        if !(i > 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "birth time must be strictly positive, got {i}"
            )));
        }
        Ok(self.params.a2 / self.params.a1 * (self.n / i).powf(self.pa1))
    }

    /// Inverse of `expected_final_indegree`: the nominal birth time
    /// `f^{-1}(k) = n (A2/(A1 k))^{1/pA1}` of a vertex with final in-degree
    /// `k`.
    pub fn nominal_birth_time(&self, k: f64) -> Result<f64> {
        if !(k > 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "degree must be strictly positive, got {k}"
            )));
        }
        Ok(self.n * (self.params.a2 / (self.params.a1 * k)).powf(1.0 / self.pa1))
    }

    /// Concentrated degree trajectory `k (t/n)^{pA1}` of a vertex with final
    /// in-degree `k`.
    pub fn degree_trajectory(&self, k: f64, t: f64) -> Result<f64> {
        if t as u64 > self.params.n {
            return Err(SpaError::InvalidArgument(format!(
                "trajectory time {t} beyond the end of the process n = {}",
                self.params.n
            )));
        }
        Ok(k * (t / self.n).powf(self.pa1))
    }

    /// The time `t_k = f^{-1}(A2 k / (A1 threshold))` from which the
    /// trajectory of a final-degree-`k` vertex is concentrated, given an
    /// explicit positive `threshold` standing in for "omega log n". May
    /// exceed `n`, in which case the concentration claim is empty for that
    /// vertex.
    pub fn concentration_start_time(&self, k: f64, threshold: f64) -> Result<f64> {
        if !(threshold > 0.0) {
            return Err(SpaError::InvalidArgument(
                "threshold must be strictly positive".into(),
            ));
        }
        self.nominal_birth_time(self.params.a2 * k / (self.params.a1 * threshold))
    }

    /// Exact degree-distribution coefficient `c_k` (fraction of vertices of
    /// final in-degree `k`): `c_0 = 1/(1+pA2)` and for `k >= 1`
    /// `c_k = p^k/(1+k pA1+pA2) * prod_{j<k} (jA1+A2)/(1+j pA1+pA2)`.
    pub fn ck_exact(&self, k: u64) -> f64 {
        let mut series = self.ck_exact_series();
        let mut last = series.next_value();
        for _ in 0..k {
            last = series.next_value();
        }
        last
    }

    /// Incremental evaluator yielding `c_0, c_1, ...` in order; identical
    /// floating-point results to repeated `ck_exact` calls.
    pub fn ck_exact_series(&self) -> CkExactSeries<'_> {
        CkExactSeries {
            ctx: self,
            k: 0,
            log_acc: 0.0,
        }
    }

    /// Asymptotic coefficient `c k^{-1-1/pA1}` from the Stirling limit of
    /// `ck_exact`.
    pub fn ck_asymptotic(&self, k: f64) -> Result<f64> {
        if !(k >= 1.0) {
            return Err(SpaError::InvalidArgument(
                "asymptotic c_k needs k >= 1".into(),
            ));
        }
        Ok(self.powerlaw_constant() * k.powf(-1.0 - 1.0 / self.pa1))
    }

    /// The constant `c = (1/pA1) Gamma(A2/A1 + 1/pA1) / Gamma(A2/A1)`.
    pub fn powerlaw_constant(&self) -> f64 {
        let ratio = self.params.a2 / self.params.a1;
        (ln_gamma(ratio + 1.0 / self.pa1) - ln_gamma(ratio)).exp() / self.pa1
    }

    /// Power-law exponent of the degree distribution, `1 + 1/(pA1)`.
    pub fn powerlaw_exponent(&self) -> f64 {
        1.0 + 1.0 / self.pa1
    }

    /// Asymptotic expected number of edges, `p A2 n / (1 - pA1)`.
    pub fn expected_total_edges(&self) -> f64 {
        self.params.p * self.params.a2 * self.n / (1.0 - self.pa1)
    }

    /// Sphere-overlap window of two vertices with nominal birth times
    /// `i_k <= i_ell` at distance `d`, using the concentrated radii:
    /// `t∓ = (A2/c_m)^{1/(1-pA1)} i_k^{-pA1/(1-pA1)} d^{-m/(1-pA1)}
    ///       (1 ∓ rho)^{m/(1-pA1)}` with `rho = (i_k/i_ell)^{pA1/m}`.
    pub fn overlap_window(&self, i_k: f64, i_ell: f64, d: f64) -> Result<PairGeometry> {
        if !(i_k > 0.0 && i_ell > 0.0) {
            return Err(SpaError::InvalidArgument(
                "birth times must be strictly positive".into(),
            ));
        }
        if i_k > i_ell {
            return Err(SpaError::InvalidArgument(format!(
                "expected i_k <= i_ell, got {i_k} > {i_ell}"
            )));
        }
        if !(d > 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "overlap window is singular at separation d = {d}"
            )));
        }
        let m = self.params.metric.m() as f64;
        let q = 1.0 - self.pa1;
        let rho = (i_k / i_ell).powf(self.pa1 / m);
        let base = (self.params.a2 / self.cm).powf(1.0 / q)
            * i_k.powf(-self.pa1 / q)
            * d.powf(-m / q);
        Ok(PairGeometry {
            i_k,
            i_ell,
            d,
            t_minus: base * (1.0 - rho).powf(m / q),
            t_plus: base * (1.0 + rho).powf(m / q),
        })
    }

    /// Predicted number of common in-neighbours of an estimable pair:
    /// `C i_k^{-(pA1)^2/(1-pA1)} i_ell^{-pA1} d^{-m pA1/(1-pA1)}` with
    /// `C = p A1^{-1} A2^{1/(1-pA1)} c_m^{-pA1/(1-pA1)}`. The bounded
    /// multiplicative correction in `(i_k/i_ell)^{pA1/m}` is ignored here;
    /// the adjusted estimator absorbs it.
    pub fn common_neighbours_predicted(&self, i_k: f64, i_ell: f64, d: f64) -> Result<f64> {
        if !(i_k > 0.0 && i_ell > 0.0) {
            return Err(SpaError::InvalidArgument(
                "birth times must be strictly positive".into(),
            ));
        }
        if !(d > 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "common-neighbour prediction needs d > 0, got {d}"
            )));
        }
        let m = self.params.metric.m() as f64;
        let q = 1.0 - self.pa1;
        let c = self.params.p / self.params.a1
            * self.params.a2.powf(1.0 / q)
            * self.cm.powf(-self.pa1 / q);
        Ok(c * i_k.powf(-self.pa1 * self.pa1 / q) * i_ell.powf(-self.pa1)
            * d.powf(-m * self.pa1 / q))
    }

    /// Basic distance estimator, the inverse of
    /// `common_neighbours_predicted` in `d`:
    /// `C' i_k^{-pA1/m} i_ell^{-(1-pA1)/m} N^{-(1-pA1)/(m pA1)}` with
    /// `C' = (p/A1)^{(1-pA1)/(m pA1)} A2^{1/(m pA1)} c_m^{-1/m}`.
    pub fn distance_estimate_basic(&self, cn: f64, i_k: f64, i_ell: f64) -> Result<f64> {
        if !(cn > 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "distance estimate needs a positive common-neighbour count, got {cn}"
            )));
        }
        if !(i_k > 0.0 && i_ell > 0.0) {
            return Err(SpaError::InvalidArgument(
                "birth times must be strictly positive".into(),
            ));
        }
        let m = self.params.metric.m() as f64;
        let q = 1.0 - self.pa1;
        let c_prime = (self.params.p / self.params.a1).powf(q / (m * self.pa1))
            * self.params.a2.powf(1.0 / (m * self.pa1))
            * self.cm.powf(-1.0 / m);
        Ok(c_prime
            * i_k.powf(-self.pa1 / m)
            * i_ell.powf(-q / m)
            * cn.powf(-q / (m * self.pa1)))
    }

    /// Adjusted distance estimator: models the expected common-neighbour
    /// count as `(1-c) L(d) + c U(d)` where `L`/`U` are the lower and upper
    /// bounds `p * deg(v_ell, t∓)` from the overlap window. Both scale as
    /// `d^{-m pA1/(1-pA1)}`, so the solution is closed-form.
    pub fn distance_estimate_adjusted(
        &self,
        cn: f64,
        i_k: f64,
        i_ell: f64,
        c_weight: f64,
    ) -> Result<f64> {
        if !(cn > 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "distance estimate needs a positive common-neighbour count, got {cn}"
            )));
        }
        if !(0.0..=1.0).contains(&c_weight) {
            return Err(SpaError::InvalidArgument(format!(
                "convex weight must lie in [0,1], got {c_weight}"
            )));
        }
        if i_k > i_ell {
            return Err(SpaError::InvalidArgument(format!(
                "expected i_k <= i_ell, got {i_k} > {i_ell}"
            )));
        }
        if !(i_k > 0.0) {
            return Err(SpaError::InvalidArgument(
                "birth times must be strictly positive".into(),
            ));
        }
        let m = self.params.metric.m() as f64;
        let q = 1.0 - self.pa1;
        let rho = (i_k / i_ell).powf(self.pa1 / m);
        // t∓ = K (1∓rho)^{m/q} d^{-m/q}, so p (A2/A1) (t∓/i_ell)^{pA1}
        //    = beta∓ d^{-m pA1/q} with the d-independent prefactors below.
        let k_factor = (self.params.a2 / self.cm).powf(1.0 / q) * i_k.powf(-self.pa1 / q);
        let shared =
            self.params.p * self.params.a2 / self.params.a1 * i_ell.powf(-self.pa1)
                * k_factor.powf(self.pa1);
        let beta_minus = shared * (1.0 - rho).powf(m * self.pa1 / q);
        let beta_plus = shared * (1.0 + rho).powf(m * self.pa1 / q);
        let beta = (1.0 - c_weight) * beta_minus + c_weight * beta_plus;
        Ok((beta / cn).powf(q / (m * self.pa1)))
    }

    /// Classifies a pair with final degrees `k >= ell` at distance `d`.
    /// `TooClose` wins ties on its boundary, fixed for determinism.
    pub fn classify_pair(&self, k: f64, ell: f64, d: f64, threshold: f64) -> Result<Regime> {
        if !(k >= ell && ell >= 1.0) {
            return Err(SpaError::InvalidArgument(format!(
                "classification needs k >= ell >= 1, got k = {k}, ell = {ell}"
            )));
        }
        if !(threshold > 0.0) {
            return Err(SpaError::InvalidArgument(
                "threshold must be strictly positive".into(),
            ));
        }
        if !(d >= 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "distance must be non-negative, got {d}"
            )));
        }
        let m = self.params.metric.m() as f64;
        let close_bound = ((self.params.a1 * k + self.params.a2) / (self.cm * self.n))
            .powf(1.0 / m)
            - ((self.params.a1 * ell + self.params.a2) / (self.cm * self.n)).powf(1.0 / m);
        if d <= close_bound {
            return Ok(Regime::TooClose);
        }
        let t_sep = self.nominal_birth_time(ell / threshold)?;
        let far_bound = (threshold / t_sep).powf(1.0 / m);
        if d >= far_bound {
            Ok(Regime::TooFar)
        } else {
            Ok(Regime::Estimable)
        }
    }

    /// Long-edge threshold radius `r_alpha = (n^{-alpha}/c_m)^{1/m}`.
    pub fn long_edge_radius(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        Ok((self.n.powf(-alpha) / self.cm).powf(1.0 / self.params.metric.m() as f64))
    }

    /// Predicted number of edges of length at least `r_alpha`, where a
    /// concentrated prediction exists: the total edge count for `alpha > 1`,
    /// and `C n^{2 - 1/pA1 + alpha (1-pA1)/pA1}` on the precise mid-range
    /// branch, which requires `1/2 < pA1 < 1` and
    /// `1 - pA1/(4 pA1 + 2) < alpha < 1`. Elsewhere concentration fails and
    /// `None` is returned.
    pub fn long_edge_count_predicted(&self, alpha: f64) -> Result<Option<f64>> {
        if !(alpha >= 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        if alpha > 1.0 {
            return Ok(Some(self.expected_total_edges()));
        }
        let pa1 = self.pa1;
        if !(pa1 > 0.5 && pa1 < 1.0) {
            return Ok(None);
        }
        let lower = 1.0 - pa1 / (4.0 * pa1 + 2.0);
        if !(alpha > lower && alpha < 1.0) {
            return Ok(None);
        }
        let exponent = 2.0 - 1.0 / pa1 + alpha * (1.0 - pa1) / pa1;
        Ok(Some(self.midrange_constant() * self.n.powf(exponent)))
    }

    /// The full mid-range constant of the long-edge count.
    pub fn midrange_constant(&self) -> f64 {
        let pa1 = self.pa1;
        let q = 1.0 - pa1;
        let ratio = self.params.a2 / self.params.a1;
        let gamma_factor = (ln_gamma(ratio + 1.0 / pa1) - ln_gamma(ratio)).exp();
        let bracket = q.powi(3) / (2.0 * pa1 - 1.0)
            * self.params.a1.powf((1.0 - 2.0 * pa1) / (q * pa1))
            + 1.0
            - pa1 * q;
        gamma_factor * self.params.a1.powf(pa1 / q) / q * bracket
    }

    /// `log E(e(alpha)) / log n`: the logarithmic growth rate of the
    /// expected long-edge count, defined for every `alpha >= 0` in both
    /// `pA1` regimes. At `pA1 = 1/2` exactly the theory excludes the
    /// crossover and `None` is returned.
    pub fn long_edge_log_slope(&self, alpha: f64) -> Result<Option<f64>> {
        if !(alpha >= 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        let pa1 = self.pa1;
        if pa1 == 0.5 {
            return Ok(None);
        }
        let slope = if alpha >= 1.0 {
            1.0
        } else if pa1 < 0.5 {
            alpha
        } else if alpha > 1.0 - pa1 {
            2.0 - 1.0 / pa1 + alpha * (1.0 - pa1) / pa1
        } else {
            alpha * pa1 / (1.0 - pa1)
        };
        Ok(Some(slope))
    }
}

/// Incremental evaluator of the exact `c_k` sequence.
pub struct CkExactSeries<'a> {
    ctx: &'a TheoryContext,
    k: u64,
    log_acc: f64,
}

impl CkExactSeries<'_> {
    /// Returns `c_k` for the next `k` (starting at 0) and advances.
    pub fn next_value(&mut self) -> f64 {
        let p = self.ctx.params.p;
        let pa1 = self.ctx.pa1;
        let pa2 = p * self.ctx.params.a2;
        let k = self.k;
        let value = if k == 0 {
            1.0 / (1.0 + pa2)
        } else {
            (self.log_acc + (k as f64) * p.ln() - (1.0 + k as f64 * pa1 + pa2).ln()).exp()
        };
        // extend prod_{j<=k} (jA1+A2)/(1+j pA1+pA2) for the next call
        let j = k as f64;
        self.log_acc += (j * self.ctx.params.a1 + self.ctx.params.a2).ln()
            - (1.0 + j * pa1 + pa2).ln();
        self.k += 1;
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Norm, TorusMetric};

    fn ctx(n: u64, p: f64, a1: f64, a2: f64, m: u32, norm: Norm) -> TheoryContext {
        let metric = TorusMetric::new(m, norm).unwrap();
        let params = ModelParams::new(n, p, a1, a2, metric, 0).unwrap();
        TheoryContext::new(&params).unwrap()
    }

    fn paper() -> TheoryContext {
        ctx(100_000, 0.95, 1.0, 1.0, 2, Norm::L2)
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn rejects_zero_pa1() {
        let metric = TorusMetric::new(2, Norm::L2).unwrap();
        let params = ModelParams::new(100, 0.0, 1.0, 1.0, metric, 0).unwrap();
        assert!(TheoryContext::new(&params).is_err());
    }

    #[test]
    fn expected_indegree_exact_values() {
        let c = paper();
        assert_eq!(c.expected_indegree_exact(100, 100).unwrap(), 0.0);
        // one step: p*A2/i
        let one = c.expected_indegree_exact(100, 101).unwrap();
        assert!(rel_err(one, 0.0095) < 1e-12, "one = {one}");
        // frozen from an independent high-precision product evaluation
        let full = c.expected_indegree_exact(100, 100_000).unwrap();
        assert!(rel_err(full, 707.1135209032625) < 1e-9, "full = {full}");
        // asymptotic form agrees to within its o(1) error at this scale
        let asym = c.expected_indegree_asymptotic(100.0, 100_000.0).unwrap();
        assert!(rel_err(asym, 706.9457843841379) < 1e-12, "asym = {asym}");
        assert!(rel_err(full, asym) < 1e-3);
        assert!(c.expected_indegree_exact(101, 100).is_err());
    }

    #[test]
    fn exact_to_asymptotic_ratio_tends_to_one() {
        let c = paper();
        // t/i fixed at 100, i growing: the ratio approaches 1 monotonically
        let mut last = f64::INFINITY;
        for i in [10u64, 100, 1000] {
            let exact = c.expected_indegree_exact(i, i * 100).unwrap();
            let asym = c.expected_indegree_asymptotic(i as f64, (i * 100) as f64).unwrap();
            let ratio = exact / asym;
            assert!(ratio > 1.0 && ratio < last, "i = {i}, ratio = {ratio}");
            last = ratio;
        }
        assert!(last - 1.0 < 2e-3);
    }

    #[test]
    fn final_indegree_curve_and_inverse() {
        let c = paper();
        // f(n) = A2/A1
        assert!(rel_err(c.expected_final_indegree(100_000.0).unwrap(), 1.0) < 1e-12);
        // frozen: 1000^0.95
        let f100 = c.expected_final_indegree(100.0).unwrap();
        assert!(rel_err(f100, 707.9457843841379) < 1e-12, "f100 = {f100}");
        for i in [1e-4, 1.0, 17.0, 1e4, 1e8] {
            let k = c.expected_final_indegree(i).unwrap();
            let back = c.nominal_birth_time(k).unwrap();
            assert!(rel_err(back, i) < 1e-10, "i = {i}, back = {back}");
        }
        assert!(c.expected_final_indegree(0.0).is_err());
        assert!(c.nominal_birth_time(-1.0).is_err());
    }

    #[test]
    fn degree_trajectory_values() {
        let c = paper();
        assert_eq!(c.degree_trajectory(1000.0, 100_000.0).unwrap(), 1000.0);
        let half = c.degree_trajectory(1000.0, 50_000.0).unwrap();
        assert!(rel_err(half, 517.6324619206888) < 1e-12, "half = {half}");
        // algebraic identity with the final-degree curve
        let k = 1000.0;
        let i = c.nominal_birth_time(k).unwrap();
        for t in [1000.0, 25_000.0, 99_000.0] {
            let via_curve = c.params.a2 / c.params.a1 * (t / i).powf(c.pa1());
            let direct = c.degree_trajectory(k, t).unwrap();
            assert!(rel_err(via_curve, direct) < 1e-10);
        }
        assert!(c.degree_trajectory(10.0, 100_001.0).is_err());
    }

    #[test]
    fn concentration_start_time_matches_closed_form() {
        let c = paper();
        let threshold = c.default_threshold();
        let t_k = c.concentration_start_time(1000.0, threshold).unwrap();
        // simplifies to n (threshold/k)^{1/pA1}
        let direct = 100_000.0 * (threshold / 1000.0).powf(1.0 / 0.95);
        assert!(rel_err(t_k, direct) < 1e-12);
    }

    #[test]
    fn ck_exact_small_values() {
        let c = paper();
        let c0 = c.ck_exact(0);
        assert!(rel_err(c0, 1.0 / 1.95) < 1e-15, "c0 = {c0}");
        let c1 = c.ck_exact(1);
        assert!(rel_err(c1, 0.16799292661361627) < 1e-12, "c1 = {c1}");
        // series agrees with individual evaluation bit for bit
        let mut series = c.ck_exact_series();
        for k in 0..50u64 {
            assert_eq!(series.next_value(), c.ck_exact(k), "k = {k}");
        }
        // valid sub-probability values
        let mut sum = 0.0;
        for k in 0..200u64 {
            let v = c.ck_exact(k);
            assert!(v > 0.0 && v < 1.0);
            sum += v;
        }
        assert!(sum < 1.0 + 1e-9);
    }

    #[test]
    fn ck_asymptotic_constant_and_exponent() {
        let c = paper();
        assert!(rel_err(c.powerlaw_exponent(), 2.0526315789473686) < 1e-12);
        assert!(rel_err(c.powerlaw_constant(), 1.0772685287676027) < 1e-12);
        // monotone decreasing
        assert!(c.ck_asymptotic(10.0).unwrap() > c.ck_asymptotic(11.0).unwrap());
        // exact/asymptotic ratio within 5% at k = 10^4 across pA1 values
        for p in [0.3, 0.5, 0.8, 0.95] {
            let c = ctx(100_000, p, 1.0, 1.0, 2, Norm::L2);
            let ratio = c.ck_exact(10_000) / c.ck_asymptotic(10_000.0).unwrap();
            assert!((ratio - 1.0).abs() < 0.05, "pA1 = {p}: ratio = {ratio}");
        }
    }

    #[test]
    fn expected_total_edges_value() {
        let c = paper();
        assert!(rel_err(c.expected_total_edges(), 1.9e6) < 1e-12);
        // scales linearly in n
        let c2 = ctx(200_000, 0.95, 1.0, 1.0, 2, Norm::L2);
        assert!(rel_err(c2.expected_total_edges(), 3.8e6) < 1e-12);
    }

    #[test]
    fn overlap_window_against_root_solve() {
        let c = paper();
        // concentrated radius of a vertex with nominal birth time i at time t
        let radius = |i: f64, t: f64| -> f64 {
            let vol = c.params.a2 * t.powf(c.pa1() - 1.0) * i.powf(-c.pa1());
            (vol / c.params.metric.unit_ball_volume()).powf(0.5)
        };
        let bisect = |f: &dyn Fn(f64) -> f64| -> f64 {
            // f is decreasing in log t; the pA1 = 0.95 exponents push roots
            // far outside any physical range, so bracket very wide
            let (mut lo, mut hi) = (1e-60f64.ln(), 1e80f64.ln());
            for _ in 0..300 {
                let mid = 0.5 * (lo + hi);
                if f(mid.exp()) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (0.5 * (lo + hi)).exp()
        };
        for (i_k, i_ell, d) in [(144.0, 787.0, 0.02), (50.0, 5000.0, 0.005), (10.0, 11.0, 0.07)] {
            let w = c.overlap_window(i_k, i_ell, d).unwrap();
            let t_minus = bisect(&|t| radius(i_k, t) - radius(i_ell, t) - d);
            let t_plus = bisect(&|t| radius(i_k, t) + radius(i_ell, t) - d);
            assert!(rel_err(w.t_minus, t_minus) < 1e-6, "t- {} vs {}", w.t_minus, t_minus);
            assert!(rel_err(w.t_plus, t_plus) < 1e-6, "t+ {} vs {}", w.t_plus, t_plus);
            assert!(w.t_minus <= w.t_plus);
        }
        // equal birth times degenerate the lower bound
        let w = c.overlap_window(100.0, 100.0, 0.01).unwrap();
        assert_eq!(w.t_minus, 0.0);
        // algebraic ratio
        let w = c.overlap_window(144.0, 787.0, 0.02).unwrap();
        let rho = (144.0f64 / 787.0).powf(0.95 / 2.0);
        let expect = ((1.0 + rho) / (1.0 - rho)).powf(2.0 / 0.05);
        assert!(rel_err(w.t_plus / w.t_minus, expect) < 1e-9);
        assert!(c.overlap_window(100.0, 787.0, 0.0).is_err());
    }

    #[test]
    fn cn_prediction_and_basic_estimate_are_inverses() {
        let c = paper();
        for (i_k, i_ell, d) in [(144.0, 787.0, 0.02), (10.0, 2000.0, 0.1), (5.0, 5.0, 0.33)] {
            let cn = c.common_neighbours_predicted(i_k, i_ell, d).unwrap();
            let back = c.distance_estimate_basic(cn, i_k, i_ell).unwrap();
            assert!(rel_err(back, d) < 1e-9, "d = {d}, back = {back}");
        }
        // halving d multiplies cn by 2^{m pA1/(1-pA1)}
        let cn1 = c.common_neighbours_predicted(144.0, 787.0, 0.02).unwrap();
        let cn2 = c.common_neighbours_predicted(144.0, 787.0, 0.01).unwrap();
        assert!(rel_err(cn2 / cn1, 2.0f64.powf(2.0 * 0.95 / 0.05)) < 1e-9);
        // frozen constant check
        let cn = c.common_neighbours_predicted(1.0, 1.0, 1.0).unwrap();
        assert!(rel_err(cn, 3.4031102892586702e-10) < 1e-12, "C = {cn}");
        // estimator decreases in N
        let d1 = c.distance_estimate_basic(100.0, 144.0, 787.0).unwrap();
        let d2 = c.distance_estimate_basic(200.0, 144.0, 787.0).unwrap();
        assert!(d2 < d1);
        assert!(c.common_neighbours_predicted(1.0, 1.0, 0.0).is_err());
        assert!(c.distance_estimate_basic(0.0, 144.0, 787.0).is_err());
    }

    #[test]
    fn cn_prediction_equals_window_form() {
        // C-form equals p (A2/A1) (t_geom/i_ell)^{pA1} with the (1∓rho)
        // factor dropped from the window time
        let c = paper();
        let (i_k, i_ell, d) = (144.0f64, 787.0f64, 0.02f64);
        let q = 1.0 - c.pa1();
        let t_geom = (1.0 / c.params.metric.unit_ball_volume()).powf(1.0 / q)
            * i_k.powf(-c.pa1() / q)
            * d.powf(-2.0 / q);
        let via_window = c.params.p * (t_geom / i_ell).powf(c.pa1());
        let direct = c.common_neighbours_predicted(i_k, i_ell, d).unwrap();
        assert!(rel_err(via_window, direct) < 1e-9);
    }

    #[test]
    fn adjusted_estimate_against_bisection() {
        let c = paper();
        let deg_at = |i_ell: f64, t: f64| c.params.p * (t / i_ell).powf(c.pa1());
        for (i_k, i_ell, n_obs, w) in [
            (144.0, 787.0, 60.0, 0.005),
            (144.0, 787.0, 60.0, 0.5),
            (20.0, 5000.0, 33.0, 0.005),
        ] {
            let closed = c.distance_estimate_adjusted(n_obs, i_k, i_ell, w).unwrap();
            // bisection on (1-c) L(d) + c U(d) - N, decreasing in d
            let f = |d: f64| {
                let win = c.overlap_window(i_k, i_ell, d).unwrap();
                (1.0 - w) * deg_at(i_ell, win.t_minus) + w * deg_at(i_ell, win.t_plus) - n_obs
            };
            let (mut lo, mut hi) = (1e-12f64.ln(), 10.0f64.ln());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid.exp()) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = (0.5 * (lo + hi)).exp();
            assert!(rel_err(closed, root) < 1e-9, "closed = {closed}, root = {root}");
        }
    }

    #[test]
    fn adjusted_estimate_reduces_to_basic_when_rho_vanishes() {
        let c = paper();
        // i_k/i_ell tiny so rho is negligible; any weight gives the basic value
        let (i_k, i_ell, n_obs) = (1e-9, 1e9, 40.0);
        let basic = c.distance_estimate_basic(n_obs, i_k, i_ell).unwrap();
        for w in [0.0, 0.5, 1.0] {
            let adj = c.distance_estimate_adjusted(n_obs, i_k, i_ell, w).unwrap();
            assert!(rel_err(adj, basic) < 1e-6, "w = {w}");
        }
        assert!(c.distance_estimate_adjusted(40.0, 1.0, 2.0, 1.5).is_err());
    }

    #[test]
    fn classify_pair_cases() {
        let c = paper();
        let thr = c.default_threshold();
        // d = 0 is always TooClose
        assert_eq!(c.classify_pair(500.0, 100.0, 0.0, thr).unwrap(), Regime::TooClose);
        // max torus distance with small degrees is TooFar
        let far = c.classify_pair(25.0, 20.0, 0.707, thr).unwrap();
        assert_eq!(far, Regime::TooFar);
        // boundary of the close condition is inclusive
        let close_bound = (501.0f64 / (std::f64::consts::PI * 1e5)).sqrt()
            - (101.0f64 / (std::f64::consts::PI * 1e5)).sqrt();
        assert_eq!(
            c.classify_pair(500.0, 100.0, close_bound, thr).unwrap(),
            Regime::TooClose
        );
        // just beyond it, but well before the far bound: estimable
        assert_eq!(
            c.classify_pair(500.0, 100.0, close_bound * 1.05, thr).unwrap(),
            Regime::Estimable
        );
        assert!(c.classify_pair(1.0, 2.0, 0.1, thr).is_err());
    }

    #[test]
    fn long_edge_radius_values() {
        let c = paper();
        let r1 = c.long_edge_radius(1.0).unwrap();
        assert!(rel_err(r1, 0.0017841241161527711) < 1e-12, "r1 = {r1}");
        let r0 = c.long_edge_radius(0.0).unwrap();
        assert!(rel_err(r0, (1.0 / std::f64::consts::PI).sqrt()) < 1e-12);
        assert!(c.long_edge_radius(-0.5).is_err());
    }

    #[test]
    fn long_edge_count_branches() {
        let c8 = ctx(100_000, 0.8, 1.0, 1.0, 2, Norm::L2);
        // alpha > 1: the total edge count
        assert_eq!(
            c8.long_edge_count_predicted(1.2).unwrap().unwrap(),
            c8.expected_total_edges()
        );
        // precise mid-range branch: frozen constant and value
        assert!(rel_err(c8.midrange_constant(), 4.834146544295878) < 1e-9);
        let v = c8.long_edge_count_predicted(0.9).unwrap().unwrap();
        assert!(rel_err(v, 362509.85006319807) < 1e-9, "v = {v}");
        // exponent spot value: 2 - 1.25 + 0.9*0.25 = 0.975
        let slope = c8.long_edge_log_slope(0.9).unwrap().unwrap();
        assert!(rel_err(slope, 0.975) < 1e-12);
        // gap regime: no concentrated prediction
        let lower = 1.0 - 0.8 / (4.0 * 0.8 + 2.0);
        assert!(c8.long_edge_count_predicted(lower).unwrap().is_none());
        assert!(c8.long_edge_count_predicted(0.15).unwrap().is_none());
        // pA1 < 1/2 has no precise branch below alpha = 1
        let c3 = ctx(100_000, 0.3, 1.0, 1.0, 2, Norm::L2);
        assert!(c3.long_edge_count_predicted(0.9).unwrap().is_none());
        assert_eq!(
            c3.long_edge_count_predicted(1.5).unwrap().unwrap(),
            c3.expected_total_edges()
        );
    }

    #[test]
    fn long_edge_log_slope_branches() {
        let c8 = ctx(100_000, 0.8, 1.0, 1.0, 2, Norm::L2);
        assert_eq!(c8.long_edge_log_slope(1.3).unwrap().unwrap(), 1.0);
        // tail branch: alpha * pA1/(1-pA1)
        let tail = c8.long_edge_log_slope(0.1).unwrap().unwrap();
        assert!(rel_err(tail, 0.1 * 4.0) < 1e-12);
        // continuity at alpha = 1 - pA1 between tail and mid-range
        let a = 1.0 - 0.8;
        let t = c8.long_edge_log_slope(a).unwrap().unwrap();
        let m = c8.long_edge_log_slope(a + 1e-9).unwrap().unwrap();
        assert!((t - m).abs() < 1e-6);
        // pA1 < 1/2 branch returns alpha itself
        let c3 = ctx(100_000, 0.3, 1.0, 1.0, 2, Norm::L2);
        assert_eq!(c3.long_edge_log_slope(0.5).unwrap().unwrap(), 0.5);
        // crossover value excluded by the theory
        let c5 = ctx(100_000, 0.5, 1.0, 1.0, 2, Norm::L2);
        assert!(c5.long_edge_log_slope(0.5).unwrap().is_none());
    }

    #[test]
    fn midrange_prediction_monotone_within_branch() {
        let c8 = ctx(100_000, 0.8, 1.0, 1.0, 2, Norm::L2);
        let mut last = 0.0;
        for i in 0..=40 {
            let alpha = 0.87 + i as f64 * 0.003;
            let v = c8.long_edge_count_predicted(alpha).unwrap().unwrap();
            assert!(v > last, "alpha = {alpha}");
            last = v;
        }
    }
}
