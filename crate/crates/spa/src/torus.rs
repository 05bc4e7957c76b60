//! Geometry of the unit hypercube `[0,1)^m` under the torus metric.
//!
//! Distances wrap around the boundary: the separation of two coordinates is
//! `min(|a-b|, 1-|a-b|)` and the per-axis separations are combined by the
//! chosen norm. A ball of radius `r` has volume `c_m * r^m`, capped at the
//! total space volume 1.

use crate::{Result, SpaError};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Norm used to combine per-coordinate wrapped separations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L2,
    Linf,
}

impl Norm {
    pub fn token(self) -> &'static str {
        match self {
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }

    pub fn parse(s: &str) -> Result<Norm> {
        match s {
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            other => Err(SpaError::InvalidArgument(format!(
                "unknown norm {other:?}, expected \"l2\" or \"linf\""
            ))),
        }
    }
}

/// Dimension and norm of the torus, with the unit-ball volume constant
/// `c_m` precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusMetric {
    m: u32,
    norm: Norm,
    c_m: f64,
}

impl TorusMetric {
    pub fn new(m: u32, norm: Norm) -> Result<Self> {
        if m == 0 {
            return Err(SpaError::InvalidArgument(
                "dimension m must be at least 1".into(),
            ));
        }
        if m > 64 {
            return Err(SpaError::InvalidArgument(format!(
                "dimension m = {m} is above the supported maximum of 64"
            )));
        }
        let c_m = match norm {
            Norm::Linf => 2.0f64.powi(m as i32),
            Norm::L2 => match m {
                1 => 2.0,
                2 => PI,
                _ => {
                    // pi^{m/2} / Gamma(m/2 + 1), evaluated in log space
                    let half = m as f64 / 2.0;
                    (half * PI.ln() - ln_gamma(half + 1.0)).exp()
                }
            },
        };
        Ok(TorusMetric { m, norm, c_m })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    /// Volume of the unit-radius ball under this norm.
    pub fn unit_ball_volume(&self) -> f64 {
        self.c_m
    }

    /// Largest attainable torus distance: every coordinate separation is at
    /// most 1/2.
    pub fn max_distance(&self) -> f64 {
        match self.norm {
            Norm::L2 => 0.5 * (self.m as f64).sqrt(),
            Norm::Linf => 0.5,
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != self.m as usize || b.len() != self.m as usize {
            return Err(SpaError::InvalidArgument(format!(
                "dimension mismatch: points of dimension {} and {} under an m = {} metric",
                a.len(),
                b.len(),
                self.m
            )));
        }
        Ok(self.distance_unchecked(a, b))
    }

    /// Torus distance without the dimension check; callers guarantee both
    /// slices have length `m`.
    #[inline]
    pub(crate) fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.norm {
            Norm::L2 => {
                let mut sum = 0.0;
                for i in 0..self.m as usize {
                    let d = wrap_delta(a[i], b[i]);
                    sum += d * d;
                }
                sum.sqrt()
            }
            Norm::Linf => {
                let mut max = 0.0f64;
                for i in 0..self.m as usize {
                    let d = wrap_delta(a[i], b[i]);
                    if d > max {
                        max = d;
                    }
                }
                max
            }
        }
    }

    /// Volume of a radius-`r` ball, capped at the space volume 1.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(SpaError::InvalidArgument(format!(
                "ball radius must be non-negative, got {r}"
            )));
        }
        Ok((self.c_m * r.powi(self.m as i32)).min(1.0))
    }

    /// Radius of the ball with the given volume: `(vol / c_m)^(1/m)`.
    pub fn radius_for_volume(&self, vol: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&vol) {
            return Err(SpaError::InvalidArgument(format!(
                "ball volume must lie in [0,1], got {vol}"
            )));
        }
        Ok((vol / self.c_m).powf(1.0 / self.m as f64))
    }

    /// Whether a point at distance `dist` lies inside a ball of volume
    /// `vol` (boundary inclusive). This is the one membership test used by
    /// every generator engine; it compares `dist^m * c_m <= vol` so that
    /// only exactly-rounded float operations are involved.
    #[inline]
    pub fn ball_contains(&self, dist: f64, vol: f64) -> bool {
        dist.powi(self.m as i32) * self.c_m <= vol
    }
}

/// Wrapped separation of two coordinates in [0,1).
#[inline]
fn wrap_delta(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// A point of `[0,1)^m`. Coordinates outside the half-open unit interval are
/// rejected rather than wrapped, to surface bugs early.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(SpaError::InvalidArgument(
                "a torus point needs at least one coordinate".into(),
            ));
        }
        for (i, &c) in coords.iter().enumerate() {
            if !(0.0..1.0).contains(&c) {
                return Err(SpaError::InvalidArgument(format!(
                    "coordinate {i} = {c} outside [0,1)"
                )));
            }
        }
        Ok(TorusPoint(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l2() -> TorusMetric {
        TorusMetric::new(2, Norm::L2).unwrap()
    }

    #[test]
    fn unit_ball_constants() {
        assert_eq!(l2().unit_ball_volume(), PI);
        assert_eq!(TorusMetric::new(1, Norm::L2).unwrap().unit_ball_volume(), 2.0);
        let c3 = TorusMetric::new(3, Norm::L2).unwrap().unit_ball_volume();
        assert!((c3 - 4.188790204786391).abs() < 1e-12, "c3 = {c3}");
        assert_eq!(
            TorusMetric::new(3, Norm::Linf).unwrap().unit_ball_volume(),
            8.0
        );
    }

    #[test]
    fn rejects_zero_dimension() {
        assert!(TorusMetric::new(0, Norm::L2).is_err());
    }

    #[test]
    fn distance_identity() {
        let m = l2();
        let p = [0.3, 0.7];
        assert_eq!(m.distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn distance_wraps_around() {
        // 0.8 apart per coordinate reduces to 0.2 through the boundary
        let m = l2();
        let d = m.distance(&[0.1, 0.1], &[0.9, 0.9]).unwrap();
        assert!((d - (0.08f64).sqrt()).abs() < 1e-15, "d = {d}");
        assert!((d - 0.282843).abs() < 1e-6);
    }

    #[test]
    fn linf_antipodal_point() {
        let m = TorusMetric::new(2, Norm::Linf).unwrap();
        let d = m.distance(&[0.0, 0.0], &[0.5, 0.5]).unwrap();
        assert_eq!(d, 0.5);
        assert_eq!(d, m.max_distance());
    }

    #[test]
    fn distance_dimension_mismatch() {
        let m = l2();
        assert!(m.distance(&[0.1], &[0.2, 0.3]).is_err());
        assert!(m.distance(&[0.1, 0.2, 0.3], &[0.2, 0.3, 0.1]).is_err());
    }

    #[test]
    fn ball_volume_examples() {
        let m = l2();
        assert_eq!(m.ball_volume(0.0).unwrap(), 0.0);
        let v = m.ball_volume(0.1).unwrap();
        assert!((v - PI * 0.01).abs() < 1e-15, "v = {v}");
        // L-inf cube of radius 0.5 in m=3 covers the whole torus
        let cube = TorusMetric::new(3, Norm::Linf).unwrap();
        assert_eq!(cube.ball_volume(0.5).unwrap(), 1.0);
        assert!(m.ball_volume(-0.1).is_err());
    }

    #[test]
    fn radius_for_volume_examples() {
        let m = l2();
        assert_eq!(m.radius_for_volume(0.0).unwrap(), 0.0);
        let r = m.radius_for_volume(PI * 0.01).unwrap();
        assert!((r - 0.1).abs() < 1e-15, "r = {r}");
        // r_alpha for alpha = 1, n = 1e5: (1e-5/pi)^(1/2)
        let r = m.radius_for_volume(1e-5).unwrap();
        assert!((r - 0.0017841241161527711).abs() < 1e-18, "r = {r}");
        assert!(m.radius_for_volume(-0.1).is_err());
        assert!(m.radius_for_volume(1.1).is_err());
    }

    #[test]
    fn torus_point_rejects_out_of_range() {
        assert!(TorusPoint::new(vec![0.0, 0.999]).is_ok());
        assert!(TorusPoint::new(vec![1.0, 0.5]).is_err());
        assert!(TorusPoint::new(vec![-0.1]).is_err());
        assert!(TorusPoint::new(vec![]).is_err());
    }

    fn coord() -> impl Strategy<Value = f64> {
        (0u64..(1u64 << 53)).prop_map(|b| b as f64 / (1u64 << 53) as f64)
    }

    proptest! {
        #[test]
        fn symmetry_and_bounds(ax in coord(), ay in coord(), bx in coord(), by in coord()) {
            for metric in [l2(), TorusMetric::new(2, Norm::Linf).unwrap()] {
                let d1 = metric.distance(&[ax, ay], &[bx, by]).unwrap();
                let d2 = metric.distance(&[bx, by], &[ax, ay]).unwrap();
                prop_assert_eq!(d1, d2);
                prop_assert!(d1 >= 0.0);
                prop_assert!(d1 <= metric.max_distance() + 1e-12);
            }
        }

        #[test]
        fn triangle_inequality(
            ax in coord(), ay in coord(),
            bx in coord(), by in coord(),
            cx in coord(), cy in coord(),
        ) {
            for metric in [l2(), TorusMetric::new(2, Norm::Linf).unwrap()] {
                let ab = metric.distance(&[ax, ay], &[bx, by]).unwrap();
                let bc = metric.distance(&[bx, by], &[cx, cy]).unwrap();
                let ac = metric.distance(&[ax, ay], &[cx, cy]).unwrap();
                prop_assert!(ac <= ab + bc + 1e-12);
            }
        }

        #[test]
        fn volume_radius_round_trip(r in 1e-9f64..0.2) {
            for metric in [l2(), TorusMetric::new(2, Norm::Linf).unwrap()] {
                // below the cap for both norms at r < 0.2
                let v = metric.ball_volume(r).unwrap();
                let back = metric.radius_for_volume(v).unwrap();
                prop_assert!((back - r).abs() <= 1e-12 * r, "r = {}, back = {}", r, back);
            }
        }
    }
}
