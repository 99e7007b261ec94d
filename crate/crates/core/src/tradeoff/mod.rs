//! Performance–fairness trade-off geometry.
//!
//! Both axes are "larger is better" and live in `[0, 1]`. A method's sweep
//! of models is summarised by its Pareto frontier, and the frontier by the
//! area of its attainment region (the set of points weakly dominated by
//! some frontier point).

mod area;
mod polar;

use std::fmt;
use std::str::FromStr;

pub use area::{auc_pfc, partial_auc_pfc, AreaConstraint, DEFAULT_RESOLUTION};
pub use polar::{polar_dto_area, MIN_ANGLES};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub performance: f64,
    pub fairness: f64,
}

impl TradeoffPoint {
    pub fn new(performance: f64, fairness: f64) -> Result<Self> {
        for (name, v) in [("performance", performance), ("fairness", fairness)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(TradeoffPoint {
            performance,
            fairness,
        })
    }

    /// Weakly better in both coordinates and strictly better in one.
    pub fn dominates(&self, other: &TradeoffPoint) -> bool {
        self.performance >= other.performance
            && self.fairness >= other.fairness
            && (self.performance > other.performance || self.fairness > other.fairness)
    }
}

impl fmt::Display for TradeoffPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.performance, self.fairness)
    }
}

/// Reference point for distance-to-optimum, with per-axis weights on the
/// squared differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtopiaPoint {
    pub performance: f64,
    pub fairness: f64,
    pub weights: (f64, f64),
}

impl UtopiaPoint {
    pub const UNIT: UtopiaPoint = UtopiaPoint {
        performance: 1.0,
        fairness: 1.0,
        weights: (1.0, 1.0),
    };

    pub fn new(performance: f64, fairness: f64) -> Result<Self> {
        let p = TradeoffPoint::new(performance, fairness)?;
        Ok(UtopiaPoint {
            performance: p.performance,
            fairness: p.fairness,
            weights: (1.0, 1.0),
        })
    }

    pub fn with_weights(mut self, w_perf: f64, w_fair: f64) -> Result<Self> {
        if !(w_perf > 0.0 && w_fair > 0.0 && w_perf.is_finite() && w_fair.is_finite()) {
            return Err(Error::invalid("utopia weights must be positive and finite"));
        }
        self.weights = (w_perf, w_fair);
        Ok(self)
    }

    pub fn covers(&self, p: &TradeoffPoint) -> bool {
        p.performance <= self.performance && p.fairness <= self.fairness
    }

    pub fn is_unit(&self) -> bool {
        *self == UtopiaPoint::UNIT
    }

    pub(crate) fn weighted_distance(&self, performance: f64, fairness: f64) -> f64 {
        let dp = self.performance - performance;
        let df = self.fairness - fairness;
        (self.weights.0 * dp * dp + self.weights.1 * df * df).sqrt()
    }
}

impl fmt::Display for UtopiaPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}) weights ({}, {})",
            self.performance, self.fairness, self.weights.0, self.weights.1
        )
    }
}

/// Non-dominated points ordered by performance strictly decreasing (and
/// therefore fairness strictly increasing).
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    points: Vec<TradeoffPoint>,
}

impl Frontier {
    /// Accepts points that already satisfy the frontier ordering.
    pub fn from_sorted(points: Vec<TradeoffPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("frontier needs at least one point"));
        }
        for w in points.windows(2) {
            if !(w[0].performance > w[1].performance && w[0].fairness < w[1].fairness) {
                return Err(Error::invalid(format!(
                    "frontier points {} and {} are out of order or dominated",
                    w[0], w[1]
                )));
            }
        }
        Ok(Frontier { points })
    }

    pub fn points(&self) -> &[TradeoffPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AucMode {
    /// Staircase through the realised models.
    #[default]
    Step,
    /// Straight segments between adjacent frontier points.
    Linear,
}

impl AucMode {
    pub fn name(self) -> &'static str {
        match self {
            AucMode::Step => "step",
            AucMode::Linear => "linear",
        }
    }
}

impl FromStr for AucMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(AucMode::Step),
            "linear" => Ok(AucMode::Linear),
            other => Err(Error::invalid(format!("unknown auc mode {other:?}"))),
        }
    }
}

pub fn pareto_frontier(points: &[TradeoffPoint]) -> Result<Frontier> {
    if points.is_empty() {
        return Err(Error::invalid("pareto frontier of an empty point set"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        b.performance
            .total_cmp(&a.performance)
            .then(b.fairness.total_cmp(&a.fairness))
    });
    let mut out: Vec<TradeoffPoint> = Vec::new();
    for p in sorted {
        if out.last().is_none_or(|last| p.fairness > last.fairness) {
            out.push(p);
        }
    }
    Ok(Frontier { points: out })
}

/// Distance to the optimum: `sqrt(w_p·Δperf² + w_f·Δfair²)`.
pub fn dto(point: &TradeoffPoint, utopia: &UtopiaPoint) -> Result<f64> {
    if !utopia.covers(point) {
        return Err(Error::invalid(format!(
            "utopia {utopia} does not dominate {point}"
        )));
    }
    Ok(utopia.weighted_distance(point.performance, point.fairness))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UtopiaMode {
    #[default]
    Fixed11,
    BestObserved,
}

impl FromStr for UtopiaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" | "fixed11" | "unit" => Ok(UtopiaMode::Fixed11),
            "best" | "best_observed" => Ok(UtopiaMode::BestObserved),
            other => Err(Error::invalid(format!("unknown utopia mode {other:?}"))),
        }
    }
}

pub fn utopia_from_candidates(points: &[TradeoffPoint], mode: UtopiaMode) -> Result<UtopiaPoint> {
    if points.is_empty() {
        return Err(Error::invalid("utopia from an empty point set"));
    }
    match mode {
        UtopiaMode::Fixed11 => Ok(UtopiaPoint::UNIT),
        UtopiaMode::BestObserved => {
            let perf = points
                .iter()
                .map(|p| p.performance)
                .fold(f64::MIN, f64::max);
            let fair = points.iter().map(|p| p.fairness).fold(f64::MIN, f64::max);
            UtopiaPoint::new(perf, fair)
        }
    }
}

/// Distances from `q` to `utopia` and to `utopia` moved right by `b` along
/// the performance axis. The shifted point may leave the unit square.
///
/// The two satisfy `after² - before² = b² + 2b·(perf_u - perf_q)`, so of two
/// points equally far from `utopia` the one with lower performance ends up
/// strictly farther from the shifted point.
pub fn utopia_shift_check(q: &TradeoffPoint, utopia: &UtopiaPoint, b: f64) -> Result<(f64, f64)> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("shift must be positive, got {b}")));
    }
    if utopia.weights != (1.0, 1.0) {
        return Err(Error::invalid("utopia shift check assumes unit weights"));
    }
    let before = dto(q, utopia)?;
    let dp = utopia.performance + b - q.performance;
    let df = utopia.fairness - q.fairness;
    Ok((before, (dp * dp + df * df).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(p: f64, f: f64) -> TradeoffPoint {
        TradeoffPoint::new(p, f).unwrap()
    }

    #[test]
    fn frontier_examples() {
        let f = pareto_frontier(&[pt(0.5, 0.5)]).unwrap();
        assert_eq!(f.points(), &[pt(0.5, 0.5)]);

        let f =
            pareto_frontier(&[pt(0.8, 0.6), pt(0.7, 0.7), pt(0.75, 0.65), pt(0.6, 0.5)]).unwrap();
        assert_eq!(f.points(), &[pt(0.8, 0.6), pt(0.75, 0.65), pt(0.7, 0.7)]);

        let f = pareto_frontier(&[pt(0.3, 0.3); 4]).unwrap();
        assert_eq!(f.len(), 1);

        // equal performance, worse fairness is dropped
        let f = pareto_frontier(&[pt(0.8, 0.5), pt(0.8, 0.6), pt(0.6, 0.6)]).unwrap();
        assert_eq!(f.points(), &[pt(0.8, 0.6)]);

        assert!(pareto_frontier(&[]).is_err());
    }

    #[test]
    fn frontier_from_sorted_validates() {
        assert!(Frontier::from_sorted(vec![pt(0.8, 0.5), pt(0.6, 0.9)]).is_ok());
        assert!(Frontier::from_sorted(vec![pt(0.6, 0.9), pt(0.8, 0.5)]).is_err());
        assert!(Frontier::from_sorted(vec![pt(0.8, 0.5), pt(0.6, 0.5)]).is_err());
        assert!(Frontier::from_sorted(vec![]).is_err());
    }

    #[test]
    fn dto_examples() {
        let u = UtopiaPoint::UNIT;
        let d = dto(&pt(0.813544, 0.624426), &u).unwrap();
        assert!((d - 0.419311).abs() < 5e-7);
        assert_eq!(dto(&pt(1.0, 1.0), &u).unwrap(), 0.0);
        assert!((dto(&pt(0.6, 0.8), &u).unwrap() - 0.2f64.sqrt()).abs() < 1e-15);
        let inner = UtopiaPoint::new(0.7, 1.0).unwrap();
        assert!(dto(&pt(0.8, 0.5), &inner).is_err());
    }

    #[test]
    fn weighted_dto() {
        let u = UtopiaPoint::UNIT.with_weights(4.0, 1.0).unwrap();
        let d = dto(&pt(0.9, 0.7), &u).unwrap();
        assert!((d - (4.0 * 0.01f64 + 0.09).sqrt()).abs() < 1e-15);
        assert!(UtopiaPoint::UNIT.with_weights(0.0, 1.0).is_err());
    }

    #[test]
    fn utopia_modes() {
        let pts = [pt(0.82, 0.58), pt(0.5, 0.9)];
        let u = utopia_from_candidates(&pts, UtopiaMode::BestObserved).unwrap();
        assert_eq!((u.performance, u.fairness), (0.82, 0.9));
        assert!(utopia_from_candidates(&pts, UtopiaMode::Fixed11)
            .unwrap()
            .is_unit());
        let one = utopia_from_candidates(&pts[..1], UtopiaMode::BestObserved).unwrap();
        assert_eq!((one.performance, one.fairness), (0.82, 0.58));
        assert!(utopia_from_candidates(&[], UtopiaMode::Fixed11).is_err());
    }

    #[test]
    fn utopia_shift_examples() {
        let u = UtopiaPoint::new(0.8, 1.0).unwrap();
        let (before, after) = utopia_shift_check(&pt(0.8, 1.0), &u, 0.3).unwrap();
        assert_eq!(before, 0.0);
        assert!((after - 0.3).abs() < 1e-15);

        let (before, after) = utopia_shift_check(&pt(0.6, 0.8), &u, 0.2).unwrap();
        assert!((before - 0.2828427).abs() < 1e-7);
        assert!((after - 0.4472136).abs() < 1e-7);
        assert!((after * after - before * before - 0.12).abs() < 1e-12);
    }
}
