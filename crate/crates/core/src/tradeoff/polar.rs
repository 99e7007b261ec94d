use super::area::{pairwise_sum, Region};
use super::{AucMode, Frontier, UtopiaPoint};
use crate::error::{Error, Result};

pub const MIN_ANGLES: usize = 16;

const BISECTION_STEPS: usize = 80;

/// Area between the frontier and the pole `(1, 1)`, integrated as
/// `½ ∫₀^{π/2} r(θ)² dθ` where `r(θ)` is the distance from the pole to the
/// attainment region (or the square's edge) along the ray at angle `θ`.
///
/// The part of the unit square outside the attainment region is star-shaped
/// around `(1, 1)`, so the result converges to `1 - auc_pfc(frontier, mode)`.
/// Uses the midpoint rule over `n_angles` equal sub-intervals.
pub fn polar_dto_area(
    frontier: &Frontier,
    utopia: &UtopiaPoint,
    mode: AucMode,
    n_angles: usize,
) -> Result<f64> {
    if !utopia.is_unit() {
        return Err(Error::invalid(
            "polar integration is only defined around (1, 1) with unit weights",
        ));
    }
    if n_angles < MIN_ANGLES {
        return Err(Error::invalid(format!(
            "need at least {MIN_ANGLES} angles, got {n_angles}"
        )));
    }
    let region = Region::new(frontier, mode);
    let step = std::f64::consts::FRAC_PI_2 / n_angles as f64;
    let terms: Vec<f64> = (0..n_angles)
        .map(|i| {
            let r = ray_length(&region, (i as f64 + 0.5) * step);
            0.5 * r * r * step
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Distance from (1, 1) along direction (-cos θ, -sin θ) to the first point
/// of the region, capped at the square's boundary.
fn ray_length(region: &Region, theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    let t_max = (1.0 / c).min(1.0 / s);
    let at = |t: f64| ((1.0 - t * c).max(0.0), (1.0 - t * s).max(0.0));
    let inside = |t: f64| {
        let (x, y) = at(t);
        region.contains(x, y)
    };
    if !inside(t_max) {
        return t_max;
    }
    if inside(0.0) {
        return 0.0;
    }
    // membership is monotone along the ray because the region is a down-set
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tradeoff::{auc_pfc, TradeoffPoint};

    fn frontier(pts: &[(f64, f64)]) -> Frontier {
        Frontier::from_sorted(
            pts.iter()
                .map(|&(p, f)| TradeoffPoint::new(p, f).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn pole_on_frontier_gives_zero() {
        let f = frontier(&[(1.0, 1.0)]);
        assert_eq!(
            polar_dto_area(&f, &UtopiaPoint::UNIT, AucMode::Step, 100).unwrap(),
            0.0
        );
    }

    #[test]
    fn complement_of_two_point_staircase() {
        let f = frontier(&[(0.8, 0.5), (0.6, 0.9)]);
        let a = polar_dto_area(&f, &UtopiaPoint::UNIT, AucMode::Step, 10_000).unwrap();
        assert!((a - 0.36).abs() < 1e-3, "{a}");
        let l = polar_dto_area(&f, &UtopiaPoint::UNIT, AucMode::Linear, 10_000).unwrap();
        assert!(
            (l - (1.0 - auc_pfc(&f, AucMode::Linear))).abs() < 1e-3,
            "{l}"
        );
    }

    #[test]
    fn origin_frontier_covers_whole_square() {
        let f = frontier(&[(0.0, 0.0)]);
        let a = polar_dto_area(&f, &UtopiaPoint::UNIT, AucMode::Step, 10_000).unwrap();
        assert!((a - 1.0).abs() < 1e-6, "{a}");
    }

    #[test]
    fn rejects_other_poles_and_coarse_grids() {
        let f = frontier(&[(0.5, 0.5)]);
        let u = UtopiaPoint::new(0.8, 1.0).unwrap();
        assert!(polar_dto_area(&f, &u, AucMode::Step, 100).is_err());
        assert!(polar_dto_area(&f, &UtopiaPoint::UNIT, AucMode::Step, 8).is_err());
    }
}
