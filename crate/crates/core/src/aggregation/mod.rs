//! Two-step aggregation of a class × group metric matrix into one fairness
//! number.
//!
//! Each class row is first reduced over groups to `β_c` (after turning every
//! cell into a basic unit: the raw score, its gap to the class reference
//! mean, or its ratio to that mean). The `β` vector is then reduced over
//! classes to `δ`, and `δ` is mapped onto a `[0, 1]` fairness score where
//! larger is fairer.

mod mean;
mod preset;

use std::fmt;

pub use mean::{generalized_mean, Exponent};
pub use preset::{
    recommend, DecisionAnswers, Disparity, Focus, Preset, Summary, DEFAULT_DIFFERENCE_GAMMA,
    DEFAULT_RATIO_GAMMA,
};

use mean::{check_weights, weighted_power_mean};

use crate::error::{Error, Result};
use crate::metrics::{MeanMode, MetricMatrix};

/// Indicator comparisons against a threshold tolerate this much rounding,
/// so that e.g. `|0.9 / 0.75 - 1| <= 0.2` holds.
const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasicUnit {
    Score,
    Gap,
    Ratio,
    /// 1 when `|v - mean| <= gamma`, else 0.
    GapThreshold(f64),
    /// 1 when `|v / mean - 1| <= gamma`, else 0.
    RatioThreshold(f64),
}

impl BasicUnit {
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            BasicUnit::GapThreshold(g) | BasicUnit::RatioThreshold(g) => Some(g),
            _ => None,
        }
    }

    fn needs_ratio(&self) -> bool {
        matches!(self, BasicUnit::Ratio | BasicUnit::RatioThreshold(_))
    }

    fn validate(&self) -> Result<()> {
        match self.gamma() {
            Some(g) if !(g.is_finite() && g > 0.0) => Err(Error::invalid(format!(
                "threshold gamma must be finite and positive, got {g}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for BasicUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicUnit::Score => f.write_str("score"),
            BasicUnit::Gap => f.write_str("gap"),
            BasicUnit::Ratio => f.write_str("ratio"),
            BasicUnit::GapThreshold(g) => write!(f, "gap_threshold({g})"),
            BasicUnit::RatioThreshold(g) => write!(f, "ratio_threshold({g})"),
        }
    }
}

/// How one class row of unit values collapses to `β_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupReducer {
    /// Weighted generalized mean with the given exponent.
    PowerMean(Exponent),
    /// Sum over defined groups, i.e. `n · M₁`.
    Sum,
    /// `Σ v² / (n - 1)`, i.e. `n / (n - 1) · M₂²`.
    Variance,
    /// `max - min`.
    Range,
    /// `max / min`.
    MaxMinRatio,
}

impl GroupReducer {
    /// The generalized-mean exponent this reducer is built on, if any.
    pub fn exponent(&self) -> Option<Exponent> {
        match *self {
            GroupReducer::PowerMean(p) => Some(p),
            GroupReducer::Sum => Some(Exponent::ARITHMETIC),
            GroupReducer::Variance => Some(Exponent::QUADRATIC),
            GroupReducer::Range | GroupReducer::MaxMinRatio => None,
        }
    }
}

impl fmt::Display for GroupReducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupReducer::PowerMean(p) => write!(f, "generalized_mean(p={p})"),
            GroupReducer::Sum => f.write_str("sum (G * M_1)"),
            GroupReducer::Variance => f.write_str("variance (G/(G-1) * M_2^2)"),
            GroupReducer::Range => f.write_str("max - min"),
            GroupReducer::MaxMinRatio => f.write_str("max / min"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassAggregation {
    Mean,
    QuadraticMean,
    /// Keep only `β` of the given class.
    Binary(usize),
    GeneralizedMean(Exponent),
}

impl fmt::Display for ClassAggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassAggregation::Mean => f.write_str("mean"),
            ClassAggregation::QuadraticMean => f.write_str("quadratic_mean"),
            ClassAggregation::Binary(c) => write!(f, "binary(class={c})"),
            ClassAggregation::GeneralizedMean(p) => write!(f, "generalized_mean(p={p})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    SmallerFairer,
    LargerFairer,
    RatioAroundOne,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::SmallerFairer => "smaller_fairer",
            Direction::LargerFairer => "larger_fairer",
            Direction::RatioAroundOne => "ratio_around_one",
        }
    }

    /// The orientation implied by a unit and group reducer.
    pub fn natural(unit: BasicUnit, group: GroupReducer) -> Direction {
        match (unit, group) {
            (_, GroupReducer::Range) => Direction::SmallerFairer,
            (_, GroupReducer::MaxMinRatio) => Direction::RatioAroundOne,
            (BasicUnit::Gap, _) => Direction::SmallerFairer,
            (BasicUnit::Score, _) => Direction::LargerFairer,
            (BasicUnit::GapThreshold(_) | BasicUnit::RatioThreshold(_), _) => {
                Direction::LargerFairer
            }
            (BasicUnit::Ratio, GroupReducer::PowerMean(p)) if p == Exponent::MIN => {
                Direction::LargerFairer
            }
            (BasicUnit::Ratio, _) => Direction::RatioAroundOne,
        }
    }
}

/// Full description of a fairness aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationSpec {
    pub unit: BasicUnit,
    pub mean_mode: MeanMode,
    pub group: GroupReducer,
    pub group_weights: Option<Vec<f64>>,
    pub class_method: ClassAggregation,
    pub direction: Direction,
}

impl AggregationSpec {
    /// Spec with pooled class means, no group weights and the natural
    /// direction for `unit` and `group`.
    pub fn new(unit: BasicUnit, group: GroupReducer, class_method: ClassAggregation) -> Self {
        AggregationSpec {
            unit,
            mean_mode: MeanMode::Pooled,
            group,
            group_weights: None,
            class_method,
            direction: Direction::natural(unit, group),
        }
    }

    pub fn with_mean_mode(mut self, mode: MeanMode) -> Self {
        self.mean_mode = mode;
        self
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.group_weights = Some(weights);
        self
    }

    pub fn with_class_method(mut self, method: ClassAggregation) -> Self {
        self.class_method = method;
        self
    }

    /// Replaces the slack of a threshold unit; no effect on other units.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.unit = match self.unit {
            BasicUnit::GapThreshold(_) => BasicUnit::GapThreshold(gamma),
            BasicUnit::RatioThreshold(_) => BasicUnit::RatioThreshold(gamma),
            other => other,
        };
        self
    }

    pub fn group_p(&self) -> Option<Exponent> {
        self.group.exponent()
    }

    /// Checks internal consistency, and the weight length against `groups`
    /// when given.
    pub fn validate(&self, groups: Option<usize>) -> Result<()> {
        self.unit.validate()?;
        if let Some(w) = &self.group_weights {
            check_weights(w, groups.unwrap_or(w.len()))?;
        }
        if matches!(self.group, GroupReducer::Range | GroupReducer::MaxMinRatio)
            && self.unit != BasicUnit::Score
        {
            return Err(Error::invalid(format!(
                "group reducer {} needs the score unit",
                self.group
            )));
        }
        let natural = Direction::natural(self.unit, self.group);
        let ratio_ok = self.unit == BasicUnit::Ratio
            && matches!(
                self.direction,
                Direction::LargerFairer | Direction::RatioAroundOne
            );
        if self.direction != natural && !ratio_ok {
            return Err(Error::invalid(format!(
                "direction {} is inconsistent with unit {} and reducer {}",
                self.direction.name(),
                self.unit,
                self.group
            )));
        }
        Ok(())
    }
}

/// Result of [`aggregate`].
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationOutcome {
    /// `β_c` per class; `None` for classes without any defined cell.
    pub betas: Vec<Option<f64>>,
    pub delta: f64,
    pub fairness: f64,
}

/// Maps each defined cell of a class row onto the basic unit.
pub fn unit_transform(
    row: &[Option<f64>],
    class_mean: f64,
    unit: BasicUnit,
) -> Result<Vec<Option<f64>>> {
    unit.validate()?;
    if unit.needs_ratio() && class_mean <= 0.0 {
        return Err(Error::ZeroClassMean(class_mean));
    }
    let f = |v: f64| -> f64 {
        match unit {
            BasicUnit::Score => v,
            BasicUnit::Gap => (v - class_mean).abs(),
            BasicUnit::Ratio => v / class_mean,
            BasicUnit::GapThreshold(gamma) => {
                indicator((v - class_mean).abs() <= gamma + THRESHOLD_SLACK)
            }
            BasicUnit::RatioThreshold(gamma) => {
                indicator((v / class_mean - 1.0).abs() <= gamma + THRESHOLD_SLACK)
            }
        }
    };
    Ok(row.iter().map(|v| v.map(f)).collect())
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Reduces one class row to `β_c`.
pub fn group_aggregate(
    row: &[Option<f64>],
    class_mean: f64,
    spec: &AggregationSpec,
) -> Result<f64> {
    if let Some(w) = &spec.group_weights {
        check_weights(w, row.len())?;
    }
    let units = unit_transform(row, class_mean, spec.unit)?;
    let mut values = Vec::with_capacity(units.len());
    let mut weights = Vec::with_capacity(units.len());
    for (g, u) in units.iter().enumerate() {
        if let Some(v) = u {
            values.push(*v);
            weights.push(spec.group_weights.as_ref().map_or(1.0, |w| w[g]));
        }
    }
    if values.is_empty() {
        return Err(Error::invalid("every cell of the class row is undefined"));
    }
    let weights = spec.group_weights.as_ref().map(|_| weights.as_slice());
    let n = values.len() as f64;
    match spec.group {
        GroupReducer::PowerMean(p) => weighted_power_mean(&values, weights, p.value()),
        GroupReducer::Sum => Ok(n * weighted_power_mean(&values, weights, 1.0)?),
        GroupReducer::Variance => {
            if values.len() < 2 {
                return Err(Error::invalid("variance needs at least two defined groups"));
            }
            let rms = weighted_power_mean(&values, weights, 2.0)?;
            Ok(n / (n - 1.0) * rms * rms)
        }
        GroupReducer::Range => {
            let hi = weighted_power_mean(&values, weights, f64::INFINITY)?;
            let lo = weighted_power_mean(&values, weights, f64::NEG_INFINITY)?;
            Ok(hi - lo)
        }
        GroupReducer::MaxMinRatio => {
            let hi = weighted_power_mean(&values, weights, f64::INFINITY)?;
            let lo = weighted_power_mean(&values, weights, f64::NEG_INFINITY)?;
            if lo <= 0.0 {
                return Err(Error::invalid("max/min ratio with a zero minimum score"));
            }
            Ok(hi / lo)
        }
    }
}

/// Reduces the `β` vector to `δ` over classes with a defined `β`.
pub fn class_aggregate(betas: &[Option<f64>], method: ClassAggregation) -> Result<f64> {
    if let ClassAggregation::Binary(c) = method {
        return betas.get(c).copied().flatten().ok_or_else(|| {
            Error::invalid(format!("binary aggregation target class {c} is undefined"))
        });
    }
    let defined: Vec<f64> = betas.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::invalid("no class has a defined group aggregate"));
    }
    let p = match method {
        ClassAggregation::Mean => 1.0,
        ClassAggregation::QuadraticMean => 2.0,
        ClassAggregation::GeneralizedMean(p) => p.value(),
        ClassAggregation::Binary(_) => unreachable!(),
    };
    weighted_power_mean(&defined, None, p)
}

/// Maps `δ` onto `[0, 1]` where 1 is perfectly fair.
pub fn normalize(delta: f64, direction: Direction) -> Result<f64> {
    if !delta.is_finite() {
        return Err(Error::invalid(format!("non-finite delta {delta}")));
    }
    let raw = match direction {
        Direction::SmallerFairer => 1.0 - delta,
        Direction::LargerFairer => delta,
        Direction::RatioAroundOne => {
            if delta <= 0.0 {
                return Err(Error::invalid(format!(
                    "ratio-centred delta must be positive, got {delta}"
                )));
            }
            delta.min(1.0 / delta)
        }
    };
    let clamped = raw.clamp(0.0, 1.0);
    if clamped != raw {
        log::warn!(
            "fairness {raw} clamped to {clamped} (delta {delta}, {})",
            direction.name()
        );
    }
    Ok(clamped)
}

pub fn aggregate(matrix: &MetricMatrix, spec: &AggregationSpec) -> Result<AggregationOutcome> {
    spec.validate(Some(matrix.num_groups()))?;
    if spec.mean_mode != matrix.mean_mode() {
        return Err(Error::invalid(format!(
            "spec expects {} class means but the matrix carries {}",
            spec.mean_mode.name(),
            matrix.mean_mode().name()
        )));
    }
    let mut betas = Vec::with_capacity(matrix.num_classes());
    for c in 0..matrix.num_classes() {
        let beta = match matrix.class_means()[c] {
            Some(mean) => Some(group_aggregate(matrix.row(c), mean, spec)?),
            None => None,
        };
        betas.push(beta);
    }
    let delta = class_aggregate(&betas, spec.class_method)?;
    let fairness = normalize(delta, spec.direction)?;
    Ok(AggregationOutcome {
        betas,
        delta,
        fairness,
    })
}
