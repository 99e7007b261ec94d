//! Named aggregations from the literature and a small recommender that
//! picks a unit and exponent from three questions about the evaluation goal.

use std::fmt;
use std::str::FromStr;

use super::{AggregationSpec, BasicUnit, ClassAggregation, Exponent, GroupReducer};
use crate::error::{Error, Result};

pub const DEFAULT_DIFFERENCE_GAMMA: f64 = 0.05;
/// `|ratio - 1| <= 0.2`, the 80% rule.
pub const DEFAULT_RATIO_GAMMA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    MeanGap,
    Variance,
    MaxGap,
    MinScore,
    MinRatio,
    MaxDifference,
    MaxRatio,
    DifferenceThreshold,
    RatioThreshold,
    Binary,
    QuadraticMean,
    Mean,
    /// TPR-gap fairness as commonly reported for equal opportunity: gaps
    /// summed over groups, root mean square over classes, fairness = 1 - δ.
    SumGapRms,
}

impl Preset {
    pub const ALL: [Preset; 13] = [
        Preset::MeanGap,
        Preset::Variance,
        Preset::MaxGap,
        Preset::MinScore,
        Preset::MinRatio,
        Preset::MaxDifference,
        Preset::MaxRatio,
        Preset::DifferenceThreshold,
        Preset::RatioThreshold,
        Preset::Binary,
        Preset::QuadraticMean,
        Preset::Mean,
        Preset::SumGapRms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::MeanGap => "mean_gap",
            Preset::Variance => "variance",
            Preset::MaxGap => "max_gap",
            Preset::MinScore => "min_score",
            Preset::MinRatio => "min_ratio",
            Preset::MaxDifference => "max_difference",
            Preset::MaxRatio => "max_ratio",
            Preset::DifferenceThreshold => "difference_threshold",
            Preset::RatioThreshold => "ratio_threshold",
            Preset::Binary => "binary",
            Preset::QuadraticMean => "quadratic_mean",
            Preset::Mean => "mean",
            Preset::SumGapRms => "sum_gap_rms",
        }
    }

    /// True for the presets that only fix the class-wise step.
    pub fn is_class_wise(self) -> bool {
        matches!(self, Preset::Binary | Preset::QuadraticMean | Preset::Mean)
    }

    /// The aggregation for this preset. Group-wise presets average over
    /// classes; class-wise presets use mean gap over groups. `binary`
    /// targets class index 1.
    pub fn spec(self) -> AggregationSpec {
        use BasicUnit as U;
        use ClassAggregation as C;
        use GroupReducer as R;
        let pm = R::PowerMean;
        let mean_gap = (U::Gap, pm(Exponent::ARITHMETIC));
        let (unit, group, class) = match self {
            Preset::MeanGap => (U::Gap, pm(Exponent::ARITHMETIC), C::Mean),
            Preset::Variance => (U::Gap, R::Variance, C::Mean),
            Preset::MaxGap => (U::Gap, pm(Exponent::MAX), C::Mean),
            Preset::MinScore => (U::Score, pm(Exponent::MIN), C::Mean),
            Preset::MinRatio => (U::Ratio, pm(Exponent::MIN), C::Mean),
            Preset::MaxDifference => (U::Score, R::Range, C::Mean),
            Preset::MaxRatio => (U::Score, R::MaxMinRatio, C::Mean),
            Preset::DifferenceThreshold => (
                U::GapThreshold(DEFAULT_DIFFERENCE_GAMMA),
                pm(Exponent::ARITHMETIC),
                C::Mean,
            ),
            Preset::RatioThreshold => (
                U::RatioThreshold(DEFAULT_RATIO_GAMMA),
                pm(Exponent::ARITHMETIC),
                C::Mean,
            ),
            Preset::Binary => (mean_gap.0, mean_gap.1, C::Binary(1)),
            Preset::QuadraticMean => (mean_gap.0, mean_gap.1, C::QuadraticMean),
            Preset::Mean => (mean_gap.0, mean_gap.1, C::Mean),
            Preset::SumGapRms => (U::Gap, R::Sum, C::QuadraticMean),
        };
        AggregationSpec::new(unit, group, class)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown preset {s:?}")))
    }
}

macro_rules! answer_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::invalid(format!(
                        concat!("unknown ", stringify!($name), " answer {:?}"), other
                    ))),
                }
            }
        }
    };
}

answer_enum!(Focus { PerGroup => "per_group", InterGroup => "inter_group" });
answer_enum!(Disparity { Absolute => "absolute", Relative => "relative" });
answer_enum!(Summary { Extrema => "extrema", Average => "average" });

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionAnswers {
    pub focus: Focus,
    pub disparity: Disparity,
    pub summary: Summary,
    /// For averages, weight the worse groups more heavily (p = 2 on gaps,
    /// p = -1 on ratios).
    pub emphasize_worse: bool,
}

/// Picks a unit and group exponent:
///
/// * per-group fairness measures the worst group's score (`p = -inf`);
/// * inter-group disparities use gaps (absolute) or ratios (relative);
/// * extrema take the largest gap (`p = +inf`) or the smallest ratio
///   (`p = -inf`), averages use `p = 1`.
pub fn recommend(answers: DecisionAnswers) -> AggregationSpec {
    let (unit, p) = match answers.focus {
        Focus::PerGroup => (BasicUnit::Score, Exponent::MIN),
        Focus::InterGroup => {
            let unit = match answers.disparity {
                Disparity::Absolute => BasicUnit::Gap,
                Disparity::Relative => BasicUnit::Ratio,
            };
            let p = match (answers.summary, unit, answers.emphasize_worse) {
                (Summary::Extrema, BasicUnit::Gap, _) => Exponent::MAX,
                (Summary::Extrema, _, _) => Exponent::MIN,
                (Summary::Average, _, false) => Exponent::ARITHMETIC,
                (Summary::Average, BasicUnit::Gap, true) => Exponent::QUADRATIC,
                (Summary::Average, _, true) => Exponent::HARMONIC,
            };
            (unit, p)
        }
    };
    AggregationSpec::new(unit, GroupReducer::PowerMean(p), ClassAggregation::Mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::Direction;

    fn answers(focus: Focus, disparity: Disparity, summary: Summary) -> DecisionAnswers {
        DecisionAnswers {
            focus,
            disparity,
            summary,
            emphasize_worse: false,
        }
    }

    #[test]
    fn per_group_uses_minimum_score() {
        for d in [Disparity::Absolute, Disparity::Relative] {
            for s in [Summary::Extrema, Summary::Average] {
                let spec = recommend(answers(Focus::PerGroup, d, s));
                assert_eq!(spec.unit, BasicUnit::Score);
                assert_eq!(spec.group_p(), Some(Exponent::MIN));
            }
        }
    }

    #[test]
    fn inter_group_branches() {
        let spec = recommend(answers(
            Focus::InterGroup,
            Disparity::Absolute,
            Summary::Extrema,
        ));
        assert_eq!(
            (spec.unit, spec.group_p()),
            (BasicUnit::Gap, Some(Exponent::MAX))
        );
        assert_eq!(spec.direction, Direction::SmallerFairer);

        let spec = recommend(answers(
            Focus::InterGroup,
            Disparity::Relative,
            Summary::Average,
        ));
        assert_eq!(
            (spec.unit, spec.group_p()),
            (BasicUnit::Ratio, Some(Exponent::ARITHMETIC))
        );

        let mut a = answers(Focus::InterGroup, Disparity::Absolute, Summary::Average);
        a.emphasize_worse = true;
        assert_eq!(recommend(a).group_p(), Some(Exponent::QUADRATIC));
    }

    #[test]
    fn every_recommendation_validates() {
        for f in [Focus::PerGroup, Focus::InterGroup] {
            for d in [Disparity::Absolute, Disparity::Relative] {
                for s in [Summary::Extrema, Summary::Average] {
                    for e in [false, true] {
                        let a = DecisionAnswers {
                            focus: f,
                            disparity: d,
                            summary: s,
                            emphasize_worse: e,
                        };
                        recommend(a).validate(None).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            p.spec().validate(None).unwrap();
        }
        assert!("paper".parse::<Preset>().is_err());
        assert_eq!("inter_group".parse::<Focus>().unwrap(), Focus::InterGroup);
        assert!("both".parse::<Summary>().is_err());
    }
}
