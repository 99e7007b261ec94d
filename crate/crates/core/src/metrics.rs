//! Per-group confusion counts and the class × group base-metric matrix.
//!
//! Every metric is evaluated one-vs-all: for class `c`, instances of class
//! `c` are positives and everything else is negative.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::dataset::{DatasetSchema, GroupedConfusions, PredictionRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseMetricKind {
    Tpr,
    Tnr,
    Fpr,
    /// Fraction of the group predicted as the class.
    Ppr,
    Precision,
    Accuracy,
    F1,
}

impl BaseMetricKind {
    pub const ALL: [BaseMetricKind; 7] = [
        BaseMetricKind::Tpr,
        BaseMetricKind::Tnr,
        BaseMetricKind::Fpr,
        BaseMetricKind::Ppr,
        BaseMetricKind::Precision,
        BaseMetricKind::Accuracy,
        BaseMetricKind::F1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseMetricKind::Tpr => "tpr",
            BaseMetricKind::Tnr => "tnr",
            BaseMetricKind::Fpr => "fpr",
            BaseMetricKind::Ppr => "ppr",
            BaseMetricKind::Precision => "precision",
            BaseMetricKind::Accuracy => "accuracy",
            BaseMetricKind::F1 => "f1",
        }
    }

    /// Evaluates the metric on a one-vs-all tuple; `None` when the
    /// denominator is empty.
    pub fn evaluate(self, t: OneVsAll) -> Option<f64> {
        let (num, den) = match self {
            BaseMetricKind::Tpr => (t.tp, t.tp + t.fn_),
            BaseMetricKind::Tnr => (t.tn, t.tn + t.fp),
            BaseMetricKind::Fpr => (t.fp, t.fp + t.tn),
            BaseMetricKind::Ppr => (t.tp + t.fp, t.total()),
            BaseMetricKind::Precision => (t.tp, t.tp + t.fp),
            BaseMetricKind::Accuracy => (t.tp + t.tn, t.total()),
            BaseMetricKind::F1 => (2 * t.tp, 2 * t.tp + t.fp + t.fn_),
        };
        (den > 0).then(|| num as f64 / den as f64)
    }
}

impl FromStr for BaseMetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaseMetricKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown metric {s:?}")))
    }
}

/// One-vs-all confusion four-tuple for a single class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OneVsAll {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl OneVsAll {
    pub fn from_matrix(matrix: &[Vec<u64>], class: usize) -> Self {
        let tp = matrix[class][class];
        let row: u64 = matrix[class].iter().sum();
        let col: u64 = matrix.iter().map(|r| r[class]).sum();
        let total: u64 = matrix.iter().flatten().sum();
        OneVsAll {
            tp,
            fn_: row - tp,
            fp: col - tp,
            tn: total + tp - row - col,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// How the per-class reference value used by gap and ratio units is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MeanMode {
    /// The metric evaluated on all groups' counts merged.
    #[default]
    Pooled,
    /// Arithmetic mean of the defined per-group cells.
    UnweightedGroupMean,
}

impl MeanMode {
    pub fn name(self) -> &'static str {
        match self {
            MeanMode::Pooled => "pooled",
            MeanMode::UnweightedGroupMean => "unweighted_group_mean",
        }
    }
}

impl FromStr for MeanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(MeanMode::Pooled),
            "unweighted_group_mean" | "group_mean" => Ok(MeanMode::UnweightedGroupMean),
            other => Err(Error::invalid(format!("unknown mean mode {other:?}"))),
        }
    }
}

/// Class × group matrix of a base metric. Cells with an empty denominator
/// are `None` and never take part in aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    kind: BaseMetricKind,
    values: Vec<Vec<Option<f64>>>,
    class_means: Vec<Option<f64>>,
    mean_mode: MeanMode,
}

impl MetricMatrix {
    /// Assembles a matrix from precomputed cells and reference means.
    pub fn new(
        kind: BaseMetricKind,
        values: Vec<Vec<Option<f64>>>,
        class_means: Vec<Option<f64>>,
        mean_mode: MeanMode,
    ) -> Result<Self> {
        if values.is_empty() || values.len() != class_means.len() {
            return Err(Error::invalid(
                "matrix rows and class means differ in length",
            ));
        }
        let g = values[0].len();
        if g == 0 || values.iter().any(|r| r.len() != g) {
            return Err(Error::invalid("ragged metric matrix"));
        }
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        for (c, row) in values.iter().enumerate() {
            if row.iter().flatten().any(|&v| !in_unit(v)) {
                return Err(Error::invalid(format!(
                    "row {c} has a value outside [0, 1]"
                )));
            }
            match class_means[c] {
                Some(m) if !in_unit(m) => {
                    return Err(Error::invalid(format!("class mean {m} outside [0, 1]")))
                }
                None if row.iter().any(Option::is_some) => {
                    return Err(Error::invalid(format!(
                        "row {c} has cells but no class mean"
                    )))
                }
                _ => {}
            }
        }
        Ok(MetricMatrix {
            kind,
            values,
            class_means,
            mean_mode,
        })
    }

    /// Builds a matrix whose reference means are the unweighted means of
    /// the defined cells of each row.
    pub fn from_scores(kind: BaseMetricKind, values: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let means = values.iter().map(|r| unweighted_mean(r)).collect();
        Self::new(kind, values, means, MeanMode::UnweightedGroupMean)
    }

    pub fn kind(&self) -> BaseMetricKind {
        self.kind
    }

    pub fn mean_mode(&self) -> MeanMode {
        self.mean_mode
    }

    pub fn num_classes(&self) -> usize {
        self.values.len()
    }

    pub fn num_groups(&self) -> usize {
        self.values[0].len()
    }

    pub fn values(&self) -> &[Vec<Option<f64>>] {
        &self.values
    }

    pub fn row(&self, class: usize) -> &[Option<f64>] {
        &self.values[class]
    }

    pub fn class_means(&self) -> &[Option<f64>] {
        &self.class_means
    }

    pub fn is_defined(&self, class: usize, group: usize) -> bool {
        self.values[class][group].is_some()
    }
}

fn unweighted_mean(row: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = row.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Tallies records into one confusion matrix per group.
pub fn confusions_from_records(
    records: &[PredictionRecord],
    schema: &DatasetSchema,
) -> GroupedConfusions {
    let mut out = GroupedConfusions::zeros(schema.clone());
    for r in records {
        out.increment(r.group, r.true_class, r.predicted_class);
    }
    out
}

pub fn metric_matrix(
    confusions: &GroupedConfusions,
    kind: BaseMetricKind,
    mean_mode: MeanMode,
) -> Result<MetricMatrix> {
    let schema = confusions.schema();
    let merged = confusions.merged();
    let mut values = Vec::with_capacity(schema.num_classes());
    let mut means = Vec::with_capacity(schema.num_classes());
    for c in 0..schema.num_classes() {
        let row: Vec<Option<f64>> = (0..schema.num_groups())
            .map(|g| kind.evaluate(OneVsAll::from_matrix(confusions.group(g), c)))
            .collect();
        if row.iter().all(Option::is_none) {
            return Err(Error::UndefinedClass {
                class: schema.class_names()[c].clone(),
            });
        }
        let mean = match mean_mode {
            MeanMode::Pooled => kind.evaluate(OneVsAll::from_matrix(&merged, c)),
            MeanMode::UnweightedGroupMean => unweighted_mean(&row),
        };
        values.push(row);
        means.push(mean);
    }
    MetricMatrix::new(kind, values, means, mean_mode)
}

pub fn overall_accuracy(confusions: &GroupedConfusions) -> Result<f64> {
    let total = confusions.total();
    if total == 0 {
        return Err(Error::EmptyConfusions);
    }
    let correct: u64 = confusions
        .counts()
        .iter()
        .map(|m| (0..m.len()).map(|i| m[i][i]).sum::<u64>())
        .sum();
    Ok(correct as f64 / total as f64)
}

/// Marker written for cells whose metric is undefined.
pub const MISSING: &str = "NA";

/// Renders the full per-class, per-group table as comma-delimited text with
/// columns `class,group,value,defined,class_mean`.
pub fn disaggregated_table(matrix: &MetricMatrix, schema: &DatasetSchema) -> String {
    let mut out = String::from("class,group,value,defined,class_mean\n");
    let fmt = |v: Option<f64>| v.map_or_else(|| MISSING.to_string(), |v| format!("{v:.6}"));
    for c in 0..matrix.num_classes() {
        for g in 0..matrix.num_groups() {
            let v = matrix.values[c][g];
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&schema.class_names()[c]),
                csv_field(&schema.group_names()[g]),
                fmt(v),
                v.is_some(),
                fmt(matrix.class_means[c]),
            );
        }
    }
    out
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
