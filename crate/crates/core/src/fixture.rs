//! Synthetic prediction records with controlled per-cell true positive rates.

use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::dataset::{DatasetSchema, PredictionRecord, Split};
use crate::error::{Error, Position, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub schema: DatasetSchema,
    /// `n_per_cell[c][g]` records with true class `c` in group `g`.
    pub n_per_cell: Vec<Vec<u64>>,
    /// Probability of predicting the true class, per cell.
    pub tpr_targets: Vec<Vec<f64>>,
    /// Share of wrong predictions spread uniformly over all wrong classes.
    /// The rest goes to the next class index (wrapping).
    pub confusion_spread: f64,
    pub rng_seed: u64,
    pub split: Split,
}

impl FixtureSpec {
    /// Same size and target in every cell.
    pub fn uniform(schema: DatasetSchema, n: u64, tpr: f64, seed: u64) -> Self {
        let (c, g) = (schema.num_classes(), schema.num_groups());
        FixtureSpec {
            n_per_cell: vec![vec![n; g]; c],
            tpr_targets: vec![vec![tpr; g]; c],
            schema,
            confusion_spread: 1.0,
            rng_seed: seed,
            split: Split::Test,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (nc, ng) = (self.schema.num_classes(), self.schema.num_groups());
        if self.n_per_cell.len() != nc || self.n_per_cell.iter().any(|r| r.len() != ng) {
            return Err(Error::Schema(format!("n_per_cell must be {nc}x{ng}")));
        }
        if self.tpr_targets.len() != nc || self.tpr_targets.iter().any(|r| r.len() != ng) {
            return Err(Error::Schema(format!("tpr_targets must be {nc}x{ng}")));
        }
        if self.n_per_cell.iter().flatten().any(|&n| n == 0) {
            return Err(Error::invalid("n_per_cell entries must be positive"));
        }
        for &t in self.tpr_targets.iter().flatten() {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::invalid(format!("tpr target {t} outside (0, 1]")));
            }
            if t < 1.0 && nc < 2 {
                return Err(Error::invalid(
                    "a single class leaves no wrong class to predict",
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.confusion_spread) {
            return Err(Error::invalid(format!(
                "confusion_spread {} outside [0, 1]",
                self.confusion_spread
            )));
        }
        Ok(())
    }

    /// Reads a TOML fixture description:
    ///
    /// ```toml
    /// classes = ["nurse", "surgeon"]
    /// groups = ["f", "m"]
    /// n_per_cell = [[100, 100], [100, 100]]
    /// tpr_targets = [[0.9, 0.8], [0.75, 0.8]]
    /// confusion_spread = 1.0   # optional, default 1
    /// seed = 7                 # optional, default 0
    /// split = "test"           # optional
    /// ```
    pub fn parse(mut reader: impl Read) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            classes: Vec<String>,
            groups: Vec<String>,
            #[serde(default)]
            positive_class: Option<String>,
            n_per_cell: Vec<Vec<u64>>,
            tpr_targets: Vec<Vec<f64>>,
            #[serde(default = "one")]
            confusion_spread: f64,
            #[serde(default)]
            seed: u64,
            #[serde(default)]
            split: Option<String>,
        }
        fn one() -> f64 {
            1.0
        }
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let raw: Raw = toml::from_str(&text).map_err(|e| {
            let line = e
                .span()
                .map_or(1, |s| text[..s.start].matches('\n').count() + 1);
            Error::parse(Position::line(line), e.message().to_string())
        })?;
        let positive = match &raw.positive_class {
            Some(name) => {
                Some(raw.classes.iter().position(|c| c == name).ok_or_else(|| {
                    Error::Schema(format!("positive_class {name:?} is not a class"))
                })?)
            }
            None => None,
        };
        let spec = FixtureSpec {
            schema: DatasetSchema::new(raw.classes, raw.groups, positive)?,
            n_per_cell: raw.n_per_cell,
            tpr_targets: raw.tpr_targets,
            confusion_spread: raw.confusion_spread,
            rng_seed: raw.seed,
            split: raw
                .split
                .as_deref()
                .unwrap_or("test")
                .parse()
                .map_err(Error::InvalidInput)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Draws the records cell by cell (class-major, then group) from a ChaCha8
/// stream seeded with `rng_seed`, so equal specs give identical output.
pub fn generate_fixture(spec: &FixtureSpec) -> Result<Vec<PredictionRecord>> {
    spec.validate()?;
    let nc = spec.schema.num_classes();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let total: u64 = spec.n_per_cell.iter().flatten().sum();
    let mut out = Vec::with_capacity(total as usize);
    for (c, (sizes, targets)) in spec.n_per_cell.iter().zip(&spec.tpr_targets).enumerate() {
        for (g, (&n, &tpr)) in sizes.iter().zip(targets).enumerate() {
            for _ in 0..n {
                let predicted = if rng.gen_bool(tpr) {
                    c
                } else if rng.gen_bool(spec.confusion_spread) {
                    // uniform over the nc - 1 wrong classes
                    let k = rng.gen_range(0..nc - 1);
                    if k >= c {
                        k + 1
                    } else {
                        k
                    }
                } else {
                    (c + 1) % nc
                };
                out.push(PredictionRecord {
                    instance_id: format!("r{}", out.len()),
                    true_class: c,
                    predicted_class: predicted,
                    group: g,
                    split: spec.split,
                });
            }
        }
    }
    Ok(out)
}
