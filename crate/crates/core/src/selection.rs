//! Model selection over hyperparameter sweeps.
//!
//! A manifest lists one row per trained run (method, config, seed) with its
//! dev and test trade-off points. Runs are averaged over seeds per config,
//! one config per method is picked on dev data under a selection criterion,
//! and the chosen config is reported on test data. Methods are also
//! compared without selection through the area under their test frontier.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Position, Result};
use crate::metrics::csv_field;
use crate::tradeoff::{
    auc_pfc, dto, pareto_frontier, AucMode, Frontier, TradeoffPoint, UtopiaPoint,
};

/// Method name whose runs anchor the constrained criteria by default.
pub const BASELINE_METHOD: &str = "vanilla";

/// Two values closer than this count as tied in comparison tables.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRun {
    pub method: String,
    pub config_id: String,
    pub seed: i64,
    pub trade_off_param: Option<f64>,
    pub dev: TradeoffPoint,
    pub test: TradeoffPoint,
    pub dev_loss: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    method: String,
    config_id: String,
    seed: i64,
    #[serde(default)]
    trade_off_param: Option<f64>,
    dev_performance: f64,
    dev_fairness: f64,
    test_performance: f64,
    test_fairness: f64,
    #[serde(default)]
    dev_loss: Option<f64>,
}

impl RawRun {
    fn into_run(self) -> Result<CandidateRun> {
        if self.method.is_empty() || self.config_id.is_empty() {
            return Err(Error::invalid("empty method or config_id"));
        }
        Ok(CandidateRun {
            dev: TradeoffPoint::new(self.dev_performance, self.dev_fairness)?,
            test: TradeoffPoint::new(self.test_performance, self.test_fairness)?,
            method: self.method,
            config_id: self.config_id,
            seed: self.seed,
            trade_off_param: self.trade_off_param,
            dev_loss: self.dev_loss,
        })
    }
}

pub const MANIFEST_COLUMNS: [&str; 9] = [
    "method",
    "config_id",
    "seed",
    "trade_off_param",
    "dev_performance",
    "dev_fairness",
    "test_performance",
    "test_fairness",
    "dev_loss",
];

/// Reads a comma-delimited manifest with a header naming the run fields.
/// `trade_off_param` and `dev_loss` are optional columns and may be empty.
pub fn parse_manifest_csv(reader: impl Read) -> Result<Vec<CandidateRun>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(Position::line(1), e.to_string()))?
        .clone();
    let mut runs = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(Position::line(line), e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let raw: RawRun = row.deserialize(Some(&headers)).map_err(|e| {
            let field = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.field().map(|f| f as usize + 1),
                _ => None,
            };
            let pos = field.map_or(Position::line(line), |f| Position::field(line, f));
            Error::parse(pos, e.to_string())
        })?;
        runs.push(raw.into_run().map_err(|e| match e {
            Error::InvalidInput(m) => Error::parse(Position::line(line), m),
            other => other,
        })?);
    }
    check_unique(&runs)?;
    Ok(runs)
}

/// Reads a TOML manifest: an array of `[[run]]` tables with the run fields.
pub fn parse_manifest_toml(mut reader: impl Read) -> Result<Vec<CandidateRun>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        run: Vec<RawRun>,
    }
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let raw: Raw = toml::from_str(&text).map_err(|e| {
        let line = e
            .span()
            .map_or(1, |s| text[..s.start].matches('\n').count() + 1);
        Error::parse(Position::line(line), e.message().to_string())
    })?;
    let runs = raw
        .run
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.into_run()
                .map_err(|e| Error::invalid(format!("run #{}: {e}", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    check_unique(&runs)?;
    Ok(runs)
}

fn check_unique(runs: &[CandidateRun]) -> Result<()> {
    let mut seen = HashSet::new();
    for r in runs {
        if !seen.insert((&r.method, &r.config_id, r.seed)) {
            return Err(Error::invalid(format!(
                "duplicate run (method {:?}, config {:?}, seed {})",
                r.method, r.config_id, r.seed
            )));
        }
    }
    Ok(())
}

/// Seed-averaged view of one (method, config) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSummary {
    pub method: String,
    pub config_id: String,
    pub n_seeds: usize,
    pub trade_off_param: Option<f64>,
    pub dev: TradeoffPoint,
    pub test: TradeoffPoint,
    /// Sample standard deviation of (performance, fairness).
    pub dev_std: (f64, f64),
    pub test_std: (f64, f64),
    pub dev_loss: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn averaged(runs: &[&CandidateRun]) -> Result<ConfigSummary> {
    let col = |f: fn(&CandidateRun) -> f64| -> Vec<f64> { runs.iter().map(|r| f(r)).collect() };
    let (dp, dps) = mean_std(&col(|r| r.dev.performance));
    let (df, dfs) = mean_std(&col(|r| r.dev.fairness));
    let (tp, tps) = mean_std(&col(|r| r.test.performance));
    let (tf, tfs) = mean_std(&col(|r| r.test.fairness));
    let losses: Option<Vec<f64>> = runs.iter().map(|r| r.dev_loss).collect();
    let first = runs[0];
    Ok(ConfigSummary {
        method: first.method.clone(),
        config_id: first.config_id.clone(),
        n_seeds: runs.len(),
        trade_off_param: first.trade_off_param,
        dev: TradeoffPoint::new(dp.clamp(0.0, 1.0), df.clamp(0.0, 1.0))?,
        test: TradeoffPoint::new(tp.clamp(0.0, 1.0), tf.clamp(0.0, 1.0))?,
        dev_std: (dps, dfs),
        test_std: (tps, tfs),
        dev_loss: losses.map(|l| mean_std(&l).0),
    })
}

/// Averages runs over seeds per (method, config), ordered by method then
/// config id.
pub fn group_by_config(runs: &[CandidateRun]) -> Result<Vec<ConfigSummary>> {
    if runs.is_empty() {
        return Err(Error::invalid("empty manifest"));
    }
    check_unique(runs)?;
    let mut groups: BTreeMap<(&str, &str), Vec<&CandidateRun>> = BTreeMap::new();
    for r in runs {
        groups
            .entry((r.method.as_str(), r.config_id.as_str()))
            .or_default()
            .push(r);
    }
    groups
        .into_values()
        .map(|mut rs| {
            rs.sort_by_key(|r| r.seed);
            averaged(&rs)
        })
        .collect()
}

/// Every run as its own candidate, for selection without seed averaging.
/// Config ids become `<config_id>#<seed>`.
pub fn per_seed_candidates(runs: &[CandidateRun]) -> Result<Vec<ConfigSummary>> {
    check_unique(runs)?;
    let mut out: Vec<ConfigSummary> = runs
        .iter()
        .map(|r| {
            let mut s = averaged(&[r])?;
            s.config_id = format!("{}#{}", r.config_id, r.seed);
            Ok(s)
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| (&a.method, &a.config_id).cmp(&(&b.method, &b.config_id)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionCriterion {
    MinDto(UtopiaPoint),
    MaxPerformance,
    MaxFairness,
    /// Best performance among configs whose fairness beats the baseline by
    /// at least this many absolute points.
    PerfAtFairnessGain(f64),
    /// Best fairness among configs whose performance is at most this many
    /// absolute points below the baseline.
    FairnessAtPerfLoss(f64),
    /// Lowest mean dev loss; needs `dev_loss` on every run.
    MinDevLoss,
}

impl SelectionCriterion {
    /// The seven columns of the standard comparison: DTO, P, P@F+5%,
    /// P@F+10%, F, F@P-5%, F@P-10%.
    pub fn standard() -> Vec<SelectionCriterion> {
        use SelectionCriterion::*;
        vec![
            MinDto(UtopiaPoint::UNIT),
            MaxPerformance,
            PerfAtFairnessGain(0.05),
            PerfAtFairnessGain(0.10),
            MaxFairness,
            FairnessAtPerfLoss(0.05),
            FairnessAtPerfLoss(0.10),
        ]
    }

    pub fn needs_baseline(&self) -> bool {
        matches!(
            self,
            SelectionCriterion::PerfAtFairnessGain(_) | SelectionCriterion::FairnessAtPerfLoss(_)
        )
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SelectionCriterion::PerfAtFairnessGain(x)
            | SelectionCriterion::FairnessAtPerfLoss(x)
                if !(x > 0.0 && x < 1.0) =>
            {
                Err(Error::invalid(format!("threshold {x} outside (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

fn pct(x: f64) -> String {
    let v = x * 100.0;
    if (v - v.round()).abs() < 1e-9 {
        format!("{}%", v.round())
    } else {
        format!("{v}%")
    }
}

impl fmt::Display for SelectionCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionCriterion::MinDto(u) if u.is_unit() => f.write_str("dto"),
            SelectionCriterion::MinDto(u) => write!(
                f,
                "dto({},{};{},{})",
                u.performance, u.fairness, u.weights.0, u.weights.1
            ),
            SelectionCriterion::MaxPerformance => f.write_str("p"),
            SelectionCriterion::MaxFairness => f.write_str("f"),
            SelectionCriterion::PerfAtFairnessGain(x) => write!(f, "p@f+{}", pct(*x)),
            SelectionCriterion::FairnessAtPerfLoss(x) => write!(f, "f@p-{}", pct(*x)),
            SelectionCriterion::MinDevLoss => f.write_str("loss"),
        }
    }
}

impl FromStr for SelectionCriterion {
    type Err = Error;

    /// Accepts `dto`, `p`, `f`, `loss`, `p@f+<x>` and `f@p-<x>` where `<x>`
    /// is a fraction (`0.05`) or a percentage (`5%`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let c = match s.as_str() {
            "dto" => SelectionCriterion::MinDto(UtopiaPoint::UNIT),
            "p" => SelectionCriterion::MaxPerformance,
            "f" => SelectionCriterion::MaxFairness,
            "loss" => SelectionCriterion::MinDevLoss,
            _ => {
                if let Some(x) = s.strip_prefix("p@f+") {
                    SelectionCriterion::PerfAtFairnessGain(parse_fraction(x)?)
                } else if let Some(x) = s.strip_prefix("f@p-") {
                    SelectionCriterion::FairnessAtPerfLoss(parse_fraction(x)?)
                } else {
                    return Err(Error::invalid(format!("unknown selection criterion {s:?}")));
                }
            }
        };
        c.validate()?;
        Ok(c)
    }
}

/// Parses `0.82` or `82%` into a fraction.
pub fn parse_fraction(s: &str) -> Result<f64> {
    let s = s.trim();
    let (num, scale) = match s.strip_suffix('%') {
        Some(n) => (n.trim(), 0.01),
        None => (s, 1.0),
    };
    let v: f64 = num
        .parse()
        .map_err(|_| Error::invalid(format!("bad number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::invalid(format!("bad number {s:?}")));
    }
    Ok(v * scale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub method: String,
    pub criterion: SelectionCriterion,
    pub chosen_config: String,
    pub trade_off_param: Option<f64>,
    pub dev_point: TradeoffPoint,
    pub test_point: TradeoffPoint,
    pub test_std: (f64, f64),
    /// Distance of the test point to (1, 1).
    pub test_dto: f64,
}

type Scorer<'a> = Box<dyn Fn(&ConfigSummary) -> f64 + 'a>;

/// Picks one config of a single method on dev data. Ties on the criterion
/// go to higher dev fairness, then to the lexicographically smaller config
/// id, so the result does not depend on input order.
pub fn select(
    configs: &[ConfigSummary],
    criterion: SelectionCriterion,
    baseline: Option<TradeoffPoint>,
) -> Result<SelectionResult> {
    criterion.validate()?;
    let first = configs
        .first()
        .ok_or_else(|| Error::invalid("no configs to select from"))?;
    if configs.iter().any(|c| c.method != first.method) {
        return Err(Error::invalid("select expects configs of a single method"));
    }
    let need_baseline = || {
        baseline.ok_or_else(|| Error::invalid(format!("criterion {criterion} needs a baseline")))
    };
    let (feasible, score): (Vec<&ConfigSummary>, Scorer) = match criterion {
        SelectionCriterion::MinDto(u) => {
            for c in configs {
                dto(&c.dev, &u)?;
            }
            (
                configs.iter().collect(),
                Box::new(move |c| -u.weighted_distance(c.dev.performance, c.dev.fairness)),
            )
        }
        SelectionCriterion::MaxPerformance => {
            (configs.iter().collect(), Box::new(|c| c.dev.performance))
        }
        SelectionCriterion::MaxFairness => (configs.iter().collect(), Box::new(|c| c.dev.fairness)),
        SelectionCriterion::PerfAtFairnessGain(x) => {
            let threshold = need_baseline()?.fairness + x;
            let feasible: Vec<_> = configs
                .iter()
                .filter(|c| c.dev.fairness >= threshold)
                .collect();
            if feasible.is_empty() {
                return Err(Error::Infeasible(format!(
                    "{}: no config reaches dev fairness >= {threshold:.6} ({criterion})",
                    first.method
                )));
            }
            (feasible, Box::new(|c| c.dev.performance))
        }
        SelectionCriterion::FairnessAtPerfLoss(x) => {
            let threshold = need_baseline()?.performance - x;
            let feasible: Vec<_> = configs
                .iter()
                .filter(|c| c.dev.performance >= threshold)
                .collect();
            if feasible.is_empty() {
                return Err(Error::Infeasible(format!(
                    "{}: no config keeps dev performance >= {threshold:.6} ({criterion})",
                    first.method
                )));
            }
            (feasible, Box::new(|c| c.dev.fairness))
        }
        SelectionCriterion::MinDevLoss => {
            if configs.iter().any(|c| c.dev_loss.is_none()) {
                return Err(Error::invalid(
                    "minimum-loss selection needs dev_loss on every run",
                ));
            }
            (
                configs.iter().collect(),
                Box::new(|c| -c.dev_loss.unwrap_or(f64::NAN)),
            )
        }
    };
    let chosen = feasible
        .into_iter()
        .max_by(|a, b| {
            score(a)
                .total_cmp(&score(b))
                .then(a.dev.fairness.total_cmp(&b.dev.fairness))
                .then(b.config_id.cmp(&a.config_id))
        })
        .expect("feasible set is non-empty");
    Ok(SelectionResult {
        method: chosen.method.clone(),
        criterion,
        chosen_config: chosen.config_id.clone(),
        trade_off_param: chosen.trade_off_param,
        dev_point: chosen.dev,
        test_point: chosen.test,
        test_std: chosen.test_std,
        test_dto: dto(&chosen.test, &UtopiaPoint::UNIT)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Selected(SelectionResult),
    Infeasible(String),
}

impl Cell {
    pub fn test_dto(&self) -> Option<f64> {
        match self {
            Cell::Selected(r) => Some(r.test_dto),
            Cell::Infeasible(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub method: String,
    pub cells: Vec<Cell>,
    pub frontier: Frontier,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub criteria: Vec<SelectionCriterion>,
    pub auc_mode: AucMode,
    pub baseline: Option<TradeoffPoint>,
    pub rows: Vec<MethodRow>,
    /// `best[j]` holds the row indices with the lowest test DTO in column `j`.
    pub best: Vec<Vec<usize>>,
    /// Rows with the largest AUC.
    pub best_auc: Vec<usize>,
}

impl ComparisonTable {
    /// Distinct methods that win at least one criterion column.
    pub fn column_winners(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .best
            .iter()
            .flatten()
            .map(|&i| self.rows[i].method.as_str())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Comma-delimited export, one row per (method, criterion) plus one AUC
    /// row per method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,criterion,chosen_config,dev_performance,dev_fairness,\
             test_performance,test_fairness,test_performance_std,test_fairness_std,\
             value,best,tie\n",
        );
        for (i, row) in self.rows.iter().enumerate() {
            for (j, cell) in row.cells.iter().enumerate() {
                let best = self.best[j].contains(&i);
                let tie = best && self.best[j].len() > 1;
                let crit = self.criteria[j].to_string();
                let line = match cell {
                    Cell::Selected(r) => format!(
                        "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{best},{tie}",
                        csv_field(&row.method),
                        csv_field(&crit),
                        csv_field(&r.chosen_config),
                        r.dev_point.performance,
                        r.dev_point.fairness,
                        r.test_point.performance,
                        r.test_point.fairness,
                        r.test_std.0,
                        r.test_std.1,
                        r.test_dto
                    ),
                    Cell::Infeasible(_) => format!(
                        "{},{},,,,,,,,infeasible,false,false",
                        csv_field(&row.method),
                        csv_field(&crit)
                    ),
                };
                out.push_str(&line);
                out.push('\n');
            }
            let best = self.best_auc.contains(&i);
            out.push_str(&format!(
                "{},auc_{},,,,,,,,{:.6},{best},{}\n",
                csv_field(&row.method),
                self.auc_mode.name(),
                row.auc,
                best && self.best_auc.len() > 1
            ));
        }
        out
    }
}

/// Index set of the extreme values of `values` (ignoring `None`), with
/// everything within [`TIE_TOLERANCE`] of the extreme counted as tied.
fn best_indices(values: &[Option<f64>], smaller_is_better: bool) -> Vec<usize> {
    let sign = if smaller_is_better { 1.0 } else { -1.0 };
    let best = values
        .iter()
        .flatten()
        .map(|v| sign * v)
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Vec::new();
    }
    values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.filter(|v| sign * v - best <= TIE_TOLERANCE).map(|_| i))
        .collect()
}

/// Resolves the baseline point: an explicit override wins, otherwise the
/// seed-averaged dev point of the single config of [`BASELINE_METHOD`].
pub fn baseline_point(
    configs: &[ConfigSummary],
    override_point: Option<TradeoffPoint>,
) -> Result<Option<TradeoffPoint>> {
    if override_point.is_some() {
        return Ok(override_point);
    }
    let base: Vec<_> = configs
        .iter()
        .filter(|c| c.method == BASELINE_METHOD)
        .collect();
    match base.len() {
        0 => Ok(None),
        1 => Ok(Some(base[0].dev)),
        n => Err(Error::invalid(format!(
            "baseline method {BASELINE_METHOD:?} has {n} configs; pass an explicit baseline"
        ))),
    }
}

/// Selects per method and criterion and computes each method's test
/// frontier and AUC. The baseline method is not listed as a row.
pub fn compare_methods(
    runs: &[CandidateRun],
    criteria: &[SelectionCriterion],
    auc_mode: AucMode,
    baseline_override: Option<TradeoffPoint>,
) -> Result<ComparisonTable> {
    compare_configs(
        &group_by_config(runs)?,
        criteria,
        auc_mode,
        baseline_override,
    )
}

/// Same as [`compare_methods`] over already-grouped candidates (for example
/// from [`per_seed_candidates`]).
pub fn compare_configs(
    configs: &[ConfigSummary],
    criteria: &[SelectionCriterion],
    auc_mode: AucMode,
    baseline_override: Option<TradeoffPoint>,
) -> Result<ComparisonTable> {
    if criteria.is_empty() {
        return Err(Error::invalid("no selection criteria"));
    }
    let baseline = baseline_point(configs, baseline_override)?;
    let mut by_method: BTreeMap<&str, Vec<ConfigSummary>> = BTreeMap::new();
    for c in configs.iter().filter(|c| c.method != BASELINE_METHOD) {
        by_method
            .entry(c.method.as_str())
            .or_default()
            .push(c.clone());
    }
    if by_method.is_empty() {
        return Err(Error::invalid(
            "manifest has no methods besides the baseline",
        ));
    }
    let mut rows = Vec::with_capacity(by_method.len());
    for (method, cs) in by_method {
        let cells = criteria
            .iter()
            .map(|&crit| match select(&cs, crit, baseline) {
                Ok(r) => Ok(Cell::Selected(r)),
                Err(Error::Infeasible(m)) => Ok(Cell::Infeasible(m)),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        let tests: Vec<TradeoffPoint> = cs.iter().map(|c| c.test).collect();
        let frontier = pareto_frontier(&tests)?;
        let auc = auc_pfc(&frontier, auc_mode);
        rows.push(MethodRow {
            method: method.to_string(),
            cells,
            frontier,
            auc,
        });
    }
    let best = (0..criteria.len())
        .map(|j| {
            let col: Vec<Option<f64>> = rows.iter().map(|r| r.cells[j].test_dto()).collect();
            best_indices(&col, true)
        })
        .collect();
    let aucs: Vec<Option<f64>> = rows.iter().map(|r| Some(r.auc)).collect();
    let best_auc = best_indices(&aucs, false);
    Ok(ComparisonTable {
        criteria: criteria.to_vec(),
        auc_mode,
        baseline,
        rows,
        best,
        best_auc,
    })
}
