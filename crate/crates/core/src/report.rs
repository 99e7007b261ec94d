//! Checklist reports, dataset statistics and curve exports.

use std::fmt::Write as _;
use std::io::Read;

use crate::aggregation::{AggregationSpec, BasicUnit};
use crate::dataset::{GroupedConfusions, PredictionRecord, Split};
use crate::error::{Error, Position, Result};
use crate::metrics::{csv_field, BaseMetricKind};
use crate::tradeoff::{AucMode, Frontier, TradeoffPoint};

/// Joint distribution of true class and group.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub class_names: Vec<String>,
    pub group_names: Vec<String>,
    /// `counts[c][g]`: instances with true class `c` in group `g`.
    pub counts: Vec<Vec<u64>>,
    /// Instances per split, in train/dev/test order. Empty when the stats
    /// were built from confusion counts alone.
    pub partition_sizes: Vec<(Split, u64)>,
}

impl DatasetStats {
    pub fn from_confusions(conf: &GroupedConfusions) -> Self {
        let schema = conf.schema();
        let counts = (0..schema.num_classes())
            .map(|c| {
                (0..schema.num_groups())
                    .map(|g| conf.group(g)[c].iter().sum())
                    .collect()
            })
            .collect();
        DatasetStats {
            class_names: schema.class_names().to_vec(),
            group_names: schema.group_names().to_vec(),
            counts,
            partition_sizes: Vec::new(),
        }
    }

    /// Stats over `records` (all splits pooled) with per-split sizes.
    pub fn from_records(records: &[PredictionRecord], conf: &GroupedConfusions) -> Self {
        let mut stats = Self::from_confusions(conf);
        stats.partition_sizes = [Split::Train, Split::Dev, Split::Test]
            .into_iter()
            .map(|s| (s, records.iter().filter(|r| r.split == s).count() as u64))
            .filter(|&(_, n)| n > 0)
            .collect();
        stats
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn class_total(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn group_total(&self, g: usize) -> u64 {
        self.counts.iter().map(|row| row[g]).sum()
    }

    /// `counts[c][g] / total` in percent.
    pub fn joint_percent(&self, c: usize, g: usize) -> f64 {
        percent(self.counts[c][g], self.total())
    }

    /// Share of group `g` within class `c`, in percent.
    pub fn row_percent(&self, c: usize, g: usize) -> f64 {
        percent(self.counts[c][g], self.class_total(c))
    }

    /// One row per class: counts and joint percentages per group, then the
    /// class total and its share.
    pub fn table(&self) -> String {
        let mut out = String::from("class");
        for g in &self.group_names {
            let g = csv_field(g);
            let _ = write!(out, ",{g}_n,{g}_pct");
        }
        out.push_str(",total_n,total_pct\n");
        let total = self.total();
        for (c, name) in self.class_names.iter().enumerate() {
            out.push_str(&csv_field(name));
            for g in 0..self.group_names.len() {
                let _ = write!(
                    out,
                    ",{},{:.2}",
                    self.counts[c][g],
                    self.joint_percent(c, g)
                );
            }
            let _ = writeln!(
                out,
                ",{},{:.2}",
                self.class_total(c),
                percent(self.class_total(c), total)
            );
        }
        out.push_str("total");
        for g in 0..self.group_names.len() {
            let _ = write!(
                out,
                ",{},{:.2}",
                self.group_total(g),
                percent(self.group_total(g), total)
            );
        }
        let _ = writeln!(out, ",{total},{:.2}", if total > 0 { 100.0 } else { 0.0 });
        out
    }
}

fn percent(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

/// Free-text justification for each aggregation choice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Motivations {
    pub metric: String,
    pub unit: String,
    pub group_aggregation: String,
    pub class_aggregation: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChecklistReport {
    pub dataset_stats: DatasetStats,
    pub metric: BaseMetricKind,
    pub unit: BasicUnit,
    pub spec: AggregationSpec,
    pub motivations: Motivations,
    /// Items with no motivation; non-empty means the report is incomplete.
    pub missing: Vec<&'static str>,
}

impl ChecklistReport {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn render(&self) -> String {
        let s = &self.spec;
        let m = &self.motivations;
        let or_missing = |t: &str| {
            if t.trim().is_empty() {
                "(missing)".to_string()
            } else {
                t.trim().to_string()
            }
        };
        let mut out = String::new();
        let _ = writeln!(out, "# Fairness evaluation checklist");
        if !self.is_complete() {
            let _ = writeln!(
                out,
                "\nINCOMPLETE: no motivation for {}",
                self.missing.join(", ")
            );
        }
        let _ = writeln!(out, "\n## 1. Dataset statistics\n");
        let _ = writeln!(out, "total instances: {}", self.dataset_stats.total());
        for (split, n) in &self.dataset_stats.partition_sizes {
            let _ = writeln!(out, "{} instances: {n}", split.as_str());
        }
        let _ = writeln!(out, "\n{}", self.dataset_stats.table());
        let _ = writeln!(
            out,
            "## 2. Base metric\n\n{}\n\n{}\n",
            self.metric.name(),
            or_missing(&m.metric)
        );
        let _ = writeln!(
            out,
            "## 3. Basic unit\n\n{}\n\n{}\n",
            self.unit,
            or_missing(&m.unit)
        );
        let weights = s
            .group_weights
            .as_ref()
            .map_or("uniform".to_string(), |w| format!("{w:?}"));
        let p = s.group_p().map_or("n/a".to_string(), |p| p.to_string());
        let _ = writeln!(
            out,
            "## 4. Group-wise aggregation\n\nreducer: {}\np: {p}\nweights: {weights}\nmean_mode: {}\ndirection: {}\n\n{}\n",
            s.group,
            s.mean_mode.name(),
            s.direction.name(),
            or_missing(&m.group_aggregation)
        );
        let _ = writeln!(
            out,
            "## 5. Class-wise aggregation\n\n{}\n\n{}",
            s.class_method,
            or_missing(&m.class_aggregation)
        );
        out
    }
}

/// Assembles the five checklist items. Missing motivation text does not fail
/// the call; it is logged and recorded in `missing`.
pub fn checklist_report(
    stats: DatasetStats,
    metric: BaseMetricKind,
    spec: &AggregationSpec,
    motivations: Motivations,
) -> Result<ChecklistReport> {
    spec.validate(Some(stats.group_names.len()))?;
    let mut missing = Vec::new();
    if stats.total() == 0 {
        missing.push("dataset_stats");
    }
    for (name, text) in [
        ("metric", &motivations.metric),
        ("unit", &motivations.unit),
        ("group_aggregation", &motivations.group_aggregation),
        ("class_aggregation", &motivations.class_aggregation),
    ] {
        if text.trim().is_empty() {
            missing.push(name);
        }
    }
    if !missing.is_empty() {
        log::warn!("checklist report incomplete: {}", missing.join(", "));
    }
    Ok(ChecklistReport {
        dataset_stats: stats,
        metric,
        unit: spec.unit,
        spec: spec.clone(),
        motivations,
        missing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFormat {
    Delimited,
    Svg,
}

/// Writes a frontier as `performance,fairness` rows in frontier order, or
/// as a small static SVG plot.
pub fn export_curve(frontier: &Frontier, format: CurveFormat, mode: AucMode) -> String {
    match format {
        CurveFormat::Delimited => {
            let mut out = String::from("performance,fairness\n");
            for p in frontier.points() {
                let _ = writeln!(out, "{},{}", p.performance, p.fairness);
            }
            out
        }
        CurveFormat::Svg => svg(frontier, mode),
    }
}

/// Reads the delimited curve format back. Rows may come in any order; the
/// points must be mutually non-dominated.
pub fn parse_curve(reader: impl Read) -> Result<Frontier> {
    let mut points = parse_points(reader)?;
    points.sort_by(|a, b| b.performance.total_cmp(&a.performance));
    Frontier::from_sorted(points)
}

/// Reads `performance` and `fairness` columns from a delimited file with a
/// header. Other columns are ignored.
pub fn parse_points(mut reader: impl Read) -> Result<Vec<TradeoffPoint>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(Position::line(1), e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(Position::line(1), format!("missing column {name:?}")))
    };
    let (pi, fi) = (col("performance")?, col("fairness")?);
    let mut points = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(Position::line(line), e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> Result<f64> {
            row.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(Position::field(line, i + 1), "expected a number"))
        };
        let point = TradeoffPoint::new(num(pi)?, num(fi)?)
            .map_err(|e| Error::parse(Position::line(line), e.to_string()))?;
        points.push(point);
    }
    if points.is_empty() {
        return Err(Error::invalid("no points"));
    }
    Ok(points)
}

const SIZE: f64 = 400.0;
const MARGIN: f64 = 40.0;

fn sx(x: f64) -> f64 {
    MARGIN + x * (SIZE - 2.0 * MARGIN)
}

fn sy(y: f64) -> f64 {
    SIZE - MARGIN - y * (SIZE - 2.0 * MARGIN)
}

fn svg(frontier: &Frontier, mode: AucMode) -> String {
    let pts = frontier.points();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let (x0, x1, y0, y1) = (sx(0.0), sx(1.0), sy(0.0), sy(1.0));
    let _ = writeln!(
        out,
        r#"<rect class="axes" x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">performance</text>"#,
        (x0 + x1) / 2.0,
        SIZE - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="12" y="{}" text-anchor="middle" transform="rotate(-90 12 {})">fairness</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    if !pts.is_empty() {
        let mut d = format!("M {:.2} {:.2}", sx(0.0), sy(pts[0].fairness));
        let mut prev = pts[0];
        let _ = write!(d, " L {:.2} {:.2}", sx(prev.performance), sy(prev.fairness));
        for p in &pts[1..] {
            if mode == AucMode::Step {
                let _ = write!(d, " L {:.2} {:.2}", sx(p.performance), sy(prev.fairness));
            }
            let _ = write!(d, " L {:.2} {:.2}", sx(p.performance), sy(p.fairness));
            prev = *p;
        }
        let last = pts[pts.len() - 1];
        let _ = write!(d, " L {:.2} {:.2}", sx(last.performance), sy(0.0));
        let _ = writeln!(
            out,
            r#"<path class="curve {}" d="{d}" fill="none" stroke="steelblue"/>"#,
            mode.name()
        );
    }
    for p in pts {
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"><title>{p}</title></circle>"#,
            sx(p.performance),
            sy(p.fairness)
        );
    }
    let _ = writeln!(
        out,
        r#"<rect class="utopia" x="{:.2}" y="{:.2}" width="8" height="8" fill="crimson"><title>utopia (1, 1)</title></rect>"#,
        sx(1.0) - 4.0,
        sy(1.0) - 4.0
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::Preset;
    use crate::dataset::DatasetSchema;

    fn toy_confusions() -> GroupedConfusions {
        let schema = DatasetSchema::from_names(&["c0", "c1"], &["g0", "g1"]).unwrap();
        GroupedConfusions::new(
            schema,
            vec![vec![vec![2, 1], vec![0, 0]], vec![vec![0, 0], vec![1, 2]]],
        )
        .unwrap()
    }

    fn motivations() -> Motivations {
        Motivations {
            metric: "equal opportunity".into(),
            unit: "absolute gaps".into(),
            group_aggregation: "sum".into(),
            class_aggregation: "rms".into(),
        }
    }

    #[test]
    fn toy_joint_table() {
        let stats = DatasetStats::from_confusions(&toy_confusions());
        assert_eq!(stats.counts, vec![vec![3, 0], vec![0, 3]]);
        assert_eq!(stats.joint_percent(0, 0), 50.0);
        assert_eq!(stats.joint_percent(1, 1), 50.0);
        assert_eq!((stats.class_total(0), stats.class_total(1)), (3, 3));
        assert_eq!(stats.row_percent(0, 0), 100.0);
        let table = stats.table();
        assert!(table.starts_with("class,g0_n,g0_pct,g1_n,g1_pct,total_n,total_pct\n"));
        assert!(table.contains("c0,3,50.00,0,0.00,3,50.00\n"));
        assert!(table.ends_with("total,3,50.00,3,50.00,6,100.00\n"));
    }

    #[test]
    fn missing_motivation_marks_incomplete() {
        let stats = DatasetStats::from_confusions(&toy_confusions());
        let spec = Preset::SumGapRms.spec();
        let r = checklist_report(
            stats.clone(),
            BaseMetricKind::Tpr,
            &spec,
            Motivations::default(),
        )
        .unwrap();
        assert!(!r.is_complete());
        assert_eq!(r.missing.len(), 4);
        assert!(r.render().contains("INCOMPLETE"));

        let r = checklist_report(stats, BaseMetricKind::Tpr, &spec, motivations()).unwrap();
        assert!(r.is_complete());
        assert!(!r.render().contains("(missing)"));
    }

    #[test]
    fn report_echoes_spec() {
        let stats = DatasetStats::from_confusions(&toy_confusions());
        let spec = Preset::MeanGap.spec().with_weights(vec![0.25, 0.75]);
        let r = checklist_report(stats, BaseMetricKind::Tpr, &spec, motivations()).unwrap();
        assert_eq!(r.unit, spec.unit);
        assert_eq!(r.spec, spec);
        let text = r.render();
        assert!(text.contains("p: 1\n"), "{text}");
        assert!(text.contains("weights: [0.25, 0.75]"));
        assert!(text.contains("mean_mode: pooled"));
    }

    fn two_point() -> Frontier {
        Frontier::from_sorted(vec![
            TradeoffPoint::new(0.8, 0.5).unwrap(),
            TradeoffPoint::new(0.6, 0.9).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn delimited_round_trip() {
        let f = two_point();
        let text = export_curve(&f, CurveFormat::Delimited, AucMode::Step);
        assert_eq!(text, "performance,fairness\n0.8,0.5\n0.6,0.9\n");
        assert_eq!(parse_curve(text.as_bytes()).unwrap(), f);
    }

    #[test]
    fn curve_parse_errors() {
        assert!(parse_curve("p,f\n0.1,0.2\n".as_bytes()).is_err());
        let err = parse_curve("performance,fairness\n0.5,x\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            Error::Parse {
                position: Position {
                    line: 2,
                    field: Some(2)
                },
                ..
            }
        ));
        // dominated rows are not a frontier
        assert!(parse_curve("performance,fairness\n0.5,0.5\n0.4,0.4\n".as_bytes()).is_err());
    }

    #[test]
    fn svg_markers() {
        let single = Frontier::from_sorted(vec![TradeoffPoint::new(0.7, 0.6).unwrap()]).unwrap();
        let doc = export_curve(&single, CurveFormat::Svg, AucMode::Step);
        assert_eq!(doc.matches("class=\"point\"").count(), 1);
        assert_eq!(doc.matches("class=\"utopia\"").count(), 1);
        assert!(doc.starts_with("<svg") && doc.ends_with("</svg>\n"));

        let doc = export_curve(&two_point(), CurveFormat::Svg, AucMode::Linear);
        assert_eq!(doc.matches("<circle").count(), 2);
        assert!(doc.contains("curve linear"));
    }
}
