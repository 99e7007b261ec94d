use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use fairagg::aggregation::{
    aggregate, recommend, AggregationSpec, BasicUnit, ClassAggregation, DecisionAnswers, Exponent,
    GroupReducer, Preset, DEFAULT_DIFFERENCE_GAMMA, DEFAULT_RATIO_GAMMA,
};
use fairagg::dataset::{
    export_confusions, infer_schema, parse_confusions, parse_records, write_records, DatasetSchema,
    GroupedConfusions, PredictionRecord, Split,
};
use fairagg::fixture::{generate_fixture, FixtureSpec};
use fairagg::metrics::{
    confusions_from_records, disaggregated_table, metric_matrix, overall_accuracy, BaseMetricKind,
    MeanMode,
};
use fairagg::report::{
    checklist_report, export_curve, parse_curve, parse_points, CurveFormat, DatasetStats,
    Motivations,
};
use fairagg::selection::{
    baseline_point, compare_configs, group_by_config, parse_manifest_csv, parse_manifest_toml,
    per_seed_candidates, select, CandidateRun, Cell, ConfigSummary, SelectionCriterion,
};
use fairagg::tradeoff::{
    auc_pfc, dto, pareto_frontier, partial_auc_pfc, polar_dto_area, utopia_shift_check,
    AreaConstraint, AucMode, Frontier, TradeoffPoint, UtopiaPoint,
};
use fairagg::Error;
use toml::{Table, Value};

use crate::{
    AggregateArgs, AucArgs, Command, CompareArgs, DataInput, DtoArgs, FixtureArgs, FrontierArgs,
    ManifestArgs, MetricsArgs, PointsInput, ReportArgs, SelectArgs, SpecArgs, UtopiaArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Metrics(a) => metrics(a),
        Command::Aggregate(a) => aggregate_cmd(a),
        Command::Frontier(a) => frontier(a),
        Command::Dto(a) => dto_cmd(a),
        Command::Auc(a) => auc(a),
        Command::Select(a) => select_cmd(a),
        Command::Compare(a) => compare(a),
        Command::Report(a) => report(a),
        Command::Fixture(a) => fixture(a),
    }
}

/// Error label and exit code: 2 for bad input, 3 when no candidate satisfies
/// a selection constraint, 4 for internal invariant violations.
pub fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    match err.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Infeasible(_)) => ("infeasible", 3),
        Some(Error::Invariant(_)) => ("invariant", 4),
        _ => ("input", 2),
    }
}

fn open(path: &str) -> Result<Box<dyn Read>> {
    if path == "-" {
        return Ok(Box::new(io::stdin()));
    }
    let f = File::open(path).with_context(|| format!("opening {path}"))?;
    Ok(Box::new(io::BufReader::new(f)))
}

fn read_all(path: &str) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    open(path)?
        .read_to_end(&mut buf)
        .with_context(|| format!("reading {path}"))?;
    Ok(buf)
}

fn emit(output: Option<&str>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {path}")),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn round6(x: f64) -> f64 {
    if x.is_finite() {
        (x * 1e6).round() / 1e6
    } else {
        x
    }
}

fn num(x: f64) -> Value {
    Value::Float(round6(x))
}

fn point_table(prefix: &str, p: &TradeoffPoint, t: &mut Table) {
    t.insert(format!("{prefix}performance"), num(p.performance));
    t.insert(format!("{prefix}fairness"), num(p.fairness));
}

fn render(config: Table, result: Table) -> Result<String> {
    let mut doc = Table::new();
    doc.insert("config".into(), Value::Table(config));
    doc.insert("result".into(), Value::Table(result));
    Ok(toml::to_string(&doc)?)
}

fn comment_header(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
}

struct Data {
    confusions: GroupedConfusions,
    records: Option<Vec<PredictionRecord>>,
}

fn load_data(input: &DataInput) -> Result<Data> {
    if let Some(path) = &input.confusions {
        let confusions = parse_confusions(open(path)?).with_context(|| format!("in {path}"))?;
        return Ok(Data {
            confusions,
            records: None,
        });
    }
    let Some(path) = &input.records else {
        bail!(Error::InvalidInput("pass --records or --confusions".into()));
    };
    let bytes = read_all(path)?;
    let schema = match &input.schema {
        Some(s) => DatasetSchema::parse(open(s)?).with_context(|| format!("in {s}"))?,
        None => infer_schema(bytes.as_slice()).with_context(|| format!("in {path}"))?,
    };
    let mut records =
        parse_records(bytes.as_slice(), &schema).with_context(|| format!("in {path}"))?;
    if let Some(s) = &input.split {
        let split = Split::from_str(s).map_err(Error::InvalidInput)?;
        records.retain(|r| r.split == split);
        if records.is_empty() {
            bail!(Error::InvalidInput(format!("no records in split {s:?}")));
        }
    }
    let confusions = confusions_from_records(&records, &schema);
    Ok(Data {
        confusions,
        records: Some(records),
    })
}

fn parse_unit(name: &str, gamma: Option<f64>) -> Result<BasicUnit> {
    Ok(match name {
        "score" => BasicUnit::Score,
        "gap" => BasicUnit::Gap,
        "ratio" => BasicUnit::Ratio,
        "gap_threshold" => BasicUnit::GapThreshold(gamma.unwrap_or(DEFAULT_DIFFERENCE_GAMMA)),
        "ratio_threshold" => BasicUnit::RatioThreshold(gamma.unwrap_or(DEFAULT_RATIO_GAMMA)),
        other => bail!(Error::InvalidInput(format!(
            "unknown unit {other:?} (expected score, gap, ratio, gap_threshold or ratio_threshold)"
        ))),
    })
}

fn parse_reducer(name: &str, p: Option<Exponent>) -> Result<GroupReducer> {
    Ok(match name {
        "power_mean" | "generalized_mean" => {
            GroupReducer::PowerMean(p.unwrap_or(Exponent::ARITHMETIC))
        }
        "sum" => GroupReducer::Sum,
        "variance" => GroupReducer::Variance,
        "range" => GroupReducer::Range,
        "max_min_ratio" => GroupReducer::MaxMinRatio,
        other => bail!(Error::InvalidInput(format!(
            "unknown reducer {other:?} (expected power_mean, sum, variance, range or max_min_ratio)"
        ))),
    })
}

fn parse_class_method(
    args: &SpecArgs,
    name: &str,
    schema: &DatasetSchema,
) -> Result<ClassAggregation> {
    Ok(match name {
        "mean" => ClassAggregation::Mean,
        "quadratic_mean" => ClassAggregation::QuadraticMean,
        "binary" => {
            let c = args.class_index.or(schema.positive_class()).ok_or_else(|| {
                Error::InvalidInput("binary class aggregation needs --class-index".into())
            })?;
            ClassAggregation::Binary(c)
        }
        "generalized_mean" => {
            let p = args.class_p.as_deref().ok_or_else(|| {
                Error::InvalidInput("generalized_mean class aggregation needs --class-p".into())
            })?;
            ClassAggregation::GeneralizedMean(p.parse()?)
        }
        other => bail!(Error::InvalidInput(format!(
            "unknown class aggregation {other:?} (expected mean, quadratic_mean, binary or generalized_mean)"
        ))),
    })
}

/// Builds the aggregation from a preset, recommender answers or explicit
/// parts, then applies the overrides.
fn build_spec(args: &SpecArgs, schema: &DatasetSchema) -> Result<(AggregationSpec, String)> {
    let p: Option<Exponent> = args.p.as_deref().map(str::parse).transpose()?;
    let (mut spec, source) = if let Some(focus) = &args.focus {
        let answers = DecisionAnswers {
            focus: focus.parse()?,
            disparity: args.disparity.as_deref().unwrap_or_default().parse()?,
            summary: args.summary.as_deref().unwrap_or_default().parse()?,
            emphasize_worse: args.emphasize_worse,
        };
        (recommend(answers), "recommended".to_string())
    } else if let Some(name) = &args.preset {
        if args.unit.is_some() || args.reducer.is_some() {
            bail!(Error::InvalidInput(
                "--preset cannot be combined with --unit or --reducer".into()
            ));
        }
        (Preset::from_str(name)?.spec(), name.clone())
    } else if let Some(unit) = &args.unit {
        let unit = parse_unit(unit, args.gamma)?;
        let reducer = parse_reducer(args.reducer.as_deref().unwrap_or("power_mean"), p)?;
        (
            AggregationSpec::new(unit, reducer, ClassAggregation::Mean),
            "custom".to_string(),
        )
    } else {
        bail!(Error::InvalidInput(
            "choose an aggregation with --preset, --unit or --focus/--disparity/--summary".into()
        ));
    };
    if let Some(p) = p {
        match spec.group {
            GroupReducer::PowerMean(_) => spec.group = GroupReducer::PowerMean(p),
            other => bail!(Error::InvalidInput(format!(
                "--p does not apply to reducer {other}"
            ))),
        }
    }
    if let Some(m) = &args.class_method {
        spec = spec.with_class_method(parse_class_method(args, m, schema)?);
    }
    if let Some(g) = args.gamma {
        if spec.unit.gamma().is_none() {
            bail!(Error::InvalidInput(format!(
                "--gamma does not apply to unit {}",
                spec.unit
            )));
        }
        spec = spec.with_gamma(g);
    }
    if let Some(w) = &args.weights {
        spec = spec.with_weights(w.clone());
    }
    if let Some(m) = &args.mean_mode {
        spec = spec.with_mean_mode(m.parse()?);
    }
    spec.validate(Some(schema.num_groups()))?;
    Ok((spec, source))
}

fn spec_table(spec: &AggregationSpec, source: &str, metric: BaseMetricKind) -> Table {
    let mut t = Table::new();
    t.insert("aggregation".into(), source.into());
    t.insert("metric".into(), metric.name().into());
    t.insert("unit".into(), spec.unit.to_string().into());
    t.insert("group_reducer".into(), spec.group.to_string().into());
    if let Some(p) = spec.group_p() {
        t.insert("p".into(), p.to_string().into());
    }
    if let Some(w) = &spec.group_weights {
        t.insert(
            "weights".into(),
            Value::Array(w.iter().map(|&x| num(x)).collect()),
        );
    }
    t.insert(
        "class_aggregation".into(),
        spec.class_method.to_string().into(),
    );
    t.insert("mean_mode".into(), spec.mean_mode.name().into());
    t.insert("direction".into(), spec.direction.name().into());
    t
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let data = load_data(&a.input)?;
    let kind: BaseMetricKind = a.metric.parse()?;
    let mode: MeanMode = a.mean_mode.parse()?;
    let m = metric_matrix(&data.confusions, kind, mode)?;
    if let Some(path) = &a.export_confusions {
        std::fs::write(path, export_confusions(&data.confusions))
            .with_context(|| format!("writing {path}"))?;
    }
    let header = comment_header(&[
        ("metric", kind.name().to_string()),
        ("mean_mode", mode.name().to_string()),
        ("instances", data.confusions.total().to_string()),
        (
            "overall_accuracy",
            format!("{:.6}", overall_accuracy(&data.confusions)?),
        ),
    ]);
    emit(
        a.output.as_deref(),
        &(header + &disaggregated_table(&m, data.confusions.schema())),
    )
}

fn aggregate_cmd(a: AggregateArgs) -> Result<()> {
    if a.list_presets {
        let names: String = Preset::ALL
            .iter()
            .map(|p| format!("{}\n", p.name()))
            .collect();
        return emit(a.output.as_deref(), &names);
    }
    let data = load_data(&a.input)?;
    let schema = data.confusions.schema();
    let kind: BaseMetricKind = a.metric.parse()?;
    let (spec, source) = build_spec(&a.spec, schema)?;
    let m = metric_matrix(&data.confusions, kind, spec.mean_mode)?;
    let out = aggregate(&m, &spec)?;

    let mut result = Table::new();
    result.insert("fairness".into(), num(out.fairness));
    result.insert("delta".into(), num(out.delta));
    let betas: Table = schema
        .class_names()
        .iter()
        .zip(&out.betas)
        .map(|(name, b)| (name.clone(), b.map_or_else(|| Value::from("NA"), num)))
        .collect();
    result.insert("betas".into(), Value::Table(betas));
    emit(
        a.output.as_deref(),
        &render(spec_table(&spec, &source, kind), result)?,
    )
}

fn utopia(u: &UtopiaArgs) -> Result<UtopiaPoint> {
    Ok(UtopiaPoint::new(u.utopia_performance, u.utopia_fairness)?
        .with_weights(u.dto_weights[0], u.dto_weights[1])?)
}

fn load_runs(path: &str) -> Result<Vec<CandidateRun>> {
    let reader = open(path)?;
    let is_toml = Path::new(path).extension().is_some_and(|e| e == "toml");
    let runs = if is_toml {
        parse_manifest_toml(reader)
    } else {
        parse_manifest_csv(reader)
    };
    runs.with_context(|| format!("in {path}"))
}

fn method_configs<'a>(
    configs: &'a [ConfigSummary],
    method: &str,
) -> Result<Vec<&'a ConfigSummary>> {
    let picked: Vec<_> = configs.iter().filter(|c| c.method == method).collect();
    if picked.is_empty() {
        let mut known: Vec<&str> = configs.iter().map(|c| c.method.as_str()).collect();
        known.dedup();
        bail!(Error::InvalidInput(format!(
            "method {method:?} not in manifest (have {})",
            known.join(", ")
        )));
    }
    Ok(picked)
}

fn load_points(input: &PointsInput) -> Result<Vec<TradeoffPoint>> {
    if let Some(path) = &input.points {
        return parse_points(open(path)?).with_context(|| format!("in {path}"));
    }
    let (Some(path), Some(method)) = (&input.manifest, &input.method) else {
        bail!(Error::InvalidInput(
            "pass --points or --manifest with --method".into()
        ));
    };
    let configs = group_by_config(&load_runs(path)?)?;
    let split: Split = input.split.parse().map_err(Error::InvalidInput)?;
    let pick = match split {
        Split::Test => |c: &ConfigSummary| c.test,
        Split::Dev => |c: &ConfigSummary| c.dev,
        Split::Train => bail!(Error::InvalidInput(
            "manifests hold dev and test points only".into()
        )),
    };
    Ok(method_configs(&configs, method)?
        .into_iter()
        .map(pick)
        .collect())
}

fn frontier(a: FrontierArgs) -> Result<()> {
    let points = load_points(&a.input)?;
    let f = pareto_frontier(&points)?;
    let format = match a.format.as_str() {
        "csv" => CurveFormat::Delimited,
        "svg" => CurveFormat::Svg,
        other => bail!(Error::InvalidInput(format!(
            "unknown format {other:?} (csv or svg)"
        ))),
    };
    log::info!("{} of {} points on the frontier", f.len(), points.len());
    emit(
        a.output.as_deref(),
        &export_curve(&f, format, a.mode.parse()?),
    )
}

fn dto_cmd(a: DtoArgs) -> Result<()> {
    let q = TradeoffPoint::new(a.performance, a.fairness)?;
    let u = utopia(&a.utopia)?;
    let mut config = Table::new();
    point_table("", &q, &mut config);
    point_table(
        "utopia_",
        &TradeoffPoint::new(u.performance, u.fairness)?,
        &mut config,
    );
    let mut result = Table::new();
    result.insert("dto".into(), num(dto(&q, &u)?));
    if let Some(b) = a.shift {
        let (_, after) = utopia_shift_check(&q, &u, b)?;
        config.insert("shift".into(), num(b));
        result.insert("dto_shifted".into(), num(after));
    }
    emit(a.output.as_deref(), &render(config, result)?)
}

fn auc(a: AucArgs) -> Result<()> {
    let f: Frontier = match &a.frontier {
        Some(path) => parse_curve(open(path)?).with_context(|| format!("in {path}"))?,
        None => pareto_frontier(&load_points(&a.input)?)?,
    };
    let mode: AucMode = a.mode.parse()?;
    let u = utopia(&a.utopia)?;
    let constraint = match (a.min_performance, a.min_fairness, a.max_dto) {
        (Some(x), _, _) => Some(AreaConstraint::MinPerformance(x)),
        (_, Some(x), _) => Some(AreaConstraint::MinFairness(x)),
        (_, _, Some(d)) => Some(AreaConstraint::MaxDto {
            max_dto: d,
            utopia: u,
        }),
        _ => None,
    };

    let mut config = Table::new();
    config.insert("mode".into(), mode.name().into());
    config.insert("frontier_points".into(), Value::Integer(f.len() as i64));
    let mut result = Table::new();
    result.insert("auc".into(), num(auc_pfc(&f, mode)));
    if let Some(c) = constraint {
        config.insert("constraint".into(), c.to_string().into());
        result.insert(
            "partial_auc".into(),
            num(partial_auc_pfc(&f, c, mode, a.resolution)?),
        );
    }
    if let Some(n) = a.polar_angles {
        config.insert("polar_angles".into(), Value::Integer(n as i64));
        result.insert("polar_area".into(), num(polar_dto_area(&f, &u, mode, n)?));
    }
    emit(a.output.as_deref(), &render(config, result)?)
}

fn candidates(m: &ManifestArgs) -> Result<(Vec<ConfigSummary>, Option<TradeoffPoint>)> {
    let runs = load_runs(&m.manifest)?;
    let configs = if m.per_seed {
        per_seed_candidates(&runs)?
    } else {
        group_by_config(&runs)?
    };
    let over = match (m.baseline_performance, m.baseline_fairness) {
        (Some(p), Some(f)) => Some(TradeoffPoint::new(p, f)?),
        _ => None,
    };
    let baseline = baseline_point(&configs, over)?;
    Ok((configs, baseline))
}

fn manifest_config(m: &ManifestArgs, baseline: Option<TradeoffPoint>) -> Table {
    let mut t = Table::new();
    t.insert("manifest".into(), m.manifest.clone().into());
    t.insert("per_seed".into(), m.per_seed.into());
    if let Some(b) = baseline {
        point_table("baseline_", &b, &mut t);
    }
    t
}

fn select_cmd(a: SelectArgs) -> Result<()> {
    let (configs, baseline) = candidates(&a.manifest)?;
    let mut criterion: SelectionCriterion = a.criterion.parse()?;
    if let SelectionCriterion::MinDto(_) = criterion {
        criterion = SelectionCriterion::MinDto(utopia(&a.utopia)?);
    }
    let mine: Vec<ConfigSummary> = method_configs(&configs, &a.method)?
        .into_iter()
        .cloned()
        .collect();
    let r = select(&mine, criterion, baseline)?;

    let mut config = manifest_config(&a.manifest, baseline);
    config.insert("method".into(), a.method.clone().into());
    config.insert("criterion".into(), criterion.to_string().into());
    let mut result = Table::new();
    result.insert("chosen_config".into(), r.chosen_config.clone().into());
    if let Some(t) = r.trade_off_param {
        result.insert("trade_off_param".into(), num(t));
    }
    point_table("dev_", &r.dev_point, &mut result);
    point_table("test_", &r.test_point, &mut result);
    result.insert("test_performance_std".into(), num(r.test_std.0));
    result.insert("test_fairness_std".into(), num(r.test_std.1));
    result.insert("test_dto".into(), num(r.test_dto));
    emit(a.output.as_deref(), &render(config, result)?)
}

fn compare(a: CompareArgs) -> Result<()> {
    let (configs, baseline) = candidates(&a.manifest)?;
    let criteria = match &a.criteria {
        Some(names) => names
            .iter()
            .map(|n| n.parse())
            .collect::<fairagg::Result<Vec<_>>>()?,
        None => SelectionCriterion::standard(),
    };
    let mode: AucMode = a.auc_mode.parse()?;
    let table = compare_configs(&configs, &criteria, mode, baseline)?;

    if let Some(dir) = &a.plot_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {dir}"))?;
        for row in &table.rows {
            let path = Path::new(dir).join(format!("{}.svg", row.method));
            std::fs::write(&path, export_curve(&row.frontier, CurveFormat::Svg, mode))
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }

    let text = match a.format.as_str() {
        "csv" => {
            let mut pairs = vec![
                ("manifest", a.manifest.manifest.clone()),
                ("auc_mode", mode.name().to_string()),
            ];
            if let Some(b) = baseline {
                pairs.push((
                    "baseline",
                    format!("{:.6},{:.6}", b.performance, b.fairness),
                ));
            }
            comment_header(&pairs) + &table.to_csv()
        }
        "toml" => {
            let mut config = manifest_config(&a.manifest, baseline);
            config.insert("auc_mode".into(), mode.name().into());
            config.insert(
                "criteria".into(),
                Value::Array(criteria.iter().map(|c| c.to_string().into()).collect()),
            );
            let mut result = Table::new();
            let winners = table.column_winners();
            result.insert(
                "winners".into(),
                Value::Array(winners.iter().map(|&w| w.into()).collect()),
            );
            let best_auc = table
                .best_auc
                .iter()
                .map(|&i| table.rows[i].method.clone().into());
            result.insert("best_auc".into(), Value::Array(best_auc.collect()));
            let mut methods = Table::new();
            for (i, row) in table.rows.iter().enumerate() {
                let mut m = Table::new();
                m.insert("auc".into(), num(row.auc));
                m.insert(
                    "frontier_points".into(),
                    Value::Integer(row.frontier.len() as i64),
                );
                for (j, cell) in row.cells.iter().enumerate() {
                    let mut c = Table::new();
                    match cell {
                        Cell::Selected(r) => {
                            c.insert("chosen_config".into(), r.chosen_config.clone().into());
                            point_table("test_", &r.test_point, &mut c);
                            c.insert("test_dto".into(), num(r.test_dto));
                            c.insert("best".into(), table.best[j].contains(&i).into());
                        }
                        Cell::Infeasible(msg) => {
                            c.insert("infeasible".into(), msg.clone().into());
                        }
                    }
                    m.insert(criteria[j].to_string(), Value::Table(c));
                }
                methods.insert(row.method.clone(), Value::Table(m));
            }
            result.insert("methods".into(), Value::Table(methods));
            render(config, result)?
        }
        other => bail!(Error::InvalidInput(format!(
            "unknown format {other:?} (toml or csv)"
        ))),
    };
    emit(a.output.as_deref(), &text)
}

fn report(a: ReportArgs) -> Result<()> {
    let data = load_data(&a.input)?;
    let stats = match &data.records {
        Some(r) => DatasetStats::from_records(r, &data.confusions),
        None => DatasetStats::from_confusions(&data.confusions),
    };
    let (spec, _) = build_spec(&a.spec, data.confusions.schema())?;
    let motivations = Motivations {
        metric: a.why_metric,
        unit: a.why_unit,
        group_aggregation: a.why_group,
        class_aggregation: a.why_class,
    };
    let report = checklist_report(stats, a.metric.parse()?, &spec, motivations)?;
    emit(a.output.as_deref(), &report.render())?;
    if a.strict && !report.is_complete() {
        bail!(Error::InvalidInput(format!(
            "checklist incomplete: {}",
            report.missing.join(", ")
        )));
    }
    Ok(())
}

fn fixture(a: FixtureArgs) -> Result<()> {
    let spec = match (&a.spec, &a.classes, &a.groups) {
        (Some(path), _, _) => {
            FixtureSpec::parse(open(path)?).with_context(|| format!("in {path}"))?
        }
        (None, Some(c), Some(g)) => {
            let c: Vec<&str> = c.iter().map(String::as_str).collect();
            let g: Vec<&str> = g.iter().map(String::as_str).collect();
            FixtureSpec {
                confusion_spread: a.spread,
                ..FixtureSpec::uniform(DatasetSchema::from_names(&c, &g)?, a.n, a.tpr, a.seed)
            }
        }
        _ => {
            return Err(anyhow!(Error::InvalidInput(
                "pass --spec or --classes with --groups".into()
            )))
        }
    };
    let records = generate_fixture(&spec)?;
    if let Some(path) = &a.schema_out {
        std::fs::write(path, spec.schema.to_toml()).with_context(|| format!("writing {path}"))?;
    }
    let bytes = write_records(&records, &spec.schema)?;
    emit(a.output.as_deref(), &String::from_utf8(bytes)?)
}
