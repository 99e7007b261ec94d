//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

// `!cond` is deliberate: a NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fairagg::aggregation::{aggregate, generalized_mean, Exponent, Preset};
use fairagg::dataset::DatasetSchema;
use fairagg::fixture::{generate_fixture, FixtureSpec};
use fairagg::metrics::{
    confusions_from_records, metric_matrix, BaseMetricKind, MeanMode, MetricMatrix,
};
use fairagg::selection::{compare_methods, parse_manifest_csv, Cell, SelectionCriterion};
use fairagg::tradeoff::{
    auc_pfc, dto, pareto_frontier, partial_auc_pfc, polar_dto_area, utopia_shift_check,
    AreaConstraint, AucMode, Frontier, TradeoffPoint, UtopiaPoint, DEFAULT_RESOLUTION,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn pt(p: f64, f: f64) -> TradeoffPoint {
    TradeoffPoint::new(p, f).unwrap()
}

// Test-set (performance, fairness, DTO) per selected model, in percent, as
// printed in the full selection results table (28 rows).
const SELECTED_TEST_POINTS: [(f64, f64, f64); 28] = [
    (81.354350, 62.442580, 41.931134),
    (64.601630, 83.683840, 38.977707),
    (68.089476, 79.471282, 37.943508),
    (69.734659, 78.820603, 36.939920),
    (81.354350, 62.442580, 41.931134),
    (81.470683, 59.474805, 44.560375),
    (81.436214, 59.287611, 44.744975),
    (81.256687, 58.635181, 45.413214),
    (53.753905, 74.979811, 52.580521),
    (71.531363, 67.315544, 43.344399),
    (73.435065, 68.755527, 41.011131),
    (70.357258, 73.948014, 39.463883),
    (53.753905, 74.979811, 52.580521),
    (68.815482, 72.103062, 41.841526),
    (69.660694, 73.240677, 40.454108),
    (70.006104, 75.032929, 39.025484),
    (29.812215, 99.999689, 70.187785),
    (51.601020, 90.219145, 49.377388),
    (61.776597, 88.646096, 39.874048),
    (37.946932, 99.038855, 62.060511),
    (81.354350, 62.442580, 41.931134),
    (79.061434, 64.488537, 41.224841),
    (80.443072, 64.657701, 40.392468),
    (79.908082, 61.115353, 43.768721),
    (81.354350, 62.442580, 41.931134),
    (79.061434, 64.488537, 41.224841),
    (74.207748, 66.965168, 41.911101),
    (74.859790, 65.366052, 42.796501),
];

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for &(p, f, d) in &SELECTED_TEST_POINTS {
        let got = dto(&pt(p / 100.0, f / 100.0), &UtopiaPoint::UNIT).map_err(|e| e.to_string())?;
        let err = (got - d / 100.0).abs();
        worst = worst.max(err);
        ensure!(err <= 5e-5, "({p}, {f}): got {got}, printed {}", d / 100.0);
    }
    let example = dto(&pt(0.813544, 0.624426), &UtopiaPoint::UNIT).unwrap();
    ensure!(
        format!("{example:.6}") == "0.419311",
        "example printed {example:.6}"
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("28 cases, max abs error {worst:.1e}, {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fixed = [f64::NEG_INFINITY, -5.0, -1.0, 1.0, 2.0, 5.0, f64::INFINITY];
    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        if rng.gen_bool(0.5) {
            fixed[rng.gen_range(0..fixed.len())]
        } else {
            loop {
                let p: f64 = rng.gen_range(-20.0..20.0);
                if p.abs() > 1e-3 {
                    return p;
                }
            }
        }
    };
    let mut strict = 0;
    for case in 0..1000 {
        let n = rng.gen_range(2..=10);
        let constant = case % 10 == 0;
        let base: f64 = 1.0 - rng.gen::<f64>();
        let values: Vec<f64> = (0..n)
            .map(|_| {
                if constant {
                    base
                } else {
                    1.0 - rng.gen::<f64>()
                }
            })
            .collect();
        // distinct exponents, far enough apart that strictness is visible
        let (mut p, mut q) = (draw(&mut rng), draw(&mut rng));
        while (p - q).abs() < 0.05 || p == q {
            q = draw(&mut rng);
        }
        if p < q {
            std::mem::swap(&mut p, &mut q);
        }
        let mp = generalized_mean(&values, Exponent::new(p).unwrap(), None).unwrap();
        let mq = generalized_mean(&values, Exponent::new(q).unwrap(), None).unwrap();
        if constant {
            ensure!(
                mp == base && mq == base,
                "constant {base}: M_{p} = {mp}, M_{q} = {mq}"
            );
        } else if values.iter().all(|v| *v == values[0]) {
            ensure!(mp == mq, "equal values: {mp} vs {mq}");
        } else {
            ensure!(mp > mq, "{values:?}: M_{p} = {mp} not > M_{q} = {mq}");
            strict += 1;
        }
    }
    Ok(format!("1000 cases ({strict} strict, 100 constant)"))
}

/// Direct evaluation of the printed per-class formulas.
fn printed_formula(preset: Preset, m: &[Vec<f64>]) -> f64 {
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let beta = |row: &Vec<f64>| -> f64 {
        let g = row.len() as f64;
        let mbar = mean(row);
        let max = row.iter().cloned().fold(f64::MIN, f64::max);
        let min = row.iter().cloned().fold(f64::MAX, f64::min);
        let gaps: Vec<f64> = row.iter().map(|v| (v - mbar).abs()).collect();
        match preset {
            Preset::MeanGap | Preset::Binary | Preset::QuadraticMean | Preset::Mean => mean(&gaps),
            Preset::Variance => gaps.iter().map(|x| x * x).sum::<f64>() / (g - 1.0),
            Preset::MaxGap => gaps.iter().cloned().fold(f64::MIN, f64::max),
            Preset::MinScore => min,
            Preset::MinRatio => row.iter().map(|v| v / mbar).fold(f64::MAX, f64::min),
            Preset::MaxDifference => max - min,
            Preset::MaxRatio => max / min,
            Preset::DifferenceThreshold => {
                row.iter().filter(|v| (*v - mbar).abs() <= 0.05).count() as f64 / g
            }
            Preset::RatioThreshold => {
                row.iter()
                    .filter(|v| (*v / mbar - 1.0).abs() <= 0.2)
                    .count() as f64
                    / g
            }
            Preset::SumGapRms => gaps.iter().sum(),
        }
    };
    let betas: Vec<f64> = m.iter().map(beta).collect();
    match preset {
        Preset::Binary => betas[1],
        Preset::QuadraticMean | Preset::SumGapRms => {
            (betas.iter().map(|b| b * b).sum::<f64>() / betas.len() as f64).sqrt()
        }
        _ => mean(&betas),
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let presets: Vec<Preset> = Preset::ALL
        .into_iter()
        .filter(|p| *p != Preset::SumGapRms)
        .collect();
    ensure!(
        presets.len() == 12,
        "expected 12 presets, found {}",
        presets.len()
    );
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let c = rng.gen_range(2..=10);
        let g = rng.gen_range(2..=6);
        let values: Vec<Vec<f64>> = (0..c)
            .map(|_| (0..g).map(|_| rng.gen_range(0.05..=1.0)).collect())
            .collect();
        let wrapped = values
            .iter()
            .map(|r| r.iter().map(|v| Some(*v)).collect())
            .collect();
        let matrix = MetricMatrix::from_scores(BaseMetricKind::Tpr, wrapped).unwrap();
        for &preset in &presets {
            let spec = preset.spec().with_mean_mode(MeanMode::UnweightedGroupMean);
            let got = aggregate(&matrix, &spec).map_err(|e| format!("{preset}: {e}"))?;
            let want = printed_formula(preset, &values);
            let err = (got.delta - want).abs();
            worst = worst.max(err);
            ensure!(err <= 1e-12, "{preset} on {c}x{g}: {} vs {want}", got.delta);
        }
    }
    Ok(format!(
        "12 presets x 200 matrices, max abs error {worst:.1e}"
    ))
}

fn brute_force_frontier(points: &[TradeoffPoint]) -> Vec<TradeoffPoint> {
    let mut keep: Vec<TradeoffPoint> = Vec::new();
    for (i, a) in points.iter().enumerate() {
        let dominated = points.iter().enumerate().any(|(j, b)| {
            j != i
                && b.performance >= a.performance
                && b.fairness >= a.fairness
                && (b.performance > a.performance || b.fairness > a.fairness)
        });
        if !dominated && !keep.contains(a) {
            keep.push(*a);
        }
    }
    keep.sort_by(|a, b| b.performance.total_cmp(&a.performance));
    keep
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut library_time = Duration::ZERO;
    let mut largest = 0;
    for set in 0..100 {
        let n = if set < 10 {
            1000
        } else {
            rng.gen_range(1..=1000)
        };
        largest = largest.max(n);
        // every other set on a coarse grid, to force ties and duplicates
        let grid = set % 2 == 0;
        let points: Vec<TradeoffPoint> = (0..n)
            .map(|_| {
                let (mut p, mut f): (f64, f64) = (rng.gen(), rng.gen());
                if grid {
                    p = (p * 20.0).round() / 20.0;
                    f = (f * 20.0).round() / 20.0;
                }
                pt(p, f)
            })
            .collect();
        let t = Instant::now();
        let frontier = pareto_frontier(&points).unwrap();
        library_time += t.elapsed();
        let oracle = brute_force_frontier(&points);
        ensure!(
            frontier.points() == oracle.as_slice(),
            "set {set} (n = {n}) differs"
        );
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!(
        "100 sets up to n = {largest}, {elapsed:?} total ({library_time:?} in the library)"
    ))
}

fn random_frontier(rng: &mut ChaCha8Rng) -> Frontier {
    let k = rng.gen_range(1..=12);
    let mut perf: Vec<f64> = (0..k).map(|_| rng.gen_range(0.02..1.0)).collect();
    let mut fair: Vec<f64> = (0..k).map(|_| rng.gen_range(0.02..1.0)).collect();
    perf.sort_by(|a, b| b.total_cmp(a));
    fair.sort_by(f64::total_cmp);
    perf.dedup();
    fair.dedup();
    let k = perf.len().min(fair.len());
    Frontier::from_sorted((0..k).map(|i| pt(perf[i], fair[i])).collect()).unwrap()
}

/// Upper edge of the attainment region, from the frontier points directly.
fn oracle_upper(points: &[TradeoffPoint], x: f64, mode: AucMode) -> f64 {
    match mode {
        AucMode::Step => points
            .iter()
            .filter(|p| p.performance >= x)
            .map(|p| p.fairness)
            .fold(0.0, f64::max),
        AucMode::Linear => {
            // points by increasing performance
            let mut asc: Vec<_> = points.to_vec();
            asc.sort_by(|a, b| a.performance.total_cmp(&b.performance));
            if x > asc[asc.len() - 1].performance {
                return 0.0;
            }
            if x <= asc[0].performance {
                return asc[0].fairness;
            }
            for w in asc.windows(2) {
                if x <= w[1].performance {
                    let t = (x - w[0].performance) / (w[1].performance - w[0].performance);
                    return w[0].fairness + t * (w[1].fairness - w[0].fairness);
                }
            }
            unreachable!()
        }
    }
}

const GRID: usize = 2000;

fn center(i: usize) -> f64 {
    (i as f64 + 0.5) / GRID as f64
}

/// Number of row centres `(j + 0.5) / GRID` inside `[lo, hi]`.
fn centres_between(lo: f64, hi: f64) -> usize {
    let n = GRID as f64;
    let first = (lo * n - 0.5).ceil().max(0.0);
    let last = (hi * n - 0.5).floor().min(n - 1.0);
    if last < first {
        0
    } else {
        (last - first) as usize + 1
    }
}

/// Grid estimate of the region area subject to an optional constraint. Each
/// column's cells form an interval in `y`, so they are counted per column.
fn grid_area(points: &[TradeoffPoint], mode: AucMode, constraint: Option<AreaConstraint>) -> f64 {
    let mut count = 0usize;
    for i in 0..GRID {
        let x = center(i);
        let top = oracle_upper(points, x, mode);
        let (lo, hi) = match constraint {
            None => (0.0, top),
            Some(AreaConstraint::MinPerformance(a)) => {
                if x < a {
                    continue;
                }
                (0.0, top)
            }
            Some(AreaConstraint::MinFairness(f)) => (f, top),
            Some(AreaConstraint::MaxDto { max_dto, utopia }) => {
                let (wp, wf) = utopia.weights;
                let dx = utopia.performance - x;
                let rem = max_dto * max_dto - wp * dx * dx;
                if rem < 0.0 {
                    continue;
                }
                let s = (rem / wf).sqrt();
                (utopia.fairness - s, top.min(utopia.fairness + s))
            }
        };
        count += centres_between(lo, hi);
    }
    count as f64 / (GRID * GRID) as f64
}

/// Cell-by-cell count with a dominance test per cell.
fn grid_area_cellwise(points: &[TradeoffPoint]) -> f64 {
    let mut count = 0usize;
    for i in 0..GRID {
        let x = center(i);
        for j in 0..GRID {
            let y = center(j);
            if points.iter().any(|p| p.performance >= x && p.fairness >= y) {
                count += 1;
            }
        }
    }
    count as f64 / (GRID * GRID) as f64
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for k in 0..50 {
        let frontier = random_frontier(&mut rng);
        let pts = frontier.points();
        if k < 2 {
            let (fast, slow) = (grid_area(pts, AucMode::Step, None), grid_area_cellwise(pts));
            ensure!(fast == slow, "column count {fast} != cell count {slow}");
        }
        let utopia = if rng.gen_bool(0.5) {
            UtopiaPoint::UNIT
        } else {
            UtopiaPoint::new(rng.gen_range(0.8..=1.0), rng.gen_range(0.8..=1.0))
                .unwrap()
                .with_weights(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0))
                .unwrap()
        };
        let constraints = [
            AreaConstraint::MinPerformance(rng.gen_range(0.0..1.0)),
            AreaConstraint::MinFairness(rng.gen_range(0.0..1.0)),
            AreaConstraint::MaxDto {
                max_dto: rng.gen_range(0.1..1.3),
                utopia,
            },
        ];
        for mode in [AucMode::Step, AucMode::Linear] {
            let err = (auc_pfc(&frontier, mode) - grid_area(pts, mode, None)).abs();
            worst = worst.max(err);
            ensure!(
                err <= 1e-3,
                "frontier {k} {}: auc off by {err}",
                mode.name()
            );
            for c in constraints {
                let got = partial_auc_pfc(&frontier, c, mode, DEFAULT_RESOLUTION).unwrap();
                let err = (got - grid_area(pts, mode, Some(c))).abs();
                worst = worst.max(err);
                ensure!(
                    err <= 1e-3,
                    "frontier {k} {} [{c}]: off by {err}",
                    mode.name()
                );
                checks += 1;
            }
            checks += 1;
        }
    }
    Ok(format!(
        "50 frontiers, {checks} areas against a {GRID}x{GRID} grid, max abs error {worst:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let frontier = random_frontier(&mut rng);
        for mode in [AucMode::Step, AucMode::Linear] {
            let polar = polar_dto_area(&frontier, &UtopiaPoint::UNIT, mode, 10_000).unwrap();
            let err = (auc_pfc(&frontier, mode) + polar - 1.0).abs();
            worst = worst.max(err);
            ensure!(
                err <= 1e-3,
                "frontier {k} {}: sum off by {err}",
                mode.name()
            );
        }
    }
    Ok(format!("50 frontiers x 2 modes, max abs error {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q = pt(rng.gen(), rng.gen());
        let u = UtopiaPoint::new(
            rng.gen_range(q.performance..=1.0),
            rng.gen_range(q.fairness..=1.0),
        )
        .unwrap();
        let b = rng.gen_range(1e-3..1.0);
        let (before, after) = utopia_shift_check(&q, &u, b).unwrap();
        let lhs = after * after - before * before;
        let rhs = b * b + 2.0 * b * (u.performance - q.performance);
        let err = (lhs - rhs).abs();
        worst = worst.max(err);
        ensure!(err <= 1e-12, "q {q}, u {u}, b {b}: {lhs} vs {rhs}");
    }
    for i in 0..200 {
        let u = UtopiaPoint::new(rng.gen_range(0.5..=1.0), rng.gen_range(0.5..=1.0)).unwrap();
        let r = rng.gen_range(0.01..u.performance.min(u.fairness));
        let t1: f64 = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        let mut t2: f64 = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        while (t1 - t2).abs() < 1e-3 {
            t2 = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        }
        let at = |t: f64| pt(u.performance - r * t.cos(), u.fairness - r * t.sin());
        let (q1, q2) = (at(t1), at(t2));
        let (lower, higher) = if q1.performance < q2.performance {
            (q1, q2)
        } else {
            (q2, q1)
        };
        let b = rng.gen_range(1e-3..1.0);
        let (d_lo, shifted_lo) = utopia_shift_check(&lower, &u, b).unwrap();
        let (d_hi, shifted_hi) = utopia_shift_check(&higher, &u, b).unwrap();
        ensure!(
            (d_lo - d_hi).abs() < 1e-12,
            "pair {i}: DTOs {d_lo} and {d_hi} differ"
        );
        ensure!(
            shifted_lo > shifted_hi,
            "pair {i}: lower-performance point {lower} has {shifted_lo} <= {shifted_hi}"
        );
    }
    Ok(format!(
        "1000 triples (max abs error {worst:.1e}), 200 equal-DTO pairs"
    ))
}

const MANIFEST: &str = include_str!("../fixtures/divergence_manifest.csv");

/// Seed-averaged (dev perf, dev fair, test perf, test fair) per config, from
/// a plain split of the manifest text.
fn oracle_configs() -> BTreeMap<(String, String), [f64; 4]> {
    let mut sums: BTreeMap<(String, String), ([f64; 4], f64)> = BTreeMap::new();
    for line in MANIFEST.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let e = sums
            .entry((f[0].to_string(), f[1].to_string()))
            .or_default();
        for k in 0..4 {
            e.0[k] += f[4 + k].parse::<f64>().unwrap();
        }
        e.1 += 1.0;
    }
    sums.into_iter()
        .map(|(k, (s, n))| (k, s.map(|x| x / n)))
        .collect()
}

fn oracle_select(configs: &[(&str, [f64; 4])], criterion: usize, base: [f64; 4]) -> Option<String> {
    // (objective, dev fairness, reversed config id) is maximised
    let mut best: Option<(f64, f64, &str)> = None;
    for &(id, v) in configs {
        let (objective, feasible) = match criterion {
            0 => (-((1.0 - v[0]).powi(2) + (1.0 - v[1]).powi(2)).sqrt(), true),
            1 => (v[0], true),
            2 => (v[0], v[1] >= base[1] + 0.05),
            3 => (v[0], v[1] >= base[1] + 0.10),
            4 => (v[1], true),
            5 => (v[1], v[0] >= base[0] - 0.05),
            6 => (v[1], v[0] >= base[0] - 0.10),
            _ => unreachable!(),
        };
        if !feasible {
            continue;
        }
        let better = match best {
            None => true,
            Some((o, f, b)) => {
                objective > o || (objective == o && (v[1] > f || (v[1] == f && id < b)))
            }
        };
        if better {
            best = Some((objective, v[1], id));
        }
    }
    best.map(|b| b.2.to_string())
}

/// Union of the rectangles `[0, p] x [0, f]`, swept by decreasing fairness.
fn oracle_step_auc(points: &[(f64, f64)]) -> f64 {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut area = 0.0;
    let mut reach: f64 = 0.0;
    for (i, &(p, f)) in pts.iter().enumerate() {
        reach = reach.max(p);
        let next = pts.get(i + 1).map_or(0.0, |n| n.1);
        area += reach * (f - next);
    }
    area
}

fn criterion_8() -> Outcome {
    let runs = parse_manifest_csv(MANIFEST.as_bytes()).map_err(|e| e.to_string())?;
    ensure!(runs.len() == 243, "expected 243 runs, found {}", runs.len());
    let criteria = SelectionCriterion::standard();
    let table =
        compare_methods(&runs, &criteria, AucMode::Step, None).map_err(|e| e.to_string())?;

    let configs = oracle_configs();
    let base = configs[&("vanilla".to_string(), "base".to_string())];
    let methods = ["aadv", "adv", "dadv", "inlp"];
    let names: Vec<&str> = table.rows.iter().map(|r| r.method.as_str()).collect();
    ensure!(names == methods, "methods {names:?}");
    ensure!(
        configs.keys().filter(|(m, _)| m != "vanilla").count() == 80,
        "expected 4 x 20 configs"
    );

    // chosen configs as enumerated by hand from the seed-averaged table
    let expected_choice = [
        [
            "cfg13", "cfg02", "cfg12", "cfg13", "cfg19", "cfg04", "cfg08",
        ],
        [
            "cfg11", "cfg01", "cfg07", "cfg10", "cfg19", "cfg04", "cfg10",
        ],
        [
            "cfg06", "cfg00", "cfg11", "cfg14", "cfg19", "cfg05", "cfg08",
        ],
        [
            "cfg08", "cfg01", "cfg07", "cfg08", "cfg19", "cfg05", "cfg09",
        ],
    ];
    for (row, method) in table.rows.iter().zip(methods) {
        let mine: Vec<(&str, [f64; 4])> = configs
            .iter()
            .filter(|((m, _), _)| m == method)
            .map(|((_, c), v)| (c.as_str(), *v))
            .collect();
        let m_idx = methods.iter().position(|m| *m == method).unwrap();
        for (j, cell) in row.cells.iter().enumerate() {
            let Cell::Selected(r) = cell else {
                return Err(format!("{method} {}: infeasible", criteria[j]));
            };
            let oracle = oracle_select(&mine, j, base).unwrap();
            ensure!(
                r.chosen_config == oracle,
                "{method} {}: {} vs {oracle}",
                criteria[j],
                r.chosen_config
            );
            ensure!(
                r.chosen_config == expected_choice[m_idx][j],
                "{method} {}: {} vs enumerated {}",
                criteria[j],
                r.chosen_config,
                expected_choice[m_idx][j]
            );
            let v = configs[&(method.to_string(), oracle)];
            let want = ((1.0 - v[2]).powi(2) + (1.0 - v[3]).powi(2)).sqrt();
            ensure!(
                (r.test_dto - want).abs() < 1e-12,
                "{method} {}: test dto",
                criteria[j]
            );
        }
        let tests: Vec<(f64, f64)> = mine.iter().map(|(_, v)| (v[2], v[3])).collect();
        let want = oracle_step_auc(&tests);
        ensure!(
            (row.auc - want).abs() < 1e-12,
            "{method}: auc {} vs {want}",
            row.auc
        );
    }

    let winners: Vec<&str> = table
        .best
        .iter()
        .map(|b| {
            if b.len() == 1 {
                table.rows[b[0]].method.as_str()
            } else {
                "tie"
            }
        })
        .collect();
    ensure!(
        winners == ["adv", "dadv", "inlp", "inlp", "aadv", "inlp", "inlp"],
        "column winners {winners:?}"
    );
    let distinct = table.column_winners();
    ensure!(
        distinct.len() >= 4,
        "only {} distinct winners",
        distinct.len()
    );

    let mut aucs: Vec<(f64, &str)> = table
        .rows
        .iter()
        .map(|r| (r.auc, r.method.as_str()))
        .collect();
    aucs.sort_by(|a, b| b.0.total_cmp(&a.0));
    for w in aucs.windows(2) {
        ensure!(
            w[0].0 - w[1].0 > 1e-12,
            "auc tie between {} and {}",
            w[0].1,
            w[1].1
        );
    }
    let order: Vec<&str> = aucs.iter().map(|a| a.1).collect();
    ensure!(
        order == ["aadv", "inlp", "adv", "dadv"],
        "auc order {order:?}"
    );
    Ok(format!(
        "{} distinct column winners {winners:?}; auc order {order:?}",
        distinct.len()
    ))
}

fn criterion_9() -> Outcome {
    let schema =
        DatasetSchema::from_names(&["nurse", "surgeon", "professor"], &["female", "male"]).unwrap();
    let targets = vec![vec![0.9, 0.75], vec![0.6, 0.8], vec![0.85, 0.85]];
    let spec = FixtureSpec {
        n_per_cell: vec![vec![100_000; 2]; 3],
        tpr_targets: targets.clone(),
        confusion_spread: 0.5,
        rng_seed: 9,
        ..FixtureSpec::uniform(schema.clone(), 1, 1.0, 0)
    };
    let records = generate_fixture(&spec).unwrap();
    let conf = confusions_from_records(&records, &schema);
    let matrix = metric_matrix(&conf, BaseMetricKind::Tpr, MeanMode::Pooled).unwrap();

    // per-cell counts straight from the records
    let mut hits = [[0u64; 2]; 3];
    let mut sizes = [[0u64; 2]; 3];
    for r in &records {
        sizes[r.true_class][r.group] += 1;
        if r.predicted_class == r.true_class {
            hits[r.true_class][r.group] += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for c in 0..3 {
        for g in 0..2 {
            ensure!(
                sizes[c][g] == 100_000,
                "cell ({c}, {g}) has {} records",
                sizes[c][g]
            );
            let tpr = hits[c][g] as f64 / sizes[c][g] as f64;
            ensure!(
                matrix.row(c)[g] == Some(tpr),
                "cell ({c}, {g}) recount differs"
            );
            let err = (tpr - targets[c][g]).abs();
            worst = worst.max(err);
            ensure!(
                err <= 0.01,
                "cell ({c}, {g}): tpr {tpr} vs {}",
                targets[c][g]
            );
        }
    }

    // sum of gaps per class, root mean square over classes, 1 - delta
    let mut sq = 0.0;
    for c in 0..3 {
        let pooled = (hits[c][0] + hits[c][1]) as f64 / (sizes[c][0] + sizes[c][1]) as f64;
        let sum: f64 = (0..2)
            .map(|g| (hits[c][g] as f64 / sizes[c][g] as f64 - pooled).abs())
            .sum();
        sq += sum * sum;
    }
    let reference = 1.0 - (sq / 3.0).sqrt();
    let got = aggregate(&matrix, &Preset::SumGapRms.spec())
        .unwrap()
        .fairness;
    let err = (got - reference).abs();
    ensure!(err <= 1e-12, "preset {got} vs reference {reference}");
    Ok(format!(
        "600000 records, max tpr error {worst:.4}, preset fairness {got:.6} (error {err:.1e})"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("DTO golden values", criterion_1),
        ("generalized-mean monotonicity", criterion_2),
        ("preset equivalence with the printed formulas", criterion_3),
        ("Pareto frontier against brute force", criterion_4),
        ("AUC and partial AUC against a grid count", criterion_5),
        ("polar complement identity", criterion_6),
        ("utopia-shift identity", criterion_7),
        ("selection divergence fixture", criterion_8),
        ("fixture to fairness pipeline", criterion_9),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut substitutes_ok = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS  {name}: {detail}"),
            Err(why) => {
                println!("criterion {n}: FAIL  {name}: {why}");
                failed += 1;
                if (5..=8).contains(&n) {
                    substitutes_ok = false;
                }
            }
        }
    }
    if substitutes_ok {
        println!(
            "criterion 10: DECLARED  trained-model sweep curves are not reproducible here; \
             covered by criteria 5-8, which passed"
        );
    } else {
        println!("criterion 10: FAIL  substitute criteria 5-8 did not all pass");
        failed += 1;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
