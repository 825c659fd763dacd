//! Aggregation-level sweep on random layered instances.
//!
//! For every instance and scheme the scenario set is aggregated to
//! `K, K/2, …, 1` scenarios, each aggregated problem is solved exactly, and
//! the solution's worst case on the original scenarios is divided by the
//! true optimum. Instances run in parallel; rows come back in instance order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate_to_level, AggregationMode, Scheme};
use crate::error::{invalid, Result};
use crate::instances::{derive_seed, gen_layered};
use crate::model::{ceil_log2, Instance, TOL};
use crate::par::{map_range, Execution};
use crate::solvers::{exact_solve, per_scenario_optima, Criterion, LabelOptions, SolveResult};

pub const CSV_HEADER: &str = "instance_id,scheme,scenario_count,value,opt_value,ratio,wall_time_ms,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentCriterion {
    MinMax,
    Regret,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub layers: usize,
    pub width: usize,
    pub k: usize,
    pub instance_count: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    /// Scenario counts to sweep; `None` means `K, K/2, …, 1`.
    pub scenario_counts: Option<Vec<usize>>,
    pub criterion: ExperimentCriterion,
    pub execution: Execution,
    pub labels: LabelOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            layers: 10,
            width: 4,
            k: 16,
            instance_count: 200,
            seed: 1,
            schemes: vec![Scheme::Similarity, Scheme::Consecutive],
            scenario_counts: None,
            criterion: ExperimentCriterion::MinMax,
            execution: Execution::default(),
            labels: LabelOptions::default(),
        }
    }
}

impl ExperimentConfig {
    /// Aggregation levels to sweep, finest first.
    pub fn levels(&self) -> Result<Vec<usize>> {
        if self.instance_count == 0 {
            return invalid("instance count must be >= 1");
        }
        if self.k == 0 || self.layers == 0 || self.width == 0 {
            return invalid("layers, width and K must be >= 1");
        }
        if self.schemes.is_empty() {
            return invalid("at least one scheme is required");
        }
        let top = ceil_log2(self.k);
        let mut levels: Vec<usize> = match &self.scenario_counts {
            None => (0..=top).rev().collect(),
            Some(counts) => counts
                .iter()
                .map(|&c| {
                    let level = if c == 0 { usize::MAX } else { ceil_log2(c) };
                    if level > top || (1usize << level).min(self.k) != c {
                        invalid(format!("scenario count {c} is not K={} halved down to 1", self.k))
                    } else {
                        Ok(level)
                    }
                })
                .collect::<Result<_>>()?,
        };
        levels.sort_unstable_by(|a, b| b.cmp(a));
        levels.dedup();
        Ok(levels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub instance_id: usize,
    pub scheme: String,
    pub scenario_count: usize,
    /// True objective of the aggregated solution on the original scenarios.
    pub value: f64,
    pub opt_value: f64,
    pub ratio: f64,
    pub wall_time_ms: f64,
    pub status: String,
}

fn ratio(value: f64, opt: f64) -> f64 {
    if opt.abs() <= TOL {
        if value.abs() <= TOL {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        value / opt
    }
}

fn instance_rows(cfg: &ExperimentConfig, levels: &[usize], id: usize) -> Vec<ExperimentRow> {
    let failed = |scheme: Scheme, count: usize, msg: String| ExperimentRow {
        instance_id: id,
        scheme: scheme.name().to_string(),
        scenario_count: count,
        value: f64::NAN,
        opt_value: f64::NAN,
        ratio: f64::NAN,
        wall_time_ms: 0.0,
        status: format!("error: {msg}"),
    };
    let prepared = (|| -> Result<(Instance, Criterion, Option<Vec<f64>>, SolveResult)> {
        let inst = gen_layered(cfg.layers, cfg.width, cfg.k, derive_seed(cfg.seed, id as u64))?;
        let (criterion, optima) = match cfg.criterion {
            ExperimentCriterion::MinMax => (Criterion::MinMax, None),
            ExperimentCriterion::Regret => {
                let opt = per_scenario_optima(&inst, Execution::Sequential)?;
                (Criterion::GeneralizedRegret(opt.clone()), Some(opt))
            }
        };
        let best = exact_solve(&inst, &criterion, &cfg.labels)?;
        Ok((inst, criterion, optima, best))
    })();
    let (inst, criterion, optima, best) = match prepared {
        Ok(p) => p,
        Err(e) => {
            return cfg
                .schemes
                .iter()
                .flat_map(|&s| levels.iter().map(move |&l| (s, l)))
                .map(|(s, l)| failed(s, (1usize << l).min(cfg.k), e.to_string()))
                .collect();
        }
    };
    let mode = match cfg.criterion {
        ExperimentCriterion::MinMax => AggregationMode::MinMax,
        ExperimentCriterion::Regret => AggregationMode::Regret,
    };
    let mut rows = Vec::new();
    for &scheme in &cfg.schemes {
        for &level in levels {
            let start = Instant::now();
            let outcome = (|| -> Result<(usize, f64)> {
                let agg = aggregate_to_level(&inst, level, scheme, mode, optima.as_deref())?;
                let x = if agg.factor == 1 {
                    best.solution.clone()
                } else {
                    exact_solve(&agg.instance, &agg.criterion(), &cfg.labels)?.solution
                };
                Ok((agg.scenario_count(), criterion.evaluate(&inst, &x)?))
            })();
            let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            rows.push(match outcome {
                Ok((count, value)) => ExperimentRow {
                    instance_id: id,
                    scheme: scheme.name().to_string(),
                    scenario_count: count,
                    value,
                    opt_value: best.value,
                    ratio: ratio(value, best.value),
                    wall_time_ms,
                    status: "ok".into(),
                },
                Err(e) => failed(scheme, (1usize << level).min(cfg.k), e.to_string()),
            });
        }
    }
    rows
}

/// Runs the sweep. Failures are recorded per row and do not stop the run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let levels = cfg.levels()?;
    Ok(map_range(cfg.instance_count, cfg.execution, |id| instance_rows(cfg, &levels, id))
        .into_iter()
        .flatten()
        .collect())
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ExperimentRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return invalid(format!("unexpected CSV header '{}'", header.join(",")));
    }
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// Statistics of the successful rows for one scheme and scenario count.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: String,
    pub scenario_count: usize,
    pub count: usize,
    pub failures: usize,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub max_ratio: f64,
}

/// Sorted by scheme, then by decreasing scenario count.
pub fn summarize(rows: &[ExperimentRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, std::cmp::Reverse<usize>), (Vec<f64>, usize)> = BTreeMap::new();
    for row in rows {
        let entry = groups
            .entry((row.scheme.clone(), std::cmp::Reverse(row.scenario_count)))
            .or_default();
        if row.status == "ok" {
            entry.0.push(row.ratio);
        } else {
            entry.1 += 1;
        }
    }
    groups
        .into_iter()
        .map(|((scheme, count), (ratios, failures))| {
            let n = ratios.len();
            let mean = if n == 0 { f64::NAN } else { ratios.iter().sum::<f64>() / n as f64 };
            let var = if n < 2 {
                0.0
            } else {
                ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64
            };
            SummaryRow {
                scheme,
                scenario_count: count.0,
                count: n,
                failures,
                mean_ratio: mean,
                std_ratio: var.sqrt(),
                max_ratio: ratios.iter().copied().fold(f64::NAN, f64::max),
            }
        })
        .collect()
}

pub fn format_summary(summary: &[SummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<12} {:>9} {:>6} {:>10} {:>10} {:>10} {:>8}", "scheme", "scenarios", "n", "mean", "std", "max", "failed");
    for r in summary {
        let _ = writeln!(
            s,
            "{:<12} {:>9} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>8}",
            r.scheme, r.scenario_count, r.count, r.mean_ratio, r.std_ratio, r.max_ratio, r.failures
        );
    }
    s
}

/// Line chart of mean ratio against scenario count (log2 axis), one
/// polyline per scheme. Output depends only on `rows`.
pub fn render_svg(rows: &[ExperimentRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 150.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 60.0;

    let summary = summarize(rows);
    let mut series: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for r in &summary {
        if r.mean_ratio.is_finite() {
            series.entry(r.scheme.clone()).or_default().push((r.scenario_count, r.mean_ratio));
        }
    }
    for pts in series.values_mut() {
        pts.sort_by_key(|p| p.0);
    }
    let max_count = summary.iter().map(|r| r.scenario_count).max().unwrap_or(1).max(1);
    let x_max = (max_count as f64).log2().max(1.0);
    let y_top = series
        .values()
        .flatten()
        .map(|p| p.1)
        .fold(1.0f64, f64::max);
    let y_max = ((y_top - 1.0) * 10.0).ceil().max(1.0) / 10.0 + 1.0;
    let px = |count: usize| LEFT + (count as f64).log2() / x_max * (W - LEFT - RIGHT);
    let py = |v: f64| H - BOTTOM - (v - 1.0) / (y_max - 1.0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    let mut count = 1usize;
    while count <= max_count {
        let x = px(count);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{count}</text>"#, y0 + 20.0);
        count *= 2;
    }
    let ticks = 5;
    for t in 0..=ticks {
        let v = 1.0 + (y_max - 1.0) * t as f64 / ticks as f64;
        let y = py(v);
        let _ = writeln!(s, r##"<line x1="{:.2}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#dddddd"/>"##, x0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#, x0 - 8.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">number of scenarios</text>"#, (x0 + x1) / 2.0, H - 15.0);
    let _ = writeln!(s, r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">relative worst-case performance</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0);

    for (i, (scheme, pts)) in series.iter().enumerate() {
        let (color, dash) = match scheme.as_str() {
            "similarity" => ("#d62728", ""),
            "consecutive" => ("#1f77b4", r#" stroke-dasharray="6 4""#),
            _ => ("#555555", r#" stroke-dasharray="2 2""#),
        };
        let points: Vec<String> = pts.iter().map(|&(c, v)| format!("{:.2},{:.2}", px(c), py(v))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#, points.join(" "));
        let ly = TOP + 20.0 * i as f64;
        let lx = W - RIGHT + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#, lx + 30.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{scheme}</text>"#, lx + 36.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig { layers: 4, width: 3, k: 8, instance_count: 6, seed: 3, ..ExperimentConfig::default() }
    }

    #[test]
    fn default_levels() {
        assert_eq!(ExperimentConfig::default().levels().unwrap(), vec![4, 3, 2, 1, 0]);
        let cfg = ExperimentConfig { scenario_counts: Some(vec![1, 16, 4]), ..ExperimentConfig::default() };
        assert_eq!(cfg.levels().unwrap(), vec![4, 2, 0]);
        let bad = ExperimentConfig { scenario_counts: Some(vec![3]), ..ExperimentConfig::default() };
        assert!(bad.levels().is_err());
        let none = ExperimentConfig { instance_count: 0, ..ExperimentConfig::default() };
        assert!(none.levels().is_err());
    }

    #[test]
    fn small_sweep_properties() {
        let rows = run_experiment(&small()).unwrap();
        assert_eq!(rows.len(), 6 * 2 * 4);
        for r in &rows {
            assert_eq!(r.status, "ok");
            assert!(r.ratio >= 1.0 - 1e-9);
            assert!(r.ratio <= 8.0 / r.scenario_count as f64 + 1e-9);
            if r.scenario_count == 8 {
                assert_eq!(r.ratio, 1.0);
            }
        }
    }

    #[test]
    fn parallel_equals_sequential() {
        let par = run_experiment(&small()).unwrap();
        let seq = run_experiment(&ExperimentConfig { execution: Execution::Sequential, ..small() }).unwrap();
        let strip = |rows: Vec<ExperimentRow>| -> Vec<ExperimentRow> {
            rows.into_iter().map(|r| ExperimentRow { wall_time_ms: 0.0, ..r }).collect()
        };
        assert_eq!(strip(par), strip(seq));
    }

    #[test]
    fn regret_sweep_runs() {
        let cfg = ExperimentConfig { criterion: ExperimentCriterion::Regret, ..small() };
        for r in run_experiment(&cfg).unwrap() {
            assert_eq!(r.status, "ok");
            assert!(r.ratio <= 8.0 / r.scenario_count as f64 + 1e-9);
        }
    }

    #[test]
    fn csv_round_trip_and_svg() {
        let rows = run_experiment(&small()).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        let svg = render_svg(&rows);
        assert_eq!(svg, render_svg(&back));
        assert!(svg.contains("similarity") && svg.contains("consecutive"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn summary_statistics() {
        let row = |r: f64| ExperimentRow {
            instance_id: 0,
            scheme: "consecutive".into(),
            scenario_count: 2,
            value: r,
            opt_value: 1.0,
            ratio: r,
            wall_time_ms: 0.0,
            status: "ok".into(),
        };
        let s = summarize(&[row(1.0), row(2.0), row(3.0)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mean_ratio, 2.0);
        assert_eq!(s[0].std_ratio, 1.0);
        assert_eq!(s[0].max_ratio, 3.0);
    }
}
