//! Result tables: CSV and JSON reports, and long-format curve files.

use crate::error::{HarnessError, Result};
use crate::evaluation::EvalRow;
use ldpd_core::sim::Density;
use ldpd_marl::LogRow;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const REPORT_SCHEMA: &str = "ldpd-report/1";
pub const KEY_COLUMNS: [&str; 4] = ["scenario", "trained_density", "density", "seed"];
pub const METRIC_COLUMNS: [&str; 5] = ["reward", "collision_rate", "avg_speed", "avg_pet", "success_rate"];
/// `seed` value of seed-mean rows.
pub const MEAN_SEED: &str = "mean";
/// Trailing window of the smoothed plot series, in evaluation points.
pub const SMOOTHING_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CsvRow {
    scenario: u8,
    trained_density: Density,
    density: Density,
    seed: String,
    reward: f64,
    collision_rate: f64,
    avg_speed: f64,
    avg_pet: Option<f64>,
    success_rate: f64,
}

impl CsvRow {
    fn from_eval(r: &EvalRow, seed: String) -> Self {
        Self {
            scenario: r.scenario,
            trained_density: r.trained_density,
            density: r.density,
            seed,
            reward: r.reward,
            collision_rate: r.collision_rate,
            avg_speed: r.avg_speed,
            avg_pet: r.avg_pet,
            success_rate: r.success_rate,
        }
    }
}

/// Seed-averaged metrics of one (scenario, trained density, density) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub scenario: u8,
    pub trained_density: Density,
    pub density: Density,
    pub seeds: usize,
    pub reward: f64,
    pub collision_rate: f64,
    pub avg_speed: f64,
    /// Mean over the runs that observed any PET pair.
    pub avg_pet: Option<f64>,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub runs: Vec<EvalRow>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl Report {
    pub fn new(runs: Vec<EvalRow>) -> Result<Self> {
        if runs.is_empty() {
            return Err(HarnessError::EmptyReport);
        }
        Ok(Self { runs })
    }

    /// One mean row per group, in order of first appearance.
    pub fn means(&self) -> Vec<MeanRow> {
        let mut groups: Vec<(u8, Density, Density)> = Vec::new();
        for r in &self.runs {
            let g = (r.scenario, r.trained_density, r.density);
            if !groups.contains(&g) {
                groups.push(g);
            }
        }
        groups
            .into_iter()
            .map(|(scenario, trained_density, density)| {
                let rs: Vec<&EvalRow> = self
                    .runs
                    .iter()
                    .filter(|r| (r.scenario, r.trained_density, r.density) == (scenario, trained_density, density))
                    .collect();
                MeanRow {
                    scenario,
                    trained_density,
                    density,
                    seeds: rs.len(),
                    reward: mean(rs.iter().map(|r| r.reward)).unwrap_or(0.0),
                    collision_rate: mean(rs.iter().map(|r| r.collision_rate)).unwrap_or(0.0),
                    avg_speed: mean(rs.iter().map(|r| r.avg_speed)).unwrap_or(0.0),
                    avg_pet: mean(rs.iter().filter_map(|r| r.avg_pet)),
                    success_rate: mean(rs.iter().map(|r| r.success_rate)).unwrap_or(0.0),
                }
            })
            .collect()
    }

    /// Runs followed by one mean row per group.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.runs {
            w.serialize(CsvRow::from_eval(r, r.seed.to_string()))?;
        }
        for m in self.means() {
            w.serialize(CsvRow {
                scenario: m.scenario,
                trained_density: m.trained_density,
                density: m.density,
                seed: MEAN_SEED.into(),
                reward: m.reward,
                collision_rate: m.collision_rate,
                avg_speed: m.avg_speed,
                avg_pet: m.avg_pet,
                success_rate: m.success_rate,
            })?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Report(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Reads the per-run rows back; mean rows are derived data and skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let expected: Vec<&str> = KEY_COLUMNS.iter().chain(METRIC_COLUMNS.iter()).copied().collect();
        if header != expected {
            return Err(HarnessError::Report(format!("unexpected columns {header:?}")));
        }
        let mut runs = Vec::new();
        for row in r.deserialize::<CsvRow>() {
            let row = row?;
            if row.seed == MEAN_SEED {
                continue;
            }
            let seed = row.seed.parse().map_err(|_| HarnessError::Report(format!("bad seed {:?}", row.seed)))?;
            runs.push(EvalRow {
                scenario: row.scenario,
                trained_density: row.trained_density,
                density: row.density,
                seed,
                reward: row.reward,
                collision_rate: row.collision_rate,
                avg_speed: row.avg_speed,
                avg_pet: row.avg_pet,
                success_rate: row.success_rate,
            });
        }
        Self::new(runs)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: &'a str,
            metrics: [&'a str; 5],
            runs: &'a [EvalRow],
            means: Vec<MeanRow>,
        }
        let doc = Doc { schema: REPORT_SCHEMA, metrics: METRIC_COLUMNS, runs: &self.runs, means: self.means() };
        serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            schema: String,
            runs: Vec<EvalRow>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        if doc.schema != REPORT_SCHEMA {
            return Err(HarnessError::Report(format!("unsupported schema {:?}", doc.schema)));
        }
        Self::new(doc.runs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn emit_report(rows: &[EvalRow], dir: &Path, stem: &str) -> Result<ReportFiles> {
    let report = Report::new(rows.to_vec())?;
    std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let files = ReportFiles { csv: dir.join(format!("{stem}.csv")), json: dir.join(format!("{stem}.json")) };
    std::fs::write(&files.csv, report.to_csv()?).map_err(HarnessError::io(&files.csv))?;
    std::fs::write(&files.json, report.to_json()).map_err(HarnessError::io(&files.json))?;
    Ok(files)
}

/// Trailing moving average.
pub fn smooth(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..xs.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            xs[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub episode: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

/// Long-format rows of the team curves: every raw metric, plus a
/// `<metric>_smoothed` series for the reward, collision rate and speed.
pub fn plot_rows(curves: &[(u64, Vec<LogRow>)]) -> Vec<PlotRow> {
    let mut out = Vec::new();
    for (seed, log) in curves {
        let team: Vec<&LogRow> = log.iter().filter(|r| r.agent == LogRow::TEAM).collect();
        let series: [(&str, Vec<Option<f64>>); 5] = [
            ("eval_reward", team.iter().map(|r| Some(r.eval_reward)).collect()),
            ("collision_rate", team.iter().map(|r| Some(r.collision_rate)).collect()),
            ("avg_speed", team.iter().map(|r| Some(r.avg_speed)).collect()),
            ("avg_pet", team.iter().map(|r| r.avg_pet).collect()),
            ("lambda", team.iter().map(|r| Some(r.lambda)).collect()),
        ];
        for (name, values) in &series {
            for (r, v) in team.iter().zip(values) {
                if let Some(v) = v {
                    out.push(PlotRow { episode: r.episode, seed: *seed, metric: name.to_string(), value: *v });
                }
            }
        }
        for (name, values) in series.iter().take(3) {
            let raw: Vec<f64> = values.iter().map(|v| v.expect("always present")).collect();
            for (r, v) in team.iter().zip(smooth(&raw, SMOOTHING_WINDOW)) {
                out.push(PlotRow { episode: r.episode, seed: *seed, metric: format!("{name}_smoothed"), value: v });
            }
        }
    }
    out
}

pub fn write_plot_csv(curves: &[(u64, Vec<LogRow>)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let rows = plot_rows(curves);
    if rows.is_empty() {
        w.write_record(["episode", "seed", "metric", "value"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(HarnessError::io(path))?;
    Ok(())
}

/// Seed-mean team curve over the evaluation points every seed reached.
pub fn mean_curve(curves: &[(u64, Vec<LogRow>)]) -> Vec<LogRow> {
    let Some((_, first)) = curves.first() else { return Vec::new() };
    let team = |log: &[LogRow], ep: usize| log.iter().find(|r| r.agent == LogRow::TEAM && r.episode == ep).cloned();
    first
        .iter()
        .filter(|r| r.agent == LogRow::TEAM)
        .filter_map(|r| {
            let rows: Vec<LogRow> = curves.iter().map(|(_, log)| team(log, r.episode)).collect::<Option<_>>()?;
            Some(LogRow {
                episode: r.episode,
                agent: MEAN_SEED.into(),
                eval_reward: mean(rows.iter().map(|x| x.eval_reward))?,
                collision_rate: mean(rows.iter().map(|x| x.collision_rate))?,
                avg_speed: mean(rows.iter().map(|x| x.avg_speed))?,
                avg_pet: mean(rows.iter().filter_map(|x| x.avg_pet)),
                lambda: mean(rows.iter().map(|x| x.lambda))?,
            })
        })
        .collect()
}
