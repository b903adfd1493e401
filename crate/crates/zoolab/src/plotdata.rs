//! Tidy plot data aggregated across run directories.
//!
//! Reads each run's effective config (for the method name and seed) and
//! its evaluation CSV, checks that all runs share the same sweep grid,
//! and emits long-format rows with per-method mean/std columns computed
//! over seeds. A run missing a category at some sweep gets an explicit
//! empty `value` cell rather than a silently dropped row.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use littlezoo::goalspace::CategoryLabel;

use crate::config::ConfigFile;
use crate::error::LabError;
use crate::harness::generalization::read_evals_csv;
use crate::metrics::{fmt_f64, RunPaths};

/// Which evals.csv column to aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Sr,
    EstimatorCompetence,
}

impl Metric {
    pub fn from_str(s: &str) -> Option<Metric> {
        match s {
            "sr" => Some(Metric::Sr),
            "estimator_competence" => Some(Metric::EstimatorCompetence),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Sr => "sr",
            Metric::EstimatorCompetence => "estimator_competence",
        }
    }
}

struct RunData {
    method: String,
    seed: u64,
    /// (episode, category) -> value
    values: BTreeMap<(u64, usize), f64>,
    episodes: BTreeSet<u64>,
}

pub fn emit_plot_data(
    run_dirs: &[PathBuf],
    metric: Metric,
    out_path: &Path,
) -> Result<(), LabError> {
    if run_dirs.is_empty() {
        return Err(LabError::Config("no run directories given".into()));
    }
    let mut runs = Vec::new();
    for dir in run_dirs {
        let paths = RunPaths::new(dir);
        let config = ConfigFile::from_path(&paths.config_toml()).map_err(|e| {
            LabError::Config(format!("{}: missing effective config ({e})", dir.display()))
        })?;
        let run_section = config.run.unwrap_or_default();
        let method = run_section
            .estimator
            .unwrap_or_else(|| "unknown".to_string());
        let seed = run_section.seed.unwrap_or(0);
        let rows = read_evals_csv(&paths.evals_csv())?;
        let mut values = BTreeMap::new();
        let mut episodes = BTreeSet::new();
        for row in rows {
            let value = match metric {
                Metric::Sr => row.sr,
                Metric::EstimatorCompetence => row.estimator_competence,
            };
            values.insert((row.episode, row.category.index()), value);
            episodes.insert(row.episode);
        }
        runs.push(RunData {
            method,
            seed,
            values,
            episodes,
        });
    }

    // All runs must share the sweep grid.
    let reference = &runs[0].episodes;
    let mismatched: Vec<String> = run_dirs
        .iter()
        .zip(&runs)
        .filter(|(_, run)| run.episodes != *reference)
        .map(|(dir, _)| dir.display().to_string())
        .collect();
    if !mismatched.is_empty() {
        return Err(LabError::Validation(format!(
            "eval cadence mismatch in: {}",
            mismatched.join(", ")
        )));
    }

    // Aggregate per (method, episode, category) over seeds.
    let mut groups: BTreeMap<(String, u64, usize), Vec<f64>> = BTreeMap::new();
    let mut categories: BTreeSet<usize> = BTreeSet::new();
    for run in &runs {
        for (&(episode, category), &value) in &run.values {
            categories.insert(category);
            groups
                .entry((run.method.clone(), episode, category))
                .or_default()
                .push(value);
        }
    }

    let mut writer = std::io::BufWriter::new(std::fs::File::create(out_path)?);
    writeln!(writer, "method,seed,episode,category,value,mean,std")?;
    for run in &runs {
        for &episode in reference {
            for &category in &categories {
                let key = (run.method.clone(), episode, category);
                let Some(group) = groups.get(&key) else {
                    continue;
                };
                let mean = group.iter().sum::<f64>() / group.len() as f64;
                let variance =
                    group.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / group.len() as f64;
                let std = variance.sqrt();
                let value = run
                    .values
                    .get(&(episode, category))
                    .map(|v| fmt_f64(*v))
                    // Explicit gap marker: the run lacks this category.
                    .unwrap_or_default();
                writeln!(
                    writer,
                    "{},{},{},{},{},{},{}",
                    run.method,
                    run.seed,
                    episode,
                    CategoryLabel::ALL[category].as_str(),
                    value,
                    fmt_f64(mean),
                    fmt_f64(std),
                )?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}
