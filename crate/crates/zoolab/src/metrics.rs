//! Run-directory metrics: append-only CSVs, the mastery report and the
//! latent export. All files are UTF-8 with LF endings, headers, and
//! deterministic row order, so a reproduced run is byte-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use littlezoo::estimators::MagellanEstimator;
use littlezoo::goalspace::{CategoryLabel, GoalSpace};

use crate::error::LabError;

/// One training.csv row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow {
    pub episode: u64,
    pub goal_id: u32,
    pub category: CategoryLabel,
    pub outcome: bool,
    pub alp_at_selection: f64,
    pub epsilon: f64,
    pub exploratory: bool,
}

/// One evals.csv row (also used for the held-out evaluation file).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub episode: u64,
    pub category: CategoryLabel,
    pub sr: f64,
    pub n_goals: usize,
    pub estimator_competence: f64,
    pub reference_competence: Option<f64>,
    pub cumulative_cost: u64,
}

/// Shortest-round-trip float formatting (deterministic).
pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

pub struct TrainingCsv {
    writer: BufWriter<File>,
}

impl TrainingCsv {
    pub fn create(path: &Path) -> Result<TrainingCsv, LabError> {
        let mut writer = BufWriter::new(File::create(path)?);
        writer.write_all(
            b"episode,goal_id,category,outcome,alp_at_selection,epsilon,exploratory_flag\n",
        )?;
        Ok(TrainingCsv { writer })
    }

    pub fn append(&mut self, row: &TrainingRow) -> Result<(), LabError> {
        writeln!(
            self.writer,
            "{},{},{},{},{},{},{}",
            row.episode,
            row.goal_id,
            row.category.as_str(),
            u8::from(row.outcome),
            fmt_f64(row.alp_at_selection),
            fmt_f64(row.epsilon),
            u8::from(row.exploratory),
        )?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), LabError> {
        self.writer.flush()?;
        Ok(())
    }
}

pub struct EvalsCsv {
    writer: BufWriter<File>,
}

impl EvalsCsv {
    pub fn create(path: &Path) -> Result<EvalsCsv, LabError> {
        let mut writer = BufWriter::new(File::create(path)?);
        writer.write_all(
            b"episode,category,sr,n_goals,estimator_competence,reference_competence,cumulative_cost\n",
        )?;
        Ok(EvalsCsv { writer })
    }

    pub fn append(&mut self, row: &EvalRow) -> Result<(), LabError> {
        writeln!(
            self.writer,
            "{},{},{},{},{},{},{}",
            row.episode,
            row.category.as_str(),
            fmt_f64(row.sr),
            row.n_goals,
            fmt_f64(row.estimator_competence),
            row.reference_competence.map(fmt_f64).unwrap_or_default(),
            row.cumulative_cost,
        )?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), LabError> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Per-category first eval episode with SR > 0.9.
pub fn mastery_report(evals: &[EvalRow]) -> BTreeMap<String, Option<u64>> {
    let mut report: BTreeMap<String, Option<u64>> = CategoryLabel::ALL
        .iter()
        .map(|category| (category.as_str().to_string(), None))
        .collect();
    for row in evals {
        let entry = report
            .get_mut(row.category.as_str())
            .expect("all categories are pre-seeded");
        if entry.is_none() && row.sr > 0.9 {
            *entry = Some(row.episode);
        }
    }
    report
}

pub fn write_mastery(
    report: &BTreeMap<String, Option<u64>>,
    path: &Path,
) -> Result<(), LabError> {
    let mut writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut writer, report)
        .map_err(|e| LabError::Config(e.to_string()))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Writes goal latent vectors and predicted competence for every goal of
/// the space (train and test splits).
pub fn export_latents(
    estimator: &MagellanEstimator,
    space: &GoalSpace,
    path: &Path,
) -> Result<(), LabError> {
    use littlezoo::estimators::AlpEstimator;
    let mut writer = BufWriter::new(File::create(path)?);
    let dim = estimator.config().embed_dim;
    let mut header = String::from("goal_id,category,split,competence");
    for index in 0..dim {
        header.push_str(&format!(",latent_{index}"));
    }
    writeln!(writer, "{header}")?;
    for goal in space.goals() {
        let latent = estimator.latent(goal.id);
        debug_assert_eq!(latent.len(), dim);
        let mut row = format!(
            "{},{},{},{}",
            goal.id,
            goal.category.as_str(),
            space.split_of(goal.id).as_str(),
            fmt_f64(estimator.competence(goal.id)),
        );
        for value in latent {
            row.push(',');
            row.push_str(&fmt_f64(value));
        }
        writeln!(writer, "{row}")?;
    }
    writer.flush()?;
    Ok(())
}

/// Episode accounting for the run summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct EpisodeCounters {
    /// Episodes spent practicing selected goals.
    pub training: u64,
    /// Episodes spent in success-rate sweeps.
    pub sr_eval: u64,
    /// Episodes spent serving estimator evaluation requests.
    pub estimator_eval: u64,
}

impl EpisodeCounters {
    pub fn total(&self) -> u64 {
        self.training + self.sr_eval + self.estimator_eval
    }
}

/// run.json: counters, warnings, and the accounting identity.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub episodes: u64,
    pub counters: EpisodeCounters,
    pub total_episodes: u64,
    pub estimator_reported_cost: u64,
    pub warnings: Vec<String>,
}

pub fn write_run_summary(summary: &RunSummary, path: &Path) -> Result<(), LabError> {
    let mut writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut writer, summary)
        .map_err(|e| LabError::Config(e.to_string()))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Standard artifact paths inside a run directory.
pub struct RunPaths {
    pub dir: PathBuf,
}

impl RunPaths {
    pub fn new(dir: &Path) -> RunPaths {
        RunPaths {
            dir: dir.to_path_buf(),
        }
    }

    pub fn training_csv(&self) -> PathBuf {
        self.dir.join("training.csv")
    }

    pub fn evals_csv(&self) -> PathBuf {
        self.dir.join("evals.csv")
    }

    pub fn test_evals_csv(&self) -> PathBuf {
        self.dir.join("evals_test.csv")
    }

    pub fn mastery_json(&self) -> PathBuf {
        self.dir.join("mastery.json")
    }

    pub fn latents_csv(&self) -> PathBuf {
        self.dir.join("latents.csv")
    }

    pub fn run_json(&self) -> PathBuf {
        self.dir.join("run.json")
    }

    pub fn config_toml(&self) -> PathBuf {
        self.dir.join("config.toml")
    }

    pub fn checkpoints(&self) -> PathBuf {
        self.dir.join("checkpoints")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_shortest_round_trip() {
        assert_eq!(fmt_f64(0.41), "0.41");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(0.1 + 0.2), "0.30000000000000004");
    }

    #[test]
    fn mastery_takes_the_first_crossing_only() {
        let rows = vec![
            EvalRow {
                episode: 0,
                category: CategoryLabel::Grasp,
                sr: 0.5,
                n_goals: 64,
                estimator_competence: 0.0,
                reference_competence: None,
                cumulative_cost: 0,
            },
            EvalRow {
                episode: 5000,
                category: CategoryLabel::Grasp,
                sr: 0.95,
                n_goals: 64,
                estimator_competence: 0.0,
                reference_competence: None,
                cumulative_cost: 0,
            },
            EvalRow {
                episode: 10_000,
                category: CategoryLabel::Grasp,
                sr: 0.85,
                n_goals: 64,
                estimator_competence: 0.0,
                reference_competence: None,
                cumulative_cost: 0,
            },
            EvalRow {
                episode: 15_000,
                category: CategoryLabel::Grasp,
                sr: 0.99,
                n_goals: 64,
                estimator_competence: 0.0,
                reference_competence: None,
                cumulative_cost: 0,
            },
        ];
        let report = mastery_report(&rows);
        assert_eq!(report["grasp"], Some(5000));
        assert_eq!(report["grow_plant"], None);
    }
}
