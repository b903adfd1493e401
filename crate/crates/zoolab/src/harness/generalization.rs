//! Held-out generalization error: how far the estimator's predicted
//! competence sits from the observed success rate on unseen goals,
//! averaged over the evaluation sweeps of a finished run.

use std::io::BufRead;
use std::path::Path;

use littlezoo::goalspace::CategoryLabel;

use crate::error::LabError;
use crate::metrics::EvalRow;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizationReport {
    /// Mean |observed SR - predicted competence| per category.
    pub per_category: [Option<f64>; 5],
    /// Mean over populated categories.
    pub macro_average: f64,
}

/// Aggregates held-out evaluation rows into the per-category report.
pub fn generalization_report(test_evals: &[EvalRow]) -> GeneralizationReport {
    let mut sums = [0.0f64; 5];
    let mut counts = [0usize; 5];
    for row in test_evals {
        let index = row.category.index();
        sums[index] += (row.sr - row.estimator_competence).abs();
        counts[index] += 1;
    }
    let mut per_category = [None; 5];
    let mut total = 0.0;
    let mut populated = 0;
    for category in CategoryLabel::ALL {
        let index = category.index();
        if counts[index] > 0 {
            let mean = sums[index] / counts[index] as f64;
            per_category[index] = Some(mean);
            total += mean;
            populated += 1;
        }
    }
    GeneralizationReport {
        per_category,
        macro_average: if populated == 0 {
            0.0
        } else {
            total / populated as f64
        },
    }
}

/// Parses an evals CSV written by this crate.
pub fn read_evals_csv(path: &Path) -> Result<Vec<EvalRow>, LabError> {
    let file = std::fs::File::open(path)
        .map_err(|e| LabError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (index, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if index == 0 {
            if line != "episode,category,sr,n_goals,estimator_competence,reference_competence,cumulative_cost" {
                return Err(LabError::Validation(format!(
                    "{}: unexpected header {line:?}",
                    path.display()
                )));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(LabError::Validation(format!(
                "{} line {}: expected 7 fields, found {}",
                path.display(),
                index + 1,
                fields.len()
            )));
        }
        let parse_f64 = |text: &str, what: &str| -> Result<f64, LabError> {
            text.parse::<f64>().map_err(|_| {
                LabError::Validation(format!(
                    "{} line {}: bad {what} value {text:?}",
                    path.display(),
                    index + 1
                ))
            })
        };
        rows.push(EvalRow {
            episode: fields[0].parse().map_err(|_| {
                LabError::Validation(format!(
                    "{} line {}: bad episode {:?}",
                    path.display(),
                    index + 1,
                    fields[0]
                ))
            })?,
            category: CategoryLabel::from_str(fields[1]).ok_or_else(|| {
                LabError::Validation(format!(
                    "{} line {}: unknown category {:?}",
                    path.display(),
                    index + 1,
                    fields[1]
                ))
            })?,
            sr: parse_f64(fields[2], "sr")?,
            n_goals: fields[3].parse().map_err(|_| {
                LabError::Validation(format!(
                    "{} line {}: bad n_goals {:?}",
                    path.display(),
                    index + 1,
                    fields[3]
                ))
            })?,
            estimator_competence: parse_f64(fields[4], "estimator_competence")?,
            reference_competence: if fields[5].is_empty() {
                None
            } else {
                Some(parse_f64(fields[5], "reference_competence")?)
            },
            cumulative_cost: fields[6].parse().map_err(|_| {
                LabError::Validation(format!(
                    "{} line {}: bad cumulative_cost {:?}",
                    path.display(),
                    index + 1,
                    fields[6]
                ))
            })?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(category: CategoryLabel, sr: f64, competence: f64) -> EvalRow {
        EvalRow {
            episode: 0,
            category,
            sr,
            n_goals: 64,
            estimator_competence: competence,
            reference_competence: None,
            cumulative_cost: 0,
        }
    }

    #[test]
    fn an_oracle_estimator_has_zero_error() {
        let rows = vec![
            row(CategoryLabel::Grasp, 0.75, 0.75),
            row(CategoryLabel::GrowPlant, 0.5, 0.5),
        ];
        let report = generalization_report(&rows);
        assert_eq!(report.per_category[CategoryLabel::Grasp.index()], Some(0.0));
        assert_eq!(report.macro_average, 0.0);
    }

    #[test]
    fn default_zero_competence_scores_the_observed_sr() {
        // The structure of the held-out table: an estimator that cannot
        // price unseen goals is off by exactly the observed success rate.
        let rows = vec![row(CategoryLabel::Grasp, 0.98, 0.0)];
        let report = generalization_report(&rows);
        let error = report.per_category[CategoryLabel::Grasp.index()].unwrap();
        assert!((error - 0.98).abs() < 1e-12);
    }

    #[test]
    fn averages_are_taken_over_sweeps_within_a_category() {
        let rows = vec![
            row(CategoryLabel::Grasp, 1.0, 0.5),
            row(CategoryLabel::Grasp, 0.5, 0.5),
        ];
        let report = generalization_report(&rows);
        assert_eq!(report.per_category[CategoryLabel::Grasp.index()], Some(0.25));
    }
}
