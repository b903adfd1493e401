//! Evaluation-based ALP estimation.
//!
//! Every `frequency` episodes training stops and the frozen policy is
//! evaluated: per goal for `EvalAlp`, per category bucket for `EkEvalAlp`.
//! Competence is the latest sweep's success frequency and ALP the absolute
//! difference between the last two sweeps. Every evaluation episode is
//! added to the cost counter; nothing else about these estimators is free.

use alloc::vec;
use alloc::vec::Vec;

use super::{category_map, AlpEstimator, EvalKey, EvalMeasurement, EvalRequest, GoalId};
use crate::goalspace::{CategoryLabel, GoalSpace};
use crate::maths;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Episodes between evaluation sweeps.
    pub frequency: u64,
    /// Frozen episodes per key (goal or bucket) in one sweep.
    pub episodes_per_key: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            frequency: 1000,
            episodes_per_key: 1,
        }
    }
}

/// Per-goal evaluation sweeps.
#[derive(Debug, Clone)]
pub struct EvalAlp {
    config: EvalConfig,
    latest: Vec<f64>,
    previous: Vec<f64>,
    cost: u64,
}

impl EvalAlp {
    pub fn new(config: EvalConfig, space: &GoalSpace) -> EvalAlp {
        let n = space.goals().len();
        EvalAlp {
            config,
            latest: vec![0.0; n],
            previous: vec![0.0; n],
            cost: 0,
        }
    }

    /// Persistence view: latest sweep, previous sweep, cumulative cost.
    pub fn state(&self) -> (&[f64], &[f64], u64) {
        (&self.latest, &self.previous, self.cost)
    }

    pub fn from_state(
        config: EvalConfig,
        latest: Vec<f64>,
        previous: Vec<f64>,
        cost: u64,
    ) -> Option<EvalAlp> {
        if latest.len() != previous.len() {
            return None;
        }
        Some(EvalAlp {
            config,
            latest,
            previous,
            cost,
        })
    }
}

impl AlpEstimator for EvalAlp {
    fn observe(&mut self, _goal: GoalId, _success: bool, _episode_index: u64) {
        // Purely evaluation-driven.
    }

    fn competence(&self, goal: GoalId) -> f64 {
        self.latest[goal as usize]
    }

    fn alp(&self, goal: GoalId) -> f64 {
        maths::abs(self.latest[goal as usize] - self.previous[goal as usize])
    }

    fn needs_evaluation(&self, completed_episodes: u64) -> Option<EvalRequest> {
        (completed_episodes > 0 && completed_episodes % self.config.frequency == 0).then_some(
            EvalRequest::PerGoal {
                episodes_per_goal: self.config.episodes_per_key,
            },
        )
    }

    fn ingest_evaluation(&mut self, results: &[EvalMeasurement]) {
        self.previous.copy_from_slice(&self.latest);
        for measurement in results {
            if let EvalKey::Goal(goal) = measurement.key {
                self.latest[goal as usize] =
                    f64::from(measurement.successes) / f64::from(measurement.episodes.max(1));
                self.cost += u64::from(measurement.episodes);
            }
        }
    }

    fn evaluation_cost(&self) -> u64 {
        self.cost
    }

    fn swap_goal_space(&mut self, space: &GoalSpace) {
        let n = space.goals().len();
        self.latest = vec![0.0; n];
        self.previous = vec![0.0; n];
    }
}

/// Per-bucket evaluation sweeps (expert-knowledge grouping).
#[derive(Debug, Clone)]
pub struct EkEvalAlp {
    config: EvalConfig,
    latest: [f64; 5],
    previous: [f64; 5],
    cost: u64,
    goal_category: Vec<u8>,
}

impl EkEvalAlp {
    pub fn new(config: EvalConfig, space: &GoalSpace) -> EkEvalAlp {
        EkEvalAlp {
            config,
            latest: [0.0; 5],
            previous: [0.0; 5],
            cost: 0,
            goal_category: category_map(space),
        }
    }

    pub fn bucket_competence(&self, category: CategoryLabel) -> f64 {
        self.latest[category.index()]
    }

    /// Persistence view: latest sweep, previous sweep, cumulative cost.
    pub fn state(&self) -> (&[f64; 5], &[f64; 5], u64) {
        (&self.latest, &self.previous, self.cost)
    }

    pub fn from_state(
        config: EvalConfig,
        latest: [f64; 5],
        previous: [f64; 5],
        cost: u64,
        space: &GoalSpace,
    ) -> EkEvalAlp {
        EkEvalAlp {
            config,
            latest,
            previous,
            cost,
            goal_category: category_map(space),
        }
    }
}

impl AlpEstimator for EkEvalAlp {
    fn observe(&mut self, _goal: GoalId, _success: bool, _episode_index: u64) {}

    fn competence(&self, goal: GoalId) -> f64 {
        self.latest[self.goal_category[goal as usize] as usize]
    }

    fn alp(&self, goal: GoalId) -> f64 {
        let bucket = self.goal_category[goal as usize] as usize;
        maths::abs(self.latest[bucket] - self.previous[bucket])
    }

    fn needs_evaluation(&self, completed_episodes: u64) -> Option<EvalRequest> {
        (completed_episodes > 0 && completed_episodes % self.config.frequency == 0).then_some(
            EvalRequest::PerBucket {
                episodes_per_bucket: self.config.episodes_per_key,
            },
        )
    }

    fn ingest_evaluation(&mut self, results: &[EvalMeasurement]) {
        self.previous = self.latest;
        for measurement in results {
            if let EvalKey::Bucket(category) = measurement.key {
                self.latest[category.index()] =
                    f64::from(measurement.successes) / f64::from(measurement.episodes.max(1));
                self.cost += u64::from(measurement.episodes);
            }
        }
    }

    fn evaluation_cost(&self) -> u64 {
        self.cost
    }

    fn swap_goal_space(&mut self, space: &GoalSpace) {
        self.goal_category = category_map(space);
        self.latest = [0.0; 5];
        self.previous = [0.0; 5];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goalspace::Split;
    use crate::testutil::small_space;

    fn space() -> GoalSpace {
        small_space(100, 20, 4)
    }

    #[test]
    fn sweep_cadence_and_cost_accounting() {
        let space = space();
        let mut estimator = EkEvalAlp::new(
            EvalConfig {
                frequency: 1000,
                episodes_per_key: 2048,
            },
            &space,
        );
        assert!(estimator.needs_evaluation(0).is_none());
        assert!(estimator.needs_evaluation(999).is_none());
        assert!(matches!(
            estimator.needs_evaluation(1000),
            Some(EvalRequest::PerBucket {
                episodes_per_bucket: 2048
            })
        ));
        // One sweep over the five buckets costs 10,240 episodes.
        let results: Vec<EvalMeasurement> = CategoryLabel::ALL
            .into_iter()
            .map(|category| EvalMeasurement {
                key: EvalKey::Bucket(category),
                successes: 0,
                episodes: 2048,
            })
            .collect();
        estimator.ingest_evaluation(&results);
        assert_eq!(estimator.evaluation_cost(), 10_240);
        estimator.ingest_evaluation(&results);
        assert_eq!(estimator.evaluation_cost(), 20_480);
    }

    #[test]
    fn alp_is_the_difference_of_the_last_two_sweeps() {
        let space = space();
        let mut estimator = EvalAlp::new(EvalConfig::default(), &space);
        let goal = space.train_ids()[0];
        assert_eq!(estimator.alp(goal), 0.0);
        estimator.ingest_evaluation(&[EvalMeasurement {
            key: EvalKey::Goal(goal),
            successes: 1,
            episodes: 1,
        }]);
        assert_eq!(estimator.competence(goal), 1.0);
        assert_eq!(estimator.alp(goal), 1.0);
        estimator.ingest_evaluation(&[EvalMeasurement {
            key: EvalKey::Goal(goal),
            successes: 1,
            episodes: 1,
        }]);
        assert_eq!(estimator.alp(goal), 0.0);
        assert_eq!(estimator.evaluation_cost(), 2);
    }

    #[test]
    fn bucket_results_apply_to_every_goal_of_the_bucket() {
        let space = space();
        let mut estimator = EkEvalAlp::new(
            EvalConfig {
                frequency: 1000,
                episodes_per_key: 64,
            },
            &space,
        );
        estimator.ingest_evaluation(&[EvalMeasurement {
            key: EvalKey::Bucket(CategoryLabel::Grasp),
            successes: 32,
            episodes: 64,
        }]);
        for &goal in space.ids_by_category(Split::Train, CategoryLabel::Grasp) {
            assert_eq!(estimator.competence(goal), 0.5);
        }
        for &goal in space.ids_by_category(Split::Train, CategoryLabel::Impossible) {
            assert_eq!(estimator.competence(goal), 0.0);
        }
    }
}
