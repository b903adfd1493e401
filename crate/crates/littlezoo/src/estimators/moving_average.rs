//! Per-goal moving-average learning-progress utility (Model Babbling).
//!
//! Each observation first measures ALP as the mean absolute difference
//! between the new outcome and every outcome in the goal's history, then
//! folds it into a per-goal utility with an exponential moving average:
//! `utility <- alpha * utility + (1 - alpha) * alp_hat`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::{AlpEstimator, GoalId};
use crate::goalspace::GoalSpace;
use crate::maths;

#[derive(Debug, Clone, PartialEq)]
pub struct MbConfig {
    /// Ring size of per-goal outcome histories.
    pub history_capacity: usize,
    /// EMA weight kept on the previous utility.
    pub smoothing: f64,
}

impl Default for MbConfig {
    fn default() -> Self {
        MbConfig {
            history_capacity: 100,
            smoothing: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MbEstimator {
    config: MbConfig,
    histories: Vec<VecDeque<bool>>,
    utilities: Vec<f64>,
}

impl MbEstimator {
    pub fn new(config: MbConfig, space: &GoalSpace) -> MbEstimator {
        let n = space.goals().len();
        MbEstimator {
            config,
            histories: vec![VecDeque::new(); n],
            utilities: vec![0.0; n],
        }
    }

    pub fn utility(&self, goal: GoalId) -> f64 {
        self.utilities[goal as usize]
    }

    /// Persistence view: per-goal outcome histories and utilities.
    pub fn state(&self) -> (&[VecDeque<bool>], &[f64]) {
        (&self.histories, &self.utilities)
    }

    /// Rebuilds an estimator from persisted state.
    pub fn from_state(
        config: MbConfig,
        histories: Vec<VecDeque<bool>>,
        utilities: Vec<f64>,
    ) -> Option<MbEstimator> {
        if histories.len() != utilities.len() {
            return None;
        }
        Some(MbEstimator {
            config,
            histories,
            utilities,
        })
    }
}

impl AlpEstimator for MbEstimator {
    fn observe(&mut self, goal: GoalId, success: bool, _episode_index: u64) {
        let history = &mut self.histories[goal as usize];
        // The new outcome is excluded from the history it is compared to;
        // an empty history yields an ALP measure of 0.
        let alp_hat = if history.is_empty() {
            0.0
        } else {
            history
                .iter()
                .map(|&r| maths::abs(f64::from(u8::from(success)) - f64::from(u8::from(r))))
                .sum::<f64>()
                / history.len() as f64
        };
        let alpha = self.config.smoothing;
        self.utilities[goal as usize] = alpha * self.utilities[goal as usize]
            + (1.0 - alpha) * alp_hat;
        if history.len() == self.config.history_capacity {
            history.pop_front();
        }
        history.push_back(success);
    }

    fn competence(&self, goal: GoalId) -> f64 {
        let history = &self.histories[goal as usize];
        if history.is_empty() {
            0.0
        } else {
            history.iter().map(|&r| f64::from(u8::from(r))).sum::<f64>() / history.len() as f64
        }
    }

    fn alp(&self, goal: GoalId) -> f64 {
        self.utilities[goal as usize]
    }

    fn swap_goal_space(&mut self, space: &GoalSpace) {
        let n = space.goals().len();
        self.histories = vec![VecDeque::new(); n];
        self.utilities = vec![0.0; n];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::small_space;

    fn space() -> GoalSpace {
        small_space(50, 20, 2)
    }

    #[test]
    fn documented_hand_arithmetic() {
        let mut estimator = MbEstimator::new(MbConfig::default(), &space());
        // History [1, 0], prior utility 0.2, new outcome 1.
        estimator.observe(0, true, 0);
        estimator.observe(0, false, 1);
        estimator.utilities[0] = 0.2;
        estimator.observe(0, true, 2);
        assert!((estimator.utility(0) - 0.41).abs() < 1e-12);
    }

    #[test]
    fn empty_history_decays_the_utility() {
        let mut estimator = MbEstimator::new(MbConfig::default(), &space());
        estimator.utilities[3] = 0.5;
        estimator.observe(3, true, 0);
        assert!((estimator.utility(3) - 0.15).abs() < 1e-12);
    }

    #[test]
    fn constant_history_decays_toward_zero() {
        let mut estimator = MbEstimator::new(MbConfig::default(), &space());
        for episode in 0..50 {
            estimator.observe(1, true, episode);
        }
        assert!(estimator.utility(1) < 1e-6);
        assert_eq!(estimator.competence(1), 1.0);
        // A change of fortune raises the utility again.
        estimator.observe(1, false, 50);
        assert!(estimator.utility(1) > 0.5);
    }

    #[test]
    fn history_is_bounded() {
        let mut estimator = MbEstimator::new(
            MbConfig {
                history_capacity: 4,
                smoothing: 0.3,
            },
            &space(),
        );
        for episode in 0..20 {
            estimator.observe(0, episode % 2 == 0, episode as u64);
        }
        assert_eq!(estimator.histories[0].len(), 4);
    }
}
