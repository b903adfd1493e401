//! Online ALP estimation from outcome ring buffers.
//!
//! A buffer of the most recent outcomes is kept per goal (`OnlineAlp`) or
//! per expert-defined category bucket (`EkOnlineAlp`). Competence is the
//! mean of the newest half of the buffer, past competence the mean of the
//! oldest half, and ALP their absolute difference. Goals (or buckets)
//! never observed report the default competence of 0. Neither variant
//! spends evaluation episodes.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::{category_map, halves_summary, AlpEstimator, GoalId};
use crate::goalspace::{CategoryLabel, GoalSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineConfig {
    /// Ring capacity (both halves together).
    pub buffer_capacity: usize,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        OnlineConfig {
            buffer_capacity: 100,
        }
    }
}

/// Per-goal online buffers.
#[derive(Debug, Clone)]
pub struct OnlineAlp {
    config: OnlineConfig,
    buffers: Vec<VecDeque<bool>>,
    competences: Vec<f64>,
    alps: Vec<f64>,
}

impl OnlineAlp {
    pub fn new(config: OnlineConfig, space: &GoalSpace) -> OnlineAlp {
        let n = space.goals().len();
        OnlineAlp {
            config,
            buffers: vec![VecDeque::new(); n],
            competences: vec![0.0; n],
            alps: vec![0.0; n],
        }
    }

    /// Persistence view: per-goal outcome buffers.
    pub fn buffers(&self) -> &[VecDeque<bool>] {
        &self.buffers
    }

    /// Rebuilds an estimator from persisted buffers.
    pub fn from_state(config: OnlineConfig, buffers: Vec<VecDeque<bool>>) -> OnlineAlp {
        let mut estimator = OnlineAlp {
            config,
            competences: vec![0.0; buffers.len()],
            alps: vec![0.0; buffers.len()],
            buffers,
        };
        for index in 0..estimator.buffers.len() {
            let (competence, alp) = halves_summary(&estimator.buffers[index]);
            estimator.competences[index] = competence;
            estimator.alps[index] = alp;
        }
        estimator
    }
}

impl AlpEstimator for OnlineAlp {
    fn observe(&mut self, goal: GoalId, success: bool, _episode_index: u64) {
        let buffer = &mut self.buffers[goal as usize];
        if buffer.len() == self.config.buffer_capacity {
            buffer.pop_front();
        }
        buffer.push_back(success);
        let (competence, alp) = halves_summary(buffer);
        self.competences[goal as usize] = competence;
        self.alps[goal as usize] = alp;
    }

    fn competence(&self, goal: GoalId) -> f64 {
        self.competences[goal as usize]
    }

    fn alp(&self, goal: GoalId) -> f64 {
        self.alps[goal as usize]
    }

    fn swap_goal_space(&mut self, space: &GoalSpace) {
        // Fresh buffers: unseen goals fall back to competence 0.
        *self = OnlineAlp::new(self.config.clone(), space);
    }
}

/// Per-bucket online buffers (expert-knowledge grouping).
#[derive(Debug, Clone)]
pub struct EkOnlineAlp {
    config: OnlineConfig,
    buckets: [VecDeque<bool>; 5],
    competences: [f64; 5],
    alps: [f64; 5],
    goal_category: Vec<u8>,
}

impl EkOnlineAlp {
    pub fn new(config: OnlineConfig, space: &GoalSpace) -> EkOnlineAlp {
        EkOnlineAlp {
            config,
            buckets: Default::default(),
            competences: [0.0; 5],
            alps: [0.0; 5],
            goal_category: category_map(space),
        }
    }

    pub fn bucket_competence(&self, category: CategoryLabel) -> f64 {
        self.competences[category.index()]
    }

    pub fn bucket_alp(&self, category: CategoryLabel) -> f64 {
        self.alps[category.index()]
    }

    /// Persistence view: the five bucket buffers.
    pub fn buckets(&self) -> &[VecDeque<bool>; 5] {
        &self.buckets
    }

    /// Rebuilds an estimator from persisted bucket buffers.
    pub fn from_state(
        config: OnlineConfig,
        buckets: [VecDeque<bool>; 5],
        space: &GoalSpace,
    ) -> EkOnlineAlp {
        let mut estimator = EkOnlineAlp {
            config,
            buckets,
            competences: [0.0; 5],
            alps: [0.0; 5],
            goal_category: category_map(space),
        };
        for index in 0..5 {
            let (competence, alp) = halves_summary(&estimator.buckets[index]);
            estimator.competences[index] = competence;
            estimator.alps[index] = alp;
        }
        estimator
    }
}

impl AlpEstimator for EkOnlineAlp {
    fn observe(&mut self, goal: GoalId, success: bool, _episode_index: u64) {
        let bucket = self.goal_category[goal as usize] as usize;
        let buffer = &mut self.buckets[bucket];
        if buffer.len() == self.config.buffer_capacity {
            buffer.pop_front();
        }
        buffer.push_back(success);
        let (competence, alp) = halves_summary(buffer);
        self.competences[bucket] = competence;
        self.alps[bucket] = alp;
    }

    fn competence(&self, goal: GoalId) -> f64 {
        self.competences[self.goal_category[goal as usize] as usize]
    }

    fn alp(&self, goal: GoalId) -> f64 {
        self.alps[self.goal_category[goal as usize] as usize]
    }

    fn swap_goal_space(&mut self, space: &GoalSpace) {
        // Bucket buffers carry over: the warm start that lets the
        // estimator price unseen goals by their bucket.
        self.goal_category = category_map(space);
    }
}
