//! Scripted optimal policy wrapped as a learner.

use rand_chacha::rand_core::RngCore;

use super::{ActMode, Learner, Trajectory};
use crate::env::{expert_action, Action, EnvState, Goal};

/// Plays the optimal strategy on feasible goals; on infeasible goals it
/// runs out the budget with the first legal action.
#[derive(Debug, Clone, Default)]
pub struct ExpertLearner {
    version: u64,
}

impl ExpertLearner {
    pub fn new() -> ExpertLearner {
        ExpertLearner::default()
    }
}

impl Learner for ExpertLearner {
    fn act(
        &self,
        goal: &Goal,
        state: &EnvState,
        legal: &[Action],
        _mode: ActMode,
        _rng: &mut dyn RngCore,
    ) -> Action {
        if goal.feasible {
            expert_action(state, goal).expect("feasible goal")
        } else {
            legal.first().copied().unwrap_or(Action::GoTo(0))
        }
    }

    fn learn(&mut self, _goal: &Goal, _trajectory: &Trajectory) {
        self.version += 1;
    }

    fn version(&self) -> u64 {
        self.version
    }
}
