//! Pluggable policies practicing in the environment.
//!
//! Three learners: a scripted expert oracle, a simulated-competence
//! learner that draws outcomes from configured per-category schedules
//! without touching the environment, and a linear Q-learner over
//! hand-crafted binary features whose shared features produce genuine
//! cross-goal competence transfer.
//!
//! Acting is immutable (`&self`): evaluation can never mutate a learner.
//! The version counter advances once per `learn` call, which lets harness
//! code assert frozen-evaluation purity.

pub mod expert;
pub mod qlinear;
pub mod simulated;

use alloc::vec::Vec;

use rand_chacha::rand_core::RngCore;

use crate::env::{Action, EnvState, Goal};

pub use expert::ExpertLearner;
pub use qlinear::{FeatureQLearner, QLinearConfig};
pub use simulated::{Gate, LogisticSchedule, SimulatedLearner};

/// Whether an action draw may explore.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    Train,
    /// Greedy and guaranteed side-effect free.
    Eval,
}

/// One recorded step: the state the action was taken in, the action, and
/// the reward it returned.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub state: EnvState,
    pub action: Action,
    pub reward: f64,
}

/// A finished episode's transitions, in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
}

/// A policy that acts in episodes and updates from finished trajectories.
pub trait Learner {
    fn act(
        &self,
        goal: &Goal,
        state: &EnvState,
        legal: &[Action],
        mode: ActMode,
        rng: &mut dyn RngCore,
    ) -> Action;

    fn learn(&mut self, goal: &Goal, trajectory: &Trajectory);

    /// Incremented exactly once per `learn` call.
    fn version(&self) -> u64;
}

/// The selectable learner kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Expert,
    Simulated,
    QLinear,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [
        LearnerKind::Expert,
        LearnerKind::Simulated,
        LearnerKind::QLinear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::Expert => "expert",
            LearnerKind::Simulated => "simulated",
            LearnerKind::QLinear => "qlinear",
        }
    }

    pub fn from_str(s: &str) -> Option<LearnerKind> {
        LearnerKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// Concrete learner dispatch, clonable so runs can be forked.
#[derive(Debug, Clone)]
pub enum LearnerBox {
    Expert(ExpertLearner),
    Simulated(SimulatedLearner),
    QLinear(FeatureQLearner),
}

impl LearnerBox {
    pub fn kind(&self) -> LearnerKind {
        match self {
            LearnerBox::Expert(_) => LearnerKind::Expert,
            LearnerBox::Simulated(_) => LearnerKind::Simulated,
            LearnerBox::QLinear(_) => LearnerKind::QLinear,
        }
    }

    pub fn as_simulated(&self) -> Option<&SimulatedLearner> {
        match self {
            LearnerBox::Simulated(inner) => Some(inner),
            _ => None,
        }
    }

    pub fn as_simulated_mut(&mut self) -> Option<&mut SimulatedLearner> {
        match self {
            LearnerBox::Simulated(inner) => Some(inner),
            _ => None,
        }
    }

    pub fn as_qlinear(&self) -> Option<&FeatureQLearner> {
        match self {
            LearnerBox::QLinear(inner) => Some(inner),
            _ => None,
        }
    }
}

impl Learner for LearnerBox {
    fn act(
        &self,
        goal: &Goal,
        state: &EnvState,
        legal: &[Action],
        mode: ActMode,
        rng: &mut dyn RngCore,
    ) -> Action {
        match self {
            LearnerBox::Expert(inner) => inner.act(goal, state, legal, mode, rng),
            LearnerBox::QLinear(inner) => inner.act(goal, state, legal, mode, rng),
            LearnerBox::Simulated(_) => {
                unreachable!("simulated learners draw outcomes; they never act in the environment")
            }
        }
    }

    fn learn(&mut self, goal: &Goal, trajectory: &Trajectory) {
        match self {
            LearnerBox::Expert(inner) => inner.learn(goal, trajectory),
            LearnerBox::QLinear(inner) => inner.learn(goal, trajectory),
            LearnerBox::Simulated(_) => {
                unreachable!("simulated learners update inside their outcome draws")
            }
        }
    }

    fn version(&self) -> u64 {
        match self {
            LearnerBox::Expert(inner) => inner.version(),
            LearnerBox::QLinear(inner) => inner.version(),
            LearnerBox::Simulated(inner) => inner.version(),
        }
    }
}
