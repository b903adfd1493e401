//! Competence / absolute-learning-progress estimation strategies.
//!
//! Six strategies sit behind [`AlpEstimator`]: a per-goal moving-average
//! bandit utility, online buffers per goal or per expert bucket,
//! evaluation sweeps per goal or per bucket, a learned goal-conditioned
//! competence regressor ([`magellan::MagellanEstimator`]) and a trivial
//! all-zero estimator for uniform baselines. Online strategies and the
//! learned regressor never spend evaluation episodes; evaluation-based
//! strategies surface their appetite through [`AlpEstimator::needs_evaluation`]
//! and account every episode they consume.

pub mod eval_based;
pub mod magellan;
pub mod moving_average;
pub mod online;

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::curriculum::SelectorMode;
use crate::goalspace::{CategoryLabel, GoalSpace};

pub use eval_based::{EkEvalAlp, EvalAlp, EvalConfig};
pub use magellan::{MagellanCheckpoint, MagellanConfig, MagellanEstimator};
pub use moving_average::{MbConfig, MbEstimator};
pub use online::{EkOnlineAlp, OnlineAlp, OnlineConfig};

/// Index of a goal inside its bound [`GoalSpace`].
pub type GoalId = u32;

/// What an evaluation-based estimator wants the harness to run with a
/// frozen policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalRequest {
    /// `episodes_per_goal` frozen episodes on every train goal.
    PerGoal { episodes_per_goal: u32 },
    /// `episodes_per_bucket` frozen episodes on goals drawn uniformly from
    /// each category bucket.
    PerBucket { episodes_per_bucket: u32 },
}

/// Key of one evaluation measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalKey {
    Goal(GoalId),
    Bucket(CategoryLabel),
}

/// Aggregated result of frozen-policy episodes for one key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalMeasurement {
    pub key: EvalKey,
    pub successes: u32,
    pub episodes: u32,
}

/// Uniform interface over the estimation strategies.
///
/// `competence` and `alp` are read-only queries in `[0, 1]`; they may be
/// batched freely but must not interleave with `observe`.
pub trait AlpEstimator {
    /// Consumes one (goal, outcome) observation. `episode_index` counts
    /// training episodes from 0.
    fn observe(&mut self, goal: GoalId, success: bool, episode_index: u64);

    /// Estimated success probability for `goal`.
    fn competence(&self, goal: GoalId) -> f64;

    /// Estimated absolute learning progress for `goal`.
    fn alp(&self, goal: GoalId) -> f64;

    /// Evaluation sweep wanted after `completed_episodes` episodes, if any.
    fn needs_evaluation(&self, _completed_episodes: u64) -> Option<EvalRequest> {
        None
    }

    /// Feeds back the measurements of a sweep this estimator requested.
    fn ingest_evaluation(&mut self, _results: &[EvalMeasurement]) {}

    /// Episodes spent solely on evaluation so far.
    fn evaluation_cost(&self) -> u64 {
        0
    }

    /// Rebinds the estimator to a replacement goal space, applying its
    /// strategy-specific handoff rule.
    fn swap_goal_space(&mut self, space: &GoalSpace);
}

/// The selectable estimator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    MovingAverage,
    Online,
    Eval,
    EkOnline,
    EkEval,
    Magellan,
    Uniform,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 7] = [
        EstimatorKind::MovingAverage,
        EstimatorKind::Online,
        EstimatorKind::Eval,
        EstimatorKind::EkOnline,
        EstimatorKind::EkEval,
        EstimatorKind::Magellan,
        EstimatorKind::Uniform,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::MovingAverage => "mb",
            EstimatorKind::Online => "online",
            EstimatorKind::Eval => "eval",
            EstimatorKind::EkOnline => "ek-online",
            EstimatorKind::EkEval => "ek-eval",
            EstimatorKind::Magellan => "magellan",
            EstimatorKind::Uniform => "uniform",
        }
    }

    pub fn from_str(s: &str) -> Option<EstimatorKind> {
        EstimatorKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// How the goal selector should consume this estimator's ALP.
    pub fn selector_mode(self) -> SelectorMode {
        match self {
            EstimatorKind::EkOnline | EstimatorKind::EkEval => SelectorMode::PerBucket,
            EstimatorKind::Uniform => SelectorMode::Uniform,
            _ => SelectorMode::PerGoal,
        }
    }
}

/// Per-kind estimator parameters with defaults matching the method
/// hyperparameter tables.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorParams {
    pub moving_average: MbConfig,
    pub online: OnlineConfig,
    pub eval: EvalConfig,
    pub ek_eval: EvalConfig,
    pub magellan: MagellanConfig,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            moving_average: MbConfig::default(),
            online: OnlineConfig::default(),
            eval: EvalConfig {
                frequency: 1000,
                episodes_per_key: 1,
            },
            ek_eval: EvalConfig {
                frequency: 1000,
                episodes_per_key: 2048,
            },
            magellan: MagellanConfig::default(),
        }
    }
}

/// Estimator that never learns anything; the uniform-selection baseline.
#[derive(Debug, Clone, Default)]
pub struct UniformEstimator;

impl AlpEstimator for UniformEstimator {
    fn observe(&mut self, _goal: GoalId, _success: bool, _episode_index: u64) {}

    fn competence(&self, _goal: GoalId) -> f64 {
        0.0
    }

    fn alp(&self, _goal: GoalId) -> f64 {
        0.0
    }

    fn swap_goal_space(&mut self, _space: &GoalSpace) {}
}

/// Concrete estimator dispatch. An enum rather than a trait object so runs
/// can be forked (cloned) at goal-space swap points.
#[derive(Debug, Clone)]
pub enum EstimatorBox {
    MovingAverage(MbEstimator),
    Online(OnlineAlp),
    Eval(EvalAlp),
    EkOnline(EkOnlineAlp),
    EkEval(EkEvalAlp),
    Magellan(MagellanEstimator),
    Uniform(UniformEstimator),
}

impl EstimatorBox {
    /// Builds an estimator of `kind` bound to `space`. `rng` seeds
    /// internal randomness (network init, batch sampling).
    pub fn build(
        kind: EstimatorKind,
        params: &EstimatorParams,
        space: &GoalSpace,
        rng: ChaCha8Rng,
    ) -> EstimatorBox {
        match kind {
            EstimatorKind::MovingAverage => {
                EstimatorBox::MovingAverage(MbEstimator::new(params.moving_average.clone(), space))
            }
            EstimatorKind::Online => {
                EstimatorBox::Online(OnlineAlp::new(params.online.clone(), space))
            }
            EstimatorKind::Eval => EstimatorBox::Eval(EvalAlp::new(params.eval.clone(), space)),
            EstimatorKind::EkOnline => {
                EstimatorBox::EkOnline(EkOnlineAlp::new(params.online.clone(), space))
            }
            EstimatorKind::EkEval => {
                EstimatorBox::EkEval(EkEvalAlp::new(params.ek_eval.clone(), space))
            }
            EstimatorKind::Magellan => {
                EstimatorBox::Magellan(MagellanEstimator::new(params.magellan.clone(), space, rng))
            }
            EstimatorKind::Uniform => EstimatorBox::Uniform(UniformEstimator),
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        match self {
            EstimatorBox::MovingAverage(_) => EstimatorKind::MovingAverage,
            EstimatorBox::Online(_) => EstimatorKind::Online,
            EstimatorBox::Eval(_) => EstimatorKind::Eval,
            EstimatorBox::EkOnline(_) => EstimatorKind::EkOnline,
            EstimatorBox::EkEval(_) => EstimatorKind::EkEval,
            EstimatorBox::Magellan(_) => EstimatorKind::Magellan,
            EstimatorBox::Uniform(_) => EstimatorKind::Uniform,
        }
    }

    pub fn as_magellan(&self) -> Option<&MagellanEstimator> {
        match self {
            EstimatorBox::Magellan(inner) => Some(inner),
            _ => None,
        }
    }
}

macro_rules! delegate {
    ($self:expr, $inner:ident => $body:expr) => {
        match $self {
            EstimatorBox::MovingAverage($inner) => $body,
            EstimatorBox::Online($inner) => $body,
            EstimatorBox::Eval($inner) => $body,
            EstimatorBox::EkOnline($inner) => $body,
            EstimatorBox::EkEval($inner) => $body,
            EstimatorBox::Magellan($inner) => $body,
            EstimatorBox::Uniform($inner) => $body,
        }
    };
}

impl AlpEstimator for EstimatorBox {
    fn observe(&mut self, goal: GoalId, success: bool, episode_index: u64) {
        delegate!(self, inner => inner.observe(goal, success, episode_index))
    }

    fn competence(&self, goal: GoalId) -> f64 {
        delegate!(self, inner => inner.competence(goal))
    }

    fn alp(&self, goal: GoalId) -> f64 {
        delegate!(self, inner => inner.alp(goal))
    }

    fn needs_evaluation(&self, completed_episodes: u64) -> Option<EvalRequest> {
        delegate!(self, inner => inner.needs_evaluation(completed_episodes))
    }

    fn ingest_evaluation(&mut self, results: &[EvalMeasurement]) {
        delegate!(self, inner => inner.ingest_evaluation(results))
    }

    fn evaluation_cost(&self) -> u64 {
        delegate!(self, inner => inner.evaluation_cost())
    }

    fn swap_goal_space(&mut self, space: &GoalSpace) {
        delegate!(self, inner => inner.swap_goal_space(space))
    }
}

/// Per-category absolute error of an estimator against reference
/// competence values, plus the macro average over populated categories.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryErrors {
    /// `None` for categories with no goals in the measured split.
    pub per_category: [Option<f64>; 5],
    pub macro_average: f64,
}

/// |mean estimator competence - reference| per category over the goals of
/// `split`.
pub fn competence_error(
    estimator: &impl AlpEstimator,
    space: &GoalSpace,
    split: crate::goalspace::Split,
    reference: &[f64; 5],
) -> CategoryErrors {
    let mut per_category = [None; 5];
    let mut total = 0.0;
    let mut populated = 0;
    for category in CategoryLabel::ALL {
        let ids = space.ids_by_category(split, category);
        if ids.is_empty() {
            continue;
        }
        let mean: f64 =
            ids.iter().map(|&id| estimator.competence(id)).sum::<f64>() / ids.len() as f64;
        let error = crate::maths::abs(mean - reference[category.index()]);
        per_category[category.index()] = Some(error);
        total += error;
        populated += 1;
    }
    CategoryErrors {
        per_category,
        macro_average: if populated == 0 {
            0.0
        } else {
            total / populated as f64
        },
    }
}

/// Helper shared by bucketed estimators: goal id -> category index map.
pub(crate) fn category_map(space: &GoalSpace) -> Vec<u8> {
    space
        .goals()
        .iter()
        .map(|g| g.category.index() as u8)
        .collect()
}

/// Helper shared by buffer estimators: `(competence, alp)` from a ring of
/// outcomes split into an oldest and a newest half (the middle element of
/// an odd-length buffer belongs to neither half).
pub(crate) fn halves_summary(buffer: &alloc::collections::VecDeque<bool>) -> (f64, f64) {
    let len = buffer.len();
    if len == 0 {
        return (0.0, 0.0);
    }
    let half = len / 2;
    if half == 0 {
        return (f64::from(u8::from(buffer[0])), 0.0);
    }
    let mean = |range: core::ops::Range<usize>| -> f64 {
        let span = range.len();
        range.map(|i| f64::from(u8::from(buffer[i]))).sum::<f64>() / span as f64
    };
    let past = mean(0..half);
    let current = mean(len - half..len);
    (current, crate::maths::abs(current - past))
}

/// Human-readable estimator list for CLIs and error messages.
pub fn kind_names() -> Vec<String> {
    EstimatorKind::ALL
        .iter()
        .map(|k| String::from(k.as_str()))
        .collect()
}
