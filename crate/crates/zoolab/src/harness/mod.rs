//! Experiment protocols: curriculum training runs, estimator benchmarks
//! against a simulated ground truth, held-out generalization reports and
//! goal-space-swap adaptation tests.

pub mod adaptation;
pub mod benchmark;
pub mod generalization;
pub mod run;

use rand_chacha::ChaCha8Rng;

use littlezoo::env::{Episode, Goal, Vocabulary};
use littlezoo::estimators::{AlpEstimator, EvalKey, EvalMeasurement, EvalRequest};
use littlezoo::goalspace::{CategoryLabel, GoalSpace, Split};
use littlezoo::learners::{ActMode, Learner, LearnerBox, Trajectory, TrajectoryStep};
use rand::Rng;

use crate::error::LabError;

pub use adaptation::{adaptation_test, AdaptationConfig, AdaptationResult};
pub use benchmark::{estimator_benchmark, BenchmarkConfig, BenchmarkRecord};
pub use generalization::{generalization_report, GeneralizationReport};
pub use run::{run_training, run_with_captures, Capture, RunOutput};

/// Rolls one episode in the environment with the given act mode,
/// returning the outcome and the recorded trajectory.
pub fn env_rollout(
    learner: &LearnerBox,
    goal: &Goal,
    vocab: &Vocabulary,
    rng: &mut ChaCha8Rng,
    mode: ActMode,
) -> Result<(bool, Trajectory), LabError> {
    let mut episode = Episode::new(goal, vocab)?;
    episode.reset();
    let mut trajectory = Trajectory::default();
    let mut success = false;
    loop {
        let state = episode.state().clone();
        let mut legal = episode.legal_actions();
        if legal.is_empty() {
            // Dead state: every action is a no-op; the learner still has
            // to pick one to burn the remaining budget.
            legal.extend(littlezoo::env::Action::ALL);
        }
        let action = learner.act(goal, &state, &legal, mode, rng);
        let result = episode
            .step(action)
            .map_err(|e| LabError::Invariant(e.to_string()))?;
        success |= result.reward > 0.0;
        trajectory.steps.push(TrajectoryStep {
            state,
            action,
            reward: result.reward,
        });
        if result.done {
            return Ok((success, trajectory));
        }
    }
}

/// One frozen-policy episode: greedy in the environment, or a
/// clock-frozen draw for the simulated learner.
pub fn frozen_outcome(
    learner: &LearnerBox,
    goal: &Goal,
    vocab: &Vocabulary,
    rng: &mut ChaCha8Rng,
) -> Result<bool, LabError> {
    match learner {
        LearnerBox::Simulated(sim) => Ok(sim.draw_frozen(goal.category, rng)),
        other => env_rollout(other, goal, vocab, rng, ActMode::Eval).map(|(success, _)| success),
    }
}

/// One training episode: acts, learns, and returns the binary outcome.
pub fn training_outcome(
    learner: &mut LearnerBox,
    goal: &Goal,
    vocab: &Vocabulary,
    sim_rng: &mut ChaCha8Rng,
    learner_rng: &mut ChaCha8Rng,
) -> Result<bool, LabError> {
    match learner {
        LearnerBox::Simulated(sim) => Ok(sim.draw_training(goal.category, sim_rng)),
        other => {
            let (success, trajectory) =
                env_rollout(other, goal, vocab, learner_rng, ActMode::Train)?;
            other.learn(goal, &trajectory);
            Ok(success)
        }
    }
}

/// Fixed per-category goal samples for success-rate sweeps. Categories
/// smaller than the sample size are sampled with replacement and flagged.
pub fn draw_category_samples(
    space: &GoalSpace,
    split: Split,
    per_category: usize,
    rng: &mut ChaCha8Rng,
) -> ([Vec<u32>; 5], Vec<String>) {
    let mut samples: [Vec<u32>; 5] = Default::default();
    let mut warnings = Vec::new();
    for category in CategoryLabel::ALL {
        let pool = space.ids_by_category(split, category);
        if pool.is_empty() {
            continue;
        }
        let sample = &mut samples[category.index()];
        if pool.len() >= per_category {
            // Partial Fisher-Yates without replacement.
            let mut indices: Vec<usize> = (0..pool.len()).collect();
            for slot in 0..per_category {
                let pick = rng.random_range(slot..indices.len());
                indices.swap(slot, pick);
                sample.push(pool[indices[slot]]);
            }
        } else {
            warnings.push(format!(
                "category {} has {} {} goals; sampling {} with replacement",
                category.as_str(),
                pool.len(),
                split.as_str(),
                per_category,
            ));
            for _ in 0..per_category {
                sample.push(pool[rng.random_range(0..pool.len())]);
            }
        }
    }
    (samples, warnings)
}

/// Serves an estimator's evaluation request with frozen-policy episodes.
/// Returns the measurements and the number of episodes consumed.
pub fn serve_eval_request(
    request: EvalRequest,
    space: &GoalSpace,
    learner: &LearnerBox,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<EvalMeasurement>, u64), LabError> {
    let vocab = space.vocabulary();
    let before = learner.version();
    let mut episodes_used = 0u64;
    let mut measurements = Vec::new();
    match request {
        EvalRequest::PerGoal { episodes_per_goal } => {
            for &goal_id in space.train_ids() {
                let goal = space.goal(goal_id);
                let mut successes = 0;
                for _ in 0..episodes_per_goal {
                    if frozen_outcome(learner, goal, vocab, rng)? {
                        successes += 1;
                    }
                }
                episodes_used += u64::from(episodes_per_goal);
                measurements.push(EvalMeasurement {
                    key: EvalKey::Goal(goal_id),
                    successes,
                    episodes: episodes_per_goal,
                });
            }
        }
        EvalRequest::PerBucket {
            episodes_per_bucket,
        } => {
            for category in CategoryLabel::ALL {
                let pool = space.ids_by_category(Split::Train, category);
                if pool.is_empty() {
                    continue;
                }
                let mut successes = 0;
                for _ in 0..episodes_per_bucket {
                    let goal = space.goal(pool[rng.random_range(0..pool.len())]);
                    if frozen_outcome(learner, goal, vocab, rng)? {
                        successes += 1;
                    }
                }
                episodes_used += u64::from(episodes_per_bucket);
                measurements.push(EvalMeasurement {
                    key: EvalKey::Bucket(category),
                    successes,
                    episodes: episodes_per_bucket,
                });
            }
        }
    }
    if learner.version() != before {
        return Err(LabError::Invariant(
            "estimator evaluation mutated the learner".into(),
        ));
    }
    Ok((measurements, episodes_used))
}

/// Ground-truth per-category competence of a simulated learner; zeros for
/// the impossible category.
pub fn simulated_truth(learner: &LearnerBox) -> Option<[f64; 5]> {
    learner.as_simulated().map(|sim| {
        let mut truth = [0.0; 5];
        for category in CategoryLabel::ALL {
            truth[category.index()] = sim.true_competence(category);
        }
        truth
    })
}

/// Builds the learner for a run configuration. `rng` seeds the q-learner's
/// weight init.
pub fn build_learner(
    config: &crate::config::RunConfig,
    vocab: &Vocabulary,
    rng: &mut ChaCha8Rng,
) -> LearnerBox {
    use littlezoo::learners::{ExpertLearner, FeatureQLearner, LearnerKind};
    match config.learner {
        LearnerKind::Expert => LearnerBox::Expert(ExpertLearner::new()),
        LearnerKind::Simulated => LearnerBox::Simulated(config.simulated.clone()),
        LearnerKind::QLinear => LearnerBox::QLinear(FeatureQLearner::new(
            config.qlinear.clone(),
            vocab.clone(),
            rng,
        )),
    }
}

/// Per-category success rate over a fixed sample with a frozen policy.
pub fn sweep_category_sr(
    learner: &LearnerBox,
    space: &GoalSpace,
    sample: &[u32],
    rng: &mut ChaCha8Rng,
) -> Result<f64, LabError> {
    let vocab = space.vocabulary();
    let mut successes = 0usize;
    for &goal_id in sample {
        if frozen_outcome(learner, space.goal(goal_id), vocab, rng)? {
            successes += 1;
        }
    }
    Ok(successes as f64 / sample.len() as f64)
}

/// Mean estimator competence over a goal sample.
pub fn mean_competence<E: AlpEstimator>(estimator: &E, sample: &[u32]) -> f64 {
    sample.iter().map(|&id| estimator.competence(id)).sum::<f64>() / sample.len() as f64
}
