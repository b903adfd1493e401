//! Goal-space-swap adaptation tests.
//!
//! A base run is regenerated with clones of the learner and estimator
//! captured at the configured swap points. At each point the training
//! goals are replaced with the held-out test goals (re-labelled as the
//! new train split), each estimation method applies its handoff rule, and
//! training continues for a fixed horizon while success-rate sweeps track
//! recovery. Sample efficiency after `kappa` episodes is the trapezoidal
//! integral of `SR(t) - SR(0)` over the sweeps up to `kappa`.

use std::io::Write;
use std::path::Path;

use littlezoo::curriculum::select;
use littlezoo::estimators::{
    AlpEstimator, EstimatorBox, EstimatorKind, OnlineAlp, UniformEstimator,
};
use littlezoo::goalspace::{CategoryLabel, GoalSpace, Split};
use littlezoo::learners::Learner;
use littlezoo::rngs::{stream_rng, Stream};

use crate::config::RunConfig;
use crate::error::LabError;
use crate::metrics::fmt_f64;

use super::run::{run_with_captures, Capture};
use super::{draw_category_samples, sweep_category_sr, training_outcome};

#[derive(Debug, Clone)]
pub struct AdaptationConfig {
    /// Base training run; its goal space must carry a test split.
    pub base: RunConfig,
    /// Episode counts at which the goal space is swapped.
    pub swap_points: Vec<u64>,
    /// Length of each continuation.
    pub continuation_episodes: u64,
    /// Estimation methods to hand off to at each swap point.
    pub methods: Vec<EstimatorKind>,
    /// Sample-efficiency horizons.
    pub kappas: Vec<u64>,
    /// Sweep cadence during continuations.
    pub eval_cadence: u64,
}

impl AdaptationConfig {
    pub fn new(base: RunConfig) -> AdaptationConfig {
        AdaptationConfig {
            base,
            swap_points: vec![50_000, 100_000, 150_000],
            continuation_episodes: 50_000,
            methods: vec![
                EstimatorKind::Magellan,
                EstimatorKind::EkOnline,
                EstimatorKind::Online,
                EstimatorKind::Uniform,
            ],
            kappas: vec![10_000, 20_000, 30_000, 40_000, 50_000],
            eval_cadence: 5_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationResult {
    pub swap_episode: u64,
    pub method: EstimatorKind,
    /// (continuation episode, macro SR over populated categories).
    pub sr_series: Vec<(u64, f64)>,
    /// (kappa, sample efficiency).
    pub sample_efficiency: Vec<(u64, f64)>,
}

pub fn adaptation_test(
    config: &AdaptationConfig,
    space: &GoalSpace,
) -> Result<Vec<AdaptationResult>, LabError> {
    if space.test_ids().is_empty() {
        return Err(LabError::Validation(
            "adaptation tests need a goal space with a test split".into(),
        ));
    }
    let mut base_config = config.base.clone();
    base_config.shadow_ek = config.methods.contains(&EstimatorKind::EkOnline);
    base_config.episodes = config
        .swap_points
        .iter()
        .copied()
        .max()
        .unwrap_or(base_config.episodes);
    let (_, captures) = run_with_captures(&base_config, space, &config.swap_points)?;
    if captures.len() != config.swap_points.len() {
        return Err(LabError::Invariant(format!(
            "expected {} captures, got {}",
            config.swap_points.len(),
            captures.len()
        )));
    }
    let swapped = space.swapped_to_test();
    let mut results = Vec::new();
    for capture in &captures {
        for (method_index, method) in config.methods.iter().enumerate() {
            let result = continuation(
                config,
                capture,
                *method,
                method_index as u64,
                &swapped,
            )?;
            results.push(result);
        }
    }
    Ok(results)
}

/// Applies the per-method handoff rule at a swap point.
fn handoff(
    capture: &Capture,
    method: EstimatorKind,
    config: &AdaptationConfig,
    swapped: &GoalSpace,
    rng: rand_chacha::ChaCha8Rng,
) -> Result<EstimatorBox, LabError> {
    Ok(match method {
        EstimatorKind::Magellan => {
            if capture.estimator.kind() != EstimatorKind::Magellan {
                return Err(LabError::Config(
                    "handing off to the learned regressor requires a base run that trained one"
                        .into(),
                ));
            }
            // Keeps its weights; new goals are priced by generalization.
            let mut estimator = capture.estimator.clone();
            estimator.swap_goal_space(swapped);
            estimator
        }
        EstimatorKind::EkOnline => {
            // Warm start from the shadow tracker that followed the base
            // run's outcomes.
            let shadow = capture.shadow.clone().ok_or_else(|| {
                LabError::Config(
                    "ek-online handoff needs the base run to track a shadow estimator".into(),
                )
            })?;
            let mut estimator = EstimatorBox::EkOnline(shadow);
            estimator.swap_goal_space(swapped);
            estimator
        }
        EstimatorKind::Online => EstimatorBox::Online(OnlineAlp::new(
            config.base.estimator_params.online.clone(),
            swapped,
        )),
        EstimatorKind::Uniform => EstimatorBox::Uniform(UniformEstimator),
        other => EstimatorBox::build(other, &config.base.estimator_params, swapped, rng),
    })
}

fn continuation(
    config: &AdaptationConfig,
    capture: &Capture,
    method: EstimatorKind,
    method_index: u64,
    swapped: &GoalSpace,
) -> Result<AdaptationResult, LabError> {
    // Independent deterministic streams per (swap point, method).
    let master = config
        .base
        .seed
        .wrapping_mul(1_000_003)
        .wrapping_add(capture.episode)
        .wrapping_mul(31)
        .wrapping_add(method_index);
    let mut selector_rng = stream_rng(master, Stream::Selector);
    let mut learner_rng = stream_rng(master, Stream::Learner);
    let mut sim_rng = stream_rng(master, Stream::Simulation);
    let mut sr_rng = stream_rng(master, Stream::SrEval);
    let mut est_eval_rng = stream_rng(master, Stream::EstimatorEval);

    let mut learner = capture.learner.clone();
    let mut estimator = handoff(
        capture,
        method,
        config,
        swapped,
        stream_rng(master, Stream::Estimator),
    )?;
    let mut selector = config.base.selector.clone();
    selector.mode = method.selector_mode();

    let (samples, _warnings) = draw_category_samples(
        swapped,
        Split::Train,
        config.base.eval_goals_per_category,
        &mut sr_rng,
    );
    let vocab = swapped.vocabulary().clone();

    let mut sr_series = Vec::new();
    let sweep = |t: u64,
                     learner: &littlezoo::learners::LearnerBox,
                     sr_rng: &mut rand_chacha::ChaCha8Rng,
                     sr_series: &mut Vec<(u64, f64)>|
     -> Result<(), LabError> {
        let version = learner.version();
        let mut total = 0.0;
        let mut populated = 0;
        for category in CategoryLabel::ALL {
            let sample = &samples[category.index()];
            if sample.is_empty() {
                continue;
            }
            total += sweep_category_sr(learner, swapped, sample, sr_rng)?;
            populated += 1;
        }
        if learner.version() != version {
            return Err(LabError::Invariant(
                "adaptation sweep mutated the learner".into(),
            ));
        }
        sr_series.push((t, total / populated.max(1) as f64));
        Ok(())
    };

    for t in 0..config.continuation_episodes {
        if t % config.eval_cadence == 0 {
            sweep(t, &learner, &mut sr_rng, &mut sr_series)?;
        }
        // The epsilon schedule continues from the swap point; by then it
        // normally sits at its floor.
        let event = select(
            &selector,
            &estimator,
            swapped,
            capture.episode + t,
            &mut selector_rng,
        );
        let goal = swapped.goal(event.goal_id);
        let outcome =
            training_outcome(&mut learner, goal, &vocab, &mut sim_rng, &mut learner_rng)?;
        estimator.observe(event.goal_id, outcome, t);
        if let Some(request) = estimator.needs_evaluation(t + 1) {
            let (measurements, _episodes) =
                super::serve_eval_request(request, swapped, &learner, &mut est_eval_rng)?;
            estimator.ingest_evaluation(&measurements);
        }
    }
    sweep(
        config.continuation_episodes,
        &learner,
        &mut sr_rng,
        &mut sr_series,
    )?;

    let base_sr = sr_series.first().map(|(_, sr)| *sr).unwrap_or(0.0);
    let sample_efficiency = config
        .kappas
        .iter()
        .map(|&kappa| (kappa, trapezoid_gain(&sr_series, base_sr, kappa)))
        .collect();
    Ok(AdaptationResult {
        swap_episode: capture.episode,
        method,
        sr_series,
        sample_efficiency,
    })
}

/// Trapezoidal integral of `sr(t) - base` over sweep points `t <= kappa`.
fn trapezoid_gain(series: &[(u64, f64)], base: f64, kappa: u64) -> f64 {
    let mut integral = 0.0;
    for window in series.windows(2) {
        let (t0, sr0) = window[0];
        let (t1, sr1) = window[1];
        if t1 > kappa {
            break;
        }
        integral += 0.5 * ((sr0 - base) + (sr1 - base)) * (t1 - t0) as f64;
    }
    integral
}

/// Tidy CSV of adaptation outcomes.
pub fn write_adaptation_csv(results: &[AdaptationResult], path: &Path) -> Result<(), LabError> {
    let mut writer = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(writer, "swap_episode,method,kappa,sample_efficiency")?;
    for result in results {
        for (kappa, value) in &result.sample_efficiency {
            writeln!(
                writer,
                "{},{},{},{}",
                result.swap_episode,
                result.method.as_str(),
                kappa,
                fmt_f64(*value),
            )?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Tidy CSV of the recovery curves.
pub fn write_adaptation_sr_csv(
    results: &[AdaptationResult],
    path: &Path,
) -> Result<(), LabError> {
    let mut writer = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(writer, "swap_episode,method,episode,sr")?;
    for result in results {
        for (episode, sr) in &result.sr_series {
            writeln!(
                writer,
                "{},{},{},{}",
                result.swap_episode,
                result.method.as_str(),
                episode,
                fmt_f64(*sr),
            )?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_sr_yields_zero_sample_efficiency() {
        let series: Vec<(u64, f64)> = (0..=10).map(|i| (i * 5_000, 0.6)).collect();
        assert_eq!(trapezoid_gain(&series, 0.6, 50_000), 0.0);
    }

    #[test]
    fn improvement_integrates_positively_and_decline_negatively() {
        let rising = vec![(0, 0.0), (5_000, 0.5), (10_000, 1.0)];
        assert!(trapezoid_gain(&rising, 0.0, 10_000) > 0.0);
        let falling = vec![(0, 1.0), (5_000, 0.5), (10_000, 0.0)];
        assert!(trapezoid_gain(&falling, 1.0, 10_000) < 0.0);
        // Horizons cut the integral at kappa.
        assert_eq!(
            trapezoid_gain(&rising, 0.0, 5_000),
            0.5 * 0.5 * 5_000.0
        );
    }
}
