//! The curriculum training loop.
//!
//! Per episode: the selector draws a goal from the estimator's ALP, the
//! learner practices it (or the simulated learner draws an outcome), the
//! estimator observes the result, and any estimator-requested evaluation
//! sweeps are served with a frozen policy. Success-rate sweeps over fixed
//! per-category samples run every `eval_cadence` episodes, plus a final
//! one. Every episode is accounted to exactly one counter, so
//! `training + sr_eval + estimator_eval` is the total number of episodes
//! the environment (or the simulator) ran.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use littlezoo::curriculum::select;
use littlezoo::estimators::{AlpEstimator, EkOnlineAlp, EstimatorBox};
use littlezoo::goalspace::{CategoryLabel, GoalSpace, Split};
use littlezoo::learners::{Learner, LearnerBox};
use littlezoo::rngs::{stream_rng, Stream};

use crate::config::RunConfig;
use crate::error::LabError;
use crate::metrics::{
    export_latents, mastery_report, write_mastery, write_run_summary, EpisodeCounters, EvalRow,
    EvalsCsv, RunPaths, RunSummary, TrainingCsv, TrainingRow,
};
use crate::snapshot_file::{learner_snapshot, save_estimator, save_snapshot};

use super::{
    build_learner, draw_category_samples, mean_competence, serve_eval_request, simulated_truth,
    sweep_category_sr, training_outcome,
};

/// Everything a finished run reports back to callers (files are written
/// only when the config names an output directory).
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub evals: Vec<EvalRow>,
    pub test_evals: Vec<EvalRow>,
    pub mastery: BTreeMap<String, Option<u64>>,
    pub counters: EpisodeCounters,
    pub warnings: Vec<String>,
}

/// A cloned (learner, estimator) pair captured mid-run, used by the
/// adaptation protocol to fork continuations at goal-space swap points.
#[derive(Debug, Clone)]
pub struct Capture {
    pub episode: u64,
    pub learner: LearnerBox,
    pub estimator: EstimatorBox,
    pub shadow: Option<EkOnlineAlp>,
}

pub fn run_training(config: &RunConfig, space: &GoalSpace) -> Result<RunOutput, LabError> {
    run_with_captures(config, space, &[]).map(|(output, _)| output)
}

pub fn run_with_captures(
    config: &RunConfig,
    space: &GoalSpace,
    capture_at: &[u64],
) -> Result<(RunOutput, Vec<Capture>), LabError> {
    if space.train_ids().is_empty() {
        return Err(LabError::Validation("goal space has no train goals".into()));
    }
    if config.record_test_evals && space.test_ids().is_empty() {
        return Err(LabError::Validation(
            "held-out evaluation requested but the space has no test split".into(),
        ));
    }
    let vocab = space.vocabulary().clone();
    let mut selector_rng = stream_rng(config.seed, Stream::Selector);
    let mut learner_rng = stream_rng(config.seed, Stream::Learner);
    let mut sim_rng = stream_rng(config.seed, Stream::Simulation);
    let mut sr_rng = stream_rng(config.seed, Stream::SrEval);
    let mut est_eval_rng = stream_rng(config.seed, Stream::EstimatorEval);

    let mut learner = build_learner(config, &vocab, &mut learner_rng);
    let mut estimator = EstimatorBox::build(
        config.estimator,
        &config.estimator_params,
        space,
        stream_rng(config.seed, Stream::Estimator),
    );
    let mut shadow = config
        .shadow_ek
        .then(|| EkOnlineAlp::new(config.estimator_params.online.clone(), space));

    let (train_samples, mut warnings) = draw_category_samples(
        space,
        Split::Train,
        config.eval_goals_per_category,
        &mut sr_rng,
    );
    let test_samples = if config.record_test_evals {
        let (samples, test_warnings) = draw_category_samples(
            space,
            Split::Test,
            config.eval_goals_per_category,
            &mut sr_rng,
        );
        warnings.extend(test_warnings);
        Some(samples)
    } else {
        None
    };
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }

    let paths = config.out_dir.as_ref().map(|dir| RunPaths::new(dir));
    let mut training_csv = None;
    let mut evals_csv = None;
    let mut test_evals_csv = None;
    if let Some(paths) = &paths {
        std::fs::create_dir_all(&paths.dir)?;
        std::fs::create_dir_all(paths.checkpoints())?;
        training_csv = Some(TrainingCsv::create(&paths.training_csv())?);
        evals_csv = Some(EvalsCsv::create(&paths.evals_csv())?);
        if config.record_test_evals {
            test_evals_csv = Some(EvalsCsv::create(&paths.test_evals_csv())?);
        }
    }

    let mut counters = EpisodeCounters::default();
    let mut evals: Vec<EvalRow> = Vec::new();
    let mut test_evals: Vec<EvalRow> = Vec::new();
    let mut captures = Vec::new();

    let sweep = |episode: u64,
                     learner: &LearnerBox,
                     estimator: &EstimatorBox,
                     counters: &mut EpisodeCounters,
                     sr_rng: &mut ChaCha8Rng,
                     evals: &mut Vec<EvalRow>,
                     test_evals: &mut Vec<EvalRow>,
                     evals_csv: &mut Option<EvalsCsv>,
                     test_evals_csv: &mut Option<EvalsCsv>|
     -> Result<(), LabError> {
        let version_before = learner.version();
        let truth = simulated_truth(learner);
        for (split_samples, rows, csv) in [
            (Some(&train_samples), &mut *evals, &mut *evals_csv),
            (test_samples.as_ref(), &mut *test_evals, &mut *test_evals_csv),
        ]
        .into_iter()
        .filter_map(|(samples, rows, csv)| samples.map(|s| (s, rows, csv)))
        {
            for category in CategoryLabel::ALL {
                let sample = &split_samples[category.index()];
                if sample.is_empty() {
                    continue;
                }
                let sr = sweep_category_sr(learner, space, sample, sr_rng)?;
                counters.sr_eval += sample.len() as u64;
                let row = EvalRow {
                    episode,
                    category,
                    sr,
                    n_goals: sample.len(),
                    estimator_competence: mean_competence(estimator, sample),
                    reference_competence: truth.map(|t| t[category.index()]),
                    cumulative_cost: estimator.evaluation_cost(),
                };
                if let Some(csv) = csv {
                    csv.append(&row)?;
                }
                rows.push(row);
            }
        }
        if learner.version() != version_before {
            return Err(LabError::Invariant(
                "success-rate sweep mutated the learner".into(),
            ));
        }
        Ok(())
    };

    for episode in 0..config.episodes {
        if episode % config.eval_cadence == 0 {
            sweep(
                episode,
                &learner,
                &estimator,
                &mut counters,
                &mut sr_rng,
                &mut evals,
                &mut test_evals,
                &mut evals_csv,
                &mut test_evals_csv,
            )?;
        }
        let event = select(&config.selector, &estimator, space, episode, &mut selector_rng);
        let goal = space.goal(event.goal_id);
        let outcome =
            training_outcome(&mut learner, goal, &vocab, &mut sim_rng, &mut learner_rng)?;
        counters.training += 1;
        if let Some(csv) = &mut training_csv {
            csv.append(&TrainingRow {
                episode,
                goal_id: event.goal_id,
                category: goal.category,
                outcome,
                alp_at_selection: event.chosen_alp,
                epsilon: event.epsilon,
                exploratory: event.exploratory,
            })?;
        }
        estimator.observe(event.goal_id, outcome, episode);
        if let Some(shadow) = &mut shadow {
            shadow.observe(event.goal_id, outcome, episode);
        }
        let completed = episode + 1;
        if let Some(request) = estimator.needs_evaluation(completed) {
            let (measurements, episodes_used) =
                serve_eval_request(request, space, &learner, &mut est_eval_rng)?;
            counters.estimator_eval += episodes_used;
            estimator.ingest_evaluation(&measurements);
        }
        if capture_at.contains(&completed) {
            captures.push(Capture {
                episode: completed,
                learner: learner.clone(),
                estimator: estimator.clone(),
                shadow: shadow.clone(),
            });
        }
    }
    sweep(
        config.episodes,
        &learner,
        &estimator,
        &mut counters,
        &mut sr_rng,
        &mut evals,
        &mut test_evals,
        &mut evals_csv,
        &mut test_evals_csv,
    )?;

    // Accounting identity: estimator-serving episodes counted here must
    // equal the cost the estimator reports.
    if counters.estimator_eval != estimator.evaluation_cost() {
        return Err(LabError::Invariant(format!(
            "evaluation accounting mismatch: harness served {} episodes, estimator reports {}",
            counters.estimator_eval,
            estimator.evaluation_cost()
        )));
    }

    let mastery = mastery_report(&evals);
    if let Some(paths) = &paths {
        if let Some(csv) = training_csv {
            csv.finish()?;
        }
        if let Some(csv) = evals_csv {
            csv.finish()?;
        }
        if let Some(csv) = test_evals_csv {
            csv.finish()?;
        }
        write_mastery(&mastery, &paths.mastery_json())?;
        if let EstimatorBox::Magellan(magellan) = &estimator {
            export_latents(magellan, space, &paths.latents_csv())?;
        }
        save_snapshot(
            &learner_snapshot(&learner),
            &paths.checkpoints().join("learner.lzsn"),
        )?;
        save_estimator(&estimator, &paths.checkpoints().join("estimator.lzes"))?;
        write_run_summary(
            &RunSummary {
                seed: config.seed,
                episodes: config.episodes,
                counters,
                total_episodes: counters.total(),
                estimator_reported_cost: estimator.evaluation_cost(),
                warnings: warnings.clone(),
            },
            &paths.run_json(),
        )?;
    }
    Ok((
        RunOutput {
            evals,
            test_evals,
            mastery,
            counters,
            warnings,
        },
        captures,
    ))
}
