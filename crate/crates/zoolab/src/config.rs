//! Experiment configuration: a typed TOML document plus the resolved
//! run configuration the harness consumes.
//!
//! CLI flags override file values; the effective document is echoed into
//! the run directory so a run can be reproduced from its own artifacts.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use littlezoo::curriculum::{SelectorConfig, SelectorMode};
use littlezoo::estimators::{EstimatorKind, EstimatorParams};
use littlezoo::goalspace::{CategoryLabel, CategoryProportions, GenerationConfig};
use littlezoo::learners::{Gate, LearnerKind, LogisticSchedule, QLinearConfig, SimulatedLearner};
use littlezoo::tinynet::AdamConfig;

use crate::error::LabError;

/// The TOML configuration document. Every field is optional; defaults are
/// the method hyperparameters baked into the library.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub run: Option<RunSection>,
    pub generation: Option<GenerationSection>,
    pub selector: Option<SelectorSection>,
    pub magellan: Option<MagellanSection>,
    pub online: Option<OnlineSection>,
    pub eval: Option<EvalSection>,
    pub ek_eval: Option<EvalSection>,
    pub mb: Option<MbSection>,
    pub qlinear: Option<QLinearSection>,
    pub simulated: Option<SimulatedSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub goal_space: Option<PathBuf>,
    pub estimator: Option<String>,
    pub learner: Option<String>,
    pub episodes: Option<u64>,
    pub eval_cadence: Option<u64>,
    pub eval_goals_per_category: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub record_test_evals: Option<bool>,
    pub shadow_ek: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GenerationSection {
    pub total_goals: Option<usize>,
    pub test_goals: Option<usize>,
    pub rng_seed: Option<u64>,
    pub impossible: Option<f64>,
    pub grasp: Option<f64>,
    pub grow_plant: Option<f64>,
    pub grow_herbivore: Option<f64>,
    pub grow_carnivore: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SelectorSection {
    pub epsilon_start: Option<f64>,
    pub epsilon_end: Option<f64>,
    pub decay_horizon: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MagellanSection {
    pub embed_dim: Option<usize>,
    pub hidden_units: Option<usize>,
    pub update_period: Option<u64>,
    pub batches_per_update: Option<usize>,
    pub batch_size: Option<usize>,
    pub outcome_capacity: Option<usize>,
    pub snapshot_capacity: Option<usize>,
    pub learning_rate: Option<f64>,
    pub init_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OnlineSection {
    pub buffer_capacity: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub frequency: Option<u64>,
    pub episodes_per_key: Option<u32>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MbSection {
    pub history_capacity: Option<usize>,
    pub smoothing: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QLinearSection {
    pub learning_rate: Option<f64>,
    pub behavior_epsilon_start: Option<f64>,
    pub behavior_epsilon_end: Option<f64>,
    pub behavior_decay_episodes: Option<u64>,
    pub exploration_bonus: Option<f64>,
    pub init_weight_scale: Option<f64>,
    pub discount: Option<f64>,
    pub n_step: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulatedSection {
    pub grasp: Option<ScheduleSection>,
    pub grow_plant: Option<ScheduleSection>,
    pub grow_herbivore: Option<ScheduleSection>,
    pub grow_carnivore: Option<ScheduleSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub offset: Option<f64>,
    pub tau: Option<f64>,
    pub asymptote: Option<f64>,
    /// Prerequisite competence that opens this schedule's gate; the
    /// prerequisite category is the previous one in difficulty order.
    pub gate_threshold: Option<f64>,
}

impl ConfigFile {
    pub fn from_path(path: &Path) -> Result<ConfigFile, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String, LabError> {
        toml::to_string_pretty(self).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Resolved generation config (used by `generate-goals` and by runs
    /// that generate their space inline).
    pub fn generation_config(&self) -> GenerationConfig {
        let section = self.generation.clone().unwrap_or_default();
        let defaults = CategoryProportions::default();
        GenerationConfig {
            total_goals: section.total_goals.unwrap_or(25_000),
            test_goals: section.test_goals.unwrap_or(5_000),
            proportions: CategoryProportions {
                impossible: section.impossible.unwrap_or(defaults.impossible),
                grasp: section.grasp.unwrap_or(defaults.grasp),
                grow_plant: section.grow_plant.unwrap_or(defaults.grow_plant),
                grow_herbivore: section.grow_herbivore.unwrap_or(defaults.grow_herbivore),
                grow_carnivore: section.grow_carnivore.unwrap_or(defaults.grow_carnivore),
            },
            rng_seed: section.rng_seed.unwrap_or(0),
        }
    }

    pub fn estimator_params(&self) -> EstimatorParams {
        let mut params = EstimatorParams::default();
        if let Some(section) = &self.magellan {
            let d = &mut params.magellan;
            apply(&mut d.embed_dim, section.embed_dim);
            apply(&mut d.hidden_units, section.hidden_units);
            apply(&mut d.update_period, section.update_period);
            apply(&mut d.batches_per_update, section.batches_per_update);
            apply(&mut d.batch_size, section.batch_size);
            apply(&mut d.outcome_capacity, section.outcome_capacity);
            apply(&mut d.snapshot_capacity, section.snapshot_capacity);
            apply(&mut d.init_scale, section.init_scale);
            if let Some(lr) = section.learning_rate {
                d.adam = AdamConfig {
                    learning_rate: lr,
                    ..d.adam
                };
            }
        }
        if let Some(section) = &self.online {
            apply(&mut params.online.buffer_capacity, section.buffer_capacity);
        }
        if let Some(section) = &self.eval {
            apply(&mut params.eval.frequency, section.frequency);
            apply(&mut params.eval.episodes_per_key, section.episodes_per_key);
        }
        if let Some(section) = &self.ek_eval {
            apply(&mut params.ek_eval.frequency, section.frequency);
            apply(
                &mut params.ek_eval.episodes_per_key,
                section.episodes_per_key,
            );
        }
        if let Some(section) = &self.mb {
            apply(
                &mut params.moving_average.history_capacity,
                section.history_capacity,
            );
            apply(&mut params.moving_average.smoothing, section.smoothing);
        }
        params
    }

    pub fn qlinear_config(&self) -> QLinearConfig {
        let mut config = QLinearConfig::default();
        if let Some(section) = &self.qlinear {
            apply(&mut config.learning_rate, section.learning_rate);
            apply(
                &mut config.behavior_epsilon_start,
                section.behavior_epsilon_start,
            );
            apply(
                &mut config.behavior_epsilon_end,
                section.behavior_epsilon_end,
            );
            apply(
                &mut config.behavior_decay_episodes,
                section.behavior_decay_episodes,
            );
            apply(&mut config.exploration_bonus, section.exploration_bonus);
            apply(&mut config.init_weight_scale, section.init_weight_scale);
            apply(&mut config.discount, section.discount);
            apply(&mut config.n_step, section.n_step);
        }
        config
    }

    pub fn simulated_learner(&self) -> SimulatedLearner {
        let Some(section) = &self.simulated else {
            return SimulatedLearner::default_staircase();
        };
        let mut schedules = default_schedule_table();
        let categories = [
            (CategoryLabel::Grasp, &section.grasp, None),
            (
                CategoryLabel::GrowPlant,
                &section.grow_plant,
                Some(CategoryLabel::Grasp),
            ),
            (
                CategoryLabel::GrowHerbivore,
                &section.grow_herbivore,
                Some(CategoryLabel::GrowPlant),
            ),
            (
                CategoryLabel::GrowCarnivore,
                &section.grow_carnivore,
                Some(CategoryLabel::GrowHerbivore),
            ),
        ];
        for (category, override_section, prerequisite) in categories {
            let schedule = schedules[category.index()]
                .as_mut()
                .expect("feasible categories have schedules");
            if let Some(over) = override_section {
                apply(&mut schedule.offset, over.offset);
                apply(&mut schedule.tau, over.tau);
                apply(&mut schedule.asymptote, over.asymptote);
                if let Some(threshold) = over.gate_threshold {
                    schedule.gate = prerequisite.map(|p| Gate {
                        prerequisite: p,
                        threshold,
                    });
                }
            }
        }
        SimulatedLearner::new(schedules)
    }

    pub fn selector_overrides(&self, mode: SelectorMode, update_period: u64) -> SelectorConfig {
        let mut config = SelectorConfig::new(mode, update_period);
        if let Some(section) = &self.selector {
            apply(&mut config.epsilon_start, section.epsilon_start);
            apply(&mut config.epsilon_end, section.epsilon_end);
            apply(&mut config.decay_horizon, section.decay_horizon);
        }
        config
    }
}

fn default_schedule_table() -> [Option<LogisticSchedule>; 5] {
    *SimulatedLearner::default_staircase().schedules()
}

fn apply<T>(slot: &mut T, value: Option<T>) {
    if let Some(value) = value {
        *slot = value;
    }
}

/// Where a run's goal space comes from.
#[derive(Debug, Clone)]
pub enum SpaceSource {
    Path(PathBuf),
    Generate(GenerationConfig),
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub estimator: EstimatorKind,
    pub estimator_params: EstimatorParams,
    pub learner: LearnerKind,
    pub qlinear: QLinearConfig,
    pub simulated: SimulatedLearner,
    pub selector: SelectorConfig,
    pub episodes: u64,
    pub eval_cadence: u64,
    pub eval_goals_per_category: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub record_test_evals: bool,
    pub shadow_ek: bool,
}

impl RunConfig {
    /// Library-level defaults for an estimator/learner pair.
    pub fn new(estimator: EstimatorKind, learner: LearnerKind, seed: u64) -> RunConfig {
        let params = EstimatorParams::default();
        let selector =
            SelectorConfig::new(estimator.selector_mode(), params.magellan.update_period);
        RunConfig {
            estimator,
            estimator_params: params,
            learner,
            qlinear: QLinearConfig::default(),
            simulated: SimulatedLearner::default_staircase(),
            selector,
            episodes: 50_000,
            eval_cadence: 5_000,
            eval_goals_per_category: 64,
            seed,
            out_dir: None,
            record_test_evals: false,
            shadow_ek: false,
        }
    }

    /// Builds the resolved config from a file plus CLI-style overrides.
    pub fn from_file(
        file: &ConfigFile,
        estimator: EstimatorKind,
        learner: LearnerKind,
        seed: u64,
    ) -> RunConfig {
        let params = file.estimator_params();
        let selector =
            file.selector_overrides(estimator.selector_mode(), params.magellan.update_period);
        let run = file.run.clone().unwrap_or_default();
        RunConfig {
            estimator,
            estimator_params: params,
            learner,
            qlinear: file.qlinear_config(),
            simulated: file.simulated_learner(),
            selector,
            episodes: run.episodes.unwrap_or(50_000),
            eval_cadence: run.eval_cadence.unwrap_or(5_000),
            eval_goals_per_category: run.eval_goals_per_category.unwrap_or(64),
            seed,
            out_dir: run.out_dir,
            record_test_evals: run.record_test_evals.unwrap_or(false),
            shadow_ek: run.shadow_ek.unwrap_or(false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<ConfigFile>("[run]\nbogus_key = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus_key"));
    }

    #[test]
    fn defaults_match_the_method_hyperparameters() {
        let file = ConfigFile::default();
        let params = file.estimator_params();
        assert_eq!(params.magellan.update_period, 32);
        assert_eq!(params.magellan.batch_size, 256);
        assert_eq!(params.magellan.outcome_capacity, 5_000);
        assert_eq!(params.magellan.snapshot_capacity, 100);
        assert_eq!(params.magellan.adam.learning_rate, 1e-4);
        assert_eq!(params.online.buffer_capacity, 100);
        assert_eq!(params.eval.frequency, 1_000);
        assert_eq!(params.ek_eval.episodes_per_key, 2_048);
        assert_eq!(params.moving_average.history_capacity, 100);
        assert_eq!(params.moving_average.smoothing, 0.3);
        let selector = file.selector_overrides(SelectorMode::PerGoal, 32);
        assert_eq!(selector.epsilon_start, 1.0);
        assert_eq!(selector.epsilon_end, 0.2);
        assert_eq!(selector.decay_horizon, 10_240);
    }

    #[test]
    fn file_values_override_defaults_and_round_trip() {
        let text = "[run]\nepisodes = 123\n\n[magellan]\nembed_dim = 32\nlearning_rate = 0.001\n";
        let file: ConfigFile = toml::from_str(text).unwrap();
        let config = RunConfig::from_file(
            &file,
            EstimatorKind::Magellan,
            LearnerKind::Simulated,
            7,
        );
        assert_eq!(config.episodes, 123);
        assert_eq!(config.estimator_params.magellan.embed_dim, 32);
        assert_eq!(config.estimator_params.magellan.adam.learning_rate, 1e-3);
        let echoed = file.to_toml().unwrap();
        let reparsed: ConfigFile = toml::from_str(&echoed).unwrap();
        assert_eq!(file, reparsed);
    }

    #[test]
    fn magellan_defaults_are_stable() {
        let config = littlezoo::estimators::MagellanConfig::default();
        assert_eq!(config.embed_dim, 64);
        assert_eq!(config.hidden_units, 128);
    }
}
