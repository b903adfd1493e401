//! Simulated-competence learner.
//!
//! Instead of acting in the environment, outcomes are Bernoulli draws from
//! per-category logistic schedules, optionally gated on a prerequisite
//! category crossing a threshold - a stand-in agent with a known ground
//! truth, used to benchmark competence estimators.

use rand::Rng;
use rand_chacha::rand_core::RngCore;

use crate::goalspace::CategoryLabel;
use crate::maths;

/// Opens a schedule only after `prerequisite`'s competence reaches
/// `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub prerequisite: CategoryLabel,
    pub threshold: f64,
}

/// `asymptote * sigmoid((t - open - offset) / tau)` once the gate is open,
/// 0 before.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticSchedule {
    pub offset: f64,
    pub tau: f64,
    pub asymptote: f64,
    pub gate: Option<Gate>,
}

/// Learner whose per-category success probability follows configured
/// schedules. The impossible category is fixed at 0.
#[derive(Debug, Clone)]
pub struct SimulatedLearner {
    schedules: [Option<LogisticSchedule>; 5],
    gate_open_at: [Option<u64>; 5],
    episodes: u64,
    version: u64,
}

impl SimulatedLearner {
    pub fn new(schedules: [Option<LogisticSchedule>; 5]) -> SimulatedLearner {
        let mut learner = SimulatedLearner {
            schedules,
            gate_open_at: [None; 5],
            episodes: 0,
            version: 0,
        };
        learner.open_gates();
        learner
    }

    /// Staged acquisition over a 50k-episode run: grasping first, then each
    /// grow category once its prerequisite is reliable.
    pub fn default_staircase() -> SimulatedLearner {
        let mut schedules: [Option<LogisticSchedule>; 5] = [None; 5];
        schedules[CategoryLabel::Grasp.index()] = Some(LogisticSchedule {
            offset: 6_000.0,
            tau: 800.0,
            asymptote: 0.95,
            gate: None,
        });
        schedules[CategoryLabel::GrowPlant.index()] = Some(LogisticSchedule {
            offset: 3_000.0,
            tau: 700.0,
            asymptote: 0.92,
            gate: Some(Gate {
                prerequisite: CategoryLabel::Grasp,
                threshold: 0.75,
            }),
        });
        schedules[CategoryLabel::GrowHerbivore.index()] = Some(LogisticSchedule {
            offset: 3_000.0,
            tau: 700.0,
            asymptote: 0.90,
            gate: Some(Gate {
                prerequisite: CategoryLabel::GrowPlant,
                threshold: 0.70,
            }),
        });
        schedules[CategoryLabel::GrowCarnivore.index()] = Some(LogisticSchedule {
            offset: 3_000.0,
            tau: 600.0,
            asymptote: 0.85,
            gate: Some(Gate {
                prerequisite: CategoryLabel::GrowHerbivore,
                threshold: 0.70,
            }),
        });
        SimulatedLearner::new(schedules)
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn schedules(&self) -> &[Option<LogisticSchedule>; 5] {
        &self.schedules
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Ground-truth success probability of `category` right now.
    pub fn true_competence(&self, category: CategoryLabel) -> f64 {
        self.competence_at(category, self.episodes)
    }

    fn competence_at(&self, category: CategoryLabel, episode: u64) -> f64 {
        if category == CategoryLabel::Impossible {
            return 0.0;
        }
        let Some(schedule) = self.schedules[category.index()] else {
            return 0.0;
        };
        let Some(open_at) = self.gate_open_at[category.index()] else {
            return 0.0;
        };
        let t = episode.saturating_sub(open_at) as f64;
        schedule.asymptote / (1.0 + maths::exp(-(t - schedule.offset) / schedule.tau))
    }

    fn open_gates(&mut self) {
        // Fixed category order; a gate can rely on an earlier category
        // opening in the same pass.
        for category in CategoryLabel::ALL {
            let index = category.index();
            let Some(schedule) = self.schedules[index] else {
                continue;
            };
            if self.gate_open_at[index].is_some() {
                continue;
            }
            let open = match schedule.gate {
                None => true,
                Some(gate) => self.competence_at(gate.prerequisite, self.episodes) >= gate.threshold,
            };
            if open {
                self.gate_open_at[index] = Some(self.episodes);
            }
        }
    }

    /// Training draw: Bernoulli at the current schedule value; advances the
    /// episode clock and the version counter.
    pub fn draw_training(&mut self, category: CategoryLabel, rng: &mut dyn RngCore) -> bool {
        self.open_gates();
        let p = self.true_competence(category);
        let outcome = rng.random::<f64>() < p;
        self.episodes += 1;
        self.version += 1;
        outcome
    }

    /// Frozen draw for evaluation: no clock or version movement.
    pub fn draw_frozen(&self, category: CategoryLabel, rng: &mut dyn RngCore) -> bool {
        rng.random::<f64>() < self.true_competence(category)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngs::{stream_rng, Stream};

    #[test]
    fn impossible_outcomes_are_always_failures() {
        let mut learner = SimulatedLearner::default_staircase();
        let mut rng = stream_rng(1, Stream::Simulation);
        for _ in 0..1000 {
            assert!(!learner.draw_training(CategoryLabel::Impossible, &mut rng));
        }
    }

    #[test]
    fn saturated_schedule_always_succeeds() {
        let mut schedules: [Option<LogisticSchedule>; 5] = [None; 5];
        schedules[CategoryLabel::Grasp.index()] = Some(LogisticSchedule {
            offset: -1_000_000.0,
            tau: 1.0,
            asymptote: 1.0,
            gate: None,
        });
        let mut learner = SimulatedLearner::new(schedules);
        let mut rng = stream_rng(2, Stream::Simulation);
        let successes = (0..2000)
            .filter(|_| learner.draw_training(CategoryLabel::Grasp, &mut rng))
            .count();
        assert_eq!(successes, 2000);
    }

    #[test]
    fn schedules_are_nondecreasing_and_gated_in_order() {
        let mut learner = SimulatedLearner::default_staircase();
        let mut rng = stream_rng(3, Stream::Simulation);
        let mut last = [0.0f64; 5];
        let mut plant_open_before_grasp_ready = false;
        for _ in 0..40_000 {
            learner.draw_training(CategoryLabel::Grasp, &mut rng);
            for category in CategoryLabel::ALL {
                let p = learner.true_competence(category);
                assert!(p + 1e-12 >= last[category.index()], "{category:?}");
                last[category.index()] = p;
            }
            if learner.true_competence(CategoryLabel::GrowPlant) > 0.05
                && learner.true_competence(CategoryLabel::Grasp) < 0.5
            {
                plant_open_before_grasp_ready = true;
            }
        }
        assert!(!plant_open_before_grasp_ready);
        assert!(last[CategoryLabel::Grasp.index()] > 0.9);
        assert!(last[CategoryLabel::GrowCarnivore.index()] > 0.8);
    }

    #[test]
    fn empirical_frequencies_track_the_schedules_within_binomial_bounds() {
        let mut learner = SimulatedLearner::default_staircase();
        let mut rng = stream_rng(4, Stream::Simulation);
        // Burn in so the grasp schedule sits mid-ramp.
        for _ in 0..7_000 {
            learner.draw_training(CategoryLabel::Impossible, &mut rng);
        }
        let trials = 4_000u32;
        let p = learner.true_competence(CategoryLabel::Grasp);
        let before = learner.true_competence(CategoryLabel::Grasp);
        let successes = (0..trials)
            .filter(|_| learner.draw_frozen(CategoryLabel::Grasp, &mut rng))
            .count() as f64;
        let after = learner.true_competence(CategoryLabel::Grasp);
        assert_eq!(before, after, "frozen draws do not advance the clock");
        let expected = f64::from(trials) * p;
        let sigma = (f64::from(trials) * p * (1.0 - p)).sqrt();
        assert!(
            (successes - expected).abs() < 3.0 * sigma,
            "{successes} vs {expected} (sigma {sigma})"
        );
    }

    #[test]
    fn frozen_draws_do_not_touch_the_version() {
        let mut learner = SimulatedLearner::default_staircase();
        let mut rng = stream_rng(5, Stream::Simulation);
        learner.draw_training(CategoryLabel::Grasp, &mut rng);
        let version = learner.version();
        for _ in 0..100 {
            learner.draw_frozen(CategoryLabel::Grasp, &mut rng);
        }
        assert_eq!(learner.version(), version);
    }
}
