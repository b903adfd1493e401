//! ALP-proportional goal selection with annealing epsilon-greedy
//! exploration.
//!
//! With probability epsilon the selector explores: uniformly over train
//! goals, or - for bucketed estimators - uniformly over category buckets
//! and then uniformly within the bucket. Otherwise it exploits, sampling
//! goals (or buckets) proportionally to estimated ALP, falling back to the
//! uniform branch when all ALP mass is zero.

use rand::Rng;

use crate::estimators::AlpEstimator;
use crate::goalspace::{CategoryLabel, GoalSpace, Split};

/// How the selector consumes the estimator's ALP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorMode {
    PerGoal,
    PerBucket,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorConfig {
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Episodes over which epsilon anneals linearly.
    pub decay_horizon: u64,
    pub mode: SelectorMode,
}

impl SelectorConfig {
    /// Defaults: epsilon 1.0 -> 0.2 over 320 update periods.
    pub fn new(mode: SelectorMode, update_period: u64) -> SelectorConfig {
        SelectorConfig {
            epsilon_start: 1.0,
            epsilon_end: 0.2,
            decay_horizon: 320 * update_period,
            mode,
        }
    }
}

/// Linear interpolation from start to end over the decay horizon, clamped.
pub fn epsilon(config: &SelectorConfig, episode_index: u64) -> f64 {
    if config.decay_horizon == 0 || episode_index >= config.decay_horizon {
        return config.epsilon_end;
    }
    let progress = episode_index as f64 / config.decay_horizon as f64;
    config.epsilon_start + (config.epsilon_end - config.epsilon_start) * progress
}

/// Audit record of one selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionEvent {
    pub episode_index: u64,
    pub goal_id: u32,
    pub epsilon: f64,
    /// Whether the epsilon coin chose the uniform branch.
    pub exploratory: bool,
    /// ALP of the chosen goal at selection time.
    pub chosen_alp: f64,
    /// Sum of the ALP vector the exploit branch would draw from.
    pub alp_checksum: f64,
}

/// Draws the next goal to practice from the train split.
pub fn select<E: AlpEstimator, R: Rng>(
    config: &SelectorConfig,
    estimator: &E,
    space: &GoalSpace,
    episode_index: u64,
    rng: &mut R,
) -> SelectionEvent {
    let train = space.train_ids();
    assert!(!train.is_empty(), "goal space has no train goals");
    let eps = epsilon(config, episode_index);
    let exploratory = rng.random::<f64>() < eps;
    let (goal_id, alp_checksum) = match config.mode {
        SelectorMode::Uniform => (uniform_goal(train, rng), 0.0),
        SelectorMode::PerGoal => {
            let total: f64 = train.iter().map(|&id| estimator.alp(id)).sum();
            let id = if exploratory || total <= 0.0 {
                uniform_goal(train, rng)
            } else {
                let mut threshold = rng.random::<f64>() * total;
                let mut chosen = train[train.len() - 1];
                for &id in train {
                    threshold -= estimator.alp(id);
                    if threshold < 0.0 {
                        chosen = id;
                        break;
                    }
                }
                chosen
            };
            (id, total)
        }
        SelectorMode::PerBucket => {
            let buckets: alloc::vec::Vec<(CategoryLabel, f64)> = CategoryLabel::ALL
                .into_iter()
                .filter(|c| !space.ids_by_category(Split::Train, *c).is_empty())
                .map(|c| {
                    let representative = space.ids_by_category(Split::Train, c)[0];
                    (c, estimator.alp(representative))
                })
                .collect();
            let total: f64 = buckets.iter().map(|(_, alp)| alp).sum();
            let bucket = if exploratory || total <= 0.0 {
                buckets[rng.random_range(0..buckets.len())].0
            } else {
                let mut threshold = rng.random::<f64>() * total;
                let mut chosen = buckets[buckets.len() - 1].0;
                for (category, alp) in &buckets {
                    threshold -= alp;
                    if threshold < 0.0 {
                        chosen = *category;
                        break;
                    }
                }
                chosen
            };
            let members = space.ids_by_category(Split::Train, bucket);
            (members[rng.random_range(0..members.len())], total)
        }
    };
    SelectionEvent {
        episode_index,
        goal_id,
        epsilon: eps,
        exploratory,
        chosen_alp: estimator.alp(goal_id),
        alp_checksum,
    }
}

fn uniform_goal<R: Rng>(train: &[u32], rng: &mut R) -> u32 {
    train[rng.random_range(0..train.len())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{AlpEstimator, GoalId};
    use crate::rngs::{stream_rng, Stream};
    use crate::testutil::small_space;
    use alloc::vec::Vec;

    /// Test stub with a frozen ALP vector.
    struct FrozenAlp(Vec<f64>);

    impl AlpEstimator for FrozenAlp {
        fn observe(&mut self, _goal: GoalId, _success: bool, _episode_index: u64) {}
        fn competence(&self, _goal: GoalId) -> f64 {
            0.0
        }
        fn alp(&self, goal: GoalId) -> f64 {
            self.0[goal as usize]
        }
        fn swap_goal_space(&mut self, _space: &crate::goalspace::GoalSpace) {}
    }

    fn space() -> crate::goalspace::GoalSpace {
        small_space(60, 0, 6)
    }

    #[test]
    fn epsilon_boundaries_and_midpoint() {
        let config = SelectorConfig::new(SelectorMode::PerGoal, 32);
        assert_eq!(config.decay_horizon, 10_240);
        assert_eq!(epsilon(&config, 0), 1.0);
        assert!((epsilon(&config, 5_120) - 0.6).abs() < 1e-12);
        assert_eq!(epsilon(&config, 10_240), 0.2);
        assert_eq!(epsilon(&config, 1_000_000), 0.2);
    }

    #[test]
    fn zero_alp_falls_back_to_uniform() {
        let space = space();
        let estimator = FrozenAlp(alloc::vec![0.0; space.goals().len()]);
        let mut config = SelectorConfig::new(SelectorMode::PerGoal, 32);
        config.epsilon_start = 0.0;
        config.epsilon_end = 0.0;
        let mut rng = stream_rng(1, Stream::Selector);
        let mut counts = alloc::vec![0u32; space.goals().len()];
        let draws = 60_000;
        for episode in 0..draws {
            let event = select(&config, &estimator, &space, episode, &mut rng);
            counts[event.goal_id as usize] += 1;
            assert!(!event.exploratory);
            assert_eq!(event.alp_checksum, 0.0);
        }
        let expected = draws as f64 / space.train_ids().len() as f64;
        for &id in space.train_ids() {
            let observed = f64::from(counts[id as usize]);
            assert!(
                (observed - expected).abs() < expected * 0.25,
                "goal {id}: {observed} vs {expected}"
            );
        }
    }

    #[test]
    fn exploit_branch_matches_alp_proportions() {
        let space = space();
        // Give three goals ALP {0.2, 0.2, 0.6}; everything else zero.
        let ids = [space.train_ids()[0], space.train_ids()[1], space.train_ids()[2]];
        let mut alps = alloc::vec![0.0; space.goals().len()];
        alps[ids[0] as usize] = 0.2;
        alps[ids[1] as usize] = 0.2;
        alps[ids[2] as usize] = 0.6;
        let estimator = FrozenAlp(alps);
        let mut config = SelectorConfig::new(SelectorMode::PerGoal, 32);
        config.epsilon_start = 0.0;
        config.epsilon_end = 0.0;
        let mut rng = stream_rng(2, Stream::Selector);
        let mut counts = [0u32; 3];
        let draws = 100_000;
        for episode in 0..draws {
            let event = select(&config, &estimator, &space, episode, &mut rng);
            let slot = ids.iter().position(|&id| id == event.goal_id).unwrap();
            counts[slot] += 1;
        }
        let freqs: Vec<f64> = counts.iter().map(|&c| f64::from(c) / draws as f64).collect();
        assert!((freqs[0] - 0.2).abs() < 0.01, "{freqs:?}");
        assert!((freqs[1] - 0.2).abs() < 0.01, "{freqs:?}");
        assert!((freqs[2] - 0.6).abs() < 0.01, "{freqs:?}");
    }

    #[test]
    fn per_bucket_gives_small_buckets_even_odds() {
        let space = space();
        let estimator = FrozenAlp(alloc::vec![0.0; space.goals().len()]);
        let config = SelectorConfig::new(SelectorMode::PerBucket, 32);
        let mut rng = stream_rng(3, Stream::Selector);
        let mut bucket_counts = [0u32; 5];
        let draws = 50_000;
        for episode in 0..draws {
            let event = select(&config, &estimator, &space, episode, &mut rng);
            bucket_counts[space.goal(event.goal_id).category.index()] += 1;
        }
        let populated: Vec<usize> = CategoryLabel::ALL
            .iter()
            .filter(|c| !space.ids_by_category(Split::Train, **c).is_empty())
            .map(|c| c.index())
            .collect();
        let expected = draws as f64 / populated.len() as f64;
        for index in populated {
            let observed = f64::from(bucket_counts[index]);
            assert!(
                (observed - expected).abs() < expected * 0.1,
                "bucket {index}: {observed} vs {expected}"
            );
        }
    }

    #[test]
    fn selection_replays_identically_under_the_same_seed() {
        let space = space();
        let estimator = FrozenAlp((0..space.goals().len()).map(|i| i as f64).collect());
        let config = SelectorConfig::new(SelectorMode::PerGoal, 32);
        let run = || {
            let mut rng = stream_rng(4, Stream::Selector);
            (0..500)
                .map(|episode| select(&config, &estimator, &space, episode, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
