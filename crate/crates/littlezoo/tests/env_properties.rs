//! Property tests for the environment dynamics and the buffer estimators.

use std::collections::BTreeMap;

use littlezoo::env::{Action, Element, Episode, EnvState, Goal, Verb, Vocabulary};
use littlezoo::estimators::{AlpEstimator, MbConfig, MbEstimator, OnlineAlp, OnlineConfig};
use littlezoo::goalspace::make_goal;
use proptest::prelude::*;

fn vocab() -> Vocabulary {
    Vocabulary::default_zoo()
}

/// Uniform goal over the full combinatorial space (duplicate-free scene).
fn arb_goal() -> impl Strategy<Value = Goal> {
    let names: Vec<&'static str> = vec![
        "bookshelf", "desk", "bed", "door", "table", "chair", "tomato", "carrot", "cucumber",
        "berry", "pea", "potato", "cow", "deer", "elephant", "giraffe", "rabbit", "sheep", "lion",
        "coyote", "wolf", "bobcat", "grizzly", "fox", "water",
    ];
    (any::<bool>(), 0usize..25, proptest::sample::subsequence(names, 4))
        .prop_map(|(grow, target, scene)| {
            let verb = if grow { Verb::Grow } else { Verb::Grasp };
            let v = vocab();
            let all = v.all_names();
            make_goal(
                &v,
                0,
                verb,
                all[target],
                [scene[0], scene[1], scene[2], scene[3]],
            )
            .expect("names come from the vocabulary")
        })
}

fn arb_actions() -> impl Strategy<Value = Vec<Action>> {
    proptest::collection::vec(0usize..8, 0..20)
        .prop_map(|indices| indices.into_iter().map(|i| Action::from_index(i).unwrap()).collect())
}

/// Multiset of element names on the ground plus inventory.
fn element_multiset(state: &EnvState) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    let elements = state
        .ground
        .iter()
        .flatten()
        .chain(state.inventory.iter());
    for element in elements {
        *counts.entry(element.name.clone()).or_insert(0) += 1;
    }
    counts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn replaying_an_action_sequence_is_bit_identical(goal in arb_goal(), actions in arb_actions()) {
        let run = |actions: &[Action]| {
            let mut episode = Episode::new(&goal, &vocab()).unwrap();
            let mut transcript = vec![episode.reset().render()];
            for &action in actions {
                if episode.state().done {
                    break;
                }
                let result = episode.step(action).unwrap();
                transcript.push(result.observation.render());
            }
            transcript
        };
        prop_assert_eq!(run(&actions), run(&actions));
    }

    #[test]
    fn reward_done_and_budget_invariants(goal in arb_goal(), actions in arb_actions()) {
        let mut episode = Episode::new(&goal, &vocab()).unwrap();
        episode.reset();
        let mut total_reward = 0.0;
        let mut was_done = false;
        for &action in &actions {
            if episode.state().done {
                break;
            }
            let before = element_multiset(episode.state());
            let result = episode.step(action).unwrap();
            let after = element_multiset(episode.state());
            total_reward += result.reward;
            prop_assert!(result.reward == 0.0 || result.reward == 1.0);
            prop_assert!(!was_done || result.done, "done is monotone");
            was_done = result.done;
            prop_assert!(episode.state().inventory.len() <= 2);
            prop_assert!(episode.state().steps_taken <= episode.budget());
            // Elements never appear from nowhere; at most one reagent is
            // consumed per interaction step.
            for (name, count) in &after {
                prop_assert!(before.get(name).copied().unwrap_or(0) >= *count);
            }
        }
        prop_assert!(total_reward <= 1.0, "reward is emitted at most once");
        // An exhausted budget always terminates the episode.
        if episode.state().steps_taken == episode.budget() {
            prop_assert!(episode.state().done);
        }
    }

    #[test]
    fn legal_actions_are_sound_and_illegal_releases_are_noops(
        goal in arb_goal(),
        actions in arb_actions(),
    ) {
        let mut episode = Episode::new(&goal, &vocab()).unwrap();
        episode.reset();
        for &action in &actions {
            if episode.state().done {
                break;
            }
            let legal = episode.legal_actions();
            let before = episode.state().clone();
            let result = episode.step(action).unwrap();
            let after = episode.state();
            prop_assert_eq!(after.steps_taken, before.steps_taken + 1);
            let state_changed = after.ground != before.ground
                || after.standing_on != before.standing_on
                || after.inventory != before.inventory;
            if legal.contains(&action) {
                match action {
                    Action::GoTo(slot) => {
                        prop_assert_eq!(after.standing_on, Some(slot));
                    }
                    Action::Grasp => {
                        prop_assert_eq!(after.inventory.len(), before.inventory.len() + 1);
                        prop_assert_eq!(after.standing_on, None);
                    }
                    Action::Release(_) | Action::ReleaseAll => {
                        prop_assert!(state_changed, "legal releases transform the target");
                        prop_assert!(result.observation.you_see.len() == before.ground.iter().flatten().count());
                    }
                }
            } else if matches!(action, Action::Release(_) | Action::ReleaseAll) {
                prop_assert!(!state_changed, "illegal releases are no-ops");
            }
        }
    }

    #[test]
    fn moving_average_matches_a_direct_recomputation(
        outcomes in proptest::collection::vec(any::<bool>(), 1..80),
    ) {
        let space = {
            // One-goal stand-in space is overkill here; reuse a small one.
            littlezoo::goalspace::GoalSpace::from_parts(
                vocab(),
                littlezoo::goalspace::GenerationConfig::new(1, 0, 0),
                vec![make_goal(&vocab(), 0, Verb::Grasp, "bed", ["bed", "water", "cow", "tomato"]).unwrap()],
                vec![littlezoo::goalspace::Split::Train],
            )
            .unwrap()
        };
        let config = MbConfig { history_capacity: 16, smoothing: 0.3 };
        let mut estimator = MbEstimator::new(config.clone(), &space);
        // Direct oracle: recompute the utility recurrence from scratch.
        let mut expected_utility = 0.0;
        let mut history: Vec<bool> = Vec::new();
        for (episode, &outcome) in outcomes.iter().enumerate() {
            let alp_hat = if history.is_empty() {
                0.0
            } else {
                history
                    .iter()
                    .map(|&r| (f64::from(u8::from(outcome)) - f64::from(u8::from(r))).abs())
                    .sum::<f64>()
                    / history.len() as f64
            };
            expected_utility = config.smoothing * expected_utility
                + (1.0 - config.smoothing) * alp_hat;
            history.push(outcome);
            if history.len() > config.history_capacity {
                history.remove(0);
            }
            estimator.observe(0, outcome, episode as u64);
            prop_assert!((estimator.alp(0) - expected_utility).abs() < 1e-12);
            let expected_competence =
                history.iter().map(|&r| f64::from(u8::from(r))).sum::<f64>() / history.len() as f64;
            prop_assert!((estimator.competence(0) - expected_competence).abs() < 1e-12);
        }
    }

    #[test]
    fn online_halves_match_a_direct_recomputation(
        outcomes in proptest::collection::vec(any::<bool>(), 1..60),
    ) {
        let space = littlezoo::goalspace::GoalSpace::from_parts(
            vocab(),
            littlezoo::goalspace::GenerationConfig::new(1, 0, 0),
            vec![make_goal(&vocab(), 0, Verb::Grasp, "bed", ["bed", "water", "cow", "tomato"]).unwrap()],
            vec![littlezoo::goalspace::Split::Train],
        )
        .unwrap();
        let capacity = 20;
        let mut estimator = OnlineAlp::new(OnlineConfig { buffer_capacity: capacity }, &space);
        let mut window: Vec<bool> = Vec::new();
        for (episode, &outcome) in outcomes.iter().enumerate() {
            window.push(outcome);
            if window.len() > capacity {
                window.remove(0);
            }
            estimator.observe(0, outcome, episode as u64);
            let half = window.len() / 2;
            let (expected_competence, expected_alp) = if half == 0 {
                (f64::from(u8::from(window[0])), 0.0)
            } else {
                let mean = |slice: &[bool]| {
                    slice.iter().map(|&r| f64::from(u8::from(r))).sum::<f64>() / slice.len() as f64
                };
                let current = mean(&window[window.len() - half..]);
                let past = mean(&window[..half]);
                (current, (current - past).abs())
            };
            prop_assert!((estimator.competence(0) - expected_competence).abs() < 1e-12);
            prop_assert!((estimator.alp(0) - expected_alp).abs() < 1e-12);
        }
    }
}

#[test]
fn grasping_is_allowed_on_every_element_kind() {
    // Water and babies included: every grow trajectory grasps water, and
    // a "Grasp lion" goal is satisfied by grasping the baby lion.
    let v = vocab();
    let goal = make_goal(&v, 0, Verb::Grasp, "lion", ["water", "tomato", "lion", "bed"]).unwrap();
    let mut episode = Episode::new(&goal, &v).unwrap();
    episode.step(Action::GoTo(2)).unwrap();
    let result = episode.step(Action::Grasp).unwrap();
    assert_eq!(result.reward, 1.0);
    let held: Vec<&Element> = result.observation.state.inventory.iter().collect();
    assert_eq!(held[0].name, "lion");
}
