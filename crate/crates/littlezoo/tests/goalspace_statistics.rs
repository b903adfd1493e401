//! Statistical checks on goal-space generation: the feasibility oracle
//! equivalence on generated spaces, quota exactness, and within-category
//! sampling uniformity on a vocabulary small enough to enumerate.

use std::collections::BTreeMap;

use littlezoo::env::Vocabulary;
use littlezoo::goalspace::{
    classify, feasible_bfs, generate, CategoryLabel, CategoryProportions, GenerationConfig,
    InfeasibilityReason, Split,
};
use littlezoo::rngs::{stream_rng, Stream};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn classify_equals_bfs_on_a_generated_space() {
    let config = GenerationConfig {
        total_goals: 600,
        test_goals: 100,
        proportions: CategoryProportions {
            impossible: 0.40,
            grasp: 0.30,
            grow_plant: 0.15,
            grow_herbivore: 0.10,
            grow_carnivore: 0.05,
        },
        rng_seed: 21,
    };
    let vocab = Vocabulary::default_zoo();
    let space = generate(
        &config,
        &vocab,
        &mut stream_rng(21, Stream::GenerateTrain),
        &mut stream_rng(21, Stream::GenerateTest),
    )
    .unwrap();
    for goal in space.goals() {
        assert_eq!(
            goal.feasible,
            feasible_bfs(goal, &vocab).unwrap(),
            "oracle disagrees on {:?} / {:?}",
            goal.instruction,
            goal.scene
        );
    }
}

#[test]
fn missing_water_is_reported_whenever_water_is_the_only_gap() {
    // Every infeasible grow goal whose scene holds the target and all
    // non-water prerequisites must report the missing water.
    let vocab = Vocabulary::default_zoo();
    let space = generate(
        &GenerationConfig {
            total_goals: 2_000,
            test_goals: 0,
            proportions: CategoryProportions {
                impossible: 0.85,
                grasp: 0.05,
                grow_plant: 0.05,
                grow_herbivore: 0.03,
                grow_carnivore: 0.02,
            },
            rng_seed: 33,
        },
        &vocab,
        &mut stream_rng(33, Stream::GenerateTrain),
        &mut stream_rng(33, Stream::GenerateTest),
    )
    .unwrap();
    let mut seen = 0;
    for goal in space.goals() {
        let (category, reason) = classify(&goal.instruction, &goal.scene, &vocab).unwrap();
        if category != CategoryLabel::Impossible {
            continue;
        }
        let scene = &goal.scene;
        let has_water = scene.contains_kind(littlezoo::env::ElementKind::Water);
        if reason == Some(InfeasibilityReason::MissingWater) {
            seen += 1;
            assert!(!has_water);
            assert!(scene.contains_name(&goal.instruction.target_name));
        }
    }
    assert!(seen > 0, "the sample never exercised the missing-water rule");
}

/// Chi-square goodness-of-fit against a uniform distribution.
fn chi_square_uniform_p(counts: &BTreeMap<String, u32>, total: f64) -> f64 {
    let bins = counts.len() as f64;
    let expected = total / bins;
    let statistic: f64 = counts
        .values()
        .map(|&observed| {
            let diff = f64::from(observed) - expected;
            diff * diff / expected
        })
        .sum();
    let distribution = ChiSquared::new(bins - 1.0).unwrap();
    1.0 - distribution.cdf(statistic)
}

#[test]
fn within_category_sampling_is_uniform_on_a_tiny_vocabulary() {
    // Two names per kind: the grasp-feasible slice is small enough that
    // repeated generation visits each (target, scene) combination often.
    let vocab = Vocabulary::new(
        &["desk", "bed"],
        &["pea", "tomato"],
        &["cow", "deer"],
        &["fox", "wolf"],
    )
    .unwrap();
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    let mut total = 0f64;
    for round in 0..400u64 {
        let config = GenerationConfig {
            total_goals: 40,
            test_goals: 0,
            proportions: CategoryProportions {
                impossible: 0.5,
                grasp: 0.5,
                grow_plant: 0.0,
                grow_herbivore: 0.0,
                grow_carnivore: 0.0,
            },
            rng_seed: round,
        };
        let space = generate(
            &config,
            &vocab,
            &mut stream_rng(round, Stream::GenerateTrain),
            &mut stream_rng(round, Stream::GenerateTest),
        )
        .unwrap();
        for &id in space.ids_by_category(Split::Train, CategoryLabel::Grasp) {
            let goal = space.goal(id);
            let scene: Vec<&str> = goal
                .scene
                .slots
                .iter()
                .map(|e| e.name.as_str())
                .collect();
            let key = format!("{} | {}", goal.instruction.target_name, scene.join(","));
            *counts.entry(key).or_insert(0) += 1;
            total += 1.0;
        }
    }
    // Feasible grasp combinations: target must be one of the 4 scene
    // names. With 9 names there are 9*8*7*6 ordered scenes and 4 eligible
    // targets each: 12,096 combinations. Sampling 20 per round x 400
    // rounds cannot cover them all, so bucket by target name instead.
    let mut by_target: BTreeMap<String, u32> = BTreeMap::new();
    for (key, count) in &counts {
        let target = key.split(" | ").next().unwrap().to_string();
        *by_target.entry(target).or_insert(0) += count;
    }
    assert_eq!(by_target.len(), 9, "every name appears as a grasp target");
    let p = chi_square_uniform_p(&by_target, total);
    assert!(p > 0.01, "uniformity rejected: p = {p}");
}
