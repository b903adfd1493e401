//! Core algorithms for a desk-scale automatic-curriculum-learning laboratory.
//!
//! The crate has no I/O: it provides the Little-Zoo episodic text world
//! ([`env`]), goal-space enumeration and classification with a brute-force
//! feasibility oracle ([`goalspace`]), a small from-scratch neural kernel
//! ([`tinynet`]), six competence / absolute-learning-progress estimation
//! strategies ([`estimators`]), ALP-proportional goal selection
//! ([`curriculum`]) and pluggable learners ([`learners`]). File formats,
//! experiment protocols and the CLI live in the companion `zoolab` crate.
//!
//! The crate is `no_std`-compatible (with `alloc`); enable the `libm`
//! feature instead of `std` in that configuration.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("littlezoo requires either the `std` or the `libm` feature");

pub mod curriculum;
pub mod env;
pub mod estimators;
pub mod goalspace;
pub mod learners;
mod maths;
pub mod rngs;
pub mod tinynet;

#[cfg(test)]
pub(crate) mod testutil {
    use crate::env::Vocabulary;
    use crate::goalspace::{generate, CategoryProportions, GenerationConfig, GoalSpace};
    use crate::rngs::{stream_rng, Stream};

    /// Small spaces for unit tests: fatter category tails than the
    /// production defaults so every category is populated.
    pub fn small_space(total: usize, test: usize, seed: u64) -> GoalSpace {
        let config = GenerationConfig {
            total_goals: total,
            test_goals: test,
            proportions: CategoryProportions {
                impossible: 0.40,
                grasp: 0.30,
                grow_plant: 0.15,
                grow_herbivore: 0.10,
                grow_carnivore: 0.05,
            },
            rng_seed: seed,
        };
        generate(
            &config,
            &Vocabulary::default_zoo(),
            &mut stream_rng(seed, Stream::GenerateTrain),
            &mut stream_rng(seed, Stream::GenerateTest),
        )
        .expect("test space generates")
    }
}
