//! Linear action-value learner over hand-crafted binary features.
//!
//! Features are conjunctions of a goal context and an action-effect atom.
//! Two context families are active at once: the goal verb alone, and the
//! verb crossed with the target's element kind. The verb-only family is
//! what carries transfer: the water -> seed -> release chain learned on
//! "Grow <plant>" goals raises the same atoms under "Grow <herbivore>"
//! goals, so practicing one category changes competence on others.
//!
//! Updates are n-step temporal differences applied backward over the
//! finished trajectory, so terminal rewards propagate deep in one pass.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::RngCore;

use super::{ActMode, Learner, Trajectory};
use crate::env::{
    interaction, Action, Element, ElementKind, ElementState, EnvState, Goal, Verb, Vocabulary,
};

#[derive(Debug, Clone, PartialEq)]
pub struct QLinearConfig {
    pub learning_rate: f64,
    /// Behavior-policy exploration at episode 0; separate from the
    /// curriculum epsilon. Greedy play from zero weights is pinned to the
    /// lowest action index, so early behavior must be exploratory for the
    /// learner to discover multi-step chains at all.
    pub behavior_epsilon_start: f64,
    /// Exploration floor once annealing finishes.
    pub behavior_epsilon_end: f64,
    /// Learned episodes over which behavior exploration anneals linearly.
    pub behavior_decay_episodes: u64,
    /// Count-based exploration drive: training-time action values get a
    /// bonus shrinking with how often the action's features were tried.
    /// Repeated practice on one goal family then explores its action
    /// chains systematically instead of re-rolling an epsilon lottery,
    /// so the rate a goal is selected at governs how fast it is learned.
    pub exploration_bonus: f64,
    /// Scale of the seeded uniform weight init. Nonzero init means the
    /// greedy policy starts with arbitrary preferences that practice must
    /// overwrite, so mastering a category takes sustained training rather
    /// than a single lucky success.
    pub init_weight_scale: f64,
    pub discount: f64,
    pub n_step: usize,
}

impl Default for QLinearConfig {
    fn default() -> Self {
        QLinearConfig {
            learning_rate: 0.03,
            behavior_epsilon_start: 1.0,
            behavior_epsilon_end: 0.05,
            behavior_decay_episodes: 2_500,
            exploration_bonus: 0.1,
            init_weight_scale: 0.03,
            discount: 0.99,
            n_step: 3,
        }
    }
}

/// Element classes the features distinguish.
const CLASS_COUNT: usize = 8;
/// Inventory item classes: water, grown plant, grown herbivore, other.
const ITEM_CLASS_COUNT: usize = 4;

const GOTO_BASE: usize = 0; // class of the pointed element
const GOTO_TARGET: usize = GOTO_BASE + CLASS_COUNT; // pointed at the goal target
const GRASP_BASE: usize = GOTO_TARGET + 1; // class of the stood element
const GRASP_TARGET: usize = GRASP_BASE + CLASS_COUNT;
const RELEASE_BASE: usize = GRASP_TARGET + 1; // item class x stood class
const RELEASE_TARGET: usize = RELEASE_BASE + ITEM_CLASS_COUNT * CLASS_COUNT;
const RELEASE_INTERACTS: usize = RELEASE_TARGET + 1;
const RELEASE_ALL_BASE: usize = RELEASE_INTERACTS + 1; // stood class
const RELEASE_ALL_INTERACTS: usize = RELEASE_ALL_BASE + CLASS_COUNT;
const RELEASE_ALL_TARGET: usize = RELEASE_ALL_INTERACTS + 1;
const GROUND_BASE: usize = RELEASE_ALL_TARGET + 1; // classes on the ground
const INVENTORY_BASE: usize = GROUND_BASE + CLASS_COUNT; // item classes held
const TARGET_ON_GROUND: usize = INVENTORY_BASE + ITEM_CLASS_COUNT;
const TARGET_GROWN: usize = TARGET_ON_GROUND + 1;
const ATOM_COUNT: usize = TARGET_GROWN + 1;

/// Verb contexts (2) plus verb-x-target-kind contexts (2 x 5).
const CONTEXT_COUNT: usize = 2 + 2 * 5;
/// Total feature-vector dimension.
pub const FEATURE_DIM: usize = CONTEXT_COUNT * ATOM_COUNT;

fn element_class(element: &Element) -> usize {
    match (element.kind, element.state) {
        (ElementKind::Water, _) => 0,
        (ElementKind::Furniture, _) => 1,
        (ElementKind::Plant, ElementState::Seed) => 2,
        (ElementKind::Plant, _) => 3,
        (ElementKind::Herbivore, ElementState::Baby) => 4,
        (ElementKind::Herbivore, _) => 5,
        (ElementKind::Carnivore, ElementState::Baby) => 6,
        (ElementKind::Carnivore, _) => 7,
    }
}

fn item_class(element: &Element) -> usize {
    match (element.kind, element.state) {
        (ElementKind::Water, _) => 0,
        (ElementKind::Plant, ElementState::GrownPlant) => 1,
        (ElementKind::Herbivore, ElementState::GrownAnimal) => 2,
        _ => 3,
    }
}

fn kind_index(kind: ElementKind) -> usize {
    match kind {
        ElementKind::Furniture => 0,
        ElementKind::Plant => 1,
        ElementKind::Herbivore => 2,
        ElementKind::Carnivore => 3,
        ElementKind::Water => 4,
    }
}

#[derive(Debug, Clone)]
pub struct FeatureQLearner {
    config: QLinearConfig,
    vocab: Vocabulary,
    weights: Vec<f64>,
    /// How often each feature fired in a taken training action.
    visit_counts: Vec<u32>,
    version: u64,
}

impl FeatureQLearner {
    pub fn new<R: Rng + ?Sized>(
        config: QLinearConfig,
        vocab: Vocabulary,
        rng: &mut R,
    ) -> FeatureQLearner {
        let scale = config.init_weight_scale;
        let weights = if scale == 0.0 {
            vec![0.0; FEATURE_DIM]
        } else {
            (0..FEATURE_DIM)
                .map(|_| rng.random_range(-scale..=scale))
                .collect()
        };
        FeatureQLearner {
            config,
            vocab,
            weights,
            visit_counts: vec![0; FEATURE_DIM],
            version: 0,
        }
    }

    pub fn config(&self) -> &QLinearConfig {
        &self.config
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// Current behavior-policy exploration rate.
    pub fn behavior_epsilon(&self) -> f64 {
        let c = &self.config;
        if c.behavior_decay_episodes == 0 || self.version >= c.behavior_decay_episodes {
            return c.behavior_epsilon_end;
        }
        let progress = self.version as f64 / c.behavior_decay_episodes as f64;
        c.behavior_epsilon_start + (c.behavior_epsilon_end - c.behavior_epsilon_start) * progress
    }

    /// Active feature indices of (goal, state, action).
    pub fn featurize(&self, goal: &Goal, state: &EnvState, action: Action) -> Vec<usize> {
        let target = goal.instruction.target_name.as_str();
        let target_kind = self
            .vocab
            .kind_of(target)
            .expect("goal targets come from the vocabulary");
        let verb_index = match goal.instruction.verb {
            Verb::Grasp => 0,
            Verb::Grow => 1,
        };
        let contexts = [
            verb_index,
            2 + verb_index * 5 + kind_index(target_kind),
        ];

        let mut atoms: Vec<usize> = Vec::with_capacity(24);
        match action {
            Action::GoTo(slot) => {
                if let Some(element) = state.ground[slot as usize].as_ref() {
                    atoms.push(GOTO_BASE + element_class(element));
                    if element.name == target {
                        atoms.push(GOTO_TARGET);
                    }
                }
            }
            Action::Grasp => {
                if let Some(element) = state.stood_element() {
                    atoms.push(GRASP_BASE + element_class(element));
                    if element.name == target {
                        atoms.push(GRASP_TARGET);
                    }
                }
            }
            Action::Release(index) => {
                if let (Some(item), Some(stood)) =
                    (state.inventory.get(index as usize), state.stood_element())
                {
                    atoms.push(
                        RELEASE_BASE + item_class(item) * CLASS_COUNT + element_class(stood),
                    );
                    if stood.name == target {
                        atoms.push(RELEASE_TARGET);
                    }
                    if interaction(item, stood).is_some() {
                        atoms.push(RELEASE_INTERACTS);
                    }
                }
            }
            Action::ReleaseAll => {
                if let Some(stood) = state.stood_element() {
                    atoms.push(RELEASE_ALL_BASE + element_class(stood));
                    if state
                        .inventory
                        .iter()
                        .any(|item| interaction(item, stood).is_some())
                    {
                        atoms.push(RELEASE_ALL_INTERACTS);
                    }
                    if stood.name == target {
                        atoms.push(RELEASE_ALL_TARGET);
                    }
                }
            }
        }

        let mut ground_classes = [false; CLASS_COUNT];
        let mut target_on_ground = false;
        let mut target_grown = false;
        for element in state.ground.iter().flatten() {
            ground_classes[element_class(element)] = true;
            if element.name == target {
                target_on_ground = true;
                target_grown |= element.is_grown();
            }
        }
        for (class, present) in ground_classes.iter().enumerate() {
            if *present {
                atoms.push(GROUND_BASE + class);
            }
        }
        let mut held_classes = [false; ITEM_CLASS_COUNT];
        for item in &state.inventory {
            held_classes[item_class(item)] = true;
        }
        for (class, present) in held_classes.iter().enumerate() {
            if *present {
                atoms.push(INVENTORY_BASE + class);
            }
        }
        if target_on_ground {
            atoms.push(TARGET_ON_GROUND);
        }
        if target_grown {
            atoms.push(TARGET_GROWN);
        }

        let mut features = Vec::with_capacity(atoms.len() * contexts.len());
        for context in contexts {
            let base = context * ATOM_COUNT;
            features.extend(atoms.iter().map(|atom| base + atom));
        }
        features
    }

    pub fn q_value(&self, goal: &Goal, state: &EnvState, action: Action) -> f64 {
        self.featurize(goal, state, action)
            .iter()
            .map(|&index| self.weights[index])
            .sum()
    }

    /// Greedy action over `legal`, ties broken by lowest action index.
    fn greedy(&self, goal: &Goal, state: &EnvState, legal: &[Action]) -> Action {
        debug_assert!(!legal.is_empty());
        let mut best = legal[0];
        let mut best_value = self.q_value(goal, state, best);
        for &action in &legal[1..] {
            let value = self.q_value(goal, state, action);
            if value > best_value {
                best = action;
                best_value = value;
            }
        }
        best
    }

    /// Training-time action choice: value plus the novelty bonus.
    fn drive(&self, goal: &Goal, state: &EnvState, legal: &[Action]) -> Action {
        debug_assert!(!legal.is_empty());
        let scored = |action: Action| {
            let features = self.featurize(goal, state, action);
            let value: f64 = features.iter().map(|&index| self.weights[index]).sum();
            let novelty: f64 = features
                .iter()
                .map(|&index| 1.0 / crate::maths::sqrt(1.0 + f64::from(self.visit_counts[index])))
                .sum::<f64>()
                / features.len().max(1) as f64;
            value + self.config.exploration_bonus * novelty
        };
        let mut best = legal[0];
        let mut best_value = scored(best);
        for &action in &legal[1..] {
            let value = scored(action);
            if value > best_value {
                best = action;
                best_value = value;
            }
        }
        best
    }

    fn max_q(&self, goal: &Goal, state: &EnvState) -> f64 {
        let legal = crate::env::legal_actions(state);
        if legal.is_empty() {
            // Dead states (no legal action) can only burn budget.
            return 0.0;
        }
        legal
            .into_iter()
            .map(|action| self.q_value(goal, state, action))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Learner for FeatureQLearner {
    fn act(
        &self,
        goal: &Goal,
        state: &EnvState,
        legal: &[Action],
        mode: ActMode,
        rng: &mut dyn RngCore,
    ) -> Action {
        match mode {
            ActMode::Eval => self.greedy(goal, state, legal),
            ActMode::Train => {
                if rng.random::<f64>() < self.behavior_epsilon() {
                    legal[rng.random_range(0..legal.len())]
                } else {
                    self.drive(goal, state, legal)
                }
            }
        }
    }

    /// n-step TD updates applied backward over the trajectory.
    fn learn(&mut self, goal: &Goal, trajectory: &Trajectory) {
        let steps = &trajectory.steps;
        let n = self.config.n_step.max(1);
        let gamma = self.config.discount;
        let alpha = self.config.learning_rate;
        for t in (0..steps.len()).rev() {
            let mut target = 0.0;
            let mut factor = 1.0;
            for i in 0..n.min(steps.len() - t) {
                target += factor * steps[t + i].reward;
                factor *= gamma;
            }
            if t + n < steps.len() {
                // Bootstrap from the state the (t+n)-th action was taken in.
                target += factor * self.max_q(goal, &steps[t + n].state);
            }
            let features = self.featurize(goal, &steps[t].state, steps[t].action);
            let prediction: f64 = features.iter().map(|&index| self.weights[index]).sum();
            // Normalized by the active-feature count so the prediction
            // moves by an alpha fraction of the error regardless of how
            // many binary features fire.
            let delta = alpha * (target - prediction) / features.len() as f64;
            for index in features {
                self.weights[index] += delta;
            }
        }
        for step in steps {
            for index in self.featurize(goal, &step.state, step.action) {
                self.visit_counts[index] = self.visit_counts[index].saturating_add(1);
            }
        }
        self.version += 1;
    }

    fn version(&self) -> u64 {
        self.version
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Episode, Vocabulary};
    use crate::goalspace::make_goal;
    use crate::learners::TrajectoryStep;
    use crate::rngs::{stream_rng, Stream};
    use rand_chacha::ChaCha8Rng;

    fn vocab() -> Vocabulary {
        Vocabulary::default_zoo()
    }

    /// Zero-initialized weights: the configuration the documented
    /// zero-weight behaviors are stated for.
    fn zero_init() -> QLinearConfig {
        QLinearConfig {
            init_weight_scale: 0.0,
            ..QLinearConfig::default()
        }
    }

    /// Fast-learning settings for convergence smoke tests.
    fn fast_config() -> QLinearConfig {
        QLinearConfig {
            learning_rate: 0.15,
            behavior_decay_episodes: 400,
            exploration_bonus: 0.5,
            init_weight_scale: 0.0,
            ..QLinearConfig::default()
        }
    }

    fn learner_with(config: QLinearConfig) -> FeatureQLearner {
        FeatureQLearner::new(config, vocab(), &mut stream_rng(42, Stream::Learner))
    }

    fn rollout_training(
        learner: &mut FeatureQLearner,
        goal: &Goal,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        let mut episode = Episode::new(goal, &vocab()).unwrap();
        episode.reset();
        let mut trajectory = Trajectory::default();
        let mut success = false;
        loop {
            let state = episode.state().clone();
            let mut legal = episode.legal_actions();
            if legal.is_empty() {
                legal.extend(Action::ALL);
            }
            let action = learner.act(goal, &state, &legal, ActMode::Train, rng);
            let result = episode.step(action).unwrap();
            success |= result.reward > 0.0;
            trajectory.steps.push(TrajectoryStep {
                state,
                action,
                reward: result.reward,
            });
            if result.done {
                break;
            }
        }
        learner.learn(goal, &trajectory);
        success
    }

    fn rollout_greedy(learner: &FeatureQLearner, goal: &Goal) -> bool {
        let mut episode = Episode::new(goal, &vocab()).unwrap();
        episode.reset();
        let mut rng = stream_rng(0, Stream::SrEval);
        loop {
            let state = episode.state().clone();
            let mut legal = episode.legal_actions();
            if legal.is_empty() {
                legal.extend(Action::ALL);
            }
            let action = learner.act(goal, &state, &legal, ActMode::Eval, &mut rng);
            let result = episode.step(action).unwrap();
            if result.done {
                return result.reward > 0.0;
            }
        }
    }

    #[test]
    fn zero_weights_pick_the_lowest_index_greedily() {
        let learner = learner_with(zero_init());
        let goal = make_goal(&vocab(), 0, Verb::Grasp, "bed", ["bed", "water", "cow", "tomato"])
            .unwrap();
        let episode = Episode::new(&goal, &vocab()).unwrap();
        let legal = episode.legal_actions();
        let mut rng = stream_rng(1, Stream::Learner);
        let action = learner.act(&goal, episode.state(), &legal, ActMode::Eval, &mut rng);
        assert_eq!(action, Action::GoTo(0));
    }

    #[test]
    fn exploration_with_zero_weights_is_uniform_over_legal_actions() {
        let learner = learner_with(QLinearConfig {
            behavior_epsilon_start: 1.0,
            behavior_epsilon_end: 1.0,
            ..zero_init()
        });
        let goal = make_goal(&vocab(), 0, Verb::Grasp, "bed", ["bed", "water", "cow", "tomato"])
            .unwrap();
        let episode = Episode::new(&goal, &vocab()).unwrap();
        let legal = episode.legal_actions();
        let mut rng = stream_rng(2, Stream::Learner);
        let mut counts = [0u32; 4];
        for _ in 0..8000 {
            match learner.act(&goal, episode.state(), &legal, ActMode::Train, &mut rng) {
                Action::GoTo(slot) => counts[slot as usize] += 1,
                other => panic!("unexpected action {other:?}"),
            }
        }
        for count in counts {
            assert!((f64::from(count) - 2000.0).abs() < 300.0, "{counts:?}");
        }
    }

    #[test]
    fn zero_reward_trajectories_keep_zero_weights() {
        let mut learner = learner_with(zero_init());
        let goal = make_goal(&vocab(), 0, Verb::Grasp, "bed", ["door", "water", "cow", "tomato"])
            .unwrap();
        let mut rng = stream_rng(3, Stream::Learner);
        for _ in 0..10 {
            let success = rollout_training(&mut learner, &goal, &mut rng);
            assert!(!success);
        }
        assert!(learner.weights().iter().all(|&w| w == 0.0));
        assert_eq!(learner.version(), 10);
    }

    #[test]
    fn zero_learning_rate_never_changes_weights() {
        let mut learner = learner_with(QLinearConfig {
            learning_rate: 0.0,
            ..zero_init()
        });
        let goal = make_goal(&vocab(), 0, Verb::Grasp, "bed", ["bed", "water", "cow", "tomato"])
            .unwrap();
        let mut rng = stream_rng(4, Stream::Learner);
        for _ in 0..20 {
            rollout_training(&mut learner, &goal, &mut rng);
        }
        assert!(learner.weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn eval_mode_never_mutates_the_learner() {
        let learner = learner_with(QLinearConfig::default());
        let goal = make_goal(&vocab(), 0, Verb::Grasp, "bed", ["bed", "water", "cow", "tomato"])
            .unwrap();
        let version = learner.version();
        let weights = learner.weights().to_vec();
        for _ in 0..50 {
            rollout_greedy(&learner, &goal);
        }
        assert_eq!(learner.version(), version);
        assert_eq!(learner.weights(), weights.as_slice());
    }

    #[test]
    fn repeated_training_on_one_goal_reaches_greedy_success() {
        let mut learner = learner_with(fast_config());
        let goal = make_goal(&vocab(), 0, Verb::Grasp, "cow", ["bed", "water", "cow", "tomato"])
            .unwrap();
        let mut rng = stream_rng(5, Stream::Learner);
        for _ in 0..300 {
            rollout_training(&mut learner, &goal, &mut rng);
        }
        assert!(rollout_greedy(&learner, &goal));
    }

    #[test]
    fn training_on_one_plant_transfers_to_another() {
        let mut learner = learner_with(fast_config());
        let tomato = make_goal(
            &vocab(),
            0,
            Verb::Grow,
            "tomato",
            ["water", "tomato", "bed", "cow"],
        )
        .unwrap();
        let carrot = make_goal(
            &vocab(),
            1,
            Verb::Grow,
            "carrot",
            ["door", "carrot", "water", "deer"],
        )
        .unwrap();
        assert!(
            !rollout_greedy(&learner, &carrot),
            "untrained baseline fails"
        );
        let mut rng = stream_rng(6, Stream::Learner);
        for _ in 0..2000 {
            rollout_training(&mut learner, &tomato, &mut rng);
        }
        assert!(rollout_greedy(&learner, &tomato), "mastered the trained goal");
        assert!(
            rollout_greedy(&learner, &carrot),
            "shared features transfer to the unseen plant"
        );
    }
}
