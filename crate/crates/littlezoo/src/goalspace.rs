//! Goal-space enumeration, classification, sampling and the brute-force
//! feasibility oracle.
//!
//! A goal pairs an instruction ("Grasp X" / "Grow X") with a four-element
//! scene; the target element need not be in the scene, which is why the
//! overwhelming majority of the combinatorial space is impossible.
//! [`classify`] assigns the category and, for impossible goals, the first
//! failing prerequisite. [`bfs_success_depth`] is an independent oracle: a
//! breadth-first search driving the real environment dynamics within the
//! step budget.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::env::{
    ElementKind, EnvError, Episode, Goal, Instruction, SceneSpec, Verb, Vocabulary, SCENE_SLOTS,
};

/// The five expert buckets goals are grouped into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CategoryLabel {
    Impossible,
    Grasp,
    GrowPlant,
    GrowHerbivore,
    GrowCarnivore,
}

impl CategoryLabel {
    pub const ALL: [CategoryLabel; 5] = [
        CategoryLabel::Impossible,
        CategoryLabel::Grasp,
        CategoryLabel::GrowPlant,
        CategoryLabel::GrowHerbivore,
        CategoryLabel::GrowCarnivore,
    ];

    pub fn index(self) -> usize {
        match self {
            CategoryLabel::Impossible => 0,
            CategoryLabel::Grasp => 1,
            CategoryLabel::GrowPlant => 2,
            CategoryLabel::GrowHerbivore => 3,
            CategoryLabel::GrowCarnivore => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CategoryLabel::Impossible => "impossible",
            CategoryLabel::Grasp => "grasp",
            CategoryLabel::GrowPlant => "grow_plant",
            CategoryLabel::GrowHerbivore => "grow_herbivore",
            CategoryLabel::GrowCarnivore => "grow_carnivore",
        }
    }

    pub fn from_str(s: &str) -> Option<CategoryLabel> {
        CategoryLabel::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// Why a goal is impossible. Checks run in a fixed order, so the reported
/// reason is the first failing prerequisite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InfeasibilityReason {
    /// The element to act on is absent from the scene.
    MissingTarget,
    /// Growing furniture or water.
    GrowNonGrowable,
    MissingWater,
    MissingPlant,
    MissingHerbivore,
}

impl InfeasibilityReason {
    pub fn as_str(self) -> &'static str {
        match self {
            InfeasibilityReason::MissingTarget => "missing_target",
            InfeasibilityReason::GrowNonGrowable => "grow_non_growable",
            InfeasibilityReason::MissingWater => "missing_water",
            InfeasibilityReason::MissingPlant => "missing_plant",
            InfeasibilityReason::MissingHerbivore => "missing_herbivore",
        }
    }

    pub fn from_str(s: &str) -> Option<InfeasibilityReason> {
        [
            InfeasibilityReason::MissingTarget,
            InfeasibilityReason::GrowNonGrowable,
            InfeasibilityReason::MissingWater,
            InfeasibilityReason::MissingPlant,
            InfeasibilityReason::MissingHerbivore,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

/// Rule-based category and infeasibility reason for an instruction/scene
/// pair. `reason` is `None` exactly when the goal is feasible.
pub fn classify(
    instruction: &Instruction,
    scene: &SceneSpec,
    vocab: &Vocabulary,
) -> Result<(CategoryLabel, Option<InfeasibilityReason>), EnvError> {
    let target = instruction.target_name.as_str();
    let target_kind = vocab
        .kind_of(target)
        .ok_or_else(|| EnvError::UnknownName(instruction.target_name.clone()))?;
    let impossible = |reason| Ok((CategoryLabel::Impossible, Some(reason)));
    match instruction.verb {
        Verb::Grasp => {
            if scene.contains_name(target) {
                Ok((CategoryLabel::Grasp, None))
            } else {
                impossible(InfeasibilityReason::MissingTarget)
            }
        }
        Verb::Grow => match target_kind {
            ElementKind::Furniture | ElementKind::Water => {
                impossible(InfeasibilityReason::GrowNonGrowable)
            }
            ElementKind::Plant => {
                if !scene.contains_name(target) {
                    impossible(InfeasibilityReason::MissingTarget)
                } else if !scene.contains_kind(ElementKind::Water) {
                    impossible(InfeasibilityReason::MissingWater)
                } else {
                    Ok((CategoryLabel::GrowPlant, None))
                }
            }
            ElementKind::Herbivore => {
                if !scene.contains_name(target) {
                    impossible(InfeasibilityReason::MissingTarget)
                } else if !scene.contains_kind(ElementKind::Water) {
                    impossible(InfeasibilityReason::MissingWater)
                } else if !scene.contains_kind(ElementKind::Plant) {
                    impossible(InfeasibilityReason::MissingPlant)
                } else {
                    Ok((CategoryLabel::GrowHerbivore, None))
                }
            }
            ElementKind::Carnivore => {
                if !scene.contains_name(target) {
                    impossible(InfeasibilityReason::MissingTarget)
                } else if !scene.contains_kind(ElementKind::Water) {
                    impossible(InfeasibilityReason::MissingWater)
                } else if !scene.contains_kind(ElementKind::Plant) {
                    impossible(InfeasibilityReason::MissingPlant)
                } else if !scene.contains_kind(ElementKind::Herbivore) {
                    impossible(InfeasibilityReason::MissingHerbivore)
                } else {
                    Ok((CategoryLabel::GrowCarnivore, None))
                }
            }
        },
    }
}

/// Builds a classified goal from names. The single construction path keeps
/// `category` and `feasible` consistent by construction.
pub fn make_goal(
    vocab: &Vocabulary,
    id: u32,
    verb: Verb,
    target: &str,
    scene_names: [&str; SCENE_SLOTS],
) -> Result<Goal, EnvError> {
    let instruction = Instruction {
        verb,
        target_name: {
            vocab
                .kind_of(target)
                .ok_or_else(|| EnvError::UnknownName(String::from(target)))?;
            String::from(target)
        },
    };
    let scene = SceneSpec::from_names(vocab, scene_names)?;
    let (category, reason) = classify(&instruction, &scene, vocab)?;
    debug_assert_eq!(reason.is_none(), category != CategoryLabel::Impossible);
    Ok(Goal {
        id,
        instruction,
        scene,
        category,
        feasible: reason.is_none(),
    })
}

/// Total size of the combinatorial goal space: 2 verbs x n targets x n^4
/// ordered scenes, for a vocabulary of n names.
pub fn total_goal_count(vocab: &Vocabulary) -> u64 {
    combination_count(vocab.total_names())
}

pub fn combination_count(total_names: usize) -> u64 {
    2 * (total_names as u64).pow(5)
}

/// Depth (in steps) of the shallowest successful state reachable from
/// reset within the goal's budget, searching only legal actions. Illegal
/// actions are no-ops and can never produce a success, so this is
/// exhaustive.
pub fn bfs_success_depth(goal: &Goal, vocab: &Vocabulary) -> Result<Option<u32>, EnvError> {
    let episode = Episode::new(goal, vocab)?;
    let budget = episode.budget();
    bfs_success_depth_bounded(goal, vocab, budget)
}

/// [`bfs_success_depth`] with an explicit depth bound.
pub fn bfs_success_depth_bounded(
    goal: &Goal,
    vocab: &Vocabulary,
    budget: u32,
) -> Result<Option<u32>, EnvError> {
    let mut episode = Episode::new(goal, vocab)?;
    let mut frontier = Vec::new();
    let mut visited = BTreeSet::new();
    frontier.push(episode.state().clone());
    visited.insert(config_key(episode.state()));
    for depth in 0..budget {
        let mut next = Vec::new();
        for state in &frontier {
            episode.set_state(state.clone());
            for action in episode.legal_actions() {
                episode.set_state(state.clone());
                let result = episode
                    .step(action)
                    .expect("frontier states are unfinished");
                if episode.state().succeeded {
                    return Ok(Some(depth + 1));
                }
                if !result.done && visited.insert(config_key(episode.state())) {
                    next.push(episode.state().clone());
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(None)
}

/// Whether any action sequence within the budget achieves the goal.
pub fn feasible_bfs(goal: &Goal, vocab: &Vocabulary) -> Result<bool, EnvError> {
    Ok(bfs_success_depth(goal, vocab)?.is_some())
}

/// Dedup key for BFS: everything but the step counter and termination
/// flags, so the first visit to a configuration is at its minimal depth.
fn config_key(state: &crate::env::EnvState) -> impl Ord {
    (
        state.ground.clone(),
        state.standing_on,
        state.inventory.clone(),
    )
}

/// Per-category proportions of a generated space.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryProportions {
    pub impossible: f64,
    pub grasp: f64,
    pub grow_plant: f64,
    pub grow_herbivore: f64,
    pub grow_carnivore: f64,
}

impl Default for CategoryProportions {
    fn default() -> Self {
        CategoryProportions {
            impossible: 0.80,
            grasp: 0.16,
            grow_plant: 0.032,
            grow_herbivore: 0.007,
            grow_carnivore: 0.001,
        }
    }
}

impl CategoryProportions {
    pub fn get(&self, category: CategoryLabel) -> f64 {
        match category {
            CategoryLabel::Impossible => self.impossible,
            CategoryLabel::Grasp => self.grasp,
            CategoryLabel::GrowPlant => self.grow_plant,
            CategoryLabel::GrowHerbivore => self.grow_herbivore,
            CategoryLabel::GrowCarnivore => self.grow_carnivore,
        }
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        let sum: f64 = CategoryLabel::ALL.iter().map(|c| self.get(*c)).sum();
        if CategoryLabel::ALL.iter().any(|c| self.get(*c) < 0.0) {
            return Err(GenerateError::BadConfig(format!(
                "negative category proportion in {self:?}"
            )));
        }
        if crate::maths::abs(sum - 1.0) > 1e-9 {
            return Err(GenerateError::BadConfig(format!(
                "category proportions sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    /// Integer quotas for `total` goals: non-impossible categories floor,
    /// the impossible category absorbs the remainder.
    pub fn quotas(&self, total: usize) -> [usize; 5] {
        let mut quotas = [0usize; 5];
        let mut assigned = 0;
        for category in CategoryLabel::ALL.iter().skip(1) {
            let quota = crate::maths::floor(self.get(*category) * total as f64) as usize;
            quotas[category.index()] = quota;
            assigned += quota;
        }
        quotas[CategoryLabel::Impossible.index()] = total - assigned;
        quotas
    }
}

/// Configuration echoed into every generated space.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub total_goals: usize,
    pub test_goals: usize,
    pub proportions: CategoryProportions,
    pub rng_seed: u64,
}

impl GenerationConfig {
    pub fn new(total_goals: usize, test_goals: usize, rng_seed: u64) -> GenerationConfig {
        GenerationConfig {
            total_goals,
            test_goals,
            proportions: CategoryProportions::default(),
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        self.proportions.validate()?;
        for (total, label) in [(self.total_goals, "train"), (self.test_goals, "test")] {
            if total == 0 && label == "train" {
                return Err(GenerateError::BadConfig("total_goals must be >= 1".into()));
            }
            if total == 0 {
                continue;
            }
            let quotas = self.proportions.quotas(total);
            for category in CategoryLabel::ALL {
                if self.proportions.get(category) > 0.0 && quotas[category.index()] == 0 {
                    return Err(GenerateError::BadConfig(format!(
                        "{label} size {total} leaves no goals for category {}",
                        category.as_str()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Train/test membership of a goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    pub fn from_str(s: &str) -> Option<Split> {
        match s {
            "train" => Some(Split::Train),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

/// Goal-space generation errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenerateError {
    BadConfig(String),
    /// Rejection sampling stalled; the vocabulary cannot fill a quota.
    QuotaUnreachable(CategoryLabel),
    Env(EnvError),
}

impl core::fmt::Display for GenerateError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GenerateError::BadConfig(msg) => write!(f, "bad generation config: {msg}"),
            GenerateError::QuotaUnreachable(category) => write!(
                f,
                "cannot fill the {} quota from this vocabulary",
                category.as_str()
            ),
            GenerateError::Env(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for GenerateError {}

impl From<EnvError> for GenerateError {
    fn from(e: EnvError) -> Self {
        GenerateError::Env(e)
    }
}

/// A generated train/test goal collection.
#[derive(Debug, Clone)]
pub struct GoalSpace {
    vocabulary: Vocabulary,
    config: GenerationConfig,
    goals: Vec<Goal>,
    split: Vec<Split>,
    train_ids: Vec<u32>,
    test_ids: Vec<u32>,
    /// Train goal ids per category index.
    train_by_category: [Vec<u32>; 5],
    test_by_category: [Vec<u32>; 5],
}

impl GoalSpace {
    /// Assembles a space from parts, rebuilding the derived indexes.
    /// `goals[i].id` must equal `i`.
    pub fn from_parts(
        vocabulary: Vocabulary,
        config: GenerationConfig,
        goals: Vec<Goal>,
        split: Vec<Split>,
    ) -> Result<GoalSpace, GenerateError> {
        if goals.len() != split.len() {
            return Err(GenerateError::BadConfig(
                "goals and split lengths differ".into(),
            ));
        }
        for (index, goal) in goals.iter().enumerate() {
            if goal.id as usize != index {
                return Err(GenerateError::BadConfig(format!(
                    "goal ids must be dense: found {} at position {index}",
                    goal.id
                )));
            }
        }
        let mut space = GoalSpace {
            vocabulary,
            config,
            goals,
            split,
            train_ids: Vec::new(),
            test_ids: Vec::new(),
            train_by_category: Default::default(),
            test_by_category: Default::default(),
        };
        for (index, goal) in space.goals.iter().enumerate() {
            let id = index as u32;
            match space.split[index] {
                Split::Train => {
                    space.train_ids.push(id);
                    space.train_by_category[goal.category.index()].push(id);
                }
                Split::Test => {
                    space.test_ids.push(id);
                    space.test_by_category[goal.category.index()].push(id);
                }
            }
        }
        Ok(space)
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn config(&self) -> &GenerationConfig {
        &self.config
    }

    pub fn goals(&self) -> &[Goal] {
        &self.goals
    }

    pub fn goal(&self, id: u32) -> &Goal {
        &self.goals[id as usize]
    }

    pub fn split_of(&self, id: u32) -> Split {
        self.split[id as usize]
    }

    pub fn train_ids(&self) -> &[u32] {
        &self.train_ids
    }

    pub fn test_ids(&self) -> &[u32] {
        &self.test_ids
    }

    pub fn ids_by_category(&self, split: Split, category: CategoryLabel) -> &[u32] {
        match split {
            Split::Train => &self.train_by_category[category.index()],
            Split::Test => &self.test_by_category[category.index()],
        }
    }

    /// A new space whose train split is this space's test split; the
    /// goal-space-swap used by adaptation experiments.
    pub fn swapped_to_test(&self) -> GoalSpace {
        let mut goals = Vec::with_capacity(self.test_ids.len());
        for (new_id, &old_id) in self.test_ids.iter().enumerate() {
            let mut goal = self.goal(old_id).clone();
            goal.id = new_id as u32;
            goals.push(goal);
        }
        let split = alloc::vec![Split::Train; goals.len()];
        GoalSpace::from_parts(self.vocabulary.clone(), self.config.clone(), goals, split)
            .expect("swapped space is well formed")
    }
}

/// Compact dedup key over (instruction, scene) identity.
type GoalKey = (u8, String, [String; SCENE_SLOTS]);

fn goal_key(verb: Verb, target: &str, names: &[String; SCENE_SLOTS]) -> GoalKey {
    (
        matches!(verb, Verb::Grow) as u8,
        String::from(target),
        names.clone(),
    )
}

/// Rejection-samples goals uniformly from the combinatorial space per
/// category until every quota is met, for train and test separately.
/// Scene slots are drawn with distinct names; no (instruction, scene) pair
/// repeats within or across splits.
pub fn generate<R: Rng>(
    config: &GenerationConfig,
    vocab: &Vocabulary,
    train_rng: &mut R,
    test_rng: &mut R,
) -> Result<GoalSpace, GenerateError> {
    config.validate()?;
    if vocab.total_names() < SCENE_SLOTS {
        return Err(GenerateError::BadConfig(
            "vocabulary too small for distinct scene slots".into(),
        ));
    }
    let mut used: BTreeSet<GoalKey> = BTreeSet::new();
    let mut goals = Vec::with_capacity(config.total_goals + config.test_goals);
    let mut split = Vec::with_capacity(goals.capacity());
    for (split_label, total, rng) in [
        (Split::Train, config.total_goals, &mut *train_rng),
        (Split::Test, config.test_goals, &mut *test_rng),
    ] {
        let mut need = config.proportions.quotas(total);
        let mut remaining: usize = need.iter().sum();
        let mut rejections: u64 = 0;
        while remaining > 0 {
            let (verb, target, names) = sample_candidate(vocab, rng);
            let scene = SceneSpec::from_names(
                vocab,
                [
                    names[0].as_str(),
                    names[1].as_str(),
                    names[2].as_str(),
                    names[3].as_str(),
                ],
            )?;
            let instruction = Instruction {
                verb,
                target_name: target.clone(),
            };
            let (category, reason) = classify(&instruction, &scene, vocab)?;
            if need[category.index()] > 0 && used.insert(goal_key(verb, &target, &names)) {
                need[category.index()] -= 1;
                remaining -= 1;
                rejections = 0;
                goals.push(Goal {
                    id: goals.len() as u32,
                    instruction,
                    scene,
                    category,
                    feasible: reason.is_none(),
                });
                split.push(split_label);
            } else {
                rejections += 1;
                if rejections > 2_000_000 {
                    let stuck = CategoryLabel::ALL
                        .into_iter()
                        .find(|c| need[c.index()] > 0)
                        .unwrap_or(CategoryLabel::Impossible);
                    return Err(GenerateError::QuotaUnreachable(stuck));
                }
            }
        }
    }
    GoalSpace::from_parts(vocab.clone(), config.clone(), goals, split)
}

/// One uniform draw from the combinatorial space (distinct scene names).
fn sample_candidate<R: Rng>(
    vocab: &Vocabulary,
    rng: &mut R,
) -> (Verb, String, [String; SCENE_SLOTS]) {
    let all_names = vocab.all_names();
    let verb = if rng.random::<f64>() < 0.5 {
        Verb::Grasp
    } else {
        Verb::Grow
    };
    let target = all_names[rng.random_range(0..all_names.len())];
    // Partial Fisher-Yates for four distinct names.
    let mut indices: Vec<usize> = (0..all_names.len()).collect();
    let mut names: [String; SCENE_SLOTS] = Default::default();
    for (slot, name) in names.iter_mut().enumerate() {
        let pick = rng.random_range(slot..indices.len());
        indices.swap(slot, pick);
        *name = String::from(all_names[indices[slot]]);
    }
    (verb, String::from(target), names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::minimal_steps;
    use crate::rngs::{stream_rng, Stream};

    fn vocab() -> Vocabulary {
        Vocabulary::default_zoo()
    }

    fn classify_names(
        verb: Verb,
        target: &str,
        scene: [&str; 4],
    ) -> (CategoryLabel, Option<InfeasibilityReason>) {
        let v = vocab();
        let instruction = Instruction {
            verb,
            target_name: String::from(target),
        };
        let scene = SceneSpec::from_names(&v, scene).unwrap();
        classify(&instruction, &scene, &v).unwrap()
    }

    #[test]
    fn default_vocabulary_spans_the_full_space() {
        assert_eq!(vocab().total_names(), 25);
        assert_eq!(total_goal_count(&vocab()), 19_531_250);
    }

    #[test]
    fn combination_count_follows_the_formula() {
        assert_eq!(combination_count(5), 6_250);
        assert_eq!(combination_count(0), 0);
    }

    #[test]
    fn classify_matches_the_documented_examples() {
        assert_eq!(
            classify_names(Verb::Grasp, "rabbit", ["bookshelf", "lion", "desk", "cow"]),
            (
                CategoryLabel::Impossible,
                Some(InfeasibilityReason::MissingTarget)
            )
        );
        assert_eq!(
            classify_names(Verb::Grow, "coyote", ["water", "elephant", "coyote", "cow"]),
            (
                CategoryLabel::Impossible,
                Some(InfeasibilityReason::MissingPlant)
            )
        );
        assert_eq!(
            classify_names(Verb::Grow, "deer", ["deer", "bookshelf", "water", "tomato"]),
            (CategoryLabel::GrowHerbivore, None)
        );
        assert_eq!(
            classify_names(Verb::Grow, "desk", ["bed", "bobcat", "elephant", "door"]),
            (
                CategoryLabel::Impossible,
                Some(InfeasibilityReason::GrowNonGrowable)
            )
        );
    }

    #[test]
    fn classify_reports_the_first_failing_check() {
        // Missing target dominates missing water.
        assert_eq!(
            classify_names(Verb::Grow, "pea", ["tomato", "carrot", "coyote", "wolf"]),
            (
                CategoryLabel::Impossible,
                Some(InfeasibilityReason::MissingTarget)
            )
        );
        // Water missing before the plant check for a carnivore.
        assert_eq!(
            classify_names(Verb::Grow, "wolf", ["wolf", "cow", "desk", "door"]),
            (
                CategoryLabel::Impossible,
                Some(InfeasibilityReason::MissingWater)
            )
        );
        // All but the herbivore present.
        assert_eq!(
            classify_names(Verb::Grow, "wolf", ["wolf", "water", "tomato", "door"]),
            (
                CategoryLabel::Impossible,
                Some(InfeasibilityReason::MissingHerbivore)
            )
        );
    }

    #[test]
    fn bfs_agrees_with_classify_on_documented_cases() {
        let v = vocab();
        let lacking_water = make_goal(
            &v,
            0,
            Verb::Grow,
            "cucumber",
            ["cucumber", "carrot", "coyote", "wolf"],
        )
        .unwrap();
        assert!(!feasible_bfs(&lacking_water, &v).unwrap());

        let carnivore = make_goal(&v, 1, Verb::Grow, "lion", ["water", "carrot", "lion", "cow"])
            .unwrap();
        assert_eq!(bfs_success_depth(&carnivore, &v).unwrap(), Some(10));
    }

    #[test]
    fn bfs_success_depth_equals_expert_minimum_on_samples() {
        let v = vocab();
        let space = crate::testutil::small_space(120, 0, 11);
        for goal in space.goals() {
            let depth = bfs_success_depth(goal, &v).unwrap();
            assert_eq!(depth.is_some(), goal.feasible, "goal {:?}", goal.instruction);
            if let Some(depth) = depth {
                assert_eq!(Some(depth), minimal_steps(goal.category));
            }
        }
    }

    #[test]
    fn generation_hits_exact_quotas_and_is_seeded() {
        let config = GenerationConfig::new(1000, 1000, 5);
        let v = vocab();
        let build = || {
            let mut train = stream_rng(5, Stream::GenerateTrain);
            let mut test = stream_rng(5, Stream::GenerateTest);
            generate(&config, &v, &mut train, &mut test).unwrap()
        };
        let space = build();
        let again = build();
        assert_eq!(space.goals(), again.goals());
        let quotas = config.proportions.quotas(1000);
        for category in CategoryLabel::ALL {
            assert_eq!(
                space.ids_by_category(Split::Train, category).len(),
                quotas[category.index()],
                "{}",
                category.as_str()
            );
        }
        // Train/test disjoint by construction.
        let keys: BTreeSet<GoalKey> = space
            .goals()
            .iter()
            .map(|g| {
                let names: [String; 4] = core::array::from_fn(|i| g.scene.slots[i].name.clone());
                goal_key(g.instruction.verb, &g.instruction.target_name, &names)
            })
            .collect();
        assert_eq!(keys.len(), space.goals().len());
    }

    #[test]
    fn quota_example_for_twenty_five_thousand() {
        let proportions = CategoryProportions::default();
        assert_eq!(proportions.quotas(25_000), [20_000, 4_000, 800, 175, 25]);
    }

    #[test]
    fn zero_depth_search_finds_nothing() {
        let v = vocab();
        let goal =
            make_goal(&v, 0, Verb::Grasp, "bed", ["bed", "water", "cow", "tomato"]).unwrap();
        assert_eq!(bfs_success_depth_bounded(&goal, &v, 0).unwrap(), None);
        assert_eq!(bfs_success_depth(&goal, &v).unwrap(), Some(2));
    }

    #[test]
    fn quota_unreachable_reports_an_error() {
        // A single-name-per-kind vocabulary has only 5 * 4! = 600 distinct
        // grasp combinations; asking for thousands must fail, not spin.
        let tiny = Vocabulary::new(&["desk"], &["pea"], &["cow"], &["fox"]).unwrap();
        let config = GenerationConfig {
            total_goals: 5_000,
            test_goals: 0,
            proportions: CategoryProportions::default(),
            rng_seed: 0,
        };
        let mut train = stream_rng(0, Stream::GenerateTrain);
        let mut test = stream_rng(0, Stream::GenerateTest);
        let result = generate(&config, &tiny, &mut train, &mut test);
        assert!(matches!(result, Err(GenerateError::QuotaUnreachable(_))));
    }
}
