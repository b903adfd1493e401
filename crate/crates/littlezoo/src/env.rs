//! The Little-Zoo text world.
//!
//! A deterministic, fully observable, episodic environment: four elements on
//! the ground, an agent that moves between them, grasps them into a
//! two-slot inventory and releases them onto each other to trigger
//! grow interactions (water grows a seed, a grown plant grows a baby
//! herbivore, a grown herbivore grows a baby carnivore). Episodes carry a
//! binary reward emitted exactly once, at the transition that achieves the
//! goal, and end on success or when the step budget runs out.
//!
//! The text rendering produced by [`Observation::render`] is normative:
//! learners featurize it and logs store it byte for byte.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::goalspace::CategoryLabel;

/// Number of scene slots in every goal.
pub const SCENE_SLOTS: usize = 4;
/// Inventory capacity ("up to 2 items").
pub const INVENTORY_CAPACITY: usize = 2;
/// Size of the fixed action space.
pub const ACTION_COUNT: usize = 8;

/// The five element categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Furniture,
    Plant,
    Herbivore,
    Carnivore,
    Water,
}

impl ElementKind {
    pub const ALL: [ElementKind; 5] = [
        ElementKind::Furniture,
        ElementKind::Plant,
        ElementKind::Herbivore,
        ElementKind::Carnivore,
        ElementKind::Water,
    ];

    /// Whether elements of this kind can be the object of a `Grow` goal.
    pub fn growable(self) -> bool {
        matches!(
            self,
            ElementKind::Plant | ElementKind::Herbivore | ElementKind::Carnivore
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Furniture => "furniture",
            ElementKind::Plant => "plant",
            ElementKind::Herbivore => "herbivore",
            ElementKind::Carnivore => "carnivore",
            ElementKind::Water => "water",
        }
    }
}

/// Life-cycle state of an element. Furniture and water are always `Plain`;
/// plants are `Seed` or `GrownPlant`; animals are `Baby` or `GrownAnimal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementState {
    Plain,
    Seed,
    GrownPlant,
    Baby,
    GrownAnimal,
}

impl ElementState {
    /// The state an element of `kind` starts an episode in.
    pub fn initial_for(kind: ElementKind) -> ElementState {
        match kind {
            ElementKind::Furniture | ElementKind::Water => ElementState::Plain,
            ElementKind::Plant => ElementState::Seed,
            ElementKind::Herbivore | ElementKind::Carnivore => ElementState::Baby,
        }
    }

    pub fn compatible_with(self, kind: ElementKind) -> bool {
        match kind {
            ElementKind::Furniture | ElementKind::Water => self == ElementState::Plain,
            ElementKind::Plant => matches!(self, ElementState::Seed | ElementState::GrownPlant),
            ElementKind::Herbivore | ElementKind::Carnivore => {
                matches!(self, ElementState::Baby | ElementState::GrownAnimal)
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementState::Plain => "plain",
            ElementState::Seed => "seed",
            ElementState::GrownPlant => "grown_plant",
            ElementState::Baby => "baby",
            ElementState::GrownAnimal => "grown_animal",
        }
    }
}

/// One element of a scene.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
    pub state: ElementState,
}

impl Element {
    /// Text description as it appears in observations: "water",
    /// "bookshelf", "tomato seed" / "tomato", "baby lion" / "lion".
    pub fn describe(&self) -> String {
        match (self.kind, self.state) {
            (ElementKind::Water, _) | (ElementKind::Furniture, _) => self.name.clone(),
            (ElementKind::Plant, ElementState::Seed) => format!("{} seed", self.name),
            (ElementKind::Herbivore | ElementKind::Carnivore, ElementState::Baby) => {
                format!("baby {}", self.name)
            }
            // Grown plants and animals are described by their bare name.
            _ => self.name.clone(),
        }
    }

    pub fn is_grown(&self) -> bool {
        matches!(
            self.state,
            ElementState::GrownPlant | ElementState::GrownAnimal
        )
    }
}

/// Element names grouped by kind. Water always has the single name "water".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    furniture: Vec<String>,
    plants: Vec<String>,
    herbivores: Vec<String>,
    carnivores: Vec<String>,
    water: [String; 1],
}

pub const WATER_NAME: &str = "water";

impl Vocabulary {
    pub fn new(
        furniture: &[&str],
        plants: &[&str],
        herbivores: &[&str],
        carnivores: &[&str],
    ) -> Result<Vocabulary, EnvError> {
        let vocab = Vocabulary {
            furniture: furniture.iter().map(|s| s.to_string()).collect(),
            plants: plants.iter().map(|s| s.to_string()).collect(),
            herbivores: herbivores.iter().map(|s| s.to_string()).collect(),
            carnivores: carnivores.iter().map(|s| s.to_string()).collect(),
            water: [WATER_NAME.to_string()],
        };
        let mut seen: alloc::collections::BTreeSet<&str> =
            [WATER_NAME].iter().copied().collect();
        for name in vocab.all_names_without_water() {
            if !seen.insert(name) {
                return Err(EnvError::MalformedVocabulary(format!(
                    "duplicate element name {name:?}"
                )));
            }
        }
        Ok(vocab)
    }

    /// The default 25-name vocabulary (6 per non-water kind).
    pub fn default_zoo() -> Vocabulary {
        Vocabulary::new(
            &["bookshelf", "desk", "bed", "door", "table", "chair"],
            &["tomato", "carrot", "cucumber", "berry", "pea", "potato"],
            &["cow", "deer", "elephant", "giraffe", "rabbit", "sheep"],
            &["lion", "coyote", "wolf", "bobcat", "grizzly", "fox"],
        )
        .expect("default vocabulary is well formed")
    }

    pub fn names(&self, kind: ElementKind) -> &[String] {
        match kind {
            ElementKind::Furniture => &self.furniture,
            ElementKind::Plant => &self.plants,
            ElementKind::Herbivore => &self.herbivores,
            ElementKind::Carnivore => &self.carnivores,
            ElementKind::Water => &self.water,
        }
    }

    pub fn kind_of(&self, name: &str) -> Option<ElementKind> {
        if name == WATER_NAME {
            return Some(ElementKind::Water);
        }
        for kind in [
            ElementKind::Furniture,
            ElementKind::Plant,
            ElementKind::Herbivore,
            ElementKind::Carnivore,
        ] {
            if self.names(kind).iter().any(|n| n == name) {
                return Some(kind);
            }
        }
        None
    }

    /// Every name in the vocabulary, water included, in a fixed order.
    pub fn all_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.all_names_without_water().collect();
        names.push(WATER_NAME);
        names
    }

    fn all_names_without_water(&self) -> impl Iterator<Item = &str> {
        self.furniture
            .iter()
            .chain(&self.plants)
            .chain(&self.herbivores)
            .chain(&self.carnivores)
            .map(|s| s.as_str())
    }

    pub fn total_names(&self) -> usize {
        1 + self.furniture.len() + self.plants.len() + self.herbivores.len() + self.carnivores.len()
    }

    /// Builds an element in its initial state.
    pub fn element(&self, name: &str) -> Result<Element, EnvError> {
        let kind = self
            .kind_of(name)
            .ok_or_else(|| EnvError::UnknownName(name.to_string()))?;
        Ok(Element {
            name: name.to_string(),
            kind,
            state: ElementState::initial_for(kind),
        })
    }
}

/// Goal verbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verb {
    Grasp,
    Grow,
}

impl Verb {
    pub fn as_str(self) -> &'static str {
        match self {
            Verb::Grasp => "Grasp",
            Verb::Grow => "Grow",
        }
    }
}

/// A goal instruction: verb plus a bare element name ("lion", never
/// "baby lion").
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instruction {
    pub verb: Verb,
    pub target_name: String,
}

impl Instruction {
    pub fn text(&self) -> String {
        format!("{} {}", self.verb.as_str(), self.target_name)
    }
}

/// The four initial scene elements, in slot order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SceneSpec {
    pub slots: [Element; SCENE_SLOTS],
}

impl SceneSpec {
    pub fn from_names(vocab: &Vocabulary, names: [&str; SCENE_SLOTS]) -> Result<SceneSpec, EnvError> {
        Ok(SceneSpec {
            slots: [
                vocab.element(names[0])?,
                vocab.element(names[1])?,
                vocab.element(names[2])?,
                vocab.element(names[3])?,
            ],
        })
    }

    /// Checks initial-state and kind/state compatibility.
    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), EnvError> {
        for element in &self.slots {
            let kind = vocab
                .kind_of(&element.name)
                .ok_or_else(|| EnvError::UnknownName(element.name.clone()))?;
            if kind != element.kind {
                return Err(EnvError::MalformedScene(format!(
                    "element {:?} has kind {:?}, vocabulary says {:?}",
                    element.name, element.kind, kind
                )));
            }
            if element.state != ElementState::initial_for(kind) {
                return Err(EnvError::MalformedScene(format!(
                    "element {:?} must start as {:?}",
                    element.name,
                    ElementState::initial_for(kind)
                )));
            }
        }
        Ok(())
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.slots.iter().any(|e| e.name == name)
    }

    pub fn contains_kind(&self, kind: ElementKind) -> bool {
        self.slots.iter().any(|e| e.kind == kind)
    }
}

/// A goal: instruction + scene, with its classification attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub id: u32,
    pub instruction: Instruction,
    pub scene: SceneSpec,
    pub category: CategoryLabel,
    pub feasible: bool,
}

/// The 8 concrete actions: 4 slot moves, grasp, 2 item releases, release-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    /// Move to the element originally in slot `k` (0..3).
    GoTo(u8),
    /// Pick up the element the agent stands on.
    Grasp,
    /// Release inventory item `j` (0 or 1) onto the stood-on element.
    Release(u8),
    /// Release every interacting inventory item onto the stood-on element.
    ReleaseAll,
}

impl Action {
    pub const ALL: [Action; ACTION_COUNT] = [
        Action::GoTo(0),
        Action::GoTo(1),
        Action::GoTo(2),
        Action::GoTo(3),
        Action::Grasp,
        Action::Release(0),
        Action::Release(1),
        Action::ReleaseAll,
    ];

    pub fn index(self) -> usize {
        match self {
            Action::GoTo(k) => k as usize,
            Action::Grasp => 4,
            Action::Release(j) => 5 + j as usize,
            Action::ReleaseAll => 7,
        }
    }

    pub fn from_index(index: usize) -> Option<Action> {
        Action::ALL.get(index).copied()
    }
}

/// Full mutable episode state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnvState {
    /// Ground elements keyed by original slot; `None` once grasped.
    pub ground: [Option<Element>; SCENE_SLOTS],
    /// Slot index of the element under the agent, if any.
    pub standing_on: Option<u8>,
    /// Carried elements, oldest first.
    pub inventory: Vec<Element>,
    pub steps_taken: u32,
    pub done: bool,
    pub succeeded: bool,
}

impl EnvState {
    pub fn stood_element(&self) -> Option<&Element> {
        self.standing_on
            .and_then(|slot| self.ground[slot as usize].as_ref())
    }
}

/// What the agent sees. The text fields are pure functions of `state`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub goal_text: String,
    pub you_see: Vec<String>,
    pub standing_on: Option<String>,
    pub inventory: Vec<String>,
    pub state: EnvState,
}

impl Observation {
    /// Renders the normative five-line prompt (LF separators, no trailing
    /// newline):
    ///
    /// ```text
    /// Goal: Grow lion
    /// You see: water, carrot seed, baby lion, baby cow
    /// You are standing on: nothing
    /// Inventory (0/2): empty
    /// Action:
    /// ```
    pub fn render(&self) -> String {
        let standing = self.standing_on.as_deref().unwrap_or("nothing");
        let inventory = if self.inventory.is_empty() {
            "empty".to_string()
        } else {
            self.inventory.join(", ")
        };
        format!(
            "Goal: {}\nYou see: {}\nYou are standing on: {}\nInventory ({}/{}): {}\nAction: ",
            self.goal_text,
            self.you_see.join(", "),
            standing,
            self.inventory.len(),
            INVENTORY_CAPACITY,
            inventory,
        )
    }
}

/// The goal+scene lines of the prompt at reset, used by competence
/// estimators to identify a goal.
pub fn goal_prompt(goal: &Goal) -> String {
    let descriptions: Vec<String> = goal.scene.slots.iter().map(Element::describe).collect();
    format!(
        "Goal: {}\nYou see: {}",
        goal.instruction.text(),
        descriptions.join(", ")
    )
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    /// 1.0 exactly at the transition that achieves the goal, else 0.0.
    pub reward: f64,
    pub done: bool,
}

/// Whether releasing `item` onto `target` triggers an interaction, and the
/// target's resulting state.
pub fn interaction(item: &Element, target: &Element) -> Option<ElementState> {
    match (item.kind, item.state, target.kind, target.state) {
        (ElementKind::Water, _, ElementKind::Plant, ElementState::Seed) => {
            Some(ElementState::GrownPlant)
        }
        (
            ElementKind::Plant,
            ElementState::GrownPlant,
            ElementKind::Herbivore,
            ElementState::Baby,
        ) => Some(ElementState::GrownAnimal),
        (
            ElementKind::Herbivore,
            ElementState::GrownAnimal,
            ElementKind::Carnivore,
            ElementState::Baby,
        ) => Some(ElementState::GrownAnimal),
        _ => None,
    }
}

/// Minimal number of expert actions for a feasible category.
pub fn minimal_steps(category: CategoryLabel) -> Option<u32> {
    match category {
        CategoryLabel::Grasp => Some(2),
        CategoryLabel::GrowPlant => Some(4),
        CategoryLabel::GrowHerbivore => Some(7),
        CategoryLabel::GrowCarnivore => Some(10),
        CategoryLabel::Impossible => None,
    }
}

/// Step budget for a feasible category (150% of the minimum, rounded up).
pub fn step_budget(category: CategoryLabel) -> Option<u32> {
    match category {
        CategoryLabel::Grasp => Some(3),
        CategoryLabel::GrowPlant => Some(6),
        CategoryLabel::GrowHerbivore => Some(11),
        CategoryLabel::GrowCarnivore => Some(15),
        CategoryLabel::Impossible => None,
    }
}

/// Step budget derived from the instruction shape alone, so impossible
/// goals get the budget of the category they syntactically mimic.
pub fn step_budget_for(instruction: &Instruction, vocab: &Vocabulary) -> Result<u32, EnvError> {
    let kind = vocab
        .kind_of(&instruction.target_name)
        .ok_or_else(|| EnvError::UnknownName(instruction.target_name.clone()))?;
    Ok(match (instruction.verb, kind) {
        (Verb::Grasp, _) => 3,
        (Verb::Grow, ElementKind::Plant) => 6,
        (Verb::Grow, ElementKind::Herbivore) => 11,
        (Verb::Grow, ElementKind::Carnivore) => 15,
        (Verb::Grow, ElementKind::Furniture | ElementKind::Water) => 15,
    })
}

/// Environment errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvError {
    MalformedVocabulary(String),
    MalformedScene(String),
    UnknownName(String),
    /// `step` was called on a finished episode.
    EpisodeFinished,
    /// The scripted expert was asked to act on an infeasible goal.
    InfeasibleGoal,
}

impl core::fmt::Display for EnvError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EnvError::MalformedVocabulary(msg) => write!(f, "malformed vocabulary: {msg}"),
            EnvError::MalformedScene(msg) => write!(f, "malformed scene: {msg}"),
            EnvError::UnknownName(name) => write!(f, "unknown element name {name:?}"),
            EnvError::EpisodeFinished => write!(f, "episode is already finished"),
            EnvError::InfeasibleGoal => write!(f, "scripted expert requires a feasible goal"),
        }
    }
}

impl core::error::Error for EnvError {}

/// One episode of Little-Zoo, owning the goal and the evolving state.
#[derive(Debug, Clone)]
pub struct Episode {
    goal: Goal,
    budget: u32,
    state: EnvState,
}

impl Episode {
    /// Validates the goal's scene and initializes the episode.
    pub fn new(goal: &Goal, vocab: &Vocabulary) -> Result<Episode, EnvError> {
        goal.scene.validate(vocab)?;
        let budget = step_budget_for(&goal.instruction, vocab)?;
        let mut episode = Episode {
            goal: goal.clone(),
            budget,
            state: EnvState {
                ground: [None, None, None, None],
                standing_on: None,
                inventory: Vec::new(),
                steps_taken: 0,
                done: false,
                succeeded: false,
            },
        };
        episode.reset();
        Ok(episode)
    }

    /// Restores the initial state and returns the first observation.
    pub fn reset(&mut self) -> Observation {
        self.state = EnvState {
            ground: [
                Some(self.goal.scene.slots[0].clone()),
                Some(self.goal.scene.slots[1].clone()),
                Some(self.goal.scene.slots[2].clone()),
                Some(self.goal.scene.slots[3].clone()),
            ],
            standing_on: None,
            inventory: Vec::new(),
            steps_taken: 0,
            done: false,
            succeeded: false,
        };
        self.observation()
    }

    pub fn goal(&self) -> &Goal {
        &self.goal
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    /// Swaps in an externally held state (breadth-first search support).
    pub(crate) fn set_state(&mut self, state: EnvState) {
        self.state = state;
    }

    /// The subset of the 8 actions whose preconditions hold, in action-index
    /// order.
    pub fn legal_actions(&self) -> Vec<Action> {
        legal_actions(&self.state)
    }

    /// Applies `action`. Illegal actions are no-ops that still consume a
    /// step.
    pub fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        if self.state.done {
            return Err(EnvError::EpisodeFinished);
        }
        let mut achieved = false;
        match action {
            Action::GoTo(slot) => {
                if self.state.ground[slot as usize].is_some() {
                    self.state.standing_on = Some(slot);
                }
            }
            Action::Grasp => {
                if let Some(slot) = self.state.standing_on {
                    if self.state.inventory.len() < INVENTORY_CAPACITY
                        && self.state.ground[slot as usize].is_some()
                    {
                        let element = self.state.ground[slot as usize].take().unwrap();
                        self.state.standing_on = None;
                        if self.goal.instruction.verb == Verb::Grasp
                            && element.name == self.goal.instruction.target_name
                        {
                            achieved = true;
                        }
                        self.state.inventory.push(element);
                    }
                }
            }
            Action::Release(item) => {
                if let Some(goal_reached) = self.release_one(item as usize) {
                    achieved |= goal_reached;
                }
            }
            Action::ReleaseAll => {
                // Applies interactions in inventory order, re-checking each
                // item against the (possibly transformed) target;
                // non-interacting items stay in the inventory.
                if self.stood_interaction_exists() {
                    let mut index = 0;
                    while index < self.state.inventory.len() {
                        match self.release_one(index) {
                            // Removal shifted the next item into `index`.
                            Some(goal_reached) => achieved |= goal_reached,
                            None => index += 1,
                        }
                    }
                }
            }
        }
        self.state.steps_taken += 1;
        let reward = if achieved && !self.state.succeeded {
            self.state.succeeded = true;
            1.0
        } else {
            0.0
        };
        self.state.done = self.state.succeeded || self.state.steps_taken >= self.budget;
        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.state.done,
        })
    }

    /// Releases inventory item `index` if it interacts with the stood-on
    /// element. `None` when no interaction applies; otherwise whether the
    /// interaction achieved the goal.
    fn release_one(&mut self, index: usize) -> Option<bool> {
        let slot = self.state.standing_on?;
        let item = self.state.inventory.get(index)?;
        let target = self.state.ground[slot as usize].as_ref()?;
        let new_state = interaction(item, target)?;
        self.state.inventory.remove(index);
        let target = self.state.ground[slot as usize].as_mut().unwrap();
        target.state = new_state;
        Some(
            self.goal.instruction.verb == Verb::Grow
                && target.name == self.goal.instruction.target_name
                && target.is_grown(),
        )
    }

    fn stood_interaction_exists(&self) -> bool {
        let Some(target) = self.state.stood_element() else {
            return false;
        };
        self.state
            .inventory
            .iter()
            .any(|item| interaction(item, target).is_some())
    }

    pub fn observation(&self) -> Observation {
        let you_see: Vec<String> = self
            .state
            .ground
            .iter()
            .flatten()
            .map(Element::describe)
            .collect();
        Observation {
            goal_text: self.goal.instruction.text(),
            you_see,
            standing_on: self.state.stood_element().map(Element::describe),
            inventory: self.state.inventory.iter().map(Element::describe).collect(),
            state: self.state.clone(),
        }
    }
}

/// The subset of the 8 actions whose preconditions hold in `state`.
///
/// The set can be empty: grasping the last ground elements with a full
/// inventory leaves nothing to move to, grasp or release onto. Such dead
/// states only burn the remaining budget through no-op steps.
pub fn legal_actions(state: &EnvState) -> Vec<Action> {
    let mut legal = Vec::with_capacity(ACTION_COUNT);
    for slot in 0..SCENE_SLOTS {
        if state.ground[slot].is_some() {
            legal.push(Action::GoTo(slot as u8));
        }
    }
    if state.standing_on.is_some() && state.inventory.len() < INVENTORY_CAPACITY {
        legal.push(Action::Grasp);
    }
    if let Some(target) = state.stood_element() {
        for (index, item) in state.inventory.iter().enumerate() {
            if interaction(item, target).is_some() {
                legal.push(Action::Release(index as u8));
            }
        }
        if state
            .inventory
            .iter()
            .any(|item| interaction(item, target).is_some())
        {
            legal.push(Action::ReleaseAll);
        }
    }
    legal.sort_by_key(|a| a.index());
    legal
}

/// Next action of the scripted optimal strategy for a feasible goal.
///
/// Resumable: any state reached from reset by expert play maps to the next
/// optimal action.
pub fn expert_action(state: &EnvState, goal: &Goal) -> Result<Action, EnvError> {
    if !goal.feasible {
        return Err(EnvError::InfeasibleGoal);
    }
    let target = goal.instruction.target_name.as_str();
    Ok(match goal.category {
        CategoryLabel::Grasp => {
            let slot = find_slot(state, |e| e.name == target).expect("grasp target on ground");
            go_or(state, slot, Action::Grasp)
        }
        CategoryLabel::GrowPlant => grow_plant_action(state, |e| e.name == target),
        CategoryLabel::GrowHerbivore => grow_herbivore_action(state, |e| e.name == target),
        CategoryLabel::GrowCarnivore => {
            // Carry a grown herbivore to the baby carnivore; grow one first
            // if needed.
            if let Some(index) = inventory_index(state, |e| {
                e.kind == ElementKind::Herbivore && e.state == ElementState::GrownAnimal
            }) {
                let slot = find_slot(state, |e| e.name == target).expect("carnivore on ground");
                go_or(state, slot, Action::Release(index as u8))
            } else if let Some(slot) = find_slot(state, |e| {
                e.kind == ElementKind::Herbivore && e.state == ElementState::GrownAnimal
            }) {
                go_or(state, slot, Action::Grasp)
            } else {
                grow_herbivore_action(state, |e| e.kind == ElementKind::Herbivore)
            }
        }
        CategoryLabel::Impossible => unreachable!("feasible goals are never Impossible"),
    })
}

fn grow_herbivore_action(state: &EnvState, is_target: impl Fn(&Element) -> bool) -> Action {
    if let Some(index) = inventory_index(state, |e| {
        e.kind == ElementKind::Plant && e.state == ElementState::GrownPlant
    }) {
        let slot = find_slot(state, |e| {
            is_target(e) && e.kind == ElementKind::Herbivore && e.state == ElementState::Baby
        })
        .expect("baby herbivore on ground");
        go_or(state, slot, Action::Release(index as u8))
    } else if let Some(slot) = find_slot(state, |e| {
        e.kind == ElementKind::Plant && e.state == ElementState::GrownPlant
    }) {
        go_or(state, slot, Action::Grasp)
    } else {
        grow_plant_action(state, |e| e.kind == ElementKind::Plant)
    }
}

fn grow_plant_action(state: &EnvState, is_target: impl Fn(&Element) -> bool) -> Action {
    if let Some(index) = inventory_index(state, |e| e.kind == ElementKind::Water) {
        let slot = find_slot(state, |e| {
            is_target(e) && e.kind == ElementKind::Plant && e.state == ElementState::Seed
        })
        .expect("plant seed on ground");
        go_or(state, slot, Action::Release(index as u8))
    } else {
        let slot =
            find_slot(state, |e| e.kind == ElementKind::Water).expect("water on ground");
        go_or(state, slot, Action::Grasp)
    }
}

fn go_or(state: &EnvState, slot: usize, action: Action) -> Action {
    if state.standing_on == Some(slot as u8) {
        action
    } else {
        Action::GoTo(slot as u8)
    }
}

fn find_slot(state: &EnvState, predicate: impl Fn(&Element) -> bool) -> Option<usize> {
    state
        .ground
        .iter()
        .position(|e| e.as_ref().is_some_and(&predicate))
}

fn inventory_index(state: &EnvState, predicate: impl Fn(&Element) -> bool) -> Option<usize> {
    state.inventory.iter().position(predicate)
}
