//! Goal-space persistence: JSON lines, one record per line.
//!
//! The first line is a header `{format_version, vocabulary, config}`;
//! every following line is one goal
//! `{id, verb, target, scene, category, feasible, reason, split}`.
//! Loading re-runs the classifier on every goal and rejects files whose
//! stored labels disagree.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use littlezoo::env::{ElementKind, Verb, Vocabulary};
use littlezoo::goalspace::{
    make_goal, CategoryLabel, CategoryProportions, GenerationConfig, GoalSpace,
    InfeasibilityReason, Split,
};

use crate::error::LabError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderRecord {
    format_version: u32,
    vocabulary: VocabularyRecord,
    config: ConfigRecord,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VocabularyRecord {
    furniture: Vec<String>,
    plants: Vec<String>,
    herbivores: Vec<String>,
    carnivores: Vec<String>,
    water: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRecord {
    total_goals: usize,
    test_goals: usize,
    proportions: ProportionsRecord,
    rng_seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProportionsRecord {
    impossible: f64,
    grasp: f64,
    grow_plant: f64,
    grow_herbivore: f64,
    grow_carnivore: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GoalRecord {
    id: u32,
    verb: String,
    target: String,
    scene: Vec<SceneElementRecord>,
    category: String,
    feasible: bool,
    reason: Option<String>,
    split: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneElementRecord {
    name: String,
    kind: String,
    state: String,
}

/// Writes `space` as JSON lines.
pub fn save(space: &GoalSpace, path: &Path) -> Result<(), LabError> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    let vocab = space.vocabulary();
    let config = space.config();
    let header = HeaderRecord {
        format_version: FORMAT_VERSION,
        vocabulary: VocabularyRecord {
            furniture: vocab.names(ElementKind::Furniture).to_vec(),
            plants: vocab.names(ElementKind::Plant).to_vec(),
            herbivores: vocab.names(ElementKind::Herbivore).to_vec(),
            carnivores: vocab.names(ElementKind::Carnivore).to_vec(),
            water: vocab.names(ElementKind::Water).to_vec(),
        },
        config: ConfigRecord {
            total_goals: config.total_goals,
            test_goals: config.test_goals,
            proportions: ProportionsRecord {
                impossible: config.proportions.impossible,
                grasp: config.proportions.grasp,
                grow_plant: config.proportions.grow_plant,
                grow_herbivore: config.proportions.grow_herbivore,
                grow_carnivore: config.proportions.grow_carnivore,
            },
            rng_seed: config.rng_seed,
        },
    };
    serde_json::to_writer(&mut writer, &header).map_err(to_config_error)?;
    writer.write_all(b"\n")?;
    for goal in space.goals() {
        let reason = littlezoo::goalspace::classify(&goal.instruction, &goal.scene, vocab)
            .map_err(|e| LabError::Invariant(e.to_string()))?
            .1;
        let record = GoalRecord {
            id: goal.id,
            verb: verb_name(goal.instruction.verb).to_string(),
            target: goal.instruction.target_name.clone(),
            scene: goal
                .scene
                .slots
                .iter()
                .map(|element| SceneElementRecord {
                    name: element.name.clone(),
                    kind: element.kind.as_str().to_string(),
                    state: element.state.as_str().to_string(),
                })
                .collect(),
            category: goal.category.as_str().to_string(),
            feasible: goal.feasible,
            reason: reason.map(|r| r.as_str().to_string()),
            split: space.split_of(goal.id).as_str().to_string(),
        };
        serde_json::to_writer(&mut writer, &record).map_err(to_config_error)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Loads and fully validates a goal space.
pub fn load(path: &Path) -> Result<GoalSpace, LabError> {
    let file = File::open(path)
        .map_err(|e| LabError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| LabError::Validation("empty goal-space file".into()))?;
    let header: HeaderRecord = parse_line(&header_line?, 1)?;
    if header.format_version != FORMAT_VERSION {
        return Err(LabError::Validation(format!(
            "unsupported format version {} (expected {})",
            header.format_version, FORMAT_VERSION
        )));
    }
    let vocab = Vocabulary::new(
        &as_str_vec(&header.vocabulary.furniture),
        &as_str_vec(&header.vocabulary.plants),
        &as_str_vec(&header.vocabulary.herbivores),
        &as_str_vec(&header.vocabulary.carnivores),
    )
    .map_err(|e| LabError::Validation(e.to_string()))?;
    if header.vocabulary.water != ["water"] {
        return Err(LabError::Validation(
            "vocabulary water list must be exactly [\"water\"]".into(),
        ));
    }
    let config = GenerationConfig {
        total_goals: header.config.total_goals,
        test_goals: header.config.test_goals,
        proportions: CategoryProportions {
            impossible: header.config.proportions.impossible,
            grasp: header.config.proportions.grasp,
            grow_plant: header.config.proportions.grow_plant,
            grow_herbivore: header.config.proportions.grow_herbivore,
            grow_carnivore: header.config.proportions.grow_carnivore,
        },
        rng_seed: header.config.rng_seed,
    };

    let mut goals = Vec::new();
    let mut split = Vec::new();
    for (index, line) in lines {
        let line_number = index + 1;
        let line = line?;
        if line.trim().is_empty() {
            return Err(LabError::Validation(format!(
                "line {line_number}: blank line inside goal-space file"
            )));
        }
        let record: GoalRecord = parse_line(&line, line_number)?;
        let verb = match record.verb.as_str() {
            "grasp" => Verb::Grasp,
            "grow" => Verb::Grow,
            other => {
                return Err(LabError::Validation(format!(
                    "line {line_number}: unknown verb {other:?}"
                )))
            }
        };
        if record.scene.len() != 4 {
            return Err(LabError::Validation(format!(
                "line {line_number}: scene must have exactly 4 slots, found {}",
                record.scene.len()
            )));
        }
        let names: Vec<&str> = record.scene.iter().map(|s| s.name.as_str()).collect();
        let goal = make_goal(
            &vocab,
            record.id,
            verb,
            &record.target,
            [names[0], names[1], names[2], names[3]],
        )
        .map_err(|e| LabError::Validation(format!("line {line_number}: {e}")))?;
        // The stored scene kinds and states must match the canonical
        // initial elements.
        for (stored, element) in record.scene.iter().zip(goal.scene.slots.iter()) {
            if stored.kind != element.kind.as_str() || stored.state != element.state.as_str() {
                return Err(LabError::Validation(format!(
                    "line {line_number}: element {:?} stored as {}/{} but must be {}/{}",
                    stored.name,
                    stored.kind,
                    stored.state,
                    element.kind.as_str(),
                    element.state.as_str(),
                )));
            }
        }
        // Stored labels must agree with the classifier.
        let expected_reason = littlezoo::goalspace::classify(&goal.instruction, &goal.scene, &vocab)
            .map_err(|e| LabError::Validation(format!("line {line_number}: {e}")))?
            .1;
        let stored_category = CategoryLabel::from_str(&record.category).ok_or_else(|| {
            LabError::Validation(format!(
                "line {line_number}: unknown category {:?}",
                record.category
            ))
        })?;
        if stored_category != goal.category || record.feasible != goal.feasible {
            return Err(LabError::Validation(format!(
                "line {line_number}: stored labels ({}, feasible={}) disagree with \
                 classification ({}, feasible={})",
                record.category,
                record.feasible,
                goal.category.as_str(),
                goal.feasible,
            )));
        }
        let stored_reason = match &record.reason {
            None => None,
            Some(text) => Some(InfeasibilityReason::from_str(text).ok_or_else(|| {
                LabError::Validation(format!("line {line_number}: unknown reason {text:?}"))
            })?),
        };
        if stored_reason != expected_reason {
            return Err(LabError::Validation(format!(
                "line {line_number}: stored reason {:?} disagrees with classification {:?}",
                record.reason,
                expected_reason.map(|r| r.as_str()),
            )));
        }
        let split_label = Split::from_str(&record.split).ok_or_else(|| {
            LabError::Validation(format!(
                "line {line_number}: unknown split {:?}",
                record.split
            ))
        })?;
        goals.push(goal);
        split.push(split_label);
    }
    GoalSpace::from_parts(vocab, config, goals, split)
        .map_err(|e| LabError::Validation(e.to_string()))
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: &str, line_number: usize) -> Result<T, LabError> {
    serde_json::from_str(line)
        .map_err(|e| LabError::Validation(format!("line {line_number}: {e}")))
}

fn to_config_error(e: serde_json::Error) -> LabError {
    LabError::Config(format!("json: {e}"))
}

fn verb_name(verb: Verb) -> &'static str {
    match verb {
        Verb::Grasp => "grasp",
        Verb::Grow => "grow",
    }
}

fn as_str_vec(names: &[String]) -> Vec<&str> {
    names.iter().map(|s| s.as_str()).collect()
}

/// Re-checks `sample_size` seeded goals of `space` against the
/// breadth-first feasibility oracle.
pub fn spot_check_bfs(space: &GoalSpace, sample_size: usize, seed: u64) -> Result<(), LabError> {
    use littlezoo::goalspace::feasible_bfs;
    use littlezoo::rngs::{stream_rng, Stream};
    use rand::Rng;

    let mut rng = stream_rng(seed, Stream::SrEval);
    let total = space.goals().len();
    let count = sample_size.min(total);
    for _ in 0..count {
        let goal = &space.goals()[rng.random_range(0..total)];
        let reachable = feasible_bfs(goal, space.vocabulary())
            .map_err(|e| LabError::Validation(e.to_string()))?;
        if reachable != goal.feasible {
            return Err(LabError::Validation(format!(
                "goal {} ({:?}) is labelled feasible={} but search says {}",
                goal.id, goal.instruction, goal.feasible, reachable
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use littlezoo::goalspace::generate;
    use littlezoo::rngs::{stream_rng, Stream};

    fn space() -> GoalSpace {
        let config = GenerationConfig {
            total_goals: 80,
            test_goals: 20,
            proportions: CategoryProportions {
                impossible: 0.40,
                grasp: 0.30,
                grow_plant: 0.15,
                grow_herbivore: 0.10,
                grow_carnivore: 0.05,
            },
            rng_seed: 9,
        };
        generate(
            &config,
            &Vocabulary::default_zoo(),
            &mut stream_rng(9, Stream::GenerateTrain),
            &mut stream_rng(9, Stream::GenerateTest),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.jsonl");
        let original = space();
        save(&original, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(original.goals(), loaded.goals());
        assert_eq!(original.train_ids(), loaded.train_ids());
        assert_eq!(original.test_ids(), loaded.test_ids());
        assert_eq!(original.config(), loaded.config());
    }

    #[test]
    fn truncated_records_report_their_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.jsonl");
        save(&space(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let truncated = &lines[5][..lines[5].len() / 2];
        lines[5] = truncated;
        std::fs::write(&path, lines.join("\n")).unwrap();
        let err = load(&path).unwrap_err();
        assert!(matches!(err, LabError::Validation(_)));
        assert!(err.to_string().contains("line 6"), "{err}");
    }

    #[test]
    fn label_tampering_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.jsonl");
        save(&space(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // Flip the first impossible goal to feasible=true.
        let tampered: Vec<String> = text
            .lines()
            .map(|line| {
                if line.contains("\"category\":\"impossible\"") {
                    line.replacen("\"feasible\":false", "\"feasible\":true", 1)
                } else {
                    line.to_string()
                }
            })
            .collect();
        std::fs::write(&path, tampered.join("\n")).unwrap();
        let err = load(&path).unwrap_err();
        assert!(err.to_string().contains("disagree"), "{err}");
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.jsonl");
        save(&space(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let bumped = text.replacen("\"format_version\":1", "\"format_version\":2", 1);
        std::fs::write(&path, bumped).unwrap();
        let err = load(&path).unwrap_err();
        assert!(err.to_string().contains("format version"), "{err}");
    }
}
