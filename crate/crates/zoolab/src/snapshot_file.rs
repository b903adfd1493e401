//! Binary containers for parameter snapshots, learner checkpoints and
//! estimator checkpoints.
//!
//! Snapshot container layout (everything little-endian):
//! magic `LZSN`, format version u32, store version u64, episode u64,
//! segment count u32, per segment (name length u32, name bytes, rows u64,
//! cols u64), value count u64, values f64. Learner checkpoints reuse the
//! same container with learner-specific segment names. Estimator
//! checkpoints are a tagged wrapper that embeds the container for the
//! learned regressor.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use littlezoo::estimators::{EstimatorBox, EstimatorKind};
use littlezoo::learners::{FeatureQLearner, LearnerBox};
use littlezoo::tinynet::{Segment, Snapshot};

use crate::error::LabError;

const SNAPSHOT_MAGIC: &[u8; 4] = b"LZSN";
const ESTIMATOR_MAGIC: &[u8; 4] = b"LZES";
const FORMAT_VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(snapshot: &Snapshot, writer: &mut W) -> Result<(), LabError> {
    writer.write_all(SNAPSHOT_MAGIC)?;
    write_u32(writer, FORMAT_VERSION)?;
    write_u64(writer, snapshot.version)?;
    write_u64(writer, snapshot.episode)?;
    write_u32(writer, snapshot.segments.len() as u32)?;
    for segment in &snapshot.segments {
        write_bytes(writer, segment.name.as_bytes())?;
        write_u64(writer, segment.rows as u64)?;
        write_u64(writer, segment.cols as u64)?;
    }
    write_u64(writer, snapshot.values.len() as u64)?;
    for value in &snapshot.values {
        writer.write_all(&value.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(reader: &mut R) -> Result<Snapshot, LabError> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(LabError::Validation("not a snapshot container".into()));
    }
    let version = read_u32(reader)?;
    if version != FORMAT_VERSION {
        return Err(LabError::Validation(format!(
            "unsupported snapshot format version {version}"
        )));
    }
    let store_version = read_u64(reader)?;
    let episode = read_u64(reader)?;
    let segment_count = read_u32(reader)? as usize;
    let mut segments = Vec::with_capacity(segment_count);
    let mut offset = 0usize;
    for _ in 0..segment_count {
        let name = String::from_utf8(read_bytes(reader)?)
            .map_err(|_| LabError::Validation("segment name is not UTF-8".into()))?;
        let rows = read_u64(reader)? as usize;
        let cols = read_u64(reader)? as usize;
        segments.push(Segment {
            name,
            offset,
            rows,
            cols,
        });
        offset += rows * cols;
    }
    let value_count = read_u64(reader)? as usize;
    if value_count != offset {
        return Err(LabError::Validation(format!(
            "value count {value_count} does not match segment table total {offset}"
        )));
    }
    let mut values = Vec::with_capacity(value_count);
    let mut buffer = [0u8; 8];
    for _ in 0..value_count {
        reader.read_exact(&mut buffer)?;
        values.push(f64::from_le_bytes(buffer));
    }
    Ok(Snapshot {
        values,
        segments,
        version: store_version,
        episode,
    })
}

pub fn save_snapshot(snapshot: &Snapshot, path: &Path) -> Result<(), LabError> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_snapshot(snapshot, &mut writer)?;
    writer.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot, LabError> {
    let mut reader = BufReader::new(File::open(path)?);
    let snapshot = read_snapshot(&mut reader)?;
    let mut rest = [0u8; 1];
    if reader.read(&mut rest)? != 0 {
        return Err(LabError::Validation(
            "trailing bytes after snapshot container".into(),
        ));
    }
    Ok(snapshot)
}

/// Learner weights in the shared container.
pub fn learner_snapshot(learner: &LearnerBox) -> Snapshot {
    match learner {
        LearnerBox::QLinear(q) => Snapshot {
            values: q.weights().to_vec(),
            segments: vec![Segment {
                name: "q_weights".into(),
                offset: 0,
                rows: q.weights().len(),
                cols: 1,
            }],
            version: q_version(learner),
            episode: 0,
        },
        LearnerBox::Expert(_) | LearnerBox::Simulated(_) => Snapshot {
            values: Vec::new(),
            segments: Vec::new(),
            version: q_version(learner),
            episode: 0,
        },
    }
}

fn q_version(learner: &LearnerBox) -> u64 {
    use littlezoo::learners::Learner;
    learner.version()
}

/// Restores q-learner weights from a container written by
/// [`learner_snapshot`].
pub fn restore_qlearner_weights(
    learner: &mut FeatureQLearner,
    snapshot: &Snapshot,
) -> Result<(), LabError> {
    let expected = learner.weights().len();
    if snapshot.values.len() != expected {
        return Err(LabError::Validation(format!(
            "q-weight count {} does not match the learner ({expected})",
            snapshot.values.len()
        )));
    }
    learner.weights_mut().copy_from_slice(&snapshot.values);
    Ok(())
}

/// Estimator checkpoint: a kind tag plus strategy-specific state. Ring
/// buffers are stored as plain arrays; the learned regressor embeds the
/// snapshot container for its parameters, moments, outcome buffer and
/// snapshot ring. The internal batch-sampling rng stream is not stored;
/// restored estimators continue on a fresh stream.
pub fn save_estimator(estimator: &EstimatorBox, path: &Path) -> Result<(), LabError> {
    let mut writer = BufWriter::new(File::create(path)?);
    writer.write_all(ESTIMATOR_MAGIC)?;
    write_u32(&mut writer, FORMAT_VERSION)?;
    write_bytes(&mut writer, estimator.kind().as_str().as_bytes())?;
    match estimator {
        EstimatorBox::MovingAverage(mb) => {
            let (histories, utilities) = mb.state();
            write_bool_rings(&mut writer, histories)?;
            write_f64_array(&mut writer, utilities)?;
        }
        EstimatorBox::Online(online) => {
            write_bool_rings(&mut writer, online.buffers())?;
        }
        EstimatorBox::EkOnline(ek) => {
            write_bool_rings(&mut writer, ek.buckets().as_slice())?;
        }
        EstimatorBox::Eval(eval) => {
            let (latest, previous, cost) = eval.state();
            write_f64_array(&mut writer, latest)?;
            write_f64_array(&mut writer, previous)?;
            write_u64(&mut writer, cost)?;
        }
        EstimatorBox::EkEval(ek) => {
            let (latest, previous, cost) = ek.state();
            write_f64_array(&mut writer, latest.as_slice())?;
            write_f64_array(&mut writer, previous.as_slice())?;
            write_u64(&mut writer, cost)?;
        }
        EstimatorBox::Magellan(magellan) => {
            let parts = magellan.checkpoint_parts();
            write_u64(&mut writer, parts.tokens_in_id_order.len() as u64)?;
            for token in &parts.tokens_in_id_order {
                write_bytes(&mut writer, token.as_bytes())?;
            }
            write_snapshot(&parts.net, &mut writer)?;
            write_f64_array(&mut writer, &parts.adam_m)?;
            write_f64_array(&mut writer, &parts.adam_v)?;
            write_u64(&mut writer, parts.adam_steps)?;
            write_u64(&mut writer, parts.outcomes.len() as u64)?;
            for (tokens, outcome) in &parts.outcomes {
                write_u64(&mut writer, tokens.len() as u64)?;
                for &token in tokens {
                    write_u32(&mut writer, token)?;
                }
                writer.write_all(&outcome.to_le_bytes())?;
            }
            write_u64(&mut writer, parts.ring.len() as u64)?;
            for snapshot in &parts.ring {
                write_snapshot(snapshot, &mut writer)?;
            }
        }
        EstimatorBox::Uniform(_) => {}
    }
    writer.flush()?;
    Ok(())
}

/// Loads an estimator checkpoint, rebinding the state to `space`.
///
/// `params` must carry the same structural configuration (capacities,
/// network dimensions) the checkpointed estimator was built with.
pub fn load_estimator(
    path: &Path,
    params: &littlezoo::estimators::EstimatorParams,
    space: &littlezoo::goalspace::GoalSpace,
    rng: rand_chacha::ChaCha8Rng,
) -> Result<EstimatorBox, LabError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != ESTIMATOR_MAGIC {
        return Err(LabError::Validation("not an estimator checkpoint".into()));
    }
    let version = read_u32(&mut reader)?;
    if version != FORMAT_VERSION {
        return Err(LabError::Validation(format!(
            "unsupported estimator checkpoint version {version}"
        )));
    }
    let tag = String::from_utf8(read_bytes(&mut reader)?)
        .map_err(|_| LabError::Validation("estimator kind tag is not UTF-8".into()))?;
    let kind = EstimatorKind::from_str(&tag)
        .ok_or_else(|| LabError::Validation(format!("unknown estimator kind {tag:?}")))?;
    let estimator = match kind {
        EstimatorKind::MovingAverage => {
            let histories = read_bool_rings(&mut reader)?;
            let utilities = read_f64_array(&mut reader)?;
            let inner = littlezoo::estimators::MbEstimator::from_state(
                params.moving_average.clone(),
                histories,
                utilities,
            )
            .ok_or_else(|| LabError::Validation("inconsistent mb state lengths".into()))?;
            EstimatorBox::MovingAverage(inner)
        }
        EstimatorKind::Online => {
            let buffers = read_bool_rings(&mut reader)?;
            EstimatorBox::Online(littlezoo::estimators::OnlineAlp::from_state(
                params.online.clone(),
                buffers,
            ))
        }
        EstimatorKind::EkOnline => {
            let buffers = read_bool_rings(&mut reader)?;
            let buckets: [std::collections::VecDeque<bool>; 5] =
                buffers.try_into().map_err(|_| {
                    LabError::Validation("ek-online checkpoint must hold 5 buckets".into())
                })?;
            EstimatorBox::EkOnline(littlezoo::estimators::EkOnlineAlp::from_state(
                params.online.clone(),
                buckets,
                space,
            ))
        }
        EstimatorKind::Eval => {
            let latest = read_f64_array(&mut reader)?;
            let previous = read_f64_array(&mut reader)?;
            let cost = read_u64(&mut reader)?;
            let inner = littlezoo::estimators::EvalAlp::from_state(
                params.eval.clone(),
                latest,
                previous,
                cost,
            )
            .ok_or_else(|| LabError::Validation("inconsistent eval state lengths".into()))?;
            EstimatorBox::Eval(inner)
        }
        EstimatorKind::EkEval => {
            let latest = fixed5(read_f64_array(&mut reader)?)?;
            let previous = fixed5(read_f64_array(&mut reader)?)?;
            let cost = read_u64(&mut reader)?;
            EstimatorBox::EkEval(littlezoo::estimators::EkEvalAlp::from_state(
                params.ek_eval.clone(),
                latest,
                previous,
                cost,
                space,
            ))
        }
        EstimatorKind::Magellan => {
            let token_count = read_u64(&mut reader)? as usize;
            let mut tokens_in_id_order = Vec::with_capacity(token_count);
            for _ in 0..token_count {
                tokens_in_id_order.push(
                    String::from_utf8(read_bytes(&mut reader)?)
                        .map_err(|_| LabError::Validation("token is not UTF-8".into()))?,
                );
            }
            let net = read_snapshot(&mut reader)?;
            let adam_m = read_f64_array(&mut reader)?;
            let adam_v = read_f64_array(&mut reader)?;
            let adam_steps = read_u64(&mut reader)?;
            let outcome_count = read_u64(&mut reader)? as usize;
            let mut outcomes = Vec::with_capacity(outcome_count);
            for _ in 0..outcome_count {
                let token_len = read_u64(&mut reader)? as usize;
                let mut tokens = Vec::with_capacity(token_len);
                for _ in 0..token_len {
                    tokens.push(read_u32(&mut reader)?);
                }
                let mut buffer = [0u8; 8];
                reader.read_exact(&mut buffer)?;
                outcomes.push((tokens, f64::from_le_bytes(buffer)));
            }
            let ring_count = read_u64(&mut reader)? as usize;
            let mut ring = Vec::with_capacity(ring_count);
            for _ in 0..ring_count {
                ring.push(read_snapshot(&mut reader)?);
            }
            let parts = littlezoo::estimators::MagellanCheckpoint {
                tokens_in_id_order,
                net,
                adam_m,
                adam_v,
                adam_steps,
                outcomes,
                ring,
            };
            let inner = littlezoo::estimators::MagellanEstimator::from_checkpoint(
                params.magellan.clone(),
                space,
                parts,
                rng,
            )
            .map_err(|e| LabError::Validation(e.to_string()))?;
            EstimatorBox::Magellan(inner)
        }
        EstimatorKind::Uniform => EstimatorBox::Uniform(littlezoo::estimators::UniformEstimator),
    };
    Ok(estimator)
}

fn fixed5(values: Vec<f64>) -> Result<[f64; 5], LabError> {
    values
        .try_into()
        .map_err(|_| LabError::Validation("expected exactly 5 bucket values".into()))
}

fn write_bool_rings<W: Write>(
    writer: &mut W,
    rings: &[std::collections::VecDeque<bool>],
) -> Result<(), LabError> {
    write_u64(writer, rings.len() as u64)?;
    for ring in rings {
        write_u64(writer, ring.len() as u64)?;
        for &outcome in ring {
            writer.write_all(&[u8::from(outcome)])?;
        }
    }
    Ok(())
}

fn read_bool_rings<R: Read>(
    reader: &mut R,
) -> Result<Vec<std::collections::VecDeque<bool>>, LabError> {
    let ring_count = read_u64(reader)? as usize;
    let mut rings = Vec::with_capacity(ring_count);
    for _ in 0..ring_count {
        let length = read_u64(reader)? as usize;
        let mut bytes = vec![0u8; length];
        reader.read_exact(&mut bytes)?;
        rings.push(bytes.into_iter().map(|b| b != 0).collect());
    }
    Ok(rings)
}

fn write_f64_array<W: Write>(writer: &mut W, values: &[f64]) -> Result<(), LabError> {
    write_u64(writer, values.len() as u64)?;
    for value in values {
        writer.write_all(&value.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64_array<R: Read>(reader: &mut R) -> Result<Vec<f64>, LabError> {
    let length = read_u64(reader)? as usize;
    let mut values = Vec::with_capacity(length);
    let mut buffer = [0u8; 8];
    for _ in 0..length {
        reader.read_exact(&mut buffer)?;
        values.push(f64::from_le_bytes(buffer));
    }
    Ok(values)
}

fn write_u32<W: Write>(writer: &mut W, value: u32) -> Result<(), LabError> {
    writer.write_all(&value.to_le_bytes())?;
    Ok(())
}

fn write_u64<W: Write>(writer: &mut W, value: u64) -> Result<(), LabError> {
    writer.write_all(&value.to_le_bytes())?;
    Ok(())
}

fn write_bytes<W: Write>(writer: &mut W, bytes: &[u8]) -> Result<(), LabError> {
    write_u32(writer, bytes.len() as u32)?;
    writer.write_all(bytes)?;
    Ok(())
}

fn read_u32<R: Read>(reader: &mut R) -> Result<u32, LabError> {
    let mut buffer = [0u8; 4];
    reader.read_exact(&mut buffer)?;
    Ok(u32::from_le_bytes(buffer))
}

fn read_u64<R: Read>(reader: &mut R) -> Result<u64, LabError> {
    let mut buffer = [0u8; 8];
    reader.read_exact(&mut buffer)?;
    Ok(u64::from_le_bytes(buffer))
}

fn read_bytes<R: Read>(reader: &mut R) -> Result<Vec<u8>, LabError> {
    let length = read_u32(reader)? as usize;
    let mut bytes = vec![0u8; length];
    reader.read_exact(&mut bytes)?;
    Ok(bytes)
}
