//! Flattening of layer weights/deltas into vectors and per-unit blocks.
//!
//! Ordering is row-major by unit, with each unit's bias appended directly
//! after its incoming weights, so a unit's block is one contiguous slice.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::personalize::{PersonalizedModel, SessionId, WeightSnapshot};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Raw,
    Delta,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Raw => "raw",
            Source::Delta => "delta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerVector {
    pub speaker_id: String,
    pub session_id: SessionId,
    pub layer_index: usize,
    pub values: Vec<f64>,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSplit {
    pub layer_index: usize,
    pub block_size: usize,
    pub blocks: Vec<Vec<f64>>,
}

/// Unit-major flattening: for each unit, its incoming weights then
/// (optionally) its bias.
pub fn flatten_weights(weights: &Matrix, biases: &[f64], include_bias: bool) -> Vec<f64> {
    let units = weights.rows();
    let per_unit = weights.cols() + usize::from(include_bias);
    let mut out = Vec::with_capacity(units * per_unit);
    for u in 0..units {
        out.extend_from_slice(weights.row(u));
        if include_bias {
            out.push(biases[u]);
        }
    }
    out
}

/// Inverse of `flatten_weights`; returns (weights, biases). Without biases
/// in the vector the bias vector comes back zeroed.
pub fn unflatten_weights(
    values: &[f64],
    fan_in: usize,
    units: usize,
    include_bias: bool,
) -> Result<(Matrix, Vec<f64>)> {
    let per_unit = fan_in + usize::from(include_bias);
    if values.len() != units * per_unit {
        return Err(Error::DimensionMismatch {
            context: "flattened layer length",
            expected: units * per_unit,
            got: values.len(),
        });
    }
    let mut weights = Matrix::zeros(units, fan_in);
    let mut biases = vec![0.0; units];
    for (u, chunk) in values.chunks_exact(per_unit).enumerate() {
        weights.row_mut(u).copy_from_slice(&chunk[..fan_in]);
        if include_bias {
            biases[u] = chunk[fan_in];
        }
    }
    Ok((weights, biases))
}

pub fn flatten_snapshot(
    snapshot: &WeightSnapshot,
    layer_index: usize,
    include_bias: bool,
) -> Result<Vec<f64>> {
    let (w, b) = snapshot.network.layer(layer_index)?;
    Ok(flatten_weights(w, b, include_bias))
}

/// Flattened adapted − base for one layer of a snapshot pair; elementwise
/// exact, no tolerance.
pub fn flatten_snapshot_delta(
    base: &WeightSnapshot,
    adapted: &WeightSnapshot,
    layer_index: usize,
    include_bias: bool,
) -> Result<Vec<f64>> {
    if base.topology != adapted.topology {
        return Err(Error::TopologyMismatch(
            "base/adapted topologies differ".into(),
        ));
    }
    let (bw, bb) = base.network.layer(layer_index)?;
    let (aw, ab) = adapted.network.layer(layer_index)?;
    let dw = aw.sub(bw)?;
    let db: Vec<f64> = ab.iter().zip(bb).map(|(a, b)| a - b).collect();
    Ok(flatten_weights(&dw, &db, include_bias))
}

/// LayerVector of one personalized model's layer, from raw adapted weights
/// or from the adapted − base delta.
pub fn flatten_layer(
    model: &PersonalizedModel,
    layer_index: usize,
    source: Source,
    include_bias: bool,
) -> Result<LayerVector> {
    let values = match source {
        Source::Raw => flatten_snapshot(&model.adapted, layer_index, include_bias)?,
        Source::Delta => {
            flatten_snapshot_delta(&model.base, &model.adapted, layer_index, include_bias)?
        }
    };
    Ok(LayerVector {
        speaker_id: model.speaker_id.clone(),
        session_id: model.session_id,
        layer_index,
        values,
        source,
    })
}

/// Splits a LayerVector into per-unit blocks of `block_size` contiguous
/// values; concatenating the blocks in order reproduces the vector exactly.
pub fn split_blocks(vector: &LayerVector, block_size: usize) -> Result<BlockSplit> {
    if block_size == 0 || !vector.values.len().is_multiple_of(block_size) {
        return Err(Error::DimensionMismatch {
            context: "layer vector length divisible by block size",
            expected: block_size,
            got: vector.values.len(),
        });
    }
    let blocks = vector
        .values
        .chunks_exact(block_size)
        .map(|c| c.to_vec())
        .collect();
    Ok(BlockSplit {
        layer_index: vector.layer_index,
        block_size,
        blocks,
    })
}
