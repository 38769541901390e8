//! Map comparison and slice extraction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategies::FluxMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapMetrics {
    pub cosine: f64,
    /// Total-variation distance, half the L1 distance of the unit-sum maps.
    pub tv: f64,
}

/// Cosine similarity and TV distance of two nonnegative vectors after each
/// is scaled to unit sum.
pub fn compare_vectors(a: &[f64], b: &[f64]) -> Result<MapMetrics> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} entries", a.len(), b.len())));
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if !(sa > 0.0 && sb > 0.0) {
        return Err(Error::ZeroMap);
    }
    let (mut dot, mut na, mut nb, mut l1) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x / sa, y / sb);
        dot += x * y;
        na += x * x;
        nb += y * y;
        l1 += (x - y).abs();
    }
    Ok(MapMetrics {
        cosine: (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0),
        tv: (0.5 * l1).clamp(0.0, 1.0),
    })
}

pub fn compare_maps(a: &FluxMap, b: &FluxMap) -> Result<MapMetrics> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} map vs {}x{} map",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    compare_vectors(a.tallies(), b.tallies())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Fixed `x`: a column of cells along `y`.
    #[default]
    X,
    /// Fixed `y`: a row of cells along `x`.
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            other => Err(Error::InvalidParameter(format!("axis `{other}` (expected x or y)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub axis: Axis,
    pub coordinate: f64,
    /// Column (axis x) or row (axis y) index.
    pub index: usize,
    /// Cell-centre coordinates along the slice, in cm.
    pub centers: Vec<f64>,
    pub values: Vec<f64>,
}

/// Cells whose extent contains `coordinate`; a coordinate on a cell
/// boundary belongs to the upper cell, except at the far domain edge.
pub fn extract_slice(flux: &FluxMap, cell_size: f64, axis: Axis, coordinate: f64) -> Result<Slice> {
    let (across, along) = match axis {
        Axis::X => (flux.width(), flux.height()),
        Axis::Y => (flux.height(), flux.width()),
    };
    let extent = across as f64 * cell_size;
    if !(0.0..=extent).contains(&coordinate) {
        return Err(Error::CoordinateOutOfDomain { coordinate, extent });
    }
    let index = ((coordinate / cell_size).floor() as usize).min(across - 1);
    let values = (0..along)
        .map(|i| match axis {
            Axis::X => flux.get(index, i),
            Axis::Y => flux.get(i, index),
        })
        .collect();
    Ok(Slice {
        axis,
        coordinate,
        index,
        centers: (0..along).map(|i| (i as f64 + 0.5) * cell_size).collect(),
        values,
    })
}
