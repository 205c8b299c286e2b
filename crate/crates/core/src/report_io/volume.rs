use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{escape_depth, EscapeOutcome};
use crate::error::{Error, Result};
use crate::geom3::Vec3;
use crate::necklace::Necklace;

pub const SURVIVED: u16 = 0xFFFF;
pub const EXTERIOR: u16 = 0xFFFE;
pub const MAX_AXIS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl BoundingBox {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y && min.z < max.z) {
            return Err(Error::InvalidArgument(format!(
                "degenerate bounding box {min:?}..{max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    /// `[-h, h]³`.
    pub fn cube(h: f64) -> Result<Self> {
        Self::new(Vec3::new(-h, -h, -h), Vec3::new(h, h, h))
    }
}

impl Default for BoundingBox {
    /// `[-1.6, 1.6]³`, which holds `T0` for every valid multiplicity.
    fn default() -> Self {
        Self {
            min: Vec3::new(-1.6, -1.6, -1.6),
            max: Vec3::new(1.6, 1.6, 1.6),
        }
    }
}

/// Escape depths at voxel centers, x fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolumeGrid {
    pub dims: [usize; 3],
    pub values: Vec<u16>,
}

impl VolumeGrid {
    pub fn get(&self, i: usize, j: usize, k: usize) -> u16 {
        self.values[i + self.dims[0] * (j + self.dims[1] * k)]
    }

    pub fn count(&self, value: u16) -> usize {
        self.values.iter().filter(|&&v| v == value).count()
    }
}

pub fn voxel_center(dims: [usize; 3], bbox: &BoundingBox, i: usize, j: usize, k: usize) -> Vec3 {
    let c = |lo: f64, hi: f64, n: usize, i: usize| lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
    Vec3::new(
        c(bbox.min.x, bbox.max.x, dims[0], i),
        c(bbox.min.y, bbox.max.y, dims[1], j),
        c(bbox.min.z, bbox.max.z, dims[2], k),
    )
}

pub fn encode(outcome: EscapeOutcome) -> u16 {
    match outcome {
        EscapeOutcome::Exterior => EXTERIOR,
        EscapeOutcome::SurvivedBudget(_) => SURVIVED,
        EscapeOutcome::EscapedAtDepth(k) => k.min(EXTERIOR as usize - 1) as u16,
    }
}

pub fn classify_volume(
    n: &Necklace,
    dims: [usize; 3],
    bbox: &BoundingBox,
    budget: usize,
) -> Result<VolumeGrid> {
    if dims.iter().any(|&d| !(2..=MAX_AXIS).contains(&d)) {
        return Err(Error::InvalidArgument(format!(
            "grid dims must lie in [2, {MAX_AXIS}], got {dims:?}"
        )));
    }
    if budget == 0 || budget >= EXTERIOR as usize {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} out of range"
        )));
    }
    let [nx, ny, _] = dims;
    let values = (0..dims.iter().product::<usize>())
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = (idx % nx, (idx / nx) % ny, idx / (nx * ny));
            escape_depth(n, voxel_center(dims, bbox, i, j, k), budget).map(encode)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VolumeGrid { dims, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEncoding {
    pub dtype: String,
    pub order: String,
    pub survived: u16,
    pub exterior: u16,
}

impl Default for VolumeEncoding {
    fn default() -> Self {
        Self {
            dtype: "u16le".into(),
            order: "x-fastest".into(),
            survived: SURVIVED,
            exterior: EXTERIOR,
        }
    }
}

/// Parameters stored next to a `.vol` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSidecar {
    pub dims: [usize; 3],
    pub bbox: BoundingBox,
    pub budget: usize,
    pub m: usize,
    pub seed: u64,
    pub encoding: VolumeEncoding,
}

pub fn write_vol(grid: &VolumeGrid, w: &mut impl Write) -> Result<()> {
    let bytes: Vec<u8> = grid.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_vol(bytes: &[u8], dims: [usize; 3]) -> Result<VolumeGrid> {
    let n: usize = dims.iter().product();
    if bytes.len() != 2 * n {
        return Err(Error::InvalidArgument(format!(
            "expected {} bytes, got {}",
            2 * n,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    Ok(VolumeGrid { dims, values })
}
