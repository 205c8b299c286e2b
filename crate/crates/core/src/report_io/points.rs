use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointFormat {
    Xyz,
    Csv,
}

/// One point per line at 17 significant digits, in input order.
pub fn write_points(points: &[Vec3], format: PointFormat, w: &mut impl Write) -> Result<()> {
    let sep = match format {
        PointFormat::Xyz => " ",
        PointFormat::Csv => ",",
    };
    for p in points {
        writeln!(w, "{:.16e}{sep}{:.16e}{sep}{:.16e}", p.x, p.y, p.z)?;
    }
    Ok(())
}

/// Parameters stored next to a point file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsSidecar {
    pub m: usize,
    pub count: usize,
    pub depth: usize,
    pub seed: u64,
    pub format: PointFormat,
}
