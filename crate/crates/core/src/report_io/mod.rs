//! Export formats: stage meshes (OBJ, PLY), escape-depth volumes (`.vol`
//! plus a JSON sidecar), point clouds (XYZ, CSV) and JSON reports.

mod mesh;
mod points;
mod volume;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub use mesh::{
    check_stage_size, mesh_stage, read_obj, stage_addresses, write_obj, write_ply, MeshParams,
    MeshStage, TriMesh, MAX_EXPORT_TORI,
};
pub use points::{write_points, PointFormat, PointsSidecar};
pub use volume::{
    classify_volume, encode, read_vol, voxel_center, write_vol, BoundingBox, VolumeEncoding,
    VolumeGrid, VolumeSidecar, EXTERIOR, MAX_AXIS, SURVIVED,
};

/// Creates `path` and hands a buffered writer to `f`.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_json(value: &impl Serialize, w: &mut impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

/// `out.vol` → `out.vol.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
