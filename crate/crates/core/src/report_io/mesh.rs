use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom3::{SolidTorus, Vec3};
use crate::necklace::{Address, Necklace};

/// Upper limit on the number of tori in one exported stage.
pub const MAX_EXPORT_TORI: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// `nu × nv` grid over core and tube angles, two triangles per cell,
    /// wound so normals point out of the solid torus.
    pub fn torus(t: &SolidTorus, nu: usize, nv: usize) -> Self {
        let mut vertices = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            let u = TAU * i as f64 / nu as f64;
            for j in 0..nv {
                let v = TAU * j as f64 / nv as f64;
                vertices.push(t.surface_point(u, v));
            }
        }
        let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
        let mut triangles = Vec::with_capacity(2 * nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        Self {
            vertices,
            triangles,
        }
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        let edges = self
            .directed_edge_counts()
            .keys()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect::<std::collections::HashSet<_>>();
        self.vertices.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Every edge is used by exactly two triangles, once in each direction.
    pub fn is_watertight(&self) -> bool {
        let counts = self.directed_edge_counts();
        counts
            .iter()
            .all(|(&(a, b), &c)| c == 1 && counts.get(&(b, a)) == Some(&1))
    }

    /// Volume enclosed by the mesh, positive for outward orientation.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                p.dot(q.cross(r))
            })
            .sum::<f64>()
            / 6.0
    }

    fn directed_edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for e in [(a, b), (b, c), (c, a)] {
                *counts.entry(e).or_insert(0) += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshStage {
    pub k: usize,
    pub addresses: Vec<Address>,
    pub meshes: Vec<TriMesh>,
}

/// Every length-`k` address, lexicographic.
pub fn stage_addresses(m: usize, k: usize) -> Vec<Address> {
    let mut layer = vec![Address::root()];
    for _ in 0..k {
        layer = layer
            .iter()
            .flat_map(|a| (1..=m).map(move |j| a.pushed(j)))
            .collect();
    }
    layer
}

pub fn check_stage_size(m: usize, k: usize) -> Result<()> {
    let count = (m as f64).powi(k as i32);
    if count > MAX_EXPORT_TORI {
        return Err(Error::TooManyTori { count });
    }
    Ok(())
}

pub fn mesh_stage(n: &Necklace, k: usize, nu: usize, nv: usize) -> Result<MeshStage> {
    check_stage_size(n.m(), k)?;
    if nu < 8 || nv < 8 {
        return Err(Error::InvalidArgument(format!(
            "mesh resolution must be at least 8x8, got {nu}x{nv}"
        )));
    }
    let addresses = stage_addresses(n.m(), k);
    let meshes = addresses
        .iter()
        .map(|a| TriMesh::torus(&n.torus_at(a), nu, nv))
        .collect();
    Ok(MeshStage {
        k,
        addresses,
        meshes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshParams {
    pub m: usize,
    pub k: usize,
    pub nu: usize,
    pub nv: usize,
}

impl MeshParams {
    fn header(&self) -> String {
        format!(
            "antoine mesh m={} k={} nu={} nv={}",
            self.m, self.k, self.nu, self.nv
        )
    }
}

/// ASCII OBJ, one object per torus, coordinates at 17 significant digits.
pub fn write_obj(stage: &MeshStage, params: &MeshParams, w: &mut impl Write) -> Result<()> {
    writeln!(w, "# {}", params.header())?;
    let mut base = 1;
    for (a, mesh) in stage.addresses.iter().zip(&stage.meshes) {
        writeln!(w, "o torus{}", address_tag(a))?;
        for v in &mesh.vertices {
            writeln!(w, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z)?;
        }
        for t in &mesh.triangles {
            writeln!(w, "f {} {} {}", t[0] + base, t[1] + base, t[2] + base)?;
        }
        base += mesh.vertices.len();
    }
    Ok(())
}

/// Binary little-endian PLY: `double` vertices, `int` index lists.
pub fn write_ply(stage: &MeshStage, params: &MeshParams, w: &mut impl Write) -> Result<()> {
    let nv: usize = stage.meshes.iter().map(|m| m.vertices.len()).sum();
    let nf: usize = stage.meshes.iter().map(|m| m.triangles.len()).sum();
    write!(
        w,
        "ply\nformat binary_little_endian 1.0\ncomment {}\nelement vertex {nv}\n\
         property double x\nproperty double y\nproperty double z\n\
         element face {nf}\nproperty list uchar int vertex_indices\nend_header\n",
        params.header()
    )?;
    for v in stage.meshes.iter().flat_map(|m| &m.vertices) {
        for c in v.to_array() {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    let mut base = 0;
    for mesh in &stage.meshes {
        for t in &mesh.triangles {
            w.write_all(&[3u8])?;
            for &i in t {
                let i = i32::try_from(i + base).map_err(|_| {
                    Error::InvalidArgument("mesh too large for int32 indices".into())
                })?;
                w.write_all(&i.to_le_bytes())?;
            }
        }
        base += mesh.vertices.len();
    }
    Ok(())
}

fn address_tag(a: &Address) -> String {
    a.digits().iter().map(|d| format!("_{d}")).collect()
}

/// Reads the objects of an OBJ file written by [`write_obj`]. Face indices
/// in the result are local to their object.
pub fn read_obj(r: impl BufRead) -> Result<Vec<TriMesh>> {
    let bad = |line: &str| Error::InvalidArgument(format!("malformed OBJ line: {line}"));
    let mut meshes: Vec<TriMesh> = Vec::new();
    let mut base = 0;
    let mut seen = 0;
    for line in r.lines() {
        let line = line?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("o") => {
                base = seen;
                meshes.push(TriMesh {
                    vertices: Vec::new(),
                    triangles: Vec::new(),
                });
            }
            Some("v") => {
                let c: Vec<f64> = it
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(&line))?;
                let [x, y, z] = c[..] else {
                    return Err(bad(&line));
                };
                meshes
                    .last_mut()
                    .ok_or_else(|| bad(&line))?
                    .vertices
                    .push(Vec3::new(x, y, z));
                seen += 1;
            }
            Some("f") => {
                let c: Vec<usize> = it
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(&line))?;
                let [a, b, c] = c[..] else {
                    return Err(bad(&line));
                };
                if a <= base || b <= base || c <= base {
                    return Err(bad(&line));
                }
                let mesh = meshes.last_mut().ok_or_else(|| bad(&line))?;
                mesh.triangles
                    .push([a - base - 1, b - base - 1, c - base - 1]);
            }
            _ => {}
        }
    }
    Ok(meshes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn necklace() -> Necklace {
        Necklace::build(38).unwrap()
    }

    #[test]
    fn stage_zero_is_one_torus() {
        let n = necklace();
        let s = mesh_stage(&n, 0, 16, 12).unwrap();
        assert_eq!(s.meshes.len(), 1);
        let t = &s.meshes[0];
        assert_eq!(t.triangles.len(), 2 * 16 * 12);
        assert_eq!(t.euler_characteristic(), 0);
        assert!(t.is_watertight());
        let exact = 2.0 * std::f64::consts::PI.powi(2) * n.t0().core.radius * n.t0().tube.powi(2);
        let v = t.signed_volume();
        assert!(v > 0.0 && (v / exact - 1.0).abs() < 0.1, "{v} vs {exact}");
    }

    #[test]
    fn stage_one_has_m_watertight_tori() {
        let n = necklace();
        let s = mesh_stage(&n, 1, 8, 8).unwrap();
        assert_eq!(s.meshes.len(), 38);
        let total: usize = s.meshes.iter().map(|m| m.vertices.len()).sum();
        assert_eq!(total, 38 * 64);
        for m in &s.meshes {
            assert!(m.is_watertight());
            assert_eq!(m.euler_characteristic(), 0);
            assert!(m.signed_volume() > 0.0);
        }
    }

    #[test]
    fn limits() {
        let n = necklace();
        assert!(matches!(
            mesh_stage(&n, 4, 8, 8),
            Err(Error::TooManyTori { .. })
        ));
        assert!(mesh_stage(&n, 0, 4, 8).is_err());
    }

    #[test]
    fn obj_round_trip_is_bitwise() {
        let n = necklace();
        let s = mesh_stage(&n, 1, 8, 9).unwrap();
        let params = MeshParams {
            m: 38,
            k: 1,
            nu: 8,
            nv: 9,
        };
        let mut buf = Vec::new();
        write_obj(&s, &params, &mut buf).unwrap();
        let back = read_obj(buf.as_slice()).unwrap();
        assert_eq!(back, s.meshes);
    }

    #[test]
    fn ply_layout() {
        let n = necklace();
        let s = mesh_stage(&n, 0, 8, 8).unwrap();
        let params = MeshParams {
            m: 38,
            k: 0,
            nu: 8,
            nv: 8,
        };
        let mut buf = Vec::new();
        write_ply(&s, &params, &mut buf).unwrap();
        let text = String::from_utf8_lossy(&buf);
        let header_len = text.find("end_header\n").unwrap() + "end_header\n".len();
        assert!(text.starts_with("ply\nformat binary_little_endian 1.0\n"));
        assert_eq!(buf.len() - header_len, 64 * 24 + 128 * 13);
        let x0 = f64::from_le_bytes(buf[header_len..header_len + 8].try_into().unwrap());
        assert_eq!(x0, s.meshes[0].vertices[0].x);
    }
}
