//! Linking numbers of disjoint closed curves, computed two independent ways:
//! the Gauss double integral on exact circle parametrizations, and the
//! signed over-crossing count of polygonal approximations in a random
//! generic projection.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom3::{Circle3, Vec3};
use crate::necklace::Necklace;

/// Closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyLoop {
    vertices: Vec<Vec3>,
}

impl PolyLoop {
    pub fn new(vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument(
                "a loop needs at least 3 vertices".into(),
            ));
        }
        let n = vertices.len();
        if (0..n).any(|i| vertices[i] == vertices[(i + 1) % n]) {
            return Err(Error::InvalidArgument(
                "consecutive loop vertices coincide".into(),
            ));
        }
        Ok(Self { vertices })
    }

    /// Regular `n`-gon inscribed in `c`, uniform in arc length.
    pub fn from_circle(c: &Circle3, n: usize) -> Self {
        Self {
            vertices: c.samples(n.max(3)),
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v }
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
        }
    }

    fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

/// Gauss linking integral on a `quad_n × quad_n` trapezoidal grid.
pub fn gauss_linking(a: &Circle3, b: &Circle3, quad_n: usize) -> Result<f64> {
    let quad_n = quad_n.max(16);
    let h = TAU / quad_n as f64;
    let pts = |c: &Circle3| -> Vec<(Vec3, Vec3)> {
        (0..quad_n)
            .map(|k| {
                let s = k as f64 * h;
                (c.point_at(s), c.tangent_at(s))
            })
            .collect()
    };
    let pa = pts(a);
    let pb = pts(b);

    let mut min_sep = f64::INFINITY;
    let mut sum = 0.0;
    for &(x, dx) in &pa {
        let mut row = 0.0;
        for &(y, dy) in &pb {
            let d = x - y;
            let r = d.norm();
            min_sep = min_sep.min(r);
            row += d.dot(dx.cross(dy)) / (r * r * r);
        }
        sum += row;
    }
    if min_sep < 1e-9 {
        return Err(Error::MinSeparationTooSmall {
            separation: min_sep,
        });
    }
    Ok(sum * h * h / (4.0 * PI))
}

/// Result of one successful projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOutcome {
    pub linking: i32,
    pub direction: Vec3,
    /// Directions tried, including the successful one.
    pub attempts: usize,
}

pub const MAX_PROJECTION_ATTEMPTS: usize = 64;

fn random_direction(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Linking number as the signed count of crossings where `a` passes over `b`.
pub fn polygonal_linking(a: &PolyLoop, b: &PolyLoop, rng: &mut impl Rng) -> Result<i32> {
    polygonal_linking_detailed(a, b, rng).map(|o| o.linking)
}

pub fn polygonal_linking_detailed(
    a: &PolyLoop,
    b: &PolyLoop,
    rng: &mut impl Rng,
) -> Result<ProjectionOutcome> {
    for attempt in 1..=MAX_PROJECTION_ATTEMPTS {
        let dir = random_direction(rng);
        if let Some(linking) = crossings_along(a, b, dir) {
            return Ok(ProjectionOutcome {
                linking,
                direction: dir,
                attempts: attempt,
            });
        }
    }
    Err(Error::NoGenericProjection {
        attempts: MAX_PROJECTION_ATTEMPTS,
    })
}

#[derive(Clone, Copy)]
struct Seg2 {
    p: [f64; 2],
    d: [f64; 2],
    h0: f64,
    dh: f64,
    dir3: Vec3,
    lo: [f64; 2],
    hi: [f64; 2],
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Signed a-over-b crossing count seen from `+dir`, or `None` if the
/// projection is not generic (a segment nearly parallel to `dir`, a crossing
/// at a vertex, parallel overlapping shadows, or strands at equal height).
fn crossings_along(a: &PolyLoop, b: &PolyLoop, dir: Vec3) -> Option<i32> {
    let e1 = dir.any_orthogonal();
    let e2 = dir.cross(e1);
    let scale = a
        .vertices
        .iter()
        .chain(&b.vertices)
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1e-300);

    let project = |lp: &PolyLoop| -> Option<Vec<Seg2>> {
        lp.segments()
            .map(|(p, q)| {
                let pp = [p.dot(e1), p.dot(e2)];
                let qq = [q.dot(e1), q.dot(e2)];
                let d = [qq[0] - pp[0], qq[1] - pp[1]];
                let len3 = (q - p).norm();
                if d[0].hypot(d[1]) < 1e-9 * len3 {
                    return None;
                }
                Some(Seg2 {
                    p: pp,
                    d,
                    h0: p.dot(dir),
                    dh: (q - p).dot(dir),
                    dir3: q - p,
                    lo: [pp[0].min(qq[0]), pp[1].min(qq[1])],
                    hi: [pp[0].max(qq[0]), pp[1].max(qq[1])],
                })
            })
            .collect()
    };
    let sa = project(a)?;
    let sb = project(b)?;

    let bbox = |s: &[Seg2]| {
        s.iter().fold(
            [
                f64::INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
            ],
            |acc, g| {
                [
                    acc[0].min(g.lo[0]),
                    acc[1].min(g.lo[1]),
                    acc[2].max(g.hi[0]),
                    acc[3].max(g.hi[1]),
                ]
            },
        )
    };
    let (ba, bb) = (bbox(&sa), bbox(&sb));
    if ba[2] < bb[0] || bb[2] < ba[0] || ba[3] < bb[1] || bb[3] < ba[1] {
        return Some(0);
    }

    const EDGE_EPS: f64 = 1e-9;
    let height_eps = 1e-12 * scale;
    let mut total = 0;
    for s in &sa {
        for t in &sb {
            if s.hi[0] < t.lo[0] || t.hi[0] < s.lo[0] || s.hi[1] < t.lo[1] || t.hi[1] < s.lo[1] {
                continue;
            }
            let denom = cross2(s.d, t.d);
            let w = [t.p[0] - s.p[0], t.p[1] - s.p[1]];
            let lens = s.d[0].hypot(s.d[1]) * t.d[0].hypot(t.d[1]);
            if denom.abs() <= 1e-12 * lens {
                // parallel shadows: only a problem if collinear
                if cross2(w, s.d).abs() <= 1e-12 * s.d[0].hypot(s.d[1]) * scale {
                    return None;
                }
                continue;
            }
            let u = cross2(w, t.d) / denom;
            let v = cross2(w, s.d) / denom;
            let loose = -EDGE_EPS..=1.0 + EDGE_EPS;
            if !loose.contains(&u) || !loose.contains(&v) {
                continue;
            }
            let strict = EDGE_EPS..=1.0 - EDGE_EPS;
            if !strict.contains(&u) || !strict.contains(&v) {
                return None;
            }
            let ha = s.h0 + u * s.dh;
            let hb = t.h0 + v * t.dh;
            if (ha - hb).abs() <= height_eps {
                return None;
            }
            if ha > hb {
                let sign = s.dir3.cross(t.dir3).dot(dir);
                total += if sign > 0.0 { 1 } else { -1 };
            }
        }
    }
    Some(total)
}

/// Pairwise linking numbers of the child core circles, row-major, with the
/// Gauss integral kept alongside as a cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMatrix {
    pub m: usize,
    pub entries: Vec<i32>,
    /// Largest `|gauss - polygonal|` over all pairs.
    pub max_gauss_gap: f64,
    /// Projection directions tried beyond the first, over all pairs.
    pub projection_retries: usize,
}

impl LinkMatrix {
    /// Entry for children `i`, `j` in `1..=m`.
    pub fn get(&self, i: usize, j: usize) -> i32 {
        self.entries[(i - 1) * self.m + (j - 1)]
    }

    pub fn adjacent(m: usize, i: usize, j: usize) -> bool {
        let d = i.abs_diff(j);
        d == 1 || d == m - 1
    }

    /// Pairs violating `|lk| = 1` exactly for adjacent indices and 0 otherwise.
    pub fn pattern_mismatches(&self) -> usize {
        let m = self.m;
        let mut bad = 0;
        for i in 1..=m {
            for j in i + 1..=m {
                let want = i32::from(Self::adjacent(m, i, j));
                if self.get(i, j).abs() != want || self.get(i, j) != self.get(j, i) {
                    bad += 1;
                }
            }
        }
        bad
    }
}

/// Per-pair RNG stream so results do not depend on scheduling.
fn pair_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn link_matrix(n: &Necklace, poly_n: usize, quad_n: usize, seed: u64) -> Result<LinkMatrix> {
    let m = n.m();
    let polys: Vec<PolyLoop> = n
        .circles()
        .iter()
        .map(|c| PolyLoop::from_circle(c, poly_n.max(64)))
        .collect();
    let pairs: Vec<(usize, usize)> = (1..=m)
        .flat_map(|i| (i + 1..=m).map(move |j| (i, j)))
        .collect();

    let results: Vec<(i32, f64, usize)> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let wrap = |e: Error| Error::LinkPair {
                i,
                j,
                source: Box::new(e),
            };
            let mut rng = pair_rng(seed, idx as u64);
            let outcome =
                polygonal_linking_detailed(&polys[i - 1], &polys[j - 1], &mut rng).map_err(wrap)?;
            let gauss = gauss_linking(n.circle(i), n.circle(j), quad_n).map_err(wrap)?;
            Ok((
                outcome.linking,
                (gauss - outcome.linking as f64).abs(),
                outcome.attempts - 1,
            ))
        })
        .collect::<Result<_>>()?;

    let mut entries = vec![0; m * m];
    let mut max_gap: f64 = 0.0;
    let mut retries = 0;
    for (&(i, j), &(lk, gap, r)) in pairs.iter().zip(&results) {
        entries[(i - 1) * m + (j - 1)] = lk;
        entries[(j - 1) * m + (i - 1)] = lk;
        max_gap = max_gap.max(gap);
        retries += r;
    }
    Ok(LinkMatrix {
        m,
        entries,
        max_gauss_gap: max_gap,
        projection_retries: retries,
    })
}
