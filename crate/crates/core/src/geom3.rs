//! Exact-value primitives in 3-space: vectors, proper rotations, conformal
//! similarities, round circles and solid tori.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for the boundary band of torus membership.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Point with cylindrical coordinates `(r, theta, z)` about the x3-axis.
    pub fn from_cylindrical(r: f64, theta: f64, z: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(r * c, r * s, z)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Some unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(self) -> Vec3 {
        let a = if self.x.abs() <= self.y.abs() && self.x.abs() <= self.z.abs() {
            Vec3::X
        } else if self.y.abs() <= self.z.abs() {
            Vec3::Y
        } else {
            Vec3::Z
        };
        self.cross(a).normalized().expect("nonzero input")
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

pub type Mat3 = [[f64; 3]; 3];

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    Vec3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
pub fn solve3(m: &Mat3, b: Vec3) -> Option<Vec3> {
    let mut a = [
        [m[0][0], m[0][1], m[0][2], b.x],
        [m[1][0], m[1][1], m[1][2], b.y],
        [m[2][0], m[2][1], m[2][2], b.z],
    ];
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, y) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * y;
            }
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = a[row][3];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(Vec3::from(x))
}

/// A proper rotation stored as a unit quaternion `w + xi + yj + zk`.
///
/// Every constructor and composition renormalizes, so the matrix form stays
/// orthonormal with determinant +1 through arbitrarily long chains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation3 {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for Rotation3 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Rotation3 {
    pub const IDENTITY: Rotation3 = Rotation3 {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n2 = w * w + x * x + y * y + z * z;
        // renormalize only once drift is visible; canonical hemisphere w >= 0
        let inv = if (n2 - 1.0).abs() > 4.0 * f64::EPSILON {
            1.0 / n2.sqrt()
        } else {
            1.0
        };
        let s = if w < 0.0 { -inv } else { inv };
        Rotation3 {
            w: w * s,
            x: x * s,
            y: y * s,
            z: z * s,
        }
    }

    /// Right-handed rotation by `angle` about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let Some(a) = axis.normalized() else {
            return Self::IDENTITY;
        };
        let (s, c) = (angle / 2.0).sin_cos();
        Self::from_quaternion(c, a.x * s, a.y * s, a.z * s)
    }

    pub fn about_x1(angle: f64) -> Self {
        Self::from_axis_angle(Vec3::X, angle)
    }

    pub fn about_x3(angle: f64) -> Self {
        Self::from_axis_angle(Vec3::Z, angle)
    }

    /// The rotation of least angle taking unit vector `from` to unit vector `to`.
    pub fn aligning(from: Vec3, to: Vec3) -> Self {
        let (Some(f), Some(t)) = (from.normalized(), to.normalized()) else {
            return Self::IDENTITY;
        };
        let axis = f.cross(t);
        let sin = axis.norm();
        let cos = f.dot(t);
        if sin < 1e-15 {
            if cos > 0.0 {
                return Self::IDENTITY;
            }
            return Self::from_axis_angle(f.any_orthogonal(), PI);
        }
        Self::from_axis_angle(axis, sin.atan2(cos))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, o: &Rotation3) -> Rotation3 {
        let (a, b) = (self, o);
        Self::from_quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }

    pub fn inverse(&self) -> Rotation3 {
        Rotation3 {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let q = Vec3::new(self.x, self.y, self.z);
        let t = q.cross(v) * 2.0;
        v + t * self.w + q.cross(t)
    }

    pub fn matrix(&self) -> Mat3 {
        let Rotation3 { w, x, y, z } = *self;
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        2.0 * Vec3::new(self.x, self.y, self.z).norm().atan2(self.w.abs())
    }
}

/// Orientation-preserving similarity `x ↦ scale · rot(x) + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity3 {
    scale: f64,
    rot: Rotation3,
    shift: Vec3,
}

impl Default for Similarity3 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Similarity3 {
    pub const IDENTITY: Similarity3 = Similarity3 {
        scale: 1.0,
        rot: Rotation3::IDENTITY,
        shift: Vec3::ZERO,
    };

    pub fn new(scale: f64, rot: Rotation3, shift: Vec3) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !shift.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "similarity needs a positive finite scale and finite shift (scale {scale})"
            )));
        }
        Ok(Self { scale, rot, shift })
    }

    pub fn translation(shift: Vec3) -> Self {
        Self {
            shift,
            ..Self::IDENTITY
        }
    }

    pub fn rotation(rot: Rotation3) -> Self {
        Self {
            rot,
            ..Self::IDENTITY
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rot(&self) -> &Rotation3 {
        &self.rot
    }

    pub fn shift(&self) -> Vec3 {
        self.shift
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rot.apply(p) * self.scale + self.shift
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Similarity3) -> Similarity3 {
        Similarity3 {
            scale: self.scale * other.scale,
            rot: self.rot.compose(&other.rot),
            shift: self.apply(other.shift),
        }
    }

    pub fn inverse(&self) -> Similarity3 {
        let rot = self.rot.inverse();
        let inv = 1.0 / self.scale;
        Similarity3 {
            scale: inv,
            rot,
            shift: -(rot.apply(self.shift) * inv),
        }
    }

    /// Applies the inverse map without materializing it.
    pub fn apply_inverse(&self, p: Vec3) -> Vec3 {
        self.rot.inverse().apply(p - self.shift) / self.scale
    }

    /// Linear part `scale · rot` as a matrix.
    pub fn linear_matrix(&self) -> Mat3 {
        let mut m = self.rot.matrix();
        for row in &mut m {
            for v in row.iter_mut() {
                *v *= self.scale;
            }
        }
        m
    }

    /// The unique fixed point, found by solving `(I - scale·rot) x = shift`.
    pub fn fixed_point(&self) -> Result<Vec3> {
        if (self.scale - 1.0).abs() <= 1e-12 {
            return Err(Error::NoUniqueFixedPoint);
        }
        let mut a = self.linear_matrix();
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i == j { 1.0 - *v } else { -*v };
            }
        }
        solve3(&a, self.shift).ok_or(Error::NoUniqueFixedPoint)
    }
}

/// Round circle with a unit plane normal; the normal's sign fixes the
/// orientation (counterclockwise seen from the normal's tip).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle3 {
    pub center: Vec3,
    pub radius: f64,
    pub normal: Vec3,
}

impl Circle3 {
    pub fn new(center: Vec3, radius: f64, normal: Vec3) -> Result<Self> {
        let normal = normal
            .normalized()
            .ok_or_else(|| Error::InvalidArgument("circle normal must be nonzero".into()))?;
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad circle radius {radius}"
            )));
        }
        Ok(Self {
            center,
            radius,
            normal,
        })
    }

    /// The unit circle in the plane x3 = 0.
    pub fn unit() -> Self {
        Self {
            center: Vec3::ZERO,
            radius: 1.0,
            normal: Vec3::Z,
        }
    }

    /// Orthonormal in-plane frame `(u, v)` with `u × v = normal`.
    pub fn frame(&self) -> (Vec3, Vec3) {
        let n = self.normal;
        let u = if (n - Vec3::Z).norm() < 1e-15 {
            Vec3::X
        } else if (n + Vec3::Z).norm() < 1e-15 {
            Vec3::Y
        } else {
            n.any_orthogonal()
        };
        (u, n.cross(u))
    }

    pub fn point_at(&self, angle: f64) -> Vec3 {
        let (u, v) = self.frame();
        let (s, c) = angle.sin_cos();
        self.center + (u * c + v * s) * self.radius
    }

    /// Unit-speed-in-angle tangent (length `radius`).
    pub fn tangent_at(&self, angle: f64) -> Vec3 {
        let (u, v) = self.frame();
        let (s, c) = angle.sin_cos();
        (v * c - u * s) * self.radius
    }

    /// `n` points equally spaced in angle, following the orientation.
    pub fn samples(&self, n: usize) -> Vec<Vec3> {
        let (u, v) = self.frame();
        (0..n)
            .map(|k| {
                let (s, c) = (TAU * k as f64 / n as f64).sin_cos();
                self.center + (u * c + v * s) * self.radius
            })
            .collect()
    }

    /// Euclidean distance from `p` to the circle as a point set.
    pub fn distance_to(&self, p: Vec3) -> f64 {
        let d = p - self.center;
        let h = d.dot(self.normal);
        let planar = (d - self.normal * h).norm();
        (planar - self.radius).hypot(h)
    }

    pub fn transformed(&self, s: &Similarity3) -> Circle3 {
        Circle3 {
            center: s.apply(self.center),
            radius: self.radius * s.scale(),
            normal: s.rot().apply(self.normal),
        }
    }

    /// Same point set, ignoring orientation: centers, radii and planes agree.
    pub fn deviation_unoriented(&self, o: &Circle3) -> f64 {
        let n = (self.normal - o.normal)
            .norm()
            .min((self.normal + o.normal).norm());
        self.center
            .distance(o.center)
            .max((self.radius - o.radius).abs())
            .max(n)
    }

    /// Same oriented circle.
    pub fn deviation_oriented(&self, o: &Circle3) -> f64 {
        self.center
            .distance(o.center)
            .max((self.radius - o.radius).abs())
            .max((self.normal - o.normal).norm())
    }
}

pub fn point_circle_distance(c: &Circle3, p: Vec3) -> f64 {
    c.distance_to(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

impl Membership {
    /// Boundary counts as inside for dynamics.
    pub fn is_in(self) -> bool {
        !matches!(self, Membership::Outside)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolidTorus {
    pub core: Circle3,
    pub tube: f64,
}

impl SolidTorus {
    pub fn new(core: Circle3, tube: f64) -> Result<Self> {
        if !(tube > 0.0 && tube < core.radius) {
            return Err(Error::InvalidArgument(format!(
                "tube radius {tube} must lie in (0, {})",
                core.radius
            )));
        }
        Ok(Self { core, tube })
    }

    pub fn contains(&self, p: Vec3, tol: f64) -> Membership {
        let d = self.core.distance_to(p);
        if d < self.tube - tol {
            Membership::Inside
        } else if d <= self.tube + tol {
            Membership::Boundary
        } else {
            Membership::Outside
        }
    }

    pub fn transformed(&self, s: &Similarity3) -> SolidTorus {
        SolidTorus {
            core: self.core.transformed(s),
            tube: self.tube * s.scale(),
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * (self.core.radius + self.tube)
    }

    /// Surface point at core angle `u` and tube angle `v`; `v = 0` is the
    /// outermost point of the meridian.
    pub fn surface_point(&self, u: f64, v: f64) -> Vec3 {
        let (e1, e2) = self.core.frame();
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        let radial = e1 * cu + e2 * su;
        self.core.center
            + radial * (self.core.radius + self.tube * cv)
            + self.core.normal * (self.tube * sv)
    }
}

pub fn torus_contains(t: &SolidTorus, p: Vec3, tol: f64) -> Membership {
    t.contains(p, tol)
}

/// Certified bracket on the minimum distance between two circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBound {
    /// Provable lower bound.
    pub lower: f64,
    /// Distance actually attained by a sampled pair of points.
    pub upper: f64,
}

struct Cell {
    lb: f64,
    s: f64,
    t: f64,
    hs: f64,
    ht: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.lb == o.lb
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    // reversed: BinaryHeap pops the smallest bound first
    fn cmp(&self, o: &Self) -> Ordering {
        o.lb.total_cmp(&self.lb)
    }
}

const MAX_CELLS: usize = 4_000_000;

/// Minimum distance between two circles, bracketed by branch and bound over
/// the parameter torus.
///
/// Starts from a `grid_n × grid_n` grid of angle cells. Each cell gets a lower
/// bound from a second-order Taylor estimate of the squared distance (the
/// derivatives of a circle parametrization are bounded by its radius) and from
/// the Lipschitz bound of the distance itself. Cells are split best-first until
/// the lowest bound is within `1e-7·(ra + rb)` of the best distance found.
pub fn circle_circle_distance(a: &Circle3, b: &Circle3, grid_n: usize) -> DistanceBound {
    let grid_n = grid_n.max(8);
    let (ua, va) = a.frame();
    let (ub, vb) = b.frame();
    let (ra, rb) = (a.radius, b.radius);
    let tol = 1e-7 * (ra + rb);

    let eval = |s: f64, t: f64, hs: f64, ht: f64| -> (f64, f64) {
        let (ss, cs) = s.sin_cos();
        let (st, ct) = t.sin_cos();
        let pa = a.center + (ua * cs + va * ss) * ra;
        let pb = b.center + (ub * ct + vb * st) * rb;
        let da = (va * cs - ua * ss) * ra;
        let db = (vb * ct - ub * st) * rb;
        let d = pa - pb;
        let f = d.norm_squared();
        let dist = f.sqrt();
        let fs = 2.0 * d.dot(da);
        let ft = -2.0 * d.dot(db);
        let dmax = dist + ra * hs + rb * ht;
        let second = (ra * ra + dmax * ra) * hs * hs
            + 2.0 * ra * rb * hs * ht
            + (rb * rb + dmax * rb) * ht * ht;
        let lb_f = f - fs.abs() * hs - ft.abs() * ht - second;
        let lb_taylor = lb_f.max(0.0).sqrt();
        let lb_lip = dist - ra * hs - rb * ht;
        (dist, lb_taylor.max(lb_lip).max(0.0))
    };

    let h0 = PI / grid_n as f64;
    let mut heap = BinaryHeap::with_capacity(grid_n * grid_n);
    let mut upper = f64::INFINITY;
    for i in 0..grid_n {
        for k in 0..grid_n {
            let s = (2 * i + 1) as f64 * h0;
            let t = (2 * k + 1) as f64 * h0;
            let (d, lb) = eval(s, t, h0, h0);
            upper = upper.min(d);
            heap.push(Cell {
                lb,
                s,
                t,
                hs: h0,
                ht: h0,
            });
        }
    }

    let mut evaluated = grid_n * grid_n;
    while let Some(cell) = heap.pop() {
        if cell.lb >= upper - tol || evaluated >= MAX_CELLS {
            return DistanceBound {
                lower: cell.lb.min(upper),
                upper,
            };
        }
        let (hs, ht) = (cell.hs / 2.0, cell.ht / 2.0);
        for (ds, dt) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
            let s = cell.s + ds * hs;
            let t = cell.t + dt * ht;
            let (d, lb) = eval(s, t, hs, ht);
            upper = upper.min(d);
            heap.push(Cell {
                lb: lb.max(cell.lb),
                s,
                t,
                hs,
                ht,
            });
        }
        evaluated += 4;
    }
    DistanceBound {
        lower: upper,
        upper,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    fn random_unit(rng: &mut impl Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if v.norm() > 0.1 && v.norm() < 1.0 {
                return v.normalized().unwrap();
            }
        }
    }

    fn random_rotation(rng: &mut impl Rng) -> Rotation3 {
        Rotation3::from_axis_angle(random_unit(rng), rng.random_range(0.0..TAU))
    }

    fn random_point(rng: &mut impl Rng) -> Vec3 {
        Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    }

    fn random_similarity(rng: &mut impl Rng, scale: f64) -> Similarity3 {
        Similarity3::new(scale, random_rotation(rng), random_point(rng) * 2.0).unwrap()
    }

    #[test]
    fn apply_examples() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(Similarity3::IDENTITY.apply(p), p);
        let half = Similarity3::new(0.5, Rotation3::IDENTITY, Vec3::ZERO).unwrap();
        assert_eq!(
            half.apply(Vec3::new(2.0, 0.0, 0.0)),
            Vec3::new(1.0, 0.0, 0.0)
        );
        let quarter_turn = Similarity3::rotation(Rotation3::about_x3(PI / 2.0));
        assert!(close(quarter_turn.apply(Vec3::X), Vec3::Y, 1e-15));
    }

    #[test]
    fn compose_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_similarity(&mut rng, 0.7);
        assert_eq!(Similarity3::IDENTITY.compose(&s), s);

        let t1 = Similarity3::translation(Vec3::new(1.0, -2.0, 0.5));
        let t2 = Similarity3::translation(Vec3::new(0.25, 3.0, -1.0));
        let t = t1.compose(&t2);
        assert_eq!(t.shift(), Vec3::new(1.25, 1.0, -0.5));
        assert_eq!(t.scale(), 1.0);

        let a = random_similarity(&mut rng, 0.5);
        let b = random_similarity(&mut rng, 0.5);
        let ab = a.compose(&b);
        assert_eq!(ab.scale(), 0.25);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            assert!(close(ab.apply(p), a.apply(b.apply(p)), 1e-14));
        }
    }

    #[test]
    fn invert_examples() {
        assert_eq!(Similarity3::IDENTITY.inverse(), Similarity3::IDENTITY);
        let s = Similarity3::new(0.5, Rotation3::IDENTITY, Vec3::X).unwrap();
        let inv = s.inverse();
        assert_eq!(inv.scale(), 2.0);
        assert_eq!(inv.shift(), Vec3::new(-2.0, 0.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_similarity(&mut rng, 0.37);
        let ri = r.inverse();
        for _ in 0..100 {
            let p = random_point(&mut rng);
            assert!(close(r.apply(ri.apply(p)), p, 1e-12));
            assert!(close(ri.apply(r.apply(p)), p, 1e-12));
            assert!(close(r.apply_inverse(r.apply(p)), p, 1e-12));
        }
    }

    #[test]
    fn fixed_point_examples() {
        let s = Similarity3::new(0.5, Rotation3::IDENTITY, Vec3::X).unwrap();
        assert!(close(
            s.fixed_point().unwrap(),
            Vec3::new(2.0, 0.0, 0.0),
            1e-15
        ));

        let s = Similarity3::new(0.5, Rotation3::about_x3(PI), Vec3::X).unwrap();
        assert!(close(
            s.fixed_point().unwrap(),
            Vec3::new(2.0 / 3.0, 0.0, 0.0),
            1e-15
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_similarity(&mut rng, 0.3);
        let mut x = Vec3::ZERO;
        for _ in 0..200 {
            x = s.apply(x);
        }
        assert!(close(s.fixed_point().unwrap(), x, 1e-10));

        let iso = Similarity3::rotation(Rotation3::about_x3(0.3));
        assert!(matches!(iso.fixed_point(), Err(Error::NoUniqueFixedPoint)));
    }

    #[test]
    fn rotation_normal_form_survives_long_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut r = Rotation3::IDENTITY;
        for _ in 0..1000 {
            r = r.compose(&random_rotation(&mut rng));
        }
        let m = r.matrix();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
        assert!((det3(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aligning_rotation_is_minimal() {
        let r = Rotation3::aligning(Vec3::Z, Vec3::X);
        assert!(close(r.apply(Vec3::Z), Vec3::X, 1e-15));
        assert!((r.angle() - PI / 2.0).abs() < 1e-15);
        let flip = Rotation3::aligning(Vec3::Z, -Vec3::Z);
        assert!(close(flip.apply(Vec3::Z), -Vec3::Z, 1e-15));
        assert_eq!(Rotation3::aligning(Vec3::Y, Vec3::Y), Rotation3::IDENTITY);
    }

    #[test]
    fn point_circle_distance_examples() {
        let c = Circle3::unit();
        assert_eq!(point_circle_distance(&c, Vec3::X), 0.0);
        assert_eq!(point_circle_distance(&c, Vec3::ZERO), 1.0);
        assert!((point_circle_distance(&c, Vec3::new(2.0, 0.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
        // axis case off the plane
        assert!((c.distance_to(Vec3::new(0.0, 0.0, 2.0)) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn torus_membership_examples() {
        let t = SolidTorus::new(Circle3::unit(), 8.0 / 16.0).unwrap();
        assert_eq!(
            torus_contains(&t, Vec3::X, BOUNDARY_TOL),
            Membership::Inside
        );
        assert_eq!(
            torus_contains(&t, Vec3::ZERO, BOUNDARY_TOL),
            Membership::Outside
        );
        assert_eq!(
            torus_contains(&t, Vec3::new(1.5, 0.0, 0.0), BOUNDARY_TOL),
            Membership::Boundary
        );
        assert!(SolidTorus::new(Circle3::unit(), 1.5).is_err());
    }

    #[test]
    fn circle_samples_lie_on_circle_and_follow_orientation() {
        let c = Circle3::new(Vec3::new(0.3, -1.0, 2.0), 0.7, Vec3::new(1.0, 1.0, 0.2)).unwrap();
        for p in c.samples(37) {
            assert!(c.distance_to(p) < 1e-15);
        }
        let (u, v) = c.frame();
        assert!(close(u.cross(v), c.normal, 1e-15));
        let t = c.tangent_at(0.4);
        let p = c.point_at(0.4) - c.center;
        assert!((p.cross(t).normalized().unwrap() - c.normal).norm() < 1e-14);
    }

    #[test]
    fn circle_distance_examples() {
        let a = Circle3::unit();
        let b = Circle3::new(Vec3::new(0.0, 0.0, 3.0), 1.0, Vec3::Z).unwrap();
        let d = circle_circle_distance(&a, &b, 64);
        assert!(d.lower >= 2.9 && d.lower <= 3.0 + 1e-12, "{d:?}");
        assert!((d.upper - 3.0).abs() < 1e-12);

        let big = Circle3::new(Vec3::ZERO, 3.0, Vec3::Z).unwrap();
        let d = circle_circle_distance(&a, &big, 64);
        assert!(d.lower >= 1.95 && d.lower <= 2.0 + 1e-12, "{d:?}");
    }

    fn dense_min_distance(a: &Circle3, b: &Circle3, n: usize) -> f64 {
        let pa = a.samples(n);
        let pb = b.samples(n);
        let mut best = f64::INFINITY;
        for p in &pa {
            for q in &pb {
                best = best.min(p.distance(*q));
            }
        }
        best
    }

    #[test]
    fn circle_distance_lower_bound_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = Circle3::new(
                random_point(&mut rng),
                rng.random_range(0.2..1.0),
                random_unit(&mut rng),
            )
            .unwrap();
            let b = Circle3::new(
                random_point(&mut rng),
                rng.random_range(0.2..1.0),
                random_unit(&mut rng),
            )
            .unwrap();
            let bound = circle_circle_distance(&a, &b, 16);
            let dense = dense_min_distance(&a, &b, 2048);
            // dense sampling over-estimates by at most the sampling half-step
            let slack = PI / 2048.0 * (a.radius + b.radius);
            assert!(bound.lower <= dense + 1e-12, "{bound:?} vs {dense}");
            assert!(bound.lower >= dense - slack - 1e-6, "{bound:?} vs {dense}");
            assert!(bound.upper >= bound.lower);
        }
    }

    #[test]
    fn distances_scale_under_similarities() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let scale = rng.random_range(0.05..3.0);
            let s = random_similarity(&mut rng, scale);
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let lhs = s.apply(p).distance(s.apply(q));
            let rhs = s.scale() * p.distance(q);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300) + 1e-15);

            let c = Circle3::new(
                random_point(&mut rng),
                rng.random_range(0.1..1.0),
                random_unit(&mut rng),
            )
            .unwrap();
            let d0 = c.distance_to(p);
            let d1 = c.transformed(&s).distance_to(s.apply(p));
            assert!((d1 - s.scale() * d0).abs() <= 1e-10 * (s.scale() * d0).max(1e-3));
        }
    }
}
