use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom3::{det3, Mat3, Similarity3, Vec3};

use super::{exterior_model_map, winding_map, ExteriorModel};

/// Maps the dilatation estimator knows how to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum DilatationMap {
    Similarity(Similarity3),
    Winding {
        m: usize,
    },
    Exterior(ExteriorModel),
    /// `f^p` on `Φ_w(T0)`, i.e. the inverse of the composed similarity.
    InnerSteps(Similarity3),
    Linear(Mat3),
}

impl DilatationMap {
    pub fn eval(&self, p: Vec3) -> Result<Vec3> {
        Ok(match self {
            DilatationMap::Similarity(s) => s.apply(p),
            DilatationMap::Winding { m } => winding_map(p, *m),
            DilatationMap::Exterior(g) => exterior_model_map(p, g)?,
            DilatationMap::InnerSteps(s) => s.apply_inverse(p),
            DilatationMap::Linear(a) => crate::geom3::mat_vec(a, p),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dilatation {
    pub k_outer: f64,
    pub k_inner: f64,
    pub jacobian_det: f64,
    /// Descending.
    pub singular_values: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilatationSample {
    pub point: Vec3,
    #[serde(flatten)]
    pub dilatation: Dilatation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilatationReport {
    pub samples: Vec<DilatationSample>,
    pub max_k_outer: f64,
    pub max_k_inner: f64,
    pub min_jacobian_det: f64,
}

pub fn default_step(p: Vec3) -> f64 {
    (1e-5 * (1.0 + p.norm())).clamp(1e-7, 1e-3)
}

/// Central-difference Jacobian; column `i` is `∂f/∂x_i`.
pub fn numerical_jacobian(f: &DilatationMap, p: Vec3, h: f64) -> Result<Mat3> {
    let axes = [Vec3::X, Vec3::Y, Vec3::Z];
    let mut j = [[0.0; 3]; 3];
    for (i, e) in axes.iter().enumerate() {
        let d = (f.eval(p + *e * h)? - f.eval(p - *e * h)?) / (2.0 * h);
        for (r, v) in d.to_array().into_iter().enumerate() {
            j[r][i] = v;
        }
    }
    Ok(j)
}

/// Singular values of `a`, descending, from a Jacobi eigen-solve of `aᵀa`.
pub fn singular_values(a: &Mat3) -> [f64; 3] {
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = (0..3).map(|k| a[k][i] * a[k][j]).sum();
        }
    }
    for _ in 0..64 {
        let off = s[0][1].powi(2) + s[0][2].powi(2) + s[1][2].powi(2);
        let diag = s[0][0].powi(2) + s[1][1].powi(2) + s[2][2].powi(2);
        if off <= 1e-32 * diag {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if s[p][q] == 0.0 {
                continue;
            }
            let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
            let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
            let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let sn = t * c;
            for row in s.iter_mut() {
                let (kp, kq) = (row[p], row[q]);
                row[p] = c * kp - sn * kq;
                row[q] = sn * kp + c * kq;
            }
            let (rp, rq) = (s[p], s[q]);
            s[p] = std::array::from_fn(|k| c * rp[k] - sn * rq[k]);
            s[q] = std::array::from_fn(|k| sn * rp[k] + c * rq[k]);
        }
    }
    let mut sv = [
        s[0][0].max(0.0).sqrt(),
        s[1][1].max(0.0).sqrt(),
        s[2][2].max(0.0).sqrt(),
    ];
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Outer and inner dilatation of `f` at `p`. `h` defaults to `1e-5(1+|p|)`.
pub fn dilatation_estimate(f: &DilatationMap, p: Vec3, h: Option<f64>) -> Result<Dilatation> {
    let h = h.unwrap_or_else(|| default_step(p));
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::InvalidArgument(format!(
            "step {h:e} outside [1e-7, 1e-3]"
        )));
    }
    let jac = numerical_jacobian(f, p, h)?;
    let sv = singular_values(&jac);
    let [s1, s2, s3] = sv;
    if s1 == 0.0 || s3.is_nan() || s3 < 1e-12 * s1 {
        return Err(Error::NonInvertibleJacobian {
            ratio: if s1 > 0.0 { s3 / s1 } else { 0.0 },
        });
    }
    Ok(Dilatation {
        k_outer: s1 * s1 / (s2 * s3),
        k_inner: s1 * s2 / (s3 * s3),
        jacobian_det: det3(&jac),
        singular_values: sv,
    })
}

pub fn dilatation_report(
    f: &DilatationMap,
    points: &[Vec3],
    h: Option<f64>,
) -> Result<DilatationReport> {
    let samples = points
        .iter()
        .map(|&p| {
            dilatation_estimate(f, p, h).map(|d| DilatationSample {
                point: p,
                dilatation: d,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_k_outer = samples
        .iter()
        .map(|s| s.dilatation.k_outer)
        .fold(1.0, f64::max);
    let max_k_inner = samples
        .iter()
        .map(|s| s.dilatation.k_inner)
        .fold(1.0, f64::max);
    let min_jacobian_det = samples
        .iter()
        .map(|s| s.dilatation.jacobian_det)
        .fold(f64::INFINITY, f64::min);
    Ok(DilatationReport {
        samples,
        max_k_outer,
        max_k_inner,
        min_jacobian_det,
    })
}
