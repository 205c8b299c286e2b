use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom3::Vec3;
use crate::necklace::{max_diameter, Necklace};

/// `ln m / ln(m/4)`.
pub fn similarity_dimension(m: usize) -> Result<f64> {
    if m <= 4 {
        return Err(Error::InvalidArgument(format!(
            "similarity dimension needs m > 4, got {m}"
        )));
    }
    let m = m as f64;
    Ok(m.ln() / (m / 4.0).ln())
}

/// Points `Φ_a((1,0,0))` for uniformly random addresses `a` of length `depth`.
///
/// Sample `i` draws from its own stream of the seeded generator, so the
/// output does not depend on thread count.
pub fn chaos_game_sample(n: &Necklace, count: usize, depth: usize, seed: u64) -> Result<Vec<Vec3>> {
    if depth == 0 {
        return Err(Error::InvalidArgument(
            "chaos game depth must be at least 1".into(),
        ));
    }
    let m = n.m();
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let digits: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=m)).collect();
            digits.iter().rev().fold(Vec3::X, |x, &d| n.sim(d).apply(x))
        })
        .collect())
}

/// Five box sizes spaced geometrically from the stage-1 torus diameter down
/// to the stage-2 one.
pub fn necklace_box_scales(m: usize) -> Vec<f64> {
    let hi = max_diameter(m, 1);
    let lo = max_diameter(m, 2);
    (0..5)
        .map(|i| hi * (lo / hi).powf(i as f64 / 4.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDimension {
    pub slope: f64,
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Least-squares slope of `ln N(ε)` against `ln(1/ε)`, with `N(ε)` the
/// number of occupied cubes of an axis-aligned grid of side `ε`.
pub fn box_dimension_estimate(points: &[Vec3], scales: &[f64]) -> Result<BoxDimension> {
    if scales.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 scales".into()));
    }
    if points.len() < 1000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 points, got {}",
            points.len()
        )));
    }
    if let Some(e) = scales.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidArgument(format!("scale {e} is not positive")));
    }
    let counts: Vec<usize> = scales
        .par_iter()
        .map(|&eps| {
            points
                .iter()
                .map(|p| {
                    let c = |v: f64| (v / eps).floor() as i64;
                    (c(p.x), c(p.y), c(p.z))
                })
                .collect::<HashSet<_>>()
                .len()
        })
        .collect();
    if counts.iter().all(|&c| c == counts[0]) {
        return Err(Error::DegenerateFit);
    }
    let xs: Vec<f64> = scales.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    Ok(BoxDimension {
        slope: sxy / sxx,
        scales: scales.to_vec(),
        counts,
    })
}
