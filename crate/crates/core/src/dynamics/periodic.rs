use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom3::Vec3;
use crate::necklace::{Address, Necklace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoint {
    pub word: Address,
    pub point: Vec3,
    pub period: usize,
    /// `(m/4)^p`, the expansion of `f^p` at the point.
    pub multiplier: f64,
}

/// Fixed point of `φ_{w1} ∘ … ∘ φ_{wp}`, a period-`p` point of the map.
pub fn periodic_point(n: &Necklace, w: &Address) -> Result<PeriodicPoint> {
    if w.is_empty() {
        return Err(Error::InvalidArgument(
            "periodic word must be nonempty".into(),
        ));
    }
    let point = n.similarity_of(w).fixed_point()?;
    let p = w.len();
    Ok(PeriodicPoint {
        word: w.clone(),
        point,
        period: p,
        multiplier: (n.m() as f64 / 4.0).powi(p as i32),
    })
}

/// Shortest word whose repetition gives `w`.
pub fn primitive_root(w: &[usize]) -> &[usize] {
    let p = w.len();
    (1..=p)
        .filter(|&d| p.is_multiple_of(d))
        .find(|&d| w.iter().enumerate().all(|(i, &x)| x == w[i % d]))
        .map(|d| &w[..d])
        .unwrap_or(w)
}

/// Lexicographically least cyclic rotation.
pub fn canonical_rotation(w: &[usize]) -> Vec<usize> {
    (0..w.len().max(1))
        .map(|r| w[r..].iter().chain(&w[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// One point per periodic orbit with period dividing some length `≤ p_max`.
///
/// All words are listed when there are at most `cap` of them; otherwise
/// `cap` words are drawn uniformly from the words of length `≤ p_max`.
pub fn enumerate_periodic(
    n: &Necklace,
    p_max: usize,
    cap: usize,
    seed: u64,
) -> Result<Vec<PeriodicPoint>> {
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    let m = n.m();
    let total: f64 = (1..=p_max).map(|p| (m as f64).powi(p as i32)).sum();
    let words = if total <= cap as f64 {
        all_words(m, p_max)
    } else {
        sample_words(m, p_max, cap, seed)
    };
    let mut seen = HashSet::new();
    let mut canonical = Vec::new();
    for w in words {
        let c = canonical_rotation(primitive_root(&w));
        if seen.insert(c.clone()) {
            canonical.push(c);
        }
    }
    canonical
        .into_par_iter()
        .map(|w| periodic_point(n, &Address::new(w, m)?))
        .collect()
}

/// Every word of length `1..=p_max`, shorter words first, lexicographic.
fn all_words(m: usize, p_max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..p_max {
        layer = layer
            .iter()
            .flat_map(|w| {
                (1..=m).map(move |j| {
                    let mut v = w.clone();
                    v.push(j);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn sample_words(m: usize, p_max: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let weights: Vec<f64> = (1..=p_max).map(|p| (m as f64).powi(p as i32)).collect();
    let total: f64 = weights.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            let mut len = p_max;
            for (i, w) in weights.iter().enumerate() {
                if u < *w {
                    len = i + 1;
                    break;
                }
                u -= w;
            }
            (0..len).map(|_| rng.random_range(1..=m)).collect()
        })
        .collect()
}

/// One-sided Hausdorff distance from centers of `samples` random stage-`sample_k`
/// tori to the periodic points of all words of length `≤ p_max`.
pub fn density_report(
    n: &Necklace,
    p_max: usize,
    sample_k: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if p_max == 0 || sample_k < p_max {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= p_max <= sample_k, got p_max={p_max}, sample_k={sample_k}"
        )));
    }
    let m = n.m();
    let periodic: Vec<Vec3> = all_words(m, p_max)
        .into_par_iter()
        .map(|w| n.similarity_of(&Address::new(w, m)?).fixed_point())
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let refs: Vec<Vec3> = (0..samples)
        .map(|_| {
            let digits = (0..sample_k).map(|_| rng.random_range(1..=m)).collect();
            Address::new(digits, m).map(|a| n.torus_at(&a).core.center)
        })
        .collect::<Result<_>>()?;
    Ok(refs
        .par_iter()
        .map(|r| {
            periodic
                .iter()
                .map(|q| q.distance(*r))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max))
}
