//! Computable dynamics of the necklace map.
//!
//! On the stage-1 tori the map is `φ_j⁻¹`; points of `T0` outside every child
//! leave `T0` in one step. Only that contract is used here: once an orbit
//! exits, its later positions come from the radial exterior model and are
//! labelled as modelled.
//!
//! Escape classification is done in the original coordinates. At depth `k`
//! the point is tested against the stage-`k` tori `Φ_a(T0)`, with `Φ_a` the
//! composed (contracting) similarity of the itinerary so far. Rounding never
//! gets amplified, and the boundary band `tol` stays an absolute distance in
//! the input frame at every depth. A point survives depth `k` exactly when
//! some length-`k` address has a torus whose `tol`-band contains it.

mod dilatation;
mod dimension;
mod periodic;

pub use dilatation::{
    default_step, dilatation_estimate, dilatation_report, numerical_jacobian, singular_values,
    Dilatation, DilatationMap, DilatationReport, DilatationSample,
};
pub use dimension::{
    box_dimension_estimate, chaos_game_sample, necklace_box_scales, similarity_dimension,
    BoxDimension,
};
pub use periodic::{
    canonical_rotation, density_report, enumerate_periodic, periodic_point, primitive_root,
    PeriodicPoint,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom3::{Similarity3, Vec3, BOUNDARY_TOL};
use crate::necklace::{Address, Necklace};

/// Budget used when none is given; at ratio `4/m ≤ 1/4` the stage-40 tori
/// are far below double precision.
pub const DEFAULT_BUDGET: usize = 40;

/// Cap on search nodes when boundary bands of sibling tori overlap.
const MAX_SEARCH_NODES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "depth", rename_all = "snake_case")]
pub enum EscapeOutcome {
    /// Outside `T0` from the start.
    Exterior,
    /// In `X_k` but not in `X_{k+1}`.
    EscapedAtDepth(usize),
    /// In `X_K` for the whole budget `K`.
    SurvivedBudget(usize),
}

impl EscapeOutcome {
    /// Number of similarity steps the orbit stays in the necklace region.
    pub fn depth(self) -> Option<usize> {
        match self {
            EscapeOutcome::Exterior => None,
            EscapeOutcome::EscapedAtDepth(k) | EscapeOutcome::SurvivedBudget(k) => Some(k),
        }
    }

    pub fn survived(self) -> bool {
        matches!(self, EscapeOutcome::SurvivedBudget(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepResult {
    MappedTo {
        point: Vec3,
        digit: usize,
    },
    /// In `T0` but in no child: the next step leaves `T0`.
    ExitsNow,
    NotInT0,
}

/// One application of the map inside the necklace region.
pub fn inner_step(n: &Necklace, p: Vec3) -> Result<StepResult> {
    if !n.t0().contains(p, BOUNDARY_TOL).is_in() {
        return Ok(StepResult::NotInT0);
    }
    Ok(match n.locate_child(p)? {
        Some(j) => StepResult::MappedTo {
            point: n.sim(j).apply_inverse(p),
            digit: j,
        },
        None => StepResult::ExitsNow,
    })
}

pub fn escape_depth(n: &Necklace, p: Vec3, budget: usize) -> Result<EscapeOutcome> {
    escape_itinerary(n, p, budget).map(|(o, _)| o)
}

/// Escape outcome together with the address realizing the depth.
pub fn escape_itinerary(n: &Necklace, p: Vec3, budget: usize) -> Result<(EscapeOutcome, Address)> {
    escape_itinerary_tol(n, p, budget, BOUNDARY_TOL)
}

pub fn escape_itinerary_tol(
    n: &Necklace,
    p: Vec3,
    budget: usize,
    tol: f64,
) -> Result<(EscapeOutcome, Address)> {
    if budget == 0 {
        return Err(Error::InvalidArgument(
            "escape budget must be at least 1".into(),
        ));
    }
    if !n.t0().contains(p, tol).is_in() {
        return Ok((EscapeOutcome::Exterior, Address::root()));
    }
    let mut search = Search {
        n,
        p,
        budget,
        tol,
        path: Vec::with_capacity(budget),
        best: Vec::new(),
        nodes: 0,
    };
    search.descend(&Similarity3::IDENTITY);
    let depth = search.best.len();
    let outcome = if depth == budget {
        EscapeOutcome::SurvivedBudget(budget)
    } else {
        EscapeOutcome::EscapedAtDepth(depth)
    };
    Ok((outcome, Address::new(search.best, n.m())?))
}

struct Search<'a> {
    n: &'a Necklace,
    p: Vec3,
    budget: usize,
    tol: f64,
    path: Vec<usize>,
    best: Vec<usize>,
    nodes: usize,
}

impl Search<'_> {
    /// Depth-first over children containing `p`; returns true once the
    /// budget is reached.
    fn descend(&mut self, prefix: &Similarity3) -> bool {
        if self.path.len() > self.best.len() {
            self.best.clone_from(&self.path);
        }
        if self.path.len() == self.budget {
            return true;
        }
        self.nodes += 1;
        if self.nodes > MAX_SEARCH_NODES {
            return false;
        }
        // deepest containment first, so a sibling that only holds `p` inside
        // its boundary band is tried last
        let mut candidates: Vec<(f64, usize, Similarity3)> = (1..=self.n.m())
            .filter_map(|j| {
                let sim = prefix.compose(self.n.sim(j));
                let t = self.n.t0().transformed(&sim);
                let excess = t.core.distance_to(self.p) - t.tube;
                (excess <= self.tol).then_some((excess, j, sim))
            })
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, j, sim) in candidates {
            self.path.push(j);
            let done = self.descend(&sim);
            self.path.pop();
            if done {
                return true;
            }
        }
        false
    }
}

/// `Φ_a(fix(Φ_tail))`: the necklace point with address `a · tail · tail · …`.
pub fn coding_point(n: &Necklace, a: &Address, tail: &Address) -> Result<Vec3> {
    if tail.is_empty() {
        return Err(Error::InvalidArgument(
            "coding tail must be nonempty".into(),
        ));
    }
    let x = n.similarity_of(tail).fixed_point()?;
    Ok(n.similarity_of(a).apply(x))
}

/// `(r, θ, x3) ↦ (r, θ·m/2, x3)`.
pub fn winding_map(p: Vec3, m: usize) -> Vec3 {
    let r = p.x.hypot(p.y);
    if r == 0.0 {
        return p;
    }
    let theta = p.y.atan2(p.x) * (m as f64 / 2.0);
    Vec3::from_cylindrical(r, theta, p.z)
}

/// Half-turn about the x1-axis.
pub fn involution(p: Vec3) -> Vec3 {
    Vec3::new(p.x, -p.y, -p.z)
}

/// Radial stand-in for the exterior power map: spheres of radius `r` go to
/// spheres of radius `r^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorModel {
    pub d: u32,
}

impl ExteriorModel {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!(
                "exterior degree must be >= 2, got {d}"
            )));
        }
        Ok(Self { d })
    }

    /// `⌊√m⌋`, at least 2.
    pub fn for_multiplicity(m: usize) -> Self {
        let d = (m as f64).sqrt().floor() as u32;
        Self { d: d.max(2) }
    }

    /// Radius of the ball the outer region starts from.
    pub fn inner_radius(&self) -> f64 {
        2.0
    }

    /// `2^d`, the image radius of the inner ball.
    pub fn escape_radius(&self) -> f64 {
        2f64.powi(self.d as i32)
    }
}

pub fn exterior_model_map(p: Vec3, model: &ExteriorModel) -> Result<Vec3> {
    let r = p.norm();
    if r == 0.0 {
        return Err(Error::UndefinedAtOrigin);
    }
    Ok(p * r.powi(model.d as i32 - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitKind {
    /// Left through `T0 \ X1` after some similarity steps.
    ExitsNow,
    /// Started outside `T0`.
    NotInT0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitEvent {
    /// Similarity steps taken before the exit.
    pub step: usize,
    pub kind: ExitKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub itinerary: Vec<usize>,
    /// Positions inside the necklace region, starting with the input point.
    pub inner_positions: Vec<Vec3>,
    pub exit: Option<ExitEvent>,
    /// Whether the hand-off pushed the point out to radius 2.
    pub handoff_clamped: bool,
    /// Norms along the modelled exterior orbit, starting at the hand-off.
    pub exterior_norms: Vec<f64>,
    /// Whether a modelled norm reached `2^d`.
    pub certified_escape: bool,
    /// Exterior positions come from the radial model, not the true map.
    pub exterior_is_model: bool,
}

/// Orbit of `p` for `max_iter` steps: similarity steps while inside the
/// chain, then the exterior model from the hand-off point.
pub fn orbit(n: &Necklace, model: &ExteriorModel, p: Vec3, max_iter: usize) -> Result<OrbitRecord> {
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let (outcome, address) = escape_itinerary(n, p, max_iter)?;
    let digits = address.digits().to_vec();

    let mut inner_positions = vec![p];
    let mut prefix = Similarity3::IDENTITY;
    for &d in &digits {
        prefix = prefix.compose(n.sim(d));
        inner_positions.push(prefix.apply_inverse(p));
    }

    let exit = match outcome {
        EscapeOutcome::SurvivedBudget(_) => None,
        EscapeOutcome::Exterior => Some(ExitEvent {
            step: 0,
            kind: ExitKind::NotInT0,
        }),
        EscapeOutcome::EscapedAtDepth(k) => Some(ExitEvent {
            step: k,
            kind: ExitKind::ExitsNow,
        }),
    };

    let mut record = OrbitRecord {
        itinerary: digits,
        inner_positions,
        exit,
        handoff_clamped: false,
        exterior_norms: Vec::new(),
        certified_escape: false,
        exterior_is_model: true,
    };
    let Some(event) = exit else {
        return Ok(record);
    };

    let start = *record.inner_positions.last().unwrap();
    let r = start.norm();
    let mut y = if r >= model.inner_radius() {
        start
    } else {
        record.handoff_clamped = true;
        start.normalized().unwrap_or(Vec3::X) * model.inner_radius()
    };
    record.exterior_norms.push(y.norm());
    let remaining = max_iter.saturating_sub(event.step + 1);
    for _ in 0..remaining {
        let next = exterior_model_map(y, model)?;
        if !next.is_finite() {
            break;
        }
        y = next;
        record.exterior_norms.push(y.norm());
    }
    record.certified_escape = record
        .exterior_norms
        .iter()
        .any(|&r| r >= model.escape_radius());
    Ok(record)
}
