//! The geometrically self-similar necklace: a unit core circle in the plane
//! x3 = 0, a chain of `m` small circles threaded around it, and the `m`
//! similarities carrying the stage-0 torus onto the stage-1 tori.
//!
//! Child `j` (1-based) is centered at angle `(2j - 1)π/m`. Every child circle
//! contains the tangent direction of the core at its center; odd children are
//! tilted 45° upward from the core plane (toward `+x3` on the outer side) and
//! even children 45° downward. Adjacent children therefore lie in
//! perpendicular planes sharing a tangent line, which makes them a Hopf pair,
//! and the half-turn about the x1-axis swaps the two tilts, which makes child 1
//! and child `m` mirror images.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::involution;
use crate::error::{Error, Result};
use crate::geom3::{
    circle_circle_distance, Circle3, Rotation3, Similarity3, SolidTorus, Vec3, BOUNDARY_TOL,
};
use crate::linking::{link_matrix, LinkMatrix};

/// A finite word over the child digits `1..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(Vec<usize>);

impl Address {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    /// Checks every digit lies in `1..=m`.
    pub fn new(digits: Vec<usize>, m: usize) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| d == 0 || d > m) {
            return Err(Error::InvalidArgument(format!("digit {d} outside 1..={m}")));
        }
        Ok(Self(digits))
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Address) -> Address {
        let mut d = self.0.clone();
        d.extend_from_slice(&other.0);
        Address(d)
    }

    pub fn pushed(&self, digit: usize) -> Address {
        let mut d = self.0.clone();
        d.push(digit);
        Address(d)
    }

    pub fn prefix(&self, k: usize) -> Address {
        Address(self.0[..k.min(self.0.len())].to_vec())
    }
}

impl From<Address> for Vec<usize> {
    fn from(a: Address) -> Self {
        a.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageSummary {
    pub k: usize,
    /// `m^k`, or `None` past `u128`.
    pub count: Option<u128>,
    pub max_diameter: f64,
}

#[derive(Debug, Clone)]
pub struct Necklace {
    m: usize,
    t0: SolidTorus,
    circles: Vec<Circle3>,
    sims: Vec<Similarity3>,
    children: Vec<SolidTorus>,
    child_tube: f64,
}

impl Necklace {
    /// Builds the necklace of multiplicity `m` (even, at least 10).
    pub fn build(m: i64) -> Result<Self> {
        if m < 10 || m % 2 != 0 {
            return Err(Error::InvalidMultiplicity(m));
        }
        let m = m as usize;
        let mf = m as f64;
        let ratio = 4.0 / mf;
        let t0 = SolidTorus {
            core: Circle3::unit(),
            tube: 8.0 / mf,
        };

        let circles: Vec<Circle3> = (1..=m).map(|j| child_circle(m, j)).collect();

        let base: [Similarity3; 2] = [0, 1].map(|i| {
            let c = &circles[i];
            Similarity3::new(ratio, Rotation3::aligning(Vec3::Z, c.normal), c.center)
                .expect("positive ratio")
        });
        let sims: Vec<Similarity3> = (0..m)
            .map(|idx| {
                let k = idx / 2;
                if k == 0 {
                    return base[idx % 2];
                }
                let rho_k = Similarity3::rotation(Rotation3::about_x3(2.0 * TAU * k as f64 / mf));
                rho_k.compose(&base[idx % 2]).compose(&rho_k.inverse())
            })
            .collect();
        let children = sims.iter().map(|s| t0.transformed(s)).collect();

        Ok(Self {
            m,
            t0,
            circles,
            sims,
            children,
            child_tube: 32.0 / (mf * mf),
        })
    }

    /// Same geometry with the child tube radius replaced, for perturbation
    /// experiments against [`validate`].
    pub fn with_child_tube(mut self, tube: f64) -> Self {
        self.child_tube = tube;
        for c in &mut self.children {
            c.tube = tube;
        }
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ratio(&self) -> f64 {
        4.0 / self.m as f64
    }

    pub fn t0(&self) -> &SolidTorus {
        &self.t0
    }

    pub fn child_tube(&self) -> f64 {
        self.child_tube
    }

    /// Child core circle `j` in `1..=m`.
    pub fn circle(&self, j: usize) -> &Circle3 {
        &self.circles[j - 1]
    }

    pub fn circles(&self) -> &[Circle3] {
        &self.circles
    }

    /// Similarity `j` in `1..=m`, carrying the stage-0 torus onto child `j`.
    pub fn sim(&self, j: usize) -> &Similarity3 {
        &self.sims[j - 1]
    }

    pub fn sims(&self) -> &[Similarity3] {
        &self.sims
    }

    pub fn child(&self, j: usize) -> &SolidTorus {
        &self.children[j - 1]
    }

    /// Whether `m = d²` for an even `d`, the case the exterior power map needs.
    pub fn is_even_square(&self) -> bool {
        let d = (self.m as f64).sqrt().round() as usize;
        d * d == self.m && d.is_multiple_of(2)
    }

    /// The rotation by `4π/m` about the x3-axis.
    pub fn rho(&self) -> Similarity3 {
        Similarity3::rotation(Rotation3::about_x3(2.0 * TAU / self.m as f64))
    }

    /// Index of the image of child `j` under [`rho`](Self::rho).
    pub fn rho_index(&self, j: usize) -> usize {
        (j + 1) % self.m + 1
    }

    /// Composition `φ_{a1} ∘ … ∘ φ_{ak}`, folded from the left.
    pub fn similarity_of(&self, a: &Address) -> Similarity3 {
        a.digits().iter().fold(Similarity3::IDENTITY, |acc, &d| {
            acc.compose(&self.sims[d - 1])
        })
    }

    pub fn torus_at(&self, a: &Address) -> SolidTorus {
        self.t0.transformed(&self.similarity_of(a))
    }

    /// The child whose torus holds `p` (boundary band included).
    pub fn locate_child(&self, p: Vec3) -> Result<Option<usize>> {
        self.locate_child_tol(p, BOUNDARY_TOL)
    }

    pub fn locate_child_tol(&self, p: Vec3, tol: f64) -> Result<Option<usize>> {
        let mut found = None;
        for (idx, c) in self.children.iter().enumerate() {
            if c.contains(p, tol).is_in() {
                if let Some(first) = found {
                    return Err(Error::MultipleChildren {
                        first,
                        second: idx + 1,
                    });
                }
                found = Some(idx + 1);
            }
        }
        Ok(found)
    }

    pub fn stage_summary(&self, k: usize) -> StageSummary {
        let count = u32::try_from(k)
            .ok()
            .and_then(|k| (self.m as u128).checked_pow(k));
        StageSummary {
            k,
            count,
            max_diameter: max_diameter(self.m, k),
        }
    }
}

/// `c_k = (4/m)^k · (2 + 16/m)`, the diameter of any stage-`k` torus.
pub fn max_diameter(m: usize, k: usize) -> f64 {
    let mf = m as f64;
    (4.0 / mf).powi(k as i32) * (2.0 + 16.0 / mf)
}

fn child_circle(m: usize, j: usize) -> Circle3 {
    let theta = (2 * j - 1) as f64 * PI / m as f64;
    let radial = Vec3::from_cylindrical(1.0, theta, 0.0);
    let tilt = if j % 2 == 1 { -1.0 } else { 1.0 };
    let normal = (Vec3::Z + radial * tilt) * FRAC_1_SQRT_2;
    Circle3 {
        center: radial,
        radius: 4.0 / m as f64,
        normal,
    }
}

pub fn build_necklace(m: i64) -> Result<Necklace> {
    Necklace::build(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    ChildMaps,
    Disjointness,
    Containment,
    RhoEquivariance,
    IotaSymmetry,
    LinkingPattern,
    GaussAgreement,
}

/// One validation record. `margin` is signed: positive means the check holds
/// with that much room.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: CheckName,
    pub pass: bool,
    pub margin: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageOneConstants {
    pub t0_tube: f64,
    pub circle_radius: f64,
    pub child_tube: f64,
    /// Smallest certified distance between child tube surfaces.
    pub min_pairwise_clearance: f64,
    /// Smallest certified gap between a child torus and the boundary of T0.
    pub containment_clearance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub m: usize,
    pub passed: bool,
    pub even_square: bool,
    pub checks: Vec<CheckRecord>,
    pub constants: StageOneConstants,
    pub link_matrix: Option<LinkMatrix>,
}

impl ValidationReport {
    pub fn check(&self, name: CheckName) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ValidateOptions {
    /// Initial grid of the circle-distance branch and bound.
    pub grid_n: usize,
    /// Samples per child circle for the containment certificate.
    pub containment_samples: usize,
    /// Symmetry deviation threshold.
    pub symmetry_tol: f64,
    /// `None` skips the linking checks.
    pub poly_n: Option<usize>,
    pub quad_n: usize,
    pub gauss_tol: f64,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            grid_n: 64,
            containment_samples: 4096,
            symmetry_tol: 1e-10,
            poly_n: Some(512),
            quad_n: 256,
            gauss_tol: 0.1,
            seed: 0,
        }
    }
}

impl ValidateOptions {
    pub fn geometry_only() -> Self {
        Self {
            poly_n: None,
            ..Self::default()
        }
    }
}

fn record(name: CheckName, margin: f64, tolerance: f64) -> CheckRecord {
    CheckRecord {
        name,
        pass: margin > 0.0,
        margin,
        tolerance,
    }
}

/// Runs every stage-1 check with default options.
pub fn validate(n: &Necklace) -> Result<ValidationReport> {
    validate_with(n, &ValidateOptions::default())
}

/// Failed checks are recorded, not returned as errors; errors only come from
/// the linking backends.
pub fn validate_with(n: &Necklace, opts: &ValidateOptions) -> Result<ValidationReport> {
    let m = n.m;
    let mut checks = Vec::new();
    let tau0 = n.t0.core;

    // φ_j maps τ0 onto τ_j
    let maps_dev = (1..=m)
        .map(|j| {
            tau0.samples(64)
                .into_iter()
                .map(|p| n.circle(j).distance_to(n.sim(j).apply(p)))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    checks.push(record(
        CheckName::ChildMaps,
        opts.symmetry_tol - maps_dev,
        opts.symmetry_tol,
    ));

    let pairs: Vec<(usize, usize)> = (1..=m)
        .flat_map(|i| (i + 1..=m).map(move |j| (i, j)))
        .collect();
    let clearance = pairs
        .par_iter()
        .map(|&(i, j)| circle_circle_distance(n.circle(i), n.circle(j), opts.grid_n).lower)
        .reduce(|| f64::INFINITY, f64::min)
        - 2.0 * n.child_tube;
    checks.push(record(CheckName::Disjointness, clearance, 0.0));

    let samples = opts.containment_samples.max(8);
    let containment = (1..=m)
        .into_par_iter()
        .map(|j| {
            let c = n.circle(j);
            let half_step = PI * c.radius / samples as f64;
            let far = c
                .samples(samples)
                .into_iter()
                .map(|p| tau0.distance_to(p))
                .fold(0.0, f64::max);
            n.t0.tube - (far + half_step + n.child_tube)
        })
        .reduce(|| f64::INFINITY, f64::min);
    checks.push(record(CheckName::Containment, containment, 0.0));

    let rho = n.rho();
    let probes = Circle3::unit().samples(16);
    let rho_dev = (1..=m)
        .map(|j| {
            let k = n.rho_index(j);
            let circle_dev = n
                .circle(j)
                .transformed(&rho)
                .deviation_oriented(n.circle(k));
            let conj = rho.compose(n.sim(j)).compose(&rho.inverse());
            let sim_dev = probes
                .iter()
                .map(|&p| conj.apply(p).distance(n.sim(k).apply(p)))
                .fold(0.0, f64::max);
            circle_dev.max(sim_dev)
        })
        .fold(0.0, f64::max);
    checks.push(record(
        CheckName::RhoEquivariance,
        opts.symmetry_tol - rho_dev,
        opts.symmetry_tol,
    ));

    let iota = |c: &Circle3| Circle3 {
        center: involution(c.center),
        radius: c.radius,
        normal: involution(c.normal),
    };
    let iota_dev = iota(n.circle(1))
        .deviation_unoriented(n.circle(m))
        .max(iota(n.circle(m)).deviation_unoriented(n.circle(1)));
    checks.push(record(
        CheckName::IotaSymmetry,
        opts.symmetry_tol - iota_dev,
        opts.symmetry_tol,
    ));

    let link = match opts.poly_n {
        Some(poly_n) => {
            let lm = link_matrix(n, poly_n, opts.quad_n, opts.seed)?;
            let mismatches = lm.pattern_mismatches();
            checks.push(CheckRecord {
                name: CheckName::LinkingPattern,
                pass: mismatches == 0,
                margin: 1.0 - mismatches as f64,
                tolerance: 0.0,
            });
            checks.push(record(
                CheckName::GaussAgreement,
                opts.gauss_tol - lm.max_gauss_gap,
                opts.gauss_tol,
            ));
            Some(lm)
        }
        None => None,
    };

    Ok(ValidationReport {
        m,
        passed: checks.iter().all(|c| c.pass),
        even_square: n.is_even_square(),
        checks,
        constants: StageOneConstants {
            t0_tube: n.t0.tube,
            circle_radius: n.ratio(),
            child_tube: n.child_tube,
            min_pairwise_clearance: clearance,
            containment_clearance: containment,
        },
        link_matrix: link,
    })
}

/// Smallest even `m` in `10..=max_m` whose necklace passes every check.
/// Geometry is screened first; the linking checks only run on survivors.
pub fn minimal_valid_multiplicity(max_m: usize, opts: &ValidateOptions) -> Result<Option<usize>> {
    for m in (10..=max_m).step_by(2) {
        let n = Necklace::build(m as i64)?;
        if !validate_with(
            &n,
            &ValidateOptions {
                poly_n: None,
                ..*opts
            },
        )?
        .passed
        {
            continue;
        }
        if validate_with(&n, opts)?.passed {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3::Membership;

    pub(crate) const M_STAR: i64 = 38;

    #[test]
    fn constants_for_sixteen() {
        let n = Necklace::build(16).unwrap();
        assert_eq!(n.t0().tube, 0.5);
        assert_eq!(n.circle(1).radius, 0.25);
        assert_eq!(n.child_tube(), 0.125);
        for j in 1..=16 {
            assert_eq!(n.circle(j).radius, 0.25);
            assert_eq!(n.sim(j).scale(), 0.25);
        }
    }

    #[test]
    fn rejects_bad_multiplicity() {
        for m in [7, 8, 9, 11, -4, 0] {
            assert!(
                matches!(Necklace::build(m), Err(Error::InvalidMultiplicity(_))),
                "{m}"
            );
        }
    }

    #[test]
    fn even_square_flag() {
        assert!(Necklace::build(16).unwrap().is_even_square());
        assert!(Necklace::build(36).unwrap().is_even_square());
        assert!(!Necklace::build(38).unwrap().is_even_square());
        // 5² is odd
        assert!(!Necklace::build(26).unwrap().is_even_square());
    }

    #[test]
    fn sims_carry_core_onto_child_circles() {
        let n = Necklace::build(M_STAR).unwrap();
        for j in 1..=n.m() {
            for p in Circle3::unit().samples(64) {
                assert!(n.circle(j).distance_to(n.sim(j).apply(p)) < 1e-10);
            }
            let image = Circle3::unit().transformed(n.sim(j));
            assert!(image.deviation_oriented(n.circle(j)) < 1e-14);
        }
    }

    #[test]
    fn torus_at_examples() {
        let n = Necklace::build(M_STAR).unwrap();
        let m = n.m() as f64;
        assert_eq!(n.torus_at(&Address::root()), *n.t0());
        for j in 1..=n.m() {
            let t = n.torus_at(&Address::new(vec![j], n.m()).unwrap());
            assert!((t.tube - 32.0 / (m * m)).abs() < 1e-16);
        }
        let a = Address::new(vec![1, 1], n.m()).unwrap();
        let t = n.torus_at(&a);
        assert!((t.core.radius - (4.0 / m).powi(2)).abs() < 1e-16);
        // sequential application oracle
        let s1 = n.sim(1);
        for p in Circle3::unit().samples(32) {
            let direct = s1.apply(s1.apply(p));
            assert!(t.core.distance_to(direct) < 1e-14);
        }
    }

    #[test]
    fn locate_child_examples() {
        let n = Necklace::build(M_STAR).unwrap();
        for p in n.circle(1).samples(50) {
            assert_eq!(n.locate_child(p).unwrap(), Some(1));
        }
        assert_eq!(n.locate_child(Vec3::ZERO).unwrap(), None);
        assert_eq!(n.locate_child(n.circle(1).center).unwrap(), None);
    }

    #[test]
    fn locate_child_flags_overlapping_children() {
        let n = Necklace::build(M_STAR).unwrap();
        let fat = n.clone().with_child_tube(3.0 / 38.0);
        // the contact region between children 1 and 2
        let p = (n.circle(1).center + n.circle(2).center) * 0.5;
        assert!(matches!(
            fat.locate_child(p),
            Err(Error::MultipleChildren { .. })
        ));
    }

    #[test]
    fn stage_summary_examples() {
        let n = Necklace::build(16).unwrap();
        assert_eq!(n.stage_summary(0).max_diameter, 3.0);
        assert_eq!(n.stage_summary(1).max_diameter, 0.75);
        assert_eq!(n.stage_summary(2).count, Some(256));
        let ratio = n.stage_summary(10).max_diameter / n.stage_summary(0).max_diameter;
        assert!((ratio - 0.25f64.powi(10)).abs() < 1e-20);
        let mut prev = f64::INFINITY;
        for k in 0..30 {
            let c = n.stage_summary(k).max_diameter;
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn stage_tori_have_the_summary_diameter() {
        let n = Necklace::build(M_STAR).unwrap();
        let a = Address::new(vec![3, 17, 2], n.m()).unwrap();
        let t = n.torus_at(&a);
        assert!((t.diameter() - max_diameter(n.m(), 3)).abs() < 1e-15);
        assert!((t.tube / n.t0().tube - (4.0 / 38.0f64).powi(3)).abs() < 1e-15);
    }

    #[test]
    fn geometry_fails_below_the_minimal_multiplicity() {
        let opts = ValidateOptions::geometry_only();
        let below = validate_with(&Necklace::build(M_STAR - 2).unwrap(), &opts).unwrap();
        assert!(!below.check(CheckName::Disjointness).unwrap().pass);
        let at = validate_with(&Necklace::build(M_STAR).unwrap(), &opts).unwrap();
        assert!(at.passed, "{at:#?}");
    }

    #[test]
    fn doubled_child_tube_breaks_disjointness() {
        let n = Necklace::build(M_STAR).unwrap();
        let tube = n.child_tube();
        let fat = n.with_child_tube(2.0 * tube);
        let report = validate_with(&fat, &ValidateOptions::geometry_only()).unwrap();
        let rec = report.check(CheckName::Disjointness).unwrap();
        assert!(!rec.pass && rec.margin < 0.0);
        assert!(!report.passed);
    }

    #[test]
    fn symmetry_checks_hold_tightly() {
        let report = validate_with(
            &Necklace::build(M_STAR).unwrap(),
            &ValidateOptions::geometry_only(),
        )
        .unwrap();
        for name in [
            CheckName::RhoEquivariance,
            CheckName::IotaSymmetry,
            CheckName::ChildMaps,
        ] {
            let rec = report.check(name).unwrap();
            assert!(rec.pass && rec.margin > 0.99e-10, "{rec:?}");
        }
    }

    #[test]
    fn children_sit_deep_inside_the_parent() {
        let n = Necklace::build(M_STAR).unwrap();
        for j in 1..=n.m() {
            let c = n.child(j);
            for k in 0..16 {
                for l in 0..16 {
                    let p = c.surface_point(TAU * k as f64 / 16.0, TAU * l as f64 / 16.0);
                    assert_eq!(n.t0().contains(p, BOUNDARY_TOL), Membership::Inside);
                }
            }
        }
    }
}
