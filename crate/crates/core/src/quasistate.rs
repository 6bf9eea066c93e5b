//! The restriction of a Calabi quasimorphism to toric Hamiltonians:
//! `ζ(F̄) = ∫F̄ dDH − ∫F̄ dσ`, with σ a Dirac measure at the special point
//! of the base (barycenter, tree median, or a tuple of those).

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basespace::{BasePoint, BaseSpace, MeasuredTree, TreePoint};
use crate::error::{Error, Result};
use crate::funcspace::{Piece, Region, SmoothFunction};
use crate::measure::{integrate, integrate_sigma, Engine, PushforwardMeasure, QuasiStateMeasure};
use crate::quadrature;
use crate::symmetry::{fixed_locus, region_separation, DisplaceabilityCertificate};

/// Tolerance for [`calabi_property_check`] and [`lipschitz_check`].
pub const PROPERTY_TOLERANCE: f64 = 1e-9;

/// Singular values below this fraction of the largest do not count toward the rank.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiStateModel {
    pub space: BaseSpace,
    pub dh: PushforwardMeasure,
    pub sigma: QuasiStateMeasure,
}

impl QuasiStateModel {
    /// CPⁿ with `∫ωⁿ = 1`: the unit simplex, uniform DH measure of mass 1,
    /// σ the unit Dirac mass at the barycenter.
    pub fn projective(n: usize) -> Result<Self> {
        Self::standard(&BaseSpace::simplex(n, 1.0)?)
    }

    /// DH measure with unit mass per unit simplex, σ a Dirac mass at the
    /// special point carrying the whole DH mass (so constants have ζ = 0).
    pub fn standard(space: &BaseSpace) -> Result<Self> {
        let dh = PushforwardMeasure::duistermaat_heckman(space);
        let point = special_point(space)?;
        let sigma = QuasiStateMeasure::Dirac { point, mass: dh.total_mass() };
        Self::new(space.clone(), dh, sigma)
    }

    pub fn new(space: BaseSpace, dh: PushforwardMeasure, sigma: QuasiStateMeasure) -> Result<Self> {
        if dh.space() != &space {
            return Err(Error::Structure("measure lives on a different space".into()));
        }
        let (point, _) = sigma.atom();
        space.require_contains(&point, 1e-12)?;
        let parts = match &point {
            BasePoint::Tuple(parts) => parts.clone(),
            p => vec![p.clone()],
        };
        for (factor, part) in space.factors().iter().zip(&parts) {
            if let (BaseSpace::Simplex(s), BasePoint::Coords(c)) = (factor, part) {
                let fixed = fixed_locus(s).singleton(s).expect("simplex groups fix one point");
                if crate::basespace::euclid(&fixed, c) > 1e-12 * s.scale().max(1.0) {
                    return Err(Error::Structure(format!("σ atom {c:?} is not fixed by the symmetry group")));
                }
            }
        }
        Ok(Self { space, dh, sigma })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToricHamiltonian {
    pub fbar: SmoothFunction,
    /// `(f̄, m)` stands for `φ_F^m = φ_{mF}`.
    pub power: i64,
}

impl ToricHamiltonian {
    pub fn new(fbar: SmoothFunction) -> Self {
        Self { fbar, power: 1 }
    }

    pub fn with_power(fbar: SmoothFunction, power: i64) -> Self {
        Self { fbar, power }
    }
}

/// Barycenter on a simplex, median on a tree, tuple of those on a product.
pub fn special_point(space: &BaseSpace) -> Result<BasePoint> {
    match space {
        BaseSpace::Simplex(s) => Ok(BasePoint::Coords(s.barycenter())),
        BaseSpace::Tree(t) => Ok(BasePoint::Tree(tree_median(t).point)),
        BaseSpace::Product(p) => Ok(BasePoint::Tuple(p.factors().iter().map(special_point).collect::<Result<_>>()?)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MedianResult {
    pub point: TreePoint,
    /// False when the median set is a segment of positive length; `point`
    /// is then its midpoint.
    pub unique: bool,
    /// Length of the median set.
    pub spread: f64,
}

/// Mass on the far side of each edge endpoint: `(beyond_u, beyond_v)`,
/// excluding the edge itself.
fn side_masses(tree: &MeasuredTree) -> Vec<(f64, f64)> {
    let (order, parent) = tree.bfs(0);
    let mut below = vec![0.0; tree.vertex_count()];
    for &x in order.iter().rev() {
        if let Some(e) = parent[x] {
            let up = tree.other_end(e, x);
            below[up] += below[x] + tree.edges()[e].density.mass();
        }
    }
    let total = tree.total_mass();
    tree.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let m = edge.density.mass();
            if parent[edge.v] == Some(e) {
                (total - below[edge.v] - m, below[edge.v])
            } else {
                (below[edge.u], total - below[edge.u] - m)
            }
        })
        .collect()
}

/// Offsets `t` on an edge where the cumulative mass from `u` equals `target`.
fn level_interval(edge: &crate::basespace::TreeEdge, target: f64, tol: f64) -> Option<(f64, f64)> {
    let mut lo = None;
    let mut hi = None;
    for (start, len, dens) in edge.density.segments() {
        let c0 = edge.density.cumulative(start);
        let c1 = c0 + len * dens;
        if target < c0 - tol || target > c1 + tol {
            continue;
        }
        let (a, b) = if dens == 0.0 {
            (start, start + len)
        } else {
            let t = (start + (target - c0) / dens).clamp(start, start + len);
            (t, t)
        };
        lo = Some(lo.map_or(a, |x: f64| x.min(a)));
        hi = Some(hi.map_or(b, |x: f64| x.max(b)));
    }
    lo.zip(hi)
}

/// The median of a measured tree: every component of `T ∖ {m}` has at
/// most half the mass.
pub fn tree_median(tree: &MeasuredTree) -> MedianResult {
    let total = tree.total_mass();
    let half = total / 2.0;
    let tol = 1e-12 * total;
    let sides = side_masses(tree);
    let edges = tree.edges();

    // Candidate extreme points of the median set.
    let mut points: Vec<TreePoint> = Vec::new();
    for v in 0..tree.vertex_count() {
        let ok = tree.incident(v).iter().all(|&e| {
            let (bu, bv) = sides[e];
            let branch = edges[e].density.mass() + if edges[e].u == v { bv } else { bu };
            branch <= half + tol
        });
        if ok {
            points.push(TreePoint::Vertex(v));
        }
    }
    for (e, edge) in edges.iter().enumerate() {
        let (bu, _) = sides[e];
        if let Some((lo, hi)) = level_interval(edge, half - bu, tol) {
            for t in [lo, hi] {
                if t > 0.0 && t < edge.len {
                    points.push(TreePoint::Edge { edge: e, offset: t });
                }
            }
        }
    }

    let dist = |a: &TreePoint, b: &TreePoint| tree.distance(a, b).expect("median candidates lie on the tree");
    let (mut a, mut b, mut spread) = (points[0], points[0], 0.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = dist(&points[i], &points[j]);
            if d > spread {
                (a, b, spread) = (points[i], points[j], d);
            }
        }
    }
    let length_tol = 1e-12 * edges.iter().map(|e| e.len).sum::<f64>();
    if spread <= length_tol {
        return MedianResult { point: a, unique: true, spread };
    }
    MedianResult { point: point_along(tree, &a, &b, spread / 2.0), unique: false, spread }
}

/// Anchors of a point: `(vertex, distance)` for each nearest vertex.
fn anchors(tree: &MeasuredTree, p: &TreePoint) -> Vec<(usize, f64)> {
    match *p {
        TreePoint::Vertex(v) => vec![(v, 0.0)],
        TreePoint::Edge { edge, offset } => {
            let e = &tree.edges()[edge];
            vec![(e.u, offset), (e.v, e.len - offset)]
        }
    }
}

/// The point at distance `s` from `a` along the geodesic to `b`.
fn point_along(tree: &MeasuredTree, a: &TreePoint, b: &TreePoint, s: f64) -> TreePoint {
    if let (TreePoint::Edge { edge: ea, offset: ta }, TreePoint::Edge { edge: eb, offset: tb }) = (a, b) {
        if ea == eb {
            let dir = if tb >= ta { 1.0 } else { -1.0 };
            return TreePoint::Edge { edge: *ea, offset: ta + dir * s };
        }
    }
    // Choose the anchor pair realizing the distance.
    let mut best = (f64::INFINITY, 0, 0.0, 0, 0.0);
    for (ua, da) in anchors(tree, a) {
        for (vb, db) in anchors(tree, b) {
            let mid = tree.distance(&TreePoint::Vertex(ua), &TreePoint::Vertex(vb)).unwrap_or(f64::INFINITY);
            if da + mid + db < best.0 {
                best = (da + mid + db, ua, da, vb, db);
            }
        }
    }
    let (_, ua, da, vb, _) = best;
    let mut s = s;
    if s < da {
        let TreePoint::Edge { edge, offset } = *a else { unreachable!() };
        let dir = if tree.edges()[edge].u == ua { -1.0 } else { 1.0 };
        return TreePoint::Edge { edge, offset: offset + dir * s };
    }
    s -= da;
    // Vertex path ua → vb.
    let (_, parent) = tree.bfs(vb);
    let mut v = ua;
    while v != vb {
        let e = parent[v].expect("tree is connected");
        let len = tree.edges()[e].len;
        let next = tree.other_end(e, v);
        if s <= 0.0 {
            return TreePoint::Vertex(v);
        }
        if s < len {
            let offset = if tree.edges()[e].u == v { s } else { len - s };
            return TreePoint::Edge { edge: e, offset };
        }
        s -= len;
        v = next;
    }
    if s <= 0.0 {
        return TreePoint::Vertex(vb);
    }
    match *b {
        TreePoint::Edge { edge, .. } => {
            let e = &tree.edges()[edge];
            let offset = if e.u == vb { s } else { e.len - s };
            TreePoint::Edge { edge, offset }
        }
        TreePoint::Vertex(v) => TreePoint::Vertex(v),
    }
}

/// The three numbers of an evaluation: `zeta = calabi − sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub zeta: f64,
    pub calabi: f64,
    pub sigma: f64,
}

pub fn evaluate(model: &QuasiStateModel, h: &ToricHamiltonian, engine: Engine) -> Result<Evaluation> {
    let m = h.power as f64;
    let calabi = m * integrate(&model.dh, &h.fbar, engine)?;
    let sigma = m * integrate_sigma(&model.sigma, &model.space, &h.fbar)?;
    Ok(Evaluation { zeta: calabi - sigma, calabi, sigma })
}

/// `ζ = power · (∫f̄ dDH − ∫f̄ dσ)`.
pub fn zeta(model: &QuasiStateModel, h: &ToricHamiltonian, engine: Engine) -> Result<f64> {
    evaluate(model, h, engine).map(|e| e.zeta)
}

/// The Calabi homomorphism on the toric subgroup: `power · ∫f̄ dDH`.
pub fn calabi_value(model: &QuasiStateModel, h: &ToricHamiltonian, engine: Engine) -> Result<f64> {
    Ok(h.power as f64 * integrate(&model.dh, &h.fbar, engine)?)
}

/// Checks the certificate against `support_bound(f̄)`, then whether
/// `ζ = calabi_value` to [`PROPERTY_TOLERANCE`].
pub fn calabi_property_check(
    model: &QuasiStateModel,
    h: &ToricHamiltonian,
    certificate: &DisplaceabilityCertificate,
    engine: Engine,
) -> Result<bool> {
    let simplex = model
        .space
        .as_simplex()
        .ok_or_else(|| Error::Structure("certificates are defined on simplices".into()))?;
    if certificate.symmetry.dim() != simplex.dim() {
        return Err(Error::InvalidCertificate("symmetry has the wrong dimension".into()));
    }
    match h.fbar.support_bound() {
        Region::Pieces(ps) if ps.is_empty() => {}
        support => {
            let balls = support
                .balls()
                .ok_or_else(|| Error::InvalidCertificate("support bound is not a union of balls".into()))?;
            if region_separation(simplex, &certificate.symmetry, &balls).is_none() {
                return Err(Error::InvalidCertificate(format!(
                    "{} does not displace the support",
                    certificate.symmetry
                )));
            }
        }
    }
    let e = evaluate(model, h, engine)?;
    Ok((e.zeta - e.calabi).abs() <= PROPERTY_TOLERANCE)
}

/// Prefactor of the point term in the ball quasimorphism formula.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `δ⁻ⁿ⁻¹`.
    Paper,
    /// `δ⁻ⁿ`, from `H∘ϑ_δ = δF` and `ϑ_δ*ωⁿ = δⁿω_Bⁿ`.
    #[default]
    Derived,
}

impl Convention {
    pub fn prefactor(self, n: usize, delta: f64) -> f64 {
        match self {
            Convention::Paper => delta.powi(-(n as i32) - 1),
            Convention::Derived => delta.powi(-(n as i32)),
        }
    }
}

/// Evaluation point `n / ((n+1) δ)` of the ball quasimorphism.
pub fn evaluation_point(n: usize, delta: f64) -> f64 {
    n as f64 / ((n as f64 + 1.0) * delta)
}

fn check_mu_inputs(n: usize, delta: f64, profile: &SmoothFunction) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("δ = {delta} must lie in (0, 1]")));
    }
    let point = evaluation_point(n, delta);
    if point >= 1.0 {
        return Err(Error::EvaluationPoint { n, delta, point });
    }
    let upper = match profile.support_bound() {
        Region::Full => f64::INFINITY,
        Region::Pieces(ps) => ps
            .iter()
            .map(|p| match p {
                Piece::Ball { center, radius } if center.len() == 1 => center[0] + radius,
                Piece::Slab { hi, .. } => *hi,
                _ => f64::INFINITY,
            })
            .fold(f64::NEG_INFINITY, f64::max),
    };
    if upper > 1.0 + 1e-12 {
        return Err(Error::ProfileSupport(format!("profile support reaches {upper}, beyond 1")));
    }
    Ok(point)
}

const MU_PANELS: usize = 16;
const MU_POINTS: usize = 16;

/// `∫₀¹ F̃(s) n sⁿ⁻¹ ds − c(δ) F̃(n/((n+1)δ))`.
pub fn mu_delta_closed_form(n: usize, delta: f64, profile: &SmoothFunction, convention: Convention) -> Result<f64> {
    let point = check_mu_inputs(n, delta, profile)?;
    if convention == Convention::Paper && delta != 1.0 {
        log::warn!("prefactor δ^(-n-1) disagrees with the pullback construction at δ = {delta}");
    }
    let ni = n as i32;
    let ball = quadrature::integrate_1d(
        |s| Ok(profile.profile_at(s)? * n as f64 * s.powi(ni - 1)),
        0.0,
        1.0,
        &profile.breakpoints_1d(),
        MU_PANELS,
        MU_POINTS,
    )?;
    Ok(ball - convention.prefactor(n, delta) * profile.profile_at(point)?)
}

/// The toric function on Δₙ whose flow is the push-forward of `F̃(π|w|²)`
/// under `ϑ_δ`: `H̄(p) = δ F̃(Σp / δ)`.
pub fn pushed_forward_hamiltonian(delta: f64, profile: &SmoothFunction) -> Result<SmoothFunction> {
    Ok(SmoothFunction::radial(profile.dilate(delta)?).scaled(delta))
}

/// `δ⁻ⁿ⁻¹ · ζ(H̄)` on the CPⁿ model.
pub fn mu_delta_via_pullback(n: usize, delta: f64, profile: &SmoothFunction) -> Result<f64> {
    check_mu_inputs(n, delta, profile)?;
    let model = QuasiStateModel::projective(n)?;
    let h = ToricHamiltonian::new(pushed_forward_hamiltonian(delta, profile)?);
    Ok(delta.powi(-(n as i32) - 1) * zeta(&model, &h, Engine::Radial { panels: MU_PANELS })?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCertificate {
    pub matrix: Vec<Vec<f64>>,
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub min_singular_value: f64,
    pub tolerance: f64,
}

/// `M[i][j] = μ_{δᵢ}(profile_j)` with its numerical rank.
pub fn independence_certificate(
    n: usize,
    deltas: &[f64],
    profiles: &[SmoothFunction],
    convention: Convention,
) -> Result<IndependenceCertificate> {
    let k = deltas.len();
    if k == 0 {
        return Err(Error::Domain("need at least one δ".into()));
    }
    if profiles.len() < k {
        return Err(Error::Domain(format!("{} profiles for {k} deltas", profiles.len())));
    }
    for (i, d) in deltas.iter().enumerate() {
        if deltas[..i].contains(d) {
            return Err(Error::DuplicateDelta(*d));
        }
    }
    let cells: Vec<f64> = (0..k * profiles.len())
        .into_par_iter()
        .map(|c| mu_delta_closed_form(n, deltas[c / profiles.len()], &profiles[c % profiles.len()], convention))
        .collect::<Result<_>>()?;
    let m = DMatrix::from_row_slice(k, profiles.len(), &cells);
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let tolerance = RANK_TOLERANCE * sv[0];
    let rank = sv.iter().filter(|&&s| s > tolerance).count();
    Ok(IndependenceCertificate {
        matrix: cells.chunks(profiles.len()).map(<[f64]>::to_vec).collect(),
        rank,
        min_singular_value: *sv.last().unwrap(),
        singular_values: sv,
        tolerance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzResult {
    pub lhs: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Grid resolution for the sup-norm in [`lipschitz_check`].
pub const LIPSCHITZ_RESOLUTION: usize = 64;

/// `|ζ(h₁) − ζ(h₂)| ≤ K ‖f̄₁ − f̄₂‖` with `K = mass(dh) + mass(σ)`.
///
/// The sup-norm is a grid estimate, also sampled at the special point.
pub fn lipschitz_check(
    model: &QuasiStateModel,
    h1: &ToricHamiltonian,
    h2: &ToricHamiltonian,
    engine: Engine,
) -> Result<LipschitzResult> {
    if h1.power != 1 || h2.power != 1 {
        return Err(Error::Domain("Lipschitz check needs power 1".into()));
    }
    let lhs = (zeta(model, h1, engine)? - zeta(model, h2, engine)?).abs();
    let diff = h1.fbar.combine(1.0, &h2.fbar, -1.0);
    let (point, _) = model.sigma.atom();
    let sup = diff
        .sup_norm(&model.space, LIPSCHITZ_RESOLUTION)?
        .value
        .max(diff.value(&model.space, &point)?.abs());
    let k = model.dh.total_mass() + model.sigma.total_mass();
    let bound = k * sup;
    Ok(LipschitzResult { lhs, bound, ok: lhs <= bound + PROPERTY_TOLERANCE })
}
