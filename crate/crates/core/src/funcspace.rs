//! Serializable expression trees for the functions F̄ whose pullbacks
//! F = Φ*F̄ are the toric Hamiltonians.
//!
//! Leaves are monomials, bumps, radial profiles (functions of Σpᵢ), edge
//! profiles on trees and per-factor functions on products. One-dimensional
//! functions double as profiles: a profile is evaluated at a single
//! coordinate.

use serde::{Deserialize, Serialize};

use crate::basespace::{euclid, BasePoint, BaseSpace, MeasuredTree, TreePoint};
use crate::error::{Error, Result};
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothness {
    /// `(1 − u²)³`, twice continuously differentiable.
    #[default]
    C2,
    /// `exp(1 − 1/(1 − u²))`.
    Cinf,
}

impl Smoothness {
    /// Transition profile on `u ∈ [0, 1]`: 1 at 0, 0 at 1.
    fn fall(self, u: f64) -> f64 {
        if u <= 0.0 {
            return 1.0;
        }
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u * u;
        match self {
            Smoothness::C2 => w * w * w,
            Smoothness::Cinf => (1.0 - 1.0 / w).exp(),
        }
    }
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SmoothFunction {
    Constant {
        value: f64,
    },
    Monomial {
        exps: Vec<u32>,
        #[serde(default = "one")]
        coef: f64,
    },
    /// Equal to 1 on the closed `plateau`-ball, 0 outside the open `r`-ball.
    Bump {
        center: Vec<f64>,
        r: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        plateau: f64,
        #[serde(default)]
        smoothness: Smoothness,
    },
    /// `p ↦ profile(p₁ + … + pₙ)`.
    Radial {
        profile: Box<SmoothFunction>,
    },
    /// One-dimensional cutoff: `f` on `[lo, hi)`, 0 elsewhere.
    Window {
        lo: f64,
        hi: f64,
        f: Box<SmoothFunction>,
    },
    /// Tree function equal to `profile(offset)` on one edge and 0 elsewhere.
    Edge {
        edge: usize,
        profile: Box<SmoothFunction>,
    },
    /// Function of the `index`-th factor of a product space.
    Factor {
        index: usize,
        f: Box<SmoothFunction>,
    },
    /// One member of a partition of unity built from equal-radius bumps:
    /// `b(center) / (b(center) + Σ b(neighbor))`, 0 off the own bump.
    Partition {
        center: Vec<f64>,
        r: f64,
        neighbors: Vec<Vec<f64>>,
        #[serde(default)]
        smoothness: Smoothness,
    },
    Sum {
        terms: Vec<SmoothFunction>,
    },
    Product {
        factors: Vec<SmoothFunction>,
    },
    Scale {
        by: f64,
        f: Box<SmoothFunction>,
    },
    Shift {
        by: f64,
        f: Box<SmoothFunction>,
    },
}

/// Where a function is evaluated: plain coordinates, a tree point, or the
/// components of a product point.
#[derive(Clone, Copy)]
enum At<'a> {
    Coords(&'a [f64]),
    Tree(&'a MeasuredTree, &'a TreePoint),
    Product(&'a [BaseSpace], &'a [BasePoint]),
}

impl<'a> At<'a> {
    fn new(space: &'a BaseSpace, p: &'a BasePoint) -> Result<Self> {
        match (space, p) {
            (BaseSpace::Simplex(_), BasePoint::Coords(c)) => Ok(At::Coords(c)),
            (BaseSpace::Tree(t), BasePoint::Tree(tp)) => Ok(At::Tree(t, tp)),
            (BaseSpace::Product(prod), BasePoint::Tuple(parts)) if parts.len() == prod.factors().len() => {
                Ok(At::Product(prod.factors(), parts))
            }
            _ => Err(Error::Structure(format!("point {p:?} does not match the space"))),
        }
    }
}

pub(crate) fn bump_value(center: &[f64], r: f64, plateau: f64, smoothness: Smoothness, x: &[f64]) -> f64 {
    let d = euclid(center, x);
    if d <= plateau {
        return 1.0;
    }
    if d >= r {
        return 0.0;
    }
    smoothness.fall((d - plateau) / (r - plateau))
}

impl SmoothFunction {
    pub fn constant(value: f64) -> Self {
        SmoothFunction::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn monomial(exps: Vec<u32>, coef: f64) -> Self {
        SmoothFunction::Monomial { exps, coef }
    }

    pub fn from_poly(p: &Poly) -> Self {
        Self::sum(p.terms().map(|(e, c)| Self::monomial(e.to_vec(), c)).collect())
    }

    /// The coordinate function `pᵢ` in dimension `dim`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut exps = vec![0; dim];
        exps[i] = 1;
        Self::monomial(exps, 1.0)
    }

    pub fn bump(center: Vec<f64>, r: f64) -> Self {
        SmoothFunction::Bump { center, r, plateau: 0.0, smoothness: Smoothness::C2 }
    }

    pub fn plateau_bump(center: Vec<f64>, plateau: f64, r: f64, smoothness: Smoothness) -> Self {
        SmoothFunction::Bump { center, r, plateau, smoothness }
    }

    pub fn radial(profile: SmoothFunction) -> Self {
        SmoothFunction::Radial { profile: Box::new(profile) }
    }

    pub fn window(lo: f64, hi: f64, f: SmoothFunction) -> Self {
        SmoothFunction::Window { lo, hi, f: Box::new(f) }
    }

    pub fn edge(edge: usize, profile: SmoothFunction) -> Self {
        SmoothFunction::Edge { edge, profile: Box::new(profile) }
    }

    pub fn factor(index: usize, f: SmoothFunction) -> Self {
        SmoothFunction::Factor { index, f: Box::new(f) }
    }

    pub fn sum(terms: Vec<SmoothFunction>) -> Self {
        SmoothFunction::Sum { terms }
    }

    pub fn product(factors: Vec<SmoothFunction>) -> Self {
        SmoothFunction::Product { factors }
    }

    pub fn scaled(self, by: f64) -> Self {
        SmoothFunction::Scale { by, f: Box::new(self) }
    }

    pub fn shifted(self, by: f64) -> Self {
        SmoothFunction::Shift { by, f: Box::new(self) }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SmoothFunction, b: f64) -> Self {
        Self::sum(vec![self.clone().scaled(a), other.clone().scaled(b)])
    }

    /// Evaluates at a point of `space`; the point must lie in the space.
    pub fn eval(&self, space: &BaseSpace, p: &BasePoint) -> Result<f64> {
        space.require_contains(p, 0.0)?;
        self.value(space, p)
    }

    /// Evaluation without the containment check (quadrature nodes, samples).
    pub fn value(&self, space: &BaseSpace, p: &BasePoint) -> Result<f64> {
        self.at(At::new(space, p)?)
    }

    /// Evaluates a coordinate function (or a one-dimensional profile) at raw coordinates.
    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        self.at(At::Coords(x))
    }

    /// Profile evaluation at a scalar argument.
    pub fn profile_at(&self, s: f64) -> Result<f64> {
        self.at(At::Coords(std::slice::from_ref(&s)))
    }

    fn at(&self, at: At<'_>) -> Result<f64> {
        use SmoothFunction::*;
        match self {
            Constant { value } => Ok(*value),
            Monomial { exps, coef } => {
                let x = coords(at, "monomial")?;
                check_arity(exps.len(), x.len(), "monomial")?;
                Ok(coef * exps.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            }
            Bump { center, r, plateau, smoothness } => {
                let x = coords(at, "bump")?;
                check_arity(center.len(), x.len(), "bump")?;
                Ok(bump_value(center, *r, *plateau, *smoothness, x))
            }
            Radial { profile } => {
                let x = coords(at, "radial profile")?;
                profile.profile_at(x.iter().sum())
            }
            Window { lo, hi, f } => {
                let x = coords(at, "window")?;
                check_arity(1, x.len(), "window")?;
                if x[0] >= *lo && x[0] < *hi {
                    f.at(at)
                } else {
                    Ok(0.0)
                }
            }
            Edge { edge, profile } => {
                let At::Tree(tree, tp) = at else {
                    return Err(Error::Structure("edge profile evaluated off a tree".into()));
                };
                let e = tree.edge(*edge)?;
                match *tp {
                    TreePoint::Vertex(v) if v == e.u => profile.profile_at(0.0),
                    TreePoint::Vertex(v) if v == e.v => profile.profile_at(e.len),
                    TreePoint::Vertex(_) => Ok(0.0),
                    TreePoint::Edge { edge: pe, offset } if pe == *edge => profile.profile_at(offset),
                    TreePoint::Edge { .. } => Ok(0.0),
                }
            }
            Factor { index, f } => {
                let At::Product(spaces, parts) = at else {
                    return Err(Error::Structure("factor function evaluated off a product".into()));
                };
                let (Some(s), Some(p)) = (spaces.get(*index), parts.get(*index)) else {
                    return Err(Error::Structure(format!("product has no factor {index}")));
                };
                f.at(At::new(s, p)?)
            }
            Partition { center, r, neighbors, smoothness } => {
                let x = coords(at, "partition piece")?;
                check_arity(center.len(), x.len(), "partition piece")?;
                let own = bump_value(center, *r, 0.0, *smoothness, x);
                if own == 0.0 {
                    return Ok(0.0);
                }
                let rest: f64 = neighbors.iter().map(|c| bump_value(c, *r, 0.0, *smoothness, x)).sum();
                Ok(own / (own + rest))
            }
            Sum { terms } => terms.iter().try_fold(0.0, |acc, t| Ok(acc + t.at(at)?)),
            Product { factors } => factors.iter().try_fold(1.0, |acc, t| Ok(acc * t.at(at)?)),
            Scale { by, f } => Ok(by * f.at(at)?),
            Shift { by, f } => Ok(by + f.at(at)?),
        }
    }

    /// `x ↦ self(x / factor)` for coordinate functions and profiles.
    pub fn dilate(&self, factor: f64) -> Result<SmoothFunction> {
        use SmoothFunction::*;
        if !(factor > 0.0) {
            return Err(Error::Domain(format!("dilation factor must be positive, got {factor}")));
        }
        let sc = |v: &[f64]| v.iter().map(|x| x * factor).collect::<Vec<_>>();
        Ok(match self {
            Constant { value } => Constant { value: *value },
            Monomial { exps, coef } => {
                let deg: u32 = exps.iter().sum();
                Monomial { exps: exps.clone(), coef: coef / factor.powi(deg as i32) }
            }
            Bump { center, r, plateau, smoothness } => {
                Bump { center: sc(center), r: r * factor, plateau: plateau * factor, smoothness: *smoothness }
            }
            Radial { profile } => Radial { profile: Box::new(profile.dilate(factor)?) },
            Window { lo, hi, f } => Window { lo: lo * factor, hi: hi * factor, f: Box::new(f.dilate(factor)?) },
            Partition { center, r, neighbors, smoothness } => Partition {
                center: sc(center),
                r: r * factor,
                neighbors: neighbors.iter().map(|c| sc(c)).collect(),
                smoothness: *smoothness,
            },
            Sum { terms } => Sum { terms: terms.iter().map(|t| t.dilate(factor)).collect::<Result<_>>()? },
            Product { factors } => {
                Product { factors: factors.iter().map(|t| t.dilate(factor)).collect::<Result<_>>()? }
            }
            Scale { by, f } => Scale { by: *by, f: Box::new(f.dilate(factor)?) },
            Shift { by, f } => Shift { by: *by, f: Box::new(f.dilate(factor)?) },
            Edge { .. } | Factor { .. } => {
                return Err(Error::Structure("only coordinate functions can be dilated".into()))
            }
        })
    }

    /// Polynomial form in `nvars` coordinates, if the expression is one.
    pub fn to_poly(&self, nvars: usize) -> Result<Poly> {
        use SmoothFunction::*;
        match self {
            Constant { value } => Ok(Poly::constant(nvars, *value)),
            Monomial { exps, coef } => {
                check_arity(exps.len(), nvars, "monomial")?;
                Ok(Poly::monomial(exps.clone(), *coef))
            }
            Radial { profile } => Ok(profile.to_poly(1)?.compose_univariate(&Poly::coordinate_sum(nvars))),
            Sum { terms } => terms.iter().try_fold(Poly::zero(nvars), |acc, t| Ok(acc.add(&t.to_poly(nvars)?))),
            Product { factors } => {
                factors.iter().try_fold(Poly::constant(nvars, 1.0), |acc, t| Ok(acc.mul(&t.to_poly(nvars)?)))
            }
            Scale { by, f } => Ok(f.to_poly(nvars)?.scale(*by)),
            Shift { by, f } => Ok(f.to_poly(nvars)?.add(&Poly::constant(nvars, *by))),
            other => Err(Error::NotPolynomial(other.kind().into())),
        }
    }

    /// If `self(p) = g(Σpᵢ)` for a one-dimensional `g`, returns `g`.
    pub fn as_radial(&self) -> Option<SmoothFunction> {
        use SmoothFunction::*;
        match self {
            Constant { value } => Some(Self::constant(*value)),
            Radial { profile } => Some((**profile).clone()),
            Sum { terms } => terms.iter().map(|t| t.as_radial()).collect::<Option<Vec<_>>>().map(Self::sum),
            Product { factors } => {
                factors.iter().map(|t| t.as_radial()).collect::<Option<Vec<_>>>().map(Self::product)
            }
            Scale { by, f } => f.as_radial().map(|g| g.scaled(*by)),
            Shift { by, f } => f.as_radial().map(|g| g.shifted(*by)),
            _ => None,
        }
    }

    fn kind(&self) -> &'static str {
        use SmoothFunction::*;
        match self {
            Constant { .. } => "constant",
            Monomial { .. } => "monomial",
            Bump { .. } => "bump",
            Radial { .. } => "radial",
            Window { .. } => "window",
            Edge { .. } => "edge",
            Factor { .. } => "factor",
            Partition { .. } => "partition",
            Sum { .. } => "sum",
            Product { .. } => "product",
            Scale { .. } => "scale",
            Shift { .. } => "shift",
        }
    }

    /// Points where a one-dimensional function may fail to be smooth.
    pub fn breakpoints_1d(&self) -> Vec<f64> {
        use SmoothFunction::*;
        let mut out = Vec::new();
        match self {
            Bump { center, r, plateau, .. } if center.len() == 1 => {
                out.extend([center[0] - r, center[0] + r]);
                if *plateau > 0.0 {
                    out.extend([center[0] - plateau, center[0] + plateau]);
                }
            }
            Partition { center, r, neighbors, .. } if center.len() == 1 => {
                for c in std::iter::once(center).chain(neighbors) {
                    out.extend([c[0] - r, c[0] + r]);
                }
            }
            Window { lo, hi, f } => {
                out.extend([*lo, *hi]);
                out.extend(f.breakpoints_1d());
            }
            Radial { profile } => out.extend(profile.breakpoints_1d()),
            Sum { terms } => terms.iter().for_each(|t| out.extend(t.breakpoints_1d())),
            Product { factors } => factors.iter().for_each(|t| out.extend(t.breakpoints_1d())),
            Scale { f, .. } | Shift { f, .. } => out.extend(f.breakpoints_1d()),
            _ => {}
        }
        out.retain(|x| x.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// A finite union of simple sets containing the support.
    pub fn support_bound(&self) -> Region {
        use SmoothFunction::*;
        match self {
            Constant { value } | Monomial { coef: value, .. } => {
                if *value == 0.0 {
                    Region::empty()
                } else {
                    Region::Full
                }
            }
            Bump { center, r, .. } | Partition { center, r, .. } => {
                Region::Pieces(vec![Piece::Ball { center: center.clone(), radius: *r }])
            }
            Radial { profile } => match profile.support_bound() {
                Region::Full => Region::Full,
                Region::Pieces(ps) => Region::Pieces(ps.iter().filter_map(|p| p.as_interval()).map(|(lo, hi)| Piece::Slab { lo, hi }).collect()),
            },
            Window { lo, hi, f } => {
                Region::Pieces(vec![Piece::Ball { center: vec![(lo + hi) / 2.0], radius: (hi - lo) / 2.0 }])
                    .intersect(&f.support_bound())
            }
            Edge { edge, profile } => match profile.support_bound() {
                Region::Full => Region::Pieces(vec![Piece::WholeEdge { edge: *edge }]),
                Region::Pieces(ps) => Region::Pieces(
                    ps.iter()
                        .filter_map(|p| p.as_interval())
                        .map(|(lo, hi)| Piece::EdgeInterval { edge: *edge, lo, hi })
                        .collect(),
                ),
            },
            Factor { .. } => Region::Full,
            Sum { terms } => terms.iter().fold(Region::empty(), |acc, t| acc.union(&t.support_bound())),
            Product { factors } => factors.iter().fold(Region::Full, |acc, t| acc.intersect(&t.support_bound())),
            Scale { by, f } => {
                if *by == 0.0 {
                    Region::empty()
                } else {
                    f.support_bound()
                }
            }
            Shift { by, f } => {
                if *by == 0.0 {
                    f.support_bound()
                } else {
                    Region::Full
                }
            }
        }
    }

    /// Grid estimate of `sup |f|` over the space.
    ///
    /// The requested resolution is rounded up to a power of two so that grids
    /// are nested and the estimate is monotone in the resolution.
    pub fn sup_norm(&self, space: &BaseSpace, resolution: usize) -> Result<SupEstimate> {
        let res = resolution.max(2).next_power_of_two();
        let grid = GridPoints::new(space, res);
        let mut best: f64 = 0.0;
        for p in grid.points() {
            best = best.max(self.value(space, &p)?.abs());
        }
        Ok(SupEstimate { value: best, mesh: grid.mesh(), resolution: res })
    }
}

fn coords<'a>(at: At<'a>, what: &str) -> Result<&'a [f64]> {
    match at {
        At::Coords(x) => Ok(x),
        _ => Err(Error::Structure(format!("{what} needs coordinate input"))),
    }
}

fn check_arity(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::Structure(format!("{what} has {expected} variables but the point has {got}")));
    }
    Ok(())
}

/// Result of a grid sup-norm: the true sup exceeds `value` by at most the
/// function's modulus of continuity at scale `mesh`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    pub mesh: f64,
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    Ball { center: Vec<f64>, radius: f64 },
    /// `{ p : lo ≤ Σpᵢ ≤ hi }`.
    Slab { lo: f64, hi: f64 },
    EdgeInterval { edge: usize, lo: f64, hi: f64 },
    WholeEdge { edge: usize },
}

impl Piece {
    fn as_interval(&self) -> Option<(f64, f64)> {
        match self {
            Piece::Ball { center, radius } if center.len() == 1 => Some((center[0] - radius, center[0] + radius)),
            Piece::Slab { lo, hi } => Some((*lo, *hi)),
            _ => None,
        }
    }

    /// A size proxy used to pick the tighter of two bounds.
    fn extent(&self) -> f64 {
        match self {
            Piece::Ball { radius, .. } => 2.0 * radius,
            Piece::Slab { lo, hi } | Piece::EdgeInterval { lo, hi, .. } => hi - lo,
            Piece::WholeEdge { .. } => f64::INFINITY,
        }
    }

    pub fn contains_coords(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Piece::Ball { center, radius } => center.len() == x.len() && euclid(center, x) <= radius + tol,
            Piece::Slab { lo, hi } => {
                let s: f64 = x.iter().sum();
                s >= lo - tol && s <= hi + tol
            }
            _ => false,
        }
    }
}

/// A support bound: everything, or a finite union of pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Full,
    Pieces(Vec<Piece>),
}

impl Region {
    pub fn empty() -> Self {
        Region::Pieces(Vec::new())
    }

    pub fn is_full(&self) -> bool {
        matches!(self, Region::Full)
    }

    pub fn balls(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        match self {
            Region::Full => None,
            Region::Pieces(ps) => ps
                .iter()
                .map(|p| match p {
                    Piece::Ball { center, radius } => Some((center.clone(), *radius)),
                    _ => None,
                })
                .collect(),
        }
    }

    pub fn union(&self, other: &Region) -> Region {
        match (self, other) {
            (Region::Pieces(a), Region::Pieces(b)) => Region::Pieces(a.iter().chain(b).cloned().collect()),
            _ => Region::Full,
        }
    }

    /// A bound for the intersection. One-dimensional intervals on the same
    /// carrier intersect exactly; otherwise the tighter operand is kept.
    pub fn intersect(&self, other: &Region) -> Region {
        let (a, b) = match (self, other) {
            (Region::Full, x) | (x, Region::Full) => return x.clone(),
            (Region::Pieces(a), Region::Pieces(b)) => (a, b),
        };
        if a.is_empty() || b.is_empty() {
            return Region::empty();
        }
        if let Some(exact) = intersect_intervals(a, b) {
            return Region::Pieces(exact);
        }
        let size = |ps: &[Piece]| ps.iter().map(Piece::extent).sum::<f64>();
        if size(b) < size(a) {
            Region::Pieces(b.clone())
        } else {
            Region::Pieces(a.clone())
        }
    }

    pub fn contains_coords(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Region::Full => true,
            Region::Pieces(ps) => ps.iter().any(|p| p.contains_coords(x, tol)),
        }
    }
}

fn intersect_intervals(a: &[Piece], b: &[Piece]) -> Option<Vec<Piece>> {
    let edge_of = |p: &Piece| match p {
        Piece::EdgeInterval { edge, lo, hi } => Some((*edge, *lo, *hi)),
        _ => None,
    };
    if let (Some(ea), Some(eb)) = (
        a.iter().map(edge_of).collect::<Option<Vec<_>>>(),
        b.iter().map(edge_of).collect::<Option<Vec<_>>>(),
    ) {
        let mut out = Vec::new();
        for &(e1, l1, h1) in &ea {
            for &(e2, l2, h2) in &eb {
                if e1 == e2 && l1.max(l2) <= h1.min(h2) {
                    out.push(Piece::EdgeInterval { edge: e1, lo: l1.max(l2), hi: h1.min(h2) });
                }
            }
        }
        return Some(out);
    }
    let slabs = |ps: &[Piece]| {
        ps.iter()
            .map(|p| match p {
                Piece::Slab { lo, hi } => Some((*lo, *hi)),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
    };
    let intervals = |ps: &[Piece]| {
        ps.iter()
            .map(|p| match p {
                Piece::Ball { .. } => p.as_interval(),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
    };
    let overlap = |ia: &[(f64, f64)], ib: &[(f64, f64)]| {
        let mut out = Vec::new();
        for &(l1, h1) in ia {
            for &(l2, h2) in ib {
                if l1.max(l2) <= h1.min(h2) {
                    out.push((l1.max(l2), h1.min(h2)));
                }
            }
        }
        out
    };
    if let (Some(ia), Some(ib)) = (slabs(a), slabs(b)) {
        return Some(overlap(&ia, &ib).into_iter().map(|(lo, hi)| Piece::Slab { lo, hi }).collect());
    }
    if let (Some(ia), Some(ib)) = (intervals(a), intervals(b)) {
        return Some(
            overlap(&ia, &ib)
                .into_iter()
                .map(|(lo, hi)| Piece::Ball { center: vec![(lo + hi) / 2.0], radius: (hi - lo) / 2.0 })
                .collect(),
        );
    }
    None
}

/// Regular grids over a space, used for sup-norms and verification sweeps.
pub struct GridPoints<'a> {
    space: &'a BaseSpace,
    resolution: usize,
}

impl<'a> GridPoints<'a> {
    pub fn new(space: &'a BaseSpace, resolution: usize) -> Self {
        Self { space, resolution: resolution.max(1) }
    }

    /// Largest distance from a point of the space to the nearest grid point (upper bound).
    pub fn mesh(&self) -> f64 {
        factor_meshes(self.space, self.resolution).iter().map(|m| m * m).sum::<f64>().sqrt()
    }

    pub fn points(&self) -> Vec<BasePoint> {
        factor_grid(self.space, self.resolution)
    }
}

fn factor_meshes(space: &BaseSpace, res: usize) -> Vec<f64> {
    match space {
        BaseSpace::Simplex(s) => vec![s.scale() / res as f64 * (s.dim() as f64).sqrt()],
        BaseSpace::Tree(t) => vec![t.edges().iter().map(|e| e.len).fold(0.0, f64::max) / (2 * res) as f64],
        BaseSpace::Product(p) => p.factors().iter().flat_map(|f| factor_meshes(f, res)).collect(),
    }
}

fn factor_grid(space: &BaseSpace, res: usize) -> Vec<BasePoint> {
    match space {
        BaseSpace::Simplex(s) => simplex_lattice(s.dim(), res)
            .into_iter()
            .map(|k| BasePoint::Coords(k.iter().map(|&ki| s.scale() * ki as f64 / res as f64).collect()))
            .collect(),
        BaseSpace::Tree(t) => {
            let mut out = Vec::new();
            for (i, e) in t.edges().iter().enumerate() {
                for j in 0..=res {
                    out.push(BasePoint::Tree(TreePoint::Edge { edge: i, offset: e.len * j as f64 / res as f64 }));
                }
            }
            out
        }
        BaseSpace::Product(p) => {
            let mut acc: Vec<Vec<BasePoint>> = vec![Vec::new()];
            for f in p.factors() {
                let g = factor_grid(f, res);
                acc = acc
                    .iter()
                    .flat_map(|prefix| {
                        g.iter().map(move |q| {
                            let mut v = prefix.clone();
                            v.push(q.clone());
                            v
                        })
                    })
                    .collect();
            }
            acc.into_iter().map(BasePoint::Tuple).collect()
        }
    }
}

/// All `k ∈ ℕⁿ` with `Σ kᵢ ≤ total`.
pub fn simplex_lattice(dim: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; dim];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basespace::EdgeSpec;
    use proptest::prelude::*;

    fn d2() -> BaseSpace {
        BaseSpace::simplex(2, 1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = SmoothFunction::monomial(vec![2, 1], 1.0);
        assert_eq!(f.eval(&d2(), &vec![0.5, 0.25].into()).unwrap(), 1.0 / 16.0);
        let b = SmoothFunction::bump(vec![1.0 / 3.0, 1.0 / 3.0], 0.1);
        assert_eq!(b.eval(&d2(), &vec![1.0 / 3.0, 1.0 / 3.0].into()).unwrap(), 1.0);
        assert_eq!(b.eval(&d2(), &vec![0.9, 0.05].into()).unwrap(), 0.0);
        assert!(matches!(f.eval(&d2(), &vec![0.9, 0.9].into()), Err(Error::OutsideSpace(_))));
    }

    #[test]
    fn bump_range_and_plateau() {
        for smoothness in [Smoothness::C2, Smoothness::Cinf] {
            let b = SmoothFunction::plateau_bump(vec![0.5], 0.1, 0.2, smoothness);
            assert_eq!(b.value_at(&[0.55]).unwrap(), 1.0);
            assert_eq!(b.value_at(&[0.6]).unwrap(), 1.0);
            assert_eq!(b.value_at(&[0.71]).unwrap(), 0.0);
            let mid = b.value_at(&[0.65]).unwrap();
            assert!(mid > 0.0 && mid < 1.0);
        }
        let b = SmoothFunction::bump(vec![0.0], 1.0);
        assert!((b.value_at(&[0.5]).unwrap() - 0.75f64.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn tree_and_product_evaluation() {
        let tree = crate::basespace::MeasuredTree::from_edges(&[
            EdgeSpec::uniform("a", "b", 2.0, 1.0),
            EdgeSpec::uniform("b", "c", 1.0, 1.0),
        ])
        .unwrap();
        let space = BaseSpace::Tree(tree);
        let f = SmoothFunction::edge(0, SmoothFunction::monomial(vec![1], 1.0));
        assert_eq!(f.eval(&space, &BasePoint::Tree(TreePoint::Edge { edge: 0, offset: 1.5 })).unwrap(), 1.5);
        assert_eq!(f.eval(&space, &BasePoint::Tree(TreePoint::Edge { edge: 1, offset: 0.5 })).unwrap(), 0.0);
        assert_eq!(f.eval(&space, &BasePoint::Tree(TreePoint::Vertex(1))).unwrap(), 2.0);

        let prod = BaseSpace::product(vec![space, BaseSpace::simplex(1, 1.0).unwrap()]).unwrap();
        let g = SmoothFunction::product(vec![f.clone().pipe_factor(0), SmoothFunction::factor(1, SmoothFunction::monomial(vec![1], 3.0))]);
        let p = BasePoint::Tuple(vec![BasePoint::Tree(TreePoint::Edge { edge: 0, offset: 0.5 }), vec![0.5].into()]);
        assert_eq!(g.eval(&prod, &p).unwrap(), 0.5 * 1.5);
        assert!(SmoothFunction::monomial(vec![1], 1.0).eval(&prod, &p).is_err());
    }

    impl SmoothFunction {
        fn pipe_factor(self, i: usize) -> SmoothFunction {
            SmoothFunction::factor(i, self)
        }
    }

    #[test]
    fn sup_norm_examples() {
        let c = SmoothFunction::constant(3.0);
        assert_eq!(c.sup_norm(&d2(), 7).unwrap().value, 3.0);
        let d1 = BaseSpace::simplex(1, 1.0).unwrap();
        assert_eq!(SmoothFunction::coordinate(1, 0).sup_norm(&d1, 101).unwrap().value, 1.0);
        // max of p₁p₂ on p₁ + p₂ ≤ 1 is at (1/2, 1/2) by Lagrange multipliers
        let f = SmoothFunction::monomial(vec![1, 1], 1.0);
        let est = f.sup_norm(&d2(), 201).unwrap();
        assert!((est.value - 0.25).abs() < 1e-3);
        assert!(est.mesh > 0.0);
    }

    #[test]
    fn sup_norm_is_monotone_in_resolution() {
        let f = SmoothFunction::sum(vec![
            SmoothFunction::monomial(vec![3, 1], 5.0),
            SmoothFunction::bump(vec![0.31, 0.22], 0.07).scaled(-2.0),
        ]);
        let mut last = 0.0;
        for res in [2, 3, 5, 9, 17, 40, 100] {
            let v = f.sup_norm(&d2(), res).unwrap().value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn support_examples() {
        let c1 = vec![0.2, 0.2];
        let c2 = vec![0.6, 0.1];
        let b1 = SmoothFunction::bump(c1.clone(), 0.1);
        let b2 = SmoothFunction::bump(c2.clone(), 0.1);
        assert_eq!(b1.support_bound(), Region::Pieces(vec![Piece::Ball { center: c1.clone(), radius: 0.1 }]));
        let both = SmoothFunction::sum(vec![b1.clone(), b2]).support_bound();
        assert_eq!(both.balls().unwrap().len(), 2);
        let prod = SmoothFunction::product(vec![SmoothFunction::monomial(vec![1, 2], 1.0), b1]).support_bound();
        assert_eq!(prod, Region::Pieces(vec![Piece::Ball { center: c1, radius: 0.1 }]));
        assert_eq!(SmoothFunction::monomial(vec![1, 0], 1.0).support_bound(), Region::Full);
        let shifted = SmoothFunction::bump(vec![0.5], 0.1).shifted(1.0);
        assert!(shifted.support_bound().is_full());
    }

    #[test]
    fn window_support_is_exact_interval() {
        let f = SmoothFunction::window(0.0, 1.0, SmoothFunction::bump(vec![0.9], 0.3));
        let Region::Pieces(ps) = f.support_bound() else { panic!() };
        assert_eq!(ps.len(), 1);
        let (lo, hi) = ps[0].as_interval().unwrap();
        assert!((lo - 0.6).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let r = SmoothFunction::radial(f).support_bound();
        assert!(matches!(&r, Region::Pieces(v) if matches!(v[0], Piece::Slab { .. })));
    }

    #[test]
    fn dilation() {
        let f = SmoothFunction::sum(vec![
            SmoothFunction::monomial(vec![2], 3.0),
            SmoothFunction::bump(vec![0.4], 0.1),
            SmoothFunction::window(0.0, 0.5, SmoothFunction::constant(2.0)),
        ]);
        let g = f.dilate(0.8).unwrap();
        for s in [0.0, 0.1, 0.3, 0.35, 0.45, 0.6] {
            assert!((g.profile_at(s).unwrap() - f.profile_at(s / 0.8).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_conversion() {
        let f = SmoothFunction::radial(SmoothFunction::monomial(vec![2], 1.0)).shifted(1.0);
        let p = f.to_poly(2).unwrap();
        assert_eq!(p.eval(&[0.25, 0.5]), 0.75 * 0.75 + 1.0);
        assert!(matches!(SmoothFunction::bump(vec![0.0], 1.0).to_poly(1), Err(Error::NotPolynomial(_))));
    }

    #[test]
    fn json_format() {
        let f: SmoothFunction = serde_json::from_str(
            r#"{"kind":"sum","terms":[{"kind":"monomial","exps":[2,1],"coef":1.0},
                {"kind":"bump","center":[0.333,0.333],"r":0.1},
                {"kind":"radial","profile":{"kind":"monomial","exps":[1]}}]}"#,
        )
        .unwrap();
        let back: SmoothFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(f, back);
    }

    fn leaf2() -> impl Strategy<Value = SmoothFunction> {
        prop_oneof![
            (-3.0f64..3.0).prop_map(SmoothFunction::constant),
            (0u32..4, 0u32..4, -2.0f64..2.0).prop_map(|(a, b, c)| SmoothFunction::monomial(vec![a, b], c)),
            (0.0f64..0.5, 0.0f64..0.5, 0.05f64..0.4).prop_map(|(x, y, r)| SmoothFunction::bump(vec![x, y], r)),
            (0u32..4).prop_map(|k| SmoothFunction::radial(SmoothFunction::monomial(vec![k], 1.0))),
        ]
    }

    fn tree2() -> impl Strategy<Value = SmoothFunction> {
        leaf2().prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..3).prop_map(SmoothFunction::sum),
                prop::collection::vec(inner.clone(), 1..3).prop_map(SmoothFunction::product),
                (inner.clone(), -2.0f64..2.0).prop_map(|(f, k)| f.scaled(k)),
                (inner, -2.0f64..2.0).prop_map(|(f, k)| f.shifted(k)),
            ]
        })
    }

    proptest! {
        #[test]
        fn sum_evaluates_termwise(f in tree2(), g in tree2(), x in 0.0f64..0.5, y in 0.0f64..0.5) {
            let p: BasePoint = vec![x, y].into();
            let s = SmoothFunction::sum(vec![f.clone(), g.clone()]).eval(&d2(), &p).unwrap();
            prop_assert_eq!(s, f.eval(&d2(), &p).unwrap() + g.eval(&d2(), &p).unwrap());
        }

        #[test]
        fn radial_is_permutation_invariant(k in 0u32..5, c in 0.0f64..1.0, x in 0.0f64..0.3, y in 0.0f64..0.3, z in 0.0f64..0.3) {
            let f = SmoothFunction::radial(SmoothFunction::sum(vec![
                SmoothFunction::monomial(vec![k], 1.0),
                SmoothFunction::bump(vec![c], 0.2),
            ]));
            let a = f.value_at(&[x, y, z]).unwrap();
            prop_assert!((a - f.value_at(&[z, x, y]).unwrap()).abs() < 1e-12);
            prop_assert!((a - f.value_at(&[y, z, x]).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn bumps_stay_in_unit_interval(x in 0.0f64..1.0, y in 0.0f64..1.0, r in 0.01f64..1.0) {
            let b = SmoothFunction::bump(vec![0.3, 0.3], r);
            let v = b.value_at(&[x, y]).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
