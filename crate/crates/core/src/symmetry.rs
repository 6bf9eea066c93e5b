//! Affine symmetries of a simplex induced by permuting homogeneous
//! coordinates, and displaceability certificates built from them.
//!
//! A permutation `π` of `{0, …, n}` acts on `q = (s − Σp, p₁, …, pₙ)` by
//! `(g·q)ᵢ = q_{π(i)}`; the affine map on `Δ` drops the first coordinate.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::basespace::{euclid, Simplex};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quadrature::next_permutation;

/// Largest dimension for which the whole group is enumerated.
pub const MAX_ENUMERATION_DIM: usize = 7;

/// Closed-ball separations must exceed this (relative to the scale).
pub const SEPARATION_MARGIN: f64 = 1e-9;

/// Points count as moved only beyond this displacement (relative to the scale).
pub const POINT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineSymmetry {
    perm: Vec<usize>,
}

impl AffineSymmetry {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &i in &perm {
            if i >= perm.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Domain(format!("{perm:?} is not a permutation")));
            }
        }
        if perm.len() < 2 {
            return Err(Error::Domain("need at least two homogeneous coordinates".into()));
        }
        Ok(Self { perm })
    }

    pub fn identity(dim: usize) -> Self {
        Self { perm: (0..=dim).collect() }
    }

    /// The transposition of homogeneous coordinates `i` and `j`.
    pub fn transposition(dim: usize, i: usize, j: usize) -> Self {
        let mut perm: Vec<usize> = (0..=dim).collect();
        perm.swap(i, j);
        Self { perm }
    }

    pub fn dim(&self) -> usize {
        self.perm.len() - 1
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn apply(&self, simplex: &Simplex, p: &[f64]) -> Vec<f64> {
        let q = simplex.homogeneous(p);
        self.perm[1..].iter().map(|&k| q[k]).collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineSymmetry) -> AffineSymmetry {
        AffineSymmetry { perm: self.perm.iter().map(|&i| other.perm[i]).collect() }
    }

    pub fn inverse(&self) -> AffineSymmetry {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        AffineSymmetry { perm: inv }
    }

    /// Integer linear part `L` and translation `t` (in units of the scale)
    /// with `g(p) = L·p + s·t`.
    pub fn matrix(&self) -> (Vec<Vec<i64>>, Vec<i64>) {
        let n = self.dim();
        let mut l = vec![vec![0i64; n]; n];
        let mut t = vec![0i64; n];
        for i in 0..n {
            match self.perm[i + 1] {
                0 => {
                    l[i].iter_mut().for_each(|x| *x = -1);
                    t[i] = 1;
                }
                k => l[i][k - 1] = 1,
            }
        }
        (l, t)
    }

    /// `f ∘ g` for a polynomial `f` on a simplex of the given scale.
    pub fn pull_back(&self, f: &Poly, scale: f64) -> Poly {
        let n = self.dim();
        let (l, t) = self.matrix();
        let rows: Vec<Poly> = (0..n)
            .map(|i| {
                let mut r = Poly::constant(n, t[i] as f64 * scale);
                for (j, &c) in l[i].iter().enumerate() {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    r = r.add(&Poly::monomial(e, c as f64));
                }
                r
            })
            .collect();
        f.substitute(&rows)
    }

    /// Cycle notation on the symbols `0..=n`, e.g. `(1 2)`; `()` for the identity.
    pub fn cycles(&self) -> String {
        let mut seen = vec![false; self.perm.len()];
        let mut out = String::new();
        for start in 0..self.perm.len() {
            if seen[start] || self.perm[start] == start {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i.to_string());
                i = self.perm[i];
            }
            out.push('(');
            out.push_str(&cyc.join(" "));
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

impl fmt::Display for AffineSymmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cycles())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplaceabilityCertificate {
    pub symmetry: AffineSymmetry,
    /// Lower bound on the distance between the set and its image.
    pub separation: f64,
    /// Image of the point, or of each ball center.
    pub images: Vec<Vec<f64>>,
}

/// Adjacent transpositions `(i i+1)`, which generate the group.
pub fn symmetry_group(simplex: &Simplex) -> Vec<AffineSymmetry> {
    let n = simplex.dim();
    (0..n).map(|i| AffineSymmetry::transposition(n, i, i + 1)).collect()
}

/// All `(n+1)!` elements in lexicographic order of the permutation, identity first.
pub fn enumerate_group(simplex: &Simplex) -> Result<Vec<AffineSymmetry>> {
    let n = simplex.dim();
    if n > MAX_ENUMERATION_DIM {
        return Err(Error::Domain(format!("group enumeration limited to n ≤ {MAX_ENUMERATION_DIM}")));
    }
    let mut perm: Vec<usize> = (0..=n).collect();
    let mut out = vec![AffineSymmetry { perm: perm.clone() }];
    while next_permutation(&mut perm) {
        out.push(AffineSymmetry { perm: perm.clone() });
    }
    Ok(out)
}

/// First group element (lexicographically) that moves `p`.
///
/// Beyond the enumeration limit the first adjacent transposition that moves
/// `p` is returned instead.
pub fn displace_point(simplex: &Simplex, p: &[f64]) -> Result<Option<DisplaceabilityCertificate>> {
    if !simplex.contains_coords(p, 0.0)? {
        return Err(Error::OutsideSpace(format!("{p:?}")));
    }
    let tol = POINT_TOLERANCE * simplex.scale().max(1.0);
    let check = |g: AffineSymmetry| {
        let image = g.apply(simplex, p);
        let d = euclid(&image, p);
        (d > tol).then(|| DisplaceabilityCertificate { symmetry: g, separation: d, images: vec![image] })
    };
    let n = simplex.dim();
    if n > MAX_ENUMERATION_DIM {
        return Ok(symmetry_group(simplex).into_iter().find_map(check));
    }
    let mut perm: Vec<usize> = (0..=n).collect();
    while next_permutation(&mut perm) {
        if let Some(c) = check(AffineSymmetry { perm: perm.clone() }) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Lower bound on the gap between `g(B(ca, ra))` and `B(cb, rb)` along the
/// best of two candidate normals; `None` when the sets are not separated.
fn ball_gap(l: &DMatrix<f64>, gca: &DVector<f64>, ra: f64, cb: &DVector<f64>, rb: f64) -> f64 {
    let gap = |u: &DVector<f64>| {
        let norm = u.norm();
        if norm == 0.0 {
            return f64::NEG_INFINITY;
        }
        let u = u / norm;
        u.dot(&(cb - gca)) - ra * (l.transpose() * &u).norm() - rb
    };
    let direct = gap(&(cb - gca));
    // Normal at the point of the ellipsoid g(B) nearest to cb.
    let d = gca - cb;
    let ltl = l.transpose() * l;
    let ltd = l.transpose() * &d;
    let step = |lambda: f64| -> Option<DVector<f64>> {
        let m = &ltl + DMatrix::identity(ltl.nrows(), ltl.ncols()) * lambda;
        m.lu().solve(&ltd).map(|x| -x)
    };
    let nearest = match step(0.0) {
        Some(v) if v.norm() <= ra => return direct.min(0.0).min(-ra),
        _ => {
            let (mut lo, mut hi) = (0.0, 1.0);
            while step(hi).is_some_and(|v| v.norm() > ra) && hi < 1e12 {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                match step(mid) {
                    Some(v) if v.norm() > ra => lo = mid,
                    _ => hi = mid,
                }
            }
            step(hi).map(|v| gca + l * v)
        }
    };
    match nearest {
        Some(x) => direct.max(gap(&(cb - x))),
        None => direct,
    }
}

/// Separation of the closed ball union from its image under `g`, or `None`
/// if some image ball meets some ball (up to the margin).
pub fn region_separation(simplex: &Simplex, g: &AffineSymmetry, balls: &[(Vec<f64>, f64)]) -> Option<f64> {
    let n = simplex.dim();
    let (li, _) = g.matrix();
    let l = DMatrix::from_fn(n, n, |i, j| li[i][j] as f64);
    let margin = SEPARATION_MARGIN * simplex.scale().max(1.0);
    let mut sep = f64::INFINITY;
    for (ca, ra) in balls {
        let gca = DVector::from_vec(g.apply(simplex, ca));
        for (cb, rb) in balls {
            let gap = ball_gap(&l, &gca, *ra, &DVector::from_column_slice(cb), *rb);
            if !(gap > margin) {
                return None;
            }
            sep = sep.min(gap);
        }
    }
    Some(sep)
}

/// First group element (lexicographically) whose image of the closed ball
/// union is disjoint from it.
pub fn displace_region(simplex: &Simplex, balls: &[(Vec<f64>, f64)]) -> Result<Option<DisplaceabilityCertificate>> {
    let n = simplex.dim();
    for (c, r) in balls {
        if c.len() != n {
            return Err(Error::Structure(format!("ball center {c:?} has the wrong dimension")));
        }
        if !(*r >= 0.0) {
            return Err(Error::Domain(format!("ball radius {r} must be nonnegative")));
        }
    }
    if !balls.iter().any(|(c, r)| simplex.distance_to(c) <= *r) {
        return Err(Error::Domain("region does not meet the simplex".into()));
    }
    let mut perm: Vec<usize> = (0..=n).collect();
    while next_permutation(&mut perm) {
        let g = AffineSymmetry { perm: perm.clone() };
        if let Some(separation) = region_separation(simplex, &g, balls) {
            let images = balls.iter().map(|(c, _)| g.apply(simplex, c)).collect();
            return Ok(Some(DisplaceabilityCertificate { symmetry: g, separation, images }));
        }
    }
    Ok(None)
}

/// Solution set of `A x = b` over the rationals.
#[derive(Clone, Debug, PartialEq)]
pub enum FixedLocus {
    Empty,
    /// `point + span(directions)`, in units of the scale.
    Affine { point: Vec<Ratio<i64>>, directions: Vec<Vec<Ratio<i64>>> },
}

impl FixedLocus {
    pub fn dimension(&self) -> Option<usize> {
        match self {
            FixedLocus::Empty => None,
            FixedLocus::Affine { directions, .. } => Some(directions.len()),
        }
    }

    /// The unique fixed point scaled to the simplex, if the locus is a point.
    pub fn singleton(&self, simplex: &Simplex) -> Option<Vec<f64>> {
        match self {
            FixedLocus::Affine { point, directions } if directions.is_empty() => Some(
                point.iter().map(|r| *r.numer() as f64 / *r.denom() as f64 * simplex.scale()).collect(),
            ),
            _ => None,
        }
    }
}

/// Common fixed points of the generators, from `(L_g − I) p = −t_g` solved exactly.
pub fn fixed_locus(simplex: &Simplex) -> FixedLocus {
    let n = simplex.dim();
    let mut rows: Vec<Vec<Ratio<i64>>> = Vec::new();
    for g in symmetry_group(simplex) {
        let (l, t) = g.matrix();
        for i in 0..n {
            let mut row: Vec<Ratio<i64>> = (0..n)
                .map(|j| Ratio::from_integer(l[i][j] - i64::from(i == j)))
                .collect();
            row.push(Ratio::from_integer(-t[i]));
            rows.push(row);
        }
    }
    solve_rational(rows, n)
}

/// Gauss–Jordan elimination on an augmented matrix with `n` unknowns.
fn solve_rational(mut rows: Vec<Vec<Ratio<i64>>>, n: usize) -> FixedLocus {
    let zero = Ratio::from_integer(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][col] != zero) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = Ratio::from_integer(1) / rows[r][col];
        rows[r].iter_mut().for_each(|x| *x *= inv);
        for i in 0..rows.len() {
            if i != r && rows[i][col] != zero {
                let f = rows[i][col];
                for j in col..=n {
                    let v = rows[r][j];
                    rows[i][j] -= f * v;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[n] != zero) {
        return FixedLocus::Empty;
    }
    let mut point = vec![zero; n];
    for (i, &c) in pivots.iter().enumerate() {
        point[c] = rows[i][n];
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let directions = free
        .iter()
        .map(|&f| {
            let mut d = vec![zero; n];
            d[f] = Ratio::from_integer(1);
            for (i, &c) in pivots.iter().enumerate() {
                d[c] = -rows[i][f];
            }
            d
        })
        .collect();
    FixedLocus::Affine { point, directions }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: usize) -> Simplex {
        Simplex::unit(n).unwrap()
    }

    #[test]
    fn generators() {
        let g = symmetry_group(&d(1));
        assert_eq!(g.len(), 1);
        assert!((g[0].apply(&d(1), &[0.3])[0] - 0.7).abs() < 1e-16);
        assert_eq!(g[0].cycles(), "(0 1)");
        let g2: Vec<String> = symmetry_group(&d(2)).iter().map(|g| g.cycles()).collect();
        assert_eq!(g2, ["(0 1)", "(1 2)"]);
    }

    #[test]
    fn enumeration_permutes_vertices() {
        let s = d(2);
        let all = enumerate_group(&s).unwrap();
        assert_eq!(all.len(), 6);
        assert!(all[0].is_identity());
        let verts = s.vertices();
        for g in &all {
            let mut images: Vec<Vec<f64>> = verts.iter().map(|v| g.apply(&s, v)).collect();
            images.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut sorted = verts.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(images, sorted);
        }
    }

    #[test]
    fn group_closed_under_composition() {
        for n in 1..=4 {
            let s = d(n);
            let all = enumerate_group(&s).unwrap();
            let p: Vec<f64> = (0..n).map(|i| 0.1 / (i + 1) as f64).collect();
            for a in &all {
                assert!(a.compose(&a.inverse()).is_identity());
                for b in all.iter().step_by(3) {
                    let ab = a.compose(b);
                    assert!(all.contains(&ab));
                    let direct = ab.apply(&s, &p);
                    let nested = a.apply(&s, &b.apply(&s, &p));
                    assert!(euclid(&direct, &nested) < 1e-15);
                }
            }
        }
    }

    #[test]
    fn point_examples() {
        let c = displace_point(&d(2), &[0.5, 0.2]).unwrap().unwrap();
        assert_eq!(c.symmetry.cycles(), "(1 2)");
        assert_eq!(c.images[0], vec![0.2, 0.5]);
        assert!(displace_point(&d(2), &[1.0 / 3.0, 1.0 / 3.0]).unwrap().is_none());
        assert!(displace_point(&d(1), &[0.5]).unwrap().is_none());
        let c = displace_point(&d(1), &[0.3]).unwrap().unwrap();
        assert_eq!(c.symmetry.cycles(), "(0 1)");
        assert!(matches!(displace_point(&d(2), &[0.8, 0.8]), Err(Error::OutsideSpace(_))));
    }

    #[test]
    fn region_examples() {
        let s = d(2);
        let c = displace_region(&s, &[(vec![0.6, 0.2], 0.05)]).unwrap().unwrap();
        assert_eq!(c.symmetry.cycles(), "(1 2)");
        let expected = 0.4 * 2f64.sqrt() - 0.1;
        assert!((c.separation - expected).abs() < 1e-12);
        assert!(displace_region(&s, &[(vec![1.0 / 3.0, 1.0 / 3.0], 0.05)]).unwrap().is_none());
        assert!(displace_region(&s, &[(vec![0.5, 0.4], 0.3)]).unwrap().is_none());
        assert!(displace_region(&s, &[(vec![5.0, 5.0], 0.1)]).is_err());
    }

    #[test]
    fn sheared_image_is_handled() {
        // (0 1) shears Δ₂; a ball near the origin maps near (1, 0) region.
        let s = d(2);
        let g = AffineSymmetry::transposition(2, 0, 1);
        let balls = vec![(vec![0.1, 0.45], 0.05)];
        let sep = region_separation(&s, &g, &balls).unwrap();
        // brute force distance between image and ball
        let mut best = f64::INFINITY;
        for k in 0..2000 {
            let t = k as f64 / 2000.0 * std::f64::consts::TAU;
            let x = [0.1 + 0.05 * t.cos(), 0.45 + 0.05 * t.sin()];
            let gx = g.apply(&s, &x);
            best = best.min(euclid(&gx, &balls[0].0) - 0.05);
        }
        assert!(sep <= best + 1e-9 && sep > 0.9 * best, "sep {sep} best {best}");
    }

    #[test]
    fn fixed_locus_is_barycenter() {
        for n in 1..=6 {
            let s = d(n);
            let locus = fixed_locus(&s);
            assert_eq!(locus.dimension(), Some(0));
            if let FixedLocus::Affine { point, .. } = &locus {
                assert!(point.iter().all(|r| *r == Ratio::new(1, n as i64 + 1)));
            }
            assert_eq!(locus.singleton(&s).unwrap(), s.barycenter());
        }
        let s = Simplex::new(2, 3.0).unwrap();
        assert_eq!(fixed_locus(&s).singleton(&s).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn rational_solver_reports_degenerate_cases() {
        let r = |x: i64| Ratio::from_integer(x);
        // x + y = 1 (one free direction)
        let line = solve_rational(vec![vec![r(1), r(1), r(1)]], 2);
        assert_eq!(line.dimension(), Some(1));
        let none = solve_rational(vec![vec![r(1), r(1)], vec![r(1), r(2)]], 1);
        assert_eq!(none, FixedLocus::Empty);
    }

    #[test]
    fn pull_back_matches_pointwise() {
        let s = Simplex::new(3, 2.0).unwrap();
        let f = Poly::monomial(vec![2, 1, 0], 1.0).add(&Poly::monomial(vec![0, 0, 3], -2.0));
        let p = [0.3, 0.5, 0.4];
        for g in enumerate_group(&s).unwrap() {
            let lhs = g.pull_back(&f, 2.0).eval(&p);
            let rhs = f.eval(&g.apply(&s, &p));
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
