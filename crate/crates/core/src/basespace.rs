//! Compact parameter spaces: scaled simplices (moment polytopes of CPⁿ),
//! measured trees (Reeb graphs) and finite products of those.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The simplex `{ p ∈ ℝⁿ : pᵢ ≥ 0, Σ pᵢ ≤ scale }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    dim: usize,
    scale: f64,
}

impl Simplex {
    pub fn new(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("simplex dimension must be at least 1".into()));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!("simplex scale must be positive, got {scale}")));
        }
        Ok(Self { dim, scale })
    }

    /// The unit simplex Δₙ, image of the moment map of CPⁿ.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(dim, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `0, scale·e₁, …, scale·eₙ`, in that order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]];
        for i in 0..self.dim {
            let mut v = vec![0.0; self.dim];
            v[i] = self.scale;
            out.push(v);
        }
        out
    }

    pub fn barycenter(&self) -> Vec<f64> {
        vec![self.scale / (self.dim + 1) as f64; self.dim]
    }

    /// Homogeneous coordinates `(p₀, p₁, …, pₙ)` with `p₀ = scale − Σ pᵢ`.
    pub fn homogeneous(&self, p: &[f64]) -> Vec<f64> {
        let mut q = Vec::with_capacity(p.len() + 1);
        q.push(self.scale - p.iter().sum::<f64>());
        q.extend_from_slice(p);
        q
    }

    pub fn contains_coords(&self, p: &[f64], tol: f64) -> Result<bool> {
        if p.len() != self.dim {
            return Err(Error::Structure(format!(
                "point has {} coordinates, simplex has dimension {}",
                p.len(),
                self.dim
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Ok(false);
        }
        Ok(p.iter().all(|&x| x >= -tol) && p.iter().sum::<f64>() <= self.scale + tol)
    }

    /// Euclidean projection onto the simplex.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        let clamped: Vec<f64> = p.iter().map(|x| x.max(0.0)).collect();
        if clamped.iter().sum::<f64>() <= self.scale {
            return clamped;
        }
        // Active face Σ = scale: project onto the probability-type simplex.
        let mut sorted = p.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut cum = 0.0;
        let mut theta = 0.0;
        for (k, &u) in sorted.iter().enumerate() {
            cum += u;
            let t = (cum - self.scale) / (k + 1) as f64;
            if u - t > 0.0 {
                theta = t;
            }
        }
        p.iter().map(|x| (x - theta).max(0.0)).collect()
    }

    pub fn distance_to(&self, p: &[f64]) -> f64 {
        let q = self.project(p);
        euclid(p, &q)
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Piecewise-constant density along an edge, as consecutive `(length, value)` pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeDensity {
    pieces: Vec<(f64, f64)>,
}

impl EdgeDensity {
    pub fn constant(len: f64, value: f64) -> Self {
        Self { pieces: vec![(len, value)] }
    }

    pub fn piecewise(pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Domain("edge density needs at least one piece".into()));
        }
        for &(l, d) in &pieces {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Domain(format!("density piece length must be positive, got {l}")));
            }
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::Domain(format!("density must be nonnegative, got {d}")));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(|p| p.0).sum()
    }

    pub fn mass(&self) -> f64 {
        self.pieces.iter().map(|(l, d)| l * d).sum()
    }

    /// Absolute start offset, length and value of each piece.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let mut start = 0.0;
        self.pieces.iter().map(move |&(l, d)| {
            let s = start;
            start += l;
            (s, l, d)
        })
    }

    /// Mass of `[0, t]`.
    pub fn cumulative(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (s, l, d) in self.segments() {
            if t <= s {
                break;
            }
            acc += d * (t - s).min(l);
        }
        acc
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let mut last = 0.0;
        for (s, l, d) in self.segments() {
            last = d;
            if t < s + l {
                return d;
            }
        }
        last
    }

    /// Break offsets strictly inside the edge.
    pub fn breakpoints(&self) -> Vec<f64> {
        let n = self.pieces.len();
        self.segments().take(n.saturating_sub(1)).map(|(s, l, _)| s + l).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeEdge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
    pub density: EdgeDensity,
}

/// A finite metric tree with a piecewise-constant measure along its edges.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasuredTree {
    names: Vec<String>,
    edges: Vec<TreeEdge>,
    adjacency: Vec<Vec<usize>>,
    total: f64,
}

/// Input description of one edge, with vertices referenced by name.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub u: String,
    pub v: String,
    pub len: f64,
    pub density: DensitySpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    Constant(f64),
    Pieces(Vec<(f64, f64)>),
}

impl EdgeSpec {
    pub fn uniform(u: &str, v: &str, len: f64, density: f64) -> Self {
        Self { u: u.into(), v: v.into(), len, density: DensitySpec::Constant(density) }
    }
}

impl MeasuredTree {
    pub fn from_edges(specs: &[EdgeSpec]) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Domain("tree needs at least one edge".into()));
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut id = |name: &str, names: &mut Vec<String>| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        let mut edges = Vec::with_capacity(specs.len());
        for s in specs {
            if !(s.len > 0.0) || !s.len.is_finite() {
                return Err(Error::Domain(format!("edge {}-{} has nonpositive length {}", s.u, s.v, s.len)));
            }
            let density = match &s.density {
                DensitySpec::Constant(d) => EdgeDensity::piecewise(vec![(s.len, *d)])?,
                DensitySpec::Pieces(p) => {
                    let d = EdgeDensity::piecewise(p.clone())?;
                    if (d.length() - s.len).abs() > 1e-9 * s.len {
                        return Err(Error::Domain(format!(
                            "density pieces of edge {}-{} cover {} but the edge has length {}",
                            s.u,
                            s.v,
                            d.length(),
                            s.len
                        )));
                    }
                    d
                }
            };
            let u = id(&s.u, &mut names);
            let v = id(&s.v, &mut names);
            edges.push(TreeEdge { u, v, len: s.len, density });
        }

        // Union-find: a joining edge inside one component closes a cycle.
        let nv = names.len();
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &edges {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if a == b {
                return Err(Error::Cycle(names[e.u].clone()));
            }
            parent[a] = b;
        }
        let mut roots: Vec<usize> = (0..nv).map(|x| find(&mut parent, x)).collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.len() > 1 {
            return Err(Error::Disconnected(roots.len()));
        }

        let total: f64 = edges.iter().map(|e| e.density.mass()).sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMeasure);
        }
        let mut adjacency = vec![Vec::new(); nv];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.u].push(i);
            adjacency[e.v].push(i);
        }
        Ok(Self { names, edges, adjacency, total })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Result<&TreeEdge> {
        self.edges.get(e).ok_or_else(|| Error::Structure(format!("no edge with id {e}")))
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let edge = &self.edges[e];
        if edge.u == v {
            edge.v
        } else {
            edge.u
        }
    }

    /// Vertex ids in BFS order from `root` with the parent edge of each.
    pub(crate) fn bfs(&self, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut order = vec![root];
        let mut parent_edge = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            for &e in &self.adjacency[v] {
                let w = self.other_end(e, v);
                if !seen[w] {
                    seen[w] = true;
                    parent_edge[w] = Some(e);
                    order.push(w);
                }
            }
            i += 1;
        }
        (order, parent_edge)
    }

    pub fn contains(&self, p: &TreePoint, tol: f64) -> Result<bool> {
        match *p {
            TreePoint::Vertex(v) => {
                if v >= self.vertex_count() {
                    return Err(Error::Structure(format!("no vertex with id {v}")));
                }
                Ok(true)
            }
            TreePoint::Edge { edge, offset } => {
                let e = self.edge(edge)?;
                Ok(offset.is_finite() && offset >= -tol && offset <= e.len + tol)
            }
        }
    }

    /// Geodesic distance between two tree points.
    pub fn distance(&self, a: &TreePoint, b: &TreePoint) -> Result<f64> {
        // Distances from a point to every vertex, then combine at the other point.
        let from_a = self.vertex_distances(a)?;
        match *b {
            TreePoint::Vertex(v) => Ok(from_a[v]),
            TreePoint::Edge { edge, offset } => {
                let e = self.edge(edge)?;
                let mut best = (from_a[e.u] + offset).min(from_a[e.v] + e.len - offset);
                if let TreePoint::Edge { edge: ea, offset: oa } = *a {
                    if ea == edge {
                        best = best.min((oa - offset).abs());
                    }
                }
                Ok(best)
            }
        }
    }

    fn vertex_distances(&self, a: &TreePoint) -> Result<Vec<f64>> {
        let mut dist = vec![f64::INFINITY; self.vertex_count()];
        let mut stack = Vec::new();
        let mut blocked = None;
        match *a {
            TreePoint::Vertex(v) => {
                if v >= self.vertex_count() {
                    return Err(Error::Structure(format!("no vertex with id {v}")));
                }
                dist[v] = 0.0;
                stack.push(v);
            }
            TreePoint::Edge { edge, offset } => {
                let e = self.edge(edge)?;
                dist[e.u] = offset;
                dist[e.v] = e.len - offset;
                stack.extend([e.u, e.v]);
                blocked = Some(edge);
            }
        }
        while let Some(v) = stack.pop() {
            for &e in &self.adjacency[v] {
                if Some(e) == blocked {
                    continue;
                }
                let w = self.other_end(e, v);
                if dist[w].is_infinite() {
                    dist[w] = dist[v] + self.edges[e].len;
                    stack.push(w);
                }
            }
        }
        Ok(dist)
    }
}

/// A point on a tree: a vertex, or an offset measured from the edge's `u` end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TreePoint {
    Vertex(usize),
    Edge { edge: usize, offset: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductSpace {
    factors: Vec<BaseSpace>,
}

impl ProductSpace {
    pub fn new(factors: Vec<BaseSpace>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Domain("product needs at least one factor".into()));
        }
        let mut flat = Vec::with_capacity(factors.len());
        for f in factors {
            match f {
                BaseSpace::Product(p) => flat.extend(p.factors),
                other => flat.push(other),
            }
        }
        Ok(Self { factors: flat })
    }

    pub fn factors(&self) -> &[BaseSpace] {
        &self.factors
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BaseSpace {
    Simplex(Simplex),
    Tree(MeasuredTree),
    Product(ProductSpace),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasePoint {
    Coords(Vec<f64>),
    Tree(TreePoint),
    Tuple(Vec<BasePoint>),
}

impl BasePoint {
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            BasePoint::Coords(c) => Some(c),
            _ => None,
        }
    }
}

impl From<Vec<f64>> for BasePoint {
    fn from(v: Vec<f64>) -> Self {
        BasePoint::Coords(v)
    }
}

impl BaseSpace {
    pub fn simplex(dim: usize, scale: f64) -> Result<Self> {
        Simplex::new(dim, scale).map(BaseSpace::Simplex)
    }

    pub fn product(factors: Vec<BaseSpace>) -> Result<Self> {
        ProductSpace::new(factors).map(BaseSpace::Product)
    }

    pub fn as_simplex(&self) -> Option<&Simplex> {
        match self {
            BaseSpace::Simplex(s) => Some(s),
            _ => None,
        }
    }

    /// Factors of a product, or the space itself as a single factor.
    pub fn factors(&self) -> &[BaseSpace] {
        match self {
            BaseSpace::Product(p) => p.factors(),
            other => std::slice::from_ref(other),
        }
    }

    pub fn contains(&self, p: &BasePoint, tol: f64) -> Result<bool> {
        match (self, p) {
            (BaseSpace::Simplex(s), BasePoint::Coords(c)) => s.contains_coords(c, tol),
            (BaseSpace::Tree(t), BasePoint::Tree(tp)) => t.contains(tp, tol),
            (BaseSpace::Product(prod), BasePoint::Tuple(parts)) => {
                if parts.len() != prod.factors.len() {
                    return Err(Error::Structure(format!(
                        "point has {} components, product has {} factors",
                        parts.len(),
                        prod.factors.len()
                    )));
                }
                let mut inside = true;
                for (f, q) in prod.factors.iter().zip(parts) {
                    inside &= f.contains(q, tol)?;
                }
                Ok(inside)
            }
            _ => Err(Error::Structure(format!("point {p:?} does not match the space kind"))),
        }
    }

    pub(crate) fn require_contains(&self, p: &BasePoint, tol: f64) -> Result<()> {
        if self.contains(p, tol)? {
            Ok(())
        } else {
            Err(Error::OutsideSpace(format!("{p:?}")))
        }
    }
}

/// JSON description of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceSpec {
    Simplex {
        n: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    Tree {
        edges: Vec<EdgeJson>,
    },
    Product {
        factors: Vec<SpaceSpec>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: String,
    pub v: String,
    pub len: f64,
    #[serde(default = "default_density")]
    pub density: DensitySpec,
}

fn default_density() -> DensitySpec {
    DensitySpec::Constant(1.0)
}

impl SpaceSpec {
    pub fn build(&self) -> Result<BaseSpace> {
        match self {
            SpaceSpec::Simplex { n, scale } => BaseSpace::simplex(*n, *scale),
            SpaceSpec::Tree { edges } => {
                let specs: Vec<EdgeSpec> = edges
                    .iter()
                    .map(|e| EdgeSpec { u: e.u.clone(), v: e.v.clone(), len: e.len, density: e.density.clone() })
                    .collect();
                MeasuredTree::from_edges(&specs).map(BaseSpace::Tree)
            }
            SpaceSpec::Product { factors } => {
                let built = factors.iter().map(SpaceSpec::build).collect::<Result<Vec<_>>>()?;
                BaseSpace::product(built)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(masses: [f64; 3]) -> MeasuredTree {
        MeasuredTree::from_edges(&[
            EdgeSpec::uniform("c", "a", 1.0, masses[0]),
            EdgeSpec::uniform("c", "b", 1.0, masses[1]),
            EdgeSpec::uniform("c", "d", 1.0, masses[2]),
        ])
        .unwrap()
    }

    #[test]
    fn simplex_vertices() {
        assert_eq!(Simplex::new(1, 1.0).unwrap().vertices(), vec![vec![0.0], vec![1.0]]);
        assert_eq!(
            Simplex::new(2, 1.0).unwrap().vertices(),
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
        );
        let t = Simplex::new(3, 2.0).unwrap().vertices();
        assert_eq!(t[0], vec![0.0; 3]);
        assert_eq!(t[2], vec![0.0, 2.0, 0.0]);
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn simplex_rejects_bad_input() {
        assert!(matches!(Simplex::new(0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(Simplex::new(2, 0.0), Err(Error::Domain(_))));
        assert!(matches!(Simplex::new(2, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn barycenters() {
        assert_eq!(Simplex::unit(1).unwrap().barycenter(), vec![0.5]);
        assert_eq!(Simplex::unit(3).unwrap().barycenter(), vec![0.25; 3]);
        assert_eq!(Simplex::new(2, 3.0).unwrap().barycenter(), vec![1.0, 1.0]);
        // average of vertices
        let s = Simplex::new(4, 1.5).unwrap();
        let vs = s.vertices();
        for i in 0..4 {
            let avg = vs.iter().map(|v| v[i]).sum::<f64>() / 5.0;
            assert!((avg - s.barycenter()[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn containment() {
        let s = BaseSpace::simplex(2, 1.0).unwrap();
        assert!(s.contains(&vec![0.3, 0.3].into(), 0.0).unwrap());
        assert!(!s.contains(&vec![0.7, 0.7].into(), 0.0).unwrap());
        assert!(s.contains(&vec![1e-12, 0.5].into(), 1e-9).unwrap());
        assert!(!s.contains(&vec![-1e-6, 0.5].into(), 1e-9).unwrap());
        assert!(matches!(s.contains(&vec![0.1].into(), 0.0), Err(Error::Structure(_))));
        assert!(s.contains(&BasePoint::Tree(TreePoint::Vertex(0)), 0.0).is_err());
    }

    #[test]
    fn projection_lands_on_simplex() {
        let s = Simplex::unit(3).unwrap();
        for p in [[2.0, 0.5, -1.0], [0.2, 0.2, 0.2], [-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]] {
            let q = s.project(&p);
            assert!(s.contains_coords(&q, 1e-12).unwrap());
        }
        assert_eq!(s.project(&[0.2, 0.2, 0.2]), vec![0.2, 0.2, 0.2]);
        let q = s.project(&[1.0, 1.0, 1.0]);
        for x in q {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tree_examples() {
        let seg = MeasuredTree::from_edges(&[EdgeSpec::uniform("a", "b", 1.0, 1.0)]).unwrap();
        assert_eq!(seg.total_mass(), 1.0);
        let st = star([1.0 / 3.0; 3]);
        assert!((st.total_mass() - 1.0).abs() < 1e-15);
        assert_eq!(st.edges().len(), st.vertex_count() - 1);
        let err = MeasuredTree::from_edges(&[
            EdgeSpec::uniform("a", "b", 1.0, 1.0),
            EdgeSpec::uniform("c", "d", 1.0, 1.0),
        ]);
        assert_eq!(err, Err(Error::Disconnected(2)));
    }

    #[test]
    fn tree_validation_errors_are_distinct() {
        let cyc = MeasuredTree::from_edges(&[
            EdgeSpec::uniform("a", "b", 1.0, 1.0),
            EdgeSpec::uniform("b", "c", 1.0, 1.0),
            EdgeSpec::uniform("c", "a", 1.0, 1.0),
        ]);
        assert!(matches!(cyc, Err(Error::Cycle(_))));
        let zero = MeasuredTree::from_edges(&[EdgeSpec::uniform("a", "b", 1.0, 0.0)]);
        assert_eq!(zero, Err(Error::ZeroMeasure));
        let neg = MeasuredTree::from_edges(&[EdgeSpec::uniform("a", "b", -1.0, 1.0)]);
        assert!(matches!(neg, Err(Error::Domain(_))));
    }

    #[test]
    fn piecewise_density() {
        let d = EdgeDensity::piecewise(vec![(0.5, 2.0), (0.5, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(d.length(), 2.0);
        assert_eq!(d.mass(), 2.0);
        assert_eq!(d.cumulative(0.25), 0.5);
        assert_eq!(d.cumulative(0.75), 1.0);
        assert_eq!(d.cumulative(1.5), 1.5);
        assert_eq!(d.value_at(0.6), 0.0);
        assert_eq!(d.breakpoints(), vec![0.5, 1.0]);
    }

    #[test]
    fn tree_distances() {
        let st = star([0.5, 0.3, 0.2]);
        let c = st.vertex_id("c").unwrap();
        let a = st.vertex_id("a").unwrap();
        let mid0 = TreePoint::Edge { edge: 0, offset: 0.5 };
        let mid1 = TreePoint::Edge { edge: 1, offset: 0.25 };
        assert_eq!(st.distance(&TreePoint::Vertex(c), &TreePoint::Vertex(a)).unwrap(), 1.0);
        assert_eq!(st.distance(&mid0, &mid1).unwrap(), 0.75);
        assert_eq!(st.distance(&mid0, &TreePoint::Edge { edge: 0, offset: 0.9 }).unwrap(), 0.4);
        assert_eq!(st.distance(&mid1, &TreePoint::Vertex(a)).unwrap(), 1.25);
    }

    #[test]
    fn json_spaces() {
        let s: SpaceSpec = serde_json::from_str(r#"{"kind":"simplex","n":2,"scale":1.0}"#).unwrap();
        assert_eq!(s.build().unwrap(), BaseSpace::simplex(2, 1.0).unwrap());
        let t: SpaceSpec =
            serde_json::from_str(r#"{"kind":"tree","edges":[{"u":"a","v":"b","len":1.0,"density":1.0}]}"#).unwrap();
        assert!(matches!(t.build().unwrap(), BaseSpace::Tree(_)));
        let p: SpaceSpec = serde_json::from_str(
            r#"{"kind":"product","factors":[{"kind":"simplex","n":1},{"kind":"simplex","n":1,"scale":2.0}]}"#,
        )
        .unwrap();
        assert_eq!(p.build().unwrap().factors().len(), 2);
    }

    #[test]
    fn nested_products_flatten() {
        let inner = BaseSpace::product(vec![BaseSpace::simplex(1, 1.0).unwrap()]).unwrap();
        let outer = BaseSpace::product(vec![inner, BaseSpace::simplex(2, 1.0).unwrap()]).unwrap();
        assert_eq!(outer.factors().len(), 2);
    }

    proptest::proptest! {
        #[test]
        fn barycenter_is_inside(n in 1usize..=10, scale in 0.01f64..100.0) {
            let s = BaseSpace::simplex(n, scale).unwrap();
            let b = s.as_simplex().unwrap().barycenter();
            proptest::prop_assert!(s.contains(&b.into(), 0.0).unwrap());
        }
    }
}
