//! Integration against the pushforward (Duistermaat–Heckman) measure of a
//! base space and against quasi-state measures σ.
//!
//! On a simplex of scale `s` the pushforward of `ωⁿ` is `n!·mass` times
//! Lebesgue measure, so the unit simplex carries total mass `mass` and the
//! scaled one `mass·sⁿ`. For CPⁿ with `∫ωⁿ = 1` the unit mass is 1.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::basespace::{BasePoint, BaseSpace, MeasuredTree, Simplex, TreePoint};
use crate::error::{Error, Result};
use crate::funcspace::SmoothFunction;
use crate::poly::Poly;
use crate::quadrature::{self, SimplexRule};

/// Number of independent Monte Carlo substreams; fixed so results are bit-stable.
pub const MC_SHARDS: u64 = 16;

#[derive(Clone, Debug, PartialEq)]
enum FactorMeasure {
    /// `n!·unit_mass` times Lebesgue measure.
    Uniform { simplex: Simplex, unit_mass: f64 },
    /// The tree's own edge densities.
    Edges { tree: MeasuredTree },
}

impl FactorMeasure {
    fn mass(&self) -> f64 {
        match self {
            FactorMeasure::Uniform { simplex, unit_mass } => unit_mass * simplex.scale().powi(simplex.dim() as i32),
            FactorMeasure::Edges { tree } => tree.total_mass(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PushforwardMeasure {
    space: BaseSpace,
    factors: Vec<FactorMeasure>,
}

impl PushforwardMeasure {
    /// Unit mass 1 on every simplex factor (Vol(CPⁿ) = 1); trees keep their densities.
    pub fn duistermaat_heckman(space: &BaseSpace) -> Self {
        Self::with_unit_mass(space, 1.0)
    }

    pub fn with_unit_mass(space: &BaseSpace, unit_mass: f64) -> Self {
        let factors = space
            .factors()
            .iter()
            .map(|f| match f {
                BaseSpace::Simplex(s) => FactorMeasure::Uniform { simplex: s.clone(), unit_mass },
                BaseSpace::Tree(t) => FactorMeasure::Edges { tree: t.clone() },
                BaseSpace::Product(_) => unreachable!("products are flattened"),
            })
            .collect();
        Self { space: space.clone(), factors }
    }

    pub fn space(&self) -> &BaseSpace {
        &self.space
    }

    pub fn total_mass(&self) -> f64 {
        self.factors.iter().map(FactorMeasure::mass).product()
    }

    fn only_simplex(&self) -> Result<(&Simplex, f64)> {
        match self.factors.as_slice() {
            [FactorMeasure::Uniform { simplex, unit_mass }] if !matches!(self.space, BaseSpace::Product(_)) => {
                Ok((simplex, *unit_mass))
            }
            _ => Err(Error::Structure("operation needs a measure on a single simplex".into())),
        }
    }
}

/// The measure σ on the non-displaceable locus.
#[derive(Clone, Debug, PartialEq)]
pub enum QuasiStateMeasure {
    Dirac { point: BasePoint, mass: f64 },
    /// Product of per-factor measures on a product space.
    Product(Vec<QuasiStateMeasure>),
}

impl QuasiStateMeasure {
    pub fn dirac(point: BasePoint) -> Self {
        QuasiStateMeasure::Dirac { point, mass: 1.0 }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            QuasiStateMeasure::Dirac { mass, .. } => *mass,
            QuasiStateMeasure::Product(fs) => fs.iter().map(|f| f.total_mass()).product(),
        }
    }

    /// The single atom `(point, mass)` this measure collapses to.
    pub fn atom(&self) -> (BasePoint, f64) {
        match self {
            QuasiStateMeasure::Dirac { point, mass } => (point.clone(), *mass),
            QuasiStateMeasure::Product(fs) => {
                let (points, masses): (Vec<_>, Vec<_>) = fs.iter().map(|f| f.atom()).unzip();
                (BasePoint::Tuple(points), masses.iter().product())
            }
        }
    }
}

/// Integration engine choice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Engine {
    /// Closed-form Dirichlet monomial integrals; polynomial integrands only.
    Exact,
    /// Collapsed Gauss rule with `order` points per axis on each of the
    /// `subdivisions^n` Kuhn simplices (composite Gauss–Legendre on tree edges).
    Quadrature { order: usize, subdivisions: usize },
    MonteCarlo { samples: usize, seed: u64 },
    /// One-dimensional reduction for functions of `Σpᵢ` on a simplex.
    Radial { panels: usize },
}

impl Engine {
    pub fn quadrature(order: usize) -> Self {
        Engine::Quadrature { order, subdivisions: 1 }
    }
}

pub fn integrate(m: &PushforwardMeasure, f: &SmoothFunction, engine: Engine) -> Result<f64> {
    match engine {
        Engine::Exact => integrate_exact(m, f),
        Engine::Quadrature { order, subdivisions } => integrate_composite(m, f, order, subdivisions),
        Engine::MonteCarlo { samples, seed } => integrate_monte_carlo(m, f, samples, seed).map(|r| r.estimate),
        Engine::Radial { panels } => {
            let profile = f
                .as_radial()
                .ok_or_else(|| Error::Structure("radial engine needs a function of the coordinate sum".into()))?;
            integrate_radial(m, &profile, panels)
        }
    }
}

// ---------------------------------------------------------------------------
// exact

const MAX_FACTORIAL: usize = 170;

fn factorial(k: usize) -> Result<f64> {
    if k > MAX_FACTORIAL {
        return Err(Error::Domain(format!("degree too high for exact integration ({k}!)")));
    }
    Ok((1..=k).map(|i| i as f64).product())
}

/// `∫_{Δₙ} Π xᵢ^{aᵢ} dx = Π aᵢ! / (n + |a|)!` over the unit simplex.
pub fn dirichlet_monomial(exps: &[u32]) -> Result<f64> {
    let num = exps.iter().try_fold(1.0, |acc, &k| Ok::<_, Error>(acc * factorial(k as usize)?))?;
    let deg: u32 = exps.iter().sum();
    Ok(num / factorial(exps.len() + deg as usize)?)
}

fn integrate_simplex_poly(simplex: &Simplex, unit_mass: f64, p: &Poly) -> Result<f64> {
    let n = simplex.dim();
    let nfact = factorial(n)?;
    let mut total = 0.0;
    for (exps, c) in p.terms() {
        let deg: u32 = exps.iter().sum();
        total += c * dirichlet_monomial(exps)? * simplex.scale().powi((n as u32 + deg) as i32);
    }
    Ok(nfact * unit_mass * total)
}

/// Tree-local polynomial: a constant plus per-edge polynomials in the offset.
#[derive(Clone, Debug)]
struct TreePoly {
    constant: f64,
    edges: BTreeMap<usize, Poly>,
}

impl TreePoly {
    fn constant(c: f64) -> Self {
        Self { constant: c, edges: BTreeMap::new() }
    }

    fn add(&self, o: &TreePoly) -> TreePoly {
        let mut edges = self.edges.clone();
        for (e, p) in &o.edges {
            let merged = edges.get(e).map_or_else(|| p.clone(), |q| q.add(p));
            edges.insert(*e, merged);
        }
        TreePoly { constant: self.constant + o.constant, edges }
    }

    fn mul(&self, o: &TreePoly) -> TreePoly {
        let mut out = TreePoly::constant(self.constant * o.constant);
        let keys: std::collections::BTreeSet<usize> = self.edges.keys().chain(o.edges.keys()).copied().collect();
        for e in keys {
            let zero = Poly::zero(1);
            let a = self.edges.get(&e).unwrap_or(&zero);
            let b = o.edges.get(&e).unwrap_or(&zero);
            let p = a.scale(o.constant).add(&b.scale(self.constant)).add(&a.mul(b));
            out.edges.insert(e, p);
        }
        out
    }

    fn scale(&self, k: f64) -> TreePoly {
        TreePoly { constant: self.constant * k, edges: self.edges.iter().map(|(e, p)| (*e, p.scale(k))).collect() }
    }

    fn integrate(&self, tree: &MeasuredTree) -> Result<f64> {
        let mut total = self.constant * tree.total_mass();
        for (&e, p) in &self.edges {
            let edge = tree.edge(e)?;
            for (start, len, dens) in edge.density.segments() {
                if dens == 0.0 {
                    continue;
                }
                let (a, b) = (start, start + len);
                for (exps, c) in p.terms() {
                    let k = exps[0] as i32;
                    total += dens * c * (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64;
                }
            }
        }
        Ok(total)
    }
}

fn tree_poly(f: &SmoothFunction) -> Result<TreePoly> {
    use SmoothFunction as F;
    match f {
        F::Constant { value } => Ok(TreePoly::constant(*value)),
        F::Edge { edge, profile } => {
            let mut t = TreePoly::constant(0.0);
            t.edges.insert(*edge, profile.to_poly(1)?);
            Ok(t)
        }
        F::Sum { terms } => terms.iter().try_fold(TreePoly::constant(0.0), |acc, t| Ok(acc.add(&tree_poly(t)?))),
        F::Product { factors } => {
            factors.iter().try_fold(TreePoly::constant(1.0), |acc, t| Ok(acc.mul(&tree_poly(t)?)))
        }
        F::Scale { by, f } => Ok(tree_poly(f)?.scale(*by)),
        F::Shift { by, f } => Ok(tree_poly(f)?.add(&TreePoly::constant(*by))),
        _ => Err(Error::NotPolynomial("tree function must be built from edge polynomials".into())),
    }
}

#[derive(Clone, Debug)]
enum Local {
    Coords(Poly),
    Tree(TreePoly),
}

impl Local {
    fn one(space: &BaseSpace) -> Local {
        match space {
            BaseSpace::Simplex(s) => Local::Coords(Poly::constant(s.dim(), 1.0)),
            _ => Local::Tree(TreePoly::constant(1.0)),
        }
    }

    fn convert(f: &SmoothFunction, space: &BaseSpace) -> Result<Local> {
        match space {
            BaseSpace::Simplex(s) => Ok(Local::Coords(f.to_poly(s.dim())?)),
            BaseSpace::Tree(_) => Ok(Local::Tree(tree_poly(f)?)),
            BaseSpace::Product(_) => Err(Error::Structure("nested product".into())),
        }
    }

    fn mul(&self, o: &Local) -> Local {
        match (self, o) {
            (Local::Coords(a), Local::Coords(b)) => Local::Coords(a.mul(b)),
            (Local::Tree(a), Local::Tree(b)) => Local::Tree(a.mul(b)),
            _ => unreachable!("factor kinds agree slot by slot"),
        }
    }

    fn integrate(&self, m: &FactorMeasure) -> Result<f64> {
        match (self, m) {
            (Local::Coords(p), FactorMeasure::Uniform { simplex, unit_mass }) => {
                integrate_simplex_poly(simplex, *unit_mass, p)
            }
            (Local::Tree(t), FactorMeasure::Edges { tree }) => t.integrate(tree),
            _ => unreachable!("factor kinds agree slot by slot"),
        }
    }
}

/// Separated form `Σ coef · Π_k local_k` of a function on a product space.
type Separated = Vec<(f64, Vec<Local>)>;

fn separate(f: &SmoothFunction, factors: &[BaseSpace]) -> Result<Separated> {
    use SmoothFunction as F;
    let ones = || factors.iter().map(Local::one).collect::<Vec<_>>();
    match f {
        F::Constant { value } => Ok(vec![(*value, ones())]),
        F::Factor { index, f } => {
            let space = factors
                .get(*index)
                .ok_or_else(|| Error::Structure(format!("product has no factor {index}")))?;
            let mut slots = ones();
            slots[*index] = Local::convert(f, space)?;
            Ok(vec![(1.0, slots)])
        }
        F::Sum { terms } => {
            let mut out = Vec::new();
            for t in terms {
                out.extend(separate(t, factors)?);
            }
            Ok(out)
        }
        F::Product { factors: fs } => {
            let mut acc: Separated = vec![(1.0, ones())];
            for t in fs {
                let rhs = separate(t, factors)?;
                let mut next = Vec::with_capacity(acc.len() * rhs.len());
                for (ca, la) in &acc {
                    for (cb, lb) in &rhs {
                        next.push((ca * cb, la.iter().zip(lb).map(|(a, b)| a.mul(b)).collect()));
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
        F::Scale { by, f } => Ok(separate(f, factors)?.into_iter().map(|(c, l)| (c * by, l)).collect()),
        F::Shift { by, f } => {
            let mut out = separate(f, factors)?;
            out.push((*by, ones()));
            Ok(out)
        }
        _ => Err(Error::Structure("functions on products must be built from per-factor terms".into())),
    }
}

/// Exact integral of a polynomial integrand (Dirichlet formula on simplices,
/// antiderivatives along tree edges, Fubini on products).
pub fn integrate_exact(m: &PushforwardMeasure, f: &SmoothFunction) -> Result<f64> {
    match &m.space {
        BaseSpace::Product(p) => {
            let mut total = 0.0;
            for (c, locals) in separate(f, p.factors())? {
                let mut term = c;
                for (l, fm) in locals.iter().zip(&m.factors) {
                    term *= l.integrate(fm)?;
                }
                total += term;
            }
            Ok(total)
        }
        space => Local::convert(f, space)?.integrate(&m.factors[0]),
    }
}

// ---------------------------------------------------------------------------
// quadrature

/// Weighted nodes (weights include the measure's density) for one factor.
fn factor_nodes(fm: &FactorMeasure, order: usize, subdivisions: usize) -> Vec<(BasePoint, f64)> {
    match fm {
        FactorMeasure::Uniform { simplex, unit_mass } => {
            let n = simplex.dim();
            let rule = SimplexRule::composite(&SimplexRule::conical(n, order), subdivisions);
            let s = simplex.scale();
            let nfact: f64 = (1..=n).map(|i| i as f64).product();
            let w_scale = nfact * unit_mass * s.powi(n as i32);
            rule.nodes
                .into_iter()
                .zip(rule.weights)
                .map(|(x, w)| (BasePoint::Coords(x.into_iter().map(|v| v * s).collect()), w * w_scale))
                .collect()
        }
        FactorMeasure::Edges { tree } => {
            let (xs, ws) = quadrature::gauss_legendre(order);
            let panels = subdivisions.max(1);
            let mut out = Vec::new();
            for (e, edge) in tree.edges().iter().enumerate() {
                for (start, len, dens) in edge.density.segments() {
                    if dens == 0.0 {
                        continue;
                    }
                    let h = len / panels as f64;
                    for k in 0..panels {
                        for (x, w) in xs.iter().zip(&ws) {
                            let offset = start + h * (k as f64 + x);
                            out.push((BasePoint::Tree(TreePoint::Edge { edge: e, offset }), w * h * dens));
                        }
                    }
                }
            }
            out
        }
    }
}

/// Tensor-product node set for the whole measure.
pub fn quadrature_nodes(m: &PushforwardMeasure, order: usize, subdivisions: usize) -> Result<Vec<(BasePoint, f64)>> {
    quadrature::check_order(order)?;
    let per: Vec<Vec<(BasePoint, f64)>> = m.factors.iter().map(|f| factor_nodes(f, order, subdivisions)).collect();
    if !matches!(m.space, BaseSpace::Product(_)) {
        return Ok(per.into_iter().next().unwrap());
    }
    let mut acc: Vec<(Vec<BasePoint>, f64)> = vec![(Vec::new(), 1.0)];
    for nodes in &per {
        let mut next = Vec::with_capacity(acc.len() * nodes.len());
        for (prefix, w) in &acc {
            for (p, wp) in nodes {
                let mut v = prefix.clone();
                v.push(p.clone());
                next.push((v, w * wp));
            }
        }
        acc = next;
    }
    Ok(acc.into_iter().map(|(v, w)| (BasePoint::Tuple(v), w)).collect())
}

const CHUNK: usize = 4096;

/// `Σ wᵢ f(xᵢ)` with a fixed chunking so the result does not depend on the thread count.
pub fn apply_nodes(space: &BaseSpace, f: &SmoothFunction, nodes: &[(BasePoint, f64)]) -> Result<f64> {
    let partial: Vec<f64> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| chunk.iter().try_fold(0.0, |acc, (p, w)| Ok(acc + w * f.value(space, p)?)))
        .collect::<Result<_>>()?;
    Ok(partial.iter().sum())
}

/// Deterministic simplex-rule integral with `order` Gauss points per axis.
pub fn integrate_quadrature(m: &PushforwardMeasure, f: &SmoothFunction, order: usize) -> Result<f64> {
    integrate_composite(m, f, order, 1)
}

pub fn integrate_composite(m: &PushforwardMeasure, f: &SmoothFunction, order: usize, subdivisions: usize) -> Result<f64> {
    let nodes = quadrature_nodes(m, order, subdivisions)?;
    apply_nodes(&m.space, f, &nodes)
}

/// `∫ g(Σpᵢ) dm` through the law of `Σpᵢ`, which has density
/// `mass·n·tⁿ⁻¹` on `[0, scale]`.
pub fn integrate_radial(m: &PushforwardMeasure, profile: &SmoothFunction, panels: usize) -> Result<f64> {
    let (simplex, unit_mass) = m.only_simplex()?;
    let n = simplex.dim() as i32;
    let bps = profile.breakpoints_1d();
    let val = quadrature::integrate_1d(
        |t| Ok(profile.profile_at(t)? * n as f64 * t.powi(n - 1)),
        0.0,
        simplex.scale(),
        &bps,
        panels,
        16,
    )?;
    Ok(unit_mass * val)
}

// ---------------------------------------------------------------------------
// Monte Carlo

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
}

/// Samplers for the normalized measure of each factor.
enum FactorSampler<'a> {
    Simplex(&'a Simplex),
    Tree { tree: &'a MeasuredTree, cumulative: Vec<(f64, usize, f64, f64)> },
}

impl<'a> FactorSampler<'a> {
    fn new(fm: &'a FactorMeasure) -> Self {
        match fm {
            FactorMeasure::Uniform { simplex, .. } => FactorSampler::Simplex(simplex),
            FactorMeasure::Edges { tree } => {
                let mut acc = 0.0;
                let mut cumulative = Vec::new();
                for (e, edge) in tree.edges().iter().enumerate() {
                    for (start, len, dens) in edge.density.segments() {
                        if dens > 0.0 {
                            acc += len * dens;
                            cumulative.push((acc, e, start, len));
                        }
                    }
                }
                FactorSampler::Tree { tree, cumulative }
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> BasePoint {
        match self {
            FactorSampler::Simplex(s) => {
                // Normalized exponential spacings are uniform on the simplex.
                let e: Vec<f64> = (0..=s.dim()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                let total: f64 = e.iter().sum();
                BasePoint::Coords(e[1..].iter().map(|x| s.scale() * x / total).collect())
            }
            FactorSampler::Tree { tree, cumulative } => {
                let u = rng.random::<f64>() * tree.total_mass();
                let i = cumulative.partition_point(|c| c.0 <= u).min(cumulative.len() - 1);
                let (_, edge, start, len) = cumulative[i];
                BasePoint::Tree(TreePoint::Edge { edge, offset: start + len * rng.random::<f64>() })
            }
        }
    }
}

/// Running mean and sum of squared deviations (Welford).
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments { n, mean: self.mean + d * o.n / n, m2: self.m2 + o.m2 + d * d * self.n * o.n / n }
    }
}

/// Seeded Monte Carlo estimate with its standard error. Samples are split
/// over [`MC_SHARDS`] ChaCha substreams derived from `(seed, shard)`.
pub fn integrate_monte_carlo(m: &PushforwardMeasure, f: &SmoothFunction, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::Domain("Monte Carlo needs at least 2 samples".into()));
    }
    let samplers: Vec<FactorSampler> = m.factors.iter().map(FactorSampler::new).collect();
    let product = matches!(m.space, BaseSpace::Product(_));
    let per = samples as u64 / MC_SHARDS;
    let extra = samples as u64 % MC_SHARDS;
    let shards: Vec<Moments> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let count = per + u64::from(shard < extra);
            let mut mo = Moments::default();
            for _ in 0..count {
                let p = if product {
                    BasePoint::Tuple(samplers.iter().map(|s| s.sample(&mut rng)).collect())
                } else {
                    samplers[0].sample(&mut rng)
                };
                mo.push(f.value(&m.space, &p)?);
            }
            Ok(mo)
        })
        .collect::<Result<_>>()?;
    let all = shards.into_iter().fold(Moments::default(), Moments::merge);
    let mass = m.total_mass();
    let var = (all.m2 / (all.n - 1.0)).max(0.0);
    Ok(McEstimate { estimate: mass * all.mean, standard_error: mass * (var / all.n).sqrt() })
}

// ---------------------------------------------------------------------------
// σ

/// `∫ f dσ`: point evaluation at the atom, weighted by its mass.
pub fn integrate_sigma(sigma: &QuasiStateMeasure, space: &BaseSpace, f: &SmoothFunction) -> Result<f64> {
    let (point, mass) = sigma.atom();
    Ok(mass * f.eval(space, &point)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basespace::EdgeSpec;

    fn cp(n: usize) -> PushforwardMeasure {
        PushforwardMeasure::duistermaat_heckman(&BaseSpace::simplex(n, 1.0).unwrap())
    }

    #[test]
    fn exact_examples() {
        let p1 = SmoothFunction::coordinate(2, 0);
        assert!((integrate_exact(&cp(2), &p1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let p1p2 = SmoothFunction::monomial(vec![1, 1], 1.0);
        assert!((integrate_exact(&cp(2), &p1p2).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        let sq = SmoothFunction::monomial(vec![2], 1.0);
        assert!((integrate_exact(&cp(1), &sq).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let bump = SmoothFunction::bump(vec![0.5], 0.1);
        assert!(matches!(integrate_exact(&cp(1), &bump), Err(Error::NotPolynomial(_))));
    }

    #[test]
    fn scaled_simplex_mass() {
        let m = PushforwardMeasure::duistermaat_heckman(&BaseSpace::simplex(2, 3.0).unwrap());
        assert_eq!(m.total_mass(), 9.0);
        let one = SmoothFunction::constant(1.0);
        assert!((integrate_exact(&m, &one).unwrap() - 9.0).abs() < 1e-12);
        // mean of p₁ over 3Δ₂ is the barycenter coordinate 1
        let p1 = SmoothFunction::coordinate(2, 0);
        assert!((integrate_exact(&m, &p1).unwrap() / 9.0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_normalization() {
        for n in 1..=5 {
            let q = integrate_quadrature(&cp(n), &SmoothFunction::constant(1.0), 2).unwrap();
            assert!((q - 1.0).abs() < 1e-12, "n={n}");
        }
        let p1p2 = SmoothFunction::monomial(vec![1, 1], 1.0);
        assert!((integrate_quadrature(&cp(2), &p1p2, 3).unwrap() - 1.0 / 12.0).abs() < 1e-10);
    }

    #[test]
    fn monte_carlo_constant_is_exact() {
        let r = integrate_monte_carlo(&cp(3), &SmoothFunction::constant(1.0), 1000, 7).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.standard_error, 0.0);
        assert!(integrate_monte_carlo(&cp(1), &SmoothFunction::constant(1.0), 1, 7).is_err());
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let f = SmoothFunction::monomial(vec![1, 2], 1.0);
        let a = integrate_monte_carlo(&cp(2), &f, 5000, 42).unwrap();
        let b = integrate_monte_carlo(&cp(2), &f, 5000, 42).unwrap();
        assert_eq!(a, b);
        let c = integrate_monte_carlo(&cp(2), &f, 5000, 43).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    #[test]
    fn sigma_examples() {
        let d2 = BaseSpace::simplex(2, 1.0).unwrap();
        let sigma = QuasiStateMeasure::dirac(vec![1.0 / 3.0; 2].into());
        let f = SmoothFunction::monomial(vec![1, 1], 1.0);
        assert!((integrate_sigma(&sigma, &d2, &f).unwrap() - 1.0 / 9.0).abs() < 1e-16);
        assert_eq!(integrate_sigma(&sigma, &d2, &SmoothFunction::constant(2.5)).unwrap(), 2.5);

        let d1 = BaseSpace::simplex(1, 1.0).unwrap();
        let prod = BaseSpace::product(vec![d1.clone(), d1]).unwrap();
        let sigma = QuasiStateMeasure::Product(vec![
            QuasiStateMeasure::dirac(vec![0.5].into()),
            QuasiStateMeasure::dirac(vec![0.5].into()),
        ]);
        let pq = SmoothFunction::product(vec![
            SmoothFunction::factor(0, SmoothFunction::coordinate(1, 0)),
            SmoothFunction::factor(1, SmoothFunction::coordinate(1, 0)),
        ]);
        assert_eq!(integrate_sigma(&sigma, &prod, &pq).unwrap(), 0.25);

        let outside = QuasiStateMeasure::dirac(vec![0.8, 0.8].into());
        assert!(matches!(integrate_sigma(&outside, &d2, &f), Err(Error::OutsideSpace(_))));
    }

    #[test]
    fn tree_integration_engines_agree() {
        let tree = MeasuredTree::from_edges(&[
            EdgeSpec::uniform("c", "a", 1.0, 0.5),
            EdgeSpec {
                u: "c".into(),
                v: "b".into(),
                len: 2.0,
                density: crate::basespace::DensitySpec::Pieces(vec![(0.5, 0.2), (1.5, 0.1)]),
            },
        ])
        .unwrap();
        let m = PushforwardMeasure::duistermaat_heckman(&BaseSpace::Tree(tree));
        let f = SmoothFunction::sum(vec![
            SmoothFunction::edge(0, SmoothFunction::monomial(vec![2], 3.0)),
            SmoothFunction::edge(1, SmoothFunction::monomial(vec![1], 1.0)),
            SmoothFunction::constant(0.5),
        ]);
        // by hand: 0.5·∫₀¹3t² + 0.2·∫₀^½ t + 0.1·∫_½² t + 0.5·mass
        let mass = 0.5 + 0.1 + 0.15;
        let expected = 0.5 + 0.2 * 0.125 + 0.1 * (2.0 - 0.125) + 0.5 * mass;
        assert!((integrate_exact(&m, &f).unwrap() - expected).abs() < 1e-14);
        assert!((integrate_quadrature(&m, &f, 3).unwrap() - expected).abs() < 1e-14);
        let mc = integrate_monte_carlo(&m, &f, 200_000, 3).unwrap();
        assert!((mc.estimate - expected).abs() < 4.0 * mc.standard_error);
    }

    #[test]
    fn radial_reduction_matches_exact() {
        // (Σp)³ on CP³
        let f = SmoothFunction::radial(SmoothFunction::monomial(vec![3], 1.0));
        let exact = integrate_exact(&cp(3), &f).unwrap();
        let radial = integrate(&cp(3), &f, Engine::Radial { panels: 4 }).unwrap();
        assert!((exact - radial).abs() < 1e-14);
        // ∫ n t^{n-1} t³ = n/(n+3)
        assert!((exact - 0.5).abs() < 1e-14);
    }

    #[test]
    fn exact_is_linear() {
        let f = SmoothFunction::monomial(vec![2, 1, 0], 1.0);
        let g = SmoothFunction::monomial(vec![0, 3, 1], 1.0);
        let m = cp(3);
        let lhs = integrate_exact(&m, &f.combine(2.0, &g, -3.0)).unwrap();
        let rhs = 2.0 * integrate_exact(&m, &f).unwrap() - 3.0 * integrate_exact(&m, &g).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn dirichlet_is_permutation_symmetric(a in proptest::collection::vec(0u32..6, 1..5), rot in 0usize..4) {
            let mut b = a.clone();
            let k = rot % b.len();
            b.rotate_left(k);
            proptest::prop_assert_eq!(dirichlet_monomial(&a).unwrap(), dirichlet_monomial(&b).unwrap());
        }
    }
}
