//! Executable version of the partition-of-unity argument: flatten `f̄` near
//! the special point, cover the simplex by small balls, split
//! `f̄′ − f̄′(p*)` into pieces supported in the balls, and add up their
//! Calabi values.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basespace::{euclid, Simplex};
use crate::error::{Error, Result};
use crate::funcspace::{bump_value, simplex_lattice, Smoothness, SmoothFunction};
use crate::measure::{quadrature_nodes, Engine};
use crate::quasistate::{calabi_value, zeta, QuasiStateModel, ToricHamiltonian};
use crate::symmetry::{displace_region, DisplaceabilityCertificate};

/// The γ ladder used by [`gamma_sweep`] unless told otherwise.
pub const DEFAULT_GAMMAS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Centers closer than `radius + margin` to `p*` are left out of the cover.
pub const CENTER_MARGIN: f64 = 1e-9;

/// Coverage grid pitch relative to the ball radius.
const COVER_GRID_PER_RADIUS: f64 = 8.0;

const MAX_GRID_POINTS: u128 = 5_000_000;

const SMOOTHNESS: Smoothness = Smoothness::C2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlattenResult {
    pub fprime: SmoothFunction,
    pub epsilon_achieved: f64,
    pub gamma: f64,
}

/// Grid over the `radius`-ball around `center` intersected with the simplex.
fn ball_grid(simplex: &Simplex, center: &[f64], radius: f64) -> Vec<Vec<f64>> {
    let n = center.len();
    let per_axis = ((200_000f64).powf(1.0 / n as f64).floor() as usize).clamp(5, 65) / 2;
    let h = radius / per_axis as f64;
    let side = 2 * per_axis + 1;
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().zip(center).map(|(&k, &c)| c + h * (k as f64 - per_axis as f64)).collect();
        if euclid(&x, center) <= radius * (1.0 + 1e-12) && simplex.contains_coords(&x, 0.0).unwrap_or(false) {
            out.push(x);
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            idx[k] += 1;
            if idx[k] < side {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `f′ = χ·f(p*) + (1−χ)·f` with `χ ≡ 1` on the γ-ball and `χ ≡ 0` off the 2γ-ball.
pub fn flatten(simplex: &Simplex, f: &SmoothFunction, pstar: &[f64], gamma: f64) -> Result<FlattenResult> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("γ = {gamma} must be positive")));
    }
    if simplex.distance_to(pstar) > 2.0 * gamma {
        return Err(Error::Domain("the 2γ-ball around p* misses the simplex".into()));
    }
    if let SmoothFunction::Constant { .. } = f {
        return Ok(FlattenResult { fprime: f.clone(), epsilon_achieved: 0.0, gamma });
    }
    let fp = f.value_at(pstar)?;
    let chi = SmoothFunction::plateau_bump(pstar.to_vec(), gamma, 2.0 * gamma, SMOOTHNESS);
    let fprime = SmoothFunction::sum(vec![
        chi.clone().scaled(fp),
        SmoothFunction::product(vec![chi.scaled(-1.0).shifted(1.0), f.clone()]),
    ]);
    let mut eps: f64 = 0.0;
    for x in ball_grid(simplex, pstar, 2.0 * gamma) {
        eps = eps.max((f.value_at(&x)? - fp).abs());
    }
    Ok(FlattenResult { fprime, epsilon_achieved: eps, gamma })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverPlan {
    pub pstar: Vec<f64>,
    pub radius: f64,
    /// Lattice pitch of the centers of `balls[1..]`.
    pub pitch: f64,
    /// `(center, radius)`; index 0 is centered at `p*`.
    pub balls: Vec<(Vec<f64>, f64)>,
    /// Lattice index `k` of each center `p* + pitch·(k + ½)`, for `balls[1..]`.
    pub keys: Vec<Vec<i64>>,
    /// Resolution of the simplex grid on which coverage was verified.
    pub grid_resolution: usize,
}

/// Spatial lookup of cover balls by lattice cell.
struct CoverIndex<'a> {
    plan: &'a CoverPlan,
    cells: HashMap<&'a [i64], usize>,
    reach: i64,
}

impl<'a> CoverIndex<'a> {
    fn new(plan: &'a CoverPlan) -> Self {
        let cells = plan.keys.iter().enumerate().map(|(i, k)| (k.as_slice(), i + 1)).collect();
        Self { plan, cells, reach: (plan.radius / plan.pitch).ceil() as i64 + 1 }
    }

    /// Indices of balls whose open ball contains `x`, in increasing order.
    fn containing(&self, x: &[f64]) -> Vec<usize> {
        let p = self.plan;
        let mut out = Vec::new();
        if euclid(x, &p.pstar) < p.radius {
            out.push(0);
        }
        let base: Vec<i64> = x.iter().zip(&p.pstar).map(|(xi, c)| ((xi - c) / p.pitch - 0.5).round() as i64).collect();
        let n = base.len();
        let span = (2 * self.reach + 1) as usize;
        let mut off = vec![0usize; n];
        let mut key = vec![0i64; n];
        loop {
            for i in 0..n {
                key[i] = base[i] + off[i] as i64 - self.reach;
            }
            if let Some(&b) = self.cells.get(key.as_slice()) {
                if euclid(x, &p.balls[b].0) < p.radius {
                    out.push(b);
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    out.sort_unstable();
                    return out;
                }
                off[i] += 1;
                if off[i] < span {
                    break;
                }
                off[i] = 0;
                i += 1;
            }
        }
    }

    /// Whether `x` lies in some ball with at least `slack` to spare.
    fn covers(&self, x: &[f64], slack: f64) -> bool {
        let p = self.plan;
        let r = p.radius - slack;
        if euclid(x, &p.pstar) < r {
            return true;
        }
        self.containing(x).iter().any(|&b| euclid(x, &p.balls[b].0) < r)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Balls of radius `γ/2`: `U₀` at `p*`, the others on a lattice avoiding
/// the closed `γ/2`-ball around `p*`. Coverage is checked on a grid whose
/// mesh is subtracted from the radius, so the whole simplex is covered.
pub fn build_cover(simplex: &Simplex, pstar: &[f64], gamma: f64) -> Result<CoverPlan> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("γ = {gamma} must be positive")));
    }
    let n = simplex.dim();
    if pstar.len() != n || !simplex.contains_coords(pstar, 1e-12)? {
        return Err(Error::OutsideSpace(format!("{pstar:?}")));
    }
    let radius = gamma / 2.0;
    let far = simplex.vertices().iter().map(|v| euclid(v, pstar)).fold(0.0, f64::max);
    if far < radius {
        return Err(Error::CoverUnsatisfiable(format!(
            "U₀ of radius {radius} already contains the simplex, so every ball meeting it would need p* in its closure"
        )));
    }
    let scale = simplex.scale();
    let sqrt_n = (n as f64).sqrt();
    let grid_resolution = (COVER_GRID_PER_RADIUS * sqrt_n * scale / radius).ceil() as usize;
    if binomial(grid_resolution as u128 + n as u128, n as u128) > MAX_GRID_POINTS {
        return Err(Error::Domain(format!("coverage grid at γ = {gamma} is too large in dimension {n}")));
    }
    let mesh = scale * sqrt_n / grid_resolution as f64;
    let grid: Vec<Vec<f64>> = simplex_lattice(n, grid_resolution)
        .into_iter()
        .map(|k| k.iter().map(|&ki| scale * ki as f64 / grid_resolution as f64).collect())
        .collect();
    let margin = CENTER_MARGIN * scale.max(1.0);

    let mut pitch = radius / sqrt_n;
    for _ in 0..8 {
        let plan = lattice_cover(simplex, pstar, radius, pitch, margin, grid_resolution);
        let index = CoverIndex::new(&plan);
        if grid.par_iter().all(|x| index.covers(x, mesh)) {
            return Ok(plan);
        }
        pitch *= 0.75;
    }
    Err(Error::CoverUnsatisfiable(format!("no lattice cover at γ = {gamma} passed the coverage check")))
}

fn lattice_cover(simplex: &Simplex, pstar: &[f64], radius: f64, pitch: f64, margin: f64, grid_resolution: usize) -> CoverPlan {
    let n = pstar.len();
    let scale = simplex.scale();
    let lo: Vec<i64> = pstar.iter().map(|c| ((-radius - c) / pitch - 0.5).floor() as i64).collect();
    let hi: Vec<i64> = pstar.iter().map(|c| ((scale + radius - c) / pitch - 0.5).ceil() as i64).collect();
    let mut balls = vec![(pstar.to_vec(), radius)];
    let mut keys = Vec::new();
    let mut k = lo.clone();
    loop {
        let c: Vec<f64> = k.iter().zip(pstar).map(|(&ki, p)| p + pitch * (ki as f64 + 0.5)).collect();
        if simplex.distance_to(&c) < radius && euclid(&c, pstar) > radius + margin {
            balls.push((c, radius));
            keys.push(k.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return CoverPlan { pstar: pstar.to_vec(), radius, pitch, balls, keys, grid_resolution };
            }
            k[i] += 1;
            if k[i] <= hi[i] {
                break;
            }
            k[i] = lo[i];
            i += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceStatus {
    /// Inside the flattened γ-ball, verified identically zero.
    NearPstar,
    Certified { certificate: DisplaceabilityCertificate },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceReport {
    pub index: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub function: SmoothFunction,
    pub status: PieceStatus,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub gamma: f64,
    pub epsilon_achieved: f64,
    pub fprime_at_pstar: f64,
    pub quadrature_order: usize,
    pub quadrature_subdivisions: usize,
    pub pieces: Vec<PieceReport>,
    /// `Σ calabi_value(piece)`.
    pub sum_of_values: f64,
    /// `ζ(f′)` under the same rule.
    pub zeta_fprime: f64,
    /// `|sum_of_values − zeta_fprime|`.
    pub reconstruction_error: f64,
    /// `|Σ values − (calabi(f′) − f′(p*)·mass(dh))|`.
    pub additivity_error: f64,
    /// `max |Σψⱼ − 1|` on the verification grid.
    pub partition_error: f64,
    /// `max |Σ pieces − (f′ − f′(p*))|` on the verification grid.
    pub pointwise_error: f64,
}

/// Quadrature rule for the pipeline: `subdivisions = 0` picks one fine
/// enough to resolve the γ-scale bumps.
fn pipeline_rule(engine: Engine, gamma: f64, scale: f64) -> Result<(usize, usize)> {
    let auto = ((8.0 * scale / gamma).ceil() as usize).max(1);
    match engine {
        Engine::Exact => Ok((8, auto)),
        Engine::Quadrature { order, subdivisions } => Ok((order, if subdivisions == 0 { auto } else { subdivisions })),
        _ => Err(Error::Domain("the pipeline evaluates pieces with a fixed quadrature rule".into())),
    }
}

const VERIFY_POINTS: u128 = 200_000;

/// Flatten, cover by `γ/4`-balls, and evaluate every piece by its Calabi value.
///
/// Balls inside the flattened γ-ball carry identically zero pieces; every
/// other piece must have a displaceability certificate.
pub fn partition_and_evaluate(
    model: &QuasiStateModel,
    f: &SmoothFunction,
    gamma: f64,
    engine: Engine,
) -> Result<DecompositionReport> {
    let simplex = model
        .space
        .as_simplex()
        .ok_or_else(|| Error::Structure("the decomposition runs on a simplex".into()))?
        .clone();
    let (atom, _) = model.sigma.atom();
    let pstar = atom.coords().ok_or_else(|| Error::Structure("σ must be a point of the simplex".into()))?.to_vec();
    let flat = flatten(&simplex, f, &pstar, gamma)?;
    let fprime = flat.fprime.clone();
    let fp = fprime.value_at(&pstar)?;
    let plan = build_cover(&simplex, &pstar, gamma / 2.0)?;
    let r = plan.radius;
    let index = CoverIndex::new(&plan);

    let shifted = fprime.clone().shifted(-fp);
    let mut statuses = Vec::with_capacity(plan.balls.len());
    let mut functions = Vec::with_capacity(plan.balls.len());
    for (j, (c, _)) in plan.balls.iter().enumerate() {
        let neighbors: Vec<Vec<f64>> = plan
            .balls
            .iter()
            .enumerate()
            .filter(|&(i, (ci, _))| i != j && euclid(c, ci) < 2.0 * r)
            .map(|(_, (ci, _))| ci.clone())
            .collect();
        let psi = SmoothFunction::Partition { center: c.clone(), r, neighbors, smoothness: SMOOTHNESS };
        let piece = SmoothFunction::product(vec![psi, shifted.clone()]);
        let status = if euclid(c, &pstar) + r <= gamma {
            for x in ball_grid(&simplex, c, r) {
                if piece.value_at(&x)? != 0.0 {
                    return Err(Error::Check(format!("piece {j} near p* is not identically zero at {x:?}")));
                }
            }
            PieceStatus::NearPstar
        } else {
            let cert = displace_region(&simplex, &[(c.clone(), r)])?.ok_or(Error::MissingCertificate { index: j })?;
            PieceStatus::Certified { certificate: cert }
        };
        statuses.push(status);
        functions.push(piece);
    }

    let (order, subdivisions) = pipeline_rule(engine, gamma, simplex.scale())?;
    let rule = Engine::Quadrature { order, subdivisions };
    let nodes = quadrature_nodes(&model.dh, order, subdivisions)?;
    let values = piece_values(&plan, &index, &shifted, &nodes)?;

    let sum_of_values: f64 = values.iter().sum();
    let h = ToricHamiltonian::new(fprime.clone());
    let zeta_fprime = zeta(model, &h, rule)?;
    let calabi_fprime = calabi_value(model, &h, rule)?;
    let additivity_error = (sum_of_values - (calabi_fprime - fp * model.dh.total_mass())).abs();

    // Pointwise checks with the serialized pieces themselves.
    let n = simplex.dim();
    let mut res = 2usize;
    while binomial(2 * res as u128 + n as u128, n as u128) <= VERIFY_POINTS && res < 4096 {
        res *= 2;
    }
    let grid: Vec<Vec<f64>> = simplex_lattice(n, res)
        .into_iter()
        .map(|k| k.iter().map(|&ki| simplex.scale() * ki as f64 / res as f64).collect())
        .collect();
    let errs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|x| {
            let near = index.containing(x);
            let mut psi_sum = 0.0;
            let mut piece_sum = 0.0;
            for &b in &near {
                let SmoothFunction::Product { factors } = &functions[b] else { unreachable!() };
                psi_sum += factors[0].value_at(x)?;
                piece_sum += functions[b].value_at(x)?;
            }
            Ok(((psi_sum - 1.0).abs(), (piece_sum - shifted.value_at(x)?).abs()))
        })
        .collect::<Result<_>>()?;
    let partition_error = errs.iter().map(|e| e.0).fold(0.0, f64::max);
    let pointwise_error = errs.iter().map(|e| e.1).fold(0.0, f64::max);

    let pieces = plan
        .balls
        .iter()
        .zip(functions)
        .zip(statuses)
        .zip(values)
        .enumerate()
        .map(|(index, ((((center, radius), function), status), value))| PieceReport {
            index,
            center: center.clone(),
            radius: *radius,
            function,
            status,
            value,
        })
        .collect();
    Ok(DecompositionReport {
        gamma,
        epsilon_achieved: flat.epsilon_achieved,
        fprime_at_pstar: fp,
        quadrature_order: order,
        quadrature_subdivisions: subdivisions,
        pieces,
        sum_of_values,
        zeta_fprime,
        reconstruction_error: (sum_of_values - zeta_fprime).abs(),
        additivity_error,
        partition_error,
        pointwise_error,
    })
}

const CHUNK: usize = 4096;

/// `∫ψⱼ·g dDH` for every ball under one node set. Each node's partition
/// denominator is computed once; chunks are combined in order.
fn piece_values(
    plan: &CoverPlan,
    index: &CoverIndex<'_>,
    g: &SmoothFunction,
    nodes: &[(crate::basespace::BasePoint, f64)],
) -> Result<Vec<f64>> {
    let m = plan.balls.len();
    let partial: Vec<Vec<(usize, f64)>> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc: Vec<(usize, f64)> = Vec::new();
            for (p, w) in chunk {
                let x = p.coords().expect("simplex nodes");
                let gx = g.value_at(x)?;
                if gx == 0.0 {
                    continue;
                }
                let near = index.containing(x);
                let b: Vec<f64> = near
                    .iter()
                    .map(|&i| bump_value(&plan.balls[i].0, plan.radius, 0.0, SMOOTHNESS, x))
                    .collect();
                let den: f64 = b.iter().sum();
                if den == 0.0 {
                    return Err(Error::Check(format!("quadrature node {x:?} is not covered")));
                }
                for (&i, bi) in near.iter().zip(&b) {
                    if *bi > 0.0 {
                        acc.push((i, w * gx * bi / den));
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; m];
    for chunk in partial {
        for (i, v) in chunk {
            values[i] += v;
        }
    }
    Ok(values)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub epsilon_achieved: f64,
    pub pipeline_value: f64,
    /// `|pipeline − ζ(f)|`.
    pub error: f64,
    pub additivity_error: f64,
    pub pieces: usize,
}

/// Runs the pipeline along a γ ladder and compares with `ζ(f)` computed
/// directly (exact engine when `f` is polynomial).
pub fn gamma_sweep(model: &QuasiStateModel, f: &SmoothFunction, gammas: &[f64], engine: Engine) -> Result<Vec<SweepRow>> {
    let h = ToricHamiltonian::new(f.clone());
    let direct = match zeta(model, &h, Engine::Exact) {
        Ok(z) => z,
        Err(Error::NotPolynomial(_)) => {
            let finest = gammas.iter().copied().fold(f64::INFINITY, f64::min);
            let (order, subdivisions) = pipeline_rule(Engine::Exact, finest, 1.0)?;
            zeta(model, &h, Engine::Quadrature { order, subdivisions })?
        }
        Err(e) => return Err(e),
    };
    gammas
        .iter()
        .map(|&gamma| {
            let rep = partition_and_evaluate(model, f, gamma, engine)?;
            Ok(SweepRow {
                gamma,
                epsilon_achieved: rep.epsilon_achieved,
                pipeline_value: rep.sum_of_values,
                error: (rep.sum_of_values - direct).abs(),
                additivity_error: rep.additivity_error,
                pieces: rep.pieces.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::apply_nodes;

    fn d(n: usize) -> Simplex {
        Simplex::unit(n).unwrap()
    }

    #[test]
    fn flatten_examples() {
        let c = SmoothFunction::constant(2.0);
        let r = flatten(&d(1), &c, &[0.5], 0.05).unwrap();
        assert_eq!(r.fprime, c);
        assert_eq!(r.epsilon_achieved, 0.0);

        let p = SmoothFunction::coordinate(1, 0);
        let r = flatten(&d(1), &p, &[0.5], 0.05).unwrap();
        assert!(r.epsilon_achieved <= 0.1 + 1e-15);
        assert!(r.epsilon_achieved > 0.09);
        for x in [0.46, 0.5, 0.54] {
            assert_eq!(r.fprime.value_at(&[x]).unwrap(), 0.5);
        }
        assert_eq!(r.fprime.value_at(&[0.8]).unwrap(), 0.8);

        let sq = SmoothFunction::monomial(vec![2], 1.0);
        let a = flatten(&d(1), &sq, &[0.5], 0.1).unwrap().epsilon_achieved;
        let b = flatten(&d(1), &sq, &[0.5], 0.05).unwrap().epsilon_achieved;
        assert!(b <= 0.5 * a * 1.01, "{a} {b}");
    }

    #[test]
    fn cover_examples() {
        let plan = build_cover(&d(1), &[0.5], 0.2).unwrap();
        assert_eq!(plan.balls[0].0, vec![0.5]);
        assert!((8..=16).contains(&plan.balls.len()), "{}", plan.balls.len());
        assert!(plan.pitch <= 0.1 + 1e-15);
        for (c, r) in &plan.balls[1..] {
            assert!(euclid(c, &[0.5]) > *r);
        }

        let b = d(2).barycenter();
        let plan = build_cover(&d(2), &b, 0.2).unwrap();
        assert!(plan.pitch <= 0.2 / (2.0 * 2f64.sqrt()) + 1e-15);
        for (c, _) in &plan.balls[1..] {
            assert!(euclid(c, &b) > 0.1);
        }
        assert!(matches!(build_cover(&d(2), &b, 10.0), Err(Error::CoverUnsatisfiable(_))));
        assert!(matches!(build_cover(&d(1), &[0.5], 10.0), Err(Error::CoverUnsatisfiable(_))));
    }

    #[test]
    fn pipeline_on_linear_function() {
        let model = QuasiStateModel::projective(1).unwrap();
        let f = SmoothFunction::coordinate(1, 0);
        let rep = partition_and_evaluate(&model, &f, 0.05, Engine::Exact).unwrap();
        assert!(rep.reconstruction_error <= 1e-6);
        assert!(rep.zeta_fprime.abs() < 1e-12);
        assert!(rep.additivity_error < 1e-12);
        assert!(rep.partition_error < 1e-12);
        assert!(rep.pointwise_error < 1e-10);
    }

    #[test]
    fn pipeline_on_square() {
        let model = QuasiStateModel::projective(1).unwrap();
        let f = SmoothFunction::monomial(vec![2], 1.0);
        let rep = partition_and_evaluate(&model, &f, 0.05, Engine::Exact).unwrap();
        assert!(rep.reconstruction_error < 1e-9);
        assert!((rep.zeta_fprime - 1.0 / 12.0).abs() <= 2.0 * rep.epsilon_achieved);
        let near = rep.pieces.iter().filter(|p| p.status == PieceStatus::NearPstar).count();
        assert!(near >= 1 && near < rep.pieces.len());
    }

    #[test]
    fn pipeline_on_zero() {
        let model = QuasiStateModel::projective(1).unwrap();
        let rep = partition_and_evaluate(&model, &SmoothFunction::zero(), 0.1, Engine::Exact).unwrap();
        assert!(rep.pieces.iter().all(|p| p.value == 0.0));
        assert_eq!(rep.sum_of_values, 0.0);
        assert_eq!(rep.reconstruction_error, 0.0);
    }

    #[test]
    fn fast_path_matches_piece_functions() {
        let model = QuasiStateModel::projective(2).unwrap();
        let f = SmoothFunction::monomial(vec![1, 1], 1.0);
        let engine = Engine::Quadrature { order: 3, subdivisions: 12 };
        let rep = partition_and_evaluate(&model, &f, 0.4, engine).unwrap();
        let nodes = quadrature_nodes(&model.dh, 3, 12).unwrap();
        for p in &rep.pieces {
            let direct = apply_nodes(&model.space, &p.function, &nodes).unwrap();
            assert!((direct - p.value).abs() < 1e-13, "piece {}", p.index);
        }
        assert!(rep.additivity_error < 1e-12);
    }

    #[test]
    fn pipeline_in_two_dimensions() {
        let model = QuasiStateModel::projective(2).unwrap();
        let f = SmoothFunction::monomial(vec![2, 1], 1.0);
        let rep = partition_and_evaluate(&model, &f, 0.2, Engine::Exact).unwrap();
        assert!(rep.additivity_error < 1e-12);
        assert!(rep.partition_error < 1e-12);
        assert!(rep.pointwise_error < 1e-10);
        let exact = zeta(&model, &ToricHamiltonian::new(f), Engine::Exact).unwrap();
        assert!((rep.sum_of_values - exact).abs() <= 2.0 * rep.epsilon_achieved);
    }
}
