//! The acceptance suite, shared by `calabi selftest` and the acceptance test target.

use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use calabi_core::basespace::{DensitySpec, EdgeSpec};
use calabi_core::decompose::{gamma_sweep, DEFAULT_GAMMAS};
use calabi_core::funcspace::Smoothness;
use calabi_core::measure::{integrate_exact, integrate_monte_carlo, PushforwardMeasure};
use calabi_core::poly::Poly;
use calabi_core::quasistate::{
    calabi_property_check, evaluation_point, independence_certificate, lipschitz_check, mu_delta_closed_form,
    mu_delta_via_pullback, special_point, tree_median, zeta,
};
use calabi_core::symmetry::{
    displace_point, displace_region, enumerate_group, fixed_locus, region_separation, DisplaceabilityCertificate,
    FixedLocus,
};
use calabi_core::{
    BasePoint, BaseSpace, Convention, Engine, Error as CoreError, MeasuredTree, QuasiStateModel, Simplex,
    SmoothFunction, ToricHamiltonian, TreePoint,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numfmt::short;

#[derive(Clone, Copy, Debug, Default)]
pub struct CheckOptions {
    /// Convention used by the two-path comparison.
    pub convention: Convention,
    /// Replace the Dirichlet denominator `(n+|a|)!` by `(n+|a|+1)!` in the
    /// oracle triangle's exact leg.
    pub tamper_dirichlet: bool,
}

pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

pub struct Criterion {
    pub name: &'static str,
    pub budget: Option<Duration>,
    run: fn(&CheckOptions) -> Result<Verdict>,
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let budget = self.budget.map_or(String::new(), |b| format!(" / {}s", b.as_secs()));
        format!(
            "{} {:<18} [{:.3}s{budget}] {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

pub fn criteria() -> Vec<Criterion> {
    let secs = |s| Some(Duration::from_secs(s));
    vec![
        Criterion { name: "theorem-values", budget: secs(1), run: theorem_values },
        Criterion { name: "oracle-triangle", budget: secs(60), run: oracle_triangle },
        Criterion { name: "independence", budget: secs(5), run: independence },
        Criterion { name: "two-path", budget: secs(10), run: two_path },
        Criterion { name: "fixed-locus", budget: secs(5), run: fixed_point_lemma },
        Criterion { name: "pipeline", budget: secs(30), run: pipeline },
        Criterion { name: "calabi-property", budget: None, run: calabi_property },
        Criterion { name: "examples", budget: None, run: examples },
        Criterion { name: "lipschitz", budget: None, run: lipschitz },
        Criterion { name: "linearity", budget: None, run: linearity },
    ]
}

/// Errors count as failures; so does overrunning the budget.
pub fn run_check(c: &Criterion, opts: &CheckOptions) -> CheckOutcome {
    let start = Instant::now();
    let verdict = (c.run)(opts).unwrap_or_else(|e| Verdict::new(false, format!("error: {e:#}")));
    let elapsed = start.elapsed();
    let mut passed = verdict.passed;
    let mut detail = verdict.detail;
    if let Some(b) = c.budget {
        if elapsed > b {
            passed = false;
            detail += &format!("; over budget ({:.1}s)", elapsed.as_secs_f64());
        }
    }
    CheckOutcome { name: c.name, passed, detail, elapsed, budget: c.budget }
}

pub fn run_all(opts: &CheckOptions) -> Vec<CheckOutcome> {
    criteria().iter().map(|c| run_check(c, opts)).collect()
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_deg: u32) -> Poly {
    loop {
        let terms = rng.random_range(1..=5);
        let mut p = Poly::zero(n);
        for _ in 0..terms {
            let deg = rng.random_range(0..=max_deg);
            let mut exps = vec![0u32; n];
            for _ in 0..deg {
                exps[rng.random_range(0..n)] += 1;
            }
            p = p.add(&Poly::monomial(exps, rng.random_range(-1.0..1.0)));
        }
        if p.degree() > 0 {
            return p;
        }
    }
}

fn exact(n: usize, f: &SmoothFunction) -> Result<f64> {
    Ok(integrate_exact(&cp(n)?, f)?)
}

fn cp(n: usize) -> Result<PushforwardMeasure> {
    Ok(PushforwardMeasure::duistermaat_heckman(&BaseSpace::simplex(n, 1.0)?))
}

fn theorem_values(_: &CheckOptions) -> Result<Verdict> {
    let h = |f| ToricHamiltonian::new(f);
    let z1 = zeta(&QuasiStateModel::projective(1)?, &h(SmoothFunction::monomial(vec![2], 1.0)), Engine::Exact)?;
    let z2 = zeta(&QuasiStateModel::projective(2)?, &h(SmoothFunction::monomial(vec![1, 1], 1.0)), Engine::Exact)?;
    let e1 = (z1 - 1.0 / 12.0).abs();
    let e2 = (z2 + 1.0 / 36.0).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst_linear: f64 = 0.0;
    for n in 1..=5 {
        let model = QuasiStateModel::projective(n)?;
        let mut fs: Vec<SmoothFunction> = (0..n).map(|i| SmoothFunction::coordinate(n, i)).collect();
        for _ in 0..10 {
            let mut p = Poly::constant(n, rng.random_range(-2.0..2.0));
            for i in 0..n {
                let mut e = vec![0; n];
                e[i] = 1;
                p = p.add(&Poly::monomial(e, rng.random_range(-2.0..2.0)));
            }
            fs.push(SmoothFunction::from_poly(&p));
        }
        for f in fs {
            worst_linear = worst_linear.max(zeta(&model, &h(f), Engine::Exact)?.abs());
        }
    }
    Ok(Verdict::new(
        e1 <= 1e-12 && e2 <= 1e-12 && worst_linear <= 1e-12,
        format!("|p²−1/12| = {e1:.1e}, |p₁p₂+1/36| = {e2:.1e}, max linear |ζ| = {worst_linear:.1e}"),
    ))
}

/// `n! Π aᵢ! / (n+|a|)!` from scratch, optionally with a corrupted denominator.
fn dirichlet_oracle(p: &Poly, tamper: bool) -> f64 {
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    let n = p.nvars() as u32;
    p.terms()
        .map(|(exps, c)| {
            let deg: u32 = exps.iter().sum();
            let den = if tamper { n + deg + 1 } else { n + deg };
            c * fact(n) * exps.iter().map(|&a| fact(a)).product::<f64>() / fact(den)
        })
        .sum()
}

fn oracle_triangle(opts: &CheckOptions) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let (mut worst_core, mut worst_quad, mut worst_z): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut failures = Vec::new();
    for case in 0..50 {
        let n = rng.random_range(1..=4);
        let p = random_poly(&mut rng, n, 6);
        let f = SmoothFunction::from_poly(&p);
        let m = cp(n)?;
        let oracle = dirichlet_oracle(&p, opts.tamper_dirichlet);
        let core = integrate_exact(&m, &f)?;
        let quad = calabi_core::measure::integrate(&m, &f, Engine::Quadrature { order: 4, subdivisions: 1 })?;
        let mc = integrate_monte_carlo(&m, &f, 1_000_000, 1000 + case)?;
        let dc = (core - oracle).abs();
        let dq = (quad - oracle).abs();
        let z = (mc.estimate - oracle).abs() / mc.standard_error;
        worst_core = worst_core.max(dc);
        worst_quad = worst_quad.max(dq);
        worst_z = worst_z.max(z);
        if dc > 1e-12 || dq > 1e-9 || !(z <= 4.0) {
            failures.push(case);
        }
    }
    let detail = format!(
        "max |engine−oracle| = {worst_core:.1e}, max |quad−exact| = {worst_quad:.1e}, max MC deviation = {}σ",
        short(worst_z)
    );
    if failures.is_empty() {
        Ok(Verdict::new(true, detail))
    } else {
        Ok(Verdict::new(false, format!("oracle disagreement in cases {failures:?}; {detail}")))
    }
}

fn matched_bumps(n: usize, deltas: &[f64], r: f64) -> Vec<SmoothFunction> {
    deltas.iter().map(|&d| SmoothFunction::bump(vec![evaluation_point(n, d)], r)).collect()
}

fn independence(_: &CheckOptions) -> Result<Verdict> {
    let deltas = [1.0, 0.95, 0.9];
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [1, 2] {
        for conv in [Convention::Derived, Convention::Paper] {
            let cert = independence_certificate(n, &deltas, &matched_bumps(n, &deltas, 0.01), conv)?;
            let ratio = cert.min_singular_value / cert.singular_values[0];
            ok &= cert.rank == 3 && ratio > 0.1;
            parts.push(format!("n={n} {conv:?}: rank {} ratio {}", cert.rank, short(ratio)));
        }
    }
    Ok(Verdict::new(ok, parts.join(", ")))
}

/// Five profiles supported in `[0, 1)`, some of them live at the evaluation point.
fn two_path_profiles(rng: &mut ChaCha8Rng, x: f64) -> Vec<SmoothFunction> {
    let near = |rng: &mut ChaCha8Rng| x + rng.random_range(-0.04..0.04);
    let radius = |rng: &mut ChaCha8Rng, c: f64| rng.random_range(0.05..0.1f64).min(0.99 - c);
    let c0 = near(rng);
    let c1 = near(rng);
    let c2 = rng.random_range(0.1..0.9);
    let c3 = near(rng);
    let (r0, r1, r2, r3) = (radius(rng, c0), radius(rng, c1), radius(rng, c2), radius(rng, c3));
    vec![
        SmoothFunction::bump(vec![c0], r0).scaled(rng.random_range(0.5..2.0)),
        SmoothFunction::plateau_bump(vec![c1], r1 / 2.0, r1, Smoothness::Cinf),
        SmoothFunction::bump(vec![c2], r2),
        SmoothFunction::window(0.0, 1.0, SmoothFunction::from_poly(&Poly::monomial(vec![1], 1.0))),
        SmoothFunction::sum(vec![
            SmoothFunction::bump(vec![c3], r3),
            SmoothFunction::plateau_bump(vec![0.3], 0.05, 0.2, Smoothness::C2).scaled(-0.7),
        ]),
    ]
}

fn two_path(opts: &CheckOptions) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(1618);
    let mut worst = (0.0f64, 0usize, 1.0f64);
    let mut worst_conv: f64 = 0.0;
    for n in 1..=3 {
        for delta in [1.0, 0.97, 0.94] {
            for f in two_path_profiles(&mut rng, evaluation_point(n, delta)) {
                let path = mu_delta_via_pullback(n, delta, &f)?;
                let closed = mu_delta_closed_form(n, delta, &f, opts.convention)?;
                let d = (path - closed).abs();
                if d > worst.0 {
                    worst = (d, n, delta);
                }
                if delta == 1.0 {
                    let paper = mu_delta_closed_form(n, 1.0, &f, Convention::Paper)?;
                    let derived = mu_delta_closed_form(n, 1.0, &f, Convention::Derived)?;
                    worst_conv = worst_conv.max((paper - derived).abs());
                }
            }
        }
    }
    let (d, n, delta) = worst;
    let detail = format!(
        "{:?} convention: max |pullback − closed form| = {d:.2e} (n={n}, δ={delta}); conventions at δ=1 differ by {worst_conv:.1e}",
        opts.convention
    );
    Ok(Verdict::new(d <= 1e-9 && worst_conv <= 1e-12, detail))
}

/// Uniform point of the unit simplex.
fn simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut prev = 0.0;
    cuts.iter()
        .map(|&c| {
            let d = c - prev;
            prev = c;
            d
        })
        .collect()
}

fn fixed_point_lemma(_: &CheckOptions) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(577);
    for n in 1..=5usize {
        let s = Simplex::unit(n)?;
        let expected = vec![Ratio::new(1, n as i64 + 1); n];
        match fixed_locus(&s) {
            FixedLocus::Affine { point, directions } if directions.is_empty() && point == expected => {}
            other => return Ok(Verdict::new(false, format!("n={n}: fixed locus {other:?}"))),
        }
        let bary = s.barycenter();
        ensure!(displace_point(&s, &bary)?.is_none(), "n={n}: the barycenter was displaced");
        for _ in 0..1000 {
            let p = simplex_point(&mut rng, n);
            if p == bary {
                continue;
            }
            let Some(cert) = displace_point(&s, &p)? else {
                return Ok(Verdict::new(false, format!("n={n}: no certificate at {p:?}")));
            };
            ensure!(cert.symmetry.apply(&s, &p) != p, "n={n}: certificate fixes {p:?}");
        }
    }
    Ok(Verdict::new(true, "exact fixed locus is the barycenter for n ≤ 5; 5000 random points displaced"))
}

fn pipeline(_: &CheckOptions) -> Result<Verdict> {
    let model = QuasiStateModel::projective(1)?;
    let rows = gamma_sweep(&model, &SmoothFunction::monomial(vec![2], 1.0), &DEFAULT_GAMMAS, Engine::Exact)?;
    let mut ok = true;
    for w in rows.windows(2) {
        ok &= w[1].error <= w[0].error + 1e-12;
    }
    let mut parts = Vec::new();
    for r in &rows {
        ok &= r.error <= 2.0 * r.epsilon_achieved && r.additivity_error <= 1e-12;
        parts.push(format!("γ={}: err {:.1e} ≤ 2·{:.1e}", r.gamma, r.error, r.epsilon_achieved));
    }
    let last = rows.last().context("empty sweep")?;
    parts.push(format!("value {}", short(last.pipeline_value)));
    Ok(Verdict::new(ok, parts.join(", ")))
}

fn calabi_property(_: &CheckOptions) -> Result<Verdict> {
    let model = QuasiStateModel::projective(2)?;
    let s = Simplex::unit(2)?;
    let bary = s.barycenter();
    let engine = Engine::Quadrature { order: 4, subdivisions: 8 };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut certified, mut skipped) = (0, 0);
    while certified < 20 {
        ensure!(skipped < 1000, "could not find 20 displaceable balls");
        let c = simplex_point(&mut rng, 2);
        let r = rng.random_range(0.02..0.08);
        let d = ((c[0] - bary[0]).powi(2) + (c[1] - bary[1]).powi(2)).sqrt();
        if d <= r {
            continue;
        }
        let Some(cert) = displace_region(&s, &[(c.clone(), r)])? else {
            skipped += 1;
            continue;
        };
        let h = ToricHamiltonian::new(SmoothFunction::bump(c.clone(), r));
        if !calabi_property_check(&model, &h, &cert, engine)? {
            return Ok(Verdict::new(false, format!("ζ ≠ Calabi for the bump at {c:?}, r={r}")));
        }
        certified += 1;
    }

    let ball = vec![(bary.clone(), 0.05)];
    ensure!(displace_region(&s, &ball)?.is_none(), "the barycentric ball was displaced");
    let h = ToricHamiltonian::new(SmoothFunction::bump(bary.clone(), 0.05));
    let group = enumerate_group(&s)?;
    for g in &group {
        ensure!(region_separation(&s, g, &ball).is_none(), "{g} separates the barycentric ball");
        let cert = DisplaceabilityCertificate { symmetry: g.clone(), separation: 0.0, images: vec![] };
        match calabi_property_check(&model, &h, &cert, engine) {
            Err(CoreError::InvalidCertificate(_)) => {}
            other => return Ok(Verdict::new(false, format!("{g} accepted at the barycenter: {other:?}"))),
        }
    }
    Ok(Verdict::new(
        true,
        format!("20 certified bumps pass ({skipped} uncertified draws); all {} elements of S₃ rejected at the barycenter", group.len()),
    ))
}

fn component_masses(tree: &MeasuredTree, x: &TreePoint) -> Vec<f64> {
    let edges = tree.edges();
    let branch = |start: usize, skip: usize| -> f64 {
        let mut stack = vec![(start, skip)];
        let mut total = 0.0;
        while let Some((v, from)) = stack.pop() {
            for &e in tree.incident(v) {
                if e != from {
                    total += edges[e].density.mass();
                    stack.push((tree.other_end(e, v), e));
                }
            }
        }
        total
    };
    match *x {
        TreePoint::Vertex(v) => tree
            .incident(v)
            .iter()
            .map(|&e| edges[e].density.mass() + branch(tree.other_end(e, v), e))
            .collect(),
        TreePoint::Edge { edge, offset } => {
            let e = &edges[edge];
            let below = e.density.cumulative(offset);
            vec![below + branch(e.u, edge), e.density.mass() - below + branch(e.v, edge)]
        }
    }
}

fn random_tree(rng: &mut ChaCha8Rng) -> Result<MeasuredTree> {
    let edges = rng.random_range(1..=6);
    let specs: Vec<EdgeSpec> = (1..=edges)
        .map(|i| {
            let parent = rng.random_range(0..i);
            let len = rng.random_range(0.3..2.0);
            let density = if rng.random_bool(0.3) {
                let cut = rng.random_range(0.1..0.9) * len;
                DensitySpec::Pieces(vec![(cut, rng.random_range(0.0..2.0)), (len - cut, rng.random_range(0.1..2.0))])
            } else {
                DensitySpec::Constant(rng.random_range(0.1..2.0))
            };
            EdgeSpec { u: format!("v{parent}"), v: format!("v{i}"), len, density }
        })
        .collect();
    Ok(MeasuredTree::from_edges(&specs)?)
}

fn examples(_: &CheckOptions) -> Result<Verdict> {
    let d1 = BaseSpace::simplex(1, 1.0)?;
    let square = BaseSpace::product(vec![d1.clone(), d1.clone()])?;
    let half = BasePoint::Coords(vec![0.5]);
    if special_point(&square)? != BasePoint::Tuple(vec![half.clone(), half]) {
        return Ok(Verdict::new(false, "special point of Δ₁×Δ₁ is not ((1/2),(1/2))"));
    }

    let star = MeasuredTree::from_edges(&[
        EdgeSpec::uniform("c", "a", 1.0, 0.5),
        EdgeSpec::uniform("c", "b", 1.0, 0.3),
        EdgeSpec::uniform("c", "d", 1.0, 0.2),
    ])?;
    let m = tree_median(&star);
    if m.point != TreePoint::Vertex(star.vertex_id("c").context("vertex c")?) || !m.unique {
        return Ok(Verdict::new(false, format!("star median {m:?}")));
    }

    let pitch = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(141);
    let mut worst_gap: f64 = 0.0;
    for seed in 0..10 {
        let tree = random_tree(&mut rng)?;
        let m = tree_median(&tree);
        let half = tree.total_mass() / 2.0;
        let heaviest = component_masses(&tree, &m.point).into_iter().fold(0.0, f64::max);
        if heaviest > half + 1e-12 {
            return Ok(Verdict::new(false, format!("tree {seed}: component of mass {heaviest} > {half}")));
        }
        let mut best = (f64::INFINITY, TreePoint::Vertex(0));
        for (e, edge) in tree.edges().iter().enumerate() {
            let steps = (edge.len / pitch).ceil() as usize;
            for k in 0..=steps {
                let x = TreePoint::Edge { edge: e, offset: edge.len * k as f64 / steps as f64 };
                let w = component_masses(&tree, &x).into_iter().fold(0.0, f64::max);
                if w < best.0 {
                    best = (w, x);
                }
            }
        }
        let gap = tree.distance(&best.1, &m.point)? - m.spread / 2.0;
        worst_gap = worst_gap.max(gap);
        if gap > pitch + 1e-9 {
            return Ok(Verdict::new(false, format!("tree {seed}: scan optimum {:?} is {gap} from the median set", best.1)));
        }
    }

    let seg = MeasuredTree::from_edges(&[EdgeSpec::uniform("a", "b", 1.0, 1.0)])?;
    let space = BaseSpace::product(vec![BaseSpace::Tree(seg), d1])?;
    let model = QuasiStateModel::standard(&space)?;
    let x = SmoothFunction::factor(0, SmoothFunction::edge(0, SmoothFunction::monomial(vec![1], 1.0)));
    let p = SmoothFunction::factor(1, SmoothFunction::coordinate(1, 0));
    let z = zeta(&model, &ToricHamiltonian::new(SmoothFunction::product(vec![x, p])), Engine::Exact)?;
    // ∫₀¹ x dx · ∫₀¹ p dp − (1/2)(1/2)
    let expected = 0.5 * 0.5 - 0.5 * 0.5;
    let err = (z - expected).abs();
    Ok(Verdict::new(
        err <= 1e-12,
        format!("star median at c; scan within {:.1e} of the median set; stabilization error {err:.1e}", worst_gap.max(0.0)),
    ))
}

fn lipschitz(_: &CheckOptions) -> Result<Verdict> {
    let model = QuasiStateModel::projective(2)?;
    let k = model.dh.total_mass() + model.sigma.total_mass();
    ensure!((k - 2.0).abs() < 1e-15, "Lipschitz constant {k} ≠ 2");
    let mut rng = ChaCha8Rng::seed_from_u64(1414);
    let mut worst_slack = f64::INFINITY;
    for case in 0..100 {
        let f = SmoothFunction::from_poly(&random_poly(&mut rng, 2, 4));
        let g = SmoothFunction::from_poly(&random_poly(&mut rng, 2, 4));
        let res = lipschitz_check(&model, &ToricHamiltonian::new(f), &ToricHamiltonian::new(g), Engine::Exact)?;
        if !res.ok || res.lhs > res.bound + 1e-9 {
            return Ok(Verdict::new(false, format!("case {case}: {} > {}", res.lhs, res.bound)));
        }
        worst_slack = worst_slack.min(res.bound - res.lhs);
    }
    Ok(Verdict::new(true, format!("100 pairs, smallest slack {}", short(worst_slack))))
}

fn linearity(_: &CheckOptions) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(2236);
    let (mut worst_lin, mut worst_pow): (f64, f64) = (0.0, 0.0);
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let model = QuasiStateModel::projective(n)?;
        let f = SmoothFunction::from_poly(&random_poly(&mut rng, n, 5));
        let g = SmoothFunction::from_poly(&random_poly(&mut rng, n, 5));
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let m = rng.random_range(-4..=4i64);
        let z = |f: &SmoothFunction, m: i64| zeta(&model, &ToricHamiltonian::with_power(f.clone(), m), Engine::Exact);
        let (zf, zg) = (z(&f, 1)?, z(&g, 1)?);
        worst_lin = worst_lin.max((z(&f.combine(a, &g, b), 1)? - (a * zf + b * zg)).abs());
        worst_pow = worst_pow.max((z(&f, m)? - m as f64 * zf).abs());
        // the exact engine agrees with the hand-rolled Dirichlet sum
        let p = f.to_poly(n)?;
        ensure!((exact(n, &f)? - dirichlet_oracle(&p, false)).abs() <= 1e-12, "exact engine drifted");
    }
    Ok(Verdict::new(
        worst_lin <= 1e-12 && worst_pow <= 1e-12,
        format!("200 cases, max linearity defect {worst_lin:.1e}, max power defect {worst_pow:.1e}"),
    ))
}
