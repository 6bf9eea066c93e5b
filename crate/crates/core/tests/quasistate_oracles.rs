use calabi_core::basespace::{DensitySpec, EdgeSpec};
use calabi_core::decompose::{gamma_sweep, DEFAULT_GAMMAS};
use calabi_core::poly::Poly;
use calabi_core::quadrature::integrate_1d;
use calabi_core::quasistate::{
    evaluation_point, lipschitz_check, mu_delta_closed_form, mu_delta_via_pullback, special_point, tree_median, zeta,
    Convention, QuasiStateModel, ToricHamiltonian,
};
use calabi_core::symmetry::enumerate_group;
use calabi_core::{BasePoint, BaseSpace, Engine, MeasuredTree, SmoothFunction, TreePoint};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn poly_strategy(n: usize, max_deg: u32) -> impl Strategy<Value = SmoothFunction> {
    prop::collection::vec((prop::collection::vec(0..=max_deg, n), -2.0f64..2.0), 1..6).prop_map(move |terms| {
        let p = terms.into_iter().fold(Poly::zero(n), |acc, (e, c)| acc.add(&Poly::monomial(e, c)));
        SmoothFunction::from_poly(&p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeta_is_linear_and_homogeneous(
        f in poly_strategy(2, 4),
        g in poly_strategy(2, 4),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        m in -4i64..=4,
    ) {
        let model = QuasiStateModel::projective(2).unwrap();
        let z = |h: &SmoothFunction| zeta(&model, &ToricHamiltonian::new(h.clone()), Engine::Exact).unwrap();
        let lhs = z(&f.combine(a, &g, b));
        prop_assert!((lhs - (a * z(&f) + b * z(&g))).abs() < 1e-12);
        let zm = zeta(&model, &ToricHamiltonian::with_power(f.clone(), m), Engine::Exact).unwrap();
        prop_assert!((zm - m as f64 * z(&f)).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_holds(f in poly_strategy(2, 4), g in poly_strategy(2, 4)) {
        let model = QuasiStateModel::projective(2).unwrap();
        let r = lipschitz_check(&model, &ToricHamiltonian::new(f), &ToricHamiltonian::new(g), Engine::Exact).unwrap();
        prop_assert!(r.ok, "{r:?}");
    }

    #[test]
    fn monotone_vanishing(c in prop::collection::vec(0.05f64..0.9, 2), r in 0.01f64..0.1) {
        // f̄ vanishing at the barycenter region: ζ = Calabi value.
        let model = QuasiStateModel::projective(2).unwrap();
        let b = 1.0 / 3.0;
        prop_assume!(((c[0] - b).powi(2) + (c[1] - b).powi(2)).sqrt() > r);
        let f = SmoothFunction::bump(c, r);
        let h = ToricHamiltonian::new(f);
        let e = calabi_core::quasistate::evaluate(&model, &h, Engine::Quadrature { order: 4, subdivisions: 8 }).unwrap();
        prop_assert_eq!(e.sigma, 0.0);
        prop_assert_eq!(e.zeta, e.calabi);
    }
}

#[test]
fn linear_functions_vanish() {
    for n in 1..=5 {
        let model = QuasiStateModel::projective(n).unwrap();
        for i in 0..n {
            let f = SmoothFunction::coordinate(n, i).scaled(1.0 + i as f64).shifted(0.25);
            let z = zeta(&model, &ToricHamiltonian::new(f), Engine::Exact).unwrap();
            assert!(z.abs() < 1e-12, "n={n} i={i}: {z}");
        }
    }
}

#[test]
fn special_point_is_symmetric() {
    for n in 1..=4 {
        let space = BaseSpace::simplex(n, 1.0).unwrap();
        let s = space.as_simplex().unwrap();
        let BasePoint::Coords(p) = special_point(&space).unwrap() else { panic!() };
        for g in enumerate_group(s).unwrap() {
            let q = g.apply(s, &p);
            assert!(q.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-15));
        }
    }
}

/// Masses of the components of `T ∖ {x}`, by walking the tree from scratch.
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

fn random_tree(seed: u64) -> MeasuredTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
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
    MeasuredTree::from_edges(&specs).unwrap()
}

#[test]
fn median_matches_brute_force_scan() {
    let pitch = 1e-3;
    for seed in 0..10 {
        let tree = random_tree(seed);
        let total = tree.total_mass();
        let m = tree_median(&tree);
        let worst = component_masses(&tree, &m.point).into_iter().fold(0.0, f64::max);
        assert!(worst <= total / 2.0 + 1e-12, "seed {seed}: {worst} > {}", total / 2.0);

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
        let d = tree.distance(&best.1, &m.point).unwrap();
        assert!(d <= pitch + m.spread / 2.0 + 1e-9, "seed {seed}: scan optimum {:?} is {d} away", best.1);
    }
}

fn bump(c: f64, r: f64) -> SmoothFunction {
    SmoothFunction::bump(vec![c], r)
}

#[test]
fn two_paths_agree_on_a_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        for delta in [1.0, 0.97, 0.94] {
            for _ in 0..5 {
                let x = evaluation_point(n, delta);
                let c = if rng.random_bool(0.5) { x + rng.random_range(-0.05..0.05) } else { rng.random_range(0.1..0.9) };
                let r = rng.random_range(0.02..0.1f64).min(0.99 - c);
                let f = bump(c, r).scaled(rng.random_range(0.5..2.0));
                let closed = mu_delta_closed_form(n, delta, &f, Convention::Derived).unwrap();
                let path = mu_delta_via_pullback(n, delta, &f).unwrap();
                assert!((closed - path).abs() <= 1e-9, "n={n} δ={delta}: {closed} vs {path}");
            }
        }
    }
}

/// `ϑ_δ(w) = [√(1 − δπ|w|²) : √(δπ) w]` on the capacity-1 ball, checked by
/// sampling CP¹ through the unit sphere in ℂ², which carries the
/// normalized Fubini–Study volume.
#[test]
fn pullback_exponent_from_first_principles() {
    let (n, delta) = (1usize, 0.9f64);
    let x = evaluation_point(n, delta);
    let profile = bump(x, 0.2);
    let pi = std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // Φ(ϑ_δ(w)) = πδ|w|² in homogeneous coordinates.
    for _ in 0..100 {
        let r = (rng.random::<f64>() / pi).sqrt();
        let t = rng.random::<f64>() * 2.0 * pi;
        let w = (r * t.cos(), r * t.sin());
        let w2 = w.0 * w.0 + w.1 * w.1;
        let z0 = (1.0 - delta * pi * w2).sqrt();
        let z1 = ((delta * pi).sqrt() * w.0, (delta * pi).sqrt() * w.1);
        let norm2 = z0 * z0 + z1.0 * z1.0 + z1.1 * z1.1;
        let phi = (z1.0 * z1.0 + z1.1 * z1.1) / norm2;
        assert!((phi - pi * delta * w2).abs() < 1e-15);
    }

    // H = δ F∘ϑ⁻¹ on the image, sampled on S³ ⊂ ℂ².
    let samples = 2_000_000;
    let (mut sum, mut sum2, mut inside) = (0.0, 0.0, 0usize);
    for _ in 0..samples {
        let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm2: f64 = g.iter().map(|v| v * v).sum();
        let z1sq = (g[2] * g[2] + g[3] * g[3]) / norm2;
        let h = if z1sq <= delta {
            inside += 1;
            delta * profile.profile_at(z1sq / delta).unwrap()
        } else {
            0.0
        };
        sum += h;
        sum2 += h * h;
    }
    let mean = sum / samples as f64;
    let se = ((sum2 / samples as f64 - mean * mean) / samples as f64).sqrt();
    // the image of the ball has volume δⁿ
    let frac = inside as f64 / samples as f64;
    assert!((frac - delta).abs() < 4.0 * (delta * (1.0 - delta) / samples as f64).sqrt());

    // On CP¹, μ(φ_H) = ∫H − H(Clifford); |z₁|² = 1/2 at the Clifford torus.
    let h_clif = delta * profile.profile_at(0.5 / delta).unwrap();
    let mu_h = mean - h_clif;
    let ball = integrate_1d(|s| profile.profile_at(s), 0.0, 1.0, &profile.breakpoints_1d(), 8, 16).unwrap();

    // ∫H ω = δⁿ⁺¹ ∫F ω_B
    assert!((mean - delta.powi(2) * ball).abs() < 4.0 * se);
    let scaled = mu_h * delta.powi(-(n as i32) - 1);
    let derived = mu_delta_closed_form(n, delta, &profile, Convention::Derived).unwrap();
    let paper = mu_delta_closed_form(n, delta, &profile, Convention::Paper).unwrap();
    let tol = 4.0 * se * delta.powi(-2);
    assert!((scaled - derived).abs() < tol, "{scaled} vs derived {derived}");
    assert!((scaled - paper).abs() > 10.0 * tol, "{scaled} vs paper {paper}");
}

#[test]
fn stabilization_on_segment_times_interval() {
    let seg = MeasuredTree::from_edges(&[EdgeSpec::uniform("a", "b", 1.0, 1.0)]).unwrap();
    let d1 = BaseSpace::simplex(1, 1.0).unwrap();
    let space = BaseSpace::product(vec![BaseSpace::Tree(seg), d1]).unwrap();
    let model = QuasiStateModel::standard(&space).unwrap();
    let x = SmoothFunction::factor(0, SmoothFunction::edge(0, SmoothFunction::monomial(vec![1], 1.0)));
    let p = SmoothFunction::factor(1, SmoothFunction::coordinate(1, 0));
    let f = SmoothFunction::product(vec![x, p]);
    let z = zeta(&model, &ToricHamiltonian::new(f), Engine::Exact).unwrap();
    assert!((z - (0.25 - 0.25)).abs() < 1e-12);
}

#[test]
fn sweep_converges() {
    let model = QuasiStateModel::projective(1).unwrap();
    let f = SmoothFunction::monomial(vec![2], 1.0);
    let rows = gamma_sweep(&model, &f, &DEFAULT_GAMMAS, Engine::Exact).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].error <= w[0].error + 1e-12);
    }
    for r in &rows {
        assert!(r.error <= 2.0 * r.epsilon_achieved, "{r:?}");
        assert!(r.additivity_error <= 1e-12);
    }
}
