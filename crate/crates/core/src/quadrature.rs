//! Deterministic quadrature rules: Gauss–Legendre on intervals, the
//! Grundmann–Möller family and collapsed (conical product) Gauss rules on
//! the unit simplex, and composite rules over a Kuhn subdivision.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(points >= 1);
    let n = points;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-type initial guess, then Newton on Pₙ.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            x = 0.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre integral of `g` over `[a, b]`, split at the
/// given breakpoints and then into `panels` equal pieces per smooth piece.
pub fn integrate_1d<G>(g: G, a: f64, b: f64, breakpoints: &[f64], panels: usize, points: usize) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    if !(b > a) {
        return Ok(0.0);
    }
    let (xs, ws) = gauss_legendre(points);
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let panels = panels.max(1);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for k in 0..panels {
            let lo = w[0] + h * k as f64;
            let mut part = 0.0;
            for (x, wt) in xs.iter().zip(&ws) {
                part += wt * g(lo + h * x)?;
            }
            total += h * part;
        }
    }
    Ok(total)
}

/// A rule on the unit simplex `{ x ≥ 0, Σx ≤ 1 }` against Lebesgue measure
/// (weights sum to `1/n!`).
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All `β ∈ ℕᵏ` with `|β| = total`.
fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; parts];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

impl SimplexRule {
    /// Grundmann–Möller rule of index `s`, exact for polynomials of degree `2s + 1`.
    ///
    /// Weights alternate in sign; keep `s` moderate.
    pub fn grundmann_moller(dim: usize, s: usize) -> Self {
        let n = dim;
        let d = 2 * s + 1;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for i in 0..=s {
            let denom = (d + n - 2 * i) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * 2f64.powi(-(2 * s as i32)) * denom.powi(d as i32) / (factorial(i) * factorial(d + n - i));
            for beta in compositions(n + 1, s - i) {
                let bary: Vec<f64> = beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect();
                nodes.push(bary[1..].to_vec());
                weights.push(w);
            }
        }
        Self { dim, nodes, weights }
    }

    /// Collapsed-coordinate Gauss rule with at least `points` nodes per axis,
    /// exact for total degree `2·points − 1`. Axis `k` carries the Jacobian
    /// factor `(1−u)^{dim−1−k}` and gets extra nodes to absorb it.
    pub fn conical(dim: usize, points: usize) -> Self {
        let axes: Vec<(Vec<f64>, Vec<f64>)> =
            (0..dim).map(|k| gauss_legendre(points + (dim - 1 - k).div_ceil(2))).collect();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; dim];
        loop {
            let mut p = vec![0.0; dim];
            let mut rest = 1.0;
            let mut w = 1.0;
            for k in 0..dim {
                let (xs, ws) = &axes[k];
                let u = xs[idx[k]];
                p[k] = rest * u;
                w *= ws[idx[k]] * rest;
                rest *= 1.0 - u;
            }
            nodes.push(p);
            weights.push(w);
            // odometer
            let mut k = 0;
            loop {
                if k == dim {
                    return Self { dim, nodes, weights };
                }
                idx[k] += 1;
                if idx[k] < axes[k].0.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Composite rule: `base` applied on each of the `m^dim` simplices of the
    /// Kuhn subdivision of the unit simplex.
    pub fn composite(base: &SimplexRule, m: usize) -> Self {
        let n = base.dim;
        if m <= 1 {
            return base.clone();
        }
        let perms = permutations(n);
        let scale = 1.0 / m as f64;
        let jac = scale.powi(n as i32);
        let mut nodes = Vec::with_capacity(base.nodes.len() * m.pow(n as u32));
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut k = vec![0usize; n];
        loop {
            if k.windows(2).all(|w| w[0] >= w[1]) {
                for sigma in &perms {
                    // z_i ≥ z_{i+1} must hold wherever k_i = k_{i+1}
                    let mut pos = vec![0; n];
                    for (j, &c) in sigma.iter().enumerate() {
                        pos[c] = j;
                    }
                    if (0..n.saturating_sub(1)).any(|i| k[i] == k[i + 1] && pos[i] > pos[i + 1]) {
                        continue;
                    }
                    // Kuhn vertices in y-space, then base nodes mapped affinely.
                    for (node, &w) in base.nodes.iter().zip(&base.weights) {
                        let mut y: Vec<f64> = k.iter().map(|&ki| ki as f64 * scale).collect();
                        // barycentric weight of vertex j (j ≥ 1) is node[j-1];
                        // vertex j = v0 + Σ_{l<j} e_{σ(l)}/m, so coordinate σ(l)
                        // picks up the mass of vertices j > l.
                        let mut tail: f64 = node.iter().sum();
                        for (l, &c) in sigma.iter().enumerate() {
                            y[c] += scale * tail;
                            tail -= node[l];
                        }
                        let p: Vec<f64> = (0..n).map(|i| y[i] - if i + 1 < n { y[i + 1] } else { 0.0 }).collect();
                        nodes.push(p);
                        weights.push(w * jac);
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    return Self { dim: n, nodes, weights };
                }
                k[i] += 1;
                if k[i] < m {
                    break;
                }
                k[i] = 0;
                i += 1;
            }
        }
    }

    pub fn apply<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        if !next_permutation(&mut cur) {
            return out;
        }
    }
}

/// Advances to the lexicographically next permutation; false after the last.
pub fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::Domain("quadrature order must be at least 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫_{Δₙ} x^a = Π aᵢ! / (n + |a|)!
    fn dirichlet(a: &[u32]) -> f64 {
        let num: f64 = a.iter().map(|&k| factorial(k as usize)).product();
        num / factorial(a.len() + a.iter().sum::<u32>() as usize)
    }

    fn mono(a: &[u32]) -> impl Fn(&[f64]) -> Result<f64> + '_ {
        move |x| Ok(a.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product())
    }

    #[test]
    fn gauss_legendre_exactness() {
        for m in 1..12 {
            let (x, w) = gauss_legendre(m);
            for k in 0..2 * m {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((q - 1.0 / (k + 1) as f64).abs() < 1e-14, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn grundmann_moller_exactness() {
        for n in 1..=4 {
            for s in 0..=4 {
                let rule = SimplexRule::grundmann_moller(n, s);
                let total: f64 = rule.weights.iter().sum();
                assert!((total - 1.0 / factorial(n)).abs() < 1e-13);
                for a in [vec![1u32; n], vec![2; n], {
                    let mut v = vec![0; n];
                    v[0] = (2 * s + 1) as u32;
                    v
                }] {
                    if a.iter().sum::<u32>() as usize > 2 * s + 1 {
                        continue;
                    }
                    let q = rule.apply(mono(&a)).unwrap();
                    assert!((q - dirichlet(&a)).abs() < 1e-12 * (1.0 + dirichlet(&a)), "n={n} s={s} a={a:?}");
                }
            }
        }
    }

    #[test]
    fn conical_exactness() {
        for n in 1..=4 {
            let rule = SimplexRule::conical(n, 5);
            for a in [vec![0u32; n], vec![1; n], {
                let mut v = vec![0; n];
                v[n - 1] = (10 - n) as u32;
                v
            }] {
                let q = rule.apply(mono(&a)).unwrap();
                assert!((q - dirichlet(&a)).abs() < 1e-14, "n={n} a={a:?}");
            }
        }
    }

    #[test]
    fn composite_rule_counts_and_exactness() {
        for n in 1..=3 {
            let base = SimplexRule::conical(n, 4);
            for m in [2, 3] {
                let rule = SimplexRule::composite(&base, m);
                assert_eq!(rule.nodes.len(), base.nodes.len() * m.pow(n as u32));
                for x in &rule.nodes {
                    assert!(x.iter().all(|&v| v >= -1e-15) && x.iter().sum::<f64>() <= 1.0 + 1e-15);
                }
                let a: Vec<u32> = (0..n as u32).map(|i| i + 1).collect();
                let q = rule.apply(mono(&a)).unwrap();
                assert!((q - dirichlet(&a)).abs() < 1e-14, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn breakpoints_restore_exactness() {
        // |x − 0.3| is piecewise linear; one cut makes the rule exact.
        let q = integrate_1d(|x| Ok((x - 0.3f64).abs()), 0.0, 1.0, &[0.3], 1, 2).unwrap();
        assert!((q - (0.045 + 0.245)).abs() < 1e-15);
    }

    #[test]
    fn permutation_order() {
        let mut v = vec![0, 1, 2];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 2, 1]);
    }
}
