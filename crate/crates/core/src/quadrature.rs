//! Gaussian quadrature for the radial measures `r^(2 delta + 1) dr`, the
//! weighted line `|x|^(2 kappa) dx` and the weighted sphere `h_kappa^2 dsigma`.
//!
//! Every rule is built from the Jacobi matrix of its three-term recurrence:
//! nodes come from a symmetric eigen-decomposition and are then polished by
//! Newton steps on the orthonormal recurrence. Weights are Christoffel numbers
//! `mu_0 / sum_k p_k(x_i)^2`, computed in log space so that tiny weights at far
//! nodes keep full relative accuracy.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::specfun::{log_beta, log_gamma};

/// Nodes and weights of a one-dimensional Gaussian rule, ascending nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gaussian rule from recurrence coefficients of the orthonormal family:
/// `b[k+1] p_{k+1} = (x - a[k]) p_k - b[k] p_{k-1}` with `b[0]` unused.
fn gauss_from_recurrence(a: &[f64], b: &[f64], ln_mu0: f64) -> GaussRule {
    let n = a.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = a[i];
        if i + 1 < n {
            jac[(i, i + 1)] = b[i + 1];
            jac[(i + 1, i)] = b[i + 1];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut ln_weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        let mut cur = *x;
        let (mut p, mut dp, _) = eval_orthonormal(cur, a, b);
        for _ in 0..3 {
            if dp == 0.0 || !dp.is_finite() {
                break;
            }
            let cand = cur - p / dp;
            let (pc, dpc, _) = eval_orthonormal(cand, a, b);
            if pc.abs() < p.abs() {
                cur = cand;
                p = pc;
                dp = dpc;
            } else {
                break;
            }
        }
        *x = cur;
        let (_, _, ln_sum) = eval_orthonormal(cur, a, b);
        ln_weights.push(ln_mu0 - ln_sum);
    }
    let weights = ln_weights.iter().map(|l| l.exp()).collect();
    GaussRule { nodes, weights, ln_weights }
}

/// Returns `(p_n(x), p_n'(x), ln sum_{k<n} p_k(x)^2)` where `p_n` is known only
/// up to a positive scale; the ratio `p_n / p_n'` is exact.
fn eval_orthonormal(x: f64, a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let n = a.len();
    let (mut p_prev, mut p) = (0.0_f64, 1.0_f64);
    let (mut d_prev, mut d) = (0.0_f64, 0.0_f64);
    let mut sum = 0.0_f64;
    let mut ln_scale = 0.0_f64;
    for k in 0..n {
        sum += p * p;
        let bk = if k == 0 { 0.0 } else { b[k] };
        let bk1 = if k + 1 < n { b[k + 1] } else { 1.0 };
        let p_next = ((x - a[k]) * p - bk * p_prev) / bk1;
        let d_next = (p + (x - a[k]) * d - bk * d_prev) / bk1;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
        if p.abs() > 1e100 || p_prev.abs() > 1e100 {
            p *= 1e-100;
            p_prev *= 1e-100;
            d *= 1e-100;
            d_prev *= 1e-100;
            sum *= 1e-200;
            ln_scale += 100.0 * std::f64::consts::LN_10;
        }
    }
    (p, d, sum.ln() + 2.0 * ln_scale)
}

/// Gauss–Jacobi rule on `[-1, 1]` for the weight `(1-t)^alpha (1+t)^beta`.
pub fn gauss_jacobi(alpha: f64, beta: f64, n: usize) -> Result<GaussRule> {
    if !(alpha > -1.0) || !(beta > -1.0) {
        return domain(format!("Jacobi parameters must exceed -1, got ({alpha}, {beta})"));
    }
    if n == 0 || n > 512 {
        return Err(Error::Size(format!("Gauss-Jacobi size {n} outside 1..=512")));
    }
    let ab = alpha + beta;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        a[k] = if k == 0 { (beta - alpha) / (ab + 2.0) } else { (beta * beta - alpha * alpha) / (s * (s + 2.0)) };
        if k >= 1 {
            b[k] = if k == 1 {
                (4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))).sqrt()
            } else {
                (4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            };
        }
    }
    let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + log_beta(alpha + 1.0, beta + 1.0)?;
    Ok(gauss_from_recurrence(&a, &b, ln_mu0))
}

/// Generalized Gauss–Laguerre rule on `[0, inf)` for the weight `t^alpha e^-t`.
pub fn gauss_laguerre(alpha: f64, n: usize) -> Result<GaussRule> {
    if !(alpha > -1.0) {
        return domain(format!("Laguerre parameter must exceed -1, got {alpha}"));
    }
    if n == 0 || n > 512 {
        return Err(Error::Size(format!("Gauss-Laguerre size {n} outside 1..=512")));
    }
    let a: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let b: Vec<f64> = (0..n).map(|k| if k == 0 { 0.0 } else { (k as f64 * (k as f64 + alpha)).sqrt() }).collect();
    Ok(gauss_from_recurrence(&a, &b, log_gamma(alpha + 1.0)?))
}

/// Radial rule for the measure `d mu_delta(r) = r^(2 delta + 1) dr` on `(0, inf)`.
///
/// Exact for `q(r^2) e^(-scale r^2)` with `deg q <= 2n - 1`. `weights` are
/// weights for `d mu_delta` itself (the Gaussian factor is folded in), so
/// `integrate(f)` approximates `int f d mu_delta` for `f` with matching decay.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule {
    pub delta: f64,
    pub scale: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `ln` of the weights of `e^(-scale r^2) d mu_delta`.
    pub ln_gauss_weights: Vec<f64>,
}

impl RadialRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * f(r)).sum()
    }

    /// Weights for `e^(-scale r^2) d mu_delta`.
    pub fn gauss_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.ln_gauss_weights.iter().map(|l| l.exp())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["node", "weight"])?;
        for (r, wt) in self.nodes.iter().zip(&self.weights) {
            w.write_record([format!("{r:e}"), format!("{wt:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// [`radial_rule_scaled`] with `scale = 1`.
pub fn radial_rule(delta: f64, n: usize) -> Result<RadialRule> {
    radial_rule_scaled(delta, n, 1.0)
}

/// Radial rule adapted to integrands decaying like `e^(-scale r^2)`.
pub fn radial_rule_scaled(delta: f64, n: usize, scale: f64) -> Result<RadialRule> {
    if n == 0 || n > 256 {
        return Err(Error::Size(format!("radial rule size {n} outside 1..=256")));
    }
    if !(delta >= -0.5) {
        return domain(format!("radial rule needs delta >= -1/2, got {delta}"));
    }
    if !(scale > 0.0) {
        return domain(format!("radial rule scale must be positive, got {scale}"));
    }
    let lag = gauss_laguerre(delta, n)?;
    let shift = -(delta + 1.0) * scale.ln() - std::f64::consts::LN_2;
    let nodes: Vec<f64> = lag.nodes.iter().map(|t| (t / scale).sqrt()).collect();
    let ln_gauss_weights: Vec<f64> = lag.ln_weights.iter().map(|l| l + shift).collect();
    let weights = ln_gauss_weights.iter().zip(&nodes).map(|(l, r)| (l + scale * r * r).exp()).collect();
    Ok(RadialRule { delta, scale, nodes, weights, ln_gauss_weights })
}

/// Rule on the real line for `|x|^(2 kappa) dx`, built by mirroring the
/// radial rule with `delta = kappa - 1/2`.
pub fn line_rule(kappa: f64, n: usize, scale: f64) -> Result<GaussRule> {
    if !(kappa >= 0.0) {
        return domain(format!("multiplicity must be nonnegative, got {kappa}"));
    }
    let rad = radial_rule_scaled(kappa - 0.5, n, scale)?;
    let mut nodes = Vec::with_capacity(2 * n);
    let mut ln_weights = Vec::with_capacity(2 * n);
    for i in (0..n).rev() {
        nodes.push(-rad.nodes[i]);
        ln_weights.push(rad.weights[i].ln());
    }
    for i in 0..n {
        nodes.push(rad.nodes[i]);
        ln_weights.push(rad.weights[i].ln());
    }
    let weights = ln_weights.iter().map(|l| l.exp()).collect();
    Ok(GaussRule { nodes, weights, ln_weights })
}

/// Product rule on the weighted sphere `(S^(d-1), prod |x_j|^(2 kappa_j) dsigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub d: usize,
    pub kappa: Vec<f64>,
    /// Row-major unit vectors, `d` entries per point.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Every polynomial of total degree `<= exactness` is integrated exactly.
    pub exactness: usize,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points.chunks_exact(self.d).zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.iter().map(|(w, wt)| wt * f(w)).sum()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (1..=self.d).map(|j| format!("x{j}")).collect();
        header.push("weight".into());
        w.write_record(&header)?;
        for (p, wt) in self.iter() {
            let mut rec: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
            rec.push(format!("{wt:e}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Weighted sphere rule built by peeling off one coordinate at a time:
/// `omega = (sqrt(1 - t^2) omega', t)`, where the `t` integral carries the
/// weight `|t|^(2 kappa_k) (1 - t^2)^((k-3)/2 + gamma')` and is reduced by
/// `u = t^2` to a Gauss–Jacobi rule with nodes mirrored to `+-sqrt(u)`.
pub fn sphere_rule(d: usize, kappa: &[f64], n: usize) -> Result<SphereRule> {
    if d < 2 {
        return domain(format!("sphere rule needs d >= 2, got {d}"));
    }
    if kappa.len() != d {
        return domain(format!("expected {d} multiplicities, got {}", kappa.len()));
    }
    if kappa.iter().any(|k| !(*k >= 0.0)) {
        return domain("multiplicities must be nonnegative");
    }
    if n == 0 || n > 128 {
        return Err(Error::Size(format!("sphere rule size {n} outside 1..=128")));
    }
    // S^0 = {-1, +1} with counting measure.
    let mut points: Vec<f64> = vec![-1.0, 1.0];
    let mut weights: Vec<f64> = vec![1.0, 1.0];
    let mut gamma_prev = kappa[0];
    for k in 2..=d {
        let alpha = (k as f64 - 3.0) / 2.0 + gamma_prev;
        let beta = kappa[k - 1] - 0.5;
        let jac = gauss_jacobi(alpha, beta, n)?;
        let dim_prev = k - 1;
        let mut new_points = Vec::with_capacity(points.len() / dim_prev * 2 * n * k);
        let mut new_weights = Vec::with_capacity(weights.len() * 2 * n);
        // u = (1 + y) / 2 maps [-1, 1] onto [0, 1].
        let ln_factor = -(alpha + beta + 1.0) * std::f64::consts::LN_2;
        let mut t_nodes = Vec::with_capacity(2 * n);
        for (y, lw) in jac.nodes.iter().zip(&jac.ln_weights) {
            let u = 0.5 * (1.0 + y);
            let w = 0.5 * (lw + ln_factor).exp();
            t_nodes.push((-u.sqrt(), w, (1.0 - u).sqrt()));
            t_nodes.push((u.sqrt(), w, (1.0 - u).sqrt()));
        }
        t_nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (prev, &pw) in points.chunks_exact(dim_prev).zip(&weights) {
            for &(t, tw, c) in &t_nodes {
                new_points.extend(prev.iter().map(|x| x * c));
                new_points.push(t);
                new_weights.push(pw * tw);
            }
        }
        points = new_points;
        weights = new_weights;
        gamma_prev += kappa[k - 1];
    }
    Ok(SphereRule { d, kappa: kappa.to_vec(), points, weights, exactness: 4 * n - 1 })
}

/// Writes any rule as `node, weight` lines; used by the CLI debug dump.
pub fn write_rule_csv(rule: &GaussRule, mut out: impl Write) -> Result<()> {
    writeln!(out, "node,weight")?;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        writeln!(out, "{x:e},{w:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{beta, gamma};

    #[test]
    fn gauss_legendre_two_points() {
        let r = gauss_jacobi(0.0, 0.0, 2).unwrap();
        let s = 1.0 / 3.0_f64.sqrt();
        assert!((r.nodes[0] + s).abs() < 1e-15 && (r.nodes[1] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-14 && (r.weights[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_exactness_sweep() {
        // int_{-1}^1 t^38 dt = 2/39
        let r = gauss_jacobi(0.0, 0.0, 20).unwrap();
        let v = r.integrate(|t| t.powi(38));
        assert!((v - 2.0 / 39.0).abs() < 1e-14);
        // Beta identity: int (1-t^2)^(g-1/2) dt = B(g+1/2, 1/2)
        for &g in &[0.0, 0.3, 0.9, 2.0] {
            let r = gauss_jacobi(g - 0.5, g - 0.5, 5).unwrap();
            let exact = beta(g + 0.5, 0.5).unwrap();
            assert!((r.integrate(|_| 1.0) - exact).abs() < 1e-13 * exact);
        }
        // Mean of t under (1-t)^a (1+t)^b is (b-a)/(a+b+2); higher moments
        // are compared against a much larger rule.
        let (a, b) = (0.7, -0.4);
        let r = gauss_jacobi(a, b, 12).unwrap();
        let big = gauss_jacobi(a, b, 60).unwrap();
        let mu0 = 2f64.powf(a + b + 1.0) * beta(a + 1.0, b + 1.0).unwrap();
        assert!((r.integrate(|_| 1.0) - mu0).abs() < 1e-13 * mu0);
        assert!((r.integrate(|t| t) - mu0 * (b - a) / (a + b + 2.0)).abs() < 1e-13);
        for k in 0..=23 {
            let v = r.integrate(|t| t.powi(k));
            let w = big.integrate(|t| t.powi(k));
            assert!((v - w).abs() < 1e-13 * w.abs().max(1.0), "k={k}: {v} vs {w}");
        }
        assert!(matches!(gauss_jacobi(-1.0, 0.0, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn radial_rule_gaussian_mass() {
        for &delta in &[-0.5, 0.0, 0.9, 2.35] {
            for &n in &[1usize, 5, 40, 128] {
                let r = radial_rule(delta, n).unwrap();
                let v: f64 = r.gauss_weights().sum();
                let exact = gamma(delta + 1.0).unwrap() / 2.0;
                assert!((v - exact).abs() < 1e-12 * exact, "delta={delta} n={n}");
                assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
                assert!(r.weights.iter().all(|w| *w > 0.0));
            }
        }
        assert!(matches!(radial_rule(0.0, 0), Err(Error::Size(_))));
        assert!(matches!(radial_rule(0.0, 257), Err(Error::Size(_))));
    }

    #[test]
    fn single_node_rule_is_moment_matched() {
        // one node must sit at the mean of t = r^2 under t^delta e^-t
        for &delta in &[-0.5, 0.0, 1.7] {
            let r = radial_rule(delta, 1).unwrap();
            assert!((r.nodes[0] * r.nodes[0] - (delta + 1.0)).abs() < 1e-14);
            let v = r.integrate(|x| (-x * x).exp());
            let exact = gamma(delta + 1.0).unwrap() / 2.0;
            assert!((v - exact).abs() < 1e-14 * exact);
        }
        assert!(matches!(radial_rule(-0.7, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn radial_rule_scaled_exactness() {
        // int r^(2j) e^{-s r^2} r^(2 delta + 1) dr = Γ(j + delta + 1) / (2 s^(j+delta+1))
        let (delta, s) = (0.4, 0.75);
        let r = radial_rule_scaled(delta, 16, s).unwrap();
        for j in 0..=31 {
            let exact = gamma(j as f64 + delta + 1.0).unwrap() / (2.0 * s.powf(j as f64 + delta + 1.0));
            let v: f64 = r.nodes.iter().zip(r.gauss_weights()).map(|(x, w)| w * x.powi(2 * j)).sum();
            assert!((v - exact).abs() < 1e-11 * exact, "j={j}");
        }
    }

    #[test]
    fn refinement_converges() {
        let f = |r: f64| (-(1.3 * r * r)).exp() * r.cos() / (1.0 + r * r);
        for &delta in &[0.0, 0.9] {
            let a = radial_rule(delta, 64).unwrap().integrate(f);
            let b = radial_rule(delta, 128).unwrap().integrate(f);
            assert!((a - b).abs() < 1e-10, "delta={delta}: {a} {b}");
        }
    }

    #[test]
    fn line_rule_matches_moments() {
        let kappa = 0.6;
        let r = line_rule(kappa, 12, 1.0).unwrap();
        // int x^(2j) |x|^(2k) e^{-x^2} dx = Γ(j + k + 1/2)
        for j in 0..12 {
            let v = r.integrate(|x| x.powi(2 * j) * (-x * x).exp());
            let exact = gamma(j as f64 + kappa + 0.5).unwrap();
            assert!((v - exact).abs() < 1e-11 * exact);
            let odd = r.integrate(|x| x.powi(2 * j + 1) * (-x * x).exp());
            assert!(odd.abs() < 1e-12 * exact.max(1.0));
        }
    }

    #[test]
    fn sphere_masses() {
        let c = sphere_rule(2, &[0.0, 0.0], 6).unwrap();
        assert!((c.mass() - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        let c = sphere_rule(2, &[0.5, 0.5], 6).unwrap();
        assert!((c.mass() - 2.0).abs() < 1e-13);
        for (p, _) in c.iter() {
            assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-14);
        }
    }

    /// Iterated-integral oracle: the weighted sphere mass is
    /// `2 prod Γ(kappa_j + 1/2) / Γ(gamma + d/2)`, which we also recover by
    /// brute-force midpoint integration in spherical angles.
    #[test]
    fn sphere_mass_d3_against_iterated_integral() {
        let kappa = [0.3, 0.0, 0.7];
        let rule = sphere_rule(3, &kappa, 10).unwrap();
        let m = 2000;
        let mut brute = 0.0;
        let pi = std::f64::consts::PI;
        for i in 0..m {
            let th = (i as f64 + 0.5) * pi / m as f64;
            for j in 0..(2 * m) {
                let ph = (j as f64 + 0.5) * pi / m as f64;
                let x = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                let h: f64 = x.iter().zip(&kappa).map(|(v, k)| v.abs().powf(2.0 * k)).product();
                brute += h * th.sin();
            }
        }
        brute *= (pi / m as f64).powi(2);
        let closed = 2.0 * kappa.iter().map(|k| gamma(k + 0.5).unwrap()).product::<f64>() / gamma(1.0 + 1.5).unwrap();
        assert!((rule.mass() - closed).abs() < 1e-12 * closed);
        assert!((brute - closed).abs() < 1e-4 * closed);
    }

    #[test]
    fn sphere_exactness_on_monomials() {
        // int x^(2b) h^2 dsigma = 2 prod Γ(b_j + kappa_j + 1/2) / Γ(|b| + gamma + d/2)
        let kappa = [0.6, 0.3, 0.0];
        let n = 5;
        let rule = sphere_rule(3, &kappa, n).unwrap();
        let g: f64 = kappa.iter().sum();
        for b0 in 0..=4 {
            for b1 in 0..=(4 - b0) {
                for b2 in 0..=(4 - b0 - b1) {
                    let b = [b0, b1, b2];
                    let v = rule.integrate(|x| (0..3).map(|j| x[j].powi(2 * b[j])).product());
                    let tot = (b0 + b1 + b2) as f64;
                    let exact = 2.0 * (0..3).map(|j| gamma(b[j] as f64 + kappa[j] + 0.5).unwrap()).product::<f64>()
                        / gamma(tot + g + 1.5).unwrap();
                    assert!((v - exact).abs() < 1e-12 * exact, "b={b:?}");
                    let odd = rule.integrate(|x| x[0] * (0..3).map(|j| x[j].powi(2 * b[j])).product::<f64>());
                    assert!(odd.abs() < 1e-14);
                }
            }
        }
    }
}
