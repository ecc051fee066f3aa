//! Generalized Hermite functions for Z2^d, coefficient-space operators on
//! their finite spans, and the Mehler heat kernel.
//!
//! In one variable with multiplicity `k` the orthonormal functions on
//! `L^2(|x|^(2k) dx)` are `phi_n = N_n Q_n(x) e^(-x^2/2)` with
//! `Q_{2m} = (-1)^m L_m^(k-1/2)(x^2)` and `Q_{2m+1} = (-1)^m x L_m^(k+1/2)(x^2)`.
//! The d-dimensional basis is the tensor product.

use std::collections::BTreeMap;

use num::{BigRational, One};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dunkl::{dunkl_op, ln_dunkl_kernel, ReflectionGroup};
use crate::error::{domain, Error, Result};
use crate::poly::{laguerre_in_square, MultiPoly, Poly};
use crate::quadrature::{line_rule, GaussRule};
use crate::specfun::{laguerre_all, log_gamma};

pub type HermiteIndex = Vec<u32>;

pub fn total_degree(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

/// Eigenvalue `2|alpha| + d + 2 gamma` of the oscillator on `Phi_alpha`.
pub fn eigenvalue(group: &ReflectionGroup, alpha: &[u32]) -> f64 {
    2.0 * total_degree(alpha) as f64 + group.d() as f64 + 2.0 * group.gamma()
}

/// One-dimensional normalizations `N_n = sqrt(k! / Gamma(k + kappa + 1/2 + [n odd]))`, `k = n / 2`.
///
/// Only `N_0, N_1` come from log-gamma; the rest follow by the ratio
/// `N_(n+2)^2 / N_n^2 = (k + 1) / (k + kappa + shift)`, which keeps the relative
/// error at a few ulps instead of growing with `ln N_n`.
fn norms(nmax: usize, kappa: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let shift = if n % 2 == 0 { 0.5 } else { 1.5 };
        let v = if n < 2 {
            (-0.5 * log_gamma(kappa + shift).unwrap()).exp()
        } else {
            let k = (n / 2 - 1) as f64;
            out[n - 2] * ((k + 1.0) / (k + kappa + shift)).sqrt()
        };
        out.push(v);
    }
    out
}

/// Values of `phi_0..phi_nmax` and related quantities at one point.
#[derive(Debug, Clone)]
pub struct Hermite1d {
    kappa: f64,
    nmax: usize,
    norms: Vec<f64>,
}

/// `phi_n(x)`, `phi_n'(x)` and the ladder images at one point, `n = 0..=nmax`.
#[derive(Debug, Clone, Default)]
pub struct Hermite1dValues {
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// `(T + x) phi_n`
    pub down: Vec<f64>,
    /// `(-T + x) phi_n`
    pub up: Vec<f64>,
}

impl Hermite1d {
    pub fn new(kappa: f64, nmax: usize) -> Result<Self> {
        if !(kappa >= 0.0) {
            return domain(format!("multiplicity must be nonnegative, got {kappa}"));
        }
        let norms = norms(nmax, kappa);
        Ok(Hermite1d { kappa, nmax, norms })
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    /// `phi_0(x), .., phi_nmax(x)`.
    pub fn phi(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.nmax + 1];
        self.phi_into(x, &mut out);
        out
    }

    pub fn phi_into(&self, x: f64, out: &mut [f64]) {
        let t = x * x;
        let g = (-0.5 * t).exp();
        let kmax = self.nmax / 2;
        let la = laguerre_all(kmax, self.kappa - 0.5, t);
        let lb = laguerre_all(kmax, self.kappa + 0.5, t);
        for (n, o) in out.iter_mut().enumerate().take(self.nmax + 1) {
            let k = n / 2;
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            let q = if n % 2 == 0 { s * la[k] } else { s * x * lb[k] };
            *o = self.norms[n] * q * g;
        }
    }

    /// Functions, derivatives and ladder images, all from Laguerre recurrences.
    pub fn values(&self, x: f64) -> Hermite1dValues {
        let t = x * x;
        let g = (-0.5 * t).exp();
        let kmax = self.nmax / 2;
        let k2 = self.kappa * 2.0;
        let la = laguerre_all(kmax, self.kappa - 0.5, t);
        let lb = laguerre_all(kmax, self.kappa + 0.5, t);
        let lc = laguerre_all(kmax, self.kappa + 1.5, t);
        let n1 = self.nmax + 1;
        let mut v = Hermite1dValues {
            phi: Vec::with_capacity(n1),
            dphi: Vec::with_capacity(n1),
            down: Vec::with_capacity(n1),
            up: Vec::with_capacity(n1),
        };
        for n in 0..n1 {
            let k = n / 2;
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            let (q, tq, dq) = if n % 2 == 0 {
                let tq = if k == 0 { 0.0 } else { -2.0 * s * x * lb[k - 1] };
                (s * la[k], tq, tq)
            } else {
                let tail = if k == 0 { 0.0 } else { 2.0 * t * lc[k - 1] };
                (s * x * lb[k], s * ((1.0 + k2) * lb[k] - tail), s * (lb[k] - tail))
            };
            let c = self.norms[n] * g;
            v.phi.push(c * q);
            v.dphi.push(c * (dq - x * q));
            v.down.push(c * tq);
            v.up.push(c * (2.0 * x * q - tq));
        }
        v
    }
}

/// Single value `phi_n(x)` for multiplicity `kappa`.
pub fn phi_1d(n: usize, kappa: f64, x: f64) -> Result<f64> {
    Ok(Hermite1d::new(kappa, n)?.phi(x)[n])
}

/// Single derivative `phi_n'(x)`.
pub fn phi_1d_deriv(n: usize, kappa: f64, x: f64) -> Result<f64> {
    Ok(Hermite1d::new(kappa, n)?.values(x).dphi[n])
}

/// `Phi_alpha(x) = prod_j phi_{alpha_j}(x_j)`.
pub fn phi_nd(alpha: &[u32], group: &ReflectionGroup, x: &[f64]) -> Result<f64> {
    if alpha.len() != group.d() || x.len() != group.d() {
        return domain("index or point dimension does not match group");
    }
    let mut acc = 1.0;
    for j in 0..group.d() {
        acc *= phi_1d(alpha[j] as usize, group.kappa()[j], x[j])?;
    }
    Ok(acc)
}

/// Tables of `phi_n(x_j)` for every coordinate of a point.
pub struct PointTables {
    tables: Vec<Vec<f64>>,
}

impl PointTables {
    pub fn new(basis: &[Hermite1d], x: &[f64]) -> Self {
        PointTables { tables: basis.iter().zip(x).map(|(b, &xj)| b.phi(xj)).collect() }
    }

    pub fn phi(&self, alpha: &[u32]) -> f64 {
        alpha.iter().enumerate().map(|(j, &a)| self.tables[j][a as usize]).product()
    }
}

/// Polynomial part `Q_alpha = Phi_alpha e^(|x|^2/2) / N_alpha`, exact.
pub fn hermite_poly_exact(group: &ReflectionGroup, alpha: &[u32]) -> Result<MultiPoly> {
    let kappa = group
        .kappa_exact()
        .ok_or_else(|| Error::Precondition("exact Hermite polynomials need rational multiplicities".into()))?;
    let d = group.d();
    let half = BigRational::new(1.into(), 2.into());
    let mut p = MultiPoly::constant(d, BigRational::one());
    for j in 0..d {
        let n = alpha[j] as usize;
        let k = n / 2;
        let sign = if k.is_multiple_of(2) { BigRational::one() } else { -BigRational::one() };
        let factor = if n.is_multiple_of(2) {
            laguerre_in_square(d, j, k, &(kappa[j].clone() - half.clone()))
        } else {
            laguerre_in_square(d, j, k, &(kappa[j].clone() + half.clone())).mul_var(j)
        };
        p = p.mul(&factor.scale(&sign));
    }
    Ok(p)
}

/// `(-Delta_kappa + |x|^2 - (2|alpha| + d + 2 gamma)) Phi_alpha`, divided by the
/// Gaussian and the normalization, as an exact polynomial. Zero iff `Phi_alpha`
/// is an eigenfunction.
pub fn eigen_residual_exact(group: &ReflectionGroup, alpha: &[u32]) -> Result<MultiPoly> {
    let d = group.d();
    let q = hermite_poly_exact(group, alpha)?;
    // T_j (P e^{-|x|^2/2}) = (T_j P - x_j P) e^{-|x|^2/2}
    let gauss_op = |p: &MultiPoly, j: usize| -> Result<MultiPoly> { Ok(dunkl_op(group, j, p)?.sub(&p.mul_var(j))) };
    let mut lap = MultiPoly::zero(d);
    let mut sq = MultiPoly::zero(d);
    for j in 0..d {
        lap = lap.add(&gauss_op(&gauss_op(&q, j)?, j)?);
        sq = sq.add(&q.mul_var(j).mul_var(j));
    }
    let gamma2: BigRational =
        group.kappa_exact().unwrap().iter().cloned().sum::<BigRational>() * BigRational::from_integer(2.into());
    let lambda = BigRational::from_integer((2 * total_degree(alpha) as i64 + d as i64).into()) + gamma2;
    Ok(sq.sub(&lap).sub(&q.scale(&lambda)))
}

/// Ladder coefficients `A_j Phi_a = down_j(a_j) Phi_{a-e_j}` and
/// `A_j* Phi_a = up_j(a_j) Phi_{a+e_j}`, measured by Gaussian quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderTable {
    pub kappa: Vec<f64>,
    pub n_max: usize,
    pub down: Vec<Vec<f64>>,
    pub up: Vec<Vec<f64>>,
}

impl LadderTable {
    /// Measures `<A_j phi_n, phi_{n-1}>` and `<A_j* phi_n, phi_{n+1}>` for
    /// `n <= n_max` with a line rule exact for the polynomial integrands.
    pub fn measure(group: &ReflectionGroup, n_max: usize) -> Result<Self> {
        let mut down = Vec::with_capacity(group.d());
        let mut up = Vec::with_capacity(group.d());
        for &k in group.kappa() {
            let (dj, uj) = measure_1d(k, n_max)?;
            down.push(dj);
            up.push(uj);
        }
        Ok(LadderTable { kappa: group.kappa().to_vec(), n_max, down, up })
    }

    /// Closed-form conjecture `down(n) = sqrt(2n + 4 kappa [n odd])`, `up(n) = down(n+1)`.
    pub fn closed_form(group: &ReflectionGroup, n_max: usize) -> Self {
        let f = |n: usize, k: f64| (2.0 * n as f64 + if n % 2 == 1 { 4.0 * k } else { 0.0 }).sqrt();
        let down = group.kappa().iter().map(|&k| (0..=n_max).map(|n| f(n, k)).collect()).collect();
        let up = group.kappa().iter().map(|&k| (0..=n_max).map(|n| f(n + 1, k)).collect()).collect();
        LadderTable { kappa: group.kappa().to_vec(), n_max, down, up }
    }

    pub fn down(&self, j: usize, n: u32) -> f64 {
        self.down[j][n as usize]
    }

    pub fn up(&self, j: usize, n: u32) -> f64 {
        self.up[j][n as usize]
    }

    /// Max over indices with `|alpha| <= total_max` (each `alpha_j < n_max`) of
    /// `|1/2 sum_j [down(a_j) up(a_j - 1) + up(a_j) down(a_j + 1)] - (2|alpha| + d + 2 gamma)|`.
    pub fn factorization_residual(&self, total_max: u32) -> f64 {
        let d = self.kappa.len();
        let gamma: f64 = self.kappa.iter().sum();
        let per = |j: usize, a: u32| -> f64 {
            let a_ = a as usize;
            let lower = if a == 0 { 0.0 } else { self.down[j][a_] * self.up[j][a_ - 1] };
            0.5 * (lower + self.up[j][a_] * self.down[j][a_ + 1])
        };
        let limit = total_max.min(self.n_max as u32 - 1);
        let mut worst = 0.0_f64;
        for alpha in indices_up_to(d, limit) {
            if alpha.iter().any(|&a| a as usize >= self.n_max) {
                continue;
            }
            let lhs: f64 = (0..d).map(|j| per(j, alpha[j])).sum();
            let rhs = 2.0 * total_degree(&alpha) as f64 + d as f64 + 2.0 * gamma;
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }

    /// Largest entrywise deviation from another table of the same shape.
    pub fn max_deviation(&self, other: &LadderTable) -> f64 {
        let mut worst = 0.0_f64;
        for (a, b) in self.down.iter().flatten().zip(other.down.iter().flatten()) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in self.up.iter().flatten().zip(other.up.iter().flatten()) {
            worst = worst.max((a - b).abs());
        }
        worst
    }
}

fn measure_1d(kappa: f64, n_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = line_rule(kappa, n_max + 3, 1.0)?;
    let basis = Hermite1d::new(kappa, n_max + 1)?;
    let vals: Vec<Hermite1dValues> = rule.nodes.iter().map(|&x| basis.values(x)).collect();
    let inner =
        |f: &dyn Fn(&Hermite1dValues) -> f64| -> f64 { vals.iter().zip(&rule.weights).map(|(v, w)| w * f(v)).sum() };
    let mut down = vec![0.0; n_max + 1];
    let mut up = vec![0.0; n_max + 1];
    for n in 0..=n_max {
        if n > 0 {
            down[n] = inner(&|v| v.down[n] * v.phi[n - 1]);
        }
        up[n] = inner(&|v| v.up[n] * v.phi[n + 1]);
    }
    Ok((down, up))
}

/// All multi-indices in `d` variables with `|alpha| <= n`, lexicographic.
pub fn indices_up_to(d: usize, n: u32) -> Vec<HermiteIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(j: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<HermiteIndex>) {
        if j == cur.len() {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur[j] = a;
            rec(j + 1, left - a, cur, out);
        }
        cur[j] = 0;
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// A finite generalized-Hermite expansion `sum_alpha c_alpha Phi_alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    group: ReflectionGroup,
    n: u32,
    entries: BTreeMap<HermiteIndex, f64>,
}

#[derive(Serialize, Deserialize)]
struct SpectralJson {
    d: usize,
    kappa: Vec<f64>,
    #[serde(rename = "N")]
    n: u32,
    entries: Vec<EntryJson>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    alpha: Vec<u32>,
    c: f64,
}

impl SpectralCoeffs {
    pub fn new(group: &ReflectionGroup, n: u32) -> Self {
        SpectralCoeffs { group: group.clone(), n, entries: BTreeMap::new() }
    }

    /// The single basis function `Phi_alpha`.
    pub fn basis(group: &ReflectionGroup, alpha: &[u32]) -> Self {
        let mut f = Self::new(group, total_degree(alpha));
        f.set(alpha.to_vec(), 1.0);
        f
    }

    /// Random element of `V_G` (all-even indices, `|alpha| <= n`), i.i.d.
    /// standard normal coefficients normalized to unit `L^2` norm.
    pub fn random_invariant(group: &ReflectionGroup, n: u32, rng: &mut impl Rng) -> Self {
        let mut f = Self::new(group, n);
        for alpha in indices_up_to(group.d(), n) {
            if alpha.iter().all(|a| a % 2 == 0) {
                let c: f64 = rng.sample(StandardNormal);
                f.set(alpha, c);
            }
        }
        let norm = f.norm();
        f.scale(1.0 / norm)
    }

    /// Random element of `V` with i.i.d. standard normal coefficients.
    pub fn random(group: &ReflectionGroup, n: u32, rng: &mut impl Rng) -> Self {
        let mut f = Self::new(group, n);
        for alpha in indices_up_to(group.d(), n) {
            let c: f64 = rng.sample(StandardNormal);
            f.set(alpha, c);
        }
        f
    }

    pub fn group(&self) -> &ReflectionGroup {
        &self.group
    }

    /// Truncation bound `N` on `|alpha|`.
    pub fn truncation(&self) -> u32 {
        self.n
    }

    pub fn set(&mut self, alpha: HermiteIndex, c: f64) {
        assert_eq!(alpha.len(), self.group.d());
        let t = total_degree(&alpha);
        if t > self.n {
            self.n = t;
        }
        if c == 0.0 {
            self.entries.remove(&alpha);
        } else {
            self.entries.insert(alpha, c);
        }
    }

    pub fn get(&self, alpha: &[u32]) -> f64 {
        self.entries.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HermiteIndex, f64)> {
        self.entries.iter().map(|(a, &c)| (a, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.entries.iter().map(|(a, c)| c * other.get(a)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_entries(|_, c| c * s)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, c) in &other.entries {
            let v = out.get(a) - c;
            out.set(a.clone(), v);
        }
        out
    }

    fn map_entries(&self, f: impl Fn(&[u32], f64) -> f64) -> Self {
        let mut out = Self::new(&self.group, self.n);
        for (a, &c) in &self.entries {
            out.set(a.clone(), f(a, c));
        }
        out
    }

    fn shift(&self, j: usize, up: bool, f: impl Fn(&[u32], f64) -> f64) -> Self {
        let n = if up { self.n + 1 } else { self.n };
        let mut out = Self::new(&self.group, n);
        for (a, &c) in &self.entries {
            if !up && a[j] == 0 {
                continue;
            }
            let mut b = a.clone();
            if up {
                b[j] += 1;
            } else {
                b[j] -= 1;
            }
            out.set(b, f(a, c));
        }
        out
    }

    /// `e^{-tH}`: multiply by `e^{-(2|alpha| + d + 2 gamma) t}`.
    pub fn apply_heat(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return domain(format!("heat time must be positive, got {t}"));
        }
        Ok(self.map_entries(|a, c| c * (-eigenvalue(&self.group, a) * t).exp()))
    }

    /// `H^{-1/2}`.
    pub fn apply_h_inv_sqrt(&self) -> Self {
        self.map_entries(|a, c| c / eigenvalue(&self.group, a).sqrt())
    }

    /// `H` itself.
    pub fn apply_h(&self) -> Self {
        self.map_entries(|a, c| c * eigenvalue(&self.group, a))
    }

    /// `A_j = T_j + x_j`.
    pub fn apply_ladder_down(&self, j: usize, ladder: &LadderTable) -> Self {
        self.shift(j, false, |a, c| c * ladder.down(j, a[j]))
    }

    /// `A_j* = -T_j + x_j`.
    pub fn apply_ladder_up(&self, j: usize, ladder: &LadderTable) -> Self {
        self.shift(j, true, |a, c| c * ladder.up(j, a[j]))
    }

    /// `R_j = A_j H^{-1/2}`.
    pub fn apply_riesz(&self, j: usize, ladder: &LadderTable) -> Self {
        let g = &self.group;
        self.shift(j, false, |a, c| c * ladder.down(j, a[j]) / eigenvalue(g, a).sqrt())
    }

    /// `R_j* = A_j* H^{-1/2}` as defined by display, which is not the Hilbert
    /// adjoint of [`Self::apply_riesz`]; see [`Self::apply_riesz_adjoint`].
    pub fn apply_riesz_star(&self, j: usize, ladder: &LadderTable) -> Self {
        let g = &self.group;
        self.shift(j, true, |a, c| c * ladder.up(j, a[j]) / eigenvalue(g, a).sqrt())
    }

    /// Hilbert adjoint of `R_j`, i.e. `H^{-1/2} A_j*`.
    pub fn apply_riesz_adjoint(&self, j: usize, ladder: &LadderTable) -> Self {
        self.apply_ladder_up(j, ladder).apply_h_inv_sqrt()
    }

    /// `f^#`: keep only indices that are even in every coordinate.
    pub fn g_symmetrize(&self) -> Self {
        let mut out = Self::new(&self.group, self.n);
        for (a, &c) in &self.entries {
            if a.iter().all(|x| x % 2 == 0) {
                out.set(a.clone(), c);
            }
        }
        out
    }

    /// 1D tables large enough to synthesize this expansion.
    pub fn basis_tables(&self) -> Vec<Hermite1d> {
        let nmax = self.entries.keys().flat_map(|a| a.iter().copied()).max().unwrap_or(0) as usize;
        self.group.kappa().iter().map(|&k| Hermite1d::new(k, nmax).unwrap()).collect()
    }

    /// Point evaluation of the synthesized function.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let tables = self.basis_tables();
        self.eval_with(&tables, x)
    }

    pub fn eval_with(&self, tables: &[Hermite1d], x: &[f64]) -> f64 {
        let pt = PointTables::new(tables, x);
        self.entries.iter().map(|(a, c)| c * pt.phi(a)).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SpectralJson {
            d: self.group.d(),
            kappa: self.group.kappa().to_vec(),
            n: self.n,
            entries: self.entries.iter().map(|(a, &c)| EntryJson { alpha: a.clone(), c }).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SpectralJson = serde_json::from_str(s)?;
        if doc.kappa.len() != doc.d {
            return Err(Error::Parse(format!("kappa has {} entries, d = {}", doc.kappa.len(), doc.d)));
        }
        let group = ReflectionGroup::new(&doc.kappa)?;
        let mut f = Self::new(&group, doc.n);
        for e in doc.entries {
            if e.alpha.len() != doc.d {
                return Err(Error::Parse("index length does not match d".into()));
            }
            if total_degree(&e.alpha) > doc.n {
                return Err(Error::Parse(format!("index {:?} exceeds N = {}", e.alpha, doc.n)));
            }
            f.set(e.alpha, e.c);
        }
        Ok(f)
    }
}

/// Tensor-product Gaussian rule on `R^d` for `h_kappa^2 dx` (Gaussian folded
/// into the weights), exact for polynomial times `e^{-|x|^2}` integrands.
#[derive(Debug, Clone)]
pub struct ProductRule {
    pub lines: Vec<GaussRule>,
}

impl ProductRule {
    pub fn new(group: &ReflectionGroup, n: usize) -> Result<Self> {
        let lines = group.kappa().iter().map(|&k| line_rule(k, n, 1.0)).collect::<Result<_>>()?;
        Ok(ProductRule { lines })
    }

    /// Visits every tensor node with its weight.
    pub fn for_each(&self, mut f: impl FnMut(&[f64], f64)) {
        let d = self.lines.len();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        loop {
            let mut w = 1.0;
            for j in 0..d {
                x[j] = self.lines[j].nodes[idx[j]];
                w *= self.lines[j].weights[idx[j]];
            }
            f(&x, w);
            let mut j = 0;
            loop {
                if j == d {
                    return;
                }
                idx[j] += 1;
                if idx[j] < self.lines[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut acc = 0.0;
        self.for_each(|x, w| acc += w * f(x));
        acc
    }
}

/// Quadrature approximation of `(f, Phi_alpha)` in `L^2(h_kappa^2 dx)`.
pub fn project(group: &ReflectionGroup, f: impl Fn(&[f64]) -> f64, alpha: &[u32], rule: &ProductRule) -> Result<f64> {
    let tables: Vec<Hermite1d> =
        group.kappa().iter().zip(alpha).map(|(&k, &a)| Hermite1d::new(k, a as usize)).collect::<Result<_>>()?;
    Ok(rule.integrate(|x| f(x) * PointTables::new(&tables, x).phi(alpha)))
}

/// Projects `f` onto every `Phi_alpha` with `|alpha| <= n` in one pass.
pub fn project_all(
    group: &ReflectionGroup,
    f: impl Fn(&[f64]) -> f64,
    n: u32,
    rule: &ProductRule,
) -> Result<SpectralCoeffs> {
    let tables: Vec<Hermite1d> = group.kappa().iter().map(|&k| Hermite1d::new(k, n as usize)).collect::<Result<_>>()?;
    let indices = indices_up_to(group.d(), n);
    let mut acc = vec![0.0; indices.len()];
    rule.for_each(|x, w| {
        let fx = f(x) * w;
        let pt = PointTables::new(&tables, x);
        for (s, a) in acc.iter_mut().zip(&indices) {
            *s += fx * pt.phi(a);
        }
    });
    let mut out = SpectralCoeffs::new(group, n);
    for (a, c) in indices.into_iter().zip(acc) {
        out.set(a, c);
    }
    Ok(out)
}

/// Closed-form heat kernel of the Dunkl oscillator:
/// `c (sinh 2t)^(-d/2-gamma) exp(-coth(2t)(|x|^2+|y|^2)/2) E_kappa(x / sinh 2t, y)`.
#[derive(Debug, Clone)]
pub struct MehlerKernel {
    group: ReflectionGroup,
    ln_c: f64,
}

/// Reference point `(t, x, y) = (1, 0, 0)` used for calibration.
pub const CALIBRATION_TIME: f64 = 1.0;

impl MehlerKernel {
    /// Fixes the constant by matching the spectral sum at the reference point.
    pub fn calibrate(group: &ReflectionGroup) -> Result<Self> {
        let zero = vec![0.0; group.d()];
        let spectral = mehler_spectral(group, CALIBRATION_TIME, &zero, &zero, 80)?;
        let bare = ln_mehler_uncalibrated(group, CALIBRATION_TIME, &zero, &zero)?;
        Ok(MehlerKernel { group: group.clone(), ln_c: spectral.ln() - bare })
    }

    /// Uses a known constant instead of calibrating.
    pub fn with_constant(group: &ReflectionGroup, c: f64) -> Self {
        MehlerKernel { group: group.clone(), ln_c: c.ln() }
    }

    pub fn constant(&self) -> f64 {
        self.ln_c.exp()
    }

    pub fn ln_eval(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.ln_c + ln_mehler_uncalibrated(&self.group, t, x, y)?)
    }

    pub fn eval(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        let l = self.ln_eval(t, x, y)?;
        if l > 709.0 {
            return Err(Error::Range { what: "Mehler kernel".into(), log_value: l });
        }
        Ok(l.exp())
    }
}

/// `prod_j 2^(-kappa_j - 1/2) / Γ(kappa_j + 1/2)`; the value the calibration
/// is expected to reproduce.
pub fn mehler_constant_closed_form(group: &ReflectionGroup) -> f64 {
    group.kappa().iter().map(|&k| (-(k + 0.5) * std::f64::consts::LN_2 - log_gamma(k + 0.5).unwrap()).exp()).product()
}

fn ln_mehler_uncalibrated(group: &ReflectionGroup, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("kernel time must be positive, got {t}"));
    }
    let s = (2.0 * t).sinh();
    let coth = 1.0 / (2.0 * t).tanh();
    let d = group.d() as f64;
    let r2: f64 = x.iter().chain(y).map(|v| v * v).sum();
    let xs: Vec<f64> = x.iter().map(|v| v / s).collect();
    Ok(-(d / 2.0 + group.gamma()) * s.ln() - 0.5 * coth * r2 + ln_dunkl_kernel(group, &xs, y)?)
}

/// `mehler_kernel` with a freshly calibrated constant.
pub fn mehler_kernel(group: &ReflectionGroup, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    MehlerKernel::calibrate(group)?.eval(t, x, y)
}

/// Truncated spectral sum `sum_{|alpha| <= n} e^{-(2|alpha| + d + 2 gamma) t} Phi_alpha(x) Phi_alpha(y)`,
/// by convolution over coordinates.
pub fn mehler_spectral(group: &ReflectionGroup, t: f64, x: &[f64], y: &[f64], n: u32) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("kernel time must be positive, got {t}"));
    }
    let n = n as usize;
    let mut acc = vec![0.0; n + 1];
    acc[0] = 1.0;
    for j in 0..group.d() {
        let b = Hermite1d::new(group.kappa()[j], n)?;
        let px = b.phi(x[j]);
        let py = b.phi(y[j]);
        let v: Vec<f64> = (0..=n).map(|k| (-2.0 * k as f64 * t).exp() * px[k] * py[k]).collect();
        let mut next = vec![0.0; n + 1];
        for (a, &ca) in acc.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for (b_, &vb) in v.iter().enumerate().take(n + 1 - a) {
                next[a + b_] += ca * vb;
            }
        }
        acc = next;
    }
    let base = (-(group.d() as f64 + 2.0 * group.gamma()) * t).exp();
    Ok(base * acc.iter().sum::<f64>())
}

/// Coefficient-space pairing `<R_j f, g> - <f, R_j* g>` with the displayed
/// `R_j*`; nonzero values show the display is not the Hilbert adjoint.
pub fn riesz_star_adjoint_defect(f: &SpectralCoeffs, g: &SpectralCoeffs, j: usize, ladder: &LadderTable) -> f64 {
    f.apply_riesz(j, ladder).inner(g) - f.inner(&g.apply_riesz_star(j, ladder))
}

/// Exact identity check helper: `Q_alpha` as a float polynomial.
pub fn hermite_poly_float(group: &ReflectionGroup, alpha: &[u32]) -> Result<Poly<f64>> {
    Ok(hermite_poly_exact(group, alpha)?.to_float())
}
