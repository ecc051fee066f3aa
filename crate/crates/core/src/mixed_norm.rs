//! Weighted mixed norms `L^{p,2}`, power weights in the Muckenhoupt class for
//! `d mu_delta`, and the harnesses comparing Riesz transforms with their
//! radial (Laguerre) descriptions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dunkl::ReflectionGroup;
use crate::error::{domain, Error, Result};
use crate::hermite::{Hermite1d, LadderTable, PointTables, SpectralCoeffs};
use crate::hharmonics::{fit_constant, project_radial, verify_spherical_energy, HHarmonicBasis, LambdaCandidate};
use crate::laguerre::LaguerreCoeffs;
use crate::quadrature::{gauss_jacobi, radial_rule, sphere_rule, GaussRule, SphereRule};

/// `w(r) = r^a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerWeight {
    pub a: f64,
}

impl PowerWeight {
    pub fn new(a: f64) -> Self {
        PowerWeight { a }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.a == 0.0 {
            1.0
        } else {
            r.powf(self.a)
        }
    }

    /// `w^(1 - p')`, the dual weight.
    pub fn dual(&self, p: f64) -> Self {
        let pc = conjugate(p);
        PowerWeight { a: self.a * (1.0 - pc) }
    }
}

/// `p' = p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `delta = d/2 + gamma - 1`, so that `r^(d + 2 gamma - 1) dr = d mu_delta`.
pub fn radial_index(group: &ReflectionGroup) -> f64 {
    group.d() as f64 / 2.0 + group.gamma() - 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedNormParams {
    pub p: f64,
    pub group: ReflectionGroup,
    pub weight: PowerWeight,
    /// Size parameter of the inner sphere rule.
    pub sphere_n: usize,
}

impl MixedNormParams {
    pub fn new(group: &ReflectionGroup, p: f64, weight: PowerWeight, sphere_n: usize) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return domain(format!("p must lie in (1, inf), got {p}"));
        }
        if group.d() < 2 {
            return domain("mixed norms need d >= 2");
        }
        Ok(MixedNormParams { p, group: group.clone(), weight, sphere_n })
    }

    pub fn conjugate(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn delta(&self) -> f64 {
        radial_index(&self.group)
    }
}

/// Largest radius scanned for the truncation point.
const R_SCAN_MAX: f64 = 64.0;
const R_SCAN_STEP: f64 = 0.25;
const UNIFORM_PANELS: usize = 12;
const GRADED_LEVELS: usize = 30;

/// Composite Gauss–Legendre nodes for `dr` on `[0, R*]`, with the first panel
/// refined geometrically toward the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub r_star: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_star: f64) -> Result<Self> {
        if !(r_star > 0.0) {
            return domain(format!("truncation radius must be positive, got {r_star}"));
        }
        let fine = gauss_jacobi(0.0, 0.0, 16)?;
        let coarse = gauss_jacobi(0.0, 0.0, 8)?;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut push = |rule: &GaussRule, a: f64, b: f64| {
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(a + 0.5 * (b - a) * (x + 1.0));
                weights.push(0.5 * (b - a) * w);
            }
        };
        let h = r_star / UNIFORM_PANELS as f64;
        let mut b = h;
        for _ in 0..GRADED_LEVELS {
            push(&coarse, 0.5 * b, b);
            b *= 0.5;
        }
        for k in 1..UNIFORM_PANELS {
            push(&fine, k as f64 * h, (k + 1) as f64 * h);
        }
        Ok(RadialGrid { r_star, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// First scanned radius past the peak beyond which `g` stays below
/// `rel * peak`; an accuracy error when the scan runs out.
pub fn truncation_radius(g: impl Fn(f64) -> f64, rel: f64) -> Result<f64> {
    let mut peak = 0.0_f64;
    let mut below = 0;
    let mut r = R_SCAN_STEP;
    let mut first_below = r;
    while r <= R_SCAN_MAX {
        let v = g(r);
        if !v.is_finite() {
            return Err(Error::Accuracy(format!("integrand not finite at r = {r}")));
        }
        if v > peak {
            peak = v;
            below = 0;
        } else if v < rel * peak {
            if below == 0 {
                first_below = r;
            }
            below += 1;
            if below == 4 {
                return Ok(first_below);
            }
        } else {
            below = 0;
        }
        r += R_SCAN_STEP;
    }
    if peak == 0.0 {
        return Ok(R_SCAN_STEP);
    }
    Err(Error::Accuracy(format!("radial tail does not decay below {rel:e} of its peak by r = {R_SCAN_MAX}")))
}

/// Sphere energies `S(r) = int |f(r omega)|^2 h^2 dsigma` on a radial grid.
#[derive(Debug, Clone)]
pub struct EnergyProfile {
    pub grid: RadialGrid,
    pub energy: Vec<f64>,
}

impl EnergyProfile {
    /// `(int S^(p/2) w d mu_delta)^(1/p)`.
    pub fn norm(&self, p: f64, weight: PowerWeight, delta: f64) -> f64 {
        let e = weight.a + 2.0 * delta + 1.0;
        let s: f64 = self
            .grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.energy)
            .map(|((r, w), s)| w * s.max(0.0).powf(p / 2.0) * r.powf(e))
            .sum();
        s.powf(1.0 / p)
    }

    /// Contributions of the dyadic blocks `[2^j, 2^(j+1))` to the `p`-th power.
    pub fn dyadic_blocks(&self, p: f64, weight: PowerWeight, delta: f64, j_max: u32) -> Vec<f64> {
        let e = weight.a + 2.0 * delta + 1.0;
        let mut out = vec![0.0; j_max as usize + 1];
        for ((r, w), s) in self.grid.nodes.iter().zip(&self.grid.weights).zip(&self.energy) {
            if *r < 1.0 {
                continue;
            }
            let j = r.log2().floor() as usize;
            if j <= j_max as usize {
                out[j] += w * s.max(0.0).powf(p / 2.0) * r.powf(e);
            }
        }
        out
    }
}

fn sphere_energy_at(f: &impl Fn(&[f64]) -> f64, rule: &SphereRule, r: f64) -> f64 {
    rule.integrate(|w| {
        let x: Vec<f64> = w.iter().map(|c| r * c).collect();
        f(&x).powi(2)
    })
}

/// Mixed norm with the truncation point used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedNorm {
    pub value: f64,
    pub r_star: f64,
}

/// `(int_0^inf (int |f(r omega)|^2 h^2 dsigma)^(p/2) w(r) r^(d+2gamma-1) dr)^(1/p)`,
/// truncated where the integrand drops below `1e-16` of its peak.
pub fn mixed_norm(f: impl Fn(&[f64]) -> f64, params: &MixedNormParams) -> Result<MixedNorm> {
    let g = &params.group;
    let rule = sphere_rule(g.d(), g.kappa(), params.sphere_n)?;
    let delta = params.delta();
    let (p, w) = (params.p, params.weight);
    let integrand = |r: f64| sphere_energy_at(&f, &rule, r).powf(p / 2.0) * w.eval(r) * r.powf(2.0 * delta + 1.0);
    let r_star = truncation_radius(integrand, 1e-16)?;
    let grid = RadialGrid::new(r_star)?;
    let energy = grid.nodes.iter().map(|&r| sphere_energy_at(&f, &rule, r)).collect();
    let prof = EnergyProfile { grid, energy };
    Ok(MixedNorm { value: prof.norm(p, w, delta), r_star })
}

/// Energy profile for `f` with the truncation chosen from `S` alone, so that
/// one profile serves every `p` and power weight: `S < 1e-32 * peak`.
pub fn energy_profile(f: impl Fn(&[f64]) -> f64, group: &ReflectionGroup, sphere_n: usize) -> Result<EnergyProfile> {
    let rule = sphere_rule(group.d(), group.kappa(), sphere_n)?;
    let r_star = truncation_radius(|r| sphere_energy_at(&f, &rule, r), 1e-32)?;
    let grid = RadialGrid::new(r_star)?;
    let energy = grid.nodes.iter().map(|&r| sphere_energy_at(&f, &rule, r)).collect();
    Ok(EnergyProfile { grid, energy })
}

/// `<f, g> = int f g h^2 dx`, on the same grid construction as the norms.
pub fn pairing(
    f: impl Fn(&[f64]) -> f64,
    g: impl Fn(&[f64]) -> f64,
    group: &ReflectionGroup,
    sphere_n: usize,
) -> Result<f64> {
    let rule = sphere_rule(group.d(), group.kappa(), sphere_n)?;
    let prod = |x: &[f64]| f(x) * g(x);
    let r_star = truncation_radius(
        |r| {
            rule.integrate(|w| {
                let x: Vec<f64> = w.iter().map(|c| r * c).collect();
                prod(&x).abs()
            })
        },
        1e-32,
    )?;
    let grid = RadialGrid::new(r_star)?;
    let e = 2.0 * radial_index(group) + 1.0;
    let mut acc = 0.0;
    for (&r, &wr) in grid.nodes.iter().zip(&grid.weights) {
        let inner = rule.integrate(|w| {
            let x: Vec<f64> = w.iter().map(|c| r * c).collect();
            prod(&x)
        });
        acc += wr * inner * r.powf(e);
    }
    Ok(acc)
}

/// `int_u^v r^b dr`; `+inf` when the integral diverges at `u = 0`.
fn power_integral(b: f64, u: f64, v: f64) -> Result<f64> {
    if u == 0.0 {
        if b <= -1.0 {
            return Ok(f64::INFINITY);
        }
        // r = v (1 + y) / 2 with the Jacobi weight (1 + y)^b
        let rule = gauss_jacobi(0.0, b, 2)?;
        return Ok((v / 2.0).powf(b + 1.0) * rule.weights.iter().sum::<f64>());
    }
    // r = e^s: an entire integrand on [ln u, ln v]
    let gl = gauss_jacobi(0.0, 0.0, 24)?;
    let (lu, lv) = (u.ln(), v.ln());
    let panels = (((lv - lu) * (b + 1.0).abs()).ceil() as usize).clamp(1, 256);
    let h = (lv - lu) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let a = lu + k as f64 * h;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let s = a + 0.5 * h * (x + 1.0);
            acc += 0.5 * h * w * ((b + 1.0) * s).exp();
        }
    }
    Ok(acc)
}

/// `A_p` quotient of `w` on `[u, v]` for `d mu_delta`:
/// `(mu(I)^-1 int_I w d mu) (mu(I)^-1 int_I w^(-1/(p-1)) d mu)^(p-1)`.
/// `+inf` marks a non-integrable factor.
pub fn ap_quotient(weight: PowerWeight, u: f64, v: f64, p: f64, delta: f64) -> Result<f64> {
    if !(0.0 <= u && u < v) {
        return domain(format!("interval [{u}, {v}] must satisfy 0 <= u < v"));
    }
    if !(p > 1.0) {
        return domain(format!("p must exceed 1, got {p}"));
    }
    let e = 2.0 * delta + 1.0;
    if weight.a == 0.0 {
        return Ok(1.0);
    }
    let mu = power_integral(e, u, v)?;
    let a1 = power_integral(weight.a + e, u, v)? / mu;
    let a2 = power_integral(-weight.a / (p - 1.0) + e, u, v)? / mu;
    if !a1.is_finite() || !a2.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(a1 * a2.powf(p - 1.0))
}

/// Admissibility of `r^a` in `A_p` for `d mu_delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApVerdict {
    pub a: f64,
    pub p: f64,
    pub delta: f64,
    /// `-(2 delta + 2) < a < (2 delta + 2)(p - 1)`
    pub admissible: bool,
    /// Distance to the nearer end of the admissible interval (negative outside).
    pub margin: f64,
    /// Largest sampled quotient.
    pub sampled_sup: f64,
    /// Whether the sampled supremum is finite exactly when admissible.
    pub consistent: bool,
}

/// Interval family for sampling the quotient supremum.
fn sample_intervals() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for k in -6..=6 {
        let v = 10f64.powi(k);
        out.push((0.0, v));
        out.push((v, 2.0 * v));
        out.push((v, 1e3 * v));
    }
    out
}

pub fn ap_check(a: f64, p: f64, delta: f64) -> Result<ApVerdict> {
    if !(p > 1.0) || !(delta >= -0.5) {
        return domain(format!("ap_check needs p > 1 and delta >= -1/2, got p = {p}, delta = {delta}"));
    }
    let lo = -(2.0 * delta + 2.0);
    let hi = (2.0 * delta + 2.0) * (p - 1.0);
    let admissible = lo < a && a < hi;
    let margin = (a - lo).min(hi - a);
    let mut sup = 0.0_f64;
    for (u, v) in sample_intervals() {
        sup = sup.max(ap_quotient(PowerWeight::new(a), u, v, p, delta)?);
    }
    Ok(ApVerdict { a, p, delta, admissible, margin, sampled_sup: sup, consistent: admissible == sup.is_finite() })
}

/// `int_0^R w d mu_delta / R^(2p(delta+1))` for each `R`.
pub fn growth_ratios(a: f64, p: f64, delta: f64, radii: &[f64]) -> Result<Vec<f64>> {
    radii
        .iter()
        .map(|&r| Ok(power_integral(a + 2.0 * delta + 1.0, 0.0, r)? / r.powf(2.0 * p * (delta + 1.0))))
        .collect()
}

/// Point evaluation of several expansions sharing one set of 1D tables.
struct Synth {
    tables: Vec<Hermite1d>,
}

impl Synth {
    fn new(group: &ReflectionGroup, nmax: usize) -> Result<Self> {
        Ok(Synth { tables: group.kappa().iter().map(|&k| Hermite1d::new(k, nmax)).collect::<Result<_>>()? })
    }

    fn eval_all(&self, fs: &[&SpectralCoeffs], x: &[f64]) -> Vec<f64> {
        let pt = PointTables::new(&self.tables, x);
        fs.iter().map(|f| f.iter().map(|(a, c)| c * pt.phi(a)).sum()).collect()
    }
}

/// Energy profiles of several expansions on one grid, truncated where every
/// profile is below `1e-32` of its own peak.
fn joint_profiles(fs: &[&SpectralCoeffs], sphere_n: usize) -> Result<Vec<EnergyProfile>> {
    let group = fs[0].group();
    let nmax = fs.iter().map(|f| f.truncation()).max().unwrap_or(0) as usize;
    let synth = Synth::new(group, nmax)?;
    let rule = sphere_rule(group.d(), group.kappa(), sphere_n)?;
    let energies = |r: f64| -> Vec<f64> {
        let mut acc = vec![0.0; fs.len()];
        for (w, wt) in rule.iter() {
            let x: Vec<f64> = w.iter().map(|c| r * c).collect();
            for (s, v) in acc.iter_mut().zip(synth.eval_all(fs, &x)) {
                *s += wt * v * v;
            }
        }
        acc
    };
    let mut r_star = R_SCAN_STEP;
    for i in 0..fs.len() {
        r_star = r_star.max(truncation_radius(|r| energies(r)[i], 1e-32)?);
    }
    let grid = RadialGrid::new(r_star)?;
    let table: Vec<Vec<f64>> = grid.nodes.iter().map(|&r| energies(r)).collect();
    Ok((0..fs.len())
        .map(|i| EnergyProfile { grid: grid.clone(), energy: table.iter().map(|row| row[i]).collect() })
        .collect())
}

/// Sphere rule size adequate for `|f|^2` with `f` of degree `n`.
pub fn probe_sphere_size(n: u32) -> usize {
    n as usize / 2 + 2
}

/// One row of the norm-ratio probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub trial: usize,
    pub n: u32,
    pub p: f64,
    pub a: f64,
    /// `1..=d` for a single transform, `0` for the vector `(sum_j |R_j f|^2)^(1/2)`.
    pub j: usize,
    pub ratio: f64,
}

/// Supremum over trials for one `(N, p, a, j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSup {
    pub n: u32,
    pub p: f64,
    pub a: f64,
    pub j: usize,
    pub sup_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTable {
    pub seed: u64,
    pub rows: Vec<ProbeRow>,
    pub sups: Vec<ProbeSup>,
}

impl ProbeTable {
    pub fn sup(&self, n: u32, p: f64, a: f64, j: usize) -> Option<f64> {
        self.sups.iter().find(|s| s.n == n && s.p == p && s.a == a && s.j == j).map(|s| s.sup_ratio)
    }
}

/// Settings of [`norm_ratio_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSettings {
    pub group: ReflectionGroup,
    /// `(p, a)` pairs, each an admissible power weight `r^a` for `p`.
    pub weights: Vec<(f64, f64)>,
    pub n_list: Vec<u32>,
    pub trials: usize,
    pub seed: u64,
}

/// Random `f` in `V_G` per truncation and trial (drawn sequentially from one
/// seeded stream), ratios `||R_j f|| / ||f||` in every requested mixed norm.
/// Trials run in parallel and are merged in trial order.
pub fn norm_ratio_probe(s: &ProbeSettings) -> Result<ProbeTable> {
    let delta = radial_index(&s.group);
    for &(p, a) in &s.weights {
        if !ap_check(a, p, delta)?.admissible {
            return Err(Error::Precondition(format!("weight r^{a} is not in A_p for p = {p}, delta = {delta}")));
        }
    }
    let d = s.group.d();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut rows = Vec::new();
    let mut sups = Vec::new();
    for &n in &s.n_list {
        let fs: Vec<SpectralCoeffs> =
            (0..s.trials).map(|_| SpectralCoeffs::random_invariant(&s.group, n, &mut rng)).collect();
        let ladder = LadderTable::closed_form(&s.group, n as usize + 2);
        let sphere_n = probe_sphere_size(n);
        let per_trial: Vec<Vec<ProbeRow>> = fs
            .par_iter()
            .enumerate()
            .map(|(trial, f)| -> Result<Vec<ProbeRow>> {
                let rs: Vec<SpectralCoeffs> = (0..d).map(|j| f.apply_riesz(j, &ladder)).collect();
                let mut refs: Vec<&SpectralCoeffs> = vec![f];
                refs.extend(rs.iter());
                let profs = joint_profiles(&refs, sphere_n)?;
                let vec_energy: Vec<f64> =
                    (0..profs[0].energy.len()).map(|i| profs[1..].iter().map(|p| p.energy[i]).sum()).collect();
                let vec_prof = EnergyProfile { grid: profs[0].grid.clone(), energy: vec_energy };
                let mut out = Vec::new();
                for &(p, a) in &s.weights {
                    let w = PowerWeight::new(a);
                    let base = profs[0].norm(p, w, delta);
                    for j in 0..=d {
                        let num = if j == 0 { vec_prof.norm(p, w, delta) } else { profs[j].norm(p, w, delta) };
                        out.push(ProbeRow { trial, n, p, a, j, ratio: num / base });
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let flat: Vec<ProbeRow> = per_trial.into_iter().flatten().collect();
        for &(p, a) in &s.weights {
            for j in 0..=d {
                let sup = flat.iter().filter(|r| r.p == p && r.a == a && r.j == j).map(|r| r.ratio).fold(0.0, f64::max);
                sups.push(ProbeSup { n, p, a, j, sup_ratio: sup });
            }
        }
        rows.extend(flat);
    }
    Ok(ProbeTable { seed: s.seed, rows, sups })
}

/// Radial derivative `<grad F(x), x/|x|>` of an expansion.
fn radial_derivative(f: &SpectralCoeffs, tables: &[Hermite1d], x: &[f64]) -> f64 {
    let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let vals: Vec<_> = tables.iter().zip(x).map(|(t, &xi)| t.values(xi)).collect();
    let mut acc = 0.0;
    for (alpha, c) in f.iter() {
        let mut grad_dot = 0.0;
        for j in 0..x.len() {
            let mut prod = vals[j].dphi[alpha[j] as usize];
            for (i, v) in vals.iter().enumerate() {
                if i != j {
                    prod *= v.phi[alpha[i] as usize];
                }
            }
            grad_dot += x[j] / r * prod;
        }
        acc += c * grad_dot;
    }
    acc
}

/// Expansion of `g~_{m,j}(s) = s^-m int g(s omega) Y_{m,j} h^2 dsigma` in the
/// Laguerre functions of index `d/2 + gamma + m - 1`, exact for `g` in `V`.
pub fn radial_laguerre_coeffs(basis: &HHarmonicBasis, g: &SpectralCoeffs, m: u32, j: usize) -> Result<LaguerreCoeffs> {
    let delta = radial_index(basis.group()) + m as f64;
    let n = g.truncation();
    let kk = if n >= m { (n - m) as usize / 2 + 1 } else { 1 };
    let rule = radial_rule(delta, kk + 4)?;
    let tables = g.basis_tables();
    let tilde: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&s| project_radial(|x| g.eval_with(&tables, x), basis, m, j, s).map(|p| p.tilde))
        .collect::<Result<_>>()?;
    let mut coeffs = vec![0.0; kk];
    for ((&s, &w), &h) in rule.nodes.iter().zip(&rule.weights).zip(&tilde) {
        let psi = crate::laguerre::psi_all(kk - 1, delta, s);
        for (c, p) in coeffs.iter_mut().zip(psi) {
            *c += w * h * p;
        }
    }
    LaguerreCoeffs::new(delta, coeffs)
}

/// Both relations between `F = H^{-1/2} f` and the Laguerre operators of
/// index `d/2 + gamma + m - 1` acting on `f~_{m,j}`.
#[derive(Debug, Clone, Serialize)]
pub struct LaguerreConnection {
    pub m: u32,
    pub j: usize,
    /// `F_{m,j} ~ c r^m L^{-1/2} f~_{m,j}`
    pub value_constant: Option<f64>,
    pub value_deviation: f64,
    /// `(d/dr + r) F_{m,j} - (m/r) F_{m,j} ~ c r^m R f~_{m,j}`
    pub derivative_constant: Option<f64>,
    pub derivative_deviation: f64,
}

pub fn verify_laguerre_connection(
    basis: &HHarmonicBasis,
    f: &SpectralCoeffs,
    m: u32,
    j: usize,
    r_grid: &[f64],
) -> Result<LaguerreConnection> {
    check_invariant_input(basis, f)?;
    let big_f = f.apply_h_inv_sqrt();
    let tables = big_f.basis_tables();
    let ft = radial_laguerre_coeffs(basis, f, m, j)?;
    let inv = ft.l_inv_sqrt();
    let mut lhs_v = Vec::new();
    let mut rhs_v = Vec::new();
    let mut lhs_d = Vec::new();
    let mut rhs_d = Vec::new();
    for &r in r_grid {
        let fm = project_radial(|x| big_f.eval_with(&tables, x), basis, m, j, r)?.value;
        let dfm = project_radial(|x| radial_derivative(&big_f, &tables, x), basis, m, j, r)?.value;
        let rm = r.powi(m as i32);
        lhs_v.push(fm);
        rhs_v.push(rm * inv.eval(r));
        lhs_d.push(dfm + r * fm - m as f64 / r * fm);
        rhs_d.push(rm * inv.eval_raised(r));
    }
    let (value_constant, value_deviation) = fit_constant(&lhs_v, &rhs_v, f.norm(), 1e-13);
    let (derivative_constant, derivative_deviation) = fit_constant(&lhs_d, &rhs_d, f.norm(), 1e-13);
    Ok(LaguerreConnection { m, j, value_constant, value_deviation, derivative_constant, derivative_deviation })
}

fn check_invariant_input(basis: &HHarmonicBasis, f: &SpectralCoeffs) -> Result<()> {
    if f.group() != basis.group() {
        return domain("expansion and basis use different groups");
    }
    if f.truncation() > basis.m_max() {
        return Err(Error::Precondition(format!(
            "basis degree {} is below the truncation {}",
            basis.m_max(),
            f.truncation()
        )));
    }
    Ok(())
}

/// Per-radius comparison of `int |R f|^2 h^2 dsigma` with `A_1^2 + A_2^2`.
#[derive(Debug, Clone, Serialize)]
pub struct RieszDecomposition {
    pub candidate: LambdaCandidate,
    pub r: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `|lhs - rhs| / |lhs|` per radius.
    pub residual: Vec<f64>,
    /// `(m, lambda)` used per invariant degree.
    pub lambdas: Vec<(u32, f64)>,
    /// Candidate closest to the measured energy, per degree with `m > 0`.
    pub measured_matches: Vec<(u32, LambdaCandidate)>,
}

impl RieszDecomposition {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Radial decomposition of the Riesz vector of a `G`-invariant expansion.
/// `f` is symmetrized first.
pub fn verify_riesz_decomposition(
    basis: &HHarmonicBasis,
    f: &SpectralCoeffs,
    ladder: &LadderTable,
    r_grid: &[f64],
    candidate: LambdaCandidate,
) -> Result<RieszDecomposition> {
    let group = basis.group();
    if group.d() != 2 {
        return domain("the Riesz decomposition suite is run for d = 2");
    }
    check_invariant_input(basis, f)?;
    let f = f.g_symmetrize();
    let d = group.d();
    let n = f.truncation();
    let rs: Vec<SpectralCoeffs> = (0..d).map(|j| f.apply_riesz(j, ladder)).collect();
    let refs: Vec<&SpectralCoeffs> = rs.iter().collect();
    let synth = Synth::new(group, n as usize)?;
    let rule = basis.rule();
    let lam = group.lambda_kappa();
    let mut terms = Vec::new();
    let mut lambdas = Vec::new();
    let mut measured_matches = Vec::new();
    for m in 0..=n {
        let energy = if basis.invariant_dim(m) > 0 && m > 0 { Some(verify_spherical_energy(basis, m)?) } else { None };
        if let Some(e) = &energy {
            measured_matches.push((m, e.matches));
        }
        let mut inv = 0;
        for (j, y) in basis.level(m).iter().enumerate() {
            if !y.g_invariant {
                continue;
            }
            let l = match candidate {
                LambdaCandidate::Measured => energy.as_ref().map(|e| e.quotients[inv]).unwrap_or(0.0),
                c => c.formula(m, lam).unwrap(),
            };
            inv += 1;
            lambdas.push((m, l));
            let ft = radial_laguerre_coeffs(basis, &f, m, j)?;
            terms.push((m, l, ft.l_inv_sqrt()));
        }
    }
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut residual = Vec::new();
    for &r in r_grid {
        let mut l = 0.0;
        for (w, wt) in rule.iter() {
            let x: Vec<f64> = w.iter().map(|c| r * c).collect();
            l += wt * synth.eval_all(&refs, &x).iter().map(|v| v * v).sum::<f64>();
        }
        let mut a = 0.0;
        for (m, lm, g) in &terms {
            let rm = r.powi(*m as i32);
            let fm = rm * g.eval(r);
            let raised = rm * g.eval_raised(r) + *m as f64 / r * fm;
            a += raised * raised + lm / (r * r) * fm * fm;
        }
        lhs.push(l);
        rhs.push(a);
        residual.push((l - a).abs() / l.abs().max(1e-300));
    }
    Ok(RieszDecomposition { candidate, r: r_grid.to_vec(), lhs, rhs, residual, lambdas, measured_matches })
}

/// Both sides of the rotation-average identity in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationAverage {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, expected `(2 pi)^(1 - p/2)` for normalized Haar measure.
    pub constant: f64,
}

/// Angles for the Haar average over `SO(2)` and the outer angular integral;
/// the trapezoid rule is exact for trigonometric degree below this.
const ROTATION_SAMPLES: usize = 48;

/// `int_{R^2} (int_K |f(k x)|^2 dk)^(p/2) w(|x|) dx` against
/// `int_0^inf (int_{S^1} |f(r omega)|^2 dsigma)^(p/2) w(r) r dr`, unweighted sphere.
pub fn rotation_average_check(f: impl Fn(&[f64]) -> f64, p: f64, weight: PowerWeight) -> Result<RotationAverage> {
    if !(p > 1.0) {
        return domain(format!("p must exceed 1, got {p}"));
    }
    let circle = sphere_rule(2, &[0.0, 0.0], 24)?;
    let energy = |r: f64| circle.integrate(|w| f(&[r * w[0], r * w[1]]).powi(2));
    let r_star = truncation_radius(|r| energy(r).powf(p / 2.0) * weight.eval(r) * r, 1e-16)?;
    let grid = RadialGrid::new(r_star)?;
    let tau = 2.0 * std::f64::consts::PI;
    let m = ROTATION_SAMPLES;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (&r, &wr) in grid.nodes.iter().zip(&grid.weights) {
        let mut outer = 0.0;
        for i in 0..m {
            let th = tau * (i as f64 + 0.5) / m as f64;
            let (x, y) = (r * th.cos(), r * th.sin());
            let mut avg = 0.0;
            for k in 0..m {
                let phi = tau * k as f64 / m as f64;
                let (c, s) = (phi.cos(), phi.sin());
                avg += f(&[c * x - s * y, s * x + c * y]).powi(2);
            }
            avg /= m as f64;
            outer += avg.powf(p / 2.0);
        }
        lhs += wr * r * weight.eval(r) * outer * tau / m as f64;
        rhs += wr * r * weight.eval(r) * energy(r).powf(p / 2.0);
    }
    Ok(RotationAverage { lhs, rhs, constant: lhs / rhs })
}
