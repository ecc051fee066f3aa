//! h-harmonics for Z2^d.
//!
//! A basis of degree `m` is the kernel of `Delta_kappa` on homogeneous
//! polynomials of degree `m`. The Laplacian preserves the parity class of an
//! exponent, so the kernel is computed class by class. Two different classes
//! are orthogonal on the sphere, and inside a class the inner product of two
//! degree-`m` monomials is, up to a factor depending only on `m`, the rational
//! number `prod_j (kappa_j + 1/2)_((a_j + b_j) / 2)`. Orthogonalization is
//! therefore exact for rational multiplicities; only the final normalization
//! is floating point.

use num::BigRational;
use serde::Serialize;

use crate::dunkl::{
    dunkl_gradient, dunkl_laplacian, dunkl_op, h_weight_sq, ln_dunkl_kernel, KappaRing, ReflectionGroup,
};
use crate::error::{domain, Error, Result};
use crate::hermite::{Hermite1d, SpectralCoeffs};
use crate::laguerre::ln_heat_kernel_closed;
use crate::poly::{Coeff, Exponent, FloatPoly, Poly};
use crate::quadrature::{gauss_jacobi, radial_rule_scaled, sphere_rule, SphereRule};
use crate::specfun::{bessel_j, gegenbauer_at_one, gegenbauer_poly, ln_bessel_i, log_beta, log_gamma};

/// Largest degree accepted by [`build_basis`].
pub const MAX_DEGREE: u32 = 16;
/// Largest dimension accepted by [`build_basis`].
pub const MAX_DIM: usize = 4;
/// Residual tolerance for the floating kernel used with irrational `kappa`.
pub const FLOAT_KERNEL_TOL: f64 = 1e-10;

/// A homogeneous polynomial annihilated by `Delta_kappa`, normalized in
/// `L^2(S^(d-1), h_kappa^2 dsigma)`.
#[derive(Debug, Clone)]
pub struct SolidHHarmonic {
    pub degree: u32,
    /// Exponent parities (0 or 1) shared by every monomial of the member.
    pub parity: Vec<u32>,
    /// Exact orthogonalized generator when `kappa` is rational; the member is
    /// `scale * exact`.
    pub exact: Option<Poly<BigRational>>,
    pub scale: f64,
    pub poly: FloatPoly,
    /// Even in every coordinate.
    pub g_invariant: bool,
    grad: Vec<FloatPoly>,
}

impl SolidHHarmonic {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.poly.eval(x)
    }

    /// Dunkl gradient polynomials `T_j Y`.
    pub fn gradient_polys(&self) -> &[FloatPoly] {
        &self.grad
    }

    /// `nabla^kappa Y (x)`.
    pub fn dunkl_gradient_at(&self, x: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval(x)).collect()
    }
}

/// Orthonormal h-harmonics of degrees `0..=m_max`, `G`-invariant members
/// first within each degree.
#[derive(Debug, Clone)]
pub struct HHarmonicBasis {
    group: ReflectionGroup,
    m_max: u32,
    levels: Vec<Vec<SolidHHarmonic>>,
    rule: SphereRule,
    gram_residual: f64,
}

/// `dim H_m = C(m+d-1, d-1) - C(m+d-3, d-1)`.
pub fn harmonic_dim(d: usize, m: u32) -> usize {
    let count = |k: i64| -> usize {
        if k < 0 {
            0
        } else {
            binomial(k as usize + d - 1, d - 1)
        }
    };
    count(m as i64) - count(m as i64 - 2)
}

/// Dimension of the `G`-invariant part of `H_m`.
pub fn invariant_dim(d: usize, m: u32) -> usize {
    if m % 2 == 1 {
        return 0;
    }
    let h = (m / 2) as usize;
    if d == 1 {
        return usize::from(h == 0);
    }
    binomial(h + d - 2, d - 2)
}

fn binomial(n: usize, k: usize) -> usize {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Exponents of total degree `m` in `d` variables with the given parities,
/// in descending lexicographic order.
fn monomials(d: usize, m: u32, parity: &[u32]) -> Vec<Exponent> {
    fn rec(j: usize, left: u32, parity: &[u32], cur: &mut Exponent, out: &mut Vec<Exponent>) {
        let d = parity.len();
        if j == d - 1 {
            if left % 2 == parity[j] {
                cur[j] = left;
                out.push(cur.clone());
            }
            return;
        }
        let mut k = left as i64;
        while k >= 0 {
            if k as u32 % 2 == parity[j] {
                cur[j] = k as u32;
                rec(j + 1, left - k as u32, parity, cur, out);
            }
            k -= 1;
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; d];
    rec(0, m, parity, &mut cur, &mut out);
    out
}

/// Parity classes compatible with degree `m`, all-even class first.
fn parity_classes(d: usize, m: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for bits in 0..(1u32 << d) {
        let p: Vec<u32> = (0..d).map(|j| (bits >> (d - 1 - j)) & 1).collect();
        let ones: u32 = p.iter().sum();
        if ones <= m && (m - ones).is_multiple_of(2) {
            out.push(p);
        }
    }
    out
}

fn is_negligible<C: Coeff>(c: &C, tol: f64) -> bool {
    c.is_zero() || c.abs_coeff().to_f64() <= tol
}

/// Kernel of a dense matrix by row reduction. `tol = 0` means exact.
fn kernel<C: Coeff>(mut a: Vec<Vec<C>>, cols: usize, tol: f64) -> (Vec<Vec<C>>, usize) {
    let rows = a.len();
    let scale = a.iter().flatten().map(|c| c.abs_coeff().to_f64()).fold(0.0, f64::max);
    let thresh = tol * scale.max(1.0);
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows)
            .filter(|&i| !is_negligible(&a[i][c], thresh))
            .max_by(|&i, &k| a[i][c].abs_coeff().to_f64().total_cmp(&a[k][c].abs_coeff().to_f64()));
        let Some(p) = best else { continue };
        a.swap(r, p);
        let inv = C::one() / a[r][c].clone();
        for v in a[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..cols {
                    let sub = f.clone() * a[r][k].clone();
                    a[i][k] = a[i][k].clone() - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let rank = pivots.len();
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![C::zero(); cols];
        v[free] = C::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[i][free].clone();
        }
        out.push(v);
    }
    (out, rank)
}

/// Moment form `<P, Q> = sum c_a c'_b prod_j (kappa_j + 1/2)_((a_j+b_j)/2)`,
/// proportional to the sphere inner product for degree-`m` polynomials.
struct MomentForm<C> {
    poch: Vec<Vec<C>>,
}

impl<C: KappaRing> MomentForm<C> {
    fn new(group: &ReflectionGroup, m: u32) -> Result<Self> {
        let half = C::one() / C::from_int(2);
        let mut poch = Vec::with_capacity(group.d());
        for j in 0..group.d() {
            let base = group.kappa_in::<C>(j)? + half.clone();
            let mut row = vec![C::one()];
            for k in 0..m as i64 {
                let next = row.last().unwrap().clone() * (base.clone() + C::from_int(k));
                row.push(next);
            }
            poch.push(row);
        }
        Ok(MomentForm { poch })
    }

    fn inner(&self, p: &Poly<C>, q: &Poly<C>) -> C {
        let mut acc = C::zero();
        for (a, ca) in p.terms() {
            for (b, cb) in q.terms() {
                if a.iter().zip(b).any(|(x, y)| (x + y) % 2 == 1) {
                    continue;
                }
                let mut w = ca.clone() * cb.clone();
                for (j, (x, y)) in a.iter().zip(b).enumerate() {
                    w = w * self.poch[j][((x + y) / 2) as usize].clone();
                }
                acc = acc + w;
            }
        }
        acc
    }
}

/// Exact (or floating) kernel of `Delta_kappa` in one parity class,
/// orthogonalized for the moment form.
fn class_members<C: KappaRing>(group: &ReflectionGroup, m: u32, parity: &[u32], tol: f64) -> Result<Vec<Poly<C>>> {
    let d = group.d();
    let sources = monomials(d, m, parity);
    let targets = if m >= 2 { monomials(d, m - 2, parity) } else { Vec::new() };
    let expected = sources.len() - targets.len();
    let gens: Vec<Poly<C>> = if targets.is_empty() {
        sources.iter().map(|e| Poly::monomial(e.clone(), C::one())).collect()
    } else {
        let mut a = vec![vec![C::zero(); sources.len()]; targets.len()];
        for (c, e) in sources.iter().enumerate() {
            let lap = dunkl_laplacian(group, &Poly::monomial(e.clone(), C::one()))?;
            for (r, t) in targets.iter().enumerate() {
                a[r][c] = lap.coeff(t);
            }
        }
        let (vecs, rank) = kernel(a, sources.len(), tol);
        if vecs.len() != expected {
            return Err(Error::Construction(format!(
                "degree {m}, parity {parity:?}: kernel dimension {} (rank {rank}) but expected {expected}; \
                 {} monomials onto {}",
                vecs.len(),
                sources.len(),
                targets.len()
            )));
        }
        vecs.into_iter()
            .map(|v| {
                let mut p = Poly::zero(d);
                for (e, c) in sources.iter().zip(v) {
                    p.add_term(e.clone(), c);
                }
                p
            })
            .collect()
    };
    let form = MomentForm::<C>::new(group, m)?;
    let passes = if tol == 0.0 { 1 } else { 2 };
    let mut out: Vec<Poly<C>> = Vec::with_capacity(gens.len());
    let mut norms: Vec<C> = Vec::with_capacity(gens.len());
    for g in gens {
        let mut v = g;
        for _ in 0..passes {
            for (u, nu) in out.iter().zip(&norms) {
                let c = form.inner(&v, u) / nu.clone();
                v = v.sub(&u.scale(&c));
            }
        }
        let n = form.inner(&v, &v);
        if is_negligible(&n, 0.0) {
            return Err(Error::Construction(format!("degree {m}, parity {parity:?}: dependent generators")));
        }
        out.push(v);
        norms.push(n);
    }
    Ok(out)
}

/// Sphere rule size used by a basis of top degree `m_max`: exact for the
/// products of two members and their gradients.
pub fn basis_rule_size(m_max: u32) -> usize {
    m_max as usize / 2 + 2
}

/// Builds the orthonormal basis of h-harmonics of degree `<= m_max`.
pub fn build_basis(group: &ReflectionGroup, m_max: u32) -> Result<HHarmonicBasis> {
    let d = group.d();
    if !(2..=MAX_DIM).contains(&d) {
        return domain(format!("h-harmonic bases are built for 2 <= d <= {MAX_DIM}, got {d}"));
    }
    if m_max > MAX_DEGREE {
        return Err(Error::Size(format!("degree {m_max} exceeds {MAX_DEGREE}")));
    }
    let rule = sphere_rule(d, group.kappa(), basis_rule_size(m_max))?;
    let mut levels = Vec::with_capacity(m_max as usize + 1);
    for m in 0..=m_max {
        let mut level = Vec::new();
        for parity in parity_classes(d, m) {
            let invariant = parity.iter().all(|p| *p == 0);
            if group.is_rational() {
                for p in class_members::<BigRational>(group, m, &parity, 0.0)? {
                    level.push(finish_member(group, &rule, m, &parity, invariant, Some(p))?);
                }
            } else {
                for p in class_members::<f64>(group, m, &parity, FLOAT_KERNEL_TOL)? {
                    let mut member = finish_member(group, &rule, m, &parity, invariant, None)?;
                    let norm = rule.integrate(|w| p.eval(w).powi(2)).sqrt();
                    member.scale = 1.0 / norm;
                    member.poly = p.scale(&member.scale);
                    let lap = dunkl_laplacian(group, &member.poly)?;
                    if lap.max_abs_coeff() > FLOAT_KERNEL_TOL * member.poly.max_abs_coeff().max(1.0) {
                        return Err(Error::Construction(format!(
                            "degree {m}: floating Laplacian residual {:e}",
                            lap.max_abs_coeff()
                        )));
                    }
                    member.grad = dunkl_gradient(group, &member.poly)?;
                    level.push(member);
                }
            }
        }
        if level.len() != harmonic_dim(d, m) {
            return Err(Error::Construction(format!(
                "degree {m}: {} members, expected {}",
                level.len(),
                harmonic_dim(d, m)
            )));
        }
        levels.push(level);
    }
    let mut basis = HHarmonicBasis { group: group.clone(), m_max, levels, rule, gram_residual: 0.0 };
    basis.gram_residual = (0..=m_max).map(|m| basis.gram_defect(m)).fold(0.0, f64::max);
    if basis.gram_residual > 1e-10 {
        return Err(Error::Construction(format!("Gram residual {:e} exceeds 1e-10", basis.gram_residual)));
    }
    Ok(basis)
}

fn finish_member(
    group: &ReflectionGroup,
    rule: &SphereRule,
    m: u32,
    parity: &[u32],
    invariant: bool,
    exact: Option<Poly<BigRational>>,
) -> Result<SolidHHarmonic> {
    let d = group.d();
    let (poly, scale, grad) = match &exact {
        Some(p) => {
            let fp = p.to_float();
            let scale = 1.0 / rule.integrate(|w| fp.eval(w).powi(2)).sqrt();
            let grad = dunkl_gradient(group, p)?.iter().map(|g| g.to_float().scale(&scale)).collect();
            (fp.scale(&scale), scale, grad)
        }
        None => (Poly::zero(d), 1.0, Vec::new()),
    };
    Ok(SolidHHarmonic { degree: m, parity: parity.to_vec(), exact, scale, poly, g_invariant: invariant, grad })
}

impl HHarmonicBasis {
    pub fn group(&self) -> &ReflectionGroup {
        &self.group
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    /// Quadrature rule used for every spherical integral of the basis.
    pub fn rule(&self) -> &SphereRule {
        &self.rule
    }

    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    /// `d(m)`.
    pub fn dim(&self, m: u32) -> usize {
        self.levels[m as usize].len()
    }

    /// `d_1(m)`, the number of `G`-invariant members of degree `m`.
    pub fn invariant_dim(&self, m: u32) -> usize {
        self.levels[m as usize].iter().filter(|y| y.g_invariant).count()
    }

    pub fn level(&self, m: u32) -> &[SolidHHarmonic] {
        &self.levels[m as usize]
    }

    /// Member `j` (0-based) of degree `m`.
    pub fn member(&self, m: u32, j: usize) -> &SolidHHarmonic {
        &self.levels[m as usize][j]
    }

    pub fn members(&self) -> impl Iterator<Item = &SolidHHarmonic> {
        self.levels.iter().flatten()
    }

    /// Gram matrix of degree `m` on the basis rule.
    pub fn gram(&self, m: u32) -> Vec<Vec<f64>> {
        let level = self.level(m);
        let vals: Vec<Vec<f64>> = self.rule.iter().map(|(w, _)| level.iter().map(|y| y.eval(w)).collect()).collect();
        let mut g = vec![vec![0.0; level.len()]; level.len()];
        for (v, wt) in vals.iter().zip(&self.rule.weights) {
            for a in 0..level.len() {
                for b in 0..level.len() {
                    g[a][b] += wt * v[a] * v[b];
                }
            }
        }
        g
    }

    fn gram_defect(&self, m: u32) -> f64 {
        let g = self.gram(m);
        let mut worst: f64 = 0.0;
        for (a, row) in g.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let e = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((v - e).abs());
            }
        }
        worst
    }

    /// True iff every exact generator is annihilated by `Delta_kappa` as a
    /// polynomial identity. `None` without exact generators.
    pub fn exact_harmonicity(&self) -> Option<Result<bool>> {
        if !self.group.is_rational() {
            return None;
        }
        let check = || -> Result<bool> {
            for y in self.members() {
                let p = y.exact.as_ref().expect("rational basis keeps generators");
                if !dunkl_laplacian(&self.group, p)?.is_zero() || !p.is_homogeneous() {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        Some(check())
    }

    /// JSON export: canonical polynomial text per member and Gram metadata.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Member<'a> {
            m: u32,
            j: usize,
            g_invariant: bool,
            parity: &'a [u32],
            exact: Option<String>,
            scale: f64,
            poly: String,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            d: usize,
            kappa: &'a [f64],
            m_max: u32,
            gram_residual: f64,
            rule_size: usize,
            dims: Vec<usize>,
            invariant_dims: Vec<usize>,
            members: Vec<Member<'a>>,
        }
        let members = self
            .levels
            .iter()
            .flat_map(|l| l.iter().enumerate())
            .map(|(j, y)| Member {
                m: y.degree,
                j,
                g_invariant: y.g_invariant,
                parity: &y.parity,
                exact: y.exact.as_ref().map(|p| p.to_string()),
                scale: y.scale,
                poly: y.poly.to_string(),
            })
            .collect();
        let doc = Doc {
            d: self.group.d(),
            kappa: self.group.kappa(),
            m_max: self.m_max,
            gram_residual: self.gram_residual,
            rule_size: basis_rule_size(self.m_max),
            dims: (0..=self.m_max).map(|m| self.dim(m)).collect(),
            invariant_dims: (0..=self.m_max).map(|m| self.invariant_dim(m)).collect(),
            members,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// `nabla_0^kappa Q (omega) = nabla^kappa Q (omega) - deg Q * Q(omega) omega`
/// for a homogeneous `Q`, the spherical part of the Dunkl gradient.
pub fn sph_gradient_poly(group: &ReflectionGroup, q: &FloatPoly, omega: &[f64]) -> Result<Vec<f64>> {
    let n = q.degree().unwrap_or(0) as f64;
    let qv = q.eval(omega);
    Ok(dunkl_gradient(group, q)?.iter().zip(omega).map(|(g, w)| g.eval(omega) - n * qv * w).collect())
}

/// Spherical Dunkl gradient of a basis member.
pub fn sph_gradient(y: &SolidHHarmonic, omega: &[f64]) -> Vec<f64> {
    let yv = y.eval(omega);
    let n = y.degree as f64;
    y.grad.iter().zip(omega).map(|(g, w)| g.eval(omega) - n * yv * w).collect()
}

/// Classical tangential gradient `nabla Q (omega) - deg Q * Q(omega) omega`.
pub fn classical_sph_gradient(q: &FloatPoly, omega: &[f64]) -> Vec<f64> {
    let n = q.degree().unwrap_or(0) as f64;
    let qv = q.eval(omega);
    (0..omega.len()).map(|j| q.partial(j).eval(omega) - n * qv * omega[j]).collect()
}

/// `rho Y (omega) = sum_j kappa_j Y(sigma_j omega)`.
pub fn rho_op(group: &ReflectionGroup, y: &FloatPoly, omega: &[f64]) -> f64 {
    let mut w = omega.to_vec();
    let mut acc = 0.0;
    for (j, &k) in group.kappa().iter().enumerate() {
        if k != 0.0 {
            w[j] = -w[j];
            acc += k * y.eval(&w);
            w[j] = -w[j];
        }
    }
    acc
}

/// Maximum residuals of the spherical gradient identities over the rule nodes.
#[derive(Debug, Clone, Serialize)]
pub struct GradientIdentityReport {
    /// `<nabla_0 Y, omega> = gamma Y - rho Y`
    pub normal_component: f64,
    /// `<nabla^kappa Y(r omega), omega> = r^(n-1)((n + gamma) Y - rho Y)`,
    /// divided by `max(1, r^(n-1))`
    pub radial_component: f64,
    /// `sum_j (nabla_0)_j (omega_j Y) = (d + gamma - 1) Y + rho Y`
    pub divergence: f64,
    /// Largest `|int <nabla_0 Y_n, nabla_0 Y_m> h^2 dsigma|` over `n != m`
    pub cross_degree: f64,
    pub cross_pairs: usize,
    /// Classical `sum_j (nabla_0)_j (omega_j Y) = (d - 1) Y`
    pub classical_divergence: f64,
    /// Largest `|<nabla_0 Y, omega>|` over `G`-invariant members
    pub invariant_tangency: f64,
}

impl GradientIdentityReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.normal_component,
            self.radial_component,
            self.divergence,
            self.cross_degree,
            self.classical_divergence,
            self.invariant_tangency,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Radii at which the radial-component identity is sampled.
const RADIAL_SAMPLES: [f64; 3] = [0.5, 1.0, 1.5];

/// Checks the spherical gradient identities on every member and rule node.
pub fn verify_gradient_identities(basis: &HHarmonicBasis) -> Result<GradientIdentityReport> {
    let group = &basis.group;
    let d = group.d();
    let gamma = group.gamma();
    let mut rep = GradientIdentityReport {
        normal_component: 0.0,
        radial_component: 0.0,
        divergence: 0.0,
        cross_degree: 0.0,
        cross_pairs: 0,
        classical_divergence: 0.0,
        invariant_tangency: 0.0,
    };
    let members: Vec<&SolidHHarmonic> = basis.members().collect();
    // nabla_0 Y at every node, per member
    let mut grads: Vec<Vec<Vec<f64>>> = Vec::with_capacity(members.len());
    for y in &members {
        let n = y.degree as f64;
        let xq: Vec<FloatPoly> = (0..d).map(|j| y.poly.mul_var(j)).collect();
        let xq_grad: Vec<Vec<FloatPoly>> = xq.iter().map(|q| dunkl_gradient(group, q)).collect::<Result<_>>()?;
        let xq_partial: Vec<FloatPoly> = xq.iter().enumerate().map(|(j, q)| q.partial(j)).collect();
        let mut per_node = Vec::with_capacity(basis.rule.len());
        for (w, _) in basis.rule.iter() {
            let yv = y.eval(w);
            let rho = rho_op(group, &y.poly, w);
            let g = sph_gradient(y, w);
            let normal: f64 = g.iter().zip(w).map(|(a, b)| a * b).sum();
            rep.normal_component = rep.normal_component.max((normal - (gamma * yv - rho)).abs());
            if y.g_invariant {
                rep.invariant_tangency = rep.invariant_tangency.max(normal.abs());
            }
            for &r in &RADIAL_SAMPLES {
                let x: Vec<f64> = w.iter().map(|c| r * c).collect();
                let lhs: f64 = y.dunkl_gradient_at(&x).iter().zip(w).map(|(a, b)| a * b).sum();
                let rn = if y.degree == 0 { 0.0 } else { r.powi(y.degree as i32 - 1) };
                let rhs = rn * ((n + gamma) * yv - rho);
                rep.radial_component = rep.radial_component.max((lhs - rhs).abs() / rn.max(1.0));
            }
            // component j of nabla_0 (x_j Y), a homogeneous polynomial of degree n + 1
            let mut div = 0.0;
            let mut div0 = 0.0;
            for j in 0..d {
                let qv = w[j] * yv;
                div += xq_grad[j][j].eval(w) - (n + 1.0) * qv * w[j];
                div0 += xq_partial[j].eval(w) - (n + 1.0) * qv * w[j];
            }
            let want = (d as f64 + gamma - 1.0) * yv + rho;
            rep.divergence = rep.divergence.max((div - want).abs());
            rep.classical_divergence = rep.classical_divergence.max((div0 - (d as f64 - 1.0) * yv).abs());
            per_node.push(g);
        }
        grads.push(per_node);
    }
    for a in 0..members.len() {
        for b in (a + 1)..members.len() {
            if members[a].degree == members[b].degree {
                continue;
            }
            let mut acc = 0.0;
            for ((ga, gb), wt) in grads[a].iter().zip(&grads[b]).zip(&basis.rule.weights) {
                acc += wt * ga.iter().zip(gb).map(|(u, v)| u * v).sum::<f64>();
            }
            rep.cross_degree = rep.cross_degree.max(acc.abs());
            rep.cross_pairs += 1;
        }
    }
    Ok(rep)
}

/// Measured eigenvalue of the spherical part of `Delta_kappa` on one member.
#[derive(Debug, Clone, Serialize)]
pub struct SphericalEigen {
    pub m: u32,
    pub j: usize,
    pub measured: f64,
    /// `-m(m + 2 lambda_kappa)`, forced by homogeneity
    pub homogeneity_value: f64,
    /// `-m(m + lambda_kappa)`
    pub printed_value: f64,
    /// `max |Delta_{kappa,0} Y - measured Y|` over the nodes
    pub residual: f64,
}

/// Applies `Delta_kappa` to the degree-zero extension `|x|^-m Y(x)` through the
/// product rule for a radial factor and evaluates on the sphere:
/// `Delta_kappa Y - m sum_j omega_j T_j Y - m sum_j T_j(x_j Y) + m(m+2) Y`.
pub fn spherical_laplacian_eigen(basis: &HHarmonicBasis) -> Result<Vec<SphericalEigen>> {
    let group = &basis.group;
    let d = group.d();
    let lam = group.lambda_kappa();
    let mut out = Vec::new();
    for m in 0..=basis.m_max {
        for (j, y) in basis.level(m).iter().enumerate() {
            let mf = m as f64;
            let lap = dunkl_laplacian(group, &y.poly)?;
            let txy: Vec<FloatPoly> = (0..d).map(|i| dunkl_op(group, i, &y.poly.mul_var(i))).collect::<Result<_>>()?;
            let vals: Vec<(f64, f64)> = basis
                .rule
                .iter()
                .map(|(w, _)| {
                    let yv = y.eval(w);
                    let radial: f64 = y.grad.iter().zip(w).map(|(g, c)| c * g.eval(w)).sum();
                    let div: f64 = txy.iter().map(|p| p.eval(w)).sum();
                    (lap.eval(w) - mf * radial - mf * div + mf * (mf + 2.0) * yv, yv)
                })
                .collect();
            let num: f64 = vals.iter().zip(&basis.rule.weights).map(|((v, yv), wt)| wt * v * yv).sum();
            let den: f64 = vals.iter().zip(&basis.rule.weights).map(|((_, yv), wt)| wt * yv * yv).sum();
            let measured = num / den;
            let residual = vals.iter().map(|(v, yv)| (v - measured * yv).abs()).fold(0.0, f64::max);
            out.push(SphericalEigen {
                m,
                j,
                measured,
                homogeneity_value: -mf * (mf + 2.0 * lam),
                printed_value: -mf * (mf + lam),
                residual,
            });
        }
    }
    Ok(out)
}

/// Which value is used for the spherical energy `lambda_d(m, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaCandidate {
    /// Rayleigh quotient measured by quadrature.
    Measured,
    /// `m(m + lambda_kappa)`
    Printed,
    /// `m(m + 2 lambda_kappa)`
    Doubled,
}

impl LambdaCandidate {
    pub fn formula(self, m: u32, lambda_kappa: f64) -> Option<f64> {
        let m = m as f64;
        match self {
            LambdaCandidate::Measured => None,
            LambdaCandidate::Printed => Some(m * (m + lambda_kappa)),
            LambdaCandidate::Doubled => Some(m * (m + 2.0 * lambda_kappa)),
        }
    }
}

impl std::str::FromStr for LambdaCandidate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measured" => Ok(LambdaCandidate::Measured),
            "printed" => Ok(LambdaCandidate::Printed),
            "doubled" => Ok(LambdaCandidate::Doubled),
            _ => Err(Error::Config(format!("unknown lambda candidate '{s}' (measured, printed, doubled)"))),
        }
    }
}

/// Spherical energy of the `G`-invariant members of one degree.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub m: u32,
    /// `int |nabla_0 Y|^2 h^2 dsigma / int Y^2 h^2 dsigma` per invariant member
    pub quotients: Vec<f64>,
    /// Largest off-diagonal `|int <nabla_0 Y_j, nabla_0 Y_k> h^2 dsigma|`
    pub off_diagonal: f64,
    pub printed: f64,
    pub doubled: f64,
    /// Candidate closest to the measured quotients.
    pub matches: LambdaCandidate,
    pub distance: f64,
}

impl EnergyReport {
    /// Representative measured value (mean of the quotients).
    pub fn measured(&self) -> f64 {
        if self.quotients.is_empty() {
            return f64::NAN;
        }
        self.quotients.iter().sum::<f64>() / self.quotients.len() as f64
    }
}

/// Measures the spherical energy of the invariant members of degree `m`.
pub fn verify_spherical_energy(basis: &HHarmonicBasis, m: u32) -> Result<EnergyReport> {
    if m > basis.m_max {
        return domain(format!("degree {m} exceeds the basis ({})", basis.m_max));
    }
    let inv: Vec<&SolidHHarmonic> = basis.level(m).iter().filter(|y| y.g_invariant).collect();
    if inv.is_empty() {
        return Err(Error::Precondition(format!("no G-invariant h-harmonics of degree {m}")));
    }
    let k = inv.len();
    let mut e = vec![vec![0.0; k]; k];
    let mut n = vec![0.0; k];
    for (w, wt) in basis.rule.iter() {
        let g: Vec<Vec<f64>> = inv.iter().map(|y| sph_gradient(y, w)).collect();
        for a in 0..k {
            n[a] += wt * inv[a].eval(w).powi(2);
            for b in 0..k {
                e[a][b] += wt * g[a].iter().zip(&g[b]).map(|(u, v)| u * v).sum::<f64>();
            }
        }
    }
    let quotients: Vec<f64> = (0..k).map(|a| e[a][a] / n[a]).collect();
    let mut off_diagonal: f64 = 0.0;
    for a in 0..k {
        for b in 0..k {
            if a != b {
                off_diagonal = off_diagonal.max(e[a][b].abs());
            }
        }
    }
    let lam = basis.group.lambda_kappa();
    let printed = LambdaCandidate::Printed.formula(m, lam).unwrap();
    let doubled = LambdaCandidate::Doubled.formula(m, lam).unwrap();
    let mean = quotients.iter().sum::<f64>() / k as f64;
    let (matches, distance) = if (mean - doubled).abs() <= (mean - printed).abs() {
        (LambdaCandidate::Doubled, (mean - doubled).abs())
    } else {
        (LambdaCandidate::Printed, (mean - printed).abs())
    };
    Ok(EnergyReport { m, quotients, off_diagonal, printed, doubled, matches, distance })
}

/// `f_{m,j}(r)` and `f~_{m,j}(r) = r^-m f_{m,j}(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialProjection {
    pub value: f64,
    pub tilde: f64,
}

/// Spherical projection of `f(r .)` onto member `j` of degree `m`.
pub fn project_radial(
    f: impl Fn(&[f64]) -> f64,
    basis: &HHarmonicBasis,
    m: u32,
    j: usize,
    r: f64,
) -> Result<RadialProjection> {
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    if m > basis.m_max || j >= basis.dim(m) {
        return domain(format!("no member ({m}, {j}) in the basis"));
    }
    let y = basis.member(m, j);
    let value = basis.rule.integrate(|w| {
        let x: Vec<f64> = w.iter().map(|c| r * c).collect();
        f(&x) * y.eval(w)
    });
    Ok(RadialProjection { value, tilde: value / r.powi(m as i32) })
}

/// All projections `f_{m,j}(r)` at one radius, indexed `[m][j]`.
pub fn project_radial_all(f: impl Fn(&[f64]) -> f64, basis: &HHarmonicBasis, r: f64) -> Vec<Vec<f64>> {
    let vals: Vec<f64> = basis
        .rule
        .iter()
        .map(|(w, wt)| {
            let x: Vec<f64> = w.iter().map(|c| r * c).collect();
            wt * f(&x)
        })
        .collect();
    basis
        .levels
        .iter()
        .map(|level| {
            level.iter().map(|y| basis.rule.iter().zip(&vals).map(|((w, _), v)| v * y.eval(w)).sum()).collect()
        })
        .collect()
}

/// `int |f(r omega)|^2 h^2 dsigma` on the basis rule.
pub fn sphere_energy(f: impl Fn(&[f64]) -> f64, basis: &HHarmonicBasis, r: f64) -> f64 {
    basis.rule.integrate(|w| {
        let x: Vec<f64> = w.iter().map(|c| r * c).collect();
        f(&x).powi(2)
    })
}

/// Parameter `lambda = d/2 - 1 + gamma` of the zonal Gegenbauer weight.
pub fn zonal_index(group: &ReflectionGroup) -> f64 {
    group.d() as f64 / 2.0 - 1.0 + group.gamma()
}

/// Constant `pi 2^lambda Gamma(lambda + 1/2)^2 / Gamma(lambda + 1)` relating
/// the normalized Gegenbauer integral to `J_(lambda+m)(z) / z^lambda`.
pub fn funk_hecke_constant(group: &ReflectionGroup) -> Result<f64> {
    let l = zonal_index(group);
    Ok((std::f64::consts::PI.ln() + l * std::f64::consts::LN_2 + 2.0 * log_gamma(l + 0.5)? - log_gamma(l + 1.0)?).exp())
}

/// Both sides of the Bessel form of the Funk–Hecke identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunkHeckeSides {
    pub m: u32,
    pub z: f64,
    /// `B(lambda+1/2, 1/2) / C_m(1) * Re(i^-m int e^(itz) C_m(t) (1-t^2)^(lambda-1/2) dt)`
    pub lhs: f64,
    /// `J_(lambda+m)(z) / z^lambda`
    pub rhs: f64,
    pub ratio: f64,
}

/// Gauss–Jacobi nodes used for the Gegenbauer integral.
const FUNK_HECKE_NODES: usize = 96;

pub fn funk_hecke_bessel(group: &ReflectionGroup, m: u32, z: f64) -> Result<FunkHeckeSides> {
    if m > 10 {
        return domain(format!("degree {m} exceeds 10"));
    }
    if !(z > 0.0) {
        return domain(format!("z must be positive, got {z}"));
    }
    let l = zonal_index(group);
    let rule = gauss_jacobi(l - 0.5, l - 0.5, FUNK_HECKE_NODES)?;
    let c1 = gegenbauer_at_one(m as usize, l)?;
    let shift = m as f64 * std::f64::consts::FRAC_PI_2;
    let mut acc = 0.0;
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * (t * z - shift).cos() * gegenbauer_poly(m as usize, l, *t)?;
    }
    let lhs = log_beta(l + 0.5, 0.5)?.exp() / c1 * acc;
    let rhs = bessel_j(l + m as f64, z)? / z.powf(l);
    Ok(FunkHeckeSides { m, z, lhs, rhs, ratio: lhs / rhs })
}

/// Ratio constancy for one degree.
#[derive(Debug, Clone, Serialize)]
pub struct FunkHeckeLevel {
    pub m: u32,
    /// Least-squares constant over the retained `z`.
    pub constant: f64,
    /// `max |ratio / constant - 1|` over the retained `z`.
    pub deviation: f64,
    /// Number of `z` with `|rhs| >= 1e-2 max |rhs|` (away from Bessel zeros).
    pub retained: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunkHeckeScan {
    pub levels: Vec<FunkHeckeLevel>,
    pub expected: f64,
    /// `max |constant_m / expected - 1|`
    pub spread: f64,
    pub max_deviation: f64,
}

pub fn funk_hecke_scan(group: &ReflectionGroup, m_max: u32, zs: &[f64]) -> Result<FunkHeckeScan> {
    let expected = funk_hecke_constant(group)?;
    let mut levels = Vec::new();
    for m in 0..=m_max {
        let sides: Vec<FunkHeckeSides> = zs.iter().map(|&z| funk_hecke_bessel(group, m, z)).collect::<Result<_>>()?;
        let peak = sides.iter().map(|s| s.rhs.abs()).fold(0.0, f64::max);
        let kept: Vec<&FunkHeckeSides> = sides.iter().filter(|s| s.rhs.abs() >= 1e-2 * peak).collect();
        let constant =
            kept.iter().map(|s| s.lhs * s.rhs).sum::<f64>() / kept.iter().map(|s| s.rhs * s.rhs).sum::<f64>();
        let deviation = kept.iter().map(|s| (s.ratio / constant - 1.0).abs()).fold(0.0, f64::max);
        levels.push(FunkHeckeLevel { m, constant, deviation, retained: kept.len() });
    }
    let spread = levels.iter().map(|l| (l.constant / expected - 1.0).abs()).fold(0.0, f64::max);
    let max_deviation = levels.iter().map(|l| l.deviation).fold(0.0, f64::max);
    Ok(FunkHeckeScan { levels, expected, spread, max_deviation })
}

/// Kernel form: `int E_kappa(x, y) Y(y) h^2 dsigma(y)` against
/// `I_(lambda+m)(|x|) / |x|^lambda * Y(x/|x|)`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelFormLevel {
    pub m: u32,
    pub j: usize,
    pub constant: f64,
    /// `max |lhs - constant * rhs| / max |lhs|`
    pub deviation: f64,
}

/// Sphere rule size for the kernel form (the integrand is entire, not polynomial).
const KERNEL_FORM_RULE: usize = 40;

pub fn funk_hecke_kernel_form(
    basis: &HHarmonicBasis,
    m_max: u32,
    radii: &[f64],
    directions: &[Vec<f64>],
) -> Result<Vec<KernelFormLevel>> {
    let group = &basis.group;
    let d = group.d();
    let rule = sphere_rule(d, group.kappa(), KERNEL_FORM_RULE)?;
    let l = zonal_index(group);
    let mut out = Vec::new();
    for m in 0..=m_max.min(basis.m_max) {
        for (j, y) in basis.level(m).iter().enumerate() {
            let yv: Vec<f64> = rule.iter().map(|(w, _)| y.eval(w)).collect();
            let mut lhs = Vec::new();
            let mut rhs = Vec::new();
            for dir in directions {
                let nrm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
                let u: Vec<f64> = dir.iter().map(|c| c / nrm).collect();
                let yu = y.eval(&u);
                for &rho in radii {
                    let x: Vec<f64> = u.iter().map(|c| rho * c).collect();
                    let mut acc = 0.0;
                    for ((w, wt), v) in rule.iter().zip(&yv) {
                        acc += wt * ln_dunkl_kernel(group, &x, w)?.exp() * v;
                    }
                    lhs.push(acc);
                    rhs.push((ln_bessel_i(l + m as f64, rho)? - l * rho.ln()).exp() * yu);
                }
            }
            let constant =
                lhs.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>() / rhs.iter().map(|b| b * b).sum::<f64>();
            let peak = lhs.iter().map(|a| a.abs()).fold(0.0, f64::max);
            let deviation = lhs.iter().zip(&rhs).map(|(a, b)| (a - constant * b).abs()).fold(0.0, f64::max) / peak;
            out.push(KernelFormLevel { m, j, constant, deviation });
        }
    }
    Ok(out)
}

/// Comparison of the spherical projection of `e^{-tH} f` with the Laguerre
/// semigroup of index `d/2 + gamma + m - 1` applied to `f~_{m,j}`.
#[derive(Debug, Clone, Serialize)]
pub struct SemigroupProjection {
    pub m: u32,
    pub j: usize,
    pub t: f64,
    pub r: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Least-squares `lhs / rhs`; `None` when `rhs` is below [`SEMIGROUP_FLOOR`].
    pub constant: Option<f64>,
    /// `max |lhs - constant * rhs| / max |lhs|` (or `max |lhs|` when both vanish).
    pub deviation: f64,
}

/// Radial nodes for the semigroup integral.
const SEMIGROUP_NODES: usize = 72;

/// Projections smaller than this fraction of `|e^(-tH) f|` sit at the rounding
/// level of the sphere sum and are not fitted.
pub const SEMIGROUP_FLOOR: f64 = 1e-9;

pub fn verify_semigroup_projection(
    basis: &HHarmonicBasis,
    f: &SpectralCoeffs,
    t: f64,
    m: u32,
    j: usize,
    r_grid: &[f64],
) -> Result<SemigroupProjection> {
    if !(t >= 0.3) {
        return domain(format!("heat time must be at least 0.3, got {t}"));
    }
    if f.group() != &basis.group {
        return domain("expansion and basis use different groups");
    }
    if f.truncation() + m > basis.rule.exactness as u32 {
        return Err(Error::Precondition(format!(
            "sphere rule exact to degree {} but the projection needs {}",
            basis.rule.exactness,
            f.truncation() + m
        )));
    }
    let d = basis.group.d() as f64;
    let delta = d / 2.0 + basis.group.gamma() - 1.0 + m as f64;
    let heat = f.apply_heat(t)?;
    let tables: Vec<Hermite1d> = heat.basis_tables();
    let lhs: Vec<f64> = r_grid
        .iter()
        .map(|&r| project_radial(|x| heat.eval_with(&tables, x), basis, m, j, r).map(|p| p.value))
        .collect::<Result<_>>()?;
    let coth = 1.0 / (2.0 * t).tanh();
    let rule = radial_rule_scaled(delta, SEMIGROUP_NODES, 0.5 * (coth + 1.0))?;
    let ftab = f.basis_tables();
    let tilde: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&s| project_radial(|x| f.eval_with(&ftab, x), basis, m, j, s).map(|p| p.tilde))
        .collect::<Result<_>>()?;
    let mut rhs = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let mut acc = 0.0;
        for ((&s, &lw), &h) in rule.nodes.iter().zip(&rule.ln_gauss_weights).zip(&tilde) {
            let lk = ln_heat_kernel_closed(delta, t, r, s)?;
            acc += (lw + rule.scale * s * s + lk).exp() * h;
        }
        rhs.push(r.powi(m as i32) * acc);
    }
    let (constant, deviation) = fit_constant(&lhs, &rhs, heat.norm(), SEMIGROUP_FLOOR);
    Ok(SemigroupProjection { m, j, t, r: r_grid.to_vec(), lhs, rhs, constant, deviation })
}

/// Least-squares `a ~ c b`; `None` when `b` is below `floor * scale`.
pub(crate) fn fit_constant(a: &[f64], b: &[f64], scale: f64, floor: f64) -> (Option<f64>, f64) {
    let peak_a = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let peak_b = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if peak_b <= floor * scale.max(1e-300) {
        return (None, peak_a);
    }
    let c = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / b.iter().map(|y| y * y).sum::<f64>();
    let dev = a.iter().zip(b).map(|(x, y)| (x - c * y).abs()).fold(0.0, f64::max) / peak_a.max(1e-300);
    (Some(c), dev)
}

/// `h_kappa^2` on the sphere, re-exported for callers that build their own rules.
pub fn sphere_weight(group: &ReflectionGroup, omega: &[f64]) -> f64 {
    h_weight_sq(group, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::SpectralCoeffs;
    use num::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn group(k: &[f64]) -> ReflectionGroup {
        ReflectionGroup::new(k).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(harmonic_dim(2, 0), 1);
        for m in 1..10 {
            assert_eq!(harmonic_dim(2, m), 2);
        }
        assert_eq!(harmonic_dim(3, 4), 9);
        assert_eq!(invariant_dim(2, 4), 1);
        assert_eq!(invariant_dim(2, 3), 0);
        assert_eq!(invariant_dim(3, 4), 3);
    }

    #[test]
    fn classical_circle() {
        let b = build_basis(&ReflectionGroup::classical(2), 6).unwrap();
        assert_eq!(b.dim(0), 1);
        for m in 1..=6 {
            assert_eq!(b.dim(m), 2);
            // span{Re z^m, Im z^m}: each member is a cos(m t + phi) on the circle
            for y in b.level(m) {
                let a = y.eval(&[1.0, 0.0]);
                let c = y.eval(&[0.0, 1.0]);
                let th: f64 = 0.37;
                let v = y.eval(&[th.cos(), th.sin()]);
                let amp = (1.0 / std::f64::consts::PI).sqrt();
                // fit v = A cos(m th) + B sin(m th) with A, B from other angles
                let mf = m as f64;
                let bcoef = if m % 2 == 1 {
                    c / (mf * std::f64::consts::FRAC_PI_2).sin()
                } else {
                    let t2 = std::f64::consts::FRAC_PI_2 / mf;
                    y.eval(&[t2.cos(), t2.sin()])
                };
                let want = a * (mf * th).cos() + bcoef * (mf * th).sin();
                assert!((v - want).abs() < 1e-12, "m={m}");
                assert!(((a * a + bcoef * bcoef).sqrt() - amp).abs() < 1e-12);
            }
        }
    }

    /// Exact kernel for `kappa = (1/2, 3/2)` at degree 2, computed by hand:
    /// `Delta_kappa(a x^2 + b y^2) = a(2 + 4 kappa_1) + b(2 + 4 kappa_2)`, and
    /// `xy` is harmonic.
    #[test]
    fn exact_kernel_degree_two() {
        let g = ReflectionGroup::from_rationals(vec![q(1, 2), q(3, 2)]).unwrap();
        let b = build_basis(&g, 2).unwrap();
        assert_eq!(b.dim(2), 2);
        assert_eq!(b.invariant_dim(2), 1);
        let inv = b.member(2, 0).exact.clone().unwrap();
        let a = inv.coeff(&[2, 0]);
        let c = inv.coeff(&[0, 2]);
        // a * 4 + c * 8 = 0
        assert_eq!(a.clone() * q(4, 1) + c.clone() * q(8, 1), q(0, 1));
        assert_eq!(inv.num_terms(), 2);
        let odd = b.member(2, 1).exact.clone().unwrap();
        assert_eq!(odd.num_terms(), 1);
        assert!(odd.coeff(&[1, 1]) != q(0, 1));
        assert!(b.exact_harmonicity().unwrap().unwrap());
    }

    #[test]
    fn invariant_members_first() {
        let b = build_basis(&group(&[0.6, 0.3, 0.2]), 6).unwrap();
        for m in 0..=6 {
            let k = b.invariant_dim(m);
            assert_eq!(k, invariant_dim(3, m));
            for (j, y) in b.level(m).iter().enumerate() {
                assert_eq!(y.g_invariant, j < k);
                assert_eq!(y.g_invariant, y.poly.is_even_in_all());
            }
        }
        assert!(b.gram_residual() < 1e-12);
    }

    #[test]
    fn irrational_multiplicity_uses_float_kernel() {
        let g = group(&[std::f64::consts::SQRT_2 - 1.0, 0.3]);
        assert!(!g.is_rational());
        let b = build_basis(&g, 8).unwrap();
        assert!(b.exact_harmonicity().is_none());
        for y in b.members() {
            assert!(dunkl_laplacian(&g, &y.poly).unwrap().max_abs_coeff() < 1e-10);
        }
        assert!(b.gram_residual() < 1e-10);
    }

    /// Closed form `int prod |x_j|^(2 b_j) dsigma = 2 prod Gamma(b_j + 1/2) / Gamma(sum b_j + d/2)`
    /// confirms the moment form is proportional to the sphere inner product.
    #[test]
    fn moment_form_matches_sphere_integrals() {
        let g = group(&[0.6, 0.3]);
        let m = 4;
        let form = MomentForm::<f64>::new(&g, m).unwrap();
        let common = (std::f64::consts::LN_2 + log_gamma(1.1).unwrap() + log_gamma(0.8).unwrap()
            - log_gamma(m as f64 + 0.9 + 1.0).unwrap())
        .exp();
        let p = FloatPoly::parse(2, "x1^4 - 3*x1^2*x2^2 + 0.5*x2^4").unwrap();
        let r = FloatPoly::parse(2, "2*x1^4 + x2^4").unwrap();
        let closed = common * form.inner(&p, &r);
        let rule = sphere_rule(2, g.kappa(), 10).unwrap();
        let quad = rule.integrate(|w| p.eval(w) * r.eval(w));
        assert!((closed - quad).abs() < 1e-13 * quad.abs());
    }

    #[test]
    fn rho_examples() {
        let g = group(&[0.6, 0.3]);
        let xy = FloatPoly::parse(2, "x1*x2").unwrap();
        let w = [0.6, 0.8];
        assert!((rho_op(&g, &xy, &w) + 0.9 * 0.48).abs() < 1e-15);
        let even = FloatPoly::parse(2, "x1^2 - 2*x2^2").unwrap();
        assert!((rho_op(&g, &even, &w) - 0.9 * even.eval(&w)).abs() < 1e-15);
        assert_eq!(rho_op(&ReflectionGroup::classical(2), &xy, &w), 0.0);
    }

    #[test]
    fn sph_gradient_constant_and_classical() {
        let b = build_basis(&ReflectionGroup::classical(2), 2).unwrap();
        assert!(sph_gradient(b.member(0, 0), &[0.6, 0.8]).iter().all(|v| *v == 0.0));
        // Y = x^2 - y^2: tangential derivative by finite differences on the circle
        let y = FloatPoly::parse(2, "x1^2 - x2^2").unwrap();
        let th: f64 = 0.7;
        let w = [th.cos(), th.sin()];
        let g = sph_gradient_poly(&ReflectionGroup::classical(2), &y, &w).unwrap();
        let h = 1e-5;
        let f = |t: f64| y.eval(&[t.cos(), t.sin()]);
        let dt = (f(th + h) - f(th - h)) / (2.0 * h);
        let tangent = [-th.sin(), th.cos()];
        assert!((g[0] - dt * tangent[0]).abs() < 1e-9);
        assert!((g[1] - dt * tangent[1]).abs() < 1e-9);
    }

    #[test]
    fn gradient_identities() {
        for k in [[0.0, 0.0], [0.6, 0.3]] {
            let b = build_basis(&group(&k), 8).unwrap();
            let rep = verify_gradient_identities(&b).unwrap();
            assert!(rep.max_residual() < 1e-9, "{k:?}: {rep:?}");
            assert!(rep.cross_pairs > 0);
        }
    }

    #[test]
    fn spherical_eigenvalue_follows_homogeneity() {
        let b = build_basis(&group(&[0.6, 0.3]), 8).unwrap();
        for e in spherical_laplacian_eigen(&b).unwrap() {
            assert!((e.measured - e.homogeneity_value).abs() < 1e-9, "{e:?}");
            assert!(e.residual < 1e-9);
            if e.m > 0 {
                assert!((e.measured - e.printed_value).abs() > 0.1);
            }
        }
    }

    #[test]
    fn spherical_energy() {
        let b = build_basis(&ReflectionGroup::classical(2), 4).unwrap();
        assert_eq!(verify_spherical_energy(&b, 0).unwrap().measured(), 0.0);
        let e = verify_spherical_energy(&b, 2).unwrap();
        assert!((e.measured() - 4.0).abs() < 1e-12);
        let b = build_basis(&group(&[0.6, 0.3]), 4).unwrap();
        let e = verify_spherical_energy(&b, 2).unwrap();
        assert_eq!(e.matches, LambdaCandidate::Doubled);
        assert!(e.distance < 1e-10, "{e:?}");
        assert!(matches!(verify_spherical_energy(&b, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn projections() {
        let g = group(&[0.6, 0.3]);
        let b = build_basis(&g, 4).unwrap();
        // radial function: only (0, 0) survives
        let phi0 = SpectralCoeffs::basis(&g, &[0, 0]);
        let all = project_radial_all(|x| phi0.eval(x), &b, 1.3);
        for (m, row) in all.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if (m, j) != (0, 0) {
                    assert!(v.abs() < 1e-14);
                }
            }
        }
        // Y e^{-|x|^2/2}: f~ = e^{-r^2/2}
        let y = b.member(3, 1).poly.clone();
        let f = |x: &[f64]| y.eval(x) * (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp();
        for r in [0.4, 1.0, 2.2] {
            let p = project_radial(f, &b, 3, 1, r).unwrap();
            assert!((p.tilde - (-0.5 * r * r).exp()).abs() < 1e-13);
            assert!(project_radial(f, &b, 1, 1, r).unwrap().value.abs() < 1e-13);
        }
        let y2 = b.member(2, 0).poly.clone();
        let g2 = |x: &[f64]| y2.eval(x) / (1.0 + x[0] * x[0] + x[1] * x[1]);
        assert!(project_radial(g2, &b, 1, 0, 0.9).unwrap().value.abs() < 1e-10);
    }

    #[test]
    fn parseval_on_spheres() {
        let g = group(&[0.6, 0.3]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = SpectralCoeffs::random(&g, 8, &mut rng);
        let b = build_basis(&g, 8).unwrap();
        let tabs = f.basis_tables();
        for r in [0.3, 1.1, 2.5] {
            let e = sphere_energy(|x| f.eval_with(&tabs, x), &b, r);
            let s: f64 = project_radial_all(|x| f.eval_with(&tabs, x), &b, r).iter().flatten().map(|v| v * v).sum();
            assert!((e - s).abs() < 1e-9 * e.max(1.0));
        }
    }

    #[test]
    fn funk_hecke_classical_poisson() {
        // m = 0, lambda = 0: pi * int cos(tz) (1-t^2)^(-1/2) dt = pi^2 J_0(z)
        let g = ReflectionGroup::classical(2);
        for z in [0.5, 3.0, 7.5] {
            let s = funk_hecke_bessel(&g, 0, z).unwrap();
            assert!((s.lhs - std::f64::consts::PI.powi(2) * bessel_j(0.0, z).unwrap()).abs() < 1e-12);
        }
        assert!((funk_hecke_constant(&g).unwrap() - std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn funk_hecke_ratio_constant() {
        let zs: Vec<f64> = (1..=40).map(|i| 0.5 * i as f64).collect();
        for k in [[0.0, 0.0], [0.6, 0.3]] {
            let scan = funk_hecke_scan(&group(&k), 6, &zs).unwrap();
            assert!(scan.max_deviation < 1e-7, "{scan:?}");
            assert!(scan.spread < 1e-7, "{scan:?}");
        }
    }

    #[test]
    fn kernel_form_constant() {
        let g = group(&[0.6, 0.3]);
        let b = build_basis(&g, 4).unwrap();
        let dirs = vec![vec![0.3, 0.9], vec![0.8, -0.35], vec![-0.5, 0.6]];
        let lv = funk_hecke_kernel_form(&b, 4, &[0.5, 1.0, 2.0, 3.5], &dirs).unwrap();
        let c0 = lv[0].constant;
        for l in &lv {
            assert!(l.deviation < 1e-7, "{l:?}");
            assert!((l.constant / c0 - 1.0).abs() < 1e-7, "{l:?}");
        }
    }

    #[test]
    fn semigroup_projection_constant_one() {
        let g = group(&[0.6, 0.3]);
        let b = build_basis(&g, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = SpectralCoeffs::random_invariant(&g, 8, &mut rng);
        let rs: Vec<f64> = (1..=15).map(|i| 0.2 * i as f64).collect();
        for (m, t) in [(0, 0.3), (2, 0.5), (4, 2.0)] {
            let rep = verify_semigroup_projection(&b, &f, t, m, 0, &rs).unwrap();
            let c = rep.constant.unwrap();
            assert!((c - 1.0).abs() < 1e-8, "m={m} t={t} c={c}");
            assert!(rep.deviation < 1e-8);
        }
        // odd-only data has no radial part
        let mut odd = SpectralCoeffs::new(&g, 3);
        odd.set(vec![1, 0], 1.0);
        odd.set(vec![0, 3], -0.5);
        let rep = verify_semigroup_projection(&b, &odd, 0.5, 0, 0, &rs).unwrap();
        assert!(rep.constant.is_none());
        assert!(rep.deviation < 1e-14);
    }
}
