//! The reflection group Z2^d, Dunkl operators on polynomials, the weight
//! `h_kappa^2` and the Dunkl kernel `E_kappa`.

use num::{BigRational, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::poly::{rational_from_decimal, rational_to_f64, Coeff, Poly};
use crate::specfun::{ln_bessel_i, log_gamma};

/// Significant digits accepted when reading a float multiplicity as a rational.
const KAPPA_DECIMAL_DIGITS: usize = 10;

/// `Z2^d` acting by coordinate sign flips, with one multiplicity per root `e_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionGroup {
    kappa: Vec<f64>,
    #[serde(skip)]
    kappa_exact: Option<Vec<BigRational>>,
}

impl ReflectionGroup {
    /// Float multiplicities; each one with a short decimal form also gets an
    /// exact rational view so the symbolic layer can be used.
    pub fn new(kappa: &[f64]) -> Result<Self> {
        if kappa.is_empty() {
            return domain("dimension must be at least 1");
        }
        if let Some(k) = kappa.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
            return domain(format!("multiplicities must be finite and nonnegative, got {k}"));
        }
        let exact: Option<Vec<BigRational>> =
            kappa.iter().map(|&k| rational_from_decimal(k, KAPPA_DECIMAL_DIGITS)).collect();
        Ok(ReflectionGroup { kappa: kappa.to_vec(), kappa_exact: exact })
    }

    pub fn from_rationals(kappa: Vec<BigRational>) -> Result<Self> {
        if kappa.is_empty() {
            return domain("dimension must be at least 1");
        }
        if kappa.iter().any(|k| k < &BigRational::zero()) {
            return domain("multiplicities must be nonnegative");
        }
        let float = kappa.iter().map(rational_to_f64).collect();
        Ok(ReflectionGroup { kappa: float, kappa_exact: Some(kappa) })
    }

    /// `kappa = 0` in dimension `d`.
    pub fn classical(d: usize) -> Self {
        Self::from_rationals(vec![BigRational::zero(); d]).expect("d >= 1")
    }

    pub fn d(&self) -> usize {
        self.kappa.len()
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn kappa_exact(&self) -> Option<&[BigRational]> {
        self.kappa_exact.as_deref()
    }

    pub fn is_rational(&self) -> bool {
        self.kappa_exact.is_some()
    }

    /// `gamma = sum_j kappa_j`.
    pub fn gamma(&self) -> f64 {
        self.kappa.iter().sum()
    }

    /// `lambda_kappa = gamma + (d - 2) / 2`.
    pub fn lambda_kappa(&self) -> f64 {
        self.gamma() + (self.d() as f64 - 2.0) / 2.0
    }

    pub fn is_classical(&self) -> bool {
        self.kappa.iter().all(|k| *k == 0.0)
    }

    /// Applies `sigma_j` in place.
    pub fn reflect(&self, j: usize, x: &mut [f64]) {
        x[j] = -x[j];
    }

    /// Multiplicity `kappa_j` in the coefficient ring `C`.
    pub fn kappa_in<C: KappaRing>(&self, j: usize) -> Result<C> {
        C::kappa_of(self, j)
    }
}

/// Coefficient rings in which multiplicities can be represented.
pub trait KappaRing: Coeff {
    fn kappa_of(group: &ReflectionGroup, j: usize) -> Result<Self>;
}

impl KappaRing for BigRational {
    fn kappa_of(group: &ReflectionGroup, j: usize) -> Result<Self> {
        group
            .kappa_exact()
            .map(|k| k[j].clone())
            .ok_or_else(|| Error::Precondition("symbolic mode needs rational multiplicities".into()))
    }
}

impl KappaRing for f64 {
    fn kappa_of(group: &ReflectionGroup, j: usize) -> Result<Self> {
        Ok(group.kappa[j])
    }
}

/// `h_kappa^2(x) = prod_j |x_j|^(2 kappa_j)`.
pub fn h_weight_sq(group: &ReflectionGroup, x: &[f64]) -> f64 {
    x.iter().zip(group.kappa()).map(|(&xj, &k)| if k == 0.0 { 1.0 } else { xj.abs().powf(2.0 * k) }).product()
}

/// `T_j x^a = (a_j + 2 kappa_j [a_j odd]) x^(a - e_j)`.
pub fn dunkl_op<C: KappaRing>(group: &ReflectionGroup, j: usize, p: &Poly<C>) -> Result<Poly<C>> {
    check_dim(group, p.nvars())?;
    let two_kappa = C::from_int(2) * group.kappa_in::<C>(j)?;
    Ok(p.map_terms(|e, c| {
        if e[j] == 0 {
            return None;
        }
        let mut factor = C::from_int(e[j] as i64);
        if e[j] % 2 == 1 {
            factor = factor + two_kappa.clone();
        }
        let mut e2 = e.to_vec();
        e2[j] -= 1;
        Some((e2, c.clone() * factor))
    }))
}

/// `Delta_kappa = sum_j T_j^2`.
pub fn dunkl_laplacian<C: KappaRing>(group: &ReflectionGroup, p: &Poly<C>) -> Result<Poly<C>> {
    let mut out = Poly::zero(p.nvars());
    for j in 0..group.d() {
        out = out.add(&dunkl_op(group, j, &dunkl_op(group, j, p)?)?);
    }
    Ok(out)
}

/// `T_xi = sum_j xi_j T_j`.
pub fn dunkl_directional<C: KappaRing>(group: &ReflectionGroup, xi: &[C], p: &Poly<C>) -> Result<Poly<C>> {
    if xi.len() != group.d() {
        return domain(format!("direction has {} entries, expected {}", xi.len(), group.d()));
    }
    let mut out = Poly::zero(p.nvars());
    for (j, c) in xi.iter().enumerate() {
        if !c.is_zero() {
            out = out.add(&dunkl_op(group, j, p)?.scale(c));
        }
    }
    Ok(out)
}

/// `T_i T_j P - T_j T_i P`.
pub fn dunkl_commutator<C: KappaRing>(group: &ReflectionGroup, i: usize, j: usize, p: &Poly<C>) -> Result<Poly<C>> {
    let ij = dunkl_op(group, i, &dunkl_op(group, j, p)?)?;
    let ji = dunkl_op(group, j, &dunkl_op(group, i, p)?)?;
    Ok(ij.sub(&ji))
}

/// Dunkl gradient `(T_1 P, .., T_d P)`.
pub fn dunkl_gradient<C: KappaRing>(group: &ReflectionGroup, p: &Poly<C>) -> Result<Vec<Poly<C>>> {
    (0..group.d()).map(|j| dunkl_op(group, j, p)).collect()
}

fn check_dim(group: &ReflectionGroup, n: usize) -> Result<()> {
    if n != group.d() {
        return domain(format!("polynomial has {n} variables, group has dimension {}", group.d()));
    }
    Ok(())
}

/// Pointwise `T_j f(x)` for a smooth sampled `f`, by central differences with
/// step `h`. Near `x_j = 0` the reflection quotient is replaced by its smooth
/// extension, twice the derivative of the odd part.
pub fn dunkl_op_numeric(group: &ReflectionGroup, j: usize, f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[j] += h;
    xm[j] -= h;
    let deriv = (f(&xp) - f(&xm)) / (2.0 * h);
    let k = group.kappa()[j];
    if k == 0.0 {
        return deriv;
    }
    let quotient = if x[j].abs() > h {
        let mut xr = x.to_vec();
        xr[j] = -xr[j];
        (f(x) - f(&xr)) / x[j]
    } else {
        let odd = |y: &[f64]| {
            let mut yr = y.to_vec();
            yr[j] = -yr[j];
            0.5 * (f(y) - f(&yr))
        };
        let mut z = x.to_vec();
        z[j] = 0.0;
        let mut zp = z.clone();
        zp[j] = h;
        // odd part vanishes on the hyperplane, so one-sided slope doubles to the limit
        2.0 * (odd(&zp) - odd(&z)) / h
    };
    deriv + k * quotient
}

/// `ln E_k(z)` for the one-dimensional kernel, `z = x y`.
pub fn ln_dunkl_kernel_1d(k: f64, z: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return domain(format!("multiplicity must be nonnegative, got {k}"));
    }
    if k == 0.0 || z == 0.0 {
        return Ok(z);
    }
    if z > 0.0 {
        // Γ(k+1/2) (z/2)^(1/2-k) [I_{k-1/2}(z) + I_{k+1/2}(z)]
        let a = ln_bessel_i(k - 0.5, z)?;
        let b = ln_bessel_i(k + 0.5, z)?;
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        let ln_sum = hi + (lo - hi).exp().ln_1p();
        Ok(log_gamma(k + 0.5)? + (0.5 - k) * (0.5 * z).ln() + ln_sum)
    } else {
        // Kummer form: e^z M(k, 2k+1, 2|z|), a sum of positive terms.
        let w = -2.0 * z;
        Ok(z + ln_kummer_m(k, 2.0 * k + 1.0, w)?)
    }
}

/// `ln M(a, b, w)` for `0 < a < b`, `w >= 0`.
fn ln_kummer_m(a: f64, b: f64, w: f64) -> Result<f64> {
    let switch = 40.0 + 4.0 * (b - a) * (b - a);
    if w <= switch {
        let mut term = 1.0_f64;
        let mut sum = 1.0_f64;
        let mut n = 0.0;
        loop {
            term *= (a + n) / (b + n) * w / (n + 1.0);
            sum += term;
            n += 1.0;
            if term < 1e-17 * sum && n > w {
                break;
            }
            if n > 10_000.0 {
                return Err(Error::Accuracy("Kummer series did not converge".into()));
            }
        }
        Ok(sum.ln())
    } else {
        // M(a,b,w) ~ Γ(b)/Γ(a) e^w w^(a-b) sum_s (b-a)_s (1-a)_s / s! w^-s
        let mut term = 1.0_f64;
        let mut sum = 1.0_f64;
        for s in 0..200 {
            let sf = s as f64;
            let next = term * (b - a + sf) * (1.0 - a + sf) / ((sf + 1.0) * w);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        Ok(log_gamma(b)? - log_gamma(a)? + w + (a - b) * w.ln() + sum.ln())
    }
}

/// `ln E_kappa(x, y) = sum_j ln E_{kappa_j}(x_j y_j)`.
pub fn ln_dunkl_kernel(group: &ReflectionGroup, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != group.d() || y.len() != group.d() {
        return domain("point dimension does not match group");
    }
    let mut acc = 0.0;
    for j in 0..group.d() {
        acc += ln_dunkl_kernel_1d(group.kappa()[j], x[j] * y[j])?;
    }
    Ok(acc)
}

/// `E_kappa(x, y)`; a range error carries `ln E` when the value overflows.
pub fn dunkl_kernel(group: &ReflectionGroup, x: &[f64], y: &[f64]) -> Result<f64> {
    let l = ln_dunkl_kernel(group, x, y)?;
    if l > 709.0 {
        return Err(Error::Range { what: "Dunkl kernel".into(), log_value: l });
    }
    Ok(l.exp())
}
