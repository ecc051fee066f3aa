//! Laguerre functions `psi_k^delta` on `(R+, r^(2 delta + 1) dr)`, the operator
//! `L_delta`, its heat kernel, `L_delta^(-1/2)`, the Laguerre Riesz transform
//! and the modified semigroup carrying the `(rs)^m` factor.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadrature::{gauss_jacobi, radial_rule_scaled, RadialRule};
use crate::specfun::{laguerre_all, ln_bessel_i, log_gamma};

/// Eigenvalue law `k -> 4k + 2 delta + 2` of `L_delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaguerreSystem {
    pub delta: f64,
}

impl LaguerreSystem {
    pub fn new(delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(LaguerreSystem { delta })
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        4.0 * k as f64 + 2.0 * self.delta + 2.0
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= -0.5) {
        return domain(format!("Laguerre type must be >= -1/2, got {delta}"));
    }
    Ok(())
}

fn ln_psi_norm(k: usize, delta: f64) -> f64 {
    0.5 * (std::f64::consts::LN_2 + log_gamma(k as f64 + 1.0).unwrap() - log_gamma(k as f64 + delta + 1.0).unwrap())
}

/// `psi_k^delta(r) = (2 k! / Γ(k + delta + 1))^(1/2) L_k^delta(r^2) e^(-r^2/2)`.
pub fn psi(k: usize, delta: f64, r: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(psi_all(k, delta, r)[k])
}

/// `psi_0^delta(r), .., psi_kmax^delta(r)`.
pub fn psi_all(kmax: usize, delta: f64, r: f64) -> Vec<f64> {
    let t = r * r;
    let g = (-0.5 * t).exp();
    laguerre_all(kmax, delta, t).into_iter().enumerate().map(|(k, l)| ln_psi_norm(k, delta).exp() * l * g).collect()
}

/// `(d/dr + r) psi_k^delta = -2 sqrt(k) r psi_{k-1}^(delta+1)`, from the
/// derivative identity of the Laguerre polynomials; `k = 0` gives zero.
pub fn psi_raised_all(kmax: usize, delta: f64, r: f64) -> Vec<f64> {
    let t = r * r;
    let g = (-0.5 * t).exp();
    let lb = if kmax == 0 { Vec::new() } else { laguerre_all(kmax - 1, delta + 1.0, t) };
    (0..=kmax)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                // C_k^delta * 2 r * (-L_{k-1}^{delta+1}(r^2)) e^{-r^2/2}
                -2.0 * ln_psi_norm(k, delta).exp() * r * lb[k - 1] * g
            }
        })
        .collect()
}

/// Finite expansion `sum_k c_k psi_k^delta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaguerreCoeffs {
    pub delta: f64,
    pub coeffs: Vec<f64>,
}

impl LaguerreCoeffs {
    pub fn new(delta: f64, coeffs: Vec<f64>) -> Result<Self> {
        check_delta(delta)?;
        Ok(LaguerreCoeffs { delta, coeffs })
    }

    pub fn random(delta: f64, len: usize, rng: &mut impl Rng) -> Result<Self> {
        let coeffs = (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        Self::new(delta, coeffs)
    }

    /// Truncation `K`: number of stored coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn system(&self) -> LaguerreSystem {
        LaguerreSystem { delta: self.delta }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        let p = psi_all(self.coeffs.len() - 1, self.delta, r);
        self.coeffs.iter().zip(&p).map(|(c, v)| c * v).sum()
    }

    fn multiply(&self, f: impl Fn(f64) -> f64) -> Self {
        let sys = self.system();
        let coeffs = self.coeffs.iter().enumerate().map(|(k, c)| c * f(sys.eigenvalue(k))).collect();
        LaguerreCoeffs { delta: self.delta, coeffs }
    }

    /// `e^{-t L_delta}`.
    pub fn heat(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return domain(format!("heat time must be nonnegative, got {t}"));
        }
        Ok(self.multiply(|l| (-l * t).exp()))
    }

    /// `L_delta^{-1/2}`.
    pub fn l_inv_sqrt(&self) -> Self {
        self.multiply(|l| 1.0 / l.sqrt())
    }

    /// `(d/dr + r) g(r)` for `g = sum_k c_k psi_k`, evaluated exactly.
    pub fn eval_raised(&self, r: f64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        let p = psi_raised_all(self.coeffs.len() - 1, self.delta, r);
        self.coeffs.iter().zip(&p).map(|(c, v)| c * v).sum()
    }

    /// Radial derivative of the expansion.
    pub fn eval_deriv(&self, r: f64) -> f64 {
        self.eval_raised(r) - r * self.eval(r)
    }
}

/// `R^delta = (d/dr + r) L_delta^{-1/2}` as a point-evaluable function.
pub fn riesz_laguerre(f: &LaguerreCoeffs) -> impl Fn(f64) -> f64 {
    let g = f.l_inv_sqrt();
    move |r| g.eval_raised(r)
}

/// `L_delta^{-1/2} f (r)` through `pi^{-1/2} int_0^inf e^{-t L} f t^{-1/2} dt`.
/// With `t = u^2` the integrand is smooth; composite Gauss–Legendre panels on
/// `[0, U]` with `e^{-lambda_0 U^2}` below `1e-18`.
pub fn l_inv_sqrt_time_integral(f: &LaguerreCoeffs, r: f64) -> Result<f64> {
    let sys = f.system();
    let lam0 = sys.eigenvalue(0);
    let u_max = (18.0 * std::f64::consts::LN_10 / lam0).sqrt();
    let gl = gauss_jacobi(0.0, 0.0, 20)?;
    let panels = 64;
    let h = u_max / panels as f64;
    let vals: Vec<f64> =
        f.coeffs.iter().zip(psi_all(f.len().saturating_sub(1), f.delta, r)).map(|(c, p)| c * p).collect();
    let mut acc = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let u = a + 0.5 * h * (x + 1.0);
            let integrand: f64 = vals.iter().enumerate().map(|(k, v)| v * (-sys.eigenvalue(k) * u * u).exp()).sum();
            acc += 0.5 * h * w * 2.0 * integrand;
        }
    }
    Ok(acc / std::f64::consts::PI.sqrt())
}

/// `ln K_t^delta(r, s)` from the closed form
/// `(sinh 2t)^-1 exp(-coth(2t)(r^2+s^2)/2) (rs)^-delta I_delta(rs / sinh 2t)`.
pub fn ln_heat_kernel_closed(delta: f64, t: f64, r: f64, s: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(t > 0.0) || !(r > 0.0) || !(s > 0.0) {
        return domain("heat kernel needs t, r, s > 0");
    }
    let sh = (2.0 * t).sinh();
    let coth = 1.0 / (2.0 * t).tanh();
    let z = r * s / sh;
    Ok(-sh.ln() - 0.5 * coth * (r * r + s * s) - delta * (r * s).ln() + ln_bessel_i(delta, z)?)
}

pub fn heat_kernel_closed(delta: f64, t: f64, r: f64, s: f64) -> Result<f64> {
    let l = ln_heat_kernel_closed(delta, t, r, s)?;
    if l > 709.0 {
        return Err(Error::Range { what: "Laguerre heat kernel".into(), log_value: l });
    }
    Ok(l.exp())
}

/// Truncated spectral sum with a tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralValue {
    pub value: f64,
    /// Geometric extrapolation of the omitted terms from the last one.
    pub tail_bound: f64,
    /// `sum_k |term_k|`; its ratio to `|value|` measures cancellation.
    pub abs_sum: f64,
}

/// `sum_{k<K} e^{-(4k+2 delta+2)t} psi_k(r) psi_k(s)`.
pub fn heat_kernel_spectral(delta: f64, t: f64, r: f64, s: f64, kk: usize) -> Result<SpectralValue> {
    check_delta(delta)?;
    if kk == 0 {
        return domain("spectral truncation must be at least 1");
    }
    let pr = psi_all(kk - 1, delta, r);
    let ps = psi_all(kk - 1, delta, s);
    let sys = LaguerreSystem { delta };
    let mut value = 0.0;
    let mut abs_sum = 0.0;
    let mut last = 0.0;
    for k in 0..kk {
        last = (-sys.eigenvalue(k) * t).exp() * pr[k] * ps[k];
        value += last;
        abs_sum += last.abs();
    }
    let q = (-4.0 * t).exp();
    Ok(SpectralValue { value, tail_bound: last.abs() * q / (1.0 - q), abs_sum })
}

/// The modified semigroup
/// `h -> r^m int_0^inf K_t^(delta0+m)(r, s) s^-m h(s) d mu_(delta0+m)(s)`,
/// realized on the nodes of `rule`, a radial rule for `d mu_delta0`.
pub fn modified_semigroup(m: u32, delta0: f64, t: f64, h: &[f64], rule: &RadialRule) -> Result<Vec<f64>> {
    if h.len() != rule.len() {
        return domain("samples must live on the rule's nodes");
    }
    if (rule.delta - delta0).abs() > 1e-15 {
        return domain("rule must be built for d mu_delta0");
    }
    let delta = delta0 + m as f64;
    let mut out = Vec::with_capacity(rule.len());
    for &r in &rule.nodes {
        let mut acc = 0.0;
        for ((&s, &w), &hs) in rule.nodes.iter().zip(&rule.weights).zip(h) {
            // (rs)^m K^{delta0+m}(r,s) against s^{2 delta0 + 1} ds
            let lk = ln_heat_kernel_closed(delta, t, r, s)? + m as f64 * (r * s).ln();
            acc += w * lk.exp() * hs;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Matrix `M[k][j] = <(d/dr + r) psi_k^delta, r psi_j^(delta+1)>_{mu_delta}`,
/// measured by quadrature; the expected pattern is `-2 sqrt(k)` at `j = k-1`.
pub fn measure_raising_table(delta: f64, kmax: usize) -> Result<Vec<Vec<f64>>> {
    check_delta(delta)?;
    let rule = radial_rule_scaled(delta, kmax + 2, 1.0)?;
    let mut m = vec![vec![0.0; kmax + 1]; kmax + 1];
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        let a = psi_raised_all(kmax, delta, r);
        let b = psi_all(kmax, delta + 1.0, r);
        for k in 0..=kmax {
            for j in 0..=kmax {
                m[k][j] += w * a[k] * r * b[j];
            }
        }
    }
    Ok(m)
}

/// Outcome of one vector-inequality trial: both sides of the weighted
/// mixed quantity and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VectorProbe {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Which operator the vector probe applies to `f~_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VectorOperator {
    /// `r^m R^{delta+m} f~_m`
    Riesz,
    /// `m r^{m-1} L_{delta+m}^{-1/2} f~_m`
    InvSqrt,
}

/// Left and right sides of
/// `int (sum_m |T_m f~_m|^2)^{p/2} r^a d mu_delta` vs
/// `int (sum_m |f_m|^2)^{p/2} r^a d mu_delta`, `f_m = r^m f~_m`,
/// with `f~_m` given in the basis `psi^{delta+m}`.
pub fn vector_inequality_probe(
    delta: f64,
    p: f64,
    a: f64,
    fs: &[LaguerreCoeffs],
    op: VectorOperator,
    n: usize,
) -> Result<VectorProbe> {
    check_delta(delta)?;
    for (m, f) in fs.iter().enumerate() {
        if (f.delta - (delta + m as f64)).abs() > 1e-12 {
            return domain(format!("component {m} must be expanded in psi^(delta+{m})"));
        }
    }
    let rule = radial_rule_scaled(delta + a / 2.0, n, p / 2.0)?;
    let inv: Vec<LaguerreCoeffs> = fs.iter().map(|f| f.l_inv_sqrt()).collect();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        let mut sl = 0.0;
        let mut sr = 0.0;
        for (m, (f, g)) in fs.iter().zip(&inv).enumerate() {
            let rm = r.powi(m as i32);
            let fm = rm * f.eval(r);
            let tm = match op {
                VectorOperator::Riesz => rm * g.eval_raised(r),
                VectorOperator::InvSqrt => {
                    if m == 0 {
                        0.0
                    } else {
                        m as f64 * r.powi(m as i32 - 1) * g.eval(r)
                    }
                }
            };
            sl += tm * tm;
            sr += fm * fm;
        }
        lhs += w * sl.powf(p / 2.0);
        rhs += w * sr.powf(p / 2.0);
    }
    Ok(VectorProbe { lhs, rhs, ratio: lhs / rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::radial_rule;
    use crate::specfun::gamma;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ground_state_formula() {
        for &d in &[-0.5, 0.0, 0.9] {
            for &r in &[0.1, 1.0, 2.5] {
                let v = psi(0, d, r).unwrap();
                let e = (2.0 / gamma(d + 1.0).unwrap()).sqrt() * (-r * r / 2.0).exp();
                assert!((v - e).abs() < 1e-15);
            }
        }
        assert!(matches!(psi(0, -0.7, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn orthonormality() {
        let delta = 0.9;
        let rule = radial_rule(delta, 40).unwrap();
        let tabs: Vec<Vec<f64>> = rule.nodes.iter().map(|&r| psi_all(20, delta, r)).collect();
        for j in 0..=20 {
            for k in 0..=20 {
                let v: f64 = tabs.iter().zip(&rule.weights).map(|(t, w)| w * t[j] * t[k]).sum();
                let e = if j == k { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-10, "({j},{k})");
            }
        }
    }

    /// Adaptive Simpson oracle on `[0, 12]` for the ground-state norm.
    #[test]
    fn ground_state_norm_adaptive() {
        #[allow(clippy::too_many_arguments)]
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
        }
        let delta = 0.9;
        let f = |r: f64| psi(0, delta, r).unwrap().powi(2) * r.powf(2.0 * delta + 1.0);
        let (a, b) = (0.0, 12.0);
        let oracle = simpson(&f, a, b, f(a), f(0.5 * (a + b)), f(b), 1e-13, 40);
        assert!((oracle - 1.0).abs() < 1e-10);
        let rule = radial_rule(delta, 40).unwrap();
        assert!((rule.integrate(|r| psi(0, delta, r).unwrap().powi(2)) - oracle).abs() < 1e-10);
    }

    #[test]
    fn eigen_equation_residual() {
        // L psi = -psi'' - (2 delta + 1)/r psi' + r^2 psi, derivatives by the
        // exact raising formula and finite differences of the exact derivative
        let delta = 0.9;
        for k in 0..6 {
            let f = LaguerreCoeffs::new(delta, (0..=k).map(|i| if i == k { 1.0 } else { 0.0 }).collect()).unwrap();
            for &r in &[0.4, 1.3, 2.2] {
                let h = 1e-5;
                let d1 = f.eval_deriv(r);
                let d2 = (f.eval_deriv(r + h) - f.eval_deriv(r - h)) / (2.0 * h);
                let lpsi = -d2 - (2.0 * delta + 1.0) / r * d1 + r * r * f.eval(r);
                let e = f.system().eigenvalue(k) * f.eval(r);
                assert!((lpsi - e).abs() < 1e-6, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn kernels_agree() {
        for &delta in &[-0.5, 0.0, 0.9, 2.35] {
            for &t in &[0.3, 0.5, 2.0] {
                for &(r, s) in &[(0.1, 0.1), (0.7, 2.2), (4.0, 4.0), (0.1, 4.0)] {
                    let c = heat_kernel_closed(delta, t, r, s).unwrap();
                    let sp = heat_kernel_spectral(delta, t, r, s, 120).unwrap();
                    assert!((c - sp.value).abs() < 1e-10 * c, "delta={delta} t={t} r={r} s={s}: {c} {}", sp.value);
                    let sym = heat_kernel_closed(delta, t, s, r).unwrap();
                    assert!((c - sym).abs() < 1e-14 * c);
                }
            }
        }
        let one = heat_kernel_spectral(0.9, 0.5, 0.7, 1.1, 1).unwrap().value;
        let e = (-(2.0 * 0.9 + 2.0) * 0.5f64).exp() * psi(0, 0.9, 0.7).unwrap() * psi(0, 0.9, 1.1).unwrap();
        assert!((one - e).abs() < 1e-16);
    }

    #[test]
    fn spectral_cauchy_convergence() {
        let a = heat_kernel_spectral(0.9, 0.3, 1.5, 2.0, 100).unwrap();
        let b = heat_kernel_spectral(0.9, 0.3, 1.5, 2.0, 101).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
        assert!(a.tail_bound < 1e-12);
    }

    #[test]
    fn even_classical_mehler_reduction() {
        // delta = -1/2: K(r,s) is the even part of the 1D Mehler kernel, times 2
        use crate::dunkl::ReflectionGroup;
        use crate::hermite::MehlerKernel;
        let g = ReflectionGroup::classical(1);
        let m = MehlerKernel::calibrate(&g).unwrap();
        for &(t, r, s) in &[(0.5, 0.3, 1.2), (1.0, 2.0, 0.4)] {
            let even = m.eval(t, &[r], &[s]).unwrap() + m.eval(t, &[r], &[-s]).unwrap();
            let k = heat_kernel_closed(-0.5, t, r, s).unwrap();
            assert!((k - even).abs() < 1e-12 * k);
        }
    }

    #[test]
    fn riesz_ground_state_and_bound() {
        let f = LaguerreCoeffs::new(0.9, vec![1.0]).unwrap();
        let rf = riesz_laguerre(&f);
        for &r in &[0.2, 1.0, 3.0] {
            assert!(rf(r).abs() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rule = radial_rule(0.9, 60).unwrap();
        for _ in 0..10 {
            let f = LaguerreCoeffs::random(0.9, 12, &mut rng).unwrap();
            let rf = riesz_laguerre(&f);
            let n2 = rule.integrate(|r| rf(r).powi(2));
            assert!(n2.sqrt() <= f.norm() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn riesz_matches_hermite_in_one_dimension() {
        // even classical Hermite data: phi_{2k}(x) = psi_k^{-1/2}(|x|) / sqrt 2 up to sign
        use crate::dunkl::ReflectionGroup;
        use crate::hermite::{LadderTable, SpectralCoeffs};
        let g = ReflectionGroup::classical(1);
        let lad = LadderTable::measure(&g, 12).unwrap();
        let coeffs = [0.7, -0.3, 0.5, 0.2];
        let mut h = SpectralCoeffs::new(&g, 8);
        let mut l = Vec::new();
        for (k, &c) in coeffs.iter().enumerate() {
            h.set(vec![2 * k as u32], c);
            // sign (-1)^k relates the two conventions
            l.push(if k % 2 == 0 { c } else { -c } / 2f64.sqrt());
        }
        let lag = LaguerreCoeffs::new(-0.5, l).unwrap();
        let rh = h.apply_riesz(0, &lad);
        let rl = riesz_laguerre(&lag);
        // H = 2 L_{-1/2} on even functions when lifted: eigenvalues 4k+1 both sides
        for &r in &[0.3, 1.1, 2.4] {
            assert!((rh.eval(&[r]) - rl(r)).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn raising_table_pattern() {
        let m = measure_raising_table(0.9, 10).unwrap();
        for k in 0..=10 {
            for j in 0..=10 {
                let e = if k >= 1 && j == k - 1 { -2.0 * (k as f64).sqrt() } else { 0.0 };
                assert!((m[k][j] - e).abs() < 1e-11, "({k},{j})");
            }
        }
    }

    #[test]
    fn inverse_sqrt_time_integral() {
        let f = LaguerreCoeffs::new(0.9, vec![0.4, -1.0, 0.3, 0.8]).unwrap();
        for &r in &[0.3, 1.0, 2.0] {
            let direct = f.l_inv_sqrt().eval(r);
            let via_t = l_inv_sqrt_time_integral(&f, r).unwrap();
            assert!((direct - via_t).abs() < 1e-8, "r={r}: {direct} {via_t}");
        }
        let g = LaguerreCoeffs::new(0.9, vec![1.0]).unwrap().l_inv_sqrt();
        assert!((g.coeffs[0] - (2.0 * 0.9 + 2.0f64).powf(-0.5)).abs() < 1e-16);
    }

    #[test]
    fn modified_semigroup_properties() {
        let delta0 = 0.3;
        let rule = radial_rule(delta0, 48).unwrap();
        let h: Vec<f64> = rule.nodes.iter().map(|&r| (1.0 + r * r) * (-0.5 * r * r).exp()).collect();
        for m in 0..3 {
            let a = modified_semigroup(m, delta0, 0.4, &h, &rule).unwrap();
            assert!(a.iter().all(|v| *v >= 0.0));
            let ab = modified_semigroup(m, delta0, 0.3, &a, &rule).unwrap();
            let c = modified_semigroup(m, delta0, 0.7, &h, &rule).unwrap();
            for (i, (x, y)) in ab.iter().zip(&c).enumerate() {
                if rule.nodes[i] < 5.0 {
                    assert!((x - y).abs() < 1e-7 * y.abs().max(1e-3), "m={m} i={i}: {x} {y}");
                }
            }
        }
        // m = 0 with h = psi_k: eigenfunction
        let h: Vec<f64> = rule.nodes.iter().map(|&r| psi(2, delta0, r).unwrap()).collect();
        let out = modified_semigroup(0, delta0, 0.5, &h, &rule).unwrap();
        let lam = LaguerreSystem::new(delta0).unwrap().eigenvalue(2);
        for (i, &r) in rule.nodes.iter().enumerate().take(30) {
            assert!((out[i] - (-lam * 0.5f64).exp() * psi(2, delta0, r).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn vector_probes_are_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let delta = 0.5;
        let fs: Vec<LaguerreCoeffs> =
            (0..=6).map(|m| LaguerreCoeffs::random(delta + m as f64, 6, &mut rng).unwrap()).collect();
        for op in [VectorOperator::Riesz, VectorOperator::InvSqrt] {
            let v = vector_inequality_probe(delta, 3.0, 0.5, &fs, op, 60).unwrap();
            assert!(v.lhs.is_finite() && v.rhs > 0.0 && v.ratio.is_finite());
        }
        let p2 = vector_inequality_probe(delta, 2.0, 0.0, &fs, VectorOperator::Riesz, 60).unwrap();
        assert!(p2.ratio <= 1.0 + 1e-9);
    }
}
