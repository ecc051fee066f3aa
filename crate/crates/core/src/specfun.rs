//! Scalar special functions: Laguerre and Gegenbauer polynomials, modified
//! and ordinary Bessel functions of real order, Gamma and Beta.
//!
//! Polynomials are evaluated by forward three-term recurrence in `f64`.
//! The modified Bessel function `I_nu` switches from a positive-term power
//! series to the Hankel asymptotic expansion at [`bessel_i_switch_point`].

use crate::error::{domain, Error, Result};

/// Largest polynomial degree accepted by the recurrences.
pub const MAX_DEGREE: usize = 512;

const LN_MAX_F64: f64 = 709.78;

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::Size(format!("degree {n} exceeds cap {MAX_DEGREE}")));
    }
    Ok(())
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires x > 0, got {x}"));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("gamma requires x > 0, got {x}"));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// `ln B(a, b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_beta(a, b)?.exp())
}

/// Laguerre polynomial `L_k^delta(x)`.
pub fn laguerre_poly(k: usize, delta: f64, x: f64) -> Result<f64> {
    if !(delta > -1.0) {
        return domain(format!("Laguerre parameter must exceed -1, got {delta}"));
    }
    check_degree(k)?;
    Ok(laguerre_unchecked(k, delta, x))
}

/// All values `L_0^delta(x), ..., L_kmax^delta(x)`.
pub fn laguerre_all(kmax: usize, delta: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax == 0 {
        return out;
    }
    out.push(delta + 1.0 - x);
    for k in 1..kmax {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + delta - x) * out[k] - (kf + delta) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

pub(crate) fn laguerre_unchecked(k: usize, delta: f64, x: f64) -> f64 {
    // L_{-1} is taken as zero so derivative identities can index k - 1 freely.
    let (mut prev, mut cur) = (1.0, delta + 1.0 - x);
    match k {
        0 => return 1.0,
        1 => return cur,
        _ => {}
    }
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + delta - x) * cur - (jf + delta) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Gegenbauer (ultraspherical) polynomial `C_m^lambda(t)`.
///
/// At `lambda = 0` the Chebyshev limit `lim C_m^l / l = (2/m) T_m` is used
/// for `m >= 1` (and `1` for `m = 0`), which keeps `C_m / C_m(1) = T_m`.
pub fn gegenbauer_poly(m: usize, lambda: f64, t: f64) -> Result<f64> {
    if !(lambda > -0.5) {
        return domain(format!("Gegenbauer parameter must exceed -1/2, got {lambda}"));
    }
    check_degree(m)?;
    if lambda == 0.0 {
        if m == 0 {
            return Ok(1.0);
        }
        return Ok(2.0 / m as f64 * chebyshev_t(m, t));
    }
    if m == 0 {
        return Ok(1.0);
    }
    let (mut prev, mut cur) = (1.0, 2.0 * lambda * t);
    for n in 1..m {
        let nf = n as f64;
        let next = (2.0 * (nf + lambda) * t * cur - (nf + 2.0 * lambda - 1.0) * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `C_m^lambda(1) = Γ(m + 2 lambda) / (Γ(2 lambda) m!)`, with the same
/// Chebyshev convention as [`gegenbauer_poly`] at `lambda = 0`.
pub fn gegenbauer_at_one(m: usize, lambda: f64) -> Result<f64> {
    if !(lambda > -0.5) {
        return domain(format!("Gegenbauer parameter must exceed -1/2, got {lambda}"));
    }
    if m == 0 {
        return Ok(1.0);
    }
    if lambda == 0.0 {
        return Ok(2.0 / m as f64);
    }
    if lambda > 0.0 {
        return Ok((log_gamma(m as f64 + 2.0 * lambda)? - log_gamma(2.0 * lambda)? - log_gamma(m as f64 + 1.0)?).exp());
    }
    gegenbauer_poly(m, lambda, 1.0)
}

fn chebyshev_t(m: usize, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, t);
    if m == 0 {
        return 1.0;
    }
    for _ in 1..m {
        let next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Argument beyond which `I_nu` is evaluated by the Hankel expansion.
pub fn bessel_i_switch_point(nu: f64) -> f64 {
    30.0_f64.max(nu * nu)
}

/// Modified Bessel function `I_nu(z)` of real order `nu > -1`, `z >= 0`.
pub fn bessel_i(nu: f64, z: f64) -> Result<f64> {
    let ln = ln_bessel_i(nu, z)?;
    if ln == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if ln > LN_MAX_F64 {
        return Err(Error::Range { what: format!("I_{nu}({z})"), log_value: ln });
    }
    Ok(ln.exp())
}

/// `ln I_nu(z)`; finite for every representable `z > 0`.
pub fn ln_bessel_i(nu: f64, z: f64) -> Result<f64> {
    if !(nu > -1.0) {
        return domain(format!("Bessel order must exceed -1, got {nu}"));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return domain(format!("Bessel argument must be finite and >= 0, got {z}"));
    }
    if z == 0.0 {
        return if nu == 0.0 {
            Ok(0.0)
        } else if nu > 0.0 {
            Ok(f64::NEG_INFINITY)
        } else {
            Err(Error::Range { what: format!("I_{nu}(0)"), log_value: f64::INFINITY })
        };
    }
    if z <= bessel_i_switch_point(nu) {
        Ok(ln_bessel_i_series(nu, z))
    } else {
        Ok(ln_bessel_i_hankel(nu, z))
    }
}

/// Power series `sum (z/2)^(2k+nu) / (k! Γ(k+nu+1))`; every term is positive.
pub fn ln_bessel_i_series(nu: f64, z: f64) -> f64 {
    let half = 0.5 * z;
    let q = half * half;
    let ln_t0 = nu * half.ln() - statrs::function::gamma::ln_gamma(nu + 1.0);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut ln_scale = 0.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + nu));
        sum += term;
        if sum > 1e280 {
            sum *= 1e-280;
            term *= 1e-280;
            ln_scale += 280.0 * std::f64::consts::LN_10;
        }
        if term < sum * 1e-17 && k > half {
            break;
        }
        k += 1.0;
    }
    ln_t0 + ln_scale + sum.ln()
}

/// Hankel expansion `e^z / sqrt(2 pi z) * sum (-1)^k a_k(nu) / z^k`.
pub fn ln_bessel_i_hankel(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * z);
        if term.abs() >= last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
    }
    z - 0.5 * (2.0 * std::f64::consts::PI * z).ln() + sum.ln()
}

/// Ordinary Bessel functions `J_{nu+n}(z)` for `n = 0..count`, by Miller's
/// backward recurrence normalized with `(z/2)^nu = sum_k (nu+2k) Γ(nu+k)/k! J_{nu+2k}(z)`.
pub fn bessel_j_sequence(nu: f64, z: f64, count: usize) -> Result<Vec<f64>> {
    if !(nu > -1.0) {
        return domain(format!("Bessel order must exceed -1, got {nu}"));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return domain(format!("Bessel argument must be finite and >= 0, got {z}"));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if z == 0.0 {
        return Ok((0..count).map(|n| if n == 0 && nu == 0.0 { 1.0 } else { 0.0 }).collect());
    }
    let top = (count as f64).max(z);
    let mut m = (top + 20.0 + (40.0 * top).sqrt()).ceil() as usize;
    m += m % 2;
    let mut j = vec![0.0_f64; m + 2];
    j[m] = 1e-30;
    for n in (1..=m).rev() {
        let mu = nu + n as f64;
        j[n - 1] = 2.0 * mu / z * j[n] - j[n + 1];
        if j[n - 1].abs() > 1e250 {
            for v in j[n - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // Normalization sum, divided through by Γ(nu + 1).
    let mut sum = j[0];
    let mut poch = 1.0; // (nu+1)_{k-1} / k!
    let mut k = 1;
    while 2 * k <= m {
        let kf = k as f64;
        if k > 1 {
            poch *= (nu + kf - 1.0) / kf;
        } else {
            poch = 1.0;
        }
        sum += (nu + 2.0 * kf) * poch * j[2 * k];
        k += 1;
    }
    let target = (nu * (0.5 * z).ln() - log_gamma(nu + 1.0)?).exp();
    let scale = target / sum;
    Ok(j[..count].iter().map(|v| v * scale).collect())
}

/// Ordinary Bessel function `J_nu(z)`.
pub fn bessel_j(nu: f64, z: f64) -> Result<f64> {
    Ok(bessel_j_sequence(nu, z, 1)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn laguerre_low_degrees() {
        assert_eq!(laguerre_poly(0, 0.7, 3.2).unwrap(), 1.0);
        for &(d, x) in &[(0.3, 1.7), (-0.5, 0.2), (4.0, 9.0)] {
            assert!((laguerre_poly(1, d, x).unwrap() - (d + 1.0 - x)).abs() < 1e-15);
        }
    }

    #[test]
    fn laguerre_matches_hypergeometric_series() {
        // L_k^d(x) = sum_i (-1)^i binom(k+d, k-i) x^i / i!, summed directly.
        fn series(k: usize, d: f64, x: f64) -> f64 {
            let mut s = 0.0;
            for i in 0..=k {
                let mut binom = 1.0;
                for l in 1..=(k - i) {
                    binom *= (d + i as f64 + l as f64) / l as f64;
                }
                let mut fact = 1.0;
                for l in 1..=i {
                    fact *= l as f64;
                }
                s += if i % 2 == 0 { 1.0 } else { -1.0 } * binom * x.powi(i as i32) / fact;
            }
            s
        }
        // (2, 0.5, 1.0): 1.5*2.5/2 - 2.5 + 1/2 = -0.125
        assert!((laguerre_poly(2, 0.5, 1.0).unwrap() - (-0.125)).abs() < 1e-15);
        for k in 0..12 {
            for &(d, x) in &[(0.5, 1.0), (-0.5, 2.3), (2.35, 0.4)] {
                assert!((laguerre_poly(k, d, x).unwrap() - series(k, d, x)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn laguerre_domain_and_size() {
        assert!(matches!(laguerre_poly(2, -1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(laguerre_poly(513, 0.0, 0.0), Err(Error::Size(_))));
    }

    #[test]
    fn laguerre_derivative_identity() {
        for k in 1..=20 {
            for &(d, x) in &[(0.0, 0.7), (0.9, 2.1), (2.35, 5.0)] {
                let h = 1e-5;
                let fd = (laguerre_poly(k, d, x + h).unwrap() - laguerre_poly(k, d, x - h).unwrap()) / (2.0 * h);
                let exact = -laguerre_poly(k - 1, d + 1.0, x).unwrap();
                assert!(
                    (fd - exact).abs() <= 1e-10 * exact.abs().max(1.0) * 10.0 + 1e-7,
                    "k={k} d={d} x={x}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn gegenbauer_closed_forms() {
        assert_eq!(gegenbauer_poly(0, 1.3, 0.2).unwrap(), 1.0);
        assert!((gegenbauer_poly(1, 1.3, 0.2).unwrap() - 2.0 * 1.3 * 0.2).abs() < 1e-15);
        // C_4^{3/2}(t) from the explicit sum over floor(m/2):
        // C_m^l(t) = sum_k (-1)^k Γ(m-k+l) / (Γ(l) k! (m-2k)!) (2t)^(m-2k)
        let series = |m: usize, l: f64, t: f64| -> f64 {
            let mut s = 0.0;
            for k in 0..=m / 2 {
                let c = (log_gamma(m as f64 - k as f64 + l).unwrap()
                    - log_gamma(l).unwrap()
                    - log_gamma(k as f64 + 1.0).unwrap()
                    - log_gamma((m - 2 * k) as f64 + 1.0).unwrap())
                .exp();
                s += if k % 2 == 0 { c } else { -c } * (2.0 * t).powi((m - 2 * k) as i32);
            }
            s
        };
        let v = gegenbauer_poly(4, 1.5, 0.3).unwrap();
        assert!(rel(v, series(4, 1.5, 0.3)) < 1e-13);
        for &l in &[0.5, 1.5] {
            for m in 0..=15 {
                let end = gegenbauer_poly(m, l, 1.0).unwrap();
                assert!(rel(end, gegenbauer_at_one(m, l).unwrap()) < 1e-10);
                let diff = gegenbauer_poly(m, l, 0.3).unwrap() - series(m, l, 0.3);
                assert!(diff.abs() < 1e-12 * end, "m={m} l={l}");
            }
        }
        assert!(matches!(gegenbauer_poly(2, -0.5, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn gegenbauer_chebyshev_limit() {
        let t = 0.37;
        for m in 1..8 {
            let small = gegenbauer_poly(m, 1e-9, t).unwrap() / 1e-9;
            let limit = gegenbauer_poly(m, 0.0, t).unwrap();
            assert!((small - limit).abs() < 1e-6, "m={m}");
            let cheb = (m as f64 * t.acos()).cos();
            assert!((limit / gegenbauer_at_one(m, 0.0).unwrap() - cheb).abs() < 1e-13);
        }
    }

    #[test]
    fn bessel_i_known_values() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(0.7, 0.0).unwrap(), 0.0);
        let z = 2.0_f64;
        let half = (2.0 / (std::f64::consts::PI * z)).sqrt() * z.sinh();
        assert!(rel(bessel_i(0.5, z).unwrap(), half) < 1e-14);
        for &z in &[0.1, 1.0, 7.5, 15.0, 29.0, 31.0, 60.0, 150.0, 200.0] {
            let exact = (2.0 / (std::f64::consts::PI * z)).sqrt() * z.sinh();
            assert!(rel(bessel_i(0.5, z).unwrap(), exact) < 1e-12, "z={z}");
            let exact_m = (2.0 / (std::f64::consts::PI * z)).sqrt() * z.cosh();
            assert!(rel(bessel_i(-0.5, z).unwrap(), exact_m) < 1e-12, "z={z}");
            // I_{3/2}(z) = sqrt(2/(pi z)) (cosh z - sinh z / z)
            let exact_3 = (2.0 / (std::f64::consts::PI * z)).sqrt() * (z.cosh() - z.sinh() / z);
            assert!(rel(bessel_i(1.5, z).unwrap(), exact_3) < 1e-12, "z={z}");
        }
    }

    #[test]
    fn bessel_i_regimes_agree_at_switch() {
        for &nu in &[0.0, 0.1, 0.5, 1.3, 2.35, 4.0, 6.5, 9.0] {
            let z = bessel_i_switch_point(nu);
            let a = ln_bessel_i_series(nu, z);
            let b = ln_bessel_i_hankel(nu, z);
            assert!((a - b).abs() < 1e-10, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn bessel_i_overflow_is_range_error() {
        assert!(matches!(bessel_i(0.3, 800.0), Err(Error::Range { .. })));
        assert!(ln_bessel_i(0.3, 800.0).unwrap().is_finite());
        assert!(ln_bessel_i(0.3, 1e4).unwrap().is_finite());
    }

    #[test]
    fn bessel_j_closed_forms() {
        let pi = std::f64::consts::PI;
        for &z in &[0.1, 1.0, 5.0, 10.0, 20.0] {
            let s = (2.0 / (pi * z)).sqrt();
            let js = bessel_j_sequence(0.5, z, 2).unwrap();
            assert!((js[0] - s * z.sin()).abs() < 1e-13, "z={z}");
            assert!((js[1] - s * (z.sin() / z - z.cos())).abs() < 1e-13, "z={z}");
        }
        // J_0(1) by its power series.
        let mut j0 = 0.0;
        let mut term = 1.0;
        for k in 0..30 {
            if k > 0 {
                term *= -0.25 / (k as f64 * k as f64);
            }
            j0 += term;
        }
        assert!((bessel_j(0.0, 1.0).unwrap() - j0).abs() < 1e-15);
    }

    #[test]
    fn gamma_and_beta() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!((beta(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((log_gamma(0.5).unwrap() - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(beta(-1.0, 2.0), Err(Error::Domain(_))));
    }
}
