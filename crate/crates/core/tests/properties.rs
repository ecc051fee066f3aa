//! Property tests over random multiplicities, polynomials and expansions.

use std::collections::BTreeMap;

use dunkl_core::dunkl::{dunkl_commutator, dunkl_laplacian, dunkl_op};
use dunkl_core::hermite::{LadderTable, SpectralCoeffs};
use dunkl_core::hharmonics::build_basis;
use dunkl_core::mixed_norm::{ap_check, ap_quotient, conjugate, mixed_norm, pairing, MixedNormParams, PowerWeight};
use dunkl_core::probe::{CheckRecord, ProbeConfig, ProbeReport};
use dunkl_core::quadrature::{line_rule, radial_rule, sphere_rule};
use dunkl_core::specfun::gamma;
use dunkl_core::{Poly, ReflectionGroup};
use num::{BigInt, BigRational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Q = Poly<BigRational>;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn kappa_strategy(d: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((0i64..=16, 1i64..=8), d).prop_map(|v| v.into_iter().map(|(n, q)| rat(n, q)).collect())
}

fn poly_strategy(d: usize, max_deg: u32) -> impl Strategy<Value = Q> {
    prop::collection::vec((prop::collection::vec(0..=max_deg, d), -9i64..=9, 1i64..=5), 1..6).prop_map(move |terms| {
        let mut p = Q::zero(d);
        for (mut e, n, q) in terms {
            while e.iter().sum::<u32>() > max_deg {
                let k = e.iter().position(|&x| x > 0).unwrap();
                e[k] -= 1;
            }
            p.add_term(e, rat(n, q));
        }
        p
    })
}

fn group_and_poly(max_d: usize, max_deg: u32) -> impl Strategy<Value = (ReflectionGroup, Q)> {
    (2..=max_d).prop_flat_map(move |d| {
        (kappa_strategy(d), poly_strategy(d, max_deg))
            .prop_map(|(k, p)| (ReflectionGroup::from_rationals(k).unwrap(), p))
    })
}

/// `int F(x) e^{-|x|^2} h^2(x) dx` for polynomial `F` on `R^2`.
fn gaussian_integral(g: &ReflectionGroup, f: impl Fn(&[f64]) -> f64) -> f64 {
    let rules: Vec<_> = g.kappa().iter().map(|&k| line_rule(k, 14, 1.0).unwrap()).collect();
    let mut acc = 0.0;
    for (x, wx) in rules[0].nodes.iter().zip(&rules[0].weights) {
        for (y, wy) in rules[1].nodes.iter().zip(&rules[1].weights) {
            acc += wx * wy * (-(x * x + y * y)).exp() * f(&[*x, *y]);
        }
    }
    acc
}

/// `T_j (P e^{-|x|^2/2}) = (T_j P - x_j P) e^{-|x|^2/2}`, polynomial part.
fn dunkl_gaussian(g: &ReflectionGroup, j: usize, p: &Q) -> Q {
    dunkl_op(g, j, p).unwrap().sub(&p.mul_var(j))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dunkl_operators_commute((g, p) in group_and_poly(4, 8)) {
        for i in 0..g.d() {
            for j in 0..i {
                prop_assert!(dunkl_commutator(&g, i, j, &p).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn gamma_and_reflections((g, _) in group_and_poly(4, 0), x in prop::collection::vec(-3.0f64..3.0, 4)) {
        let gamma: f64 = g.kappa().iter().sum();
        prop_assert_eq!(g.gamma(), gamma);
        let mut y = x[..g.d()].to_vec();
        for j in 0..g.d() {
            g.reflect(j, &mut y);
            g.reflect(j, &mut y);
        }
        prop_assert_eq!(&y[..], &x[..g.d()]);
    }

    #[test]
    fn canonical_text_round_trips((g, p) in group_and_poly(4, 6)) {
        let back = Q::parse(g.d(), &p.to_string()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn dunkl_operator_is_skew((k, p, q) in (kappa_strategy(2), poly_strategy(2, 5), poly_strategy(2, 5))) {
        let g = ReflectionGroup::from_rationals(k).unwrap();
        for j in 0..2 {
            let tp = dunkl_gaussian(&g, j, &p).to_float();
            let tq = dunkl_gaussian(&g, j, &q).to_float();
            let (pf, qf) = (p.to_float(), q.to_float());
            let lhs = gaussian_integral(&g, |x| tp.eval(x) * qf.eval(x));
            let rhs = -gaussian_integral(&g, |x| pf.eval(x) * tq.eval(x));
            let scale = gaussian_integral(&g, |x| (tp.eval(x) * qf.eval(x)).abs()).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "j={j}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn dunkl_gradient_green_identity((k, p, q) in (kappa_strategy(2), poly_strategy(2, 5), poly_strategy(2, 5))) {
        let g = ReflectionGroup::from_rationals(k).unwrap();
        let grads_p: Vec<Q> = (0..2).map(|j| dunkl_gaussian(&g, j, &p)).collect();
        let grads_q: Vec<_> = (0..2).map(|j| dunkl_gaussian(&g, j, &q).to_float()).collect();
        let mut lap = Q::zero(2);
        for (j, gp) in grads_p.iter().enumerate() {
            lap = lap.add(&dunkl_gaussian(&g, j, gp));
        }
        let (lap, qf) = (lap.to_float(), q.to_float());
        let gp: Vec<_> = grads_p.iter().map(|x| x.to_float()).collect();
        let lhs = gaussian_integral(&g, |x| gp[0].eval(x) * grads_q[0].eval(x) + gp[1].eval(x) * grads_q[1].eval(x));
        let rhs = -gaussian_integral(&g, |x| lap.eval(x) * qf.eval(x));
        let scale = gaussian_integral(&g, |x| (lap.eval(x) * qf.eval(x)).abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "{lhs} vs {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn basis_is_exactly_harmonic_and_orthonormal(k in kappa_strategy(2), m_max in 1u32..=5) {
        let g = ReflectionGroup::from_rationals(k).unwrap();
        let basis = build_basis(&g, m_max).unwrap();
        prop_assert_eq!(basis.exact_harmonicity().unwrap().unwrap(), true);
        for y in basis.members() {
            let lap = dunkl_laplacian(&g, y.exact.as_ref().unwrap()).unwrap();
            prop_assert!(lap.is_zero());
        }
        prop_assert!(basis.gram_residual() < 1e-10);
    }

    #[test]
    fn ladder_tables_match_closed_form(k in prop::collection::vec(0.0f64..3.0, 1..=3)) {
        let g = ReflectionGroup::new(&k).unwrap();
        let measured = LadderTable::measure(&g, 24).unwrap();
        prop_assert!(measured.max_deviation(&LadderTable::closed_form(&g, 24)) < 1e-10);
        prop_assert!(measured.factorization_residual(23) < 1e-10);
    }

    #[test]
    fn radial_rules_are_well_formed(delta in -0.5f64..4.0, n in 1usize..=80) {
        let r = radial_rule(delta, n).unwrap();
        prop_assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(r.weights.iter().all(|&w| w > 0.0));
        let mass: f64 = r.integrate(|x| (-x * x).exp());
        let want = gamma(delta + 1.0).unwrap() / 2.0;
        prop_assert!((mass - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn sphere_rules_are_exact(k in prop::collection::vec(0.0f64..2.0, 2..=3), n in 2usize..=8, seed in any::<u64>()) {
        let d = k.len();
        let rule = sphere_rule(d, &k, n).unwrap();
        for i in 0..rule.len() {
            let norm: f64 = rule.point(i).iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-14);
        }
        prop_assert!(rule.weights.iter().all(|&w| w > 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let mut e: Vec<u32> = (0..d).map(|_| rand::Rng::random_range(&mut rng, 0..=rule.exactness as u32)).collect();
            while e.iter().sum::<u32>() as usize > rule.exactness {
                let j = e.iter().position(|&x| x > 0).unwrap();
                e[j] -= 1;
            }
            let got = rule.integrate(|w| w.iter().zip(&e).map(|(x, &p)| x.powi(p as i32)).product());
            let want = if e.iter().any(|p| p % 2 == 1) {
                0.0
            } else {
                let s: Vec<f64> = e.iter().zip(&k).map(|(&p, &kk)| p as f64 / 2.0 + kk + 0.5).collect();
                2.0 * s.iter().map(|&x| gamma(x).unwrap()).product::<f64>() / gamma(s.iter().sum()).unwrap()
            };
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{e:?}: {got} vs {want}");
        }
    }

    #[test]
    fn heat_commutes_with_symmetrization(k in prop::collection::vec(0.0f64..2.0, 2..=3), t in 0.01f64..3.0, seed in any::<u64>()) {
        let g = ReflectionGroup::new(&k).unwrap();
        let f = SpectralCoeffs::random(&g, 8, &mut ChaCha8Rng::seed_from_u64(seed));
        let s = f.g_symmetrize();
        prop_assert_eq!(f.apply_heat(t).unwrap().g_symmetrize(), s.apply_heat(t).unwrap());
        prop_assert_eq!(s.g_symmetrize(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn holder_inequality_with_dual_weight(
        k in prop::collection::vec(0.0f64..1.5, 2),
        p in 1.3f64..4.0,
        a in -0.5f64..0.5,
        seed in any::<u64>(),
    ) {
        let g = ReflectionGroup::new(&k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = SpectralCoeffs::random(&g, 6, &mut rng);
        let h = SpectralCoeffs::random(&g, 6, &mut rng);
        let w = PowerWeight::new(a);
        let nf = mixed_norm(|x| f.eval(x), &MixedNormParams::new(&g, p, w, 8).unwrap()).unwrap().value;
        let nh = mixed_norm(|x| h.eval(x), &MixedNormParams::new(&g, conjugate(p), w.dual(p), 8).unwrap()).unwrap().value;
        let pair = pairing(|x| f.eval(x), |x| h.eval(x), &g, 8).unwrap();
        prop_assert!(pair.abs() <= nf * nh * (1.0 + 1e-9), "{pair} > {nf} * {nh}");
    }

    #[test]
    fn symmetrization_does_not_increase_norm(
        k in prop::collection::vec(0.0f64..1.5, 2),
        p in 1.2f64..4.0,
        a in -0.5f64..0.5,
        seed in any::<u64>(),
    ) {
        let g = ReflectionGroup::new(&k).unwrap();
        let f = SpectralCoeffs::random(&g, 6, &mut ChaCha8Rng::seed_from_u64(seed));
        let s = f.g_symmetrize();
        let params = MixedNormParams::new(&g, p, PowerWeight::new(a), 8).unwrap();
        let nf = mixed_norm(|x| f.eval(x), &params).unwrap().value;
        let ns = mixed_norm(|x| s.eval(x), &params).unwrap().value;
        prop_assert!(ns <= nf * (1.0 + 1e-9), "{ns} > {nf}");
    }
}

proptest! {
    #[test]
    fn ap_quotient_is_at_least_one(
        a in -1.5f64..3.0,
        p in 1.1f64..5.0,
        delta in -0.5f64..3.0,
        u in 0.0f64..5.0,
        len in 0.01f64..10.0,
    ) {
        let q = ap_quotient(PowerWeight::new(a), u, u + len, p, delta).unwrap();
        prop_assert!(q >= 1.0 - 1e-12, "quotient {q}");
    }

    #[test]
    fn ap_check_matches_exponent_window(a in -4.0f64..8.0, p in 1.1f64..5.0, delta in -0.5f64..2.0) {
        let v = ap_check(a, p, delta).unwrap();
        let (lo, hi) = (-(2.0 * delta + 2.0), (2.0 * delta + 2.0) * (p - 1.0));
        prop_assume!((a - lo).abs() > 1e-9 && (a - hi).abs() > 1e-9);
        prop_assert_eq!(v.admissible, lo < a && a < hi);
        prop_assert!(v.consistent);
    }

    #[test]
    fn config_round_trips(
        d in 2usize..=4,
        kn in prop::collection::vec((0i64..20, 1i64..10), 4),
        n in 1u32..=16,
        seed in any::<u64>(),
        p_list in prop::collection::vec(1.01f64..6.0, 1..4),
        t_grid in prop::collection::vec(0.3f64..4.0, 1..6),
        scale in 0.01f64..100.0,
    ) {
        let kappa: Vec<String> = kn[..d].iter().map(|(a, b)| format!("{a}/{b}")).collect();
        let fmt = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let pairs = [
            ("d".to_string(), d.to_string()),
            ("kappa".to_string(), kappa.join(",")),
            ("N".to_string(), n.to_string()),
            ("m_max".to_string(), n.min(4).to_string()),
            ("seed".to_string(), seed.to_string()),
            ("p_list".to_string(), fmt(&p_list)),
            ("t_grid".to_string(), fmt(&t_grid)),
            ("tolerance_scale".to_string(), scale.to_string()),
        ];
        let cfg = ProbeConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        cfg.validate().unwrap();
        let resolved = cfg.resolved();
        let back = ProbeConfig::from_pairs(resolved.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.resolved(), resolved);
    }

    #[test]
    fn report_round_trips(
        vals in prop::collection::vec((any::<f64>(), prop_oneof![Just(f64::INFINITY), 0.0f64..1.0]), 0..8),
        note in prop::option::of("[a-z ]{0,12}"),
    ) {
        let mut r = ProbeReport::new("verify", BTreeMap::from([("seed".to_string(), "3".to_string())]));
        for (i, (v, t)) in vals.iter().enumerate() {
            let mut rec = CheckRecord::new(format!("check {i}"), "anchor", *v, *t);
            if let Some(n) = &note {
                rec = rec.with_note(n.clone());
            }
            r.records.push(rec);
        }
        let back = ProbeReport::from_json(&r.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.records.len(), r.records.len());
        for (x, y) in back.records.iter().zip(&r.records) {
            prop_assert!(x.value == y.value || (x.value.is_nan() && y.value.is_nan()));
            prop_assert_eq!(x.tolerance, y.tolerance);
            prop_assert_eq!(x.pass, y.pass);
            prop_assert_eq!(&x.note, &y.note);
        }
        prop_assert_eq!(back.passed(), r.passed());
    }
}
