//! The verification suites behind `verify`, each returning check records.

use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ProbeConfig, Suite};
use super::report::CheckRecord;
use crate::dunkl::{dunkl_commutator, ReflectionGroup};
use crate::error::Result;
use crate::hermite::{
    eigen_residual_exact, indices_up_to, mehler_constant_closed_form, mehler_spectral, LadderTable, MehlerKernel,
    SpectralCoeffs,
};
use crate::hharmonics::{
    build_basis, funk_hecke_kernel_form, funk_hecke_scan, spherical_laplacian_eigen, verify_gradient_identities,
    verify_semigroup_projection, verify_spherical_energy, HHarmonicBasis, LambdaCandidate,
};
use crate::laguerre::{heat_kernel_closed, heat_kernel_spectral};
use crate::mixed_norm::{
    ap_check, rotation_average_check, verify_laguerre_connection, verify_riesz_decomposition, PowerWeight,
};
use crate::poly::MultiPoly;

/// Largest degree in the Funk–Hecke suite.
pub const FUNK_HECKE_DEGREE: u32 = 6;
/// Test functions in the rotation-average suite.
pub const ROTATION_FUNCTIONS: usize = 10;
/// Relative accuracy assumed for the individual Laguerre function values.
const SPECTRAL_ROUNDING: f64 = 1e-14;
/// Random polynomials per dimension in the commutativity check.
const COMMUTATOR_POLYS: usize = 4;
/// Random multiplicities per dimension in the harmonicity check.
const HARMONICITY_GROUPS: usize = 2;

/// Independent stream per suite so suites can run in any order.
pub(crate) fn suite_rng(seed: u64, suite: Suite) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite as u64 + 1);
    rng
}

pub fn run_suite(cfg: &ProbeConfig, suite: Suite) -> Result<Vec<CheckRecord>> {
    match suite {
        Suite::Dunkl => dunkl_suite(cfg),
        Suite::Hermite => hermite_suite(cfg),
        Suite::Laguerre => laguerre_suite(cfg),
        Suite::Semigroup => semigroup_suite(cfg),
        Suite::Gradient => gradient_suite(cfg),
        Suite::Energy => energy_suite(cfg),
        Suite::Decomposition => decomposition_suite(cfg),
        Suite::FunkHecke => funk_hecke_suite(cfg),
        Suite::Rotation => rotation_suite(cfg),
    }
}

fn tol(cfg: &ProbeConfig, t: f64) -> f64 {
    t * cfg.tolerance_scale
}

/// `p / q` with `q` in `1..=8` and value in `[0, 2]`.
pub fn random_multiplicity(rng: &mut impl Rng) -> BigRational {
    let q: i64 = rng.random_range(1..=8);
    let p: i64 = rng.random_range(0..=2 * q);
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Dense random polynomial of total degree `<= degree` with small rational coefficients.
pub fn random_rational_poly(d: usize, degree: u32, rng: &mut impl Rng) -> MultiPoly {
    let mut p = MultiPoly::zero(d);
    for e in indices_up_to(d, degree) {
        let num: i64 = rng.random_range(-6..=6);
        let den: i64 = rng.random_range(1..=5);
        p.add_term(e, BigRational::new(BigInt::from(num), BigInt::from(den)));
    }
    p
}

fn random_group(d: usize, rng: &mut impl Rng) -> ReflectionGroup {
    ReflectionGroup::from_rationals((0..d).map(|_| random_multiplicity(rng)).collect()).expect("nonnegative")
}

fn dunkl_suite(cfg: &ProbeConfig) -> Result<Vec<CheckRecord>> {
    let mut rng = suite_rng(cfg.seed, Suite::Dunkl);
    let mut failures = 0usize;
    let mut checked = 0usize;
    for d in 2..=cfg.exact_max_dim.max(2) {
        for _ in 0..COMMUTATOR_POLYS {
            let g = random_group(d, &mut rng);
            let p = random_rational_poly(d, cfg.degree, &mut rng);
            for i in 0..d {
                for j in i + 1..d {
                    checked += 1;
                    if !dunkl_commutator(&g, i, j, &p)?.is_zero() {
                        failures += 1;
                    }
                }
            }
        }
    }
    let mut out = vec![CheckRecord::new("exact commutativity of T_i T_j", "dunkl-commutativity", failures as f64, 0.0)
        .with_note(format!("{checked} pairs, degree <= {}", cfg.degree))];
    let mut groups = vec![cfg.group()];
    for d in 2..=cfg.exact_max_dim.max(2) {
        for _ in 0..HARMONICITY_GROUPS {
            groups.push(random_group(d, &mut rng));
        }
    }
    let results: Vec<Result<(bool, usize)>> = groups
        .par_iter()
        .map(|g| {
            let b = build_basis(g, cfg.degree)?;
            let ok = matches!(b.exact_harmonicity(), Some(Ok(true)));
            Ok((ok, b.members().count()))
        })
        .collect();
    let mut bad = 0usize;
    let mut members = 0usize;
    for r in results {
        let (ok, n) = r?;
        bad += usize::from(!ok);
        members += n;
    }
    out.push(
        CheckRecord::new("exact h-harmonicity of the constructed basis", "h-harmonic-nullity", bad as f64, 0.0)
            .with_note(format!("{} groups, {members} members", groups.len())),
    );
    Ok(out)
}

/// Points for the kernel comparisons, uniform in `[-1.5, 1.5]^d`.
pub(crate) fn kernel_points(d: usize, count: usize, rng: &mut impl Rng) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..count)
        .map(|_| {
            let x = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let y = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            (x, y)
        })
        .collect()
}

/// Whether the degree-`n` Hermite spectral sum has converged at time `t`.
pub(crate) fn mehler_sum_adequate(d: usize, t: f64, n: u32) -> bool {
    let next = (n + 1) as f64;
    (-2.0 * next * t).exp() * next.powi(d as i32) < 1e-12
}

fn hermite_suite(cfg: &ProbeConfig) -> Result<Vec<CheckRecord>> {
    let g = cfg.group();
    let d = g.d();
    let mut out = Vec::new();
    let alphas = indices_up_to(d, cfg.degree);
    let nonzero = alphas
        .par_iter()
        .map(|a| eigen_residual_exact(&g, a).map(|r| usize::from(!r.is_zero())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    out.push(
        CheckRecord::new("exact eigenfunction identity", "oscillator-eigenfunctions", nonzero as f64, 0.0)
            .with_note(format!("{} indices, |alpha| <= {}", alphas.len(), cfg.degree)),
    );
    let measured = LadderTable::measure(&g, 33)?;
    out.push(CheckRecord::new(
        "ladder factorization, levels <= 32",
        "ladder-factorization",
        measured.factorization_residual(32),
        tol(cfg, 1e-10),
    ));
    out.push(CheckRecord::new(
        "measured ladder vs sqrt(2n + 4 kappa [n odd])",
        "ladder-closed-form",
        measured.max_deviation(&LadderTable::closed_form(&g, 33)),
        tol(cfg, 1e-10),
    ));
    let classical = LadderTable::measure(&ReflectionGroup::classical(d), 33)?;
    let mut dev = 0.0_f64;
    for j in 0..d {
        for n in 0..=32u32 {
            dev = dev.max((classical.down(j, n) - (2.0 * n as f64).sqrt()).abs());
            dev = dev.max((classical.up(j, n) - (2.0 * n as f64 + 2.0).sqrt()).abs());
        }
    }
    out.push(CheckRecord::new("classical ladder table", "ladder-classical-values", dev, tol(cfg, 1e-12)));
    let kernel = MehlerKernel::calibrate(&g)?;
    let want = mehler_constant_closed_form(&g);
    out.push(
        CheckRecord::new(
            "calibrated heat-kernel constant",
            "mehler-constant",
            (kernel.constant() / want - 1.0).abs(),
            tol(cfg, 1e-10),
        )
        .with_note(format!("c = {:.15e}", kernel.constant())),
    );
    let mut rng = suite_rng(cfg.seed, Suite::Hermite);
    let pts = kernel_points(d, 6, &mut rng);
    let mut worst = 0.0_f64;
    for &t in &cfg.t_grid {
        if !mehler_sum_adequate(d, t, cfg.mehler_terms) {
            continue;
        }
        for (x, y) in &pts {
            let a = kernel.eval(t, x, y)?;
            let b = mehler_spectral(&g, t, x, y, cfg.mehler_terms)?;
            worst = worst.max((a - b).abs() / a.abs());
        }
    }
    out.push(CheckRecord::new("closed heat kernel vs spectral sum", "mehler-spectral-sum", worst, tol(cfg, 1e-8)));
    Ok(out)
}

/// One row of the Laguerre kernel comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreKernelRow {
    pub delta: f64,
    pub t: f64,
    pub r: f64,
    pub s: f64,
    pub closed: f64,
    pub spectral: f64,
    pub rel_err: f64,
    /// Spectral sum not trustworthy at this point: the tail is too large or
    /// the terms cancel so far that rounding dominates.
    pub closed_only: bool,
}

pub fn laguerre_kernel_rows(deltas: &[f64], ts: &[f64], rs: &[f64], terms: usize) -> Result<Vec<LaguerreKernelRow>> {
    let mut out = Vec::new();
    for &delta in deltas {
        for &t in ts {
            for &r in rs {
                for &s in rs {
                    let closed = heat_kernel_closed(delta, t, r, s)?;
                    let sp = heat_kernel_spectral(delta, t, r, s, terms)?;
                    out.push(LaguerreKernelRow {
                        delta,
                        t,
                        r,
                        s,
                        closed,
                        spectral: sp.value,
                        rel_err: (closed - sp.value).abs() / closed.abs(),
                        closed_only: sp.tail_bound + SPECTRAL_ROUNDING * sp.abs_sum > 1e-11 * closed.abs(),
                    });
                }
            }
        }
    }
    Ok(out)
}

fn laguerre_suite(cfg: &ProbeConfig) -> Result<Vec<CheckRecord>> {
    let rows = laguerre_kernel_rows(&cfg.delta_list, &cfg.t_grid, &cfg.kernel_r_grid, cfg.kernel_terms)?;
    // heat times here are at least 0.3, so every row is compared
    let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let flagged = rows.iter().filter(|r| r.closed_only).count();
    Ok(vec![CheckRecord::new(
        "Laguerre heat kernel, closed vs spectral",
        "laguerre-kernel-forms",
        worst,
        tol(cfg, 1e-10),
    )
    .with_note(format!("{} grid points, {flagged} with poorly conditioned spectral sums", rows.len()))])
}

fn invariant_members(basis: &HHarmonicBasis, m_max: u32) -> Vec<(u32, usize)> {
    let mut out = Vec::new();
    for m in 0..=m_max.min(basis.m_max()) {
        for (j, y) in basis.level(m).iter().enumerate() {
            if y.g_invariant {
                out.push((m, j));
            }
        }
    }
    out
}

pub(crate) fn random_functions(cfg: &ProbeConfig, suite: Suite, n: u32, count: usize) -> Vec<SpectralCoeffs> {
    let g = cfg.group();
    let mut rng = suite_rng(cfg.seed, suite);
    (0..count).map(|_| SpectralCoeffs::random_invariant(&g, n, &mut rng)).collect()
}

/// A fitted constant (if any) and its deviation.
type Fit = (Option<f64>, f64);

/// Spread and extreme deviation of a family of fitted constants.
fn constant_stats(cs: &[Fit]) -> (f64, f64, f64, usize) {
    let vals: Vec<f64> = cs.iter().filter_map(|c| c.0).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dev = cs.iter().filter(|c| c.0.is_some()).map(|c| c.1).fold(0.0, f64::max);
    let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
    let spread = if vals.is_empty() { f64::NAN } else { hi - lo };
    (spread, dev, mean, vals.len())
}

fn semigroup_suite(cfg: &ProbeConfig) -> Result<Vec<CheckRecord>> {
    let g = cfg.group();
    let basis = build_basis(&g, cfg.n)?;
    let fs = random_functions(cfg, Suite::Semigroup, cfg.n, cfg.functions);
    let members = invariant_members(&basis, cfg.m_max);
    let semigroup: Vec<Vec<Fit>> = fs
        .par_iter()
        .map(|f| {
            let mut out = Vec::new();
            for &t in &cfg.t_grid {
                for &(m, j) in &members {
                    let s = verify_semigroup_projection(&basis, f, t, m, j, &cfg.r_grid)?;
                    out.push((s.constant, s.deviation));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let connection: Vec<Vec<(Fit, Fit)>> = fs
        .par_iter()
        .map(|f| {
            members
                .iter()
                .map(|&(m, j)| {
                    let c = verify_laguerre_connection(&basis, f, m, j, &cfg.r_grid)?;
                    Ok(((c.value_constant, c.value_deviation), (c.derivative_constant, c.derivative_deviation)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut push = |name: &str, anchor: &str, cs: Vec<Fit>| {
        let (spread, dev, mean, n) = constant_stats(&cs);
        let skipped = cs.len() - n;
        out.push(
            CheckRecord::new(format!("{name}: constant spread"), anchor, spread, tol(cfg, 1e-6))
                .with_note(format!("{n} fits ({skipped} below the conditioning floor), mean constant {mean:.12}")),
        );
        out.push(CheckRecord::new(format!("{name}: fit deviation"), anchor, dev, tol(cfg, 1e-6)));
    };
    push("radial heat projection", "radial-heat-projection", semigroup.into_iter().flatten().collect());
    let (vals, ders): (Vec<_>, Vec<_>) = connection.into_iter().flatten().unzip();
    push("Laguerre connection, values", "laguerre-value-connection", vals);
    push("Laguerre connection, raised derivative", "laguerre-derivative-connection", ders);
    Ok(out)
}

fn gradient_suite(cfg: &ProbeConfig) -> Result<Vec<CheckRecord>> {
    let mut groups = vec![cfg.group()];
    if !groups[0].is_classical() {
        groups.push(ReflectionGroup::classical(cfg.d));
    }
    let mut out = Vec::new();
    for g in groups {
        let basis = build_basis(&g, cfg.degree)?;
        let rep = verify_gradient_identities(&basis)?;
        let label = format!("kappa = {:?}", g.kappa());
        let t = tol(cfg, 1e-9);
        for (name, anchor, v) in [
            ("normal component of the spherical gradient", "sphere-gradient-normal", rep.normal_component),
            ("radial component of the Dunkl gradient", "dunkl-gradient-radial", rep.radial_component),
            ("divergence of omega_j Y", "sphere-gradient-divergence", rep.divergence),
            ("cross-degree orthogonality of gradients", "sphere-gradient-orthogonality", rep.cross_degree),
            ("classical divergence", "sphere-gradient-classical", rep.classical_divergence),
            ("tangency on invariant members", "sphere-gradient-invariant-tangency", rep.invariant_tangency),
        ] {
            out.push(CheckRecord::new(format!("{name} ({label})"), anchor, v, t));
        }
        let eig = spherical_laplacian_eigen(&basis)?;
        let worst = eig.iter().map(|e| e.residual).fold(0.0, f64::max);
        out.push(
            CheckRecord::new(
                format!("spherical Laplacian eigenvalue ({label})"),
                "spherical-laplacian-eigenvalue",
                worst,
                t,
            )
            .with_note("eigenvalue -m(m + 2 lambda_kappa)"),
        );
    }
    Ok(out)
}

fn energy_suite(cfg: &ProbeConfig) -> Result<Vec<CheckRecord>> {
    let g = cfg.group();
    let basis = build_basis(&g, cfg.degree)?;
    let mut worst = 0.0_f64;
    let mut off = 0.0_f64;
    let mut matches = Vec::new();
    for m in 1..=cfg.degree {
        if basis.invariant_dim(m) == 0 {
            continue;
        }
        let e = verify_spherical_energy(&basis, m)?;
        for q in &e.quotients {
            worst = worst.max((q - e.doubled).abs() / e.doubled.max(1.0));
        }
        off = off.max(e.off_diagonal);
        matches.push(format!("m={m}: {:?}", e.matches));
    }
    let t = tol(cfg, 1e-9);
    Ok(vec![
        CheckRecord::new("spherical energy vs m(m + 2 lambda_kappa)", "spherical-energy", worst, t)
            .with_note(matches.join(", ")),
        CheckRecord::new("spherical energy off-diagonal terms", "spherical-energy", off, t),
    ])
}

fn decomposition_suite(cfg: &ProbeConfig) -> Result<Vec<CheckRecord>> {
    let g = cfg.group();
    let basis = build_basis(&g, cfg.n)?;
    let ladder = LadderTable::measure(&g, cfg.n as usize + 2)?;
    let fs = random_functions(cfg, Suite::Decomposition, cfg.n, cfg.functions);
    let reps = fs
        .par_iter()
        .map(|f| verify_riesz_decomposition(&basis, f, &ladder, &cfg.r_grid, cfg.lambda))
        .collect::<Result<Vec<_>>>()?;
    let worst = reps.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
    let matched: Vec<LambdaCandidate> = reps[0].measured_matches.iter().map(|m| m.1).collect();
    let verdict = if matched.iter().all(|c| *c == LambdaCandidate::Doubled) {
        "measured energy matches m(m + 2 lambda_kappa)"
    } else if matched.iter().all(|c| *c == LambdaCandidate::Printed) {
        "measured energy matches m(m + lambda_kappa)"
    } else {
        "measured energy matches neither candidate uniformly"
    };
    let lambda = match cfg.lambda {
        LambdaCandidate::Measured => "measured",
        LambdaCandidate::Printed => "m(m + lambda_kappa)",
        LambdaCandidate::Doubled => "m(m + 2 lambda_kappa)",
    };
    Ok(vec![CheckRecord::new(
        "Riesz radial decomposition, per-radius residual",
        "riesz-radial-decomposition",
        worst,
        tol(cfg, 1e-6),
    )
    .with_note(format!("lambda: {lambda}; {verdict}"))])
}

fn funk_hecke_suite(cfg: &ProbeConfig) -> Result<Vec<CheckRecord>> {
    let g = cfg.group();
    let scan = funk_hecke_scan(&g, FUNK_HECKE_DEGREE, &cfg.z_grid)?;
    let t = tol(cfg, 1e-7);
    let mut out = vec![
        CheckRecord::new("Bessel form: ratio constant in z", "funk-hecke-bessel", scan.max_deviation, t),
        CheckRecord::new("Bessel form: constant vs closed form", "funk-hecke-bessel-constant", scan.spread, t)
            .with_note(format!("expected {:.15e}", scan.expected)),
    ];
    let basis = build_basis(&g, FUNK_HECKE_DEGREE)?;
    let dirs: Vec<Vec<f64>> =
        (0..3).map(|i| (0..g.d()).map(|k| ((i * g.d() + k) as f64 * 0.7 + 0.3).cos()).collect()).collect();
    let levels = funk_hecke_kernel_form(&basis, FUNK_HECKE_DEGREE, &[0.5, 1.0, 2.0, 3.0], &dirs)?;
    let dev = levels.iter().map(|l| l.deviation).fold(0.0, f64::max);
    let c0 = levels[0].constant;
    let spread = levels.iter().map(|l| (l.constant / c0 - 1.0).abs()).fold(0.0, f64::max);
    out.push(CheckRecord::new("kernel form: proportionality", "funk-hecke-kernel", dev, t));
    out.push(
        CheckRecord::new("kernel form: constant independent of degree", "funk-hecke-kernel", spread, t)
            .with_note(format!("constant {c0:.15e}")),
    );
    Ok(out)
}

/// Ten planar test functions: five basis functions and five random expansions.
pub fn rotation_test_functions(seed: u64) -> Vec<SpectralCoeffs> {
    let g = ReflectionGroup::classical(2);
    let mut out: Vec<SpectralCoeffs> =
        [[0, 0], [1, 1], [2, 0], [3, 2], [0, 5]].iter().map(|a| SpectralCoeffs::basis(&g, a)).collect();
    let mut rng = suite_rng(seed, Suite::Rotation);
    while out.len() < ROTATION_FUNCTIONS {
        let f = SpectralCoeffs::random(&g, 6, &mut rng);
        let n = f.norm();
        out.push(f.scale(1.0 / n));
    }
    out
}

fn rotation_suite(cfg: &ProbeConfig) -> Result<Vec<CheckRecord>> {
    let fs = rotation_test_functions(cfg.seed);
    let mut out = Vec::new();
    for &p in &cfg.p_list {
        let want = (2.0 * std::f64::consts::PI).powf(1.0 - p / 2.0);
        for &a in &cfg.a_list {
            if !ap_check(a, p, 0.0)?.admissible {
                continue;
            }
            let cs = fs
                .par_iter()
                .map(|f| {
                    let tabs = f.basis_tables();
                    rotation_average_check(|x| f.eval_with(&tabs, x), p, PowerWeight::new(a)).map(|r| r.constant)
                })
                .collect::<Result<Vec<f64>>>()?;
            let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let dev = cs.iter().map(|c| (c / want - 1.0).abs()).fold(0.0, f64::max);
            out.push(
                CheckRecord::new(
                    format!("rotation average, p = {p}, a = {a}"),
                    "rotation-average",
                    (hi - lo) / want,
                    tol(cfg, 1e-7),
                )
                .with_note(format!(
                    "c' in [{lo:.15e}, {hi:.15e}], (2 pi)^(1 - p/2) = {want:.15e}, max rel dev {dev:.2e}"
                )),
            );
        }
    }
    Ok(out)
}
