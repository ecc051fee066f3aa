//! Command layer of the `dunkl-probe` tool: configuration, reports and the
//! five subcommands. The binary only parses flags and maps outcomes to exit
//! codes.

mod config;
mod report;
mod suites;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{parse_pairs, ProbeConfig, Suite};
pub use report::{CheckRecord, ProbeReport, SuiteTiming, SCHEMA_VERSION};
pub use suites::{
    laguerre_kernel_rows, random_multiplicity, random_rational_poly, rotation_test_functions, run_suite,
    LaguerreKernelRow, FUNK_HECKE_DEGREE, ROTATION_FUNCTIONS,
};

use crate::error::{Error, Result};
use crate::hermite::{mehler_spectral, LadderTable, MehlerKernel};
use crate::hharmonics::{build_basis, LambdaCandidate};
use crate::mixed_norm::{
    ap_check, norm_ratio_probe, radial_index, verify_riesz_decomposition, ProbeSettings, ProbeTable,
};

/// Exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// A check failed or the computation stopped.
    Fail,
    /// Bad flags or configuration.
    Usage,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Usage => 2,
        }
    }
}

/// Report plus status; the report has already been written to `out`.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub report: ProbeReport,
    pub files: Vec<PathBuf>,
}

pub const REPORT_FILE: &str = "report.json";

fn finish(mut report: ProbeReport, res: Result<Vec<PathBuf>>, out: &Path) -> Result<Outcome> {
    let mut files = match res {
        Ok(f) => f,
        Err(e) => {
            report.error = Some(e.to_string());
            Vec::new()
        }
    };
    let path = out.join(REPORT_FILE);
    report.write(&path)?;
    files.push(path);
    let status = if report.passed() { Status::Pass } else { Status::Fail };
    Ok(Outcome { status, report, files })
}

/// Writes a report for a run that never got past configuration.
pub fn usage_report(command: &str, out: &Path, err: &Error) -> Result<Outcome> {
    let mut report = ProbeReport::new(command, Default::default());
    report.error = Some(err.to_string());
    let path = out.join(REPORT_FILE);
    report.write(&path)?;
    Ok(Outcome { status: Status::Usage, report, files: vec![path] })
}

/// Runs `f` on a pool with `workers` threads (`0`: the global pool).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build a pool of {workers} threads: {e}")))?;
    Ok(pool.install(f))
}

/// Runs the selected suites in parallel and assembles the report in suite order.
pub fn cmd_verify(cfg: &ProbeConfig) -> Result<Outcome> {
    let mut report = ProbeReport::new("verify", cfg.resolved());
    let results = with_workers(cfg.workers, || {
        cfg.suites
            .par_iter()
            .map(|&s| {
                let start = Instant::now();
                let r = run_suite(cfg, s);
                (s, r, start.elapsed().as_secs_f64())
            })
            .collect::<Vec<_>>()
    })?;
    for (suite, res, secs) in results {
        match res {
            Ok(recs) => report.records.extend(recs),
            Err(e) => report.records.push(CheckRecord::failed(format!("{suite} suite"), suite.name(), e.to_string())),
        }
        report.timing.push(SuiteTiming { suite: suite.name().to_string(), seconds: secs });
    }
    finish(report, Ok(Vec::new()), &cfg.out)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

/// Closed vs spectral forms of both heat kernels on the configured grids.
pub fn cmd_kernel_compare(cfg: &ProbeConfig) -> Result<Outcome> {
    let mut report = ProbeReport::new("kernel-compare", cfg.resolved());
    let start = Instant::now();
    let res = kernel_compare(cfg, &mut report);
    report.timing.push(SuiteTiming { suite: "kernel-compare".into(), seconds: start.elapsed().as_secs_f64() });
    finish(report, res, &cfg.out)
}

fn kernel_compare(cfg: &ProbeConfig, report: &mut ProbeReport) -> Result<Vec<PathBuf>> {
    let rows = laguerre_kernel_rows(&cfg.delta_list, &cfg.kernel_t_grid, &cfg.kernel_r_grid, cfg.kernel_terms)?;
    let lag_path = cfg.out.join("laguerre_kernels.csv");
    let mut w = csv_writer(&lag_path)?;
    w.write_record(["delta", "t", "r", "s", "closed", "spectral", "rel_err", "status"])?;
    for r in &rows {
        let status = if r.closed_only { "closed-form-only" } else { "compared" };
        w.write_record([
            r.delta.to_string(),
            r.t.to_string(),
            r.r.to_string(),
            r.s.to_string(),
            r.closed.to_string(),
            r.spectral.to_string(),
            r.rel_err.to_string(),
            status.to_string(),
        ])?;
    }
    w.flush()?;
    for &delta in &cfg.delta_list {
        let sel: Vec<_> = rows.iter().filter(|r| r.delta == delta && !r.closed_only).collect();
        let worst = sel.iter().map(|r| r.rel_err).fold(0.0, f64::max);
        let flagged = rows.iter().filter(|r| r.delta == delta && r.closed_only).count();
        report.records.push(
            CheckRecord::new(
                format!("Laguerre kernel, delta = {delta}"),
                "laguerre-kernel-forms",
                worst,
                1e-10 * cfg.tolerance_scale,
            )
            .with_note(format!("{} compared, {flagged} closed-form-only", sel.len())),
        );
    }

    let g = cfg.group();
    let d = g.d();
    let kernel = MehlerKernel::calibrate(&g)?;
    let mut rng = suites::suite_rng(cfg.seed, Suite::Hermite);
    let pts = suites::kernel_points(d, 6, &mut rng);
    let mehler_path = cfg.out.join("mehler_kernels.csv");
    let mut w = csv_writer(&mehler_path)?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=d).map(|j| format!("x{j}")));
    header.extend((1..=d).map(|j| format!("y{j}")));
    header.extend(["closed", "spectral", "rel_err", "status"].map(String::from));
    w.write_record(&header)?;
    let mut worst = 0.0_f64;
    let mut compared = 0;
    let mut flagged = 0;
    for &t in &cfg.kernel_t_grid {
        let ok = suites::mehler_sum_adequate(d, t, cfg.mehler_terms);
        for (x, y) in &pts {
            let a = kernel.eval(t, x, y)?;
            let b = mehler_spectral(&g, t, x, y, cfg.mehler_terms)?;
            let err = (a - b).abs() / a.abs();
            if ok {
                worst = worst.max(err);
                compared += 1;
            } else {
                flagged += 1;
            }
            let mut rec = vec![t.to_string()];
            rec.extend(x.iter().chain(y).map(|v| v.to_string()));
            rec.extend([a.to_string(), b.to_string(), err.to_string()]);
            rec.push(if ok { "compared" } else { "closed-form-only" }.to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    report.records.push(
        CheckRecord::new(
            "oscillator heat kernel, closed vs spectral",
            "mehler-spectral-sum",
            worst,
            1e-8 * cfg.tolerance_scale,
        )
        .with_note(format!("{compared} compared, {flagged} closed-form-only")),
    );
    Ok(vec![lag_path, mehler_path])
}

#[derive(Debug, Clone, Serialize)]
struct SkippedWeight {
    p: f64,
    a: f64,
    reason: String,
}

#[derive(Debug, Clone, Serialize)]
struct BoundaryPoint {
    n: u32,
    p: f64,
    fraction: f64,
    a: f64,
    /// Supremum of the vector ratio.
    sup_ratio: f64,
}

/// How the sup ratio moves as the weight exponent approaches the admissible edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Trend {
    Increasing,
    Decreasing,
    Mixed,
}

impl Trend {
    fn of(v: &[f64]) -> Trend {
        if v.windows(2).all(|w| w[1] >= w[0]) {
            Trend::Increasing
        } else if v.windows(2).all(|w| w[1] <= w[0]) {
            Trend::Decreasing
        } else {
            Trend::Mixed
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct BoundaryTrend {
    n: u32,
    p: f64,
    trend: Trend,
}

#[derive(Debug, Clone, Serialize)]
struct SweepSummary<'a> {
    seed: u64,
    kappa: Vec<f64>,
    delta: f64,
    sups: &'a [crate::mixed_norm::ProbeSup],
    boundary: Vec<BoundaryPoint>,
    boundary_trend: Vec<BoundaryTrend>,
    skipped: Vec<SkippedWeight>,
    config: std::collections::BTreeMap<String, String>,
}

/// Upper end `(2 delta + 2)(p - 1)` of the admissible exponents.
pub fn upper_exponent(p: f64, delta: f64) -> f64 {
    (2.0 * delta + 2.0) * (p - 1.0)
}

/// `(p, a)` weights to probe, `(p, fraction, a)` boundary points, skipped grid pairs.
type SweepWeights = (Vec<(f64, f64)>, Vec<(f64, f64, f64)>, Vec<SkippedWeight>);

/// The weight list of a sweep: admissible grid pairs, then near-boundary pairs.
fn sweep_weights(cfg: &ProbeConfig, delta: f64) -> Result<SweepWeights> {
    let mut weights = Vec::new();
    let mut skipped = Vec::new();
    for &p in &cfg.p_list {
        for &a in &cfg.a_list {
            let v = ap_check(a, p, delta)?;
            if v.admissible {
                weights.push((p, a));
            } else {
                skipped.push(SkippedWeight { p, a, reason: format!("r^{a} is not in A_p (margin {:.3})", v.margin) });
            }
        }
    }
    let mut boundary = Vec::new();
    for &p in &cfg.p_list {
        for &fr in &cfg.boundary_fractions {
            let a = fr * upper_exponent(p, delta);
            boundary.push((p, fr, a));
            if !weights.contains(&(p, a)) {
                weights.push((p, a));
            }
        }
    }
    Ok((weights, boundary, skipped))
}

/// Writes the probe rows; identical input gives identical bytes.
pub fn write_sweep_csv(table: &ProbeTable, kappa: &[f64], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = ["seed", "trial", "N", "p", "a"].map(String::from).to_vec();
    header.extend((1..=kappa.len()).map(|j| format!("kappa{j}")));
    header.extend(["j", "ratio"].map(String::from));
    w.write_record(&header)?;
    for r in &table.rows {
        let mut rec =
            vec![table.seed.to_string(), r.trial.to_string(), r.n.to_string(), r.p.to_string(), r.a.to_string()];
        rec.extend(kappa.iter().map(|k| k.to_string()));
        rec.extend([r.j.to_string(), r.ratio.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Norm-ratio sweep over `N_list x p_list x a_list` plus near-boundary weights.
pub fn cmd_norm_sweep(cfg: &ProbeConfig) -> Result<Outcome> {
    let mut report = ProbeReport::new("norm-sweep", cfg.resolved());
    let start = Instant::now();
    let res = norm_sweep(cfg, &mut report);
    report.timing.push(SuiteTiming { suite: "norm-sweep".into(), seconds: start.elapsed().as_secs_f64() });
    finish(report, res, &cfg.out)
}

fn norm_sweep(cfg: &ProbeConfig, report: &mut ProbeReport) -> Result<Vec<PathBuf>> {
    let g = cfg.group();
    let delta = radial_index(&g);
    let (weights, boundary, skipped) = sweep_weights(cfg, delta)?;
    for s in &skipped {
        report.records.push(
            CheckRecord::new(
                format!("skipped weight p = {}, a = {}", s.p, s.a),
                "power-weight-admissibility",
                0.0,
                0.0,
            )
            .with_note(format!("warning: {}", s.reason)),
        );
    }
    let settings =
        ProbeSettings { group: g.clone(), weights, n_list: cfg.n_list.clone(), trials: cfg.trials, seed: cfg.seed };
    let table = with_workers(cfg.workers, || norm_ratio_probe(&settings))??;
    let csv_path = cfg.out.join("norm_sweep.csv");
    let kappa = cfg.kappa_f64();
    write_sweep_csv(&table, &kappa, &csv_path)?;

    // Plancherel bound for p = 2, w = 1
    let l2: Vec<f64> = table.rows.iter().filter(|r| r.p == 2.0 && r.a == 0.0).map(|r| r.ratio).collect();
    if !l2.is_empty() {
        let worst = l2.iter().copied().fold(0.0, f64::max);
        report.records.push(
            CheckRecord::new(
                "p = 2, w = 1 ratio bound",
                "riesz-plancherel-bound",
                worst - 1.0,
                1e-9 * cfg.tolerance_scale,
            )
            .with_note(format!("max ratio {worst}")),
        );
    }
    // Growth of the sup ratio between the two largest truncations.
    let mut ns = cfg.n_list.clone();
    ns.sort();
    ns.dedup();
    if ns.len() >= 2 {
        let (n1, n2) = (ns[ns.len() - 2], ns[ns.len() - 1]);
        let mut worst = f64::NEG_INFINITY;
        let mut at = String::new();
        for s in table.sups.iter().filter(|s| s.n == n2) {
            if !cfg.a_list.contains(&s.a) {
                continue;
            }
            let prev = table.sup(n1, s.p, s.a, s.j).unwrap_or(f64::NAN);
            let growth = s.sup_ratio / prev - 1.0;
            if growth > worst {
                worst = growth;
                at = format!("p = {}, a = {}, j = {}", s.p, s.a, s.j);
            }
        }
        report.records.push(
            CheckRecord::new(
                format!("sup ratio growth N = {n1} -> {n2}"),
                "riesz-bound-stability",
                worst,
                0.05 * cfg.tolerance_scale,
            )
            .with_note(format!("largest at {at}")),
        );
    }
    let mut points = Vec::new();
    let mut trends = Vec::new();
    for &n in &ns {
        for &p in &cfg.p_list {
            let mut sups = Vec::new();
            for &(_, fr, a) in boundary.iter().filter(|b| b.0 == p) {
                let s = table.sup(n, p, a, 0).unwrap_or(f64::NAN);
                sups.push(s);
                points.push(BoundaryPoint { n, p, fraction: fr, a, sup_ratio: s });
            }
            trends.push(BoundaryTrend { n, p, trend: Trend::of(&sups) });
        }
    }
    let count = |t: Trend| trends.iter().filter(|x| x.trend == t).count();
    let mixed = count(Trend::Mixed);
    report.records.push(
        CheckRecord::new("near-boundary sup ratios (recorded)", "weight-boundary-behavior", mixed as f64, f64::INFINITY)
            .with_note(format!(
                "as the exponent approaches (2 delta + 2)(p - 1): {} increasing, {} decreasing, {mixed} mixed of {} (N, p) sweeps",
                count(Trend::Increasing),
                count(Trend::Decreasing),
                trends.len()
            )),
    );
    let summary = SweepSummary {
        seed: cfg.seed,
        kappa,
        delta,
        sups: &table.sups,
        boundary: points,
        boundary_trend: trends,
        skipped,
        config: cfg.resolved(),
    };
    let json_path = cfg.out.join("norm_sweep.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&summary)?)?;
    Ok(vec![csv_path, json_path])
}

/// Radial decomposition of the Riesz vector for random invariant functions.
pub fn cmd_decompose(cfg: &ProbeConfig) -> Result<Outcome> {
    let mut report = ProbeReport::new("decompose", cfg.resolved());
    let start = Instant::now();
    let res = decompose(cfg, &mut report);
    report.timing.push(SuiteTiming { suite: "decompose".into(), seconds: start.elapsed().as_secs_f64() });
    finish(report, res, &cfg.out)
}

fn decompose(cfg: &ProbeConfig, report: &mut ProbeReport) -> Result<Vec<PathBuf>> {
    let g = cfg.group();
    let basis = build_basis(&g, cfg.n)?;
    let ladder = LadderTable::measure(&g, cfg.n as usize + 2)?;
    let fs = suites::random_functions(cfg, Suite::Decomposition, cfg.n, cfg.functions);
    let reps = with_workers(cfg.workers, || {
        fs.par_iter()
            .map(|f| verify_riesz_decomposition(&basis, f, &ladder, &cfg.r_grid, cfg.lambda))
            .collect::<Result<Vec<_>>>()
    })??;
    let path = cfg.out.join("decomposition.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["trial", "r", "lhs", "rhs", "residual"])?;
    for (i, rep) in reps.iter().enumerate() {
        for k in 0..rep.r.len() {
            w.write_record([
                i.to_string(),
                rep.r[k].to_string(),
                rep.lhs[k].to_string(),
                rep.rhs[k].to_string(),
                rep.residual[k].to_string(),
            ])?;
        }
    }
    w.flush()?;
    let lpath = cfg.out.join("decomposition_lambda.csv");
    let mut w = csv_writer(&lpath)?;
    w.write_record(["m", "lambda", "measured_match"])?;
    let rep0 = &reps[0];
    for (m, l) in &rep0.lambdas {
        let matched = rep0.measured_matches.iter().find(|x| x.0 == *m).map(|x| format!("{:?}", x.1).to_lowercase());
        w.write_record([m.to_string(), l.to_string(), matched.unwrap_or_default()])?;
    }
    w.flush()?;
    let worst = reps.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
    let doubled = rep0.measured_matches.iter().all(|m| m.1 == LambdaCandidate::Doubled);
    report.records.push(
        CheckRecord::new(
            "Riesz radial decomposition, per-radius residual",
            "riesz-radial-decomposition",
            worst,
            1e-6 * cfg.tolerance_scale,
        )
        .with_note(if doubled {
            "measured energy matches m(m + 2 lambda_kappa)"
        } else {
            "measured energy differs from m(m + 2 lambda_kappa)"
        }),
    );
    Ok(vec![path, lpath])
}

/// Writes the h-harmonic basis of degree `<= degree` and its sphere rule.
pub fn cmd_export_basis(cfg: &ProbeConfig) -> Result<Outcome> {
    let mut report = ProbeReport::new("export-basis", cfg.resolved());
    let start = Instant::now();
    let res = (|| -> Result<Vec<PathBuf>> {
        let basis = build_basis(&cfg.group(), cfg.degree)?;
        std::fs::create_dir_all(&cfg.out)?;
        let bpath = cfg.out.join("basis.json");
        let mut f = BufWriter::new(File::create(&bpath)?);
        f.write_all(basis.to_json()?.as_bytes())?;
        f.flush()?;
        let rpath = cfg.out.join("sphere_rule.csv");
        basis.rule().write_csv(&rpath)?;
        report.records.push(
            CheckRecord::new(
                "basis Gram residual",
                "h-harmonic-orthonormality",
                basis.gram_residual(),
                1e-10 * cfg.tolerance_scale,
            )
            .with_note(format!("{} members", basis.members().count())),
        );
        Ok(vec![bpath, rpath])
    })();
    report.timing.push(SuiteTiming { suite: "export-basis".into(), seconds: start.elapsed().as_secs_f64() });
    finish(report, res, &cfg.out)
}
