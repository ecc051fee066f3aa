use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dunkl_core::probe::{
    cmd_decompose, cmd_export_basis, cmd_kernel_compare, cmd_norm_sweep, cmd_verify, usage_report, Outcome,
    ProbeConfig, Status,
};

/// Numerical checks for the Dunkl harmonic oscillator on Z2^d.
#[derive(Parser, Debug)]
#[command(name = "dunkl-probe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Run the verification suites and write report.json.
    Verify,
    /// Compare closed and spectral heat kernels on a grid.
    KernelCompare,
    /// Mixed-norm ratios of Riesz transforms over random invariant functions.
    NormSweep,
    /// Radial decomposition of the Riesz vector.
    Decompose,
    /// Write the h-harmonic basis and its sphere rule.
    ExportBasis,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::KernelCompare => "kernel-compare",
            Command::NormSweep => "norm-sweep",
            Command::Decompose => "decompose",
            Command::ExportBasis => "export-basis",
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suite to run (repeatable); replaces the configured selection.
    #[arg(long = "suite", global = true)]
    suites: Vec<String>,
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Extra override, `KEY=VALUE` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = self
            .set
            .iter()
            .map(|kv| match kv.split_once('=') {
                Some((k, x)) => (k.trim().to_string(), x.trim().to_string()),
                None => (kv.clone(), String::new()),
            })
            .collect();
        if let Some(s) = self.seed {
            v.push(("seed".into(), s.to_string()));
        }
        if let Some(o) = &self.out {
            v.push(("out".into(), o.display().to_string()));
        }
        if !self.suites.is_empty() {
            v.push(("suites".into(), self.suites.join(",")));
        }
        if let Some(t) = self.tolerance_scale {
            v.push(("tolerance_scale".into(), t.to_string()));
        }
        if let Some(w) = self.workers {
            v.push(("workers".into(), w.to_string()));
        }
        v
    }
}

fn print_outcome(o: &Outcome) {
    for r in &o.report.records {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        let note = r.note.as_deref().map(|n| format!("  [{n}]")).unwrap_or_default();
        println!("{tag}  {}: {:.3e} (tol {:.1e}){note}", r.name, r.value, r.tolerance);
    }
    if let Some(e) = &o.report.error {
        eprintln!("error: {e}");
    }
    for f in &o.files {
        println!("wrote {}", f.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match ProbeConfig::load(cli.common.config.as_deref(), &cli.common.overrides()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            let out = cli.common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            if let Err(w) = usage_report(cli.command.name(), &out, &e) {
                eprintln!("error: cannot write report: {w}");
            }
            return ExitCode::from(Status::Usage.code() as u8);
        }
    };
    let run = match cli.command {
        Command::Verify => cmd_verify(&cfg),
        Command::KernelCompare => cmd_kernel_compare(&cfg),
        Command::NormSweep => cmd_norm_sweep(&cfg),
        Command::Decompose => cmd_decompose(&cfg),
        Command::ExportBasis => cmd_export_basis(&cfg),
    };
    match run {
        Ok(o) => {
            print_outcome(&o);
            ExitCode::from(o.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::Fail.code() as u8)
        }
    }
}
