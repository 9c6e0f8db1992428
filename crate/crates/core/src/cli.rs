//! Command-line surface: `design`, `simulate` and `sweep`.
//!
//! Every command returns a process exit code; output goes to the writers
//! passed in so the commands can be driven from tests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::baseline::BaselineDesign;
use crate::config::{LoadError, RunConfig};
use crate::error::Result;
use crate::fmt::{g9, g9_list};
use crate::mrac::{ideal_gains, CompanionPlant, MracDesign};
use crate::numerics::Mat;
use crate::plant::plant_matrices;
use crate::sim::{compute_metrics, run_scenario, write_trace_csv, Metrics, Settling, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

/// Upper bound on sweep grid size.
pub const MAX_COMBINATIONS: usize = 100_000;

/// Summary CSV columns following the grid keys.
pub const SWEEP_COLUMNS: &str = "verdict,overshoot_pct,ise,max_e_norm";

#[derive(Debug, Parser)]
#[command(name = "cg-mrac", version, about = "Pitch-axis LQ baseline with MRAC augmentation: design, simulate, sweep")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one key (repeatable), e.g. `--set plant.mu=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the baseline and adaptive design for the configuration.
    Design,
    /// Run one scenario, write its trace CSV and print metrics.
    Simulate {
        /// Trace CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the cartesian product of parameter lists and write a summary CSV.
    Sweep {
        /// `key=v1,v2,...` (repeatable); the first key varies slowest.
        #[arg(long, value_name = "KEY=V1,V2,...")]
        grid: Vec<String>,
        /// Summary CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: number of processors).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T, O, E>(args: I, out: &mut O, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let cfg = match RunConfig::load(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(LoadError::Io(m)) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_IO;
        }
        Err(LoadError::Config(m)) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_CONFIG;
        }
    };
    match cli.command {
        Command::Design => cmd_design(&cfg, out, err),
        Command::Simulate { out: path } => cmd_simulate(&cfg, &path, out, err),
        Command::Sweep { grid, out: path, jobs } => cmd_sweep(&cfg, &grid, jobs, &path, out, err),
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        g9(c.re)
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}j", g9(c.re), g9(c.im.abs()))
    }
}

fn fmt_mat(m: &Mat) -> String {
    let rows: Vec<String> = (0..m.rows()).map(|i| g9_list(m.row(i).entries())).collect();
    format!("[{}]", rows.join(", "))
}

/// Derived quantities as `(key, value)` pairs: baseline gains and loop
/// eigenvalues, the companion-form reference model, `P`, and the ideal
/// gains of the configured plant.
pub fn design_report(cfg: &RunConfig, d: &BaselineDesign, m: &MracDesign) -> Result<Report> {
    let plant = plant_matrices(cfg.mu)?;
    let ideal = ideal_gains(m, &CompanionPlant::of_plant(&plant)?, &m.k_bl_z, m.f_bl)?;
    let (l1, l2) = d.closed_loop_eigenvalues();
    let kv = |k: &str, v: String| (k.to_string(), v);
    Ok(vec![
        kv("design.K", fmt_mat(&d.k)),
        kv("design.F", g9(d.f)),
        kv("design.ki", g9(d.ki)),
        kv("design.dc_gain", format!("{:.9}", d.dc_gain())),
        kv("design.eigenvalues", format!("[{}, {}]", fmt_complex(l1), fmt_complex(l2))),
        kv("design.T", fmt_mat(&m.transform.t)),
        kv("design.A_m", fmt_mat(&m.a_m_z)),
        kv("design.B_m", fmt_mat(&m.b_m_z)),
        kv("design.B0", fmt_mat(&m.b0_z)),
        kv("design.P", fmt_mat(&m.p)),
        kv("ideal.mu", g9(cfg.mu)),
        kv("ideal.lambda", g9(ideal.lambda)),
        kv("ideal.Kz_star", g9_list(&ideal.kz_star)),
        kv("ideal.Kr_star", g9(ideal.kr_star)),
    ])
}

type Report = Vec<(String, String)>;

fn checked_design(cfg: &RunConfig) -> Result<(BaselineDesign, MracDesign, Report)> {
    cfg.validate()?;
    let (d, m) = cfg.designs()?;
    let report = design_report(cfg, &d, &m)?;
    Ok((d, m, report))
}

fn write_aligned<W: Write>(w: &mut W, pairs: &[(String, String)]) -> std::io::Result<()> {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in pairs {
        writeln!(w, "{k:<width$} = {v}")?;
    }
    Ok(())
}

pub fn cmd_design<O: Write, E: Write>(cfg: &RunConfig, out: &mut O, err: &mut E) -> i32 {
    match checked_design(cfg) {
        Ok((_, _, report)) => match write_aligned(out, &report) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: writing report: {e}");
                EXIT_IO
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Metrics as aligned `key = value` lines.
pub fn metrics_summary(m: &Metrics) -> Vec<(String, String)> {
    let mut v = vec![
        ("verdict".to_string(), m.verdict.to_string()),
        ("ise".to_string(), g9(m.ise)),
        ("max_e_norm".to_string(), g9(m.max_e_norm)),
        ("final_Kz".to_string(), g9_list(&m.final_gains.kz)),
        ("final_Kr".to_string(), g9(m.final_gains.kr)),
    ];
    for (i, s) in m.segments.iter().enumerate() {
        let Some(os) = s.overshoot_pct else { continue };
        let settle = match s.settling {
            Some(Settling::Settled(t)) => g9(t),
            _ => "unsettled".to_string(),
        };
        v.push((format!("step{}.t", i + 1), g9(s.start)));
        v.push((format!("step{}.target", i + 1), g9(s.target)));
        v.push((format!("step{}.overshoot_pct", i + 1), g9(os)));
        v.push((format!("step{}.settling_s", i + 1), settle));
    }
    v
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}

pub fn cmd_simulate<O: Write, E: Write>(cfg: &RunConfig, path: &Path, out: &mut O, err: &mut E) -> i32 {
    let (d, m, report) = match checked_design(cfg) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let trace = match run_scenario(&cfg.scenario(), &d, &m) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut header = cfg.entries();
    header.extend(report);
    let written = create(path).and_then(|f| write_trace_csv(&trace, &header, f));
    if let Err(e) = written {
        let _ = writeln!(err, "error: {}: {e}", path.display());
        return EXIT_IO;
    }
    let metrics = match compute_metrics(&trace) {
        Ok(mm) => mm,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = write_aligned(out, &metrics_summary(&metrics)) {
        let _ = writeln!(err, "error: writing summary: {e}");
        return EXIT_IO;
    }
    match trace.verdict {
        Verdict::Completed => EXIT_OK,
        Verdict::Diverged(_) => EXIT_DIVERGED,
    }
}

/// One `--grid` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<String>,
}

/// Parses `key=v1,v2,...` axes. Keys must be distinct and value lists
/// non-empty; at least one axis is required.
pub fn parse_grid(specs: &[String]) -> std::result::Result<Vec<GridAxis>, String> {
    if specs.is_empty() {
        return Err("sweep needs at least one --grid key=v1,v2,...".into());
    }
    let mut axes: Vec<GridAxis> = Vec::with_capacity(specs.len());
    for s in specs {
        let (k, vs) = s
            .split_once('=')
            .ok_or_else(|| format!("grid axis must be key=v1,v2,..., got {s:?}"))?;
        let key = k.trim().to_string();
        let values: Vec<String> = vs.split(',').map(|v| v.trim().to_string()).collect();
        if key.is_empty() || values.iter().any(String::is_empty) {
            return Err(format!("grid axis {s:?} has an empty key or value"));
        }
        if axes.iter().any(|a| a.key == key) {
            return Err(format!("grid key {key:?} given twice"));
        }
        axes.push(GridAxis { key, values });
    }
    let total = axes
        .iter()
        .try_fold(1usize, |n, a| n.checked_mul(a.values.len()))
        .filter(|&n| n <= MAX_COMBINATIONS)
        .ok_or_else(|| format!("grid has more than {MAX_COMBINATIONS} combinations"))?;
    debug_assert!(total >= 1);
    Ok(axes)
}

/// Value indices of combination `idx`; the first axis varies slowest.
fn combination(axes: &[GridAxis], mut idx: usize) -> Vec<usize> {
    let mut out = vec![0; axes.len()];
    for (i, a) in axes.iter().enumerate().rev() {
        out[i] = idx % a.values.len();
        idx /= a.values.len();
    }
    out
}

fn combinations(axes: &[GridAxis]) -> usize {
    axes.iter().map(|a| a.values.len()).product()
}

fn sweep_cell(base: &RunConfig, axes: &[GridAxis], pick: &[usize]) -> std::result::Result<Vec<String>, String> {
    let mut cfg = base.clone();
    let mut row = Vec::with_capacity(axes.len() + 4);
    for (a, &j) in axes.iter().zip(pick) {
        let v = &a.values[j];
        cfg.set(&a.key, v).map_err(|e| e.to_string())?;
        row.push(v.clone());
    }
    let describe = |e: crate::Error| {
        let at: Vec<String> = axes.iter().zip(pick).map(|(a, &j)| format!("{}={}", a.key, a.values[j])).collect();
        format!("{} ({e})", at.join(" "))
    };
    cfg.validate().map_err(describe)?;
    let (d, m) = cfg.designs().map_err(describe)?;
    let trace = run_scenario(&cfg.scenario(), &d, &m).map_err(describe)?;
    let met = compute_metrics(&trace).map_err(describe)?;
    row.push(met.verdict.to_string());
    row.push(met.final_overshoot().map_or_else(String::new, g9));
    row.push(g9(met.ise));
    row.push(g9(met.max_e_norm));
    Ok(row)
}

/// Runs every combination of the grid on a pool of `jobs` workers; rows
/// come back in grid order whatever the scheduling.
pub fn sweep_rows(base: &RunConfig, axes: &[GridAxis], jobs: Option<usize>) -> std::result::Result<Vec<Vec<String>>, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| format!("worker pool: {e}"))?;
    let n = combinations(axes);
    pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| sweep_cell(base, axes, &combination(axes, i)))
            .collect()
    })
}

pub fn cmd_sweep<O: Write, E: Write>(
    cfg: &RunConfig,
    grid: &[String],
    jobs: Option<usize>,
    path: &Path,
    out: &mut O,
    err: &mut E,
) -> i32 {
    if jobs == Some(0) {
        let _ = writeln!(err, "error: --jobs must be >= 1");
        return EXIT_CONFIG;
    }
    let axes = match parse_grid(grid) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    // reject unknown keys and unparsable values before any run
    for a in &axes {
        let mut probe = cfg.clone();
        for v in &a.values {
            if let Err(e) = probe.set(&a.key, v) {
                let _ = writeln!(err, "error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    let rows = match sweep_rows(cfg, &axes, jobs) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let written = create(path).and_then(|mut f| {
        let keys: Vec<&str> = axes.iter().map(|a| a.key.as_str()).collect();
        writeln!(f, "{},{SWEEP_COLUMNS}", keys.join(","))?;
        for r in &rows {
            writeln!(f, "{}", r.join(","))?;
        }
        f.flush()
    });
    if let Err(e) = written {
        let _ = writeln!(err, "error: {}: {e}", path.display());
        return EXIT_IO;
    }
    let diverged = rows.iter().filter(|r| r[axes.len()].starts_with("diverged")).count();
    let _ = writeln!(
        out,
        "{} combinations, {} completed, {diverged} diverged -> {}",
        rows.len(),
        rows.len() - diverged,
        path.display()
    );
    EXIT_OK
}
