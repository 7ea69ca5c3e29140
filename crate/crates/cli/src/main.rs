//! `stclear` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime error or failed audit, 2 bad usage,
//! 3 infeasible or unbounded clearing, 4 iteration limit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stclear::audit::{audit_solution, run_full_audit, AuditConfig, AuditReport};
use stclear::io::{fmt_num, load_instance, load_instance_file, load_solution, save_instance, write_solution};
use stclear::scenario::{generate_waste_case, restrict_to_qss, CaseParams, Variant};
use stclear::settlement::{clear, settle, ClearingSolution};
use stclear::simplex::{SolveStatus, SolverConfig};
use stclear::{Error, MarketInstance};

#[derive(Parser)]
#[command(name = "stclear", version, about = "Space-time supply-chain market clearing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a waste-to-energy case instance.
    Generate {
        #[arg(long, default_value_t = 8)]
        farms: usize,
        #[arg(long, default_value_t = 4)]
        processors: usize,
        #[arg(long, default_value_t = 72)]
        hours: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// base, nostorage, unlimited or triple.
        #[arg(long, default_value = "base", value_parser = parse_variant)]
        variant: Variant,
        #[arg(long)]
        out: PathBuf,
    },
    /// Clear an instance and write allocation, price, settlement, stream and audit tables.
    Clear {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Tolerance for saturation classes and audit checks.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Clear an instance (or take a supplied solution) and check every economic property.
    Audit {
        #[arg(long)]
        instance: PathBuf,
        /// Audit at 1e-8 instead of 1e-6.
        #[arg(long)]
        strict: bool,
        /// Directory holding allocations.csv and prices.csv to audit instead of clearing.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Compare the space-time clearing with its quasi-steady-state restriction.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        /// Output directory for surplus.csv and price_delta.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        jobs: usize,
    },
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| {
        let names: Vec<_> = Variant::ALL.iter().map(|v| v.name()).collect();
        format!("unknown variant `{s}` (expected one of {})", names.join(", "))
    })
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible | SolveStatus::Unbounded => 3,
        SolveStatus::IterationLimit => 4,
    }
}

fn write_file(path: &Path, contents: &[u8]) -> stclear::Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn generate(params: CaseParams, out: &Path) -> stclear::Result<u8> {
    let inst = generate_waste_case(&params)?;
    save_instance(out, &inst, Some(params))?;
    log::info!("wrote {} stakeholders to {}", inst.stakeholder_count(), out.display());
    Ok(0)
}

fn run_clear(instance: &Path, out_dir: &Path, tol: f64, max_iters: Option<usize>) -> stclear::Result<u8> {
    let inst = load_instance(instance)?;
    let solver = SolverConfig { max_iterations: max_iters, ..SolverConfig::default() };
    let sol = clear(&inst, &solver)?;
    if !sol.is_optimal() {
        eprintln!("clearing stopped: {}", sol.status);
        return Ok(status_code(sol.status));
    }
    let report = settle(&inst, &sol, tol)?;
    let audit = audit_solution(&inst, &sol, &AuditConfig { tol, solver })?;
    write_solution(out_dir, &sol, &report, &audit)?;
    println!("status {} surplus {} iterations {}", sol.status, fmt_num(sol.surplus), sol.iterations);
    Ok(0)
}

fn print_audit(report: &AuditReport) {
    for c in &report.checks {
        let status = status_name(c.status);
        let offender = c.offender.as_deref().unwrap_or("-");
        println!("{:<26} {:<12} residual {:.3e} tol {:.0e} {offender} {}", c.name, status, c.residual, c.tolerance, c.detail);
    }
    println!("{}", if report.passed { "audit passed" } else { "audit FAILED" });
}

fn status_name(s: stclear::audit::CheckStatus) -> &'static str {
    use stclear::audit::CheckStatus::*;
    match s {
        Pass => "pass",
        Fail => "fail",
        Skipped => "skipped",
        Inconclusive => "inconclusive",
    }
}

fn run_audit(instance: &Path, strict: bool, solution: Option<&Path>) -> stclear::Result<u8> {
    let inst = load_instance(instance)?;
    let cfg = if strict { AuditConfig::strict() } else { AuditConfig::default() };
    let report = match solution {
        Some(dir) => audit_solution(&inst, &load_solution(dir, &inst)?, &cfg)?,
        None => run_full_audit(&inst, &cfg)?,
    };
    print_audit(&report);
    Ok(if report.passed { 0 } else { 1 })
}

fn solve_pair(st: &MarketInstance, qss: &MarketInstance, jobs: usize) -> stclear::Result<(ClearingSolution, ClearingSolution)> {
    let cfg = SolverConfig::default();
    if jobs < 2 {
        return Ok((clear(st, &cfg)?, clear(qss, &cfg)?));
    }
    std::thread::scope(|s| {
        let h = s.spawn(|| clear(qss, &cfg));
        let a = clear(st, &cfg)?;
        let b = h.join().expect("clearing thread panicked")?;
        Ok((a, b))
    })
}

fn compare(instance: &Path, out: &Path, jobs: usize) -> stclear::Result<u8> {
    let (st, _) = load_instance_file(instance)?;
    let qss = restrict_to_qss(&st);
    let (a, b) = solve_pair(&st, &qss, jobs)?;
    for sol in [&a, &b] {
        if !sol.is_optimal() {
            eprintln!("clearing stopped: {}", sol.status);
            return Ok(status_code(sol.status));
        }
    }
    fs::create_dir_all(out).map_err(|source| Error::Io { path: out.display().to_string(), source })?;

    let surplus = format!("model,surplus\nST,{}\nQSS,{}\n", fmt_num(a.surplus), fmt_num(b.surplus));
    write_file(&out.join("surplus.csv"), surplus.as_bytes())?;

    let mut delta = String::from("node,time,product,price_st,price_qss,delta\n");
    for (key, &pa) in &a.nodal_prices {
        let pb = b.price(key).unwrap_or(0.0);
        delta.push_str(&format!(
            "{},{},{},{},{},{}\n",
            key.node,
            key.time,
            key.product,
            fmt_num(pa),
            fmt_num(pb),
            fmt_num(pb - pa)
        ));
    }
    write_file(&out.join("price_delta.csv"), delta.as_bytes())?;
    print!("{surplus}");
    Ok(0)
}

fn run(cli: Cli) -> stclear::Result<u8> {
    match cli.command {
        Command::Generate { farms, processors, hours, seed, variant, out } => {
            let params = CaseParams { farms, processors, hours, seed, ..CaseParams::default() }.with_variant(variant);
            generate(params, &out)
        }
        Command::Clear { instance, out_dir, tol, max_iters } => run_clear(&instance, &out_dir, tol, max_iters),
        Command::Audit { instance, strict, solution } => run_audit(&instance, strict, solution.as_deref()),
        Command::Compare { instance, out, jobs } => compare(&instance, &out, jobs),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STCLEAR_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e @ Error::InvalidParams(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
