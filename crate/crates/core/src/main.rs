use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use crossfd::assembly::Scheme;
use crossfd::problems::{describe, make_example, PROBLEM_NAMES};
use crossfd::solve::{Method, SolveOptions};
use crossfd::study::{
    audit_to_text, fmt_sci, mmatrix_to_text, run_consistency_audit, run_convergence,
    run_mmatrix_audit, solve_level, to_csv, to_text, StudyConfig,
};
use crossfd::{plot, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_AUDIT: u8 = 3;

#[derive(Parser)]
#[command(name = "crossfd", version, about = "Compact 9-point schemes for elliptic cross-interface problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    High,
    Mmatrix,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::High => Scheme::HighOrder,
            SchemeArg::Mmatrix => Scheme::MMatrix,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Direct,
    Iterative,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on N1 = 2^J grids and report errors and observed orders.
    Converge {
        #[arg(long)]
        problem: String,
        #[arg(long, value_enum, default_value = "high")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 2)]
        jmin: u32,
        #[arg(long, default_value_t = 6)]
        jmax: u32,
        #[arg(long, value_enum, default_value = "text")]
        out: OutFormat,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Log-log convergence plot (SVG).
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Error heatmap on the finest grid (PNG).
        #[arg(long)]
        heatmap: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "direct")]
        solver: SolverArg,
        /// Backward-error tolerance of the linear solve.
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        /// Free parameter of the order-3 near-interface stencils.
        #[arg(long)]
        rho: Option<f64>,
        /// Fill the assemble/solve timing columns.
        #[arg(long)]
        timings: bool,
    },
    /// Truncation error of each stencil class on the exact solution, with fitted slopes.
    Consistency {
        #[arg(long)]
        problem: String,
        #[arg(long, value_enum, default_value = "high")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 3)]
        jmin: u32,
        #[arg(long, default_value_t = 7)]
        jmax: u32,
        /// Restrict to these stencil cases (e.g. interior, on-gamma, near-cross-2).
        #[arg(long = "case")]
        cases: Vec<String>,
        /// Exit with status 3 if a slope falls below its stated order minus 0.3.
        #[arg(long)]
        strict: bool,
    },
    /// Check the sign and summation conditions row by row.
    Mmatrix {
        #[arg(long)]
        problem: String,
        #[arg(long, value_enum, default_value = "high")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 4)]
        j: u32,
        /// Exit with status 3 on any violation.
        #[arg(long)]
        strict: bool,
    },
    /// List the built-in problems.
    ListProblems,
}

enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
    Audit(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownProblem(_) | Error::InvalidOption(_) | Error::InvalidDomain(_) => {
                Failure::Usage(e.into())
            }
            _ => Failure::Numerical(e.into()),
        }
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(Failure::Usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::ListProblems => {
            for name in PROBLEM_NAMES {
                let p = make_example(name)?;
                let d = p.domain;
                println!(
                    "{name:<16} xi = {:.6}  zeta = {:.6}  a = [{}]  {}",
                    d.xi,
                    d.zeta,
                    p.a.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(", "),
                    describe(name)
                );
            }
            Ok(())
        }
        Command::Converge {
            problem,
            scheme,
            jmin,
            jmax,
            out,
            output,
            plot: plot_path,
            heatmap,
            solver,
            tol,
            rho,
            timings,
        } => {
            let p = make_example(&problem)?;
            let method = match solver {
                SolverArg::Direct => Method::Direct,
                SolverArg::Iterative => Method::Iterative,
            };
            let config = StudyConfig {
                scheme: scheme.into(),
                jmin,
                jmax,
                solver: SolveOptions { method, tolerance: tol, ..Default::default() },
                rho,
                record_timings: timings,
            };
            let report = run_convergence(&p, &config)?;
            let text = match out {
                OutFormat::Text => to_text(&report),
                OutFormat::Csv => to_csv(&report)?,
            };
            emit(&text, output.as_ref())?;
            if let Some(path) = plot_path {
                plot::write_convergence_svg(&path, &report)?;
            }
            if let Some(path) = heatmap {
                let last = report.levels.last().map_or(jmin, |l| l.j);
                let (grid, sol, _, _) = solve_level(&p, &config, last)?;
                plot::write_error_png(&path, &p, &grid, &sol)?;
            }
            match report.failure {
                Some((j, msg)) => Err(Failure::Numerical(anyhow::anyhow!("level J = {j} failed: {msg}"))),
                None => Ok(()),
            }
        }
        Command::Consistency { problem, scheme, jmin, jmax, cases, strict } => {
            let p = make_example(&problem)?;
            let filter: Vec<&str> = cases.iter().map(String::as_str).collect();
            let report = run_consistency_audit(
                &p,
                scheme.into(),
                jmin,
                jmax,
                (!filter.is_empty()).then_some(filter.as_slice()),
            )?;
            print!("{}", audit_to_text(&report));
            let low: Vec<String> = report
                .classes
                .iter()
                .filter(|c| !(c.slope >= c.order as f64 - 0.3))
                .map(|c| format!("{} slope {:.2} < {}", c.case, c.slope, c.order as f64 - 0.3))
                .collect();
            if strict && !low.is_empty() {
                return Err(Failure::Audit(low.join("; ")));
            }
            Ok(())
        }
        Command::Mmatrix { problem, scheme, j, strict } => {
            let p = make_example(&problem)?;
            let report = run_mmatrix_audit(&p, scheme.into(), j)?;
            print!("{}", mmatrix_to_text(&problem, j, &report));
            if strict && !report.verdict {
                return Err(Failure::Audit(format!(
                    "{} sign and {} sum violations (worst sign {})",
                    report.sign_failures,
                    report.sum_failures,
                    fmt_sci(report.worst_sign)
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Audit(msg)) => {
            eprintln!("audit violation: {msg}");
            ExitCode::from(EXIT_AUDIT)
        }
    }
}
