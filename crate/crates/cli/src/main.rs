//! `scenagg` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input (validation, parse
//! or I/O), 3 resource cap exceeded.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use scenagg::approx::{approx_minmax, approx_regret, ApproxOptions, Certificate, SubSolver};
use scenagg::aggregation::Scheme;
use scenagg::experiment::{format_summary, render_svg, run_experiment, summarize, write_csv, ExperimentConfig, ExperimentCriterion};
use scenagg::instances::{gen_example1, gen_layered, gen_selection, gen_tight, read_instance, write_instance, write_instance_string};
use scenagg::par::Execution;
use scenagg::solvers::{brute_force, exact_solve, fptas_solve, per_scenario_optima, Criterion, LabelOptions, SolveResult};
use scenagg::{Error, Instance, Solution};

#[derive(Parser)]
#[command(name = "scenagg", version, about = "Scenario aggregation for robust combinatorial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output path; stdout when omitted.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Solve an instance.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CriterionArg::Minmax)]
        criterion: CriterionArg,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Accuracy of the fptas method.
        #[arg(long, default_value_t = 1.0)]
        eps_tilde: f64,
        /// Largest number of solutions the brute-force method may enumerate.
        #[arg(long)]
        cap: Option<u128>,
        #[arg(long)]
        json: bool,
    },
    /// Run the aggregation approximation pipeline.
    Approx {
        file: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Consecutive)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value_t = CriterionArg::Minmax)]
        criterion: CriterionArg,
        #[arg(long, value_enum, default_value_t = SubSolverArg::Fptas)]
        sub_solver: SubSolverArg,
        #[arg(long, default_value_t = 1.0)]
        eps_tilde: f64,
        /// Aggregation level to use instead of the one chosen from epsilon.
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Sweep aggregation levels on random layered instances.
    Experiment {
        #[arg(long, default_value_t = 10)]
        layers: usize,
        #[arg(long, default_value_t = 4)]
        width: usize,
        #[arg(long, default_value_t = 16)]
        k: usize,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        /// Use 1000 instances.
        #[arg(long, conflicts_with = "instances")]
        full: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated schemes.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SchemeArg::Similarity, SchemeArg::Consecutive])]
        schemes: Vec<SchemeArg>,
        /// Comma-separated scenario counts; K halved down to 1 when omitted.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = CriterionArg::Minmax)]
        criterion: CriterionArg,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Print the summary table (default when no output file is given).
        #[arg(long)]
        summary: bool,
        /// Run instances one after another.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Complete layered graph with uniform(0,1) costs.
    Layered {
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Two disjoint paths of length 2^k with 2^k scenarios.
    Tight {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        ell: u32,
    },
    /// Three parallel edges under four scenarios.
    Example1,
    /// Choose p of n items, uniform(0,1) costs.
    Selection {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Minmax,
    Regret,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Brute,
    Fptas,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Consecutive,
    Similarity,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Consecutive => Scheme::Consecutive,
            SchemeArg::Similarity => Scheme::Similarity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SubSolverArg {
    Exact,
    Fptas,
    Adversarial,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceCap(_) => 3,
        _ => 2,
    }
}

fn criterion_for(inst: &Instance, c: CriterionArg) -> scenagg::Result<Criterion> {
    Ok(match c {
        CriterionArg::Minmax => Criterion::MinMax,
        CriterionArg::Regret => Criterion::GeneralizedRegret(per_scenario_optima(inst, Execution::default())?),
    })
}

fn elements(x: &Solution) -> Vec<usize> {
    x.elements().collect()
}

fn gen(kind: GenKind, output: Option<PathBuf>) -> scenagg::Result<()> {
    let inst = match kind {
        GenKind::Layered { layers, width, k, seed } => gen_layered(layers, width, k, seed)?,
        GenKind::Tight { k, ell } => gen_tight(k, ell)?,
        GenKind::Example1 => gen_example1(),
        GenKind::Selection { n, p, k, seed } => gen_selection(n, p, k, seed)?,
    };
    match output {
        Some(path) => write_instance(&inst, path),
        None => {
            io::stdout().write_all(write_instance_string(&inst)?.as_bytes())?;
            Ok(())
        }
    }
}

fn print_solve(method: &str, r: &SolveResult, json: bool) {
    if json {
        let v = json!({
            "method": method,
            "value": r.value,
            "exact": r.exact,
            "solution": elements(&r.solution),
            "incidence": r.solution.bit_string(),
            "labels_explored": r.labels_explored,
        });
        println!("{v}");
    } else {
        println!("value: {}", r.value);
        println!("solution: {:?}", elements(&r.solution));
        println!("incidence: {}", r.solution.bit_string());
        println!("method: {method} (exact: {}, labels explored: {})", r.exact, r.labels_explored);
    }
}

fn print_certificate(x: &Solution, c: &Certificate, json: bool) {
    if json {
        let v = json!({
            "solution": elements(x),
            "incidence": x.bit_string(),
            "achieved_value": c.achieved_value,
            "guarantee_factor": c.guarantee_factor,
            "lower_bound": c.lower_bound,
            "certified_ratio": c.certified_ratio(),
            "level_used": c.level_used,
            "scheme": c.scheme.name(),
            "sub_solver_alpha": c.sub_solver_alpha,
            "group_factor": c.group_factor,
            "scenario_count": c.scenario_count,
            "aggregated_value": c.aggregated_value,
        });
        println!("{v}");
    } else {
        println!("solution: {:?}", elements(x));
        println!("incidence: {}", x.bit_string());
        println!("achieved value: {}", c.achieved_value);
        println!("guarantee factor: {}", c.guarantee_factor);
        println!("lower bound: {}", c.lower_bound);
        println!(
            "level used: {} ({} aggregated scenarios, {} scheme, alpha {})",
            c.level_used, c.scenario_count, c.scheme, c.sub_solver_alpha
        );
    }
}

fn run(command: Command) -> scenagg::Result<()> {
    let labels = LabelOptions::default();
    match command {
        Command::Gen { kind, output } => gen(kind, output),
        Command::Solve { file, criterion, method, eps_tilde, cap, json } => {
            let inst = read_instance(file)?;
            let crit = criterion_for(&inst, criterion)?;
            let (name, r) = match method {
                Method::Exact => ("exact", exact_solve(&inst, &crit, &labels)?),
                Method::Brute => ("brute", brute_force(&inst, &crit, cap.unwrap_or(labels.enumeration_cap))?),
                Method::Fptas => ("fptas", fptas_solve(&inst, eps_tilde, &crit, &labels)?),
            };
            print_solve(name, &r, json);
            Ok(())
        }
        Command::Approx { file, epsilon, scheme, criterion, sub_solver, eps_tilde, level, json } => {
            let inst = read_instance(file)?;
            let opts = ApproxOptions {
                epsilon,
                scheme: scheme.into(),
                sub_solver: match sub_solver {
                    SubSolverArg::Exact => SubSolver::Exact,
                    SubSolverArg::Fptas => SubSolver::Fptas { eps_tilde },
                    SubSolverArg::Adversarial => SubSolver::Adversarial,
                },
                level_override: level,
                ..ApproxOptions::default()
            };
            let (x, cert) = match criterion {
                CriterionArg::Minmax => approx_minmax(&inst, &opts)?,
                CriterionArg::Regret => approx_regret(&inst, &opts)?,
            };
            print_certificate(&x, &cert, json);
            Ok(())
        }
        Command::Experiment {
            layers,
            width,
            k,
            instances,
            full,
            seed,
            schemes,
            levels,
            criterion,
            csv,
            svg,
            summary,
            sequential,
        } => {
            let cfg = ExperimentConfig {
                layers,
                width,
                k,
                instance_count: if full { 1000 } else { instances },
                seed,
                schemes: schemes.into_iter().map(Scheme::from).collect(),
                scenario_counts: levels,
                criterion: match criterion {
                    CriterionArg::Minmax => ExperimentCriterion::MinMax,
                    CriterionArg::Regret => ExperimentCriterion::Regret,
                },
                execution: if sequential { Execution::Sequential } else { Execution::Parallel },
                labels,
            };
            let rows = run_experiment(&cfg)?;
            if let Some(path) = &csv {
                write_csv(&rows, BufWriter::new(File::create(path)?))?;
            }
            if let Some(path) = &svg {
                std::fs::write(path, render_svg(&rows))?;
            }
            if summary || (csv.is_none() && svg.is_none()) {
                print!("{}", format_summary(&summarize(&rows)));
            }
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} rows failed", rows.len());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
