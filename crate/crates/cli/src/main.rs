//! `eqsat-opt`: an opt-style pipeline driver for the eqsat dialect.
//!
//! Reads a module, runs the requested passes in order (verifying after
//! each), and prints the result. Exit codes: 0 on success, 1 on
//! parse/verify/pass failure, 2 on bad flags.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;

use eqsat_core::eqsat::{convert_module_to_egraph, egraphs, verify_eqsat_module};
use eqsat_core::extract::{extract_module, CostModel};
use eqsat_core::ir::Module;
use eqsat_core::patterns::{lower_rules, parse_rules, MatchProgram};
use eqsat_core::rebuild::{cse_blocks, rebuild, PendingUnions};
use eqsat_core::saturate::{saturate_module, SaturationLimits};
use eqsat_core::text::{dot::emit_dot, parse_module, print_module};

const PASS_NAMES: &[&str] =
    &["convert-to-egraph", "eqsat-saturate", "eqsat-rebuild", "extract", "cse", "verify"];

#[derive(Parser)]
#[command(
    name = "eqsat-opt",
    about = "Equality saturation on SSA IR via the eqsat dialect",
    disable_help_subcommand = true
)]
struct Cli {
    /// Input .ir file; standard input when omitted
    input: Option<PathBuf>,

    /// Comma-separated pass pipeline: convert-to-egraph, eqsat-saturate,
    /// eqsat-rebuild, extract, cse, verify
    #[arg(short = 'p', long = "passes", value_delimiter = ',', value_name = "PASS")]
    passes: Vec<String>,

    /// Rewrite rules (.eqr), required by eqsat-saturate
    #[arg(long, value_name = "FILE")]
    rules: Option<PathBuf>,

    /// Cost model (.cost) for extract; unit costs when omitted
    #[arg(long, value_name = "FILE")]
    cost: Option<PathBuf>,

    /// Saturation iteration budget
    #[arg(long, default_value_t = 32, value_name = "N")]
    max_iterations: usize,

    /// Saturation e-node budget
    #[arg(long, default_value_t = 10_000, value_name = "N")]
    max_enodes: usize,

    /// Saturation wall-clock budget in milliseconds
    #[arg(long, default_value_t = 10_000, value_name = "MS")]
    time_budget_ms: u64,

    /// After saturation, write one DOT file per e-graph to
    /// PREFIX<index>.dot
    #[arg(long, value_name = "PATH-PREFIX")]
    emit_dot: Option<String>,

    /// Print saturation statistics as key=value lines on standard error
    #[arg(long)]
    report: bool,
}

enum Failure {
    /// Bad invocation: exit 2 with a usage-style message.
    Usage(String),
    /// Parse/verify/pass failure: exit 1 with diagnostics.
    Run(Vec<String>),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            eprintln!("usage: eqsat-opt [FILE] -p PASS[,PASS...] [--rules FILE] [--cost FILE]");
            ExitCode::from(2)
        }
        Err(Failure::Run(diags)) => {
            for d in diags {
                eprintln!("error: {d}");
            }
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    for pass in &cli.passes {
        if !PASS_NAMES.contains(&pass.as_str()) {
            return Err(Failure::Usage(format!(
                "unknown pass `{pass}` (expected one of {})",
                PASS_NAMES.join(", ")
            )));
        }
    }
    if cli.passes.iter().any(|p| p == "eqsat-saturate") && cli.rules.is_none() {
        return Err(Failure::Usage("pass `eqsat-saturate` requires --rules".into()));
    }

    let program = cli.rules.as_deref().map(load_rules).transpose()?;
    let cost_model = match cli.cost.as_deref() {
        None => CostModel::unit(),
        Some(path) => {
            let text = read_file(path)?;
            CostModel::parse(&text).map_err(|d| {
                Failure::Run(vec![format!("{}:{d}", path.display())])
            })?
        }
    };
    let limits = SaturationLimits {
        max_iterations: cli.max_iterations,
        max_enodes: cli.max_enodes,
        time_budget: Duration::from_millis(cli.time_budget_ms),
    };

    let (source, input_name) = match cli.input.as_deref() {
        Some(path) => (read_file(path)?, path.display().to_string()),
        None => {
            let mut buffer = String::new();
            std::io::stdin()
                .read_to_string(&mut buffer)
                .map_err(|e| Failure::Run(vec![format!("<stdin>: {e}")]))?;
            (buffer, "<stdin>".to_string())
        }
    };

    let mut module = parse_module(&source).map_err(|diags| {
        Failure::Run(diags.iter().map(|d| format!("{input_name}:{d}")).collect())
    })?;
    verify_all(&module)?;

    for pass in &cli.passes {
        run_pass(&mut module, pass, cli, program.as_ref(), &cost_model, limits)?;
        verify_all(&module)?;
    }

    print!("{}", print_module(&module));
    Ok(())
}

fn run_pass(
    module: &mut Module,
    pass: &str,
    cli: &Cli,
    program: Option<&MatchProgram>,
    cost_model: &CostModel,
    limits: SaturationLimits,
) -> Result<(), Failure> {
    let run_err = |d: eqsat_core::ir::Diagnostic| Failure::Run(vec![d.to_string()]);
    match pass {
        "convert-to-egraph" => convert_module_to_egraph(module).map_err(run_err),
        "eqsat-saturate" => {
            let program = program.expect("validated above");
            let reports = saturate_module(module, program, limits).map_err(run_err)?;
            if cli.report {
                for (index, r) in reports.iter().enumerate() {
                    eprintln!("egraph{index}.iterations={}", r.iterations);
                    eprintln!("egraph{index}.stop_reason={}", r.stop.as_str());
                    eprintln!("egraph{index}.final_enodes={}", r.final_enodes);
                    eprintln!("egraph{index}.final_eclasses={}", r.final_eclasses);
                    for (k, stats) in r.per_iteration.iter().enumerate() {
                        eprintln!("egraph{index}.iteration{k}.matches={}", stats.matches);
                        eprintln!("egraph{index}.iteration{k}.applies={}", stats.applies);
                    }
                }
            }
            if let Some(prefix) = cli.emit_dot.as_deref() {
                for (index, view) in egraphs(module).iter().enumerate() {
                    let dot = emit_dot(module, view.op).map_err(run_err)?;
                    let path = format!("{prefix}{index}.dot");
                    std::fs::write(&path, dot)
                        .map_err(|e| Failure::Run(vec![format!("{path}: {e}")]))?;
                }
            }
            Ok(())
        }
        "eqsat-rebuild" => {
            for view in egraphs(module) {
                rebuild(module, view, PendingUnions::new()).map_err(run_err)?;
            }
            Ok(())
        }
        "extract" => extract_module(module, cost_model).map_err(run_err),
        "cse" => cse_blocks(module).map(|_| ()).map_err(run_err),
        "verify" => Ok(()), // verification already brackets every pass
        _ => unreachable!("pass names validated"),
    }
}

fn verify_all(module: &Module) -> Result<(), Failure> {
    let mut diags: Vec<String> =
        eqsat_core::ir::verify::verify_module(module).iter().map(|d| d.to_string()).collect();
    diags.extend(verify_eqsat_module(module).iter().map(|d| d.to_string()));
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Failure::Run(diags))
    }
}

fn read_file(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Run(vec![format!("{}: {e}", path.display())]))
}

fn load_rules(path: &std::path::Path) -> Result<MatchProgram, Failure> {
    let text = read_file(path)?;
    let rules = parse_rules(&text).map_err(|diags| {
        Failure::Run(diags.iter().map(|d| format!("{}:{d}", path.display())).collect())
    })?;
    Ok(lower_rules(&rules))
}
