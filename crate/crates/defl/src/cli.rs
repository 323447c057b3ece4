//! Command-line interface.
//!
//! Exit codes: `check` returns 0 when the formula is true, 1 when false, 2 on
//! any error; `valid` returns 0 on a validity verdict, 1 when a countermodel
//! is found, 2 on error; the other commands return 0 on success and 2 on
//! error (`scenario --run-golden` returns 1 if a golden check fails).

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::engine::satisfies;
use crate::io::{model_to_string, read_model, write_dot, write_model};
use crate::model::PointedModel;
use crate::scenarios;
use crate::syntax::{parse_formula, parse_operator, DynOp};
use crate::validity::{check_valid, Signature, Verdict};

#[derive(Parser)]
#[command(
    name = "defl",
    about = "Model checking and bounded validity for dynamic epistemic friendship logic",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a formula at a point of a model.
    Check {
        /// Path to a model file.
        model: PathBuf,
        /// World of the evaluation point.
        world: String,
        /// Agent of the evaluation point.
        agent: String,
        /// Formula text, or `-` to read it from stdin.
        formula: String,
    },
    /// Apply a transformation or action structure to a model and write the
    /// result.
    Transform {
        /// Path to a model file.
        model: PathBuf,
        /// Operator text, e.g. `K := cutK(d)`, or `-` for stdin.
        operator: String,
        /// Where to write the transformed model.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check a formula on every model over a signature.
    Valid {
        /// Formula text, or `-` to read it from stdin.
        formula: String,
        /// Number of worlds.
        #[arg(long)]
        worlds: usize,
        /// Agent names, comma separated; each doubles as its own nominal.
        #[arg(long, value_delimiter = ',')]
        agents: Vec<String>,
        /// Propositional variables, comma separated.
        #[arg(long, value_delimiter = ',')]
        props: Vec<String>,
        /// Enumerate models with a want relation.
        #[arg(long)]
        with_d: bool,
    },
    /// Print a shipped scenario as a model file; `--run-golden` runs the
    /// golden checks.
    Scenario {
        /// One of: fig1, fig2, spy, gossip.
        name: String,
        /// Run the golden suite and report one line per check.
        #[arg(long)]
        run_golden: bool,
    },
    /// Render a model as Graphviz DOT (worlds as rows, agents as columns).
    ExportDot {
        /// Path to a model file.
        model: PathBuf,
        /// Where to write the DOT text.
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Runs the CLI on the given arguments and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<i32, String> {
    match cmd {
        Cmd::Check {
            model,
            world,
            agent,
            formula,
        } => {
            let (model, _) = read_model(&model).map_err(|e| e.to_string())?;
            let text = read_arg(&formula)?;
            let phi = parse_formula(&text, &model.nominal_tokens()).map_err(|e| e.to_string())?;
            let point = model.point(&world, &agent).map_err(|e| e.to_string())?;
            let pm = PointedModel::new(model, point).map_err(|e| e.to_string())?;
            let verdict = satisfies(&pm, &phi).map_err(|e| e.to_string())?;
            println!("{verdict}");
            Ok(if verdict { 0 } else { 1 })
        }
        Cmd::Transform {
            model,
            operator,
            output,
        } => {
            let (model, actual) = read_model(&model).map_err(|e| e.to_string())?;
            let text = read_arg(&operator)?;
            let op = parse_operator(&text, &model.nominal_tokens()).map_err(|e| e.to_string())?;
            let result = match op {
                DynOp::Trans(t) => crate::dynamics::apply_trans(&model, &t),
                DynOp::Gddl(g) => crate::dynamics::apply_gddl(&model, &g),
            }
            .map_err(|e| e.to_string())?;
            let mapped = actual.and_then(|p| result.map_point(&p).cloned());
            write_model(&result.model, mapped.as_ref(), &output).map_err(|e| e.to_string())?;
            println!("wrote {}", output.display());
            Ok(0)
        }
        Cmd::Valid {
            formula,
            worlds,
            agents,
            props,
            with_d,
        } => {
            let agent_refs: Vec<&str> = agents.iter().map(|s| s.as_str()).collect();
            let prop_refs: Vec<&str> = props.iter().map(|s| s.as_str()).collect();
            let sig = Signature::new(worlds, &agent_refs, &prop_refs, with_d)
                .map_err(|e| e.to_string())?;
            let text = read_arg(&formula)?;
            let nominals = agents.iter().cloned().collect();
            let phi = parse_formula(&text, &nominals).map_err(|e| e.to_string())?;
            match check_valid(&phi, &sig).map_err(|e| e.to_string())? {
                Verdict::ValidUpTo(sig) => {
                    println!("ValidUpTo({sig})");
                    Ok(0)
                }
                Verdict::Countermodel(model, point) => {
                    println!("Countermodel at {point}:");
                    print!("{}", model_to_string(&model, Some(&point)));
                    Ok(1)
                }
            }
        }
        Cmd::Scenario { name, run_golden } => {
            if run_golden {
                let mut failed = 0;
                for (check_name, check) in scenarios::golden_suite() {
                    match check() {
                        Ok(()) => println!("ok   {check_name}"),
                        Err(e) => {
                            failed += 1;
                            println!("FAIL {check_name}: {e}");
                        }
                    }
                }
                if failed > 0 {
                    return Ok(1);
                }
            }
            let sc = scenarios::load(&name).map_err(|e| e.to_string())?;
            print!("{}", model_to_string(&sc.model, Some(&sc.actual)));
            Ok(0)
        }
        Cmd::ExportDot { model, output } => {
            let (model, actual) = read_model(&model).map_err(|e| e.to_string())?;
            write_dot(&model, actual.as_ref(), &output).map_err(|e| e.to_string())?;
            println!("wrote {}", output.display());
            Ok(0)
        }
    }
}

/// `-` means "read stdin".
fn read_arg(arg: &str) -> Result<String, String> {
    if arg == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| e.to_string())?;
        Ok(buf)
    } else {
        Ok(arg.to_string())
    }
}
