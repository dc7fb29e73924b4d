//! The `tg` command dispatcher.
//!
//! Every subcommand reads graph files or let programs (detected by their
//! first token), takes the signature from an inline block or `--sig`,
//! and prints line-oriented UTF-8 output that is stable across runs.
//! Exit codes: 0 on success, 1 for failed checks and data errors, 2 for
//! usage errors.

use crate::algebras;
use crate::dot::to_dot;
use crate::elaborate::{elaborate, to_let_program};
use crate::error::CliError;
use crate::format::{self, Loaded};
use crate::letprog::parse_let;
use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use tg_core::cospan::{compose, equiv, tensor, Cospan, CospanBody};
use tg_core::family::SortedSet;
use tg_core::semantics::{lift, solve_cyclic, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use tg_core::trees::Context;
use tg_core::{
    from_abstract, to_abstract, to_cyclic, unfold, validate_atg, Classification,
    ConcreteTermGraph, Signature,
};

#[derive(Parser)]
#[command(name = "tg", about = "Term graphs: validation, laws, composition, evaluation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Let,
    Graph,
    Abstract,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgebraKind {
    Int,
    Rat,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check wellformedness and report the acyclic/cyclic classification.
    Validate {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Check the three coalgebra laws of a tree assignment.
    Laws {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Rewrite a file as let notation, a graph file, a graph file with
    /// its tree assignment, or Graphviz input.
    Convert {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compose two cospans; the outputs of FIRST feed the inputs of SECOND.
    Compose {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Disjoint union of two cospans.
    Tensor {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether two cospans are equivalent, printing a witness.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Evaluate an acyclic term graph in a built-in algebra.
    Eval {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long, value_enum)]
        algebra: AlgebraKind,
        #[arg(long = "const")]
        consts: Option<String>,
        #[arg(long)]
        env: Option<String>,
    },
    /// Solve a possibly cyclic term graph by fixpoint iteration.
    Solve {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long, value_enum)]
        algebra: AlgebraKind,
        #[arg(long = "const")]
        consts: Option<String>,
        #[arg(long)]
        env: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Print the depth-bounded unfolding of one node.
    Unfold {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        node: String,
        #[arg(long)]
        depth: usize,
    },
}

/// A loaded input file, whichever notation it was written in.
struct Doc {
    sig: Signature,
    graph: ConcreteTermGraph,
    /// Output boundary in display order, when declared.
    outputs: Option<Vec<(String, String)>>,
    coalgebra: Option<BTreeMap<String, tg_core::PTree>>,
    recursive: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_signature(path: Option<&PathBuf>) -> Result<Option<Signature>, CliError> {
    match path {
        None => Ok(None),
        Some(p) => Ok(Some(format::parse_signature(&read(p)?)?)),
    }
}

fn load(path: &Path, sig: Option<&PathBuf>) -> Result<Doc, CliError> {
    let src = read(path)?;
    let external = load_signature(sig)?;
    let first = format::lex(&src)?
        .first()
        .and_then(|t| match &t.tok {
            format::Tok::Word(w) => Some(w.clone()),
            _ => None,
        })
        .unwrap_or_default();
    if matches!(first.as_str(), "inputs" | "let" | "letrec") {
        let program = parse_let(&src)?;
        let sig = external.ok_or(CliError::MissingSignature)?;
        let cospan = elaborate(&program, &sig)?;
        let graph = match cospan.body() {
            CospanBody::Acyclic(atg) => from_abstract(atg).0,
            CospanBody::Cyclic(c) => c.to_concrete().0,
        };
        let outputs = cospan
            .out()
            .iter()
            .map(|(b, n)| (b.clone(), n.clone()))
            .collect::<Vec<_>>();
        Ok(Doc {
            sig,
            graph,
            outputs: Some(outputs),
            coalgebra: None,
            recursive: program.recursive,
        })
    } else {
        let loaded = format::assemble(format::parse_document(&src)?, external.as_ref())?;
        Ok(Doc {
            sig: loaded.sig,
            graph: loaded.graph,
            outputs: loaded.outputs,
            coalgebra: loaded.coalgebra,
            recursive: false,
        })
    }
}

fn doc_to_cospan(doc: &Doc) -> Result<Cospan, CliError> {
    let outputs = doc
        .outputs
        .as_ref()
        .ok_or(CliError::MissingSection("outputs"))?;
    let mut target = SortedSet::new();
    let mut out = BTreeMap::new();
    for (name, node) in outputs {
        let sort = doc
            .graph
            .sort_of(node)
            .ok_or_else(|| CliError::UnknownName(node.clone()))?;
        target.insert(name.clone(), sort.to_string())?;
        out.insert(name.clone(), node.clone());
    }
    let body = if doc.recursive || !doc.graph.classify().is_acyclic() {
        CospanBody::Cyclic(to_cyclic(&doc.graph))
    } else {
        CospanBody::Acyclic(to_abstract(&doc.graph)?)
    };
    Ok(Cospan::new(
        doc.graph.inputs().clone(),
        target,
        body,
        out,
    )?)
}

fn cospan_to_loaded(cospan: &Cospan, sig: &Signature) -> Loaded {
    let graph = match cospan.body() {
        CospanBody::Acyclic(atg) => from_abstract(atg).0,
        CospanBody::Cyclic(c) => c.to_concrete().0,
    };
    let outputs = cospan
        .out()
        .iter()
        .map(|(b, n)| (b.clone(), n.clone()))
        .collect();
    Loaded {
        sig: sig.clone(),
        graph,
        outputs: Some(outputs),
        coalgebra: None,
    }
}

fn merge_signatures(a: &Signature, b: &Signature) -> Result<Signature, CliError> {
    let mut sorts: Vec<String> = a.sorts().map(str::to_string).collect();
    for s in b.sorts() {
        if !a.has_sort(s) {
            sorts.push(s.to_string());
        }
    }
    let mut ops: Vec<(String, Vec<String>, String)> = a
        .ops()
        .map(|op| (op.name().to_string(), op.inputs().to_vec(), op.output().to_string()))
        .collect();
    for op in b.ops() {
        match a.op(op.name()) {
            None => ops.push((
                op.name().to_string(),
                op.inputs().to_vec(),
                op.output().to_string(),
            )),
            Some(existing) if existing == op => {}
            Some(_) => {
                return Err(CliError::Other(format!(
                    "operation {:?} is declared differently in the two files",
                    op.name()
                )))
            }
        }
    }
    Ok(Signature::new(sorts, ops)?)
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    match output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
    }
}

fn classification_line(c: &Classification) -> String {
    match c {
        Classification::Acyclic { .. } => "classification: acyclic".to_string(),
        Classification::Cyclic { witness } => {
            let mut cycle = witness.join(" -> ");
            cycle.push_str(" -> ");
            cycle.push_str(&witness[0]);
            format!("classification: cyclic ({cycle})")
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Validate { file, sig } => {
            let doc = load(&file, sig.as_ref())?;
            println!("valid");
            println!("{}", classification_line(&doc.graph.classify()));
            Ok(0)
        }
        Cmd::Laws { file, sig } => {
            let doc = load(&file, sig.as_ref())?;
            let report = match &doc.coalgebra {
                Some(table) => {
                    let ctx =
                        Context::inclusion(doc.graph.inputs().clone(), doc.graph.all_names())?;
                    validate_atg(&ctx, table)?
                }
                None => {
                    let atg = to_abstract(&doc.graph)?;
                    validate_atg(atg.ctx(), atg.assignment())?
                }
            };
            println!("{report}");
            Ok(if report.passes() { 0 } else { 1 })
        }
        Cmd::Convert {
            file,
            sig,
            to,
            output,
        } => {
            let doc = load(&file, sig.as_ref())?;
            let outputs = doc.outputs.clone().unwrap_or_default();
            let text = match to {
                Target::Let => to_let_program(&doc.graph, &outputs)?.to_string(),
                Target::Graph => format::write_graph_file(&Loaded {
                    sig: doc.sig.clone(),
                    graph: doc.graph.clone(),
                    outputs: doc.outputs.clone(),
                    coalgebra: None,
                }),
                Target::Abstract => {
                    let atg = to_abstract(&doc.graph)?;
                    format::write_graph_file(&Loaded {
                        sig: doc.sig.clone(),
                        graph: doc.graph.clone(),
                        outputs: doc.outputs.clone(),
                        coalgebra: Some(atg.assignment().clone()),
                    })
                }
                Target::Dot => to_dot(&doc.graph, &outputs),
            };
            emit(&text, output.as_ref())?;
            Ok(0)
        }
        Cmd::Compose {
            first,
            second,
            sig,
            output,
        } => {
            let doc1 = load(&first, sig.as_ref())?;
            let doc2 = load(&second, sig.as_ref())?;
            let merged = merge_signatures(&doc1.sig, &doc2.sig)?;
            let composite = compose(&doc_to_cospan(&doc1)?, &doc_to_cospan(&doc2)?)?;
            emit(
                &format::write_graph_file(&cospan_to_loaded(&composite, &merged)),
                output.as_ref(),
            )?;
            Ok(0)
        }
        Cmd::Tensor {
            first,
            second,
            sig,
            output,
        } => {
            let doc1 = load(&first, sig.as_ref())?;
            let doc2 = load(&second, sig.as_ref())?;
            let merged = merge_signatures(&doc1.sig, &doc2.sig)?;
            let combined = tensor(&doc_to_cospan(&doc1)?, &doc_to_cospan(&doc2)?);
            emit(
                &format::write_graph_file(&cospan_to_loaded(&combined, &merged)),
                output.as_ref(),
            )?;
            Ok(0)
        }
        Cmd::Equiv { first, second, sig } => {
            let doc1 = load(&first, sig.as_ref())?;
            let doc2 = load(&second, sig.as_ref())?;
            match equiv(&doc_to_cospan(&doc1)?, &doc_to_cospan(&doc2)?) {
                Some(witness) => {
                    println!("equivalent");
                    for (from, to) in witness {
                        println!("{from} -> {to}");
                    }
                    Ok(0)
                }
                None => {
                    println!("not equivalent");
                    Ok(1)
                }
            }
        }
        Cmd::Eval {
            file,
            sig,
            algebra,
            consts,
            env,
        } => {
            let doc = load(&file, sig.as_ref())?;
            let consts = algebras::parse_assignments(consts.as_deref().unwrap_or(""))?;
            let atg = to_abstract(&doc.graph)?;
            let mut lines = Vec::new();
            match algebra {
                AlgebraKind::Int => {
                    let alg = algebras::int_algebra(&doc.sig, &consts)?;
                    let env = algebras::parse_env::<i64>(env.as_deref().unwrap_or(""))?;
                    let lifted = lift(&atg, &env, &alg).map_err(tg_core::SolveError::from).map_err(CliError::from)?;
                    for (name, node) in report_nodes(&doc) {
                        lines.push(format!(
                            "{name} = {} ({} op applications)",
                            lifted.values[&node], lifted.op_applications
                        ));
                    }
                }
                AlgebraKind::Rat => {
                    let alg = algebras::rat_algebra(
                        &doc.sig,
                        &consts,
                        DEFAULT_TOLERANCE,
                        DEFAULT_MAX_ITERATIONS,
                    )?;
                    let env = algebras::parse_env::<f64>(env.as_deref().unwrap_or(""))?;
                    let lifted = lift(&atg, &env, &alg).map_err(tg_core::SolveError::from).map_err(CliError::from)?;
                    for (name, node) in report_nodes(&doc) {
                        lines.push(format!(
                            "{name} = {} ({} op applications)",
                            lifted.values[&node], lifted.op_applications
                        ));
                    }
                }
            }
            for line in lines {
                println!("{line}");
            }
            Ok(0)
        }
        Cmd::Solve {
            file,
            sig,
            algebra,
            consts,
            env,
            tol,
            max_iter,
        } => {
            let doc = load(&file, sig.as_ref())?;
            let consts = algebras::parse_assignments(consts.as_deref().unwrap_or(""))?;
            let c = to_cyclic(&doc.graph);
            let tol = tol.unwrap_or(DEFAULT_TOLERANCE);
            let max_iter = max_iter.unwrap_or(DEFAULT_MAX_ITERATIONS);
            match algebra {
                AlgebraKind::Int => {
                    let alg = algebras::int_algebra(&doc.sig, &consts)?
                        .with_solver(tg_core::FixpointSolver::new(
                            |_| 0i64,
                            |a, b| a == b,
                            max_iter,
                        ));
                    let env = algebras::parse_env::<i64>(env.as_deref().unwrap_or(""))?;
                    let values = solve_cyclic(&c, &env, &alg)?;
                    for (name, node) in report_nodes(&doc) {
                        println!("{name} = {}", values[&node]);
                    }
                }
                AlgebraKind::Rat => {
                    let alg = algebras::rat_algebra(&doc.sig, &consts, tol, max_iter)?;
                    let env = algebras::parse_env::<f64>(env.as_deref().unwrap_or(""))?;
                    let values = solve_cyclic(&c, &env, &alg)?;
                    for (name, node) in report_nodes(&doc) {
                        println!("{name} = {}", values[&node]);
                    }
                }
            }
            Ok(0)
        }
        Cmd::Unfold {
            file,
            sig,
            node,
            depth,
        } => {
            let doc = load(&file, sig.as_ref())?;
            let c = to_cyclic(&doc.graph);
            let tree = unfold(&c, &node, depth)?;
            println!("{tree}");
            Ok(0)
        }
    }
}

/// The nodes a value-reporting command prints: the declared outputs, or
/// every node when the file declares none.
fn report_nodes(doc: &Doc) -> Vec<(String, String)> {
    match &doc.outputs {
        Some(outs) => outs.clone(),
        None => doc
            .graph
            .all_names()
            .names()
            .map(|n| (n.to_string(), n.to_string()))
            .collect(),
    }
}

/// Parse arguments and run; returns the process exit status.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
