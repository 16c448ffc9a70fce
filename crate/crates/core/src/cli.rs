//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | internal or i/o error |
//! | 2 | usage error, violated precondition, divergent request, unparsable input |
//! | 3 | truncation cutoff overflow |
//! | 4 | verification failed |
//! | 5 | root-sum term cap exceeded |

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::coalgebra::{construct_preimage, verify_preimage, CoalgebraError, GroupElement, DEFAULT_ROOT_CAP};
use crate::format::{
    identity_from_json, identity_to_json, identity_to_latex, parse_complex, to_pretty_json,
    write_atomic, PreimageFile,
};
use crate::numeval::{Composition, EvalConfig, EvalRequest, Evaluator, NumevalError};
use crate::reduction::reduce_li;
use crate::verify::{verify_identity, VerificationPlan, VerifyError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_CUTOFF: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;
pub const EXIT_CAP: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "mplkit", version, about = "Multiple polylogarithm identities: evaluate, reduce, verify, construct")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate Li_{n1,...,nd}(a1,...,ad) by certified truncation.
    Eval {
        /// Comma-separated indices, e.g. 3,1.
        #[arg(long, value_delimiter = ',', required = true)]
        indices: Vec<u32>,
        /// Comma-separated complex arguments such as 0.5 or 0.1-0.2i.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        args: Vec<String>,
        /// Absolute truncation error target.
        #[arg(long, env = "MPLKIT_PREC", default_value_t = 1e-12)]
        prec: f64,
        /// Largest truncation cutoff tried before giving up (exit 3).
        #[arg(long, default_value_t = EvalConfig::default().max_cutoff)]
        max_cutoff: usize,
    },
    /// Emit an identity expressing Li_{k,l}(x,y) via Li_{n-1,1} and Li_n.
    Reduce {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long, value_enum, default_value_t = Emit::Json)]
        emit: Emit,
        /// Verify numerically; exit 4 on failure.
        #[arg(long)]
        verify: bool,
        /// Write the identity here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the verification report (JSON) here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Verify an identity file at seeded random points.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Construct a cobracket preimage of Li_{n1}(a1) x ... x Li_{nd}(ad).
    Surject {
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<u32>,
        #[arg(long, value_enum, default_value_t = Emit::Json)]
        emit: Emit,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Latex,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[arg(long, env = "MPLKIT_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, env = "MPLKIT_POINTS", default_value_t = 20)]
    pub points: usize,
    #[arg(long, env = "MPLKIT_RADIUS", default_value_t = 0.7)]
    pub radius: f64,
    #[arg(long, env = "MPLKIT_TOL", default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, env = "MPLKIT_PREC", default_value_t = 1e-12)]
    pub prec: f64,
}

impl PlanArgs {
    pub fn plan(&self) -> VerificationPlan {
        VerificationPlan {
            seed: self.seed,
            point_count: self.points,
            radius: self.radius,
            tolerance: self.tol,
            allow_complex: true,
            target_error: self.prec,
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl std::fmt::Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PRECONDITION } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(cmd: Command) -> CmdResult {
    match cmd {
        Command::Eval {
            indices,
            args,
            prec,
            max_cutoff,
        } => cmd_eval(indices, &args, prec, max_cutoff),
        Command::Reduce {
            k,
            l,
            emit,
            verify,
            out,
            report,
            plan,
        } => cmd_reduce(k, l, emit, verify, out.as_deref(), report.as_deref(), &plan.plan()),
        Command::Verify {
            file,
            plan,
            report,
            json,
        } => cmd_verify(&file, &plan.plan(), report.as_deref(), json),
        Command::Surject { weights, emit, out } => cmd_surject(&weights, emit, out.as_deref()),
    }
}

fn emit_to(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => write_atomic(p, text).map_err(|e| Failure::new(EXIT_INTERNAL, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn numeval_failure(e: NumevalError) -> Failure {
    let code = match e {
        NumevalError::CutoffOverflow { .. } => EXIT_CUTOFF,
        _ => EXIT_PRECONDITION,
    };
    Failure::new(code, e)
}

fn cmd_eval(indices: Vec<u32>, args: &[String], prec: f64, max_cutoff: usize) -> CmdResult {
    let indices = Composition::new(indices).map_err(numeval_failure)?;
    let args = args
        .iter()
        .map(|a| parse_complex(a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::new(EXIT_PRECONDITION, e))?;
    let req = EvalRequest {
        indices,
        args,
        target_error: prec,
    };
    let evaluator = Evaluator::new(EvalConfig {
        max_cutoff,
        ..EvalConfig::default()
    });
    let r = evaluator.eval_li(&req).map_err(numeval_failure)?;
    // + 0.0 turns a negative zero into a positive one
    println!("value: {:.15}{:+.15}i", r.value.re + 0.0, r.value.im + 0.0);
    println!("cutoff: {}", r.cutoff);
    println!("tail_bound: {:.3e}", r.tail_bound);
    Ok(())
}

fn cmd_reduce(
    k: u32,
    l: u32,
    emit: Emit,
    verify: bool,
    out: Option<&Path>,
    report: Option<&Path>,
    plan: &VerificationPlan,
) -> CmdResult {
    if k == 0 || l == 0 || k + l > 8 || k + l < 3 {
        return Err(Failure::new(
            EXIT_PRECONDITION,
            format!("need k, l >= 1 and 3 <= k + l <= 8, got k = {k}, l = {l}"),
        ));
    }
    let id = reduce_li(k, l).map_err(|e| Failure::new(EXIT_PRECONDITION, e))?;
    let text = match emit {
        Emit::Json => identity_to_json(&id),
        Emit::Latex => identity_to_latex(&id),
        Emit::Text => format!("{id}\n"),
    };
    if verify {
        let rep = verify_identity(&id, plan).map_err(verify_failure)?;
        if let Some(p) = report {
            write_atomic(p, &to_pretty_json(&rep.to_json())).map_err(|e| Failure::new(EXIT_INTERNAL, e))?;
        }
        eprint!("{}", rep.to_table());
        if !rep.pass {
            return Err(Failure::new(
                EXIT_VERIFY_FAILED,
                format!("verification failed: max relative residual {:.3e}", rep.max_relative_residual),
            ));
        }
    }
    emit_to(out, &text)
}

fn verify_failure(e: VerifyError) -> Failure {
    match e {
        VerifyError::Evaluation(_) => Failure::new(EXIT_INTERNAL, e),
        _ => Failure::new(EXIT_PRECONDITION, e),
    }
}

fn cmd_verify(file: &Path, plan: &VerificationPlan, report: Option<&Path>, json: bool) -> CmdResult {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Failure::new(EXIT_PRECONDITION, format!("{}: {e}", file.display())))?;
    let id = identity_from_json(&text)
        .map_err(|e| Failure::new(EXIT_PRECONDITION, format!("{}: {e}", file.display())))?;
    let rep = verify_identity(&id, plan).map_err(verify_failure)?;
    let rep_json = to_pretty_json(&rep.to_json());
    if let Some(p) = report {
        write_atomic(p, &rep_json).map_err(|e| Failure::new(EXIT_INTERNAL, e))?;
    }
    if json {
        print!("{rep_json}");
    } else {
        print!("{}", rep.to_table());
    }
    if rep.pass {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_VERIFY_FAILED,
            format!("verification failed: max relative residual {:.3e}", rep.max_relative_residual),
        ))
    }
}

fn cmd_surject(weights: &[u32], emit: Emit, out: Option<&Path>) -> CmdResult {
    let total: u32 = weights.iter().sum();
    if weights.is_empty() || weights.len() > 3 || weights.iter().any(|&n| n < 2) || total > 8 {
        return Err(Failure::new(
            EXIT_PRECONDITION,
            format!("need 1 to 3 weights, each >= 2, summing to at most 8; got {weights:?}"),
        ));
    }
    let args = GroupElement::generators(weights.len());
    let coalgebra_failure = |e: CoalgebraError| {
        let code = match e {
            CoalgebraError::RootCapExceeded { .. } => EXIT_CAP,
            CoalgebraError::InfeasibleWeights(_) => EXIT_PRECONDITION,
            _ => EXIT_INTERNAL,
        };
        Failure::new(code, e)
    };
    let p = construct_preimage(weights, &args, DEFAULT_ROOT_CAP).map_err(coalgebra_failure)?;
    let rep = verify_preimage(&p, weights, &args).map_err(coalgebra_failure)?;
    let text = match emit {
        Emit::Json => to_pretty_json(&PreimageFile::new(&p, &rep)),
        Emit::Text | Emit::Latex => format!(
            "preimage: {p}\ntarget: {}\ncontracted image: {}\nexact: {}\n",
            rep.target,
            rep.contracted_image,
            rep.exact()
        ),
    };
    if !rep.exact() {
        return Err(Failure::new(
            EXIT_VERIFY_FAILED,
            format!("preimage is not exact, residual {}", rep.residual),
        ));
    }
    emit_to(out, &text)
}
