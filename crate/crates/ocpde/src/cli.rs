//! Command implementations behind the `ocpde` binary.
//!
//! Each subcommand is a plain function over parsed arguments so integration
//! tests can drive it without spawning a process. Exit codes are part of
//! the contract:
//!
//! * 0: success, all checks passed
//! * 1: a verification or lab expectation failed
//! * 2: parse or format error (config, expression, dump, catalog)
//! * 3: admissibility check failed at one or more cell centers
//! * 4: refinement budget exhausted before verification passed
//!
//! Anything written to `out` is deterministic given (config, seed); wall
//! clock and other run-dependent chatter goes to `err` only.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, RunConfig};
use crate::dump::{parse_dump, write_dump};
use crate::expr::{parse as parse_expr, Expr, ExprContext, JetSpec};
use crate::lab::catalog::{parse_catalog, run_catalog, DEFAULT_CATALOG};
use crate::nlsc::{lattice_inf_with_density, lattice_sup_with_density, NlscFunction};
use crate::solver::{assemble_generalized_solution, verify_residuals, write_ocrun, SolverError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_ADMISSIBILITY: i32 = 3;
pub const EXIT_REFINEMENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ocpde", version, about = "order-completion workbench for nonlinear PDE systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the seed from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the verification density multiplier.
    #[arg(long)]
    pub verify_factor: Option<usize>,
    /// Override the base sample density.
    #[arg(long)]
    pub density: Option<usize>,
    /// Where report and dumps land; overrides [output] out_dir.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One NLSCF dump per solution component, in component order.
    #[arg(required = true)]
    pub dumps: Vec<PathBuf>,
    /// The config describing the system the dumps claim to solve.
    #[arg(long)]
    pub config: PathBuf,
    /// Band width: residuals must lie in [-tol, 0].
    #[arg(long)]
    pub tol: f64,
    /// Override the verification density multiplier.
    #[arg(long)]
    pub verify_factor: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LabArgs {
    /// Scenario catalog; the shipped catalog runs when omitted.
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Expression text, e.g. "(D[1]u1)^2 - sin(x1)".
    pub expression: String,
    /// Space dimension n.
    #[arg(short = 'n', long, default_value_t = 1)]
    pub dim: usize,
    /// Operator order m.
    #[arg(short = 'm', long, default_value_t = 1)]
    pub order: u32,
    /// Number of solution components K.
    #[arg(short = 'K', long, default_value_t = 1)]
    pub comps: usize,
    /// Parse as a right-hand side: jet variables become errors.
    #[arg(long)]
    pub space_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BaireOp {
    /// Lower Baire operator I (envelope of infima).
    Lower,
    /// Upper Baire operator S (envelope of suprema).
    Upper,
    /// The composition I(S(u)) fixing the normal lower semicontinuous cut.
    Regularize,
}

#[derive(Debug, Args)]
pub struct BaireArgs {
    /// Which envelope to apply.
    #[arg(value_enum)]
    pub op: BaireOp,
    /// NLSCF dump to transform.
    pub dump: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LatticeOp {
    Sup,
    Inf,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// sup or inf.
    #[arg(value_enum)]
    pub op: LatticeOp,
    pub left: PathBuf,
    pub right: PathBuf,
    /// Sample density used when the combined singular set is probed.
    #[arg(long)]
    pub density: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the epsilon schedule and certify order convergence.
    Solve(SolveArgs),
    /// Re-verify dumped approximations on a fresh denser grid.
    Verify(VerifyArgs),
    /// Evaluate a completion-lab scenario catalog.
    Lab(LabArgs),
    /// Parse an expression and print its canonical form.
    Parse(ParseArgs),
    /// Apply a Baire envelope to a dumped function.
    Baire(BaireArgs),
    /// Combine two dumped functions by lattice sup or inf.
    Lattice(LatticeArgs),
}

/// Dispatch. `out` receives the deterministic artifacts, `err` the
/// diagnostics; the return value is the process exit code.
pub fn run(cli: Cli, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32 {
    let code = match cli.command {
        Command::Solve(args) => cmd_solve(&args, out, err),
        Command::Verify(args) => cmd_verify(&args, out, err),
        Command::Lab(args) => cmd_lab(&args, out, err),
        Command::Parse(args) => cmd_parse(&args, out, err),
        Command::Baire(args) => cmd_baire(&args, out, err),
        Command::Lattice(args) => cmd_lattice(&args, out, err),
    };
    match code {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "io error: {e}");
            EXIT_FORMAT
        }
    }
}

type CmdResult = Result<i32, std::io::Error>;

fn load_config(
    path: &Path,
    err: &mut dyn std::io::Write,
) -> Result<Option<RunConfig>, std::io::Error> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "cannot read {}: {e}", path.display())?;
            return Ok(None);
        }
    };
    match parse_config(&text) {
        Ok(cfg) => Ok(Some(cfg)),
        Err(e) => {
            writeln!(err, "{}: {e}", path.display())?;
            Ok(None)
        }
    }
}

pub fn cmd_solve(
    args: &SolveArgs,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> CmdResult {
    let Some(mut cfg) = load_config(&args.config, err)? else {
        return Ok(EXIT_FORMAT);
    };
    if let Some(seed) = args.seed {
        cfg.params.seed = seed;
    }
    if let Some(vf) = args.verify_factor {
        cfg.params.verify_factor = vf;
    }
    if let Some(d) = args.density {
        cfg.params.density = d;
    }
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from));

    let started = std::time::Instant::now();
    let gsol = match assemble_generalized_solution(&cfg.system, &cfg.grid, &cfg.schedule, &cfg.params)
    {
        Ok(g) => g,
        Err(SolverError::Admissibility { points }) => {
            writeln!(err, "admissibility failed at {} cell center(s):", points.len())?;
            for p in &points {
                let coords: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
                writeln!(err, "  ({})", coords.join(", "))?;
            }
            return Ok(EXIT_ADMISSIBILITY);
        }
        Err(SolverError::RefinementExhausted { rounds, violations }) => {
            writeln!(
                err,
                "refinement budget exhausted after {rounds} rounds, {violations} cells still violating"
            )?;
            return Ok(EXIT_REFINEMENT);
        }
        Err(e) => {
            writeln!(err, "solve failed: {e}")?;
            return Ok(EXIT_FAIL);
        }
    };
    writeln!(err, "solve took {:.3}s", started.elapsed().as_secs_f64())?;

    let report = write_ocrun(&gsol, &cfg.params);
    out.write_all(report.as_bytes())?;

    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.ocrun"), &report)?;
        if cfg.write_dumps {
            for (n, v) in gsol.regularized.iter().enumerate() {
                for (j, u) in v.iter().enumerate() {
                    let text = match write_dump(u) {
                        Ok(t) => t,
                        Err(e) => {
                            writeln!(err, "dump failed: {e}")?;
                            return Ok(EXIT_FORMAT);
                        }
                    };
                    fs::write(dir.join(format!("u_eps{}_comp{}.nlscf", n + 1, j + 1)), text)?;
                }
            }
        }
    }

    Ok(if gsol.succeeded() { EXIT_OK } else { EXIT_FAIL })
}

pub fn cmd_verify(
    args: &VerifyArgs,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> CmdResult {
    let Some(mut cfg) = load_config(&args.config, err)? else {
        return Ok(EXIT_FORMAT);
    };
    if let Some(vf) = args.verify_factor {
        cfg.params.verify_factor = vf;
    }
    if !(args.tol > 0.0) {
        writeln!(err, "--tol must be positive")?;
        return Ok(EXIT_FORMAT);
    }
    let k = cfg.system.spec().comps();
    if args.dumps.len() != k {
        writeln!(err, "system has {k} component(s) but {} dump(s) given", args.dumps.len())?;
        return Ok(EXIT_FORMAT);
    }

    let mut u: Vec<NlscFunction> = Vec::with_capacity(k);
    for path in &args.dumps {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                writeln!(err, "cannot read {}: {e}", path.display())?;
                return Ok(EXIT_FORMAT);
            }
        };
        match parse_dump(&text) {
            Ok(f) => u.push(f),
            Err(e) => {
                writeln!(err, "{}: {e}", path.display())?;
                return Ok(EXIT_FORMAT);
            }
        }
    }
    // All dumps must live on one grid over the configured domain; the cell
    // count may differ from the config when the solve refined.
    let grid = u[0].grid().clone();
    if !grid.same_domain(&cfg.grid) || u.iter().any(|f| f.grid() != &grid) {
        writeln!(err, "dump domain does not match the configured domain")?;
        return Ok(EXIT_FORMAT);
    }

    let density = cfg.params.density * cfg.params.verify_factor;
    let (lo, hi, violating) = match verify_residuals(&cfg.system, &grid, &u, args.tol, density) {
        Ok(r) => r,
        Err(e) => {
            writeln!(err, "verification failed to run: {e}")?;
            return Ok(EXIT_FORMAT);
        }
    };
    for j in 0..k {
        writeln!(out, "component {} residual range [{:e}, {:e}]", j + 1, lo[j], hi[j])?;
    }
    if violating.is_empty() {
        writeln!(out, "verified: residuals within [-{:e}, 0] at density {density}", args.tol)?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "violations in {} cell(s): {:?}", violating.len(), violating)?;
        Ok(EXIT_FAIL)
    }
}

pub fn cmd_lab(
    args: &LabArgs,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> CmdResult {
    let text = match &args.catalog {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                writeln!(err, "cannot read {}: {e}", path.display())?;
                return Ok(EXIT_FORMAT);
            }
        },
        None => DEFAULT_CATALOG.to_string(),
    };
    let scenarios = match parse_catalog(&text) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_FORMAT);
        }
    };
    let report = match run_catalog(&scenarios) {
        Ok(r) => r,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_FORMAT);
        }
    };
    out.write_all(report.render().as_bytes())?;
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_FAIL })
}

fn collect_jets(expr: &Expr, acc: &mut Vec<(usize, Vec<u32>)>) {
    match expr {
        Expr::Jet { comp, alpha } => {
            let key = (*comp, alpha.clone());
            if !acc.contains(&key) {
                acc.push(key);
            }
        }
        Expr::Neg(inner) | Expr::Call(_, inner) => collect_jets(inner, acc),
        Expr::Bin(_, a, b) => {
            collect_jets(a, acc);
            collect_jets(b, acc);
        }
        Expr::Num(_) | Expr::Var(_) => {}
    }
}

pub fn cmd_parse(
    args: &ParseArgs,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> CmdResult {
    let spec = JetSpec::new(args.dim, args.comps, args.order);
    let ctx = if args.space_only {
        ExprContext::space_only(&spec)
    } else {
        ExprContext::operator(&spec)
    };
    let expr = match parse_expr(&args.expression, &ctx) {
        Ok(e) => e,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_FORMAT);
        }
    };
    writeln!(out, "canonical: {expr}")?;
    let mut jets = Vec::new();
    collect_jets(&expr, &mut jets);
    jets.sort();
    let mut line = String::from("jet variables:");
    for (comp, alpha) in &jets {
        let var = Expr::Jet {
            comp: *comp,
            alpha: alpha.clone(),
        };
        let _ = write!(line, " {var}");
    }
    if jets.is_empty() {
        line.push_str(" none");
    }
    writeln!(out, "{line}")?;
    Ok(EXIT_OK)
}

fn load_dump(path: &Path, err: &mut dyn std::io::Write) -> Result<Option<NlscFunction>, std::io::Error> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "cannot read {}: {e}", path.display())?;
            return Ok(None);
        }
    };
    match parse_dump(&text) {
        Ok(f) => Ok(Some(f)),
        Err(e) => {
            writeln!(err, "{}: {e}", path.display())?;
            Ok(None)
        }
    }
}

pub fn cmd_baire(
    args: &BaireArgs,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> CmdResult {
    let Some(u) = load_dump(&args.dump, err)? else {
        return Ok(EXIT_FORMAT);
    };
    let result = match args.op {
        BaireOp::Lower => u.baire_lower(),
        BaireOp::Upper => u.baire_upper(),
        BaireOp::Regularize => u.regularize(),
    };
    match write_dump(&result) {
        Ok(text) => {
            out.write_all(text.as_bytes())?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            writeln!(err, "{e}")?;
            Ok(EXIT_FORMAT)
        }
    }
}

pub fn cmd_lattice(
    args: &LatticeArgs,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> CmdResult {
    let Some(a) = load_dump(&args.left, err)? else {
        return Ok(EXIT_FORMAT);
    };
    let Some(b) = load_dump(&args.right, err)? else {
        return Ok(EXIT_FORMAT);
    };
    let density = args.density.unwrap_or(crate::grid::DEFAULT_DENSITY);
    let combined = match args.op {
        LatticeOp::Sup => lattice_sup_with_density(&a, &b, density),
        LatticeOp::Inf => lattice_inf_with_density(&a, &b, density),
    };
    let f = match combined {
        Ok(f) => f,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_FORMAT);
        }
    };
    match write_dump(&f) {
        Ok(text) => {
            out.write_all(text.as_bytes())?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            writeln!(err, "{e}")?;
            Ok(EXIT_FORMAT)
        }
    }
}
