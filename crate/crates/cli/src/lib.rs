//! The `upb` command line.
//!
//! Exit codes: 0 when the command succeeds and its check passes, 1 when a
//! check fails, 2 on usage errors or malformed input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use upb_core::basis::{check_pairwise_orthogonality, small_system_shortcut, ORTHO_TOL};
use upb_core::catalog::{self, builtins, load_table};
use upb_core::coarse::graining_verdict;
use upb_core::gme::finest;
use upb_core::ppt::{bipartitions, PSD_TOL};
use upb_core::uom::{equivalent, DEFAULT_EQUIVALENCE_BUDGET};
use upb_core::{
    build_rho, check_unextendible, classify_upb_across_grainings, is_ppt, seesaw_maximize, Error, SeesawOptions,
};

pub mod input;
pub mod reproduce;

use input::{load_rho, load_uom_spec, load_upb, load_upb_spec, parse_angles, parse_cut};

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::NotOrthogonal(..) | Error::Consistency(_) => 1,
        Error::TableEntry { source, .. } => error_code(source),
        _ => 2,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: error_code(&e),
            message: e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "upb", version, about = "Unextendible product bases, coarse graining and bound entanglement")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct UpbInput {
    /// UOM JSON (`rows`) or numeric basis JSON (`vectors`).
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Angles α,β,γ,δ in radians; `pi/4` is accepted.
    #[arg(long, value_name = "A,B,C,D")]
    angles: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a product set is unextendible.
    Check {
        #[command(flatten)]
        src: UpbInput,
        #[arg(long, default_value_t = ORTHO_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Classify a four-party set across its coarse grainings, or one cut.
    Coarse {
        #[command(flatten)]
        src: UpbInput,
        #[arg(long, value_name = "PARTITION")]
        cut: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Search for symbol-level moves taking one UOM to another.
    Equiv {
        /// File or builtin name.
        from: String,
        /// File or builtin name.
        to: String,
        #[arg(long, default_value_t = DEFAULT_EQUIVALENCE_BUDGET)]
        budget: usize,
        #[arg(long)]
        json: bool,
    },
    /// List builtins or load an external table.
    Catalog {
        #[arg(long)]
        list: bool,
        #[arg(long, value_name = "PATH")]
        load: Option<PathBuf>,
        /// Re-check every loaded entry for unextendibility.
        #[arg(long, requires = "load")]
        verify: bool,
        /// Print one builtin as UOM JSON.
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Build the normalized projector onto the complement of a set.
    Rho {
        /// File or builtin name.
        #[arg(long, value_name = "SRC")]
        upb: String,
        #[arg(long, value_name = "A,B,C,D")]
        angles: Option<String>,
        /// Give each column its own letter (a, b, c, d) before instantiating.
        #[arg(long)]
        column_letters: bool,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Test positivity of partial transposes across a cut, or all bipartitions.
    Ppt {
        #[arg(long, value_name = "FILE")]
        rho: PathBuf,
        #[arg(long, value_name = "PARTITION")]
        cut: Option<String>,
        #[arg(long, default_value_t = PSD_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Maximal product overlap and geometric measure across a partition.
    Gme {
        #[arg(long, value_name = "FILE")]
        rho: PathBuf,
        /// Defaults to the finest partition.
        #[arg(long, value_name = "PARTITION")]
        cut: Option<String>,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long)]
        json: bool,
    },
    /// Recompute every claim of the suite and compare with expected values.
    Reproduce {
        #[arg(long, required_unless_present = "claim")]
        all: bool,
        /// Run selected claims only (1-10).
        #[arg(long, value_name = "N")]
        claim: Vec<usize>,
        /// External table of size-9 UPBs for the count claim.
        #[arg(long, value_name = "PATH")]
        table: Option<PathBuf>,
        /// Include per-claim runtimes (output is then not reproducible).
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        json: bool,
    },
}

type Outcome = Result<i32, CliError>;

fn emit(out: &mut dyn Write, value: &impl Serialize) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

fn io(e: std::io::Error) -> CliError {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        return CliError {
            code: 0,
            message: String::new(),
        };
    }
    CliError::usage(e.to_string())
}

fn angles_opt(text: Option<&str>) -> Result<Option<upb_core::AngleAssignment>, CliError> {
    text.map(parse_angles).transpose()
}

fn check(src: &UpbInput, tol: f64, json: bool, out: &mut dyn Write) -> Outcome {
    let source = load_upb(src.input.as_deref(), src.builtin.as_deref())?;
    let basis = source.basis(angles_opt(src.angles.as_deref())?.as_ref())?;
    let ortho = check_pairwise_orthogonality(&basis, tol);
    let verdict = ortho.orthogonal.then(|| check_unextendible(&basis, tol));
    let unextendible = verdict.as_ref().is_some_and(|v| v.unextendible);
    if json {
        emit(
            out,
            &json!({
                "name": source.name(),
                "size": basis.len(),
                "layout": basis.layout().dims(),
                "orthogonal": ortho.orthogonal,
                "max_overlap": ortho.max_overlap,
                "unextendible": unextendible,
                "witness": verdict.as_ref().and_then(|v| v.witness.as_ref()),
                "assignment": verdict.as_ref().and_then(|v| v.assignment.as_ref()),
                "below_dimension_bound": small_system_shortcut(&basis).is_some(),
            }),
        )
        .map_err(io)?;
    } else {
        let status = match (ortho.orthogonal, unextendible) {
            (false, _) => format!("not orthogonal (max overlap {:.3e})", ortho.max_overlap),
            (true, true) => "unextendible".to_string(),
            (true, false) => "extendible".to_string(),
        };
        writeln!(out, "{}: {} members in {:?}: {status}", source.name(), basis.len(), basis.layout().dims())
            .map_err(io)?;
    }
    Ok(if unextendible { 0 } else { 1 })
}

fn coarse(src: &UpbInput, cut: Option<&str>, json: bool, out: &mut dyn Write) -> Outcome {
    let source = load_upb(src.input.as_deref(), src.builtin.as_deref())?;
    let basis = source.basis(angles_opt(src.angles.as_deref())?.as_ref())?;
    if let Some(cut) = cut {
        let p = parse_cut(cut, basis.layout())?;
        let v = graining_verdict(&basis, &p, true)?;
        if json {
            emit(out, &v).map_err(io)?;
        } else {
            let word = if v.unextendible { "UPB" } else { "extendible" };
            writeln!(out, "{}: {} at {}", source.name(), word, v.partition).map_err(io)?;
        }
        return Ok(0);
    }
    let report = classify_upb_across_grainings(&basis)?;
    if json {
        emit(out, &report).map_err(io)?;
    } else {
        for g in &report.grainings {
            let word = if g.unextendible { "UPB" } else { "extendible" };
            writeln!(out, "{:<8} {word}", g.partition).map_err(io)?;
        }
        writeln!(
            out,
            "{}: {} three-block and {} two-by-two UPB grainings",
            source.name(),
            report.three_block_count,
            report.two_by_two_count
        )
        .map_err(io)?;
    }
    Ok(0)
}

fn equiv(from: &str, to: &str, budget: usize, json: bool, out: &mut dyn Write) -> Outcome {
    let (a, b) = (load_uom_spec(from)?, load_uom_spec(to)?);
    let steps = equivalent(&a, &b, budget)?;
    if json {
        emit(out, &json!({ "found": steps.is_some(), "steps": steps })).map_err(io)?;
    } else {
        match &steps {
            Some(s) => {
                writeln!(out, "equivalent in {} steps", s.len()).map_err(io)?;
                for step in s {
                    writeln!(out, "  {}", serde_json::to_string(step).expect("serializable")).map_err(io)?;
                }
            }
            None => writeln!(out, "no sequence found within budget {budget}").map_err(io)?,
        }
    }
    Ok(if steps.is_some() { 0 } else { 1 })
}

fn catalog_cmd(
    list: bool,
    load: Option<&Path>,
    verify: bool,
    show: Option<&str>,
    json: bool,
    out: &mut dyn Write,
) -> Outcome {
    let chosen = [list, load.is_some(), show.is_some()].iter().filter(|&&b| b).count();
    if chosen != 1 {
        return Err(CliError::usage("give exactly one of --list, --load <path> or --show <name>"));
    }
    if let Some(name) = show {
        emit(out, &catalog::builtin(name)?.to_doc()).map_err(io)?;
        return Ok(0);
    }
    let entries = match load {
        Some(p) => load_table(p, verify)?,
        None => builtins(),
    };
    if json {
        let rows: Vec<_> = entries
            .iter()
            .map(|e| json!({ "name": e.name, "size": e.size, "parties": e.uom.column_count(), "provenance": e.provenance }))
            .collect();
        emit(out, &rows).map_err(io)?;
    } else {
        for e in &entries {
            writeln!(out, "{:<14} size {:<2} {} parties", e.name, e.size, e.uom.column_count()).map_err(io)?;
        }
        if verify {
            writeln!(out, "{} entries verified unextendible", entries.len()).map_err(io)?;
        }
    }
    Ok(0)
}

fn rho_cmd(upb: &str, angles: Option<&str>, column_letters: bool, out_path: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let mut source = load_upb_spec(upb)?;
    if column_letters {
        match &mut source {
            input::UpbSource::Symbolic(e) => e.uom = e.uom.with_column_letters()?,
            input::UpbSource::Numeric { .. } => {
                return Err(CliError::usage("--column-letters applies to symbolic inputs only"))
            }
        }
    }
    let basis = source.basis(angles_opt(angles)?.as_ref())?;
    let rho = build_rho(&basis)?;
    let text = rho.to_json();
    match out_path {
        Some(p) => {
            std::fs::write(p, format!("{text}\n")).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            writeln!(
                out,
                "wrote {} (dim {}, rank {})",
                p.display(),
                basis.layout().total_dim(),
                rho.rank(upb_core::linalg::RANK_TOL)?
            )
            .map_err(io)?;
        }
        None => writeln!(out, "{text}").map_err(io)?,
    }
    Ok(0)
}

fn ppt_cmd(rho: &Path, cut: Option<&str>, tol: f64, json: bool, out: &mut dyn Write) -> Outcome {
    let rho = load_rho(rho)?;
    let cuts = match cut {
        Some(c) => vec![parse_cut(c, rho.layout())?],
        None => bipartitions(rho.layout().parties())?,
    };
    let reports = cuts.iter().map(|c| is_ppt(&rho, c, tol)).collect::<upb_core::Result<Vec<_>>>()?;
    if json {
        emit(out, &reports).map_err(io)?;
    } else {
        for r in &reports {
            let word = if r.ppt { "PPT" } else { "NPT" };
            writeln!(out, "{:<8} {word} (min eigenvalue {:.3e})", r.partition, r.min_eigenvalue).map_err(io)?;
        }
    }
    Ok(if reports.iter().all(|r| r.ppt) { 0 } else { 1 })
}

#[derive(Serialize)]
struct GmeRecord {
    partition: String,
    max_overlap: f64,
    #[serde(rename = "G_ebits")]
    g_ebits: f64,
    argmax: upb_core::ProductVector,
    diagnostics: GmeDiagnosticsRecord,
}

#[derive(Serialize)]
struct GmeDiagnosticsRecord {
    restarts_used: usize,
    best_restart: usize,
    converged_iterations: usize,
    monotone: bool,
    seed: u64,
    trace: Vec<f64>,
}

fn gme_cmd(rho: &Path, cut: Option<&str>, opts: SeesawOptions, json: bool, out: &mut dyn Write) -> Outcome {
    let rho = load_rho(rho)?;
    let partition = match cut {
        Some(c) => parse_cut(c, rho.layout())?,
        None => finest(rho.layout()),
    };
    let r = seesaw_maximize(&rho, &partition, &opts)?;
    if json {
        let record = GmeRecord {
            partition: r.partition,
            max_overlap: r.max_overlap,
            g_ebits: r.g_ebits,
            argmax: r.argmax,
            diagnostics: GmeDiagnosticsRecord {
                restarts_used: r.restarts_used,
                best_restart: r.best_restart,
                converged_iterations: r.converged_iterations,
                monotone: r.monotone,
                seed: opts.seed,
                trace: r.trace,
            },
        };
        emit(out, &record).map_err(io)?;
    } else {
        writeln!(
            out,
            "{}: max overlap {:.10}, G = {:.6} ebits ({} restarts, best #{})",
            r.partition, r.max_overlap, r.g_ebits, r.restarts_used, r.best_restart
        )
        .map_err(io)?;
    }
    Ok(0)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Check { src, tol, json } => check(&src, tol, json, out),
        Command::Coarse { src, cut, json } => coarse(&src, cut.as_deref(), json, out),
        Command::Equiv { from, to, budget, json } => equiv(&from, &to, budget, json, out),
        Command::Catalog { list, load, verify, show, json } => {
            catalog_cmd(list, load.as_deref(), verify, show.as_deref(), json, out)
        }
        Command::Rho { upb, angles, column_letters, out: path } => {
            rho_cmd(&upb, angles.as_deref(), column_letters, path.as_deref(), out)
        }
        Command::Ppt { rho, cut, tol, json } => ppt_cmd(&rho, cut.as_deref(), tol, json, out),
        Command::Gme { rho, cut, restarts, seed, tol, max_iters, json } => {
            let opts = SeesawOptions { restarts, max_iters, tol, seed };
            gme_cmd(&rho, cut.as_deref(), opts, json, out)
        }
        Command::Reproduce { all, claim, table, timings, json } => {
            let ids: Vec<usize> = if all { (1..=reproduce::CLAIM_COUNT).collect() } else { claim };
            let report = reproduce::run_claims(&ids, table.as_deref())?;
            if json {
                emit(out, &report.to_json(timings)).map_err(io)?;
            } else {
                report.write_text(out, timings).map_err(io)?;
            }
            Ok(if report.all_pass() { 0 } else { 1 })
        }
    }
}

/// Runs the CLI on `argv` (program name first), writing documents to `out`
/// and diagnostics to `err`.
pub fn run_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            if !e.message.is_empty() {
                let _ = writeln!(err, "error: {}", e.message);
            }
            e.code
        }
    }
}

pub fn run(argv: &[String]) -> i32 {
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
