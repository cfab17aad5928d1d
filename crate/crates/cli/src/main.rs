use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use mukai_core::census::{run_census, CensusBounds, CensusSummary};
use mukai_core::existence::{exists, Case, ExistenceVerdict};
use mukai_core::io::{
    analysis, canonical_to_json, parse_class, parse_nodal_cycles, parse_trace, parse_vector,
    raw_rank_and_s, verdict_to_json,
};
use mukai_core::moves::replay;
use mukai_core::oracle::{oracle_check, OracleOptions};
use mukai_core::reduction::reduce;
use mukai_core::{Error, ReductionConfig, SurfaceContext};

const EXIT_UNDECIDED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mukai",
    version,
    about = "Mukai vectors on Enriques surfaces: reduction, existence, census"
)]
struct Cli {
    /// Sup-norm radius for the bounded searches inside the reduction.
    #[arg(long, global = true, default_value_t = mukai_core::search::DEFAULT_RADIUS)]
    search_radius: u32,
    /// Maximum number of reduction rounds.
    #[arg(long, global = true, default_value_t = mukai_core::reduction::DEFAULT_STEP_CAP)]
    step_cap: usize,
    /// Worker threads for census and oracle (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print r, s, ℓ, ⟨v²⟩, primitivity and the parity class of c1.
    Analyze(VectorArgs),
    /// Reduce to the canonical rank-2 (or rank-1) form with a move trace.
    Reduce(VectorArgs),
    /// Decide non-emptiness of the moduli space for a generic polarization.
    Exists {
        #[command(flatten)]
        vector: VectorArgs,
        #[command(flatten)]
        surface: SurfaceArgs,
    },
    /// Stream verdicts and canonical forms for every vector in a box.
    Census {
        #[command(flatten)]
        bounds: BoundsArgs,
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Print only counts by (ℓ, sign of ⟨v²⟩, case).
        #[arg(long)]
        summary: bool,
    },
    /// Replay a move trace, re-checking every precondition.
    Verify {
        /// Trace JSON file, or `-` for stdin.
        trace: String,
    },
    /// Cross-check the library against naive re-implementations over a box.
    Oracle {
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Use a deliberately wrong Gram matrix; violations are expected.
        #[arg(long)]
        perturb_gram: bool,
        /// How many violations to list.
        #[arg(long, default_value_t = 20)]
        show: usize,
    },
}

#[derive(Args)]
struct VectorArgs {
    /// `[r; c1; s; kappa]` or `{"r":…,"c1":[…],"s":…}`, a file holding one, or `-` for stdin.
    vector: String,
    /// Torsion bit of c1, overriding the input.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    kappa: Option<u8>,
}

#[derive(Args)]
struct SurfaceArgs {
    /// The surface is nodal.
    #[arg(long)]
    nodal: bool,
    /// Polarization as 10 coordinates (default σ + f).
    #[arg(long, num_args = 10, allow_negative_numbers = true, value_name = "INT")]
    ample: Option<Vec<i64>>,
    /// JSON list of nodal cycles; implies --nodal.
    #[arg(long, value_name = "FILE")]
    nodal_cycles: Option<PathBuf>,
    /// JSON context `{"nodal":…,"ample":[…],"nodal_cycles":[…]}`; flags override it.
    #[arg(long, value_name = "FILE")]
    context: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct BoundsArgs {
    #[arg(long, default_value_t = 4, allow_negative_numbers = true)]
    r_max: i64,
    #[arg(long, default_value_t = 4, allow_negative_numbers = true)]
    s_max: i64,
    /// Bound on every coordinate of c1.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    coeff_bound: i64,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn input_error(message: String) -> Failure {
    Failure { code: 1, message }
}

fn read_source(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        return Ok(text);
    }
    let path = Path::new(arg);
    if path.is_file() {
        return std::fs::read_to_string(path).map_err(|e| input_error(format!("{arg}: {e}")));
    }
    Ok(arg.to_string())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn emit(out: &mut impl Write, value: &Value) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)
}

fn surface(args: &SurfaceArgs) -> Result<SurfaceContext, Failure> {
    let mut ctx = SurfaceContext::unnodal();
    if let Some(path) = &args.context {
        let v: Value = serde_json::from_str(&read_file(path)?)
            .map_err(|e| input_error(format!("context JSON: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| input_error("context must be a JSON object".into()))?;
        for key in obj.keys() {
            if !["nodal", "ample", "nodal_cycles"].contains(&key.as_str()) {
                return Err(input_error(format!("unknown context field {key:?}")));
            }
        }
        if let Some(n) = obj.get("nodal") {
            ctx.nodal = n
                .as_bool()
                .ok_or_else(|| input_error("\"nodal\" must be a boolean".into()))?;
        }
        if let Some(a) = obj.get("ample") {
            let coords: Vec<i64> = serde_json::from_value(a.clone())
                .map_err(|e| input_error(format!("\"ample\": {e}")))?;
            ctx.ample = parse_class(&coords)?;
        }
        if let Some(c) = obj.get("nodal_cycles") {
            ctx.nodal_cycles = parse_nodal_cycles(&c.to_string())?;
            ctx.nodal = true;
        }
    }
    if let Some(a) = &args.ample {
        ctx.ample = parse_class(a)?;
    }
    if let Some(path) = &args.nodal_cycles {
        ctx.nodal_cycles = parse_nodal_cycles(&read_file(path)?)?;
        ctx.nodal = true;
    }
    ctx.nodal |= args.nodal;
    Ok(ctx)
}

fn kappa_flag(k: Option<u8>) -> Option<bool> {
    k.map(|k| k == 1)
}

fn cmd_analyze(args: &VectorArgs, out: &mut impl Write) -> Outcome {
    let parsed = parse_vector(&read_source(&args.vector)?, kappa_flag(args.kappa))?;
    emit(out, &analysis(&parsed.vector)?)?;
    Ok(0)
}

fn cmd_reduce(args: &VectorArgs, cfg: &ReductionConfig, out: &mut impl Write) -> Outcome {
    let parsed = parse_vector(&read_source(&args.vector)?, kappa_flag(args.kappa))?;
    let form = reduce(&parsed.vector, cfg)?;
    form.verify()?;
    emit(out, &canonical_to_json(&form))?;
    Ok(0)
}

fn cmd_exists(args: &VectorArgs, surf: &SurfaceArgs, out: &mut impl Write) -> Outcome {
    let text = read_source(&args.vector)?;
    let mut ctx = surface(surf)?;
    let parsed = match parse_vector(&text, kappa_flag(args.kappa)) {
        Ok(p) => p,
        Err(Error::Parity { r, s }) => {
            emit(
                out,
                &verdict_to_json(&ExistenceVerdict::parity_violation(r, s)),
            )?;
            return Ok(1);
        }
        Err(e) => {
            // A malformed vector whose (r, s) can still be read is reported
            // as a parity problem when that is what is wrong with it.
            if let Some((r, s)) = raw_rank_and_s(&text) {
                if (r - s).rem_euclid(2) != 0 {
                    emit(
                        out,
                        &verdict_to_json(&ExistenceVerdict::parity_violation(r, s)),
                    )?;
                    return Ok(1);
                }
            }
            return Err(e.into());
        }
    };
    ctx.kappa_defaulted = !parsed.kappa_given;
    let verdict = exists(&parsed.vector, &ctx)?;
    emit(out, &verdict_to_json(&verdict))?;
    Ok(if verdict.matched_case == Case::N4Fail {
        EXIT_UNDECIDED
    } else {
        0
    })
}

fn cmd_census(
    bounds: &BoundsArgs,
    surf: &SurfaceArgs,
    summary: bool,
    cfg: &ReductionConfig,
    out: &mut impl Write,
) -> Outcome {
    let b = CensusBounds::new(bounds.r_max, bounds.s_max, bounds.coeff_bound)?;
    let ctx = surface(surf)?;
    let mut counts = CensusSummary::default();
    run_census(&b, &ctx, cfg, |row| {
        if summary {
            counts.add(row);
        } else {
            emit(out, &row.to_json()).map_err(|e| Error::Input(e.to_string()))?;
        }
        Ok(())
    })?;
    if summary {
        emit(out, &counts.to_json())?;
    }
    Ok(0)
}

fn cmd_verify(trace: &str, out: &mut impl Write) -> Outcome {
    let t = parse_trace(&read_source(trace)?)?;
    match replay(&t) {
        Ok(v) => {
            emit(
                out,
                &json!({"ok": true, "steps": t.steps.len(), "final": mukai_core::io::vector_to_json(&v)}),
            )?;
            Ok(0)
        }
        Err(Error::Trace { index, reason }) => {
            emit(out, &json!({"ok": false, "step": index, "reason": reason}))?;
            Ok(1)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_oracle(
    bounds: &BoundsArgs,
    perturb: bool,
    show: usize,
    cfg: &ReductionConfig,
    out: &mut impl Write,
) -> Outcome {
    let opts = OracleOptions {
        bounds: CensusBounds::new(bounds.r_max, bounds.s_max, bounds.coeff_bound)?,
        perturb_gram: perturb,
        max_examples: show,
    };
    let report = oracle_check(&opts, cfg)?;
    emit(
        out,
        &serde_json::to_value(&report).expect("report serializes"),
    )?;
    Ok(if report.violations == 0 { 0 } else { 1 })
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| input_error(format!("--jobs: {e}")))?;
    }
    let cfg = ReductionConfig {
        search_radius: cli.search_radius,
        step_cap: cli.step_cap,
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match &cli.command {
        Command::Analyze(v) => cmd_analyze(v, &mut out),
        Command::Reduce(v) => cmd_reduce(v, &cfg, &mut out),
        Command::Exists { vector, surface } => cmd_exists(vector, surface, &mut out),
        Command::Census {
            bounds,
            surface,
            summary,
        } => cmd_census(bounds, surface, *summary, &cfg, &mut out),
        Command::Verify { trace } => cmd_verify(trace, &mut out),
        Command::Oracle {
            bounds,
            perturb_gram,
            show,
        } => cmd_oracle(bounds, *perturb_gram, *show, &cfg, &mut out),
    }?;
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    // Usage errors are input errors here; clap's own code 2 means "bound
    // exceeded" in this tool.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("mukai: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
