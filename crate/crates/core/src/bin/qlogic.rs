use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use qlogic::contexts::{context_from_commuting, Context, ContextError, ContextPoset, PosetOptions, DEFAULT_CAP};
use qlogic::daseinise::{
    daseinise_proj_inner, daseinise_proj_outer, daseinise_sa_inner, daseinise_sa_outer, inner_atoms,
    inner_values, outer_atoms, outer_values,
};
use qlogic::dynamics::{transform_truth, DynamicsError, StarHom};
use qlogic::io::{
    parse_delta, read_hermitian, read_json, read_matrix, read_poset, read_projection, read_state,
    read_subobject, GeneratorJson, IoError, MatrixJson, PosetDump, SubobjectJson,
};
use qlogic::linalg::{HermitianOp, Mat};
use qlogic::logic::{LogicError, Subobject, Variant};
use qlogic::states::truth_sieve;
use qlogic::suite::run_suite;
use qlogic::tol::{ToleranceError, Tolerances, TOLERANCE_ENV};

#[derive(Parser)]
#[command(name = "qlogic", version, about = "Topos-style quantum logic over matrix algebras")]
struct Cli {
    /// Emit JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Context posets.
    #[command(subcommand)]
    Ctx(CtxCommand),
    /// Outer and inner daseinisation at a context.
    Das(DasArgs),
    /// Elementary proposition [a ∈ Δ] as a subobject.
    Prop(PropArgs),
    /// Heyting operations on stored subobjects.
    Heyting(HeytingArgs),
    /// Truth value of [a ∈ Δ] in a state.
    Truth(TruthArgs),
    /// Truth values transformed by an automorphism.
    Dyn(DynArgs),
    /// Seeded property suite.
    Check(CheckArgs),
}

#[derive(Subcommand)]
enum CtxCommand {
    /// Build a poset from generator files.
    Build(BuildArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Generator files: a hermitian matrix, or {"ops": [...]} / {"atoms": [...]}.
    #[arg(long = "gen", num_args = 1.., required = true)]
    gens: Vec<PathBuf>,
    /// Add every coarsening of every generator.
    #[arg(long)]
    down_close: bool,
    /// Leave out the trivial context.
    #[arg(long)]
    drop_bottom: bool,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Args)]
struct PosetSource {
    /// Poset file: a generator specification or a `ctx build --json` dump.
    #[arg(long, conflicts_with = "gens")]
    poset: Option<PathBuf>,
    /// Extra generator files; the poset is the down-closure of these and the
    /// operator's own context.
    #[arg(long = "gen", num_args = 1..)]
    gens: Vec<PathBuf>,
}

#[derive(Args)]
struct DasArgs {
    /// Hermitian operator file.
    #[arg(long, conflicts_with = "proj", required_unless_present = "proj")]
    op: Option<PathBuf>,
    /// Projection file.
    #[arg(long)]
    proj: Option<PathBuf>,
    /// Context as a generator file.
    #[arg(long)]
    context: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Contravariant,
    Covariant,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Contravariant => Variant::Contravariant,
            VariantArg::Covariant => Variant::Covariant,
        }
    }
}

#[derive(Args)]
struct PropArgs {
    #[arg(long)]
    op: PathBuf,
    /// Interval literal such as "(0.5,1.5)", BorelSet JSON, or a file.
    #[arg(long, allow_hyphen_values = true)]
    delta: String,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[command(flatten)]
    poset: PosetSource,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeytingOp {
    Meet,
    Join,
    Neg,
    Impl,
}

#[derive(Args)]
struct HeytingArgs {
    #[arg(value_enum)]
    op: HeytingOp,
    #[arg(long)]
    poset: PathBuf,
    /// First subobject file.
    #[arg(long)]
    a: PathBuf,
    /// Second subobject file (not used by `neg`).
    #[arg(long)]
    b: Option<PathBuf>,
    /// Replace each input by the least closed family containing it.
    #[arg(long)]
    close: bool,
}

#[derive(Args)]
struct TruthArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    op: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    delta: String,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    #[command(flatten)]
    poset: PosetSource,
}

#[derive(Args)]
struct DynArgs {
    /// Unitary matrix file; h(a) = u a u†.
    #[arg(long)]
    unitary: PathBuf,
    #[arg(long)]
    op: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    delta: String,
    #[arg(long)]
    state: PathBuf,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[command(flatten)]
    poset: PosetSource,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Tolerance(#[from] ToleranceError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "input",
            CliError::Context(_) => "context",
            CliError::Logic(_) => "logic",
            CliError::Dynamics(_) => "dynamics",
            CliError::Tolerance(_) => "tolerance",
            CliError::Usage(_) => "usage",
        }
    }
}

/// What a subcommand produced: a JSON value and the table rendering of it.
struct Output {
    json: serde_json::Value,
    table: String,
    failed: bool,
}

impl Output {
    fn new(value: impl Serialize, table: String) -> Output {
        Output {
            json: serde_json::to_value(value).expect("serialisable output"),
            table,
            failed: false,
        }
    }
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = vec![line(header.to_vec())];
    for r in rows {
        out.push(line(r.iter().map(String::as_str).collect()));
    }
    out.join("\n")
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "G".into())
}

/// A generator file: a bare hermitian matrix or a generator object. The
/// label defaults to the file stem.
fn load_generator(path: &Path) -> Result<Context, CliError> {
    let value: serde_json::Value = read_json(path)?;
    let ctx = if value.get("rows").is_some() {
        let a = read_hermitian(path)?;
        context_from_commuting(&[a])?
    } else {
        let generator: GeneratorJson = serde_json::from_value(value).map_err(|source| IoError::Json {
            path: path.display().to_string(),
            source,
        })?;
        let has_label = generator.label.is_some();
        let ctx = generator.to_context()?;
        if has_label {
            return Ok(ctx);
        }
        ctx
    };
    Ok(ctx.with_label(stem(path)))
}

fn operator_context(path: &Path, a: &HermitianOp) -> Result<Context, CliError> {
    Ok(context_from_commuting(std::slice::from_ref(a))?.with_label(stem(path)))
}

fn resolve_poset(src: &PosetSource, first: Vec<Context>, dim: usize) -> Result<ContextPoset, CliError> {
    if let Some(path) = &src.poset {
        let poset = read_poset(path)?;
        if poset.dim() != dim {
            return Err(CliError::Usage(format!(
                "poset has dimension {} but the operator has dimension {dim}",
                poset.dim()
            )));
        }
        return Ok(poset);
    }
    let mut gens = first;
    for g in &src.gens {
        gens.push(load_generator(g)?);
    }
    Ok(ContextPoset::build(dim, gens, PosetOptions::default())?)
}

fn matrix_rows(m: &Mat) -> String {
    let fmt = |z: num_complex::Complex64| {
        if z.im.abs() < 1e-12 {
            format!("{:.4}", z.re)
        } else {
            format!("{:.4}{:+.4}i", z.re, z.im)
        }
    };
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| fmt(m[(i, j)])).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("; ")
}

fn cmd_ctx_build(args: &BuildArgs) -> Result<Output, CliError> {
    let gens = args.gens.iter().map(|p| load_generator(p)).collect::<Result<Vec<_>, _>>()?;
    let dim = gens[0].dim();
    let opts = PosetOptions {
        down_close: args.down_close,
        include_bottom: !args.drop_bottom,
        cap: args.cap,
    };
    let poset = ContextPoset::build(dim, gens, opts)?;
    let dump = PosetDump::from_poset(&poset);
    let rows: Vec<Vec<String>> = dump
        .contexts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let ranks: Vec<String> = poset.context(i).atoms().iter().map(|q| q.rank().to_string()).collect();
            vec![c.label.clone(), c.atoms.len().to_string(), ranks.join(","), c.below.join(" ")]
        })
        .collect();
    let mut text = table(&["context", "atoms", "ranks", "below"], &rows);
    text.push_str(&format!(
        "\n{} contexts, down-closed: {}",
        poset.len(),
        poset.is_down_closed()
    ));
    Ok(Output::new(dump, text))
}

fn cmd_das(args: &DasArgs) -> Result<Output, CliError> {
    let c = load_generator(&args.context)?;
    if let Some(path) = &args.proj {
        let p = read_projection(path)?;
        let (o, i) = (daseinise_proj_outer(&p, &c), daseinise_proj_inner(&p, &c));
        let value = json!({
            "context": c.label(),
            "outer": {"atoms": outer_atoms(&p, &c), "matrix": MatrixJson::from_matrix(o.matrix())},
            "inner": {"atoms": inner_atoms(&p, &c), "matrix": MatrixJson::from_matrix(i.matrix())},
        });
        let rows = vec![
            vec!["outer".into(), outer_atoms(&p, &c).to_string(), matrix_rows(o.matrix())],
            vec!["inner".into(), inner_atoms(&p, &c).to_string(), matrix_rows(i.matrix())],
        ];
        return Ok(Output::new(value, table(&["", "atoms", "matrix"], &rows)));
    }
    let path = args.op.as_ref().expect("clap requires --op or --proj");
    let a = read_hermitian(path)?;
    let spec = a.spectrum();
    let (ov, iv) = (outer_values(&spec, &c), inner_values(&spec, &c));
    let (o, i) = (daseinise_sa_outer(&a, &c), daseinise_sa_inner(&a, &c));
    let value = json!({
        "context": c.label(),
        "spectrum": spec.values(),
        "outer": {"values": ov, "matrix": MatrixJson::from_matrix(o.matrix())},
        "inner": {"values": iv, "matrix": MatrixJson::from_matrix(i.matrix())},
    });
    let rows: Vec<Vec<String>> = (0..c.len())
        .map(|k| {
            vec![
                k.to_string(),
                c.atom(k).rank().to_string(),
                format!("{:.6}", iv[k]),
                format!("{:.6}", ov[k]),
            ]
        })
        .collect();
    Ok(Output::new(value, table(&["atom", "rank", "inner", "outer"], &rows)))
}

fn subobject_output(s: &Subobject<'_>) -> Output {
    let poset = s.poset();
    let rows: Vec<Vec<String>> = (0..poset.len())
        .map(|c| {
            vec![
                poset.label(c).to_string(),
                s.at(c).to_string(),
                s.projection_at(c).rank().to_string(),
            ]
        })
        .collect();
    let text = format!("variant: {}\n{}", s.variant(), table(&["context", "atoms", "rank"], &rows));
    Output::new(SubobjectJson::from_subobject(s), text)
}

fn cmd_prop(args: &PropArgs) -> Result<Output, CliError> {
    let a = read_hermitian(&args.op)?;
    let delta = parse_delta(&args.delta)?;
    let poset = resolve_poset(&args.poset, vec![operator_context(&args.op, &a)?], a.dim())?;
    let s = Subobject::elementary(&a, &delta, &poset, args.variant.into());
    Ok(subobject_output(&s))
}

fn cmd_heyting(args: &HeytingArgs) -> Result<Output, CliError> {
    let poset = read_poset(&args.poset)?;
    let a = read_subobject(&args.a, &poset, args.close)?;
    let second = || -> Result<Subobject<'_>, CliError> {
        let path = args
            .b
            .as_ref()
            .ok_or_else(|| CliError::Usage("this operation needs --b".into()))?;
        Ok(read_subobject(path, &poset, args.close)?)
    };
    let result = match args.op {
        HeytingOp::Meet => a.meet(&second()?)?,
        HeytingOp::Join => a.join(&second()?)?,
        HeytingOp::Impl => a.implies(&second()?)?,
        HeytingOp::Neg => a.neg()?,
    };
    Ok(subobject_output(&result))
}

fn sieve_table(rows: &[(&str, Vec<String>)]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(k, v)| vec![k.to_string(), format!("{{{}}}", v.join(", "))])
        .collect();
    table(&["", "contexts"], &rows)
}

fn cmd_truth(args: &TruthArgs) -> Result<Output, CliError> {
    let psi = read_state(&args.state)?;
    let a = read_hermitian(&args.op)?;
    if psi.dim() != a.dim() {
        return Err(CliError::Usage(format!(
            "state has dimension {} but the operator has dimension {}",
            psi.dim(),
            a.dim()
        )));
    }
    let delta = parse_delta(&args.delta)?;
    let variant: Variant = args.variant.into();
    let poset = resolve_poset(&args.poset, vec![operator_context(&args.op, &a)?], a.dim())?;
    let s = Subobject::elementary(&a, &delta, &poset, variant);
    let sieve = truth_sieve(&psi, &s, args.threshold);
    let labels = sieve.labels(&poset);
    let value = json!({
        "variant": variant,
        "delta": delta.to_string(),
        "threshold": args.threshold,
        "contexts": poset.labels(),
        "sieve": labels,
    });
    let text = sieve_table(&[("poset", poset.labels().to_vec()), ("sieve", labels)]);
    Ok(Output::new(value, text))
}

/// Close the generators under `ĥ`, then take all coarsenings.
fn closed_poset(h: &StarHom, gens: Vec<Context>, dim: usize) -> Result<ContextPoset, CliError> {
    const MAX_ORBIT: usize = 64;
    let mut all = gens;
    let mut k = 0;
    while k < all.len() {
        let img = h.image_context(&all[k]);
        if !all.iter().any(|c| c.approx_eq(&img)) {
            if all.len() >= MAX_ORBIT {
                return Err(DynamicsError::PosetNotClosed(all[k].label().unwrap_or("?").to_string()).into());
            }
            let label = format!("h({})", all[k].label().unwrap_or("?"));
            all.push(img.with_label(label));
        }
        k += 1;
    }
    Ok(ContextPoset::build(dim, all, PosetOptions::default())?)
}

fn cmd_dyn(args: &DynArgs) -> Result<Output, CliError> {
    let u = read_matrix(&args.unitary)?;
    let h = StarHom::automorphism(u)?;
    let a = read_hermitian(&args.op)?;
    let psi = read_state(&args.state)?;
    if h.source_dim() != a.dim() || psi.dim() != a.dim() {
        return Err(CliError::Usage("unitary, operator and state must have the same dimension".into()));
    }
    let delta = parse_delta(&args.delta)?;
    let variant: Variant = args.variant.into();
    let poset = match &args.poset.poset {
        Some(_) => resolve_poset(&args.poset, Vec::new(), a.dim())?,
        None => {
            let mut gens = vec![operator_context(&args.op, &a)?];
            for g in &args.poset.gens {
                gens.push(load_generator(g)?);
            }
            closed_poset(&h, gens, a.dim())?
        }
    };
    let t = transform_truth(&h, &psi, &a, &delta, &poset, variant)?;
    let (src, tgt) = (t.sieve_source.labels(&poset), t.sieve_target.labels(&poset));
    let value = json!({
        "variant": variant,
        "delta": delta.to_string(),
        "contexts": poset.labels(),
        "pulled_back": src,
        "transformed": tgt,
        "equivalent": t.equivalent,
    });
    let mut text = sieve_table(&[
        ("poset", poset.labels().to_vec()),
        ("pulled back", src),
        ("transformed", tgt),
    ]);
    text.push_str(&format!("\nequivalent: {}", t.equivalent));
    let mut out = Output::new(value, text);
    out.failed = !t.equivalent;
    Ok(out)
}

fn cmd_check(args: &CheckArgs) -> Result<Output, CliError> {
    let report = run_suite(args.seed, args.trials);
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.to_string(),
                c.cases.to_string(),
                c.failures.to_string(),
                c.witnesses.first().cloned().unwrap_or_default(),
            ]
        })
        .collect();
    let mut text = table(&["check", "cases", "failures", "first witness"], &rows);
    text.push_str(&format!(
        "\nseed {}, trials {}: {}",
        report.seed,
        report.trials,
        if report.passed() { "all passed" } else { "FAILED" }
    ));
    let failed = !report.passed();
    let mut out = Output::new(report, text);
    out.failed = failed;
    Ok(out)
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    // A malformed override is a validation error here rather than a warning.
    if let Ok(v) = std::env::var(TOLERANCE_ENV) {
        Tolerances::parse(&v)?;
    }
    match &cli.command {
        Command::Ctx(CtxCommand::Build(a)) => cmd_ctx_build(a),
        Command::Das(a) => cmd_das(a),
        Command::Prop(a) => cmd_prop(a),
        Command::Heyting(a) => cmd_heyting(a),
        Command::Truth(a) => cmd_truth(a),
        Command::Dyn(a) => cmd_dyn(a),
        Command::Check(a) => cmd_check(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = if cli.json {
                serde_json::to_string_pretty(&out.json).expect("serialisable")
            } else {
                out.table
            };
            // A closed pipe (e.g. `| head`) is not an error worth a panic.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if out.failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            if cli.json {
                let body = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
                eprintln!("{}", serde_json::to_string_pretty(&body).expect("serialisable"));
            } else {
                eprintln!("error ({}): {e}", e.kind());
            }
            ExitCode::from(1)
        }
    }
}
