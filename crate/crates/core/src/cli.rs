//! Command-line front end. `run` never touches the process streams, so it
//! can be driven from tests.

use std::fmt::Write as _;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::abgroup::FgAbGroup;
use crate::cyclecx::{
    chain_document, check_square_zero, check_square_zero_random, chow, differential,
    parse_plane_symbol, pushforward, unramified, ChainValue, ChowMode, CycleChain,
};
use crate::cyclemod::{
    check_premodule_coherences, random_ratfunc, report_passed, CycleModuleInstance,
};
use crate::gfield::field_of_order;
use crate::milnor::{Coefficients, FieldRef, MilnorElement, Symbol};
use crate::parse::{parse_field_ref, parse_place, parse_symbol};
use crate::schememod::{load_abstract, PointId, SchemeDescription};
use crate::spectra::{assemble_coniveau, coniveau_filtration_report, Realization};

const DEFAULT_SUPPORT_BOUND: usize = 2;

#[derive(Parser, Debug)]
#[command(
    name = "gersten",
    version,
    about = "Cycle complexes with coefficients in Milnor K-theory over finite fields"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normal form of a symbol.
    Symbol(SymbolArgs),
    /// Residue of a symbol at a place.
    Residue(ResidueArgs),
    /// Differential of a symbol at the generic point of a scheme.
    Divisor(DivisorArgs),
    /// Chow group with coefficients.
    Chow(ChowArgs),
    /// Unramified cohomology of a proper scheme.
    Unramified(UnramifiedArgs),
    /// Randomized cycle premodule coherence checks.
    Axioms(AxiomsArgs),
    /// Check that the differential squares to zero on a surface.
    SquareZero(SquareZeroArgs),
    /// Pages of the coniveau spectral sequence.
    Ss(SsArgs),
    /// Weil reciprocity for symbols of degree 2 over F_q(t).
    Reciprocity(ReciprocityArgs),
}

#[derive(Args, Debug)]
struct SchemeArgs {
    /// point, A1, P1, line_config or line_config_local.
    #[arg(long)]
    scheme: Option<String>,
    /// Order of the base field.
    #[arg(long)]
    q: Option<u64>,
    /// Linear forms in x, y, z for line configurations.
    #[arg(long, value_delimiter = ',')]
    lines: Vec<String>,
    /// Degree of the residue field of a point.
    #[arg(long)]
    point_degree: Option<usize>,
    /// Places removed from A1.
    #[arg(long, value_delimiter = ',')]
    remove: Vec<String>,
    /// Load a scheme document instead.
    #[arg(long)]
    load: Option<String>,
}

#[derive(Args, Debug)]
struct ModuleArg {
    /// km, km/L for Milnor K-theory mod L, or km-flipped (negated
    /// residues, which the checks should reject).
    #[arg(long, default_value = "km")]
    module: String,
}

#[derive(Args, Debug)]
struct SymbolArgs {
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    symbol: String,
    #[command(flatten)]
    module: ModuleArg,
}

#[derive(Args, Debug)]
struct ResidueArgs {
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    place: String,
    #[arg(long)]
    symbol: String,
    #[command(flatten)]
    module: ModuleArg,
}

#[derive(Args, Debug)]
struct DivisorArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    symbol: String,
    #[command(flatten)]
    module: ModuleArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Approximate,
}

#[derive(Args, Debug)]
struct ChowArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    p: usize,
    #[arg(long, allow_hyphen_values = true)]
    i: i64,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[command(flatten)]
    module: ModuleArg,
}

#[derive(Args, Debug)]
struct UnramifiedArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, allow_hyphen_values = true)]
    i: i64,
    #[command(flatten)]
    module: ModuleArg,
}

#[derive(Args, Debug)]
struct AxiomsArgs {
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    module: ModuleArg,
}

#[derive(Args, Debug)]
struct SquareZeroArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Check this many random line configurations instead of one scheme.
    #[arg(long)]
    random_configs: Option<usize>,
    #[arg(long, default_value_t = 5)]
    max_lines: usize,
    /// Field orders for random configurations.
    #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5])]
    fields: Vec<u64>,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    module: ModuleArg,
}

#[derive(Args, Debug)]
struct SsArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Weight.
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
    #[arg(long, default_value = "motivic")]
    realization: String,
    /// Support bound; defaults to GERSTEN_SUPPORT_BOUND, then 2.
    #[arg(long)]
    bound: Option<usize>,
    /// Report the coniveau filtration on this total degree.
    #[arg(long, allow_hyphen_values = true)]
    degree: Option<i64>,
}

#[derive(Args, Debug)]
struct ReciprocityArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    symbol: Option<String>,
    /// Number of random symbols when no symbol is given.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Result of a successful run: output and whether the checks passed.
struct Outcome {
    out: String,
    passed: bool,
}

impl Outcome {
    fn ok(out: String) -> Self {
        Outcome { out, passed: true }
    }
}

type CmdResult = Result<Outcome, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Run the command line `argv` (including the program name) and return the
/// exit code with the text for stdout and stderr.
pub fn run(argv: &[String]) -> (i32, String, String) {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    (0, text, String::new())
                }
                _ => (2, String::new(), text),
            };
        }
    };
    let format = cli.format;
    let result = std::panic::catch_unwind(|| dispatch(cli.command, format));
    match result {
        Ok(Ok(o)) => {
            let mut out = o.out;
            if !out.ends_with('\n') {
                out.push('\n');
            }
            (if o.passed { 0 } else { 1 }, out, String::new())
        }
        Ok(Err(msg)) => (2, String::new(), format!("error: {msg}\n")),
        Err(_) => (2, String::new(), "error: internal failure\n".into()),
    }
}

fn dispatch(cmd: Command, format: Format) -> CmdResult {
    match cmd {
        Command::Symbol(a) => cmd_symbol(a, format),
        Command::Residue(a) => cmd_residue(a, format),
        Command::Divisor(a) => cmd_divisor(a, format),
        Command::Chow(a) => cmd_chow(a, format),
        Command::Unramified(a) => cmd_unramified(a, format),
        Command::Axioms(a) => cmd_axioms(a, format),
        Command::SquareZero(a) => cmd_square_zero(a, format),
        Command::Ss(a) => cmd_ss(a, format),
        Command::Reciprocity(a) => cmd_reciprocity(a, format),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

fn module(m: &ModuleArg) -> Result<CycleModuleInstance, String> {
    match m.module.as_str() {
        "km" => Ok(CycleModuleInstance::milnor()),
        "km-flipped" => Ok(CycleModuleInstance::flipped_residue_fixture()),
        s => match s.strip_prefix("km/").map(str::parse::<u64>) {
            Some(Ok(l)) if l >= 2 => Ok(CycleModuleInstance::milnor_mod(l)),
            _ => Err(format!(
                "unknown module {s}; use km, km/L with L >= 2 or km-flipped"
            )),
        },
    }
}

fn scheme(a: &SchemeArgs) -> Result<Arc<SchemeDescription>, String> {
    if let Some(path) = &a.load {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
        return load_abstract(&text).map(Arc::new).map_err(err);
    }
    let name = a.scheme.as_deref().ok_or("give --scheme or --load")?;
    let q = a.q.ok_or("--q is required for built-in schemes")?;
    let x = match name {
        "point" => {
            let d = a.point_degree.unwrap_or(1).to_string();
            SchemeDescription::builtin("point", q, &[d])
        }
        "A1" if !a.remove.is_empty() => {
            let k = field_of_order(q).map_err(err)?;
            let places = a
                .remove
                .iter()
                .map(|s| parse_place(s, &k, "t"))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            Ok(SchemeDescription::affine_line_minus(&k, places))
        }
        _ => SchemeDescription::builtin(name, q, &a.lines),
    };
    x.map(Arc::new).map_err(err)
}

fn group_json(g: &FgAbGroup) -> Value {
    json!({
        "rank": g.rank(),
        "torsion": g.torsion().iter().map(|t| t.to_string().parse::<i64>().map(Value::from).unwrap_or_else(|_| Value::from(t.to_string()))).collect::<Vec<_>>(),
        "text": g.to_string(),
    })
}

fn element_json(m: &MilnorElement) -> Value {
    json!({
        "field": m.field().to_string(),
        "degree": m.degree(),
        "constant": m.constant(),
        "residues": m.residues().iter().map(|(pi, v)| json!({"place": pi.format("t"), "value": v})).collect::<Vec<_>>(),
        "text": m.to_string(),
    })
}

/// The group an element of `K_n(F_q)` (or its reduction) lives in.
fn finite_group_label(m: &MilnorElement) -> String {
    let q = m.field().base().order();
    let base = match m.degree() {
        0 => "Z".to_string(),
        1 => format!("F{q}^x"),
        n => format!("K_{n}(F{q})"),
    };
    match m.coefficients() {
        Coefficients::Integral => base,
        Coefficients::ModL(l) if m.degree() == 0 => format!("Z/{l}"),
        Coefficients::ModL(l) => format!("{base}/{l}"),
    }
}

fn symbol_with_field(field: Option<&str>, symbol: &str) -> Result<Symbol, String> {
    let f = field.map(parse_field_ref).transpose().map_err(err)?;
    parse_symbol(symbol, f.as_ref()).map_err(err)
}

fn cmd_symbol(a: SymbolArgs, format: Format) -> CmdResult {
    let phi = module(&a.module)?;
    let s = symbol_with_field(a.field.as_deref(), &a.symbol)?;
    let x = phi.normalize(&s).map_err(err)?;
    Ok(Outcome::ok(match format {
        Format::Text => x.to_string(),
        Format::Json => pretty(&element_json(&x)),
    }))
}

fn cmd_residue(a: ResidueArgs, format: Format) -> CmdResult {
    let phi = module(&a.module)?;
    let s = symbol_with_field(a.field.as_deref(), &a.symbol)?;
    let FieldRef::Function(k) = &s.field else {
        return Err("residues need a function field such as F3(t)".into());
    };
    let v = parse_place(&a.place, k, "t").map_err(err)?;
    let x = phi.normalize(&s).map_err(err)?;
    let r = phi.residue(&v, &x).map_err(err)?;
    let label = finite_group_label(&r);
    Ok(Outcome::ok(match format {
        Format::Text => format!("{r} in {label}"),
        Format::Json => pretty(&json!({
            "place": a.place,
            "symbol": element_json(&x),
            "residue": element_json(&r),
            "group": label,
        })),
    }))
}

fn generic_chain(
    x: &Arc<SchemeDescription>,
    phi: &CycleModuleInstance,
    symbol: &str,
) -> Result<CycleChain, String> {
    let generic = x
        .points_of_codim(0, None)
        .map_err(err)?
        .into_iter()
        .next()
        .ok_or("scheme has no generic point")?;
    let value = if x.dimension() == 2 {
        ChainValue::Plane(parse_plane_symbol(symbol, x.base()).map_err(err)?)
    } else {
        let field = match x.dimension() {
            0 => FieldRef::Finite(Arc::clone(x.base())),
            _ => FieldRef::Function(Arc::clone(x.base())),
        };
        ChainValue::Milnor(
            phi.normalize(&parse_symbol(symbol, Some(&field)).map_err(err)?)
                .map_err(err)?,
        )
    };
    let degree = match &value {
        ChainValue::Milnor(m) => m.degree(),
        ChainValue::Plane(s) => s.degree(),
    };
    let i = degree as i64 + i64::from(phi.grading_offset());
    CycleChain::zero(x, phi, 0, i)
        .with(generic, value)
        .map_err(err)
}

/// `[(t - 1)] + [(t + 1)] - 2[inf]` for chains of integers.
fn divisor_text(c: &CycleChain) -> Option<String> {
    if c.is_zero() {
        return Some("0".into());
    }
    let mut out = String::new();
    for (j, (p, v)) in c.components().iter().enumerate() {
        let m = v.as_milnor().filter(|m| m.degree() == 0)?.constant();
        let label = c.scheme().point_label(p);
        let (sign, abs) = if m < 0 { ("-", -m) } else { ("+", m) };
        match (j, sign) {
            (0, "-") => out.push('-'),
            (0, _) => {}
            (_, s) => {
                let _ = write!(out, " {s} ");
            }
        }
        if abs != 1 {
            let _ = write!(out, "{abs}");
        }
        let _ = write!(out, "[{label}]");
    }
    Some(out)
}

fn cmd_divisor(a: DivisorArgs, format: Format) -> CmdResult {
    let phi = module(&a.module)?;
    let x = scheme(&a.scheme)?;
    let c = generic_chain(&x, &phi, &a.symbol)?;
    let d = differential(&c).map_err(err)?;
    Ok(Outcome::ok(match format {
        Format::Text => divisor_text(&d).unwrap_or_else(|| d.format()),
        Format::Json => pretty(&serde_json::to_value(chain_document(&d)).map_err(err)?),
    }))
}

fn cmd_chow(a: ChowArgs, format: Format) -> CmdResult {
    let phi = module(&a.module)?;
    let x = scheme(&a.scheme)?;
    let mode = match a.mode {
        Mode::Exact => ChowMode::Exact,
        Mode::Approximate => ChowMode::Approximate,
    };
    let r = chow(&x, &phi, a.p, a.i, mode).map_err(err)?;
    Ok(Outcome::ok(match format {
        Format::Text => r.to_string(),
        Format::Json => {
            let generators = r
                .generators
                .iter()
                .map(|g| serde_json::to_value(chain_document(g)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            pretty(&json!({
                "scheme": x.name(),
                "p": a.p,
                "i": a.i,
                "group": group_json(&r.group),
                "description": r.description,
                "caveat": r.caveat,
                "generators": generators,
            }))
        }
    }))
}

fn cmd_unramified(a: UnramifiedArgs, format: Format) -> CmdResult {
    let phi = module(&a.module)?;
    let x = scheme(&a.scheme)?;
    let g = unramified(&x, &phi, a.i).map_err(err)?;
    Ok(Outcome::ok(match format {
        Format::Text => g.to_string(),
        Format::Json => pretty(&json!({"scheme": x.name(), "i": a.i, "group": group_json(&g)})),
    }))
}

fn cmd_axioms(a: AxiomsArgs, format: Format) -> CmdResult {
    let phi = module(&a.module)?;
    let report = check_premodule_coherences(&phi, a.samples, a.seed);
    let passed = report_passed(&report);
    let out = match format {
        Format::Json => pretty(&serde_json::to_value(&report).map_err(err)?),
        Format::Text => {
            let mut s = String::new();
            for c in &report {
                let _ = writeln!(
                    s,
                    "{}: {} samples, {} failures",
                    c.check,
                    c.samples,
                    c.failures.len()
                );
                for w in c.failures.iter().take(3) {
                    let _ = writeln!(s, "  {w}");
                }
            }
            let _ = write!(s, "{}", if passed { "PASS" } else { "FAIL" });
            s
        }
    };
    Ok(Outcome { out, passed })
}

fn cmd_square_zero(a: SquareZeroArgs, format: Format) -> CmdResult {
    let report = match a.random_configs {
        Some(n) => {
            if a.scheme.scheme.is_some() || a.scheme.load.is_some() {
                return Err("--random-configs replaces --scheme and --load".into());
            }
            check_square_zero_random(n, a.max_lines, &a.fields, a.samples, a.seed).map_err(err)?
        }
        None => {
            let phi = module(&a.module)?;
            check_square_zero(&scheme(&a.scheme)?, &phi, a.samples, a.seed).map_err(err)?
        }
    };
    let passed = report.passed();
    let out = match format {
        Format::Json => pretty(&serde_json::to_value(&report).map_err(err)?),
        Format::Text => {
            let mut s = format!(
                "{} schemes, {} samples, {} points checked, {} failures",
                report.schemes,
                report.samples,
                report.checked_points,
                report.failures.len()
            );
            if report.user_certified {
                s.push_str(" (fibers user-certified)");
            }
            for f in &report.failures {
                let _ = write!(
                    s,
                    "\n  {} on {} at {}: total {}",
                    f.symbol, f.scheme, f.point, f.total
                );
            }
            s.push_str(if passed { "\nPASS" } else { "\nFAIL" });
            s
        }
    };
    Ok(Outcome { out, passed })
}

fn support_bound(flag: Option<usize>) -> Result<usize, String> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("GERSTEN_SUPPORT_BOUND") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| format!("GERSTEN_SUPPORT_BOUND={s} is not a number")),
        Err(_) => Ok(DEFAULT_SUPPORT_BOUND),
    }
}

fn cmd_ss(a: SsArgs, format: Format) -> CmdResult {
    let x = scheme(&a.scheme)?;
    let realization: Realization = a.realization.parse().map_err(err)?;
    let bound = support_bound(a.bound)?;
    let seq = assemble_coniveau(&x, realization, a.n, bound).map_err(err)?;
    let filtration = a
        .degree
        .map(|k| coniveau_filtration_report(&seq.pages, k, "N"))
        .transpose()
        .map_err(err)?;
    Ok(Outcome::ok(match format {
        Format::Json => {
            let filtration = filtration.as_ref().map(|f| {
                json!({
                    "degree": f.degree,
                    "steps": f.steps.iter().map(|s| json!({
                        "p": s.p,
                        "group": s.group.as_ref().map(group_json),
                        "graded": group_json(&s.graded),
                    })).collect::<Vec<_>>(),
                })
            });
            pretty(&json!({
                "scheme": seq.scheme,
                "weight": seq.weight,
                "support_bound": seq.support_bound,
                "pages": seq.pages.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
                "caveats": seq.caveats,
                "filtration": filtration,
            }))
        }
        Format::Text => {
            let mut s = String::new();
            for p in &seq.pages {
                let _ = write!(s, "{p}");
            }
            for c in &seq.caveats {
                let _ = writeln!(s, "caveat: {c}");
            }
            if let Some(f) = filtration {
                let _ = writeln!(s, "{f}");
            }
            s
        }
    }))
}

struct Reciprocity {
    element: MilnorElement,
    residues: Vec<(String, MilnorElement, MilnorElement)>,
    product: MilnorElement,
}

/// Residues of `x` in `K_2(F_q(t))` at every place and the sum of their
/// norms to `F_q`, computed as the pushforward of `d(x)` along `P^1 -> pt`.
fn reciprocity(x: MilnorElement) -> Result<Reciprocity, String> {
    let k = Arc::clone(x.field().base());
    let p1 = Arc::new(SchemeDescription::projective_line(&k));
    let phi = CycleModuleInstance::milnor();
    let c = CycleChain::zero(&p1, &phi, 0, x.degree() as i64)
        .with(PointId::Generic, x.clone())
        .map_err(err)?;
    let d = differential(&c).map_err(err)?;
    let fq = FieldRef::Finite(Arc::clone(&k));
    let mut residues = Vec::new();
    for (p, v) in d.components() {
        let r = v.as_milnor().ok_or("unexpected plane value")?.clone();
        let n = phi.norm(&fq, &r).map_err(err)?;
        residues.push((p1.point_label(p), r, n));
    }
    let pushed = pushforward(&d).map_err(err)?;
    let product = pushed
        .components()
        .get(&PointId::Generic)
        .and_then(|v| v.as_milnor().cloned())
        .unwrap_or_else(|| MilnorElement::finite(&k, 1, 0, Coefficients::Integral));
    Ok(Reciprocity {
        element: x,
        residues,
        product,
    })
}

fn cmd_reciprocity(a: ReciprocityArgs, format: Format) -> CmdResult {
    let k = field_of_order(a.q).map_err(err)?;
    let field = FieldRef::Function(Arc::clone(&k));
    let phi = CycleModuleInstance::milnor();
    let elements: Vec<MilnorElement> = match (&a.symbol, a.samples) {
        (Some(s), None) => {
            let sym = parse_symbol(s, Some(&field)).map_err(err)?;
            if sym.len() != 2 {
                return Err("reciprocity takes a symbol with two entries".into());
            }
            vec![phi.normalize(&sym).map_err(err)?]
        }
        (None, Some(n)) => {
            let seed = a.seed.ok_or("--seed is required with --samples")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let deg = rng.gen_range(1..=3);
                    let f = random_ratfunc(&k, &mut rng, deg);
                    let g = random_ratfunc(&k, &mut rng, deg);
                    let s = Symbol::new(field.clone(), vec![f, g]).map_err(err)?;
                    phi.normalize(&s).map_err(err)
                })
                .collect::<Result<_, _>>()?
        }
        _ => return Err("give either --symbol or --samples with --seed".into()),
    };
    let results = elements
        .into_iter()
        .map(reciprocity)
        .collect::<Result<Vec<_>, _>>()?;
    let passed = results.iter().all(|r| r.product.is_zero());
    let out = match format {
        Format::Json => pretty(&json!({
            "q": a.q,
            "passed": passed,
            "symbols": results.iter().map(|r| json!({
                "element": r.element.to_string(),
                "residues": r.residues.iter().map(|(p, v, n)| json!({
                    "place": p,
                    "residue": v.to_string(),
                    "norm": n.to_string(),
                })).collect::<Vec<_>>(),
                "product": r.product.to_string(),
            })).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let verdict = if passed { "PASS" } else { "FAIL" };
            if results.len() == 1 {
                format!("product of norms = {}; {verdict}", results[0].product)
            } else {
                let bad = results.iter().filter(|r| !r.product.is_zero()).count();
                format!(
                    "{} symbols, {bad} with product of norms != 1; {verdict}",
                    results.len()
                )
            }
        }
    };
    Ok(Outcome { out, passed })
}
