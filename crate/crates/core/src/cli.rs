//! Command-line interface.
//!
//! Exit codes: 0 witness found or command succeeded, 2 usage or parse error,
//! 3 no witness (search exhausted or budget spent), 4 below threshold or
//! hypotheses not met, 1 internal failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{self, CatalogParams};
use crate::constants::{self, GammaMode, ThresholdKind, ThresholdParams, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::finder::{self, Outcome, PointSet, SearchBudget, SearchOptions, SearchReport, DEFAULT_BUDGET};
use crate::io;
use crate::sumset;
use crate::system::SystemMatrix;

#[derive(Parser, Debug)]
#[command(name = "balsys", version, about = "Balanced linear systems over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Size of the worker pool (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the output to a file.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Maximum number of search evaluations.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Run finders below their size thresholds.
    #[arg(long, global = true)]
    override_threshold: bool,
    /// Use (p J(p))^s instead of q J(q) for prime powers.
    #[arg(long, global = true)]
    tower: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a coefficient matrix.
    Classify {
        #[arg(short = 'A')]
        matrix: PathBuf,
    },
    /// Search a point set for a witness.
    Find(FindArgs),
    /// Print J, Gamma and thresholds.
    Constants(ConstantsArgs),
    /// A k-term progression in (S - S) \ {0}.
    Apdiff {
        #[arg(short = 'S')]
        set: PathBuf,
        #[arg(short = 'k')]
        k: usize,
    },
    /// A linearly generic solution inside an affinely independent sumset.
    Airgeneric {
        #[arg(short = 'A')]
        matrix: PathBuf,
        /// Comma-separated coefficients summing to zero, e.g. 1,-1.
        #[arg(short = 'b', allow_hyphen_values = true)]
        coeffs: String,
        #[arg(short = 'S')]
        set: PathBuf,
    },
    /// Exact extremal values on small spaces.
    Extremal(ExtremalArgs),
    /// Named example systems.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FindKind {
    Nontrivial,
    Shape,
    Generic,
    Highrank,
    Wshape,
}

#[derive(Args, Debug)]
struct FindArgs {
    kind: FindKind,
    #[arg(short = 'A')]
    matrix: Option<PathBuf>,
    #[arg(short = 'S')]
    set: PathBuf,
    /// For wshape: require a generic W-solution.
    #[arg(long)]
    generic: bool,
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Number of variables, for thresholds.
    #[arg(long)]
    k: Option<u32>,
    /// Dimension, for thresholds.
    #[arg(long)]
    n: Option<u32>,
    /// Number of column classes (default k).
    #[arg(long)]
    ell: Option<u32>,
    /// Induction step count.
    #[arg(long, default_value_t = 1)]
    t: u64,
}

#[derive(Args, Debug)]
struct SystemSource {
    #[arg(short = 'A')]
    matrix: Option<PathBuf>,
    /// Catalog system name.
    #[arg(long)]
    catalog: Option<String>,
    #[arg(long = "k")]
    cat_k: Option<usize>,
    #[arg(long = "l")]
    cat_l: Option<usize>,
    /// Family coefficients, comma separated.
    #[arg(long = "a", allow_hyphen_values = true)]
    cat_a: Option<String>,
}

#[derive(Args, Debug)]
struct ExtremalArgs {
    #[command(flatten)]
    source: SystemSource,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    n: usize,
    /// Longest tricoloured sum-free sequence instead of a shape-free set.
    #[arg(long)]
    tricoloured: bool,
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    List,
    Emit {
        #[arg(long)]
        name: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
    },
}

/// Output of one command: the JSON document, an optional raw text form and
/// the exit code.
struct Output {
    value: Value,
    raw: Option<String>,
    code: i32,
}

impl Output {
    fn ok(value: Value) -> Self {
        Output { value, raw: None, code: 0 }
    }
}

fn outcome_code(o: Outcome) -> i32 {
    match o {
        Outcome::Found => 0,
        Outcome::Exhausted | Outcome::BudgetExceeded => 3,
        Outcome::BelowThreshold | Outcome::NotApplicable => 4,
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) | Error::InvalidArgument(_) | Error::Unknown { .. } | Error::NotPrime(_) | Error::FieldOrderOutOfRange(_) | Error::DimensionMismatch { .. } => 2,
        Error::Exhausted(_) | Error::NoneFound | Error::BudgetExceeded(_) => 3,
        Error::BelowThreshold { .. } | Error::NotApplicable(_) => 4,
        _ => 1,
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<SystemMatrix> {
    SystemMatrix::new(io::parse_matrix(&read(path)?)?)
}

fn load_points(path: &Path) -> Result<PointSet> {
    io::parse_points(&read(path)?)
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad integer {t:?} in {s:?}"))))
        .collect()
}

fn same_field(a: &FieldCtx, b: &FieldCtx) -> Result<()> {
    if a != b {
        return Err(Error::InvalidArgument(format!("matrix over F_{} but set over F_{}", a.label(), b.label())));
    }
    Ok(())
}

fn report_output(r: &SearchReport) -> Output {
    Output { value: to_value(r), raw: None, code: outcome_code(r.outcome) }
}

impl Cli {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            budget: SearchBudget { max_evaluations: self.budget, seed: self.seed },
            override_threshold: self.override_threshold,
            gamma_mode: if self.tower { GammaMode::Tower } else { GammaMode::Flat },
        }
    }

    fn execute(&self) -> Result<Output> {
        let opts = self.options();
        match &self.command {
            Command::Classify { matrix } => classify(&load_system(matrix)?),
            Command::Find(f) => {
                let s = load_points(&f.set)?;
                let r = match f.kind {
                    FindKind::Wshape => finder::find_shape_w(&s, f.generic, &opts)?,
                    kind => {
                        let path = f.matrix.as_ref().ok_or_else(|| Error::InvalidArgument("-A is required".into()))?;
                        let sys = load_system(path)?;
                        same_field(sys.ctx(), s.ctx())?;
                        match kind {
                            FindKind::Nontrivial => finder::find_nontrivial(&sys, &s, &opts)?,
                            FindKind::Shape => finder::find_shape_any(&sys, &s, &opts)?,
                            FindKind::Generic => finder::find_generic_any(&sys, &s, &opts)?,
                            FindKind::Highrank => finder::find_high_rank(&sys, &s, &opts)?,
                            FindKind::Wshape => unreachable!(),
                        }
                    }
                };
                Ok(report_output(&r))
            }
            Command::Constants(c) => constants_cmd(c, opts.gamma_mode),
            Command::Apdiff { set, k } => {
                let s = load_points(set)?;
                let r = sumset::ap_in_difference(&s, *k, &opts)?;
                Ok(Output::ok(json!({ "outcome": Outcome::Found, "result": to_value(&r) })))
            }
            Command::Airgeneric { matrix, coeffs, set } => {
                let sys = load_system(matrix)?;
                let s = load_points(set)?;
                same_field(sys.ctx(), s.ctx())?;
                let b: Vec<u16> = parse_ints(coeffs)?.into_iter().map(|c| sys.ctx().from_i64(c)).collect();
                let r = sumset::generic_in_air_sumset(sys.matrix(), &b, &s, &opts)?;
                Ok(Output { value: to_value(&r), raw: None, code: outcome_code(r.outcome) })
            }
            Command::Extremal(e) => extremal_cmd(e, self.budget),
            Command::Catalog { action } => catalog_cmd(action),
        }
    }
}

fn classify(sys: &SystemMatrix) -> Result<Output> {
    let p = sys.profile();
    let mut warnings = Vec::new();
    if !p.zero_columns.is_empty() {
        warnings.push(format!("zero columns {:?} removed before classification", p.zero_columns));
    }
    if !p.independent_rows {
        warnings.push(format!("rows are dependent (rank {} < m = {})", p.rank, p.m));
    }
    if !p.balanced {
        warnings.push("system is not balanced".to_string());
    }
    let blocks: Vec<Value> = p
        .blocks
        .iter()
        .map(|b| {
            json!({
                "columns": b.columns,
                "type_rc": b.type_rc,
                "thm_a": b.applicable.label_a(),
                "thm_b": b.applicable.label_b(),
            })
        })
        .collect();
    Ok(Output::ok(json!({
        "q": sys.ctx().label(),
        "m": p.m,
        "k": p.k,
        "rank": p.rank,
        "balanced": p.balanced,
        "type_rc": p.core.type_rc,
        "irreducible": p.core.irreducible,
        "thm_a": p.core.applicable.label_a(),
        "thm_b": p.core.applicable.label_b(),
        "moderate": p.moderate,
        "temperate": p.temperate,
        "blocks": blocks,
        "warnings": warnings,
        "profile": to_value(p),
    })))
}

fn constants_cmd(c: &ConstantsArgs, mode: GammaMode) -> Result<Output> {
    let j = constants::compute_j(c.q, c.tol)?;
    let g = constants::gamma(c.q, mode, c.tol)?;
    let mut out = json!({ "q": c.q, "j": to_value(&j), "gamma": to_value(&g) });
    if let (Some(k), Some(n)) = (c.k, c.n) {
        let params = ThresholdParams { q: c.q, k, n, ell: c.ell.unwrap_or(k), mode };
        let th = |kind| constants::thresholds(&params, kind).map(|v| v.to_string());
        out["thresholds"] = json!({
            "k": k,
            "n": n,
            "ell": params.ell,
            "t": c.t,
            "pigeonhole": th(ThresholdKind::Pigeonhole)?,
            "beta_k": th(ThresholdKind::Beta(k))?,
            "temperate_t": th(ThresholdKind::Temperate(c.t))?,
            "rank_t": th(ThresholdKind::Rank(c.t))?,
            "replacement_t": th(ThresholdKind::Replacement(c.t))?,
            "shape_clause_i": constants::shape_threshold(c.q, k, n, false, mode)?.to_string(),
            "shape_clause_ii": constants::shape_threshold(c.q, k, n, true, mode)?.to_string(),
            "w_shape": constants::w_shape_threshold(c.q, n, mode)?.to_string(),
            "note": "sufficient, not optimal",
        });
    }
    Ok(Output::ok(out))
}

fn catalog_params(k: Option<usize>, l: Option<usize>, a: &Option<String>) -> Result<CatalogParams> {
    Ok(CatalogParams { k, l, a: a.as_deref().map(parse_ints).transpose()? })
}

fn extremal_cmd(e: &ExtremalArgs, budget: u64) -> Result<Output> {
    if e.tricoloured {
        let q = e.q.ok_or_else(|| Error::InvalidArgument("--q is required".into()))?;
        let r = sumset::max_tricoloured(q, e.n, budget)?;
        let bound = constants::gamma_flat(q)?.hi.powi(e.n as i32);
        return Ok(Output::ok(json!({ "q": q, "n": e.n, "result": to_value(&r), "gamma_bound": bound })));
    }
    let src = &e.source;
    let sys = match (&src.matrix, &src.catalog) {
        (Some(path), None) => load_system(path)?,
        (None, Some(name)) => {
            let q = e.q.ok_or_else(|| Error::InvalidArgument("--q is required with --catalog".into()))?;
            catalog::make_system(name, &catalog_params(src.cat_k, src.cat_l, &src.cat_a)?, q)?
        }
        _ => return Err(Error::InvalidArgument("give exactly one of -A and --catalog".into())),
    };
    let r = finder::max_shape_free(&sys, e.n, budget)?;
    Ok(Output::ok(json!({ "q": sys.ctx().label(), "n": e.n, "result": to_value(&r) })))
}

fn catalog_cmd(action: &CatalogAction) -> Result<Output> {
    match action {
        CatalogAction::List => Ok(Output::ok(json!({ "systems": to_value(&catalog::list()) }))),
        CatalogAction::Emit { name, q, k, l, a } => {
            let sys = catalog::make_system(name, &catalog_params(*k, *l, a)?, *q)?;
            let text = io::write_matrix(sys.matrix());
            Ok(Output {
                value: json!({ "name": name, "q": sys.ctx().label(), "rows": sys.matrix().to_rows() }),
                raw: Some(text),
                code: 0,
            })
        }
    }
}

/// `key: value` lines, one per leaf; arrays of scalars and vectors inline.
fn render_text(v: &Value, prefix: &str, out: &mut String) {
    let inline = |v: &Value| match v {
        Value::Array(items) => items.iter().all(|i| !i.is_object()),
        Value::Object(_) => false,
        _ => true,
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_text(x, &key, out);
            }
        }
        Value::Array(items) if !inline(v) => {
            for (i, x) in items.iter().enumerate() {
                render_text(x, &format!("{prefix}[{i}]"), out);
            }
        }
        _ => {
            let s = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{prefix}: {s}\n"));
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> Result<()> {
    let text = if cli.json {
        let mut s = serde_json::to_string_pretty(&out.value).expect("serializable");
        s.push('\n');
        s
    } else if let Some(raw) = &out.raw {
        raw.clone()
    } else {
        let mut s = String::new();
        render_text(&out.value, "", &mut s);
        s
    };
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| cli.execute()),
            Err(e) => Err(Error::InvalidArgument(format!("thread pool: {e}"))),
        },
        None => cli.execute(),
    };
    let out = match result {
        Ok(out) => out,
        Err(e) => {
            let code = error_code(&e);
            if code == 2 || code == 1 {
                eprintln!("error: {e}");
                return code;
            }
            Output {
                value: json!({ "outcome": failure_outcome(&e), "error": e.to_string() }),
                raw: None,
                code,
            }
        }
    };
    match emit(&cli, &out) {
        Ok(()) => out.code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn failure_outcome(e: &Error) -> Outcome {
    match e {
        Error::BelowThreshold { .. } => Outcome::BelowThreshold,
        Error::NotApplicable(_) => Outcome::NotApplicable,
        Error::BudgetExceeded(_) => Outcome::BudgetExceeded,
        _ => Outcome::Exhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_rendering_flattens() {
        let mut s = String::new();
        render_text(&json!({ "a": { "b": 1 }, "w": [[0, 1], [2, 3]], "l": [{ "x": "y" }] }), "", &mut s);
        assert_eq!(s, "a.b: 1\nl[0].x: y\nw: [[0,1],[2,3]]\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(outcome_code(Outcome::Found), 0);
        assert_eq!(outcome_code(Outcome::Exhausted), 3);
        assert_eq!(outcome_code(Outcome::BelowThreshold), 4);
        assert_eq!(error_code(&Error::Parse("x".into())), 2);
        assert_eq!(run(["balsys", "catalog", "nope"]), 2);
    }
}
