//! Command-line front end: state parsing, analysis, sweeps, search
//! campaigns and a regression report of the known results.
//!
//! Exit codes: 0 success, 1 a reproduce claim failed, 2 parse error,
//! 3 validation error, 4 I/O error, 10 counterexample candidate found.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discord::{closest_cq, conjecture_gap, geometric_discord};
use crate::linalg::CMatrix4;
use crate::lu::{self, LUFingerprint};
use crate::qstate::{
    from_bloch, make_named, numerical_rank, x_state, BlochForm, DensityMatrix, EntangledComponent,
    NamedState, XStateParams,
};
use crate::search::{self, ProductEnsemble, ProductTerm, SearchRecord};
use crate::separability::{self, is_separable};
use crate::xmax::{self, Branch};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CLAIM_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_COUNTEREXAMPLE: i32 = 10;

/// Environment variable that caps the rayon worker count.
pub const THREADS_ENV: &str = "GDISCORD_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Parse(String),
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Parser, Debug)]
#[command(
    name = "gdiscord",
    version,
    about = "Geometric discord and separability of two-qubit states"
)]
pub struct Cli {
    /// Tolerance for the PPT test and numerical rank.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Base RNG seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output format for stdout.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Werner,
    RhoEpsilon,
    AppendixK,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analyze one state read as JSON from --in or stdin.
    Analyze {
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Tabulate a one-parameter family to CSV.
    Sweep {
        #[arg(value_enum)]
        family: Family,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random search over separable states.
    Search {
        #[arg(long, default_value_t = 1000)]
        seeds: u64,
        #[arg(long, default_value_t = search::DEFAULT_TERMS)]
        terms: usize,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        /// Directory for records.csv, records.json and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON ensemble `{"terms": [{"weight", "a", "b"}, ...]}` to start from.
        #[arg(long)]
        warm_start: Option<PathBuf>,
        /// Noise scale applied to the warm start for every seed but the first.
        #[arg(long, default_value_t = 0.05)]
        perturb: f64,
    },
    /// Recompute the known results and compare.
    Reproduce,
}

// ---------------------------------------------------------------------------
// State input

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Matrix(Vec<Vec<[f64; 2]>>),
    XState(XStateParams),
    Bloch(BlochSpec),
    Named(NamedSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochSpec {
    pub x: [f64; 3],
    pub y: [f64; 3],
    #[serde(rename = "T")]
    pub t: [[f64; 3]; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedSpec {
    pub name: String,
    pub param: Option<f64>,
    pub component: Option<EntangledComponent>,
    pub a: Option<[f64; 3]>,
    pub b: Option<[f64; 3]>,
}

/// A parsed state plus its X-state parameters when given that way.
#[derive(Debug, Clone)]
pub struct StateInput {
    pub rho: DensityMatrix,
    pub x_params: Option<XStateParams>,
}

pub fn parse_state_spec(text: &str) -> Result<StateSpec, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn named_state(spec: &NamedSpec) -> Result<NamedState, CliError> {
    let param = |what: &str| {
        spec.param
            .ok_or_else(|| CliError::Parse(format!("named.param required for {what}")))
    };
    let vector = |v: Option<[f64; 3]>, key: &str| {
        v.map(Vector3::from)
            .ok_or_else(|| CliError::Parse(format!("named.{key} required for product")))
    };
    Ok(match spec.name.as_str() {
        "bell_phi_plus" => NamedState::BellPhiPlus,
        "bell_psi_minus" => NamedState::BellPsiMinus,
        "werner" => NamedState::Werner(param("werner")?),
        "rho_epsilon" => {
            NamedState::RhoEpsilon(param("rho_epsilon")?, spec.component.unwrap_or_default())
        }
        "rho_star" => NamedState::RhoStar,
        "sigma_star" => NamedState::SigmaStar,
        "product" => NamedState::Product(vector(spec.a, "a")?, vector(spec.b, "b")?),
        other => {
            return Err(CliError::Parse(format!(
                "named.name: unknown state `{other}`"
            )))
        }
    })
}

pub fn resolve_state(spec: &StateSpec) -> Result<StateInput, CliError> {
    match spec {
        StateSpec::Matrix(rows) => {
            if rows.len() != 4 {
                return Err(CliError::Parse(format!(
                    "matrix: expected 4 rows, got {}",
                    rows.len()
                )));
            }
            let mut m = CMatrix4::zeros();
            for (r, row) in rows.iter().enumerate() {
                if row.len() != 4 {
                    return Err(CliError::Parse(format!(
                        "matrix[{r}]: expected 4 entries, got {}",
                        row.len()
                    )));
                }
                for (c, [re, im]) in row.iter().enumerate() {
                    m[(r, c)] = Complex64::new(*re, *im);
                }
            }
            Ok(StateInput {
                rho: DensityMatrix::from_matrix(m)?,
                x_params: None,
            })
        }
        StateSpec::XState(p) => Ok(StateInput {
            rho: x_state(p)?,
            x_params: Some(*p),
        }),
        StateSpec::Bloch(b) => {
            let t = Matrix3::from_fn(|i, j| b.t[i][j]);
            let bf = BlochForm::new(Vector3::from(b.x), Vector3::from(b.y), t);
            Ok(StateInput {
                rho: from_bloch(&bf)?,
                x_params: None,
            })
        }
        StateSpec::Named(n) => {
            let rho = make_named(&named_state(n)?)?;
            let x_params = (n.name == "rho_star").then(crate::qstate::rho_star_params);
            Ok(StateInput { rho, x_params })
        }
    }
}

pub fn parse_state(text: &str) -> Result<StateInput, CliError> {
    resolve_state(&parse_state_spec(text)?)
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub discord: f64,
    pub gap: f64,
    pub closest_cq_axis: [f64; 3],
    pub separable: bool,
    pub min_pt_eigenvalue: f64,
    pub t_trace_norm: f64,
    #[serde(rename = "chsh_M")]
    pub chsh_m: f64,
    pub rank: usize,
    pub fingerprint: LUFingerprint,
    /// Closed-form X-state verdict, `null` unless the input was an X state.
    pub x_condition: Option<bool>,
}

pub fn analyze(input: &StateInput, tol: f64) -> AnalyzeReport {
    let rho = &input.rho;
    let sep = match &input.x_params {
        Some(p) => separability::report_x_state(p, tol),
        None => separability::report(rho, tol),
    };
    let (cq, _) = closest_cq(rho);
    AnalyzeReport {
        discord: geometric_discord(rho),
        gap: conjecture_gap(rho),
        closest_cq_axis: cq.axis().into(),
        separable: sep.is_ppt,
        min_pt_eigenvalue: sep.min_pt_eigenvalue,
        t_trace_norm: sep.t_trace_norm,
        chsh_m: sep.chsh_m,
        rank: numerical_rank(rho, tol),
        fingerprint: lu::lu_fingerprint(rho),
        x_condition: sep.x_condition,
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_analyze(
    report: &AnalyzeReport,
    format: Format,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(report).expect("serializable")
        ),
        Format::Csv => {
            writeln!(
                out,
                "discord,gap,separable,min_pt_eigenvalue,t_trace_norm,chsh_M,rank"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt17(report.discord),
                fmt17(report.gap),
                report.separable,
                fmt17(report.min_pt_eigenvalue),
                fmt17(report.t_trace_norm),
                fmt17(report.chsh_m),
                report.rank
            )
        }
        Format::Table => {
            let a = report.closest_cq_axis;
            let fp = &report.fingerprint;
            let x_cond = report
                .x_condition
                .map_or("-".to_string(), |b| b.to_string());
            let rows = [
                ("discord", fmt17(report.discord)),
                ("gap", fmt17(report.gap)),
                (
                    "closest_cq_axis",
                    format!("{} {} {}", fmt17(a[0]), fmt17(a[1]), fmt17(a[2])),
                ),
                ("separable", report.separable.to_string()),
                ("min_pt_eigenvalue", fmt17(report.min_pt_eigenvalue)),
                ("t_trace_norm", fmt17(report.t_trace_norm)),
                ("chsh_M", fmt17(report.chsh_m)),
                ("rank", report.rank.to_string()),
                ("x_norm", fmt17(fp.x_norm)),
                ("y_norm", fmt17(fp.y_norm)),
                ("t_singulars", fp.t_singulars.map(fmt17).join(" ")),
                ("t_det_sign", fp.t_det_sign.to_string()),
                ("x_condition", x_cond),
            ];
            for (k, v) in rows {
                writeln!(out, "{k:<18} {v}")?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub discord: f64,
    pub gap: f64,
    pub separable: bool,
    pub rank: usize,
}

pub fn default_range(family: Family) -> (f64, f64) {
    match family {
        Family::Werner => (0.0, 1.0),
        Family::RhoEpsilon => (0.0, 0.75),
        Family::AppendixK => (0.1, 10.0),
    }
}

/// Sample points; linear for the state families, logarithmic in `k`.
/// The last point is `hi` exactly.
pub fn sweep_params(family: Family, lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError::Validation("steps must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(CliError::Validation(format!("invalid range [{lo}, {hi}]")));
    }
    let (dlo, dhi) = match family {
        Family::Werner => (0.0, 1.0),
        Family::RhoEpsilon => (0.0, 0.75),
        Family::AppendixK => (f64::MIN_POSITIVE, f64::INFINITY),
    };
    if lo < dlo || hi > dhi {
        return Err(CliError::Validation(format!(
            "range [{lo}, {hi}] outside the family domain [{dlo}, {dhi}]"
        )));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                return hi;
            }
            let t = i as f64 / last;
            match family {
                Family::AppendixK => (lo.ln() + t * (hi.ln() - lo.ln())).exp(),
                _ => lo + t * (hi - lo),
            }
        })
        .collect())
}

pub fn sweep(
    family: Family,
    lo: f64,
    hi: f64,
    steps: usize,
    tol: f64,
) -> Result<Vec<SweepRow>, CliError> {
    sweep_params(family, lo, hi, steps)?
        .into_iter()
        .map(|param| {
            let rho = match family {
                Family::Werner => make_named(&NamedState::Werner(param))?,
                Family::RhoEpsilon => make_named(&NamedState::RhoEpsilon(
                    param,
                    EntangledComponent::default(),
                ))?,
                Family::AppendixK => {
                    x_state(&xmax::solve_constraints(param, Branch::Plus)?.params)?
                }
            };
            Ok(SweepRow {
                param,
                discord: geometric_discord(&rho),
                gap: conjecture_gap(&rho),
                separable: is_separable(&rho, tol),
                rank: numerical_rank(&rho, tol),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("param,discord,gap,separable,rank\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt17(r.param),
            fmt17(r.discord),
            fmt17(r.gap),
            r.separable,
            r.rank
        );
    }
    s
}

// ---------------------------------------------------------------------------
// search

#[derive(Debug, Deserialize)]
struct EnsembleFile {
    terms: Vec<ProductTerm>,
}

pub fn parse_ensemble(text: &str) -> Result<ProductEnsemble, CliError> {
    let file: EnsembleFile =
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(ProductEnsemble::new(file.terms)?)
}

#[derive(Debug, Serialize)]
struct RecordOut<'a> {
    seed: u64,
    method: search::Method,
    discord: f64,
    gap: f64,
    separable: bool,
    rank: usize,
    iterations: usize,
    ensemble: &'a [ProductTerm],
    matrix: Vec<Vec<[f64; 2]>>,
    trace: &'a [f64],
}

impl<'a> From<&'a SearchRecord> for RecordOut<'a> {
    fn from(r: &'a SearchRecord) -> Self {
        RecordOut {
            seed: r.seed,
            method: r.method,
            discord: r.discord,
            gap: r.gap,
            separable: r.separable,
            rank: r.rank,
            iterations: r.iterations,
            ensemble: r.ensemble.terms(),
            matrix: r.state.to_pairs(),
            trace: &r.trace,
        }
    }
}

pub fn search_csv(records: &[SearchRecord]) -> String {
    let mut s = String::from("seed,method,discord,gap,separable,rank,iterations\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.seed,
            r.method.as_str(),
            fmt17(r.discord),
            fmt17(r.gap),
            r.separable,
            r.rank,
            r.iterations
        );
    }
    s
}

fn records_json(records: &[SearchRecord]) -> String {
    let out: Vec<RecordOut> = records.iter().map(RecordOut::from).collect();
    serde_json::to_string_pretty(&out).expect("serializable") + "\n"
}

/// [`EXIT_COUNTEREXAMPLE`] when any separable record has a negative gap.
pub fn search_exit_code(summary: &search::CampaignSummary) -> i32 {
    if summary.counterexample_seeds.is_empty() {
        EXIT_OK
    } else {
        EXIT_COUNTEREXAMPLE
    }
}

pub struct SearchArgs {
    pub first_seed: u64,
    pub seeds: u64,
    pub terms: usize,
    pub iters: usize,
    pub warm_start: Option<ProductEnsemble>,
    pub perturb: f64,
}

pub fn run_search(args: &SearchArgs) -> Result<Vec<SearchRecord>, CliError> {
    if args.seeds == 0 {
        return Err(CliError::Validation("--seeds must be at least 1".into()));
    }
    if args.terms == 0 {
        return Err(CliError::Validation("--terms must be at least 1".into()));
    }
    let range = args.first_seed..args.first_seed.saturating_add(args.seeds);
    Ok(match &args.warm_start {
        None => search::campaign(range, args.terms, args.iters),
        Some(warm) => {
            let first = args.first_seed;
            search::campaign_from(range, args.iters, |seed| {
                if seed == first {
                    warm.clone()
                } else {
                    search::perturb(warm, seed, args.perturb)
                }
            })
        }
    })
}

fn write_search_artifacts(
    dir: &Path,
    records: &[SearchRecord],
    summary: &search::CampaignSummary,
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let write = |name: &str, body: String| {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| io_err(&p, e))
    };
    write("records.csv", search_csv(records))?;
    write("records.json", records_json(records))?;
    write(
        "summary.json",
        serde_json::to_string_pretty(summary).expect("serializable") + "\n",
    )?;
    let flagged: Vec<SearchRecord> = records
        .iter()
        .filter(|r| r.is_counterexample_candidate())
        .cloned()
        .collect();
    if !flagged.is_empty() {
        write("counterexamples.json", records_json(&flagged))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// reproduce

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimRow {
    pub id: &'static str,
    pub expected: String,
    pub computed: f64,
    pub error: f64,
    pub tol: f64,
    pub pass: bool,
}

fn claim_eq(id: &'static str, expected: f64, computed: f64, tol: f64) -> ClaimRow {
    let error = (computed - expected).abs();
    ClaimRow {
        id,
        expected: fmt17(expected),
        computed,
        error,
        tol,
        pass: error <= tol,
    }
}

fn claim_max_error(id: &'static str, errors: impl Iterator<Item = f64>, tol: f64) -> ClaimRow {
    let worst = errors.fold(0.0, f64::max);
    ClaimRow {
        id,
        expected: fmt17(0.0),
        computed: worst,
        error: worst,
        tol,
        pass: worst <= tol,
    }
}

pub fn reproduce_rows() -> Vec<ClaimRow> {
    let named = |n: NamedState| make_named(&n).expect("valid named state");
    let rho_star = named(NamedState::RhoStar);
    let sigma = named(NamedState::SigmaStar);
    let mut rows = Vec::new();

    rows.push(claim_eq(
        "prop1_max",
        0.25,
        xmax::max_separable_x_discord().0,
        1e-12,
    ));
    rows.push(claim_eq(
        "rho_star_discord",
        0.25,
        geometric_discord(&rho_star),
        1e-12,
    ));
    let min_pt = separability::min_pt_eigenvalue(&rho_star);
    rows.push(ClaimRow {
        id: "rho_star_separable",
        expected: ">= 0".into(),
        computed: min_pt,
        error: (-min_pt).max(0.0),
        tol: separability::PPT_TOL,
        pass: min_pt >= -separability::PPT_TOL,
    });
    rows.push(claim_eq(
        "rho_star_rank",
        2.0,
        numerical_rank(&rho_star, crate::qstate::RANK_TOL) as f64,
        0.0,
    ));

    let (_, printed) = lu::verify_rho_sigma_equivalence();
    rows.push(claim_eq("lu_equiv", 0.0, printed, 1e-12));
    let (_, corrected) = lu::verify_rho_sigma_equivalence_corrected();
    rows.push(claim_eq("lu_equiv_corrected", 0.0, corrected, 1e-12));
    rows.push(claim_eq(
        "sigma_discord",
        0.25,
        geometric_discord(&sigma),
        1e-12,
    ));

    let oracle = search::prop2_simplex_oracle(300);
    rows.push(claim_eq("prop2_bound", 2.0 / 9.0, oracle, 2e-3));
    rows.push(ClaimRow {
        id: "simplex_below_half",
        expected: "< 0.5".into(),
        computed: oracle,
        error: (oracle - 0.5).max(0.0),
        tol: 0.0,
        pass: oracle < 0.5,
    });

    let grid = |n: usize, hi: f64| (0..n).map(move |i| hi * i as f64 / (n - 1) as f64);
    rows.push(claim_max_error(
        "werner_p2",
        grid(101, 1.0).map(|p| (geometric_discord(&named(NamedState::Werner(p))) - p * p).abs()),
        1e-12,
    ));
    let last_sep = grid(101, 1.0)
        .filter(|&p| is_separable(&named(NamedState::Werner(p)), separability::PPT_TOL))
        .fold(f64::NAN, f64::max);
    rows.push(claim_eq("werner_threshold", 1.0 / 3.0, last_sep, 0.01));

    let eps_state = |e: f64| named(NamedState::RhoEpsilon(e, EntangledComponent::default()));
    rows.push(claim_max_error(
        "rho_epsilon_discord",
        grid(76, 0.75).map(|e| (geometric_discord(&eps_state(e)) - (1.0 - e)).abs()),
        1e-10,
    ));
    rows.push(claim_max_error(
        "rho_epsilon_shifted",
        grid(76, 0.75).map(|e| (geometric_discord(&eps_state(0.75 - e)) - (0.25 + e)).abs()),
        1e-10,
    ));

    let (k_star, f_star) = xmax::maximize_f(1e-13);
    rows.push(claim_eq("fk_argmax", 1.0, k_star, 1e-8));
    rows.push(claim_eq("fk_max", 0.125, f_star, 1e-12));
    let f4 = xmax::fourth_derivative_fd(1.0, 0.02).expect("k = 1 in domain");
    rows.push(claim_eq("fk_fourth_derivative", -3.0 / 16.0, f4, 1e-5));
    rows
}

fn write_reproduce(rows: &[ClaimRow], format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(rows).expect("serializable")
        ),
        Format::Csv => {
            writeln!(out, "id,expected,computed,error,tol,pass")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.id,
                    r.expected,
                    fmt17(r.computed),
                    fmt17(r.error),
                    r.tol,
                    r.pass
                )?;
            }
            Ok(())
        }
        Format::Table => {
            writeln!(
                out,
                "{:<20} {:>24} {:>24} {:>24} {:>8}  status",
                "claim", "expected", "computed", "|error|", "tol"
            )?;
            for r in rows {
                writeln!(
                    out,
                    "{:<20} {:>24} {:>24} {:>24} {:>8.0e}  {}",
                    r.id,
                    r.expected,
                    fmt17(r.computed),
                    fmt17(r.error),
                    r.tol,
                    if r.pass { "pass" } else { "FAIL" }
                )?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<String, CliError> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| io_err(p, e)),
        None => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Io(format!("stdout: {e}"))
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<i32, CliError> {
    if !(cli.tol >= 0.0 && cli.tol.is_finite()) {
        return Err(CliError::Validation(format!(
            "--tol must be a nonnegative number, got {}",
            cli.tol
        )));
    }
    match &cli.command {
        Command::Analyze { input } => {
            let text = read_input(input.as_deref(), stdin)?;
            let report = analyze(&parse_state(&text)?, cli.tol);
            write_analyze(&report, cli.format.unwrap_or(Format::Json), stdout).map_err(out_err)?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            family,
            lo,
            hi,
            steps,
            out,
        } => {
            let (dlo, dhi) = default_range(*family);
            let rows = sweep(
                *family,
                lo.unwrap_or(dlo),
                hi.unwrap_or(dhi),
                *steps,
                cli.tol,
            )?;
            let csv = sweep_csv(&rows);
            match out {
                Some(p) => fs::write(p, csv).map_err(|e| io_err(p, e))?,
                None => stdout.write_all(csv.as_bytes()).map_err(out_err)?,
            }
            Ok(EXIT_OK)
        }
        Command::Search {
            seeds,
            terms,
            iters,
            out,
            warm_start,
            perturb,
        } => {
            let warm = match warm_start {
                Some(p) => Some(parse_ensemble(&read_input(Some(p), stdin)?)?),
                None => None,
            };
            let args = SearchArgs {
                first_seed: cli.seed,
                seeds: *seeds,
                terms: *terms,
                iters: *iters,
                warm_start: warm,
                perturb: *perturb,
            };
            let records = run_search(&args)?;
            let summary = search::summarize(&records);
            if let Some(dir) = out {
                write_search_artifacts(dir, &records, &summary)?;
            }
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => writeln!(
                    stdout,
                    "{}",
                    serde_json::to_string_pretty(&summary).expect("serializable")
                ),
                Format::Csv => stdout.write_all(search_csv(&records).as_bytes()),
                Format::Table => writeln!(
                    stdout,
                    "records       {}\nbest_discord  {}\nworst_gap     {}\ncandidates    {}",
                    summary.records,
                    fmt17(summary.best_discord),
                    fmt17(summary.worst_gap),
                    summary.counterexample_seeds.len()
                ),
            }
            .map_err(out_err)?;
            Ok(search_exit_code(&summary))
        }
        Command::Reproduce => {
            let rows = reproduce_rows();
            write_reproduce(&rows, cli.format.unwrap_or(Format::Table), stdout).map_err(out_err)?;
            Ok(if rows.iter().all(|r| r.pass) {
                EXIT_OK
            } else {
                EXIT_CLAIM_FAILED
            })
        }
    }
}
