//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on malformed input or usage, 2 when the
//! problem itself is infeasible, degenerate or unsolved. Output is a pure
//! function of the input files and flags.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};

use crate::bayes::{bayes_closed_form, bayes_via_mre, JointPrior};
use crate::convergence::convergence_experiment;
use crate::dist::{Distribution, DistributionDoc, Event, OutcomeSpace};
use crate::error::Error;
use crate::maxent::maxent;
use crate::measures::{information_gain, relative_entropy, shannon_entropy, ExtendedReal};
use crate::mle::{mle_fit, Dataset, MleReport, ModelRegistry};
use crate::solver::{solve_mre, ConstraintSet, MreSolution, SolverOptions};

#[derive(Debug, Parser)]
#[command(
    name = "mre",
    version,
    about = "Minimum relative entropy inference on finite outcome spaces"
)]
pub struct Cli {
    /// Convergence tolerance; overrides any "tol" in the input file.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Information measures on distribution files.
    #[command(subcommand)]
    Info(InfoCommand),
    /// Update a prior under zero and moment constraints.
    Update { problem: PathBuf },
    /// Maximum entropy distribution under constraints (uniform prior).
    Maxent { problem: PathBuf },
    /// Condition a joint prior on evidence.
    Bayes {
        #[arg(long, value_enum, default_value_t = BayesMethod::Both)]
        method: BayesMethod,
        case: PathBuf,
    },
    /// Maximum likelihood fit of a named model.
    Mle { input: PathBuf },
    /// Conditional-marginal versus projection gap over sample sizes.
    Converge { input: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum InfoCommand {
    /// Shannon entropy in nats.
    Entropy { dist: PathBuf },
    /// Relative entropy H(q; p).
    Kl { q: PathBuf, p: PathBuf },
    /// Total variation distance.
    Tv { a: PathBuf, b: PathBuf },
    /// Information gain log(q / p) for plausibilities p, q in (0, 1].
    Gain { p: f64, q: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BayesMethod {
    Closed,
    Mre,
    Both,
}

/// Update/maxent problem file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<DistributionDoc>,
    /// Outcome labels; used by `maxent` in place of a prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub zeros: Vec<String>,
    #[serde(default)]
    pub moments: Vec<MomentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentDoc {
    /// Coefficient per label; labels not listed get 0.
    pub coeffs: IndexMap<String, f64>,
    pub target: f64,
}

#[derive(Debug, Serialize)]
struct SolutionDoc<'a> {
    #[serde(flatten)]
    problem: &'a ProblemDoc,
    posterior: DistributionDoc,
    #[serde(serialize_with = "multipliers_json")]
    multipliers: Vec<f64>,
    kl: ExtendedReal,
    residual: f64,
    iterations: usize,
    status: &'static str,
}

fn multipliers_json<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for &v in values {
        if v == f64::INFINITY {
            seq.serialize_element("inf")?;
        } else if v == f64::NEG_INFINITY {
            seq.serialize_element("-inf")?;
        } else {
            seq.serialize_element(&v)?;
        }
    }
    seq.end()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BayesDoc {
    joint: DistributionDoc,
    hypotheses: IndexMap<String, Vec<String>>,
    evidence: Vec<String>,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize)]
struct BayesOut {
    hypotheses: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed: Option<DistributionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mre: Option<DistributionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tv_gap: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MleDoc {
    model: String,
    data: IndexMap<String, u64>,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MleOut<'a> {
    labels: &'a [String],
    #[serde(flatten)]
    report: &'a MleReport,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvergeDoc {
    base: DistributionDoc,
    mean_target: f64,
    n_list: Vec<usize>,
    #[serde(default)]
    tol: Option<f64>,
}

/// Why a command failed, mapped onto an exit status.
#[derive(Debug)]
enum Failure {
    Input(String),
    /// Ill-posed problem; optional partial output still gets written.
    Problem(String, Option<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_problem_failure() {
            Failure::Problem(e.to_string(), None)
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome = Result<String, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_distribution(path: &Path) -> Result<Distribution, Failure> {
    let doc: DistributionDoc = read_json(path)?;
    Ok(Distribution::try_from(doc)?)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(headers.to_vec(), &mut out);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(rule.iter().map(String::as_str).collect(), &mut out);
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

fn resolve_tol(cli: Option<f64>, file: Option<f64>, default: f64) -> Result<f64, Failure> {
    let tol = cli.or(file).unwrap_or(default);
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(Failure::Input(format!("tolerance must be positive, got {tol}")))
    }
}

fn build_constraints(space: &OutcomeSpace, doc: &ProblemDoc) -> Result<ConstraintSet, Failure> {
    let mut c = ConstraintSet::new(space.clone()).with_zero_labels(&doc.zeros)?;
    for m in &doc.moments {
        let mut coeffs = vec![0.0; space.len()];
        for (label, &v) in &m.coeffs {
            coeffs[space.index_of(label)?] = v;
        }
        c = c.with_moment(coeffs, m.target)?;
    }
    Ok(c)
}

fn solution_output(
    doc: &ProblemDoc,
    prior: &Distribution,
    sol: &MreSolution,
    status: &'static str,
    format: Format,
) -> String {
    match format {
        Format::Json => json(&SolutionDoc {
            problem: doc,
            posterior: sol.posterior.to_doc(),
            multipliers: sol.multipliers.clone(),
            kl: sol.achieved_kl,
            residual: sol.kkt_residual,
            iterations: sol.iterations,
            status,
        }),
        Format::Table => {
            let rows: Vec<Vec<String>> = prior
                .space()
                .labels()
                .iter()
                .zip(prior.weights().iter().zip(sol.posterior.weights()))
                .map(|(l, (p, q))| vec![l.clone(), p.to_string(), q.to_string()])
                .collect();
            let mut out = table(&["label", "prior", "posterior"], &rows);
            let _ = writeln!(out, "kl {}", sol.achieved_kl);
            let _ = writeln!(out, "residual {}", sol.kkt_residual);
            let _ = writeln!(out, "iterations {}", sol.iterations);
            let _ = writeln!(out, "status {status}");
            out
        }
    }
}

fn solve_problem(
    doc: &ProblemDoc,
    prior: &Distribution,
    constraints: &ConstraintSet,
    opts: &SolverOptions,
    use_maxent: bool,
    format: Format,
) -> Outcome {
    let result = if use_maxent {
        maxent(constraints, opts)
    } else {
        solve_mre(prior, constraints, opts)
    };
    match result {
        Ok(sol) => {
            let status = if sol.boundary { "boundary" } else { "converged" };
            Ok(solution_output(doc, prior, &sol, status, format))
        }
        Err(Error::NotConverged(best)) => {
            let msg = Error::NotConverged(best.clone()).to_string();
            Err(Failure::Problem(
                msg,
                Some(solution_output(doc, prior, &best, "not_converged", format)),
            ))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_update(path: &Path, tol: Option<f64>, format: Format) -> Outcome {
    let doc: ProblemDoc = read_json(path)?;
    let Some(prior_doc) = doc.prior.clone() else {
        return Err(Failure::Input("update needs a \"prior\"".into()));
    };
    if doc.labels.is_some() {
        return Err(Failure::Input("\"labels\" is only valid without a prior".into()));
    }
    let prior = Distribution::try_from(prior_doc)?;
    let constraints = build_constraints(prior.space(), &doc)?;
    let opts = SolverOptions {
        tol: resolve_tol(tol, doc.tol, SolverOptions::default().tol)?,
        ..SolverOptions::default()
    };
    solve_problem(&doc, &prior, &constraints, &opts, false, format)
}

fn cmd_maxent(path: &Path, tol: Option<f64>, format: Format) -> Outcome {
    let doc: ProblemDoc = read_json(path)?;
    if doc.prior.is_some() {
        return Err(Failure::Input("maxent takes \"labels\", not a \"prior\"".into()));
    }
    let Some(labels) = doc.labels.clone() else {
        return Err(Failure::Input("maxent needs \"labels\"".into()));
    };
    let space = OutcomeSpace::new(labels)?;
    let constraints = build_constraints(&space, &doc)?;
    let prior = crate::maxent::indifference_prior(space);
    let opts = SolverOptions {
        tol: resolve_tol(tol, doc.tol, SolverOptions::default().tol)?,
        ..SolverOptions::default()
    };
    solve_problem(&doc, &prior, &constraints, &opts, true, format)
}

fn cmd_bayes(path: &Path, method: BayesMethod, tol: Option<f64>, format: Format) -> Outcome {
    let doc: BayesDoc = read_json(path)?;
    let joint = Distribution::try_from(doc.joint)?;
    let partition: Vec<(String, Vec<String>)> = doc.hypotheses.into_iter().collect();
    let joint = JointPrior::new(joint, &partition)?;
    let evidence = Event::new(joint.joint().space().clone(), &doc.evidence)?;
    let opts = SolverOptions {
        tol: resolve_tol(tol, doc.tol, SolverOptions::default().tol)?,
        ..SolverOptions::default()
    };
    let closed = match method {
        BayesMethod::Closed | BayesMethod::Both => Some(bayes_closed_form(&joint, &evidence)?),
        BayesMethod::Mre => None,
    };
    let via_mre = match method {
        BayesMethod::Mre | BayesMethod::Both => Some(bayes_via_mre(&joint, &evidence, &opts)?),
        BayesMethod::Closed => None,
    };
    let tv_gap = match (&closed, &via_mre) {
        (Some(a), Some(b)) => Some(a.tv_distance(b)?),
        _ => None,
    };
    let labels = joint.hypotheses().labels().to_vec();
    Ok(match format {
        Format::Json => json(&BayesOut {
            hypotheses: labels,
            closed: closed.as_ref().map(Distribution::to_doc),
            mre: via_mre.as_ref().map(Distribution::to_doc),
            tv_gap,
        }),
        Format::Table => {
            let mut headers = vec!["hypothesis"];
            if closed.is_some() {
                headers.push("closed");
            }
            if via_mre.is_some() {
                headers.push("mre");
            }
            let rows: Vec<Vec<String>> = labels
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let mut row = vec![l.clone()];
                    row.extend(closed.iter().map(|d| d.weights()[i].to_string()));
                    row.extend(via_mre.iter().map(|d| d.weights()[i].to_string()));
                    row
                })
                .collect();
            let mut out = table(&headers, &rows);
            if let Some(gap) = tv_gap {
                let _ = writeln!(out, "tv_gap {gap}");
            }
            out
        }
    })
}

fn mle_output(labels: &[String], report: &MleReport, format: Format) -> String {
    match format {
        Format::Json => json(&MleOut { labels, report }),
        Format::Table => {
            let rows: Vec<Vec<String>> = report
                .theta
                .iter()
                .enumerate()
                .map(|(i, t)| vec![format!("theta[{i}]"), t.to_string()])
                .collect();
            let mut out = table(&["parameter", "estimate"], &rows);
            let _ = writeln!(out, "log_likelihood {}", report.log_likelihood);
            let _ = writeln!(out, "empirical_kl {}", report.empirical_kl);
            let _ = writeln!(out, "degenerate {}", report.degenerate);
            out
        }
    }
}

fn cmd_mle(path: &Path, tol: Option<f64>, format: Format) -> Outcome {
    let doc: MleDoc = read_json(path)?;
    let labels: Vec<String> = doc.data.keys().cloned().collect();
    let model = ModelRegistry::default().build(&doc.model, &labels)?;
    let pairs: Vec<(String, u64)> = doc.data.into_iter().collect();
    let data = Dataset::from_pairs(model.space().clone(), &pairs)?;
    let tol = resolve_tol(tol, doc.tol, 1e-8)?;
    let space_labels = model.space().labels();
    match mle_fit(&model, &data, tol) {
        Ok(report) => Ok(mle_output(space_labels, &report, format)),
        Err(Error::DegenerateData(report)) => {
            let msg = Error::DegenerateData(report.clone()).to_string();
            Err(Failure::Problem(
                msg,
                Some(mle_output(space_labels, &report, format)),
            ))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_converge(path: &Path, tol: Option<f64>, format: Format) -> Outcome {
    let doc: ConvergeDoc = read_json(path)?;
    let base = Distribution::try_from(doc.base)?;
    let opts = SolverOptions {
        tol: resolve_tol(tol, doc.tol, SolverOptions::default().tol)?,
        ..SolverOptions::default()
    };
    let report = convergence_experiment(&base, doc.mean_target, &doc.n_list, &opts)?;
    Ok(match format {
        Format::Json => json(&report.to_doc()),
        Format::Table => {
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.draws.to_string(),
                        r.sum_target.to_string(),
                        r.tv_gap.to_string(),
                    ]
                })
                .collect();
            table(&["N", "sum_target", "tv_gap"], &rows)
        }
    })
}

fn scalar_output(key: &str, value: impl Serialize + std::fmt::Display, format: Format) -> String {
    match format {
        Format::Json => {
            let mut map = IndexMap::new();
            map.insert(
                key.to_string(),
                serde_json::to_value(&value).expect("scalar serializes"),
            );
            json(&map)
        }
        Format::Table => format!("{key} {value}\n"),
    }
}

fn cmd_info(cmd: &InfoCommand, format: Format) -> Outcome {
    match cmd {
        InfoCommand::Entropy { dist } => {
            let d = read_distribution(dist)?;
            Ok(scalar_output("entropy", shannon_entropy(&d), format))
        }
        InfoCommand::Kl { q, p } => {
            let kl = relative_entropy(&read_distribution(q)?, &read_distribution(p)?)?;
            Ok(scalar_output("kl", kl, format))
        }
        InfoCommand::Tv { a, b } => {
            let tv = read_distribution(a)?.tv_distance(&read_distribution(b)?)?;
            Ok(scalar_output("tv", tv, format))
        }
        InfoCommand::Gain { p, q } => Ok(scalar_output("gain", information_gain(*p, *q)?, format)),
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Info(cmd) => cmd_info(cmd, cli.format),
        Command::Update { problem } => cmd_update(problem, cli.tol, cli.format),
        Command::Maxent { problem } => cmd_maxent(problem, cli.tol, cli.format),
        Command::Bayes { method, case } => cmd_bayes(case, *method, cli.tol, cli.format),
        Command::Mle { input } => cmd_mle(input, cli.tol, cli.format),
        Command::Converge { input } => cmd_converge(input, cli.tol, cli.format),
    }
}

fn emit(text: &str, target: Option<&Path>, stdout: &mut dyn Write) -> std::io::Result<()> {
    match target {
        Some(path) => fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

/// Runs the command line against explicit output streams; returns the exit status.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let (code, text) = match dispatch(&cli) {
        Ok(text) => (0, Some(text)),
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            (1, None)
        }
        Err(Failure::Problem(msg, partial)) => {
            let _ = writeln!(stderr, "error: {msg}");
            (2, partial)
        }
    };
    if let Some(text) = text {
        if let Err(e) = emit(&text, cli.output.as_deref(), stdout) {
            let _ = writeln!(stderr, "error: cannot write output: {e}");
            return 1;
        }
    }
    code
}

/// Runs against the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
