//! The `bvforge` command line: `bvforge <command> <model-file> [flags]`.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{format_rational, Generator, LocalFunction};
use crate::bracket::{antibracket_variational, bv_laplacian, BracketError};
use crate::jet::{check_noether, euler_lagrange, is_total_divergence, JetError};
use crate::linfty::{check_linfty, extract_brackets, mc_residual, LInftyError, LInftyStructure, Vector};
use crate::master::{build_stage_action, master_residual, quantum_master_check, solve_master, BVAction, MasterError};
use crate::model::{ModelError, ModelSpec};
use crate::syntax::{model_digest, parse_bounds, parse_expression_in, parse_model, ParseError, Scope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    El,
    Divergence,
    Noether,
    Bracket,
    Delta,
    Build,
    Solve,
    Residual,
    Qme,
    Extract,
    CheckLinfty,
    Mc,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "bvforge", version, about = "Exact antifield (BV) computations on gauge-theory models")]
pub struct Args {
    pub command: Command,
    /// Model document (.bv)
    pub model: PathBuf,
    /// Maximal antifield number for `solve`
    #[arg(short = 'K', default_value_t = 3)]
    pub k: usize,
    /// Maximal bracket arity for `extract`, `check-linfty` and `mc`
    #[arg(short = 'n', default_value_t = 3)]
    pub n: usize,
    /// Field for `el` (all fields when absent)
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Overrides the model bounds, e.g. `jet=2,deg=3`
    #[arg(long)]
    pub bounds: Option<String>,
    /// Expression operand; `bracket` takes two
    #[arg(short = 'e', long = "expr")]
    pub exprs: Vec<String>,
    /// Stage for `build`, `residual`, `qme` and `delta` (highest available when absent)
    #[arg(long)]
    pub stage: Option<u8>,
    /// Coefficient of `t^j` for `mc`, one flag per power, linear in fields
    #[arg(long)]
    pub theta: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("--{flag}: {source}")]
    Flag { flag: String, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Bracket(#[from] BracketError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    LInfty(#[from] LInftyError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub label: String,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Output {
    pub label: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsUsed {
    pub max_jet_order: usize,
    pub max_poly_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub command: String,
    pub model_digest: String,
    pub pass: bool,
    /// Failing checks only.
    pub residuals: Vec<Entry>,
    pub bounds: BoundsUsed,
    pub results: Vec<Output>,
}

impl Report {
    fn new(command: Command, m: &ModelSpec) -> Self {
        Report {
            command: command.name(),
            model_digest: model_digest(m),
            pass: true,
            residuals: Vec::new(),
            bounds: BoundsUsed { max_jet_order: m.bounds.max_jet_order, max_poly_degree: m.bounds.max_poly_degree },
            results: Vec::new(),
        }
    }

    fn output(&mut self, label: impl Into<String>, value: impl ToString) {
        self.results.push(Output { label: label.into(), value: value.to_string() });
    }

    fn check(&mut self, label: impl Into<String>, residual: impl ToString, ok: bool) {
        if !ok {
            self.pass = false;
            self.residuals.push(Entry { label: label.into(), residual: residual.to_string() });
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(self).expect("plain data");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut s = format!(
                    "command: {}\nmodel: {}\nbounds: jet={} deg={}\n",
                    self.command, self.model_digest, self.bounds.max_jet_order, self.bounds.max_poly_degree
                );
                for o in &self.results {
                    s.push_str(&format!("{} = {}\n", o.label, o.value));
                }
                if self.residuals.is_empty() {
                    s.push_str("residuals: none\n");
                } else {
                    s.push_str("residuals:\n");
                    for e in &self.residuals {
                        s.push_str(&format!("  {}: {}\n", e.label, e.residual));
                    }
                }
                s.push_str(if self.pass { "status: pass\n" } else { "status: fail\n" });
                s
            }
        }
    }
}

fn load_model(args: &Args) -> Result<ModelSpec, CliError> {
    let path = args.model.display().to_string();
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| CliError::Io { path: path.clone(), message: e.to_string() })?;
    let mut m = parse_model(&text).map_err(|source| CliError::Parse { path, source })?;
    if let Some(b) = &args.bounds {
        m.bounds =
            parse_bounds(b, 1, 1, m.bounds).map_err(|source| CliError::Flag { flag: "bounds".into(), source })?;
        m.validate()?;
    }
    Ok(m)
}

fn scope_of(m: &ModelSpec) -> Scope {
    Scope { dim: m.dim, fields: m.fields.clone(), gauge: m.gauge.clone(), max_jet_order: m.bounds.max_jet_order }
}

fn expressions(args: &Args, m: &ModelSpec, count: usize) -> Result<Vec<LocalFunction>, CliError> {
    if args.exprs.len() != count {
        return Err(CliError::Usage(format!("expected {count} --expr operand(s), got {}", args.exprs.len())));
    }
    let scope = scope_of(m);
    args.exprs
        .iter()
        .map(|e| parse_expression_in(e, &scope).map_err(|source| CliError::Flag { flag: "expr".into(), source }))
        .collect()
}

fn highest_stage(m: &ModelSpec) -> u8 {
    if m.structure.is_some() {
        2
    } else if m.has_gauge_structure() {
        1
    } else {
        0
    }
}

fn stage_action(args: &Args, m: &ModelSpec) -> Result<BVAction, CliError> {
    Ok(build_stage_action(m, args.stage.unwrap_or_else(|| highest_stage(m)))?)
}

fn action_outputs(report: &mut Report, s: &BVAction) {
    for (k, piece) in &s.by_antifield {
        report.output(format!("S_{k}"), piece);
    }
}

fn vector_text(l: &LInftyStructure, v: &Vector) -> String {
    if v.is_empty() {
        return "0".into();
    }
    if l.basis.iter().all(|b| b.generator.is_some()) {
        let mut f = LocalFunction::zero();
        for (i, c) in v {
            f += &LocalFunction::generator(l.basis[*i].generator.clone().expect("checked")).scale(c);
        }
        return f.to_string();
    }
    v.iter().map(|(i, c)| format!("{}*{}", format_rational(c), l.basis[*i].label)).collect::<Vec<_>>().join(" + ")
}

fn tuple_text(l: &LInftyStructure, t: &[usize]) -> String {
    t.iter().map(|&i| l.basis[i].label.as_str()).collect::<Vec<_>>().join(", ")
}

fn solved_structure(m: &ModelSpec, n: usize) -> Result<LInftyStructure, CliError> {
    let (s, _) = solve_master(m, n)?;
    Ok(extract_brackets(&s, n)?)
}

/// Runs one command on an already parsed model.
pub fn execute(args: &Args, m: &ModelSpec) -> Result<Report, CliError> {
    let mut report = Report::new(args.command, m);
    match args.command {
        Command::El => {
            let fields: Vec<String> = match &args.field {
                Some(a) if m.fields.contains(a) => vec![a.clone()],
                Some(a) => return Err(ModelError::UnknownField(a.clone()).into()),
                None => m.fields.clone(),
            };
            for a in fields {
                report.output(format!("E_{a}"), euler_lagrange(&m.lagrangian, &a));
            }
        }
        Command::Divergence => {
            let f = if args.exprs.is_empty() { m.lagrangian.clone() } else { expressions(args, m, 1)?.remove(0) };
            let ok = is_total_divergence(&f, m.dim)?;
            if m.dim == 0 {
                report.check("value", &f, ok);
            } else {
                for a in &m.fields {
                    let e = euler_lagrange(&f, a);
                    report.check(format!("E_{a}"), &e, e.is_zero());
                }
            }
        }
        Command::Noether => {
            let r = check_noether(m);
            for (alpha, res) in &r.residuals {
                report.output(format!("noether[{alpha}]"), res);
                report.check(alpha.clone(), res, res.is_zero());
            }
        }
        Command::Bracket => {
            let ops = expressions(args, m, 2)?;
            report.output("bracket", antibracket_variational(&ops[0], &ops[1]));
        }
        Command::Delta => {
            let f =
                if args.exprs.is_empty() { stage_action(args, m)?.total } else { expressions(args, m, 1)?.remove(0) };
            report.output("delta", bv_laplacian(&f)?);
        }
        Command::Build => {
            let s = stage_action(args, m)?;
            action_outputs(&mut report, &s);
        }
        Command::Residual => {
            let s = stage_action(args, m)?;
            for (k, r) in master_residual(&s) {
                report.check(format!("(S,S)_{k}"), &r, false);
            }
        }
        Command::Solve => {
            let (s, records) = solve_master(m, args.k)?;
            action_outputs(&mut report, &s);
            report.output("solved_up_to", s.solved_up_to);
            for rec in &records {
                let value = match &rec.correction {
                    Some(x) => format!("lifted, correction {x}"),
                    None => format!("not lifted within {} ansatz monomials", rec.ansatz_monomials),
                };
                report.output(format!("stratum {}", rec.antifield_number), value);
                report.check(format!("obstruction {}", rec.antifield_number), &rec.obstruction, rec.lifted);
            }
            for (k, r) in &s.residual {
                report.check(format!("(S,S)_{k}"), r, false);
            }
        }
        Command::Qme => {
            let s = if args.exprs.is_empty() {
                stage_action(args, m)?
            } else {
                BVAction::from_total(expressions(args, m, 1)?.remove(0), m.dim)
            };
            let q = quantum_master_check(&s)?;
            report.output("(S,S)", &q.classical);
            report.output("delta S", &q.delta);
            report.output("(S,S) - delta S", &q.quantum_residual);
            report.check("quantum", &q.quantum_residual, q.satisfied());
        }
        Command::Extract => {
            let l = solved_structure(m, args.n)?;
            for (j, v) in &l.differential {
                report.output(format!("d({})", l.basis[*j].label), vector_text(&l, v));
            }
            for (n, table) in &l.brackets {
                for (t, v) in table {
                    report.output(format!("l{n}({})", tuple_text(&l, t)), vector_text(&l, v));
                }
            }
        }
        Command::CheckLinfty => {
            let l = solved_structure(m, args.n)?;
            let r = check_linfty(&l, args.n);
            report.output("tuples", r.residuals.len());
            for ((n, t), v) in r.failures() {
                report.check(format!("arity {n} ({})", tuple_text(&l, t)), vector_text(&l, v), false);
            }
            for (t, v) in r.homotopy_jacobi.iter().filter(|(_, v)| !v.is_empty()) {
                report.check(format!("homotopy jacobi ({})", tuple_text(&l, t)), vector_text(&l, v), false);
            }
        }
        Command::Mc => {
            let l = solved_structure(m, args.n)?;
            let scope = scope_of(m);
            let index: BTreeMap<&Generator, usize> =
                l.basis.iter().enumerate().filter_map(|(i, b)| b.generator.as_ref().map(|g| (g, i))).collect();
            let mut theta = Vec::new();
            for text in &args.theta {
                let f = parse_expression_in(text, &scope)
                    .map_err(|source| CliError::Flag { flag: "theta".into(), source })?;
                let mut v = Vector::new();
                for (factors, c) in f.terms() {
                    let [(g, 1)] = factors.as_slice() else {
                        return Err(CliError::Usage(format!("theta must be linear in basis generators, found {f}")));
                    };
                    let Some(&i) = index.get(g) else {
                        return Err(CliError::Usage(format!("{g} is not a basis element of the extracted structure")));
                    };
                    v.insert(i, c.clone());
                }
                theta.push(v);
            }
            for (p, v) in mc_residual(&l, &theta)?.iter().enumerate() {
                report.check(format!("t^{}", p + 1), vector_text(&l, v), v.is_empty());
            }
        }
    }
    Ok(report)
}

/// Parses `args`, runs the command and writes the report; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = load_model(&args).and_then(|m| execute(&args, &m));
    match result {
        Ok(report) => {
            let _ = out.write_all(report.render(args.format).as_bytes());
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
