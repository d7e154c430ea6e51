use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::sync::Arc;

use thiserror::Error;

use qip_core::automata::{inputs_up_to, validate_public, validate_wellformed, HeadKind, WellformednessFailure};
use qip_core::engine::{format_mcomp, format_trace, run_mcomp, trace_protocol, EngineConfig, EngineError};
use qip_core::linalg::ZERO;
use qip_core::provers::{
    check_classical, check_committed, identity_prover, CheckReport, HistoryResponder, Prover, ProverError,
};
use qip_core::report::{run_row, sweep as run_sweep, worst_row, write_csv, write_json, ReportRow, SweepMode};
use qip_core::specfile::{SpecFile, SpecFileError};
use qip_core::zoo::{builtin, AdversaryFamily, ProtocolBundle, ZooError};

use crate::{CheckArgs, Common, ExportArgs, Family, Format, RunArgs, Select, SweepArgs, TraceArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Engine(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Engine(_) => 5,
            CliError::Budget(_) => 6,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Budget { .. } => CliError::Budget(e.to_string()),
            other => CliError::Engine(other.to_string()),
        }
    }
}

impl From<ZooError> for CliError {
    fn from(e: ZooError) -> Self {
        match e {
            ZooError::Unknown(_) => CliError::Usage(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SpecFileError> for CliError {
    fn from(e: SpecFileError) -> Self {
        match e {
            SpecFileError::Parse { .. } => CliError::Parse(e.to_string()),
            SpecFileError::Invalid(_) => CliError::Validation(e.to_string()),
            SpecFileError::Zoo(z) => z.into(),
        }
    }
}

fn io_error(path: &std::path::Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn load(c: &Common) -> Result<ProtocolBundle, CliError> {
    if let Some(name) = c.spec.strip_prefix("builtin:") {
        return Ok(builtin(name, c.n)?);
    }
    let path = std::path::Path::new(&c.spec);
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let file = SpecFile::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if let (Some(name), Some(n)) = (&file.builtin, c.n) {
        if file.params.get("N") != Some(&n) {
            return Ok(builtin(name, Some(n))?);
        }
    }
    Ok(file.to_bundle()?)
}

fn engine_config(p: &ProtocolBundle, c: &Common, x: &str, count_interactions: bool) -> EngineConfig {
    let mut cfg = match c.max_steps {
        Some(m) => EngineConfig::with_max_steps(m),
        None => p.engine_config(x),
    };
    cfg.tau = c.tau;
    cfg.prune_threshold = c.prune;
    if let Some(t) = c.tape_trunc {
        cfg.tape_truncation = t;
    }
    cfg.count_interactions = count_interactions;
    cfg
}

fn select_prover(p: &ProtocolBundle, name: &str, x: &str) -> Result<Prover, CliError> {
    match name {
        "honest" => Ok(p.honest.clone()),
        "identity" => Ok(identity_prover()),
        "eraser" => Ok(Arc::new(HistoryResponder::eraser())),
        "never-edit" => Ok(Arc::new(HistoryResponder::never_edit())),
        other => {
            if let AdversaryFamily::Strategies(family) = &p.adversaries {
                if let Some(q) = family(x).into_iter().find(|q| q.id() == other) {
                    return Ok(q);
                }
            }
            Err(CliError::Usage(format!("unknown prover {other:?}")))
        }
    }
}

fn emit(c: &Common, text: &str) -> Result<(), CliError> {
    match &c.out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn emit_rows(c: &Common, rows: &[ReportRow]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match c.format {
        Format::Csv => write_csv(rows, &mut buf).map_err(|e| CliError::Io(e.to_string()))?,
        Format::Json => {
            write_json(rows, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    emit(c, &String::from_utf8_lossy(&buf))
}

fn check_input(p: &ProtocolBundle, x: &str) -> Result<(), CliError> {
    p.verifier
        .tape(x)
        .map(|_| ())
        .map_err(|e| CliError::Usage(format!("input {x:?}: {e}")))
}

pub fn run(a: &RunArgs) -> Result<(), CliError> {
    let p = load(&a.common)?;
    check_input(&p, &a.input)?;
    let cfg = engine_config(&p, &a.common, &a.input, a.count_interactions);
    let row = if a.prover == "worst" {
        worst_row(&p, &a.input, &cfg, a.budget)?
    } else {
        let prover = select_prover(&p, &a.prover, &a.input)?;
        run_row(&p, prover.as_ref(), &a.input, &cfg)?
    };
    emit_rows(&a.common, &[row])
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let p = load(&a.common)?;
    let mut inputs = match &a.inputs {
        Some(list) => list.clone(),
        None => inputs_up_to(p.verifier.alphabets.input(), a.max_len)
            .into_iter()
            .filter(|x| x.chars().count() >= a.min_len)
            .collect(),
    };
    for x in &inputs {
        check_input(&p, x)?;
    }
    if a.select != Select::All {
        if p.language.is_none() {
            return Err(CliError::Usage(format!("{} has no language to select members by", p.name)));
        }
        let want = a.select == Select::Members;
        inputs.retain(|x| p.in_language(x) == Some(want));
    }
    if a.odd_length {
        inputs.retain(|x| x.chars().count() % 2 == 1);
    }
    let mode = match a.family {
        Family::Honest => SweepMode::Honest,
        Family::Worst => SweepMode::Worst { budget: a.budget },
    };
    let rows = run_sweep(
        &p,
        &inputs,
        mode,
        |x| engine_config(&p, &a.common, x, a.count_interactions),
        a.threads,
    )?;
    emit_rows(&a.common, &rows)
}

pub fn trace(a: &TraceArgs) -> Result<(), CliError> {
    let p = load(&a.common)?;
    check_input(&p, &a.input)?;
    let cfg = engine_config(&p, &a.common, &a.input, false);
    let text = if a.mcomp {
        let t = run_mcomp(&p.verifier, &a.input, &cfg)?;
        let masses: Vec<String> = t.query_masses().iter().map(|m| format!("{m}")).collect();
        format!("{}query_masses: [{}]\n", format_mcomp(&p.verifier, &t), masses.join(", "))
    } else {
        let prover = select_prover(&p, &a.prover, &a.input)?;
        let (r, steps) = trace_protocol(&p.verifier, prover.as_ref(), &a.input, &cfg)?;
        format!(
            "{}result p_acc={:.12} p_rej={:.12} residual={:.12} pruned={:.3e} steps={}\n",
            format_trace(&p.verifier, &steps),
            r.p_acc,
            r.p_rej,
            r.residual,
            r.pruned,
            r.steps_taken
        )
    };
    emit(&a.common, &text)
}

pub fn export(a: &ExportArgs) -> Result<(), CliError> {
    let p = builtin(&a.name, a.n)?;
    let text = SpecFile::from_bundle(&p).to_toml();
    match &a.out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

struct Checks {
    out: String,
    failed: usize,
}

impl Checks {
    fn rule(&mut self, name: &str, problems: Vec<String>) {
        if problems.is_empty() {
            let _ = writeln!(self.out, "PASS {name}");
        } else {
            self.failed += 1;
            let _ = writeln!(self.out, "FAIL {name}");
            for p in problems.iter().take(20) {
                let _ = writeln!(self.out, "  {p}");
            }
            if problems.len() > 20 {
                let _ = writeln!(self.out, "  ... {} more", problems.len() - 20);
            }
        }
    }
}

fn describe(f: &WellformednessFailure) -> String {
    match f {
        WellformednessFailure::MissingImage { symbol, state, comm } => {
            format!("V_{symbol}|{state},{comm}⟩ has no image")
        }
        WellformednessFailure::ColumnOverlap { symbol, a, b, defect } => {
            format!("V_{symbol}: columns |{},{}⟩ and |{},{}⟩ deviate by {defect:.3e}", a.0, a.1, b.0, b.1)
        }
        WellformednessFailure::StepOperator { input, defect } => {
            format!("step operator on {input:?} has unitarity defect {defect:.3e}")
        }
    }
}

/// Rounds over which the honest prover's matrices are inspected for `x`.
fn prover_rounds(p: &ProtocolBundle, x: &str) -> usize {
    let n = x.chars().count();
    match p.verifier.kind {
        HeadKind::OneWay => n + 1,
        HeadKind::TwoWay => (3 * n + 4).min(24),
    }
}

/// Runs a prover check, shortening the horizon if the reachable tape set
/// outgrows the explorer.
fn prover_check<F>(check: F, rounds: usize) -> Result<(CheckReport, usize), CliError>
where
    F: Fn(usize) -> Result<CheckReport, ProverError>,
{
    let mut rounds = rounds;
    loop {
        match check(rounds) {
            Ok(r) => return Ok((r, rounds)),
            Err(ProverError::ReachableOverflow { round, .. }) if round > 1 => rounds = round - 1,
            Err(e) => return Err(CliError::Engine(e.to_string())),
        }
    }
}

pub fn check(a: &CheckArgs) -> Result<(), CliError> {
    let c = &a.common;
    let p = load(c)?;
    let v = &p.verifier;
    let mut checks = Checks {
        out: String::new(),
        failed: 0,
    };

    let report = validate_wellformed(v, a.n_max, c.tau);
    let mut problems: Vec<String> = report.failures.iter().map(describe).collect();
    let comm = v.alphabets.comm();
    for (sym, m) in v.transitions() {
        let mut hit = vec![false; m.dim()];
        for (row, _, amp) in m.entries() {
            if amp != ZERO {
                hit[row] = true;
            }
        }
        for (row, _) in hit.iter().enumerate().filter(|(_, h)| !**h) {
            let (q, g) = v.split_local(row);
            problems.push(format!("|{},{}⟩ is not an image of V_{sym}", v.states.name(q), comm[g]));
        }
    }
    checks.rule(
        &format!("well-formed (|x| ≤ {}, max defect {:.1e})", a.n_max, report.max_defect),
        problems,
    );

    let public = validate_public(v).map_err(|e| CliError::Validation(e.to_string()))?;
    if p.claims.public {
        let problems = public
            .violations
            .iter()
            .map(|v| {
                format!(
                    "V_{}|{},{}⟩ → {} writes {} instead of {}",
                    v.symbol,
                    v.state,
                    v.read,
                    v.target,
                    v.written,
                    v.expected.as_deref().unwrap_or("an announcement")
                )
            })
            .collect();
        checks.rule("public", problems);
    }

    let small = inputs_up_to(v.alphabets.input(), a.n_max.min(3));
    let k = v.num_comm();
    for (flag, name) in [
        (p.claims.classical_prover, "classical prover"),
        (p.claims.committed_prover, "committed prover"),
    ] {
        if !flag {
            continue;
        }
        let mut problems = Vec::new();
        for x in &small {
            let run = |rounds: usize| {
                if name == "classical prover" {
                    check_classical(p.honest.as_ref(), x, rounds, k, c.tau)
                } else {
                    check_committed(p.honest.as_ref(), x, rounds, k, c.tau)
                }
            };
            let (r, _) = prover_check(run, prover_rounds(&p, x))?;
            problems.extend(r.failures.iter().map(|f| format!("{x:?} round {}: {}", f.round, f.detail)));
        }
        checks.rule(name, problems);
    }

    let inputs = inputs_up_to(v.alphabets.input(), a.n_max);
    if let (Some(bound), Some(_)) = (p.claims.completeness, &p.language) {
        let mut problems = Vec::new();
        for x in inputs.iter().filter(|x| p.in_language(x) == Some(true)) {
            let r = p.run(p.honest.as_ref(), x, &engine_config(&p, c, x, false))?;
            if r.p_acc < bound - c.tau {
                problems.push(format!("{x:?}: honest p_acc = {}", r.p_acc));
            }
        }
        checks.rule(&format!("completeness ≥ {bound}"), problems);
    }
    if let (Some(bound), Some(_)) = (p.claims.soundness, &p.language) {
        let mut problems = Vec::new();
        let negatives = inputs_up_to(v.alphabets.input(), a.sound_max);
        for x in negatives.iter().filter(|x| p.in_language(x) == Some(false)) {
            let out = p.worst_case(x, &engine_config(&p, c, x, false), a.budget)?;
            if out.p_acc_upper > 1.0 - bound + c.tau {
                problems.push(format!("{x:?}: {} accepts with up to {}", out.prover_id, out.p_acc_upper));
            }
        }
        checks.rule(&format!("soundness ≥ {bound} (|x| ≤ {})", a.sound_max), problems);
    }
    if let Some(bound) = p.claims.interaction_bound {
        let mut problems = Vec::new();
        for x in &inputs {
            let r = p.run(p.honest.as_ref(), x, &engine_config(&p, c, x, true))?;
            let count = r.interactions.unwrap_or(0);
            if count > bound {
                problems.push(format!("{x:?}: {count} interactions"));
            }
        }
        checks.rule(&format!("interactions ≤ {bound}"), problems);
    }

    emit(c, &checks.out)?;
    if checks.failed > 0 {
        return Err(CliError::Validation(format!("{} rule(s) failed", checks.failed)));
    }
    Ok(())
}
