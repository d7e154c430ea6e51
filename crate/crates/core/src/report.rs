//! Result rows for single runs and sweeps, with CSV and JSON output.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{acceptance_bounds, EngineConfig, EngineError};
use crate::provers::ProverStrategy;
use crate::zoo::ProtocolBundle;

pub const CSV_HEADER: [&str; 8] = [
    "input",
    "prover",
    "p_acc_lower",
    "p_acc_upper",
    "p_rej_lower",
    "interactions",
    "steps",
    "wallclock_s",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub input: String,
    pub prover: String,
    pub p_acc_lower: f64,
    pub p_acc_upper: f64,
    pub p_rej_lower: f64,
    pub interactions: Option<usize>,
    pub steps: usize,
    pub wallclock_s: f64,
}

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Snaps values within `tau` of 0 or 1 and clamps to `[0,1]`.
pub fn clean_probability(p: f64, tau: f64) -> f64 {
    let p = if p.abs() <= tau {
        0.0
    } else if (p - 1.0).abs() <= tau {
        1.0
    } else {
        p
    };
    p.clamp(0.0, 1.0)
}

impl ReportRow {
    fn normalized(mut self, tau: f64) -> Self {
        self.p_acc_lower = sig12(clean_probability(self.p_acc_lower, tau));
        self.p_acc_upper = sig12(clean_probability(self.p_acc_upper, tau)).max(self.p_acc_lower);
        self.p_rej_lower = sig12(clean_probability(self.p_rej_lower, tau));
        self.wallclock_s = sig12(self.wallclock_s);
        self
    }

    fn record(&self) -> [String; 8] {
        let num = |x: f64| sig12(x).to_string();
        [
            self.input.clone(),
            self.prover.clone(),
            num(self.p_acc_lower),
            num(self.p_acc_upper),
            num(self.p_rej_lower),
            self.interactions.map(|k| k.to_string()).unwrap_or_default(),
            self.steps.to_string(),
            num(self.wallclock_s),
        ]
    }
}

/// Runs `p` on `x` and reports the result.
pub fn run_row(
    bundle: &ProtocolBundle,
    p: &dyn ProverStrategy,
    x: &str,
    cfg: &EngineConfig,
) -> Result<ReportRow, EngineError> {
    let start = Instant::now();
    let r = bundle.run(p, x, cfg)?;
    let (lo, hi) = acceptance_bounds(&r);
    Ok(ReportRow {
        input: x.to_string(),
        prover: p.id(),
        p_acc_lower: lo,
        p_acc_upper: hi,
        p_rej_lower: r.p_rej,
        interactions: r.interactions,
        steps: r.steps_taken,
        wallclock_s: start.elapsed().as_secs_f64(),
    }
    .normalized(cfg.tau))
}

/// Worst case over the bundle's adversary family on `x`.
pub fn worst_row(bundle: &ProtocolBundle, x: &str, cfg: &EngineConfig, budget: usize) -> Result<ReportRow, EngineError> {
    let start = Instant::now();
    let out = bundle.worst_case(x, cfg, budget)?;
    Ok(ReportRow {
        input: x.to_string(),
        prover: out.prover_id,
        p_acc_lower: out.p_acc_lower,
        p_acc_upper: out.p_acc_upper,
        p_rej_lower: out.p_rej_lower,
        interactions: out.interactions,
        steps: out.steps,
        wallclock_s: start.elapsed().as_secs_f64(),
    }
    .normalized(cfg.tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Honest,
    Worst { budget: usize },
}

/// Evaluates every input on `threads` worker threads; rows come back in input
/// order whatever the thread count. `config` gives the engine settings per input.
pub fn sweep<F>(
    bundle: &ProtocolBundle,
    inputs: &[String],
    mode: SweepMode,
    config: F,
    threads: usize,
) -> Result<Vec<ReportRow>, EngineError>
where
    F: Fn(&str) -> EngineConfig + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| EngineError::Config(e.to_string()))?;
    pool.install(|| {
        inputs
            .par_iter()
            .map(|x| {
                let cfg = config(x);
                match mode {
                    SweepMode::Honest => run_row(bundle, bundle.honest.as_ref(), x, &cfg),
                    SweepMode::Worst { budget } => worst_row(bundle, x, &cfg, budget),
                }
            })
            .collect()
    })
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[ReportRow], out: W) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(out, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::zero_public_protocol;

    #[test]
    fn rounding() {
        assert_eq!(sig12(0.1 + 0.2), 0.3);
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(clean_probability(1.0 + 1e-12, 1e-9), 1.0);
        assert_eq!(clean_probability(-1e-12, 1e-9), 0.0);
    }

    #[test]
    fn csv_layout() {
        let p = zero_public_protocol().unwrap();
        let row = run_row(&p, p.honest.as_ref(), "10", &p.engine_config("10")).unwrap();
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("10,honest,1,1,0,,4,"));
    }

    #[test]
    fn sweep_is_deterministic() {
        let p = zero_public_protocol().unwrap();
        let inputs: Vec<String> = ["", "0", "1", "10", "11", "010"].iter().map(|s| s.to_string()).collect();
        let strip = |rows: Vec<ReportRow>| -> Vec<ReportRow> {
            rows.into_iter().map(|r| ReportRow { wallclock_s: 0.0, ..r }).collect()
        };
        let mode = SweepMode::Worst { budget: 10_000 };
        let a = strip(sweep(&p, &inputs, mode, |x| p.engine_config(x), 1).unwrap());
        let b = strip(sweep(&p, &inputs, mode, |x| p.engine_config(x), 4).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.input.as_str()).collect::<Vec<_>>(), ["", "0", "1", "10", "11", "010"]);
    }
}
