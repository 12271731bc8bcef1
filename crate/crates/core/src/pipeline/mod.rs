//! End-to-end monitoring.
//!
//! The computation is cut into `g` segments. Each branch is a residual formula
//! together with the context it was reached in (consumed events and last time). For
//! every segment, each branch is progressed over every piece the segment can contribute
//! after that context; constant residuals are final and leave the pipeline.

pub mod ingest;
pub mod pieces;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::computation::{build_computation, Computation, ComputationError, Event, SegmentPlan};
use crate::mtl::{finalize, simplify, EvalError, Formula, Time, Verdict};
use crate::smt::{enumerate_piece_verdicts, SmtError, SmtOptions, SolverConfig, DEFAULT_BOOL_BUDGET};
use pieces::{for_each_piece, Context, PieceQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Smt,
    Enumerate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorConfig {
    pub epsilon: Time,
    pub segments: usize,
    /// Computation length `l`; defaults to the largest local time.
    pub length: Option<Time>,
    pub engine: Engine,
    pub solver_command: String,
    /// Distinct residuals the SMT engine collects per branch and segment.
    pub max_verdicts: usize,
    /// Distinct residuals kept after each segment.
    pub branch_cap: usize,
    pub timeout: Duration,
    pub emit_smt: Option<PathBuf>,
}

impl MonitorConfig {
    pub fn new(epsilon: Time, segments: usize, engine: Engine) -> Self {
        MonitorConfig {
            epsilon,
            segments,
            length: None,
            engine,
            solver_command: "z3 -in".into(),
            max_verdicts: 16,
            branch_cap: 64,
            timeout: Duration::from_secs(60),
            emit_smt: None,
        }
    }

    fn smt_options(&self) -> SmtOptions {
        SmtOptions {
            solver: SolverConfig { command: self.solver_command.clone(), timeout: self.timeout },
            bool_budget: DEFAULT_BOOL_BUDGET,
            emit_dir: self.emit_smt.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum MonitorError {
    #[error(transparent)]
    Computation(#[from] ComputationError),
    #[error("max_verdicts and branch_cap must be positive")]
    Config,
    #[error("segment {segment}: {source}")]
    Smt { segment: usize, source: SmtError },
    #[error("segment {segment}: {source}")]
    Eval { segment: usize, source: EvalError },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentReport {
    pub index: usize,
    /// Distinct residuals after this segment, constants included.
    pub branches: Vec<String>,
    pub ms: u128,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonitorReport {
    #[serde(serialize_with = "verdict_names")]
    pub verdicts: BTreeSet<Verdict>,
    pub segments: Vec<SegmentReport>,
    pub truncated: bool,
}

fn verdict_names<S: serde::Serializer>(v: &BTreeSet<Verdict>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl MonitorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let names: Vec<String> = self.verdicts.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("verdicts: {{{}}}\n", names.join(", ")));
        for seg in &self.segments {
            s.push_str(&format!(
                "segment {} ({} ms{}):\n",
                seg.index,
                seg.ms,
                if seg.truncated { ", truncated" } else { "" }
            ));
            for b in &seg.branches {
                s.push_str(&format!("  {b}\n"));
            }
        }
        if self.truncated {
            s.push_str("truncated: the verdict set may be incomplete\n");
        }
        s
    }
}

pub fn monitor(events: Vec<Event>, f: &Formula, cfg: &MonitorConfig) -> Result<MonitorReport, MonitorError> {
    let c = build_computation(events, cfg.epsilon)?;
    monitor_computation(&c, f, cfg)
}

type Branches = BTreeSet<(Formula, Context)>;

pub fn monitor_computation(c: &Computation, f: &Formula, cfg: &MonitorConfig) -> Result<MonitorReport, MonitorError> {
    if cfg.max_verdicts == 0 || cfg.branch_cap == 0 {
        return Err(MonitorError::Config);
    }
    let l = cfg.length.unwrap_or_else(|| c.max_local_time()).max(1);
    let plan = SegmentPlan::new(cfg.segments, l, c.epsilon())?;
    let opts = cfg.smt_options();

    let mut verdicts = BTreeSet::new();
    let mut segments = Vec::new();
    let mut truncated = false;
    let f = simplify(f);
    let mut branches: Branches = BTreeSet::new();
    match f.as_constant() {
        Some(b) => {
            verdicts.insert(Verdict::from_bool(b));
        }
        None if c.is_empty() => {
            verdicts.insert(finalize(&f));
        }
        None => {
            branches.insert((f, Context::initial(c)));
        }
    }

    for k in 1..=cfg.segments {
        if branches.is_empty() {
            break;
        }
        let started = Instant::now();
        let q = PieceQuery { plan, k };
        let list: Vec<&(Formula, Context)> = branches.iter().collect();
        let results: Vec<Result<(Branches, bool), MonitorError>> = list
            .par_iter()
            .map(|(h, ctx)| match cfg.engine {
                Engine::Enumerate => {
                    let mut out = BTreeSet::new();
                    for_each_piece(c, q, ctx, |p| {
                        out.insert((p.advance(ctx, h)?, p.end.clone()));
                        Ok(())
                    })
                    .map_err(|source| MonitorError::Eval { segment: k, source })?;
                    Ok((out, true))
                }
                Engine::Smt => {
                    let r = enumerate_piece_verdicts(c, q, ctx, h, cfg.max_verdicts, &opts)
                        .map_err(|source| MonitorError::Smt { segment: k, source })?;
                    Ok((r.branches, r.complete))
                }
            })
            .collect();
        let mut next: Branches = BTreeSet::new();
        let mut seg_truncated = false;
        for r in results {
            let (b, complete) = r?;
            seg_truncated |= !complete;
            next.extend(b);
        }

        let mut formulas: BTreeSet<Formula> = next.iter().map(|(g, _)| g.clone()).collect();
        if formulas.len() > cfg.branch_cap {
            seg_truncated = true;
            formulas = formulas.into_iter().take(cfg.branch_cap).collect();
            next.retain(|(g, _)| formulas.contains(g));
        }
        branches = BTreeSet::new();
        for (g, ctx) in next {
            match g.as_constant() {
                Some(b) => {
                    verdicts.insert(Verdict::from_bool(b));
                }
                None => {
                    branches.insert((g, ctx));
                }
            }
        }
        truncated |= seg_truncated;
        segments.push(SegmentReport {
            index: k,
            branches: formulas.iter().map(|g| g.to_string()).collect(),
            ms: started.elapsed().as_millis(),
            truncated: seg_truncated,
        });
    }
    verdicts.extend(branches.iter().map(|(g, _)| finalize(g)));
    Ok(MonitorReport { verdicts, segments, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mtl::{parse_spec, State};

    fn skewed_until() -> Vec<Event> {
        vec![
            Event::local(1, 1, State::with_props(["a"])),
            Event::local(1, 4, State::new()),
            Event::local(2, 2, State::with_props(["a"])),
            Event::local(2, 5, State::with_props(["b"])),
        ]
    }

    #[test]
    fn skewed_until_both_verdicts() {
        let f = parse_spec("a U[0,6) b").unwrap();
        let r = monitor(skewed_until(), &f, &MonitorConfig::new(2, 1, Engine::Enumerate)).unwrap();
        assert_eq!(r.verdicts, BTreeSet::from([Verdict::Top, Verdict::Bottom]));
        assert!(!r.truncated);
    }

    #[test]
    fn true_is_true() {
        let r = monitor(skewed_until(), &Formula::True, &MonitorConfig::new(2, 2, Engine::Enumerate)).unwrap();
        assert_eq!(r.verdicts, BTreeSet::from([Verdict::Top]));
        let r = monitor(Vec::new(), &parse_spec("F[0,3) a").unwrap(), &MonitorConfig::new(1, 1, Engine::Enumerate))
            .unwrap();
        assert_eq!(r.verdicts, BTreeSet::from([Verdict::Bottom]));
    }

    #[test]
    fn segmented_response_branch_table() {
        let props: [&[&str]; 9] = [&[], &[], &[], &["r"], &[], &[], &[], &["q"], &["p"]];
        let events = props
            .iter()
            .enumerate()
            .map(|(i, p)| Event::local(1, i as Time + 1, State::with_props(p.iter().copied())))
            .collect();
        let f = parse_spec("F[0,6) r -> (!p U[2,9) q)").unwrap();
        let mut cfg = MonitorConfig::new(1, 3, Engine::Enumerate);
        cfg.length = Some(9);
        let r = monitor(events, &f, &cfg).unwrap();
        assert_eq!(r.verdicts, BTreeSet::from([Verdict::Top]));
        let table: Vec<Vec<String>> = r.segments.iter().map(|s| s.branches.clone()).collect();
        assert_eq!(table[0], vec!["F[0,4) r -> (!p U[0,7) q)".to_string()]);
        assert_eq!(table[1], vec!["!p U[0,4) q".to_string()]);
        assert_eq!(table[2], vec!["true".to_string()]);
    }

    #[test]
    fn report_json_shape() {
        let f = parse_spec("a U[0,6) b").unwrap();
        let r = monitor(skewed_until(), &f, &MonitorConfig::new(2, 1, Engine::Enumerate)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["verdicts"], serde_json::json!(["true", "false"]));
        assert_eq!(v["segments"][0]["index"], 1);
        assert_eq!(v["truncated"], false);
    }
}
