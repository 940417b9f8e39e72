//! The equality saturation driver: match, apply, rebuild, repeat —
//! under iteration, node-count, and wall-clock budgets.

use std::time::{Duration, Instant};

use crate::ematch::{apply_match, find_matches, ChangeReport};
use crate::eqsat::EGraphView;
use crate::ir::{Diagnostic, Module};
use crate::patterns::{rhs_actions, BuildAction, MatchProgram};
use crate::rebuild::{rebuild, PendingUnions};

/// Resource budgets for one saturation run. Budgets are checked between
/// iterations, so the e-graph is always left congruence-closed.
#[derive(Clone, Copy, Debug)]
pub struct SaturationLimits {
    pub max_iterations: usize,
    pub max_enodes: usize,
    pub time_budget: Duration,
}

impl Default for SaturationLimits {
    fn default() -> SaturationLimits {
        SaturationLimits {
            max_iterations: 32,
            max_enodes: 10_000,
            time_budget: Duration::from_secs(10),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StopReason {
    /// A whole iteration changed nothing: the e-graph is closed under
    /// the rule set.
    Saturated,
    IterationLimit,
    NodeLimit,
    TimeLimit,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Saturated => "saturated",
            StopReason::IterationLimit => "iteration_limit",
            StopReason::NodeLimit => "node_limit",
            StopReason::TimeLimit => "time_limit",
        }
    }
}

/// Per-iteration accounting: matches found, and how many of their
/// applications actually changed the e-graph.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct IterationStats {
    pub matches: usize,
    pub applies: usize,
}

#[derive(Clone, Debug)]
pub struct SaturationReport {
    pub iterations: usize,
    pub final_enodes: usize,
    pub final_eclasses: usize,
    pub stop: StopReason,
    pub per_iteration: Vec<IterationStats>,
}

/// Runs equality saturation on one e-graph. Every iteration collects
/// all matches first, applies them all (batched, so application order
/// cannot hide a match), then rebuilds. On an apply-time error the
/// e-graph is rebuilt before the error is returned, leaving it in a
/// verified state.
pub fn saturate(
    m: &mut Module,
    egraph: EGraphView,
    program: &MatchProgram,
    limits: SaturationLimits,
) -> Result<SaturationReport, Diagnostic> {
    let actions: Vec<Vec<BuildAction>> = program.rules.iter().map(rhs_actions).collect();
    let started = Instant::now();
    let mut per_iteration = Vec::new();
    let mut stop = StopReason::IterationLimit;

    while per_iteration.len() < limits.max_iterations {
        if started.elapsed() >= limits.time_budget {
            stop = StopReason::TimeLimit;
            break;
        }
        if egraph.enode_count(m) > limits.max_enodes {
            stop = StopReason::NodeLimit;
            break;
        }

        let matches = find_matches(m, egraph, program);
        let mut iteration_change = ChangeReport::default();
        let mut applies = 0;
        let mut pending = PendingUnions::new();
        let mut apply_error = None;
        for mr in &matches {
            match apply_match(m, egraph, &actions[mr.rule], mr) {
                Ok(report) => {
                    if report.changed() {
                        applies += 1;
                    }
                    pending.extend(report.unions.iter().copied());
                    iteration_change.absorb(report);
                }
                Err(e) => {
                    apply_error = Some(e);
                    break;
                }
            }
        }
        let rebuild_rounds = rebuild(m, egraph, pending)?;
        if let Some(e) = apply_error {
            return Err(e);
        }
        per_iteration.push(IterationStats { matches: matches.len(), applies });

        if !iteration_change.changed() && rebuild_rounds == 0 {
            stop = StopReason::Saturated;
            break;
        }
    }

    Ok(SaturationReport {
        iterations: per_iteration.len(),
        final_enodes: egraph.enode_count(m),
        final_eclasses: egraph.eclass_count(m),
        stop,
        per_iteration,
    })
}

/// Saturates every e-graph in the module, sequentially, under one
/// shared set of limits. Returns one report per e-graph in walk order.
pub fn saturate_module(
    m: &mut Module,
    program: &MatchProgram,
    limits: SaturationLimits,
) -> Result<Vec<SaturationReport>, Diagnostic> {
    let views = crate::eqsat::egraphs(m);
    let mut reports = Vec::with_capacity(views.len());
    for view in views {
        reports.push(saturate(m, view, program, limits)?);
    }
    Ok(reports)
}
