//! Cost-based extraction: pick one e-node per needed e-class, then
//! replace the e-graph with plain SSA code.
//!
//! The objective is tree cost — cost(class) = min over members of
//! op cost plus the cost of each operand class — computed as a least
//! fixpoint, with DAG materialization (every chosen e-node is emitted
//! once even when shared). Classes that never reach a finite cost are
//! exactly those with no acyclic derivation.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::eqsat::{as_eclass_result, is_eclass, EGraphView};
use crate::ir::{Diagnostic, Module, OpId, Producer, ValueId};
use crate::text::SourceDiagnostic;

/// Per-op-name rational costs with a default for unlisted ops.
#[derive(Clone, Debug)]
pub struct CostModel {
    costs: HashMap<String, BigRational>,
    default: BigRational,
}

impl CostModel {
    /// Every op costs 1.
    pub fn unit() -> CostModel {
        CostModel { costs: HashMap::new(), default: BigRational::from_integer(BigInt::from(1)) }
    }

    pub fn set(&mut self, name: &str, cost: BigRational) {
        self.costs.insert(name.to_string(), cost);
    }

    pub fn get(&self, name: &str) -> &BigRational {
        self.costs.get(name).unwrap_or(&self.default)
    }

    /// Parses a `.cost` file: one `op.name <non-negative decimal>` per
    /// line, `default <decimal>` for the fallback (1 when absent).
    /// Blank lines and `//` comments are permitted.
    pub fn parse(text: &str) -> Result<CostModel, SourceDiagnostic> {
        let mut cm = CostModel::unit();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find("//") {
                Some(at) => &raw[..at],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SourceDiagnostic { line: idx + 1, column: 1, message };
            let mut parts = line.split_whitespace();
            let (name, value) = (parts.next().unwrap(), parts.next());
            let value = value.ok_or_else(|| err(format!("expected `{name} <cost>`")))?;
            if parts.next().is_some() {
                return Err(err(format!("trailing input after `{name} {value}`")));
            }
            let cost = parse_decimal(value)
                .ok_or_else(|| err(format!("invalid cost `{value}`: expected a non-negative decimal")))?;
            if name == "default" {
                cm.default = cost;
            } else if crate::dialect::valid_op_name(name) {
                cm.costs.insert(name.to_string(), cost);
            } else {
                return Err(err(format!("invalid operation name `{name}`")));
            }
        }
        Ok(cm)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() || (s.contains('.') && frac_part.is_empty()) {
        return None;
    }
    let all_digits =
        |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let num: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(num, den))
}

/// The cost fixpoint's output: for every finite-cost class, its total
/// cost and the member e-node realizing it (first member in operand
/// order on ties).
#[derive(Clone, Debug, Default)]
pub struct ExtractionChoice {
    pub per_class: HashMap<OpId, (BigRational, ValueId)>,
}

/// Is `v` defined outside the e-graph block (function argument or an
/// op above the e-graph)? Such values cost nothing to reference.
fn defined_outside(m: &Module, egraph: EGraphView, v: ValueId) -> bool {
    match m.producer(v) {
        Producer::BlockArg { block, .. } => block != egraph.block,
        Producer::OpResult { op, .. } => m.op(op).parent() != Some(egraph.block),
    }
}

/// Computes the least fixpoint of class costs under `cm`. Classes the
/// fixpoint never reaches stay absent; if any yielded class is absent,
/// the e-graph has no acyclic extraction and a diagnostic is returned.
pub fn compute_costs(
    m: &Module,
    egraph: EGraphView,
    cm: &CostModel,
) -> Result<ExtractionChoice, Diagnostic> {
    let block_ops = m.block_ops(egraph.block).to_vec();
    // Cost of every inside e-node op (by op), then of every class. A
    // candidate replaces the incumbent only when strictly cheaper; ties
    // keep whichever member attained the minimum first (deterministic,
    // since evaluation follows block and member order). Strictness also
    // keeps every chosen member acyclic: a choice routed through its
    // own class could only tie, never win.
    let mut op_costs: HashMap<OpId, BigRational> = HashMap::new();
    let mut class_costs: HashMap<OpId, (BigRational, usize)> = HashMap::new();

    let value_cost = |m: &Module,
                      op_costs: &HashMap<OpId, BigRational>,
                      class_costs: &HashMap<OpId, (BigRational, usize)>,
                      v: ValueId|
     -> Option<BigRational> {
        if defined_outside(m, egraph, v) {
            return Some(BigRational::zero());
        }
        if let Some(class) = as_eclass_result(m, v) {
            return class_costs.get(&class).map(|(c, _)| c.clone());
        }
        op_costs.get(&m.defining_op(v).expect("inside values have defining ops")).cloned()
    };

    loop {
        let mut changed = false;
        for &op in &block_ops {
            if m.op(op).name() == "eqsat.yield" {
                continue;
            }
            if !is_eclass(m, op) {
                let mut total = cm.get(m.op(op).name()).clone();
                let mut finite = true;
                for &operand in m.op(op).operands() {
                    match value_cost(m, &op_costs, &class_costs, operand) {
                        Some(c) => total += c,
                        None => {
                            finite = false;
                            break;
                        }
                    }
                }
                if finite && op_costs.get(&op).is_none_or(|old| total < *old) {
                    op_costs.insert(op, total);
                    changed = true;
                }
                continue;
            }
            for (index, &member) in m.op(op).operands().iter().enumerate() {
                let Some(c) = value_cost(m, &op_costs, &class_costs, member) else { continue };
                let better = match class_costs.get(&op) {
                    None => true,
                    Some((old, _)) => c < *old,
                };
                if better {
                    class_costs.insert(op, (c, index));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    if let Some(yld) = egraph.yield_op(m) {
        for &exported in m.op(yld).operands() {
            let class = as_eclass_result(m, exported).ok_or_else(|| {
                Diagnostic::for_op(m, yld, "yield operand is not an e-class result".into())
            })?;
            if !class_costs.contains_key(&class) {
                return Err(Diagnostic::for_op(
                    m,
                    class,
                    "no acyclic extraction: every candidate in this e-class depends on itself"
                        .into(),
                ));
            }
        }
    }

    let per_class = class_costs
        .into_iter()
        .map(|(class, (cost, index))| (class, (cost, m.op(class).operands()[index])))
        .collect();
    Ok(ExtractionChoice { per_class })
}

/// Replaces the e-graph with plain SSA code computing its yielded
/// values: the chosen e-node of every needed class is materialized
/// exactly once (operands before users), uses of the e-graph's results
/// are rewired, and the e-graph op is erased.
pub fn extract(m: &mut Module, egraph: EGraphView, cm: &CostModel) -> Result<(), Diagnostic> {
    let choice = compute_costs(m, egraph, cm)?;
    let yld = egraph
        .yield_op(m)
        .ok_or_else(|| Diagnostic::for_op(m, egraph.op, "e-graph has no terminator".into()))?;

    // The needed sub-DAG, op-level: chosen e-nodes of classes reachable
    // from the yield through chosen members' operands.
    let missing = |m: &Module, at: OpId| {
        Diagnostic::for_op(
            m,
            at,
            "no acyclic extraction: every candidate in this e-class depends on itself".into(),
        )
    };
    let chosen_op = |m: &Module, class: OpId| -> Result<Option<OpId>, Diagnostic> {
        let (_, member) = choice.per_class.get(&class).ok_or_else(|| missing(m, class))?;
        if defined_outside(m, egraph, *member) {
            return Ok(None);
        }
        Ok(Some(m.defining_op(*member).expect("inside values have defining ops")))
    };
    let mut needed_ops: Vec<OpId> = Vec::new();
    let mut worklist: Vec<OpId> = Vec::new();
    for &exported in m.op(yld).operands() {
        let class = as_eclass_result(m, exported).unwrap();
        worklist.extend(chosen_op(m, class)?);
    }
    while let Some(op) = worklist.pop() {
        if needed_ops.contains(&op) {
            continue;
        }
        if !m.op(op).regions().is_empty() {
            return Err(Diagnostic::for_op(
                m,
                op,
                "cannot extract an operation that carries regions".into(),
            ));
        }
        needed_ops.push(op);
        for &operand in m.op(op).operands() {
            if defined_outside(m, egraph, operand) {
                continue;
            }
            match as_eclass_result(m, operand) {
                Some(dep) => worklist.extend(chosen_op(m, dep)?),
                // raw reference to another e-node: materialize that op
                None => worklist.push(m.defining_op(operand).expect("inside value")),
            }
        }
    }

    // Kahn emission in block-order preference: among ready ops, the one
    // earliest in the e-graph block goes first.
    let mut order: Vec<usize> = (0..needed_ops.len()).collect();
    order.sort_by_key(|&i| m.position_in_block(needed_ops[i]));
    let mut materialized: HashMap<ValueId, ValueId> = HashMap::new();
    let mut emitted: Vec<bool> = vec![false; needed_ops.len()];
    let mut emitted_count = 0;

    let resolve = |m: &Module,
                   materialized: &HashMap<ValueId, ValueId>,
                   choice: &ExtractionChoice,
                   v: ValueId|
     -> Option<ValueId> {
        if defined_outside(m, egraph, v) {
            return Some(v);
        }
        if let Some(class) = as_eclass_result(m, v) {
            let (_, member) = &choice.per_class[&class];
            if defined_outside(m, egraph, *member) {
                return Some(*member);
            }
            return materialized.get(member).copied();
        }
        materialized.get(&v).copied()
    };

    while emitted_count < needed_ops.len() {
        let mut progressed = false;
        for &i in &order {
            if emitted[i] {
                continue;
            }
            let op = needed_ops[i];
            let operands: Option<Vec<ValueId>> = m
                .op(op)
                .operands()
                .iter()
                .map(|&v| resolve(m, &materialized, &choice, v))
                .collect();
            let Some(operands) = operands else { continue };
            let result_types: Vec<_> =
                m.op(op).results().iter().map(|&r| m.value_type(r).clone()).collect();
            let name = m.op(op).name().to_string();
            let attrs = m.op(op).attrs().clone();
            let new_op = m.build_op(&name, &operands, &result_types, attrs, vec![]);
            m.insert_op_before(egraph.op, new_op);
            for (index, &old) in m.op(op).results().to_vec().iter().enumerate() {
                materialized.insert(old, m.op(new_op).results()[index]);
            }
            emitted[i] = true;
            emitted_count += 1;
            progressed = true;
        }
        if !progressed {
            return Err(Diagnostic::for_op(
                m,
                egraph.op,
                "no acyclic extraction: chosen nodes depend on each other".into(),
            ));
        }
    }

    // Rewire the e-graph's exported results, then drop the whole thing.
    let exports = m.op(yld).operands().to_vec();
    let results = m.op(egraph.op).results().to_vec();
    for (index, &exported) in exports.iter().enumerate() {
        let new_value = resolve(m, &materialized, &choice, exported)
            .expect("yielded classes are materialized");
        if m.uses(results[index]).is_empty() {
            continue;
        }
        m.replace_all_uses(results[index], new_value)?;
    }
    m.erase_op(egraph.op)
}

/// Extracts every e-graph in the module under one cost model.
pub fn extract_module(m: &mut Module, cm: &CostModel) -> Result<(), Diagnostic> {
    let views = crate::eqsat::egraphs(m);
    for view in views {
        extract(m, view, cm)?;
    }
    Ok(())
}
