//! The `eqsat` dialect: e-graphs embedded in the IR.
//!
//! Three operations carry the whole encoding:
//! - `eqsat.eclass`: operands are the members of one equivalence class
//!   (the e-nodes); the single result is the class handle other
//!   operations consume.
//! - `eqsat.egraph`: holds one graph region containing the classes;
//!   its results export values chosen by the terminator.
//! - `eqsat.yield`: closes off the e-graph and selects the exported
//!   class handles.
//!
//! This module provides the dialect verifier and the pass that converts
//! a plain function body into a trivial (one-class-per-value) e-graph.

use std::collections::HashMap;

use crate::ir::{BlockId, Diagnostic, Module, OpId, Region, RegionKind, ValueId};

/// True iff `op` is an `eqsat.eclass`.
pub fn is_eclass(m: &Module, op: OpId) -> bool {
    m.op(op).name() == "eqsat.eclass"
}

/// The e-class whose result is `v`, if `v` is a class handle.
pub fn as_eclass_result(m: &Module, v: ValueId) -> Option<OpId> {
    let op = m.defining_op(v)?;
    is_eclass(m, op).then_some(op)
}

/// The e-class containing `v` as a member (an e-node), if any.
pub fn eclass_of_member(m: &Module, v: ValueId) -> Option<OpId> {
    m.uses(v).iter().map(|u| u.op).find(|&op| m.op_is_live(op) && is_eclass(m, op))
}

/// Typed wrapper over an `eqsat.egraph` operation.
#[derive(Clone, Copy, Debug)]
pub struct EGraphView {
    pub op: OpId,
    pub block: BlockId,
}

impl EGraphView {
    pub fn new(m: &Module, op: OpId) -> Result<EGraphView, Diagnostic> {
        if m.op(op).name() != "eqsat.egraph" {
            return Err(Diagnostic::for_op(
                m,
                op,
                format!("expected eqsat.egraph, found `{}`", m.op(op).name()),
            ));
        }
        if m.op(op).regions().len() != 1 {
            return Err(Diagnostic::for_op(m, op, "eqsat.egraph requires exactly one region".into()));
        }
        Ok(EGraphView { op, block: m.op(op).regions()[0].block })
    }

    /// E-class operations in block order.
    pub fn eclasses(self, m: &Module) -> Vec<OpId> {
        m.block_ops(self.block).iter().copied().filter(|&o| is_eclass(m, o)).collect()
    }

    /// The closing `eqsat.yield`, if present.
    pub fn yield_op(self, m: &Module) -> Option<OpId> {
        m.block_ops(self.block)
            .last()
            .copied()
            .filter(|&o| m.op(o).name() == "eqsat.yield")
    }

    /// Number of e-nodes: total members over all classes.
    pub fn enode_count(self, m: &Module) -> usize {
        self.eclasses(m).iter().map(|&c| m.op(c).operands().len()).sum()
    }

    pub fn eclass_count(self, m: &Module) -> usize {
        self.eclasses(m).len()
    }
}

/// Every `eqsat.egraph` in the module, in walk order.
pub fn egraphs(m: &Module) -> Vec<EGraphView> {
    m.walk_ops()
        .into_iter()
        .filter(|&o| m.op(o).name() == "eqsat.egraph")
        .map(|op| EGraphView { op, block: m.op(op).regions()[0].block })
        .collect()
}

/// Dialect verifier for a single `eqsat.*` operation.
pub fn verify_eqsat(m: &Module, op: OpId) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    match m.op(op).name() {
        "eqsat.eclass" => verify_eclass(m, op, &mut diags),
        "eqsat.egraph" => verify_egraph(m, op, &mut diags),
        "eqsat.yield" => verify_yield(m, op, &mut diags),
        other => diags.push(Diagnostic::for_op(
            m,
            op,
            format!("verify_eqsat called on non-eqsat operation `{other}`"),
        )),
    }
    diags
}

/// Runs the dialect verifier over every `eqsat.*` operation.
pub fn verify_eqsat_module(m: &Module) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for op in m.walk_ops() {
        if m.op(op).name().starts_with("eqsat.") {
            diags.extend(verify_eqsat(m, op));
        }
    }
    diags
}

fn verify_eclass(m: &Module, op: OpId, diags: &mut Vec<Diagnostic>) {
    let data = m.op(op);
    if data.operands().is_empty() {
        diags.push(Diagnostic::for_op(m, op, "eqsat.eclass takes one or more values".into()));
    }
    if data.results().len() != 1 {
        diags.push(Diagnostic::for_op(m, op, "eqsat.eclass produces exactly one result".into()));
        return;
    }
    let ty = m.value_type(data.results()[0]);
    for (index, &operand) in data.operands().iter().enumerate() {
        if m.value_type(operand) != ty {
            diags.push(Diagnostic::for_op(
                m,
                op,
                format!(
                    "eqsat.eclass operand {index} has type {}, expected {ty}",
                    m.value_type(operand)
                ),
            ));
        }
        if as_eclass_result(m, operand).is_some() {
            diags.push(Diagnostic::for_op(
                m,
                op,
                format!("eqsat.eclass operand {index} is itself an e-class result"),
            ));
        }
    }
    // Containment: some ancestor must be an egraph.
    let mut cur = data.parent();
    let mut contained = false;
    while let Some(block) = cur {
        match m.block_parent(block) {
            Some(owner) if m.op(owner).name() == "eqsat.egraph" => {
                contained = true;
                break;
            }
            Some(owner) => cur = m.op(owner).parent(),
            None => break,
        }
    }
    if !contained {
        diags.push(Diagnostic::for_op(
            m,
            op,
            "eqsat.eclass must be contained within an eqsat.egraph".into(),
        ));
    }
}

fn verify_egraph(m: &Module, op: OpId, diags: &mut Vec<Diagnostic>) {
    let data = m.op(op);
    if !data.operands().is_empty() {
        diags.push(Diagnostic::for_op(m, op, "eqsat.egraph takes no operands".into()));
    }
    let view = match EGraphView::new(m, op) {
        Ok(v) => v,
        Err(d) => {
            diags.push(d);
            return;
        }
    };
    // Terminator presence/kind is enforced by the generic verifier; the
    // dialect rules below only make sense when it is there.
    let Some(yield_op) = view.yield_op(m) else { return };
    let yielded = m.op(yield_op).operands();
    if yielded.len() != data.results().len() {
        diags.push(Diagnostic::for_op(
            m,
            op,
            format!(
                "eqsat.yield passes {} value(s) but the egraph exports {}",
                yielded.len(),
                data.results().len()
            ),
        ));
    }
    for (index, (&y, &r)) in yielded.iter().zip(data.results()).enumerate() {
        if m.value_type(y) != m.value_type(r) {
            diags.push(Diagnostic::for_op(
                m,
                op,
                format!(
                    "yield operand {index} has type {}, egraph result has type {}",
                    m.value_type(y),
                    m.value_type(r)
                ),
            ));
        }
        if as_eclass_result(m, y).is_none() {
            diags.push(Diagnostic::for_op(
                m,
                op,
                format!("yield operand {index} is not an e-class result"),
            ));
        }
    }
    // Membership uniqueness: no value belongs to two classes.
    let mut member_of: HashMap<ValueId, OpId> = HashMap::new();
    for eclass in view.eclasses(m) {
        for &member in m.op(eclass).operands() {
            if let Some(&first) = member_of.get(&member) {
                if first != eclass {
                    diags.push(Diagnostic::for_op(
                        m,
                        eclass,
                        "value is a member of more than one e-class".into(),
                    ));
                }
            } else {
                member_of.insert(member, eclass);
            }
        }
    }
}

fn verify_yield(m: &Module, op: OpId, diags: &mut Vec<Diagnostic>) {
    if !m.op(op).results().is_empty() {
        diags.push(Diagnostic::for_op(m, op, "eqsat.yield produces no results".into()));
    }
    // Placement (last op of an egraph region) is generic-verifier turf.
}

/// Converts a plain function body into a trivial e-graph: every
/// non-terminator operation moves inside a fresh `eqsat.egraph`, and
/// every value consumed or produced there gets a singleton e-class.
/// Terminator operands are routed through `eqsat.yield` and the egraph
/// results.
///
/// Refuses bodies containing region-carrying operations or an existing
/// e-graph.
pub fn convert_to_egraph(m: &mut Module, func: OpId) -> Result<(), Diagnostic> {
    if m.op(func).name() != "func.func" {
        return Err(Diagnostic::for_op(
            m,
            func,
            format!("convert-to-egraph applies to func.func, found `{}`", m.op(func).name()),
        ));
    }
    let body = m.op(func).regions()[0].block;
    let ops: Vec<OpId> = m.block_ops(body).to_vec();
    let Some((&terminator, moved)) = ops.split_last() else {
        return Err(Diagnostic::for_op(m, func, "function body is empty".into()));
    };
    if m.op(terminator).name() != "func.return" {
        return Err(Diagnostic::for_op(
            m,
            terminator,
            "function body must end in func.return".into(),
        ));
    }
    for &op in moved {
        if m.op(op).name().starts_with("eqsat.") {
            return Err(Diagnostic::for_op(
                m,
                op,
                "unsupported op: body already contains eqsat operations".into(),
            ));
        }
        if !m.op(op).regions().is_empty() {
            return Err(Diagnostic::for_op(
                m,
                op,
                format!("unsupported op: `{}` carries regions", m.op(op).name()),
            ));
        }
    }

    let graph_block = m.new_block(&[]);
    let mut class_handle: HashMap<ValueId, ValueId> = HashMap::new();
    let mut wrap = |m: &mut Module, value: ValueId| -> ValueId {
        let ty = m.value_type(value).clone();
        let eclass = m.build_op("eqsat.eclass", &[value], &[ty], vec![], vec![]);
        m.append_op(graph_block, eclass);
        let handle = m.op(eclass).results()[0];
        class_handle.insert(value, handle);
        handle
    };

    // Block arguments used inside (or returned) get their classes first.
    let args: Vec<ValueId> = m.block_args(body).to_vec();
    for arg in args {
        let used = m.uses(arg).iter().any(|u| u.op == terminator || moved.contains(&u.op));
        if used {
            wrap(m, arg);
        }
    }
    // Move each op, then wrap each of its results.
    for &op in moved {
        m.remove_from_block(op);
        m.append_op(graph_block, op);
        for r in m.op(op).results().to_vec() {
            wrap(m, r);
        }
    }
    // Rewire moved (non-eclass) operands to class handles.
    for &op in moved {
        for (index, operand) in m.op(op).operands().to_vec().into_iter().enumerate() {
            if let Some(&handle) = class_handle.get(&operand) {
                m.set_operand(op, index, handle);
            }
        }
    }
    // Export the terminator's operands through yield/egraph results.
    let returned: Vec<ValueId> = m.op(terminator).operands().to_vec();
    let yielded: Vec<ValueId> = returned.iter().map(|v| class_handle[v]).collect();
    let yield_op = m.build_op("eqsat.yield", &yielded, &[], vec![], vec![]);
    m.append_op(graph_block, yield_op);
    let result_types: Vec<_> = returned.iter().map(|&v| m.value_type(v).clone()).collect();
    let egraph = m.build_op(
        "eqsat.egraph",
        &[],
        &result_types,
        vec![],
        vec![Region { kind: RegionKind::Graph, block: graph_block }],
    );
    m.insert_op_at(body, 0, egraph);
    for (index, _) in returned.iter().enumerate() {
        let result = m.op(egraph).results()[index];
        m.set_operand(terminator, index, result);
    }
    Ok(())
}

/// Applies [`convert_to_egraph`] to every function in the module.
pub fn convert_module_to_egraph(m: &mut Module) -> Result<(), Diagnostic> {
    for func in m.top_ops().to_vec() {
        convert_to_egraph(m, func)?;
    }
    Ok(())
}
