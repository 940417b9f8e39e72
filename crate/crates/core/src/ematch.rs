//! Interpreting a match program over an e-graph, and applying matched
//! rewrites.
//!
//! Matching is e-class-aware: `GetDefiningOp` over an e-class handle
//! becomes a backtracking point that tries every member e-node, so the
//! matcher enumerates all combinations of representatives. Application
//! is non-destructive: it only creates operations (hashconsed against
//! the existing graph), appends class members, and records pending
//! unions for the rebuild pass.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::eqsat::{as_eclass_result, eclass_of_member, is_eclass, EGraphView};
use crate::ir::{Diagnostic, Module, OpId, StructuralKey, ValueId};
use crate::patterns::{BuildAction, Inst, MatchProgram, ValueSource};

/// One match of one directed rule: the root e-node it matched at and
/// the values bound to the pattern variables (e-class handles whenever
/// the matched slot was a class).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MatchResult {
    pub rule: usize,
    pub root: OpId,
    pub bindings: BTreeMap<String, ValueId>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Slot {
    Empty,
    Op(OpId),
    Value(ValueId),
}

/// A suspended `GetDefiningOp` over an e-class: on failure the
/// interpreter resumes here with the next member.
struct ChoicePoint {
    inst: usize,
    cursor: usize,
    regs: Vec<Slot>,
}

/// Runs `program` against every candidate root e-node of the e-graph,
/// in block order. The result is deterministic: roots in block order,
/// e-class members tried in operand order, duplicates (same rule, root,
/// and bindings) removed.
pub fn find_matches(m: &Module, egraph: EGraphView, program: &MatchProgram) -> Vec<MatchResult> {
    let mut out = Vec::new();
    let mut seen: HashSet<(usize, OpId, Vec<ValueId>)> = HashSet::new();
    for &root in m.block_ops(egraph.block) {
        let name = m.op(root).name();
        if is_eclass(m, root) || name == "eqsat.yield" {
            continue;
        }
        run_program(m, program, root, &mut out, &mut seen);
    }
    out
}

fn run_program(
    m: &Module,
    program: &MatchProgram,
    root: OpId,
    out: &mut Vec<MatchResult>,
    seen: &mut HashSet<(usize, OpId, Vec<ValueId>)>,
) {
    let mut regs = vec![Slot::Empty; program.num_regs.max(1)];
    regs[0] = Slot::Op(root);
    let mut stack: Vec<ChoicePoint> = Vec::new();
    let mut pc = 0usize;
    // (instruction, member cursor) to resume a GetDefiningOp after a pop
    let mut resume: Option<usize> = None;

    loop {
        match &program.insts[pc] {
            Inst::GetDefiningOp { value, op, ok, fail } => {
                let cursor = resume.take().unwrap_or(0);
                pc = match regs[*value] {
                    Slot::Value(v) => match as_eclass_result(m, v) {
                        Some(class) => {
                            let members = m.op(class).operands();
                            let mut found = None;
                            for (k, &member) in members.iter().enumerate().skip(cursor) {
                                if let Some(d) = m.defining_op(member) {
                                    found = Some((k, d));
                                    break;
                                }
                            }
                            match found {
                                Some((k, d)) => {
                                    if k + 1 < members.len() {
                                        stack.push(ChoicePoint {
                                            inst: pc,
                                            cursor: k + 1,
                                            regs: regs.clone(),
                                        });
                                    }
                                    regs[*op] = Slot::Op(d);
                                    *ok
                                }
                                None => *fail,
                            }
                        }
                        None => match m.defining_op(v) {
                            Some(d) => {
                                regs[*op] = Slot::Op(d);
                                *ok
                            }
                            None => *fail,
                        },
                    },
                    _ => *fail,
                };
            }
            Inst::GetOperand { op, index, value, ok, fail } => {
                pc = match regs[*op] {
                    Slot::Op(o) if *index < m.op(o).operands().len() => {
                        regs[*value] = Slot::Value(m.op(o).operands()[*index]);
                        *ok
                    }
                    _ => *fail,
                };
            }
            Inst::GetResult { op, index, value, ok, fail } => {
                pc = match regs[*op] {
                    Slot::Op(o) if *index < m.op(o).results().len() => {
                        let raw = m.op(o).results()[*index];
                        let dug = match eclass_of_member(m, raw) {
                            Some(class) => m.op(class).results()[0],
                            None => raw,
                        };
                        regs[*value] = Slot::Value(dug);
                        *ok
                    }
                    _ => *fail,
                };
            }
            Inst::CheckOpName { op, name, ok, fail } => {
                pc = match regs[*op] {
                    Slot::Op(o) if m.op(o).name() == name => *ok,
                    _ => *fail,
                };
            }
            Inst::CheckOperandCount { op, count, ok, fail } => {
                pc = match regs[*op] {
                    Slot::Op(o) if m.op(o).operands().len() == *count => *ok,
                    _ => *fail,
                };
            }
            Inst::CheckAttribute { op, name, value, ok, fail } => {
                pc = match regs[*op] {
                    Slot::Op(o) if m.op(o).attr(name) == Some(value) => *ok,
                    _ => *fail,
                };
            }
            Inst::CheckResultType { op, index, ty, ok, fail } => {
                pc = match regs[*op] {
                    Slot::Op(o)
                        if *index < m.op(o).results().len()
                            && m.value_type(m.op(o).results()[*index]) == ty =>
                    {
                        *ok
                    }
                    _ => *fail,
                };
            }
            Inst::CheckSameValue { a, b, ok, fail } => {
                pc = match (regs[*a], regs[*b]) {
                    (Slot::Value(x), Slot::Value(y)) if x == y => *ok,
                    _ => *fail,
                };
            }
            Inst::IsNotNull { value, ok, fail } => {
                pc = if regs[*value] == Slot::Empty { *fail } else { *ok };
            }
            Inst::RecordMatch { rule, captures, next } => {
                let mut bindings = BTreeMap::new();
                let mut key = Vec::with_capacity(captures.len());
                let mut complete = true;
                for (name, reg) in captures {
                    match regs[*reg] {
                        Slot::Value(v) => {
                            bindings.insert(name.clone(), v);
                            key.push(v);
                        }
                        _ => complete = false,
                    }
                }
                if complete && seen.insert((*rule, root, key)) {
                    out.push(MatchResult { rule: *rule, root, bindings });
                }
                pc = *next;
            }
            Inst::Finalize => match stack.pop() {
                None => return,
                Some(cp) => {
                    regs = cp.regs;
                    pc = cp.inst;
                    resume = Some(cp.cursor);
                }
            },
        }
    }
}

/// What one `apply_match` did to the e-graph.
#[derive(Clone, Default, Debug)]
pub struct ChangeReport {
    /// Freshly created e-node operations (hashcons misses).
    pub created_enodes: Vec<OpId>,
    /// Freshly created `eqsat.eclass` wrappers.
    pub created_classes: Vec<OpId>,
    /// E-class pairs whose merge is deferred to the rebuild pass.
    pub unions: Vec<(OpId, OpId)>,
    /// Raw values appended as new members of the root's class.
    pub appended_members: usize,
}

impl ChangeReport {
    pub fn changed(&self) -> bool {
        !self.created_enodes.is_empty() || !self.unions.is_empty() || self.appended_members > 0
    }

    pub fn absorb(&mut self, other: ChangeReport) {
        self.created_enodes.extend(other.created_enodes);
        self.created_classes.extend(other.created_classes);
        self.unions.extend(other.unions);
        self.appended_members += other.appended_members;
    }
}

struct Created {
    op: OpId,
    class: Option<OpId>,
}

/// Applies one match: materializes the rule's right-hand side
/// (hashconsing every created operation against the e-graph) and makes
/// the root's class contain the replacement. Never erases anything;
/// class merges are reported, not performed.
pub fn apply_match(
    m: &mut Module,
    egraph: EGraphView,
    actions: &[BuildAction],
    mr: &MatchResult,
) -> Result<ChangeReport, Diagnostic> {
    let mut report = ChangeReport::default();
    if m.op(mr.root).results().is_empty() {
        return Err(Diagnostic::for_op(m, mr.root, "matched root has no result".into()));
    }
    let root_result = m.op(mr.root).results()[0];
    let root_class = eclass_of_member(m, root_result).ok_or_else(|| {
        Diagnostic::for_op(m, mr.root, "matched root is not a member of an e-class".into())
    })?;
    let root_ty = m.value_type(root_result).clone();
    let insert_at = egraph.yield_op(m);

    // Hashcons table over the existing e-nodes, first in block order wins.
    let mut table: HashMap<StructuralKey, OpId> = HashMap::new();
    for &op in m.block_ops(egraph.block) {
        if is_eclass(m, op) || m.op(op).name() == "eqsat.yield" || !m.op(op).regions().is_empty() {
            continue;
        }
        let key = m.structural_key(op)?;
        table.entry(key).or_insert(op);
    }

    let mut created: Vec<Option<Created>> = actions.iter().map(|_| None).collect();
    for (idx, action) in actions.iter().enumerate() {
        match action {
            BuildAction::CreateOperation { name, operands, attrs, result_type } => {
                let mut resolved = Vec::with_capacity(operands.len());
                for source in operands {
                    resolved.push(resolve_as_operand(
                        m,
                        egraph,
                        insert_at,
                        source,
                        mr,
                        &mut created,
                        &mut report,
                    )?);
                }
                let ty = result_type.clone().unwrap_or_else(|| root_ty.clone());
                let probe = StructuralKey {
                    name: name.clone(),
                    attrs: {
                        let mut a = attrs.clone();
                        a.sort();
                        a
                    },
                    operands: resolved.clone(),
                    result_types: vec![ty.clone()],
                };
                let op = match table.get(&probe) {
                    Some(&existing) => Created { op: existing, class: None },
                    None => {
                        let op = m.build_op(name, &resolved, &[ty], attrs.clone(), vec![]);
                        insert_enode(m, egraph, insert_at, op);
                        table.insert(probe, op);
                        report.created_enodes.push(op);
                        Created { op, class: None }
                    }
                };
                created[idx] = Some(op);
            }
            BuildAction::Replace { source } => {
                let replacement = resolve_replacement(m, source, mr, &created);
                match replacement {
                    Replacement::Class(handle) => {
                        let class = as_eclass_result(m, handle).unwrap();
                        check_types(m, mr.root, &root_ty, handle)?;
                        if class != root_class {
                            report.unions.push((root_class, class));
                        }
                    }
                    Replacement::Raw(v) => {
                        check_types(m, mr.root, &root_ty, v)?;
                        if let Some(c) = eclass_of_member(m, v) {
                            // already in a class: merge rather than
                            // double-register the member
                            if c != root_class {
                                report.unions.push((root_class, c));
                            }
                        } else if !m.op(root_class).operands().contains(&v) {
                            m.push_operand(root_class, v);
                            report.appended_members += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

enum Replacement {
    Class(ValueId),
    Raw(ValueId),
}

fn resolve_replacement(
    m: &Module,
    source: &ValueSource,
    mr: &MatchResult,
    created: &[Option<Created>],
) -> Replacement {
    match source {
        ValueSource::Bound(name) => {
            let v = mr.bindings[name];
            if as_eclass_result(m, v).is_some() {
                Replacement::Class(v)
            } else {
                Replacement::Raw(v)
            }
        }
        ValueSource::Created(idx) => {
            let c = created[*idx].as_ref().expect("rhs actions are in dependency order");
            match c.class {
                Some(class) => Replacement::Class(m.op(class).results()[0]),
                None => Replacement::Raw(m.op(c.op).results()[0]),
            }
        }
    }
}

/// Resolves a value source for use as an operand of a created e-node:
/// operands of e-nodes are class handles, so an unwrapped created op
/// gets its singleton class here.
fn resolve_as_operand(
    m: &mut Module,
    egraph: EGraphView,
    insert_at: Option<OpId>,
    source: &ValueSource,
    mr: &MatchResult,
    created: &mut [Option<Created>],
    report: &mut ChangeReport,
) -> Result<ValueId, Diagnostic> {
    match source {
        ValueSource::Bound(name) => Ok(mr.bindings[name]),
        ValueSource::Created(idx) => {
            let (op, class) = {
                let c = created[*idx].as_ref().expect("rhs actions are in dependency order");
                (c.op, c.class)
            };
            if let Some(class) = class {
                return Ok(m.op(class).results()[0]);
            }
            let result = m.op(op).results()[0];
            let class = match eclass_of_member(m, result) {
                Some(existing) => existing,
                None => {
                    let ty = m.value_type(result).clone();
                    let class = m.build_op("eqsat.eclass", &[result], &[ty], vec![], vec![]);
                    insert_enode(m, egraph, insert_at, class);
                    report.created_classes.push(class);
                    class
                }
            };
            created[*idx] = Some(Created { op, class: Some(class) });
            Ok(m.op(class).results()[0])
        }
    }
}

fn insert_enode(m: &mut Module, egraph: EGraphView, insert_at: Option<OpId>, op: OpId) {
    match insert_at {
        Some(before) => m.insert_op_before(before, op),
        None => m.append_op(egraph.block, op),
    }
}

fn check_types(
    m: &Module,
    root: OpId,
    root_ty: &crate::ir::TypeExpr,
    v: ValueId,
) -> Result<(), Diagnostic> {
    let got = m.value_type(v);
    if got != root_ty {
        return Err(Diagnostic::for_op(
            m,
            root,
            format!("replacement type `{got}` does not match the matched class type `{root_ty}`"),
        ));
    }
    Ok(())
}
