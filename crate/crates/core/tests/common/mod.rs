//! Shared test machinery: random e-graph and function generators, a
//! union-find congruence-closure oracle, a brute-force recursive
//! e-matcher, a brute-force extraction oracle, and an e-graph
//! isomorphism check based on color refinement.
//!
//! Everything here is deliberately written against the simplest
//! possible representations, independent of the library's internals,
//! so it can serve as a reference to test the library against.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use eqsat_core::eqsat::{as_eclass_result, is_eclass, EGraphView};
use eqsat_core::extract::CostModel;
use eqsat_core::ir::{AttrValue, Module, OpId, Producer, ValueId};
use eqsat_core::patterns::TermPattern;
use eqsat_core::text::parse_module;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::Rng;

// ---------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------

/// Parses `text`, panicking with the diagnostics on failure.
pub fn parse_ok(text: &str) -> Module {
    match parse_module(text) {
        Ok(m) => m,
        Err(ds) => {
            let msgs: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
            panic!("parse failed:\n{}\nfor input:\n{text}", msgs.join("\n"));
        }
    }
}

/// The first (often only) e-graph in the module.
pub fn first_egraph(m: &Module) -> EGraphView {
    *eqsat_core::eqsat::egraphs(m).first().expect("module contains no e-graph")
}

/// The `eqsat.eclass` operations of an e-graph, in block order.
pub fn eclass_ops(m: &Module, view: EGraphView) -> Vec<OpId> {
    m.block_ops(view.block).iter().copied().filter(|&op| is_eclass(m, op)).collect()
}

// ---------------------------------------------------------------------
// Random e-graphs (abstract form + rendering to text)
// ---------------------------------------------------------------------

/// One member of an abstract e-class: an external argument atom, or an
/// e-node whose children are class indices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum GenMember {
    Arg(usize),
    Node { name: String, attrs: Vec<(String, i64)>, children: Vec<usize> },
}

/// An abstract e-graph: classes by index, members per class, exported
/// class indices, and union pairs to be injected after construction.
#[derive(Clone, Debug)]
pub struct GenEGraph {
    pub num_args: usize,
    pub classes: Vec<Vec<GenMember>>,
    pub exports: Vec<usize>,
    pub unions: Vec<(usize, usize)>,
}

impl GenEGraph {
    pub fn enode_count(&self) -> usize {
        self.classes.iter().map(|c| c.len()).sum()
    }
}

/// Generates a random abstract e-graph. E-node children only reference
/// earlier classes, so the initial graph is acyclic; the union pairs
/// may make the closure cyclic. Every argument atom belongs to at most
/// one class.
pub fn random_egraph(
    rng: &mut StdRng,
    max_classes: usize,
    max_enodes: usize,
    max_unions: usize,
) -> GenEGraph {
    let num_args = rng.random_range(1..=3);
    let num_classes = rng.random_range(2..=max_classes.max(2));
    let mut free_args: Vec<usize> = (0..num_args).collect();
    let mut classes: Vec<Vec<GenMember>> = Vec::new();
    let mut enodes = 0usize;

    for ci in 0..num_classes {
        if enodes >= max_enodes {
            break;
        }
        let budget = (max_enodes - enodes).min(3);
        let want = rng.random_range(1..=budget.max(1));
        let mut members = Vec::new();
        for _ in 0..want {
            let member = random_member(rng, ci, &mut free_args);
            members.push(member);
        }
        enodes += members.len();
        classes.push(members);
    }

    let n = classes.len();
    let mut exports = vec![rng.random_range(0..n)];
    if n > 1 && rng.random_bool(0.4) {
        exports.push(rng.random_range(0..n));
    }
    exports.sort_unstable();
    exports.dedup();

    let mut unions = Vec::new();
    for _ in 0..rng.random_range(0..=max_unions) {
        if n < 2 {
            break;
        }
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            unions.push((a, b));
        }
    }

    GenEGraph { num_args, classes, exports, unions }
}

fn random_member(rng: &mut StdRng, class_index: usize, free_args: &mut Vec<usize>) -> GenMember {
    // Leaf members: an unassigned argument or a constant. Interior
    // members: unary/binary nodes over earlier classes.
    let leaf_only = class_index == 0;
    let pick = rng.random_range(0..if leaf_only { 2 } else { 5 });
    match pick {
        0 if !free_args.is_empty() => {
            let k = rng.random_range(0..free_args.len());
            GenMember::Arg(free_args.swap_remove(k))
        }
        0 | 1 => GenMember::Node {
            name: "arith.constant".into(),
            attrs: vec![("value".into(), rng.random_range(0..3))],
            children: Vec::new(),
        },
        2 => GenMember::Node {
            name: if rng.random_bool(0.5) { "test.f" } else { "test.h" }.into(),
            attrs: Vec::new(),
            children: vec![rng.random_range(0..class_index)],
        },
        _ => GenMember::Node {
            name: if rng.random_bool(0.5) { "test.g" } else { "arith.addi" }.into(),
            attrs: Vec::new(),
            children: vec![rng.random_range(0..class_index), rng.random_range(0..class_index)],
        },
    }
}

/// Renders an abstract e-graph as a function holding one `eqsat.egraph`.
/// Class `i` becomes the `i`-th `eqsat.eclass` op in block order.
pub fn render_egraph(g: &GenEGraph) -> String {
    let mut out = String::new();
    let args: Vec<String> = (0..g.num_args).map(|k| format!("%a{k} : i64")).collect();
    let rets: Vec<&str> = g.exports.iter().map(|_| "i64").collect();
    let ret_list = if rets.len() == 1 { rets[0].to_string() } else { format!("({})", rets.join(", ")) };
    let out_names: Vec<String> = (0..g.exports.len()).map(|k| format!("%o{k}")).collect();
    out.push_str(&format!("func.func @gen({}) -> {ret_list} {{\n", args.join(", ")));
    out.push_str(&format!("  {} = eqsat.egraph -> {ret_list} {{\n", out_names.join(", ")));
    for (ci, members) in g.classes.iter().enumerate() {
        let mut names = Vec::new();
        for (mi, member) in members.iter().enumerate() {
            match member {
                GenMember::Arg(k) => names.push(format!("%a{k}")),
                GenMember::Node { name, attrs, children } => {
                    let v = format!("%n{ci}_{mi}");
                    let mut line = format!("    {v} = {name}");
                    if !children.is_empty() {
                        let ops: Vec<String> =
                            children.iter().map(|c| format!("%c{c}")).collect();
                        line.push_str(&format!(" {}", ops.join(", ")));
                    }
                    if !attrs.is_empty() {
                        let a: Vec<String> =
                            attrs.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                        line.push_str(&format!(" {{{}}}", a.join(", ")));
                    }
                    line.push_str(" : i64\n");
                    out.push_str(&line);
                    names.push(v);
                }
            }
        }
        out.push_str(&format!("    %c{ci} = eqsat.eclass {} : i64\n", names.join(", ")));
    }
    let yields: Vec<String> = g.exports.iter().map(|e| format!("%c{e}")).collect();
    out.push_str(&format!("    eqsat.yield {} : i64\n", yields.join(", ")));
    out.push_str("  }\n");
    let ret_vals = out_names.join(", ");
    if g.exports.len() == 1 {
        out.push_str(&format!("  func.return {ret_vals} : i64\n"));
    } else {
        out.push_str(&format!("  func.return {ret_vals} : {ret_list} -> ()\n"));
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------
// Congruence-closure oracle (union-find + upward merging)
// ---------------------------------------------------------------------

/// An e-graph in fully canonical abstract form: dense class indices,
/// member sets, exported class indices. Both the oracle and the
/// read-back of library output produce this shape.
#[derive(Clone, Debug)]
pub struct AbsEGraph {
    pub classes: Vec<BTreeSet<GenMember>>,
    pub exports: Vec<usize>,
}

fn uf_find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

fn uf_union(uf: &mut [usize], a: usize, b: usize) -> bool {
    let (ra, rb) = (uf_find(uf, a), uf_find(uf, b));
    if ra == rb {
        return false;
    }
    uf[ra.max(rb)] = ra.min(rb);
    true
}

/// An e-node's identity up to congruence: name, attributes, and
/// canonicalized child class indices.
type NodeShape = (String, Vec<(String, i64)>, Vec<usize>);

/// Reference congruence closure: applies the requested unions, then
/// repeatedly merges classes containing structurally identical e-nodes
/// (same name, attributes, and canonicalized children) until fixpoint.
pub fn congruence_oracle(g: &GenEGraph) -> AbsEGraph {
    let n = g.classes.len();
    let mut uf: Vec<usize> = (0..n).collect();
    for &(a, b) in &g.unions {
        uf_union(&mut uf, a, b);
    }
    loop {
        let mut changed = false;
        let mut by_shape: HashMap<NodeShape, usize> = HashMap::new();
        for (ci, members) in g.classes.iter().enumerate() {
            for member in members {
                if let GenMember::Node { name, attrs, children } = member {
                    let key = (
                        name.clone(),
                        attrs.clone(),
                        children.iter().map(|&c| uf_find(&mut uf, c)).collect::<Vec<_>>(),
                    );
                    match by_shape.get(&key) {
                        Some(&other) => {
                            if uf_union(&mut uf, other, ci) {
                                changed = true;
                            }
                        }
                        None => {
                            by_shape.insert(key, ci);
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Collapse to dense indices over the union-find roots.
    let roots: BTreeSet<usize> = (0..n).map(|c| uf_find(&mut uf, c)).collect();
    let dense: HashMap<usize, usize> = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut classes: Vec<BTreeSet<GenMember>> = vec![BTreeSet::new(); roots.len()];
    for (ci, members) in g.classes.iter().enumerate() {
        let target = dense[&uf_find(&mut uf, ci)];
        for member in members {
            let canon = match member {
                GenMember::Arg(k) => GenMember::Arg(*k),
                GenMember::Node { name, attrs, children } => GenMember::Node {
                    name: name.clone(),
                    attrs: attrs.clone(),
                    children: children
                        .iter()
                        .map(|&c| dense[&uf_find(&mut uf, c)])
                        .collect(),
                },
            };
            classes[target].insert(canon);
        }
    }
    let exports = g.exports.iter().map(|&e| dense[&uf_find(&mut uf, e)]).collect();
    AbsEGraph { classes, exports }
}

/// Reads a (rebuilt) e-graph back into abstract form. Class indices
/// follow block order; members must be function arguments or results of
/// e-nodes whose operands are class handles.
pub fn abstract_of_ir(m: &Module, view: EGraphView) -> AbsEGraph {
    let class_ops = eclass_ops(m, view);
    let index: HashMap<OpId, usize> =
        class_ops.iter().enumerate().map(|(i, &op)| (op, i)).collect();
    let mut classes = Vec::new();
    for &class in &class_ops {
        let mut members = BTreeSet::new();
        for &member in m.op(class).operands() {
            members.insert(abstract_member(m, view, member, &index));
        }
        classes.push(members);
    }
    let exports = match view.yield_op(m) {
        Some(y) => m
            .op(y)
            .operands()
            .iter()
            .map(|&v| index[&as_eclass_result(m, v).expect("yield of a non-class value")])
            .collect(),
        None => Vec::new(),
    };
    AbsEGraph { classes, exports }
}

fn abstract_member(
    m: &Module,
    view: EGraphView,
    member: ValueId,
    index: &HashMap<OpId, usize>,
) -> GenMember {
    match m.producer(member) {
        Producer::BlockArg { index: k, .. } => GenMember::Arg(k),
        Producer::OpResult { op, .. } => {
            assert_eq!(
                m.op(op).parent(),
                Some(view.block),
                "e-node member defined outside the e-graph"
            );
            let attrs = m
                .op(op)
                .attrs()
                .iter()
                .map(|(k, v)| match v {
                    AttrValue::Int(i) => (k.clone(), int_to_i64(i)),
                    other => panic!("unexpected attribute in generated graph: {other:?}"),
                })
                .collect();
            let children = m
                .op(op)
                .operands()
                .iter()
                .map(|&v| {
                    let class = as_eclass_result(m, v).expect("e-node child is not a class");
                    index[&class]
                })
                .collect();
            GenMember::Node { name: m.op(op).name().to_string(), attrs, children }
        }
    }
}

fn int_to_i64(i: &BigInt) -> i64 {
    let s = i.to_string();
    s.parse::<i64>().expect("attribute out of i64 range")
}

// ---------------------------------------------------------------------
// E-graph isomorphism via color refinement
// ---------------------------------------------------------------------

/// Checks that two abstract e-graphs are isomorphic: same number of
/// classes, a color-refinement fixpoint that pairs them one-to-one, and
/// exports with matching colors in order. On congruence-closed graphs
/// this coincides with equality of the class partitions.
pub fn egraphs_isomorphic(a: &AbsEGraph, b: &AbsEGraph) -> bool {
    if a.classes.len() != b.classes.len() || a.exports.len() != b.exports.len() {
        return false;
    }
    let na = a.classes.len();
    let n = na + b.classes.len();

    // Disjoint union, b's class indices shifted by na.
    let mut classes: Vec<Vec<GenMember>> = Vec::with_capacity(n);
    for members in &a.classes {
        classes.push(members.iter().cloned().collect());
    }
    for members in &b.classes {
        classes.push(
            members
                .iter()
                .map(|mem| match mem {
                    GenMember::Arg(k) => GenMember::Arg(*k),
                    GenMember::Node { name, attrs, children } => GenMember::Node {
                        name: name.clone(),
                        attrs: attrs.clone(),
                        children: children.iter().map(|c| c + na).collect(),
                    },
                })
                .collect(),
        );
    }

    let mut colors: Vec<u64> = vec![0; n];
    for _ in 0..=n {
        let mut palette: HashMap<String, u64> = HashMap::new();
        let mut next: Vec<u64> = Vec::with_capacity(n);
        for members in &classes {
            let mut parts: Vec<String> = members
                .iter()
                .map(|mem| match mem {
                    GenMember::Arg(k) => format!("a{k}"),
                    GenMember::Node { name, attrs, children } => {
                        let cs: Vec<String> =
                            children.iter().map(|&c| colors[c].to_string()).collect();
                        format!("{name}{attrs:?}({})", cs.join(","))
                    }
                })
                .collect();
            parts.sort();
            parts.dedup();
            let key = parts.join(";");
            let fresh = palette.len() as u64;
            next.push(*palette.entry(key).or_insert(fresh));
        }
        colors = next;
    }

    let mut left: Vec<u64> = colors[..na].to_vec();
    let mut right: Vec<u64> = colors[na..].to_vec();
    let exports_match = a
        .exports
        .iter()
        .zip(&b.exports)
        .all(|(&ea, &eb)| colors[ea] == colors[na + eb]);
    left.sort_unstable();
    right.sort_unstable();
    left == right && exports_match
}

// ---------------------------------------------------------------------
// Brute-force recursive e-matcher
// ---------------------------------------------------------------------

/// All matches of `pat` over the e-graph, found by brute-force
/// recursive enumeration of e-node alternatives per class. Returns
/// `(root op, variable bindings)` pairs; duplicates collapse in the set.
pub fn brute_matches(
    m: &Module,
    view: EGraphView,
    pat: &TermPattern,
) -> BTreeSet<(OpId, BTreeMap<String, ValueId>)> {
    let mut out = BTreeSet::new();
    for &root in m.block_ops(view.block) {
        if is_eclass(m, root) || m.op(root).name() == "eqsat.yield" {
            continue;
        }
        for bindings in brute_match_op(m, pat, root, BTreeMap::new()) {
            out.insert((root, bindings));
        }
    }
    out
}

fn brute_match_op(
    m: &Module,
    pat: &TermPattern,
    op: OpId,
    bindings: BTreeMap<String, ValueId>,
) -> Vec<BTreeMap<String, ValueId>> {
    let TermPattern::Node { op: name, children, attrs, result_type } = pat else {
        panic!("op position patterns are nodes");
    };
    let data = m.op(op);
    if data.name() != name || data.operands().len() != children.len() {
        return Vec::new();
    }
    for (key, want) in attrs {
        if data.attr(key) != Some(want) {
            return Vec::new();
        }
    }
    if let Some(ty) = result_type {
        if data.results().is_empty() || m.value_type(data.results()[0]) != ty {
            return Vec::new();
        }
    }
    let mut states = vec![bindings];
    for (i, child) in children.iter().enumerate() {
        let operand = data.operands()[i];
        let mut next = Vec::new();
        for state in states {
            next.extend(brute_match_value(m, child, operand, state));
        }
        states = next;
        if states.is_empty() {
            break;
        }
    }
    states
}

fn brute_match_value(
    m: &Module,
    pat: &TermPattern,
    value: ValueId,
    bindings: BTreeMap<String, ValueId>,
) -> Vec<BTreeMap<String, ValueId>> {
    match pat {
        TermPattern::Var(name) => match bindings.get(name) {
            Some(&bound) => {
                if bound == value {
                    vec![bindings]
                } else {
                    Vec::new()
                }
            }
            None => {
                let mut b = bindings;
                b.insert(name.clone(), value);
                vec![b]
            }
        },
        TermPattern::Node { .. } => {
            let mut alternatives: Vec<OpId> = Vec::new();
            match as_eclass_result(m, value) {
                Some(class) => {
                    for &member in m.op(class).operands() {
                        if let Some(d) = m.defining_op(member) {
                            alternatives.push(d);
                        }
                    }
                }
                None => {
                    if let Some(d) = m.defining_op(value) {
                        alternatives.push(d);
                    }
                }
            }
            let mut out = Vec::new();
            for d in alternatives {
                out.extend(brute_match_op(m, pat, d, bindings.clone()));
            }
            out
        }
    }
}

// ---------------------------------------------------------------------
// Random patterns
// ---------------------------------------------------------------------

/// Shapes the random e-graph generator emits, for pattern generation.
pub const GEN_OPS: &[(&str, usize)] =
    &[("arith.constant", 0), ("test.f", 1), ("test.h", 1), ("test.g", 2), ("arith.addi", 2)];

/// A random op-rooted pattern of depth at most `depth`, drawing
/// variables (with reuse) from a shared pool.
pub fn random_pattern(rng: &mut StdRng, depth: usize, pool: &mut Vec<String>) -> TermPattern {
    let (name, arity) = GEN_OPS[rng.random_range(0..GEN_OPS.len())];
    let mut attrs = Vec::new();
    if name == "arith.constant" && rng.random_bool(0.7) {
        attrs.push(("value".to_string(), AttrValue::int(rng.random_range(0..3))));
    }
    let result_type = if rng.random_bool(0.15) {
        Some(eqsat_core::ir::TypeExpr::new(if rng.random_bool(0.8) { "i64" } else { "i32" }).unwrap())
    } else {
        None
    };
    let mut children = Vec::new();
    for _ in 0..arity {
        if depth > 1 && rng.random_bool(0.45) {
            children.push(random_pattern(rng, depth - 1, pool));
        } else {
            children.push(TermPattern::Var(random_var(rng, pool)));
        }
    }
    TermPattern::Node { op: name.to_string(), children, attrs, result_type }
}

fn random_var(rng: &mut StdRng, pool: &mut Vec<String>) -> String {
    if !pool.is_empty() && rng.random_bool(0.35) {
        pool[rng.random_range(0..pool.len())].clone()
    } else {
        let name = format!("v{}", pool.len());
        pool.push(name.clone());
        name
    }
}

// ---------------------------------------------------------------------
// Brute-force extraction oracle
// ---------------------------------------------------------------------

/// Minimum extractable cost of `class` over all acyclic member
/// selections, by exhaustive enumeration of one-member-per-class
/// assignments. `None` means no acyclic selection reaches the class.
pub fn brute_min_cost(
    m: &Module,
    view: EGraphView,
    cm: &CostModel,
    class: OpId,
) -> Option<BigRational> {
    let class_ops = eclass_ops(m, view);
    let sizes: Vec<usize> = class_ops.iter().map(|&c| m.op(c).operands().len()).collect();
    let total: usize = sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s.max(1)))
        .expect("assignment space overflow");
    assert!(total <= 1 << 20, "assignment space too large for brute force");

    let mut best: Option<BigRational> = None;
    let mut assignment = vec![0usize; class_ops.len()];
    loop {
        let chosen: HashMap<OpId, usize> =
            class_ops.iter().copied().zip(assignment.iter().copied()).collect();
        let mut visiting = HashSet::new();
        if let Some(cost) = assignment_class_cost(m, view, cm, &chosen, class, &mut visiting) {
            if best.as_ref().is_none_or(|b| cost < *b) {
                best = Some(cost);
            }
        }
        // Odometer increment over the assignment space.
        let mut i = 0;
        loop {
            if i == assignment.len() {
                return best;
            }
            assignment[i] += 1;
            if assignment[i] < sizes[i].max(1) {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

fn assignment_class_cost(
    m: &Module,
    view: EGraphView,
    cm: &CostModel,
    chosen: &HashMap<OpId, usize>,
    class: OpId,
    visiting: &mut HashSet<OpId>,
) -> Option<BigRational> {
    if !visiting.insert(class) {
        return None; // cyclic under this assignment
    }
    let members = m.op(class).operands();
    let result = if members.is_empty() {
        None
    } else {
        let member = members[chosen[&class]];
        assignment_value_cost(m, view, cm, chosen, member, visiting)
    };
    visiting.remove(&class);
    result
}

fn assignment_value_cost(
    m: &Module,
    view: EGraphView,
    cm: &CostModel,
    chosen: &HashMap<OpId, usize>,
    value: ValueId,
    visiting: &mut HashSet<OpId>,
) -> Option<BigRational> {
    let outside = match m.producer(value) {
        Producer::BlockArg { block, .. } => block != view.block,
        Producer::OpResult { op, .. } => m.op(op).parent() != Some(view.block),
    };
    if outside {
        return Some(BigRational::zero());
    }
    if let Some(class) = as_eclass_result(m, value) {
        return assignment_class_cost(m, view, cm, chosen, class, visiting);
    }
    let op = m.defining_op(value)?;
    if is_eclass(m, op) {
        return None; // a class handle used as a member of another class
    }
    let mut total = cm.get(m.op(op).name()).clone();
    for &operand in m.op(op).operands() {
        total += assignment_value_cost(m, view, cm, chosen, operand, visiting)?;
    }
    Some(total)
}

// ---------------------------------------------------------------------
// Hashcons invariant
// ---------------------------------------------------------------------

/// Checks the hashcons invariant over every e-graph of the module: no
/// two live e-nodes share a structural key, and every value is a member
/// of at most one e-class.
pub fn check_hashcons_invariant(m: &Module) -> Result<(), String> {
    for view in eqsat_core::eqsat::egraphs(m) {
        let mut seen: HashMap<eqsat_core::ir::StructuralKey, OpId> = HashMap::new();
        for &op in m.block_ops(view.block) {
            if is_eclass(m, op)
                || m.op(op).name() == "eqsat.yield"
                || !m.op(op).regions().is_empty()
            {
                continue;
            }
            let key = m.structural_key(op).map_err(|d| d.to_string())?;
            if let Some(prev) = seen.insert(key, op) {
                return Err(format!(
                    "duplicate e-nodes {} and {}",
                    m.op_path(prev),
                    m.op_path(op)
                ));
            }
        }
        let mut membership: HashMap<ValueId, OpId> = HashMap::new();
        for &op in m.block_ops(view.block) {
            if !is_eclass(m, op) {
                continue;
            }
            for &member in m.op(op).operands() {
                if let Some(prev) = membership.insert(member, op) {
                    return Err(format!(
                        "value is a member of two e-classes: {} and {}",
                        m.op_path(prev),
                        m.op_path(op)
                    ));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Random straight-line functions (for conversion round trips)
// ---------------------------------------------------------------------

/// A random straight-line function over `i64` with no dead code: every
/// value is transitively consumed by the final collector op, whose
/// result is returned.
pub fn random_function(rng: &mut StdRng) -> String {
    let num_args = rng.random_range(1..=3);
    let mut out = String::new();
    let args: Vec<String> = (0..num_args).map(|k| format!("%a{k} : i64")).collect();
    out.push_str(&format!("func.func @gen({}) -> i64 {{\n", args.join(", ")));

    // pool of not-yet-consumed values; `all` holds every value in scope
    let mut pool: Vec<String> = (0..num_args).map(|k| format!("%a{k}")).collect();
    let mut all = pool.clone();
    let mut counter = 0usize;

    for _ in 0..rng.random_range(2..=8) {
        let v = format!("%v{counter}");
        counter += 1;
        match rng.random_range(0..6) {
            0 => {
                out.push_str(&format!(
                    "  {v} = arith.constant {{value = {}}} : i64\n",
                    rng.random_range(-4..100)
                ));
            }
            1 => {
                let x = consume(rng, &mut pool, &all);
                out.push_str(&format!("  {v} = test.u {x} : i64\n"));
            }
            2 | 3 => {
                let x = consume(rng, &mut pool, &all);
                let y = consume(rng, &mut pool, &all);
                let name = ["arith.addi", "arith.muli", "test.bin"]
                    [rng.random_range(0..3)];
                out.push_str(&format!("  {v} = {name} {x}, {y} : i64\n"));
            }
            4 => {
                let x = consume(rng, &mut pool, &all);
                let w = format!("%v{counter}");
                counter += 1;
                out.push_str(&format!("  {v}, {w} = test.split {x} : (i64) -> (i64, i64)\n"));
                pool.push(w.clone());
                all.push(w);
            }
            _ => {
                let x = consume(rng, &mut pool, &all);
                out.push_str(&format!(
                    "  {v} = test.tagged {x} {{kind = {}}} : i64\n",
                    rng.random_range(0..4)
                ));
            }
        }
        pool.push(v.clone());
        all.push(v);
    }

    // Collector: consumes everything still unused, so nothing is dead.
    let r = format!("%v{counter}");
    out.push_str(&format!("  {r} = test.collect {} : i64\n", pool.join(", ")));
    out.push_str(&format!("  func.return {r} : i64\n"));
    out.push_str("}\n");
    out
}

fn consume(rng: &mut StdRng, pool: &mut Vec<String>, all: &[String]) -> String {
    // Prefer consuming from the unused pool so it drains.
    if !pool.is_empty() && rng.random_bool(0.7) {
        let i = rng.random_range(0..pool.len());
        pool.swap_remove(i)
    } else {
        all[rng.random_range(0..all.len())].clone()
    }
}
