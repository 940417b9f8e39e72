//! Restoring congruence after unions: e-class merging alternated with
//! common-subexpression elimination until fixpoint.
//!
//! Because e-nodes take class handles as operands, structural CSE *is*
//! the upward-merging step of classic e-graph rebuilding: once two
//! classes merge, congruent parents become structurally identical, CSE
//! collapses them, and their classes are enqueued for the next merge
//! round.

use std::collections::HashMap;

use crate::eqsat::{is_eclass, EGraphView};
use crate::ir::{Diagnostic, Module, OpId, StructuralKey, ValueId};

/// Deferred class merges, drained by [`rebuild`]. Pairs may go stale
/// (one side already merged away); a forwarding map resolves them at
/// pop time.
#[derive(Clone, Default, Debug)]
pub struct PendingUnions {
    pairs: Vec<(OpId, OpId)>,
}

impl PendingUnions {
    pub fn new() -> PendingUnions {
        PendingUnions::default()
    }

    pub fn push(&mut self, a: OpId, b: OpId) {
        self.pairs.push((a, b));
    }

    pub fn extend(&mut self, pairs: impl IntoIterator<Item = (OpId, OpId)>) {
        self.pairs.extend(pairs);
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// Merges two e-classes. The survivor is whichever comes first in block
/// order; it inherits the other's members (duplicates dropped), all
/// uses of the dead handle are rewired, and the dead class is erased.
/// Merging may create reference cycles; graph regions permit them.
pub fn merge_eclasses(m: &mut Module, c1: OpId, c2: OpId) -> Result<OpId, Diagnostic> {
    assert_ne!(c1, c2, "merge_eclasses requires distinct classes");
    let t1 = m.value_type(m.op(c1).results()[0]).clone();
    let t2 = m.value_type(m.op(c2).results()[0]).clone();
    if t1 != t2 {
        return Err(Diagnostic::for_op(
            m,
            c1,
            format!("cannot merge e-classes of different types `{t1}` and `{t2}`"),
        ));
    }
    let p1 = m.position_in_block(c1).expect("eclass is in a block");
    let p2 = m.position_in_block(c2).expect("eclass is in a block");
    let (survivor, dead) = if p1 <= p2 { (c1, c2) } else { (c2, c1) };

    for member in m.op(dead).operands().to_vec() {
        if !m.op(survivor).operands().contains(&member) {
            m.push_operand(survivor, member);
        }
    }
    let dead_handle = m.op(dead).results()[0];
    let survivor_handle = m.op(survivor).results()[0];
    // Unlink the dead class's member list first so erase_op sees no
    // operands with lingering uses, then rewire its handle.
    m.set_operands(dead, &[]);
    m.replace_all_uses(dead_handle, survivor_handle)?;
    m.erase_op(dead)?;
    Ok(survivor)
}

/// One whole-e-graph CSE round. Among region-free non-class ops, every
/// structural collision keeps the first op in block order; uses of the
/// dropped results are rewired and the dropped ops erased. When a
/// rewire leaves one value a member of two classes, that pair is
/// enqueued (a value belongs to exactly one class).
pub fn cse_once(
    m: &mut Module,
    egraph: EGraphView,
    pending: &mut PendingUnions,
) -> Result<bool, Diagnostic> {
    let mut changed = false;
    let mut seen: HashMap<StructuralKey, OpId> = HashMap::new();
    for op in m.block_ops(egraph.block).to_vec() {
        if !m.op_is_live(op)
            || is_eclass(m, op)
            || m.op(op).name() == "eqsat.yield"
            || !m.op(op).regions().is_empty()
        {
            continue;
        }
        let key = m.structural_key(op)?;
        let kept = match seen.get(&key) {
            None => {
                seen.insert(key, op);
                continue;
            }
            Some(&kept) => kept,
        };
        for i in 0..m.op(op).results().len() {
            let dropped = m.op(op).results()[i];
            let into = m.op(kept).results()[i];
            m.replace_all_uses(dropped, into)?;
            dedup_memberships(m, into, pending);
        }
        m.erase_op(op)?;
        changed = true;
    }
    Ok(changed)
}

/// After rewiring `dropped -> into`, `into` may appear twice in one
/// class's member list (repeats dropped) and in several distinct
/// classes (enqueued as unions) — a chain of collisions onto the same
/// kept value produces both at once.
fn dedup_memberships(m: &mut Module, into: ValueId, pending: &mut PendingUnions) {
    let users: Vec<OpId> = m
        .uses(into)
        .iter()
        .map(|u| u.op)
        .filter(|&c| m.op_is_live(c) && is_eclass(m, c))
        .collect();
    let mut holders: Vec<OpId> = Vec::new();
    for c in users {
        if !holders.contains(&c) {
            holders.push(c);
            continue;
        }
        // `into` is listed more than once in c: keep the first slot
        let mut first = true;
        let members: Vec<ValueId> = m
            .op(c)
            .operands()
            .iter()
            .copied()
            .filter(|&v| v != into || std::mem::replace(&mut first, false))
            .collect();
        m.set_operands(c, &members);
    }
    if let Some((&first, rest)) = holders.split_first() {
        for &other in rest {
            pending.push(first, other);
        }
    }
}

/// Alternates pending merges with CSE rounds until both are quiet.
/// Returns the number of rounds that performed any work; the result is
/// congruence-closed: no structural duplicates, and every value is a
/// member of at most one class.
pub fn rebuild(
    m: &mut Module,
    egraph: EGraphView,
    mut pending: PendingUnions,
) -> Result<usize, Diagnostic> {
    let mut rounds = 0;
    loop {
        let mut worked = false;
        // forwarding for classes merged away earlier in this drain
        let mut forward: HashMap<OpId, OpId> = HashMap::new();
        let resolve = |forward: &HashMap<OpId, OpId>, mut c: OpId| {
            while let Some(&next) = forward.get(&c) {
                c = next;
            }
            c
        };
        for (a, b) in std::mem::take(&mut pending.pairs) {
            let a = resolve(&forward, a);
            let b = resolve(&forward, b);
            if a == b {
                continue;
            }
            let survivor = merge_eclasses(m, a, b)?;
            let dead = if survivor == a { b } else { a };
            forward.insert(dead, survivor);
            worked = true;
        }
        if cse_once(m, egraph, &mut pending)? {
            worked = true;
        }
        if !worked {
            // cse only enqueues unions when it erases something, so a
            // quiet round implies pending is empty too
            debug_assert!(pending.is_empty());
            return Ok(rounds);
        }
        rounds += 1;
    }
}

/// Plain structural CSE over ordinary (non-graph) blocks: within each
/// block, later region-free ops that duplicate an earlier op's
/// structural key are rewired to it and erased. Graph regions are left
/// to [`rebuild`]; ops without results or with regions are skipped.
/// Returns the number of erased ops.
pub fn cse_blocks(m: &mut Module) -> Result<usize, Diagnostic> {
    let mut erased = 0;
    let blocks: Vec<_> = m
        .walk_ops()
        .iter()
        .flat_map(|&op| m.op(op).regions().to_vec())
        .filter(|r| r.kind == crate::ir::RegionKind::SsaCfg)
        .map(|r| r.block)
        .collect();
    for block in blocks {
        let mut seen: HashMap<StructuralKey, OpId> = HashMap::new();
        for op in m.block_ops(block).to_vec() {
            if !m.op_is_live(op)
                || !m.op(op).regions().is_empty()
                || m.op(op).results().is_empty()
                || crate::dialect::is_terminator(m.op(op).name())
            {
                continue;
            }
            let key = m.structural_key(op)?;
            match seen.get(&key) {
                None => {
                    seen.insert(key, op);
                }
                Some(&kept) => {
                    for i in 0..m.op(op).results().len() {
                        let dropped = m.op(op).results()[i];
                        let into = m.op(kept).results()[i];
                        m.replace_all_uses(dropped, into)?;
                    }
                    m.erase_op(op)?;
                    erased += 1;
                }
            }
        }
    }
    Ok(erased)
}
