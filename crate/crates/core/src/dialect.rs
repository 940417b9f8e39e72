//! Dialect registry: region kinds, terminators, and operand-count
//! conventions for the operation names this toolchain understands.
//!
//! The IR itself is open — any `dialect.name` parses — but a few names
//! carry structural meaning (region kinds, required terminators) that
//! the verifier and the passes rely on.

use crate::ir::RegionKind;

/// Region kind implied by the operation owning the region.
pub fn region_kind_for(op_name: &str) -> RegionKind {
    if op_name == "eqsat.egraph" {
        RegionKind::Graph
    } else {
        RegionKind::SsaCfg
    }
}

/// Terminator an operation's region must end with, if the name is known
/// to require one.
pub fn required_terminator(op_name: &str) -> Option<&'static str> {
    match op_name {
        "func.func" => Some("func.return"),
        "eqsat.egraph" => Some("eqsat.yield"),
        "scf.for" | "scf.if" | "scf.while" => Some("scf.yield"),
        _ => None,
    }
}

/// True iff the name is a terminator: it may only appear last in a block.
pub fn is_terminator(op_name: &str) -> bool {
    matches!(op_name, "func.return" | "eqsat.yield" | "scf.yield")
}

/// Fixed operand count for names with a known arity, used to validate
/// rewrite-rule patterns before any IR is seen. Returns `None` for names
/// this toolchain has no convention for.
pub fn known_arity(op_name: &str) -> Option<usize> {
    match op_name {
        "arith.constant" => Some(0),
        "arith.addi" | "arith.subi" | "arith.muli" | "arith.divsi" | "arith.divui"
        | "arith.remsi" | "arith.remui" | "arith.shli" | "arith.shrsi" | "arith.shrui"
        | "arith.andi" | "arith.ori" | "arith.xori" | "arith.maxsi" | "arith.minsi" => Some(2),
        _ => None,
    }
}

/// True for names reserved by the e-graph encoding itself; rewrite rules
/// may not mention them.
pub fn is_eqsat_name(op_name: &str) -> bool {
    op_name == "eqsat.eclass" || op_name == "eqsat.egraph" || op_name == "eqsat.yield"
}

/// Validates a `dialect.name` operation name: two or more nonempty
/// identifier segments joined by dots.
pub fn valid_op_name(name: &str) -> bool {
    let segments: Vec<&str> = name.split('.').collect();
    segments.len() >= 2
        && segments.iter().all(|s| {
            !s.is_empty()
                && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        })
}
