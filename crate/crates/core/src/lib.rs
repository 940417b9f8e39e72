//! Equality saturation embedded in an SSA IR.
//!
//! Instead of shipping terms to an external e-graph, the e-graph lives in
//! the IR itself: an `eqsat.egraph` operation holds a graph region whose
//! `eqsat.eclass` operations group equivalent values. Rewrites are
//! expressed as declarative rules, compiled to a backtracking match
//! program that enumerates e-class alternatives, and applied
//! non-destructively. Congruence closure is maintained by running
//! classical CSE inside the graph region, and a cost-based extractor
//! lowers the saturated e-graph back to plain SSA.

pub mod dialect;
pub mod ematch;
pub mod eqsat;
pub mod extract;
pub mod ir;
pub mod patterns;
pub mod rebuild;
pub mod saturate;
pub mod text;
