//! Structural verification of a [`Module`]: name validity, terminator
//! placement, region kinds, operand visibility, and use-list
//! consistency. E-graph-specific rules live in `crate::eqsat`.

use std::collections::HashSet;

use crate::dialect;
use crate::ir::{AttrValue, Diagnostic, Module, OpId, RegionKind, Use};

/// Checks every structural invariant and returns all violations found
/// (empty means the module is well-formed).
pub fn verify_module(m: &Module) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut syms: HashSet<&str> = HashSet::new();

    for &top in m.top_ops() {
        if m.op(top).name() != "func.func" {
            diags.push(Diagnostic::for_op(m, top, format!(
                    "top-level operation must be func.func, found `{}`",
                    m.op(top).name()
                )));
        }
    }

    for op in m.walk_ops() {
        verify_op(m, op, &mut syms, &mut diags);
    }
    diags
}

/// Convenience wrapper returning the first violation as an error.
pub fn verify_ok(m: &Module) -> Result<(), Diagnostic> {
    match verify_module(m).into_iter().next() {
        None => Ok(()),
        Some(d) => Err(d),
    }
}

fn verify_op<'m>(m: &'m Module, op: OpId, syms: &mut HashSet<&'m str>, diags: &mut Vec<Diagnostic>) {
    let data = m.op(op);

    if !dialect::valid_op_name(data.name()) {
        diags.push(Diagnostic::for_op(m, op, format!("invalid operation name `{}`", data.name())));
    }

    // Attribute keys must be unique identifiers.
    let mut seen = HashSet::new();
    for (key, _) in data.attrs() {
        if !is_ident(key) {
            diags.push(Diagnostic::for_op(m, op, format!("invalid attribute name `{key}`")));
        }
        if !seen.insert(key.as_str()) {
            diags.push(Diagnostic::for_op(m, op, format!("duplicate attribute `{key}`")));
        }
    }

    if data.name() == "func.func" {
        match data.attr("sym_name") {
            Some(AttrValue::Str(sym)) => {
                if !syms.insert(sym) {
                    diags.push(Diagnostic::for_op(m, op, format!("duplicate function symbol `@{sym}`")));
                }
            }
            _ => diags.push(Diagnostic::for_op(m, op, "func.func requires a string `sym_name` attribute".to_string())),
        }
        if data.regions().len() != 1 {
            diags.push(Diagnostic::for_op(m, op, format!("func.func requires exactly one region, has {}", data.regions().len())));
        }
        if !data.operands().is_empty() || !data.results().is_empty() {
            diags.push(Diagnostic::for_op(m, op, "func.func takes no operands and produces no results".to_string()));
        }
    } else if data.parent().is_none() {
        // Checked per top op too, but nested detached ops are a bug.
        diags.push(Diagnostic::for_op(m, op, format!("`{}` is not inserted in any block", data.name())));
    }

    // Terminator placement.
    if dialect::is_terminator(data.name()) {
        match data.parent() {
            None => {}
            Some(block) => {
                if m.block_ops(block).last() != Some(&op) {
                    diags.push(Diagnostic::for_op(m, op, format!("terminator `{}` must be the last operation in its block", data.name())));
                }
                let owner = m.block_parent(block).map(|o| m.op(o).name().to_string());
                let expected = owner.as_deref().and_then(dialect::required_terminator);
                if expected != Some(data.name()) {
                    diags.push(Diagnostic::for_op(m, op, format!(
                            "terminator `{}` is not valid inside `{}`",
                            data.name(),
                            owner.as_deref().unwrap_or("<top level>")
                        )));
                }
            }
        }
    }

    // Regions: kind assignment, required terminator, block-arg policy.
    for region in data.regions() {
        let expected_kind = dialect::region_kind_for(data.name());
        if region.kind != expected_kind {
            let wanted = match expected_kind {
                RegionKind::Graph => "a graph region",
                RegionKind::SsaCfg => "an ssacfg region",
            };
            diags.push(Diagnostic::for_op(
                m,
                op,
                format!("region of `{}` must be {wanted}", data.name()),
            ));
        }
        if data.name() != "func.func" && !m.block_args(region.block).is_empty() {
            diags.push(Diagnostic::for_op(m, op, format!("region of `{}` must not declare block arguments", data.name())));
        }
        if let Some(term) = dialect::required_terminator(data.name()) {
            let last = m.block_ops(region.block).last().map(|&o| m.op(o).name());
            if last != Some(term) {
                diags.push(Diagnostic::for_op(m, op, format!(
                        "region of `{}` must end with `{term}`, found `{}`",
                        data.name(),
                        last.unwrap_or("<empty block>")
                    )));
            }
        }
        if m.block_parent(region.block) != Some(op) {
            diags.push(Diagnostic::for_op(m, op, "region block does not point back at its owner".to_string()));
        }
    }

    // Operand liveness and visibility.
    for (index, &operand) in data.operands().iter().enumerate() {
        if !m.value_is_live(operand) {
            diags.push(Diagnostic::for_op(m, op, format!("operand {index} of `{}` refers to an erased value", data.name())));
            continue;
        }
        if data.parent().is_some() && !m.is_visible(operand, (op, index)) {
            diags.push(Diagnostic::for_op(m, op, format!(
                    "operand {index} of `{}` is not visible at its use",
                    data.name()
                )));
        }
        // Use-list consistency: the value must record this exact use.
        let recorded = m
            .uses(operand)
            .iter()
            .filter(|u| **u == Use { op, index })
            .count();
        if recorded != 1 {
            diags.push(Diagnostic::for_op(m, op, format!(
                    "use-list inconsistency: operand {index} of `{}` recorded {recorded} times",
                    data.name()
                )));
        }
    }

    // And the converse: every recorded use of this op's results must be
    // an actual operand slot.
    for &result in data.results() {
        for u in m.uses(result) {
            let ok = m.op_is_live(u.op)
                && m.op(u.op).operands().get(u.index) == Some(&result);
            if !ok {
                diags.push(Diagnostic::for_op(m, op, format!(
                        "use-list inconsistency: stale use recorded on a result of `{}`",
                        data.name()
                    )));
            }
        }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}
