//! Printer for the `.ir` format.
//!
//! Output is deterministic: values are renumbered `%0, %1, ...` per
//! function in definition order (arguments first, then results in
//! textual order), so `parse(print(m))` prints back byte-identically.

use std::collections::HashMap;
use std::fmt::Write;

use crate::ir::{AttrValue, Module, OpId, TypeExpr, ValueId};

pub fn print_module(m: &Module) -> String {
    let mut out = String::new();
    for &func in m.top_ops() {
        print_func(m, func, &mut out);
    }
    out
}

fn print_func(m: &Module, func: OpId, out: &mut String) {
    let mut names: HashMap<ValueId, usize> = HashMap::new();
    let mut counter = 0usize;
    let body = m.op(func).regions()[0].block;
    for &arg in m.block_args(body) {
        names.insert(arg, counter);
        counter += 1;
    }
    for &op in m.block_ops(body) {
        number_op(m, op, &mut names, &mut counter);
    }

    let sym = match m.op(func).attr("sym_name") {
        Some(AttrValue::Str(s)) => s.clone(),
        _ => String::new(),
    };
    write!(out, "func.func @{sym}(").unwrap();
    let args: Vec<String> = m
        .block_args(body)
        .iter()
        .map(|&a| format!("%{} : {}", names[&a], m.value_type(a)))
        .collect();
    out.push_str(&args.join(", "));
    out.push(')');
    let ret_types: Vec<&TypeExpr> = match m.block_ops(body).last() {
        Some(&last) if m.op(last).name() == "func.return" => {
            m.op(last).operands().iter().map(|&v| m.value_type(v)).collect()
        }
        _ => Vec::new(),
    };
    if !ret_types.is_empty() {
        out.push_str(" -> ");
        out.push_str(&format_types(&ret_types));
    }
    out.push_str(" {\n");
    for &op in m.block_ops(body) {
        print_op(m, op, &names, 1, out);
    }
    out.push_str("}\n");
}

fn number_op(m: &Module, op: OpId, names: &mut HashMap<ValueId, usize>, counter: &mut usize) {
    for &r in m.op(op).results() {
        names.insert(r, *counter);
        *counter += 1;
    }
    for region in m.op(op).regions() {
        for &inner in m.block_ops(region.block) {
            number_op(m, inner, names, counter);
        }
    }
}

fn print_op(m: &Module, op: OpId, names: &HashMap<ValueId, usize>, indent: usize, out: &mut String) {
    let data = m.op(op);
    for _ in 0..indent {
        out.push_str("  ");
    }
    if !data.results().is_empty() {
        let rs: Vec<String> = data.results().iter().map(|r| format!("%{}", names[r])).collect();
        write!(out, "{} = ", rs.join(", ")).unwrap();
    }
    out.push_str(data.name());
    if !data.operands().is_empty() {
        let os: Vec<String> = data.operands().iter().map(|o| format!("%{}", names[o])).collect();
        write!(out, " {}", os.join(", ")).unwrap();
    }
    if !data.attrs().is_empty() {
        let attrs: Vec<String> = data
            .attrs()
            .iter()
            .map(|(k, v)| format!("{k} = {}", format_attr(v)))
            .collect();
        write!(out, " {{{}}}", attrs.join(", ")).unwrap();
    }
    if !data.regions().is_empty() {
        if !data.results().is_empty() {
            let ret_types: Vec<&TypeExpr> =
                data.results().iter().map(|&r| m.value_type(r)).collect();
            write!(out, " -> {}", format_types(&ret_types)).unwrap();
        }
        for region in data.regions() {
            out.push_str(" {\n");
            for &inner in m.block_ops(region.block) {
                print_op(m, inner, names, indent + 1, out);
            }
            for _ in 0..indent {
                out.push_str("  ");
            }
            out.push('}');
        }
    } else {
        let operand_types: Vec<&TypeExpr> =
            data.operands().iter().map(|&o| m.value_type(o)).collect();
        let result_types: Vec<&TypeExpr> =
            data.results().iter().map(|&r| m.value_type(r)).collect();
        if !(operand_types.is_empty() && result_types.is_empty()) {
            let first = operand_types.first().or(result_types.first()).unwrap();
            let uniform =
                operand_types.iter().all(|t| t == first) && result_types.iter().all(|t| t == first);
            if uniform {
                write!(out, " : {first}").unwrap();
            } else {
                write!(
                    out,
                    " : ({}) -> {}",
                    operand_types.iter().map(|t| t.token()).collect::<Vec<_>>().join(", "),
                    format_types(&result_types)
                )
                .unwrap();
            }
        }
    }
    out.push('\n');
}

/// `T` for a single type, `(T1, T2)` (or `()`) otherwise.
fn format_types(types: &[&TypeExpr]) -> String {
    if types.len() == 1 {
        types[0].token().to_string()
    } else {
        format!("({})", types.iter().map(|t| t.token()).collect::<Vec<_>>().join(", "))
    }
}

fn format_attr(v: &AttrValue) -> String {
    match v {
        AttrValue::Int(i) => i.to_string(),
        AttrValue::Str(s) => format!("\"{}\"", escape(s)),
        AttrValue::Type(t) => t.token().to_string(),
    }
}

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out
}
