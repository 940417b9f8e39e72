//! Declarative rewrite rules and their lowering to one combined
//! imperative match program.
//!
//! Rules come from `.eqr` files: `rule "<name>": <lhs> => <rhs>` (or
//! `<=>` for bidirectional), where a pattern is `?var` or
//! `(op.name <child>* {key = int, ...}? (: type)?)`. Lowering merges
//! all (directed) rules into a single branching program whose shared
//! prefixes are checked once and whose failure edges implement early
//! bail-out — the declarative-to-imperative split mirrors the
//! `pdl`/`pdl_interp` design.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;

use crate::dialect;
use crate::ir::{AttrList, AttrValue, TypeExpr};
use crate::text::lexer::{tokenize, Token, TokenKind};
use crate::text::SourceDiagnostic;

/// A term-shaped pattern over operations and variables. Variables bind
/// e-class handles; repeated variables demand class equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TermPattern {
    Var(String),
    Node {
        op: String,
        children: Vec<TermPattern>,
        attrs: AttrList,
        result_type: Option<TypeExpr>,
    },
}

impl TermPattern {
    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'p>(&'p self, out: &mut BTreeSet<&'p str>) {
        match self {
            TermPattern::Var(name) => {
                out.insert(name);
            }
            TermPattern::Node { children, .. } => {
                for child in children {
                    child.collect_vars(out);
                }
            }
        }
    }
}

/// One `rule` clause, possibly bidirectional.
#[derive(Clone, Debug)]
pub struct RewriteRule {
    pub name: String,
    pub lhs: TermPattern,
    pub rhs: TermPattern,
    pub bidirectional: bool,
}

/// A single left-to-right rewrite, after bidirectional expansion.
#[derive(Clone, Debug)]
pub struct DirectedRule {
    pub name: String,
    pub lhs: TermPattern,
    pub rhs: TermPattern,
}

/// Register index into a [`MatchProgram`]'s register file. Register 0
/// always holds the candidate root operation.
pub type Reg = usize;

/// One instruction of the combined match program. `ok`/`fail` are
/// instruction indices (always forward: the program is a DAG).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Inst {
    /// Load the defining operation of a value. Over an e-class handle
    /// this is the interpreter's backtracking point: one defining op
    /// per member e-node.
    GetDefiningOp { value: Reg, op: Reg, ok: usize, fail: usize },
    GetOperand { op: Reg, index: usize, value: Reg, ok: usize, fail: usize },
    GetResult { op: Reg, index: usize, value: Reg, ok: usize, fail: usize },
    CheckOpName { op: Reg, name: String, ok: usize, fail: usize },
    CheckOperandCount { op: Reg, count: usize, ok: usize, fail: usize },
    CheckAttribute { op: Reg, name: String, value: AttrValue, ok: usize, fail: usize },
    CheckResultType { op: Reg, index: usize, ty: TypeExpr, ok: usize, fail: usize },
    CheckSameValue { a: Reg, b: Reg, ok: usize, fail: usize },
    IsNotNull { value: Reg, ok: usize, fail: usize },
    /// Record a match for `rule` and continue at `next` (the next
    /// alternative, so one root can match several rules).
    RecordMatch { rule: usize, captures: Vec<(String, Reg)>, next: usize },
    Finalize,
}

impl Inst {
    /// Successor indices (ok, fail/next).
    pub fn successors(&self) -> Vec<usize> {
        match self {
            Inst::GetDefiningOp { ok, fail, .. }
            | Inst::GetOperand { ok, fail, .. }
            | Inst::GetResult { ok, fail, .. }
            | Inst::CheckOpName { ok, fail, .. }
            | Inst::CheckOperandCount { ok, fail, .. }
            | Inst::CheckAttribute { ok, fail, .. }
            | Inst::CheckResultType { ok, fail, .. }
            | Inst::CheckSameValue { ok, fail, .. }
            | Inst::IsNotNull { ok, fail, .. } => vec![*ok, *fail],
            Inst::RecordMatch { next, .. } => vec![*next],
            Inst::Finalize => vec![],
        }
    }
}

/// The combined program for a rule set, plus the directed rules it
/// records matches for.
#[derive(Clone, Debug)]
pub struct MatchProgram {
    pub insts: Vec<Inst>,
    pub rules: Vec<DirectedRule>,
    pub num_regs: usize,
}

// ---------------------------------------------------------------------
// Rule parsing

/// Parses a `.eqr` rule file.
pub fn parse_rules(text: &str) -> Result<Vec<RewriteRule>, Vec<SourceDiagnostic>> {
    let tokens = tokenize(text).map_err(|d| vec![d])?;
    let mut p = RuleParser { tokens, pos: 0 };
    let mut rules = Vec::new();
    while !p.at(TokenKind::Eof) {
        rules.push(p.parse_rule().map_err(|d| vec![d])?);
    }
    Ok(rules)
}

struct RuleParser {
    tokens: Vec<Token>,
    pos: usize,
}

impl RuleParser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().kind == kind
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, message: String) -> SourceDiagnostic {
        SourceDiagnostic { line: self.peek().line, column: self.peek().column, message }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, SourceDiagnostic> {
        if self.at(kind) {
            Ok(self.bump())
        } else {
            Err(self.err_here(format!("expected {what}, found `{}`", self.peek().text)))
        }
    }

    fn parse_rule(&mut self) -> Result<RewriteRule, SourceDiagnostic> {
        let kw = self.expect(TokenKind::Ident, "`rule`")?;
        if kw.text != "rule" {
            return Err(SourceDiagnostic {
                line: kw.line,
                column: kw.column,
                message: format!("expected `rule`, found `{}`", kw.text),
            });
        }
        let name = self.expect(TokenKind::Str, "a rule name (string)")?;
        self.expect(TokenKind::Colon, "`:`")?;
        let lhs_loc = (self.peek().line, self.peek().column);
        let lhs = self.parse_pattern()?;
        let bidirectional = match self.peek().kind {
            TokenKind::FatArrow => {
                self.bump();
                false
            }
            TokenKind::BiArrow => {
                self.bump();
                true
            }
            _ => return Err(self.err_here(format!("expected `=>` or `<=>`, found `{}`", self.peek().text))),
        };
        let rhs_loc = (self.peek().line, self.peek().column);
        let rhs = self.parse_pattern()?;

        let fail = |loc: (usize, usize), message: String| SourceDiagnostic {
            line: loc.0,
            column: loc.1,
            message,
        };
        if matches!(lhs, TermPattern::Var(_)) {
            return Err(fail(lhs_loc, format!("rule \"{}\": left-hand side must be an operation pattern", name.text)));
        }
        if let Some(var) = rhs.vars().difference(&lhs.vars()).next() {
            return Err(fail(rhs_loc, format!("rule \"{}\": unbound variable ?{var}", name.text)));
        }
        if bidirectional {
            if matches!(rhs, TermPattern::Var(_)) {
                return Err(fail(rhs_loc, format!(
                    "rule \"{}\": both sides of `<=>` must be operation patterns",
                    name.text
                )));
            }
            if let Some(var) = lhs.vars().difference(&rhs.vars()).next() {
                return Err(fail(lhs_loc, format!(
                    "rule \"{}\": variable ?{var} is unbound in the reversed direction",
                    name.text
                )));
            }
        }
        Ok(RewriteRule { name: name.text, lhs, rhs, bidirectional })
    }

    fn parse_pattern(&mut self) -> Result<TermPattern, SourceDiagnostic> {
        if self.at(TokenKind::Question) {
            self.bump();
            let name = self.expect(TokenKind::Ident, "a variable name")?;
            if name.text.contains('.') {
                return Err(SourceDiagnostic {
                    line: name.line,
                    column: name.column,
                    message: format!("invalid variable name `?{}`", name.text),
                });
            }
            return Ok(TermPattern::Var(name.text));
        }
        self.expect(TokenKind::LParen, "`(` or `?var`")?;
        let op = self.expect(TokenKind::Ident, "an operation name")?;
        if !dialect::valid_op_name(&op.text) {
            return Err(SourceDiagnostic {
                line: op.line,
                column: op.column,
                message: format!("invalid operation name `{}`", op.text),
            });
        }
        if dialect::is_eqsat_name(&op.text) {
            return Err(SourceDiagnostic {
                line: op.line,
                column: op.column,
                message: format!("patterns may not mention the e-graph encoding op `{}`", op.text),
            });
        }
        let mut children = Vec::new();
        while self.at(TokenKind::Question) || self.at(TokenKind::LParen) {
            children.push(self.parse_pattern()?);
        }
        let mut attrs = AttrList::new();
        if self.at(TokenKind::LBrace) {
            self.bump();
            loop {
                let key = self.expect(TokenKind::Ident, "an attribute name")?;
                self.expect(TokenKind::Equals, "`=`")?;
                let value = self.expect(TokenKind::Int, "an integer literal")?;
                attrs.push((key.text, AttrValue::Int(value.text.parse::<BigInt>().unwrap())));
                if self.at(TokenKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(TokenKind::RBrace, "`}`")?;
        }
        let mut result_type = None;
        if self.at(TokenKind::Colon) {
            self.bump();
            let ty = self.expect(TokenKind::Ident, "a type")?;
            result_type = Some(TypeExpr::new(&ty.text).map_err(|e| SourceDiagnostic {
                line: ty.line,
                column: ty.column,
                message: e,
            })?);
        }
        if let Some(arity) = dialect::known_arity(&op.text) {
            if children.len() != arity {
                return Err(SourceDiagnostic {
                    line: op.line,
                    column: op.column,
                    message: format!(
                        "`{}` takes {arity} operand(s), pattern has {}",
                        op.text,
                        children.len()
                    ),
                });
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(TermPattern::Node { op: op.text, children, attrs, result_type })
    }
}

// ---------------------------------------------------------------------
// Lowering: directed rules → one combined match program

/// Abstract step of one rule's linear matching plan. `Slot` numbers are
/// rule-local step indices; slot usize::MAX is the root op register.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Step {
    CheckOpName { op: Reg, name: String },
    CheckOperandCount { op: Reg, count: usize },
    CheckAttribute { op: Reg, name: String, value: AttrValue },
    CheckResultType { op: Reg, index: usize, ty: TypeExpr },
    GetOperand { op: Reg, index: usize },
    IsNotNull { value: Reg },
    GetDefiningOp { value: Reg },
    CheckSameValue { a: Reg, b: Reg },
}

impl Step {
    fn has_output(&self) -> bool {
        matches!(self, Step::GetOperand { .. } | Step::GetDefiningOp { .. })
    }
}

/// Trie of steps: shared prefixes (with identical registers) collapse
/// into one node.
struct TrieNode {
    step: Option<Step>, // None: a RecordMatch leaf
    rule: usize,
    captures: Vec<(String, Reg)>,
    out_reg: Reg,
    children: Vec<TrieNode>,
}

/// Expands bidirectional rules into directed ones (`name-rev` for the
/// reversed copy).
pub fn expand_rules(rules: &[RewriteRule]) -> Vec<DirectedRule> {
    let mut out = Vec::new();
    for rule in rules {
        out.push(DirectedRule {
            name: rule.name.clone(),
            lhs: rule.lhs.clone(),
            rhs: rule.rhs.clone(),
        });
        if rule.bidirectional {
            out.push(DirectedRule {
                name: format!("{}-rev", rule.name),
                lhs: rule.rhs.clone(),
                rhs: rule.lhs.clone(),
            });
        }
    }
    out
}

/// Lowers a rule set into the combined match program.
pub fn lower_rules(rules: &[RewriteRule]) -> MatchProgram {
    let directed = expand_rules(rules);
    let mut next_reg: Reg = 1; // register 0 is the root operation
    let mut roots: Vec<TrieNode> = Vec::new();

    for (rule_idx, rule) in directed.iter().enumerate() {
        let mut steps = Vec::new();
        let mut bindings: BTreeMap<String, Reg> = BTreeMap::new();
        plan_node(&rule.lhs, 0, &mut steps, &mut bindings, &mut 1);
        // The planning pass above used rule-local registers; insertion
        // re-maps them onto trie registers as prefixes are shared.
        insert_rule(&mut roots, &steps, rule_idx, &rule.lhs, &mut next_reg);
    }

    emit_program(roots, directed, next_reg)
}

/// Emits the abstract step sequence for one pattern node rooted at op
/// register `op_reg`. Rule-local registers are assigned sequentially
/// from `next_local`; `insert_rule` re-maps them during trie insertion.
fn plan_node(
    pattern: &TermPattern,
    op_reg: Reg,
    steps: &mut Vec<(Step, Reg)>,
    bindings: &mut BTreeMap<String, Reg>,
    next_local: &mut Reg,
) {
    let TermPattern::Node { op, children, attrs, result_type } = pattern else {
        unreachable!("plan_node is only called on Node patterns");
    };
    steps.push((Step::CheckOpName { op: op_reg, name: op.clone() }, 0));
    steps.push((Step::CheckOperandCount { op: op_reg, count: children.len() }, 0));
    for (name, value) in attrs {
        steps.push((
            Step::CheckAttribute { op: op_reg, name: name.clone(), value: value.clone() },
            0,
        ));
    }
    if let Some(ty) = result_type {
        steps.push((Step::CheckResultType { op: op_reg, index: 0, ty: ty.clone() }, 0));
    }
    for (index, child) in children.iter().enumerate() {
        let value_reg = *next_local;
        *next_local += 1;
        steps.push((Step::GetOperand { op: op_reg, index }, value_reg));
        steps.push((Step::IsNotNull { value: value_reg }, 0));
        match child {
            TermPattern::Var(name) => match bindings.get(name) {
                Some(&first) => {
                    steps.push((Step::CheckSameValue { a: value_reg, b: first }, 0));
                }
                None => {
                    bindings.insert(name.clone(), value_reg);
                }
            },
            TermPattern::Node { .. } => {
                let child_op_reg = *next_local;
                *next_local += 1;
                steps.push((Step::GetDefiningOp { value: value_reg }, child_op_reg));
                plan_node(child, child_op_reg, steps, bindings, next_local);
            }
        }
    }
}

/// Inserts one rule's step sequence into the trie, sharing any prefix
/// whose steps and registers coincide, and allocating global registers
/// for new nodes.
fn insert_rule(
    roots: &mut Vec<TrieNode>,
    steps: &[(Step, Reg)],
    rule_idx: usize,
    lhs: &TermPattern,
    next_reg: &mut Reg,
) {
    // rule-local register -> global register (0 is shared by convention)
    let mut reg_map: HashMap<Reg, Reg> = HashMap::new();
    reg_map.insert(0, 0);

    let mut level = roots;
    for (step, local_out) in steps {
        let mapped = map_step(step, &reg_map);
        let pos = level.iter().position(|n| n.step.as_ref() == Some(&mapped));
        let pos = match pos {
            Some(pos) => pos,
            None => {
                let out_reg = if step.has_output() {
                    let r = *next_reg;
                    *next_reg += 1;
                    r
                } else {
                    0
                };
                level.push(TrieNode {
                    step: Some(mapped),
                    rule: 0,
                    captures: Vec::new(),
                    out_reg,
                    children: Vec::new(),
                });
                level.len() - 1
            }
        };
        if step.has_output() {
            reg_map.insert(*local_out, level[pos].out_reg);
        }
        level = &mut level[pos].children;
    }

    // Leaf: RecordMatch with captured bindings (recomputed here with the
    // final register mapping, sorted by variable name).
    let mut bindings: BTreeMap<String, Reg> = BTreeMap::new();
    let mut steps2 = Vec::new();
    plan_node(lhs, 0, &mut steps2, &mut bindings, &mut 1);
    let captures: Vec<(String, Reg)> =
        bindings.into_iter().map(|(name, local)| (name, reg_map[&local])).collect();
    level.push(TrieNode {
        step: None,
        rule: rule_idx,
        captures,
        out_reg: 0,
        children: Vec::new(),
    });
}

fn map_step(step: &Step, reg_map: &HashMap<Reg, Reg>) -> Step {
    let m = |r: &Reg| reg_map[r];
    match step {
        Step::CheckOpName { op, name } => Step::CheckOpName { op: m(op), name: name.clone() },
        Step::CheckOperandCount { op, count } => {
            Step::CheckOperandCount { op: m(op), count: *count }
        }
        Step::CheckAttribute { op, name, value } => {
            Step::CheckAttribute { op: m(op), name: name.clone(), value: value.clone() }
        }
        Step::CheckResultType { op, index, ty } => {
            Step::CheckResultType { op: m(op), index: *index, ty: ty.clone() }
        }
        Step::GetOperand { op, index } => Step::GetOperand { op: m(op), index: *index },
        Step::IsNotNull { value } => Step::IsNotNull { value: m(value) },
        Step::GetDefiningOp { value } => Step::GetDefiningOp { value: m(value) },
        Step::CheckSameValue { a, b } => Step::CheckSameValue { a: m(a), b: m(b) },
    }
}

/// Linearizes the trie in preorder. Each node's `fail` edge (and each
/// RecordMatch's `next`) points at the start of the next alternative:
/// the following sibling subtree, or the nearest ancestor's, or
/// Finalize.
fn emit_program(roots: Vec<TrieNode>, rules: Vec<DirectedRule>, num_regs: usize) -> MatchProgram {
    fn subtree_size(node: &TrieNode) -> usize {
        1 + node.children.iter().map(subtree_size).sum::<usize>()
    }
    fn emit(node: &TrieNode, at: usize, next_alt: usize, insts: &mut Vec<Inst>) {
        debug_assert_eq!(insts.len(), at);
        match &node.step {
            None => insts.push(Inst::RecordMatch {
                rule: node.rule,
                captures: node.captures.clone(),
                next: next_alt,
            }),
            Some(step) => {
                let ok = at + 1;
                let fail = next_alt;
                insts.push(match step.clone() {
                    Step::CheckOpName { op, name } => Inst::CheckOpName { op, name, ok, fail },
                    Step::CheckOperandCount { op, count } => {
                        Inst::CheckOperandCount { op, count, ok, fail }
                    }
                    Step::CheckAttribute { op, name, value } => {
                        Inst::CheckAttribute { op, name, value, ok, fail }
                    }
                    Step::CheckResultType { op, index, ty } => {
                        Inst::CheckResultType { op, index, ty, ok, fail }
                    }
                    Step::GetOperand { op, index } => {
                        Inst::GetOperand { op, index, value: node.out_reg, ok, fail }
                    }
                    Step::IsNotNull { value } => Inst::IsNotNull { value, ok, fail },
                    Step::GetDefiningOp { value } => {
                        Inst::GetDefiningOp { value, op: node.out_reg, ok, fail }
                    }
                    Step::CheckSameValue { a, b } => Inst::CheckSameValue { a, b, ok, fail },
                });
                let mut child_at = at + 1;
                for (i, child) in node.children.iter().enumerate() {
                    let child_next = if i + 1 < node.children.len() {
                        child_at + subtree_size(child)
                    } else {
                        next_alt
                    };
                    emit(child, child_at, child_next, insts);
                    child_at += subtree_size(child);
                }
            }
        }
    }

    let total: usize = roots.iter().map(subtree_size).sum();
    let finalize_at = total;
    let mut insts = Vec::with_capacity(total + 1);
    let mut at = 0;
    for (i, root) in roots.iter().enumerate() {
        let next_alt = if i + 1 < roots.len() { at + subtree_size(root) } else { finalize_at };
        emit(root, at, next_alt, &mut insts);
        at += subtree_size(root);
    }
    insts.push(Inst::Finalize);
    MatchProgram { insts, rules, num_regs }
}

// ---------------------------------------------------------------------
// RHS build actions

/// Where a created operation's operand (or the replacement value) comes
/// from: a variable bound by the lhs, or an earlier created operation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ValueSource {
    Bound(String),
    Created(usize),
}

/// One step of materializing a rule's right-hand side.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BuildAction {
    /// Create (or find, via hashconsing) an operation. `result_type`
    /// `None` defaults to the matched root class's type at apply time.
    CreateOperation {
        name: String,
        operands: Vec<ValueSource>,
        attrs: AttrList,
        result_type: Option<TypeExpr>,
    },
    /// Make the matched root's class contain `source`.
    Replace { source: ValueSource },
}

/// Compiles a directed rule's rhs into an ordered action list:
/// CreateOperation bottom-up over rhs nodes, then one Replace.
pub fn rhs_actions(rule: &DirectedRule) -> Vec<BuildAction> {
    let mut actions = Vec::new();
    let root = build_source(&rule.rhs, &mut actions);
    actions.push(BuildAction::Replace { source: root });
    actions
}

fn build_source(pattern: &TermPattern, actions: &mut Vec<BuildAction>) -> ValueSource {
    match pattern {
        TermPattern::Var(name) => ValueSource::Bound(name.clone()),
        TermPattern::Node { op, children, attrs, result_type } => {
            let operands = children.iter().map(|c| build_source(c, actions)).collect();
            actions.push(BuildAction::CreateOperation {
                name: op.clone(),
                operands,
                attrs: attrs.clone(),
                result_type: result_type.clone(),
            });
            ValueSource::Created(actions.len() - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const ADD_ZERO: &str =
        "rule \"add-zero\": (arith.addi ?a (arith.constant {value = 0})) => ?a\n";
    pub(crate) const MUL2_SHIFT: &str = "rule \"mul2-shift\": (arith.muli ?x (arith.constant {value = 2})) => (arith.shli ?x (arith.constant {value = 1}))\n";

    fn root_check_count(p: &MatchProgram, name: &str) -> usize {
        p.insts
            .iter()
            .filter(|i| matches!(i, Inst::CheckOpName { op: 0, name: n, .. } if n == name))
            .count()
    }

    #[test]
    fn parses_add_zero() {
        let rules = parse_rules(ADD_ZERO).unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].name, "add-zero");
        assert!(!rules[0].bidirectional);
        assert_eq!(rules[0].lhs.vars().len(), 1);
        assert_eq!(rules[0].rhs, TermPattern::Var("a".to_string()));
    }

    #[test]
    fn parses_mul2_shift_and_bidirectional() {
        let rules = parse_rules(MUL2_SHIFT).unwrap();
        assert_eq!(rules.len(), 1);
        let both = "rule \"comm-add\": (arith.addi ?a ?b) <=> (arith.addi ?b ?a)\n";
        let rules = parse_rules(both).unwrap();
        assert!(rules[0].bidirectional);
        assert_eq!(expand_rules(&rules).len(), 2);
        assert_eq!(expand_rules(&rules)[1].name, "comm-add-rev");
    }

    #[test]
    fn rejects_unbound_rhs_variable() {
        let err = parse_rules("rule \"bad\": (arith.addi ?a ?b) => ?c\n").unwrap_err();
        assert!(err[0].message.contains("unbound variable ?c"), "{:?}", err);
    }

    #[test]
    fn rejects_arity_mismatch() {
        let err = parse_rules("rule \"bad\": (arith.addi ?a) => ?a\n").unwrap_err();
        assert!(err[0].message.contains("takes 2 operand(s)"), "{:?}", err);
        let err = parse_rules("rule \"bad\": (arith.constant ?a) => ?a\n").unwrap_err();
        assert!(err[0].message.contains("takes 0 operand(s)"), "{:?}", err);
    }

    #[test]
    fn rejects_eqsat_ops_and_var_lhs() {
        let err = parse_rules("rule \"bad\": (eqsat.eclass ?a) => ?a\n").unwrap_err();
        assert!(err[0].message.contains("e-graph encoding"), "{:?}", err);
        let err = parse_rules("rule \"bad\": ?a => ?a\n").unwrap_err();
        assert!(err[0].message.contains("left-hand side"), "{:?}", err);
    }

    #[test]
    fn rejects_one_sided_bidirectional() {
        let err =
            parse_rules("rule \"bad\": (arith.addi ?a (arith.constant {value = 0})) <=> ?a\n")
                .unwrap_err();
        assert!(err[0].message.contains("both sides"), "{:?}", err);
    }

    #[test]
    fn single_rule_has_one_root_check() {
        let rules = parse_rules(ADD_ZERO).unwrap();
        let p = lower_rules(&rules);
        assert_eq!(root_check_count(&p, "arith.addi"), 1);
        // ... and the expected instruction mix somewhere in the program
        assert!(p
            .insts
            .iter()
            .any(|i| matches!(i, Inst::CheckOperandCount { op: 0, count: 2, .. })));
        assert!(p.insts.iter().any(
            |i| matches!(i, Inst::CheckAttribute { name, value, .. } if name == "value" && *value == AttrValue::int(0))
        ));
        assert!(matches!(p.insts.last(), Some(Inst::Finalize)));
    }

    #[test]
    fn same_root_rules_share_the_root_check() {
        let two = format!("{ADD_ZERO}rule \"add-self\": (arith.addi ?a ?a) => (arith.muli ?a (arith.constant {{value = 2}}))\n");
        let rules = parse_rules(&two).unwrap();
        let p = lower_rules(&rules);
        assert_eq!(root_check_count(&p, "arith.addi"), 1);
        assert_eq!(
            p.insts
                .iter()
                .filter(|i| matches!(i, Inst::CheckOperandCount { op: 0, .. }))
                .count(),
            1
        );
        // both rules still reachable
        let records: Vec<usize> = p
            .insts
            .iter()
            .filter_map(|i| match i {
                Inst::RecordMatch { rule, .. } => Some(*rule),
                _ => None,
            })
            .collect();
        assert_eq!(records.len(), 2);
        assert!(records.contains(&0) && records.contains(&1));
    }

    #[test]
    fn nonlinear_pattern_compiles_to_check_same_value() {
        let rules = parse_rules("rule \"self\": (arith.addi ?a ?a) => ?a\n").unwrap();
        let p = lower_rules(&rules);
        assert!(p.insts.iter().any(|i| matches!(i, Inst::CheckSameValue { .. })));
        // the single capture refers to the first operand's register
        let caps = p
            .insts
            .iter()
            .find_map(|i| match i {
                Inst::RecordMatch { captures, .. } => Some(captures.clone()),
                _ => None,
            })
            .unwrap();
        assert_eq!(caps.len(), 1);
        assert_eq!(caps[0].0, "a");
    }

    #[test]
    fn program_control_flow_is_a_forward_dag() {
        let text = format!(
            "{ADD_ZERO}{MUL2_SHIFT}rule \"comm\": (arith.addi ?a ?b) <=> (arith.addi ?b ?a)\n"
        );
        let rules = parse_rules(&text).unwrap();
        let p = lower_rules(&rules);
        for (i, inst) in p.insts.iter().enumerate() {
            for succ in inst.successors() {
                assert!(succ > i, "edge {i} -> {succ} is not forward in {:?}", p.insts);
                assert!(succ < p.insts.len());
            }
        }
    }

    #[test]
    fn add_zero_actions_are_pure_replace() {
        let rules = parse_rules(ADD_ZERO).unwrap();
        let actions = rhs_actions(&expand_rules(&rules)[0]);
        assert_eq!(actions, vec![BuildAction::Replace { source: ValueSource::Bound("a".into()) }]);
    }

    #[test]
    fn mul2_shift_actions_build_bottom_up() {
        let rules = parse_rules(MUL2_SHIFT).unwrap();
        let actions = rhs_actions(&expand_rules(&rules)[0]);
        assert_eq!(actions.len(), 3);
        match &actions[0] {
            BuildAction::CreateOperation { name, operands, attrs, .. } => {
                assert_eq!(name, "arith.constant");
                assert!(operands.is_empty());
                assert_eq!(attrs[0].1, AttrValue::int(1));
            }
            other => panic!("expected constant creation, got {other:?}"),
        }
        match &actions[1] {
            BuildAction::CreateOperation { name, operands, .. } => {
                assert_eq!(name, "arith.shli");
                assert_eq!(
                    operands,
                    &vec![ValueSource::Bound("x".into()), ValueSource::Created(0)]
                );
            }
            other => panic!("expected shli creation, got {other:?}"),
        }
        assert_eq!(actions[2], BuildAction::Replace { source: ValueSource::Created(1) });
    }

    #[test]
    fn type_constraint_parses() {
        let rules =
            parse_rules("rule \"t\": (arith.addi ?a ?b : i64) => (arith.addi ?b ?a : i64)\n")
                .unwrap();
        match &rules[0].lhs {
            TermPattern::Node { result_type, .. } => {
                assert_eq!(result_type.as_ref().unwrap().token(), "i64");
            }
            _ => unreachable!(),
        }
        let p = lower_rules(&rules);
        assert!(p.insts.iter().any(|i| matches!(i, Inst::CheckResultType { .. })));
    }
}
