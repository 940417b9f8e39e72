//! Recursive-descent parser for the `.ir` format.
//!
//! Parsing is two-phase: a token stream is first shaped into a small
//! AST, then lowered into a [`Module`]. The lowering resolves `%name`
//! references per block — sequentially in ssacfg regions, with a
//! pre-registration pass in graph regions so forward references (and
//! cycles) resolve. On success the module has already passed
//! [`verify_module`]; verifier findings are mapped back to source
//! positions.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;

use super::lexer::{tokenize, Token, TokenKind};
use super::SourceDiagnostic;
use crate::dialect;
use crate::ir::verify::verify_module;
use crate::ir::{
    AttrList, AttrValue, BlockId, Module, OpId, Region, RegionKind, TypeExpr, ValueId,
};

#[derive(Clone, Copy, Debug)]
struct Loc {
    line: usize,
    column: usize,
}

impl Loc {
    fn of(t: &Token) -> Loc {
        Loc { line: t.line, column: t.column }
    }

    fn err(self, message: String) -> SourceDiagnostic {
        SourceDiagnostic { line: self.line, column: self.column, message }
    }
}

struct AstFunc {
    name: String,
    args: Vec<(String, TypeExpr, Loc)>,
    ret_types: Vec<TypeExpr>,
    body: Vec<AstOp>,
    loc: Loc,
}

enum AstSig {
    /// No `:` clause.
    None,
    /// `: T` — every operand and result has type `T`.
    Uniform(TypeExpr),
    /// `: (T...) -> R...` — explicit operand and result types.
    Functional(Vec<TypeExpr>, Vec<TypeExpr>),
    /// `-> R...` before a region — result types only.
    Arrow(Vec<TypeExpr>),
}

struct AstOp {
    results: Vec<(String, Loc)>,
    name: String,
    loc: Loc,
    operands: Vec<(String, Loc)>,
    attrs: AttrList,
    region: Option<Vec<AstOp>>,
    sig: AstSig,
}

/// Parses `.ir` text into a verified [`Module`].
pub fn parse_module(text: &str) -> Result<Module, Vec<SourceDiagnostic>> {
    let tokens = tokenize(text).map_err(|d| vec![d])?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut funcs = Vec::new();
    while !parser.at(TokenKind::Eof) {
        funcs.push(parser.parse_func().map_err(|d| vec![d])?);
    }
    let mut builder = Builder {
        m: Module::new(),
        op_locs: HashMap::new(),
        defined_names: HashSet::new(),
    };
    for func in &funcs {
        builder.build_func(func).map_err(|d| vec![d])?;
    }
    let Builder { m, op_locs, .. } = builder;
    let diags = verify_module(&m);
    if diags.is_empty() {
        Ok(m)
    } else {
        Err(diags
            .into_iter()
            .map(|d| {
                let loc = d
                    .op
                    .and_then(|op| op_locs.get(&op).copied())
                    .unwrap_or(Loc { line: 1, column: 1 });
                loc.err(d.to_string())
            })
            .collect())
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> TokenKind {
        self.tokens
            .get(self.pos + offset)
            .map(|t| t.kind)
            .unwrap_or(TokenKind::Eof)
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

    fn describe(t: &Token) -> String {
        match t.kind {
            TokenKind::Eof => "end of input".to_string(),
            TokenKind::Value => format!("`%{}`", t.text),
            TokenKind::Symbol => format!("`@{}`", t.text),
            TokenKind::Str => "string literal".to_string(),
            _ => format!("`{}`", t.text),
        }
    }

    fn error_here(&self, message: String) -> SourceDiagnostic {
        Loc::of(self.peek()).err(message)
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, SourceDiagnostic> {
        if self.at(kind) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected {what}, found {}", Self::describe(self.peek()))))
        }
    }

    fn parse_type(&mut self) -> Result<TypeExpr, SourceDiagnostic> {
        let tok = self.expect(TokenKind::Ident, "a type")?;
        TypeExpr::new(&tok.text).map_err(|e| Loc::of(&tok).err(e))
    }

    /// `T` or `(T, ...)` (possibly empty parens).
    fn parse_type_list(&mut self) -> Result<Vec<TypeExpr>, SourceDiagnostic> {
        if !self.at(TokenKind::LParen) {
            return Ok(vec![self.parse_type()?]);
        }
        self.bump();
        let mut types = Vec::new();
        if !self.at(TokenKind::RParen) {
            loop {
                types.push(self.parse_type()?);
                if self.at(TokenKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(types)
    }

    fn parse_value_list(&mut self) -> Result<Vec<(String, Loc)>, SourceDiagnostic> {
        let mut list = Vec::new();
        loop {
            let tok = self.expect(TokenKind::Value, "a value (`%name`)")?;
            list.push((tok.text.clone(), Loc::of(&tok)));
            if self.at(TokenKind::Comma) {
                self.bump();
            } else {
                return Ok(list);
            }
        }
    }

    fn parse_func(&mut self) -> Result<AstFunc, SourceDiagnostic> {
        let kw = self.peek().clone();
        if !(kw.kind == TokenKind::Ident && kw.text == "func.func") {
            return Err(self.error_here(format!(
                "expected `func.func` at top level, found {}",
                Self::describe(&kw)
            )));
        }
        self.bump();
        let name = self.expect(TokenKind::Symbol, "a function name (`@name`)")?;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        if !self.at(TokenKind::RParen) {
            loop {
                let arg = self.expect(TokenKind::Value, "an argument (`%name`)")?;
                self.expect(TokenKind::Colon, "`:`")?;
                let ty = self.parse_type()?;
                args.push((arg.text.clone(), ty, Loc::of(&arg)));
                if self.at(TokenKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        let ret_types = if self.at(TokenKind::Arrow) {
            self.bump();
            self.parse_type_list()?
        } else {
            Vec::new()
        };
        self.expect(TokenKind::LBrace, "`{`")?;
        let body = self.parse_block_body()?;
        self.expect(TokenKind::RBrace, "`}`")?;
        Ok(AstFunc {
            name: name.text.clone(),
            args,
            ret_types,
            body,
            loc: Loc::of(&kw),
        })
    }

    fn parse_block_body(&mut self) -> Result<Vec<AstOp>, SourceDiagnostic> {
        let mut ops = Vec::new();
        while !self.at(TokenKind::RBrace) && !self.at(TokenKind::Eof) {
            ops.push(self.parse_op()?);
        }
        Ok(ops)
    }

    fn parse_op(&mut self) -> Result<AstOp, SourceDiagnostic> {
        let mut results = Vec::new();
        if self.at(TokenKind::Value) {
            results = self.parse_value_list()?;
            self.expect(TokenKind::Equals, "`=`")?;
        }
        let name_tok = self.expect(TokenKind::Ident, "an operation name (`dialect.name`)")?;
        let loc = Loc::of(&name_tok);
        if name_tok.text == "func.func" {
            return Err(loc.err("nested functions are not supported".to_string()));
        }
        if !name_tok.text.contains('.') {
            return Err(loc.err(format!(
                "expected an operation name (`dialect.name`), found `{}`",
                name_tok.text
            )));
        }

        // Operand list. A `%` here might instead start the next
        // operation's result list; look ahead for `=` and rewind.
        let mut operands = Vec::new();
        if self.at(TokenKind::Value) {
            let save = self.pos;
            let list = self.parse_value_list()?;
            if self.at(TokenKind::Equals) {
                self.pos = save;
            } else {
                operands = list;
            }
        }

        // `{` opens an attribute dict only when followed by `name =`.
        let mut attrs = AttrList::new();
        if self.at(TokenKind::LBrace)
            && self.peek_at(1) == TokenKind::Ident
            && self.peek_at(2) == TokenKind::Equals
        {
            attrs = self.parse_attr_dict()?;
        }

        let mut region = None;
        let sig;
        if self.at(TokenKind::Arrow) {
            self.bump();
            let rets = self.parse_type_list()?;
            self.expect(TokenKind::LBrace, "`{` (a region must follow `->`)")?;
            region = Some(self.parse_block_body()?);
            self.expect(TokenKind::RBrace, "`}`")?;
            sig = AstSig::Arrow(rets);
        } else if self.at(TokenKind::LBrace) {
            self.bump();
            region = Some(self.parse_block_body()?);
            self.expect(TokenKind::RBrace, "`}`")?;
            sig = AstSig::None;
        } else if self.at(TokenKind::Colon) {
            self.bump();
            if self.at(TokenKind::LParen) {
                let operand_types = self.parse_type_list()?;
                self.expect(TokenKind::Arrow, "`->`")?;
                let rets = self.parse_type_list()?;
                sig = AstSig::Functional(operand_types, rets);
            } else {
                sig = AstSig::Uniform(self.parse_type()?);
            }
        } else {
            sig = AstSig::None;
        }

        Ok(AstOp { results, name: name_tok.text.clone(), loc, operands, attrs, region, sig })
    }

    fn parse_attr_dict(&mut self) -> Result<AttrList, SourceDiagnostic> {
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut attrs = AttrList::new();
        loop {
            let key = self.expect(TokenKind::Ident, "an attribute name")?;
            if key.text.contains('.') {
                return Err(Loc::of(&key).err(format!("invalid attribute name `{}`", key.text)));
            }
            self.expect(TokenKind::Equals, "`=`")?;
            let value = match self.peek().kind {
                TokenKind::Int => {
                    let tok = self.bump();
                    AttrValue::Int(tok.text.parse::<BigInt>().unwrap())
                }
                TokenKind::Str => AttrValue::Str(self.bump().text),
                TokenKind::Ident => {
                    let tok = self.bump();
                    AttrValue::Type(TypeExpr::new(&tok.text).map_err(|e| Loc::of(&tok).err(e))?)
                }
                _ => {
                    return Err(self.error_here(format!(
                        "expected an attribute value (integer, string, or type), found {}",
                        Self::describe(self.peek())
                    )))
                }
            };
            attrs.push((key.text, value));
            if self.at(TokenKind::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(TokenKind::RBrace, "`}`")?;
        Ok(attrs)
    }
}

// ---------------------------------------------------------------------
// AST → Module

type Scope = HashMap<String, ValueId>;

struct Builder {
    m: Module,
    op_locs: HashMap<OpId, Loc>,
    /// Every `%name` defined anywhere in the current function, used to
    /// tell "use before definition" apart from "undefined value".
    defined_names: HashSet<String>,
}

impl Builder {
    fn build_func(&mut self, func: &AstFunc) -> Result<(), SourceDiagnostic> {
        self.defined_names = func.args.iter().map(|(n, _, _)| n.clone()).collect();
        collect_result_names(&func.body, &mut self.defined_names);

        let arg_types: Vec<TypeExpr> = func.args.iter().map(|(_, t, _)| t.clone()).collect();
        let body = self.m.new_block(&arg_types);
        let mut scope = Scope::new();
        for (index, (name, _, loc)) in func.args.iter().enumerate() {
            if scope.insert(name.clone(), self.m.block_args(body)[index]).is_some() {
                return Err(loc.err(format!("redefinition of `%{name}`")));
            }
        }
        let mut scopes = vec![scope];
        self.build_block(body, &func.body, &mut scopes, RegionKind::SsaCfg)?;

        // Declared result types must agree with the terminator.
        let returned: Vec<TypeExpr> = match self.m.block_ops(body).last() {
            Some(&last) if self.m.op(last).name() == "func.return" => self
                .m
                .op(last)
                .operands()
                .iter()
                .map(|&v| self.m.value_type(v).clone())
                .collect(),
            _ => Vec::new(), // missing terminator: the verifier reports it
        };
        if (!returned.is_empty() || !func.ret_types.is_empty()) && returned != func.ret_types {
            return Err(func.loc.err(format!(
                "function `@{}` declares result types ({}) but `func.return` yields ({})",
                func.name,
                type_list(&func.ret_types),
                type_list(&returned),
            )));
        }

        let func_op = self.m.build_op(
            "func.func",
            &[],
            &[],
            vec![("sym_name".to_string(), AttrValue::Str(func.name.clone()))],
            vec![Region { kind: RegionKind::SsaCfg, block: body }],
        );
        self.op_locs.insert(func_op, func.loc);
        self.m.push_top_op(func_op);
        Ok(())
    }

    fn build_block(
        &mut self,
        block: BlockId,
        ops: &[AstOp],
        scopes: &mut Vec<Scope>,
        kind: RegionKind,
    ) -> Result<(), SourceDiagnostic> {
        match kind {
            RegionKind::SsaCfg => self.build_ssacfg_block(block, ops, scopes),
            RegionKind::Graph => self.build_graph_block(block, ops, scopes),
        }
    }

    fn build_ssacfg_block(
        &mut self,
        block: BlockId,
        ops: &[AstOp],
        scopes: &mut Vec<Scope>,
    ) -> Result<(), SourceDiagnostic> {
        for ast in ops {
            let operands = self.resolve_operands(ast, scopes)?;
            self.check_operand_types(ast, &operands)?;
            let op = self.create_op(ast, &operands)?;
            if let Some(inner) = &ast.region {
                let region = self.m.op(op).regions()[0];
                scopes.push(Scope::new());
                self.build_block(region.block, inner, scopes, region.kind)?;
                scopes.pop();
            }
            self.m.append_op(block, op);
            self.register_results(ast, op, scopes)?;
        }
        Ok(())
    }

    fn build_graph_block(
        &mut self,
        block: BlockId,
        ops: &[AstOp],
        scopes: &mut Vec<Scope>,
    ) -> Result<(), SourceDiagnostic> {
        // Pass 1: create every operation with empty operands so all
        // result names are in scope, permitting forward references.
        let mut shells = Vec::new();
        scopes.push(Scope::new());
        for ast in ops {
            let op = self.create_op(ast, &[])?;
            self.m.append_op(block, op);
            self.register_results(ast, op, scopes)?;
            shells.push(op);
        }
        // Pass 2: resolve operands and recurse into nested regions.
        for (ast, &op) in ops.iter().zip(&shells) {
            let operands = self.resolve_operands(ast, scopes)?;
            self.check_operand_types(ast, &operands)?;
            self.m.set_operands(op, &operands);
            if let Some(inner) = &ast.region {
                let region = self.m.op(op).regions()[0];
                scopes.push(Scope::new());
                self.build_block(region.block, inner, scopes, region.kind)?;
                scopes.pop();
            }
        }
        scopes.pop();
        Ok(())
    }

    /// Builds the operation (with its empty region block, if any) from
    /// resolved operands; result types come from the signature clause.
    fn create_op(&mut self, ast: &AstOp, operands: &[ValueId]) -> Result<OpId, SourceDiagnostic> {
        let result_types: Vec<TypeExpr> = match &ast.sig {
            AstSig::Uniform(t) => vec![t.clone(); ast.results.len()],
            AstSig::Functional(_, rets) | AstSig::Arrow(rets) => {
                if rets.len() != ast.results.len() {
                    return Err(ast.loc.err(format!(
                        "`{}` binds {} result(s) but its signature declares {}",
                        ast.name,
                        ast.results.len(),
                        rets.len()
                    )));
                }
                rets.clone()
            }
            AstSig::None => {
                if !ast.results.is_empty() {
                    return Err(ast.loc.err(format!(
                        "`{}` binds results and needs a type signature (`: type`)",
                        ast.name
                    )));
                }
                Vec::new()
            }
        };
        let regions = match &ast.region {
            None => Vec::new(),
            Some(_) => {
                let inner = self.m.new_block(&[]);
                vec![Region { kind: dialect::region_kind_for(&ast.name), block: inner }]
            }
        };
        let op = self.m.build_op(&ast.name, operands, &result_types, ast.attrs.clone(), regions);
        self.op_locs.insert(op, ast.loc);
        Ok(op)
    }

    fn resolve_operands(
        &mut self,
        ast: &AstOp,
        scopes: &[Scope],
    ) -> Result<Vec<ValueId>, SourceDiagnostic> {
        let mut out = Vec::new();
        for (name, loc) in &ast.operands {
            let found = scopes.iter().rev().find_map(|s| s.get(name));
            match found {
                Some(&v) => out.push(v),
                None if self.defined_names.contains(name) => {
                    return Err(loc.err(format!("use of `%{name}` before definition")));
                }
                None => return Err(loc.err(format!("undefined value `%{name}`"))),
            }
        }
        Ok(out)
    }

    fn check_operand_types(
        &self,
        ast: &AstOp,
        operands: &[ValueId],
    ) -> Result<(), SourceDiagnostic> {
        match &ast.sig {
            AstSig::Uniform(t) => {
                for (&v, (name, loc)) in operands.iter().zip(&ast.operands) {
                    if self.m.value_type(v) != t {
                        return Err(loc.err(format!(
                            "operand `%{name}` has type {}, expected {t}",
                            self.m.value_type(v)
                        )));
                    }
                }
            }
            AstSig::Functional(operand_types, _) => {
                if operand_types.len() != operands.len() {
                    return Err(ast.loc.err(format!(
                        "`{}` has {} operand(s) but its signature declares {}",
                        ast.name,
                        operands.len(),
                        operand_types.len()
                    )));
                }
                for ((&v, t), (name, loc)) in
                    operands.iter().zip(operand_types).zip(&ast.operands)
                {
                    if self.m.value_type(v) != t {
                        return Err(loc.err(format!(
                            "operand `%{name}` has type {}, expected {t}",
                            self.m.value_type(v)
                        )));
                    }
                }
            }
            AstSig::Arrow(_) | AstSig::None => {}
        }
        Ok(())
    }

    fn register_results(
        &mut self,
        ast: &AstOp,
        op: OpId,
        scopes: &mut [Scope],
    ) -> Result<(), SourceDiagnostic> {
        let results: Vec<ValueId> = self.m.op(op).results().to_vec();
        let scope = scopes.last_mut().unwrap();
        for ((name, loc), v) in ast.results.iter().zip(results) {
            if scope.insert(name.clone(), v).is_some() {
                return Err(loc.err(format!("redefinition of `%{name}`")));
            }
        }
        Ok(())
    }
}

fn collect_result_names(ops: &[AstOp], out: &mut HashSet<String>) {
    for op in ops {
        for (name, _) in &op.results {
            out.insert(name.clone());
        }
        if let Some(inner) = &op.region {
            collect_result_names(inner, out);
        }
    }
}

fn type_list(types: &[TypeExpr]) -> String {
    types.iter().map(|t| t.token().to_string()).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Producer;

    const MUL2: &str = "\
func.func @f(%a : i64) -> i64 {
  %two = arith.constant {value = 2} : i64
  %graph_res = eqsat.egraph -> i64 {
    %c_two = eqsat.eclass %two : i64
    %c_a = eqsat.eclass %a : i64
    %res = arith.muli %c_a, %c_two : i64
    %c_res = eqsat.eclass %res : i64
    eqsat.yield %c_res : i64
  }
  func.return %graph_res : i64
}
";

    fn first_err(text: &str) -> SourceDiagnostic {
        parse_module(text).unwrap_err().into_iter().next().unwrap()
    }

    #[test]
    fn parses_egraph_function() {
        let m = parse_module(MUL2).unwrap();
        assert_eq!(m.top_ops().len(), 1);
        let ops = m.walk_ops();
        let egraphs: Vec<_> =
            ops.iter().filter(|&&o| m.op(o).name() == "eqsat.egraph").collect();
        assert_eq!(egraphs.len(), 1);
        let eclasses: Vec<_> =
            ops.iter().filter(|&&o| m.op(o).name() == "eqsat.eclass").collect();
        assert_eq!(eclasses.len(), 3);
    }

    #[test]
    fn parses_two_enode_class() {
        let text = "\
func.func @f(%a : i64) -> i64 {
  %two = arith.constant {value = 2} : i64
  %one = arith.constant {value = 1} : i64
  %graph_res = eqsat.egraph -> i64 {
    %c_one = eqsat.eclass %one : i64
    %c_two = eqsat.eclass %two : i64
    %c_a = eqsat.eclass %a : i64
    %res = arith.muli %c_a, %c_two : i64
    %res1 = arith.shli %c_a, %c_one : i64
    %c_res = eqsat.eclass %res, %res1 : i64
    eqsat.yield %c_res : i64
  }
  func.return %graph_res : i64
}
";
        let m = parse_module(text).unwrap();
        let two_enode = m
            .walk_ops()
            .into_iter()
            .find(|&o| m.op(o).name() == "eqsat.eclass" && m.op(o).operands().len() == 2)
            .expect("an eclass with two e-nodes");
        let names: Vec<&str> = m
            .op(two_enode)
            .operands()
            .iter()
            .map(|&v| match m.producer(v) {
                Producer::OpResult { op, .. } => m.op(op).name(),
                Producer::BlockArg { .. } => "<arg>",
            })
            .collect();
        assert_eq!(names, vec!["arith.muli", "arith.shli"]);
    }

    #[test]
    fn graph_region_allows_forward_references_and_cycles() {
        let text = "\
func.func @f(%a : i64) -> i64 {
  %zero = arith.constant {value = 0} : i64
  %graph_res = eqsat.egraph -> i64 {
    %c_zero = eqsat.eclass %zero : i64
    %sum = arith.addi %c_res, %c_zero : i64
    %c_res = eqsat.eclass %a, %sum : i64
    eqsat.yield %c_res : i64
  }
  func.return %graph_res : i64
}
";
        let m = parse_module(text).unwrap();
        // the addi's first operand is the (textually later) eclass result
        let addi = m
            .walk_ops()
            .into_iter()
            .find(|&o| m.op(o).name() == "arith.addi")
            .unwrap();
        let first = m.op(addi).operands()[0];
        let def = m.defining_op(first).unwrap();
        assert_eq!(m.op(def).name(), "eqsat.eclass");
        // and that eclass in turn holds the addi: a genuine cycle
        assert!(m.op(def).operands().contains(&m.op(addi).results()[0]));
    }

    #[test]
    fn rejects_self_reference_at_top_level() {
        let err = first_err(
            "func.func @f(%y : i64) -> i64 {\n  %x = arith.addi %x, %y : i64\n  func.return %x : i64\n}\n",
        );
        assert!(err.message.contains("before definition"), "{err}");
        assert_eq!(err.line, 2);
    }

    #[test]
    fn rejects_undefined_value() {
        let err = first_err("func.func @f() {\n  func.return %nope\n}\n");
        assert!(err.message.contains("undefined value"), "{err}");
    }

    #[test]
    fn rejects_redefinition() {
        let err = first_err(
            "func.func @f() {\n  %x = arith.constant {value = 1} : i64\n  %x = arith.constant {value = 2} : i64\n  func.return\n}\n",
        );
        assert!(err.message.contains("redefinition"), "{err}");
        assert_eq!(err.line, 3);
    }

    #[test]
    fn rejects_return_type_mismatch() {
        let err = first_err(
            "func.func @f(%a : i64) -> f32 {\n  func.return %a : i64\n}\n",
        );
        assert!(err.message.contains("declares result types"), "{err}");
    }

    #[test]
    fn rejects_operand_type_mismatch() {
        let err = first_err(
            "func.func @f(%a : f32) {\n  %r = eqsat.eclass %a : i64\n  func.return\n}\n",
        );
        assert!(err.message.contains("has type f32, expected i64"), "{err}");
    }

    #[test]
    fn functional_signature() {
        let text = "\
func.func @f(%a : i64, %b : i64) -> i1 {
  %r = arith.cmpi %a, %b {pred = \"slt\"} : (i64, i64) -> i1
  func.return %r : i1
}
";
        let m = parse_module(text).unwrap();
        let cmpi = m.walk_ops().into_iter().find(|&o| m.op(o).name() == "arith.cmpi").unwrap();
        assert_eq!(m.value_type(m.op(cmpi).results()[0]).token(), "i1");
    }

    #[test]
    fn rejects_nested_function() {
        let err = first_err("func.func @f() {\n  func.func @g() {\n  }\n}\n");
        assert!(err.message.contains("nested functions"), "{err}");
    }

    #[test]
    fn empty_input_is_an_empty_module() {
        let m = parse_module("").unwrap();
        assert!(m.top_ops().is_empty());
        let m = parse_module("// nothing here\n").unwrap();
        assert!(m.top_ops().is_empty());
    }

    #[test]
    fn verifier_findings_carry_source_positions() {
        // duplicate attribute name is only caught by the verifier
        let err = first_err(
            "func.func @f() {\n  %x = arith.constant {value = 1, value = 2} : i64\n  func.return\n}\n",
        );
        assert!(err.message.contains("duplicate attribute"), "{err}");
        assert_eq!(err.line, 2);
    }

    #[test]
    fn op_after_no_sig_op_is_not_swallowed() {
        // `test.noop` is followed by a results list; the lookahead must
        // not treat `%x` as its operand.
        let text = "func.func @f() {\n  test.noop\n  %x = arith.constant {value = 1} : i64\n  test.sink %x : i64\n  func.return\n}\n";
        let m = parse_module(text).unwrap();
        let noop = m.walk_ops().into_iter().find(|&o| m.op(o).name() == "test.noop").unwrap();
        assert!(m.op(noop).operands().is_empty());
    }

    #[test]
    fn forward_reference_rejected_in_ssacfg_region() {
        let err = first_err(
            "func.func @f() -> i64 {\n  %r = arith.addi %later, %later : i64\n  %later = arith.constant {value = 1} : i64\n  func.return %r : i64\n}\n",
        );
        assert!(err.message.contains("before definition"), "{err}");
    }

    #[test]
    fn scoping_inner_region_sees_outer_values() {
        let text = "\
func.func @f(%a : i64) -> i64 {
  %r = scf.for %a -> i64 {
    %t = arith.addi %a, %a : i64
    scf.yield %t : i64
  }
  func.return %r : i64
}
";
        assert!(parse_module(text).is_ok());
    }

    #[test]
    fn scoping_region_values_do_not_escape() {
        let err = first_err(
            "\
func.func @f(%a : i64) -> i64 {
  %r = scf.for %a -> i64 {
    %t = arith.addi %a, %a : i64
    scf.yield %t : i64
  }
  func.return %t : i64
}
",
        );
        assert!(err.message.contains("before definition") || err.message.contains("undefined"), "{err}");
    }
}
