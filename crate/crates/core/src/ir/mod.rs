//! Generic SSA IR with nested regions, use-def tracking, and structural
//! hashing.
//!
//! A [`Module`] owns every operation, value, and block behind plain index
//! ids. Identities are assigned monotonically and never reused; erased
//! entities are tombstoned so stale ids can be detected. Regions hold
//! exactly one block. A region is either [`RegionKind::SsaCfg`]
//! (def-before-use) or [`RegionKind::Graph`] (use-def cycles permitted).

pub mod verify;

use std::fmt;

use num_bigint::BigInt;

/// Identity of an operation within its module.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpId(pub(crate) u32);

/// Identity of an SSA value within its module.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueId(pub(crate) u32);

/// Identity of a block within its module.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub(crate) u32);

impl fmt::Debug for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op{}", self.0)
    }
}

impl fmt::Debug for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Debug for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bb{}", self.0)
    }
}

impl OpId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A textual type token such as `i64` or `f32`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeExpr(String);

impl TypeExpr {
    /// Validates and interns a type token. Integer types must be `i`
    /// followed by a positive decimal width; any other identifier is
    /// treated as opaque.
    pub fn new(token: &str) -> Result<TypeExpr, String> {
        if token.is_empty() {
            return Err("empty type token".to_string());
        }
        let mut chars = token.chars();
        let first = chars.next().unwrap();
        if !(first.is_ascii_alphabetic() || first == '_') {
            return Err(format!("invalid type token `{token}`"));
        }
        if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("invalid type token `{token}`"));
        }
        if let Some(width) = token.strip_prefix('i') {
            if !width.is_empty()
                && width.bytes().all(|b| b.is_ascii_digit())
                && width.bytes().all(|b| b == b'0')
            {
                return Err(format!("integer type `{token}` must have a positive width"));
            }
        }
        Ok(TypeExpr(token.to_string()))
    }

    pub fn token(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An attribute value: an arbitrary-precision integer, a string, or a
/// type token.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttrValue {
    Int(BigInt),
    Str(String),
    Type(TypeExpr),
}

impl AttrValue {
    pub fn int(v: i64) -> AttrValue {
        AttrValue::Int(BigInt::from(v))
    }
}

impl fmt::Debug for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Int(v) => write!(f, "{v}"),
            AttrValue::Str(s) => write!(f, "{s:?}"),
            AttrValue::Type(t) => write!(f, "{t}"),
        }
    }
}

/// Ordered attribute list; names must be unique per operation (checked
/// by the verifier).
pub type AttrList = Vec<(String, AttrValue)>;

/// How a region's block orders its operations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RegionKind {
    /// Definitions must textually precede uses.
    SsaCfg,
    /// No ordering constraint; use-def cycles are permitted.
    Graph,
}

/// A region holding exactly one block.
#[derive(Clone, Copy, Debug)]
pub struct Region {
    pub kind: RegionKind,
    pub block: BlockId,
}

/// What defines a value: an operation result or a block argument.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Producer {
    OpResult { op: OpId, index: usize },
    BlockArg { block: BlockId, index: usize },
}

/// One use of a value: the consuming operation and the operand slot.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Use {
    pub op: OpId,
    pub index: usize,
}

#[derive(Debug)]
pub(crate) struct ValueData {
    pub(crate) ty: TypeExpr,
    pub(crate) producer: Producer,
    pub(crate) uses: Vec<Use>,
    pub(crate) erased: bool,
}

#[derive(Debug)]
pub struct OpData {
    pub(crate) name: String,
    pub(crate) operands: Vec<ValueId>,
    pub(crate) results: Vec<ValueId>,
    pub(crate) attrs: AttrList,
    pub(crate) regions: Vec<Region>,
    pub(crate) parent: Option<BlockId>,
    pub(crate) erased: bool,
}

impl OpData {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn operands(&self) -> &[ValueId] {
        &self.operands
    }

    pub fn results(&self) -> &[ValueId] {
        &self.results
    }

    pub fn attrs(&self) -> &AttrList {
        &self.attrs
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn parent(&self) -> Option<BlockId> {
        self.parent
    }

    pub fn attr(&self, name: &str) -> Option<&AttrValue> {
        self.attrs.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

#[derive(Debug)]
pub(crate) struct BlockData {
    pub(crate) args: Vec<ValueId>,
    pub(crate) ops: Vec<OpId>,
    /// Operation owning the region this block belongs to; `None` for a
    /// block not (yet) attached to an operation.
    pub(crate) parent: Option<OpId>,
}

/// A structural failure reported with the offending operation's path.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
    /// Offending operation, when one is known.
    pub op: Option<OpId>,
}

impl Diagnostic {
    pub fn new(path: String, message: String) -> Diagnostic {
        Diagnostic { path, message, op: None }
    }

    pub fn for_op(m: &Module, op: OpId, message: String) -> Diagnostic {
        Diagnostic {
            path: m.op_path(op),
            message,
            op: Some(op),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Hashable identity of a region-free operation for CSE/hashconsing:
/// name, attribute sequence, operand identities, result types.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct StructuralKey {
    pub name: String,
    pub attrs: AttrList,
    pub operands: Vec<ValueId>,
    pub result_types: Vec<TypeExpr>,
}

/// Top-level IR container: arenas for ops, values, and blocks, plus the
/// list of top-level operations (functions).
#[derive(Default, Debug)]
pub struct Module {
    ops: Vec<OpData>,
    values: Vec<ValueData>,
    blocks: Vec<BlockData>,
    top: Vec<OpId>,
}

impl Module {
    pub fn new() -> Module {
        Module::default()
    }

    pub fn top_ops(&self) -> &[OpId] {
        &self.top
    }

    pub fn push_top_op(&mut self, op: OpId) {
        debug_assert!(self.op(op).parent.is_none());
        self.top.push(op);
    }

    pub fn op(&self, id: OpId) -> &OpData {
        &self.ops[id.0 as usize]
    }

    pub fn op_is_live(&self, id: OpId) -> bool {
        !self.op(id).erased
    }

    pub fn value_type(&self, v: ValueId) -> &TypeExpr {
        &self.values[v.0 as usize].ty
    }

    pub fn producer(&self, v: ValueId) -> Producer {
        self.values[v.0 as usize].producer
    }

    pub fn value_is_live(&self, v: ValueId) -> bool {
        !self.values[v.0 as usize].erased
    }

    pub fn uses(&self, v: ValueId) -> &[Use] {
        &self.values[v.0 as usize].uses
    }

    /// Operation producing `v`, if any (block arguments have none).
    pub fn defining_op(&self, v: ValueId) -> Option<OpId> {
        match self.producer(v) {
            Producer::OpResult { op, .. } => Some(op),
            Producer::BlockArg { .. } => None,
        }
    }

    pub fn block_args(&self, b: BlockId) -> &[ValueId] {
        &self.blocks[b.0 as usize].args
    }

    pub fn block_ops(&self, b: BlockId) -> &[OpId] {
        &self.blocks[b.0 as usize].ops
    }

    /// Operation owning the region that contains `b`, if attached.
    pub fn block_parent(&self, b: BlockId) -> Option<OpId> {
        self.blocks[b.0 as usize].parent
    }

    /// Region kind of the region containing block `b`.
    pub fn block_region_kind(&self, b: BlockId) -> RegionKind {
        match self.block_parent(b) {
            Some(op) => self
                .op(op)
                .regions
                .iter()
                .find(|r| r.block == b)
                .map(|r| r.kind)
                .unwrap_or(RegionKind::SsaCfg),
            None => RegionKind::SsaCfg,
        }
    }

    /// Position of `op` within its block.
    pub fn position_in_block(&self, op: OpId) -> Option<usize> {
        let block = self.op(op).parent?;
        self.block_ops(block).iter().position(|&o| o == op)
    }

    /// Creates a detached block with the given argument types.
    pub fn new_block(&mut self, arg_types: &[TypeExpr]) -> BlockId {
        let block = BlockId(self.blocks.len() as u32);
        self.blocks.push(BlockData {
            args: Vec::new(),
            ops: Vec::new(),
            parent: None,
        });
        for (index, ty) in arg_types.iter().enumerate() {
            let v = self.new_value(ty.clone(), Producer::BlockArg { block, index });
            self.blocks[block.0 as usize].args.push(v);
        }
        block
    }

    fn new_value(&mut self, ty: TypeExpr, producer: Producer) -> ValueId {
        let v = ValueId(self.values.len() as u32);
        self.values.push(ValueData {
            ty,
            producer,
            uses: Vec::new(),
            erased: false,
        });
        v
    }

    /// Creates a fresh operation. Result values are created here; the
    /// operation is not yet inserted into any block. Name/attribute
    /// validation is deferred to [`verify::verify_module`].
    pub fn build_op(
        &mut self,
        name: &str,
        operands: &[ValueId],
        result_types: &[TypeExpr],
        attrs: AttrList,
        regions: Vec<Region>,
    ) -> OpId {
        let op = OpId(self.ops.len() as u32);
        self.ops.push(OpData {
            name: name.to_string(),
            operands: operands.to_vec(),
            results: Vec::new(),
            attrs,
            regions,
            parent: None,
            erased: false,
        });
        for (index, &operand) in operands.iter().enumerate() {
            self.values[operand.0 as usize].uses.push(Use { op, index });
        }
        for (index, ty) in result_types.iter().enumerate() {
            let v = self.new_value(ty.clone(), Producer::OpResult { op, index });
            self.ops[op.0 as usize].results.push(v);
        }
        for region in self.ops[op.0 as usize].regions.clone() {
            self.blocks[region.block.0 as usize].parent = Some(op);
        }
        op
    }

    /// Appends `op` at the end of `block`.
    pub fn append_op(&mut self, block: BlockId, op: OpId) {
        debug_assert!(self.op(op).parent.is_none(), "op already inserted");
        self.blocks[block.0 as usize].ops.push(op);
        self.ops[op.0 as usize].parent = Some(block);
    }

    /// Inserts `op` into `block` at `index`.
    pub fn insert_op_at(&mut self, block: BlockId, index: usize, op: OpId) {
        debug_assert!(self.op(op).parent.is_none(), "op already inserted");
        self.blocks[block.0 as usize].ops.insert(index, op);
        self.ops[op.0 as usize].parent = Some(block);
    }

    /// Inserts `op` immediately before `before` in its block.
    pub fn insert_op_before(&mut self, before: OpId, op: OpId) {
        let block = self.op(before).parent.expect("anchor not inserted");
        let index = self.position_in_block(before).unwrap();
        self.insert_op_at(block, index, op);
    }

    /// Detaches `op` from its block without erasing it.
    pub fn remove_from_block(&mut self, op: OpId) {
        if let Some(block) = self.op(op).parent {
            self.blocks[block.0 as usize].ops.retain(|&o| o != op);
            self.ops[op.0 as usize].parent = None;
        }
    }

    /// Rewrites every use of `old` to `new`; returns the number of uses
    /// rewritten. The two values must be distinct and share a type.
    pub fn replace_all_uses(&mut self, old: ValueId, new: ValueId) -> Result<usize, Diagnostic> {
        if old == new {
            return Err(Diagnostic::new(
                String::new(),
                "replace_all_uses requires distinct values".to_string(),
            ));
        }
        if self.value_type(old) != self.value_type(new) {
            return Err(Diagnostic::new(String::new(), format!(
                    "type mismatch: cannot replace value of type {} with value of type {}",
                    self.value_type(old),
                    self.value_type(new)
                )));
        }
        let moved = std::mem::take(&mut self.values[old.0 as usize].uses);
        let count = moved.len();
        for u in &moved {
            self.ops[u.op.0 as usize].operands[u.index] = new;
        }
        self.values[new.0 as usize].uses.extend(moved);
        Ok(count)
    }

    /// Replaces the whole operand list of `op`, rebuilding use links.
    pub fn set_operands(&mut self, op: OpId, new: &[ValueId]) {
        let old = std::mem::take(&mut self.ops[op.0 as usize].operands);
        for (index, operand) in old.into_iter().enumerate() {
            self.values[operand.0 as usize]
                .uses
                .retain(|u| !(u.op == op && u.index == index));
        }
        self.ops[op.0 as usize].operands = new.to_vec();
        for (index, &operand) in new.iter().enumerate() {
            self.values[operand.0 as usize].uses.push(Use { op, index });
        }
    }

    /// Appends one operand to `op`.
    pub fn push_operand(&mut self, op: OpId, operand: ValueId) {
        let index = self.ops[op.0 as usize].operands.len();
        self.ops[op.0 as usize].operands.push(operand);
        self.values[operand.0 as usize].uses.push(Use { op, index });
    }

    /// Single-use variant: rewrites operand `index` of `user` to `new`.
    pub fn set_operand(&mut self, user: OpId, index: usize, new: ValueId) {
        let old = self.ops[user.0 as usize].operands[index];
        if old == new {
            return;
        }
        self.values[old.0 as usize]
            .uses
            .retain(|u| !(u.op == user && u.index == index));
        self.ops[user.0 as usize].operands[index] = new;
        self.values[new.0 as usize].uses.push(Use { op: user, index });
    }

    /// Erases `op` (and everything nested inside it). Refuses if any of
    /// its results still has uses outside the erased subtree.
    pub fn erase_op(&mut self, op: OpId) -> Result<(), Diagnostic> {
        for &r in &self.ops[op.0 as usize].results {
            let live: Vec<Use> = self.uses(r).to_vec();
            if !live.is_empty() {
                let users: Vec<String> = live
                    .iter()
                    .map(|u| format!("{} ({:?} operand {})", self.op(u.op).name, u.op, u.index))
                    .collect();
                return Err(Diagnostic { path: self.op_path(op), message: format!(
                        "cannot erase `{}`: result still has {} use(s): {}",
                        self.op(op).name,
                        live.len(),
                        users.join(", ")
                    ), op: Some(op) });
            }
        }
        self.remove_from_block(op);
        self.top.retain(|&o| o != op);
        self.erase_subtree(op);
        Ok(())
    }

    fn erase_subtree(&mut self, op: OpId) {
        // Unlink this op's operand uses, invalidate its results, then
        // recurse into nested regions.
        let operands = self.ops[op.0 as usize].operands.clone();
        for (index, operand) in operands.into_iter().enumerate() {
            self.values[operand.0 as usize]
                .uses
                .retain(|u| !(u.op == op && u.index == index));
        }
        for &r in &self.ops[op.0 as usize].results.clone() {
            self.values[r.0 as usize].erased = true;
        }
        let regions = self.ops[op.0 as usize].regions.clone();
        for region in regions {
            for &arg in &self.blocks[region.block.0 as usize].args.clone() {
                self.values[arg.0 as usize].erased = true;
            }
            for inner in self.blocks[region.block.0 as usize].ops.clone() {
                self.erase_subtree(inner);
            }
            self.blocks[region.block.0 as usize].ops.clear();
        }
        self.ops[op.0 as usize].erased = true;
    }

    /// True iff `value` is visible at operand `site`: defined in the
    /// same block or an ancestor block, and (in ssacfg regions) textually
    /// before the using operation.
    pub fn is_visible(&self, value: ValueId, site: (OpId, usize)) -> bool {
        let (def_block, def_op) = match self.producer(value) {
            Producer::BlockArg { block, .. } => (block, None),
            Producer::OpResult { op, .. } => match self.op(op).parent {
                Some(b) => (b, Some(op)),
                None => return false,
            },
        };
        let mut cur = site.0;
        loop {
            let cur_block = match self.op(cur).parent {
                Some(b) => b,
                None => return false,
            };
            if cur_block == def_block {
                return match def_op {
                    None => true,
                    Some(def) => {
                        if def == cur {
                            // A use nested inside (or at) the defining op
                            // itself never sees the result.
                            false
                        } else if self.block_region_kind(def_block) == RegionKind::Graph {
                            true
                        } else {
                            self.position_in_block(def) < self.position_in_block(cur)
                        }
                    }
                };
            }
            cur = match self.block_parent(cur_block) {
                Some(op) => op,
                None => return false,
            };
        }
    }

    /// Structural identity for CSE/hashconsing. Region-carrying ops are
    /// not keyable. Attributes are sorted by name so that listing order
    /// does not affect identity.
    pub fn structural_key(&self, op: OpId) -> Result<StructuralKey, Diagnostic> {
        let data = self.op(op);
        if !data.regions.is_empty() {
            return Err(Diagnostic { path: self.op_path(op), message: format!("`{}` carries regions and is not keyable", data.name), op: Some(op) });
        }
        let mut attrs = data.attrs.clone();
        attrs.sort();
        Ok(StructuralKey {
            name: data.name.clone(),
            attrs,
            operands: data.operands.clone(),
            result_types: data
                .results
                .iter()
                .map(|&r| self.value_type(r).clone())
                .collect(),
        })
    }

    /// Human-readable path of an operation for diagnostics, e.g.
    /// `func.func@f/eqsat.egraph#1/arith.muli#0`.
    pub fn op_path(&self, op: OpId) -> String {
        let mut segments = Vec::new();
        let mut cur = Some(op);
        while let Some(o) = cur {
            let data = self.op(o);
            let mut seg = data.name.clone();
            if let Some(AttrValue::Str(sym)) = data.attr("sym_name") {
                seg.push('@');
                seg.push_str(sym);
            } else if let Some(pos) = self.position_in_block(o) {
                seg.push('#');
                seg.push_str(&pos.to_string());
            }
            segments.push(seg);
            cur = data.parent.and_then(|b| self.block_parent(b));
        }
        segments.reverse();
        segments.join("/")
    }

    /// All inserted live operations, preorder, starting from the
    /// top-level ops.
    pub fn walk_ops(&self) -> Vec<OpId> {
        let mut out = Vec::new();
        for &op in &self.top {
            self.walk_into(op, &mut out);
        }
        out
    }

    /// Preorder walk of `root` and everything nested inside it.
    pub fn walk_nested(&self, root: OpId) -> Vec<OpId> {
        let mut out = Vec::new();
        self.walk_into(root, &mut out);
        out
    }

    fn walk_into(&self, op: OpId, out: &mut Vec<OpId>) {
        if self.op(op).erased {
            return;
        }
        out.push(op);
        for region in &self.op(op).regions {
            for &inner in self.block_ops(region.block) {
                self.walk_into(inner, out);
            }
        }
    }
}
