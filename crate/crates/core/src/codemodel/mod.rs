//! Symbolic method bodies: decode, edit, re-encode.

pub(crate) mod decode;
pub mod edit;
mod encode;
pub mod frames;
pub mod opcodes;
pub(crate) mod stack;

use std::collections::HashMap;
use std::fmt;

use crate::classfile::descriptor::{FieldType, MethodDescriptor};
use crate::classfile::{Attribute, ConstantPool, MemberRef, PoolError};

pub use decode::decode_code;
pub use edit::{apply_edits, Edit, EditError};
pub use encode::{encode_code, expand_long_branches};
pub use frames::{analyze_types, refresh_frames, required_frame_labels, FrameStatus, MethodContext, TypeState, ValueType};
pub use stack::{recompute_max_stack, stack_effect};

/// Symbolic instruction id. Decoded instructions use their original pc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl Label {
    /// The position just past the last instruction.
    pub const END: Label = Label(u32::MAX);
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Label::END {
            f.write_str("END")
        } else {
            write!(f, "L{}", self.0)
        }
    }
}

/// A constant a new instruction needs; interned into the pool when the body is encoded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    Class(String),
    String(String),
    Integer(i32),
    Float(u32),
    Long(i64),
    Double(u64),
    Field(MemberRef),
    Method(MemberRef),
    /// A bare Utf8 entry, used for local-variable descriptors.
    Utf8(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PoolRef {
    Index(u16),
    Sym(Symbol),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    None,
    Local(u16),
    Iinc { local: u16, delta: i16 },
    /// bipush / sipush immediate.
    Int(i32),
    Pool(PoolRef),
    Interface { pool: PoolRef, count: u8 },
    MultiArray { pool: PoolRef, dims: u8 },
    /// newarray element type code.
    ArrayType(u8),
    Branch(Label),
    Table { default: Label, low: i32, targets: Vec<Label> },
    Lookup { default: Label, pairs: Vec<(i32, Label)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub label: Label,
    /// pc in the body this instruction was decoded from.
    pub origin_pc: Option<u32>,
    pub opcode: u8,
    pub operand: Operand,
    /// Encoded behind a `wide` prefix.
    pub wide: bool,
}

impl Instruction {
    pub fn new(label: Label, opcode: u8, operand: Operand) -> Self {
        Instruction { label, origin_pc: None, opcode, operand, wide: false }
    }

    pub fn simple(label: Label, opcode: u8) -> Self {
        Self::new(label, opcode, Operand::None)
    }

    pub fn mnemonic(&self) -> &'static str {
        opcodes::name(self.opcode)
    }

    /// All labels this instruction may transfer control to.
    pub fn targets(&self) -> Vec<Label> {
        match &self.operand {
            Operand::Branch(l) => vec![*l],
            Operand::Table { default, targets, .. } => {
                let mut v = vec![*default];
                v.extend(targets.iter().copied());
                v
            }
            Operand::Lookup { default, pairs } => {
                let mut v = vec![*default];
                v.extend(pairs.iter().map(|p| p.1));
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn map_targets(&mut self, mut f: impl FnMut(Label) -> Label) {
        match &mut self.operand {
            Operand::Branch(l) => *l = f(*l),
            Operand::Table { default, targets, .. } => {
                *default = f(*default);
                for t in targets {
                    *t = f(*t);
                }
            }
            Operand::Lookup { default, pairs } => {
                *default = f(*default);
                for p in pairs {
                    p.1 = f(p.1);
                }
            }
            _ => {}
        }
    }

    /// Local slot read or written, with the short forms decoded.
    pub fn local_index(&self) -> Option<u16> {
        if let Some((_, Some(i))) = opcodes::load_kind(self.opcode).or(opcodes::store_kind(self.opcode)) {
            return Some(i);
        }
        match self.operand {
            Operand::Local(i) => Some(i),
            Operand::Iinc { local, .. } => Some(local),
            _ => None,
        }
    }

    pub fn pool_ref(&self) -> Option<&PoolRef> {
        match &self.operand {
            Operand::Pool(p) | Operand::Interface { pool: p, .. } | Operand::MultiArray { pool: p, .. } => Some(p),
            _ => None,
        }
    }

    pub fn falls_through(&self) -> bool {
        !opcodes::is_unconditional(self.opcode)
    }

    /// Field or method reference for field and invoke instructions.
    pub fn member(&self, pool: &ConstantPool) -> Option<MemberRef> {
        if !matches!(self.opcode, opcodes::GETSTATIC..=opcodes::INVOKEINTERFACE) {
            return None;
        }
        match self.pool_ref()? {
            PoolRef::Index(i) => pool.member_ref(*i).ok(),
            PoolRef::Sym(Symbol::Field(m) | Symbol::Method(m)) => Some(m.clone()),
            PoolRef::Sym(_) => None,
        }
    }

    /// Class operand of new, anewarray, checkcast, instanceof, multianewarray.
    pub fn class_operand(&self, pool: &ConstantPool) -> Option<String> {
        if !matches!(
            self.opcode,
            opcodes::NEW | opcodes::ANEWARRAY | opcodes::CHECKCAST | opcodes::INSTANCEOF | opcodes::MULTIANEWARRAY
        ) {
            return None;
        }
        match self.pool_ref()? {
            PoolRef::Index(i) => pool.class_name(*i).ok().map(|c| c.into_owned()),
            PoolRef::Sym(Symbol::Class(c)) => Some(c.clone()),
            PoolRef::Sym(_) => None,
        }
    }

    /// The value pushed by a constant-producing instruction.
    pub fn constant(&self, pool: &ConstantPool) -> Option<ConstValue> {
        use opcodes::*;
        Some(match self.opcode {
            ACONST_NULL => ConstValue::Null,
            ICONST_M1..=ICONST_5 => ConstValue::Int(self.opcode as i32 - ICONST_0 as i32),
            LCONST_0 | LCONST_1 => ConstValue::Long((self.opcode - LCONST_0) as i64),
            FCONST_0..=FCONST_2 => ConstValue::Float(((self.opcode - FCONST_0) as f32).to_bits()),
            DCONST_0 | DCONST_1 => ConstValue::Double(((self.opcode - DCONST_0) as f64).to_bits()),
            BIPUSH | SIPUSH => match self.operand {
                Operand::Int(v) => ConstValue::Int(v),
                _ => return None,
            },
            LDC | LDC_W | LDC2_W => match self.pool_ref()? {
                PoolRef::Index(i) => ConstValue::from_pool(pool, *i)?,
                PoolRef::Sym(s) => ConstValue::from_symbol(s)?,
            },
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstValue {
    Null,
    Int(i32),
    Long(i64),
    Float(u32),
    Double(u64),
    String(String),
    Class(String),
}

impl ConstValue {
    pub fn from_pool(pool: &ConstantPool, index: u16) -> Option<ConstValue> {
        use crate::classfile::Constant;
        Some(match pool.get(index).ok()? {
            Constant::Integer(v) => ConstValue::Int(*v),
            Constant::Long(v) => ConstValue::Long(*v),
            Constant::Float(v) => ConstValue::Float(*v),
            Constant::Double(v) => ConstValue::Double(*v),
            Constant::String { .. } => ConstValue::String(pool.string(index).ok()?.into_owned()),
            Constant::Class { .. } => ConstValue::Class(pool.class_name(index).ok()?.into_owned()),
            _ => return None,
        })
    }

    fn from_symbol(s: &Symbol) -> Option<ConstValue> {
        Some(match s {
            Symbol::Integer(v) => ConstValue::Int(*v),
            Symbol::Long(v) => ConstValue::Long(*v),
            Symbol::Float(v) => ConstValue::Float(*v),
            Symbol::Double(v) => ConstValue::Double(*v),
            Symbol::String(v) => ConstValue::String(v.clone()),
            Symbol::Class(v) => ConstValue::Class(v.clone()),
            _ => return None,
        })
    }

    /// The stack type this value has: `I`, `J`, `F`, `D`, or a reference descriptor.
    pub fn field_type(&self) -> Option<FieldType> {
        Some(match self {
            ConstValue::Null => return None,
            ConstValue::Int(_) => FieldType::Int,
            ConstValue::Long(_) => FieldType::Long,
            ConstValue::Float(_) => FieldType::Float,
            ConstValue::Double(_) => FieldType::Double,
            ConstValue::String(_) => FieldType::object("java/lang/String"),
            ConstValue::Class(_) => FieldType::object("java/lang/Class"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Handler {
    pub start: Label,
    /// Exclusive.
    pub end: Label,
    pub handler: Label,
    /// `None` catches everything.
    pub catch_type: Option<PoolRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineEntry {
    pub label: Label,
    pub line: u16,
}

/// One LocalVariableTable or LocalVariableTypeTable row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalVar {
    pub start: Label,
    /// Exclusive.
    pub end: Label,
    pub name_index: u16,
    /// Descriptor (LVT) or signature (LVTT) index.
    pub descriptor: PoolRef,
    pub index: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VType {
    Top,
    Integer,
    Float,
    Double,
    Long,
    Null,
    UninitializedThis,
    /// Class constant index.
    Object(u16),
    /// The `new` instruction that allocated the value.
    Uninitialized(Label),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameKind {
    Same { extended: bool },
    SameLocals1 { stack: VType, extended: bool },
    Chop(u8),
    Append(Vec<VType>),
    Full { locals: Vec<VType>, stack: Vec<VType> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub label: Label,
    pub kind: FrameKind,
}

/// Where a table attribute sits among the Code attribute's sub-attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrSlot {
    /// A LineNumberTable holding `count` entries of `CodeBody::lines`.
    Lines { name_index: u16, count: usize },
    Locals { name_index: u16, count: usize },
    LocalTypes { name_index: u16, count: usize },
    StackMap { name_index: u16 },
    Other(Attribute),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBody {
    pub instructions: Vec<Instruction>,
    pub handlers: Vec<Handler>,
    /// Line entries in attribute order.
    pub lines: Vec<LineEntry>,
    pub locals: Vec<LocalVar>,
    pub local_types: Vec<LocalVar>,
    pub frames: Option<Vec<Frame>>,
    pub max_stack: u16,
    pub max_locals: u16,
    pub layout: Vec<AttrSlot>,
    pub next_label: u32,
    /// Set once an edit has been applied.
    pub modified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodeError {
    #[error("malformed code at pc {pc}: {reason}")]
    Malformed { pc: usize, reason: String },
    #[error("code cannot be encoded: {0}")]
    Unencodable(String),
    #[error("inconsistent stack at {label}: depth {a} vs {b}")]
    InconsistentStack { label: Label, a: usize, b: usize },
    #[error("stack underflow at {0}")]
    StackUnderflow(Label),
    #[error("unresolved label {0}")]
    UnresolvedLabel(Label),
    #[error("frame regeneration failed: {0}")]
    FrameRegenerationFailed(String),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error("bad descriptor: {0}")]
    Descriptor(String),
}

/// Source line of an instruction, or `None` when unmapped.
pub type Line = Option<u16>;

impl CodeBody {
    pub fn fresh_label(&mut self) -> Label {
        let l = Label(self.next_label);
        self.next_label += 1;
        l
    }

    pub fn position(&self, label: Label) -> Option<usize> {
        if label == Label::END {
            return Some(self.instructions.len());
        }
        self.instructions.iter().position(|i| i.label == label)
    }

    pub fn positions(&self) -> HashMap<Label, usize> {
        let mut m: HashMap<Label, usize> =
            self.instructions.iter().enumerate().map(|(i, insn)| (insn.label, i)).collect();
        m.insert(Label::END, self.instructions.len());
        m
    }

    pub fn get(&self, label: Label) -> Option<&Instruction> {
        self.position(label).and_then(|p| self.instructions.get(p))
    }

    /// Source line of every instruction in order.
    pub fn line_map(&self) -> Vec<Line> {
        let pos = self.positions();
        let mut starts: Vec<(usize, usize, u16)> = self
            .lines
            .iter()
            .enumerate()
            .filter_map(|(seq, e)| pos.get(&e.label).map(|&p| (p, seq, e.line)))
            .collect();
        starts.sort();
        let mut out = vec![None; self.instructions.len()];
        let mut cur = None;
        let mut k = 0;
        for (i, slot) in out.iter_mut().enumerate() {
            while k < starts.len() && starts[k].0 <= i {
                cur = Some(starts[k].2);
                k += 1;
            }
            *slot = cur;
        }
        out
    }

    /// Line of the entry with the greatest start position at or before `label`.
    pub fn line_of(&self, label: Label) -> Line {
        let p = self.position(label)?;
        *self.line_map().get(p)?
    }

    /// Instructions mapped to `line`, in order.
    pub fn offsets_for_line(&self, line: u16) -> Vec<Label> {
        self.line_map()
            .iter()
            .zip(&self.instructions)
            .filter(|(l, _)| **l == Some(line))
            .map(|(_, i)| i.label)
            .collect()
    }

    /// Smallest `max_locals` that covers every slot the code reads or writes.
    pub fn required_max_locals(&self) -> u16 {
        let mut need = u32::from(self.max_locals);
        for insn in &self.instructions {
            if let Some(i) = insn.local_index() {
                let width = opcodes::load_kind(insn.opcode)
                    .or(opcodes::store_kind(insn.opcode))
                    .map_or(1, |(k, _)| k.slots() as u32);
                need = need.max(u32::from(i) + width);
            }
        }
        need.min(u32::from(u16::MAX)) as u16
    }

    /// Every label that a branch, switch, or handler can transfer control to.
    pub fn jump_targets(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self.instructions.iter().flat_map(|i| i.targets()).collect();
        v.extend(self.handlers.iter().map(|h| h.handler));
        v.sort();
        v.dedup();
        v
    }

    /// Type behind a pool reference used as a class operand.
    pub fn resolve_class(&self, pool: &ConstantPool, r: &PoolRef) -> Option<String> {
        match r {
            PoolRef::Index(i) => pool.class_name(*i).ok().map(|c| c.into_owned()),
            PoolRef::Sym(Symbol::Class(c)) => Some(c.clone()),
            PoolRef::Sym(_) => None,
        }
    }
}

pub(crate) fn parse_method_descriptor(d: &str) -> Result<MethodDescriptor, CodeError> {
    MethodDescriptor::parse(d).map_err(|e| CodeError::Descriptor(e.to_string()))
}

pub(crate) fn parse_field_descriptor(d: &str) -> Result<FieldType, CodeError> {
    FieldType::parse(d).map_err(|e| CodeError::Descriptor(e.to_string()))
}

/// Interns every symbolic pool reference in the body, leaving only indices.
pub fn intern_symbols(body: &mut CodeBody, pool: &mut ConstantPool) -> Result<(), CodeError> {
    fn fix(r: &mut PoolRef, pool: &mut ConstantPool) -> Result<(), PoolError> {
        if let PoolRef::Sym(s) = r {
            let idx = match s {
                Symbol::Class(c) => pool.intern_class(c)?,
                Symbol::String(v) => pool.intern_string(v)?,
                Symbol::Integer(v) => pool.intern(crate::classfile::Constant::Integer(*v))?,
                Symbol::Float(v) => pool.intern(crate::classfile::Constant::Float(*v))?,
                Symbol::Long(v) => pool.intern(crate::classfile::Constant::Long(*v))?,
                Symbol::Double(v) => pool.intern(crate::classfile::Constant::Double(*v))?,
                Symbol::Field(m) => pool.intern_fieldref(&m.owner, &m.name, &m.descriptor)?,
                Symbol::Method(m) => pool.intern_methodref(&m.owner, &m.name, &m.descriptor, m.interface)?,
                Symbol::Utf8(v) => pool.intern_utf8(v)?,
            };
            *r = PoolRef::Index(idx);
        }
        Ok(())
    }
    for insn in &mut body.instructions {
        match &mut insn.operand {
            Operand::Pool(p) | Operand::Interface { pool: p, .. } | Operand::MultiArray { pool: p, .. } => {
                fix(p, pool)?
            }
            _ => {}
        }
    }
    for h in &mut body.handlers {
        if let Some(c) = &mut h.catch_type {
            fix(c, pool)?;
        }
    }
    for lv in body.locals.iter_mut().chain(body.local_types.iter_mut()) {
        fix(&mut lv.descriptor, pool)?;
    }
    Ok(())
}
