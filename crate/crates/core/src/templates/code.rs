//! Instruction builders shared by the templates.

use crate::classfile::descriptor::{FieldType, MethodDescriptor};
use crate::classfile::MemberRef;
use crate::codemodel::opcodes::{self, Kind};
use crate::codemodel::{CodeBody, Instruction, Label, Operand, PoolRef, Symbol};
use crate::donor::{DonorPool, FieldDonor, Literal, LocalDonor, MethodDonor};

use super::MethodView;

/// Hands out labels that do not clash with the body's.
pub(crate) struct Gen {
    next: u32,
}

pub(crate) fn kind_of(t: &FieldType) -> Kind {
    match t {
        FieldType::Long => Kind::Long,
        FieldType::Float => Kind::Float,
        FieldType::Double => Kind::Double,
        FieldType::Object(_) | FieldType::Array(_) => Kind::Ref,
        _ => Kind::Int,
    }
}

impl Gen {
    pub fn new(body: &CodeBody) -> Self {
        Gen { next: body.next_label }
    }

    pub fn insn(&mut self, opcode: u8, operand: Operand) -> Instruction {
        let l = Label(self.next);
        self.next += 1;
        Instruction::new(l, opcode, operand)
    }

    pub fn op(&mut self, opcode: u8) -> Instruction {
        self.insn(opcode, Operand::None)
    }

    pub fn branch(&mut self, opcode: u8, target: Label) -> Instruction {
        self.insn(opcode, Operand::Branch(target))
    }

    pub fn load(&mut self, k: Kind, index: u16) -> Instruction {
        if index <= 3 {
            self.op(opcodes::ILOAD_0 + k.load_op().wrapping_sub(opcodes::ILOAD) * 4 + index as u8)
        } else {
            self.insn(k.load_op(), Operand::Local(index))
        }
    }

    pub fn store(&mut self, k: Kind, index: u16) -> Instruction {
        if index <= 3 {
            self.op(opcodes::ISTORE_0 + k.store_op().wrapping_sub(opcodes::ISTORE) * 4 + index as u8)
        } else {
            self.insn(k.store_op(), Operand::Local(index))
        }
    }

    pub fn load_local(&mut self, l: &LocalDonor) -> Instruction {
        self.load(kind_of(&l.descriptor), l.index)
    }

    pub fn pop(&mut self, slots: usize) -> Instruction {
        self.op(if slots == 2 { opcodes::POP2 } else { opcodes::POP })
    }

    pub fn default_value(&mut self, t: &FieldType) -> Instruction {
        self.op(match kind_of(t) {
            Kind::Int => opcodes::ICONST_0,
            Kind::Long => opcodes::LCONST_0,
            Kind::Float => opcodes::FCONST_0,
            Kind::Double => opcodes::DCONST_0,
            Kind::Ref => opcodes::ACONST_NULL,
        })
    }

    pub fn int(&mut self, v: i32) -> Instruction {
        match v {
            -1..=5 => self.op((opcodes::ICONST_0 as i32 + v) as u8),
            -128..=127 => self.insn(opcodes::BIPUSH, Operand::Int(v)),
            -32768..=32767 => self.insn(opcodes::SIPUSH, Operand::Int(v)),
            _ => self.insn(opcodes::LDC, Operand::Pool(PoolRef::Sym(Symbol::Integer(v)))),
        }
    }

    pub fn literal(&mut self, lit: &Literal) -> Instruction {
        match lit {
            Literal::Int(v) => self.int(*v),
            Literal::Long(0) => self.op(opcodes::LCONST_0),
            Literal::Long(1) => self.op(opcodes::LCONST_1),
            Literal::Long(v) => self.insn(opcodes::LDC2_W, Operand::Pool(PoolRef::Sym(Symbol::Long(*v)))),
            Literal::Float(v) if *v == 0.0 && v.is_sign_positive() => self.op(opcodes::FCONST_0),
            Literal::Float(v) if *v == 1.0 => self.op(opcodes::FCONST_0 + 1),
            Literal::Float(v) if *v == 2.0 => self.op(opcodes::FCONST_2),
            Literal::Float(v) => self.insn(opcodes::LDC, Operand::Pool(PoolRef::Sym(Symbol::Float(v.to_bits())))),
            Literal::Double(v) if *v == 0.0 && v.is_sign_positive() => self.op(opcodes::DCONST_0),
            Literal::Double(v) if *v == 1.0 => self.op(opcodes::DCONST_1),
            Literal::Double(v) => self.insn(opcodes::LDC2_W, Operand::Pool(PoolRef::Sym(Symbol::Double(v.to_bits())))),
            Literal::Str(s) => self.insn(opcodes::LDC, Operand::Pool(PoolRef::Sym(Symbol::String(s.clone())))),
        }
    }

    pub fn class_op(&mut self, opcode: u8, class: &str) -> Instruction {
        self.insn(opcode, Operand::Pool(PoolRef::Sym(Symbol::Class(class.to_string()))))
    }

    pub fn field(&mut self, opcode: u8, f: &FieldDonor) -> Instruction {
        let m = MemberRef { owner: f.owner.clone(), name: f.name.clone(), descriptor: f.descriptor.descriptor(), interface: false };
        self.insn(opcode, Operand::Pool(PoolRef::Sym(Symbol::Field(m))))
    }

    pub fn invoke_ref(&mut self, opcode: u8, m: MemberRef) -> Instruction {
        if opcode == opcodes::INVOKEINTERFACE {
            let count = MethodDescriptor::parse(&m.descriptor).map_or(1, |d| d.param_slots() + 1) as u8;
            self.insn(opcode, Operand::Interface { pool: PoolRef::Sym(Symbol::Method(m)), count })
        } else {
            self.insn(opcode, Operand::Pool(PoolRef::Sym(Symbol::Method(m))))
        }
    }

    pub fn invoke(&mut self, m: &MethodDonor) -> Instruction {
        let r = MemberRef { owner: m.owner.clone(), name: m.name.clone(), descriptor: m.raw_descriptor(), interface: m.is_interface };
        self.invoke_ref(invoke_opcode(m), r)
    }
}

pub(crate) fn invoke_opcode(m: &MethodDonor) -> u8 {
    if m.is_static {
        opcodes::INVOKESTATIC
    } else if m.is_interface {
        opcodes::INVOKEINTERFACE
    } else if m.is_private {
        opcodes::INVOKESPECIAL
    } else {
        opcodes::INVOKEVIRTUAL
    }
}

/// A single-value donor expression with no operands of its own.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Local(LocalDonor),
    Field(FieldDonor),
    Call(MethodDonor),
    Literal(Literal),
}

impl Expr {
    pub fn field_type(&self) -> FieldType {
        match self {
            Expr::Local(l) => l.descriptor.clone(),
            Expr::Field(f) => f.descriptor.clone(),
            Expr::Call(m) => m.descriptor.ret.clone().unwrap_or(FieldType::Int),
            Expr::Literal(l) => l.field_type(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Expr::Local(l) => match &l.name {
                Some(n) => format!("local {} ({n})", l.index),
                None => format!("local {}", l.index),
            },
            Expr::Field(f) => format!("field {}.{}", f.owner, f.name),
            Expr::Call(m) => format!("call {}.{}()", m.owner, m.name),
            Expr::Literal(l) => format!("literal {l:?}"),
        }
    }

    /// Code pushing the value, or `None` when it is unreachable from this method.
    pub(crate) fn code(&self, view: &MethodView<'_>, g: &mut Gen) -> Option<Vec<Instruction>> {
        let this_ok = |owner: &str| !view.is_static && view.hierarchy.is_subtype(&view.key.class, owner) == Some(true);
        Some(match self {
            Expr::Local(l) => vec![g.load_local(l)],
            Expr::Literal(l) => vec![g.literal(l)],
            Expr::Field(f) if f.is_static => vec![g.field(opcodes::GETSTATIC, f)],
            Expr::Field(f) if this_ok(&f.owner) => vec![g.load(Kind::Ref, 0), g.field(opcodes::GETFIELD, f)],
            Expr::Call(m) if !m.descriptor.params.is_empty() || m.descriptor.ret.is_none() => return None,
            Expr::Call(m) if &m.name == &view.key.name && m.owner == view.key.class => return None,
            Expr::Call(m) if m.is_static => vec![g.invoke(m)],
            Expr::Call(m) if this_ok(&m.owner) => vec![g.load(Kind::Ref, 0), g.invoke(m)],
            _ => return None,
        })
    }
}

/// Donor expressions usable where `want` is expected, in pool order: locals, fields, calls, literals.
pub(crate) fn expressions(
    view: &MethodView<'_>,
    donors: &DonorPool,
    want: &FieldType,
    with_locals: bool,
    with_literals: bool,
) -> Vec<Expr> {
    use crate::donor::type_compatible;
    let h = view.hierarchy;
    let mut out = Vec::new();
    if with_locals {
        out.extend(donors.locals.iter().filter(|l| type_compatible(&l.descriptor, want, h)).cloned().map(Expr::Local));
    }
    out.extend(donors.fields.iter().filter(|f| type_compatible(&f.descriptor, want, h)).cloned().map(Expr::Field));
    out.extend(
        donors
            .methods
            .iter()
            .filter(|m| m.descriptor.params.is_empty())
            .filter(|m| m.descriptor.ret.as_ref().is_some_and(|r| type_compatible(r, want, h)))
            .cloned()
            .map(Expr::Call),
    );
    if with_literals {
        out.extend(donors.literals.iter().filter(|l| type_compatible(&l.field_type(), want, h)).cloned().map(Expr::Literal));
    }
    out
}
