//! StackMapTable maintenance after edits.
//!
//! Three tiers: keep the existing frames when they still type-check at exactly the
//! required offsets; otherwise infer new frames by forward dataflow; if inference needs
//! class facts that are not available, drop the frames and let the caller fall back to
//! version-50 verification.

use std::collections::{HashMap, HashSet};

use super::edit::{apply_edits, Edit};
use super::opcodes::{self, Kind};
use super::{
    parse_field_descriptor, parse_method_descriptor, CodeBody, CodeError, ConstValue, Frame, FrameKind, Instruction,
    Label, Operand, PoolRef, Symbol, VType,
};
use crate::classfile::descriptor::FieldType;
use crate::classfile::{Constant, ConstantPool};
use crate::hierarchy::{ClassHierarchy, OBJECT};

use ValueType as T;

pub struct MethodContext<'a> {
    pub class_name: &'a str,
    pub method_name: &'a str,
    pub descriptor: &'a str,
    pub is_static: bool,
    pub major_version: u16,
    pub hierarchy: &'a ClassHierarchy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameStatus {
    /// Class version predates stack maps.
    NotRequired,
    /// Existing frames kept; only their offsets move.
    Preserved,
    Regenerated,
    /// Frames dropped; the class must be emitted as version 50.
    Downgraded,
}

impl FrameStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameStatus::NotRequired => "not_required",
            FrameStatus::Preserved => "preserved",
            FrameStatus::Regenerated => "regenerated",
            FrameStatus::Downgraded => "downgraded",
        }
    }
}

/// Verification type of one local or stack slot; wide values are followed by `Top`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueType {
    Top,
    Int,
    Float,
    Long,
    Double,
    Null,
    UninitThis,
    Uninit(Label),
    Ref(String),
}

impl ValueType {
    pub fn is_ref(&self) -> bool {
        matches!(self, T::Null | T::Ref(_) | T::UninitThis | T::Uninit(_))
    }

    pub fn is_wide(&self) -> bool {
        matches!(self, T::Long | T::Double)
    }

    pub fn of(ft: &FieldType) -> T {
        match ft {
            FieldType::Long => T::Long,
            FieldType::Double => T::Double,
            FieldType::Float => T::Float,
            FieldType::Object(n) => T::Ref(n.clone()),
            FieldType::Array(_) => T::Ref(ft.descriptor()),
            _ => T::Int,
        }
    }

    fn of_kind(k: Kind) -> T {
        match k {
            Kind::Int => T::Int,
            Kind::Long => T::Long,
            Kind::Float => T::Float,
            Kind::Double => T::Double,
            Kind::Ref => T::Null,
        }
    }
}

#[derive(Debug)]
enum Fail {
    /// Class facts are missing; a downgrade can still help.
    Imprecise(String),
    /// The code does not type-check.
    Hard(String),
}

fn hard<R>(msg: impl Into<String>) -> Result<R, Fail> {
    Err(Fail::Hard(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeState {
    pub locals: Vec<ValueType>,
    pub stack: Vec<ValueType>,
}

impl TypeState {
    fn push(&mut self, t: T) {
        let wide = t.is_wide();
        self.stack.push(t);
        if wide {
            self.stack.push(T::Top);
        }
    }

    fn pop1(&mut self) -> Result<T, Fail> {
        self.stack.pop().map_or_else(|| hard("operand stack underflow"), Ok)
    }

    fn pop(&mut self, k: Kind) -> Result<T, Fail> {
        if k.slots() == 2 {
            let hi = self.pop1()?;
            let lo = self.pop1()?;
            let want = T::of_kind(k);
            if hi != T::Top || lo != want {
                return hard(format!("expected {want:?} on stack, found {lo:?}"));
            }
            return Ok(lo);
        }
        let v = self.pop1()?;
        let ok = match k {
            Kind::Int => v == T::Int,
            Kind::Float => v == T::Float,
            Kind::Ref => v.is_ref() && !matches!(v, T::UninitThis | T::Uninit(_)),
            _ => unreachable!(),
        };
        if !ok {
            return hard(format!("expected {k:?} on stack, found {v:?}"));
        }
        Ok(v)
    }

    fn pop_type(&mut self, ft: &FieldType) -> Result<T, Fail> {
        self.pop(kind_of(ft))
    }

    /// Any reference to the uninitialized receiver of a constructor.
    fn this_uninit(&self) -> bool {
        self.locals.contains(&T::UninitThis) || self.stack.contains(&T::UninitThis)
    }

    /// Pops a reference that may still be uninitialized.
    fn pop_any_ref(&mut self) -> Result<T, Fail> {
        let v = self.pop1()?;
        if !v.is_ref() {
            return hard(format!("expected a reference on stack, found {v:?}"));
        }
        Ok(v)
    }

    pub fn local(&self, i: usize) -> &T {
        self.locals.get(i).unwrap_or(&T::Top)
    }

    fn set_local(&mut self, i: usize, t: T) {
        let wide = t.is_wide();
        let need = i + if wide { 2 } else { 1 };
        if self.locals.len() < need {
            self.locals.resize(need, T::Top);
        }
        if i > 0 && self.locals[i - 1].is_wide() {
            self.locals[i - 1] = T::Top;
        }
        self.locals[i] = t;
        if wide {
            self.locals[i + 1] = T::Top;
        }
    }

    fn replace_all(&mut self, from: &T, to: &T) {
        for t in self.locals.iter_mut().chain(self.stack.iter_mut()) {
            if t == from {
                *t = to.clone();
            }
        }
    }
}

fn kind_of(ft: &FieldType) -> Kind {
    match ft {
        FieldType::Long => Kind::Long,
        FieldType::Double => Kind::Double,
        FieldType::Float => Kind::Float,
        FieldType::Object(_) | FieldType::Array(_) => Kind::Ref,
        _ => Kind::Int,
    }
}

struct Typer<'a> {
    body: &'a CodeBody,
    pool: &'a ConstantPool,
    ctx: &'a MethodContext<'a>,
    pos: HashMap<Label, usize>,
    /// Merge unknown reference types to Object instead of failing.
    lenient: bool,
}

impl<'a> Typer<'a> {
    fn new(body: &'a CodeBody, pool: &'a ConstantPool, ctx: &'a MethodContext<'a>) -> Self {
        Typer { body, pool, ctx, pos: body.positions(), lenient: false }
    }

    fn initial(&self) -> Result<TypeState, Fail> {
        let md = parse_method_descriptor(self.ctx.descriptor).map_err(|e| Fail::Hard(e.to_string()))?;
        let mut s = TypeState { locals: Vec::new(), stack: Vec::new() };
        if !self.ctx.is_static {
            let this = if self.ctx.method_name == "<init>" && self.ctx.class_name != OBJECT {
                T::UninitThis
            } else {
                T::Ref(self.ctx.class_name.to_string())
            };
            s.locals.push(this);
        }
        for p in &md.params {
            let t = T::of(p);
            let wide = t.is_wide();
            s.locals.push(t);
            if wide {
                s.locals.push(T::Top);
            }
        }
        Ok(s)
    }

    fn class_ref(&self, r: &PoolRef) -> Result<String, Fail> {
        self.body.resolve_class(self.pool, r).map_or_else(|| hard("bad class operand"), Ok)
    }

    fn descriptor(&self, insn: &Instruction) -> Result<String, Fail> {
        let r = insn.pool_ref().ok_or_else(|| Fail::Hard("missing pool operand".into()))?;
        let d = match r {
            PoolRef::Index(i) if insn.opcode == opcodes::INVOKEDYNAMIC => {
                self.pool.dynamic_descriptor(*i).map(|c| c.into_owned())
            }
            PoolRef::Index(i) => self.pool.member_ref(*i).map(|m| m.descriptor),
            PoolRef::Sym(Symbol::Field(m) | Symbol::Method(m)) => Ok(m.descriptor.clone()),
            PoolRef::Sym(_) => return hard("pool operand is not a member"),
        };
        d.map_err(|e| Fail::Hard(e.to_string()))
    }

    fn assignable(&self, from: &T, to: &T) -> Result<bool, Fail> {
        Ok(match (from, to) {
            _ if from == to => true,
            (_, T::Top) => true,
            (T::Null, T::Ref(_)) => true,
            (T::Ref(a), T::Ref(b)) => {
                if b == OBJECT {
                    true
                } else if self.ctx.hierarchy.is_interface(b) == Some(true) {
                    true
                } else {
                    match self.ctx.hierarchy.is_subtype(a, b) {
                        Some(v) => v,
                        None => return Err(Fail::Imprecise(format!("is {a} a {b}?"))),
                    }
                }
            }
            _ => false,
        })
    }

    fn state_assignable(&self, from: &TypeState, to: &TypeState) -> Result<bool, Fail> {
        if from.stack.len() != to.stack.len() || from.this_uninit() != to.this_uninit() {
            return Ok(false);
        }
        for (a, b) in from.stack.iter().zip(&to.stack) {
            if !self.assignable(a, b)? {
                return Ok(false);
            }
        }
        for (i, b) in to.locals.iter().enumerate() {
            if !self.assignable(from.local(i), b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn merge_type(&self, a: &T, b: &T, on_stack: bool) -> Result<T, Fail> {
        if a == b {
            return Ok(a.clone());
        }
        match (a, b) {
            (T::Null, T::Ref(_)) => Ok(b.clone()),
            (T::Ref(_), T::Null) => Ok(a.clone()),
            (T::Ref(x), T::Ref(y)) => match self.ctx.hierarchy.common_super(x, y) {
                Some(c) => Ok(T::Ref(c)),
                None if self.lenient => Ok(T::Ref(OBJECT.to_string())),
                None => Err(Fail::Imprecise(format!("no common superclass known for {x} and {y}"))),
            },
            _ if on_stack => hard(format!("stack types {a:?} and {b:?} do not merge")),
            _ => Ok(T::Top),
        }
    }

    fn merge(&self, old: &TypeState, new: &TypeState) -> Result<TypeState, Fail> {
        if old.stack.len() != new.stack.len() {
            return hard(format!("stack depths {} and {} meet", old.stack.len(), new.stack.len()));
        }
        if old.this_uninit() != new.this_uninit() {
            return hard("paths disagree on whether the constructor receiver is initialized");
        }
        let stack =
            old.stack.iter().zip(&new.stack).map(|(a, b)| self.merge_type(a, b, true)).collect::<Result<Vec<_>, _>>()?;
        let n = old.locals.len().min(new.locals.len());
        let mut locals = (0..n).map(|i| self.merge_type(&old.locals[i], &new.locals[i], false)).collect::<Result<Vec<_>, _>>()?;
        for i in 0..locals.len() {
            if locals[i].is_wide() && locals.get(i + 1) != Some(&T::Top) {
                locals[i] = T::Top;
            }
        }
        while locals.last() == Some(&T::Top) {
            locals.pop();
        }
        Ok(TypeState { locals, stack })
    }

    /// Rejects a reference known not to be a `want`. Interfaces are not checked, as in the verifier.
    fn expect_ref(&self, v: &T, want: &str, what: &str) -> Result<(), Fail> {
        if let T::Ref(a) = v {
            if self.ctx.hierarchy.is_interface(want) != Some(true) && self.ctx.hierarchy.is_subtype(a, want) == Some(false) {
                return hard(format!("{what} {a} where {want} is expected"));
            }
        }
        Ok(())
    }

    fn expect_field_type(&self, v: &T, ft: &FieldType, what: &str) -> Result<(), Fail> {
        match ft {
            FieldType::Object(b) => self.expect_ref(v, b, what),
            FieldType::Array(_) => self.expect_ref(v, &ft.to_string(), what),
            _ => Ok(()),
        }
    }

    fn handler_ranges(&self) -> Vec<(usize, usize, usize, T)> {
        self.body
            .handlers
            .iter()
            .filter_map(|h| {
                let s = *self.pos.get(&h.start)?;
                let e = *self.pos.get(&h.end)?;
                let p = *self.pos.get(&h.handler)?;
                let t = match &h.catch_type {
                    None => T::Ref("java/lang/Throwable".into()),
                    Some(r) => T::Ref(self.class_ref(r).ok()?),
                };
                Some((s, e, p, t))
            })
            .collect()
    }

    fn transfer(&self, s: &mut TypeState, insn: &Instruction) -> Result<(), Fail> {
        use opcodes::*;
        let op = insn.opcode;
        if let Some((k, short)) = load_kind(op) {
            let i = short.or(insn.local_index()).unwrap() as usize;
            let t = s.local(i).clone();
            let ok = match k {
                Kind::Ref => t.is_ref(),
                Kind::Long | Kind::Double => t == T::of_kind(k) && *s.local(i + 1) == T::Top,
                _ => t == T::of_kind(k),
            };
            if !ok {
                return hard(format!("{} reads local {i} holding {t:?}", insn.mnemonic()));
            }
            s.push(t);
            return Ok(());
        }
        if let Some((k, short)) = store_kind(op) {
            let i = short.or(insn.local_index()).unwrap() as usize;
            let v = if k == Kind::Ref { s.pop_any_ref()? } else { s.pop(k)? };
            s.set_local(i, v);
            return Ok(());
        }
        match op {
            NOP => {}
            ACONST_NULL => s.push(T::Null),
            ICONST_M1..=ICONST_5 | BIPUSH | SIPUSH => s.push(T::Int),
            LCONST_0 | LCONST_1 => s.push(T::Long),
            FCONST_0..=FCONST_2 => s.push(T::Float),
            DCONST_0 | DCONST_1 => s.push(T::Double),
            LDC | LDC_W | LDC2_W => {
                let t = match insn.constant(self.pool) {
                    Some(ConstValue::Int(_)) => T::Int,
                    Some(ConstValue::Float(_)) => T::Float,
                    Some(ConstValue::Long(_)) => T::Long,
                    Some(ConstValue::Double(_)) => T::Double,
                    Some(ConstValue::String(_)) => T::Ref("java/lang/String".into()),
                    Some(ConstValue::Class(_)) => T::Ref("java/lang/Class".into()),
                    _ => match insn.pool_ref() {
                        Some(PoolRef::Index(i)) => match self.pool.get(*i) {
                            Ok(Constant::MethodType { .. }) => T::Ref("java/lang/invoke/MethodType".into()),
                            Ok(Constant::MethodHandle { .. }) => T::Ref("java/lang/invoke/MethodHandle".into()),
                            Ok(Constant::Dynamic { .. }) => {
                                let d = self.pool.dynamic_descriptor(*i).map_err(|e| Fail::Hard(e.to_string()))?;
                                T::of(&parse_field_descriptor(&d).map_err(|e| Fail::Hard(e.to_string()))?)
                            }
                            _ => return hard("ldc of unloadable constant"),
                        },
                        _ => return hard("ldc of unloadable constant"),
                    },
                };
                s.push(t);
            }
            IALOAD..=SALOAD => {
                s.pop(Kind::Int)?;
                let arr = s.pop(Kind::Ref)?;
                let t = match op {
                    IALOAD | 51 | 52 | SALOAD => T::Int,
                    47 => T::Long,
                    48 => T::Float,
                    49 => T::Double,
                    _ => match &arr {
                        T::Null => T::Null,
                        T::Ref(d) if d.starts_with('[') => {
                            T::of(&parse_field_descriptor(&d[1..]).map_err(|e| Fail::Hard(e.to_string()))?)
                        }
                        _ => return hard(format!("aaload on {arr:?}")),
                    },
                };
                s.push(t);
            }
            IASTORE..=SASTORE => {
                let k = match op {
                    80 => Kind::Long,
                    81 => Kind::Float,
                    82 => Kind::Double,
                    83 => Kind::Ref,
                    _ => Kind::Int,
                };
                s.pop(k)?;
                s.pop(Kind::Int)?;
                s.pop(Kind::Ref)?;
            }
            POP => {
                s.pop1()?;
            }
            POP2 => {
                s.pop1()?;
                s.pop1()?;
            }
            DUP..=SWAP => {
                let need = match op {
                    DUP => 1,
                    DUP_X1 | DUP2 | SWAP => 2,
                    DUP_X2 | DUP2_X1 => 3,
                    _ => 4,
                };
                if s.stack.len() < need {
                    return hard("operand stack underflow");
                }
                let at = s.stack.len();
                let v: Vec<T> = s.stack[at - need..].to_vec();
                s.stack.truncate(at - need);
                let order: &[usize] = match op {
                    DUP => &[0, 0],
                    DUP_X1 => &[1, 0, 1],
                    DUP_X2 => &[2, 0, 1, 2],
                    DUP2 => &[0, 1, 0, 1],
                    DUP2_X1 => &[1, 2, 0, 1, 2],
                    DUP2_X2 => &[2, 3, 0, 1, 2, 3],
                    _ => &[1, 0],
                };
                s.stack.extend(order.iter().map(|&i| v[i].clone()));
            }
            IADD..=DREM => {
                let k = [Kind::Int, Kind::Long, Kind::Float, Kind::Double][((op - IADD) % 4) as usize];
                s.pop(k)?;
                s.pop(k)?;
                s.push(T::of_kind(k));
            }
            INEG..=DNEG => {
                let k = [Kind::Int, Kind::Long, Kind::Float, Kind::Double][(op - INEG) as usize];
                s.pop(k)?;
                s.push(T::of_kind(k));
            }
            ISHL..=LUSHR => {
                let k = if (op - ISHL) % 2 == 0 { Kind::Int } else { Kind::Long };
                s.pop(Kind::Int)?;
                s.pop(k)?;
                s.push(T::of_kind(k));
            }
            IAND..=LXOR => {
                let k = if (op - IAND) % 2 == 0 { Kind::Int } else { Kind::Long };
                s.pop(k)?;
                s.pop(k)?;
                s.push(T::of_kind(k));
            }
            IINC => {
                let i = insn.local_index().unwrap() as usize;
                if *s.local(i) != T::Int {
                    return hard(format!("iinc on local {i} holding {:?}", s.local(i)));
                }
            }
            I2L..=I2S => {
                let (from, to) = match op {
                    I2L => (Kind::Int, Kind::Long),
                    I2F => (Kind::Int, Kind::Float),
                    I2D => (Kind::Int, Kind::Double),
                    L2I => (Kind::Long, Kind::Int),
                    L2F => (Kind::Long, Kind::Float),
                    L2D => (Kind::Long, Kind::Double),
                    F2I => (Kind::Float, Kind::Int),
                    F2L => (Kind::Float, Kind::Long),
                    F2D => (Kind::Float, Kind::Double),
                    D2I => (Kind::Double, Kind::Int),
                    D2L => (Kind::Double, Kind::Long),
                    D2F => (Kind::Double, Kind::Float),
                    _ => (Kind::Int, Kind::Int),
                };
                s.pop(from)?;
                s.push(T::of_kind(to));
            }
            LCMP => {
                s.pop(Kind::Long)?;
                s.pop(Kind::Long)?;
                s.push(T::Int);
            }
            149 | 150 => {
                s.pop(Kind::Float)?;
                s.pop(Kind::Float)?;
                s.push(T::Int);
            }
            151 | DCMPG => {
                s.pop(Kind::Double)?;
                s.pop(Kind::Double)?;
                s.push(T::Int);
            }
            IFEQ..=IFLE => {
                s.pop(Kind::Int)?;
            }
            IF_ICMPEQ..=IF_ICMPLE => {
                s.pop(Kind::Int)?;
                s.pop(Kind::Int)?;
            }
            IF_ACMPEQ | IF_ACMPNE => {
                s.pop(Kind::Ref)?;
                s.pop(Kind::Ref)?;
            }
            IFNULL | IFNONNULL => {
                s.pop(Kind::Ref)?;
            }
            GOTO | GOTO_W => {}
            JSR | JSR_W | RET => return hard("subroutines are not supported with stack maps"),
            TABLESWITCH | LOOKUPSWITCH => {
                s.pop(Kind::Int)?;
            }
            IRETURN..=ARETURN => {
                let md = parse_method_descriptor(self.ctx.descriptor).map_err(|e| Fail::Hard(e.to_string()))?;
                let Some(ret) = md.ret else { return hard("value return from void method") };
                let want = kind_of(&ret);
                if return_kind(op) != Some(Some(want)) {
                    return hard(format!("{} in method returning {ret}", insn.mnemonic()));
                }
                let v = s.pop(want)?;
                self.expect_field_type(&v, &ret, "returns")?;
            }
            RETURN if s.this_uninit() => return hard("constructor returns before calling super() or this()"),
            RETURN => {}
            GETSTATIC | GETFIELD | PUTSTATIC | PUTFIELD => {
                let ft = parse_field_descriptor(&self.descriptor(insn)?).map_err(|e| Fail::Hard(e.to_string()))?;
                let owner = insn.member(self.pool).map(|m| m.owner);
                match op {
                    GETSTATIC => s.push(T::of(&ft)),
                    GETFIELD => {
                        let recv = s.pop(Kind::Ref)?;
                        if let Some(o) = &owner {
                            self.expect_ref(&recv, o, "reads a field of")?;
                        }
                        s.push(T::of(&ft));
                    }
                    PUTSTATIC => {
                        let v = s.pop_type(&ft)?;
                        self.expect_field_type(&v, &ft, "stores")?;
                    }
                    _ => {
                        let v = s.pop_type(&ft)?;
                        self.expect_field_type(&v, &ft, "stores")?;
                        let recv = s.pop_any_ref()?;
                        match (&recv, &owner) {
                            (T::UninitThis, Some(o)) if o == self.ctx.class_name => {}
                            (T::UninitThis | T::Uninit(_), _) => return hard("field store on an uninitialized object"),
                            (_, Some(o)) => self.expect_ref(&recv, o, "writes a field of")?,
                            _ => {}
                        }
                    }
                }
            }
            INVOKEVIRTUAL..=INVOKEDYNAMIC => {
                let md = parse_method_descriptor(&self.descriptor(insn)?).map_err(|e| Fail::Hard(e.to_string()))?;
                for p in md.params.iter().rev() {
                    let v = s.pop_type(p)?;
                    self.expect_field_type(&v, p, "passes")?;
                }
                if !matches!(op, INVOKESTATIC | INVOKEDYNAMIC) {
                    let recv = s.pop_any_ref()?;
                    let member = insn.member(self.pool);
                    if let (T::Ref(_), Some(m)) = (&recv, &member) {
                        if m.name != "<init>" {
                            self.expect_ref(&recv, &m.owner, "calls a method of")?;
                        }
                    }
                    if op == INVOKESPECIAL && member.as_ref().is_some_and(|m| m.name == "<init>") {
                        let init = match &recv {
                            T::UninitThis => T::Ref(self.ctx.class_name.to_string()),
                            T::Uninit(l) => {
                                let p = *self.pos.get(l).ok_or_else(|| Fail::Hard("dangling new".into()))?;
                                let c = self.body.instructions[p]
                                    .class_operand(self.pool)
                                    .ok_or_else(|| Fail::Hard("new without class".into()))?;
                                T::Ref(c)
                            }
                            _ => return hard(format!("<init> on initialized {recv:?}")),
                        };
                        s.replace_all(&recv, &init);
                    } else if matches!(recv, T::UninitThis | T::Uninit(_)) {
                        return hard("method call on uninitialized object");
                    }
                }
                if let Some(r) = &md.ret {
                    s.push(T::of(r));
                }
            }
            NEW => s.push(T::Uninit(insn.label)),
            NEWARRAY => {
                s.pop(Kind::Int)?;
                let Operand::ArrayType(code) = insn.operand else { return hard("newarray operand") };
                let d = match code {
                    4 => "[Z",
                    5 => "[C",
                    6 => "[F",
                    7 => "[D",
                    8 => "[B",
                    9 => "[S",
                    10 => "[I",
                    11 => "[J",
                    _ => return hard(format!("newarray type {code}")),
                };
                s.push(T::Ref(d.into()));
            }
            ANEWARRAY => {
                s.pop(Kind::Int)?;
                let c = self.class_ref(insn.pool_ref().unwrap())?;
                let elem = if c.starts_with('[') { c } else { format!("L{c};") };
                s.push(T::Ref(format!("[{elem}")));
            }
            ARRAYLENGTH => {
                s.pop(Kind::Ref)?;
                s.push(T::Int);
            }
            ATHROW => {
                let v = s.pop(Kind::Ref)?;
                self.expect_ref(&v, "java/lang/Throwable", "throws")?;
            }
            MONITORENTER | MONITOREXIT => {
                s.pop(Kind::Ref)?;
            }
            CHECKCAST => {
                s.pop(Kind::Ref)?;
                s.push(T::Ref(self.class_ref(insn.pool_ref().unwrap())?));
            }
            INSTANCEOF => {
                s.pop(Kind::Ref)?;
                s.push(T::Int);
            }
            MULTIANEWARRAY => {
                let Operand::MultiArray { dims, pool } = &insn.operand else { return hard("multianewarray operand") };
                for _ in 0..*dims {
                    s.pop(Kind::Int)?;
                }
                s.push(T::Ref(self.class_ref(pool)?));
            }
            _ => return hard(format!("unexpected opcode {}", insn.mnemonic())),
        }
        Ok(())
    }

    /// Forward dataflow to a fixpoint; `None` entries are unreachable.
    fn infer(&self) -> Result<Vec<Option<TypeState>>, Fail> {
        let n = self.body.instructions.len();
        let mut states: Vec<Option<TypeState>> = vec![None; n];
        if n == 0 {
            return Ok(states);
        }
        let handlers = self.handler_ranges();
        let mut work = vec![0usize];
        states[0] = Some(self.initial()?);
        let mut on_work: HashSet<usize> = HashSet::from([0]);
        while let Some(p) = work.pop() {
            on_work.remove(&p);
            let s = states[p].clone().unwrap();
            let insn = &self.body.instructions[p];
            let mut next = s.clone();
            self.transfer(&mut next, insn)?;
            let mut succ: Vec<(usize, TypeState)> = Vec::new();
            for (hs, he, hp, t) in &handlers {
                if (*hs..*he).contains(&p) {
                    if s.this_uninit() {
                        return hard("exception handler covers code before super() or this()");
                    }
                    for locals in [&s.locals, &next.locals] {
                        succ.push((*hp, TypeState { locals: locals.clone(), stack: vec![t.clone()] }));
                    }
                }
            }
            for t in insn.targets() {
                let q = *self.pos.get(&t).ok_or_else(|| Fail::Hard(format!("unresolved {t}")))?;
                succ.push((q, next.clone()));
            }
            if insn.falls_through() {
                if p + 1 >= n {
                    return hard("execution falls off the end of the code");
                }
                succ.push((p + 1, next.clone()));
            }
            for (q, st) in succ {
                let merged = match &states[q] {
                    None => st,
                    Some(old) => {
                        let m = self.merge(old, &st)?;
                        if &m == old {
                            continue;
                        }
                        m
                    }
                };
                states[q] = Some(merged);
                if on_work.insert(q) {
                    work.push(q);
                }
            }
        }
        Ok(states)
    }

    fn from_vtype(&self, v: &VType) -> Result<T, Fail> {
        Ok(match v {
            VType::Top => T::Top,
            VType::Integer => T::Int,
            VType::Float => T::Float,
            VType::Long => T::Long,
            VType::Double => T::Double,
            VType::Null => T::Null,
            VType::UninitializedThis => T::UninitThis,
            VType::Uninitialized(l) => T::Uninit(*l),
            VType::Object(i) => T::Ref(
                self.pool.class_name(*i).map_err(|e| Fail::Hard(e.to_string()))?.into_owned(),
            ),
        })
    }

    fn slots(&self, items: &[VType]) -> Result<Vec<T>, Fail> {
        let mut out = Vec::with_capacity(items.len());
        for v in items {
            let t = self.from_vtype(v)?;
            let wide = t.is_wide();
            out.push(t);
            if wide {
                out.push(T::Top);
            }
        }
        Ok(out)
    }

    /// Expands delta-encoded frames into full states keyed by label.
    fn expand(&self, frames: &[Frame]) -> Result<HashMap<Label, TypeState>, Fail> {
        let mut order: Vec<&Frame> = frames.iter().collect();
        order.sort_by_key(|f| self.pos.get(&f.label).copied().unwrap_or(usize::MAX));
        let mut items = to_items(&self.initial()?.locals);
        let mut out = HashMap::new();
        for f in order {
            let stack = match &f.kind {
                FrameKind::Same { .. } => Vec::new(),
                FrameKind::SameLocals1 { stack, .. } => self.slots(std::slice::from_ref(stack))?,
                FrameKind::Chop(k) => {
                    let k = *k as usize;
                    if k > items.len() {
                        return hard("chop below zero locals");
                    }
                    items.truncate(items.len() - k);
                    Vec::new()
                }
                FrameKind::Append(more) => {
                    for v in more {
                        items.push(self.from_vtype(v)?);
                    }
                    Vec::new()
                }
                FrameKind::Full { locals, stack } => {
                    items = to_items(&self.slots(locals)?);
                    self.slots(stack)?
                }
            };
            let locals = from_items(&items);
            out.insert(f.label, TypeState { locals, stack });
        }
        Ok(out)
    }

    /// Type-checks the body against its declared frames.
    fn check(&self, frames: &[Frame]) -> Result<(), Fail> {
        let declared = self.expand(frames)?;
        let handlers = self.handler_ranges();
        let mut cur = Some(self.initial()?);
        for (p, insn) in self.body.instructions.iter().enumerate() {
            if let Some(fs) = declared.get(&insn.label) {
                if let Some(c) = &cur {
                    if !self.state_assignable(c, fs)? {
                        return hard(format!("fall-through into {} does not match its frame", insn.label));
                    }
                }
                cur = Some(fs.clone());
            }
            let Some(s) = cur.take() else {
                return hard(format!("no frame for {} after an unconditional transfer", insn.label));
            };
            let mut next = s.clone();
            self.transfer(&mut next, insn)?;
            for (hs, he, hp, t) in &handlers {
                if (*hs..*he).contains(&p) {
                    if s.this_uninit() {
                        return hard("exception handler covers code before super() or this()");
                    }
                    let hl = self.body.instructions[*hp].label;
                    let target = declared.get(&hl).ok_or_else(|| Fail::Hard(format!("no frame at handler {hl}")))?;
                    for locals in [&s.locals, &next.locals] {
                        let st = TypeState { locals: locals.clone(), stack: vec![t.clone()] };
                        if !self.state_assignable(&st, target)? {
                            return hard(format!("handler {hl} frame does not match"));
                        }
                    }
                }
            }
            for t in insn.targets() {
                let target = declared.get(&t).ok_or_else(|| Fail::Hard(format!("no frame at target {t}")))?;
                if !self.state_assignable(&next, target)? {
                    return hard(format!("jump to {t} does not match its frame"));
                }
            }
            cur = insn.falls_through().then_some(next);
        }
        Ok(())
    }
}

fn to_items(slots: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(slots.len());
    let mut i = 0;
    while i < slots.len() {
        out.push(slots[i].clone());
        i += if slots[i].is_wide() { 2 } else { 1 };
    }
    out
}

fn from_items(items: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(items.len());
    for t in items {
        out.push(t.clone());
        if t.is_wide() {
            out.push(T::Top);
        }
    }
    out
}

/// Type state on entry to every instruction (`None` where unreachable).
/// Reference merges that need unknown classes fall back to Object.
pub fn analyze_types(
    body: &CodeBody,
    pool: &ConstantPool,
    ctx: &MethodContext<'_>,
) -> Result<Vec<Option<TypeState>>, CodeError> {
    let mut typer = Typer::new(body, pool, ctx);
    typer.lenient = true;
    typer.infer().map_err(fail_to_error)
}

/// Labels that must carry a frame: jump targets, handler entries, and code after unconditional transfers.
pub fn required_frame_labels(body: &CodeBody) -> Vec<Label> {
    let mut set: HashSet<Label> = body.jump_targets().into_iter().collect();
    for w in body.instructions.windows(2) {
        if !w[0].falls_through() {
            set.insert(w[1].label);
        }
    }
    let mut v: Vec<Label> = set.into_iter().collect();
    let pos = body.positions();
    v.sort_by_key(|l| pos.get(l).copied().unwrap_or(usize::MAX));
    v
}

fn to_vtype(t: &T, pool: &mut ConstantPool) -> Result<VType, CodeError> {
    Ok(match t {
        T::Top => VType::Top,
        T::Int => VType::Integer,
        T::Float => VType::Float,
        T::Long => VType::Long,
        T::Double => VType::Double,
        T::Null => VType::Null,
        T::UninitThis => VType::UninitializedThis,
        T::Uninit(l) => VType::Uninitialized(*l),
        T::Ref(n) => VType::Object(pool.intern_class(n)?),
    })
}

fn build_frames(
    body: &CodeBody,
    states: &[Option<TypeState>],
    initial: &TypeState,
    pool: &mut ConstantPool,
) -> Result<Vec<Frame>, CodeError> {
    let pos = body.positions();
    let mut prev = trim(to_items(&initial.locals));
    let mut frames = Vec::new();
    for l in required_frame_labels(body) {
        let Some(&p) = pos.get(&l) else { continue };
        let Some(s) = states.get(p).and_then(|s| s.as_ref()) else { continue };
        let locals = trim(to_items(&s.locals));
        let stack = to_items(&s.stack);
        let vl = |v: &[T], pool: &mut ConstantPool| v.iter().map(|t| to_vtype(t, pool)).collect::<Result<Vec<_>, _>>();
        let kind = if stack.is_empty() && locals == prev {
            FrameKind::Same { extended: false }
        } else if stack.len() == 1 && locals == prev {
            FrameKind::SameLocals1 { stack: to_vtype(&stack[0], pool)?, extended: false }
        } else if stack.is_empty() && locals.len() < prev.len() && prev.len() - locals.len() <= 3 && prev.starts_with(&locals) {
            FrameKind::Chop((prev.len() - locals.len()) as u8)
        } else if stack.is_empty() && locals.len() > prev.len() && locals.len() - prev.len() <= 3 && locals.starts_with(&prev) {
            FrameKind::Append(vl(&locals[prev.len()..], pool)?)
        } else {
            FrameKind::Full { locals: vl(&locals, pool)?, stack: vl(&stack, pool)? }
        };
        frames.push(Frame { label: l, kind });
        prev = locals;
    }
    Ok(frames)
}

fn trim(mut items: Vec<T>) -> Vec<T> {
    while items.last() == Some(&T::Top) {
        items.pop();
    }
    items
}

/// Brings the body's frames in line with its (possibly edited) code.
pub fn refresh_frames(body: &mut CodeBody, pool: &mut ConstantPool, ctx: &MethodContext<'_>) -> Result<FrameStatus, CodeError> {
    if ctx.major_version < 50 {
        return Ok(FrameStatus::NotRequired);
    }
    if !body.modified {
        return Ok(FrameStatus::Preserved);
    }
    // The verifier checks unreachable code against its frames too, so drop it first.
    let reach = reachable(body)?;
    if reach.iter().any(Option::is_none) {
        remove_dead_code(body, &reach)?;
        return regenerate_after_cleanup(body, pool, ctx);
    }
    let required: HashSet<Label> = required_frame_labels(body).into_iter().collect();
    let existing: HashSet<Label> = body.frames.iter().flatten().map(|f| f.label).collect();
    if required == existing {
        let frames = body.frames.clone().unwrap_or_default();
        if Typer::new(body, pool, ctx).check(&frames).is_ok() {
            return Ok(FrameStatus::Preserved);
        }
    }

    let states = match Typer::new(body, pool, ctx).infer() {
        Ok(s) => s,
        Err(Fail::Imprecise(why)) => return downgrade(body, why),
        Err(Fail::Hard(why)) => return Err(CodeError::FrameRegenerationFailed(why)),
    };
    if states.iter().any(Option::is_none) {
        let live: Vec<Option<()>> = states.iter().map(|s| s.as_ref().map(|_| ())).collect();
        remove_dead_code(body, &live)?;
        return regenerate_after_cleanup(body, pool, ctx);
    }
    let initial = Typer::new(body, pool, ctx).initial().map_err(fail_to_error)?;
    let frames = build_frames(body, &states, &initial, pool)?;
    body.frames = Some(frames);
    Ok(FrameStatus::Regenerated)
}

fn regenerate_after_cleanup(
    body: &mut CodeBody,
    pool: &mut ConstantPool,
    ctx: &MethodContext<'_>,
) -> Result<FrameStatus, CodeError> {
    let typer = Typer::new(body, pool, ctx);
    let states = match typer.infer() {
        Ok(s) => s,
        Err(Fail::Imprecise(why)) => return downgrade(body, why),
        Err(Fail::Hard(why)) => return Err(CodeError::FrameRegenerationFailed(why)),
    };
    let initial = typer.initial().map_err(fail_to_error)?;
    let frames = build_frames(body, &states, &initial, pool)?;
    body.frames = Some(frames);
    Ok(FrameStatus::Regenerated)
}

fn downgrade(body: &mut CodeBody, why: String) -> Result<FrameStatus, CodeError> {
    log::debug!("dropping stack map frames: {why}");
    body.frames = None;
    Ok(FrameStatus::Downgraded)
}

fn fail_to_error(f: Fail) -> CodeError {
    match f {
        Fail::Imprecise(s) | Fail::Hard(s) => CodeError::FrameRegenerationFailed(s),
    }
}

/// Control-flow reachability; a handler is live when something it covers is.
fn reachable(body: &CodeBody) -> Result<Vec<Option<()>>, CodeError> {
    let n = body.instructions.len();
    let pos = body.positions();
    let at = |l: &Label| pos.get(l).copied().ok_or(CodeError::UnresolvedLabel(*l));
    let mut ranges = Vec::new();
    for h in &body.handlers {
        ranges.push((at(&h.start)?, at(&h.end)?, at(&h.handler)?));
    }
    let mut live = vec![None; n];
    let mut work = if n > 0 { vec![0] } else { vec![] };
    while let Some(p) = work.pop() {
        if p >= n || live[p].is_some() {
            continue;
        }
        live[p] = Some(());
        let insn = &body.instructions[p];
        for t in insn.targets() {
            work.push(at(&t)?);
        }
        if insn.falls_through() || insn.opcode == opcodes::JSR || insn.opcode == opcodes::JSR_W {
            work.push(p + 1);
        }
        work.extend(ranges.iter().filter(|(s, e, _)| (*s..*e).contains(&p)).map(|r| r.2));
    }
    Ok(live)
}

fn remove_dead_code<S>(body: &mut CodeBody, states: &[Option<S>]) -> Result<(), CodeError> {
    let live: HashSet<Label> =
        body.instructions.iter().zip(states).filter(|(_, s)| s.is_some()).map(|(i, _)| i.label).collect();
    body.handlers.retain(|h| live.contains(&h.handler));
    let mut edits = Vec::new();
    let mut run: Option<(Label, Label)> = None;
    for (insn, s) in body.instructions.iter().zip(states) {
        if s.is_none() {
            run = Some(match run {
                None => (insn.label, insn.label),
                Some((a, _)) => (a, insn.label),
            });
        } else if let Some((a, b)) = run.take() {
            edits.push(Edit::Delete { from: a, to: b });
        }
    }
    if let Some((a, b)) = run {
        edits.push(Edit::Delete { from: a, to: b });
    }
    *body = apply_edits(body, &edits).map_err(|e| CodeError::FrameRegenerationFailed(format!("dead code: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn items_round_trip() {
        let slots = vec![T::Int, T::Long, T::Top, T::Ref("a".into())];
        let items = to_items(&slots);
        assert_eq!(items, vec![T::Int, T::Long, T::Ref("a".into())]);
        assert_eq!(from_items(&items), slots);
    }
}
