//! Attributes. Code, LineNumberTable, LocalVariableTable, LocalVariableTypeTable,
//! StackMapTable and Exceptions are decoded; everything else is kept as raw bytes.
//!
//! A decoded attribute is only kept when re-encoding it reproduces the original bytes,
//! so oddly laid-out inputs fall back to `Raw` and still round-trip.

use super::pool::ConstantPool;
use super::reader::{Reader, Writer};
use super::{count16, ClassError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Context {
    Class,
    Field,
    Method,
    Code,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name_index: u16,
    pub info: AttrInfo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrInfo {
    Code(CodeAttribute),
    LineNumberTable(Vec<LineNumber>),
    LocalVariableTable(Vec<LocalVariable>),
    /// Same layout as the LVT; the descriptor slot holds a generic signature.
    LocalVariableTypeTable(Vec<LocalVariable>),
    StackMapTable(Vec<StackMapFrame>),
    Exceptions(Vec<u16>),
    Raw(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeAttribute {
    pub max_stack: u16,
    pub max_locals: u16,
    pub code: Vec<u8>,
    pub exception_table: Vec<ExceptionEntry>,
    pub attributes: Vec<Attribute>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExceptionEntry {
    pub start_pc: u16,
    pub end_pc: u16,
    pub handler_pc: u16,
    /// 0 catches everything.
    pub catch_type: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LineNumber {
    pub start_pc: u16,
    pub line: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalVariable {
    pub start_pc: u16,
    pub length: u16,
    pub name_index: u16,
    pub descriptor_index: u16,
    pub index: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerificationType {
    Top,
    Integer,
    Float,
    Double,
    Long,
    Null,
    UninitializedThis,
    /// Class constant index.
    Object(u16),
    /// Offset of the `new` instruction that created the value.
    Uninitialized(u16),
}

/// One StackMapTable entry, kept in the exact encoding kind it was read with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackMapFrame {
    Same { delta: u16 },
    SameExtended { delta: u16 },
    SameLocals1 { delta: u16, stack: VerificationType },
    SameLocals1Extended { delta: u16, stack: VerificationType },
    Chop { delta: u16, k: u8 },
    Append { delta: u16, locals: Vec<VerificationType> },
    Full { delta: u16, locals: Vec<VerificationType>, stack: Vec<VerificationType> },
}

impl StackMapFrame {
    pub fn delta(&self) -> u16 {
        match *self {
            StackMapFrame::Same { delta }
            | StackMapFrame::SameExtended { delta }
            | StackMapFrame::SameLocals1 { delta, .. }
            | StackMapFrame::SameLocals1Extended { delta, .. }
            | StackMapFrame::Chop { delta, .. }
            | StackMapFrame::Append { delta, .. }
            | StackMapFrame::Full { delta, .. } => delta,
        }
    }
}

impl CodeAttribute {
    fn find(&self, pool: &ConstantPool, name: &str) -> Option<&AttrInfo> {
        self.attributes
            .iter()
            .find(|a| pool.utf8(a.name_index).map(|n| n == name).unwrap_or(false))
            .map(|a| &a.info)
    }

    /// Line entries from every LineNumberTable, in attribute order.
    pub fn line_numbers(&self) -> Option<Vec<LineNumber>> {
        let mut out = None::<Vec<LineNumber>>;
        for a in &self.attributes {
            if let AttrInfo::LineNumberTable(t) = &a.info {
                out.get_or_insert_with(Vec::new).extend_from_slice(t);
            }
        }
        out
    }

    pub fn local_variables(&self) -> Option<Vec<LocalVariable>> {
        let mut out = None::<Vec<LocalVariable>>;
        for a in &self.attributes {
            if let AttrInfo::LocalVariableTable(t) = &a.info {
                out.get_or_insert_with(Vec::new).extend_from_slice(t);
            }
        }
        out
    }

    pub fn stack_map(&self) -> Option<&[StackMapFrame]> {
        self.attributes.iter().find_map(|a| match &a.info {
            AttrInfo::StackMapTable(f) => Some(f.as_slice()),
            _ => None,
        })
    }

    /// An attribute named `name` that was kept raw (for example a StackMapTable that did not re-encode).
    pub fn has_raw(&self, pool: &ConstantPool, name: &str) -> bool {
        matches!(self.find(pool, name), Some(AttrInfo::Raw(_)))
    }
}

pub(crate) fn parse_list(r: &mut Reader<'_>, pool: &ConstantPool, ctx: Context) -> Result<Vec<Attribute>, ClassError> {
    let n = r.u16()?;
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let at = r.offset();
        let name_index = r.u16()?;
        let name = pool
            .utf8(name_index)
            .map_err(|e| ClassError::Malformed { offset: at, reason: format!("attribute name: {e}") })?;
        let len = r.u32()? as usize;
        let body_at = r.offset();
        let body = r.take(len)?;
        let info = decode(&name, body, body_at, pool, ctx)?;
        out.push(Attribute { name_index, info });
    }
    Ok(out)
}

fn decode(name: &str, body: &[u8], base: usize, pool: &ConstantPool, ctx: Context) -> Result<AttrInfo, ClassError> {
    let mut r = Reader::with_base(body, base);
    let info = match (name, ctx) {
        ("Code", Context::Method) => AttrInfo::Code(parse_code(&mut r, pool)?),
        ("LineNumberTable", Context::Code) => AttrInfo::LineNumberTable(parse_lines(&mut r)?),
        ("LocalVariableTable", Context::Code) => AttrInfo::LocalVariableTable(parse_locals(&mut r)?),
        ("LocalVariableTypeTable", Context::Code) => AttrInfo::LocalVariableTypeTable(parse_locals(&mut r)?),
        ("StackMapTable", Context::Code) => AttrInfo::StackMapTable(parse_frames(&mut r)?),
        ("Exceptions", Context::Method) => {
            let n = r.u16()?;
            let mut v = Vec::with_capacity(n as usize);
            for _ in 0..n {
                v.push(r.u16()?);
            }
            AttrInfo::Exceptions(v)
        }
        _ => return Ok(AttrInfo::Raw(body.to_vec())),
    };
    if !r.is_empty() {
        return Ok(AttrInfo::Raw(body.to_vec()));
    }
    let mut w = Writer::default();
    write_info(&mut w, &info)?;
    if w.buf != body {
        return Ok(AttrInfo::Raw(body.to_vec()));
    }
    Ok(info)
}

fn parse_code(r: &mut Reader<'_>, pool: &ConstantPool) -> Result<CodeAttribute, ClassError> {
    let max_stack = r.u16()?;
    let max_locals = r.u16()?;
    let len = r.u32()? as usize;
    if len == 0 || len > u16::MAX as usize {
        return Err(r.malformed(format!("code length {len} outside 1..=65535")));
    }
    let code = r.take(len)?.to_vec();
    let n = r.u16()?;
    let mut exception_table = Vec::with_capacity(n as usize);
    for _ in 0..n {
        exception_table.push(ExceptionEntry {
            start_pc: r.u16()?,
            end_pc: r.u16()?,
            handler_pc: r.u16()?,
            catch_type: r.u16()?,
        });
    }
    let attributes = parse_list(r, pool, Context::Code)?;
    Ok(CodeAttribute { max_stack, max_locals, code, exception_table, attributes })
}

fn parse_lines(r: &mut Reader<'_>) -> Result<Vec<LineNumber>, ClassError> {
    let n = r.u16()?;
    let mut v = Vec::with_capacity(n as usize);
    for _ in 0..n {
        v.push(LineNumber { start_pc: r.u16()?, line: r.u16()? });
    }
    Ok(v)
}

fn parse_locals(r: &mut Reader<'_>) -> Result<Vec<LocalVariable>, ClassError> {
    let n = r.u16()?;
    let mut v = Vec::with_capacity(n as usize);
    for _ in 0..n {
        v.push(LocalVariable {
            start_pc: r.u16()?,
            length: r.u16()?,
            name_index: r.u16()?,
            descriptor_index: r.u16()?,
            index: r.u16()?,
        });
    }
    Ok(v)
}

fn parse_vtype(r: &mut Reader<'_>) -> Result<VerificationType, ClassError> {
    let at = r.offset();
    Ok(match r.u8()? {
        0 => VerificationType::Top,
        1 => VerificationType::Integer,
        2 => VerificationType::Float,
        3 => VerificationType::Double,
        4 => VerificationType::Long,
        5 => VerificationType::Null,
        6 => VerificationType::UninitializedThis,
        7 => VerificationType::Object(r.u16()?),
        8 => VerificationType::Uninitialized(r.u16()?),
        t => return Err(ClassError::Malformed { offset: at, reason: format!("unknown verification type {t}") }),
    })
}

fn parse_vtypes(r: &mut Reader<'_>, n: usize) -> Result<Vec<VerificationType>, ClassError> {
    (0..n).map(|_| parse_vtype(r)).collect()
}

fn parse_frames(r: &mut Reader<'_>) -> Result<Vec<StackMapFrame>, ClassError> {
    let n = r.u16()?;
    let mut v = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let at = r.offset();
        let t = r.u8()?;
        let f = match t {
            0..=63 => StackMapFrame::Same { delta: t as u16 },
            64..=127 => StackMapFrame::SameLocals1 { delta: (t - 64) as u16, stack: parse_vtype(r)? },
            247 => {
                let delta = r.u16()?;
                StackMapFrame::SameLocals1Extended { delta, stack: parse_vtype(r)? }
            }
            248..=250 => StackMapFrame::Chop { k: 251 - t, delta: r.u16()? },
            251 => StackMapFrame::SameExtended { delta: r.u16()? },
            252..=254 => {
                let delta = r.u16()?;
                StackMapFrame::Append { delta, locals: parse_vtypes(r, (t - 251) as usize)? }
            }
            255 => {
                let delta = r.u16()?;
                let nl = r.u16()? as usize;
                let locals = parse_vtypes(r, nl)?;
                let ns = r.u16()? as usize;
                let stack = parse_vtypes(r, ns)?;
                StackMapFrame::Full { delta, locals, stack }
            }
            _ => return Err(ClassError::Malformed { offset: at, reason: format!("reserved frame type {t}") }),
        };
        v.push(f);
    }
    Ok(v)
}

pub(crate) fn write_list(w: &mut Writer, attrs: &[Attribute]) -> Result<(), ClassError> {
    w.u16(count16(attrs.len(), "attributes")?);
    for a in attrs {
        w.u16(a.name_index);
        let mut body = Writer::default();
        write_info(&mut body, &a.info)?;
        let len = u32::try_from(body.buf.len())
            .map_err(|_| ClassError::Unencodable("attribute longer than 4 GiB".into()))?;
        w.u32(len);
        w.bytes(&body.buf);
    }
    Ok(())
}

fn write_info(w: &mut Writer, info: &AttrInfo) -> Result<(), ClassError> {
    match info {
        AttrInfo::Raw(b) => w.bytes(b),
        AttrInfo::Code(c) => {
            if c.code.is_empty() || c.code.len() > u16::MAX as usize {
                return Err(ClassError::Unencodable(format!("code length {} outside 1..=65535", c.code.len())));
            }
            w.u16(c.max_stack);
            w.u16(c.max_locals);
            w.u32(c.code.len() as u32);
            w.bytes(&c.code);
            w.u16(count16(c.exception_table.len(), "exception handlers")?);
            for e in &c.exception_table {
                w.u16(e.start_pc);
                w.u16(e.end_pc);
                w.u16(e.handler_pc);
                w.u16(e.catch_type);
            }
            write_list(w, &c.attributes)?;
        }
        AttrInfo::LineNumberTable(t) => {
            w.u16(count16(t.len(), "line entries")?);
            for l in t {
                w.u16(l.start_pc);
                w.u16(l.line);
            }
        }
        AttrInfo::LocalVariableTable(t) | AttrInfo::LocalVariableTypeTable(t) => {
            w.u16(count16(t.len(), "local variables")?);
            for l in t {
                w.u16(l.start_pc);
                w.u16(l.length);
                w.u16(l.name_index);
                w.u16(l.descriptor_index);
                w.u16(l.index);
            }
        }
        AttrInfo::StackMapTable(frames) => {
            w.u16(count16(frames.len(), "frames")?);
            for f in frames {
                write_frame(w, f)?;
            }
        }
        AttrInfo::Exceptions(v) => {
            w.u16(count16(v.len(), "exceptions")?);
            for &e in v {
                w.u16(e);
            }
        }
    }
    Ok(())
}

fn write_vtype(w: &mut Writer, t: &VerificationType) {
    match *t {
        VerificationType::Top => w.u8(0),
        VerificationType::Integer => w.u8(1),
        VerificationType::Float => w.u8(2),
        VerificationType::Double => w.u8(3),
        VerificationType::Long => w.u8(4),
        VerificationType::Null => w.u8(5),
        VerificationType::UninitializedThis => w.u8(6),
        VerificationType::Object(i) => {
            w.u8(7);
            w.u16(i)
        }
        VerificationType::Uninitialized(pc) => {
            w.u8(8);
            w.u16(pc)
        }
    }
}

fn write_frame(w: &mut Writer, f: &StackMapFrame) -> Result<(), ClassError> {
    let bad = |what: &str| ClassError::Unencodable(format!("stack map frame: {what}"));
    match f {
        StackMapFrame::Same { delta } => {
            if *delta > 63 {
                return Err(bad("same-frame delta above 63"));
            }
            w.u8(*delta as u8)
        }
        StackMapFrame::SameLocals1 { delta, stack } => {
            if *delta > 63 {
                return Err(bad("same-locals-1 delta above 63"));
            }
            w.u8(64 + *delta as u8);
            write_vtype(w, stack)
        }
        StackMapFrame::SameLocals1Extended { delta, stack } => {
            w.u8(247);
            w.u16(*delta);
            write_vtype(w, stack)
        }
        StackMapFrame::Chop { delta, k } => {
            if !(1..=3).contains(k) {
                return Err(bad("chop count outside 1..=3"));
            }
            w.u8(251 - k);
            w.u16(*delta)
        }
        StackMapFrame::SameExtended { delta } => {
            w.u8(251);
            w.u16(*delta)
        }
        StackMapFrame::Append { delta, locals } => {
            if !(1..=3).contains(&locals.len()) {
                return Err(bad("append count outside 1..=3"));
            }
            w.u8(251 + locals.len() as u8);
            w.u16(*delta);
            for t in locals {
                write_vtype(w, t);
            }
        }
        StackMapFrame::Full { delta, locals, stack } => {
            w.u8(255);
            w.u16(*delta);
            w.u16(count16(locals.len(), "frame locals")?);
            for t in locals {
                write_vtype(w, t);
            }
            w.u16(count16(stack.len(), "frame stack")?);
            for t in stack {
                write_vtype(w, t);
            }
        }
    }
    Ok(())
}
