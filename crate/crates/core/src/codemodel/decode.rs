use std::collections::HashSet;

use super::opcodes::{self, Format};
use super::{
    AttrSlot, CodeBody, CodeError, Frame, FrameKind, Handler, Instruction, Label, LineEntry, LocalVar, Operand,
    PoolRef, VType,
};
use crate::classfile::{AttrInfo, CodeAttribute, ConstantPool, StackMapFrame, VerificationType};

struct Cursor<'a> {
    code: &'a [u8],
    pos: usize,
    /// pc of the instruction being decoded, for error reporting.
    start: usize,
}

impl Cursor<'_> {
    fn err(&self, reason: impl Into<String>) -> CodeError {
        CodeError::Malformed { pc: self.start, reason: reason.into() }
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N], CodeError> {
        if self.pos + N > self.code.len() {
            return Err(self.err("truncated operand"));
        }
        let mut b = [0u8; N];
        b.copy_from_slice(&self.code[self.pos..self.pos + N]);
        self.pos += N;
        Ok(b)
    }

    fn u8(&mut self) -> Result<u8, CodeError> {
        Ok(self.take::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, CodeError> {
        Ok(u16::from_be_bytes(self.take()?))
    }

    fn i16(&mut self) -> Result<i16, CodeError> {
        Ok(i16::from_be_bytes(self.take()?))
    }

    fn i32(&mut self) -> Result<i32, CodeError> {
        Ok(i32::from_be_bytes(self.take()?))
    }

    fn target(&self, rel: i64) -> Result<u32, CodeError> {
        let t = self.start as i64 + rel;
        if t < 0 || t >= self.code.len() as i64 {
            return Err(self.err(format!("branch target {t} outside code")));
        }
        Ok(t as u32)
    }
}

/// Decodes the instruction stream and every pc-bearing table of a Code attribute.
pub fn decode_code(attr: &CodeAttribute, pool: &ConstantPool) -> Result<CodeBody, CodeError> {
    let instructions = decode_instructions(&attr.code)?;
    let starts: HashSet<u32> = instructions.iter().map(|i| i.label.0).collect();
    let len = attr.code.len() as u32;
    let at = |pc: u32, what: &str| -> Result<Label, CodeError> {
        if starts.contains(&pc) {
            Ok(Label(pc))
        } else {
            Err(CodeError::Malformed { pc: pc as usize, reason: format!("{what} not on an instruction boundary") })
        }
    };
    let end_at = |pc: u32, what: &str| -> Result<Label, CodeError> {
        if pc == len {
            Ok(Label::END)
        } else {
            at(pc, what)
        }
    };
    for insn in &instructions {
        for t in insn.targets() {
            at(t.0, "branch target")?;
        }
    }

    let mut handlers = Vec::with_capacity(attr.exception_table.len());
    for e in &attr.exception_table {
        handlers.push(Handler {
            start: at(e.start_pc as u32, "handler range start")?,
            end: end_at(e.end_pc as u32, "handler range end")?,
            handler: at(e.handler_pc as u32, "handler entry")?,
            catch_type: (e.catch_type != 0).then_some(PoolRef::Index(e.catch_type)),
        });
    }

    let mut lines = Vec::new();
    let mut locals = Vec::new();
    let mut local_types = Vec::new();
    let mut frames = None;
    let mut layout = Vec::new();
    let lvt = |t: &[crate::classfile::LocalVariable]| -> Result<Vec<LocalVar>, CodeError> {
        t.iter()
            .map(|v| {
                Ok(LocalVar {
                    start: end_at(v.start_pc as u32, "local variable start")?,
                    end: end_at(v.start_pc as u32 + v.length as u32, "local variable end")?,
                    name_index: v.name_index,
                    descriptor: PoolRef::Index(v.descriptor_index),
                    index: v.index,
                })
            })
            .collect()
    };
    for a in &attr.attributes {
        match &a.info {
            AttrInfo::LineNumberTable(t) => {
                for e in t {
                    lines.push(LineEntry { label: at(e.start_pc as u32, "line entry")?, line: e.line });
                }
                layout.push(AttrSlot::Lines { name_index: a.name_index, count: t.len() });
            }
            AttrInfo::LocalVariableTable(t) => {
                locals.extend(lvt(t)?);
                layout.push(AttrSlot::Locals { name_index: a.name_index, count: t.len() });
            }
            AttrInfo::LocalVariableTypeTable(t) => {
                local_types.extend(lvt(t)?);
                layout.push(AttrSlot::LocalTypes { name_index: a.name_index, count: t.len() });
            }
            AttrInfo::StackMapTable(f) => {
                if frames.is_some() {
                    return Err(CodeError::Malformed { pc: 0, reason: "two StackMapTable attributes".into() });
                }
                frames = Some(decode_frames(f, &at)?);
                layout.push(AttrSlot::StackMap { name_index: a.name_index });
            }
            AttrInfo::Raw(_) => {
                let name = pool.utf8(a.name_index).unwrap_or_default();
                if matches!(&*name, "LineNumberTable" | "LocalVariableTable" | "LocalVariableTypeTable" | "StackMapTable")
                {
                    return Err(CodeError::Malformed { pc: 0, reason: format!("{name} could not be decoded") });
                }
                layout.push(AttrSlot::Other(a.clone()));
            }
            _ => layout.push(AttrSlot::Other(a.clone())),
        }
    }

    Ok(CodeBody {
        instructions,
        handlers,
        lines,
        locals,
        local_types,
        frames,
        max_stack: attr.max_stack,
        max_locals: attr.max_locals,
        layout,
        next_label: len + 1,
        modified: false,
    })
}

fn vtype(t: VerificationType, at: &dyn Fn(u32, &str) -> Result<Label, CodeError>) -> Result<VType, CodeError> {
    Ok(match t {
        VerificationType::Top => VType::Top,
        VerificationType::Integer => VType::Integer,
        VerificationType::Float => VType::Float,
        VerificationType::Double => VType::Double,
        VerificationType::Long => VType::Long,
        VerificationType::Null => VType::Null,
        VerificationType::UninitializedThis => VType::UninitializedThis,
        VerificationType::Object(i) => VType::Object(i),
        VerificationType::Uninitialized(pc) => VType::Uninitialized(at(pc as u32, "uninitialized type")?),
    })
}

fn decode_frames(
    frames: &[StackMapFrame],
    at: &dyn Fn(u32, &str) -> Result<Label, CodeError>,
) -> Result<Vec<Frame>, CodeError> {
    let mut out = Vec::with_capacity(frames.len());
    let mut prev: Option<u32> = None;
    for f in frames {
        let pc = match prev {
            None => f.delta() as u32,
            Some(p) => p + f.delta() as u32 + 1,
        };
        prev = Some(pc);
        let vts = |v: &[VerificationType]| v.iter().map(|t| vtype(*t, at)).collect::<Result<Vec<_>, _>>();
        let kind = match f {
            StackMapFrame::Same { .. } => FrameKind::Same { extended: false },
            StackMapFrame::SameExtended { .. } => FrameKind::Same { extended: true },
            StackMapFrame::SameLocals1 { stack, .. } => {
                FrameKind::SameLocals1 { stack: vtype(*stack, at)?, extended: false }
            }
            StackMapFrame::SameLocals1Extended { stack, .. } => {
                FrameKind::SameLocals1 { stack: vtype(*stack, at)?, extended: true }
            }
            StackMapFrame::Chop { k, .. } => FrameKind::Chop(*k),
            StackMapFrame::Append { locals, .. } => FrameKind::Append(vts(locals)?),
            StackMapFrame::Full { locals, stack, .. } => FrameKind::Full { locals: vts(locals)?, stack: vts(stack)? },
        };
        out.push(Frame { label: at(pc, "stack map frame")?, kind });
    }
    Ok(out)
}

pub(crate) fn decode_instructions(code: &[u8]) -> Result<Vec<Instruction>, CodeError> {
    let mut out = Vec::new();
    let mut c = Cursor { code, pos: 0, start: 0 };
    while c.pos < code.len() {
        c.start = c.pos;
        let pc = c.pos as u32;
        let mut opcode = c.u8()?;
        let info = opcodes::info(opcode).ok_or_else(|| c.err(format!("unknown opcode 0x{opcode:02x}")))?;
        let mut wide = false;
        let operand = match info.format {
            Format::None => Operand::None,
            Format::Local => Operand::Local(c.u8()? as u16),
            Format::Iinc => Operand::Iinc { local: c.u8()? as u16, delta: c.u8()? as i8 as i16 },
            Format::Byte => Operand::Int(c.u8()? as i8 as i32),
            Format::Short => Operand::Int(c.i16()? as i32),
            Format::Pool8 => Operand::Pool(PoolRef::Index(c.u8()? as u16)),
            Format::Pool16 => Operand::Pool(PoolRef::Index(c.u16()?)),
            Format::Interface => {
                let pool = PoolRef::Index(c.u16()?);
                let count = c.u8()?;
                if c.u8()? != 0 {
                    return Err(c.err("invokeinterface fourth byte must be zero"));
                }
                Operand::Interface { pool, count }
            }
            Format::Dynamic => {
                let pool = PoolRef::Index(c.u16()?);
                if c.u16()? != 0 {
                    return Err(c.err("invokedynamic trailing bytes must be zero"));
                }
                Operand::Pool(pool)
            }
            Format::MultiArray => Operand::MultiArray { pool: PoolRef::Index(c.u16()?), dims: c.u8()? },
            Format::ArrayType => Operand::ArrayType(c.u8()?),
            Format::Branch16 => Operand::Branch(Label({ let rel = c.i16()? as i64; c.target(rel)? })),
            Format::Branch32 => Operand::Branch(Label({ let rel = c.i32()? as i64; c.target(rel)? })),
            Format::TableSwitch => {
                c.pos += (4 - (c.pos % 4)) % 4;
                if c.pos > code.len() {
                    return Err(c.err("truncated switch padding"));
                }
                let default = Label({ let rel = c.i32()? as i64; c.target(rel)? });
                let low = c.i32()?;
                let high = c.i32()?;
                if high < low {
                    return Err(c.err("tableswitch high below low"));
                }
                let n = high as i64 - low as i64 + 1;
                if n * 4 > (code.len() - c.pos) as i64 {
                    return Err(c.err("truncated tableswitch"));
                }
                let targets =
                    (0..n).map(|_| Ok(Label({ let rel = c.i32()? as i64; c.target(rel)? }))).collect::<Result<Vec<_>, CodeError>>()?;
                Operand::Table { default, low, targets }
            }
            Format::LookupSwitch => {
                c.pos += (4 - (c.pos % 4)) % 4;
                if c.pos > code.len() {
                    return Err(c.err("truncated switch padding"));
                }
                let default = Label({ let rel = c.i32()? as i64; c.target(rel)? });
                let n = c.i32()?;
                if n < 0 || n as i64 * 8 > (code.len() - c.pos) as i64 {
                    return Err(c.err("bad lookupswitch pair count"));
                }
                let mut pairs = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    let key = c.i32()?;
                    pairs.push((key, Label({ let rel = c.i32()? as i64; c.target(rel)? })));
                }
                Operand::Lookup { default, pairs }
            }
            Format::WidePrefix => {
                opcode = c.u8()?;
                wide = true;
                match opcode {
                    opcodes::IINC => Operand::Iinc { local: c.u16()?, delta: c.i16()? },
                    opcodes::ILOAD..=opcodes::ALOAD | opcodes::ISTORE..=opcodes::ASTORE | opcodes::RET => {
                        Operand::Local(c.u16()?)
                    }
                    _ => return Err(c.err(format!("wide applied to {}", opcodes::name(opcode)))),
                }
            }
        };
        out.push(Instruction { label: Label(pc), origin_pc: Some(pc), opcode, operand, wide });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iconst_istore() {
        let v = decode_instructions(&[0x04, 0x3C]).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].opcode, opcodes::ISTORE_0 + 1);
        assert_eq!(v[1].local_index(), Some(1));
    }

    #[test]
    fn truncated_goto() {
        let e = decode_instructions(&[0x00, 0xA7, 0x00]).unwrap_err();
        assert_eq!(e, CodeError::Malformed { pc: 1, reason: "truncated operand".into() });
    }

    #[test]
    fn unknown_opcode() {
        assert!(matches!(decode_instructions(&[0xFE]), Err(CodeError::Malformed { pc: 0, .. })));
    }
}
