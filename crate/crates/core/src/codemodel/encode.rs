use std::collections::HashMap;

use super::opcodes::{self, Format};
use super::{
    intern_symbols, recompute_max_stack, AttrSlot, CodeBody, CodeError, Frame, FrameKind, Instruction, Label,
    LocalVar, Operand, PoolRef, VType,
};
use crate::classfile::{
    AttrInfo, Attribute, CodeAttribute, ConstantPool, ExceptionEntry, LineNumber, LocalVariable, StackMapFrame,
    VerificationType,
};

fn pad(pc: usize) -> usize {
    (4 - (pc + 1) % 4) % 4
}

fn needs_wide(insn: &Instruction) -> bool {
    insn.wide
        || match insn.operand {
            Operand::Local(i) => i > 255,
            Operand::Iinc { local, delta } => local > 255 || !(-128..=127).contains(&delta),
            _ => false,
        }
}

fn size(insn: &Instruction, pc: usize, long_branch: bool) -> usize {
    let info = opcodes::info(insn.opcode).expect("validated opcode");
    match info.format {
        Format::None => 1,
        Format::Local => {
            if needs_wide(insn) {
                4
            } else {
                2
            }
        }
        Format::Iinc => {
            if needs_wide(insn) {
                6
            } else {
                3
            }
        }
        Format::Byte | Format::Pool8 | Format::ArrayType => 2,
        Format::Short | Format::Pool16 => 3,
        Format::Interface | Format::Dynamic => 5,
        Format::MultiArray => 4,
        Format::Branch16 => {
            if long_branch {
                5
            } else {
                3
            }
        }
        Format::Branch32 => 5,
        Format::TableSwitch => match &insn.operand {
            Operand::Table { targets, .. } => 1 + pad(pc) + 12 + 4 * targets.len(),
            _ => 1,
        },
        Format::LookupSwitch => match &insn.operand {
            Operand::Lookup { pairs, .. } => 1 + pad(pc) + 8 + 8 * pairs.len(),
            _ => 1,
        },
        Format::WidePrefix => 1,
    }
}

struct Layout {
    pcs: Vec<usize>,
    long: Vec<bool>,
    /// Conditional branches whose displacement does not fit in 16 bits.
    far_conditionals: Vec<usize>,
    len: usize,
}

fn layout(body: &CodeBody) -> Result<Layout, CodeError> {
    let n = body.instructions.len();
    let pos = body.positions();
    let mut long = vec![false; n];
    loop {
        let mut pcs = Vec::with_capacity(n + 1);
        let mut pc = 0usize;
        for (i, insn) in body.instructions.iter().enumerate() {
            pcs.push(pc);
            pc += size(insn, pc, long[i]);
        }
        pcs.push(pc);
        let mut changed = false;
        let mut far = Vec::new();
        for (i, insn) in body.instructions.iter().enumerate() {
            if opcodes::info(insn.opcode).map(|x| x.format) != Some(Format::Branch16) || long[i] {
                continue;
            }
            let Operand::Branch(t) = insn.operand else { continue };
            let tp = *pos.get(&t).ok_or(CodeError::UnresolvedLabel(t))?;
            let disp = pcs[tp] as i64 - pcs[i] as i64;
            if disp < i16::MIN as i64 || disp > i16::MAX as i64 {
                if matches!(insn.opcode, opcodes::GOTO | opcodes::JSR) {
                    long[i] = true;
                    changed = true;
                } else {
                    far.push(i);
                }
            }
        }
        if !changed {
            return Ok(Layout { len: pc, pcs, long, far_conditionals: far });
        }
    }
}

/// Rewrites conditional branches that cannot reach their target into
/// `if<inverse> next; goto_w target; next:`. Returns whether anything changed.
pub fn expand_long_branches(body: &mut CodeBody) -> Result<bool, CodeError> {
    let mut changed = false;
    loop {
        let lay = layout(body)?;
        if lay.far_conditionals.is_empty() {
            return Ok(changed);
        }
        for &i in lay.far_conditionals.iter().rev() {
            let next = body
                .instructions
                .get(i + 1)
                .map(|x| x.label)
                .ok_or_else(|| CodeError::Unencodable("conditional branch at end of code".into()))?;
            let insn = &mut body.instructions[i];
            let Operand::Branch(target) = insn.operand else { unreachable!() };
            insn.opcode = opcodes::invert_branch(insn.opcode).expect("conditional");
            insn.operand = Operand::Branch(next);
            let l = body.fresh_label();
            body.instructions.insert(i + 1, Instruction::new(l, opcodes::GOTO_W, Operand::Branch(target)));
        }
        body.modified = true;
        changed = true;
    }
}

fn pool_index(r: &PoolRef) -> Result<u16, CodeError> {
    match r {
        PoolRef::Index(i) => Ok(*i),
        PoolRef::Sym(s) => Err(CodeError::Unencodable(format!("uninterned symbol {s:?}"))),
    }
}

/// Resolves labels into a Code attribute. An unmodified decoded body reproduces its source exactly.
pub fn encode_code(body: &CodeBody, pool: &mut ConstantPool) -> Result<CodeAttribute, CodeError> {
    let mut body = body.clone();
    intern_symbols(&mut body, pool)?;
    for insn in &mut body.instructions {
        if insn.opcode == opcodes::LDC {
            if let Operand::Pool(PoolRef::Index(i)) = insn.operand {
                if i > 255 {
                    insn.opcode = opcodes::LDC_W;
                }
            }
        }
    }
    let mut lay = layout(&body)?;
    if !lay.far_conditionals.is_empty() {
        if body.frames.is_some() {
            return Err(CodeError::Unencodable(
                "conditional branch out of range; expand long branches before refreshing frames".into(),
            ));
        }
        expand_long_branches(&mut body)?;
        lay = layout(&body)?;
    }
    if lay.len == 0 || lay.len > u16::MAX as usize {
        return Err(CodeError::Unencodable(format!("code length {} outside 1..=65535", lay.len)));
    }
    let mut pc_of: HashMap<Label, usize> = HashMap::with_capacity(body.instructions.len() + 1);
    for (insn, &pc) in body.instructions.iter().zip(&lay.pcs) {
        if pc_of.insert(insn.label, pc).is_some() {
            return Err(CodeError::Unencodable(format!("label {} defined twice", insn.label)));
        }
    }
    pc_of.insert(Label::END, lay.len);
    let pc = |l: Label| pc_of.get(&l).copied().ok_or(CodeError::UnresolvedLabel(l));

    let mut code = Vec::with_capacity(lay.len);
    for (i, insn) in body.instructions.iter().enumerate() {
        let here = lay.pcs[i];
        debug_assert_eq!(code.len(), here);
        let info = opcodes::info(insn.opcode).expect("validated opcode");
        let rel = |l: Label| -> Result<i64, CodeError> { Ok(pc(l)? as i64 - here as i64) };
        match (&insn.operand, info.format) {
            (Operand::None, Format::None) => code.push(insn.opcode),
            (Operand::Local(idx), Format::Local) => {
                if needs_wide(insn) {
                    code.extend([opcodes::WIDE, insn.opcode]);
                    code.extend(idx.to_be_bytes());
                } else {
                    code.extend([insn.opcode, *idx as u8]);
                }
            }
            (Operand::Iinc { local, delta }, Format::Iinc) => {
                if needs_wide(insn) {
                    code.extend([opcodes::WIDE, insn.opcode]);
                    code.extend(local.to_be_bytes());
                    code.extend(delta.to_be_bytes());
                } else {
                    code.extend([insn.opcode, *local as u8, *delta as i8 as u8]);
                }
            }
            (Operand::Int(v), Format::Byte) => {
                let b = i8::try_from(*v).map_err(|_| CodeError::Unencodable(format!("bipush {v} out of range")))?;
                code.extend([insn.opcode, b as u8]);
            }
            (Operand::Int(v), Format::Short) => {
                let s = i16::try_from(*v).map_err(|_| CodeError::Unencodable(format!("sipush {v} out of range")))?;
                code.push(insn.opcode);
                code.extend(s.to_be_bytes());
            }
            (Operand::Pool(r), Format::Pool8) => {
                let idx = pool_index(r)?;
                code.extend([insn.opcode, idx as u8]);
            }
            (Operand::Pool(r), Format::Pool16) => {
                code.push(insn.opcode);
                code.extend(pool_index(r)?.to_be_bytes());
            }
            (Operand::Pool(r), Format::Dynamic) => {
                code.push(insn.opcode);
                code.extend(pool_index(r)?.to_be_bytes());
                code.extend([0, 0]);
            }
            (Operand::Interface { pool: r, count }, Format::Interface) => {
                code.push(insn.opcode);
                code.extend(pool_index(r)?.to_be_bytes());
                code.extend([*count, 0]);
            }
            (Operand::MultiArray { pool: r, dims }, Format::MultiArray) => {
                code.push(insn.opcode);
                code.extend(pool_index(r)?.to_be_bytes());
                code.push(*dims);
            }
            (Operand::ArrayType(t), Format::ArrayType) => code.extend([insn.opcode, *t]),
            (Operand::Branch(t), Format::Branch16) => {
                let d = rel(*t)?;
                if lay.long[i] {
                    code.push(if insn.opcode == opcodes::GOTO { opcodes::GOTO_W } else { opcodes::JSR_W });
                    code.extend((d as i32).to_be_bytes());
                } else {
                    code.push(insn.opcode);
                    code.extend((d as i16).to_be_bytes());
                }
            }
            (Operand::Branch(t), Format::Branch32) => {
                code.push(insn.opcode);
                code.extend((rel(*t)? as i32).to_be_bytes());
            }
            (Operand::Table { default, low, targets }, Format::TableSwitch) => {
                code.push(insn.opcode);
                code.extend(std::iter::repeat(0).take(pad(here)));
                code.extend((rel(*default)? as i32).to_be_bytes());
                let high = *low as i64 + targets.len() as i64 - 1;
                let high = i32::try_from(high).map_err(|_| CodeError::Unencodable("tableswitch range".into()))?;
                code.extend(low.to_be_bytes());
                code.extend(high.to_be_bytes());
                for t in targets {
                    code.extend((rel(*t)? as i32).to_be_bytes());
                }
            }
            (Operand::Lookup { default, pairs }, Format::LookupSwitch) => {
                code.push(insn.opcode);
                code.extend(std::iter::repeat(0).take(pad(here)));
                code.extend((rel(*default)? as i32).to_be_bytes());
                code.extend((pairs.len() as i32).to_be_bytes());
                for (k, t) in pairs {
                    code.extend(k.to_be_bytes());
                    code.extend((rel(*t)? as i32).to_be_bytes());
                }
            }
            (op, f) => {
                return Err(CodeError::Unencodable(format!(
                    "{} at {} has operand {op:?}, expected {f:?}",
                    insn.mnemonic(),
                    insn.label
                )))
            }
        }
    }

    let u16pc = |l: Label| -> Result<u16, CodeError> { Ok(pc(l)? as u16) };
    let mut exception_table = Vec::with_capacity(body.handlers.len());
    for h in &body.handlers {
        exception_table.push(ExceptionEntry {
            start_pc: u16pc(h.start)?,
            end_pc: u16pc(h.end)?,
            handler_pc: u16pc(h.handler)?,
            catch_type: match &h.catch_type {
                None => 0,
                Some(r) => pool_index(r)?,
            },
        });
    }

    let lines = body
        .lines
        .iter()
        .map(|e| Ok(LineNumber { start_pc: u16pc(e.label)?, line: e.line }))
        .collect::<Result<Vec<_>, CodeError>>()?;
    let lvt = |v: &[LocalVar]| -> Result<Vec<LocalVariable>, CodeError> {
        v.iter()
            .map(|lv| {
                let s = pc(lv.start)?;
                let e = pc(lv.end)?;
                Ok(LocalVariable {
                    start_pc: s as u16,
                    length: e.saturating_sub(s) as u16,
                    name_index: lv.name_index,
                    descriptor_index: pool_index(&lv.descriptor)?,
                    index: lv.index,
                })
            })
            .collect()
    };
    let locals = lvt(&body.locals)?;
    let local_types = lvt(&body.local_types)?;

    let mut attributes = Vec::with_capacity(body.layout.len());
    let line_chunks = chunk(&lines, &slot_counts(&body.layout, |s| matches!(s, AttrSlot::Lines { .. })));
    let local_chunks = chunk(&locals, &slot_counts(&body.layout, |s| matches!(s, AttrSlot::Locals { .. })));
    let type_chunks = chunk(&local_types, &slot_counts(&body.layout, |s| matches!(s, AttrSlot::LocalTypes { .. })));
    let (mut li, mut vi, mut ti) = (0, 0, 0);
    for slot in &body.layout {
        match slot {
            AttrSlot::Lines { name_index, .. } => {
                let t = line_chunks[li].clone();
                li += 1;
                attributes.push(Attribute { name_index: *name_index, info: AttrInfo::LineNumberTable(t) });
            }
            AttrSlot::Locals { name_index, .. } => {
                let t = local_chunks[vi].clone();
                vi += 1;
                attributes.push(Attribute { name_index: *name_index, info: AttrInfo::LocalVariableTable(t) });
            }
            AttrSlot::LocalTypes { name_index, .. } => {
                let t = type_chunks[ti].clone();
                ti += 1;
                attributes.push(Attribute { name_index: *name_index, info: AttrInfo::LocalVariableTypeTable(t) });
            }
            AttrSlot::StackMap { name_index } => {
                if let Some(frames) = &body.frames {
                    let pos = body.positions();
                    let encoded = encode_frames(frames, &pc, &pos)?;
                    attributes.push(Attribute { name_index: *name_index, info: AttrInfo::StackMapTable(encoded) });
                }
            }
            AttrSlot::Other(a) => attributes.push(a.clone()),
        }
    }
    if let Some(frames) = &body.frames {
        if !body.layout.iter().any(|s| matches!(s, AttrSlot::StackMap { .. })) && !frames.is_empty() {
            let name_index = pool.intern_utf8("StackMapTable")?;
            let pos = body.positions();
            let encoded = encode_frames(frames, &pc, &pos)?;
            attributes.push(Attribute { name_index, info: AttrInfo::StackMapTable(encoded) });
        }
    }

    let (max_stack, max_locals) = if body.modified {
        let computed = recompute_max_stack(&body, pool)?;
        (computed.max(body.max_stack), body.max_locals.max(locals_needed(&body)?))
    } else {
        (body.max_stack, body.max_locals)
    };

    Ok(CodeAttribute { max_stack, max_locals, code, exception_table, attributes })
}

fn slot_counts(layout: &[AttrSlot], pick: impl Fn(&AttrSlot) -> bool) -> Vec<usize> {
    layout
        .iter()
        .filter(|s| pick(s))
        .map(|s| match s {
            AttrSlot::Lines { count, .. } | AttrSlot::Locals { count, .. } | AttrSlot::LocalTypes { count, .. } => *count,
            _ => 0,
        })
        .collect()
}

/// Splits `all` by the original per-attribute counts; if the total changed, the first chunk takes everything.
fn chunk<T: Clone>(all: &[T], counts: &[usize]) -> Vec<Vec<T>> {
    if counts.is_empty() {
        return Vec::new();
    }
    if counts.iter().sum::<usize>() == all.len() {
        let mut out = Vec::with_capacity(counts.len());
        let mut at = 0;
        for &c in counts {
            out.push(all[at..at + c].to_vec());
            at += c;
        }
        out
    } else {
        let mut out = vec![all.to_vec()];
        out.resize(counts.len(), Vec::new());
        out
    }
}

fn locals_needed(body: &CodeBody) -> Result<u16, CodeError> {
    let mut need = 0usize;
    for insn in &body.instructions {
        let Some(idx) = insn.local_index() else { continue };
        let width = opcodes::load_kind(insn.opcode)
            .or(opcodes::store_kind(insn.opcode))
            .map_or(1, |(k, _)| k.slots());
        need = need.max(idx as usize + width);
    }
    u16::try_from(need).map_err(|_| CodeError::Unencodable("max locals exceeds 65535".into()))
}

fn encode_vtype(t: &VType, pc: &dyn Fn(Label) -> Result<usize, CodeError>) -> Result<VerificationType, CodeError> {
    Ok(match *t {
        VType::Top => VerificationType::Top,
        VType::Integer => VerificationType::Integer,
        VType::Float => VerificationType::Float,
        VType::Double => VerificationType::Double,
        VType::Long => VerificationType::Long,
        VType::Null => VerificationType::Null,
        VType::UninitializedThis => VerificationType::UninitializedThis,
        VType::Object(i) => VerificationType::Object(i),
        VType::Uninitialized(l) => VerificationType::Uninitialized(pc(l)? as u16),
    })
}

fn encode_frames(
    frames: &[Frame],
    pc: &dyn Fn(Label) -> Result<usize, CodeError>,
    pos: &HashMap<Label, usize>,
) -> Result<Vec<StackMapFrame>, CodeError> {
    let mut order: Vec<&Frame> = frames.iter().collect();
    order.sort_by_key(|f| pos.get(&f.label).copied().unwrap_or(usize::MAX));
    let mut out = Vec::with_capacity(frames.len());
    let mut prev: Option<usize> = None;
    for f in order {
        let at = pc(f.label)?;
        let delta = match prev {
            None => at,
            Some(p) if at > p => at - p - 1,
            Some(_) => return Err(CodeError::Unencodable(format!("two stack map frames at pc {at}"))),
        };
        prev = Some(at);
        let delta =
            u16::try_from(delta).map_err(|_| CodeError::Unencodable("frame offset delta overflow".into()))?;
        let vts = |v: &[VType]| v.iter().map(|t| encode_vtype(t, pc)).collect::<Result<Vec<_>, _>>();
        out.push(match &f.kind {
            FrameKind::Same { extended } => {
                if *extended || delta > 63 {
                    StackMapFrame::SameExtended { delta }
                } else {
                    StackMapFrame::Same { delta }
                }
            }
            FrameKind::SameLocals1 { stack, extended } => {
                let stack = encode_vtype(stack, pc)?;
                if *extended || delta > 63 {
                    StackMapFrame::SameLocals1Extended { delta, stack }
                } else {
                    StackMapFrame::SameLocals1 { delta, stack }
                }
            }
            FrameKind::Chop(k) => StackMapFrame::Chop { delta, k: *k },
            FrameKind::Append(l) => StackMapFrame::Append { delta, locals: vts(l)? },
            FrameKind::Full { locals, stack } => StackMapFrame::Full { delta, locals: vts(locals)?, stack: vts(stack)? },
        });
    }
    Ok(out)
}
