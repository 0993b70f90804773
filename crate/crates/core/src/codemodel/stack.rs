use super::opcodes;
use super::{parse_field_descriptor, parse_method_descriptor, CodeBody, CodeError, Instruction, Operand, PoolRef, Symbol};
use crate::classfile::ConstantPool;

fn descriptor_of(insn: &Instruction, pool: &ConstantPool) -> Result<String, CodeError> {
    let r = insn.pool_ref().ok_or_else(|| CodeError::Descriptor(format!("{} without pool operand", insn.mnemonic())))?;
    Ok(match r {
        PoolRef::Index(i) if insn.opcode == opcodes::INVOKEDYNAMIC => pool.dynamic_descriptor(*i)?.into_owned(),
        PoolRef::Index(i) => pool.member_ref(*i)?.descriptor,
        PoolRef::Sym(Symbol::Field(m) | Symbol::Method(m)) => m.descriptor.clone(),
        PoolRef::Sym(s) => return Err(CodeError::Descriptor(format!("{s:?} is not a member"))),
    })
}

/// Operand-stack slots popped and pushed by one instruction.
pub fn stack_effect(insn: &Instruction, pool: &ConstantPool) -> Result<(usize, usize), CodeError> {
    let info = opcodes::info(insn.opcode)
        .ok_or_else(|| CodeError::Malformed { pc: 0, reason: format!("opcode 0x{:02x}", insn.opcode) })?;
    if info.pops != POLY && info.pushes != POLY {
        return Ok((info.pops as usize, info.pushes as usize));
    }
    use opcodes::*;
    Ok(match insn.opcode {
        GETSTATIC | PUTSTATIC | GETFIELD | PUTFIELD => {
            let size = parse_field_descriptor(&descriptor_of(insn, pool)?)?.slots();
            match insn.opcode {
                GETSTATIC => (0, size),
                PUTSTATIC => (size, 0),
                GETFIELD => (1, size),
                _ => (1 + size, 0),
            }
        }
        INVOKEVIRTUAL | INVOKESPECIAL | INVOKESTATIC | INVOKEINTERFACE | INVOKEDYNAMIC => {
            let m = parse_method_descriptor(&descriptor_of(insn, pool)?)?;
            let receiver = usize::from(!matches!(insn.opcode, INVOKESTATIC | INVOKEDYNAMIC));
            (receiver + m.param_slots(), m.ret_slots())
        }
        MULTIANEWARRAY => match insn.operand {
            Operand::MultiArray { dims, .. } => (dims as usize, 1),
            _ => return Err(CodeError::Descriptor("multianewarray without dimensions".into())),
        },
        _ => unreachable!("every polymorphic opcode is handled"),
    })
}

/// Per-instruction entry depth (`None` when unreachable) from a worklist fixpoint.
pub(crate) fn depths(body: &CodeBody, pool: &ConstantPool) -> Result<(Vec<Option<usize>>, usize), CodeError> {
    let n = body.instructions.len();
    let pos = body.positions();
    let mut depth: Vec<Option<usize>> = vec![None; n];
    let mut work = Vec::new();
    let mut max = 0usize;
    let enter = |p: usize, d: usize, depth: &mut Vec<Option<usize>>, work: &mut Vec<usize>| -> Result<(), CodeError> {
        if p >= n {
            return Ok(());
        }
        match depth[p] {
            None => {
                depth[p] = Some(d);
                work.push(p);
                Ok(())
            }
            Some(e) if e == d => Ok(()),
            Some(e) => Err(CodeError::InconsistentStack { label: body.instructions[p].label, a: e, b: d }),
        }
    };
    if n > 0 {
        enter(0, 0, &mut depth, &mut work)?;
    }
    for h in &body.handlers {
        let p = *pos.get(&h.handler).ok_or(CodeError::UnresolvedLabel(h.handler))?;
        enter(p, 1, &mut depth, &mut work)?;
        max = max.max(1);
    }
    while let Some(p) = work.pop() {
        let insn = &body.instructions[p];
        let d = depth[p].unwrap();
        let (pops, pushes) = stack_effect(insn, pool)?;
        if pops > d {
            return Err(CodeError::StackUnderflow(insn.label));
        }
        let after = d - pops + pushes;
        max = max.max(after).max(d);
        for t in insn.targets() {
            let tp = *pos.get(&t).ok_or(CodeError::UnresolvedLabel(t))?;
            enter(tp, after, &mut depth, &mut work)?;
        }
        if insn.opcode == opcodes::JSR || insn.opcode == opcodes::JSR_W {
            enter(p + 1, d, &mut depth, &mut work)?;
        } else if insn.falls_through() {
            if p + 1 >= n {
                return Err(CodeError::Malformed { pc: p, reason: "execution falls off the end of the code".into() });
            }
            enter(p + 1, after, &mut depth, &mut work)?;
        }
    }
    Ok((depth, max))
}

/// Maximum operand-stack depth reached on any path.
pub fn recompute_max_stack(body: &CodeBody, pool: &ConstantPool) -> Result<u16, CodeError> {
    let (_, max) = depths(body, pool)?;
    u16::try_from(max).map_err(|_| CodeError::Unencodable(format!("max stack {max} exceeds 65535")))
}

#[cfg(test)]
mod tests {
    use super::super::{Instruction, Label};
    use super::*;

    fn body(insns: Vec<Instruction>) -> CodeBody {
        CodeBody {
            next_label: 1000,
            instructions: insns,
            handlers: vec![],
            lines: vec![],
            locals: vec![],
            local_types: vec![],
            frames: None,
            max_stack: 0,
            max_locals: 4,
            layout: vec![],
            modified: false,
        }
    }

    #[test]
    fn single_push() {
        let b = body(vec![
            Instruction::simple(Label(0), opcodes::ICONST_1),
            Instruction::simple(Label(1), opcodes::ISTORE_0 + 1),
            Instruction::simple(Label(2), opcodes::RETURN),
        ]);
        assert_eq!(recompute_max_stack(&b, &ConstantPool::new()).unwrap(), 1);
    }

    #[test]
    fn mismatched_join() {
        // iload_1; ifeq L5; iconst_1; L5: return  -> L5 entered at depth 0 and 1
        let b = body(vec![
            Instruction::simple(Label(0), opcodes::ILOAD_0 + 1),
            Instruction::new(Label(1), opcodes::IFEQ, Operand::Branch(Label(5))),
            Instruction::simple(Label(4), opcodes::ICONST_1),
            Instruction::simple(Label(5), opcodes::RETURN),
        ]);
        assert!(matches!(
            recompute_max_stack(&b, &ConstantPool::new()),
            Err(CodeError::InconsistentStack { label: Label(5), .. })
        ));
    }
}
