//! Stack effects against a table transcribed from the JVM instruction set, and
//! max-stack recomputation against a direct simulation.
use bytefix_core::classfile::ConstantPool;
use bytefix_core::codemodel::{recompute_max_stack, stack_effect, CodeBody, Instruction, Label};
use proptest::prelude::*;

// (opcode, popped slots, pushed slots)
const TABLE: &[(u8, usize, usize)] = &[
    (0x00, 0, 0), // nop
    (0x01, 0, 1), // aconst_null
    (0x03, 0, 1), // iconst_0
    (0x09, 0, 2), // lconst_0
    (0x0b, 0, 1), // fconst_0
    (0x0e, 0, 2), // dconst_0
    (0x2e, 2, 1), // iaload
    (0x2f, 2, 2), // laload
    (0x4f, 3, 0), // iastore
    (0x50, 4, 0), // lastore
    (0x57, 1, 0), // pop
    (0x58, 2, 0), // pop2
    (0x59, 1, 2), // dup
    (0x5a, 2, 3), // dup_x1
    (0x5b, 3, 4), // dup_x2
    (0x5c, 2, 4), // dup2
    (0x5d, 3, 5), // dup2_x1
    (0x5e, 4, 6), // dup2_x2
    (0x5f, 2, 2), // swap
    (0x60, 2, 1), // iadd
    (0x61, 4, 2), // ladd
    (0x62, 2, 1), // fadd
    (0x63, 4, 2), // dadd
    (0x74, 1, 1), // ineg
    (0x75, 2, 2), // lneg
    (0x78, 2, 1), // ishl
    (0x79, 3, 2), // lshl
    (0x85, 1, 2), // i2l
    (0x87, 1, 2), // i2d
    (0x88, 2, 1), // l2i
    (0x8a, 2, 2), // l2d
    (0x8e, 2, 1), // d2i
    (0x94, 4, 1), // lcmp
    (0x97, 4, 1), // dcmpl
    (0xbe, 1, 1), // arraylength
    (0xbf, 1, 0), // athrow
];

const RETURN: u8 = 0xb1;

fn body(insns: Vec<Instruction>) -> CodeBody {
    CodeBody {
        next_label: insns.len() as u32 + 1,
        instructions: insns,
        handlers: vec![],
        lines: vec![],
        locals: vec![],
        local_types: vec![],
        frames: None,
        max_stack: 0,
        max_locals: 0,
        layout: vec![],
        modified: false,
    }
}

#[test]
fn table_matches() {
    let pool = ConstantPool::new();
    for &(op, pops, pushes) in TABLE {
        let i = Instruction::simple(Label(0), op);
        assert_eq!(stack_effect(&i, &pool).unwrap(), (pops, pushes), "{}", i.mnemonic());
    }
}

proptest! {
    #[test]
    fn max_stack_matches_simulation(picks in prop::collection::vec(any::<prop::sample::Index>(), 1..60)) {
        let mut depth = 0usize;
        let mut max = 0usize;
        let mut insns = Vec::new();
        let push = |op: u8, depth: &mut usize, max: &mut usize, insns: &mut Vec<Instruction>| {
            let (pops, pushes) = TABLE.iter().find(|t| t.0 == op).map(|t| (t.1, t.2)).unwrap();
            *depth = *depth - pops + pushes;
            *max = (*max).max(*depth);
            insns.push(Instruction::simple(Label(insns.len() as u32), op));
        };
        for pick in picks {
            // athrow ends the block; keep to straight-line code
            let ok: Vec<u8> = TABLE.iter().filter(|t| t.1 <= depth && t.0 != 0xbf).map(|t| t.0).collect();
            push(ok[pick.index(ok.len())], &mut depth, &mut max, &mut insns);
        }
        while depth > 0 {
            push(0x57, &mut depth, &mut max, &mut insns);
        }
        insns.push(Instruction::simple(Label(insns.len() as u32), RETURN));
        prop_assert_eq!(recompute_max_stack(&body(insns), &ConstantPool::new()).unwrap() as usize, max);
    }
}
