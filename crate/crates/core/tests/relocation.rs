//! Inserting code keeps every branch pointed at the instruction it meant, through
//! encoding, decoding and long-branch expansion.
use bytefix_core::classfile::ConstantPool;
use bytefix_core::codemodel::opcodes::{self, *};
use bytefix_core::codemodel::{apply_edits, decode_code, encode_code, CodeBody, Edit, Instruction, Label, Operand};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Tail {
    Plain,
    Cond(usize),
    Goto(usize),
}

fn body(tails: &[Tail]) -> CodeBody {
    // unit k: sipush k; pop; tail   -- every unit starts at stack depth 0
    let mut insns = Vec::new();
    let mut n = 0u32;
    let mut lab = || {
        n += 1;
        Label(n * 10)
    };
    let firsts: Vec<Label> = (0..=tails.len()).map(|k| Label(1_000_000 + k as u32)).collect();
    for (k, t) in tails.iter().enumerate() {
        insns.push(Instruction::new(firsts[k], SIPUSH, Operand::Int(k as i32)));
        insns.push(Instruction::simple(lab(), POP));
        match t {
            Tail::Plain => {}
            Tail::Cond(j) => {
                insns.push(Instruction::simple(lab(), ICONST_0));
                insns.push(Instruction::new(lab(), IFEQ, Operand::Branch(firsts[*j])));
            }
            Tail::Goto(j) => insns.push(Instruction::new(lab(), GOTO, Operand::Branch(firsts[*j]))),
        }
    }
    insns.push(Instruction::new(firsts[tails.len()], SIPUSH, Operand::Int(tails.len() as i32)));
    insns.push(Instruction::simple(lab(), POP));
    insns.push(Instruction::simple(lab(), RETURN));
    CodeBody {
        instructions: insns,
        handlers: vec![],
        lines: vec![],
        locals: vec![],
        local_types: vec![],
        frames: None,
        max_stack: 1,
        max_locals: 0,
        layout: vec![],
        next_label: 2_000_000,
        modified: false,
    }
}

/// Unit marker reached from `pc`, skipping inserted nops.
fn marker(insns: &[Instruction], pc: u32) -> Option<i32> {
    let mut i = insns.iter().position(|x| x.label.0 == pc)?;
    while insns[i].opcode == NOP {
        i += 1;
    }
    match (insns[i].opcode, &insns[i].operand) {
        (SIPUSH, Operand::Int(k)) => Some(*k),
        _ => None,
    }
}

fn target(i: &Instruction) -> u32 {
    match i.operand {
        Operand::Branch(l) => l.0,
        _ => panic!("{} has no target", i.mnemonic()),
    }
}

fn tails(n: usize) -> impl Strategy<Value = Vec<Tail>> {
    prop::collection::vec(
        prop_oneof![Just(Tail::Plain).boxed(), (0..=n).prop_map(Tail::Cond).boxed(), (0..=n).prop_map(Tail::Goto).boxed()],
        n,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn branches_follow_their_targets(
        (ts, inserts) in (2usize..12).prop_flat_map(|n| (tails(n), prop::collection::btree_map(0..=n, prop_oneof![1usize..6, 20_000usize..40_000], 0..4)))
    ) {
        let b = body(&ts);
        let mut next = b.next_label;
        let edits: Vec<Edit> = inserts
            .iter()
            .map(|(&k, &len)| {
                let code = (0..len).map(|_| { next += 1; Instruction::simple(Label(next), NOP) }).collect();
                Edit::InsertBefore { at: Label(1_000_000 + k as u32), code }
            })
            .collect();
        let edited = apply_edits(&b, &edits).unwrap();
        let mut pool = ConstantPool::new();
        let attr = match encode_code(&edited, &mut pool) {
            Ok(a) => a,
            // a body over 64 KiB is refused, never mis-encoded
            Err(_) => { prop_assert!(inserts.values().sum::<usize>() > 30_000); return Ok(()); }
        };
        let out = decode_code(&attr, &pool).unwrap().instructions;
        let units: Vec<usize> = out.iter().enumerate().filter(|(_, i)| i.opcode == SIPUSH).map(|(p, _)| p).collect();
        prop_assert_eq!(units.len(), ts.len() + 1);
        for (k, t) in ts.iter().enumerate() {
            let p = units[k];
            let tail = &out[p + 2..];
            match t {
                Tail::Plain => {}
                Tail::Goto(j) => {
                    prop_assert!(matches!(tail[0].opcode, GOTO | GOTO_W));
                    prop_assert_eq!(marker(&out, target(&tail[0])), Some(*j as i32));
                }
                Tail::Cond(j) => {
                    prop_assert_eq!(tail[0].opcode, ICONST_0);
                    let br = &tail[1];
                    if br.opcode == IFEQ {
                        prop_assert_eq!(marker(&out, target(br)), Some(*j as i32));
                    } else {
                        // expanded: inverted test over a goto_w
                        prop_assert_eq!(Some(br.opcode), opcodes::invert_branch(IFEQ));
                        prop_assert_eq!(tail[2].opcode, GOTO_W);
                        prop_assert_eq!(target(br), tail[3].label.0);
                        prop_assert_eq!(marker(&out, target(&tail[2])), Some(*j as i32));
                    }
                }
            }
        }
    }
}

#[test]
fn far_conditional_is_expanded() {
    let b = body(&[Tail::Cond(2), Tail::Plain]);
    let code = (0..33_000).map(|k| Instruction::simple(Label(3_000_000 + k), NOP)).collect();
    let edited = apply_edits(&b, &[Edit::InsertBefore { at: Label(1_000_001), code }]).unwrap();
    let mut pool = ConstantPool::new();
    let out = decode_code(&encode_code(&edited, &mut pool).unwrap(), &pool).unwrap().instructions;
    let w = out.iter().position(|i| i.opcode == GOTO_W).expect("goto_w");
    assert_eq!(Some(out[w - 1].opcode), opcodes::invert_branch(IFEQ));
    assert_eq!(marker(&out, target(&out[w])), Some(2));
}
