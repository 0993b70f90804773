//! Possibly-written locals against path enumeration on random control-flow graphs.
use std::collections::BTreeSet;

use bytefix_core::codemodel::opcodes::*;
use bytefix_core::codemodel::{CodeBody, Instruction, Label, Operand};
use bytefix_core::donor::possibly_written;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Store(u16),
    Inc(u16),
    Load(u16),
    Cond(usize),
    Goto(usize),
    Ret,
}

fn build(ops: &[Op]) -> CodeBody {
    // each op becomes one block starting at Label(100 * k); blocks keep the stack empty
    let mut insns = Vec::new();
    let start = |k: usize| Label(100 * k as u32);
    for (k, op) in ops.iter().enumerate() {
        let l = start(k);
        let next = Label(100 * k as u32 + 1);
        match op {
            Op::Store(s) => {
                insns.push(Instruction::simple(l, ICONST_0));
                insns.push(Instruction::new(next, ISTORE, Operand::Local(*s)));
            }
            Op::Inc(s) => insns.push(Instruction::new(l, IINC, Operand::Iinc { local: *s, delta: 1 })),
            Op::Load(s) => {
                insns.push(Instruction::new(l, ILOAD, Operand::Local(*s)));
                insns.push(Instruction::simple(next, POP));
            }
            Op::Cond(t) => {
                insns.push(Instruction::simple(l, ICONST_0));
                insns.push(Instruction::new(next, IFEQ, Operand::Branch(start(*t))));
            }
            Op::Goto(t) => insns.push(Instruction::new(l, GOTO, Operand::Branch(start(*t)))),
            Op::Ret => insns.push(Instruction::simple(l, RETURN)),
        }
    }
    insns.push(Instruction::simple(start(ops.len()), RETURN));
    CodeBody {
        next_label: 100 * ops.len() as u32 + 50,
        instructions: insns,
        handlers: vec![],
        lines: vec![],
        locals: vec![],
        local_types: vec![],
        frames: None,
        max_stack: 1,
        max_locals: 8,
        layout: vec![],
        modified: false,
    }
}

/// For every instruction: `None` if unreachable, else every slot written on some path reaching it.
fn brute(body: &CodeBody, params: u16) -> Vec<Option<BTreeSet<u16>>> {
    let n = body.instructions.len();
    let pos = body.positions();
    let succ = |p: usize| -> Vec<usize> {
        let i = &body.instructions[p];
        let mut v: Vec<usize> = i.targets().iter().filter_map(|t| pos.get(t).copied()).collect();
        if i.falls_through() && p + 1 < n {
            v.push(p + 1);
        }
        v
    };
    let reach_from = |s: usize| -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([s]);
        let mut work = vec![s];
        while let Some(p) = work.pop() {
            for q in succ(p) {
                if seen.insert(q) {
                    work.push(q);
                }
            }
        }
        seen
    };
    let from_entry = reach_from(0);
    let reach: Vec<BTreeSet<usize>> = (0..n).map(reach_from).collect();
    (0..n)
        .map(|p| {
            if !from_entry.contains(&p) {
                return None;
            }
            let mut w: BTreeSet<u16> = (0..params).collect();
            for q in 0..n {
                let i = &body.instructions[q];
                if !from_entry.contains(&q) || !matches!(i.opcode, ISTORE | IINC) {
                    continue;
                }
                if succ(q).iter().any(|&s| reach[s].contains(&p)) {
                    w.insert(i.local_index().unwrap());
                }
            }
            Some(w)
        })
        .collect()
}

fn ops(n: usize) -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        3 => (0u16..6).prop_map(Op::Store),
        1 => (0u16..6).prop_map(Op::Inc),
        1 => (0u16..6).prop_map(Op::Load),
        2 => (0..=n).prop_map(Op::Cond),
        1 => (0..=n).prop_map(Op::Goto),
        1 => Just(Op::Ret),
    ];
    prop::collection::vec(op, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_path_enumeration(ops in (1usize..14).prop_flat_map(ops), params in 0u16..3) {
        let body = build(&ops);
        prop_assert_eq!(possibly_written(&body, params as usize), brute(&body, params));
    }
}
