//! T11 to T14: statement removal, returns, switches and fields.

use crate::classfile::descriptor::{FieldType, MethodDescriptor};
use crate::classfile::MemberRef;
use crate::codemodel::opcodes::{self, Kind};
use crate::codemodel::{stack_effect, Edit, Instruction, Operand};
use crate::donor::{type_compatible, DonorPool, Literal};

use super::code::{expressions, Expr, Gen};
use super::insert::statements;
use super::{new_match, Binding, Candidate, MethodView, Site, TemplateId, TemplateMatch};

const MAX_SWAPS: usize = 50;

pub(super) fn matches(view: &MethodView<'_>, site: &Site, id: TemplateId) -> Vec<TemplateMatch> {
    let mut out = Vec::new();
    match id.category {
        11 => {
            for (s, after) in statements(view, site) {
                if removable(view, s, after) {
                    let range = Binding::Range(view.label_at(s), view.label_at(after - 1));
                    out.push(new_match(view, site, id, vec![view.label_at(s)], vec![range]));
                }
            }
            for &l in &site.labels {
                let Some(p) = view.pos(l) else { continue };
                let op = view.insn(p).opcode;
                let call_like = matches!(
                    op,
                    opcodes::INVOKEVIRTUAL | opcodes::INVOKESTATIC | opcodes::INVOKEINTERFACE | opcodes::PUTFIELD | opcodes::PUTSTATIC
                ) || (op == opcodes::INVOKESPECIAL && view.insn(p).member(view.pool()).is_some_and(|m| m.name != "<init>"));
                if view.depth(p).is_some() && (opcodes::is_conditional_branch(op) || call_like) {
                    out.push(new_match(view, site, id, vec![l], vec![Binding::Opcode(op)]));
                }
            }
        }
        12 => {
            for &l in &site.labels {
                let Some(p) = view.pos(l) else { continue };
                if matches!(opcodes::return_kind(view.insn(p).opcode), Some(Some(_))) && view.depth(p).is_some() {
                    out.push(new_match(view, site, id, vec![l], vec![]));
                }
            }
        }
        13 => {
            for &l in &site.labels {
                let Some(p) = view.pos(l) else { continue };
                if matches!(view.insn(p).operand, Operand::Table { .. } | Operand::Lookup { .. }) && view.depth(p).is_some() {
                    out.push(new_match(view, site, id, vec![l], vec![Binding::Opcode(view.insn(p).opcode)]));
                }
            }
        }
        14 => {
            for &l in &site.labels {
                let Some(p) = view.pos(l) else { continue };
                let insn = view.insn(p);
                let field_op = matches!(insn.opcode, opcodes::GETFIELD | opcodes::GETSTATIC | opcodes::PUTFIELD | opcodes::PUTSTATIC);
                if !field_op || view.depth(p).is_none() {
                    continue;
                }
                if id.variant == 2 && matches!(insn.opcode, opcodes::PUTFIELD | opcodes::PUTSTATIC) {
                    continue;
                }
                if let Some(m) = insn.member(view.pool()) {
                    out.push(new_match(view, site, id, vec![l], vec![Binding::Member(m)]));
                }
            }
        }
        _ => {}
    }
    out
}

/// A statement range that can go without leaving the method dangling.
fn removable(view: &MethodView<'_>, s: usize, after: usize) -> bool {
    if after >= view.len() {
        return false;
    }
    let last = view.insn(after - 1).opcode;
    if opcodes::return_kind(last).is_some() || last == opcodes::ATHROW {
        return false;
    }
    (s..after).all(|p| !view.is_handler_entry(view.label_at(p)))
}

pub(super) fn generate(view: &MethodView<'_>, m: &TemplateMatch, donors: &DonorPool) -> Vec<Candidate> {
    let Some(p) = view.pos(m.anchor()) else { return Vec::new() };
    let mut g = Gen::new(&view.body);
    match m.template.category {
        11 => removals(view, m, p, &mut g),
        12 => return_replacements(view, p, donors, &mut g),
        13 => switch_mutations(view, m.template.variant, p, &mut g),
        14 if m.template.variant == 1 => field_swaps(view, m, p, donors, &mut g),
        14 => field_replacements(view, m, p, donors, &mut g),
        _ => Vec::new(),
    }
}

fn removals(view: &MethodView<'_>, m: &TemplateMatch, p: usize, g: &mut Gen) -> Vec<Candidate> {
    if let Some((from, to)) = range_of(m) {
        let n = view.pos(to).map_or(0, |e| e + 1 - p);
        return vec![Candidate { edits: vec![Edit::Delete { from, to }], description: format!("remove {n} instruction(s)") }];
    }
    let insn = view.insn(p);
    if opcodes::is_conditional_branch(insn.opcode) {
        return whole_if(view, p).into_iter().collect();
    }
    // Drop the effect, keep the stack shape: pop every operand and push a default result.
    let Some(mr) = insn.member(view.pool()) else { return Vec::new() };
    let mut code = Vec::new();
    let mut ret = None;
    match insn.opcode {
        opcodes::PUTFIELD | opcodes::PUTSTATIC => {
            let Ok(t) = FieldType::parse(&mr.descriptor) else { return Vec::new() };
            code.push(g.pop(t.slots()));
            if insn.opcode == opcodes::PUTFIELD {
                code.push(g.op(opcodes::POP));
            }
        }
        _ => {
            let Ok(d) = MethodDescriptor::parse(&mr.descriptor) else { return Vec::new() };
            for t in d.params.iter().rev() {
                code.push(g.pop(t.slots()));
            }
            if insn.opcode != opcodes::INVOKESTATIC {
                code.push(g.op(opcodes::POP));
            }
            ret = d.ret;
        }
    }
    if let Some(t) = &ret {
        code.push(g.default_value(t));
    }
    if code.is_empty() {
        code.push(g.op(opcodes::NOP));
    }
    vec![Candidate {
        edits: vec![Edit::Replace { from: insn.label, to: insn.label, code }],
        description: format!("skip {}.{}", mr.owner, mr.name),
    }]
}

fn range_of(m: &TemplateMatch) -> Option<(crate::codemodel::Label, crate::codemodel::Label)> {
    m.bindings.iter().find_map(|b| match b {
        Binding::Range(a, b) => Some((*a, *b)),
        _ => None,
    })
}

/// Deletes an `if` (or `if`/`else`) whose condition ends at `p`.
fn whole_if(view: &MethodView<'_>, p: usize) -> Option<Candidate> {
    let insn = view.insn(p);
    let target = *insn.targets().first()?;
    let t = view.pos(target)?;
    if t <= p || view.depth(t) != Some(0) {
        return None;
    }
    let start = (0..=p).rev().find(|&q| view.depth(q) == Some(0))?;
    if (start + 1..=p).any(|q| view.is_jump_target(view.label_at(q))) {
        return None;
    }
    let mut end = t;
    let before = view.insn(t - 1);
    if matches!(before.opcode, opcodes::GOTO | opcodes::GOTO_W) {
        if let Some(e) = before.targets().first().and_then(|l| view.pos(*l)) {
            if e > t && view.depth(e) == Some(0) {
                end = e;
            }
        }
    }
    if end >= view.len() || (start..end).any(|q| view.is_handler_entry(view.label_at(q))) {
        return None;
    }
    let what = if end == t { "if" } else { "if-else" };
    Some(Candidate {
        edits: vec![Edit::Delete { from: view.label_at(start), to: view.label_at(end - 1) }],
        description: format!("remove the whole {what} block"),
    })
}

fn return_replacements(view: &MethodView<'_>, p: usize, donors: &DonorPool, g: &mut Gen) -> Vec<Candidate> {
    let Some(ret) = view.descriptor.ret.clone() else { return Vec::new() };
    let insn = view.insn(p);
    let producer = view.flow.operands[p].first().copied().flatten();
    let simple = producer.filter(|&q| {
        let pi = view.insn(q);
        view.flow.consumer[q].map(|c| c.0) == Some(p)
            && stack_effect(pi, view.pool()).is_ok_and(|(pops, _)| pops == 0)
            && !view.is_handler_entry(pi.label)
    });
    let mut exprs = expressions(view, donors, &ret, true, true);
    if ret == FieldType::Boolean {
        exprs.extend([Expr::Literal(Literal::Int(0)), Expr::Literal(Literal::Int(1))]);
    }
    let mut out = Vec::new();
    for e in &exprs {
        let Some(code) = e.code(view, g) else { continue };
        let edits = match simple {
            Some(q) => {
                let old = view.insn(q);
                if code.len() == 1 && code[0].opcode == old.opcode && code[0].operand == old.operand {
                    continue;
                }
                vec![Edit::Replace { from: old.label, to: old.label, code }]
            }
            None => {
                let mut full = vec![g.pop(ret.slots())];
                full.extend(code);
                vec![Edit::InsertBefore { at: insn.label, code: full }]
            }
        };
        out.push(Candidate { edits, description: format!("return {}", e.describe()) });
    }
    out
}

fn switch_mutations(view: &MethodView<'_>, variant: u8, p: usize, g: &mut Gen) -> Vec<Candidate> {
    let insn = view.insn(p);
    let (default, keys): (_, Vec<(i32, _)>) = match &insn.operand {
        Operand::Table { default, low, targets } => {
            (*default, targets.iter().enumerate().map(|(i, t)| (low.wrapping_add(i as i32), *t)).collect())
        }
        Operand::Lookup { default, pairs } => (*default, pairs.clone()),
        _ => return Vec::new(),
    };
    let with = |operand: Operand, g: &mut Gen| -> Vec<Edit> {
        let mut i = g.insn(insn.opcode, operand);
        i.label = insn.label;
        vec![Edit::Replace { from: insn.label, to: insn.label, code: vec![i] }]
    };
    let mut out = Vec::new();
    match variant {
        1 => {
            let mut seen = Vec::new();
            for &(_, t) in &keys {
                if t == default || seen.contains(&t) {
                    continue;
                }
                seen.push(t);
                let operand = match insn.operand.clone() {
                    Operand::Table { low, targets, .. } => Operand::Table { default: t, low, targets },
                    Operand::Lookup { pairs, .. } => Operand::Lookup { default: t, pairs },
                    o => o,
                };
                out.push(Candidate { edits: with(operand, g), description: format!("default branches to {t}") });
            }
        }
        2 => {
            'outer: for i in 0..keys.len() {
                for j in i + 1..keys.len() {
                    if out.len() >= MAX_SWAPS {
                        break 'outer;
                    }
                    if keys[i].1 == keys[j].1 {
                        continue;
                    }
                    let mut ts: Vec<_> = keys.iter().map(|k| k.1).collect();
                    ts.swap(i, j);
                    let operand = match insn.operand.clone() {
                        Operand::Table { default, low, .. } => Operand::Table { default, low, targets: ts },
                        Operand::Lookup { default, pairs } => {
                            Operand::Lookup { default, pairs: pairs.iter().zip(ts).map(|(k, t)| (k.0, t)).collect() }
                        }
                        o => o,
                    };
                    out.push(Candidate {
                        edits: with(operand, g),
                        description: format!("swap the targets of case {} and case {}", keys[i].0, keys[j].0),
                    });
                }
            }
        }
        3 => {
            if keys.is_empty() {
                return out;
            }
            match insn.operand.clone() {
                Operand::Table { default, low, targets } => {
                    if let Some(l) = low.checked_sub(1) {
                        let mut ts = vec![targets[0]];
                        ts.extend(targets.iter().copied());
                        out.push(Candidate {
                            edits: with(Operand::Table { default, low: l, targets: ts }, g),
                            description: format!("add case {l}"),
                        });
                    }
                    let high = low as i64 + targets.len() as i64;
                    if high <= i32::MAX as i64 {
                        let mut ts = targets.clone();
                        ts.push(*targets.last().unwrap());
                        out.push(Candidate {
                            edits: with(Operand::Table { default, low, targets: ts }, g),
                            description: format!("add case {high}"),
                        });
                    }
                    for i in 1..targets.len() {
                        if targets[i] == default && targets[i - 1] != default {
                            let mut ts = targets.clone();
                            ts[i] = targets[i - 1];
                            out.push(Candidate {
                                edits: with(Operand::Table { default, low, targets: ts }, g),
                                description: format!("add case {}", low.wrapping_add(i as i32)),
                            });
                        }
                    }
                }
                Operand::Lookup { default, pairs } => {
                    let mut added: Vec<(i32, crate::codemodel::Label)> = Vec::new();
                    let first = pairs[0];
                    let last = *pairs.last().unwrap();
                    if let Some(k) = first.0.checked_sub(1) {
                        added.push((k, first.1));
                    }
                    if let Some(k) = last.0.checked_add(1) {
                        added.push((k, last.1));
                    }
                    for w in pairs.windows(2) {
                        if w[1].0 as i64 - w[0].0 as i64 > 1 {
                            added.push((w[0].0 + 1, w[0].1));
                        }
                    }
                    for (k, t) in added {
                        let mut ps = pairs.clone();
                        ps.push((k, t));
                        ps.sort_by_key(|x| x.0);
                        ps.dedup_by_key(|x| x.0);
                        if ps.len() == pairs.len() {
                            continue;
                        }
                        out.push(Candidate { edits: with(Operand::Lookup { default, pairs: ps }, g), description: format!("add case {k}") });
                    }
                }
                _ => {}
            }
        }
        _ => {}
    }
    out
}

fn is_get(op: u8) -> bool {
    matches!(op, opcodes::GETFIELD | opcodes::GETSTATIC)
}

fn this_reaches(view: &MethodView<'_>, owner: &str) -> bool {
    !view.is_static && view.hierarchy.is_subtype(&view.key.class, owner) == Some(true)
}

fn field_swaps(view: &MethodView<'_>, m: &TemplateMatch, p: usize, donors: &DonorPool, g: &mut Gen) -> Vec<Candidate> {
    let insn = view.insn(p);
    let Some(orig) = m.member().cloned() else { return Vec::new() };
    let Ok(ot) = FieldType::parse(&orig.descriptor) else { return Vec::new() };
    let h = view.hierarchy;
    let get = is_get(insn.opcode);
    let orig_static = matches!(insn.opcode, opcodes::GETSTATIC | opcodes::PUTSTATIC);
    let mut out = Vec::new();
    for f in &donors.fields {
        if f.owner == orig.owner && f.name == orig.name {
            continue;
        }
        let type_ok = if get { type_compatible(&f.descriptor, &ot, h) } else { type_compatible(&ot, &f.descriptor, h) };
        if !type_ok {
            continue;
        }
        let code: Vec<Instruction> = match (orig_static, f.is_static, get) {
            (true, true, true) => vec![g.field(opcodes::GETSTATIC, f)],
            (true, true, false) => vec![g.field(opcodes::PUTSTATIC, f)],
            (false, false, _) if h.is_subtype(&orig.owner, &f.owner) == Some(true) => {
                vec![g.field(insn.opcode, f)]
            }
            (false, true, true) => vec![g.op(opcodes::POP), g.field(opcodes::GETSTATIC, f)],
            (false, true, false) => vec![g.field(opcodes::PUTSTATIC, f), g.op(opcodes::POP)],
            (true, false, true) if this_reaches(view, &f.owner) => vec![g.load(Kind::Ref, 0), g.field(opcodes::GETFIELD, f)],
            (true, false, false) if this_reaches(view, &f.owner) && ot.slots() == 1 => {
                vec![g.load(Kind::Ref, 0), g.op(opcodes::SWAP), g.field(opcodes::PUTFIELD, f)]
            }
            _ => continue,
        };
        let verb = if get { "read" } else { "write" };
        out.push(Candidate {
            edits: vec![Edit::Replace { from: insn.label, to: insn.label, code }],
            description: format!("{verb} {}.{} instead of {}.{}", f.owner, f.name, orig.owner, orig.name),
        });
    }
    out
}

fn field_replacements(view: &MethodView<'_>, m: &TemplateMatch, p: usize, donors: &DonorPool, g: &mut Gen) -> Vec<Candidate> {
    let insn = view.insn(p);
    let Some(orig) = m.member().cloned() else { return Vec::new() };
    let Ok(ot) = FieldType::parse(&orig.descriptor) else { return Vec::new() };
    let h = view.hierarchy;
    let instance = insn.opcode == opcodes::GETFIELD;
    let mut out = Vec::new();
    let replace = |code: Vec<Instruction>| vec![Edit::Replace { from: insn.label, to: insn.label, code }];
    // Getters on the same receiver.
    for d in &donors.methods {
        if !d.descriptor.params.is_empty() || !d.descriptor.ret.as_ref().is_some_and(|r| type_compatible(r, &ot, h)) {
            continue;
        }
        if instance {
            if d.is_static || d.is_private || h.is_subtype(&orig.owner, &d.owner) != Some(true) {
                continue;
            }
            let r = MemberRef { owner: d.owner.clone(), name: d.name.clone(), descriptor: d.raw_descriptor(), interface: d.is_interface };
            let op = if d.is_interface { opcodes::INVOKEINTERFACE } else { opcodes::INVOKEVIRTUAL };
            out.push(Candidate { edits: replace(vec![g.invoke_ref(op, r)]), description: format!("call {}.{}() instead of reading {}", d.owner, d.name, orig.name) });
        } else if d.is_static {
            out.push(Candidate { edits: replace(vec![g.invoke(d)]), description: format!("call {}.{}() instead of reading {}", d.owner, d.name, orig.name) });
        }
    }
    let simple: Vec<Expr> = expressions(view, donors, &ot, true, true)
        .into_iter()
        .filter(|e| matches!(e, Expr::Local(_) | Expr::Literal(_)))
        .collect();
    for e in simple {
        let Some(code) = e.code(view, g) else { continue };
        let mut full = Vec::new();
        if instance {
            full.push(g.op(opcodes::POP));
        }
        full.extend(code);
        out.push(Candidate { edits: replace(full), description: format!("use {} instead of {}", e.describe(), orig.name) });
    }
    out
}
