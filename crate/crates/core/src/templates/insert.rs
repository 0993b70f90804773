//! T1 to T4: instantiation changes and inserted checks or statements.

use crate::classfile::descriptor::FieldType;
use crate::classfile::MemberRef;
use crate::codemodel::opcodes::{self, Kind};
use crate::codemodel::{Edit, Instruction, Label, PoolRef, Symbol};
use crate::donor::{infer_secure_class, type_compatible, DonorPool, LocalDonor, MethodDonor};
use crate::hierarchy::OBJECT;

use super::code::{kind_of, Gen};
use super::{new_match, Binding, Candidate, DonorSlot, MethodView, Site, TemplateId, TemplateMatch};

const COLLECTION: &str = "java/util/Collection";
const MAP: &str = "java/util/Map";

pub(super) fn matches(view: &MethodView<'_>, site: &Site, id: TemplateId) -> Vec<TemplateMatch> {
    match (id.category, id.variant) {
        (1, 1) => instantiations(view, site)
            .into_iter()
            .filter_map(|(new, init, class)| {
                let secure = infer_secure_class(view.hierarchy, &class)?;
                let mut m = new_match(view, site, id, vec![view.label_at(new), view.label_at(init)], vec![Binding::Class(class)]);
                m.donor_slots.push(DonorSlot::SecureClass(secure));
                Some(m)
            })
            .collect(),
        (1, 2) => instantiations(view, site)
            .into_iter()
            .filter(|&(new, init, _)| stored_only(view, new, init))
            .map(|(new, init, class)| {
                new_match(view, site, id, vec![view.label_at(new), view.label_at(init)], vec![Binding::Class(class)])
            })
            .collect(),
        (2, v) => statements(view, site)
            .into_iter()
            .flat_map(|(start, after)| {
                guarded_locals(view, start, after, v)
                    .into_iter()
                    .map(move |(k, t)| (start, after, k, t))
            })
            .map(|(start, after, k, t)| {
                new_match(
                    view,
                    site,
                    id,
                    vec![view.label_at(start)],
                    vec![Binding::Local(k), Binding::Type(t), Binding::Target(view.label_at(after))],
                )
            })
            .collect(),
        (3, 1) | (3, 2) => statements(view, site)
            .into_iter()
            .map(|(start, after)| {
                let mut m = new_match(view, site, id, vec![view.label_at(start)], vec![Binding::Target(view.label_at(after))]);
                if id.variant == 1 {
                    m.donor_slots.push(DonorSlot::Method);
                }
                m
            })
            .collect(),
        (3, 3) => statements(view, site)
            .into_iter()
            .filter(|&(_, after)| after < view.len())
            .map(|(start, after)| {
                new_match(
                    view,
                    site,
                    id,
                    vec![view.label_at(start)],
                    vec![Binding::Range(view.label_at(start), view.label_at(after - 1)), Binding::Target(view.label_at(after))],
                )
            })
            .collect(),
        (4, 0) => site
            .labels
            .iter()
            .filter_map(|&l| {
                let p = view.pos(l)?;
                let insn = view.insn(p);
                if insn.opcode != opcodes::CHECKCAST {
                    return None;
                }
                let class = insn.class_operand(view.pool())?;
                Some(new_match(view, site, id, vec![l], vec![Binding::Class(class)]))
            })
            .collect(),
        _ => Vec::new(),
    }
}

pub(super) fn generate(view: &MethodView<'_>, m: &TemplateMatch, donors: &DonorPool) -> Vec<Candidate> {
    let mut g = Gen::new(&view.body);
    match (m.template.category, m.template.variant) {
        (1, 1) => secure_instantiation(view, m, donors, &mut g),
        (1, 2) => vec![Candidate {
            edits: vec![Edit::Replace { from: m.labels[0], to: m.labels[1], code: vec![g.op(opcodes::ACONST_NULL)] }],
            description: format!("store null instead of a new {}", m.class().unwrap_or("?")),
        }],
        (2, v) => guard(view, m, v, &mut g).into_iter().collect(),
        (3, 1) => inserted_calls(view, m, donors),
        (3, 2) => {
            let code = match &view.descriptor.ret {
                None => vec![g.op(opcodes::RETURN)],
                Some(t) => vec![g.default_value(t), g.op(kind_of(t).return_op())],
            };
            vec![Candidate {
                edits: vec![Edit::InsertBefore { at: m.anchor(), code }],
                description: "return the default value early".into(),
            }]
        }
        (3, 3) => try_catch(view, m, &mut g).into_iter().collect(),
        (4, 0) => cast_guards(view, m, &mut g),
        _ => Vec::new(),
    }
}

/// `(new, matching <init>, class)` for every `new` on the site.
fn instantiations(view: &MethodView<'_>, site: &Site) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    for &l in &site.labels {
        let Some(p) = view.pos(l) else { continue };
        let insn = view.insn(p);
        if insn.opcode != opcodes::NEW {
            continue;
        }
        let Some(class) = insn.class_operand(view.pool()) else { continue };
        let Some(d) = view.depth(p) else { continue };
        for q in p + 1..view.len() {
            let i = view.insn(q);
            if i.opcode != opcodes::INVOKESPECIAL {
                continue;
            }
            let Some(mr) = i.member(view.pool()) else { continue };
            if mr.name != "<init>" || mr.owner != class {
                continue;
            }
            let Ok(md) = crate::classfile::descriptor::MethodDescriptor::parse(&mr.descriptor) else { break };
            let Some(dq) = view.depth(q) else { break };
            let base = dq.checked_sub(md.param_slots() + 1);
            if base == Some(d + 1) || base == Some(d) {
                out.push((p, q, class.clone()));
                break;
            }
        }
    }
    out
}

/// The instantiation sequence `new; dup; args; <init>` feeds only a local store.
fn stored_only(view: &MethodView<'_>, new: usize, init: usize) -> bool {
    if view.insn(new + 1).opcode != opcodes::DUP || init + 1 >= view.len() {
        return false;
    }
    if opcodes::store_kind(view.insn(init + 1).opcode).map(|(k, _)| k) != Some(Kind::Ref) {
        return false;
    }
    (new + 1..=init).all(|p| !view.is_jump_target(view.label_at(p)) && !view.is_handler_entry(view.label_at(p)))
        && view.body.handlers.iter().all(|h| {
            let s = view.pos(h.start).unwrap_or(0);
            let e = view.pos(h.end).unwrap_or(0);
            !((new + 1..=init).contains(&s) || (new + 1..=init).contains(&e))
        })
}

/// Statement spans `(start, after)` on the site: each contiguous segment that starts and
/// ends with an empty operand stack.
pub(super) fn statements(view: &MethodView<'_>, site: &Site) -> Vec<(usize, usize)> {
    view.segments(&site.labels)
        .into_iter()
        .filter(|&(s, e)| {
            let after = e + 1;
            view.depth(s) == Some(0) && (after == view.len() || view.depth(after) == Some(0)) && !view.is_handler_entry(view.label_at(s))
        })
        .map(|(s, e)| (s, e + 1))
        .collect()
}

/// Locals loaded inside the statement that the guard variant `v` can check.
fn guarded_locals(view: &MethodView<'_>, start: usize, after: usize, v: u8) -> Vec<(u16, FieldType)> {
    if after >= view.len() && v != 2 {
        return Vec::new();
    }
    let mut out: Vec<(u16, FieldType)> = Vec::new();
    for p in start..after {
        let insn = view.insn(p);
        let Some((k, _)) = opcodes::load_kind(insn.opcode) else { continue };
        let Some(idx) = insn.local_index() else { continue };
        if out.iter().any(|(i, _)| *i == idx) {
            continue;
        }
        if k == Kind::Ref && idx == 0 && !view.is_static {
            continue;
        }
        let t = view.local_type(idx, start).unwrap_or(match k {
            Kind::Int => FieldType::Int,
            Kind::Long => FieldType::Long,
            Kind::Float => FieldType::Float,
            Kind::Double => FieldType::Double,
            Kind::Ref => FieldType::object(OBJECT),
        });
        let ok = match v {
            1 => k == Kind::Ref,
            2 => k != Kind::Ref && t != FieldType::Boolean,
            3 => matches!(t, FieldType::Array(_)),
            4 => matches!(&t, FieldType::Object(n) if container_interface(view, n).is_some()),
            _ => false,
        };
        if ok {
            out.push((idx, t));
        }
    }
    out
}

fn container_interface(view: &MethodView<'_>, class: &str) -> Option<&'static str> {
    [COLLECTION, MAP].into_iter().find(|i| view.hierarchy.is_subtype(class, i) == Some(true))
}

fn guard(view: &MethodView<'_>, m: &TemplateMatch, v: u8, g: &mut Gen) -> Option<Candidate> {
    let k = m.local()?;
    let t = m.ty()?;
    let after = m.target()?;
    let start = m.anchor();
    let (code, what) = match v {
        1 => (vec![g.load(Kind::Ref, k), g.branch(opcodes::IFNULL, after)], "skip when null"),
        2 => {
            let kind = kind_of(t);
            let mut code = vec![g.load(kind, k)];
            match kind {
                Kind::Long => code.extend([g.op(opcodes::LCONST_0), g.op(opcodes::LCMP)]),
                Kind::Float => code.extend([g.op(opcodes::FCONST_0), g.op(opcodes::FCMPL)]),
                Kind::Double => code.extend([g.op(opcodes::DCONST_0), g.op(opcodes::DCMPL)]),
                _ => {}
            }
            code.push(g.branch(opcodes::IFGE, start));
            code.push(g.default_value(t));
            code.push(g.store(kind, k));
            (code, "clamp negative values to zero")
        }
        3 => (
            vec![
                g.load(Kind::Ref, k),
                g.branch(opcodes::IFNULL, after),
                g.load(Kind::Ref, k),
                g.op(opcodes::ARRAYLENGTH),
                g.branch(opcodes::IFLE, after),
            ],
            "skip when null or empty",
        ),
        4 => {
            let FieldType::Object(class) = t else { return None };
            let owner = container_interface(view, class)?;
            let is_empty = MemberRef { owner: owner.into(), name: "isEmpty".into(), descriptor: "()Z".into(), interface: true };
            (
                vec![
                    g.load(Kind::Ref, k),
                    g.branch(opcodes::IFNULL, after),
                    g.load(Kind::Ref, k),
                    g.invoke_ref(opcodes::INVOKEINTERFACE, is_empty),
                    g.branch(opcodes::IFNE, after),
                ],
                "skip when null or empty",
            )
        }
        _ => return None,
    };
    Some(Candidate { edits: vec![Edit::InsertBefore { at: start, code }], description: format!("guard local {k}: {what}") })
}

fn secure_instantiation(view: &MethodView<'_>, m: &TemplateMatch, donors: &DonorPool, g: &mut Gen) -> Vec<Candidate> {
    let Some(class) = m.class() else { return Vec::new() };
    let secure = donors
        .secure_pairs
        .iter()
        .find(|(c, _)| c == class)
        .map(|(_, s)| s.clone())
        .or_else(|| infer_secure_class(view.hierarchy, class));
    let Some(secure) = secure else { return Vec::new() };
    let Some(init) = view.body.get(m.labels[1]).and_then(|i| i.member(view.pool())) else { return Vec::new() };
    let new_insn = Instruction { label: m.labels[0], ..g.class_op(opcodes::NEW, &secure) };
    let init_ref = MemberRef { owner: secure.clone(), name: "<init>".into(), descriptor: init.descriptor, interface: false };
    let init_insn = Instruction { label: m.labels[1], ..g.invoke_ref(opcodes::INVOKESPECIAL, init_ref) };
    vec![Candidate {
        edits: vec![
            Edit::Replace { from: m.labels[0], to: m.labels[0], code: vec![new_insn] },
            Edit::Replace { from: m.labels[1], to: m.labels[1], code: vec![init_insn] },
        ],
        description: format!("instantiate {secure} instead of {class}"),
    }]
}

/// Each way of filling `params` from compatible locals, in donor order.
fn argument_choices<'p>(view: &MethodView<'_>, donors: &'p DonorPool, params: &[FieldType], limit: usize) -> Vec<Vec<&'p LocalDonor>> {
    let mut out: Vec<Vec<&LocalDonor>> = vec![Vec::new()];
    for p in params {
        let options: Vec<&LocalDonor> = donors.locals.iter().filter(|l| type_compatible(&l.descriptor, p, view.hierarchy)).collect();
        let mut next = Vec::new();
        for prefix in &out {
            for o in &options {
                if next.len() >= limit {
                    break;
                }
                let mut v = prefix.clone();
                v.push(*o);
                next.push(v);
            }
        }
        out = next;
        if out.is_empty() {
            break;
        }
    }
    out
}

fn inserted_calls(view: &MethodView<'_>, m: &TemplateMatch, donors: &DonorPool) -> Vec<Candidate> {
    let mut out = Vec::new();
    let h = view.hierarchy;
    for md in &donors.methods {
        if md.owner == view.key.class && md.name == view.key.name && md.raw_descriptor() == view.key.descriptor {
            continue;
        }
        let receiver: Vec<Option<&LocalDonor>> = if md.is_static {
            vec![None]
        } else {
            donors
                .locals
                .iter()
                .filter(|l| l.descriptor.class_operand().is_some_and(|c| h.is_subtype(&c, &md.owner) == Some(true)))
                .filter(|l| !md.is_private || l.index == 0 && !view.is_static)
                .map(Some)
                .collect()
        };
        for r in receiver {
            for args in argument_choices(view, donors, &md.descriptor.params, 64) {
                out.extend(call_candidates(view, md, r, &args, m.anchor()));
            }
        }
    }
    out
}

fn call_candidates(view: &MethodView<'_>, md: &MethodDonor, receiver: Option<&LocalDonor>, args: &[&LocalDonor], at: Label) -> Vec<Candidate> {
    let mut out = Vec::new();
    let call = |g: &mut Gen| {
        let mut code = Vec::new();
        if let Some(r) = receiver {
            code.push(g.load_local(r));
        }
        for a in args {
            code.push(g.load_local(a));
        }
        code.push(g.invoke(md));
        code
    };
    let names: Vec<String> = args.iter().map(|a| a.name.clone().unwrap_or_else(|| format!("local{}", a.index))).collect();
    let text = format!("{}.{}({})", md.owner, md.name, names.join(", "));
    // Reassigning the sole argument, as in `p = clean(p)`.
    if let ([a], Some(ret)) = (args, &md.descriptor.ret) {
        if type_compatible(ret, &a.descriptor, view.hierarchy) {
            let mut g = Gen::new(&view.body);
            let mut code = call(&mut g);
            code.push(g.store(kind_of(&a.descriptor), a.index));
            out.push(Candidate { edits: vec![Edit::InsertBefore { at, code }], description: format!("{} = {text}", names[0]) });
        }
    }
    let mut g = Gen::new(&view.body);
    let mut code = call(&mut g);
    if let Some(ret) = &md.descriptor.ret {
        code.push(g.pop(ret.slots()));
    }
    out.push(Candidate { edits: vec![Edit::InsertBefore { at, code }], description: format!("call {text}") });
    out
}

fn try_catch(view: &MethodView<'_>, m: &TemplateMatch, g: &mut Gen) -> Option<Candidate> {
    let (start, _) = m.range()?;
    let after = m.target()?;
    let slot = view.body.required_max_locals();
    let handler = g.store(Kind::Ref, slot);
    let handler_label = handler.label;
    let code = vec![handler, g.branch(opcodes::GOTO, after)];
    Some(Candidate {
        edits: vec![
            Edit::AddHandler {
                start,
                end: after,
                handler: handler_label,
                catch_type: Some(PoolRef::Sym(Symbol::Class("java/lang/Throwable".into()))),
            },
            Edit::Append { code },
        ],
        description: "catch and discard exceptions thrown by the statement".into(),
    })
}

fn cast_guards(view: &MethodView<'_>, m: &TemplateMatch, g: &mut Gen) -> Vec<Candidate> {
    let mut out = Vec::new();
    let Some(class) = m.class() else { return out };
    let cast = m.anchor();
    let Some(p) = view.pos(cast) else { return out };
    // Skip the cast and the statements that use its result.
    if view.depth(p) == Some(1) {
        if let Some(after) = skip_end(view, p) {
            let code = vec![
                g.op(opcodes::DUP),
                g.class_op(opcodes::INSTANCEOF, class),
                g.branch(opcodes::IFNE, cast),
                g.op(opcodes::POP),
                g.branch(opcodes::GOTO, view.label_at(after)),
            ];
            out.push(Candidate {
                edits: vec![Edit::InsertBefore { at: cast, code }],
                description: format!("skip the cast to {class} and its uses unless instanceof holds"),
            });
        }
    }
    let mut g = Gen::new(&view.body);
    let code = vec![
        g.op(opcodes::DUP),
        g.class_op(opcodes::INSTANCEOF, class),
        g.branch(opcodes::IFNE, cast),
        g.op(opcodes::POP),
        g.op(opcodes::ACONST_NULL),
    ];
    out.push(Candidate {
        edits: vec![Edit::InsertBefore { at: cast, code }],
        description: format!("cast null instead of a non-{class} value"),
    });
    out
}

/// Where a skipped cast resumes: past its statement and the following lines that read the cast local.
fn skip_end(view: &MethodView<'_>, cast: usize) -> Option<usize> {
    let mut end = view.statement_end(cast)?;
    let store = view.insn(end.checked_sub(1)?);
    if let (Some((Kind::Ref, _)), Some(local)) = (opcodes::store_kind(store.opcode), store.local_index()) {
        loop {
            if end >= view.len() {
                break;
            }
            let line = view.lines[end];
            let mut q = end;
            while q < view.len() && view.lines[q] == line {
                q += 1;
            }
            let uses = (end..q).any(|i| {
                let insn = view.insn(i);
                opcodes::load_kind(insn.opcode).is_some_and(|(k, _)| k == Kind::Ref) && insn.local_index() == Some(local)
            });
            let control = (end..q).any(|i| !view.insn(i).falls_through() || opcodes::is_conditional_branch(view.insn(i).opcode));
            if !uses || control || (q < view.len() && view.depth(q) != Some(0)) {
                break;
            }
            end = q;
        }
    }
    (end < view.len() && view.depth(end) == Some(0)).then_some(end)
}
