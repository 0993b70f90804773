//! Label-based edit scripts over a [`CodeBody`].
//!
//! Labels named by edits always refer to the body the script was written against.
//! Code inserted before `L` takes over every incoming reference to `L` (branches,
//! handler bounds, line entry, frame), so the new code runs wherever `L` used to.
//! References inside inserted code are left alone and keep meaning the original labels.

use std::collections::{HashMap, HashSet};

use super::{CodeBody, Handler, Instruction, Label, LineEntry, PoolRef, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Edit {
    InsertBefore { at: Label, code: Vec<Instruction> },
    /// Replaces the inclusive range `from..=to`; the first new instruction keeps `from`'s label.
    Replace { from: Label, to: Label, code: Vec<Instruction> },
    /// Deletes the inclusive range `from..=to`.
    Delete { from: Label, to: Label },
    /// Adds code after the last instruction.
    Append { code: Vec<Instruction> },
    /// Registers a handler ahead of all existing ones.
    AddHandler { start: Label, end: Label, handler: Label, catch_type: Option<PoolRef> },
    /// Changes the declared type of a local slot in the LocalVariableTable.
    RetypeLocal { index: u16, descriptor: String },
}

impl Edit {
    /// Instructions inserted, deleted or replaced.
    pub fn instruction_delta(&self, body: &CodeBody) -> usize {
        match self {
            Edit::InsertBefore { code, .. } | Edit::Append { code } => code.len(),
            Edit::Replace { from, to, code } => range_len(body, *from, *to).max(code.len()),
            Edit::Delete { from, to } => range_len(body, *from, *to),
            Edit::AddHandler { .. } | Edit::RetypeLocal { .. } => 0,
        }
    }
}

fn range_len(body: &CodeBody, from: Label, to: Label) -> usize {
    match (body.position(from), body.position(to)) {
        (Some(a), Some(b)) if b >= a => b - a + 1,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EditError {
    #[error("edit names unknown label {0}")]
    UnknownLabel(Label),
    #[error("edits overlap at {0}")]
    Conflict(Label),
    #[error("cannot insert before or delete handler entry {0}")]
    HandlerEntry(Label),
    #[error("empty or inverted range {0}..{1}")]
    BadRange(Label, Label),
    #[error("inserted code redefines label {0}")]
    DuplicateLabel(Label),
}

/// Applies `edits` to a copy of `body`.
pub fn apply_edits(body: &CodeBody, edits: &[Edit]) -> Result<CodeBody, EditError> {
    let pos = body.positions();
    let n = body.instructions.len();
    let find = |l: Label| pos.get(&l).copied().ok_or(EditError::UnknownLabel(l));
    let handler_entries: HashSet<Label> = body.handlers.iter().map(|h| h.handler).collect();

    // What happens at each original position.
    let mut inserts: HashMap<usize, Vec<Instruction>> = HashMap::new();
    let mut replaced_at: HashMap<usize, Vec<Instruction>> = HashMap::new();
    let mut removed = vec![false; n];
    let mut claimed = vec![false; n + 1];
    let mut appended = Vec::new();
    let mut new_handlers = Vec::new();
    let mut retypes = Vec::new();
    let mut known: HashSet<Label> = pos.keys().copied().collect();
    let mut take_label = |l: Label| if known.insert(l) { Ok(()) } else { Err(EditError::DuplicateLabel(l)) };

    for e in edits {
        match e {
            Edit::InsertBefore { at, code } => {
                let p = find(*at)?;
                if handler_entries.contains(at) {
                    return Err(EditError::HandlerEntry(*at));
                }
                if claimed[p] {
                    return Err(EditError::Conflict(*at));
                }
                claimed[p] = true;
                for i in code {
                    take_label(i.label)?;
                }
                if p == n {
                    appended.extend(code.iter().cloned());
                } else {
                    inserts.insert(p, code.clone());
                }
            }
            Edit::Replace { from, to, .. } | Edit::Delete { from, to } => {
                let code: &[Instruction] = match e {
                    Edit::Replace { code, .. } => code,
                    _ => &[],
                };
                let a = find(*from)?;
                let b = find(*to)?;
                if b < a || b >= n {
                    return Err(EditError::BadRange(*from, *to));
                }
                for p in a..=b {
                    if claimed[p] {
                        return Err(EditError::Conflict(body.instructions[p].label));
                    }
                    let l = body.instructions[p].label;
                    if handler_entries.contains(&l) && !(p == a && !code.is_empty()) {
                        return Err(EditError::HandlerEntry(l));
                    }
                    claimed[p] = true;
                    removed[p] = true;
                }
                if let Some(first) = code.first() {
                    let old = first.label;
                    let mut code = code.to_vec();
                    code[0].label = *from;
                    for i in code.iter_mut().skip(1) {
                        take_label(i.label)?;
                    }
                    for i in code.iter_mut() {
                        i.map_targets(|t| if t == old { *from } else { t });
                    }
                    replaced_at.insert(a, code);
                }
            }
            Edit::Append { code } => {
                for i in code {
                    take_label(i.label)?;
                }
                appended.extend(code.iter().cloned());
            }
            Edit::AddHandler { start, end, handler, catch_type } => {
                new_handlers.push(Handler { start: *start, end: *end, handler: *handler, catch_type: catch_type.clone() });
            }
            Edit::RetypeLocal { index, descriptor } => retypes.push((*index, descriptor.clone())),
        }
    }

    // Where references to each original label end up.
    let mut redirect: HashMap<Label, Label> = HashMap::new();
    let mut next_survivor = Label::END;
    let mut deleted_to_survivor: HashMap<Label, Label> = HashMap::new();
    for p in (0..n).rev() {
        let l = body.instructions[p].label;
        let kept_here = !removed[p] || replaced_at.contains_key(&p);
        if kept_here {
            let entry = inserts.get(&p).and_then(|c| c.first()).map_or(l, |c| c.label);
            if entry != l {
                redirect.insert(l, entry);
            }
            next_survivor = entry;
        } else {
            redirect.insert(l, next_survivor);
            deleted_to_survivor.insert(l, next_survivor);
        }
    }
    if let Some(first) = appended.first() {
        // Ranges that ran to the end of the original code stop where appended code begins.
        let a0 = first.label;
        for v in redirect.values_mut().chain(deleted_to_survivor.values_mut()) {
            if *v == Label::END {
                *v = a0;
            }
        }
        redirect.insert(Label::END, a0);
        deleted_to_survivor.insert(Label::END, a0);
    }
    let r = |l: Label| redirect.get(&l).copied().unwrap_or(l);

    let mut out = body.clone();
    out.modified = true;
    let mut insns = Vec::with_capacity(n + 8);
    for (p, insn) in body.instructions.iter().enumerate() {
        if let Some(code) = inserts.get(&p) {
            insns.extend(code.iter().cloned());
        }
        if let Some(code) = replaced_at.get(&p) {
            insns.extend(code.iter().cloned());
        } else if !removed[p] {
            let mut i = insn.clone();
            i.map_targets(r);
            insns.push(i);
        }
    }
    insns.extend(appended);
    out.instructions = insns;

    let new_pos = out.positions();
    let mut handlers = new_handlers;
    for h in &body.handlers {
        let mut h = h.clone();
        h.start = r(h.start);
        h.end = r(h.end);
        handlers.push(h);
    }
    handlers.retain(|h| match (new_pos.get(&h.start), new_pos.get(&h.end)) {
        (Some(a), Some(b)) => a < b,
        _ => true,
    });
    out.handlers = handlers;

    let mut seen_line_at: HashSet<Label> = HashSet::new();
    let mut lines = Vec::with_capacity(body.lines.len());
    for e in &body.lines {
        let target = r(e.label);
        if deleted_to_survivor.contains_key(&e.label) {
            // Only keep a moved entry if the survivor has none of its own.
            let has_own = body.lines.iter().any(|o| o.label == target && !deleted_to_survivor.contains_key(&o.label));
            if target == Label::END || has_own || seen_line_at.contains(&target) {
                continue;
            }
        }
        seen_line_at.insert(target);
        lines.push(LineEntry { label: target, line: e.line });
    }
    out.lines = lines;

    if let Some(frames) = &mut out.frames {
        frames.retain(|f| !deleted_to_survivor.contains_key(&f.label));
        for f in frames.iter_mut() {
            f.label = r(f.label);
        }
    }

    let local_redirect = |l: Label| deleted_to_survivor.get(&l).copied().unwrap_or(l);
    for lv in out.locals.iter_mut().chain(out.local_types.iter_mut()) {
        lv.start = local_redirect(lv.start);
        lv.end = local_redirect(lv.end);
    }
    let nonempty = |s: Label, e: Label| match (new_pos.get(&s), new_pos.get(&e)) {
        (Some(a), Some(b)) => a < b,
        _ => false,
    };
    out.locals.retain(|lv| nonempty(lv.start, lv.end) || body.locals.iter().any(|o| o == lv));
    out.local_types.retain(|lv| nonempty(lv.start, lv.end) || body.local_types.iter().any(|o| o == lv));

    for (index, descriptor) in retypes {
        for lv in out.locals.iter_mut().filter(|lv| lv.index == index) {
            lv.descriptor = PoolRef::Sym(Symbol::Utf8(descriptor.clone()));
        }
        out.local_types.retain(|lv| lv.index != index);
    }

    let max_label = out.instructions.iter().map(|i| i.label.0).filter(|&l| l != u32::MAX).max().unwrap_or(0);
    out.next_label = out.next_label.max(max_label + 1);
    Ok(out)
}
