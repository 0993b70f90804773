//! Text dump of a class file's methods: decoded instructions and line tables.
use std::fmt::Write;

use bytefix_core::classfile::{parse_class, ClassFile};
use bytefix_core::codemodel::{decode_code, CodeBody, ConstValue, Instruction, Operand, PoolRef};

fn constant(v: &ConstValue) -> String {
    match v {
        ConstValue::Null => "null".into(),
        ConstValue::Int(i) => i.to_string(),
        ConstValue::Long(l) => format!("{l}L"),
        ConstValue::Float(f) => format!("{}f", f32::from_bits(*f)),
        ConstValue::Double(d) => format!("{}d", f64::from_bits(*d)),
        ConstValue::String(s) => format!("{s:?}"),
        ConstValue::Class(c) => format!("{c}.class"),
    }
}

fn operand(i: &Instruction, cf: &ClassFile) -> String {
    let pool = &cf.pool;
    if let Some(m) = i.member(pool) {
        return m.to_string();
    }
    if let Some(c) = i.class_operand(pool) {
        return match i.operand {
            Operand::MultiArray { dims, .. } => format!("{c} dims {dims}"),
            _ => c,
        };
    }
    match &i.operand {
        Operand::None => String::new(),
        Operand::Local(n) => n.to_string(),
        Operand::Iinc { local, delta } => format!("{local} {delta:+}"),
        Operand::Int(v) => v.to_string(),
        Operand::ArrayType(t) => match t {
            4 => "boolean",
            5 => "char",
            6 => "float",
            7 => "double",
            8 => "byte",
            9 => "short",
            10 => "int",
            11 => "long",
            _ => "?",
        }
        .into(),
        Operand::Branch(l) => l.0.to_string(),
        Operand::Table { default, low, targets } => {
            let mut s = String::new();
            for (k, t) in targets.iter().enumerate() {
                let _ = write!(s, "{}: {}, ", *low as i64 + k as i64, t.0);
            }
            format!("{{ {s}default: {} }}", default.0)
        }
        Operand::Lookup { default, pairs } => {
            let mut s = String::new();
            for (k, t) in pairs {
                let _ = write!(s, "{k}: {}, ", t.0);
            }
            format!("{{ {s}default: {} }}", default.0)
        }
        Operand::Pool(_) | Operand::Interface { .. } => match i.constant(pool) {
            Some(v) => constant(&v),
            None => match i.pool_ref() {
                Some(PoolRef::Index(n)) => format!("#{n}"),
                _ => "?".into(),
            },
        },
        Operand::MultiArray { dims, .. } => format!("? dims {dims}"),
    }
}

fn body(out: &mut String, b: &CodeBody, cf: &ClassFile) {
    let mut line_at = std::collections::HashMap::new();
    for l in &b.lines {
        line_at.entry(l.label).or_insert_with(Vec::new).push(l.line);
    }
    for i in &b.instructions {
        if let Some(lines) = line_at.get(&i.label) {
            for l in lines {
                let _ = writeln!(out, "    line {l}");
            }
        }
        let wide = if i.wide { "wide " } else { "" };
        let _ = writeln!(out, "    {:>5}: {wide}{} {}", i.label.0, i.mnemonic(), operand(i, cf).trim_end());
    }
    for h in &b.handlers {
        let what = match &h.catch_type {
            None => "any".to_string(),
            Some(r) => b.resolve_class(&cf.pool, r).unwrap_or_else(|| "?".into()),
        };
        let _ = writeln!(out, "    catch {what} [{}, {}) -> {}", h.start.0, h.end.0, h.handler.0);
    }
    let mut table: Vec<_> = b.lines.iter().map(|l| (l.label.0, l.line)).collect();
    table.sort();
    let rows: Vec<String> = table.iter().map(|(pc, l)| format!("{pc}:{l}")).collect();
    let _ = writeln!(out, "    lines {}", rows.join(" "));
}

/// Renders every method of the class. Undecodable bodies are reported inline.
pub fn render(bytes: &[u8]) -> Result<String, bytefix_core::classfile::ClassError> {
    let cf = parse_class(bytes)?;
    let mut out = String::new();
    let _ = write!(out, "class {} version {}.{}", cf.name(), cf.major_version, cf.minor_version);
    if let Some(s) = cf.super_name() {
        let _ = write!(out, " extends {s}");
    }
    if let Some(src) = cf.source_file() {
        let _ = write!(out, " source {src}");
    }
    out.push('\n');
    for m in &cf.methods {
        let _ = write!(out, "\n  method {}{}", m.name(&cf.pool), m.descriptor(&cf.pool));
        let Some(code) = m.code() else {
            out.push_str(" (no code)\n");
            continue;
        };
        let _ = writeln!(out, " max_stack {} max_locals {} length {}", code.max_stack, code.max_locals, code.code.len());
        match decode_code(code, &cf.pool) {
            Ok(b) => body(&mut out, &b, &cf),
            Err(e) => {
                let _ = writeln!(out, "    undecodable: {e}");
            }
        }
    }
    Ok(out)
}
