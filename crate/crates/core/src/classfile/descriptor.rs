//! Field and method descriptor grammar.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid descriptor {descriptor:?}: {reason}")]
pub struct DescriptorError {
    pub descriptor: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldType {
    Byte,
    Char,
    Double,
    Float,
    Int,
    Long,
    Short,
    Boolean,
    /// Internal class name, e.g. `java/lang/String`.
    Object(String),
    Array(Box<FieldType>),
}

impl FieldType {
    pub fn parse(s: &str) -> Result<FieldType, DescriptorError> {
        let (t, rest) = parse_field(s.as_bytes(), s)?;
        if !rest.is_empty() {
            return Err(err(s, "trailing characters"));
        }
        Ok(t)
    }

    pub fn object(name: &str) -> FieldType {
        FieldType::Object(name.to_string())
    }

    /// Parses either a descriptor or, for the operand of `checkcast`/`anewarray`, a bare class name.
    pub fn from_class_operand(name: &str) -> Result<FieldType, DescriptorError> {
        if name.starts_with('[') {
            FieldType::parse(name)
        } else if valid_class_name(name) {
            Ok(FieldType::Object(name.to_string()))
        } else {
            Err(err(name, "bad class name"))
        }
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }

    /// The name a `Class` constant uses for this type (arrays keep descriptor form).
    pub fn class_operand(&self) -> Option<String> {
        match self {
            FieldType::Object(n) => Some(n.clone()),
            FieldType::Array(_) => Some(self.descriptor()),
            _ => None,
        }
    }

    /// Local-variable or operand-stack slots occupied.
    pub fn slots(&self) -> usize {
        match self {
            FieldType::Long | FieldType::Double => 2,
            _ => 1,
        }
    }

    pub fn is_reference(&self) -> bool {
        matches!(self, FieldType::Object(_) | FieldType::Array(_))
    }

    /// Types the JVM represents as `int` on the stack.
    pub fn is_int_like(&self) -> bool {
        matches!(self, FieldType::Byte | FieldType::Char | FieldType::Int | FieldType::Short | FieldType::Boolean)
    }

    pub fn is_primitive(&self) -> bool {
        !self.is_reference()
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldType::Byte => f.write_str("B"),
            FieldType::Char => f.write_str("C"),
            FieldType::Double => f.write_str("D"),
            FieldType::Float => f.write_str("F"),
            FieldType::Int => f.write_str("I"),
            FieldType::Long => f.write_str("J"),
            FieldType::Short => f.write_str("S"),
            FieldType::Boolean => f.write_str("Z"),
            FieldType::Object(n) => write!(f, "L{n};"),
            FieldType::Array(t) => write!(f, "[{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodDescriptor {
    pub params: Vec<FieldType>,
    /// `None` for void.
    pub ret: Option<FieldType>,
}

impl MethodDescriptor {
    pub fn parse(s: &str) -> Result<MethodDescriptor, DescriptorError> {
        let b = s.as_bytes();
        if b.first() != Some(&b'(') {
            return Err(err(s, "missing '('"));
        }
        let mut rest = &b[1..];
        let mut params = Vec::new();
        loop {
            match rest.first() {
                Some(b')') => {
                    rest = &rest[1..];
                    break;
                }
                Some(_) => {
                    let (t, r) = parse_field(rest, s)?;
                    params.push(t);
                    rest = r;
                }
                None => return Err(err(s, "missing ')'")),
            }
        }
        let ret = if rest == b"V" {
            None
        } else {
            let (t, r) = parse_field(rest, s)?;
            if !r.is_empty() {
                return Err(err(s, "trailing characters"));
            }
            Some(t)
        };
        if params.iter().map(FieldType::slots).sum::<usize>() > 255 {
            return Err(err(s, "more than 255 parameter slots"));
        }
        Ok(MethodDescriptor { params, ret })
    }

    pub fn param_slots(&self) -> usize {
        self.params.iter().map(FieldType::slots).sum()
    }

    pub fn ret_slots(&self) -> usize {
        self.ret.as_ref().map_or(0, FieldType::slots)
    }
}

impl fmt::Display for MethodDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for p in &self.params {
            write!(f, "{p}")?;
        }
        f.write_str(")")?;
        match &self.ret {
            Some(t) => write!(f, "{t}"),
            None => f.write_str("V"),
        }
    }
}

fn err(s: &str, reason: &'static str) -> DescriptorError {
    DescriptorError { descriptor: s.to_string(), reason }
}

fn parse_field<'a>(b: &'a [u8], whole: &str) -> Result<(FieldType, &'a [u8]), DescriptorError> {
    let mut dims = 0usize;
    let mut i = 0;
    while b.get(i) == Some(&b'[') {
        dims += 1;
        i += 1;
    }
    if dims > 255 {
        return Err(err(whole, "more than 255 array dimensions"));
    }
    let (mut t, rest) = match b.get(i) {
        Some(b'B') => (FieldType::Byte, &b[i + 1..]),
        Some(b'C') => (FieldType::Char, &b[i + 1..]),
        Some(b'D') => (FieldType::Double, &b[i + 1..]),
        Some(b'F') => (FieldType::Float, &b[i + 1..]),
        Some(b'I') => (FieldType::Int, &b[i + 1..]),
        Some(b'J') => (FieldType::Long, &b[i + 1..]),
        Some(b'S') => (FieldType::Short, &b[i + 1..]),
        Some(b'Z') => (FieldType::Boolean, &b[i + 1..]),
        Some(b'L') => {
            let body = &b[i + 1..];
            let end = body.iter().position(|&c| c == b';').ok_or_else(|| err(whole, "unterminated class name"))?;
            let name = std::str::from_utf8(&body[..end]).map_err(|_| err(whole, "bad class name"))?;
            if !valid_class_name(name) {
                return Err(err(whole, "bad class name"));
            }
            (FieldType::Object(name.to_string()), &body[end + 1..])
        }
        Some(_) => return Err(err(whole, "unknown type character")),
        None => return Err(err(whole, "empty type")),
    };
    for _ in 0..dims {
        t = FieldType::Array(Box::new(t));
    }
    Ok((t, rest))
}

/// Internal binary name: non-empty `/`-separated segments with none of `. ; [`.
pub fn valid_class_name(name: &str) -> bool {
    !name.is_empty() && name.split('/').all(|seg| !seg.is_empty() && !seg.contains(['.', ';', '[']))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        for d in ["I", "[[J", "Ljava/lang/String;", "[Ljava/util/List;"] {
            assert_eq!(FieldType::parse(d).unwrap().descriptor(), d);
        }
        let m = MethodDescriptor::parse("(IJ[BLjava/lang/Object;)Ljava/lang/String;").unwrap();
        assert_eq!(m.params.len(), 4);
        assert_eq!(m.param_slots(), 5);
        assert_eq!(m.to_string(), "(IJ[BLjava/lang/Object;)Ljava/lang/String;");
        assert_eq!(MethodDescriptor::parse("()V").unwrap().ret, None);
    }

    #[test]
    fn rejects_garbage() {
        for d in ["", "L;", "Ljava/lang/String", "X", "II", "[", "La//b;"] {
            assert!(FieldType::parse(d).is_err(), "{d}");
        }
        for d in ["I", "(I", "()", "()VV", "(V)V"] {
            assert!(MethodDescriptor::parse(d).is_err(), "{d}");
        }
    }
}
