//! The constant pool: a 1-based table of tagged entries, append-only once parsed.

use std::borrow::Cow;
use std::fmt;

use super::reader::{Reader, Writer};
use super::ClassError;

pub const TAG_UTF8: u8 = 1;
pub const TAG_INTEGER: u8 = 3;
pub const TAG_FLOAT: u8 = 4;
pub const TAG_LONG: u8 = 5;
pub const TAG_DOUBLE: u8 = 6;
pub const TAG_CLASS: u8 = 7;
pub const TAG_STRING: u8 = 8;
pub const TAG_FIELDREF: u8 = 9;
pub const TAG_METHODREF: u8 = 10;
pub const TAG_INTERFACE_METHODREF: u8 = 11;
pub const TAG_NAME_AND_TYPE: u8 = 12;
pub const TAG_METHOD_HANDLE: u8 = 15;
pub const TAG_METHOD_TYPE: u8 = 16;
pub const TAG_DYNAMIC: u8 = 17;
pub const TAG_INVOKE_DYNAMIC: u8 = 18;
pub const TAG_MODULE: u8 = 19;
pub const TAG_PACKAGE: u8 = 20;

/// One constant-pool entry. Float and Double keep their raw bits so that NaN payloads
/// survive a round trip.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constant {
    /// Modified UTF-8 bytes exactly as stored in the file.
    Utf8(Vec<u8>),
    Integer(i32),
    Float(u32),
    Long(i64),
    Double(u64),
    Class { name: u16 },
    String { value: u16 },
    Fieldref { class: u16, name_and_type: u16 },
    Methodref { class: u16, name_and_type: u16 },
    InterfaceMethodref { class: u16, name_and_type: u16 },
    NameAndType { name: u16, descriptor: u16 },
    MethodHandle { kind: u8, reference: u16 },
    MethodType { descriptor: u16 },
    Dynamic { bootstrap: u16, name_and_type: u16 },
    InvokeDynamic { bootstrap: u16, name_and_type: u16 },
    Module { name: u16 },
    Package { name: u16 },
    /// The slot after a Long or Double.
    Unusable,
}

impl Constant {
    pub fn tag(&self) -> u8 {
        match self {
            Constant::Utf8(_) => TAG_UTF8,
            Constant::Integer(_) => TAG_INTEGER,
            Constant::Float(_) => TAG_FLOAT,
            Constant::Long(_) => TAG_LONG,
            Constant::Double(_) => TAG_DOUBLE,
            Constant::Class { .. } => TAG_CLASS,
            Constant::String { .. } => TAG_STRING,
            Constant::Fieldref { .. } => TAG_FIELDREF,
            Constant::Methodref { .. } => TAG_METHODREF,
            Constant::InterfaceMethodref { .. } => TAG_INTERFACE_METHODREF,
            Constant::NameAndType { .. } => TAG_NAME_AND_TYPE,
            Constant::MethodHandle { .. } => TAG_METHOD_HANDLE,
            Constant::MethodType { .. } => TAG_METHOD_TYPE,
            Constant::Dynamic { .. } => TAG_DYNAMIC,
            Constant::InvokeDynamic { .. } => TAG_INVOKE_DYNAMIC,
            Constant::Module { .. } => TAG_MODULE,
            Constant::Package { .. } => TAG_PACKAGE,
            Constant::Unusable => 0,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        tag_name(self.tag())
    }

    fn is_wide(&self) -> bool {
        matches!(self, Constant::Long(_) | Constant::Double(_))
    }
}

pub fn tag_name(tag: u8) -> &'static str {
    match tag {
        TAG_UTF8 => "Utf8",
        TAG_INTEGER => "Integer",
        TAG_FLOAT => "Float",
        TAG_LONG => "Long",
        TAG_DOUBLE => "Double",
        TAG_CLASS => "Class",
        TAG_STRING => "String",
        TAG_FIELDREF => "Fieldref",
        TAG_METHODREF => "Methodref",
        TAG_INTERFACE_METHODREF => "InterfaceMethodref",
        TAG_NAME_AND_TYPE => "NameAndType",
        TAG_METHOD_HANDLE => "MethodHandle",
        TAG_METHOD_TYPE => "MethodType",
        TAG_DYNAMIC => "Dynamic",
        TAG_INVOKE_DYNAMIC => "InvokeDynamic",
        TAG_MODULE => "Module",
        TAG_PACKAGE => "Package",
        _ => "unusable",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PoolError {
    #[error("constant pool index {0} out of range")]
    OutOfRange(u16),
    #[error("constant pool index {index}: expected {expected}, found {found}")]
    WrongTag { index: u16, expected: &'static str, found: &'static str },
    #[error("constant pool is full")]
    Full,
}

/// A symbolic reference to a field or method, resolved through the pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemberRef {
    pub owner: String,
    pub name: String,
    pub descriptor: String,
    pub interface: bool,
}

impl fmt::Display for MemberRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}:{}", self.owner, self.name, self.descriptor)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstantPool {
    /// `slots[i - 1]` holds index `i`.
    slots: Vec<Constant>,
}

impl ConstantPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of usable-or-phantom slots (the on-disk count minus one).
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn get(&self, index: u16) -> Result<&Constant, PoolError> {
        if index == 0 {
            return Err(PoolError::OutOfRange(0));
        }
        match self.slots.get(index as usize - 1) {
            Some(Constant::Unusable) | None => Err(PoolError::OutOfRange(index)),
            Some(c) => Ok(c),
        }
    }

    /// Raw slot access; phantom slots are returned as [`Constant::Unusable`].
    pub fn slot(&self, index: u16) -> Option<&Constant> {
        if index == 0 {
            None
        } else {
            self.slots.get(index as usize - 1)
        }
    }

    /// All live entries with their indices, in index order.
    pub fn iter(&self) -> impl Iterator<Item = (u16, &Constant)> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, c)| !matches!(c, Constant::Unusable))
            .map(|(i, c)| ((i + 1) as u16, c))
    }

    /// Appends an entry, returning its index. Long and Double consume two slots.
    pub fn push(&mut self, c: Constant) -> Result<u16, PoolError> {
        let index = self.slots.len() + 1;
        let width = if c.is_wide() { 2 } else { 1 };
        if index + width - 1 > u16::MAX as usize {
            return Err(PoolError::Full);
        }
        let wide = c.is_wide();
        self.slots.push(c);
        if wide {
            self.slots.push(Constant::Unusable);
        }
        Ok(index as u16)
    }

    fn find(&self, c: &Constant) -> Option<u16> {
        self.iter().find(|(_, e)| *e == c).map(|(i, _)| i)
    }

    /// Returns the index of an equal entry, appending one if absent.
    pub fn intern(&mut self, c: Constant) -> Result<u16, PoolError> {
        match self.find(&c) {
            Some(i) => Ok(i),
            None => self.push(c),
        }
    }

    pub fn intern_utf8(&mut self, s: &str) -> Result<u16, PoolError> {
        self.intern(Constant::Utf8(to_mutf8(s)))
    }

    pub fn intern_class(&mut self, name: &str) -> Result<u16, PoolError> {
        let name = self.intern_utf8(name)?;
        self.intern(Constant::Class { name })
    }

    pub fn intern_string(&mut self, s: &str) -> Result<u16, PoolError> {
        let value = self.intern_utf8(s)?;
        self.intern(Constant::String { value })
    }

    pub fn intern_name_and_type(&mut self, name: &str, descriptor: &str) -> Result<u16, PoolError> {
        let name = self.intern_utf8(name)?;
        let descriptor = self.intern_utf8(descriptor)?;
        self.intern(Constant::NameAndType { name, descriptor })
    }

    pub fn intern_fieldref(&mut self, owner: &str, name: &str, descriptor: &str) -> Result<u16, PoolError> {
        let class = self.intern_class(owner)?;
        let name_and_type = self.intern_name_and_type(name, descriptor)?;
        self.intern(Constant::Fieldref { class, name_and_type })
    }

    pub fn intern_methodref(
        &mut self,
        owner: &str,
        name: &str,
        descriptor: &str,
        interface: bool,
    ) -> Result<u16, PoolError> {
        let class = self.intern_class(owner)?;
        let name_and_type = self.intern_name_and_type(name, descriptor)?;
        if interface {
            self.intern(Constant::InterfaceMethodref { class, name_and_type })
        } else {
            self.intern(Constant::Methodref { class, name_and_type })
        }
    }

    fn wrong(&self, index: u16, expected: u8) -> PoolError {
        match self.get(index) {
            Ok(c) => PoolError::WrongTag { index, expected: tag_name(expected), found: c.kind_name() },
            Err(e) => e,
        }
    }

    pub fn utf8(&self, index: u16) -> Result<Cow<'_, str>, PoolError> {
        match self.get(index)? {
            Constant::Utf8(b) => Ok(from_mutf8(b)),
            _ => Err(self.wrong(index, TAG_UTF8)),
        }
    }

    pub fn class_name(&self, index: u16) -> Result<Cow<'_, str>, PoolError> {
        match self.get(index)? {
            Constant::Class { name } => self.utf8(*name),
            _ => Err(self.wrong(index, TAG_CLASS)),
        }
    }

    pub fn string(&self, index: u16) -> Result<Cow<'_, str>, PoolError> {
        match self.get(index)? {
            Constant::String { value } => self.utf8(*value),
            _ => Err(self.wrong(index, TAG_STRING)),
        }
    }

    pub fn name_and_type(&self, index: u16) -> Result<(Cow<'_, str>, Cow<'_, str>), PoolError> {
        match self.get(index)? {
            Constant::NameAndType { name, descriptor } => Ok((self.utf8(*name)?, self.utf8(*descriptor)?)),
            _ => Err(self.wrong(index, TAG_NAME_AND_TYPE)),
        }
    }

    /// Resolves a Fieldref, Methodref, or InterfaceMethodref entry.
    pub fn member_ref(&self, index: u16) -> Result<MemberRef, PoolError> {
        let (class, nat, interface) = match self.get(index)? {
            Constant::Fieldref { class, name_and_type } | Constant::Methodref { class, name_and_type } => {
                (*class, *name_and_type, false)
            }
            Constant::InterfaceMethodref { class, name_and_type } => (*class, *name_and_type, true),
            _ => return Err(self.wrong(index, TAG_METHODREF)),
        };
        let (name, descriptor) = self.name_and_type(nat)?;
        Ok(MemberRef {
            owner: self.class_name(class)?.into_owned(),
            name: name.into_owned(),
            descriptor: descriptor.into_owned(),
            interface,
        })
    }

    /// Descriptor of the NameAndType behind an InvokeDynamic or Dynamic entry.
    pub fn dynamic_descriptor(&self, index: u16) -> Result<Cow<'_, str>, PoolError> {
        match self.get(index)? {
            Constant::InvokeDynamic { name_and_type, .. } | Constant::Dynamic { name_and_type, .. } => {
                Ok(self.name_and_type(*name_and_type)?.1)
            }
            _ => Err(self.wrong(index, TAG_INVOKE_DYNAMIC)),
        }
    }

    /// Checks every cross-reference inside every entry, returning one message per fault.
    pub fn check_references(&self) -> Vec<(u16, PoolError)> {
        let mut faults = Vec::new();
        let expect = |faults: &mut Vec<(u16, PoolError)>, at: u16, target: u16, tag: u8| {
            let ok = matches!(self.get(target), Ok(c) if c.tag() == tag);
            if !ok {
                faults.push((at, self.wrong(target, tag)));
            }
        };
        for (i, c) in self.iter() {
            match *c {
                Constant::Class { name } | Constant::Module { name } | Constant::Package { name } => {
                    expect(&mut faults, i, name, TAG_UTF8)
                }
                Constant::String { value } => expect(&mut faults, i, value, TAG_UTF8),
                Constant::MethodType { descriptor } => expect(&mut faults, i, descriptor, TAG_UTF8),
                Constant::Fieldref { class, name_and_type }
                | Constant::Methodref { class, name_and_type }
                | Constant::InterfaceMethodref { class, name_and_type } => {
                    expect(&mut faults, i, class, TAG_CLASS);
                    expect(&mut faults, i, name_and_type, TAG_NAME_AND_TYPE);
                }
                Constant::NameAndType { name, descriptor } => {
                    expect(&mut faults, i, name, TAG_UTF8);
                    expect(&mut faults, i, descriptor, TAG_UTF8);
                }
                Constant::Dynamic { name_and_type, .. } | Constant::InvokeDynamic { name_and_type, .. } => {
                    expect(&mut faults, i, name_and_type, TAG_NAME_AND_TYPE)
                }
                Constant::MethodHandle { kind, reference } => {
                    let ok = matches!(
                        (kind, self.get(reference).map(|c| c.tag())),
                        (1..=4, Ok(TAG_FIELDREF))
                            | (5 | 8, Ok(TAG_METHODREF))
                            | (6 | 7, Ok(TAG_METHODREF | TAG_INTERFACE_METHODREF))
                            | (9, Ok(TAG_INTERFACE_METHODREF))
                    );
                    if !ok {
                        faults.push((i, self.wrong(reference, TAG_METHODREF)));
                    }
                }
                _ => {}
            }
        }
        faults
    }

    pub(crate) fn parse(r: &mut Reader<'_>) -> Result<Self, ClassError> {
        let count = r.u16()?;
        let mut pool = ConstantPool { slots: Vec::with_capacity(count as usize) };
        let mut index = 1u32;
        while index < count as u32 {
            let at = r.offset();
            let tag = r.u8()?;
            let c = match tag {
                TAG_UTF8 => {
                    let len = r.u16()? as usize;
                    Constant::Utf8(r.take(len)?.to_vec())
                }
                TAG_INTEGER => Constant::Integer(r.u32()? as i32),
                TAG_FLOAT => Constant::Float(r.u32()?),
                TAG_LONG => Constant::Long(r.u64()? as i64),
                TAG_DOUBLE => Constant::Double(r.u64()?),
                TAG_CLASS => Constant::Class { name: r.u16()? },
                TAG_STRING => Constant::String { value: r.u16()? },
                TAG_FIELDREF => Constant::Fieldref { class: r.u16()?, name_and_type: r.u16()? },
                TAG_METHODREF => Constant::Methodref { class: r.u16()?, name_and_type: r.u16()? },
                TAG_INTERFACE_METHODREF => {
                    Constant::InterfaceMethodref { class: r.u16()?, name_and_type: r.u16()? }
                }
                TAG_NAME_AND_TYPE => Constant::NameAndType { name: r.u16()?, descriptor: r.u16()? },
                TAG_METHOD_HANDLE => Constant::MethodHandle { kind: r.u8()?, reference: r.u16()? },
                TAG_METHOD_TYPE => Constant::MethodType { descriptor: r.u16()? },
                TAG_DYNAMIC => Constant::Dynamic { bootstrap: r.u16()?, name_and_type: r.u16()? },
                TAG_INVOKE_DYNAMIC => Constant::InvokeDynamic { bootstrap: r.u16()?, name_and_type: r.u16()? },
                TAG_MODULE => Constant::Module { name: r.u16()? },
                TAG_PACKAGE => Constant::Package { name: r.u16()? },
                other => {
                    return Err(ClassError::Malformed {
                        offset: at,
                        reason: format!("unknown constant tag {other} at pool index {index}"),
                    })
                }
            };
            let wide = c.is_wide();
            pool.slots.push(c);
            index += 1;
            if wide {
                if index >= count as u32 {
                    return Err(ClassError::Malformed {
                        offset: at,
                        reason: "8-byte constant occupies the last pool slot".into(),
                    });
                }
                pool.slots.push(Constant::Unusable);
                index += 1;
            }
        }
        Ok(pool)
    }

    pub(crate) fn write(&self, w: &mut Writer) -> Result<(), ClassError> {
        let count = self.slots.len() + 1;
        if count > u16::MAX as usize {
            return Err(ClassError::Unencodable(format!(
                "constant pool needs {} slots, the format allows 65534",
                self.slots.len()
            )));
        }
        w.u16(count as u16);
        for c in &self.slots {
            match c {
                Constant::Unusable => continue,
                _ => w.u8(c.tag()),
            }
            match *c {
                Constant::Utf8(ref b) => {
                    if b.len() > u16::MAX as usize {
                        return Err(ClassError::Unencodable("Utf8 constant longer than 65535 bytes".into()));
                    }
                    w.u16(b.len() as u16);
                    w.bytes(b);
                }
                Constant::Integer(v) => w.u32(v as u32),
                Constant::Float(v) => w.u32(v),
                Constant::Long(v) => w.u64(v as u64),
                Constant::Double(v) => w.u64(v),
                Constant::Class { name } | Constant::Module { name } | Constant::Package { name } => w.u16(name),
                Constant::String { value } => w.u16(value),
                Constant::MethodType { descriptor } => w.u16(descriptor),
                Constant::Fieldref { class, name_and_type }
                | Constant::Methodref { class, name_and_type }
                | Constant::InterfaceMethodref { class, name_and_type } => {
                    w.u16(class);
                    w.u16(name_and_type);
                }
                Constant::NameAndType { name, descriptor } => {
                    w.u16(name);
                    w.u16(descriptor);
                }
                Constant::MethodHandle { kind, reference } => {
                    w.u8(kind);
                    w.u16(reference);
                }
                Constant::Dynamic { bootstrap, name_and_type }
                | Constant::InvokeDynamic { bootstrap, name_and_type } => {
                    w.u16(bootstrap);
                    w.u16(name_and_type);
                }
                Constant::Unusable => unreachable!(),
            }
        }
        Ok(())
    }
}

/// Decodes the JVM's modified UTF-8. Borrows when the bytes are also valid standard UTF-8.
pub fn from_mutf8(bytes: &[u8]) -> Cow<'_, str> {
    if let Ok(s) = std::str::from_utf8(bytes) {
        return Cow::Borrowed(s);
    }
    let mut units: Vec<u16> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b & 0x80 == 0 {
            units.push(b as u16);
            i += 1;
        } else if b & 0xE0 == 0xC0 && i + 1 < bytes.len() {
            units.push(((b as u16 & 0x1F) << 6) | (bytes[i + 1] as u16 & 0x3F));
            i += 2;
        } else if b & 0xF0 == 0xE0 && i + 2 < bytes.len() {
            units.push(((b as u16 & 0x0F) << 12) | ((bytes[i + 1] as u16 & 0x3F) << 6) | (bytes[i + 2] as u16 & 0x3F));
            i += 3;
        } else {
            units.push(0xFFFD);
            i += 1;
        }
    }
    Cow::Owned(String::from_utf16_lossy(&units))
}

pub fn to_mutf8(s: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(s.len());
    for unit in s.encode_utf16() {
        match unit {
            0x0001..=0x007F => out.push(unit as u8),
            0x0000 | 0x0080..=0x07FF => {
                out.push(0xC0 | (unit >> 6) as u8);
                out.push(0x80 | (unit & 0x3F) as u8);
            }
            _ => {
                out.push(0xE0 | (unit >> 12) as u8);
                out.push(0x80 | ((unit >> 6) & 0x3F) as u8);
                out.push(0x80 | (unit & 0x3F) as u8);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_takes_two_slots() {
        let mut p = ConstantPool::new();
        let a = p.push(Constant::Integer(1)).unwrap();
        let l = p.push(Constant::Long(5)).unwrap();
        let b = p.push(Constant::Integer(2)).unwrap();
        assert_eq!((a, l, b), (1, 2, 4));
        assert_eq!(p.slot(3), Some(&Constant::Unusable));
        assert!(p.get(3).is_err());
    }

    #[test]
    fn intern_reuses_and_appends_only() {
        let mut p = ConstantPool::new();
        let c = p.intern_class("java/util/Random").unwrap();
        let before: Vec<_> = p.iter().map(|(i, c)| (i, c.clone())).collect();
        assert_eq!(p.intern_class("java/util/Random").unwrap(), c);
        p.intern_methodref("java/security/SecureRandom", "<init>", "()V", false).unwrap();
        for (i, c) in before {
            assert_eq!(p.get(i).unwrap(), &c);
        }
        assert_eq!(p.class_name(c).unwrap(), "java/util/Random");
    }

    #[test]
    fn mutf8_round_trip() {
        for s in ["plain", "nul\u{0}byte", "é", "\u{1F600} emoji"] {
            let enc = to_mutf8(s);
            assert!(!enc.contains(&0));
            assert_eq!(from_mutf8(&enc), s);
        }
    }

    #[test]
    fn wrong_tag_is_reported() {
        let mut p = ConstantPool::new();
        let u = p.intern_utf8("x").unwrap();
        p.push(Constant::Class { name: 7 }).unwrap();
        assert!(matches!(p.class_name(u), Err(PoolError::WrongTag { .. })));
        assert_eq!(p.check_references().len(), 1);
    }
}
