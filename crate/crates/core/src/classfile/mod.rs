//! Class-file container: parsing, emission, and structural checks.

pub mod attributes;
pub mod descriptor;
pub mod pool;
mod reader;
pub mod validate;

use std::borrow::Cow;

pub use attributes::{
    AttrInfo, Attribute, CodeAttribute, ExceptionEntry, LineNumber, LocalVariable, StackMapFrame, VerificationType,
};
pub use pool::{Constant, ConstantPool, MemberRef, PoolError};
pub use validate::{validate_structure, FaultKind, StructuralFault};

use reader::{Reader, Writer};

pub const MAGIC: u32 = 0xCAFE_BABE;
pub const MIN_MAJOR: u16 = 45;
pub const MAX_MAJOR: u16 = 61;

pub const ACC_PUBLIC: u16 = 0x0001;
pub const ACC_PRIVATE: u16 = 0x0002;
pub const ACC_PROTECTED: u16 = 0x0004;
pub const ACC_STATIC: u16 = 0x0008;
pub const ACC_FINAL: u16 = 0x0010;
pub const ACC_SUPER: u16 = 0x0020;
pub const ACC_SYNCHRONIZED: u16 = 0x0020;
pub const ACC_BRIDGE: u16 = 0x0040;
pub const ACC_VARARGS: u16 = 0x0080;
pub const ACC_NATIVE: u16 = 0x0100;
pub const ACC_INTERFACE: u16 = 0x0200;
pub const ACC_ABSTRACT: u16 = 0x0400;
pub const ACC_SYNTHETIC: u16 = 0x1000;
pub const ACC_ENUM: u16 = 0x4000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassError {
    #[error("malformed class at byte {offset}: {reason}")]
    Malformed { offset: usize, reason: String },
    #[error("class cannot be encoded: {0}")]
    Unencodable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberInfo {
    pub access_flags: u16,
    pub name_index: u16,
    pub descriptor_index: u16,
    pub attributes: Vec<Attribute>,
}

impl MemberInfo {
    pub fn name<'a>(&self, pool: &'a ConstantPool) -> Cow<'a, str> {
        pool.utf8(self.name_index).unwrap_or(Cow::Borrowed("?"))
    }

    pub fn descriptor<'a>(&self, pool: &'a ConstantPool) -> Cow<'a, str> {
        pool.utf8(self.descriptor_index).unwrap_or(Cow::Borrowed("?"))
    }

    pub fn is_static(&self) -> bool {
        self.access_flags & ACC_STATIC != 0
    }

    pub fn code(&self) -> Option<&CodeAttribute> {
        self.attributes.iter().find_map(|a| match &a.info {
            AttrInfo::Code(c) => Some(c),
            _ => None,
        })
    }

    pub fn code_mut(&mut self) -> Option<&mut CodeAttribute> {
        self.attributes.iter_mut().find_map(|a| match &mut a.info {
            AttrInfo::Code(c) => Some(c),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFile {
    pub minor_version: u16,
    pub major_version: u16,
    pub pool: ConstantPool,
    pub access_flags: u16,
    pub this_class: u16,
    pub super_class: u16,
    pub interfaces: Vec<u16>,
    pub fields: Vec<MemberInfo>,
    pub methods: Vec<MemberInfo>,
    pub attributes: Vec<Attribute>,
}

impl ClassFile {
    /// Internal name of this class, e.g. `java/util/Random`.
    pub fn name(&self) -> Cow<'_, str> {
        self.pool.class_name(self.this_class).unwrap_or(Cow::Borrowed("?"))
    }

    pub fn super_name(&self) -> Option<Cow<'_, str>> {
        if self.super_class == 0 {
            None
        } else {
            self.pool.class_name(self.super_class).ok()
        }
    }

    pub fn interface_names(&self) -> Vec<String> {
        self.interfaces
            .iter()
            .filter_map(|&i| self.pool.class_name(i).ok().map(Cow::into_owned))
            .collect()
    }

    pub fn is_interface(&self) -> bool {
        self.access_flags & ACC_INTERFACE != 0
    }

    pub fn find_method(&self, name: &str, descriptor: &str) -> Option<usize> {
        self.methods
            .iter()
            .position(|m| m.name(&self.pool) == name && m.descriptor(&self.pool) == descriptor)
    }

    /// Index of the class file's `SourceFile` name, when present.
    pub fn source_file(&self) -> Option<String> {
        self.attributes.iter().find_map(|a| {
            if self.pool.utf8(a.name_index).ok()? != "SourceFile" {
                return None;
            }
            match &a.info {
                AttrInfo::Raw(b) if b.len() == 2 => {
                    self.pool.utf8(u16::from_be_bytes([b[0], b[1]])).ok().map(Cow::into_owned)
                }
                _ => None,
            }
        })
    }
}

/// Parses a complete class file.
pub fn parse_class(bytes: &[u8]) -> Result<ClassFile, ClassError> {
    let mut r = Reader::new(bytes);
    let magic = r.u32()?;
    if magic != MAGIC {
        return Err(ClassError::Malformed { offset: 0, reason: format!("bad magic 0x{magic:08X}") });
    }
    let minor_version = r.u16()?;
    let major_version = r.u16()?;
    if !(MIN_MAJOR..=MAX_MAJOR).contains(&major_version) || (major_version == MAX_MAJOR && minor_version != 0) {
        return Err(ClassError::Malformed {
            offset: 4,
            reason: format!("unsupported class version {major_version}.{minor_version}"),
        });
    }
    let pool = ConstantPool::parse(&mut r)?;
    let access_flags = r.u16()?;
    let this_at = r.offset();
    let this_class = r.u16()?;
    expect_class(&pool, this_class, this_at)?;
    let super_at = r.offset();
    let super_class = r.u16()?;
    if super_class != 0 {
        expect_class(&pool, super_class, super_at)?;
    }
    let n = r.u16()?;
    let mut interfaces = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let at = r.offset();
        let i = r.u16()?;
        expect_class(&pool, i, at)?;
        interfaces.push(i);
    }
    let fields = parse_members(&mut r, &pool, attributes::Context::Field)?;
    let methods = parse_members(&mut r, &pool, attributes::Context::Method)?;
    let attributes = attributes::parse_list(&mut r, &pool, attributes::Context::Class)?;
    if !r.is_empty() {
        return Err(r.malformed(format!("{} trailing bytes after class", r.remaining())));
    }
    Ok(ClassFile {
        minor_version,
        major_version,
        pool,
        access_flags,
        this_class,
        super_class,
        interfaces,
        fields,
        methods,
        attributes,
    })
}

fn expect_class(pool: &ConstantPool, index: u16, offset: usize) -> Result<(), ClassError> {
    match pool.get(index) {
        Ok(Constant::Class { .. }) => Ok(()),
        Ok(c) => Err(ClassError::Malformed {
            offset,
            reason: format!("index {index} is {}, expected Class", c.kind_name()),
        }),
        Err(e) => Err(ClassError::Malformed { offset, reason: e.to_string() }),
    }
}

fn parse_members(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    ctx: attributes::Context,
) -> Result<Vec<MemberInfo>, ClassError> {
    let n = r.u16()?;
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let access_flags = r.u16()?;
        let name_at = r.offset();
        let name_index = r.u16()?;
        let descriptor_index = r.u16()?;
        for (idx, at) in [(name_index, name_at), (descriptor_index, name_at + 2)] {
            if let Err(e) = pool.utf8(idx) {
                return Err(ClassError::Malformed { offset: at, reason: e.to_string() });
            }
        }
        let attributes = attributes::parse_list(r, pool, ctx)?;
        out.push(MemberInfo { access_flags, name_index, descriptor_index, attributes });
    }
    Ok(out)
}

/// Serializes a class file. Deterministic; an unmodified parse result reproduces its input.
pub fn emit_class(cf: &ClassFile) -> Result<Vec<u8>, ClassError> {
    let mut w = Writer::default();
    w.u32(MAGIC);
    w.u16(cf.minor_version);
    w.u16(cf.major_version);
    cf.pool.write(&mut w)?;
    w.u16(cf.access_flags);
    w.u16(cf.this_class);
    w.u16(cf.super_class);
    w.u16(count16(cf.interfaces.len(), "interfaces")?);
    for &i in &cf.interfaces {
        w.u16(i);
    }
    for members in [&cf.fields, &cf.methods] {
        w.u16(count16(members.len(), "members")?);
        for m in members {
            w.u16(m.access_flags);
            w.u16(m.name_index);
            w.u16(m.descriptor_index);
            attributes::write_list(&mut w, &m.attributes)?;
        }
    }
    attributes::write_list(&mut w, &cf.attributes)?;
    Ok(w.buf)
}

pub(crate) fn count16(n: usize, what: &str) -> Result<u16, ClassError> {
    u16::try_from(n).map_err(|_| ClassError::Unencodable(format!("{n} {what} exceed the 16-bit count")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_magic_is_rejected_at_offset_zero() {
        let err = parse_class(&[0, 0, 0, 0, 0, 0, 0, 50]).unwrap_err();
        assert!(matches!(err, ClassError::Malformed { offset: 0, .. }));
    }

    #[test]
    fn version_window() {
        let mut b = vec![0xCA, 0xFE, 0xBA, 0xBE, 0, 0, 0, 62];
        assert!(matches!(parse_class(&b), Err(ClassError::Malformed { offset: 4, .. })));
        b[7] = 44;
        assert!(matches!(parse_class(&b), Err(ClassError::Malformed { offset: 4, .. })));
        b[7] = 52;
        assert!(matches!(parse_class(&b), Err(ClassError::Malformed { offset: 8, .. })));
    }
}
