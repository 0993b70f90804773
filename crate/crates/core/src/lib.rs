//! Template-based repair of JVM class files.

pub mod classfile;
pub mod codemodel;
pub mod hierarchy;
pub mod donor;
pub mod faultloc;
pub mod project;
pub mod templates;
pub mod patch;
pub mod validate;
