//! Superclass and interface facts from loaded classes plus a small built-in JDK table.

use std::collections::{BTreeMap, HashSet};

use crate::classfile::ClassFile;

const JDK_CLASSES: &str = include_str!("../data/jdk_classes.txt");

pub const OBJECT: &str = "java/lang/Object";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub super_name: Option<String>,
    pub interfaces: Vec<String>,
    pub is_interface: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ClassHierarchy {
    classes: BTreeMap<String, ClassInfo>,
}

impl ClassHierarchy {
    /// Just the built-in JDK facts.
    pub fn builtin() -> Self {
        let mut h = ClassHierarchy::default();
        for line in JDK_CLASSES.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                continue;
            }
            let list = |s: &str| if s == "-" { Vec::new() } else { s.split(',').map(str::to_string).collect() };
            h.classes.insert(
                parts[1].to_string(),
                ClassInfo {
                    super_name: (parts[2] != "-").then(|| parts[2].to_string()),
                    interfaces: list(parts[3]),
                    is_interface: parts[0] == "interface",
                },
            );
        }
        h
    }

    pub fn with_classes<'a>(classes: impl IntoIterator<Item = &'a ClassFile>) -> Self {
        let mut h = Self::builtin();
        for cf in classes {
            h.add(cf);
        }
        h
    }

    pub fn add(&mut self, cf: &ClassFile) {
        self.classes.insert(
            cf.name().into_owned(),
            ClassInfo {
                super_name: cf.super_name().map(|s| s.into_owned()),
                interfaces: cf.interface_names(),
                is_interface: cf.is_interface(),
            },
        );
    }

    pub fn get(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.get(name)
    }

    pub fn is_known(&self, name: &str) -> bool {
        name.starts_with('[') || self.classes.contains_key(name)
    }

    pub fn is_interface(&self, name: &str) -> Option<bool> {
        if name.starts_with('[') {
            return Some(false);
        }
        self.classes.get(name).map(|c| c.is_interface)
    }

    /// Known classes whose direct superclass is `name`, in name order.
    pub fn direct_subclasses(&self, name: &str) -> Vec<String> {
        self.classes
            .iter()
            .filter(|(_, c)| c.super_name.as_deref() == Some(name) && !c.is_interface)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Superclass chain starting at `name` itself; `None` if any link is unknown.
    pub fn superclasses(&self, name: &str) -> Option<Vec<String>> {
        let mut out = vec![name.to_string()];
        let mut cur = name.to_string();
        while cur != OBJECT {
            let next = self.classes.get(&cur)?.super_name.clone()?;
            if out.contains(&next) {
                return None;
            }
            out.push(next.clone());
            cur = next;
        }
        Some(out)
    }

    /// Whether a value of class `from` can be used where `to` is expected.
    /// `None` when the facts needed are missing.
    pub fn is_subtype(&self, from: &str, to: &str) -> Option<bool> {
        if from == to || to == OBJECT {
            return Some(true);
        }
        if from.starts_with('[') || to.starts_with('[') {
            return Some(array_subtype(self, from, to));
        }
        let mut seen = HashSet::new();
        let mut stack = vec![from.to_string()];
        let mut complete = true;
        while let Some(c) = stack.pop() {
            if c == to {
                return Some(true);
            }
            if !seen.insert(c.clone()) {
                continue;
            }
            match self.classes.get(&c) {
                Some(info) => {
                    stack.extend(info.super_name.iter().cloned());
                    stack.extend(info.interfaces.iter().cloned());
                }
                None => complete = false,
            }
        }
        complete.then_some(false)
    }

    /// Closest common superclass, as the verifier merges reference types. Interfaces merge to Object.
    pub fn common_super(&self, a: &str, b: &str) -> Option<String> {
        if a == b {
            return Some(a.to_string());
        }
        if a.starts_with('[') || b.starts_with('[') {
            if let (Some(ca), Some(cb)) = (a.strip_prefix("[L"), b.strip_prefix("[L")) {
                let ca = ca.strip_suffix(';')?;
                let cb = cb.strip_suffix(';')?;
                return Some(format!("[L{};", self.common_super(ca, cb)?));
            }
            if let (Some(ca), Some(cb)) = (a.strip_prefix('['), b.strip_prefix('[')) {
                if ca.starts_with('[') && cb.starts_with('[') {
                    return Some(format!("[{}", self.common_super(ca, cb)?));
                }
            }
            return Some(OBJECT.to_string());
        }
        if self.is_interface(a)? || self.is_interface(b)? {
            return Some(OBJECT.to_string());
        }
        let sa = self.superclasses(a)?;
        let sb: HashSet<String> = self.superclasses(b)?.into_iter().collect();
        sa.into_iter().find(|c| sb.contains(c))
    }
}

fn array_subtype(h: &ClassHierarchy, from: &str, to: &str) -> bool {
    let Some(fc) = from.strip_prefix('[') else { return false };
    match to.strip_prefix('[') {
        None => matches!(to, OBJECT | "java/lang/Cloneable" | "java/io/Serializable"),
        Some(tc) => {
            let unwrap = |c: &str| c.strip_prefix('L').and_then(|x| x.strip_suffix(';')).map(str::to_string);
            match (unwrap(fc), unwrap(tc)) {
                (Some(f), Some(t)) => h.is_subtype(&f, &t).unwrap_or(false),
                (None, Some(t)) => {
                    fc.starts_with('[') && matches!(t.as_str(), OBJECT | "java/lang/Cloneable" | "java/io/Serializable")
                }
                _ if fc.starts_with('[') && tc.starts_with('[') => array_subtype(h, fc, tc),
                _ => fc == tc,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_facts() {
        let h = ClassHierarchy::builtin();
        assert_eq!(h.is_subtype("java/security/SecureRandom", "java/util/Random"), Some(true));
        assert_eq!(h.is_subtype("java/util/ArrayList", "java/util/Collection"), Some(true));
        assert_eq!(h.is_subtype("java/lang/String", "java/lang/Integer"), Some(false));
        assert_eq!(h.is_subtype("com/x/Unknown", "java/lang/Integer"), None);
        assert_eq!(h.common_super("java/lang/Integer", "java/lang/Long").as_deref(), Some("java/lang/Number"));
        assert_eq!(
            h.common_super("java/lang/NullPointerException", "java/lang/IllegalStateException").as_deref(),
            Some("java/lang/RuntimeException")
        );
        assert_eq!(h.common_super("java/util/List", "java/lang/String").as_deref(), Some(OBJECT));
        assert_eq!(h.common_super("com/x/A", "java/lang/String"), None);
    }

    #[test]
    fn arrays() {
        let h = ClassHierarchy::builtin();
        assert_eq!(h.is_subtype("[Ljava/lang/String;", "[Ljava/lang/Object;"), Some(true));
        assert_eq!(h.is_subtype("[I", "java/lang/Cloneable"), Some(true));
        assert_eq!(h.is_subtype("[I", "[J"), Some(false));
        assert_eq!(h.common_super("[I", "[J").as_deref(), Some(OBJECT));
    }
}
