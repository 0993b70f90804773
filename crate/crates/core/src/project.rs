//! The set of classes under repair, keyed by internal name.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::classfile::{parse_class, ClassError, ClassFile};
use crate::hierarchy::ClassHierarchy;

#[derive(Debug, Clone)]
pub struct LoadedClass {
    /// Path relative to the classes directory.
    pub rel_path: PathBuf,
    pub bytes: Vec<u8>,
    pub class: ClassFile,
}

#[derive(Debug, Clone, Default)]
pub struct ClassSet {
    pub classes: BTreeMap<String, Arc<LoadedClass>>,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Class { path: PathBuf, source: ClassError },
    #[error("class {0} appears twice")]
    Duplicate(String),
}

/// Accepts `com.a.B` or `com/a/B`.
pub fn internal_name(name: &str) -> String {
    name.replace('.', "/")
}

impl ClassSet {
    pub fn load_dir(dir: &Path) -> Result<ClassSet, LoadError> {
        let mut files = Vec::new();
        collect(dir, dir, &mut files)?;
        files.sort();
        let mut set = ClassSet::default();
        for rel in files {
            let path = dir.join(&rel);
            let bytes = fs::read(&path).map_err(|source| LoadError::Io { path: path.clone(), source })?;
            let class = parse_class(&bytes).map_err(|source| LoadError::Class { path: path.clone(), source })?;
            let name = class.name().into_owned();
            if set.classes.contains_key(&name) {
                return Err(LoadError::Duplicate(name));
            }
            set.classes.insert(name, Arc::new(LoadedClass { rel_path: rel, bytes, class }));
        }
        Ok(set)
    }

    pub fn from_bytes<'a>(items: impl IntoIterator<Item = &'a [u8]>) -> Result<ClassSet, ClassError> {
        let mut set = ClassSet::default();
        for bytes in items {
            let class = parse_class(bytes)?;
            let name = class.name().into_owned();
            let rel_path = PathBuf::from(format!("{name}.class"));
            set.classes.insert(name, Arc::new(LoadedClass { rel_path, bytes: bytes.to_vec(), class }));
        }
        Ok(set)
    }

    pub fn get(&self, name: &str) -> Option<&ClassFile> {
        self.classes.get(&internal_name(name)).map(|c| &c.class)
    }

    pub fn hierarchy(&self) -> ClassHierarchy {
        ClassHierarchy::with_classes(self.classes.values().map(|c| &c.class))
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), LoadError> {
    let entries = fs::read_dir(dir).map_err(|source| LoadError::Io { path: dir.to_path_buf(), source })?;
    for e in entries {
        let e = e.map_err(|source| LoadError::Io { path: dir.to_path_buf(), source })?;
        let path = e.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else if path.extension().is_some_and(|x| x == "class") {
            out.push(path.strip_prefix(root).unwrap_or(&path).to_path_buf());
        }
    }
    Ok(())
}
