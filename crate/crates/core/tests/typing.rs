mod common;

use bytefix_core::codemodel::{analyze_types, decode_code, MethodContext};
use bytefix_core::project::ClassSet;

#[test]
fn corpus_methods_type_check() {
    let mut failures = Vec::new();
    for variant in ["janino", "asm52"] {
        let classes = ClassSet::load_dir(&common::corpus(variant)).unwrap();
        let h = classes.hierarchy();
        for (name, lc) in &classes.classes {
            let cf = &lc.class;
            for m in &cf.methods {
                let Some(code) = m.code() else { continue };
                let body = decode_code(code, &cf.pool).unwrap();
                let (mname, desc) = (m.name(&cf.pool), m.descriptor(&cf.pool));
                let ctx = MethodContext {
                    class_name: name,
                    method_name: &mname,
                    descriptor: &desc,
                    is_static: m.is_static(),
                    major_version: cf.major_version,
                    hierarchy: &h,
                };
                if let Err(e) = analyze_types(&body, &cf.pool, &ctx) {
                    failures.push(format!("{variant} {name}.{mname}{desc}: {e}"));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
