mod common;

use bytefix_core::classfile::{emit_class, parse_class, validate_structure};
use bytefix_core::codemodel::{decode_code, encode_code};
use proptest::prelude::*;

#[test]
fn corpus_is_bit_identical() {
    let files = common::corpus_bytes();
    assert!(files.len() >= 200);
    for (p, b) in &files {
        let cf = parse_class(b).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(validate_structure(&cf).is_empty(), "{}", p.display());
        assert_eq!(&emit_class(&cf).unwrap(), b, "{}", p.display());
    }
}

#[test]
fn unmodified_bodies_reencode_exactly() {
    for (p, b) in common::corpus_bytes() {
        let mut cf = parse_class(&b).unwrap();
        for m in cf.methods.clone() {
            let Some(code) = m.code() else { continue };
            let body = decode_code(code, &cf.pool).unwrap();
            let again = encode_code(&body, &mut cf.pool).unwrap();
            assert_eq!(again.code, code.code, "{}", p.display());
            assert_eq!(again.exception_table, code.exception_table, "{}", p.display());
        }
    }
}

fn files() -> &'static [(std::path::PathBuf, Vec<u8>)] {
    static FILES: std::sync::OnceLock<Vec<(std::path::PathBuf, Vec<u8>)>> = std::sync::OnceLock::new();
    FILES.get_or_init(common::corpus_bytes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn corrupted_bytes_never_panic(pick in any::<prop::sample::Index>(), at in any::<prop::sample::Index>(),
                                   val in any::<u8>(), cut in any::<bool>()) {
        let (_, orig) = &files()[pick.index(files().len())];
        let mut b = orig.clone();
        let i = at.index(b.len());
        if cut { b.truncate(i) } else { b[i] = val }
        if let Ok(cf) = parse_class(&b) {
            let _ = validate_structure(&cf);
            // anything that parses emits back to the same bytes
            prop_assert_eq!(emit_class(&cf).unwrap(), b);
        }
    }
}
