use std::collections::BTreeSet;

use bytefix_core::templates::{catalog, SourceKind, TemplateId};

#[test]
fn table_shape() {
    let c = catalog();
    assert_eq!(c.len(), 33);
    let cats: BTreeSet<u8> = c.iter().map(|e| e.id.category).collect();
    assert_eq!(cats, (1..=14).collect());
    let ids: BTreeSet<TemplateId> = c.iter().map(|e| e.id).collect();
    assert_eq!(ids.len(), c.len());
    // attempt order is category then variant
    assert!(c.windows(2).all(|w| w[0].id < w[1].id));
    for cat in cats {
        let vs: Vec<u8> = c.iter().filter(|e| e.id.category == cat).map(|e| e.id.variant).collect();
        let expect: Vec<u8> = if vs == [0] { vec![0] } else { (1..=vs.len() as u8).collect() };
        assert_eq!(vs, expect, "T{cat}");
        let names: BTreeSet<&str> = c.iter().filter(|e| e.id.category == cat).map(|e| e.category_name).collect();
        assert_eq!(names.len(), 1);
    }
}

#[test]
fn ids_print_and_parse() {
    for e in catalog() {
        let s = e.id.to_string();
        assert_eq!(TemplateId::parse(&s), Some(e.id), "{s}");
        assert_eq!(e.id.entry(), e);
    }
    assert_eq!(TemplateId::parse("T4").unwrap().to_string(), "T4");
    assert_eq!(TemplateId::parse("T2.1").unwrap().to_string(), "T2.1");
    assert_eq!(TemplateId::parse("T15"), None);
    assert_eq!(TemplateId::parse("T2.9"), None);
}

#[test]
fn vulnerability_specific_entries() {
    let avr: Vec<String> = catalog().iter().filter(|e| e.source == SourceKind::Avr).map(|e| e.id.to_string()).collect();
    assert_eq!(
        avr,
        ["T1.1", "T1.2", "T2.1", "T2.2", "T2.3", "T2.4", "T3.1", "T3.2", "T3.3", "T4", "T5.3", "T6.1", "T11"]
    );
}
