mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use bytefix_core::classfile::{parse_class, validate_structure};
use bytefix_core::faultloc::Location;
use bytefix_core::patch::{apply_patch, compose_subpatch, rank_patches, site_mutants, Patch, RankedSite};
use bytefix_core::project::ClassSet;
use bytefix_core::templates::{MethodKey, Mutant, TemplateId};
use bytefix_core::codemodel::Label;

fn corpus() -> Arc<ClassSet> {
    Arc::new(ClassSet::load_dir(&common::corpus("janino")).unwrap())
}

fn lines(cs: &ClassSet, class: &str) -> Vec<Location> {
    let cf = cs.get(class).unwrap();
    let mut out = BTreeSet::new();
    for m in &cf.methods {
        let Some(code) = m.code() else { continue };
        let body = bytefix_core::codemodel::decode_code(code, &cf.pool).unwrap();
        out.extend(body.line_map().into_iter().flatten());
    }
    out.into_iter().map(|line| Location { class: class.into(), line }).collect()
}

#[test]
fn applying_twice_gives_identical_bytes() {
    let cs = corpus();
    let h = cs.hierarchy();
    let mut checked = 0;
    for class in cs.classes.keys().take(12) {
        for loc in lines(&cs, class) {
            for m in site_mutants(&cs, &h, &loc, 5).into_iter().step_by(7) {
                let p = Patch::new(1, vec![m], vec![(loc.clone(), 1.0)], None);
                let a = apply_patch(&cs, &p).unwrap();
                let b = apply_patch(&cs, &p).unwrap();
                assert_eq!(a.changed, b.changed);
                for n in &a.changed {
                    assert_eq!(a.classes.classes[n].bytes, b.classes.classes[n].bytes);
                    assert!(validate_structure(&parse_class(&a.classes.classes[n].bytes).unwrap()).is_empty());
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 50, "{checked}");
}

#[test]
fn child_applies_to_parent_output() {
    let cs = corpus();
    let h = cs.hierarchy();
    let class = cs.classes.keys().find(|c| lines(&cs, c).len() >= 4).unwrap().clone();
    let locs = lines(&cs, &class);
    let (first, m1) = locs
        .iter()
        .find_map(|l| site_mutants(&cs, &h, l, 5).into_iter().next().map(|m| (l.clone(), m)))
        .unwrap();
    let parent = Arc::new(Patch::new(1, vec![m1], vec![(first.clone(), 1.0)], None));
    let after_parent = apply_patch(&cs, &parent).unwrap();
    let rest: Vec<RankedSite> =
        locs.iter().filter(|l| **l != first).map(|l| RankedSite { location: l.clone(), score: 0.5 }).collect();
    let mut children = compose_subpatch(&cs, parent.clone(), rest, 5).unwrap();
    let child = children.next().expect("a second-step candidate");
    assert_eq!(child.chain_depth(), 2);
    assert_eq!(child.locations().len(), 2);
    let both = apply_patch(&cs, &child).unwrap();
    // the child's step alone on the parent's output gives the same classes
    let step = Patch::new(2, child.mutants.clone(), child.scores.clone(), None);
    let on_parent = apply_patch(&after_parent.classes, &step).unwrap();
    assert_eq!(both.classes.classes[&class].bytes, on_parent.classes.classes[&class].bytes);
    assert_ne!(both.classes.classes[&class].bytes, after_parent.classes.classes[&class].bytes);
}

fn fake(id: usize, locs: &[u16], delta: usize, score: f64) -> Patch {
    let mutants = locs
        .iter()
        .map(|&line| Mutant {
            template: TemplateId::new(7, 1),
            method: MethodKey { class: "p/C".into(), name: "m".into(), descriptor: "()V".into() },
            location: Location { class: "p/C".into(), line },
            anchor: Label(0),
            edits: vec![],
            instruction_delta: delta / locs.len(),
            description: format!("edit {line}"),
        })
        .collect();
    let scores = locs.iter().map(|&line| (Location { class: "p/C".into(), line }, score)).collect();
    Patch::new(id, mutants, scores, None)
}

#[test]
fn ranking_examples() {
    let ids = |v: Vec<Patch>| rank_patches(v).iter().map(|p| p.id).collect::<Vec<_>>();
    // fewer locations first, then fewer instructions
    assert_eq!(ids(vec![fake(1, &[1, 2], 2, 1.0), fake(2, &[3], 2, 0.1)]), [2, 1]);
    assert_eq!(ids(vec![fake(1, &[1], 5, 1.0), fake(2, &[3], 2, 0.1)]), [2, 1]);
    // then the more suspicious, then generation order
    assert_eq!(ids(vec![fake(1, &[1], 2, 0.5), fake(2, &[3], 2, 0.9)]), [2, 1]);
    assert_eq!(ids(vec![fake(2, &[1], 2, 0.5), fake(1, &[3], 2, 0.5)]), [1, 2]);
}
