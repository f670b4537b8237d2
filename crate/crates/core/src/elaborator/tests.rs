use super::*;
use crate::corpus;
use crate::surface::parse;

fn elab(src: &str, enc: Encoding) -> Elaboration {
    elaborate(&parse(src).unwrap(), &EncodingStrategy::new(enc)).unwrap()
}

fn field_names(el: &Elaboration, s: &str) -> Vec<String> {
    el.env.get_struct(s).unwrap().fields.names().into_iter().map(str::to_string).collect()
}

#[test]
fn nested_fields_follow_first_non_overlapping_parent() {
    let el = elab(corpus::FIG1, Encoding::Nested);
    assert_eq!(field_names(&el, "ring"), ["to_semiring", "neg"]);
    assert_eq!(field_names(&el, "add_comm_group"), ["to_add_group"]);
    assert_eq!(field_names(&el, "semiring"), ["to_add_comm_monoid", "one", "mul"]);
}

#[test]
fn flat_fields_are_leaves() {
    let el = elab(corpus::FIG1, Encoding::Flat);
    assert_eq!(field_names(&el, "add_comm_group"), ["zero", "add", "neg"]);
    assert_eq!(field_names(&el, "ring"), ["zero", "add", "one", "mul", "neg"]);
    assert!(el.preferred_edges().is_empty());
}

#[test]
fn synthesized_instances_use_low_priority() {
    let el = elab(corpus::FIG1, Encoding::Nested);
    let acg = el.instances.iter().find(|i| i.decl == "ring.to_add_comm_group").unwrap();
    assert_eq!((acg.priority, acg.kind), (LOW_PRIORITY, InstanceKind::SynthesizedConstructor));
    let sr = el.instances.iter().find(|i| i.decl == "ring.to_semiring").unwrap();
    assert_eq!((sr.priority, sr.kind), (DEFAULT_PRIORITY, InstanceKind::PreferredProjection));
}

#[test]
fn field_clash_is_reported() {
    let src = "class a (α : Type) := (x : α)\nclass b (α : Type) := (x : α → α)\nclass c (α : Type) extends a α, b α";
    let err = elaborate(&parse(src).unwrap(), &EncodingStrategy::new(Encoding::Flat)).unwrap_err();
    assert!(matches!(err.error, ElabError::FieldTypeClash { ref field, .. } if field == "x"));
}

#[test]
fn overrides_must_name_parents() {
    let ast = parse(corpus::FIG1).unwrap();
    let bad = EncodingStrategy::new(Encoding::Nested).with_order("ring", vec!["add_group".into()]);
    assert!(matches!(elaborate(&ast, &bad).unwrap_err().error, ElabError::OverrideInvalid { .. }));
    let good = EncodingStrategy::new(Encoding::Nested).with_order("ring", vec!["add_comm_group".into()]);
    let el = elaborate(&ast, &good).unwrap();
    assert_eq!(field_names(&el, "ring"), ["to_add_comm_group", "one", "mul"]);
}
