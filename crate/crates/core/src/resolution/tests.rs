use super::*;
use crate::corpus;
use crate::elaborator::{elaborate, Encoding, EncodingStrategy};
use crate::surface::parse;

#[test]
fn local_instance_is_found() {
    let el = elaborate(&parse(corpus::FIG1).unwrap(), &EncodingStrategy::new(Encoding::Nested)).unwrap();
    let g = el.goal("ring_to_acm").unwrap();
    let r = resolve(&el.env, &el.instances, &Goal { ctx: g.ctx.clone(), target: g.target.clone() }, &SearchConfig::default())
        .unwrap();
    assert_eq!(r.term.to_string(), "semiring.to_add_comm_monoid R (ring.to_semiring R iR)");
}

#[test]
fn empty_environment_has_no_instances() {
    let src = "class c (α : Type)\ngoal g (β : Type) : c β";
    let el = elaborate(&parse(src).unwrap(), &EncodingStrategy::default()).unwrap();
    let g = el.goal("g").unwrap();
    let err = resolve(&el.env, &el.instances, &Goal { ctx: g.ctx.clone(), target: g.target.clone() }, &SearchConfig::default())
        .unwrap_err();
    assert!(matches!(err, ResolveError::NotFound { .. }));
}
