mod common;

use common::*;
use hierlab::corpus;
use hierlab::elaborator::Encoding;
use hierlab::kernel::Verdict;

#[test]
fn acm_diamond_matrix() {
    assert_eq!(defeq_label(&elab(corpus::FIG1, Encoding::Flat), "acm_diamond", off()), Verdict::Equal);
    assert_eq!(defeq_label(&elab(corpus::FIG1, Encoding::Nested), "acm_diamond", off()), Verdict::NotEqual);
    assert_eq!(defeq_label(&elab(corpus::FIG1, Encoding::Nested), "acm_diamond", kernel_eta()), Verdict::Equal);
    assert_eq!(defeq_label(&elab(corpus::FIG1, Encoding::FlatHack), "acm_diamond", off()), Verdict::Equal);
}

#[test]
fn module_corpus_repeats_the_diamond() {
    let nested = elab(corpus::MODULE, Encoding::Nested);
    assert_eq!(defeq_label(&nested, "acm_diamond", off()), Verdict::NotEqual);
    assert_eq!(defeq_label(&nested, "acm_diamond", kernel_eta()), Verdict::Equal);
    // a concrete constructor lets ι do the work
    assert_eq!(defeq_label(&nested, "acm_diamond_int", off()), Verdict::Equal);
}

#[test]
fn point_eta() {
    for enc in [Encoding::Flat, Encoding::Nested] {
        let el = elab(corpus::POINT, enc);
        assert_eq!(defeq_label(&el, "point_eta", off()), Verdict::NotEqual);
        assert_eq!(defeq_label(&el, "point_eta", kernel_eta()), Verdict::Equal);
    }
}

#[test]
fn defeq_trace_mentions_unfolding() {
    let el = elab(corpus::FIG1, Encoding::Nested);
    let d = el.defeq("acm_diamond").unwrap();
    let out = hierlab::kernel::defeq(&el.env, &kernel_eta(), &d.ctx, &d.lhs, &d.rhs).unwrap();
    assert!(out.trace.iter().any(|l| l.contains("unfold")));
    assert!(out.trace.iter().any(|l| l.contains("eta")));
}
