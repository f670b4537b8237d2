mod common;

use common::*;
use hierlab::analyzer::{analyze, build_graph, random_hierarchy, RandomParams, ReportSummary, DEFAULT_MAX_PATH_LEN};
use hierlab::corpus;
use hierlab::elaborator::{elaborate, Encoding, EncodingStrategy};
use hierlab::kernel::{defeq, infer_type, TeleEntry, Verdict};
use hierlab::resolution::{resolve, Goal, SearchConfig};
use hierlab::surface::parse;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, RngSeed};

fn config() -> Config {
    Config { cases: 200, rng_algorithm: RngAlgorithm::ChaCha, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

fn encoding() -> impl Strategy<Value = Encoding> {
    prop_oneof![Just(Encoding::Flat), Just(Encoding::Nested), Just(Encoding::FlatHack)]
}

/// A structure with `k` fields over an opaque type, and `k` opaque values.
fn structure_src(k: usize) -> String {
    let mut src = String::from("axiom int : Type\n");
    for i in 0..k {
        src += &format!("axiom a{i} : int\n");
    }
    let fields: Vec<String> = (0..k).map(|i| format!("f{i}")).collect();
    src += &format!("structure s := ({} : int)\n", fields.join(" "));
    src
}

fn mk(args: impl IntoIterator<Item = String>) -> String {
    format!("s.mk {}", args.into_iter().collect::<Vec<_>>().join(" "))
}

fn ancestors(g: &hierlab::analyzer::HierGraph, c: &str) -> Vec<String> {
    let mut seen = vec![c.to_string()];
    let mut i = 0;
    while i < seen.len() {
        let cur = seen[i].clone();
        for e in g.edges.iter().filter(|e| e.from == cur) {
            if !seen.contains(&e.to) {
                seen.push(e.to.clone());
            }
        }
        i += 1;
    }
    seen
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn projection_of_constructor_reduces((k, j, m) in (1usize..=4).prop_flat_map(|k| (Just(k), 0..k, 0..k))) {
        let args = (0..k).map(|i| format!("a{i}"));
        let src = format!("{}defeq hit : ({}).f{j} = a{j}\ndefeq miss : ({}).f{j} = a{m}\n", structure_src(k), mk(args.clone()), mk(args));
        let el = elab(&src, Encoding::Nested);
        prop_assert_eq!(defeq_label(&el, "hit", off()), Verdict::Equal);
        let expect = if j == m { Verdict::Equal } else { Verdict::NotEqual };
        prop_assert_eq!(defeq_label(&el, "miss", both_eta()), expect);
    }

    #[test]
    fn eta_is_gated((k, broken) in (1usize..=4).prop_flat_map(|k| (Just(k), proptest::option::of(0..k)))) {
        let args = (0..k).map(|i| if Some(i) == broken { format!("a{i}") } else { format!("p.f{i}") });
        let src = format!("{}defeq e (p : s) : p = {}\n", structure_src(k), mk(args));
        let el = elab(&src, Encoding::Nested);
        prop_assert_eq!(defeq_label(&el, "e", off()), Verdict::NotEqual);
        let expect = if broken.is_none() { Verdict::Equal } else { Verdict::NotEqual };
        prop_assert_eq!(defeq_label(&el, "e", kernel_eta()), expect);
    }

    #[test]
    fn flat_hierarchies_commute(seed in any::<u64>()) {
        let el = elab(&random_hierarchy(seed, &RandomParams::default()), Encoding::Flat);
        let reports = analyze(&el, off(), DEFAULT_MAX_PATH_LEN).unwrap();
        prop_assert!(ReportSummary::of(&reports).all_commute());
    }

    #[test]
    fn nested_hierarchies_commute_with_eta(seed in any::<u64>()) {
        let el = elab(&random_hierarchy(seed, &RandomParams::default()), Encoding::Nested);
        let reports = analyze(&el, kernel_eta(), DEFAULT_MAX_PATH_LEN).unwrap();
        prop_assert!(ReportSummary::of(&reports).all_commute());
    }

    #[test]
    fn resolution_is_sound(seed in any::<u64>(), enc in encoding()) {
        let el = elab(&random_hierarchy(seed, &RandomParams::default()), enc);
        let g = build_graph(&el.env, &el.instances, enc).unwrap();
        for c in &g.nodes {
            let (mut ctx, _) = hierlab::analyzer::source_context(&el.env, c).unwrap();
            let last = ctx.0.pop().unwrap();
            ctx.push(TeleEntry::inst(last.name, last.ty));
            let alpha = ctx.as_fvars()[0].clone();
            for a in ancestors(&g, c) {
                let target = hierlab::kernel::Term::app(hierlab::kernel::Term::constant(&a), alpha.clone());
                let goal = Goal { ctx: ctx.clone(), target: target.clone() };
                let r = resolve(&el.env, &el.instances, &goal, &SearchConfig::new(off()));
                prop_assert!(r.is_ok(), "{} from {}", a, c);
                let ty = infer_type(&el.env, &ctx, &r.unwrap().term).unwrap();
                prop_assert!(defeq(&el.env, &off(), &ctx, &ty, &target).unwrap().verdict.is_equal());
            }
        }
    }

    #[test]
    fn defeq_is_symmetric(seed in any::<u64>(), enc in encoding(), eta in any::<bool>()) {
        let el = elab(&random_hierarchy(seed, &RandomParams::default()), enc);
        let cfg = if eta { kernel_eta() } else { off() };
        for r in analyze(&el, cfg, DEFAULT_MAX_PATH_LEN).unwrap() {
            let back = defeq(&el.env, &cfg, &r.ctx, &r.term_b, &r.term_a).unwrap().verdict;
            prop_assert_eq!(back.is_equal(), r.oracle.commutes());
        }
    }

    #[test]
    fn parsing_never_panics(text in "\\PC{0,200}") {
        let _ = parse(&text);
    }

    #[test]
    fn mangled_corpus_never_panics(which in 0..corpus::ALL.len(), cut in any::<prop::sample::Index>(), junk in "[ a-z():=→\\[\\]{}.,\\n]{0,12}") {
        let src = corpus::ALL[which].1;
        let at = cut.index(src.len() + 1);
        let at = (0..=at).rev().find(|&i| src.is_char_boundary(i)).unwrap();
        let text = format!("{}{}{}", &src[..at], junk, &src[at..]);
        if let Ok(ast) = parse(&text) {
            for enc in [Encoding::Flat, Encoding::Nested, Encoding::FlatHack] {
                let _ = elaborate(&ast, &EncodingStrategy::new(enc));
            }
        }
    }
}
