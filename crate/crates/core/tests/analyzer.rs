mod common;

use common::*;
use hierlab::analyzer::{
    analyze, build_graph, check_diamond, enumerate_diamonds, predict_diamond, report_json, spanning_search,
    AnalyzeError, Coherence, Diamond, EdgeKind, ReportSummary, DEFAULT_MAX_PATH_LEN,
};
use hierlab::corpus;
use hierlab::elaborator::{Encoding, EncodingStrategy};
use hierlab::kernel::{infer_type, DefEqConfig};
use hierlab::surface::parse;

fn acg_prefers_acm() -> EncodingStrategy {
    EncodingStrategy::new(Encoding::Nested).with_order("add_comm_group", vec!["add_comm_monoid".into()])
}

fn ring_acm(reports: &[hierlab::analyzer::DiamondReport]) -> &hierlab::analyzer::DiamondReport {
    reports.iter().find(|r| r.diamond.source == "ring" && r.diamond.target == "add_comm_monoid").unwrap()
}

#[test]
fn graph_kinds() {
    let el = elab(corpus::FIG1, Encoding::Nested);
    let g = build_graph(&el.env, &el.instances, Encoding::Nested).unwrap();
    assert_eq!(g.nodes.len(), 6);
    assert_eq!(g.edges.iter().filter(|e| e.kind == EdgeKind::Preferred).count(), 5);
    assert_eq!(g.edges.iter().filter(|e| e.kind == EdgeKind::NonPreferred).count(), 2);

    let single = elab("class a (α : Type) := (x : α)", Encoding::Nested);
    let g = build_graph(&single.env, &single.instances, Encoding::Nested).unwrap();
    assert_eq!((g.nodes.len(), g.edges.len()), (1, 0));

    // user instances are not edges
    let m = elab(corpus::MODULE, Encoding::Nested);
    let g = build_graph(&m.env, &m.instances, Encoding::Nested).unwrap();
    assert!(g.edges.iter().all(|e| e.decl != "semiring.to_module" && e.decl != "int.ring"));
}

#[test]
fn ring_acm_diamond_oracle() {
    let nested = analyze(&elab(corpus::FIG1, Encoding::Nested), off(), DEFAULT_MAX_PATH_LEN).unwrap();
    assert_eq!(ring_acm(&nested).oracle, Coherence::NotCommuting);
    assert_eq!(ring_acm(&nested).predictor, Coherence::NotCommuting);
    let flat = analyze(&elab(corpus::FIG1, Encoding::Flat), off(), DEFAULT_MAX_PATH_LEN).unwrap();
    assert_eq!(ring_acm(&flat).oracle, Coherence::Commuting);
    let eta = analyze(&elab(corpus::FIG1, Encoding::Nested), kernel_eta(), DEFAULT_MAX_PATH_LEN).unwrap();
    assert_eq!(ring_acm(&eta).oracle, Coherence::Commuting);
    let b = analyze(&elab_with(corpus::FIG1, acg_prefers_acm()), off(), DEFAULT_MAX_PATH_LEN).unwrap();
    assert_eq!((ring_acm(&b).oracle, ring_acm(&b).predictor), (Coherence::Commuting, Coherence::Commuting));
}

#[test]
fn composites_typecheck_at_the_target() {
    for enc in [Encoding::Flat, Encoding::Nested, Encoding::FlatHack] {
        let el = elab(corpus::CUBE, enc);
        for r in analyze(&el, off(), DEFAULT_MAX_PATH_LEN).unwrap() {
            for t in [&r.term_a, &r.term_b] {
                let ty = infer_type(&el.env, &r.ctx, t).unwrap();
                assert_eq!(ty.head_const(), Some(r.diamond.target.as_str()));
            }
        }
    }
}

#[test]
fn predictor_agrees_on_fig1() {
    for st in [EncodingStrategy::new(Encoding::Nested), acg_prefers_acm(), EncodingStrategy::new(Encoding::FlatHack)] {
        let reports = analyze(&elab_with(corpus::FIG1, st.clone()), off(), DEFAULT_MAX_PATH_LEN).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.agrees(), "{:?}: {:?}", st, r.diamond);
        }
    }
}

#[test]
fn flat_and_eta_coherence_on_corpus() {
    for src in [corpus::FIG1, corpus::CUBE, corpus::ROOTONLY, corpus::MODULE] {
        let flat = analyze(&elab(src, Encoding::Flat), off(), DEFAULT_MAX_PATH_LEN).unwrap();
        assert!(ReportSummary::of(&flat).all_commute());
        let eta = analyze(&elab(src, Encoding::Nested), kernel_eta(), DEFAULT_MAX_PATH_LEN).unwrap();
        assert!(ReportSummary::of(&eta).all_commute());
    }
}

#[test]
fn flat_hack_fig1_commutes() {
    let reports = analyze(&elab(corpus::FIG1, Encoding::FlatHack), off(), DEFAULT_MAX_PATH_LEN).unwrap();
    assert!(ReportSummary::of(&reports).all_commute());
}

#[test]
fn rule_predicts_edge_kinds_only() {
    let el = elab(corpus::FIG1, Encoding::Nested);
    let g = build_graph(&el.env, &el.instances, Encoding::Nested).unwrap();
    for d in enumerate_diamonds(&g, DEFAULT_MAX_PATH_LEN).unwrap() {
        let same = (d.path_a.last().unwrap().kind == EdgeKind::Preferred)
            == (d.path_b.last().unwrap().kind == EdgeKind::Preferred);
        assert_eq!(predict_diamond(&d).commutes(), same);
        let r = check_diamond(&el.env, off(), &d).unwrap();
        assert_eq!(r.predictor, predict_diamond(&d));
    }
}

#[test]
fn diamond_order_is_stable() {
    let el = elab(corpus::CUBE, Encoding::Nested);
    let g = build_graph(&el.env, &el.instances, Encoding::Nested).unwrap();
    let a = enumerate_diamonds(&g, DEFAULT_MAX_PATH_LEN).unwrap();
    let b = enumerate_diamonds(&g, DEFAULT_MAX_PATH_LEN).unwrap();
    assert_eq!(a, b);
    for d in &a {
        assert_ne!(Diamond::path_names(&d.path_a), Diamond::path_names(&d.path_b));
    }
    assert!(matches!(enumerate_diamonds(&g, 0), Err(AnalyzeError::PathLength(0))));
}

#[test]
fn json_report_schema() {
    let el = elab(corpus::FIG1, Encoding::Nested);
    let reports = analyze(&el, off(), DEFAULT_MAX_PATH_LEN).unwrap();
    let v = report_json(Encoding::Nested, off(), &reports);
    assert_eq!(v["config"]["encoding"], "nested");
    assert_eq!(v["config"]["eta_kernel"], false);
    assert_eq!(v["summary"]["total"], 5);
    assert_eq!(v["summary"]["commuting"], 4);
    assert_eq!(v["summary"]["mismatches"], 0);
    let d = &v["diamonds"][0];
    for key in ["source", "target", "pathA", "pathB", "oracle", "predictor"] {
        assert!(!d[key].is_null(), "{key}");
    }
}

#[test]
fn cube_spanning_search() {
    let ast = parse(corpus::CUBE).unwrap();
    let off_report = spanning_search(&ast, off()).unwrap();
    assert_eq!(off_report.placements.len(), 24);
    // the last-segment rule rules out every placement
    assert_eq!(off_report.predicted_coherent, 0);
    // the kernel accepts exactly those where the face below ring's preferred
    // chain is reached through preferred edges from both sides
    assert_eq!(off_report.coherent, 12);
    assert!(off_report.placements.iter().all(|p| p.order_violations.is_empty()));
    let eta = spanning_search(&ast, DefEqConfig::new(true, false)).unwrap();
    assert_eq!(eta.coherent, 24);
}

#[test]
fn fig1_spanning_search() {
    let ast = parse(corpus::FIG1).unwrap();
    let r = spanning_search(&ast, off()).unwrap();
    assert_eq!(r.placements.len(), 4);
    let b = r
        .placements
        .iter()
        .find(|p| p.assignment.contains(&("add_comm_group".into(), "add_comm_monoid".into())))
        .unwrap();
    assert!(b.failing.iter().all(|k| !k.starts_with("ring -> add_comm_monoid")));
    let default = r
        .placements
        .iter()
        .find(|p| {
            p.assignment == [("add_comm_group".to_string(), "add_group".to_string()), ("ring".into(), "semiring".into())]
        })
        .unwrap();
    assert_eq!(default.failing.len(), 1);
    assert!(default.failing[0].starts_with("ring -> add_comm_monoid"));
}

#[test]
fn single_class_is_vacuously_coherent() {
    let ast = parse("class a (α : Type) := (x : α)").unwrap();
    let r = spanning_search(&ast, off()).unwrap();
    assert_eq!((r.coherent, r.placements.len()), (1, 1));
}
