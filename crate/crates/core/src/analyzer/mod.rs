//! Diamond enumeration and coherence checking over the instance graph.
//!
//! The graph has one edge per forgetful instance (derived class → parent).
//! A diamond is a pair of distinct paths with the same endpoints; its oracle
//! verdict comes from the kernel, its predicted verdict from the last edges
//! of the two paths alone.

mod random;
mod report;
mod search;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::elaborator::{ElabFailure, Elaboration, Encoding, InstanceInfo, InstanceKind};
use crate::kernel::{defeq, fresh_name, infer_type, DefEqConfig, Environment, KernelError, Name, TeleEntry, Telescope, Term};

pub use random::{random_hierarchy, RandomParams};
pub use report::{report_json, report_text, ReportSummary};
pub use search::{spanning_search, Placement, SpanningReport};

pub const DEFAULT_MAX_PATH_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyzeError {
    #[error("instance graph has a cycle through {}", .0.join(" -> "))]
    CycleDetected(Vec<Name>),
    #[error("max path length must be at least 2, got {0}")]
    PathLength(usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Elab(Box<ElabFailure>),
}

impl From<ElabFailure> for AnalyzeError {
    fn from(e: ElabFailure) -> Self {
        AnalyzeError::Elab(Box::new(e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Preferred,
    NonPreferred,
    Flat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: Name,
    pub to: Name,
    pub decl: Name,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HierGraph {
    pub nodes: Vec<Name>,
    pub edges: Vec<Edge>,
}

impl HierGraph {
    fn out_edges<'a>(&'a self, node: &'a str) -> impl Iterator<Item = (usize, &'a Edge)> + 'a {
        self.edges.iter().enumerate().filter(move |(_, e)| e.from == node)
    }

    fn node_index(&self, n: &str) -> usize {
        self.nodes.iter().position(|m| m == n).unwrap_or(usize::MAX)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diamond {
    pub source: Name,
    pub target: Name,
    pub path_a: Vec<Edge>,
    pub path_b: Vec<Edge>,
}

impl Diamond {
    pub fn path_names(path: &[Edge]) -> Vec<&str> {
        path.iter().map(|e| e.decl.as_str()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coherence {
    Commuting,
    NotCommuting,
}

impl Coherence {
    pub fn commutes(self) -> bool {
        self == Coherence::Commuting
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Coherence::Commuting
        } else {
            Coherence::NotCommuting
        }
    }
}

impl std::fmt::Display for Coherence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Coherence::Commuting => "commuting",
            Coherence::NotCommuting => "not-commuting",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DiamondReport {
    pub diamond: Diamond,
    pub ctx: Telescope,
    pub term_a: Term,
    pub term_b: Term,
    pub oracle: Coherence,
    pub predictor: Coherence,
    pub config: DefEqConfig,
}

impl DiamondReport {
    pub fn agrees(&self) -> bool {
        self.oracle == self.predictor
    }
}

/// One edge per forgetful instance; user instances are not edges.
pub fn build_graph(env: &Environment, instances: &[InstanceInfo], encoding: Encoding) -> Result<HierGraph, AnalyzeError> {
    let mut nodes: Vec<Name> = env
        .iter()
        .filter_map(|d| env.get_struct(d.name()).filter(|s| s.is_class).map(|s| s.name.clone()))
        .collect();
    nodes.sort_by_key(|n| env.position(n));
    let mut edges = Vec::new();
    for i in instances {
        let Some(from) = &i.from else { continue };
        let kind = match (encoding, i.kind) {
            (_, InstanceKind::UserDeclared) => continue,
            (Encoding::Flat, _) => EdgeKind::Flat,
            (_, InstanceKind::PreferredProjection) => EdgeKind::Preferred,
            (_, InstanceKind::SynthesizedConstructor) => EdgeKind::NonPreferred,
        };
        edges.push(Edge { from: from.clone(), to: i.to.clone(), decl: i.decl.clone(), kind });
    }
    let graph = HierGraph { nodes, edges };
    if let Some(cycle) = find_cycle(&graph) {
        return Err(AnalyzeError::CycleDetected(cycle));
    }
    Ok(graph)
}

fn find_cycle(g: &HierGraph) -> Option<Vec<Name>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    fn visit<'a>(g: &'a HierGraph, n: &'a str, state: &mut HashMap<&'a str, u8>, stack: &mut Vec<&'a str>) -> Option<Vec<Name>> {
        match state.get(n) {
            Some(2) => return None,
            Some(1) => {
                let start = stack.iter().position(|m| *m == n).unwrap_or(0);
                let mut cyc: Vec<Name> = stack[start..].iter().map(|s| s.to_string()).collect();
                cyc.push(n.to_string());
                return Some(cyc);
            }
            _ => {}
        }
        state.insert(n, 1);
        stack.push(n);
        for (_, e) in g.out_edges(n) {
            if let Some(c) = visit(g, &e.to, state, stack) {
                return Some(c);
            }
        }
        stack.pop();
        state.insert(n, 2);
        None
    }
    let mut state = HashMap::new();
    for n in &g.nodes {
        if let Some(c) = visit(g, n, &mut state, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

/// All paths (as edge index lists) from `node` with 1..=max_len edges.
fn paths_from(g: &HierGraph, node: &str, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = g.out_edges(node).map(|(i, _)| vec![i]).collect();
    stack.reverse();
    while let Some(p) = stack.pop() {
        let last = &g.edges[*p.last().unwrap()].to;
        if p.len() < max_len {
            let mut next: Vec<Vec<usize>> = g
                .out_edges(last)
                .map(|(i, _)| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
                .collect();
            next.reverse();
            stack.extend(next);
        }
        out.push(p);
    }
    out
}

/// Unordered pairs of distinct same-endpoint paths of at most `max_path_len`
/// edges, ordered by source node, target node, then path.
pub fn enumerate_diamonds(g: &HierGraph, max_path_len: usize) -> Result<Vec<Diamond>, AnalyzeError> {
    if max_path_len < 2 {
        return Err(AnalyzeError::PathLength(max_path_len));
    }
    let mut out = Vec::new();
    for source in &g.nodes {
        let mut by_target: Vec<(usize, Vec<usize>)> = paths_from(g, source, max_path_len)
            .into_iter()
            .map(|p| (g.node_index(&g.edges[*p.last().unwrap()].to), p))
            .collect();
        by_target.sort();
        let mut i = 0;
        while i < by_target.len() {
            let t = by_target[i].0;
            let j = by_target[i..].iter().position(|(u, _)| *u != t).map_or(by_target.len(), |k| i + k);
            let group = &by_target[i..j];
            for a in 0..group.len() {
                for b in a + 1..group.len() {
                    let edges = |p: &[usize]| p.iter().map(|&k| g.edges[k].clone()).collect::<Vec<_>>();
                    let path_a = edges(&group[a].1);
                    out.push(Diamond {
                        source: source.clone(),
                        target: path_a.last().unwrap().to.clone(),
                        path_a,
                        path_b: edges(&group[b].1),
                    });
                }
            }
            i = j;
        }
    }
    Ok(out)
}

/// The last-segment rule: commuting iff both last edges are preferred or
/// both are not (flat edges count as not preferred).
pub fn predict_diamond(d: &Diamond) -> Coherence {
    let preferred = |p: &[Edge]| p.last().is_some_and(|e| e.kind == EdgeKind::Preferred);
    Coherence::from_bool(preferred(&d.path_a) == preferred(&d.path_b))
}

/// Composite of forgetful instances along `path`, applied to `start`.
fn composite(env: &Environment, ctx: &Telescope, start: Term, path: &[Edge]) -> Result<Term, KernelError> {
    let mut cur = start;
    for e in path {
        let ty = infer_type(env, ctx, &cur)?;
        let args: Vec<Term> = ty.spine().1.into_iter().cloned().collect();
        cur = Term::app(Term::apps(Term::constant(&e.decl), args), cur);
    }
    Ok(cur)
}

/// Context `params… (i : Source params…)` for a diamond's source class.
pub fn source_context(env: &Environment, source: &str) -> Result<(Telescope, Term), KernelError> {
    let s = env.get_struct(source).ok_or_else(|| KernelError::UnknownConstant(source.to_string()))?;
    let mut ctx = s.params.clone();
    let name = if ctx.lookup("i").is_some() || env.contains("i") { fresh_name("i") } else { "i".to_string() };
    let ty = Term::apps(Term::constant(source), ctx.as_fvars());
    ctx.push(TeleEntry::explicit(name.clone(), ty));
    Ok((ctx, Term::fvar(name)))
}

pub fn check_diamond(env: &Environment, config: DefEqConfig, d: &Diamond) -> Result<DiamondReport, AnalyzeError> {
    let (ctx, i) = source_context(env, &d.source)?;
    let term_a = composite(env, &ctx, i.clone(), &d.path_a)?;
    let term_b = composite(env, &ctx, i, &d.path_b)?;
    let verdict = defeq(env, &config, &ctx, &term_a, &term_b)?.verdict;
    Ok(DiamondReport {
        diamond: d.clone(),
        ctx,
        term_a,
        term_b,
        oracle: Coherence::from_bool(verdict.is_equal()),
        predictor: predict_diamond(d),
        config,
    })
}

/// Graph, diamonds and reports for one elaboration.
pub fn analyze(el: &Elaboration, config: DefEqConfig, max_path_len: usize) -> Result<Vec<DiamondReport>, AnalyzeError> {
    let g = build_graph(&el.env, &el.instances, el.strategy.encoding)?;
    enumerate_diamonds(&g, max_path_len)?.iter().map(|d| check_diamond(&el.env, config, d)).collect()
}
