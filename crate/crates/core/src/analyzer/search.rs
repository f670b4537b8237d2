//! Exhaustive search over preferred-parent placements.

use std::collections::BTreeMap;
use std::thread;

use serde::Serialize;

use crate::elaborator::{elaborate, Encoding, EncodingStrategy};
use crate::kernel::{DefEqConfig, Name};
use crate::surface::SurfaceModule;

use super::{analyze, AnalyzeError, Coherence, Diamond, DEFAULT_MAX_PATH_LEN};

#[derive(Clone, Debug, Serialize)]
pub struct Placement {
    /// (class, first parent) for every class with two or more parents.
    pub assignment: Vec<(Name, Name)>,
    pub total: usize,
    pub commuting: usize,
    pub all_commute: bool,
    /// Diamonds the oracle finds not commuting.
    pub failing: Vec<String>,
    /// Whether the last-segment rule expects every diamond to commute.
    pub predicted_all_commute: bool,
    /// Diamonds whose verdict changed when the remaining parents were
    /// reversed; empty when the order of non-first parents is immaterial.
    pub order_violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanningReport {
    pub config: DefEqConfig,
    pub placements: Vec<Placement>,
    /// Placements where the oracle finds every diamond commuting.
    pub coherent: usize,
    /// Placements the last-segment rule considers fully coherent.
    pub predicted_coherent: usize,
}

/// diamond key → (oracle, predictor)
type Verdicts = BTreeMap<String, (Coherence, Coherence)>;

/// Independent of which path the enumeration happened to list first.
fn diamond_key(d: &Diamond) -> String {
    let mut paths = [Diamond::path_names(&d.path_a).join(", "), Diamond::path_names(&d.path_b).join(", ")];
    paths.sort();
    format!("{} -> {}: [{}] vs [{}]", d.source, d.target, paths[0], paths[1])
}

fn verdicts(ast: &SurfaceModule, strategy: &EncodingStrategy, eta: DefEqConfig) -> Result<Verdicts, AnalyzeError> {
    let el = elaborate(ast, strategy)?;
    Ok(analyze(&el, eta, DEFAULT_MAX_PATH_LEN)?.into_iter().map(|r| (diamond_key(&r.diamond), (r.oracle, r.predictor))).collect())
}

fn placement(
    ast: &SurfaceModule,
    multi: &[(Name, Vec<Name>)],
    choice: &[usize],
    eta: DefEqConfig,
) -> Result<Placement, AnalyzeError> {
    let mut base = EncodingStrategy::new(Encoding::Nested);
    let mut reversed = EncodingStrategy::new(Encoding::Nested);
    let mut assignment = Vec::new();
    let mut any_rest = false;
    for ((class, parents), &k) in multi.iter().zip(choice) {
        let first = parents[k].clone();
        let mut rest: Vec<Name> = parents.iter().filter(|p| **p != first).cloned().collect();
        any_rest |= rest.len() >= 2;
        rest.reverse();
        base = base.with_order(class, vec![first.clone()]);
        reversed = reversed.with_order(class, std::iter::once(first.clone()).chain(rest).collect());
        assignment.push((class.clone(), first));
    }
    let v = verdicts(ast, &base, eta)?;
    let mut order_violations = Vec::new();
    if any_rest {
        let w = verdicts(ast, &reversed, eta)?;
        for (k, c) in &v {
            if w.get(k).map(|x| x.0) != Some(c.0) {
                order_violations.push(k.clone());
            }
        }
        for k in w.keys().filter(|k| !v.contains_key(*k)) {
            order_violations.push(k.clone());
        }
    }
    let commuting = v.values().filter(|c| c.0.commutes()).count();
    Ok(Placement {
        assignment,
        total: v.len(),
        commuting,
        all_commute: commuting == v.len(),
        predicted_all_commute: v.values().all(|c| c.1.commutes()),
        failing: v.iter().filter(|(_, c)| !c.0.commutes()).map(|(k, _)| k.clone()).collect(),
        order_violations,
    })
}

/// Every choice of first parent for every class with several parents,
/// elaborated under the nested encoding and checked with `eta`.
pub fn spanning_search(ast: &SurfaceModule, eta: DefEqConfig) -> Result<SpanningReport, AnalyzeError> {
    let multi: Vec<(Name, Vec<Name>)> = ast
        .classes()
        .filter(|c| c.is_class)
        .map(|c| (c.name.clone(), c.parent_names()))
        .filter(|(_, ps)| ps.len() >= 2)
        .collect();
    let mut choices: Vec<Vec<usize>> = vec![vec![]];
    for (_, ps) in &multi {
        choices = choices
            .into_iter()
            .flat_map(|c| {
                (0..ps.len()).map(move |k| {
                    let mut c = c.clone();
                    c.push(k);
                    c
                })
            })
            .collect();
    }
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(choices.len()).max(1);
    let chunk = choices.len().div_ceil(workers);
    let results: Vec<Result<Placement, AnalyzeError>> = thread::scope(|s| {
        let handles: Vec<_> = choices
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(|c| placement(ast, &multi, c, eta)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("placement worker panicked")).collect()
    });
    let placements = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let coherent = placements.iter().filter(|p| p.all_commute).count();
    let predicted_coherent = placements.iter().filter(|p| p.predicted_all_commute).count();
    Ok(SpanningReport { config: eta, placements, coherent, predicted_coherent })
}
