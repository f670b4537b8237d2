//! Seeded random class hierarchies, emitted as `.hier` source.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Field pool; every name has one fixed type so merges never clash.
const POOL: &[(&str, &str)] = &[
    ("zero", "α"),
    ("one", "α"),
    ("add", "α → α → α"),
    ("mul", "α → α → α"),
    ("neg", "α → α"),
    ("inv", "α → α"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomParams {
    pub max_classes: usize,
    pub max_parents: usize,
    pub max_fields: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { max_classes: 6, max_parents: 3, max_fields: 4 }
    }
}

/// Classes `c0…cn` where each extends distinct earlier classes, so the
/// result is acyclic by construction. Own fields never repeat an inherited
/// one; overlaps come from shared ancestry and from siblings drawing the
/// same pool names.
pub fn random_hierarchy(seed: u64, params: &RandomParams) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=params.max_classes.max(1));
    let mut leaves: Vec<BTreeSet<usize>> = Vec::new();
    let mut out = format!("-- random hierarchy, seed {seed}\n");
    for k in 0..n {
        let np = rng.gen_range(0..=params.max_parents.min(k));
        let mut parents: Vec<usize> = sample(&mut rng, k.max(1), np).into_vec();
        parents.sort_unstable();
        let inherited: BTreeSet<usize> = parents.iter().flat_map(|&p| leaves[p].iter().copied()).collect();
        let free: Vec<usize> = (0..POOL.len()).filter(|f| !inherited.contains(f)).collect();
        let nf = rng.gen_range(0..=params.max_fields.min(free.len()));
        let mut own: Vec<usize> = sample(&mut rng, free.len(), nf).into_iter().map(|i| free[i]).collect();
        own.sort_unstable();

        out.push_str(&format!("class c{k} (α : Type)"));
        if !parents.is_empty() {
            let ps: Vec<String> = parents.iter().map(|p| format!("c{p} α")).collect();
            out.push_str(&format!(" extends {}", ps.join(", ")));
        }
        if !own.is_empty() {
            out.push_str(" :=");
            for &f in &own {
                out.push_str(&format!("\n  ({} : {})", POOL[f].0, POOL[f].1));
            }
        }
        out.push('\n');
        leaves.push(inherited.into_iter().chain(own).collect());
    }
    out
}
