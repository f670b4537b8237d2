#![allow(dead_code)]

use hierlab::elaborator::{elaborate, Elaboration, Encoding, EncodingStrategy};
use hierlab::kernel::{defeq, DefEqConfig, Verdict};
use hierlab::resolution::{resolve, Goal, Resolution, ResolveError, SearchConfig};
use hierlab::surface::parse;

pub fn elab(src: &str, enc: Encoding) -> Elaboration {
    elab_with(src, EncodingStrategy::new(enc))
}

pub fn elab_with(src: &str, strategy: EncodingStrategy) -> Elaboration {
    elaborate(&parse(src).expect("parses"), &strategy).expect("elaborates")
}

pub fn defeq_label(el: &Elaboration, label: &str, cfg: DefEqConfig) -> Verdict {
    let d = el.defeq(label).expect("defeq label");
    defeq(&el.env, &cfg, &d.ctx, &d.lhs, &d.rhs).expect("kernel").verdict
}

pub fn resolve_label(el: &Elaboration, label: &str, cfg: DefEqConfig) -> Result<Resolution, ResolveError> {
    let g = el.goal(label).expect("goal label");
    resolve(&el.env, &el.instances, &Goal { ctx: g.ctx.clone(), target: g.target.clone() }, &SearchConfig::new(cfg))
}

pub fn off() -> DefEqConfig {
    DefEqConfig::new(false, false)
}

pub fn kernel_eta() -> DefEqConfig {
    DefEqConfig::new(true, false)
}

pub fn both_eta() -> DefEqConfig {
    DefEqConfig::new(true, true)
}
