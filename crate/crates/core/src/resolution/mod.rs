//! Typeclass instance search.
//!
//! Depth-first, with backtracking across sibling subgoals. Candidates for a
//! goal are the instance-implicit context entries (most recent first), then
//! registered instances by priority (descending) and recency. Each candidate's
//! Π-binders become metavariables; its result type is unified with the goal
//! using the unifier's η setting; instance-implicit metavariables still
//! unassigned afterwards become subgoals.

use thiserror::Error;

use crate::elaborator::InstanceInfo;
use crate::kernel::{
    defeq, infer_type, unify, BinderInfo, DefEqConfig, Environment, KernelError, MetaCtx, MetaId, Telescope, Term,
};

pub const DEFAULT_MAX_DEPTH: usize = 32;

/// A resolution target: a class applied to arguments, over a context.
#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    pub ctx: Telescope,
    pub target: Term,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_depth: usize,
    pub eta: DefEqConfig,
    pub trace: bool,
}

impl SearchConfig {
    pub fn new(eta: DefEqConfig) -> Self {
        SearchConfig { eta, ..Self::default() }
    }

    pub fn with_max_depth(self, max_depth: usize) -> Result<Self, String> {
        if max_depth == 0 {
            return Err("max depth must be positive".into());
        }
        Ok(SearchConfig { max_depth, ..self })
    }

    pub fn traced(self, trace: bool) -> Self {
        SearchConfig { trace, ..self }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_depth: DEFAULT_MAX_DEPTH, eta: DefEqConfig::default(), trace: false }
    }
}

#[derive(Clone, Debug)]
pub struct Resolution {
    /// The instance term.
    pub term: Term,
    /// The goal, with any missing instance arguments filled in.
    pub target: Term,
    pub trace: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ResolveError {
    #[error("failed to synthesize instance {target}")]
    NotFound { target: Term, trace: Vec<String> },
    #[error("maximum search depth {max_depth} exceeded while synthesizing {target}")]
    DepthExceeded { target: Term, max_depth: usize, trace: Vec<String> },
    #[error("{0} is not an application of a class")]
    NotAClass(Term),
    #[error("cannot complete {target}: explicit parameter `{param}` is missing")]
    MissingExplicit { target: Term, param: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl ResolveError {
    pub fn trace(&self) -> &[String] {
        match self {
            ResolveError::NotFound { trace, .. } | ResolveError::DepthExceeded { trace, .. } => trace,
            _ => &[],
        }
    }
}

struct Candidate {
    name: String,
    head: Term,
    ty: Term,
}

struct Search<'a> {
    env: &'a Environment,
    instances: &'a [InstanceInfo],
    ctx: &'a Telescope,
    cfg: SearchConfig,
    trace: Vec<String>,
    depth_hit: bool,
}

#[derive(Clone)]
struct Frame {
    meta: MetaId,
    depth: usize,
    path: Vec<Term>,
}

impl<'a> Search<'a> {
    fn log(&mut self, depth: usize, line: String) {
        self.trace.push(format!("{}{line}", "  ".repeat(depth)));
    }

    fn candidates(&self, class: &str) -> Vec<Candidate> {
        let mut out = Vec::new();
        for e in self.ctx.0.iter().rev() {
            if e.info == BinderInfo::InstImplicit && e.ty.head_const() == Some(class) {
                out.push(Candidate { name: e.name.clone(), head: Term::fvar(&e.name), ty: e.ty.clone() });
            }
        }
        let mut globals: Vec<(usize, &InstanceInfo)> =
            self.instances.iter().enumerate().filter(|(_, i)| i.to == class).collect();
        globals.sort_by(|(ia, a), (ib, b)| b.priority.cmp(&a.priority).then(ib.cmp(ia)));
        for (_, i) in globals {
            if let Some(d) = self.env.get(&i.decl) {
                out.push(Candidate { name: i.decl.clone(), head: Term::constant(&i.decl), ty: d.ty() });
            }
        }
        out
    }

    /// Solves the frames in order; on success returns the final metacontext.
    fn run(&mut self, mut stack: Vec<Frame>, metas: MetaCtx) -> Option<MetaCtx> {
        let Some(frame) = stack.pop() else { return Some(metas) };
        if metas.is_assigned(frame.meta) {
            return self.run(stack, metas);
        }
        let goal = metas.instantiate(metas.ty(frame.meta).expect("goal meta"));
        let d = frame.depth;
        self.log(d, format!("goal {goal}"));
        if frame.path.contains(&goal) {
            self.log(d, format!("pruned {goal}"));
            return None;
        }
        if d >= self.cfg.max_depth {
            self.depth_hit = true;
            self.log(d, format!("depth-limit {goal}"));
            return None;
        }
        let class = match goal.head_const() {
            Some(c) => c.to_string(),
            None => {
                self.log(d, format!("fail {goal}"));
                return None;
            }
        };
        for cand in self.candidates(&class) {
            self.log(d + 1, format!("try {}", cand.name));
            let mut mc = metas.clone();
            let mut ty = cand.ty.clone();
            let mut args = Vec::new();
            let mut new_metas = Vec::new();
            while let Term::Pi { name, info, ty: dom, body } = ty {
                let m = mc.fresh(name, *dom, info);
                args.push(Term::Meta(m));
                new_metas.push((m, info));
                ty = body.instantiate(&Term::Meta(m));
            }
            match unify(self.env, &self.cfg.eta, self.ctx, &mut mc, &ty, &goal) {
                Ok(u) => {
                    if self.cfg.trace {
                        for l in u.trace {
                            self.log(d + 2, l);
                        }
                    }
                    self.log(d + 1, "unify ok".into());
                }
                Err(f) => {
                    if self.cfg.trace {
                        for l in f.trace {
                            self.log(d + 2, l);
                        }
                    }
                    self.log(d + 1, format!("unify fail: {}", f.error));
                    continue;
                }
            }
            if let Some((m, _)) =
                new_metas.iter().find(|(m, info)| *info == BinderInfo::Explicit && !mc.is_assigned(*m))
            {
                self.log(d + 1, format!("unify fail: explicit argument {m} left undetermined"));
                continue;
            }
            mc.assign(frame.meta, Term::apps(cand.head.clone(), args));
            let mut next = stack.clone();
            let mut path = frame.path.clone();
            path.push(goal.clone());
            // Subgoals in binder order: push reversed so the first is popped first.
            for (m, info) in new_metas.iter().rev() {
                if *info == BinderInfo::InstImplicit && !mc.is_assigned(*m) {
                    next.push(Frame { meta: *m, depth: d + 1, path: path.clone() });
                }
            }
            if let Some(done) = self.run(next, mc) {
                let solved = done.instantiate(&Term::Meta(frame.meta));
                self.log(d, format!("solved {solved}"));
                return Some(done);
            }
        }
        self.log(d, format!("fail {goal}"));
        None
    }
}

fn check_class(env: &Environment, target: &Term) -> Result<String, ResolveError> {
    match target.head_const() {
        Some(h) if env.is_class(h) => Ok(h.to_string()),
        _ => Err(ResolveError::NotAClass(target.clone())),
    }
}

fn search_one(
    env: &Environment,
    instances: &[InstanceInfo],
    ctx: &Telescope,
    target: &Term,
    cfg: &SearchConfig,
    trace: &mut Vec<String>,
) -> Result<Term, ResolveError> {
    let mut s = Search { env, instances, ctx, cfg: *cfg, trace: Vec::new(), depth_hit: false };
    let mut metas = MetaCtx::new();
    let root = metas.fresh("inst", target.clone(), BinderInfo::InstImplicit);
    let result = s.run(vec![Frame { meta: root, depth: 0, path: Vec::new() }], metas);
    trace.append(&mut s.trace);
    match result {
        Some(mc) => {
            let term = mc.instantiate(&Term::Meta(root));
            // Post-hoc soundness check with the kernel using the search's η.
            let ty = infer_type(env, ctx, &term)?;
            let kcfg = cfg.eta.unifier_as_kernel();
            if !defeq(env, &kcfg, ctx, &ty, target)?.verdict.is_equal() {
                return Err(KernelError::IllTyped(format!("instance {term} has type {ty}, not {target}")).into());
            }
            Ok(term)
        }
        None if s.depth_hit => Err(ResolveError::DepthExceeded {
            target: target.clone(),
            max_depth: cfg.max_depth,
            trace: trace.clone(),
        }),
        None => Err(ResolveError::NotFound { target: target.clone(), trace: trace.clone() }),
    }
}

/// Fills missing trailing instance-implicit arguments of a class application
/// by resolving each one in turn.
pub fn complete_target(
    env: &Environment,
    instances: &[InstanceInfo],
    ctx: &Telescope,
    target: &Term,
    cfg: &SearchConfig,
) -> Result<Term, ResolveError> {
    complete_traced(env, instances, ctx, target, cfg, &mut Vec::new())
}

fn complete_traced(
    env: &Environment,
    instances: &[InstanceInfo],
    ctx: &Telescope,
    target: &Term,
    cfg: &SearchConfig,
    trace: &mut Vec<String>,
) -> Result<Term, ResolveError> {
    let class = check_class(env, target)?;
    let decl = env.get_struct(&class).expect("class is a structure");
    let mut args: Vec<Term> = target.spine().1.into_iter().cloned().collect();
    if args.len() > decl.params.len() {
        return Err(ResolveError::NotAClass(target.clone()));
    }
    for entry in decl.params.0[args.len()..].iter() {
        let given = decl.params.0.iter().take(args.len()).cloned().collect::<Telescope>();
        let ty = entry.ty.subst_fvars(&given.bind(&args));
        match entry.info {
            BinderInfo::Explicit => {
                return Err(ResolveError::MissingExplicit { target: target.clone(), param: entry.name.clone() })
            }
            BinderInfo::InstImplicit => {
                trace.push(format!("complete {} : {ty}", entry.name));
                let t = search_one(env, instances, ctx, &ty, cfg, trace)?;
                args.push(t);
            }
        }
    }
    Ok(Term::apps(Term::constant(class), args))
}

/// Finds an instance of `goal.target`. Missing trailing instance arguments of
/// the target are resolved first.
pub fn resolve(
    env: &Environment,
    instances: &[InstanceInfo],
    goal: &Goal,
    cfg: &SearchConfig,
) -> Result<Resolution, ResolveError> {
    let mut trace = Vec::new();
    let target = complete_traced(env, instances, &goal.ctx, &goal.target, cfg, &mut trace)?;
    let term = search_one(env, instances, &goal.ctx, &target, cfg, &mut trace)?;
    Ok(Resolution { term, target, trace })
}

#[cfg(test)]
mod tests;
