//! Definitional equality and first-order unification.
//!
//! Both share one engine: compare modulo α, assign bare metavariables (when a
//! metavariable context is supplied), try same-head arguments before
//! unfolding, then reduce both sides to weak-head normal form and compare
//! structurally. Structural η is the last resort: a constructor application
//! `S.mk p v₁ … vₙ` equals a neutral `u : S p` when every `vᵢ` equals the
//! projection `u.fᵢ`.

use serde::Serialize;
use thiserror::Error;

use super::env::{DefEqConfig, Environment, TeleEntry, Telescope};
use super::infer::{fresh_name, Infer};
use super::meta::{MetaCtx, Substitution};
use super::term::{MetaId, Term};
use super::whnf::Reducer;
use super::KernelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equal,
    NotEqual,
}

impl Verdict {
    pub fn is_equal(self) -> bool {
        self == Verdict::Equal
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Equal => "equal",
            Verdict::NotEqual => "not-equal",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DefEqOutcome {
    pub verdict: Verdict,
    pub trace: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum UnifyError {
    #[error("occurs check: {0} would become cyclic")]
    OccursCheck(MetaId),
    #[error("cannot unify {0} with {1}")]
    Mismatch(Box<Term>, Box<Term>),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Clone, Debug)]
pub struct Unified {
    pub subst: Substitution,
    pub trace: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct UnifyFailure {
    pub error: UnifyError,
    pub trace: Vec<String>,
}

#[derive(Debug)]
pub(crate) enum ConvError {
    Kernel(KernelError),
    Occurs(MetaId),
}

impl From<KernelError> for ConvError {
    fn from(e: KernelError) -> Self {
        ConvError::Kernel(e)
    }
}

impl From<ConvError> for KernelError {
    fn from(e: ConvError) -> Self {
        match e {
            ConvError::Kernel(k) => k,
            // Unreachable without an assignable metavariable context.
            ConvError::Occurs(m) => KernelError::IllTyped(format!("cyclic metavariable {m}")),
        }
    }
}

pub(crate) struct Conv<'a> {
    env: &'a Environment,
    config: DefEqConfig,
    eta: bool,
    ctx: Telescope,
    metas: Option<&'a mut MetaCtx>,
    pub(crate) trace: Vec<String>,
    pub(crate) mismatch: Option<(Term, Term)>,
    depth: usize,
}

impl<'a> Conv<'a> {
    pub(crate) fn new(
        env: &'a Environment,
        config: DefEqConfig,
        eta: bool,
        ctx: Telescope,
        metas: Option<&'a mut MetaCtx>,
    ) -> Self {
        Conv { env, config, eta, ctx, metas, trace: Vec::new(), mismatch: None, depth: 0 }
    }

    fn log(&mut self, line: String) {
        self.trace.push(format!("{}{line}", "  ".repeat(self.depth)));
    }

    fn inst(&self, t: &Term) -> Term {
        match &self.metas {
            Some(mc) => mc.instantiate(t),
            None => t.clone(),
        }
    }

    fn whnf(&mut self, t: &Term) -> Result<Term, KernelError> {
        let mut steps = Vec::new();
        let r = Reducer::new(self.env, &self.config).whnf(t, &mut Some(&mut steps))?;
        for s in steps {
            self.log(s);
        }
        Ok(r)
    }

    fn snapshot(&self) -> Option<MetaCtx> {
        self.metas.as_deref().cloned()
    }

    fn restore(&mut self, snap: Option<MetaCtx>) {
        if let (Some(mc), Some(s)) = (self.metas.as_deref_mut(), snap) {
            *mc = s;
        }
    }

    fn unassigned_meta(&self, t: &Term) -> Option<MetaId> {
        match (t, &self.metas) {
            (Term::Meta(m), Some(mc)) if !mc.is_assigned(*m) => Some(*m),
            _ => None,
        }
    }

    fn try_assign(&mut self, a: &Term, b: &Term) -> Result<Option<bool>, ConvError> {
        for (m, other) in [(self.unassigned_meta(a), b), (self.unassigned_meta(b), a)] {
            let Some(m) = m else { continue };
            if matches!(other, Term::Meta(x) if *x == m) {
                return Ok(Some(true));
            }
            if other.mentions_meta(m) {
                return Err(ConvError::Occurs(m));
            }
            self.log(format!("assign {m} := {other}"));
            self.metas.as_deref_mut().unwrap().assign(m, other.clone());
            return Ok(Some(true));
        }
        Ok(None)
    }

    pub(crate) fn is_def_eq(&mut self, a: &Term, b: &Term) -> Result<bool, ConvError> {
        let a = self.inst(a);
        let b = self.inst(b);
        if a == b {
            return Ok(true);
        }
        if let Some(r) = self.try_assign(&a, &b)? {
            return Ok(r);
        }
        if self.same_head_args(&a, &b)? {
            return Ok(true);
        }
        let wa = self.whnf(&a)?;
        let wb = self.whnf(&b)?;
        if wa == wb {
            return Ok(true);
        }
        if let Some(r) = self.try_assign(&wa, &wb)? {
            return Ok(r);
        }
        if self.conv_whnf(&wa, &wb)? {
            return Ok(true);
        }
        if self.eta {
            if let Some(r) = self.try_eta(&wa, &wb)? {
                return Ok(r);
            }
            if let Some(r) = self.try_eta(&wb, &wa)? {
                return Ok(r);
            }
        }
        if self.mismatch.is_none() {
            self.mismatch = Some((wa, wb));
        }
        Ok(false)
    }

    /// `d a₁…aₙ ≟ d b₁…bₙ` for a definition `d`: compare the arguments before
    /// unfolding. On failure any assignments made are rolled back.
    fn same_head_args(&mut self, a: &Term, b: &Term) -> Result<bool, ConvError> {
        let (ha, aa) = a.spine();
        let (hb, ab) = b.spine();
        let same = matches!((ha, hb), (Term::Const(x), Term::Const(y))
            if x == y && self.env.get_def(x).is_some());
        if !same || aa.len() != ab.len() || aa.is_empty() {
            return Ok(false);
        }
        let snap = self.snapshot();
        let saved_mismatch = self.mismatch.clone();
        let trace_len = self.trace.len();
        if !self.args_def_eq(aa, ab)? {
            self.restore(snap);
            self.mismatch = saved_mismatch;
            self.trace.truncate(trace_len);
            return Ok(false);
        }
        Ok(true)
    }

    /// Pairwise argument comparison. A pair that fails while still mentioning
    /// unassigned metavariables is postponed and retried once later pairs
    /// have had a chance to assign them.
    fn args_def_eq(&mut self, xs: Vec<&Term>, ys: Vec<&Term>) -> Result<bool, ConvError> {
        let mut pending: Vec<(&Term, &Term)> = xs.into_iter().zip(ys).collect();
        loop {
            let mut postponed = Vec::new();
            let before = pending.len();
            for (x, y) in pending {
                let snap = self.snapshot();
                if self.is_def_eq(x, y)? {
                    continue;
                }
                if self.metas.is_some() && (self.inst(x).has_meta() || self.inst(y).has_meta()) {
                    self.restore(snap);
                    self.log("postpone".into());
                    postponed.push((x, y));
                } else {
                    return Ok(false);
                }
            }
            if postponed.is_empty() {
                return Ok(true);
            }
            if postponed.len() == before {
                return Ok(false);
            }
            pending = postponed;
        }
    }

    fn conv_whnf(&mut self, a: &Term, b: &Term) -> Result<bool, ConvError> {
        match (a, b) {
            (Term::Sort, Term::Sort) => Ok(true),
            (
                Term::Pi { name, info, ty: t1, body: b1 },
                Term::Pi { ty: t2, body: b2, .. },
            )
            | (
                Term::Lam { name, info, ty: t1, body: b1 },
                Term::Lam { ty: t2, body: b2, .. },
            ) => {
                if !self.is_def_eq(t1, t2)? {
                    return Ok(false);
                }
                let x = fresh_name(name);
                let fv = Term::fvar(&x);
                self.ctx.push(TeleEntry { name: x, ty: (**t1).clone(), info: *info });
                let r = self.is_def_eq(&b1.instantiate(&fv), &b2.instantiate(&fv));
                self.ctx.0.pop();
                r
            }
            (
                Term::Mk { strukt: s1, params: p1, fields: f1 },
                Term::Mk { strukt: s2, params: p2, fields: f2 },
            ) => {
                if s1 != s2 || p1.len() != p2.len() || f1.len() != f2.len() {
                    return Ok(false);
                }
                for (x, y) in p1.iter().chain(f1).zip(p2.iter().chain(f2)) {
                    if !self.is_def_eq(x, y)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => {
                let (ha, aa) = a.spine();
                let (hb, ab) = b.spine();
                if aa.len() != ab.len() || !self.conv_head(ha, hb)? {
                    return Ok(false);
                }
                self.args_def_eq(aa, ab)
            }
        }
    }

    fn conv_head(&mut self, a: &Term, b: &Term) -> Result<bool, ConvError> {
        match (a, b) {
            (Term::FreeVar(x), Term::FreeVar(y)) | (Term::Const(x), Term::Const(y)) => Ok(x == y),
            (Term::Meta(x), Term::Meta(y)) => Ok(x == y),
            (
                Term::Proj { strukt: s1, field: f1, target: t1 },
                Term::Proj { strukt: s2, field: f2, target: t2 },
            ) if s1 == s2 && f1 == f2 => self.is_def_eq(t1, t2),
            _ => Ok(false),
        }
    }

    /// η for structures: `mk` is a constructor application, `other` is anything
    /// that is not itself a constructor, binder or sort.
    fn try_eta(&mut self, mk: &Term, other: &Term) -> Result<Option<bool>, ConvError> {
        let Term::Mk { strukt, fields, .. } = mk else { return Ok(None) };
        if matches!(other, Term::Mk { .. } | Term::Lam { .. } | Term::Pi { .. } | Term::Sort) {
            return Ok(None);
        }
        // Best-effort type check: reject when `other` provably lives in another type.
        let other_ty = {
            let mut inf = Infer::new(self.env, self.config, self.ctx.clone(), self.metas.as_deref(), false);
            inf.infer(other).and_then(|ty| Reducer::new(self.env, &self.config).whnf(&ty, &mut None))
        };
        if let Ok(ty) = other_ty {
            if let Some(h) = ty.head_const() {
                if h != strukt {
                    return Ok(Some(false));
                }
            }
        }
        let decl = match self.env.get_struct(strukt) {
            Some(s) => s.clone(),
            None => return Err(KernelError::UnknownConstant(strukt.clone()).into()),
        };
        self.log(format!("eta {strukt}"));
        self.depth += 1;
        for (entry, value) in decl.fields.iter().zip(fields) {
            let p = Term::proj(strukt, &entry.name, other.clone());
            if !self.is_def_eq(value, &p)? {
                self.depth -= 1;
                return Ok(Some(false));
            }
        }
        self.depth -= 1;
        Ok(Some(true))
    }
}

/// Decides `a ≡ b` under the kernel's η setting (`config.eta_kernel`).
pub fn defeq(
    env: &Environment,
    config: &DefEqConfig,
    ctx: &Telescope,
    a: &Term,
    b: &Term,
) -> Result<DefEqOutcome, KernelError> {
    let mut conv = Conv::new(env, *config, config.eta_kernel, ctx.clone(), None);
    let equal = conv.is_def_eq(a, b)?;
    Ok(DefEqOutcome {
        verdict: if equal { Verdict::Equal } else { Verdict::NotEqual },
        trace: conv.trace,
    })
}

/// [`defeq`] where metavariables are rigid but may carry types from `metas`.
pub fn defeq_with_metas(
    env: &Environment,
    config: &DefEqConfig,
    ctx: &Telescope,
    metas: &MetaCtx,
    a: &Term,
    b: &Term,
) -> Result<DefEqOutcome, KernelError> {
    defeq(env, config, ctx, &metas.instantiate(a), &metas.instantiate(b))
}

/// Unifies `a` and `b`, assigning metavariables of `metas`, under the
/// unifier's η setting (`config.eta_unifier`). On failure `metas` may hold
/// partial assignments; callers that backtrack should work on a clone.
pub fn unify(
    env: &Environment,
    config: &DefEqConfig,
    ctx: &Telescope,
    metas: &mut MetaCtx,
    a: &Term,
    b: &Term,
) -> Result<Unified, UnifyFailure> {
    let mut conv = Conv::new(env, *config, config.eta_unifier, ctx.clone(), Some(metas));
    let result = conv.is_def_eq(a, b);
    let trace = std::mem::take(&mut conv.trace);
    let mismatch = conv.mismatch.take();
    drop(conv);
    match result {
        Ok(true) => Ok(Unified { subst: metas.substitution(), trace }),
        Ok(false) => {
            let (x, y) = mismatch.unwrap_or_else(|| (metas.instantiate(a), metas.instantiate(b)));
            Err(UnifyFailure { error: UnifyError::Mismatch(Box::new(x), Box::new(y)), trace })
        }
        Err(ConvError::Occurs(m)) => Err(UnifyFailure { error: UnifyError::OccursCheck(m), trace }),
        Err(ConvError::Kernel(k)) => Err(UnifyFailure { error: UnifyError::Kernel(k), trace }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{BinderInfo, Declaration, OpaqueDecl, StructDecl};

    fn point_env() -> Environment {
        let mut env = Environment::new();
        env.add(Declaration::Opaque(OpaqueDecl { name: "int".into(), binders: Telescope::new(), result: Term::Sort }))
            .unwrap();
        env.add(Declaration::Opaque(OpaqueDecl {
            name: "f".into(),
            binders: Telescope(vec![TeleEntry::explicit("n", Term::constant("int"))]),
            result: Term::constant("int"),
        }))
        .unwrap();
        env.add(Declaration::Struct(StructDecl {
            name: "point".into(),
            params: Telescope::new(),
            fields: Telescope(vec![
                TeleEntry::explicit("x", Term::constant("int")),
                TeleEntry::explicit("y", Term::constant("int")),
            ]),
            ctor: "point.mk".into(),
            is_class: false,
        }))
        .unwrap();
        env
    }

    fn eta_expanded(p: Term) -> Term {
        Term::Mk {
            strukt: "point".into(),
            params: vec![],
            fields: vec![Term::proj("point", "x", p.clone()), Term::proj("point", "y", p)],
        }
    }

    #[test]
    fn point_eta_depends_on_kernel_flag() {
        let env = point_env();
        let ctx = Telescope(vec![TeleEntry::explicit("p", Term::constant("point"))]);
        let p = Term::fvar("p");
        let mk = eta_expanded(p.clone());
        let off = defeq(&env, &DefEqConfig::new(false, false), &ctx, &p, &mk).unwrap();
        assert_eq!(off.verdict, Verdict::NotEqual);
        let on = defeq(&env, &DefEqConfig::new(true, false), &ctx, &p, &mk).unwrap();
        assert_eq!(on.verdict, Verdict::Equal);
        assert!(on.trace.iter().any(|l| l.trim() == "eta point"));
        // The unifier flag is irrelevant to the kernel.
        let unifier_only = defeq(&env, &DefEqConfig::new(false, true), &ctx, &mk, &p).unwrap();
        assert_eq!(unifier_only.verdict, Verdict::NotEqual);
    }

    #[test]
    fn eta_rejects_neutral_of_other_type() {
        let env = point_env();
        let ctx = Telescope(vec![TeleEntry::explicit("n", Term::constant("int"))]);
        let n = Term::fvar("n");
        let mk = eta_expanded(n.clone());
        let r = defeq(&env, &DefEqConfig::new(true, true), &ctx, &n, &mk).unwrap();
        assert_eq!(r.verdict, Verdict::NotEqual);
    }

    #[test]
    fn reflexivity_on_syntactic_equality() {
        let env = point_env();
        let t = Term::app(Term::constant("f"), Term::fvar("n"));
        let ctx = Telescope(vec![TeleEntry::explicit("n", Term::constant("int"))]);
        assert!(defeq(&env, &DefEqConfig::default(), &ctx, &t, &t).unwrap().verdict.is_equal());
    }

    #[test]
    fn unify_assigns_and_checks_occurs() {
        let env = point_env();
        let ctx = Telescope(vec![TeleEntry::explicit("n", Term::constant("int"))]);
        let mut metas = MetaCtx::new();
        let m = metas.fresh("a", Term::constant("int"), BinderInfo::Explicit);
        let target = Term::app(Term::constant("f"), Term::fvar("n"));
        let lhs = Term::app(Term::constant("f"), Term::Meta(m));
        let ok = unify(&env, &DefEqConfig::default(), &ctx, &mut metas, &lhs, &target).unwrap();
        assert_eq!(ok.subst.get(&m), Some(&Term::fvar("n")));

        let mut metas = MetaCtx::new();
        let m = metas.fresh("a", Term::constant("int"), BinderInfo::Explicit);
        let cyclic = Term::app(Term::constant("f"), Term::Meta(m));
        let err = unify(&env, &DefEqConfig::default(), &ctx, &mut metas, &Term::Meta(m), &cyclic).unwrap_err();
        assert_eq!(err.error, UnifyError::OccursCheck(m));
    }

    #[test]
    fn unify_reports_mismatch() {
        let env = point_env();
        let ctx = Telescope(vec![
            TeleEntry::explicit("n", Term::constant("int")),
            TeleEntry::explicit("k", Term::constant("int")),
        ]);
        let mut metas = MetaCtx::new();
        let err = unify(&env, &DefEqConfig::default(), &ctx, &mut metas, &Term::fvar("n"), &Term::fvar("k"))
            .unwrap_err();
        assert!(matches!(err.error, UnifyError::Mismatch(_, _)));
    }

    #[test]
    fn unifier_eta_solves_meta_through_projections() {
        let env = point_env();
        let ctx = Telescope(vec![TeleEntry::explicit("p", Term::constant("point"))]);
        let mut metas = MetaCtx::new();
        let m = metas.fresh("q", Term::constant("point"), BinderInfo::Explicit);
        // point.mk p.x p.y =?= ?q is solved by assignment regardless of η.
        let mk = eta_expanded(Term::fvar("p"));
        let r = unify(&env, &DefEqConfig::new(false, false), &ctx, &mut metas, &mk, &Term::Meta(m)).unwrap();
        assert_eq!(r.subst.get(&m), Some(&mk));
        // point.mk (?q).x (?q).y =?= p needs η in the unifier.
        for (eta, expect_ok) in [(false, false), (true, true)] {
            let mut metas = MetaCtx::new();
            let m = metas.fresh("q", Term::constant("point"), BinderInfo::Explicit);
            let mk = eta_expanded(Term::Meta(m));
            let r = unify(&env, &DefEqConfig::new(true, eta), &ctx, &mut metas, &mk, &Term::fvar("p"));
            assert_eq!(r.is_ok(), expect_ok, "eta_unifier = {eta}");
        }
    }
}
