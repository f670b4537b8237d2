//! Surface expressions → kernel terms.
//!
//! Dotted identifiers resolve to the longest declared prefix (local first),
//! with remaining segments read as projections. A projection whose field is
//! not a direct field of the target's structure is followed through
//! substructure fields, so `iR.mul` means `iR.to_semiring.mul` under the
//! nested encoding.

use std::collections::{HashSet, VecDeque};

use crate::kernel::{fresh_name, Infer, Reducer, BinderInfo, DefEqConfig, Environment, TeleEntry, Telescope, Term};

use super::ast::{Expr, ExprKind, SBinder};
use super::parser::dot_prefixes;
use super::{Pos, SurfaceError};

type LResult<T> = Result<T, SurfaceError>;

pub struct Lowerer<'a> {
    env: &'a Environment,
    config: DefEqConfig,
    ctx: Telescope,
    /// user name → context name, innermost last
    scope: Vec<(String, String)>,
    anon: usize,
}

impl<'a> Lowerer<'a> {
    pub fn new(env: &'a Environment, ctx: &Telescope) -> Self {
        let scope = ctx.iter().map(|e| (e.name.clone(), e.name.clone())).collect();
        Lowerer { env, config: DefEqConfig::default(), ctx: ctx.clone(), scope, anon: 0 }
    }

    pub fn ctx(&self) -> &Telescope {
        &self.ctx
    }

    fn lookup_local(&self, name: &str) -> Option<&str> {
        self.scope.iter().rev().find(|(u, _)| u == name).map(|(_, c)| c.as_str())
    }

    fn taken(&self, name: &str) -> bool {
        self.ctx.lookup(name).is_some() || self.env.contains(name)
    }

    /// Lowers a binder telescope, adding each binder to the context. Returns
    /// the new entries (anonymous instance binders get `_inst_k` names).
    pub fn binders(&mut self, bs: &[SBinder]) -> LResult<Telescope> {
        let mut out = Telescope::new();
        for b in bs {
            let ty = self.expr(&b.ty)?;
            let entry = self.push_binder(b.name.as_deref(), ty, b.info);
            out.push(entry);
        }
        Ok(out)
    }

    fn push_binder(&mut self, user: Option<&str>, ty: Term, info: BinderInfo) -> TeleEntry {
        let name = match user {
            Some(u) if !self.taken(u) => u.to_string(),
            Some(u) => fresh_name(u),
            None => loop {
                self.anon += 1;
                let candidate = format!("_inst_{}", self.anon);
                if !self.taken(&candidate) {
                    break candidate;
                }
            },
        };
        if let Some(u) = user {
            self.scope.push((u.to_string(), name.clone()));
        }
        let entry = TeleEntry { name, ty, info };
        self.ctx.push(entry.clone());
        entry
    }

    fn pop_binder(&mut self, user: Option<&str>) {
        self.ctx.0.pop();
        if user.is_some() {
            self.scope.pop();
        }
    }

    pub fn expr(&mut self, e: &Expr) -> LResult<Term> {
        match &e.kind {
            ExprKind::Type => Ok(Term::Sort),
            ExprKind::Ident(_) | ExprKind::App(..) => self.app(e),
            ExprKind::Proj(t, f) => {
                let target = self.expr(t)?;
                self.project(target, f, e.pos)
            }
            ExprKind::Pi(b, body) => {
                let ty = self.expr(&b.ty)?;
                let entry = self.push_binder(b.name.as_deref(), ty.clone(), b.info);
                let body = self.expr(body);
                self.pop_binder(b.name.as_deref());
                let hint = b.name.clone().unwrap_or_default();
                Ok(Term::pi_abstract(&entry.name, b.info, ty, &body?).with_binder_name(&hint))
            }
            ExprKind::Lam(bs, body) => {
                let mut entries = Vec::new();
                let mut err = None;
                for b in bs {
                    match self.expr(&b.ty) {
                        Ok(ty) => entries.push((self.push_binder(b.name.as_deref(), ty, b.info), b)),
                        Err(e) => {
                            err = Some(e);
                            break;
                        }
                    }
                }
                let body = match err {
                    Some(e) => Err(e),
                    None => self.expr(body),
                };
                for (_, b) in entries.iter().rev() {
                    self.pop_binder(b.name.as_deref());
                }
                let mut acc = body?;
                for (entry, b) in entries.into_iter().rev() {
                    let hint = b.name.clone().unwrap_or_default();
                    acc = Term::lam_abstract(&entry.name, entry.info, entry.ty, &acc).with_binder_name(&hint);
                }
                Ok(acc)
            }
        }
    }

    fn app(&mut self, e: &Expr) -> LResult<Term> {
        let (head, args) = e.spine();
        if let ExprKind::Ident(name) = &head.kind {
            if self.lookup_local(name).is_none() {
                if let Some(s) = self.env.struct_of_ctor(name) {
                    let (np, nf) = (s.params.len(), s.fields.len());
                    let strukt = s.name.clone();
                    if args.len() < np + nf {
                        return Err(SurfaceError::Term {
                            pos: head.pos,
                            msg: format!(
                                "constructor `{name}` needs {} arguments ({np} parameters, {nf} fields), got {}",
                                np + nf,
                                args.len()
                            ),
                        });
                    }
                    let mut lowered = args.iter().map(|a| self.expr(a)).collect::<LResult<Vec<_>>>()?;
                    let extra = lowered.split_off(np + nf);
                    let fields = lowered.split_off(np);
                    let mk = Term::Mk { strukt, params: lowered, fields };
                    return Ok(Term::apps(mk, extra));
                }
            }
        }
        let mut f = match &head.kind {
            ExprKind::Ident(name) => self.ident(name, head.pos)?,
            _ => self.expr(head)?,
        };
        for a in args {
            f = Term::app(f, self.expr(a)?);
        }
        Ok(f)
    }

    fn ident(&mut self, name: &str, pos: Pos) -> LResult<Term> {
        let prefixes: Vec<&str> = dot_prefixes(name).collect();
        for p in prefixes.iter().rev() {
            let base = if let Some(c) = self.lookup_local(p) {
                Term::fvar(c)
            } else if self.env.contains(p) {
                Term::constant(*p)
            } else if self.env.struct_of_ctor(p).is_some() {
                return Err(SurfaceError::Term {
                    pos,
                    msg: format!("constructor `{p}` must be applied to all parameters and fields"),
                });
            } else {
                continue;
            };
            let rest = if p.len() == name.len() { "" } else { &name[p.len() + 1..] };
            let mut t = base;
            for seg in rest.split('.').filter(|s| !s.is_empty()) {
                t = self.project(t, seg, pos)?;
            }
            return Ok(t);
        }
        Err(SurfaceError::Scope { name: name.to_string(), pos })
    }

    /// Structure name at the head of the type of `t`.
    fn struct_of(&self, t: &Term, pos: Pos) -> LResult<(String, Term)> {
        let kerr = |source| SurfaceError::Kernel { pos, source };
        let ty = Infer::new(self.env, self.config, self.ctx.clone(), None, false).infer(t).map_err(kerr)?;
        let ty = Reducer::new(self.env, &self.config).whnf(&ty, &mut None).map_err(kerr)?;
        match ty.head_const() {
            Some(h) if self.env.get_struct(h).is_some() => Ok((h.to_string(), ty.clone())),
            _ => Err(SurfaceError::Term { pos, msg: format!("`{t}` has type {ty}, which is not a structure") }),
        }
    }

    fn project(&self, target: Term, field: &str, pos: Pos) -> LResult<Term> {
        let (s, ty) = self.struct_of(&target, pos)?;
        match self.field_path(&s, field) {
            Some(path) => Ok(path.into_iter().fold(target, |t, (st, f)| Term::proj(st, f, t))),
            None => Err(SurfaceError::Term { pos, msg: format!("{ty} has no field `{field}`") }),
        }
    }

    /// Shortest chain of (structure, field) projections from `s` reaching a
    /// field named `field`, descending through fields of structure type.
    fn field_path(&self, s: &str, field: &str) -> Option<Vec<(String, String)>> {
        let mut queue = VecDeque::from([(s.to_string(), Vec::<(String, String)>::new())]);
        let mut seen = HashSet::new();
        while let Some((cur, path)) = queue.pop_front() {
            if !seen.insert(cur.clone()) {
                continue;
            }
            let decl = self.env.get_struct(&cur)?;
            if decl.field_index(field).is_some() {
                let mut p = path;
                p.push((cur, field.to_string()));
                return Some(p);
            }
            for f in decl.fields.iter() {
                if let Some(h) = f.ty.head_const() {
                    if self.env.get_struct(h).is_some() {
                        let mut p = path.clone();
                        p.push((cur.clone(), f.name.clone()));
                        queue.push_back((h.to_string(), p));
                    }
                }
            }
        }
        None
    }
}

impl Term {
    fn with_binder_name(self, name: &str) -> Term {
        if name.is_empty() {
            return self;
        }
        match self {
            Term::Pi { info, ty, body, .. } => Term::Pi { name: name.to_string(), info, ty, body },
            Term::Lam { info, ty, body, .. } => Term::Lam { name: name.to_string(), info, ty, body },
            other => other,
        }
    }
}
