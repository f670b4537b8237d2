//! Locally nameless terms.
//!
//! Bound variables are de Bruijn indices (`Bound`), free variables are named
//! (`FreeVar`). Substituting a locally closed term for a free variable can
//! therefore never capture, and alpha-equivalence is structural equality with
//! binder names ignored (see the `PartialEq` impl).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub type Name = String;

/// Identifier of a metavariable inside a [`super::MetaCtx`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MetaId(pub u32);

impl fmt::Display for MetaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?m{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinderInfo {
    Explicit,
    InstImplicit,
}

#[derive(Clone, Debug)]
pub enum Term {
    /// The single universe `Type`.
    Sort,
    Const(Name),
    FreeVar(Name),
    /// De Bruijn index; never appears at the top level of a stored term.
    Bound(u32),
    Meta(MetaId),
    App(Box<Term>, Box<Term>),
    Lam {
        name: Name,
        info: BinderInfo,
        ty: Box<Term>,
        body: Box<Term>,
    },
    Pi {
        name: Name,
        info: BinderInfo,
        ty: Box<Term>,
        body: Box<Term>,
    },
    /// Structure constructor applied to all parameters and all fields.
    Mk {
        strukt: Name,
        params: Vec<Term>,
        fields: Vec<Term>,
    },
    Proj {
        strukt: Name,
        field: Name,
        target: Box<Term>,
    },
}

// Alpha-equivalence: binder names and binder info are irrelevant.
impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        use Term::*;
        match (self, other) {
            (Sort, Sort) => true,
            (Const(a), Const(b)) | (FreeVar(a), FreeVar(b)) => a == b,
            (Bound(a), Bound(b)) => a == b,
            (Meta(a), Meta(b)) => a == b,
            (App(f, a), App(g, b)) => f == g && a == b,
            (
                Lam { ty: t1, body: b1, .. },
                Lam { ty: t2, body: b2, .. },
            )
            | (
                Pi { ty: t1, body: b1, .. },
                Pi { ty: t2, body: b2, .. },
            ) => t1 == t2 && b1 == b2,
            (
                Mk { strukt: s1, params: p1, fields: f1 },
                Mk { strukt: s2, params: p2, fields: f2 },
            ) => s1 == s2 && p1 == p2 && f1 == f2,
            (
                Proj { strukt: s1, field: f1, target: t1 },
                Proj { strukt: s2, field: f2, target: t2 },
            ) => s1 == s2 && f1 == f2 && t1 == t2,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl Term {
    pub fn constant(name: impl Into<Name>) -> Term {
        Term::Const(name.into())
    }

    pub fn fvar(name: impl Into<Name>) -> Term {
        Term::FreeVar(name.into())
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn proj(strukt: impl Into<Name>, field: impl Into<Name>, target: Term) -> Term {
        Term::Proj {
            strukt: strukt.into(),
            field: field.into(),
            target: Box::new(target),
        }
    }

    /// Non-dependent arrow `dom → cod`.
    pub fn arrow(dom: Term, cod: Term) -> Term {
        Term::Pi {
            name: "_".into(),
            info: BinderInfo::Explicit,
            ty: Box::new(dom),
            body: Box::new(cod),
        }
    }

    /// Builds `Π (name : ty), body` where `body` mentions `name` as a free variable.
    pub fn pi_abstract(name: &str, info: BinderInfo, ty: Term, body: &Term) -> Term {
        Term::Pi {
            name: name.into(),
            info,
            ty: Box::new(ty),
            body: Box::new(body.abstract_fvar(name)),
        }
    }

    pub fn lam_abstract(name: &str, info: BinderInfo, ty: Term, body: &Term) -> Term {
        Term::Lam {
            name: name.into(),
            info,
            ty: Box::new(ty),
            body: Box::new(body.abstract_fvar(name)),
        }
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn into_spine(self) -> (Term, Vec<Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(*a);
            cur = *f;
        }
        args.reverse();
        (cur, args)
    }

    /// Name of the head constant, if the spine is headed by one.
    pub fn head_const(&self) -> Option<&str> {
        match self.spine().0 {
            Term::Const(n) => Some(n),
            _ => None,
        }
    }

    /// Replaces the outermost loose bound variable by `val` (which must be locally closed).
    pub fn instantiate(&self, val: &Term) -> Term {
        self.instantiate_at(0, val)
    }

    fn instantiate_at(&self, depth: u32, val: &Term) -> Term {
        self.map_bound(depth, &mut |k, d| {
            if k == d {
                val.clone()
            } else if k > d {
                Term::Bound(k - 1)
            } else {
                Term::Bound(k)
            }
        })
    }

    /// Turns free occurrences of `name` into the bound variable of a new outermost binder.
    pub fn abstract_fvar(&self, name: &str) -> Term {
        self.abstract_at(0, name)
    }

    fn abstract_at(&self, depth: u32, name: &str) -> Term {
        match self {
            Term::FreeVar(n) if n == name => Term::Bound(depth),
            Term::Bound(k) if *k >= depth => Term::Bound(k + 1),
            _ => self.map_children(depth, &mut |t, d| t.abstract_at(d, name)),
        }
    }

    fn map_bound(&self, depth: u32, f: &mut impl FnMut(u32, u32) -> Term) -> Term {
        match self {
            Term::Bound(k) => f(*k, depth),
            _ => self.map_children(depth, &mut |t, d| t.map_bound(d, f)),
        }
    }

    /// Rebuilds a node after applying `f` to each child; `f` receives the
    /// binder depth of the child.
    fn map_children(&self, depth: u32, f: &mut impl FnMut(&Term, u32) -> Term) -> Term {
        match self {
            Term::Sort | Term::Const(_) | Term::FreeVar(_) | Term::Bound(_) | Term::Meta(_) => {
                self.clone()
            }
            Term::App(g, a) => Term::app(f(g, depth), f(a, depth)),
            Term::Lam { name, info, ty, body } => Term::Lam {
                name: name.clone(),
                info: *info,
                ty: Box::new(f(ty, depth)),
                body: Box::new(f(body, depth + 1)),
            },
            Term::Pi { name, info, ty, body } => Term::Pi {
                name: name.clone(),
                info: *info,
                ty: Box::new(f(ty, depth)),
                body: Box::new(f(body, depth + 1)),
            },
            Term::Mk { strukt, params, fields } => Term::Mk {
                strukt: strukt.clone(),
                params: params.iter().map(|t| f(t, depth)).collect(),
                fields: fields.iter().map(|t| f(t, depth)).collect(),
            },
            Term::Proj { strukt, field, target } => Term::Proj {
                strukt: strukt.clone(),
                field: field.clone(),
                target: Box::new(f(target, depth)),
            },
        }
    }

    /// Simultaneous substitution of free variables by locally closed terms.
    pub fn subst_fvars(&self, map: &HashMap<Name, Term>) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        self.subst_rec(0, map)
    }

    fn subst_rec(&self, depth: u32, map: &HashMap<Name, Term>) -> Term {
        match self {
            Term::FreeVar(n) => map.get(n).cloned().unwrap_or_else(|| self.clone()),
            _ => self.map_children(depth, &mut |t, d| t.subst_rec(d, map)),
        }
    }

    /// Replaces metavariables according to `lookup`, repeatedly, until none of
    /// the remaining ones are assigned.
    pub fn replace_metas(&self, lookup: &impl Fn(MetaId) -> Option<Term>) -> Term {
        match self {
            Term::Meta(m) => match lookup(*m) {
                Some(t) => t.replace_metas(lookup),
                None => self.clone(),
            },
            _ => self.map_children(0, &mut |t, _| t.replace_metas(lookup)),
        }
    }

    fn for_each(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Sort | Term::Const(_) | Term::FreeVar(_) | Term::Bound(_) | Term::Meta(_) => {}
            Term::App(g, a) => {
                g.for_each(f);
                a.for_each(f);
            }
            Term::Lam { ty, body, .. } | Term::Pi { ty, body, .. } => {
                ty.for_each(f);
                body.for_each(f);
            }
            Term::Mk { params, fields, .. } => {
                params.iter().chain(fields).for_each(|t| t.for_each(f));
            }
            Term::Proj { target, .. } => target.for_each(f),
        }
    }

    pub fn has_meta(&self) -> bool {
        let mut found = false;
        self.for_each(&mut |t| found |= matches!(t, Term::Meta(_)));
        found
    }

    pub fn mentions_meta(&self, m: MetaId) -> bool {
        let mut found = false;
        self.for_each(&mut |t| found |= matches!(t, Term::Meta(x) if *x == m));
        found
    }

    pub fn mentions_fvar(&self, name: &str) -> bool {
        let mut found = false;
        self.for_each(&mut |t| found |= matches!(t, Term::FreeVar(n) if n == name));
        found
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.for_each(&mut |t| {
            if let Term::FreeVar(n) = t {
                out.insert(n.clone());
            }
        });
        out
    }

    /// Every global name the term depends on: constants, and structures named
    /// by constructors and projections.
    pub fn referenced_globals(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.for_each(&mut |t| match t {
            Term::Const(n) => {
                out.insert(n.clone());
            }
            Term::Mk { strukt, .. } | Term::Proj { strukt, .. } => {
                out.insert(strukt.clone());
            }
            _ => {}
        });
        out
    }

    /// True when bound variable `k` (relative to this term) occurs.
    pub fn has_loose_bound(&self, k: u32) -> bool {
        match self {
            Term::Bound(j) => *j == k,
            Term::Sort | Term::Const(_) | Term::FreeVar(_) | Term::Meta(_) => false,
            Term::App(g, a) => g.has_loose_bound(k) || a.has_loose_bound(k),
            Term::Lam { ty, body, .. } | Term::Pi { ty, body, .. } => {
                ty.has_loose_bound(k) || body.has_loose_bound(k + 1)
            }
            Term::Mk { params, fields, .. } => {
                params.iter().chain(fields).any(|t| t.has_loose_bound(k))
            }
            Term::Proj { target, .. } => target.has_loose_bound(k),
        }
    }

    pub fn is_locally_closed(&self) -> bool {
        self.loose_bound_range() == 0
    }

    /// One past the largest loose de Bruijn index, 0 when locally closed.
    fn loose_bound_range(&self) -> u32 {
        match self {
            Term::Bound(k) => k + 1,
            Term::Sort | Term::Const(_) | Term::FreeVar(_) | Term::Meta(_) => 0,
            Term::App(g, a) => g.loose_bound_range().max(a.loose_bound_range()),
            Term::Lam { ty, body, .. } | Term::Pi { ty, body, .. } => ty
                .loose_bound_range()
                .max(body.loose_bound_range().saturating_sub(1)),
            Term::Mk { params, fields, .. } => params
                .iter()
                .chain(fields)
                .map(Term::loose_bound_range)
                .max()
                .unwrap_or(0),
            Term::Proj { target, .. } => target.loose_bound_range(),
        }
    }

    /// Number of nodes, used to bound random generators and in diagnostics.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.for_each(&mut |_| n += 1);
        n
    }
}
