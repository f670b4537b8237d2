use std::collections::{HashMap, HashSet};
use std::num::NonZeroUsize;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::term::{BinderInfo, Name, Term};
use super::KernelError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TeleEntry {
    pub name: Name,
    pub ty: Term,
    pub info: BinderInfo,
}

impl TeleEntry {
    pub fn explicit(name: impl Into<Name>, ty: Term) -> Self {
        TeleEntry { name: name.into(), ty, info: BinderInfo::Explicit }
    }

    pub fn inst(name: impl Into<Name>, ty: Term) -> Self {
        TeleEntry { name: name.into(), ty, info: BinderInfo::InstImplicit }
    }
}

/// Dependent telescope: entry types mention earlier entries as free variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Telescope(pub Vec<TeleEntry>);

impl Telescope {
    pub fn new() -> Self {
        Telescope(Vec::new())
    }

    pub fn push(&mut self, entry: TeleEntry) {
        self.0.push(entry);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TeleEntry> {
        self.0.iter()
    }

    /// Latest entry with this name (later entries shadow earlier ones).
    pub fn lookup(&self, name: &str) -> Option<&TeleEntry> {
        self.0.iter().rev().find(|e| e.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|e| e.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn as_fvars(&self) -> Vec<Term> {
        self.0.iter().map(|e| Term::fvar(&e.name)).collect()
    }

    /// `Π entries, body`.
    pub fn pi_over(&self, body: &Term) -> Term {
        self.0.iter().rev().fold(body.clone(), |acc, e| {
            Term::pi_abstract(&e.name, e.info, e.ty.clone(), &acc)
        })
    }

    /// `λ entries, body`.
    pub fn lam_over(&self, body: &Term) -> Term {
        self.0.iter().rev().fold(body.clone(), |acc, e| {
            Term::lam_abstract(&e.name, e.info, e.ty.clone(), &acc)
        })
    }

    /// Substitution sending each entry to the corresponding value.
    pub fn bind(&self, values: &[Term]) -> HashMap<Name, Term> {
        self.0
            .iter()
            .zip(values)
            .map(|(e, v)| (e.name.clone(), v.clone()))
            .collect()
    }

    pub fn concat(&self, other: &Telescope) -> Telescope {
        let mut out = self.clone();
        out.0.extend(other.0.iter().cloned());
        out
    }
}

impl FromIterator<TeleEntry> for Telescope {
    fn from_iter<I: IntoIterator<Item = TeleEntry>>(iter: I) -> Self {
        Telescope(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructDecl {
    pub name: Name,
    pub params: Telescope,
    /// Field types may mention params and earlier fields as free variables.
    pub fields: Telescope,
    pub ctor: Name,
    /// Declared with `class` (participates in instance search) rather than `structure`.
    pub is_class: bool,
}

impl StructDecl {
    pub fn field_index(&self, field: &str) -> Option<usize> {
        self.fields.index_of(field)
    }

    pub fn ty(&self) -> Term {
        self.params.pi_over(&Term::Sort)
    }

    /// `S p₁ … pₙ` with the declaration's own parameter variables.
    pub fn self_type(&self) -> Term {
        Term::apps(Term::constant(&self.name), self.params.as_fvars())
    }

    /// Type of field `idx` with the params instantiated and earlier fields
    /// replaced by `earlier(name)`.
    pub fn field_type_with(
        &self,
        idx: usize,
        params: &[Term],
        earlier: impl Fn(&str) -> Term,
    ) -> Term {
        let mut map = self.params.bind(params);
        for e in &self.fields.0[..idx] {
            map.insert(e.name.clone(), earlier(&e.name));
        }
        self.fields.0[idx].ty.subst_fvars(&map)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefDecl {
    pub name: Name,
    pub binders: Telescope,
    pub result: Term,
    pub body: Term,
    /// Informational; the kernel unfolds every definition.
    pub reducible: bool,
}

impl DefDecl {
    pub fn ty(&self) -> Term {
        self.binders.pi_over(&self.result)
    }

    pub fn value(&self) -> Term {
        self.binders.lam_over(&self.body)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpaqueDecl {
    pub name: Name,
    pub binders: Telescope,
    pub result: Term,
}

impl OpaqueDecl {
    pub fn ty(&self) -> Term {
        self.binders.pi_over(&self.result)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Declaration {
    Struct(StructDecl),
    Def(DefDecl),
    Opaque(OpaqueDecl),
}

impl Declaration {
    pub fn name(&self) -> &str {
        match self {
            Declaration::Struct(s) => &s.name,
            Declaration::Def(d) => &d.name,
            Declaration::Opaque(o) => &o.name,
        }
    }

    pub fn ty(&self) -> Term {
        match self {
            Declaration::Struct(s) => s.ty(),
            Declaration::Def(d) => d.ty(),
            Declaration::Opaque(o) => o.ty(),
        }
    }
}

/// Ordered global table. Immutable once built; shared freely between readers.
#[derive(Clone, Debug, Default)]
pub struct Environment {
    decls: IndexMap<Name, Declaration>,
    ctors: HashMap<Name, Name>,
    values: HashMap<Name, Term>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Declaration> {
        self.decls.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.decls.contains_key(name) || self.ctors.contains_key(name)
    }

    pub fn get_struct(&self, name: &str) -> Option<&StructDecl> {
        match self.decls.get(name) {
            Some(Declaration::Struct(s)) => Some(s),
            _ => None,
        }
    }

    pub fn get_def(&self, name: &str) -> Option<&DefDecl> {
        match self.decls.get(name) {
            Some(Declaration::Def(d)) => Some(d),
            _ => None,
        }
    }

    /// Closed value `λ binders, body` of a definition, cached at insertion.
    pub fn def_value(&self, name: &str) -> Option<&Term> {
        self.values.get(name)
    }

    /// Structure whose constructor is called `ctor`.
    pub fn struct_of_ctor(&self, ctor: &str) -> Option<&StructDecl> {
        self.ctors.get(ctor).and_then(|s| self.get_struct(s))
    }

    pub fn is_class(&self, name: &str) -> bool {
        self.get_struct(name).is_some_and(|s| s.is_class)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Declaration> {
        self.decls.values()
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    /// Position of a declaration in insertion order.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.decls.get_index_of(name)
    }

    /// Appends a declaration after checking global well-formedness: unique
    /// names, no forward references, no metavariables, well-scoped telescopes.
    pub fn add(&mut self, decl: Declaration) -> Result<(), KernelError> {
        let name = decl.name().to_string();
        if self.contains(&name) {
            return Err(KernelError::DuplicateDeclaration(name));
        }
        match &decl {
            Declaration::Struct(s) => {
                if self.contains(&s.ctor) || s.ctor == name {
                    return Err(KernelError::DuplicateDeclaration(s.ctor.clone()));
                }
                let mut scope = HashSet::new();
                self.check_telescope(&s.params, &mut scope, &name, None)?;
                self.check_telescope(&s.fields, &mut scope, &name, None)?;
            }
            Declaration::Def(d) => {
                let mut scope = HashSet::new();
                self.check_telescope(&d.binders, &mut scope, &name, None)?;
                self.check_term(&d.result, &scope, &name, None)?;
                self.check_term(&d.body, &scope, &name, None)?;
            }
            Declaration::Opaque(o) => {
                let mut scope = HashSet::new();
                self.check_telescope(&o.binders, &mut scope, &name, None)?;
                self.check_term(&o.result, &scope, &name, None)?;
            }
        }
        if let Declaration::Struct(s) = &decl {
            self.ctors.insert(s.ctor.clone(), name.clone());
        }
        if let Declaration::Def(d) = &decl {
            self.values.insert(name.clone(), d.value());
        }
        self.decls.insert(name, decl);
        Ok(())
    }

    fn check_telescope(
        &self,
        tele: &Telescope,
        scope: &mut HashSet<Name>,
        owner: &str,
        current: Option<&StructDecl>,
    ) -> Result<(), KernelError> {
        for e in tele.iter() {
            self.check_term(&e.ty, scope, owner, current)?;
            if !scope.insert(e.name.clone()) {
                return Err(KernelError::Malformed(format!(
                    "{owner}: binder `{}` declared twice",
                    e.name
                )));
            }
        }
        Ok(())
    }

    fn check_term(
        &self,
        t: &Term,
        scope: &HashSet<Name>,
        owner: &str,
        current: Option<&StructDecl>,
    ) -> Result<(), KernelError> {
        if t.has_meta() {
            return Err(KernelError::Malformed(format!(
                "{owner}: stored declarations may not contain metavariables"
            )));
        }
        if !t.is_locally_closed() {
            return Err(KernelError::Malformed(format!("{owner}: loose bound variable")));
        }
        for v in t.free_vars() {
            if !scope.contains(&v) {
                return Err(KernelError::UnboundVariable(format!("{v} (in {owner})")));
            }
        }
        for g in t.referenced_globals() {
            let self_ref = current.is_some_and(|s| s.name == g);
            if !self_ref && !self.decls.contains_key(&g) {
                return Err(KernelError::UnknownConstant(format!("{g} (in {owner})")));
            }
        }
        self.check_shapes(t, owner)
    }

    fn check_shapes(&self, t: &Term, owner: &str) -> Result<(), KernelError> {
        match t {
            Term::Mk { strukt, params, fields } => {
                let s = self.get_struct(strukt).ok_or_else(|| {
                    KernelError::UnknownConstant(format!("{strukt} (in {owner})"))
                })?;
                if s.params.len() != params.len() || s.fields.len() != fields.len() {
                    return Err(KernelError::Malformed(format!(
                        "{owner}: constructor of {strukt} expects {} params and {} fields",
                        s.params.len(),
                        s.fields.len()
                    )));
                }
                for x in params.iter().chain(fields) {
                    self.check_shapes(x, owner)?;
                }
                Ok(())
            }
            Term::Proj { strukt, field, target } => {
                let s = self.get_struct(strukt).ok_or_else(|| {
                    KernelError::UnknownConstant(format!("{strukt} (in {owner})"))
                })?;
                if s.field_index(field).is_none() {
                    return Err(KernelError::Malformed(format!(
                        "{owner}: {strukt} has no field `{field}`"
                    )));
                }
                self.check_shapes(target, owner)
            }
            Term::App(f, a) => {
                self.check_shapes(f, owner)?;
                self.check_shapes(a, owner)
            }
            Term::Lam { ty, body, .. } | Term::Pi { ty, body, .. } => {
                self.check_shapes(ty, owner)?;
                self.check_shapes(body, owner)
            }
            _ => Ok(()),
        }
    }
}

/// Knobs of the conversion checker.
///
/// `eta_kernel` governs structural η inside [`super::defeq`]; `eta_unifier`
/// governs it inside [`super::unify`] and therefore instance search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefEqConfig {
    pub eta_kernel: bool,
    pub eta_unifier: bool,
    pub unfold_depth: NonZeroUsize,
}

pub const DEFAULT_UNFOLD_DEPTH: usize = 256;

impl DefEqConfig {
    pub fn new(eta_kernel: bool, eta_unifier: bool) -> Self {
        DefEqConfig {
            eta_kernel,
            eta_unifier,
            unfold_depth: NonZeroUsize::new(DEFAULT_UNFOLD_DEPTH).unwrap(),
        }
    }

    /// Both η flags set to `eta`.
    pub fn uniform(eta: bool) -> Self {
        Self::new(eta, eta)
    }

    pub fn with_unfold_depth(self, depth: usize) -> Result<Self, KernelError> {
        let unfold_depth = NonZeroUsize::new(depth)
            .ok_or_else(|| KernelError::Malformed("unfold_depth must be positive".into()))?;
        Ok(DefEqConfig { unfold_depth, ..self })
    }

    /// Configuration whose kernel η equals this configuration's unifier η; used
    /// to validate unifier and resolution output with the kernel.
    pub fn unifier_as_kernel(self) -> Self {
        DefEqConfig { eta_kernel: self.eta_unifier, ..self }
    }
}

impl Default for DefEqConfig {
    fn default() -> Self {
        DefEqConfig::new(true, false)
    }
}
