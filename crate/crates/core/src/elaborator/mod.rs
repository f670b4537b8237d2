//! Class declarations → kernel structures plus forgetful instances.
//!
//! Three encodings of multiple inheritance:
//! - flat: every ancestor leaf field is copied into the class, and each direct
//!   parent is rebuilt from projections;
//! - nested: a parent whose fields do not overlap what is already present
//!   becomes a substructure field `to_P` (preferred, projection instance);
//!   overlapping parents contribute their missing leaves and are rebuilt by a
//!   synthesized constructor at priority 100;
//! - flat_hack: nested, with an empty `flat_hack` class prepended to every
//!   extends list so that no real parent is ever preferred.

mod dump;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::kernel::{
    check, BinderInfo, DefDecl, DefEqConfig, Declaration, Environment, KernelError, Name, OpaqueDecl, StructDecl,
    TeleEntry, Telescope, Term,
};
use crate::resolution::{complete_target, SearchConfig};
use crate::surface::{
    ClassItem, Expr, FieldValue, InstanceBody, InstanceItem, Item, Lowerer, Pos, SBinder, SurfaceError,
    SurfaceModule,
};

pub use dump::{dump_json, dump_text};

pub const FLAT_HACK: &str = "flat_hack";
pub const DEFAULT_PRIORITY: i64 = 1000;
pub const LOW_PRIORITY: i64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    Flat,
    Nested,
    FlatHack,
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Flat => "flat",
            Encoding::Nested => "nested",
            Encoding::FlatHack => "flat-hack",
        })
    }
}

impl FromStr for Encoding {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "flat" => Ok(Encoding::Flat),
            "nested" => Ok(Encoding::Nested),
            "flat-hack" | "flat_hack" => Ok(Encoding::FlatHack),
            other => Err(format!("unknown encoding `{other}` (expected flat, nested or flat-hack)")),
        }
    }
}

/// Encoding plus parent-order overrides. An override lists parents to move
/// to the front of a class's extends list; unlisted parents keep their
/// declared relative order after them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingStrategy {
    pub encoding: Encoding,
    pub overrides: BTreeMap<Name, Vec<Name>>,
}

impl EncodingStrategy {
    pub fn new(encoding: Encoding) -> Self {
        EncodingStrategy { encoding, overrides: BTreeMap::new() }
    }

    pub fn with_order(mut self, class: impl Into<Name>, parents: Vec<Name>) -> Self {
        self.overrides.insert(class.into(), parents);
        self
    }

    /// `class:parent` or `class:p1,p2,...`.
    pub fn parse_override(arg: &str) -> Result<(Name, Vec<Name>), String> {
        let (class, parents) = arg
            .split_once(':')
            .ok_or_else(|| format!("parent order `{arg}` should look like class:parent"))?;
        let parents: Vec<Name> = parents.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect();
        if class.trim().is_empty() || parents.is_empty() {
            return Err(format!("parent order `{arg}` should look like class:parent"));
        }
        Ok((class.trim().to_string(), parents))
    }
}

impl Default for EncodingStrategy {
    fn default() -> Self {
        EncodingStrategy::new(Encoding::Nested)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    PreferredProjection,
    SynthesizedConstructor,
    UserDeclared,
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::PreferredProjection => "preferred-projection",
            InstanceKind::SynthesizedConstructor => "synthesized-constructor",
            InstanceKind::UserDeclared => "user-declared",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceInfo {
    pub decl: Name,
    /// Source class for forgetful instances; `None` for user instances.
    pub from: Option<Name>,
    pub to: Name,
    pub priority: i64,
    pub kind: InstanceKind,
}

/// Where a leaf field lives: projection names from the class down to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldOrigin {
    pub leaf: Name,
    pub path: Vec<Name>,
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub name: Name,
    pub is_class: bool,
    pub params: Telescope,
    /// Effective parent order (after overrides and the flat_hack insertion),
    /// each with its parent type over `params`.
    pub parents: Vec<(Name, Term)>,
    /// Substructure fields: (field name, parent class).
    pub subobjects: Vec<(Name, Name)>,
    /// flatten_fields: leaf names and types over `params`.
    pub leaves: Vec<(Name, Term)>,
    pub origins: Vec<FieldOrigin>,
    all_names: BTreeSet<Name>,
    pub pos: Pos,
}

impl ClassInfo {
    pub fn subobject_parent(&self, field: &str) -> Option<&str> {
        self.subobjects.iter().find(|(f, _)| f == field).map(|(_, p)| p.as_str())
    }

    pub fn origin(&self, leaf: &str) -> Option<&FieldOrigin> {
        self.origins.iter().find(|o| o.leaf == leaf)
    }

    pub fn parent_names(&self) -> Vec<&str> {
        self.parents.iter().map(|(p, _)| p.as_str()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ElabGoal {
    pub label: String,
    pub ctx: Telescope,
    pub target: Term,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct ElabDefeq {
    pub label: String,
    pub ctx: Telescope,
    pub lhs: Term,
    pub rhs: Term,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct Elaboration {
    pub env: Environment,
    pub instances: Vec<InstanceInfo>,
    pub strategy: EncodingStrategy,
    pub classes: IndexMap<Name, ClassInfo>,
    pub goals: Vec<ElabGoal>,
    pub defeqs: Vec<ElabDefeq>,
    /// Ambient context accumulated from `variables` items.
    pub variables: Telescope,
}

impl Elaboration {
    pub fn class(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.get(name)
    }

    pub fn goal(&self, label: &str) -> Option<&ElabGoal> {
        self.goals.iter().find(|g| g.label == label)
    }

    pub fn defeq(&self, label: &str) -> Option<&ElabDefeq> {
        self.defeqs.iter().find(|d| d.label == label)
    }

    pub fn flatten_fields(&self, class: &str) -> Option<&[(Name, Term)]> {
        self.classes.get(class).map(|c| c.leaves.as_slice())
    }

    pub fn field_origins(&self, class: &str) -> Option<&[FieldOrigin]> {
        self.classes.get(class).map(|c| c.origins.as_slice())
    }

    pub fn preferred_edges(&self) -> Vec<(Name, Name, Name)> {
        preferred_edges(&self.instances)
    }
}

/// (from, to, declaration) for every preferred-projection instance.
pub fn preferred_edges(instances: &[InstanceInfo]) -> Vec<(Name, Name, Name)> {
    instances
        .iter()
        .filter(|i| i.kind == InstanceKind::PreferredProjection)
        .filter_map(|i| i.from.clone().map(|f| (f, i.to.clone(), i.decl.clone())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElabError {
    #[error("field `{field}` of `{class}` is inherited with different types {first} and {second}")]
    FieldTypeClash { class: Name, field: Name, first: Box<Term>, second: Box<Term> },
    #[error("invalid parent order for `{class}`: {reason}")]
    OverrideInvalid { class: Name, reason: String },
    #[error("{0}")]
    Surface(#[from] SurfaceError),
    #[error("{0}")]
    Kernel(#[from] KernelError),
    #[error("{0}")]
    Invalid(String),
}

/// An elaboration error with the position of the item that caused it (or,
/// for surface errors, the exact position inside it).
#[derive(Debug, Clone, PartialEq)]
pub struct ElabFailure {
    pub pos: Option<Pos>,
    pub error: ElabError,
}

impl ElabFailure {
    /// The message without any position prefix.
    pub fn message(&self) -> String {
        match &self.error {
            ElabError::Surface(e) => e.message(),
            e => e.to_string(),
        }
    }
}

impl fmt::Display for ElabFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{p}: {}", self.message()),
            None => f.write_str(&self.message()),
        }
    }
}

impl std::error::Error for ElabFailure {}

type EResult<T> = Result<T, ElabError>;

/// Merges leaf fields: parents' leaves in parent order, then own fields;
/// repeated names must carry α-equal types.
pub fn flatten_fields(
    class: &str,
    parent_leaves: &[Vec<(Name, Term)>],
    own: &[(Name, Term)],
) -> Result<Vec<(Name, Term)>, ElabError> {
    let mut out: Vec<(Name, Term)> = Vec::new();
    for (name, ty) in parent_leaves.iter().flatten().chain(own) {
        match out.iter().find(|(n, _)| n == name) {
            Some((_, prev)) if prev != ty => {
                return Err(ElabError::FieldTypeClash {
                    class: class.to_string(),
                    field: name.clone(),
                    first: Box::new(prev.clone()),
                    second: Box::new(ty.clone()),
                })
            }
            Some(_) => {}
            None => out.push((name.clone(), ty.clone())),
        }
    }
    Ok(out)
}

fn kernel_config() -> DefEqConfig {
    DefEqConfig::new(false, false)
}

struct State {
    env: Environment,
    instances: Vec<InstanceInfo>,
    classes: IndexMap<Name, ClassInfo>,
    goals: Vec<ElabGoal>,
    defeqs: Vec<ElabDefeq>,
    variables: Telescope,
    strategy: EncodingStrategy,
}

pub fn elaborate(ast: &SurfaceModule, strategy: &EncodingStrategy) -> Result<Elaboration, ElabFailure> {
    validate_overrides(ast, strategy).map_err(|error| ElabFailure { pos: None, error })?;
    let mut st = State {
        env: Environment::new(),
        instances: Vec::new(),
        classes: IndexMap::new(),
        goals: Vec::new(),
        defeqs: Vec::new(),
        variables: Telescope::new(),
        strategy: strategy.clone(),
    };
    if strategy.encoding == Encoding::FlatHack && ast.classes().next().is_some() {
        if let Some(c) = ast.class(FLAT_HACK) {
            return Err(ElabFailure {
                pos: Some(c.pos),
                error: ElabError::Invalid(format!("`{FLAT_HACK}` is reserved by the flat-hack encoding")),
            });
        }
        st.add_flat_hack().map_err(|error| ElabFailure { pos: None, error })?;
    }
    for item in &ast.items {
        let r = match item {
            Item::Class(c) => st.class(c),
            Item::Instance(i) => st.instance(i),
            Item::Variables(v) => st.variables(&v.binders),
            Item::Goal(g) => st.goal(&g.label, &g.binders, &g.target, g.pos),
            Item::Defeq(d) => st.defeq(&d.label, &d.binders, &d.lhs, &d.rhs, d.pos),
            Item::Axiom(a) => st.axiom(&a.name, &a.binders, &a.ty),
        };
        r.map_err(|error| {
            let pos = match &error {
                ElabError::Surface(e) => e.pos(),
                _ => item.pos(),
            };
            ElabFailure { pos: Some(pos), error }
        })?;
    }
    Ok(Elaboration {
        env: st.env,
        instances: st.instances,
        strategy: st.strategy,
        classes: st.classes,
        goals: st.goals,
        defeqs: st.defeqs,
        variables: st.variables,
    })
}

fn validate_overrides(ast: &SurfaceModule, strategy: &EncodingStrategy) -> EResult<()> {
    for (class, order) in &strategy.overrides {
        let invalid = |reason: String| ElabError::OverrideInvalid { class: class.clone(), reason };
        let c = ast.class(class).ok_or_else(|| invalid("no such class".into()))?;
        let declared = c.parent_names();
        let mut seen = HashSet::new();
        for p in order {
            if !declared.contains(p) {
                return Err(invalid(format!("`{p}` is not a parent (parents: {})", declared.join(", "))));
            }
            if !seen.insert(p) {
                return Err(invalid(format!("`{p}` listed twice")));
            }
        }
    }
    Ok(())
}

/// Projection chain `root.p₁.p₂…` starting at structure `start`.
fn chain(env: &Environment, start: &str, root: Term, path: &[Name]) -> Term {
    let mut cur = start.to_string();
    let mut t = root;
    for f in path {
        t = Term::proj(cur.clone(), f.clone(), t);
        let next = env
            .get_struct(&cur)
            .and_then(|s| s.fields.lookup(f))
            .and_then(|e| e.ty.head_const().map(str::to_string));
        if let Some(n) = next {
            cur = n;
        }
    }
    t
}

fn args_of(t: &Term) -> Vec<Term> {
    t.spine().1.into_iter().cloned().collect()
}

fn fresh_binder(avoid: &Telescope, base: &str) -> Name {
    if avoid.lookup(base).is_none() {
        return base.to_string();
    }
    (1..).map(|k| format!("{base}_{k}")).find(|c| avoid.lookup(c).is_none()).unwrap()
}

impl State {
    fn add(&mut self, d: Declaration) -> EResult<()> {
        self.env.add(d).map_err(ElabError::from)
    }

    fn add_flat_hack(&mut self) -> EResult<()> {
        let params = Telescope(vec![TeleEntry::explicit("α", Term::Sort)]);
        self.add(Declaration::Struct(StructDecl {
            name: FLAT_HACK.into(),
            params: params.clone(),
            fields: Telescope::new(),
            ctor: format!("{FLAT_HACK}.mk"),
            is_class: true,
        }))?;
        self.classes.insert(
            FLAT_HACK.into(),
            ClassInfo {
                name: FLAT_HACK.into(),
                is_class: true,
                params,
                parents: vec![],
                subobjects: vec![],
                leaves: vec![],
                origins: vec![],
                all_names: BTreeSet::new(),
                pos: Pos::default(),
            },
        );
        Ok(())
    }

    fn register(&mut self, decl: &str, from: Option<&str>, to: &str, priority: i64, kind: InstanceKind) {
        self.instances.push(InstanceInfo {
            decl: decl.to_string(),
            from: from.map(str::to_string),
            to: to.to_string(),
            priority,
            kind,
        });
    }

    fn class(&mut self, c: &ClassItem) -> EResult<()> {
        let env = self.env.clone();
        let mut lw = Lowerer::new(&env, &Telescope::new());
        let params = lw.binders(&c.params)?;
        let mut parents = Vec::new();
        for e in &c.extends {
            let t = lw.expr(e)?;
            let pname = t.head_const().unwrap_or_default().to_string();
            let pinfo = self
                .classes
                .get(&pname)
                .ok_or_else(|| ElabError::Invalid(format!("`{pname}` is not a class")))?;
            if args_of(&t).len() != pinfo.params.len() {
                return Err(ElabError::Invalid(format!(
                    "parent `{t}` must be applied to all {} parameters of `{pname}`",
                    pinfo.params.len()
                )));
            }
            if parents.iter().any(|(p, _): &(Name, Term)| *p == pname) {
                return Err(ElabError::Invalid(format!("`{pname}` is listed twice in the extends clause")));
            }
            parents.push((pname, t));
        }
        if let Some(order) = self.strategy.overrides.get(&c.name) {
            let mut reordered: Vec<(Name, Term)> =
                order.iter().filter_map(|p| parents.iter().find(|(q, _)| q == p).cloned()).collect();
            reordered.extend(parents.iter().filter(|(q, _)| !order.contains(q)).cloned());
            parents = reordered;
        }
        if self.strategy.encoding == Encoding::FlatHack && c.is_class {
            let carrier = params.iter().find(|e| e.info == BinderInfo::Explicit && e.ty == Term::Sort);
            if let Some(a) = carrier {
                parents.insert(0, (FLAT_HACK.to_string(), Term::app(Term::constant(FLAT_HACK), Term::fvar(&a.name))));
            }
        }
        let field_binders: Vec<SBinder> = c
            .fields
            .iter()
            .map(|f| SBinder { name: Some(f.name.clone()), ty: f.ty.clone(), info: BinderInfo::Explicit, pos: f.pos })
            .collect();
        let own: Vec<(Name, Term)> = lw.binders(&field_binders)?.0.into_iter().map(|e| (e.name, e.ty)).collect();
        drop(lw);

        let parent_leaves: Vec<Vec<(Name, Term)>> =
            parents.iter().map(|(p, t)| self.parent_leaves(p, t)).collect();
        let leaves = flatten_fields(&c.name, &parent_leaves, &own)?;

        let mut fields = Telescope::new();
        let mut subobjects = Vec::new();
        let mut origins: Vec<FieldOrigin> = Vec::new();
        let mut all_names = BTreeSet::new();
        let mut preferred = HashSet::new();
        if self.strategy.encoding == Encoding::Flat {
            for (n, ty) in &leaves {
                fields.push(TeleEntry::explicit(n.clone(), ty.clone()));
                origins.push(FieldOrigin { leaf: n.clone(), path: vec![n.clone()] });
                all_names.insert(n.clone());
            }
        } else {
            for ((p, ptype), pleaves) in parents.iter().zip(&parent_leaves) {
                let pinfo = &self.classes[p];
                let fname = format!("to_{p}");
                let overlaps = pinfo.all_names.iter().any(|n| all_names.contains(n)) || all_names.contains(&fname);
                if !overlaps {
                    fields.push(TeleEntry::explicit(fname.clone(), ptype.clone()));
                    all_names.insert(fname.clone());
                    all_names.extend(pinfo.all_names.iter().cloned());
                    for o in &pinfo.origins {
                        let mut path = vec![fname.clone()];
                        path.extend(o.path.iter().cloned());
                        origins.push(FieldOrigin { leaf: o.leaf.clone(), path });
                    }
                    subobjects.push((fname, p.clone()));
                    preferred.insert(p.clone());
                } else {
                    for (n, ty) in pleaves {
                        if origins.iter().any(|o| &o.leaf == n) {
                            continue;
                        }
                        let ty = self.fix_leaf_refs(ty, &origins, &subobjects);
                        fields.push(TeleEntry::explicit(n.clone(), ty));
                        all_names.insert(n.clone());
                        origins.push(FieldOrigin { leaf: n.clone(), path: vec![n.clone()] });
                    }
                }
            }
            for (n, ty) in &own {
                if origins.iter().any(|o| &o.leaf == n) {
                    continue;
                }
                let ty = self.fix_leaf_refs(ty, &origins, &subobjects);
                fields.push(TeleEntry::explicit(n.clone(), ty));
                all_names.insert(n.clone());
                origins.push(FieldOrigin { leaf: n.clone(), path: vec![n.clone()] });
            }
        }

        self.add(Declaration::Struct(StructDecl {
            name: c.name.clone(),
            params: params.clone(),
            fields,
            ctor: format!("{}.mk", c.name),
            is_class: c.is_class,
        }))?;
        self.classes.insert(
            c.name.clone(),
            ClassInfo {
                name: c.name.clone(),
                is_class: c.is_class,
                params: params.clone(),
                parents: parents.clone(),
                subobjects,
                leaves,
                origins,
                all_names,
                pos: c.pos,
            },
        );

        let inst = fresh_binder(&params, "i");
        let self_ty = Term::apps(Term::constant(&c.name), params.as_fvars());
        let mut binders = params.clone();
        binders.push(TeleEntry::inst(inst.clone(), self_ty));
        let root = Term::fvar(&inst);
        for (p, ptype) in &parents {
            let name = format!("{}.to_{p}", c.name);
            let (body, kind, priority) = if preferred.contains(p) {
                (
                    Term::proj(c.name.clone(), format!("to_{p}"), root.clone()),
                    InstanceKind::PreferredProjection,
                    DEFAULT_PRIORITY,
                )
            } else {
                let prio = if self.strategy.encoding == Encoding::Flat { DEFAULT_PRIORITY } else { LOW_PRIORITY };
                (self.build_ctor(&c.name, p, &args_of(ptype), &root), InstanceKind::SynthesizedConstructor, prio)
            };
            self.add(Declaration::Def(DefDecl {
                name: name.clone(),
                binders: binders.clone(),
                result: ptype.clone(),
                body: body.clone(),
                reducible: true,
            }))?;
            check(&self.env, &kernel_config(), &binders, &body, ptype)?;
            if c.is_class {
                self.register(&name, Some(&c.name), p, priority, kind);
            }
        }
        Ok(())
    }

    /// Leaves of `parent` instantiated at the arguments of `ptype`.
    fn parent_leaves(&self, parent: &str, ptype: &Term) -> Vec<(Name, Term)> {
        let info = &self.classes[parent];
        let map = info.params.bind(&args_of(ptype));
        info.leaves.iter().map(|(n, t)| (n.clone(), t.subst_fvars(&map))).collect()
    }

    /// A leaf type may mention earlier leaves by name; under the nested
    /// encoding those may sit inside a substructure field.
    fn fix_leaf_refs(&self, ty: &Term, origins: &[FieldOrigin], subobjects: &[(Name, Name)]) -> Term {
        let mut map = HashMap::new();
        for v in ty.free_vars() {
            if let Some(o) = origins.iter().find(|o| o.leaf == v && o.path.len() > 1) {
                if let Some((_, parent)) = subobjects.iter().find(|(f, _)| *f == o.path[0]) {
                    map.insert(v.clone(), chain(&self.env, parent, Term::fvar(&o.path[0]), &o.path[1..]));
                }
            }
        }
        if map.is_empty() {
            ty.clone()
        } else {
            ty.subst_fvars(&map)
        }
    }

    /// Shortest path of preferred substructure fields from `from` to `to`
    /// (earliest parent first on ties).
    fn preferred_path(&self, from: &str, to: &str) -> Option<Vec<Name>> {
        let mut queue = VecDeque::from([(from.to_string(), Vec::new())]);
        let mut seen = HashSet::new();
        while let Some((cur, path)) = queue.pop_front() {
            if cur == to {
                return Some(path);
            }
            if !seen.insert(cur.clone()) {
                continue;
            }
            for (f, p) in &self.classes[&cur].subobjects {
                let mut next = path.clone();
                next.push(f.clone());
                queue.push_back((p.clone(), next));
            }
        }
        None
    }

    /// Rebuilds `target` (applied to `targs`) from a value `root` of class
    /// `from`: substructure fields via preferred paths when one exists,
    /// otherwise recursively; leaves via their origin paths.
    fn build_ctor(&self, from: &str, target: &str, targs: &[Term], root: &Term) -> Term {
        let decl = self.env.get_struct(target).expect("elaborated parent").clone();
        let tinfo = &self.classes[target];
        let mut vals: Vec<Term> = Vec::new();
        let mut by_name: HashMap<Name, Term> = HashMap::new();
        for (idx, f) in decl.fields.iter().enumerate() {
            let fty = decl.field_type_with(idx, targs, |g| by_name.get(g).cloned().unwrap_or_else(|| Term::fvar(g)));
            let v = match tinfo.subobject_parent(&f.name) {
                Some(parent) => match self.preferred_path(from, parent) {
                    Some(path) => chain(&self.env, from, root.clone(), &path),
                    None => self.build_ctor(from, parent, &args_of(&fty), root),
                },
                None => {
                    let origin = self.classes[from].origin(&f.name).expect("leaf inherited by the derived class");
                    chain(&self.env, from, root.clone(), &origin.path)
                }
            };
            by_name.insert(f.name.clone(), v.clone());
            vals.push(v);
        }
        Term::Mk { strukt: target.to_string(), params: targs.to_vec(), fields: vals }
    }

    fn axiom(&mut self, name: &str, binders: &[SBinder], ty: &Expr) -> EResult<()> {
        let env = self.env.clone();
        let mut lw = Lowerer::new(&env, &Telescope::new());
        let tel = lw.binders(binders)?;
        let result = lw.expr(ty)?;
        self.add(Declaration::Opaque(OpaqueDecl { name: name.to_string(), binders: tel, result }))
    }

    fn variables(&mut self, binders: &[SBinder]) -> EResult<()> {
        let mut lw = Lowerer::new(&self.env, &self.variables);
        lw.binders(binders)?;
        let ctx = lw.ctx().clone();
        self.variables = ctx;
        Ok(())
    }

    fn local_ctx(&self, binders: &[SBinder]) -> EResult<Telescope> {
        if binders.is_empty() {
            Ok(self.variables.clone())
        } else {
            Ok(Lowerer::new(&self.env, &Telescope::new()).binders(binders)?)
        }
    }

    fn goal(&mut self, label: &str, binders: &[SBinder], target: &Expr, pos: Pos) -> EResult<()> {
        let ctx = self.local_ctx(binders)?;
        let target = Lowerer::new(&self.env, &ctx).expr(target)?;
        match target.head_const() {
            Some(h) if self.env.is_class(h) => {}
            _ => return Err(ElabError::Invalid(format!("goal `{label}`: {target} is not a class application"))),
        }
        self.goals.push(ElabGoal { label: label.to_string(), ctx, target, pos });
        Ok(())
    }

    fn defeq(&mut self, label: &str, binders: &[SBinder], lhs: &Expr, rhs: &Expr, pos: Pos) -> EResult<()> {
        let ctx = self.local_ctx(binders)?;
        let mut lw = Lowerer::new(&self.env, &ctx);
        let lhs = lw.expr(lhs)?;
        let rhs = lw.expr(rhs)?;
        self.defeqs.push(ElabDefeq { label: label.to_string(), ctx, lhs, rhs, pos });
        Ok(())
    }

    fn instance(&mut self, it: &InstanceItem) -> EResult<()> {
        let env = self.env.clone();
        let mut lw = Lowerer::new(&env, &Telescope::new());
        let binders = lw.binders(&it.binders)?;
        let target = lw.expr(&it.target)?;
        let class = match target.head_const() {
            Some(h) if self.env.is_class(h) => h.to_string(),
            _ => return Err(ElabError::Invalid(format!("instance `{}`: {target} is not a class application", it.name))),
        };
        // Missing trailing instance arguments are found by instance search,
        // as Lean does when elaborating `module R R`.
        let search = SearchConfig::default();
        let target = complete_target(&self.env, &self.instances, &binders, &target, &search)
            .map_err(|e| ElabError::Invalid(format!("instance `{}`: {e}", it.name)))?;
        let targs = args_of(&target);
        let body = match &it.body {
            InstanceBody::Term(e) => lw.expr(e)?,
            InstanceBody::Fields(assigns) => {
                let mut values: HashMap<Name, Option<Term>> = HashMap::new();
                for a in assigns {
                    if values.contains_key(&a.name) {
                        return Err(ElabError::Invalid(format!("field `{}` assigned twice", a.name)));
                    }
                    let v = match &a.value {
                        FieldValue::Opaque => None,
                        FieldValue::Expr(e) => Some(lw.expr(e)?),
                    };
                    values.insert(a.name.clone(), v);
                }
                let mut used = HashSet::new();
                let mut opaques = Vec::new();
                let mk = self.assemble(&it.name, &binders, &class, &targs, &values, &mut used, &mut opaques)?;
                if let Some(extra) = assigns.iter().find(|a| !used.contains(&a.name)) {
                    return Err(ElabError::Invalid(format!("`{class}` has no field `{}`", extra.name)));
                }
                for o in opaques {
                    self.add(Declaration::Opaque(o))?;
                }
                mk
            }
        };
        drop(lw);
        self.add(Declaration::Def(DefDecl {
            name: it.name.clone(),
            binders: binders.clone(),
            result: target.clone(),
            body: body.clone(),
            reducible: true,
        }))?;
        check(&self.env, &DefEqConfig::default(), &binders, &body, &target)?;
        self.register(&it.name, None, &class, it.priority.unwrap_or(DEFAULT_PRIORITY), InstanceKind::UserDeclared);
        Ok(())
    }

    /// Constructor for `class targs` from field assignments (leaf names or
    /// direct field names). `opaque` leaves become fresh opaque constants.
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &self,
        inst: &str,
        binders: &Telescope,
        class: &str,
        targs: &[Term],
        values: &HashMap<Name, Option<Term>>,
        used: &mut HashSet<Name>,
        opaques: &mut Vec<OpaqueDecl>,
    ) -> EResult<Term> {
        let decl = self.env.get_struct(class).expect("class in env").clone();
        let info = &self.classes[class];
        let mut by_name: HashMap<Name, Term> = HashMap::new();
        let mut vals = Vec::new();
        for (idx, f) in decl.fields.iter().enumerate() {
            let fty = decl.field_type_with(idx, targs, |g| by_name.get(g).cloned().unwrap_or_else(|| Term::fvar(g)));
            let v = match values.get(&f.name) {
                Some(v) => {
                    used.insert(f.name.clone());
                    match v {
                        Some(t) => t.clone(),
                        None => {
                            let name = format!("{inst}.{}", f.name);
                            if !opaques.iter().any(|o| o.name == name) {
                                opaques.push(OpaqueDecl { name: name.clone(), binders: binders.clone(), result: fty });
                            }
                            Term::apps(Term::constant(name), binders.as_fvars())
                        }
                    }
                }
                None => match info.subobject_parent(&f.name) {
                    Some(parent) => {
                        self.assemble(inst, binders, parent, &args_of(&fty), values, used, opaques)?
                    }
                    None => return Err(ElabError::Invalid(format!("instance `{inst}` is missing field `{}`", f.name))),
                },
            };
            by_name.insert(f.name.clone(), v.clone());
            vals.push(v);
        }
        Ok(Term::Mk { strukt: class.to_string(), params: targs.to_vec(), fields: vals })
    }
}

#[cfg(test)]
mod tests;
