use std::collections::BTreeMap;

use super::term::{BinderInfo, MetaId, Name, Term};

/// Result of a successful unification: every assigned metavariable with its
/// fully instantiated value.
pub type Substitution = BTreeMap<MetaId, Term>;

#[derive(Clone, Debug)]
struct MetaDecl {
    hint: Name,
    ty: Term,
    info: BinderInfo,
    value: Option<Term>,
}

/// Caller-local store of metavariables: their types and assignments.
#[derive(Clone, Debug, Default)]
pub struct MetaCtx {
    metas: Vec<MetaDecl>,
}

impl MetaCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, hint: impl Into<Name>, ty: Term, info: BinderInfo) -> MetaId {
        let id = MetaId(self.metas.len() as u32);
        self.metas.push(MetaDecl { hint: hint.into(), ty, info, value: None });
        id
    }

    pub fn len(&self) -> usize {
        self.metas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metas.is_empty()
    }

    pub fn ty(&self, m: MetaId) -> Option<&Term> {
        self.metas.get(m.0 as usize).map(|d| &d.ty)
    }

    pub fn hint(&self, m: MetaId) -> Option<&str> {
        self.metas.get(m.0 as usize).map(|d| d.hint.as_str())
    }

    pub fn info(&self, m: MetaId) -> Option<BinderInfo> {
        self.metas.get(m.0 as usize).map(|d| d.info)
    }

    pub fn value(&self, m: MetaId) -> Option<&Term> {
        self.metas.get(m.0 as usize).and_then(|d| d.value.as_ref())
    }

    pub fn is_assigned(&self, m: MetaId) -> bool {
        self.value(m).is_some()
    }

    /// Records `m := value`. The caller is responsible for the occurs check.
    pub fn assign(&mut self, m: MetaId, value: Term) {
        if let Some(d) = self.metas.get_mut(m.0 as usize) {
            d.value = Some(value);
        }
    }

    /// Replaces every assigned metavariable, transitively.
    pub fn instantiate(&self, t: &Term) -> Term {
        if !t.has_meta() {
            return t.clone();
        }
        t.replace_metas(&|m| self.value(m).cloned())
    }

    pub fn substitution(&self) -> Substitution {
        self.metas
            .iter()
            .enumerate()
            .filter_map(|(i, d)| {
                d.value
                    .as_ref()
                    .map(|v| (MetaId(i as u32), self.instantiate(v)))
            })
            .collect()
    }
}
