use super::env::{DefEqConfig, Environment, Telescope};
use super::term::Term;
use super::KernelError;

/// Weak-head normalizer: β, δ (fuelled) and ι. Never performs η.
pub(crate) struct Reducer<'a> {
    env: &'a Environment,
    limit: usize,
}

impl<'a> Reducer<'a> {
    pub(crate) fn new(env: &'a Environment, config: &DefEqConfig) -> Self {
        Reducer { env, limit: config.unfold_depth.get() }
    }

    pub(crate) fn whnf(&self, t: &Term, trace: &mut Option<&mut Vec<String>>) -> Result<Term, KernelError> {
        let mut fuel = self.limit;
        self.whnf_fuel(t, &mut fuel, trace)
    }

    fn whnf_fuel(
        &self,
        t: &Term,
        fuel: &mut usize,
        trace: &mut Option<&mut Vec<String>>,
    ) -> Result<Term, KernelError> {
        let mut cur = t.clone();
        loop {
            let (head, mut args) = cur.into_spine();
            match head {
                Term::Lam { body, .. } if !args.is_empty() => {
                    let arg = args.remove(0);
                    cur = Term::apps(body.instantiate(&arg), args);
                }
                Term::Const(ref name) if self.env.get_def(name).is_some() => {
                    if *fuel == 0 {
                        return Err(KernelError::FuelExhausted(self.limit));
                    }
                    *fuel -= 1;
                    if let Some(tr) = trace.as_deref_mut() {
                        tr.push(format!("unfold {name}"));
                    }
                    let value = self.env.def_value(name).cloned().expect("cached def value");
                    cur = Term::apps(value, args);
                }
                Term::Proj { strukt, field, target } => {
                    let target = self.whnf_fuel(&target, fuel, trace)?;
                    match target {
                        Term::Mk { strukt: ref s2, ref fields, .. } if *s2 == strukt => {
                            let idx = self
                                .env
                                .get_struct(&strukt)
                                .and_then(|s| s.field_index(&field))
                                .ok_or_else(|| {
                                    KernelError::IllTyped(format!("{strukt} has no field `{field}`"))
                                })?;
                            if let Some(tr) = trace.as_deref_mut() {
                                tr.push(format!("iota {strukt}.{field}"));
                            }
                            cur = Term::apps(fields[idx].clone(), args);
                        }
                        target => {
                            let stuck = Term::Proj { strukt, field, target: Box::new(target) };
                            return Ok(Term::apps(stuck, args));
                        }
                    }
                }
                head => return Ok(Term::apps(head, args)),
            }
        }
    }
}

/// Weak-head normal form of `t`. The context is not consulted (the calculus
/// has no local definitions) but is part of the signature for symmetry with
/// the other kernel operations.
pub fn whnf(
    env: &Environment,
    config: &DefEqConfig,
    _ctx: &Telescope,
    t: &Term,
) -> Result<Term, KernelError> {
    Reducer::new(env, config).whnf(t, &mut None)
}

/// Like [`whnf`], also returning the reduction steps taken.
pub fn whnf_traced(
    env: &Environment,
    config: &DefEqConfig,
    t: &Term,
) -> Result<(Term, Vec<String>), KernelError> {
    let mut steps = Vec::new();
    let r = Reducer::new(env, config).whnf(t, &mut Some(&mut steps))?;
    Ok((r, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{BinderInfo, DefDecl, Declaration, StructDecl, TeleEntry};

    fn monoid_env() -> Environment {
        let mut env = Environment::new();
        let alpha = Term::fvar("α");
        env.add(Declaration::Struct(StructDecl {
            name: "add_monoid".into(),
            params: Telescope(vec![TeleEntry::explicit("α", Term::Sort)]),
            fields: Telescope(vec![
                TeleEntry::explicit("zero", alpha.clone()),
                TeleEntry::explicit("add", Term::arrow(alpha.clone(), Term::arrow(alpha.clone(), alpha))),
            ]),
            ctor: "add_monoid.mk".into(),
            is_class: true,
        }))
        .unwrap();
        env
    }

    #[test]
    fn iota_on_constructor() {
        let env = monoid_env();
        let mk = Term::Mk {
            strukt: "add_monoid".into(),
            params: vec![Term::fvar("α")],
            fields: vec![Term::fvar("z"), Term::fvar("a")],
        };
        let t = Term::proj("add_monoid", "add", mk);
        let r = whnf(&env, &DefEqConfig::default(), &Telescope::new(), &t).unwrap();
        assert_eq!(r, Term::fvar("a"));
    }

    #[test]
    fn neutral_is_its_own_whnf() {
        let env = monoid_env();
        let t = Term::fvar("iR");
        assert_eq!(whnf(&env, &DefEqConfig::default(), &Telescope::new(), &t).unwrap(), t);
    }

    #[test]
    fn beta_and_delta() {
        let mut env = monoid_env();
        env.add(Declaration::Def(DefDecl {
            name: "id".into(),
            binders: Telescope(vec![TeleEntry::explicit("x", Term::Sort)]),
            result: Term::Sort,
            body: Term::fvar("x"),
            reducible: true,
        }))
        .unwrap();
        let t = Term::app(Term::constant("id"), Term::constant("add_monoid"));
        let (r, steps) = whnf_traced(&env, &DefEqConfig::default(), &t).unwrap();
        assert_eq!(r, Term::constant("add_monoid"));
        assert_eq!(steps, vec!["unfold id".to_string()]);
        let lam = Term::lam_abstract("y", BinderInfo::Explicit, Term::Sort, &Term::fvar("y"));
        let t = Term::app(lam, Term::fvar("q"));
        assert_eq!(whnf(&env, &DefEqConfig::default(), &Telescope::new(), &t).unwrap(), Term::fvar("q"));
    }

    #[test]
    fn runaway_unfolding_exhausts_fuel() {
        let mut env = monoid_env();
        env.add(Declaration::Def(DefDecl {
            name: "k".into(),
            binders: Telescope::new(),
            result: Term::Sort,
            body: Term::Sort,
            reducible: true,
        }))
        .unwrap();
        // k₁ := k, k₂ := k₁, ... ; a chain longer than the fuel.
        let mut prev = "k".to_string();
        for i in 0..10 {
            let name = format!("k{i}");
            env.add(Declaration::Def(DefDecl {
                name: name.clone(),
                binders: Telescope::new(),
                result: Term::Sort,
                body: Term::constant(&prev),
                reducible: true,
            }))
            .unwrap();
            prev = name;
        }
        let cfg = DefEqConfig::default().with_unfold_depth(5).unwrap();
        let err = whnf(&env, &cfg, &Telescope::new(), &Term::constant(&prev)).unwrap_err();
        assert_eq!(err, KernelError::FuelExhausted(5));
        let cfg = DefEqConfig::default().with_unfold_depth(11).unwrap();
        assert_eq!(whnf(&env, &cfg, &Telescope::new(), &Term::constant(&prev)).unwrap(), Term::Sort);
    }
}
