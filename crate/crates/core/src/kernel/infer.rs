use std::sync::atomic::{AtomicU64, Ordering};

use super::conv::Conv;
use super::env::{DefEqConfig, Environment, TeleEntry, Telescope};
use super::meta::MetaCtx;
use super::term::{Name, Term};
use super::whnf::Reducer;
use super::KernelError;

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A free-variable name that cannot clash with user names (`#` is not an
/// identifier character in the surface syntax).
pub(crate) fn fresh_name(hint: &str) -> Name {
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    let base = hint.split('#').next().unwrap_or("x");
    format!("{base}#{n}")
}

pub(crate) struct Infer<'a> {
    env: &'a Environment,
    config: DefEqConfig,
    ctx: Telescope,
    metas: Option<&'a MetaCtx>,
    check: bool,
}

impl<'a> Infer<'a> {
    pub(crate) fn new(
        env: &'a Environment,
        config: DefEqConfig,
        ctx: Telescope,
        metas: Option<&'a MetaCtx>,
        check: bool,
    ) -> Self {
        Infer { env, config, ctx, metas, check }
    }

    fn whnf(&self, t: &Term) -> Result<Term, KernelError> {
        Reducer::new(self.env, &self.config).whnf(t, &mut None)
    }

    fn ill(msg: String) -> KernelError {
        KernelError::IllTyped(msg)
    }

    fn expect_defeq(&self, actual: &Term, expected: &Term, what: &str) -> Result<(), KernelError> {
        let mut conv = Conv::new(self.env, self.config, self.config.eta_kernel, self.ctx.clone(), None);
        if conv.is_def_eq(actual, expected)? {
            Ok(())
        } else {
            Err(Self::ill(format!("{what}: expected {expected}, found {actual}")))
        }
    }

    fn expect_sort(&mut self, t: &Term, what: &str) -> Result<(), KernelError> {
        let ty = self.infer(t)?;
        match self.whnf(&ty)? {
            Term::Sort => Ok(()),
            other => Err(Self::ill(format!("{what} should be a type, but has type {other}"))),
        }
    }

    pub(crate) fn infer(&mut self, t: &Term) -> Result<Term, KernelError> {
        match t {
            Term::Sort => Ok(Term::Sort),
            Term::Const(name) => match self.env.get(name) {
                Some(d) => Ok(d.ty()),
                None if self.env.struct_of_ctor(name).is_some() => Err(Self::ill(format!(
                    "constructor `{name}` must be applied to all parameters and fields"
                ))),
                None => Err(KernelError::UnknownConstant(name.clone())),
            },
            Term::FreeVar(name) => self
                .ctx
                .lookup(name)
                .map(|e| e.ty.clone())
                .ok_or_else(|| KernelError::UnboundVariable(name.clone())),
            Term::Bound(k) => Err(Self::ill(format!("loose bound variable #{k}"))),
            Term::Meta(m) => match self.metas.and_then(|mc| mc.ty(*m)) {
                Some(ty) => Ok(self.metas.unwrap().instantiate(ty)),
                None => Err(Self::ill(format!("unknown metavariable {m}"))),
            },
            Term::App(f, a) => {
                let fty = self.infer(f)?;
                match self.whnf(&fty)? {
                    Term::Pi { ty, body, .. } => {
                        if self.check {
                            let aty = self.infer(a)?;
                            self.expect_defeq(&aty, &ty, &format!("argument {a} of {f}"))?;
                        }
                        Ok(body.instantiate(a))
                    }
                    other => Err(Self::ill(format!("{f} has type {other}, which is not a function type"))),
                }
            }
            Term::Lam { name, info, ty, body } => {
                if self.check {
                    self.expect_sort(ty, "binder type")?;
                }
                let x = fresh_name(name);
                let opened = body.instantiate(&Term::fvar(&x));
                self.ctx.push(TeleEntry { name: x.clone(), ty: (**ty).clone(), info: *info });
                let bty = self.infer(&opened);
                self.ctx.0.pop();
                Ok(Term::pi_abstract(&x, *info, (**ty).clone(), &bty?).renamed_binder(name))
            }
            Term::Pi { name, info, ty, body } => {
                if self.check {
                    self.expect_sort(ty, "domain")?;
                    let x = fresh_name(name);
                    let opened = body.instantiate(&Term::fvar(&x));
                    self.ctx.push(TeleEntry { name: x, ty: (**ty).clone(), info: *info });
                    let r = self.expect_sort(&opened, "codomain");
                    self.ctx.0.pop();
                    r?;
                }
                Ok(Term::Sort)
            }
            Term::Mk { strukt, params, fields } => {
                let s = self
                    .env
                    .get_struct(strukt)
                    .ok_or_else(|| KernelError::UnknownConstant(strukt.clone()))?;
                if s.params.len() != params.len() || s.fields.len() != fields.len() {
                    return Err(Self::ill(format!(
                        "constructor {} expects {} params and {} fields, got {} and {}",
                        s.ctor,
                        s.params.len(),
                        s.fields.len(),
                        params.len(),
                        fields.len()
                    )));
                }
                if self.check {
                    let s = s.clone();
                    let mut map = std::collections::HashMap::new();
                    for (e, p) in s.params.iter().zip(params) {
                        let expected = e.ty.subst_fvars(&map);
                        let actual = self.infer(p)?;
                        self.expect_defeq(&actual, &expected, &format!("parameter {} of {}", e.name, s.ctor))?;
                        map.insert(e.name.clone(), p.clone());
                    }
                    for (e, v) in s.fields.iter().zip(fields) {
                        let expected = e.ty.subst_fvars(&map);
                        let actual = self.infer(v)?;
                        self.expect_defeq(&actual, &expected, &format!("field {} of {}", e.name, s.ctor))?;
                        map.insert(e.name.clone(), v.clone());
                    }
                }
                Ok(Term::apps(Term::constant(strukt), params.iter().cloned()))
            }
            Term::Proj { strukt, field, target } => {
                let tty = self.infer(target)?;
                let tty = self.whnf(&tty)?;
                let (head, args) = tty.spine();
                let s = self
                    .env
                    .get_struct(strukt)
                    .ok_or_else(|| KernelError::UnknownConstant(strukt.clone()))?;
                if !matches!(head, Term::Const(h) if h == strukt) || args.len() != s.params.len() {
                    return Err(Self::ill(format!(
                        "projection {strukt}.{field} applied to {target} of type {tty}"
                    )));
                }
                let idx = s
                    .field_index(field)
                    .ok_or_else(|| Self::ill(format!("{strukt} has no field `{field}`")))?;
                let args: Vec<Term> = args.into_iter().cloned().collect();
                Ok(s.field_type_with(idx, &args, |g| Term::proj(strukt, g, (**target).clone())))
            }
        }
    }
}

impl Term {
    fn renamed_binder(self, name: &str) -> Term {
        match self {
            Term::Pi { info, ty, body, .. } => Term::Pi { name: name.to_string(), info, ty, body },
            other => other,
        }
    }
}

/// Type of `t` in `ctx`, checking argument, parameter and field types along
/// the way (with the kernel's default η setting).
pub fn infer_type(env: &Environment, ctx: &Telescope, t: &Term) -> Result<Term, KernelError> {
    Infer::new(env, DefEqConfig::default(), ctx.clone(), None, true).infer(t)
}

/// Checks that `t` has a type definitionally equal to `expected` under `config`.
pub fn check(
    env: &Environment,
    config: &DefEqConfig,
    ctx: &Telescope,
    t: &Term,
    expected: &Term,
) -> Result<(), KernelError> {
    let inf = Infer::new(env, *config, ctx.clone(), None, true);
    let mut inf = inf;
    let actual = inf.infer(t)?;
    inf.expect_defeq(&actual, expected, &format!("{t}"))
}
