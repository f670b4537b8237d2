//! Rendering of terms in the surface term grammar.
//!
//! Output re-parses to an α-equivalent term: applications are fully explicit,
//! projections print as `t.field`, constructors as `S.mk params fields`.

use std::collections::BTreeSet;
use std::fmt;

use super::term::{BinderInfo, Term};

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Top,
    App,
    Arg,
}

struct Printer {
    names: Vec<String>,
}

impl Printer {
    fn bound_name(&self, k: u32) -> String {
        let k = k as usize;
        if k < self.names.len() {
            self.names[self.names.len() - 1 - k].clone()
        } else {
            format!("#{k}")
        }
    }

    fn pick_name(&self, hint: &str, body: &Term) -> String {
        let mut avoid: BTreeSet<String> = body.free_vars();
        avoid.extend(body.referenced_globals());
        avoid.extend(self.names.iter().cloned());
        let base = match hint {
            "" | "_" => "x",
            h => h.split('#').next().unwrap_or("x"),
        };
        if !avoid.contains(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|c| !avoid.contains(c))
            .unwrap()
    }

    fn paren(s: String, needed: bool) -> String {
        if needed {
            format!("({s})")
        } else {
            s
        }
    }

    fn print(&mut self, t: &Term, prec: Prec) -> String {
        match t {
            Term::Sort => "Type".into(),
            Term::Const(n) | Term::FreeVar(n) => n.clone(),
            Term::Bound(k) => self.bound_name(*k),
            Term::Meta(m) => m.to_string(),
            Term::App(..) => {
                let (head, args) = t.spine();
                let mut s = self.print(head, Prec::App);
                for a in args {
                    s.push(' ');
                    s.push_str(&self.print(a, Prec::Arg));
                }
                Self::paren(s, prec >= Prec::Arg)
            }
            Term::Mk { strukt, params, fields } => {
                let mut s = format!("{strukt}.mk");
                if params.is_empty() && fields.is_empty() {
                    return s;
                }
                for a in params.iter().chain(fields) {
                    s.push(' ');
                    s.push_str(&self.print(a, Prec::Arg));
                }
                Self::paren(s, prec >= Prec::Arg)
            }
            Term::Proj { field, target, .. } => {
                let simple = match &**target {
                    Term::FreeVar(n) => !n.contains('.'),
                    Term::Bound(_) | Term::Proj { .. } => true,
                    _ => false,
                };
                let inner = self.print(target, Prec::Top);
                if simple {
                    format!("{inner}.{field}")
                } else {
                    format!("({inner}).{field}")
                }
            }
            Term::Pi { name, info, ty, body } => {
                let dom = self.print(ty, if *info == BinderInfo::Explicit { Prec::App } else { Prec::Top });
                let dependent = body.has_loose_bound(0);
                let s = if dependent {
                    let x = self.pick_name(name, body);
                    self.names.push(x.clone());
                    let cod = self.print(body, Prec::Top);
                    self.names.pop();
                    match info {
                        BinderInfo::Explicit => format!("({x} : {}) → {cod}", self.print(ty, Prec::Top)),
                        BinderInfo::InstImplicit => format!("[{x} : {dom}] → {cod}"),
                    }
                } else {
                    self.names.push("_".into());
                    let cod = self.print(body, Prec::Top);
                    self.names.pop();
                    match info {
                        BinderInfo::Explicit => format!("{dom} → {cod}"),
                        BinderInfo::InstImplicit => format!("[{dom}] → {cod}"),
                    }
                };
                Self::paren(s, prec > Prec::Top)
            }
            Term::Lam { name, info, ty, body } => {
                let x = self.pick_name(name, body);
                let dom = self.print(ty, Prec::Top);
                self.names.push(x.clone());
                let b = self.print(body, Prec::Top);
                self.names.pop();
                let binder = match info {
                    BinderInfo::Explicit => format!("({x} : {dom})"),
                    BinderInfo::InstImplicit => format!("[{x} : {dom}]"),
                };
                Self::paren(format!("fun {binder} => {b}"), prec > Prec::Top)
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Printer { names: Vec::new() };
        f.write_str(&p.print(self, Prec::Top))
    }
}
