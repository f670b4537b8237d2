//! Pretty-printer for surface modules. Output re-parses to the same AST up to
//! positions, so printing is a fixpoint after one round trip.

use std::fmt::Write;

use crate::kernel::BinderInfo;

use super::ast::*;

fn binder(b: &SBinder) -> String {
    match (&b.name, b.info) {
        (Some(n), BinderInfo::Explicit) => format!("({n} : {})", expr(&b.ty)),
        (None, BinderInfo::Explicit) => format!("(_ : {})", expr(&b.ty)),
        (Some(n), BinderInfo::InstImplicit) => format!("[{n} : {}]", expr(&b.ty)),
        (None, BinderInfo::InstImplicit) => format!("[{}]", expr(&b.ty)),
    }
}

fn binders(bs: &[SBinder]) -> String {
    bs.iter().map(|b| format!(" {}", binder(b))).collect()
}

fn is_atomic(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Type | ExprKind::Ident(_) | ExprKind::Proj(..))
}

fn arg(e: &Expr) -> String {
    if is_atomic(e) {
        expr(e)
    } else {
        format!("({})", expr(e))
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Type => "Type".into(),
        ExprKind::Ident(n) => n.clone(),
        ExprKind::App(..) => {
            let (head, args) = e.spine();
            let mut s = arg(head);
            for a in args {
                s.push(' ');
                s.push_str(&arg(a));
            }
            s
        }
        ExprKind::Proj(t, f) => format!("({}).{f}", expr(t)),
        ExprKind::Pi(b, body) => {
            let dom = match (&b.name, b.info) {
                (None, BinderInfo::Explicit) => match b.ty.kind {
                    ExprKind::Pi(..) | ExprKind::Lam(..) => format!("({})", expr(&b.ty)),
                    _ => expr(&b.ty),
                },
                _ => binder(b),
            };
            format!("{dom} → {}", expr(body))
        }
        ExprKind::Lam(bs, body) => format!("fun{} => {}", binders(bs), expr(body)),
    }
}

fn item(out: &mut String, it: &Item) {
    match it {
        Item::Class(c) => {
            let kw = if c.is_class { "class" } else { "structure" };
            let _ = write!(out, "{kw} {}{}", c.name, binders(&c.params));
            if !c.extends.is_empty() {
                let ps: Vec<String> = c.extends.iter().map(expr).collect();
                let _ = write!(out, " extends {}", ps.join(", "));
            }
            if !c.fields.is_empty() {
                out.push_str(" where");
                for f in &c.fields {
                    let _ = write!(out, "\n  ({} : {})", f.name, expr(&f.ty));
                }
            }
        }
        Item::Instance(i) => {
            if let Some(p) = i.priority {
                let _ = write!(out, "@[priority {p}] ");
            }
            let _ = write!(out, "instance {}{} : {}", i.name, binders(&i.binders), expr(&i.target));
            match &i.body {
                InstanceBody::Term(t) => {
                    let _ = write!(out, " :=\n  {}", expr(t));
                }
                InstanceBody::Fields(fs) => {
                    out.push_str(" where");
                    for f in fs {
                        let v = match &f.value {
                            FieldValue::Opaque => "opaque".to_string(),
                            FieldValue::Expr(e) => expr(e),
                        };
                        let _ = write!(out, "\n  ({} := {v})", f.name);
                    }
                }
            }
        }
        Item::Variables(v) => {
            let _ = write!(out, "variables{}", binders(&v.binders));
        }
        Item::Goal(g) => {
            let _ = write!(out, "goal {}{} :\n  {}", g.label, binders(&g.binders), expr(&g.target));
        }
        Item::Defeq(d) => {
            let _ = write!(
                out,
                "defeq {}{} :\n  {} =\n  {}",
                d.label,
                binders(&d.binders),
                expr(&d.lhs),
                expr(&d.rhs)
            );
        }
        Item::Axiom(a) => {
            let _ = write!(out, "axiom {}{} : {}", a.name, binders(&a.binders), expr(&a.ty));
        }
    }
}

pub fn print_module(m: &SurfaceModule) -> String {
    let mut out = String::new();
    for (k, it) in m.items.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        item(&mut out, it);
        out.push('\n');
    }
    out
}
