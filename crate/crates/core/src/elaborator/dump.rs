use serde_json::{json, Value};

use crate::kernel::{BinderInfo, Declaration, Telescope};

use super::Elaboration;

fn binders_text(t: &Telescope) -> String {
    t.iter()
        .map(|e| match e.info {
            BinderInfo::Explicit => format!(" ({} : {})", e.name, e.ty),
            BinderInfo::InstImplicit => format!(" [{} : {}]", e.name, e.ty),
        })
        .collect()
}

fn binders_json(t: &Telescope) -> Value {
    Value::Array(
        t.iter()
            .map(|e| json!({"name": e.name, "type": e.ty.to_string(), "info": e.info}))
            .collect(),
    )
}

/// Listing-style rendering: declarations in order, then the instance table.
pub fn dump_text(el: &Elaboration) -> String {
    let mut out = String::new();
    for d in el.env.iter() {
        match d {
            Declaration::Struct(s) => {
                let kw = if s.is_class { "class" } else { "structure" };
                out.push_str(&format!("{kw} {}{}\n", s.name, binders_text(&s.params)));
                for f in s.fields.iter() {
                    out.push_str(&format!("  ({} : {})\n", f.name, f.ty));
                }
            }
            Declaration::Def(def) => {
                out.push_str(&format!(
                    "def {}{} : {} :=\n  {}\n",
                    def.name,
                    binders_text(&def.binders),
                    def.result,
                    def.body
                ));
            }
            Declaration::Opaque(o) => {
                out.push_str(&format!("opaque {}{} : {}\n", o.name, binders_text(&o.binders), o.result));
            }
        }
    }
    for i in &el.instances {
        let edge = match &i.from {
            Some(f) => format!("{f} -> {}", i.to),
            None => i.to.clone(),
        };
        out.push_str(&format!("instance {} : {edge} priority {} {}\n", i.decl, i.priority, i.kind));
    }
    out
}

pub fn dump_json(el: &Elaboration) -> Value {
    let decls: Vec<Value> = el
        .env
        .iter()
        .map(|d| match d {
            Declaration::Struct(s) => json!({
                "kind": if s.is_class { "class" } else { "structure" },
                "name": s.name,
                "params": binders_json(&s.params),
                "fields": binders_json(&s.fields),
                "ctor": s.ctor,
            }),
            Declaration::Def(def) => json!({
                "kind": "def",
                "name": def.name,
                "binders": binders_json(&def.binders),
                "type": def.result.to_string(),
                "body": def.body.to_string(),
                "reducible": def.reducible,
            }),
            Declaration::Opaque(o) => json!({
                "kind": "opaque",
                "name": o.name,
                "binders": binders_json(&o.binders),
                "type": o.result.to_string(),
            }),
        })
        .collect();
    json!({
        "encoding": el.strategy.encoding,
        "declarations": decls,
        "instances": el.instances,
    })
}
