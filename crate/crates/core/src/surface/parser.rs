use std::collections::HashSet;

use crate::kernel::BinderInfo;

use super::ast::*;
use super::lexer::{lex, Kw, Tok, Token};
use super::{Pos, SurfaceError};

type PResult<T> = Result<T, SurfaceError>;

const ITEM_STARTS: &[&str] = &["class", "structure", "instance", "variables", "goal", "defeq", "axiom"];

/// Recursive-descent parser. Tracks the names declared so far so that
/// references to undeclared (or later) names are rejected with a position.
pub struct Parser {
    toks: Vec<Token>,
    i: usize,
    globals: HashSet<String>,
    classes: HashSet<String>,
    ambient: Vec<String>,
    locals: Vec<String>,
}

/// `a.b.c` → `a`, `a.b`, `a.b.c`.
pub(crate) fn dot_prefixes(name: &str) -> impl Iterator<Item = &str> {
    name.char_indices()
        .filter(|&(_, c)| c == '.')
        .map(move |(i, _)| &name[..i])
        .chain(std::iter::once(name))
}

impl Parser {
    pub fn new(text: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            i: 0,
            globals: HashSet::new(),
            classes: HashSet::new(),
            ambient: Vec::new(),
            locals: Vec::new(),
        })
    }

    /// Treat `names` as already declared (used for terms typed against an
    /// existing environment and context).
    pub fn with_known<I: IntoIterator<Item = String>>(mut self, names: I) -> Self {
        self.globals.extend(names);
        self
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(SurfaceError::Parse {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<Pos> {
        if *self.peek() == t {
            Ok(self.bump().pos)
        } else {
            self.err(&[what])
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.bump().pos;
                Ok((s, p))
            }
            _ => self.err(&["identifier"]),
        }
    }

    /// A binder name: an identifier without dots.
    fn simple_ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek() {
            Tok::Ident(s) if !s.contains('.') => self.ident(),
            _ => self.err(&["binder name"]),
        }
    }

    fn known(&self, name: &str) -> bool {
        dot_prefixes(name).any(|p| self.globals.contains(p) || self.locals.iter().any(|l| l == p))
    }

    fn check_scope(&self, name: &str, pos: Pos) -> PResult<()> {
        if self.known(name) {
            Ok(())
        } else {
            Err(SurfaceError::Scope { name: name.to_string(), pos })
        }
    }

    fn declare(&mut self, name: &str, pos: Pos) -> PResult<()> {
        if !self.globals.insert(name.to_string()) {
            return Err(SurfaceError::Duplicate { name: name.to_string(), pos });
        }
        Ok(())
    }

    // ---- module level ----

    pub fn module(&mut self) -> PResult<SurfaceModule> {
        let mut items = Vec::new();
        loop {
            let item = match self.peek() {
                Tok::Eof => break,
                Tok::Kw(Kw::Class) | Tok::Kw(Kw::Structure) => Item::Class(self.class_item()?),
                Tok::Kw(Kw::Instance) | Tok::At => Item::Instance(self.instance_item()?),
                Tok::Kw(Kw::Variables) => Item::Variables(self.variables_item()?),
                Tok::Kw(Kw::Goal) => Item::Goal(self.goal_item()?),
                Tok::Kw(Kw::Defeq) => Item::Defeq(self.defeq_item()?),
                Tok::Kw(Kw::Axiom) => Item::Axiom(self.axiom_item()?),
                _ => return self.err(ITEM_STARTS),
            };
            self.locals.clear();
            items.push(item);
        }
        Ok(SurfaceModule { items })
    }

    fn class_item(&mut self) -> PResult<ClassItem> {
        let pos = self.pos();
        let is_class = matches!(self.bump().tok, Tok::Kw(Kw::Class));
        let (name, npos) = self.ident()?;
        if self.globals.contains(&name) {
            return Err(SurfaceError::Duplicate { name, pos: npos });
        }
        let params = self.binders()?;
        let mut extends = Vec::new();
        if self.eat(&Tok::Kw(Kw::Extends)) {
            loop {
                let parent = self.app()?;
                match parent.head_ident() {
                    Some(h) if self.classes.contains(h) => {}
                    Some(h) if !self.known(h) => {
                        return Err(SurfaceError::Scope { name: h.to_string(), pos: parent.pos })
                    }
                    _ => {
                        return Err(SurfaceError::Parse {
                            pos: parent.pos,
                            expected: vec!["an application of a declared class".into()],
                            found: "another expression".into(),
                        })
                    }
                }
                extends.push(parent);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let mut fields = Vec::new();
        if matches!(self.peek(), Tok::Kw(Kw::Where) | Tok::Assign) {
            self.bump();
            while *self.peek() == Tok::LParen {
                self.bump();
                let mut names = vec![self.simple_ident()?];
                while matches!(self.peek(), Tok::Ident(_)) {
                    names.push(self.simple_ident()?);
                }
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                for (n, p) in names {
                    if fields.iter().any(|f: &FieldDecl| f.name == n) {
                        return Err(SurfaceError::Duplicate { name: n, pos: p });
                    }
                    self.locals.push(n.clone());
                    fields.push(FieldDecl { name: n, ty: ty.clone(), pos: p });
                }
            }
        }
        self.globals.insert(name.clone());
        self.globals.insert(format!("{name}.mk"));
        for p in extends.iter().filter_map(|e| e.head_ident()) {
            self.globals.insert(format!("{name}.to_{p}"));
        }
        if is_class {
            self.classes.insert(name.clone());
        }
        Ok(ClassItem { name, is_class, params, extends, fields, pos })
    }

    fn instance_item(&mut self) -> PResult<InstanceItem> {
        let pos = self.pos();
        let mut priority = None;
        if self.eat(&Tok::At) {
            self.expect(Tok::LBrack, "`[`")?;
            match self.peek() {
                Tok::Ident(s) if s == "priority" => {
                    self.bump();
                }
                _ => return self.err(&["`priority`"]),
            }
            match self.peek().clone() {
                Tok::Num(n) => {
                    self.bump();
                    priority = Some(n);
                }
                _ => return self.err(&["number"]),
            }
            self.expect(Tok::RBrack, "`]`")?;
        }
        self.expect(Tok::Kw(Kw::Instance), "`instance`")?;
        let (name, npos) = self.ident()?;
        let binders = self.binders()?;
        self.expect(Tok::Colon, "`:`")?;
        let target = self.expr()?;
        let body = match self.peek() {
            Tok::Kw(Kw::Where) => {
                self.bump();
                let mut fs = Vec::new();
                while *self.peek() == Tok::LParen {
                    self.bump();
                    fs.push(self.field_assign()?);
                    self.expect(Tok::RParen, "`)`")?;
                }
                InstanceBody::Fields(fs)
            }
            Tok::Assign if *self.peek_at(1) == Tok::LBrace => {
                self.bump();
                self.bump();
                let mut fs = Vec::new();
                if *self.peek() != Tok::RBrace {
                    loop {
                        fs.push(self.field_assign()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace, "`}`")?;
                InstanceBody::Fields(fs)
            }
            Tok::Assign => {
                self.bump();
                InstanceBody::Term(self.expr()?)
            }
            _ => return self.err(&["`where`", "`:=`"]),
        };
        self.locals.clear();
        self.declare(&name, npos)?;
        Ok(InstanceItem { name, priority, binders, target, body, pos })
    }

    fn field_assign(&mut self) -> PResult<FieldAssign> {
        let (name, pos) = self.simple_ident()?;
        self.expect(Tok::Assign, "`:=`")?;
        let value = if self.eat(&Tok::Kw(Kw::Opaque)) { FieldValue::Opaque } else { FieldValue::Expr(self.expr()?) };
        Ok(FieldAssign { name, value, pos })
    }

    fn variables_item(&mut self) -> PResult<VariablesItem> {
        let pos = self.bump().pos;
        self.locals = self.ambient.clone();
        let binders = self.binders()?;
        if binders.is_empty() {
            return self.err(&["binder"]);
        }
        for b in &binders {
            if let Some(n) = &b.name {
                if self.ambient.contains(n) {
                    return Err(SurfaceError::Duplicate { name: n.clone(), pos: b.pos });
                }
                self.ambient.push(n.clone());
            }
        }
        Ok(VariablesItem { binders, pos })
    }

    /// Goals and defeq items see their own binders if they have any,
    /// otherwise the ambient `variables`.
    fn labelled_binders(&mut self) -> PResult<(String, Vec<SBinder>)> {
        let (label, _) = self.ident()?;
        let binders = self.binders()?;
        if binders.is_empty() {
            self.locals = self.ambient.clone();
        }
        Ok((label, binders))
    }

    fn goal_item(&mut self) -> PResult<GoalItem> {
        let pos = self.bump().pos;
        let (label, binders) = self.labelled_binders()?;
        self.expect(Tok::Colon, "`:`")?;
        let target = self.expr()?;
        Ok(GoalItem { label, binders, target, pos })
    }

    fn defeq_item(&mut self) -> PResult<DefeqItem> {
        let pos = self.bump().pos;
        let (label, binders) = self.labelled_binders()?;
        self.expect(Tok::Colon, "`:`")?;
        let lhs = self.expr()?;
        self.expect(Tok::Eq, "`=`")?;
        let rhs = self.expr()?;
        Ok(DefeqItem { label, binders, lhs, rhs, pos })
    }

    fn axiom_item(&mut self) -> PResult<AxiomItem> {
        let pos = self.bump().pos;
        let (name, npos) = self.ident()?;
        let binders = self.binders()?;
        self.expect(Tok::Colon, "`:`")?;
        let ty = self.expr()?;
        self.locals.clear();
        self.declare(&name, npos)?;
        Ok(AxiomItem { name, binders, ty, pos })
    }

    // ---- binders ----

    /// Zero or more `(x y : T)`, `(x)`, `[i : C a]`, `[C a]` groups; each
    /// name enters scope for the binders that follow.
    fn binders(&mut self) -> PResult<Vec<SBinder>> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::LParen => {
                    self.bump();
                    let mut names = vec![self.simple_ident()?];
                    while matches!(self.peek(), Tok::Ident(_)) {
                        names.push(self.simple_ident()?);
                    }
                    let ty = if self.eat(&Tok::Colon) {
                        self.expr()?
                    } else {
                        Expr::new(ExprKind::Type, names[0].1)
                    };
                    self.expect(Tok::RParen, "`)`")?;
                    for (n, p) in names {
                        self.locals.push(n.clone());
                        out.push(SBinder { name: Some(n), ty: ty.clone(), info: BinderInfo::Explicit, pos: p });
                    }
                }
                Tok::LBrack => {
                    let b = self.inst_binder()?;
                    if let Some(n) = &b.name {
                        self.locals.push(n.clone());
                    }
                    out.push(b);
                }
                _ => return Ok(out),
            }
        }
    }

    fn inst_binder(&mut self) -> PResult<SBinder> {
        let pos = self.expect(Tok::LBrack, "`[`")?;
        let name = match (self.peek().clone(), self.peek_at(1)) {
            (Tok::Ident(n), Tok::Colon) if !n.contains('.') => {
                self.bump();
                self.bump();
                Some(n)
            }
            _ => None,
        };
        let ty = self.expr()?;
        self.expect(Tok::RBrack, "`]`")?;
        Ok(SBinder { name, ty, info: BinderInfo::InstImplicit, pos })
    }

    // ---- expressions ----

    fn is_binder_group(&self) -> bool {
        if *self.peek() != Tok::LParen {
            return false;
        }
        let mut k = 1;
        while matches!(self.peek_at(k), Tok::Ident(s) if !s.contains('.')) {
            k += 1;
        }
        k > 1 && *self.peek_at(k) == Tok::Colon
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek() {
            Tok::Kw(Kw::Fun) => self.lambda(),
            Tok::LParen if self.is_binder_group() => {
                let saved = self.locals.len();
                let mut group = Vec::new();
                self.bump();
                let mut names = vec![self.simple_ident()?];
                while matches!(self.peek(), Tok::Ident(_)) {
                    names.push(self.simple_ident()?);
                }
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                for (n, p) in names {
                    self.locals.push(n.clone());
                    group.push(SBinder { name: Some(n), ty: ty.clone(), info: BinderInfo::Explicit, pos: p });
                }
                self.expect(Tok::Arrow, "`→`")?;
                let body = self.expr();
                self.locals.truncate(saved);
                Ok(group
                    .into_iter()
                    .rev()
                    .fold(body?, |acc, b| Expr::new(ExprKind::Pi(Box::new(b), Box::new(acc)), pos)))
            }
            Tok::LBrack => {
                let saved = self.locals.len();
                let b = self.inst_binder()?;
                if let Some(n) = &b.name {
                    self.locals.push(n.clone());
                }
                self.expect(Tok::Arrow, "`→`")?;
                let body = self.expr();
                self.locals.truncate(saved);
                Ok(Expr::new(ExprKind::Pi(Box::new(b), Box::new(body?)), pos))
            }
            _ => {
                let lhs = self.app()?;
                if self.eat(&Tok::Arrow) {
                    let rhs = self.expr()?;
                    let b = SBinder { name: None, ty: lhs, info: BinderInfo::Explicit, pos };
                    Ok(Expr::new(ExprKind::Pi(Box::new(b), Box::new(rhs)), pos))
                } else {
                    Ok(lhs)
                }
            }
        }
    }

    fn lambda(&mut self) -> PResult<Expr> {
        let pos = self.bump().pos;
        let saved = self.locals.len();
        let binders = self.binders()?;
        if binders.is_empty() {
            return self.err(&["binder"]);
        }
        self.expect(Tok::FatArrow, "`=>`")?;
        let body = self.expr();
        self.locals.truncate(saved);
        Ok(Expr::new(ExprKind::Lam(binders, Box::new(body?)), pos))
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(_) | Tok::Kw(Kw::Type) | Tok::LParen | Tok::Kw(Kw::Fun) => true,
            // `@[` opens an attribute on the next item
            Tok::At => *self.peek_at(1) != Tok::LBrack,
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Expr> {
        self.eat(&Tok::At);
        let mut f = self.postfix()?;
        while self.starts_atom() {
            self.eat(&Tok::At);
            let a = self.postfix()?;
            let pos = f.pos;
            f = Expr::new(ExprKind::App(Box::new(f), Box::new(a)), pos);
        }
        Ok(f)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        while *self.peek() == Tok::Dot {
            self.bump();
            let (field, _) = self.ident()?;
            for seg in field.split('.') {
                let pos = e.pos;
                e = Expr::new(ExprKind::Proj(Box::new(e), seg.to_string()), pos);
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.check_scope(&name, pos)?;
                self.bump();
                Ok(Expr::new(ExprKind::Ident(name), pos))
            }
            Tok::Kw(Kw::Type) => {
                self.bump();
                Ok(Expr::new(ExprKind::Type, pos))
            }
            Tok::Kw(Kw::Fun) => self.lambda(),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.err(&["identifier", "`Type`", "`(`", "`fun`"]),
        }
    }

    pub fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(&["end of input"])
        }
    }
}
