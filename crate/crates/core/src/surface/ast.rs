use crate::kernel::BinderInfo;

use super::Pos;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurfaceModule {
    pub items: Vec<Item>,
}

impl SurfaceModule {
    pub fn classes(&self) -> impl Iterator<Item = &ClassItem> {
        self.items.iter().filter_map(|i| match i {
            Item::Class(c) => Some(c),
            _ => None,
        })
    }

    pub fn class(&self, name: &str) -> Option<&ClassItem> {
        self.classes().find(|c| c.name == name)
    }

    pub fn goals(&self) -> impl Iterator<Item = &GoalItem> {
        self.items.iter().filter_map(|i| match i {
            Item::Goal(g) => Some(g),
            _ => None,
        })
    }

    pub fn defeqs(&self) -> impl Iterator<Item = &DefeqItem> {
        self.items.iter().filter_map(|i| match i {
            Item::Defeq(d) => Some(d),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Class(ClassItem),
    Instance(InstanceItem),
    Variables(VariablesItem),
    Goal(GoalItem),
    Defeq(DefeqItem),
    Axiom(AxiomItem),
}

impl Item {
    pub fn pos(&self) -> Pos {
        match self {
            Item::Class(c) => c.pos,
            Item::Instance(i) => i.pos,
            Item::Variables(v) => v.pos,
            Item::Goal(g) => g.pos,
            Item::Defeq(d) => d.pos,
            Item::Axiom(a) => a.pos,
        }
    }
}

/// One binder per name: `(R M : Type)` is stored as two binders.
/// Anonymous instance binders (`[semiring R]`) have no name.
#[derive(Clone, Debug, PartialEq)]
pub struct SBinder {
    pub name: Option<String>,
    pub ty: Expr,
    pub info: BinderInfo,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: Expr,
    pub pos: Pos,
}

/// `class` or `structure` (the latter is not registered for instance search).
#[derive(Clone, Debug, PartialEq)]
pub struct ClassItem {
    pub name: String,
    pub is_class: bool,
    pub params: Vec<SBinder>,
    pub extends: Vec<Expr>,
    pub fields: Vec<FieldDecl>,
    pub pos: Pos,
}

impl ClassItem {
    /// Class names of the extends clause, in declared order.
    pub fn parent_names(&self) -> Vec<String> {
        self.extends.iter().filter_map(|e| e.head_ident().map(str::to_string)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldValue {
    Expr(Expr),
    Opaque,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldAssign {
    pub name: String,
    pub value: FieldValue,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceBody {
    Fields(Vec<FieldAssign>),
    Term(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceItem {
    pub name: String,
    pub priority: Option<i64>,
    pub binders: Vec<SBinder>,
    pub target: Expr,
    pub body: InstanceBody,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariablesItem {
    pub binders: Vec<SBinder>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoalItem {
    pub label: String,
    pub binders: Vec<SBinder>,
    pub target: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefeqItem {
    pub label: String,
    pub binders: Vec<SBinder>,
    pub lhs: Expr,
    pub rhs: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomItem {
    pub name: String,
    pub binders: Vec<SBinder>,
    pub ty: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Type,
    /// Possibly dotted: `i.to_semiring.zero`, `ring.to_semiring`.
    Ident(String),
    App(Box<Expr>, Box<Expr>),
    /// Postfix projection on a parenthesised expression: `(e).f`.
    Proj(Box<Expr>, String),
    Pi(Box<SBinder>, Box<Expr>),
    Lam(Vec<SBinder>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }

    pub fn spine(&self) -> (&Expr, Vec<&Expr>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let ExprKind::App(f, a) = &cur.kind {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn head_ident(&self) -> Option<&str> {
        match &self.spine().0.kind {
            ExprKind::Ident(n) => Some(n),
            _ => None,
        }
    }
}
