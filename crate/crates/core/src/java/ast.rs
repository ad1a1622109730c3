use std::fmt;

use serde::{Deserialize, Serialize};

/// Position of a statement within its method, dense and in source order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StatementId(pub u32);

impl StatementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementKind {
    Declaration,
    Assignment,
    Expression,
    If,
    Loop,
    Return,
    Throw,
    Break,
    Continue,
    /// An empty statement (`;`).
    Block,
    /// The `try {` head.
    Try,
    /// A `catch (T e) {` head.
    Catch,
}

impl StatementKind {
    pub fn is_predicate(self) -> bool {
        matches!(self, StatementKind::If | StatementKind::Loop)
    }
}

/// A (possibly generic, possibly array) type as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRef {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Name(String),
    Literal(String),
    This,
    Super,
    Field {
        base: Box<Expr>,
        name: String,
    },
    Call {
        target: Option<Box<Expr>>,
        name: String,
        args: Vec<Expr>,
    },
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Unary {
        op: String,
        operand: Box<Expr>,
    },
    Postfix {
        op: String,
        operand: Box<Expr>,
    },
    Binary {
        op: String,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Assign {
        op: String,
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Ternary {
        cond: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
    Cast {
        ty: TypeRef,
        operand: Box<Expr>,
    },
    InstanceOf {
        operand: Box<Expr>,
        ty: TypeRef,
    },
    New {
        ty: TypeRef,
        args: Vec<Expr>,
    },
    NewArray {
        ty: TypeRef,
        dims: Vec<Expr>,
        init: Option<Vec<Expr>>,
    },
    ArrayInit(Vec<Expr>),
    /// `Foo.class`
    ClassLiteral(TypeRef),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declarator {
    pub name: String,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForInit {
    Decl { ty: TypeRef, vars: Vec<Declarator> },
    Exprs(Vec<Expr>),
}

/// Parsed content of one statement node.
#[derive(Debug, Clone, PartialEq)]
pub enum StmtForm {
    LocalDecl { ty: TypeRef, vars: Vec<Declarator> },
    Expr(Expr),
    If(Expr),
    While(Expr),
    For { init: Option<ForInit>, cond: Option<Expr>, update: Vec<Expr> },
    ForEach { ty: TypeRef, var: String, iterable: Expr },
    Return(Option<Expr>),
    Throw(Expr),
    Break,
    Continue,
    Empty,
    Try,
    Catch { types: Vec<TypeRef>, var: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub id: StatementId,
    /// 0-based line in the normalized method text.
    pub line: usize,
    /// The full normalized line holding the statement.
    pub text: String,
    pub kind: StatementKind,
    pub form: StmtForm,
}

/// Structured nesting of statements, used to lower control flow.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Simple(StatementId),
    If { cond: StatementId, then_branch: Vec<Node>, else_branch: Option<Vec<Node>> },
    Loop { head: StatementId, body: Vec<Node> },
    Try { head: StatementId, body: Vec<Node>, catches: Vec<(StatementId, Vec<Node>)>, finally: Option<Vec<Node>> },
    Block(Vec<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodAst {
    pub name: String,
    pub params: Vec<Param>,
    pub statements: Vec<Statement>,
    pub body: Vec<Node>,
    /// Normalized method text, one entry per line.
    pub lines: Vec<String>,
}

impl MethodAst {
    pub fn statement(&self, id: StatementId) -> Option<&Statement> {
        self.statements.get(id.index())
    }

    /// The statement whose node sits on `line` of the normalized text.
    pub fn statement_at_line(&self, line: usize) -> Option<&Statement> {
        self.statements.iter().find(|s| s.line == line)
    }

    pub fn normalized_text(&self) -> String {
        self.lines.join("\n")
    }
}
