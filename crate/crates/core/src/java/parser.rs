//! Recursive-descent parser for the supported method subset.
//!
//! Supported statements: local declarations, assignments (including compound
//! operators and `++`/`--`), expression statements, `if`/`else`, `while`,
//! `for` (classic and enhanced), `return`, `throw`, `break`, `continue`,
//! `try`/`catch`/`finally`, empty statements and nested blocks. Anything else
//! (lambdas, method references, `switch`, `do`, labels, local classes,
//! anonymous classes, try-with-resources) is rejected with a [`ParseFailure`].

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{join_tokens, layout_lines, Token, TokenKind};
use super::ParseFailure;

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double"];
const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
    "transient",
    "volatile",
    "default",
];
const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="];

type PResult<T> = Result<T, ParseFailure>;

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" => 7,
        "<<" | ">>" | ">>>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

pub(crate) struct TokenCursor {
    toks: Vec<Token>,
    pos: usize,
    // Undo log for `>>` tokens split while closing type arguments.
    splits: Vec<(usize, Token)>,
}

#[derive(Clone, Copy)]
pub(crate) struct Checkpoint {
    pos: usize,
    splits: usize,
}

impl TokenCursor {
    pub(crate) fn new(toks: Vec<Token>) -> Self {
        TokenCursor { toks, pos: 0, splits: Vec::new() }
    }

    pub(crate) fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    pub(crate) fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.toks.get(self.pos + offset)
    }

    pub(crate) fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn advance(&mut self) -> Option<Token> {
        let tok = self.toks.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    pub(crate) fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn line(&self) -> usize {
        self.peek().or_else(|| self.toks.last()).map_or(0, |t| t.line)
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseFailure {
        ParseFailure { line: self.line(), message: message.into() }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> ParseFailure {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found `{}`", t.text)),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub(crate) fn expect(&mut self, text: &str) -> PResult<Token> {
        if self.at(text) {
            Ok(self.advance().expect("peeked"))
        } else {
            Err(self.unexpected(&format!("`{text}`")))
        }
    }

    pub(crate) fn expect_ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => Ok(self.advance().expect("peeked").text),
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn checkpoint(&self) -> Checkpoint {
        Checkpoint { pos: self.pos, splits: self.splits.len() }
    }

    pub(crate) fn restore(&mut self, cp: Checkpoint) {
        while self.splits.len() > cp.splits {
            let (idx, tok) = self.splits.pop().expect("non-empty");
            self.toks[idx] = tok;
        }
        self.pos = cp.pos;
    }

    /// Consumes one `>` closing a type-argument list, splitting `>>`/`>>>`.
    fn eat_close_angle(&mut self) -> bool {
        let Some(tok) = self.peek().cloned() else { return false };
        match tok.text.as_str() {
            ">" => {
                self.pos += 1;
                true
            }
            ">>" | ">>>" | ">=" | ">>=" => {
                self.splits.push((self.pos, tok.clone()));
                self.toks[self.pos].text = tok.text[1..].to_string();
                true
            }
            _ => false,
        }
    }

    pub(crate) fn skip_annotations(&mut self) -> PResult<()> {
        while self.at("@") && !self.peek_at(1).is_some_and(|t| t.is("interface")) {
            self.advance();
            self.expect_ident()?;
            while self.at(".") {
                self.advance();
                self.expect_ident()?;
            }
            if self.at("(") {
                self.skip_balanced("(", ")")?;
            }
        }
        Ok(())
    }

    /// Skips a balanced `open ... close` group starting at the current token.
    pub(crate) fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<Vec<Token>> {
        let mut depth = 0usize;
        let mut out = Vec::new();
        loop {
            let Some(tok) = self.advance() else {
                return Err(self.error(format!("unbalanced `{open}`")));
            };
            if tok.is(open) {
                depth += 1;
            } else if tok.is(close) {
                depth -= 1;
            }
            out.push(tok);
            if depth == 0 {
                return Ok(out);
            }
        }
    }

    pub(crate) fn skip_modifiers(&mut self) -> Vec<String> {
        let mut mods = Vec::new();
        while let Some(t) = self.peek() {
            if MODIFIERS.contains(&t.text.as_str()) && t.kind == TokenKind::Keyword {
                mods.push(self.advance().expect("peeked").text);
            } else {
                break;
            }
        }
        mods
    }

    pub(crate) fn parse_type(&mut self) -> PResult<TypeRef> {
        self.parse_type_with(true)
    }

    pub(crate) fn parse_type_with(&mut self, dims: bool) -> PResult<TypeRef> {
        let mut pieces: Vec<String> = Vec::new();
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword && (PRIMITIVES.contains(&t.text.as_str()) || t.is("void")) => {
                pieces.push(self.advance().expect("peeked").text);
            }
            Some(t) if t.kind == TokenKind::Ident => {
                pieces.push(self.advance().expect("peeked").text);
                self.parse_type_args(&mut pieces)?;
                while self.at(".") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Ident) {
                    self.advance();
                    pieces.push(".".into());
                    pieces.push(self.advance().expect("peeked").text);
                    self.parse_type_args(&mut pieces)?;
                }
            }
            _ => return Err(self.unexpected("type")),
        }
        while dims && self.at("[") && self.peek_at(1).is_some_and(|t| t.is("]")) {
            self.advance();
            self.advance();
            pieces.push("[".into());
            pieces.push("]".into());
        }
        Ok(TypeRef { text: pieces.join(" ") })
    }

    fn parse_type_args(&mut self, pieces: &mut Vec<String>) -> PResult<()> {
        if !self.at("<") {
            return Ok(());
        }
        self.advance();
        pieces.push("<".into());
        if self.eat_close_angle() {
            pieces.push(">".into());
            return Ok(());
        }
        loop {
            if self.eat("?") {
                pieces.push("?".into());
                if self.at("extends") || self.at("super") {
                    pieces.push(self.advance().expect("peeked").text);
                    let bound = self.parse_type()?;
                    pieces.push(bound.text);
                }
            } else {
                let arg = self.parse_type()?;
                pieces.push(arg.text);
            }
            if self.eat(",") {
                pieces.push(",".into());
                continue;
            }
            if self.eat_close_angle() {
                pieces.push(">".into());
                return Ok(());
            }
            return Err(self.unexpected("`>` or `,`"));
        }
    }
}

struct MethodParser {
    cur: TokenCursor,
    lines: Vec<String>,
    statements: Vec<Statement>,
}

/// Parses one method declaration into statement nodes.
pub fn parse_method(source: &str) -> Result<MethodAst, ParseFailure> {
    let layout = layout_lines(source);
    if layout.is_empty() {
        return Err(ParseFailure { line: 0, message: "empty method source".into() });
    }
    let lines: Vec<String> = layout.iter().map(|l| join_tokens(l)).collect();
    let mut toks = Vec::new();
    for (line_no, line) in layout.into_iter().enumerate() {
        for mut tok in line {
            tok.line = line_no;
            toks.push(tok);
        }
    }
    if let Some(t) = toks.iter().find(|t| t.is("->") || t.is("::")) {
        let what = if t.is("->") { "lambda expression" } else { "method reference" };
        return Err(ParseFailure { line: t.line, message: format!("unsupported construct: {what}") });
    }

    let mut p = MethodParser { cur: TokenCursor::new(toks), lines, statements: Vec::new() };
    let (name, params) = p.parse_header()?;
    let body = p.parse_block_rest()?;
    if !p.cur.at_eof() {
        return Err(p.cur.error("unexpected tokens after method body"));
    }
    p.check_one_statement_per_line()?;

    Ok(MethodAst { name, params, statements: p.statements, body, lines: p.lines })
}

impl MethodParser {
    fn parse_header(&mut self) -> PResult<(String, Vec<Param>)> {
        let c = &mut self.cur;
        c.skip_annotations()?;
        c.skip_modifiers();
        c.skip_annotations()?;
        if c.at("<") {
            c.skip_balanced("<", ">")?;
        }
        // Constructors have no return type.
        let is_ctor = c.peek().is_some_and(|t| t.kind == TokenKind::Ident) && c.peek_at(1).is_some_and(|t| t.is("("));
        if !is_ctor {
            c.parse_type()?;
        }
        let name = c.expect_ident()?;
        c.expect("(")?;
        let mut params = Vec::new();
        if !c.eat(")") {
            loop {
                c.skip_annotations()?;
                c.eat("final");
                let mut ty = c.parse_type()?.text;
                if c.eat("...") {
                    ty.push_str(" ...");
                }
                let pname = c.expect_ident()?;
                while c.at("[") {
                    c.advance();
                    c.expect("]")?;
                    ty.push_str(" [ ]");
                }
                params.push(Param { name: pname, ty });
                if c.eat(")") {
                    break;
                }
                c.expect(",")?;
            }
        }
        if c.eat("throws") {
            c.parse_type()?;
            while c.eat(",") {
                c.parse_type()?;
            }
        }
        c.expect("{")?;
        Ok((name, params))
    }

    /// Statements up to and including the closing `}` of the current block.
    fn parse_block_rest(&mut self) -> PResult<Vec<Node>> {
        let mut nodes = Vec::new();
        loop {
            if self.cur.eat("}") {
                return Ok(nodes);
            }
            if self.cur.at_eof() {
                return Err(self.cur.unexpected("`}`"));
            }
            nodes.push(self.parse_statement()?);
        }
    }

    fn parse_body(&mut self) -> PResult<Vec<Node>> {
        if self.cur.eat("{") {
            self.parse_block_rest()
        } else {
            Ok(vec![self.parse_statement()?])
        }
    }

    fn push(&mut self, line: usize, kind: StatementKind, form: StmtForm) -> StatementId {
        let id = StatementId(self.statements.len() as u32);
        self.statements.push(Statement { id, line, text: self.lines[line].clone(), kind, form });
        id
    }

    fn expect_same_line(&self, start: usize) -> PResult<()> {
        let end = self.cur.toks[self.cur.pos - 1].line;
        if end != start {
            return Err(ParseFailure { line: start, message: "statement spans multiple lines".into() });
        }
        Ok(())
    }

    fn parse_statement(&mut self) -> PResult<Node> {
        let Some(tok) = self.cur.peek().cloned() else {
            return Err(self.cur.unexpected("statement"));
        };
        let line = tok.line;
        match tok.text.as_str() {
            "{" => {
                self.cur.advance();
                Ok(Node::Block(self.parse_block_rest()?))
            }
            ";" => {
                self.cur.advance();
                Ok(Node::Simple(self.push(line, StatementKind::Block, StmtForm::Empty)))
            }
            "if" => {
                self.cur.advance();
                let cond = self.parse_paren_expr()?;
                self.expect_same_line(line)?;
                let id = self.push(line, StatementKind::If, StmtForm::If(cond));
                let then_branch = self.parse_body()?;
                let else_branch = if self.cur.eat("else") {
                    if self.cur.at("if") {
                        Some(vec![self.parse_statement()?])
                    } else {
                        Some(self.parse_body()?)
                    }
                } else {
                    None
                };
                Ok(Node::If { cond: id, then_branch, else_branch })
            }
            "while" => {
                self.cur.advance();
                let cond = self.parse_paren_expr()?;
                self.expect_same_line(line)?;
                let id = self.push(line, StatementKind::Loop, StmtForm::While(cond));
                let body = self.parse_body()?;
                Ok(Node::Loop { head: id, body })
            }
            "for" => {
                self.cur.advance();
                let form = self.parse_for_header()?;
                self.expect_same_line(line)?;
                let id = self.push(line, StatementKind::Loop, form);
                let body = self.parse_body()?;
                Ok(Node::Loop { head: id, body })
            }
            "return" => {
                self.cur.advance();
                let value = if self.cur.at(";") { None } else { Some(self.parse_expr()?) };
                self.cur.expect(";")?;
                self.expect_same_line(line)?;
                Ok(Node::Simple(self.push(line, StatementKind::Return, StmtForm::Return(value))))
            }
            "throw" => {
                self.cur.advance();
                let value = self.parse_expr()?;
                self.cur.expect(";")?;
                self.expect_same_line(line)?;
                Ok(Node::Simple(self.push(line, StatementKind::Throw, StmtForm::Throw(value))))
            }
            "break" | "continue" => {
                self.cur.advance();
                if !self.cur.at(";") {
                    return Err(self.cur.error("labeled jumps are not supported"));
                }
                self.cur.advance();
                let (kind, form) = if tok.is("break") {
                    (StatementKind::Break, StmtForm::Break)
                } else {
                    (StatementKind::Continue, StmtForm::Continue)
                };
                Ok(Node::Simple(self.push(line, kind, form)))
            }
            "try" => self.parse_try(line),
            "do" | "switch" | "synchronized" | "assert" | "class" | "interface" | "enum" | "case" | "default"
            | "else" | "catch" | "finally" => {
                Err(self.cur.error(format!("unsupported construct: `{}` statement", tok.text)))
            }
            _ => {
                if tok.kind == TokenKind::Ident && self.cur.peek_at(1).is_some_and(|t| t.is(":")) {
                    return Err(self.cur.error("unsupported construct: labeled statement"));
                }
                if let Some(form) = self.try_local_decl()? {
                    self.cur.expect(";")?;
                    self.expect_same_line(line)?;
                    return Ok(Node::Simple(self.push(line, StatementKind::Declaration, form)));
                }
                let expr = self.parse_expr()?;
                self.cur.expect(";")?;
                self.expect_same_line(line)?;
                let kind = match &expr {
                    Expr::Assign { .. } => StatementKind::Assignment,
                    Expr::Unary { op, .. } | Expr::Postfix { op, .. } if op == "++" || op == "--" => {
                        StatementKind::Assignment
                    }
                    _ => StatementKind::Expression,
                };
                Ok(Node::Simple(self.push(line, kind, StmtForm::Expr(expr))))
            }
        }
    }

    fn parse_try(&mut self, line: usize) -> PResult<Node> {
        self.cur.expect("try")?;
        if self.cur.at("(") {
            return Err(self.cur.error("unsupported construct: try-with-resources"));
        }
        self.cur.expect("{")?;
        let head = self.push(line, StatementKind::Try, StmtForm::Try);
        let body = self.parse_block_rest()?;
        let mut catches = Vec::new();
        while self.cur.at("catch") {
            let cline = self.cur.line();
            self.cur.advance();
            self.cur.expect("(")?;
            self.cur.eat("final");
            let mut types = vec![self.cur.parse_type()?];
            while self.cur.eat("|") {
                types.push(self.cur.parse_type()?);
            }
            let var = self.cur.expect_ident()?;
            self.cur.expect(")")?;
            self.expect_same_line(cline)?;
            let id = self.push(cline, StatementKind::Catch, StmtForm::Catch { types, var });
            self.cur.expect("{")?;
            catches.push((id, self.parse_block_rest()?));
        }
        let finally = if self.cur.eat("finally") {
            self.cur.expect("{")?;
            Some(self.parse_block_rest()?)
        } else {
            None
        };
        if catches.is_empty() && finally.is_none() {
            return Err(self.cur.error("`try` without `catch` or `finally`"));
        }
        Ok(Node::Try { head, body, catches, finally })
    }

    fn parse_paren_expr(&mut self) -> PResult<Expr> {
        self.cur.expect("(")?;
        let e = self.parse_expr()?;
        self.cur.expect(")")?;
        Ok(e)
    }

    fn parse_for_header(&mut self) -> PResult<StmtForm> {
        self.cur.expect("(")?;
        // Enhanced for: [final] Type name : expr
        let cp = self.cur.checkpoint();
        self.cur.eat("final");
        if let Ok(ty) = self.cur.parse_type() {
            if let Ok(var) = self.cur.expect_ident() {
                if self.cur.eat(":") {
                    let iterable = self.parse_expr()?;
                    self.cur.expect(")")?;
                    return Ok(StmtForm::ForEach { ty, var, iterable });
                }
            }
        }
        self.cur.restore(cp);

        let init = if self.cur.at(";") {
            None
        } else if let Some(StmtForm::LocalDecl { ty, vars }) = self.try_local_decl()? {
            Some(ForInit::Decl { ty, vars })
        } else {
            Some(ForInit::Exprs(self.parse_expr_list(";")?))
        };
        self.cur.expect(";")?;
        let cond = if self.cur.at(";") { None } else { Some(self.parse_expr()?) };
        self.cur.expect(";")?;
        let update = if self.cur.at(")") { Vec::new() } else { self.parse_expr_list(")")? };
        self.cur.expect(")")?;
        Ok(StmtForm::For { init, cond, update })
    }

    fn parse_expr_list(&mut self, terminator: &str) -> PResult<Vec<Expr>> {
        let mut out = vec![self.parse_expr()?];
        while !self.cur.at(terminator) {
            self.cur.expect(",")?;
            out.push(self.parse_expr()?);
        }
        Ok(out)
    }

    /// Attempts `[final] Type name [= init] (, name [= init])*`, leaving the
    /// terminating `;` unconsumed. Restores the cursor when the tokens are not
    /// a declaration.
    fn try_local_decl(&mut self) -> PResult<Option<StmtForm>> {
        let cp = self.cur.checkpoint();
        let _ = self.cur.skip_annotations();
        self.cur.eat("final");
        let Ok(ty) = self.cur.parse_type() else {
            self.cur.restore(cp);
            return Ok(None);
        };
        let is_decl = self.cur.peek().is_some_and(|t| t.kind == TokenKind::Ident)
            && self.cur.peek_at(1).is_some_and(|t| t.is("=") || t.is(";") || t.is(",") || t.is("["));
        if !is_decl || ty.text == "void" {
            self.cur.restore(cp);
            return Ok(None);
        }
        let mut vars = Vec::new();
        loop {
            let name = self.cur.expect_ident()?;
            while self.cur.eat("[") {
                self.cur.expect("]")?;
            }
            let init = if self.cur.eat("=") { Some(self.parse_var_init()?) } else { None };
            vars.push(Declarator { name, init });
            if !self.cur.eat(",") {
                break;
            }
        }
        Ok(Some(StmtForm::LocalDecl { ty, vars }))
    }

    fn parse_var_init(&mut self) -> PResult<Expr> {
        if self.cur.at("{") {
            self.parse_array_init()
        } else {
            self.parse_expr()
        }
    }

    fn parse_array_init(&mut self) -> PResult<Expr> {
        self.cur.expect("{")?;
        let mut items = Vec::new();
        while !self.cur.at("}") {
            items.push(self.parse_var_init()?);
            if !self.cur.eat(",") {
                break;
            }
        }
        self.cur.expect("}")?;
        Ok(Expr::ArrayInit(items))
    }

    pub(crate) fn parse_expr(&mut self) -> PResult<Expr> {
        let lhs = self.parse_ternary()?;
        if let Some(op) = self.cur.peek().map(|t| t.text.clone()) {
            if ASSIGN_OPS.contains(&op.as_str()) {
                if !matches!(lhs, Expr::Name(_) | Expr::Field { .. } | Expr::Index { .. }) {
                    return Err(self.cur.error(format!("invalid assignment target before `{op}`")));
                }
                self.cur.advance();
                let value = self.parse_expr()?;
                return Ok(Expr::Assign { op, target: Box::new(lhs), value: Box::new(value) });
            }
        }
        Ok(lhs)
    }

    fn parse_ternary(&mut self) -> PResult<Expr> {
        let cond = self.parse_binary(1)?;
        if !self.cur.eat("?") {
            return Ok(cond);
        }
        let then = self.parse_expr()?;
        self.cur.expect(":")?;
        let otherwise = self.parse_ternary()?;
        Ok(Expr::Ternary { cond: Box::new(cond), then: Box::new(then), otherwise: Box::new(otherwise) })
    }

    fn parse_binary(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let Some(op) = self.cur.peek().map(|t| t.text.clone()) else { break };
            if op == "instanceof" {
                if 7 < min {
                    break;
                }
                self.cur.advance();
                let ty = self.cur.parse_type()?;
                lhs = Expr::InstanceOf { operand: Box::new(lhs), ty };
                continue;
            }
            let Some(prec) = binary_precedence(&op) else { break };
            if prec < min {
                break;
            }
            self.cur.advance();
            let rhs = self.parse_binary(prec + 1)?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.cur.peek().cloned() else {
            return Err(self.cur.unexpected("expression"));
        };
        if tok.kind == TokenKind::Op && matches!(tok.text.as_str(), "+" | "-" | "!" | "~" | "++" | "--") {
            self.cur.advance();
            let operand = self.parse_unary()?;
            return Ok(Expr::Unary { op: tok.text, operand: Box::new(operand) });
        }
        if tok.is("(") {
            if let Some(cast) = self.try_cast()? {
                return Ok(cast);
            }
        }
        self.parse_postfix()
    }

    fn try_cast(&mut self) -> PResult<Option<Expr>> {
        let cp = self.cur.checkpoint();
        self.cur.advance();
        let primitive = self.cur.peek().is_some_and(|t| PRIMITIVES.contains(&t.text.as_str()));
        let Ok(ty) = self.cur.parse_type() else {
            self.cur.restore(cp);
            return Ok(None);
        };
        if !self.cur.eat(")") {
            self.cur.restore(cp);
            return Ok(None);
        }
        let operand_follows = self.cur.peek().is_some_and(|t| {
            matches!(t.kind, TokenKind::Ident | TokenKind::Literal)
                || matches!(t.text.as_str(), "(" | "!" | "~" | "this" | "new" | "super")
                || (primitive && matches!(t.text.as_str(), "+" | "-" | "++" | "--"))
        });
        if !operand_follows {
            self.cur.restore(cp);
            return Ok(None);
        }
        let operand = self.parse_unary()?;
        Ok(Some(Expr::Cast { ty, operand: Box::new(operand) }))
    }

    fn parse_args(&mut self) -> PResult<Vec<Expr>> {
        self.cur.expect("(")?;
        let mut args = Vec::new();
        if self.cur.eat(")") {
            return Ok(args);
        }
        loop {
            args.push(self.parse_expr()?);
            if self.cur.eat(")") {
                return Ok(args);
            }
            self.cur.expect(",")?;
        }
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.parse_primary()?;
        loop {
            if self.cur.eat(".") {
                let Some(tok) = self.cur.peek().cloned() else {
                    return Err(self.cur.unexpected("member name"));
                };
                if tok.is("class") {
                    self.cur.advance();
                    expr = Expr::ClassLiteral(TypeRef { text: expr_type_text(&expr) });
                    continue;
                }
                if tok.kind != TokenKind::Ident {
                    return Err(self.cur.error(format!("unsupported member access `.{}`", tok.text)));
                }
                self.cur.advance();
                if self.cur.at("(") {
                    let args = self.parse_args()?;
                    expr = Expr::Call { target: Some(Box::new(expr)), name: tok.text, args };
                } else {
                    expr = Expr::Field { base: Box::new(expr), name: tok.text };
                }
            } else if self.cur.at("[") {
                self.cur.advance();
                let index = self.parse_expr()?;
                self.cur.expect("]")?;
                expr = Expr::Index { base: Box::new(expr), index: Box::new(index) };
            } else if self.cur.at("++") || self.cur.at("--") {
                let op = self.cur.advance().expect("peeked").text;
                expr = Expr::Postfix { op, operand: Box::new(expr) };
            } else {
                return Ok(expr);
            }
        }
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.cur.peek().cloned() else {
            return Err(self.cur.unexpected("expression"));
        };
        match tok.kind {
            TokenKind::Literal => {
                self.cur.advance();
                Ok(Expr::Literal(tok.text))
            }
            TokenKind::Ident => {
                self.cur.advance();
                if self.cur.at("(") {
                    let args = self.parse_args()?;
                    Ok(Expr::Call { target: None, name: tok.text, args })
                } else {
                    Ok(Expr::Name(tok.text))
                }
            }
            TokenKind::Keyword => match tok.text.as_str() {
                "this" => {
                    self.cur.advance();
                    if self.cur.at("(") {
                        return Err(self.cur.error("unsupported construct: explicit constructor call"));
                    }
                    Ok(Expr::This)
                }
                "super" => {
                    self.cur.advance();
                    if self.cur.at("(") {
                        return Err(self.cur.error("unsupported construct: explicit constructor call"));
                    }
                    Ok(Expr::Super)
                }
                "new" => self.parse_creator(),
                t if PRIMITIVES.contains(&t) || t == "void" => {
                    // int.class, int[].class
                    let ty = self.cur.parse_type()?;
                    self.cur.expect(".")?;
                    self.cur.expect("class")?;
                    Ok(Expr::ClassLiteral(ty))
                }
                _ => Err(self.cur.unexpected("expression")),
            },
            TokenKind::Op => {
                if tok.is("(") {
                    self.cur.advance();
                    let inner = self.parse_expr()?;
                    self.cur.expect(")")?;
                    Ok(inner)
                } else {
                    Err(self.cur.unexpected("expression"))
                }
            }
        }
    }

    fn parse_creator(&mut self) -> PResult<Expr> {
        self.cur.expect("new")?;
        let mut ty = self.cur.parse_type_with(false)?;
        if self.cur.at("(") {
            let args = self.parse_args()?;
            if self.cur.at("{") {
                return Err(self.cur.error("unsupported construct: anonymous class"));
            }
            return Ok(Expr::New { ty, args });
        }
        if !self.cur.at("[") {
            return Err(self.cur.unexpected("`(` or `[`"));
        }
        let mut dims = Vec::new();
        while self.cur.at("[") && !self.cur.peek_at(1).is_some_and(|t| t.is("]")) {
            self.cur.advance();
            dims.push(self.parse_expr()?);
            self.cur.expect("]")?;
            ty.text.push_str(" [ ]");
        }
        while self.cur.at("[") && self.cur.peek_at(1).is_some_and(|t| t.is("]")) {
            self.cur.advance();
            self.cur.advance();
            ty.text.push_str(" [ ]");
        }
        let init = if dims.is_empty() {
            match self.parse_array_init()? {
                Expr::ArrayInit(items) => Some(items),
                _ => unreachable!("array initializer"),
            }
        } else {
            None
        };
        Ok(Expr::NewArray { ty, dims, init })
    }

    fn check_one_statement_per_line(&self) -> PResult<()> {
        let mut seen: BTreeMap<usize, StatementId> = BTreeMap::new();
        for stmt in &self.statements {
            if seen.insert(stmt.line, stmt.id).is_some() {
                return Err(ParseFailure { line: stmt.line, message: "multiple statements on one line".into() });
            }
        }
        Ok(())
    }
}

fn expr_type_text(expr: &Expr) -> String {
    match expr {
        Expr::Name(n) => n.clone(),
        Expr::Field { base, name } => format!("{} . {}", expr_type_text(base), name),
        _ => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<StatementKind> {
        parse_method(src).unwrap().statements.iter().map(|s| s.kind).collect()
    }

    #[test]
    fn empty_method_has_no_statements() {
        let m = parse_method("void f ( ) { }").unwrap();
        assert_eq!(m.name, "f");
        assert!(m.statements.is_empty());
        assert!(m.body.is_empty());
    }

    #[test]
    fn parses_each_supported_statement_kind() {
        use StatementKind::*;
        let src = "int f(int a, String[] xs) throws IOException {
            int b = a + 2;
            b += 3;
            a++;
            g(b);
            if (a > b) {
                return a;
            } else if (a < 0) {
                throw new IllegalStateException(\"neg\");
            } else {
                ;
            }
            while (a < 10) {
                a = a * 2;
                if (a == 4) break;
                continue;
            }
            for (int i = 0, j = 1; i < a; i++, j--) b = i;
            for (String x : xs) g(x);
            try {
                b = h();
            } catch (IOException | RuntimeException e) {
                b = 0;
            } finally {
                g(b);
            }
            return b;
        }";
        assert_eq!(
            kinds(src),
            vec![
                Declaration,
                Assignment,
                Assignment,
                Expression,
                If,
                Return,
                If,
                Throw,
                Block,
                Loop,
                Assignment,
                If,
                Break,
                Continue,
                Loop,
                Assignment,
                Loop,
                Expression,
                Try,
                Assignment,
                Catch,
                Assignment,
                Expression,
                Return
            ]
        );
    }

    #[test]
    fn statement_ids_follow_source_order_and_lines() {
        let m = parse_method("void f() {\n  int a = 1;\n  if (a > 0) {\n    a = 2;\n  }\n}").unwrap();
        let lines: Vec<_> = m.statements.iter().map(|s| (s.id.0, s.line)).collect();
        assert_eq!(lines, vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(m.statements[1].text, "if ( a > 0 ) {");
        assert_eq!(m.statement_at_line(3).unwrap().text, "a = 2 ;");
    }

    #[test]
    fn generics_casts_and_arrays() {
        let src = "void f() {
            Map<String, List<Integer>> m = new HashMap<>();
            List<List<String>> n = new ArrayList<List<String>>();
            int[] a = new int[] { 1, 2 };
            int[][] g = new int[3][];
            String s = (String) o.get(0);
            int q = (a.length) - 1;
            boolean t = o instanceof Foo && a[0] < b;
            Class<?> c = String.class;
            x = y > 0 ? y : -y;
        }";
        let m = parse_method(src).unwrap();
        assert_eq!(m.statements.len(), 9);
        assert!(matches!(
            &m.statements[4].form,
            StmtForm::LocalDecl { vars, .. } if matches!(vars[0].init, Some(Expr::Cast { .. }))
        ));
        assert!(matches!(
            &m.statements[5].form,
            StmtForm::LocalDecl { vars, .. } if matches!(vars[0].init, Some(Expr::Binary { .. }))
        ));
    }

    #[test]
    fn rejects_off_grammar_constructs() {
        let cases = [
            "void f() { list.forEach(x -> g(x)); }",
            "void f() { list.forEach(this::g); }",
            "void f() { switch (a) { case 1: break; } }",
            "void f() { do { a++; } while (a < 3); }",
            "void f() { Runnable r = new Runnable() { public void run() {} }; }",
            "void f() { outer: while (true) { break outer; } }",
            "void f() { try (R r = open()) { } }",
            "void f() { a = ; }",
            "void f() { a = 1; ",
            "void f() { 1 = a; }",
        ];
        for src in cases {
            assert!(parse_method(src).is_err(), "should reject: {src}");
        }
    }

    #[test]
    fn parse_failure_reports_line() {
        let err = parse_method("void f() {\n  int a = 1;\n  g(x -> x);\n}").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("lambda"));
    }

    #[test]
    fn reconstruction_equals_normalized_text() {
        let src = "public int f(int x) {\n int y = x;\n if (y > 1) {\n y--;\n }\n return y;\n}";
        let m = parse_method(src).unwrap();
        let norm = super::super::lexer::normalize_method_text(src);
        assert_eq!(m.normalized_text(), norm);
        for s in &m.statements {
            assert_eq!(m.lines[s.line], s.text);
        }
    }
}
