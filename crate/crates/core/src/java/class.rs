//! Public-member extraction from the enclosing class.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::lexer::{join_tokens, lex, Token, TokenKind};
use super::parser::TokenCursor;
use super::ParseFailure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicField {
    pub name: String,
    /// The whole declaration, tokens joined by single spaces.
    pub declaration: String,
    /// 0-based source lines (first, last) of the declaration.
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSignature {
    pub name: String,
    pub arity: usize,
    pub varargs: bool,
    /// Modifiers, return type, name, parameters and throws clause.
    pub signature: String,
    pub span: (usize, usize),
}

impl MethodSignature {
    pub fn accepts_arity(&self, arity: usize) -> bool {
        if self.varargs {
            arity + 1 >= self.arity
        } else {
            arity == self.arity
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassContext {
    pub public_fields: Vec<PublicField>,
    pub public_method_signatures: Vec<MethodSignature>,
}

impl ClassContext {
    pub fn is_empty(&self) -> bool {
        self.public_fields.is_empty() && self.public_method_signatures.is_empty()
    }
}

/// Collects public fields and public method signatures of the class(es) in
/// `class_source`, skipping every method named `exclude_method`. Overloads
/// collapse to the first signature per (name, arity).
pub fn extract_class_context(class_source: Option<&str>, exclude_method: &str) -> Result<ClassContext, ParseFailure> {
    let Some(src) = class_source else {
        return Ok(ClassContext::default());
    };
    let mut cur = TokenCursor::new(lex(src));
    let mut ctx = ClassContext::default();
    let mut field_names = BTreeSet::new();
    let mut method_keys = BTreeSet::new();

    while !cur.at_eof() {
        if cur.at("package") || cur.at("import") {
            while !cur.eat(";") {
                if cur.advance().is_none() {
                    return Err(cur.error("unterminated declaration"));
                }
            }
            continue;
        }
        if cur.eat(";") {
            continue;
        }
        cur.skip_annotations()?;
        cur.skip_modifiers();
        if cur.at("class") {
            cur.advance();
            cur.expect_ident()?;
            skip_until_brace(&mut cur)?;
            cur.expect("{")?;
            parse_members(&mut cur, exclude_method, &mut ctx, &mut field_names, &mut method_keys)?;
        } else if cur.at("interface")
            || cur.at("enum")
            || (cur.at("@") && cur.peek_at(1).is_some_and(|t| t.is("interface")))
        {
            skip_until_brace(&mut cur)?;
            cur.skip_balanced("{", "}")?;
        } else {
            return Err(cur.unexpected("class declaration"));
        }
    }
    Ok(ctx)
}

fn skip_until_brace(cur: &mut TokenCursor) -> Result<(), ParseFailure> {
    while !cur.at("{") {
        if cur.advance().is_none() {
            return Err(cur.unexpected("`{`"));
        }
    }
    Ok(())
}

fn parse_members(
    cur: &mut TokenCursor,
    exclude_method: &str,
    ctx: &mut ClassContext,
    field_names: &mut BTreeSet<String>,
    method_keys: &mut BTreeSet<(String, usize)>,
) -> Result<(), ParseFailure> {
    loop {
        if cur.eat("}") {
            return Ok(());
        }
        if cur.at_eof() {
            return Err(cur.unexpected("`}`"));
        }
        if cur.eat(";") {
            continue;
        }
        cur.skip_annotations()?;
        let first_line = cur.line();
        let mut decl_tokens: Vec<Token> = Vec::new();
        let mods = cur.skip_modifiers();
        let public = mods.iter().any(|m| m == "public");
        decl_tokens.extend(mods.iter().map(|m| Token { kind: TokenKind::Keyword, text: m.clone(), line: first_line }));

        // Initializer blocks.
        if cur.at("{") {
            cur.skip_balanced("{", "}")?;
            continue;
        }
        // Nested types.
        if cur.at("class") || cur.at("interface") || cur.at("enum") || cur.at("@") {
            skip_until_brace(cur)?;
            cur.skip_balanced("{", "}")?;
            continue;
        }

        // Type parameters, type and name: everything up to the first
        // top-level `(`, `=`, `;` or `,`.
        let mut angle = 0i32;
        let mut head: Vec<Token> = Vec::new();
        loop {
            let Some(tok) = cur.peek() else {
                return Err(cur.unexpected("member declaration"));
            };
            if angle == 0 && matches!(tok.text.as_str(), "(" | "=" | ";" | ",") {
                break;
            }
            match tok.text.as_str() {
                "<" => angle += 1,
                ">" => angle -= 1,
                ">>" => angle -= 2,
                ">>>" => angle -= 3,
                "{" | "}" => return Err(cur.unexpected("member declaration")),
                _ => {}
            }
            head.push(cur.advance().expect("peeked"));
        }
        let Some(name_idx) = head.iter().rposition(|t| t.kind == TokenKind::Ident) else {
            return Err(cur.unexpected("member name"));
        };
        let name = head[name_idx].text.clone();
        let is_ctor = name_idx == 0 || head[..name_idx].iter().all(|t| t.is("<") || t.is(">"));
        decl_tokens.extend(head);

        if cur.at("(") {
            let params = cur.skip_balanced("(", ")")?;
            let (arity, varargs) = count_params(&params);
            decl_tokens.extend(params);
            if cur.at("throws") {
                while !cur.at("{") && !cur.at(";") {
                    match cur.advance() {
                        Some(t) => decl_tokens.push(t),
                        None => return Err(cur.unexpected("method body")),
                    }
                }
            }
            let last_line = decl_tokens.last().map_or(first_line, |t| t.line);
            if cur.at("{") {
                cur.skip_balanced("{", "}")?;
            } else {
                cur.expect(";")?;
            }
            if public && !is_ctor && name != exclude_method && method_keys.insert((name.clone(), arity)) {
                ctx.public_method_signatures.push(MethodSignature {
                    name,
                    arity,
                    varargs,
                    signature: join_tokens(&decl_tokens),
                    span: (first_line, last_line),
                });
            }
            continue;
        }

        // Field declaration: declarators up to the top-level `;`.
        let mut names = vec![name];
        let mut depth = 0i32;
        let mut expect_name = false;
        loop {
            let Some(tok) = cur.advance() else {
                return Err(cur.unexpected("`;`"));
            };
            match tok.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "," if depth == 0 => expect_name = true,
                _ => {
                    if expect_name && tok.kind == TokenKind::Ident {
                        names.push(tok.text.clone());
                    }
                    expect_name = false;
                }
            }
            let done = tok.is(";") && depth == 0;
            decl_tokens.push(tok);
            if done {
                break;
            }
        }
        if public {
            let declaration = join_tokens(&decl_tokens);
            let last_line = decl_tokens.last().map_or(first_line, |t| t.line);
            for n in names {
                if field_names.insert(n.clone()) {
                    ctx.public_fields.push(PublicField {
                        name: n,
                        declaration: declaration.clone(),
                        span: (first_line, last_line),
                    });
                }
            }
        }
    }
}

fn count_params(group: &[Token]) -> (usize, bool) {
    // group includes the surrounding parens
    let inner = &group[1..group.len() - 1];
    if inner.is_empty() {
        return (0, false);
    }
    let mut depth = 0i32;
    let mut arity = 1;
    for t in inner {
        match t.text.as_str() {
            "<" | "(" => depth += 1,
            ">" | ")" => depth -= 1,
            ">>" => depth -= 2,
            "," if depth == 0 => arity += 1,
            _ => {}
        }
    }
    let varargs = inner.iter().any(|t| t.is("..."));
    (arity, varargs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLASS: &str = r#"
package seedu.task.logic.parser;

import java.util.Optional;

public class EditCommandParser implements Parser<EditCommand> {
    public static final Prefix PREFIX_DEADLINE = new Prefix("d/");
    private static final String HINT = "edit";
    public int a, b = f(1, 2);

    public EditCommand parse(String args) throws ParseException {
        return null;
    }

    public Optional<Set<Tag>> parseTagsForEdit(Collection<String> tags) throws ParseException {
        if (tags.isEmpty()) { return Optional.empty(); }
        return Optional.of(tags);
    }

    public void log(String fmt, Object... rest) { }
    public void log(String fmt, Object... again) { }
    private Index parseIndex(String s) { return null; }
    public EditCommandParser() { }
    static { init(); }
    public static class Inner { public int hidden; }
}
"#;

    #[test]
    fn collects_public_members_except_the_buggy_method() {
        let ctx = extract_class_context(Some(CLASS), "parse").unwrap();
        let fields: Vec<_> = ctx.public_fields.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(fields, vec!["PREFIX_DEADLINE", "a", "b"]);
        assert_eq!(
            ctx.public_fields[0].declaration,
            "public static final Prefix PREFIX_DEADLINE = new Prefix ( \"d/\" ) ;"
        );
        assert_eq!(ctx.public_fields[0].span, (6, 6));

        let methods: Vec<_> = ctx.public_method_signatures.iter().map(|m| (m.name.as_str(), m.arity)).collect();
        assert_eq!(methods, vec![("parseTagsForEdit", 1), ("log", 2)]);
        assert_eq!(
            ctx.public_method_signatures[0].signature,
            "public Optional < Set < Tag >> parseTagsForEdit ( Collection < String > tags ) throws ParseException"
        );
        assert!(ctx.public_method_signatures[1].varargs);
    }

    #[test]
    fn private_only_class_is_empty() {
        let src = "class A { private int x; private void g() {} int h() { return 0; } }";
        assert!(extract_class_context(Some(src), "f").unwrap().is_empty());
    }

    #[test]
    fn absent_class_is_empty() {
        assert!(extract_class_context(None, "f").unwrap().is_empty());
    }

    #[test]
    fn malformed_class_fails() {
        assert!(extract_class_context(Some("public class A { int x = 1 "), "f").is_err());
        assert!(extract_class_context(Some("int x;"), "f").is_err());
    }

    #[test]
    fn varargs_matching() {
        let ctx = extract_class_context(Some(CLASS), "parse").unwrap();
        let log = &ctx.public_method_signatures[1];
        assert!(log.accepts_arity(1));
        assert!(log.accepts_arity(4));
        assert!(!log.accepts_arity(0));
    }
}
