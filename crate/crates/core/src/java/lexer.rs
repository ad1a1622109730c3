//! Lexer for the Java-like surface syntax.
//!
//! Lexing is total: characters that do not start any known token are emitted
//! as single-character operator tokens and left for the parser to reject.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Ident,
    Keyword,
    /// Numeric, string, char, boolean and `null` literals.
    Literal,
    Op,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 0-based physical line of the first character in the lexed source.
    pub line: usize,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

const LITERAL_WORDS: &[&str] = &["true", "false", "null"];

// Longest first so a prefix scan picks the maximal munch.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "<<", ">>",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Tokenizes `src`, skipping whitespace and comments.
pub fn lex(src: &str) -> Vec<Token> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 0;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                if chars[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            i = (i + 2).min(chars.len());
            continue;
        }

        let start = i;
        let kind;
        if c.is_alphabetic() || c == '_' || c == '$' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            kind = if LITERAL_WORDS.contains(&word.as_str()) {
                TokenKind::Literal
            } else if is_keyword(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            i = scan_number(&chars, i);
            kind = TokenKind::Literal;
        } else if c == '"' || c == '\'' {
            i = scan_quoted(&chars, i, c);
            kind = TokenKind::Literal;
        } else {
            let rest: String = chars[i..(i + 4).min(chars.len())].iter().collect();
            let len = OPERATORS.iter().find(|op| rest.starts_with(*op)).map_or(1, |op| op.len());
            i += len;
            kind = TokenKind::Op;
        }
        tokens.push(Token { kind, text: chars[start..i].iter().collect(), line });
    }
    tokens
}

fn scan_number(chars: &[char], mut i: usize) -> usize {
    let hex = chars[i] == '0' && matches!(chars.get(i + 1), Some('x' | 'X'));
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
            // Exponent sign: 1e-5, 2.5E+3 (not in hex literals).
            if !hex && matches!(c, 'e' | 'E') && matches!(chars.get(i + 1), Some('+' | '-')) {
                i += 2;
                continue;
            }
            if c == '.' && !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                // "1." is a double literal; "1.foo" leaves the dot to the parser.
                if !chars.get(i + 1).is_some_and(|d| d.is_alphabetic() || *d == '_') {
                    i += 1;
                }
                break;
            }
            i += 1;
        } else {
            break;
        }
    }
    i
}

fn scan_quoted(chars: &[char], mut i: usize, quote: char) -> usize {
    i += 1;
    while i < chars.len() && chars[i] != '\n' {
        if chars[i] == '\\' {
            i += 2;
            continue;
        }
        if chars[i] == quote {
            return i + 1;
        }
        i += 1;
    }
    // Unterminated: the literal runs to the end of the line.
    i.min(chars.len())
}

/// Token texts of `src`, in order.
pub fn token_texts(src: &str) -> Vec<String> {
    lex(src).into_iter().map(|t| t.text).collect()
}

const CONTROL_HEADERS: &[&str] = &["if", "while", "for", "catch", "switch", "synchronized"];
const BLOCK_CONTINUATIONS: &[&str] = &["else", "catch", "finally", "while", ")", ",", ";"];

/// Re-lays out a method (or any statement sequence) so that every statement
/// occupies exactly one line, with tokens separated by single spaces.
///
/// Breaks after `;`, block `{` and block `}` (unless followed by `else`,
/// `catch` or `finally`), and after a control header `)` whose body is not a
/// block. Array-initializer braces do not break.
pub fn layout_lines(src: &str) -> Vec<Vec<Token>> {
    let tokens = lex(src);
    let mut lines: Vec<Vec<Token>> = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut paren_depth = 0usize;
    // Paren depth at which a control header's condition opened.
    let mut header_parens: Vec<usize> = Vec::new();
    let mut pending_header = false;
    // true = block brace, false = initializer brace
    let mut braces: Vec<bool> = Vec::new();

    let flush = |current: &mut Vec<Token>, lines: &mut Vec<Vec<Token>>| {
        if !current.is_empty() {
            lines.push(std::mem::take(current));
        }
    };

    for (idx, tok) in tokens.iter().enumerate() {
        let next = tokens.get(idx + 1);
        let prev = if idx > 0 { tokens.get(idx - 1) } else { None };
        let mut break_after = false;

        match tok.text.as_str() {
            "(" => {
                if pending_header {
                    header_parens.push(paren_depth);
                    pending_header = false;
                }
                paren_depth += 1;
            }
            ")" => {
                paren_depth = paren_depth.saturating_sub(1);
                if header_parens.last() == Some(&paren_depth) {
                    header_parens.pop();
                    if !next.is_some_and(|n| n.is("{")) {
                        break_after = true;
                    }
                }
            }
            "{" => {
                let initializer = prev.is_some_and(|p| {
                    p.is("=") || p.is("]") || ((p.is(",") || p.is("{")) && braces.last() == Some(&false))
                });
                braces.push(!initializer);
                if !initializer && paren_depth == 0 {
                    break_after = true;
                }
            }
            "}" => {
                let block = braces.pop().unwrap_or(true);
                if block && paren_depth == 0 {
                    flush(&mut current, &mut lines);
                    if !next.is_some_and(|n| BLOCK_CONTINUATIONS.contains(&n.text.as_str())) {
                        break_after = true;
                    }
                }
            }
            ";" if paren_depth == 0 => break_after = true,
            "else" | "do" => {
                if !next.is_some_and(|n| n.is("{") || n.is("if")) {
                    break_after = true;
                }
            }
            t if CONTROL_HEADERS.contains(&t) && tok.kind == TokenKind::Keyword => {
                pending_header = true;
            }
            _ => {}
        }

        current.push(tok.clone());
        if break_after {
            flush(&mut current, &mut lines);
        }
    }
    flush(&mut current, &mut lines);
    lines
}

/// Canonical method text: one statement per line, single-space separated tokens.
pub fn normalize_method_text(src: &str) -> String {
    layout_lines(src).iter().map(|line| join_tokens(line)).collect::<Vec<_>>().join("\n")
}

pub(crate) fn join_tokens(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
}
