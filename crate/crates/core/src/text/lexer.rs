//! Tokenizer for the `.ir` format. Whitespace-insensitive; `//` starts
//! a line comment. Positions are 1-based.

use super::SourceDiagnostic;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TokenKind {
    /// Identifier, possibly dotted (`i64`, `arith.muli`).
    Ident,
    /// `%name` (name may start with a digit: `%0`).
    Value,
    /// `@name`.
    Symbol,
    /// Decimal integer, optionally negative.
    Int,
    /// Double-quoted string; `text` holds the unescaped contents.
    Str,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Equals,
    Arrow,
    /// `?` (rule files: variable sigil).
    Question,
    /// `=>` (rule files: directed rewrite).
    FatArrow,
    /// `<=>` (rule files: bidirectional rewrite).
    BiArrow,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

pub fn tokenize(input: &str) -> Result<Vec<Token>, SourceDiagnostic> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    let mut line = 1usize;
    let mut column = 1usize;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    loop {
        let (tok_line, tok_column) = (line, column);
        let c = match chars.peek().copied() {
            None => {
                tokens.push(Token { kind: TokenKind::Eof, text: String::new(), line, column });
                return Ok(tokens);
            }
            Some(c) => c,
        };
        let err = |message: String| SourceDiagnostic { line: tok_line, column: tok_column, message };

        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' {
            bump!();
            if chars.peek() == Some(&'/') {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump!();
                }
                continue;
            }
            return Err(err("unexpected `/` (comments start with `//`)".to_string()));
        }

        let simple = match c {
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            ',' => Some(TokenKind::Comma),
            ':' => Some(TokenKind::Colon),
            '?' => Some(TokenKind::Question),
            _ => None,
        };
        if let Some(kind) = simple {
            bump!();
            tokens.push(Token { kind, text: c.to_string(), line: tok_line, column: tok_column });
            continue;
        }

        match c {
            '=' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    tokens.push(Token {
                        kind: TokenKind::FatArrow,
                        text: "=>".to_string(),
                        line: tok_line,
                        column: tok_column,
                    });
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Equals,
                        text: "=".to_string(),
                        line: tok_line,
                        column: tok_column,
                    });
                }
            }
            '<' => {
                bump!();
                if bump!() == Some('=') && chars.peek() == Some(&'>') {
                    bump!();
                    tokens.push(Token {
                        kind: TokenKind::BiArrow,
                        text: "<=>".to_string(),
                        line: tok_line,
                        column: tok_column,
                    });
                } else {
                    return Err(err("expected `<=>` after `<`".to_string()));
                }
            }
            '-' => {
                bump!();
                match chars.peek() {
                    Some('>') => {
                        bump!();
                        tokens.push(Token {
                            kind: TokenKind::Arrow,
                            text: "->".to_string(),
                            line: tok_line,
                            column: tok_column,
                        });
                    }
                    Some(d) if d.is_ascii_digit() => {
                        let mut text = String::from("-");
                        while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                            text.push(bump!().unwrap());
                        }
                        tokens.push(Token { kind: TokenKind::Int, text, line: tok_line, column: tok_column });
                    }
                    _ => return Err(err("expected `->` or a negative integer after `-`".to_string())),
                }
            }
            '%' | '@' => {
                bump!();
                let mut text = String::new();
                while chars.peek().is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') {
                    text.push(bump!().unwrap());
                }
                if text.is_empty() {
                    return Err(err(format!("expected a name after `{c}`")));
                }
                let kind = if c == '%' { TokenKind::Value } else { TokenKind::Symbol };
                tokens.push(Token { kind, text, line: tok_line, column: tok_column });
            }
            '"' => {
                bump!();
                let mut text = String::new();
                loop {
                    match bump!() {
                        None => return Err(err("unterminated string literal".to_string())),
                        Some('\n') => return Err(err("newline in string literal".to_string())),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('\\') => text.push('\\'),
                            Some('"') => text.push('"'),
                            Some('n') => text.push('\n'),
                            Some('t') => text.push('\t'),
                            other => {
                                return Err(err(format!(
                                    "invalid escape `\\{}`",
                                    other.map(String::from).unwrap_or_default()
                                )))
                            }
                        },
                        Some(other) => text.push(other),
                    }
                }
                tokens.push(Token { kind: TokenKind::Str, text, line: tok_line, column: tok_column });
            }
            _ if c.is_ascii_digit() => {
                let mut text = String::new();
                while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                    text.push(bump!().unwrap());
                }
                tokens.push(Token { kind: TokenKind::Int, text, line: tok_line, column: tok_column });
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                loop {
                    while chars.peek().is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') {
                        text.push(bump!().unwrap());
                    }
                    // A dot continues the identifier only if followed by
                    // another segment (op names like `arith.muli`).
                    if chars.peek() == Some(&'.') {
                        bump!();
                        text.push('.');
                        if !chars.peek().is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') {
                            return Err(err(format!("dangling `.` after `{text}`")));
                        }
                    } else {
                        break;
                    }
                }
                tokens.push(Token { kind: TokenKind::Ident, text, line: tok_line, column: tok_column });
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
}
