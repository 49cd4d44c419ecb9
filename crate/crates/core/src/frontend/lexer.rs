//! Thin wrapper over the Python lexer: classified tokens with byte ranges.

use rustpython_parser::lexer::lex;
use rustpython_parser::{Mode, Tok};

use super::TokenKind;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawToken {
    pub kind: RawKind,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawKind {
    Code(TokenKind),
    Str,
    Dot,
    Open,
    Close,
    Colon,
    Newline,
    Layout,
}

impl RawToken {
    pub fn text<'s>(&self, src: &'s str) -> &'s str {
        &src[self.start..self.end]
    }
}

fn classify(tok: &Tok) -> RawKind {
    match tok {
        Tok::Name { .. } | Tok::Match | Tok::Case | Tok::Type => RawKind::Code(TokenKind::Identifier),
        Tok::Int { .. } | Tok::Float { .. } | Tok::Complex { .. } => RawKind::Code(TokenKind::Literal),
        Tok::String { .. } => RawKind::Str,
        Tok::Dot => RawKind::Dot,
        Tok::Lpar | Tok::Lsqb | Tok::Lbrace => RawKind::Open,
        Tok::Rpar | Tok::Rsqb | Tok::Rbrace => RawKind::Close,
        Tok::Colon => RawKind::Colon,
        Tok::Newline => RawKind::Newline,
        Tok::Indent
        | Tok::Dedent
        | Tok::EndOfFile
        | Tok::StartModule
        | Tok::StartInteractive
        | Tok::StartExpression => RawKind::Layout,
        other => {
            let shown = other.to_string();
            let bare = shown.trim_matches('\'');
            if bare.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                RawKind::Code(TokenKind::Keyword)
            } else {
                RawKind::Code(TokenKind::Punct)
            }
        }
    }
}

/// Lexes `src`, stopping silently at the first lexical error (an unfinished
/// string or similar at the end of a partial file). The flag reports whether
/// lexing reached the end cleanly.
pub(crate) fn tokenize(src: &str) -> (Vec<RawToken>, bool) {
    let mut out = Vec::new();
    for item in lex(src, Mode::Module) {
        match item {
            Ok((tok, range)) => out.push(RawToken {
                kind: classify(&tok),
                start: range.start().to_usize(),
                end: range.end().to_usize(),
            }),
            Err(_) => return (out, false),
        }
    }
    (out, true)
}

/// Closing brackets needed to balance every bracket left open in `tokens`.
pub(crate) fn missing_closers(tokens: &[RawToken], src: &str) -> String {
    let mut stack = Vec::new();
    for t in tokens {
        match t.kind {
            RawKind::Open => stack.push(match t.text(src) {
                "(" => ')',
                "[" => ']',
                _ => '}',
            }),
            RawKind::Close => {
                stack.pop();
            }
            _ => {}
        }
    }
    stack.iter().rev().collect()
}

/// Byte range of the receiver expression ending right before the dot token at
/// index `dot`: a postfix chain of names, literals, calls, subscripts and
/// attribute accesses.
pub(crate) fn receiver_span(tokens: &[RawToken], dot: usize, src: &str) -> Option<(usize, usize)> {
    let end = tokens.get(dot)?.start;
    let mut i = dot;
    let mut start = None;
    loop {
        if i == 0 {
            break;
        }
        let t = &tokens[i - 1];
        match t.kind {
            RawKind::Close => {
                let mut depth = 0usize;
                let mut j = i;
                while j > 0 {
                    j -= 1;
                    match tokens[j].kind {
                        RawKind::Close => depth += 1,
                        RawKind::Open => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        RawKind::Newline => return None,
                        _ => {}
                    }
                }
                if depth != 0 {
                    return None;
                }
                start = Some(tokens[j].start);
                i = j;
                // A call or subscript needs a callee; a bare parenthesized
                // expression stands on its own.
                let callee = i > 0
                    && matches!(
                        tokens[i - 1].kind,
                        RawKind::Code(TokenKind::Identifier) | RawKind::Close | RawKind::Str
                    );
                if !callee {
                    break;
                }
            }
            RawKind::Code(TokenKind::Identifier) | RawKind::Str | RawKind::Code(TokenKind::Literal) => {
                start = Some(t.start);
                i -= 1;
                if i > 0 && tokens[i - 1].kind == RawKind::Dot {
                    i -= 1;
                    continue;
                }
                if t.kind == RawKind::Str && i > 0 && tokens[i - 1].kind == RawKind::Str {
                    continue;
                }
                break;
            }
            RawKind::Code(TokenKind::Keyword) if matches!(t.text(src), "None" | "True" | "False") => {
                start = Some(t.start);
                break;
            }
            _ => break,
        }
    }
    start.map(|s| (s, end))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recv(src: &str) -> Option<String> {
        let (toks, _) = tokenize(src);
        let dot = toks.iter().rposition(|t| t.kind == RawKind::Dot)?;
        receiver_span(&toks, dot, src).map(|(s, e)| src[s..e].to_string())
    }

    #[test]
    fn receivers() {
        assert_eq!(recv("x = a.b(c).").as_deref(), Some("a.b(c)"));
        assert_eq!(recv("foo(bar[1].").as_deref(), Some("bar[1]"));
        assert_eq!(recv("s = 'a,b'.").as_deref(), Some("'a,b'"));
        assert_eq!(recv("(a + b).").as_deref(), Some("(a + b)"));
        assert_eq!(recv(".").as_deref(), None);
    }

    #[test]
    fn closers_balance() {
        let src = "f(a, [b, {c: d.";
        let (toks, _) = tokenize(src);
        assert_eq!(missing_closers(&toks, src), "}])");
    }

    #[test]
    fn kinds() {
        let (toks, _) = tokenize("def f(x): return None");
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(kinds[0], RawKind::Code(TokenKind::Keyword));
        assert_eq!(kinds[1], RawKind::Code(TokenKind::Identifier));
        assert!(kinds.contains(&RawKind::Colon));
    }
}
