//! Parsing of partial Python source up to a recommendation point.

pub mod ast;
mod lexer;
mod repair;
pub mod units;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use ast::{Expr, Stmt, StmtKind, HOLE};
use lexer::{tokenize, RawKind};
pub use repair::Repair;
pub use units::{AstUnit, Binding, UnitKind};

/// Default number of tokens kept by [`collect_token_bag`].
pub const DEFAULT_WINDOW: usize = 30;

/// Byte offsets of line starts.
#[derive(Debug, Clone)]
pub struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let starts = std::iter::once(0)
            .chain(text.match_indices('\n').map(|(i, _)| i + 1))
            .collect();
        LineIndex { starts }
    }

    /// 1-based line holding byte `offset`.
    pub fn line_of(&self, offset: usize) -> usize {
        self.starts.partition_point(|&s| s <= offset)
    }

    /// 0-based character column of byte `offset`.
    pub fn column_of(&self, text: &str, offset: usize) -> usize {
        let start = self.starts[self.line_of(offset) - 1];
        text[start..offset].chars().count()
    }

    /// Byte offset of (1-based line, 0-based char column), if it exists.
    pub fn offset(&self, text: &str, line: usize, column: usize) -> Option<usize> {
        let start = *self.starts.get(line.checked_sub(1)?)?;
        let end = self.starts.get(line).copied().unwrap_or(text.len());
        let line_text = &text[start..end];
        line_text
            .char_indices()
            .nth(column)
            .map(|(i, _)| start + i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecommendationPoint {
    pub file_id: String,
    /// 1-based.
    pub line: usize,
    /// 0-based character column of the dot.
    pub column: usize,
    /// Text left of the dot; filled in by [`parse_context`].
    #[serde(default)]
    pub receiver_expr: String,
}

impl RecommendationPoint {
    pub fn new(file_id: impl Into<String>, line: usize, column: usize) -> Self {
        RecommendationPoint {
            file_id: file_id.into(),
            line,
            column,
            receiver_expr: String::new(),
        }
    }

    /// Point at the last `.` of `text`.
    pub fn at_end(file_id: impl Into<String>, text: &str) -> Option<Self> {
        let offset = text.rfind('.')?;
        let lines = LineIndex::new(text);
        Some(Self::new(
            file_id,
            lines.line_of(offset),
            lines.column_of(text, offset),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    Literal,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    /// 1-based line.
    pub line: usize,
    /// 0-based character column.
    pub column: usize,
}

impl Token {
    pub fn position(&self) -> (usize, usize) {
        (self.line, self.column)
    }
}

/// The units derived from one statement header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementUnits {
    pub line: usize,
    pub units: Vec<AstUnit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceContext {
    pub file_id: String,
    /// Source up to and including the dot.
    pub text: String,
    pub point: RecommendationPoint,
    /// Statements at or before the point, in source order.
    pub statements: Vec<StatementUnits>,
    /// Code tokens before the dot; strings and comments excluded.
    pub token_bag: Vec<Token>,
    /// Lowered AST of the repaired prefix.
    pub module: Vec<Stmt>,
    /// The receiver expression left of the dot.
    pub receiver: Expr,
    pub repair: Repair,
}

impl SourceContext {
    pub fn units(&self) -> impl Iterator<Item = &AstUnit> {
        self.statements.iter().flat_map(|s| &s.units)
    }
}

fn flatten(stmts: &[Stmt], last_line: usize, out: &mut Vec<StatementUnits>) {
    for s in stmts {
        if s.line > last_line {
            return;
        }
        out.push(StatementUnits {
            line: s.line,
            units: units::statement_units(s),
        });
        if let StmtKind::Try {
            body,
            handlers,
            orelse,
            finalbody,
        } = &s.kind
        {
            flatten(body, last_line, out);
            for h in handlers.iter().filter(|h| h.line <= last_line) {
                out.push(StatementUnits {
                    line: h.line,
                    units: units::handler_units(h),
                });
                flatten(&h.body, last_line, out);
            }
            flatten(orelse, last_line, out);
            flatten(finalbody, last_line, out);
        } else {
            for block in s.blocks() {
                flatten(block, last_line, out);
            }
        }
    }
}

fn parse_error(point: &RecommendationPoint, message: impl Into<String>) -> Error {
    Error::Parse {
        file_id: point.file_id.clone(),
        message: message.into(),
    }
}

/// Parses and lowers a complete module.
pub fn parse_module(text: &str, file_id: &str) -> Result<Vec<Stmt>> {
    use rustpython_parser::Parse;
    let suite = rustpython_parser::ast::Suite::parse(text, file_id).map_err(|e| Error::Parse {
        file_id: file_id.to_string(),
        message: e.to_string(),
    })?;
    let lines = LineIndex::new(text);
    Ok(ast::Lowerer::new(&lines).suite(&suite))
}

/// Parses the part of `text` up to the point's dot, repairing the unfinished
/// final statement.
pub fn parse_context(text: &str, point: &RecommendationPoint) -> Result<SourceContext> {
    let lines = LineIndex::new(text);
    let invalid = |reason: &str| Error::InvalidPoint {
        file_id: point.file_id.clone(),
        line: point.line,
        column: point.column,
        reason: reason.to_string(),
    };
    let dot_at = lines
        .offset(text, point.line, point.column)
        .ok_or_else(|| invalid("position is outside the text"))?;
    if text.as_bytes()[dot_at] != b'.' {
        return Err(invalid("character at the position is not `.`"));
    }
    let prefix = &text[..=dot_at];
    let (raw, _) = tokenize(prefix);
    let dot = raw
        .iter()
        .rposition(|t| t.start == dot_at && t.kind == RawKind::Dot)
        .ok_or_else(|| parse_error(point, "the dot is not an attribute access"))?;

    let repaired = repair::repair(prefix, &raw, dot).map_err(|m| parse_error(point, m))?;
    let repaired_lines = LineIndex::new(&repaired.source);
    let mut lowerer = ast::Lowerer::new(&repaired_lines);
    let module = lowerer.suite(&repaired.suite);
    let (receiver, range) = lowerer
        .hole_receiver
        .take()
        .ok_or_else(|| parse_error(point, "placeholder call was not recovered"))?;
    let receiver_expr = repaired.source[range.start().to_usize()..range.end().to_usize()].to_string();

    let mut statements = Vec::new();
    flatten(&module, point.line, &mut statements);

    let token_bag = raw[..dot]
        .iter()
        .filter_map(|t| match t.kind {
            RawKind::Code(kind) => Some(Token {
                text: t.text(prefix).to_string(),
                kind,
                line: lines.line_of(t.start),
                column: lines.column_of(prefix, t.start),
            }),
            RawKind::Dot => Some(Token {
                text: ".".into(),
                kind: TokenKind::Punct,
                line: lines.line_of(t.start),
                column: lines.column_of(prefix, t.start),
            }),
            RawKind::Open | RawKind::Close | RawKind::Colon => Some(Token {
                text: t.text(prefix).to_string(),
                kind: TokenKind::Punct,
                line: lines.line_of(t.start),
                column: lines.column_of(prefix, t.start),
            }),
            RawKind::Str | RawKind::Newline | RawKind::Layout => None,
        })
        .collect();

    Ok(SourceContext {
        file_id: point.file_id.clone(),
        text: prefix.to_string(),
        point: RecommendationPoint {
            receiver_expr,
            ..point.clone()
        },
        statements,
        token_bag,
        module,
        receiver,
        repair: repaired.repair,
    })
}

/// Every `expr.name(` call in `text`: byte offset of the dot and `name`.
/// Lexing stops at the first lexical error.
pub fn attribute_calls(text: &str) -> Vec<(usize, String)> {
    let (raw, _) = tokenize(text);
    raw.windows(3)
        .filter(|w| {
            w[0].kind == RawKind::Dot
                && w[1].kind == RawKind::Code(TokenKind::Identifier)
                && w[2].kind == RawKind::Open
                && w[2].text(text) == "("
        })
        .map(|w| (w[0].start, w[1].text(text).to_string()))
        .collect()
}

/// Identifier and keyword tokens of `text`, in order.
pub fn code_tokens(text: &str) -> Vec<String> {
    let (raw, _) = tokenize(text);
    raw.iter()
        .filter(|t| matches!(t.kind, RawKind::Code(TokenKind::Identifier | TokenKind::Keyword)))
        .map(|t| t.text(text).to_string())
        .collect()
}

/// The last `window` identifier and keyword tokens before the point, each
/// paired with its 1-based distance back from the point.
pub fn collect_token_bag(
    ctx: &SourceContext,
    point: &RecommendationPoint,
    window: usize,
) -> Vec<(Token, usize)> {
    let before: Vec<&Token> = ctx
        .token_bag
        .iter()
        .filter(|t| matches!(t.kind, TokenKind::Identifier | TokenKind::Keyword))
        .filter(|t| t.position() < (point.line, point.column))
        .collect();
    let n = before.len();
    before
        .into_iter()
        .enumerate()
        .skip(n.saturating_sub(window))
        .map(|(i, t)| (t.clone(), n - i))
        .collect()
}

/// Splits an identifier into lowercase sub-tokens at underscores and case
/// boundaries. Acronym runs stay together and digits stick to the sub-token
/// before them.
pub fn split_identifier(name: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in name.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = part.chars().collect();
        let mut cur = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if i > 0 && c.is_uppercase() {
                let prev = chars[i - 1];
                let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
                let boundary = prev.is_lowercase()
                    || prev.is_numeric()
                    || (prev.is_uppercase() && next_lower);
                if boundary && !cur.is_empty() {
                    out.push(std::mem::take(&mut cur).to_lowercase());
                }
            }
            cur.push(c);
        }
        if !cur.is_empty() {
            out.push(cur.to_lowercase());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(src: &str) -> SourceContext {
        let p = RecommendationPoint::at_end("t.py", src).unwrap();
        parse_context(src, &p).unwrap()
    }

    fn kinds(c: &SourceContext) -> Vec<UnitKind> {
        let mut k: Vec<_> = c.units().map(|u| u.kind).collect();
        k.sort();
        k
    }

    #[test]
    fn assign_then_receiver() {
        let c = ctx("x = a.b()\nx.");
        assert_eq!(c.statements.len(), 2);
        assert_eq!(kinds(&c), vec![UnitKind::Assign, UnitKind::Invoke, UnitKind::Invoke]);
        assert_eq!(c.point.receiver_expr, "x");
        assert_eq!(c.repair, Repair::Placeholder);
    }

    #[test]
    fn for_header_units() {
        let c = ctx("for v in u.f(e, x[y]):\n    v.");
        let header: std::collections::BTreeSet<UnitKind> =
            c.statements[0].units.iter().map(|u| u.kind).collect();
        let want = [UnitKind::For, UnitKind::Invoke, UnitKind::Para, UnitKind::Access];
        assert_eq!(header, want.into_iter().collect());
    }

    #[test]
    fn unfinished_for_header_is_repaired() {
        let c = ctx("d = {}\nfor k, v in d.");
        assert_eq!(c.repair, Repair::StubBlock);
        assert_eq!(c.statements.len(), 2);
        let fors: Vec<_> = c.units().filter(|u| u.kind == UnitKind::For).collect();
        assert_eq!(fors.len(), 2);
        assert!(fors.iter().all(|u| u.rhs.contains(&HOLE.to_string())));
    }

    #[test]
    fn lone_dot_is_a_parse_error() {
        let p = RecommendationPoint::new("t.py", 1, 0);
        assert!(matches!(parse_context(".", &p), Err(Error::Parse { .. })));
    }

    #[test]
    fn point_must_be_a_dot() {
        let p = RecommendationPoint::new("t.py", 1, 0);
        assert!(matches!(parse_context("x.", &p), Err(Error::InvalidPoint { .. })));
        let p = RecommendationPoint::new("t.py", 3, 0);
        assert!(matches!(parse_context("x.", &p), Err(Error::InvalidPoint { .. })));
    }

    #[test]
    fn open_brackets_are_closed() {
        let c = ctx("r = f(g[a.");
        assert_eq!(c.point.receiver_expr, "a");
        assert_eq!(c.repair, Repair::Placeholder);
    }

    #[test]
    fn decorator_receiver() {
        let c = ctx("import functools\n@functools.");
        assert_eq!(c.repair, Repair::StubDecorated);
        assert_eq!(c.point.receiver_expr, "functools");
    }

    #[test]
    fn broken_final_line_is_truncated() {
        let c = ctx("x = 1\ny = (x +* z.");
        assert!(matches!(c.repair, Repair::Truncated { .. }));
        assert_eq!(c.point.receiver_expr, "z");
    }

    #[test]
    fn point_inside_file_ignores_later_code() {
        let src = "a = 1\nb = a.real\nc = b.imag\n";
        let p = RecommendationPoint::new("t.py", 2, 5);
        let c = parse_context(src, &p).unwrap();
        assert_eq!(c.text, "a = 1\nb = a.");
        assert_eq!(c.statements.len(), 2);
        assert!(c.token_bag.iter().all(|t| t.text != "c" && t.text != "imag"));
    }

    #[test]
    fn token_bag_skips_strings_and_comments() {
        let c = ctx("# note\ns = 'text'  # trailing\nn = 3\ns.");
        let texts: Vec<&str> = c.token_bag.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, vec!["s", "=", "n", "=", "3", "s"]);
        assert!(!texts.contains(&HOLE));
    }

    #[test]
    fn bag_window_and_distance() {
        let c = ctx("a\nb\nc\nc.");
        let bag = collect_token_bag(&c, &c.point, 2);
        let got: Vec<(&str, usize)> = bag.iter().map(|(t, d)| (t.text.as_str(), *d)).collect();
        assert_eq!(got, vec![("c", 2), ("c", 1)]);

        let c = ctx("x.");
        let bag = collect_token_bag(&c, &c.point, DEFAULT_WINDOW);
        let got: Vec<(&str, usize)> = bag.iter().map(|(t, d)| (t.text.as_str(), *d)).collect();
        assert_eq!(got, vec![("x", 1)]);
    }

    #[test]
    fn bag_of_crawl_context() {
        let src = "class Handler:\n    def crawl(self, url=None, track=None, **kwargs):\n        if track:\n            self.";
        let c = ctx(src);
        let bag = collect_token_bag(&c, &c.point, DEFAULT_WINDOW);
        let texts: std::collections::HashSet<&str> = bag.iter().map(|(t, _)| t.text.as_str()).collect();
        for w in ["def", "crawl", "self", "url", "None", "track", "kwargs", "if"] {
            assert!(texts.contains(w), "{w} missing");
        }
    }

    #[test]
    fn splits() {
        assert_eq!(split_identifier("iter_entry_points"), ["iter", "entry", "points"]);
        assert_eq!(split_identifier("getHTTPResponse2"), ["get", "http", "response2"]);
        assert_eq!(split_identifier("x"), ["x"]);
        assert_eq!(split_identifier("__init__"), ["init"]);
        assert_eq!(split_identifier("HTTPResponse"), ["http", "response"]);
        assert_eq!(split_identifier("utf8Decode"), ["utf8", "decode"]);
    }

    #[test]
    fn line_index_round_trip() {
        let text = "ab\nçd.e\n";
        let li = LineIndex::new(text);
        let off = li.offset(text, 2, 2).unwrap();
        assert_eq!(&text[off..off + 1], ".");
        assert_eq!(li.line_of(off), 2);
        assert_eq!(li.column_of(text, off), 2);
    }
}
