//! Makes a source prefix ending in `recv.` parseable.
//!
//! The trailing dot gets a placeholder call, open brackets are closed, and a
//! dangling compound header or decorator gets a stub body. When the final
//! statement is beyond that, trailing lines are dropped and the receiver is
//! re-emitted on its own line.

use rustpython_parser::ast as py;
use rustpython_parser::Parse;

use super::ast::HOLE;
use super::lexer::{missing_closers, receiver_span, RawKind, RawToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Repair {
    /// Placeholder call plus bracket closers.
    Placeholder,
    /// Placeholder plus a stub block for an unfinished compound header.
    StubBlock,
    /// Placeholder plus a stub function for a dangling decorator.
    StubDecorated,
    /// Broken trailing lines replaced by the bare receiver.
    Truncated { dropped_lines: usize },
}

const MAX_DROPPED_LINES: usize = 20;

pub(crate) struct Repaired {
    pub source: String,
    pub suite: Vec<py::Stmt>,
    pub repair: Repair,
}

fn parse(src: &str) -> Option<Vec<py::Stmt>> {
    py::Suite::parse(src, "<context>").ok()
}

fn leading_ws(line: &str) -> &str {
    let n = line.len() - line.trim_start_matches([' ', '\t']).len();
    &line[..n]
}

/// Indentation of the physical line where the logical line holding byte
/// `at` begins.
fn logical_indent<'s>(tokens: &[RawToken], at: usize, src: &'s str) -> &'s str {
    let start = tokens
        .iter()
        .take_while(|t| t.start < at)
        .filter(|t| t.kind == RawKind::Newline)
        .last()
        .map(|t| t.end)
        .unwrap_or(0);
    let line_start = src[..start.min(src.len())].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let first_code = tokens
        .iter()
        .find(|t| t.start >= start && t.kind != RawKind::Layout)
        .map(|t| t.start)
        .unwrap_or(at);
    let line_start = src[..first_code].rfind('\n').map(|i| i + 1).unwrap_or(line_start);
    leading_ws(&src[line_start..])
}

/// `prefix` ends with the dot of the recommendation point; `tokens` lex it and
/// `dot` indexes the dot token.
pub(crate) fn repair(prefix: &str, tokens: &[RawToken], dot: usize) -> Result<Repaired, String> {
    let dot_at = tokens[dot].start;
    let recv = receiver_span(tokens, dot, prefix)
        .map(|(s, e)| prefix[s..e].trim())
        .filter(|r| !r.is_empty())
        .ok_or_else(|| "no receiver expression before the dot".to_string())?;

    let indent = logical_indent(tokens, dot_at, prefix);
    let base = format!("{prefix}{HOLE}(){}", missing_closers(tokens, prefix));
    let attempts = [
        (base.clone(), Repair::Placeholder),
        (format!("{base}:\n{indent}    pass\n"), Repair::StubBlock),
        (format!("{base}\n{indent}    pass\n"), Repair::StubBlock),
        (format!("{base}\n{indent}def __hole_target__(): pass\n"), Repair::StubDecorated),
    ];
    for (source, repair) in attempts {
        if let Some(suite) = parse(&source) {
            return Ok(Repaired { source, suite, repair });
        }
    }

    let line_start = prefix[..dot_at].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let kept = &prefix[..line_start];
    let mut line_starts: Vec<usize> = std::iter::once(0)
        .chain(kept.match_indices('\n').map(|(i, _)| i + 1))
        .filter(|&i| i < kept.len())
        .collect();
    line_starts.push(kept.len());
    line_starts.dedup();
    let last_line = &prefix[line_start..];
    let mut indents = vec![indent.to_string(), leading_ws(last_line).to_string()];
    for dropped in 0..=MAX_DROPPED_LINES.min(line_starts.len().saturating_sub(1)) {
        let cut = line_starts[line_starts.len() - 1 - dropped];
        let head = &prefix[..cut];
        if let Some(prev) = head.lines().rev().find(|l| !l.trim().is_empty()) {
            let ws = leading_ws(prev);
            indents.push(ws.to_string());
            if prev.trim_end().ends_with(':') {
                indents.push(format!("{ws}    "));
            }
        }
        indents.push(String::new());
        let mut tried = Vec::new();
        for ind in &indents {
            if tried.contains(ind) {
                continue;
            }
            tried.push(ind.clone());
            let source = format!("{head}{ind}{recv}.{HOLE}()\n");
            if let Some(suite) = parse(&source) {
                return Ok(Repaired {
                    source,
                    suite,
                    repair: Repair::Truncated { dropped_lines: dropped },
                });
            }
        }
        indents.truncate(2);
    }
    Err("context does not parse even after repairing the final statement".to_string())
}
