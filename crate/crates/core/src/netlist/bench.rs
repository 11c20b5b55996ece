//! ISCAS `.bench` reader and writer, extended with the `CAMO(a, b)` cell.

use std::fmt::Write as _;

use super::{At, Gate, GateKind, Location, Netlist, NetlistError, SourceMap};

struct Call<'a> {
    head: &'a str,
    head_col: usize,
    args: Vec<(&'a str, usize)>,
}

fn syntax(msg: impl Into<String>, line: usize, column: usize) -> NetlistError {
    NetlistError::Syntax {
        msg: msg.into(),
        at: At(Some(Location { line, column })),
    }
}

/// Splits `HEAD(arg, arg)`; `col0` is the 1-based column of `s[0]`.
fn parse_call(s: &str, line: usize, col0: usize) -> Result<Call<'_>, NetlistError> {
    let lead = s.len() - s.trim_start().len();
    let open = s.find('(').ok_or_else(|| syntax("expected '('", line, col0 + lead))?;
    let close = s
        .rfind(')')
        .filter(|&c| c > open)
        .ok_or_else(|| syntax("expected ')'", line, col0 + s.trim_end().len()))?;
    if !s[close + 1..].trim().is_empty() {
        return Err(syntax("unexpected text after ')'", line, col0 + close + 1));
    }
    let head = s[..open].trim();
    if head.is_empty() {
        return Err(syntax("missing name before '('", line, col0 + lead));
    }
    let inner = &s[open + 1..close];
    let mut args = Vec::new();
    if !inner.trim().is_empty() {
        let mut start = open + 1;
        for piece in inner.split(',') {
            let pad = piece.len() - piece.trim_start().len();
            let arg = piece.trim();
            if arg.is_empty() {
                return Err(syntax("empty argument", line, col0 + start));
            }
            args.push((arg, col0 + start + pad));
            start += piece.len() + 1;
        }
    }
    Ok(Call {
        head,
        head_col: col0 + lead,
        args,
    })
}

/// Parses `.bench` text. LF and CRLF line endings are accepted; `#` starts a
/// comment.
pub fn parse_bench(text: &str) -> Result<Netlist, NetlistError> {
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut gates = Vec::new();
    let mut src = SourceMap::default();

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let code = match line.find('#') {
            Some(h) => &line[..h],
            None => line,
        };
        if code.trim().is_empty() {
            continue;
        }
        if let Some(eq) = code.find('=') {
            let lhs_raw = &code[..eq];
            let lhs = lhs_raw.trim();
            let lhs_col = 1 + lhs_raw.len() - lhs_raw.trim_start().len();
            if lhs.is_empty() {
                return Err(syntax("missing net name before '='", line_no, 1));
            }
            let call = parse_call(&code[eq + 1..], line_no, eq + 2)?;
            let at = At(Some(Location {
                line: line_no,
                column: call.head_col,
            }));
            let kind = GateKind::from_token(call.head).ok_or_else(|| NetlistError::UnknownGateKind {
                kind: call.head.to_string(),
                at,
            })?;
            src.gates.push((
                Location {
                    line: line_no,
                    column: lhs_col,
                },
                call.args
                    .iter()
                    .map(|&(_, c)| Location {
                        line: line_no,
                        column: c,
                    })
                    .collect(),
            ));
            gates.push(Gate {
                name: lhs.to_string(),
                kind,
                fanin: call.args.iter().map(|(a, _)| a.to_string()).collect(),
            });
        } else {
            let call = parse_call(code, line_no, 1)?;
            let (list, locs) = match call.head.to_ascii_uppercase().as_str() {
                "INPUT" => (&mut inputs, &mut src.inputs),
                "OUTPUT" => (&mut outputs, &mut src.outputs),
                _ => {
                    return Err(syntax(
                        format!("expected INPUT, OUTPUT or an assignment, found {}", call.head),
                        line_no,
                        call.head_col,
                    ))
                }
            };
            if call.args.len() != 1 {
                return Err(syntax(
                    format!("{} takes exactly one net", call.head),
                    line_no,
                    call.head_col,
                ));
            }
            let (name, col) = call.args[0];
            list.push(name.to_string());
            locs.push(Location {
                line: line_no,
                column: col,
            });
        }
    }
    Netlist::build(inputs, outputs, gates, &src)
}

/// Writes `.bench` text that [`parse_bench`] reads back to an equal netlist.
///
/// The header carries only counts, so camouflaged netlists that differ just
/// in the hidden functions serialize identically.
pub fn serialize_bench(n: &Netlist) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# {} inputs, {} outputs, {} gates",
        n.inputs().len(),
        n.outputs().len(),
        n.gates().len()
    );
    for i in n.inputs() {
        let _ = writeln!(s, "INPUT({i})");
    }
    for o in n.outputs() {
        let _ = writeln!(s, "OUTPUT({o})");
    }
    if !n.gates().is_empty() {
        s.push('\n');
    }
    for g in n.gates() {
        let _ = writeln!(s, "{} = {}({})", g.name, g.kind.token(), g.fanin.join(", "));
    }
    s
}
