use std::collections::BTreeSet;

use super::{BenchProgram, Element, ElementNode, ParseDiagnostic, PhaseValue, Span};
use crate::optics::{DoveAngle, SagnacConfig};
use crate::qcore::Pol;

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Splits a line (comment already stripped) into whitespace-separated
/// tokens with 1-based character columns.
fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                tokens.push(Token {
                    text: &line[b..byte],
                    column: c + 1,
                });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        tokens.push(Token {
            text: &line[b..],
            column: c + 1,
        });
    }
    tokens
}

struct KeyValue<'a> {
    key: &'a str,
    value: &'a str,
    value_column: usize,
}

struct LineParser<'d> {
    line: usize,
    diags: &'d mut Vec<ParseDiagnostic>,
}

impl LineParser<'_> {
    fn err(&mut self, column: usize, msg: impl Into<String>) {
        self.diags
            .push(ParseDiagnostic::error(self.line, column, msg));
    }

    /// Parses `key=value` arguments against the allowed key set. Returns
    /// `None` if any argument was malformed.
    fn key_values<'a>(
        &mut self,
        directive: &str,
        args: &[Token<'a>],
        allowed: &[&str],
    ) -> Option<Vec<KeyValue<'a>>> {
        let mut out: Vec<KeyValue<'a>> = Vec::new();
        let mut ok = true;
        for tok in args {
            let Some((key, value)) = tok.text.split_once('=') else {
                self.err(
                    tok.column,
                    format!("expected key=value, found `{}`", tok.text),
                );
                ok = false;
                continue;
            };
            if !allowed.contains(&key) {
                self.err(
                    tok.column,
                    format!(
                        "unknown key `{key}` for `{directive}` (expected one of: {})",
                        allowed.join(", ")
                    ),
                );
                ok = false;
                continue;
            }
            if out.iter().any(|kv| kv.key == key) {
                self.err(tok.column, format!("duplicate key `{key}`"));
                ok = false;
                continue;
            }
            if value.is_empty() {
                self.err(tok.column, format!("empty value for `{key}`"));
                ok = false;
                continue;
            }
            out.push(KeyValue {
                key,
                value,
                value_column: tok.column + key.chars().count() + 1,
            });
        }
        ok.then_some(out)
    }

    fn require<'a, 'b>(
        &mut self,
        kvs: &'b [KeyValue<'a>],
        key: &str,
        directive: &str,
        column: usize,
    ) -> Option<&'b KeyValue<'a>> {
        let found = kvs.iter().find(|kv| kv.key == key);
        if found.is_none() {
            self.err(column, format!("`{directive}` requires `{key}=`"));
        }
        found
    }

    fn number(&mut self, text: &str, column: usize, what: &str) -> Option<f64> {
        let looks_numeric = text
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.'));
        let all_numeric_chars = text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
        match text.parse::<f64>() {
            Ok(v) if looks_numeric && all_numeric_chars && v.is_finite() => Some(v),
            _ => {
                let hint = if looks_numeric && text.chars().any(|c| c.is_alphabetic()) {
                    " (unit suffixes are not accepted)"
                } else {
                    ""
                };
                self.err(column, format!("malformed {what} `{text}`{hint}"));
                None
            }
        }
    }

    fn element(&mut self, tokens: &[Token<'_>]) -> Option<Element> {
        let head = tokens[0];
        let args = &tokens[1..];
        match head.text {
            "polarizer" => {
                let [arg] = args else {
                    self.err(
                        head.column,
                        "`polarizer` takes exactly one argument: V or H",
                    );
                    return None;
                };
                match arg.text {
                    "V" => Some(Element::Polarizer(Pol::V)),
                    "H" => Some(Element::Polarizer(Pol::H)),
                    other => {
                        self.err(
                            arg.column,
                            format!("polarizer must be V or H, found `{other}`"),
                        );
                        None
                    }
                }
            }
            "measure" => {
                let [arg] = args else {
                    self.err(head.column, "`measure` takes exactly one argument: pol");
                    return None;
                };
                if arg.text == "pol" {
                    Some(Element::Measure)
                } else {
                    self.err(
                        arg.column,
                        format!(
                            "only polarization measurement is supported, found `{}`",
                            arg.text
                        ),
                    );
                    None
                }
            }
            "bs" => {
                let kvs = self.key_values("bs", args, &["ratio"])?;
                if let Some(kv) = kvs.first() {
                    let ratio = self.number(kv.value, kv.value_column, "ratio")?;
                    if ratio != 0.5 {
                        self.err(
                            kv.value_column,
                            "only a 50/50 beam splitter (ratio=0.5) is supported",
                        );
                        return None;
                    }
                }
                Some(Element::BeamSplitter)
            }
            "hwp" => {
                let kvs = self.key_values("hwp", args, &["angle"])?;
                let kv = self.require(&kvs, "angle", "hwp", head.column)?;
                let (text, col) = (kv.value, kv.value_column);
                let angle_deg = self.number(text, col, "angle")?;
                if !(-180.0..=180.0).contains(&angle_deg) {
                    self.diags.push(ParseDiagnostic::warning(
                        self.line,
                        col,
                        format!("angle {angle_deg} is interpreted modulo 180 degrees"),
                    ));
                }
                Some(Element::Hwp { angle_deg })
            }
            "phase" => {
                let kvs = self.key_values("phase", args, &["mode", "value"])?;
                let mode = self
                    .require(&kvs, "mode", "phase", head.column)
                    .map(|kv| (kv.value, kv.value_column));
                let value = self
                    .require(&kvs, "value", "phase", head.column)
                    .map(|kv| (kv.value, kv.value_column));
                let (mode, value) = (mode?, value?);
                if mode.0 != "r" {
                    self.err(
                        mode.1,
                        format!("phase mode must be `r`, found `{}`", mode.0),
                    );
                    return None;
                }
                let value = if is_symbol(value.0) {
                    PhaseValue::Symbol(value.0.to_string())
                } else {
                    PhaseValue::Radians(self.number(value.0, value.1, "phase")?)
                };
                Some(Element::Phase { value })
            }
            "sagnac" => {
                let kvs = self.key_values("sagnac", args, &["pbs", "dp"])?;
                let pbs = self
                    .require(&kvs, "pbs", "sagnac", head.column)
                    .map(|kv| (kv.value, kv.value_column));
                let dp = self
                    .require(&kvs, "dp", "sagnac", head.column)
                    .map(|kv| (kv.value, kv.value_column));
                let (pbs, dp) = (pbs?, dp?);
                let pbs_present = match pbs.0 {
                    "on" => true,
                    "off" => false,
                    other => {
                        self.err(pbs.1, format!("pbs must be on or off, found `{other}`"));
                        return None;
                    }
                };
                let dp = match dp.0 {
                    "+45" | "45" => DoveAngle::Plus45,
                    "-45" => DoveAngle::Minus45,
                    other => {
                        self.err(dp.1, format!("dp must be +45 or -45, found `{other}`"));
                        return None;
                    }
                };
                Some(Element::Sagnac(SagnacConfig::new(pbs_present, dp)))
            }
            other => {
                self.err(head.column, format!("unknown directive `{other}`"));
                None
            }
        }
    }
}

fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses bench text. On failure every error is reported; no partial program
/// is returned.
pub fn parse(text: &str) -> Result<BenchProgram, Vec<ParseDiagnostic>> {
    let mut diags = Vec::new();
    let mut elements: Vec<ElementNode> = Vec::new();
    let mut line_count = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        line_count = line;
        let content = raw.split_once('#').map_or(raw, |(before, _)| before);
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        let mut lp = LineParser {
            line,
            diags: &mut diags,
        };
        if let Some(element) = lp.element(&tokens) {
            let last = tokens[tokens.len() - 1];
            let end = last.column + last.text.chars().count();
            elements.push(ElementNode {
                element,
                span: Span {
                    line,
                    column: tokens[0].column,
                    len: end - tokens[0].column,
                },
            });
        }
    }

    check_structure(&elements, line_count, &mut diags);

    if diags.iter().any(ParseDiagnostic::is_error) {
        return Err(diags);
    }
    let symbols: BTreeSet<String> = elements
        .iter()
        .filter_map(|n| match &n.element {
            Element::Phase {
                value: PhaseValue::Symbol(s),
            } => Some(s.clone()),
            _ => None,
        })
        .collect();
    Ok(BenchProgram {
        elements,
        symbols,
        warnings: diags,
    })
}

fn check_structure(elements: &[ElementNode], line_count: usize, diags: &mut Vec<ParseDiagnostic>) {
    let mut seen_measure: Option<usize> = None;
    for (i, node) in elements.iter().enumerate() {
        let Span { line, column, .. } = node.span;
        if let Some(m) = seen_measure {
            diags.push(ParseDiagnostic::error(
                line,
                column,
                format!("directive after `measure` (line {m}); `measure` must be last"),
            ));
            break;
        }
        match node.element {
            Element::Polarizer(_) if i != 0 => diags.push(ParseDiagnostic::error(
                line,
                column,
                "`polarizer` is the source and may only appear once, as the first directive",
            )),
            Element::Measure => seen_measure = Some(line),
            _ => {}
        }
    }
    match elements.first() {
        Some(ElementNode {
            element: Element::Polarizer(_),
            ..
        }) => {}
        Some(node) => diags.push(ParseDiagnostic::error(
            node.span.line,
            node.span.column,
            "missing source: the first directive must be `polarizer V|H`",
        )),
        None => diags.push(ParseDiagnostic::error(
            1,
            1,
            "missing source: the first directive must be `polarizer V|H`",
        )),
    }
    if seen_measure.is_none() {
        diags.push(ParseDiagnostic::error(
            line_count.max(1),
            1,
            "missing measure directive",
        ));
    }
}

/// Parses raw bytes; invalid UTF-8 is reported as a diagnostic.
pub fn parse_bytes(bytes: &[u8]) -> Result<BenchProgram, Vec<ParseDiagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = 1 + valid.iter().filter(|&&b| b == b'\n').count();
            let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            // Prefix is valid UTF-8 by construction.
            let column =
                1 + std::str::from_utf8(&valid[line_start..]).map_or(0, |s| s.chars().count());
            Err(vec![ParseDiagnostic::error(
                line,
                column,
                "input is not valid UTF-8",
            )])
        }
    }
}
