//! Line-based automaton format.
//!
//! ```text
//! semiring real
//! state q0 initial 1.0
//! state q3 final
//! arc q0 q1 The 2.0
//! arc q1 q2 <eps> 0.3
//! ```
//!
//! `initial`/`final` without a weight mean 1̄; an omitted arc weight is 1̄.
//! Every state named by an arc needs its own `state` line.

use std::fmt::Write as _;

use super::{Label, Wfsa};
use crate::error::{Error, Result};
use crate::semiring::{SemiringError, SemiringId};
use crate::EPSILON;

/// Resolves the semiring from an optional `semiring` header and an optional
/// caller override, defaulting to `real`.
pub(crate) fn header_semiring(text: &str, requested: Option<SemiringId>) -> Result<SemiringId> {
    let mut header = None;
    for (line_no, line) in content_lines(text) {
        let mut fields = line.split_whitespace();
        if fields.next() == Some("semiring") {
            let name = fields.next().ok_or_else(|| parse_error(line_no, "missing semiring name"))?;
            let id: SemiringId = name.parse().map_err(|e: SemiringError| parse_error(line_no, e))?;
            if header.replace(id).is_some() {
                return Err(parse_error(line_no, "duplicate semiring header"));
            }
        }
    }
    match (header, requested) {
        (Some(h), Some(r)) if h != r => Err(SemiringError::Mismatch(h, r).into()),
        (h, r) => Ok(h.or(r).unwrap_or(SemiringId::Real)),
    }
}

pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub(crate) fn parse_error(line: usize, message: impl ToString) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn at_line(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => parse_error(line, other),
    }
}

impl Wfsa {
    /// Parses the text format. `semiring` overrides a missing header and
    /// must agree with a present one.
    pub fn parse(text: &str, semiring: Option<SemiringId>) -> Result<Wfsa> {
        let semiring = header_semiring(text, semiring)?;
        let mut a = Wfsa::new(semiring);
        let one = semiring.one();
        // States first, so arcs can reference states declared later.
        for (line_no, line) in content_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] != "state" {
                continue;
            }
            let name = fields.get(1).ok_or_else(|| parse_error(line_no, "missing state name"))?;
            let q = a.add_state(name).map_err(at_line(line_no))?;
            let mut rest = fields[2..].iter().peekable();
            while let Some(&kw) = rest.next() {
                let weight = match rest.peek() {
                    Some(&&w) if w != "initial" && w != "final" => {
                        rest.next();
                        semiring.parse_weight(w).map_err(|e| parse_error(line_no, e))?
                    }
                    _ => one,
                };
                match kw {
                    "initial" => a.set_initial(q, weight),
                    "final" => a.set_final(q, weight),
                    other => return Err(parse_error(line_no, format!("unexpected `{other}`"))),
                }
                .map_err(at_line(line_no))?;
            }
        }
        for (line_no, line) in content_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "semiring" | "state" => {}
                "symbol" => {
                    for sym in &fields[1..] {
                        a.add_symbol(sym).map_err(at_line(line_no))?;
                    }
                }
                "arc" => {
                    if !(4..=5).contains(&fields.len()) {
                        return Err(parse_error(line_no, "expected `arc SOURCE TARGET LABEL [WEIGHT]`"));
                    }
                    let state = |name: &str| {
                        a.state_id(name)
                            .ok_or_else(|| parse_error(line_no, format!("state `{name}` has no `state` line")))
                    };
                    let (src, tgt) = (state(fields[1])?, state(fields[2])?);
                    let label = (fields[3] != EPSILON).then_some(fields[3]);
                    let weight = match fields.get(4) {
                        Some(w) => semiring.parse_weight(w).map_err(|e| parse_error(line_no, e))?,
                        None => one,
                    };
                    a.add_arc(src, label, weight, tgt).map_err(at_line(line_no))?;
                }
                other => return Err(parse_error(line_no, format!("unknown directive `{other}`"))),
            }
        }
        Ok(a)
    }

    /// Canonical text form; `parse` reproduces an equal automaton.
    pub fn to_text(&self) -> String {
        let mut out = format!("semiring {}\n", self.semiring);
        let used: std::collections::BTreeSet<&str> =
            self.arcs.iter().filter_map(|a| a.label.symbol()).collect();
        let extra: Vec<&str> = self
            .alphabet
            .iter()
            .map(String::as_str)
            .filter(|s| !used.contains(s))
            .collect();
        if !extra.is_empty() {
            let _ = writeln!(out, "symbol {}", extra.join(" "));
        }
        for q in self.states() {
            let _ = write!(out, "state {}", self.state_name(q));
            if !self.initial[q.0].is_zero() {
                let _ = write!(out, " initial {}", self.initial[q.0]);
            }
            if !self.finals[q.0].is_zero() {
                let _ = write!(out, " final {}", self.finals[q.0]);
            }
            out.push('\n');
        }
        for arc in &self.arcs {
            let label = match &arc.label {
                Label::Epsilon => EPSILON,
                Label::Symbol(s) => s,
            };
            let _ = writeln!(
                out,
                "arc {} {} {} {}",
                self.state_name(arc.source),
                self.state_name(arc.target),
                label,
                arc.weight
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::StateId;
    use crate::semiring::Weight;
    use crate::tokens;

    const EXAMPLE: &str = "
        # running-example automaton
        semiring real
        state q0 initial
        state q1
        state q2
        state q3 final
        arc q0 q1 The 2
        arc q1 q2 <eps> 0.3
        arc q2 q2 many 0.75
        arc q2 q3 cyclists 1
        arc q3 q3 <eps> 0.6
    ";

    #[test]
    fn parses_example_automaton() {
        let a = Wfsa::parse(EXAMPLE, None).unwrap();
        assert_eq!(a.num_states(), 4);
        assert_eq!(a.arcs().len(), 5);
        assert_eq!(a.initial_weight(a.state_id("q0").unwrap()), Weight::Real(1.0));
        let w = a.string_weight(&tokens("The many cyclists")).unwrap();
        assert!(w.approx_eq(&Weight::Real(1.125)));
    }

    #[test]
    fn round_trips() {
        let a = Wfsa::parse(EXAMPLE, None).unwrap();
        let again = Wfsa::parse(&a.to_text(), None).unwrap();
        assert_eq!(a, again);
        assert_eq!(again.to_text(), a.to_text());
    }

    #[test]
    fn header_and_override() {
        assert_eq!(Wfsa::parse("state q", None).unwrap().semiring(), SemiringId::Real);
        let t = Wfsa::parse("state q final", Some(SemiringId::Tropical)).unwrap();
        assert_eq!(t.final_weight(StateId(0)), Weight::Tropical(0.0));
        assert!(matches!(
            Wfsa::parse("semiring real\nstate q", Some(SemiringId::Boolean)),
            Err(Error::Semiring(SemiringError::Mismatch(..)))
        ));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("state q\narc q r a 1", 2),
            ("state q\narc q q a 0", 2),
            ("state q\narc q q a -3", 2),
            ("state q\nfoo", 2),
            ("state q\narc q q <eps>", 0),
            ("state q wobble", 1),
        ];
        for (text, line) in cases {
            match Wfsa::parse(text, None) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                Ok(_) if line == 0 => {}
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
