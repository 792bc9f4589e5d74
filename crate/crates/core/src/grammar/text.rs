//! Line-based grammar format and the bracketed derivation notation.
//!
//! ```text
//! semiring real
//! start S
//! rule S -> Det NP : 1.0
//! rule Adj -> <eps> : 1.0
//! rule Det -> The : 2.0
//! ```
//!
//! Any name that is the left-hand side of some rule is a nonterminal and
//! every other right-hand-side name is a terminal. The optional
//! `nonterminal NAME...` and `terminal NAME...` lines declare symbols that no
//! rule mentions; [`Wcfg::to_text`] writes them so that a grammar with unused
//! symbols reads back unchanged. An omitted `: W` means 1̄. Without a
//! `start` line the first rule's left-hand side is the start symbol.

use std::fmt::Write as _;

use super::{Derivation, Symbol, Wcfg};
use crate::automaton::text::{content_lines, header_semiring, parse_error};
use crate::error::{Error, Result};
use crate::semiring::SemiringId;
use crate::EPSILON;

struct RuleLine<'t> {
    line: usize,
    lhs: &'t str,
    rhs: Vec<&'t str>,
    weight: Option<&'t str>,
}

fn split_rule<'t>(line_no: usize, fields: &[&'t str]) -> Result<RuleLine<'t>> {
    if fields.len() < 4 || fields[2] != "->" {
        return Err(parse_error(line_no, "expected `rule LHS -> RHS... [: WEIGHT]`"));
    }
    let lhs = fields[1];
    let mut rhs: Vec<&str> = fields[3..].to_vec();
    let mut weight = None;
    if let Some(colon) = rhs.iter().position(|&f| f == ":") {
        if colon + 2 != rhs.len() {
            return Err(parse_error(line_no, "expected exactly one weight after `:`"));
        }
        weight = Some(rhs[colon + 1]);
        rhs.truncate(colon);
    }
    if rhs.is_empty() {
        return Err(parse_error(line_no, "empty right-hand side; write `<eps>`"));
    }
    if rhs.contains(&EPSILON) {
        if rhs.len() > 1 {
            return Err(parse_error(line_no, "`<eps>` must be the whole right-hand side"));
        }
        rhs.clear();
    }
    Ok(RuleLine {
        line: line_no,
        lhs,
        rhs,
        weight,
    })
}

fn at_line(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => parse_error(line, other),
    }
}

impl Wcfg {
    /// Parses the text format. `semiring` overrides a missing header and
    /// must agree with a present one.
    pub fn parse(text: &str, semiring: Option<SemiringId>) -> Result<Wcfg> {
        let semiring = header_semiring(text, semiring)?;
        let mut start: Option<(usize, &str)> = None;
        let mut declared_nonterminals = Vec::new();
        let mut declared_terminals = Vec::new();
        let mut rules = Vec::new();
        for (line_no, line) in content_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "semiring" => {}
                "start" => {
                    if fields.len() != 2 {
                        return Err(parse_error(line_no, "expected `start NAME`"));
                    }
                    if start.replace((line_no, fields[1])).is_some() {
                        return Err(parse_error(line_no, "duplicate start line"));
                    }
                }
                "nonterminal" => declared_nonterminals.extend(fields[1..].iter().map(|&n| (line_no, n))),
                "terminal" => declared_terminals.extend(fields[1..].iter().map(|&n| (line_no, n))),
                "rule" => rules.push(split_rule(line_no, &fields)?),
                other => return Err(parse_error(line_no, format!("unknown directive `{other}`"))),
            }
        }
        let (start_line, start) = match (start, rules.first()) {
            (Some(s), _) => s,
            (None, Some(r)) => (r.line, r.lhs),
            (None, None) => return Err(parse_error(0, "no `start` line and no rules")),
        };
        let mut g = Wcfg::new(semiring, start).map_err(at_line(start_line))?;
        for &(line_no, name) in &declared_nonterminals {
            g.add_nonterminal(name).map_err(at_line(line_no))?;
        }
        for r in &rules {
            g.add_nonterminal(r.lhs).map_err(at_line(r.line))?;
        }
        for &(line_no, name) in &declared_terminals {
            g.add_terminal(name).map_err(at_line(line_no))?;
        }
        let one = semiring.one();
        for r in &rules {
            let lhs = g.nonterminal_ids[r.lhs];
            let rhs = r
                .rhs
                .iter()
                .map(|name| g.symbol_or_terminal(name))
                .collect::<Result<Vec<_>>>()
                .map_err(at_line(r.line))?;
            let weight = match r.weight {
                Some(w) => semiring.parse_weight(w).map_err(|e| parse_error(r.line, e))?,
                None => one,
            };
            g.add_rule(lhs, rhs, weight).map_err(at_line(r.line))?;
        }
        Ok(g)
    }

    /// Canonical text form. Every symbol is declared, so `parse` reproduces
    /// the same symbol and rule numbering.
    pub fn to_text(&self) -> String {
        let mut out = format!("semiring {}\nstart {}\n", self.semiring, self.nonterminal_name(self.start));
        for (i, name) in self.nonterminals.iter().enumerate() {
            if i != self.start.0 {
                let _ = writeln!(out, "nonterminal {name}");
            }
        }
        for name in &self.terminals {
            let _ = writeln!(out, "terminal {name}");
        }
        for i in 0..self.rules.len() {
            let _ = writeln!(out, "rule {}", self.rule_to_string(super::RuleId(i)));
        }
        out
    }

    /// Renders a derivation as nested `(LABEL child...)` groups, where LABEL
    /// is the left-hand side of the node's rule and leaves are terminal names
    /// or `<eps>`.
    pub fn to_bracketed(&self, d: &Derivation) -> String {
        let mut out = String::new();
        self.write_bracketed(d, &mut out);
        out
    }

    fn write_bracketed(&self, d: &Derivation, out: &mut String) {
        match d {
            Derivation::Epsilon => out.push_str(EPSILON),
            Derivation::Terminal(t) => out.push_str(self.terminal_name(*t)),
            Derivation::Node(n) => {
                out.push('(');
                out.push_str(self.nonterminal_name(self.rules[n.rule.0].lhs));
                for child in &n.children {
                    out.push(' ');
                    self.write_bracketed(child, out);
                }
                out.push(')');
            }
        }
    }

    /// Reads the bracketed notation back. Each node resolves to the first
    /// rule whose left-hand side and right-hand side match the labels, so
    /// duplicate rules always resolve to the lowest id.
    pub fn parse_bracketed(&self, text: &str) -> Result<Derivation> {
        let toks = bracket_tokens(text);
        let mut pos = 0;
        let d = self.bracketed_item(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(Error::MalformedDerivation(format!("trailing input after token {pos}")));
        }
        Ok(d)
    }

    fn bracketed_item(&self, toks: &[&str], pos: &mut usize) -> Result<Derivation> {
        let tok = *toks
            .get(*pos)
            .ok_or_else(|| Error::MalformedDerivation("unexpected end of input".into()))?;
        *pos += 1;
        match tok {
            ")" => Err(Error::MalformedDerivation("unexpected `)`".into())),
            EPSILON => Ok(Derivation::Epsilon),
            "(" => {
                let label = *toks
                    .get(*pos)
                    .ok_or_else(|| Error::MalformedDerivation("missing node label".into()))?;
                *pos += 1;
                let lhs = self
                    .nonterminal_id(label)
                    .ok_or_else(|| Error::UnknownNonterminal(label.to_string()))?;
                let mut children = Vec::new();
                while toks.get(*pos) != Some(&")") {
                    children.push(self.bracketed_item(toks, pos)?);
                }
                *pos += 1;
                let rule = self
                    .rules_for(lhs)
                    .iter()
                    .copied()
                    .find(|&rid| self.children_match(&self.rules[rid.0].rhs, &children))
                    .ok_or_else(|| {
                        Error::MalformedDerivation(format!("no rule for {label} matches its children"))
                    })?;
                Ok(Derivation::node(rule, children))
            }
            name => self
                .terminal_id(name)
                .map(Derivation::Terminal)
                .ok_or_else(|| Error::UnknownSymbol(name.to_string())),
        }
    }

    fn children_match(&self, rhs: &[Symbol], children: &[Derivation]) -> bool {
        if rhs.is_empty() {
            return children == [Derivation::Epsilon];
        }
        rhs.len() == children.len()
            && rhs.iter().zip(children).all(|(sym, child)| match (sym, child) {
                (Symbol::Terminal(t), Derivation::Terminal(u)) => t == u,
                (Symbol::Nonterminal(x), Derivation::Node(n)) => self.rules[n.rule.0].lhs == *x,
                _ => false,
            })
    }
}

fn bracket_tokens(text: &str) -> Vec<&str> {
    let mut toks = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                toks.push(&text[s..i]);
            }
            if !c.is_whitespace() {
                toks.push(&text[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        toks.push(&text[s..]);
    }
    toks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::tests::{example_grammar, EXAMPLE_LEFTMOST};
    use crate::grammar::RuleId;
    use crate::semiring::Weight;
    use crate::tokens;

    const EXAMPLE: &str = "
        semiring real
        start S
        rule S -> Det NP : 1.0
        rule NP -> Adj N : 1
        rule NP -> Adj NP : 0.5
        rule N -> cyclists : 2
        rule Adj -> many : 2
        rule Adj -> <eps> : 1   # epsilon rule
        rule Det -> The : 2
    ";

    #[test]
    fn parses_example_grammar() {
        let g = Wcfg::parse(EXAMPLE, None).unwrap();
        assert_eq!(g, example_grammar());
    }

    #[test]
    fn round_trips_with_unused_symbols() {
        let mut g = example_grammar();
        g.add_nonterminal("Unused").unwrap();
        g.add_terminal("spare").unwrap();
        let text = g.to_text();
        let again = Wcfg::parse(&text, None).unwrap();
        assert_eq!(again, g);
        assert_eq!(again.to_text(), text);
    }

    #[test]
    fn start_defaults_to_first_lhs_and_weight_to_one() {
        let g = Wcfg::parse("rule A -> a\nrule B -> A A", Some(SemiringId::Tropical)).unwrap();
        assert_eq!(g.nonterminal_name(g.start()), "A");
        assert_eq!(g.rules()[0].weight, Weight::Tropical(0.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("start S\nrule S -> a <eps>", 2),
            ("start S\nrule S a", 2),
            ("start S\nrule S -> a : 0", 2),
            ("start S\nrule S -> a : 1 2", 2),
            ("start S\nfrobnicate", 2),
            ("start S\nterminal S", 2),
            ("start S\nrule S -> <sbar>", 2),
            ("", 0),
        ];
        for (text, line) in cases {
            match Wcfg::parse(text, None) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn bracketed_round_trip() {
        let g = example_grammar();
        let seq: Vec<RuleId> = EXAMPLE_LEFTMOST.iter().map(|&i| RuleId(i)).collect();
        let d = g.from_leftmost(&seq).unwrap();
        let text = g.to_bracketed(&d);
        assert_eq!(
            text,
            "(S (Det The) (NP (Adj many) (NP (Adj <eps>) (N cyclists))))"
        );
        assert_eq!(g.parse_bracketed(&text).unwrap(), d);
        assert_eq!(g.derivation_yield(&d).unwrap(), tokens("The many cyclists"));
        assert_eq!(g.parse_bracketed("cyclists").unwrap(), Derivation::Terminal(g.terminal_id("cyclists").unwrap()));
    }

    #[test]
    fn bracketed_errors() {
        let g = example_grammar();
        for bad in ["(S (Det The)", "(Det many)", "(Zzz a)", "(Det The))", "nope", ")"] {
            assert!(g.parse_bracketed(bad).is_err(), "{bad}");
        }
    }
}
