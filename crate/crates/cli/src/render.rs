//! Graphviz DOT output.

use std::fmt::Write as _;

use barhillel::{Derivation, Symbol, Wcfg, Wfsa};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn header(name: &str, rankdir: Option<&str>) -> String {
    let mut out = format!("digraph {name} {{\n  ordering=out;\n");
    if let Some(dir) = rankdir {
        let _ = writeln!(out, "  rankdir={dir};");
    }
    out
}

/// One box per rule, with edges from the left-hand side and to each
/// right-hand-side symbol in order.
pub fn grammar(g: &Wcfg) -> String {
    let mut out = header("grammar", None);
    let nt = |id: barhillel::NonterminalId| format!("nt{}", id.0);
    let mut seen_terminals = vec![false; g.terminals().len()];
    for (i, rule) in g.rules().iter().enumerate() {
        let _ = writeln!(out, "  {} [label={}];", nt(rule.lhs), quote(g.nonterminal_name(rule.lhs)));
        let _ = writeln!(out, "  r{i} [shape=box, label={}];", quote(&format!("r{i} / {}", rule.weight)));
        let _ = writeln!(out, "  {} -> r{i};", nt(rule.lhs));
        for sym in &rule.rhs {
            let target = match *sym {
                Symbol::Nonterminal(x) => nt(x),
                Symbol::Terminal(t) => {
                    if !seen_terminals[t.0] {
                        seen_terminals[t.0] = true;
                        let _ = writeln!(out, "  t{} [shape=plaintext, label={}];", t.0, quote(g.terminal_name(t)));
                    }
                    format!("t{}", t.0)
                }
            };
            let _ = writeln!(out, "  r{i} -> {target};");
        }
    }
    out.push_str("}\n");
    out
}

pub fn automaton(a: &Wfsa) -> String {
    let mut out = header("automaton", Some("LR"));
    for q in a.states() {
        let shape = if a.final_weight(q).is_zero() {
            "circle".to_string()
        } else {
            format!("doublecircle, xlabel={}", quote(&format!("/{}", a.final_weight(q))))
        };
        let _ = writeln!(out, "  s{} [shape={shape}, label={}];", q.0, quote(a.state_name(q)));
    }
    for q in a.initial_states() {
        let _ = writeln!(out, "  init{} [shape=point];", q.0);
        let _ = writeln!(out, "  init{0} -> s{0} [label={1}];", q.0, quote(&a.initial_weight(q).to_string()));
    }
    for arc in a.arcs() {
        let label = format!("{}/{}", arc.label, arc.weight);
        let _ = writeln!(out, "  s{} -> s{} [label={}];", arc.source.0, arc.target.0, quote(&label));
    }
    out.push_str("}\n");
    out
}

/// Internal nodes show their left-hand side, followed by the rule's family
/// tag when `tags` (indexed by rule id) is given.
pub fn derivation(g: &Wcfg, d: &Derivation, tags: Option<&[&str]>) -> String {
    fn walk(g: &Wcfg, d: &Derivation, tags: Option<&[&str]>, out: &mut String, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        match d {
            Derivation::Epsilon => {
                let _ = writeln!(out, "  n{id} [shape=plaintext, label={}];", quote(barhillel::EPSILON));
            }
            Derivation::Terminal(t) => {
                let _ = writeln!(out, "  n{id} [shape=plaintext, label={}];", quote(g.terminal_name(*t)));
            }
            Derivation::Node(node) => {
                let lhs = g.rules()[node.rule.0].lhs;
                let mut label = g.nonterminal_name(lhs).to_string();
                if let Some(tags) = tags {
                    label = format!("{label}\\n{}", tags[node.rule.0]);
                }
                // The label is already escaped for the line break.
                let _ = writeln!(out, "  n{id} [label=\"{}\"];", label.replace('"', "\\\""));
                for child in &node.children {
                    let c = walk(g, child, tags, out, next);
                    let _ = writeln!(out, "  n{id} -> n{c};");
                }
            }
        }
        id
    }
    let mut out = header("derivation", None);
    walk(g, d, tags, &mut out, &mut 0);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use barhillel::SemiringId;

    #[test]
    fn empty_grammar_has_empty_body() {
        let g = Wcfg::new(SemiringId::Real, "S").unwrap();
        assert_eq!(grammar(&g), "digraph grammar {\n  ordering=out;\n}\n");
    }

    #[test]
    fn quoting_escapes() {
        assert_eq!(quote("a\"b\\"), "\"a\\\"b\\\\\"");
    }

    #[test]
    fn derivation_nodes_in_preorder() {
        let g = Wcfg::parse("rule S -> a S\nrule S -> <eps>", None).unwrap();
        let d = g.parse_bracketed("(S a (S <eps>))").unwrap();
        let dot = derivation(&g, &d, Some(&["x", "y"]));
        assert!(dot.contains("n0 [label=\"S\\nx\"]"));
        assert!(dot.contains("n2 [label=\"S\\ny\"]"));
        assert!(dot.contains("n0 -> n1;\n  n2"));
        assert!(dot.contains("n2 -> n3;"));
    }
}
