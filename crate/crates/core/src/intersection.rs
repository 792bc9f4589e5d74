//! Intersection grammars: triplet nonterminals `[q,X,q']`, the two
//! constructions, trimming, and rule-family bookkeeping.
//!
//! Rule families, in emission order (generalized tag / legacy tag):
//!
//! | family | tag | rule | weight |
//! |---|---|---|---|
//! | `Start` | 5a / 4a | `S' → [qI,<sbar>,qF]` (legacy: `[qI,S,qF]`) | λ(qI) ⊗ ρ(qF) |
//! | `TailEpsilon` | 5b | `[qI,<sbar>,q1] → [qI,<sbar>,q0] [q0,<eps>,q1]` | 1̄ |
//! | `TailExit` | 5c | `[qI,<sbar>,q0] → [qI,S,q0]` | 1̄ |
//! | `Lifted` | 5d / 4d | `[q0,X,qM] → [q0,α1,q1] … [qM-1,αM,qM]` | rule weight |
//! | `EpsilonRule` | 5e / 4e | `[q,X,q] → ε` | rule weight |
//! | `Arc` | 5f / 4f | `[q0,a,q1] → a` (ε-arcs: `→ ε`) | arc weight |
//! | `PrefixEpsilon` | 5g | `[q0,a,q2] → [q0,<eps>,q1] [q1,a,q2]` | 1̄ |

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use crate::automaton::{ArcId, Label, StateId, Wfsa};
use crate::error::{Error, Result};
use crate::grammar::{NonterminalId, RuleId, Symbol, TerminalId, Wcfg};
use crate::semiring::{SemiringError, Weight};
use crate::{EPSILON, START_BAR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Construction {
    /// Classical Bar-Hillel: drops every path that uses an ε-arc.
    Legacy,
    /// Threads ε-arcs through prefix and tail rules.
    Generalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Start,
    TailEpsilon,
    TailExit,
    Lifted,
    EpsilonRule,
    Arc,
    PrefixEpsilon,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Start,
        Family::TailEpsilon,
        Family::TailExit,
        Family::Lifted,
        Family::EpsilonRule,
        Family::Arc,
        Family::PrefixEpsilon,
    ];

    /// Families emitted by a construction, in emission order.
    pub fn of(construction: Construction) -> &'static [Family] {
        match construction {
            Construction::Generalized => &Family::ALL,
            Construction::Legacy => &[Family::Start, Family::Lifted, Family::EpsilonRule, Family::Arc],
        }
    }

    pub fn tag(self, construction: Construction) -> &'static str {
        let generalized = construction == Construction::Generalized;
        match self {
            Family::Start if generalized => "5a",
            Family::Start => "4a",
            Family::TailEpsilon => "5b",
            Family::TailExit => "5c",
            Family::Lifted if generalized => "5d",
            Family::Lifted => "4d",
            Family::EpsilonRule if generalized => "5e",
            Family::EpsilonRule => "4e",
            Family::Arc if generalized => "5f",
            Family::Arc => "4f",
            Family::PrefixEpsilon => "5g",
        }
    }

    pub fn from_tag(tag: &str) -> Option<(Family, Construction)> {
        [Construction::Generalized, Construction::Legacy]
            .into_iter()
            .flat_map(|c| Family::of(c).iter().map(move |&f| (f, c)))
            .find(|&(f, c)| f.tag(c) == tag)
    }
}

/// Middle component of a triplet nonterminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mid {
    /// A nonterminal of the input grammar.
    Nonterminal(NonterminalId),
    /// A terminal, numbered as in the intersection grammar (whose terminal
    /// ids extend those of the input grammar).
    Terminal(TerminalId),
    Epsilon,
    StartBar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triplet {
    pub left: StateId,
    pub mid: Mid,
    pub right: StateId,
}

/// What an intersection rule was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceRef {
    Rule(RuleId),
    Arc(ArcId),
    /// The initial and final state of a start rule.
    Endpoints(StateId, StateId),
    None,
}

type RuleKey = (SourceRef, NonterminalId, Vec<Symbol>);

#[derive(Clone, Debug)]
pub struct IntersectionGrammar {
    construction: Construction,
    grammar: Wcfg,
    triplets: Vec<Option<Triplet>>,
    triplet_ids: HashMap<Triplet, NonterminalId>,
    families: Vec<Family>,
    sources: Vec<SourceRef>,
    trimmed: bool,
    source_grammar: Wcfg,
    source_automaton: Wfsa,
    rule_index: HashMap<RuleKey, RuleId>,
}

/// Checks that `g` and `a` can be intersected.
fn check_compatible(g: &Wcfg, a: &Wfsa) -> Result<()> {
    if g.semiring() != a.semiring() {
        return Err(SemiringError::Mismatch(g.semiring(), a.semiring()).into());
    }
    if let Some(clash) = a.alphabet().iter().find(|s| g.nonterminal_id(s).is_some()) {
        return Err(Error::AlphabetMismatch(format!(
            "`{clash}` labels automaton arcs but is a nonterminal of the grammar"
        )));
    }
    Ok(())
}

struct Builder<'i> {
    g: &'i Wcfg,
    a: &'i Wfsa,
    out: IntersectionGrammar,
}

impl<'i> Builder<'i> {
    fn new(g: &'i Wcfg, a: &'i Wfsa, construction: Construction) -> Result<Self> {
        check_compatible(g, a)?;
        let mut sigma: Vec<String> = g.terminals().to_vec();
        let known: HashSet<&str> = g.terminals().iter().map(String::as_str).collect();
        sigma.extend(a.alphabet().iter().filter(|s| !known.contains(s.as_str())).cloned());

        let mut mids: Vec<Mid> = Vec::new();
        if construction == Construction::Generalized {
            mids.push(Mid::StartBar);
        }
        mids.extend((0..g.num_nonterminals()).map(|i| Mid::Nonterminal(NonterminalId(i))));
        mids.extend((0..sigma.len()).map(|i| Mid::Terminal(TerminalId(i))));
        mids.push(Mid::Epsilon);

        let render = |t: &Triplet| render_triplet(g, a, &sigma, t);
        let mut triplets = Vec::new();
        for &mid in &mids {
            for left in a.states() {
                for right in a.states() {
                    triplets.push(Triplet { left, mid, right });
                }
            }
        }
        let names: Vec<String> = triplets.iter().map(render).collect();
        let taken: HashSet<&str> = names
            .iter()
            .map(String::as_str)
            .chain(sigma.iter().map(String::as_str))
            .chain((0..g.num_nonterminals()).map(|i| g.nonterminal_name(NonterminalId(i))))
            .collect();
        let mut start = format!("{}'", g.nonterminal_name(g.start()));
        while taken.contains(start.as_str()) {
            start.push('\'');
        }

        let mut grammar = Wcfg::new(g.semiring(), &start)?;
        for name in &sigma {
            grammar.add_terminal(name)?;
        }
        let mut slots = vec![None];
        let mut triplet_ids = HashMap::new();
        for (t, name) in triplets.into_iter().zip(&names) {
            let id = grammar.add_nonterminal(name)?;
            debug_assert_eq!(id.0, slots.len());
            slots.push(Some(t));
            triplet_ids.insert(t, id);
        }
        Ok(Builder {
            g,
            a,
            out: IntersectionGrammar {
                construction,
                grammar,
                triplets: slots,
                triplet_ids,
                families: Vec::new(),
                sources: Vec::new(),
                trimmed: false,
                source_grammar: g.clone(),
                source_automaton: a.clone(),
                rule_index: HashMap::new(),
            },
        })
    }

    fn nt(&self, left: StateId, mid: Mid, right: StateId) -> NonterminalId {
        self.out.triplet_ids[&Triplet { left, mid, right }]
    }

    fn sym(&self, left: StateId, mid: Mid, right: StateId) -> Symbol {
        Symbol::Nonterminal(self.nt(left, mid, right))
    }

    fn emit(&mut self, family: Family, source: SourceRef, lhs: NonterminalId, rhs: Vec<Symbol>, weight: Weight) -> Result<()> {
        let id = self.out.grammar.add_rule(lhs, rhs.clone(), weight)?;
        self.out.families.push(family);
        self.out.sources.push(source);
        self.out.rule_index.entry((source, lhs, rhs)).or_insert(id);
        Ok(())
    }

    fn start_rules(&mut self) -> Result<()> {
        let mid = match self.out.construction {
            Construction::Generalized => Mid::StartBar,
            Construction::Legacy => Mid::Nonterminal(self.g.start()),
        };
        let start = self.out.grammar.start();
        for qi in self.a.initial_states() {
            for qf in self.a.final_states() {
                let w = self.a.initial_weight(qi) * self.a.final_weight(qf);
                self.emit(Family::Start, SourceRef::Endpoints(qi, qf), start, vec![self.sym(qi, mid, qf)], w)?;
            }
        }
        Ok(())
    }

    fn tail_rules(&mut self) -> Result<()> {
        let one = self.g.semiring().one();
        let states: Vec<StateId> = self.a.states().collect();
        for qi in self.a.initial_states() {
            for &q0 in &states {
                for &q1 in &states {
                    let lhs = self.nt(qi, Mid::StartBar, q1);
                    let rhs = vec![self.sym(qi, Mid::StartBar, q0), self.sym(q0, Mid::Epsilon, q1)];
                    self.emit(Family::TailEpsilon, SourceRef::None, lhs, rhs, one)?;
                }
            }
        }
        let s = Mid::Nonterminal(self.g.start());
        for qi in self.a.initial_states() {
            for &q0 in &states {
                let lhs = self.nt(qi, Mid::StartBar, q0);
                self.emit(Family::TailExit, SourceRef::None, lhs, vec![self.sym(qi, s, q0)], one)?;
            }
        }
        Ok(())
    }

    /// State vectors are visited in lexicographic order.
    fn lifted_rules(&mut self) -> Result<()> {
        let n = self.a.num_states();
        for (i, rule) in self.g.rules().iter().enumerate() {
            let m = rule.rhs.len();
            if m == 0 {
                continue;
            }
            for code in 0..n.pow(m as u32 + 1) {
                let mut v = vec![0usize; m + 1];
                let mut c = code;
                for k in (0..=m).rev() {
                    v[k] = c % n;
                    c /= n;
                }
                let q = |k: usize| StateId(v[k]);
                let lhs = self.nt(q(0), Mid::Nonterminal(rule.lhs), q(m));
                let rhs = (0..m)
                    .map(|k| {
                        let mid = match rule.rhs[k] {
                            Symbol::Nonterminal(x) => Mid::Nonterminal(x),
                            Symbol::Terminal(t) => Mid::Terminal(t),
                        };
                        self.sym(q(k), mid, q(k + 1))
                    })
                    .collect();
                self.emit(Family::Lifted, SourceRef::Rule(RuleId(i)), lhs, rhs, rule.weight)?;
            }
        }
        Ok(())
    }

    fn epsilon_rules(&mut self) -> Result<()> {
        for (i, rule) in self.g.rules().iter().enumerate() {
            if !rule.rhs.is_empty() {
                continue;
            }
            for q in self.a.states() {
                let lhs = self.nt(q, Mid::Nonterminal(rule.lhs), q);
                self.emit(Family::EpsilonRule, SourceRef::Rule(RuleId(i)), lhs, Vec::new(), rule.weight)?;
            }
        }
        Ok(())
    }

    fn arc_rules(&mut self) -> Result<()> {
        for (i, arc) in self.a.arcs().iter().enumerate() {
            let (mid, rhs) = match &arc.label {
                Label::Epsilon => (Mid::Epsilon, Vec::new()),
                Label::Symbol(s) => {
                    let t = self.out.grammar.terminal_id(s).expect("Σ covers the automaton alphabet");
                    (Mid::Terminal(t), vec![Symbol::Terminal(t)])
                }
            };
            let lhs = self.nt(arc.source, mid, arc.target);
            self.emit(Family::Arc, SourceRef::Arc(ArcId(i)), lhs, rhs, arc.weight)?;
        }
        Ok(())
    }

    fn prefix_rules(&mut self) -> Result<()> {
        let one = self.g.semiring().one();
        let states: Vec<StateId> = self.a.states().collect();
        for t in 0..self.out.grammar.terminals().len() {
            let a = Mid::Terminal(TerminalId(t));
            for &q0 in &states {
                for &q1 in &states {
                    for &q2 in &states {
                        let lhs = self.nt(q0, a, q2);
                        let rhs = vec![self.sym(q0, Mid::Epsilon, q1), self.sym(q1, a, q2)];
                        self.emit(Family::PrefixEpsilon, SourceRef::None, lhs, rhs, one)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn render_triplet(g: &Wcfg, a: &Wfsa, sigma: &[String], t: &Triplet) -> String {
    let mid = match t.mid {
        Mid::Nonterminal(x) => g.nonterminal_name(x),
        Mid::Terminal(s) => &sigma[s.0],
        Mid::Epsilon => EPSILON,
        Mid::StartBar => START_BAR,
    };
    format!("[{},{},{}]", a.state_name(t.left), mid, a.state_name(t.right))
}

impl IntersectionGrammar {
    /// Every generalized family (tags 5a to 5g) over all states, untrimmed.
    pub fn intersect_general(g: &Wcfg, a: &Wfsa) -> Result<Self> {
        let mut b = Builder::new(g, a, Construction::Generalized)?;
        b.start_rules()?;
        b.tail_rules()?;
        b.lifted_rules()?;
        b.epsilon_rules()?;
        b.arc_rules()?;
        b.prefix_rules()?;
        Ok(b.out)
    }

    /// Every legacy family (tags 4a, 4d, 4e, 4f) over all states, untrimmed.
    pub fn intersect_legacy(g: &Wcfg, a: &Wfsa) -> Result<Self> {
        let mut b = Builder::new(g, a, Construction::Legacy)?;
        b.start_rules()?;
        b.lifted_rules()?;
        b.epsilon_rules()?;
        b.arc_rules()?;
        Ok(b.out)
    }

    pub fn build(g: &Wcfg, a: &Wfsa, construction: Construction) -> Result<Self> {
        match construction {
            Construction::Generalized => Self::intersect_general(g, a),
            Construction::Legacy => Self::intersect_legacy(g, a),
        }
    }

    /// Drops unproductive and unreachable triplets together with every rule
    /// that mentions one. Provenance follows the surviving rules.
    pub fn trim(&self) -> IntersectionGrammar {
        let (grammar, map) = self.grammar.trim();
        let triplets: Vec<Option<Triplet>> = map.nonterminals.iter().map(|x| self.triplets[x.0]).collect();
        let triplet_ids = triplets
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| (t, NonterminalId(i))))
            .collect();
        let families = map.rules.iter().map(|r| self.families[r.0]).collect();
        let sources: Vec<SourceRef> = map.rules.iter().map(|r| self.sources[r.0]).collect();
        let mut rule_index = HashMap::new();
        for (i, rule) in grammar.rules().iter().enumerate() {
            rule_index
                .entry((sources[i], rule.lhs, rule.rhs.clone()))
                .or_insert(RuleId(i));
        }
        IntersectionGrammar {
            construction: self.construction,
            grammar,
            triplets,
            triplet_ids,
            families,
            sources,
            trimmed: true,
            source_grammar: self.source_grammar.clone(),
            source_automaton: self.source_automaton.clone(),
            rule_index,
        }
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn grammar(&self) -> &Wcfg {
        &self.grammar
    }

    pub fn source_grammar(&self) -> &Wcfg {
        &self.source_grammar
    }

    pub fn source_automaton(&self) -> &Wfsa {
        &self.source_automaton
    }

    pub fn is_trimmed(&self) -> bool {
        self.trimmed
    }

    /// The triplet behind a nonterminal; `None` for the fresh start symbol.
    pub fn triplet(&self, x: NonterminalId) -> Option<Triplet> {
        self.triplets.get(x.0).copied().flatten()
    }

    pub fn triplet_id(&self, t: &Triplet) -> Option<NonterminalId> {
        self.triplet_ids.get(t).copied()
    }

    pub fn family(&self, rule: RuleId) -> Family {
        self.families[rule.0]
    }

    pub fn source(&self, rule: RuleId) -> SourceRef {
        self.sources[rule.0]
    }

    pub fn tag(&self, rule: RuleId) -> &'static str {
        self.families[rule.0].tag(self.construction)
    }

    /// Finds the rule with this provenance, left-hand side and right-hand side.
    pub fn find_rule(&self, source: SourceRef, lhs: NonterminalId, rhs: Vec<Symbol>) -> Option<RuleId> {
        self.rule_index.get(&(source, lhs, rhs)).copied()
    }

    pub fn render_triplet(&self, t: &Triplet) -> String {
        render_triplet(&self.source_grammar, &self.source_automaton, self.grammar.terminals(), t)
    }

    /// Number of emitted rules per family.
    pub fn rule_family_counts(&self) -> Result<BTreeMap<Family, usize>> {
        if self.trimmed {
            return Err(Error::Trimmed);
        }
        let mut counts: BTreeMap<Family, usize> = Family::of(self.construction).iter().map(|&f| (f, 0)).collect();
        for f in &self.families {
            *counts.entry(*f).or_default() += 1;
        }
        Ok(counts)
    }

    /// Per-family counts predicted from the sizes of the inputs alone.
    pub fn closed_form_counts(&self) -> BTreeMap<Family, usize> {
        let g = &self.source_grammar;
        let a = &self.source_automaton;
        let q = a.num_states();
        let i = a.initial_states().len();
        let f = a.final_states().len();
        let sigma = self.grammar.terminals().len();
        let lifted = g
            .rules()
            .iter()
            .filter(|r| !r.rhs.is_empty())
            .map(|r| q.pow(r.rhs.len() as u32 + 1))
            .sum();
        let eps_rules = g.rules().iter().filter(|r| r.rhs.is_empty()).count();
        Family::of(self.construction)
            .iter()
            .map(|&fam| {
                let n = match fam {
                    Family::Start => i * f,
                    Family::TailEpsilon => i * q * q,
                    Family::TailExit => i * q,
                    Family::Lifted => lifted,
                    Family::EpsilonRule => eps_rules * q,
                    Family::Arc => a.arcs().len(),
                    Family::PrefixEpsilon => sigma * q * q * q,
                };
                (fam, n)
            })
            .collect()
    }

    /// `|R| · |Q|^(1 + longest right-hand side)`, an upper bound on the
    /// number of lifted rules.
    pub fn lifted_bound(&self) -> usize {
        let g = &self.source_grammar;
        g.rules().len() * self.source_automaton.num_states().pow(1 + g.longest_rhs() as u32)
    }

    /// One line per rule: `index tag source`, where source is `rule:N`,
    /// `arc:N`, `endpoints:QI,QF` or `-`.
    pub fn provenance_text(&self) -> String {
        let mut out = String::new();
        for (i, (fam, src)) in self.families.iter().zip(&self.sources).enumerate() {
            let _ = writeln!(out, "{i} {} {}", fam.tag(self.construction), self.render_source(*src));
        }
        out
    }

    fn render_source(&self, src: SourceRef) -> String {
        let a = &self.source_automaton;
        match src {
            SourceRef::Rule(r) => format!("rule:{}", r.0),
            SourceRef::Arc(id) => format!("arc:{}", id.0),
            SourceRef::Endpoints(qi, qf) => format!("endpoints:{},{}", a.state_name(qi), a.state_name(qf)),
            SourceRef::None => "-".to_string(),
        }
    }

    /// Distinct triplet mids used by rule left-hand sides.
    pub fn used_triplets(&self) -> BTreeSet<Triplet> {
        self.grammar
            .rules()
            .iter()
            .filter_map(|r| self.triplet(r.lhs))
            .collect()
    }
}

/// Reads a provenance sidecar back into per-rule family tags.
pub fn parse_provenance(text: &str) -> Result<Vec<(Family, Construction)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |m: &str| Error::Parse {
            line: n + 1,
            message: m.to_string(),
        };
        if fields.len() != 3 {
            return Err(bad("expected `index family source`"));
        }
        if fields[0].parse::<usize>().ok() != Some(out.len()) {
            return Err(bad("rule indices must count up from 0"));
        }
        out.push(Family::from_tag(fields[1]).ok_or_else(|| bad("unknown family tag"))?);
    }
    Ok(out)
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Legacy => "legacy",
            Construction::Generalized => "generalized",
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::automaton::tests::{cyclists, epsilon_loop};
    use crate::grammar::tests::example_grammar;
    use crate::semiring::SemiringId;
    use crate::tokens;

    /// `S → A B, A → a, B → b` under any semiring, all weights 1̄.
    pub(crate) fn ab_grammar(semiring: SemiringId) -> Wcfg {
        let one = semiring.one();
        Wcfg::from_rules(semiring, "S", &[("S", &["A", "B"], one), ("A", &["a"], one), ("B", &["b"], one)]).unwrap()
    }

    /// q0 -a-> q1 -ε-> q2 -b-> q3, all weights 1̄.
    pub(crate) fn a_eps_b(semiring: SemiringId) -> Wfsa {
        let one = semiring.one();
        let mut a = Wfsa::new(semiring);
        let q: Vec<StateId> = (0..4).map(|i| a.add_state(&format!("q{i}")).unwrap()).collect();
        a.set_initial(q[0], one).unwrap();
        a.set_final(q[3], one).unwrap();
        a.add_arc(q[0], Some("a"), one, q[1]).unwrap();
        a.add_arc(q[1], None, one, q[2]).unwrap();
        a.add_arc(q[2], Some("b"), one, q[3]).unwrap();
        a
    }

    fn support(gc: &IntersectionGrammar, max_len: usize) -> Vec<String> {
        let g = gc.grammar();
        let mut found = Vec::new();
        let mut frontier = vec![Vec::<String>::new()];
        for _ in 0..=max_len {
            let mut next = Vec::new();
            for y in frontier {
                if !g.string_weight_truncated(&y, 30, 0.0).weight.is_zero() {
                    found.push(y.join(" "));
                }
                for s in g.terminals() {
                    let mut z = y.clone();
                    z.push(s.clone());
                    next.push(z);
                }
            }
            frontier = next;
        }
        found
    }

    #[test]
    fn legacy_loses_the_epsilon_path() {
        let g = ab_grammar(SemiringId::Boolean);
        let a = a_eps_b(SemiringId::Boolean);
        let legacy = IntersectionGrammar::intersect_legacy(&g, &a).unwrap().trim();
        assert!(legacy.grammar().rules().is_empty());
        let general = IntersectionGrammar::intersect_general(&g, &a).unwrap().trim();
        assert_eq!(support(&general, 3), vec!["a b".to_string()]);
    }

    #[test]
    fn family_counts_match_closed_forms() {
        let g = ab_grammar(SemiringId::Real);
        let a = epsilon_loop();
        let gc = IntersectionGrammar::intersect_general(&g, &a).unwrap();
        let counts = gc.rule_family_counts().unwrap();
        assert_eq!(counts, gc.closed_form_counts());
        assert_eq!(counts[&Family::PrefixEpsilon], 54);
        assert!(counts[&Family::Lifted] <= gc.lifted_bound());
        assert!(matches!(gc.trim().rule_family_counts(), Err(Error::Trimmed)));

        let g = example_grammar();
        let a = cyclists();
        for c in [Construction::Generalized, Construction::Legacy] {
            let gc = IntersectionGrammar::build(&g, &a, c).unwrap();
            assert_eq!(gc.rule_family_counts().unwrap(), gc.closed_form_counts());
        }
    }

    #[test]
    fn weights_follow_family_schema() {
        let g = example_grammar();
        let a = cyclists();
        let gc = IntersectionGrammar::intersect_general(&g, &a).unwrap();
        let one = g.semiring().one();
        for (i, rule) in gc.grammar().rules().iter().enumerate() {
            let id = RuleId(i);
            let expected = match gc.source(id) {
                SourceRef::Rule(r) => g.rules()[r.0].weight,
                SourceRef::Arc(arc) => a.arcs()[arc.0].weight,
                SourceRef::Endpoints(qi, qf) => a.initial_weight(qi) * a.final_weight(qf),
                SourceRef::None => one,
            };
            assert_eq!(rule.weight, expected, "{}", gc.grammar().rule_to_string(id));
        }
    }

    #[test]
    fn renders_triplets_and_fresh_start() {
        let g = example_grammar();
        let a = cyclists();
        let gc = IntersectionGrammar::intersect_general(&g, &a).unwrap();
        let text = gc.grammar().to_text();
        assert!(text.starts_with("semiring real\nstart S'\n"));
        assert!(text.contains("rule [q0,<sbar>,q3] -> [q0,<sbar>,q3] [q3,<eps>,q3] : 1\n"));
        assert!(text.contains("rule [q1,<eps>,q2] -> <eps> : 0.3\n"));
        let again = Wcfg::parse(&text, None).unwrap();
        assert_eq!(&again, gc.grammar());
        let prov = parse_provenance(&gc.provenance_text()).unwrap();
        assert_eq!(prov.len(), gc.grammar().rules().len());
        assert!(prov.iter().all(|&(_, c)| c == Construction::Generalized));
    }

    #[test]
    fn fresh_start_avoids_collisions() {
        let one = SemiringId::Real.one();
        let g = Wcfg::from_rules(SemiringId::Real, "S", &[("S", &["S'"], one), ("S'", &["a"], one)]).unwrap();
        let gc = IntersectionGrammar::intersect_general(&g, &cyclists()).unwrap();
        assert_eq!(gc.grammar().nonterminal_name(gc.grammar().start()), "S''");
    }

    #[test]
    fn mismatches_are_rejected() {
        let g = ab_grammar(SemiringId::Real);
        assert!(matches!(
            IntersectionGrammar::intersect_general(&g, &a_eps_b(SemiringId::Boolean)),
            Err(Error::Semiring(SemiringError::Mismatch(..)))
        ));
        let mut a = Wfsa::new(SemiringId::Real);
        let q = a.add_state("q").unwrap();
        a.add_arc(q, Some("A"), Weight::Real(1.0), q).unwrap();
        assert!(matches!(
            IntersectionGrammar::intersect_legacy(&g, &a),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn trimming_preserves_string_weights() {
        let g = example_grammar();
        let a = cyclists();
        let gc = IntersectionGrammar::intersect_general(&g, &a).unwrap();
        let trimmed = gc.trim();
        assert!(trimmed.grammar().rules().len() < gc.grammar().rules().len());
        for y in ["The many cyclists", "The cyclists", "The many many cyclists", "cyclists", ""] {
            let y = tokens(y);
            let full = gc.grammar().string_weight_truncated(&y, 30, 1e-9);
            let small = trimmed.grammar().string_weight_truncated(&y, 30, 1e-9);
            assert_eq!(full.strata.len(), small.strata.len());
            for (u, v) in full.strata.iter().zip(&small.strata) {
                assert!(u.approx_eq(v), "{y:?}");
            }
        }
        let again = trimmed.trim();
        assert_eq!(again.grammar(), trimmed.grammar());
    }

    #[test]
    fn empty_automaton_emits_nothing() {
        let g = example_grammar();
        let a = Wfsa::new(SemiringId::Real);
        let gc = IntersectionGrammar::intersect_general(&g, &a).unwrap();
        assert!(gc.grammar().rules().is_empty());
        assert!(gc.rule_family_counts().unwrap().values().all(|&n| n == 0));
        assert!(gc.closed_form_counts().values().all(|&n| n == 0));
    }
}
