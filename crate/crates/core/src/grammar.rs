//! Weighted context-free grammars and their derivations.
//!
//! A derivation is stored as an ordered tree whose internal nodes carry the
//! rule applied there. The leftmost rewriting sequence of the same
//! derivation is its pre-order rule list ([`Wcfg::to_leftmost`]) and the two
//! views convert losslessly.

mod enumerate;
mod text;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;

pub use enumerate::TruncatedWeight;

use crate::error::{Error, Result};
use crate::semiring::{SemiringError, SemiringId, Weight};
use crate::check_symbol_name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NonterminalId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TerminalId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub usize);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Nonterminal(NonterminalId),
    Terminal(TerminalId),
}

/// `lhs → rhs / weight`; an empty `rhs` is an ε-rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub lhs: NonterminalId,
    pub rhs: Vec<Symbol>,
    pub weight: Weight,
}

/// A (sub)derivation.
///
/// `Terminal` and `Epsilon` on their own are the zero-step subderivations
/// of a terminal or of the empty string; both weigh 1̄.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Derivation {
    Epsilon,
    Terminal(TerminalId),
    Node(Rc<Node>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub rule: RuleId,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn node(rule: RuleId, children: Vec<Derivation>) -> Self {
        Derivation::Node(Rc::new(Node { rule, children }))
    }

    pub fn rule(&self) -> Option<RuleId> {
        match self {
            Derivation::Node(n) => Some(n.rule),
            _ => None,
        }
    }

    pub fn children(&self) -> &[Derivation] {
        match self {
            Derivation::Node(n) => &n.children,
            _ => &[],
        }
    }

    /// Number of rule applications.
    pub fn size(&self) -> usize {
        match self {
            Derivation::Node(n) => 1 + n.children.iter().map(Derivation::size).sum::<usize>(),
            _ => 0,
        }
    }

    /// Calls `f` on every internal node in pre-order.
    pub fn for_each_node<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        if let Derivation::Node(n) = self {
            f(n);
            for child in &n.children {
                child.for_each_node(f);
            }
        }
    }
}

/// Result of trimming: index maps from the trimmed grammar back to the original.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrimMap {
    pub rules: Vec<RuleId>,
    pub nonterminals: Vec<NonterminalId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wcfg {
    semiring: SemiringId,
    nonterminals: Vec<String>,
    terminals: Vec<String>,
    nonterminal_ids: HashMap<String, NonterminalId>,
    terminal_ids: HashMap<String, TerminalId>,
    start: NonterminalId,
    rules: Vec<Rule>,
    by_lhs: Vec<Vec<RuleId>>,
}

impl Wcfg {
    pub fn new(semiring: SemiringId, start: &str) -> Result<Self> {
        let mut g = Wcfg {
            semiring,
            nonterminals: Vec::new(),
            terminals: Vec::new(),
            nonterminal_ids: HashMap::new(),
            terminal_ids: HashMap::new(),
            start: NonterminalId(0),
            rules: Vec::new(),
            by_lhs: Vec::new(),
        };
        g.start = g.add_nonterminal(start)?;
        Ok(g)
    }

    /// Builds a grammar from `(lhs, rhs, weight)` triples. Every name that
    /// occurs as some left-hand side is a nonterminal; every other
    /// right-hand-side name is a terminal. An empty `rhs` is an ε-rule.
    pub fn from_rules(semiring: SemiringId, start: &str, rules: &[(&str, &[&str], Weight)]) -> Result<Self> {
        let mut g = Wcfg::new(semiring, start)?;
        for (lhs, _, _) in rules {
            g.add_nonterminal(lhs)?;
        }
        for (lhs, rhs, weight) in rules {
            let lhs = g.nonterminal_ids[*lhs];
            let rhs = rhs.iter().map(|name| g.symbol_or_terminal(name)).collect::<Result<Vec<_>>>()?;
            g.add_rule(lhs, rhs, *weight)?;
        }
        Ok(g)
    }

    pub(crate) fn symbol_or_terminal(&mut self, name: &str) -> Result<Symbol> {
        match self.nonterminal_ids.get(name) {
            Some(&id) => Ok(Symbol::Nonterminal(id)),
            None => Ok(Symbol::Terminal(self.add_terminal(name)?)),
        }
    }

    /// Names here are opaque: only whitespace, parentheses and reserved
    /// tokens are refused, so rendered triplets are accepted.
    pub fn add_nonterminal(&mut self, name: &str) -> Result<NonterminalId> {
        if let Some(&id) = self.nonterminal_ids.get(name) {
            return Ok(id);
        }
        check_symbol_name(name)?;
        if self.terminal_ids.contains_key(name) {
            return Err(Error::SymbolClash(name.to_string()));
        }
        let id = NonterminalId(self.nonterminals.len());
        self.nonterminals.push(name.to_string());
        self.nonterminal_ids.insert(name.to_string(), id);
        self.by_lhs.push(Vec::new());
        Ok(id)
    }

    pub fn add_terminal(&mut self, name: &str) -> Result<TerminalId> {
        if let Some(&id) = self.terminal_ids.get(name) {
            return Ok(id);
        }
        check_symbol_name(name)?;
        if self.nonterminal_ids.contains_key(name) {
            return Err(Error::SymbolClash(name.to_string()));
        }
        let id = TerminalId(self.terminals.len());
        self.terminals.push(name.to_string());
        self.terminal_ids.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_rule(&mut self, lhs: NonterminalId, rhs: Vec<Symbol>, weight: Weight) -> Result<RuleId> {
        if weight.semiring() != self.semiring {
            return Err(SemiringError::Mismatch(self.semiring, weight.semiring()).into());
        }
        if lhs.0 >= self.nonterminals.len() {
            return Err(Error::UnknownNonterminal(format!("#{}", lhs.0)));
        }
        for sym in &rhs {
            match *sym {
                Symbol::Nonterminal(n) if n.0 >= self.nonterminals.len() => {
                    return Err(Error::UnknownNonterminal(format!("#{}", n.0)))
                }
                Symbol::Terminal(t) if t.0 >= self.terminals.len() => {
                    return Err(Error::UnknownSymbol(format!("#{}", t.0)))
                }
                _ => {}
            }
        }
        if weight.is_zero() {
            return Err(Error::ZeroWeight(format!("rule for {}", self.nonterminals[lhs.0])));
        }
        let id = RuleId(self.rules.len());
        self.rules.push(Rule { lhs, rhs, weight });
        self.by_lhs[lhs.0].push(id);
        Ok(id)
    }

    pub fn semiring(&self) -> SemiringId {
        self.semiring
    }

    pub fn start(&self) -> NonterminalId {
        self.start
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> Result<&Rule> {
        self.rules
            .get(id.0)
            .ok_or_else(|| Error::MalformedDerivation(format!("unknown rule {id}")))
    }

    pub fn rules_for(&self, lhs: NonterminalId) -> &[RuleId] {
        &self.by_lhs[lhs.0]
    }

    pub fn num_nonterminals(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn nonterminal_name(&self, id: NonterminalId) -> &str {
        &self.nonterminals[id.0]
    }

    pub fn nonterminal_id(&self, name: &str) -> Option<NonterminalId> {
        self.nonterminal_ids.get(name).copied()
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn terminal_name(&self, id: TerminalId) -> &str {
        &self.terminals[id.0]
    }

    pub fn terminal_id(&self, name: &str) -> Option<TerminalId> {
        self.terminal_ids.get(name).copied()
    }

    pub fn symbol_name(&self, sym: Symbol) -> &str {
        match sym {
            Symbol::Nonterminal(n) => self.nonterminal_name(n),
            Symbol::Terminal(t) => self.terminal_name(t),
        }
    }

    /// Length of the longest right-hand side.
    pub fn longest_rhs(&self) -> usize {
        self.rules.iter().map(|r| r.rhs.len()).max().unwrap_or(0)
    }

    /// Maps a string of terminal names to ids; `None` if any is unknown.
    pub fn terminal_ids_of(&self, y: &[String]) -> Option<Vec<TerminalId>> {
        y.iter().map(|s| self.terminal_id(s)).collect()
    }

    pub fn rule_to_string(&self, id: RuleId) -> String {
        let rule = &self.rules[id.0];
        let rhs = if rule.rhs.is_empty() {
            crate::EPSILON.to_string()
        } else {
            rule.rhs.iter().map(|&s| self.symbol_name(s)).collect::<Vec<_>>().join(" ")
        };
        format!("{} -> {} : {}", self.nonterminal_name(rule.lhs), rhs, rule.weight)
    }

    /// Checks that every node's children match its rule and, for a node
    /// rooted derivation, that the root rule rewrites `root` when given.
    pub fn validate(&self, d: &Derivation, root: Option<NonterminalId>) -> Result<()> {
        match (d, root) {
            (Derivation::Node(n), Some(x)) if self.rule(n.rule)?.lhs != x => Err(Error::MalformedDerivation(
                format!("expected a rule for {}, found {}", self.nonterminal_name(x), self.rule_to_string(n.rule)),
            )),
            (Derivation::Node(n), _) => {
                let rule = self.rule(n.rule)?;
                if rule.rhs.is_empty() {
                    return match n.children.as_slice() {
                        [Derivation::Epsilon] => Ok(()),
                        _ => Err(Error::MalformedDerivation(format!(
                            "ε-rule {} must have a single ε leaf",
                            self.rule_to_string(n.rule)
                        ))),
                    };
                }
                if n.children.len() != rule.rhs.len() {
                    return Err(Error::MalformedDerivation(format!(
                        "{} has {} children",
                        self.rule_to_string(n.rule),
                        n.children.len()
                    )));
                }
                for (sym, child) in rule.rhs.iter().zip(&n.children) {
                    match (*sym, child) {
                        (Symbol::Terminal(t), Derivation::Terminal(u)) if t == *u => {}
                        (Symbol::Nonterminal(x), Derivation::Node(_)) => self.validate(child, Some(x))?,
                        _ => {
                            return Err(Error::MalformedDerivation(format!(
                                "child does not match {} in {}",
                                self.symbol_name(*sym),
                                self.rule_to_string(n.rule)
                            )))
                        }
                    }
                }
                Ok(())
            }
            (Derivation::Terminal(t), None) if t.0 < self.terminals.len() => Ok(()),
            (Derivation::Epsilon, None) => Ok(()),
            _ => Err(Error::MalformedDerivation("leaf where a rule node was expected".into())),
        }
    }

    /// True for a well-formed derivation whose root rule rewrites the start symbol.
    pub fn is_full_derivation(&self, d: &Derivation) -> bool {
        matches!(d, Derivation::Node(_)) && self.validate(d, Some(self.start)).is_ok()
    }

    /// Terminal ids of the leaves, left to right.
    pub fn derivation_yield_ids(&self, d: &Derivation) -> Result<Vec<TerminalId>> {
        self.validate(d, None)?;
        let mut out = Vec::new();
        collect_leaves(d, &mut out);
        Ok(out)
    }

    pub fn derivation_yield(&self, d: &Derivation) -> Result<Vec<String>> {
        Ok(self
            .derivation_yield_ids(d)?
            .into_iter()
            .map(|t| self.terminals[t.0].clone())
            .collect())
    }

    /// ⊗ of the rule weights at every internal node; 1̄ for a bare leaf.
    pub fn derivation_weight(&self, d: &Derivation) -> Result<Weight> {
        self.validate(d, None)?;
        let mut w = self.semiring.one();
        d.for_each_node(&mut |n| w = w * self.rules[n.rule.0].weight);
        Ok(w)
    }

    /// Rules in the order a leftmost rewriting applies them.
    pub fn to_leftmost(&self, d: &Derivation) -> Result<Vec<RuleId>> {
        if !matches!(d, Derivation::Node(_)) {
            return Err(Error::MalformedDerivation("a bare leaf has no rewriting sequence".into()));
        }
        self.validate(d, None)?;
        let mut seq = Vec::new();
        d.for_each_node(&mut |n| seq.push(n.rule));
        Ok(seq)
    }

    /// Rebuilds the tree of a leftmost rewriting sequence.
    pub fn from_leftmost(&self, seq: &[RuleId]) -> Result<Derivation> {
        let first = seq
            .first()
            .ok_or_else(|| Error::MalformedDerivation("empty rewriting sequence".into()))?;
        let mut rest: VecDeque<RuleId> = seq.iter().copied().collect();
        let d = self.rebuild(self.rule(*first)?.lhs, &mut rest)?;
        if !rest.is_empty() {
            return Err(Error::MalformedDerivation(format!("{} unused rules", rest.len())));
        }
        Ok(d)
    }

    fn rebuild(&self, expected: NonterminalId, rest: &mut VecDeque<RuleId>) -> Result<Derivation> {
        let id = rest
            .pop_front()
            .ok_or_else(|| Error::MalformedDerivation("sequence ends with open nonterminals".into()))?;
        let rule = self.rule(id)?;
        if rule.lhs != expected {
            return Err(Error::MalformedDerivation(format!(
                "leftmost nonterminal is {} but {} was applied",
                self.nonterminal_name(expected),
                self.rule_to_string(id)
            )));
        }
        if rule.rhs.is_empty() {
            return Ok(Derivation::node(id, vec![Derivation::Epsilon]));
        }
        let children = rule
            .rhs
            .iter()
            .map(|&sym| match sym {
                Symbol::Terminal(t) => Ok(Derivation::Terminal(t)),
                Symbol::Nonterminal(x) => self.rebuild(x, rest),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Derivation::node(id, children))
    }

    /// Removes nonterminals that derive no terminal string or cannot be
    /// reached from the start, with every rule mentioning them. The start
    /// symbol and the terminal alphabet are always kept.
    pub fn trim(&self) -> (Wcfg, TrimMap) {
        let productive = self.productive();
        let useful_rule = |r: &Rule| {
            productive[r.lhs.0]
                && r.rhs.iter().all(|s| match s {
                    Symbol::Nonterminal(x) => productive[x.0],
                    Symbol::Terminal(_) => true,
                })
        };
        let mut reachable = vec![false; self.nonterminals.len()];
        let mut queue = VecDeque::new();
        if productive[self.start.0] {
            reachable[self.start.0] = true;
            queue.push_back(self.start);
        }
        while let Some(x) = queue.pop_front() {
            for &rid in &self.by_lhs[x.0] {
                let rule = &self.rules[rid.0];
                if !useful_rule(rule) {
                    continue;
                }
                for sym in &rule.rhs {
                    if let Symbol::Nonterminal(y) = *sym {
                        if !reachable[y.0] {
                            reachable[y.0] = true;
                            queue.push_back(y);
                        }
                    }
                }
            }
        }

        let mut nonterminal_map = Vec::new();
        let mut new_id = vec![None; self.nonterminals.len()];
        for i in 0..self.nonterminals.len() {
            if i == self.start.0 || reachable[i] {
                new_id[i] = Some(NonterminalId(nonterminal_map.len()));
                nonterminal_map.push(NonterminalId(i));
            }
        }
        let mut out = Wcfg {
            semiring: self.semiring,
            nonterminals: nonterminal_map.iter().map(|x| self.nonterminals[x.0].clone()).collect(),
            terminals: self.terminals.clone(),
            nonterminal_ids: HashMap::new(),
            terminal_ids: self.terminal_ids.clone(),
            start: new_id[self.start.0].expect("start is kept"),
            rules: Vec::new(),
            by_lhs: vec![Vec::new(); nonterminal_map.len()],
        };
        out.nonterminal_ids = out
            .nonterminals
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), NonterminalId(i)))
            .collect();
        let mut rule_map = Vec::new();
        for (i, rule) in self.rules.iter().enumerate() {
            if !reachable[rule.lhs.0] || !useful_rule(rule) {
                continue;
            }
            let remap = |s: &Symbol| match *s {
                Symbol::Nonterminal(x) => Symbol::Nonterminal(new_id[x.0].expect("useful symbol is kept")),
                t => t,
            };
            let lhs = new_id[rule.lhs.0].expect("reachable lhs is kept");
            let rid = RuleId(out.rules.len());
            out.rules.push(Rule {
                lhs,
                rhs: rule.rhs.iter().map(remap).collect(),
                weight: rule.weight,
            });
            out.by_lhs[lhs.0].push(rid);
            rule_map.push(RuleId(i));
        }
        (
            out,
            TrimMap {
                rules: rule_map,
                nonterminals: nonterminal_map,
            },
        )
    }

    /// Nonterminals deriving at least one terminal string (least fixed point).
    pub fn productive(&self) -> Vec<bool> {
        let mut productive = vec![false; self.nonterminals.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for rule in &self.rules {
                if productive[rule.lhs.0] {
                    continue;
                }
                let ok = rule.rhs.iter().all(|s| match s {
                    Symbol::Nonterminal(x) => productive[x.0],
                    Symbol::Terminal(_) => true,
                });
                if ok {
                    productive[rule.lhs.0] = true;
                    changed = true;
                }
            }
        }
        productive
    }
}

fn collect_leaves(d: &Derivation, out: &mut Vec<TerminalId>) {
    match d {
        Derivation::Terminal(t) => out.push(*t),
        Derivation::Epsilon => {}
        Derivation::Node(n) => n.children.iter().for_each(|c| collect_leaves(c, out)),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::tokens;

    pub(crate) fn real(x: f64) -> Weight {
        Weight::Real(x)
    }

    /// The running-example grammar.
    pub(crate) fn example_grammar() -> Wcfg {
        Wcfg::from_rules(
            SemiringId::Real,
            "S",
            &[
                ("S", &["Det", "NP"], real(1.0)),
                ("NP", &["Adj", "N"], real(1.0)),
                ("NP", &["Adj", "NP"], real(0.5)),
                ("N", &["cyclists"], real(2.0)),
                ("Adj", &["many"], real(2.0)),
                ("Adj", &[], real(1.0)),
                ("Det", &["The"], real(2.0)),
            ],
        )
        .unwrap()
    }

    /// Pre-order rule list of the example's reference derivation.
    pub(crate) const EXAMPLE_LEFTMOST: [usize; 7] = [0, 6, 2, 4, 1, 5, 3];

    #[test]
    fn example_tree_yield_weight_and_sequence() {
        let g = example_grammar();
        let d = g.from_leftmost(&EXAMPLE_LEFTMOST.map(RuleId)).unwrap();
        assert_eq!(g.derivation_yield(&d).unwrap(), tokens("The many cyclists"));
        let expected = real(1.0 * 2.0 * 0.5 * 2.0 * 1.0 * 1.0 * 2.0);
        assert!(g.derivation_weight(&d).unwrap().approx_eq(&expected));
        assert!(g.derivation_weight(&d).unwrap().approx_eq(&real(4.0)));
        assert_eq!(g.to_leftmost(&d).unwrap(), EXAMPLE_LEFTMOST.map(RuleId).to_vec());
        assert_eq!(d.size(), 7);
        assert!(g.is_full_derivation(&d));
    }

    #[test]
    fn bare_leaves() {
        let g = example_grammar();
        let many = Derivation::Terminal(g.terminal_id("many").unwrap());
        assert_eq!(g.derivation_weight(&many).unwrap(), real(1.0));
        assert_eq!(g.derivation_yield(&many).unwrap(), tokens("many"));
        assert!(g.derivation_yield(&Derivation::Epsilon).unwrap().is_empty());
        assert!(g.to_leftmost(&many).is_err());
        assert!(!g.is_full_derivation(&many));
    }

    #[test]
    fn epsilon_rule_tree() {
        let g = example_grammar();
        let d = Derivation::node(RuleId(5), vec![Derivation::Epsilon]);
        assert_eq!(g.to_leftmost(&d).unwrap(), vec![RuleId(5)]);
        assert!(g.derivation_yield(&d).unwrap().is_empty());
        assert!(g.validate(&Derivation::node(RuleId(5), vec![]), None).is_err());
    }

    #[test]
    fn malformed_trees_rejected() {
        let g = example_grammar();
        let cyclists = Derivation::Terminal(g.terminal_id("cyclists").unwrap());
        let bad = Derivation::node(RuleId(6), vec![cyclists]);
        assert!(matches!(g.derivation_yield(&bad), Err(Error::MalformedDerivation(_))));
        assert!(g.from_leftmost(&[RuleId(0), RuleId(3)]).is_err());
        assert!(g.from_leftmost(&[RuleId(6), RuleId(6)]).is_err());
        assert!(g.from_leftmost(&[RuleId(0), RuleId(6)]).is_err());
    }

    #[test]
    fn builder_rejects_bad_input() {
        let mut g = Wcfg::new(SemiringId::Real, "S").unwrap();
        let a = g.add_terminal("a").unwrap();
        assert!(matches!(g.add_nonterminal("a"), Err(Error::SymbolClash(_))));
        assert!(matches!(g.add_terminal("S"), Err(Error::SymbolClash(_))));
        assert!(matches!(
            g.add_rule(g.start(), vec![Symbol::Terminal(a)], real(0.0)),
            Err(Error::ZeroWeight(_))
        ));
        assert!(g.add_rule(g.start(), vec![Symbol::Terminal(a)], Weight::Boolean(true)).is_err());
        assert!(matches!(g.add_terminal("<eps>"), Err(Error::ReservedSymbol(_))));
    }

    #[test]
    fn trim_removes_useless_symbols() {
        let g = Wcfg::from_rules(
            SemiringId::Boolean,
            "S",
            &[
                ("S", &["A", "b"], Weight::Boolean(true)),
                ("S", &["C"], Weight::Boolean(true)),
                ("A", &["a"], Weight::Boolean(true)),
                ("C", &["C", "c"], Weight::Boolean(true)),
                ("D", &["d"], Weight::Boolean(true)),
            ],
        )
        .unwrap();
        let (t, map) = g.trim();
        assert_eq!(map.rules, vec![RuleId(0), RuleId(2)]);
        assert_eq!(t.num_nonterminals(), 2);
        assert_eq!(t.terminals(), g.terminals());
        let (again, _) = t.trim();
        assert_eq!(again, t);
    }

    #[test]
    fn trim_of_unproductive_start_is_empty() {
        let g = Wcfg::from_rules(SemiringId::Real, "S", &[("S", &["S", "a"], real(1.0))]).unwrap();
        let (t, _) = g.trim();
        assert!(t.rules().is_empty());
        assert_eq!(t.nonterminal_name(t.start()), "S");
    }
}
