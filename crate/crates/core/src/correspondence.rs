//! The correspondence between derivations of a generalized intersection
//! grammar and (derivation, path) pairs of its inputs.
//!
//! [`IntersectionGrammar::to_pair`] projects a derivation onto the input
//! grammar and automaton. It recurses on the provenance of each node: arc
//! and ε-rule nodes are the base cases of the triplet recursion, prefix-ε
//! and lifted nodes its inductive cases, the tail rules form a second
//! recursion under the `<sbar>` triplets, and the start rule wraps both.
//! [`IntersectionGrammar::from_pair`] goes the other way. The checkers
//! compare both directions against brute-force enumeration on bounded
//! instances.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::automaton::{ArcId, Label, Path, PathWeighting, StateId, Wfsa};
use crate::error::{Error, Result};
use crate::grammar::{Derivation, NonterminalId, RuleId, Symbol, TerminalId, TruncatedWeight, Wcfg};
use crate::intersection::{Construction, Family, IntersectionGrammar, Mid, SourceRef, Triplet};
use crate::semiring::Weight;

/// A derivation of the input grammar paired with a full path of the input
/// automaton that has the same yield.
#[derive(Clone, Debug)]
pub struct JoinPair {
    pub tree: Derivation,
    pub path: Path,
    /// `w(tree) ⊗ w(path)`, with the path weighted as a full path.
    pub weight: Weight,
}

impl JoinPair {
    /// Builds a pair and checks that it belongs to the join of `g` and `a`.
    pub fn new(g: &Wcfg, a: &Wfsa, tree: Derivation, path: Path) -> Result<Self> {
        g.validate(&tree, Some(g.start()))?;
        if !matches!(tree, Derivation::Node(_)) {
            return Err(Error::MalformedDerivation("a join tree must be rooted at the start symbol".into()));
        }
        let tree_yield = g.derivation_yield(&tree)?;
        let path_yield = a.path_yield(&path)?;
        if tree_yield != path_yield {
            return Err(Error::YieldMismatch {
                tree: tree_yield.join(" "),
                path: path_yield.join(" "),
            });
        }
        let weight = g.derivation_weight(&tree)? * a.path_weight(&path, PathWeighting::Full)?;
        Ok(JoinPair { tree, path, weight })
    }

    /// Same tree and path, and approximately equal weight.
    pub fn same_as(&self, other: &JoinPair) -> bool {
        self.tree == other.tree && self.path == other.path && self.weight.approx_eq(&other.weight)
    }

    pub fn describe(&self, g: &Wcfg, a: &Wfsa) -> String {
        let arcs: Vec<String> = self.path.arcs().iter().map(|id| id.0.to_string()).collect();
        format!(
            "tree {} path {}:[{}] weight {}",
            g.to_bracketed(&self.tree),
            a.state_name(self.path.first_state()),
            arcs.join(","),
            self.weight
        )
    }
}

/// Projection of a triplet subderivation: the input-grammar subderivation
/// and the automaton subpath it encodes.
struct Projection {
    tree: Derivation,
    path: Path,
}

impl IntersectionGrammar {
    fn node_parts<'d>(&self, d: &'d Derivation) -> Result<(RuleId, &'d [Derivation])> {
        match d {
            Derivation::Node(n) => {
                self.grammar().rule(n.rule)?;
                Ok((n.rule, &n.children))
            }
            _ => Err(Error::Provenance("expected a rule application, found a leaf".into())),
        }
    }

    fn lhs_triplet(&self, rule: RuleId) -> Result<Triplet> {
        let lhs = self.grammar().rules()[rule.0].lhs;
        self.triplet(lhs)
            .ok_or_else(|| Error::Provenance(format!("rule {rule} rewrites the start symbol")))
    }

    fn join_paths(&self, left: &Path, right: &Path) -> Result<Path> {
        left.concat(right, self.source_automaton())
            .map_err(|e| Error::Provenance(format!("subpaths do not meet: {e}")))
    }

    /// Projection of a subderivation rooted at a triplet whose mid is a
    /// grammar symbol, a terminal or ε.
    fn psi(&self, d: &Derivation) -> Result<Projection> {
        let (rule, children) = self.node_parts(d)?;
        let here = self.lhs_triplet(rule)?;
        match (self.family(rule), self.source(rule)) {
            (Family::Arc, SourceRef::Arc(id)) => {
                let arc = self.source_automaton().arc(id)?;
                let tree = match &arc.label {
                    Label::Epsilon => Derivation::Epsilon,
                    Label::Symbol(s) => Derivation::Terminal(
                        self.source_grammar()
                            .terminal_id(s)
                            .ok_or_else(|| Error::Provenance(format!("`{s}` is not a grammar terminal")))?,
                    ),
                };
                Ok(Projection {
                    tree,
                    path: Path::new(self.source_automaton(), arc.source, vec![id])?,
                })
            }
            (Family::EpsilonRule, SourceRef::Rule(r)) => Ok(Projection {
                tree: Derivation::node(r, vec![Derivation::Epsilon]),
                path: Path::empty(here.left),
            }),
            (Family::PrefixEpsilon, _) => {
                let [eps, rest] = children else {
                    return Err(Error::Provenance("prefix-ε node needs two children".into()));
                };
                let eps = self.psi(eps)?;
                let rest = self.psi(rest)?;
                if eps.tree != Derivation::Epsilon {
                    return Err(Error::Provenance("prefix-ε node's left child is not an ε-arc".into()));
                }
                Ok(Projection {
                    tree: rest.tree,
                    path: self.join_paths(&eps.path, &rest.path)?,
                })
            }
            (Family::Lifted, SourceRef::Rule(r)) => {
                let mut trees = Vec::with_capacity(children.len());
                let mut path = Path::empty(here.left);
                for child in children {
                    let p = self.psi(child)?;
                    trees.push(p.tree);
                    path = self.join_paths(&path, &p.path)?;
                }
                Ok(Projection {
                    tree: Derivation::node(r, trees),
                    path,
                })
            }
            (f, s) => Err(Error::Provenance(format!("unexpected {f:?} node with source {s:?} under a triplet"))),
        }
    }

    /// Projection of a subderivation rooted at an `<sbar>` triplet.
    fn xi(&self, d: &Derivation) -> Result<Projection> {
        let (rule, children) = self.node_parts(d)?;
        match (self.family(rule), children) {
            (Family::TailExit, [inner]) => self.psi(inner),
            (Family::TailEpsilon, [head, eps]) => {
                let head = self.xi(head)?;
                let eps = self.psi(eps)?;
                Ok(Projection {
                    tree: head.tree,
                    path: self.join_paths(&head.path, &eps.path)?,
                })
            }
            (f, _) => Err(Error::Provenance(format!("unexpected {f:?} node under <sbar>"))),
        }
    }

    /// Maps a full derivation of a generalized intersection grammar to the
    /// (derivation, path) pair it encodes.
    pub fn to_pair(&self, d: &Derivation) -> Result<JoinPair> {
        if self.construction() != Construction::Generalized {
            return Err(Error::NotGeneralized);
        }
        self.grammar().validate(d, Some(self.grammar().start()))?;
        let (rule, children) = self.node_parts(d)?;
        let (Family::Start, [inner]) = (self.family(rule), children) else {
            return Err(Error::Provenance("the root must apply a start rule".into()));
        };
        let p = self.xi(inner)?;
        JoinPair::new(self.source_grammar(), self.source_automaton(), p.tree, p.path)
    }

    /// Reads the path off the arc-rule nodes in left-to-right order.
    pub fn reconstruct_path(&self, d: &Derivation) -> Result<Path> {
        let (rule, _) = self.node_parts(d)?;
        let SourceRef::Endpoints(start, _) = self.source(rule) else {
            return Err(Error::Provenance("the root must apply a start rule".into()));
        };
        let mut arcs = Vec::new();
        let mut bad = None;
        d.for_each_node(&mut |n| match (self.family(n.rule), self.source(n.rule)) {
            (Family::Arc, SourceRef::Arc(id)) => arcs.push(id),
            (Family::Arc, s) => bad = Some(s),
            _ => {}
        });
        if let Some(s) = bad {
            return Err(Error::Provenance(format!("arc rule with source {s:?}")));
        }
        Path::new(self.source_automaton(), start, arcs)
    }

    /// Builds the derivation that encodes a join pair.
    pub fn from_pair(&self, pair: &JoinPair) -> Result<Derivation> {
        if self.construction() != Construction::Generalized {
            return Err(Error::NotGeneralized);
        }
        let g = self.source_grammar();
        let a = self.source_automaton();
        let checked = JoinPair::new(g, a, pair.tree.clone(), pair.path.clone())?;
        let mut b = PairBuilder {
            gc: self,
            arcs: checked.path.arcs(),
            pos: 0,
            state: checked.path.first_state(),
        };
        let qi = b.state;
        let (mut d, s_trip) = b.subtree(&checked.tree)?;
        let sbar = |b: &PairBuilder, q: StateId| b.triplet(qi, Mid::StartBar, q);
        let mut top = sbar(&b, b.state)?;
        let exit = b.rule(SourceRef::None, top, vec![Symbol::Nonterminal(s_trip)])?;
        d = Derivation::node(exit, vec![d]);
        while b.pos < b.arcs.len() {
            let (eps, eps_trip) = b.epsilon_arc()?;
            let next = sbar(&b, b.state)?;
            let rule = b.rule(
                SourceRef::None,
                next,
                vec![Symbol::Nonterminal(top), Symbol::Nonterminal(eps_trip)],
            )?;
            d = Derivation::node(rule, vec![d, eps]);
            top = next;
        }
        let start = self.grammar().start();
        let rule = self
            .find_rule(SourceRef::Endpoints(qi, b.state), start, vec![Symbol::Nonterminal(top)])
            .ok_or_else(|| Error::Provenance("no start rule for the path's endpoints".into()))?;
        Ok(Derivation::node(rule, vec![d]))
    }
}

/// Walks a path left to right while rebuilding an intersection derivation.
struct PairBuilder<'g> {
    gc: &'g IntersectionGrammar,
    arcs: &'g [ArcId],
    pos: usize,
    state: StateId,
}

impl PairBuilder<'_> {
    fn triplet(&self, left: StateId, mid: Mid, right: StateId) -> Result<NonterminalId> {
        let t = Triplet { left, mid, right };
        self.gc
            .triplet_id(&t)
            .ok_or_else(|| Error::Provenance(format!("triplet {} is not in the grammar", self.gc.render_triplet(&t))))
    }

    fn rule(&self, source: SourceRef, lhs: NonterminalId, rhs: Vec<Symbol>) -> Result<RuleId> {
        self.gc.find_rule(source, lhs, rhs).ok_or_else(|| {
            Error::Provenance(format!(
                "no {source:?} rule for {}",
                self.gc.grammar().nonterminal_name(lhs)
            ))
        })
    }

    /// Consumes one ε-arc and returns its arc-rule node.
    fn epsilon_arc(&mut self) -> Result<(Derivation, NonterminalId)> {
        let id = self.arcs[self.pos];
        let arc = self.gc.source_automaton().arc(id)?;
        if !arc.label.is_epsilon() {
            return Err(Error::Provenance(format!("{id} is not an ε-arc")));
        }
        let trip = self.triplet(arc.source, Mid::Epsilon, arc.target)?;
        let rule = self.rule(SourceRef::Arc(id), trip, Vec::new())?;
        self.pos += 1;
        self.state = arc.target;
        Ok((Derivation::node(rule, vec![Derivation::Epsilon]), trip))
    }

    /// A terminal together with the ε-arcs right before its arc, as a
    /// right-branching chain of prefix-ε nodes.
    fn terminal(&mut self, t: TerminalId) -> Result<(Derivation, NonterminalId)> {
        let mut prefix = Vec::new();
        while self.pos < self.arcs.len() && self.gc.source_automaton().arcs()[self.arcs[self.pos].0].label.is_epsilon() {
            prefix.push(self.epsilon_arc()?);
        }
        let id = *self
            .arcs
            .get(self.pos)
            .ok_or_else(|| Error::Provenance("path ends before the tree's yield".into()))?;
        let arc = self.gc.source_automaton().arc(id)?;
        let mid = Mid::Terminal(t);
        let mut trip = self.triplet(arc.source, mid, arc.target)?;
        let rule = self.rule(SourceRef::Arc(id), trip, vec![Symbol::Terminal(t)])?;
        let mut d = Derivation::node(rule, vec![Derivation::Terminal(t)]);
        self.pos += 1;
        self.state = arc.target;
        for (eps, eps_trip) in prefix.into_iter().rev() {
            let left = self.gc.triplet(eps_trip).expect("ε triplet").left;
            let lhs = self.triplet(left, mid, self.state)?;
            let rule = self.rule(
                SourceRef::None,
                lhs,
                vec![Symbol::Nonterminal(eps_trip), Symbol::Nonterminal(trip)],
            )?;
            d = Derivation::node(rule, vec![eps, d]);
            trip = lhs;
        }
        Ok((d, trip))
    }

    fn subtree(&mut self, tree: &Derivation) -> Result<(Derivation, NonterminalId)> {
        let g = self.gc.source_grammar();
        let Derivation::Node(n) = tree else {
            return Err(Error::MalformedDerivation("expected a rule application".into()));
        };
        let rule = g.rule(n.rule)?;
        let mid = Mid::Nonterminal(rule.lhs);
        let left = self.state;
        if rule.rhs.is_empty() {
            let trip = self.triplet(left, mid, left)?;
            let id = self.rule(SourceRef::Rule(n.rule), trip, Vec::new())?;
            return Ok((Derivation::node(id, vec![Derivation::Epsilon]), trip));
        }
        let mut children = Vec::with_capacity(n.children.len());
        let mut rhs = Vec::with_capacity(n.children.len());
        for child in &n.children {
            let (d, trip) = match child {
                Derivation::Terminal(t) => self.terminal(*t)?,
                Derivation::Node(_) => self.subtree(child)?,
                Derivation::Epsilon => return Err(Error::MalformedDerivation("stray ε leaf".into())),
            };
            children.push(d);
            rhs.push(Symbol::Nonterminal(trip));
        }
        let trip = self.triplet(left, mid, self.state)?;
        let id = self.rule(SourceRef::Rule(n.rule), trip, rhs)?;
        Ok((Derivation::node(id, children), trip))
    }
}

/// Every join pair whose tree has at most `max_tree_nodes` rule applications
/// and whose path has at most `max_path_arcs` arcs.
pub fn bounded_join(g: &Wcfg, a: &Wfsa, max_tree_nodes: usize, max_path_arcs: usize) -> Result<Vec<JoinPair>> {
    let mut by_yield: HashMap<Vec<String>, Vec<Path>> = HashMap::new();
    for p in a.enumerate_paths(max_path_arcs, None, true) {
        by_yield.entry(a.path_yield(&p)?).or_default().push(p);
    }
    let mut out = Vec::new();
    for tree in g.enumerate_derivations(g.start(), max_tree_nodes, None)? {
        let y = g.derivation_yield(&tree)?;
        let Some(paths) = by_yield.get(&y) else { continue };
        let wt = g.derivation_weight(&tree)?;
        for p in paths {
            let weight = wt * a.path_weight(p, PathWeighting::Full)?;
            out.push(JoinPair {
                tree: tree.clone(),
                path: p.clone(),
                weight,
            });
        }
    }
    Ok(out)
}

/// Inner bounds on the join side of the strong check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JoinBounds {
    pub max_tree_nodes: usize,
    pub max_path_arcs: usize,
}

impl JoinBounds {
    pub fn new(max_tree_nodes: usize, max_path_arcs: usize) -> Self {
        JoinBounds {
            max_tree_nodes,
            max_path_arcs,
        }
    }

    /// Size bound for enumerating intersection derivations. A pair with `T`
    /// tree nodes and `P` arcs, `E` of them ε, is encoded by a derivation
    /// of exactly `T + P + E + 2` nodes, so `T + 2P + 2` covers every pair
    /// within the inner bounds.
    pub fn outer(&self) -> usize {
        self.max_tree_nodes + 2 * self.max_path_arcs + 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub property: &'static str,
    pub detail: String,
}

/// Outcome of the strong-equivalence check. Every flag is true exactly when
/// no counterexample was recorded for it.
#[derive(Clone, Debug)]
pub struct BijectionReport {
    pub bounds: JoinBounds,
    /// Intersection derivations enumerated.
    pub checked: usize,
    /// Join pairs within the inner bounds.
    pub join_pairs: usize,
    pub valid_pairs: bool,
    pub injective: bool,
    pub surjective_within_bounds: bool,
    pub weight_preserving: bool,
    pub yield_preserving: bool,
    /// `from_pair(to_pair(d)) = d` for every enumerated derivation.
    pub derivation_round_trip: bool,
    /// `to_pair(from_pair(p)) = p` for every join pair.
    pub pair_round_trip: bool,
    /// No ε-triplet escapes the prefix and tail rules, and no subpath of a
    /// grammar-symbol or terminal triplet ends with an ε-arc.
    pub structural: bool,
    pub counterexamples: Vec<Counterexample>,
}

const MAX_COUNTEREXAMPLES: usize = 20;

impl BijectionReport {
    fn new(bounds: JoinBounds) -> Self {
        BijectionReport {
            bounds,
            checked: 0,
            join_pairs: 0,
            valid_pairs: true,
            injective: true,
            surjective_within_bounds: true,
            weight_preserving: true,
            yield_preserving: true,
            derivation_round_trip: true,
            pair_round_trip: true,
            structural: true,
            counterexamples: Vec::new(),
        }
    }

    fn flags(&self) -> [(&'static str, bool); 8] {
        [
            ("valid", self.valid_pairs),
            ("injective", self.injective),
            ("surjective", self.surjective_within_bounds),
            ("weight", self.weight_preserving),
            ("yield", self.yield_preserving),
            ("roundtrip_derivation", self.derivation_round_trip),
            ("roundtrip_pair", self.pair_round_trip),
            ("structural", self.structural),
        ]
    }

    pub fn passed(&self) -> bool {
        self.flags().iter().all(|&(_, ok)| ok)
    }

    fn fail(&mut self, property: &'static str, detail: String) {
        let flag = match property {
            "valid" => &mut self.valid_pairs,
            "injective" => &mut self.injective,
            "surjective" => &mut self.surjective_within_bounds,
            "weight" => &mut self.weight_preserving,
            "yield" => &mut self.yield_preserving,
            "roundtrip_derivation" => &mut self.derivation_round_trip,
            "roundtrip_pair" => &mut self.pair_round_trip,
            _ => &mut self.structural,
        };
        *flag = false;
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(Counterexample { property, detail });
        }
    }

    /// `SEED checked:N pairs:M valid:true ...` on one line.
    pub fn machine_line(&self, seed: u64) -> String {
        let mut line = format!("{seed} checked:{} pairs:{}", self.checked, self.join_pairs);
        for (name, ok) in self.flags() {
            line.push_str(&format!(" {name}:{ok}"));
        }
        line
    }
}

impl fmt::Display for BijectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "strong equivalence: {} (tree nodes <= {}, path arcs <= {}, derivation nodes <= {})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.bounds.max_tree_nodes,
            self.bounds.max_path_arcs,
            self.bounds.outer()
        )?;
        writeln!(f, "  derivations checked: {}", self.checked)?;
        writeln!(f, "  join pairs in bounds: {}", self.join_pairs)?;
        for (name, ok) in self.flags() {
            writeln!(f, "  {name:<22} {}", if ok { "ok" } else { "FAILED" })?;
        }
        for c in &self.counterexamples {
            writeln!(f, "  counterexample [{}]: {}", c.property, c.detail)?;
        }
        Ok(())
    }
}

/// Checks the derivation/join-pair bijection exhaustively within `bounds`.
///
/// Every derivation of the trimmed generalized intersection with at most
/// `bounds.outer()` nodes is mapped to a pair and back; every join pair
/// within the inner bounds is mapped to a derivation and must be among the
/// enumerated ones.
pub fn check_strong_equivalence(g: &Wcfg, a: &Wfsa, bounds: JoinBounds) -> Result<BijectionReport> {
    let gc = IntersectionGrammar::intersect_general(g, a)?.trim();
    let mut report = BijectionReport::new(bounds);
    let derivations = gc.grammar().enumerate_derivations(gc.grammar().start(), bounds.outer(), None)?;
    report.checked = derivations.len();

    let mut image: HashMap<(Derivation, Path), usize> = HashMap::new();
    for (i, d) in derivations.iter().enumerate() {
        let shown = || gc.grammar().to_bracketed(d);
        let pair = match gc.to_pair(d) {
            Ok(p) => p,
            Err(e) => {
                report.fail("valid", format!("{}: {e}", shown()));
                continue;
            }
        };
        match gc.grammar().derivation_weight(d) {
            Ok(w) if w.approx_eq(&pair.weight) => {}
            Ok(w) => report.fail("weight", format!("{}: {w} vs {}", shown(), pair.weight)),
            Err(e) => report.fail("weight", format!("{}: {e}", shown())),
        }
        let dy = gc.grammar().derivation_yield(d)?;
        if dy != g.derivation_yield(&pair.tree)? || dy != a.path_yield(&pair.path)? {
            report.fail("yield", shown());
        }
        match gc.reconstruct_path(d) {
            Ok(p) if p == pair.path => {}
            _ => report.fail("valid", format!("{}: leaf-order path differs", shown())),
        }
        if let Some(v) = structural_violation(&gc, d) {
            report.fail("structural", format!("{}: {v}", shown()));
        }
        match gc.from_pair(&pair) {
            Ok(back) if &back == d => {}
            Ok(back) => report.fail(
                "roundtrip_derivation",
                format!("{} came back as {}", shown(), gc.grammar().to_bracketed(&back)),
            ),
            Err(e) => report.fail("roundtrip_derivation", format!("{}: {e}", shown())),
        }
        if let Some(j) = image.insert((pair.tree.clone(), pair.path.clone()), i) {
            report.fail(
                "injective",
                format!(
                    "{} and {} both map to {}",
                    gc.grammar().to_bracketed(&derivations[j]),
                    shown(),
                    pair.describe(g, a)
                ),
            );
        }
    }

    let pairs = bounded_join(g, a, bounds.max_tree_nodes, bounds.max_path_arcs)?;
    report.join_pairs = pairs.len();
    for p in &pairs {
        if !image.contains_key(&(p.tree.clone(), p.path.clone())) {
            report.fail("surjective", p.describe(g, a));
        }
        match gc.from_pair(p).and_then(|d| gc.to_pair(&d)) {
            Ok(back) if back.same_as(p) => {}
            Ok(back) => report.fail(
                "roundtrip_pair",
                format!("{} came back as {}", p.describe(g, a), back.describe(g, a)),
            ),
            Err(e) => report.fail("roundtrip_pair", format!("{}: {e}", p.describe(g, a))),
        }
    }
    Ok(report)
}

/// The first violation of the structural restrictions on ε-triplets, if any.
///
/// An ε-triplet may only occur as the left child of a prefix-ε node or the
/// right child of a tail-ε node, and the subpath under a triplet whose mid
/// is a grammar symbol or terminal never ends with an ε-arc.
pub fn structural_violation(gc: &IntersectionGrammar, d: &Derivation) -> Option<String> {
    fn walk(gc: &IntersectionGrammar, d: &Derivation, arcs: &mut Vec<ArcId>) -> Option<String> {
        let Derivation::Node(n) = d else { return None };
        let family = gc.family(n.rule);
        let rule = &gc.grammar().rules()[n.rule.0];
        for (k, sym) in rule.rhs.iter().enumerate() {
            let Symbol::Nonterminal(x) = sym else { continue };
            if gc.triplet(*x).map(|t| t.mid) == Some(Mid::Epsilon) {
                let allowed = matches!((family, k), (Family::PrefixEpsilon, 0) | (Family::TailEpsilon, 1));
                if !allowed {
                    return Some(format!("ε-triplet at position {k} of a {family:?} rule"));
                }
            }
        }
        let begin = arcs.len();
        if let (Family::Arc, SourceRef::Arc(id)) = (family, gc.source(n.rule)) {
            arcs.push(id);
        }
        for child in &n.children {
            if let Some(v) = walk(gc, child, arcs) {
                return Some(v);
            }
        }
        let mid = gc.triplet(rule.lhs).map(|t| t.mid);
        if matches!(mid, Some(Mid::Nonterminal(_) | Mid::Terminal(_))) && arcs.len() > begin {
            let last = arcs[arcs.len() - 1];
            if gc.source_automaton().arcs()[last.0].label.is_epsilon() {
                return Some(format!(
                    "subpath under {} ends with an ε-arc",
                    gc.grammar().nonterminal_name(rule.lhs)
                ));
            }
        }
        None
    }
    walk(gc, d, &mut Vec::new())
}

/// One string of the weak-equivalence check.
#[derive(Clone, Debug)]
pub struct WeakEntry {
    pub string: Vec<String>,
    pub intersection: TruncatedWeight,
    pub grammar: TruncatedWeight,
    pub automaton: Weight,
    /// `grammar ⊗ automaton`.
    pub expected: Weight,
    pub matches: bool,
}

impl WeakEntry {
    pub fn converged(&self) -> bool {
        self.intersection.converged && self.grammar.converged
    }

    pub fn passed(&self) -> bool {
        self.converged() && self.matches
    }
}

#[derive(Clone, Debug)]
pub struct WeakReport {
    pub construction: Construction,
    pub entries: Vec<WeakEntry>,
}

impl WeakReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(WeakEntry::passed)
    }

    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(WeakEntry::converged)
    }
}

impl fmt::Display for WeakReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "weak equivalence ({}): {}",
            self.construction,
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        for e in &self.entries {
            let status = match (e.converged(), e.matches) {
                (false, _) => "NOT CONVERGED",
                (true, true) => "ok",
                (true, false) => "MISMATCH",
            };
            writeln!(
                f,
                "  \"{}\": intersection {} vs grammar {} * automaton {} = {}  {status}",
                e.string.join(" "),
                e.intersection.weight,
                e.grammar.weight,
                e.automaton,
                e.expected
            )?;
        }
        Ok(())
    }
}

/// Compares the intersection's string weights with the product of the input
/// weights on each string. Grammar-side sums are truncated at `max_nodes`
/// and must converge (see [`Wcfg::string_weight_truncated`]); automaton
/// weights are exact. A divergent ε-closure is an error.
pub fn check_weak_equivalence(
    g: &Wcfg,
    a: &Wfsa,
    strings: &[Vec<String>],
    construction: Construction,
    max_nodes: usize,
    tol: f64,
) -> Result<WeakReport> {
    let gc = IntersectionGrammar::build(g, a, construction)?.trim();
    let mut entries = Vec::new();
    for y in strings {
        let intersection = gc.grammar().string_weight_truncated(y, max_nodes, tol);
        let grammar = g.string_weight_truncated(y, max_nodes, tol);
        let automaton = a.string_weight(y)?;
        let expected = grammar.weight * automaton;
        let matches = intersection.weight.within(&expected, tol);
        entries.push(WeakEntry {
            string: y.clone(),
            intersection,
            grammar,
            automaton,
            expected,
            matches,
        });
    }
    Ok(WeakReport { construction, entries })
}

/// All strings over `alphabet` of length at most `max_len`, shortest first.
pub fn strings_up_to(alphabet: &[String], max_len: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for y in &layer {
            for s in alphabet {
                let mut z: Vec<String> = y.clone();
                z.push(s.clone());
                next.push(z);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Pairs in `pairs` grouped by yield, keeping the ⊕-sum of their weights.
pub fn join_weights(g: &Wcfg, pairs: &[JoinPair]) -> Result<HashMap<Vec<String>, Weight>> {
    let mut out: HashMap<Vec<String>, Weight> = HashMap::new();
    for p in pairs {
        let y = g.derivation_yield(&p.tree)?;
        let entry = out.entry(y).or_insert(g.semiring().zero());
        *entry = *entry + p.weight;
    }
    Ok(out)
}

/// Distinct derivations among `ds` (a sanity helper for duplicate-free
/// enumeration).
pub fn distinct(ds: &[Derivation]) -> usize {
    ds.iter().collect::<HashSet<_>>().len()
}
