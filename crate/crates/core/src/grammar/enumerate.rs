//! Size-bounded derivation enumeration and truncated string weights.
//!
//! Both work by size stratum: the set (or the weight) of derivations of
//! nonterminal X with exactly n rule applications, optionally spanning a
//! fixed substring of the target. A node spends one unit and hands the rest
//! to its children, so the recursion is well founded even for cyclic
//! grammars.

use std::collections::HashMap;
use std::rc::Rc;

use super::{Derivation, NonterminalId, RuleId, Symbol, TerminalId, Wcfg};
use crate::error::{Error, Result};
use crate::semiring::Weight;

/// A partial sum over derivations up to a size bound.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedWeight {
    pub weight: Weight,
    /// True when the last two size strata no longer move the sum.
    pub converged: bool,
    /// Entry n-1 sums the derivations with exactly n rule applications.
    pub strata: Vec<Weight>,
}

type Key = (usize, usize, usize, usize);

struct Enumerator<'g> {
    grammar: &'g Wcfg,
    target: Option<Vec<TerminalId>>,
    memo: HashMap<Key, Rc<Vec<Derivation>>>,
}

impl<'g> Enumerator<'g> {
    fn span_len(&self, i: usize, j: usize) -> usize {
        if self.target.is_some() {
            j - i
        } else {
            0
        }
    }

    /// Derivations of `x` with exactly `n` nodes whose yield is target[i..j]
    /// (any yield when unfiltered, with i = j = 0).
    fn exact(&mut self, x: NonterminalId, i: usize, j: usize, n: usize) -> Rc<Vec<Derivation>> {
        let key = (x.0, i, j, n);
        if let Some(hit) = self.memo.get(&key) {
            return Rc::clone(hit);
        }
        let mut out = Vec::new();
        if n > 0 {
            for &rid in self.grammar.rules_for(x) {
                let rhs = &self.grammar.rules[rid.0].rhs;
                if rhs.is_empty() {
                    if n == 1 && self.span_len(i, j) == 0 {
                        out.push(Derivation::node(rid, vec![Derivation::Epsilon]));
                    }
                    continue;
                }
                let mut prefix = Vec::with_capacity(rhs.len());
                self.children(rid, 0, i, j, n - 1, &mut prefix, &mut out);
            }
        }
        let out = Rc::new(out);
        self.memo.insert(key, Rc::clone(&out));
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn children(
        &mut self,
        rid: RuleId,
        k: usize,
        i: usize,
        j: usize,
        budget: usize,
        prefix: &mut Vec<Derivation>,
        out: &mut Vec<Derivation>,
    ) {
        let rhs = &self.grammar.rules[rid.0].rhs;
        if k == rhs.len() {
            if budget == 0 && self.span_len(i, j) == 0 {
                out.push(Derivation::node(rid, prefix.clone()));
            }
            return;
        }
        let rest = &rhs[k + 1..];
        let rest_nodes = rest.iter().filter(|s| matches!(s, Symbol::Nonterminal(_))).count();
        let rest_chars = if self.target.is_some() { rest.len() - rest_nodes } else { 0 };
        match rhs[k] {
            Symbol::Terminal(t) => match &self.target {
                None => {
                    prefix.push(Derivation::Terminal(t));
                    self.children(rid, k + 1, i, j, budget, prefix, out);
                    prefix.pop();
                }
                Some(y) => {
                    if i < j && y[i] == t {
                        prefix.push(Derivation::Terminal(t));
                        self.children(rid, k + 1, i + 1, j, budget, prefix, out);
                        prefix.pop();
                    }
                }
            },
            Symbol::Nonterminal(x) => {
                if budget < 1 + rest_nodes {
                    return;
                }
                let ends: Vec<usize> = if self.target.is_some() {
                    if j < i + rest_chars {
                        return;
                    }
                    (i..=j - rest_chars).collect()
                } else {
                    vec![0]
                };
                for m in ends {
                    for b in 1..=budget - rest_nodes {
                        let subs = self.exact(x, i, m, b);
                        for d in subs.iter() {
                            prefix.push(d.clone());
                            self.children(rid, k + 1, m, j, budget - b, prefix, out);
                            prefix.pop();
                        }
                    }
                }
            }
        }
    }
}

/// Size-stratified inside weights over a fixed target string.
struct Inside<'g> {
    grammar: &'g Wcfg,
    target: Vec<TerminalId>,
    memo: HashMap<Key, Weight>,
    seq_memo: HashMap<(usize, usize, usize, usize, usize), Weight>,
}

impl<'g> Inside<'g> {
    fn exact(&mut self, x: NonterminalId, i: usize, j: usize, n: usize) -> Weight {
        let key = (x.0, i, j, n);
        if let Some(&w) = self.memo.get(&key) {
            return w;
        }
        let semiring = self.grammar.semiring;
        let mut total = semiring.zero();
        if n > 0 {
            for &rid in self.grammar.rules_for(x) {
                let rule = &self.grammar.rules[rid.0];
                let inner = if rule.rhs.is_empty() {
                    if n == 1 && i == j {
                        semiring.one()
                    } else {
                        semiring.zero()
                    }
                } else {
                    self.children(rid, 0, i, j, n - 1)
                };
                if !inner.is_zero() {
                    total = total + rule.weight * inner;
                }
            }
        }
        self.memo.insert(key, total);
        total
    }

    fn children(&mut self, rid: RuleId, k: usize, i: usize, j: usize, budget: usize) -> Weight {
        let key = (rid.0, k, i, j, budget);
        if let Some(&w) = self.seq_memo.get(&key) {
            return w;
        }
        let semiring = self.grammar.semiring;
        let rhs = &self.grammar.rules[rid.0].rhs;
        let w = if k == rhs.len() {
            if budget == 0 && i == j {
                semiring.one()
            } else {
                semiring.zero()
            }
        } else {
            let rest = &rhs[k + 1..];
            let rest_nodes = rest.iter().filter(|s| matches!(s, Symbol::Nonterminal(_))).count();
            let rest_chars = rest.len() - rest_nodes;
            match rhs[k] {
                Symbol::Terminal(t) => {
                    if i < j && self.target[i] == t {
                        self.children(rid, k + 1, i + 1, j, budget)
                    } else {
                        semiring.zero()
                    }
                }
                Symbol::Nonterminal(x) => {
                    let mut total = semiring.zero();
                    if budget > rest_nodes && j >= i + rest_chars {
                        for m in i..=j - rest_chars {
                            for b in 1..=budget - rest_nodes {
                                let left = self.exact(x, i, m, b);
                                if left.is_zero() {
                                    continue;
                                }
                                let right = self.children(rid, k + 1, m, j, budget - b);
                                total = total + left * right;
                            }
                        }
                    }
                    total
                }
            }
        };
        self.seq_memo.insert(key, w);
        w
    }
}

impl Wcfg {
    /// All subderivations rooted at `root` with at most `max_nodes` rule
    /// applications, optionally restricted to one yield. Ordered by size,
    /// then by rule order.
    pub fn enumerate_derivations(
        &self,
        root: NonterminalId,
        max_nodes: usize,
        yield_filter: Option<&[String]>,
    ) -> Result<Vec<Derivation>> {
        if root.0 >= self.nonterminals.len() {
            return Err(Error::UnknownNonterminal(format!("#{}", root.0)));
        }
        let target = match yield_filter {
            None => None,
            Some(y) => match self.terminal_ids_of(y) {
                Some(ids) => Some(ids),
                None => return Ok(Vec::new()),
            },
        };
        let len = target.as_ref().map_or(0, Vec::len);
        let mut e = Enumerator {
            grammar: self,
            target,
            memo: HashMap::new(),
        };
        let mut out = Vec::new();
        for n in 1..=max_nodes {
            out.extend(e.exact(root, 0, len, n).iter().cloned());
        }
        Ok(out)
    }

    /// Sum of derivation weights for `y` by size stratum, up to `max_nodes`.
    ///
    /// `converged` holds when each of the last two strata changes the sum by
    /// at most `tol`: an increment of at most `tol` (real), no new support
    /// (boolean), or no improvement of the minimum beyond `tol` (tropical).
    /// This is a heuristic that assumes geometric tails; it is exact only
    /// when derivations of `y` are finite in number and all fit the bound.
    pub fn string_weight_truncated(&self, y: &[String], max_nodes: usize, tol: f64) -> TruncatedWeight {
        let semiring = self.semiring;
        let Some(target) = self.terminal_ids_of(y) else {
            return TruncatedWeight {
                weight: semiring.zero(),
                converged: true,
                strata: vec![semiring.zero(); max_nodes],
            };
        };
        let len = target.len();
        let mut inside = Inside {
            grammar: self,
            target,
            memo: HashMap::new(),
            seq_memo: HashMap::new(),
        };
        let mut total = semiring.zero();
        let mut strata = Vec::with_capacity(max_nodes);
        let mut quiet = 0;
        for n in 1..=max_nodes {
            let s = inside.exact(self.start, 0, len, n);
            if negligible(s, total, tol) {
                quiet += 1;
            } else {
                quiet = 0;
            }
            total = total + s;
            strata.push(s);
        }
        TruncatedWeight {
            weight: total,
            converged: quiet >= 2,
            strata,
        }
    }
}

fn negligible(increment: Weight, before: Weight, tol: f64) -> bool {
    match (increment, before) {
        (Weight::Real(s), _) => s <= tol,
        (Weight::Boolean(s), Weight::Boolean(b)) => !s || b,
        (Weight::Tropical(s), Weight::Tropical(b)) => s == f64::INFINITY || s >= b - tol,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{example_grammar, real};
    use super::*;
    use crate::semiring::SemiringId;
    use crate::tokens;

    /// Brute-force oracle: every tree with at most `max` nodes by unfolding
    /// leftmost sentential forms, independent of the stratified recursion.
    fn brute_force(g: &Wcfg, root: NonterminalId, max: usize) -> Vec<Vec<RuleId>> {
        let mut done = Vec::new();
        let mut frontier: Vec<(Vec<Symbol>, Vec<RuleId>)> = vec![(vec![Symbol::Nonterminal(root)], vec![])];
        while let Some((form, seq)) = frontier.pop() {
            let pos = form.iter().position(|s| matches!(s, Symbol::Nonterminal(_)));
            let Some(pos) = pos else {
                done.push(seq);
                continue;
            };
            let Symbol::Nonterminal(x) = form[pos] else { unreachable!() };
            let open = form.iter().filter(|s| matches!(s, Symbol::Nonterminal(_))).count();
            if seq.len() + open > max {
                continue;
            }
            for &rid in g.rules_for(x) {
                let mut next = form[..pos].to_vec();
                next.extend_from_slice(&g.rules[rid.0].rhs);
                next.extend_from_slice(&form[pos + 1..]);
                let mut s = seq.clone();
                s.push(rid);
                frontier.push((next, s));
            }
        }
        done.sort();
        done
    }

    #[test]
    fn enumeration_agrees_with_brute_force() {
        let g = example_grammar();
        for root in 0..g.num_nonterminals() {
            let root = NonterminalId(root);
            let mut got: Vec<Vec<RuleId>> = g
                .enumerate_derivations(root, 12, None)
                .unwrap()
                .iter()
                .map(|d| g.to_leftmost(d).unwrap())
                .collect();
            got.sort();
            assert_eq!(got, brute_force(&g, root, 12));
        }
    }

    #[test]
    fn leftmost_round_trip_on_all_small_trees() {
        let g = example_grammar();
        let all = g.enumerate_derivations(g.start(), 12, None).unwrap();
        assert!(!all.is_empty());
        for d in &all {
            let seq = g.to_leftmost(d).unwrap();
            assert_eq!(&g.from_leftmost(&seq).unwrap(), d);
            assert_eq!(seq.len(), d.size());
            let w_seq = g.semiring().product(seq.iter().map(|r| g.rules()[r.0].weight));
            assert!(w_seq.approx_eq(&g.derivation_weight(d).unwrap()));
        }
    }

    #[test]
    fn filtered_counts_for_example_sentence() {
        let g = example_grammar();
        let y = tokens("The many cyclists");
        // Sizes: the flat parse has 5 nodes, one ε-Adj recursion adds 2.
        let by_bound = |n| g.enumerate_derivations(g.start(), n, Some(&y)).unwrap().len();
        assert_eq!(by_bound(4), 0);
        assert_eq!(by_bound(5), 1);
        assert_eq!(by_bound(7), 3);
        assert_eq!(by_bound(8), 3);
        assert_eq!(by_bound(9), 6);
        let oracle = brute_force(&g, g.start(), 9)
            .into_iter()
            .filter(|seq| g.derivation_yield(&g.from_leftmost(seq).unwrap()).unwrap() == y)
            .count();
        assert_eq!(by_bound(9), oracle);
    }

    #[test]
    fn root_without_rules_and_unknown_root() {
        let mut g = Wcfg::from_rules(SemiringId::Real, "S", &[("S", &["a"], real(1.0))]).unwrap();
        let x = g.add_nonterminal("X").unwrap();
        assert!(g.enumerate_derivations(x, 5, None).unwrap().is_empty());
        assert!(g.enumerate_derivations(NonterminalId(7), 5, None).is_err());
    }

    #[test]
    fn unique_derivation_for_ab() {
        let g = Wcfg::from_rules(
            SemiringId::Boolean,
            "S",
            &[
                ("S", &["A", "B"], Weight::Boolean(true)),
                ("A", &["a"], Weight::Boolean(true)),
                ("B", &["b"], Weight::Boolean(true)),
            ],
        )
        .unwrap();
        let d = g.enumerate_derivations(g.start(), 10, Some(&tokens("a b"))).unwrap();
        assert_eq!(d.len(), 1);
        let tw = g.string_weight_truncated(&tokens("a b"), 10, 0.0);
        assert_eq!(tw.weight, Weight::Boolean(true));
        assert!(tw.converged);
    }

    #[test]
    fn example_sentence_weight_converges_to_fixed_point() {
        // Oracle: NP_c = 2 + 0.5 NP_c, NP_mc = 8 + 0.5 NP_mc, L = 2 NP_mc,
        // solved by iteration.
        let (mut np_c, mut np_mc) = (0.0f64, 0.0f64);
        for _ in 0..200 {
            np_c = 2.0 + 0.5 * np_c;
            np_mc = 2.0 * np_c * 0.5 + 0.5 * np_mc + 4.0;
        }
        let oracle = 2.0 * np_mc;
        assert!((oracle - 32.0).abs() < 1e-9);

        // The tail roughly halves every two nodes, so at 60 nodes the last
        // nonzero stratum is still above 1e-6.
        let g = example_grammar();
        let y = tokens("The many cyclists");
        let tw = g.string_weight_truncated(&y, 60, 1e-5);
        assert!(tw.converged);
        assert!(tw.weight.within(&real(oracle), 1e-5));
        assert!(!g.string_weight_truncated(&y, 60, 1e-9).converged);
        let tw = g.string_weight_truncated(&y, 140, 1e-9);
        assert!(tw.converged);
        assert!(tw.weight.within(&real(oracle), 1e-9));
    }

    #[test]
    fn truncated_sum_equals_enumeration_sum() {
        let g = example_grammar();
        let y = tokens("The many cyclists");
        for bound in [5, 9, 13] {
            let enumerated = SemiringId::Real.sum(
                g.enumerate_derivations(g.start(), bound, Some(&y))
                    .unwrap()
                    .iter()
                    .map(|d| g.derivation_weight(d).unwrap()),
            );
            let tw = g.string_weight_truncated(&y, bound, 1e-9);
            assert!(tw.weight.approx_eq(&enumerated), "{bound}");
        }
    }

    #[test]
    fn partial_sums_are_monotone() {
        let g = example_grammar();
        let tw = g.string_weight_truncated(&tokens("The many cyclists"), 40, 1e-9);
        assert!(tw.strata.iter().all(|s| s.value() >= 0.0));
        let mut acc = 0.0;
        for s in &tw.strata {
            let next = acc + s.value();
            assert!(next >= acc);
            acc = next;
        }
    }

    #[test]
    fn absent_string_is_zero_and_converged() {
        let g = example_grammar();
        for y in ["cyclists The", "bicycle"] {
            let tw = g.string_weight_truncated(&tokens(y), 30, 1e-9);
            assert!(tw.weight.is_zero());
            assert!(tw.converged);
        }
    }

    #[test]
    fn too_small_bound_does_not_converge() {
        let g = example_grammar();
        let tw = g.string_weight_truncated(&tokens("The many cyclists"), 12, 1e-9);
        assert!(!tw.converged);
    }

    #[test]
    fn boolean_support_matches_enumeration() {
        let rules: Vec<(&str, &[&str], Weight)> = vec![
            ("S", &["A", "S"], Weight::Boolean(true)),
            ("S", &["b"], Weight::Boolean(true)),
            ("A", &["a"], Weight::Boolean(true)),
            ("A", &[], Weight::Boolean(true)),
        ];
        let g = Wcfg::from_rules(SemiringId::Boolean, "S", &rules).unwrap();
        for y in ["b", "a b", "a a b", "b a", "a"] {
            let y = tokens(y);
            let exists = !g.enumerate_derivations(g.start(), 12, Some(&y)).unwrap().is_empty();
            assert_eq!(g.string_weight_truncated(&y, 12, 0.0).weight, Weight::Boolean(exists));
        }
    }
}
