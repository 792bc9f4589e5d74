//! Seeded random grammar/automaton pairs for property checks.
//!
//! Structure and raw numbers are drawn once per seed; the semiring only
//! decides how a raw number in (0.1, 0.9) becomes a weight. So the same seed
//! gives the same instance shape under every semiring.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{StateId, Wfsa};
use crate::grammar::{Symbol, Wcfg};
use crate::semiring::{SemiringId, Weight};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub max_states: usize,
    pub max_symbols: usize,
    pub max_nonterminals: usize,
    pub max_rules: usize,
    pub max_rhs: usize,
    pub max_arcs: usize,
    pub epsilon_arc_probability: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            max_states: 3,
            max_symbols: 2,
            max_nonterminals: 3,
            max_rules: 6,
            max_rhs: 2,
            max_arcs: 5,
            epsilon_arc_probability: 0.3,
        }
    }
}

impl GeneratorConfig {
    /// The same shape limits with no ε-arcs.
    pub fn epsilon_free() -> Self {
        GeneratorConfig {
            epsilon_arc_probability: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub grammar: Wcfg,
    pub automaton: Wfsa,
}

const SYMBOLS: [&str; 4] = ["a", "b", "c", "d"];
const NONTERMINALS: [&str; 4] = ["S", "X", "Y", "Z"];

/// Booleans become true; tropical uses the raw number as a cost.
fn weight(semiring: SemiringId, raw: f64) -> Weight {
    match semiring {
        SemiringId::Boolean => Weight::Boolean(true),
        SemiringId::Real => Weight::Real(raw),
        SemiringId::Tropical => Weight::Tropical(raw),
    }
}

struct Draw {
    states: usize,
    symbols: usize,
    initial: Vec<Option<f64>>,
    finals: Vec<Option<f64>>,
    arcs: Vec<(usize, Option<usize>, f64, usize)>,
    nonterminals: usize,
    rules: Vec<(usize, Vec<usize>, f64)>,
}

fn raw(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.1..0.9)
}

fn draw(rng: &mut ChaCha8Rng, c: &GeneratorConfig) -> Draw {
    let states = rng.gen_range(1..=c.max_states);
    let symbols = rng.gen_range(1..=c.max_symbols.min(SYMBOLS.len()));
    let mut initial: Vec<Option<f64>> = (0..states).map(|q| (q == 0 || rng.gen_bool(0.25)).then(|| raw(rng))).collect();
    let mut finals: Vec<Option<f64>> = (0..states).map(|_| rng.gen_bool(0.5).then(|| raw(rng))).collect();
    if initial.iter().all(Option::is_none) {
        initial[0] = Some(raw(rng));
    }
    if finals.iter().all(Option::is_none) {
        let q = rng.gen_range(0..states);
        finals[q] = Some(raw(rng));
    }
    let arcs = (0..rng.gen_range(1..=c.max_arcs))
        .map(|_| {
            let src = rng.gen_range(0..states);
            let label = (!rng.gen_bool(c.epsilon_arc_probability)).then(|| rng.gen_range(0..symbols));
            let w = raw(rng);
            (src, label, w, rng.gen_range(0..states))
        })
        .collect();

    let nonterminals = rng.gen_range(1..=c.max_nonterminals.min(NONTERMINALS.len()));
    let rules = (0..rng.gen_range(1..=c.max_rules))
        .map(|i| {
            let lhs = if i == 0 { 0 } else { rng.gen_range(0..nonterminals) };
            let len = rng.gen_range(0..=c.max_rhs);
            // Codes below `nonterminals` are nonterminals, the rest symbols.
            let rhs = (0..len).map(|_| rng.gen_range(0..nonterminals + symbols)).collect();
            (lhs, rhs, raw(rng))
        })
        .collect();
    Draw {
        states,
        symbols,
        initial,
        finals,
        arcs,
        nonterminals,
        rules,
    }
}

fn build(d: &Draw, semiring: SemiringId) -> (Wcfg, Wfsa) {
    let mut a = Wfsa::new(semiring);
    for q in 0..d.states {
        a.add_state(&format!("q{q}")).expect("valid state name");
    }
    for q in 0..d.states {
        if let Some(w) = d.initial[q] {
            a.set_initial(StateId(q), weight(semiring, w)).expect("state exists");
        }
        if let Some(w) = d.finals[q] {
            a.set_final(StateId(q), weight(semiring, w)).expect("state exists");
        }
    }
    for s in &SYMBOLS[..d.symbols] {
        a.add_symbol(s).expect("valid symbol");
    }
    for &(src, label, w, tgt) in &d.arcs {
        a.add_arc(StateId(src), label.map(|l| SYMBOLS[l]), weight(semiring, w), StateId(tgt))
            .expect("valid arc");
    }

    let mut g = Wcfg::new(semiring, NONTERMINALS[0]).expect("valid start");
    let nts: Vec<_> = NONTERMINALS[..d.nonterminals]
        .iter()
        .map(|n| g.add_nonterminal(n).expect("valid nonterminal"))
        .collect();
    for (lhs, rhs, w) in &d.rules {
        let rhs = rhs
            .iter()
            .map(|&code| {
                if code < d.nonterminals {
                    Symbol::Nonterminal(nts[code])
                } else {
                    Symbol::Terminal(g.add_terminal(SYMBOLS[code - d.nonterminals]).expect("valid terminal"))
                }
            })
            .collect();
        g.add_rule(nts[*lhs], rhs, weight(semiring, *w)).expect("valid rule");
    }
    (g, a)
}

/// A random instance for `seed`. Draws whose real-weighted ε-closure
/// diverges are discarded and redrawn from the same stream.
pub fn random_instance(seed: u64, semiring: SemiringId, config: &GeneratorConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let d = draw(&mut rng, config);
        let (_, real_a) = build(&d, SemiringId::Real);
        if real_a.epsilon_closure().is_err() {
            continue;
        }
        let (grammar, automaton) = build(&d, semiring);
        return Instance {
            seed,
            grammar,
            automaton,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_within_limits() {
        let c = GeneratorConfig::default();
        for seed in 0..200 {
            let x = random_instance(seed, SemiringId::Real, &c);
            let y = random_instance(seed, SemiringId::Real, &c);
            assert_eq!(x.grammar, y.grammar);
            assert_eq!(x.automaton, y.automaton);
            assert!(x.automaton.num_states() <= 3);
            assert!(x.automaton.alphabet().len() <= 2);
            assert!(x.grammar.num_nonterminals() <= 3);
            assert!(x.grammar.rules().len() <= 6);
            assert!(x.grammar.longest_rhs() <= 2);
            assert!(x.automaton.epsilon_closure().is_ok());
            for r in x.grammar.rules() {
                assert!((0.1..0.9).contains(&r.weight.value()));
            }
        }
    }

    #[test]
    fn same_shape_under_every_semiring() {
        let c = GeneratorConfig::default();
        for seed in 0..50 {
            let real = random_instance(seed, SemiringId::Real, &c);
            let trop = random_instance(seed, SemiringId::Tropical, &c);
            let boolean = random_instance(seed, SemiringId::Boolean, &c);
            assert_eq!(real.grammar.rules().len(), trop.grammar.rules().len());
            assert_eq!(real.automaton.arcs().len(), boolean.automaton.arcs().len());
            for (r, t) in real.grammar.rules().iter().zip(trop.grammar.rules()) {
                assert_eq!(r.weight.value(), t.weight.value());
                assert_eq!(r.rhs, t.rhs);
            }
        }
    }

    #[test]
    fn epsilon_free_config_has_no_epsilon_arcs() {
        let c = GeneratorConfig::epsilon_free();
        assert!((0..100).all(|s| !random_instance(s, SemiringId::Real, &c).automaton.has_epsilon_arcs()));
        let c = GeneratorConfig::default();
        assert!((0..100).any(|s| random_instance(s, SemiringId::Real, &c).automaton.has_epsilon_arcs()));
    }
}
