//! Weighted finite-state automata whose arcs may be labeled ε.

pub(crate) mod text;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::semiring::{Divergent, SemiringId, Weight};
use crate::{check_state_name, check_symbol_name};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q#{}", self.0)
    }
}

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "arc#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Epsilon,
    Symbol(String),
}

impl Label {
    pub fn is_epsilon(&self) -> bool {
        matches!(self, Label::Epsilon)
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            Label::Epsilon => None,
            Label::Symbol(s) => Some(s),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Epsilon => f.write_str(crate::EPSILON),
            Label::Symbol(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub source: StateId,
    pub label: Label,
    pub weight: Weight,
    pub target: StateId,
}

/// A sequence of matched arcs, or a single state when empty.
///
/// Ordering is lexicographic on the arc ids, then on the start state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    arcs: Vec<ArcId>,
    start: StateId,
}

impl Path {
    pub fn empty(state: StateId) -> Self {
        Path {
            arcs: Vec::new(),
            start: state,
        }
    }

    /// Checks that consecutive arcs share their middle state.
    pub fn new(automaton: &Wfsa, start: StateId, arcs: Vec<ArcId>) -> Result<Self> {
        let mut at = start;
        if at.0 >= automaton.num_states() {
            return Err(Error::UnknownState(at.to_string()));
        }
        for &id in &arcs {
            let arc = automaton.arc(id)?;
            if arc.source != at {
                return Err(Error::BrokenPath(format!(
                    "{id} leaves {} but the path is at {}",
                    automaton.state_name(arc.source),
                    automaton.state_name(at)
                )));
            }
            at = arc.target;
        }
        Ok(Path { arcs, start })
    }

    /// Builds a nonempty path from its arcs alone.
    pub fn from_arcs(automaton: &Wfsa, arcs: Vec<ArcId>) -> Result<Self> {
        let first = arcs
            .first()
            .ok_or_else(|| Error::BrokenPath("an empty path needs an explicit state".into()))?;
        let start = automaton.arc(*first)?.source;
        Path::new(automaton, start, arcs)
    }

    pub fn arcs(&self) -> &[ArcId] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn first_state(&self) -> StateId {
        self.start
    }

    pub fn last_state(&self, automaton: &Wfsa) -> StateId {
        self.arcs
            .last()
            .map_or(self.start, |&id| automaton.arcs[id.0].target)
    }

    pub fn concat(&self, other: &Path, automaton: &Wfsa) -> Result<Path> {
        let mut arcs = self.arcs.clone();
        arcs.extend_from_slice(&other.arcs);
        if self.last_state(automaton) != other.start {
            return Err(Error::BrokenPath("concatenated paths do not meet".into()));
        }
        Path::new(automaton, self.start, arcs)
    }
}

/// Whether a path weight includes the initial and final weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathWeighting {
    Full,
    Subpath,
}

/// Dense |Q|×|Q| weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    size: usize,
    cells: Vec<Weight>,
}

impl WeightMatrix {
    pub fn filled(size: usize, value: Weight) -> Self {
        WeightMatrix {
            size,
            cells: vec![value; size * size],
        }
    }

    pub fn identity(semiring: SemiringId, size: usize) -> Self {
        let mut m = WeightMatrix::filled(size, semiring.zero());
        for i in 0..size {
            m.set(i, i, semiring.one());
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> Weight {
        self.cells[row * self.size + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Weight) {
        self.cells[row * self.size + col] = value;
    }

    pub fn mul(&self, other: &WeightMatrix) -> WeightMatrix {
        let zero = self.get_zero();
        let mut out = WeightMatrix::filled(self.size, zero);
        for i in 0..self.size {
            for k in 0..self.size {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..self.size {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &WeightMatrix) -> WeightMatrix {
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(&a, &b)| a + b)
            .collect();
        WeightMatrix {
            size: self.size,
            cells,
        }
    }

    pub fn approx_eq(&self, other: &WeightMatrix) -> bool {
        self.size == other.size && self.cells.iter().zip(&other.cells).all(|(a, b)| a.approx_eq(b))
    }

    fn get_zero(&self) -> Weight {
        self.cells.first().map_or(Weight::Boolean(false), |w| w.semiring().zero())
    }
}

/// A weighted finite-state automaton over one semiring.
///
/// Arcs form a multiset: identical arcs are distinct by [`ArcId`].
#[derive(Clone, Debug, PartialEq)]
pub struct Wfsa {
    semiring: SemiringId,
    alphabet: BTreeSet<String>,
    states: Vec<String>,
    state_ids: HashMap<String, StateId>,
    arcs: Vec<Arc>,
    initial: Vec<Weight>,
    finals: Vec<Weight>,
}

impl Wfsa {
    pub fn new(semiring: SemiringId) -> Self {
        Wfsa {
            semiring,
            alphabet: BTreeSet::new(),
            states: Vec::new(),
            state_ids: HashMap::new(),
            arcs: Vec::new(),
            initial: Vec::new(),
            finals: Vec::new(),
        }
    }

    pub fn semiring(&self) -> SemiringId {
        self.semiring
    }

    /// Returns the existing state of that name or adds a fresh one with
    /// initial and final weight 0̄.
    pub fn add_state(&mut self, name: &str) -> Result<StateId> {
        if let Some(&id) = self.state_ids.get(name) {
            return Ok(id);
        }
        check_state_name(name)?;
        let id = StateId(self.states.len());
        self.states.push(name.to_string());
        self.state_ids.insert(name.to_string(), id);
        self.initial.push(self.semiring.zero());
        self.finals.push(self.semiring.zero());
        Ok(id)
    }

    fn same_semiring(&self, w: Weight) -> Result<()> {
        if w.semiring() != self.semiring {
            return Err(crate::semiring::SemiringError::Mismatch(self.semiring, w.semiring()).into());
        }
        Ok(())
    }

    pub fn set_initial(&mut self, state: StateId, weight: Weight) -> Result<()> {
        self.same_semiring(weight)?;
        self.state_checked(state)?;
        self.initial[state.0] = weight;
        Ok(())
    }

    pub fn set_final(&mut self, state: StateId, weight: Weight) -> Result<()> {
        self.same_semiring(weight)?;
        self.state_checked(state)?;
        self.finals[state.0] = weight;
        Ok(())
    }

    /// Declares an alphabet symbol that no arc needs to carry.
    pub fn add_symbol(&mut self, symbol: &str) -> Result<()> {
        check_symbol_name(symbol)?;
        self.alphabet.insert(symbol.to_string());
        Ok(())
    }

    /// Adds an arc; `None` labels an ε-arc. Zero-weight arcs are rejected.
    pub fn add_arc(
        &mut self,
        source: StateId,
        label: Option<&str>,
        weight: Weight,
        target: StateId,
    ) -> Result<ArcId> {
        self.same_semiring(weight)?;
        self.state_checked(source)?;
        self.state_checked(target)?;
        if weight.is_zero() {
            return Err(Error::ZeroWeight(format!(
                "arc {} -> {}",
                self.states[source.0], self.states[target.0]
            )));
        }
        let label = match label {
            None => Label::Epsilon,
            Some(sym) => {
                self.add_symbol(sym)?;
                Label::Symbol(sym.to_string())
            }
        };
        let id = ArcId(self.arcs.len());
        self.arcs.push(Arc {
            source,
            label,
            weight,
            target,
        });
        Ok(id)
    }

    fn state_checked(&self, state: StateId) -> Result<()> {
        if state.0 < self.states.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(state.to_string()))
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn state_name(&self, state: StateId) -> &str {
        &self.states[state.0]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_ids.get(name).copied()
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> Result<&Arc> {
        self.arcs.get(id.0).ok_or(Error::UnknownArc(id))
    }

    pub fn has_epsilon_arcs(&self) -> bool {
        self.arcs.iter().any(|a| a.label.is_epsilon())
    }

    pub fn initial_weight(&self, state: StateId) -> Weight {
        self.initial[state.0]
    }

    pub fn final_weight(&self, state: StateId) -> Weight {
        self.finals[state.0]
    }

    /// States with nonzero initial weight.
    pub fn initial_states(&self) -> Vec<StateId> {
        self.states().filter(|q| !self.initial[q.0].is_zero()).collect()
    }

    /// States with nonzero final weight.
    pub fn final_states(&self) -> Vec<StateId> {
        self.states().filter(|q| !self.finals[q.0].is_zero()).collect()
    }

    pub fn is_full_path(&self, path: &Path) -> bool {
        !self.initial[path.first_state().0].is_zero() && !self.finals[path.last_state(self).0].is_zero()
    }

    pub fn path_yield(&self, path: &Path) -> Result<Vec<String>> {
        Path::new(self, path.start, path.arcs.clone())?;
        Ok(path
            .arcs
            .iter()
            .filter_map(|id| self.arcs[id.0].label.symbol().map(str::to_string))
            .collect())
    }

    /// Subpath weight is the arc product alone; a full path also multiplies
    /// in λ of its first state and ρ of its last. Length-0 paths are
    /// admitted either way.
    pub fn path_weight(&self, path: &Path, weighting: PathWeighting) -> Result<Weight> {
        Path::new(self, path.start, path.arcs.clone())?;
        let arcs = self
            .semiring
            .product(path.arcs.iter().map(|id| self.arcs[id.0].weight));
        match weighting {
            PathWeighting::Subpath => Ok(arcs),
            PathWeighting::Full => {
                if !self.is_full_path(path) {
                    return Err(Error::NotFullPath);
                }
                Ok(self.initial[path.start.0] * arcs * self.finals[path.last_state(self).0])
            }
        }
    }

    /// Every well-formed path with at most `max_arcs` arcs, sorted by arc ids.
    ///
    /// With `full_only`, paths must start in I and end in F. A yield filter
    /// prunes any prefix whose yield already disagrees.
    pub fn enumerate_paths(
        &self,
        max_arcs: usize,
        yield_filter: Option<&[String]>,
        full_only: bool,
    ) -> Vec<Path> {
        let mut outgoing = vec![Vec::new(); self.states.len()];
        for (i, arc) in self.arcs.iter().enumerate() {
            outgoing[arc.source.0].push(ArcId(i));
        }
        let mut out = Vec::new();
        let starts: Vec<StateId> = if full_only {
            self.initial_states()
        } else {
            self.states().collect()
        };
        let mut stack = Vec::new();
        for start in starts {
            self.extend_paths(start, start, 0, max_arcs, yield_filter, full_only, &outgoing, &mut stack, &mut out);
        }
        out.sort();
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_paths(
        &self,
        start: StateId,
        at: StateId,
        consumed: usize,
        budget: usize,
        yield_filter: Option<&[String]>,
        full_only: bool,
        outgoing: &[Vec<ArcId>],
        stack: &mut Vec<ArcId>,
        out: &mut Vec<Path>,
    ) {
        let yield_done = yield_filter.is_none_or(|y| consumed == y.len());
        if yield_done && (!full_only || !self.finals[at.0].is_zero()) {
            out.push(Path {
                arcs: stack.clone(),
                start,
            });
        }
        if stack.len() == budget {
            return;
        }
        for &id in &outgoing[at.0] {
            let arc = &self.arcs[id.0];
            let next = match (&arc.label, yield_filter) {
                (Label::Epsilon, _) => consumed,
                (Label::Symbol(_), None) => consumed,
                (Label::Symbol(s), Some(y)) => {
                    if y.get(consumed) != Some(s) {
                        continue;
                    }
                    consumed + 1
                }
            };
            stack.push(id);
            self.extend_paths(start, arc.target, next, budget, yield_filter, full_only, outgoing, stack, out);
            stack.pop();
        }
    }

    /// One-step matrix of the arcs labeled `label`, summing parallel arcs.
    pub fn label_matrix(&self, label: &Label) -> WeightMatrix {
        let mut m = WeightMatrix::filled(self.states.len(), self.semiring.zero());
        for arc in self.arcs.iter().filter(|a| &a.label == label) {
            let v = m.get(arc.source.0, arc.target.0) + arc.weight;
            m.set(arc.source.0, arc.target.0, v);
        }
        m
    }

    /// All-pairs ε-closure: entry (p, q) sums the arc products of every
    /// ε-only subpath from p to q, including the empty one.
    ///
    /// Pivot elimination over each state with the star of the pivot's
    /// accumulated cycle weight.
    pub fn epsilon_closure(&self) -> Result<WeightMatrix, Divergent> {
        let n = self.states.len();
        let mut m = self.label_matrix(&Label::Epsilon);
        for k in 0..n {
            let pivot = m.get(k, k).star()?;
            let prev = m.clone();
            for i in 0..n {
                let left = prev.get(i, k);
                if left.is_zero() {
                    continue;
                }
                let left = left * pivot;
                for j in 0..n {
                    let right = prev.get(k, j);
                    if right.is_zero() {
                        continue;
                    }
                    m.set(i, j, prev.get(i, j) + left * right);
                }
            }
        }
        Ok(WeightMatrix::identity(self.semiring, n).add(&m))
    }

    /// L_A(y): the sum over all full paths yielding `y`, computed exactly as
    /// λᵀ·E·M(y₁)·E·…·M(yₙ)·E·ρ.
    pub fn string_weight(&self, y: &[String]) -> Result<Weight, Divergent> {
        let closure = self.epsilon_closure()?;
        let zero = self.semiring.zero();
        let n = self.states.len();
        let mut row: Vec<Weight> = self.initial.clone();
        row = vec_mat(&row, &closure, zero);
        for sym in y {
            let step = self.label_matrix(&Label::Symbol(sym.clone()));
            row = vec_mat(&vec_mat(&row, &step, zero), &closure, zero);
        }
        Ok(self
            .semiring
            .sum((0..n).map(|q| row[q] * self.finals[q])))
    }
}

fn vec_mat(row: &[Weight], m: &WeightMatrix, zero: Weight) -> Vec<Weight> {
    let n = m.size();
    let mut out = vec![zero; n];
    for (i, &a) in row.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, cell) in out.iter_mut().enumerate() {
            *cell = *cell + a * m.get(i, j);
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::tokens;

    fn real(x: f64) -> Weight {
        Weight::Real(x)
    }

    /// Running-example automaton: The/2, ε/0.3, many/0.75 loop, cyclists/1, ε/0.6 loop.
    pub(crate) fn cyclists() -> Wfsa {
        let mut a = Wfsa::new(SemiringId::Real);
        let q: Vec<StateId> = ["q0", "q1", "q2", "q3"].iter().map(|n| a.add_state(n).unwrap()).collect();
        a.set_initial(q[0], real(1.0)).unwrap();
        a.set_final(q[3], real(1.0)).unwrap();
        a.add_arc(q[0], Some("The"), real(2.0), q[1]).unwrap();
        a.add_arc(q[1], None, real(0.3), q[2]).unwrap();
        a.add_arc(q[2], Some("many"), real(0.75), q[2]).unwrap();
        a.add_arc(q[2], Some("cyclists"), real(1.0), q[3]).unwrap();
        a.add_arc(q[3], None, real(0.6), q[3]).unwrap();
        a
    }

    /// q0 -a-> q1, ε/(1/3) loop at q1, q1 -b-> q2.
    pub(crate) fn epsilon_loop() -> Wfsa {
        let mut a = Wfsa::new(SemiringId::Real);
        let q: Vec<StateId> = ["q0", "q1", "q2"].iter().map(|n| a.add_state(n).unwrap()).collect();
        a.set_initial(q[0], real(1.0)).unwrap();
        a.set_final(q[2], real(1.0)).unwrap();
        a.add_arc(q[0], Some("a"), real(1.0), q[1]).unwrap();
        a.add_arc(q[1], None, real(1.0 / 3.0), q[1]).unwrap();
        a.add_arc(q[1], Some("b"), real(1.0), q[2]).unwrap();
        a
    }

    pub(crate) fn caption_path(a: &Wfsa) -> Path {
        Path::from_arcs(a, [0, 1, 2, 3, 4, 4].map(ArcId).to_vec()).unwrap()
    }

    #[test]
    fn yield_of_caption_path() {
        let a = cyclists();
        assert_eq!(a.path_yield(&caption_path(&a)).unwrap(), tokens("The many cyclists"));
        assert!(a.path_yield(&Path::empty(StateId(2))).unwrap().is_empty());
    }

    #[test]
    fn weight_of_caption_path() {
        let a = cyclists();
        let p = caption_path(&a);
        let expected = real(1.0 * 2.0 * 0.3 * 0.75 * 1.0 * 0.6 * 0.6 * 1.0);
        assert!(a.path_weight(&p, PathWeighting::Full).unwrap().approx_eq(&expected));
        assert!(a.path_weight(&p, PathWeighting::Subpath).unwrap().approx_eq(&real(0.162)));
        assert_eq!(
            a.path_weight(&Path::empty(StateId(1)), PathWeighting::Subpath).unwrap(),
            real(1.0)
        );
        assert!(matches!(
            a.path_weight(&Path::empty(StateId(1)), PathWeighting::Full),
            Err(Error::NotFullPath)
        ));
    }

    #[test]
    fn broken_paths_are_rejected() {
        let a = cyclists();
        assert!(matches!(Path::from_arcs(&a, vec![ArcId(0), ArcId(2)]), Err(Error::BrokenPath(_))));
        assert!(matches!(Path::from_arcs(&a, vec![ArcId(9)]), Err(Error::UnknownArc(_))));
    }

    #[test]
    fn zero_weight_arc_rejected() {
        let mut a = Wfsa::new(SemiringId::Real);
        let q = a.add_state("q").unwrap();
        assert!(matches!(a.add_arc(q, Some("x"), real(0.0), q), Err(Error::ZeroWeight(_))));
        assert!(matches!(a.add_arc(q, Some("<eps>"), real(1.0), q), Err(Error::ReservedSymbol(_))));
        assert!(a.add_arc(q, Some("x"), Weight::Tropical(1.0), q).is_err());
    }

    #[test]
    fn enumerate_loop_paths() {
        let a = epsilon_loop();
        let ab = tokens("a b");
        assert_eq!(a.enumerate_paths(4, Some(&ab), true).len(), 3);
        assert_eq!(a.enumerate_paths(0, None, true), Vec::<Path>::new());
    }

    #[test]
    fn enumeration_matches_unfiltered_filtering() {
        let a = cyclists();
        let all = a.enumerate_paths(6, None, true);
        let y = tokens("The many cyclists");
        let filtered: Vec<Path> = all
            .iter()
            .filter(|p| a.path_yield(p).unwrap() == y)
            .cloned()
            .collect();
        assert_eq!(a.enumerate_paths(6, Some(&y), true), filtered);
        assert!(filtered.contains(&caption_path(&a)));
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn closure_examples() {
        let a = epsilon_loop();
        let e = a.epsilon_closure().unwrap();
        assert!(e.get(1, 1).approx_eq(&real(1.5)));
        assert!(cyclists().epsilon_closure().unwrap().get(3, 3).approx_eq(&real(2.5)));

        let mut plain = Wfsa::new(SemiringId::Tropical);
        let p = plain.add_state("p").unwrap();
        let q = plain.add_state("q").unwrap();
        plain.add_arc(p, Some("x"), Weight::Tropical(1.0), q).unwrap();
        assert_eq!(
            plain.epsilon_closure().unwrap(),
            WeightMatrix::identity(SemiringId::Tropical, 2)
        );
    }

    #[test]
    fn closure_divergence() {
        let mut a = Wfsa::new(SemiringId::Real);
        let p = a.add_state("p").unwrap();
        a.add_arc(p, None, real(0.6), p).unwrap();
        a.add_arc(p, None, real(0.6), p).unwrap();
        assert!(a.epsilon_closure().is_err());
        assert!(a.string_weight(&[]).is_err());
    }

    #[test]
    fn closure_fixed_point() {
        let a = cyclists();
        let e = a.epsilon_closure().unwrap();
        let step = a.label_matrix(&Label::Epsilon);
        let rhs = WeightMatrix::identity(SemiringId::Real, a.num_states()).add(&step.mul(&e));
        assert!(e.approx_eq(&rhs));
    }

    #[test]
    fn string_weights() {
        assert!(epsilon_loop().string_weight(&tokens("a b")).unwrap().approx_eq(&real(1.5)));
        let a = cyclists();
        let expected = real(2.0 * 0.3 * 0.75 * 1.0 * 2.5);
        assert!(a.string_weight(&tokens("The many cyclists")).unwrap().approx_eq(&expected));
        assert!(a.string_weight(&tokens("cyclists The")).unwrap().is_zero());
        assert!(a.string_weight(&tokens("unknown")).unwrap().is_zero());
    }

    #[test]
    fn truncated_path_sums_converge_monotonically() {
        let a = epsilon_loop();
        let y = tokens("a b");
        let exact = a.string_weight(&y).unwrap().value();
        let mut last = 0.0;
        for bound in 2..40 {
            let sum = SemiringId::Real
                .sum(
                    a.enumerate_paths(bound, Some(&y), true)
                        .iter()
                        .map(|p| a.path_weight(p, PathWeighting::Full).unwrap()),
                )
                .value();
            assert!(sum >= last && sum <= exact + 1e-12);
            last = sum;
        }
        assert!((last - exact).abs() < 1e-12);
    }

    #[test]
    fn concatenation_multiplies() {
        let a = cyclists();
        let p1 = Path::from_arcs(&a, vec![ArcId(0), ArcId(1)]).unwrap();
        let p2 = Path::from_arcs(&a, vec![ArcId(2), ArcId(3)]).unwrap();
        let p = p1.concat(&p2, &a).unwrap();
        let mut y = a.path_yield(&p1).unwrap();
        y.extend(a.path_yield(&p2).unwrap());
        assert_eq!(a.path_yield(&p).unwrap(), y);
        let w = a.path_weight(&p1, PathWeighting::Subpath).unwrap()
            * a.path_weight(&p2, PathWeighting::Subpath).unwrap();
        assert!(a.path_weight(&p, PathWeighting::Subpath).unwrap().approx_eq(&w));
        assert!(p2.concat(&p1, &a).is_err());
    }
}
