//! Emptiness, equivalence and inclusion.
//!
//! Every hDMA is read as a finite Muller automaton whose letters are the
//! (label, history) pairs of its transitions. A language is nonempty iff some
//! reachable strongly connected set of states is accepting; such a set is
//! turned back into a concrete ultimately periodic word by realizing a loop
//! through it.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

use crate::automaton::{AcceptingCondition, Automaton, History, Label, StateId};
use crate::boolean::{complement, intersect, symmetric_difference};
use crate::config::{apply_history, Configuration, UpWord};
use crate::name::FreshNames;
use crate::upwords::{realize_loop, Loop};

/// The finite-alphabet reading of an automaton.
#[derive(Debug, Clone)]
pub struct FiniteMuller {
    pub states: Vec<StateId>,
    pub initial: StateId,
    pub alphabet: Vec<(Label, History)>,
    /// `(state, letter index) -> state`.
    pub transitions: BTreeMap<(StateId, usize), StateId>,
    pub accepting: AcceptingCondition,
}

pub fn to_finite_muller(a: &Automaton) -> FiniteMuller {
    let mut alphabet: Vec<(Label, History)> = Vec::new();
    let mut transitions = BTreeMap::new();
    for t in a.transitions() {
        let letter = (t.label.clone(), t.history.clone());
        let idx = match alphabet.iter().position(|l| *l == letter) {
            Some(i) => i,
            None => {
                alphabet.push(letter);
                alphabet.len() - 1
            }
        };
        transitions.insert((t.source, idx), t.target);
    }
    FiniteMuller {
        states: (0..a.num_states()).collect(),
        initial: a.initial(),
        alphabet,
        transitions,
        accepting: a.accepting().clone(),
    }
}

/// An accepting strongly connected set with a path to it and a closed walk
/// covering it. Paths are transition indices of the automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessLoop {
    pub set: BTreeSet<StateId>,
    pub access: Vec<usize>,
    pub cycle: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emptiness {
    Empty,
    NonEmpty(WitnessLoop),
}

impl Emptiness {
    pub fn is_empty(&self) -> bool {
        matches!(self, Emptiness::Empty)
    }
}

// Conditions in negation normal form over Inf/Fin literals. `Inf(A)` holds
// on S when S meets A, `Fin(A)` when it avoids A.
#[derive(Debug, Clone)]
enum Formula {
    True,
    False,
    Inf(BTreeSet<StateId>),
    Fin(BTreeSet<StateId>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    fn and(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    fn or(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    fn inf(set: BTreeSet<StateId>) -> Formula {
        if set.is_empty() {
            Formula::False
        } else {
            Formula::Inf(set)
        }
    }

    fn fin(set: BTreeSet<StateId>) -> Formula {
        if set.is_empty() {
            Formula::True
        } else {
            Formula::Fin(set)
        }
    }

    fn holds(&self, s: &BTreeSet<StateId>) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Inf(a) => !a.is_disjoint(s),
            Formula::Fin(a) => a.is_disjoint(s),
            Formula::And(parts) => parts.iter().all(|p| p.holds(s)),
            Formula::Or(parts) => parts.iter().any(|p| p.holds(s)),
        }
    }

    fn map_atoms(self, f: &impl Fn(&BTreeSet<StateId>) -> BTreeSet<StateId>) -> Formula {
        match self {
            Formula::Inf(a) => Formula::inf(f(&a)),
            Formula::Fin(a) => Formula::fin(f(&a)),
            Formula::And(parts) => {
                Formula::and(parts.into_iter().map(|p| p.map_atoms(f)).collect())
            }
            Formula::Or(parts) => Formula::or(parts.into_iter().map(|p| p.map_atoms(f)).collect()),
            other => other,
        }
    }

    fn fin_atoms(&self, out: &mut Vec<BTreeSet<StateId>>) {
        match self {
            Formula::Fin(a) => {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            Formula::And(parts) | Formula::Or(parts) => parts.iter().for_each(|p| p.fin_atoms(out)),
            _ => {}
        }
    }
}

/// Translates `cond` (or its negation) restricted to nonempty subsets of
/// `universe`.
fn formula(cond: &AcceptingCondition, negated: bool, universe: &BTreeSet<StateId>) -> Formula {
    match cond {
        AcceptingCondition::Explicit(family) => {
            let usable = family.iter().filter(|f| f.is_subset(universe));
            if negated {
                Formula::and(
                    usable
                        .map(|f| {
                            let outside = universe.difference(f).copied().collect();
                            let mut parts: Vec<Formula> = f
                                .iter()
                                .map(|&q| Formula::Fin(BTreeSet::from([q])))
                                .collect();
                            parts.push(Formula::inf(outside));
                            Formula::or(parts)
                        })
                        .collect(),
                )
            } else {
                Formula::or(
                    usable
                        .map(|f| {
                            let mut parts: Vec<Formula> = f
                                .iter()
                                .map(|&q| Formula::Inf(BTreeSet::from([q])))
                                .collect();
                            // the empty set is never an Inf set
                            if f.is_empty() {
                                parts.push(Formula::False);
                            }
                            parts.push(Formula::fin(universe.difference(f).copied().collect()));
                            Formula::and(parts)
                        })
                        .collect(),
                )
            }
        }
        AcceptingCondition::Negated(inner) => formula(inner, !negated, universe),
        AcceptingCondition::Projected(p) => {
            let left_universe = universe.iter().map(|&s| p.components[s].0).collect();
            let right_universe = universe.iter().map(|&s| p.components[s].1).collect();
            let side = |cond: &AcceptingCondition, neg: bool, left: bool| {
                let u = if left {
                    &left_universe
                } else {
                    &right_universe
                };
                formula(cond, neg, u).map_atoms(&|atom: &BTreeSet<StateId>| {
                    universe
                        .iter()
                        .copied()
                        .filter(|&s| {
                            let (l, r) = p.components[s];
                            atom.contains(if left { &l } else { &r })
                        })
                        .collect()
                })
            };
            let l = |neg| side(&p.left, neg, true);
            let r = |neg| side(&p.right, neg, false);
            use crate::automaton::BoolOp::*;
            match (p.op, negated) {
                (And, false) => Formula::and(vec![l(false), r(false)]),
                (And, true) => Formula::or(vec![l(true), r(true)]),
                (Or, false) => Formula::or(vec![l(false), r(false)]),
                (Or, true) => Formula::and(vec![l(true), r(true)]),
                (Xor, false) => Formula::or(vec![
                    Formula::and(vec![l(false), r(true)]),
                    Formula::and(vec![l(true), r(false)]),
                ]),
                (Xor, true) => Formula::or(vec![
                    Formula::and(vec![l(false), r(false)]),
                    Formula::and(vec![l(true), r(true)]),
                ]),
            }
        }
    }
}

fn reachable(a: &Automaton) -> BTreeSet<StateId> {
    let mut seen = BTreeSet::from([a.initial()]);
    let mut queue = VecDeque::from([a.initial()]);
    while let Some(q) = queue.pop_front() {
        for i in a.outgoing(q) {
            let t = a.transitions()[i].target;
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Strongly connected components of the subgraph induced by `within` that
/// contain at least one edge.
fn nontrivial_sccs(a: &Automaton, within: &BTreeSet<StateId>) -> Vec<BTreeSet<StateId>> {
    let mut g = DiGraphMap::<StateId, ()>::new();
    for &q in within {
        g.add_node(q);
    }
    for t in a.transitions() {
        if within.contains(&t.source) && within.contains(&t.target) {
            g.add_edge(t.source, t.target, ());
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .filter(|c| c.len() > 1 || g.contains_edge(c[0], c[0]))
        .map(|c| c.into_iter().collect())
        .collect()
}

// Emerson–Lei style search: an SCC satisfying the formula is itself an
// answer; otherwise any answer inside it must avoid one of the Fin atoms it
// meets, so recurse on the SCC with that atom removed.
fn search(
    a: &Automaton,
    within: &BTreeSet<StateId>,
    phi: &Formula,
    fins: &[BTreeSet<StateId>],
    explored: &mut HashSet<BTreeSet<StateId>>,
) -> Option<BTreeSet<StateId>> {
    for scc in nontrivial_sccs(a, within) {
        if !explored.insert(scc.clone()) {
            continue;
        }
        if phi.holds(&scc) {
            return Some(scc);
        }
        for atom in fins.iter().filter(|atom| !atom.is_disjoint(&scc)) {
            let rest = scc.difference(atom).copied().collect();
            if let Some(found) = search(a, &rest, phi, fins, explored) {
                return Some(found);
            }
        }
    }
    None
}

/// Some reachable, strongly connected, accepted set of states.
pub fn accepting_scc(a: &Automaton) -> Option<BTreeSet<StateId>> {
    let universe = reachable(a);
    let phi = formula(a.accepting(), false, &universe);
    let mut fins = Vec::new();
    phi.fin_atoms(&mut fins);
    search(a, &universe, &phi, &fins, &mut HashSet::new())
}

/// All reachable strongly connected sets accepted by `cond`, or `None` once
/// more than `limit` strongly connected sets have been examined.
pub fn accepted_inf_sets(
    a: &Automaton,
    cond: &AcceptingCondition,
    limit: usize,
) -> Option<BTreeSet<BTreeSet<StateId>>> {
    fn walk(
        a: &Automaton,
        within: &BTreeSet<StateId>,
        cond: &AcceptingCondition,
        seen: &mut HashSet<BTreeSet<StateId>>,
        out: &mut BTreeSet<BTreeSet<StateId>>,
        limit: usize,
    ) -> bool {
        for scc in nontrivial_sccs(a, within) {
            if !seen.insert(scc.clone()) {
                continue;
            }
            if seen.len() > limit {
                return false;
            }
            if cond.accepts(&scc) {
                out.insert(scc.clone());
            }
            for q in &scc {
                let mut rest = scc.clone();
                rest.remove(q);
                if !walk(a, &rest, cond, seen, out, limit) {
                    return false;
                }
            }
        }
        true
    }
    let mut out = BTreeSet::new();
    walk(a, &reachable(a), cond, &mut HashSet::new(), &mut out, limit).then_some(out)
}

/// Shortest transition path from `from` to `to` using only states of `within`.
fn shortest_path(
    a: &Automaton,
    from: StateId,
    to: &dyn Fn(StateId) -> bool,
    within: Option<&BTreeSet<StateId>>,
) -> Option<Vec<usize>> {
    let mut parent: BTreeMap<StateId, Option<usize>> = BTreeMap::from([(from, None)]);
    let mut queue = VecDeque::from([from]);
    let mut end = None;
    while let Some(q) = queue.pop_front() {
        if to(q) {
            end = Some(q);
            break;
        }
        for i in a.outgoing(q) {
            let t = &a.transitions()[i];
            if within.is_some_and(|w| !w.contains(&t.target)) {
                continue;
            }
            if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(t.target) {
                e.insert(Some(i));
                queue.push_back(t.target);
            }
        }
    }
    let mut q = end?;
    let mut path = Vec::new();
    while let Some(i) = parent[&q] {
        path.push(i);
        q = a.transitions()[i].source;
    }
    path.reverse();
    Some(path)
}

/// Closed walk from `start` inside `set` that visits every state of `set`.
pub fn covering_cycle(a: &Automaton, set: &BTreeSet<StateId>, start: StateId) -> Vec<usize> {
    let mut cycle = Vec::new();
    let mut at = start;
    for &q in set.iter().filter(|&&q| q != start) {
        let part = shortest_path(a, at, &|s| s == q, Some(set)).expect("set is strongly connected");
        cycle.extend(part);
        at = q;
    }
    if cycle.is_empty() {
        let self_loop = a
            .outgoing(start)
            .find(|&i| a.transitions()[i].target == start)
            .expect("singleton strongly connected set has a self-loop");
        cycle.push(self_loop);
    } else {
        cycle.extend(
            shortest_path(a, at, &|s| s == start, Some(set)).expect("set is strongly connected"),
        );
    }
    cycle
}

pub fn witness_loop(a: &Automaton, set: BTreeSet<StateId>) -> WitnessLoop {
    let access =
        shortest_path(a, a.initial(), &|q| set.contains(&q), None).expect("set is reachable");
    let start = access
        .last()
        .map(|&i| a.transitions()[i].target)
        .unwrap_or(a.initial());
    let cycle = covering_cycle(a, &set, start);
    WitnessLoop { set, access, cycle }
}

pub fn is_empty(a: &Automaton) -> Emptiness {
    match accepting_scc(a) {
        None => Emptiness::Empty,
        Some(set) => Emptiness::NonEmpty(witness_loop(a, set)),
    }
}

/// A concrete accepted ultimately periodic word, if the language is nonempty.
pub fn witness(a: &Automaton) -> Option<UpWord> {
    let Emptiness::NonEmpty(wl) = is_empty(a) else {
        return None;
    };
    Some(realize_witness(a, &wl))
}

pub fn realize_witness(a: &Automaton, wl: &WitnessLoop) -> UpWord {
    let mut fresh = FreshNames::new(a.initial_assignment().values().cloned());
    let mut c = Configuration::initial(a);
    let mut u = Vec::new();
    for &i in &wl.access {
        let t = &a.transitions()[i];
        let name = match &t.label {
            Label::Reg(r) => c.assignment[r].clone(),
            Label::Star => fresh.fresh(),
        };
        c = Configuration::new(t.target, apply_history(&c.assignment, &t.history, &name));
        u.push(name);
    }
    let lp = Loop::from_automaton(a, &wl.cycle).expect("witness cycle is a loop");
    let v = realize_loop(&lp, &c.assignment, &mut fresh).expect("loop realization succeeds");
    UpWord::new(u, v).expect("loops are nonempty")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// A word accepted by exactly one of the two automata.
    NotEquivalent(UpWord),
}

pub fn equivalent(a1: &Automaton, a2: &Automaton) -> Equivalence {
    match witness(&symmetric_difference(a1, a2)) {
        None => Equivalence::Equivalent,
        Some(w) => Equivalence::NotEquivalent(w),
    }
}

/// `Ok(())` when every word of `a1` is accepted by `a2`, otherwise a word
/// accepted by `a1` and rejected by `a2`.
pub fn included(a1: &Automaton, a2: &Automaton) -> Result<(), UpWord> {
    match witness(&intersect(a1, &complement(a2))) {
        None => Ok(()),
        Some(w) => Err(w),
    }
}
