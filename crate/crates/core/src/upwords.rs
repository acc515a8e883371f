//! Loops of an automaton and the construction of finite words that drive a
//! loop back to its exact starting configuration.
//!
//! Along a loop `p0 -> p1 -> ... -> p0`, the registers of `p0` split into
//! survivors `I`, whose values are only permuted by a traversal, and the
//! transient registers `T`, whose values are eventually replaced by fresh
//! names. A return word first runs the loop long enough to forget every
//! transient value, then re-seeds the transient registers with their original
//! names, with a total number of traversals that is a multiple of the order
//! of the permutation on `I`.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use thiserror::Error;

use crate::automaton::{Assignment, Automaton, Label, Source, Transition};
use crate::config::apply_history;
use crate::name::{FreshNames, Name, RegisterId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopError {
    #[error("a loop needs at least one transition")]
    Empty,
    #[error("transition {at} does not start where the previous one ends")]
    Broken { at: usize },
    #[error("expected {expected} register lists, got {found}")]
    RegisterCount { expected: usize, found: usize },
    #[error("history of transition {at} does not fit the registers of its states")]
    History { at: usize },
    #[error("transition index {0} is out of range")]
    UnknownTransition(usize),
    #[error("assignment does not cover exactly the registers of the first state")]
    AssignmentDomain,
    #[error("assignment is not injective")]
    NotInjective,
    #[error("gamma {gamma} is below epsilon {epsilon}")]
    GammaTooSmall { gamma: usize, epsilon: usize },
    #[error("register {register} holds {name}, which must be re-initialized")]
    Precondition { register: RegisterId, name: Name },
    #[error("chain from register {0} exceeds its length bound")]
    ChainBound(RegisterId),
    #[error("word length {0} is not a multiple of the loop length")]
    WordLength(usize),
    #[error("symbol {position} does not follow the loop")]
    OffLoop { position: usize },
    #[error("construction did not reach the target assignment")]
    Postcondition,
}

/// A cycle of transitions `p0 -(l0,σ0)-> p1 -> ... -(l_{n-1},σ_{n-1})-> p0`
/// together with the registers of every `p_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loop {
    transitions: Vec<Transition>,
    registers: Vec<Vec<RegisterId>>,
}

impl Loop {
    pub fn new(
        transitions: Vec<Transition>,
        registers: Vec<Vec<RegisterId>>,
    ) -> Result<Self, LoopError> {
        let n = transitions.len();
        if n == 0 {
            return Err(LoopError::Empty);
        }
        if registers.len() != n {
            return Err(LoopError::RegisterCount {
                expected: n,
                found: registers.len(),
            });
        }
        for i in 0..n {
            let t = &transitions[i];
            let next = &transitions[(i + 1) % n];
            if t.target != next.source {
                return Err(LoopError::Broken { at: (i + 1) % n });
            }
            let here: BTreeSet<&RegisterId> = registers[i].iter().collect();
            let there: BTreeSet<&RegisterId> = registers[(i + 1) % n].iter().collect();
            let domain: BTreeSet<&RegisterId> = t.history.domain().collect();
            let sources_ok = t.history.iter().all(|(_, s)| match s {
                Source::Reg(r) => here.contains(r),
                Source::Fresh => t.label == Label::Star,
            });
            let label_ok = match &t.label {
                Label::Reg(r) => here.contains(r),
                Label::Star => true,
            };
            if domain != there || !sources_ok || !label_ok || !t.history.is_injective() {
                return Err(LoopError::History { at: i });
            }
        }
        Ok(Self {
            transitions,
            registers,
        })
    }

    /// The loop following the given transition indices of `a`.
    pub fn from_automaton(a: &Automaton, indices: &[usize]) -> Result<Self, LoopError> {
        let transitions = indices
            .iter()
            .map(|&i| {
                a.transitions()
                    .get(i)
                    .cloned()
                    .ok_or(LoopError::UnknownTransition(i))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let registers = transitions
            .iter()
            .map(|t| a.state(t.source).registers.clone())
            .collect();
        Self::new(transitions, registers)
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Registers of `p_i`.
    pub fn registers(&self, i: usize) -> &[RegisterId] {
        &self.registers[i % self.len()]
    }

    pub fn max_registers(&self) -> usize {
        self.registers.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn check_start(&self, start: &Assignment) -> Result<(), LoopError> {
        let domain: BTreeSet<&RegisterId> = start.keys().collect();
        if domain != self.registers[0].iter().collect() {
            return Err(LoopError::AssignmentDomain);
        }
        let image: BTreeSet<&Name> = start.values().collect();
        if image.len() != start.len() {
            return Err(LoopError::NotInjective);
        }
        Ok(())
    }

    /// Runs `word` along the loop from `start`, checking that every symbol
    /// selects the loop's transition, and returns the final assignment.
    pub fn follow(&self, start: &Assignment, word: &[Name]) -> Result<Assignment, LoopError> {
        self.check_start(start)?;
        if !word.len().is_multiple_of(self.len()) {
            return Err(LoopError::WordLength(word.len()));
        }
        let mut current = start.clone();
        for (position, name) in word.iter().enumerate() {
            let t = &self.transitions[position % self.len()];
            let ok = match &t.label {
                Label::Reg(r) => current.get(r) == Some(name),
                Label::Star => !current.values().any(|v| v == name),
            };
            if !ok {
                return Err(LoopError::OffLoop { position });
            }
            current = apply_history(&current, &t.history, name);
        }
        Ok(current)
    }
}

/// The composed register history of one traversal, as a partial map on the
/// registers of `p0`. The last transition is applied first.
pub fn sigma_hat(l: &Loop) -> BTreeMap<RegisterId, RegisterId> {
    l.registers(0)
        .iter()
        .filter_map(|x| {
            let mut cur = x.clone();
            for t in l.transitions.iter().rev() {
                match t.history.get(&cur)? {
                    Source::Reg(r) => cur = r.clone(),
                    Source::Fresh => return None,
                }
            }
            Some((x.clone(), cur))
        })
        .collect()
}

/// The survivors `I` and transient registers `T` of the loop.
pub fn survivors(l: &Loop) -> (BTreeSet<RegisterId>, BTreeSet<RegisterId>) {
    let sh = sigma_hat(l);
    let mut i: BTreeSet<RegisterId> = sh.keys().cloned().collect();
    loop {
        let image: BTreeSet<RegisterId> = i.iter().map(|x| sh[x].clone()).collect();
        let next: BTreeSet<RegisterId> = i
            .iter()
            .filter(|x| i.contains(&sh[*x]) && image.contains(*x))
            .cloned()
            .collect();
        if next == i {
            break;
        }
        i = next;
    }
    let t = l
        .registers(0)
        .iter()
        .filter(|x| !i.contains(*x))
        .cloned()
        .collect();
    (i, t)
}

/// Order of the permutation `sigma_hat` induces on the survivors.
pub fn theta(l: &Loop) -> usize {
    let sh = sigma_hat(l);
    let (i, _) = survivors(l);
    i.iter()
        .map(|x| {
            let mut len = 1;
            let mut cur = &sh[x];
            while cur != x {
                cur = &sh[cur];
                len += 1;
            }
            len
        })
        .fold(1, |acc, len| acc.lcm(&len))
}

fn chain_bound(l: &Loop) -> usize {
    l.len() * l.registers(0).len() + l.len()
}

/// Length of the chain `x_0 = x`, `x_{j+1} = σ_{j mod n}⁻¹(x_j)`, i.e. how many
/// registers successively carry the value `x` holds at the start.
pub fn chain_length(l: &Loop, x: &RegisterId) -> Result<usize, LoopError> {
    let n = l.len();
    let mut cur = x.clone();
    let mut len = 1;
    while let Some(next) = l.transitions[(len - 1) % n].history.preimage(&cur) {
        cur = next.clone();
        len += 1;
        if len > chain_bound(l) {
            return Err(LoopError::ChainBound(x.clone()));
        }
    }
    Ok(len)
}

/// For a transient register `x`, the position `i` of the `*` transition whose
/// fresh name ends up in `x` at the end of a traversal, and the number `j` of
/// traversals that name spends travelling.
pub fn seed_position(l: &Loop, x: &RegisterId) -> Result<(usize, usize), LoopError> {
    let n = l.len();
    let mut cur = x.clone();
    let mut idx = n - 1;
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > chain_bound(l) {
            return Err(LoopError::ChainBound(x.clone()));
        }
        match l.transitions[idx].history.get(&cur) {
            Some(Source::Fresh) => return Ok((idx, steps.div_ceil(n))),
            Some(Source::Reg(r)) => cur = r.clone(),
            None => return Err(LoopError::History { at: idx }),
        }
        idx = (idx + n - 1) % n;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopAnalysis {
    pub sigma_hat: BTreeMap<RegisterId, RegisterId>,
    pub survivors: BTreeSet<RegisterId>,
    pub transient: BTreeSet<RegisterId>,
    pub theta: usize,
    pub chain_lengths: BTreeMap<RegisterId, usize>,
    pub epsilon: usize,
    /// `(x, i, j)`: the name for `x` is consumed at position `i`, `j`
    /// traversals before the end.
    pub seeds: BTreeSet<(RegisterId, usize, usize)>,
    pub zeta: usize,
}

pub fn analyze(l: &Loop) -> Result<LoopAnalysis, LoopError> {
    let (survivors, transient) = survivors(l);
    let chain_lengths = transient
        .iter()
        .map(|x| Ok((x.clone(), chain_length(l, x)?)))
        .collect::<Result<BTreeMap<_, _>, LoopError>>()?;
    let big_j = chain_lengths.values().max().map_or(1, |m| m + 1);
    let seeds = transient
        .iter()
        .map(|x| {
            let (i, j) = seed_position(l, x)?;
            Ok((x.clone(), i, j))
        })
        .collect::<Result<BTreeSet<_>, LoopError>>()?;
    let zeta = seeds.iter().map(|(_, _, j)| *j).max().unwrap_or(1);
    Ok(LoopAnalysis {
        sigma_hat: sigma_hat(l),
        survivors,
        transient,
        theta: theta(l),
        chain_lengths,
        epsilon: big_j.div_ceil(l.len()),
        seeds,
        zeta,
    })
}

/// Runs the loop `gamma` times from `start`, feeding fresh names to every
/// `*` transition. Returns the word and the assignment reached.
pub fn forget_phase(
    l: &Loop,
    start: &Assignment,
    gamma: usize,
    fresh: &mut FreshNames,
) -> Result<(Vec<Name>, Assignment), LoopError> {
    l.check_start(start)?;
    let epsilon = analyze(l)?.epsilon;
    if gamma < epsilon {
        return Err(LoopError::GammaTooSmall { gamma, epsilon });
    }
    fresh.avoid_all(start.values());
    let mut current = start.clone();
    let mut word = Vec::with_capacity(gamma * l.len());
    for _ in 0..gamma {
        for t in &l.transitions {
            let name = match &t.label {
                Label::Reg(r) => current[r].clone(),
                Label::Star => fresh.fresh(),
            };
            current = apply_history(&current, &t.history, &name);
            word.push(name);
        }
    }
    Ok((word, current))
}

/// Runs the loop `zeta` times from `current`, emitting the target names of the
/// transient registers exactly where they will flow into those registers.
pub fn init_phase(
    l: &Loop,
    current: &Assignment,
    target: &Assignment,
    fresh: &mut FreshNames,
) -> Result<(Vec<Name>, Assignment), LoopError> {
    l.check_start(current)?;
    l.check_start(target)?;
    let analysis = analyze(l)?;
    let reserved: BTreeSet<&Name> = analysis.transient.iter().map(|x| &target[x]).collect();
    if let Some((register, name)) = current.iter().find(|(_, v)| reserved.contains(v)) {
        return Err(LoopError::Precondition {
            register: register.clone(),
            name: name.clone(),
        });
    }
    fresh.avoid_all(current.values());
    fresh.avoid_all(target.values());
    let zeta = analysis.zeta;
    let mut state = current.clone();
    let mut word = Vec::with_capacity(zeta * l.len());
    for k in 0..zeta {
        for (i, t) in l.transitions.iter().enumerate() {
            let seeded = analysis
                .seeds
                .iter()
                .find(|(_, si, sj)| *si == i && *sj == zeta - k);
            let name = match (&t.label, seeded) {
                (Label::Star, Some((x, _, _))) => target[x].clone(),
                (Label::Star, None) => fresh.fresh(),
                (Label::Reg(r), _) => state[r].clone(),
            };
            state = apply_history(&state, &t.history, &name);
            word.push(name);
        }
    }
    if analysis.transient.iter().any(|x| state[x] != target[x]) {
        return Err(LoopError::Postcondition);
    }
    Ok((word, state))
}

/// Smallest `gamma >= epsilon` such that `theta` divides `gamma + zeta`.
pub fn choose_gamma(analysis: &LoopAnalysis) -> usize {
    let mut gamma = analysis.epsilon;
    while !(gamma + analysis.zeta).is_multiple_of(analysis.theta) {
        gamma += 1;
    }
    gamma
}

/// A word that takes the loop from `(p0, target)` back to `(p0, target)`.
pub fn realize_loop(
    l: &Loop,
    target: &Assignment,
    fresh: &mut FreshNames,
) -> Result<Vec<Name>, LoopError> {
    l.check_start(target)?;
    let gamma = choose_gamma(&analyze(l)?);
    let (mut word, reached) = forget_phase(l, target, gamma, fresh)?;
    let (tail, end) = init_phase(l, &reached, target, fresh)?;
    if &end != target {
        return Err(LoopError::Postcondition);
    }
    word.extend(tail);
    Ok(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::History;
    use crate::fixtures;
    use crate::format::load_automaton;

    fn r(s: &str) -> RegisterId {
        RegisterId::new(s).unwrap()
    }

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    fn assign(pairs: &[(&str, &str)]) -> Assignment {
        pairs.iter().map(|(x, v)| (r(x), n(v))).collect()
    }

    fn words(s: &str) -> Vec<Name> {
        s.split_whitespace().map(n).collect()
    }

    fn swap_loop() -> (Automaton, Loop) {
        let a = load_automaton(fixtures::SWAP).unwrap();
        let q = |s| a.state_id(s).unwrap();
        let idx = vec![
            a.transition_index(q("q0"), &Label::Reg(r("z0"))).unwrap(),
            a.transition_index(q("q1"), &Label::Star).unwrap(),
            a.transition_index(q("q2"), &Label::Reg(r("x2"))).unwrap(),
        ];
        let l = Loop::from_automaton(&a, &idx).unwrap();
        (a, l)
    }

    fn history(pairs: &[(&str, Option<&str>)]) -> History {
        pairs
            .iter()
            .map(|(t, s)| (r(t), s.map_or(Source::Fresh, |s| Source::Reg(r(s)))))
            .collect()
    }

    fn single(regs: &[&str], label: Label, h: History) -> Loop {
        let t = Transition {
            source: 0,
            label,
            target: 0,
            history: h,
        };
        Loop::new(vec![t], vec![regs.iter().map(|x| r(x)).collect()]).unwrap()
    }

    fn fresh_for(target: &Assignment) -> FreshNames {
        FreshNames::new(target.values().cloned())
    }

    #[test]
    fn swap_analysis() {
        let (_, l) = swap_loop();
        let an = analyze(&l).unwrap();
        assert_eq!(
            an.sigma_hat,
            BTreeMap::from([(r("x0"), r("y0")), (r("y0"), r("x0"))])
        );
        assert_eq!(an.survivors, BTreeSet::from([r("x0"), r("y0")]));
        assert_eq!(an.transient, BTreeSet::from([r("z0")]));
        assert_eq!(an.theta, 2);
        assert_eq!(an.chain_lengths, BTreeMap::from([(r("z0"), 2)]));
        assert_eq!(an.epsilon, 1);
        assert_eq!(an.seeds, BTreeSet::from([(r("z0"), 1, 1)]));
        assert_eq!(an.zeta, 1);
    }

    #[test]
    fn swap_phases() {
        let (_, l) = swap_loop();
        let start = assign(&[("x0", "a"), ("y0", "b"), ("z0", "c")]);
        let mut fresh = fresh_for(&start);
        let (w, end) = forget_phase(&l, &start, 1, &mut fresh).unwrap();
        assert_eq!(w, words("c #0 b"));
        assert_eq!(end, assign(&[("x0", "b"), ("y0", "a"), ("z0", "#0")]));
        assert_eq!(l.follow(&start, &w).unwrap(), end);

        let mid = assign(&[("x0", "b"), ("y0", "a"), ("z0", "d")]);
        let mut fresh = FreshNames::new([]);
        let (w, end) = init_phase(&l, &mid, &start, &mut fresh).unwrap();
        assert_eq!(w, words("d c a"));
        assert_eq!(end, start);
    }

    #[test]
    fn swap_return_word() {
        let (_, l) = swap_loop();
        let start = assign(&[("x0", "a"), ("y0", "b"), ("z0", "c")]);
        let w = realize_loop(&l, &start, &mut fresh_for(&start)).unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(l.follow(&start, &w).unwrap(), start);
        // a hand-picked return word
        assert_eq!(l.follow(&start, &words("c d b d c a")).unwrap(), start);
    }

    #[test]
    fn init_rejects_reserved_values() {
        let (_, l) = swap_loop();
        let target = assign(&[("x0", "a"), ("y0", "b"), ("z0", "c")]);
        let bad = assign(&[("x0", "c"), ("y0", "a"), ("z0", "d")]);
        assert!(matches!(
            init_phase(&l, &bad, &target, &mut FreshNames::new([])),
            Err(LoopError::Precondition { .. })
        ));
    }

    #[test]
    fn register_free_loops() {
        let univ = load_automaton(fixtures::UNIVERSAL).unwrap();
        let l = Loop::from_automaton(&univ, &[0]).unwrap();
        let an = analyze(&l).unwrap();
        assert!(an.sigma_hat.is_empty() && an.survivors.is_empty() && an.transient.is_empty());
        assert_eq!((an.theta, an.epsilon, an.zeta), (1, 1, 1));
        let (w, _) = forget_phase(&l, &Assignment::new(), 3, &mut FreshNames::new([])).unwrap();
        assert_eq!(w, words("#0 #1 #2"));
        // both phases always run, so the word covers gamma + zeta traversals
        let w = realize_loop(&l, &Assignment::new(), &mut FreshNames::new([])).unwrap();
        assert_eq!(w, words("#0 #1"));

        let session = load_automaton(fixtures::SESSION).unwrap();
        let l = Loop::from_automaton(&session, &[0, 2]).unwrap();
        let an = analyze(&l).unwrap();
        assert!(an.sigma_hat.is_empty());
        assert_eq!((an.theta, an.epsilon, an.zeta), (1, 1, 1));
        let w = realize_loop(&l, &Assignment::new(), &mut FreshNames::new([])).unwrap();
        assert_eq!(w, words("#0 #0 #1 #1"));
        assert_eq!(l.follow(&Assignment::new(), &w).unwrap(), Assignment::new());
    }

    #[test]
    fn identity_history_survives() {
        let l = single(&["x"], Label::Star, history(&[("x", Some("x"))]));
        let (i, t) = survivors(&l);
        assert_eq!(i, BTreeSet::from([r("x")]));
        assert!(t.is_empty());
        assert_eq!(theta(&l), 1);
    }

    #[test]
    fn fresh_self_loop() {
        let l = single(&["x"], Label::Star, history(&[("x", None)]));
        let an = analyze(&l).unwrap();
        assert_eq!(an.transient, BTreeSet::from([r("x")]));
        assert_eq!(an.chain_lengths[&r("x")], 1);
        assert_eq!(an.epsilon, 2);
        assert_eq!(an.seeds, BTreeSet::from([(r("x"), 0, 1)]));
        assert_eq!(an.zeta, 1);
        let start = assign(&[("x", "a")]);
        let w = realize_loop(&l, &start, &mut fresh_for(&start)).unwrap();
        assert_eq!(w, words("#0 #1 a"));
        assert_eq!(l.follow(&start, &w).unwrap(), start);
    }

    #[test]
    fn three_cycle() {
        // three states rotating three registers one step per traversal
        let regs = vec![vec![r("a"), r("b"), r("c")]; 3];
        let rot = history(&[("a", Some("b")), ("b", Some("c")), ("c", Some("a"))]);
        let id = history(&[("a", Some("a")), ("b", Some("b")), ("c", Some("c"))]);
        let ts = vec![
            Transition {
                source: 0,
                label: Label::Reg(r("a")),
                target: 1,
                history: rot,
            },
            Transition {
                source: 1,
                label: Label::Reg(r("a")),
                target: 2,
                history: id.clone(),
            },
            Transition {
                source: 2,
                label: Label::Reg(r("a")),
                target: 0,
                history: id,
            },
        ];
        let l = Loop::new(ts, regs).unwrap();
        assert_eq!(theta(&l), 3);
        let start = assign(&[("a", "p"), ("b", "q"), ("c", "s")]);
        let mut cur = start.clone();
        for k in 1..=3 {
            let mut w = Vec::new();
            let mut st = cur.clone();
            for t in l.transitions() {
                let name = st[&r("a")].clone();
                st = apply_history(&st, &t.history, &name);
                w.push(name);
            }
            cur = l.follow(&cur, &w).unwrap();
            assert_eq!(cur == start, k == 3);
        }
        let w = realize_loop(&l, &start, &mut fresh_for(&start)).unwrap();
        assert_eq!(w.len(), 9);
        assert_eq!(l.follow(&start, &w).unwrap(), start);
    }

    #[test]
    fn gamma_below_epsilon_is_rejected() {
        let l = single(&["x"], Label::Star, history(&[("x", None)]));
        let start = assign(&[("x", "a")]);
        assert_eq!(
            forget_phase(&l, &start, 1, &mut FreshNames::new([])),
            Err(LoopError::GammaTooSmall {
                gamma: 1,
                epsilon: 2
            })
        );
    }

    #[test]
    fn broken_loops_are_rejected() {
        let a = load_automaton(fixtures::SESSION).unwrap();
        assert_eq!(Loop::from_automaton(&a, &[]), Err(LoopError::Empty));
        assert!(matches!(
            Loop::from_automaton(&a, &[0, 0]),
            Err(LoopError::Broken { .. })
        ));
        assert_eq!(
            Loop::from_automaton(&a, &[9]),
            Err(LoopError::UnknownTransition(9))
        );
    }
}
