//! The configuration graph: deterministic stepping, finite runs and
//! membership of ultimately periodic words.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::automaton::{Assignment, Automaton, History, Label, Source, StateId};
use crate::name::Name;

/// A state together with an injective assignment of names to its registers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: StateId,
    pub assignment: Assignment,
}

impl Configuration {
    pub fn new(state: StateId, assignment: Assignment) -> Self {
        Self { state, assignment }
    }

    pub fn initial(a: &Automaton) -> Self {
        Self::new(a.initial(), a.initial_assignment().clone())
    }

    pub fn image(&self) -> BTreeSet<&Name> {
        self.assignment.values().collect()
    }

    pub fn holds(&self, name: &Name) -> bool {
        self.assignment.values().any(|n| n == name)
    }

    pub fn display<'a>(&'a self, a: &'a Automaton) -> impl fmt::Display + 'a {
        DisplayConfig { config: self, a }
    }
}

struct DisplayConfig<'a> {
    config: &'a Configuration,
    a: &'a Automaton,
}

impl fmt::Display for DisplayConfig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{", self.a.state_name(self.config.state))?;
        for (i, (r, n)) in self.config.assignment.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}={n}")?;
        }
        f.write_str("}")
    }
}

/// Target assignment `ρ∘σ`, with the fresh register (if any) set to `consumed`.
///
/// `consumed` must be provided whenever the history stores a fresh name.
pub fn apply_history(assignment: &Assignment, history: &History, consumed: &Name) -> Assignment {
    history
        .iter()
        .map(|(target, source)| {
            let value = match source {
                Source::Reg(r) => assignment[r].clone(),
                Source::Fresh => consumed.clone(),
            };
            (target.clone(), value)
        })
        .collect()
}

/// Index of the transition taken from `c` on `name`.
pub fn transition_taken(a: &Automaton, c: &Configuration, name: &Name) -> usize {
    let held = c.assignment.iter().find(|(_, n)| *n == name);
    match held {
        Some((r, _)) => a
            .register_index(c.state, r)
            .expect("validated automaton has a transition for every register"),
        None => a.star_index(c.state),
    }
}

/// The unique successor of `c` on `name`.
pub fn step(a: &Automaton, c: &Configuration, name: &Name) -> Configuration {
    let t = &a.transitions()[transition_taken(a, c, name)];
    Configuration::new(t.target, apply_history(&c.assignment, &t.history, name))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub final_config: Configuration,
    /// States traversed, including the start and end states.
    pub visited: Vec<StateId>,
}

pub fn run_prefix(a: &Automaton, start: &Configuration, word: &[Name]) -> RunRecord {
    let mut visited = Vec::with_capacity(word.len() + 1);
    visited.push(start.state);
    let mut current = start.clone();
    for name in word {
        current = step(a, &current, name);
        visited.push(current.state);
    }
    RunRecord {
        final_config: current,
        visited,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("the periodic part of an ultimately periodic word must be nonempty")]
    EmptyPeriod,
    #[error("permutation is not a bijection on its domain: {0}")]
    NotAPermutation(String),
}

/// The infinite word `u·v^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UpWord {
    u: Vec<Name>,
    v: Vec<Name>,
}

impl UpWord {
    pub fn new(u: Vec<Name>, v: Vec<Name>) -> Result<Self, WordError> {
        if v.is_empty() {
            return Err(WordError::EmptyPeriod);
        }
        Ok(Self { u, v })
    }

    pub fn prefix(&self) -> &[Name] {
        &self.u
    }

    pub fn period(&self) -> &[Name] {
        &self.v
    }

    pub fn names(&self) -> BTreeSet<&Name> {
        self.u.iter().chain(&self.v).collect()
    }

    /// The `i`-th letter of the infinite word.
    pub fn letter(&self, i: usize) -> &Name {
        if i < self.u.len() {
            &self.u[i]
        } else {
            &self.v[(i - self.u.len()) % self.v.len()]
        }
    }
}

impl fmt::Display for UpWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |w: &[Name]| w.iter().map(Name::as_str).collect::<Vec<_>>().join(" ");
        if self.u.is_empty() {
            write!(f, "; {}", join(&self.v))
        } else {
            write!(f, "{} ; {}", join(&self.u), join(&self.v))
        }
    }
}

/// A finite permutation of names, the identity outside its domain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Permutation(BTreeMap<Name, Name>);

impl Permutation {
    pub fn new<I: IntoIterator<Item = (Name, Name)>>(pairs: I) -> Result<Self, WordError> {
        let mut map = BTreeMap::new();
        for (from, to) in pairs {
            if let Some(prev) = map.insert(from.clone(), to.clone()) {
                if prev != to {
                    return Err(WordError::NotAPermutation(format!("{from} mapped twice")));
                }
            }
        }
        let domain: BTreeSet<&Name> = map.keys().collect();
        let image: BTreeSet<&Name> = map.values().collect();
        if image.len() != map.len() {
            return Err(WordError::NotAPermutation(
                "two names share an image".into(),
            ));
        }
        if domain != image {
            return Err(WordError::NotAPermutation(
                "image differs from domain, so the extension by identity is not injective".into(),
            ));
        }
        Ok(Self(map))
    }

    pub fn swap(a: Name, b: Name) -> Self {
        Self(BTreeMap::from([(a.clone(), b.clone()), (b, a)]))
    }

    pub fn apply(&self, name: &Name) -> Name {
        self.0.get(name).unwrap_or(name).clone()
    }

    pub fn moves(&self, name: &Name) -> bool {
        self.0.get(name).is_some_and(|n| n != name)
    }
}

pub fn permute_word(w: &UpWord, pi: &Permutation) -> UpWord {
    UpWord {
        u: w.u.iter().map(|n| pi.apply(n)).collect(),
        v: w.v.iter().map(|n| pi.apply(n)).collect(),
    }
}

/// Verdict on an ultimately periodic word together with the Inf set of its run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub accepted: bool,
    pub inf: BTreeSet<StateId>,
}

/// Upper bound on the number of distinct configurations whose names come
/// from a pool of `pool` names.
fn configuration_bound(a: &Automaton, pool: usize) -> usize {
    a.states()
        .iter()
        .map(|s| {
            let k = s.registers.len();
            if k > pool {
                0
            } else {
                (pool - k + 1..=pool).fold(1usize, |acc, x| acc.saturating_mul(x))
            }
        })
        .fold(0usize, |acc, x| acc.saturating_add(x))
}

/// Decides acceptance of `u·v^ω`.
///
/// The run is sampled at the end of every copy of `v`. Reachable assignments
/// only use names of the initial assignment and of the word, so the sampled
/// configurations eventually repeat; the states seen between the two
/// occurrences are exactly the states visited infinitely often.
pub fn up_member(a: &Automaton, w: &UpWord) -> Membership {
    let mut pool: BTreeSet<&Name> = a.initial_assignment().values().collect();
    pool.extend(w.names());
    let bound = configuration_bound(a, pool.len());

    let mut current = run_prefix(a, &Configuration::initial(a), &w.u).final_config;
    let mut seen: HashMap<Configuration, usize> = HashMap::new();
    let mut blocks: Vec<BTreeSet<StateId>> = Vec::new();
    loop {
        if let Some(&first) = seen.get(&current) {
            let inf: BTreeSet<StateId> = blocks[first..].iter().flatten().copied().collect();
            return Membership {
                accepted: a.accepting().accepts(&inf),
                inf,
            };
        }
        assert!(
            blocks.len() <= bound,
            "no repeated configuration within {bound} blocks"
        );
        seen.insert(current.clone(), blocks.len());
        let mut states = BTreeSet::new();
        for name in &w.v {
            current = step(a, &current, name);
            states.insert(current.state);
        }
        blocks.push(states);
    }
}

/// Label a configuration uses to consume `name`.
pub fn label_for(c: &Configuration, name: &Name) -> Label {
    c.assignment
        .iter()
        .find(|(_, n)| *n == name)
        .map(|(r, _)| Label::Reg(r.clone()))
        .unwrap_or(Label::Star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{SESSION, SWAP};
    use crate::format::load_automaton;

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }

    fn word(s: &str) -> Vec<Name> {
        s.split_whitespace().map(n).collect()
    }

    fn cfg(a: &Automaton, state: &str, pairs: &[(&str, &str)]) -> Configuration {
        Configuration::new(
            a.state_id(state).unwrap(),
            pairs
                .iter()
                .map(|(r, v)| (crate::name::RegisterId::new(r).unwrap(), n(v)))
                .collect(),
        )
    }

    #[test]
    fn session_steps() {
        let a = load_automaton(SESSION).unwrap();
        let c0 = Configuration::initial(&a);
        let c1 = step(&a, &c0, &n("a"));
        assert_eq!(c1, cfg(&a, "q1", &[("x", "a")]));
        assert_eq!(step(&a, &c1, &n("b")), c1);
        assert_eq!(step(&a, &c1, &n("a")), c0);
    }

    #[test]
    fn swap_step_on_register() {
        let a = load_automaton(SWAP).unwrap();
        let c0 = Configuration::initial(&a);
        assert_eq!(
            step(&a, &c0, &n("c")),
            cfg(&a, "q1", &[("x1", "b"), ("y1", "a"), ("z1", "c")])
        );
    }

    #[test]
    fn swap_runs() {
        let a = load_automaton(SWAP).unwrap();
        let c0 = Configuration::initial(&a);
        let run = run_prefix(&a, &c0, &word("c d b"));
        assert_eq!(
            run.final_config,
            cfg(&a, "q0", &[("x0", "b"), ("y0", "a"), ("z0", "d")])
        );
        assert_eq!(run.visited, vec![0, 1, 2, 0]);
        let run = run_prefix(&a, &c0, &word("c d b d c a"));
        assert_eq!(run.final_config, c0);
        let empty = run_prefix(&a, &c0, &[]);
        assert_eq!(empty.final_config, c0);
        assert_eq!(empty.visited, vec![c0.state]);
    }

    #[test]
    fn session_membership() {
        let a = load_automaton(SESSION).unwrap();
        let m = up_member(&a, &UpWord::new(vec![], word("a a")).unwrap());
        assert!(m.accepted);
        assert_eq!(m.inf, BTreeSet::from([0, 1]));
        let m = up_member(&a, &UpWord::new(word("a"), word("b")).unwrap());
        assert!(!m.accepted);
        assert_eq!(m.inf, BTreeSet::from([1]));
    }

    #[test]
    fn permutations() {
        let w = UpWord::new(vec![], word("a a")).unwrap();
        let swapped = permute_word(&w, &Permutation::swap(n("a"), n("b")));
        assert_eq!(swapped.period(), &word("b b")[..]);
        let w = UpWord::new(word("a"), word("b c")).unwrap();
        assert_eq!(permute_word(&w, &Permutation::default()), w);
        let p = Permutation::swap(n("b"), n("c"));
        assert_eq!(
            permute_word(&w, &p),
            UpWord::new(word("a"), word("c b")).unwrap()
        );
        assert!(Permutation::new([(n("a"), n("b"))]).is_err());
        assert!(Permutation::new([(n("a"), n("b")), (n("c"), n("b"))]).is_err());
    }

    #[test]
    fn empty_period_rejected() {
        assert_eq!(UpWord::new(word("a"), vec![]), Err(WordError::EmptyPeriod));
    }

    #[test]
    fn word_display() {
        assert_eq!(
            UpWord::new(vec![], word("a a")).unwrap().to_string(),
            "; a a"
        );
        assert_eq!(
            UpWord::new(word("a"), word("b")).unwrap().to_string(),
            "a ; b"
        );
    }
}
