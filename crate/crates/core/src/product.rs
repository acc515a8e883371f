//! Synchronized product of two automata.
//!
//! Product states are triples `(q1, q2, R)` where `R` pairs the registers of
//! `q1` and `q2` that hold the same name. Related registers are merged into a
//! single quotient register of the product state.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::automaton::{
    AcceptingCondition, Assignment, Automaton, History, Label, Source, State, StateId, Transition,
};
use crate::config::Configuration;
use crate::name::{Name, RegisterId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A partial bijection between the registers of a left and a right state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegRelation(BTreeSet<(RegisterId, RegisterId)>);

impl RegRelation {
    /// `None` when some register occurs in two pairs.
    pub fn new<I: IntoIterator<Item = (RegisterId, RegisterId)>>(pairs: I) -> Option<Self> {
        let rel = Self(pairs.into_iter().collect());
        rel.is_valid().then_some(rel)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_valid(&self) -> bool {
        let mut lefts = BTreeSet::new();
        let mut rights = BTreeSet::new();
        self.0
            .iter()
            .all(|(x, y)| lefts.insert(x) && rights.insert(y))
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(RegisterId, RegisterId)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &RegisterId, y: &RegisterId) -> bool {
        self.0.contains(&(x.clone(), y.clone()))
    }

    pub fn right_of(&self, x: &RegisterId) -> Option<&RegisterId> {
        self.0.iter().find(|(l, _)| l == x).map(|(_, r)| r)
    }

    pub fn left_of(&self, y: &RegisterId) -> Option<&RegisterId> {
        self.0.iter().find(|(_, r)| r == y).map(|(l, _)| l)
    }
}

/// An equivalence class of registers of a product state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuotientRegister {
    Left(RegisterId),
    Right(RegisterId),
    Both(RegisterId, RegisterId),
}

impl QuotientRegister {
    pub fn member(&self, side: Side) -> Option<&RegisterId> {
        match (self, side) {
            (QuotientRegister::Left(x), Side::Left)
            | (QuotientRegister::Both(x, _), Side::Left)
            | (QuotientRegister::Right(x), Side::Right)
            | (QuotientRegister::Both(_, x), Side::Right) => Some(x),
            _ => None,
        }
    }

    /// Register name used when the product is materialized as an automaton.
    pub fn canonical_name(&self) -> String {
        match self {
            QuotientRegister::Left(x) => format!("l_{x}"),
            QuotientRegister::Right(y) => format!("r_{y}"),
            QuotientRegister::Both(x, y) => format!("b_{x}_{y}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub left: StateId,
    pub right: StateId,
    pub rel: RegRelation,
}

impl ProductState {
    pub fn class_of(&self, side: Side, r: &RegisterId) -> QuotientRegister {
        match side {
            Side::Left => match self.rel.right_of(r) {
                Some(y) => QuotientRegister::Both(r.clone(), y.clone()),
                None => QuotientRegister::Left(r.clone()),
            },
            Side::Right => match self.rel.left_of(r) {
                Some(x) => QuotientRegister::Both(x.clone(), r.clone()),
                None => QuotientRegister::Right(r.clone()),
            },
        }
    }

    /// Quotient registers: left registers in declaration order, then the
    /// unrelated right registers.
    pub fn registers(&self, a1: &Automaton, a2: &Automaton) -> Vec<QuotientRegister> {
        let left = a1
            .state(self.left)
            .registers
            .iter()
            .map(|x| self.class_of(Side::Left, x));
        let right = a2
            .state(self.right)
            .registers
            .iter()
            .filter(|y| self.rel.left_of(y).is_none())
            .map(|y| QuotientRegister::Right(y.clone()));
        left.chain(right).collect()
    }

    fn has_register(&self, a1: &Automaton, a2: &Automaton, q: &QuotientRegister) -> bool {
        match q {
            QuotientRegister::Both(x, y) => self.rel.contains(x, y),
            QuotientRegister::Left(x) => {
                a1.state(self.left).has_register(x) && self.rel.right_of(x).is_none()
            }
            QuotientRegister::Right(y) => {
                a2.state(self.right).has_register(y) && self.rel.left_of(y).is_none()
            }
        }
    }
}

pub type QuotientAssignment = BTreeMap<QuotientRegister, Name>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProductLabel {
    Reg(QuotientRegister),
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuotientSource {
    Reg(QuotientRegister),
    Fresh,
}

pub type ProductHistory = BTreeMap<QuotientRegister, QuotientSource>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("{0:?} is not a register of the product state")]
    NotARegister(QuotientRegister),
}

/// Initial product state: registers assigned the same name initially are related.
pub fn initial_product_state(a1: &Automaton, a2: &Automaton) -> (ProductState, QuotientAssignment) {
    let rho1 = a1.initial_assignment();
    let rho2 = a2.initial_assignment();
    let rel = rho1
        .iter()
        .filter_map(|(x, n)| {
            rho2.iter()
                .find(|(_, m)| *m == n)
                .map(|(y, _)| (x.clone(), y.clone()))
        })
        .collect();
    let state = ProductState {
        left: a1.initial(),
        right: a2.initial(),
        rel: RegRelation(rel),
    };
    let mut assignment = QuotientAssignment::new();
    for (x, n) in rho1 {
        assignment.insert(state.class_of(Side::Left, x), n.clone());
    }
    for (y, n) in rho2 {
        assignment.insert(state.class_of(Side::Right, y), n.clone());
    }
    (state, assignment)
}

fn label_source(l: &Label) -> Source {
    match l {
        Label::Reg(r) => Source::Reg(r.clone()),
        Label::Star => Source::Fresh,
    }
}

/// The unique product transition from `s` with the given label.
pub fn product_transition(
    a1: &Automaton,
    a2: &Automaton,
    s: &ProductState,
    label: &ProductLabel,
) -> Result<(ProductState, ProductHistory), ProductError> {
    let (l1, l2) = match label {
        ProductLabel::Reg(q) => {
            if !s.has_register(a1, a2, q) {
                return Err(ProductError::NotARegister(q.clone()));
            }
            match q {
                QuotientRegister::Both(x, y) => (Label::Reg(x.clone()), Label::Reg(y.clone())),
                QuotientRegister::Left(x) => (Label::Reg(x.clone()), Label::Star),
                QuotientRegister::Right(y) => (Label::Star, Label::Reg(y.clone())),
            }
        }
        ProductLabel::Star => (Label::Star, Label::Star),
    };
    let t1 = &a1.transitions()[a1.transition_index(s.left, &l1).expect("deterministic")];
    let t2 = &a2.transitions()[a2.transition_index(s.right, &l2).expect("deterministic")];

    // S := σ2⁻¹ ∘ (R ∪ {(l1,l2)}) ∘ σ1
    let mut augmented: HashSet<(Source, Source)> = s
        .rel
        .pairs()
        .map(|(x, y)| (Source::Reg(x.clone()), Source::Reg(y.clone())))
        .collect();
    augmented.insert((label_source(&l1), label_source(&l2)));
    let mut rel = BTreeSet::new();
    for (x, sx) in t1.history.iter() {
        for (y, sy) in t2.history.iter() {
            if augmented.contains(&(sx.clone(), sy.clone())) {
                rel.insert((x.clone(), y.clone()));
            }
        }
    }
    let rel = RegRelation(rel);
    assert!(rel.is_valid(), "target relation is not a partial bijection");
    let target = ProductState {
        left: t1.target,
        right: t2.target,
        rel,
    };

    let allocating = matches!(label, ProductLabel::Star);
    let source_of = |side: Side, x: &RegisterId| -> QuotientSource {
        let (history, other_label) = match side {
            Side::Left => (&t1.history, &l2),
            Side::Right => (&t2.history, &l1),
        };
        match &history
            .get(x)
            .expect("history is total on target registers")
        {
            Source::Reg(r) => QuotientSource::Reg(s.class_of(side, r)),
            Source::Fresh if allocating => QuotientSource::Fresh,
            Source::Fresh => match other_label {
                Label::Reg(l) => QuotientSource::Reg(s.class_of(side.other(), l)),
                Label::Star => unreachable!("fresh name on both sides of a register-labelled step"),
            },
        }
    };

    let mut history = ProductHistory::new();
    for class in target.registers(a1, a2) {
        let value = match &class {
            QuotientRegister::Left(x) => source_of(Side::Left, x),
            QuotientRegister::Right(y) => source_of(Side::Right, y),
            QuotientRegister::Both(x, y) => {
                let v = source_of(Side::Left, x);
                debug_assert_eq!(
                    v,
                    source_of(Side::Right, y),
                    "history not well defined on {class:?}"
                );
                v
            }
        };
        history.insert(class, value);
    }
    Ok((target, history))
}

/// `i`-th projection of a product configuration.
pub fn project(
    a1: &Automaton,
    a2: &Automaton,
    s: &ProductState,
    rho: &QuotientAssignment,
    side: Side,
) -> Configuration {
    let (state, a) = match side {
        Side::Left => (s.left, a1),
        Side::Right => (s.right, a2),
    };
    let assignment = a
        .state(state)
        .registers
        .iter()
        .map(|x| (x.clone(), rho[&s.class_of(side, x)].clone()))
        .collect();
    Configuration::new(state, assignment)
}

/// The reachable part of the product, materialized as an automaton whose
/// accepting condition accepts every set.
#[derive(Debug, Clone)]
pub struct Product {
    pub states: Vec<ProductState>,
    /// Per product state: the automaton register naming each quotient register.
    pub registers: Vec<Vec<(RegisterId, QuotientRegister)>>,
    /// Product transitions over the automaton register names.
    pub transitions: Vec<Transition>,
    pub initial_assignment: Assignment,
    automaton: Automaton,
}

fn unique(preferred: String, taken: &mut HashSet<String>) -> String {
    let mut candidate = preferred.clone();
    let mut k = 1;
    while !taken.insert(candidate.clone()) {
        candidate = format!("{preferred}_{k}");
        k += 1;
    }
    candidate
}

/// Breadth-first closure of the product from its initial state.
pub fn build_product(a1: &Automaton, a2: &Automaton) -> Product {
    let (init, init_assignment) = initial_product_state(a1, a2);
    let mut index: HashMap<ProductState, StateId> = HashMap::from([(init.clone(), 0)]);
    let mut states = vec![init];
    let mut raw: Vec<(StateId, ProductLabel, StateId, ProductHistory)> = Vec::new();
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        let labels = s
            .registers(a1, a2)
            .into_iter()
            .map(ProductLabel::Reg)
            .chain(std::iter::once(ProductLabel::Star));
        for label in labels {
            let (target, history) =
                product_transition(a1, a2, &s, &label).expect("label taken from the state");
            let j = *index.entry(target.clone()).or_insert_with(|| {
                states.push(target);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            raw.push((i, label, j, history));
        }
    }

    let mut state_names = HashSet::new();
    let mut registers = Vec::with_capacity(states.len());
    let mut automaton_states = Vec::with_capacity(states.len());
    for s in &states {
        let name = unique(
            format!("{}_{}", a1.state_name(s.left), a2.state_name(s.right)),
            &mut state_names,
        );
        let mut taken = HashSet::new();
        let regs: Vec<(RegisterId, QuotientRegister)> = s
            .registers(a1, a2)
            .into_iter()
            .map(|q| {
                let id = RegisterId::new(unique(q.canonical_name(), &mut taken))
                    .expect("register tokens stay tokens");
                (id, q)
            })
            .collect();
        automaton_states.push(State {
            name,
            registers: regs.iter().map(|(r, _)| r.clone()).collect(),
        });
        registers.push(regs);
    }

    let reg_id = |state: StateId, q: &QuotientRegister| -> RegisterId {
        registers[state]
            .iter()
            .find(|(_, c)| c == q)
            .map(|(r, _)| r.clone())
            .expect("quotient register belongs to the state")
    };
    let transitions: Vec<Transition> = raw
        .into_iter()
        .map(|(i, label, j, history)| Transition {
            source: i,
            label: match &label {
                ProductLabel::Reg(q) => Label::Reg(reg_id(i, q)),
                ProductLabel::Star => Label::Star,
            },
            target: j,
            history: history
                .iter()
                .map(|(t, s)| {
                    let src = match s {
                        QuotientSource::Reg(q) => Source::Reg(reg_id(i, q)),
                        QuotientSource::Fresh => Source::Fresh,
                    };
                    (reg_id(j, t), src)
                })
                .collect::<History>(),
        })
        .collect();
    let initial_assignment: Assignment = init_assignment
        .iter()
        .map(|(q, n)| (reg_id(0, q), n.clone()))
        .collect();

    let automaton = Automaton::from_parts(
        format!("{}_x_{}", a1.name(), a2.name()),
        automaton_states,
        0,
        initial_assignment.clone(),
        transitions.clone(),
        AcceptingCondition::always(),
    )
    .unwrap_or_else(|v| panic!("product violates automaton invariants:\n{v}"));

    Product {
        states,
        registers,
        transitions,
        initial_assignment,
        automaton,
    }
}

impl Product {
    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn into_automaton(self) -> Automaton {
        self.automaton
    }

    pub fn components(&self) -> Vec<(StateId, StateId)> {
        self.states.iter().map(|s| (s.left, s.right)).collect()
    }

    pub fn index_of(&self, s: &ProductState) -> Option<StateId> {
        self.states.iter().position(|t| t == s)
    }

    pub fn quotient(&self, state: StateId, r: &RegisterId) -> Option<&QuotientRegister> {
        self.registers[state]
            .iter()
            .find(|(id, _)| id == r)
            .map(|(_, q)| q)
    }

    /// Projects a configuration of the materialized product automaton.
    pub fn project_config(
        &self,
        a1: &Automaton,
        a2: &Automaton,
        c: &Configuration,
        side: Side,
    ) -> Configuration {
        let rho: QuotientAssignment = c
            .assignment
            .iter()
            .map(|(r, n)| {
                (
                    self.quotient(c.state, r).expect("product register").clone(),
                    n.clone(),
                )
            })
            .collect();
        project(a1, a2, &self.states[c.state], &rho, side)
    }
}
