//! The automaton data model: states with local registers, deterministic
//! transitions carrying histories, an initial configuration and a Muller
//! accepting condition.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::name::{Name, RegisterId};

/// Index of a state inside its [`Automaton`].
pub type StateId = usize;

/// Injective map from registers to names.
pub type Assignment = BTreeMap<RegisterId, Name>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Reg(RegisterId),
    Star,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Reg(r) => write!(f, "{r}"),
            Label::Star => f.write_str("*"),
        }
    }
}

/// Where a target register takes its value from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Reg(RegisterId),
    /// The name consumed by a `*` transition.
    Fresh,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Reg(r) => write!(f, "{r}"),
            Source::Fresh => f.write_str("*"),
        }
    }
}

/// A history: for every register of the target state, the source register
/// (or the fresh marker) its value is taken from.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct History(BTreeMap<RegisterId, Source>);

impl History {
    pub fn new(map: BTreeMap<RegisterId, Source>) -> Self {
        Self(map)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn get(&self, target: &RegisterId) -> Option<&Source> {
        self.0.get(target)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RegisterId, &Source)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The target register receiving the fresh name, if any.
    pub fn fresh_target(&self) -> Option<&RegisterId> {
        self.0
            .iter()
            .find(|(_, s)| **s == Source::Fresh)
            .map(|(t, _)| t)
    }

    /// The target register whose value comes from `source`, if any.
    pub fn preimage(&self, source: &RegisterId) -> Option<&RegisterId> {
        self.0
            .iter()
            .find(|(_, s)| matches!(s, Source::Reg(r) if r == source))
            .map(|(t, _)| t)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.values().all(|s| seen.insert(s))
    }

    pub fn domain(&self) -> impl Iterator<Item = &RegisterId> {
        self.0.keys()
    }
}

impl FromIterator<(RegisterId, Source)> for History {
    fn from_iter<I: IntoIterator<Item = (RegisterId, Source)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: StateId,
    pub label: Label,
    pub target: StateId,
    pub history: History,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub registers: Vec<RegisterId>,
}

impl State {
    pub fn has_register(&self, r: &RegisterId) -> bool {
        self.registers.contains(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
    Xor,
}

impl BoolOp {
    pub fn apply(self, left: bool, right: bool) -> bool {
        match self {
            BoolOp::And => left && right,
            BoolOp::Or => left || right,
            BoolOp::Xor => left != right,
        }
    }
}

/// A Muller accepting condition, used only through its membership predicate.
#[derive(Debug, Clone, PartialEq)]
pub enum AcceptingCondition {
    /// The listed state sets are accepting.
    Explicit(BTreeSet<BTreeSet<StateId>>),
    /// Accepts exactly the sets the inner condition rejects.
    Negated(Box<AcceptingCondition>),
    /// A condition over product states that combines the factor conditions
    /// on the projections of a set.
    Projected(Arc<ProjectedCondition>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedCondition {
    pub op: BoolOp,
    pub left: AcceptingCondition,
    pub right: AcceptingCondition,
    /// `components[s]` is the pair of factor states of product state `s`.
    pub components: Vec<(StateId, StateId)>,
}

impl AcceptingCondition {
    /// The condition accepting every nonempty set.
    pub fn always() -> Self {
        AcceptingCondition::Negated(Box::new(AcceptingCondition::Explicit(BTreeSet::new())))
    }

    pub fn negate(self) -> Self {
        AcceptingCondition::Negated(Box::new(self))
    }

    pub fn accepts(&self, set: &BTreeSet<StateId>) -> bool {
        match self {
            AcceptingCondition::Explicit(sets) => sets.contains(set),
            AcceptingCondition::Negated(inner) => !inner.accepts(set),
            AcceptingCondition::Projected(p) => {
                let (left, right) = p.project(set);
                p.op.apply(p.left.accepts(&left), p.right.accepts(&right))
            }
        }
    }

    fn max_state(&self) -> Option<StateId> {
        match self {
            AcceptingCondition::Explicit(sets) => sets.iter().flatten().copied().max(),
            AcceptingCondition::Negated(inner) => inner.max_state(),
            AcceptingCondition::Projected(p) => p.components.len().checked_sub(1),
        }
    }
}

impl ProjectedCondition {
    pub fn project(&self, set: &BTreeSet<StateId>) -> (BTreeSet<StateId>, BTreeSet<StateId>) {
        set.iter().map(|&s| self.components[s]).unzip()
    }
}

/// A structural constraint that a description or automaton breaks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("missing transition for label {label} at {state}")]
    MissingTransition { state: String, label: String },
    #[error("duplicate transition for label {label} at {state}")]
    DuplicateTransition { state: String, label: String },
    #[error("transition {transition}: label {label} is not a register of {state}")]
    UnknownLabel {
        transition: String,
        state: String,
        label: String,
    },
    #[error("transition {transition}: history is not injective (source {value} used twice)")]
    NonInjectiveHistory { transition: String, value: String },
    #[error(
        "transition {transition}: register-labelled transition stores a fresh name into {register}"
    )]
    FreshOnRegisterLabel {
        transition: String,
        register: String,
    },
    #[error("transition {transition}: {detail}")]
    HistoryDomain { transition: String, detail: String },
    #[error("transition {transition}: history source {register} is not a register of {state}")]
    UnknownHistorySource {
        transition: String,
        state: String,
        register: String,
    },
    #[error("{context}: unknown state {state}")]
    DanglingState { context: String, state: String },
    #[error("state {state} declared more than once")]
    DuplicateState { state: String },
    #[error("state {state}: register {register} declared more than once")]
    DuplicateRegister { state: String, register: String },
    #[error("initial assignment: {detail}")]
    InitialDomain { detail: String },
    #[error("initial assignment is not injective: name {name} assigned twice")]
    NonInjectiveInitial { name: String },
    #[error("{context}: {error}")]
    InvalidToken {
        context: String,
        error: crate::name::InvalidToken,
    },
}

impl Violation {
    /// The name of the broken invariant.
    pub fn invariant(&self) -> &'static str {
        match self {
            Violation::MissingTransition { .. } | Violation::DuplicateTransition { .. } => {
                "determinism"
            }
            Violation::UnknownLabel { .. } => "label-in-source-registers",
            Violation::NonInjectiveHistory { .. } => "history-injective",
            Violation::FreshOnRegisterLabel { .. } => "fresh-only-on-star",
            Violation::HistoryDomain { .. } => "history-domain",
            Violation::UnknownHistorySource { .. } => "history-codomain",
            Violation::DanglingState { .. } => "state-exists",
            Violation::DuplicateState { .. } => "state-unique",
            Violation::DuplicateRegister { .. } => "register-unique",
            Violation::InitialDomain { .. } => "initial-domain",
            Violation::NonInjectiveInitial { .. } => "initial-injective",
            Violation::InvalidToken { .. } => "token-syntax",
        }
    }
}

/// Every violation found while validating one description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}] {v}", v.invariant())?;
        }
        Ok(())
    }
}

/// An automaton description as written in a file: everything is referenced by
/// token and nothing has been checked yet.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AutomatonDesc {
    pub name: String,
    pub states: Vec<StateDesc>,
    pub init: InitDesc,
    pub accept: AcceptDesc,
    pub transitions: Vec<TransitionDesc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateDesc {
    pub name: String,
    pub registers: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InitDesc {
    pub state: String,
    pub assignment: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcceptDesc {
    pub negated: bool,
    pub sets: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionDesc {
    pub source: String,
    /// `None` is the `*` label.
    pub label: Option<String>,
    pub target: String,
    /// Target register to source register; `None` is `*`.
    pub history: Vec<(String, Option<String>)>,
}

impl TransitionDesc {
    fn describe(&self) -> String {
        format!(
            "{} -{}-> {}",
            self.source,
            self.label.as_deref().unwrap_or("*"),
            self.target
        )
    }
}

/// A validated history-dependent deterministic Muller automaton.
#[derive(Debug, Clone)]
pub struct Automaton {
    name: String,
    states: Vec<State>,
    initial: StateId,
    initial_assignment: Assignment,
    transitions: Vec<Transition>,
    star_out: Vec<usize>,
    reg_out: Vec<BTreeMap<RegisterId, usize>>,
    accepting: AcceptingCondition,
}

impl Automaton {
    /// Builds an automaton from index-level parts, checking every structural
    /// invariant.
    pub fn from_parts(
        name: impl Into<String>,
        states: Vec<State>,
        initial: StateId,
        initial_assignment: Assignment,
        transitions: Vec<Transition>,
        accepting: AcceptingCondition,
    ) -> Result<Self, Violations> {
        let violations = structural_violations(
            &states,
            initial,
            &initial_assignment,
            &transitions,
            &accepting,
        );
        if !violations.is_empty() {
            return Err(Violations(violations));
        }
        let mut star_out = vec![usize::MAX; states.len()];
        let mut reg_out = vec![BTreeMap::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            match &t.label {
                Label::Star => star_out[t.source] = i,
                Label::Reg(r) => {
                    reg_out[t.source].insert(r.clone(), i);
                }
            }
        }
        Ok(Self {
            name: name.into(),
            states,
            initial,
            initial_assignment,
            transitions,
            star_out,
            reg_out,
            accepting,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id]
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id].name
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn initial_assignment(&self) -> &Assignment {
        &self.initial_assignment
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn accepting(&self) -> &AcceptingCondition {
        &self.accepting
    }

    /// Index of the `*` transition leaving `q`.
    pub fn star_index(&self, q: StateId) -> usize {
        self.star_out[q]
    }

    /// Index of the transition leaving `q` with register label `r`.
    pub fn register_index(&self, q: StateId, r: &RegisterId) -> Option<usize> {
        self.reg_out[q].get(r).copied()
    }

    pub fn transition_index(&self, q: StateId, label: &Label) -> Option<usize> {
        match label {
            Label::Star => Some(self.star_out[q]),
            Label::Reg(r) => self.register_index(q, r),
        }
    }

    /// Indices of the transitions leaving `q`: every register label, then `*`.
    pub fn outgoing(&self, q: StateId) -> impl Iterator<Item = usize> + '_ {
        self.reg_out[q]
            .values()
            .copied()
            .chain(std::iter::once(self.star_out[q]))
    }

    pub fn with_accepting(&self, accepting: AcceptingCondition) -> Self {
        Self {
            accepting,
            ..self.clone()
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn describe_transition(&self, t: &Transition) -> String {
        format!(
            "{} -{}-> {}",
            self.state_name(t.source),
            t.label,
            self.state_name(t.target)
        )
    }

    pub fn max_registers(&self) -> usize {
        self.states
            .iter()
            .map(|s| s.registers.len())
            .max()
            .unwrap_or(0)
    }
}

fn structural_violations(
    states: &[State],
    initial: StateId,
    initial_assignment: &Assignment,
    transitions: &[Transition],
    accepting: &AcceptingCondition,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let state_name = |q: StateId| {
        states
            .get(q)
            .map(|s| s.name.clone())
            .unwrap_or_else(|| format!("#{q}"))
    };

    let mut names = BTreeSet::new();
    for s in states {
        if !names.insert(s.name.as_str()) {
            out.push(Violation::DuplicateState {
                state: s.name.clone(),
            });
        }
        let mut regs = BTreeSet::new();
        for r in &s.registers {
            if !regs.insert(r) {
                out.push(Violation::DuplicateRegister {
                    state: s.name.clone(),
                    register: r.to_string(),
                });
            }
        }
    }

    match states.get(initial) {
        None => out.push(Violation::DanglingState {
            context: "init".into(),
            state: state_name(initial),
        }),
        Some(q0) => {
            for r in &q0.registers {
                if !initial_assignment.contains_key(r) {
                    out.push(Violation::InitialDomain {
                        detail: format!("register {r} of {} is unassigned", q0.name),
                    });
                }
            }
            for r in initial_assignment.keys() {
                if !q0.has_register(r) {
                    out.push(Violation::InitialDomain {
                        detail: format!("{r} is not a register of {}", q0.name),
                    });
                }
            }
            let mut seen = BTreeSet::new();
            for n in initial_assignment.values() {
                if !seen.insert(n) {
                    out.push(Violation::NonInjectiveInitial {
                        name: n.to_string(),
                    });
                }
            }
        }
    }

    if let Some(max) = accepting.max_state() {
        if max >= states.len() {
            out.push(Violation::DanglingState {
                context: "accept".into(),
                state: state_name(max),
            });
        }
    }

    let mut labels: Vec<BTreeMap<Label, usize>> = vec![BTreeMap::new(); states.len()];
    for t in transitions {
        let (Some(src), Some(tgt)) = (states.get(t.source), states.get(t.target)) else {
            out.push(Violation::DanglingState {
                context: "transition".into(),
                state: if t.source >= states.len() {
                    state_name(t.source)
                } else {
                    state_name(t.target)
                },
            });
            continue;
        };
        let desc = format!("{} -{}-> {}", src.name, t.label, tgt.name);
        *labels[t.source].entry(t.label.clone()).or_default() += 1;
        if let Label::Reg(r) = &t.label {
            if !src.has_register(r) {
                out.push(Violation::UnknownLabel {
                    transition: desc.clone(),
                    state: src.name.clone(),
                    label: r.to_string(),
                });
            }
        }
        for r in &tgt.registers {
            if t.history.get(r).is_none() {
                out.push(Violation::HistoryDomain {
                    transition: desc.clone(),
                    detail: format!("target register {r} has no history entry"),
                });
            }
        }
        let mut used = BTreeSet::new();
        for (target_reg, source) in t.history.iter() {
            if !tgt.has_register(target_reg) {
                out.push(Violation::HistoryDomain {
                    transition: desc.clone(),
                    detail: format!("{target_reg} is not a register of {}", tgt.name),
                });
            }
            match source {
                Source::Reg(r) if !src.has_register(r) => {
                    out.push(Violation::UnknownHistorySource {
                        transition: desc.clone(),
                        state: src.name.clone(),
                        register: r.to_string(),
                    })
                }
                Source::Fresh if t.label != Label::Star => {
                    out.push(Violation::FreshOnRegisterLabel {
                        transition: desc.clone(),
                        register: target_reg.to_string(),
                    })
                }
                _ => {}
            }
            if !used.insert(source) {
                out.push(Violation::NonInjectiveHistory {
                    transition: desc.clone(),
                    value: source.to_string(),
                });
            }
        }
    }

    for (q, state) in states.iter().enumerate() {
        let expected = state
            .registers
            .iter()
            .cloned()
            .map(Label::Reg)
            .chain(std::iter::once(Label::Star));
        for label in expected {
            match labels[q].get(&label).copied().unwrap_or(0) {
                0 => out.push(Violation::MissingTransition {
                    state: state.name.clone(),
                    label: label.to_string(),
                }),
                1 => {}
                _ => out.push(Violation::DuplicateTransition {
                    state: state.name.clone(),
                    label: label.to_string(),
                }),
            }
        }
    }
    out
}

/// Checks a description against every structural invariant and builds the
/// automaton, or reports all violations found.
pub fn validate(desc: &AutomatonDesc) -> Result<Automaton, Violations> {
    let mut out = Vec::new();
    let mut index: HashMap<&str, StateId> = HashMap::new();
    let mut states = Vec::with_capacity(desc.states.len());
    for s in &desc.states {
        if index.contains_key(s.name.as_str()) {
            out.push(Violation::DuplicateState {
                state: s.name.clone(),
            });
            continue;
        }
        index.insert(&s.name, states.len());
        let mut registers = Vec::new();
        for r in &s.registers {
            match RegisterId::new(r) {
                Ok(r) => registers.push(r),
                Err(e) => out.push(Violation::InvalidToken {
                    context: format!("state {}", s.name),
                    error: e,
                }),
            }
        }
        states.push(State {
            name: s.name.clone(),
            registers,
        });
    }

    let lookup = |name: &str, context: &str, out: &mut Vec<Violation>| -> Option<StateId> {
        let found = index.get(name).copied();
        if found.is_none() {
            out.push(Violation::DanglingState {
                context: context.to_string(),
                state: name.to_string(),
            });
        }
        found
    };

    let initial = lookup(&desc.init.state, "init", &mut out);
    let mut initial_assignment = Assignment::new();
    for (r, n) in &desc.init.assignment {
        match (RegisterId::new(r), Name::new(n)) {
            (Ok(r), Ok(n)) => {
                if initial_assignment.insert(r.clone(), n).is_some() {
                    out.push(Violation::InitialDomain {
                        detail: format!("register {r} assigned twice"),
                    });
                }
            }
            (Err(e), _) | (_, Err(e)) => out.push(Violation::InvalidToken {
                context: "init".into(),
                error: e,
            }),
        }
    }

    let mut sets = BTreeSet::new();
    for set in &desc.accept.sets {
        let mut ids = BTreeSet::new();
        for s in set {
            if let Some(q) = lookup(s, "accept", &mut out) {
                ids.insert(q);
            }
        }
        sets.insert(ids);
    }
    let mut accepting = AcceptingCondition::Explicit(sets);
    if desc.accept.negated {
        accepting = accepting.negate();
    }

    let mut transitions = Vec::new();
    for t in &desc.transitions {
        let context = format!("transition {}", t.describe());
        let source = lookup(&t.source, &context, &mut out);
        let target = lookup(&t.target, &context, &mut out);
        let label = match &t.label {
            None => Some(Label::Star),
            Some(l) => match RegisterId::new(l) {
                Ok(r) => Some(Label::Reg(r)),
                Err(e) => {
                    out.push(Violation::InvalidToken { context, error: e });
                    None
                }
            },
        };
        let mut history = BTreeMap::new();
        let mut history_ok = true;
        for (tr, sr) in &t.history {
            let tr = RegisterId::new(tr);
            let sr = match sr {
                None => Ok(Source::Fresh),
                Some(s) => RegisterId::new(s).map(Source::Reg),
            };
            match (tr, sr) {
                (Ok(tr), Ok(sr)) => {
                    if history.insert(tr.clone(), sr).is_some() {
                        out.push(Violation::HistoryDomain {
                            transition: t.describe(),
                            detail: format!("target register {tr} mapped twice"),
                        });
                    }
                }
                (Err(e), _) | (_, Err(e)) => {
                    history_ok = false;
                    out.push(Violation::InvalidToken {
                        context: format!("transition {}", t.describe()),
                        error: e,
                    });
                }
            }
        }
        if let (Some(source), Some(target), Some(label), true) = (source, target, label, history_ok)
        {
            transitions.push(Transition {
                source,
                label,
                target,
                history: History(history),
            });
        }
    }

    let Some(initial) = initial else {
        return Err(Violations(out));
    };
    match Automaton::from_parts(
        desc.name.clone(),
        states,
        initial,
        initial_assignment,
        transitions,
        accepting,
    ) {
        Ok(a) if out.is_empty() => Ok(a),
        Ok(_) => Err(Violations(out)),
        Err(Violations(more)) => {
            out.extend(more);
            Err(Violations(out))
        }
    }
}

/// Adds a register-free sink state and sends every missing `(state, label)`
/// pair to it, then validates. Complete descriptions are left unchanged.
pub fn complete_with_sink(desc: &AutomatonDesc) -> Result<Automaton, Violations> {
    let mut sink = "sink".to_string();
    let mut k = 1;
    while desc.states.iter().any(|s| s.name == sink) {
        sink = format!("sink_{k}");
        k += 1;
    }

    let mut completed = desc.clone();
    let mut missing = Vec::new();
    for s in &desc.states {
        let labels = s
            .registers
            .iter()
            .map(|r| Some(r.clone()))
            .chain(std::iter::once(None));
        for label in labels {
            let present = desc
                .transitions
                .iter()
                .any(|t| t.source == s.name && t.label == label);
            if !present {
                missing.push(TransitionDesc {
                    source: s.name.clone(),
                    label,
                    target: sink.clone(),
                    history: Vec::new(),
                });
            }
        }
    }
    if !missing.is_empty() {
        completed.states.push(StateDesc {
            name: sink.clone(),
            registers: Vec::new(),
        });
        completed.transitions.extend(missing);
        completed.transitions.push(TransitionDesc {
            source: sink.clone(),
            label: None,
            target: sink,
            history: Vec::new(),
        });
    }
    validate(&completed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trans(
        source: &str,
        label: Option<&str>,
        target: &str,
        h: &[(&str, Option<&str>)],
    ) -> TransitionDesc {
        TransitionDesc {
            source: source.into(),
            label: label.map(Into::into),
            target: target.into(),
            history: h
                .iter()
                .map(|(t, s)| (t.to_string(), s.map(Into::into)))
                .collect(),
        }
    }

    fn state(name: &str, regs: &[&str]) -> StateDesc {
        StateDesc {
            name: name.into(),
            registers: regs.iter().map(|r| r.to_string()).collect(),
        }
    }

    fn session() -> AutomatonDesc {
        AutomatonDesc {
            name: "session".into(),
            states: vec![state("q0", &[]), state("q1", &["x"])],
            init: InitDesc {
                state: "q0".into(),
                assignment: vec![],
            },
            accept: AcceptDesc {
                negated: false,
                sets: vec![vec!["q0".into(), "q1".into()]],
            },
            transitions: vec![
                trans("q0", None, "q1", &[("x", None)]),
                trans("q1", None, "q1", &[("x", Some("x"))]),
                trans("q1", Some("x"), "q0", &[]),
            ],
        }
    }

    fn swap_partial() -> AutomatonDesc {
        AutomatonDesc {
            name: "swap".into(),
            states: vec![
                state("q0", &["x0", "y0", "z0"]),
                state("q1", &["x1", "y1", "z1"]),
                state("q2", &["x2", "y2", "z2"]),
            ],
            init: InitDesc {
                state: "q0".into(),
                assignment: vec![
                    ("x0".into(), "a".into()),
                    ("y0".into(), "b".into()),
                    ("z0".into(), "c".into()),
                ],
            },
            accept: AcceptDesc::default(),
            transitions: vec![
                trans(
                    "q0",
                    Some("z0"),
                    "q1",
                    &[("x1", Some("y0")), ("y1", Some("x0")), ("z1", Some("z0"))],
                ),
                trans(
                    "q1",
                    None,
                    "q2",
                    &[("x2", Some("x1")), ("y2", Some("y1")), ("z2", None)],
                ),
                trans(
                    "q2",
                    Some("x2"),
                    "q0",
                    &[("x0", Some("x2")), ("y0", Some("y2")), ("z0", Some("z2"))],
                ),
            ],
        }
    }

    #[test]
    fn session_is_valid() {
        let a = validate(&session()).unwrap();
        for q in 0..a.num_states() {
            assert_eq!(a.outgoing(q).count(), a.state(q).registers.len() + 1);
        }
    }

    #[test]
    fn universal_is_valid() {
        let desc = AutomatonDesc {
            name: "all".into(),
            states: vec![state("q0", &[])],
            init: InitDesc {
                state: "q0".into(),
                assignment: vec![],
            },
            accept: AcceptDesc {
                negated: false,
                sets: vec![vec!["q0".into()]],
            },
            transitions: vec![trans("q0", None, "q0", &[])],
        };
        assert!(validate(&desc).is_ok());
    }

    #[test]
    fn missing_transition_is_reported() {
        let mut desc = session();
        desc.transitions.pop();
        let err = validate(&desc).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].to_string(), "missing transition for label x at q1");
        assert_eq!(err.0[0].invariant(), "determinism");
    }

    #[test]
    fn every_violation_is_collected() {
        let mut desc = session();
        // duplicate label, fresh on a register label, dangling target
        desc.transitions.push(trans("q1", Some("x"), "q0", &[]));
        desc.transitions.push(trans("q0", None, "nowhere", &[]));
        desc.transitions[2] = trans("q1", Some("x"), "q1", &[("x", None)]);
        desc.states.push(state("q2", &["u", "v"]));
        desc.transitions.push(trans(
            "q2",
            None,
            "q2",
            &[("u", Some("u")), ("v", Some("u"))],
        ));
        desc.transitions.push(trans(
            "q2",
            Some("u"),
            "q2",
            &[("u", Some("u")), ("v", Some("v"))],
        ));
        desc.transitions
            .push(trans("q2", Some("v"), "q2", &[("u", Some("u"))]));
        desc.init.assignment.push(("zz".into(), "a".into()));
        let err = validate(&desc).unwrap_err();
        let invariants: BTreeSet<_> = err.0.iter().map(|v| v.invariant()).collect();
        for expected in [
            "determinism",
            "fresh-only-on-star",
            "state-exists",
            "history-injective",
            "history-domain",
            "initial-domain",
        ] {
            assert!(invariants.contains(expected), "{expected} not in {err}");
        }
    }

    #[test]
    fn non_injective_initial_assignment() {
        let mut desc = swap_partial();
        desc.init.assignment[1].1 = "a".into();
        let err = complete_with_sink(&desc).unwrap_err();
        assert!(err.0.iter().any(|v| v.invariant() == "initial-injective"));
    }

    #[test]
    fn swap_completion_adds_sink() {
        let a = complete_with_sink(&swap_partial()).unwrap();
        assert_eq!(a.num_states(), 4);
        let sink = a.state_id("sink").unwrap();
        assert!(a.state(sink).registers.is_empty());
        for q in 0..a.num_states() {
            assert_eq!(a.outgoing(q).count(), a.state(q).registers.len() + 1);
        }
        assert!(!a.accepting().accepts(&BTreeSet::from([sink])));
    }

    #[test]
    fn complete_description_is_unchanged() {
        let a = complete_with_sink(&session()).unwrap();
        assert_eq!(a.num_states(), 2);
        assert_eq!(a.transitions().len(), 3);
    }

    #[test]
    fn completion_of_bare_register_state() {
        let desc = AutomatonDesc {
            name: "bare".into(),
            states: vec![state("q0", &["x"]), state("sink", &[])],
            init: InitDesc {
                state: "q0".into(),
                assignment: vec![("x".into(), "a".into())],
            },
            accept: AcceptDesc::default(),
            transitions: vec![trans("sink", None, "sink", &[])],
        };
        let a = complete_with_sink(&desc).unwrap();
        assert_eq!(a.num_states(), 3);
        let sink = a.state_id("sink_1").unwrap();
        assert_eq!(a.outgoing(0).count(), 2);
        assert!(a.outgoing(0).all(|i| a.transitions()[i].target == sink));
    }

    #[test]
    fn negated_condition_inverts() {
        let set = BTreeSet::from([0]);
        let explicit = AcceptingCondition::Explicit(BTreeSet::from([set.clone()]));
        assert!(explicit.accepts(&set));
        assert!(!explicit.clone().negate().accepts(&set));
        assert!(AcceptingCondition::always().accepts(&set));
    }
}
