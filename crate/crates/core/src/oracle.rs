//! Brute-force reference implementations used for differential testing.
//!
//! Nothing here calls into the stepping, product or loop code it checks:
//! transitions are looked up by scanning, histories are applied by hand and
//! searches are plain breadth-first enumerations.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::automaton::{Assignment, Automaton, Label, Source, StateId, Transition};
use crate::config::{Configuration, Membership, UpWord};
use crate::name::{FreshNames, Name, RegisterId};
use crate::product::{Product, Side};
use crate::upwords::Loop;

fn follow(assignment: &Assignment, t: &Transition, name: &Name) -> Option<Assignment> {
    let mut next = Assignment::new();
    for (target, source) in t.history.iter() {
        let value = match source {
            Source::Reg(r) => assignment.get(r)?.clone(),
            Source::Fresh => name.clone(),
        };
        next.insert(target.clone(), value);
    }
    Some(next)
}

/// One step of `a`, found by scanning its transition list.
pub fn oracle_step(a: &Automaton, c: &Configuration, name: &Name) -> Configuration {
    let holder = c
        .assignment
        .iter()
        .find(|(_, v)| *v == name)
        .map(|(r, _)| r);
    let t = a
        .transitions()
        .iter()
        .find(|t| {
            t.source == c.state
                && match (&t.label, holder) {
                    (Label::Reg(r), Some(h)) => r == h,
                    (Label::Star, None) => true,
                    _ => false,
                }
        })
        .expect("automaton is complete");
    let assignment = follow(&c.assignment, t, name).expect("history sources are registers");
    Configuration::new(t.target, assignment)
}

/// Membership of `u·v^ω` by detecting the first repeated
/// (configuration, position in v) pair.
pub fn oracle_up_member(a: &Automaton, w: &UpWord) -> Membership {
    let mut c = Configuration::new(a.initial(), a.initial_assignment().clone());
    for name in w.prefix() {
        c = oracle_step(a, &c, name);
    }
    let v = w.period();
    let mut seen: HashMap<(Configuration, usize), usize> = HashMap::new();
    let mut trace: Vec<StateId> = Vec::new();
    let mut pos = 0;
    loop {
        if let Some(&first) = seen.get(&(c.clone(), pos)) {
            let inf: BTreeSet<StateId> = trace[first..].iter().copied().collect();
            return Membership {
                accepted: a.accepting().accepts(&inf),
                inf,
            };
        }
        seen.insert((c.clone(), pos), trace.len());
        trace.push(c.state);
        c = oracle_step(a, &c, &v[pos]);
        pos = (pos + 1) % v.len();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeViolationKind {
    /// Projections of the initial configuration differ from a factor's.
    InitialMismatch(Side),
    NoTransition,
    AmbiguousTransition,
    UndefinedSource(RegisterId),
    /// A factor register has no product register holding its class.
    MissingRegister(Side, RegisterId),
    /// The projected successor differs from the factor's successor.
    ProjectionMismatch(Side),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeViolation {
    pub state: StateId,
    pub assignment: Assignment,
    pub name: Option<Name>,
    pub kind: EdgeViolationKind,
}

#[derive(Debug, Clone, Default)]
pub struct EdgeReport {
    pub configurations: usize,
    pub edges: usize,
    pub visited_states: BTreeSet<StateId>,
    pub violations: Vec<EdgeViolation>,
}

fn factor<'a>(a1: &'a Automaton, a2: &'a Automaton, side: Side) -> &'a Automaton {
    match side {
        Side::Left => a1,
        Side::Right => a2,
    }
}

fn project_raw(
    p: &Product,
    a1: &Automaton,
    a2: &Automaton,
    state: StateId,
    assignment: &Assignment,
    side: Side,
) -> Result<Configuration, EdgeViolationKind> {
    let ps = &p.states[state];
    let q = match side {
        Side::Left => ps.left,
        Side::Right => ps.right,
    };
    let mut out = Assignment::new();
    for x in &factor(a1, a2, side).state(q).registers {
        let value = p.registers[state]
            .iter()
            .find(|(_, class)| class.member(side) == Some(x))
            .and_then(|(r, _)| assignment.get(r))
            .ok_or_else(|| EdgeViolationKind::MissingRegister(side, x.clone()))?;
        out.insert(x.clone(), value.clone());
    }
    Ok(Configuration::new(q, out))
}

fn product_step(
    p: &Product,
    state: StateId,
    assignment: &Assignment,
    name: &Name,
) -> Result<(StateId, Assignment), EdgeViolationKind> {
    let label = assignment
        .iter()
        .find(|(_, v)| *v == name)
        .map_or(Label::Star, |(r, _)| Label::Reg(r.clone()));
    let matching: Vec<&Transition> = p
        .transitions
        .iter()
        .filter(|t| t.source == state && t.label == label)
        .collect();
    let t = match matching.as_slice() {
        [] => return Err(EdgeViolationKind::NoTransition),
        [t] => *t,
        _ => return Err(EdgeViolationKind::AmbiguousTransition),
    };
    for (_, source) in t.history.iter() {
        if let Source::Reg(r) = source {
            if !assignment.contains_key(r) {
                return Err(EdgeViolationKind::UndefinedSource(r.clone()));
            }
        }
    }
    Ok((
        t.target,
        follow(assignment, t, name).expect("sources checked"),
    ))
}

/// Checks that product edges and factor edges correspond, over every product
/// configuration reachable within `depth` steps using names from `pool` and
/// the initial assignments. Each configuration is probed with every pool
/// name, every name it holds, and one name outside all of them.
pub fn oracle_edge_correspondence(
    a1: &Automaton,
    a2: &Automaton,
    p: &Product,
    pool: &[Name],
    depth: usize,
) -> EdgeReport {
    let mut report = EdgeReport::default();
    let mut names: BTreeSet<Name> = pool.iter().cloned().collect();
    names.extend(p.initial_assignment.values().cloned());
    names.extend(a1.initial_assignment().values().cloned());
    names.extend(a2.initial_assignment().values().cloned());
    let outside = FreshNames::new(names.iter().cloned()).fresh();
    let mut probes: Vec<Name> = names.iter().cloned().collect();
    probes.push(outside);

    let start = (0, p.initial_assignment.clone());
    for side in [Side::Left, Side::Right] {
        let a = factor(a1, a2, side);
        let expected = Configuration::new(a.initial(), a.initial_assignment().clone());
        if project_raw(p, a1, a2, 0, &start.1, side).ok() != Some(expected) {
            report.violations.push(EdgeViolation {
                state: 0,
                assignment: start.1.clone(),
                name: None,
                kind: EdgeViolationKind::InitialMismatch(side),
            });
        }
    }

    let mut seen: HashSet<(StateId, Assignment)> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some(((state, assignment), d)) = queue.pop_front() {
        report.configurations += 1;
        report.visited_states.insert(state);
        let mut found: Vec<(Name, EdgeViolationKind)> = Vec::new();
        let mut violation = |name: &Name, kind| found.push((name.clone(), kind));
        for name in &probes {
            let (next_state, next) = match product_step(p, state, &assignment, name) {
                Ok(x) => x,
                Err(kind) => {
                    violation(name, kind);
                    continue;
                }
            };
            let mut ok = true;
            for side in [Side::Left, Side::Right] {
                let before = match project_raw(p, a1, a2, state, &assignment, side) {
                    Ok(c) => c,
                    Err(kind) => {
                        violation(name, kind);
                        ok = false;
                        continue;
                    }
                };
                let expected = oracle_step(factor(a1, a2, side), &before, name);
                match project_raw(p, a1, a2, next_state, &next, side) {
                    Ok(c) if c == expected => {}
                    Ok(_) => {
                        violation(name, EdgeViolationKind::ProjectionMismatch(side));
                        ok = false;
                    }
                    Err(kind) => {
                        violation(name, kind);
                        ok = false;
                    }
                }
            }
            report.edges += 1;
            let in_pool = next.values().all(|v| names.contains(v));
            if ok && in_pool && d < depth && seen.insert((next_state, next.clone())) {
                queue.push_back(((next_state, next), d + 1));
            }
        }
        report
            .violations
            .extend(found.into_iter().map(|(name, kind)| EdgeViolation {
                state,
                assignment: assignment.clone(),
                name: Some(name),
                kind,
            }));
    }
    report
}

/// A deliberate corruption of a product's transition list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mutation {
    /// Send the transition to a state with different factor components.
    Retarget {
        transition: usize,
        target: StateId,
    },
    /// Fill a target register from a different source register.
    Resource {
        transition: usize,
        register: RegisterId,
        source: RegisterId,
    },
    Drop {
        transition: usize,
    },
}

impl Mutation {
    pub fn apply(&self, p: &mut Product) {
        match self {
            Mutation::Retarget { transition, target } => {
                p.transitions[*transition].target = *target
            }
            Mutation::Resource {
                transition,
                register,
                source,
            } => {
                let t = &mut p.transitions[*transition];
                t.history = t
                    .history
                    .iter()
                    .map(|(r, s)| {
                        if r == register {
                            (r.clone(), Source::Reg(source.clone()))
                        } else {
                            (r.clone(), s.clone())
                        }
                    })
                    .collect();
            }
            Mutation::Drop { transition } => {
                p.transitions.remove(*transition);
            }
        }
    }
}

/// Every single-transition mutation of `p` that changes an observable edge
/// leaving one of `states`.
pub fn candidate_mutations(p: &Product, states: &BTreeSet<StateId>) -> Vec<Mutation> {
    let mut out = Vec::new();
    for (i, t) in p.transitions.iter().enumerate() {
        if !states.contains(&t.source) {
            continue;
        }
        out.push(Mutation::Drop { transition: i });
        let components = |s: StateId| (p.states[s].left, p.states[s].right);
        if let Some(target) = (0..p.states.len()).find(|&s| components(s) != components(t.target)) {
            out.push(Mutation::Retarget {
                transition: i,
                target,
            });
        }
        let source_regs: Vec<&RegisterId> = p.registers[t.source].iter().map(|(r, _)| r).collect();
        for (register, source) in t.history.iter() {
            if let Source::Reg(current) = source {
                if let Some(other) = source_regs.iter().find(|r| **r != current) {
                    out.push(Mutation::Resource {
                        transition: i,
                        register: register.clone(),
                        source: (*other).clone(),
                    });
                }
            }
        }
    }
    out
}

/// Searches for a word driving `l` from `(p0, target)` back to
/// `(p0, target)` within `bound` traversals. Fresh steps branch over the
/// target's names plus enough reserve names to never run out.
pub fn oracle_loop_search(l: &Loop, target: &Assignment, bound: usize) -> Option<Vec<Name>> {
    let mut reserve = FreshNames::new(target.values().cloned());
    let mut candidates: Vec<Name> = target.values().cloned().collect();
    candidates.extend((0..=l.max_registers()).map(|_| reserve.fresh()));

    let n = l.len();
    let mut parent: HashMap<(usize, Assignment), (usize, Assignment, Name)> = HashMap::new();
    let start = (0usize, target.clone());
    let mut seen: HashSet<(usize, Assignment)> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start.clone(), 0usize)]);
    // positions count transitions taken; the goal is any multiple of n > 0
    let mut goal = None;
    'search: while let Some(((pos, assignment), steps)) = queue.pop_front() {
        if steps == bound * n {
            continue;
        }
        let t = &l.transitions()[pos];
        let choices: Vec<Name> = match &t.label {
            Label::Reg(r) => vec![assignment[r].clone()],
            Label::Star => candidates
                .iter()
                .filter(|c| !assignment.values().any(|v| v == *c))
                .cloned()
                .collect(),
        };
        for name in choices {
            let next = follow(&assignment, t, &name).expect("loop histories are well formed");
            let key = ((pos + 1) % n, next);
            if key.0 == 0 && key.1 == *target {
                parent.insert(key.clone(), (pos, assignment.clone(), name));
                goal = Some((key, steps + 1));
                break 'search;
            }
            if seen.insert(key.clone()) {
                parent.insert(key.clone(), (pos, assignment.clone(), name));
                queue.push_back((key, steps + 1));
            }
        }
    }
    let (mut key, len) = goal?;
    let mut word = Vec::with_capacity(len);
    for _ in 0..len {
        let (pos, assignment, name) = parent[&key].clone();
        word.push(name);
        key = (pos, assignment);
    }
    word.reverse();
    Some(word)
}
