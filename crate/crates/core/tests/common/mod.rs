#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use hdma::automaton::{
    validate, AcceptDesc, Assignment, Automaton, AutomatonDesc, InitDesc, Label, Source, StateDesc,
    Transition, TransitionDesc,
};
use hdma::config::{apply_history, UpWord};
use hdma::decision::{is_empty, Emptiness};
use hdma::format::load_automaton;
use hdma::name::{Name, RegisterId};
use hdma::upwords::Loop;
use rand::seq::SliceRandom;
use rand::Rng;

pub const SESSION: &str = include_str!("../../fixtures/session.aut");
pub const UNIVERSAL: &str = include_str!("../../fixtures/universal.aut");
pub const NOTHING: &str = include_str!("../../fixtures/nothing.aut");
pub const SWAP: &str = include_str!("../../fixtures/swap.aut");
pub const RECUR: &str = include_str!("../../fixtures/recur.aut");
pub const PINNED: &str = include_str!("../../fixtures/pinned.aut");

pub fn load(text: &str) -> Automaton {
    load_automaton(text).expect("fixture loads")
}

pub fn corpus() -> Vec<Automaton> {
    [SESSION, UNIVERSAL, NOTHING, SWAP, RECUR, PINNED]
        .iter()
        .map(|t| load(t))
        .collect()
}

pub fn n(s: &str) -> Name {
    Name::new(s).unwrap()
}

pub fn r(s: &str) -> RegisterId {
    RegisterId::new(s).unwrap()
}

pub fn names(s: &str) -> Vec<Name> {
    s.split_whitespace().map(n).collect()
}

pub fn word(u: &str, v: &str) -> UpWord {
    UpWord::new(names(u), names(v)).unwrap()
}

pub fn assign(pairs: &[(&str, &str)]) -> Assignment {
    pairs.iter().map(|(x, v)| (r(x), n(v))).collect()
}

/// Names used by random words: the corpus's initial names plus a few others.
pub fn word_pool() -> Vec<Name> {
    names("a b c d e k")
}

pub fn random_word(rng: &mut impl Rng, pool: &[Name]) -> UpWord {
    let u_len = rng.gen_range(0..4);
    let v_len = rng.gen_range(1..5);
    let mut pick = |len| {
        (0..len)
            .map(|_| pool.choose(rng).unwrap().clone())
            .collect()
    };
    let u = pick(u_len);
    let v = pick(v_len);
    UpWord::new(u, v).unwrap()
}

/// Registers `s{q}r{i}` with a random count per state.
fn random_registers(rng: &mut impl Rng, states: usize) -> Vec<Vec<String>> {
    (0..states)
        .map(|q| {
            let k = rng.gen_range(0..3);
            (0..k).map(|i| format!("s{q}r{i}")).collect()
        })
        .collect()
}

/// An injective history filling `target` from `sources`, plus `*` if allowed.
fn random_history(
    rng: &mut impl Rng,
    target: &[String],
    sources: &[String],
    fresh: bool,
) -> Vec<(String, Option<String>)> {
    let mut pool: Vec<Option<String>> = sources.iter().cloned().map(Some).collect();
    if fresh {
        pool.push(None);
    }
    pool.shuffle(rng);
    target.iter().cloned().zip(pool).collect()
}

/// A random valid automaton with up to four states.
pub fn random_automaton(rng: &mut impl Rng, name: &str) -> Automaton {
    let count = rng.gen_range(1..=4);
    let regs = random_registers(rng, count);
    let states: Vec<StateDesc> = (0..count)
        .map(|q| StateDesc {
            name: format!("q{q}"),
            registers: regs[q].clone(),
        })
        .collect();
    let mut transitions = Vec::new();
    for q in 0..count {
        let mut labels: Vec<Option<String>> = regs[q].iter().cloned().map(Some).collect();
        labels.push(None);
        for label in labels {
            let star = label.is_none();
            let room = regs[q].len() + usize::from(star);
            let targets: Vec<usize> = (0..count).filter(|&t| regs[t].len() <= room).collect();
            let target = *targets.choose(rng).unwrap();
            transitions.push(TransitionDesc {
                source: format!("q{q}"),
                label,
                target: format!("q{target}"),
                history: random_history(rng, &regs[target], &regs[q], star),
            });
        }
    }
    let init_names = ["a", "b", "c"];
    let assignment = regs[0]
        .iter()
        .zip(init_names)
        .map(|(r, v)| (r.clone(), v.to_string()))
        .collect();
    let mut sets = Vec::new();
    for _ in 0..rng.gen_range(0..4) {
        let set: Vec<String> = (0..count)
            .filter(|_| rng.gen_bool(0.5))
            .map(|q| format!("q{q}"))
            .collect();
        if !set.is_empty() {
            sets.push(set);
        }
    }
    let desc = AutomatonDesc {
        name: name.to_string(),
        states,
        init: InitDesc {
            state: "q0".into(),
            assignment,
        },
        accept: AcceptDesc {
            negated: rng.gen_bool(0.2),
            sets,
        },
        transitions,
    };
    validate(&desc).expect("generated automaton is valid")
}

/// A random valid loop of length 1 to 4 with up to three registers per state.
pub fn random_loop(rng: &mut impl Rng) -> Loop {
    loop {
        let len = rng.gen_range(1..=4);
        let counts: Vec<usize> = (0..len).map(|_| rng.gen_range(0..=3)).collect();
        let stars: Vec<bool> = counts
            .iter()
            .map(|&k| k == 0 || rng.gen_bool(0.5))
            .collect();
        let feasible = (0..len).all(|i| counts[(i + 1) % len] <= counts[i] + usize::from(stars[i]));
        if !feasible {
            continue;
        }
        let regs: Vec<Vec<RegisterId>> = counts
            .iter()
            .enumerate()
            .map(|(i, &k)| (0..k).map(|j| r(&format!("p{i}r{j}"))).collect())
            .collect();
        let transitions = (0..len)
            .map(|i| {
                let here = &regs[i];
                let there = &regs[(i + 1) % len];
                let label = if stars[i] {
                    Label::Star
                } else {
                    Label::Reg(here.choose(rng).unwrap().clone())
                };
                let mut sources: Vec<Source> = here.iter().cloned().map(Source::Reg).collect();
                if stars[i] {
                    sources.push(Source::Fresh);
                }
                sources.shuffle(rng);
                Transition {
                    source: i,
                    label,
                    target: (i + 1) % len,
                    history: there.iter().cloned().zip(sources).collect(),
                }
            })
            .collect();
        return Loop::new(transitions, regs).expect("generated loop is valid");
    }
}

/// A random injective assignment of the loop's first registers.
pub fn random_assignment(rng: &mut impl Rng, regs: &[RegisterId]) -> Assignment {
    let mut pool = names("a b c d e f g h");
    pool.shuffle(rng);
    regs.iter().cloned().zip(pool).collect()
}

/// A random word following the loop for `traversals` rounds; fresh steps pick
/// random names not currently held.
pub fn random_loop_word(
    rng: &mut impl Rng,
    l: &Loop,
    start: &Assignment,
    traversals: usize,
) -> Vec<Name> {
    let pool = names("a b c d e f g h i j k l m");
    let mut current = start.clone();
    let mut out = Vec::new();
    for _ in 0..traversals {
        for t in l.transitions() {
            let name = match &t.label {
                Label::Reg(x) => current[x].clone(),
                Label::Star => {
                    let free: Vec<&Name> = pool
                        .iter()
                        .filter(|p| !current.values().any(|v| v == *p))
                        .collect();
                    (*free.choose(rng).unwrap()).clone()
                }
            };
            current = apply_history(&current, &t.history, &name);
            out.push(name);
        }
    }
    out
}

/// Loops of an automaton: its witness loop (if any) and, for every
/// transition, the transition followed by a shortest path back.
pub fn automaton_loops(a: &Automaton) -> Vec<Loop> {
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    if let Emptiness::NonEmpty(wl) = is_empty(a) {
        found.insert(wl.cycle);
    }
    for (i, t) in a.transitions().iter().enumerate() {
        if let Some(back) = shortest_path(a, t.target, t.source) {
            let mut cycle = vec![i];
            cycle.extend(back);
            found.insert(cycle);
        }
    }
    found
        .into_iter()
        .map(|c| Loop::from_automaton(a, &c).expect("cycles are loops"))
        .collect()
}

fn shortest_path(a: &Automaton, from: usize, to: usize) -> Option<Vec<usize>> {
    let mut parent: BTreeMap<usize, Option<usize>> = BTreeMap::from([(from, None)]);
    let mut queue = VecDeque::from([from]);
    while let Some(q) = queue.pop_front() {
        if q == to {
            let mut path = Vec::new();
            let mut cur = q;
            while let Some(i) = parent[&cur] {
                path.push(i);
                cur = a.transitions()[i].source;
            }
            path.reverse();
            return Some(path);
        }
        for i in a.outgoing(q) {
            let t = a.transitions()[i].target;
            parent.entry(t).or_insert_with(|| {
                queue.push_back(t);
                Some(i)
            });
        }
    }
    None
}

pub fn corpus_loops() -> Vec<Loop> {
    corpus().iter().flat_map(automaton_loops).collect()
}
