//! Boolean combinations of automata languages.
//!
//! Binary operations reuse the synchronized product and only differ in the
//! predicate applied to the projections of an Inf set.

use std::sync::Arc;

use crate::automaton::{AcceptingCondition, Automaton, BoolOp, ProjectedCondition};
use crate::product::build_product;

fn combine(a1: &Automaton, a2: &Automaton, op: BoolOp, name: String) -> Automaton {
    let product = build_product(a1, a2);
    let condition = AcceptingCondition::Projected(Arc::new(ProjectedCondition {
        op,
        left: a1.accepting().clone(),
        right: a2.accepting().clone(),
        components: product.components(),
    }));
    product
        .into_automaton()
        .with_accepting(condition)
        .renamed(name)
}

pub fn intersect(a1: &Automaton, a2: &Automaton) -> Automaton {
    combine(
        a1,
        a2,
        BoolOp::And,
        format!("{}_and_{}", a1.name(), a2.name()),
    )
}

pub fn union(a1: &Automaton, a2: &Automaton) -> Automaton {
    combine(
        a1,
        a2,
        BoolOp::Or,
        format!("{}_or_{}", a1.name(), a2.name()),
    )
}

pub fn symmetric_difference(a1: &Automaton, a2: &Automaton) -> Automaton {
    combine(
        a1,
        a2,
        BoolOp::Xor,
        format!("{}_xor_{}", a1.name(), a2.name()),
    )
}

/// Same transition structure, negated accepting predicate.
pub fn complement(a: &Automaton) -> Automaton {
    a.with_accepting(a.accepting().clone().negate())
        .renamed(format!("not_{}", a.name()))
}

pub fn difference(a1: &Automaton, a2: &Automaton) -> Automaton {
    intersect(a1, &complement(a2))
}
