//! History-dependent deterministic Muller automata over an infinite alphabet
//! of names: membership of ultimately periodic words, synchronized products,
//! boolean combinations, emptiness and equivalence, and witness words.

pub mod automaton;
pub mod boolean;
pub mod cli;
pub mod config;
pub mod decision;
pub mod format;
pub mod name;
pub mod oracle;
pub mod product;
pub mod upwords;
