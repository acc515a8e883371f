//! The `hdma` command-line interface.
//!
//! Verdicts go to standard output, diagnostics to standard error. Exit code 0
//! means a decision was reached (whatever the verdict), 1 a usage error and 2
//! an unreadable, malformed or invalid input.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::automaton::{Automaton, StateId};
use crate::boolean;
use crate::config::{run_prefix, step, up_member, Configuration};
use crate::decision::{self, Emptiness, Equivalence};
use crate::format::{load_automaton, parse_upword, parse_word, serialize_automaton};
use crate::name::RegisterId;
use crate::product::build_product;
use crate::upwords::{analyze, Loop};

#[derive(Debug, Parser)]
#[command(
    name = "hdma",
    version,
    about = "History-dependent deterministic Muller automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a file describes a valid automaton.
    Validate { file: PathBuf },
    /// Decide membership of an ultimately periodic word "u ; v".
    Member {
        file: PathBuf,
        #[arg(long)]
        word: String,
    },
    /// Run a finite word and print the configuration reached.
    Run {
        file: PathBuf,
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        trace: bool,
    },
    /// Write the synchronized product (accepting every run).
    Product {
        left: PathBuf,
        right: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Write an automaton for the intersection.
    Intersect {
        left: PathBuf,
        right: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Write an automaton for the union.
    Union {
        left: PathBuf,
        right: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Write an automaton for the symmetric difference.
    Symdiff {
        left: PathBuf,
        right: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Write an automaton for the complement.
    Complement {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Decide emptiness.
    Empty {
        file: PathBuf,
        #[arg(long)]
        witness: bool,
    },
    /// Decide language equivalence.
    Equiv { left: PathBuf, right: PathBuf },
    /// Decide language inclusion of the first automaton in the second.
    Included { left: PathBuf, right: PathBuf },
    /// Print the loop analysis for a loop through a state.
    AnalyzeLoop {
        file: PathBuf,
        #[arg(long)]
        from: String,
    },
}

enum Failure {
    Usage(String),
    Input(String),
}

type Outcome = Result<(), Failure>;

fn load(path: &Path) -> Result<Automaton, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    load_automaton(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn save(path: &Path, a: &Automaton) -> Outcome {
    let text = serialize_automaton(a).map_err(|e| Failure::Input(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print(out: &mut dyn Write, line: impl std::fmt::Display) -> Outcome {
    writeln!(out, "{line}").map_err(|e| Failure::Input(format!("cannot write output: {e}")))
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Validate { file } => {
            let a = load(&file)?;
            print(
                out,
                format_args!("OK {} ({} states)", a.name(), a.num_states()),
            )
        }
        Command::Member { file, word } => {
            let a = load(&file)?;
            let w = parse_upword(&word).map_err(|e| Failure::Input(format!("word: {e}")))?;
            let verdict = if up_member(&a, &w).accepted {
                "ACCEPT"
            } else {
                "REJECT"
            };
            print(out, verdict)
        }
        Command::Run {
            file,
            prefix,
            trace,
        } => {
            let a = load(&file)?;
            let word = parse_word(&prefix).map_err(|e| Failure::Input(format!("prefix: {e}")))?;
            let start = Configuration::initial(&a);
            if trace {
                print(out, start.display(&a))?;
                let mut c = start;
                for name in &word {
                    c = step(&a, &c, name);
                    print(out, format_args!("{name} -> {}", c.display(&a)))?;
                }
                Ok(())
            } else {
                let record = run_prefix(&a, &start, &word);
                print(out, record.final_config.display(&a))
            }
        }
        Command::Product {
            left,
            right,
            output,
        } => {
            let (a1, a2) = (load(&left)?, load(&right)?);
            save(&output, &build_product(&a1, &a2).into_automaton())
        }
        Command::Intersect {
            left,
            right,
            output,
        } => save(&output, &boolean::intersect(&load(&left)?, &load(&right)?)),
        Command::Union {
            left,
            right,
            output,
        } => save(&output, &boolean::union(&load(&left)?, &load(&right)?)),
        Command::Symdiff {
            left,
            right,
            output,
        } => save(
            &output,
            &boolean::symmetric_difference(&load(&left)?, &load(&right)?),
        ),
        Command::Complement { file, output } => save(&output, &boolean::complement(&load(&file)?)),
        Command::Empty { file, witness } => {
            let a = load(&file)?;
            match decision::is_empty(&a) {
                Emptiness::Empty => print(out, "EMPTY"),
                Emptiness::NonEmpty(wl) => {
                    print(out, "NONEMPTY")?;
                    if witness {
                        print(out, decision::realize_witness(&a, &wl))?;
                    }
                    Ok(())
                }
            }
        }
        Command::Equiv { left, right } => {
            match decision::equivalent(&load(&left)?, &load(&right)?) {
                Equivalence::Equivalent => print(out, "EQUIV"),
                Equivalence::NotEquivalent(w) => {
                    print(out, "NOTEQUIV")?;
                    print(out, w)
                }
            }
        }
        Command::Included { left, right } => {
            match decision::included(&load(&left)?, &load(&right)?) {
                Ok(()) => print(out, "INCLUDED"),
                Err(w) => {
                    print(out, "NOTINCLUDED")?;
                    print(out, w)
                }
            }
        }
        Command::AnalyzeLoop { file, from } => {
            let a = load(&file)?;
            let q = a
                .state_id(&from)
                .ok_or_else(|| Failure::Usage(format!("no state named {from:?}")))?;
            match loop_through(&a, q) {
                None => print(out, "NOLOOP"),
                Some(indices) => print_analysis(out, &a, &indices),
            }
        }
    }
}

/// The witness loop rotated to start at `q` if it passes through `q`,
/// otherwise a shortest cycle through `q`.
fn loop_through(a: &Automaton, q: StateId) -> Option<Vec<usize>> {
    if let Emptiness::NonEmpty(wl) = decision::is_empty(a) {
        if let Some(k) = wl
            .cycle
            .iter()
            .position(|&i| a.transitions()[i].source == q)
        {
            let mut cycle = wl.cycle;
            cycle.rotate_left(k);
            return Some(cycle);
        }
    }
    a.outgoing(q)
        .filter_map(|first| {
            let mut cycle = vec![first];
            cycle.extend(path(a, a.transitions()[first].target, q)?);
            Some(cycle)
        })
        .min_by_key(Vec::len)
}

/// Shortest transition path from `from` to `to`.
fn path(a: &Automaton, from: StateId, to: StateId) -> Option<Vec<usize>> {
    let mut parent = BTreeMap::from([(from, None::<usize>)]);
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        if s == to {
            let mut path = Vec::new();
            let mut cur = s;
            while let Some(i) = parent[&cur] {
                path.push(i);
                cur = a.transitions()[i].source;
            }
            path.reverse();
            return Some(path);
        }
        for i in a.outgoing(s) {
            let t = a.transitions()[i].target;
            if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(t) {
                e.insert(Some(i));
                queue.push_back(t);
            }
        }
    }
    None
}

fn print_analysis(out: &mut dyn Write, a: &Automaton, indices: &[usize]) -> Outcome {
    let l = Loop::from_automaton(a, indices).map_err(|e| Failure::Input(e.to_string()))?;
    let an = analyze(&l).map_err(|e| Failure::Input(e.to_string()))?;
    let steps: Vec<String> = l
        .transitions()
        .iter()
        .map(|t| format!("-{}->", t.label))
        .zip(
            l.transitions()
                .iter()
                .map(|t| a.state_name(t.target).to_string()),
        )
        .map(|(arrow, s)| format!("{arrow} {s}"))
        .collect();
    let start = a.state_name(l.transitions()[0].source);
    print(out, format_args!("loop: {start} {}", steps.join(" ")))?;
    let sh: Vec<String> = an
        .sigma_hat
        .iter()
        .map(|(x, y)| format!("{x}->{y}"))
        .collect();
    print(out, format_args!("sigma_hat: {{{}}}", sh.join(", ")))?;
    let set = |s: &BTreeSet<RegisterId>| {
        s.iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    print(out, format_args!("I: {{{}}}", set(&an.survivors)))?;
    print(out, format_args!("T: {{{}}}", set(&an.transient)))?;
    print(out, format_args!("theta: {}", an.theta))?;
    print(out, format_args!("epsilon: {}", an.epsilon))?;
    print(out, format_args!("zeta: {}", an.zeta))?;
    let seeds: Vec<String> = an
        .seeds
        .iter()
        .map(|(x, i, j)| format!("({x}, {i}, {j})"))
        .collect();
    print(out, format_args!("X: {{{}}}", seeds.join(", ")))
}
