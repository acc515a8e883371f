//! Names of the infinite alphabet, register identifiers and fresh-name generation.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid token {0:?}: expected one or more of [A-Za-z0-9_#]")]
pub struct InvalidToken(pub String);

pub(crate) fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '#')
}

macro_rules! token_type {
    ($(#[$meta:meta])* $ty:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $ty(Arc<str>);

        impl $ty {
            pub fn new(token: impl AsRef<str>) -> Result<Self, InvalidToken> {
                let token = token.as_ref();
                if is_token(token) {
                    Ok(Self(Arc::from(token)))
                } else {
                    Err(InvalidToken(token.to_string()))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $ty {
            type Err = InvalidToken;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }
    };
}

token_type!(
    /// A symbol of the alphabet. Names are opaque and only compared for equality.
    Name
);

token_type!(
    /// A register (local name) of a state. Scoped to the state that declares it.
    RegisterId
);

/// Deterministic generator of names `#0`, `#1`, ... that skips an avoid set.
///
/// Every generated name is added to the avoid set, so a generator never
/// hands out the same name twice.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    next: u64,
    avoid: HashSet<Name>,
}

impl FreshNames {
    pub fn new<I: IntoIterator<Item = Name>>(avoid: I) -> Self {
        Self {
            next: 0,
            avoid: avoid.into_iter().collect(),
        }
    }

    pub fn avoid(&mut self, name: &Name) {
        self.avoid.insert(name.clone());
    }

    pub fn avoid_all<'a, I: IntoIterator<Item = &'a Name>>(&mut self, names: I) {
        for name in names {
            self.avoid(name);
        }
    }

    pub fn is_avoided(&self, name: &Name) -> bool {
        self.avoid.contains(name)
    }

    pub fn fresh(&mut self) -> Name {
        loop {
            let candidate = Name(Arc::from(format!("#{}", self.next)));
            self.next += 1;
            if self.avoid.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}
