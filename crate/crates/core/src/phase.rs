use std::fmt;

use serde::{Deserialize, Serialize};

/// Behavioural phase of a flight step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// Casting search, written `s`.
    #[serde(rename = "s")]
    Exploration,
    /// Upwind surge, written `o`.
    #[serde(rename = "o")]
    Exploitation,
}

impl Phase {
    pub fn other(self) -> Phase {
        match self {
            Phase::Exploration => Phase::Exploitation,
            Phase::Exploitation => Phase::Exploration,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Phase::Exploration => 's',
            Phase::Exploitation => 'o',
        }
    }

    pub fn from_symbol(c: char) -> Option<Phase> {
        match c {
            's' => Some(Phase::Exploration),
            'o' => Some(Phase::Exploitation),
            _ => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}
