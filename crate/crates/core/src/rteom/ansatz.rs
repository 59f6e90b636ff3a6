use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Time-dependent cluster ansatz for the ionized state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnsatzKind {
    #[serde(rename = "tdcc")]
    Tdcc,
    #[serde(rename = "tddcc1")]
    Tddcc1,
    #[serde(rename = "tddcc1_1b")]
    Tddcc1_1b,
    #[serde(rename = "tddcc1_2b")]
    Tddcc1_2b,
    #[serde(rename = "tddcc2")]
    Tddcc2,
}

impl AnsatzKind {
    pub const ALL: [AnsatzKind; 5] =
        [AnsatzKind::Tdcc, AnsatzKind::Tddcc1, AnsatzKind::Tddcc1_1b, AnsatzKind::Tddcc1_2b, AnsatzKind::Tddcc2];

    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::Tdcc => "tdcc",
            AnsatzKind::Tddcc1 => "tddcc1",
            AnsatzKind::Tddcc1_1b => "tddcc1_1b",
            AnsatzKind::Tddcc1_2b => "tddcc1_2b",
            AnsatzKind::Tddcc2 => "tddcc2",
        }
    }

    /// Whether the ground-state amplitudes enter the ionized-state operator.
    pub fn uses_ground_state(self) -> bool {
        self != AnsatzKind::Tdcc
    }

    pub fn singles_correction(self) -> bool {
        matches!(self, AnsatzKind::Tddcc1_1b | AnsatzKind::Tddcc1_2b | AnsatzKind::Tddcc2)
    }

    pub fn doubles_correction(self) -> bool {
        matches!(self, AnsatzKind::Tddcc1_2b | AnsatzKind::Tddcc2)
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', '(', ')'], "");
        AnsatzKind::ALL
            .into_iter()
            .find(|k| k.name().replace('_', "") == norm.replace('_', ""))
            .ok_or_else(|| Error::Config(format!("unknown ansatz '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        for k in AnsatzKind::ALL {
            assert_eq!(k.name().parse::<AnsatzKind>().unwrap(), k);
        }
        assert_eq!("TD-dCC-1(2b)".parse::<AnsatzKind>().unwrap(), AnsatzKind::Tddcc1_2b);
        assert!("tdcc3".parse::<AnsatzKind>().is_err());
    }
}
