use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of one check.
///
/// Checkers only answer `Fail` when a guaranteed conclusion is violated.
/// Outside the guaranteed range a value is recorded as `Observed`; `Unknown`
/// marks an inconclusive computation (for example a capped certificate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Observed,
    Unknown,
}

impl Verdict {
    pub fn from_check(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Observed => "OBSERVED",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}
