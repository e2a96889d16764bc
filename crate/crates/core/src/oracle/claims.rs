use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
    Flagged,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::Mismatch => "mismatch",
            Verdict::Flagged => "flagged",
        }
    }
}

/// One row of the reproduction ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub claim_id: String,
    pub paper_value: f64,
    pub computed_value: f64,
    pub method: String,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub note: String,
}

impl ClaimRecord {
    /// Compares the two values; the verdict is `match` iff `abs_diff ≤ tolerance`.
    pub fn compare(claim_id: impl Into<String>, paper_value: f64, computed_value: f64, method: impl Into<String>, tolerance: f64) -> Self {
        let abs_diff = (computed_value - paper_value).abs();
        let rel_diff = if paper_value == 0.0 { abs_diff } else { abs_diff / paper_value.abs() };
        let verdict = if abs_diff <= tolerance { Verdict::Match } else { Verdict::Mismatch };
        Self {
            claim_id: claim_id.into(),
            paper_value,
            computed_value,
            method: method.into(),
            abs_diff,
            rel_diff,
            tolerance,
            verdict,
            note: String::new(),
        }
    }

    /// Forces the verdict to `flagged`.
    pub fn flagged(mut self, note: impl Into<String>) -> Self {
        self.verdict = Verdict::Flagged;
        self.note = note.into();
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_tolerance() {
        assert_eq!(ClaimRecord::compare("x", 0.15, 0.15 + 1e-10, "m", 1e-8).verdict, Verdict::Match);
        let r = ClaimRecord::compare("x", 0.0, 1e-3, "m", 1e-8);
        assert_eq!(r.verdict, Verdict::Mismatch);
        assert_eq!(r.rel_diff, r.abs_diff);
        assert_eq!(r.flagged("why").verdict, Verdict::Flagged);
    }
}
