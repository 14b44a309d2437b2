use crate::error::{Error, Result};

/// Halting rule for factorizations that support both a fixed rank and a
/// residual tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// Exactly this many terms (`k >= 1`).
    Rank(usize),
    /// As few terms as possible with the residual at or below the value.
    Tolerance(f64),
}

impl Truncation {
    /// Interprets the `(k, tol)` calling convention: `k >= 1` selects fixed
    /// rank, `k == 0` with `tol > 0` selects tolerance mode. Supplying both
    /// or neither is rejected.
    pub fn from_pair(k: usize, tol: f64) -> Result<Self> {
        match (k, tol) {
            (0, t) if t > 0.0 && t.is_finite() => Ok(Truncation::Tolerance(t)),
            (0, _) => Err(Error::invalid(
                "either a rank k >= 1 or a tolerance tol > 0 is required",
            )),
            (k, t) if t == 0.0 => Ok(Truncation::Rank(k)),
            (_, _) => Err(Error::invalid(
                "rank and tolerance are mutually exclusive; supply only one",
            )),
        }
    }

    pub(crate) fn check_rank(self, max: usize) -> Result<Self> {
        match self {
            Truncation::Rank(0) => Err(Error::invalid("rank must be at least 1")),
            Truncation::Rank(k) if k > max => Err(Error::invalid(format!(
                "rank {k} exceeds the maximum {max} for this matrix"
            ))),
            Truncation::Tolerance(t) if !(t > 0.0) || !t.is_finite() => Err(Error::invalid(
                format!("tolerance must be positive and finite, got {t}"),
            )),
            other => Ok(other),
        }
    }
}
