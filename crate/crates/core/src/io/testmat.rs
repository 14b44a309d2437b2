//! Synthetic matrices `A = U diag(sigma) V'` with prescribed spectra.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::dense::{gaussian_matrix, mul_nt, orth, DenseMatrix, RngState};
use crate::error::{Error, Result};

/// Singular value profile of a generated matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumSpec {
    /// `logspace(0, -0.5, r)`
    TypeI,
    /// `logspace(0, -2, r)`
    TypeII,
    /// `logspace(0, -3.5, r)`
    TypeIII,
    /// Explicit base-10 exponents, one per singular value (length `r`).
    Custom(Vec<f64>),
}

impl SpectrumSpec {
    /// Singular values for rank `r`.
    pub fn values(&self, r: usize) -> Result<Vec<f64>> {
        let end = match self {
            SpectrumSpec::TypeI => -0.5,
            SpectrumSpec::TypeII => -2.0,
            SpectrumSpec::TypeIII => -3.5,
            SpectrumSpec::Custom(e) => {
                if e.len() != r {
                    return Err(Error::invalid(format!(
                        "custom spectrum has {} exponents, expected {r}",
                        e.len()
                    )));
                }
                if e.iter().any(|x| !x.is_finite()) || e.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::invalid("custom exponents must be finite and nonincreasing"));
                }
                return Ok(e.iter().map(|x| 10f64.powf(*x)).collect());
            }
        };
        Ok(logspace(0.0, end, r))
    }
}

impl FromStr for SpectrumSpec {
    type Err = Error;

    /// Accepts `I`, `II`, `III` (optionally prefixed with `type-`) or a
    /// comma-separated exponent list.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t.strip_prefix("type-").unwrap_or(t);
        match t.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(SpectrumSpec::TypeI),
            "II" | "2" => Ok(SpectrumSpec::TypeII),
            "III" | "3" => Ok(SpectrumSpec::TypeIII),
            _ => t
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(SpectrumSpec::Custom)
                .map_err(|_| Error::invalid(format!("unknown spectrum type '{s}'"))),
        }
    }
}

/// `r` points `10^e` with `e` evenly spaced from `a` to `b` inclusive.
pub fn logspace(a: f64, b: f64, r: usize) -> Vec<f64> {
    match r {
        0 => Vec::new(),
        1 => vec![10f64.powf(a)],
        _ => (0..r)
            .map(|j| {
                if j == r - 1 {
                    10f64.powf(b)
                } else {
                    10f64.powf(a + (b - a) * j as f64 / (r - 1) as f64)
                }
            })
            .collect(),
    }
}

/// Draws `U` (m x r) then `V` (n x r) as orthonormalized Gaussian matrices,
/// `r = min(m, n)`, and returns `U diag(sigma) V'` with the exact spectrum.
pub fn gen_test_matrix(
    m: usize,
    n: usize,
    spec: &SpectrumSpec,
    rng: &mut RngState,
) -> Result<(DenseMatrix, Vec<f64>)> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("matrix dimensions must be positive"));
    }
    let r = m.min(n);
    let sigma = spec.values(r)?;
    let u = orth(&gaussian_matrix(m, r, rng))?;
    let v = orth(&gaussian_matrix(n, r, rng))?;
    let a = mul_nt(&u.scale_columns(&sigma), &v)?;
    Ok((a, sigma))
}

/// Plain-text sidecar, one value per line in round-trip precision.
pub fn write_spectrum(path: impl AsRef<Path>, sigma: &[f64]) -> Result<()> {
    let mut s = String::new();
    for v in sigma {
        writeln!(s, "{v:e}").unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_spectrum(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    let mut offset = 0u64;
    for line in text.lines() {
        let t = line.trim();
        if !t.is_empty() {
            let v: f64 = t.parse().map_err(|_| Error::Format {
                path: path.to_path_buf(),
                offset,
                msg: format!("not a number: '{t}'"),
            })?;
            out.push(v);
        }
        offset += line.len() as u64 + 1;
    }
    Ok(out)
}
