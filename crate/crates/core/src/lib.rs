//! A laboratory for information-theoretic private information retrieval.
//!
//! `pirlab` simulates replicated, non-colluding databases over a prime field
//! and runs the classical PIR schemes against them, together with their
//! symmetric (SPIR) variants, private read-update-write (PRUW) for
//! federated submodel learning, and permutation-based sparse PRUW. Every
//! run produces a transcript whose download/upload cost is accounted as an
//! exact rational and compared with the closed-form capacity of the
//! setting. The [`audit`] module checks the privacy claims of each scheme
//! by enumerating its randomness exhaustively.
//!
//! Module map:
//!
//! | module | contents |
//! |---|---|
//! | [`field`] | `F_q` arithmetic, symbol vectors, exact linear solves |
//! | [`randomness`] | seeded and exhaustive randomness sources |
//! | [`databank`] | databases, wire queries, transcripts, cost reports |
//! | [`pir`] | CGKS, residual, Sun–Jafar, Tian and leaky-symmetric PIR |
//! | [`spir`] | deterministic and probabilistic symmetric PIR |
//! | [`pruw`] | secret-shared read-update-write for submodels |
//! | [`sparsify`] | permuted sparse writes, popularity reads, leakage |
//! | [`capacity`] | capacity and cost formulas, generic over the scalar |
//! | [`audit`] | user/database privacy and one-time-pad checks |
//! | [`docsbook`] | executable worked examples |

pub mod audit;
pub mod capacity;
pub mod databank;
pub mod docsbook;
pub mod error;
pub mod field;
pub mod pir;
pub mod pruw;
pub mod randomness;
pub mod sparsify;
pub mod spir;

use num_bigint::BigInt;
use num_rational::Ratio;

pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec, SymbolVector};

/// Exact rational used for rates, costs, capacities and probabilities.
pub type Rate = Ratio<BigInt>;

/// Floating-point instantiation of the generic calculators, for display.
pub type ApproxRate = f64;

/// Renders a rational as `num/den`, keeping the denominator for integers.
pub fn rate_string(r: &Rate) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or a plain integer.
pub fn parse_rate(s: &str) -> Result<Rate> {
    let bad = || Error::InvalidParameters(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Rate::new(n, d))
}

/// Parses a decimal literal such as `0.25` exactly (no binary rounding).
pub fn parse_decimal(s: &str) -> Result<Rate> {
    let bad = || Error::InvalidParameters(format!("not a decimal: {s:?}"));
    let s = s.trim();
    if s.contains('/') {
        return parse_rate(s);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::from(0)
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rate::new(numer, denom);
    Ok(if neg { -r } else { r })
}

/// Nearest `f64` to an exact rational.
pub fn rate_to_f64(r: &Rate) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
