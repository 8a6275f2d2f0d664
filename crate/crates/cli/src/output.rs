use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use pirlab::{rate_string, Rate};
use serde::Serialize;

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Exact decimal expansion when the denominator divides a power of ten.
pub fn exact_decimal(r: &Rate) -> Option<String> {
    let mut d = r.denom().clone();
    let mut counts = [0usize; 2];
    for (i, p) in [2u32, 5].into_iter().enumerate() {
        let p = BigInt::from(p);
        while (&d % &p).is_zero() {
            d /= &p;
            counts[i] += 1;
        }
    }
    if !d.is_one() {
        return None;
    }
    let digits = counts[0].max(counts[1]);
    let scaled = r.numer() * BigInt::from(10).pow(digits as u32) / r.denom();
    let mut s = scaled.magnitude().to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{s}", "0".repeat(digits + 1 - s.len()));
        }
        s.insert(s.len() - digits, '.');
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    Some(if scaled.is_negative() { format!("-{s}") } else { s })
}

/// `num/den (decimal)` with ten decimal places for the decimal part.
pub fn rational_and_decimal(r: &Rate) -> String {
    let approx = r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN);
    format!("{} ({approx:.10})", rate_string(r))
}

/// Exact decimal if it exists, otherwise `num/den`.
pub fn compact(r: &Rate) -> String {
    exact_decimal(r).unwrap_or_else(|| rate_string(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rate {
        Rate::new(n.into(), d.into())
    }

    #[test]
    fn decimals() {
        assert_eq!(exact_decimal(&r(3, 2)).as_deref(), Some("1.5"));
        assert_eq!(exact_decimal(&r(2, 1)).as_deref(), Some("2"));
        assert_eq!(exact_decimal(&r(1, 40)).as_deref(), Some("0.025"));
        assert_eq!(exact_decimal(&r(-3, 4)).as_deref(), Some("-0.75"));
        assert_eq!(exact_decimal(&r(2, 3)), None);
        assert_eq!(compact(&r(2, 3)), "2/3");
        assert_eq!(rational_and_decimal(&r(2, 3)), "2/3 (0.6666666667)");
    }
}
