//! Closed-form capacities and costs.
//!
//! Every calculator is generic over a [`CapacityScalar`]: instantiate with
//! [`Rate`] for exact comparisons against measured transcripts, or with
//! `f64` ([`ApproxRate`](crate::ApproxRate)) for display.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};
use crate::Rate;

/// Scalars the calculators can be evaluated in.
pub trait CapacityScalar: Num + Clone + PartialOrd + FromPrimitive + Debug {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar")
    }
}

impl<T: Num + Clone + PartialOrd + FromPrimitive + Debug> CapacityScalar for T {}

fn ratio<T: CapacityScalar>(num: u64, den: u64) -> T {
    T::from_count(num) / T::from_count(den)
}

/// `(1 + x + x^2 + ... + x^(k-1))^(-1)`.
fn inverse_geometric<T: CapacityScalar>(x: T, k: u64) -> T {
    let mut sum = T::zero();
    let mut term = T::one();
    for _ in 0..k {
        sum = sum + term.clone();
        term = term * x.clone();
    }
    T::one() / sum
}

fn require(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameters(what()))
    }
}

/// Replicated-storage PIR capacity `(1 + 1/N + ... + 1/N^(K-1))^(-1)`.
pub fn c_pir<T: CapacityScalar>(n: u64, k: u64) -> Result<T> {
    require(n >= 1 && k >= 1, || format!("need N >= 1, K >= 1 (got N={n}, K={k})"))?;
    Ok(inverse_geometric(ratio(1, n), k))
}

/// Symmetric PIR capacity `1 - 1/N`.
pub fn c_spir<T: CapacityScalar>(n: u64) -> Result<T> {
    require(n >= 2, || format!("need N >= 2 (got N={n})"))?;
    Ok(T::one() - ratio(1, n))
}

/// PIR from `(N, M)` MDS-coded storage.
pub fn c_coded<T: CapacityScalar>(n: u64, k: u64, m: u64) -> Result<T> {
    require(n >= 1 && k >= 1, || format!("need N >= 1, K >= 1 (got N={n}, K={k})"))?;
    require((1..=n).contains(&m), || format!("need 1 <= M <= N (got M={m}, N={n})"))?;
    Ok(inverse_geometric(ratio(m, n), k))
}

/// PIR with up to `T` colluding databases.
pub fn c_colluding<T: CapacityScalar>(n: u64, k: u64, t: u64) -> Result<T> {
    require(n >= 1 && k >= 1, || format!("need N >= 1, K >= 1 (got N={n}, K={k})"))?;
    require((1..=n).contains(&t), || format!("need 1 <= T <= N (got T={t}, N={n})"))?;
    Ok(inverse_geometric(ratio(t, n), k))
}

/// PIR with `B` Byzantine databases and `T`-collusion: only `N - 2B`
/// databases are useful, scaled by `(N - 2B) / N`.
pub fn c_byzantine<T: CapacityScalar>(n: u64, k: u64, t: u64, b: u64) -> Result<T> {
    require(k >= 1, || format!("need K >= 1 (got K={k})"))?;
    require(n > 2 * b, || format!("need N > 2B (got N={n}, B={b})"))?;
    let useful = n - 2 * b;
    require((1..=useful).contains(&t), || {
        format!("need 1 <= T <= N - 2B (got T={t}, N - 2B={useful})")
    })?;
    Ok(ratio::<T>(useful, n) * inverse_geometric(ratio(t, useful), k))
}

fn mmpir_high<T: CapacityScalar>(n: u64, k: u64, p: u64) -> T {
    T::one() / (T::one() + ratio(k - p, p * n))
}

fn mmpir_low<T: CapacityScalar>(n: u64, k: u64, p: u64) -> T {
    let inv_n: T = ratio(1, n);
    let mut pow = T::one();
    for _ in 0..k / p {
        pow = pow * inv_n.clone();
    }
    (T::one() - inv_n) / (T::one() - pow)
}

/// Multi-message PIR: retrieve `P` of `K` messages at once.
///
/// Characterized for `P >= K/2`, and for `P <= K/2` when `P` divides `K`.
/// At `P = K/2` both closed forms apply; their agreement is checked in exact
/// arithmetic before returning.
pub fn c_mmpir<T: CapacityScalar>(n: u64, k: u64, p: u64) -> Result<T> {
    require(n >= 2, || format!("need N >= 2 (got N={n})"))?;
    require(p >= 1 && p <= k, || format!("need 1 <= P <= K (got P={p}, K={k})"))?;
    if 2 * p == k {
        let hi: Rate = mmpir_high(n, k, p);
        let lo: Rate = mmpir_low(n, k, p);
        assert_eq!(hi, lo, "multi-message branches disagree at P = K/2");
    }
    if 2 * p >= k {
        Ok(mmpir_high(n, k, p))
    } else if k.is_multiple_of(p) {
        Ok(mmpir_low(n, k, p))
    } else {
        Err(Error::UncharacterizedRegime { k, p })
    }
}

/// Linear rate-distortion law for PRUW: `C_R = (1 - D_R) C_1`,
/// `C_W = (1 - D_W) C_2`.
pub fn rd_costs<T: CapacityScalar>(d_r: T, d_w: T, c1: T, c2: T) -> Result<(T, T)> {
    let in_unit = |d: &T| *d >= T::zero() && *d <= T::one();
    require(in_unit(&d_r) && in_unit(&d_w), || {
        format!("distortion budgets must lie in [0, 1] (got {d_r:?}, {d_w:?})")
    })?;
    Ok(((T::one() - d_r) * c1, (T::one() - d_w) * c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn r(n: i64, d: i64) -> Rate {
        Rate::new(n.into(), d.into())
    }

    #[test]
    fn pir_examples() {
        assert_eq!(c_pir::<Rate>(2, 2).unwrap(), r(2, 3));
        assert_eq!(c_pir::<Rate>(2, 3).unwrap(), r(4, 7));
        assert_eq!(c_pir::<Rate>(3, 3).unwrap(), r(9, 13));
        for n in 1..6 {
            assert!(c_pir::<Rate>(n, 1).unwrap().is_one());
        }
        assert!(c_pir::<Rate>(0, 1).is_err());
        assert!(c_pir::<Rate>(2, 0).is_err());
    }

    #[test]
    fn generic_scalar_agrees_with_exact() {
        for n in 1..6 {
            for k in 1..6 {
                let exact = crate::rate_to_f64(&c_pir::<Rate>(n, k).unwrap());
                let approx = c_pir::<f64>(n, k).unwrap();
                assert!((exact - approx).abs() < 1e-12);
                let approx32 = c_pir::<f32>(n, k).unwrap();
                assert!((exact as f32 - approx32).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn spir_examples() {
        assert_eq!(c_spir::<Rate>(2).unwrap(), r(1, 2));
        assert!(c_spir::<Rate>(1).is_err());
        for n in 2..=6 {
            for k in 1..=6 {
                assert!(c_spir::<Rate>(n).unwrap() < c_pir::<Rate>(n, k).unwrap());
            }
        }
        let gap = c_pir::<Rate>(3, 40).unwrap() - c_spir::<Rate>(3).unwrap();
        assert!(gap > Rate::from_integer(0.into()));
        assert!(gap < r(1, 1_000_000_000_000_000));
    }

    #[test]
    fn coded_colluding_byzantine_examples() {
        assert_eq!(c_coded::<Rate>(4, 2, 2).unwrap(), r(2, 3));
        assert!(c_coded::<Rate>(4, 1, 3).unwrap().is_one());
        assert!(c_coded::<Rate>(2, 2, 3).is_err());

        assert_eq!(c_colluding::<Rate>(4, 2, 2).unwrap(), c_pir::<Rate>(2, 2).unwrap());
        assert_eq!(c_colluding::<Rate>(3, 4, 3).unwrap(), r(1, 4));
        assert!(c_colluding::<Rate>(3, 2, 4).is_err());

        assert_eq!(c_byzantine::<Rate>(6, 2, 1, 1).unwrap(), r(8, 15));
        assert_eq!(c_byzantine::<Rate>(5, 1, 1, 2).unwrap(), r(1, 5));
        assert!(c_byzantine::<Rate>(4, 2, 1, 2).is_err());
    }

    #[test]
    fn mmpir_examples() {
        assert_eq!(c_mmpir::<Rate>(2, 4, 2).unwrap(), r(2, 3));
        assert_eq!(c_mmpir::<Rate>(2, 4, 1).unwrap(), r(8, 15));
        assert_eq!(c_mmpir::<Rate>(2, 4, 1).unwrap(), c_pir::<Rate>(2, 4).unwrap());
        assert!(matches!(
            c_mmpir::<Rate>(2, 5, 2),
            Err(Error::UncharacterizedRegime { k: 5, p: 2 })
        ));
        // both branches agree wherever P = K/2
        for n in 2..6 {
            for p in 1..5 {
                assert_eq!(
                    mmpir_high::<Rate>(n, 2 * p, p),
                    mmpir_low::<Rate>(n, 2 * p, p)
                );
            }
        }
    }

    #[test]
    fn rd_examples() {
        let (cr, cw) = rd_costs(r(0, 1), r(0, 1), r(2, 1), r(3, 1)).unwrap();
        assert_eq!((cr, cw), (r(2, 1), r(3, 1)));
        let (cr, _) = rd_costs(r(1, 1), r(0, 1), r(2, 1), r(3, 1)).unwrap();
        assert_eq!(cr, r(0, 1));
        let (cr, _) = rd_costs(r(1, 4), r(0, 1), r(2, 1), r(2, 1)).unwrap();
        assert_eq!(cr, r(3, 2));
        assert!(rd_costs(r(5, 4), r(0, 1), r(1, 1), r(1, 1)).is_err());
        assert!(rd_costs(-0.1f64, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn monotonicity() {
        for n in 1..=8u64 {
            for k in 1..=8u64 {
                let c = c_pir::<Rate>(n, k).unwrap();
                if k < 8 {
                    assert!(c_pir::<Rate>(n, k + 1).unwrap() < c);
                }
                if n < 8 && k > 1 {
                    assert!(c_pir::<Rate>(n + 1, k).unwrap() > c);
                }
            }
        }
    }
}
