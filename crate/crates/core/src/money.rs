//! Integer-cent money.
//!
//! Every cost that leaves a pricing function is carried as whole cents so
//! that roll-ups (decile → country → group → global) are exact sums.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

/// An amount of 2020 US dollars, stored as a signed count of cents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cents(pub i64);

impl Cents {
    pub const ZERO: Cents = Cents(0);

    /// Rounds a dollar amount to the nearest cent (half away from zero).
    pub fn from_usd(usd: f64) -> Cents {
        debug_assert!(usd.is_finite(), "non-finite money amount {usd}");
        Cents((usd * 100.0).round() as i64)
    }

    pub fn usd(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl Add for Cents {
    type Output = Cents;
    fn add(self, rhs: Cents) -> Cents {
        Cents(self.0 + rhs.0)
    }
}

impl AddAssign for Cents {
    fn add_assign(&mut self, rhs: Cents) {
        self.0 += rhs.0;
    }
}

impl Sub for Cents {
    type Output = Cents;
    fn sub(self, rhs: Cents) -> Cents {
        Cents(self.0 - rhs.0)
    }
}

impl Mul<u64> for Cents {
    type Output = Cents;
    fn mul(self, rhs: u64) -> Cents {
        Cents(self.0 * rhs as i64)
    }
}

impl Sum for Cents {
    fn sum<I: Iterator<Item = Cents>>(iter: I) -> Cents {
        iter.fold(Cents::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Cents> for Cents {
    fn sum<I: Iterator<Item = &'a Cents>>(iter: I) -> Cents {
        iter.copied().sum()
    }
}

/// Formats as a plain decimal dollar amount, e.g. `-12.05`.
impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

/// Splits `total` into parts proportional to `weights` using the
/// largest-remainder method. Parts always sum to `total` exactly.
///
/// Ties in the fractional remainder go to the lower index. If every weight is
/// zero the whole total is returned in a single part at index 0 (or an empty
/// vector for empty input).
pub fn apportion(total: Cents, weights: &[Cents]) -> Vec<Cents> {
    if weights.is_empty() {
        return Vec::new();
    }
    let denom: i128 = weights.iter().map(|w| w.0.max(0) as i128).sum();
    if denom == 0 {
        let mut out = vec![Cents::ZERO; weights.len()];
        out[0] = total;
        return out;
    }
    let t = total.0 as i128;
    let mut parts = Vec::with_capacity(weights.len());
    let mut remainders = Vec::with_capacity(weights.len());
    for (i, w) in weights.iter().enumerate() {
        let num = t * w.0.max(0) as i128;
        let q = num.div_euclid(denom);
        parts.push(q);
        remainders.push((num.rem_euclid(denom), i));
    }
    let mut left = t - parts.iter().sum::<i128>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().cycle() {
        if left <= 0 {
            break;
        }
        parts[i] += 1;
        left -= 1;
    }
    parts.into_iter().map(|p| Cents(p as i64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_is_exact() {
        assert_eq!(Cents(0).to_string(), "0.00");
        assert_eq!(Cents(5).to_string(), "0.05");
        assert_eq!(Cents(123_456).to_string(), "1234.56");
        assert_eq!(Cents(-1_205).to_string(), "-12.05");
    }

    #[test]
    fn from_usd_rounds_to_nearest_cent() {
        assert_eq!(Cents::from_usd(16.666_666), Cents(1667));
        assert_eq!(Cents::from_usd(0.004), Cents(0));
        assert_eq!(Cents::from_usd(51_600.0), Cents(5_160_000));
    }

    #[test]
    fn apportion_simple_split() {
        let parts = apportion(Cents(100), &[Cents(1), Cents(1), Cents(1)]);
        assert_eq!(parts, vec![Cents(34), Cents(33), Cents(33)]);
    }

    #[test]
    fn apportion_zero_weights() {
        assert_eq!(apportion(Cents(0), &[Cents(0), Cents(0)]), vec![Cents(0), Cents(0)]);
    }

    proptest! {
        #[test]
        fn apportion_conserves_total(
            total in 0i64..10_000_000_000,
            weights in proptest::collection::vec(0i64..1_000_000_000, 1..20),
        ) {
            let w: Vec<Cents> = weights.into_iter().map(Cents).collect();
            let parts = apportion(Cents(total), &w);
            prop_assert_eq!(parts.iter().sum::<Cents>(), Cents(total));
            prop_assert!(parts.iter().all(|p| p.0 >= 0));
        }
    }
}
