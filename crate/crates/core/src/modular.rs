//! Arithmetic in `Z/nZ` for 64-bit moduli.
//!
//! Products go through `u128`, so no operation here can overflow for any
//! modulus that fits in a `u64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An odd modulus `n >= 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(n: u64) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidModulus(n));
        }
        Ok(Modulus(n))
    }

    /// Like [`Modulus::new`], but additionally requires `n` to be prime.
    pub fn prime(n: u64) -> Result<Self> {
        let m = Modulus::new(n)?;
        if !is_prime(n) {
            return Err(Error::NotPrime(n));
        }
        Ok(m)
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn is_prime(self) -> bool {
        is_prime(self.0)
    }

    pub fn residue(self, value: u64) -> Residue {
        Residue {
            value: value % self.0,
            modulus: self,
        }
    }

    /// Reduces a signed integer into `[0, n)`.
    pub fn residue_i64(self, value: i64) -> Residue {
        let n = self.0 as i128;
        let v = (value as i128).rem_euclid(n) as u64;
        Residue {
            value: v,
            modulus: self,
        }
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.0 as u128) as u64
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        let n = self.0;
        let (a, b) = (a % n, b % n);
        if a >= b {
            a - b
        } else {
            n - (b - a)
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    pub fn pow(self, base: u64, mut exp: u64) -> u64 {
        let mut result = 1 % self.0;
        let mut base = base % self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        result
    }

    /// Inverse via the extended Euclidean algorithm, so composite moduli work too.
    pub fn inv(self, a: u64) -> Result<u64> {
        let n = self.0 as i128;
        let (mut old_r, mut r) = ((a % self.0) as i128, n);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        if old_r != 1 {
            return Err(Error::NotInvertible {
                value: a % self.0,
                modulus: self.0,
            });
        }
        Ok(old_s.rem_euclid(n) as u64)
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;

    fn try_from(n: u64) -> Result<Self> {
        Modulus::new(n)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

impl std::fmt::Display for Modulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// An element of `Z/nZ`, tagged with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    value: u64,
    modulus: Modulus,
}

impl Residue {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: Residue) -> Result<Modulus> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus.0, other.modulus.0));
        }
        Ok(self.modulus)
    }
}

impl std::fmt::Display for Residue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

pub fn mod_add(a: Residue, b: Residue) -> Result<Residue> {
    let m = a.check(b)?;
    Ok(m.residue(m.add(a.value, b.value)))
}

pub fn mod_sub(a: Residue, b: Residue) -> Result<Residue> {
    let m = a.check(b)?;
    Ok(m.residue(m.sub(a.value, b.value)))
}

pub fn mod_mul(a: Residue, b: Residue) -> Result<Residue> {
    let m = a.check(b)?;
    Ok(m.residue(m.mul(a.value, b.value)))
}

/// Errors with [`Error::NotInvertible`] when `gcd(a, n) != 1`; for prime `n`
/// that only happens for `a = 0`, which is how degenerate collisions surface.
pub fn mod_inv(a: Residue) -> Result<Residue> {
    let m = a.modulus;
    Ok(m.residue(m.inv(a.value)?))
}

/// Miller-Rabin with the first twelve primes as witnesses, which is exact for
/// every `n < 3.3 * 10^24` and therefore for all of `u64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }

    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    // n is odd and > 37 here, so Modulus::new cannot fail.
    let m = Modulus(n);

    'witness: for &a in &WITNESSES {
        let mut x = m.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = m.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(mut n: u64) -> u64 {
    if n <= 2 {
        return 2;
    }
    if n.is_multiple_of(2) {
        n += 1;
    }
    while !is_prime(n) {
        n += 2;
    }
    n
}

/// Multiplicative order of `a` modulo `m`, by stepping. Intended for the
/// small moduli used in the spectral and quadratic-form computations.
pub fn multiplicative_order(a: u64, m: Modulus) -> Result<u64> {
    m.inv(a)?;
    let n = m.get();
    let a = a % n;
    let mut x = a;
    let mut k = 1;
    while x != 1 {
        x = m.mul(x, a);
        k += 1;
    }
    Ok(k)
}

/// 2-adic valuation of a nonzero integer (`u(0)` is reported as 0).
pub fn two_adic_valuation(l: i64) -> u32 {
    if l == 0 {
        0
    } else {
        l.unsigned_abs().trailing_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(v: u64, n: u64) -> Residue {
        Modulus::new(n).unwrap().residue(v)
    }

    #[test]
    fn add_examples() {
        assert_eq!(mod_add(r(3, 5), r(4, 5)).unwrap().value(), 2);
        assert_eq!(mod_add(r(0, 1009), r(77, 1009)).unwrap().value(), 77);
        assert_eq!(mod_add(r(1008, 1009), r(1, 1009)).unwrap().value(), 0);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(mod_mul(r(3, 11), r(4, 11)).unwrap().value(), 1);
        assert_eq!(mod_mul(r(1, 1009), r(500, 1009)).unwrap().value(), 500);
    }

    #[test]
    fn mismatched_moduli_are_rejected() {
        assert_eq!(mod_add(r(1, 5), r(1, 7)), Err(Error::ModulusMismatch(5, 7)));
        assert!(mod_mul(r(1, 5), r(1, 7)).is_err());
    }

    #[test]
    fn inv_examples() {
        assert_eq!(mod_inv(r(4, 11)).unwrap().value(), 3);
        assert_eq!(mod_inv(r(1, 1009)).unwrap().value(), 1);
        for n in [3u64, 5, 101, 1009, 1_000_003] {
            assert_eq!(mod_inv(r(2, n)).unwrap().value(), n.div_ceil(2));
        }
        assert!(matches!(
            mod_inv(r(0, 11)),
            Err(Error::NotInvertible {
                value: 0,
                modulus: 11
            })
        ));
        assert!(mod_inv(r(3, 9)).is_err());
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(101));
        assert!(is_prime(1009));
        assert!(!is_prime(1001));
        assert!(!is_prime(1));
        assert!(is_prime(2));
        // Strong pseudoprime to bases 2..=37 would need n > 3.3e24.
        assert!(!is_prime(3_215_031_751));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(18_446_744_073_709_551_615));
    }

    #[test]
    fn primality_matches_trial_division_below_one_million() {
        let limit = 1_000_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < limit {
            if sieve[i] {
                let mut j = i * i;
                while j < limit {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        for (n, &expected) in sieve.iter().enumerate() {
            assert_eq!(is_prime(n as u64), expected, "n = {n}");
        }
    }

    #[test]
    fn modulus_validation() {
        assert!(Modulus::new(1).is_err());
        assert!(Modulus::new(10).is_err());
        assert!(Modulus::new(9).is_ok());
        assert_eq!(Modulus::prime(9), Err(Error::NotPrime(9)));
        assert!(Modulus::prime(101).is_ok());
    }

    #[test]
    fn order_and_valuation() {
        let m = Modulus::new(101).unwrap();
        assert_eq!(multiplicative_order(2, m).unwrap(), 100);
        assert_eq!(
            multiplicative_order(2, Modulus::new(7).unwrap()).unwrap(),
            3
        );
        assert_eq!(two_adic_valuation(4), 2);
        assert_eq!(two_adic_valuation(-12), 2);
        assert_eq!(two_adic_valuation(-1), 0);
        assert_eq!(next_prime(1000), 1009);
    }

    #[test]
    fn signed_reduction() {
        let m = Modulus::new(11).unwrap();
        assert_eq!(m.residue_i64(-1).value(), 10);
        assert_eq!(m.residue_i64(-23).value(), 10);
        assert_eq!(m.sub(3, 10), 4);
    }

    /// Double-and-add product, never forming anything wider than `2n`.
    fn shift_add_mulmod(a: u64, b: u64, n: u64) -> u64 {
        let (mut a, mut b) = (a % n, b % n);
        let mut acc: u64 = 0;
        let add = |x: u64, y: u64| -> u64 {
            let (s, carry) = x.overflowing_add(y);
            if carry || s >= n {
                s.wrapping_sub(n)
            } else {
                s
            }
        };
        while b > 0 {
            if b & 1 == 1 {
                acc = add(acc, a);
            }
            a = add(a, a);
            b >>= 1;
        }
        acc
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn mul_matches_wide_oracle(a in 0u64..(1 << 63), b in 0u64..(1 << 63), n in 3u64..u64::MAX) {
            let n = n | 1;
            let m = Modulus::new(n).unwrap();
            prop_assert_eq!(m.mul(a, b), shift_add_mulmod(a, b, n));
        }
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(a in 1u64..1_000_003) {
            let m = Modulus::prime(1_000_003).unwrap();
            let x = m.residue(a);
            let inv = mod_inv(x).unwrap();
            prop_assert_eq!(mod_mul(x, inv).unwrap().value(), 1);
        }
    }
}
