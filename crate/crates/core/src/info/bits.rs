use alloc::collections::BTreeMap;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use crate::point::Rational;

/// An exact quantity of bits: `Σ c_q · log2(q)` over primes `q` with
/// rational coefficients `c_q`.
///
/// Entropies of distributions with rational probabilities have exactly this
/// form, and since logarithms of distinct primes are linearly independent
/// over the rationals, two values are equal as real numbers iff their
/// coefficient maps are equal. Constant terms live on the prime 2.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct ExactBits {
    terms: BTreeMap<u64, Rational>,
}

impl ExactBits {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A rational number of bits.
    pub fn constant(c: Rational) -> Self {
        let mut out = Self::zero();
        out.add_term(2, c);
        out
    }

    /// `log2(x)` for a positive integer.
    pub fn log2_int(x: u128) -> Self {
        assert!(x > 0, "log of zero");
        let mut out = Self::zero();
        for (q, e) in factorize(x) {
            out.add_term(q, Rational::from_integer(e as i128));
        }
        out
    }

    /// `coef · log2(x)`.
    pub fn scaled_log2(x: u128, coef: Rational) -> Self {
        Self::log2_int(x).scale(coef)
    }

    fn add_term(&mut self, q: u64, c: Rational) {
        if c == Rational::from_integer(0) {
            return;
        }
        let e = self.terms.entry(q).or_insert_with(|| Rational::from_integer(0));
        *e += c;
        if *e == Rational::from_integer(0) {
            self.terms.remove(&q);
        }
    }

    pub fn scale(&self, c: Rational) -> Self {
        if c == Rational::from_integer(0) {
            return Self::zero();
        }
        ExactBits {
            terms: self.terms.iter().map(|(&q, &v)| (q, v * c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, Rational)> + '_ {
        self.terms.iter().map(|(&q, &c)| (q, c))
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&q, c)| {
                let cf = *c.numer() as f64 / *c.denom() as f64;
                if q == 2 {
                    cf
                } else {
                    cf * libm::log2(q as f64)
                }
            })
            .sum()
    }
}

impl Add for &ExactBits {
    type Output = ExactBits;
    fn add(self, rhs: &ExactBits) -> ExactBits {
        let mut out = self.clone();
        for (&q, &c) in &rhs.terms {
            out.add_term(q, c);
        }
        out
    }
}

impl Sub for &ExactBits {
    type Output = ExactBits;
    fn sub(self, rhs: &ExactBits) -> ExactBits {
        let mut out = self.clone();
        for (&q, &c) in &rhs.terms {
            out.add_term(q, -c);
        }
        out
    }
}

impl Add for ExactBits {
    type Output = ExactBits;
    fn add(self, rhs: ExactBits) -> ExactBits {
        &self + &rhs
    }
}

impl Sub for ExactBits {
    type Output = ExactBits;
    fn sub(self, rhs: ExactBits) -> ExactBits {
        &self - &rhs
    }
}

impl Neg for ExactBits {
    type Output = ExactBits;
    fn neg(self) -> ExactBits {
        self.scale(Rational::from_integer(-1))
    }
}

impl fmt::Debug for ExactBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (~{})", self.to_f64())
    }
}

/// Renders e.g. `3/2 - 1/3*log2(3)`.
impl fmt::Display for ExactBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&q, c)) in self.terms.iter().enumerate() {
            let neg = *c.numer() < 0;
            let mag = if neg { -*c } else { *c };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if q == 2 {
                write!(f, "{mag}")?;
            } else if mag == Rational::from_integer(1) {
                write!(f, "log2({q})")?;
            } else {
                write!(f, "{mag}*log2({q})")?;
            }
        }
        Ok(())
    }
}

fn factorize(mut x: u128) -> alloc::vec::Vec<(u64, u32)> {
    let mut out = alloc::vec::Vec::new();
    let mut d: u128 = 2;
    while d * d <= x {
        let mut e = 0;
        while x % d == 0 {
            x /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d as u64, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if x > 1 {
        out.push((u64::try_from(x).expect("prime factor fits in u64"), 1));
    }
    out
}
