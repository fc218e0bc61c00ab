//! Exact points with rational coordinates sharing one denominator.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_integer::Integer;
use num_rational::Ratio;

/// Rational scalar used for lattice scales and exact second moments.
pub type Rational = Ratio<i128>;

/// A point of R^n whose coordinates are `num[i] / den`.
///
/// The representation is canonical (`den > 0`, and the gcd of `den` with all
/// numerators is 1), so structural equality and hashing coincide with
/// equality of the underlying real points. The derived `Ord` is an arbitrary
/// but total order used for deterministic maps; use
/// [`LatticePoint::cmp_lex`] to compare coordinates numerically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    num: Vec<i64>,
    den: i64,
}

impl LatticePoint {
    pub fn new(num: Vec<i64>, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let mut pt = LatticePoint { num, den };
        pt.normalize();
        pt
    }

    pub fn zero(n: usize) -> Self {
        LatticePoint {
            num: alloc::vec![0; n],
            den: 1,
        }
    }

    pub fn from_integers(coords: Vec<i64>) -> Self {
        LatticePoint { num: coords, den: 1 }
    }

    pub(crate) fn from_i128(num: Vec<i128>, den: i128) -> Self {
        let g = num.iter().fold(den, |g, &x| g.gcd(&x));
        let g = if den < 0 { -g } else { g };
        LatticePoint {
            num: num
                .into_iter()
                .map(|x| i64::try_from(x / g).expect("lattice coordinate overflow"))
                .collect(),
            den: i64::try_from(den / g).expect("lattice denominator overflow"),
        }
    }

    fn normalize(&mut self) {
        let mut g = self.den.abs();
        for &x in &self.num {
            g = g.gcd(&x);
        }
        if self.den < 0 {
            g = -g;
        }
        if g != 1 {
            for x in &mut self.num {
                *x /= g;
            }
            self.den /= g;
        }
    }

    pub fn dim(&self) -> usize {
        self.num.len()
    }

    pub fn numerators(&self) -> &[i64] {
        &self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&x| x == 0)
    }

    pub fn coord(&self, i: usize) -> Rational {
        Rational::new(self.num[i] as i128, self.den as i128)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let d = self.den as f64;
        self.num.iter().map(|&x| x as f64 / d).collect()
    }

    /// Exact squared Euclidean norm.
    pub fn norm_sq(&self) -> Rational {
        let s: i128 = self.num.iter().map(|&x| x as i128 * x as i128).sum();
        Rational::new(s, self.den as i128 * self.den as i128)
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        self.combine(other, -1)
    }

    fn combine(&self, other: &LatticePoint, sign: i128) -> LatticePoint {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        if self.den == other.den {
            let num = self
                .num
                .iter()
                .zip(&other.num)
                .map(|(&a, &b)| a as i128 + sign * b as i128)
                .collect();
            return LatticePoint::from_i128(num, self.den as i128);
        }
        let l = (self.den as i128).lcm(&(other.den as i128));
        let fa = l / self.den as i128;
        let fb = l / other.den as i128;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(&a, &b)| a as i128 * fa + sign * b as i128 * fb)
            .collect();
        LatticePoint::from_i128(num, l)
    }

    pub fn neg(&self) -> LatticePoint {
        LatticePoint {
            num: self.num.iter().map(|&x| -x).collect(),
            den: self.den,
        }
    }

    /// Multiplies every coordinate by a rational factor.
    pub fn scaled(&self, factor: Rational) -> LatticePoint {
        let num = self
            .num
            .iter()
            .map(|&x| x as i128 * *factor.numer())
            .collect();
        LatticePoint::from_i128(num, self.den as i128 * *factor.denom())
    }

    /// Numeric lexicographic comparison of coordinates.
    pub fn cmp_lex(&self, other: &LatticePoint) -> Ordering {
        let (da, db) = (self.den as i128, other.den as i128);
        for (&a, &b) in self.num.iter().zip(&other.num) {
            match (a as i128 * db).cmp(&(b as i128 * da)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.dim().cmp(&other.dim())
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, &x) in self.num.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let r = Ratio::new(x, self.den);
            if *r.denom() == 1 {
                write!(f, "{}", r.numer())?;
            } else {
                write!(f, "{}/{}", r.numer(), r.denom())?;
            }
        }
        f.write_str(")")
    }
}
