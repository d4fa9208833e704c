//! Chern characters on P² and the Euler pairing.
//!
//! A class is stored as `(r, d, s)` with `ch = r + d·H + s·H²`. The degree-two
//! part is kept as an exact rational.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::rational::Ratio;
use num::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = Ratio<i64>;

/// Builds `n/d` in lowest terms.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Serializes a rational as `[num, den]`.
pub fn ser_rational<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(x.numer())?;
    t.serialize_element(x.denom())?;
    t.end()
}

/// Reads a rational from `[num, den]` or a bare integer.
pub fn de_rational<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Pair(i64, i64),
        Int(i64),
    }
    match Repr::deserialize(d)? {
        Repr::Pair(_, 0) => Err(serde::de::Error::custom("zero denominator")),
        Repr::Pair(n, m) => Ok(Rational::new(n, m)),
        Repr::Int(n) => Ok(Rational::from_integer(n)),
    }
}

/// Chern character `(r, d, s)` of a class on P².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChernP2 {
    pub r: i64,
    pub d: i64,
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub s: Rational,
}

impl PartialOrd for ChernP2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ChernP2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.r, self.d, self.s).cmp(&(other.r, other.d, other.s))
    }
}

impl ChernP2 {
    pub fn new(r: i64, d: i64, s: Rational) -> Self {
        ChernP2 { r, d, s }
    }

    pub fn zero() -> Self {
        ChernP2::new(0, 0, Rational::zero())
    }

    /// `ch(O(k))`.
    pub fn line(k: i64) -> Self {
        ChernP2::new(1, k, q(k * k, 2))
    }

    /// `ch(Ω(k))`; `Ω` itself is `(2, -3, 3/2)`.
    pub fn omega(k: i64) -> Self {
        twist(&ChernP2::new(2, -3, q(3, 2)), k)
    }

    /// `ch(T(k))`; note `T ≅ Ω(3)` on P².
    pub fn tangent(k: i64) -> Self {
        ChernP2::omega(k + 3)
    }

    /// Slope `d/r`; fails on rank zero.
    pub fn slope(&self) -> Result<Rational, Error> {
        if self.r == 0 {
            return Err(Error::InvalidClass("slope of a rank-zero class".into()));
        }
        Ok(q(self.d, self.r))
    }

    /// `c2 = d²/2 - s`, integral for classes of sheaves.
    pub fn c2(&self) -> Rational {
        Rational::from_integer(self.d * self.d) / 2 - self.s
    }

    /// Integrality test: `c2` must be an integer.
    pub fn is_integral(&self) -> bool {
        self.c2().is_integer()
    }

    pub fn scale(&self, n: i64) -> Self {
        ChernP2::new(self.r * n, self.d * n, self.s * n)
    }
}

impl Add for ChernP2 {
    type Output = ChernP2;
    fn add(self, o: ChernP2) -> ChernP2 {
        ChernP2::new(self.r + o.r, self.d + o.d, self.s + o.s)
    }
}

impl Sub for ChernP2 {
    type Output = ChernP2;
    fn sub(self, o: ChernP2) -> ChernP2 {
        ChernP2::new(self.r - o.r, self.d - o.d, self.s - o.s)
    }
}

impl Neg for ChernP2 {
    type Output = ChernP2;
    fn neg(self) -> ChernP2 {
        ChernP2::new(-self.r, -self.d, -self.s)
    }
}

impl Mul for ChernP2 {
    type Output = ChernP2;
    fn mul(self, o: ChernP2) -> ChernP2 {
        tensor(&self, &o)
    }
}

impl fmt::Display for ChernP2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.r, self.d, self.s)
    }
}

/// Product of Chern characters.
pub fn tensor(a: &ChernP2, b: &ChernP2) -> ChernP2 {
    ChernP2::new(
        a.r * b.r,
        a.r * b.d + b.r * a.d,
        b.s * a.r + a.s * b.r + Rational::from_integer(a.d * b.d),
    )
}

pub fn dual(a: &ChernP2) -> ChernP2 {
    ChernP2::new(a.r, -a.d, a.s)
}

/// `a ⊗ O(k)`.
pub fn twist(a: &ChernP2, k: i64) -> ChernP2 {
    ChernP2::new(
        a.r,
        a.d + a.r * k,
        a.s + Rational::from_integer(a.d * k) + q(a.r * k * k, 2),
    )
}

/// Riemann-Roch on P²: `χ = r + 3d/2 + s`.
pub fn euler_char(a: &ChernP2) -> Rational {
    Rational::from_integer(a.r) + q(3 * a.d, 2) + a.s
}

/// `χ(a, b) = χ(a^∨ ⊗ b)`.
pub fn euler_p2(a: &ChernP2, b: &ChernP2) -> Rational {
    euler_char(&tensor(&dual(a), b))
}

/// Integer version of [`euler_p2`]; fails if the pairing is not integral.
pub fn euler_p2_int(a: &ChernP2, b: &ChernP2) -> Result<i64, Error> {
    let x = euler_p2(a, b);
    if !x.is_integer() {
        return Err(Error::InvalidClass(format!("non-integral pairing {x} of {a} and {b}")));
    }
    Ok(x.to_integer())
}

/// Degree-two part of an exceptional class of rank `r` and degree `d`.
pub fn exceptional_ch2(r: i64, d: i64) -> Result<Rational, Error> {
    if r <= 0 {
        return Err(Error::InvalidClass(format!("rank {r} is not positive")));
    }
    Ok(q(1 + d * d - r * r, 2 * r))
}

/// Class with `χ(c, c) = 1`.
pub fn is_exceptional_class(c: &ChernP2) -> bool {
    c.r > 0 && euler_p2(c, c).is_one()
}

/// Sum of a slice of classes with integer multiplicities.
pub fn combine(terms: &[(i64, ChernP2)]) -> ChernP2 {
    terms.iter().fold(ChernP2::zero(), |acc, (n, c)| acc + c.scale(*n))
}

/// Readable name for line bundles and twists of `Ω`; `None` otherwise.
pub fn standard_name(c: &ChernP2) -> Option<String> {
    let paren = |base: &str, k: i64| {
        if k == 0 {
            base.to_string()
        } else {
            format!("{base}({k})")
        }
    };
    if c.r == 1 && *c == ChernP2::line(c.d) {
        return Some(paren("O", c.d));
    }
    if c.r == 2 && (c.d + 3) % 2 == 0 {
        let k = (c.d + 3) / 2;
        if *c == ChernP2::omega(k) {
            return Some(paren("Ω", k));
        }
    }
    None
}

/// Rational slope as `f64`, for display only.
pub fn approx(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Sign helper used when folding shifts into K-classes.
pub fn shift_sign(shift: i64) -> i64 {
    if shift.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Absolute value of a rational.
pub fn rabs(x: &Rational) -> Rational {
    x.abs()
}
