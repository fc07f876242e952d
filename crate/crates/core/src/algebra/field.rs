//! GF(2^8) arithmetic backed by log/antilog tables.
//!
//! A [`Field`] is built once per reducing polynomial and cached for the
//! lifetime of the process, so codes and matrices can hold a
//! `&'static Field`. Construction cross-checks every table product against
//! plain shift-and-reduce multiplication before the field is handed out.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Sub, SubAssign};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// x^8 + x^4 + x^3 + x^2 + 1.
pub const DEFAULT_POLY: u16 = 0x11D;

/// One element of GF(2^8).
///
/// Addition does not depend on the reducing polynomial, so it is exposed
/// through the standard operators. Multiplication goes through a [`Field`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Gf(pub u8);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

impl From<u8> for Gf {
    fn from(v: u8) -> Self {
        Gf(v)
    }
}

impl Add for Gf {
    type Output = Gf;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf) -> Gf {
        Gf(self.0 ^ rhs.0)
    }
}

impl Sub for Gf {
    type Output = Gf;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Gf) -> Gf {
        Gf(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Gf) {
        self.0 ^= rhs.0;
    }
}

impl SubAssign for Gf {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn sub_assign(&mut self, rhs: Gf) {
        self.0 ^= rhs.0;
    }
}

/// Polynomial product of `a` and `b` reduced modulo `poly`, one bit at a time.
pub fn mul_shift_reduce(poly: u16, a: u8, b: u8) -> u8 {
    let mut acc: u16 = 0;
    let mut a = a as u16;
    let mut b = b;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & 0x100 != 0 {
            a ^= poly;
        }
    }
    acc as u8
}

/// GF(2^8) defined by a degree-8 reducing polynomial.
pub struct Field {
    poly: u16,
    generator: u8,
    // exp is doubled so log(a) + log(b) never needs a reduction.
    exp: [u8; 510],
    log: [u8; 256],
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("poly", &format_args!("{:#05x}", self.poly))
            .field("generator", &format_args!("{:#04x}", self.generator))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.poly == other.poly
    }
}

impl Eq for Field {}

impl Field {
    /// Builds the tables for `poly`.
    ///
    /// `poly` must have degree exactly 8 and be irreducible; the smallest
    /// element of multiplicative order 255 is used as the table generator.
    pub fn new(poly: u16) -> Result<Field, AlgebraError> {
        if poly & 0x100 == 0 || poly > 0x1FF {
            return Err(AlgebraError::InvalidPolynomial(poly));
        }
        let generator = (2..=255u8)
            .find(|&g| multiplicative_order(poly, g) == 255)
            .ok_or(AlgebraError::InvalidPolynomial(poly))?;

        let mut exp = [0u8; 510];
        let mut log = [0u8; 256];
        let mut x = 1u8;
        for (i, slot) in exp.iter_mut().take(255).enumerate() {
            *slot = x;
            log[x as usize] = i as u8;
            x = mul_shift_reduce(poly, x, generator);
        }
        for i in 255..510 {
            exp[i] = exp[i - 255];
        }
        let field = Field {
            poly,
            generator,
            exp,
            log,
        };

        for a in 0..=255u8 {
            for b in 0..=255u8 {
                if field.mul(Gf(a), Gf(b)).0 != mul_shift_reduce(poly, a, b) {
                    return Err(AlgebraError::TableMismatch { poly, a, b });
                }
            }
        }
        Ok(field)
    }

    /// Cached field for `poly`. Tables are built on first use.
    pub fn get(poly: u16) -> Result<&'static Field, AlgebraError> {
        static CACHE: OnceLock<Mutex<HashMap<u16, &'static Field>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(f) = guard.get(&poly) {
            return Ok(f);
        }
        let field: &'static Field = Box::leak(Box::new(Field::new(poly)?));
        guard.insert(poly, field);
        Ok(field)
    }

    /// The field over [`DEFAULT_POLY`].
    pub fn default_field() -> &'static Field {
        Field::get(DEFAULT_POLY).expect("default polynomial is primitive")
    }

    pub fn poly(&self) -> u16 {
        self.poly
    }

    pub fn generator(&self) -> Gf {
        Gf(self.generator)
    }

    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.0 == 0 || b.0 == 0 {
            return Gf::ZERO;
        }
        let l = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        Gf(self.exp[l])
    }

    pub fn inv(&self, a: Gf) -> Result<Gf, AlgebraError> {
        if a.is_zero() {
            return Err(AlgebraError::ZeroInverse);
        }
        let l = self.log[a.0 as usize] as usize;
        Ok(Gf(self.exp[(255 - l) % 255]))
    }

    pub fn div(&self, a: Gf, b: Gf) -> Result<Gf, AlgebraError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` for any signed exponent. `pow(a, 0) = 1`, including `a = 0`.
    pub fn pow(&self, a: Gf, e: i64) -> Result<Gf, AlgebraError> {
        if e == 0 {
            return Ok(Gf::ONE);
        }
        if a.is_zero() {
            return if e < 0 {
                Err(AlgebraError::ZeroInverse)
            } else {
                Ok(Gf::ZERO)
            };
        }
        let l = self.log[a.0 as usize] as i64;
        let idx = (l * e).rem_euclid(255) as usize;
        Ok(Gf(self.exp[idx]))
    }

    /// Dot product of two equal-length slices.
    #[inline]
    pub fn dot(&self, a: &[Gf], b: &[Gf]) -> Gf {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(Gf::ZERO, |acc, (&x, &y)| acc + self.mul(x, y))
    }

    /// `dst += c * src`, elementwise.
    #[inline]
    pub fn axpy(&self, dst: &mut [Gf], c: Gf, src: &[Gf]) {
        if c.is_zero() {
            return;
        }
        for (d, &s) in dst.iter_mut().zip(src) {
            *d += self.mul(c, s);
        }
    }
}

fn multiplicative_order(poly: u16, g: u8) -> usize {
    let mut x = g;
    for order in 1..=255 {
        if x == 1 {
            return order;
        }
        x = mul_shift_reduce(poly, x, g);
        if x == 0 {
            return 0;
        }
    }
    0
}
