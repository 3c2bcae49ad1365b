//! Scalar abstraction over f64 and arbitrary-precision floats.
//!
//! The pressure equation near the phase transition involves quantities like
//! 1 - e^{-p} with p far below the f64 ulp of 1, so the weight recursions
//! run over a small trait with a plain f64 backend and an astro-float
//! backend at a configurable mantissa width.

use astro_float::{BigFloat, Consts, RoundingMode};
use std::cell::RefCell;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Mantissa width for the weight-system arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F64,
    Bits(u32),
}

impl Precision {
    pub fn from_bits(bits: u32) -> Precision {
        if bits <= 53 {
            Precision::F64
        } else {
            Precision::Bits(bits)
        }
    }

    pub fn bits(&self) -> u32 {
        match self {
            Precision::F64 => 53,
            Precision::Bits(b) => *b,
        }
    }
}

/// Minimal scalar interface used by the weight recursions.
pub trait Real: Clone {
    fn of(x: f64, bits: u32) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn is_sign_nonpositive(&self) -> bool;
    fn lt(&self, o: &Self) -> bool;
}

impl Real for f64 {
    fn of(x: f64, _bits: u32) -> f64 {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &f64) -> f64 {
        self + o
    }
    fn sub(&self, o: &f64) -> f64 {
        self - o
    }
    fn mul(&self, o: &f64) -> f64 {
        self * o
    }
    fn div(&self, o: &f64) -> f64 {
        self / o
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn is_sign_nonpositive(&self) -> bool {
        *self <= 0.0
    }
    fn lt(&self, o: &f64) -> bool {
        self < o
    }
}

/// Arbitrary-precision scalar backed by astro-float.
#[derive(Debug, Clone)]
pub struct Mpf {
    v: BigFloat,
    bits: usize,
}

impl Real for Mpf {
    fn of(x: f64, bits: u32) -> Mpf {
        Mpf {
            v: BigFloat::from_f64(x, bits as usize),
            bits: bits as usize,
        }
    }

    fn to_f64(&self) -> f64 {
        mpf_to_f64(&self.v)
    }

    fn add(&self, o: &Mpf) -> Mpf {
        Mpf {
            v: self.v.add(&o.v, self.bits, RM),
            bits: self.bits,
        }
    }

    fn sub(&self, o: &Mpf) -> Mpf {
        Mpf {
            v: self.v.sub(&o.v, self.bits, RM),
            bits: self.bits,
        }
    }

    fn mul(&self, o: &Mpf) -> Mpf {
        Mpf {
            v: self.v.mul(&o.v, self.bits, RM),
            bits: self.bits,
        }
    }

    fn div(&self, o: &Mpf) -> Mpf {
        Mpf {
            v: self.v.div(&o.v, self.bits, RM),
            bits: self.bits,
        }
    }

    fn exp(&self) -> Mpf {
        CONSTS.with(|c| Mpf {
            v: self.v.exp(self.bits, RM, &mut c.borrow_mut()),
            bits: self.bits,
        })
    }

    fn ln(&self) -> Mpf {
        CONSTS.with(|c| Mpf {
            v: self.v.ln(self.bits, RM, &mut c.borrow_mut()),
            bits: self.bits,
        })
    }

    fn is_sign_nonpositive(&self) -> bool {
        self.v.is_negative() || self.v.is_zero()
    }

    fn lt(&self, o: &Mpf) -> bool {
        matches!(self.v.cmp(&o.v), Some(c) if c < 0)
    }
}

/// Round a BigFloat to the nearest f64 (0 on underflow, ±inf on overflow).
fn mpf_to_f64(v: &BigFloat) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let sign = if v.is_negative() { -1.0 } else { 1.0 };
    let exp = match v.exponent() {
        Some(e) => e as i64,
        None => return f64::NAN,
    };
    let digits = match v.mantissa_digits() {
        Some(d) => d,
        None => return f64::NAN,
    };
    // mantissa is a little-endian word array representing m in [0.5, 1)
    // scaled by 2^64 per word; value = m * 2^exp.
    let mut frac = 0.0f64;
    for w in digits.iter().rev().take(2).rev() {
        frac = frac / 1.8446744073709552e19 + (*w as f64) / 1.8446744073709552e19;
    }
    if digits.len() == 1 {
        frac = digits[0] as f64 / 1.8446744073709552e19;
    }
    if exp > 1030 {
        return sign * f64::INFINITY;
    }
    if exp < -1070 {
        return 0.0;
    }
    sign * frac * (exp as f64).exp2()
}
