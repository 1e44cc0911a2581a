//! Exact scalar arithmetic: complex numbers with rational real and
//! imaginary parts.
//!
//! All combinatorial and operator-level computations in this crate run over
//! this field, so identities like circuit relations, Aomoto `d∘d = 0`, or
//! commutators on the singular subspace can be asserted with exact equality.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use num::Complex;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

pub type Rat = BigRational;
pub type C64 = Complex<f64>;

/// A complex number with exact rational components.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CQ {
    pub re: Rat,
    pub im: Rat,
}

impl CQ {
    pub fn new(re: Rat, im: Rat) -> Self {
        CQ { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        CQ {
            re: Rat::from_integer(BigInt::from(n)),
            im: Rat::zero(),
        }
    }

    pub fn from_frac(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        CQ {
            re: Rat::new(BigInt::from(p), BigInt::from(q)),
            im: Rat::zero(),
        }
    }

    pub fn from_rat(r: Rat) -> Self {
        CQ {
            re: r,
            im: Rat::zero(),
        }
    }

    pub fn zero() -> Self {
        CQ {
            re: Rat::zero(),
            im: Rat::zero(),
        }
    }

    pub fn one() -> Self {
        CQ {
            re: Rat::one(),
            im: Rat::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True when real and strictly positive.
    pub fn is_positive_real(&self) -> bool {
        self.im.is_zero() && self.re.is_positive()
    }

    pub fn conj(&self) -> Self {
        CQ {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// |z|^2, an exact rational.
    pub fn norm_sq(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sq();
        assert!(!n.is_zero(), "division by zero");
        CQ {
            re: &self.re / &n,
            im: -&self.im / &n,
        }
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    /// Parse a real rational scalar from "p/q" or an integer string.
    pub fn parse_rational(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let num = BigInt::from_str(p.trim()).map_err(|e| format!("bad numerator: {e}"))?;
            let den = BigInt::from_str(q.trim()).map_err(|e| format!("bad denominator: {e}"))?;
            if den.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(CQ::from_rat(Rat::new(num, den)))
        } else {
            let n = BigInt::from_str(s).map_err(|e| format!("bad integer: {e}"))?;
            Ok(CQ::from_rat(Rat::from_integer(n)))
        }
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // BigRational -> f64 through a scaled quotient so huge intermediate
    // numerators do not overflow.
    let num = r.numer();
    let den = r.denom();
    let nf = bigint_to_f64(num);
    let df = bigint_to_f64(den);
    nf / df
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    use num::ToPrimitive;
    b.to_f64().unwrap_or(f64::INFINITY)
}

impl fmt::Display for CQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rat_str(r: &Rat) -> String {
            if r.denom().is_one() {
                format!("{}", r.numer())
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        }
        if self.im.is_zero() {
            write!(f, "{}", rat_str(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}i", rat_str(&self.im))
        } else if self.im.is_positive() {
            write!(f, "{}+{}i", rat_str(&self.re), rat_str(&self.im))
        } else {
            write!(f, "{}{}i", rat_str(&self.re), rat_str(&self.im))
        }
    }
}

impl fmt::Debug for CQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for CQ {
    type Output = CQ;
    fn add(self, rhs: CQ) -> CQ {
        CQ {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl<'a> Add<&'a CQ> for CQ {
    type Output = CQ;
    fn add(self, rhs: &CQ) -> CQ {
        CQ {
            re: self.re + &rhs.re,
            im: self.im + &rhs.im,
        }
    }
}

impl AddAssign<&CQ> for CQ {
    fn add_assign(&mut self, rhs: &CQ) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl Sub for CQ {
    type Output = CQ;
    fn sub(self, rhs: CQ) -> CQ {
        CQ {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl<'a> Sub<&'a CQ> for CQ {
    type Output = CQ;
    fn sub(self, rhs: &CQ) -> CQ {
        CQ {
            re: self.re - &rhs.re,
            im: self.im - &rhs.im,
        }
    }
}

impl SubAssign<&CQ> for CQ {
    fn sub_assign(&mut self, rhs: &CQ) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Mul for CQ {
    type Output = CQ;
    fn mul(self, rhs: CQ) -> CQ {
        (&self).mul(&rhs)
    }
}

impl<'a, 'b> Mul<&'b CQ> for &'a CQ {
    type Output = CQ;
    fn mul(self, rhs: &CQ) -> CQ {
        CQ {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl<'a> Mul<&'a CQ> for CQ {
    type Output = CQ;
    fn mul(self, rhs: &CQ) -> CQ {
        (&self).mul(rhs)
    }
}

impl MulAssign<&CQ> for CQ {
    fn mul_assign(&mut self, rhs: &CQ) {
        *self = (&*self).mul(rhs);
    }
}

impl Div for CQ {
    type Output = CQ;
    fn div(self, rhs: CQ) -> CQ {
        (&self).mul(&rhs.inv())
    }
}

impl<'a, 'b> Div<&'b CQ> for &'a CQ {
    type Output = CQ;
    fn div(self, rhs: &CQ) -> CQ {
        self.mul(&rhs.inv())
    }
}

impl Neg for CQ {
    type Output = CQ;
    fn neg(self) -> CQ {
        CQ {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl<'a> Neg for &'a CQ {
    type Output = CQ;
    fn neg(self) -> CQ {
        CQ {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}
