//! Forward-mode dual numbers `(value, derivative)`.

use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math;

/// A value paired with one directional derivative coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual {
    /// Primal value.
    pub value: f64,
    /// Derivative along the seeded direction.
    pub deriv: f64,
}

/// A function was applied outside the set where it is differentiable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainError {
    /// Name of the function, e.g. `"sqrt"`.
    pub op: &'static str,
    /// Argument value that was rejected.
    pub value: f64,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} is not differentiable at argument {}",
            self.op, self.value
        )
    }
}

impl core::error::Error for DomainError {}

impl Dual {
    /// Builds a dual number.
    pub const fn new(value: f64, deriv: f64) -> Self {
        Dual { value, deriv }
    }

    /// A constant: derivative zero.
    pub const fn constant(value: f64) -> Self {
        Dual { value, deriv: 0.0 }
    }

    /// The seeded variable: derivative one.
    pub const fn variable(value: f64) -> Self {
        Dual { value, deriv: 1.0 }
    }

    /// Square root.
    ///
    /// Needs `value > 0`. A zero argument is accepted only when its
    /// derivative is also zero, which is what plain evaluation sees; a
    /// genuine derivative through `sqrt(0)` is an error rather than `inf`.
    pub fn sqrt(self) -> Result<Dual, DomainError> {
        if self.value > 0.0 {
            let r = math::sqrt(self.value);
            Ok(Dual::new(r, self.deriv / (2.0 * r)))
        } else if self.value == 0.0 && self.deriv == 0.0 {
            Ok(Dual::constant(0.0))
        } else {
            Err(DomainError {
                op: "sqrt",
                value: self.value,
            })
        }
    }

    /// Natural logarithm, needs `value > 0`.
    pub fn ln(self) -> Result<Dual, DomainError> {
        if self.value > 0.0 {
            Ok(Dual::new(libm::log(self.value), self.deriv / self.value))
        } else {
            Err(DomainError {
                op: "ln",
                value: self.value,
            })
        }
    }

    /// Exponential.
    pub fn exp(self) -> Dual {
        let e = libm::exp(self.value);
        Dual::new(e, e * self.deriv)
    }

    /// Sine.
    pub fn sin(self) -> Dual {
        Dual::new(libm::sin(self.value), libm::cos(self.value) * self.deriv)
    }

    /// Cosine.
    pub fn cos(self) -> Dual {
        Dual::new(libm::cos(self.value), -libm::sin(self.value) * self.deriv)
    }

    /// Absolute value; same zero rule as [`Dual::sqrt`].
    pub fn abs(self) -> Result<Dual, DomainError> {
        if self.value > 0.0 {
            Ok(self)
        } else if self.value < 0.0 {
            Ok(-self)
        } else if self.deriv == 0.0 {
            Ok(Dual::constant(0.0))
        } else {
            Err(DomainError {
                op: "abs",
                value: 0.0,
            })
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, k: i32) -> Dual {
        if k < 0 {
            return self.powi(-k).recip();
        }
        let mut base = self;
        let mut e = k as u32;
        let mut acc = Dual::constant(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Real power `self^e` through `exp(e ln self)`; needs `value > 0`.
    pub fn powd(self, e: Dual) -> Result<Dual, DomainError> {
        if self.value > 0.0 {
            Ok((e * self.ln()?).exp())
        } else {
            Err(DomainError {
                op: "pow",
                value: self.value,
            })
        }
    }

    /// Reciprocal.
    pub fn recip(self) -> Dual {
        Dual::new(1.0 / self.value, -self.deriv / (self.value * self.value))
    }

    /// Both components finite.
    pub fn is_finite(self) -> bool {
        self.value.is_finite() && self.deriv.is_finite()
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(
            self.value * o.value,
            self.value * o.deriv + self.deriv * o.value,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.value / o.value;
        Dual::new(q, (self.deriv - q * o.deriv) / o.value)
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr<f64> for Dual {
            type Output = Dual;
            fn $method(self, o: f64) -> Dual {
                $tr::$method(self, Dual::constant(o))
            }
        }
        impl $tr<Dual> for f64 {
            type Output = Dual;
            fn $method(self, o: Dual) -> Dual {
                $tr::$method(Dual::constant(self), o)
            }
        }
    )*};
}

scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_derivative() {
        let x = Dual::variable(3.7);
        assert_eq!(x.deriv, 1.0);
        assert_eq!((x * 1.0).deriv, 1.0);
    }

    #[test]
    fn product_rule() {
        let a = Dual::new(2.0, 3.0);
        let b = Dual::new(5.0, 7.0);
        assert_eq!(a * b, Dual::new(10.0, 2.0 * 7.0 + 3.0 * 5.0));
    }

    #[test]
    fn sqrt_at_zero_rules() {
        assert_eq!(Dual::constant(0.0).sqrt(), Ok(Dual::constant(0.0)));
        assert!(Dual::variable(0.0).sqrt().is_err());
        assert!(Dual::constant(-1.0).sqrt().is_err());
        assert!(Dual::constant(0.0).ln().is_err());
    }

    #[test]
    fn chain_rules_match_closed_forms() {
        let x = Dual::variable(0.7);
        assert!((x.sin().deriv - libm::cos(0.7)).abs() < 1e-15);
        assert!((x.cos().deriv + libm::sin(0.7)).abs() < 1e-15);
        assert!((x.exp().deriv - libm::exp(0.7)).abs() < 1e-15);
        assert!((x.ln().unwrap().deriv - 1.0 / 0.7).abs() < 1e-15);
        assert!((x.sqrt().unwrap().deriv - 0.5 / libm::sqrt(0.7)).abs() < 1e-15);
        assert!((x.powi(3).deriv - 3.0 * 0.49).abs() < 1e-15);
        assert!((x.recip().deriv + 1.0 / 0.49).abs() < 1e-15);
    }
}
