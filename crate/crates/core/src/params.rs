//! Inheritance coefficients of the hemophilia operator and the validated
//! operator built from them.
//!
//! The four crosses and their offspring:
//!
//! ```text
//! XX  × XY   → a1 XX, a2 XY
//! XX  × XʰY  → c1 XXʰ, c2 XY
//! XXʰ × XY   → b1 XX, b2 XXʰ, b3 XY, b4 XʰY
//! XXʰ × XʰY  → d1 XXʰ, d2 XY, d3 XʰY
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::state::State4;

/// Tolerance on each normalization group sum.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HemophiliaParams<T> {
    pub a1: T,
    pub a2: T,
    pub c1: T,
    pub c2: T,
    pub b1: T,
    pub b2: T,
    pub b3: T,
    pub b4: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

/// Names of the eleven coefficients, in storage order.
pub const COEFFICIENT_NAMES: [&str; 11] = [
    "a1", "a2", "c1", "c2", "b1", "b2", "b3", "b4", "d1", "d2", "d3",
];

impl<T: Scalar> HemophiliaParams<T> {
    /// `a = c = 1/2`, `b = 1/4`, `d = 1/3`.
    pub fn classical() -> Self {
        let h = T::half();
        let q = T::lit(0.25);
        let t = T::one() / T::lit(3.0);
        Self {
            a1: h,
            a2: h,
            c1: h,
            c2: h,
            b1: q,
            b2: q,
            b3: q,
            b4: q,
            d1: t,
            d2: t,
            d3: t,
        }
    }

    /// The operator with two distinct interior fixed points,
    /// `(1, 2, 2, -1/2)` and `(2, 2, 2, -2/3)`.
    pub fn w0() -> Self {
        let h = T::half();
        let z = T::zero();
        Self {
            a1: h,
            a2: h,
            c1: z,
            c2: T::one(),
            b1: z,
            b2: h,
            b3: h,
            b4: z,
            d1: z,
            d2: h,
            d3: h,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "classical" => Some(Self::classical()),
            "w0" => Some(Self::w0()),
            _ => None,
        }
    }

    pub fn to_array(&self) -> [T; 11] {
        [
            self.a1, self.a2, self.c1, self.c2, self.b1, self.b2, self.b3, self.b4, self.d1,
            self.d2, self.d3,
        ]
    }

    pub fn from_array(a: [T; 11]) -> Self {
        Self {
            a1: a[0],
            a2: a[1],
            c1: a[2],
            c2: a[3],
            b1: a[4],
            b2: a[5],
            b3: a[6],
            b4: a[7],
            d1: a[8],
            d2: a[9],
            d3: a[10],
        }
    }

    pub fn get(&self, name: &str) -> Option<T> {
        COEFFICIENT_NAMES
            .iter()
            .position(|&n| n == name)
            .map(|i| self.to_array()[i])
    }

    pub fn set(&mut self, name: &str, value: T) -> bool {
        match COEFFICIENT_NAMES.iter().position(|&n| n == name) {
            Some(i) => {
                let mut a = self.to_array();
                a[i] = value;
                *self = Self::from_array(a);
                true
            }
            None => false,
        }
    }

    /// Checks nonnegativity and the four group normalizations.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in COEFFICIENT_NAMES.iter().zip(self.to_array()) {
            if !(value >= T::zero()) {
                return Err(Error::NegativeCoefficient {
                    name: (*name).to_string(),
                    value: value.as_f64(),
                });
            }
        }
        let tol = T::tol(NORMALIZATION_TOL);
        let groups = [
            ("a", self.a1 + self.a2),
            ("c", self.c1 + self.c2),
            ("b", self.b1 + self.b2 + self.b3 + self.b4),
            ("d", self.d1 + self.d2 + self.d3),
        ];
        for (group, sum) in groups {
            let residual = sum - T::one();
            if residual.abs() > tol {
                return Err(Error::NormalizationViolation {
                    group: group.to_string(),
                    residual: residual.as_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> HemophiliaParams<U> {
        HemophiliaParams::from_array(self.to_array().map(|c| U::lit(c.as_f64())))
    }
}

/// Free-standing form of [`HemophiliaParams::validate`].
pub fn validate_hemophilia<T: Scalar>(params: &HemophiliaParams<T>) -> Result<()> {
    params.validate()
}

/// The hemophilia evolution operator `W: ℝ⁴ → ℝ⁴` over validated coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hemophilia<T> {
    p: HemophiliaParams<T>,
}

impl<T: Scalar> Hemophilia<T> {
    pub fn new(params: HemophiliaParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self { p: params })
    }

    pub fn classical() -> Self {
        Self { p: HemophiliaParams::classical() }
    }

    pub fn w0() -> Self {
        Self { p: HemophiliaParams::w0() }
    }

    pub fn params(&self) -> &HemophiliaParams<T> {
        &self.p
    }

    /// The image with no overflow check.
    pub fn image(&self, t: &State4<T>) -> State4<T> {
        let p = &self.p;
        let (x, y, u, v) = (t.x, t.y, t.u, t.v);
        let (xu, xv, yu, yv) = (x * u, x * v, y * u, y * v);
        State4::new(
            p.a1 * xu + p.b1 * yu,
            p.c1 * xv + p.b2 * yu + p.d1 * yv,
            p.a2 * xu + p.c2 * xv + p.b3 * yu + p.d2 * yv,
            p.b4 * yu + p.d3 * yv,
        )
    }

    /// One generation, `t' = W(t)`.
    pub fn apply(&self, t: &State4<T>) -> Result<State4<T>> {
        let next = self.image(t);
        if next.is_finite() {
            Ok(next)
        } else {
            Err(Error::Overflow)
        }
    }

    /// `W^n(t)`.
    pub fn apply_n(&self, t: &State4<T>, n: usize) -> Result<State4<T>> {
        let mut s = *t;
        for _ in 0..n {
            s = self.apply(&s)?;
        }
        Ok(s)
    }

    /// Max-norm of `W(s) - s`.
    pub fn residual(&self, s: &State4<T>) -> Result<T> {
        Ok(self.apply(s)?.dist(s))
    }
}
