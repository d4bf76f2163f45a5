use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Abundances of the genotypes XX, XXʰ, XY and XʰY.
///
/// Coordinates may take any sign; the operator is studied on all of ℝ⁴.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State4<T> {
    pub x: T,
    pub y: T,
    pub u: T,
    pub v: T,
}

impl<T: Scalar> State4<T> {
    pub fn new(x: T, y: T, u: T, v: T) -> Self {
        Self { x, y, u, v }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(a: [T; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.x, self.y, self.u, self.v]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.to_array().iter().all(|c| c.is_zero())
    }

    /// Max-coordinate norm.
    pub fn norm(&self) -> T {
        self.to_array()
            .iter()
            .fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn sum(&self) -> T {
        self.x + self.y + self.u + self.v
    }

    /// Female total times male total, `(x+y)(u+v)`.
    pub fn cross_mass(&self) -> T {
        (self.x + self.y) * (self.u + self.v)
    }

    /// Max-norm distance to `other`.
    pub fn dist(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k, self.u * k, self.v * k)
    }

    pub fn map(self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.x), f(self.y), f(self.u), f(self.v))
    }

    pub fn cast<U: Scalar>(self) -> State4<U> {
        State4::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.u.as_f64()),
            U::lit(self.v.as_f64()),
        )
    }
}

impl<T: Scalar> std::ops::Sub for State4<T> {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.u - o.u, self.v - o.v)
    }
}

impl<T: Scalar> std::ops::Add for State4<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.u + o.u, self.v + o.v)
    }
}

impl<T: Scalar> fmt::Display for State4<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x, self.y, self.u, self.v)
    }
}

/// State of a general gonosomal system: `eta` female and `nu` male abundances.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StateN<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Scalar> StateN<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Self {
        Self { x, y }
    }

    pub fn zeros(eta: usize, nu: usize) -> Self {
        Self::new(vec![T::zero(); eta], vec![T::zero(); nu])
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.x.iter().chain(self.y.iter())
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|c| c.is_finite())
    }

    pub fn norm(&self) -> T {
        self.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn sum(&self) -> T {
        self.iter().fold(T::zero(), |s, &c| s + c)
    }

    pub fn dist(&self, other: &Self) -> T {
        self.iter()
            .zip(other.iter())
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Flattened `(x₁..x_η, y₁..y_ν)`.
    pub fn to_vec(&self) -> Vec<T> {
        self.iter().copied().collect()
    }

    pub fn from_flat(flat: &[T], eta: usize) -> Self {
        Self::new(flat[..eta].to_vec(), flat[eta..].to_vec())
    }
}

impl<T: Scalar> From<State4<T>> for StateN<T> {
    fn from(s: State4<T>) -> Self {
        Self::new(vec![s.x, s.y], vec![s.u, s.v])
    }
}
