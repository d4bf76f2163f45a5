//! The general gonosomal operator on `eta` female and `nu` male types.
//!
//! ```text
//! x'_j = Σ_{i,r} pf[i][r][j] x_i y_r
//! y'_l = Σ_{i,r} pm[i][r][l] x_i y_r
//! ```
//!
//! with `Σ_j pf[i][r][j] + Σ_l pm[i][r][l] = 1` for every cross `(i, r)`.

use crate::error::{Error, Result};
use crate::params::{Hemophilia, NORMALIZATION_TOL};
use crate::scalar::Scalar;
use crate::state::StateN;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralOperator<T> {
    eta: usize,
    nu: usize,
    // dense, row-major over (i, r, offspring)
    pf: Vec<T>,
    pm: Vec<T>,
}

impl<T: Scalar> GeneralOperator<T> {
    /// Builds and validates an operator from dense coefficient storage.
    /// `pf` is indexed `(i * nu + r) * eta + j`, `pm` is `(i * nu + r) * nu + l`.
    pub fn new(eta: usize, nu: usize, pf: Vec<T>, pm: Vec<T>) -> Result<Self> {
        let op = Self { eta, nu, pf, pm };
        op.validate()?;
        Ok(op)
    }

    /// Builds from nested arrays `pf[i][r][j]` and `pm[i][r][l]`.
    pub fn from_nested(eta: usize, nu: usize, pf: &[Vec<Vec<T>>], pm: &[Vec<Vec<T>>]) -> Result<Self> {
        let flat_pf = flatten(pf, eta, nu, eta, "pf")?;
        let flat_pm = flatten(pm, eta, nu, nu, "pm")?;
        Self::new(eta, nu, flat_pf, flat_pm)
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Female-offspring coefficient `p^(f)_{ir,j}` (zero-based indices).
    pub fn pf(&self, i: usize, r: usize, j: usize) -> T {
        self.pf[(i * self.nu + r) * self.eta + j]
    }

    /// Male-offspring coefficient `p^(m)_{ir,l}` (zero-based indices).
    pub fn pm(&self, i: usize, r: usize, l: usize) -> T {
        self.pm[(i * self.nu + r) * self.nu + l]
    }

    pub fn to_nested(&self) -> (Vec<Vec<Vec<T>>>, Vec<Vec<Vec<T>>>) {
        let pf = (0..self.eta)
            .map(|i| {
                (0..self.nu)
                    .map(|r| (0..self.eta).map(|j| self.pf(i, r, j)).collect())
                    .collect()
            })
            .collect();
        let pm = (0..self.eta)
            .map(|i| {
                (0..self.nu)
                    .map(|r| (0..self.nu).map(|l| self.pm(i, r, l)).collect())
                    .collect()
            })
            .collect();
        (pf, pm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta == 0 || self.nu == 0 {
            return Err(Error::DimensionMismatch {
                expected: "eta >= 1 and nu >= 1".into(),
                found: format!("eta = {}, nu = {}", self.eta, self.nu),
            });
        }
        let nf = self.eta * self.nu * self.eta;
        let nm = self.eta * self.nu * self.nu;
        if self.pf.len() != nf || self.pm.len() != nm {
            return Err(Error::DimensionMismatch {
                expected: format!("{nf} female and {nm} male coefficients"),
                found: format!("{} and {}", self.pf.len(), self.pm.len()),
            });
        }
        let tol = T::tol(NORMALIZATION_TOL);
        for i in 0..self.eta {
            for r in 0..self.nu {
                let mut total = T::zero();
                for j in 0..self.eta {
                    let c = self.pf(i, r, j);
                    check_nonnegative(c, || format!("pf[{}][{}][{}]", i + 1, r + 1, j + 1))?;
                    total = total + c;
                }
                for l in 0..self.nu {
                    let c = self.pm(i, r, l);
                    check_nonnegative(c, || format!("pm[{}][{}][{}]", i + 1, r + 1, l + 1))?;
                    total = total + c;
                }
                let residual = total - T::one();
                if residual.abs() > tol {
                    return Err(Error::NormalizationViolation {
                        group: format!("pair ({}, {})", i + 1, r + 1),
                        residual: residual.as_f64(),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_dims(&self, t: &StateN<T>) -> Result<()> {
        if t.dims() != (self.eta, self.nu) {
            return Err(Error::DimensionMismatch {
                expected: format!("({}, {})", self.eta, self.nu),
                found: format!("{:?}", t.dims()),
            });
        }
        Ok(())
    }

    pub fn apply(&self, t: &StateN<T>) -> Result<StateN<T>> {
        self.check_dims(t)?;
        let mut next = StateN::zeros(self.eta, self.nu);
        for i in 0..self.eta {
            for r in 0..self.nu {
                let w = t.x[i] * t.y[r];
                if w.is_zero() {
                    continue;
                }
                for j in 0..self.eta {
                    next.x[j] = next.x[j] + self.pf(i, r, j) * w;
                }
                for l in 0..self.nu {
                    next.y[l] = next.y[l] + self.pm(i, r, l) * w;
                }
            }
        }
        if next.is_finite() {
            Ok(next)
        } else {
            Err(Error::Overflow)
        }
    }

    /// Dense Jacobian in the flattened `(x, y)` ordering.
    pub fn jacobian(&self, t: &StateN<T>) -> Result<Vec<Vec<T>>> {
        self.check_dims(t)?;
        let (eta, nu) = (self.eta, self.nu);
        let n = eta + nu;
        let mut jac = vec![vec![T::zero(); n]; n];
        for i in 0..eta {
            for r in 0..nu {
                for j in 0..eta {
                    let c = self.pf(i, r, j);
                    jac[j][i] = jac[j][i] + c * t.y[r];
                    jac[j][eta + r] = jac[j][eta + r] + c * t.x[i];
                }
                for l in 0..nu {
                    let c = self.pm(i, r, l);
                    jac[eta + l][i] = jac[eta + l][i] + c * t.y[r];
                    jac[eta + l][eta + r] = jac[eta + l][eta + r] + c * t.x[i];
                }
            }
        }
        Ok(jac)
    }

    pub fn residual(&self, s: &StateN<T>) -> Result<T> {
        Ok(self.apply(s)?.dist(s))
    }
}

fn check_nonnegative<T: Scalar>(c: T, name: impl FnOnce() -> String) -> Result<()> {
    if c >= T::zero() {
        Ok(())
    } else {
        Err(Error::NegativeCoefficient { name: name(), value: c.as_f64() })
    }
}

fn flatten<T: Scalar>(
    nested: &[Vec<Vec<T>>],
    eta: usize,
    nu: usize,
    inner: usize,
    what: &str,
) -> Result<Vec<T>> {
    let mismatch = || Error::DimensionMismatch {
        expected: format!("{what} shaped [{eta}][{nu}][{inner}]"),
        found: format!("outer length {}", nested.len()),
    };
    if nested.len() != eta {
        return Err(mismatch());
    }
    let mut flat = Vec::with_capacity(eta * nu * inner);
    for row in nested {
        if row.len() != nu {
            return Err(mismatch());
        }
        for cell in row {
            if cell.len() != inner {
                return Err(mismatch());
            }
            flat.extend_from_slice(cell);
        }
    }
    Ok(flat)
}

/// Free-standing form of [`GeneralOperator::validate`].
pub fn validate_general<T: Scalar>(op: &GeneralOperator<T>) -> Result<()> {
    op.validate()
}

/// Embeds the hemophilia operator as the `eta = nu = 2` general operator.
///
/// Female types are (XX, XXʰ), male types (XY, XʰY).
pub fn hemophilia_to_general<T: Scalar>(w: &Hemophilia<T>) -> GeneralOperator<T> {
    let p = w.params();
    let z = T::zero();
    let pf = vec![
        // (1,1)       (1,2)
        vec![vec![p.a1, z], vec![z, p.c1]],
        // (2,1)       (2,2)
        vec![vec![p.b1, p.b2], vec![z, p.d1]],
    ];
    let pm = vec![
        vec![vec![p.a2, z], vec![p.c2, z]],
        vec![vec![p.b3, p.b4], vec![p.d2, p.d3]],
    ];
    GeneralOperator::from_nested(2, 2, &pf, &pm)
        .expect("embedding of validated hemophilia params is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::State4;

    fn one_by_one(f: f64, m: f64) -> Result<GeneralOperator<f64>> {
        GeneralOperator::new(1, 1, vec![f], vec![m])
    }

    #[test]
    fn single_cross_validation() {
        assert!(one_by_one(0.5, 0.5).is_ok());
        assert!(matches!(
            one_by_one(0.5, 0.6),
            Err(Error::NormalizationViolation { .. })
        ));
        assert!(matches!(
            one_by_one(-0.5, 1.5),
            Err(Error::NegativeCoefficient { .. })
        ));
    }

    #[test]
    fn wrong_storage_length_is_dimension_mismatch() {
        assert!(matches!(
            GeneralOperator::new(2, 1, vec![0.5; 3], vec![0.5; 2]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            GeneralOperator::<f64>::new(0, 1, vec![], vec![]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn embedding_table() {
        let g = hemophilia_to_general(&Hemophilia::<f64>::classical());
        assert_eq!(g.pf(1, 0, 0), 0.25); // b1
        assert_eq!(g.pm(1, 1, 0), 1.0 / 3.0); // d2
        assert_eq!(g.pf(0, 0, 1), 0.0);
        assert_eq!(g.pm(0, 0, 1), 0.0);
    }

    #[test]
    fn embedding_reproduces_hemophilia_image() {
        let w = Hemophilia::<f64>::classical();
        let g = hemophilia_to_general(&w);
        let t = State4::new(1.0, 1.0, 1.0, 1.0);
        let a = w.apply(&t).unwrap();
        let b = g.apply(&t.into()).unwrap();
        assert_eq!(b, StateN::from(a));
    }

    #[test]
    fn one_by_one_fixed_point() {
        let g = one_by_one(0.5, 0.5).unwrap();
        let t = StateN::new(vec![2.0], vec![2.0]);
        assert_eq!(g.apply(&t).unwrap(), t);
        assert_eq!(g.apply(&StateN::zeros(1, 1)).unwrap(), StateN::zeros(1, 1));
    }

    #[test]
    fn apply_checks_dimensions() {
        let g = one_by_one(0.5, 0.5).unwrap();
        assert!(matches!(
            g.apply(&StateN::zeros(2, 1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nested_round_trip() {
        let g = hemophilia_to_general(&Hemophilia::<f64>::w0());
        let (pf, pm) = g.to_nested();
        assert_eq!(GeneralOperator::from_nested(2, 2, &pf, &pm).unwrap(), g);
    }
}
