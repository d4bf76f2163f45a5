//! Jacobian, characteristic coefficients, spectra and stability classes.
//!
//! At a fixed point the characteristic polynomial of the Jacobian reads
//! `λ⁴ - p1 λ³ + p2 λ² + p3 λ`. Two routes to the spectrum are provided:
//! the radical formula for the two roots left after factoring out `λ = 0`
//! and `λ = 2`, and a dense numeric eigensolver that serves as the arbiter.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fixed_points::{FixedPointForm, FIXED_POINT_TOL};
use crate::linalg;
use crate::params::Hemophilia;
use crate::scalar::Scalar;
use crate::state::State4;

/// Tolerance on `|λ| - 1` and on the p-identities.
pub const HYPERBOLICITY_TOL: f64 = 1e-9;
/// Tolerance on `8 - 4p1 + 2p2 + p3` for the closed-form spectrum.
pub const LAMBDA_TWO_IDENTITY_TOL: f64 = 1e-8;

/// Matrix of partial derivatives of `W` at a state, rows `(x', y', u', v')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian4<T>(pub [[T; 4]; 4]);

impl<T: Scalar> Jacobian4<T> {
    pub fn rows(&self) -> &[[T; 4]; 4] {
        &self.0
    }

    pub fn to_vecs(&self) -> Vec<Vec<T>> {
        self.0.iter().map(|r| r.to_vec()).collect()
    }

    pub fn mul_state(&self, t: &State4<T>) -> State4<T> {
        let v = linalg::matvec(&self.to_vecs(), &t.to_array());
        State4::new(v[0], v[1], v[2], v[3])
    }

    pub fn det(&self) -> T {
        linalg::det(&self.to_vecs())
    }

    pub fn norm_inf(&self) -> T {
        self.0.iter().fold(T::zero(), |m, row| {
            m.max(row.iter().fold(T::zero(), |s, c| s + c.abs()))
        })
    }

    /// Coefficients read off the numerically expanded characteristic
    /// polynomial, in the `λ⁴ - p1 λ³ + p2 λ² + p3 λ + det` convention.
    pub fn numeric_char_poly(&self) -> NumericCharPoly<T> {
        let c = linalg::char_poly(&self.to_vecs());
        NumericCharPoly {
            coeffs: CharCoeffs { p1: -c[1], p2: c[2], p3: c[3] },
            constant: c[4],
        }
    }
}

/// `J(s)` of the hemophilia operator.
pub fn jacobian<T: Scalar>(w: &Hemophilia<T>, s: &State4<T>) -> Jacobian4<T> {
    let p = w.params();
    let (x, y, u, v) = (s.x, s.y, s.u, s.v);
    let z = T::zero();
    Jacobian4([
        [p.a1 * u, p.b1 * u, p.a1 * x + p.b1 * y, z],
        [p.c1 * v, p.b2 * u + p.d1 * v, p.b2 * y, p.c1 * x + p.d1 * y],
        [
            p.a2 * u + p.c2 * v,
            p.b3 * u + p.d2 * v,
            p.a2 * x + p.b3 * y,
            p.c2 * x + p.d2 * y,
        ],
        [z, p.b4 * u + p.d3 * v, p.b4 * y, p.d3 * y],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharCoeffs<T> {
    pub p1: T,
    pub p2: T,
    pub p3: T,
}

impl<T: Scalar> CharCoeffs<T> {
    /// `8 - 4p1 + 2p2 + p3`, the value of the cubic factor at `λ = 2`.
    pub fn lambda_two_defect(&self) -> T {
        T::lit(8.0) - T::four() * self.p1 + T::two() * self.p2 + self.p3
    }

    /// `p1 - p2 - 3`; zero iff `-1` is a root of the remaining quadratic.
    pub fn minus_one_margin(&self) -> T {
        self.p1 - self.p2 - T::lit(3.0)
    }

    /// `3p1 - p2 - 7`; zero iff `1` is a root of the remaining quadratic.
    pub fn plus_one_margin(&self) -> T {
        T::lit(3.0) * self.p1 - self.p2 - T::lit(7.0)
    }

    pub fn identities_say_nonhyperbolic(&self) -> bool {
        let tol = T::tol(HYPERBOLICITY_TOL);
        self.minus_one_margin().abs() <= tol || self.plus_one_margin().abs() <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericCharPoly<T> {
    pub coeffs: CharCoeffs<T>,
    /// Constant term, `det J`.
    pub constant: T,
}

/// Explicit polynomial forms of `p1`, `p2`, `p3` in the coefficients and the
/// state.
///
/// `p1` and `p2` hold everywhere; this form of `p3` has already been reduced
/// with the fixed-point equations and is only meaningful at fixed points,
/// hence the residual check.
pub fn char_coeffs<T: Scalar>(w: &Hemophilia<T>, s: &State4<T>) -> Result<CharCoeffs<T>> {
    let residual = w.residual(s)?;
    if residual > T::tol(FIXED_POINT_TOL) {
        return Err(Error::NotAFixedPoint { residual: residual.as_f64() });
    }
    Ok(char_coeffs_unchecked(w, s))
}

pub(crate) fn char_coeffs_unchecked<T: Scalar>(w: &Hemophilia<T>, s: &State4<T>) -> CharCoeffs<T> {
    let p = w.params();
    let (a1, a2, c1, c2) = (p.a1, p.a2, p.c1, p.c2);
    let (b1, b2, b3, b4) = (p.b1, p.b2, p.b3, p.b4);
    let (d1, d2, d3) = (p.d1, p.d2, p.d3);
    let (x, y, u, v) = (s.x, s.y, s.u, s.v);
    let two = T::two();

    let p1 = a2 * x + (b3 + d3) * y + (a1 + b2) * u + d1 * v;

    let p2 = (a1 * b3 + a1 * d3 + b2 * d3 - b4 * d1 - a2 * b1) * y * u
        + a1 * b2 * u * u
        + (a1 * d1 - b1 * c1) * u * v
        + (b3 * d3 - b4 * d2) * y * y
        + (a2 * d3 - b4 * c2) * x * y
        + (a2 * b2 - b4 * c1) * x * u
        + (a2 * d1 - c1 * d3 - a1 * c2) * x * v
        + (b3 * d1 - b2 * d2 - b1 * c2) * y * v;

    let p3 = a2 * d3 * x * y
        + b4 * c1 * x * u
        + (two * a2 * d1 + c1 * d3 - b3 * c1 + a1 * c2 - b2 * c2) * x * v
        + (a1 * b4 * d2 - a1 * b3 * d3) * y * y * u
        + (a1 * b4 * d1 - a1 * b2 * d3 - b1 * b4 * c1) * y * u * u
        + (a1 * b2 * d2 - a1 * b3 * d1 + b1 * b3 * c1) * y * u * v
        + (a2 * b1 * c1 + a1 * b2 * c2 - a1 * a2 * d1) * x * u * v
        + (b2 * b4 * c2 - a2 * b2 * d3 - a1 * a2 * d3) * x * y * u
        + (b4 * c2 * d1 - b4 * c1 * d2 + b3 * c1 * d3 - a2 * d1 * d3) * x * y * v
        + a2 * c1 * x * x * (b4 * u + d3 * v)
        + (c2 * d1 - c1 * d2) * v * v * (a1 * x + b1 * y)
        + b1 * c2 * d3 * y * y * v;

    CharCoeffs { p1, p2, p3 }
}

/// Four eigenvalues, sorted by decreasing modulus then real and imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum<T> {
    pub values: [Complex<T>; 4],
}

impl<T: Scalar> Spectrum<T> {
    pub fn new(mut values: [Complex<T>; 4]) -> Self {
        values.sort_by(|a, b| {
            b.norm()
                .partial_cmp(&a.norm())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal))
                .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        Self { values }
    }

    pub fn moduli(&self) -> [T; 4] {
        self.values.map(|z| z.norm())
    }

    /// Whether some eigenvalue lies within `tol` of the real number `lambda`.
    pub fn contains(&self, lambda: T, tol: T) -> bool {
        self.values
            .iter()
            .any(|z| (*z - Complex::new(lambda, T::zero())).norm() <= tol)
    }

    /// Largest distance from an eigenvalue of `self` to its nearest
    /// counterpart in `other` (order-independent).
    pub fn distance(&self, other: &Self) -> T {
        let one_way = |a: &Self, b: &Self| {
            a.values.iter().fold(T::zero(), |m, z| {
                let nearest = b
                    .values
                    .iter()
                    .fold(T::infinity(), |best, w| best.min((*z - *w).norm()));
                m.max(nearest)
            })
        };
        one_way(self, other).max(one_way(other, self))
    }

    /// Number of eigenvalues with modulus above `1 + tol`.
    pub fn unstable_dim(&self, tol: T) -> usize {
        self.moduli().iter().filter(|&&m| m > T::one() + tol).count()
    }
}

/// `{0, 2, λ3, λ4}` with `λ3,4 = -1 + (p1 ± sqrt(p1² + 4p1 - 4p2 - 12)) / 2`.
pub fn eigenvalues_closed_form<T: Scalar>(c: &CharCoeffs<T>) -> Result<Spectrum<T>> {
    let defect = c.lambda_two_defect();
    if !(defect.abs() <= T::tol(LAMBDA_TWO_IDENTITY_TOL)) {
        return Err(Error::IdentityViolated { value: defect.as_f64() });
    }
    let disc = c.p1 * c.p1 + T::four() * c.p1 - T::four() * c.p2 - T::lit(12.0);
    // a double root leaves rounding-level noise in `disc`; its square root
    // would split the pair by ~sqrt(eps)
    let magnitude = c.p1 * c.p1 + (T::four() * c.p1).abs() + (T::four() * c.p2).abs() + T::lit(12.0);
    let disc = if disc.abs() <= T::lit(64.0) * T::epsilon() * magnitude { T::zero() } else { disc };
    let root = Complex::new(disc, T::zero()).sqrt();
    let centre = Complex::new(-T::one() + c.p1 / T::two(), T::zero());
    let half = root / T::two();
    let zero = Complex::new(T::zero(), T::zero());
    let two = Complex::new(T::two(), T::zero());
    Ok(Spectrum::new([zero, two, centre + half, centre - half]))
}

/// Eigenvalues from a dense Schur-based eigensolver, with clustered
/// eigenvalues replaced by their mean.
///
/// A defective multiple eigenvalue splits under roundoff into a cluster of
/// radius about `sqrt(eps)·‖J‖`, while the cluster mean keeps `O(eps)`
/// accuracy. Eigenvalues closer than `8·sqrt(eps)·max(1, ‖J‖∞)` are merged.
pub fn eigenvalues_numeric<T: Scalar>(j: &Jacobian4<T>) -> Spectrum<T> {
    let m = DMatrix::from_fn(4, 4, |r, c| j.0[r][c].as_f64());
    let vals = schur_eigenvalues(m);
    let merged = merge_clusters(&vals, j.norm_inf().as_f64());
    let cast = |z: Complex<f64>| Complex::new(T::lit(z.re), T::lit(z.im));
    Spectrum::new([cast(merged[0]), cast(merged[1]), cast(merged[2]), cast(merged[3])])
}

/// Eigenvalues read off the diagonal blocks of the real Schur form.
///
/// nalgebra's own extraction takes a real square root of the 2×2 block
/// discriminant, which yields NaN when a real pair rounds to a slightly
/// negative value; a complex square root handles both cases.
fn schur_eigenvalues(m: DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = m.nrows();
    let (_, t) = m.schur().unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 == n || t[(i + 1, i)] == 0.0 {
            out.push(Complex::new(t[(i, i)], 0.0));
            i += 1;
            continue;
        }
        let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let half = (a - d) / 2.0;
        let root = Complex::new(half * half + b * c, 0.0).sqrt();
        let mid = Complex::new((a + d) / 2.0, 0.0);
        out.push(mid + root);
        out.push(mid - root);
        i += 2;
    }
    out
}

/// Eigenvalues of an arbitrary square matrix (same clustering rule).
pub fn eigenvalues_numeric_dense<T: Scalar>(a: &[Vec<T>]) -> Vec<Complex<T>> {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |r, c| a[r][c].as_f64());
    let norm = a
        .iter()
        .map(|row| row.iter().map(|c| c.abs().as_f64()).sum::<f64>())
        .fold(0.0, f64::max);
    let vals = schur_eigenvalues(m);
    merge_clusters(&vals, norm)
        .into_iter()
        .map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
        .collect()
}

/// Replaces each group of eigenvalues that looks like a split multiple
/// eigenvalue by the group mean, which stays well-conditioned when the
/// individual values are not.
///
/// A perturbed m×m Jordan block splits into a regular m-gon of radius about
/// `eps^(1/m)·‖A‖`. Groups of three or more are merged only when they show
/// that shape; the rest are merged by single-link distance.
fn merge_clusters(vals: &[Complex<f64>], norm: f64) -> Vec<Complex<f64>> {
    let scale = norm.max(1.0);
    let n = vals.len();
    let mut out = vals.to_vec();
    let mut free = vec![true; n];
    if n <= 8 {
        for m in (3..=n).rev() {
            let mut merged = true;
            while merged {
                merged = false;
                let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
                for group in combinations(&idx, m) {
                    let zs: Vec<_> = group.iter().map(|&i| vals[i]).collect();
                    if let Some(mean) = regular_split(&zs, scale) {
                        for &i in &group {
                            out[i] = mean;
                            free[i] = false;
                        }
                        merged = true;
                        break;
                    }
                }
            }
        }
    }
    // remaining values: single-link clusters within the square-root radius
    let radius = 8.0 * f64::EPSILON.sqrt() * scale;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in (0..n).filter(|&i| free[i]) {
        for k in (i + 1..n).filter(|&k| free[k]) {
            if (vals[i] - vals[k]).norm() < radius {
                let (ri, rk) = (find(&mut parent, i), find(&mut parent, k));
                if ri != rk {
                    parent[rk] = ri;
                }
            }
        }
    }
    for i in (0..n).filter(|&i| free[i]) {
        let root = find(&mut parent, i);
        let members: Vec<usize> = (0..n).filter(|&k| free[k] && find(&mut parent, k) == root).collect();
        if members.len() > 1 {
            out[i] = members.iter().map(|&k| vals[k]).sum::<Complex<f64>>() / members.len() as f64;
        }
    }
    out
}

fn combinations(idx: &[usize], m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (pos, &first) in idx.iter().enumerate() {
        for mut rest in combinations(&idx[pos + 1..], m - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Mean of `zs` if they form a small regular polygon around it: equal
/// distances from the mean and vanishing power sums `Σ(z - mean)^k`,
/// `k < m`.
fn regular_split(zs: &[Complex<f64>], scale: f64) -> Option<Complex<f64>> {
    let m = zs.len();
    let mean = zs.iter().sum::<Complex<f64>>() / m as f64;
    let d: Vec<_> = zs.iter().map(|z| z - mean).collect();
    let r = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if r > 8.0 * f64::EPSILON.powf(1.0 / m as f64) * scale {
        return None;
    }
    if r == 0.0 {
        return Some(mean);
    }
    if d.iter().any(|z| z.norm() < 0.9 * r) {
        return None;
    }
    for k in 1..m as i32 {
        let pk: Complex<f64> = d.iter().map(|z| z.powi(k)).sum();
        if pk.norm() > 0.1 * r.powi(k) {
            return None;
        }
    }
    Some(mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityTag {
    Attracting,
    Saddle,
    Nonhyperbolic,
    /// All moduli above one. Never produced at a fixed point of the hemophilia
    /// operator, which always carries the eigenvalue 0.
    Repelling,
}

impl StabilityTag {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityTag::Attracting => "Attracting",
            StabilityTag::Saddle => "Saddle",
            StabilityTag::Nonhyperbolic => "Nonhyperbolic",
            StabilityTag::Repelling => "Repelling",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityClass<T> {
    pub tag: StabilityTag,
    /// Eigenvalue moduli the tag was decided on, in spectrum order.
    pub moduli: [T; 4],
    pub unstable_dim: usize,
    /// Whether `p1 - p2 = 3` or `3p1 - p2 = 7` holds (within tolerance).
    pub identity_nonhyperbolic: bool,
    /// False when the p-identities and the modulus test disagree, e.g. for a
    /// complex pair on the unit circle.
    pub identity_agrees: bool,
}

/// Tag decided by eigenvalue moduli alone.
pub fn classify_spectrum<T: Scalar>(spec: &Spectrum<T>) -> StabilityTag {
    let tol = T::tol(HYPERBOLICITY_TOL);
    let moduli = spec.moduli();
    if moduli.iter().any(|&m| (m - T::one()).abs() <= tol) {
        StabilityTag::Nonhyperbolic
    } else if moduli.iter().all(|&m| m < T::one()) {
        StabilityTag::Attracting
    } else if moduli.iter().all(|&m| m > T::one()) {
        StabilityTag::Repelling
    } else {
        StabilityTag::Saddle
    }
}

/// Stability class of a fixed point of `w`. The numeric spectrum decides.
pub fn classify<T: Scalar>(w: &Hemophilia<T>, s: &State4<T>) -> Result<StabilityClass<T>> {
    let coeffs = char_coeffs(w, s)?;
    let spec = eigenvalues_numeric(&jacobian(w, s));
    let tol = T::tol(HYPERBOLICITY_TOL);
    if s.norm() <= T::tol(FIXED_POINT_TOL) {
        return Ok(StabilityClass {
            tag: StabilityTag::Attracting,
            moduli: spec.moduli(),
            unstable_dim: 0,
            identity_nonhyperbolic: false,
            identity_agrees: true,
        });
    }
    let tag = classify_spectrum(&spec);
    let identity_nonhyperbolic = coeffs.identities_say_nonhyperbolic();
    Ok(StabilityClass {
        tag,
        moduli: spec.moduli(),
        unstable_dim: spec.unstable_dim(tol),
        identity_nonhyperbolic,
        identity_agrees: identity_nonhyperbolic == (tag == StabilityTag::Nonhyperbolic),
    })
}

/// Closed-form nonhyperbolicity margins for the boundary fixed points.
///
/// Each form has two expressions; the point is nonhyperbolic iff one of them
/// vanishes.
///
/// * II `(1/a2, 0, 1/a1, 0)`: `b4c1 - a2(a1 - b2)`, `b4c1 - a2(a1 + b2)`
/// * III `(0, 1/d3, 0, 1/d1)`: `b1c2 - d1(d3 - b3)`, `b1c2 - d1(d3 + b3)`
/// * IV `(0, 1/b3, 1/b2, 0)`: `(a1 - b2)(d3 - b3)`, `(a1 + b2)(d3 + b3)`.
///   Here the non-trivial eigenvalues are exactly `d3/b3` and `a1/b2`; the
///   second margin is positive whenever the point exists.
pub fn boundary_margins<T: Scalar>(w: &Hemophilia<T>, form: FixedPointForm) -> Option<(T, T)> {
    let p = w.params();
    match form {
        FixedPointForm::II => Some((
            p.b4 * p.c1 - p.a2 * (p.a1 - p.b2),
            p.b4 * p.c1 - p.a2 * (p.a1 + p.b2),
        )),
        FixedPointForm::III => Some((
            p.b1 * p.c2 - p.d1 * (p.d3 - p.b3),
            p.b1 * p.c2 - p.d1 * (p.d3 + p.b3),
        )),
        FixedPointForm::IV => Some((
            (p.a1 - p.b2) * (p.d3 - p.b3),
            (p.a1 + p.b2) * (p.d3 + p.b3),
        )),
        _ => None,
    }
}
