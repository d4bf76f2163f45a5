//! Fixed points of the hemophilia operator.
//!
//! Fixed points come in five support patterns: the origin (I), `(x,0,u,0)`
//! (II), `(0,y,0,v)` (III), `(0,y,u,0)` (IV) and interior points with
//! `xyuv ≠ 0` (V). Forms II–IV have closed forms under parameter conditions;
//! interior points are searched for with damped Newton from a seed grid.

use std::cmp::Ordering;

use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::general::GeneralOperator;
use crate::linalg;
use crate::params::Hemophilia;
use crate::scalar::Scalar;
use crate::spectral::{self, Spectrum, StabilityClass};
use crate::state::{State4, StateN};

/// Largest residual a reported fixed point may have.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// A coordinate counts as nonzero beyond this magnitude.
pub const NONZERO_TOL: f64 = 1e-10;
/// Tolerance on the zero-coefficient conditions of the closed forms.
pub const EXISTENCE_TOL: f64 = 1e-12;
/// Roots closer than this in max-norm are merged.
pub const DEDUP_DIST: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FixedPointForm {
    I,
    II,
    III,
    IV,
    V,
}

impl FixedPointForm {
    /// Support pattern of `s`, or `None` for patterns outside I–V.
    pub fn of<T: Scalar>(s: &State4<T>) -> Option<Self> {
        let tol = T::tol(NONZERO_TOL);
        let nz = s.to_array().map(|c| c.abs() > tol);
        match nz {
            [false, false, false, false] => Some(Self::I),
            [true, false, true, false] => Some(Self::II),
            [false, true, false, true] => Some(Self::III),
            [false, true, true, false] => Some(Self::IV),
            [true, true, true, true] => Some(Self::V),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::II => "II",
            Self::III => "III",
            Self::IV => "IV",
            Self::V => "V",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<T> {
    pub state: State4<T>,
    pub form: FixedPointForm,
    /// Max-norm of `W(s) - s`.
    pub residual: T,
    pub spectrum: Option<Spectrum<T>>,
    pub stability: Option<StabilityClass<T>>,
}

impl<T: Scalar> FixedPoint<T> {
    fn bare(w: &Hemophilia<T>, state: State4<T>, form: FixedPointForm) -> Result<Self> {
        let residual = w.residual(&state)?;
        Ok(Self { state, form, residual, spectrum: None, stability: None })
    }

    /// Fills in the numeric spectrum and the stability class.
    pub fn analyze(mut self, w: &Hemophilia<T>) -> Result<Self> {
        let j = spectral::jacobian(w, &self.state);
        self.spectrum = Some(spectral::eigenvalues_numeric(&j));
        self.stability = Some(spectral::classify(w, &self.state)?);
        Ok(self)
    }
}

fn in_open_unit<T: Scalar>(c: T, tol: T) -> bool {
    c > tol && c < T::one() - tol
}

/// The origin plus whichever of forms II–IV exist for these coefficients.
pub fn closed_form_fixed_points<T: Scalar>(w: &Hemophilia<T>) -> Vec<FixedPoint<T>> {
    let p = w.params();
    let tol = T::tol(EXISTENCE_TOL);
    let z = T::zero();
    let one = T::one();
    let mut candidates = vec![(State4::zero(), FixedPointForm::I)];
    if in_open_unit(p.a1, tol) && in_open_unit(p.a2, tol) {
        candidates.push((State4::new(one / p.a2, z, one / p.a1, z), FixedPointForm::II));
    }
    if p.d2.abs() <= tol && in_open_unit(p.d1, tol) && in_open_unit(p.d3, tol) {
        candidates.push((State4::new(z, one / p.d3, z, one / p.d1), FixedPointForm::III));
    }
    if p.b1.abs() <= tol && p.b4.abs() <= tol && in_open_unit(p.b2, tol) && in_open_unit(p.b3, tol)
    {
        candidates.push((State4::new(z, one / p.b3, one / p.b2, z), FixedPointForm::IV));
    }
    candidates
        .into_iter()
        .filter_map(|(s, f)| FixedPoint::bare(w, s, f).ok())
        .collect()
}

/// Seeds for the interior search: a regular grid over a box plus explicit
/// extra points.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedGrid<T> {
    pub lo: [T; 4],
    pub hi: [T; 4],
    pub per_axis: usize,
    pub extra: Vec<State4<T>>,
}

impl<T: Scalar> Default for SeedGrid<T> {
    /// Five points per axis over `[-3, 3]⁴` plus the two known interior fixed
    /// points of the W0 preset.
    fn default() -> Self {
        let three = T::lit(3.0);
        Self {
            lo: [-three; 4],
            hi: [three; 4],
            per_axis: 5,
            extra: vec![
                State4::new(T::one(), T::two(), T::two(), -T::half()),
                State4::new(T::two(), T::two(), T::two(), -T::two() / T::lit(3.0)),
            ],
        }
    }
}

impl<T: Scalar> SeedGrid<T> {
    pub fn empty() -> Self {
        Self { lo: [T::zero(); 4], hi: [T::zero(); 4], per_axis: 0, extra: Vec::new() }
    }

    pub fn cube(lo: T, hi: T, per_axis: usize) -> Self {
        Self { lo: [lo; 4], hi: [hi; 4], per_axis, extra: Vec::new() }
    }

    fn axis(&self, k: usize, i: usize) -> T {
        if self.per_axis <= 1 {
            return (self.lo[k] + self.hi[k]) / T::two();
        }
        let f = T::lit(i as f64) / T::lit((self.per_axis - 1) as f64);
        self.lo[k] + (self.hi[k] - self.lo[k]) * f
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(4) + self.extra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<State4<T>> {
        let n = self.per_axis;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out.push(State4::new(
                            self.axis(0, i),
                            self.axis(1, j),
                            self.axis(2, k),
                            self.axis(3, l),
                        ));
                    }
                }
            }
        }
        out.extend(self.extra.iter().copied());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions<T> {
    /// Target residual.
    pub tol: T,
    pub max_iter: usize,
    /// Step halvings tried before giving up on a seed.
    pub max_halvings: usize,
}

impl<T: Scalar> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self { tol: T::tol(1e-12), max_iter: 100, max_halvings: 20 }
    }
}

/// Damped Newton on `F(s) = s' - s` for a map with dense Jacobian
/// `jac(s) = ∂s'/∂s`.
fn damped_newton<T: Scalar>(
    seed: &[T],
    map: impl Fn(&[T]) -> Result<Vec<T>>,
    jac: impl Fn(&[T]) -> Vec<Vec<T>>,
    opts: &NewtonOptions<T>,
) -> Result<Vec<T>> {
    let n = seed.len();
    let residual_vec = |s: &[T]| -> Result<Vec<T>> {
        let img = map(s)?;
        Ok(img.iter().zip(s).map(|(&a, &b)| a - b).collect())
    };
    let max_abs = |r: &[T]| r.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let accept = T::tol(FIXED_POINT_TOL);

    let mut s = seed.to_vec();
    let mut r = residual_vec(&s)?;
    let mut res = max_abs(&r);
    for iter in 0..opts.max_iter {
        if res <= opts.tol {
            return Ok(s);
        }
        let mut jf = jac(&s);
        for (i, row) in jf.iter_mut().enumerate() {
            row[i] = row[i] - T::one();
        }
        let rhs: Vec<T> = r.iter().map(|&c| -c).collect();
        let Some(delta) = linalg::solve(&jf, &rhs, T::tol(1e-14)) else {
            if res <= accept {
                return Ok(s);
            }
            return Err(if iter == 0 { Error::SingularJacobianAtSeed } else { Error::NoConvergence });
        };
        let mut alpha = T::one();
        let mut improved = false;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<T> = (0..n).map(|i| s[i] + alpha * delta[i]).collect();
            if let Ok(rc) = residual_vec(&cand) {
                let rc_max = max_abs(&rc);
                if rc_max < res {
                    s = cand;
                    r = rc;
                    res = rc_max;
                    improved = true;
                    break;
                }
            }
            alpha = alpha / T::two();
        }
        if !improved {
            break;
        }
    }
    if res <= accept {
        Ok(s)
    } else {
        Err(Error::NoConvergence)
    }
}

/// Newton from a single seed; returns the converged state.
pub fn newton_from<T: Scalar>(
    w: &Hemophilia<T>,
    seed: &State4<T>,
    opts: &NewtonOptions<T>,
) -> Result<State4<T>> {
    let root = damped_newton(
        &seed.to_array(),
        |s| {
            let img = w.apply(&State4::new(s[0], s[1], s[2], s[3]))?;
            Ok(img.to_array().to_vec())
        },
        |s| spectral::jacobian(w, &State4::new(s[0], s[1], s[2], s[3])).to_vecs(),
        opts,
    )?;
    Ok(State4::new(root[0], root[1], root[2], root[3]))
}

fn lexicographic<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

fn dedup_sorted<S: Clone, T: Scalar>(mut roots: Vec<S>, key: impl Fn(&S) -> Vec<T>) -> Vec<S> {
    roots.sort_by(|a, b| lexicographic(&key(a), &key(b)));
    let min_dist = T::lit(DEDUP_DIST);
    let mut kept: Vec<S> = Vec::new();
    for r in roots {
        let kr = key(&r);
        let dup = kept.iter().any(|k| {
            key(k)
                .iter()
                .zip(&kr)
                .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
                <= min_dist
        });
        if !dup {
            kept.push(r);
        }
    }
    kept
}

/// Interior (form V) fixed points reached by damped Newton from `seeds`.
///
/// The result is sorted lexicographically and deduplicated; it is not claimed
/// to be exhaustive.
pub fn solve_interior_fixed_points<T: Scalar>(
    w: &Hemophilia<T>,
    seeds: &SeedGrid<T>,
    opts: &NewtonOptions<T>,
) -> Vec<FixedPoint<T>> {
    let points = seeds.points();
    let roots: Vec<State4<T>> = points
        .par_iter()
        .filter_map(|seed| match newton_from(w, seed, opts) {
            Ok(root) => Some(root),
            Err(e) => {
                debug!("seed {seed} skipped: {e}");
                None
            }
        })
        .collect();
    // Where J - I is singular the residual grows only quadratically, so the
    // acceptance tolerance admits roots up to sqrt(tol) away from a boundary
    // fixed point; those are the boundary point itself.
    let known = closed_form_fixed_points(w);
    let shadow = T::tol(FIXED_POINT_TOL).sqrt();
    let interior: Vec<State4<T>> = roots
        .into_iter()
        .filter(|r| FixedPointForm::of(r) == Some(FixedPointForm::V))
        .filter(|r| known.iter().all(|k| k.state.dist(r) > shadow))
        .collect();
    dedup_sorted(interior, |s: &State4<T>| s.to_array().to_vec())
        .into_iter()
        .filter_map(|s| FixedPoint::bare(w, s, FixedPointForm::V).ok())
        .filter(|fp| fp.residual <= T::tol(FIXED_POINT_TOL))
        .collect()
}

/// Closed forms plus the interior search, each analyzed.
pub fn all_fixed_points<T: Scalar>(
    w: &Hemophilia<T>,
    seeds: &SeedGrid<T>,
    opts: &NewtonOptions<T>,
) -> Result<Vec<FixedPoint<T>>> {
    closed_form_fixed_points(w)
        .into_iter()
        .chain(solve_interior_fixed_points(w, seeds, opts))
        .map(|fp| fp.analyze(w))
        .collect()
}

/// Nonzero fixed points of a general operator reached by damped Newton.
pub fn solve_general_fixed_points<T: Scalar>(
    op: &GeneralOperator<T>,
    seeds: &[StateN<T>],
    opts: &NewtonOptions<T>,
) -> Vec<StateN<T>> {
    let eta = op.eta();
    let roots: Vec<StateN<T>> = seeds
        .par_iter()
        .filter_map(|seed| {
            damped_newton(
                &seed.to_vec(),
                |s| Ok(op.apply(&StateN::from_flat(s, eta))?.to_vec()),
                |s| op.jacobian(&StateN::from_flat(s, eta)).expect("dimensions match"),
                opts,
            )
            .ok()
            .map(|flat| StateN::from_flat(&flat, eta))
        })
        .filter(|s| s.norm() > T::tol(NONZERO_TOL))
        .collect();
    dedup_sorted(roots, |s: &StateN<T>| s.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::HemophiliaParams;

    #[test]
    fn classical_closed_forms() {
        let fps = closed_form_fixed_points(&Hemophilia::<f64>::classical());
        let states: Vec<_> = fps.iter().map(|f| (f.form, f.state)).collect();
        assert_eq!(
            states,
            vec![
                (FixedPointForm::I, State4::zero()),
                (FixedPointForm::II, State4::new(2.0, 0.0, 2.0, 0.0)),
            ]
        );
        assert!(fps.iter().all(|f| f.residual == 0.0));
    }

    #[test]
    fn form_three_when_d2_vanishes() {
        let mut p = HemophiliaParams::<f64>::classical();
        p.d1 = 0.5;
        p.d2 = 0.0;
        p.d3 = 0.5;
        let fps = closed_form_fixed_points(&Hemophilia::new(p).unwrap());
        assert!(fps.iter().any(|f| f.form == FixedPointForm::III
            && f.state == State4::new(0.0, 2.0, 0.0, 2.0)));
    }

    #[test]
    fn form_four_when_b1_b4_vanish() {
        let mut p = HemophiliaParams::<f64>::classical();
        p.b1 = 0.0;
        p.b2 = 0.4;
        p.b3 = 0.6;
        p.b4 = 0.0;
        let fps = closed_form_fixed_points(&Hemophilia::new(p).unwrap());
        let iv = fps.iter().find(|f| f.form == FixedPointForm::IV).unwrap();
        assert!(iv.residual < 1e-15);
    }

    #[test]
    fn degenerate_a1_drops_form_two() {
        let mut p = HemophiliaParams::<f64>::classical();
        p.a1 = 0.0;
        p.a2 = 1.0;
        let fps = closed_form_fixed_points(&Hemophilia::new(p).unwrap());
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].form, FixedPointForm::I);
    }

    #[test]
    fn w0_interior_points_found() {
        let w = Hemophilia::<f64>::w0();
        let mut seeds = SeedGrid::cube(-1.0, 3.0, 5);
        seeds.extra = SeedGrid::default().extra;
        let found = solve_interior_fixed_points(&w, &seeds, &NewtonOptions::default());
        for want in [State4::new(1.0, 2.0, 2.0, -0.5), State4::new(2.0, 2.0, 2.0, -2.0 / 3.0)] {
            assert!(
                found.iter().any(|f| f.state.dist(&want) <= DEDUP_DIST),
                "{want} not found"
            );
        }
        for f in &found {
            assert!(f.residual <= FIXED_POINT_TOL);
            assert_eq!(f.form, FixedPointForm::V);
        }
        // every interior fixed point of W0 lies on (x, 2, 2, -x/(1+x))
        for f in &found {
            let s = f.state;
            assert!((s.y - 2.0).abs() < 1e-8 && (s.u - 2.0).abs() < 1e-8);
            assert!((s.v + s.x / (1.0 + s.x)).abs() < 1e-7);
        }
    }

    #[test]
    fn output_is_sorted_and_separated() {
        let found = solve_interior_fixed_points(
            &Hemophilia::<f64>::w0(),
            &SeedGrid::default(),
            &NewtonOptions::default(),
        );
        for pair in found.windows(2) {
            assert_ne!(
                lexicographic(&pair[0].state.to_array(), &pair[1].state.to_array()),
                Ordering::Greater
            );
        }
        for (i, a) in found.iter().enumerate() {
            for b in &found[i + 1..] {
                assert!(a.state.dist(&b.state) > DEDUP_DIST);
            }
        }
    }

    #[test]
    fn no_interior_shadows_of_nonhyperbolic_boundary_point() {
        let w = Hemophilia::<f64>::classical();
        let found = solve_interior_fixed_points(&w, &SeedGrid::default(), &NewtonOptions::default());
        let ii = State4::new(2.0, 0.0, 2.0, 0.0);
        assert!(found.iter().all(|f| f.state.dist(&ii) > 1e-3), "{found:?}");
    }

    #[test]
    fn empty_seed_grid_finds_nothing() {
        let found = solve_interior_fixed_points(
            &Hemophilia::<f64>::classical(),
            &SeedGrid::empty(),
            &NewtonOptions::default(),
        );
        assert!(found.is_empty());
    }

    #[test]
    fn newton_reports_singular_seed() {
        // x' = y' = xy/2: det(J - I) = 1 - (x + y)/2 vanishes at (1, 1)
        let op = GeneralOperator::<f64>::new(1, 1, vec![0.5], vec![0.5]).unwrap();
        let res = damped_newton(
            &[1.0, 1.0],
            |s| Ok(op.apply(&StateN::from_flat(s, 1))?.to_vec()),
            |s| op.jacobian(&StateN::from_flat(s, 1)).unwrap(),
            &NewtonOptions::default(),
        );
        assert_eq!(res, Err(Error::SingularJacobianAtSeed));
    }

    #[test]
    fn general_newton_finds_one_by_one_fixed_point() {
        let op = GeneralOperator::<f64>::new(1, 1, vec![0.5], vec![0.5]).unwrap();
        let seeds = vec![StateN::new(vec![1.5], vec![2.5]), StateN::new(vec![3.0], vec![2.0])];
        let roots = solve_general_fixed_points(&op, &seeds, &NewtonOptions::default());
        assert!(roots.iter().any(|r| (r.x[0] - 2.0).abs() < 1e-10 && (r.y[0] - 2.0).abs() < 1e-10));
    }

    #[test]
    fn form_tags() {
        assert_eq!(FixedPointForm::of(&State4::new(0.0, 0.0, 0.0, 0.0)), Some(FixedPointForm::I));
        assert_eq!(FixedPointForm::of(&State4::new(1.0, 0.0, 3.0, 0.0)), Some(FixedPointForm::II));
        assert_eq!(FixedPointForm::of(&State4::new(1.0, 1e-11, 3.0, 1.0)), None);
        assert_eq!(FixedPointForm::of(&State4::new(1.0, 2.0, 3.0, 4.0)), Some(FixedPointForm::V));
    }
}
