//! Regions of ℝ⁴, ω-limit prediction and its empirical counterpart.
//!
//! The predictor only reports an outcome when a proved sufficient condition
//! fires; otherwise it answers [`Outcome::Unknown`]. Conditions are tried in
//! a fixed order and the first witness wins:
//!
//! 1. nonnegative state with `(x+y)(u+v) < 4` → origin ([`Justification::MassBelowFour`]);
//! 2. nonnegative state with total mass exactly 4 and a nonzero imbalance
//!    expression at some iterate → origin ([`Justification::BoundaryImbalance`]);
//! 3. nonnegative state with mass above 4 whose iterate drops to
//!    `(x+y)(u+v) < 4` → origin ([`Justification::MassDrop`]);
//! 4. nonnegative state with mass above 4 and
//!    `max{a1a2·xu, b2b3·yu, d1d3·yv} > 1` → divergence ([`Justification::SelfReproduction`]);
//! 5. states in `N`, `N0`, `N1` are mapped into the nonnegative orthant by
//!    one or two steps and steps 1–4 are applied to the image
//!    ([`Justification::SignReflection`]);
//! 6. states on `O` or on a supported coordinate plane are settled by their
//!    exact image or closed-form orbit.

use std::fmt;

use bitflags::bitflags;

use crate::error::{Error, Result};
use crate::general::GeneralOperator;
use crate::iterate::{iterate, IterCaps, Termination};
use crate::params::Hemophilia;
use crate::scalar::Scalar;
use crate::state::{State4, StateN};

/// Tolerance on region boundaries (mass = 4, product = 4, imbalance = 0).
pub const BOUNDARY_TOL: f64 = 1e-12;

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
    pub struct RegionFlags: u16 {
        /// `x = y = 0` or `u = v = 0`.
        const O = 1 << 0;
        /// `y = v = 0`.
        const I = 1 << 1;
        /// `y = v = 0` and `x = u`.
        const J = 1 << 2;
        /// All coordinates nonnegative.
        const P = 1 << 3;
        /// `P` with `(x+y)(u+v) < 4`.
        const P0 = 1 << 4;
        /// `P` with `x+y+u+v ≤ 4`.
        const Q = 1 << 5;
        /// All coordinates nonpositive.
        const N = 1 << 6;
        /// `x, y ≤ 0` and `u, v ≥ 0`.
        const N0 = 1 << 7;
        /// `x, y ≥ 0` and `u, v ≤ 0`.
        const N1 = 1 << 8;
        /// `P` with `x+y+u+v > 4`.
        const DELTA = 1 << 9;
        /// `DELTA` with `max{a1a2·xu, b2b3·yu, d1d3·yv} > 1`.
        const DELTA0 = 1 << 10;
    }
}

const FLAG_NAMES: [(RegionFlags, &str); 11] = [
    (RegionFlags::O, "O"),
    (RegionFlags::I, "I"),
    (RegionFlags::J, "J"),
    (RegionFlags::P, "P"),
    (RegionFlags::P0, "P0"),
    (RegionFlags::Q, "Q"),
    (RegionFlags::N, "N"),
    (RegionFlags::N0, "N0"),
    (RegionFlags::N1, "N1"),
    (RegionFlags::DELTA, "Delta"),
    (RegionFlags::DELTA0, "Delta0"),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region<T> {
    pub flags: RegionFlags,
    /// Smallest `a ∈ [0, 4]` with the state in `Q_a` (its total mass).
    pub q_level: Option<T>,
}

impl<T: Scalar> Region<T> {
    pub fn contains(&self, flags: RegionFlags) -> bool {
        self.flags.contains(flags)
    }

    pub fn names(&self) -> Vec<&'static str> {
        FLAG_NAMES
            .iter()
            .filter(|(f, _)| self.flags.contains(*f))
            .map(|(_, n)| *n)
            .collect()
    }
}

impl<T: Scalar> fmt::Display for Region<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names();
        if names.is_empty() {
            return write!(f, "None");
        }
        for (i, n) in names.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            if *n == "Q" {
                write!(f, "Q({})", self.q_level.unwrap_or_else(T::zero))?;
            } else {
                write!(f, "{n}")?;
            }
        }
        Ok(())
    }
}

/// `max{a1a2·xu, b2b3·yu, d1d3·yv}`.
pub fn self_reproduction<T: Scalar>(w: &Hemophilia<T>, t: &State4<T>) -> T {
    let p = w.params();
    (p.a1 * p.a2 * t.x * t.u)
        .max(p.b2 * p.b3 * t.y * t.u)
        .max(p.d1 * p.d3 * t.y * t.v)
}

/// `(a1-½)xu + (c1-½)xv + (b1+b2-½)yu + (d1-½)yv`, the amount by which the
/// female mass of the image exceeds 2 when `x+y = u+v = 2`.
pub fn imbalance<T: Scalar>(w: &Hemophilia<T>, t: &State4<T>) -> T {
    let p = w.params();
    let h = T::half();
    (p.a1 - h) * t.x * t.u
        + (p.c1 - h) * t.x * t.v
        + (p.b1 + p.b2 - h) * t.y * t.u
        + (p.d1 - h) * t.y * t.v
}

/// Region membership by direct evaluation of the defining inequalities.
/// Coordinate-plane memberships (`O`, `I`, `J`) and signs are exact; mass and
/// product boundaries use `tol`. `DELTA0` needs the coefficients.
pub fn classify_region<T: Scalar>(t: &State4<T>, w: Option<&Hemophilia<T>>, tol: T) -> Region<T> {
    let z = T::zero();
    let (x, y, u, v) = (t.x, t.y, t.u, t.v);
    let mut flags = RegionFlags::empty();
    let mut q_level = None;
    if (x == z && y == z) || (u == z && v == z) {
        flags |= RegionFlags::O;
    }
    if y == z && v == z {
        flags |= RegionFlags::I;
        if x == u {
            flags |= RegionFlags::J;
        }
    }
    let four = T::four();
    if x >= z && y >= z && u >= z && v >= z {
        flags |= RegionFlags::P;
        if t.cross_mass() < four - tol {
            flags |= RegionFlags::P0;
        }
        let mass = t.sum();
        if mass <= four + tol {
            flags |= RegionFlags::Q;
            q_level = Some(mass.min(four));
        } else {
            flags |= RegionFlags::DELTA;
            if let Some(w) = w {
                if self_reproduction(w, t) > T::one() + tol {
                    flags |= RegionFlags::DELTA0;
                }
            }
        }
    }
    if x <= z && y <= z && u <= z && v <= z {
        flags |= RegionFlags::N;
    }
    if x <= z && y <= z && u >= z && v >= z {
        flags |= RegionFlags::N0;
    }
    if x >= z && y >= z && u <= z && v <= z {
        flags |= RegionFlags::N1;
    }
    Region { flags, q_level }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignRegion {
    N,
    N0,
    N1,
}

/// Coordinate planes on which the orbit has a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisFamily {
    /// `(x, 0, u, 0)`, any coefficients.
    XU,
    /// `(0, y, 0, v)`, requires `d2 = 0`.
    YV,
    /// `(0, y, u, 0)`, requires `b1 = b4 = 0`.
    YU,
}

impl AxisFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisFamily::XU => "xu",
            AxisFamily::YV => "yv",
            AxisFamily::YU => "yu",
        }
    }
}

/// Which sufficient condition produced a prediction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Justification {
    /// Nonnegative with `(x+y)(u+v) < 4` (or total mass below 4 for the
    /// general operator): contraction to the origin.
    MassBelowFour,
    /// Total mass 4 with nonzero imbalance at iterate `k`.
    BoundaryImbalance { k: usize },
    /// Mass above 4, iterate `k` has `(x+y)(u+v) < 4`.
    MassDrop { k: usize },
    /// Mass above 4 with a self-reproducing cross product above 1.
    SelfReproduction,
    /// General operator: some pair `(i, l)` has
    /// `pf[i][l][i]·pm[i][l][l]·x_i·y_l > 1`.
    PairReproduction,
    /// Sign region mapped into the nonnegative orthant, then decided by `inner`.
    SignReflection { region: SignRegion, inner: Box<Justification> },
    AxisClosedForm(AxisFamily),
    /// `x = y = 0` or `u = v = 0`: the image is exactly the origin.
    ZeroImage,
    /// Non-finite iterate seen while searching; observed, not proved.
    EmpiricalOverflow { step: usize },
    /// No condition fired.
    Unresolved,
}

impl Justification {
    /// False for observed divergence and for unresolved states.
    pub fn theorem_backed(&self) -> bool {
        match self {
            Justification::EmpiricalOverflow { .. } | Justification::Unresolved => false,
            Justification::SignReflection { inner, .. } => inner.theorem_backed(),
            _ => true,
        }
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::MassBelowFour => write!(f, "MassBelowFour"),
            Justification::BoundaryImbalance { k } => write!(f, "BoundaryImbalance(k={k})"),
            Justification::MassDrop { k } => write!(f, "MassDrop(k={k})"),
            Justification::SelfReproduction => write!(f, "SelfReproduction"),
            Justification::PairReproduction => write!(f, "PairReproduction"),
            Justification::SignReflection { region, inner } => {
                write!(f, "SignReflection({region:?}; {inner})")
            }
            Justification::AxisClosedForm(fam) => write!(f, "AxisClosedForm({})", fam.as_str()),
            Justification::ZeroImage => write!(f, "ZeroImage"),
            Justification::EmpiricalOverflow { step } => write!(f, "EmpiricalOverflow(step={step})"),
            Justification::Unresolved => write!(f, "Unresolved"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome<T> {
    ConvergesToOrigin,
    Diverges,
    ConvergesToPoint(State4<T>),
    Unknown,
}

impl<T> Outcome<T> {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::ConvergesToOrigin => "ConvergesToOrigin",
            Outcome::Diverges => "Diverges",
            Outcome::ConvergesToPoint(_) => "ConvergesToPoint",
            Outcome::Unknown => "Unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitPrediction<T> {
    pub outcome: Outcome<T>,
    pub justification: Justification,
}

impl<T> LimitPrediction<T> {
    fn new(outcome: Outcome<T>, justification: Justification) -> Self {
        Self { outcome, justification }
    }

    fn unknown() -> Self {
        Self::new(Outcome::Unknown, Justification::Unresolved)
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self.outcome, Outcome::Unknown)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorConfig<T> {
    /// Cap on the iterate index searched for a witness.
    pub k_max: usize,
    pub tol: T,
}

impl<T: Scalar> Default for PredictorConfig<T> {
    fn default() -> Self {
        Self { k_max: 50, tol: T::tol(BOUNDARY_TOL) }
    }
}

/// Steps 1–4 for a nonnegative state. Records the first overflow step seen.
fn nonnegative_stage<T: Scalar>(
    w: &Hemophilia<T>,
    t: &State4<T>,
    cfg: &PredictorConfig<T>,
    overflow: &mut Option<usize>,
) -> Option<LimitPrediction<T>> {
    let four = T::four();
    let tol = cfg.tol;
    if t.cross_mass() < four - tol {
        return Some(LimitPrediction::new(Outcome::ConvergesToOrigin, Justification::MassBelowFour));
    }
    if t.sum() <= four + tol {
        let mut s = *t;
        for k in 0..=cfg.k_max {
            if imbalance(w, &s).abs() > tol {
                return Some(LimitPrediction::new(
                    Outcome::ConvergesToOrigin,
                    Justification::BoundaryImbalance { k },
                ));
            }
            match w.apply(&s) {
                Ok(next) => s = next,
                Err(_) => break,
            }
        }
        return None;
    }
    let mut s = *t;
    for k in 0..=cfg.k_max {
        if s.cross_mass() < four - tol {
            return Some(LimitPrediction::new(
                Outcome::ConvergesToOrigin,
                Justification::MassDrop { k },
            ));
        }
        match w.apply(&s) {
            Ok(next) => s = next,
            Err(_) => {
                overflow.get_or_insert(k + 1);
                break;
            }
        }
    }
    if self_reproduction(w, t) > T::one() + tol {
        return Some(LimitPrediction::new(Outcome::Diverges, Justification::SelfReproduction));
    }
    None
}

fn is_nonnegative<T: Scalar>(t: &State4<T>) -> bool {
    t.to_array().iter().all(|&c| c >= T::zero())
}

/// Predicted ω-limit of the orbit of `t`.
pub fn predict_limit<T: Scalar>(
    w: &Hemophilia<T>,
    t: &State4<T>,
    cfg: &PredictorConfig<T>,
) -> Result<LimitPrediction<T>> {
    if !t.is_finite() {
        return Err(Error::Overflow);
    }
    let mut overflow = None;
    let region = classify_region(t, Some(w), cfg.tol);

    if region.contains(RegionFlags::P) {
        if let Some(p) = nonnegative_stage(w, t, cfg, &mut overflow) {
            return Ok(p);
        }
    } else {
        let reflected = if region.contains(RegionFlags::N) {
            Some((SignRegion::N, 1))
        } else if region.contains(RegionFlags::N0) {
            Some((SignRegion::N0, 2))
        } else if region.contains(RegionFlags::N1) {
            Some((SignRegion::N1, 2))
        } else {
            None
        };
        if let Some((sign, steps)) = reflected {
            match w.apply_n(t, steps) {
                Ok(image) if is_nonnegative(&image) => {
                    let mut inner_overflow = None;
                    if let Some(p) = nonnegative_stage(w, &image, cfg, &mut inner_overflow) {
                        return Ok(LimitPrediction::new(
                            p.outcome,
                            Justification::SignReflection {
                                region: sign,
                                inner: Box::new(p.justification),
                            },
                        ));
                    }
                    overflow = inner_overflow.map(|k| k + steps);
                }
                Ok(_) => {}
                Err(_) => overflow = Some(steps),
            }
        }
    }

    if region.contains(RegionFlags::O) {
        return Ok(LimitPrediction::new(Outcome::ConvergesToOrigin, Justification::ZeroImage));
    }
    if let Ok(axis) = axis_limit(w, t, cfg.tol) {
        return Ok(axis);
    }
    if let Some(step) = overflow {
        return Ok(LimitPrediction::new(
            Outcome::Diverges,
            Justification::EmpiricalOverflow { step },
        ));
    }
    Ok(LimitPrediction::unknown())
}

/// The plane `t` lies on, its two active coordinates and their image
/// coefficients: `(p, q) ↦ (α·pq, β·pq)`.
struct AxisOrbit<T> {
    family: AxisFamily,
    p0: T,
    q0: T,
    alpha: T,
    beta: T,
}

impl<T: Scalar> AxisOrbit<T> {
    fn detect(w: &Hemophilia<T>, t: &State4<T>, tol: T) -> Result<Self> {
        let z = T::zero();
        let p = w.params();
        if t.y == z && t.v == z {
            return Ok(Self { family: AxisFamily::XU, p0: t.x, q0: t.u, alpha: p.a1, beta: p.a2 });
        }
        let mut matched = false;
        if t.x == z && t.u == z {
            matched = true;
            if p.d2.abs() <= tol {
                return Ok(Self { family: AxisFamily::YV, p0: t.y, q0: t.v, alpha: p.d1, beta: p.d3 });
            }
        }
        if t.x == z && t.v == z {
            matched = true;
            if p.b1.abs() <= tol && p.b4.abs() <= tol {
                return Ok(Self { family: AxisFamily::YU, p0: t.y, q0: t.u, alpha: p.b2, beta: p.b3 });
            }
        }
        if matched {
            Err(Error::ParameterConditionViolated(
                "(0,y,0,v) needs d2 = 0; (0,y,u,0) needs b1 = b4 = 0".into(),
            ))
        } else {
            Err(Error::NotOnSupportedSubspace)
        }
    }

    fn embed(&self, p: T, q: T) -> State4<T> {
        let z = T::zero();
        match self.family {
            AxisFamily::XU => State4::new(p, z, q, z),
            AxisFamily::YV => State4::new(z, p, z, q),
            AxisFamily::YU => State4::new(z, p, q, z),
        }
    }

    fn degenerate(&self, tol: T) -> bool {
        self.alpha <= tol || self.beta <= tol
    }

    fn nth(&self, n: usize, tol: T) -> State4<T> {
        if n == 0 {
            return self.embed(self.p0, self.q0);
        }
        let m0 = self.p0 * self.q0;
        if self.degenerate(tol) {
            return if n == 1 {
                self.embed(self.alpha * m0, self.beta * m0)
            } else {
                State4::zero()
            };
        }
        // (αβ m0)^(2^(n-1)) by repeated squaring
        let mut s = self.alpha * self.beta * m0;
        for _ in 1..n {
            if s.is_zero() || s == T::one() || !s.is_finite() {
                break;
            }
            s = s * s;
        }
        self.embed(s / self.beta, s / self.alpha)
    }

    fn limit(&self, tol: T) -> LimitPrediction<T> {
        let just = Justification::AxisClosedForm(self.family);
        if self.degenerate(tol) {
            return LimitPrediction::new(Outcome::ConvergesToOrigin, just);
        }
        let s = (self.alpha * self.beta * self.p0 * self.q0).abs();
        let outcome = if s < T::one() - tol {
            Outcome::ConvergesToOrigin
        } else if s > T::one() + tol {
            Outcome::Diverges
        } else {
            Outcome::ConvergesToPoint(self.embed(T::one() / self.beta, T::one() / self.alpha))
        };
        LimitPrediction::new(outcome, just)
    }
}

fn axis_limit<T: Scalar>(w: &Hemophilia<T>, t: &State4<T>, tol: T) -> Result<LimitPrediction<T>> {
    Ok(AxisOrbit::detect(w, t, tol)?.limit(tol))
}

/// `W^n(t0)` from the closed form on a coordinate plane, with the limit.
pub fn closed_form_axis_trajectory<T: Scalar>(
    w: &Hemophilia<T>,
    t0: &State4<T>,
    n: usize,
) -> Result<(State4<T>, LimitPrediction<T>)> {
    let tol = T::tol(BOUNDARY_TOL);
    let orbit = AxisOrbit::detect(w, t0, tol)?;
    Ok((orbit.nth(n, tol), orbit.limit(tol)))
}

/// What an orbit was observed to do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmpiricalOutcome<T> {
    Origin { steps: usize },
    Point { state: State4<T>, steps: usize },
    Blowup { steps: usize },
    Undecided { steps: usize },
}

impl<T> EmpiricalOutcome<T> {
    pub fn as_str(&self) -> &'static str {
        match self {
            EmpiricalOutcome::Origin { .. } => "Origin",
            EmpiricalOutcome::Point { .. } => "Point",
            EmpiricalOutcome::Blowup { .. } => "Blowup",
            EmpiricalOutcome::Undecided { .. } => "Undecided",
        }
    }

    pub fn steps(&self) -> usize {
        match *self {
            EmpiricalOutcome::Origin { steps }
            | EmpiricalOutcome::Point { steps, .. }
            | EmpiricalOutcome::Blowup { steps }
            | EmpiricalOutcome::Undecided { steps } => steps,
        }
    }
}

/// Iterates until the orbit settles, blows up, or the step cap is reached.
pub fn simulate_until<T: Scalar>(
    w: &Hemophilia<T>,
    t: &State4<T>,
    caps: &IterCaps<T>,
) -> EmpiricalOutcome<T> {
    let caps = IterCaps { stop_early: true, ..*caps };
    let tr = iterate(w, t, &caps);
    let steps = tr.steps();
    match tr.termination {
        Termination::ConvergedToOrigin => EmpiricalOutcome::Origin { steps },
        Termination::ConvergedToPoint => EmpiricalOutcome::Point { state: *tr.last(), steps },
        Termination::Overflowed => EmpiricalOutcome::Blowup { steps },
        Termination::CapReached => EmpiricalOutcome::Undecided { steps },
    }
}

/// Whether an empirical outcome is consistent with a prediction. Unknown
/// predictions agree with everything.
pub fn agrees<T: Scalar>(pred: &Outcome<T>, emp: &EmpiricalOutcome<T>, point_tol: T) -> bool {
    match (pred, emp) {
        (Outcome::Unknown, _) => true,
        (Outcome::ConvergesToOrigin, EmpiricalOutcome::Origin { .. }) => true,
        (Outcome::Diverges, EmpiricalOutcome::Blowup { .. }) => true,
        (Outcome::ConvergesToPoint(s), EmpiricalOutcome::Point { state, .. }) => {
            s.dist(state) <= point_tol
        }
        _ => false,
    }
}

/// Limit prediction for the general operator on nonnegative data.
pub fn predict_limit_general<T: Scalar>(
    op: &GeneralOperator<T>,
    t: &StateN<T>,
) -> Result<LimitPrediction<T>> {
    if t.dims() != (op.eta(), op.nu()) {
        return Err(Error::DimensionMismatch {
            expected: format!("({}, {})", op.eta(), op.nu()),
            found: format!("{:?}", t.dims()),
        });
    }
    if t.iter().any(|&c| !(c >= T::zero())) {
        return Err(Error::NegativeCoordinate);
    }
    let tol = T::tol(BOUNDARY_TOL);
    if t.sum() < T::four() - tol {
        return Ok(LimitPrediction::new(Outcome::ConvergesToOrigin, Justification::MassBelowFour));
    }
    if pair_reproduction(op, t) > T::one() + tol {
        return Ok(LimitPrediction::new(Outcome::Diverges, Justification::PairReproduction));
    }
    Ok(LimitPrediction::unknown())
}

/// `max_{i,l} pf[i][l][i]·pm[i][l][l]·x_i·y_l` over female types `i` and
/// male types `l`.
pub fn pair_reproduction<T: Scalar>(op: &GeneralOperator<T>, t: &StateN<T>) -> T {
    let mut best = T::neg_infinity();
    for i in 0..op.eta() {
        for l in 0..op.nu() {
            let v = op.pf(i, l, i) * op.pm(i, l, l) * t.x[i] * t.y[l];
            best = best.max(v);
        }
    }
    best
}
