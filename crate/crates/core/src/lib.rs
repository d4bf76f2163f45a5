//! Numerical engine for gonosomal evolution operators of sex-linked
//! inheritance, with the X-linked hemophilia operator on ℝ⁴ as the main case.
//!
//! Everything is generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`); the `f64` instantiations used by the CLI are exported as
//! type aliases below.

pub mod error;
pub mod fixed_points;
pub mod general;
pub mod io;
pub mod iterate;
pub mod limit;
pub mod linalg;
pub mod params;
pub mod scalar;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use fixed_points::{
    all_fixed_points, closed_form_fixed_points, solve_general_fixed_points,
    solve_interior_fixed_points, FixedPoint, FixedPointForm, NewtonOptions, SeedGrid,
};
pub use general::{hemophilia_to_general, validate_general, GeneralOperator};
pub use iterate::{iterate, EvolutionMap, IterCaps, Termination, Trajectory};
pub use limit::{
    classify_region, closed_form_axis_trajectory, predict_limit, predict_limit_general,
    simulate_until, AxisFamily, EmpiricalOutcome, Justification, LimitPrediction, Outcome,
    PredictorConfig, Region, RegionFlags,
};
pub use params::{validate_hemophilia, Hemophilia, HemophiliaParams};
pub use scalar::Scalar;
pub use spectral::{
    char_coeffs, classify, eigenvalues_closed_form, eigenvalues_numeric, jacobian, CharCoeffs,
    Jacobian4, Spectrum, StabilityClass, StabilityTag,
};
pub use state::{State4, StateN};

pub type Params = HemophiliaParams<f64>;
pub type Operator = Hemophilia<f64>;
pub type State = State4<f64>;
pub type General = GeneralOperator<f64>;
pub type GeneralState = StateN<f64>;
pub type Params32 = HemophiliaParams<f32>;
pub type Operator32 = Hemophilia<f32>;
pub type State32 = State4<f32>;
