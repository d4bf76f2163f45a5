//! Orbit generation with stopping rules.

use crate::error::Result;
use crate::general::GeneralOperator;
use crate::params::Hemophilia;
use crate::scalar::Scalar;
use crate::state::{State4, StateN};

/// A map that can be iterated.
pub trait EvolutionMap<T: Scalar> {
    type State: Clone;

    fn step(&self, s: &Self::State) -> Result<Self::State>;

    fn norm(s: &Self::State) -> T;

    fn dist(a: &Self::State, b: &Self::State) -> T;
}

impl<T: Scalar> EvolutionMap<T> for Hemophilia<T> {
    type State = State4<T>;

    fn step(&self, s: &State4<T>) -> Result<State4<T>> {
        self.apply(s)
    }

    fn norm(s: &State4<T>) -> T {
        s.norm()
    }

    fn dist(a: &State4<T>, b: &State4<T>) -> T {
        a.dist(b)
    }
}

impl<T: Scalar> EvolutionMap<T> for GeneralOperator<T> {
    type State = StateN<T>;

    fn step(&self, s: &StateN<T>) -> Result<StateN<T>> {
        self.apply(s)
    }

    fn norm(s: &StateN<T>) -> T {
        s.norm()
    }

    fn dist(a: &StateN<T>, b: &StateN<T>) -> T {
        a.dist(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    CapReached,
    ConvergedToOrigin,
    ConvergedToPoint,
    Overflowed,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::CapReached => "CapReached",
            Termination::ConvergedToOrigin => "ConvergedToOrigin",
            Termination::ConvergedToPoint => "ConvergedToPoint",
            Termination::Overflowed => "Overflowed",
        }
    }
}

/// Stopping rules for [`iterate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterCaps<T> {
    pub steps: usize,
    /// Orbit is declared divergent once its max-norm exceeds this.
    pub max_norm: T,
    /// Orbit is declared at the origin once its max-norm drops below this.
    pub origin_tol: T,
    /// Successive states closer than this (max-norm) count as a fixed point.
    pub point_tol: T,
    /// When false, only overflow stops the orbit early; the termination of a
    /// full-length orbit is read off its last two states.
    pub stop_early: bool,
}

impl<T: Scalar> Default for IterCaps<T> {
    fn default() -> Self {
        Self {
            steps: 200,
            max_norm: T::lit(1e12),
            origin_tol: T::tol(1e-12),
            point_tol: T::tol(1e-13),
            stop_early: true,
        }
    }
}

impl<T: Scalar> IterCaps<T> {
    pub fn with_steps(steps: usize) -> Self {
        Self { steps, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    /// `states[k+1] = W(states[k])`.
    pub states: Vec<S>,
    pub termination: Termination,
}

impl<S> Trajectory<S> {
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory holds its initial state")
    }
}

fn settle<T: Scalar, M: EvolutionMap<T>>(
    prev: &M::State,
    cur: &M::State,
    caps: &IterCaps<T>,
) -> Option<Termination> {
    let norm = M::norm(cur);
    if norm > caps.max_norm {
        Some(Termination::Overflowed)
    } else if norm < caps.origin_tol {
        Some(Termination::ConvergedToOrigin)
    } else if M::dist(prev, cur) < caps.point_tol {
        Some(Termination::ConvergedToPoint)
    } else {
        None
    }
}

/// Iterates `map` from `t0` for at most `caps.steps` generations.
pub fn iterate<T: Scalar, M: EvolutionMap<T>>(
    map: &M,
    t0: &M::State,
    caps: &IterCaps<T>,
) -> Trajectory<M::State> {
    let mut states = vec![t0.clone()];
    let norm0 = M::norm(t0);
    if caps.stop_early && norm0 < caps.origin_tol {
        return Trajectory { states, termination: Termination::ConvergedToOrigin };
    }
    if !(norm0 <= caps.max_norm) {
        return Trajectory { states, termination: Termination::Overflowed };
    }
    for _ in 0..caps.steps {
        let cur = states.last().unwrap();
        let next = match map.step(cur) {
            Ok(s) => s,
            Err(_) => {
                return Trajectory { states, termination: Termination::Overflowed };
            }
        };
        let verdict = settle::<T, M>(cur, &next, caps);
        states.push(next);
        match verdict {
            Some(Termination::Overflowed) => {
                return Trajectory { states, termination: Termination::Overflowed };
            }
            Some(t) if caps.stop_early => return Trajectory { states, termination: t },
            _ => {}
        }
    }
    let termination = match states.len() {
        1 if M::norm(&states[0]) < caps.origin_tol => Termination::ConvergedToOrigin,
        1 => Termination::CapReached,
        n => settle::<T, M>(&states[n - 2], &states[n - 1], caps).unwrap_or(Termination::CapReached),
    };
    Trajectory { states, termination }
}
