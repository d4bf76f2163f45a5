//! Parsers for `--state`, `--grid`, `--vary` and `--set` arguments, and the
//! proportional rebalancing rule used by parameter sweeps.

use gonodyn_core::params::COEFFICIENT_NAMES;
use gonodyn_core::{Params, State};

use crate::error::CliError;

/// Upper bound on grid and sweep sizes.
pub const MAX_POINTS: usize = 10_000_000;

pub const COORDS: [&str; 4] = ["x", "y", "u", "v"];

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| usage(format!("{what}: '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(usage(format!("{what}: '{s}' is not finite")));
    }
    Ok(v)
}

pub fn numbers(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|p| number(p, what)).collect()
}

pub fn state4(s: &str) -> Result<State, CliError> {
    match numbers(s, "--state")?.as_slice() {
        &[x, y, u, v] => Ok(State::new(x, y, u, v)),
        other => Err(usage(format!("--state expects x,y,u,v, got {} values", other.len()))),
    }
}

/// `lo:hi:count`, evenly spaced, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Range {
    pub fn parse(s: &str, what: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(usage(format!("{what}: expected lo:hi:count, got '{s}'")));
        };
        let lo = number(lo, what)?;
        let hi = number(hi, what)?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| usage(format!("{what}: count '{count}' is not a positive integer")))?;
        if !(hi > lo) {
            return Err(usage(format!("{what}: range must have positive extent ({lo} >= {hi})")));
        }
        if count < 2 {
            return Err(usage(format!("{what}: count must be at least 2")));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * (i as f64 / (self.count - 1) as f64)
    }
}

/// A 2-D slice of state space: two coordinates swept, two pinned.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// Indices into `x, y, u, v` of the first (column) and second (row) axis.
    pub axes: [usize; 2],
    pub ranges: [Range; 2],
    pub pinned: [f64; 4],
}

impl Grid {
    /// `x=0:5:101,u=0:5:101,y=0,v=0`; unmentioned coordinates are pinned to 0.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let mut pinned = [0.0; 4];
        let mut seen = [false; 4];
        let mut free: Vec<(usize, Range)> = Vec::new();
        for item in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, val) = item
                .split_once('=')
                .ok_or_else(|| usage(format!("--grid: expected name=value, got '{item}'")))?;
            let k = COORDS
                .iter()
                .position(|c| *c == name.trim())
                .ok_or_else(|| usage(format!("--grid: unknown coordinate '{name}'")))?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(usage(format!("--grid: coordinate '{name}' given twice")));
            }
            if val.contains(':') {
                free.push((k, Range::parse(val, "--grid")?));
            } else {
                pinned[k] = number(val, "--grid")?;
            }
        }
        let [(a0, r0), (a1, r1)] = free.as_slice() else {
            return Err(usage(format!("--grid: exactly two coordinates must be ranges, got {}", free.len())));
        };
        let grid = Self { axes: [*a0, *a1], ranges: [*r0, *r1], pinned };
        if grid.len() > MAX_POINTS {
            return Err(usage(format!("--grid: {} points exceed the limit of {MAX_POINTS}", grid.len())));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.ranges[0].count.saturating_mul(self.ranges[1].count)
    }

    /// Grid point `index`, row-major with the first axis varying fastest.
    pub fn point(&self, index: usize) -> (usize, usize, State) {
        let i = index % self.ranges[0].count;
        let j = index / self.ranges[0].count;
        let mut c = self.pinned;
        c[self.axes[0]] = self.ranges[0].value(i);
        c[self.axes[1]] = self.ranges[1].value(j);
        (i, j, State::from_array(c))
    }

    pub fn axis_names(&self) -> [&'static str; 2] {
        [COORDS[self.axes[0]], COORDS[self.axes[1]]]
    }
}

fn coefficient(name: &str, what: &str) -> Result<&'static str, CliError> {
    COEFFICIENT_NAMES
        .iter()
        .copied()
        .find(|c| *c == name.trim())
        .ok_or_else(|| usage(format!("{what}: unknown coefficient '{name}'")))
}

/// `name=value`.
pub fn assignment(s: &str) -> Result<(&'static str, f64), CliError> {
    let (name, val) = s
        .split_once('=')
        .ok_or_else(|| usage(format!("--set: expected name=value, got '{s}'")))?;
    Ok((coefficient(name, "--set")?, number(val, "--set")?))
}

/// `name=lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vary {
    pub name: &'static str,
    pub range: Range,
}

impl Vary {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| usage(format!("--vary: expected name=lo:hi:count, got '{s}'")))?;
        Ok(Self { name: coefficient(name, "--vary")?, range: Range::parse(range, "--vary")? })
    }
}

/// Normalization group each coefficient belongs to.
pub fn group_of(name: &str) -> &'static [&'static str] {
    const GROUPS: [&[&str]; 4] = [&["a1", "a2"], &["c1", "c2"], &["b1", "b2", "b3", "b4"], &["d1", "d2", "d3"]];
    GROUPS.iter().find(|g| g.contains(&name)).expect("known coefficient")
}

/// Sets `assigned` coefficients and rescales the other members of each
/// affected group proportionally so the group sums to one again.
pub fn rebalance(base: &Params, assigned: &[(&str, f64)]) -> Result<Params, String> {
    let mut p = *base;
    for &(name, value) in assigned {
        if !(0.0..=1.0).contains(&value) {
            return Err(format!("{name} = {value} outside [0, 1]"));
        }
        p.set(name, value);
    }
    let mut groups: Vec<&[&str]> = Vec::new();
    for (n, _) in assigned {
        let g = group_of(n);
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    for group in groups {
        let fixed: f64 = group
            .iter()
            .filter(|m| assigned.iter().any(|(n, _)| n == *m))
            .map(|m| p.get(m).unwrap())
            .sum();
        let free: Vec<&str> = group.iter().copied().filter(|m| !assigned.iter().any(|(n, _)| n == m)).collect();
        let old: f64 = free.iter().map(|m| base.get(m).unwrap()).sum();
        let need = 1.0 - fixed;
        if need < -1e-12 {
            return Err(format!("group {group:?}: assigned values sum to {fixed} > 1"));
        }
        if need.abs() <= 1e-12 {
            free.iter().for_each(|m| {
                p.set(m, 0.0);
            });
        } else if old > 0.0 {
            free.iter().for_each(|m| {
                p.set(m, base.get(m).unwrap() * need / old);
            });
        } else {
            return Err(format!("group {group:?}: nothing left to rescale"));
        }
    }
    Ok(p)
}
