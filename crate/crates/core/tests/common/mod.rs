//! Seeded samplers shared by the integration suites.
#![allow(dead_code)]

use gonodyn_core::{GeneralOperator, Hemophilia, HemophiliaParams, State4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `N` nonnegative weights summing to one; each entry is zero with
/// probability `p_zero` (at least one entry stays positive).
pub fn simplex<const N: usize>(rng: &mut impl Rng, p_zero: f64) -> [f64; N] {
    loop {
        let mut w = [0.0; N];
        for c in w.iter_mut() {
            if !rng.gen_bool(p_zero) {
                *c = rng.gen_range(0.05..1.0);
            }
        }
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            for c in w.iter_mut() {
                *c /= s;
            }
            // fold rounding into the largest entry so the group sums to 1
            let residual = 1.0 - w.iter().sum::<f64>();
            let k = (0..N).max_by(|&i, &j| w[i].total_cmp(&w[j])).unwrap();
            w[k] += residual;
            return w;
        }
    }
}

pub fn params_from_groups(a: [f64; 2], c: [f64; 2], b: [f64; 4], d: [f64; 3]) -> HemophiliaParams<f64> {
    HemophiliaParams {
        a1: a[0],
        a2: a[1],
        c1: c[0],
        c2: c[1],
        b1: b[0],
        b2: b[1],
        b3: b[2],
        b4: b[3],
        d1: d[0],
        d2: d[1],
        d3: d[2],
    }
}

/// A valid operator; roughly one coefficient in `1/p_zero` is exactly zero.
pub fn operator(rng: &mut impl Rng, p_zero: f64) -> Hemophilia<f64> {
    let p = params_from_groups(
        simplex(rng, p_zero),
        simplex(rng, p_zero),
        simplex(rng, p_zero),
        simplex(rng, p_zero),
    );
    Hemophilia::new(p).expect("sampled parameters are valid")
}

/// Interior parameters: every coefficient in roughly `[0.05, 0.95]`.
pub fn interior_operator(rng: &mut impl Rng) -> Hemophilia<f64> {
    operator(rng, 0.0)
}

/// Parameters admitting the closed-form fixed point of the given support.
pub fn operator_with_form(rng: &mut impl Rng, form: char) -> Hemophilia<f64> {
    let mut a = simplex::<2>(rng, 0.0);
    let c = simplex::<2>(rng, 0.2);
    let mut b = simplex::<4>(rng, 0.2);
    let mut d = simplex::<3>(rng, 0.2);
    match form {
        '2' => a = simplex(rng, 0.0),
        '3' => {
            let [d1, d3] = simplex::<2>(rng, 0.0);
            d = [d1, 0.0, d3];
        }
        '4' => {
            let [b2, b3] = simplex::<2>(rng, 0.0);
            b = [0.0, b2, b3, 0.0];
        }
        _ => unreachable!("form {form}"),
    }
    Hemophilia::new(params_from_groups(a, c, b, d)).unwrap()
}

pub fn state(rng: &mut impl Rng, lo: f64, hi: f64) -> State4<f64> {
    State4::new(
        rng.gen_range(lo..hi),
        rng.gen_range(lo..hi),
        rng.gen_range(lo..hi),
        rng.gen_range(lo..hi),
    )
}

/// Nonnegative state with coordinate sum exactly scaled to `total`.
pub fn state_with_sum(rng: &mut impl Rng, total: f64) -> State4<f64> {
    let w = simplex::<4>(rng, 0.1);
    State4::from_array(w).scale(total)
}

/// Random general operator with `eta, nu ≤ 3`.
pub fn general_operator(rng: &mut impl Rng) -> GeneralOperator<f64> {
    let eta = rng.gen_range(1..=3);
    let nu = rng.gen_range(1..=3);
    let mut pf = vec![0.0; eta * nu * eta];
    let mut pm = vec![0.0; eta * nu * nu];
    for i in 0..eta {
        for r in 0..nu {
            let mut w: Vec<f64> = (0..eta + nu).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|c| *c /= s);
            for j in 0..eta {
                pf[(i * nu + r) * eta + j] = w[j];
            }
            for l in 0..nu {
                pm[(i * nu + r) * nu + l] = w[eta + l];
            }
        }
    }
    GeneralOperator::new(eta, nu, pf, pm).expect("sampled general operator is valid")
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn state_rel_err(a: &State4<f64>, b: &State4<f64>) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        a.dist(b) / scale
    }
}
