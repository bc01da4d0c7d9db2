//! Test-only oracles. Nothing here calls into the solver under test; the cut
//! rows are written out again from their definition.

#![allow(dead_code)]

use diamond_relay::LinkCapacities;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cut rates at `t`, spelled out row by row.
pub fn cuts(c: &LinkCapacities, t: [f64; 4]) -> [f64; 4] {
    let [t1, t2, t3, t4] = t;
    [
        t1 * c.c012 + t2 * c.c02 + t3 * c.c01,
        t1 * c.c02 + t2 * (c.c02 + c.c13) + t4 * c.c13,
        t1 * c.c01 + t3 * (c.c01 + c.c23) + t4 * c.c23,
        t2 * c.c13 + t3 * c.c23 + t4 * c.c123,
    ]
}

pub fn min_cut(c: &LinkCapacities, t: [f64; 4]) -> f64 {
    cuts(c, t).into_iter().fold(f64::INFINITY, f64::min)
}

/// Exhaustive maximum of the min-cut over the simplex lattice with step
/// `1 / n`. Only usable for small `n`.
pub fn lattice_bound_exhaustive(c: &LinkCapacities, n: usize) -> f64 {
    let step = 1.0 / n as f64;
    let mut best = f64::NEG_INFINITY;
    for i1 in 0..=n {
        for i4 in 0..=n - i1 {
            let m = n - i1 - i4;
            for i2 in 0..=m {
                let t = [i1, i2, m - i2, i4].map(|i| i as f64 * step);
                best = best.max(min_cut(c, t));
            }
        }
    }
    best
}

/// Maximum of the min-cut over the same lattice, computed row by row: for
/// fixed `(t1, t4)` the min-cut is concave along `t2`, so the lattice maximum
/// of each row is found by bisecting on the sign of the forward difference.
/// Returns exactly what the exhaustive scan returns (up to ties).
pub fn lattice_bound(c: &LinkCapacities, n: usize) -> f64 {
    let step = 1.0 / n as f64;
    let mut best = f64::NEG_INFINITY;
    for i1 in 0..=n {
        for i4 in 0..=n - i1 {
            let m = n - i1 - i4;
            let f = |i2: usize| {
                min_cut(
                    c,
                    [i1 as f64 * step, i2 as f64 * step, (m - i2) as f64 * step, i4 as f64 * step],
                )
            };
            // first i2 with f(i2 + 1) < f(i2)
            let (mut lo, mut hi) = (0usize, m);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if f(mid + 1) < f(mid) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            best = best.max(f(lo));
        }
    }
    best
}

/// Capacities of a unit-power, unit-noise channel with these links.
pub fn induced(c01: f64, c02: f64, c13: f64, c23: f64) -> LinkCapacities {
    LinkCapacities::from_links(c01, c02, c13, c23).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on `(0, hi]`.
pub fn positive(rng: &mut impl Rng, hi: f64) -> f64 {
    hi * (1.0 - rng.gen::<f64>())
}

/// Uniform on `[lo, hi)`.
pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Random link tuple on `(0, 10]^4` completed with induced cut capacities.
pub fn random_caps(rng: &mut impl Rng) -> LinkCapacities {
    induced(
        positive(rng, 10.0),
        positive(rng, 10.0),
        positive(rng, 10.0),
        positive(rng, 10.0),
    )
}

/// Random instance satisfying `c01 c02 = c13 c23`.
pub fn random_product_caps(rng: &mut impl Rng) -> LinkCapacities {
    let (c01, c02, c13) = (
        uniform(rng, 0.1, 5.0),
        uniform(rng, 0.1, 5.0),
        uniform(rng, 0.1, 5.0),
    );
    induced(c01, c02, c13, c01 * c02 / c13)
}
