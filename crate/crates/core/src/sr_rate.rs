//! Decode-and-forward rate of the two-phase successive relaying schedule.
//!
//! In branch 1 the source feeds relay 1 while relay 2 forwards for a
//! `lambda1` share of time, then the roles swap. Branch 2 is the mirror
//! schedule with share `lambda2`. The achievable rate is the better branch.

use serde::{Deserialize, Serialize};

use crate::channel::LinkCapacities;
use crate::error::{Error, Result};
use crate::scalar::{unit_scale, Scalar};

/// Relative tolerance under which the two branch rates count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Branch1,
    Branch2,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeFractions<T = f64> {
    pub lambda1: T,
    pub lambda2: T,
    /// Set when `c13 + c01 = 0` or `c23 + c02 = 0`; the affected fraction is 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrRateResult<T = f64> {
    pub lambda1: T,
    pub lambda2: T,
    pub r1: T,
    pub r2: T,
    pub r_sr: T,
    pub winner: Branch,
    pub degenerate: bool,
}

/// Capacities rewritten relative to the source links:
/// `b = c01`, `a = c02`, `c13 = alpha * a`, `c23 = beta * b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedForm<T = f64> {
    pub a: T,
    pub b: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> NormalizedForm<T> {
    /// `(c13, c23)` rebuilt from the normalized coordinates.
    pub fn relay_links(&self) -> (T, T) {
        (self.alpha * self.a, self.beta * self.b)
    }
}

fn ratio_or_zero<T: Scalar>(num: T, den: T) -> (T, bool) {
    if den == T::zero() {
        (T::zero(), true)
    } else {
        (num / den, false)
    }
}

/// `lambda1 = c13 / (c13 + c01)` and `lambda2 = c02 / (c23 + c02)`.
pub fn time_fractions<T: Scalar>(caps: &LinkCapacities<T>) -> TimeFractions<T> {
    let (lambda1, d1) = ratio_or_zero(caps.c13, caps.c13 + caps.c01);
    let (lambda2, d2) = ratio_or_zero(caps.c02, caps.c23 + caps.c02);
    TimeFractions {
        lambda1,
        lambda2,
        degenerate: d1 || d2,
    }
}

/// Branch rates evaluated literally as `lambda * C + min(..)`, with the
/// time fractions from [`time_fractions`].
pub fn sr_rate_min_form<T: Scalar>(caps: &LinkCapacities<T>) -> SrRateResult<T> {
    let fr = time_fractions(caps);
    let (l1, l2) = (fr.lambda1, fr.lambda2);
    let one = T::one();
    let r1 = l1 * caps.c01 + (l1 * caps.c23).min((one - l1) * caps.c02);
    let r2 = l2 * caps.c23 + ((one - l2) * caps.c13).min(l2 * caps.c01);
    let r_sr = r1.max(r2);
    let winner = if (r1 - r2).abs() <= T::tol(TIE_TOLERANCE) * unit_scale(r_sr) {
        Branch::Tie
    } else if r1 > r2 {
        Branch::Branch1
    } else {
        Branch::Branch2
    };
    SrRateResult {
        lambda1: l1,
        lambda2: l2,
        r1,
        r2,
        r_sr,
        winner,
        degenerate: fr.degenerate,
    }
}

/// Branch rates after substituting the time fractions:
///
/// `r1 = (c01 c13 + m) / (c13 + c01)` and `r2 = (c02 c23 + m) / (c23 + c02)`
/// with `m = min(c13 c23, c01 c02)`.
pub fn sr_rate_closed_form<T: Scalar>(caps: &LinkCapacities<T>) -> Result<(T, T)> {
    let den1 = caps.c13 + caps.c01;
    let den2 = caps.c23 + caps.c02;
    if den1 == T::zero() {
        return Err(Error::Degenerate("c13 + c01 = 0"));
    }
    if den2 == T::zero() {
        return Err(Error::Degenerate("c23 + c02 = 0"));
    }
    let m = caps.relay_product().min(caps.source_product());
    Ok((
        (caps.c01 * caps.c13 + m) / den1,
        (caps.c02 * caps.c23 + m) / den2,
    ))
}

pub fn normalized_form<T: Scalar>(caps: &LinkCapacities<T>) -> Result<NormalizedForm<T>> {
    if caps.c01 == T::zero() {
        return Err(Error::Degenerate("c01 = 0, normalization undefined"));
    }
    if caps.c02 == T::zero() {
        return Err(Error::Degenerate("c02 = 0, normalization undefined"));
    }
    let (a, b) = (caps.c02, caps.c01);
    Ok(NormalizedForm {
        a,
        b,
        alpha: caps.c13 / a,
        beta: caps.c23 / b,
    })
}
