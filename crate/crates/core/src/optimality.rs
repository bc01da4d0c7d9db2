//! When does successive relaying reach the cut-set bound?
//!
//! With all four links nonzero, the two branch rates coincide exactly when
//! one of three conditions holds:
//!
//! 1. `c01 * c02 = c13 * c23` (product condition),
//! 2. `c01 = c02` while `c01 * c02 <= c13 * c23`,
//! 3. `c13 = c23` while `c01 * c02 >= c13 * c23`.
//!
//! Only the product condition closes the gap to the cut-set bound. Under it
//! the schedule `t* = (0, c01 / (c13 + c01), c02 / (c02 + c23), 0)` equalizes
//! every cut, and moving weight off `t*` raises one of cuts 2 and 3 only by
//! lowering the other.

use serde::{Deserialize, Serialize};

use crate::channel::{derive_capacities, ChannelSpec, LinkCapacities};
use crate::cutset::{cut_values, solve_bound, STATES};
use crate::error::{Error, Result};
use crate::scalar::{unit_scale, Scalar};
use crate::sr_rate::{normalized_form, sr_rate_min_form};

/// Relative tolerance on `|c01 c02 - c13 c23|` for the product condition.
pub const PRODUCT_TOLERANCE: f64 = 1e-9;
/// Relative gap below which an instance counts as capacity-achieving.
pub const CERTIFY_TOLERANCE: f64 = 1e-8;
/// Largest negative gap tolerated before the solve is declared broken.
pub const NEGATIVE_GAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaCase {
    ProductEqual,
    SourceSidesEqual,
    RelaySidesEqual,
    None,
}

impl LemmaCase {
    pub const ALL: [LemmaCase; 4] = [
        LemmaCase::ProductEqual,
        LemmaCase::SourceSidesEqual,
        LemmaCase::RelaySidesEqual,
        LemmaCase::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaCase::ProductEqual => "product_equal",
            LemmaCase::SourceSidesEqual => "source_sides_equal",
            LemmaCase::RelaySidesEqual => "relay_sides_equal",
            LemmaCase::None => "none",
        }
    }
}

impl std::fmt::Display for LemmaCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport<T = f64> {
    pub lemma_case: LemmaCase,
    /// Product condition within [`PRODUCT_TOLERANCE`], evaluated even when
    /// some link is dead.
    pub condition_holds: bool,
    pub predicted_rate: Option<T>,
    pub t_star: Option<[T; STATES]>,
    /// `max_k cut_k(t*) - min_k cut_k(t*)`.
    pub t_star_cut_spread: Option<T>,
    pub r_sr: T,
    pub bound: T,
    pub gap: T,
    pub capacity_certified: bool,
    pub hypothesis_warning: Option<String>,
}

/// Shift of weight from `t*` into states 1 and 4: `t1 += epsilon`,
/// `t4 += eta`, `t2 -= gamma`, `t3 -= delta`, with
/// `gamma + delta = epsilon + eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec<T = f64> {
    pub epsilon: T,
    pub eta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Scalar> PerturbationSpec<T> {
    pub fn new(epsilon: T, eta: T, gamma: T, delta: T) -> Result<Self> {
        if !(epsilon >= T::zero()) {
            return Err(Error::domain("epsilon", "must be >= 0"));
        }
        if !(eta >= T::zero()) {
            return Err(Error::domain("eta", "must be >= 0"));
        }
        let residual = gamma + delta - epsilon - eta;
        if !(residual.abs() <= T::tol(1e-12)) {
            return Err(Error::domain(
                "delta",
                format!("gamma + delta - epsilon - eta = {residual}, must be 0"),
            ));
        }
        Ok(PerturbationSpec {
            epsilon,
            eta,
            gamma,
            delta,
        })
    }

    /// Derives `delta` from the balance relation.
    pub fn balanced(epsilon: T, eta: T, gamma: T) -> Result<Self> {
        Self::new(epsilon, eta, gamma, epsilon + eta - gamma)
    }

    pub fn apply(&self, t: &[T; STATES]) -> [T; STATES] {
        [
            t[0] + self.epsilon,
            t[1] - self.gamma,
            t[2] - self.delta,
            t[3] + self.eta,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationOutcome<T = f64> {
    /// `(epsilon - gamma (1 + alpha) + alpha eta) a`.
    pub delta_c2: T,
    /// `(-epsilon + gamma (1 + alpha) - alpha eta) b / alpha`.
    pub delta_c3: T,
    /// Cut 2 and 3 changes measured by evaluating the cuts directly.
    pub measured_delta_c2: T,
    pub measured_delta_c3: T,
    pub min_before: T,
    pub min_after: T,
    pub opposite_signs: bool,
    pub min_not_increased: bool,
}

fn first_dead_link<T: Scalar>(caps: &LinkCapacities<T>) -> Option<&'static str> {
    ["c01", "c02", "c13", "c23"]
        .into_iter()
        .zip(caps.links())
        .find(|(_, c)| *c <= T::zero())
        .map(|(name, _)| name)
}

fn nearly_equal<T: Scalar>(x: T, y: T, tol: T) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs())
}

/// Product condition `c01 c02 = c13 c23` within relative `tol`.
pub fn product_condition<T: Scalar>(caps: &LinkCapacities<T>, tol: T) -> bool {
    nearly_equal(caps.source_product(), caps.relay_product(), tol)
}

/// Which equal-rate condition the instance satisfies, checked in the order
/// product, source sides, relay sides.
pub fn classify<T: Scalar>(caps: &LinkCapacities<T>, tol: T) -> Result<LemmaCase> {
    if !(tol > T::zero() && tol <= T::lit(1e-3)) {
        return Err(Error::Config(format!("classification tolerance {tol} not in (0, 1e-3]")));
    }
    if let Some(link) = first_dead_link(caps) {
        return Err(Error::Hypothesis(link));
    }
    let (src, rly) = (caps.source_product(), caps.relay_product());
    let case = if product_condition(caps, tol) {
        LemmaCase::ProductEqual
    } else if nearly_equal(caps.c01, caps.c02, tol) && src <= rly {
        LemmaCase::SourceSidesEqual
    } else if nearly_equal(caps.c13, caps.c23, tol) && src >= rly {
        LemmaCase::RelaySidesEqual
    } else {
        LemmaCase::None
    };
    Ok(case)
}

/// Rate the successive schedule reaches under each equal-rate condition.
pub fn predicted_rate<T: Scalar>(caps: &LinkCapacities<T>, case: LemmaCase) -> Result<T> {
    match case {
        LemmaCase::ProductEqual => {
            let den = caps.c13 + caps.c01;
            if den == T::zero() {
                return Err(Error::Degenerate("c13 + c01 = 0"));
            }
            Ok(caps.c01 * (caps.c13 + caps.c02) / den)
        }
        LemmaCase::SourceSidesEqual => Ok(caps.c02),
        LemmaCase::RelaySidesEqual => Ok(caps.c13),
        LemmaCase::None => Err(Error::NoCase),
    }
}

/// The time-sharing vector that equalizes cuts 2 and 3.
pub fn t_star<T: Scalar>(caps: &LinkCapacities<T>) -> Result<[T; STATES]> {
    if let Some(link) = first_dead_link(caps) {
        return Err(Error::Hypothesis(link));
    }
    if !product_condition(caps, T::lit(PRODUCT_TOLERANCE)) {
        return Err(Error::Condition {
            lhs: caps.source_product().to_f64_lossy(),
            rhs: caps.relay_product().to_f64_lossy(),
        });
    }
    let z = T::zero();
    Ok([
        z,
        caps.c01 / (caps.c13 + caps.c01),
        caps.c02 / (caps.c02 + caps.c23),
        z,
    ])
}

/// Moves away from `t*` and compares the predicted first-order changes of
/// cuts 2 and 3 with the changes measured on the cuts themselves.
pub fn perturbation_check<T: Scalar>(
    caps: &LinkCapacities<T>,
    pert: &PerturbationSpec<T>,
) -> Result<PerturbationOutcome<T>> {
    let base = t_star(caps)?;
    let moved = pert.apply(&base);
    let tol = T::tol(1e-12);
    if let Some((i, ti)) = moved.iter().enumerate().find(|(_, ti)| **ti < -tol) {
        return Err(Error::Infeasible(format!("perturbed t{} = {ti}", i + 1)));
    }
    let moved = moved.map(|ti| ti.max(T::zero()));

    let nf = normalized_form(caps)?;
    let one = T::one();
    let delta_c2 = (pert.epsilon - pert.gamma * (one + nf.alpha) + nf.alpha * pert.eta) * nf.a;
    let delta_c3 =
        (-pert.epsilon + pert.gamma * (one + nf.alpha) - nf.alpha * pert.eta) * nf.b / nf.alpha;

    let before = cut_values(caps, &base)?;
    let after = cut_values(caps, &moved)?;
    let min_before = before[1].min(before[2]);
    let min_after = after[1].min(after[2]);
    Ok(PerturbationOutcome {
        delta_c2,
        delta_c3,
        measured_delta_c2: after[1] - before[1],
        measured_delta_c3: after[2] - before[2],
        min_before,
        min_after,
        opposite_signs: delta_c2 * delta_c3 <= T::tol(1e-18),
        min_not_increased: min_after <= min_before + T::tol(1e-12),
    })
}

/// Full capacity check of one channel instance.
pub fn certify<T: Scalar>(spec: &ChannelSpec<T>) -> Result<OptimalityReport<T>> {
    certify_capacities(&derive_capacities(spec)?)
}

/// [`certify`] for instances given directly in capacity space.
pub fn certify_capacities<T: Scalar>(caps: &LinkCapacities<T>) -> Result<OptimalityReport<T>> {
    caps.validate()?;
    let rate = sr_rate_min_form(caps);
    let solution = solve_bound(caps);
    let gap = solution.bound - rate.r_sr;
    if gap < -T::tol(NEGATIVE_GAP_TOLERANCE) {
        return Err(Error::NegativeGap {
            r_sr: rate.r_sr.to_f64_lossy(),
            bound: solution.bound.to_f64_lossy(),
        });
    }

    let condition_holds = product_condition(caps, T::lit(PRODUCT_TOLERANCE));
    let dead = first_dead_link(caps);
    let hypothesis_warning =
        dead.map(|link| format!("link {link} has zero capacity; equal-rate analysis does not apply"));
    let lemma_case = match dead {
        Some(_) => LemmaCase::None,
        None => classify(caps, T::lit(PRODUCT_TOLERANCE))?,
    };
    let predicted = match lemma_case {
        LemmaCase::None => None,
        case => Some(predicted_rate(caps, case)?),
    };

    let scale = unit_scale(solution.bound);
    let (t_star_vec, spread) = if lemma_case == LemmaCase::ProductEqual {
        let t = t_star(caps)?;
        let cuts = cut_values(caps, &t)?;
        let hi = cuts.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = cuts.iter().copied().fold(T::infinity(), T::min);
        (Some(t), Some(hi - lo))
    } else {
        (None, None)
    };
    let tol = T::tol(CERTIFY_TOLERANCE) * scale;
    let capacity_certified = lemma_case == LemmaCase::ProductEqual
        && condition_holds
        && gap <= tol
        && spread.is_some_and(|s| s <= tol);

    Ok(OptimalityReport {
        lemma_case,
        condition_holds,
        predicted_rate: predicted,
        t_star: t_star_vec,
        t_star_cut_spread: spread,
        r_sr: rate.r_sr,
        bound: solution.bound,
        gap,
        capacity_certified,
        hypothesis_warning,
    })
}
