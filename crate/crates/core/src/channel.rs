//! Diamond channel instances and the Gaussian capacities derived from them.
//!
//! Nodes are numbered as source `0`, relays `1` and `2`, destination `3`.
//! Links are `0 -> 1`, `0 -> 2`, `1 -> 3` and `2 -> 3`; there is no direct
//! source-destination link and no relay-relay link. All capacities are in
//! bits per channel use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{unit_scale, Scalar};

/// One static diamond channel: power gains `g_ij = |h_ij|^2`, receiver noise
/// variances and transmit power budgets, all linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec<T = f64> {
    pub g01: T,
    pub g02: T,
    pub g13: T,
    pub g23: T,
    pub sigma1_sq: T,
    pub sigma2_sq: T,
    pub sigma3_sq: T,
    pub p_s: T,
    pub p_r1: T,
    pub p_r2: T,
}

/// The six capacities every rate and bound in the crate is built from.
///
/// `c012` is the broadcast cut from the source to both relays and `c123`
/// the coherent multiple-access cut from both relays to the destination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkCapacities<T = f64> {
    pub c01: T,
    pub c02: T,
    pub c13: T,
    pub c23: T,
    pub c012: T,
    pub c123: T,
}

fn check_finite<T: Scalar>(field: &'static str, x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(field, format!("must be finite, got {x}")))
    }
}

fn check_nonnegative<T: Scalar>(field: &'static str, x: T) -> Result<()> {
    check_finite(field, x)?;
    if x < T::zero() {
        return Err(Error::domain(field, format!("must be >= 0, got {x}")));
    }
    Ok(())
}

fn check_positive<T: Scalar>(field: &'static str, x: T) -> Result<()> {
    check_finite(field, x)?;
    if x <= T::zero() {
        return Err(Error::domain(field, format!("must be > 0, got {x}")));
    }
    Ok(())
}

/// `log2(1 + snr)`, accurate for small SNR.
fn log2_1p<T: Scalar>(snr: T) -> T {
    snr.ln_1p() / T::ln2()
}

/// `2^c - 1`, the SNR that a capacity of `c` bits corresponds to.
fn snr_for_capacity<T: Scalar>(c: T) -> T {
    (c * T::ln2()).exp_m1()
}

/// Gaussian point-to-point capacity `log2(1 + gain * power / noise_var)`.
pub fn link_capacity<T: Scalar>(gain: T, power: T, noise_var: T) -> Result<T> {
    check_nonnegative("gain", gain)?;
    check_nonnegative("power", power)?;
    check_positive("noise_var", noise_var)?;
    let signal = gain * power;
    if signal == T::zero() {
        return Ok(T::zero());
    }
    Ok(log2_1p(signal / noise_var))
}

/// Inverse of [`link_capacity`] in the gain argument.
pub fn gain_for_capacity<T: Scalar>(capacity: T, power: T, noise_var: T) -> Result<T> {
    check_nonnegative("capacity", capacity)?;
    check_positive("power", power)?;
    check_positive("noise_var", noise_var)?;
    Ok(snr_for_capacity(capacity) * noise_var / power)
}

impl<T: Scalar> ChannelSpec<T> {
    /// Unit powers and unit noise everywhere, with the given gains.
    pub fn unit(g01: T, g02: T, g13: T, g23: T) -> Self {
        let one = T::one();
        ChannelSpec {
            g01,
            g02,
            g13,
            g23,
            sigma1_sq: one,
            sigma2_sq: one,
            sigma3_sq: one,
            p_s: one,
            p_r1: one,
            p_r2: one,
        }
    }

    /// The unit-power, unit-noise channel whose link capacities are the
    /// given values.
    pub fn from_link_capacities(c01: T, c02: T, c13: T, c23: T) -> Result<Self> {
        let one = T::one();
        Ok(Self::unit(
            gain_for_capacity(c01, one, one)?,
            gain_for_capacity(c02, one, one)?,
            gain_for_capacity(c13, one, one)?,
            gain_for_capacity(c23, one, one)?,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        for (field, g) in [
            ("g01", self.g01),
            ("g02", self.g02),
            ("g13", self.g13),
            ("g23", self.g23),
        ] {
            check_nonnegative(field, g)?;
        }
        for (field, s) in [
            ("sigma1_sq", self.sigma1_sq),
            ("sigma2_sq", self.sigma2_sq),
            ("sigma3_sq", self.sigma3_sq),
        ] {
            check_positive(field, s)?;
        }
        for (field, p) in [("p_s", self.p_s), ("p_r1", self.p_r1), ("p_r2", self.p_r2)] {
            check_nonnegative(field, p)?;
        }
        Ok(())
    }
}

/// Computes all six capacities of a channel instance.
///
/// The broadcast and multiple-access SNRs are assembled from the per-link
/// SNRs, so `c012 >= max(c01, c02)` and `c123 >= max(c13, c23)` hold
/// exactly in floating point and not only up to rounding.
pub fn derive_capacities<T: Scalar>(spec: &ChannelSpec<T>) -> Result<LinkCapacities<T>> {
    spec.validate()?;
    let snr01 = spec.g01 * spec.p_s / spec.sigma1_sq;
    let snr02 = spec.g02 * spec.p_s / spec.sigma2_sq;
    let snr13 = spec.g13 * spec.p_r1 / spec.sigma3_sq;
    let snr23 = spec.g23 * spec.p_r2 / spec.sigma3_sq;
    let two = T::lit(2.0);
    Ok(LinkCapacities {
        c01: link_capacity(spec.g01, spec.p_s, spec.sigma1_sq)?,
        c02: link_capacity(spec.g02, spec.p_s, spec.sigma2_sq)?,
        c13: link_capacity(spec.g13, spec.p_r1, spec.sigma3_sq)?,
        c23: link_capacity(spec.g23, spec.p_r2, spec.sigma3_sq)?,
        c012: log2_1p(snr01 + snr02),
        // (sqrt(g13 p1) + sqrt(g23 p2))^2 / s3, expanded
        c123: log2_1p(snr13 + snr23 + two * (snr13 * snr23).sqrt()),
    })
}

impl<T: Scalar> LinkCapacities<T> {
    /// Capacities with explicit broadcast and multiple-access values.
    pub fn new(c01: T, c02: T, c13: T, c23: T, c012: T, c123: T) -> Result<Self> {
        let caps = LinkCapacities {
            c01,
            c02,
            c13,
            c23,
            c012,
            c123,
        };
        caps.validate()?;
        Ok(caps)
    }

    /// Link capacities completed with the `c012` and `c123` of their
    /// unit-power, unit-noise realization:
    /// `c012 = log2(2^c01 + 2^c02 - 1)` and
    /// `c123 = log2((sqrt(2^c13 - 1) + sqrt(2^c23 - 1))^2 + 1)`.
    pub fn from_links(c01: T, c02: T, c13: T, c23: T) -> Result<Self> {
        for (field, c) in [("c01", c01), ("c02", c02), ("c13", c13), ("c23", c23)] {
            check_nonnegative(field, c)?;
        }
        let (s01, s02) = (snr_for_capacity(c01), snr_for_capacity(c02));
        let (s13, s23) = (snr_for_capacity(c13), snr_for_capacity(c23));
        let caps = LinkCapacities {
            c01,
            c02,
            c13,
            c23,
            c012: log2_1p(s01 + s02).max(c01.max(c02)),
            c123: log2_1p(s13 + s23 + T::lit(2.0) * (s13 * s23).sqrt()).max(c13.max(c23)),
        };
        caps.validate()?;
        Ok(caps)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, c) in [
            ("c01", self.c01),
            ("c02", self.c02),
            ("c13", self.c13),
            ("c23", self.c23),
            ("c012", self.c012),
            ("c123", self.c123),
        ] {
            check_nonnegative(field, c)?;
        }
        let slack = |x: T| T::tol(1e-12) * unit_scale(x);
        let source_max = self.c01.max(self.c02);
        if self.c012 < source_max - slack(source_max) {
            return Err(Error::domain(
                "c012",
                format!("must be >= max(c01, c02) = {source_max}, got {}", self.c012),
            ));
        }
        let relay_max = self.c13.max(self.c23);
        if self.c123 < relay_max - slack(relay_max) {
            return Err(Error::domain(
                "c123",
                format!("must be >= max(c13, c23) = {relay_max}, got {}", self.c123),
            ));
        }
        Ok(())
    }

    /// `(c01, c02, c13, c23)`.
    pub fn links(&self) -> [T; 4] {
        [self.c01, self.c02, self.c13, self.c23]
    }

    /// `c01 * c02`, the product of the source-side links.
    pub fn source_product(&self) -> T {
        self.c01 * self.c02
    }

    /// `c13 * c23`, the product of the relay-side links.
    pub fn relay_product(&self) -> T {
        self.c13 * self.c23
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn link_capacity_examples() {
        assert!((link_capacity::<f64>(3.0, 1.0, 1.0).unwrap() - 2.0).abs() < EPS);
        assert_eq!(link_capacity(0.0, 5.0, 1.0).unwrap(), 0.0);
        assert!((link_capacity::<f64>(1.0, 1.0, 1.0).unwrap() - 1.0).abs() < EPS);
        assert_eq!(link_capacity(2.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn link_capacity_rejects_bad_domain() {
        assert!(matches!(
            link_capacity(1.0, 1.0, 0.0),
            Err(Error::Domain { field: "noise_var", .. })
        ));
        assert!(matches!(
            link_capacity(-1.0, 1.0, 1.0),
            Err(Error::Domain { field: "gain", .. })
        ));
        assert!(matches!(
            link_capacity(1.0, f64::NAN, 1.0),
            Err(Error::Domain { field: "power", .. })
        ));
        assert!(link_capacity(f64::INFINITY, 1.0, 1.0).is_err());
    }

    #[test]
    fn derive_symmetric_snr_three() {
        let caps = derive_capacities(&ChannelSpec::<f64>::unit(3.0, 3.0, 3.0, 3.0)).unwrap();
        for c in caps.links() {
            assert!((c - 2.0).abs() < EPS);
        }
        assert!((caps.c012 - 7f64.log2()).abs() < EPS);
        assert!((caps.c123 - 13f64.log2()).abs() < EPS);
    }

    #[test]
    fn dead_source_cut() {
        let caps = derive_capacities(&ChannelSpec::<f64>::unit(0.0, 0.0, 4.0, 9.0)).unwrap();
        assert_eq!((caps.c01, caps.c02, caps.c012), (0.0, 0.0, 0.0));
    }

    #[test]
    fn spec_validation_names_field() {
        let mut spec = ChannelSpec::<f64>::unit(1.0, 1.0, 1.0, 1.0);
        spec.sigma2_sq = 0.0;
        match spec.validate() {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "sigma2_sq"),
            other => panic!("unexpected {other:?}"),
        }
        spec.sigma2_sq = 1.0;
        spec.p_r1 = -0.5;
        assert!(matches!(
            derive_capacities(&spec),
            Err(Error::Domain { field: "p_r1", .. })
        ));
    }

    #[test]
    fn gain_inversion_round_trips() {
        for c in [0.0f64, 1e-9, 0.3, 2.0, 7.5] {
            let g = gain_for_capacity(c, 2.0, 0.5).unwrap();
            let back = link_capacity(g, 2.0, 0.5).unwrap();
            assert!((back - c).abs() <= 1e-12 * c.max(1.0), "{c} -> {back}");
        }
        assert!(gain_for_capacity(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn from_links_matches_unit_realization() {
        let caps = LinkCapacities::from_links(2.0, 3.0, 3.0, 2.0).unwrap();
        let spec = ChannelSpec::from_link_capacities(2.0, 3.0, 3.0, 2.0).unwrap();
        let derived = derive_capacities(&spec).unwrap();
        // gains 3, 7, 7, 3: c012 = log2(11), c123 = log2(10 + 2 sqrt(21) + 1)
        assert!((caps.c012 - 11f64.log2()).abs() < EPS);
        assert!((caps.c123 - (11.0 + 2.0 * 21f64.sqrt()).log2()).abs() < EPS);
        assert!((derived.c012 - caps.c012).abs() < EPS);
        assert!((derived.c123 - caps.c123).abs() < EPS);
    }

    #[test]
    fn explicit_capacities_must_dominate_links() {
        assert!(LinkCapacities::new(2.0, 3.0, 3.0, 2.0, 3.0, 4.0).is_ok());
        assert!(matches!(
            LinkCapacities::new(2.0, 3.0, 3.0, 2.0, 2.5, 4.0),
            Err(Error::Domain { field: "c012", .. })
        ));
        assert!(matches!(
            LinkCapacities::new(2.0, 3.0, 3.0, 2.0, 3.0, 2.0),
            Err(Error::Domain { field: "c123", .. })
        ));
    }

    #[test]
    fn json_schema_is_flat_and_strict() {
        let spec = ChannelSpec::<f64>::unit(3.0, 7.0, 7.0, 3.0);
        let text = serde_json::to_string(&spec).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value.as_object().unwrap().len(), 10);
        let back: ChannelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);

        let extra = text.replacen('{', "{\"g12\":1.0,", 1);
        assert!(serde_json::from_str::<ChannelSpec>(&extra).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let caps = derive_capacities(&ChannelSpec::<f32>::unit(3.0, 3.0, 3.0, 3.0)).unwrap();
        assert!((caps.c01 - 2.0).abs() < 1e-6);
        assert!((caps.c123 - 13f32.log2()).abs() < 1e-5);
    }
}
