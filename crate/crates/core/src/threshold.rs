//! Noise thresholds along a ray of channels.
//!
//! A [`ChannelFamily`] fixes the direction `(q_x, q_y, q_z)` of the channel
//! error and scales it by the total noise `Q = q_x + q_y + q_z`.
//! [`threshold_total_noise`] audits distillability on a coarse grid along the
//! ray and then bisects the single transition.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::channel::{Basis, BasisMixture, PauliRates};
use crate::distill::{distill, DistillParams, DistillationTrace};
use crate::keyrates::{rate_single_basis, rate_sixstate_separate, KeyRate};
use crate::{Error, Result};

/// Protocol whose threshold is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolVariant {
    /// All key bits in the Y basis, then two-way distillation.
    YBasisTwoWay,
    /// Key bits spread equally over Z, X and Y, then two-way distillation.
    ChauBaseline,
    /// One-way four-state protocol with key bits in Z.
    SingleBasisOneWay,
    /// One-way six-state protocol with each basis distilled separately.
    SixStateSeparateOneWay,
}

impl ProtocolVariant {
    pub const ALL: [ProtocolVariant; 4] = [
        ProtocolVariant::YBasisTwoWay,
        ProtocolVariant::ChauBaseline,
        ProtocolVariant::SingleBasisOneWay,
        ProtocolVariant::SixStateSeparateOneWay,
    ];

    pub fn is_two_way(self) -> bool {
        matches!(self, Self::YBasisTwoWay | Self::ChauBaseline)
    }

    /// Error distribution seen by the key bits before post-processing.
    pub fn key_bit_rates(self, channel: &PauliRates) -> PauliRates {
        match self {
            Self::YBasisTwoWay => channel.conjugate(Basis::Y),
            Self::ChauBaseline => channel.average_over_mixture(&BasisMixture::EQUAL),
            Self::SingleBasisOneWay | Self::SixStateSeparateOneWay => *channel,
        }
    }

    /// Short name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Self::YBasisTwoWay => "ybasis",
            Self::ChauBaseline => "chau",
            Self::SingleBasisOneWay => "single",
            Self::SixStateSeparateOneWay => "sixstate",
        }
    }
}

impl fmt::Display for ProtocolVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or(Error::InvalidParameter {
                name: "variant",
                reason: "expected one of ybasis, chau, single, sixstate",
            })
    }
}

/// A ray of channels `scale * direction`, where the direction sums to one so
/// that `scale` is the total noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelFamily {
    direction: [f64; 3],
}

impl ChannelFamily {
    /// `q_x = q_z` and `q_y = r q_x`.
    pub fn y_fraction(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "y_fraction",
                reason: "must be finite and nonnegative",
            });
        }
        Self::direction([1.0, r, 1.0])
    }

    /// Arbitrary nonnegative direction `(q_x, q_y, q_z)`, normalized here.
    pub fn direction(dir: [f64; 3]) -> Result<Self> {
        let sum: f64 = dir.iter().sum();
        if dir.iter().any(|&w| !(w.is_finite() && w >= 0.0)) || sum <= 0.0 || !sum.is_finite() {
            return Err(Error::InvalidDirection(dir));
        }
        Ok(Self {
            direction: dir.map(|w| w / sum),
        })
    }

    /// Normalized `(q_x, q_y, q_z)` direction.
    pub fn unit_direction(&self) -> [f64; 3] {
        self.direction
    }

    /// `q_y / q_x`, infinite when the direction has no X component.
    pub fn ratio(&self) -> f64 {
        self.direction[1] / self.direction[0]
    }

    /// Largest total noise on the ray, where `q_i = 0`.
    pub fn scale_max(&self) -> f64 {
        1.0
    }

    pub fn rates_at(&self, scale: f64) -> Result<PauliRates> {
        if !(0.0..=self.scale_max()).contains(&scale) {
            return Err(Error::ScaleOutOfRange {
                scale,
                max: self.scale_max(),
            });
        }
        let [x, y, z] = self.direction.map(|w| w * scale);
        PauliRates::new(1.0 - scale, x, y, z)
    }
}

/// Search configuration for [`threshold_total_noise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub distill: DistillParams,
    /// Final bracket width in total-noise units.
    pub tol: f64,
    /// Points of the monotonicity audit, endpoints included.
    pub audit_points: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            distill: DistillParams::default(),
            tol: 1e-4,
            audit_points: 50,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        self.distill.validate()?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: "must be positive",
            });
        }
        if self.audit_points < 2 {
            return Err(Error::InvalidParameter {
                name: "audit_points",
                reason: "must be at least 2",
            });
        }
        Ok(())
    }
}

/// What decided an [`Assessment`].
#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    TwoWay(DistillationTrace),
    OneWay(KeyRate),
}

/// Distillability of one channel under one protocol variant.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub distillable: bool,
    /// Errors seen by the key bits.
    pub key_bit_rates: PauliRates,
    pub evidence: Evidence,
}

impl Assessment {
    pub fn trace(&self) -> Option<&DistillationTrace> {
        match &self.evidence {
            Evidence::TwoWay(t) => Some(t),
            Evidence::OneWay(_) => None,
        }
    }
}

/// Decides whether `variant` still yields key on `channel`.
///
/// Two-way variants preprocess the channel (Y conjugation or basis average)
/// and run [`distill`]; one-way variants check the sign of their key rate.
pub fn is_distillable(
    channel: &PauliRates,
    variant: ProtocolVariant,
    params: &DistillParams,
) -> Result<Assessment> {
    let key_bit_rates = variant.key_bit_rates(channel);
    let (distillable, evidence) = match variant {
        ProtocolVariant::YBasisTwoWay | ProtocolVariant::ChauBaseline => {
            let trace = distill(&key_bit_rates, params)?;
            (trace.succeeded, Evidence::TwoWay(trace))
        }
        ProtocolVariant::SingleBasisOneWay => {
            let r = rate_single_basis(channel);
            (r.is_positive(), Evidence::OneWay(r))
        }
        ProtocolVariant::SixStateSeparateOneWay => {
            let r = rate_sixstate_separate(channel);
            (r.is_positive(), Evidence::OneWay(r))
        }
    };
    Ok(Assessment {
        distillable,
        key_bit_rates,
        evidence,
    })
}

/// Outcome of a threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    /// Midpoint of the final bracket.
    pub q_t0_threshold: f64,
    /// `(low, high)`: distillable at `low`, not at `high`.
    pub bracket: (f64, f64),
    /// Assessment at `bracket.0`.
    pub at_threshold: Assessment,
}

/// Finds the total noise at which `variant` stops distilling along `family`.
///
/// The ray is first sampled at `params.audit_points` evenly spaced scales; a
/// return to distillability after the first failure is reported as
/// [`Error::NonMonotone`] instead of being bisected.
pub fn threshold_total_noise(
    family: &ChannelFamily,
    variant: ProtocolVariant,
    params: &SearchParams,
) -> Result<ThresholdResult> {
    params.validate()?;
    let max = family.scale_max();
    let check = |scale: f64| -> Result<Assessment> {
        is_distillable(&family.rates_at(scale)?, variant, &params.distill)
    };

    let n = params.audit_points;
    let grid = |i: usize| max * i as f64 / (n - 1) as f64;
    let mut first_fail = None;
    for i in 0..n {
        let ok = check(grid(i))?.distillable;
        match (ok, first_fail) {
            (false, None) if i == 0 => return Err(Error::NotDistillableAtZero),
            (false, None) => first_fail = Some(i),
            (true, Some(_)) => return Err(Error::NonMonotone { at: grid(i) }),
            _ => {}
        }
    }
    let Some(i) = first_fail else {
        return Err(Error::NoThresholdInRange(max));
    };

    let (mut lo, mut hi) = (grid(i - 1), grid(i));
    let mut at_lo = check(lo)?;
    while hi - lo > params.tol {
        let mid = 0.5 * (lo + hi);
        let a = check(mid)?;
        if a.distillable {
            lo = mid;
            at_lo = a;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        q_t0_threshold: 0.5 * (lo + hi),
        bracket: (lo, hi),
        at_threshold: at_lo,
    })
}

/// One grid point of the two-way threshold comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Row {
    /// `q_y0 / q_x0`.
    pub y_fraction: f64,
    pub ybasis: Result<ThresholdResult>,
    pub chau: Result<ThresholdResult>,
}

impl Fig1Row {
    /// `q_y0` on the Y-basis threshold channel, if that search succeeded.
    pub fn q_y0(&self) -> Option<f64> {
        let t = self.ybasis.as_ref().ok()?.q_t0_threshold;
        Some(self.y_fraction * t / (2.0 + self.y_fraction))
    }
}

/// Thresholds of both two-way variants on the `q_x0 = q_z0` families with
/// the given `q_y0 / q_x0` ratios. Rows keep the grid order; per-point
/// failures are returned in place.
pub fn sweep_fig1(y_fractions: &[f64], params: &SearchParams) -> Vec<Fig1Row> {
    let row = |&r: &f64| {
        let search =
            |v| ChannelFamily::y_fraction(r).and_then(|f| threshold_total_noise(&f, v, params));
        Fig1Row {
            y_fraction: r,
            ybasis: search(ProtocolVariant::YBasisTwoWay),
            chau: search(ProtocolVariant::ChauBaseline),
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        y_fractions.par_iter().map(row).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        y_fractions.iter().map(row).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::StoppingRule;
    use crate::keyrates::binary_entropy;
    use approx::assert_abs_diff_eq;

    fn ray(qx: f64, qy: f64, qz: f64) -> PauliRates {
        PauliRates::from_errors(qx, qy, qz).unwrap()
    }

    #[test]
    fn noiseless_is_distillable_everywhere() {
        for v in ProtocolVariant::ALL {
            let a = is_distillable(&PauliRates::IDENTITY, v, &DistillParams::default()).unwrap();
            assert!(a.distillable, "{v}");
        }
    }

    #[test]
    fn ybasis_half_noise_edge() {
        let p = DistillParams::default();
        let v = ProtocolVariant::YBasisTwoWay;
        assert!(
            is_distillable(&ray(0.24, 0.0, 0.24), v, &p)
                .unwrap()
                .distillable
        );
        assert!(
            !is_distillable(&ray(0.26, 0.0, 0.26), v, &p)
                .unwrap()
                .distillable
        );
        let literal = DistillParams {
            rule: StoppingRule::ResidualTarget,
            ..p
        };
        assert!(
            is_distillable(&ray(0.24, 0.0, 0.24), v, &literal)
                .unwrap()
                .distillable
        );
        assert!(
            !is_distillable(&ray(0.26, 0.0, 0.26), v, &literal)
                .unwrap()
                .distillable
        );
    }

    #[test]
    fn family_rates() {
        let f = ChannelFamily::y_fraction(0.5).unwrap();
        let r = f.rates_at(0.25).unwrap();
        assert_abs_diff_eq!(r.q_x(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(r.q_y(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(r.q_z(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(r.total_error(), 0.25, epsilon = 1e-15);
        assert!(matches!(
            f.rates_at(1.1),
            Err(Error::ScaleOutOfRange { .. })
        ));
        assert!(ChannelFamily::direction([0.0, 0.0, 0.0]).is_err());
        assert!(ChannelFamily::direction([1.0, -0.1, 1.0]).is_err());
        assert!(ChannelFamily::y_fraction(f64::NAN).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in ProtocolVariant::ALL {
            assert_eq!(v.name().parse::<ProtocolVariant>().unwrap(), v);
        }
        assert!("bb84".parse::<ProtocolVariant>().is_err());
    }

    #[test]
    fn endpoint_thresholds() {
        let p = SearchParams::default();
        let y = threshold_total_noise(
            &ChannelFamily::y_fraction(0.0).unwrap(),
            ProtocolVariant::YBasisTwoWay,
            &p,
        )
        .unwrap();
        assert_abs_diff_eq!(y.q_t0_threshold, 0.5, epsilon = 0.005);
        let c = threshold_total_noise(
            &ChannelFamily::y_fraction(1.0).unwrap(),
            ProtocolVariant::ChauBaseline,
            &p,
        )
        .unwrap();
        // d^2 = t s on the depolarized channel: QBER (5 - sqrt 5) / 10.
        let limit = 1.5 * (5.0 - crate::math::sqrt(5.0)) / 10.0;
        assert_abs_diff_eq!(c.q_t0_threshold, limit, epsilon = 2e-4);
        for r in [&y, &c] {
            assert!(r.bracket.1 - r.bracket.0 <= p.tol);
            assert!(r.at_threshold.distillable);
        }
    }

    #[test]
    fn single_basis_threshold_matches_entropy_root() {
        // q_y0 = 0: p_x0 = p_z0 = Q / 2, zero where H(Q / 2) = 1 / 2.
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if binary_entropy(mid).unwrap() < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(lo, 0.110_027_864_438_36, epsilon = 1e-12);
        let res = threshold_total_noise(
            &ChannelFamily::y_fraction(0.0).unwrap(),
            ProtocolVariant::SingleBasisOneWay,
            &SearchParams::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(res.q_t0_threshold, 2.0 * lo, epsilon = 1e-4);
    }

    #[test]
    fn search_errors() {
        let p = SearchParams::default();
        // Pure Y flips: 1 - 2 H(Q) is negative between 0.11 and 0.89 only.
        let y_only = ChannelFamily::direction([0.0, 1.0, 0.0]).unwrap();
        let res = threshold_total_noise(&y_only, ProtocolVariant::SingleBasisOneWay, &p);
        assert!(matches!(res, Err(Error::NonMonotone { .. })), "{res:?}");
        let bad = SearchParams { tol: 0.0, ..p };
        assert!(threshold_total_noise(&y_only, ProtocolVariant::YBasisTwoWay, &bad).is_err());
    }

    #[test]
    fn sweep_keeps_order_and_symmetry() {
        let rows = sweep_fig1(&[0.0, 0.5, 1.0], &SearchParams::default());
        assert_eq!(
            rows.iter().map(|r| r.y_fraction).collect::<Vec<_>>(),
            [0.0, 0.5, 1.0]
        );
        let last = &rows[2];
        let (y, c) = (last.ybasis.as_ref().unwrap(), last.chau.as_ref().unwrap());
        assert_abs_diff_eq!(y.q_t0_threshold, c.q_t0_threshold, epsilon = 2e-4);
        let mid = &rows[1];
        assert!(
            mid.ybasis.as_ref().unwrap().q_t0_threshold > mid.chau.as_ref().unwrap().q_t0_threshold
        );
    }
}
