//! Asymptotic one-way key rates.
//!
//! Rates are returned unclamped: a negative value means no key, and keeping the
//! sign lets threshold searches find the zero crossing.

use core::fmt;

use crate::channel::{BasisMixture, PauliRates};
use crate::math::{self, neg_x_log2_x};
use crate::{Error, Result};

/// Final key bits per sifted key bit. May be negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct KeyRate(pub f64);

impl KeyRate {
    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The rate as it would be reported: negative rates produce no key.
    #[inline]
    pub fn clamped(self) -> f64 {
        self.0.max(0.0)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 > 0.0
    }
}

impl fmt::Display for KeyRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Binary entropy in bits, `0 log 0 = 0`.
pub fn binary_entropy(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::EntropyDomain { value: t });
    }
    Ok(binary_entropy_unchecked(t))
}

#[inline]
pub(crate) fn binary_entropy_unchecked(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    // ln_1p keeps precision for small t.
    (-t * math::ln(t) - (1.0 - t) * math::ln_1p(-t)) / math::LN_2
}

/// Shannon entropy in bits of the four-outcome distribution.
pub fn shannon4(rates: &PauliRates) -> f64 {
    rates.to_array().into_iter().map(neg_x_log2_x).sum()
}

/// Symmetrised BB84 (Shor-Preskill): key bits split evenly between Z and X,
/// so both flip rates average to `(p_x0 + p_z0) / 2`.
pub fn rate_bb84_symmetrized(rates: &PauliRates) -> KeyRate {
    let f = rates.flip_rates();
    KeyRate(1.0 - 2.0 * binary_entropy_unchecked((f.p_x + f.p_z) / 2.0))
}

/// Four-state protocol with every key bit prepared and measured in Z.
pub fn rate_single_basis(rates: &PauliRates) -> KeyRate {
    let f = rates.flip_rates();
    KeyRate(1.0 - binary_entropy_unchecked(f.p_x) - binary_entropy_unchecked(f.p_z))
}

/// Standard six-state protocol: key bits from all three bases mixed together
/// before distillation.
///
/// The identity weight of the averaged distribution is the channel's `q_i`,
/// since conjugation never moves it.
pub fn rate_sixstate_mixed(rates: &PauliRates) -> KeyRate {
    KeyRate(1.0 - shannon4(&rates.average_over_mixture(&BasisMixture::EQUAL)))
}

/// Six-state protocol distilling the Z, X and Y batches separately. Each
/// batch sees a permutation of the channel distribution, so every batch has
/// the same rate.
pub fn rate_sixstate_separate(rates: &PauliRates) -> KeyRate {
    KeyRate(1.0 - shannon4(rates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rates(q_i: f64, q_x: f64, q_y: f64, q_z: f64) -> PauliRates {
        PauliRates::new(q_i, q_x, q_y, q_z).unwrap()
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), 1.0, epsilon = 1e-15);
        // -(0.05 log2 0.05 + 0.95 log2 0.95)
        assert_abs_diff_eq!(
            binary_entropy(0.05).unwrap(),
            0.286_396_957_115_956,
            epsilon = 1e-12
        );
        assert!(matches!(
            binary_entropy(-0.01),
            Err(Error::EntropyDomain { .. })
        ));
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn shannon4_values() {
        assert_eq!(shannon4(&PauliRates::IDENTITY), 0.0);
        assert_abs_diff_eq!(
            shannon4(&rates(0.25, 0.25, 0.25, 0.25)),
            2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            shannon4(&rates(0.7, 0.1, 0.1, 0.1)),
            1.356_779_649_447_04,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bb84_symmetrized() {
        assert_eq!(rate_bb84_symmetrized(&PauliRates::IDENTITY).value(), 1.0);
        // p_x0 = p_z0 = 0.05
        let r = rate_bb84_symmetrized(&rates(0.95, 0.0, 0.05, 0.0));
        assert_abs_diff_eq!(r.value(), 0.427_206_085_768_088, epsilon = 1e-12);
        // Zero crossing at the 11% flip rate.
        let r = rate_bb84_symmetrized(&rates(0.78, 0.11, 0.0, 0.11));
        assert_abs_diff_eq!(r.value(), 0.0, epsilon = 2e-3);
    }

    #[test]
    fn single_basis() {
        assert_eq!(rate_single_basis(&PauliRates::IDENTITY).value(), 1.0);
        let ch = rates(0.88, 0.10, 0.0, 0.02);
        assert_abs_diff_eq!(
            rate_single_basis(&ch).value(),
            0.389_563_863_868_898,
            epsilon = 1e-12
        );
        let sym = rates(0.8, 0.05, 0.1, 0.05);
        assert_abs_diff_eq!(
            rate_single_basis(&sym).value(),
            rate_bb84_symmetrized(&sym).value(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn sixstate_rates() {
        assert_eq!(rate_sixstate_mixed(&PauliRates::IDENTITY).value(), 1.0);
        assert_eq!(rate_sixstate_separate(&PauliRates::IDENTITY).value(), 1.0);

        let sym = rates(0.7, 0.1, 0.1, 0.1);
        assert_abs_diff_eq!(
            rate_sixstate_mixed(&sym).value(),
            rate_sixstate_separate(&sym).value(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            rate_sixstate_separate(&sym).value(),
            -0.356_779_649_447_04,
            epsilon = 1e-12
        );

        let ch = rates(0.85, 0.10, 0.0, 0.05);
        assert_abs_diff_eq!(
            rate_sixstate_separate(&ch).value(),
            0.252_415_320_175_43,
            epsilon = 1e-12
        );
        let averaged = rates(0.85, 0.2 / 3.0, 0.1 / 3.0, 0.05);
        assert_abs_diff_eq!(
            rate_sixstate_mixed(&ch).value(),
            1.0 - shannon4(&averaged),
            epsilon = 1e-14
        );
    }

    #[test]
    fn clamped_view() {
        assert_eq!(KeyRate(-0.3).clamped(), 0.0);
        assert_eq!(KeyRate(0.3).clamped(), 0.3);
    }
}
