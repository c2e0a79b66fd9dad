use crate::channel::{Basis, PauliRates};
use crate::{Error, Result};

/// Intercept-resend eavesdropper.
///
/// Eve measures every qubit before it enters the physical channel and sends
/// on the eigenstate she observed. A measurement in the qubit's own basis
/// reproduces the prepared bit; any other basis gives a uniform bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EveModel {
    /// Measurement basis drawn independently per qubit with these Z, X, Y
    /// weights.
    InterceptResend { weights: [f64; 3] },
    /// Always measures in the preparation basis. Induces no bit errors; only
    /// useful as a diagnostic, since the basis is not known in advance.
    OwnBasis,
}

/// Builds an [`EveModel::InterceptResend`] over `bases` with matching
/// `weights`.
pub fn eve_intercept_resend(bases: &[Basis], weights: &[f64]) -> Result<EveModel> {
    if bases.is_empty() || bases.len() != weights.len() {
        return Err(Error::InvalidParameter {
            name: "eve",
            reason: "needs one weight per basis and at least one basis",
        });
    }
    let mut w = [0.0; 3];
    for (&b, &x) in bases.iter().zip(weights) {
        if w[b.index()] != 0.0 {
            return Err(Error::InvalidParameter {
                name: "eve",
                reason: "bases must be distinct",
            });
        }
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InvalidMixture(w));
        }
        w[b.index()] = x;
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidMixture(w));
    }
    Ok(EveModel::InterceptResend { weights: w })
}

impl EveModel {
    /// Equal weights over `bases`.
    pub fn uniform(bases: &[Basis]) -> Result<Self> {
        let w = 1.0 / bases.len() as f64;
        let weights: alloc::vec::Vec<f64> = bases.iter().map(|_| w).collect();
        eve_intercept_resend(bases, &weights)
    }

    /// Eve's basis for a qubit prepared in `prep`, given a uniform draw `u`.
    pub fn measurement_basis(&self, prep: Basis, u: f64) -> Basis {
        match self {
            EveModel::OwnBasis => prep,
            EveModel::InterceptResend { weights } => super::pick_basis(weights, u),
        }
    }

    /// Pauli channel equivalent to the attack followed by `channel`, for a
    /// qubit prepared in `prep`.
    ///
    /// Measuring in basis `e` and resending the outcome acts on every input
    /// like applying `e`'s own Pauli with probability 1/2.
    pub fn effective_channel(&self, channel: &PauliRates, prep: Basis) -> PauliRates {
        let mut q = [0.5, 0.0, 0.0, 0.0];
        for e in Basis::ALL {
            let w = match self {
                EveModel::OwnBasis => f64::from(u8::from(e == prep)),
                EveModel::InterceptResend { weights } => weights[e.index()],
            };
            q[e.pauli() as usize] += 0.5 * w;
        }
        channel.compose(&PauliRates::new_unchecked(q[0], q[1], q[2], q[3]))
    }
}
