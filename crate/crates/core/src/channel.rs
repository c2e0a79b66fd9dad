//! Pauli channels and how their errors look to qubits prepared and measured in
//! different bases.
//!
//! A qubit sent in the X basis is, equivalently, a Z-basis qubit conjugated by a
//! Hadamard on both ends; a Y-basis qubit is conjugated by
//! `T = (1/sqrt 2) [[1, i], [1, -i]]`. Conjugation permutes the non-identity
//! Paulis, so the error distribution seen by the key bits is a permutation of
//! the channel's own distribution:
//!
//! | channel error | Z-bits | X-bits | Y-bits |
//! |---------------|--------|--------|--------|
//! | X             | X      | Z      | Y      |
//! | Y             | Y      | Y      | Z      |
//! | Z             | Z      | X      | X      |

use core::fmt;

use crate::{Error, Result};

/// Sum tolerance accepted (and then renormalised away) on construction.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Whether the operator flips the computational-basis bit.
    #[inline]
    pub fn flips_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Whether the operator flips the phase.
    #[inline]
    pub fn flips_phase(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }

    /// Builds the operator from its (bit, phase) flags.
    #[inline]
    pub fn from_flags(bit: bool, phase: bool) -> Pauli {
        match (bit, phase) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Product up to a global phase.
    #[inline]
    pub fn compose(self, other: Pauli) -> Pauli {
        Pauli::from_flags(
            self.flips_bit() != other.flips_bit(),
            self.flips_phase() != other.flips_phase(),
        )
    }

    /// The error a qubit prepared and measured in `basis` experiences when the
    /// channel applies `self`.
    pub fn in_frame(self, basis: Basis) -> Pauli {
        match (basis, self) {
            (_, Pauli::I) | (Basis::Z, _) => self,
            (Basis::X, Pauli::X) => Pauli::Z,
            (Basis::X, Pauli::Z) => Pauli::X,
            (Basis::X, Pauli::Y) => Pauli::Y,
            (Basis::Y, Pauli::X) => Pauli::Y,
            (Basis::Y, Pauli::Y) => Pauli::Z,
            (Basis::Y, Pauli::Z) => Pauli::X,
        }
    }
}

/// Preparation / measurement basis. Z-bits are the "I-bits", X-bits the "H-bits".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Basis::Z => 0,
            Basis::X => 1,
            Basis::Y => 2,
        }
    }
}

impl Basis {
    /// The Pauli whose eigenstates make up the basis. Measuring in the basis
    /// and re-preparing the outcome acts like applying it with probability 1/2.
    #[inline]
    pub fn pauli(self) -> Pauli {
        match self {
            Basis::Z => Pauli::Z,
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        })
    }
}

/// Bell-diagonal error distribution of a Pauli channel: probabilities of
/// applying I, X, Y, Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliRates {
    q_i: f64,
    q_x: f64,
    q_y: f64,
    q_z: f64,
}

impl PauliRates {
    /// The noiseless channel.
    pub const IDENTITY: PauliRates = PauliRates {
        q_i: 1.0,
        q_x: 0.0,
        q_y: 0.0,
        q_z: 0.0,
    };

    /// Builds a distribution from all four probabilities.
    ///
    /// Each component must lie in `[0, 1]`. A sum within
    /// [`NORMALIZATION_TOLERANCE`] of 1 is renormalised; anything further off
    /// is rejected.
    pub fn new(q_i: f64, q_x: f64, q_y: f64, q_z: f64) -> Result<Self> {
        for (name, value) in [("q_i", q_i), ("q_x", q_x), ("q_y", q_y), ("q_z", q_z)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RateOutOfRange { name, value });
            }
        }
        let sum = q_i + q_x + q_y + q_z;
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized {
                sum,
                tolerance: NORMALIZATION_TOLERANCE,
            });
        }
        Ok(Self {
            q_i: q_i / sum,
            q_x: q_x / sum,
            q_y: q_y / sum,
            q_z: q_z / sum,
        })
    }

    /// Builds a distribution from the three error probabilities, inferring `q_i`.
    pub fn from_errors(q_x: f64, q_y: f64, q_z: f64) -> Result<Self> {
        for (name, value) in [("q_x", q_x), ("q_y", q_y), ("q_z", q_z)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RateOutOfRange { name, value });
            }
        }
        let total = q_x + q_y + q_z;
        if total > 1.0 + NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized {
                sum: total,
                tolerance: NORMALIZATION_TOLERANCE,
            });
        }
        Self::new((1.0 - total).max(0.0), q_x, q_y, q_z)
    }

    /// Symmetric (depolarising) channel with total error `total`.
    pub fn depolarizing(total: f64) -> Result<Self> {
        Self::from_errors(total / 3.0, total / 3.0, total / 3.0)
    }

    /// Skips validation. Callers guarantee the simplex invariants.
    #[inline]
    pub(crate) const fn new_unchecked(q_i: f64, q_x: f64, q_y: f64, q_z: f64) -> Self {
        Self { q_i, q_x, q_y, q_z }
    }

    #[inline]
    pub fn q_i(&self) -> f64 {
        self.q_i
    }
    #[inline]
    pub fn q_x(&self) -> f64 {
        self.q_x
    }
    #[inline]
    pub fn q_y(&self) -> f64 {
        self.q_y
    }
    #[inline]
    pub fn q_z(&self) -> f64 {
        self.q_z
    }

    /// Probabilities in `[q_i, q_x, q_y, q_z]` order.
    #[inline]
    pub fn to_array(&self) -> [f64; 4] {
        [self.q_i, self.q_x, self.q_y, self.q_z]
    }

    /// Probability of the given Pauli.
    #[inline]
    pub fn prob(&self, p: Pauli) -> f64 {
        match p {
            Pauli::I => self.q_i,
            Pauli::X => self.q_x,
            Pauli::Y => self.q_y,
            Pauli::Z => self.q_z,
        }
    }

    /// Total error probability `q_x + q_y + q_z`.
    #[inline]
    pub fn total_error(&self) -> f64 {
        self.q_x + self.q_y + self.q_z
    }

    /// Bit, phase and Y-basis flip marginals.
    pub fn flip_rates(&self) -> FlipRates {
        FlipRates {
            p_x: self.q_x + self.q_y,
            p_z: self.q_z + self.q_y,
            p_y: self.q_x + self.q_z,
        }
    }

    /// The distribution experienced by bits prepared and measured in `basis`.
    pub fn conjugate(&self, basis: Basis) -> PauliRates {
        let Self { q_i, q_x, q_y, q_z } = *self;
        match basis {
            Basis::Z => *self,
            Basis::X => Self::new_unchecked(q_i, q_z, q_y, q_x),
            Basis::Y => Self::new_unchecked(q_i, q_z, q_x, q_y),
        }
    }

    /// Mixture-weighted average of the conjugated distributions.
    pub fn average_over_mixture(&self, mix: &BasisMixture) -> PauliRates {
        let mut acc = [0.0; 4];
        for basis in Basis::ALL {
            let w = mix.weight(basis);
            for (a, q) in acc.iter_mut().zip(self.conjugate(basis).to_array()) {
                *a += w * q;
            }
        }
        Self::new_unchecked(acc[0], acc[1], acc[2], acc[3])
    }

    /// Distribution of the product of independent errors from `self` and
    /// `other`.
    pub fn compose(&self, other: &PauliRates) -> PauliRates {
        let mut acc = [0.0; 4];
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                acc[pauli_index(a.compose(b))] += self.prob(a) * other.prob(b);
            }
        }
        Self::new_unchecked(acc[0], acc[1], acc[2], acc[3])
    }

    /// Average bit/phase flip rates when a fraction `eta` of key bits are Z-bits
    /// and the rest X-bits.
    pub fn key_bit_flip_rates(&self, eta: f64) -> Result<FlipRates> {
        let mix = BasisMixture::two_basis(eta)?;
        let channel = self.flip_rates();
        Ok(FlipRates {
            p_x: mix.w_z * channel.p_x + mix.w_x * channel.p_z,
            p_z: mix.w_z * channel.p_z + mix.w_x * channel.p_x,
            p_y: channel.p_y,
        })
    }
}

fn pauli_index(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

impl fmt::Display for PauliRates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(q_i={}, q_x={}, q_y={}, q_z={})",
            self.q_i, self.q_x, self.q_y, self.q_z
        )
    }
}

/// Marginal flip probabilities: bit flip (`p_x`), phase flip (`p_z`) and the
/// flip seen by Y-basis qubits (`p_y`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipRates {
    pub p_x: f64,
    pub p_z: f64,
    pub p_y: f64,
}

impl FlipRates {
    pub fn new(p_x: f64, p_z: f64, p_y: f64) -> Result<Self> {
        for (name, value) in [("p_x", p_x), ("p_z", p_z), ("p_y", p_y)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RateOutOfRange { name, value });
            }
        }
        Ok(Self { p_x, p_z, p_y })
    }
}

/// Weights of Z, X and Y bits among the key bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisMixture {
    w_z: f64,
    w_x: f64,
    w_y: f64,
}

impl BasisMixture {
    /// Equal thirds: the symmetrised six-state protocol.
    pub const EQUAL: BasisMixture = BasisMixture {
        w_z: 1.0 / 3.0,
        w_x: 1.0 / 3.0,
        w_y: 1.0 / 3.0,
    };

    pub fn new(w_z: f64, w_x: f64, w_y: f64) -> Result<Self> {
        let w = [w_z, w_x, w_y];
        let sum = w_z + w_x + w_y;
        if w.iter().any(|v| !(0.0..=1.0).contains(v)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMixture(w));
        }
        Ok(Self { w_z, w_x, w_y })
    }

    /// `eta` Z-bits and `1 - eta` X-bits.
    pub fn two_basis(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidMixture([eta, 1.0 - eta, 0.0]));
        }
        Ok(Self {
            w_z: eta,
            w_x: 1.0 - eta,
            w_y: 0.0,
        })
    }

    /// All key bits in a single basis.
    pub fn single(basis: Basis) -> Self {
        let mut w = [0.0; 3];
        w[basis.index()] = 1.0;
        Self {
            w_z: w[0],
            w_x: w[1],
            w_y: w[2],
        }
    }

    #[inline]
    pub fn weight(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Z => self.w_z,
            Basis::X => self.w_x,
            Basis::Y => self.w_y,
        }
    }
}
