//! Monte Carlo run of the prepare-and-measure protocol.
//!
//! Every transmitted qubit is sampled from its own ChaCha8 stream: the seed is
//! expanded with [`SeedableRng::seed_from_u64`] into a 256-bit key and qubit
//! `i` reads stream `i`. Post-processing stages (key and check selection,
//! B-step pairings, P-step grouping) read streams `2^63 + stage`. The result
//! is independent of how the transmissions are scheduled across threads.
//!
//! Each sifted qubit carries a bit flag and a phase flag in the frame of its
//! preparation basis. The B-step keeps one bit of an agreeing pair with the
//! XOR of both phase flags; the P-step outputs the parity of the bit flags and
//! the majority of the phase flags. These are the rules the analytic maps in
//! [`crate::distill`] assume, so every stage has an exact prediction.

mod compare;
mod eve;

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use compare::{compare_analytic, ComparisonRow, Verdict};
pub use eve::{eve_intercept_resend, EveModel};

use crate::channel::{Basis, Pauli, PauliRates};
use crate::distill::{b_step, p_step, PStepParams};
use crate::keyrates::binary_entropy_unchecked;
use crate::math;
use crate::{Error, Result};

const STAGE_STREAM_BASE: u64 = 1 << 63;
const STAGE_KEY_SELECTION: u64 = 0;
const STAGE_CHECK_SELECTION: u64 = 1;
const STAGE_P_STEP: u64 = 2;
const STAGE_FIRST_B_ROUND: u64 = 3;

/// How the `n` check bits are drawn from the sifted bits left after key
/// selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CheckSplit {
    /// About `n / 3` per basis; a basis that runs short is topped up from the
    /// others.
    #[default]
    Balanced,
    /// `n` bits drawn uniformly from all remaining sifted bits.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Number of key bits (and of check bits).
    pub n: usize,
    /// Oversampling: `(6 + delta) n` qubits are sent.
    pub delta: f64,
    /// Alice's Z, X, Y preparation probabilities.
    pub source_probs: [f64; 3],
    /// Bob's Z, X, Y measurement probabilities.
    pub bob_probs: [f64; 3],
    /// Residual error goal after the P-step.
    pub target: f64,
    /// Number of B-steps.
    pub b_rounds: usize,
    /// P-step group size, odd.
    pub p_group: usize,
    /// Check-test abort threshold in standard errors above expectation.
    pub abort_sigma: f64,
    /// Check-test abort threshold as an absolute error rate.
    pub abort_ceiling: f64,
    pub check_split: CheckSplit,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            n: 10_000,
            delta: 2.0,
            source_probs: [0.25, 0.25, 0.5],
            bob_probs: [1.0 / 3.0; 3],
            target: 0.05,
            b_rounds: 1,
            p_group: 3,
            abort_sigma: 3.0,
            abort_ceiling: 0.45,
            check_split: CheckSplit::Balanced,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        for p in [self.source_probs, self.bob_probs] {
            let sum: f64 = p.iter().sum();
            if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMixture(p));
            }
        }
        let fail = |name, reason| Err(Error::InvalidParameter { name, reason });
        if self.n == 0 {
            return fail("n", "must be at least 1");
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return fail("delta", "must be positive");
        }
        if !(self.target > 0.0 && self.target < 0.5) {
            return fail("target", "must lie in (0, 0.5)");
        }
        PStepParams::new(self.p_group)?;
        if !(self.abort_sigma.is_finite() && self.abort_sigma > 0.0) {
            return fail("abort_sigma", "must be positive");
        }
        if !(self.abort_ceiling > 0.0 && self.abort_ceiling <= 1.0) {
            return fail("abort_ceiling", "must lie in (0, 1]");
        }
        Ok(())
    }

    /// `ceil((6 + delta) n)`.
    pub fn transmissions(&self) -> usize {
        libm::ceil((6.0 + self.delta) * self.n as f64) as usize
    }

    /// Probability that Bob's basis matches Alice's.
    pub fn sift_probability(&self) -> f64 {
        self.source_probs
            .iter()
            .zip(self.bob_probs)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Eve's measurement of one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EveAction {
    pub basis: Basis,
    /// Outcome, resent as an eigenstate of `basis`.
    pub bit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Role {
    Check,
    Key,
    #[default]
    Discarded,
}

/// One transmitted qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitRecord {
    pub prep_basis: Basis,
    pub prep_bit: bool,
    /// Error applied by the physical channel.
    pub pauli: Pauli,
    pub eve: Option<EveAction>,
    pub meas_basis: Basis,
    pub meas_bit: bool,
    /// Phase error in the preparation frame, meaningful for sifted qubits.
    pub phase_flag: bool,
    pub role: Role,
}

impl QubitRecord {
    #[inline]
    pub fn sifted(&self) -> bool {
        self.prep_basis == self.meas_basis
    }

    #[inline]
    pub fn bit_flag(&self) -> bool {
        self.prep_bit != self.meas_bit
    }

    /// Combined error in the preparation frame.
    #[inline]
    pub fn frame_error(&self) -> Pauli {
        Pauli::from_flags(self.bit_flag(), self.phase_flag)
    }
}

pub(crate) fn pick_basis(probs: &[f64; 3], u: f64) -> Basis {
    if u < probs[0] {
        Basis::Z
    } else if u < probs[0] + probs[1] || probs[2] == 0.0 {
        Basis::X
    } else {
        Basis::Y
    }
}

fn pick_pauli(channel: &PauliRates, u: f64) -> Pauli {
    let mut acc = 0.0;
    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
        acc += channel.prob(p);
        if u < acc {
            return p;
        }
    }
    Pauli::I
}

fn stream(key: [u8; 32], id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(id);
    rng
}

/// Samples qubit `index` of a run keyed by `key`.
fn transmit(
    channel: &PauliRates,
    params: &ProtocolParams,
    eve: Option<&EveModel>,
    key: [u8; 32],
    index: u64,
) -> QubitRecord {
    let mut rng = stream(key, index);
    let prep_basis = pick_basis(&params.source_probs, rng.random());
    let prep_bit: bool = rng.random();
    let pauli = pick_pauli(channel, rng.random());
    let eve_u: f64 = rng.random();
    let eve_coin: bool = rng.random();
    let meas_basis = pick_basis(&params.bob_probs, rng.random());
    let bob_coin: bool = rng.random();
    let phase_coin: bool = rng.random();

    let eve = eve.map(|m| {
        let basis = m.measurement_basis(prep_basis, eve_u);
        let bit = if basis == prep_basis {
            prep_bit
        } else {
            eve_coin
        };
        EveAction { basis, bit }
    });
    let (basis, bit) = eve.map_or((prep_basis, prep_bit), |a| (a.basis, a.bit));
    let arrived = bit != pauli.in_frame(basis).flips_bit();
    let meas_bit = if meas_basis == basis {
        arrived
    } else {
        bob_coin
    };

    let own = pauli.in_frame(prep_basis);
    let phase_flag = match eve {
        None => own.flips_phase(),
        Some(a) => {
            // Eve's part of the error: her basis Pauli, present with
            // probability 1/2. Off-basis it shows up as a bit flip, so its
            // presence is read off the observed bit.
            let present = if a.basis == prep_basis {
                phase_coin
            } else {
                (prep_bit != meas_bit) != own.flips_bit()
            };
            own.flips_phase() != (present && a.basis.pauli().in_frame(prep_basis).flips_phase())
        }
    };

    QubitRecord {
        prep_basis,
        prep_bit,
        pauli,
        eve,
        meas_basis,
        meas_bit,
        phase_flag,
        role: Role::Discarded,
    }
}

fn transmit_all(
    channel: &PauliRates,
    params: &ProtocolParams,
    eve: Option<&EveModel>,
    key: [u8; 32],
) -> Vec<QubitRecord> {
    let total = params.transmissions() as u64;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..total)
            .into_par_iter()
            .map(|i| transmit(channel, params, eve, key, i))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..total)
            .map(|i| transmit(channel, params, eve, key, i))
            .collect()
    }
}

/// Why a run stopped early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbortReason {
    /// Fewer than `2n` sifted bits.
    InsufficientSifted { sifted: usize, needed: usize },
    /// Fewer than `n` sifted Y-bits for the key.
    InsufficientKeyBits { available: usize, needed: usize },
    /// A basis's check error exceeded its limit.
    CheckFailed {
        basis: Basis,
        empirical: f64,
        limit: f64,
    },
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::InsufficientSifted { sifted, needed } => {
                write!(f, "only {sifted} sifted bits, {needed} needed")
            }
            AbortReason::InsufficientKeyBits { available, needed } => {
                write!(f, "only {available} sifted Y-bits, {needed} needed")
            }
            AbortReason::CheckFailed {
                basis,
                empirical,
                limit,
            } => write!(
                f,
                "{basis}-basis check error {empirical:.6} exceeds {limit:.6}"
            ),
        }
    }
}

/// Check-bit statistics of one basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisCheck {
    pub basis: Basis,
    pub prepared: usize,
    pub sifted: usize,
    pub checked: usize,
    pub errors: usize,
    /// Error rate the physical channel alone produces; the abort reference.
    pub expected: f64,
    /// Error rate predicted for this run, Eve included.
    pub analytic: f64,
}

impl BasisCheck {
    pub fn empirical(&self) -> f64 {
        ratio(self.errors, self.checked)
    }

    /// Binomial standard error of [`BasisCheck::empirical`].
    pub fn std_error(&self) -> f64 {
        let p = self.empirical();
        binomial_sigma(p, self.checked)
    }

    /// Largest check error that does not abort.
    pub fn abort_limit(&self, params: &ProtocolParams) -> f64 {
        let e = self.expected;
        (e + params.abort_sigma * binomial_sigma(e, self.checked)).min(params.abort_ceiling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    /// Key bits as received.
    Transmission,
    /// B-step number `i`, counted from 1.
    BRound(usize),
    PStep,
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageKind::Transmission => f.write_str("key"),
            StageKind::BRound(i) => write!(f, "b{i}"),
            StageKind::PStep => f.write_str("pstep"),
        }
    }
}

/// Predictions for one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageAnalytic {
    /// Probability that a trial (pair, group) yields a kept bit.
    pub keep_probability: f64,
    /// Error distribution of the kept bits, when the maps track it.
    pub rates: Option<PauliRates>,
    pub p_x: f64,
    pub p_z: f64,
}

/// Key bits entering and leaving one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageReport {
    pub kind: StageKind,
    pub input: usize,
    /// Pairs or groups formed; `input` for the transmission stage.
    pub trials: usize,
    pub kept: usize,
    pub discarded: usize,
    /// Kept bits by frame error I, X, Y, Z.
    pub counts: [usize; 4],
    pub analytic: StageAnalytic,
}

impl StageReport {
    pub fn bit_errors(&self) -> usize {
        self.counts[1] + self.counts[2]
    }

    pub fn phase_errors(&self) -> usize {
        self.counts[2] + self.counts[3]
    }

    pub fn p_x(&self) -> f64 {
        ratio(self.bit_errors(), self.kept)
    }

    pub fn p_z(&self) -> f64 {
        ratio(self.phase_errors(), self.kept)
    }
}

/// Outcome of [`run_protocol`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub seed: u64,
    pub channel: PauliRates,
    pub params: ProtocolParams,
    pub eve: Option<EveModel>,
    pub transmissions: usize,
    pub sifted: usize,
    /// Predicted fraction of transmissions that survive sifting.
    pub sift_probability: f64,
    /// Indexed by [`Basis::index`].
    pub checks: [BasisCheck; 3],
    pub key_bits: usize,
    pub stages: Vec<StageReport>,
    pub abort: Option<AbortReason>,
    /// `1 - H(p_x) - H(p_z)` from the P-step output.
    pub final_rate_empirical: Option<f64>,
    pub final_rate_analytic: Option<f64>,
}

impl SimReport {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }

    /// Whether both empirical residual errors are below the target.
    pub fn meets_target(&self) -> Option<bool> {
        let last = self.stages.last().filter(|s| s.kind == StageKind::PStep)?;
        Some(last.p_x() < self.params.target && last.p_z() < self.params.target)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn binomial_sigma(p: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        math::sqrt(p * (1.0 - p) / n as f64)
    }
}

/// Runs the protocol once. Aborts are reported in the result, not as errors.
pub fn run_protocol(
    channel: &PauliRates,
    params: &ProtocolParams,
    seed: u64,
    eve: Option<&EveModel>,
) -> Result<SimReport> {
    run_protocol_detailed(channel, params, seed, eve).map(|(r, _)| r)
}

/// [`run_protocol`], also returning every transmitted qubit with its role.
pub fn run_protocol_detailed(
    channel: &PauliRates,
    params: &ProtocolParams,
    seed: u64,
    eve: Option<&EveModel>,
) -> Result<(SimReport, Vec<QubitRecord>)> {
    params.validate()?;
    let key = ChaCha8Rng::seed_from_u64(seed).get_seed();
    let stage_rng = |stage: u64| stream(key, STAGE_STREAM_BASE + stage);
    let mut records = transmit_all(channel, params, eve, key);
    let n = params.n;

    let effective = |b: Basis| match eve {
        Some(m) => m.effective_channel(channel, b).conjugate(b),
        None => channel.conjugate(b),
    };
    let mut checks = Basis::ALL.map(|basis| BasisCheck {
        basis,
        prepared: 0,
        sifted: 0,
        checked: 0,
        errors: 0,
        expected: channel.conjugate(basis).flip_rates().p_x,
        analytic: effective(basis).flip_rates().p_x,
    });
    let mut by_basis: [Vec<usize>; 3] = Default::default();
    for (i, r) in records.iter().enumerate() {
        checks[r.prep_basis.index()].prepared += 1;
        if r.sifted() {
            checks[r.prep_basis.index()].sifted += 1;
            by_basis[r.prep_basis.index()].push(i);
        }
    }
    let sifted: usize = checks.iter().map(|c| c.sifted).sum();
    let mut report = SimReport {
        seed,
        channel: *channel,
        params: *params,
        eve: eve.copied(),
        transmissions: records.len(),
        sifted,
        sift_probability: params.sift_probability(),
        checks,
        key_bits: 0,
        stages: Vec::new(),
        abort: None,
        final_rate_empirical: None,
        final_rate_analytic: None,
    };

    if sifted < 2 * n {
        report.abort = Some(AbortReason::InsufficientSifted {
            sifted,
            needed: 2 * n,
        });
        return Ok((report, records));
    }
    let y = Basis::Y.index();
    if by_basis[y].len() < n {
        report.abort = Some(AbortReason::InsufficientKeyBits {
            available: by_basis[y].len(),
            needed: n,
        });
        return Ok((report, records));
    }

    // Key selection: n random Y-bits.
    by_basis[y].shuffle(&mut stage_rng(STAGE_KEY_SELECTION));
    let key_idx: Vec<usize> = by_basis[y].drain(..n).collect();
    for &i in &key_idx {
        records[i].role = Role::Key;
    }
    report.key_bits = n;

    // Check selection from what is left.
    let mut rng = stage_rng(STAGE_CHECK_SELECTION);
    for list in by_basis.iter_mut() {
        list.shuffle(&mut rng);
    }
    let check_idx = select_checks(&mut by_basis, n, params.check_split, &mut rng);
    for &i in &check_idx {
        let r = &mut records[i];
        r.role = Role::Check;
        let c = &mut report.checks[r.prep_basis.index()];
        c.checked += 1;
        c.errors += usize::from(r.bit_flag());
    }
    for c in &report.checks {
        if c.checked == 0 {
            continue;
        }
        let limit = c.abort_limit(params);
        if c.empirical() > limit {
            report.abort = Some(AbortReason::CheckFailed {
                basis: c.basis,
                empirical: c.empirical(),
                limit,
            });
            return Ok((report, records));
        }
    }

    // Key bits: (bit flag, phase flag) in the Y frame.
    let mut bits: Vec<(bool, bool)> = key_idx
        .iter()
        .map(|&i| (records[i].bit_flag(), records[i].phase_flag))
        .collect();
    let mut predicted = effective(Basis::Y);
    report.stages.push(StageReport {
        kind: StageKind::Transmission,
        input: n,
        trials: n,
        kept: n,
        discarded: 0,
        counts: tally(&bits),
        analytic: StageAnalytic {
            keep_probability: 1.0,
            rates: Some(predicted),
            p_x: predicted.flip_rates().p_x,
            p_z: predicted.flip_rates().p_z,
        },
    });

    for round in 0..params.b_rounds {
        let input = bits.len();
        bits.shuffle(&mut stage_rng(STAGE_FIRST_B_ROUND + round as u64));
        let survivors: Vec<(bool, bool)> = bits
            .chunks_exact(2)
            .filter(|p| p[0].0 == p[1].0)
            .map(|p| (p[0].0, p[0].1 != p[1].1))
            .collect();
        let out = b_step(&predicted);
        predicted = out.rates;
        report.stages.push(StageReport {
            kind: StageKind::BRound(round + 1),
            input,
            trials: input / 2,
            kept: survivors.len(),
            discarded: input - survivors.len(),
            counts: tally(&survivors),
            analytic: StageAnalytic {
                // Agreement probability per pair.
                keep_probability: 2.0 * out.survival,
                rates: Some(predicted),
                p_x: predicted.flip_rates().p_x,
                p_z: predicted.flip_rates().p_z,
            },
        });
        bits = survivors;
    }

    let k = params.p_group;
    let input = bits.len();
    bits.shuffle(&mut stage_rng(STAGE_P_STEP));
    let parity: Vec<(bool, bool)> = bits
        .chunks_exact(k)
        .map(|g| {
            let bit = g.iter().fold(false, |acc, b| acc != b.0);
            let phases = g.iter().filter(|b| b.1).count();
            (bit, 2 * phases > k)
        })
        .collect();
    let residual = p_step(&predicted.flip_rates(), PStepParams::new(k)?);
    let stage = StageReport {
        kind: StageKind::PStep,
        input,
        trials: input / k,
        kept: parity.len(),
        discarded: input - parity.len(),
        counts: tally(&parity),
        analytic: StageAnalytic {
            keep_probability: 1.0,
            rates: None,
            p_x: residual.p_x,
            p_z: residual.p_z,
        },
    };
    report.final_rate_empirical =
        Some(1.0 - binary_entropy_unchecked(stage.p_x()) - binary_entropy_unchecked(stage.p_z()));
    report.final_rate_analytic = Some(residual.css_rate());
    report.stages.push(stage);
    Ok((report, records))
}

fn tally(bits: &[(bool, bool)]) -> [usize; 4] {
    let mut c = [0; 4];
    for &(bit, phase) in bits {
        c[Pauli::from_flags(bit, phase) as usize] += 1;
    }
    c
}

/// Takes `n` check indices from the shuffled per-basis lists.
fn select_checks(
    by_basis: &mut [Vec<usize>; 3],
    n: usize,
    split: CheckSplit,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    match split {
        CheckSplit::Balanced => {
            let mut quota = [n / 3; 3];
            for q in quota.iter_mut().take(n % 3) {
                *q += 1;
            }
            for (q, list) in quota.iter().zip(by_basis.iter_mut()) {
                let take = (*q).min(list.len());
                out.extend(list.drain(..take));
            }
            for list in by_basis.iter_mut() {
                let take = (n - out.len()).min(list.len());
                out.extend(list.drain(..take));
            }
        }
        CheckSplit::Uniform => {
            let mut all: Vec<usize> = by_basis.iter_mut().flat_map(|l| l.drain(..)).collect();
            all.sort_unstable();
            all.shuffle(rng);
            all.truncate(n);
            out = all;
        }
    }
    out
}
