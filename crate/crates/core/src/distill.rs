//! Two-way post-processing of the key bits.
//!
//! * **B-step**: pair the bits at random, compare parities, drop both bits of
//!   a disagreeing pair and one bit of an agreeing pair. Removes bit errors and
//!   roughly doubles phase errors.
//! * **P-step**: replace each group of `k` bits by its parity. Phase errors on
//!   the parity bit survive only when a majority of the group carries one, so
//!   this is a `k`-fold repetition code against phase errors; bit errors add up
//!   modulo two.
//!
//! [`distill_schedule`] searches `m` B-steps followed by a single P-step.

use alloc::vec::Vec;

use crate::channel::{FlipRates, PauliRates};
use crate::keyrates::{binary_entropy_unchecked, shannon4, KeyRate};
use crate::logbias::LogBias;
use crate::math;
use crate::{Error, Result};

/// Result of one B-step on the Bell-diagonal key-bit distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BStepOutcome {
    /// Error distribution of the surviving bits.
    pub rates: PauliRates,
    /// Fraction of the input bits kept: half the parity-agreement probability.
    pub survival: f64,
}

/// Applies the B-step map.
///
/// With `D = (q_i + q_z)^2 + (q_x + q_y)^2` (the probability that a pair's
/// parities agree):
///
/// ```text
/// q_i' = (q_i^2 + q_z^2) / D     q_x' = (q_x^2 + q_y^2) / D
/// q_y' = 2 q_x q_y / D           q_z' = 2 q_i q_z / D
/// ```
///
/// and the survival fraction is `D / 2`, which is at most 1/2.
pub fn b_step(rates: &PauliRates) -> BStepOutcome {
    let [q_i, q_x, q_y, q_z] = rates.to_array();
    let agree = (q_i + q_z) * (q_i + q_z) + (q_x + q_y) * (q_x + q_y);
    BStepOutcome {
        rates: PauliRates::new_unchecked(
            (q_i * q_i + q_z * q_z) / agree,
            (q_x * q_x + q_y * q_y) / agree,
            2.0 * q_x * q_y / agree,
            2.0 * q_i * q_z / agree,
        ),
        survival: agree / 2.0,
    }
}

/// Group size of a P-step. Always odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PStepParams {
    k: usize,
}

impl PStepParams {
    pub fn new(k: usize) -> Result<Self> {
        if k.is_multiple_of(2) {
            return Err(Error::InvalidGroupSize(k));
        }
        Ok(Self { k })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }
}

/// Bit and phase error of the parity bits after a P-step.
///
/// The joint (Y) component is not tracked: step 10 consumes only these two
/// marginals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualErrors {
    pub p_x: f64,
    pub p_z: f64,
}

impl ResidualErrors {
    /// Step-10 CSS rate `1 - H(p_x) - H(p_z)`.
    pub fn css_rate(&self) -> f64 {
        1.0 - binary_entropy_unchecked(self.p_x) - binary_entropy_unchecked(self.p_z)
    }
}

/// Probability that the parity of `k` independent bits, each flipped with
/// probability `p`, is flipped: `(1 - (1 - 2p)^k) / 2`.
pub fn parity_flip_probability(p: f64, k: usize) -> f64 {
    let base = 1.0 - 2.0 * p;
    if base >= 0.0 {
        -math::exp_m1(k as f64 * math::ln_1p(-2.0 * p)) / 2.0
    } else {
        // k odd: (-|b|)^k = -|b|^k
        let mag = math::exp(k as f64 * math::ln(-base));
        let signed = if k % 2 == 1 { -mag } else { mag };
        (1.0 - signed) / 2.0
    }
}

/// Probability that a strict majority of `k` (odd) independent bits is set,
/// each set with probability `p`. Summed from log-factorials.
pub fn majority_probability(p: f64, k: usize) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (ln_p, ln_q) = (math::ln(p), math::ln_1p(-p));
    let k64 = k as u64;
    (k64.div_ceil(2)..=k64)
        .map(|j| math::exp(math::ln_binomial(k64, j) + j as f64 * ln_p + (k64 - j) as f64 * ln_q))
        .sum::<f64>()
        .min(1.0)
}

/// Applies the P-step map to the marginal error rates, assuming the grouped
/// bits are independent.
pub fn p_step(flips: &FlipRates, params: PStepParams) -> ResidualErrors {
    ResidualErrors {
        p_x: parity_flip_probability(flips.p_x, params.k),
        p_z: majority_probability(flips.p_z, params.k),
    }
}

/// Key rate of a single B-step followed by CSS distillation, per input key
/// bit: `f (1 - H(q'))` where `(q', f) = b_step(rates)`.
///
/// `rates` are the errors seen by the key bits. For the Y-basis protocol pass
/// `channel.conjugate(Basis::Y)`.
pub fn modified_rate_one_bstep(rates: &PauliRates) -> KeyRate {
    let out = b_step(rates);
    KeyRate(out.survival * (1.0 - shannon4(&out.rates)))
}

/// When a schedule counts as successful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StoppingRule {
    /// Both residual errors after the terminal P-step are below the target,
    /// with `m <= m_max` and odd `k <= k_max`.
    ResidualTarget,
    /// The CSS rate `1 - H(p_x) - H(p_z)` is positive after `m <= m_max`
    /// B-steps. Evaluated in log space, so deep schedules are exact. This is
    /// the `k_max -> infinity` limit of [`StoppingRule::ResidualTarget`].
    #[default]
    PositiveCssRate,
}

/// Search caps and success target for [`distill`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistillParams {
    pub rule: StoppingRule,
    pub target: f64,
    pub m_max: usize,
    pub k_max: usize,
}

impl Default for DistillParams {
    fn default() -> Self {
        Self {
            rule: StoppingRule::default(),
            target: 0.05,
            m_max: 60,
            k_max: 2001,
        }
    }
}

impl DistillParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.target > 0.0 && self.target < 0.5) {
            return Err(Error::InvalidParameter {
                name: "target",
                reason: "must lie in (0, 0.5)",
            });
        }
        if self.k_max == 0 {
            return Err(Error::InvalidParameter {
                name: "k_max",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

/// Terminal P-step of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityStep {
    pub k: usize,
    pub residual: ResidualErrors,
}

/// Record of a B-step schedule and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DistillationTrace {
    pub rule: StoppingRule,
    /// One entry per applied B-step, in order.
    pub rounds: Vec<BStepOutcome>,
    pub p_step: Option<ParityStep>,
    /// Product of the B-step survivals, divided by `k` when a P-step is applied.
    pub cumulative_survival: f64,
    pub succeeded: bool,
    /// Step-10 CSS rate at the end of the schedule (after the P-step if any).
    pub final_css_rate: f64,
}

impl DistillationTrace {
    /// Number of B-steps.
    pub fn m(&self) -> usize {
        self.rounds.len()
    }

    /// Group size of the P-step, 1 when none was applied.
    pub fn k(&self) -> usize {
        self.p_step.map_or(1, |p| p.k)
    }
}

/// Runs the schedule search selected by `params.rule`.
pub fn distill(rates: &PauliRates, params: &DistillParams) -> Result<DistillationTrace> {
    params.validate()?;
    Ok(match params.rule {
        StoppingRule::ResidualTarget => {
            residual_search(rates, params.target, params.m_max, params.k_max)
        }
        StoppingRule::PositiveCssRate => positive_rate_search(rates, params.m_max),
    })
}

/// Finds the lexicographically smallest `(m, k)` such that `m` B-steps and a
/// P-step of odd size `k` leave both error rates below `target`.
///
/// On failure returns the `(m, k)` with the smallest larger residual error,
/// marked `succeeded = false`.
pub fn distill_schedule(
    rates: &PauliRates,
    target: f64,
    m_max: usize,
    k_max: usize,
) -> Result<DistillationTrace> {
    distill(
        rates,
        &DistillParams {
            rule: StoppingRule::ResidualTarget,
            target,
            m_max,
            k_max,
        },
    )
}

fn residual_search(
    rates: &PauliRates,
    target: f64,
    m_max: usize,
    k_max: usize,
) -> DistillationTrace {
    let mut rounds = Vec::new();
    let mut current = *rates;
    let mut survival = 1.0;
    // (worst residual, m, k, survival at m)
    let mut best: Option<(f64, usize, usize, f64)> = None;

    for m in 0..=m_max {
        let flips = current.flip_rates();
        if let Some(k) = scan_group_sizes(&flips, target, k_max, |worst, k| {
            if best.is_none_or(|b| worst < b.0) {
                best = Some((worst, m, k, survival));
            }
        }) {
            let residual = p_step(&flips, PStepParams { k });
            return DistillationTrace {
                rule: StoppingRule::ResidualTarget,
                rounds,
                p_step: Some(ParityStep { k, residual }),
                cumulative_survival: survival / k as f64,
                succeeded: true,
                final_css_rate: residual.css_rate(),
            };
        }
        if m == m_max {
            break;
        }
        let out = b_step(&current);
        survival *= out.survival;
        current = out.rates;
        rounds.push(out);
    }

    let (_, m, k, surv) = best.expect("k = 1 is always scanned");
    rounds.truncate(m);
    let flips = rounds.last().map_or(*rates, |r| r.rates).flip_rates();
    let residual = p_step(&flips, PStepParams { k });
    DistillationTrace {
        rule: StoppingRule::ResidualTarget,
        rounds,
        p_step: Some(ParityStep { k, residual }),
        cumulative_survival: surv / k as f64,
        succeeded: false,
        final_css_rate: residual.css_rate(),
    }
}

/// Scans odd `k` upward, returning the first size that meets `target`.
///
/// The majority tail is advanced with the exact recurrence
/// `M(k+2) = M(k) + C(k, (k-1)/2) (pq)^((k+1)/2) (p - q)`; a hit is confirmed
/// with the direct sum before it is returned. `observe(worst, k)` sees every
/// scanned size.
fn scan_group_sizes(
    flips: &FlipRates,
    target: f64,
    k_max: usize,
    mut observe: impl FnMut(f64, usize),
) -> Option<usize> {
    let (p, q) = (flips.p_z, 1.0 - flips.p_z);
    let mut majority = p;
    let mut term = p * q;
    let mut k = 1;
    while k <= k_max {
        let px = parity_flip_probability(flips.p_x, k);
        observe(px.max(majority), k);
        if px < target && majority < target {
            let exact = majority_probability(p, k);
            if exact < target {
                return Some(k);
            }
        }
        // Bit error only grows with k below 1/2; phase error never drops
        // below 1/2 from above.
        if (flips.p_x < 0.5 && px >= target) || p >= 0.5 {
            return None;
        }
        majority = (majority + term * (p - q)).max(0.0);
        term *= 4.0 * p * q * (k as f64 + 2.0) / (k as f64 + 3.0);
        k += 2;
    }
    None
}

fn positive_rate_search(rates: &PauliRates, m_max: usize) -> DistillationTrace {
    let mut state = LogBias::from_rates(rates);
    let mut rounds = Vec::new();
    let mut ln_survival = 0.0;
    let mut succeeded = state.css_rate_positive();
    while !succeeded && rounds.len() < m_max {
        let ln_f = state.b_step();
        ln_survival += ln_f;
        rounds.push(BStepOutcome {
            rates: state.to_rates(),
            survival: math::exp(ln_f),
        });
        succeeded = state.css_rate_positive();
    }
    DistillationTrace {
        rule: StoppingRule::PositiveCssRate,
        rounds,
        p_step: None,
        cumulative_survival: math::exp(ln_survival),
        succeeded,
        final_css_rate: state.css_rate(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Basis;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rates(q_i: f64, q_x: f64, q_y: f64, q_z: f64) -> PauliRates {
        PauliRates::new(q_i, q_x, q_y, q_z).unwrap()
    }

    #[test]
    fn b_step_examples() {
        let out = b_step(&PauliRates::IDENTITY);
        assert_eq!(out.rates, PauliRates::IDENTITY);
        assert_eq!(out.survival, 0.5);

        let out = b_step(&rates(0.25, 0.25, 0.25, 0.25));
        for q in out.rates.to_array() {
            assert_abs_diff_eq!(q, 0.25, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(out.survival, 0.25, epsilon = 1e-15);

        let out = b_step(&rates(0.9, 0.1, 0.0, 0.0));
        assert_abs_diff_eq!(out.rates.q_i(), 0.81 / 0.82, epsilon = 1e-15);
        assert_abs_diff_eq!(out.rates.q_x(), 0.01 / 0.82, epsilon = 1e-15);
        assert_eq!(out.rates.q_y(), 0.0);
        assert_eq!(out.rates.q_z(), 0.0);
        assert_abs_diff_eq!(out.survival, 0.41, epsilon = 1e-15);
    }

    #[test]
    fn p_step_examples() {
        let f = FlipRates::new(0.01, 0.3, 0.0).unwrap();
        let one = p_step(&f, PStepParams::new(1).unwrap());
        assert_abs_diff_eq!(one.p_x, 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(one.p_z, 0.3, epsilon = 1e-15);
        let three = p_step(&f, PStepParams::new(3).unwrap());
        assert_abs_diff_eq!(three.p_x, 0.029_404, epsilon = 1e-15);
        assert_abs_diff_eq!(three.p_z, 0.216, epsilon = 1e-15);
        assert!(matches!(
            PStepParams::new(4),
            Err(Error::InvalidGroupSize(4))
        ));
        assert!(PStepParams::new(0).is_err());
    }

    #[test]
    fn majority_recurrence_matches_direct_sum() {
        for &p in &[0.01, 0.2, 0.37, 0.49, 0.5, 0.7] {
            let (q, mut m, mut t) = (1.0 - p, p, p * (1.0 - p));
            for k in (1..400).step_by(2) {
                assert_abs_diff_eq!(m, majority_probability(p, k), epsilon = 1e-12);
                m += t * (p - q);
                t *= 4.0 * p * q * (k as f64 + 2.0) / (k as f64 + 3.0);
            }
        }
    }

    #[test]
    fn parity_flip_above_one_half() {
        // (1 - (-0.4)^3) / 2
        assert_abs_diff_eq!(parity_flip_probability(0.7, 3), 0.532, epsilon = 1e-15);
        assert_abs_diff_eq!(parity_flip_probability(0.5, 9), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn modified_rate_examples() {
        assert_eq!(modified_rate_one_bstep(&PauliRates::IDENTITY).value(), 0.5);
        assert_abs_diff_eq!(
            modified_rate_one_bstep(&rates(0.25, 0.25, 0.25, 0.25)).value(),
            -0.25,
            epsilon = 1e-15
        );
        let key = rates(0.9, 0.05, 0.0, 0.05).conjugate(Basis::Y);
        assert_eq!(key.to_array(), [0.9, 0.05, 0.05, 0.0]);
        // D = 0.81 + 0.01, rates (0.81, 0.005, 0.005, 0) / D
        let d = 0.82;
        let expect = d / 2.0 * (1.0 - shannon4(&rates(0.81 / d, 0.005 / d, 0.005 / d, 0.0)));
        assert_abs_diff_eq!(
            modified_rate_one_bstep(&key).value(),
            expect,
            epsilon = 1e-15
        );
    }

    #[test]
    fn schedule_noiseless() {
        let t = distill_schedule(&PauliRates::IDENTITY, 0.05, 60, 2001).unwrap();
        assert!(t.succeeded);
        assert_eq!((t.m(), t.k()), (0, 1));
        assert_eq!(t.cumulative_survival, 1.0);
    }

    #[test]
    fn schedule_contracts_bit_error_without_phase_error() {
        // Y-bit errors (q_x, q_y, 0) with bit error 0.45
        let r = rates(0.55, 0.45, 0.0, 0.0);
        let t = distill_schedule(&r, 0.05, 60, 2001).unwrap();
        assert!(t.succeeded);
        assert_eq!(t.k(), 1);
        assert!(t.m() > 0);
        let last = t.rounds.last().unwrap().rates;
        assert_eq!(last.q_z(), 0.0);
        assert_eq!(last.q_y(), 0.0);
        let res = t.p_step.unwrap().residual;
        assert!(res.p_x < 0.05 && res.p_z < 0.05);
    }

    #[test]
    fn schedule_fails_from_one_half() {
        for p in [0.5, 0.6] {
            let r = rates(1.0 - p, p, 0.0, 0.0);
            let t = distill_schedule(&r, 0.05, 60, 2001).unwrap();
            assert!(!t.succeeded, "p = {p}");
        }
        let half = distill(&rates(0.5, 0.5, 0.0, 0.0), &DistillParams::default()).unwrap();
        assert!(!half.succeeded);
        // A known complete bit flip carries no uncertainty: 1 - H(0.6) > 0.
        let flipped = distill(&rates(0.4, 0.6, 0.0, 0.0), &DistillParams::default()).unwrap();
        assert!(flipped.succeeded);
    }

    #[test]
    fn schedule_prefers_fewest_rounds() {
        // Phase error only: no B-step needed, P-step alone fixes it.
        let r = rates(0.8, 0.0, 0.0, 0.2);
        let t = distill_schedule(&r, 0.05, 60, 2001).unwrap();
        assert!(t.succeeded);
        assert_eq!(t.m(), 0);
        let k = t.k();
        assert!(majority_probability(0.2, k) < 0.05);
        assert!(majority_probability(0.2, k - 2) >= 0.05);
    }

    #[test]
    fn schedule_rejects_bad_target() {
        assert!(distill_schedule(&PauliRates::IDENTITY, 0.0, 10, 11).is_err());
        assert!(distill_schedule(&PauliRates::IDENTITY, 0.5, 10, 11).is_err());
    }

    #[test]
    fn positive_rate_rule_reports_deep_schedules() {
        let r = PauliRates::depolarizing(0.41).unwrap();
        let t = distill(&r, &DistillParams::default()).unwrap();
        assert!(t.succeeded);
        assert!(t.m() >= 5);
        assert!(t.cumulative_survival > 0.0 && t.cumulative_survival < 0.5f64.powi(t.m() as i32));
        let literal = distill_schedule(&r, 0.05, 60, 2001).unwrap();
        assert!(!literal.succeeded);
    }

    fn arb_rates() -> impl Strategy<Value = PauliRates> {
        (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_filter_map(
            "nonzero",
            |(a, b, c, d)| {
                let s = a + b + c + d;
                (s > 1e-9).then(|| PauliRates::new(a / s, b / s, c / s, d / s).unwrap())
            },
        )
    }

    proptest! {
        #[test]
        fn b_step_stays_on_simplex(r in arb_rates()) {
            let out = b_step(&r);
            prop_assert!((out.rates.to_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((0.25 - 1e-15..=0.5).contains(&out.survival));
        }

        #[test]
        fn b_step_preserves_zero_phase_subspace(p in 0.0..1.0f64) {
            let out = b_step(&rates(1.0 - p, p, 0.0, 0.0));
            prop_assert_eq!(out.rates.q_y(), 0.0);
            prop_assert_eq!(out.rates.q_z(), 0.0);
            let p_out = out.rates.q_x();
            if p < 0.5 && p > 0.0 {
                prop_assert!(p_out < p);
            } else if p > 0.5 && p < 1.0 {
                prop_assert!(p_out > p);
            }
        }

        #[test]
        fn b_step_phase_growth_is_bounded(qz in 0.0..1.0f64) {
            let out = b_step(&rates(1.0 - qz, 0.0, 0.0, qz));
            prop_assert!(out.rates.q_z() <= 2.0 * qz + 1e-15);
        }

        #[test]
        fn p_step_monotone_in_k(px in 0.0..0.5f64, pz in 0.0..0.5f64, j in 0usize..50) {
            let f = FlipRates::new(px, pz, 0.0).unwrap();
            let a = p_step(&f, PStepParams::new(2 * j + 1).unwrap());
            let b = p_step(&f, PStepParams::new(2 * j + 3).unwrap());
            prop_assert!(b.p_x >= a.p_x - 1e-15);
            prop_assert!(b.p_z <= a.p_z + 1e-15);
        }
    }
}
