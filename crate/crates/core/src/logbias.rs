//! B-step iteration in log space.
//!
//! In bias coordinates `s = q_i + q_z`, `t = q_x + q_y`, `d = q_i - q_z`,
//! `u = q_x - q_y` the B-step squares every coordinate and divides by
//! `s^2 + t^2`. Tracking their logarithms keeps the iteration exact long after
//! the bit error and the phase bias have dropped below `f64` range.

use crate::channel::PauliRates;
use crate::keyrates::binary_entropy_unchecked;
use crate::math::{self, ln_add_exp, LN_2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LogBias {
    ln_s: f64,
    ln_t: f64,
    ln_d: f64,
    ln_u: f64,
    // Signs of d and u; both become nonnegative after the first B-step.
    neg_d: bool,
    neg_u: bool,
}

fn ln_abs(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        math::ln(x.abs())
    }
}

impl LogBias {
    pub(crate) fn from_rates(r: &PauliRates) -> Self {
        let d = r.q_i() - r.q_z();
        let u = r.q_x() - r.q_y();
        Self {
            ln_s: ln_abs(r.q_i() + r.q_z()),
            ln_t: ln_abs(r.q_x() + r.q_y()),
            ln_d: ln_abs(d),
            ln_u: ln_abs(u),
            neg_d: d < 0.0,
            neg_u: u < 0.0,
        }
    }

    /// Applies one B-step; returns the log of the survival fraction `D / 2`.
    pub(crate) fn b_step(&mut self) -> f64 {
        let ln_agree = ln_add_exp(2.0 * self.ln_s, 2.0 * self.ln_t);
        self.ln_s = 2.0 * self.ln_s - ln_agree;
        self.ln_t = 2.0 * self.ln_t - ln_agree;
        self.ln_d = 2.0 * self.ln_d - ln_agree;
        self.ln_u = 2.0 * self.ln_u - ln_agree;
        self.neg_d = false;
        self.neg_u = false;
        ln_agree - LN_2
    }

    /// Linear-domain rates; underflowed components come back as zero.
    pub(crate) fn to_rates(self) -> PauliRates {
        let s = math::exp(self.ln_s);
        let t = math::exp(self.ln_t);
        let d = signed(self.neg_d, math::exp(self.ln_d));
        let u = signed(self.neg_u, math::exp(self.ln_u));
        let q = [
            ((s + d) / 2.0).max(0.0),
            ((t + u) / 2.0).max(0.0),
            ((t - u) / 2.0).max(0.0),
            ((s - d) / 2.0).max(0.0),
        ];
        let sum: f64 = q.iter().sum();
        PauliRates::new_unchecked(q[0] / sum, q[1] / sum, q[2] / sum, q[3] / sum)
    }

    /// `ln |1 - 2 p_z|`, the log of the phase bias `|d + u|`.
    fn ln_phase_bias(&self) -> f64 {
        match (self.neg_d, self.neg_u) {
            (false, false) | (true, true) => ln_add_exp(self.ln_d, self.ln_u),
            _ => {
                let b = math::exp(self.ln_d) - math::exp(self.ln_u);
                ln_abs(b)
            }
        }
    }

    /// `ln H(p_x)` in bits. `H` is symmetric, so the smaller of `t` and `s` is used.
    fn ln_bit_entropy(&self) -> f64 {
        let ln_x = self.ln_t.min(self.ln_s);
        if ln_x == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        if ln_x > -600.0 {
            return math::ln(binary_entropy_unchecked(math::exp(ln_x)));
        }
        // H(x) ln 2 = x (1 - ln x) + O(x^2)
        ln_x + math::ln(1.0 - ln_x) - math::ln(LN_2)
    }

    /// `ln (1 - H((1 - b) / 2))` in bits, for phase bias `b`.
    fn ln_phase_capacity(&self) -> f64 {
        let ln_b = self.ln_phase_bias();
        if ln_b == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let b = math::exp(ln_b);
        if b >= 1.0 {
            return 0.0;
        }
        if b >= 1e-2 {
            let v = ((1.0 + b) * math::ln_1p(b) + (1.0 - b) * math::ln_1p(-b)) / (2.0 * LN_2);
            return math::ln(v);
        }
        // (1 / ln 2) sum_{n>=1} b^{2n} / (2n (2n - 1))
        let b2 = b * b;
        let mut sum = 0.5;
        let mut pow = 1.0;
        let mut n = 2.0;
        loop {
            pow *= b2;
            let term = pow / (2.0 * n * (2.0 * n - 1.0));
            if term <= 1e-18 * sum {
                break;
            }
            sum += term;
            n += 1.0;
        }
        2.0 * ln_b + math::ln(sum) - math::ln(LN_2)
    }

    /// Whether `1 - H(p_x) - H(p_z) > 0`, decided from logarithms.
    pub(crate) fn css_rate_positive(&self) -> bool {
        let cap = self.ln_phase_capacity();
        cap != f64::NEG_INFINITY && cap > self.ln_bit_entropy()
    }

    /// `1 - H(p_x) - H(p_z)`. Tiny rates underflow to zero.
    pub(crate) fn css_rate(&self) -> f64 {
        math::exp(self.ln_phase_capacity()) - math::exp(self.ln_bit_entropy())
    }
}

fn signed(neg: bool, v: f64) -> f64 {
    if neg {
        -v
    } else {
        v
    }
}
