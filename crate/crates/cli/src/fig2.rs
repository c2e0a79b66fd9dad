//! One-B-step two-way rate `R` against the separate-batch six-state rate `r'`
//! on channels with fixed `q_y0` and `q_x0 = q_z0`.

use anyhow::ensure;
use asymqkd_core::distill::modified_rate_one_bstep;
use asymqkd_core::keyrates::rate_sixstate_separate;
use asymqkd_core::{Basis, PauliRates};

pub fn channel(q_y0: f64, total: f64) -> anyhow::Result<PauliRates> {
    ensure!(
        (q_y0..=1.0).contains(&total),
        "total noise {total} outside [{q_y0}, 1]"
    );
    let side = (total - q_y0) / 2.0;
    Ok(PauliRates::from_errors(side, q_y0, side)?)
}

/// `(r', R)` at total noise `total`; `R` uses Y-basis key bits.
pub fn rates(q_y0: f64, total: f64) -> anyhow::Result<(f64, f64)> {
    let ch = channel(q_y0, total)?;
    Ok((
        rate_sixstate_separate(&ch).value(),
        modified_rate_one_bstep(&ch.conjugate(Basis::Y)).value(),
    ))
}

/// Landmarks of one curve pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossings {
    /// Smallest total noise above which `R > r'`.
    pub crossing: Option<f64>,
    pub r_prime_zero: Option<f64>,
    pub r_zero: Option<f64>,
}

const SCAN_STEP: f64 = 1e-3;

/// First upward zero crossing of `g` on `[lo, 1]`, refined by bisection.
fn first_rise(lo: f64, g: impl Fn(f64) -> f64) -> Option<f64> {
    let mut a = lo;
    let mut ga = g(a);
    while a < 1.0 {
        let b = (a + SCAN_STEP).min(1.0);
        let gb = g(b);
        if ga <= 0.0 && gb > 0.0 {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        (a, ga) = (b, gb);
    }
    None
}

pub fn crossings(q_y0: f64) -> anyhow::Result<Crossings> {
    channel(q_y0, q_y0)?;
    let at = |t: f64| rates(q_y0, t).expect("inside the family range");
    Ok(Crossings {
        crossing: first_rise(q_y0, |t| {
            let (rp, r) = at(t);
            r - rp
        }),
        r_prime_zero: first_rise(q_y0, |t| -at(t).0),
        r_zero: first_rise(q_y0, |t| -at(t).1),
    })
}

/// `A`, `B`, ... for case indices.
pub fn case_label(i: usize) -> String {
    let mut s = String::new();
    let mut i = i;
    loop {
        s.insert(0, (b'A' + (i % 26) as u8) as char);
        if i < 26 {
            break s;
        }
        i = i / 26 - 1;
    }
}
