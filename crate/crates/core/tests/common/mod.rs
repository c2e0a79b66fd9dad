//! Brute-force reference implementations. They avoid the library's maps and
//! work from raw case enumeration.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Errors encoded as `bit | phase << 1`: I = 0, X = 1, Z = 2, Y = 3.
const ENC: [usize; 4] = [0, 1, 3, 2];

fn bit(e: usize) -> usize {
    e & 1
}

fn phase(e: usize) -> usize {
    e >> 1
}

/// B-step by enumerating the 16 error pairs `(a, b)`.
///
/// The parities agree iff the bit errors agree. The kept bit keeps `a`'s bit
/// error and collects both phase errors. Returns `([q_i, q_x, q_y, q_z],
/// survival)`.
pub fn b_step_enumerated(q: [f64; 4]) -> ([f64; 4], f64) {
    let mut by_code = [0.0; 4];
    let mut agree = 0.0;
    for (i, &qa) in q.iter().enumerate() {
        for (j, &qb) in q.iter().enumerate() {
            let (a, b) = (ENC[i], ENC[j]);
            if bit(a) != bit(b) {
                continue;
            }
            let p = qa * qb;
            agree += p;
            by_code[bit(a) | (phase(a) ^ phase(b)) << 1] += p;
        }
    }
    let out = [by_code[0], by_code[1], by_code[3], by_code[2]].map(|x| x / agree);
    (out, agree / 2.0)
}

/// P-step on i.i.d. flags by enumerating all `2^k` patterns: the output bit
/// error is the parity, the output phase error the majority.
pub fn p_step_enumerated(p_x: f64, p_z: f64, k: u32) -> (f64, f64) {
    let mut parity = 0.0;
    let mut majority = 0.0;
    for pattern in 0u32..(1 << k) {
        let ones = pattern.count_ones() as i32;
        let weight = |p: f64| p.powi(ones) * (1.0 - p).powi(k as i32 - ones);
        if ones % 2 == 1 {
            parity += weight(p_x);
        }
        if 2 * ones > k as i32 {
            majority += weight(p_z);
        }
    }
    (parity, majority)
}

/// Check error of matched Z/X/Y bits prepared in `prep` under intercept-resend
/// with Eve basis weights `w`, by enumerating Eve's basis and both outcomes.
pub fn eve_error_enumerated(w: [f64; 3], prep: usize) -> f64 {
    let mut err = 0.0;
    for (e, &we) in w.iter().enumerate() {
        for eve_bit in 0..2 {
            // Alice sends 0.
            let p_eve = if e == prep {
                f64::from(u8::from(eve_bit == 0))
            } else {
                0.5
            };
            for bob_bit in 0..2 {
                let p_bob = if e == prep {
                    f64::from(u8::from(bob_bit == eve_bit))
                } else {
                    0.5
                };
                if bob_bit == 1 {
                    err += we * p_eve * p_bob;
                }
            }
        }
    }
    err
}

/// Uniform point of the probability simplex, `[q_i, q_x, q_y, q_z]`.
pub fn random_channel(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let e: [f64; 4] = core::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
    let s: f64 = e.iter().sum();
    e.map(|x| x / s)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn h(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        -t * t.log2() - (1.0 - t) * (1.0 - t).log2()
    }
}
