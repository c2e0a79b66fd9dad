mod common;

use asymqkd_core::distill::{b_step, p_step, PStepParams};
use asymqkd_core::keyrates::{
    rate_bb84_symmetrized, rate_single_basis, rate_sixstate_mixed, rate_sixstate_separate,
};
use asymqkd_core::sim::EveModel;
use asymqkd_core::{Basis, FlipRates, PauliRates};
use common::*;

fn pauli(q: [f64; 4]) -> PauliRates {
    PauliRates::new(q[0], q[1], q[2], q[3]).unwrap()
}

#[test]
fn b_step_matches_pair_enumeration() {
    let mut rng = rng(1);
    for _ in 0..100 {
        let q = random_channel(&mut rng);
        let (want, survival) = b_step_enumerated(q);
        let got = b_step(&pauli(q));
        for (a, b) in got.rates.to_array().into_iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{q:?}: {a} vs {b}");
        }
        assert!((got.survival - survival).abs() < 1e-12);
    }
}

#[test]
fn fully_mixed_pair_survival_is_one_quarter() {
    let (rates, survival) = b_step_enumerated([0.25; 4]);
    assert_eq!(survival, 0.25);
    assert_eq!(rates, [0.25; 4]);
    assert_eq!(b_step(&pauli([0.25; 4])).survival, 0.25);
}

#[test]
fn p_step_matches_pattern_enumeration() {
    let mut rng = rng(2);
    for k in [1u32, 3, 5, 7] {
        for _ in 0..50 {
            let q = random_channel(&mut rng);
            let f = pauli(q).flip_rates();
            let (px, pz) = p_step_enumerated(f.p_x, f.p_z, k);
            let got = p_step(&f, PStepParams::new(k as usize).unwrap());
            assert!((got.p_x - px).abs() < 1e-12, "k={k}");
            assert!((got.p_z - pz).abs() < 1e-12, "k={k}");
        }
    }
    // Flip rates above 1/2 go through the same formulas.
    let f = FlipRates::new(0.8, 0.7, 0.5).unwrap();
    let got = p_step(&f, PStepParams::new(5).unwrap());
    let (px, pz) = p_step_enumerated(0.8, 0.7, 5);
    assert!((got.p_x - px).abs() < 1e-12 && (got.p_z - pz).abs() < 1e-12);
}

#[test]
fn one_way_rate_dominance() {
    let mut rng = rng(3);
    for _ in 0..1000 {
        let q = random_channel(&mut rng);
        let ch = pauli(q);
        let four = rate_single_basis(&ch).value() - rate_bb84_symmetrized(&ch).value();
        let six = rate_sixstate_separate(&ch).value() - rate_sixstate_mixed(&ch).value();
        assert!(four > 1e-10, "{q:?}: {four}");
        assert!(six > 1e-10, "{q:?}: {six}");

        // On the symmetry sets the gaps close.
        let px_eq_pz = pauli([q[0], q[1], q[2], q[1]].map(|x| x / (q[0] + q[2] + 2.0 * q[1])));
        let gap = rate_single_basis(&px_eq_pz).value() - rate_bb84_symmetrized(&px_eq_pz).value();
        assert!(gap.abs() <= 1e-10);
        let e = (q[1] + q[2] + q[3]) / 3.0;
        let equal = pauli([q[0], e, e, e]);
        let gap = rate_sixstate_separate(&equal).value() - rate_sixstate_mixed(&equal).value();
        assert!(gap.abs() <= 1e-10);
    }
}

#[test]
fn one_way_rates_from_entropies() {
    let mut rng = rng(4);
    for _ in 0..200 {
        let q = random_channel(&mut rng);
        let ch = pauli(q);
        let (px, pz) = (q[1] + q[2], q[3] + q[2]);
        assert!((rate_single_basis(&ch).value() - (1.0 - h(px) - h(pz))).abs() < 1e-12);
        assert!(
            (rate_bb84_symmetrized(&ch).value() - (1.0 - 2.0 * h((px + pz) / 2.0))).abs() < 1e-12
        );
        let s4: f64 = q.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
        assert!((rate_sixstate_separate(&ch).value() - (1.0 - s4)).abs() < 1e-12);
    }
}

#[test]
fn intercept_resend_matches_case_enumeration() {
    let cases: [(&[Basis], [f64; 3]); 4] = [
        (&[Basis::Z], [1.0, 0.0, 0.0]),
        (&[Basis::Z, Basis::X], [0.5, 0.5, 0.0]),
        (&[Basis::Z, Basis::X, Basis::Y], [1.0 / 3.0; 3]),
        (&[Basis::Y], [0.0, 0.0, 1.0]),
    ];
    for (bases, w) in cases {
        let eve = EveModel::uniform(bases).unwrap();
        for b in Basis::ALL {
            let eff = eve.effective_channel(&PauliRates::IDENTITY, b).conjugate(b);
            let want = eve_error_enumerated(w, b.index());
            assert!((eff.flip_rates().p_x - want).abs() < 1e-15, "{bases:?} {b}");
        }
    }
    assert_eq!(eve_error_enumerated([0.5, 0.5, 0.0], 0), 0.25);
    assert!((eve_error_enumerated([1.0 / 3.0; 3], 2) - 1.0 / 3.0).abs() < 1e-15);
}
