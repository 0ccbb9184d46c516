//! Outcome probabilities of the digit-by-digit readout.
//!
//! Step `j` (1-based) interacts for a phase `pi s 2^(M-j)` and measures in a
//! basis rotated by `phi_j`, the over-rotation produced by the digits already
//! read. Its outcome is the digit `r_(M+1-j)`, so the first step reads the
//! least significant digit. Multiplying the step probabilities along a full
//! result `R` gives `p_M(R|s) = prod_k cos^2(pi (s - R) 2^k)`, which also
//! has the Dirichlet-kernel closed form evaluated here.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::digits::{pow2, DigitString};
use crate::error::{invalid, Result};

/// Below this `|sin(pi (s - R))|` the closed form switches to the product.
const SINGULAR_THRESHOLD: f64 = 1e-9;

/// `sin(pi x)` with exact argument reduction; zero at every integer.
fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    let (r, sign) = if r >= 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    sign * (PI * r.min(1.0 - r)).sin()
}

/// `cos^2(pi x)`; exactly zero at half-integers.
fn cos2_pi(x: f64) -> f64 {
    let d = (x.rem_euclid(1.0) - 0.5).abs();
    let c = (PI * d).sin();
    c * c
}

/// `p_M(R|s)` as the product `prod_{k=0}^{M-1} cos^2(pi (s - R) 2^k)`.
pub fn likelihood_product(s: f64, result: &DigitString) -> f64 {
    let x = s - result.value();
    (0..result.len()).map(|k| cos2_pi(x * pow2(k))).product()
}

/// `p_M(R|s)` as `(sin(2^M pi (s - R)) / (2^M sin(pi (s - R))))^2`.
///
/// `2^M (s - R)` is formed exactly and reduced modulo 2 before the sine, so
/// large `M` loses no phase accuracy. Close to the removable singularity at
/// integer `s - R` the product form is used instead.
pub fn likelihood_closed_form(s: f64, result: &DigitString) -> f64 {
    let x = s - result.value();
    let den = sin_pi(x);
    if den.abs() < SINGULAR_THRESHOLD {
        return likelihood_product(s, result);
    }
    let scale = pow2(result.len());
    let num = sin_pi(x * scale);
    let ratio = num / (scale * den);
    ratio * ratio
}

/// Basis rotation `phi_j = (pi/2) sum_{l=1}^{j-1} r_(M+1-l) 2^(l-j)` for step
/// `j = history.len() + 1`.
///
/// `history` lists the digits in the order they were measured:
/// `r_M, r_(M-1), ..., r_(M+2-j)`.
pub fn basis_angle(history: &[u8]) -> f64 {
    FRAC_PI_2 * rotation_fraction(history)
}

/// `phi_j / (pi/2)`, a dyadic number in `[0, 1)`.
pub(crate) fn rotation_fraction(history: &[u8]) -> f64 {
    // frac_(j+1) = (frac_j + r) / 2, exact in binary.
    history
        .iter()
        .fold(0.0, |frac, &r| (frac + f64::from(r)) * 0.5)
}

/// Probability of `outcome` at step `j` of an `M`-digit readout of the
/// eigenvalue `s`: `cos^2(pi s 2^(M-j) - phi_j - outcome pi/2)`.
pub fn step_outcome_probability(
    s: f64,
    digits: u32,
    j: u32,
    history: &[u8],
    outcome: u8,
) -> Result<f64> {
    if j == 0 || j > digits {
        return Err(invalid(format!("step {j} outside 1..={digits}")));
    }
    if history.len() != (j - 1) as usize {
        return Err(invalid(format!(
            "step {j} needs {} history digits, got {}",
            j - 1,
            history.len()
        )));
    }
    if history
        .iter()
        .chain(std::iter::once(&outcome))
        .any(|&b| b > 1)
    {
        return Err(invalid("digits must be 0 or 1"));
    }
    Ok(step_probability_unchecked(
        s,
        digits,
        j,
        rotation_fraction(history),
        outcome,
    ))
}

/// Step probability with the rotation already expressed as `phi_j / (pi/2)`.
#[inline]
pub(crate) fn step_probability_unchecked(
    s: f64,
    digits: u32,
    j: u32,
    rotation: f64,
    outcome: u8,
) -> f64 {
    let phase = s * pow2(digits - j) - 0.5 * (rotation + f64::from(outcome));
    cos2_pi(phase)
}

/// `min(R, 1 - R)`: the readout cannot tell `s` from `1 - s`.
pub fn folded_result(result: &DigitString) -> f64 {
    let r = result.value();
    r.min(1.0 - r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Probe-qubit oracle: evolve `|+>` to `cos(theta)|+> + i sin(theta)|->`
    /// and project onto `cos(phi)|+> + i sin(phi)|->` (outcome 0) or its
    /// orthogonal partner (outcome 1) with explicit complex amplitudes.
    fn amplitude_oracle(theta: f64, phi: f64, outcome: u8) -> f64 {
        let state = [(theta.cos(), 0.0), (0.0, theta.sin())];
        let basis = if outcome == 0 {
            [(phi.cos(), 0.0), (0.0, phi.sin())]
        } else {
            [(phi.sin(), 0.0), (0.0, -phi.cos())]
        };
        // <basis|state> = sum conj(b_i) s_i
        let (mut re, mut im) = (0.0, 0.0);
        for (b, s) in basis.iter().zip(state.iter()) {
            let (br, bi) = (b.0, -b.1);
            re += br * s.0 - bi * s.1;
            im += br * s.1 + bi * s.0;
        }
        re * re + im * im
    }

    fn random_result(rng: &mut impl Rng, m: u32) -> DigitString {
        DigitString::from_numerator(rng.random_range(0..1u64 << m), m).unwrap()
    }

    #[test]
    fn zero_mismatch_has_unit_likelihood() {
        let r: DigitString = "0.10110".parse().unwrap();
        assert_eq!(likelihood_product(r.value(), &r), 1.0);
        assert_eq!(likelihood_closed_form(r.value(), &r), 1.0);
    }

    #[test]
    fn orthogonal_single_digit() {
        let r = DigitString::zeros(1).unwrap();
        assert_eq!(likelihood_product(0.5, &r), 0.0);
        assert_eq!(likelihood_closed_form(0.5, &r), 0.0);
    }

    #[test]
    fn single_factor_case() {
        let r = DigitString::zeros(1).unwrap();
        assert!((likelihood_closed_form(0.25, &r) - 0.5).abs() < 1e-15);
        assert!((likelihood_product(0.25, &r) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_product_examples() {
        let r = DigitString::nearest(0.25, 3).unwrap();
        let a = likelihood_product(0.3, &r);
        let b = likelihood_closed_form(0.3, &r);
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");

        let r = DigitString::nearest(0.359375, 8).unwrap();
        assert_eq!(r.value(), 0.359375);
        let a = likelihood_product(0.37, &r);
        let b = likelihood_closed_form(0.37, &r);
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn removable_singularity_is_one() {
        for m in [1, 5, 20, 40] {
            let r = DigitString::zeros(m).unwrap();
            assert_eq!(likelihood_closed_form(0.0, &r), 1.0);
            assert_eq!(likelihood_closed_form(1.0, &r), 1.0);
            let near = likelihood_closed_form(1e-18, &r);
            assert!(near.is_finite() && near > 0.99, "{near}");
            let near = likelihood_closed_form(1e-11, &r);
            assert!((near - likelihood_product(1e-11, &r)).abs() < 1e-12);
        }
    }

    #[test]
    fn step_probability_hand_value() {
        // s = 0.11 (binary), M = 2, second step after reading r_2 = 1:
        // phase 3pi/4, phi_2 = pi/4, outcome 1 subtracts pi/2 -> cos^2(0) = 1.
        assert!((basis_angle(&[1]) - PI / 4.0).abs() < 1e-15);
        let p = step_outcome_probability(0.75, 2, 2, &[1], 1).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn first_step_reads_least_significant_digit() {
        // Only s_M matters in step 1; the higher digits rotate by multiples of pi.
        for s in ["0.0110", "0.1010", "0.0000", "0.1111"] {
            let d: DigitString = s.parse().unwrap();
            let lsb = d.bit(4);
            let p = step_outcome_probability(d.value(), 4, 1, &[], lsb).unwrap();
            assert!((p - 1.0).abs() < 1e-15, "{s}");
        }
    }

    #[test]
    fn step_probability_matches_amplitude_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let m = rng.random_range(1..=10u32);
            let j = rng.random_range(1..=m);
            let s = rng.random::<f64>() * 0.5;
            let history: Vec<u8> = (1..j).map(|_| rng.random_range(0..2u8)).collect();
            let outcome = rng.random_range(0..2u8);
            // phase Omega_s t_j with t_j = t_1 2^(1-j) and Omega_s t_1 = pi s 2^(M-1)
            let theta = PI * s * pow2(m - 1) / pow2(j - 1);
            let phi = basis_angle(&history);
            let oracle = amplitude_oracle(theta, phi, outcome);
            let p = step_outcome_probability(s, m, j, &history, outcome).unwrap();
            assert!(
                (p - oracle).abs() < 1e-9,
                "m={m} j={j} s={s}: {p} vs {oracle}"
            );
        }
    }

    #[test]
    fn chain_of_steps_equals_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 1..=10u32 {
            for _ in 0..200 {
                let s = rng.random::<f64>();
                let r = random_result(&mut rng, m);
                let mut history = Vec::new();
                let mut chain = 1.0;
                for j in 1..=m {
                    let bit = r.bit(m + 1 - j);
                    chain *= step_outcome_probability(s, m, j, &history, bit).unwrap();
                    history.push(bit);
                }
                let direct = likelihood_product(s, &r);
                assert!((chain - direct).abs() < 1e-14, "{chain} vs {direct}");
            }
        }
    }

    #[test]
    fn step_argument_errors() {
        assert!(step_outcome_probability(0.1, 3, 0, &[], 0).is_err());
        assert!(step_outcome_probability(0.1, 3, 4, &[0, 0, 0], 0).is_err());
        assert!(step_outcome_probability(0.1, 3, 2, &[], 0).is_err());
        assert!(step_outcome_probability(0.1, 3, 2, &[0], 2).is_err());
    }

    #[test]
    fn normalization_over_all_results() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in 1..=12u32 {
            for _ in 0..4 {
                let s = rng.random::<f64>();
                let total: f64 = (0..1u64 << m)
                    .map(|n| likelihood_product(s, &DigitString::from_numerator(n, m).unwrap()))
                    .sum();
                assert!((total - 1.0).abs() < 1e-9, "m={m}: {total}");
            }
        }
    }

    #[test]
    fn folded_examples() {
        let f = |s: &str| folded_result(&s.parse().unwrap());
        assert_eq!(f("0.11"), 0.25);
        assert_eq!(f("0.1"), 0.5);
        assert_eq!(f("0.001"), 0.125);
    }

    proptest! {
        #[test]
        fn closed_form_agrees_with_product(
            m in 1u32..=16, n in any::<u64>(), s in 0.0f64..=1.0
        ) {
            let r = DigitString::from_numerator(n & ((1 << m) - 1), m).unwrap();
            let a = likelihood_product(s, &r);
            let b = likelihood_closed_form(s, &r);
            prop_assert!((a - b).abs() < 1e-10);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn reflection_symmetry(m in 1u32..=16, n in any::<u64>(), s in 0.0f64..=1.0) {
            let r = DigitString::from_numerator(n & ((1 << m) - 1), m).unwrap();
            let a = likelihood_product(s, &r);
            let b = likelihood_product(1.0 - s, &r.complement());
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
