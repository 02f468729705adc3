//! Canonical and seeded random boxes for tests, demos, and corpora.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boxes::{ProperBox, QuasiBox};
use crate::locality::DeterministicStrategy;
use crate::marginals::{from_marginals, param_count, MarginalTable};
use crate::scenario::Scenario;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn chsh_scenario() -> Scenario {
    Scenario::new(vec![2, 2], vec![2, 2]).unwrap()
}

/// The PR box: outcomes satisfy `(a₁−1) ⊕ (a₂−1) = (x₁−1)·(x₂−1)` with
/// probability 1/2 each, the extremal non-signalling point of the
/// two-party binary scenario.
pub fn pr_box() -> ProperBox {
    let quasi = QuasiBox::from_fn(chsh_scenario(), |a, x| {
        if (a[0] - 1) ^ (a[1] - 1) == (x[0] - 1) * (x[1] - 1) {
            rat(1, 2)
        } else {
            BigRational::zero()
        }
    });
    ProperBox::new(quasi).expect("PR box is proper")
}

/// High-precision rational stand-in for 1/√2 (a Pell convergent,
/// within 8·10⁻¹³ of the real).
fn inv_sqrt2() -> BigRational {
    rat(470_832, 665_857)
}

/// The two-party binary box whose correlators sit at the quantum maximum:
/// `E = ±1/√2` with the sign flipped on the (2,2) input pair, entries
/// `(1 ± E)/4` embedded as exact rationals within 10⁻¹² of the reals.
pub fn tsirelson_box() -> ProperBox {
    let e = inv_sqrt2();
    let quasi = QuasiBox::from_fn(chsh_scenario(), |a, x| {
        let correlator = if x == [2, 2] { -e.clone() } else { e.clone() };
        let sign = if a[0] == a[1] {
            correlator
        } else {
            -correlator
        };
        (BigRational::one() + sign) / BigRational::from_integer(4.into())
    });
    ProperBox::new(quasi).expect("Tsirelson box is proper")
}

/// The constant box `1 / Π_k A_k`.
pub fn uniform_box(scenario: &Scenario) -> ProperBox {
    let outcomes = scenario.output_space().len() as i64;
    let quasi = QuasiBox::from_fn(scenario.clone(), |_, _| rat(1, outcomes));
    ProperBox::new(quasi).expect("uniform box is proper")
}

/// The point-mass box of a deterministic strategy.
pub fn deterministic_box(scenario: &Scenario, strategy: &DeterministicStrategy) -> ProperBox {
    strategy.to_box(scenario)
}

fn random_strategy(scenario: &Scenario, rng: &mut ChaCha8Rng) -> DeterministicStrategy {
    let assignments = (0..scenario.n_parties())
        .map(|party| {
            (0..scenario.party_inputs(party))
                .map(|_| rng.random_range(1..=scenario.party_outputs(party)))
                .collect()
        })
        .collect();
    DeterministicStrategy::new(scenario, assignments).expect("drawn in range")
}

fn random_local_with(scenario: &Scenario, rng: &mut ChaCha8Rng) -> ProperBox {
    let count = rng.random_range(1..=20usize);
    let strategies: Vec<DeterministicStrategy> =
        (0..count).map(|_| random_strategy(scenario, rng)).collect();
    let raw: Vec<i64> = (0..count).map(|_| rng.random_range(1..=1000i64)).collect();
    let total: i64 = raw.iter().sum();
    let weights: Vec<BigRational> = raw.iter().map(|&r| rat(r, total)).collect();
    let boxes: Vec<ProperBox> = strategies.iter().map(|s| s.to_box(scenario)).collect();
    let quasi = QuasiBox::from_fn(scenario.clone(), |a, x| {
        weights
            .iter()
            .zip(&boxes)
            .map(|(w, b)| w * b.value(a, x))
            .sum()
    });
    ProperBox::new(quasi).expect("convex mixture of proper boxes")
}

/// Seeded random convex mixture of at most 20 deterministic strategies.
pub fn random_local_box(scenario: &Scenario, seed: u64) -> ProperBox {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = random_local_with(scenario, &mut rng);
    debug_assert!(out.is_nonsignalling());
    out
}

/// Seeded random non-signalling box: a convex mixture of a random local
/// box with an extremal reference (the PR box in the two-party binary
/// scenario, another random local box elsewhere).
pub fn random_nonsignalling_box(scenario: &Scenario, seed: u64) -> ProperBox {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let local = random_local_with(scenario, &mut rng);
    let reference = if scenario == &chsh_scenario() {
        pr_box()
    } else {
        random_local_with(scenario, &mut rng)
    };
    let lambda = rat(rng.random_range(0..=1000), 1000);
    let complement = BigRational::one() - &lambda;
    let quasi = QuasiBox::from_fn(scenario.clone(), |a, x| {
        &lambda * local.value(a, x) + &complement * reference.value(a, x)
    });
    let out = ProperBox::new(quasi).expect("convex mixture of proper boxes");
    debug_assert!(out.is_nonsignalling());
    out
}

/// Seeded random canonical coordinates: the constant entry is 1 and all
/// other coordinates are signed twelfths. The reconstruction is a
/// normalized non-signalling quasibox, usually with negative entries.
pub fn random_marginal_table(scenario: &Scenario, seed: u64) -> MarginalTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = param_count(scenario) as usize;
    let mut values = Vec::with_capacity(count);
    values.push(BigRational::one());
    for _ in 1..count {
        values.push(rat(rng.random_range(-12..=12), 12));
    }
    MarginalTable::from_values(scenario.clone(), values).expect("count matches")
}

/// Seeded random non-signalling quasibox, built through its canonical
/// coordinates so negative entries appear naturally.
pub fn random_nonsignalling_quasibox(scenario: &Scenario, seed: u64) -> QuasiBox {
    from_marginals(&random_marginal_table(scenario, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locality::{bell_value, BellFunctional};
    use crate::rational::to_f64;
    use num_traits::Signed;

    #[test]
    fn pr_box_entries() {
        let pr = pr_box();
        assert_eq!(pr.value(&[1, 1], &[1, 1]), &rat(1, 2));
        assert_eq!(pr.value(&[1, 2], &[1, 1]), &rat(0, 1));
        assert_eq!(pr.value(&[1, 1], &[2, 2]), &rat(0, 1));
        assert_eq!(pr.value(&[1, 2], &[2, 2]), &rat(1, 2));
        assert!(pr.is_nonsignalling());
    }

    /// Born-rule oracle for the Tsirelson box: measure the two-qubit
    /// state (|00⟩ + |11⟩)/√2 along axes at angles {0, π/2} and
    /// {π/4, −π/4} in the Z–X plane. Real arithmetic suffices.
    fn born_rule_entry(a: [u32; 2], x: [u32; 2]) -> f64 {
        let alice = [0.0, std::f64::consts::FRAC_PI_2][(x[0] - 1) as usize];
        let bob = [std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4][(x[1] - 1) as usize];
        // Projector |v⟩⟨v| onto the ±1 eigenvector of cosθ·Z + sinθ·X.
        let spinor = |theta: f64, outcome: u32| -> [f64; 2] {
            if outcome == 1 {
                [(theta / 2.0).cos(), (theta / 2.0).sin()]
            } else {
                [-(theta / 2.0).sin(), (theta / 2.0).cos()]
            }
        };
        let u = spinor(alice, a[0]);
        let v = spinor(bob, a[1]);
        // ⟨Φ+| (|u⟩⟨u| ⊗ |v⟩⟨v|) |Φ+⟩ = |(u₀v₀ + u₁v₁)/√2|².
        let amplitude = (u[0] * v[0] + u[1] * v[1]) / std::f64::consts::SQRT_2;
        amplitude * amplitude
    }

    #[test]
    fn tsirelson_box_matches_the_born_rule_oracle() {
        let ts = tsirelson_box();
        for x1 in 1..=2u32 {
            for x2 in 1..=2u32 {
                for a1 in 1..=2u32 {
                    for a2 in 1..=2u32 {
                        let exact = to_f64(ts.value(&[a1, a2], &[x1, x2]));
                        let oracle = born_rule_entry([a1, a2], [x1, x2]);
                        assert!(
                            (exact - oracle).abs() < 1e-9,
                            "entry ({a1},{a2}|{x1},{x2}): {exact} vs {oracle}"
                        );
                    }
                }
            }
        }
        assert!(ts.is_nonsignalling());
        assert!(ts.as_quasi().validate(true).is_ok());
    }

    #[test]
    fn tsirelson_chsh_value_is_two_root_two_and_exceeds_two() {
        let ts = tsirelson_box();
        let functional = BellFunctional::from_fn(chsh_scenario(), |a, x| {
            let sign = if x == [2, 2] { -1 } else { 1 };
            let parity = if (a[0] + a[1]) % 2 == 0 { 1 } else { -1 };
            rat(sign * parity, 1)
        });
        let value = bell_value(ts.as_quasi(), &functional).unwrap();
        assert!(value > rat(2, 1), "exactly above the local bound");
        let two_sqrt2 = 2.0 * std::f64::consts::SQRT_2;
        assert!((to_f64(&value) - two_sqrt2).abs() < 1e-9);
    }

    #[test]
    fn embedded_constant_is_within_tolerance_of_the_real() {
        let r = inv_sqrt2();
        assert!((to_f64(&r) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn uniform_and_deterministic_boxes() {
        let s = Scenario::new(vec![2, 2], vec![2, 2]).unwrap();
        let u = uniform_box(&s);
        assert_eq!(u.value(&[2, 1], &[1, 2]), &rat(1, 4));
        let strategy = DeterministicStrategy::new(&s, vec![vec![1, 1], vec![1, 1]]).unwrap();
        let d = deterministic_box(&s, &strategy);
        for x in s.input_space().iter() {
            assert_eq!(d.value(&[1, 1], &x), &rat(1, 1));
        }
    }

    #[test]
    fn random_boxes_are_proper_nonsignalling_and_seed_deterministic() {
        let scenarios = [
            Scenario::new(vec![2, 2], vec![2, 2]).unwrap(),
            Scenario::new(vec![2, 2, 2], vec![2, 2, 2]).unwrap(),
            Scenario::new(vec![3, 2], vec![2, 3]).unwrap(),
        ];
        for scenario in &scenarios {
            for seed in 0..20u64 {
                let ns = random_nonsignalling_box(scenario, seed);
                assert!(ns.as_quasi().validate(true).is_ok());
                assert!(ns.is_nonsignalling());
                assert_eq!(ns, random_nonsignalling_box(scenario, seed));
                let local = random_local_box(scenario, seed);
                assert!(local.as_quasi().validate(true).is_ok());
                assert_eq!(local, random_local_box(scenario, seed));
            }
        }
        let s = &scenarios[0];
        assert_ne!(random_local_box(s, 0), random_local_box(s, 1));
    }

    #[test]
    fn random_quasiboxes_carry_negative_entries() {
        let s = Scenario::new(vec![2, 2], vec![2, 2]).unwrap();
        let mut saw_negative = false;
        for seed in 0..20u64 {
            let q = random_nonsignalling_quasibox(&s, seed);
            assert!(q.validate(false).is_ok());
            assert!(q.is_nonsignalling());
            saw_negative |= q.values().iter().any(|v| v.is_negative());
        }
        assert!(saw_negative, "corpus should exercise negative entries");
    }
}
