//! Conditional (quasi)probability boxes: validation, the no-signalling
//! check, and subset marginals.
//!
//! A box stores one exact rational `p(a_1…a_N | x_1…x_N)` per pair of
//! outcome and input tuples. A `QuasiBox` may carry negative entries; a
//! `ProperBox` is entrywise non-negative and normalized, i.e. an ordinary
//! conditional probability distribution.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::scenario::{Scenario, TupleSpace};

/// Conditional quasiprobability tensor over a scenario.
///
/// Entries are addressed by 1-based outcome/input tuples; the flat layout
/// groups by input tuple, outcome tuples in canonical order within each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiBox {
    scenario: Scenario,
    values: Vec<BigRational>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expected {expected} entries for the scenario, got {got}")]
pub struct BoxShapeError {
    pub expected: usize,
    pub got: usize,
}

/// Witness that a tensor signals: party `party`'s input change from
/// `inputs_a` to `inputs_b` shifts the summed-out distribution of the
/// remaining outcomes `rest_outputs` from `sum_a` to `sum_b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignallingWitness {
    pub party: usize,
    pub inputs_a: Vec<u32>,
    pub inputs_b: Vec<u32>,
    pub rest_outputs: Vec<u32>,
    pub sum_a: BigRational,
    pub sum_b: BigRational,
}

impl std::fmt::Display for SignallingWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "party {} signals: inputs {:?} vs {:?} give partial sums {} vs {} over the other parties' outcomes {:?}",
            self.party + 1,
            self.inputs_a,
            self.inputs_b,
            self.sum_a,
            self.sum_b,
            self.rest_outputs,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationFailure {
    pub inputs: Vec<u32>,
    pub total: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeEntry {
    pub outputs: Vec<u32>,
    pub inputs: Vec<u32>,
    pub value: BigRational,
}

/// Outcome of [`QuasiBox::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub normalization_failures: Vec<NormalizationFailure>,
    pub negative_entries: Vec<NegativeEntry>,
    pub nonnegativity_checked: bool,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.normalization_failures.is_empty() && self.negative_entries.is_empty()
    }
}

impl QuasiBox {
    /// Wraps a flat value tensor. Only the shape is enforced here;
    /// normalization is checked by [`QuasiBox::validate`].
    pub fn new(scenario: Scenario, values: Vec<BigRational>) -> Result<Self, BoxShapeError> {
        let expected = scenario.input_space().len() * scenario.output_space().len();
        if values.len() != expected {
            return Err(BoxShapeError {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { scenario, values })
    }

    /// Builds a box by evaluating `f(outputs, inputs)` over every index.
    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[u32], &[u32]) -> BigRational) -> Self {
        let out_space = scenario.output_space();
        let in_space = scenario.input_space();
        let mut values = Vec::with_capacity(in_space.len() * out_space.len());
        for x in in_space.iter() {
            for a in out_space.iter() {
                values.push(f(&a, &x));
            }
        }
        Self { scenario, values }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Flat values, grouped by input tuple, outcomes fastest.
    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn value(&self, outputs: &[u32], inputs: &[u32]) -> &BigRational {
        let a = self.scenario.output_space().rank(outputs);
        let x = self.scenario.input_space().rank(inputs);
        self.value_at(a, x)
    }

    pub fn value_at(&self, output_rank: usize, input_rank: usize) -> &BigRational {
        &self.values[input_rank * self.scenario.output_space().len() + output_rank]
    }

    /// Checks the per-input normalization `Σ_a p(a|x) = 1`, and entrywise
    /// non-negativity when `require_nonnegative` is set.
    pub fn validate(&self, require_nonnegative: bool) -> ValidationReport {
        let out_space = self.scenario.output_space();
        let in_space = self.scenario.input_space();
        let mut normalization_failures = Vec::new();
        let mut negative_entries = Vec::new();
        for (x_rank, x) in in_space.iter().enumerate() {
            let mut total = BigRational::zero();
            for a_rank in 0..out_space.len() {
                let v = self.value_at(a_rank, x_rank);
                total += v;
                if require_nonnegative && v.is_negative() {
                    negative_entries.push(NegativeEntry {
                        outputs: out_space.tuple(a_rank),
                        inputs: x.clone(),
                        value: v.clone(),
                    });
                }
            }
            if !total.is_one() {
                normalization_failures.push(NormalizationFailure { inputs: x, total });
            }
        }
        ValidationReport {
            normalization_failures,
            negative_entries,
            nonnegativity_checked: require_nonnegative,
        }
    }

    /// Searches for a no-signalling violation: some party `k` whose input
    /// choice shifts the summed-out statistics of the other parties.
    pub fn signalling_witness(&self) -> Option<SignallingWitness> {
        let n = self.scenario.n_parties();
        for party in 0..n {
            let x_k = self.scenario.party_inputs(party);
            if x_k < 2 {
                continue;
            }
            let rest_outputs: Vec<u32> = (0..n)
                .filter(|&i| i != party)
                .map(|i| self.scenario.party_outputs(i))
                .collect();
            let rest_inputs: Vec<u32> = (0..n)
                .filter(|&i| i != party)
                .map(|i| self.scenario.party_inputs(i))
                .collect();
            let rest_out_space = TupleSpace::new(rest_outputs);
            let rest_in_space = TupleSpace::new(rest_inputs);
            for x_rest in rest_in_space.iter() {
                for a_rest in rest_out_space.iter() {
                    let base = self.partial_sum(party, 1, &a_rest, &x_rest);
                    for variant in 2..=x_k {
                        let sum = self.partial_sum(party, variant, &a_rest, &x_rest);
                        if sum != base {
                            return Some(SignallingWitness {
                                party,
                                inputs_a: splice(&x_rest, party, 1),
                                inputs_b: splice(&x_rest, party, variant),
                                rest_outputs: a_rest.clone(),
                                sum_a: base,
                                sum_b: sum,
                            });
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_nonsignalling(&self) -> bool {
        self.signalling_witness().is_none()
    }

    /// `Σ_{a_party} p(a | x)` with the remaining indices fixed.
    fn partial_sum(
        &self,
        party: usize,
        x_party: u32,
        a_rest: &[u32],
        x_rest: &[u32],
    ) -> BigRational {
        let x = splice(x_rest, party, x_party);
        let mut total = BigRational::zero();
        for a_party in 1..=self.scenario.party_outputs(party) {
            let a = splice(a_rest, party, a_party);
            total += self.value(&a, &x);
        }
        total
    }

    /// Marginal `p(a_S | x_S)` over the sorted 0-based party subset
    /// `parties`. Verifies no-signalling first; the marginal of a
    /// signalling tensor is not well defined.
    pub fn marginal(
        &self,
        parties: &[usize],
        outputs: &[u32],
        inputs: &[u32],
    ) -> Result<BigRational, SignallingWitness> {
        if let Some(w) = self.signalling_witness() {
            return Err(w);
        }
        Ok(self.marginal_unchecked(parties, outputs, inputs))
    }

    /// Marginal without the no-signalling precondition check. Sums the
    /// traced-out parties at input 1; debug builds recompute with every
    /// traced-out input at its maximum and assert agreement.
    pub(crate) fn marginal_unchecked(
        &self,
        parties: &[usize],
        outputs: &[u32],
        inputs: &[u32],
    ) -> BigRational {
        let value = self.marginal_with_completion(parties, outputs, inputs, false);
        debug_assert_eq!(
            value,
            self.marginal_with_completion(parties, outputs, inputs, true),
            "marginal depends on the completion; tensor must be signalling"
        );
        value
    }

    fn marginal_with_completion(
        &self,
        parties: &[usize],
        outputs: &[u32],
        inputs: &[u32],
        complete_high: bool,
    ) -> BigRational {
        let n = self.scenario.n_parties();
        assert_eq!(parties.len(), outputs.len(), "subset arity mismatch");
        assert_eq!(parties.len(), inputs.len(), "subset arity mismatch");
        assert!(
            parties.windows(2).all(|w| w[0] < w[1]),
            "subset must be sorted and duplicate-free"
        );
        assert!(parties.iter().all(|&p| p < n), "party index out of range");

        let mut x = vec![0u32; n];
        for (i, &party) in parties.iter().enumerate() {
            x[party] = inputs[i];
        }
        for (party, slot) in x.iter_mut().enumerate() {
            if *slot == 0 {
                *slot = if complete_high {
                    self.scenario.party_inputs(party)
                } else {
                    1
                };
            }
        }

        let traced: Vec<usize> = (0..n).filter(|p| !parties.contains(p)).collect();
        let traced_space = TupleSpace::new(
            traced
                .iter()
                .map(|&p| self.scenario.party_outputs(p))
                .collect(),
        );
        let mut total = BigRational::zero();
        let mut a = vec![0u32; n];
        for (i, &party) in parties.iter().enumerate() {
            a[party] = outputs[i];
        }
        for traced_a in traced_space.iter() {
            for (&party, &value) in traced.iter().zip(&traced_a) {
                a[party] = value;
            }
            total += self.value(&a, &x);
        }
        total
    }
}

/// Inserts `value` for `party` into an (N-1)-component tuple.
fn splice(rest: &[u32], party: usize, value: u32) -> Vec<u32> {
    let mut full = Vec::with_capacity(rest.len() + 1);
    full.extend_from_slice(&rest[..party]);
    full.push(value);
    full.extend_from_slice(&rest[party..]);
    full
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoxValidationError {
    #[error("normalization fails at inputs {inputs:?}: entries sum to {total}")]
    NotNormalized { inputs: Vec<u32>, total: String },
    #[error("negative entry {value} at outputs {outputs:?}, inputs {inputs:?}")]
    NegativeEntry {
        outputs: Vec<u32>,
        inputs: Vec<u32>,
        value: String,
    },
}

/// A normalized, entrywise non-negative box: an ordinary conditional
/// probability distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperBox(QuasiBox);

impl ProperBox {
    pub fn new(quasi: QuasiBox) -> Result<Self, BoxValidationError> {
        let report = quasi.validate(true);
        if let Some(f) = report.normalization_failures.first() {
            return Err(BoxValidationError::NotNormalized {
                inputs: f.inputs.clone(),
                total: f.total.to_string(),
            });
        }
        if let Some(e) = report.negative_entries.first() {
            return Err(BoxValidationError::NegativeEntry {
                outputs: e.outputs.clone(),
                inputs: e.inputs.clone(),
                value: e.value.to_string(),
            });
        }
        Ok(Self(quasi))
    }

    pub fn as_quasi(&self) -> &QuasiBox {
        &self.0
    }

    pub fn into_quasi(self) -> QuasiBox {
        self.0
    }

    pub fn scenario(&self) -> &Scenario {
        self.0.scenario()
    }

    pub fn value(&self, outputs: &[u32], inputs: &[u32]) -> &BigRational {
        self.0.value(outputs, inputs)
    }

    pub fn signalling_witness(&self) -> Option<SignallingWitness> {
        self.0.signalling_witness()
    }

    pub fn is_nonsignalling(&self) -> bool {
        self.0.is_nonsignalling()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn pr_box_validates_and_is_nonnegative() {
        let pr = gallery::pr_box();
        let report = pr.as_quasi().validate(true);
        assert!(report.is_ok());
    }

    #[test]
    fn point_mass_box_validates() {
        let s = Scenario::new(vec![2, 2], vec![2, 2]).unwrap();
        let b = QuasiBox::from_fn(s, |a, _| {
            if a == [1, 1] {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        });
        assert!(b.validate(true).is_ok());
    }

    #[test]
    fn broken_column_is_reported_at_its_inputs() {
        let pr = gallery::pr_box().into_quasi();
        let s = pr.scenario().clone();
        let mut values = pr.values().to_vec();
        // Overwrite p(1,1|1,1) = 1/2 with 0.6: the x=(1,1) column sums to 1.1.
        values[0] = rat(3, 5);
        let broken = QuasiBox::new(s, values).unwrap();
        let report = broken.validate(false);
        assert_eq!(report.normalization_failures.len(), 1);
        let failure = &report.normalization_failures[0];
        assert_eq!(failure.inputs, vec![1, 1]);
        assert_eq!(failure.total, rat(11, 10));
    }

    #[test]
    fn pr_box_is_nonsignalling_against_direct_sums() {
        let pr = gallery::pr_box();
        assert!(pr.is_nonsignalling());
        // Independent check of all partial-sum pairs, written out directly.
        let q = pr.as_quasi();
        for a2 in 1..=2u32 {
            for x2 in 1..=2u32 {
                let s1: BigRational = (1..=2).map(|a1| q.value(&[a1, a2], &[1, x2]).clone()).sum();
                let s2: BigRational = (1..=2).map(|a1| q.value(&[a1, a2], &[2, x2]).clone()).sum();
                assert_eq!(s1, s2);
            }
        }
        for a1 in 1..=2u32 {
            for x1 in 1..=2u32 {
                let s1: BigRational = (1..=2).map(|a2| q.value(&[a1, a2], &[x1, 1]).clone()).sum();
                let s2: BigRational = (1..=2).map(|a2| q.value(&[a1, a2], &[x1, 2]).clone()).sum();
                assert_eq!(s1, s2);
            }
        }
    }

    #[test]
    fn witness_names_the_party_whose_input_leaks() {
        // Party 1 copies party 2's input; party 2 outputs uniformly. The
        // summed-out statistics change when party 2 varies its input, so
        // the witness points at party 2 (index 1).
        let s = Scenario::new(vec![2, 2], vec![2, 2]).unwrap();
        let b = QuasiBox::from_fn(s, |a, x| {
            if a[0] == x[1] {
                rat(1, 2)
            } else {
                BigRational::zero()
            }
        });
        assert!(b.validate(true).is_ok());
        let w = b.signalling_witness().expect("must signal");
        assert_eq!(w.party, 1);
        assert_ne!(w.inputs_a[1], w.inputs_b[1]);
        assert_eq!(&w.inputs_a[..1], &w.inputs_b[..1]);
        assert_ne!(w.sum_a, w.sum_b);
    }

    #[test]
    fn single_party_boxes_never_signal() {
        let s = Scenario::new(vec![3], vec![4]).unwrap();
        let b = QuasiBox::from_fn(s, |a, x| {
            // Arbitrary input-dependent distribution.
            if a[0] == 1 {
                rat(i64::from(x[0]), 4)
            } else if a[0] == 2 {
                rat(4 - i64::from(x[0]), 4)
            } else {
                BigRational::zero()
            }
        });
        assert!(b.is_nonsignalling());
    }

    #[test]
    fn pr_marginals_are_uniform() {
        let pr = gallery::pr_box();
        let q = pr.as_quasi();
        for party in [0usize, 1] {
            for x in 1..=2u32 {
                assert_eq!(q.marginal(&[party], &[1], &[x]).unwrap(), rat(1, 2));
            }
        }
    }

    #[test]
    fn full_subset_marginal_is_the_entry_and_empty_subset_is_one() {
        let pr = gallery::pr_box();
        let q = pr.as_quasi();
        assert_eq!(
            q.marginal(&[0, 1], &[1, 2], &[2, 2]).unwrap(),
            q.value(&[1, 2], &[2, 2]).clone()
        );
        assert_eq!(q.marginal(&[], &[], &[]).unwrap(), BigRational::one());
    }

    #[test]
    fn marginals_are_completion_independent() {
        // Sum the traced-out party at every one of its inputs by hand and
        // compare against the library value.
        let s = Scenario::new(vec![2, 2], vec![2, 3]).unwrap();
        for seed in 0..10u64 {
            let q = crate::gallery::random_nonsignalling_quasibox(&s, seed);
            for a1 in 1..=2u32 {
                for x1 in 1..=2u32 {
                    let reference = q.marginal(&[0], &[a1], &[x1]).unwrap();
                    for x2 in 1..=3u32 {
                        let by_hand: BigRational = (1..=2)
                            .map(|a2| q.value(&[a1, a2], &[x1, x2]).clone())
                            .sum();
                        assert_eq!(by_hand, reference, "seed {seed} completion x2={x2}");
                    }
                }
            }
        }
    }

    #[test]
    fn marginal_of_signalling_tensor_is_rejected() {
        let s = Scenario::new(vec![2, 2], vec![2, 2]).unwrap();
        let b = QuasiBox::from_fn(s, |a, x| {
            if a[0] == x[1] {
                rat(1, 2)
            } else {
                BigRational::zero()
            }
        });
        let err = b.marginal(&[0], &[1], &[1]).unwrap_err();
        assert_eq!(err.party, 1);
    }

    #[test]
    fn proper_box_rejects_negative_and_unnormalized_tensors() {
        let s = Scenario::new(vec![2], vec![1]).unwrap();
        let negative = QuasiBox::new(s.clone(), vec![rat(3, 2), rat(-1, 2)]).unwrap();
        assert!(matches!(
            ProperBox::new(negative),
            Err(BoxValidationError::NegativeEntry { .. })
        ));
        let unnormalized = QuasiBox::new(s, vec![rat(1, 2), rat(1, 4)]).unwrap();
        assert!(matches!(
            ProperBox::new(unnormalized),
            Err(BoxValidationError::NotNormalized { .. })
        ));
    }
}
