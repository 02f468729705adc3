//! Canonical marginal coordinates for non-signalling boxes.
//!
//! A non-signalling quasibox is pinned down by its marginals over every
//! party subset, restricted to outcomes below each party's last value
//! (`a_i ≤ A_i − 1`). That gives `Π_k ((A_k − 1)·X_k + 1)` coordinates,
//! counting the constant empty-subset entry, and the map is a bijection:
//! [`canonical_marginals`] and [`from_marginals`] invert each other
//! exactly.
//!
//! Coordinate order is fixed for files and tests: subsets by bitmask
//! (party k ↔ bit k, empty set first), then restricted outcome tuples,
//! then input tuples, each with the last subset member varying fastest.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::boxes::{QuasiBox, SignallingWitness};
use crate::scenario::{Scenario, TupleSpace};

/// Number of canonical coordinates, `Π_k ((A_k − 1)·X_k + 1)`, including
/// the constant empty-subset entry.
pub fn param_count(scenario: &Scenario) -> u128 {
    scenario
        .outputs()
        .iter()
        .zip(scenario.inputs())
        .map(|(&a, &x)| u128::from(a - 1) * u128::from(x) + 1)
        .product()
}

/// One canonical coordinate: marginal of the sorted party subset
/// `parties` at restricted outcomes `outputs` and inputs `inputs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarginalKey {
    pub parties: Vec<usize>,
    pub outputs: Vec<u32>,
    pub inputs: Vec<u32>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expected {expected} canonical marginal values, got {got}")]
pub struct MarginalShapeError {
    pub expected: usize,
    pub got: usize,
}

/// The full canonical coordinate vector of a non-signalling quasibox.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalTable {
    scenario: Scenario,
    values: Vec<BigRational>,
    /// Flat offset of each subset's block, indexed by subset bitmask.
    offsets: Vec<usize>,
}

impl MarginalTable {
    pub fn from_values(
        scenario: Scenario,
        values: Vec<BigRational>,
    ) -> Result<Self, MarginalShapeError> {
        let offsets = block_offsets(&scenario);
        let expected = *offsets.last().unwrap();
        if values.len() != expected {
            return Err(MarginalShapeError {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            scenario,
            values,
            offsets,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in canonical coordinate order.
    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// The empty-subset entry; equals 1 exactly for a normalized box.
    pub fn constant(&self) -> &BigRational {
        &self.values[0]
    }

    pub fn value(&self, parties: &[usize], outputs: &[u32], inputs: &[u32]) -> &BigRational {
        &self.values[self.rank(parties, outputs, inputs)]
    }

    /// Canonical flat rank of a coordinate. Panics on malformed keys.
    pub fn rank(&self, parties: &[usize], outputs: &[u32], inputs: &[u32]) -> usize {
        assert_eq!(parties.len(), outputs.len(), "subset arity mismatch");
        assert_eq!(parties.len(), inputs.len(), "subset arity mismatch");
        assert!(
            parties.windows(2).all(|w| w[0] < w[1]),
            "subset must be sorted and duplicate-free"
        );
        let mut mask = 0usize;
        for (i, &party) in parties.iter().enumerate() {
            assert!(party < self.scenario.n_parties(), "party out of range");
            assert!(
                outputs[i] < self.scenario.party_outputs(party),
                "outcome {} is not below the last value {}",
                outputs[i],
                self.scenario.party_outputs(party)
            );
            mask |= 1 << party;
        }
        let (a_space, x_space) = subset_spaces(&self.scenario, parties);
        self.offsets[mask] + a_space.rank(outputs) * x_space.len() + x_space.rank(inputs)
    }

    /// Keys in canonical coordinate order.
    pub fn keys(scenario: &Scenario) -> impl Iterator<Item = MarginalKey> + '_ {
        subset_masks(scenario).flat_map(move |mask| {
            let parties = mask_parties(mask);
            let (a_space, x_space) = subset_spaces(scenario, &parties);
            let x_len = x_space.len();
            (0..a_space.len() * x_len).map(move |i| MarginalKey {
                parties: parties.clone(),
                outputs: a_space.tuple(i / x_len),
                inputs: x_space.tuple(i % x_len),
            })
        })
    }
}

fn subset_masks(scenario: &Scenario) -> std::ops::Range<usize> {
    0..(1usize << scenario.n_parties())
}

fn mask_parties(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize)
        .filter(|&k| mask & (1 << k) != 0)
        .collect()
}

/// Restricted outcome space (`1..=A_i − 1` per member) and input space of
/// a subset. Parties with `A_i = 1` admit no restricted outcome, so any
/// subset containing one has an empty block.
fn subset_spaces(scenario: &Scenario, parties: &[usize]) -> (TupleSpace, TupleSpace) {
    let a_space = TupleSpace::new(
        parties
            .iter()
            .map(|&p| scenario.party_outputs(p) - 1)
            .collect(),
    );
    let x_space = TupleSpace::new(parties.iter().map(|&p| scenario.party_inputs(p)).collect());
    (a_space, x_space)
}

fn block_offsets(scenario: &Scenario) -> Vec<usize> {
    let mut offsets = Vec::with_capacity((1 << scenario.n_parties()) + 1);
    let mut total = 0usize;
    for mask in subset_masks(scenario) {
        offsets.push(total);
        let parties = mask_parties(mask);
        let (a_space, x_space) = subset_spaces(scenario, &parties);
        total += a_space.len() * x_space.len();
    }
    offsets.push(total);
    offsets
}

/// Extracts the canonical coordinates of a non-signalling quasibox.
pub fn canonical_marginals(quasi: &QuasiBox) -> Result<MarginalTable, SignallingWitness> {
    if let Some(w) = quasi.signalling_witness() {
        return Err(w);
    }
    let scenario = quasi.scenario().clone();
    let mut values = Vec::new();
    for key in MarginalTable::keys(&scenario) {
        values.push(quasi.marginal_unchecked(&key.parties, &key.outputs, &key.inputs));
    }
    let table = MarginalTable::from_values(scenario, values).expect("key enumeration is complete");
    Ok(table)
}

/// Reconstructs the unique non-signalling quasibox with the given
/// canonical coordinates.
///
/// Entries with some `a_i = A_i` are resolved by the marginal recursion
/// `p̃(a_S|x_S) = p̃(a_{S∖i}|x_{S∖i}) − Σ_{a_i' < A_i} p̃(…a_i'…|x_S)`,
/// peeling one at-maximum index per step.
pub fn from_marginals(table: &MarginalTable) -> QuasiBox {
    let scenario = table.scenario().clone();
    let mut memo: HashMap<(u64, Vec<u32>, Vec<u32>), BigRational> = HashMap::new();
    let all_parties: Vec<usize> = (0..scenario.n_parties()).collect();
    QuasiBox::from_fn(scenario.clone(), |a, x| {
        quasi_marginal(table, &mut memo, &all_parties, a, x)
    })
}

fn quasi_marginal(
    table: &MarginalTable,
    memo: &mut HashMap<(u64, Vec<u32>, Vec<u32>), BigRational>,
    parties: &[usize],
    outputs: &[u32],
    inputs: &[u32],
) -> BigRational {
    let scenario = table.scenario();
    let at_max = parties
        .iter()
        .enumerate()
        .position(|(i, &p)| outputs[i] == scenario.party_outputs(p));
    let at_max = match at_max {
        None => {
            return table.value(parties, outputs, inputs).clone();
        }
        Some(i) => i,
    };

    let mask = parties.iter().fold(0u64, |m, &p| m | (1 << p));
    let key = (mask, outputs.to_vec(), inputs.to_vec());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }

    // Drop the at-max party from the subset...
    let mut reduced_parties = parties.to_vec();
    let party = reduced_parties.remove(at_max);
    let mut reduced_outputs = outputs.to_vec();
    reduced_outputs.remove(at_max);
    let mut reduced_inputs = inputs.to_vec();
    reduced_inputs.remove(at_max);
    let mut value = quasi_marginal(
        table,
        memo,
        &reduced_parties,
        &reduced_outputs,
        &reduced_inputs,
    );

    // ...and subtract the below-maximum siblings.
    let mut sibling = outputs.to_vec();
    for a in 1..scenario.party_outputs(party) {
        sibling[at_max] = a;
        value -= quasi_marginal(table, memo, parties, &sibling, inputs);
    }

    memo.insert(key, value.clone());
    value
}

/// Builds the marginal table of the point mass at the all-last-outcome
/// tuple: the constant entry is 1 and every other coordinate vanishes.
pub fn point_mass_table(scenario: &Scenario) -> MarginalTable {
    let count = param_count(scenario) as usize;
    let mut values = vec![BigRational::from_integer(0.into()); count];
    values[0] = BigRational::one();
    MarginalTable::from_values(scenario.clone(), values).unwrap()
}
