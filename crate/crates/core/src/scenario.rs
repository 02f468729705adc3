//! Measurement scenarios and canonical tuple enumeration.
//!
//! A scenario fixes the shape of every tensor in the toolkit: party `k`
//! (0-based in the API, 1-based in all files and printouts) chooses an
//! input `x_k ∈ 1..=X_k` and records an outcome `a_k ∈ 1..=A_k`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("a scenario needs at least one party")]
    NoParties,
    #[error("outputs list {outputs} parties but inputs list {inputs}")]
    LengthMismatch { outputs: usize, inputs: usize },
    #[error("party {party}: outcome and input counts must both be at least 1")]
    EmptyRange { party: usize },
}

/// An N-party scenario with per-party outcome counts `A_k` and input
/// counts `X_k`. Degenerate parties (`A_k = 1` or `X_k = 1`) are legal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario {
    outputs: Vec<u32>,
    inputs: Vec<u32>,
}

impl Scenario {
    pub fn new(outputs: Vec<u32>, inputs: Vec<u32>) -> Result<Self, ScenarioError> {
        if outputs.len() != inputs.len() {
            return Err(ScenarioError::LengthMismatch {
                outputs: outputs.len(),
                inputs: inputs.len(),
            });
        }
        if outputs.is_empty() {
            return Err(ScenarioError::NoParties);
        }
        for (party, (&a, &x)) in outputs.iter().zip(&inputs).enumerate() {
            if a == 0 || x == 0 {
                return Err(ScenarioError::EmptyRange { party: party + 1 });
            }
        }
        Ok(Self { outputs, inputs })
    }

    pub fn n_parties(&self) -> usize {
        self.outputs.len()
    }

    /// Outcome counts `A_k`, one per party.
    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    /// Input counts `X_k`, one per party.
    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn party_outputs(&self, party: usize) -> u32 {
        self.outputs[party]
    }

    pub fn party_inputs(&self, party: usize) -> u32 {
        self.inputs[party]
    }

    /// All outcome tuples, in canonical order.
    pub fn output_space(&self) -> TupleSpace {
        TupleSpace::new(self.outputs.clone())
    }

    /// All input tuples, in canonical order.
    pub fn input_space(&self) -> TupleSpace {
        TupleSpace::new(self.inputs.clone())
    }
}

/// Enumerates tuples `(t_1, …, t_N)` with `t_k ∈ 1..=radix_k`.
///
/// Canonical order is lexicographic with the last component varying
/// fastest; every file format and test in the toolkit relies on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSpace {
    radices: Vec<u32>,
}

impl TupleSpace {
    pub fn new(radices: Vec<u32>) -> Self {
        Self { radices }
    }

    pub fn radices(&self) -> &[u32] {
        &self.radices
    }

    pub fn len(&self) -> usize {
        self.radices.iter().fold(1usize, |acc, &r| {
            acc.checked_mul(r as usize).expect("tuple space too large")
        })
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Canonical rank of a (1-based) tuple. Panics on shape or range errors.
    pub fn rank(&self, tuple: &[u32]) -> usize {
        assert_eq!(tuple.len(), self.radices.len(), "tuple arity mismatch");
        let mut rank = 0usize;
        for (&t, &r) in tuple.iter().zip(&self.radices) {
            assert!(t >= 1 && t <= r, "component {t} outside 1..={r}");
            rank = rank * r as usize + (t - 1) as usize;
        }
        rank
    }

    /// The (1-based) tuple at a canonical rank. Panics if out of range.
    pub fn tuple(&self, rank: usize) -> Vec<u32> {
        assert!(rank < self.len(), "rank {rank} out of range");
        let mut rest = rank;
        let mut out = vec![0u32; self.radices.len()];
        for (slot, &r) in out.iter_mut().zip(&self.radices).rev() {
            *slot = (rest % r as usize) as u32 + 1;
            rest /= r as usize;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.len()).map(|rank| self.tuple(rank))
    }
}
