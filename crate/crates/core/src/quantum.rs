//! Diagonal quantum representations of classical hidden-variable models.
//!
//! Each party gets a Hilbert space spanned by its hidden labels. The
//! joint state becomes a diagonal Hermitian operator carrying the state
//! weights, and each response column becomes a diagonal measurement
//! operator. Every operator is diagonal in the one shared product basis,
//! so all of them commute by construction, and the trace rule
//! `p(a|x) = tr((M¹_{a₁|x₁} ⊗ ⋯ ⊗ Mᴺ_{a_N|x_N})·ρ)` reduces to an exact
//! rational sum over joint labels. Operators are stored by diagonal only;
//! full matrices are never materialized.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::boxes::QuasiBox;
use crate::classical::{ClassicalModel, HiddenLabel, ModelKind};
use crate::scenario::{Scenario, TupleSpace};

/// A Hermitian operator stored by its real diagonal in a labelled basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalOperator {
    pub basis: Vec<HiddenLabel>,
    pub diag: Vec<BigRational>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantumModelError {
    #[error("model declares {parties} bases but the scenario has {expected} parties")]
    PartyCountMismatch { parties: usize, expected: usize },
    #[error("party {party}: basis has {basis} labels but an operator has {diag} diagonal entries")]
    DiagonalShape {
        party: usize,
        basis: usize,
        diag: usize,
    },
    #[error("state diagonal has {got} entries, expected {expected}")]
    StateShape { expected: usize, got: usize },
    #[error("joint basis is too large to represent")]
    BasisTooLarge,
    #[error("party {party}: expected one operator per outcome/input pair ({expected}), got {got}")]
    OperatorCount {
        party: usize,
        expected: usize,
        got: usize,
    },
}

/// The lifted model: a diagonal joint state plus one diagonal measurement
/// operator per (party, input, outcome).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumModel {
    scenario: Scenario,
    bases: Vec<Vec<HiddenLabel>>,
    state: Vec<BigRational>,
    /// `measurements[party][(x − 1)·A + (a − 1)]` is a diagonal over the
    /// party's basis.
    measurements: Vec<Vec<Vec<BigRational>>>,
    kind: ModelKind,
}

impl QuantumModel {
    pub fn new(
        scenario: Scenario,
        bases: Vec<Vec<HiddenLabel>>,
        state: Vec<BigRational>,
        measurements: Vec<Vec<Vec<BigRational>>>,
        kind: ModelKind,
    ) -> Result<Self, QuantumModelError> {
        let n = scenario.n_parties();
        if bases.len() != n || measurements.len() != n {
            return Err(QuantumModelError::PartyCountMismatch {
                parties: bases.len().max(measurements.len()),
                expected: n,
            });
        }
        let joint = bases
            .iter()
            .try_fold(1u128, |acc, b| acc.checked_mul(b.len() as u128))
            .filter(|&n| n <= usize::MAX as u128)
            .ok_or(QuantumModelError::BasisTooLarge)? as usize;
        if state.len() != joint {
            return Err(QuantumModelError::StateShape {
                expected: joint,
                got: state.len(),
            });
        }
        for party in 0..n {
            let expected =
                scenario.party_outputs(party) as usize * scenario.party_inputs(party) as usize;
            if measurements[party].len() != expected {
                return Err(QuantumModelError::OperatorCount {
                    party: party + 1,
                    expected,
                    got: measurements[party].len(),
                });
            }
            for diag in &measurements[party] {
                if diag.len() != bases[party].len() {
                    return Err(QuantumModelError::DiagonalShape {
                        party: party + 1,
                        basis: bases[party].len(),
                        diag: diag.len(),
                    });
                }
            }
        }
        Ok(Self {
            scenario,
            bases,
            state,
            measurements,
            kind,
        })
    }

    /// Lifts a classical model: bases are the label spaces, the state
    /// diagonal carries the weights, and each measurement diagonal
    /// carries one response column. The kind carries over.
    pub fn lift(model: &ClassicalModel) -> Self {
        let scenario = model.scenario().clone();
        let bases: Vec<Vec<HiddenLabel>> = model.state().spaces().to_vec();
        let state = model.state().weights().to_vec();
        let measurements = (0..scenario.n_parties())
            .map(|party| {
                let table = &model.responses()[party];
                let mut ops = Vec::with_capacity(
                    scenario.party_inputs(party) as usize * scenario.party_outputs(party) as usize,
                );
                for x in 1..=scenario.party_inputs(party) {
                    for a in 1..=scenario.party_outputs(party) {
                        ops.push(
                            (0..table.labels())
                                .map(|l| table.entry(a, x, l).clone())
                                .collect(),
                        );
                    }
                }
                ops
            })
            .collect();
        Self {
            scenario,
            bases,
            state,
            measurements,
            kind: model.kind(),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn bases(&self) -> &[Vec<HiddenLabel>] {
        &self.bases
    }

    /// Joint-state diagonal over label tuples, last party fastest.
    pub fn state_diag(&self) -> &[BigRational] {
        &self.state
    }

    pub fn joint_dimension(&self) -> usize {
        self.bases.iter().map(Vec::len).product()
    }

    pub fn measurement_diag(&self, party: usize, input: u32, outcome: u32) -> &[BigRational] {
        let a_k = self.scenario.party_outputs(party);
        assert!(outcome >= 1 && outcome <= a_k);
        assert!(input >= 1 && input <= self.scenario.party_inputs(party));
        &self.measurements[party][((input - 1) * a_k + (outcome - 1)) as usize]
    }

    pub fn measurement_operator(&self, party: usize, input: u32, outcome: u32) -> DiagonalOperator {
        DiagonalOperator {
            basis: self.bases[party].clone(),
            diag: self.measurement_diag(party, input, outcome).to_vec(),
        }
    }

    pub fn joint_space(&self) -> TupleSpace {
        TupleSpace::new(self.bases.iter().map(|b| b.len() as u32).collect())
    }

    /// Applies the trace rule for every (a, x): since all operators are
    /// diagonal in the shared basis, the trace is the sum over joint
    /// labels of the product of diagonals.
    pub fn evaluate_trace(&self) -> QuasiBox {
        let joint = self.joint_space();
        let nonzero: Vec<(Vec<u32>, &BigRational)> = joint
            .iter()
            .zip(&self.state)
            .filter(|(_, w)| !w.is_zero())
            .collect();
        QuasiBox::from_fn(self.scenario.clone(), |a, x| {
            let mut total = BigRational::zero();
            for (tuple, weight) in &nonzero {
                let mut term = (*weight).clone();
                for party in 0..self.scenario.n_parties() {
                    let diag = self.measurement_diag(party, x[party], a[party]);
                    let entry = &diag[(tuple[party] - 1) as usize];
                    if entry.is_zero() {
                        term = BigRational::zero();
                        break;
                    }
                    term *= entry;
                }
                total += term;
            }
            total
        })
    }

    /// Checks completeness, trace, and both positivity sides, reporting
    /// every violation rather than failing.
    pub fn verify(&self) -> QuantumVerifyReport {
        let mut completeness_failures = Vec::new();
        for party in 0..self.scenario.n_parties() {
            for x in 1..=self.scenario.party_inputs(party) {
                for l in 0..self.bases[party].len() {
                    let total: BigRational = (1..=self.scenario.party_outputs(party))
                        .map(|a| self.measurement_diag(party, x, a)[l].clone())
                        .sum();
                    if !total.is_one() {
                        completeness_failures.push(CompletenessFailure {
                            party,
                            input: x,
                            label_index: l,
                            total,
                        });
                    }
                }
            }
        }

        let trace: BigRational = self.state.iter().sum();

        let state_negative: Vec<(usize, BigRational)> = self
            .state
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_negative())
            .map(|(i, v)| (i, v.clone()))
            .collect();

        let mut measurement_negative = Vec::new();
        for party in 0..self.scenario.n_parties() {
            for x in 1..=self.scenario.party_inputs(party) {
                for a in 1..=self.scenario.party_outputs(party) {
                    for (l, v) in self.measurement_diag(party, x, a).iter().enumerate() {
                        if v.is_negative() {
                            measurement_negative.push(NegativeDiagonalEntry {
                                party,
                                input: x,
                                outcome: a,
                                label_index: l,
                                value: v.clone(),
                            });
                        }
                    }
                }
            }
        }

        QuantumVerifyReport {
            kind: self.kind,
            completeness_failures,
            trace,
            state_negative,
            measurement_negative,
            // Shared product basis: commutation holds structurally.
            shared_diagonal_basis: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessFailure {
    pub party: usize,
    pub input: u32,
    pub label_index: usize,
    pub total: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeDiagonalEntry {
    pub party: usize,
    pub input: u32,
    pub outcome: u32,
    pub label_index: usize,
    pub value: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumVerifyReport {
    pub kind: ModelKind,
    pub completeness_failures: Vec<CompletenessFailure>,
    pub trace: BigRational,
    pub state_negative: Vec<(usize, BigRational)>,
    pub measurement_negative: Vec<NegativeDiagonalEntry>,
    pub shared_diagonal_basis: bool,
}

impl QuantumVerifyReport {
    pub fn completeness_ok(&self) -> bool {
        self.completeness_failures.is_empty()
    }

    pub fn trace_ok(&self) -> bool {
        self.trace.is_one()
    }

    /// The side the kind requires to be positive actually is.
    pub fn kind_constraints_ok(&self) -> bool {
        match self.kind {
            ModelKind::NegativeMeasurements => self.state_negative.is_empty(),
            ModelKind::NegativeState => self.measurement_negative.is_empty(),
        }
    }

    pub fn is_well_formed(&self) -> bool {
        self.completeness_ok() && self.trace_ok() && self.kind_constraints_ok()
    }
}
