//! Quasi-classical hidden-variable models for non-signalling boxes.
//!
//! Two dual constructions reproduce any non-signalling box exactly:
//!
//! * **negative measurements** — a genuine probability distribution over
//!   per-party labels `[a, x]`, with local response functions that may go
//!   negative;
//! * **negative state** — a quasiprobability distribution (negative
//!   weights allowed) over labels `[a, x]` plus one extra label `ξ` per
//!   party, with deterministic 0/1 local responses.
//!
//! Either model evaluates back to the source box through
//! `p(a|x) = Σ_λ Π_k resp_k(a_k|x_k, λ_k) · w(λ)`, in exact rational
//! arithmetic. A separate compression pass merges every label that always
//! answers with the last outcome into a single `η`, shrinking party `k`'s
//! label space to `(A_k − 1)·X_k + 1`.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::boxes::{ProperBox, QuasiBox, SignallingWitness};
use crate::rational::{negative_mass, to_f64};
use crate::scenario::{Scenario, TupleSpace};

/// A hidden-variable label for one party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HiddenLabel {
    /// The ordered pair `[a, x]` of an outcome and an input.
    Pair { outcome: u32, input: u32 },
    /// The extra label of the negative-state construction.
    Xi,
    /// The merged always-last-outcome label produced by compression.
    Eta,
}

impl std::fmt::Display for HiddenLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HiddenLabel::Pair { outcome, input } => write!(f, "[{outcome},{input}]"),
            HiddenLabel::Xi => write!(f, "xi"),
            HiddenLabel::Eta => write!(f, "eta"),
        }
    }
}

impl HiddenLabel {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "xi" => Some(HiddenLabel::Xi),
            "eta" => Some(HiddenLabel::Eta),
            _ => {
                let inner = text.strip_prefix('[')?.strip_suffix(']')?;
                let (a, x) = inner.split_once(',')?;
                Some(HiddenLabel::Pair {
                    outcome: a.trim().parse().ok()?,
                    input: x.trim().parse().ok()?,
                })
            }
        }
    }
}

/// Which side of the model carries the negativity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Proper state, quasi responses.
    NegativeMeasurements,
    /// Quasi state, deterministic responses.
    NegativeState,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::NegativeMeasurements => write!(f, "neg-meas"),
            ModelKind::NegativeState => write!(f, "neg-state"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("party {party}: label space is empty")]
    EmptyLabelSpace { party: usize },
    #[error("party {party}: duplicate label {label}")]
    DuplicateLabel { party: usize, label: String },
    #[error("state weight table has {got} entries, expected {expected}")]
    StateShape { expected: usize, got: usize },
    #[error("label tuple space is too large to represent")]
    LabelSpaceTooLarge,
    #[error("state weights sum to {total}, expected 1")]
    StateNotNormalized { total: String },
    #[error("response table for party {party} has {got} entries, expected {expected}")]
    ResponseShape {
        party: usize,
        expected: usize,
        got: usize,
    },
    #[error(
        "party {party}: responses at input {input}, label index {label} sum to {total}, expected 1"
    )]
    ResponseNotNormalized {
        party: usize,
        input: u32,
        label: usize,
        total: String,
    },
    #[error("negative-measurements model requires a non-negative state; weight {value} found")]
    NegativeStateWeight { value: String },
    #[error("negative-state model requires 0/1 responses; entry {value} found")]
    NonDeterministicResponse { value: String },
    #[error("model declares {parties} parties but the scenario has {expected}")]
    PartyCountMismatch { parties: usize, expected: usize },
}

/// A joint quasiprobability distribution over per-party label tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiState {
    spaces: Vec<Vec<HiddenLabel>>,
    weights: Vec<BigRational>,
}

impl QuasiState {
    pub fn new(
        spaces: Vec<Vec<HiddenLabel>>,
        weights: Vec<BigRational>,
    ) -> Result<Self, ModelError> {
        for (party, space) in spaces.iter().enumerate() {
            if space.is_empty() {
                return Err(ModelError::EmptyLabelSpace { party: party + 1 });
            }
            for (i, label) in space.iter().enumerate() {
                if space[..i].contains(label) {
                    return Err(ModelError::DuplicateLabel {
                        party: party + 1,
                        label: label.to_string(),
                    });
                }
            }
        }
        let expected = spaces
            .iter()
            .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128))
            .filter(|&n| n <= usize::MAX as u128)
            .ok_or(ModelError::LabelSpaceTooLarge)? as usize;
        if weights.len() != expected {
            return Err(ModelError::StateShape {
                expected,
                got: weights.len(),
            });
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(ModelError::StateNotNormalized {
                total: total.to_string(),
            });
        }
        Ok(Self { spaces, weights })
    }

    pub fn spaces(&self) -> &[Vec<HiddenLabel>] {
        &self.spaces
    }

    /// Flat weights over label tuples, last party fastest.
    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn tuple_space(&self) -> TupleSpace {
        TupleSpace::new(self.spaces.iter().map(|s| s.len() as u32).collect())
    }
}

/// Local response quasiprobabilities `resp(a | x, λ)` for one party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseTable {
    outputs: u32,
    inputs: u32,
    labels: usize,
    /// Index layout: `((a − 1)·X + (x − 1))·L + label_index`.
    entries: Vec<BigRational>,
}

impl ResponseTable {
    pub fn new(
        party: usize,
        outputs: u32,
        inputs: u32,
        labels: usize,
        entries: Vec<BigRational>,
    ) -> Result<Self, ModelError> {
        let expected = outputs as usize * inputs as usize * labels;
        if entries.len() != expected {
            return Err(ModelError::ResponseShape {
                party: party + 1,
                expected,
                got: entries.len(),
            });
        }
        let table = Self {
            outputs,
            inputs,
            labels,
            entries,
        };
        for x in 1..=inputs {
            for label in 0..labels {
                let total: BigRational = (1..=outputs)
                    .map(|a| table.entry(a, x, label).clone())
                    .sum();
                if !total.is_one() {
                    return Err(ModelError::ResponseNotNormalized {
                        party: party + 1,
                        input: x,
                        label,
                        total: total.to_string(),
                    });
                }
            }
        }
        Ok(table)
    }

    pub fn from_fn(
        party: usize,
        outputs: u32,
        inputs: u32,
        labels: usize,
        mut f: impl FnMut(u32, u32, usize) -> BigRational,
    ) -> Result<Self, ModelError> {
        let mut entries = Vec::with_capacity(outputs as usize * inputs as usize * labels);
        for a in 1..=outputs {
            for x in 1..=inputs {
                for label in 0..labels {
                    entries.push(f(a, x, label));
                }
            }
        }
        Self::new(party, outputs, inputs, labels, entries)
    }

    pub fn entry(&self, outcome: u32, input: u32, label: usize) -> &BigRational {
        assert!(outcome >= 1 && outcome <= self.outputs);
        assert!(input >= 1 && input <= self.inputs);
        assert!(label < self.labels);
        let idx = ((outcome - 1) as usize * self.inputs as usize + (input - 1) as usize)
            * self.labels
            + label;
        &self.entries[idx]
    }

    pub fn outputs(&self) -> u32 {
        self.outputs
    }

    pub fn inputs(&self) -> u32 {
        self.inputs
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    /// True when every entry is 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero() || e.is_one())
    }

    /// True when the column of `label` is the point mass on the last
    /// outcome for every input.
    fn always_last_outcome(&self, label: usize) -> bool {
        for x in 1..=self.inputs {
            for a in 1..=self.outputs {
                let expected = if a == self.outputs {
                    BigRational::one()
                } else {
                    BigRational::zero()
                };
                if self.entry(a, x, label) != &expected {
                    return false;
                }
            }
        }
        true
    }
}

/// A hidden-variable model: a (quasi)state over label tuples plus one
/// response table per party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalModel {
    scenario: Scenario,
    state: QuasiState,
    responses: Vec<ResponseTable>,
    kind: ModelKind,
    compressed: bool,
}

impl ClassicalModel {
    /// Validates shapes, normalization, and the kind's positivity side:
    /// a negative-measurements model must have a non-negative state, a
    /// negative-state model must have 0/1 responses.
    pub fn new(
        scenario: Scenario,
        state: QuasiState,
        responses: Vec<ResponseTable>,
        kind: ModelKind,
        compressed: bool,
    ) -> Result<Self, ModelError> {
        if state.spaces().len() != scenario.n_parties() || responses.len() != scenario.n_parties() {
            return Err(ModelError::PartyCountMismatch {
                parties: state.spaces().len().max(responses.len()),
                expected: scenario.n_parties(),
            });
        }
        for (party, table) in responses.iter().enumerate() {
            let expected = scenario.party_outputs(party) as usize
                * scenario.party_inputs(party) as usize
                * state.spaces()[party].len();
            if table.outputs() != scenario.party_outputs(party)
                || table.inputs() != scenario.party_inputs(party)
                || table.labels() != state.spaces()[party].len()
            {
                return Err(ModelError::ResponseShape {
                    party: party + 1,
                    expected,
                    got: table.outputs() as usize * table.inputs() as usize * table.labels(),
                });
            }
        }
        match kind {
            ModelKind::NegativeMeasurements => {
                if let Some(w) = state.weights().iter().find(|w| w.is_negative()) {
                    return Err(ModelError::NegativeStateWeight {
                        value: w.to_string(),
                    });
                }
            }
            ModelKind::NegativeState => {
                for table in &responses {
                    if !table.is_deterministic() {
                        let bad = table
                            .entries
                            .iter()
                            .find(|e| !e.is_zero() && !e.is_one())
                            .unwrap();
                        return Err(ModelError::NonDeterministicResponse {
                            value: bad.to_string(),
                        });
                    }
                }
            }
        }
        Ok(Self {
            scenario,
            state,
            responses,
            kind,
            compressed,
        })
    }

    /// Negative-measurements construction: label space `[a, x]` per
    /// party, state weight `b(a'|x') / (X_1⋯X_N)` at the pair tuple, and
    /// responses `X_k·δ_{λ,[a,x]}` below the last outcome with the
    /// complement `1 − Σ_{a<A_k} X_k·δ_{λ,[a,x]}` at the last outcome.
    pub fn negative_measurements(b: &ProperBox) -> Result<Self, SignallingWitness> {
        if let Some(w) = b.signalling_witness() {
            return Err(w);
        }
        let scenario = b.scenario().clone();
        let spaces: Vec<Vec<HiddenLabel>> = (0..scenario.n_parties())
            .map(|k| pair_labels(&scenario, k).collect())
            .collect();

        let input_product: BigRational = BigRational::from_integer(
            scenario
                .inputs()
                .iter()
                .fold(num_bigint::BigInt::one(), |acc, &x| acc * x),
        );
        let tuple_space = TupleSpace::new(spaces.iter().map(|s| s.len() as u32).collect());
        let mut weights = Vec::with_capacity(tuple_space.len());
        for tuple in tuple_space.iter() {
            let mut a = Vec::with_capacity(spaces.len());
            let mut x = Vec::with_capacity(spaces.len());
            for (party, &idx) in tuple.iter().enumerate() {
                match spaces[party][(idx - 1) as usize] {
                    HiddenLabel::Pair { outcome, input } => {
                        a.push(outcome);
                        x.push(input);
                    }
                    _ => unreachable!("pair labels only"),
                }
            }
            weights.push(b.value(&a, &x) / &input_product);
        }
        let state = QuasiState::new(spaces.clone(), weights).expect("construction is normalized");

        let responses = (0..scenario.n_parties())
            .map(|k| {
                let x_k = BigRational::from_integer(scenario.party_inputs(k).into());
                let a_last = scenario.party_outputs(k);
                ResponseTable::from_fn(
                    k,
                    scenario.party_outputs(k),
                    scenario.party_inputs(k),
                    spaces[k].len(),
                    |a, x, label| {
                        let HiddenLabel::Pair { outcome, input } = spaces[k][label] else {
                            unreachable!("pair labels only")
                        };
                        if a < a_last {
                            if outcome == a && input == x {
                                x_k.clone()
                            } else {
                                BigRational::zero()
                            }
                        } else if input == x && outcome < a_last {
                            BigRational::one() - &x_k
                        } else {
                            BigRational::one()
                        }
                    },
                )
                .expect("construction is normalized")
            })
            .collect();

        Ok(Self {
            scenario,
            state,
            responses,
            kind: ModelKind::NegativeMeasurements,
            compressed: false,
        })
    }

    /// Negative-state construction: label space `[a, x] ∪ {ξ}` per party,
    /// weight `[Π_{i∉S}(1 − X_i)]·b(a_S|x_S)` where `S` collects the
    /// parties with a pair label, and deterministic responses that answer
    /// the stored outcome on the stored input and the last outcome
    /// otherwise.
    pub fn negative_state(b: &ProperBox) -> Result<Self, SignallingWitness> {
        if let Some(w) = b.signalling_witness() {
            return Err(w);
        }
        let scenario = b.scenario().clone();
        let spaces: Vec<Vec<HiddenLabel>> = (0..scenario.n_parties())
            .map(|k| pair_labels(&scenario, k).chain([HiddenLabel::Xi]).collect())
            .collect();

        let tuple_space = TupleSpace::new(spaces.iter().map(|s| s.len() as u32).collect());
        let mut weights = Vec::with_capacity(tuple_space.len());
        for tuple in tuple_space.iter() {
            let mut parties = Vec::new();
            let mut a_s = Vec::new();
            let mut x_s = Vec::new();
            let mut factor = BigRational::one();
            for (party, &idx) in tuple.iter().enumerate() {
                match spaces[party][(idx - 1) as usize] {
                    HiddenLabel::Pair { outcome, input } => {
                        parties.push(party);
                        a_s.push(outcome);
                        x_s.push(input);
                    }
                    HiddenLabel::Xi => {
                        factor *= BigRational::one()
                            - BigRational::from_integer(scenario.party_inputs(party).into());
                    }
                    HiddenLabel::Eta => unreachable!("pair and xi labels only"),
                }
            }
            weights.push(factor * b.as_quasi().marginal_unchecked(&parties, &a_s, &x_s));
        }
        let state = QuasiState::new(spaces.clone(), weights).expect("construction is normalized");

        let responses = (0..scenario.n_parties())
            .map(|k| {
                let a_last = scenario.party_outputs(k);
                ResponseTable::from_fn(
                    k,
                    scenario.party_outputs(k),
                    scenario.party_inputs(k),
                    spaces[k].len(),
                    |a, x, label| {
                        let selected = match spaces[k][label] {
                            HiddenLabel::Pair { outcome, input }
                                if input == x && outcome < a_last =>
                            {
                                outcome
                            }
                            _ => a_last,
                        };
                        if a == selected {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    },
                )
                .expect("construction is normalized")
            })
            .collect();

        Ok(Self {
            scenario,
            state,
            responses,
            kind: ModelKind::NegativeState,
            compressed: false,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn state(&self) -> &QuasiState {
        &self.state
    }

    pub fn responses(&self) -> &[ResponseTable] {
        &self.responses
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn is_compressed(&self) -> bool {
        self.compressed
    }

    /// Evaluates the model back to a quasibox:
    /// `p(a|x) = Σ_λ Π_k resp_k(a_k|x_k, λ_k) · w(λ)`.
    pub fn evaluate(&self) -> QuasiBox {
        let tuple_space = self.state.tuple_space();
        let nonzero: Vec<(Vec<u32>, &BigRational)> = tuple_space
            .iter()
            .zip(self.state.weights())
            .filter(|(_, w)| !w.is_zero())
            .collect();
        let out = QuasiBox::from_fn(self.scenario.clone(), |a, x| {
            let mut total = BigRational::zero();
            for (tuple, weight) in &nonzero {
                let mut term = (*weight).clone();
                for (party, &label_idx) in tuple.iter().enumerate() {
                    let entry =
                        self.responses[party].entry(a[party], x[party], (label_idx - 1) as usize);
                    if entry.is_zero() {
                        term = BigRational::zero();
                        break;
                    }
                    term *= entry;
                }
                total += term;
            }
            total
        });
        debug_assert!(out.validate(false).is_ok(), "evaluation lost normalization");
        debug_assert!(out.is_nonsignalling(), "evaluation produced signalling");
        out
    }

    /// Merges, per party, every label that always answers with the last
    /// outcome into a single `η` label, summing their state weights.
    /// Detection is semantic (the response column is inspected), so
    /// hand-built models compress too. Already-compressed models are
    /// returned unchanged.
    pub fn compress(&self) -> ClassicalModel {
        if self.compressed {
            return self.clone();
        }
        let n = self.scenario.n_parties();
        // Per party: map old label index -> new label index.
        let mut new_spaces: Vec<Vec<HiddenLabel>> = Vec::with_capacity(n);
        let mut relabel: Vec<Vec<usize>> = Vec::with_capacity(n);
        for party in 0..n {
            let space = &self.state.spaces()[party];
            let table = &self.responses[party];
            let mergeable: Vec<bool> = (0..space.len())
                .map(|l| table.always_last_outcome(l))
                .collect();
            // A hand-built η that is not an always-last column would collide
            // with the merged label; leave such a party untouched.
            let eta_conflict = space
                .iter()
                .zip(&mergeable)
                .any(|(label, &m)| *label == HiddenLabel::Eta && !m);
            if eta_conflict || !mergeable.iter().any(|&m| m) {
                new_spaces.push(space.clone());
                relabel.push((0..space.len()).collect());
                continue;
            }
            let mut kept: Vec<HiddenLabel> = Vec::new();
            let mut map = vec![0usize; space.len()];
            for (l, label) in space.iter().enumerate() {
                if !mergeable[l] {
                    map[l] = kept.len();
                    kept.push(*label);
                }
            }
            let eta_index = kept.len();
            kept.push(HiddenLabel::Eta);
            for (l, &m) in mergeable.iter().enumerate() {
                if m {
                    map[l] = eta_index;
                }
            }
            new_spaces.push(kept);
            relabel.push(map);
        }

        let new_tuple_space = TupleSpace::new(new_spaces.iter().map(|s| s.len() as u32).collect());
        let mut new_weights = vec![BigRational::zero(); new_tuple_space.len()];
        let old_tuple_space = self.state.tuple_space();
        for (tuple, weight) in old_tuple_space.iter().zip(self.state.weights()) {
            if weight.is_zero() {
                continue;
            }
            let new_tuple: Vec<u32> = tuple
                .iter()
                .enumerate()
                .map(|(party, &idx)| relabel[party][(idx - 1) as usize] as u32 + 1)
                .collect();
            new_weights[new_tuple_space.rank(&new_tuple)] += weight;
        }

        let new_responses: Vec<ResponseTable> = (0..n)
            .map(|party| {
                let old = &self.responses[party];
                let space = &new_spaces[party];
                // Representative old label per new index.
                let representative: Vec<usize> = (0..space.len())
                    .map(|new_idx| {
                        relabel[party]
                            .iter()
                            .position(|&m| m == new_idx)
                            .expect("every new label has a preimage")
                    })
                    .collect();
                ResponseTable::from_fn(
                    party,
                    old.outputs(),
                    old.inputs(),
                    space.len(),
                    |a, x, label| old.entry(a, x, representative[label]).clone(),
                )
                .expect("columns are copies of normalized columns")
            })
            .collect();

        let state = QuasiState::new(new_spaces, new_weights).expect("merging preserves the total");
        ClassicalModel {
            scenario: self.scenario.clone(),
            state,
            responses: new_responses,
            kind: self.kind,
            compressed: true,
        }
    }

    /// Total negative mass of the state, and the worst per-column
    /// negative response mass `max_{k,x,λ} Σ_a max(0, −resp)`.
    pub fn negativity(&self) -> NegativityReport {
        let state_negativity = negative_mass(self.state.weights());
        let mut response_negativity = BigRational::zero();
        for table in &self.responses {
            for x in 1..=table.inputs() {
                for label in 0..table.labels() {
                    let mut column = BigRational::zero();
                    for a in 1..=table.outputs() {
                        let e = table.entry(a, x, label);
                        if e.is_negative() {
                            column -= e;
                        }
                    }
                    if column > response_negativity {
                        response_negativity = column;
                    }
                }
            }
        }
        NegativityReport {
            state_negativity,
            response_negativity,
        }
    }

    /// Monte Carlo cross-check of [`ClassicalModel::evaluate`] at one
    /// input tuple. Label tuples are drawn from `|w| / ‖w‖₁`; each draw
    /// adds `sign(w(λ))·‖w‖₁·Π_k resp_k(a_k|x_k, λ_k)` to every outcome's
    /// accumulator, an unbiased estimator of the exact entry.
    pub fn sample_signed(
        &self,
        inputs: &[u32],
        shots: u64,
        seed: u64,
    ) -> Result<SampleReport, SampleError> {
        if shots == 0 {
            return Err(SampleError::NoShots);
        }
        if inputs.len() != self.scenario.n_parties() {
            return Err(SampleError::BadInput {
                inputs: inputs.to_vec(),
            });
        }
        for (party, &x) in inputs.iter().enumerate() {
            if x == 0 || x > self.scenario.party_inputs(party) {
                return Err(SampleError::BadInput {
                    inputs: inputs.to_vec(),
                });
            }
        }

        let weights = self.state.weights();
        let l1: f64 = weights.iter().map(|w| to_f64(w).abs()).sum();
        let signs: Vec<f64> = weights
            .iter()
            .map(|w| {
                if w.is_negative() {
                    -1.0
                } else if w.is_zero() {
                    0.0
                } else {
                    1.0
                }
            })
            .collect();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0f64;
        for w in weights {
            acc += to_f64(w).abs() / l1;
            cumulative.push(acc);
        }

        let tuple_space = self.state.tuple_space();
        let out_space = self.scenario.output_space();
        let n_out = out_space.len();
        // resp_f64[party][(a_rank_component, label)] for the fixed inputs.
        let resp: Vec<Vec<f64>> = (0..self.scenario.n_parties())
            .map(|party| {
                let table = &self.responses[party];
                let mut flat = Vec::with_capacity(table.outputs() as usize * table.labels());
                for a in 1..=table.outputs() {
                    for label in 0..table.labels() {
                        flat.push(to_f64(table.entry(a, inputs[party], label)));
                    }
                }
                flat
            })
            .collect();

        let mut sums = vec![0.0f64; n_out];
        let mut squares = vec![0.0f64; n_out];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..shots {
            let u: f64 = rng.random();
            let idx = cumulative
                .partition_point(|&c| c <= u)
                .min(weights.len() - 1);
            let sign = signs[idx];
            let tuple = tuple_space.tuple(idx);
            for a_rank in 0..n_out {
                let a = out_space.tuple(a_rank);
                let mut product = sign * l1;
                for party in 0..self.scenario.n_parties() {
                    let labels = self.responses[party].labels();
                    product *=
                        resp[party][(a[party] - 1) as usize * labels + (tuple[party] - 1) as usize];
                    if product == 0.0 {
                        break;
                    }
                }
                sums[a_rank] += product;
                squares[a_rank] += product * product;
            }
        }

        let n = shots as f64;
        let estimates = (0..n_out)
            .map(|a_rank| {
                let mean = sums[a_rank] / n;
                let std_error = if shots > 1 {
                    let variance = ((squares[a_rank] / n) - mean * mean).max(0.0) * n / (n - 1.0);
                    (variance / n).sqrt()
                } else {
                    0.0
                };
                OutcomeEstimate {
                    outputs: out_space.tuple(a_rank),
                    estimate: mean,
                    std_error,
                }
            })
            .collect();

        Ok(SampleReport {
            inputs: inputs.to_vec(),
            shots,
            seed,
            l1_norm: l1,
            estimates,
        })
    }
}

fn pair_labels(scenario: &Scenario, party: usize) -> impl Iterator<Item = HiddenLabel> + '_ {
    let inputs = scenario.party_inputs(party);
    (1..=scenario.party_outputs(party)).flat_map(move |a| {
        (1..=inputs).map(move |x| HiddenLabel::Pair {
            outcome: a,
            input: x,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativityReport {
    pub state_negativity: BigRational,
    pub response_negativity: BigRational,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("at least one shot is required")]
    NoShots,
    #[error("input tuple {inputs:?} does not fit the scenario")]
    BadInput { inputs: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeEstimate {
    pub outputs: Vec<u32>,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub inputs: Vec<u32>,
    pub shots: u64,
    pub seed: u64,
    pub l1_norm: f64,
    pub estimates: Vec<OutcomeEstimate>,
}
