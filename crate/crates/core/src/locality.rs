//! Local-polytope membership with exactly verified certificates.
//!
//! A box is local when it is a convex mixture of product deterministic
//! strategies. Membership is decided by linear programming in canonical
//! marginal coordinates, which strips the no-signalling null space from
//! the equality system. The float LP only proposes: every certificate is
//! converted to exact rationals and re-verified before it is returned,
//! and when a float proposal fails exact verification an exact rational
//! simplex decides authoritatively.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::boxes::{ProperBox, QuasiBox, SignallingWitness};
use crate::exact_lp::{solve_membership, MembershipResult};
use crate::marginals::{canonical_marginals, MarginalTable};
use crate::rational::{approximate_rational, to_f64};
use crate::scenario::{Scenario, TupleSpace};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_VERTEX_CAP: u128 = 1_000_000;

/// Denominator cap when rounding float LP output to rationals.
const RATIONALIZE_DENOMINATOR_CAP: u64 = 1_000_000_000;

/// A product deterministic strategy: party `k` answers `assignments[k][x − 1]`
/// on input `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    assignments: Vec<Vec<u32>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("strategy lists {got} parties, scenario has {expected}")]
    PartyCount { expected: usize, got: usize },
    #[error("party {party}: strategy must assign an outcome to each of the {inputs} inputs")]
    NotTotal { party: usize, inputs: u32 },
    #[error("party {party}: outcome {outcome} outside 1..={outputs}")]
    OutcomeRange {
        party: usize,
        outcome: u32,
        outputs: u32,
    },
}

impl DeterministicStrategy {
    pub fn new(scenario: &Scenario, assignments: Vec<Vec<u32>>) -> Result<Self, StrategyError> {
        if assignments.len() != scenario.n_parties() {
            return Err(StrategyError::PartyCount {
                expected: scenario.n_parties(),
                got: assignments.len(),
            });
        }
        for (party, per_input) in assignments.iter().enumerate() {
            if per_input.len() != scenario.party_inputs(party) as usize {
                return Err(StrategyError::NotTotal {
                    party: party + 1,
                    inputs: scenario.party_inputs(party),
                });
            }
            for &a in per_input {
                if a == 0 || a > scenario.party_outputs(party) {
                    return Err(StrategyError::OutcomeRange {
                        party: party + 1,
                        outcome: a,
                        outputs: scenario.party_outputs(party),
                    });
                }
            }
        }
        Ok(Self { assignments })
    }

    pub fn response(&self, party: usize, input: u32) -> u32 {
        self.assignments[party][(input - 1) as usize]
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.assignments
    }

    /// The point-mass box of this strategy.
    pub fn to_box(&self, scenario: &Scenario) -> ProperBox {
        let quasi = QuasiBox::from_fn(scenario.clone(), |a, x| {
            let matches = (0..scenario.n_parties()).all(|k| a[k] == self.response(k, x[k]));
            if matches {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        });
        ProperBox::new(quasi).expect("point mass is a proper box")
    }
}

impl std::fmt::Display for DeterministicStrategy {
    /// Per-party outcome lists joined by `/`, e.g. `1,2/2,1`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, per_input) in self.assignments.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            for (j, a) in per_input.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
        }
        Ok(())
    }
}

/// `Π_k A_k^{X_k}`, or `None` on overflow.
pub fn strategy_count(scenario: &Scenario) -> Option<u128> {
    scenario
        .outputs()
        .iter()
        .zip(scenario.inputs())
        .try_fold(1u128, |acc, (&a, &x)| {
            acc.checked_mul((a as u128).checked_pow(x)?)
        })
}

/// All product deterministic strategies in canonical order (assignments
/// enumerated like one long tuple, last entry fastest).
pub fn enumerate_vertices(
    scenario: &Scenario,
    cap: u128,
) -> Result<Vec<DeterministicStrategy>, LocalityError> {
    let count = strategy_count(scenario).ok_or(LocalityError::CountOverflow)?;
    if count > cap {
        return Err(LocalityError::TooManyVertices { count, cap });
    }
    let mut radices = Vec::new();
    for (party, &a) in scenario.outputs().iter().enumerate() {
        radices.extend(std::iter::repeat_n(
            a,
            scenario.party_inputs(party) as usize,
        ));
    }
    let space = TupleSpace::new(radices);
    let mut out = Vec::with_capacity(space.len());
    for flat in space.iter() {
        let mut assignments = Vec::with_capacity(scenario.n_parties());
        let mut offset = 0usize;
        for party in 0..scenario.n_parties() {
            let width = scenario.party_inputs(party) as usize;
            assignments.push(flat[offset..offset + width].to_vec());
            offset += width;
        }
        out.push(DeterministicStrategy { assignments });
    }
    Ok(out)
}

/// A linear functional on box entries, laid out like [`QuasiBox::values`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellFunctional {
    scenario: Scenario,
    coefficients: Vec<BigRational>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("functional is for a different scenario")]
pub struct ShapeMismatch;

impl BellFunctional {
    pub fn new(scenario: Scenario, coefficients: Vec<BigRational>) -> Result<Self, ShapeMismatch> {
        let expected = scenario.input_space().len() * scenario.output_space().len();
        if coefficients.len() != expected {
            return Err(ShapeMismatch);
        }
        Ok(Self {
            scenario,
            coefficients,
        })
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[u32], &[u32]) -> BigRational) -> Self {
        let out_space = scenario.output_space();
        let in_space = scenario.input_space();
        let mut coefficients = Vec::with_capacity(in_space.len() * out_space.len());
        for x in in_space.iter() {
            for a in out_space.iter() {
                coefficients.push(f(&a, &x));
            }
        }
        Self {
            scenario,
            coefficients,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn coefficient(&self, outputs: &[u32], inputs: &[u32]) -> &BigRational {
        let a = self.scenario.output_space().rank(outputs);
        let x = self.scenario.input_space().rank(inputs);
        &self.coefficients[x * self.scenario.output_space().len() + a]
    }

    /// Nonzero coefficients with their outcome and input tuples, in
    /// canonical order.
    pub fn nonzero_coefficients(
        &self,
    ) -> impl Iterator<Item = (Vec<u32>, Vec<u32>, &BigRational)> + '_ {
        let out_space = self.scenario.output_space();
        let in_space = self.scenario.input_space();
        let out_len = out_space.len();
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (out_space.tuple(i % out_len), in_space.tuple(i / out_len), c))
    }

    /// Expands a canonical-coordinate functional into box-entry
    /// coefficients. Each coordinate `(S, a_S, x_S)` becomes its defining
    /// sum: inputs outside `S` pinned to 1, outcomes outside `S` summed.
    /// On non-signalling boxes the two functionals agree.
    pub fn from_canonical(scenario: &Scenario, canonical: &[BigRational]) -> Self {
        let n = scenario.n_parties();
        let out_space = scenario.output_space();
        let in_space = scenario.input_space();
        let mut coefficients = vec![BigRational::zero(); out_space.len() * in_space.len()];
        for (key, coeff) in MarginalTable::keys(scenario).zip(canonical) {
            if coeff.is_zero() {
                continue;
            }
            let mut x = vec![1u32; n];
            for (i, &p) in key.parties.iter().enumerate() {
                x[p] = key.inputs[i];
            }
            let x_rank = in_space.rank(&x);
            let others: Vec<usize> = (0..n).filter(|p| !key.parties.contains(p)).collect();
            let other_space =
                TupleSpace::new(others.iter().map(|&p| scenario.party_outputs(p)).collect());
            let mut a = vec![0u32; n];
            for (i, &p) in key.parties.iter().enumerate() {
                a[p] = key.outputs[i];
            }
            for other_a in other_space.iter() {
                for (&p, &v) in others.iter().zip(&other_a) {
                    a[p] = v;
                }
                coefficients[x_rank * out_space.len() + out_space.rank(&a)] += coeff;
            }
        }
        Self {
            scenario: scenario.clone(),
            coefficients,
        }
    }
}

/// Exact value `Σ_{a,x} f(a,x)·p(a|x)`.
pub fn bell_value(b: &QuasiBox, functional: &BellFunctional) -> Result<BigRational, ShapeMismatch> {
    if b.scenario() != functional.scenario() {
        return Err(ShapeMismatch);
    }
    Ok(b.values()
        .iter()
        .zip(&functional.coefficients)
        .map(|(v, c)| v * c)
        .sum())
}

/// Exact maximum of the functional over the given strategies.
pub fn local_bound(
    functional: &BellFunctional,
    strategies: &[DeterministicStrategy],
) -> BigRational {
    assert!(!strategies.is_empty(), "no strategies to maximize over");
    strategies
        .iter()
        .map(|s| {
            bell_value(s.to_box(functional.scenario()).as_quasi(), functional)
                .expect("scenarios match")
        })
        .max()
        .unwrap()
}

/// Convex weights over strategies reproducing the box exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalWeights {
    pub weights: Vec<(DeterministicStrategy, BigRational)>,
}

/// A separating functional with its exact local bound and box value;
/// `box_value > local_bound` holds exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellCertificate {
    pub functional: BellFunctional,
    pub local_bound: BigRational,
    pub box_value: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalityCertificate {
    Local(LocalWeights),
    NonLocal(BellCertificate),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalityError {
    #[error("box is signalling: {0}")]
    Signalling(SignallingWitness),
    #[error("{count} deterministic strategies exceed the cap of {cap}")]
    TooManyVertices { count: u128, cap: u128 },
    #[error("deterministic strategy count overflows")]
    CountOverflow,
    #[error("locality undecided at tolerance {tol}")]
    Undecided { tol: f64 },
}

/// Decides membership of a non-signalling box in the local polytope.
///
/// The verdict always comes with an exactly verified certificate: convex
/// weights that reproduce the box entrywise, or a Bell functional whose
/// box value exceeds its local bound in exact arithmetic. Boundary points
/// are local (the polytope is closed).
pub fn is_local(
    b: &ProperBox,
    tol: f64,
    vertex_cap: u128,
) -> Result<LocalityCertificate, LocalityError> {
    if let Some(w) = b.signalling_witness() {
        return Err(LocalityError::Signalling(w));
    }
    let scenario = b.scenario().clone();
    let strategies = enumerate_vertices(&scenario, vertex_cap)?;

    let target = canonical_marginals(b.as_quasi())
        .expect("witness checked above")
        .values()
        .to_vec();
    let columns: Vec<Vec<BigRational>> = strategies
        .iter()
        .map(|s| {
            canonical_marginals(s.to_box(&scenario).as_quasi())
                .expect("product boxes are non-signalling")
                .values()
                .to_vec()
        })
        .collect();

    // Float proposal, exact disposal.
    match propose(&columns, &target, tol) {
        Proposal::Feasible(support) => {
            if let Some(weights) = exact_weights_on_support(&columns, &target, &support) {
                if let Some(cert) = verified_local(b, &strategies, &weights) {
                    return Ok(cert);
                }
            }
        }
        Proposal::Separating(canonical) => {
            if let Some(cert) = verified_nonlocal(&scenario, b, &strategies, &canonical) {
                return Ok(cert);
            }
        }
        Proposal::Unavailable => {}
    }

    // Exact simplex decides when the float layer fails either way.
    match solve_membership(&columns, &target) {
        MembershipResult::Feasible(weights) => {
            let indexed: Vec<(usize, BigRational)> = weights
                .into_iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .collect();
            verified_local(b, &strategies, &indexed).ok_or(LocalityError::Undecided { tol })
        }
        MembershipResult::Infeasible(farkas) => {
            verified_nonlocal(&scenario, b, &strategies, &farkas)
                .ok_or(LocalityError::Undecided { tol })
        }
    }
}

enum Proposal {
    /// Support of a float-feasible weight vector.
    Feasible(Vec<usize>),
    /// Rationalized separating functional in canonical coordinates.
    Separating(Vec<BigRational>),
    Unavailable,
}

/// Float LP proposals via the simplex solver: first a pure membership
/// feasibility problem, then — if infeasible — a separation problem
/// maximizing `f·m(b) − c` subject to `f·m(V) ≤ c` and `|f| ≤ 1`.
fn propose(columns: &[Vec<BigRational>], target: &[BigRational], tol: f64) -> Proposal {
    let m = target.len();
    let columns_f: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| c.iter().map(to_f64).collect())
        .collect();
    let target_f: Vec<f64> = target.iter().map(to_f64).collect();

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..columns.len())
        .map(|_| problem.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    for i in 0..m {
        let expr: Vec<_> = vars
            .iter()
            .enumerate()
            .map(|(s, &v)| (v, columns_f[s][i]))
            .collect();
        problem.add_constraint(&expr[..], ComparisonOp::Eq, target_f[i]);
    }
    match problem.solve() {
        Ok(solution) => {
            let support: Vec<usize> = vars
                .iter()
                .enumerate()
                .filter(|(_, &v)| solution[v] > tol)
                .map(|(s, _)| s)
                .collect();
            if support.is_empty() {
                Proposal::Unavailable
            } else {
                Proposal::Feasible(support)
            }
        }
        Err(minilp::Error::Infeasible) => {
            // Separation LP over the non-constant coordinates.
            let mut problem = Problem::new(OptimizationDirection::Maximize);
            let f_vars: Vec<_> = (1..m)
                .map(|i| problem.add_var(target_f[i], (-1.0, 1.0)))
                .collect();
            let c_var = problem.add_var(-1.0, (f64::NEG_INFINITY, f64::INFINITY));
            for column in &columns_f {
                let mut expr: Vec<_> = f_vars
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v, column[i + 1]))
                    .collect();
                expr.push((c_var, -1.0));
                problem.add_constraint(&expr[..], ComparisonOp::Le, 0.0);
            }
            match problem.solve() {
                Ok(solution) if solution.objective() > tol => {
                    let mut canonical = vec![BigRational::zero(); m];
                    for (i, &v) in f_vars.iter().enumerate() {
                        canonical[i + 1] =
                            approximate_rational(solution[v], RATIONALIZE_DENOMINATOR_CAP);
                    }
                    Proposal::Separating(canonical)
                }
                _ => Proposal::Unavailable,
            }
        }
        Err(minilp::Error::Unbounded) => Proposal::Unavailable,
    }
}

/// Solves `A_support · w = target` exactly by Gauss-Jordan elimination.
/// Free columns get weight zero. Returns `None` when the system is
/// inconsistent or the solution has a negative entry.
fn exact_weights_on_support(
    columns: &[Vec<BigRational>],
    target: &[BigRational],
    support: &[usize],
) -> Option<Vec<(usize, BigRational)>> {
    let m = target.len();
    let k = support.len();
    // Augmented matrix [A_support | target].
    let mut matrix: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row: Vec<BigRational> =
                support.iter().map(|&s| columns[s][i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();

    let mut pivot_of_col: Vec<Option<usize>> = vec![None; k];
    let mut pivot_row = 0usize;
    for col in 0..k {
        let Some(found) = (pivot_row..m).find(|&r| !matrix[r][col].is_zero()) else {
            continue;
        };
        matrix.swap(pivot_row, found);
        let pivot = matrix[pivot_row][col].clone();
        for v in matrix[pivot_row].iter_mut() {
            *v /= &pivot;
        }
        for r in 0..m {
            if r != pivot_row && !matrix[r][col].is_zero() {
                let factor = matrix[r][col].clone();
                for j in 0..=k {
                    let delta = &factor * &matrix[pivot_row][j];
                    matrix[r][j] -= delta;
                }
            }
        }
        pivot_of_col[col] = Some(pivot_row);
        pivot_row += 1;
        if pivot_row == m {
            break;
        }
    }
    // Inconsistent when a zero row has a nonzero right-hand side.
    for r in pivot_row..m {
        if matrix[r][..k].iter().all(|v| v.is_zero()) && !matrix[r][k].is_zero() {
            return None;
        }
    }
    let mut weights = Vec::with_capacity(k);
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        let value = match pivot {
            Some(row) => matrix[*row][k].clone(),
            None => BigRational::zero(),
        };
        if value.is_negative() {
            return None;
        }
        if !value.is_zero() {
            weights.push((support[col], value));
        }
    }
    Some(weights)
}

/// Final exact check of a Local verdict: the weighted strategy mixture
/// must reproduce the box entrywise and the weights must be a convex
/// combination.
fn verified_local(
    b: &ProperBox,
    strategies: &[DeterministicStrategy],
    weights: &[(usize, BigRational)],
) -> Option<LocalityCertificate> {
    let total: BigRational = weights.iter().map(|(_, w)| w.clone()).sum();
    if !total.is_one() || weights.iter().any(|(_, w)| w.is_negative()) {
        return None;
    }
    let scenario = b.scenario();
    let boxes: Vec<ProperBox> = weights
        .iter()
        .map(|(s, _)| strategies[*s].to_box(scenario))
        .collect();
    let mixture = QuasiBox::from_fn(scenario.clone(), |a, x| {
        weights
            .iter()
            .zip(&boxes)
            .map(|((_, w), d)| w * d.value(a, x))
            .sum()
    });
    if &mixture != b.as_quasi() {
        return None;
    }
    Some(LocalityCertificate::Local(LocalWeights {
        weights: weights
            .iter()
            .map(|(s, w)| (strategies[*s].clone(), w.clone()))
            .collect(),
    }))
}

/// Final exact check of a NonLocal verdict: expand the canonical
/// functional over box entries and require `box value > local bound`
/// in exact arithmetic.
fn verified_nonlocal(
    scenario: &Scenario,
    b: &ProperBox,
    strategies: &[DeterministicStrategy],
    canonical: &[BigRational],
) -> Option<LocalityCertificate> {
    let functional = BellFunctional::from_canonical(scenario, canonical);
    let box_value = bell_value(b.as_quasi(), &functional).expect("scenarios match");
    let bound = local_bound(&functional, strategies);
    if box_value > bound {
        Some(LocalityCertificate::NonLocal(BellCertificate {
            functional,
            local_bound: bound,
            box_value,
        }))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn chsh_scenario() -> Scenario {
        Scenario::new(vec![2, 2], vec![2, 2]).unwrap()
    }

    /// The CHSH functional with ±1 coefficients: correlators summed with
    /// a sign flip on the (2,2) input pair. Local bound 2, PR value 4.
    fn chsh_functional() -> BellFunctional {
        BellFunctional::from_fn(chsh_scenario(), |a, x| {
            let sign = if x == [2, 2] { -1 } else { 1 };
            let parity = if (a[0] + a[1]) % 2 == 0 { 1 } else { -1 };
            rat(sign * parity, 1)
        })
    }

    #[test]
    fn vertex_counts_match_the_product_formula() {
        assert_eq!(strategy_count(&chsh_scenario()), Some(16));
        let single = Scenario::new(vec![3], vec![1]).unwrap();
        assert_eq!(strategy_count(&single), Some(3));
        assert_eq!(enumerate_vertices(&single, 10).unwrap().len(), 3);
        let three = Scenario::new(vec![2, 2, 2], vec![2, 2, 2]).unwrap();
        assert_eq!(strategy_count(&three), Some(64));
        assert_eq!(enumerate_vertices(&three, 100).unwrap().len(), 64);
    }

    #[test]
    fn vertex_cap_is_enforced_with_the_count() {
        let err = enumerate_vertices(&chsh_scenario(), 10).unwrap_err();
        assert_eq!(err, LocalityError::TooManyVertices { count: 16, cap: 10 });
    }

    #[test]
    fn enumerated_strategies_are_distinct_and_total() {
        let strategies = enumerate_vertices(&chsh_scenario(), 100).unwrap();
        assert_eq!(strategies.len(), 16);
        for (i, s) in strategies.iter().enumerate() {
            for other in &strategies[..i] {
                assert_ne!(s, other);
            }
        }
    }

    #[test]
    fn chsh_value_of_pr_is_four_and_local_bound_two() {
        let pr = gallery::pr_box();
        let functional = chsh_functional();
        assert_eq!(bell_value(pr.as_quasi(), &functional).unwrap(), rat(4, 1));

        // Independent exhaustive bound: loop over raw assignment tables
        // rather than the enumeration under test. One bit per (party,
        // input) pair selects the outcome.
        let scenario = chsh_scenario();
        let mut best = rat(-100, 1);
        for bits in 0..16u32 {
            let assignment = |k: usize, x: u32| ((bits >> (2 * k as u32 + x - 1)) & 1) + 1;
            let det = QuasiBox::from_fn(scenario.clone(), |a, x| {
                if a[0] == assignment(0, x[0]) && a[1] == assignment(1, x[1]) {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            });
            let v = bell_value(&det, &functional).unwrap();
            if v > best {
                best = v;
            }
        }
        assert_eq!(best, rat(2, 1));

        let strategies = enumerate_vertices(&scenario, 100).unwrap();
        assert_eq!(local_bound(&functional, &strategies), rat(2, 1));
    }

    #[test]
    fn zero_functional_evaluates_to_zero() {
        let pr = gallery::pr_box();
        let zero = BellFunctional::from_fn(chsh_scenario(), |_, _| BigRational::zero());
        assert!(bell_value(pr.as_quasi(), &zero).unwrap().is_zero());
    }

    #[test]
    fn bell_value_rejects_shape_mismatch() {
        let pr = gallery::pr_box();
        let other = BellFunctional::from_fn(Scenario::new(vec![2], vec![2]).unwrap(), |_, _| {
            BigRational::zero()
        });
        assert!(bell_value(pr.as_quasi(), &other).is_err());
    }

    #[test]
    fn uniform_box_is_local_with_exact_weights() {
        let uniform = gallery::uniform_box(&chsh_scenario());
        match is_local(&uniform, DEFAULT_TOL, DEFAULT_VERTEX_CAP).unwrap() {
            LocalityCertificate::Local(cert) => {
                let total: BigRational = cert.weights.iter().map(|(_, w)| w.clone()).sum();
                assert!(total.is_one());
            }
            LocalityCertificate::NonLocal(_) => panic!("uniform box is local"),
        }
    }

    #[test]
    fn deterministic_boxes_get_point_mass_certificates() {
        let scenario = chsh_scenario();
        let strategies = enumerate_vertices(&scenario, 100).unwrap();
        for strategy in &strategies {
            let b = strategy.to_box(&scenario);
            match is_local(&b, DEFAULT_TOL, DEFAULT_VERTEX_CAP).unwrap() {
                LocalityCertificate::Local(cert) => {
                    assert_eq!(cert.weights.len(), 1, "vertex decomposition is unique");
                    assert_eq!(&cert.weights[0].0, strategy);
                    assert!(cert.weights[0].1.is_one());
                }
                LocalityCertificate::NonLocal(_) => panic!("vertices are local"),
            }
        }
    }

    #[test]
    fn pr_box_is_nonlocal_with_an_exact_certificate() {
        let pr = gallery::pr_box();
        match is_local(&pr, DEFAULT_TOL, DEFAULT_VERTEX_CAP).unwrap() {
            LocalityCertificate::NonLocal(cert) => {
                assert!(cert.box_value > cert.local_bound);
                // Re-derive both sides from the certificate functional.
                assert_eq!(
                    bell_value(pr.as_quasi(), &cert.functional).unwrap(),
                    cert.box_value
                );
                let strategies = enumerate_vertices(pr.scenario(), 100).unwrap();
                assert_eq!(local_bound(&cert.functional, &strategies), cert.local_bound);
            }
            LocalityCertificate::Local(_) => panic!("PR box is non-local"),
        }
    }

    #[test]
    fn tsirelson_box_is_nonlocal() {
        let ts = gallery::tsirelson_box();
        match is_local(&ts, DEFAULT_TOL, DEFAULT_VERTEX_CAP).unwrap() {
            LocalityCertificate::NonLocal(cert) => {
                assert!(cert.box_value > cert.local_bound);
            }
            LocalityCertificate::Local(_) => panic!("Tsirelson box is non-local"),
        }
    }

    #[test]
    fn random_local_mixtures_are_certified_local() {
        let scenario = chsh_scenario();
        for seed in 0..10u64 {
            let b = gallery::random_local_box(&scenario, seed);
            match is_local(&b, DEFAULT_TOL, DEFAULT_VERTEX_CAP).unwrap() {
                LocalityCertificate::Local(cert) => {
                    // Independent reproduction check.
                    let mixture = QuasiBox::from_fn(scenario.clone(), |a, x| {
                        cert.weights
                            .iter()
                            .map(|(s, w)| w * s.to_box(&scenario).value(a, x))
                            .sum()
                    });
                    assert_eq!(&mixture, b.as_quasi(), "seed {seed}");
                }
                LocalityCertificate::NonLocal(_) => panic!("mixture of vertices is local"),
            }
        }
    }

    #[test]
    fn proper_models_evaluate_to_local_boxes() {
        // A proper state with proper (not necessarily deterministic)
        // responses is the classical hidden-variable form; its evaluation
        // must always land inside the local polytope.
        use crate::classical::{ClassicalModel, HiddenLabel, ModelKind, QuasiState, ResponseTable};
        use rand::{RngExt, SeedableRng};
        let scenario = chsh_scenario();
        for seed in 0..5u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let spaces = vec![
                vec![
                    HiddenLabel::Pair {
                        outcome: 1,
                        input: 1,
                    },
                    HiddenLabel::Pair {
                        outcome: 2,
                        input: 1,
                    },
                ],
                vec![
                    HiddenLabel::Pair {
                        outcome: 1,
                        input: 1,
                    },
                    HiddenLabel::Pair {
                        outcome: 2,
                        input: 1,
                    },
                ],
            ];
            let raw: Vec<i64> = (0..4).map(|_| rng.random_range(1..=9)).collect();
            let total: i64 = raw.iter().sum();
            let state =
                QuasiState::new(spaces, raw.iter().map(|&r| rat(r, total)).collect()).unwrap();
            let responses = (0..2usize)
                .map(|party| {
                    // First-outcome row drawn in [0, 1]; the second row
                    // completes each column, so responses stay proper.
                    let first: Vec<BigRational> =
                        (0..4).map(|_| rat(rng.random_range(0..=8), 8)).collect();
                    let mut entries = Vec::new();
                    for a in 0..2 {
                        for row in &first {
                            if a == 0 {
                                entries.push(row.clone());
                            } else {
                                entries.push(BigRational::one() - row);
                            }
                        }
                    }
                    ResponseTable::new(party, 2, 2, 2, entries).unwrap()
                })
                .collect();
            let model = ClassicalModel::new(
                scenario.clone(),
                state,
                responses,
                ModelKind::NegativeMeasurements,
                false,
            )
            .unwrap();
            let b = ProperBox::new(model.evaluate()).unwrap();
            assert!(
                matches!(
                    is_local(&b, DEFAULT_TOL, DEFAULT_VERTEX_CAP).unwrap(),
                    LocalityCertificate::Local(_)
                ),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn boundary_box_on_the_chsh_facet_is_local() {
        // (PR + uniform)/2 sits exactly on the facet: its CHSH value is 2.
        let scenario = chsh_scenario();
        let pr = gallery::pr_box();
        let uniform = gallery::uniform_box(&scenario);
        let boundary = ProperBox::new(QuasiBox::from_fn(scenario.clone(), |a, x| {
            (pr.value(a, x) + uniform.value(a, x)) / BigRational::from_integer(2.into())
        }))
        .unwrap();
        assert_eq!(
            bell_value(boundary.as_quasi(), &chsh_functional()).unwrap(),
            rat(2, 1)
        );
        match is_local(&boundary, DEFAULT_TOL, DEFAULT_VERTEX_CAP).unwrap() {
            LocalityCertificate::Local(cert) => {
                let mixture = QuasiBox::from_fn(scenario.clone(), |a, x| {
                    cert.weights
                        .iter()
                        .map(|(s, w)| w * s.to_box(&scenario).value(a, x))
                        .sum()
                });
                assert_eq!(&mixture, boundary.as_quasi());
            }
            LocalityCertificate::NonLocal(_) => panic!("boundary points are local"),
        }
    }

    #[test]
    fn float_layer_proposes_the_right_branch() {
        // The float LP is only a proposer, but it should propose
        // correctly on the canonical examples rather than leaning on the
        // exact fallback.
        let scenario = chsh_scenario();
        let strategies = enumerate_vertices(&scenario, 100).unwrap();
        let columns: Vec<Vec<BigRational>> = strategies
            .iter()
            .map(|s| {
                canonical_marginals(s.to_box(&scenario).as_quasi())
                    .unwrap()
                    .values()
                    .to_vec()
            })
            .collect();

        let uniform = canonical_marginals(gallery::uniform_box(&scenario).as_quasi())
            .unwrap()
            .values()
            .to_vec();
        assert!(matches!(
            propose(&columns, &uniform, DEFAULT_TOL),
            Proposal::Feasible(_)
        ));

        let pr = canonical_marginals(gallery::pr_box().as_quasi())
            .unwrap()
            .values()
            .to_vec();
        assert!(matches!(
            propose(&columns, &pr, DEFAULT_TOL),
            Proposal::Separating(_)
        ));
    }

    #[test]
    fn exact_fallback_decides_both_sides() {
        // Drive the exact simplex directly on the same data `is_local`
        // would hand it.
        let scenario = chsh_scenario();
        let strategies = enumerate_vertices(&scenario, 100).unwrap();
        let columns: Vec<Vec<BigRational>> = strategies
            .iter()
            .map(|s| {
                canonical_marginals(s.to_box(&scenario).as_quasi())
                    .unwrap()
                    .values()
                    .to_vec()
            })
            .collect();

        let uniform = gallery::uniform_box(&scenario);
        let coords = canonical_marginals(uniform.as_quasi()).unwrap();
        match solve_membership(&columns, coords.values()) {
            MembershipResult::Feasible(weights) => {
                let indexed: Vec<(usize, BigRational)> = weights
                    .into_iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .collect();
                assert!(verified_local(&uniform, &strategies, &indexed).is_some());
            }
            MembershipResult::Infeasible(_) => panic!("uniform box is local"),
        }

        let pr = gallery::pr_box();
        let coords = canonical_marginals(pr.as_quasi()).unwrap();
        match solve_membership(&columns, coords.values()) {
            MembershipResult::Infeasible(farkas) => {
                let cert = verified_nonlocal(&scenario, &pr, &strategies, &farkas)
                    .expect("Farkas vector must verify");
                match cert {
                    LocalityCertificate::NonLocal(cert) => {
                        assert!(cert.box_value > cert.local_bound)
                    }
                    LocalityCertificate::Local(_) => unreachable!(),
                }
            }
            MembershipResult::Feasible(_) => panic!("PR box is non-local"),
        }
    }

    #[test]
    fn signalling_boxes_are_rejected_with_the_witness() {
        let s = chsh_scenario();
        let b = QuasiBox::from_fn(s, |a, x| {
            if a[0] == x[1] {
                rat(1, 2)
            } else {
                BigRational::zero()
            }
        });
        let b = ProperBox::new(b).unwrap();
        match is_local(&b, DEFAULT_TOL, DEFAULT_VERTEX_CAP) {
            Err(LocalityError::Signalling(w)) => assert_eq!(w.party, 1),
            other => panic!("expected signalling error, got {other:?}"),
        }
    }

    #[test]
    fn canonical_functional_expansion_matches_on_nonsignalling_boxes() {
        // A canonical functional and its raw expansion agree on NS boxes.
        let scenario = chsh_scenario();
        let pr = gallery::pr_box();
        let table = canonical_marginals(pr.as_quasi()).unwrap();
        let mut canonical = vec![BigRational::zero(); table.len()];
        for (i, c) in canonical.iter_mut().enumerate() {
            *c = rat(i as i64 % 5 - 2, 3);
        }
        let functional = BellFunctional::from_canonical(&scenario, &canonical);
        let direct: BigRational = table
            .values()
            .iter()
            .zip(&canonical)
            .map(|(v, c)| v * c)
            .sum();
        assert_eq!(bell_value(pr.as_quasi(), &functional).unwrap(), direct);
    }
}
