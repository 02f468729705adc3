//! Canonical text formats for boxes, marginal tables, and models.
//!
//! Writers emit a fixed canonical JSON layout — sorted canonical key
//! order, exact `num/den` rationals, one trailing newline — so that any
//! write→read→write round trip is byte-identical. Readers accept any key
//! order and both rational (`1/2`) and decimal (`0.5`) value strings, and
//! report structural problems (missing or unexpected keys, wrong array
//! lengths) with the offending indices.

use serde_json::Value;

use num_rational::BigRational;
use thiserror::Error;

use crate::boxes::QuasiBox;
use crate::classical::{
    ClassicalModel, HiddenLabel, ModelError, ModelKind, QuasiState, ResponseTable,
};
use crate::marginals::{MarginalKey, MarginalShapeError, MarginalTable};
use crate::quantum::{QuantumModel, QuantumModelError};
use crate::rational::{format_rational, parse_rational, RationalParseError};
use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("structure error: {0}")]
    Structure(String),
    #[error("invalid value at {location}: {source}")]
    Value {
        location: String,
        source: RationalParseError,
    },
    #[error("invalid scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("marginal table shape: {0}")]
    MarginalShape(#[from] MarginalShapeError),
    #[error("model constraint violated: {0}")]
    Model(#[from] ModelError),
    #[error("operator shape error: {0}")]
    Quantum(#[from] QuantumModelError),
}

impl FormatError {
    /// Distinguishes semantic constraint violations (a well-formed file
    /// describing an invalid object) from parse and structure errors.
    pub fn is_constraint_violation(&self) -> bool {
        matches!(
            self,
            FormatError::Model(
                ModelError::StateNotNormalized { .. }
                    | ModelError::ResponseNotNormalized { .. }
                    | ModelError::NegativeStateWeight { .. }
                    | ModelError::NonDeterministicResponse { .. }
            )
        )
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn parse_json(text: &str) -> Result<Value, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn as_object<'a>(
    value: &'a Value,
    context: &str,
) -> Result<&'a serde_json::Map<String, Value>, FormatError> {
    value
        .as_object()
        .ok_or_else(|| FormatError::Structure(format!("{context} must be an object")))
}

fn get<'a>(
    object: &'a serde_json::Map<String, Value>,
    key: &str,
    context: &str,
) -> Result<&'a Value, FormatError> {
    object
        .get(key)
        .ok_or_else(|| FormatError::Structure(format!("{context} is missing \"{key}\"")))
}

fn as_array<'a>(value: &'a Value, context: &str) -> Result<&'a Vec<Value>, FormatError> {
    value
        .as_array()
        .ok_or_else(|| FormatError::Structure(format!("{context} must be an array")))
}

fn as_str<'a>(value: &'a Value, context: &str) -> Result<&'a str, FormatError> {
    value
        .as_str()
        .ok_or_else(|| FormatError::Structure(format!("{context} must be a string")))
}

fn as_u32(value: &Value, context: &str) -> Result<u32, FormatError> {
    value
        .as_u64()
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| {
            FormatError::Structure(format!("{context} must be a small positive integer"))
        })
}

fn rational_at(value: &Value, location: String) -> Result<BigRational, FormatError> {
    let text = as_str(value, &location)?;
    parse_rational(text).map_err(|source| FormatError::Value { location, source })
}

/// Upper bound on tensor entries accepted from a file; beyond this the
/// reader errors instead of attempting a multi-gigabyte allocation.
const MAX_FILE_ENTRIES: u128 = 1 << 24;

fn read_scenario(object: &serde_json::Map<String, Value>) -> Result<Scenario, FormatError> {
    let scenario = as_object(get(object, "scenario", "document")?, "\"scenario\"")?;
    let outputs = as_array(get(scenario, "outputs", "\"scenario\"")?, "\"outputs\"")?
        .iter()
        .enumerate()
        .map(|(i, v)| as_u32(v, &format!("outputs[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let inputs = as_array(get(scenario, "inputs", "\"scenario\"")?, "\"inputs\"")?
        .iter()
        .enumerate()
        .map(|(i, v)| as_u32(v, &format!("inputs[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let entries = outputs
        .iter()
        .chain(&inputs)
        .try_fold(1u128, |acc, &r| acc.checked_mul(u128::from(r.max(1))));
    match entries {
        Some(n) if n <= MAX_FILE_ENTRIES => {}
        _ => {
            return Err(FormatError::Structure(format!(
                "scenario describes more than {MAX_FILE_ENTRIES} tensor entries"
            )));
        }
    }
    Ok(Scenario::new(outputs, inputs)?)
}

fn join_u32(values: &[u32]) -> String {
    values
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a comma-joined tuple such as `1,2` (the empty string is the
/// empty tuple). Shared with the command line front-end.
pub fn parse_u32_tuple(text: &str) -> Option<Vec<u32>> {
    if text.is_empty() {
        return Some(Vec::new());
    }
    text.split(',').map(|p| p.trim().parse().ok()).collect()
}

fn scenario_line(scenario: &Scenario) -> String {
    format!(
        "  \"scenario\": {{\"outputs\": [{}], \"inputs\": [{}]}}",
        join_u32(scenario.outputs()),
        join_u32(scenario.inputs())
    )
}

// ---------------------------------------------------------------------------
// Box files
// ---------------------------------------------------------------------------

/// Canonical box file: scenario plus one flat outcome array per input
/// tuple, keyed by the comma-joined 1-based input tuple.
pub fn write_box(quasi: &QuasiBox) -> String {
    let scenario = quasi.scenario();
    let in_space = scenario.input_space();
    let out_count = scenario.output_space().len();
    let mut out = String::from("{\n");
    out.push_str(&scenario_line(scenario));
    out.push_str(",\n  \"probabilities\": {\n");
    let total = in_space.len();
    for (x_rank, x) in in_space.iter().enumerate() {
        let entries: Vec<String> = (0..out_count)
            .map(|a_rank| format!("\"{}\"", format_rational(quasi.value_at(a_rank, x_rank))))
            .collect();
        let comma = if x_rank + 1 < total { "," } else { "" };
        out.push_str(&format!(
            "    \"{}\": [{}]{}\n",
            join_u32(&x),
            entries.join(", "),
            comma
        ));
    }
    out.push_str("  }\n}\n");
    out
}

pub fn read_box(text: &str) -> Result<QuasiBox, FormatError> {
    let root = parse_json(text)?;
    let root = as_object(&root, "document")?;
    let scenario = read_scenario(root)?;
    let probabilities = as_object(get(root, "probabilities", "document")?, "\"probabilities\"")?;

    let in_space = scenario.input_space();
    let out_count = scenario.output_space().len();
    let expected: Vec<String> = in_space.iter().map(|x| join_u32(&x)).collect();
    let missing: Vec<&String> = expected
        .iter()
        .filter(|k| !probabilities.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(FormatError::Structure(format!(
            "\"probabilities\" is missing input tuples {missing:?}"
        )));
    }
    let unexpected: Vec<&String> = probabilities
        .keys()
        .filter(|k| !expected.contains(k))
        .collect();
    if !unexpected.is_empty() {
        return Err(FormatError::Structure(format!(
            "\"probabilities\" has unexpected keys {unexpected:?}"
        )));
    }

    let mut values = Vec::with_capacity(in_space.len() * out_count);
    for key in &expected {
        let column = as_array(&probabilities[key], &format!("probabilities[\"{key}\"]"))?;
        if column.len() != out_count {
            return Err(FormatError::Structure(format!(
                "probabilities[\"{key}\"] has {} entries, expected {out_count}",
                column.len()
            )));
        }
        for (i, v) in column.iter().enumerate() {
            values.push(rational_at(v, format!("probabilities[\"{key}\"][{i}]"))?);
        }
    }
    Ok(QuasiBox::new(scenario, values).expect("shape checked above"))
}

// ---------------------------------------------------------------------------
// Marginal table files
// ---------------------------------------------------------------------------

fn marginal_key_string(key: &MarginalKey) -> String {
    let parties: Vec<String> = key.parties.iter().map(|p| (p + 1).to_string()).collect();
    format!(
        "S={};a={};x={}",
        parties.join(","),
        join_u32(&key.outputs),
        join_u32(&key.inputs)
    )
}

/// Canonical marginal-table file: one rational per canonical coordinate,
/// keyed `S=<parties>;a=<outcomes>;x=<inputs>` with 1-based party ids.
pub fn write_marginal_table(table: &MarginalTable) -> String {
    let mut out = String::from("{\n");
    out.push_str(&scenario_line(table.scenario()));
    out.push_str(",\n  \"marginals\": {\n");
    let total = table.len();
    for (i, (key, value)) in MarginalTable::keys(table.scenario())
        .zip(table.values())
        .enumerate()
    {
        let comma = if i + 1 < total { "," } else { "" };
        out.push_str(&format!(
            "    \"{}\": \"{}\"{}\n",
            marginal_key_string(&key),
            format_rational(value),
            comma
        ));
    }
    out.push_str("  }\n}\n");
    out
}

pub fn read_marginal_table(text: &str) -> Result<MarginalTable, FormatError> {
    let root = parse_json(text)?;
    let root = as_object(&root, "document")?;
    let scenario = read_scenario(root)?;
    let marginals = as_object(get(root, "marginals", "document")?, "\"marginals\"")?;

    let expected: Vec<String> = MarginalTable::keys(&scenario)
        .map(|k| marginal_key_string(&k))
        .collect();
    let missing: Vec<&String> = expected
        .iter()
        .filter(|k| !marginals.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(FormatError::Structure(format!(
            "\"marginals\" is missing coordinates {missing:?}"
        )));
    }
    let unexpected: Vec<&String> = marginals.keys().filter(|k| !expected.contains(k)).collect();
    if !unexpected.is_empty() {
        return Err(FormatError::Structure(format!(
            "\"marginals\" has unexpected keys {unexpected:?}"
        )));
    }
    let mut values = Vec::with_capacity(expected.len());
    for key in &expected {
        values.push(rational_at(
            &marginals[key],
            format!("marginals[\"{key}\"]"),
        )?);
    }
    Ok(MarginalTable::from_values(scenario, values)?)
}

// ---------------------------------------------------------------------------
// Classical model files
// ---------------------------------------------------------------------------

fn kind_string(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::NegativeMeasurements => "neg-meas",
        ModelKind::NegativeState => "neg-state",
    }
}

fn parse_kind(text: &str) -> Result<ModelKind, FormatError> {
    match text {
        "neg-meas" => Ok(ModelKind::NegativeMeasurements),
        "neg-state" => Ok(ModelKind::NegativeState),
        other => Err(FormatError::Structure(format!(
            "\"kind\" must be \"neg-meas\" or \"neg-state\", got \"{other}\""
        ))),
    }
}

fn state_key(spaces: &[Vec<HiddenLabel>], tuple: &[u32]) -> String {
    tuple
        .iter()
        .enumerate()
        .map(|(party, &idx)| spaces[party][(idx - 1) as usize].to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Canonical model file: kind, compression flag, scenario, per-party
/// label spaces, state weights keyed by the comma-joined label tuple, and
/// per-party responses keyed `a|x,label`.
pub fn write_classical_model(model: &ClassicalModel) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"kind\": \"{}\",\n", kind_string(model.kind())));
    out.push_str(&format!("  \"compressed\": {},\n", model.is_compressed()));
    out.push_str(&scenario_line(model.scenario()));
    out.push_str(",\n  \"spaces\": [\n");
    let spaces = model.state().spaces();
    for (party, space) in spaces.iter().enumerate() {
        let labels: Vec<String> = space.iter().map(|l| format!("\"{l}\"")).collect();
        let comma = if party + 1 < spaces.len() { "," } else { "" };
        out.push_str(&format!("    [{}]{}\n", labels.join(", "), comma));
    }
    out.push_str("  ],\n  \"state\": {\n");
    let tuple_space = model.state().tuple_space();
    let total = tuple_space.len();
    for (rank, tuple) in tuple_space.iter().enumerate() {
        let comma = if rank + 1 < total { "," } else { "" };
        out.push_str(&format!(
            "    \"{}\": \"{}\"{}\n",
            state_key(spaces, &tuple),
            format_rational(&model.state().weights()[rank]),
            comma
        ));
    }
    out.push_str("  },\n  \"responses\": [\n");
    for (party, table) in model.responses().iter().enumerate() {
        out.push_str("    {\n");
        let mut lines = Vec::new();
        for a in 1..=table.outputs() {
            for x in 1..=table.inputs() {
                for (l, label) in spaces[party].iter().enumerate() {
                    lines.push(format!(
                        "      \"{a}|{x},{label}\": \"{}\"",
                        format_rational(table.entry(a, x, l))
                    ));
                }
            }
        }
        out.push_str(&lines.join(",\n"));
        let comma = if party + 1 < spaces.len() { "," } else { "" };
        out.push_str(&format!("\n    }}{comma}\n"));
    }
    out.push_str("  ]\n}\n");
    out
}

fn read_spaces(
    root: &serde_json::Map<String, Value>,
    n_parties: usize,
    field: &str,
) -> Result<Vec<Vec<HiddenLabel>>, FormatError> {
    let arrays = as_array(get(root, field, "document")?, &format!("\"{field}\""))?;
    if arrays.len() != n_parties {
        return Err(FormatError::Structure(format!(
            "\"{field}\" lists {} parties, scenario has {n_parties}",
            arrays.len()
        )));
    }
    arrays
        .iter()
        .enumerate()
        .map(|(party, entry)| {
            let labels = as_array(entry, &format!("{field}[{party}]"))?;
            labels
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let text = as_str(v, &format!("{field}[{party}][{i}]"))?;
                    HiddenLabel::parse(text).ok_or_else(|| {
                        FormatError::Structure(format!(
                            "{field}[{party}][{i}]: invalid label \"{text}\""
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

pub fn read_classical_model(text: &str) -> Result<ClassicalModel, FormatError> {
    let root = parse_json(text)?;
    let root = as_object(&root, "document")?;
    let kind = parse_kind(as_str(get(root, "kind", "document")?, "\"kind\"")?)?;
    let compressed = get(root, "compressed", "document")?
        .as_bool()
        .ok_or_else(|| FormatError::Structure("\"compressed\" must be a boolean".into()))?;
    let scenario = read_scenario(root)?;
    let spaces = read_spaces(root, scenario.n_parties(), "spaces")?;

    // State weights, keyed by label tuples.
    let state_obj = as_object(get(root, "state", "document")?, "\"state\"")?;
    let joint = spaces
        .iter()
        .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128));
    if !matches!(joint, Some(n) if n <= MAX_FILE_ENTRIES) {
        return Err(FormatError::Structure(format!(
            "label spaces describe more than {MAX_FILE_ENTRIES} state entries"
        )));
    }
    let tuple_space =
        crate::scenario::TupleSpace::new(spaces.iter().map(|s| s.len() as u32).collect());
    let expected: Vec<String> = tuple_space.iter().map(|t| state_key(&spaces, &t)).collect();
    let missing: Vec<&String> = expected
        .iter()
        .filter(|k| !state_obj.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(FormatError::Structure(format!(
            "\"state\" is missing label tuples {missing:?}"
        )));
    }
    let unexpected: Vec<&String> = state_obj.keys().filter(|k| !expected.contains(k)).collect();
    if !unexpected.is_empty() {
        return Err(FormatError::Structure(format!(
            "\"state\" has unexpected keys {unexpected:?}"
        )));
    }
    let mut weights = Vec::with_capacity(expected.len());
    for key in &expected {
        weights.push(rational_at(&state_obj[key], format!("state[\"{key}\"]"))?);
    }
    let state = QuasiState::new(spaces.clone(), weights)?;

    // Responses, keyed "a|x,label" per party.
    let responses_arr = as_array(get(root, "responses", "document")?, "\"responses\"")?;
    if responses_arr.len() != scenario.n_parties() {
        return Err(FormatError::Structure(format!(
            "\"responses\" lists {} parties, scenario has {}",
            responses_arr.len(),
            scenario.n_parties()
        )));
    }
    let mut responses = Vec::with_capacity(scenario.n_parties());
    for (party, entry) in responses_arr.iter().enumerate() {
        let table_obj = as_object(entry, &format!("responses[{party}]"))?;
        let outputs = scenario.party_outputs(party);
        let inputs = scenario.party_inputs(party);
        let labels = spaces[party].len();
        let mut entries = Vec::with_capacity(outputs as usize * inputs as usize * labels);
        let mut seen = 0usize;
        for a in 1..=outputs {
            for x in 1..=inputs {
                for label in &spaces[party] {
                    let key = format!("{a}|{x},{label}");
                    let value = table_obj.get(&key).ok_or_else(|| {
                        FormatError::Structure(format!("responses[{party}] is missing \"{key}\""))
                    })?;
                    entries.push(rational_at(
                        value,
                        format!("responses[{party}][\"{key}\"]"),
                    )?);
                    seen += 1;
                }
            }
        }
        if table_obj.len() != seen {
            let expected_keys: Vec<String> = (1..=outputs)
                .flat_map(|a| {
                    let space = &spaces[party];
                    (1..=inputs)
                        .flat_map(move |x| space.iter().map(move |l| format!("{a}|{x},{l}")))
                })
                .collect();
            let unexpected: Vec<&String> = table_obj
                .keys()
                .filter(|k| !expected_keys.contains(k))
                .collect();
            return Err(FormatError::Structure(format!(
                "responses[{party}] has unexpected keys {unexpected:?}"
            )));
        }
        responses.push(ResponseTable::new(party, outputs, inputs, labels, entries)?);
    }

    Ok(ClassicalModel::new(
        scenario, state, responses, kind, compressed,
    )?)
}

// ---------------------------------------------------------------------------
// Quantum model files
// ---------------------------------------------------------------------------

/// Canonical quantum model file: kind, scenario, per-party bases, the
/// joint state diagonal in canonical tuple order, and per-party
/// measurement diagonals keyed `a|x`.
pub fn write_quantum_model(model: &QuantumModel) -> String {
    let scenario = model.scenario();
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"kind\": \"{}\",\n", kind_string(model.kind())));
    out.push_str(&scenario_line(scenario));
    out.push_str(",\n  \"bases\": [\n");
    let bases = model.bases();
    for (party, basis) in bases.iter().enumerate() {
        let labels: Vec<String> = basis.iter().map(|l| format!("\"{l}\"")).collect();
        let comma = if party + 1 < bases.len() { "," } else { "" };
        out.push_str(&format!("    [{}]{}\n", labels.join(", "), comma));
    }
    out.push_str("  ],\n  \"state\": [\n");
    let total = model.state_diag().len();
    for (i, v) in model.state_diag().iter().enumerate() {
        let comma = if i + 1 < total { "," } else { "" };
        out.push_str(&format!("    \"{}\"{}\n", format_rational(v), comma));
    }
    out.push_str("  ],\n  \"measurements\": [\n");
    for party in 0..scenario.n_parties() {
        out.push_str("    {\n");
        let mut lines = Vec::new();
        for x in 1..=scenario.party_inputs(party) {
            for a in 1..=scenario.party_outputs(party) {
                let diag: Vec<String> = model
                    .measurement_diag(party, x, a)
                    .iter()
                    .map(|v| format!("\"{}\"", format_rational(v)))
                    .collect();
                lines.push(format!("      \"{a}|{x}\": [{}]", diag.join(", ")));
            }
        }
        out.push_str(&lines.join(",\n"));
        let comma = if party + 1 < scenario.n_parties() {
            ","
        } else {
            ""
        };
        out.push_str(&format!("\n    }}{comma}\n"));
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn read_quantum_model(text: &str) -> Result<QuantumModel, FormatError> {
    let root = parse_json(text)?;
    let root = as_object(&root, "document")?;
    let kind = parse_kind(as_str(get(root, "kind", "document")?, "\"kind\"")?)?;
    let scenario = read_scenario(root)?;
    let bases = read_spaces(root, scenario.n_parties(), "bases")?;

    let state_arr = as_array(get(root, "state", "document")?, "\"state\"")?;
    let joint = bases
        .iter()
        .try_fold(1u128, |acc, b| acc.checked_mul(b.len() as u128));
    let joint = match joint {
        Some(n) if n <= MAX_FILE_ENTRIES => n as usize,
        _ => {
            return Err(FormatError::Structure(format!(
                "bases describe more than {MAX_FILE_ENTRIES} state entries"
            )));
        }
    };
    if state_arr.len() != joint {
        return Err(FormatError::Structure(format!(
            "\"state\" has {} entries, the joint basis has {joint}",
            state_arr.len()
        )));
    }
    let state = state_arr
        .iter()
        .enumerate()
        .map(|(i, v)| rational_at(v, format!("state[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;

    let meas_arr = as_array(get(root, "measurements", "document")?, "\"measurements\"")?;
    if meas_arr.len() != scenario.n_parties() {
        return Err(FormatError::Structure(format!(
            "\"measurements\" lists {} parties, scenario has {}",
            meas_arr.len(),
            scenario.n_parties()
        )));
    }
    let mut measurements = Vec::with_capacity(scenario.n_parties());
    for (party, entry) in meas_arr.iter().enumerate() {
        let ops_obj = as_object(entry, &format!("measurements[{party}]"))?;
        let outputs = scenario.party_outputs(party);
        let inputs = scenario.party_inputs(party);
        let mut ops = Vec::with_capacity(outputs as usize * inputs as usize);
        for x in 1..=inputs {
            for a in 1..=outputs {
                let key = format!("{a}|{x}");
                let diag_arr = ops_obj.get(&key).ok_or_else(|| {
                    FormatError::Structure(format!("measurements[{party}] is missing \"{key}\""))
                })?;
                let diag_arr = as_array(diag_arr, &format!("measurements[{party}][\"{key}\"]"))?;
                if diag_arr.len() != bases[party].len() {
                    return Err(FormatError::Structure(format!(
                        "measurements[{party}][\"{key}\"] has {} entries, basis has {}",
                        diag_arr.len(),
                        bases[party].len()
                    )));
                }
                let diag = diag_arr
                    .iter()
                    .enumerate()
                    .map(|(i, v)| rational_at(v, format!("measurements[{party}][\"{key}\"][{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                ops.push(diag);
            }
        }
        if ops_obj.len() != ops.len() {
            return Err(FormatError::Structure(format!(
                "measurements[{party}] has {} keys, expected {}",
                ops_obj.len(),
                ops.len()
            )));
        }
        // Push order (x outer, a inner) is the model's operator layout.
        measurements.push(ops);
    }

    Ok(QuantumModel::new(
        scenario,
        bases,
        state,
        measurements,
        kind,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::ClassicalModel;
    use crate::gallery;
    use crate::marginals::canonical_marginals;
    use crate::quantum::QuantumModel;

    #[test]
    fn box_files_round_trip_byte_identically() {
        for quasi in [
            gallery::pr_box().into_quasi(),
            gallery::tsirelson_box().into_quasi(),
            gallery::random_nonsignalling_quasibox(
                &Scenario::new(vec![2, 3], vec![2, 2]).unwrap(),
                5,
            ),
        ] {
            let text = write_box(&quasi);
            let read = read_box(&text).unwrap();
            assert_eq!(read, quasi);
            assert_eq!(write_box(&read), text);
        }
    }

    #[test]
    fn decimal_entries_are_read_exactly() {
        let text = r#"{
            "scenario": {"outputs": [2], "inputs": [1]},
            "probabilities": {"1": ["0.25", "3/4"]}
        }"#;
        let b = read_box(text).unwrap();
        assert_eq!(b.value(&[1], &[1]), &BigRational::new(1.into(), 4.into()));
        assert_eq!(b.value(&[2], &[1]), &BigRational::new(3.into(), 4.into()));
    }

    #[test]
    fn missing_and_extra_input_tuples_are_named() {
        let text = r#"{
            "scenario": {"outputs": [2], "inputs": [2]},
            "probabilities": {"1": ["1/2", "1/2"], "3": ["1/2", "1/2"]}
        }"#;
        let err = read_box(text).unwrap_err();
        let message = err.to_string();
        assert!(message.contains('2'), "missing key named: {message}");
    }

    #[test]
    fn wrong_column_length_is_a_structure_error() {
        let text = r#"{
            "scenario": {"outputs": [2], "inputs": [1]},
            "probabilities": {"1": ["1/2"]}
        }"#;
        assert!(matches!(
            read_box(text).unwrap_err(),
            FormatError::Structure(_)
        ));
    }

    #[test]
    fn json_syntax_errors_carry_position() {
        match read_box("{ not json").unwrap_err() {
            FormatError::Json { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column > 1);
            }
            other => panic!("expected Json error, got {other:?}"),
        }
    }

    #[test]
    fn bad_rational_is_a_value_error_with_location() {
        let text = r#"{
            "scenario": {"outputs": [2], "inputs": [1]},
            "probabilities": {"1": ["1/2", "half"]}
        }"#;
        match read_box(text).unwrap_err() {
            FormatError::Value { location, .. } => {
                assert_eq!(location, "probabilities[\"1\"][1]");
            }
            other => panic!("expected Value error, got {other:?}"),
        }
    }

    #[test]
    fn marginal_tables_round_trip() {
        let pr = gallery::pr_box();
        let table = canonical_marginals(pr.as_quasi()).unwrap();
        let text = write_marginal_table(&table);
        let read = read_marginal_table(&text).unwrap();
        assert_eq!(read, table);
        assert_eq!(write_marginal_table(&read), text);
    }

    #[test]
    fn classical_models_round_trip_for_both_kinds() {
        let pr = gallery::pr_box();
        for model in [
            ClassicalModel::negative_measurements(&pr).unwrap(),
            ClassicalModel::negative_state(&pr).unwrap(),
            ClassicalModel::negative_state(&pr).unwrap().compress(),
        ] {
            let text = write_classical_model(&model);
            let read = read_classical_model(&text).unwrap();
            assert_eq!(read, model);
            assert_eq!(write_classical_model(&read), text);
        }
    }

    #[test]
    fn model_constraint_violations_are_distinguished_from_parse_errors() {
        let pr = gallery::pr_box();
        let model = ClassicalModel::negative_state(&pr).unwrap();
        let good = write_classical_model(&model);
        // Corrupt one state weight: sum is no longer 1.
        let bad = good.replace("\"xi,xi\": \"1/1\"", "\"xi,xi\": \"2/1\"");
        assert_ne!(good, bad);
        let err = read_classical_model(&bad).unwrap_err();
        assert!(err.is_constraint_violation(), "got {err:?}");

        let syntactic = read_classical_model("{").unwrap_err();
        assert!(!syntactic.is_constraint_violation());
    }

    #[test]
    fn quantum_models_round_trip_for_both_kinds() {
        let pr = gallery::pr_box();
        for model in [
            QuantumModel::lift(&ClassicalModel::negative_measurements(&pr).unwrap()),
            QuantumModel::lift(&ClassicalModel::negative_state(&pr).unwrap()),
        ] {
            let text = write_quantum_model(&model);
            let read = read_quantum_model(&text).unwrap();
            assert_eq!(read, model);
            assert_eq!(write_quantum_model(&read), text);
        }
    }

    #[test]
    fn quantum_reader_rejects_wrong_diagonal_lengths() {
        let pr = gallery::pr_box();
        let model = QuantumModel::lift(&ClassicalModel::negative_state(&pr).unwrap());
        let good = write_quantum_model(&model);
        let bad = good.replace(
            "\"1|1\": [\"1/1\", \"0/1\", \"0/1\", \"0/1\", \"0/1\"]",
            "\"1|1\": [\"1/1\", \"0/1\"]",
        );
        assert_ne!(good, bad);
        assert!(matches!(
            read_quantum_model(&bad).unwrap_err(),
            FormatError::Structure(_)
        ));
    }

    #[test]
    fn tuple_keys_parse() {
        assert_eq!(parse_u32_tuple("1,2,3"), Some(vec![1, 2, 3]));
        assert_eq!(parse_u32_tuple(""), Some(vec![]));
        assert_eq!(parse_u32_tuple("1,a"), None);
    }
}
