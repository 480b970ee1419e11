//! Forward run with checkpoints, then backward unitary reconstruction.

use serde::{Deserialize, Serialize};

use super::{execute_step, reading, ExperimentScript, ServerRecord};
use crate::apparatus::MacroLabel;
use crate::error::Result;
use crate::linalg::{fidelity, StateVector};
use crate::rng::seeded;
use crate::scalar::Real;
use crate::schemes::SchemeKind;

/// Fidelity floor for a checkpoint to count as reproduced.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;

/// |⟨reconstructed(t)|forward(t)⟩|² for the state before step `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<T> {
    pub t: usize,
    pub fidelity: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordCheck {
    pub t: usize,
    pub device: String,
    pub recorded: MacroLabel,
    pub reconstructed: MacroLabel,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnamnesisReport<T> {
    pub scheme: String,
    pub checkpoints: Vec<Checkpoint<T>>,
    pub records: Vec<RecordCheck>,
    /// Earliest checkpoint whose fidelity falls below 1 − 1e-10.
    pub first_inconsistency: Option<Checkpoint<T>>,
    pub consistent: bool,
    pub record: ServerRecord<T>,
}

/// Runs `script` forward under `scheme` (sampling from `script.seed`), then
/// applies the inverse of each step's unitary part to the final state.
pub fn run_anamnesis<T: Real>(
    script: &ExperimentScript<T>,
    scheme: &SchemeKind<T>,
) -> Result<AnamnesisReport<T>> {
    let (registers, mut state) = script.prepare()?;
    let mut rng = seeded(script.seed);
    let mut forward: Vec<StateVector<T>> = Vec::with_capacity(script.steps.len());
    let mut unitaries = Vec::with_capacity(script.steps.len());
    let mut record = ServerRecord::new();
    for (i, (step, reg)) in script.steps.iter().zip(&registers).enumerate() {
        let out = execute_step(
            &state,
            reg,
            step,
            script.scheme_for(i, scheme),
            script.tolerance,
            &mut rng,
        )?;
        forward.push(std::mem::replace(&mut state, out.state));
        unitaries.push(out.unitary);
        record.push(&step.device, out.label, out.confidence);
    }

    // backward[t] is the reconstruction of the state before step t
    let n = script.steps.len();
    let mut backward: Vec<StateVector<T>> = Vec::with_capacity(n);
    let mut current = state.clone();
    for u in unitaries.iter().rev() {
        current = u.adjoint().apply(&current)?;
        backward.push(current.clone());
    }
    backward.reverse();

    let floor = T::one() - T::lit(RECONSTRUCTION_TOLERANCE);
    let checkpoints = forward
        .iter()
        .zip(&backward)
        .enumerate()
        .map(|(t, (f, b))| {
            Ok(Checkpoint {
                t,
                fidelity: fidelity(f, b)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first_inconsistency = checkpoints.iter().find(|c| c.fidelity < floor).copied();

    let mut records = Vec::with_capacity(n);
    for (entry, (i, (step, reg))) in record
        .entries()
        .iter()
        .zip(script.steps.iter().zip(&registers).enumerate())
    {
        // the entry written by step i describes the state after it
        let after = if i + 1 < n { &backward[i + 1] } else { &state };
        let reconstructed = reading(
            after,
            reg,
            step,
            script.scheme_for(i, scheme),
            script.tolerance,
        )?;
        records.push(RecordCheck {
            t: entry.t,
            device: entry.device.clone(),
            recorded: entry.label,
            reconstructed,
            consistent: reconstructed == entry.label,
        });
    }
    let consistent = first_inconsistency.is_none() && records.iter().all(|r| r.consistent);
    Ok(AnamnesisReport {
        scheme: scheme.name().to_string(),
        checkpoints,
        records,
        first_inconsistency,
        consistent,
        record,
    })
}
