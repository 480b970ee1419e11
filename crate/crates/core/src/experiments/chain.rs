//! Conservation ledger for measurement chains.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{execute_step, ExperimentScript, ServerRecord};
use crate::apparatus::{reservoir_momentum, ApparatusRegister, MacroLabel};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, StateVector};
use crate::rng::{derive_seed, seeded};
use crate::scalar::Real;
use crate::schemes::{premeasurement, project_branch, SchemeKind};
use crate::spin::{bloch_vector_of, spin_operator, BlochVector, Sign, SYSTEM};

/// ⟨J⟩ split into the system spin and each device reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Momentum<T> {
    pub total: BlochVector<T>,
    pub system: BlochVector<T>,
    pub devices: Vec<BlochVector<T>>,
}

impl<T: Real> Momentum<T> {
    fn minus(&self, base: &Momentum<T>) -> Momentum<T> {
        Momentum {
            total: self.total - base.total,
            system: self.system - base.system,
            devices: self
                .devices
                .iter()
                .zip(&base.devices)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

pub fn momentum<T: Real>(
    state: &StateVector<T>,
    registers: &[ApparatusRegister],
) -> Result<Momentum<T>> {
    let system = bloch_vector_of(&partial_trace(state, &[SYSTEM])?)?;
    let devices = registers
        .iter()
        .map(|r| reservoir_momentum(state, r))
        .collect::<Result<Vec<_>>>()?;
    let total = devices.iter().fold(system, |acc, d| acc + *d);
    Ok(Momentum {
        total,
        system,
        devices,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow<T> {
    pub step: usize,
    /// Device that acted to reach this row; absent for the initial row.
    pub device: Option<String>,
    pub label: Option<MacroLabel>,
    pub probability: Option<T>,
    pub momentum: Momentum<T>,
    pub delta: Momentum<T>,
}

pub fn ledger_row<T: Real>(
    step: usize,
    state: &StateVector<T>,
    registers: &[ApparatusRegister],
    base: Option<&Momentum<T>>,
) -> Result<LedgerRow<T>> {
    let m = momentum(state, registers)?;
    let delta = m.minus(base.unwrap_or(&m));
    Ok(LedgerRow {
        step,
        device: None,
        label: None,
        probability: None,
        momentum: m,
        delta,
    })
}

/// Exact Born weight and momentum change of one outcome sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow<T> {
    pub outcomes: Vec<Sign>,
    pub weight: T,
    /// Absent for branches of zero weight.
    pub delta: Option<Momentum<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport<T> {
    pub scheme: String,
    pub rows: Vec<LedgerRow<T>>,
    /// Exhaustive outcome enumeration; filled for collapse runs only.
    pub branches: Vec<BranchRow<T>>,
    /// max over rows and k of |Δ⟨J_k^total⟩|.
    pub max_delta: T,
}

fn max_component<T: Real>(b: &BlochVector<T>) -> T {
    b.max_abs_diff(&BlochVector::zero())
}

/// Runs `script` once under `scheme`, recording ⟨J⟩ after every step.
pub fn run_conservation_chain<T: Real, R: Rng + ?Sized>(
    script: &ExperimentScript<T>,
    scheme: &SchemeKind<T>,
    rng: &mut R,
) -> Result<(LedgerReport<T>, ServerRecord<T>)> {
    let (registers, mut state) = script.prepare()?;
    let first = ledger_row(0, &state, &registers, None)?;
    let base = first.momentum.clone();
    let mut rows = vec![first];
    let mut record = ServerRecord::new();
    for (i, (step, reg)) in script.steps.iter().zip(&registers).enumerate() {
        let out = execute_step(
            &state,
            reg,
            step,
            script.scheme_for(i, scheme),
            script.tolerance,
            rng,
        )?;
        state = out.state;
        record.push(&step.device, out.label, out.confidence);
        let mut row = ledger_row(i + 1, &state, &registers, Some(&base))?;
        row.device = Some(step.device.clone());
        row.label = Some(out.label);
        row.probability = Some(out.probability);
        rows.push(row);
    }
    let max_delta = rows
        .iter()
        .map(|r| max_component(&r.delta.total))
        .fold(T::zero(), T::max);
    let collapse = script
        .steps
        .iter()
        .enumerate()
        .all(|(i, _)| matches!(script.scheme_for(i, scheme), SchemeKind::StandardCollapse));
    let branches = if collapse && !script.steps.is_empty() {
        enumerate_branches(script)?
    } else {
        Vec::new()
    };
    Ok((
        LedgerReport {
            scheme: scheme.name().to_string(),
            rows,
            branches,
            max_delta,
        },
        record,
    ))
}

/// All 2ⁿ outcome sequences of a collapse-only script with exact weights,
/// in lexicographic order with Up first.
pub fn enumerate_branches<T: Real>(script: &ExperimentScript<T>) -> Result<Vec<BranchRow<T>>> {
    let (registers, state) = script.prepare()?;
    let base = momentum(&state, &registers)?;
    let mut out = Vec::with_capacity(1 << script.steps.len());
    descend(
        script,
        &registers,
        &base,
        Some(state),
        T::one(),
        &mut Vec::new(),
        &mut out,
    )?;
    Ok(out)
}

fn descend<T: Real>(
    script: &ExperimentScript<T>,
    registers: &[ApparatusRegister],
    base: &Momentum<T>,
    state: Option<StateVector<T>>,
    weight: T,
    prefix: &mut Vec<Sign>,
    out: &mut Vec<BranchRow<T>>,
) -> Result<()> {
    let k = prefix.len();
    if k == script.steps.len() {
        let delta = match &state {
            Some(s) => Some(momentum(s, registers)?.minus(base)),
            None => None,
        };
        out.push(BranchRow {
            outcomes: prefix.clone(),
            weight,
            delta,
        });
        return Ok(());
    }
    let obs = spin_operator(&script.steps[k].axis);
    let pre = match &state {
        Some(s) => Some(premeasurement(&obs, &registers[k])?.apply(s)?),
        None => None,
    };
    for sign in [Sign::Up, Sign::Down] {
        let next = match &pre {
            Some(p) => project_branch(p, &obs, &registers[k], sign)?,
            None => None,
        };
        let (w, s) = match next {
            Some((w, s)) => (weight * w, Some(s)),
            None => (T::zero(), None),
        };
        prefix.push(sign);
        descend(script, registers, base, s, w, prefix, out)?;
        prefix.pop();
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStep<T> {
    pub step: usize,
    pub device: String,
    pub label: MacroLabel,
    pub probability: T,
    /// Δ⟨J^total⟩ after this step, when the ledger was requested.
    pub delta: Option<BlochVector<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord<T> {
    pub index: u64,
    pub seed: u64,
    pub steps: Vec<TrialStep<T>>,
}

impl<T> TrialRecord<T> {
    pub fn labels(&self) -> Vec<MacroLabel> {
        self.steps.iter().map(|s| s.label).collect()
    }
}

/// `trials` independent runs. Trial `i` draws from a generator seeded with
/// `derive_seed(base_seed, i)`; results come back ordered by index whatever
/// the scheduling.
pub fn run_trials<T: Real>(
    script: &ExperimentScript<T>,
    scheme: &SchemeKind<T>,
    trials: u64,
    base_seed: u64,
    with_ledger: bool,
) -> Result<Vec<TrialRecord<T>>> {
    if trials == 0 {
        return Err(Error::ConfigError("trials must be at least 1".into()));
    }
    let (registers, initial) = script.prepare()?;
    let base = if with_ledger {
        Some(momentum(&initial, &registers)?)
    } else {
        None
    };
    (0..trials)
        .into_par_iter()
        .map(|index| {
            let seed = derive_seed(base_seed, index);
            let mut rng = seeded(seed);
            let mut state = initial.clone();
            let mut steps = Vec::with_capacity(script.steps.len());
            for (i, (step, reg)) in script.steps.iter().zip(&registers).enumerate() {
                let out = execute_step(
                    &state,
                    reg,
                    step,
                    script.scheme_for(i, scheme),
                    script.tolerance,
                    &mut rng,
                )?;
                state = out.state;
                let delta = match &base {
                    Some(b) => Some(momentum(&state, &registers)?.total - b.total),
                    None => None,
                };
                steps.push(TrialStep {
                    step: i + 1,
                    device: step.device.clone(),
                    label: out.label,
                    probability: out.probability,
                    delta,
                });
            }
            Ok(TrialRecord { index, seed, steps })
        })
        .collect()
}

/// Bloch vector of reservoir spin `target` of `register`. After a full swap
/// this is the system's pre-measurement Bloch vector.
pub fn recover_bloch_from_reservoir<T: Real>(
    post_state: &StateVector<T>,
    register: &ApparatusRegister,
    target: usize,
) -> Result<BlochVector<T>> {
    bloch_vector_of(&partial_trace(
        post_state,
        &[register.reservoir_label(target)],
    )?)
}
