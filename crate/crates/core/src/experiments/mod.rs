//! Scripted, seeded thought experiments over one system spin and a sequence
//! of apparatus registers.
//!
//! A script names the devices in the order they act. The joint state is
//! `system ⊗ device₁ ⊗ device₂ ⊗ …`; each step touches only the system spin,
//! its own pointer and one reservoir spin, so everything else is padded with
//! identities.

mod anamnesis;
mod chain;
mod special;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use anamnesis::{run_anamnesis, AnamnesisReport, Checkpoint, RecordCheck};
pub use chain::{
    enumerate_branches, ledger_row, momentum, recover_bloch_from_reservoir, run_conservation_chain,
    run_trials, BranchRow, LedgerReport, LedgerRow, Momentum, TrialRecord, TrialStep,
};
pub use special::{
    fold_kick, kick_statistics, score_grid_point, special_state_search, FrequencyTable,
    KickDistribution, KickStatistics, KickTrial, SearchGrid, SpecialStateResult,
};

use crate::apparatus::{exchange_unitary, Exchange, POINTER_DIM};
use crate::apparatus::{
    macrostate, prepare, ApparatusRegister, MacroLabel, ReservoirPrep, DEFAULT_RESERVOIR,
};
use crate::error::{Error, Result};
use crate::linalg::{Operator, StateVector};
use crate::rng::derive_seed;
use crate::scalar::Real;
use crate::schemes::{
    measure_instrumental, measure_standard, premeasurement, unitary_readout, SchemeKind,
};
use crate::spin::{spin_operator, state_from_bloch, Axis, BlochVector};

/// Largest joint-space dimension a script may build.
pub const MAX_DIMENSION: usize = 1 << 22;

/// Default macrostate tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// One measurement in a script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScriptStep<T> {
    pub device: String,
    pub axis: Axis<T>,
    /// Overrides the run-level scheme for this step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeKind<T>>,
    /// Exchange angle for unitary steps; π (full swap) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kick: Option<T>,
    /// Overrides the script-level reservoir preparation for this device.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preparation: Option<ReservoirPrep<T>>,
}

impl<T: Real> ScriptStep<T> {
    pub fn new(device: impl Into<String>, axis: Axis<T>) -> Self {
        Self {
            device: device.into(),
            axis,
            scheme: None,
            kick: None,
            preparation: None,
        }
    }

    pub fn kick_angle(&self) -> T {
        self.kick.unwrap_or_else(T::PI)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ExperimentScript<T> {
    pub steps: Vec<ScriptStep<T>>,
    pub initial_system: BlochVector<T>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reservoir")]
    pub reservoir_size: usize,
    #[serde(default = "default_prep")]
    pub reservoir: ReservoirPrep<T>,
    #[serde(default = "default_tolerance")]
    pub tolerance: T,
}

fn default_reservoir() -> usize {
    DEFAULT_RESERVOIR
}

fn default_prep<T>() -> ReservoirPrep<T> {
    ReservoirPrep::Singlets
}

fn default_tolerance<T: Real>() -> T {
    T::lit(DEFAULT_TOLERANCE)
}

impl<T: Real> ExperimentScript<T> {
    pub fn new(steps: Vec<ScriptStep<T>>, initial_system: BlochVector<T>) -> Self {
        Self {
            steps,
            initial_system,
            seed: 0,
            reservoir_size: DEFAULT_RESERVOIR,
            reservoir: ReservoirPrep::Singlets,
            tolerance: default_tolerance(),
        }
    }

    /// |↑⟩_x measured by devices along x, z, x.
    pub fn canonical_chain() -> Self {
        let h = T::lit(0.5);
        Self::new(
            vec![
                ScriptStep::new("x1", Axis::x()),
                ScriptStep::new("z2", Axis::z()),
                ScriptStep::new("x3", Axis::x()),
            ],
            BlochVector::new(h, T::zero(), T::zero()),
        )
    }

    /// One z measurement of the given pure input.
    pub fn single_z(initial_system: BlochVector<T>) -> Self {
        Self::new(vec![ScriptStep::new("z1", Axis::z())], initial_system)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_reservoir(mut self, size: usize, prep: ReservoirPrep<T>) -> Self {
        self.reservoir_size = size;
        self.reservoir = prep;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.steps.iter().enumerate() {
            if self.steps[..i].iter().any(|p| p.device == s.device) {
                return Err(Error::ConfigError(format!(
                    "device `{}` appears twice",
                    s.device
                )));
            }
            if let Some(k) = s.kick {
                Exchange::new(k, 0)?;
            }
        }
        if !(self.tolerance >= T::zero() && self.tolerance < T::lit(0.5)) {
            return Err(Error::ConfigError(format!(
                "tolerance {} outside [0, 0.5)",
                self.tolerance
            )));
        }
        let device_dim = POINTER_DIM.saturating_mul(
            1usize
                .checked_shl(self.reservoir_size as u32)
                .unwrap_or(usize::MAX),
        );
        let dim = self.steps.iter().try_fold(2usize, |acc, _| {
            acc.checked_mul(device_dim).filter(|&d| d <= MAX_DIMENSION)
        });
        if dim.is_none() {
            return Err(Error::ConfigError(format!(
                "{} devices with {} reservoir spins exceed the dimension cap {MAX_DIMENSION}",
                self.steps.len(),
                self.reservoir_size
            )));
        }
        state_from_bloch(&self.initial_system)?;
        Ok(())
    }

    /// Registers and initial joint state: system, then each device READY.
    pub fn prepare(&self) -> Result<(Vec<ApparatusRegister>, StateVector<T>)> {
        self.validate()?;
        let mut state = state_from_bloch(&self.initial_system)?;
        let mut registers = Vec::with_capacity(self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            let reg = ApparatusRegister::new(step.device.clone(), self.reservoir_size)?;
            let prep = match step.preparation.unwrap_or(self.reservoir) {
                ReservoirPrep::Randomized { seed } => ReservoirPrep::Randomized {
                    seed: derive_seed(seed, i as u64),
                },
                other => other,
            };
            state = state.tensor(&prepare(&reg, &prep)?)?;
            registers.push(reg);
        }
        Ok((registers, state))
    }

    pub(crate) fn scheme_for<'a>(
        &'a self,
        index: usize,
        run: &'a SchemeKind<T>,
    ) -> &'a SchemeKind<T> {
        self.steps[index].scheme.as_ref().unwrap_or(run)
    }
}

/// One classical entry on the server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry<T> {
    pub t: usize,
    pub device: String,
    pub label: MacroLabel,
    pub confidence: T,
}

/// Append-only list of device readings, one per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerRecord<T> {
    entries: Vec<RecordEntry<T>>,
    final_time: usize,
}

impl<T: Real> ServerRecord<T> {
    pub(crate) fn new() -> Self {
        Self {
            entries: Vec::new(),
            final_time: 0,
        }
    }

    pub(crate) fn push(&mut self, device: &str, label: MacroLabel, confidence: T) {
        let t = self.entries.len();
        self.entries.push(RecordEntry {
            t,
            device: device.to_string(),
            label,
            confidence,
        });
        self.final_time = t + 1;
    }

    pub fn entries(&self) -> &[RecordEntry<T>] {
        &self.entries
    }

    pub fn final_time(&self) -> usize {
        self.final_time
    }

    pub fn labels(&self) -> Vec<MacroLabel> {
        self.entries.iter().map(|e| e.label).collect()
    }
}

/// Result of executing one script step.
pub(crate) struct StepOutput<T> {
    pub state: StateVector<T>,
    /// Unitary part of the step, inverted during backward evolution.
    pub unitary: Operator<T>,
    pub label: MacroLabel,
    pub confidence: T,
    /// Born weight of the realized branch, or the readout confidence for
    /// unitary steps.
    pub probability: T,
}

pub(crate) fn execute_step<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    register: &ApparatusRegister,
    step: &ScriptStep<T>,
    scheme: &SchemeKind<T>,
    tolerance: T,
    rng: &mut R,
) -> Result<StepOutput<T>> {
    let obs = spin_operator(&step.axis);
    match scheme {
        SchemeKind::StandardCollapse | SchemeKind::Instrumentalist(_) => {
            let (outcome, post) = match scheme {
                SchemeKind::Instrumentalist(i) => {
                    measure_instrumental(state, &obs, register, i, rng)?
                }
                _ => measure_standard(state, &obs, register, rng)?,
            };
            let ms = macrostate(&post, register, tolerance)?;
            Ok(StepOutput {
                state: post,
                unitary: premeasurement(&obs, register)?,
                label: ms.label,
                confidence: ms.confidence,
                probability: outcome.probability,
            })
        }
        SchemeKind::Unitary => {
            let unitary = exchange_unitary(&Exchange::new(step.kick_angle(), 0)?, register)?;
            let post = unitary.apply(state)?;
            let ms = unitary_readout(&post, &step.axis, register, tolerance)?;
            Ok(StepOutput {
                state: post,
                unitary,
                label: ms.label,
                confidence: ms.confidence,
                probability: ms.confidence,
            })
        }
    }
}

/// The macrostate label a record entry of `step` would carry for `state`.
pub(crate) fn reading<T: Real>(
    state: &StateVector<T>,
    register: &ApparatusRegister,
    step: &ScriptStep<T>,
    scheme: &SchemeKind<T>,
    tolerance: T,
) -> Result<MacroLabel> {
    Ok(match scheme {
        SchemeKind::Unitary => unitary_readout(state, &step.axis, register, tolerance)?.label,
        _ => macrostate(state, register, tolerance)?.label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_validation() {
        let mut s = ExperimentScript::<f64>::canonical_chain();
        assert!(s.validate().is_ok());
        s.steps[2].device = "x1".into();
        assert!(matches!(s.validate(), Err(Error::ConfigError(_))));

        let s =
            ExperimentScript::<f64>::canonical_chain().with_reservoir(8, ReservoirPrep::Singlets);
        assert!(matches!(s.validate(), Err(Error::ConfigError(_))));

        let mut s = ExperimentScript::<f64>::canonical_chain();
        s.initial_system = BlochVector::new(0.1, 0.0, 0.0);
        assert!(matches!(s.validate(), Err(Error::NotPure(_))));

        let mut s = ExperimentScript::<f64>::canonical_chain();
        s.steps[0].kick = Some(4.0);
        assert!(matches!(s.validate(), Err(Error::ConfigError(_))));
    }

    #[test]
    fn prepared_space_layout() {
        let (regs, psi) = ExperimentScript::<f64>::canonical_chain()
            .prepare()
            .unwrap();
        assert_eq!(regs.len(), 3);
        assert_eq!(psi.dim(), 2 * 16 * 16 * 16);
        let labels: Vec<&str> = psi.space().labels().collect();
        assert_eq!(labels[0], "system");
        assert_eq!(labels[1], "x1.pointer");
        assert_eq!(labels[4], "z2.pointer");
    }

    #[test]
    fn script_json_roundtrip() {
        let s = ExperimentScript::<f64>::canonical_chain().with_seed(3);
        let text = serde_json::to_string(&s).unwrap();
        let back: ExperimentScript<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let minimal: ExperimentScript<f64> = serde_json::from_str(
            r#"{"steps":[{"device":"a","axis":[0,0,2]}],"initial_system":{"sx":0.5,"sy":0,"sz":0}}"#,
        )
        .unwrap();
        assert_eq!(minimal.reservoir_size, DEFAULT_RESERVOIR);
        assert_eq!(minimal.steps[0].axis, Axis::z());
    }
}
