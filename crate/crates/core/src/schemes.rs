//! Measurement schemes: projective collapse, purely unitary exchange, and the
//! instrumentalist scheme with a detectable subset and a failure outcome.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::apparatus::{
    branch_projector, classify, exchange_unitary, level_swap, pointer_weights, von_neumann_unitary,
    ApparatusRegister, Exchange, Macrostate, PointerLevel, VonNeumann,
};
use crate::error::{Error, Result};
use crate::linalg::{fidelity, Observable, Operator, StateVector};
use crate::scalar::Real;
use crate::spin::{spin_operator, Axis, Sign};

/// Pointer READY weight below which a device counts as already used.
const READY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Up,
    Down,
    Failed,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Up => "up",
            Outcome::Down => "down",
            Outcome::Failed => "failed",
        }
    }
}

impl From<Sign> for Outcome {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Up => Outcome::Up,
            Sign::Down => Outcome::Down,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome<T> {
    pub label: Outcome,
    /// Born weight of the realized branch.
    pub probability: T,
    pub device: String,
}

/// Detectable eigenvalue subset Λ and the detection tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instrumentalist<T> {
    pub allowed: Vec<Sign>,
    pub tolerance: T,
}

impl<T: Real> Instrumentalist<T> {
    pub fn new(allowed: Vec<Sign>, tolerance: T) -> Result<Self> {
        let s = Self { allowed, tolerance };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.allowed.is_empty() {
            return Err(Error::ConfigError(
                "instrumentalist scheme needs a nonempty detectable set".into(),
            ));
        }
        if !(self.tolerance >= T::zero() && self.tolerance < T::one()) {
            return Err(Error::ConfigError(format!(
                "detection tolerance {} outside [0, 1)",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum SchemeKind<T> {
    StandardCollapse,
    Unitary,
    Instrumentalist(Instrumentalist<T>),
}

impl<T> SchemeKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::StandardCollapse => "standard",
            SchemeKind::Unitary => "unitary",
            SchemeKind::Instrumentalist(_) => "instrumental",
        }
    }
}

pub(crate) fn ensure_ready<T: Real>(
    state: &StateVector<T>,
    register: &ApparatusRegister,
) -> Result<()> {
    let w = pointer_weights(state, register)?;
    if w[PointerLevel::Ready.index()] < T::one() - T::tol(READY_THRESHOLD) {
        return Err(Error::DeviceNotReady(register.label().to_string()));
    }
    Ok(())
}

/// The calibrated von Neumann premeasurement unitary for `obs`.
pub fn premeasurement<T: Real>(
    obs: &Observable<T>,
    register: &ApparatusRegister,
) -> Result<Operator<T>> {
    von_neumann_unitary(obs, &VonNeumann::calibrated_for(obs)?, register)
}

/// Born weights (up, down) of a premeasured joint state.
pub fn branch_weights<T: Real>(
    premeasured: &StateVector<T>,
    obs: &Observable<T>,
    register: &ApparatusRegister,
) -> Result<[T; 2]> {
    let w = |s| -> Result<T> {
        Ok(branch_projector(obs, register, s)?
            .sandwich(premeasured)?
            .re)
    };
    Ok([w(Sign::Up)?, w(Sign::Down)?])
}

/// Projects onto the joint (system ⊗ pointer) branch `sign` and renormalizes.
/// `None` when the branch carries no weight.
pub fn project_branch<T: Real>(
    premeasured: &StateVector<T>,
    obs: &Observable<T>,
    register: &ApparatusRegister,
    sign: Sign,
) -> Result<Option<(T, StateVector<T>)>> {
    let proj = branch_projector(obs, register, sign)?;
    let weight = proj.sandwich(premeasured)?.re;
    if weight <= T::tol(1e-14) {
        return Ok(None);
    }
    Ok(Some((weight, proj.apply_normalized(premeasured)?)))
}

/// Draws Up with probability w_up / (w_up + w_down) from one uniform variate.
pub fn sample_sign<T: Real, R: Rng + ?Sized>(weights: [T; 2], rng: &mut R) -> Sign {
    let u = T::lit(rng.random::<f64>());
    let total = weights[0] + weights[1];
    if u * total < weights[0] {
        Sign::Up
    } else {
        Sign::Down
    }
}

/// Premeasurement followed by Born-rule projection onto the joint branch.
pub fn measure_standard<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    obs: &Observable<T>,
    register: &ApparatusRegister,
    rng: &mut R,
) -> Result<(MeasurementOutcome<T>, StateVector<T>)> {
    ensure_ready(state, register)?;
    let pre = premeasurement(obs, register)?.apply(state)?;
    let weights = branch_weights(&pre, obs, register)?;
    let sign = sample_sign(weights, rng);
    let (probability, post) =
        project_branch(&pre, obs, register, sign)?.expect("sampled branch has positive weight");
    let outcome = MeasurementOutcome {
        label: sign.into(),
        probability,
        device: register.label().to_string(),
    };
    Ok((outcome, post))
}

/// Angular-momentum exchange with the device reservoir and nothing else.
pub fn measure_unitary<T: Real>(
    state: &StateVector<T>,
    register: &ApparatusRegister,
    model: &Exchange<T>,
) -> Result<StateVector<T>> {
    exchange_unitary(model, register)?.apply(state)
}

/// Calibrated pointer write-out of the system spin along `axis`.
pub fn write_pointer<T: Real>(
    state: &StateVector<T>,
    axis: &Axis<T>,
    register: &ApparatusRegister,
) -> Result<StateVector<T>> {
    premeasurement(&spin_operator(axis), register)?.apply(state)
}

/// What a READY device along `axis` would display if coupled now. The state
/// itself is not advanced.
pub fn unitary_readout<T: Real>(
    state: &StateVector<T>,
    axis: &Axis<T>,
    register: &ApparatusRegister,
    tolerance: T,
) -> Result<Macrostate<T>> {
    let written = write_pointer(state, axis, register)?;
    Ok(classify(pointer_weights(&written, register)?, tolerance))
}

/// Instrumentalist measurement: Born sampling over all branches; outcomes
/// outside Λ, or detections further than `tolerance` from an eigenstate,
/// leave the pointer at FAILED with the undetected branch as post-state.
pub fn measure_instrumental<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    obs: &Observable<T>,
    register: &ApparatusRegister,
    scheme: &Instrumentalist<T>,
    rng: &mut R,
) -> Result<(MeasurementOutcome<T>, StateVector<T>)> {
    scheme.validate()?;
    ensure_ready(state, register)?;
    let pre = premeasurement(obs, register)?.apply(state)?;
    let weights = branch_weights(&pre, obs, register)?;
    let sign = sample_sign(weights, rng);
    let (probability, post) =
        project_branch(&pre, obs, register, sign)?.expect("sampled branch has positive weight");
    let detected = scheme.allowed.contains(&sign) && {
        let eig = eigenprojector(obs, sign)?;
        eig.sandwich(&post)?.re >= T::one() - scheme.tolerance
    };
    let device = register.label().to_string();
    if detected {
        return Ok((
            MeasurementOutcome {
                label: sign.into(),
                probability,
                device,
            },
            post,
        ));
    }
    let level = match sign {
        Sign::Up => PointerLevel::Up,
        Sign::Down => PointerLevel::Down,
    };
    let failed = level_swap(register, level, PointerLevel::Failed).apply(&post)?;
    Ok((
        MeasurementOutcome {
            label: Outcome::Failed,
            probability,
            device,
        },
        failed,
    ))
}

fn eigenprojector<T: Real>(obs: &Observable<T>, sign: Sign) -> Result<Operator<T>> {
    let spaces = obs.eigenspaces(T::tol(1e-9));
    let idx = match sign {
        Sign::Up => spaces.len() - 1,
        Sign::Down => 0,
    };
    Ok(spaces[idx].projector.clone())
}

/// |⟨ψ₁|ψ₂⟩|²
pub fn born_probability<T: Real>(pre: &StateVector<T>, post: &StateVector<T>) -> Result<T> {
    fidelity(pre, post)
}

/// Joint-branch post-state fidelity with its system eigenstate, used by
/// checks on eigenstate inputs.
pub fn system_fidelity<T: Real>(state: &StateVector<T>, reference: &StateVector<T>) -> Result<T> {
    let labels: Vec<&str> = reference.space().labels().collect();
    crate::linalg::partial_trace(state, &labels)?.fidelity_with(reference)
}
