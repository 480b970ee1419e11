//! Measurement devices as quantum registers.
//!
//! A register is a four-level pointer qudit plus `m` spin-½ reservoir factors
//! that can absorb angular momentum. Its macrostate is read from the pointer
//! populations alone; the reservoir microstate is invisible at that level.
//!
//! The pointer levels sit on a ring in the order READY → UP → FAILED → DOWN,
//! so one step of the cyclic translation moves READY to UP and one step back
//! moves READY to DOWN. FAILED is opposite READY and is never reached by a
//! calibrated von Neumann coupling.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    partial_trace, real_scale, sum_embedded, HilbertSpace, Matrix, Observable, Operator,
    StateVector,
};
use crate::rng::seeded;
use crate::scalar::{c, cr, Real, C};
use crate::spin::{
    axis_eigenstate_on, bloch_vector_of, spin_component, spin_matrix, Axis, BlochVector, Sign,
    SYSTEM,
};

pub const POINTER_DIM: usize = 4;
pub const MAX_RESERVOIR: usize = 8;
pub const DEFAULT_RESERVOIR: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointerLevel {
    Ready = 0,
    Up = 1,
    Down = 2,
    Failed = 3,
}

impl PointerLevel {
    pub const ALL: [PointerLevel; 4] = [
        PointerLevel::Ready,
        PointerLevel::Up,
        PointerLevel::Down,
        PointerLevel::Failed,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Pointer level index at each ring position 0..4.
const RING: [usize; 4] = [0, 1, 3, 2];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApparatusRegister {
    label: String,
    reservoir: usize,
}

impl ApparatusRegister {
    pub fn new(label: impl Into<String>, reservoir: usize) -> Result<Self> {
        let label = label.into();
        if !reservoir.is_multiple_of(2) {
            return Err(Error::ReservoirParity(reservoir));
        }
        if reservoir > MAX_RESERVOIR {
            return Err(Error::ConfigError(format!(
                "reservoir size {reservoir} exceeds {MAX_RESERVOIR}"
            )));
        }
        if label.is_empty() || label == SYSTEM {
            return Err(Error::ConfigError(format!(
                "invalid device label `{label}`"
            )));
        }
        Ok(Self { label, reservoir })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn reservoir_size(&self) -> usize {
        self.reservoir
    }

    pub fn pointer_label(&self) -> String {
        format!("{}.pointer", self.label)
    }

    pub fn reservoir_label(&self, i: usize) -> String {
        format!("{}.r{}", self.label, i)
    }

    pub fn reservoir_labels(&self) -> Vec<String> {
        (0..self.reservoir)
            .map(|i| self.reservoir_label(i))
            .collect()
    }

    pub fn space(&self) -> HilbertSpace {
        let mut factors = vec![(self.pointer_label(), POINTER_DIM)];
        factors.extend(self.reservoir_labels().into_iter().map(|l| (l, 2)));
        HilbertSpace::new(factors).expect("distinct labels")
    }

    pub fn pointer_space(&self) -> HilbertSpace {
        HilbertSpace::single(self.pointer_label(), POINTER_DIM).expect("nonempty label")
    }
}

/// How the reservoir of a READY device is prepared. Every variant has
/// ⟨J_k⟩ = 0 for all k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum ReservoirPrep<T> {
    /// Product of singlets on pairs (r0, r1), (r2, r3), …
    Singlets,
    /// Each pair in cos α|S⟩ + e^{iβ} sin α|T₀⟩_n with random α, β, n, plus a
    /// random global phase. |T₀⟩_n is the zero-projection triplet along n.
    Randomized { seed: u64 },
    /// r0 in |sign⟩_n, r1 in the opposite state, remaining pairs singlets.
    Aligned { axis: Axis<T>, sign: Sign },
}

fn pair_space(register: &ApparatusRegister, pair: usize) -> HilbertSpace {
    HilbertSpace::new([
        (register.reservoir_label(2 * pair), 2),
        (register.reservoir_label(2 * pair + 1), 2),
    ])
    .expect("distinct labels")
}

fn singlet<T: Real>(space: HilbertSpace) -> StateVector<T> {
    let z = C::new(T::zero(), T::zero());
    StateVector::from_amplitudes(space, vec![z, cr(T::one()), cr(-T::one()), z]).expect("nonzero")
}

fn oriented_pair<T: Real>(space: &HilbertSpace, axis: &Axis<T>, first: Sign) -> StateVector<T> {
    let labels: Vec<&str> = space.labels().collect();
    axis_eigenstate_on(axis, first, labels[0])
        .tensor(&axis_eigenstate_on(axis, first.flipped(), labels[1]))
        .expect("distinct labels")
}

fn randomized_pair<T: Real, R: Rng>(space: HilbertSpace, rng: &mut R) -> StateVector<T> {
    let axis = Axis::<T>::new(crate::linalg::random::random_unit_vector::<T, R>(rng))
        .expect("unit vector");
    let alpha = T::lit(rng.random::<f64>() * PI / 2.0);
    let beta = T::lit(rng.random::<f64>() * 2.0 * PI);
    let s = singlet::<T>(space.clone());
    let ud = oriented_pair(&space, &axis, Sign::Up);
    let du = oriented_pair(&space, &axis, Sign::Down);
    let (sb, cb) = beta.sin_cos();
    let weight = C::new(cb, sb) * cr(alpha.sin() * T::FRAC_1_SQRT_2());
    let amps = s
        .amplitudes()
        .iter()
        .zip(ud.amplitudes().iter().zip(du.amplitudes()))
        .map(|(a, (u, d)): (&C<T>, (&C<T>, &C<T>))| *a * cr(alpha.cos()) + (*u + *d) * weight)
        .collect();
    StateVector::from_amplitudes(space, amps).expect("nonzero superposition")
}

/// READY state of `register` with the given reservoir preparation.
pub fn prepare<T: Real>(
    register: &ApparatusRegister,
    prep: &ReservoirPrep<T>,
) -> Result<StateVector<T>> {
    let mut state = StateVector::basis(register.pointer_space(), PointerLevel::Ready.index())?;
    let pairs = register.reservoir_size() / 2;
    match prep {
        ReservoirPrep::Singlets => {
            for p in 0..pairs {
                state = state.tensor(&singlet(pair_space(register, p)))?;
            }
        }
        ReservoirPrep::Randomized { seed } => {
            let mut rng = seeded(*seed);
            for p in 0..pairs {
                state = state.tensor(&randomized_pair(pair_space(register, p), &mut rng))?;
            }
            let phase = T::lit(rng.random::<f64>() * 2.0 * PI);
            let (s, c) = phase.sin_cos();
            state = state.with_phase(C::new(c, s));
        }
        ReservoirPrep::Aligned { axis, sign } => {
            if pairs == 0 {
                return Err(Error::ConfigError(
                    "aligned preparation needs a reservoir".into(),
                ));
            }
            state = state.tensor(&oriented_pair(&pair_space(register, 0), axis, *sign))?;
            for p in 1..pairs {
                state = state.tensor(&singlet(pair_space(register, p)))?;
            }
        }
    }
    Ok(state)
}

/// READY device of `m` reservoir spins: plain singlets without a seed,
/// otherwise a seeded zero-momentum microstate.
pub fn prepare_ready<T: Real>(
    label: &str,
    m: usize,
    rng_seed: Option<u64>,
) -> Result<(ApparatusRegister, StateVector<T>)> {
    let register = ApparatusRegister::new(label, m)?;
    let prep = match rng_seed {
        None => ReservoirPrep::Singlets,
        Some(seed) => ReservoirPrep::Randomized { seed },
    };
    let state = prepare(&register, &prep)?;
    Ok((register, state))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MacroLabel {
    Ready,
    Up,
    Down,
    Failed,
    Superposed,
}

impl MacroLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            MacroLabel::Ready => "ready",
            MacroLabel::Up => "up",
            MacroLabel::Down => "down",
            MacroLabel::Failed => "failed",
            MacroLabel::Superposed => "superposed",
        }
    }

    fn from_level(level: PointerLevel) -> Self {
        match level {
            PointerLevel::Ready => MacroLabel::Ready,
            PointerLevel::Up => MacroLabel::Up,
            PointerLevel::Down => MacroLabel::Down,
            PointerLevel::Failed => MacroLabel::Failed,
        }
    }
}

impl std::fmt::Display for MacroLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coarse-grained reading of a device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Macrostate<T> {
    pub label: MacroLabel,
    /// Weight of the dominant pointer level.
    pub confidence: T,
    /// Pointer populations indexed by [`PointerLevel`].
    pub weights: [T; 4],
}

/// Pointer populations of `register` within `state`, by partial trace.
pub fn pointer_weights<T: Real>(
    state: &StateVector<T>,
    register: &ApparatusRegister,
) -> Result<[T; 4]> {
    let rho = partial_trace(state, &[register.pointer_label()])?;
    // rounding can push a population a few ulps outside [0, 1]
    let p: Vec<T> = rho
        .populations()
        .into_iter()
        .map(|w| w.max(T::zero()).min(T::one()))
        .collect();
    Ok([p[0], p[1], p[2], p[3]])
}

pub fn macrostate<T: Real>(
    state: &StateVector<T>,
    register: &ApparatusRegister,
    tolerance: T,
) -> Result<Macrostate<T>> {
    let weights = pointer_weights(state, register)?;
    Ok(classify(weights, tolerance))
}

pub(crate) fn classify<T: Real>(weights: [T; 4], tolerance: T) -> Macrostate<T> {
    let (dominant, confidence) = PointerLevel::ALL
        .iter()
        .map(|&l| (l, weights[l.index()]))
        .fold((PointerLevel::Ready, T::neg_infinity()), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    let label = if confidence >= T::one() - tolerance {
        MacroLabel::from_level(dominant)
    } else {
        MacroLabel::Superposed
    };
    Macrostate {
        label,
        confidence,
        weights,
    }
}

/// Same definite macrostate label. `Superposed` is never equivalent to
/// anything, itself included.
pub fn macro_equivalent<T: Real>(
    a: &StateVector<T>,
    b: &StateVector<T>,
    register: &ApparatusRegister,
    tolerance: T,
) -> Result<bool> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch(format!(
            "{} vs {}",
            a.space(),
            b.space()
        )));
    }
    let la = macrostate(a, register, tolerance)?.label;
    let lb = macrostate(b, register, tolerance)?.label;
    Ok(la == lb && la != MacroLabel::Superposed)
}

/// Sum of reservoir spin expectations of `register`.
pub fn reservoir_momentum<T: Real>(
    state: &StateVector<T>,
    register: &ApparatusRegister,
) -> Result<BlochVector<T>> {
    register
        .reservoir_labels()
        .iter()
        .try_fold(BlochVector::zero(), |acc, l| {
            Ok(acc + bloch_vector_of(&partial_trace(state, &[l])?)?)
        })
}

/// Rectangular-pulse coupling g·Ô⊗P_d active for `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VonNeumann<T> {
    coupling: T,
    duration: T,
}

impl<T: Real> VonNeumann<T> {
    pub fn new(coupling: T, duration: T) -> Result<Self> {
        if !(duration > T::zero()) || !coupling.is_finite() || !duration.is_finite() {
            return Err(Error::ConfigError(
                "von Neumann pulse needs a finite coupling and positive duration".into(),
            ));
        }
        Ok(Self { coupling, duration })
    }

    /// Unit-duration pulse whose strength maps eigenvalues ±c to one pointer
    /// step up or down.
    pub fn calibrated_for(obs: &Observable<T>) -> Result<Self> {
        let (_, hi) = two_level_spectrum(obs)?;
        Self::new(T::one() / hi, T::one())
    }

    pub fn coupling(&self) -> T {
        self.coupling
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    /// g·τ, the only quantity the rectangular pulse exposes.
    pub fn strength(&self) -> T {
        self.coupling * self.duration
    }

    /// g(t) for a pulse starting at t = 0.
    pub fn coupling_at(&self, t: T) -> T {
        if t >= T::zero() && t < self.duration {
            self.coupling
        } else {
            T::zero()
        }
    }
}

/// −μ S·B on the system spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinField<T> {
    pub mu: T,
    pub field: [T; 3],
}

impl<T: Real> SpinField<T> {
    pub fn new(mu: T, field: [T; 3]) -> Result<Self> {
        if !mu.is_finite() || field.iter().any(|b| !b.is_finite()) {
            return Err(Error::ConfigError(
                "spin-field model needs finite μ and B".into(),
            ));
        }
        Ok(Self { mu, field })
    }

    pub fn hamiltonian(&self) -> Operator<T> {
        let m = spin_matrix(self.field);
        let op = Operator::new(HilbertSpace::single(SYSTEM, 2).expect("label"), m).expect("2x2");
        real_scale(&op, -self.mu)
    }
}

/// Heisenberg partial swap exp(−iθ S_sys·S_res) with one reservoir spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exchange<T> {
    theta: T,
    reservoir_target: usize,
}

impl<T: Real> Exchange<T> {
    pub fn new(theta: T, reservoir_target: usize) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::PI()) {
            return Err(Error::ConfigError(format!(
                "kick angle {theta} outside [0, π]"
            )));
        }
        Ok(Self {
            theta,
            reservoir_target,
        })
    }

    pub fn full_swap() -> Self {
        Self {
            theta: T::PI(),
            reservoir_target: 0,
        }
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn reservoir_target(&self) -> usize {
        self.reservoir_target
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum InteractionModel<T> {
    VonNeumann(VonNeumann<T>),
    SpinField(SpinField<T>),
    Exchange(Exchange<T>),
}

/// (λ_min, λ_max) of an observable with exactly two eigenvalues ±c.
fn two_level_spectrum<T: Real>(obs: &Observable<T>) -> Result<(T, T)> {
    let spaces = obs.eigenspaces(T::tol(1e-9));
    if spaces.len() != 2 {
        return Err(Error::CalibrationError(format!(
            "pointer coupling needs two distinct eigenvalues, found {}",
            spaces.len()
        )));
    }
    let (lo, hi) = (spaces[0].value, spaces[1].value);
    if !(hi > T::zero()) || (lo + hi).abs() > T::tol(1e-9) * hi.abs().max(T::one()) {
        return Err(Error::CalibrationError(format!(
            "eigenvalues {lo} and {hi} are not symmetric about zero"
        )));
    }
    Ok((lo, hi))
}

/// Generator of the cyclic pointer translation: exp(−i P_d) moves every level
/// one ring position forward (READY → UP → FAILED → DOWN → READY).
pub fn pointer_momentum<T: Real>(register: &ApparatusRegister) -> Operator<T> {
    // Fourier modes f_k(pos) = e^{2πi k pos/4}/2 with momenta 0, π/2, π, −π/2.
    let momenta = [0.0, PI / 2.0, PI, -PI / 2.0];
    let mut m = Matrix::<T>::zeros(POINTER_DIM, POINTER_DIM);
    for (k, p) in momenta.iter().enumerate() {
        let mode: Vec<C<T>> = (0..POINTER_DIM)
            .map(|level| {
                let pos = RING
                    .iter()
                    .position(|&l| l == level)
                    .expect("ring covers levels");
                let phase = 2.0 * PI * (k * pos) as f64 / POINTER_DIM as f64;
                c(0.5 * phase.cos(), 0.5 * phase.sin())
            })
            .collect();
        m = &m + &Matrix::outer(&mode, &mode).scale(cr(T::lit(*p)));
    }
    Operator::new(register.pointer_space(), m).expect("4x4 on the pointer")
}

/// exp(−i·g·τ·Ô⊗P_d) on (observed factor ⊗ pointer).
pub fn von_neumann_unitary<T: Real>(
    obs: &Observable<T>,
    model: &VonNeumann<T>,
    register: &ApparatusRegister,
) -> Result<Operator<T>> {
    let (lo, hi) = two_level_spectrum(obs)?;
    let gt = model.strength();
    let tol = T::tol(1e-9);
    if (gt * hi - T::one()).abs() > tol || (gt * lo + T::one()).abs() > tol {
        return Err(Error::CalibrationError(format!(
            "g·τ = {gt} does not map eigenvalues ({lo}, {hi}) to single pointer steps"
        )));
    }
    let h = obs.operator().tensor(&pointer_momentum(register))?;
    real_scale(&h, gt).propagator(T::one())
}

/// Projector onto (eigenspace of `outcome`) ⊗ |level⟩⟨level| for a calibrated
/// two-outcome observable. `Up` is the larger eigenvalue.
pub fn branch_projector<T: Real>(
    obs: &Observable<T>,
    register: &ApparatusRegister,
    sign: Sign,
) -> Result<Operator<T>> {
    let spaces = obs.eigenspaces(T::tol(1e-9));
    if spaces.len() != 2 {
        return Err(Error::CalibrationError(
            "two-outcome observable required".into(),
        ));
    }
    let (eig, level) = match sign {
        Sign::Up => (&spaces[1], PointerLevel::Up),
        Sign::Down => (&spaces[0], PointerLevel::Down),
    };
    eig.projector.tensor(&level_projector(register, level))
}

pub fn level_projector<T: Real>(register: &ApparatusRegister, level: PointerLevel) -> Operator<T> {
    let mut m = Matrix::zeros(POINTER_DIM, POINTER_DIM);
    m[(level.index(), level.index())] = cr(T::one());
    Operator::new(register.pointer_space(), m).expect("4x4")
}

/// Pointer permutation exchanging levels `a` and `b`.
pub fn level_swap<T: Real>(
    register: &ApparatusRegister,
    a: PointerLevel,
    b: PointerLevel,
) -> Operator<T> {
    let m = Matrix::from_fn(POINTER_DIM, POINTER_DIM, |i, j| {
        let image = if j == a.index() {
            b.index()
        } else if j == b.index() {
            a.index()
        } else {
            j
        };
        if i == image {
            cr(T::one())
        } else {
            cr(T::zero())
        }
    });
    Operator::new(register.pointer_space(), m).expect("4x4")
}

/// Σ_k S_k^sys ⊗ S_k^res on (system ⊗ target reservoir spin).
fn heisenberg_term<T: Real>(target: &str) -> Result<Operator<T>> {
    let space = HilbertSpace::new([(SYSTEM.to_string(), 2), (target.to_string(), 2)])?;
    let terms = (0..3)
        .map(|k| spin_component::<T>(SYSTEM, k).tensor(&spin_component(target, k)))
        .collect::<Result<Vec<_>>>()?;
    terms
        .iter()
        .try_fold(Operator::zero(space), |acc, t| acc.add(t))
}

/// exp(−iθ S_sys·S_res) on (system ⊗ target reservoir spin).
pub fn exchange_unitary<T: Real>(
    model: &Exchange<T>,
    register: &ApparatusRegister,
) -> Result<Operator<T>> {
    if model.reservoir_target >= register.reservoir_size() {
        return Err(Error::UnknownFactor(
            register.reservoir_label(model.reservoir_target),
        ));
    }
    heisenberg_term(&register.reservoir_label(model.reservoir_target))?.propagator(model.theta)
}

/// Larmor precession under −μ S·B for `duration`.
pub fn field_evolution<T: Real>(
    state: &StateVector<T>,
    model: &SpinField<T>,
    duration: T,
) -> Result<StateVector<T>> {
    crate::linalg::evolve(state, &model.hamiltonian(), duration)
}

/// Component `k` of the total angular momentum of the named spin factors,
/// embedded in `space`.
pub fn total_angular_momentum<T: Real, S: AsRef<str>>(
    space: &HilbertSpace,
    spins: &[S],
    component: usize,
) -> Result<Operator<T>> {
    let terms: Vec<Operator<T>> = spins
        .iter()
        .map(|l| spin_component(l.as_ref(), component))
        .collect();
    sum_embedded(space, &terms)
}
