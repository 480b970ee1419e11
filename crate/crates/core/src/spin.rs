//! Spin-½ algebra with S = σ/2 (ħ = 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, HilbertSpace, Matrix, Observable, Operator, StateVector};
use crate::scalar::{cr, Real, C};

/// Factor label of the observed particle.
pub const SYSTEM: &str = "system";

/// Unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[T; 3]", into = "[T; 3]", bound = "T: Real")]
pub struct Axis<T> {
    n: [T; 3],
}

impl<T: Real> Axis<T> {
    /// Normalizes `v`.
    pub fn new(v: [T; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm > T::lit(1e-300).max(T::min_positive_value())) || !norm.is_finite() {
            return Err(Error::DegenerateAxis);
        }
        Ok(Self {
            n: [v[0] / norm, v[1] / norm, v[2] / norm],
        })
    }

    pub fn x() -> Self {
        Self {
            n: [T::one(), T::zero(), T::zero()],
        }
    }

    pub fn y() -> Self {
        Self {
            n: [T::zero(), T::one(), T::zero()],
        }
    }

    pub fn z() -> Self {
        Self {
            n: [T::zero(), T::zero(), T::one()],
        }
    }

    pub fn components(&self) -> [T; 3] {
        self.n
    }

    pub fn negated(&self) -> Self {
        Self {
            n: [-self.n[0], -self.n[1], -self.n[2]],
        }
    }
}

impl<T: Real> TryFrom<[T; 3]> for Axis<T> {
    type Error = Error;
    fn try_from(v: [T; 3]) -> Result<Self> {
        Axis::new(v)
    }
}

impl<T> From<Axis<T>> for [T; 3] {
    fn from(a: Axis<T>) -> [T; 3] {
        a.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Up,
    Down,
}

impl Sign {
    pub fn flipped(self) -> Self {
        match self {
            Sign::Up => Sign::Down,
            Sign::Down => Sign::Up,
        }
    }
}

/// Spin expectation values (s_x, s_y, s_z), each within [−1/2, 1/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector<T> {
    pub sx: T,
    pub sy: T,
    pub sz: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(sx: T, sy: T, sz: T) -> Self {
        Self { sx, sy, sz }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Point on the unit sphere for the up state along `axis`.
    pub fn from_axis(axis: &Axis<T>) -> Self {
        let h = T::lit(0.5);
        let [x, y, z] = axis.components();
        Self::new(h * x, h * y, h * z)
    }

    pub fn components(&self) -> [T; 3] {
        [self.sx, self.sy, self.sz]
    }

    /// (2s_x, 2s_y, 2s_z), a unit vector for pure states.
    pub fn doubled(&self) -> [T; 3] {
        let two = T::lit(2.0);
        [two * self.sx, two * self.sy, two * self.sz]
    }

    pub fn doubled_norm(&self) -> T {
        let [x, y, z] = self.doubled();
        (x * x + y * y + z * z).sqrt()
    }

    pub fn max_abs_diff(&self, other: &BlochVector<T>) -> T {
        (self.sx - other.sx)
            .abs()
            .max((self.sy - other.sy).abs())
            .max((self.sz - other.sz).abs())
    }
}

impl<T: Real> std::ops::Add for BlochVector<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.sx + o.sx, self.sy + o.sy, self.sz + o.sz)
    }
}

impl<T: Real> std::ops::Sub for BlochVector<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.sx - o.sx, self.sy - o.sy, self.sz - o.sz)
    }
}

fn qubit(label: &str) -> HilbertSpace {
    HilbertSpace::single(label, 2).expect("nonempty label")
}

/// Matrix of n·σ/2.
pub(crate) fn spin_matrix<T: Real>(n: [T; 3]) -> Matrix<T> {
    let h = T::lit(0.5);
    let [x, y, z] = n;
    Matrix::from_rows(vec![
        vec![cr(h * z), C::new(h * x, -h * y)],
        vec![C::new(h * x, h * y), cr(-h * z)],
    ])
}

/// S_x, S_y or S_z (component 0, 1, 2) on the factor `label`.
pub fn spin_component<T: Real>(label: &str, component: usize) -> Operator<T> {
    let mut n = [T::zero(); 3];
    n[component] = T::one();
    Operator::new(qubit(label), spin_matrix(n)).expect("2x2 on a qubit")
}

/// n·S on the [`SYSTEM`] factor.
pub fn spin_operator<T: Real>(axis: &Axis<T>) -> Observable<T> {
    spin_operator_on(axis, SYSTEM)
}

pub fn spin_operator_on<T: Real>(axis: &Axis<T>, label: &str) -> Observable<T> {
    let op = Operator::new(qubit(label), spin_matrix(axis.components())).expect("2x2 on a qubit");
    Observable::new(op).expect("n·S is Hermitian")
}

/// exp(−i·angle·n·S): the SU(2) image of a rotation by `angle` about `axis`.
pub fn rotation<T: Real>(axis: &Axis<T>, angle: T, label: &str) -> Operator<T> {
    // exp(−iθ n·σ/2) = cos(θ/2) I − i sin(θ/2) n·σ
    let half = angle * T::lit(0.5);
    let [x, y, z] = axis.components();
    let (s, c) = half.sin_cos();
    let m = Matrix::from_rows(vec![
        vec![C::new(c, -s * z), C::new(-s * y, -s * x)],
        vec![C::new(s * y, -s * x), C::new(c, s * z)],
    ]);
    Operator::new(qubit(label), m).expect("2x2 on a qubit")
}

fn fix_gauge<T: Real>(amps: &mut [C<T>]) {
    let threshold = T::tol(1e-12);
    if let Some(a) = amps.iter().find(|a| a.norm() > threshold).copied() {
        let phase = a.conj() / cr(a.norm());
        for x in amps.iter_mut() {
            *x = *x * phase;
        }
    }
}

/// Eigenvector of n·S for eigenvalue ±1/2 on the [`SYSTEM`] factor, with the
/// first nonzero amplitude real and positive.
pub fn axis_eigenstate<T: Real>(axis: &Axis<T>, sign: Sign) -> StateVector<T> {
    axis_eigenstate_on(axis, sign, SYSTEM)
}

pub fn axis_eigenstate_on<T: Real>(axis: &Axis<T>, sign: Sign, label: &str) -> StateVector<T> {
    let [x, y, z] = axis.components();
    let one = T::one();
    // Two closed forms; pick the one that stays away from 0/0.
    let mut amps = match (sign, z >= T::zero()) {
        (Sign::Up, true) => vec![cr(one + z), C::new(x, y)],
        (Sign::Up, false) => vec![C::new(x, -y), cr(one - z)],
        (Sign::Down, true) => vec![C::new(x, -y), cr(-(one + z))],
        (Sign::Down, false) => vec![cr(-(one - z)), C::new(x, y)],
    };
    fix_gauge(&mut amps);
    StateVector::from_amplitudes(qubit(label), amps).expect("nonzero closed form")
}

/// Spin expectations of a single-spin pure state.
pub fn bloch_vector<T: Real>(state: &StateVector<T>) -> Result<BlochVector<T>> {
    if state.space().factors().len() != 1 || state.dim() != 2 {
        return Err(Error::SpaceMismatch(format!(
            "Bloch vector needs one spin-½ factor, got {}",
            state.space()
        )));
    }
    bloch_vector_of(&state.to_density())
}

/// Spin expectations of a 2×2 density matrix (pure or mixed).
pub fn bloch_vector_of<T: Real>(rho: &DensityMatrix<T>) -> Result<BlochVector<T>> {
    if rho.space().total_dim() != 2 {
        return Err(Error::SpaceMismatch(format!(
            "Bloch vector needs a 2x2 density matrix, got {}",
            rho.space()
        )));
    }
    let m = rho.matrix();
    let b = m[(0, 1)];
    let h = T::lit(0.5);
    Ok(BlochVector::new(
        b.re,
        -b.im,
        h * (m[(0, 0)].re - m[(1, 1)].re),
    ))
}

/// Pure state on the [`SYSTEM`] factor whose Bloch vector is `b`.
pub fn state_from_bloch<T: Real>(b: &BlochVector<T>) -> Result<StateVector<T>> {
    let norm = b.doubled_norm();
    if (norm - T::one()).abs() > T::tol(1e-8) {
        return Err(Error::NotPure(norm.as_f64()));
    }
    Ok(axis_eigenstate(&Axis::new(b.doubled())?, Sign::Up))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expectation, fidelity, random::random_unit_vector};
    use crate::scalar::c;
    use proptest::prelude::*;
    use rand::SeedableRng;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn sz_is_diagonal_half() {
        let sz = spin_operator(&Axis::<f64>::z());
        let expected = Matrix::diagonal(&[c(0.5, 0.), c(-0.5, 0.)]);
        assert_eq!(sz.operator().matrix(), &expected);
    }

    #[test]
    fn diagonal_axis_operator() {
        let op = spin_operator(&Axis::new([1.0, 1.0, 0.0]).unwrap());
        // (σx + σy)/(2√2)
        let k = 1.0 / (2.0 * 2f64.sqrt());
        let expected = Matrix::from_rows(vec![vec![c(0., 0.), c(k, -k)], vec![c(k, k), c(0., 0.)]]);
        assert!(op.operator().matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn zero_axis_rejected() {
        assert_eq!(
            Axis::<f64>::new([0.0, 0.0, 0.0]).unwrap_err(),
            Error::DegenerateAxis
        );
    }

    #[test]
    fn canonical_eigenstates() {
        let up_z = axis_eigenstate(&Axis::<f64>::z(), Sign::Up);
        assert_eq!(up_z.amplitudes(), &[c(1., 0.), c(0., 0.)]);
        let down_z = axis_eigenstate(&Axis::<f64>::z(), Sign::Down);
        assert_eq!(down_z.amplitudes(), &[c(0., 0.), c(1., 0.)]);
        let up_x = axis_eigenstate(&Axis::<f64>::x(), Sign::Up);
        assert!((up_x.amplitudes()[0] - c(S, 0.)).norm() < 1e-15);
        assert!((up_x.amplitudes()[1] - c(S, 0.)).norm() < 1e-15);
        let down_x = axis_eigenstate(&Axis::<f64>::x(), Sign::Down);
        assert!((down_x.amplitudes()[0] - c(S, 0.)).norm() < 1e-15);
        assert!((down_x.amplitudes()[1] - c(-S, 0.)).norm() < 1e-15);
    }

    #[test]
    fn bloch_examples() {
        let b = bloch_vector(&axis_eigenstate(&Axis::<f64>::z(), Sign::Up)).unwrap();
        assert_eq!(b, BlochVector::new(0.0, 0.0, 0.5));
        let b = bloch_vector(&axis_eigenstate(&Axis::<f64>::x(), Sign::Up)).unwrap();
        assert!(b.max_abs_diff(&BlochVector::new(0.5, 0.0, 0.0)) < 1e-15);
        let b = bloch_vector(&axis_eigenstate(&Axis::<f64>::y(), Sign::Up)).unwrap();
        assert!(b.max_abs_diff(&BlochVector::new(0.0, 0.5, 0.0)) < 1e-15);
        let mixed = DensityMatrix::<f64>::maximally_mixed(qubit("r"));
        assert_eq!(bloch_vector_of(&mixed).unwrap(), BlochVector::zero());
        let pair = HilbertSpace::new([("a", 2), ("b", 2)]).unwrap();
        let s = StateVector::<f64>::basis(pair, 0).unwrap();
        assert!(matches!(bloch_vector(&s), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn state_from_bloch_examples() {
        let up = state_from_bloch(&BlochVector::<f64>::new(0.0, 0.0, 0.5)).unwrap();
        assert_eq!(up.amplitudes(), &[c(1., 0.), c(0., 0.)]);
        let up_x = state_from_bloch(&BlochVector::<f64>::new(0.5, 0.0, 0.0)).unwrap();
        let f = fidelity(&up_x, &axis_eigenstate(&Axis::x(), Sign::Up)).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        assert!(matches!(
            state_from_bloch(&BlochVector::new(0.1, 0.0, 0.0)),
            Err(Error::NotPure(_))
        ));
    }

    #[test]
    fn hundred_random_round_trips() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n: [f64; 3] = random_unit_vector(&mut rng);
            let b = BlochVector::from_axis(&Axis::new(n).unwrap());
            let back = bloch_vector(&state_from_bloch(&b).unwrap()).unwrap();
            assert!(back.max_abs_diff(&b) < 1e-8);
        }
    }

    #[test]
    fn rotation_matches_pauli_exponential() {
        let axis = Axis::new([0.3, -0.4, 0.5]).unwrap();
        let direct = rotation(&axis, 1.1, "a");
        let via_expm = spin_operator_on(&axis, "a")
            .operator()
            .propagator(1.1)
            .unwrap();
        assert!(direct.matrix().max_abs_diff(via_expm.matrix()) < 1e-14);
    }

    fn rotate(v: [f64; 3], k: [f64; 3], angle: f64) -> [f64; 3] {
        // Rodrigues
        let (s, c) = angle.sin_cos();
        let dot = v[0] * k[0] + v[1] * k[1] + v[2] * k[2];
        let cross = [
            k[1] * v[2] - k[2] * v[1],
            k[2] * v[0] - k[0] * v[2],
            k[0] * v[1] - k[1] * v[0],
        ];
        [0, 1, 2].map(|i| v[i] * c + cross[i] * s + k[i] * dot * (1.0 - c))
    }

    fn unit() -> impl Strategy<Value = [f64; 3]> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("away from zero", |(x, y, z)| x * x + y * y + z * z > 1e-2)
            .prop_map(|(x, y, z)| {
                let n = (x * x + y * y + z * z).sqrt();
                [x / n, y / n, z / n]
            })
    }

    proptest! {
        #[test]
        fn eigenvalues_are_plus_minus_half(n in unit()) {
            let op = spin_operator(&Axis::new(n).unwrap());
            let ev = op.eigenvalues();
            prop_assert!((ev[0] + 0.5).abs() <= 1e-12);
            prop_assert!((ev[1] - 0.5).abs() <= 1e-12);
        }

        #[test]
        fn eigen_relation(n in unit(), down in any::<bool>()) {
            let axis = Axis::new(n).unwrap();
            let sign = if down { Sign::Down } else { Sign::Up };
            let psi = axis_eigenstate(&axis, sign);
            let e = expectation(&psi, &spin_operator(&axis)).unwrap();
            let want = if down { -0.5 } else { 0.5 };
            prop_assert!((e - want).abs() < 1e-12);
            let first = psi.amplitudes().iter().find(|a| a.norm() > 1e-12).unwrap();
            prop_assert!(first.im.abs() < 1e-15 && first.re > 0.0);
        }

        #[test]
        fn rotational_covariance(n in unit(), k in unit(), angle in -3.0f64..3.0) {
            let base = axis_eigenstate(&Axis::new(n).unwrap(), Sign::Up);
            let rotated_axis = Axis::new(rotate(n, k, angle)).unwrap();
            let direct = axis_eigenstate(&rotated_axis, Sign::Up);
            let via_unitary = rotation(&Axis::new(k).unwrap(), angle, SYSTEM).apply(&base).unwrap();
            prop_assert!(fidelity(&direct, &via_unitary).unwrap() >= 1.0 - 1e-10);
            let b = bloch_vector(&via_unitary).unwrap();
            prop_assert!(b.max_abs_diff(&BlochVector::from_axis(&rotated_axis)) < 1e-10);
        }
    }
}
