use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::Matrix;
use super::space::{Factor, HilbertSpace};
use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// Normalized pure state on a labelled composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    space: HilbertSpace,
    amplitudes: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(space: HilbertSpace, amplitudes: Vec<C<T>>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::SpaceMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = cr(T::one() / norm);
        Ok(Self {
            space,
            amplitudes: amplitudes.into_iter().map(|a| a * inv).collect(),
        })
    }

    pub fn basis(space: HilbertSpace, index: usize) -> Result<Self> {
        if index >= space.total_dim() {
            return Err(Error::SpaceMismatch(format!(
                "basis index {index} out of range"
            )));
        }
        let mut amplitudes = vec![C::zero(); space.total_dim()];
        amplitudes[index] = C::new(T::one(), T::zero());
        Ok(Self { space, amplitudes })
    }

    /// Amplitudes that are already unit-norm up to rounding (outputs of
    /// unitary maps); rounding drift is removed.
    pub(crate) fn from_unitary_image(space: HilbertSpace, amplitudes: Vec<C<T>>) -> Self {
        let norm = norm_sqr(&amplitudes).sqrt();
        let inv = cr(T::one() / norm);
        Self {
            space,
            amplitudes: amplitudes.into_iter().map(|a| a * inv).collect(),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amplitudes)
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector<T>) -> Result<C<T>> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space, other.space
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * *b))
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            space: self.space.relabel(from, to)?,
            amplitudes: self.amplitudes.clone(),
        })
    }

    pub fn tensor(&self, other: &StateVector<T>) -> Result<Self> {
        let space = self.space.tensor(&other.space)?;
        let mut amplitudes = Vec::with_capacity(space.total_dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(*a * *b);
            }
        }
        Ok(Self { space, amplitudes })
    }

    /// Multiplies every amplitude by `phase` (expected to be unimodular).
    pub fn with_phase(&self, phase: C<T>) -> Self {
        Self {
            space: self.space.clone(),
            amplitudes: self.amplitudes.iter().map(|a| *a * phase).collect(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix {
            space: self.space.clone(),
            matrix: Matrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

pub(crate) fn norm_sqr<T: Real>(v: &[C<T>]) -> T {
    v.iter().fold(T::zero(), |s, a| s + a.norm_sqr())
}

/// Reduced (generally mixed) state over a subset of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    space: HilbertSpace,
    matrix: Matrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(space: HilbertSpace, matrix: Matrix<T>) -> Result<Self> {
        let n = space.total_dim();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::SpaceMismatch(format!(
                "{}x{} matrix for a space of dimension {n}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let n = space.total_dim();
        let matrix = Matrix::identity(n).scale(cr(T::one() / T::lit(n as f64)));
        Self { space, matrix }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> T {
        self.matrix.matmul(&self.matrix).trace().re
    }

    /// Real diagonal: occupation weight of each basis state.
    pub fn populations(&self) -> Vec<T> {
        (0..self.matrix.rows())
            .map(|i| self.matrix[(i, i)].re)
            .collect()
    }

    /// tr(ρ A) for an operator matrix on the same space.
    pub fn expectation_matrix(&self, a: &Matrix<T>) -> Result<T> {
        if a.rows() != self.matrix.rows() || !a.is_square() {
            return Err(Error::SpaceMismatch("operator dimension differs".into()));
        }
        Ok(self.matrix.matmul(a).trace().re)
    }

    /// ⟨ψ|ρ|ψ⟩ for a pure reference state on the same space.
    pub fn fidelity_with(&self, psi: &StateVector<T>) -> Result<T> {
        if psi.space() != &self.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                psi.space(),
                self.space
            )));
        }
        let rho_psi = self.matrix.mul_vec(psi.amplitudes());
        let v = psi
            .amplitudes()
            .iter()
            .zip(&rho_psi)
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * *b);
        Ok(v.re)
    }
}

#[derive(Serialize, Deserialize)]
struct StateDump<T> {
    factors: Vec<Factor>,
    amplitudes: Vec<[T; 2]>,
}

impl<T: Real> Serialize for StateVector<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateDump {
            factors: self.space.factors().to_vec(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for StateVector<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dump = StateDump::<T>::deserialize(deserializer)?;
        let space = HilbertSpace::from_factors(dump.factors).map_err(D::Error::custom)?;
        let amplitudes: Vec<C<T>> = dump
            .amplitudes
            .iter()
            .map(|[re, im]| C::new(*re, *im))
            .collect();
        let drift = (norm_sqr(&amplitudes) - T::one()).abs();
        if drift > T::tol(1e-8) {
            return Err(D::Error::custom(format!(
                "state is not normalized (|norm^2 - 1| = {drift})"
            )));
        }
        StateVector::from_amplitudes(space, amplitudes).map_err(D::Error::custom)
    }
}
