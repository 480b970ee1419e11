use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::Matrix;
use super::space::{Factor, HilbertSpace, Layout};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// Linear map on a labelled space. Acting on a state that contains more
/// factors pads with identities on the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T> {
    space: HilbertSpace,
    matrix: Matrix<T>,
}

impl<T: Real> Operator<T> {
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

    pub fn identity(space: HilbertSpace) -> Self {
        let matrix = Matrix::identity(space.total_dim());
        Self { space, matrix }
    }

    pub fn zero(space: HilbertSpace) -> Self {
        let n = space.total_dim();
        Self {
            space,
            matrix: Matrix::zeros(n, n),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            space: self.space.relabel(from, to)?,
            matrix: self.matrix.clone(),
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    fn same_space(&self, other: &Operator<T>) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Operator<T>) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &Operator<T>) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.matmul(&other.matrix),
        })
    }

    pub fn tensor(&self, other: &Operator<T>) -> Result<Self> {
        Ok(Self {
            space: self.space.tensor(&other.space)?,
            matrix: self.matrix.kron(&other.matrix),
        })
    }

    pub fn hermitian_deviation(&self) -> T {
        self.matrix.hermitian_deviation()
    }

    pub fn unitary_deviation(&self) -> T {
        self.matrix.unitary_deviation()
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.hermitian_deviation() <= T::tol(1e-12)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary_deviation() <= T::tol(1e-10)
    }

    /// exp(-i·self·t), the propagator of a time-independent Hamiltonian.
    pub fn propagator(&self, t: T) -> Result<Self> {
        let dev = self.hermitian_deviation();
        if dev > T::tol(1e-12) {
            return Err(Error::NotSelfAdjoint(dev.as_f64()));
        }
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(C::new(T::zero(), -t)).expm(),
        })
    }

    pub(crate) fn layout_in(&self, space: &HilbertSpace) -> Result<Layout> {
        space.layout(&self.space).map_err(|e| match e {
            Error::UnknownFactor(l) => {
                Error::SpaceMismatch(format!("operator factor `{l}` is not part of {space}"))
            }
            other => other,
        })
    }

    /// Raw action on an amplitude vector over `space` (no renormalization).
    pub(crate) fn act(&self, space: &HilbertSpace, amps: &[C<T>]) -> Result<Vec<C<T>>> {
        if *space == self.space {
            return Ok(self.matrix.mul_vec(amps));
        }
        let layout = self.layout_in(space)?;
        Ok(apply_local(amps, &layout, &self.matrix))
    }

    /// Applies a unitary to `state`. Norm drift from rounding is removed.
    pub fn apply(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        let out = self.act(state.space(), state.amplitudes())?;
        Ok(StateVector::from_unitary_image(state.space().clone(), out))
    }

    /// Applies a general (possibly non-unitary) operator and renormalizes.
    pub fn apply_normalized(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        let out = self.act(state.space(), state.amplitudes())?;
        StateVector::from_amplitudes(state.space().clone(), out)
    }

    /// ⟨ψ|self|ψ⟩ without hermiticity checks.
    pub(crate) fn sandwich(&self, state: &StateVector<T>) -> Result<C<T>> {
        let out = self.act(state.space(), state.amplitudes())?;
        Ok(state
            .amplitudes()
            .iter()
            .zip(&out)
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * *b))
    }

    /// The same map on a larger space, identity on the added factors.
    pub fn embed(&self, space: &HilbertSpace) -> Result<Self> {
        if *space == self.space {
            return Ok(self.clone());
        }
        let layout = self.layout_in(space)?;
        let n = space.total_dim();
        let mut matrix = Matrix::zeros(n, n);
        let d = layout.offsets.len();
        for &b in &layout.bases {
            for i in 0..d {
                for j in 0..d {
                    matrix[(b + layout.offsets[i], b + layout.offsets[j])] = self.matrix[(i, j)];
                }
            }
        }
        Ok(Self {
            space: space.clone(),
            matrix,
        })
    }
}

pub(crate) fn apply_local<T: Real>(amps: &[C<T>], layout: &Layout, m: &Matrix<T>) -> Vec<C<T>> {
    let d = layout.offsets.len();
    // sparse rows: projectors and pointer permutations are mostly zeros
    let rows: Vec<Vec<(usize, C<T>)>> = (0..d)
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(j, x)| (j, *x))
                .collect()
        })
        .collect();
    let mut out = vec![C::zero(); amps.len()];
    let mut buf = vec![C::zero(); d];
    for &b in &layout.bases {
        for (slot, &o) in buf.iter_mut().zip(&layout.offsets) {
            *slot = amps[b + o];
        }
        for (row, &o) in rows.iter().zip(&layout.offsets) {
            let mut acc = C::zero();
            for &(j, x) in row {
                acc = acc + x * buf[j];
            }
            out[b + o] = acc;
        }
    }
    out
}

/// Self-adjoint operator together with its spectral decomposition, computed
/// once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<T> {
    op: Operator<T>,
    eigenvalues: Vec<T>,
    eigenvectors: Matrix<T>,
}

/// One eigenvalue and the orthogonal projector onto its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace<T> {
    pub value: T,
    pub projector: Operator<T>,
}

impl<T: Real> Observable<T> {
    pub fn new(op: Operator<T>) -> Result<Self> {
        let dev = op.hermitian_deviation();
        if dev > T::tol(1e-12) {
            return Err(Error::NotSelfAdjoint(dev.as_f64()));
        }
        let (eigenvalues, eigenvectors) = op.matrix().eigh();
        Ok(Self {
            op,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn operator(&self) -> &Operator<T> {
        &self.op
    }

    pub fn space(&self) -> &HilbertSpace {
        self.op.space()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Columns are eigenvectors, ordered like [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &Matrix<T> {
        &self.eigenvectors
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            op: self.op.relabel(from, to)?,
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self.eigenvectors.clone(),
        })
    }

    /// Eigenvalues grouped within `tol`, ascending, with their projectors.
    pub fn eigenspaces(&self, tol: T) -> Vec<Eigenspace<T>> {
        let n = self.eigenvalues.len();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            match groups.last_mut() {
                Some(g) if (self.eigenvalues[i] - self.eigenvalues[g[0]]).abs() <= tol => g.push(i),
                _ => groups.push(vec![i]),
            }
        }
        groups
            .into_iter()
            .map(|g| {
                let value = g.iter().fold(T::zero(), |s, &i| s + self.eigenvalues[i])
                    / T::lit(g.len() as f64);
                let mut projector = Matrix::zeros(n, n);
                for &i in &g {
                    let v = self.eigenvectors.column(i);
                    projector = &projector + &Matrix::outer(&v, &v);
                }
                Eigenspace {
                    value,
                    projector: Operator {
                        space: self.space().clone(),
                        matrix: projector,
                    },
                }
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorDump<T> {
    factors: Vec<Factor>,
    matrix: Vec<Vec<[T; 2]>>,
}

impl<T: Real> Serialize for Operator<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorDump {
            factors: self.space.factors().to_vec(),
            matrix: (0..self.matrix.rows())
                .map(|i| self.matrix.row(i).iter().map(|a| [a.re, a.im]).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for Operator<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dump = OperatorDump::<T>::deserialize(deserializer)?;
        let space = HilbertSpace::from_factors(dump.factors).map_err(D::Error::custom)?;
        let n = dump.matrix.len();
        if dump.matrix.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("operator matrix is not square"));
        }
        let matrix = Matrix::from_rows(
            dump.matrix
                .into_iter()
                .map(|r| r.into_iter().map(|[re, im]| C::new(re, im)).collect())
                .collect(),
        );
        Operator::new(space, matrix).map_err(D::Error::custom)
    }
}

/// Sum of operators acting on different factor subsets, embedded in `space`.
pub fn sum_embedded<T: Real>(space: &HilbertSpace, terms: &[Operator<T>]) -> Result<Operator<T>> {
    let mut acc = Operator::zero(space.clone());
    for t in terms {
        acc = acc.add(&t.embed(space)?)?;
    }
    Ok(acc)
}

pub(crate) fn real_scale<T: Real>(op: &Operator<T>, s: T) -> Operator<T> {
    op.scale(cr(s))
}
