//! Dense complex linear algebra over small labelled tensor-product spaces.
//!
//! Everything here is immutable: operations return new values. States are
//! compared through [`fidelity`]; global phases are never stripped.

mod matrix;
mod operator;
pub mod random;
mod space;
mod state;

use num_traits::Zero;

pub use matrix::Matrix;
pub use operator::{sum_embedded, Eigenspace, Observable, Operator};
pub use space::{Factor, HilbertSpace};
pub use state::{DensityMatrix, StateVector};

pub(crate) use operator::real_scale;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Kronecker product with the left operand as the slow index.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for HilbertSpace {
    fn tensor(&self, other: &Self) -> Result<Self> {
        HilbertSpace::tensor(self, other)
    }
}

impl<T: Real> Tensor for StateVector<T> {
    fn tensor(&self, other: &Self) -> Result<Self> {
        StateVector::tensor(self, other)
    }
}

impl<T: Real> Tensor for Operator<T> {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Operator::tensor(self, other)
    }
}

pub fn tensor<X: Tensor>(a: &X, b: &X) -> Result<X> {
    a.tensor(b)
}

/// exp(-i·H·t)|ψ⟩ with ħ = 1. `hamiltonian` may act on a subset of the
/// state's factors.
pub fn evolve<T: Real>(
    state: &StateVector<T>,
    hamiltonian: &Operator<T>,
    duration: T,
) -> Result<StateVector<T>> {
    hamiltonian.propagator(duration)?.apply(state)
}

/// ⟨ψ|A|ψ⟩. The observable may act on a subset of the state's factors.
pub fn expectation<T: Real>(state: &StateVector<T>, obs: &Observable<T>) -> Result<T> {
    let v = obs.operator().sandwich(state)?;
    debug_assert!(
        v.im.abs() <= T::tol(1e-10) * T::one().max(obs.operator().matrix().max_abs()),
        "imaginary residue {} in expectation value",
        v.im
    );
    Ok(v.re)
}

/// |⟨a|b⟩|²
pub fn fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    Ok(a.inner(b)?.norm_sqr().min(T::one()))
}

/// Reduced density matrix over `keep`, in the order the labels are given.
pub fn partial_trace<T: Real, S: AsRef<str>>(
    state: &StateVector<T>,
    keep: &[S],
) -> Result<DensityMatrix<T>> {
    if keep.is_empty() {
        return Err(Error::InvalidSpace(
            "partial trace must keep at least one factor".into(),
        ));
    }
    let kept = state.space().select(keep)?;
    let layout = state.space().layout(&kept)?;
    let d = kept.total_dim();
    let amps = state.amplitudes();
    let mut rho = Matrix::zeros(d, d);
    let mut buf: Vec<C<T>> = vec![C::zero(); d];
    for &b in &layout.bases {
        for (slot, &o) in buf.iter_mut().zip(&layout.offsets) {
            *slot = amps[b + o];
        }
        for i in 0..d {
            if buf[i].is_zero() {
                continue;
            }
            for j in 0..d {
                rho[(i, j)] = rho[(i, j)] + buf[i] * buf[j].conj();
            }
        }
    }
    DensityMatrix::new(kept, rho)
}

/// Largest entry magnitude of AB − BA.
pub fn commutator_norm<T: Real>(a: &Operator<T>, b: &Operator<T>) -> Result<T> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch(format!(
            "{} vs {}",
            a.space(),
            b.space()
        )));
    }
    Ok(a.matrix().commutator(b.matrix()).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c, cr};

    type M = Matrix<f64>;

    fn qubit(label: &str) -> HilbertSpace {
        HilbertSpace::single(label, 2).unwrap()
    }

    fn ket(label: &str, a: (f64, f64), b: (f64, f64)) -> StateVector<f64> {
        StateVector::from_amplitudes(qubit(label), vec![c(a.0, a.1), c(b.0, b.1)]).unwrap()
    }

    fn half_pauli(label: &str, which: char) -> Operator<f64> {
        let m = match which {
            'x' => M::from_rows(vec![
                vec![c(0., 0.), c(0.5, 0.)],
                vec![c(0.5, 0.), c(0., 0.)],
            ]),
            'y' => M::from_rows(vec![
                vec![c(0., 0.), c(0., -0.5)],
                vec![c(0., 0.5), c(0., 0.)],
            ]),
            _ => M::from_rows(vec![
                vec![c(0.5, 0.), c(0., 0.)],
                vec![c(0., 0.), c(-0.5, 0.)],
            ]),
        };
        Operator::new(qubit(label), m).unwrap()
    }

    #[test]
    fn tensor_identity_and_dimension() {
        let i2 = Operator::<f64>::identity(qubit("a"));
        let i2b = Operator::<f64>::identity(qubit("b"));
        assert_eq!(tensor(&i2, &i2b).unwrap().matrix(), &M::identity(4));
        let up = ket("spin", (1., 0.), (0., 0.));
        let ready = StateVector::<f64>::basis(HilbertSpace::single("ptr", 4).unwrap(), 0).unwrap();
        assert_eq!(tensor(&up, &ready).unwrap().dim(), 8);
        assert!(matches!(tensor(&up, &up), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn local_sx_on_product_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = tensor(&ket("a", (s, 0.), (s, 0.)), &ket("b", (1., 0.), (0., 0.))).unwrap();
        let op = tensor(&half_pauli("a", 'x'), &Operator::identity(qubit("b"))).unwrap();
        let out = op.matrix().mul_vec(psi.amplitudes());
        for (o, p) in out.iter().zip(psi.amplitudes()) {
            assert!((*o - *p * cr(0.5)).norm() < 1e-15);
        }
        // padded application agrees with the explicit Kronecker product
        let padded = half_pauli("a", 'x').apply_normalized(&psi).unwrap();
        assert!(fidelity(&padded, &psi).unwrap() > 1.0 - 1e-15);
    }

    #[test]
    fn evolve_zero_hamiltonian_is_identity() {
        let psi = ket("a", (0.6, 0.), (0., 0.8));
        let out = evolve(&psi, &Operator::zero(qubit("a")), 3.0).unwrap();
        assert_eq!(out.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn evolve_full_sz_period_gives_minus_one_phase() {
        let up = ket("a", (1., 0.), (0., 0.));
        let out = evolve(&up, &half_pauli("a", 'z'), 2.0 * std::f64::consts::PI).unwrap();
        // e^{-i·(1/2)·2π} = -1
        assert!((out.amplitudes()[0] - c(-1.0, 0.0)).norm() < 1e-13);
        assert!(out.amplitudes()[1].norm() < 1e-13);
    }

    #[test]
    fn evolve_rejects_non_hermitian() {
        let m = M::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]]);
        let h = Operator::new(qubit("a"), m).unwrap();
        let psi = ket("a", (1., 0.), (0., 0.));
        assert!(matches!(
            evolve(&psi, &h, 1.0),
            Err(Error::NotSelfAdjoint(_))
        ));
    }

    #[test]
    fn expectation_examples() {
        let sz = Observable::new(half_pauli("a", 'z')).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((expectation(&ket("a", (1., 0.), (0., 0.)), &sz).unwrap() - 0.5).abs() < 1e-15);
        assert!(expectation(&ket("a", (s, 0.), (s, 0.)), &sz).unwrap().abs() < 1e-15);
        // brute force over the two outcomes: 0.5·(9/25) − 0.5·(16/25)
        let brute = 0.5 * (9.0 / 25.0) - 0.5 * (16.0 / 25.0);
        let v = expectation(&ket("a", (0.6, 0.), (0.8, 0.)), &sz).unwrap();
        assert!((v - brute).abs() < 1e-15);
        assert!((v + 0.14).abs() < 1e-15);
        let other = Observable::new(half_pauli("b", 'z')).unwrap();
        assert!(matches!(
            expectation(&ket("a", (1., 0.), (0., 0.)), &other),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let up = ket("a", (1., 0.), (0., 0.));
        let down = ket("a", (0., 0.), (1., 0.));
        let up_x = ket("a", (s, 0.), (s, 0.));
        assert!((fidelity(&up, &up).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&up, &down).unwrap(), 0.0);
        assert!((fidelity(&up_x, &up).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            fidelity(&up, &ket("b", (1., 0.), (0., 0.))),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let up = ket("spin", (1., 0.), (0., 0.));
        let ready = StateVector::<f64>::basis(HilbertSpace::single("ptr", 4).unwrap(), 0).unwrap();
        let rho = partial_trace(&tensor(&up, &ready).unwrap(), &["spin"]).unwrap();
        assert!(
            rho.matrix()
                .max_abs_diff(&Matrix::outer(up.amplitudes(), up.amplitudes()))
                < 1e-15
        );

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(
            HilbertSpace::new([("a", 2), ("b", 2)]).unwrap(),
            vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)],
        )
        .unwrap();
        let rho = partial_trace(&bell, &["a"]).unwrap();
        assert!(rho.matrix().max_abs_diff(&M::identity(2).scale(cr(0.5))) < 1e-15);
        assert!(matches!(
            partial_trace(&bell, &["zz"]),
            Err(Error::UnknownFactor(_))
        ));
    }

    #[test]
    fn commutator_examples() {
        let sz = half_pauli("a", 'z');
        assert_eq!(commutator_norm(&sz, &sz).unwrap(), 0.0);
        // [Sx, Sy] = i Sz, whose entries have magnitude 1/2
        let comm = commutator_norm(&half_pauli("a", 'x'), &half_pauli("a", 'y')).unwrap();
        assert!((comm - 0.5).abs() < 1e-15);

        let space = HilbertSpace::new([("a", 2), ("b", 2)]).unwrap();
        let swap = Operator::new(
            space.clone(),
            M::from_fn(4, 4, |i, j| {
                let (a, b) = (i / 2, i % 2);
                if j == b * 2 + a {
                    c(1., 0.)
                } else {
                    c(0., 0.)
                }
            }),
        )
        .unwrap();
        let jx = sum_embedded(&space, &[half_pauli("a", 'x'), half_pauli("b", 'x')]).unwrap();
        assert_eq!(commutator_norm(&swap, &jx).unwrap(), 0.0);
    }

    #[test]
    fn state_json_layout() {
        let psi = ket("spin", (0.6, 0.), (0., 0.8));
        let json = serde_json::to_string(&psi).unwrap();
        assert_eq!(
            json,
            r#"{"factors":[{"label":"spin","dim":2}],"amplitudes":[[0.6,0.0],[0.0,0.8]]}"#
        );
        let back: StateVector<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, psi);
        let bad = r#"{"factors":[{"label":"spin","dim":2}],"amplitudes":[[1.0,0.0],[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<StateVector<f64>>(bad).is_err());
    }

    #[test]
    fn operator_json_round_trip() {
        let op = half_pauli("spin", 'y');
        let json = serde_json::to_string(&op).unwrap();
        assert!(json.starts_with(
            r#"{"factors":[{"label":"spin","dim":2}],"matrix":[[[0.0,0.0],[0.0,-0.5]]"#
        ));
        let back: Operator<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn single_precision_path() {
        let psi = StateVector::<f32>::from_amplitudes(
            HilbertSpace::single("a", 2).unwrap(),
            vec![C::new(0.6, 0.0), C::new(0.0, 0.8)],
        )
        .unwrap();
        let h = Operator::new(
            HilbertSpace::single("a", 2).unwrap(),
            Matrix::from_rows(vec![
                vec![C::new(0.5f32, 0.), C::new(0., 0.)],
                vec![C::new(0., 0.), C::new(-0.5, 0.)],
            ]),
        )
        .unwrap();
        let out = evolve(&psi, &h, 1.7).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
