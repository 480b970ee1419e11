//! Haar-like random draws used by microstate dressing and property tests.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{HilbertSpace, Matrix, Operator, StateVector};
use crate::scalar::{Real, C};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Uniformly distributed pure state (normalized complex Gaussian vector).
pub fn random_state<T: Real, R: Rng + ?Sized>(space: &HilbertSpace, rng: &mut R) -> StateVector<T> {
    loop {
        let amps = (0..space.total_dim())
            .map(|_| C::new(gaussian(rng), gaussian(rng)))
            .collect();
        if let Ok(s) = StateVector::from_amplitudes(space.clone(), amps) {
            return s;
        }
    }
}

/// GUE-style Hermitian operator with unit-variance entries.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(
    space: &HilbertSpace,
    rng: &mut R,
) -> Operator<T> {
    let n = space.total_dim();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C::new(gaussian(rng), T::zero());
        for j in (i + 1)..n {
            let z = C::new(gaussian::<T, R>(rng), gaussian::<T, R>(rng))
                * C::new(T::FRAC_1_SQRT_2(), T::zero());
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Operator::new(space.clone(), m).expect("dimensions match")
}

/// exp(-i H) for a random Hermitian H.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(space: &HilbertSpace, rng: &mut R) -> Operator<T> {
    random_hermitian(space, rng)
        .propagator(T::one())
        .expect("Hermitian by construction")
}

/// Uniform point on the unit sphere.
pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(rng: &mut R) -> [T; 3] {
    loop {
        let v: [T; 3] = [gaussian(rng), gaussian(rng), gaussian(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > T::lit(1e-6) {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}
