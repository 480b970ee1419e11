//! Special-state search and kick-angle statistics for the unitary scheme.

use rand_distr::{Cauchy, Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apparatus::{
    classify, pointer_weights, prepare, ApparatusRegister, Exchange, MacroLabel, ReservoirPrep,
};
use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::rng::{derive_seed, seeded};
use crate::scalar::Real;
use crate::schemes::{branch_weights, measure_unitary, premeasurement, write_pointer};
use crate::spin::{spin_operator, Axis, Sign, SYSTEM};

const DEVICE: &str = "d";

/// Kick angles crossed with reservoir preparations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SearchGrid<T> {
    pub kicks: Vec<T>,
    pub preparations: Vec<ReservoirPrep<T>>,
}

impl<T: Real> SearchGrid<T> {
    /// `points` evenly spaced kicks on [0, π] against singlets and the six
    /// axis-aligned reservoir preparations.
    pub fn standard(points: usize) -> Self {
        let kicks = match points {
            0 => Vec::new(),
            1 => vec![T::zero()],
            n => (0..n)
                .map(|i| T::PI() * T::lit(i as f64 / (n - 1) as f64))
                .collect(),
        };
        let mut preparations = vec![ReservoirPrep::Singlets];
        for axis in [Axis::x(), Axis::y(), Axis::z()] {
            for sign in [Sign::Up, Sign::Down] {
                preparations.push(ReservoirPrep::Aligned { axis, sign });
            }
        }
        Self {
            kicks,
            preparations,
        }
    }

    pub fn len(&self) -> usize {
        self.kicks.len() * self.preparations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpecialStateResult<T> {
    pub kick: T,
    pub preparation: ReservoirPrep<T>,
    /// Dominant pointer weight after exchange and write-out.
    pub score: T,
    pub label: MacroLabel,
}

fn single_spin<T: Real>(system: &StateVector<T>) -> Result<()> {
    let labels: Vec<&str> = system.space().labels().collect();
    if labels != [SYSTEM] || system.dim() != 2 {
        return Err(Error::SpaceMismatch(format!(
            "expected a lone system spin, got {}",
            system.space()
        )));
    }
    Ok(())
}

/// Exchange at angle `kick` with a device prepared as `prep`, then a
/// calibrated write-out along `axis`; scores the resulting pointer.
pub fn score_grid_point<T: Real>(
    system: &StateVector<T>,
    axis: &Axis<T>,
    kick: T,
    prep: &ReservoirPrep<T>,
    reservoir_size: usize,
    tolerance: T,
) -> Result<SpecialStateResult<T>> {
    single_spin(system)?;
    let reg = ApparatusRegister::new(DEVICE, reservoir_size)?;
    let joint = system.tensor(&prepare(&reg, prep)?)?;
    let kicked = measure_unitary(&joint, &reg, &Exchange::new(kick, 0)?)?;
    let written = write_pointer(&kicked, axis, &reg)?;
    let ms = classify(pointer_weights(&written, &reg)?, tolerance);
    Ok(SpecialStateResult {
        kick,
        preparation: *prep,
        score: ms.confidence,
        label: ms.label,
    })
}

/// Exhaustive scan of `grid`; keeps points with score ≥ 1 − tolerance,
/// best first (ties keep grid order: kicks outer, preparations inner).
pub fn special_state_search<T: Real>(
    system: &StateVector<T>,
    axis: &Axis<T>,
    grid: &SearchGrid<T>,
    reservoir_size: usize,
    tolerance: T,
) -> Result<Vec<SpecialStateResult<T>>> {
    if grid.is_empty() {
        return Err(Error::ConfigError("special-state grid is empty".into()));
    }
    if !(tolerance >= T::zero() && tolerance < T::lit(0.5)) {
        return Err(Error::ConfigError(format!(
            "tolerance {tolerance} outside [0, 0.5)"
        )));
    }
    let mut found = Vec::new();
    for &kick in &grid.kicks {
        for prep in &grid.preparations {
            let r = score_grid_point(system, axis, kick, prep, reservoir_size, tolerance)?;
            if r.score >= T::one() - tolerance {
                found.push(r);
            }
        }
    }
    found.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("finite scores"));
    Ok(found)
}

/// Kick-angle law. `Uniform` draws from [location − scale, location + scale];
/// scale 0 pins every kick at `location`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KickDistribution {
    Cauchy { location: f64, scale: f64 },
    Uniform { location: f64, scale: f64 },
}

impl KickDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KickDistribution::Cauchy { location, scale } => {
                if !(scale > 0.0 && scale.is_finite() && location.is_finite()) {
                    return Err(Error::ConfigError(format!(
                        "Cauchy scale must be positive, got {scale}"
                    )));
                }
            }
            KickDistribution::Uniform { location, scale } => {
                if !(scale >= 0.0 && scale.is_finite() && location.is_finite()) {
                    return Err(Error::ConfigError(format!(
                        "uniform half-width must be nonnegative, got {scale}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut crate::rng::SimRng) -> f64 {
        match *self {
            KickDistribution::Cauchy { location, scale } => {
                Cauchy::new(location, scale).expect("validated").sample(rng)
            }
            KickDistribution::Uniform { location, scale } => {
                if scale == 0.0 {
                    location
                } else {
                    Uniform::new_inclusive(location - scale, location + scale)
                        .expect("validated")
                        .sample(rng)
                }
            }
        }
    }
}

/// Reflects a real angle into [0, π]: |θ| mod 2π, mirrored about π.
pub fn fold_kick(theta: f64) -> f64 {
    let t = theta.abs() % (2.0 * std::f64::consts::PI);
    if t > std::f64::consts::PI {
        2.0 * std::f64::consts::PI - t
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub up: u64,
    pub down: u64,
    pub superposed: u64,
}

impl FrequencyTable {
    pub fn total(&self) -> u64 {
        self.up + self.down + self.superposed
    }

    /// (up, down, superposed) as fractions of the total.
    pub fn frequencies(&self) -> [f64; 3] {
        let n = self.total().max(1) as f64;
        [
            self.up as f64 / n,
            self.down as f64 / n,
            self.superposed as f64 / n,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickTrial<T> {
    pub index: u64,
    pub seed: u64,
    pub kick: T,
    pub label: MacroLabel,
    pub score: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickStatistics<T> {
    pub distribution: KickDistribution,
    pub trials: u64,
    pub counts: FrequencyTable,
    pub frequencies: [f64; 3],
    /// Born weights (up, down) of the input along the readout axis.
    pub born: [T; 2],
    pub samples: Vec<KickTrial<T>>,
}

/// Per trial: draw a kick, fold it into [0, π], exchange with a fresh device
/// and read its pointer. Tabulates readouts next to the Born weights.
#[allow(clippy::too_many_arguments)]
pub fn kick_statistics<T: Real>(
    system: &StateVector<T>,
    axis: &Axis<T>,
    distribution: KickDistribution,
    preparation: ReservoirPrep<T>,
    reservoir_size: usize,
    trials: u64,
    seed: u64,
    tolerance: T,
) -> Result<KickStatistics<T>> {
    single_spin(system)?;
    distribution.validate()?;
    if trials == 0 {
        return Err(Error::ConfigError("trials must be at least 1".into()));
    }
    let reg = ApparatusRegister::new(DEVICE, reservoir_size)?;
    let samples = (0..trials)
        .into_par_iter()
        .map(|index| {
            let trial_seed = derive_seed(seed, index);
            let mut rng = seeded(trial_seed);
            let kick = T::lit(fold_kick(distribution.sample(&mut rng)));
            let prep = match preparation {
                ReservoirPrep::Randomized { seed } => ReservoirPrep::Randomized {
                    seed: derive_seed(seed, index),
                },
                other => other,
            };
            let r = score_grid_point(system, axis, kick, &prep, reservoir_size, tolerance)?;
            Ok(KickTrial {
                index,
                seed: trial_seed,
                kick,
                label: r.label,
                score: r.score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts = FrequencyTable::default();
    for s in &samples {
        match s.label {
            MacroLabel::Up => counts.up += 1,
            MacroLabel::Down => counts.down += 1,
            _ => counts.superposed += 1,
        }
    }
    let obs = spin_operator(axis);
    let ready = system.tensor(&prepare(&reg, &ReservoirPrep::Singlets)?)?;
    let born = branch_weights(&premeasurement(&obs, &reg)?.apply(&ready)?, &obs, &reg)?;
    Ok(KickStatistics {
        distribution,
        trials,
        counts,
        frequencies: counts.frequencies(),
        born,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::axis_eigenstate;

    #[test]
    fn eigenstate_needs_no_kick() {
        let up = axis_eigenstate(&Axis::<f64>::z(), Sign::Up);
        let found =
            special_state_search(&up, &Axis::z(), &SearchGrid::standard(5), 2, 1e-9).unwrap();
        assert!(found
            .iter()
            .any(|r| r.kick == 0.0 && (r.score - 1.0).abs() < 1e-12));
        for w in found.windows(2) {
            assert!(w[0].score >= w[1].score);
        }
    }

    #[test]
    fn swap_with_aligned_reservoir_is_special() {
        let x = axis_eigenstate(&Axis::<f64>::x(), Sign::Up);
        let prep = ReservoirPrep::Aligned {
            axis: Axis::z(),
            sign: Sign::Up,
        };
        let r = score_grid_point(&x, &Axis::z(), std::f64::consts::PI, &prep, 2, 1e-9).unwrap();
        assert!((r.score - 1.0).abs() < 1e-12);
        assert_eq!(r.label, MacroLabel::Up);
    }

    #[test]
    fn zero_tolerance_generic_grid_is_empty() {
        let s = crate::spin::state_from_bloch(&crate::spin::BlochVector::new(
            0.3,
            0.2,
            (0.25f64 - 0.13).sqrt(),
        ))
        .unwrap();
        let grid = SearchGrid {
            kicks: vec![0.0, 1.0, 2.0],
            preparations: vec![ReservoirPrep::Singlets],
        };
        assert!(special_state_search(&s, &Axis::z(), &grid, 2, 0.0)
            .unwrap()
            .is_empty());
        let empty = SearchGrid {
            kicks: vec![],
            preparations: vec![ReservoirPrep::Singlets],
        };
        assert!(matches!(
            special_state_search(&s, &Axis::z(), &empty, 2, 0.1),
            Err(Error::ConfigError(_))
        ));
        assert!(matches!(
            special_state_search(&s, &Axis::z(), &grid, 2, 0.6),
            Err(Error::ConfigError(_))
        ));
    }

    #[test]
    fn kick_folding() {
        assert_eq!(fold_kick(0.0), 0.0);
        assert!((fold_kick(-1.0) - 1.0).abs() < 1e-15);
        assert!((fold_kick(4.0) - (2.0 * std::f64::consts::PI - 4.0)).abs() < 1e-15);
        assert!((fold_kick(2.0 * std::f64::consts::PI + 0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_kicks_on_eigenstate() {
        let up = axis_eigenstate(&Axis::<f64>::z(), Sign::Up);
        let d = KickDistribution::Uniform {
            location: 0.0,
            scale: 0.0,
        };
        let stats =
            kick_statistics(&up, &Axis::z(), d, ReservoirPrep::Singlets, 2, 50, 1, 1e-9).unwrap();
        assert_eq!(stats.counts.up, 50);
        assert_eq!(stats.frequencies, [1.0, 0.0, 0.0]);
        assert!((stats.born[0] - 1.0).abs() < 1e-12);
        let bad = KickDistribution::Cauchy {
            location: 0.0,
            scale: 0.0,
        };
        assert!(
            kick_statistics(&up, &Axis::z(), bad, ReservoirPrep::Singlets, 2, 5, 1, 1e-9).is_err()
        );
    }
}
