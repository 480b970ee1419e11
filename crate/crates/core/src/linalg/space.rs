use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor product of labelled finite-dimensional factors.
///
/// Amplitudes are stored row-major over the factor list: the first factor is
/// the slowest index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
    total_dim: usize,
}

impl HilbertSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect();
        Self::from_factors(factors)
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpace("no factors".into()));
        }
        let mut seen = HashSet::new();
        let mut total_dim = 1usize;
        for f in &factors {
            if f.dim == 0 {
                return Err(Error::InvalidSpace(format!(
                    "factor `{}` has dimension 0",
                    f.label
                )));
            }
            if !seen.insert(f.label.as_str()) {
                return Err(Error::LabelCollision(f.label.clone()));
            }
            total_dim = total_dim
                .checked_mul(f.dim)
                .ok_or_else(|| Error::InvalidSpace("dimension overflow".into()))?;
        }
        Ok(Self { factors, total_dim })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|i| self.factors[i].dim)
            .ok_or_else(|| Error::UnknownFactor(label.to_string()))
    }

    /// Concatenation `self ⊗ other`.
    pub fn tensor(&self, other: &HilbertSpace) -> Result<Self> {
        for f in &other.factors {
            if self.position(&f.label).is_some() {
                return Err(Error::LabelCollision(f.label.clone()));
            }
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::from_factors(factors)
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let i = self
            .position(from)
            .ok_or_else(|| Error::UnknownFactor(from.to_string()))?;
        let mut factors = self.factors.clone();
        factors[i].label = to.to_string();
        Self::from_factors(factors)
    }

    /// Subspace made of the named factors, in the order given.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let factors = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                self.dim_of(l).map(|dim| Factor {
                    label: l.to_string(),
                    dim,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_factors(factors)
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim;
        }
        strides
    }

    /// Index bookkeeping for acting on `sub` (a set of this space's factors)
    /// inside the full amplitude vector.
    pub(crate) fn layout(&self, sub: &HilbertSpace) -> Result<Layout> {
        let strides = self.strides();
        let mut positions = Vec::with_capacity(sub.factors.len());
        for f in &sub.factors {
            let p = self
                .position(&f.label)
                .ok_or_else(|| Error::UnknownFactor(f.label.clone()))?;
            if self.factors[p].dim != f.dim {
                return Err(Error::SpaceMismatch(format!(
                    "factor `{}` has dimension {} here but {} in the operand",
                    f.label, self.factors[p].dim, f.dim
                )));
            }
            positions.push(p);
        }
        let sub_radix: Vec<(usize, usize)> = positions
            .iter()
            .map(|&p| (self.factors[p].dim, strides[p]))
            .collect();
        let rest_radix: Vec<(usize, usize)> = (0..self.factors.len())
            .filter(|p| !positions.contains(p))
            .map(|p| (self.factors[p].dim, strides[p]))
            .collect();
        Ok(Layout {
            offsets: mixed_radix_offsets(&sub_radix),
            bases: mixed_radix_offsets(&rest_radix),
        })
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| format!("{}[{}]", x.label, x.dim))
            .collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    /// Full-space offset of each local basis index of the subspace.
    pub offsets: Vec<usize>,
    /// Full-space index of every basis state of the complementary factors.
    pub bases: Vec<usize>,
}

fn mixed_radix_offsets(radix: &[(usize, usize)]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &(dim, stride) in radix {
        let mut next = Vec::with_capacity(out.len() * dim);
        for &o in &out {
            for d in 0..dim {
                next.push(o + d * stride);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dim_is_product() {
        let s = HilbertSpace::new([("a", 2), ("b", 4), ("c", 3)]).unwrap();
        assert_eq!(s.total_dim(), 24);
        assert_eq!(s.strides(), vec![12, 3, 1]);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert_eq!(
            HilbertSpace::new([("a", 2), ("a", 2)]).unwrap_err(),
            Error::LabelCollision("a".into())
        );
        let a = HilbertSpace::single("a", 2).unwrap();
        assert!(matches!(a.tensor(&a), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn layout_covers_every_index_once() {
        let s = HilbertSpace::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let sub = s.select(&["c", "a"]).unwrap();
        let layout = s.layout(&sub).unwrap();
        let mut seen: Vec<usize> = layout
            .bases
            .iter()
            .flat_map(|b| layout.offsets.iter().map(move |o| b + o))
            .collect();
        seen.sort();
        assert_eq!(seen, (0..12).collect::<Vec<_>>());
        // local index 1 of (c, a) is c=0, a=1
        assert_eq!(layout.offsets[1], 6);
    }
}
