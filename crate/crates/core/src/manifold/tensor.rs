use serde::{Deserialize, Serialize};

use super::error::GeometryError;
use crate::exprkit::{simplify, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    None,
    Symmetric,
    Antisymmetric,
}

/// Dense component array with row-major multi-indices (first slot slowest).
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    dim: usize,
    variance: Vec<Variance>,
    symmetry: Symmetry,
    components: Vec<Expr>,
}

pub fn component_count(dim: usize, rank: usize) -> usize {
    dim.pow(rank as u32)
}

pub fn unflatten(mut k: usize, dim: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = k % dim;
        k /= dim;
    }
    idx
}

pub fn flatten(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Sign of the permutation sorting `idx`, or 0 when an index repeats.
pub fn permutation_sign(idx: &[usize]) -> i32 {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return 0;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        0
    } else {
        sign
    }
}

impl TensorField {
    pub fn new(
        dim: usize,
        variance: Vec<Variance>,
        symmetry: Symmetry,
        components: Vec<Expr>,
    ) -> Result<TensorField, GeometryError> {
        let expected = component_count(dim, variance.len());
        if components.len() != expected {
            return Err(GeometryError::Shape(format!(
                "expected {expected} components, got {}",
                components.len()
            )));
        }
        Ok(TensorField {
            dim,
            variance,
            symmetry,
            components,
        })
    }

    pub fn from_fn(
        dim: usize,
        variance: Vec<Variance>,
        symmetry: Symmetry,
        mut f: impl FnMut(&[usize]) -> Expr,
    ) -> TensorField {
        let rank = variance.len();
        let components = (0..component_count(dim, rank))
            .map(|k| f(&unflatten(k, dim, rank)))
            .collect();
        TensorField {
            dim,
            variance,
            symmetry,
            components,
        }
    }

    pub fn scalar(dim: usize, value: Expr) -> TensorField {
        TensorField {
            dim,
            variance: Vec::new(),
            symmetry: Symmetry::None,
            components: vec![value],
        }
    }

    pub fn zero(dim: usize, variance: Vec<Variance>, symmetry: Symmetry) -> TensorField {
        TensorField::from_fn(dim, variance, symmetry, |_| Expr::zero())
    }

    /// A p-form from its independent components `(sorted indices, value)`.
    /// Remaining components follow by antisymmetry.
    pub fn form(dim: usize, degree: usize, entries: &[(Vec<usize>, Expr)]) -> TensorField {
        TensorField::from_fn(dim, vec![Variance::Down; degree], Symmetry::Antisymmetric, |idx| {
            let s = permutation_sign(idx);
            if s == 0 {
                return Expr::zero();
            }
            let mut sorted = idx.to_vec();
            sorted.sort_unstable();
            match entries.iter().find(|(k, _)| *k == sorted) {
                Some((_, v)) if s > 0 => v.clone(),
                Some((_, v)) => -v.clone(),
                None => Expr::zero(),
            }
        })
    }

    /// A vector field (one upper slot).
    pub fn vector(components: Vec<Expr>) -> TensorField {
        let dim = components.len();
        TensorField {
            dim,
            variance: vec![Variance::Up],
            symmetry: Symmetry::None,
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn with_symmetry(mut self, s: Symmetry) -> TensorField {
        self.symmetry = s;
        self
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.components[flatten(idx, self.dim)]
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TensorField {
        TensorField {
            dim: self.dim,
            variance: self.variance.clone(),
            symmetry: self.symmetry,
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn simplified(&self) -> TensorField {
        self.map(simplify)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Structural antisymmetry (after simplification) of all slot pairs.
    pub fn is_structurally_antisymmetric(&self) -> bool {
        let rank = self.rank();
        (0..self.components.len()).all(|k| {
            let idx = unflatten(k, self.dim, rank);
            (0..rank).all(|a| {
                (a + 1..rank).all(|b| {
                    let mut sw = idx.clone();
                    sw.swap(a, b);
                    simplify(&(self.components[k].clone() + self.get(&sw).clone())).is_zero()
                })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for k in 0..64 {
            assert_eq!(flatten(&unflatten(k, 4, 3), 4), k);
        }
    }

    #[test]
    fn permutation_signs() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[2, 0, 1]), 1);
        assert_eq!(permutation_sign(&[1, 1, 0]), 0);
    }

    #[test]
    fn forms_are_antisymmetric() {
        let f = TensorField::form(3, 2, &[(vec![0, 1], Expr::coord("z")), (vec![1, 2], Expr::int(2))]);
        assert_eq!(f.get(&[1, 0]), &-Expr::coord("z"));
        assert!(f.get(&[2, 2]).is_zero());
        assert!(f.is_structurally_antisymmetric());
    }
}
