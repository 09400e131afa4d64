use serde::Serialize;

use super::measure::SignedMeasure;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Positive and negative parts of a finite signed measure.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanPair<T> {
    pub positive_part: Tensor<T>,
    pub negative_part: Tensor<T>,
    pub total_variation: T,
}

impl<T: Scalar> JordanPair<T> {
    /// Atomwise split `ν⁺ = max(ν, 0)`, `ν⁻ = max(−ν, 0)`.
    pub fn of_tensor(atoms: &Tensor<T>) -> Self {
        let positive_part = atoms.map(|a| if a.is_positive() { a.clone() } else { T::zero() });
        let negative_part = atoms.map(|a| if a.is_negative() { -a.clone() } else { T::zero() });
        let total_variation = positive_part.sum() + negative_part.sum();
        JordanPair {
            positive_part,
            negative_part,
            total_variation,
        }
    }

    pub fn positive_mass(&self) -> T {
        self.positive_part.sum()
    }

    pub fn negative_mass(&self) -> T {
        self.negative_part.sum()
    }

    /// `ν⁺ − ν⁻`.
    pub fn reconstruct(&self) -> Tensor<T> {
        let data = self
            .positive_part
            .data()
            .iter()
            .zip(self.negative_part.data())
            .map(|(p, n)| p.clone() - n.clone())
            .collect();
        Tensor::from_vec(self.positive_part.shape().to_vec(), data).expect("same shape")
    }

    pub fn supports_disjoint(&self) -> bool {
        self.positive_part
            .data()
            .iter()
            .zip(self.negative_part.data())
            .all(|(p, n)| p.is_zero() || n.is_zero())
    }

    pub fn summary(&self) -> JordanSummary {
        JordanSummary {
            positive_mass: self.positive_mass().to_f64(),
            negative_mass: self.negative_mass().to_f64(),
            total_variation: self.total_variation.to_f64(),
            negative_atoms: self.negative_part.data().iter().filter(|v| !v.is_zero()).count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JordanSummary {
    pub positive_mass: f64,
    pub negative_mass: f64,
    pub total_variation: f64,
    pub negative_atoms: usize,
}

pub fn jordan_decompose<T: Scalar>(measure: &SignedMeasure<T>) -> JordanPair<T> {
    JordanPair::of_tensor(measure.atoms())
}
