//! Dense row-major tensors over small finite index sets.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T> Tensor<T> {
    pub fn from_vec(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let expected = checked_size(&shape).ok_or_else(|| Error::input(format!("tensor shape {shape:?} overflows")))?;
        if expected != data.len() {
            return Err(Error::input(format!(
                "tensor of shape {shape:?} needs {expected} entries, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        for idx in MultiIndex::new(&shape) {
            data.push(f(&idx));
        }
        Tensor { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, index: &[usize]) -> &T {
        &self.data[self.offset(index)]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn indices(&self) -> MultiIndex {
        MultiIndex::new(&self.shape)
    }
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape,
            data: vec![T::zero(); len],
        }
    }

    pub fn sum(&self) -> T {
        self.data.iter().cloned().sum()
    }

    /// Sums out every axis not listed in `keep`. `keep` must be strictly
    /// increasing; the result has those axes in that order.
    pub fn marginalize(&self, keep: &[usize]) -> Tensor<T> {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(keep.iter().all(|&a| a < self.rank()));
        let out_shape: Vec<usize> = keep.iter().map(|&a| self.shape[a]).collect();
        let mut out = Tensor::zeros(out_shape.clone());
        let mut sub = vec![0usize; keep.len()];
        for (idx, v) in self.indices().zip(&self.data) {
            for (s, &a) in sub.iter_mut().zip(keep) {
                *s = idx[a];
            }
            let off = offset_in(&out_shape, &sub);
            out.data[off] += v;
        }
        out
    }

    /// Largest absolute entrywise difference, or `None` on shape mismatch.
    pub fn max_gap(&self, other: &Tensor<T>) -> Option<f64> {
        if self.shape != other.shape {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.gap(b))
                .fold(0.0, f64::max),
        )
    }

    pub fn approx_eq(&self, other: &Tensor<T>, tol: f64) -> bool {
        self.shape == other.shape && self.data.iter().zip(&other.data).all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn min(&self) -> Option<&T> {
        self.data
            .iter()
            .min_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
    }
}

pub(crate) fn offset_in(shape: &[usize], index: &[usize]) -> usize {
    index.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

pub(crate) fn checked_size(shape: &[usize]) -> Option<usize> {
    shape.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n))
}

/// Row-major odometer over all indices of a shape. A rank-0 shape yields
/// exactly one empty index; any zero extent yields nothing.
#[derive(Debug, Clone)]
pub struct MultiIndex {
    shape: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl MultiIndex {
    pub fn new(shape: &[usize]) -> Self {
        MultiIndex {
            shape: shape.to_vec(),
            current: vec![0; shape.len()],
            done: shape.contains(&0),
        }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut axis = self.shape.len();
        loop {
            if axis == 0 {
                self.done = true;
                break;
            }
            axis -= 1;
            self.current[axis] += 1;
            if self.current[axis] < self.shape[axis] {
                break;
            }
            self.current[axis] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    #[test]
    fn multi_index_order() {
        let all: Vec<_> = MultiIndex::new(&[2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
        assert_eq!(MultiIndex::new(&[]).count(), 1);
        assert_eq!(MultiIndex::new(&[3, 0]).count(), 0);
    }

    #[test]
    fn marginalize_rows() {
        let t = Tensor::from_vec(vec![2, 2], vec![rat(1, 2), rat(0, 1), rat(0, 1), rat(1, 2)]).unwrap();
        let m = t.marginalize(&[0]);
        assert_eq!(m.data(), &[rat(1, 2), rat(1, 2)]);
        let total = t.marginalize(&[]);
        assert_eq!(total.shape(), &[] as &[usize]);
        assert_eq!(total.data(), &[Rational::from_integer(1.into())]);
    }

    #[test]
    fn marginalize_composes() {
        let t = Tensor::from_fn(vec![2, 3, 2], |i| (1 + i[0] * 6 + i[1] * 2 + i[2]) as f64);
        let direct = t.marginalize(&[2]);
        let staged = t.marginalize(&[1, 2]).marginalize(&[1]);
        assert_eq!(direct, staged);
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(Tensor::from_vec(vec![2, 2], vec![1.0; 3]).is_err());
    }
}
