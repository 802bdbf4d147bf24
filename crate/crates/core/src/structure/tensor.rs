use core::ops::{Add, Mul, Neg, Sub};

use crate::math;

/// A `D×D` real matrix; `D = 2` unless stated otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor<const D: usize = 2> {
    pub entries: [[f64; D]; D],
}

/// A `D×D` matrix whose entries satisfy `a[i][j] == a[j][i]` exactly.
///
/// Only obtainable through [`Tensor::sym`], [`SymTensor::new`] (which checks
/// the invariant) or arithmetic that preserves it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymTensor<const D: usize = 2> {
    entries: [[f64; D]; D],
}

impl<const D: usize> Default for Tensor<D> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const D: usize> Tensor<D> {
    pub const fn new(entries: [[f64; D]; D]) -> Self {
        Self { entries }
    }

    pub const fn zero() -> Self {
        Self { entries: [[0.0; D]; D] }
    }

    pub fn identity() -> Self {
        let mut t = Self::zero();
        for i in 0..D {
            t.entries[i][i] = 1.0;
        }
        t
    }

    /// Matrix with a single one at `(row, col)`.
    pub fn unit(row: usize, col: usize) -> Self {
        let mut t = Self::zero();
        t.entries[row][col] = 1.0;
        t
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero();
        for i in 0..D {
            for j in 0..D {
                t.entries[i][j] = self.entries[j][i];
            }
        }
        t
    }

    /// Symmetric part `½(P + Pᵀ)`.
    pub fn sym(&self) -> SymTensor<D> {
        let mut s = [[0.0; D]; D];
        for i in 0..D {
            for j in 0..D {
                s[i][j] = 0.5 * (self.entries[i][j] + self.entries[j][i]);
            }
        }
        SymTensor { entries: s }
    }

    /// Frobenius product `P·Q = Σ P_ij Q_ij`.
    pub fn dot(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for i in 0..D {
            for j in 0..D {
                acc += self.entries[i][j] * other.entries[i][j];
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.dot(self))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut t = *self;
        for row in t.entries.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .fold(0.0, |m, v| if math::abs(*v) > m { math::abs(*v) } else { m })
    }
}

impl<const D: usize> SymTensor<D> {
    /// Accepts `entries` only if it is exactly symmetric.
    pub fn new(entries: [[f64; D]; D]) -> Option<Self> {
        for i in 0..D {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return None;
                }
            }
        }
        Some(Self { entries })
    }

    pub const fn zero() -> Self {
        Self { entries: [[0.0; D]; D] }
    }

    pub fn identity() -> Self {
        Tensor::<D>::identity().sym()
    }

    pub fn entries(&self) -> &[[f64; D]; D] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn as_tensor(&self) -> Tensor<D> {
        Tensor::new(self.entries)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.as_tensor().dot(&other.as_tensor())
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.dot(self))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: self.as_tensor().scale(s).entries,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_tensor().is_finite()
    }

    /// `a·self + b·other`, which stays symmetric entrywise.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mut s = [[0.0; D]; D];
        for i in 0..D {
            for j in 0..D {
                s[i][j] = a * self.entries[i][j] + b * other.entries[i][j];
            }
        }
        Self { entries: s }
    }
}

impl<const D: usize> From<SymTensor<D>> for Tensor<D> {
    fn from(s: SymTensor<D>) -> Self {
        s.as_tensor()
    }
}

impl<const D: usize> Add for Tensor<D> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..D {
            for j in 0..D {
                self.entries[i][j] += rhs.entries[i][j];
            }
        }
        self
    }
}

impl<const D: usize> Sub for Tensor<D> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..D {
            for j in 0..D {
                self.entries[i][j] -= rhs.entries[i][j];
            }
        }
        self
    }
}

impl<const D: usize> Neg for Tensor<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const D: usize> Mul<Tensor<D>> for f64 {
    type Output = Tensor<D>;
    fn mul(self, rhs: Tensor<D>) -> Tensor<D> {
        rhs.scale(self)
    }
}

impl<const D: usize> Add for SymTensor<D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.combine(1.0, &rhs, 1.0)
    }
}

impl<const D: usize> Sub for SymTensor<D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.combine(1.0, &rhs, -1.0)
    }
}

impl<const D: usize> Neg for SymTensor<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const D: usize> Mul<SymTensor<D>> for f64 {
    type Output = SymTensor<D>;
    fn mul(self, rhs: SymTensor<D>) -> SymTensor<D> {
        rhs.scale(self)
    }
}
