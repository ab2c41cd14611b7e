use std::fmt::Debug;
use std::ops::{Add, Mul};

use super::FhtError;

/// Element type an image can hold.
///
/// Integer pixel types accumulate exactly; floating point types use ordinary
/// IEEE addition.
pub trait Pixel:
    Copy + Default + PartialEq + Debug + Send + Sync + Add<Output = Self> + Mul<Output = Self>
{
    fn zero() -> Self {
        Self::default()
    }
    fn to_f64(self) -> f64;
}

impl Pixel for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

impl Pixel for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Pixel for i64 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Pixel for i32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Square single-channel raster whose side is a power of two.
///
/// Pixels are stored row-major and addressed as `(row y, column x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage<T = f64> {
    p: u32,
    data: Vec<T>,
}

/// Returns `p` such that `side == 2^p`, or `None` when `side` is not a power of two.
pub fn log2_exact(side: usize) -> Option<u32> {
    if side.is_power_of_two() {
        Some(side.trailing_zeros())
    } else {
        None
    }
}

impl<T: Pixel> GrayImage<T> {
    /// All-zero image of side `2^p`.
    pub fn zeros(p: u32) -> Self {
        let n = 1usize << p;
        GrayImage {
            p,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn filled(p: u32, value: T) -> Self {
        let n = 1usize << p;
        GrayImage {
            p,
            data: vec![value; n * n],
        }
    }

    /// Wraps row-major data. `side` must be a power of two and `data.len() == side²`.
    pub fn from_vec(side: usize, data: Vec<T>) -> Result<Self, FhtError> {
        let p = log2_exact(side).ok_or(FhtError::NotPowerOfTwo { side })?;
        if data.len() != side * side {
            return Err(FhtError::DataLength {
                expected: side * side,
                actual: data.len(),
            });
        }
        Ok(GrayImage { p, data })
    }

    /// Builds an image by evaluating `f(y, x)` at every pixel.
    pub fn from_fn(p: u32, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let n = 1usize << p;
        let mut data = Vec::with_capacity(n * n);
        for y in 0..n {
            for x in 0..n {
                data.push(f(y, x));
            }
        }
        GrayImage { p, data }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn side(&self) -> usize {
        1usize << self.p
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> T {
        self.data[y * self.side() + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, value: T) {
        let n = self.side();
        self.data[y * n + x] = value;
    }

    pub fn row(&self, y: usize) -> &[T] {
        let n = self.side();
        &self.data[y * n..(y + 1) * n]
    }

    pub fn map<U: Pixel>(&self, f: impl Fn(T) -> U) -> GrayImage<U> {
        GrayImage {
            p: self.p,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Swaps rows and columns.
    pub fn transpose(&self) -> Self {
        let n = self.side();
        GrayImage::from_fn(self.p, |y, x| self.data[x * n + y])
    }

    pub fn sum(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v)
    }

    /// Dot product with another image of the same size, accumulated in `f64`.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.p, other.p, "image sizes differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.to_f64() * b.to_f64())
            .sum()
    }
}

impl GrayImage<f64> {
    /// Linear combination `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.p, other.p, "image sizes differ");
        GrayImage {
            p: self.p,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// Row-major position and value of the largest pixel; ties go to the
    /// lowest index.
    pub fn argmax(&self) -> (usize, usize, f64) {
        let n = self.side();
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        (best / n, best % n, self.data[best])
    }
}
