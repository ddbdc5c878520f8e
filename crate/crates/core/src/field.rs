//! Scalar fields sampled on a [`Grid2D`] and the quadrature that turns them
//! into numbers.
//!
//! All integrals use the trapezoidal rule on both axes over the plane
//! (measure `dx dy`). Sums are accumulated pairwise in a fixed order so that
//! the same inputs always produce bit-identical outputs.

use std::ops::{Add, Index};

use num_complex::Complex64;

use crate::error::{QmtError, Result};
use crate::grid::Grid2D;

/// Tolerance on `(f, f) - 1` below which a field counts as normalized.
pub const NORM_TOLERANCE: f64 = 1e-8;

const PAIRWISE_BLOCK: usize = 16;

/// Pairwise summation with a fixed split, so the result depends only on the
/// order of `values`.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    if values.len() <= PAIRWISE_BLOCK {
        values.iter().fold(T::default(), |acc, &v| acc + v)
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

fn first_non_finite<I: Iterator<Item = bool>>(finite: I) -> Option<usize> {
    finite.enumerate().find(|(_, ok)| !ok).map(|(k, _)| k)
}

/// Complex scalar field. Immutable once built; every sample is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid2D,
    samples: Vec<Complex64>,
}

/// Real scalar field. Immutable once built; every sample is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid2D,
    samples: Vec<f64>,
}

impl ComplexField {
    pub fn new(grid: Grid2D, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(QmtError::contract(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(index) = first_non_finite(samples.iter().map(|z| z.is_finite())) {
            return Err(QmtError::NonFinite { what: "complex field".into(), index });
        }
        Ok(Self { grid, samples })
    }

    /// Samples `f(x, y)` at every lattice point.
    pub fn from_fn<F>(grid: Grid2D, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        Self::new(grid, grid.points().map(|(x, y)| f(x, y)).collect())
    }

    pub fn constant(grid: Grid2D, value: Complex64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[self.grid.index(i, j)]
    }

    /// Pointwise map; the result is checked for finiteness.
    pub fn map<F>(&self, f: F) -> Result<ComplexField>
    where
        F: Fn(Complex64) -> Complex64,
    {
        ComplexField::new(self.grid, self.samples.iter().map(|&z| f(z)).collect())
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with<F>(&self, other: &ComplexField, f: F) -> Result<ComplexField>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        same_grid(&self.grid, &other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        ComplexField::new(self.grid, samples)
    }

    pub fn scale(&self, factor: Complex64) -> Result<ComplexField> {
        self.map(|z| z * factor)
    }

    /// Quadrature of `|f|^2`.
    pub fn norm_sq(&self) -> f64 {
        let terms: Vec<f64> = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, z)| self.grid.weight(k) * z.norm_sqr())
            .collect();
        pairwise_sum(&terms)
    }

    pub fn modulus(&self) -> RealField {
        RealField {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z.norm()).collect(),
        }
    }

    /// Largest pointwise distance to another field on the same grid.
    pub fn max_abs_diff(&self, other: &ComplexField) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

impl Index<usize> for ComplexField {
    type Output = Complex64;

    fn index(&self, k: usize) -> &Complex64 {
        &self.samples[k]
    }
}

impl RealField {
    pub fn new(grid: Grid2D, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(QmtError::contract(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(index) = first_non_finite(samples.iter().map(|v| v.is_finite())) {
            return Err(QmtError::NonFinite { what: "real field".into(), index });
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn<F>(grid: Grid2D, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        Self::new(grid, grid.points().map(|(x, y)| f(x, y)).collect())
    }

    pub fn constant(grid: Grid2D, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.samples[self.grid.index(i, j)]
    }

    pub fn zip_with<F>(&self, other: &RealField, f: F) -> Result<RealField>
    where
        F: Fn(f64, f64) -> f64,
    {
        same_grid(&self.grid, &other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        RealField::new(self.grid, samples)
    }

    /// Trapezoidal quadrature of the field itself.
    pub fn integrate(&self) -> f64 {
        let terms: Vec<f64> = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, v)| self.grid.weight(k) * v)
            .collect();
        pairwise_sum(&terms)
    }
}

impl Index<usize> for RealField {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.samples[k]
    }
}

fn same_grid(a: &Grid2D, b: &Grid2D) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(QmtError::GridMismatch)
    }
}

/// `(f, g) = ∫ conj(f) g dx dy`, antilinear in the first slot.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<Complex64> {
    same_grid(&f.grid, &g.grid)?;
    let grid = &f.grid;
    let terms: Vec<Complex64> = f
        .samples
        .iter()
        .zip(&g.samples)
        .enumerate()
        .map(|(k, (a, b))| a.conj() * b * grid.weight(k))
        .collect();
    let value = pairwise_sum(&terms);
    if !value.is_finite() {
        return Err(QmtError::numerical("inner product overflowed"));
    }
    Ok(value)
}

/// Pointwise `f · e^{iα}`.
pub fn apply_phase(f: &ComplexField, alpha: &RealField) -> Result<ComplexField> {
    same_grid(&f.grid, &alpha.grid)?;
    let samples = f
        .samples
        .iter()
        .zip(&alpha.samples)
        .map(|(z, &a)| z * Complex64::from_polar(1.0, a))
        .collect();
    ComplexField::new(f.grid, samples)
}

/// `⟨w⟩ = ∫ w |f|^2 dx dy`.
///
/// Intended for normalized `f`; a warning is logged otherwise but the raw
/// moment is still returned.
pub fn expectation(f: &ComplexField, w: &RealField) -> Result<f64> {
    same_grid(&f.grid, &w.grid)?;
    let norm = f.norm_sq();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        log::warn!("expectation of a non-normalized field (norm^2 = {norm})");
    }
    let grid = &f.grid;
    let terms: Vec<f64> = f
        .samples
        .iter()
        .zip(&w.samples)
        .enumerate()
        .map(|(k, (z, v))| grid.weight(k) * v * z.norm_sqr())
        .collect();
    let value = pairwise_sum(&terms);
    if !value.is_finite() {
        return Err(QmtError::numerical("expectation overflowed"));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian(grid: Grid2D) -> ComplexField {
        ComplexField::from_fn(grid, |x, y| {
            Complex64::new((1.0 / (2.0 * PI)).sqrt() * (-(x * x + y * y) / 4.0).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn pairwise_sum_matches_naive_on_exact_values() {
        let v: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn gaussian_is_normalized() {
        let f = gaussian(Grid2D::square(8.0, 256).unwrap());
        let ip = inner_product(&f, &f).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-10, "{ip}");
        assert_eq!(ip.im, 0.0);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = gaussian(Grid2D::square(8.0, 16).unwrap());
        let b = gaussian(Grid2D::square(8.0, 17).unwrap());
        assert_eq!(inner_product(&a, &b), Err(QmtError::GridMismatch));
        let alpha = RealField::constant(*b.grid(), 0.0).unwrap();
        assert_eq!(apply_phase(&a, &alpha), Err(QmtError::GridMismatch));
        assert_eq!(expectation(&a, &alpha), Err(QmtError::GridMismatch));
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let grid = Grid2D::square(1.0, 4).unwrap();
        let mut s = vec![Complex64::new(0.0, 0.0); 16];
        s[5] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(
            ComplexField::new(grid, s),
            Err(QmtError::NonFinite { what: "complex field".into(), index: 5 })
        );
        assert!(RealField::new(grid, vec![1.0; 15]).is_err());
    }

    #[test]
    fn identity_and_pi_phases() {
        let grid = Grid2D::square(2.0, 8).unwrap();
        let f = gaussian(grid);
        let zero = RealField::constant(grid, 0.0).unwrap();
        assert_eq!(apply_phase(&f, &zero).unwrap(), f);

        let one = ComplexField::constant(grid, Complex64::new(1.0, 0.0)).unwrap();
        let pi = RealField::constant(grid, PI).unwrap();
        let flipped = apply_phase(&one, &pi).unwrap();
        for z in flipped.samples() {
            assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn phase_preserves_modulus() {
        let grid = Grid2D::square(3.0, 33).unwrap();
        let f = gaussian(grid);
        let alpha = RealField::from_fn(grid, |x, y| 7.3 * x * y + x * x - 2.0).unwrap();
        let g = apply_phase(&f, &alpha).unwrap();
        for (a, b) in f.samples().iter().zip(g.samples()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_moments() {
        let grid = Grid2D::square(8.0, 256).unwrap();
        let f = gaussian(grid);
        let xy = RealField::from_fn(grid, |x, y| x * y).unwrap();
        let r2 = RealField::from_fn(grid, |x, y| x * x + y * y).unwrap();
        let one = RealField::constant(grid, 1.0).unwrap();
        assert!(expectation(&f, &xy).unwrap().abs() < 1e-10);
        assert!((expectation(&f, &r2).unwrap() - 2.0).abs() < 1e-8);
        assert!((expectation(&f, &one).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expectation_still_returns_for_unnormalized_fields() {
        let grid = Grid2D::square(1.0, 5).unwrap();
        let f = ComplexField::constant(grid, Complex64::new(1.0, 0.0)).unwrap();
        let one = RealField::constant(grid, 1.0).unwrap();
        assert!((expectation(&f, &one).unwrap() - 4.0).abs() < 1e-12);
    }
}
