use crate::error::{QmtError, Result};

/// Uniform rectangular lattice on the physical plane, endpoints included.
///
/// Samples are stored row-major like a raster image: row `j = 0` is the top
/// edge `y = y_max`, rows run downwards, and `x` increases along each row. The
/// flat index of lattice point `(i, j)` is `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
}

impl Grid2D {
    pub const MIN_SAMPLES: usize = 4;

    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
            return Err(QmtError::invalid("grid bounds must be finite"));
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(QmtError::invalid(format!(
                "grid bounds must be increasing, got x [{x_min}, {x_max}], y [{y_min}, {y_max}]"
            )));
        }
        if nx < Self::MIN_SAMPLES || ny < Self::MIN_SAMPLES {
            return Err(QmtError::invalid(format!(
                "grid needs at least {} samples per axis, got {nx}x{ny}",
                Self::MIN_SAMPLES
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max, nx, ny })
    }

    /// Square grid `[-half_width, half_width]^2` with `n` samples per axis.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_bounds(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn y_bounds(&self) -> (f64, f64) {
        (self.y_min, self.y_max)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        // pin the last sample to the bound exactly
        if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.y_min
        } else {
            self.y_max - j as f64 * self.dy()
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Inverse of [`Grid2D::index`].
    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    /// Physical location of flat index `k`.
    pub fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.coords(k);
        (self.x(i), self.y(j))
    }

    /// Iterator over `(x, y)` in storage order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }

    /// Trapezoidal weight of flat index `k` (product of the 1D weights).
    pub fn weight(&self, k: usize) -> f64 {
        let (i, j) = self.coords(k);
        let wx = if i == 0 || i + 1 == self.nx { 0.5 } else { 1.0 };
        let wy = if j == 0 || j + 1 == self.ny { 0.5 } else { 1.0 };
        wx * wy * self.dx() * self.dy()
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    /// Largest absolute coordinate on either axis.
    pub fn half_width(&self) -> f64 {
        [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

impl std::fmt::Display for Grid2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}, {}]x[{}, {}] {}x{}",
            self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_includes_both_endpoints() {
        let g = Grid2D::new(-1.0, 3.0, 0.0, 1.0, 5, 4).unwrap();
        assert_eq!(g.x(0), -1.0);
        assert_eq!(g.x(4), 3.0);
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.y(0), 1.0);
        assert_eq!(g.y(3), 0.0);
        assert_eq!(g.len(), 20);
        assert_eq!(g.point(g.index(2, 1)), (1.0, 1.0 - 1.0 / 3.0));
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid2D::new(1.0, 1.0, 0.0, 1.0, 8, 8).is_err());
        assert!(Grid2D::new(0.0, 1.0, 2.0, 1.0, 8, 8).is_err());
        assert!(Grid2D::new(0.0, 1.0, 0.0, 1.0, 3, 8).is_err());
        assert!(Grid2D::new(0.0, f64::NAN, 0.0, 1.0, 8, 8).is_err());
    }

    #[test]
    fn weights_sum_to_area() {
        let g = Grid2D::new(-2.0, 1.0, 0.5, 4.0, 7, 9).unwrap();
        let total: f64 = (0..g.len()).map(|k| g.weight(k)).sum();
        assert!((total - g.area()).abs() < 1e-12);
    }
}
