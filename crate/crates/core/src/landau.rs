//! Lowest-Landau-level states of a charged particle in a uniform field.
//!
//! Units are `ħ = c = |e| = 1`, so the field strength `B > 0` is the only
//! scale. In the symmetric gauge
//!
//! ```text
//! ψ_{0,m} = sqrt(B^{m+1} / (π m! 2^{m+1})) (x + iy)^m exp(−B r²/4)
//! ```
//!
//! and the gauge family `Λ = g B x y` multiplies it by `exp(i g B x y)`;
//! `g = 0` is the symmetric gauge and `g = 1/2` the Landau gauge.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{QmtError, Result};
use crate::expr::{ExprAst, Node};
use crate::family::{Normalization, StateFamily};
use crate::field::ComplexField;
use crate::geometry::{Connection, GaugePhase};
use crate::grid::Grid2D;
use crate::params::ParamPoint;

pub const MODEL_NAME: &str = "landau";
pub const FIELD_PARAM: &str = "B";
pub const DEFAULT_N: usize = 256;
pub const DEFAULT_N_SIGMA: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauParams {
    pub b: f64,
    pub g: f64,
    pub m: u32,
}

impl LandauParams {
    pub fn new(b: f64, g: f64, m: u32) -> Result<Self> {
        check_field(b)?;
        if !g.is_finite() {
            return Err(QmtError::invalid(format!("gauge parameter g must be finite, got {g}")));
        }
        Ok(Self { b, g, m })
    }

    /// Cyclotron frequency `|eB|/c`; informational only.
    pub fn omega(&self) -> f64 {
        self.b.abs()
    }

    pub fn point(&self) -> ParamPoint {
        ParamPoint::from_pairs([(FIELD_PARAM, self.b)]).expect("B is finite")
    }
}

fn check_field(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(QmtError::invalid(format!("magnetic field must satisfy B > 0, got {b}")))
    }
}

fn normalization(b: f64, m: u32) -> f64 {
    let m_factorial: f64 = (1..=m).map(f64::from).product();
    let two_pow = 2f64.powi(m as i32 + 1);
    (b.powi(m as i32 + 1) / (PI * m_factorial * two_pow)).sqrt()
}

/// Symmetric-gauge ground state with angular momentum `m`.
pub fn landau_state(b: f64, m: u32, grid: &Grid2D) -> Result<ComplexField> {
    check_field(b)?;
    let c = normalization(b, m);
    ComplexField::from_fn(*grid, |x, y| {
        let radial = c * (-0.25 * b * (x * x + y * y)).exp();
        Complex64::new(x, y).powu(m) * radial
    })
}

/// `‖(L_z − m) ψ‖` with `L_z = −i (x ∂_y − y ∂_x)`.
///
/// Spatial derivatives use the fourth-order central stencil on lattice
/// points at least two samples away from the boundary.
pub fn lz_residual(field: &ComplexField, m: i64) -> f64 {
    let grid = field.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    if nx < 5 || ny < 5 {
        return 0.0;
    }
    // rows run from y_max downwards, so the y step is negative
    let (hx, hy) = (grid.dx(), -grid.dy());
    let stencil = |fm2: Complex64, fm1: Complex64, fp1: Complex64, fp2: Complex64, h: f64| {
        (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
    };
    let mut terms = Vec::with_capacity((nx - 4) * (ny - 4));
    for j in 2..ny - 2 {
        let y = grid.y(j);
        for i in 2..nx - 2 {
            let x = grid.x(i);
            let d_x = stencil(field.at(i - 2, j), field.at(i - 1, j), field.at(i + 1, j), field.at(i + 2, j), hx);
            let d_y = stencil(field.at(i, j - 2), field.at(i, j - 1), field.at(i, j + 1), field.at(i, j + 2), hy);
            let lz = Complex64::new(0.0, -1.0) * (x * d_y - y * d_x);
            let r = lz - field.at(i, j) * m as f64;
            terms.push(r.norm_sqr());
        }
    }
    (crate::field::pairwise_sum(&terms) * grid.dx() * grid.dy()).sqrt()
}

/// `B ↦ ψ_{0,m}(B) · exp(i g B x y)`, a one-parameter family in `B > 0`.
pub fn landau_family(m: u32, g: f64) -> Result<StateFamily> {
    if !g.is_finite() {
        return Err(QmtError::invalid(format!("gauge parameter g must be finite, got {g}")));
    }
    let name = format!("landau(m={m}, g={g})");
    let family = StateFamily::new(&name, &[FIELD_PARAM], Normalization::Trust, move |at: &ParamPoint, grid: &Grid2D| {
        let b = at.require(FIELD_PARAM)?;
        let psi = landau_state(b, m, grid)?;
        if g == 0.0 {
            return Ok(psi);
        }
        let samples = psi
            .samples()
            .iter()
            .zip(grid.points())
            .map(|(z, (x, y))| z * Complex64::from_polar(1.0, g * b * x * y))
            .collect();
        ComplexField::new(*grid, samples)
    })?;
    family.with_positive(FIELD_PARAM)
}

/// Gauge phase `α = g B x y` with its analytic derivative `∂_B α = g x y`.
pub fn landau_phase(g: f64) -> Result<GaugePhase> {
    let alpha = ExprAst::from_node(
        Node::product([Node::Const(g), Node::param(FIELD_PARAM), Node::X, Node::Y]),
        &[FIELD_PARAM],
    )?;
    let d_b = ExprAst::from_node(Node::product([Node::Const(g), Node::X, Node::Y]), &[FIELD_PARAM])?;
    let probe = ParamPoint::from_pairs([(FIELD_PARAM, 1.0)])?;
    GaugePhase::with_derivatives(alpha, vec![(FIELD_PARAM, d_b)], &probe)
}

/// Connection `Γ_B = g x y`: zero in the symmetric gauge, transported along
/// the gauge family otherwise.
pub fn landau_connection(g: f64) -> Result<Connection> {
    if g == 0.0 {
        return Ok(Connection::zero(&[FIELD_PARAM]));
    }
    let gamma = ExprAst::from_node(Node::product([Node::Const(g), Node::X, Node::Y]), &[FIELD_PARAM])?;
    Connection::new(vec![(FIELD_PARAM, gamma)])
}

/// Alternative closed form `(g² + 1/2)/B`, reported next to the computed
/// values for comparison. It disagrees with direct evaluation; the exact
/// value is [`crate::oracle::oracle_qmt`].
pub fn reference_qmt_paper(b: f64, g: f64) -> Result<f64> {
    check_field(b)?;
    Ok((g * g + 0.5) / b)
}

/// Square grid of half-width `n_sigma / sqrt(B)`: the ground-state density
/// has standard deviation `1/sqrt(B)` per coordinate.
pub fn default_grid(b: f64, n: usize, n_sigma: f64) -> Result<Grid2D> {
    check_field(b)?;
    if !(n_sigma > 0.0 && n_sigma.is_finite()) {
        return Err(QmtError::invalid(format!("n_sigma must be positive, got {n_sigma}")));
    }
    Grid2D::square(n_sigma / b.sqrt(), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::inner_product;

    fn grid(b: f64) -> Grid2D {
        default_grid(b, DEFAULT_N, DEFAULT_N_SIGMA).unwrap()
    }

    #[test]
    fn ground_state_at_origin() {
        let g = Grid2D::square(8.0, 65).unwrap();
        let psi = landau_state(1.0, 0, &g).unwrap();
        assert!((psi.at(32, 32).re - (1.0 / (2.0 * PI)).sqrt()).abs() < 1e-15);
        let psi1 = landau_state(2.7, 1, &g).unwrap();
        assert_eq!(psi1.at(32, 32), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn states_are_normalized() {
        for m in 0..4 {
            let psi = landau_state(1.0, m, &grid(1.0)).unwrap();
            let n = inner_product(&psi, &psi).unwrap().re;
            assert!((n - 1.0).abs() < 1e-8, "m={m}: {n}");
        }
    }

    #[test]
    fn rejects_non_positive_field() {
        let g = Grid2D::square(1.0, 8).unwrap();
        assert!(landau_state(0.0, 0, &g).is_err());
        assert!(reference_qmt_paper(-1.0, 0.0).is_err());
        assert!(default_grid(0.0, 256, 8.0).is_err());
        assert!(default_grid(1.0, 3, 8.0).is_err());
        assert!(default_grid(1.0, 256, 0.0).is_err());
        assert!(LandauParams::new(-2.0, 0.0, 0).is_err());
    }

    #[test]
    fn angular_momentum_label() {
        let g = grid(1.0);
        let psi0 = landau_state(1.0, 0, &g).unwrap();
        assert!(lz_residual(&psi0, 0) < 1e-6);
        let psi1 = landau_state(1.0, 1, &g).unwrap();
        let r = lz_residual(&psi1, 1);
        assert!(r < 1e-3, "{r}");
        let wrong = lz_residual(&psi1, 0);
        assert!((wrong - 1.0).abs() < 0.05, "{wrong}");
    }

    #[test]
    fn gauge_family_pointwise() {
        let g = Grid2D::square(2.0, 5).unwrap();
        let at = LandauParams::new(1.0, 0.5, 0).unwrap().point();
        let sym = landau_family(0, 0.0).unwrap().evaluate(&at, &g).unwrap();
        let raw = landau_state(1.0, 0, &g).unwrap();
        assert!(sym.max_abs_diff(&raw).unwrap() < 1e-15);

        let gauged = landau_family(0, 0.5).unwrap().evaluate(&at, &g).unwrap();
        // (x, y) = (1, 1) is lattice point (3, 1)
        assert_eq!(g.point(g.index(3, 1)), (1.0, 1.0));
        let z = gauged.at(3, 1);
        assert!((z.norm() - raw.at(3, 1).norm()).abs() < 1e-15);
        assert!((z.arg() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn connection_values() {
        let at = LandauParams::new(1.0, 0.0, 0).unwrap().point();
        let g = Grid2D::new(0.0, 3.0, 0.0, 3.0, 4, 4).unwrap();
        let zero = landau_connection(0.0).unwrap().field(FIELD_PARAM, &at, &g).unwrap();
        assert!(zero.samples().iter().all(|&v| v == 0.0));
        let half = landau_connection(0.5).unwrap().field(FIELD_PARAM, &at, &g).unwrap();
        // (x, y) = (2, 3) is the top row
        assert_eq!(half.at(2, 0), 3.0);
    }

    #[test]
    fn printed_closed_form() {
        assert_eq!(reference_qmt_paper(1.0, 0.0).unwrap(), 0.5);
        assert_eq!(reference_qmt_paper(1.0, 0.5).unwrap(), 0.75);
        assert_eq!(reference_qmt_paper(2.0, 0.0).unwrap(), 0.25);
    }

    #[test]
    fn default_grid_scaling() {
        let g1 = default_grid(1.0, 256, 8.0).unwrap();
        assert_eq!(g1.x_bounds(), (-8.0, 8.0));
        assert_eq!(g1.y_bounds(), (-8.0, 8.0));
        assert_eq!((g1.nx(), g1.ny()), (256, 256));
        let g4 = default_grid(4.0, 256, 8.0).unwrap();
        assert_eq!(g4.half_width(), 0.5 * g1.half_width());
    }
}
