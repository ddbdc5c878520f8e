//! Closed-form ground truth for the Landau family, independent of the grid,
//! quadrature and finite-difference machinery.
//!
//! # Derivation
//!
//! In natural units the lowest-Landau-level state with angular label `m` in
//! the gauge `Λ = g B x y` is
//!
//! ```text
//! ψ(B) = N_m B^{(m+1)/2} (x + iy)^m exp(-B r²/4) exp(i g B x y),
//! N_m  = (π m! 2^{m+1})^{-1/2}.
//! ```
//!
//! Only the modulus prefactor, the Gaussian and the gauge phase depend on
//! `B`, so
//!
//! ```text
//! ∂_B ψ = (u + i g x y) ψ,     u = (m+1)/(2B) − r²/4.
//! ```
//!
//! With `⟨f⟩ = ∫ f |ψ|² d²x`:
//!
//! ```text
//! (∂ψ, ∂ψ) = ⟨u²⟩ + g² ⟨x²y²⟩          (the cross terms are imaginary)
//! β        = −i (ψ, ∂ψ) = g ⟨xy⟩ − i ⟨u⟩
//! G        = ⟨u²⟩ − ⟨u⟩² + g² (⟨x²y²⟩ − ⟨xy⟩²)
//! ```
//!
//! `⟨u⟩` vanishes because `⟨r²⟩ = 2(m+1)/B`, and `⟨xy⟩ = 0` by symmetry of
//! `|ψ|²`. The density `|ψ|² ∝ r^{2m} e^{-B r²/2}` factorizes into a radial
//! part with `⟨r^{2k}⟩ = (m+k)!/m! (2/B)^k` and a uniform angle, whose
//! average of `cos^p θ sin^q θ` is `(p−1)!!(q−1)!!/(p+q)!!` for even `p, q`
//! and zero otherwise. For `m = 0` this gives `G = (g² + 1/4)/B²`.
//!
//! With the connection `Γ_B = g x y` the covariant derivative removes the
//! phase term, `D_B ψ = u ψ`, and `G_cov = ⟨u²⟩ = (m+1)/(4B²)` for every `g`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{QmtError, Result};
use crate::field::ComplexField;
use crate::grid::Grid2D;

/// Moment `⟨x^p y^q⟩` of the density `|ψ_{0,m}(B)|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSpec {
    pub p: u32,
    pub q: u32,
    pub m: u32,
    pub b: f64,
}

fn check_field(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(QmtError::invalid(format!("field strength must be positive, got B = {b}")))
    }
}

fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

pub fn gaussian_moment(spec: MomentSpec) -> Result<f64> {
    check_field(spec.b)?;
    let MomentSpec { p, q, m, b } = spec;
    if p % 2 == 1 || q % 2 == 1 {
        return Ok(0.0);
    }
    let k = (p + q) / 2;
    let angular = double_factorial(p as i64 - 1) * double_factorial(q as i64 - 1)
        / double_factorial((p + q) as i64);
    let radial = (1..=k).fold(1.0, |acc, i| acc * (m + i) as f64 * 2.0 / b);
    let value = radial * angular;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(QmtError::numerical(format!("moment {spec:?} overflows a double")))
    }
}

struct Moments {
    m: u32,
    b: f64,
}

impl Moments {
    fn get(&self, p: u32, q: u32) -> Result<f64> {
        gaussian_moment(MomentSpec { p, q, m: self.m, b: self.b })
    }

    /// `(⟨u⟩, ⟨u²⟩)` for `u = (m+1)/(2B) − r²/4`.
    fn u_moments(&self) -> Result<(f64, f64)> {
        let a = (self.m + 1) as f64 / (2.0 * self.b);
        let r2 = self.get(2, 0)? + self.get(0, 2)?;
        let r4 = self.get(4, 0)? + 2.0 * self.get(2, 2)? + self.get(0, 4)?;
        let mean = a - r2 / 4.0;
        let mean_sq = a * a - a * r2 / 2.0 + r4 / 16.0;
        Ok((mean, mean_sq))
    }
}

/// Exact QMT of the Landau state with label `m` in the gauge `Λ = gBxy`.
pub fn oracle_qmt(b: f64, g: f64, m: u32) -> Result<f64> {
    check_field(b)?;
    let moments = Moments { m, b };
    let (u, u2) = moments.u_moments()?;
    let xy = moments.get(1, 1)?;
    let x2y2 = moments.get(2, 2)?;
    Ok(u2 - u * u + g * g * (x2y2 - xy * xy))
}

/// Exact covariant QMT with the transported connection `Γ_B = g x y`;
/// independent of `g`.
pub fn oracle_covariant_qmt(b: f64, m: u32) -> Result<f64> {
    check_field(b)?;
    let (u, u2) = Moments { m, b }.u_moments()?;
    Ok(u2 - u * u)
}

/// Exact Berry connection `β_B = g ⟨xy⟩`.
pub fn oracle_berry(b: f64, g: f64, m: u32) -> Result<f64> {
    Ok(g * gaussian_moment(MomentSpec { p: 1, q: 1, m, b })?)
}

/// Closed-form `ψ` sampled on `grid`, written out independently of the
/// Landau model module.
pub fn exact_state(b: f64, g: f64, m: u32, grid: &Grid2D) -> Result<ComplexField> {
    check_field(b)?;
    let m_fact: f64 = (1..=m).map(|k| k as f64).product();
    let norm = (b.powi(m as i32 + 1) / (PI * m_fact * 2f64.powi(m as i32 + 1))).sqrt();
    ComplexField::from_fn(*grid, |x, y| {
        let z = Complex64::new(x, y).powu(m);
        let gauss = (-b * (x * x + y * y) / 4.0).exp();
        z * norm * gauss * Complex64::from_polar(1.0, g * b * x * y)
    })
}

/// Closed-form `∂_B ψ = (u + i g x y) ψ` sampled on `grid`.
pub fn exact_state_derivative(b: f64, g: f64, m: u32, grid: &Grid2D) -> Result<ComplexField> {
    let psi = exact_state(b, g, m, grid)?;
    let a = (m + 1) as f64 / (2.0 * b);
    let samples = psi
        .samples()
        .iter()
        .zip(grid.points())
        .map(|(z, (x, y))| z * Complex64::new(a - (x * x + y * y) / 4.0, g * x * y))
        .collect();
    ComplexField::new(*grid, samples)
}
