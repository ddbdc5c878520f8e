//! Natural units used throughout the crate.
//!
//! Every formula is written with hbar = c = |e| = 1, so the combination
//! `|e| B / (hbar c)` that appears in the Landau states reduces to `B`.

/// Physical constants, all fixed to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub c: f64,
    pub e_abs: f64,
}

impl UnitSystem {
    pub const NATURAL: UnitSystem = UnitSystem {
        hbar: 1.0,
        c: 1.0,
        e_abs: 1.0,
    };

    /// Short note recorded in run metadata.
    pub fn note() -> &'static str {
        "hbar=c=|e|=1, measure d2x"
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::NATURAL
    }
}
