//! Leading-order Fisher information from the weak-coupling expansions.

use serde::Serialize;

use crate::error::Result;
use crate::fisher::qfi_coupling;
use crate::protocol::WvaSetup;
use crate::quantum::meter_moment;
use crate::registry::{Named, Registry};

/// Beyond g·Δ·a_max = 0.3 the leading-order formulas are flagged.
pub const SERIES_VALIDITY_LIMIT: f64 = 0.3;

#[derive(Debug, Clone, Serialize)]
pub struct SeriesFisher {
    pub variant: &'static str,
    pub qfi: f64,
    pub fm: f64,
    pub fpf: f64,
    pub fps: f64,
    /// Set when g·Δ·a_max exceeds [`SERIES_VALIDITY_LIMIT`] or a denominator
    /// of the expansion turned non-positive.
    pub warning: bool,
}

impl SeriesFisher {
    pub fn fm_over_qfi(&self) -> f64 {
        self.fm / self.qfi
    }

    pub fn fpf_over_qfi(&self) -> f64 {
        self.fpf / self.qfi
    }
}

pub trait SeriesVariant: Named + Send + Sync {
    /// (𝓕_m, F_pf, extra warning)
    fn leading_order(&self, setup: &WvaSetup, g: f64) -> (f64, f64, bool);
}

/// ψ_f = Â ψ_i/⟨Â²⟩^{1/2}:
/// 𝓕_m = 𝓕 δ²/(δ² + g²Z), F_pf = 4g²κ²⟨Â²⟩²Δ⁴[1/(δ² + g²Z) + 1/(1 − δ² − g²Z)]
/// with κ = 1 − δ⟨Â³⟩/⟨Â²⟩^{3/2} and Z = κ⟨Â²⟩Δ².
pub struct OptimalSeries;

/// ψ_f = ψ_i: 𝓕_m → 4⟨Â⟩²Δ², F_pf → 4(⟨Â²⟩ − ⟨Â⟩²)Δ².
pub struct IdentitySeries;

/// Near ⟨ψ_f|ψ_i⟩ = 0: 𝓕_m = 4δ²|A_fi|²Δ²/(δ² + g²|A_fi|²Δ²),
/// F_pf = 4g²|A_fi|⁴Δ⁴/(δ² + g²|A_fi|²Δ²).
pub struct GenericDipSeries;

impl Named for OptimalSeries {
    fn name(&self) -> &'static str {
        "opt"
    }
}

impl Named for IdentitySeries {
    fn name(&self) -> &'static str {
        "identity"
    }
}

impl Named for GenericDipSeries {
    fn name(&self) -> &'static str {
        "generic_dip"
    }
}

impl SeriesVariant for OptimalSeries {
    fn leading_order(&self, setup: &WvaSetup, g: f64) -> (f64, f64, bool) {
        let a1 = setup.initial_moment(1);
        let a2 = setup.initial_moment(2);
        let a3 = setup.initial_moment(3);
        let m2 = meter_moment(setup.meter(), 2);
        let delta = a1 / a2.sqrt();
        let kappa = 1.0 - delta * a3 / a2.powf(1.5);
        let z = kappa * a2 * m2;
        let qfi = 4.0 * a2 * m2;
        let d2 = delta * delta;
        let inside = d2 + g * g * z;
        let outside = 1.0 - d2 - g * g * z;
        let fm = if inside > 0.0 { qfi * d2 / inside } else { 0.0 };
        let num = 4.0 * g * g * kappa * kappa * a2 * a2 * m2 * m2;
        let mut warn = false;
        let mut fpf = 0.0;
        if num > 0.0 {
            if inside > 0.0 {
                fpf += num / inside;
            }
            if outside > 0.0 {
                fpf += num / outside;
            } else {
                warn = true;
            }
        }
        (fm, fpf, warn)
    }
}

impl SeriesVariant for IdentitySeries {
    fn leading_order(&self, setup: &WvaSetup, _g: f64) -> (f64, f64, bool) {
        let a1 = setup.initial_moment(1);
        let a2 = setup.initial_moment(2);
        let m2 = meter_moment(setup.meter(), 2);
        (4.0 * a1 * a1 * m2, 4.0 * (a2 - a1 * a1).max(0.0) * m2, false)
    }
}

impl SeriesVariant for GenericDipSeries {
    fn leading_order(&self, setup: &WvaSetup, g: f64) -> (f64, f64, bool) {
        let d2 = setup.delta().powi(2);
        let afi2 = setup.matrix_element(1).norm_sqr();
        let m2 = meter_moment(setup.meter(), 2);
        let den = d2 + g * g * afi2 * m2;
        if den == 0.0 {
            return (0.0, 0.0, true);
        }
        (4.0 * d2 * afi2 * m2 / den, 4.0 * g * g * afi2 * afi2 * m2 * m2 / den, false)
    }
}

pub fn series_registry() -> Registry<dyn SeriesVariant> {
    let mut reg: Registry<dyn SeriesVariant> = Registry::new("series variant");
    reg.register(Box::new(OptimalSeries));
    reg.register(Box::new(IdentitySeries));
    reg.register(Box::new(GenericDipSeries));
    reg
}

/// Leading-order 𝓕_m and F_pf of the named variant.
pub fn series_fisher(setup: &WvaSetup, g: f64, variant: &str) -> Result<SeriesFisher> {
    let reg = series_registry();
    let v = reg.get(variant)?;
    let (fm, fpf, warn) = v.leading_order(setup, g);
    let reach = g * setup.meter().delta() * setup.observable().max_abs_eigenvalue();
    Ok(SeriesFisher {
        variant: v.name(),
        qfi: qfi_coupling(setup.psi_i(), setup.observable(), setup.meter()),
        fm,
        fpf,
        fps: fm + fpf,
        warning: warn || reach >= SERIES_VALIDITY_LIMIT,
    })
}
