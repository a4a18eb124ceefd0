//! Post-selection rules selectable by name.

use crate::error::Result;
use crate::protocol::optimal_postselection;
use crate::quantum::{HermitianObservable, SystemState};
use crate::registry::{Named, Registry};

pub trait PostSelectionRule: Named + Send + Sync {
    fn post_state(&self, psi_i: &SystemState, observable: &HermitianObservable) -> Result<SystemState>;
}

/// ψ_f = Â ψ_i/⟨Â²⟩^{1/2}
pub struct OptimalRule;

/// ψ_f = ψ_i
pub struct InitialRule;

impl Named for OptimalRule {
    fn name(&self) -> &'static str {
        "optimal"
    }
}

impl Named for InitialRule {
    fn name(&self) -> &'static str {
        "initial"
    }
}

impl PostSelectionRule for OptimalRule {
    fn post_state(&self, psi_i: &SystemState, observable: &HermitianObservable) -> Result<SystemState> {
        Ok(optimal_postselection(psi_i, observable)?.post_selection.state().clone())
    }
}

impl PostSelectionRule for InitialRule {
    fn post_state(&self, psi_i: &SystemState, _observable: &HermitianObservable) -> Result<SystemState> {
        Ok(psi_i.clone())
    }
}

pub fn postselection_registry() -> Registry<dyn PostSelectionRule> {
    let mut reg: Registry<dyn PostSelectionRule> = Registry::new("post-selection rule");
    reg.register(Box::new(OptimalRule));
    reg.register(Box::new(InitialRule));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bloch_state, sigma_z, spectral_decompose, QubitAngles};

    #[test]
    fn rules_by_name() {
        let reg = postselection_registry();
        let obs = spectral_decompose(&sigma_z()).unwrap();
        let psi = bloch_state(QubitAngles::new(std::f64::consts::PI / 3.0, 0.0));
        let opt = reg.get("optimal").unwrap().post_state(&psi, &obs).unwrap();
        assert!((opt.inner(&psi).norm() - 0.5).abs() < 1e-12);
        let same = reg.get("initial").unwrap().post_state(&psi, &obs).unwrap();
        assert!((same.inner(&psi).norm() - 1.0).abs() < 1e-12);
        assert!(reg.get("orthogonal").is_err());
    }
}
