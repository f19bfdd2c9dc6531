use serde::{Deserialize, Serialize};

/// Rank cutoffs, residual thresholds and PSD slack used by every predicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Multiplies `σ_max · max(m, n) · ε` to form the rank cutoff.
    pub rank_tol_factor: f64,
    /// Relative Frobenius threshold for operator equalities.
    pub residual_tol: f64,
    /// Relative slack on the smallest eigenvalue in PSD tests.
    pub psd_tol: f64,
    /// Deliberate defect injected into `pinv`, used only to show that the
    /// theorem suite detects a broken pseudoinverse.
    #[doc(hidden)]
    #[serde(skip)]
    pub pinv_fault: PinvFault,
}

#[doc(hidden)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PinvFault {
    #[default]
    None,
    /// Flip the sign of the leading singular component of `T†`.
    LeadingSignFlip,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { rank_tol_factor: 1.0, residual_tol: 1e-8, psd_tol: 1e-8, pinv_fault: PinvFault::None }
    }
}

impl ToleranceConfig {
    pub fn with_fault(mut self, fault: PinvFault) -> Self {
        self.pinv_fault = fault;
        self
    }

    /// Rank cutoff for a matrix of the given shape and largest singular value.
    pub fn rank_cutoff(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.rank_tol_factor * rows.max(cols) as f64 * sigma_max * f64::EPSILON
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.rank_tol_factor) && ok(self.residual_tol) && ok(self.psd_tol) {
            Ok(())
        } else {
            Err(crate::LabError::invalid("tolerances must be finite and nonnegative"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_positive() {
        let t = ToleranceConfig::default();
        assert_eq!((t.rank_tol_factor, t.residual_tol, t.psd_tol), (1.0, 1e-8, 1e-8));
        assert!(t.validate().is_ok());
        assert!(ToleranceConfig { psd_tol: -1.0, ..t }.validate().is_err());
    }
}
