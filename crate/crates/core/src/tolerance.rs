use crate::error::{Error, Result};

/// Absolute thresholds used by every numerical decision in the crate.
///
/// * `eps_eig` – eigenvalues closer than this are one spectral breakpoint.
/// * `eps_proj` – residual bound for hermiticity, idempotency, range
///   containment and numerical rank.
/// * `eps_recon` – max-norm bound under which two elements count as equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub eps_eig: f64,
    pub eps_proj: f64,
    pub eps_recon: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps_eig: 1e-8,
            eps_proj: 1e-9,
            eps_recon: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn new(eps_eig: f64, eps_proj: f64, eps_recon: f64) -> Result<Self> {
        let tol = Self {
            eps_eig,
            eps_proj,
            eps_recon,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_eig", self.eps_eig),
            ("eps_proj", self.eps_proj),
            ("eps_recon", self.eps_recon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        if self.eps_eig < self.eps_proj {
            return Err(Error::InvalidTolerance(format!(
                "eps_eig ({:e}) must not be smaller than eps_proj ({:e})",
                self.eps_eig, self.eps_proj
            )));
        }
        Ok(())
    }
}
