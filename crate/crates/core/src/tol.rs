//! Numerical tolerances shared by every module.
//!
//! A single [`Tolerances`] record is installed process-wide. It is read from
//! the `QLOGIC_TOLERANCE` environment variable on first use, falling back to
//! the defaults below.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the environment variable that overrides the global record.
pub const TOLERANCE_ENV: &str = "QLOGIC_TOLERANCE";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max entrywise deviation of `M - M†` accepted for a hermitian operator.
    pub herm: f64,
    /// Max entrywise deviation of `P² - P` accepted for a projection.
    pub proj: f64,
    /// Relative eigenvalue clustering tolerance; the absolute value used for an
    /// operator `a` is `eig * (1 + ‖a‖)`.
    pub eig: f64,
    /// Range-inclusion test `‖q p - p‖ ≤ ord`, also used for orthogonality and
    /// commutation checks.
    pub ord: f64,
    /// Reconstruction tolerance for spectral sums and partitions of unity.
    pub recon: f64,
    /// Slack for probability comparisons such as `ψ(p) ≥ x - prob`.
    pub prob: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-9,
            proj: 1e-9,
            eig: 1e-8,
            ord: 1e-8,
            recon: 1e-8,
            prob: 1e-9,
        }
    }
}

#[derive(Debug, Error)]
pub enum ToleranceError {
    #[error("invalid {TOLERANCE_ENV} value {value:?}: {reason}")]
    Parse { value: String, reason: String },
    #[error("tolerance {field} must be finite and positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("global tolerances were already initialised")]
    AlreadySet,
}

static GLOBAL: OnceLock<Tolerances> = OnceLock::new();

impl Tolerances {
    /// The process-wide record. Initialised from the environment on first call.
    pub fn global() -> &'static Tolerances {
        GLOBAL.get_or_init(|| match std::env::var(TOLERANCE_ENV) {
            Ok(v) => Tolerances::parse(&v).unwrap_or_else(|e| {
                eprintln!("warning: {e}; using default tolerances");
                Tolerances::default()
            }),
            Err(_) => Tolerances::default(),
        })
    }

    /// Install a record before anything has read the global one.
    pub fn set_global(t: Tolerances) -> Result<(), ToleranceError> {
        t.validate()?;
        GLOBAL.set(t).map_err(|_| ToleranceError::AlreadySet)
    }

    /// Parse an override: either a bare number, which replaces every field,
    /// or a JSON object with any subset of the fields.
    pub fn parse(value: &str) -> Result<Tolerances, ToleranceError> {
        let trimmed = value.trim();
        let t = if let Ok(x) = trimmed.parse::<f64>() {
            Tolerances {
                herm: x,
                proj: x,
                eig: x,
                ord: x,
                recon: x,
                prob: x,
            }
        } else {
            serde_json::from_str::<Tolerances>(trimmed).map_err(|e| ToleranceError::Parse {
                value: value.to_string(),
                reason: e.to_string(),
            })?
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), ToleranceError> {
        let fields = [
            ("herm", self.herm),
            ("proj", self.proj),
            ("eig", self.eig),
            ("ord", self.ord),
            ("recon", self.recon),
            ("prob", self.prob),
        ];
        for (field, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ToleranceError::NonPositive { field, value });
            }
        }
        Ok(())
    }

    /// Absolute clustering tolerance for an operator of the given norm.
    pub fn eig_abs(&self, norm: f64) -> f64 {
        self.eig * (1.0 + norm)
    }
}
