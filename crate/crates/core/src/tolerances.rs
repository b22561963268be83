//! Numerical thresholds shared by the checks.

/// Tolerance configuration. `Default` gives the reference values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Below this `det g` an immersion is rejected.
    pub degenerate_det: f64,
    /// Symplectic threshold on `cos α`.
    pub lagrangian_cos: f64,
    /// Threshold on `sin α` for the adapted frame.
    pub complex_sin: f64,
    /// Normal-seed projections shorter than this fall back to the next seed.
    pub seed_projection: f64,
    /// Relative step of the central differences used for `∇cos α`.
    pub fd_relative_step: f64,
    /// Criticality gate for the second-variation formulas.
    pub criticality: f64,
    /// Negative symbol determinants below `-ellipticity_violation` are bugs.
    pub ellipticity_violation: f64,
    /// Far-field remainder bound at the largest probe radius.
    pub far_remainder: f64,
    /// Relative error bound of the two-term near-origin expansion.
    pub near_relative: f64,
    /// Residual bound for the angle identities on the reference grid.
    pub pde_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            degenerate_det: 1e-14,
            lagrangian_cos: 1e-12,
            complex_sin: 1e-10,
            seed_projection: 1e-6,
            fd_relative_step: 1e-5,
            criticality: 1e-7,
            ellipticity_violation: 1e-9,
            far_remainder: 1e-2,
            near_relative: 1e-3,
            pde_residual: 1e-5,
        }
    }
}
