//! Fundamental-mode spot radii on the cavity mirrors and the gain module.

use std::f64::consts::PI;

use crate::error::{Error, Radicand, Result};
use crate::ray_matrix::{round_trip, CavityGeometry, System, TransferMatrix};

/// Spot radii in m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotRadii {
    /// On M1.
    pub omega1: f64,
    /// On M2.
    pub omega2: f64,
    /// On the gain module, propagated from M1 over `L1`.
    pub omega3: f64,
}

/// The two fourth-power expressions for ω₁⁴ and ω₂⁴.
pub fn mirror_radicands(m: &TransferMatrix, lambda: f64) -> (f64, f64) {
    let scale = (lambda / PI).powi(2);
    let (a, b, d) = (m.a, m.b, m.d);
    let ad1 = a * d - 1.0;
    let r1 = -scale * b * b * d / (a * ad1);
    let r2 = -scale * b * b * a / (d * ad1);
    (r1, r2)
}

/// Mirror spot radii `(ω₁, ω₂)` from a round-trip matrix.
///
/// Any radicand that is not strictly positive (including one that rounds to
/// zero at the stability edge) is an error naming that radicand.
pub fn mirror_spot_radii(m: &TransferMatrix, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("wavelength must be > 0, got {lambda}")));
    }
    let (r1, r2) = mirror_radicands(m, lambda);
    for (radicand, value) in [(Radicand::Mirror1, r1), (Radicand::Mirror2, r2)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::UnstableCavity { radicand, value });
        }
    }
    Ok((r1.powf(0.25), r2.powf(0.25)))
}

/// Gaussian spot radius after propagating `l1` from the mirror M1:
/// `ω₃² = ω₁²[(1 + L₁/ρ₁)² + (L₁λ/(πω₁²))²]`.
pub fn propagate_spot(omega1: f64, rho1: f64, l1: f64, lambda: f64) -> Result<f64> {
    if !(omega1 > 0.0) || !(lambda > 0.0) || !(l1 >= 0.0) || rho1 == 0.0 {
        return Err(Error::Domain(format!(
            "propagate_spot needs omega1 > 0, lambda > 0, l1 >= 0, rho1 != 0 (got {omega1}, {lambda}, {l1}, {rho1})"
        )));
    }
    let curvature = 1.0 + l1 / rho1;
    let diffraction = l1 * lambda / (PI * omega1 * omega1);
    Ok(omega1 * (curvature * curvature + diffraction * diffraction).sqrt())
}

pub fn spot_radii(g: &CavityGeometry, system: System) -> Result<SpotRadii> {
    let m = round_trip(g, system)?;
    let (omega1, omega2) = mirror_spot_radii(&m, g.lambda)?;
    let omega3 = propagate_spot(omega1, g.rho1, g.l1, g.lambda)?;
    Ok(SpotRadii { omega1, omega2, omega3 })
}
