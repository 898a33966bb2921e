//! Stability-boundary searches and loss-scale calibration.
//!
//! Boundaries are located by a coarse scan followed by bisection; the value
//! returned is always the stable end of the final bracket.

use crate::error::{Error, Result};
use crate::gaussian_beam::spot_radii;
use crate::link_budget::LinkBudgetParams;
use crate::ray_matrix::{is_stable, round_trip_bcrb, CavityGeometry, System};

/// Stride of the coarse distance scan (m).
pub const DISTANCE_SCAN_STRIDE: f64 = 0.1;
/// Width of the final distance bracket (m).
pub const DISTANCE_TOLERANCE: f64 = 1e-3;
/// Relative width of the final ρ₂ bracket.
pub const RHO2_RELATIVE_TOLERANCE: f64 = 1e-3;
/// Points in the log-spaced ρ₂ scan.
const RHO2_SCAN_POINTS: usize = 400;
/// Lower end of the ρ₂ scan relative to its upper limit.
const RHO2_SCAN_SPAN: f64 = 1e-4;
/// Minimum sample count for the spot-radius maximum.
pub const MIN_SPOT_SAMPLES: usize = 200;

fn stable_at(g: &CavityGeometry) -> bool {
    round_trip_bcrb(g).map(|m| is_stable(&m)).unwrap_or(false)
}

/// Result of [`max_stable_distance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableBoundary {
    /// Upper edge of the first stable band (m).
    pub d_max: f64,
    /// Number of disjoint stable bands seen by the coarse scan.
    pub band_count: usize,
    /// First stable scan point (m).
    pub d_first_stable: f64,
    /// True when the band is still stable at `d_hi`.
    pub open_ended: bool,
}

/// Largest transmission distance of the first stable band of the telescope
/// cavity, searched over `(0, d_hi]`.
pub fn max_stable_distance(g: &CavityGeometry, d_hi: f64) -> Result<StableBoundary> {
    g.validate()?;
    if !(d_hi > 0.0) {
        return Err(Error::Domain(format!("d_hi must be > 0, got {d_hi}")));
    }
    let steps = (d_hi / DISTANCE_SCAN_STRIDE).floor() as usize;
    let mut grid: Vec<f64> = (1..=steps).map(|k| k as f64 * DISTANCE_SCAN_STRIDE).collect();
    if grid.last().is_none_or(|&last| d_hi - last > 1e-12) {
        grid.push(d_hi);
    }
    let flags: Vec<bool> = grid.iter().map(|&d| stable_at(&g.with_distance(d))).collect();

    let band_count = flags.iter().enumerate().filter(|&(i, &s)| s && (i == 0 || !flags[i - 1])).count();
    let first = flags.iter().position(|&s| s).ok_or(Error::NoStableRegion { d_hi })?;
    let exit = flags[first..].iter().position(|&s| !s).map(|k| first + k);

    let Some(exit) = exit else {
        return Ok(StableBoundary { d_max: d_hi, band_count, d_first_stable: grid[first], open_ended: true });
    };

    let (mut lo, mut hi) = (grid[exit - 1], grid[exit]);
    while hi - lo > DISTANCE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if stable_at(&g.with_distance(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(StableBoundary { d_max: lo, band_count, d_first_stable: grid[first], open_ended: false })
}

/// Smallest positive M2 curvature radius, up to `rho2_hi`, that keeps the
/// telescope cavity stable at distance `d`.
pub fn required_rho2(g: &CavityGeometry, d: f64, rho2_hi: f64) -> Result<f64> {
    if !(rho2_hi > 0.0) || !(d > 0.0) {
        return Err(Error::Domain(format!("required_rho2 needs d > 0 and rho2_hi > 0 (got {d}, {rho2_hi})")));
    }
    let base = g.with_distance(d);
    base.validate()?;
    let lo_end = rho2_hi * RHO2_SCAN_SPAN;
    let ratio = (rho2_hi / lo_end).powf(1.0 / (RHO2_SCAN_POINTS - 1) as f64);
    let grid: Vec<f64> = (0..RHO2_SCAN_POINTS)
        .map(|k| if k == RHO2_SCAN_POINTS - 1 { rho2_hi } else { lo_end * ratio.powi(k as i32) })
        .collect();
    let first = grid
        .iter()
        .position(|&r| stable_at(&base.with_rho2(r)))
        .ok_or_else(|| Error::Infeasible(format!("no rho2 in (0, {rho2_hi}] m stabilizes d = {d} m")))?;
    if first == 0 {
        return Ok(grid[0]);
    }
    let (mut lo, mut hi) = (grid[first - 1], grid[first]);
    while (hi - lo) > RHO2_RELATIVE_TOLERANCE * hi {
        let mid = 0.5 * (lo + hi);
        if stable_at(&base.with_rho2(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Largest gain-module spot radius ω₃ over `samples` evenly spaced
/// distances in `[d_lo, d_hi]`.
pub fn max_spot_over_range(g: &CavityGeometry, d_lo: f64, d_hi: f64, samples: usize) -> Result<f64> {
    if !(d_lo > 0.0) || !(d_hi >= d_lo) {
        return Err(Error::Domain(format!("distance range must satisfy 0 < lo <= hi (got [{d_lo}, {d_hi}])")));
    }
    let ds: Vec<f64> = if d_hi == d_lo {
        vec![d_lo]
    } else {
        let n = samples.max(MIN_SPOT_SAMPLES);
        (0..n).map(|i| d_lo + (d_hi - d_lo) * i as f64 / (n - 1) as f64).collect()
    };
    let mut best = 0.0_f64;
    for d in ds {
        let s = spot_radii(&g.with_distance(d), System::Bcrb).map_err(|e| match e {
            Error::UnstableCavity { .. } => Error::UnstableInRange { d },
            other => other,
        })?;
        best = best.max(s.omega3);
    }
    Ok(best)
}

/// Operating point that pins the loss scale N: the baseline cavity delivers
/// `p_beam` at distance `d` with pump power `p_in`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationAnchor {
    /// m
    pub d: f64,
    /// W
    pub p_beam: f64,
    /// W
    pub p_in: f64,
}

impl Default for CalibrationAnchor {
    fn default() -> Self {
        Self { d: 3.0, p_beam: 5.0, p_in: 210.0 }
    }
}

/// Fits N so that the power model reproduces the anchor through an
/// aperture of radius `b`.
pub fn calibrate_n(anchor: &CalibrationAnchor, b: f64, lambda: f64, p: &LinkBudgetParams) -> Result<f64> {
    if !(anchor.d > 0.0) || !(b > 0.0) || !(lambda > 0.0) || !(anchor.p_in > 0.0) {
        return Err(Error::Domain("calibration needs positive anchor distance, aperture, wavelength and pump power".into()));
    }
    if !(anchor.p_beam > p.intercept) {
        return Err(Error::AnchorInfeasible { required_loss: f64::NEG_INFINITY });
    }
    let required_loss = p.loss_for_beam_power(anchor.p_in, anchor.p_beam);
    // Relative guard: an anchor at the zero-loss beam power leaves only
    // rounding noise in the required loss.
    if !(required_loss > 1e-12 * p.reflectivity.ln().abs()) {
        return Err(Error::AnchorInfeasible { required_loss });
    }
    let shape = (-2.0 * std::f64::consts::PI * b * b / (lambda * anchor.d)).exp();
    Ok(required_loss / shape)
}
