//! Distance-dependent aperture loss, external beam power and PV output.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ray_matrix::{CavityGeometry, System};

/// Gain/loss constants of the power model plus PV coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudgetParams {
    /// Effective reflectivity R.
    pub reflectivity: f64,
    /// Compounded conversion efficiency η_c.
    pub conversion_efficiency: f64,
    /// Intercept power C (W).
    pub intercept: f64,
    /// Loss-model scale factor N.
    pub loss_scale: f64,
    /// PV slope a₁.
    pub pv_slope: f64,
    /// PV intercept b₁ (W).
    pub pv_intercept: f64,
    /// Pump input power P_in (W). The same quantity is described both as
    /// the electrical input and as the energy stored in the gain module.
    pub pump_input_power: f64,
}

impl Default for LinkBudgetParams {
    fn default() -> Self {
        Self {
            reflectivity: 0.2618,
            conversion_efficiency: 0.3384,
            intercept: -51.83,
            loss_scale: 1.0,
            pv_slope: 0.3487,
            pv_intercept: -1.535,
            pump_input_power: 210.0,
        }
    }
}

impl LinkBudgetParams {
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let r = self.reflectivity;
        if !(r > 0.0 && r < 1.0) {
            return Err(("reflectivity", format!("must lie in (0, 1), got {r}")));
        }
        let eta = self.conversion_efficiency;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(("conversion_efficiency", format!("must lie in (0, 1], got {eta}")));
        }
        if !(self.loss_scale > 0.0) || !self.loss_scale.is_finite() {
            return Err(("loss_scale", format!("must be > 0, got {}", self.loss_scale)));
        }
        if !(self.pv_slope > 0.0) || !self.pv_slope.is_finite() {
            return Err(("pv_slope", format!("must be > 0, got {}", self.pv_slope)));
        }
        if !self.intercept.is_finite() {
            return Err(("intercept", "must be finite".into()));
        }
        if !self.pv_intercept.is_finite() {
            return Err(("pv_intercept", "must be finite".into()));
        }
        if !(self.pump_input_power >= 0.0) || !self.pump_input_power.is_finite() {
            return Err(("pump_input_power", format!("must be >= 0, got {}", self.pump_input_power)));
        }
        Ok(())
    }

    /// Numerator `2(1 − R)η_c / (1 + R)` of the slope efficiency.
    fn gain_numerator(&self) -> f64 {
        2.0 * (1.0 - self.reflectivity) * self.conversion_efficiency / (1.0 + self.reflectivity)
    }

    /// Slope efficiency `dP_beam/dP_in` at a given transmission loss.
    pub fn slope_efficiency(&self, delta_t: f64) -> f64 {
        self.gain_numerator() / (delta_t - self.reflectivity.ln())
    }

    /// Transmission loss at which the unclamped beam power equals `p_beam`
    /// for pump power `p_in`. Not guaranteed positive.
    pub fn loss_for_beam_power(&self, p_in: f64, p_beam: f64) -> f64 {
        self.gain_numerator() * p_in / (p_beam - self.intercept) + self.reflectivity.ln()
    }
}

/// `δ_t(d) = N·exp(−2π b² / (λ d))`.
pub fn transmission_loss(d: f64, b: f64, lambda: f64, n: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("transmission distance must be > 0, got {d}")));
    }
    if !(b > 0.0) || !(lambda > 0.0) || !(n > 0.0) {
        return Err(Error::Domain(format!("aperture, wavelength and N must be > 0 (got {b}, {lambda}, {n})")));
    }
    Ok(n * (-2.0 * PI * b * b / (lambda * d)).exp())
}

/// External beam power without the below-threshold clamp.
pub fn beam_power_unclamped(p_in: f64, delta_t: f64, p: &LinkBudgetParams) -> Result<f64> {
    if !(p_in >= 0.0) || !(delta_t >= 0.0) {
        return Err(Error::Domain(format!("beam_power needs P_in >= 0 and delta_t >= 0 (got {p_in}, {delta_t})")));
    }
    Ok(p.slope_efficiency(delta_t) * p_in + p.intercept)
}

/// External beam power, clamped at 0 W below the lasing threshold.
pub fn beam_power(p_in: f64, delta_t: f64, p: &LinkBudgetParams) -> Result<f64> {
    beam_power_unclamped(p_in, delta_t, p).map(|w| w.max(0.0))
}

/// Radius of the aperture that limits the returning beam: the TIM for the
/// telescope cavity, the gain module otherwise.
pub fn effective_aperture(g: &CavityGeometry, system: System) -> f64 {
    match system {
        System::Bcrb => g.b_tim,
        System::Original => g.b_gain,
    }
}

fn check_split(mu: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("split ratio mu must lie in [0, 1], got {mu}")));
    }
    Ok(())
}

pub fn pv_output_unclamped(p_beam: f64, mu: f64, p: &LinkBudgetParams) -> Result<f64> {
    check_split(mu)?;
    if !(p_beam >= 0.0) {
        return Err(Error::Domain(format!("beam power must be >= 0, got {p_beam}")));
    }
    Ok(p.pv_slope * mu * p_beam + p.pv_intercept)
}

/// PV electrical output `a₁μP_beam + b₁`, clamped at 0 W.
pub fn pv_output(p_beam: f64, mu: f64, p: &LinkBudgetParams) -> Result<f64> {
    pv_output_unclamped(p_beam, mu, p).map(|w| w.max(0.0))
}

/// Evaluated power chain at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub aperture: f64,
    pub delta_t: f64,
    pub p_beam: f64,
    pub p_out: f64,
}

/// Loss, beam power and PV output for `system` at distance `d`.
pub fn power_budget(
    g: &CavityGeometry,
    p: &LinkBudgetParams,
    system: System,
    d: f64,
    p_in: f64,
    mu: f64,
    clamp: bool,
) -> Result<PowerBudget> {
    let aperture = effective_aperture(g, system);
    let delta_t = transmission_loss(d, aperture, g.lambda, p.loss_scale)?;
    let (p_beam, p_out) = if clamp {
        let p_beam = beam_power(p_in, delta_t, p)?;
        (p_beam, pv_output(p_beam, mu, p)?)
    } else {
        let p_beam = beam_power_unclamped(p_in, delta_t, p)?;
        (p_beam, pv_output_unclamped(p_beam.max(0.0), mu, p)?)
    };
    Ok(PowerBudget { aperture, delta_t, p_beam, p_out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn loss_limits() {
        assert_relative_eq!(transmission_loss(1e12, 1.5e-3, 1064e-9, 1.0).unwrap(), 1.0, max_relative = 1e-6);
        assert!(transmission_loss(1e-3, 1.5e-3, 1064e-9, 1.0).unwrap() < 1e-300);
        assert!(matches!(transmission_loss(0.0, 1.5e-3, 1064e-9, 1.0), Err(Error::Domain(_))));
        assert!(transmission_loss(-1.0, 1.5e-3, 1064e-9, 1.0).is_err());
    }

    #[test]
    fn loss_at_three_metres() {
        // exp(-2π·(1.5e-3)² / (1064e-9 · 3)) = exp(-4.428876...)
        let v = transmission_loss(3.0, 1.5e-3, 1064e-9, 1.0).unwrap();
        assert_abs_diff_eq!(v, 0.011927161, epsilon = 1e-9);
    }

    #[test]
    fn beam_power_examples() {
        let p = LinkBudgetParams::default();
        assert_abs_diff_eq!(beam_power(210.0, 0.0, &p).unwrap(), 10.21, epsilon = 0.01);
        assert_abs_diff_eq!(beam_power(250.0, 0.0, &p).unwrap(), 22.03, epsilon = 0.01);
        assert_eq!(beam_power(0.0, 0.0, &p).unwrap(), 0.0);
        assert_eq!(beam_power_unclamped(0.0, 0.0, &p).unwrap(), p.intercept);
        assert!(beam_power(-1.0, 0.0, &p).is_err());
        assert!(beam_power(1.0, -0.1, &p).is_err());
    }

    #[test]
    fn apertures() {
        let g = CavityGeometry::default();
        assert_eq!(effective_aperture(&g, System::Bcrb), 0.010);
        assert_eq!(effective_aperture(&g, System::Original), 0.0015);
    }

    #[test]
    fn equal_apertures_give_equal_budgets() {
        let g = CavityGeometry { b_tim: 2e-3, b_gain: 2e-3, ..CavityGeometry::default() };
        let p = LinkBudgetParams { loss_scale: 10.0, ..Default::default() };
        for d in [1.0, 3.0, 10.0, 50.0] {
            let a = power_budget(&g, &p, System::Bcrb, d, 210.0, 1.0, true).unwrap();
            let b = power_budget(&g, &p, System::Original, d, 210.0, 1.0, true).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pv_examples() {
        let p = LinkBudgetParams::default();
        assert_abs_diff_eq!(pv_output(22.0, 1.0, &p).unwrap(), 6.1364, epsilon = 1e-4);
        assert_eq!(pv_output(0.0, 1.0, &p).unwrap(), 0.0);
        let zero = -p.pv_intercept / p.pv_slope;
        assert_abs_diff_eq!(pv_output_unclamped(zero, 1.0, &p).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(pv_output(zero, 1.0, &p).unwrap(), 0.0);
        assert!(matches!(pv_output(10.0, 1.5, &p), Err(Error::Domain(_))));
        assert!(pv_output(10.0, -0.1, &p).is_err());
    }

    #[test]
    fn loss_inversion_round_trip() {
        let p = LinkBudgetParams::default();
        let delta = p.loss_for_beam_power(210.0, 5.0);
        assert_abs_diff_eq!(beam_power(210.0, delta, &p).unwrap(), 5.0, epsilon = 1e-9);
    }

    #[test]
    fn validation_names_field() {
        let p = LinkBudgetParams { reflectivity: 1.0, ..Default::default() };
        assert_eq!(p.validate().unwrap_err().0, "reflectivity");
        let p = LinkBudgetParams { loss_scale: 0.0, ..Default::default() };
        assert_eq!(p.validate().unwrap_err().0, "loss_scale");
    }
}
