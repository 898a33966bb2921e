//! Data branch: APD signal level, shot and thermal noise, spectral efficiency.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

/// APD and noise constants for the data branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverParams {
    /// APD responsivity γ (A/W).
    pub responsivity: f64,
    /// Split ratio μ: fraction of the beam routed to the PV cell.
    pub mu: f64,
    /// Electron charge q (C).
    pub electron_charge: f64,
    /// Background current I_bg (A).
    pub background_current: f64,
    /// Noise bandwidth B_x (Hz).
    pub bandwidth: f64,
    /// Boltzmann constant K (J/K).
    pub boltzmann: f64,
    /// Temperature T (K).
    pub temperature: f64,
    /// Load resistance R_L (Ω).
    pub load_resistance: f64,
}

impl Default for ReceiverParams {
    fn default() -> Self {
        Self {
            responsivity: 0.6,
            mu: 0.9,
            electron_charge: 1.602e-19,
            background_current: 5.1e-3,
            bandwidth: 811.7e6,
            boltzmann: 1.38e-23,
            temperature: 300.0,
            load_resistance: 1e4,
        }
    }
}

impl ReceiverParams {
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(("mu", format!("must lie in [0, 1], got {}", self.mu)));
        }
        let positive = [
            ("responsivity", self.responsivity),
            ("electron_charge", self.electron_charge),
            ("bandwidth", self.bandwidth),
            ("boltzmann", self.boltzmann),
            ("temperature", self.temperature),
            ("load_resistance", self.load_resistance),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err((field, format!("must be > 0, got {v}")));
            }
        }
        if !(self.background_current >= 0.0) || !self.background_current.is_finite() {
            return Err(("background_current", format!("must be >= 0, got {}", self.background_current)));
        }
        Ok(())
    }
}

/// The scalar `γ(1 − μ)P_beam` fed into the noise and capacity formulas.
///
/// It is responsivity times power, so it is kept as a model-internal level
/// rather than labelled watts or amperes.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DataSignalLevel(pub f64);

impl DataSignalLevel {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Logarithm used in the spectral-efficiency formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum LogBase {
    /// bit/s/Hz.
    #[default]
    #[serde(rename = "2")]
    Two,
    /// nat/s/Hz.
    #[serde(rename = "e")]
    Natural,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::Two => "2",
            LogBase::Natural => "e",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Two => "bit/s/Hz",
            LogBase::Natural => "nat/s/Hz",
        }
    }
}

pub fn data_signal(p_beam: f64, r: &ReceiverParams) -> Result<DataSignalLevel> {
    if !(p_beam >= 0.0) {
        return Err(Error::Domain(format!("beam power must be >= 0, got {p_beam}")));
    }
    Ok(DataSignalLevel(r.responsivity * (1.0 - r.mu) * p_beam))
}

/// `2q(P_data + I_bg)B_x`.
pub fn shot_noise(p_data: DataSignalLevel, r: &ReceiverParams) -> f64 {
    2.0 * r.electron_charge * (p_data.0 + r.background_current) * r.bandwidth
}

/// `4KTB_x / R_L`.
pub fn thermal_noise(r: &ReceiverParams) -> f64 {
    4.0 * r.boltzmann * r.temperature * r.bandwidth / r.load_resistance
}

pub fn total_noise(p_data: DataSignalLevel, r: &ReceiverParams) -> f64 {
    shot_noise(p_data, r) + thermal_noise(r)
}

/// `½·log(1 + P_data²·e / (2π·n²_total))`.
pub fn spectral_efficiency(p_data: DataSignalLevel, n2_total: f64, base: LogBase) -> Result<f64> {
    if !(n2_total > 0.0) {
        return Err(Error::Domain(format!("total noise power must be > 0, got {n2_total}")));
    }
    let snr = p_data.0 * p_data.0 * E / (2.0 * PI * n2_total);
    Ok(0.5 * base.log(1.0 + snr))
}

/// All data-branch quantities at one beam power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommsReport {
    pub p_data: DataSignalLevel,
    pub shot: f64,
    pub thermal: f64,
    pub total: f64,
    pub spectral_efficiency: f64,
}

pub fn evaluate(p_beam: f64, r: &ReceiverParams, base: LogBase) -> Result<CommsReport> {
    let p_data = data_signal(p_beam, r)?;
    let shot = shot_noise(p_data, r);
    let thermal = thermal_noise(r);
    let total = shot + thermal;
    let spectral_efficiency = spectral_efficiency(p_data, total, base)?;
    Ok(CommsReport { p_data, shot, thermal, total, spectral_efficiency })
}
