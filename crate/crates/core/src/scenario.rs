//! Scenario files: a JSON document holding the cavity, power-model and
//! receiver parameters plus the model choices used for a run.
//!
//! Optical-element lengths (`rho1`, `rho2`, `f_r`, `f1`, `l1`, `l2`,
//! `b_gain`, `b_tim`) are read in millimetres when given as bare numbers,
//! the transmission distance `d` and the calibration anchor distance in
//! metres, and `lambda` in nanometres. Any length may instead be written as
//! a string with an explicit unit, e.g. `"10 m"` or `"1064 nm"`. Missing
//! keys take the reference-system defaults.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::comms::{LogBase, ReceiverParams};
use crate::error::{Error, Result};
use crate::link_budget::LinkBudgetParams;
use crate::ray_matrix::CavityGeometry;
use crate::search::{calibrate_n, CalibrationAnchor};

/// Where the loss scale N comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NSource {
    /// Use `link.loss_scale` as written.
    Explicit,
    /// Fit N to the calibration anchor on every run.
    #[default]
    Calibrated,
}

impl NSource {
    pub fn as_str(self) -> &'static str {
        match self {
            NSource::Explicit => "explicit",
            NSource::Calibrated => "calibrated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelChoices {
    pub log_base: LogBase,
    pub n_source: NSource,
    pub clamp_negative_power: bool,
}

impl Default for ModelChoices {
    fn default() -> Self {
        Self { log_base: LogBase::Two, n_source: NSource::Calibrated, clamp_negative_power: true }
    }
}

/// A complete, validated parameter set. The wavelength lives in
/// `geometry.lambda`; in the file it sits under `model_choices`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scenario {
    pub geometry: CavityGeometry,
    pub link: LinkBudgetParams,
    pub receiver: ReceiverParams,
    pub model_choices: ModelChoices,
    pub calibration: CalibrationAnchor,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate().map_err(|e| match e {
            Error::InvalidGeometry { field, reason } => Error::Validation {
                field: if field == "lambda" { "model_choices.lambda".into() } else { format!("geometry.{field}") },
                reason,
            },
            other => other,
        })?;
        self.link
            .validate()
            .map_err(|(field, reason)| Error::Validation { field: format!("link.{field}"), reason })?;
        self.receiver
            .validate()
            .map_err(|(field, reason)| Error::Validation { field: format!("receiver.{field}"), reason })?;
        let a = &self.calibration;
        for (field, v) in [("anchor_d", a.d), ("anchor_p_in", a.p_in)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation { field: format!("calibration.{field}"), reason: format!("must be > 0, got {v}") });
            }
        }
        if !a.p_beam.is_finite() {
            return Err(Error::Validation { field: "calibration.anchor_p_beam".into(), reason: "must be finite".into() });
        }
        Ok(())
    }

    /// Loss scale N in effect: explicit, or fitted to the anchor through the
    /// gain-module aperture of the baseline cavity.
    pub fn loss_scale(&self) -> Result<f64> {
        match self.model_choices.n_source {
            NSource::Explicit => Ok(self.link.loss_scale),
            NSource::Calibrated => calibrate_n(&self.calibration, self.geometry.b_gain, self.geometry.lambda, &self.link),
        }
    }

    /// Power-model parameters with the effective N filled in.
    pub fn resolved_link(&self) -> Result<LinkBudgetParams> {
        Ok(LinkBudgetParams { loss_scale: self.loss_scale()?, ..self.link })
    }

    pub fn to_json(&self) -> Value {
        let g = &self.geometry;
        let l = &self.link;
        let r = &self.receiver;
        let m = &self.model_choices;
        let c = &self.calibration;
        let len = |v: f64| Value::String(format!("{v} m"));
        json!({
            "geometry": {
                "rho1": len(g.rho1),
                "rho2": len(g.rho2),
                "f_r": len(g.f_r),
                "f1": len(g.f1),
                "magnification": g.magnification,
                "l1": len(g.l1),
                "l2": len(g.l2),
                "d": len(g.d),
                "b_gain": len(g.b_gain),
                "b_tim": len(g.b_tim),
            },
            "link": {
                "reflectivity": l.reflectivity,
                "conversion_efficiency": l.conversion_efficiency,
                "intercept": l.intercept,
                "loss_scale": l.loss_scale,
                "pv_slope": l.pv_slope,
                "pv_intercept": l.pv_intercept,
                "pump_input_power": l.pump_input_power,
            },
            "receiver": {
                "responsivity": r.responsivity,
                "mu": r.mu,
                "electron_charge": r.electron_charge,
                "background_current": r.background_current,
                "bandwidth": r.bandwidth,
                "boltzmann": r.boltzmann,
                "temperature": r.temperature,
                "load_resistance": r.load_resistance,
            },
            "model_choices": {
                "log_base": m.log_base,
                "lambda": len(g.lambda),
                "n_source": m.n_source,
                "clamp_negative_power": m.clamp_negative_power,
            },
            "calibration": {
                "anchor_d": len(c.d),
                "anchor_p_beam": c.p_beam,
                "anchor_p_in": c.p_in,
            },
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawGeometry {
    rho1: Option<Quantity>,
    rho2: Option<Quantity>,
    f_r: Option<Quantity>,
    f1: Option<Quantity>,
    magnification: Option<f64>,
    l1: Option<Quantity>,
    l2: Option<Quantity>,
    d: Option<Quantity>,
    b_gain: Option<Quantity>,
    b_tim: Option<Quantity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawLink {
    reflectivity: Option<f64>,
    conversion_efficiency: Option<f64>,
    intercept: Option<f64>,
    loss_scale: Option<f64>,
    pv_slope: Option<f64>,
    pv_intercept: Option<f64>,
    pump_input_power: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawReceiver {
    responsivity: Option<f64>,
    mu: Option<f64>,
    electron_charge: Option<f64>,
    background_current: Option<f64>,
    bandwidth: Option<f64>,
    boltzmann: Option<f64>,
    temperature: Option<f64>,
    load_resistance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawModelChoices {
    log_base: Option<LogBase>,
    lambda: Option<Quantity>,
    n_source: Option<NSource>,
    clamp_negative_power: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawCalibration {
    anchor_d: Option<Quantity>,
    anchor_p_beam: Option<f64>,
    anchor_p_in: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawScenario {
    geometry: RawGeometry,
    link: RawLink,
    receiver: RawReceiver,
    model_choices: RawModelChoices,
    calibration: RawCalibration,
}

/// Metres per unit for the accepted length suffixes.
fn length_unit(unit: &str) -> Option<f64> {
    Some(match unit {
        "km" => 1e3,
        "m" => 1.0,
        "cm" => 1e-2,
        "mm" => 1e-3,
        "um" | "µm" | "μm" => 1e-6,
        "nm" => 1e-9,
        _ => return None,
    })
}

/// Converts a length given as a bare number in `default_unit` or as a
/// `"<value> <unit>"` string into metres.
fn to_metres(q: &Quantity, default_unit: &str, field: &str) -> Result<f64> {
    match q {
        Quantity::Number(v) => Ok(v * length_unit(default_unit).expect("known default unit")),
        Quantity::Text(s) => {
            let s = s.trim();
            let num = s.trim_end_matches(|c: char| c.is_alphabetic());
            let unit = &s[num.len()..];
            if unit.is_empty() {
                return Err(Error::Unit { field: field.into(), reason: format!("`{s}` has no unit") });
            }
            let value: f64 = num.trim().parse().map_err(|_| Error::Unit {
                field: field.into(),
                reason: format!("`{}` is not a number", num.trim()),
            })?;
            let scale = length_unit(unit).ok_or_else(|| Error::Unit {
                field: field.into(),
                reason: format!("`{unit}` is not a length unit (km, m, cm, mm, um, nm)"),
            })?;
            // Exact for the metre case so saved scenarios reload bit-identically.
            Ok(if scale == 1.0 { value } else { value * scale })
        }
    }
}

/// Parses scenario JSON text. Unknown keys are an error when `strict`,
/// otherwise they are logged and ignored.
pub fn parse_scenario(text: &str, strict: bool) -> Result<Scenario> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawScenario = serde_ignored::deserialize(&mut de, |path| unknown.push(path.to_string()))
        .map_err(|e| Error::Parse(e.to_string()))?;
    de.end().map_err(|e| Error::Parse(e.to_string()))?;
    if !unknown.is_empty() {
        if strict {
            return Err(Error::UnknownKeys(unknown));
        }
        for key in &unknown {
            log::warn!("ignoring unknown config key `{key}`");
        }
    }

    let mut s = Scenario::default();
    let g = &mut s.geometry;
    let rg = &raw.geometry;
    let lengths: [(&Option<Quantity>, &mut f64, &str, &str); 9] = [
        (&rg.rho1, &mut g.rho1, "mm", "geometry.rho1"),
        (&rg.rho2, &mut g.rho2, "mm", "geometry.rho2"),
        (&rg.f_r, &mut g.f_r, "mm", "geometry.f_r"),
        (&rg.f1, &mut g.f1, "mm", "geometry.f1"),
        (&rg.l1, &mut g.l1, "mm", "geometry.l1"),
        (&rg.l2, &mut g.l2, "mm", "geometry.l2"),
        (&rg.d, &mut g.d, "m", "geometry.d"),
        (&rg.b_gain, &mut g.b_gain, "mm", "geometry.b_gain"),
        (&rg.b_tim, &mut g.b_tim, "mm", "geometry.b_tim"),
    ];
    for (q, slot, unit, field) in lengths {
        if let Some(q) = q {
            *slot = to_metres(q, unit, field)?;
        }
    }
    if let Some(m) = rg.magnification {
        g.magnification = m;
    }
    if let Some(q) = &raw.model_choices.lambda {
        g.lambda = to_metres(q, "nm", "model_choices.lambda")?;
    }

    let rl = &raw.link;
    let l = &mut s.link;
    for (v, slot) in [
        (rl.reflectivity, &mut l.reflectivity),
        (rl.conversion_efficiency, &mut l.conversion_efficiency),
        (rl.intercept, &mut l.intercept),
        (rl.loss_scale, &mut l.loss_scale),
        (rl.pv_slope, &mut l.pv_slope),
        (rl.pv_intercept, &mut l.pv_intercept),
        (rl.pump_input_power, &mut l.pump_input_power),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }

    let rr = &raw.receiver;
    let r = &mut s.receiver;
    for (v, slot) in [
        (rr.responsivity, &mut r.responsivity),
        (rr.mu, &mut r.mu),
        (rr.electron_charge, &mut r.electron_charge),
        (rr.background_current, &mut r.background_current),
        (rr.bandwidth, &mut r.bandwidth),
        (rr.boltzmann, &mut r.boltzmann),
        (rr.temperature, &mut r.temperature),
        (rr.load_resistance, &mut r.load_resistance),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }

    let rm = &raw.model_choices;
    if let Some(b) = rm.log_base {
        s.model_choices.log_base = b;
    }
    if let Some(n) = rm.n_source {
        s.model_choices.n_source = n;
    }
    if let Some(c) = rm.clamp_negative_power {
        s.model_choices.clamp_negative_power = c;
    }

    let rc = &raw.calibration;
    if let Some(q) = &rc.anchor_d {
        s.calibration.d = to_metres(q, "m", "calibration.anchor_d")?;
    }
    if let Some(v) = rc.anchor_p_beam {
        s.calibration.p_beam = v;
    }
    if let Some(v) = rc.anchor_p_in {
        s.calibration.p_in = v;
    }

    s.validate()?;
    Ok(s)
}

pub fn load_scenario(path: impl AsRef<Path>, strict: bool) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text, strict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_reference_scenario() {
        for text in ["", "  \n", "{}"] {
            let s = parse_scenario(text, true).unwrap();
            assert_eq!(s, Scenario::default());
            assert_eq!(s.geometry.f_r, 0.880);
            assert_eq!(s.geometry.magnification, 3.5);
            assert_eq!(s.geometry.rho2, 10.0);
        }
    }

    #[test]
    fn bare_numbers_use_field_units() {
        let s = parse_scenario(r#"{"geometry": {"rho2": 20000, "d": 4.5, "b_tim": 12}, "model_choices": {"lambda": 1550}}"#, true)
            .unwrap();
        assert_eq!(s.geometry.rho2, 20.0);
        assert_eq!(s.geometry.d, 4.5);
        assert!((s.geometry.b_tim - 0.012).abs() < 1e-15);
        assert!((s.geometry.lambda - 1550e-9).abs() < 1e-20);
    }

    #[test]
    fn explicit_units() {
        let s = parse_scenario(r#"{"geometry": {"rho2": "15 m", "f1": "1.2 cm", "d": "3000 mm"}}"#, true).unwrap();
        assert_eq!(s.geometry.rho2, 15.0);
        assert!((s.geometry.f1 - 0.012).abs() < 1e-15);
        assert!((s.geometry.d - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bad_units_are_unit_errors() {
        for text in [
            r#"{"geometry": {"rho2": "10 W"}}"#,
            r#"{"geometry": {"rho2": "ten m"}}"#,
            r#"{"geometry": {"rho2": "10"}}"#,
        ] {
            match parse_scenario(text, true) {
                Err(Error::Unit { field, .. }) => assert_eq!(field, "geometry.rho2"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn mu_out_of_range_names_field() {
        match parse_scenario(r#"{"receiver": {"mu": 1.5}}"#, true) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "receiver.mu"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn geometry_violation_names_field() {
        match parse_scenario(r#"{"geometry": {"magnification": -1}}"#, true) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "geometry.magnification"),
            other => panic!("{other:?}"),
        }
        match parse_scenario(r#"{"model_choices": {"lambda": 0}}"#, true) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "model_choices.lambda"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_strict_and_lax() {
        let text = r#"{"geometry": {"rho3": 1}, "extra": true}"#;
        match parse_scenario(text, true) {
            Err(Error::UnknownKeys(keys)) => {
                assert!(keys.contains(&"geometry.rho3".to_string()), "{keys:?}");
                assert!(keys.contains(&"extra".to_string()), "{keys:?}");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_scenario(text, false).unwrap(), Scenario::default());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_scenario("{", true), Err(Error::Parse(_))));
        assert!(matches!(parse_scenario(r#"{"receiver": {"mu": "high"}}"#, true), Err(Error::Parse(_))));
        assert!(matches!(parse_scenario(r#"{} {}"#, true), Err(Error::Parse(_))));
    }

    #[test]
    fn model_choice_enums() {
        let s = parse_scenario(
            r#"{"model_choices": {"log_base": "e", "n_source": "explicit", "clamp_negative_power": false}}"#,
            true,
        )
        .unwrap();
        assert_eq!(s.model_choices.log_base, LogBase::Natural);
        assert_eq!(s.model_choices.n_source, NSource::Explicit);
        assert!(!s.model_choices.clamp_negative_power);
        assert_eq!(s.loss_scale().unwrap(), 1.0);
    }

    #[test]
    fn save_then_load_is_identical() {
        let mut s = Scenario::default();
        s.geometry.rho2 = 12.345678901234;
        s.geometry.lambda = 1.0642e-6;
        s.geometry.b_tim = 0.0123;
        s.receiver.mu = 0.37;
        s.link.loss_scale = 10.301234;
        s.model_choices.n_source = NSource::Explicit;
        let text = s.to_json_string();
        assert_eq!(parse_scenario(&text, true).unwrap(), s);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        s.save(&path).unwrap();
        assert_eq!(load_scenario(&path, true).unwrap(), s);
    }
}
