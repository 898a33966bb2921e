//! Figure datasets and generic one-parameter sweeps.
//!
//! Every dataset carries its full parameter snapshot as `#` metadata lines
//! so it can be regenerated exactly. Grid points are evaluated in parallel
//! and assembled in sweep order.

use rayon::prelude::*;

use crate::comms;
use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::gaussian_beam::spot_radii;
use crate::link_budget::{power_budget, LinkBudgetParams};
use crate::ray_matrix::{is_stable, round_trip, System};
use crate::scenario::Scenario;
use crate::search::{max_spot_over_range, max_stable_distance, required_rho2, DISTANCE_SCAN_STRIDE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
    Fig12,
    Fig13,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9,
        FigureId::Fig10,
        FigureId::Fig11,
        FigureId::Fig12,
        FigureId::Fig13,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
            FigureId::Fig10 => "fig10",
            FigureId::Fig11 => "fig11",
            FigureId::Fig12 => "fig12",
            FigureId::Fig13 => "fig13",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            FigureId::Fig6 => "gain-module spot radius and beam power vs distance, bcrb vs original",
            FigureId::Fig7 => "beam power and conversion efficiency vs pump input power, bcrb vs original",
            FigureId::Fig8 => "maximum stable distance vs M2 curvature radius",
            FigureId::Fig9 => "required M2 curvature radius vs TIM magnification",
            FigureId::Fig10 => "maximum gain-module spot radius vs TIM magnification",
            FigureId::Fig11 => "PV output power vs distance",
            FigureId::Fig12 => "spectral efficiency vs distance for several split ratios",
            FigureId::Fig13 => "spectral efficiency vs distance for several pump powers",
        }
    }

    /// Default x-axis range, sample count and series values.
    fn defaults(self) -> (f64, f64, usize, Vec<f64>) {
        match self {
            FigureId::Fig6 => (1.5, 6.0, 91, vec![]),
            FigureId::Fig7 => (150.0, 300.0, 151, vec![]),
            FigureId::Fig8 => (5.0, 50.0, 46, vec![2.5, 3.5, 5.0]),
            FigureId::Fig9 => (1.5, 6.0, 46, vec![10.0, 20.0, 30.0, 40.0]),
            FigureId::Fig10 => (1.5, 6.0, 46, vec![10.0, 20.0, 30.0, 40.0]),
            FigureId::Fig11 => (1.0, 300.0, 300, vec![200.0, 225.0, 250.0]),
            FigureId::Fig12 => (1.0, 300.0, 300, vec![0.01, 0.1, 0.5, 0.9, 0.99]),
            FigureId::Fig13 => (1.0, 300.0, 300, vec![200.0, 225.0, 250.0]),
        }
    }
}

impl std::str::FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Column {
    fn new(name: impl Into<String>, unit: impl Into<String>, values: Vec<f64>) -> Self {
        Self { name: name.into(), unit: unit.into(), values }
    }

    /// Header cell, e.g. `d [m]`.
    pub fn header(&self) -> String {
        format!("{} [{}]", self.name, self.unit)
    }
}

/// Named columns of equal length plus `key: value` metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureDataset {
    pub label: String,
    pub columns: Vec<Column>,
    pub metadata: Vec<(String, String)>,
}

impl FigureDataset {
    pub fn row_count(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn values(&self, name: &str) -> &[f64] {
        self.column(name).map(|c| c.values.as_slice()).unwrap_or_else(|| panic!("no column `{name}` in {}", self.label))
    }

    pub fn metadata(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// CSV text: `#` metadata block, one header row with bracketed units,
    /// comma-separated rows of 9-significant-digit numbers, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let header: Vec<String> = self.columns.iter().map(Column::header).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.row_count() {
            let row: Vec<String> = self.columns.iter().map(|c| fmt_sig(c.values[i])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Overrides for [`generate_figure`]; `None` keeps the figure default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FigureOptions {
    /// x-axis range in the figure's x unit.
    pub range: Option<(f64, f64)>,
    pub samples: Option<usize>,
    /// Series values (M for fig8; d for fig9/fig10; P_in for fig11/fig13;
    /// μ for fig12). Ignored by fig6 and fig7.
    pub series: Option<Vec<f64>>,
}

/// Search limit for the fig8 boundary scan (m).
const FIG8_D_HI: f64 = 200.0;
/// Upper ρ₂ limit for the fig9 search (m).
const FIG9_RHO2_HI: f64 = 1000.0;
/// fig10 uses ρ₂ = (top of distance range) + this margin (m), so every
/// range is stable for the default magnifications.
const FIG10_RHO2_MARGIN: f64 = 5.0;
/// Split ratio for the power-only figures.
const FIG11_MU: f64 = 1.0;
const FIG12_P_IN: f64 = 200.0;
const FIG13_MU: f64 = 0.9;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

fn tag(v: f64) -> String {
    fmt_sig(v)
}

fn base_metadata(label: &str, title: &str, scenario: &Scenario, link: &LinkBudgetParams) -> Vec<(String, String)> {
    let m = &scenario.model_choices;
    vec![
        ("dataset".into(), label.into()),
        ("title".into(), title.into()),
        ("generator".into(), concat!("bcrb ", env!("CARGO_PKG_VERSION")).into()),
        ("lambda [m]".into(), fmt_sig(scenario.geometry.lambda)),
        ("loss_scale_n".into(), fmt_sig(link.loss_scale)),
        ("n_source".into(), m.n_source.as_str().into()),
        ("log_base".into(), m.log_base.as_str().into()),
        ("clamp_negative_power".into(), m.clamp_negative_power.to_string()),
        ("scenario".into(), scenario.to_json().to_string()),
    ]
}

fn collect<T: Send>(xs: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    xs.par_iter().map(|&x| f(x)).collect()
}

fn transpose(rows: Vec<Vec<f64>>, width: usize) -> Vec<Vec<f64>> {
    (0..width).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

/// Builds the dataset for one figure from `scenario` with optional overrides.
pub fn generate_figure(id: FigureId, scenario: &Scenario, opts: &FigureOptions) -> Result<FigureDataset> {
    scenario.validate()?;
    let (lo_def, hi_def, n_def, series_def) = id.defaults();
    let (lo, hi) = opts.range.unwrap_or((lo_def, hi_def));
    let samples = opts.samples.unwrap_or(n_def);
    if !(lo < hi) || samples < 2 {
        return Err(Error::Domain(format!("figure range must have lo < hi and at least 2 samples (got [{lo}, {hi}], {samples})")));
    }
    let series = opts.series.clone().unwrap_or(series_def);
    let xs = linspace(lo, hi, samples);
    let link = scenario.resolved_link()?;
    let g = scenario.geometry;
    let clamp = scenario.model_choices.clamp_negative_power;
    let base = scenario.receiver;
    let log_base = scenario.model_choices.log_base;
    let c_unit = log_base.unit();

    let mut metadata = base_metadata(id.as_str(), id.title(), scenario, &link);
    let series_meta = |name: &str, values: &[f64]| {
        (format!("series {name}"), values.iter().map(|v| fmt_sig(*v)).collect::<Vec<_>>().join(" "))
    };

    let columns = match id {
        FigureId::Fig6 => {
            let p_in = link.pump_input_power;
            metadata.push(("pump_input_power [W]".into(), fmt_sig(p_in)));
            let rows = collect(&xs, |d| {
                let at = g.with_distance(d);
                let sb = spot_radii(&at, System::Bcrb)?;
                let so = spot_radii(&at, System::Original)?;
                let pb = power_budget(&at, &link, System::Bcrb, d, p_in, 1.0, clamp)?;
                let po = power_budget(&at, &link, System::Original, d, p_in, 1.0, clamp)?;
                Ok(vec![sb.omega3, so.omega3, sb.omega1, so.omega1, pb.p_beam, po.p_beam])
            })?;
            let mut cols = transpose(rows, 6).into_iter();
            let mut next = || cols.next().expect("six columns");
            vec![
                Column::new("d", "m", xs.clone()),
                Column::new("omega3_bcrb", "m", next()),
                Column::new("omega3_original", "m", next()),
                Column::new("omega1_bcrb", "m", next()),
                Column::new("omega1_original", "m", next()),
                Column::new("p_beam_bcrb", "W", next()),
                Column::new("p_beam_original", "W", next()),
            ]
        }
        FigureId::Fig7 => {
            let d = g.d;
            metadata.push(("d [m]".into(), fmt_sig(d)));
            let rows = collect(&xs, |p_in| {
                let pb = power_budget(&g, &link, System::Bcrb, d, p_in, 1.0, clamp)?;
                let po = power_budget(&g, &link, System::Original, d, p_in, 1.0, clamp)?;
                Ok(vec![pb.p_beam, po.p_beam, pb.p_beam / p_in, po.p_beam / p_in])
            })?;
            let mut cols = transpose(rows, 4).into_iter();
            let mut next = || cols.next().expect("four columns");
            vec![
                Column::new("p_in", "W", xs.clone()),
                Column::new("p_beam_bcrb", "W", next()),
                Column::new("p_beam_original", "W", next()),
                Column::new("efficiency_bcrb", "1", next()),
                Column::new("efficiency_original", "1", next()),
            ]
        }
        FigureId::Fig8 => {
            metadata.push(series_meta("magnification [1]", &series));
            metadata.push(("d_search_limit [m]".into(), fmt_sig(FIG8_D_HI)));
            let mut cols = vec![Column::new("rho2", "m", xs.clone())];
            let mut bands = Vec::new();
            for &m in &series {
                let found = collect(&xs, |rho2| {
                    max_stable_distance(&g.with_magnification(m).with_rho2(rho2), FIG8_D_HI)
                })?;
                cols.push(Column::new(format!("d_max_M{}", tag(m)), "m", found.iter().map(|b| b.d_max).collect()));
                bands.push(Column::new(
                    format!("bands_M{}", tag(m)),
                    "1",
                    found.iter().map(|b| b.band_count as f64).collect(),
                ));
            }
            cols.extend(bands);
            cols
        }
        FigureId::Fig9 => {
            metadata.push(series_meta("d [m]", &series));
            metadata.push(("rho2_search_limit [m]".into(), fmt_sig(FIG9_RHO2_HI)));
            let mut cols = vec![Column::new("magnification", "1", xs.clone())];
            for &d in &series {
                let values = collect(&xs, |m| required_rho2(&g.with_magnification(m), d, FIG9_RHO2_HI))?;
                cols.push(Column::new(format!("rho2_min_d{}", tag(d)), "m", values));
            }
            cols
        }
        FigureId::Fig10 => {
            metadata.push(series_meta("d_range_top [m]", &series));
            metadata.push(("d_range_bottom [m]".into(), fmt_sig(DISTANCE_SCAN_STRIDE)));
            metadata.push((
                "note".into(),
                format!("rho2 per series = d_range_top + {} m", fmt_sig(FIG10_RHO2_MARGIN)),
            ));
            let mut cols = vec![Column::new("magnification", "1", xs.clone())];
            for &top in &series {
                let rho2 = top + FIG10_RHO2_MARGIN;
                let values = collect(&xs, |m| {
                    max_spot_over_range(&g.with_magnification(m).with_rho2(rho2), DISTANCE_SCAN_STRIDE, top, 200)
                })?;
                cols.push(Column::new(format!("omega3_max_d{}", tag(top)), "m", values));
            }
            cols
        }
        FigureId::Fig11 => {
            metadata.push(series_meta("pump_input_power [W]", &series));
            metadata.push(("mu".into(), fmt_sig(FIG11_MU)));
            metadata.push((
                "note".into(),
                "bcrb loss uses the TIM aperture with the calibrated N; the zero-output cutoff distance scales with both"
                    .into(),
            ));
            let mut cols = vec![Column::new("d", "m", xs.clone())];
            for &p_in in &series {
                let values = collect(&xs, |d| {
                    Ok(power_budget(&g, &link, System::Bcrb, d, p_in, FIG11_MU, clamp)?.p_out)
                })?;
                cols.push(Column::new(format!("p_out_pin{}", tag(p_in)), "W", values));
            }
            cols
        }
        FigureId::Fig12 | FigureId::Fig13 => {
            let (fixed_label, fixed) = if id == FigureId::Fig12 {
                metadata.push(series_meta("mu", &series));
                ("pump_input_power [W]", FIG12_P_IN)
            } else {
                metadata.push(series_meta("pump_input_power [W]", &series));
                ("mu", FIG13_MU)
            };
            metadata.push((fixed_label.into(), fmt_sig(fixed)));
            let mut cols = vec![Column::new("d", "m", xs.clone())];
            for &s in &series {
                let (p_in, mu) = if id == FigureId::Fig12 { (FIG12_P_IN, s) } else { (s, FIG13_MU) };
                let receiver = comms::ReceiverParams { mu, ..base };
                receiver
                    .validate()
                    .map_err(|(field, reason)| Error::Validation { field: format!("series.{field}"), reason })?;
                let values = collect(&xs, |d| {
                    let pb = power_budget(&g, &link, System::Bcrb, d, p_in, mu, clamp)?;
                    Ok(comms::evaluate(pb.p_beam.max(0.0), &receiver, log_base)?.spectral_efficiency)
                })?;
                let name = if id == FigureId::Fig12 { format!("c_mu{}", tag(mu)) } else { format!("c_pin{}", tag(p_in)) };
                cols.push(Column::new(name, c_unit, values));
            }
            cols
        }
    };

    metadata.push(("x_range".into(), format!("{} {}", fmt_sig(lo), fmt_sig(hi))));
    metadata.push(("samples".into(), samples.to_string()));
    Ok(FigureDataset { label: id.as_str().into(), columns, metadata })
}

/// Parameter varied by a generic sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    D,
    Rho1,
    Rho2,
    FR,
    F1,
    Magnification,
    L1,
    L2,
    BGain,
    BTim,
    Lambda,
    PumpInputPower,
    Mu,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 13] = [
        SweepVariable::D,
        SweepVariable::Rho1,
        SweepVariable::Rho2,
        SweepVariable::FR,
        SweepVariable::F1,
        SweepVariable::Magnification,
        SweepVariable::L1,
        SweepVariable::L2,
        SweepVariable::BGain,
        SweepVariable::BTim,
        SweepVariable::Lambda,
        SweepVariable::PumpInputPower,
        SweepVariable::Mu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::D => "d",
            SweepVariable::Rho1 => "rho1",
            SweepVariable::Rho2 => "rho2",
            SweepVariable::FR => "f_r",
            SweepVariable::F1 => "f1",
            SweepVariable::Magnification => "magnification",
            SweepVariable::L1 => "l1",
            SweepVariable::L2 => "l2",
            SweepVariable::BGain => "b_gain",
            SweepVariable::BTim => "b_tim",
            SweepVariable::Lambda => "lambda",
            SweepVariable::PumpInputPower => "p_in",
            SweepVariable::Mu => "mu",
        }
    }

    /// SI unit of the swept value.
    pub fn unit(self) -> &'static str {
        match self {
            SweepVariable::Magnification | SweepVariable::Mu => "1",
            SweepVariable::PumpInputPower => "W",
            _ => "m",
        }
    }

    fn apply(self, s: &mut Scenario, v: f64) {
        let g = &mut s.geometry;
        match self {
            SweepVariable::D => g.d = v,
            SweepVariable::Rho1 => g.rho1 = v,
            SweepVariable::Rho2 => g.rho2 = v,
            SweepVariable::FR => g.f_r = v,
            SweepVariable::F1 => g.f1 = v,
            SweepVariable::Magnification => g.magnification = v,
            SweepVariable::L1 => g.l1 = v,
            SweepVariable::L2 => g.l2 = v,
            SweepVariable::BGain => g.b_gain = v,
            SweepVariable::BTim => g.b_tim = v,
            SweepVariable::Lambda => g.lambda = v,
            SweepVariable::PumpInputPower => s.link.pump_input_power = v,
            SweepVariable::Mu => s.receiver.mu = v,
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepVariable::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            let names: Vec<&str> = SweepVariable::ALL.iter().map(|v| v.name()).collect();
            Error::Domain(format!("unknown sweep variable `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

/// One-parameter sweep over `[lo, hi]` (SI units) with every other value
/// taken from the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub system: System,
}

/// Evaluates the whole model chain at every sweep point. Unstable points
/// get `nan` spot radii; the loss scale N is resolved once from the base
/// scenario.
pub fn run_sweep(spec: &SweepSpec, scenario: &Scenario) -> Result<FigureDataset> {
    if !(spec.lo < spec.hi) || spec.samples < 2 {
        return Err(Error::Domain(format!(
            "sweep needs lo < hi and samples >= 2 (got [{}, {}], {})",
            spec.lo, spec.hi, spec.samples
        )));
    }
    scenario.validate()?;
    let link = scenario.resolved_link()?;
    let xs = linspace(spec.lo, spec.hi, spec.samples);
    let log_base = scenario.model_choices.log_base;
    let clamp = scenario.model_choices.clamp_negative_power;

    let rows = collect(&xs, |x| {
        let mut s = *scenario;
        spec.variable.apply(&mut s, x);
        s.validate()?;
        let g = s.geometry;
        let m = round_trip(&g, spec.system)?;
        let stable = is_stable(&m);
        let spots = if stable { spot_radii(&g, spec.system).ok() } else { None };
        let (w1, w2, w3) = spots.map_or((f64::NAN, f64::NAN, f64::NAN), |s| (s.omega1, s.omega2, s.omega3));
        let link = LinkBudgetParams { pump_input_power: s.link.pump_input_power, ..link };
        let pb = power_budget(&g, &link, spec.system, g.d, link.pump_input_power, s.receiver.mu, clamp)?;
        let c = comms::evaluate(pb.p_beam.max(0.0), &s.receiver, log_base)?;
        Ok(vec![
            m.ad_product(),
            if stable { 1.0 } else { 0.0 },
            w1,
            w2,
            w3,
            pb.delta_t,
            pb.p_beam,
            pb.p_out,
            c.p_data.value(),
            c.total,
            c.spectral_efficiency,
        ])
    })?;

    let names: [(&str, &str); 11] = [
        ("ad_product", "1"),
        ("stable", "1"),
        ("omega1", "m"),
        ("omega2", "m"),
        ("omega3", "m"),
        ("delta_t", "1"),
        ("p_beam", "W"),
        ("p_out", "W"),
        ("p_data", "A/W*W"),
        ("n2_total", "A^2"),
        ("spectral_efficiency", log_base.unit()),
    ];
    let mut columns = vec![Column::new(spec.variable.name(), spec.variable.unit(), xs)];
    for ((name, unit), values) in names.iter().zip(transpose(rows, names.len())) {
        columns.push(Column::new(*name, *unit, values));
    }
    let mut metadata = base_metadata("sweep", "generic one-parameter sweep", scenario, &link);
    metadata.push(("system".into(), spec.system.as_str().into()));
    metadata.push(("variable".into(), spec.variable.name().into()));
    metadata.push(("x_range".into(), format!("{} {}", fmt_sig(spec.lo), fmt_sig(spec.hi))));
    metadata.push(("samples".into(), spec.samples.to_string()));
    Ok(FigureDataset { label: "sweep".into(), columns, metadata })
}
