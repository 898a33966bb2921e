//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on parse/domain/validation errors, 2 when a
//! boundary search or calibration finds nothing feasible.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::comms;
use crate::error::Result;
use crate::figures::{generate_figure, run_sweep, FigureId, FigureOptions, SweepSpec, SweepVariable};
use crate::format::fmt_sig;
use crate::gaussian_beam::spot_radii;
use crate::link_budget::power_budget;
use crate::ray_matrix::{is_stable, round_trip, System};
use crate::scenario::{load_scenario, NSource, Scenario};
use crate::search::max_stable_distance;

#[derive(Debug, Parser)]
#[command(name = "bcrb", version, about = "Beam-compression resonant beam link simulator")]
struct Cli {
    /// Scenario JSON file; defaults to the reference system when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Reject unknown keys in the scenario file instead of warning.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Point {
    /// Transmission distance in m (default: scenario geometry.d).
    #[arg(long = "d", value_name = "M")]
    d: Option<f64>,

    #[arg(long, value_name = "bcrb|original", default_value = "bcrb")]
    system: System,
}

#[derive(Debug, Args)]
struct Operating {
    #[command(flatten)]
    point: Point,

    /// Pump input power in W (default: scenario link.pump_input_power).
    #[arg(long = "P-in", value_name = "W")]
    p_in: Option<f64>,

    /// Split ratio to the PV branch, 0..1 (default: scenario receiver.mu).
    #[arg(long, value_name = "0..1")]
    mu: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Round-trip A·D product, stability flag and maximum stable distance.
    Stability {
        #[command(flatten)]
        point: Point,
        /// Upper limit of the boundary search in m.
        #[arg(long = "d-hi", value_name = "M", default_value_t = 1000.0)]
        d_hi: f64,
    },
    /// Spot radii on M1, M2 and the gain module.
    Spot {
        #[command(flatten)]
        point: Point,
    },
    /// Transmission loss, beam power and PV output.
    Power {
        #[command(flatten)]
        op: Operating,
    },
    /// Noise terms and spectral efficiency of the data branch.
    Comms {
        #[command(flatten)]
        op: Operating,
    },
    /// Fit the loss scale N to the calibration anchor.
    Calibrate {
        /// Write the scenario with the fitted N (explicit source) to this path.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Write the CSV dataset of one figure (fig6..fig13).
    Figure {
        id: String,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
        /// x-axis range as `lo,hi`.
        #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
        range: Option<(f64, f64)>,
        /// Series values, comma separated.
        #[arg(long, value_name = "V,...", value_delimiter = ',')]
        series: Option<Vec<f64>>,
    },
    /// Sweep one parameter (SI units) and write the full model chain as CSV.
    Sweep {
        #[arg(long)]
        variable: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long, value_name = "bcrb|original", default_value = "bcrb")]
        system: System,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(lo)?, num(hi)?))
}

fn line(out: &mut dyn Write, name: &str, value: f64, unit: &str) -> Result<()> {
    writeln!(out, "{name}: {} [{unit}]", fmt_sig(value))?;
    Ok(())
}

fn text(out: &mut dyn Write, name: &str, value: &str) -> Result<()> {
    writeln!(out, "{name}: {value}")?;
    Ok(())
}

fn emit(content: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => out.write_all(content.as_bytes())?,
    }
    Ok(())
}

fn scenario_from(cli: &Cli) -> Result<Scenario> {
    match &cli.config {
        Some(path) => load_scenario(path, cli.strict),
        None => Ok(Scenario::default()),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let scenario = scenario_from(cli)?;
    let distance = |p: &Point| p.d.unwrap_or(scenario.geometry.d);

    match &cli.command {
        Command::Stability { point, d_hi } => {
            let d = distance(point);
            let g = scenario.geometry.with_distance(d);
            let m = round_trip(&g, point.system)?;
            text(out, "system", point.system.as_str())?;
            line(out, "d", d, "m")?;
            line(out, "a", m.a, "1")?;
            line(out, "b", m.b, "m")?;
            line(out, "c", m.c, "1/m")?;
            line(out, "d_element", m.d, "1")?;
            line(out, "ad_product", m.ad_product(), "1")?;
            text(out, "stable", &is_stable(&m).to_string())?;
            if point.system == System::Bcrb {
                let boundary = max_stable_distance(&g, *d_hi)?;
                line(out, "d_max", boundary.d_max, "m")?;
                line(out, "stable_bands", boundary.band_count as f64, "count")?;
                text(out, "d_max_open_ended", &boundary.open_ended.to_string())?;
            }
        }
        Command::Spot { point } => {
            let d = distance(point);
            let s = spot_radii(&scenario.geometry.with_distance(d), point.system)?;
            text(out, "system", point.system.as_str())?;
            line(out, "d", d, "m")?;
            line(out, "omega1", s.omega1, "m")?;
            line(out, "omega2", s.omega2, "m")?;
            line(out, "omega3", s.omega3, "m")?;
        }
        Command::Power { op } | Command::Comms { op } => {
            let d = distance(&op.point);
            let p_in = op.p_in.unwrap_or(scenario.link.pump_input_power);
            let mu = op.mu.unwrap_or(scenario.receiver.mu);
            let link = scenario.resolved_link()?;
            let g = scenario.geometry.with_distance(d);
            let clamp = scenario.model_choices.clamp_negative_power;
            let pb = power_budget(&g, &link, op.point.system, d, p_in, mu, clamp)?;
            text(out, "system", op.point.system.as_str())?;
            line(out, "d", d, "m")?;
            line(out, "p_in", p_in, "W")?;
            line(out, "mu", mu, "1")?;
            line(out, "loss_scale_n", link.loss_scale, "1")?;
            line(out, "aperture", pb.aperture, "m")?;
            line(out, "delta_t", pb.delta_t, "1")?;
            line(out, "p_beam", pb.p_beam, "W")?;
            if matches!(cli.command, Command::Power { .. }) {
                line(out, "p_out", pb.p_out, "W")?;
            } else {
                let receiver = comms::ReceiverParams { mu, ..scenario.receiver };
                let base = scenario.model_choices.log_base;
                let c = comms::evaluate(pb.p_beam.max(0.0), &receiver, base)?;
                line(out, "p_data", c.p_data.value(), "A/W*W")?;
                line(out, "n2_shot", c.shot, "A^2")?;
                line(out, "n2_thermal", c.thermal, "A^2")?;
                line(out, "n2_total", c.total, "A^2")?;
                line(out, "spectral_efficiency", c.spectral_efficiency, base.unit())?;
            }
        }
        Command::Calibrate { out: path } => {
            let n = crate::search::calibrate_n(
                &scenario.calibration,
                scenario.geometry.b_gain,
                scenario.geometry.lambda,
                &scenario.link,
            )?;
            line(out, "anchor_d", scenario.calibration.d, "m")?;
            line(out, "anchor_p_beam", scenario.calibration.p_beam, "W")?;
            line(out, "anchor_p_in", scenario.calibration.p_in, "W")?;
            line(out, "aperture", scenario.geometry.b_gain, "m")?;
            line(out, "loss_scale_n", n, "1")?;
            if let Some(path) = path {
                let mut fitted = scenario;
                fitted.link.loss_scale = n;
                fitted.model_choices.n_source = NSource::Explicit;
                fitted.save(path)?;
            }
        }
        Command::Figure { id, out: path, samples, range, series } => {
            let id: FigureId = id.parse()?;
            let opts = FigureOptions { range: *range, samples: *samples, series: series.clone() };
            let ds = generate_figure(id, &scenario, &opts)?;
            emit(&ds.to_csv(), path.as_deref(), out)?;
        }
        Command::Sweep { variable, lo, hi, samples, system, out: path } => {
            let spec = SweepSpec { variable: variable.parse::<SweepVariable>()?, lo: *lo, hi: *hi, samples: *samples, system: *system };
            let ds = run_sweep(&spec, &scenario)?;
            emit(&ds.to_csv(), path.as_deref(), out)?;
        }
    }
    Ok(())
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    let _ = writeln!(err, "{first}");
                    1
                }
            };
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

