//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p bcrb --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use bcrb::comms::{self, ReceiverParams};
use bcrb::gaussian_beam::spot_radii;
use bcrb::link_budget::{power_budget, transmission_loss};
use bcrb::ray_matrix::{is_stable, round_trip, round_trip_bcrb, round_trip_closed_form};
use bcrb::search::{max_spot_over_range, max_stable_distance, DISTANCE_TOLERANCE};
use bcrb::{generate_figure, CavityGeometry, FigureDataset, FigureId, FigureOptions, Scenario, System};

const RANDOM_GEOMETRIES: usize = 1_000;
const SEED: u64 = 0x5eed_bc4b;
const DET_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-9;
const CLOSED_FORM_TOL: f64 = 1e-9;
const RANDOM_BUDGET: Duration = Duration::from_secs(1);

const BOUNDARY_PROBE: f64 = 2e-3;
const BOUNDARY_BISECTION_TOL: f64 = 1e-3;
const BOUNDARY_SEARCH_LIMIT: f64 = 100.0;

const SPOT_L1: f64 = 1e-3;
const SPOT_REL_TOL: f64 = 0.01;

const MIN_GRID: usize = 20;

const PLATEAU_BCRB: f64 = 10.3;
const PLATEAU_BCRB_TOL: f64 = 0.5;
const PLATEAU_BUDGET: Duration = Duration::from_secs(1);
const ANCHOR_D: f64 = 3.0;
const ANCHOR_P_BEAM: f64 = 5.0;
const ANCHOR_TOL: f64 = 0.1;
const ANCHOR_P_IN: f64 = 210.0;

const SPOT_LIMIT: f64 = 0.4e-3;
const ORIGINAL_TOP_SPOT: f64 = 1.5e-3;
const ORIGINAL_TOP_REL_TOL: f64 = 0.30;

const PLATEAU_FRACTION: f64 = 0.2;
const P_OUT_PLATEAU: f64 = 6.0;
const P_OUT_PLATEAU_TOL: f64 = 1.0;
const CUTOFF_LO: f64 = 100.0;
const CUTOFF_HI: f64 = 400.0;

const C_PLATEAU_LO: f64 = 11.0;
const C_PLATEAU_HI: f64 = 17.0;

const LINEAR_R2: f64 = 0.99;

const SUITE_BUDGET: Duration = Duration::from_secs(60);

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        println!("{} AC{id:02} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn random_geometry(rng: &mut StdRng) -> CavityGeometry {
    let signed = |rng: &mut StdRng, lo: f64, hi: f64| {
        let v = rng.gen_range(lo..hi);
        if rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    };
    CavityGeometry {
        rho1: signed(rng, 0.1, 10.0),
        rho2: signed(rng, 0.5, 100.0),
        f_r: rng.gen_range(0.05..5.0),
        f1: rng.gen_range(1e-3..0.1),
        magnification: rng.gen_range(0.5..10.0),
        l1: rng.gen_range(0.0..0.5),
        l2: rng.gen_range(0.0..1.0),
        d: rng.gen_range(0.1..100.0),
        ..CavityGeometry::default()
    }
}

/// Ray-by-ray reference for the nine-element chain, written against the
/// element definitions only.
fn oracle_round_trip(g: &CavityGeometry) -> [f64; 4] {
    let trace = |mut y: f64, mut t: f64| {
        t -= y / g.rho1;
        y += g.l1 * t;
        t -= y / g.f_r;
        y += g.l2 * t;
        y += g.f1 * t;
        y *= g.magnification;
        t /= g.magnification;
        y -= g.f1 * g.magnification * t;
        y += g.d * t;
        t -= y / g.rho2;
        (y, t)
    };
    let (a, c) = trace(1.0, 0.0);
    let (b, d) = trace(0.0, 1.0);
    [a, b, c, d]
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn plateau_rows(ds: &FigureDataset) -> usize {
    ((ds.row_count() as f64 * PLATEAU_FRACTION).floor() as usize).max(1)
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - (slope * a + icpt)).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

fn figure(id: FigureId, s: &Scenario) -> FigureDataset {
    generate_figure(id, s, &FigureOptions::default()).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    let exemplar = CavityGeometry::default();
    let scenario = Scenario::default();

    let mut rng = StdRng::seed_from_u64(SEED);
    let geometries: Vec<CavityGeometry> = (0..RANDOM_GEOMETRIES).map(|_| random_geometry(&mut rng)).collect();

    // 1
    let start = Instant::now();
    let mut worst_det = 0.0_f64;
    for g in &geometries {
        for system in [System::Bcrb, System::Original] {
            let m = round_trip(g, system).expect("valid random geometry");
            worst_det = worst_det.max((m.determinant() - 1.0).abs());
        }
    }
    let elapsed = start.elapsed();
    r.check(
        1,
        "unimodularity",
        worst_det < DET_TOL && elapsed < RANDOM_BUDGET,
        format!("max |det-1| = {worst_det:.3e} over {RANDOM_GEOMETRIES} geometries x 2 systems in {elapsed:.2?}"),
    );

    // 2
    let worst_oracle = geometries
        .iter()
        .map(|g| {
            let m = round_trip_bcrb(g).unwrap().to_array();
            let o = oracle_round_trip(g);
            m.iter().zip(o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    r.check(
        2,
        "basis-ray oracle equivalence",
        worst_oracle < ORACLE_TOL,
        format!("max elementwise diff = {worst_oracle:.3e}"),
    );

    // 3
    let product = round_trip_bcrb(&exemplar).unwrap();
    let closed = round_trip_closed_form(&exemplar).unwrap();
    let diff = product.max_abs_diff(&closed);
    r.check(
        3,
        "closed form vs product",
        diff < CLOSED_FORM_TOL,
        format!("outcome = elementwise agreement, max diff = {diff:.3e}"),
    );

    // 4
    let boundary = max_stable_distance(&exemplar, BOUNDARY_SEARCH_LIMIT).unwrap();
    let inside = is_stable(&round_trip_bcrb(&exemplar.with_distance(boundary.d_max - BOUNDARY_PROBE)).unwrap());
    let outside = is_stable(&round_trip_bcrb(&exemplar.with_distance(boundary.d_max + BOUNDARY_PROBE)).unwrap());
    r.check(
        4,
        "stability boundary",
        inside && !outside && DISTANCE_TOLERANCE <= BOUNDARY_BISECTION_TOL,
        format!(
            "d_max = {:.4} m, stable at -2 mm: {inside}, stable at +2 mm: {outside}, bisection tol = {DISTANCE_TOLERANCE} m",
            boundary.d_max
        ),
    );

    // 5
    let flat = spot_radii(&CavityGeometry { l1: 0.0, ..exemplar }, System::Bcrb).unwrap();
    let near = spot_radii(&CavityGeometry { l1: SPOT_L1, ..exemplar }, System::Bcrb).unwrap();
    let rel = (near.omega3 - near.omega1).abs() / near.omega1;
    r.check(
        5,
        "gain-module spot identity",
        flat.omega3 == flat.omega1 && rel < SPOT_REL_TOL,
        format!("L1=0: omega3 == omega1 is {}; L1=1 mm relative gap = {rel:.3e}", flat.omega3 == flat.omega1),
    );

    // 6
    let link = scenario.resolved_link().unwrap();
    let ds = linspace(1.0, 100.0, 100);
    let losses: Vec<f64> =
        ds.iter().map(|&d| transmission_loss(d, exemplar.b_gain, exemplar.lambda, link.loss_scale).unwrap()).collect();
    let loss_ok = strictly_increasing(&losses);

    let mus = linspace(0.01, 0.99, 25);
    let p_beam_10 = power_budget(&exemplar, &link, System::Bcrb, 10.0, 200.0, 1.0, true).unwrap().p_beam;
    let cs: Vec<f64> = mus
        .iter()
        .map(|&mu| {
            let rx = ReceiverParams { mu, ..scenario.receiver };
            comms::evaluate(p_beam_10, &rx, scenario.model_choices.log_base).unwrap().spectral_efficiency
        })
        .collect();
    let c_ok = strictly_decreasing(&cs);

    let far = linspace(1.0, 300.0, 300);
    let p_out: Vec<f64> = far
        .iter()
        .map(|&d| power_budget(&exemplar, &link, System::Bcrb, d, 250.0, 1.0, true).unwrap().p_out)
        .collect();
    let p_out_ok = p_out.windows(2).all(|w| w[1] <= w[0]);

    let rho2s = linspace(5.0, 50.0, 46);
    let d_max_rho: Vec<f64> =
        rho2s.iter().map(|&r2| max_stable_distance(&exemplar.with_rho2(r2), 200.0).unwrap().d_max).collect();
    let rho_ok = strictly_increasing(&d_max_rho);

    let mags = linspace(1.5, 6.0, 46);
    let d_max_m: Vec<f64> =
        mags.iter().map(|&m| max_stable_distance(&exemplar.with_magnification(m).with_rho2(20.0), 200.0).unwrap().d_max).collect();
    let m_ok = strictly_decreasing(&d_max_m);

    let w_max: Vec<f64> = mags
        .iter()
        .map(|&m| max_spot_over_range(&exemplar.with_magnification(m).with_rho2(25.0), 0.1, 20.0, 200).unwrap())
        .collect();
    let w_ok = strictly_decreasing(&w_max);

    let grids_ok = [ds.len(), mus.len(), far.len(), rho2s.len(), mags.len()].iter().all(|&n| n >= MIN_GRID);
    r.check(
        6,
        "monotonicity suite",
        loss_ok && c_ok && p_out_ok && rho_ok && m_ok && w_ok && grids_ok,
        format!(
            "loss(d)^ {loss_ok}, C(mu)v {c_ok}, P_out(d) non-inc {p_out_ok}, d_max(rho2)^ {rho_ok}, d_max(M)v {m_ok}, omega3_max(M)v {w_ok}"
        ),
    );

    // 7
    let start = Instant::now();
    let fig6 = figure(FigureId::Fig6, &scenario);
    let elapsed = start.elapsed();
    let d6 = fig6.values("d");
    let pb = fig6.values("p_beam_bcrb");
    let (lo, hi) = pb.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let covers = d6.first() == Some(&1.5) && d6.last() == Some(&6.0);
    r.check(
        7,
        "bcrb beam-power plateau",
        covers
            && scenario.link.pump_input_power == ANCHOR_P_IN
            && pb.iter().all(|v| (v - PLATEAU_BCRB).abs() <= PLATEAU_BCRB_TOL)
            && elapsed < PLATEAU_BUDGET,
        format!("P_beam in [{lo:.3}, {hi:.3}] W over d in [1.5, 6] m, generated in {elapsed:.2?}"),
    );

    // 8
    let anchor = power_budget(&exemplar, &link, System::Original, ANCHOR_D, ANCHOR_P_IN, 1.0, true).unwrap().p_beam;
    r.check(
        8,
        "original anchor",
        (anchor - ANCHOR_P_BEAM).abs() <= ANCHOR_TOL,
        format!("P_beam(original, 3 m, 210 W) = {anchor:.6} W, N = {:.6}", link.loss_scale),
    );

    // 9
    let wb = fig6.values("omega3_bcrb");
    let wo = fig6.values("omega3_original");
    let top = *wo.last().unwrap();
    let top_ok = (top - ORIGINAL_TOP_SPOT).abs() <= ORIGINAL_TOP_REL_TOL * ORIGINAL_TOP_SPOT;
    let wb_max = wb.iter().copied().fold(0.0, f64::max);
    let wo_min = wo.iter().copied().fold(f64::INFINITY, f64::min);
    r.check(
        9,
        "spot radius comparison",
        wb_max < SPOT_LIMIT && wo_min > SPOT_LIMIT && top_ok,
        format!(
            "bcrb max {:.4} mm, original min {:.4} mm, original at 6 m {:.4} mm",
            wb_max * 1e3,
            wo_min * 1e3,
            top * 1e3
        ),
    );

    // 10
    let fig11 = figure(FigureId::Fig11, &scenario);
    let d11 = fig11.values("d");
    let n_plateau = plateau_rows(&fig11);
    let plateau = median(fig11.values("p_out_pin250")[..n_plateau].to_vec());
    let cutoffs: Vec<Option<f64>> = ["p_out_pin200", "p_out_pin225", "p_out_pin250"]
        .iter()
        .map(|c| fig11.values(c).iter().position(|&v| v == 0.0).map(|i| d11[i]))
        .collect();
    let all_cut = cutoffs.iter().all(Option::is_some);
    let cut: Vec<f64> = cutoffs.iter().flatten().copied().collect();
    let cut_ok = all_cut && strictly_increasing(&cut) && (CUTOFF_LO..=CUTOFF_HI).contains(&cut[2]);
    r.check(
        10,
        "pv output plateau and cutoff",
        (plateau - P_OUT_PLATEAU).abs() <= P_OUT_PLATEAU_TOL && cut_ok,
        format!("plateau(250 W) = {plateau:.3} W, cutoffs (200/225/250 W) = {cutoffs:?} m"),
    );

    // 11
    let fig12 = figure(FigureId::Fig12, &scenario);
    let names = ["c_mu0.01", "c_mu0.1", "c_mu0.5", "c_mu0.9", "c_mu0.99"];
    let n_plateau = plateau_rows(&fig12);
    let plateaus: Vec<f64> = names.iter().map(|c| median(fig12.values(c)[..n_plateau].to_vec())).collect();
    let band_ok = plateaus.iter().all(|p| (C_PLATEAU_LO..=C_PLATEAU_HI).contains(p));
    let order_ok = (0..n_plateau).all(|i| {
        let row: Vec<f64> = names.iter().map(|c| fig12.values(c)[i]).collect();
        strictly_decreasing(&row)
    });
    r.check(
        11,
        "spectral-efficiency plateau",
        band_ok && order_ok,
        format!("plateaus (mu 0.01..0.99) = {plateaus:.3?} bit/s/Hz, strict ordering over {n_plateau} rows: {order_ok}"),
    );

    // 12
    let fig8 = figure(FigureId::Fig8, &scenario);
    let rho = fig8.values("rho2");
    let fits: Vec<f64> =
        ["d_max_M2.5", "d_max_M3.5", "d_max_M5"].iter().map(|c| r_squared(rho, fig8.values(c))).collect();
    r.check(
        12,
        "boundary linearity",
        fits.iter().all(|&v| v >= LINEAR_R2),
        format!("R^2 per magnification (2.5/3.5/5) = {fits:.6?}"),
    );

    // 13
    let start = Instant::now();
    let run = || FigureId::ALL.iter().map(|&id| figure(id, &scenario).to_csv()).collect::<Vec<_>>();
    let first = run();
    let second = run();
    let elapsed = start.elapsed();
    r.check(
        13,
        "figure suite regeneration",
        first == second && elapsed < SUITE_BUDGET,
        format!("two full runs in {elapsed:.2?}, byte-identical: {}", first == second),
    );

    println!("{} of 13 criteria passed", 13 - r.failures);
    if r.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
