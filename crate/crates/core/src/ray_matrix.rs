//! Paraxial ray-transfer (ABCD) matrices for the resonator.
//!
//! Element matrices follow the signed conventions of the cavity model: a
//! mirror of curvature radius ρ contributes `[[1, 0], [-1/ρ, 1]]`, so the
//! concave end mirror M1 is entered with a negative radius (ρ₁ = −0.880 m)
//! to cancel the thermal lens of the gain module. Compositions take the
//! element list in propagation order and multiply with the last-traversed
//! matrix leftmost.

use std::ops::Mul;

use crate::error::{Error, Result};

/// Transverse ray state: height above the axis and paraxial slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayVector {
    /// Height in m.
    pub position: f64,
    /// Slope in rad.
    pub slope: f64,
}

impl RayVector {
    pub const fn new(position: f64, slope: f64) -> Self {
        Self { position, slope }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.slope.is_finite()
    }
}

/// 2×2 ray-transfer matrix `[[a, b], [c, d]]`.
///
/// `b` carries length units and `c` inverse length; `a` and `d` are
/// dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// The `A·D` product tested by the stability condition.
    pub fn ad_product(&self) -> f64 {
        self.a * self.d
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    pub fn apply(&self, r: RayVector) -> RayVector {
        RayVector {
            position: self.a * r.position + self.b * r.slope,
            slope: self.c * r.position + self.d * r.slope,
        }
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &TransferMatrix) -> f64 {
        [
            (self.a - other.a).abs(),
            (self.b - other.b).abs(),
            (self.c - other.c).abs(),
            (self.d - other.d).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

impl Mul<RayVector> for TransferMatrix {
    type Output = RayVector;

    fn mul(self, rhs: RayVector) -> RayVector {
        self.apply(rhs)
    }
}

/// One element of the resonator chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalElement {
    /// Curved reflector; signed curvature radius in m.
    Mirror { curvature_radius: f64 },
    /// Thin lens (the lens-like gain module); focal length in m.
    ThinLens { focal_length: f64 },
    /// Free-space propagation over a non-negative length in m.
    FreeSpace { length: f64 },
    /// Signed displacement form `[[1, s], [0, 1]]` used for the two TIM
    /// lenses (`+f1` on entry, `-f2` on exit).
    Displacement { offset: f64 },
    /// Telescope magnification `[[M, 0], [0, 1/M]]`.
    Magnifier { magnification: f64 },
}

impl OpticalElement {
    /// TIM entry form `[[1, f1], [0, 1]]`.
    pub fn tim_entry(f1: f64) -> Self {
        OpticalElement::Displacement { offset: f1 }
    }

    /// TIM exit form `[[1, -f2], [0, 1]]`.
    pub fn tim_exit(f2: f64) -> Self {
        OpticalElement::Displacement { offset: -f2 }
    }

    pub fn matrix(&self) -> Result<TransferMatrix> {
        element_matrix(self)
    }
}

pub fn element_matrix(e: &OpticalElement) -> Result<TransferMatrix> {
    match *e {
        OpticalElement::Mirror { curvature_radius: rho } => {
            if rho == 0.0 || !rho.is_finite() {
                return Err(Error::InvalidElement(format!("mirror curvature radius must be finite and nonzero, got {rho}")));
            }
            Ok(TransferMatrix::new(1.0, 0.0, -1.0 / rho, 1.0))
        }
        OpticalElement::ThinLens { focal_length: f } => {
            if f == 0.0 || !f.is_finite() {
                return Err(Error::InvalidElement(format!("lens focal length must be finite and nonzero, got {f}")));
            }
            Ok(TransferMatrix::new(1.0, 0.0, -1.0 / f, 1.0))
        }
        OpticalElement::FreeSpace { length } => {
            if !(length >= 0.0) || !length.is_finite() {
                return Err(Error::InvalidElement(format!("free-space length must be finite and >= 0, got {length}")));
            }
            Ok(TransferMatrix::new(1.0, length, 0.0, 1.0))
        }
        OpticalElement::Displacement { offset } => {
            if !offset.is_finite() {
                return Err(Error::InvalidElement(format!("displacement must be finite, got {offset}")));
            }
            Ok(TransferMatrix::new(1.0, offset, 0.0, 1.0))
        }
        OpticalElement::Magnifier { magnification: m } => {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::InvalidElement(format!("magnification must be finite and > 0, got {m}")));
            }
            Ok(TransferMatrix::new(m, 0.0, 0.0, 1.0 / m))
        }
    }
}

/// Multiplies matrices given in propagation order (first-traversed first),
/// so the result is `M_n ⋯ M_2 M_1`.
pub fn compose(matrices: &[TransferMatrix]) -> Result<TransferMatrix> {
    let (first, rest) = matrices.split_first().ok_or(Error::EmptyChain)?;
    Ok(rest.iter().fold(*first, |acc, m| *m * acc))
}

pub fn compose_elements(elements: &[OpticalElement]) -> Result<TransferMatrix> {
    let matrices = elements.iter().map(element_matrix).collect::<Result<Vec<_>>>()?;
    compose(&matrices)
}

/// Which cavity is being modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    /// Resonator with the telescope-like internal modulator.
    Bcrb,
    /// Baseline resonator without the telescope.
    Original,
}

impl System {
    pub fn as_str(&self) -> &'static str {
        match self {
            System::Bcrb => "bcrb",
            System::Original => "original",
        }
    }
}

impl std::str::FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bcrb" => Ok(System::Bcrb),
            "original" => Ok(System::Original),
            other => Err(Error::Domain(format!("unknown system `{other}` (expected bcrb|original)"))),
        }
    }
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full resonator parameter set, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// Signed curvature radius of M1 (m).
    pub rho1: f64,
    /// Signed curvature radius of M2 (m).
    pub rho2: f64,
    /// Focal length of the lens-like gain module (m).
    pub f_r: f64,
    /// Magnitude of the TIM concave-lens focal length (m).
    pub f1: f64,
    /// TIM magnification `f2 / f1`.
    pub magnification: f64,
    /// M1 to gain module (m).
    pub l1: f64,
    /// Gain module to TIM (m).
    pub l2: f64,
    /// Transmission distance, TIM to M2 (m).
    pub d: f64,
    /// Gain-module aperture radius (m).
    pub b_gain: f64,
    /// TIM aperture radius (m).
    pub b_tim: f64,
    /// Resonant-beam wavelength (m).
    pub lambda: f64,
}

impl Default for CavityGeometry {
    /// The reference resonator: f_R = 880 mm, ρ₁ = −880 mm, ρ₂ = 10 m,
    /// f₁ = 10 mm, M = 3.5, L₂ = 100 mm, d = 2.6 m, apertures 1.5 / 10 mm.
    fn default() -> Self {
        Self {
            rho1: -0.880,
            rho2: 10.0,
            f_r: 0.880,
            f1: 0.010,
            magnification: 3.5,
            l1: 1e-3,
            l2: 0.100,
            d: 2.6,
            b_gain: 1.5e-3,
            b_tim: 10e-3,
            lambda: 1064e-9,
        }
    }
}

impl CavityGeometry {
    /// Focal length of the TIM convex lens, `f2 = f1 · M`.
    pub fn f2(&self) -> f64 {
        self.f1 * self.magnification
    }

    pub fn with_distance(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn with_rho2(mut self, rho2: f64) -> Self {
        self.rho2 = rho2;
        self
    }

    pub fn with_magnification(mut self, m: f64) -> Self {
        self.magnification = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Error {
            Error::InvalidGeometry { field, reason: reason.into() }
        }
        let nonzero = [("rho1", self.rho1), ("rho2", self.rho2), ("f_r", self.f_r)];
        for (field, v) in nonzero {
            if !v.is_finite() || v == 0.0 {
                return Err(bad(field, format!("must be finite and nonzero, got {v}")));
            }
        }
        let positive = [
            ("f1", self.f1),
            ("magnification", self.magnification),
            ("d", self.d),
            ("b_gain", self.b_gain),
            ("b_tim", self.b_tim),
            ("lambda", self.lambda),
        ];
        for (field, v) in positive {
            if !v.is_finite() || !(v > 0.0) {
                return Err(bad(field, format!("must be finite and > 0, got {v}")));
            }
        }
        for (field, v) in [("l1", self.l1), ("l2", self.l2)] {
            if !v.is_finite() || !(v >= 0.0) {
                return Err(bad(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// The nine elements of the telescope cavity, in propagation order:
    /// M1, L1, gain lens, L2, TIM entry, magnifier, TIM exit, L3 = d, M2.
    pub fn bcrb_elements(&self) -> [OpticalElement; 9] {
        [
            OpticalElement::Mirror { curvature_radius: self.rho1 },
            OpticalElement::FreeSpace { length: self.l1 },
            OpticalElement::ThinLens { focal_length: self.f_r },
            OpticalElement::FreeSpace { length: self.l2 },
            OpticalElement::tim_entry(self.f1),
            OpticalElement::Magnifier { magnification: self.magnification },
            OpticalElement::tim_exit(self.f2()),
            OpticalElement::FreeSpace { length: self.d },
            OpticalElement::Mirror { curvature_radius: self.rho2 },
        ]
    }

    /// The baseline chain without the telescope: M1, L1, gain lens,
    /// L2 + d, M2.
    pub fn original_elements(&self) -> [OpticalElement; 5] {
        [
            OpticalElement::Mirror { curvature_radius: self.rho1 },
            OpticalElement::FreeSpace { length: self.l1 },
            OpticalElement::ThinLens { focal_length: self.f_r },
            OpticalElement::FreeSpace { length: self.l2 + self.d },
            OpticalElement::Mirror { curvature_radius: self.rho2 },
        ]
    }
}

/// Round-trip matrix of the telescope cavity by direct multiplication.
/// This is the canonical route; [`round_trip_closed_form`] cross-checks it.
pub fn round_trip_bcrb(g: &CavityGeometry) -> Result<TransferMatrix> {
    g.validate()?;
    compose_elements(&g.bcrb_elements())
}

/// Baseline round trip with the gain module facing M2 across `L2 + d`.
pub fn round_trip_original(g: &CavityGeometry) -> Result<TransferMatrix> {
    g.validate()?;
    compose_elements(&g.original_elements())
}

pub fn round_trip(g: &CavityGeometry, system: System) -> Result<TransferMatrix> {
    match system {
        System::Bcrb => round_trip_bcrb(g),
        System::Original => round_trip_original(g),
    }
}

/// Element-by-element closed form of the telescope-cavity round trip, with
/// `L2' = L2 + f1` and `L3' = d - f2`. `C1` is recovered from unimodularity.
pub fn round_trip_closed_form(g: &CavityGeometry) -> Result<TransferMatrix> {
    g.validate()?;
    let m = g.magnification;
    let l2p = g.l2 + g.f1;
    let l3p = g.d - g.f2();
    let lens_term = m - (l3p / m + l2p * m) / g.f_r;
    let b1 = g.l1 * lens_term + l2p * m + l3p / m;
    let a1 = lens_term - b1 / g.rho1;
    let d1 = 1.0 / m - g.l1 / (g.f_r * m) - b1 / g.rho2;
    if b1 == 0.0 {
        return Err(Error::SingularConfiguration);
    }
    let c1 = (a1 * d1 - 1.0) / b1;
    Ok(TransferMatrix::new(a1, b1, c1, d1))
}

/// Stability test `0 < A·D < 1`, strict on both ends.
pub fn is_stable(m: &TransferMatrix) -> bool {
    let ad = m.ad_product();
    if ad.is_nan() {
        log::warn!("stability test on a matrix with NaN entries: {m:?}");
        return false;
    }
    ad > 0.0 && ad < 1.0
}
