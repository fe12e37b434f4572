//! Constitutive relations linking branch flows to potential differences
//! (resistive) and node inventories to potentials (capacitive).
//!
//! Resistive laws dissipate: `F = Λ(W)` with `Λ` monotone through the
//! origin. Capacitive laws store: `Z = C(w)` with `C` invertible on its
//! range. Inductive laws (kinetic storage) are deliberately absent; the
//! document layer reserves a tag for them and rejects it at validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised when evaluating or inverting a constitutive law.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LawError {
    /// Tabulated law queried outside its potential-difference range.
    #[error("input {0} lies outside the tabulated range [{1}, {2}]")]
    OutOfRange(f64, f64, f64),
    /// A tabulated point list is not strictly increasing in both coordinates.
    #[error("tabulated law must be strictly increasing in both coordinates")]
    NotMonotone,
    /// A tabulated point list does not pass through the origin.
    #[error("tabulated law must pass through (0, 0)")]
    MissingOrigin,
    /// A tabulated point list has fewer than two points.
    #[error("tabulated law needs at least two points")]
    TooFewPoints,
    /// The requested flow is outside the invertible range of the law.
    #[error("flow {0} is not attainable by this law")]
    NotInvertible(f64),
    /// Non-finite input.
    #[error("non-finite input {0}")]
    NonFinite(f64),
}

/// Strictly increasing piecewise-linear table through the origin.
///
/// Interpolation only; queries outside the covered range are errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneTable {
    points: Vec<(f64, f64)>,
}

impl MonotoneTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self, LawError> {
        if points.len() < 2 {
            return Err(LawError::TooFewPoints);
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in points.windows(2) {
            if pair[1].0 <= pair[0].0 || pair[1].1 <= pair[0].1 {
                return Err(LawError::NotMonotone);
            }
        }
        if !points.iter().any(|&(x, y)| x == 0.0 && y == 0.0) {
            return Err(LawError::MissingOrigin);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn x_range(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    fn y_range(&self) -> (f64, f64) {
        (self.points[0].1, self.points[self.points.len() - 1].1)
    }

    /// Piecewise-linear interpolation of y at x.
    pub fn eval(&self, x: f64) -> Result<f64, LawError> {
        let (lo, hi) = self.x_range();
        if x < lo || x > hi {
            return Err(LawError::OutOfRange(x, lo, hi));
        }
        // binary search for the segment containing x
        let idx = match self.points.binary_search_by(|p| p.0.total_cmp(&x)) {
            Ok(i) => return Ok(self.points[i].1),
            Err(i) => i - 1,
        };
        let (x0, y0) = self.points[idx];
        let (x1, y1) = self.points[idx + 1];
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// Inverse interpolation: x such that eval(x) = y.
    pub fn invert(&self, y: f64) -> Result<f64, LawError> {
        let (lo, hi) = self.y_range();
        if y < lo || y > hi {
            return Err(LawError::NotInvertible(y));
        }
        let idx = match self.points.binary_search_by(|p| p.1.total_cmp(&y)) {
            Ok(i) => return Ok(self.points[i].0),
            Err(i) => i - 1,
        };
        let (x0, y0) = self.points[idx];
        let (x1, y1) = self.points[idx + 1];
        Ok(x0 + (x1 - x0) * (y - y0) / (y1 - y0))
    }

    /// Right derivative dy/dx at x (segment slope; at interior knots the
    /// slope of the segment to the right).
    pub fn slope(&self, x: f64) -> Result<f64, LawError> {
        let (lo, hi) = self.x_range();
        if x < lo || x > hi {
            return Err(LawError::OutOfRange(x, lo, hi));
        }
        let seg = match self.points.binary_search_by(|p| p.0.total_cmp(&x)) {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i - 1,
        };
        let (x0, y0) = self.points[seg];
        let (x1, y1) = self.points[seg + 1];
        Ok((y1 - y0) / (x1 - x0))
    }
}

/// Resistive relation `F = Λ(W)` between a branch potential difference and
/// its flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ResistiveLaw {
    /// `F = K·W`
    Linear { conductance: f64 },
    /// `F = K·max(0, W)`
    Relu { conductance: f64 },
    /// `F = K·tanh(scale·W)`
    Tanh { conductance: f64, scale: f64 },
    /// Piecewise-linear monotone table of (W, F) points.
    Tabulated(MonotoneTable),
}

impl ResistiveLaw {
    pub fn linear(conductance: f64) -> Self {
        ResistiveLaw::Linear { conductance }
    }

    pub fn relu(conductance: f64) -> Self {
        ResistiveLaw::Relu { conductance }
    }

    pub fn tanh(conductance: f64, scale: f64) -> Self {
        ResistiveLaw::Tanh { conductance, scale }
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self, LawError> {
        Ok(ResistiveLaw::Tabulated(MonotoneTable::new(points)?))
    }

    /// Flow produced by a potential difference.
    pub fn eval(&self, w: f64) -> Result<f64, LawError> {
        if !w.is_finite() {
            return Err(LawError::NonFinite(w));
        }
        match self {
            ResistiveLaw::Linear { conductance } => Ok(conductance * w),
            ResistiveLaw::Relu { conductance } => Ok(conductance * w.max(0.0)),
            ResistiveLaw::Tanh { conductance, scale } => Ok(conductance * (scale * w).tanh()),
            ResistiveLaw::Tabulated(table) => table.eval(w),
        }
    }

    /// Derivative dF/dW. At kinks (ReLU origin, table knots) the right
    /// derivative is returned.
    pub fn slope(&self, w: f64) -> Result<f64, LawError> {
        if !w.is_finite() {
            return Err(LawError::NonFinite(w));
        }
        match self {
            ResistiveLaw::Linear { conductance } => Ok(*conductance),
            ResistiveLaw::Relu { conductance } => {
                Ok(if w >= 0.0 { *conductance } else { 0.0 })
            }
            ResistiveLaw::Tanh { conductance, scale } => {
                let s = (scale * w).tanh();
                Ok(conductance * scale * (1.0 - s * s))
            }
            ResistiveLaw::Tabulated(table) => table.slope(w),
        }
    }

    /// Potential difference producing a given flow, where defined.
    pub fn invert(&self, f: f64) -> Result<f64, LawError> {
        if !f.is_finite() {
            return Err(LawError::NonFinite(f));
        }
        match self {
            ResistiveLaw::Linear { conductance } => {
                if *conductance == 0.0 {
                    return Err(LawError::NotInvertible(f));
                }
                Ok(f / conductance)
            }
            ResistiveLaw::Relu { conductance } => {
                if f < 0.0 || *conductance <= 0.0 {
                    Err(LawError::NotInvertible(f))
                } else {
                    Ok(f / conductance)
                }
            }
            ResistiveLaw::Tanh { conductance, scale } => {
                let u = f / conductance;
                if u.abs() >= 1.0 {
                    Err(LawError::NotInvertible(f))
                } else {
                    Ok(u.atanh() / scale)
                }
            }
            ResistiveLaw::Tabulated(table) => table.invert(f),
        }
    }

    /// `∫_0^W Λ(s) ds`, the branch co-content.
    ///
    /// Closed forms for linear/relu/tanh; adaptive Simpson quadrature
    /// (absolute tolerance 1e-10) for tabulated laws.
    pub fn cocontent(&self, w: f64) -> Result<f64, LawError> {
        if !w.is_finite() {
            return Err(LawError::NonFinite(w));
        }
        match self {
            ResistiveLaw::Linear { conductance } => Ok(0.5 * conductance * w * w),
            ResistiveLaw::Relu { conductance } => {
                let wp = w.max(0.0);
                Ok(0.5 * conductance * wp * wp)
            }
            ResistiveLaw::Tanh { conductance, scale } => {
                // ∫ K tanh(a s) ds = K/a · ln cosh(a W)
                Ok(conductance / scale * ln_cosh(scale * w))
            }
            ResistiveLaw::Tabulated(table) => {
                adaptive_simpson(&|x| table.eval(x), 0.0, w, 1e-10)
            }
        }
    }

    /// `∫_0^W Λ(s) ds` by fixed-order Gauss-Legendre quadrature (32 nodes).
    ///
    /// Used on the potential-function path; the closed forms above remain
    /// the co-content route.
    pub fn cocontent_gauss(&self, w: f64) -> Result<f64, LawError> {
        match self {
            ResistiveLaw::Tabulated(table) => gauss_legendre_32(&|x| table.eval(x), 0.0, w),
            _ => self.cocontent(w),
        }
    }

    /// `∫_0^F Λ^{-1}(f) df`, the branch content. Requires invertibility over
    /// `[0, F]`.
    pub fn content(&self, f: f64) -> Result<f64, LawError> {
        if !f.is_finite() {
            return Err(LawError::NonFinite(f));
        }
        match self {
            ResistiveLaw::Linear { conductance } => {
                if *conductance == 0.0 {
                    return Err(LawError::NotInvertible(f));
                }
                Ok(f * f / (2.0 * conductance))
            }
            ResistiveLaw::Relu { conductance } => {
                if f == 0.0 {
                    Ok(0.0)
                } else if f < 0.0 || *conductance <= 0.0 {
                    Err(LawError::NotInvertible(f))
                } else {
                    Ok(f * f / (2.0 * conductance))
                }
            }
            ResistiveLaw::Tanh { conductance, scale } => {
                let u = f / conductance;
                if u.abs() >= 1.0 {
                    return Err(LawError::NotInvertible(f));
                }
                // ∫ atanh(f/K)/a df = [F·atanh(F/K) + K/2·ln(1 − (F/K)²)]/a
                Ok((f * u.atanh() + 0.5 * conductance * (1.0 - u * u).ln()) / scale)
            }
            ResistiveLaw::Tabulated(table) => {
                // validate the whole range before integrating
                table.invert(f)?;
                adaptive_simpson(&|y| table.invert(y), 0.0, f, 1e-10)
            }
        }
    }

    /// True when the law parameters make `W·Λ(W) ≥ 0` with `Λ` nondecreasing
    /// (positive conductances; tables are monotone by construction).
    pub fn is_passive(&self) -> bool {
        match self {
            ResistiveLaw::Linear { conductance } | ResistiveLaw::Relu { conductance } => {
                *conductance > 0.0
            }
            ResistiveLaw::Tanh { conductance, scale } => *conductance > 0.0 && *scale > 0.0,
            ResistiveLaw::Tabulated(_) => true,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, ResistiveLaw::Linear { .. })
    }

    /// Conductance of a linear law, if this is one.
    pub fn linear_conductance(&self) -> Option<f64> {
        match self {
            ResistiveLaw::Linear { conductance } => Some(*conductance),
            _ => None,
        }
    }
}

/// Capacitive relation `Z = C(w)` between a node potential and its
/// inventory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CapacitiveLaw {
    /// `Z = C·w`
    Linear { capacitance: f64 },
    /// Piecewise-linear monotone table of (w, Z) points.
    Tabulated(MonotoneTable),
}

impl CapacitiveLaw {
    pub fn linear(capacitance: f64) -> Self {
        CapacitiveLaw::Linear { capacitance }
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self, LawError> {
        Ok(CapacitiveLaw::Tabulated(MonotoneTable::new(points)?))
    }

    /// Inventory stored at a potential.
    pub fn eval(&self, w: f64) -> Result<f64, LawError> {
        if !w.is_finite() {
            return Err(LawError::NonFinite(w));
        }
        match self {
            CapacitiveLaw::Linear { capacitance } => Ok(capacitance * w),
            CapacitiveLaw::Tabulated(table) => table.eval(w),
        }
    }

    /// Potential holding a given inventory.
    pub fn invert(&self, z: f64) -> Result<f64, LawError> {
        if !z.is_finite() {
            return Err(LawError::NonFinite(z));
        }
        match self {
            CapacitiveLaw::Linear { capacitance } => {
                if *capacitance == 0.0 {
                    return Err(LawError::NotInvertible(z));
                }
                Ok(z / capacitance)
            }
            CapacitiveLaw::Tabulated(table) => table.invert(z),
        }
    }

    /// Derivative dZ/dw (right derivative at table knots).
    pub fn slope(&self, w: f64) -> Result<f64, LawError> {
        match self {
            CapacitiveLaw::Linear { capacitance } => Ok(*capacitance),
            CapacitiveLaw::Tabulated(table) => table.slope(w),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, CapacitiveLaw::Linear { .. })
    }

    pub fn linear_capacitance(&self) -> Option<f64> {
        match self {
            CapacitiveLaw::Linear { capacitance } => Some(*capacitance),
            _ => None,
        }
    }

    pub fn is_passive(&self) -> bool {
        match self {
            CapacitiveLaw::Linear { capacitance } => *capacitance > 0.0,
            CapacitiveLaw::Tabulated(_) => true,
        }
    }
}

/// Overflow-safe ln(cosh(x)).
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    if a > 20.0 {
        a - std::f64::consts::LN_2 + (-2.0 * a).exp().ln_1p()
    } else {
        a.cosh().ln()
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. Handles b < a by sign flip. The integrand may fail (range
/// errors propagate).
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, LawError>
where
    F: Fn(f64) -> Result<f64, LawError>,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return Ok(-adaptive_simpson(f, b, a, tol)?);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = simpson(a, b, fa, fm, fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, LawError>
where
    F: Fn(f64) -> Result<f64, LawError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return Ok(left + right + err / 15.0);
    }
    Ok(simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

/// 32-point Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn gauss_legendre_32<F>(f: &F, a: f64, b: f64) -> Result<f64, LawError>
where
    F: Fn(f64) -> Result<f64, LawError>,
{
    // Abscissae/weights for n = 32 on [-1, 1] (positive half; symmetric).
    const X: [f64; 16] = [
        0.048_307_665_687_738_32,
        0.144_471_961_582_796_5,
        0.239_287_362_252_137_1,
        0.331_868_602_282_127_65,
        0.421_351_276_130_635_3,
        0.506_899_908_932_229_4,
        0.587_715_757_240_762_3,
        0.663_044_266_930_215_2,
        0.732_182_118_740_289_7,
        0.794_483_795_967_942_4,
        0.849_367_613_732_569_973,
        0.896_321_155_766_052_1,
        0.934_906_075_937_739_7,
        0.964_762_255_587_506_4,
        0.985_611_511_545_268_3,
        0.997_263_861_849_481_6,
    ];
    const W: [f64; 16] = [
        0.096_540_088_514_727_8,
        0.095_638_720_079_274_86,
        0.093_844_399_080_804_57,
        0.091_173_878_695_763_88,
        0.087_652_093_004_403_81,
        0.083_311_924_226_946_75,
        0.078_193_895_787_070_3,
        0.072_345_794_108_848_51,
        0.065_822_222_776_361_85,
        0.058_684_093_478_535_55,
        0.050_998_059_262_376_18,
        0.042_835_898_022_226_68,
        0.034_273_862_913_021_43,
        0.025_392_065_309_262_06,
        0.016_274_394_730_905_67,
        0.007_018_610_009_470_097,
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in X.iter().zip(W.iter()) {
        acc += w * (f(mid + half * x)? + f(mid - half * x)?);
    }
    Ok(acc * half)
}
