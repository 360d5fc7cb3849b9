//! Sup-norm scans, decay-exponent fits, stationary-phase leading terms and
//! sharpness profiles.

use crate::frame::LpFrame;
use crate::group::HTypeGroup;
use crate::kernel::{KernelConfig, KernelEvaluator, Scale};
use crate::quad::{integrate, QuadTolerance};
use crate::special::SphereTransform;
use crate::symbols::{PhaseSymbol, SymbolKind};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// `n` geometrically spaced points from `a` to `b` inclusive.
pub fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

// ---------------------------------------------------------------------------
// Sup-norm scan

/// Grid and accuracy settings for [`sup_norm_scan_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Positive ρ_z values (besides 0), geometric over 2^{-j}·[1/4, 4].
    pub rho_z_points: usize,
    /// Log-grid ρ_s values (besides 0).
    pub rho_s_points: usize,
    /// Extra ρ_s values across the stationary band.
    pub band_points: usize,
    pub golden_rounds: usize,
    /// Golden-section steps per coordinate and round.
    pub golden_steps: usize,
    pub series_rel: f64,
    pub quad_rel: f64,
    /// Truncation floor relative to the running maximum.
    pub floor: f64,
    /// Seed for multiplicative jitter of the log grids; `None` keeps them fixed.
    pub jitter_seed: Option<u64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            rho_z_points: 4,
            rho_s_points: 14,
            band_points: 20,
            golden_rounds: 3,
            golden_steps: 6,
            series_rel: 1e-5,
            quad_rel: 1e-8,
            floor: 1e-3,
            jitter_seed: None,
        }
    }
}

impl ScanConfig {
    /// Twice the grid density of `self`.
    pub fn refined(&self) -> Self {
        Self {
            rho_z_points: 2 * self.rho_z_points,
            rho_s_points: 2 * self.rho_s_points,
            band_points: 2 * self.band_points,
            ..*self
        }
    }
}

/// Location and value of the scanned maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub sup: f64,
    pub rho_z: f64,
    pub rho_s: f64,
    pub evaluations: usize,
}

/// Range of ρ_s over which the m = 0 term has a stationary point:
/// d·t·φ'(4^j r) for r in the support of the cutoff.
pub fn stationary_band(symbol: &PhaseSymbol, d: usize, scale: Scale, t: f64) -> Option<(f64, f64)> {
    if t == 0.0 {
        return None;
    }
    let dil = 4f64.powi(scale.exponent());
    let (a, b) = scale.support();
    let a = a.max(b / 64.0);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=64 {
        let r = a + (b - a) * i as f64 / 64.0;
        let v = d as f64 * t.abs() * symbol.d1(dil * r).abs();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Some((lo, hi))
}

/// sup |U_t φ_j| over G with default settings.
pub fn sup_norm_scan(
    group: &HTypeGroup,
    symbol: PhaseSymbol,
    frame: &LpFrame,
    scale: Scale,
    t: f64,
) -> Result<f64> {
    sup_norm_scan_with(group, symbol, frame, scale, t, &ScanConfig::default()).map(|r| r.sup)
}

/// Maximizes |U_t φ_j(ρ_z, ρ_s)| over a bi-radial grid that includes the
/// stationary band, then refines around the best cell by golden-section
/// search alternating in ρ_s and ρ_z.
pub fn sup_norm_scan_with(
    group: &HTypeGroup,
    symbol: PhaseSymbol,
    frame: &LpFrame,
    scale: Scale,
    t: f64,
    cfg: &ScanConfig,
) -> Result<ScanResult> {
    let j = scale.exponent();
    if let Scale::Band(_) = scale {
        if j < frame.j_min || j > frame.j_max {
            return Err(Error::Domain(format!(
                "scale {j} outside the frame range [{}, {}]",
                frame.j_min, frame.j_max
            )));
        }
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite, got {t}")));
    }
    let d = group.d();
    let unit_z = 2f64.powi(-j);
    let unit_s = 4f64.powi(-j);
    let band = stationary_band(&symbol, d, scale, t);
    let mut rng = cfg.jitter_seed.map(ChaCha8Rng::seed_from_u64);
    let mut jitter = |v: Vec<f64>, ratio: f64| -> Vec<f64> {
        match rng.as_mut() {
            Some(r) => v
                .into_iter()
                .map(|x| x * ratio.powf(r.gen_range(-0.5..0.5)))
                .collect(),
            None => v,
        }
    };

    let z_hi = 4.0 * unit_z;
    let z_lo = 0.25 * unit_z;
    let mut zs = vec![0.0];
    let zg = geometric_grid(z_lo, z_hi, cfg.rho_z_points.max(1));
    let z_ratio = (z_hi / z_lo).powf(1.0 / cfg.rho_z_points.max(2) as f64);
    zs.extend(jitter(zg, z_ratio));

    let s_lo = 1e-2 * unit_s;
    let s_hi = band.map_or(20.0 * unit_s, |(_, hi)| (2.0 * hi).max(20.0 * unit_s));
    let mut ss = vec![0.0];
    let sg = geometric_grid(s_lo, s_hi, cfg.rho_s_points.max(2));
    let s_ratio = (s_hi / s_lo).powf(1.0 / cfg.rho_s_points.max(2) as f64);
    ss.extend(jitter(sg, s_ratio));
    let mut band_s = Vec::new();
    if let Some((lo, hi)) = band {
        band_s = geometric_grid(lo / 1.2, hi * 1.2, cfg.band_points.max(2));
        ss.extend(band_s.iter().copied());
    }
    ss.sort_by(|a, b| a.total_cmp(b));
    ss.dedup();

    let eval_with = |floor: f64, rz: f64, rs: f64| -> Result<f64> {
        let kc = KernelConfig {
            series_rel: cfg.series_rel,
            quad_rel: cfg.quad_rel,
            series_abs: floor,
            ..KernelConfig::default()
        };
        KernelEvaluator::new(group, symbol, kc)
            .eval(scale, t, rz, rs)
            .map(|s| s.value.norm())
    };

    // First pass on the axis ρ_z = 0 across the band (or the whole ρ_s grid
    // when t = 0) fixes the truncation floor for the remaining points.
    let first: Vec<f64> = if band_s.is_empty() {
        ss.clone()
    } else {
        band_s.clone()
    };
    let first_vals: Vec<f64> = first
        .par_iter()
        .map(|&rs| eval_with(0.0, 0.0, rs))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = first.len();
    let mut best = (0.0f64, 0.0f64, 0.0f64);
    for (&rs, &v) in first.iter().zip(&first_vals) {
        if v > best.0 {
            best = (v, 0.0, rs);
        }
    }
    let floor = cfg.floor * best.0;

    let mut points = Vec::new();
    for &rz in &zs {
        for &rs in &ss {
            if rz == 0.0 && first.contains(&rs) {
                continue;
            }
            points.push((rz, rs));
        }
    }
    let vals: Vec<f64> = points
        .par_iter()
        .map(|&(rz, rs)| eval_with(floor, rz, rs))
        .collect::<Result<Vec<_>>>()?;
    evaluations += points.len();
    for (&(rz, rs), &v) in points.iter().zip(&vals) {
        if v > best.0 {
            best = (v, rz, rs);
        }
    }

    let neighbours = |grid: &[f64], x: f64| -> (f64, f64) {
        let i = grid.iter().position(|&g| g == x).unwrap_or(0);
        let lo = if i == 0 { grid[0] } else { grid[i - 1] };
        let hi = if i + 1 == grid.len() {
            grid[i]
        } else {
            grid[i + 1]
        };
        (lo, hi)
    };
    let (mut s_br, mut z_br) = (neighbours(&ss, best.2), neighbours(&zs, best.1));
    for _ in 0..cfg.golden_rounds {
        let (rz, _) = (best.1, best.2);
        let (x, v, n) = golden_max(
            |rs| eval_with(floor, rz, rs),
            s_br.0,
            s_br.1,
            cfg.golden_steps,
        )?;
        evaluations += n;
        if v > best.0 {
            best = (v, rz, x);
        }
        let rs = best.2;
        let (x, v, n) = golden_max(
            |rz| eval_with(floor, rz, rs),
            z_br.0,
            z_br.1,
            cfg.golden_steps,
        )?;
        evaluations += n;
        if v > best.0 {
            best = (v, x, rs);
        }
        s_br = shrink(s_br, best.2);
        z_br = shrink(z_br, best.1);
    }
    Ok(ScanResult {
        sup: best.0,
        rho_z: best.1,
        rho_s: best.2,
        evaluations,
    })
}

/// Halves a bracket around `x`.
fn shrink(br: (f64, f64), x: f64) -> (f64, f64) {
    let w = 0.25 * (br.1 - br.0);
    ((x - w).max(br.0), (x + w).min(br.1))
}

/// Golden-section search for a maximum of `f` on [a, b]. Returns the best
/// abscissa, value and number of evaluations.
fn golden_max<F>(mut f: F, a: f64, b: f64, steps: usize) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(b > a) {
        return Ok((a, f64::NEG_INFINITY, 0));
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fe = f(e)?;
    let mut n = 2;
    let mut best = if fc >= fe { (c, fc) } else { (e, fe) };
    for _ in 0..steps {
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = f(c)?;
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = f(e)?;
            if fe > best.1 {
                best = (e, fe);
            }
        }
        n += 1;
    }
    Ok((best.0, best.1, n))
}

// ---------------------------------------------------------------------------
// Decay fits

/// Least-squares power-law fit of sup values against t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t_samples: Vec<f64>,
    pub sup_values: Vec<f64>,
    /// Negated slope of log sup against log t over the fit window.
    pub theta_hat: f64,
    pub theta_theory: f64,
    /// Largest |log sup - fitted line| over the fit window.
    pub residual: f64,
    /// Index of the first sample in the fit window.
    pub fit_start: usize,
    /// Fitted log sup at t = 1.
    pub intercept: f64,
}

/// Smallest number of samples a fit may use.
pub const MIN_FIT_POINTS: usize = 8;

/// First index from which all consecutive local log-slopes agree within
/// 0.05, capped so that at least [`MIN_FIT_POINTS`] samples remain.
pub fn onset_index(t: &[f64], v: &[f64]) -> usize {
    let n = t.len();
    if n <= MIN_FIT_POINTS {
        return 0;
    }
    let slopes: Vec<f64> = (0..n - 1)
        .map(|i| (v[i + 1].ln() - v[i].ln()) / (t[i + 1].ln() - t[i].ln()))
        .collect();
    let cap = n - MIN_FIT_POINTS;
    let mut start = slopes.len() - 1;
    while start > 0 && (slopes[start] - slopes[start - 1]).abs() <= 0.05 {
        start -= 1;
    }
    start.min(cap)
}

/// Fits log v = c - θ log t. With `auto_onset` the window starts at
/// [`onset_index`], otherwise at the first sample.
pub fn fit_decay(t: &[f64], v: &[f64], theta_theory: f64, auto_onset: bool) -> Result<DecayFit> {
    if t.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: v.len(),
        });
    }
    if t.len() < MIN_FIT_POINTS {
        return Err(Error::Invalid(format!(
            "a decay fit needs at least {MIN_FIT_POINTS} samples, got {}",
            t.len()
        )));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) || t[0] <= 0.0 {
        return Err(Error::Invalid(
            "t samples must be positive and strictly increasing".into(),
        ));
    }
    if let Some(bad) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!(
            "sup values must be positive, got {bad}"
        )));
    }
    let start = if auto_onset { onset_index(t, v) } else { 0 };
    let x: Vec<f64> = t[start..].iter().map(|x| x.ln()).collect();
    let y: Vec<f64> = v[start..].iter().map(|x| x.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        t_samples: t.to_vec(),
        sup_values: v.to_vec(),
        theta_hat: -slope,
        theta_theory,
        residual,
        fit_start: start,
        intercept,
    })
}

/// Target decay exponent. Band scales use the single-scale rate p/2 (θ = 1);
/// the low-pass kernel uses min(N/(2m₂), p/2) when α₂ = m₂ and p/2
/// otherwise.
pub fn theta_theory(symbol: &PhaseSymbol, group: &HTypeGroup, scale: Scale) -> Result<f64> {
    let params = symbol.params();
    let half_p = group.p() as f64 / 2.0;
    let (Some(_), Some(alpha2)) = (params.alpha1, params.alpha2) else {
        return Err(Error::Invalid(format!(
            "{} has no dispersive curvature exponent",
            symbol.name()
        )));
    };
    match scale {
        Scale::Band(_) => Ok(half_p),
        Scale::LowPass(_) => {
            if (alpha2 - params.m2).abs() < 1e-12 {
                Ok((group.homogeneous_dim() as f64 / (2.0 * params.m2)).min(half_p))
            } else {
                Ok(half_p)
            }
        }
    }
}

/// Scans sup |U_t φ_j| at `n` geometric times in `t_range` and fits the decay
/// exponent with automatic onset detection.
pub fn decay_fit(
    group: &HTypeGroup,
    symbol: PhaseSymbol,
    frame: &LpFrame,
    scale: Scale,
    t_range: (f64, f64),
    n: usize,
    cfg: &ScanConfig,
) -> Result<DecayFit> {
    let (a, b) = t_range;
    if !(a > 0.0) || !(b >= 100.0 * a) {
        return Err(Error::Invalid(format!(
            "t range must span at least two decades, got [{a}, {b}]"
        )));
    }
    let ts = geometric_grid(a, b, n.max(MIN_FIT_POINTS));
    let sups = ts
        .iter()
        .map(|&t| sup_norm_scan_with(group, symbol, frame, scale, t, cfg).map(|r| r.sup))
        .collect::<Result<Vec<_>>>()?;
    fit_decay(&ts, &sups, theta_theory(&symbol, group, scale)?, true)
}

// ---------------------------------------------------------------------------
// Stationary phase

/// A smooth real phase on R^p with analytic derivatives.
pub trait Phase {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// Largest gradient norm accepted at a critical point.
pub const CRITICAL_TOL: f64 = 1e-8;

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// (2π/|t|)^{p/2} |det H|^{-1/2} e^{iπ sgn(t) sig(H)/4} e^{itg(x₀)} ψ(x₀), the
/// leading term of ∫ e^{itg} ψ at a nondegenerate critical point x₀.
pub fn stationary_phase_leading<P, A>(
    phase: &P,
    amplitude: A,
    x0: &DVector<f64>,
    t: f64,
) -> Result<Complex64>
where
    P: Phase + ?Sized,
    A: Fn(&DVector<f64>) -> Complex64,
{
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!(
            "time must be finite and nonzero, got {t}"
        )));
    }
    let grad = phase.gradient(x0);
    if grad.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            expected: x0.len(),
            got: grad.len(),
        });
    }
    if grad.norm() > CRITICAL_TOL {
        return Err(Error::Invalid(format!(
            "gradient {:e} at x0 is not below {CRITICAL_TOL:e}",
            grad.norm()
        )));
    }
    let h = phase.hessian(x0);
    let ev = symmetric_eigenvalues(&h);
    let scale = ev.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if ev.iter().any(|e| e.abs() <= 1e-12 * scale.max(1e-300)) {
        return Err(Error::DegenerateCriticalPoint(format!(
            "Hessian eigenvalues {ev:?}"
        )));
    }
    let p = x0.len() as f64;
    let det: f64 = ev.iter().product();
    let sig = ev.iter().map(|e| e.signum()).sum::<f64>();
    let modulus = (2.0 * PI / t.abs()).powf(p / 2.0) / det.abs().sqrt();
    let arg = PI / 4.0 * t.signum() * sig + t * phase.value(x0);
    Ok(Complex64::from_polar(modulus, arg) * amplitude(x0))
}

// ---------------------------------------------------------------------------
// Sharpness

/// Ψ(λ) = -λ·s₀ + φ(d|λ|) on R^p.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPhase {
    pub symbol: PhaseSymbol,
    pub d: usize,
    pub s0: DVector<f64>,
}

impl RadialPhase {
    fn radial(&self, rho: f64) -> (f64, f64, f64) {
        let d = self.d as f64;
        (
            self.symbol.eval(d * rho),
            d * self.symbol.d1(d * rho),
            d * d * self.symbol.d2(d * rho),
        )
    }
}

impl Phase for RadialPhase {
    fn value(&self, x: &DVector<f64>) -> f64 {
        -x.dot(&self.s0) + self.radial(x.norm()).0
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let rho = x.norm();
        let (_, g1, _) = self.radial(rho);
        x * (g1 / rho) - &self.s0
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let rho = x.norm();
        let (_, g1, g2) = self.radial(rho);
        let e = x / rho;
        let proj = &e * e.transpose();
        let n = x.len();
        &proj * g2 + (DMatrix::identity(n, n) - &proj) * (g1 / rho)
    }
}

/// Closed-form critical data (|s₀|, |λ₀|, Hessian diagonal in units where the
/// last axis is radial) for the symbols with a sharpness example.
pub fn closed_form_critical(
    symbol: &PhaseSymbol,
    d: usize,
    p: usize,
) -> Result<(f64, f64, Vec<f64>)> {
    let df = d as f64;
    let (s, rho, tangential, radial) = match symbol.kind {
        SymbolKind::Fractional { alpha } => {
            let c = alpha * df.powf(alpha);
            (c, 1.0, c, c * (alpha - 1.0))
        }
        SymbolKind::FourthOrder => (3.0 * df, 1.0 / df, 3.0 * df * df, 2.0 * df * df),
        SymbolKind::Beam => {
            let c = df * df / SQRT_2;
            (df / SQRT_2, 1.0 / df, c, 0.5 * c)
        }
        SymbolKind::KleinGordon => {
            let c = df * df / (2.0 * SQRT_2);
            (df / (2.0 * SQRT_2), 1.0 / df, c, -0.25 * c)
        }
        _ => {
            return Err(Error::Invalid(format!(
                "no sharpness example for {}; use fractional, fourth_order, beam or klein_gordon",
                symbol.name()
            )))
        }
    };
    let mut diag = vec![tangential; p];
    diag[p - 1] = radial;
    Ok((s, rho, diag))
}

/// Smooth bump on |λ| centred at ρ₀ with radius 0.2ρ₀ and value 1 at ρ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBump {
    pub center: f64,
    pub radius: f64,
}

impl RadialBump {
    pub fn around(center: f64) -> Self {
        Self {
            center,
            radius: 0.2 * center,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let x = (rho - self.center) / self.radius;
        let q = 1.0 - x * x;
        if q <= 0.0 {
            0.0
        } else {
            (1.0 - 1.0 / q).exp()
        }
    }
}

/// Profile of |u(0, t s₀, t)| with its critical-point data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessProfile {
    pub symbol: String,
    pub d: usize,
    pub p: usize,
    pub s0: Vec<f64>,
    /// Numerically located critical point.
    pub lambda0: Vec<f64>,
    /// Closed-form critical point.
    pub lambda0_closed_form: Vec<f64>,
    pub gradient_norm: f64,
    /// Analytic Hessian at the located critical point, row by row.
    pub hessian: Vec<Vec<f64>>,
    pub hessian_eigenvalues: Vec<f64>,
    /// Closed-form Hessian eigenvalues in ascending order.
    pub hessian_closed_form: Vec<f64>,
    pub bump: RadialBump,
    /// (t, |u(0, t s₀, t)|)
    pub profile: Vec<(f64, f64)>,
    /// (t, |leading stationary-phase term|)
    pub leading: Vec<(f64, f64)>,
    pub fit: DecayFit,
}

impl SharpnessProfile {
    /// Fitted log-log slope of the profile modulus.
    pub fn slope(&self) -> f64 {
        -self.fit.theta_hat
    }

    /// |u| / |leading term| at the largest t.
    pub fn leading_ratio(&self) -> f64 {
        let (Some(u), Some(l)) = (self.profile.last(), self.leading.last()) else {
            return f64::NAN;
        };
        u.1 / l.1
    }

    /// Largest difference between located and closed-form λ₀ components.
    pub fn lambda0_error(&self) -> f64 {
        self.lambda0
            .iter()
            .zip(&self.lambda0_closed_form)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest difference between computed and closed-form Hessian eigenvalues.
    pub fn hessian_error(&self) -> f64 {
        self.hessian_eigenvalues
            .iter()
            .zip(&self.hessian_closed_form)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// u(0, t s₀, t) = ∫_{R^p} e^{itΨ(λ)} Q(|λ|) |λ|^d dλ in polar form:
/// ∫ e^{itφ(dρ)} σ̂(tρ|s₀|) Q(ρ) ρ^{d+p-1} dρ.
pub fn sharpness_integral(
    phase: &RadialPhase,
    bump: &RadialBump,
    p: usize,
    t: f64,
) -> Result<Complex64> {
    let sphere = SphereTransform::new(p);
    let s = phase.s0.norm();
    let (a, b) = bump.support();
    let d = phase.d;
    let variation = t.abs() * ((phase.radial(b).0 - phase.radial(a).0).abs() + s * (b - a));
    let panels = (variation / PI).ceil() as usize + 4;
    let tol = QuadTolerance {
        abs: 0.0,
        rel: 1e-12,
        max_panels: 400_000,
    };
    let r = integrate(
        |rho| {
            let amp = bump.eval(rho) * rho.powi((d + p - 1) as i32) * sphere.eval(t * rho * s);
            Complex64::from_polar(amp, t * phase.radial(rho).0)
        },
        a,
        b,
        panels,
        tol,
    )?;
    Ok(r.value)
}

/// Newton iteration for ∇Ψ = 0 from `start`.
fn locate_critical(phase: &RadialPhase, start: DVector<f64>) -> Result<DVector<f64>> {
    let mut x = start;
    for _ in 0..100 {
        let g = phase.gradient(&x);
        if g.norm() <= 1e-15 * phase.s0.norm().max(1.0) {
            break;
        }
        let step = phase.hessian(&x).lu().solve(&g).ok_or_else(|| {
            Error::DegenerateCriticalPoint("singular Hessian during Newton iteration".into())
        })?;
        x -= step;
    }
    Ok(x)
}

/// Sharpness profile of |u(0, t s₀, t)| at `n` geometric times in `t_range`
/// for s₀ along the last axis with the closed-form critical point at
/// |λ₀| = ρ₀, Q a bump around ρ₀.
pub fn sharpness_profile(
    symbol: PhaseSymbol,
    group: &HTypeGroup,
    t_range: (f64, f64),
    n: usize,
) -> Result<SharpnessProfile> {
    let d = group.d();
    let p = group.p();
    if p > 3 {
        return Err(Error::NotImplemented(format!(
            "sharpness quadrature for p = {p}"
        )));
    }
    let (s, rho0, diag) = closed_form_critical(&symbol, d, p)?;
    let mut s0 = DVector::zeros(p);
    s0[p - 1] = s;
    let mut closed = DVector::zeros(p);
    closed[p - 1] = rho0;
    let phase = RadialPhase { symbol, d, s0 };
    let bump = RadialBump::around(rho0);

    // Start Newton off the closed form so the location is a real check.
    let mut start = closed.clone() * 1.03;
    if p > 1 {
        start[0] = 0.02 * rho0;
    }
    let lambda0 = locate_critical(&phase, start)?;
    let grad = phase.gradient(&lambda0).norm();
    if grad > CRITICAL_TOL {
        return Err(Error::DegenerateCriticalPoint(format!(
            "Newton stalled with gradient {grad:e}"
        )));
    }
    let (a, b) = bump.support();
    let r0 = lambda0.norm();
    if !(r0 > a && r0 < b) {
        return Err(Error::Domain(format!(
            "critical point |λ₀| = {r0} outside supp Q = [{a}, {b}]"
        )));
    }
    let h = phase.hessian(&lambda0);
    let eig = symmetric_eigenvalues(&h);
    let mut closed_eig = diag;
    closed_eig.sort_by(|a, b| a.total_cmp(b));

    let ts = geometric_grid(t_range.0, t_range.1, n.max(MIN_FIT_POINTS));
    let values = ts
        .par_iter()
        .map(|&t| sharpness_integral(&phase, &bump, p, t).map(|u| u.norm()))
        .collect::<Result<Vec<_>>>()?;
    let amp = |x: &DVector<f64>| Complex64::new(bump.eval(x.norm()) * x.norm().powi(d as i32), 0.0);
    let leading = ts
        .iter()
        .map(|&t| stationary_phase_leading(&phase, amp, &lambda0, t).map(|v| (t, v.norm())))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_decay(&ts, &values, p as f64 / 2.0, true)?;
    Ok(SharpnessProfile {
        symbol: symbol.name(),
        d,
        p,
        s0: phase.s0.iter().copied().collect(),
        lambda0: lambda0.iter().copied().collect(),
        lambda0_closed_form: closed.iter().copied().collect(),
        gradient_norm: grad,
        hessian: (0..p).map(|i| h.row(i).iter().copied().collect()).collect(),
        hessian_eigenvalues: eig,
        hessian_closed_form: closed_eig,
        bump,
        profile: ts.iter().copied().zip(values).collect(),
        leading,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    struct Quadratic {
        sign: f64,
    }

    impl Phase for Quadratic {
        fn value(&self, x: &DVector<f64>) -> f64 {
            self.sign * x.norm_squared()
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            x * (2.0 * self.sign)
        }
        fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::identity(x.len(), x.len()) * (2.0 * self.sign)
        }
    }

    struct HalfSquare;

    impl Phase for HalfSquare {
        fn value(&self, x: &DVector<f64>) -> f64 {
            0.5 * x.norm_squared()
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            x.clone()
        }
        fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::identity(x.len(), x.len())
        }
    }

    struct Saddle;

    impl Phase for Saddle {
        fn value(&self, x: &DVector<f64>) -> f64 {
            x[0] * x[0] * x[0]
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_element(1, 3.0 * x[0] * x[0])
        }
        fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_element(1, 1, 6.0 * x[0])
        }
    }

    #[test]
    fn exact_power_laws_are_recovered() {
        let t = geometric_grid(10.0, 1e4, 12);
        for theta in [0.5, 1.5, 2.25] {
            let v: Vec<f64> = t.iter().map(|x| 3.0 * x.powf(-theta)).collect();
            let fit = fit_decay(&t, &v, theta, true).unwrap();
            assert!((fit.theta_hat - theta).abs() <= 1e-10);
            assert!(fit.residual <= 1e-10);
            assert_eq!(fit.fit_start, 0);
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        let t = geometric_grid(1.0, 100.0, 8);
        let mut v = vec![1.0; 8];
        v[3] = 0.0;
        assert!(matches!(
            fit_decay(&t, &v, 1.0, false),
            Err(Error::Domain(_))
        ));
        assert!(fit_decay(&t[..5], &v[..5], 1.0, false).is_err());
        let mut t2 = t.clone();
        t2[4] = t2[3];
        assert!(fit_decay(&t2, &[1.0; 8], 1.0, false).is_err());
    }

    #[test]
    fn onset_skips_a_transient() {
        let t = geometric_grid(1.0, 1e4, 16);
        let v: Vec<f64> = t.iter().map(|x| x.powf(-1.5) * (1.0 + 30.0 / x)).collect();
        let all = fit_decay(&t, &v, 1.5, false).unwrap();
        let auto = fit_decay(&t, &v, 1.5, true).unwrap();
        assert!(auto.fit_start > 0);
        assert!((auto.theta_hat - 1.5).abs() < (all.theta_hat - 1.5).abs());
    }

    #[test]
    fn theta_targets() {
        let g = HTypeGroup::builtin(3).unwrap();
        let fourth: PhaseSymbol = "fourth_order".parse().unwrap();
        assert_eq!(theta_theory(&fourth, &g, Scale::LowPass(0)).unwrap(), 1.5);
        let frac = PhaseSymbol::fractional(0.5).unwrap();
        assert_eq!(theta_theory(&frac, &g, Scale::Band(0)).unwrap(), 1.5);
        assert_eq!(theta_theory(&frac, &g, Scale::LowPass(0)).unwrap(), 1.5);
        let schr: PhaseSymbol = "schrodinger".parse().unwrap();
        assert!(theta_theory(&schr, &g, Scale::Band(0)).is_err());
    }

    #[test]
    fn gaussian_leading_term() {
        // ∫ e^{itx² - x²} dx = sqrt(π / (1 - it)).
        let x0 = DVector::zeros(1);
        for t in [10.0, 100.0, 1000.0] {
            let lead = stationary_phase_leading(
                &Quadratic { sign: 1.0 },
                |x| Complex64::new((-x[0] * x[0]).exp(), 0.0),
                &x0,
                t,
            )
            .unwrap();
            let exact = (Complex64::new(PI, 0.0) / Complex64::new(1.0, -t)).sqrt();
            assert!((lead.norm() - exact.norm()).abs() / exact.norm() <= 2.0 / t);
            assert!((lead - exact).norm() / exact.norm() <= 2.0 / t);
        }
    }

    #[test]
    fn sign_flip_conjugates() {
        let x0 = DVector::zeros(2);
        let amp = |_: &DVector<f64>| Complex64::new(1.0, 0.0);
        let a = stationary_phase_leading(&Quadratic { sign: 1.0 }, amp, &x0, 50.0).unwrap();
        let b = stationary_phase_leading(&Quadratic { sign: -1.0 }, amp, &x0, 50.0).unwrap();
        assert_relative_eq!(a.re, b.re, max_relative = 1e-14);
        assert_relative_eq!(a.im, -b.im, max_relative = 1e-14);
    }

    #[test]
    fn degenerate_and_off_critical_points_are_rejected() {
        let amp = |_: &DVector<f64>| Complex64::new(1.0, 0.0);
        let r = stationary_phase_leading(&Saddle, amp, &DVector::zeros(1), 10.0);
        assert!(matches!(r, Err(Error::DegenerateCriticalPoint(_))));
        let r = stationary_phase_leading(&HalfSquare, amp, &DVector::from_element(2, 0.1), 10.0);
        assert!(matches!(r, Err(Error::Invalid(_))));
    }

    #[test]
    fn two_dimensional_bump_against_quadrature() {
        // 2π ∫ e^{itρ²/2} b(ρ) ρ dρ with b(ρ) = e^{1 - 1/(1-ρ²)}.
        let t = 200.0;
        let bump = |r: f64| {
            if r < 1.0 {
                (1.0 - 1.0 / (1.0 - r * r)).exp()
            } else {
                0.0
            }
        };
        let tol = QuadTolerance {
            abs: 0.0,
            rel: 1e-12,
            max_panels: 100_000,
        };
        let brute = integrate(
            |r| Complex64::from_polar(2.0 * PI * bump(r) * r, 0.5 * t * r * r),
            0.0,
            1.0,
            64,
            tol,
        )
        .unwrap()
        .value;
        let lead = stationary_phase_leading(
            &HalfSquare,
            |x| Complex64::new(bump(x.norm()), 0.0),
            &DVector::zeros(2),
            t,
        )
        .unwrap();
        assert!((lead - brute).norm() / brute.norm() < 0.03);
    }

    #[test]
    fn leading_term_error_shrinks_like_one_over_t() {
        let amp = |x: &DVector<f64>| Complex64::new((-x[0] * x[0]).exp(), 0.0);
        let err = |t: f64| {
            let lead =
                stationary_phase_leading(&Quadratic { sign: 1.0 }, amp, &DVector::zeros(1), t)
                    .unwrap();
            let exact = (Complex64::new(PI, 0.0) / Complex64::new(1.0, -t)).sqrt();
            (lead - exact).norm() / exact.norm()
        };
        let ratio = err(100.0) / err(1000.0);
        assert!((ratio - 10.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn closed_form_hessians() {
        let g = HTypeGroup::builtin(3).unwrap();
        for name in ["fractional:0.5", "fourth_order", "beam", "klein_gordon"] {
            let sym: PhaseSymbol = name.parse().unwrap();
            let (s, rho, diag) = closed_form_critical(&sym, g.d(), 3).unwrap();
            let mut s0 = DVector::zeros(3);
            s0[2] = s;
            let phase = RadialPhase {
                symbol: sym,
                d: g.d(),
                s0,
            };
            let mut x = DVector::zeros(3);
            x[2] = rho;
            assert!(phase.gradient(&x).norm() < 1e-12, "{name}");
            let h = phase.hessian(&x);
            for i in 0..3 {
                assert_relative_eq!(h[(i, i)], diag[i], max_relative = 1e-12);
            }
        }
        let wave: PhaseSymbol = "wave".parse().unwrap();
        assert!(closed_form_critical(&wave, 2, 3).is_err());
    }

    #[test]
    fn sharpness_profile_fractional_short_range() {
        let g = HTypeGroup::builtin(3).unwrap();
        let prof =
            sharpness_profile(PhaseSymbol::fractional(0.5).unwrap(), &g, (1e2, 1e3), 8).unwrap();
        assert!(prof.lambda0_error() < 1e-6);
        assert!(prof.hessian_error() < 1e-6);
        assert!(prof.gradient_norm < CRITICAL_TOL);
        assert!(
            (prof.leading_ratio() - 1.0).abs() < 0.1,
            "{}",
            prof.leading_ratio()
        );
    }

    #[test]
    fn scan_at_time_zero_peaks_at_origin() {
        let g = HTypeGroup::builtin(1).unwrap();
        let sym = PhaseSymbol::fractional(0.5).unwrap();
        let frame = LpFrame::default();
        let r = sup_norm_scan_with(&g, sym, &frame, Scale::Band(0), 0.0, &ScanConfig::default())
            .unwrap();
        let origin = KernelEvaluator::new(&g, sym, KernelConfig::default())
            .eval(Scale::Band(0), 0.0, 0.0, 0.0)
            .unwrap()
            .value
            .norm();
        assert_relative_eq!(r.sup, origin, max_relative = 1e-6);
        assert_eq!((r.rho_z, r.rho_s), (0.0, 0.0));
    }

    #[test]
    fn scan_at_time_zero_scales_with_homogeneous_dimension() {
        let g = HTypeGroup::builtin(2).unwrap();
        let sym = PhaseSymbol::fractional(0.5).unwrap();
        let frame = LpFrame::default();
        let nn = g.homogeneous_dim() as i32;
        let base = sup_norm_scan(&g, sym, &frame, Scale::Band(0), 0.0).unwrap();
        for j in [-1, 1, 2] {
            let v = sup_norm_scan(&g, sym, &frame, Scale::Band(j), 0.0).unwrap();
            assert_relative_eq!(v, base * 2f64.powi(nn * j), max_relative = 1e-6);
        }
    }

    #[test]
    fn doubling_grid_density_changes_little() {
        let g = HTypeGroup::builtin(1).unwrap();
        let sym = PhaseSymbol::fractional(0.5).unwrap();
        let frame = LpFrame::default();
        let cfg = ScanConfig::default();
        for t in [3.0, 30.0] {
            let a = sup_norm_scan_with(&g, sym, &frame, Scale::Band(0), t, &cfg)
                .unwrap()
                .sup;
            let b = sup_norm_scan_with(&g, sym, &frame, Scale::Band(0), t, &cfg.refined())
                .unwrap()
                .sup;
            assert!((a - b).abs() / b < 0.02, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn scan_respects_frame_range() {
        let g = HTypeGroup::builtin(1).unwrap();
        let sym = PhaseSymbol::fractional(0.5).unwrap();
        let frame = LpFrame {
            j_min: -2,
            j_max: 2,
        };
        assert!(sup_norm_scan(&g, sym, &frame, Scale::Band(3), 1.0).is_err());
    }

    #[test]
    fn jitter_is_reproducible() {
        let g = HTypeGroup::builtin(1).unwrap();
        let sym = PhaseSymbol::fractional(0.5).unwrap();
        let frame = LpFrame::default();
        let cfg = ScanConfig {
            jitter_seed: Some(7),
            golden_rounds: 1,
            ..ScanConfig::default()
        };
        let a = sup_norm_scan_with(&g, sym, &frame, Scale::Band(0), 3.0, &cfg).unwrap();
        let b = sup_norm_scan_with(&g, sym, &frame, Scale::Band(0), 3.0, &cfg).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn fit_recovers_any_power_law(theta in 0.1..3.0f64, c in -5.0..5.0f64, lo in 0.0..2.0f64) {
            let t = geometric_grid(10f64.powf(lo), 10f64.powf(lo + 2.5), 10);
            let v: Vec<f64> = t.iter().map(|x| c.exp() * x.powf(-theta)).collect();
            let fit = fit_decay(&t, &v, theta, true).unwrap();
            prop_assert!((fit.theta_hat - theta).abs() <= 1e-10);
            prop_assert!((fit.intercept - c).abs() <= 1e-9);
        }

        #[test]
        fn leading_modulus_scales_like_t_power(t in 1.0..1e4f64, k in 1usize..4) {
            let x0 = DVector::zeros(k);
            let amp = |_: &DVector<f64>| Complex64::new(1.0, 0.0);
            let a = stationary_phase_leading(&HalfSquare, amp, &x0, t).unwrap().norm();
            let b = stationary_phase_leading(&HalfSquare, amp, &x0, 4.0 * t).unwrap().norm();
            prop_assert!((a / b - 2f64.powi(k as i32)).abs() <= 1e-10);
        }
    }
}
