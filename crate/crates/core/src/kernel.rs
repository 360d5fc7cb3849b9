//! Kernels of e^{itφ(𝓛)} applied to the Littlewood-Paley pieces, evaluated
//! at bi-radial points through the Laguerre series of radial oscillatory
//! integrals, plus an independent brute-force λ-space oracle.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{annular, psi, PSI_SUPPORT_END, R_SUPPORT};
use crate::group::HTypeGroup;
use crate::quad::{self, gauss_legendre, odd_power_tail, QuadTolerance};
use crate::special::{binomial, laguerre_fn_unchecked, SphereTransform};
use crate::symbols::PhaseSymbol;

/// Which frequency piece of the initial datum is propagated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Multiplier R(4^{-j} 𝓛).
    Band(i32),
    /// Multiplier Ψ(4^{-k} 𝓛); `LowPass(0)` is Ψ(𝓛).
    LowPass(i32),
}

impl Scale {
    pub fn exponent(&self) -> i32 {
        match *self {
            Scale::Band(j) | Scale::LowPass(j) => j,
        }
    }

    /// Support of the radial cutoff in the rescaled variable.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Scale::Band(_) => R_SUPPORT,
            Scale::LowPass(_) => (0.0, PSI_SUPPORT_END),
        }
    }

    #[inline]
    pub fn cutoff(&self, r: f64) -> f64 {
        match self {
            Scale::Band(_) => annular(r),
            Scale::LowPass(_) => psi(r),
        }
    }
}

impl std::fmt::Display for Scale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scale::Band(j) => write!(f, "{j}"),
            Scale::LowPass(0) => write!(f, "lowpass"),
            Scale::LowPass(k) => write!(f, "lowpass:{k}"),
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("lowpass") {
            let rest = rest.trim_start_matches(':');
            if rest.is_empty() {
                return Ok(Scale::LowPass(0));
            }
            return rest
                .parse()
                .map(Scale::LowPass)
                .map_err(|_| Error::Invalid(format!("bad scale {s:?}")));
        }
        s.parse()
            .map(Scale::Band)
            .map_err(|_| Error::Invalid(format!("bad scale {s:?}")))
    }
}

/// Numerical controls for kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Quadrature error target relative to ∫|f| for each radial integral.
    pub quad_rel: f64,
    pub max_panels: usize,
    /// Relative target for the series truncation error.
    pub series_rel: f64,
    /// Absolute floor for the series truncation error.
    pub series_abs: f64,
    /// Hard cap on the Laguerre index.
    pub max_terms: usize,
    /// Sum exactly m = 0..=m_max and skip truncation control.
    pub m_max: Option<usize>,
    /// Number of trailing terms used for tail calibration.
    pub window: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            quad_rel: 1e-10,
            max_panels: 200_000,
            series_rel: 1e-8,
            series_abs: 0.0,
            max_terms: 10_000,
            m_max: None,
            window: 12,
        }
    }
}

/// A kernel value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub value: Complex64,
    pub quad_error: f64,
    pub truncation_error: f64,
    /// Number of explicitly summed terms minus one.
    pub m_used: usize,
    /// How the series tail was controlled.
    pub tail_method: TailMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    /// Fixed m_max, no tail estimate.
    Fixed,
    /// Polynomial fit of (2m+d)^{p+1} T_m in 1/(2m+d), summed with zeta tails.
    Extrapolated,
    /// Empirical envelope bound beyond the stationary band.
    Bounded,
}

/// Evaluator bound to a group, a symbol and numerical settings.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    d: usize,
    p: usize,
    symbol: PhaseSymbol,
    sphere: SphereTransform,
    pub config: KernelConfig,
}

/// One radial integral with its quadrature error.
#[derive(Debug, Clone, Copy)]
struct Radial {
    value: Complex64,
    error: f64,
}

impl KernelEvaluator {
    pub fn new(group: &HTypeGroup, symbol: PhaseSymbol, config: KernelConfig) -> Self {
        Self::from_dims(group.d(), group.p(), symbol, config)
    }

    pub fn from_dims(d: usize, p: usize, symbol: PhaseSymbol, config: KernelConfig) -> Self {
        Self {
            d,
            p,
            symbol,
            sphere: SphereTransform::new(p),
            config,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn symbol(&self) -> PhaseSymbol {
        self.symbol
    }

    fn homogeneous_dim(&self) -> i32 {
        (2 * self.d + 2 * self.p) as i32
    }

    /// ∫ σ̂(rσ) e^{itφ(4^j r)} B(r) 𝔏_m^{(d-1)}(r c) r^{d+p-1} dr over supp B,
    /// scaled by `weight` afterwards.
    fn radial(
        &self,
        scale: Scale,
        m: usize,
        t: f64,
        sigma: f64,
        c: f64,
        weight: f64,
    ) -> Result<Radial> {
        let (a, b) = scale.support();
        let j = scale.exponent();
        let dil = 4f64.powi(j);
        let d = self.d;
        let gamma_ = d as f64 - 1.0;
        let power = (d + self.p - 1) as i32;
        let sym = self.symbol;
        let sphere = self.sphere;
        let lag0 = binomial((m + d - 1) as f64, m);
        let f = |r: f64| -> Complex64 {
            let lag = if c == 0.0 {
                lag0
            } else {
                laguerre_fn_unchecked(m, gamma_, r * c)
            };
            let amp = sphere.eval(r * sigma) * scale.cutoff(r) * lag * r.powi(power);
            if t == 0.0 {
                Complex64::new(amp, 0.0)
            } else {
                Complex64::from_polar(amp, t * sym.eval(dil * r))
            }
        };
        let phase_var = t.abs() * (sym.eval(dil * b) - sym.eval(dil * a)).abs()
            + sigma * (b - a)
            + 2.0 * ((m as f64 + 0.5 * d as f64) * c).sqrt() * (b.sqrt() - a.sqrt());
        let panels = (phase_var / PI).ceil() as usize + 4;
        let tol = QuadTolerance {
            abs: 0.0,
            rel: self.config.quad_rel,
            max_panels: self.config.max_panels.max(2 * panels),
        };
        let res = quad::integrate(f, a, b, panels, tol).map_err(|e| match e {
            Error::QuadratureNonConvergence {
                subdivisions,
                estimate,
                error,
            } => Error::QuadratureNonConvergence {
                subdivisions,
                estimate: format!("{estimate} (times {weight:e}, m = {m})"),
                error: error * weight,
            },
            other => other,
        })?;
        Ok(Radial {
            value: res.value * weight,
            error: res.error * weight,
        })
    }

    /// II_{m,j}(t, z, s) with |z| = rho_z, |s| = rho_s:
    /// 2^{Nj} (2m+d)^{-(d+p)} ∫ σ̂(r|s|) e^{itφ(4^j r)} B(r) 𝔏_m^{(d-1)}(r|z|²/2) r^{d+p-1} dr.
    pub fn eval_ii(
        &self,
        scale: Scale,
        m: usize,
        t: f64,
        rho_z: f64,
        rho_s: f64,
    ) -> Result<Complex64> {
        check_point(rho_z, rho_s, t)?;
        let w = self.term_weight(scale, m);
        Ok(self
            .radial(scale, m, t, rho_s, 0.5 * rho_z * rho_z, w)?
            .value)
    }

    fn term_weight(&self, scale: Scale, m: usize) -> f64 {
        let j = scale.exponent();
        2f64.powi(self.homogeneous_dim() * j)
            * ((2 * m + self.d) as f64).powi(-((self.d + self.p) as i32))
    }

    /// I_{m,j}(t, z, s) = II_{m,j}(t, √(4^j/(2m+d)) z, 4^j s/(2m+d)).
    fn term(&self, scale: Scale, m: usize, t: f64, rho_z: f64, rho_s: f64) -> Result<Radial> {
        let dil = 4f64.powi(scale.exponent());
        let u = 1.0 / (2 * m + self.d) as f64;
        let sigma = dil * rho_s * u;
        let c = 0.5 * dil * rho_z * rho_z * u;
        self.radial(scale, m, t, sigma, c, self.term_weight(scale, m))
    }

    /// I_{m,j} evaluated through its own definition (for dual-path checks).
    pub fn eval_i(
        &self,
        scale: Scale,
        m: usize,
        t: f64,
        rho_z: f64,
        rho_s: f64,
    ) -> Result<Complex64> {
        check_point(rho_z, rho_s, t)?;
        Ok(self.term(scale, m, t, rho_z, rho_s)?.value)
    }

    /// U_t applied to the selected frequency piece, at |z| = rho_z, |s| = rho_s.
    pub fn eval(&self, scale: Scale, t: f64, rho_z: f64, rho_s: f64) -> Result<KernelSample> {
        check_point(rho_z, rho_s, t)?;
        let norm = (2.0 * PI).powi(-((self.d + self.p) as i32));
        let d = self.d;
        let p = self.p;
        let dil = 4f64.powi(scale.exponent());
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        let mut quad_err = 0.0;
        let mut terms: Vec<Complex64> = Vec::new();

        if let Some(m_max) = self.config.m_max {
            for m in 0..=m_max {
                let r = self.term(scale, m, t, rho_z, rho_s)?;
                sum += r.value;
                quad_err += r.error;
            }
            return Ok(KernelSample {
                value: sum * norm,
                quad_error: quad_err * norm,
                truncation_error: f64::NAN,
                m_used: m_max,
                tail_method: TailMethod::Fixed,
            });
        }

        let (a, b) = scale.support();
        // Frequencies in r contributed by σ̂ and the Laguerre factor, and the
        // smallest frequency of the time phase.
        let lag_freq = 2f64.powi(scale.exponent()) * rho_z / (2.0 * a.max(0.25).sqrt());
        let min_phase_freq = if t == 0.0 {
            0.0
        } else {
            let lo = a.max(1e-9);
            (0..=200)
                .map(|i| {
                    let r = lo + (b - lo) * i as f64 / 200.0;
                    dil * self.symbol.d1(dil * r).abs()
                })
                .fold(f64::INFINITY, f64::min)
                * t.abs()
        };
        let smooth_scale = b * dil * (rho_s + 0.5 * rho_z * rho_z) + d as f64;
        let window = self.config.window.max(6);
        let q = (p + 1) as f64;

        let mut m = 0usize;
        let mut band_end: Option<usize> = None;
        loop {
            if m > self.config.max_terms {
                let bound = terms.last().map(|t| t.norm()).unwrap_or(f64::NAN) * norm;
                return Err(Error::SeriesTruncation {
                    terms: m,
                    bound,
                    target: self.config.series_rel * sum.norm() * norm,
                });
            }
            let r = self.term(scale, m, t, rho_z, rho_s)?;
            sum += r.value;
            abs_sum += r.value.norm();
            quad_err += r.error;
            terms.push(r.value);
            let target = (self.config.series_rel * sum.norm())
                .max(1e-4 * self.config.series_rel * abs_sum)
                .max(self.config.series_abs / norm);
            if terms.len() >= window {
                let u = 1.0 / (2 * m + d) as f64;
                let sigma_m = dil * rho_s * u;
                // Past the stationary band: every later term is non-stationary.
                if t != 0.0 && sigma_m + lag_freq <= 0.5 * min_phase_freq {
                    band_end.get_or_insert(m);
                }
                let calibrated = band_end.is_some_and(|b| m >= b + 4);
                if calibrated {
                    let from = band_end.unwrap_or(0);
                    let bound = self.envelope_tail_bound(scale, t, rho_z, rho_s, from, &terms)?;
                    if bound <= target {
                        return Ok(KernelSample {
                            value: sum * norm,
                            quad_error: quad_err * norm,
                            truncation_error: bound * norm,
                            m_used: m,
                            tail_method: TailMethod::Bounded,
                        });
                    }
                }
                if u * smooth_scale <= 0.5 {
                    if let Some((tail, err)) = extrapolated_tail(&terms, d, q, window) {
                        if err <= target {
                            return Ok(KernelSample {
                                value: (sum + tail) * norm,
                                quad_error: quad_err * norm,
                                truncation_error: err * norm,
                                m_used: m,
                                tail_method: TailMethod::Extrapolated,
                            });
                        }
                    }
                }
            }
            m += 1;
        }
    }

    /// 2 C Σ_{m>M} (2m+d)^{-(p+1)} (1+σ_m)^{-(p-1)/2}, with C the largest ratio
    /// of |T_m| to the model over the non-stationary terms from `from` on and
    /// over probe terms at geometrically spaced larger m.
    #[allow(clippy::too_many_arguments)]
    fn envelope_tail_bound(
        &self,
        scale: Scale,
        t: f64,
        rho_z: f64,
        rho_s: f64,
        from: usize,
        terms: &[Complex64],
    ) -> Result<f64> {
        let m_last = terms.len() - 1;
        let d = self.d as f64;
        let p = self.p as f64;
        let dil = 4f64.powi(scale.exponent());
        let model = |m: usize| -> f64 {
            let k = 2.0 * m as f64 + d;
            k.powf(-(p + 1.0)) * (1.0 + dil * rho_s / k).powf(-(p - 1.0) / 2.0)
        };
        let mut c: f64 = 0.0;
        for (i, tm) in terms.iter().enumerate().skip(from) {
            c = c.max(tm.norm() / model(i));
        }
        let mut probe = m_last + 1;
        for _ in 0..4 {
            probe = (2 * probe).min(self.config.max_terms);
            let r = self.term(scale, probe, t, rho_z, rho_s)?;
            c = c.max((r.value.norm() + r.error) / model(probe));
            if probe == self.config.max_terms {
                break;
            }
        }
        let mut tail = 0.0;
        let horizon = m_last + 2_000;
        for m in m_last + 1..=horizon {
            tail += model(m);
        }
        tail += odd_power_tail(p + 1.0, horizon, d);
        Ok(2.0 * c * tail)
    }
}

/// Fit g_m = T_m (2m+d)^q by polynomials in u = 1/(2m+d) over the last
/// `window` terms and sum the fitted tail with Hurwitz zeta values. Returns
/// (tail, error) where the error compares fits of two degrees.
fn extrapolated_tail(
    terms: &[Complex64],
    d: usize,
    q: f64,
    window: usize,
) -> Option<(Complex64, f64)> {
    let n = terms.len();
    if n < window {
        return None;
    }
    let m_last = n - 1;
    let first = n - window;
    let u_of = |m: usize| 1.0 / (2 * m + d) as f64;
    let u_max = u_of(first);
    let tail_for = |deg: usize| -> Option<(Complex64, f64)> {
        let cols = deg + 1;
        let mut a = DMatrix::<f64>::zeros(window, cols);
        let mut rhs = DMatrix::<f64>::zeros(window, 2);
        for (row, m) in (first..n).enumerate() {
            let x = u_of(m) / u_max;
            let g = terms[m] * (2 * m + d) as f64;
            let g = g * ((2 * m + d) as f64).powf(q - 1.0);
            for k in 0..cols {
                a[(row, k)] = x.powi(k as i32);
            }
            rhs[(row, 0)] = g.re;
            rhs[(row, 1)] = g.im;
        }
        let svd = a.clone().svd(true, true);
        let coef = svd.solve(&rhs, 1e-14).ok()?;
        let resid = (&a * &coef - &rhs).abs().max();
        let mut tail = Complex64::new(0.0, 0.0);
        for k in 0..cols {
            let b = Complex64::new(coef[(k, 0)], coef[(k, 1)]) * u_max.powi(-(k as i32));
            tail += b * odd_power_tail(q + k as f64, m_last, d as f64);
        }
        Some((tail, resid))
    };
    let (hi, resid_hi) = tail_for(5)?;
    let (lo, _) = tail_for(4)?;
    let err = (hi - lo).norm() + resid_hi * odd_power_tail(q, m_last, d as f64);
    Some((hi, err))
}

fn check_point(rho_z: f64, rho_s: f64, t: f64) -> Result<()> {
    if !(rho_z >= 0.0 && rho_s >= 0.0) {
        return Err(Error::Domain(format!(
            "radii must be nonnegative, got ({rho_z}, {rho_s})"
        )));
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite, got {t}")));
    }
    Ok(())
}

/// Settings for the brute-force λ-space oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Gauss-Legendre nodes per radial panel.
    pub radial_order: usize,
    /// Radial panels per radian of phase variation (at least).
    pub panels_per_radian: f64,
    /// Cap on integrand evaluations per Laguerre index.
    pub max_evaluations: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            radial_order: 20,
            panels_per_radian: 0.25,
            max_evaluations: 200_000_000,
        }
    }
}

/// Direct evaluation of
/// (2π)^{-(d+p)} Σ_{m ≤ m_max} ∫_{R^p} e^{-iλ·s} e^{itφ((2m+d)|λ|)} B(4^{-j}(2m+d)|λ|)
///   𝔏_m^{(d-1)}(|λ||z|²/2) |λ|^d dλ
/// in polar coordinates with explicit angular quadrature (p ≤ 3).
#[allow(clippy::too_many_arguments)]
pub fn brute_force_oracle(
    group: &HTypeGroup,
    symbol: &PhaseSymbol,
    scale: Scale,
    t: f64,
    z: &[f64],
    s: &[f64],
    m_max: usize,
    cfg: &OracleConfig,
) -> Result<Complex64> {
    let d = group.d();
    let p = group.p();
    if z.len() != 2 * d {
        return Err(Error::DimensionMismatch {
            expected: 2 * d,
            got: z.len(),
        });
    }
    if s.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: s.len(),
        });
    }
    if p > 3 {
        return Err(Error::NotImplemented(format!(
            "brute-force oracle for p = {p}"
        )));
    }
    let z2: f64 = z.iter().map(|x| x * x).sum();
    let s_norm: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dil = 4f64.powi(scale.exponent());
    let (a, b) = scale.support();
    let gamma_ = d as f64 - 1.0;
    let (gx, gw) = gauss_legendre(cfg.radial_order);

    // Angular rule: directions ε and weights with Σ w = |S^{p-1}|.
    let angular = |rho_max: f64| -> Vec<([f64; 3], f64)> {
        let k = rho_max * s_norm;
        match p {
            1 => vec![([1.0, 0.0, 0.0], 1.0), ([-1.0, 0.0, 0.0], 1.0)],
            2 => {
                let n = (k.ceil() as usize + 40).max(64);
                (0..n)
                    .map(|i| {
                        let th = 2.0 * PI * i as f64 / n as f64;
                        ([th.cos(), th.sin(), 0.0], 2.0 * PI / n as f64)
                    })
                    .collect()
            }
            _ => {
                let nc = (k.ceil() as usize / 2 + 30).max(40);
                let nphi = (k.ceil() as usize + 40).max(64);
                let (cx, cw) = gauss_legendre(nc);
                let mut out = Vec::with_capacity(nc * nphi);
                for (ci, wi) in cx.iter().zip(&cw) {
                    let st = (1.0 - ci * ci).max(0.0).sqrt();
                    for k2 in 0..nphi {
                        let ph = 2.0 * PI * k2 as f64 / nphi as f64;
                        out.push((
                            [st * ph.cos(), st * ph.sin(), *ci],
                            wi * 2.0 * PI / nphi as f64,
                        ));
                    }
                }
                out
            }
        }
    };

    let mut total = Complex64::new(0.0, 0.0);
    for m in 0..=m_max {
        let k = (2 * m + d) as f64;
        let rho_a = dil * a / k;
        let rho_b = dil * b / k;
        let phase_var = t.abs() * (symbol.eval(k * rho_b) - symbol.eval(k * rho_a)).abs()
            + s_norm * (rho_b - rho_a)
            + 2.0 * ((m as f64 + 0.5 * d as f64) * 0.5 * z2).sqrt() * (rho_b.sqrt() - rho_a.sqrt());
        let panels = ((phase_var * cfg.panels_per_radian).ceil() as usize).max(12) + 4;
        let dirs = angular(rho_b);
        let evals = panels * cfg.radial_order * dirs.len();
        if evals > cfg.max_evaluations {
            return Err(Error::ResourceLimit(format!(
                "oracle needs {evals} evaluations at m = {m} (cap {})",
                cfg.max_evaluations
            )));
        }
        let h = (rho_b - rho_a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for pi_ in 0..panels {
            let c = rho_a + (pi_ as f64 + 0.5) * h;
            for (xi, wi) in gx.iter().zip(&gw) {
                let rho = c + 0.5 * h * xi;
                let cut = scale.cutoff(k * rho / dil);
                if cut == 0.0 {
                    continue;
                }
                let radial_amp = cut
                    * laguerre_fn_unchecked(m, gamma_, rho * 0.5 * z2)
                    * rho.powi(d as i32)
                    * rho.powi(p as i32 - 1);
                let time = Complex64::from_polar(1.0, t * symbol.eval(k * rho));
                let mut ang = Complex64::new(0.0, 0.0);
                for (e, w) in &dirs {
                    let dot = e[0] * s[0]
                        + if p > 1 { e[1] * s[1] } else { 0.0 }
                        + if p > 2 { e[2] * s[2] } else { 0.0 };
                    ang += Complex64::from_polar(*w, -rho * dot);
                }
                acc += time * ang * (0.5 * h * wi * radial_amp);
            }
        }
        total += acc;
    }
    Ok(total * (2.0 * PI).powi(-((d + p) as i32)))
}

/// Convenience: evaluate through a fresh evaluator.
pub fn eval_kernel(
    group: &HTypeGroup,
    symbol: PhaseSymbol,
    scale: Scale,
    t: f64,
    rho_z: f64,
    rho_s: f64,
    tol: f64,
) -> Result<KernelSample> {
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let cfg = KernelConfig {
        series_rel: tol,
        quad_rel: (tol * 1e-2).clamp(1e-12, 1e-8),
        ..KernelConfig::default()
    };
    KernelEvaluator::new(group, symbol, cfg).eval(scale, t, rho_z, rho_s)
}

/// Low-pass kernel U_t ψ with ψ the kernel of Ψ(𝓛).
pub fn eval_lowpass(
    group: &HTypeGroup,
    symbol: PhaseSymbol,
    t: f64,
    rho_z: f64,
    rho_s: f64,
    tol: f64,
) -> Result<KernelSample> {
    eval_kernel(group, symbol, Scale::LowPass(0), t, rho_z, rho_s, tol)
}
