//! Laguerre functions, Bessel functions of real order, the Hankel envelope
//! h± and the Fourier transform of the unit sphere measure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

const RESCALE: f64 = 1e100;
const LN_RESCALE: f64 = 230.25850929940458;

/// Laguerre polynomial L_m^{(γ)}(τ) returned as (mantissa, log-scale), so the
/// value is mantissa * exp(log-scale). Three-term recurrence with rescaling.
fn laguerre_scaled(m: usize, gamma_: f64, tau: f64) -> (f64, f64) {
    let mut l0 = 1.0;
    if m == 0 {
        return (1.0, 0.0);
    }
    let mut l1 = gamma_ + 1.0 - tau;
    let mut log_scale = 0.0;
    for k in 1..m {
        let kf = k as f64;
        let l2 = ((2.0 * kf + gamma_ + 1.0 - tau) * l1 - (kf + gamma_) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
        if l1.abs() > RESCALE {
            l0 /= RESCALE;
            l1 /= RESCALE;
            log_scale += LN_RESCALE;
        }
    }
    (l1, log_scale)
}

/// Laguerre polynomial L_m^{(γ)}(τ). May overflow for large τ; prefer
/// [`laguerre_fn`] which includes the damping factor.
pub fn laguerre_poly(m: usize, gamma_: f64, tau: f64) -> f64 {
    let (v, s) = laguerre_scaled(m, gamma_, tau);
    v * s.exp()
}

/// Laguerre function 𝔏_m^{(γ)}(τ) = L_m^{(γ)}(τ) e^{-τ/2}.
pub fn laguerre_fn(m: usize, gamma_: f64, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!(
            "Laguerre argument must be nonnegative, got {tau}"
        )));
    }
    if !(gamma_ > -1.0) {
        return Err(Error::Domain(format!(
            "Laguerre type must exceed -1, got {gamma_}"
        )));
    }
    Ok(laguerre_fn_unchecked(m, gamma_, tau))
}

#[inline]
pub(crate) fn laguerre_fn_unchecked(m: usize, gamma_: f64, tau: f64) -> f64 {
    let (v, s) = laguerre_scaled(m, gamma_, tau);
    if v == 0.0 {
        return 0.0;
    }
    v * (s - 0.5 * tau).exp()
}

/// Binomial coefficient for real upper argument: binom(a, k).
pub fn binomial(a: f64, k: usize) -> f64 {
    // Use the shorter product when a is a nonnegative integer.
    let k = if a.fract() == 0.0 && a >= k as f64 {
        k.min((a as usize) - k)
    } else {
        k
    };
    let mut r = 1.0;
    for i in 0..k {
        r *= (a - i as f64) / (i as f64 + 1.0);
    }
    r
}

/// Stirling numbers of the second kind S(n, k) for k = 0..=n.
pub fn stirling2_row(n: usize) -> Vec<f64> {
    let mut row = vec![0.0; n + 1];
    row[0] = 1.0;
    for i in 1..=n {
        let mut next = vec![0.0; n + 1];
        for k in 1..=i {
            next[k] = k as f64 * row[k] + row[k - 1];
        }
        row = next;
    }
    row
}

/// k-th derivative of 𝔏_m^{(γ)} at τ, from dL_m^{(γ)}/dτ = -L_{m-1}^{(γ+1)}
/// and the Leibniz rule on the damping factor.
pub fn laguerre_fn_derivative(m: usize, gamma_: f64, k: usize, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!(
            "Laguerre argument must be nonnegative, got {tau}"
        )));
    }
    let mut sum = 0.0;
    for i in 0..=k.min(m) {
        let coeff = binomial(k as f64, i)
            * (-0.5f64).powi((k - i) as i32)
            * if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += coeff * laguerre_fn_unchecked(m - i, gamma_ + i as f64, tau);
    }
    Ok(sum)
}

/// (τ d/dτ)^β 𝔏_m^{(γ)}(τ), expanded as Σ_k S(β, k) τ^k D^k.
pub fn euler_operator_laguerre(m: usize, gamma_: f64, beta: usize, tau: f64) -> Result<f64> {
    let s = stirling2_row(beta);
    let mut sum = 0.0;
    for (k, &c) in s.iter().enumerate() {
        if c != 0.0 {
            sum += c * tau.powi(k as i32) * laguerre_fn_derivative(m, gamma_, k, tau)?;
        }
    }
    Ok(sum)
}

/// Per-degree sup of the normalized Euler-operator ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaguerreBoundRow {
    pub m: usize,
    pub beta: usize,
    /// sup_τ |(τ d/dτ)^β 𝔏_m^{(d-1)}(τ)|
    pub sup_value: f64,
    /// sup_value / (2m+d)^{d-1/4}
    pub ratio: f64,
    /// sup_value / (2m+d)^{d-1}
    pub ratio_sharp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaguerreBoundReport {
    pub d: usize,
    pub m_max: usize,
    pub beta_max: usize,
    pub rows: Vec<LaguerreBoundRow>,
    /// max ratio over m in [1, 10]
    pub head_sup: f64,
    /// max ratio over m in [m_max/2, m_max]
    pub tail_sup: f64,
    pub pass: bool,
}

/// Scan the normalized ratio over a τ grid for m ≤ m_max and β ≤ beta_max.
/// Passes when the sup over the upper half of degrees stays below ten times
/// the sup over m in [1, 10].
pub fn check_laguerre_bound(
    d: usize,
    m_max: usize,
    beta_max: usize,
    tau_grid: &[f64],
) -> Result<LaguerreBoundReport> {
    if beta_max > d {
        return Err(Error::Domain(format!("beta = {beta_max} exceeds d = {d}")));
    }
    if d == 0 {
        return Err(Error::Domain("d must be positive".into()));
    }
    let gamma_ = d as f64 - 1.0;
    let mut rows = Vec::new();
    for beta in 0..=beta_max {
        for m in 0..=m_max {
            let mut sup: f64 = 0.0;
            for &tau in tau_grid {
                sup = sup.max(euler_operator_laguerre(m, gamma_, beta, tau)?.abs());
            }
            let scale = (2 * m + d) as f64;
            rows.push(LaguerreBoundRow {
                m,
                beta,
                sup_value: sup,
                ratio: sup / scale.powf(d as f64 - 0.25),
                ratio_sharp: sup / scale.powf(d as f64 - 1.0),
            });
        }
    }
    let head_sup = rows
        .iter()
        .filter(|r| (1..=10).contains(&r.m))
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    let tail_sup = rows
        .iter()
        .filter(|r| r.m >= m_max / 2 && r.m >= 1)
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    let pass = tail_sup.is_finite() && tail_sup <= 10.0 * head_sup;
    Ok(LaguerreBoundReport {
        d,
        m_max,
        beta_max,
        rows,
        head_sup,
        tail_sup,
        pass,
    })
}

fn bessel_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let lead = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Hankel asymptotic series P(ν, x), Q(ν, x).
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if a.abs() > prev || a == 0.0 {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn bessel_miller(nu: f64, x: f64) -> f64 {
    let mut n = (x.ceil() as usize) + 60;
    if n % 2 == 1 {
        n += 1;
    }
    // Backward recurrence J_{ν+k-1} = 2(ν+k)/x J_{ν+k} - J_{ν+k+1}.
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    // Normalization sum Σ_{k≥1} (ν+2k) h_k J_{ν+2k}, with h_k built downward
    // from its closed form at the starting index.
    let mut norm_sum = 0.0;
    let h = |k: usize| -> f64 {
        // Γ(ν+k)/(k! Γ(ν+1))
        (ln_gamma(nu + k as f64) - ln_gamma(k as f64 + 1.0) - ln_gamma(nu + 1.0)).exp()
    };
    let mut k = n;
    let mut half = n / 2;
    let mut hcur = if nu == 0.0 {
        1.0 / half as f64
    } else {
        h(half)
    };
    loop {
        // j holds J_{ν+k}, jp1 holds J_{ν+k+1}
        if k % 2 == 0 && k > 0 {
            norm_sum += (nu + k as f64) * hcur * j;
            // step h to index half-1
            if half > 1 {
                hcur = hcur * half as f64 / (nu + half as f64 - 1.0);
            }
            half -= 1;
        }
        if k == 0 {
            break;
        }
        let jm1 = 2.0 * (nu + k as f64) / x * j - jp1;
        jp1 = j;
        j = jm1;
        k -= 1;
        if j.abs() > 1e250 {
            j /= 1e250;
            jp1 /= 1e250;
            norm_sum /= 1e250;
        }
    }
    let total = j + norm_sum;
    let lead = (nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)).exp();
    lead * j / total
}

/// Bessel function J_ν(x) of real order ν > -1/2 and argument x ≥ 0.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(nu > -0.5) {
        return Err(Error::Domain(format!(
            "Bessel order must exceed -1/2, got {nu}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "Bessel argument must be nonnegative, got {x}"
        )));
    }
    Ok(bessel_j_unchecked(nu, x))
}

pub(crate) fn bessel_j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 8.0 {
        bessel_series(nu, x)
    } else if x >= 25.0 + 0.5 * nu * nu {
        let (p, q) = hankel_pq(nu, x);
        let chi = x - (0.5 * nu + 0.25) * PI;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    } else {
        bessel_miller(nu, x)
    }
}

/// Results of the Bessel property checks on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselReport {
    pub nu: f64,
    /// sup over (0, 1] of r^{-ν}|J_ν(r)|
    pub small_r_sup: f64,
    /// max |FD derivative of r^{-ν}J_ν + r^{-ν}J_{ν+1}|
    pub derivative_max_error: f64,
    /// sup over [1, 1e4] of r^{1/2}|J_ν(r)|
    pub large_r_sup: f64,
    pub pass: bool,
}

/// Check the small-r bound, the derivative identity
/// d/dr (r^{-ν}J_ν) = -r^{-ν}J_{ν+1} by central differences with h = 1e-5,
/// and the r^{-1/2} decay bound on the given grid.
pub fn check_bessel_properties(nu: f64, r_grid: &[f64]) -> Result<BesselReport> {
    let f = |r: f64| -> Result<f64> { Ok(r.powf(-nu) * bessel_j(nu, r)?) };
    let h = 1e-5;
    let mut small: f64 = 0.0;
    let mut large: f64 = 0.0;
    let mut deriv: f64 = 0.0;
    for &r in r_grid {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "grid point must be positive, got {r}"
            )));
        }
        if r <= 1.0 {
            small = small.max(f(r)?.abs());
        }
        if (1.0..=1e4).contains(&r) {
            large = large.max(r.sqrt() * bessel_j(nu, r)?.abs());
        }
        if r > 2.0 * h {
            let fd = (f(r + h)? - f(r - h)?) / (2.0 * h);
            let exact = -r.powf(-nu) * bessel_j(nu + 1.0, r)?;
            deriv = deriv.max((fd - exact).abs());
        }
    }
    let pass = small.is_finite() && large.is_finite() && deriv <= 1e-8;
    Ok(BesselReport {
        nu,
        small_r_sup: small,
        derivative_max_error: deriv,
        large_r_sup: large,
        pass,
    })
}

/// The pair h± with r^{-ν}J_ν(r) = e^{ir}h₊(r) + e^{-ir}h₋(r), ν = (p-2)/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePair {
    pub r: f64,
    pub h_plus: Complex64,
    pub h_minus: Complex64,
}

impl EnvelopePair {
    /// e^{ir}h₊ + e^{-ir}h₋, which is real up to rounding.
    pub fn recombine(&self) -> f64 {
        let e = Complex64::from_polar(1.0, self.r);
        (e * self.h_plus + e.conj() * self.h_minus).re
    }
}

/// (P + iQ)(ν, r) = Γ(ν+1/2)^{-1} ∫_0^∞ e^{-u} u^{ν-1/2} (1 + iu/(2r))^{ν-1/2} du,
/// computed after the substitution u = v².
pub fn hankel_modulation(nu: f64, r: f64) -> Complex64 {
    if (nu - 0.5).abs() < 1e-15 {
        return Complex64::new(1.0, 0.0);
    }
    let (x, w) = gauss_legendre(48);
    let mut sum = Complex64::new(0.0, 0.0);
    // v in [0, 12] split into 6 panels; e^{-144} is far below double precision.
    for panel in 0..6 {
        let a = 2.0 * panel as f64;
        for (xi, wi) in x.iter().zip(&w) {
            let v = a + 1.0 + xi;
            let v2 = v * v;
            let base = Complex64::new(1.0, v2 / (2.0 * r));
            sum += base.powf(nu - 0.5) * (wi * 2.0 * (-v2).exp() * v.powf(2.0 * nu));
        }
    }
    sum / gamma(nu + 0.5)
}

/// Hankel envelope for the sphere S^{p-1}: h₊ = ½ r^{-ν} √(2/(πr))
/// e^{-i(νπ/2+π/4)} (P+iQ)(r), h₋ = conj(h₊). The normalizing constant is 1.
pub fn bessel_envelope(p: usize, r: f64) -> Result<EnvelopePair> {
    if p < 2 {
        return Err(Error::Domain(format!("envelope needs p >= 2, got {p}")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "envelope argument must be positive, got {r}"
        )));
    }
    let nu = (p as f64 - 2.0) / 2.0;
    let w = hankel_modulation(nu, r);
    let pre = 0.5 * r.powf(-nu) * (2.0 / (PI * r)).sqrt();
    let h_plus = Complex64::from_polar(pre, -(nu * FRAC_PI_2 + FRAC_PI_4)) * w;
    Ok(EnvelopePair {
        r,
        h_plus,
        h_minus: h_plus.conj(),
    })
}

/// Fourier transform of the surface measure of S^{p-1} at radius x:
/// (2π)^{p/2} x^{-ν} J_ν(x), ν = (p-2)/2. For p = 1 this is 2 cos x.
#[derive(Debug, Clone, Copy)]
pub struct SphereTransform {
    p: usize,
    nu: f64,
    limit: f64,
    prefactor: f64,
}

impl SphereTransform {
    pub fn new(p: usize) -> Self {
        let nu = (p as f64 - 2.0) / 2.0;
        let prefactor = (2.0 * PI).powf(p as f64 / 2.0);
        let limit = prefactor / (2f64.powf(nu) * gamma(nu + 1.0));
        Self {
            p,
            nu,
            limit,
            prefactor,
        }
    }

    /// Value at x = 0, the total mass of the sphere.
    pub fn at_zero(&self) -> f64 {
        self.limit
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        match self.p {
            1 => 2.0 * x.cos(),
            3 => {
                if x < 1e-4 {
                    self.limit * (1.0 - x * x / 6.0)
                } else {
                    4.0 * PI * x.sin() / x
                }
            }
            _ => {
                if x < 1e-4 {
                    self.limit * (1.0 - x * x / (4.0 * (self.nu + 1.0)))
                } else {
                    self.prefactor * x.powf(-self.nu) * bessel_j_unchecked(self.nu, x)
                }
            }
        }
    }
}
