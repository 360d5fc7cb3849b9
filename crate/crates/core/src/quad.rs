//! Quadrature and summation primitives shared by the kernel and analysis
//! layers: Gauss-Legendre rules, adaptive Gauss-Kronrod (10/21) for
//! complex-valued integrands, and the Hurwitz zeta function used to sum
//! power-law series tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule: `panels` equal panels on [a, b] with an
/// `order`-point rule on each. Returns (nodes, weights).
pub fn composite_gauss_legendre(
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let c = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

#[allow(clippy::excessive_precision)]
const XGK21: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK21: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208067946091,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[allow(clippy::excessive_precision)]
const WG10: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK21[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut vals = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    let mut res_abs = fc.norm() * WGK21[10];
    for j in 0..10 {
        let dx = h * XGK21[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        vals[j] = (f1, f2);
        kron += (f1 + f2) * WGK21[j];
        res_abs += (f1.norm() + f2.norm()) * WGK21[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG10[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut res_asc = WGK21[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK21[j] * ((vals[j].0 - mean).norm() + (vals[j].1 - mean).norm());
    }
    let ah = h.abs();
    let mut err = ((kron - gauss) * h).norm();
    let res_asc = res_asc * ah;
    let res_abs = res_abs * ah;
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        a,
        b,
        value: kron * h,
        abs_value: res_abs,
        error: err,
    }
}

/// Outcome of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    /// Estimated absolute error.
    pub error: f64,
    /// Estimate of the integral of |f|.
    pub abs_integral: f64,
    pub panels: usize,
    pub evaluations: usize,
}

/// Tolerances for [`integrate`]: the estimated error must fall below
/// `max(abs, rel * ∫|f|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-10,
            max_panels: 200_000,
        }
    }
}

/// Adaptive Gauss-Kronrod 10/21 quadrature of a complex integrand over
/// [a, b], starting from `initial_panels` equal panels. The panel with the
/// largest error estimate is bisected until the tolerance is met.
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: QuadTolerance,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            abs_integral: 0.0,
            panels: 0,
            evaluations: 0,
        });
    }
    let n0 = initial_panels.max(1);
    let h = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(2 * n0);
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut abs_integral = 0.0;
    for k in 0..n0 {
        let lo = a + k as f64 * h;
        let hi = if k + 1 == n0 { b } else { lo + h };
        let p = gk21(&mut f, lo, hi);
        value += p.value;
        error += p.error;
        abs_integral += p.abs_value;
        heap.push(p);
    }
    let mut evaluations = 21 * n0;
    loop {
        let target = tol.abs.max(tol.rel * abs_integral);
        if error <= target {
            break;
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::QuadratureNonConvergence {
                subdivisions: heap.len(),
                estimate: format!("{value}"),
                error,
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in floating point; accept it.
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            error -= worst.error;
            continue;
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs_integral += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
    }
    // Recompute the sums to shed accumulated cancellation from the updates.
    let mut v = Complex64::new(0.0, 0.0);
    let mut e = 0.0;
    let mut ai = 0.0;
    for p in heap.iter() {
        v += p.value;
        e += p.error;
        ai += p.abs_value;
    }
    Ok(QuadResult {
        value: v,
        error: e,
        abs_integral: ai,
        panels: heap.len(),
        evaluations,
    })
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(
    mut f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: QuadTolerance,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate(|x| Complex64::new(f(x), 0.0), a, b, initial_panels, tol)?;
    Ok((r.value.re, r.error))
}

/// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Hurwitz zeta function ζ(s, a) = Σ_{k≥0} (k + a)^{-s} for s > 1, a > 0,
/// by Euler-Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta requires s > 1 and a > 0");
    let n = 12usize;
    let mut sum = 0.0;
    for k in 0..n {
        sum += (a + k as f64).powf(-s);
    }
    let x = a + n as f64;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Rising factorial s (s+1) ... (s+2j-2) / (2j)!
    let mut fact = s / 2.0;
    let mut xp = x.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b * fact * xp;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let jj = (j + 1) as f64;
        // advance to j+1: multiply by (s+2j-1)(s+2j)/((2j+1)(2j+2))
        fact *= (s + 2.0 * jj - 1.0) * (s + 2.0 * jj) / ((2.0 * jj + 1.0) * (2.0 * jj + 2.0));
        xp /= x * x;
    }
    sum
}

/// Σ_{m > m0} (2m + d)^{-q}, the tail of the series used to bound Laguerre
/// index sums.
pub fn odd_power_tail(q: f64, m0: usize, d: f64) -> f64 {
    2f64.powf(-q) * hurwitz_zeta(q, m0 as f64 + 1.0 + 0.5 * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        // ∫_{-1}^{1} x^30 dx = 2/31
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(30)).sum();
        assert_relative_eq!(s, 2.0 / 31.0, max_relative = 1e-13);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        // ∫_0^{10} e^{i 50 x} dx = (e^{500 i} - 1) / (50 i)
        let r = integrate(
            |x| Complex64::new(0.0, 50.0 * x).exp(),
            0.0,
            10.0,
            4,
            QuadTolerance::default(),
        )
        .unwrap();
        let exact = (Complex64::new(0.0, 500.0).exp() - 1.0) / Complex64::new(0.0, 50.0);
        assert!((r.value - exact).norm() < 1e-12);
        assert!(r.error < 1e-9);
    }

    #[test]
    fn adaptive_reports_nonconvergence() {
        let tol = QuadTolerance {
            abs: 0.0,
            rel: 1e-15,
            max_panels: 4,
        };
        let r = integrate(
            |x| Complex64::new(x.sqrt().sin() / x.sqrt(), 0.0),
            1e-12,
            1.0,
            1,
            tol,
        );
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn hurwitz_matches_riemann_zeta() {
        // ζ(2) = π²/6, ζ(4) = π⁴/90
        assert_relative_eq!(
            hurwitz_zeta(2.0, 1.0),
            std::f64::consts::PI.powi(2) / 6.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            hurwitz_zeta(4.0, 1.0),
            std::f64::consts::PI.powi(4) / 90.0,
            max_relative = 1e-14
        );
        // ζ(2, 1/2) = 3ζ(2) = π²/2
        assert_relative_eq!(
            hurwitz_zeta(2.0, 0.5),
            std::f64::consts::PI.powi(2) / 2.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn odd_power_tail_matches_direct_sum() {
        let direct: f64 = (6..200_000)
            .map(|m| (2.0 * m as f64 + 3.0).powf(-3.25))
            .sum::<f64>()
            + 2f64.powf(-3.25) * hurwitz_zeta(3.25, 200_000.0 + 1.5);
        assert_relative_eq!(odd_power_tail(3.25, 5, 3.0), direct, max_relative = 1e-12);
    }
}
