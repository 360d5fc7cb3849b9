//! Littlewood-Paley frame: the bump Ψ, the annular bump R(τ) = Ψ(τ) - Ψ(4τ)
//! and its dyadic rescalings.

use serde::{Deserialize, Serialize};

/// e^{-1/x} for x > 0, else 0.
#[inline]
fn glue(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// The frame with its active range of dyadic scales. Ψ ≡ 1 on [0, 2] and
/// Ψ ≡ 0 on [4, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpFrame {
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for LpFrame {
    fn default() -> Self {
        Self {
            j_min: -10,
            j_max: 10,
        }
    }
}

/// Lower and upper edges of supp R.
pub const R_SUPPORT: (f64, f64) = (0.5, 4.0);
/// Support of Ψ is [0, 4].
pub const PSI_SUPPORT_END: f64 = 4.0;

pub fn build_frame() -> LpFrame {
    LpFrame::default()
}

impl LpFrame {
    /// Ψ(τ) = g(4-τ) / (g(4-τ) + g(τ-2)), g(x) = e^{-1/x}.
    #[inline]
    pub fn psi(&self, tau: f64) -> f64 {
        psi(tau)
    }

    /// R(τ) = Ψ(τ) - Ψ(4τ).
    #[inline]
    pub fn r(&self, tau: f64) -> f64 {
        annular(tau)
    }

    /// R((2m+d) |λ| 4^{-j}), the symbol of the j-th projector at Laguerre
    /// index m.
    pub fn dyadic_multiplier(&self, j: i32, m: usize, d: usize, lambda_norm: f64) -> f64 {
        annular((2 * m + d) as f64 * lambda_norm * 4f64.powi(-j))
    }

    /// Σ_j R(4^{-j} τ) over the active scales.
    pub fn partition_sum(&self, tau: f64) -> f64 {
        (self.j_min..=self.j_max)
            .map(|j| annular(tau * 4f64.powi(-j)))
            .sum()
    }
}

#[inline]
pub fn psi(tau: f64) -> f64 {
    if tau <= 2.0 {
        return 1.0;
    }
    if tau >= 4.0 {
        return 0.0;
    }
    let a = glue(4.0 - tau);
    let b = glue(tau - 2.0);
    a / (a + b)
}

#[inline]
pub fn annular(tau: f64) -> f64 {
    psi(tau) - psi(4.0 * tau)
}

/// Summary of the frame identity checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    /// max |Σ_j R(4^{-j}τ) - 1| over the tested octaves
    pub partition_residual: f64,
    /// max |Ψ(τ) + Σ_{j=1}^{J} R(4^{-j}τ) - 1| on [0, 2^{2J+1}]
    pub lowpass_residual: f64,
    /// max R outside [1/2, 4]
    pub support_violation: f64,
    /// min R and max R - 1 (range violations)
    pub range_violation: f64,
    /// largest increase of Ψ between consecutive grid points
    pub monotonicity_violation: f64,
    /// max |FD derivative| of orders 1..4 of Ψ on [2, 4]; order k must stay
    /// below 10^k
    pub max_derivatives: [f64; 4],
    pub pass: bool,
}

/// Grid checks of partition of unity (τ over 2^{-30}..2^{30}), support,
/// range, monotonicity and derivative size.
pub fn check_frame(frame: &LpFrame) -> FrameReport {
    let wide = LpFrame {
        j_min: -20,
        j_max: 20,
    };
    let n = 20_001;
    let mut partition: f64 = 0.0;
    for i in 0..n {
        let e = -30.0 + 60.0 * i as f64 / (n - 1) as f64;
        let tau = 2f64.powf(e);
        partition = partition.max((wide.partition_sum(tau) - 1.0).abs());
    }
    let jj = 10;
    let mut lowpass: f64 = 0.0;
    let top = 2f64.powi(2 * jj + 1);
    for i in 0..n {
        let tau = top * i as f64 / (n - 1) as f64;
        let s: f64 = psi(tau) + (1..=jj).map(|j| annular(tau * 4f64.powi(-j))).sum::<f64>();
        lowpass = lowpass.max((s - 1.0).abs());
    }
    let mut support: f64 = 0.0;
    let mut range: f64 = 0.0;
    for i in 0..n {
        let tau = 8.0 * i as f64 / (n - 1) as f64;
        let r = annular(tau);
        if !(R_SUPPORT.0..=R_SUPPORT.1).contains(&tau) {
            support = support.max(r.abs());
        }
        range = range.max(-r).max(r - 1.0);
    }
    let mut mono: f64 = 0.0;
    let mut prev = psi(0.0);
    for i in 1..1001 {
        let tau = 5.0 * i as f64 / 1000.0;
        let v = psi(tau);
        mono = mono.max(v - prev);
        prev = v;
    }
    let h = 1e-2;
    let mut ders = [0.0f64; 4];
    for i in 0..=200 {
        let x = 2.0 + 2.0 * i as f64 / 200.0;
        let f = |k: f64| psi(x + k * h);
        let d1 = (f(1.0) - f(-1.0)) / (2.0 * h);
        let d2 = (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (h * h);
        let d3 = (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h.powi(3));
        let d4 = (f(2.0) - 4.0 * f(1.0) + 6.0 * f(0.0) - 4.0 * f(-1.0) + f(-2.0)) / h.powi(4);
        for (slot, v) in ders.iter_mut().zip([d1, d2, d3, d4]) {
            *slot = slot.max(v.abs());
        }
    }
    let _ = frame;
    let pass = partition <= 1e-12
        && lowpass <= 1e-12
        && support == 0.0
        && range <= 1e-15
        && mono <= 0.0
        && ders
            .iter()
            .enumerate()
            .all(|(k, &d)| d < 10f64.powi(k as i32 + 1));
    FrameReport {
        partition_residual: partition,
        lowpass_residual: lowpass,
        support_violation: support,
        range_violation: range,
        monotonicity_violation: mono,
        max_derivatives: ders,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn psi_examples() {
        assert_eq!(psi(1.0), 1.0);
        assert_eq!(psi(5.0), 0.0);
        let v = psi(3.0);
        assert!(v > 0.0 && v < 1.0);
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(annular(1.0), 1.0);
    }

    #[test]
    fn dyadic_examples() {
        let f = build_frame();
        assert_eq!(f.dyadic_multiplier(0, 0, 1, 1.0), 1.0);
        assert_eq!(f.dyadic_multiplier(0, 3, 2, 1.0), 0.0);
        assert_eq!(f.dyadic_multiplier(2, 0, 1, 70.0), 0.0);
    }

    #[test]
    fn frame_report_passes() {
        let r = check_frame(&build_frame());
        assert!(r.pass, "{r:?}");
    }

    proptest! {
        #[test]
        fn partition_over_m_and_lambda(m in 0usize..50, d in 1usize..4, e in -30.0..30.0f64) {
            let f = LpFrame { j_min: -20, j_max: 20 };
            let lam = 2f64.powf(e) / (2 * m + d) as f64;
            let s: f64 = (-20..=20).map(|j| f.dyadic_multiplier(j, m, d, lam)).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
            let active = (-20..=20).filter(|&j| f.dyadic_multiplier(j, m, d, lam) != 0.0).count();
            prop_assert!(active <= 2);
        }

        #[test]
        fn telescoping_lowpass(tau in 0.0..100.0f64, k in 1i32..8) {
            // Ψ(τ) = Σ_{j=-k+1}^{0} R(4^{-j}τ) + Ψ(4^k τ)
            let s: f64 = (-k + 1..=0).map(|j| annular(tau * 4f64.powi(-j))).sum::<f64>() + psi(tau * 4f64.powi(k));
            prop_assert!((s - psi(tau)).abs() <= 1e-14);
        }
    }
}
