//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach stdout.

use htype_core::analysis::{
    fit_decay, geometric_grid, sharpness_profile, stationary_phase_leading, sup_norm_scan_with,
    theta_theory, Phase, ScanConfig,
};
use htype_core::frame::{annular, build_frame, check_frame, R_SUPPORT};
use htype_core::group::{GroupElement, HTypeGroup};
use htype_core::kernel::{brute_force_oracle, KernelConfig, KernelEvaluator, OracleConfig, Scale};
use htype_core::special::{bessel_j, check_bessel_properties, check_laguerre_bound, laguerre_poly};
use htype_core::symbols::PhaseSymbol;
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// 1 ---------------------------------------------------------------------------

fn group_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_inv: f64 = 0.0;
    let mut worst_assoc: f64 = 0.0;
    let mut ok = true;
    for p in 1..=3 {
        let g = HTypeGroup::builtin(p).unwrap();
        let r = g.validate();
        ok &= r.pass;
        worst_inv = worst_inv
            .max(r.skew_violation)
            .max(r.orthogonality_violation)
            .max(r.anticommutation_violation);
        let d = g.d();
        let mut elem = || {
            GroupElement::new(
                (0..2 * d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
        };
        for _ in 0..1000 {
            let (a, b, c) = (elem(), elem(), elem());
            let left = g.multiply(&g.multiply(&a, &b).unwrap(), &c).unwrap();
            let right = g.multiply(&a, &g.multiply(&b, &c).unwrap()).unwrap();
            worst_assoc = worst_assoc
                .max((&left.z - &right.z).amax())
                .max((&left.s - &right.s).amax());
        }
    }
    ok &= worst_inv <= 1e-12 && worst_assoc <= 1e-12;
    outcome(
        ok,
        format!(
            "max invariant violation {worst_inv:.1e}, max associativity defect {worst_assoc:.1e}"
        ),
    )
}

// 2 ---------------------------------------------------------------------------

fn laguerre_exact(m: u64, gamma_: u64, tau: &BigRational) -> BigRational {
    let binom = |n: u64, k: u64| -> BigInt {
        let mut r = BigInt::one();
        for i in 0..k {
            r = r * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        r
    };
    let mut sum = BigRational::zero();
    let mut pow = BigRational::one();
    let mut fact = BigInt::one();
    for i in 0..=m {
        if i > 0 {
            pow *= tau;
            fact *= BigInt::from(i);
        }
        let term = BigRational::from_integer(binom(m + gamma_, m - i)) * &pow
            / BigRational::from_integer(fact.clone());
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

fn special_functions() -> Outcome {
    let mut lag: f64 = 0.0;
    for gamma_ in 0..3u64 {
        for m in 0..=20u64 {
            for (num, den) in [(1i64, 3i64), (7, 2), (13, 1), (50, 1), (3, 7)] {
                let tau = BigRational::new(BigInt::from(num), BigInt::from(den));
                let exact = laguerre_exact(m, gamma_, &tau).to_f64().unwrap();
                let got = laguerre_poly(m as usize, gamma_ as f64, num as f64 / den as f64);
                lag = lag.max((got - exact).abs() / exact.abs().max(1.0));
            }
        }
    }
    let closed: [(f64, fn(f64) -> f64); 3] = [
        (0.5, |x| (2.0 / (PI * x)).sqrt() * x.sin()),
        (1.5, |x| (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos())),
        (2.5, |x| {
            (2.0 / (PI * x)).sqrt() * ((3.0 / (x * x) - 1.0) * x.sin() - 3.0 * x.cos() / x)
        }),
    ];
    let mut bes: f64 = 0.0;
    for (nu, f) in closed {
        for x in geometric_grid(0.05, 200.0, 300) {
            let exact = f(x);
            let got = bessel_j(nu, x).unwrap();
            bes = bes.max((got - exact).abs() / exact.abs().max(1e-3));
        }
    }
    let grid = geometric_grid(1e-2, 1e3, 400);
    let mut deriv: f64 = 0.0;
    for nu in [0.0, 0.5, 1.0, 1.5] {
        deriv = deriv.max(
            check_bessel_properties(nu, &grid)
                .unwrap()
                .derivative_max_error,
        );
    }
    outcome(
        lag <= 1e-10 && bes <= 1e-10 && deriv <= 1e-8,
        format!("Laguerre rel err {lag:.1e}, half-integer Bessel rel err {bes:.1e}, derivative identity err {deriv:.1e}"),
    )
}

// 3 ---------------------------------------------------------------------------

fn laguerre_bound() -> Outcome {
    let tau: Vec<f64> = (0..=3000).map(|i| 0.1 * i as f64).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for d in 1..=3 {
        let r = check_laguerre_bound(d, 50, d, &tau).unwrap();
        ok &= r.pass;
        parts.push(format!("d={d}: tail/head {:.2}", r.tail_sup / r.head_sup));
    }
    outcome(ok, parts.join(", "))
}

// 4 ---------------------------------------------------------------------------

fn frame_identities() -> Outcome {
    let frame = build_frame();
    let report = check_frame(&frame);
    let mut support: f64 = 0.0;
    for i in 0..=80_000 {
        let tau = 8.0 * i as f64 / 80_000.0;
        if !(R_SUPPORT.0..=R_SUPPORT.1).contains(&tau) {
            support = support.max(annular(tau).abs());
        }
    }
    let mut series: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    let sym = PhaseSymbol::fractional(0.5).unwrap();
    let fixed = KernelConfig {
        m_max: Some(12),
        quad_rel: 1e-12,
        ..KernelConfig::default()
    };
    let ocfg = OracleConfig {
        panels_per_radian: 1.0,
        ..OracleConfig::default()
    };
    for p in 1..=3 {
        let g = HTypeGroup::builtin(p).unwrap();
        let d = g.d();
        let nn = g.homogeneous_dim() as i32;
        let ev = KernelEvaluator::new(&g, sym, KernelConfig::default());
        let ev_fixed = KernelEvaluator::new(&g, sym, fixed);
        for j in [-1i32, 1, 2] {
            let r = 2f64.powi(j);
            // Points fixed in dilated coordinates so every scale probes the
            // same part of the kernel.
            for (zeta, sigma) in [(0.0, 0.0), (0.3, 0.2), (0.7, 1.1)] {
                let (rz, rs) = (zeta / r, sigma / (r * r));
                let lhs = ev.eval(Scale::Band(j), 0.0, rz, rs).unwrap().value;
                let rhs = ev
                    .eval(Scale::Band(0), 0.0, r * rz, r * r * rs)
                    .unwrap()
                    .value
                    * 2f64.powi(nn * j);
                series = series.max((lhs - rhs).norm() / rhs.norm());
                let lhs_f = ev_fixed.eval(Scale::Band(j), 0.0, rz, rs).unwrap().value;
                let mut z = vec![0.0; 2 * d];
                z[0] = rz;
                let mut s = vec![0.0; p];
                s[p - 1] = rs;
                let zr: Vec<f64> = z.iter().map(|x| x * r).collect();
                let sr: Vec<f64> = s.iter().map(|x| x * r * r).collect();
                let a =
                    brute_force_oracle(&g, &sym, Scale::Band(j), 0.0, &z, &s, 12, &ocfg).unwrap();
                let b = brute_force_oracle(&g, &sym, Scale::Band(0), 0.0, &zr, &sr, 12, &ocfg)
                    .unwrap()
                    * 2f64.powi(nn * j);
                oracle = oracle
                    .max((a - b).norm() / b.norm())
                    .max((lhs_f - a).norm() / a.norm());
            }
        }
    }
    let ok = report.partition_residual <= 1e-12
        && support == 0.0
        && report.pass
        && series <= 1e-6
        && oracle <= 1e-6;
    outcome(
        ok,
        format!(
            "partition residual {:.1e}, support violation {support:.1e}, scaling via series {series:.1e}, via oracle {oracle:.1e}",
            report.partition_residual
        ),
    )
}

// 5 ---------------------------------------------------------------------------

fn oracle_equivalence() -> Outcome {
    let sym = PhaseSymbol::fractional(0.5).unwrap();
    let queries = [
        (Scale::Band(-1), 0.5, 0.3, 0.7),
        (Scale::Band(0), 1.0, 0.0, 1.5),
        (Scale::Band(0), 10.0, 0.8, 5.0),
        (Scale::Band(1), 3.0, 0.5, 2.0),
        (Scale::Band(1), 10.0, 1.2, 12.0),
        (Scale::Band(-1), 7.0, 2.0, 0.0),
    ];
    let m_max = 20;
    let ocfg = OracleConfig {
        panels_per_radian: 1.0,
        ..OracleConfig::default()
    };
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in 1..=3 {
        let g = HTypeGroup::builtin(p).unwrap();
        let d = g.d();
        let cfg = KernelConfig {
            m_max: Some(m_max),
            quad_rel: 1e-12,
            ..KernelConfig::default()
        };
        let ev = KernelEvaluator::new(&g, sym, cfg);
        for &(scale, t, rz, rs) in &queries {
            let a = ev.eval(scale, t, rz, rs).unwrap().value;
            let mut z = vec![0.0; 2 * d];
            z[0] = rz;
            let mut s = vec![0.0; p];
            s[p - 1] = rs;
            let b = brute_force_oracle(&g, &sym, scale, t, &z, &s, m_max, &ocfg).unwrap();
            worst = worst.max((a - b).norm() / b.norm());
            count += 1;
        }
    }
    outcome(
        worst <= 1e-6,
        format!("{count} queries, max rel diff {worst:.1e} at m_max = {m_max}"),
    )
}

// 6 ---------------------------------------------------------------------------

fn sharpness() -> Outcome {
    let g = HTypeGroup::builtin(3).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["fractional:0.5", "fourth_order", "beam", "klein_gordon"] {
        let sym: PhaseSymbol = name.parse().unwrap();
        match sharpness_profile(sym, &g, (1e2, 1e4), 17) {
            Ok(pr) => {
                let slope = pr.slope();
                let ratio = pr.leading_ratio();
                let good = (slope + 1.5).abs() <= 0.1
                    && (ratio - 1.0).abs() <= 0.05
                    && pr.lambda0_error() <= 1e-6
                    && pr.hessian_error() <= 1e-6;
                ok &= good;
                parts.push(format!(
                    "{name}: slope {slope:.3}, |u|/lead {ratio:.4}, H err {:.0e}",
                    pr.hessian_error()
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: error {e}"));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

// 7 ---------------------------------------------------------------------------

fn decay_bounds() -> Outcome {
    let g = HTypeGroup::builtin(3).unwrap();
    let frame = build_frame();
    let cfg = ScanConfig::default();
    let frac = PhaseSymbol::fractional(0.5).unwrap();
    let p = g.p() as f64;
    let nn = g.homogeneous_dim() as f64;
    let m1 = frac.params().m1;
    let ts = geometric_grid(10.0, 1e3, 5);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for j in 0..=2 {
        for &t in &ts {
            let sup = match sup_norm_scan_with(&g, frac, &frame, Scale::Band(j), t, &cfg) {
                Ok(r) => r.sup,
                Err(e) => return outcome(false, format!("scan failed at j={j}, t={t}: {e}")),
            };
            let q = t.powf(p / 2.0) * sup * 2f64.powf(-(j as f64) * (nn - m1 * p));
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    let band_ok = hi / lo <= 3.0;

    let fourth: PhaseSymbol = "fourth_order".parse().unwrap();
    let target = theta_theory(&fourth, &g, Scale::LowPass(0)).unwrap();
    let lts = geometric_grid(10.0, 1e3, 8);
    let mut sups = Vec::new();
    for &t in &lts {
        match sup_norm_scan_with(&g, fourth, &frame, Scale::LowPass(0), t, &cfg) {
            Ok(r) => sups.push(r.sup),
            Err(e) => return outcome(false, format!("low-pass scan failed at t={t}: {e}")),
        }
    }
    let fit = fit_decay(&lts, &sups, target, true).unwrap();
    let fit_ok = fit.theta_hat >= target - 0.15;
    outcome(
        band_ok && fit_ok,
        format!(
            "normalized band sup in [{lo:.4e}, {hi:.4e}] (ratio {:.2}); low-pass fourth_order theta_hat {:.3} vs target {target}",
            hi / lo,
            fit.theta_hat
        ),
    )
}

// 8 ---------------------------------------------------------------------------

struct Square;

impl Phase for Square {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x[0] * x[0]
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x * 2.0
    }
    fn hessian(&self, _: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 2.0)
    }
}

fn regression() -> Outcome {
    let t = geometric_grid(10.0, 1e4, 12);
    let mut fit_err: f64 = 0.0;
    for theta in [0.5, 1.0, 1.5, 2.5] {
        let v: Vec<f64> = t.iter().map(|x| 2.0 * x.powf(-theta)).collect();
        let fit = fit_decay(&t, &v, theta, true).unwrap();
        fit_err = fit_err.max((fit.theta_hat - theta).abs());
    }
    let mut ok = fit_err <= 1e-10;
    let mut worst_scaled: f64 = 0.0;
    for t in [10.0, 100.0, 1000.0, 1e4] {
        let lead = stationary_phase_leading(
            &Square,
            |x| Complex64::new((-x[0] * x[0]).exp(), 0.0),
            &DVector::zeros(1),
            t,
        )
        .unwrap();
        let exact = (Complex64::new(PI, 0.0) / Complex64::new(1.0, -t)).sqrt();
        let err = (lead.norm() - exact.norm()).abs() / exact.norm();
        ok &= err <= 2.0 / t;
        worst_scaled = worst_scaled.max(err * t);
    }
    outcome(ok, format!("fit exponent err {fit_err:.1e}, max t*err of Gaussian leading term {worst_scaled:.2e} (limit 2)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 8] = [
        ("group algebra", group_algebra, Some(Duration::from_secs(1))),
        (
            "special functions",
            special_functions,
            Some(Duration::from_secs(10)),
        ),
        (
            "Laguerre growth bound",
            laguerre_bound,
            Some(Duration::from_secs(30)),
        ),
        ("frame identities", frame_identities, None),
        (
            "oracle equivalence",
            oracle_equivalence,
            Some(Duration::from_secs(300)),
        ),
        (
            "sharpness profiles",
            sharpness,
            Some(Duration::from_secs(900)),
        ),
        (
            "decay bound consistency",
            decay_bounds,
            Some(Duration::from_secs(1200)),
        ),
        ("regression sanity", regression, None),
    ];
    let mut all = true;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = budget.map_or(true, |b| elapsed <= b);
        let pass = out.pass && in_time;
        all &= pass;
        let budget_note = budget.map_or(String::new(), |b| format!(" / budget {}s", b.as_secs()));
        println!(
            "criterion {} [{name}]: {} ({}; {:.2}s{budget_note})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if !all {
        std::process::exit(1);
    }
}
