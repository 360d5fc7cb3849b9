//! Dispersion multipliers φ with analytic derivatives and their
//! (m₁, m₂, α₁, α₂) growth parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SymbolKind {
    /// φ(r) = r^α
    Fractional { alpha: f64 },
    /// φ(r) = r² + r
    FourthOrder,
    /// φ(r) = √(1 + r²)
    Beam,
    /// φ(r) = √(1 + r)
    KleinGordon,
    /// φ(r) = √r
    Wave,
    /// φ(r) = r
    Schrodinger,
}

/// Growth parameters: φ' ~ r^{m-1} and φ'' ~ r^{α-2} at high (index 1) and
/// low (index 2) frequency. α is absent when φ'' vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolParams {
    pub m1: f64,
    pub m2: f64,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSymbol {
    pub kind: SymbolKind,
}

impl PhaseSymbol {
    pub fn new(kind: SymbolKind) -> Result<Self> {
        if let SymbolKind::Fractional { alpha } = kind {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(Error::Invalid(format!(
                    "fractional order must be positive, got {alpha}"
                )));
            }
        }
        Ok(Self { kind })
    }

    pub fn fractional(alpha: f64) -> Result<Self> {
        Self::new(SymbolKind::Fractional { alpha })
    }

    pub fn name(&self) -> String {
        match self.kind {
            SymbolKind::Fractional { alpha } => format!("fractional:{alpha}"),
            SymbolKind::FourthOrder => "fourth_order".into(),
            SymbolKind::Beam => "beam".into(),
            SymbolKind::KleinGordon => "klein_gordon".into(),
            SymbolKind::Wave => "wave".into(),
            SymbolKind::Schrodinger => "schrodinger".into(),
        }
    }

    /// Non-fatal remarks about the parameter choice.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if let SymbolKind::Fractional { alpha } = self.kind {
            if alpha >= 2.0 || alpha == 1.0 {
                w.push(format!(
                    "fractional order {alpha} lies outside (0,2) minus {{1}}"
                ));
            }
        }
        if let SymbolKind::Beam = self.kind {
            w.push("beam has alpha1 = -1, which is not positive".into());
        }
        w
    }

    /// Homogeneity degree when φ(λr) = λ^a φ(r).
    pub fn homogeneity(&self) -> Option<f64> {
        match self.kind {
            SymbolKind::Fractional { alpha } => Some(alpha),
            SymbolKind::Wave => Some(0.5),
            SymbolKind::Schrodinger => Some(1.0),
            _ => None,
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self.kind {
            SymbolKind::Fractional { alpha } => r.powf(alpha),
            SymbolKind::FourthOrder => r * r + r,
            SymbolKind::Beam => (1.0 + r * r).sqrt(),
            SymbolKind::KleinGordon => (1.0 + r).sqrt(),
            SymbolKind::Wave => r.sqrt(),
            SymbolKind::Schrodinger => r,
        }
    }

    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        match self.kind {
            SymbolKind::Fractional { alpha } => alpha * r.powf(alpha - 1.0),
            SymbolKind::FourthOrder => 2.0 * r + 1.0,
            SymbolKind::Beam => r / (1.0 + r * r).sqrt(),
            SymbolKind::KleinGordon => 0.5 / (1.0 + r).sqrt(),
            SymbolKind::Wave => 0.5 / r.sqrt(),
            SymbolKind::Schrodinger => 1.0,
        }
    }

    #[inline]
    pub fn d2(&self, r: f64) -> f64 {
        match self.kind {
            SymbolKind::Fractional { alpha } => alpha * (alpha - 1.0) * r.powf(alpha - 2.0),
            SymbolKind::FourthOrder => 2.0,
            SymbolKind::Beam => (1.0 + r * r).powf(-1.5),
            SymbolKind::KleinGordon => -0.25 * (1.0 + r).powf(-1.5),
            SymbolKind::Wave => -0.25 * r.powf(-1.5),
            SymbolKind::Schrodinger => 0.0,
        }
    }

    pub fn params(&self) -> SymbolParams {
        match self.kind {
            SymbolKind::Fractional { alpha } => SymbolParams {
                m1: alpha,
                m2: alpha,
                alpha1: Some(alpha),
                alpha2: Some(alpha),
            },
            SymbolKind::Wave => SymbolParams {
                m1: 0.5,
                m2: 0.5,
                alpha1: Some(0.5),
                alpha2: Some(0.5),
            },
            SymbolKind::FourthOrder => SymbolParams {
                m1: 2.0,
                m2: 1.0,
                alpha1: Some(2.0),
                alpha2: Some(2.0),
            },
            SymbolKind::Beam => SymbolParams {
                m1: 1.0,
                m2: 2.0,
                alpha1: Some(-1.0),
                alpha2: Some(2.0),
            },
            SymbolKind::KleinGordon => SymbolParams {
                m1: 0.5,
                m2: 1.0,
                alpha1: Some(0.5),
                alpha2: Some(2.0),
            },
            SymbolKind::Schrodinger => SymbolParams {
                m1: 1.0,
                m2: 1.0,
                alpha1: None,
                alpha2: None,
            },
        }
    }
}

impl fmt::Display for PhaseSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for PhaseSymbol {
    type Err = Error;

    /// Accepts `fractional:0.5`, `fractional(0.5)`, `fourth_order`, `beam`,
    /// `klein_gordon`, `wave`, `schrodinger`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("fractional") {
            let arg = rest
                .trim_start_matches([':', '(', '='])
                .trim_end_matches(')');
            let alpha: f64 = arg
                .parse()
                .map_err(|_| Error::Invalid(format!("bad fractional order in {s:?}")))?;
            return Self::fractional(alpha);
        }
        let kind = match lower.as_str() {
            "fourth_order" | "fourth-order" => SymbolKind::FourthOrder,
            "beam" => SymbolKind::Beam,
            "klein_gordon" | "klein-gordon" => SymbolKind::KleinGordon,
            "wave" => SymbolKind::Wave,
            "schrodinger" => SymbolKind::Schrodinger,
            _ => return Err(Error::Invalid(format!("unknown symbol {s:?}"))),
        };
        Self::new(kind)
    }
}

/// Look up a built-in symbol by name.
pub fn builtin_symbol(name: &str) -> Result<PhaseSymbol> {
    name.parse()
}

/// One two-sided ratio check over a frequency regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    /// "H1".."H4", or "H1-upper"/"H2-upper" for the φ'' upper bound.
    pub hypothesis: String,
    /// "high" (r ≥ 1) or "low" (r < 1)
    pub regime: String,
    pub exponent: Option<f64>,
    pub inf_ratio: f64,
    pub sup_ratio: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub symbol: String,
    pub checks: Vec<RatioCheck>,
    pub pass: bool,
}

/// Ratio bounds for the ~ and ≲ relations.
pub const RATIO_LOWER: f64 = 1.0 / 50.0;
pub const RATIO_UPPER: f64 = 50.0;

fn ratio_check(
    hypothesis: &str,
    regime: &str,
    exponent: Option<f64>,
    rs: &[f64],
    f: impl Fn(f64) -> f64,
    shift: f64,
    two_sided: bool,
) -> RatioCheck {
    let mut inf = f64::INFINITY;
    let mut sup: f64 = 0.0;
    let Some(e) = exponent else {
        return RatioCheck {
            hypothesis: hypothesis.into(),
            regime: regime.into(),
            exponent,
            inf_ratio: f64::NAN,
            sup_ratio: f64::NAN,
            samples: 0,
            pass: false,
        };
    };
    for &r in rs {
        let v = f(r).abs() / r.powf(e - shift);
        inf = inf.min(v);
        sup = sup.max(v);
    }
    let pass = rs.is_empty()
        || (sup.is_finite() && sup <= RATIO_UPPER && (!two_sided || inf >= RATIO_LOWER));
    RatioCheck {
        hypothesis: hypothesis.into(),
        regime: regime.into(),
        exponent,
        inf_ratio: if rs.is_empty() { f64::NAN } else { inf },
        sup_ratio: if rs.is_empty() { f64::NAN } else { sup },
        samples: rs.len(),
        pass,
    }
}

/// Check (H1)-(H4) as two-sided ratio bounds on the grid. Points with r ≥ 1
/// form the high regime, points in (0, 1) the low regime. Hypotheses whose
/// exponent is absent are reported as failing and excluded from `pass`.
pub fn verify_hypotheses(sym: &PhaseSymbol, r_grid: &[f64]) -> HypothesisReport {
    let prm = sym.params();
    let high: Vec<f64> = r_grid.iter().copied().filter(|&r| r >= 1.0).collect();
    let low: Vec<f64> = r_grid
        .iter()
        .copied()
        .filter(|&r| r > 0.0 && r < 1.0)
        .collect();
    let d1 = |r| sym.d1(r);
    let d2 = |r| sym.d2(r);
    let checks = vec![
        ratio_check("H1", "high", Some(prm.m1), &high, d1, 1.0, true),
        ratio_check("H1-upper", "high", Some(prm.m1), &high, d2, 2.0, false),
        ratio_check("H2", "low", Some(prm.m2), &low, d1, 1.0, true),
        ratio_check("H2-upper", "low", Some(prm.m2), &low, d2, 2.0, false),
        ratio_check("H3", "high", prm.alpha1, &high, d2, 2.0, true),
        ratio_check("H4", "low", prm.alpha2, &low, d2, 2.0, true),
    ];
    let pass = checks
        .iter()
        .filter(|c| c.exponent.is_some())
        .all(|c| c.pass);
    HypothesisReport {
        symbol: sym.name(),
        checks,
        pass,
    }
}

/// Log-spaced grid on [1e-3, 1e3].
pub fn default_hypothesis_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (points - 1).max(1) as f64))
        .collect()
}
