//! H-type groups as matrix data: Clifford generators, the group law and
//! dilations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the exact-algebra checks on generator matrices.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// An H-type group on R^{2d} x R^p, described by its p generator matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HTypeGroup {
    d: usize,
    p: usize,
    generators: Vec<DMatrix<f64>>,
}

/// A point (z, s) of the group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub z: DVector<f64>,
    pub s: DVector<f64>,
}

impl GroupElement {
    pub fn new(z: Vec<f64>, s: Vec<f64>) -> Self {
        Self {
            z: DVector::from_vec(z),
            s: DVector::from_vec(s),
        }
    }

    pub fn identity(d: usize, p: usize) -> Self {
        Self {
            z: DVector::zeros(2 * d),
            s: DVector::zeros(p),
        }
    }

    /// Inverse element. Skewness gives [z, z] = 0, so (z, s)^{-1} = (-z, -s).
    pub fn inverse(&self) -> Self {
        Self {
            z: -&self.z,
            s: -&self.s,
        }
    }
}

/// Maximum violation of each generator invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub d: usize,
    pub p: usize,
    pub skew_violation: f64,
    pub orthogonality_violation: f64,
    pub anticommutation_violation: f64,
    pub dimension_ok: bool,
    pub pass: bool,
}

/// Serialized form of a group: generators as row-major flat arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub d: usize,
    pub p: usize,
    pub generators: Vec<Vec<f64>>,
}

/// Quaternion left-multiplication by i, j, k on R^4 = H.
fn quaternion_units() -> [DMatrix<f64>; 3] {
    let li = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, -1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    );
    let lj = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, -1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, -1.0, 0.0, 0.0,
        ],
    );
    let lk = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, -1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0,
        ],
    );
    [li, lj, lk]
}

/// Generator matrices for center dimension p with the minimal d.
/// p = 1 gives the Heisenberg group; p = 2, 3 use quaternion units.
pub fn clifford_generators(p: usize) -> Result<(Vec<DMatrix<f64>>, usize)> {
    match p {
        1 => Ok((
            vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])],
            1,
        )),
        2 | 3 => {
            let q = quaternion_units();
            Ok((q[..p].to_vec(), 2))
        }
        0 => Err(Error::Invalid("center dimension p must be positive".into())),
        _ => Err(Error::NotImplemented(format!(
            "Clifford generators for p = {p} (only p <= 3 are built in)"
        ))),
    }
}

/// Repeat each generator block-diagonally `copies` times, giving d' = copies * d.
fn block_diagonal(gens: &[DMatrix<f64>], copies: usize) -> Vec<DMatrix<f64>> {
    gens.iter()
        .map(|u| {
            let n = u.nrows();
            let mut out = DMatrix::zeros(n * copies, n * copies);
            for c in 0..copies {
                out.view_mut((c * n, c * n), (n, n)).copy_from(u);
            }
            out
        })
        .collect()
}

impl HTypeGroup {
    /// Group with center dimension p and minimal d.
    pub fn builtin(p: usize) -> Result<Self> {
        let (generators, d) = clifford_generators(p)?;
        Ok(Self { d, p, generators })
    }

    /// Group with center dimension p and a given d, built from block-diagonal
    /// copies of the minimal generators. d must be a multiple of the minimal d.
    pub fn with_d(p: usize, d: usize) -> Result<Self> {
        let (gens, d0) = clifford_generators(p)?;
        if d == 0 || !d.is_multiple_of(d0) {
            return Err(Error::NotImplemented(format!(
                "p = {p} with d = {d} (d must be a multiple of {d0})"
            )));
        }
        Ok(Self {
            d,
            p,
            generators: block_diagonal(&gens, d / d0),
        })
    }

    /// Group from arbitrary generators. Only shapes are checked here; call
    /// [`HTypeGroup::validate`] for the algebraic conditions.
    pub fn from_generators(d: usize, generators: Vec<DMatrix<f64>>) -> Result<Self> {
        if d == 0 || generators.is_empty() {
            return Err(Error::Invalid(
                "need d >= 1 and at least one generator".into(),
            ));
        }
        for u in &generators {
            if u.nrows() != 2 * d || u.ncols() != 2 * d {
                return Err(Error::DimensionMismatch {
                    expected: 2 * d,
                    got: u.nrows().max(u.ncols()),
                });
            }
        }
        Ok(Self {
            d,
            p: generators.len(),
            generators,
        })
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Self> {
        if spec.generators.len() != spec.p {
            return Err(Error::DimensionMismatch {
                expected: spec.p,
                got: spec.generators.len(),
            });
        }
        let n = 2 * spec.d;
        let gens = spec
            .generators
            .iter()
            .map(|g| {
                if g.len() != n * n {
                    Err(Error::DimensionMismatch {
                        expected: n * n,
                        got: g.len(),
                    })
                } else {
                    Ok(DMatrix::from_row_slice(n, n, g))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(spec.d, gens)
    }

    pub fn to_spec(&self) -> GroupSpec {
        GroupSpec {
            d: self.d,
            p: self.p,
            generators: self
                .generators
                .iter()
                .map(|u| u.transpose().iter().copied().collect())
                .collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Homogeneous dimension N = 2d + 2p.
    pub fn homogeneous_dim(&self) -> usize {
        2 * self.d + 2 * self.p
    }

    /// Topological dimension n = 2d + p.
    pub fn topological_dim(&self) -> usize {
        2 * self.d + self.p
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    fn check(&self, a: &GroupElement) -> Result<()> {
        if a.z.len() != 2 * self.d {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.d,
                got: a.z.len(),
            });
        }
        if a.s.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: a.s.len(),
            });
        }
        Ok(())
    }

    /// The bracket [z, z']_j = z^T U^j z'.
    pub fn bracket(&self, z: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        if z.len() != 2 * self.d || w.len() != 2 * self.d {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.d,
                got: if z.len() != 2 * self.d {
                    z.len()
                } else {
                    w.len()
                },
            });
        }
        Ok(DVector::from_iterator(
            self.p,
            self.generators.iter().map(|u| z.dot(&(u * w))),
        ))
    }

    /// Group law (z, s)(z', s') = (z + z', s + s' + [z, z'] / 2).
    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        let br = self.bracket(&a.z, &b.z)?;
        Ok(GroupElement {
            z: &a.z + &b.z,
            s: &a.s + &b.s + br * 0.5,
        })
    }

    /// Dilation (z, s) -> (r z, r^2 s).
    pub fn dilate(&self, r: f64, a: &GroupElement) -> Result<GroupElement> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "dilation factor must be positive, got {r}"
            )));
        }
        self.check(a)?;
        Ok(GroupElement {
            z: &a.z * r,
            s: &a.s * (r * r),
        })
    }

    /// Max violation of skewness, orthogonality and anticommutation.
    pub fn validate(&self) -> ValidationReport {
        let n = 2 * self.d;
        let id = DMatrix::<f64>::identity(n, n);
        let mut skew: f64 = 0.0;
        let mut orth: f64 = 0.0;
        let mut anti: f64 = 0.0;
        for (i, u) in self.generators.iter().enumerate() {
            skew = skew.max((u.transpose() + u).amax());
            orth = orth.max((u.transpose() * u - &id).amax());
            for v in &self.generators[i + 1..] {
                anti = anti.max((u * v + v * u).amax());
            }
        }
        let dimension_ok = self.p < 2 * self.d;
        ValidationReport {
            d: self.d,
            p: self.p,
            skew_violation: skew,
            orthogonality_violation: orth,
            anticommutation_violation: anti,
            dimension_ok,
            pass: dimension_ok && skew <= ALGEBRA_TOL && orth <= ALGEBRA_TOL && anti <= ALGEBRA_TOL,
        }
    }
}

/// Parse a group reference: `builtin:pN` or `builtin:pN:dM`.
pub fn parse_builtin(name: &str) -> Result<HTypeGroup> {
    let rest = name
        .strip_prefix("builtin:")
        .ok_or_else(|| Error::Invalid(format!("not a builtin group reference: {name}")))?;
    let mut parts = rest.split(':');
    let p = parts
        .next()
        .and_then(|s| s.strip_prefix('p'))
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Error::Invalid(format!("bad builtin group: {name}")))?;
    match parts.next() {
        None => HTypeGroup::builtin(p),
        Some(dpart) => {
            let d = dpart
                .strip_prefix('d')
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| Error::Invalid(format!("bad builtin group: {name}")))?;
            HTypeGroup::with_d(p, d)
        }
    }
}
