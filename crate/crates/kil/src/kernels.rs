//! Finitely smooth radial kernels, their Gram matrices, and eigenvalue bounds.
//!
//! Three closed-form families are provided, each with a known Sobolev
//! smoothness index `τ` (stored as metadata; the shape parameter only rescales
//! distances and does not change `τ`):
//!
//! | family             | formula                           | τ in dimension d |
//! |--------------------|-----------------------------------|------------------|
//! | `wendland-hat`     | `max(1 - r/σ, 0)`                 | 1 (d = 1 only)   |
//! | `matern-half`      | `exp(-r/σ)`                       | (d+1)/2          |
//! | `matern-three-half`| `(1+√3·r/σ)·exp(-√3·r/σ)`         | (d+3)/2          |

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{distance, PointSet};

// ---------------------------------------------------------------------------
// kernel families
// ---------------------------------------------------------------------------

/// The supported strictly positive definite kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    WendlandHat,
    MaternHalf,
    MaternThreeHalf,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::WendlandHat => "wendland-hat",
            KernelFamily::MaternHalf => "matern-half",
            KernelFamily::MaternThreeHalf => "matern-three-half",
        }
    }
}

/// A radial kernel with its shape parameter, smoothness index, and dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub family: KernelFamily,
    /// Distance scale σ (defaults to 1).
    pub shape: f64,
    /// Sobolev smoothness index of the native space.
    pub tau: f64,
    /// Ambient dimension d.
    pub dim: usize,
}

impl Kernel {
    /// Construct a kernel, deriving `τ` from the family and dimension.
    pub fn new(family: KernelFamily, shape: f64, dim: usize) -> Result<Kernel> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::InvalidInput(format!("kernel shape must be positive, got {shape}")));
        }
        if dim == 0 {
            return Err(Error::InvalidInput("kernel dimension must be positive".into()));
        }
        let tau = match family {
            KernelFamily::WendlandHat => {
                if dim != 1 {
                    return Err(Error::InvalidInput(
                        "wendland-hat is positive definite only in dimension 1".into(),
                    ));
                }
                1.0
            }
            KernelFamily::MaternHalf => (dim as f64 + 1.0) / 2.0,
            KernelFamily::MaternThreeHalf => (dim as f64 + 3.0) / 2.0,
        };
        Ok(Kernel { family, shape, tau, dim })
    }

    /// Parse a kernel descriptor such as `wendland-hat:1.0` (the `:shape`
    /// suffix is optional and defaults to 1).
    pub fn parse(descriptor: &str, dim: usize) -> Result<Kernel> {
        let (name, shape) = match descriptor.split_once(':') {
            Some((n, s)) => {
                let shape = s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("kernel shape `{s}` is not a number"))
                })?;
                (n, shape)
            }
            None => (descriptor, 1.0),
        };
        let family = match name {
            "wendland-hat" => KernelFamily::WendlandHat,
            "matern-half" => KernelFamily::MaternHalf,
            "matern-three-half" => KernelFamily::MaternThreeHalf,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown kernel family `{other}` (expected wendland-hat, matern-half, or matern-three-half)"
                )))
            }
        };
        Kernel::new(family, shape, dim)
    }

    /// Canonical descriptor string.
    pub fn descriptor(&self) -> String {
        format!("{}:{}", self.family.name(), self.shape)
    }

    /// Evaluate `k(x, z)`.
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        let r = distance(x, z) / self.shape;
        match self.family {
            KernelFamily::WendlandHat => (1.0 - r).max(0.0),
            KernelFamily::MaternHalf => (-r).exp(),
            KernelFamily::MaternThreeHalf => {
                let t = 3f64.sqrt() * r;
                (1.0 + t) * (-t).exp()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Gram matrices
// ---------------------------------------------------------------------------

/// The kernel matrix `A[i][j] = k(x_i, x_j)` together with its centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    pub centers: PointSet,
}

/// Assemble the Gram matrix of a kernel on pairwise-distinct centers.
///
/// The upper triangle is computed and mirrored, so the result is exactly
/// symmetric. Coordinate-identical points are rejected.
pub fn gram(kernel: &Kernel, x: &PointSet) -> Result<GramMatrix> {
    if x.dim() != kernel.dim {
        return Err(Error::InvalidInput(format!(
            "point dimension {} does not match kernel dimension {}",
            x.dim(),
            kernel.dim
        )));
    }
    let n = x.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = kernel.eval(x.point(i), x.point(i));
        for j in (i + 1)..n {
            if distance(x.point(i), x.point(j)) == 0.0 {
                return Err(Error::DuplicateCenters { i, j });
            }
            let v = kernel.eval(x.point(i), x.point(j));
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(GramMatrix {
        entries: a,
        centers: x.clone(),
    })
}

/// Smallest eigenvalue of a Gram matrix via symmetric eigendecomposition.
pub fn min_eigenvalue(a: &GramMatrix) -> Result<f64> {
    if a.entries.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("Gram matrix has non-finite entries".into()));
    }
    let eig = a.entries.clone().symmetric_eigen();
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
