//! Piecewise densities assembled from scaled coefficients of shifted-grid
//! fits, their image under the kernel integral operator, and their L₂ norms.
//!
//! For a grid `Z_n` and a sub-resolution `N_b`, the density stores, for every
//! cell corner `z ∈ Z_n` and every offset `b` on the `N_b^d` sub-grid of
//! `[0, 2⁻ⁿ)^d`, the value `2^{n·d}·α` where `α` is the coefficient at center
//! `z+b` of the expansion fitted on the whole shifted set `Z_n + b`. The
//! field is zero outside the union of half-open cells `z + [0, 2⁻ⁿ)^d`;
//! between stored sub-samples it evaluates by nearest-sub-sample lookup, and
//! averaging the shifted expansions applies the integral operator to it
//! without any further discretization error.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{self, PointSet, Region};
use crate::interpolate::{self, ScalarField};
use crate::kernels::Kernel;

// ---------------------------------------------------------------------------
// density fields
// ---------------------------------------------------------------------------

/// A cell-and-offset table of scaled fit coefficients over `Z_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    kernel: Kernel,
    region: Region,
    level: u32,
    sub_resolution: usize,
    ridge: f64,
    /// Cell corners `Z_n` in lexicographic order.
    corners: PointSet,
    /// The `N_b^d` shift vectors, lexicographic over their index tuples.
    offsets: Vec<Vec<f64>>,
    /// `values[cell][offset] = 2^{n·d}·α` for the coefficient at `z+b`.
    values: Vec<Vec<f64>>,
}

/// Lexicographic comparison matching the ordering of grid corners.
fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// The `N_b^d` shift vectors `(2⁻ⁿ/N_b)·(i_1, …, i_d)`, `i_k ∈ {0, …, N_b−1}`,
/// in lexicographic order over the index tuples.
fn offset_grid(side: f64, n_b: usize, dim: usize) -> Vec<Vec<f64>> {
    let step = side / n_b as f64;
    let mut out = Vec::with_capacity(n_b.pow(dim as u32));
    let mut index = vec![0usize; dim];
    loop {
        out.push(index.iter().map(|&i| i as f64 * step).collect());
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            index[k] += 1;
            if index[k] < n_b {
                break;
            }
            index[k] = 0;
        }
    }
}

impl DensityField {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Grid level `n` of the underlying `Z_n`.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of offsets per coordinate direction.
    pub fn sub_resolution(&self) -> usize {
        self.sub_resolution
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// `"interpolation"` for plain fits, `"ridge"` when a regularizer was used.
    pub fn method(&self) -> &'static str {
        if self.ridge == 0.0 {
            "interpolation"
        } else {
            "ridge"
        }
    }

    /// Cell corners `Z_n` in lexicographic order.
    pub fn corners(&self) -> &PointSet {
        &self.corners
    }

    /// Shift vectors in lexicographic index order.
    pub fn offsets(&self) -> &[Vec<f64>] {
        &self.offsets
    }

    /// Stored value `2^{n·d}·α` at the given cell and offset indices.
    pub fn value(&self, cell: usize, offset: usize) -> f64 {
        self.values[cell][offset]
    }

    fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }
}

impl ScalarField for DensityField {
    /// Nearest-sub-sample lookup inside the half-open cell containing `x`;
    /// zero whenever no grid cell contains `x`.
    fn value(&self, x: &[f64]) -> f64 {
        let d = self.corners.dim();
        if x.len() != d {
            return 0.0;
        }
        let side = self.side();
        // Cell corner below x; exact because corners are integers times 2⁻ⁿ.
        let corner: Vec<f64> = x.iter().map(|&c| (c / side).floor() * side).collect();
        let cell = match self
            .corners
            .points()
            .binary_search_by(|p| lex_cmp(p, &corner))
        {
            Ok(i) => i,
            Err(_) => return 0.0,
        };
        let n_b = self.sub_resolution;
        let mut flat = 0usize;
        for k in 0..d {
            let t = (x[k] - corner[k]) / side;
            let i = ((t * n_b as f64).round() as usize).min(n_b - 1);
            flat = flat * n_b + i;
        }
        self.values[cell][flat]
    }
}

/// Fit one expansion per offset of the `N_b^d` sub-grid and tabulate the
/// scaled coefficients `2^{n·d}·α` per cell.
pub fn build_density(
    f: &dyn ScalarField,
    kernel: &Kernel,
    region: &Region,
    n: u32,
    n_b: usize,
    ridge: f64,
) -> Result<DensityField> {
    if n_b == 0 {
        return Err(Error::InvalidInput(
            "density sub-resolution must be at least 1".into(),
        ));
    }
    let d = region.dimension();
    if kernel.dim != d {
        return Err(Error::InvalidInput(format!(
            "kernel dimension {} does not match region dimension {}",
            kernel.dim, d
        )));
    }
    let corners = geometry::grid_set(region, n)?;
    let side = 0.5f64.powi(n as i32);
    let scale = 2f64.powi(n as i32 * d as i32);
    let offsets = offset_grid(side, n_b, d);
    let mut values = vec![vec![0.0; offsets.len()]; corners.len()];
    for (oi, b) in offsets.iter().enumerate() {
        let shifted = corners.translate(b)?;
        let mut fv = Vec::with_capacity(shifted.len());
        for p in shifted.iter() {
            let v = f.value(p);
            if !v.is_finite() {
                return Err(Error::EvaluationFailure {
                    point: p.to_vec(),
                    value: v,
                });
            }
            fv.push(v);
        }
        let s = interpolate::fit(kernel, &shifted, &fv, ridge)?;
        for (ci, alpha) in s.coefficients.iter().enumerate() {
            values[ci][oi] = scale * alpha;
        }
    }
    Ok(DensityField {
        kernel: kernel.clone(),
        region: region.clone(),
        level: n,
        sub_resolution: n_b,
        ridge,
        corners,
        offsets,
        values,
    })
}

// ---------------------------------------------------------------------------
// operator image and norm
// ---------------------------------------------------------------------------

/// The image of a density under the kernel integral operator: the average of
/// the `N_b^d` shifted expansions the density was built from.
#[derive(Debug, Clone)]
pub struct DensityImage {
    kernel: Kernel,
    inv_count: f64,
    /// Per offset: the shifted centers and the recovered coefficients `α`.
    terms: Vec<(PointSet, Vec<f64>)>,
}

impl ScalarField for DensityImage {
    fn value(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (centers, coefficients) in &self.terms {
            total += coefficients
                .iter()
                .zip(centers.iter())
                .map(|(a, c)| a * self.kernel.eval(x, c))
                .sum::<f64>();
        }
        self.inv_count * total
    }
}

/// Apply the integral operator to the density.
///
/// Because the stored values are exactly `2^{n·d}·α`, dividing the scale back
/// out recovers each shifted expansion bit-for-bit, and the image is the exact
/// average `x ↦ (1/N_b^d) Σ_b Σ_z 2^{−n·d}·D(z,b)·k(x, z+b)` with no
/// quadrature of the stored field involved.
pub fn apply_t_density(density: &DensityField) -> DensityImage {
    let d = density.corners.dim();
    let inv_scale = 0.5f64.powi(density.level as i32 * d as i32);
    let mut terms = Vec::with_capacity(density.offsets.len());
    for (oi, b) in density.offsets.iter().enumerate() {
        let centers = density
            .corners
            .translate(b)
            .expect("offsets share the corner dimension");
        let coefficients = density
            .values
            .iter()
            .map(|row| inv_scale * row[oi])
            .collect();
        terms.push((centers, coefficients));
    }
    DensityImage {
        kernel: density.kernel.clone(),
        inv_count: 1.0 / density.offsets.len() as f64,
        terms,
    }
}

/// L₂ norm of the stored field: the Riemann sum
/// `sqrt( Σ_z Σ_b (2^{−n·d}/N_b^d)·D(z,b)² )` over the sub-samples.
pub fn density_l2_norm(density: &DensityField) -> f64 {
    let d = density.corners.dim() as i32;
    let w = 0.5f64.powi(density.level as i32 * d) / density.offsets.len() as f64;
    let sum: f64 = density
        .values
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| w * v * v)
        .sum();
    sum.sqrt()
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
