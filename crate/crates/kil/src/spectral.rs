//! A discretized Mercer model of the kernel integral operator, power-space
//! norms, power kernels, the generalized reproducing identity, and Bernstein
//! ratios.
//!
//! The integral operator `Tv(x) = ∫ k(x,z) v(z) dz` is discretized by the
//! symmetric Nyström method on the region's midpoint quadrature: the matrix
//! `B[l][m] = √w_l · k(t_l, t_m) · √w_m` is symmetric positive semidefinite,
//! its eigenpairs give quadrature-orthonormal eigenfunctions
//! `φ_j(t_m) = v_j[m] / √w_m`, and every power-space quantity is defined
//! within this truncated model.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, PointSet, Quadrature, Region};
use crate::interpolate::{Interpolant, ScalarField};
use crate::kernels::Kernel;

/// Relative cutoff below which eigenvalues are discarded (default).
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

/// Relative tolerance for flagging significantly negative eigenvalues.
const NEGATIVE_TOL: f64 = 1e-10;

/// Entries smaller than this fraction of the largest are treated as zero when
/// fixing eigenvector signs.
const SIGN_EPS: f64 = 1e-12;

// ---------------------------------------------------------------------------
// the model
// ---------------------------------------------------------------------------

/// Discretized eigenpairs `(λ_j, φ_j)` of the kernel integral operator.
///
/// Eigenvalues are descending and strictly positive; row `j` of `phi` tabulates
/// `φ_j` at the quadrature nodes. Eigenvector signs are normalized so that the
/// first non-negligible entry is positive, making the table reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub kernel: Kernel,
    pub region: Region,
    pub quad_level: u32,
    pub drop_tol: f64,
    pub nodes: PointSet,
    pub weights: Vec<f64>,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// `phi[(j, m)] = φ_j(t_m)`.
    pub phi: DMatrix<f64>,
}

/// Build the spectral model by symmetric Nyström discretization.
pub fn nystrom(kernel: &Kernel, region: &Region, quad_level: u32, drop_tol: f64) -> Result<SpectralModel> {
    if quad_level < 3 {
        return Err(Error::InvalidInput(format!(
            "spectral quadrature level must be at least 3, got {quad_level}"
        )));
    }
    if !(drop_tol.is_finite() && drop_tol > 0.0 && drop_tol < 1.0) {
        return Err(Error::InvalidInput(format!("drop tolerance must lie in (0,1), got {drop_tol}")));
    }
    if kernel.dim != region.dimension() {
        return Err(Error::InvalidInput(format!(
            "kernel dimension {} does not match region dimension {}",
            kernel.dim,
            region.dimension()
        )));
    }
    let Quadrature { nodes, weights } = geometry::quadrature(region, quad_level)?;
    let m = nodes.len();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut b = DMatrix::<f64>::zeros(m, m);
    for l in 0..m {
        for mm in l..m {
            let v = sqrt_w[l] * kernel.eval(nodes.point(l), nodes.point(mm)) * sqrt_w[mm];
            b[(l, mm)] = v;
            b[(mm, l)] = v;
        }
    }
    let eig = b.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(Error::NumericalFailure(format!(
            "eigendecomposition produced no positive eigenvalues (max {lambda_max})"
        )));
    }
    let neg_tol = NEGATIVE_TOL * lambda_max;
    if let Some(bad) = eig.eigenvalues.iter().cloned().find(|&l| l < -neg_tol) {
        return Err(Error::NotPositive {
            eigenvalue: bad,
            tolerance: neg_tol,
        });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let cutoff = drop_tol * lambda_max;
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > cutoff)
        .collect();
    let j_count = kept.len();
    let mut eigenvalues = Vec::with_capacity(j_count);
    let mut phi = DMatrix::<f64>::zeros(j_count, m);
    for (row, &i) in kept.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[i]);
        let col = eig.eigenvectors.column(i);
        let max_abs = col.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut sign = 1.0;
        for v in col.iter() {
            if v.abs() > SIGN_EPS * max_abs {
                sign = if *v < 0.0 { -1.0 } else { 1.0 };
                break;
            }
        }
        for mm in 0..m {
            phi[(row, mm)] = sign * col[mm] / sqrt_w[mm];
        }
    }
    Ok(SpectralModel {
        kernel: kernel.clone(),
        region: region.clone(),
        quad_level,
        drop_tol,
        nodes,
        weights,
        eigenvalues,
        phi,
    })
}

// ---------------------------------------------------------------------------
// the image of the integral operator
// ---------------------------------------------------------------------------

/// The field `x ↦ Σ_m w_m k(x, t_m) v(t_m)`: the quadrature image of `v`
/// under the integral operator. Evaluable anywhere, including off the nodes.
#[derive(Debug, Clone)]
pub struct TField {
    kernel: Kernel,
    nodes: PointSet,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl TField {
    /// Build from a field sampled on an explicit quadrature rule.
    pub fn from_quadrature(kernel: &Kernel, quad: &Quadrature, v: &dyn ScalarField) -> Result<TField> {
        let mut values = Vec::with_capacity(quad.nodes.len());
        for p in quad.nodes.iter() {
            let val = v.value(p);
            if !val.is_finite() {
                return Err(Error::EvaluationFailure {
                    point: p.to_vec(),
                    value: val,
                });
            }
            values.push(val);
        }
        Ok(TField {
            kernel: kernel.clone(),
            nodes: quad.nodes.clone(),
            weights: quad.weights.clone(),
            values,
        })
    }
}

impl ScalarField for TField {
    fn value(&self, x: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((t, w), v)| w * self.kernel.eval(x, t) * v)
            .sum()
    }
}

// ---------------------------------------------------------------------------
// queries on the model
// ---------------------------------------------------------------------------

impl SpectralModel {
    /// Number of retained eigenpairs.
    pub fn num_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Well-definedness threshold `d/(2τ)` for power kernels.
    pub fn power_threshold(&self) -> f64 {
        self.kernel.dim as f64 / (2.0 * self.kernel.tau)
    }

    /// Tabulate a field at the quadrature nodes, rejecting non-finite values.
    pub fn node_values(&self, f: &dyn ScalarField) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for p in self.nodes.iter() {
            let v = f.value(p);
            if !v.is_finite() {
                return Err(Error::EvaluationFailure {
                    point: p.to_vec(),
                    value: v,
                });
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Expansion coefficients `c_j = Σ_m w_m f(t_m) φ_j(t_m)` from node values.
    pub fn coefficients_from_values(&self, values: &[f64]) -> Vec<f64> {
        let m = self.nodes.len();
        assert_eq!(values.len(), m, "need one value per quadrature node");
        let mut c = vec![0.0; self.num_modes()];
        for (j, cj) in c.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (mm, &value) in values.iter().enumerate() {
                acc += self.weights[mm] * value * self.phi[(j, mm)];
            }
            *cj = acc;
        }
        c
    }

    /// Expansion coefficients of a field.
    pub fn coefficients(&self, f: &dyn ScalarField) -> Result<Vec<f64>> {
        Ok(self.coefficients_from_values(&self.node_values(f)?))
    }

    /// Power norm from expansion coefficients: `√(Σ_j c_j²/λ_j^θ)`.
    pub fn power_norm_from_coefficients(&self, c: &[f64], theta: f64) -> f64 {
        c.iter()
            .zip(&self.eigenvalues)
            .map(|(cj, l)| cj * cj / l.powf(theta))
            .sum::<f64>()
            .sqrt()
    }

    /// Power inner product from two coefficient vectors: `Σ_j c_j d_j / λ_j^θ`.
    pub fn power_inner_from_coefficients(&self, c: &[f64], d: &[f64], theta: f64) -> f64 {
        c.iter()
            .zip(d)
            .zip(&self.eigenvalues)
            .map(|((cj, dj), l)| cj * dj / l.powf(theta))
            .sum()
    }

    /// Power norm of a field in the smoothness scale parameterized by `θ ≥ 0`
    /// (θ=0 is the truncated L₂ norm, θ=1 the native-space norm).
    pub fn power_norm(&self, f: &dyn ScalarField, theta: f64) -> Result<f64> {
        self.power_norm_values(&self.node_values(f)?, theta)
    }

    /// Power norm from node values.
    pub fn power_norm_values(&self, values: &[f64], theta: f64) -> Result<f64> {
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::InvalidInput(format!("power exponent must be ≥ 0, got {theta}")));
        }
        Ok(self.power_norm_from_coefficients(&self.coefficients_from_values(values), theta))
    }

    /// Quadrature image of `v` under the integral operator (direct summation,
    /// not eigen-truncated, so singular `v` with finite node values works).
    pub fn apply_t(&self, v: &dyn ScalarField) -> Result<TField> {
        self.apply_t_values(self.node_values(v)?)
    }

    /// Quadrature image from node values of `v`.
    pub fn apply_t_values(&self, values: Vec<f64>) -> Result<TField> {
        if values.len() != self.nodes.len() {
            return Err(Error::InvalidInput(format!(
                "got {} node values for {} nodes",
                values.len(),
                self.nodes.len()
            )));
        }
        Ok(TField {
            kernel: self.kernel.clone(),
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
            values,
        })
    }

    /// Off-node eigenfunction value by the Nyström extension
    /// `φ_j(x) = (1/λ_j) Σ_m w_m k(x, t_m) φ_j(t_m)`.
    pub fn eigenfunction_value(&self, j: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for mm in 0..self.nodes.len() {
            acc += self.weights[mm] * self.kernel.eval(x, self.nodes.point(mm)) * self.phi[(j, mm)];
        }
        acc / self.eigenvalues[j]
    }

    /// All eigenfunction values at `x` (one kernel row, then every mode).
    fn extension_row(&self, x: &[f64]) -> Vec<f64> {
        let m = self.nodes.len();
        let krow: Vec<f64> = (0..m)
            .map(|mm| self.weights[mm] * self.kernel.eval(x, self.nodes.point(mm)))
            .collect();
        (0..self.num_modes())
            .map(|j| {
                let mut acc = 0.0;
                for (mm, &k) in krow.iter().enumerate() {
                    acc += k * self.phi[(j, mm)];
                }
                acc / self.eigenvalues[j]
            })
            .collect()
    }

    /// The power kernel `k^{(θ)}(x, z) = Σ_j λ_j^θ φ_j(x) φ_j(z)`.
    ///
    /// Requires `θ > d/(2τ)` for well-definedness.
    pub fn power_kernel_eval(&self, theta: f64, x: &[f64], z: &[f64]) -> Result<f64> {
        let threshold = self.power_threshold();
        if !(theta.is_finite() && theta > threshold) {
            return Err(Error::BelowPowerThreshold { theta, threshold });
        }
        let ex = self.extension_row(x);
        let ez = self.extension_row(z);
        Ok(self
            .eigenvalues
            .iter()
            .zip(ex.iter().zip(&ez))
            .map(|(l, (a, b))| l.powf(theta) * a * b)
            .sum())
    }

    /// Residual of the generalized reproducing identity
    /// `⟨k^{(θ1)}(·,x), k^{(θ1)}(·,z)⟩_{θ2} = k^{(2θ1-θ2)}(x,z)`.
    ///
    /// The left side is computed by quadrature expansion of the two power
    /// kernel fields, the right side by direct spectral summation; the
    /// returned value is the absolute difference. Requires `2θ1 - θ2 > d/(2τ)`.
    pub fn check_generalized_reproducing(&self, theta1: f64, theta2: f64, x: &[f64], z: &[f64]) -> Result<f64> {
        let threshold = self.power_threshold();
        let combined = 2.0 * theta1 - theta2;
        if !(combined.is_finite() && combined > threshold) {
            return Err(Error::BelowPowerThreshold {
                theta: combined,
                threshold,
            });
        }
        let m = self.nodes.len();
        let ex = self.extension_row(x);
        let ez = self.extension_row(z);
        let field_at_nodes = |e: &[f64]| -> Vec<f64> {
            (0..m)
                .map(|mm| {
                    self.eigenvalues
                        .iter()
                        .enumerate()
                        .map(|(j, l)| l.powf(theta1) * self.phi[(j, mm)] * e[j])
                        .sum()
                })
                .collect()
        };
        let ux = field_at_nodes(&ex);
        let uz = field_at_nodes(&ez);
        let cx = self.coefficients_from_values(&ux);
        let cz = self.coefficients_from_values(&uz);
        let lhs = self.power_inner_from_coefficients(&cx, &cz, theta2);
        let rhs: f64 = self
            .eigenvalues
            .iter()
            .zip(ex.iter().zip(&ez))
            .map(|(l, (a, b))| l.powf(combined) * a * b)
            .sum();
        Ok((lhs - rhs).abs())
    }

    /// The Bernstein ratio `‖u‖_θ · q^{θτ} / ‖u‖_0` realized by a kernel
    /// expansion `u` with separation `q`; bounded over refinement families by
    /// the inverse inequality.
    pub fn bernstein_ratio(&self, u: &Interpolant, theta: f64, q: f64) -> Result<f64> {
        let upper = 2.0 - self.power_threshold();
        if !(theta.is_finite() && (0.0..upper).contains(&theta)) {
            return Err(Error::InvalidInput(format!(
                "Bernstein exponent must lie in [0, {upper}), got {theta}"
            )));
        }
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidInput(format!("separation must be positive, got {q}")));
        }
        if u.coefficients.iter().all(|&a| a == 0.0) {
            return Err(Error::ZeroField);
        }
        let values = self.node_values(&u)?;
        let c = self.coefficients_from_values(&values);
        let denom = self.power_norm_from_coefficients(&c, 0.0);
        if denom == 0.0 {
            return Err(Error::ZeroField);
        }
        let numer = self.power_norm_from_coefficients(&c, theta);
        Ok(numer * q.powf(theta * self.kernel.tau) / denom)
    }
}

// ---------------------------------------------------------------------------
// serialization and caching
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SpectralModelJson {
    kernel: String,
    dim: usize,
    region: String,
    quad_level: u32,
    drop_tol: f64,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
    phi: Vec<Vec<f64>>,
}

impl SpectralModel {
    /// Serialize to JSON (exact f64 round-trip).
    pub fn to_json(&self) -> String {
        let j = self.num_modes();
        let m = self.nodes.len();
        let doc = SpectralModelJson {
            kernel: self.kernel.descriptor(),
            dim: self.kernel.dim,
            region: self.region.descriptor(),
            quad_level: self.quad_level,
            drop_tol: self.drop_tol,
            nodes: self.nodes.points().to_vec(),
            weights: self.weights.clone(),
            eigenvalues: self.eigenvalues.clone(),
            phi: (0..j)
                .map(|row| (0..m).map(|mm| self.phi[(row, mm)]).collect())
                .collect(),
        };
        serde_json::to_string(&doc).expect("spectral model serialization cannot fail")
    }

    /// Deserialize from the JSON produced by [`SpectralModel::to_json`].
    pub fn from_json(text: &str) -> Result<SpectralModel> {
        let doc: SpectralModelJson = serde_json::from_str(text)?;
        let kernel = Kernel::parse(&doc.kernel, doc.dim)?;
        let region = Region::parse(&doc.region)?;
        let nodes = PointSet::new(doc.dim, doc.nodes)?;
        let m = nodes.len();
        let j = doc.eigenvalues.len();
        if doc.weights.len() != m || doc.phi.len() != j || doc.phi.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidInput("inconsistent spectral model dimensions".into()));
        }
        let phi = DMatrix::from_fn(j, m, |r, c| doc.phi[r][c]);
        Ok(SpectralModel {
            kernel,
            region,
            quad_level: doc.quad_level,
            drop_tol: doc.drop_tol,
            nodes,
            weights: doc.weights,
            eigenvalues: doc.eigenvalues,
            phi,
        })
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

/// Cache file name keyed by kernel, region, quadrature level, and tolerance.
pub fn cache_file_name(kernel: &Kernel, region: &Region, quad_level: u32, drop_tol: f64) -> String {
    format!(
        "spectral_{}_{}_q{}_tol{:e}.json",
        sanitize(&kernel.descriptor()),
        sanitize(&region.descriptor()),
        quad_level,
        drop_tol
    )
}

/// Build the model, or reuse a cached copy from `cache_dir` when present.
///
/// Cache hits are validated against the key fields; corrupt or mismatched
/// files are silently rebuilt and replaced. Writes are atomic.
pub fn load_or_build(
    kernel: &Kernel,
    region: &Region,
    quad_level: u32,
    drop_tol: f64,
    cache_dir: Option<&Path>,
) -> Result<SpectralModel> {
    let Some(dir) = cache_dir else {
        return nystrom(kernel, region, quad_level, drop_tol);
    };
    let path = dir.join(cache_file_name(kernel, region, quad_level, drop_tol));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(model) = SpectralModel::from_json(&text) {
            let key_matches = model.kernel.descriptor() == kernel.descriptor()
                && model.region.descriptor() == region.descriptor()
                && model.quad_level == quad_level
                && model.drop_tol == drop_tol;
            if key_matches {
                return Ok(model);
            }
        }
    }
    let model = nystrom(kernel, region, quad_level, drop_tol)?;
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(model.to_json().as_bytes())?;
    tmp.persist(&path)
        .map_err(|e| Error::Io(e.error))?;
    Ok(model)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolate::FnField;
    use crate::kernels::KernelFamily;
    use crate::sampling;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn hat() -> Kernel {
        Kernel::new(KernelFamily::WendlandHat, 1.0, 1).unwrap()
    }

    fn unit_interval() -> Region {
        Region::Interval { a: 0.0, b: 1.0 }
    }

    fn model_level(level: u32) -> SpectralModel {
        nystrom(&hat(), &unit_interval(), level, DEFAULT_DROP_TOL).unwrap()
    }

    #[test]
    fn eigenfunctions_are_quadrature_orthonormal() {
        let model = model_level(7);
        let j = model.num_modes();
        let m = model.nodes.len();
        let mut worst = 0.0f64;
        for a in 0..j {
            for b in a..j {
                let mut acc = 0.0;
                for mm in 0..m {
                    acc += model.weights[mm] * model.phi[(a, mm)] * model.phi[(b, mm)];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).abs());
            }
        }
        assert!(worst <= 1e-8, "orthonormality defect {worst}");
    }

    #[test]
    fn eigen_relation_holds_at_nodes() {
        let model = model_level(7);
        let m = model.nodes.len();
        let tol = 1e-6 * model.eigenvalues[0];
        for j in [0usize, 1, model.num_modes() / 2, model.num_modes() - 1] {
            for l in 0..m {
                let mut acc = 0.0;
                for mm in 0..m {
                    acc += model.weights[mm]
                        * model.kernel.eval(model.nodes.point(l), model.nodes.point(mm))
                        * model.phi[(j, mm)];
                }
                let expected = model.eigenvalues[j] * model.phi[(j, l)];
                assert!(
                    (acc - expected).abs() <= tol,
                    "mode {j} node {l}: {acc} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn eigenvalues_are_positive_descending_and_above_cutoff() {
        let model = model_level(7);
        let l1 = model.eigenvalues[0];
        for pair in model.eigenvalues.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
        for &l in &model.eigenvalues {
            assert!(l > model.drop_tol * l1);
        }
    }

    #[test]
    fn first_eigenfunction_has_unit_truncated_l2_norm() {
        let model = model_level(7);
        let row: Vec<f64> = (0..model.nodes.len()).map(|mm| model.phi[(0, mm)]).collect();
        let norm = model.power_norm_values(&row, 0.0).unwrap();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn single_modes_have_power_norm_lambda_to_minus_half_theta() {
        let model = model_level(7);
        for j in [0usize, 2, 7] {
            let row: Vec<f64> = (0..model.nodes.len()).map(|mm| model.phi[(j, mm)]).collect();
            for theta in [0.5, 1.0, 2.0] {
                let expected = model.eigenvalues[j].powf(-theta / 2.0);
                let got = model.power_norm_values(&row, theta).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-6 * expected,
                    "mode {j} θ={theta}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn native_norm_of_kernel_translate_matches_kernel_diagonal() {
        let model = model_level(8);
        let k = hat();
        let x0 = [0.4];
        let f = FnField(|p: &[f64]| k.eval(p, &x0));
        let norm = model.power_norm(&f, 1.0).unwrap();
        let reconstructed = norm * norm;
        let direct = k.eval(&x0, &x0);
        assert!(
            (reconstructed - direct).abs() <= 2e-2 * direct,
            "‖k(·,x0)‖₁² = {reconstructed} vs k(x0,x0) = {direct}"
        );
    }

    #[test]
    fn negative_power_exponents_are_rejected() {
        let model = model_level(4);
        let zero = FnField(|_: &[f64]| 0.0);
        assert!(matches!(model.power_norm(&zero, -0.5), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn operator_image_of_zero_is_zero() {
        let model = model_level(5);
        let zero = FnField(|_: &[f64]| 0.0);
        let t = model.apply_t(&zero).unwrap();
        for x in [0.0, 0.33, 1.0] {
            assert_eq!(t.value(&[x]), 0.0);
        }
    }

    #[test]
    fn operator_image_of_eigenfunctions_scales_by_eigenvalue() {
        let model = model_level(7);
        let tol = 1e-6 * model.eigenvalues[0];
        for j in [0usize, 3] {
            let row: Vec<f64> = (0..model.nodes.len()).map(|mm| model.phi[(j, mm)]).collect();
            let t = model.apply_t_values(row.clone()).unwrap();
            for (mm, r) in row.iter().enumerate() {
                let got = t.value(model.nodes.point(mm));
                let expected = model.eigenvalues[j] * r;
                assert!((got - expected).abs() <= tol, "mode {j}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn operator_image_of_singular_density_is_finite_everywhere() {
        let model = model_level(7);
        let v = FnField(|p: &[f64]| p[0].powf(-0.45));
        let t = model.apply_t(&v).unwrap();
        for x in [0.0, 1e-6, 0.2, 0.5, 1.0] {
            assert!(t.value(&[x]).is_finite());
        }
    }

    #[test]
    fn operator_rejects_non_finite_node_values() {
        let model = model_level(5);
        let v = FnField(|p: &[f64]| 1.0 / (p[0] - p[0]));
        assert!(matches!(model.apply_t(&v), Err(Error::EvaluationFailure { .. })));
    }

    #[test]
    fn power_kernel_at_theta_one_reconstructs_the_kernel() {
        let model = model_level(8);
        let k = hat();
        let mut rng = sampling::trial_rng(41, 0, 0);
        for _ in 0..10 {
            let x = [rng.gen::<f64>()];
            let z = [rng.gen::<f64>()];
            let got = model.power_kernel_eval(1.0, &x, &z).unwrap();
            let expected = k.eval(&x, &z);
            assert!(
                (got - expected).abs() <= 1e-3 * 1.0f64.max(expected.abs()),
                "k^(1)({x:?},{z:?}) = {got} vs {expected}"
            );
        }
    }

    #[test]
    fn squared_power_kernel_diagonal_is_bounded_by_top_eigenvalue() {
        let model = model_level(7);
        let k = hat();
        for x in [0.1, 0.5, 0.9] {
            let got = model.power_kernel_eval(2.0, &[x], &[x]).unwrap();
            let bound = model.eigenvalues[0] * k.eval(&[x], &[x]);
            assert!(got <= bound * (1.0 + 1e-12), "{got} > {bound}");
        }
    }

    #[test]
    fn power_kernel_below_threshold_is_rejected() {
        let model = model_level(5);
        // d/(2τ) = 0.5 for the hat kernel in one dimension.
        match model.power_kernel_eval(0.4, &[0.3], &[0.6]) {
            Err(Error::BelowPowerThreshold { threshold, .. }) => {
                assert_abs_diff_eq!(threshold, 0.5, epsilon = 1e-15);
            }
            other => panic!("expected BelowPowerThreshold, got {other:?}"),
        }
    }

    #[test]
    fn generalized_reproducing_identity_holds() {
        let model = model_level(7);
        let mut rng = sampling::trial_rng(17, 0, 0);
        for (t1, t2) in [(1.0, 1.0), (1.2, 1.0), (0.8, 0.5)] {
            for _ in 0..3 {
                let x = [rng.gen::<f64>()];
                let z = [rng.gen::<f64>()];
                let residual = model.check_generalized_reproducing(t1, t2, &x, &z).unwrap();
                assert!(residual < 1e-10, "θ=({t1},{t2}) residual {residual}");
            }
        }
    }

    #[test]
    fn generalized_reproducing_guards_its_parameter_range() {
        let model = model_level(5);
        assert!(matches!(
            model.check_generalized_reproducing(0.5, 1.0, &[0.2], &[0.8]),
            Err(Error::BelowPowerThreshold { .. })
        ));
    }

    #[test]
    fn bernstein_ratio_at_theta_zero_is_one() {
        let model = model_level(6);
        let x = crate::geometry::grid_set(&unit_interval(), 3).unwrap();
        let values = sampling::trial_values(5, 3, 0, x.len());
        let u = crate::interpolate::fit(&hat(), &x, &values, 0.0).unwrap();
        let q = geometry::separation_distance(&x).unwrap();
        assert_eq!(model.bernstein_ratio(&u, 0.0, q).unwrap(), 1.0);
    }

    #[test]
    fn bernstein_ratio_for_a_single_translate_is_finite_and_positive() {
        let model = model_level(6);
        let x = PointSet::from_scalars(&[0.5]).unwrap();
        let u = crate::interpolate::fit(&hat(), &x, &[1.0], 0.0).unwrap();
        let ratio = model.bernstein_ratio(&u, 1.0, 0.25).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
    }

    #[test]
    fn bernstein_ratio_guards_zero_fields_and_exponent_range() {
        let model = model_level(5);
        let x = PointSet::from_scalars(&[0.25, 0.75]).unwrap();
        let zero = crate::interpolate::fit(&hat(), &x, &[0.0, 0.0], 0.0).unwrap();
        assert!(matches!(model.bernstein_ratio(&zero, 1.0, 0.25), Err(Error::ZeroField)));
        let u = crate::interpolate::fit(&hat(), &x, &[1.0, -1.0], 0.0).unwrap();
        // 2 - d/(2τ) = 1.5 for the hat kernel in one dimension.
        assert!(matches!(model.bernstein_ratio(&u, 1.5, 0.25), Err(Error::InvalidInput(_))));
        assert!(matches!(model.bernstein_ratio(&u, 1.0, 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn bernstein_ratios_stay_bounded_under_refinement() {
        let model = model_level(7);
        for theta in [0.6, 1.0, 1.3] {
            let mut ratios = Vec::new();
            for n in 2..=5u32 {
                let x = crate::geometry::grid_set(&unit_interval(), n).unwrap();
                let q = geometry::separation_distance(&x).unwrap();
                for trial in 0..2u32 {
                    let values = sampling::trial_values(99, n, trial, x.len());
                    let u = crate::interpolate::fit(&hat(), &x, &values, 0.0).unwrap();
                    ratios.push(model.bernstein_ratio(&u, theta, q).unwrap());
                }
            }
            let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
            let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
            assert!(
                max / min <= 10.0,
                "θ={theta}: ratios {ratios:?} spread beyond 10x"
            );
        }
    }

    #[test]
    fn trace_matches_the_quadrature_diagonal() {
        let model = model_level(7);
        let trace: f64 = model.eigenvalues.iter().sum();
        let diag: f64 = model
            .nodes
            .iter()
            .zip(&model.weights)
            .map(|(t, w)| w * model.kernel.eval(t, t))
            .sum();
        assert!(
            (trace - diag).abs() <= 0.02 * diag,
            "trace {trace} vs quadrature diagonal {diag}"
        );
    }

    #[test]
    fn leading_eigenvalues_are_stable_under_resolution_doubling() {
        let m7 = model_level(7);
        let m8 = model_level(8);
        for j in 0..10 {
            let a = m7.eigenvalues[j];
            let b = m8.eigenvalues[j];
            assert!(
                (a - b).abs() <= 0.01 * b,
                "λ_{j}: level 7 gives {a}, level 8 gives {b}"
            );
        }
    }

    #[test]
    fn eigenvalue_decay_slope_matches_smoothness() {
        // log λ_j vs log j over j = 3..J/2 has slope ≈ -2τ/d = -2 within 15%.
        let model = model_level(7);
        let hi = model.num_modes() / 2;
        let pts: Vec<(f64, f64)> = (3..=hi)
            .map(|j| ((j as f64).ln(), model.eigenvalues[j - 1].ln()))
            .collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|(x, _)| x).sum::<f64>() / m;
        let my = pts.iter().map(|(_, y)| y).sum::<f64>() / m;
        let slope = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum::<f64>();
        assert!(
            (slope - (-2.0)).abs() <= 0.15 * 2.0,
            "decay slope {slope} not within 15% of -2"
        );
    }

    #[test]
    fn quadrature_level_below_three_is_rejected() {
        assert!(matches!(
            nystrom(&hat(), &unit_interval(), 2, DEFAULT_DROP_TOL),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn holder_inequality_on_random_truncated_fields() {
        let model = model_level(6);
        let j = model.num_modes();
        let mut rng = sampling::trial_rng(2024, 0, 0);
        for _ in 0..50 {
            let cf: Vec<f64> = (0..j)
                .map(|i| sampling::standard_normal(&mut rng) * model.eigenvalues[i])
                .collect();
            let cg: Vec<f64> = (0..j)
                .map(|i| sampling::standard_normal(&mut rng) * model.eigenvalues[i])
                .collect();
            let lhs = model.power_inner_from_coefficients(&cf, &cg, 1.0).abs();
            for theta in [1.0, 1.3, 1.7, 2.0] {
                let rhs = model.power_norm_from_coefficients(&cf, theta)
                    * model.power_norm_from_coefficients(&cg, 2.0 - theta);
                assert!(lhs <= rhs * (1.0 + 1e-10), "θ={theta}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn interpolation_inequality_on_random_truncated_fields() {
        let model = model_level(6);
        let j = model.num_modes();
        let mut rng = sampling::trial_rng(31337, 0, 0);
        for _ in 0..50 {
            let c: Vec<f64> = (0..j)
                .map(|i| sampling::standard_normal(&mut rng) * model.eigenvalues[i])
                .collect();
            let l2 = model.power_norm_from_coefficients(&c, 0.0);
            let h1 = model.power_norm_from_coefficients(&c, 1.0);
            for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let lhs = model.power_norm_from_coefficients(&c, theta);
                let rhs = l2.powf(1.0 - theta) * h1.powf(theta);
                assert!(lhs <= rhs * (1.0 + 1e-10), "θ={theta}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn operator_adjoint_identity_on_random_truncated_fields() {
        // ⟨f, Tv⟩ in the native-space inner product equals ⟨f, v⟩ in L₂.
        let model = model_level(6);
        let j = model.num_modes();
        let m = model.nodes.len();
        let mut rng = sampling::trial_rng(404, 0, 0);
        for _ in 0..20 {
            let cf: Vec<f64> = (0..j)
                .map(|i| sampling::standard_normal(&mut rng) * model.eigenvalues[i])
                .collect();
            let cv: Vec<f64> = (0..j)
                .map(|i| sampling::standard_normal(&mut rng) * model.eigenvalues[i].sqrt())
                .collect();
            let row = |c: &Vec<f64>, mm: usize| -> f64 {
                (0..j).map(|i| c[i] * model.phi[(i, mm)]).sum()
            };
            let f_vals: Vec<f64> = (0..m).map(|mm| row(&cf, mm)).collect();
            let v_vals: Vec<f64> = (0..m).map(|mm| row(&cv, mm)).collect();
            let tv = model.apply_t_values(v_vals.clone()).unwrap();
            let tv_vals: Vec<f64> = (0..m).map(|mm| tv.value(model.nodes.point(mm))).collect();
            let c_tv = model.coefficients_from_values(&tv_vals);
            let lhs = model.power_inner_from_coefficients(&cf, &c_tv, 1.0);
            let rhs: f64 = (0..m).map(|mm| model.weights[mm] * f_vals[mm] * v_vals[mm]).sum();
            let scale = lhs.abs().max(rhs.abs()).max(1e-30);
            assert!(
                (lhs - rhs).abs() <= 1e-8 * scale,
                "⟨f,Tv⟩₁ = {lhs} vs ⟨f,v⟩₀ = {rhs}"
            );
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let model = model_level(5);
        let restored = SpectralModel::from_json(&model.to_json()).unwrap();
        assert_eq!(model.eigenvalues, restored.eigenvalues);
        assert_eq!(model.weights, restored.weights);
        assert_eq!(model.nodes, restored.nodes);
        assert_eq!(model.phi, restored.phi);
        assert_eq!(model.quad_level, restored.quad_level);
    }

    #[test]
    fn cache_round_trip_reuses_the_stored_model() {
        let dir = tempfile::tempdir().unwrap();
        let fresh = load_or_build(&hat(), &unit_interval(), 5, DEFAULT_DROP_TOL, Some(dir.path())).unwrap();
        let path = dir.path().join(cache_file_name(&hat(), &unit_interval(), 5, DEFAULT_DROP_TOL));
        assert!(path.exists());
        let cached = load_or_build(&hat(), &unit_interval(), 5, DEFAULT_DROP_TOL, Some(dir.path())).unwrap();
        assert_eq!(fresh.eigenvalues, cached.eigenvalues);
        assert_eq!(fresh.phi, cached.phi);
        // A corrupt cache file is rebuilt, not propagated.
        std::fs::write(&path, "not json").unwrap();
        let rebuilt = load_or_build(&hat(), &unit_interval(), 5, DEFAULT_DROP_TOL, Some(dir.path())).unwrap();
        assert_eq!(fresh.eigenvalues, rebuilt.eigenvalues);
        assert!(SpectralModel::from_json(&std::fs::read_to_string(&path).unwrap()).is_ok());
    }
}
