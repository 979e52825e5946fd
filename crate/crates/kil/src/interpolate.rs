//! Minimum-norm and ridge-regularized kernel interpolation, plus L₂ error
//! evaluation by midpoint quadrature.
//!
//! The interpolant of values `f(X)` on centers `X` is `s(x) = Σ_j α_j k(x, x_j)`
//! with `(A + λI)α = f(X)` solved by Cholesky factorization. No automatic
//! jitter is ever applied: a numerically non-positive-definite system is
//! reported as an error so that coefficient vectors stay exactly reproducible.

use nalgebra::{Cholesky, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, PointSet, Quadrature, Region};
use crate::kernels::{self, Kernel};

// ---------------------------------------------------------------------------
// scalar fields
// ---------------------------------------------------------------------------

/// An evaluable real-valued function on the region.
///
/// Closed-form targets, interpolants, spectral reconstructions, and density
/// images all implement this role.
pub trait ScalarField {
    fn value(&self, x: &[f64]) -> f64;
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
}

impl<T: ScalarField + ?Sized> ScalarField for Box<T> {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
}

/// Wrap a closure as a [`ScalarField`].
pub struct FnField<F: Fn(&[f64]) -> f64>(pub F);

impl<F: Fn(&[f64]) -> f64> ScalarField for FnField<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

/// Evaluate a field at every point of a set.
pub fn tabulate(f: &dyn ScalarField, pts: &PointSet) -> Vec<f64> {
    pts.iter().map(|p| f.value(p)).collect()
}

// ---------------------------------------------------------------------------
// interpolants
// ---------------------------------------------------------------------------

/// A fitted kernel expansion `s(x) = Σ_j α_j k(x, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    pub kernel: Kernel,
    pub centers: PointSet,
    pub coefficients: DVector<f64>,
    /// Regularization λ used in the fit (0 for pure interpolation).
    pub ridge: f64,
}

/// Serialized form of an [`Interpolant`].
#[derive(Serialize, Deserialize)]
struct InterpolantJson {
    kernel: String,
    dim: usize,
    ridge: f64,
    centers: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
}

impl Interpolant {
    /// Evaluate at a single point.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(self.centers.iter())
            .map(|(a, c)| a * self.kernel.eval(x, c))
            .sum()
    }

    /// Evaluate at every point of a set.
    pub fn evaluate(&self, pts: &PointSet) -> Vec<f64> {
        pts.iter().map(|p| self.value_at(p)).collect()
    }

    /// Squared native-space norm of the expansion, `αᵀAα`.
    pub fn native_norm_sq(&self) -> Result<f64> {
        let a = kernels::gram(&self.kernel, &self.centers)?;
        Ok((self.coefficients.transpose() * &a.entries * &self.coefficients)[(0, 0)])
    }

    /// Serialize to a JSON string (kernel descriptor, centers, coefficients).
    pub fn to_json(&self) -> String {
        let doc = InterpolantJson {
            kernel: self.kernel.descriptor(),
            dim: self.kernel.dim,
            ridge: self.ridge,
            centers: self.centers.points().to_vec(),
            coefficients: self.coefficients.iter().cloned().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("interpolant serialization cannot fail")
    }

    /// Deserialize from the JSON produced by [`Interpolant::to_json`].
    pub fn from_json(text: &str) -> Result<Interpolant> {
        let doc: InterpolantJson = serde_json::from_str(text)?;
        let kernel = Kernel::parse(&doc.kernel, doc.dim)?;
        let centers = PointSet::new(doc.dim, doc.centers)?;
        if doc.coefficients.len() != centers.len() {
            return Err(Error::InvalidInput(format!(
                "coefficient count {} does not match center count {}",
                doc.coefficients.len(),
                centers.len()
            )));
        }
        Ok(Interpolant {
            kernel,
            centers,
            coefficients: DVector::from_vec(doc.coefficients),
            ridge: doc.ridge,
        })
    }
}

impl ScalarField for Interpolant {
    fn value(&self, x: &[f64]) -> f64 {
        self.value_at(x)
    }
}

/// Fit the kernel expansion solving `(A + ridge·I) α = values` by Cholesky.
///
/// Errors with [`Error::IllConditioned`] if the factorization breaks down or
/// produces non-finite coefficients; the remedy is a positive ridge, never an
/// automatic jitter.
pub fn fit(kernel: &Kernel, x: &PointSet, values: &[f64], ridge: f64) -> Result<Interpolant> {
    if values.len() != x.len() {
        return Err(Error::InvalidInput(format!(
            "got {} values for {} centers",
            values.len(),
            x.len()
        )));
    }
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::InvalidInput(format!("ridge must be a nonnegative number, got {ridge}")));
    }
    if x.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite sample value {bad}")));
    }
    let mut a = kernels::gram(kernel, x)?.entries;
    for i in 0..x.len() {
        a[(i, i)] += ridge;
    }
    let chol = Cholesky::new(a).ok_or_else(|| Error::IllConditioned {
        detail: format!(" on {} centers (ridge {ridge})", x.len()),
    })?;
    let alpha = chol.solve(&DVector::from_row_slice(values));
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned {
            detail: format!(" on {} centers: non-finite coefficients (ridge {ridge})", x.len()),
        });
    }
    Ok(Interpolant {
        kernel: kernel.clone(),
        centers: x.clone(),
        coefficients: alpha,
        ridge,
    })
}

// ---------------------------------------------------------------------------
// error norms
// ---------------------------------------------------------------------------

fn field_values_at(f: &dyn ScalarField, quad: &Quadrature) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(quad.nodes.len());
    for p in quad.nodes.iter() {
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

/// L₂ and L∞ distance between two fields over the midpoint quadrature of the
/// region at the given level.
pub fn l2_and_linf_error(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    region: &Region,
    quad_level: u32,
) -> Result<(f64, f64)> {
    let quad = geometry::quadrature(region, quad_level)?;
    let fv = field_values_at(f, &quad)?;
    let gv = field_values_at(g, &quad)?;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for ((x, y), w) in fv.iter().zip(&gv).zip(&quad.weights) {
        let d = x - y;
        sum += w * d * d;
        max = max.max(d.abs());
    }
    Ok((sum.sqrt(), max))
}

/// L₂ distance between two fields by midpoint quadrature.
pub fn l2_error(f: &dyn ScalarField, g: &dyn ScalarField, region: &Region, quad_level: u32) -> Result<f64> {
    l2_and_linf_error(f, g, region, quad_level).map(|(l2, _)| l2)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn hat() -> Kernel {
        Kernel::new(KernelFamily::WendlandHat, 1.0, 1).unwrap()
    }

    fn unit_interval() -> Region {
        Region::Interval { a: 0.0, b: 1.0 }
    }

    #[test]
    fn frozen_three_point_coefficients() {
        // A = [[1,.5,0],[.5,1,.5],[0,.5,1]], f = (1,0,0)  =>  α = (1.5, -1, 0.5).
        let x = PointSet::from_scalars(&[0.0, 0.5, 1.0]).unwrap();
        let s = fit(&hat(), &x, &[1.0, 0.0, 0.0], 0.0).unwrap();
        assert_abs_diff_eq!(s.coefficients[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.coefficients[1], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.coefficients[2], 0.5, epsilon = 1e-12);
        // Direct substitution at x = 0.25:
        // 1.5·k(.25,0) - 1·k(.25,.5) + 0.5·k(.25,1) = 1.5·0.75 - 0.75 + 0.5·0.25 = 0.5.
        assert_abs_diff_eq!(s.value_at(&[0.25]), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn kernel_translates_are_reproduced_exactly() {
        let x = PointSet::from_scalars(&[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        let x0 = [0.5];
        let values: Vec<f64> = x.iter().map(|p| hat().eval(p, &x0)).collect();
        let s = fit(&hat(), &x, &values, 0.0).unwrap();
        for (j, a) in s.coefficients.iter().enumerate() {
            let expected = if j == 2 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*a, expected, epsilon = 1e-10);
        }
        for t in [0.1, 0.33, 0.77, 0.99] {
            assert_abs_diff_eq!(s.value_at(&[t]), hat().eval(&[t], &x0), epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_values_give_zero_coefficients() {
        let x = PointSet::from_scalars(&[0.0, 0.5, 1.0]).unwrap();
        let s = fit(&hat(), &x, &[0.0, 0.0, 0.0], 0.0).unwrap();
        assert!(s.coefficients.iter().all(|&a| a == 0.0));
        assert_eq!(s.value_at(&[0.3]), 0.0);
    }

    #[test]
    fn interpolation_conditions_hold_at_centers() {
        let region = unit_interval();
        let x = geometry::grid_set(&region, 4).unwrap();
        let values: Vec<f64> = x.iter().map(|p| p[0].exp()).collect();
        let s = fit(&hat(), &x, &values, 0.0).unwrap();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (p, v) in x.iter().zip(&values) {
            assert!((s.value_at(p) - v).abs() <= 1e-8 * norm);
        }
    }

    #[test]
    fn first_order_optimality_residual_vanishes() {
        let x = geometry::grid_set(&unit_interval(), 5).unwrap();
        let values: Vec<f64> = x.iter().map(|p| (3.0 * p[0]).sin()).collect();
        let s = fit(&hat(), &x, &values, 0.0).unwrap();
        let a = kernels::gram(&hat(), &x).unwrap().entries;
        let residual = &a * &s.coefficients - DVector::from_row_slice(&values);
        let fnorm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(residual.norm() <= 1e-8 * fnorm, "residual {}", residual.norm());
    }

    #[test]
    fn native_norm_grows_under_center_nesting() {
        // The fitted expansion is an orthogonal projection, so its squared
        // native norm αᵀAα cannot decrease when centers are added.
        let f = |p: &[f64]| p[0].exp();
        let mut last = 0.0;
        for n in 2..=5u32 {
            let x = geometry::grid_set(&unit_interval(), n).unwrap();
            let values: Vec<f64> = x.iter().map(&f).collect();
            let s = fit(&hat(), &x, &values, 0.0).unwrap();
            let norm_sq = s.native_norm_sq().unwrap();
            assert!(
                norm_sq >= last - 1e-12,
                "native norm shrank: {norm_sq} < {last}"
            );
            last = norm_sq;
        }
    }

    #[test]
    fn native_space_targets_converge_at_least_linearly() {
        // f = k(·,0.3) + k(·,0.7) lies in the native space, so the error obeys
        // e_n ≤ C·h_n: the measured ratio e/h must not grow under refinement.
        let k = hat();
        let f = FnField(|p: &[f64]| k.eval(p, &[0.3]) + k.eval(p, &[0.7]));
        let region = unit_interval();
        let mut ratios = Vec::new();
        for n in 2..=6u32 {
            let x = geometry::grid_set(&region, n).unwrap();
            let values = tabulate(&f, &x);
            let s = fit(&hat(), &x, &values, 0.0).unwrap();
            let e = l2_error(&f, &s, &region, 9).unwrap();
            let h = geometry::fill_distance(&x, &region, n + 4).unwrap();
            ratios.push(e / h);
        }
        for r in &ratios {
            assert!(*r >= 0.0);
            assert!(
                *r <= 2.0 * ratios[0] + 1e-12,
                "e/h ratios grew under refinement: {ratios:?}"
            );
        }
    }

    #[test]
    fn singular_systems_are_reported_not_jittered() {
        let mh = Kernel::new(KernelFamily::MaternHalf, 1.0, 1).unwrap();
        // Distinct points, but so close that exp(-r) rounds to 1: the Gram
        // matrix is exactly singular in floating point.
        let x = PointSet::from_scalars(&[0.0, 1e-18]).unwrap();
        match fit(&mh, &x, &[1.0, 0.0], 0.0) {
            Err(Error::IllConditioned { .. }) => {}
            other => panic!("expected IllConditioned, got {other:?}"),
        }
        // The advertised remedy — a positive ridge — must succeed.
        assert!(fit(&mh, &x, &[1.0, 0.0], 1e-6).is_ok());
    }

    #[test]
    fn value_count_mismatch_is_invalid() {
        let x = PointSet::from_scalars(&[0.0, 0.5]).unwrap();
        assert!(matches!(
            fit(&hat(), &x, &[1.0], 0.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let x = geometry::grid_set(&unit_interval(), 3).unwrap();
        let values: Vec<f64> = x.iter().map(|p| (2.0 * p[0]).cos()).collect();
        let s = fit(&hat(), &x, &values, 0.0).unwrap();
        let restored = Interpolant::from_json(&s.to_json()).unwrap();
        assert_eq!(s.kernel, restored.kernel);
        assert_eq!(s.centers, restored.centers);
        assert_eq!(s.ridge, restored.ridge);
        for (a, b) in s.coefficients.iter().zip(restored.coefficients.iter()) {
            assert_eq!(a, b, "coefficients must round-trip bit-exactly");
        }
    }

    #[test]
    fn l2_error_frozen_values() {
        let region = unit_interval();
        let f = FnField(|p: &[f64]| p[0].powi(3) - p[0]);
        assert_eq!(l2_error(&f, &f, &region, 6).unwrap(), 0.0);

        let one = FnField(|_: &[f64]| 1.0);
        let zero = FnField(|_: &[f64]| 0.0);
        assert_eq!(l2_error(&one, &zero, &region, 5).unwrap(), 1.0);

        let linear = FnField(|p: &[f64]| p[0]);
        assert_abs_diff_eq!(
            l2_error(&linear, &zero, &region, 8).unwrap(),
            1.0 / 3f64.sqrt(),
            epsilon = 1e-4
        );
    }

    #[test]
    fn non_finite_fields_fail_with_the_offending_node() {
        let region = unit_interval();
        let bad = FnField(|p: &[f64]| if p[0] > 0.5 { f64::NAN } else { 0.0 });
        let zero = FnField(|_: &[f64]| 0.0);
        match l2_error(&bad, &zero, &region, 3) {
            Err(Error::EvaluationFailure { point, .. }) => assert!(point[0] > 0.5),
            other => panic!("expected EvaluationFailure, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn fitted_coefficients_minimize_the_projection_functional(
            ticks in proptest::collection::btree_set(1u32..256, 3..9),
            raw_values in proptest::collection::vec(-2.0f64..2.0, 9),
            raw_perturb in proptest::collection::vec(-1.0f64..1.0, 9),
        ) {
            let xs: Vec<f64> = ticks.iter().map(|&t| t as f64 / 256.0).collect();
            let x = PointSet::from_scalars(&xs).unwrap();
            let values = &raw_values[..x.len()];
            let s = fit(&hat(), &x, values, 0.0).unwrap();
            let a = kernels::gram(&hat(), &x).unwrap().entries;
            let fv = DVector::from_row_slice(values);
            let functional = |beta: &DVector<f64>| {
                (beta.transpose() * &a * beta)[(0, 0)] - 2.0 * (beta.transpose() * &fv)[(0, 0)]
            };
            let at_alpha = functional(&s.coefficients);
            let delta = DVector::from_iterator(
                x.len(),
                raw_perturb[..x.len()].iter().map(|d| d * 1e-3),
            );
            let perturbed = functional(&(&s.coefficients + &delta));
            prop_assert!(perturbed >= at_alpha - 1e-9);
        }
    }
}
