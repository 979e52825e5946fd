//! Regions, lattice grid sets, separation/fill distances, and midpoint quadrature.
//!
//! The central construction is the dyadic grid set
//! `Z_n = { z ∈ 2⁻ⁿ·Zᵈ : z + [0, 2⁻ⁿ]ᵈ ⊆ Ω }`:
//! every lattice point whose closed cube of side `2⁻ⁿ` fits inside the region.
//! Grid sets are nested (`Z_n ⊆ Z_{n+1}`), lexicographically ordered, and all
//! coordinates are exact dyadic floating-point values, which makes downstream
//! linear algebra bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// regions
// ---------------------------------------------------------------------------

/// A bounded region with exact membership and cube-containment tests.
///
/// Supported shapes: an interval `[a,b]` in one dimension; an axis-aligned
/// rectangle, a closed disk, and an L-shape (a square with its open upper-right
/// quadrant removed) in two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// `[a, b] ⊂ ℝ`.
    Interval { a: f64, b: f64 },
    /// `[x0, x0+w] × [y0, y0+h] ⊂ ℝ²`.
    Rect { x0: f64, y0: f64, w: f64, h: f64 },
    /// Closed disk of radius `r` centered at `(cx, cy)`.
    Disk { cx: f64, cy: f64, r: f64 },
    /// `[x0, x0+s]²` minus the open quadrant `(x0+s/2, x0+s] × (y0+s/2, y0+s]`.
    LShape { x0: f64, y0: f64, s: f64 },
}

impl Region {
    /// Ambient dimension (1 for intervals, 2 otherwise).
    pub fn dimension(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Parse a region descriptor string.
    ///
    /// Grammar: `interval:a,b` · `box:x0,y0,w,h` · `disk:cx,cy,r` · `lshape:x0,y0,s`.
    pub fn parse(descriptor: &str) -> Result<Region> {
        let (kind, params) = descriptor
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("region descriptor `{descriptor}` lacks `kind:params`")))?;
        let nums: Vec<f64> = params
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("region parameter `{p}` is not a number")))
            })
            .collect::<Result<_>>()?;
        let expect = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "region `{kind}` needs {k} parameters, got {}",
                    nums.len()
                )))
            }
        };
        if !nums.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("region parameters must be finite: `{descriptor}`")));
        }
        let region = match kind {
            "interval" => {
                expect(2)?;
                if nums[1] <= nums[0] {
                    return Err(Error::InvalidInput(format!("interval needs a < b, got {},{}", nums[0], nums[1])));
                }
                Region::Interval { a: nums[0], b: nums[1] }
            }
            "box" => {
                expect(4)?;
                if nums[2] <= 0.0 || nums[3] <= 0.0 {
                    return Err(Error::InvalidInput("box needs positive side lengths".into()));
                }
                Region::Rect { x0: nums[0], y0: nums[1], w: nums[2], h: nums[3] }
            }
            "disk" => {
                expect(3)?;
                if nums[2] <= 0.0 {
                    return Err(Error::InvalidInput("disk needs a positive radius".into()));
                }
                Region::Disk { cx: nums[0], cy: nums[1], r: nums[2] }
            }
            "lshape" => {
                expect(3)?;
                if nums[2] <= 0.0 {
                    return Err(Error::InvalidInput("lshape needs a positive side length".into()));
                }
                Region::LShape { x0: nums[0], y0: nums[1], s: nums[2] }
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown region kind `{other}` (expected interval, box, disk, or lshape)"
                )))
            }
        };
        Ok(region)
    }

    /// Canonical descriptor string (round-trips through [`Region::parse`]).
    pub fn descriptor(&self) -> String {
        match self {
            Region::Interval { a, b } => format!("interval:{a},{b}"),
            Region::Rect { x0, y0, w, h } => format!("box:{x0},{y0},{w},{h}"),
            Region::Disk { cx, cy, r } => format!("disk:{cx},{cy},{r}"),
            Region::LShape { x0, y0, s } => format!("lshape:{x0},{y0},{s}"),
        }
    }

    /// Closed-set membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dimension(), "point dimension mismatch");
        match self {
            Region::Interval { a, b } => *a <= x[0] && x[0] <= *b,
            Region::Rect { x0, y0, w, h } => {
                *x0 <= x[0] && x[0] <= x0 + w && *y0 <= x[1] && x[1] <= y0 + h
            }
            Region::Disk { cx, cy, r } => {
                let dx = x[0] - cx;
                let dy = x[1] - cy;
                dx * dx + dy * dy <= r * r
            }
            Region::LShape { x0, y0, s } => {
                let half = s / 2.0;
                let in_left = *x0 <= x[0] && x[0] <= x0 + half && *y0 <= x[1] && x[1] <= y0 + s;
                let in_bottom = *x0 <= x[0] && x[0] <= x0 + s && *y0 <= x[1] && x[1] <= y0 + half;
                in_left || in_bottom
            }
        }
    }

    /// True iff the closed cube `corner + [0, side]ᵈ` lies inside the region.
    ///
    /// Exact for these parametric shapes: boxes componentwise, the disk by
    /// convexity (all `2ᵈ` corners inside suffices), the L-shape by
    /// decomposition into its two overlapping boxes.
    pub fn contains_cube(&self, corner: &[f64], side: f64) -> bool {
        assert_eq!(corner.len(), self.dimension(), "point dimension mismatch");
        assert!(side > 0.0, "cube side must be positive");
        match self {
            Region::Interval { a, b } => *a <= corner[0] && corner[0] + side <= *b,
            Region::Rect { x0, y0, w, h } => {
                *x0 <= corner[0]
                    && corner[0] + side <= x0 + w
                    && *y0 <= corner[1]
                    && corner[1] + side <= y0 + h
            }
            Region::Disk { .. } => {
                for ix in 0..2 {
                    for iy in 0..2 {
                        let c = [corner[0] + side * ix as f64, corner[1] + side * iy as f64];
                        if !self.contains(&c) {
                            return false;
                        }
                    }
                }
                true
            }
            Region::LShape { x0, y0, s } => {
                let half = s / 2.0;
                let left = Region::Rect { x0: *x0, y0: *y0, w: half, h: *s };
                let bottom = Region::Rect { x0: *x0, y0: *y0, w: *s, h: half };
                left.contains_cube(corner, side) || bottom.contains_cube(corner, side)
            }
        }
    }

    /// Axis-aligned bounding box as `(lower, upper)` corner vectors.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Interval { a, b } => (vec![*a], vec![*b]),
            Region::Rect { x0, y0, w, h } => (vec![*x0, *y0], vec![x0 + w, y0 + h]),
            Region::Disk { cx, cy, r } => (vec![cx - r, cy - r], vec![cx + r, cy + r]),
            Region::LShape { x0, y0, s } => (vec![*x0, *y0], vec![x0 + s, y0 + s]),
        }
    }
}

// ---------------------------------------------------------------------------
// point sets
// ---------------------------------------------------------------------------

/// An ordered list of pairwise-distinct points in `ℝᵈ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    /// Build from raw points, validating dimensions.
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<PointSet> {
        if dim == 0 {
            return Err(Error::InvalidInput("point dimension must be positive".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "point {p:?} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput(format!("point {p:?} has non-finite coordinates")));
            }
        }
        Ok(PointSet { dim, points })
    }

    /// Convenience constructor for one-dimensional point sets.
    pub fn from_scalars(xs: &[f64]) -> Result<PointSet> {
        PointSet::new(1, xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(|p| p.as_slice())
    }

    /// Translate every point by the offset vector `b`.
    pub fn translate(&self, b: &[f64]) -> Result<PointSet> {
        if b.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "offset has dimension {}, expected {}",
                b.len(),
                self.dim
            )));
        }
        let shifted = self
            .points
            .iter()
            .map(|p| p.iter().zip(b).map(|(x, o)| x + o).collect())
            .collect();
        PointSet::new(self.dim, shifted)
    }

    /// True iff every point of `self` occurs (with exact coordinates) in `other`.
    pub fn is_subset_of(&self, other: &PointSet) -> bool {
        self.points.iter().all(|p| other.points.contains(p))
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            ord => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

/// Euclidean distance between two points.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// grid sets
// ---------------------------------------------------------------------------

/// Enumerate the lattice `2⁻ˡᵉᵛᵉˡ·Zᵈ` restricted to the region's bounding box
/// (with one cell of margin) and keep the points passing `keep`.
fn lattice_scan(region: &Region, level: u32, keep: impl Fn(&[f64]) -> bool) -> Vec<Vec<f64>> {
    let d = region.dimension();
    let s = 0.5f64.powi(level as i32);
    let (lo, hi) = region.bounding_box();
    let ranges: Vec<(i64, i64)> = (0..d)
        .map(|i| (((lo[i] / s).floor() as i64) - 1, ((hi[i] / s).ceil() as i64) + 1))
        .collect();
    let mut out = Vec::new();
    match d {
        1 => {
            for k in ranges[0].0..=ranges[0].1 {
                let z = [k as f64 * s];
                if keep(&z) {
                    out.push(z.to_vec());
                }
            }
        }
        2 => {
            for kx in ranges[0].0..=ranges[0].1 {
                for ky in ranges[1].0..=ranges[1].1 {
                    let z = [kx as f64 * s, ky as f64 * s];
                    if keep(&z) {
                        out.push(z.to_vec());
                    }
                }
            }
        }
        _ => unreachable!("regions are one- or two-dimensional"),
    }
    out
}

/// The grid set `Z_n`: lattice points of spacing `2⁻ⁿ` whose closed cube of
/// side `2⁻ⁿ` fits inside the region, in lexicographic order.
pub fn grid_set(region: &Region, n: u32) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::InvalidInput("grid level must be at least 1".into()));
    }
    let s = 0.5f64.powi(n as i32);
    let mut pts = lattice_scan(region, n, |z| region.contains_cube(z, s));
    pts.sort_by(|a, b| lex_less(a, b));
    if pts.is_empty() {
        return Err(Error::EmptyGrid {
            region: region.descriptor(),
            side: s,
        });
    }
    PointSet::new(region.dimension(), pts)
}

/// A seeded quasi-uniform perturbation of `Z_n`: each grid point moves to an
/// independent uniform position inside the middle `(1-2·amplitude)`-fraction…
/// more precisely to `z + 2⁻ⁿ·(1/2 + amplitude·u)` per coordinate with
/// `u ~ U[-1,1)`, so points stay inside their cells and separation stays
/// bounded below by `(1-2·amplitude)·2⁻ⁿ`.
pub fn jittered_grid_set(region: &Region, n: u32, amplitude: f64, seed: u64) -> Result<PointSet> {
    if !(0.0..0.5).contains(&amplitude) {
        return Err(Error::InvalidInput(format!(
            "jitter amplitude must lie in [0, 0.5), got {amplitude}"
        )));
    }
    let base = grid_set(region, n)?;
    let s = 0.5f64.powi(n as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(base.len());
    for p in base.iter() {
        let q: Vec<f64> = p
            .iter()
            .map(|&z| {
                let u: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                z + s * (0.5 + amplitude * u)
            })
            .collect();
        pts.push(q);
    }
    PointSet::new(region.dimension(), pts)
}

// ---------------------------------------------------------------------------
// geometric quantities
// ---------------------------------------------------------------------------

/// Summary of a point set's geometry: separation `q`, fill distance `h`,
/// and the uniformity ratio `ρ = h/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub q: f64,
    pub h: f64,
    pub rho: f64,
}

/// Separation distance: half the minimum pairwise Euclidean distance.
pub fn separation_distance(x: &PointSet) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: x.len() });
    }
    let mut min = f64::INFINITY;
    let pts = x.points();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = distance(&pts[i], &pts[j]);
            if d < min {
                min = d;
            }
        }
    }
    Ok(0.5 * min)
}

/// Fill distance approximated on a probe lattice: the maximum, over lattice
/// points of spacing `2⁻ᵖʳᵒᵇᵉ` that lie in the region (boundary included), of
/// the distance to the nearest point of `X`.
pub fn fill_distance(x: &PointSet, region: &Region, probe_level: u32) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let probes = lattice_scan(region, probe_level, |z| region.contains(z));
    if probes.is_empty() {
        return Err(Error::EmptyGrid {
            region: region.descriptor(),
            side: 0.5f64.powi(probe_level as i32),
        });
    }
    let mut h = 0.0f64;
    for z in &probes {
        let mut nearest = f64::INFINITY;
        for p in x.iter() {
            let d = distance(z, p);
            if d < nearest {
                nearest = d;
            }
        }
        if nearest > h {
            h = nearest;
        }
    }
    Ok(h)
}

/// Separation, fill distance, and their ratio in one call.
pub fn uniformity(x: &PointSet, region: &Region, probe_level: u32) -> Result<GeometrySummary> {
    let q = separation_distance(x)?;
    let h = fill_distance(x, region, probe_level)?;
    Ok(GeometrySummary { q, h, rho: h / q })
}

// ---------------------------------------------------------------------------
// quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights of a quadrature rule over a region.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: PointSet,
    pub weights: Vec<f64>,
}

impl Quadrature {
    /// Apply the rule to tabulated values (one per node).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Composite midpoint rule on the cells of `grid_set(region, level)`: one node
/// at each cell center, weight `2^{-level·d}`. Nodes avoid the region boundary.
pub fn quadrature(region: &Region, level: u32) -> Result<Quadrature> {
    let cells = grid_set(region, level)?;
    let s = 0.5f64.powi(level as i32);
    let half = 0.5 * s;
    let d = region.dimension();
    let nodes: Vec<Vec<f64>> = cells
        .iter()
        .map(|z| z.iter().map(|&c| c + half).collect())
        .collect();
    let w = s.powi(d as i32);
    let weights = vec![w; nodes.len()];
    Ok(Quadrature {
        nodes: PointSet::new(d, nodes)?,
        weights,
    })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
