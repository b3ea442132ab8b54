//! Grids, quadrature and spectral differential operators on S¹ and S².
//!
//! A grid is a stack of latitude rings, each holding `nlon` equally spaced
//! longitudes. On the circle there is a single ring and the longitude is the
//! polar angle. On the two-sphere the rings sit at Gauss–Legendre colatitudes
//! (no ring at a pole), so the chart (θ, φ) is regular at every node.
//!
//! Longitude derivatives are taken with the FFT. Colatitude derivatives act on
//! each Fourier mode separately. The m-th mode of a smooth function on S² has
//! the form `sin^(m mod 2)θ · p(cos θ)` with `p` smooth, so even modes are
//! interpolated as polynomials in `x = cos θ` and odd modes after dividing out
//! one factor of `sin θ`. A θ-derivative swaps the two classes; fields carry a
//! [`Parity`] so the right interpolant is used for components of vectors.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const DEFAULT_CIRCLE_RESOLUTION: usize = 256;
pub const DEFAULT_SPHERE_BANDLIMIT: usize = 32;

/// Parity class of a field with respect to the colatitude interpolant.
///
/// Scalars on the sphere are `Even`. Their θ-derivative (and the θ-component of
/// any smooth tangent field in the orthonormal frame) is `Odd`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Discretization of S^{n-1} for n ∈ {2, 3}. Immutable once built.
pub struct SphereGrid {
    dim: usize,
    resolution: usize,
    nlat: usize,
    nlon: usize,
    colat: Vec<f64>,
    cos_colat: Vec<f64>,
    sin_colat: Vec<f64>,
    lon: Vec<f64>,
    weights: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    // nlat × nlat, row-major; empty on the circle
    d_even: Vec<f64>,
    d_odd: Vec<f64>,
    // per wavenumber m = 0..=nlon/2: projection onto span{P̄_l^m, l < nlat}
    proj: Vec<Vec<f64>>,
}

impl fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereGrid")
            .field("dim", &self.dim)
            .field("resolution", &self.resolution)
            .field("nlat", &self.nlat)
            .field("nlon", &self.nlon)
            .finish()
    }
}

impl SphereGrid {
    /// Grid for `dim` ∈ {2, 3}; `resolution` is N (points on S¹) or the bandlimit B.
    pub fn new(dim: usize, resolution: usize) -> Result<Arc<Self>> {
        match dim {
            2 => Self::circle(resolution),
            3 => Self::sphere(resolution),
            _ => Err(Error::InvalidParameter(format!(
                "dimension must be 2 or 3, got {dim}"
            ))),
        }
    }

    pub fn with_default_resolution(dim: usize) -> Result<Arc<Self>> {
        Self::new(dim, default_resolution(dim)?)
    }

    /// N equally spaced angles θ_k = 2πk/N. N must be even and at least 4.
    pub fn circle(n: usize) -> Result<Arc<Self>> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "circle resolution must be even and >= 4, got {n}"
            )));
        }
        let (fwd, inv) = plans(n);
        let lon: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        Ok(Arc::new(Self {
            dim: 2,
            resolution: n,
            nlat: 1,
            nlon: n,
            colat: vec![0.5 * PI],
            cos_colat: vec![0.0],
            sin_colat: vec![1.0],
            lon,
            weights: vec![2.0 * PI / n as f64; n],
            fwd,
            inv,
            d_even: Vec::new(),
            d_odd: Vec::new(),
            proj: Vec::new(),
        }))
    }

    /// 2B Gauss–Legendre colatitudes × 2B longitudes.
    pub fn sphere(bandlimit: usize) -> Result<Arc<Self>> {
        if bandlimit < 2 {
            return Err(Error::InvalidParameter(format!(
                "bandlimit must be >= 2, got {bandlimit}"
            )));
        }
        let nlat = 2 * bandlimit;
        let nlon = 2 * bandlimit;
        let rule = GaussLegendre::new(nlat)
            .map_err(|e| Error::InvalidParameter(format!("Gauss-Legendre rule: {e}")))?;
        let mut pairs = rule.into_node_weight_pairs();
        // descending x = cos θ, i.e. ascending colatitude
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let wx: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let colat: Vec<f64> = x.iter().map(|v| v.acos()).collect();
        let sin_colat: Vec<f64> = x.iter().map(|v| (1.0 - v * v).sqrt()).collect();

        let dx = lagrange_derivative_matrix(&x, &wx);
        let mut d_even = vec![0.0; nlat * nlat];
        let mut d_odd = vec![0.0; nlat * nlat];
        for i in 0..nlat {
            for j in 0..nlat {
                let d = dx[i * nlat + j];
                d_even[i * nlat + j] = -sin_colat[i] * d;
                d_odd[i * nlat + j] = -sin_colat[i] * sin_colat[i] * d / sin_colat[j];
            }
            d_odd[i * nlat + i] += x[i] / sin_colat[i];
        }

        let lmax = nlat - 1;
        let tables: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| crate::harmonics::normalized_legendre_table(lmax, xi))
            .collect();
        let proj = (0..=nlon / 2)
            .map(|m| {
                let mut p = vec![0.0; nlat * nlat];
                for i in 0..nlat {
                    for q in 0..nlat {
                        let acc: f64 = (m..=lmax)
                            .map(|l| tables[i][l * nlat + m] * tables[q][l * nlat + m])
                            .sum();
                        p[i * nlat + q] = 2.0 * PI * acc * wx[q];
                    }
                }
                p
            })
            .collect();

        let dphi = 2.0 * PI / nlon as f64;
        let mut weights = Vec::with_capacity(nlat * nlon);
        for w in &wx {
            weights.extend(std::iter::repeat_n(w * dphi, nlon));
        }
        let (fwd, inv) = plans(nlon);
        Ok(Arc::new(Self {
            dim: 3,
            resolution: bandlimit,
            nlat,
            nlon,
            colat,
            cos_colat: x,
            sin_colat,
            lon: (0..nlon).map(|j| j as f64 * dphi).collect(),
            weights,
            fwd,
            inv,
            d_even,
            d_odd,
            proj,
        }))
    }

    /// Ambient dimension n (the grid discretizes S^{n-1}).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nlat(&self) -> usize {
        self.nlat
    }

    pub fn nlon(&self) -> usize {
        self.nlon
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Colatitude of ring `i` (π/2 on the circle).
    pub fn colatitude(&self, i: usize) -> f64 {
        self.colat[i]
    }

    pub fn sin_colatitude(&self) -> &[f64] {
        &self.sin_colat
    }

    pub fn cos_colatitude(&self) -> &[f64] {
        &self.cos_colat
    }

    pub fn longitude(&self, j: usize) -> f64 {
        self.lon[j]
    }

    /// Chart coordinates of node `k`: (θ) on the circle, (colatitude, longitude) on S².
    pub fn chart(&self, k: usize) -> (f64, f64) {
        (self.colat[k / self.nlon], self.lon[k % self.nlon])
    }

    /// Unit normal z of node `k` embedded in R³ (third component zero on the circle).
    pub fn normal(&self, k: usize) -> [f64; 3] {
        let i = k / self.nlon;
        let phi = self.lon[k % self.nlon];
        let (s, c) = (self.sin_colat[i], self.cos_colat[i]);
        [s * phi.cos(), s * phi.sin(), c]
    }

    /// Index of the node at −z. Both grids are closed under the antipodal map.
    pub fn antipode(&self, k: usize) -> usize {
        let i = k / self.nlon;
        let j = (k % self.nlon + self.nlon / 2) % self.nlon;
        (self.nlat - 1 - i) * self.nlon + j
    }

    /// Surface measure |S^{n-1}|.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.dim)
    }

    pub fn same_as(&self, other: &SphereGrid) -> bool {
        std::ptr::eq(self, other) || (self.dim == other.dim && self.resolution == other.resolution)
    }

    /// Longitude derivative of the given order, per ring, via FFT.
    pub fn d_lon(&self, values: &[f64], order: u32) -> Vec<f64> {
        let mut spectra = self.ring_spectra(values);
        let nyq = self.nlon / 2;
        for row in spectra.chunks_mut(self.nlon) {
            for (j, c) in row.iter_mut().enumerate() {
                let m = signed_wavenumber(j, self.nlon) as f64;
                let factor = if j == nyq && order % 2 == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, m).powu(order)
                };
                *c *= factor;
            }
        }
        self.from_ring_spectra(spectra)
    }

    /// Colatitude derivative of a field of the given parity. The result has the
    /// opposite parity. On the circle this is the plain angular derivative.
    pub fn d_colat(&self, values: &[f64], parity: Parity) -> Vec<f64> {
        if self.dim == 2 {
            return self.d_lon(values, 1);
        }
        let spectra = self.ring_spectra(values);
        let (nlat, nlon) = (self.nlat, self.nlon);
        let mut out = vec![Complex64::new(0.0, 0.0); spectra.len()];
        for j in 0..nlon {
            let m = signed_wavenumber(j, nlon).unsigned_abs() as usize;
            let d = if (m + parity.bit()) % 2 == 0 {
                &self.d_even
            } else {
                &self.d_odd
            };
            for i in 0..nlat {
                let row = &d[i * nlat..(i + 1) * nlat];
                let mut acc = Complex64::new(0.0, 0.0);
                for (q, &dq) in row.iter().enumerate() {
                    acc += spectra[q * nlon + j] * dq;
                }
                out[i * nlon + j] = acc;
            }
        }
        self.from_ring_spectra(out)
    }

    /// Orthogonal projection of a scalar field onto the spherical harmonics the
    /// grid resolves (degree < nlat, |m| ≤ nlon/2). Removes roundoff in high
    /// wavenumbers near the poles, which derivatives would otherwise amplify by
    /// roughly m²/sin²θ. The identity on the circle.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        if self.dim == 2 {
            return values.to_vec();
        }
        let spectra = self.ring_spectra(values);
        let (nlat, nlon) = (self.nlat, self.nlon);
        let mut out = vec![Complex64::new(0.0, 0.0); spectra.len()];
        for j in 0..nlon {
            let m = signed_wavenumber(j, nlon).unsigned_abs() as usize;
            let p = &self.proj[m];
            for i in 0..nlat {
                let row = &p[i * nlat..(i + 1) * nlat];
                let mut acc = Complex64::new(0.0, 0.0);
                for (q, &pq) in row.iter().enumerate() {
                    acc += spectra[q * nlon + j] * pq;
                }
                out[i * nlon + j] = acc;
            }
        }
        self.from_ring_spectra(out)
    }

    /// Per-ring discrete Fourier coefficients (unnormalized forward FFT).
    pub(crate) fn ring_spectra(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for row in buf.chunks_mut(self.nlon) {
            self.fwd.process(row);
        }
        buf
    }

    fn from_ring_spectra(&self, mut spectra: Vec<Complex64>) -> Vec<f64> {
        for row in spectra.chunks_mut(self.nlon) {
            self.inv.process(row);
        }
        let scale = 1.0 / self.nlon as f64;
        spectra.iter().map(|c| c.re * scale).collect()
    }

    /// Trigonometric interpolation of a circle field at an arbitrary angle.
    pub fn interpolate_circle(&self, values: &[f64], theta: f64) -> Result<f64> {
        if self.dim != 2 {
            return Err(Error::InvalidParameter(
                "trigonometric interpolation is only defined on the circle".into(),
            ));
        }
        let spectra = self.ring_spectra(values);
        let n = self.nlon;
        let mut acc = spectra[0].re;
        for (j, c) in spectra.iter().enumerate().take(n / 2).skip(1) {
            let e = Complex64::from_polar(1.0, j as f64 * theta);
            acc += 2.0 * (c * e).re;
        }
        acc += spectra[n / 2].re * ((n / 2) as f64 * theta).cos();
        Ok(acc / n as f64)
    }
}

pub fn default_resolution(dim: usize) -> Result<usize> {
    match dim {
        2 => Ok(DEFAULT_CIRCLE_RESOLUTION),
        3 => Ok(DEFAULT_SPHERE_BANDLIMIT),
        _ => Err(Error::InvalidParameter(format!(
            "dimension must be 2 or 3, got {dim}"
        ))),
    }
}

/// |S^{n-1}|: 2π for n = 2, 4π for n = 3.
pub fn sphere_area(dim: usize) -> f64 {
    if dim == 2 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

fn signed_wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Derivative matrix of the Lagrange interpolant on Gauss–Legendre nodes, using
/// the closed-form barycentric weights (−1)^j √((1 − x_j²) w_j).
fn lagrange_derivative_matrix(x: &[f64], w: &[f64]) -> Vec<f64> {
    let n = x.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * ((1.0 - x[j] * x[j]) * w[j]).sqrt()
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (x[i] - x[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Real-valued function sampled on a grid.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec(grid: Arc<SphereGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: &Arc<SphereGrid>, c: f64) -> Self {
        Self::from_vec(grid.clone(), vec![c; grid.len()])
    }

    /// Samples `f(z)` at every node, with z the unit normal in R³ (z₃ = 0 on the circle).
    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.normal(k))).collect();
        Self::from_vec(grid.clone(), values)
    }

    /// Samples `f(θ, φ)` in chart coordinates (φ is ignored on the circle, θ is the angle).
    pub fn from_chart_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (t, p) = grid.chart(k);
                if grid.dim() == 2 {
                    f(p, 0.0)
                } else {
                    f(t, p)
                }
            })
            .collect();
        Self::from_vec(grid.clone(), values)
    }

    /// Linear function ⟨v, z⟩.
    pub fn linear(grid: &Arc<SphereGrid>, v: [f64; 3]) -> Self {
        Self::from_fn(grid, |z| v[0] * z[0] + v[1] * z[1] + v[2] * z[2])
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// See [`SphereGrid::project`].
    pub fn projected(&self) -> ScalarField {
        ScalarField::from_vec(self.grid.clone(), self.grid.project(&self.values))
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_vec(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `a·self + b·other`
    pub fn lin_comb(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// max |f(z) − f(−z)|
    pub fn evenness_defect(&self) -> f64 {
        (0..self.values.len()).fold(0.0, |m, k| {
            m.max((self.values[k] - self.values[self.grid.antipode(k)]).abs())
        })
    }
}

/// Per-node symmetric tensor in chart coordinates, stored as `[a11, a12, a22]`.
/// On the circle only `a11` is meaningful and the others are zero.
#[derive(Clone, Debug)]
pub struct SymTensorField {
    grid: Arc<SphereGrid>,
    comps: Vec<[f64; 3]>,
}

impl SymTensorField {
    pub(crate) fn from_vec(grid: Arc<SphereGrid>, comps: Vec<[f64; 3]>) -> Self {
        debug_assert_eq!(comps.len(), grid.len());
        Self { grid, comps }
    }

    /// The round metric ĝ: 1 on S¹, diag(1, sin²θ) on S².
    pub fn round_metric(grid: &Arc<SphereGrid>) -> Self {
        let comps = (0..grid.len())
            .map(|k| round_metric_at(grid, k))
            .collect();
        Self::from_vec(grid.clone(), comps)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn components(&self) -> &[[f64; 3]] {
        &self.comps
    }

    pub fn at(&self, k: usize) -> [f64; 3] {
        self.comps[k]
    }

    /// Chart determinant per node.
    pub fn det(&self) -> Vec<f64> {
        let rank1 = self.grid.dim() == 2;
        self.comps.iter().map(|&c| sym_det(c, rank1)).collect()
    }

    /// Pointwise inverse; `None` where |det| < `guard`.
    pub fn inverse(&self, guard: f64) -> Option<Self> {
        let rank1 = self.grid.dim() == 2;
        let comps: Option<Vec<[f64; 3]>> = self
            .comps
            .iter()
            .map(|&c| sym_inverse(c, rank1, guard))
            .collect();
        comps.map(|c| Self::from_vec(self.grid.clone(), c))
    }

    pub fn add(&self, other: &SymTensorField) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])
            .collect();
        Ok(Self::from_vec(self.grid.clone(), comps))
    }

    /// Multiplies node k by `factor[k]`.
    pub fn scale_by(&self, factor: &ScalarField) -> Result<Self> {
        if !self.grid.same_as(factor.grid()) {
            return Err(Error::GridMismatch);
        }
        let comps = self
            .comps
            .iter()
            .zip(factor.values())
            .map(|(a, &f)| [a[0] * f, a[1] * f, a[2] * f])
            .collect();
        Ok(Self::from_vec(self.grid.clone(), comps))
    }

    /// Contraction T^{ij} S_{ij} with another (lower-index) tensor.
    pub fn contract(&self, other: &SymTensorField) -> Result<ScalarField> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a[0] * b[0] + 2.0 * a[1] * b[1] + a[2] * b[2])
            .collect();
        Ok(ScalarField::from_vec(self.grid.clone(), values))
    }

    /// Eigenvalues of the tensor relative to ĝ (i.e. of ĝ^{-1}T), ascending.
    pub fn eigenvalues_wrt_round(&self) -> Vec<[f64; 2]> {
        (0..self.comps.len())
            .map(|k| {
                let c = self.comps[k];
                if self.grid.dim() == 2 {
                    return [c[0], c[0]];
                }
                let s = self.grid.sin_colat[k / self.grid.nlon];
                // orthonormal frame components
                let (a, b, d) = (c[0], c[1] / s, c[2] / (s * s));
                sym2_eigen(a, b, d)
            })
            .collect()
    }

    /// Smallest eigenvalue relative to ĝ over all nodes, and the largest.
    pub fn eigen_range(&self) -> (f64, f64) {
        self.eigenvalues_wrt_round()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(e[0]), hi.max(e[1]))
            })
    }
}

pub(crate) fn round_metric_at(grid: &SphereGrid, k: usize) -> [f64; 3] {
    if grid.dim == 2 {
        [1.0, 0.0, 0.0]
    } else {
        let s = grid.sin_colat[k / grid.nlon];
        [1.0, 0.0, s * s]
    }
}

pub(crate) fn sym_det(c: [f64; 3], rank1: bool) -> f64 {
    if rank1 {
        c[0]
    } else {
        c[0] * c[2] - c[1] * c[1]
    }
}

pub(crate) fn sym_inverse(c: [f64; 3], rank1: bool, guard: f64) -> Option<[f64; 3]> {
    let det = sym_det(c, rank1);
    if det.abs() < guard {
        return None;
    }
    if rank1 {
        Some([1.0 / det, 0.0, 0.0])
    } else {
        Some([c[2] / det, -c[1] / det, c[0] / det])
    }
}

fn sym2_eigen(a: f64, b: f64, d: f64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mean - r, mean + r]
}

/// Per-node chart covector: `[∂θ f, 0]` on the circle, `[∂θ f, ∂φ f]` on S².
#[derive(Clone, Debug)]
pub struct CovectorField {
    grid: Arc<SphereGrid>,
    comps: Vec<[f64; 2]>,
}

impl CovectorField {
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn components(&self) -> &[[f64; 2]] {
        &self.comps
    }

    pub fn at(&self, k: usize) -> [f64; 2] {
        self.comps[k]
    }

    /// Contraction G^{ij} ω_i ω_j with an upper-index tensor.
    pub fn norm_sq_with(&self, inv_metric: &SymTensorField) -> Result<ScalarField> {
        if !self.grid.same_as(inv_metric.grid()) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .comps
            .iter()
            .zip(inv_metric.components())
            .map(|(w, g)| g[0] * w[0] * w[0] + 2.0 * g[1] * w[0] * w[1] + g[2] * w[1] * w[1])
            .collect();
        Ok(ScalarField::from_vec(self.grid.clone(), values))
    }
}

/// Chart partials of `f`.
pub fn sphere_gradient(f: &ScalarField) -> CovectorField {
    let grid = f.grid().clone();
    let ft = grid.d_colat(f.values(), Parity::Even);
    let comps = if grid.dim() == 2 {
        ft.into_iter().map(|a| [a, 0.0]).collect()
    } else {
        let fp = grid.d_lon(f.values(), 1);
        ft.into_iter().zip(fp).map(|(a, b)| [a, b]).collect()
    };
    CovectorField { grid, comps }
}

/// Covariant Hessian ∇̂²f of the round metric in chart components.
pub fn covariant_hessian(f: &ScalarField) -> SymTensorField {
    let grid = f.grid().clone();
    let v = f.values();
    if grid.dim() == 2 {
        let ftt = grid.d_lon(v, 2);
        return SymTensorField::from_vec(grid, ftt.into_iter().map(|a| [a, 0.0, 0.0]).collect());
    }
    let ft = grid.d_colat(v, Parity::Even);
    let ftt = grid.d_colat(&ft, Parity::Odd);
    let fp = grid.d_lon(v, 1);
    let fpp = grid.d_lon(v, 2);
    let ftp = grid.d_colat(&fp, Parity::Even);
    let nlon = grid.nlon();
    let comps = (0..grid.len())
        .map(|k| {
            let i = k / nlon;
            let (s, c) = (grid.sin_colat[i], grid.cos_colat[i]);
            [ftt[k], ftp[k] - c / s * fp[k], fpp[k] + s * c * ft[k]]
        })
        .collect();
    SymTensorField::from_vec(grid, comps)
}

/// A[f] = ∇̂²f + ĝ f. Linear in f and annihilates linear functions ⟨v, z⟩.
pub fn support_hessian(f: &ScalarField) -> SymTensorField {
    let mut t = covariant_hessian(f);
    let grid = t.grid.clone();
    for (k, c) in t.comps.iter_mut().enumerate() {
        let g = round_metric_at(&grid, k);
        let fk = f.values[k];
        c[0] += g[0] * fk;
        c[1] += g[1] * fk;
        c[2] += g[2] * fk;
    }
    t
}

/// Round Laplace–Beltrami operator, as the ĝ-trace of the covariant Hessian.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let hess = covariant_hessian(f);
    let ginv = SymTensorField::round_metric(f.grid())
        .inverse(0.0)
        .expect("round metric is invertible off the poles");
    ginv.contract(&hess).expect("same grid")
}

/// Divergence-form operator ρ_g^{-1} ∂_i(ρ_g G^{ij} ∂_j f), where `inv_metric` is
/// G^{ij} and `density` is √det G_{ij} / √det ĝ_{ij}. With G = ĝ and density 1 this
/// is the round Laplacian.
pub fn divergence_laplacian(
    f: &ScalarField,
    inv_metric: &SymTensorField,
    density: &ScalarField,
) -> Result<ScalarField> {
    f.check_same_grid(density)?;
    if !f.grid().same_as(inv_metric.grid()) {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid().clone();
    let grad = sphere_gradient(&f.projected());
    let g = inv_metric.components();
    let rho = density.values();
    if grid.dim() == 2 {
        let flux: Vec<f64> = (0..grid.len())
            .map(|k| rho[k] * g[k][0] * grad.comps[k][0])
            .collect();
        let div = grid.d_lon(&flux, 1);
        let values = div.iter().zip(rho).map(|(d, r)| d / r).collect();
        return Ok(ScalarField::from_vec(grid, values));
    }
    let nlon = grid.nlon();
    let mut flux_t = vec![0.0; grid.len()];
    let mut flux_p = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        let s = grid.sin_colat[k / nlon];
        let [ft, fp] = grad.comps[k];
        let w = s * rho[k];
        flux_t[k] = w * (g[k][0] * ft + g[k][1] * fp);
        flux_p[k] = w * (g[k][1] * ft + g[k][2] * fp);
    }
    // sin θ · (θ-component of a tangent field) is parity-even
    let dt = grid.d_colat(&flux_t, Parity::Even);
    let dp = grid.d_lon(&flux_p, 1);
    let values = (0..grid.len())
        .map(|k| (dt[k] + dp[k]) / (grid.sin_colat[k / nlon] * rho[k]))
        .collect();
    Ok(ScalarField::from_vec(grid, values))
}

/// Quadrature Σ w_k f_k over the sphere.
pub fn integrate(f: &ScalarField) -> f64 {
    f.values()
        .iter()
        .zip(f.grid().weights())
        .map(|(v, w)| v * w)
        .sum()
}

/// Σ w_k f_k g_k
pub fn integrate_product(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    f.check_same_grid(g)?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .zip(f.grid().weights())
        .map(|((a, b), w)| a * b * w)
        .sum())
}
