//! Smooth strictly convex bodies represented by their support functions.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::Harmonics;
use crate::sphere::{integrate, support_hessian, ScalarField, SphereGrid, SymTensorField};

/// Bodies whose smallest radius of curvature falls below this fraction of the
/// largest are rejected.
pub const MARGIN_REL_THRESHOLD: f64 = 1e-8;

const RANDOM_BODY_RETRIES: usize = 8;
/// Random bodies keep the smallest radius of curvature at least this large, so
/// K stays well resolved on the default grids.
pub const RANDOM_BODY_MIN_MARGIN: f64 = 0.25;

/// Support function together with its convexity certificate: the smallest
/// eigenvalue of A[s] = ∇̂²s + ĝs (relative to ĝ) over all nodes.
#[derive(Clone, Debug)]
pub struct ConvexBody {
    support: ScalarField,
    margin: f64,
    max_radius: f64,
}

/// (smallest, largest) eigenvalue of A[s] relative to ĝ over the grid.
pub fn convexity_range(s: &ScalarField) -> (f64, f64) {
    support_hessian(s).eigen_range()
}

impl ConvexBody {
    /// Validates `s`, rejecting it unless A[s] is uniformly positive definite.
    pub fn from_support(s: ScalarField) -> Result<Self> {
        let (margin, max_radius) = convexity_range(&s);
        let threshold = MARGIN_REL_THRESHOLD * max_radius.abs().max(f64::MIN_POSITIVE);
        if !(margin > 0.0 && margin >= threshold) {
            return Err(Error::NotConvex { margin, threshold });
        }
        Ok(Self {
            support: s,
            margin,
            max_radius,
        })
    }

    pub fn ball(radius: f64, grid: &Arc<SphereGrid>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Self::from_support(ScalarField::constant(grid, radius))
    }

    /// Centred ellipsoid with the given semiaxes (2 on the circle, 3 on S²).
    pub fn ellipsoid(axes: &[f64], grid: &Arc<SphereGrid>) -> Result<Self> {
        if axes.len() != grid.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected {} semiaxes, got {}",
                grid.dim(),
                axes.len()
            )));
        }
        if axes.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "semiaxes must be positive, got {axes:?}"
            )));
        }
        let a = [axes[0], axes[1], axes.get(2).copied().unwrap_or(0.0)];
        Self::from_support(ScalarField::from_fn(grid, |z| {
            (0..3).map(|d| a[d] * a[d] * z[d] * z[d]).sum::<f64>().sqrt()
        }))
    }

    /// Samples a band-limited support function.
    pub fn from_harmonics(h: &Harmonics, grid: &Arc<SphereGrid>) -> Result<Self> {
        Self::from_support(h.sample(grid)?)
    }

    /// `1 + ε·p` with `p` a seeded random band-limited field of degree ≤ `degree`
    /// and sup-norm at most one. `ε` is halved until the convexity margin is at
    /// least [`RANDOM_BODY_MIN_MARGIN`].
    pub fn random(
        seed: u64,
        degree: usize,
        amplitude: f64,
        even: bool,
        grid: &Arc<SphereGrid>,
    ) -> Result<Self> {
        Ok(random_body_with_shape(seed, degree, amplitude, even, grid)?.0)
    }

    pub fn support(&self) -> &ScalarField {
        &self.support
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.support.grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    /// Minimum eigenvalue of A[s] relative to ĝ (smallest radius of curvature).
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub fn min_support(&self) -> f64 {
        self.support.min()
    }

    /// A[s], the second fundamental form h_ij in the sphere picture.
    pub fn radii_tensor(&self) -> SymTensorField {
        support_hessian(&self.support)
    }

    /// Enclosed area (n = 2) or volume (n = 3): (1/n)∫ s·det_ĝ A[s].
    pub fn volume(&self) -> f64 {
        let grid = self.grid();
        let a = self.radii_tensor();
        let g = SymTensorField::round_metric(grid);
        let det_a = a.det();
        let det_g = g.det();
        let integrand: Vec<f64> = (0..grid.len())
            .map(|k| self.support.values()[k] * det_a[k] / det_g[k])
            .collect();
        integrate(&ScalarField::from_vec(grid.clone(), integrand)) / grid.dim() as f64
    }

    pub fn minkowski_sum(&self, other: &ConvexBody) -> Result<Self> {
        Self::from_support(self.support.add(&other.support)?)
    }

    /// s ← s + ⟨v, z⟩
    pub fn translate(&self, v: [f64; 3]) -> Result<Self> {
        let lin = ScalarField::linear(self.grid(), v);
        Self::from_support(self.support.add(&lin)?)
    }

    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {lambda}"
            )));
        }
        Self::from_support(self.support.scale(lambda))
    }

    /// Steiner point (n/|S^{n-1}|)∫ s(z) z dμ.
    pub fn steiner_point(&self) -> [f64; 3] {
        let grid = self.grid();
        let factor = grid.dim() as f64 / grid.sphere_area();
        let mut p = [0.0; 3];
        for k in 0..grid.len() {
            let z = grid.normal(k);
            let w = grid.weights()[k] * self.support.values()[k];
            for d in 0..3 {
                p[d] += w * z[d];
            }
        }
        p.map(|c| c * factor)
    }

    /// Translates the Steiner point to the origin.
    pub fn recentre(&self) -> Result<Self> {
        let p = self.steiner_point();
        self.translate([-p[0], -p[1], -p[2]])
    }

    /// Errors unless s > 0 at every node.
    pub fn require_origin_inside(&self) -> Result<()> {
        let min = self.min_support();
        if min > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveSupport { min })
        }
    }

    /// Image under the planar linear map `m`: s'(z) = |mᵀz|·s(mᵀz/|mᵀz|).
    pub fn linear_image_2d(&self, m: [[f64; 2]; 2]) -> Result<Self> {
        let grid = self.grid();
        if grid.dim() != 2 {
            return Err(Error::InvalidParameter(
                "linear images are only implemented for planar bodies".into(),
            ));
        }
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            let (w, angle) = transpose_direction(m, grid.longitude(k));
            values.push(w * grid.interpolate_circle(self.support.values(), angle)?);
        }
        Self::from_support(ScalarField::new(grid.clone(), values)?)
    }
}

/// Moves a field on the circle along with the linear map `m`: the value at the
/// normal of the image body equals the value at the corresponding normal of the
/// original, F'(z) = F(mᵀz/|mᵀz|).
pub fn pullback_circle_field(f: &ScalarField, m: [[f64; 2]; 2]) -> Result<ScalarField> {
    let grid = f.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter(
            "circle pullback on a non-circle grid".into(),
        ));
    }
    let mut values = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let (_, angle) = transpose_direction(m, grid.longitude(k));
        values.push(grid.interpolate_circle(f.values(), angle)?);
    }
    ScalarField::new(grid.clone(), values)
}

fn transpose_direction(m: [[f64; 2]; 2], theta: f64) -> (f64, f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let x = m[0][0] * c + m[1][0] * s;
    let y = m[0][1] * c + m[1][1] * s;
    (x.hypot(y), y.atan2(x))
}

/// Random body plus the band-limited coefficients it was sampled from, so the
/// same body can be resampled on another grid.
pub fn random_body_with_shape(
    seed: u64,
    degree: usize,
    amplitude: f64,
    even: bool,
    grid: &Arc<SphereGrid>,
) -> Result<(ConvexBody, Harmonics)> {
    if !(amplitude >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "amplitude must be nonnegative, got {amplitude}"
        )));
    }
    let perturbation = random_harmonics(seed, grid.dim(), degree, even, 1)?;
    let mut eps = amplitude;
    for _ in 0..=RANDOM_BODY_RETRIES {
        let shape = perturbation.scaled(eps).shifted(1.0);
        if let Ok(body) = ConvexBody::from_harmonics(&shape, grid) {
            if body.margin() >= RANDOM_BODY_MIN_MARGIN {
                return Ok((body, shape));
            }
        }
        eps *= 0.5;
    }
    Err(Error::ConvexityUnattainable {
        attempts: RANDOM_BODY_RETRIES + 1,
    })
}

/// Seeded random coefficients of degree in `[min_degree, degree]`, scaled so the
/// field has sup-norm at most one. With `even`, only even degrees are used and
/// the field satisfies f(−z) = f(z).
pub fn random_harmonics(
    seed: u64,
    dim: usize,
    degree: usize,
    even: bool,
    min_degree: usize,
) -> Result<Harmonics> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = Harmonics::zero(dim, degree)?;
    let keep = |l: usize| l >= min_degree && (!even || l % 2 == 0);
    match &mut h {
        Harmonics::Fourier(c) => {
            for l in 1..=degree {
                let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if keep(l) {
                    c[2 * l - 1] = a;
                    c[2 * l] = b;
                }
            }
            if keep(0) {
                c[0] = rng.gen_range(-1.0..1.0);
            }
        }
        Harmonics::Spherical(c) => {
            for l in 0..=degree {
                for m in 0..=2 * l {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    if keep(l) {
                        c[l * l + m] = v;
                    }
                }
            }
        }
    }
    let bound = h.sup_bound();
    Ok(if bound > 0.0 { h.scaled(1.0 / bound) } else { h })
}

pub const BODY_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    /// Support-function samples on the grid of the given resolution.
    Grid,
    /// Fourier coefficients `[a0, a1, b1, ...]` (n = 2).
    Fourier,
    /// Real spherical-harmonic coefficients, index l² + l + m (n = 3).
    Sh,
}

/// On-disk body document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyFile {
    pub format: u32,
    pub dim: usize,
    pub kind: BodyKind,
    pub resolution: usize,
    pub data: Vec<f64>,
}

impl BodyFile {
    pub fn from_body(body: &ConvexBody) -> Self {
        Self {
            format: BODY_FORMAT_VERSION,
            dim: body.dim(),
            kind: BodyKind::Grid,
            resolution: body.grid().resolution(),
            data: body.support().values().to_vec(),
        }
    }

    pub fn from_harmonics(h: &Harmonics, resolution: usize) -> Self {
        let kind = match h {
            Harmonics::Fourier(_) => BodyKind::Fourier,
            Harmonics::Spherical(_) => BodyKind::Sh,
        };
        Self {
            format: BODY_FORMAT_VERSION,
            dim: h.dim(),
            kind,
            resolution,
            data: h.coeffs().to_vec(),
        }
    }

    fn check_header(&self) -> Result<()> {
        if self.format != BODY_FORMAT_VERSION {
            return Err(Error::BodyFile(format!(
                "unsupported format version {}",
                self.format
            )));
        }
        match (self.dim, self.kind) {
            (2 | 3, BodyKind::Grid) | (2, BodyKind::Fourier) | (3, BodyKind::Sh) => Ok(()),
            (d, k) => Err(Error::BodyFile(format!("kind {k:?} is invalid for dim {d}"))),
        }
    }

    /// Support function on the file's own grid (or on `grid`, which must match
    /// the dimension and, for sampled data, the resolution).
    pub fn support(&self, grid: Option<&Arc<SphereGrid>>) -> Result<ScalarField> {
        self.check_header()?;
        let grid = match grid {
            Some(g) => {
                if g.dim() != self.dim {
                    return Err(Error::BodyFile(format!(
                        "file has dim {}, grid has dim {}",
                        self.dim,
                        g.dim()
                    )));
                }
                g.clone()
            }
            None => SphereGrid::new(self.dim, self.resolution)?,
        };
        match self.kind {
            BodyKind::Grid => {
                if grid.resolution() != self.resolution {
                    return Err(Error::BodyFile(format!(
                        "sampled at resolution {}, requested {}",
                        self.resolution,
                        grid.resolution()
                    )));
                }
                ScalarField::new(grid, self.data.clone())
                    .map_err(|e| Error::BodyFile(e.to_string()))
            }
            BodyKind::Fourier => {
                if self.data.is_empty() {
                    return Err(Error::BodyFile("empty coefficient list".into()));
                }
                Harmonics::Fourier(self.data.clone()).sample(&grid)
            }
            BodyKind::Sh => {
                if self.data.is_empty() {
                    return Err(Error::BodyFile("empty coefficient list".into()));
                }
                Harmonics::Spherical(self.data.clone()).sample(&grid)
            }
        }
    }

    pub fn to_body(&self, grid: Option<&Arc<SphereGrid>>) -> Result<ConvexBody> {
        ConvexBody::from_support(self.support(grid)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::BodyFile(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
