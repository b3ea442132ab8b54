//! Affine differential geometry of a convex body in the Gauss-map picture.
//!
//! Everything is a function of the unit normal z. The second fundamental form
//! is h = A[s], the Gauss curvature is K = det ĝ / det h, the affine metric is
//! ḡ = h / K^{1/(n+1)} and the affine measure is dμ̄ = K^{-n/(n+1)} dμ_sphere.
//!
//! The affine mean curvature is obtained from the curvature identity
//!
//! ```text
//! h^{ij} A[f]_ij = Δ̄(f K^{-1/(n+1)}) + f K^{-1/(n+1)} H
//! ```
//!
//! at f = s, where h^{ij} A[s]_ij = n − 1. For other f the identity is an
//! independent check, see [`identity_residual`].

use std::sync::Arc;

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::sphere::{
    divergence_laplacian, sphere_gradient, support_hessian, ScalarField, SphereGrid,
    SymTensorField,
};

const DET_GUARD: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct AffineData {
    body: ConvexBody,
    h: SymTensorField,
    h_inv: SymTensorField,
    curvature: ScalarField,
    /// K^{1/(n+1)}
    curvature_root: ScalarField,
    gbar: SymTensorField,
    gbar_inv: SymTensorField,
    mubar_density: ScalarField,
    mean_curvature: ScalarField,
}

impl AffineData {
    pub fn compute(body: &ConvexBody) -> Result<Self> {
        body.require_origin_inside()?;
        let grid = body.grid().clone();
        let n = grid.dim() as f64;
        let h = body.radii_tensor();
        let h_inv = h
            .inverse(DET_GUARD)
            .ok_or(Error::NonPositiveCurvature { node: 0 })?;
        let det_h = h.det();
        let det_g = SymTensorField::round_metric(&grid).det();
        let mut k = Vec::with_capacity(grid.len());
        for node in 0..grid.len() {
            let kv = det_g[node] / det_h[node];
            if !(kv > 0.0) || !kv.is_finite() {
                return Err(Error::NonPositiveCurvature { node });
            }
            k.push(kv);
        }
        let curvature = ScalarField::from_vec(grid.clone(), k);
        let curvature_root = curvature.map(|v| v.powf(1.0 / (n + 1.0)));
        let gbar = h.scale_by(&curvature_root.map(|r| 1.0 / r))?;
        let gbar_inv = h_inv.scale_by(&curvature_root)?;
        let mubar_density = curvature.map(|v| v.powf(-n / (n + 1.0)));

        let mut data = Self {
            body: body.clone(),
            h,
            h_inv,
            curvature,
            curvature_root,
            gbar,
            gbar_inv,
            mubar_density,
            mean_curvature: ScalarField::constant(&grid, 0.0),
        };
        let s = body.support();
        let s_over_root = s.zip_map(&data.curvature_root, |a, r| a / r)?;
        let lap = data.laplace_beltrami_bar(&s_over_root)?;
        let values = (0..grid.len())
            .map(|node| {
                let r = data.curvature_root.values()[node];
                r / s.values()[node] * ((n - 1.0) - lap.values()[node])
            })
            .collect();
        data.mean_curvature = ScalarField::new(grid, values)?;
        Ok(data)
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.body.grid()
    }

    /// h_ij = A[s]_ij
    pub fn h(&self) -> &SymTensorField {
        &self.h
    }

    pub fn h_inv(&self) -> &SymTensorField {
        &self.h_inv
    }

    /// Gauss curvature K as a function of the normal.
    pub fn curvature(&self) -> &ScalarField {
        &self.curvature
    }

    /// K^{1/(n+1)}
    pub fn curvature_root(&self) -> &ScalarField {
        &self.curvature_root
    }

    pub fn gbar(&self) -> &SymTensorField {
        &self.gbar
    }

    pub fn gbar_inv(&self) -> &SymTensorField {
        &self.gbar_inv
    }

    /// dμ̄ / dμ_sphere = K^{-n/(n+1)}
    pub fn mubar_density(&self) -> &ScalarField {
        &self.mubar_density
    }

    /// Affine mean curvature H.
    pub fn mean_curvature(&self) -> &ScalarField {
        &self.mean_curvature
    }

    /// Laplace–Beltrami operator of the affine metric.
    pub fn laplace_beltrami_bar(&self, f: &ScalarField) -> Result<ScalarField> {
        divergence_laplacian(f, &self.gbar_inv, &self.mubar_density)
    }

    /// |∇̄F|²_ḡ = ḡ^{ij} ∂_iF ∂_jF
    pub fn bar_gradient_normsq(&self, f: &ScalarField) -> Result<ScalarField> {
        if !f.grid().same_as(self.grid()) {
            return Err(Error::GridMismatch);
        }
        sphere_gradient(f).norm_sq_with(&self.gbar_inv)
    }

    /// ∫ F dμ̄
    pub fn integrate_affine(&self, f: &ScalarField) -> Result<f64> {
        crate::sphere::integrate_product(f, &self.mubar_density)
    }
}

/// Both sides of the curvature identity for a test function `f`.
#[derive(Clone, Debug)]
pub struct IdentityTerms {
    /// h^{ij} A[f]_ij
    pub lhs: ScalarField,
    /// Δ̄(f K^{-1/(n+1)})
    pub laplacian_term: ScalarField,
    /// f K^{-1/(n+1)} H
    pub curvature_term: ScalarField,
}

impl IdentityTerms {
    /// lhs − (laplacian_term + curvature_term)
    pub fn residual(&self) -> ScalarField {
        let rhs = self
            .laplacian_term
            .add(&self.curvature_term)
            .expect("same grid");
        self.lhs.sub(&rhs).expect("same grid")
    }

    /// Largest sup-norm among the three terms.
    pub fn scale(&self) -> f64 {
        self.lhs
            .sup_norm()
            .max(self.laplacian_term.sup_norm())
            .max(self.curvature_term.sup_norm())
    }
}

pub fn identity_terms(data: &AffineData, f: &ScalarField) -> Result<IdentityTerms> {
    if !f.grid().same_as(data.grid()) {
        return Err(Error::GridMismatch);
    }
    let lhs = data.h_inv.contract(&support_hessian(f))?;
    let big_f = f.zip_map(&data.curvature_root, |a, r| a / r)?;
    let laplacian_term = data.laplace_beltrami_bar(&big_f)?;
    let curvature_term = big_f.mul(&data.mean_curvature)?;
    Ok(IdentityTerms {
        lhs,
        laplacian_term,
        curvature_term,
    })
}

/// Pointwise LHS − RHS of the curvature identity.
pub fn identity_residual(data: &AffineData, f: &ScalarField) -> Result<ScalarField> {
    Ok(identity_terms(data, f)?.residual())
}

/// Classical affine curvature of a planar curve from its radius of curvature
/// ρ(θ) = s'' + s:  ρ^{-4/3} − ½ ρ^{-1} d/dθ(ρ^{-1} d/dθ ρ^{2/3}).
pub fn classical_affine_curvature_2d(body: &ConvexBody) -> Result<ScalarField> {
    let grid = body.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter(
            "classical affine curvature is planar only".into(),
        ));
    }
    let rho: Vec<f64> = body.radii_tensor().components().iter().map(|c| c[0]).collect();
    let rho23: Vec<f64> = rho.iter().map(|r| r.powf(2.0 / 3.0)).collect();
    let d1 = grid.d_lon(&rho23, 1);
    let inner: Vec<f64> = d1.iter().zip(&rho).map(|(d, r)| d / r).collect();
    let d2 = grid.d_lon(&inner, 1);
    let values = (0..grid.len())
        .map(|k| rho[k].powf(-4.0 / 3.0) - 0.5 * d2[k] / rho[k])
        .collect();
    ScalarField::new(grid.clone(), values)
}
