//! Mixed curvature functions, mixed volumes and Minkowski's inequality.
//!
//! Normalization: V[s, s, …, s] = n·Vol, with
//! V[s₀, s₁, …, s_{n−1}] = ∫ s₀ Q[s₁, …, s_{n−1}] dμ_sphere and Q the mixed
//! discriminant of the tensors A[s_i] with one index raised by ĝ.

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::sphere::{integrate_product, support_hessian, ScalarField, SymTensorField};

/// Mixed discriminant of two 2×2 matrices (row = upper index, column = lower):
/// ½(a₁d₂ + a₂d₁ − b₁c₂ − c₁b₂). Reduces to det M when both are M.
pub fn mixed_discriminant_2x2(m1: [[f64; 2]; 2], m2: [[f64; 2]; 2]) -> f64 {
    0.5 * (m1[0][0] * m2[1][1] + m1[1][1] * m2[0][0] - m1[0][1] * m2[1][0] - m1[1][0] * m2[0][1])
}

/// Raises the first index of a lower-index chart tensor with ĝ.
fn raise(c: [f64; 3], sin2: f64) -> [[f64; 2]; 2] {
    [[c[0], c[1]], [c[1] / sin2, c[2] / sin2]]
}

/// Pointwise mixed discriminant of n−1 lower-index tensors (index raised by ĝ).
pub fn mixed_discriminant(tensors: &[&SymTensorField]) -> Result<ScalarField> {
    let first = tensors
        .first()
        .ok_or_else(|| Error::InvalidParameter("no tensors".into()))?;
    let grid = first.grid().clone();
    if tensors.len() != grid.dim() - 1 {
        return Err(Error::InvalidParameter(format!(
            "mixed discriminant on S^{} takes {} tensors, got {}",
            grid.dim() - 1,
            grid.dim() - 1,
            tensors.len()
        )));
    }
    if tensors.iter().any(|t| !t.grid().same_as(&grid)) {
        return Err(Error::GridMismatch);
    }
    let values = if grid.dim() == 2 {
        first.components().iter().map(|c| c[0]).collect()
    } else {
        let nlon = grid.nlon();
        (0..grid.len())
            .map(|k| {
                let s2 = grid.sin_colatitude()[k / nlon].powi(2);
                mixed_discriminant_2x2(raise(tensors[0].at(k), s2), raise(tensors[1].at(k), s2))
            })
            .collect()
    };
    ScalarField::new(grid, values)
}

/// Q[s₁, …, s_{n−1}]. The arguments need not be convex.
pub fn mixed_curvature(fields: &[&ScalarField]) -> Result<ScalarField> {
    if let Some(first) = fields.first() {
        for f in &fields[1..] {
            first.check_same_grid(f)?;
        }
    }
    let tensors: Vec<SymTensorField> = fields.iter().map(|f| support_hessian(f)).collect();
    let refs: Vec<&SymTensorField> = tensors.iter().collect();
    mixed_discriminant(&refs)
}

#[derive(Clone, Debug)]
pub struct MixedVolumeResult {
    pub value: f64,
    pub arguments: Vec<String>,
}

impl MixedVolumeResult {
    pub const NORMALIZATION: &'static str = "V[s,...,s] = n Vol";
}

/// V[s₀, s₁, …, s_{n−1}] = ∫ s₀ Q[s₁, …, s_{n−1}].
pub fn mixed_volume(s0: &ScalarField, rest: &[&ScalarField]) -> Result<f64> {
    let q = mixed_curvature(rest)?;
    integrate_product(s0, &q)
}

/// Labelled variant of [`mixed_volume`].
pub fn mixed_volume_labelled(
    fields: &[(&str, &ScalarField)],
) -> Result<MixedVolumeResult> {
    let (_, s0) = fields
        .first()
        .ok_or_else(|| Error::InvalidParameter("no arguments".into()))?;
    let rest: Vec<&ScalarField> = fields[1..].iter().map(|(_, f)| *f).collect();
    Ok(MixedVolumeResult {
        value: mixed_volume(s0, &rest)?,
        arguments: fields.iter().map(|(n, _)| n.to_string()).collect(),
    })
}

/// V[s, h, c…]² / V[s, s, c…] − V[h, h, c…], where c… are the n−2 extra bodies
/// (defaulting to `body` itself). Nonnegative by Minkowski's inequality.
pub fn minkowski_slack(h: &ScalarField, body: &ConvexBody, extra: &[&ConvexBody]) -> Result<f64> {
    let s = body.support();
    h.check_same_grid(s)?;
    let needed = body.dim() - 2;
    let fixed: Vec<&ScalarField> = if extra.is_empty() {
        vec![s; needed]
    } else if extra.len() == needed {
        extra.iter().map(|b| b.support()).collect()
    } else {
        return Err(Error::InvalidParameter(format!(
            "expected {needed} extra bodies, got {}",
            extra.len()
        )));
    };
    fn with<'a>(a: &'a ScalarField, fixed: &[&'a ScalarField]) -> Vec<&'a ScalarField> {
        let mut v = vec![a];
        v.extend(fixed.iter().copied());
        v
    }
    let vss = mixed_volume(s, &with(s, &fixed))?;
    if !(vss > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "V[s,s,...] = {vss} is not positive"
        )));
    }
    let vsh = mixed_volume(s, &with(h, &fixed))?;
    let vhh = mixed_volume(h, &with(h, &fixed))?;
    Ok(vsh * vsh / vss - vhh)
}

/// Coefficient matrix Q̇^{ij} of the linear operator f ↦ Q[f, s₁, …, s_{n−2}],
/// so that Q[f, …] = Q̇^{ij} A[f]_ij. `fixed` must have n−2 entries.
pub fn mixed_curvature_symbol(
    grid: &std::sync::Arc<crate::sphere::SphereGrid>,
    fixed: &[&ScalarField],
) -> Result<SymTensorField> {
    if fixed.len() != grid.dim() - 2 {
        return Err(Error::InvalidParameter(format!(
            "expected {} fixed fields, got {}",
            grid.dim() - 2,
            fixed.len()
        )));
    }
    if grid.dim() == 2 {
        return Ok(SymTensorField::round_metric(grid).inverse(0.0).expect("invertible"));
    }
    if !fixed[0].grid().same_as(grid) {
        return Err(Error::GridMismatch);
    }
    let a = support_hessian(fixed[0]);
    let nlon = grid.nlon();
    let comps = (0..grid.len())
        .map(|k| {
            let s2 = grid.sin_colatitude()[k / nlon].powi(2);
            let c = a.at(k);
            [0.5 * c[2] / s2, -0.5 * c[1] / s2, 0.5 * c[0] / s2]
        })
        .collect();
    Ok(SymTensorField::from_vec(grid.clone(), comps))
}

/// Smallest eigenvalue of Q̇ (relative to ĝ^{-1}) over the grid.
pub fn symbol_min_eigenvalue(symbol: &SymTensorField) -> f64 {
    let grid = symbol.grid();
    if grid.dim() == 2 {
        return symbol.components().iter().map(|c| c[0]).fold(f64::INFINITY, f64::min);
    }
    let nlon = grid.nlon();
    (0..grid.len())
        .map(|k| {
            let s = grid.sin_colatitude()[k / nlon];
            let c = symbol.at(k);
            // orthonormal-frame components of an upper-index tensor
            let (a, b, d) = (c[0], c[1] * s, c[2] * s * s);
            let mean = 0.5 * (a + d);
            mean - (0.25 * (a - d) * (a - d) + b * b).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}
