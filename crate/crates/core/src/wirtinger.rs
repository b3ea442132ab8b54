//! The affine Wirtinger inequality
//!
//! ```text
//! ∫ F² H dμ̄ ≤ (n−1)/n · (∫ F dμ̄)² / Vol + ∫ |∇̄F|²_ḡ dμ̄
//! ```
//!
//! evaluated in the sphere picture (F is pulled back by the Gauss map), and the
//! mixed-volume route that proves it.

use serde::Serialize;

use crate::affine::AffineData;
use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::mixed::mixed_volume;
use crate::sphere::{integrate_product, ScalarField};

/// |slack| ≤ this fraction of the scale marks equality.
pub const EQUALITY_REL_TOL: f64 = 1e-6;
const SCALE_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WirtingerReport {
    /// ∫ F² H dμ̄
    pub lhs: f64,
    /// (n−1)/n (∫ F dμ̄)² / Vol
    pub mean_term: f64,
    /// ∫ |∇̄F|² dμ̄
    pub dirichlet_term: f64,
    /// mean_term + dirichlet_term − lhs
    pub slack: f64,
    pub equality_flag: bool,
}

impl WirtingerReport {
    pub fn scale(&self) -> f64 {
        self.lhs.abs() + self.mean_term + self.dirichlet_term + SCALE_FLOOR
    }

    pub fn relative_slack(&self) -> f64 {
        self.slack / self.scale()
    }
}

pub fn wirtinger_report(data: &AffineData, f: &ScalarField) -> Result<WirtingerReport> {
    if !f.grid().same_as(data.grid()) {
        return Err(Error::GridMismatch);
    }
    let n = data.grid().dim() as f64;
    let mu = data.mubar_density();
    let f2h = f.zip_map(data.mean_curvature(), |a, h| a * a * h)?;
    let lhs = integrate_product(&f2h, mu)?;
    let mean = integrate_product(f, mu)?;
    let volume = data.body().volume();
    let mean_term = (n - 1.0) / n * mean * mean / volume;
    let dirichlet_term = integrate_product(&data.bar_gradient_normsq(f)?, mu)?;
    let slack = mean_term + dirichlet_term - lhs;
    let scale = lhs.abs() + mean_term + dirichlet_term + SCALE_FLOOR;
    Ok(WirtingerReport {
        lhs,
        mean_term,
        dirichlet_term,
        slack,
        equality_flag: slack.abs() <= EQUALITY_REL_TOL * scale,
    })
}

/// Convenience wrapper computing the affine data first.
pub fn wirtinger_report_for(body: &ConvexBody, f: &ScalarField) -> Result<WirtingerReport> {
    wirtinger_report(&AffineData::compute(body)?, f)
}

/// F = (c·s + ⟨v, z⟩) / K^{1/(n+1)}, an equality case of the inequality.
pub fn equality_witness(data: &AffineData, c: f64, v: [f64; 3]) -> Result<ScalarField> {
    let lin = ScalarField::linear(data.grid(), v);
    let f = data.body().support().lin_comb(c, &lin, 1.0)?;
    f.zip_map(data.curvature_root(), |a, r| a / r)
}

/// F = (c·s + d) / K^{1/(n+1)} with a scalar d.
pub fn scalar_shift_witness(data: &AffineData, c: f64, d: f64) -> Result<ScalarField> {
    let f = data.body().support().map(|s| c * s + d);
    f.zip_map(data.curvature_root(), |a, r| a / r)
}

/// f := F·K^{1/(n+1)}
pub fn sphere_density(data: &AffineData, f: &ScalarField) -> Result<ScalarField> {
    f.mul(data.curvature_root())
}

/// Extra mixed-volume arguments (s repeated n−2 times).
fn repeated_support(data: &AffineData) -> Vec<&ScalarField> {
    vec![data.body().support(); data.grid().dim() - 2]
}

/// |(n−1)·V[f, f, s, …, s] − (lhs − dirichlet_term)| with f = F·K^{1/(n+1)}:
/// the sphere-side mixed volume against the affine-side integrals.
pub fn proof_chain_check(data: &AffineData, f: &ScalarField) -> Result<f64> {
    let report = wirtinger_report(data, f)?;
    let small_f = sphere_density(data, f)?;
    let mut rest = vec![&small_f];
    rest.extend(repeated_support(data));
    let v = mixed_volume(&small_f, &rest)?;
    let n = data.grid().dim() as f64;
    Ok(((n - 1.0) * v - (report.lhs - report.dirichlet_term)).abs())
}

/// (|V[f, s, …, s] − ∫F dμ̄|, |V[s, …, s] − n·Vol|)
pub fn companion_identities(data: &AffineData, f: &ScalarField) -> Result<(f64, f64)> {
    let s = data.body().support();
    let small_f = sphere_density(data, f)?;
    let mut rest = vec![s];
    rest.extend(repeated_support(data));
    let vf = mixed_volume(&small_f, &rest)?;
    let vs = mixed_volume(s, &rest)?;
    let integral = data.integrate_affine(f)?;
    let n = data.grid().dim() as f64;
    Ok(((vf - integral).abs(), (vs - n * data.body().volume()).abs()))
}

#[derive(Clone, Debug, Serialize)]
pub struct WirtingerRow {
    pub body_id: String,
    #[serde(rename = "F_id")]
    pub f_id: String,
    pub lhs: f64,
    pub mean_term: f64,
    pub dirichlet_term: f64,
    pub slack: f64,
    pub equality_flag: bool,
}

impl WirtingerRow {
    pub fn new(body_id: impl Into<String>, f_id: impl Into<String>, r: &WirtingerReport) -> Self {
        Self {
            body_id: body_id.into(),
            f_id: f_id.into(),
            lhs: r.lhs,
            mean_term: r.mean_term,
            dirichlet_term: r.dirichlet_term,
            slack: r.slack,
            equality_flag: r.equality_flag,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SphereGrid;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_constant_function() {
        for (dim, res, expect) in [(2, 32, 2.0 * PI), (3, 8, 8.0 * PI)] {
            let grid = SphereGrid::new(dim, res).unwrap();
            let data = AffineData::compute(&ConvexBody::ball(1.0, &grid).unwrap()).unwrap();
            let r = wirtinger_report(&data, &ScalarField::constant(&grid, 1.0)).unwrap();
            assert!((r.lhs - expect).abs() < 1e-8);
            assert!((r.mean_term - expect).abs() < 1e-8);
            assert!(r.dirichlet_term.abs() < 1e-12);
            assert!(r.equality_flag);
        }
    }

    #[test]
    fn zero_witness_gives_zero_terms() {
        let grid = SphereGrid::circle(32).unwrap();
        let data = AffineData::compute(&ConvexBody::ellipsoid(&[1.3, 0.8], &grid).unwrap()).unwrap();
        let f = equality_witness(&data, 0.0, [0.0; 3]).unwrap();
        let r = wirtinger_report(&data, &f).unwrap();
        assert_eq!((r.lhs, r.mean_term, r.dirichlet_term, r.slack), (0.0, 0.0, 0.0, 0.0));
        assert!(r.equality_flag);
        assert_eq!(proof_chain_check(&data, &f).unwrap(), 0.0);
    }

    #[test]
    fn nonconstant_function_on_ball_has_positive_slack() {
        let grid = SphereGrid::sphere(8).unwrap();
        let data = AffineData::compute(&ConvexBody::ball(1.0, &grid).unwrap()).unwrap();
        // degree-2 harmonic: ∫F = 0, ∫F²H = 2∫F², Dirichlet = 6∫F²
        let f = ScalarField::from_fn(&grid, |z| 3.0 * z[2] * z[2] - 1.0);
        let r = wirtinger_report(&data, &f).unwrap();
        assert!(r.mean_term.abs() < 1e-12);
        assert!((r.dirichlet_term - 3.0 * r.lhs).abs() < 1e-10);
        assert!(r.slack > 0.0 && !r.equality_flag);
    }
}
