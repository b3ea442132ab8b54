//! Band-limited functions given by spectral coefficients: Fourier series on the
//! circle and real orthonormal spherical harmonics on S².

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{ScalarField, SphereGrid};

/// Coefficient layout:
/// - `Fourier`: `[a0, a1, b1, a2, b2, ...]` for `a0 + Σ a_k cos kθ + b_k sin kθ`.
/// - `Spherical`: index `l² + l + m` for the real harmonic Y_l^m, `-l ≤ m ≤ l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", content = "coeffs", rename_all = "lowercase")]
pub enum Harmonics {
    Fourier(Vec<f64>),
    Spherical(Vec<f64>),
}

impl Harmonics {
    pub fn dim(&self) -> usize {
        match self {
            Harmonics::Fourier(_) => 2,
            Harmonics::Spherical(_) => 3,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        match self {
            Harmonics::Fourier(c) | Harmonics::Spherical(c) => c,
        }
    }

    /// Highest degree represented by the coefficient vector.
    pub fn degree(&self) -> usize {
        match self {
            Harmonics::Fourier(c) => c.len() / 2,
            Harmonics::Spherical(c) => ((c.len() as f64).sqrt().ceil() as usize).saturating_sub(1),
        }
    }

    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        match dim {
            2 => Ok(Harmonics::Fourier(vec![0.0; 2 * degree + 1])),
            3 => Ok(Harmonics::Spherical(vec![0.0; (degree + 1) * (degree + 1)])),
            _ => Err(Error::InvalidParameter(format!("dimension {dim}"))),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Harmonics::Fourier(v) => Harmonics::Fourier(v.iter().map(|x| c * x).collect()),
            Harmonics::Spherical(v) => Harmonics::Spherical(v.iter().map(|x| c * x).collect()),
        }
    }

    /// Adds `c` to the constant mode.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Harmonics::Fourier(v) => v[0] += c,
            // Y_0^0 = 1/√(4π)
            Harmonics::Spherical(v) => v[0] += c * (4.0 * PI).sqrt(),
        }
        out
    }

    /// Adds ⟨v, z⟩, the support-function change of a translation by v.
    pub fn translated(&self, v: [f64; 3]) -> Self {
        let mut out = self.clone();
        match &mut out {
            Harmonics::Fourier(c) => {
                if c.len() < 3 {
                    c.resize(3, 0.0);
                }
                c[1] += v[0];
                c[2] += v[1];
            }
            Harmonics::Spherical(c) => {
                if c.len() < 4 {
                    c.resize(4, 0.0);
                }
                // Y_1^{-1}, Y_1^0, Y_1^1 = √(3/4π)·(y, z, x)
                let k = (4.0 * PI / 3.0).sqrt();
                c[1] += k * v[1];
                c[2] += k * v[2];
                c[3] += k * v[0];
            }
        }
        out
    }

    /// Upper bound on the sup-norm: Σ|c|·sup|basis function|.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Harmonics::Fourier(v) => v.iter().map(|x| x.abs()).sum(),
            Harmonics::Spherical(v) => v
                .iter()
                .enumerate()
                .map(|(idx, x)| {
                    let l = (idx as f64).sqrt().floor();
                    x.abs() * ((2.0 * l + 1.0) / (4.0 * PI)).sqrt()
                })
                .sum(),
        }
    }

    pub fn sample(&self, grid: &Arc<SphereGrid>) -> Result<ScalarField> {
        if grid.dim() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "{}-dimensional coefficients on a {}-dimensional grid",
                self.dim(),
                grid.dim()
            )));
        }
        match self {
            Harmonics::Fourier(c) => Ok(ScalarField::from_chart_fn(grid, |t, _| {
                fourier_eval(c, t)
            })),
            Harmonics::Spherical(c) => {
                let lmax = self.degree();
                let nlon = grid.nlon();
                let mut values = vec![0.0; grid.len()];
                for i in 0..grid.nlat() {
                    let x = grid.cos_colatitude()[i];
                    let plm = normalized_legendre_table(lmax, x);
                    for j in 0..nlon {
                        let phi = grid.longitude(j);
                        let mut acc = 0.0;
                        for (idx, &coef) in c.iter().enumerate() {
                            if coef == 0.0 {
                                continue;
                            }
                            let l = (idx as f64).sqrt().floor() as usize;
                            let m = idx as i64 - (l * l + l) as i64;
                            acc += coef * real_harmonic_from_table(&plm, lmax, l, m, phi);
                        }
                        values[i * nlon + j] = acc;
                    }
                }
                ScalarField::new(grid.clone(), values)
            }
        }
    }
}

fn fourier_eval(c: &[f64], t: f64) -> f64 {
    let mut acc = c[0];
    for k in 1..=c.len() / 2 {
        let kt = k as f64 * t;
        acc += c[2 * k - 1] * kt.cos();
        if 2 * k < c.len() {
            acc += c[2 * k] * kt.sin();
        }
    }
    acc
}

/// Orthonormal associated Legendre functions P̄_l^m(x), m ≥ 0, no Condon–Shortley
/// phase, normalized so that P̄_l^m(cos θ)·{1, √2 cos mφ, √2 sin mφ} is orthonormal
/// on S². Entry `l*(lmax+1) + m`.
pub fn normalized_legendre_table(lmax: usize, x: f64) -> Vec<f64> {
    let stride = lmax + 1;
    let mut p = vec![0.0; stride * stride];
    let s = (1.0 - x * x).max(0.0).sqrt();
    p[0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        p[m * stride + m] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[(m - 1) * stride + m - 1];
    }
    for m in 0..lmax {
        let mf = m as f64;
        p[(m + 1) * stride + m] = (2.0 * mf + 3.0).sqrt() * x * p[m * stride + m];
        for l in m + 2..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[l * stride + m] = a * (x * p[(l - 1) * stride + m] - b * p[(l - 2) * stride + m]);
        }
    }
    p
}

fn real_harmonic_from_table(plm: &[f64], lmax: usize, l: usize, m: i64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    let p = plm[l * (lmax + 1) + am];
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => p,
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * p * (m as f64 * phi).cos(),
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * p * (am as f64 * phi).sin(),
    }
}

/// Real orthonormal spherical harmonic Y_l^m(θ, φ).
pub fn real_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    assert!(m.unsigned_abs() as usize <= l);
    let table = normalized_legendre_table(l, theta.cos());
    real_harmonic_from_table(&table, l, l, m, phi)
}
