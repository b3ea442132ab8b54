//! Curvature flows of convex bodies solved as scalar PDEs for the support
//! function on the fixed sphere grid.
//!
//! - weighted affine normal flow: ∂ₜs = −F·K^{1/(n+1)}
//! - p-centro-affine flow: ∂ₜs = −s (K / s^{n+1})^{p/(p+n)}
//! - weighted p-centro-affine flow: ∂ₜs = −Φ s (K / s^{n+1})^{p/(p+n)}
//!
//! Time stepping is classical RK4 with a convexity/positivity guard that halves
//! the step on failure.

use std::sync::Arc;

use serde::Serialize;

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::sphere::{integrate, laplacian, support_hessian, ScalarField, SphereGrid, SymTensorField};

pub const DT_MIN: f64 = 1e-9;
/// Fraction of the explicit RK4 stability limit used by [`stable_dt`].
const STABILITY_SAFETY: f64 = 0.5;
const RK4_REAL_AXIS_LIMIT: f64 = 2.78;

#[derive(Clone, Debug)]
pub enum FlowKind {
    /// Speed F·K^{1/(n+1)} with F a fixed function of the normal.
    WeightedAffine { weight: ScalarField },
    PCentroAffine { p: f64 },
    /// Φ must be positive and even.
    WeightedPCentroAffine { p: f64, phi: ScalarField },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    None,
    /// Rescale after every step to the initial volume.
    FixedVolume,
}

#[derive(Clone, Debug)]
pub struct FlowParams {
    kind: FlowKind,
    normalization: Normalization,
}

impl FlowParams {
    pub fn new(kind: FlowKind, normalization: Normalization) -> Result<Self> {
        match &kind {
            FlowKind::WeightedAffine { .. } => {}
            FlowKind::PCentroAffine { p } => check_p(*p)?,
            FlowKind::WeightedPCentroAffine { p, phi } => {
                check_p(*p)?;
                validate_phi(phi)?;
            }
        }
        Ok(Self {
            kind,
            normalization,
        })
    }

    pub fn kind(&self) -> &FlowKind {
        &self.kind
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn p(&self) -> Option<f64> {
        match &self.kind {
            FlowKind::WeightedAffine { .. } => None,
            FlowKind::PCentroAffine { p } | FlowKind::WeightedPCentroAffine { p, .. } => Some(*p),
        }
    }

    pub fn phi(&self) -> Option<&ScalarField> {
        match &self.kind {
            FlowKind::WeightedPCentroAffine { phi, .. } => Some(phi),
            _ => None,
        }
    }

    fn needs_positive_support(&self) -> bool {
        !matches!(self.kind, FlowKind::WeightedAffine { .. })
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")))
    }
}

/// Φ must be positive and even on the grid.
pub fn validate_phi(phi: &ScalarField) -> Result<()> {
    if !(phi.min() > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weight must be positive, min {}",
            phi.min()
        )));
    }
    let defect = phi.evenness_defect();
    if defect > 1e-12 * phi.sup_norm() {
        return Err(Error::InvalidParameter(format!(
            "weight must be even, max |Φ(z) − Φ(−z)| = {defect:e}"
        )));
    }
    Ok(())
}

/// 1 + ε cos 4θ, with θ the angle on S¹ or the colatitude on S².
pub fn phi_cos4(grid: &Arc<SphereGrid>, eps: f64) -> ScalarField {
    if grid.dim() == 2 {
        ScalarField::from_chart_fn(grid, |t, _| 1.0 + eps * (4.0 * t).cos())
    } else {
        // cos 4θ = 8z⁴ − 8z² + 1 is smooth on S²
        ScalarField::from_fn(grid, |z| 1.0 + eps * (8.0 * z[2].powi(4) - 8.0 * z[2] * z[2] + 1.0))
    }
}

/// Gauss curvature K = det ĝ / det A[s], failing where A[s] is not positive definite.
pub fn gauss_curvature(s: &ScalarField) -> Result<ScalarField> {
    let a = support_hessian(s);
    let grid = s.grid();
    let det_a = a.det();
    let det_g = SymTensorField::round_metric(grid).det();
    let (margin, _) = a.eigen_range();
    if !(margin > 0.0) {
        let node = det_a.iter().position(|d| !(*d > 0.0)).unwrap_or(0);
        return Err(Error::NonPositiveCurvature { node });
    }
    ScalarField::new(
        grid.clone(),
        det_g.iter().zip(&det_a).map(|(g, a)| g / a).collect(),
    )
}

/// The speed is projected onto the resolved harmonics so that the explicit
/// step never excites the spurious high-wavenumber modes near the poles.
fn speed(s: &ScalarField, params: &FlowParams) -> Result<ScalarField> {
    Ok(raw_speed(s, params)?.projected())
}

fn raw_speed(s: &ScalarField, params: &FlowParams) -> Result<ScalarField> {
    let n = s.grid().dim() as f64;
    let k = gauss_curvature(s)?;
    match &params.kind {
        FlowKind::WeightedAffine { weight } => {
            weight.zip_map(&k, |f, kv| -f * kv.powf(1.0 / (n + 1.0)))
        }
        FlowKind::PCentroAffine { p } | FlowKind::WeightedPCentroAffine { p, .. } => {
            let min = s.min();
            if !(min > 0.0) {
                return Err(Error::NonPositiveSupport { min });
            }
            let expo = p / (p + n);
            let base = s.zip_map(&k, |sv, kv| -sv * (kv / sv.powf(n + 1.0)).powf(expo))?;
            match params.phi() {
                Some(phi) => base.mul(phi),
                None => Ok(base),
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowState {
    body: ConvexBody,
    t: f64,
    params: Arc<FlowParams>,
    reference_volume: f64,
}

impl FlowState {
    pub fn new(body: ConvexBody, params: FlowParams) -> Result<Self> {
        if let Some(phi) = params.phi() {
            phi.check_same_grid(body.support())?;
        }
        if let FlowKind::WeightedAffine { weight } = &params.kind {
            weight.check_same_grid(body.support())?;
        }
        if params.needs_positive_support() {
            body.require_origin_inside()?;
        }
        let reference_volume = body.volume();
        Ok(Self {
            body,
            t: 0.0,
            params: Arc::new(params),
            reference_volume,
        })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    /// (Weighted) p-affine isoperimetric ratio; `None` for the weighted affine flow.
    pub fn ratio(&self) -> Result<Option<f64>> {
        match self.params.p() {
            Some(p) => p_affine_ratio(&self.body, p, self.params.phi()).map(Some),
            None => Ok(None),
        }
    }
}

/// ∂ₜs for the current state.
pub fn rhs(state: &FlowState) -> Result<ScalarField> {
    speed(state.body.support(), &state.params)
}

/// Outcome of one accepted step.
#[derive(Clone, Debug)]
pub struct Step {
    pub state: FlowState,
    /// Step size actually taken (≤ requested).
    pub dt: f64,
}

/// One RK4 step, halving `dt` until the result is convex (and s > 0 for the
/// centro-affine flows), down to [`DT_MIN`].
pub fn step(state: &FlowState, dt: f64) -> Result<Step> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let mut h = dt;
    loop {
        if let Ok(next) = try_rk4(state, h) {
            return Ok(Step { state: next, dt: h });
        }
        h *= 0.5;
        if h < DT_MIN {
            return Err(Error::StepUnderflow { t: state.t, dt: h });
        }
    }
}

fn try_rk4(state: &FlowState, dt: f64) -> Result<FlowState> {
    let s0 = state.body.support();
    let params = &state.params;
    let k1 = speed(s0, params)?;
    let k2 = speed(&s0.lin_comb(1.0, &k1, 0.5 * dt)?, params)?;
    let k3 = speed(&s0.lin_comb(1.0, &k2, 0.5 * dt)?, params)?;
    let k4 = speed(&s0.lin_comb(1.0, &k3, dt)?, params)?;
    let values: Vec<f64> = (0..s0.values().len())
        .map(|i| {
            s0.values()[i]
                + dt / 6.0
                    * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i])
        })
        .collect();
    let mut body = ConvexBody::from_support(ScalarField::new(s0.grid().clone(), values)?)?;
    if params.needs_positive_support() {
        body.require_origin_inside()?;
    }
    if params.normalization == Normalization::FixedVolume {
        let n = body.dim() as f64;
        body = body.scale((state.reference_volume / body.volume()).powf(1.0 / n))?;
    }
    Ok(FlowState {
        body,
        t: state.t + dt,
        params: state.params.clone(),
        reference_volume: state.reference_volume,
    })
}

/// Largest |eigenvalue| of the discrete round Laplacian restricted to the
/// resolved harmonics (power iteration).
pub fn laplacian_spectral_radius(grid: &Arc<SphereGrid>) -> f64 {
    // deterministic start vector with energy in every mode
    let mut v = ScalarField::from_fn(grid, |z| {
        ((17.0 * z[0] + 5.0 * z[1] + 3.0 * z[2]).sin() + 0.3 * (31.0 * z[0] * z[1]).cos()).tanh()
    });
    let mut lambda = 0.0;
    for _ in 0..60 {
        let w = laplacian(&v).projected();
        let norm = w.sup_norm();
        if norm == 0.0 {
            break;
        }
        lambda = norm / v.sup_norm();
        v = w.scale(1.0 / norm);
    }
    lambda
}

/// Step size for explicit RK4 from the linearized diffusion coefficient of the flow.
pub fn stable_dt(state: &FlowState) -> Result<f64> {
    let s = state.body.support();
    let grid = s.grid();
    let n = grid.dim() as f64;
    let v = rhs(state)?;
    let gain = match &state.params.kind {
        FlowKind::WeightedAffine { .. } => 1.0 / (n + 1.0),
        FlowKind::PCentroAffine { p } | FlowKind::WeightedPCentroAffine { p, .. } => p / (p + n),
    };
    let diffusion = gain * v.sup_norm() / state.body.margin();
    let radius = laplacian_spectral_radius(grid);
    Ok(STABILITY_SAFETY * RK4_REAL_AXIS_LIMIT / (diffusion * radius).max(f64::MIN_POSITIVE))
}

/// ∫ Φ (s/K)(K/s^{n+1})^{p/(n+p)} dμ / Vol^{(n−p)/(n+p)}
pub fn p_affine_ratio(body: &ConvexBody, p: f64, phi: Option<&ScalarField>) -> Result<f64> {
    body.require_origin_inside()?;
    let s = body.support();
    let n = body.dim() as f64;
    let k = gauss_curvature(s)?;
    let expo = p / (n + p);
    let mut integrand = s.zip_map(&k, |sv, kv| sv / kv * (kv / sv.powf(n + 1.0)).powf(expo))?;
    if let Some(phi) = phi {
        integrand = integrand.mul(phi)?;
    }
    Ok(integrate(&integrand) / body.volume().powf((n - p) / (n + p)))
}

/// ‖s^{n+1}/K − Ψ‖_∞ for the L_{−n} Minkowski problem.
pub fn lminusn_residual(body: &ConvexBody, psi: &ScalarField) -> Result<f64> {
    body.require_origin_inside()?;
    let s = body.support();
    psi.check_same_grid(s)?;
    let n = body.dim() as f64;
    let k = gauss_curvature(s)?;
    let lhs = s.zip_map(&k, |sv, kv| sv.powf(n + 1.0) / kv)?;
    Ok(lhs.sub(psi)?.sup_norm())
}

/// K·h^{ij}A[f]_ij, the rate of change of K when ∂ₜs = −f.
pub fn predicted_curvature_rate(body: &ConvexBody, f: &ScalarField) -> Result<ScalarField> {
    let s = body.support();
    f.check_same_grid(s)?;
    let k = gauss_curvature(s)?;
    let h_inv = body
        .radii_tensor()
        .inverse(1e-14)
        .ok_or(Error::NonPositiveCurvature { node: 0 })?;
    h_inv.contract(&support_hessian(f))?.mul(&k)
}

/// Central difference (K(t+dt) − K(t−dt))/(2dt) along ∂ₜs = −f.
pub fn central_curvature_rate(body: &ConvexBody, f: &ScalarField, dt: f64) -> Result<ScalarField> {
    let s = body.support();
    f.check_same_grid(s)?;
    let forward = gauss_curvature(&s.lin_comb(1.0, f, -dt)?)?;
    let backward = gauss_curvature(&s.lin_comb(1.0, f, dt)?)?;
    Ok(forward.sub(&backward)?.scale(0.5 / dt))
}

/// Sup-norm gap between the finite-difference and predicted ∂ₜK.
pub fn evolution_check(body: &ConvexBody, f: &ScalarField, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let fd = central_curvature_rate(body, f, dt)?;
    let exact = predicted_curvature_rate(body, f)?;
    Ok(fd.sub(&exact)?.sup_norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub volume: f64,
    pub ratio: f64,
    pub min_margin: f64,
    pub min_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
}

impl FlowTrace {
    /// Smallest relative ratio change per unit time between consecutive rows:
    /// min (r_{k+1} − r_k) / (r_k (t_{k+1} − t_k)).
    pub fn min_ratio_delta(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| (w[1].ratio - w[0].ratio) / (w[0].ratio.abs() * (w[1].t - w[0].t)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Ratio nondecreasing up to `tol` (relative, per unit time).
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.rows.len() < 2 || self.min_ratio_delta() >= -tol
    }
}

#[derive(Clone, Debug)]
pub struct FlowRun {
    pub trace: FlowTrace,
    pub final_state: FlowState,
    pub accepted_steps: usize,
    /// Largest max|s(z) − s(−z)| seen along the run.
    pub max_evenness_defect: f64,
    /// Set when the step size underflowed before `t_end`.
    pub stopped_early: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub t_end: f64,
    /// Requested step; `None` uses [`stable_dt`] at the start.
    pub dt0: Option<f64>,
    pub record_every: usize,
    pub max_steps: usize,
    pub psi: Option<ScalarField>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            t_end: 0.01,
            dt0: None,
            record_every: 1,
            max_steps: 1_000_000,
            psi: None,
        }
    }
}

fn trace_row(state: &FlowState, psi: Option<&ScalarField>) -> Result<TraceRow> {
    let body = &state.body;
    Ok(TraceRow {
        t: state.t,
        volume: body.volume(),
        ratio: state.ratio()?.unwrap_or(f64::NAN),
        min_margin: body.margin(),
        min_s: body.min_support(),
        residual: psi.map(|p| lminusn_residual(body, p)).transpose()?,
    })
}

/// Integrates to `t_end`, recording every `record_every` accepted steps (and the endpoints).
pub fn run(initial: FlowState, opts: &RunOptions) -> Result<FlowRun> {
    if opts.record_every == 0 {
        return Err(Error::InvalidParameter("record_every must be >= 1".into()));
    }
    let dt0 = match opts.dt0 {
        Some(dt) => dt,
        None => stable_dt(&initial)?,
    };
    let psi = opts.psi.as_ref();
    let mut trace = FlowTrace {
        rows: vec![trace_row(&initial, psi)?],
    };
    let mut state = initial;
    let mut steps = 0;
    let mut defect = state.body.support().evenness_defect();
    let mut stopped_early = None;
    while state.t < opts.t_end && steps < opts.max_steps {
        let dt = dt0.min(opts.t_end - state.t);
        match step(&state, dt) {
            Ok(next) => {
                state = next.state;
                steps += 1;
                defect = defect.max(state.body.support().evenness_defect());
                if steps % opts.record_every == 0 {
                    trace.rows.push(trace_row(&state, psi)?);
                }
            }
            Err(e @ Error::StepUnderflow { .. }) => {
                stopped_early = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if trace.rows.last().map(|r| r.t) != Some(state.t) {
        trace.rows.push(trace_row(&state, psi)?);
    }
    Ok(FlowRun {
        trace,
        final_state: state,
        accepted_steps: steps,
        max_evenness_defect: defect,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p_flow(p: f64, norm: Normalization) -> FlowParams {
        FlowParams::new(FlowKind::PCentroAffine { p }, norm).unwrap()
    }

    #[test]
    fn ball_speed_closed_form() {
        let grid = SphereGrid::circle(32).unwrap();
        let r: f64 = 1.7;
        let state = FlowState::new(ConvexBody::ball(r, &grid).unwrap(), p_flow(1.0, Normalization::None)).unwrap();
        let v = rhs(&state).unwrap();
        for x in v.values() {
            assert!((x + r.powf(-1.0 / 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_affine_with_unit_weight_is_affine_normal_speed() {
        let grid = SphereGrid::sphere(6).unwrap();
        let body = ConvexBody::ellipsoid(&[1.2, 1.0, 0.9], &grid).unwrap();
        let params = FlowParams::new(
            FlowKind::WeightedAffine {
                weight: ScalarField::constant(&grid, 1.0),
            },
            Normalization::None,
        )
        .unwrap();
        let state = FlowState::new(body.clone(), params.clone()).unwrap();
        let v = raw_speed(body.support(), &params).unwrap();
        let k = gauss_curvature(body.support()).unwrap();
        for (a, b) in v.values().iter().zip(k.values()) {
            assert!((a + b.powf(0.25)).abs() < 1e-14);
        }
        assert_eq!(rhs(&state).unwrap().values(), v.projected().values());
    }

    #[test]
    fn unit_weight_equals_unweighted() {
        let grid = SphereGrid::circle(64).unwrap();
        let body = ConvexBody::random(4, 4, 0.1, true, &grid).unwrap();
        let a = FlowState::new(body.clone(), p_flow(2.0, Normalization::None)).unwrap();
        let b = FlowState::new(
            body,
            FlowParams::new(
                FlowKind::WeightedPCentroAffine {
                    p: 2.0,
                    phi: ScalarField::constant(&grid, 1.0),
                },
                Normalization::None,
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(rhs(&a).unwrap().values(), rhs(&b).unwrap().values());
    }

    #[test]
    fn unit_ball_ratio() {
        let grid = SphereGrid::circle(32).unwrap();
        let b = ConvexBody::ball(1.0, &grid).unwrap();
        let r = p_affine_ratio(&b, 1.0, None).unwrap();
        assert!((r - 2.0 * PI / PI.powf(1.0 / 3.0)).abs() < 1e-12);
        let psi = ScalarField::constant(&grid, 1.0);
        assert!(lminusn_residual(&b, &psi).unwrap() < 1e-13);
    }

    #[test]
    fn invalid_parameters() {
        let grid = SphereGrid::circle(16).unwrap();
        assert!(FlowParams::new(FlowKind::PCentroAffine { p: 0.5 }, Normalization::None).is_err());
        let odd = ScalarField::from_chart_fn(&grid, |t, _| 1.0 + 0.1 * t.cos());
        assert!(FlowParams::new(
            FlowKind::WeightedPCentroAffine { p: 1.0, phi: odd },
            Normalization::None
        )
        .is_err());
        let neg = ScalarField::constant(&grid, -1.0);
        assert!(FlowParams::new(
            FlowKind::WeightedPCentroAffine { p: 1.0, phi: neg },
            Normalization::None
        )
        .is_err());
        let state =
            FlowState::new(ConvexBody::ball(1.0, &grid).unwrap(), p_flow(1.0, Normalization::None)).unwrap();
        assert!(step(&state, 0.0).is_err());
    }

    #[test]
    fn evolution_check_zero_speed() {
        let grid = SphereGrid::circle(32).unwrap();
        let b = ConvexBody::ellipsoid(&[1.3, 0.9], &grid).unwrap();
        let zero = ScalarField::constant(&grid, 0.0);
        assert_eq!(evolution_check(&b, &zero, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn oversized_step_is_halved() {
        let grid = SphereGrid::circle(64).unwrap();
        let body = ConvexBody::ball(1.0, &grid).unwrap();
        let state = FlowState::new(body, p_flow(1.0, Normalization::None)).unwrap();
        // R^{4/3} = 1 − 4t/3 hits zero at t = 0.75
        let out = step(&state, 5.0).unwrap();
        assert!(out.dt < 5.0);
        assert!(out.state.body().min_support() > 0.0);
    }
}
