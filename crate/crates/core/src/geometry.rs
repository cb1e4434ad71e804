//! Geodesics and Fisher spheres on a family's parameter manifold.
//!
//! A geodesic leaving θ₀ with momentum p₀ solves Hamilton's equations
//!
//! ```text
//! q̇ = I⁻¹(q) p        ṗ_j = ½ pᵀ I⁻¹ (∂I/∂θ_j) I⁻¹ p
//! ```
//!
//! with the Hamiltonian H = ½ pᵀI⁻¹(q)p conserved along exact solutions; the
//! recorded relative drift of H is the integration-error diagnostic. Scaling
//! the initial momentum so that p₀ᵀI⁻¹(θ₀)p₀ = δ² makes the unit-time
//! endpoint sit at Fisher distance δ, so a sphere of radius δ is swept by
//! integrating one geodesic per direction.
//!
//! Truncated families have metric-degenerate frontiers at finite distance
//! (the density stops depending on the parameters in the limit), so spheres
//! there can be non-closed: trajectories that leave the open parameter
//! domain, or reach a point where the Fisher matrix stops being usably
//! positive definite, are flagged `TruncatedAtBoundary` and excluded.

use crate::distributions::{self, DistributionSpec, FamilyTag};
use crate::error::{Error, Result};
use crate::linalg::SymMat;
use crate::par::par_collect;
use serde::{Deserialize, Serialize};

/// Condition-number cap beyond which the metric is treated as degenerate
/// (the manifold edge for truncated families lies at parameter infinity).
const FIM_CONDITION_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorMethod {
    Euler,
    /// Two-step Adams-Bashforth predictor with Adams-Moulton (trapezoidal)
    /// corrector, bootstrapped by one classical Runge-Kutta step.
    AdamsMoulton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Complete,
    /// Integration left the open parameter domain (or reached a
    /// metric-degenerate point) at time `t_exit`.
    TruncatedAtBoundary { t_exit: f64 },
    /// Numerical breakdown (non-finite state); the valid prefix is kept.
    Failed,
}

impl PathStatus {
    pub fn is_complete(&self) -> bool {
        matches!(self, PathStatus::Complete)
    }

    pub fn label(&self) -> String {
        match self {
            PathStatus::Complete => "complete".to_string(),
            PathStatus::TruncatedAtBoundary { t_exit } => format!("truncated@{t_exit:.4}"),
            PathStatus::Failed => "failed".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeodesicStep {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub hamiltonian: f64,
}

/// Discretized trajectory of Hamilton's equations.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub center: DistributionSpec,
    pub steps: Vec<GeodesicStep>,
    pub status: PathStatus,
}

impl GeodesicPath {
    /// Relative Hamiltonian drift |H(t) − H(0)|/H(0) at each recorded step.
    pub fn hamiltonian_drift(&self) -> Vec<f64> {
        let h0 = self.steps.first().map(|s| s.hamiltonian).unwrap_or(0.0);
        self.steps
            .iter()
            .map(|s| if h0 == 0.0 { 0.0 } else { (s.hamiltonian - h0).abs() / h0 })
            .collect()
    }

    pub fn max_drift(&self) -> f64 {
        self.hamiltonian_drift().into_iter().fold(0.0, f64::max)
    }

    /// Path length by the composite trapezoid rule on √(q̇ᵀI(q)q̇) = √(2H).
    pub fn measured_length(&self) -> f64 {
        let mut len = 0.0;
        for w in self.steps.windows(2) {
            let dt = w[1].t - w[0].t;
            let s0 = (2.0 * w[0].hamiltonian).max(0.0).sqrt();
            let s1 = (2.0 * w[1].hamiltonian).max(0.0).sqrt();
            len += 0.5 * dt * (s0 + s1);
        }
        len
    }

    /// Final step of a complete path.
    pub fn endpoint(&self) -> Option<&GeodesicStep> {
        if self.status.is_complete() {
            self.steps.last()
        } else {
            None
        }
    }
}

/// One direction of a Fisher sphere.
#[derive(Debug, Clone)]
pub struct SpherePoint {
    pub direction_index: usize,
    /// Direction angle in the chart (0 / π for one-parameter families).
    pub angle: f64,
    pub direction: Vec<f64>,
    pub status: PathStatus,
    /// Geodesic endpoint as a distribution; `None` for invalid directions.
    pub spec: Option<DistributionSpec>,
    /// Trapezoid length of the (possibly partial) trajectory.
    pub measured_length: f64,
    /// Largest relative Hamiltonian drift along the trajectory.
    pub max_drift: f64,
}

/// Candidate perturbations at Fisher distance δ from a center distribution.
#[derive(Debug, Clone)]
pub struct FisherSphere {
    pub center: DistributionSpec,
    pub radius: f64,
    pub points: Vec<SpherePoint>,
}

impl FisherSphere {
    pub fn n_valid(&self) -> usize {
        self.points.iter().filter(|p| p.status.is_complete()).count()
    }

    pub fn n_invalid(&self) -> usize {
        self.points.len() - self.n_valid()
    }

    /// Valid endpoints with their specs.
    pub fn valid_points(&self) -> impl Iterator<Item = (&SpherePoint, &DistributionSpec)> {
        self.points
            .iter()
            .filter_map(|p| p.spec.as_ref().map(|s| (p, s)))
    }
}

/// A coordinate chart on a one- or two-parameter manifold. The native chart
/// of a family uses θ itself; the Gaussian family additionally supports the
/// (μ, σ²) chart for reparametrization-invariance checks.
pub(crate) trait Chart: Sync {
    fn dim(&self) -> usize;
    fn origin(&self) -> [f64; 2];
    fn in_domain(&self, q: &[f64; 2]) -> bool;
    fn fim(&self, q: &[f64; 2]) -> Result<SymMat>;
    fn fim_grad(&self, q: &[f64; 2]) -> Result<Vec<SymMat>>;
    fn spec_at(&self, q: &[f64; 2]) -> Result<DistributionSpec>;
}

pub(crate) struct NativeChart<'a> {
    spec: &'a DistributionSpec,
}

impl<'a> NativeChart<'a> {
    pub(crate) fn new(spec: &'a DistributionSpec) -> Result<Self> {
        if !spec.family().has_fisher_structure() {
            return Err(Error::UnsupportedFamily {
                family: spec.family().name(),
                operation: "geodesic integration",
            });
        }
        Ok(NativeChart { spec })
    }

    fn theta_vec(&self, q: &[f64; 2]) -> Vec<f64> {
        q[..self.dim()].to_vec()
    }
}

impl Chart for NativeChart<'_> {
    fn dim(&self) -> usize {
        self.spec.r()
    }

    fn origin(&self) -> [f64; 2] {
        let mut o = [0.0; 2];
        for (i, t) in self.spec.theta().iter().enumerate() {
            o[i] = *t;
        }
        o
    }

    fn in_domain(&self, q: &[f64; 2]) -> bool {
        self.spec.theta_in_domain(&q[..self.dim()])
    }

    fn fim(&self, q: &[f64; 2]) -> Result<SymMat> {
        let spec = self.spec.with_theta(self.theta_vec(q))?;
        Ok(distributions::fisher_information(&spec)?.matrix)
    }

    fn fim_grad(&self, q: &[f64; 2]) -> Result<Vec<SymMat>> {
        let spec = self.spec.with_theta(self.theta_vec(q))?;
        distributions::fisher_information_gradient(&spec)
    }

    fn spec_at(&self, q: &[f64; 2]) -> Result<DistributionSpec> {
        self.spec.with_theta(self.theta_vec(q))
    }
}

/// Gaussian manifold in (μ, v = σ²) coordinates.
pub(crate) struct GaussianMeanVarChart {
    mu0: f64,
    var0: f64,
}

impl Chart for GaussianMeanVarChart {
    fn dim(&self) -> usize {
        2
    }

    fn origin(&self) -> [f64; 2] {
        [self.mu0, self.var0]
    }

    fn in_domain(&self, q: &[f64; 2]) -> bool {
        q.iter().all(|x| x.is_finite()) && q[1] > 0.0
    }

    fn fim(&self, q: &[f64; 2]) -> Result<SymMat> {
        let v = q[1];
        Ok(SymMat::diag(2, [1.0 / v, 0.5 / (v * v)]))
    }

    fn fim_grad(&self, q: &[f64; 2]) -> Result<Vec<SymMat>> {
        let v = q[1];
        Ok(vec![
            SymMat::zeros(2),
            SymMat::diag(2, [-1.0 / (v * v), -1.0 / (v * v * v)]),
        ])
    }

    fn spec_at(&self, q: &[f64; 2]) -> Result<DistributionSpec> {
        DistributionSpec::normal(q[0], q[1].sqrt())
    }
}

/// Chart selector for the Gaussian reparametrization-invariance check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianChart {
    MeanStd,
    MeanVar,
}

#[derive(Debug, Clone, Copy)]
struct Deriv {
    qdot: [f64; 2],
    pdot: [f64; 2],
    h: f64,
}

enum Stop {
    Boundary,
    Failure,
}

fn rhs(chart: &dyn Chart, q: &[f64; 2], p: &[f64; 2]) -> std::result::Result<Deriv, Stop> {
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Stop::Failure);
    }
    if q.iter().any(|x| !x.is_finite()) || !chart.in_domain(q) {
        return Err(Stop::Boundary);
    }
    // Any metric-evaluation failure at an in-domain point is treated as the
    // manifold edge: for truncated families the Fisher matrix degenerates
    // smoothly toward the frontier rather than at a parameter bound.
    let fim = match chart.fim(q) {
        Ok(m) if m.is_finite() => m,
        _ => return Err(Stop::Boundary),
    };
    if fim.min_eigenvalue() <= 0.0 || fim.condition() > FIM_CONDITION_CAP {
        return Err(Stop::Boundary);
    }
    let inv = match fim.inverse() {
        Ok(m) => m,
        Err(_) => return Err(Stop::Boundary),
    };
    let grads = match chart.fim_grad(q) {
        Ok(g) => g,
        Err(_) => return Err(Stop::Boundary),
    };
    let v = inv.mul_vec(*p);
    let mut pdot = [0.0; 2];
    for (j, g) in grads.iter().enumerate() {
        pdot[j] = 0.5 * g.quad_form(v);
    }
    let h = 0.5 * (p[0] * v[0] + p[1] * v[1]);
    if v.iter().chain(pdot.iter()).any(|x| !x.is_finite()) || !h.is_finite() {
        return Err(Stop::Failure);
    }
    Ok(Deriv { qdot: v, pdot, h })
}

fn axpy(y: &[f64; 2], a: f64, x: &[f64; 2]) -> [f64; 2] {
    [y[0] + a * x[0], y[1] + a * x[1]]
}

struct Integrator<'a> {
    chart: &'a dyn Chart,
    n_steps: usize,
    steps: Vec<GeodesicStep>,
    q: [f64; 2],
    p: [f64; 2],
}

impl<'a> Integrator<'a> {
    fn new(chart: &'a dyn Chart, p0: [f64; 2], n_steps: usize) -> Self {
        Integrator {
            chart,
            n_steps,
            steps: Vec::with_capacity(n_steps + 1),
            q: chart.origin(),
            p: p0,
        }
    }

    fn record(&mut self, t: f64, h: f64) {
        let dim = self.chart.dim();
        self.steps.push(GeodesicStep {
            t,
            q: self.q[..dim].to_vec(),
            p: self.p[..dim].to_vec(),
            hamiltonian: h,
        });
    }

    fn stop_status(stop: Stop, t: f64) -> PathStatus {
        match stop {
            Stop::Boundary => PathStatus::TruncatedAtBoundary { t_exit: t },
            Stop::Failure => PathStatus::Failed,
        }
    }

    fn run_euler(mut self) -> (Vec<GeodesicStep>, PathStatus) {
        let h = 1.0 / self.n_steps as f64;
        let mut f = match rhs(self.chart, &self.q, &self.p) {
            Ok(f) => f,
            Err(stop) => return (self.steps, Self::stop_status(stop, 0.0)),
        };
        self.record(0.0, f.h);
        for k in 0..self.n_steps {
            let t_next = (k + 1) as f64 * h;
            self.q = axpy(&self.q, h, &f.qdot);
            self.p = axpy(&self.p, h, &f.pdot);
            f = match rhs(self.chart, &self.q, &self.p) {
                Ok(f) => f,
                Err(stop) => return (self.steps, Self::stop_status(stop, t_next)),
            };
            self.record(t_next, f.h);
        }
        (self.steps, PathStatus::Complete)
    }

    fn run_adams_moulton(mut self) -> (Vec<GeodesicStep>, PathStatus) {
        let h = 1.0 / self.n_steps as f64;
        let f0 = match rhs(self.chart, &self.q, &self.p) {
            Ok(f) => f,
            Err(stop) => return (self.steps, Self::stop_status(stop, 0.0)),
        };
        self.record(0.0, f0.h);

        // One classical Runge-Kutta step seeds the two-step history.
        let (q0, p0) = (self.q, self.p);
        let k1 = f0;
        let rk_stage = |f: &Deriv, frac: f64| (axpy(&q0, frac * h, &f.qdot), axpy(&p0, frac * h, &f.pdot));
        let (q2, p2) = rk_stage(&k1, 0.5);
        let k2 = match rhs(self.chart, &q2, &p2) {
            Ok(f) => f,
            Err(stop) => return (self.steps, Self::stop_status(stop, h)),
        };
        let (q3, p3) = rk_stage(&k2, 0.5);
        let k3 = match rhs(self.chart, &q3, &p3) {
            Ok(f) => f,
            Err(stop) => return (self.steps, Self::stop_status(stop, h)),
        };
        let (q4, p4) = rk_stage(&k3, 1.0);
        let k4 = match rhs(self.chart, &q4, &p4) {
            Ok(f) => f,
            Err(stop) => return (self.steps, Self::stop_status(stop, h)),
        };
        for i in 0..2 {
            self.q[i] =
                q0[i] + h / 6.0 * (k1.qdot[i] + 2.0 * k2.qdot[i] + 2.0 * k3.qdot[i] + k4.qdot[i]);
            self.p[i] =
                p0[i] + h / 6.0 * (k1.pdot[i] + 2.0 * k2.pdot[i] + 2.0 * k3.pdot[i] + k4.pdot[i]);
        }
        let f1 = match rhs(self.chart, &self.q, &self.p) {
            Ok(f) => f,
            Err(stop) => return (self.steps, Self::stop_status(stop, h)),
        };
        self.record(h, f1.h);

        let mut prev = f0;
        let mut cur = f1;
        for k in 1..self.n_steps {
            let t_next = (k + 1) as f64 * h;
            // Predict (Adams-Bashforth 2), evaluate, correct (trapezoid), evaluate.
            let q_pred = [
                self.q[0] + h * (1.5 * cur.qdot[0] - 0.5 * prev.qdot[0]),
                self.q[1] + h * (1.5 * cur.qdot[1] - 0.5 * prev.qdot[1]),
            ];
            let p_pred = [
                self.p[0] + h * (1.5 * cur.pdot[0] - 0.5 * prev.pdot[0]),
                self.p[1] + h * (1.5 * cur.pdot[1] - 0.5 * prev.pdot[1]),
            ];
            let f_pred = match rhs(self.chart, &q_pred, &p_pred) {
                Ok(f) => f,
                Err(stop) => return (self.steps, Self::stop_status(stop, t_next)),
            };
            for i in 0..2 {
                self.q[i] += 0.5 * h * (f_pred.qdot[i] + cur.qdot[i]);
                self.p[i] += 0.5 * h * (f_pred.pdot[i] + cur.pdot[i]);
            }
            let f_new = match rhs(self.chart, &self.q, &self.p) {
                Ok(f) => f,
                Err(stop) => return (self.steps, Self::stop_status(stop, t_next)),
            };
            self.record(t_next, f_new.h);
            prev = cur;
            cur = f_new;
        }
        (self.steps, PathStatus::Complete)
    }

    fn run(self, method: IntegratorMethod) -> (Vec<GeodesicStep>, PathStatus) {
        match method {
            IntegratorMethod::Euler => self.run_euler(),
            IntegratorMethod::AdamsMoulton => self.run_adams_moulton(),
        }
    }
}

fn integrate_on_chart(
    chart: &dyn Chart,
    center: &DistributionSpec,
    p0: [f64; 2],
    method: IntegratorMethod,
    n_steps: usize,
) -> GeodesicPath {
    let (steps, status) = Integrator::new(chart, p0, n_steps).run(method);
    GeodesicPath { center: center.clone(), steps, status }
}

fn check_integration_args(p0: &[f64], dim: usize, n_steps: usize) -> Result<[f64; 2]> {
    if n_steps < 10 {
        return Err(Error::domain(format!("n_steps must be >= 10, got {n_steps}")));
    }
    if p0.len() != dim {
        return Err(Error::domain(format!(
            "momentum has dimension {}, expected {dim}",
            p0.len()
        )));
    }
    if p0.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("initial momentum must be finite"));
    }
    let mut arr = [0.0; 2];
    arr[..dim].copy_from_slice(p0);
    Ok(arr)
}

/// Integrate one geodesic of `center`'s family manifold over t ∈ [0, 1].
pub fn integrate_geodesic(
    center: &DistributionSpec,
    p0: &[f64],
    method: IntegratorMethod,
    n_steps: usize,
) -> Result<GeodesicPath> {
    let chart = NativeChart::new(center)?;
    let p0 = check_integration_args(p0, chart.dim(), n_steps)?;
    Ok(integrate_on_chart(&chart, center, p0, method, n_steps))
}

/// Unit direction vectors: equally spaced angles for r = 2, the ± pair for r = 1.
fn unit_directions(dim: usize, k: usize) -> Vec<(f64, [f64; 2])> {
    if dim == 1 {
        let both = [(0.0, [1.0, 0.0]), (std::f64::consts::PI, [-1.0, 0.0])];
        both.into_iter().take(k.clamp(1, 2)).collect()
    } else {
        (0..k)
            .map(|j| {
                let angle = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                (angle, [angle.cos(), angle.sin()])
            })
            .collect()
    }
}

type Momentum = (f64, [f64; 2], [f64; 2]);

fn momenta_on_chart(chart: &dyn Chart, delta: f64, k: usize) -> Result<Vec<Momentum>> {
    let fim = chart.fim(&chart.origin())?;
    let l = fim.cholesky_lower()?;
    Ok(unit_directions(chart.dim(), k)
        .into_iter()
        .map(|(angle, u)| {
            let p = [
                delta * l[0][0] * u[0],
                delta * (l[1][0] * u[0] + l[1][1] * u[1]),
            ];
            (angle, u, p)
        })
        .collect())
}

/// Initial momenta satisfying pᵀI⁻¹(θ₀)p = δ², one per direction.
///
/// One-parameter families only have the ± direction pair, so at most two
/// momenta are returned for them.
pub fn initial_momenta(center: &DistributionSpec, delta: f64, k: usize) -> Result<Vec<Vec<f64>>> {
    if delta < 0.0 {
        return Err(Error::domain(format!("delta must be >= 0, got {delta}")));
    }
    if k < 1 {
        return Err(Error::domain("need at least one direction"));
    }
    let chart = NativeChart::new(center)?;
    let dim = chart.dim();
    Ok(momenta_on_chart(&chart, delta, k)?
        .into_iter()
        .map(|(_, _, p)| p[..dim].to_vec())
        .collect())
}

fn sphere_on_chart(
    chart: &(dyn Chart + Sync),
    center: &DistributionSpec,
    delta: f64,
    k: usize,
    method: IntegratorMethod,
    n_steps: usize,
) -> Result<FisherSphere> {
    if delta <= 0.0 {
        return Err(Error::domain(format!("sphere radius must be > 0, got {delta}")));
    }
    if k < 2 {
        return Err(Error::domain("a sphere needs at least two directions"));
    }
    if n_steps < 10 {
        return Err(Error::domain(format!("n_steps must be >= 10, got {n_steps}")));
    }
    let momenta = momenta_on_chart(chart, delta, k)?;
    // Radius and Hamiltonian consistency are the validity gate: a complete
    // trajectory whose trapezoid length misses δ, or whose Hamiltonian
    // drifts, beyond the integrator tolerance has gone through the
    // fixed-step instability the drift diagnostic exists to catch, and its
    // endpoint is not a sphere point.
    let tol = 10.0 / n_steps as f64;
    let points = par_collect(momenta.len(), |j| {
        let (angle, u, p0) = momenta[j];
        let path = integrate_on_chart(chart, center, p0, method, n_steps);
        let measured_length = path.measured_length();
        let max_drift = path.max_drift();
        let mut status = path.status;
        let mut spec = None;
        if let Some(end) = path.endpoint() {
            if (measured_length - delta).abs() > tol * delta || max_drift > tol {
                status = PathStatus::Failed;
            } else {
                let mut q = [0.0; 2];
                q[..chart.dim()].copy_from_slice(&end.q);
                match chart.spec_at(&q) {
                    Ok(s) => spec = Some(s),
                    // Endpoint exists but is not a valid distribution.
                    Err(_) => status = PathStatus::TruncatedAtBoundary { t_exit: 1.0 },
                }
            }
        }
        SpherePoint {
            direction_index: j,
            angle,
            direction: u[..chart.dim()].to_vec(),
            status,
            spec,
            measured_length,
            max_drift,
        }
    });
    let sphere = FisherSphere { center: center.clone(), radius: delta, points };
    if sphere.n_valid() == 0 {
        return Err(Error::SphereEmpty { k, delta });
    }
    Ok(sphere)
}

/// Sample the Fisher sphere of radius δ around `center` with K geodesics.
///
/// Boundary-truncated directions are flagged invalid and excluded from the
/// candidate point set; their count is available from the returned sphere.
pub fn fisher_sphere(
    center: &DistributionSpec,
    delta: f64,
    k: usize,
    method: IntegratorMethod,
    n_steps: usize,
) -> Result<FisherSphere> {
    let chart = NativeChart::new(center)?;
    sphere_on_chart(&chart, center, delta, k, method, n_steps)
}

/// Same sphere computed in a chosen Gaussian chart; whichever chart is used,
/// the points describe the same set of distributions (the chart metrics are
/// pullbacks of one Fisher metric).
pub fn fisher_sphere_gaussian_chart(
    center: &DistributionSpec,
    chart: GaussianChart,
    delta: f64,
    k: usize,
    method: IntegratorMethod,
    n_steps: usize,
) -> Result<FisherSphere> {
    if center.family() != FamilyTag::Normal {
        return Err(Error::UnsupportedFamily {
            family: center.family().name(),
            operation: "gaussian chart selection",
        });
    }
    match chart {
        GaussianChart::MeanStd => fisher_sphere(center, delta, k, method, n_steps),
        GaussianChart::MeanVar => {
            let sigma = center.theta()[1];
            let chart = GaussianMeanVarChart { mu0: center.theta()[0], var0: sigma * sigma };
            sphere_on_chart(&chart, center, delta, k, method, n_steps)
        }
    }
}

/// Closed-form Fisher distance between two univariate normals.
///
/// The Gaussian Fisher metric ds² = (dμ² + 2dσ²)/σ² is twice the Poincaré
/// half-plane metric in the chart (μ/√2, σ), hence
/// d = √2·arcosh(1 + ((Δμ)²/2 + (Δσ)²)/(2σ₀σ₁)).
pub fn gaussian_fisher_distance(theta0: (f64, f64), theta1: (f64, f64)) -> Result<f64> {
    let (mu0, s0) = theta0;
    let (mu1, s1) = theta1;
    if s0 <= 0.0 || s1 <= 0.0 {
        return Err(Error::domain(format!(
            "standard deviations must be > 0, got {s0} and {s1}"
        )));
    }
    let dmu = mu1 - mu0;
    let ds = s1 - s0;
    let arg = 1.0 + (0.5 * dmu * dmu + ds * ds) / (2.0 * s0 * s1);
    Ok(std::f64::consts::SQRT_2 * arg.max(1.0).acosh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive;
    use rand::{Rng, SeedableRng};
    use rand_pcg::Pcg64;

    fn std_normal() -> DistributionSpec {
        DistributionSpec::normal(0.0, 1.0).unwrap()
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(gaussian_fisher_distance((0.0, 1.0), (0.0, 1.0)).unwrap(), 0.0);
        // Vertical geodesic: √2·|log(σ₂/σ₁)|, cross-checked by quadrature of √2 dσ/σ.
        let d = gaussian_fisher_distance((0.0, 1.0), (0.0, 2.5)).unwrap();
        let expected = std::f64::consts::SQRT_2 * 2.5f64.ln();
        assert!((d - expected).abs() < 1e-12);
        let by_quad =
            integrate_adaptive(|s| std::f64::consts::SQRT_2 / s, 1.0, 2.5, 1e-12, 1e-15).unwrap();
        assert!((d - by_quad).abs() < 1e-10);
        assert!(gaussian_fisher_distance((0.0, -1.0), (0.0, 1.0)).is_err());
    }

    #[test]
    fn oracle_satisfies_triangle_inequality() {
        let mut rng = Pcg64::seed_from_u64(11);
        for _ in 0..100 {
            let th: Vec<(f64, f64)> = (0..3)
                .map(|_| (4.0 * rng.gen::<f64>() - 2.0, 0.2 + 3.0 * rng.gen::<f64>()))
                .collect();
            let d01 = gaussian_fisher_distance(th[0], th[1]).unwrap();
            let d12 = gaussian_fisher_distance(th[1], th[2]).unwrap();
            let d02 = gaussian_fisher_distance(th[0], th[2]).unwrap();
            assert!(d02 <= d01 + d12 + 1e-12);
        }
    }

    #[test]
    fn oracle_matches_fine_euler_path_length() {
        // Validation required before relying on the closed form: the measured
        // length of a finely integrated geodesic must match the formula
        // distance between its endpoints.
        let center = std_normal();
        for p0 in [vec![1.0, 0.0], vec![0.0, 2.0f64.sqrt()], vec![0.6, -0.9]] {
            let path = integrate_geodesic(&center, &p0, IntegratorMethod::Euler, 20_000).unwrap();
            assert!(path.status.is_complete());
            let end = path.endpoint().unwrap();
            let d = gaussian_fisher_distance((0.0, 1.0), (end.q[0], end.q[1])).unwrap();
            let len = path.measured_length();
            assert!(
                (d - len).abs() < 2e-3,
                "formula {d} vs measured {len} for p0 {p0:?}"
            );
        }
    }

    #[test]
    fn initial_momenta_cholesky_examples() {
        let center = std_normal();
        let moms = initial_momenta(&center, 1.0, 4).unwrap();
        // Directions 0 and 1 of four equally spaced angles are (1,0), (0,1).
        assert!((moms[0][0] - 1.0).abs() < 1e-12 && moms[0][1].abs() < 1e-12);
        assert!(moms[1][0].abs() < 1e-12 && (moms[1][1] - 2.0f64.sqrt()).abs() < 1e-12);
        // Normalization pᵀ I⁻¹ p = δ² for all directions.
        let inv = crate::distributions::fisher_information(&center)
            .unwrap()
            .matrix
            .inverse()
            .unwrap();
        for m in initial_momenta(&center, 0.7, 32).unwrap() {
            let q = inv.quad_form([m[0], m[1]]);
            assert!((q - 0.49).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_radius_stays_at_center() {
        let center = std_normal();
        let moms = initial_momenta(&center, 0.0, 3).unwrap();
        let path =
            integrate_geodesic(&center, &moms[0], IntegratorMethod::AdamsMoulton, 100).unwrap();
        assert!(path.status.is_complete());
        let end = path.endpoint().unwrap();
        assert_eq!(end.q, vec![0.0, 1.0]);
        assert_eq!(path.measured_length(), 0.0);
        assert_eq!(path.max_drift(), 0.0);
    }

    #[test]
    fn adams_moulton_drift_and_endpoint_accuracy() {
        let center = std_normal();
        for m in initial_momenta(&center, 1.0, 8).unwrap() {
            let path =
                integrate_geodesic(&center, &m, IntegratorMethod::AdamsMoulton, 1000).unwrap();
            assert!(path.status.is_complete());
            assert!(path.max_drift() <= 1e-4, "drift {}", path.max_drift());
            let end = path.endpoint().unwrap();
            let d = gaussian_fisher_distance((0.0, 1.0), (end.q[0], end.q[1])).unwrap();
            assert!((d - 1.0).abs() < 1e-3, "endpoint distance {d}");
        }
    }

    #[test]
    fn euler_drift_within_half_percent() {
        let center = std_normal();
        for m in initial_momenta(&center, 1.0, 8).unwrap() {
            let path = integrate_geodesic(&center, &m, IntegratorMethod::Euler, 1000).unwrap();
            assert!(path.status.is_complete());
            assert!(path.max_drift() <= 5e-3, "drift {}", path.max_drift());
        }
    }

    #[test]
    fn integrator_orders_match_drift_scaling() {
        let center = std_normal();
        let p0 = initial_momenta(&center, 1.0, 8).unwrap()[3].clone();
        let drift = |method, n| {
            integrate_geodesic(&center, &p0, method, n)
                .unwrap()
                .max_drift()
        };
        let ratio_euler = drift(IntegratorMethod::Euler, 500) / drift(IntegratorMethod::Euler, 1000);
        assert!(
            (1.5..3.0).contains(&ratio_euler),
            "euler halving ratio {ratio_euler}"
        );
        let ratio_am = drift(IntegratorMethod::AdamsMoulton, 500)
            / drift(IntegratorMethod::AdamsMoulton, 1000);
        assert!((2.5..6.5).contains(&ratio_am), "am halving ratio {ratio_am}");
    }

    #[test]
    fn geodesic_is_reversible() {
        let center = std_normal();
        let p0 = initial_momenta(&center, 1.0, 8).unwrap()[5].clone();
        let fwd = integrate_geodesic(&center, &p0, IntegratorMethod::AdamsMoulton, 1000).unwrap();
        let end = fwd.endpoint().unwrap();
        let back_center = DistributionSpec::normal(end.q[0], end.q[1]).unwrap();
        let back_p: Vec<f64> = end.p.iter().map(|x| -x).collect();
        let bwd = integrate_geodesic(&back_center, &back_p, IntegratorMethod::AdamsMoulton, 1000)
            .unwrap();
        let home = bwd.endpoint().unwrap();
        assert!((home.q[0]).abs() < 1e-3 && (home.q[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn radius_consistency_via_path_length() {
        let center = std_normal();
        for (delta, n_steps) in [(0.5, 200usize), (1.0, 1000), (1.4, 1000)] {
            for m in initial_momenta(&center, delta, 4).unwrap() {
                let path =
                    integrate_geodesic(&center, &m, IntegratorMethod::AdamsMoulton, n_steps)
                        .unwrap();
                let rel = (path.measured_length() - delta).abs() / delta;
                assert!(
                    rel <= 10.0 / n_steps as f64,
                    "delta {delta} steps {n_steps}: rel {rel}"
                );
            }
        }
    }

    #[test]
    fn gaussian_sphere_endpoints_at_oracle_distance() {
        let center = std_normal();
        let sphere = fisher_sphere(&center, 1.0, 24, IntegratorMethod::AdamsMoulton, 1000).unwrap();
        assert_eq!(sphere.n_valid(), 24);
        for (pt, spec) in sphere.valid_points() {
            let d =
                gaussian_fisher_distance((0.0, 1.0), (spec.theta()[0], spec.theta()[1])).unwrap();
            assert!((d - 1.0).abs() < 1e-3, "distance {d}");
            assert!((pt.measured_length - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn triangular_sphere_is_a_point_pair() {
        let tri = DistributionSpec::triangular(50.0, 49.0, 51.0).unwrap();
        let sphere = fisher_sphere(&tri, 0.4, 100, IntegratorMethod::AdamsMoulton, 400).unwrap();
        assert_eq!(sphere.points.len(), 2);
        let modes: Vec<f64> = sphere.valid_points().map(|(_, s)| s.theta()[0]).collect();
        assert!(modes.iter().any(|&m| m > 50.0));
        assert!(modes.iter().any(|&m| m < 50.0));
    }

    #[test]
    fn uniform_is_rejected_and_bad_args_error() {
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        assert!(matches!(
            fisher_sphere(&u, 0.3, 8, IntegratorMethod::Euler, 100),
            Err(Error::UnsupportedFamily { .. })
        ));
        let n = std_normal();
        assert!(integrate_geodesic(&n, &[1.0, 0.0], IntegratorMethod::Euler, 5).is_err());
        assert!(integrate_geodesic(&n, &[1.0], IntegratorMethod::Euler, 100).is_err());
        assert!(fisher_sphere(&n, 0.0, 8, IntegratorMethod::Euler, 100).is_err());
        assert!(fisher_sphere(&n, 0.5, 1, IntegratorMethod::Euler, 100).is_err());
    }

    #[test]
    fn valid_sphere_trajectories_conserve_hamiltonian_for_all_families() {
        // Sphere validity keeps drift within 1e-3 at δ ≤ 1.4 for every
        // family (1e-4 on the Gaussian); unstable directions are flagged out.
        let specs = [
            DistributionSpec::normal(0.0, 1.0).unwrap(),
            DistributionSpec::trunc_normal(30.0, 7.5, 15.0, 75.0).unwrap(),
            DistributionSpec::trunc_lognormal(0.0, 0.76, 0.1, 10.0).unwrap(),
            DistributionSpec::trunc_gumbel(1013.0, 558.0, 500.0, 3000.0).unwrap(),
            DistributionSpec::triangular(50.0, 49.0, 51.0).unwrap(),
        ];
        for spec in &specs {
            for delta in [0.5, 1.4] {
                let sphere =
                    fisher_sphere(spec, delta, 16, IntegratorMethod::AdamsMoulton, 1000).unwrap();
                let cap = if spec.family() == FamilyTag::Normal { 1e-4 } else { 1e-3 };
                for (pt, _) in sphere.valid_points() {
                    assert!(
                        pt.max_drift <= cap,
                        "{:?} delta {delta} dir {}: drift {}",
                        spec.family(),
                        pt.direction_index,
                        pt.max_drift
                    );
                    assert!((pt.measured_length - delta).abs() <= 0.01 * delta);
                }
            }
        }
    }

    #[test]
    fn gumbel_sphere_is_non_closed_at_moderate_radius() {
        // The truncated-Gumbel sphere stays closed
        // at small radius and loses directions at moderate radius (in these
        // numerics the first truncations appear near δ ≈ 0.35).
        let gum = DistributionSpec::trunc_gumbel(1013.0, 558.0, 500.0, 3000.0).unwrap();
        let small = fisher_sphere(&gum, 0.1, 32, IntegratorMethod::AdamsMoulton, 500).unwrap();
        assert_eq!(small.n_invalid(), 0);
        let moderate = fisher_sphere(&gum, 0.5, 32, IntegratorMethod::AdamsMoulton, 500).unwrap();
        assert!(moderate.n_invalid() > 0, "expected a non-closed sphere at delta 0.5");
        assert!(moderate.n_valid() > 0);
        assert!(moderate
            .points
            .iter()
            .any(|p| matches!(p.status, PathStatus::TruncatedAtBoundary { .. })));
    }

    #[test]
    fn mean_var_chart_reaches_the_same_distributions() {
        let center = std_normal();
        let sphere = fisher_sphere_gaussian_chart(
            &center,
            GaussianChart::MeanVar,
            0.8,
            16,
            IntegratorMethod::AdamsMoulton,
            800,
        )
        .unwrap();
        assert_eq!(sphere.n_valid(), 16);
        for (_, spec) in sphere.valid_points() {
            let d =
                gaussian_fisher_distance((0.0, 1.0), (spec.theta()[0], spec.theta()[1])).unwrap();
            assert!((d - 0.8).abs() < 2e-3, "distance {d} in mean-var chart");
        }
    }
}
