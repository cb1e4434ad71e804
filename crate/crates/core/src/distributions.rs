//! Parametric density families on truncated supports.
//!
//! A [`DistributionSpec`] is a point θ on a statistical manifold: a family
//! tag, a parameter vector, and a fixed truncation support that is never
//! perturbed. Truncated families divide the parent density by the parent-cdf
//! mass of the support, and every score / Fisher-information computation
//! includes the θ-dependence of that normalizer.
//!
//! The uniform family carries no Fisher structure (its "parameters" are the
//! support bounds, which are structural): it supports pdf/cdf/sample only and
//! is rejected by every geometry operation.

use crate::error::{Error, Result};
use crate::linalg::SymMat;
use crate::quad;
use crate::special::{
    gumbel_cdf, gumbel_pdf, gumbel_quantile, norm_cdf, norm_pdf, norm_quantile, norm_sf,
};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

/// Relative tolerance used for Fisher-information quadrature.
const FIM_REL_TOL: f64 = 1e-8;

/// Density families supported by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    TruncNormal,
    #[serde(rename = "trunc_lognormal")]
    TruncLogNormal,
    TruncGumbel,
    Triangular,
    Normal,
    Uniform,
}

impl FamilyTag {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyTag::TruncNormal => "trunc_normal",
            FamilyTag::TruncLogNormal => "trunc_lognormal",
            FamilyTag::TruncGumbel => "trunc_gumbel",
            FamilyTag::Triangular => "triangular",
            FamilyTag::Normal => "normal",
            FamilyTag::Uniform => "uniform",
        }
    }

    /// Dimension r of the parameter vector.
    pub fn param_dim(&self) -> usize {
        match self {
            FamilyTag::Triangular => 1,
            FamilyTag::Uniform => 0,
            _ => 2,
        }
    }

    /// Whether the family is a Riemannian manifold under the Fisher metric.
    /// The uniform family is not: its Fisher information with respect to the
    /// support bounds violates the regularity conditions, so the toolkit
    /// refuses to perturb it geometrically.
    pub fn has_fisher_structure(&self) -> bool {
        !matches!(self, FamilyTag::Uniform)
    }
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    family: FamilyTag,
    theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support: Option<(f64, f64)>,
}

/// A point θ on a statistical manifold: family, parameters, fixed support.
///
/// Construction always validates, so every value in existence satisfies the
/// family's parameter-domain and support invariants. Serialized form:
/// `{"family":"trunc_lognormal","theta":[0.0,0.76],"support":[0.1,10.0]}`
/// (the unbounded normal omits `support`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct DistributionSpec {
    family: FamilyTag,
    theta: Vec<f64>,
    support: Option<(f64, f64)>,
}

impl TryFrom<RawSpec> for DistributionSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        DistributionSpec::new(raw.family, raw.theta, raw.support)
    }
}

impl From<DistributionSpec> for RawSpec {
    fn from(spec: DistributionSpec) -> RawSpec {
        RawSpec { family: spec.family, theta: spec.theta, support: spec.support }
    }
}

impl DistributionSpec {
    pub fn new(family: FamilyTag, theta: Vec<f64>, support: Option<(f64, f64)>) -> Result<Self> {
        if theta.len() != family.param_dim() {
            return Err(Error::domain(format!(
                "family `{}` takes {} parameter(s), got {}",
                family.name(),
                family.param_dim(),
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("theta must be finite"));
        }
        match family {
            FamilyTag::Normal => {
                if support.is_some() {
                    return Err(Error::domain(
                        "the normal family is unbounded; use trunc_normal for a bounded support",
                    ));
                }
                if theta[1] <= 0.0 {
                    return Err(Error::domain(format!("sigma must be > 0, got {}", theta[1])));
                }
            }
            _ => {
                let (lo, hi) = support.ok_or_else(|| {
                    Error::domain(format!("family `{}` requires a support", family.name()))
                })?;
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::domain(format!(
                        "support must be a bounded interval with lo < hi, got [{lo}, {hi}]"
                    )));
                }
                match family {
                    FamilyTag::TruncNormal | FamilyTag::TruncGumbel => {
                        if theta[1] <= 0.0 {
                            return Err(Error::domain(format!(
                                "scale must be > 0, got {}",
                                theta[1]
                            )));
                        }
                    }
                    FamilyTag::TruncLogNormal => {
                        if theta[1] <= 0.0 {
                            return Err(Error::domain(format!(
                                "log-scale must be > 0, got {}",
                                theta[1]
                            )));
                        }
                        if lo <= 0.0 {
                            return Err(Error::domain(format!(
                                "lognormal support must be positive, got lo = {lo}"
                            )));
                        }
                    }
                    FamilyTag::Triangular => {
                        if !(lo < theta[0] && theta[0] < hi) {
                            return Err(Error::domain(format!(
                                "triangular mode {} must lie strictly inside [{lo}, {hi}]",
                                theta[0]
                            )));
                        }
                    }
                    FamilyTag::Uniform | FamilyTag::Normal => {}
                }
            }
        }
        let spec = DistributionSpec { family, theta, support };
        // Truncated families must keep positive parent mass on the support.
        spec.density()?;
        Ok(spec)
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(FamilyTag::Normal, vec![mu, sigma], None)
    }

    pub fn trunc_normal(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(FamilyTag::TruncNormal, vec![mu, sigma], Some((lo, hi)))
    }

    /// Lognormal with log-mean `m` and log-sd `s`, truncated to `[lo, hi]`.
    pub fn trunc_lognormal(m: f64, s: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(FamilyTag::TruncLogNormal, vec![m, s], Some((lo, hi)))
    }

    /// Gumbel (max) with location `loc` and scale `scale`, truncated to `[lo, hi]`.
    pub fn trunc_gumbel(loc: f64, scale: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(FamilyTag::TruncGumbel, vec![loc, scale], Some((lo, hi)))
    }

    /// Triangular with the given mode; the support endpoints are structural
    /// constants, only the mode is a manifold coordinate.
    pub fn triangular(mode: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(FamilyTag::Triangular, vec![mode], Some((lo, hi)))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(FamilyTag::Uniform, Vec::new(), Some((lo, hi)))
    }

    pub fn family(&self) -> FamilyTag {
        self.family
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn r(&self) -> usize {
        self.family.param_dim()
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    /// Support as an interval, `(-inf, inf)` for the unbounded normal.
    pub fn support_interval(&self) -> (f64, f64) {
        self.support.unwrap_or((f64::NEG_INFINITY, f64::INFINITY))
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.support_interval();
        x >= lo && x <= hi
    }

    /// Same family and support, new parameter vector.
    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        Self::new(self.family, theta, self.support)
    }

    /// Whether `theta` lies in the family's open parameter domain (for this
    /// spec's support). Used by geodesic integration for boundary detection.
    pub fn theta_in_domain(&self, theta: &[f64]) -> bool {
        if theta.len() != self.r() || theta.iter().any(|t| !t.is_finite()) {
            return false;
        }
        match self.family {
            FamilyTag::Normal | FamilyTag::TruncNormal | FamilyTag::TruncLogNormal
            | FamilyTag::TruncGumbel => theta[1] > 0.0,
            FamilyTag::Triangular => {
                let (lo, hi) = self.support.unwrap();
                lo < theta[0] && theta[0] < hi
            }
            FamilyTag::Uniform => false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::domain(format!("invalid spec JSON: {e}")))
    }

    /// Cached evaluator for this spec.
    pub(crate) fn density(&self) -> Result<Density> {
        Density::new(self)
    }
}

/// Evaluator with the per-θ constants (standardized bounds, truncation mass,
/// score centering moments) precomputed once.
#[derive(Debug, Clone)]
pub(crate) enum Density {
    Normal {
        mu: f64,
        sigma: f64,
    },
    /// Shared by trunc_normal (log == false) and trunc_lognormal (log == true,
    /// standardization applied to ln x).
    TruncGauss {
        mu: f64,
        sigma: f64,
        lo: f64,
        hi: f64,
        log: bool,

        beta: f64,
        mass: f64,
        cdf_alpha: f64,
        /// First and second moments of the standardized truncated normal,
        /// used to center the scores.
        m1: f64,
        m2: f64,
    },
    TruncGumbel {
        loc: f64,
        scale: f64,
        lo: f64,
        hi: f64,

        beta: f64,
        mass: f64,
        cdf_alpha: f64,
        /// Score centering constants from the truncation normalizer.
        c_loc: f64,
        c_scale: f64,
    },
    Triangular {
        lo: f64,
        mode: f64,
        hi: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

/// Stable Φ(β) − Φ(α).
fn normal_mass(alpha: f64, beta: f64) -> f64 {
    if alpha >= 0.0 {
        norm_sf(alpha) - norm_sf(beta)
    } else {
        norm_cdf(beta) - norm_cdf(alpha)
    }
}

/// Stable standard-Gumbel mass F̃(β) − F̃(α) via expm1.
fn gumbel_mass(alpha: f64, beta: f64) -> f64 {
    let ua = (-alpha).exp();
    let ub = (-beta).exp();
    f64::exp_m1(-ub) - f64::exp_m1(-ua)
}

impl Density {
    fn new(spec: &DistributionSpec) -> Result<Self> {
        let d = match spec.family {
            FamilyTag::Normal => Density::Normal { mu: spec.theta[0], sigma: spec.theta[1] },
            FamilyTag::TruncNormal | FamilyTag::TruncLogNormal => {
                let log = spec.family == FamilyTag::TruncLogNormal;
                let (lo, hi) = spec.support.unwrap();
                let (mu, sigma) = (spec.theta[0], spec.theta[1]);
                let (slo, shi) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
                let alpha = (slo - mu) / sigma;
                let beta = (shi - mu) / sigma;
                let mass = normal_mass(alpha, beta);
                if !mass.is_finite() || mass <= 0.0 {
                    return Err(Error::domain(format!(
                        "no parent mass on [{lo}, {hi}] for {}({mu}, {sigma})",
                        spec.family.name()
                    )));
                }
                let (pa, pb) = (norm_pdf(alpha), norm_pdf(beta));
                let m1 = (pa - pb) / mass;
                let m2 = 1.0 + (alpha * pa - beta * pb) / mass;
                Density::TruncGauss {
                    mu,
                    sigma,
                    lo,
                    hi,
                    log,
                    beta,
                    mass,
                    cdf_alpha: norm_cdf(alpha),
                    m1,
                    m2,
                }
            }
            FamilyTag::TruncGumbel => {
                let (lo, hi) = spec.support.unwrap();
                let (loc, scale) = (spec.theta[0], spec.theta[1]);
                let alpha = (lo - loc) / scale;
                let beta = (hi - loc) / scale;
                let mass = gumbel_mass(alpha, beta);
                if !mass.is_finite() || mass <= 0.0 {
                    return Err(Error::domain(format!(
                        "no parent mass on [{lo}, {hi}] for trunc_gumbel({loc}, {scale})"
                    )));
                }
                let (ga, gb) = (gumbel_pdf(alpha), gumbel_pdf(beta));
                Density::TruncGumbel {
                    loc,
                    scale,
                    lo,
                    hi,
                    beta,
                    mass,
                    cdf_alpha: gumbel_cdf(alpha),
                    c_loc: (ga - gb) / mass,
                    c_scale: (alpha * ga - beta * gb) / mass,
                }
            }
            FamilyTag::Triangular => {
                let (lo, hi) = spec.support.unwrap();
                Density::Triangular { lo, mode: spec.theta[0], hi }
            }
            FamilyTag::Uniform => {
                let (lo, hi) = spec.support.unwrap();
                Density::Uniform { lo, hi }
            }
        };
        Ok(d)
    }

    pub(crate) fn support(&self) -> (f64, f64) {
        match self {
            Density::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Density::TruncGauss { lo, hi, .. }
            | Density::TruncGumbel { lo, hi, .. }
            | Density::Triangular { lo, hi, .. }
            | Density::Uniform { lo, hi } => (*lo, *hi),
        }
    }

    pub(crate) fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi || x.is_nan() {
            return 0.0;
        }
        match *self {
            Density::Normal { mu, sigma } => norm_pdf((x - mu) / sigma) / sigma,
            Density::TruncGauss { mu, sigma, log, mass, .. } => {
                let (y, jac) = if log { (x.ln(), 1.0 / x) } else { (x, 1.0) };
                let z = (y - mu) / sigma;
                norm_pdf(z) / (sigma * mass) * jac
            }
            Density::TruncGumbel { loc, scale, mass, .. } => {
                let z = (x - loc) / scale;
                gumbel_pdf(z) / (scale * mass)
            }
            Density::Triangular { lo, mode, hi } => {
                if x <= mode {
                    2.0 * (x - lo) / ((hi - lo) * (mode - lo))
                } else {
                    2.0 * (hi - x) / ((hi - lo) * (hi - mode))
                }
            }
            Density::Uniform { lo, hi } => 1.0 / (hi - lo),
        }
    }

    pub(crate) fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match *self {
            Density::Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            Density::TruncGauss { mu, sigma, log, mass, cdf_alpha, .. } => {
                let y = if log { x.ln() } else { x };
                let z = (y - mu) / sigma;
                ((norm_cdf(z) - cdf_alpha) / mass).clamp(0.0, 1.0)
            }
            Density::TruncGumbel { loc, scale, mass, cdf_alpha, .. } => {
                let z = (x - loc) / scale;
                ((gumbel_cdf(z) - cdf_alpha) / mass).clamp(0.0, 1.0)
            }
            Density::Triangular { lo, mode, hi } => {
                if x <= mode {
                    (x - lo) * (x - lo) / ((hi - lo) * (mode - lo))
                } else {
                    1.0 - (hi - x) * (hi - x) / ((hi - lo) * (hi - mode))
                }
            }
            Density::Uniform { lo, hi } => (x - lo) / (hi - lo),
        }
    }

    /// Upper tail 1 − cdf, computed without cancellation (needed to recover
    /// standard-space coordinates deep in the right tail).
    pub(crate) fn sf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        match *self {
            Density::Normal { mu, sigma } => norm_sf((x - mu) / sigma),
            Density::TruncGauss { mu, sigma, log, mass, beta, .. } => {
                let y = if log { x.ln() } else { x };
                let z = (y - mu) / sigma;
                (normal_mass(z, beta) / mass).clamp(0.0, 1.0)
            }
            Density::TruncGumbel { loc, scale, mass, beta, .. } => {
                let z = (x - loc) / scale;
                (gumbel_mass(z, beta) / mass).clamp(0.0, 1.0)
            }
            Density::Triangular { .. } | Density::Uniform { .. } => 1.0 - self.cdf(x),
        }
    }

    pub(crate) fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!(
                "quantile level must lie strictly inside (0, 1), got {u}"
            )));
        }
        let x = match *self {
            Density::Normal { mu, sigma } => mu + sigma * norm_quantile(u),
            Density::TruncGauss { mu, sigma, mass, cdf_alpha, log, .. } => {
                let y = mu + sigma * norm_quantile(cdf_alpha + u * mass);
                if log {
                    y.exp()
                } else {
                    y
                }
            }
            Density::TruncGumbel { loc, scale, mass, cdf_alpha, .. } => {
                loc + scale * gumbel_quantile(cdf_alpha + u * mass)
            }
            Density::Triangular { lo, mode, hi } => {
                let pivot = (mode - lo) / (hi - lo);
                if u <= pivot {
                    lo + (u * (hi - lo) * (mode - lo)).sqrt()
                } else {
                    hi - ((1.0 - u) * (hi - lo) * (hi - mode)).sqrt()
                }
            }
            Density::Uniform { lo, hi } => lo + u * (hi - lo),
        };
        // Rounding may push a truncated quantile a hair outside the support.
        let (lo, hi) = self.support();
        Ok(x.clamp(lo, hi))
    }

    /// ∇_θ log f_θ(x), including the θ-dependence of the truncation mass.
    pub(crate) fn score(&self, x: f64) -> Result<[f64; 2]> {
        let (lo, hi) = self.support();
        if !(x > lo && x < hi) {
            return Err(Error::domain(format!(
                "score requires x strictly inside the support, got {x} for [{lo}, {hi}]"
            )));
        }
        let s = match *self {
            Density::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                [z / sigma, (z * z - 1.0) / sigma]
            }
            Density::TruncGauss { mu, sigma, log, m1, m2, .. } => {
                let y = if log { x.ln() } else { x };
                let z = (y - mu) / sigma;
                [(z - m1) / sigma, (z * z - m2) / sigma]
            }
            Density::TruncGumbel { loc, scale, c_loc, c_scale, .. } => {
                let z = (x - loc) / scale;
                let emz = (-z).exp();
                [
                    ((1.0 - emz) - c_loc) / scale,
                    (z * (1.0 - emz) - 1.0 - c_scale) / scale,
                ]
            }
            Density::Triangular { lo, mode, hi } => {
                if x <= mode {
                    [-1.0 / (mode - lo), 0.0]
                } else {
                    [1.0 / (hi - mode), 0.0]
                }
            }
            Density::Uniform { .. } => {
                return Err(Error::UnsupportedFamily {
                    family: "uniform",
                    operation: "score",
                })
            }
        };
        Ok(s)
    }
}

/// Fisher information matrix evaluated at a parameter point.
#[derive(Debug, Clone)]
pub struct FisherMatrix {
    pub matrix: SymMat,
    pub theta_at: Vec<f64>,
}

/// Density value `f_θ(x)`; zero outside the support.
pub fn pdf(spec: &DistributionSpec, x: f64) -> f64 {
    spec.density().expect("validated spec").pdf(x)
}

/// Distribution function; 0 below and 1 above the support.
pub fn cdf(spec: &DistributionSpec, x: f64) -> f64 {
    spec.density().expect("validated spec").cdf(x)
}

/// Quantile (inverse cdf) for u strictly inside (0, 1).
pub fn quantile(spec: &DistributionSpec, u: f64) -> Result<f64> {
    spec.density().expect("validated spec").quantile(u)
}

/// `n` i.i.d. draws by inversion; deterministic for a given seed.
pub fn sample(spec: &DistributionSpec, seed: u64, n: usize) -> Vec<f64> {
    let density = spec.density().expect("validated spec");
    let mut rng = Pcg64::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = loop {
                let u: f64 = rng.gen();
                if u > 0.0 {
                    break u;
                }
            };
            density.quantile(u).expect("u in (0,1)")
        })
        .collect()
}

/// Score function ∇_θ log f_θ(x) for x strictly inside the support.
pub fn score(spec: &DistributionSpec, x: f64) -> Result<Vec<f64>> {
    let s = spec.density()?.score(x)?;
    Ok(s[..spec.r()].to_vec())
}

/// Fisher information matrix I(θ) = E[∇log f (∇log f)ᵀ].
///
/// Closed form for the normal and triangular families; adaptive
/// Gauss-Legendre quadrature of the score outer product over the support for
/// the truncated families (relative tolerance 1e-8).
pub fn fisher_information(spec: &DistributionSpec) -> Result<FisherMatrix> {
    if !spec.family.has_fisher_structure() {
        return Err(Error::UnsupportedFamily {
            family: spec.family.name(),
            operation: "fisher_information",
        });
    }
    let matrix = match spec.family {
        FamilyTag::Normal => {
            let sigma = spec.theta[1];
            SymMat::diag(2, [1.0 / (sigma * sigma), 2.0 / (sigma * sigma)])
        }
        FamilyTag::Triangular => {
            let (lo, hi) = spec.support.unwrap();
            let m = spec.theta[0];
            SymMat::new_1d(1.0 / ((m - lo) * (hi - m)))
        }
        _ => {
            let density = spec.density()?;
            let (lo, hi) = density.support();
            let integrand = |x: f64| -> [f64; 3] {
                let w = density.pdf(x);
                if w <= 0.0 {
                    return [0.0; 3];
                }
                let s = density.score(x).unwrap_or([0.0; 2]);
                [s[0] * s[0] * w, s[0] * s[1] * w, s[1] * s[1] * w]
            };
            let v = quad::integrate_adaptive_vec(&integrand, lo, hi, FIM_REL_TOL, 1e-14)?;
            SymMat::new_2d(v[0], v[1], v[2])
        }
    };
    if !matrix.is_finite() {
        return Err(Error::numerical(format!(
            "non-finite Fisher information at theta {:?}",
            spec.theta
        )));
    }
    if matrix.min_eigenvalue() <= 0.0 {
        return Err(Error::numerical(format!(
            "Fisher information not positive definite at theta {:?} (min eigenvalue {})",
            spec.theta,
            matrix.min_eigenvalue()
        )));
    }
    Ok(FisherMatrix { matrix, theta_at: spec.theta.clone() })
}

/// ∂I/∂θ_j for each parameter, as r matrices of shape r×r.
///
/// Analytic for the normal and triangular families; central finite
/// differences of [`fisher_information`] with step `1e-4·max(1, |θ_j|)`
/// otherwise. (The triangular case must be closed-form: near the support
/// boundary its information varies on the scale of the mode-to-edge gap,
/// which the |θ|-proportional stencil overshoots.)
pub fn fisher_information_gradient(spec: &DistributionSpec) -> Result<Vec<SymMat>> {
    if !spec.family.has_fisher_structure() {
        return Err(Error::UnsupportedFamily {
            family: spec.family.name(),
            operation: "fisher_information_gradient",
        });
    }
    if spec.family == FamilyTag::Normal {
        let sigma = spec.theta[1];
        let s3 = sigma * sigma * sigma;
        return Ok(vec![
            SymMat::zeros(2),
            SymMat::diag(2, [-2.0 / s3, -4.0 / s3]),
        ]);
    }
    if spec.family == FamilyTag::Triangular {
        let (lo, hi) = spec.support.unwrap();
        let m = spec.theta[0];
        let u = (m - lo) * (hi - m);
        return Ok(vec![SymMat::new_1d(-((hi + lo) - 2.0 * m) / (u * u))]);
    }
    let r = spec.r();
    let mut stencil = Vec::with_capacity(r);
    for j in 0..r {
        let h = 1e-4 * spec.theta[j].abs().max(1.0);
        let mut up = spec.theta.clone();
        let mut down = spec.theta.clone();
        up[j] += h;
        down[j] -= h;
        if !spec.theta_in_domain(&up) || !spec.theta_in_domain(&down) {
            return Err(Error::domain(format!(
                "finite-difference stencil leaves the parameter domain at theta {:?} (component {j})",
                spec.theta
            )));
        }
        stencil.push((h, up, down));
    }
    let mut grads = Vec::with_capacity(r);
    for (h, up, down) in stencil {
        let fim_up = fisher_information(&spec.with_theta(up)?)?;
        let fim_down = fisher_information(&spec.with_theta(down)?)?;
        grads.push(fim_up.matrix.add(&fim_down.matrix.scale(-1.0)).scale(1.0 / (2.0 * h)));
    }
    Ok(grads)
}

/// KL(p‖q) = ∫ p log(p/q) by composite Simpson's rule on 2001 points.
///
/// Requires q's support to contain p's. Unbounded densities are integrated
/// over their central ±8.5σ range (the truncated tail mass is ~1e-17).
pub fn kl_divergence(p: &DistributionSpec, q: &DistributionSpec) -> Result<f64> {
    let (plo, phi) = p.support_interval();
    let (qlo, qhi) = q.support_interval();
    if qlo > plo || qhi < phi {
        return Err(Error::domain(format!(
            "KL requires q's support [{qlo}, {qhi}] to contain p's [{plo}, {phi}]"
        )));
    }
    let dp = p.density()?;
    let dq = q.density()?;
    let (a, b) = if plo.is_finite() {
        (plo, phi)
    } else {
        let (mu, sigma) = (p.theta[0], p.theta[1]);
        (mu - 8.5 * sigma, mu + 8.5 * sigma)
    };
    let integrand = |x: f64| {
        let fp = dp.pdf(x);
        if fp <= 0.0 {
            return 0.0;
        }
        let fq = dq.pdf(x);
        if fq <= 0.0 {
            // Only possible at isolated support endpoints; the log
            // singularity there is integrable and dropped.
            return 0.0;
        }
        fp * (fp / fq).ln()
    };
    Ok(quad::simpson(integrand, a, b, 2001))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive_split;

    fn flood_gumbel() -> DistributionSpec {
        DistributionSpec::trunc_gumbel(1013.0, 558.0, 500.0, 3000.0).unwrap()
    }

    #[test]
    fn spec_json_round_trip_matches_declared_schema() {
        let spec = DistributionSpec::trunc_lognormal(0.0, 0.76, 0.1, 10.0).unwrap();
        let json = spec.to_json();
        assert_eq!(
            json,
            r#"{"family":"trunc_lognormal","theta":[0.0,0.76],"support":[0.1,10.0]}"#
        );
        assert_eq!(DistributionSpec::from_json(&json).unwrap(), spec);

        let normal = DistributionSpec::normal(0.0, 1.0).unwrap();
        assert_eq!(normal.to_json(), r#"{"family":"normal","theta":[0.0,1.0]}"#);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(DistributionSpec::normal(0.0, 0.0).is_err());
        assert!(DistributionSpec::trunc_normal(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(DistributionSpec::trunc_lognormal(0.0, 0.5, -1.0, 2.0).is_err());
        assert!(DistributionSpec::triangular(49.0, 49.0, 51.0).is_err());
        assert!(DistributionSpec::new(FamilyTag::Normal, vec![0.0, 1.0], Some((0.0, 1.0))).is_err());
        assert!(DistributionSpec::from_json(r#"{"family":"normal","theta":[0.0,-1.0]}"#).is_err());
    }

    #[test]
    fn pdf_examples() {
        let n01 = DistributionSpec::normal(0.0, 1.0).unwrap();
        assert!((pdf(&n01, 0.0) - 0.398_942_280_4).abs() < 1e-9);

        let tri = DistributionSpec::triangular(50.0, 49.0, 51.0).unwrap();
        assert!((pdf(&tri, 50.0) - 1.0).abs() < 1e-12);

        // Half-normal: renormalization by mass 1/2 gives 2·φ(0) at the origin.
        let half = DistributionSpec::trunc_normal(0.0, 1.0, 0.0, 40.0).unwrap();
        assert!((pdf(&half, 0.0) - 0.797_884_560_8).abs() < 1e-9);

        assert_eq!(pdf(&tri, 52.0), 0.0);
    }

    #[test]
    fn cdf_quantile_examples() {
        let n01 = DistributionSpec::normal(0.0, 1.0).unwrap();
        assert!((cdf(&n01, 0.0) - 0.5).abs() < 1e-15);

        let tri = DistributionSpec::triangular(50.0, 49.0, 51.0).unwrap();
        assert!((quantile(&tri, 0.5).unwrap() - 50.0).abs() < 1e-12);

        let gum = flood_gumbel();
        assert_eq!(cdf(&gum, 3000.0), 1.0);
        assert_eq!(cdf(&gum, 500.0), 0.0);

        assert!(quantile(&n01, 0.0).is_err());
        assert!(quantile(&n01, 1.0).is_err());
    }

    #[test]
    fn cdf_quantile_round_trip_all_families() {
        let specs = [
            DistributionSpec::normal(0.3, 2.0).unwrap(),
            DistributionSpec::trunc_normal(6.4, 4.27, 0.0, 12.8).unwrap(),
            DistributionSpec::trunc_lognormal(0.0, 0.76, 0.1, 10.0).unwrap(),
            flood_gumbel(),
            DistributionSpec::triangular(50.0, 49.0, 51.0).unwrap(),
            DistributionSpec::uniform(-44.9, 63.5).unwrap(),
        ];
        for spec in &specs {
            for i in 1..40 {
                let u = i as f64 / 40.0;
                let x = quantile(spec, u).unwrap();
                let back = quantile(spec, cdf(spec, x)).unwrap();
                assert!(
                    (back - x).abs() <= 1e-9 * x.abs().max(1.0),
                    "{:?} u={u}: x={x} back={back}",
                    spec.family()
                );
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let gum = flood_gumbel();
        let a = sample(&gum, 7, 1000);
        let b = sample(&gum, 7, 1000);
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| (500.0..=3000.0).contains(&x)));
        let c = sample(&gum, 8, 1000);
        assert_ne!(a, c);
    }

    #[test]
    fn empirical_cdf_matches_cdf_ks() {
        // Kolmogorov-Smirnov statistic below 0.01 at 1e5 draws.
        for spec in [
            DistributionSpec::trunc_lognormal(0.0, 0.76, 0.1, 10.0).unwrap(),
            flood_gumbel(),
            DistributionSpec::triangular(55.0, 54.0, 56.0).unwrap(),
        ] {
            let n = 100_000;
            let mut xs = sample(&spec, 99, n);
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut ks = 0.0f64;
            for (i, &x) in xs.iter().enumerate() {
                let f = cdf(&spec, x);
                let hi = (i + 1) as f64 / n as f64;
                let lo = i as f64 / n as f64;
                ks = ks.max((f - hi).abs()).max((f - lo).abs());
            }
            assert!(ks < 0.01, "{:?}: KS = {ks}", spec.family());
        }
    }

    #[test]
    fn pdf_normalizes_on_every_family() {
        let specs = [
            DistributionSpec::trunc_normal(6.4, 4.27, 0.0, 12.8).unwrap(),
            DistributionSpec::trunc_lognormal(-0.1, 0.45, 0.23, 3.45).unwrap(),
            flood_gumbel(),
            DistributionSpec::triangular(50.0, 49.0, 51.0).unwrap(),
            DistributionSpec::uniform(0.0, 2.0).unwrap(),
        ];
        for spec in &specs {
            let (lo, hi) = spec.support_interval();
            let splits: Vec<f64> =
                if spec.family() == FamilyTag::Triangular { vec![spec.theta()[0]] } else { vec![] };
            let total = integrate_adaptive_split(|x| pdf(spec, x), lo, hi, &splits, 1e-10, 1e-14)
                .unwrap();
            assert!((total - 1.0).abs() < 1e-8, "{:?}: ∫pdf = {total}", spec.family());
        }
        // Unbounded normal over ±10σ.
        let n = DistributionSpec::normal(1.0, 2.0).unwrap();
        let total =
            integrate_adaptive_split(|x| pdf(&n, x), -19.0, 21.0, &[], 1e-10, 1e-14).unwrap();
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn score_examples() {
        let n01 = DistributionSpec::normal(0.0, 1.0).unwrap();
        let s = score(&n01, 1.0).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14);
        assert!(s[1].abs() < 1e-14);

        let tri = DistributionSpec::triangular(50.0, 49.0, 51.0).unwrap();
        let s = score(&tri, 49.5).unwrap();
        assert!((s[0] + 1.0).abs() < 1e-14); // -1/(m - a) = -1
        let s = score(&tri, 50.5).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14); // 1/(b - m) = 1

        assert!(score(&tri, 52.0).is_err());
    }

    #[test]
    fn score_matches_finite_difference_of_log_pdf() {
        // Truncation normalizer θ-dependence must be included.
        let specs = [
            DistributionSpec::trunc_normal(6.4, 4.27, 0.0, 12.8).unwrap(),
            DistributionSpec::trunc_lognormal(0.0, 0.76, 0.1, 10.0).unwrap(),
            flood_gumbel(),
        ];
        for spec in &specs {
            let xs: Vec<f64> = (1..8)
                .map(|i| quantile(spec, i as f64 / 8.0).unwrap())
                .collect();
            for &x in &xs {
                let s = score(spec, x).unwrap();
                for j in 0..spec.r() {
                    let h = 1e-6 * spec.theta()[j].abs().max(1.0);
                    let mut up = spec.theta().to_vec();
                    let mut down = up.clone();
                    up[j] += h;
                    down[j] -= h;
                    let lp_up = pdf(&spec.with_theta(up).unwrap(), x).ln();
                    let lp_down = pdf(&spec.with_theta(down).unwrap(), x).ln();
                    let fd = (lp_up - lp_down) / (2.0 * h);
                    let tol = 1e-5 * fd.abs().max(1e-3);
                    assert!(
                        (s[j] - fd).abs() < tol,
                        "{:?} x={x} j={j}: score={} fd={}",
                        spec.family(),
                        s[j],
                        fd
                    );
                }
            }
        }
    }

    #[test]
    fn score_has_zero_mean_by_monte_carlo() {
        let specs = [
            DistributionSpec::normal(0.0, 1.0).unwrap(),
            DistributionSpec::trunc_normal(6.4, 4.27, 0.0, 12.8).unwrap(),
            DistributionSpec::trunc_lognormal(0.0, 0.76, 0.1, 10.0).unwrap(),
            flood_gumbel(),
            DistributionSpec::triangular(50.0, 49.0, 51.0).unwrap(),
        ];
        let n = 100_000;
        for spec in &specs {
            let xs = sample(spec, 1234, n);
            let r = spec.r();
            let mut mean = [0.0f64; 2];
            let mut sq = [0.0f64; 2];
            for &x in &xs {
                let s = score(spec, x).unwrap();
                for j in 0..r {
                    mean[j] += s[j];
                    sq[j] += s[j] * s[j];
                }
            }
            for j in 0..r {
                let m = mean[j] / n as f64;
                let var = sq[j] / n as f64 - m * m;
                let se = (var / n as f64).sqrt();
                assert!(
                    m.abs() <= 4.0 * se,
                    "{:?} component {j}: mean {m} vs 4se {}",
                    spec.family(),
                    4.0 * se
                );
            }
        }
    }

    #[test]
    fn fisher_information_normal_is_analytic() {
        let n01 = DistributionSpec::normal(3.0, 1.0).unwrap();
        let fim = fisher_information(&n01).unwrap();
        assert!((fim.matrix.get(0, 0) - 1.0).abs() < 1e-14);
        assert!((fim.matrix.get(1, 1) - 2.0).abs() < 1e-14);
        assert_eq!(fim.matrix.get(0, 1), 0.0);
    }

    #[test]
    fn fisher_information_triangular_closed_form() {
        let tri = DistributionSpec::triangular(50.0, 49.0, 51.0).unwrap();
        let fim = fisher_information(&tri).unwrap();
        assert!((fim.matrix.get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trunc_gauss_fim_quadrature_matches_moment_formula() {
        // Independent closed form: with z the standardized variable and Mk
        // the truncated-normal moments, I = [[M2-M1², M3-M1·M2], [·, M4-M2²]]/σ².
        let spec = DistributionSpec::trunc_normal(6.4, 4.27, 0.0, 12.8).unwrap();
        let fim = fisher_information(&spec).unwrap();
        let (mu, sigma) = (6.4, 4.27);
        let (alpha, beta) = ((0.0 - mu) / sigma, (12.8 - mu) / sigma);
        let z = normal_mass(alpha, beta);
        let (pa, pb) = (norm_pdf(alpha), norm_pdf(beta));
        let m1 = (pa - pb) / z;
        let m2 = 1.0 + (alpha * pa - beta * pb) / z;
        let m3 = 2.0 * m1 + (alpha * alpha * pa - beta * beta * pb) / z;
        let m4 = 3.0 * m2 + (alpha.powi(3) * pa - beta.powi(3) * pb) / z;
        let s2 = sigma * sigma;
        assert!((fim.matrix.get(0, 0) - (m2 - m1 * m1) / s2).abs() < 1e-9);
        assert!((fim.matrix.get(0, 1) - (m3 - m1 * m2) / s2).abs() < 1e-9);
        assert!((fim.matrix.get(1, 1) - (m4 - m2 * m2) / s2).abs() < 1e-9);
    }

    #[test]
    fn fim_matches_monte_carlo_score_covariance() {
        // Sampling oracle for the quadrature path (1e6 draws, 3 SE).
        let spec = flood_gumbel();
        let fim = fisher_information(&spec).unwrap();
        let n = 1_000_000;
        let xs = sample(&spec, 4321, n);
        let mut mean = [0.0f64; 2];
        let mut cov = [0.0f64; 3];
        let mut second = [0.0f64; 3]; // running E[(s_i s_j)²] for SEs
        for &x in &xs {
            let s = score(&spec, x).unwrap();
            mean[0] += s[0];
            mean[1] += s[1];
            let prods = [s[0] * s[0], s[0] * s[1], s[1] * s[1]];
            for k in 0..3 {
                cov[k] += prods[k];
                second[k] += prods[k] * prods[k];
            }
        }
        let nf = n as f64;
        mean[0] /= nf;
        mean[1] /= nf;
        let entries = [(0usize, 0usize), (0, 1), (1, 1)];
        for (k, &(i, j)) in entries.iter().enumerate() {
            let e = cov[k] / nf;
            let var = second[k] / nf - e * e;
            let se = (var / nf).sqrt();
            let mc = e - mean[i] * mean[j];
            let got = fim.matrix.get(i, j);
            assert!(
                (got - mc).abs() <= 3.0 * se,
                "entry ({i},{j}): fim={got} mc={mc} se={se}"
            );
        }
    }

    #[test]
    fn fim_gradient_normal_analytic() {
        let n01 = DistributionSpec::normal(0.0, 1.0).unwrap();
        let grads = fisher_information_gradient(&n01).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(grads[0].get(i, j), 0.0);
            }
        }
        assert!((grads[1].get(0, 0) + 2.0).abs() < 1e-14);
        assert!((grads[1].get(1, 1) + 4.0).abs() < 1e-14);
    }

    #[test]
    fn fim_gradient_fd_is_richardson_stable() {
        // Halving the step must not move the truncated-normal result by more
        // than 1e-3 relative.
        let spec = DistributionSpec::trunc_normal(6.4, 4.27, 0.0, 12.8).unwrap();
        let g = fisher_information_gradient(&spec).unwrap();
        for j in 0..2 {
            let h = 0.5e-4 * spec.theta()[j].abs().max(1.0);
            let mut up = spec.theta().to_vec();
            let mut down = up.clone();
            up[j] += h;
            down[j] -= h;
            let f_up = fisher_information(&spec.with_theta(up).unwrap()).unwrap();
            let f_down = fisher_information(&spec.with_theta(down).unwrap()).unwrap();
            for (a, b) in [(0, 0), (0, 1), (1, 1)] {
                let halved = (f_up.matrix.get(a, b) - f_down.matrix.get(a, b)) / (2.0 * h);
                let full = g[j].get(a, b);
                let scale = full.abs().max(1e-6);
                assert!(
                    (halved - full).abs() / scale < 1e-3,
                    "j={j} entry ({a},{b}): {full} vs {halved}"
                );
            }
        }
    }

    #[test]
    fn fim_gradient_stencil_domain_error() {
        // Scale so close to zero that the finite-difference stencil leaves
        // the parameter domain.
        let tn = DistributionSpec::trunc_normal(6.4, 5e-5, 0.0, 12.8).unwrap();
        assert!(matches!(
            fisher_information_gradient(&tn),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fim_gradient_triangular_analytic_matches_derivative() {
        for m in [49.2, 50.0, 50.9] {
            let tri = DistributionSpec::triangular(m, 49.0, 51.0).unwrap();
            let g = fisher_information_gradient(&tri).unwrap()[0].get(0, 0);
            let h = 1e-6;
            let up = fisher_information(&DistributionSpec::triangular(m + h, 49.0, 51.0).unwrap())
                .unwrap();
            let down =
                fisher_information(&DistributionSpec::triangular(m - h, 49.0, 51.0).unwrap())
                    .unwrap();
            let fd = (up.matrix.get(0, 0) - down.matrix.get(0, 0)) / (2.0 * h);
            assert!((g - fd).abs() < 1e-4 * fd.abs().max(1.0), "m={m}: {g} vs {fd}");
        }
    }

    #[test]
    fn kl_divergence_examples() {
        let tri = DistributionSpec::triangular(0.0, -1.0, 1.0).unwrap();
        assert!(kl_divergence(&tri, &tri).unwrap().abs() < 1e-9);

        let p = DistributionSpec::normal(0.4, 1.0).unwrap();
        let q = DistributionSpec::normal(0.0, 1.0).unwrap();
        let kl = kl_divergence(&p, &q).unwrap();
        assert!((kl - 0.08).abs() < 1e-6, "KL = {kl}");

        // Support mismatch: q narrower than p.
        let narrow = DistributionSpec::uniform(-0.5, 0.5).unwrap();
        let wide = DistributionSpec::uniform(-1.0, 1.0).unwrap();
        assert!(kl_divergence(&wide, &narrow).is_err());
        assert!(kl_divergence(&narrow, &wide).is_ok());
    }

    #[test]
    fn uniform_has_no_fisher_structure() {
        let u = DistributionSpec::uniform(-44.9, 63.5).unwrap();
        assert!(matches!(
            fisher_information(&u),
            Err(Error::UnsupportedFamily { .. })
        ));
        assert!(score(&u, 0.0).is_err());
        // pdf/cdf/sample still work.
        assert!((pdf(&u, 0.0) - 1.0 / 108.4).abs() < 1e-12);
        assert_eq!(sample(&u, 3, 10).len(), 10);
    }
}
