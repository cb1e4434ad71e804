//! Perturbed-law indices: the Fisher-sphere OF-PLI and the standard-space
//! E-PLI baseline.
//!
//! The PLI of a perturbed input density g is the relative shift of the
//! output α-quantile, S = (q̂_δ − q̂)/q̂. The OF-PLI at radius δ is the
//! maximum S⁺ and minimum S⁻ of the PLI over a Fisher sphere of radius δ.
//! Two quantile estimators are available:
//!
//! * **reverse importance sampling** — reweights the fixed sample; the
//!   expensive-code regime, guarded by the N_Y ≥ 10 admissibility criterion
//!   that defines δ_max;
//! * **resampling** — for cheap models: pushes the base design through the
//!   iso-probabilistic transform F_δ⁻¹∘F of the perturbed input, giving an
//!   i.i.d. sample of the perturbed joint law coupled to the base design,
//!   and reruns the model on it. The coupling keeps S continuous as δ → 0
//!   (an independent redraw would leave Monte Carlo noise of the two
//!   quantile estimates in S at δ = 0).

use crate::distributions::{DistributionSpec, FamilyTag};
use crate::error::{Error, Result};
use crate::estimation::{
    admissible, empirical_quantile, likelihood_ratios, summarize_replicates, IOSample,
    QuantileScan, Tail,
};
use crate::geometry::{fisher_sphere, FisherSphere, IntegratorMethod};
use crate::models::{eval_rows, Model};
use crate::par::par_collect;
use crate::quad;
use crate::seed::{derive_seed, tag_f64};
use crate::special::{norm_cdf, norm_quantile};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

const TAG_OFPLI_BOOT: u64 = 0x0f11;

/// How perturbed quantiles are estimated.
pub enum QuantileEstimator<'a> {
    /// Reweight the fixed sample by likelihood ratios.
    ReverseIs,
    /// Rerun a cheap model on the iso-probabilistically transformed design.
    Resample { model: &'a dyn Model },
}

/// Geodesic integration settings for sphere construction.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicConfig {
    pub method: IntegratorMethod,
    pub n_steps: usize,
}

impl Default for GeodesicConfig {
    fn default() -> Self {
        GeodesicConfig { method: IntegratorMethod::AdamsMoulton, n_steps: 1000 }
    }
}

/// Settings for an OF-PLI curve run.
#[derive(Debug, Clone, Copy)]
pub struct OfpliConfig {
    pub alpha: f64,
    pub k: usize,
    pub geodesic: GeodesicConfig,
    /// Bootstrap replicates for the S⁺/S⁻ intervals; 0 disables them.
    pub b: usize,
    pub bootstrap_seed: u64,
}

fn base_quantile(sample: &IOSample, alpha: f64) -> Result<f64> {
    let q = empirical_quantile(sample.outputs(), alpha)?;
    if q == 0.0 {
        return Err(Error::domain(
            "baseline quantile is zero: the relative index is undefined",
        ));
    }
    Ok(q)
}

fn tail_for(alpha: f64) -> Tail {
    if alpha >= 0.5 {
        Tail::Upper
    } else {
        Tail::Lower
    }
}

/// Map a base-sample value of input `i` to the perturbed law through the
/// shared-uniform coupling u = F(x), x' = F_δ⁻¹(u). Support edges map to
/// edges.
fn iso_transform(
    nominal: &crate::distributions::Density,
    perturbed: &crate::distributions::Density,
    x: f64,
) -> f64 {
    let u = nominal.cdf(x);
    let (lo, hi) = perturbed.support();
    if u <= 0.0 {
        lo
    } else if u >= 1.0 {
        hi
    } else {
        perturbed.quantile(u).expect("u strictly inside (0,1)")
    }
}

/// Outcome of estimating one perturbed quantile.
struct PerturbedEstimate {
    quantile: f64,
    /// Count of outputs beyond the quantile on the tail that matters.
    tail_count: usize,
    /// Retained per-row payload for bootstrap recomputation.
    payload: Option<PointPayload>,
}

enum PointPayload {
    /// Likelihood ratios in base-row order (reverse importance sampling).
    Ratios(Vec<f64>),
    /// Model outputs on the transformed design, in base-row order.
    Outputs(Vec<f64>),
}

fn estimate_perturbed_quantile(
    sample: &IOSample,
    i: usize,
    perturbed: &DistributionSpec,
    alpha: f64,
    estimator: &QuantileEstimator,
    keep_payload: bool,
) -> Result<PerturbedEstimate> {
    let tail = tail_for(alpha);
    match estimator {
        QuantileEstimator::ReverseIs => {
            let ratios = likelihood_ratios(sample, i, perturbed)?;
            let scan = QuantileScan::new(sample.outputs());
            let (q, above, below) = scan.weighted_quantile_counts(|n| ratios[n], alpha)?;
            Ok(PerturbedEstimate {
                quantile: q,
                tail_count: if tail == Tail::Upper { above } else { below },
                payload: keep_payload.then_some(PointPayload::Ratios(ratios)),
            })
        }
        QuantileEstimator::Resample { model } => {
            let outputs = if perturbed == &sample.input_specs()[i] {
                // Exact identity: the transform is analytically the identity
                // map, so reuse the base rows bit for bit.
                sample.outputs().to_vec()
            } else {
                let nominal = sample.input_specs()[i].density()?;
                let pert = perturbed.density()?;
                let rows: Vec<Vec<f64>> = sample
                    .inputs()
                    .iter()
                    .map(|row| {
                        let mut row = row.clone();
                        row[i] = iso_transform(&nominal, &pert, row[i]);
                        row
                    })
                    .collect();
                eval_rows(*model, &rows)?
            };
            let q = empirical_quantile(&outputs, alpha)?;
            let tail_count = match tail {
                Tail::Upper => outputs.iter().filter(|y| **y > q).count(),
                Tail::Lower => outputs.iter().filter(|y| **y < q).count(),
            };
            Ok(PerturbedEstimate {
                quantile: q,
                tail_count,
                payload: keep_payload.then_some(PointPayload::Outputs(outputs)),
            })
        }
    }
}

/// Perturbed-law index S = (q̂_δ − q̂)/q̂ by reverse importance sampling.
pub fn pli(
    sample: &IOSample,
    i: usize,
    perturbed: &DistributionSpec,
    alpha: f64,
) -> Result<f64> {
    pli_with_estimator(sample, i, perturbed, alpha, &QuantileEstimator::ReverseIs)
}

/// PLI under a chosen quantile estimator.
pub fn pli_with_estimator(
    sample: &IOSample,
    i: usize,
    perturbed: &DistributionSpec,
    alpha: f64,
    estimator: &QuantileEstimator,
) -> Result<f64> {
    let q0 = base_quantile(sample, alpha)?;
    let est = estimate_perturbed_quantile(sample, i, perturbed, alpha, estimator, false)?;
    Ok((est.quantile - q0) / q0)
}

/// PLI of one sphere direction.
#[derive(Debug, Clone)]
pub struct SpherePointPli {
    pub direction_index: usize,
    pub angle: f64,
    pub spec: DistributionSpec,
    pub pli: f64,
    pub perturbed_quantile: f64,
    /// Sample outputs beyond the perturbed quantile (admissibility count).
    pub exceed_count: usize,
    pub admissible: bool,
}

/// OF-PLI at a single radius.
#[derive(Debug, Clone)]
pub struct OfpliAtDelta {
    pub input_index: usize,
    pub delta: f64,
    pub alpha: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub argmax: DistributionSpec,
    pub argmin: DistributionSpec,
    /// Whether every sphere point passed the N_Y criterion; a single failing
    /// point marks the whole level inadmissible.
    pub admissible: bool,
    pub n_valid: usize,
    pub n_invalid: usize,
    pub points: Vec<SpherePointPli>,
}

fn reject_uniform(spec: &DistributionSpec, what: &'static str) -> Result<()> {
    if !spec.family().has_fisher_structure() {
        return Err(Error::UnsupportedFamily { family: spec.family().name(), operation: what });
    }
    Ok(())
}

/// OF-PLI over an already-computed sphere (lets callers reuse spheres across
/// seeds or charts).
pub fn ofpli_with_sphere(
    sample: &IOSample,
    i: usize,
    sphere: &FisherSphere,
    alpha: f64,
    estimator: &QuantileEstimator,
) -> Result<OfpliAtDelta> {
    let (result, _) = ofpli_points(sample, i, sphere, alpha, estimator, false)?;
    Ok(result)
}

fn ofpli_points(
    sample: &IOSample,
    i: usize,
    sphere: &FisherSphere,
    alpha: f64,
    estimator: &QuantileEstimator,
    keep_payload: bool,
) -> Result<(OfpliAtDelta, Vec<PointPayload>)> {
    let q0 = base_quantile(sample, alpha)?;
    let valid: Vec<(usize, &DistributionSpec)> = sphere
        .valid_points()
        .map(|(pt, spec)| (pt.direction_index, spec))
        .collect();
    if valid.is_empty() {
        return Err(Error::SphereEmpty { k: sphere.points.len(), delta: sphere.radius });
    }
    let estimates = par_collect(valid.len(), |j| {
        let (_, spec) = valid[j];
        estimate_perturbed_quantile(sample, i, spec, alpha, estimator, keep_payload)
    });
    let mut points = Vec::with_capacity(valid.len());
    let mut payloads = Vec::new();
    for ((idx, spec), est) in valid.into_iter().zip(estimates) {
        let mut est = est?;
        let point = &sphere.points[idx];
        points.push(SpherePointPli {
            direction_index: idx,
            angle: point.angle,
            spec: spec.clone(),
            pli: (est.quantile - q0) / q0,
            perturbed_quantile: est.quantile,
            exceed_count: est.tail_count,
            admissible: admissible(est.tail_count, alpha, tail_for(alpha)),
        });
        if let Some(p) = est.payload.take() {
            payloads.push(p);
        }
    }
    let level_admissible = points.iter().all(|p| p.admissible);
    // S⁺/S⁻ range over the admissible points; when none survive, the level
    // is already flagged and the values fall back to the full valid set.
    let pool: Vec<&SpherePointPli> = {
        let adm: Vec<&SpherePointPli> = points.iter().filter(|p| p.admissible).collect();
        if adm.is_empty() {
            points.iter().collect()
        } else {
            adm
        }
    };
    let best = pool
        .iter()
        .max_by(|a, b| a.pli.partial_cmp(&b.pli).unwrap())
        .expect("non-empty pool");
    let worst = pool
        .iter()
        .min_by(|a, b| a.pli.partial_cmp(&b.pli).unwrap())
        .expect("non-empty pool");
    let result = OfpliAtDelta {
        input_index: i,
        delta: sphere.radius,
        alpha,
        s_plus: best.pli,
        s_minus: worst.pli,
        argmax: best.spec.clone(),
        argmin: worst.spec.clone(),
        admissible: level_admissible,
        n_valid: sphere.n_valid(),
        n_invalid: sphere.n_invalid(),
        points,
    };
    Ok((result, payloads))
}

/// Build the Fisher sphere at radius δ around input `i`'s nominal law and
/// take the OF-PLI over it.
pub fn ofpli_at_delta(
    sample: &IOSample,
    i: usize,
    delta: f64,
    alpha: f64,
    k: usize,
    geodesic: &GeodesicConfig,
    estimator: &QuantileEstimator,
) -> Result<OfpliAtDelta> {
    if i >= sample.d() {
        return Err(Error::domain(format!("input index {i} out of range")));
    }
    let nominal = &sample.input_specs()[i];
    reject_uniform(nominal, "Fisher perturbation")?;
    let sphere = fisher_sphere(nominal, delta, k, geodesic.method, geodesic.n_steps)?;
    ofpli_with_sphere(sample, i, &sphere, alpha, estimator)
}

/// One grid point of a [`PliCurve`].
#[derive(Debug, Clone)]
pub struct PliCurvePoint {
    pub delta: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub ci_plus: Option<(f64, f64)>,
    pub ci_minus: Option<(f64, f64)>,
    pub argmax: DistributionSpec,
    pub argmin: DistributionSpec,
    pub admissible: bool,
    pub n_valid: usize,
    pub n_invalid: usize,
    pub points: Vec<SpherePointPli>,
}

/// OF-PLI of one input over a δ grid, with the monotone admissibility cutoff.
#[derive(Debug, Clone)]
pub struct PliCurve {
    pub input_index: usize,
    pub alpha: f64,
    pub points: Vec<PliCurvePoint>,
    /// Largest admissible radius; `None` when the first grid point already
    /// fails the criterion.
    pub delta_max: Option<f64>,
}

/// OF-PLI curve over an increasing positive δ grid.
///
/// Bootstrap intervals (when `cfg.b > 0`) resample the base rows and
/// recompute the max/min over the same sphere specs, so they isolate the
/// statistical error from the geometric one.
pub fn ofpli_curve(
    sample: &IOSample,
    i: usize,
    delta_grid: &[f64],
    cfg: &OfpliConfig,
    estimator: &QuantileEstimator,
) -> Result<PliCurve> {
    if delta_grid.is_empty() {
        return Err(Error::domain("empty delta grid"));
    }
    if delta_grid.windows(2).any(|w| w[0] >= w[1]) || delta_grid[0] <= 0.0 {
        return Err(Error::domain("delta grid must be strictly increasing and positive"));
    }
    if i >= sample.d() {
        return Err(Error::domain(format!("input index {i} out of range")));
    }
    let nominal = &sample.input_specs()[i];
    reject_uniform(nominal, "Fisher perturbation")?;

    let mut points = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let sphere =
            fisher_sphere(nominal, delta, cfg.k, cfg.geodesic.method, cfg.geodesic.n_steps)?;
        let keep = cfg.b > 0;
        let (at_delta, payloads) =
            ofpli_points(sample, i, &sphere, cfg.alpha, estimator, keep)?;
        let (ci_plus, ci_minus) = if cfg.b > 0 {
            // The replicate extrema range over the same point set the base
            // estimates used: admissible points, or all valid ones when none
            // passed the criterion.
            let any_admissible = at_delta.points.iter().any(|p| p.admissible);
            let selected: Vec<&PointPayload> = at_delta
                .points
                .iter()
                .zip(&payloads)
                .filter(|(p, _)| p.admissible || !any_admissible)
                .map(|(_, payload)| payload)
                .collect();
            let seed = derive_seed(cfg.bootstrap_seed, &[TAG_OFPLI_BOOT, i as u64, tag_f64(delta)]);
            let (plus, minus) =
                bootstrap_sphere_extrema(sample, &selected, cfg.alpha, cfg.b, seed)?;
            (Some(plus), Some(minus))
        } else {
            (None, None)
        };
        points.push(PliCurvePoint {
            delta,
            s_plus: at_delta.s_plus,
            s_minus: at_delta.s_minus,
            ci_plus,
            ci_minus,
            argmax: at_delta.argmax,
            argmin: at_delta.argmin,
            admissible: at_delta.admissible,
            n_valid: at_delta.n_valid,
            n_invalid: at_delta.n_invalid,
            points: at_delta.points,
        });
    }
    // Monotone cutoff: once a radius fails the criterion, every larger one
    // is flagged too, whatever its own count said.
    let mut tripped = false;
    for p in points.iter_mut() {
        if !p.admissible {
            tripped = true;
        }
        if tripped {
            p.admissible = false;
        }
    }
    let delta_max = points.iter().take_while(|p| p.admissible).last().map(|p| p.delta);
    Ok(PliCurve { input_index: i, alpha: cfg.alpha, points, delta_max })
}

/// Percentile intervals on S⁺/S⁻: resample rows jointly, recompute every
/// selected sphere point's quantile from its retained payload, re-take the
/// extrema.
fn bootstrap_sphere_extrema(
    sample: &IOSample,
    payloads: &[&PointPayload],
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<((f64, f64), (f64, f64))> {
    let n = sample.n();
    let outputs = sample.outputs();
    let reps = par_collect(b, |r| -> Option<(f64, f64)> {
        let mut rng = Pcg64::seed_from_u64(derive_seed(seed, &[r as u64]));
        let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let base_rep: Vec<f64> = idx.iter().map(|&j| outputs[j]).collect();
        let q0 = empirical_quantile(&base_rep, alpha).ok()?;
        if q0 == 0.0 {
            return None;
        }
        let scan = QuantileScan::new(&base_rep);
        let mut s_plus = f64::NEG_INFINITY;
        let mut s_minus = f64::INFINITY;
        for payload in payloads {
            let q = match payload {
                PointPayload::Ratios(ratios) => {
                    scan.weighted_quantile_counts(|j| ratios[idx[j]], alpha).ok()?.0
                }
                PointPayload::Outputs(ys) => {
                    let rep: Vec<f64> = idx.iter().map(|&j| ys[j]).collect();
                    empirical_quantile(&rep, alpha).ok()?
                }
            };
            let s = (q - q0) / q0;
            s_plus = s_plus.max(s);
            s_minus = s_minus.min(s);
        }
        Some((s_plus, s_minus))
    });
    let plus: Vec<Option<f64>> = reps.iter().map(|r| r.map(|(p, _)| p)).collect();
    let minus: Vec<Option<f64>> = reps.iter().map(|r| r.map(|(_, m)| m)).collect();
    let sp = summarize_replicates(&plus, b)?;
    let sm = summarize_replicates(&minus, b)?;
    Ok(((sp.lo95, sp.hi95), (sm.lo95, sm.hi95)))
}

/// Standard-space mean-shift perturbation of an arbitrary density:
/// f_δ(x) = exp((−δ² + 2δΦ⁻¹(F(x)))/2) · f(x).
pub struct EpliDensity {
    nominal: DistributionSpec,
    delta: f64,
    density: crate::distributions::Density,
}

/// Construct the standard-space perturbed density at shift δ.
pub fn epli_perturbed_density(spec: &DistributionSpec, delta: f64) -> Result<EpliDensity> {
    if !delta.is_finite() {
        return Err(Error::domain("delta must be finite"));
    }
    Ok(EpliDensity { nominal: spec.clone(), delta, density: spec.density()? })
}

impl EpliDensity {
    pub fn nominal(&self) -> &DistributionSpec {
        &self.nominal
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Standard-space coordinate s = Φ⁻¹(F(x)), recovered from whichever
    /// tail keeps precision.
    fn standard_coord(&self, x: f64) -> f64 {
        let u = self.density.cdf(x);
        if u < 0.5 {
            norm_quantile(u)
        } else {
            -norm_quantile(self.density.sf(x))
        }
    }

    /// Density ratio f_δ(x)/f(x); exactly one at δ = 0.
    pub fn likelihood_ratio(&self, x: f64) -> f64 {
        if self.delta == 0.0 {
            return 1.0;
        }
        let s = self.standard_coord(x);
        if s == f64::NEG_INFINITY {
            // At the lower support edge the ratio vanishes for an upward
            // shift and diverges for a downward one.
            return if self.delta > 0.0 { 0.0 } else { f64::INFINITY };
        }
        ((-self.delta * self.delta + 2.0 * self.delta * s) / 2.0).exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let f = self.density.pdf(x);
        if f == 0.0 {
            return 0.0;
        }
        self.likelihood_ratio(x) * f
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let u = self.density.cdf(x);
        if u <= 0.0 || u >= 1.0 {
            return u;
        }
        norm_cdf(self.standard_coord(x) - self.delta)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile level {u} outside (0, 1)")));
        }
        self.density.quantile(norm_cdf(norm_quantile(u) + self.delta))
    }

    /// Push one base-sample value through the standard-space shift,
    /// x' = F⁻¹(Φ(Φ⁻¹(F(x)) + δ)); the identity at δ = 0.
    pub fn push_forward(&self, x: f64) -> f64 {
        if self.delta == 0.0 {
            return x;
        }
        let u = self.density.cdf(x);
        let (lo, hi) = self.density.support();
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 && self.density.sf(x) <= 0.0 {
            return hi;
        }
        let v = norm_cdf(self.standard_coord(x) + self.delta);
        // Float saturation of v only happens ~38σ out in standard space;
        // clamp to the representable open interval.
        let v = v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        self.density.quantile(v).expect("v inside (0,1)")
    }

    /// Deterministic i.i.d. draws by inversion.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = Pcg64::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u = loop {
                    let u: f64 = rng.gen();
                    if u > 0.0 {
                        break u;
                    }
                };
                self.quantile(u).expect("u in (0,1)")
            })
            .collect()
    }

    /// KL(f_δ‖f) by Simpson's rule after the change of variables
    /// s = Φ⁻¹(F(x)), under which the integrand is the smooth
    /// e^{δs−δ²/2}(δs − δ²/2)φ(s) whatever the family. That invariance also
    /// means the value is δ²/2 for every input law: f and f_δ are the
    /// pushforwards of N(0,1) and N(δ,1) through the same monotone map.
    /// (A moment-matched perturbation would not share this property; the
    /// standard-space shift does, which is exactly its interpretability
    /// problem in the physical space.)
    pub fn kl_vs_nominal(&self) -> f64 {
        let d = self.delta;
        let integrand = |s: f64| {
            let log_ratio = d * s - 0.5 * d * d;
            log_ratio.exp() * log_ratio * crate::special::norm_pdf(s)
        };
        quad::simpson(integrand, d.min(0.0) - 10.0, d.max(0.0) + 10.0, 2001)
    }

    /// ∫ f_δ over the support (diagnostic; Gauss-Legendre never touches the
    /// endpoint spike that bounded-support perturbations can have).
    pub fn mass(&self) -> Result<f64> {
        let (lo, hi) = self.density.support();
        let (a, b) = if lo.is_finite() {
            (lo, hi)
        } else {
            let t = self.nominal.theta();
            (t[0] - 10.0 * t[1], t[0] + 10.0 * t[1])
        };
        quad::integrate_adaptive(|x| self.pdf(x), a, b, 1e-6, 1e-12)
    }
}

/// E-PLI parameter sweep mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpliMode {
    /// Standard-space mean shift of size δ (any family).
    MeanShift,
    /// Gaussian variance sweep (the grid holds variances).
    VarianceScale,
}

#[derive(Debug, Clone, Copy)]
pub struct EpliPoint {
    pub param: f64,
    pub pli: f64,
}

/// PLI along a one-parameter perturbation family (the E-PLI baseline).
pub fn epli_curve(
    sample: &IOSample,
    i: usize,
    parameter_grid: &[f64],
    alpha: f64,
    mode: EpliMode,
    estimator: &QuantileEstimator,
) -> Result<Vec<EpliPoint>> {
    if i >= sample.d() {
        return Err(Error::domain(format!("input index {i} out of range")));
    }
    let nominal = sample.input_specs()[i].clone();
    if mode == EpliMode::VarianceScale && nominal.family() != FamilyTag::Normal {
        return Err(Error::UnsupportedFamily {
            family: nominal.family().name(),
            operation: "variance-scale E-PLI (Gaussian nominal only)",
        });
    }
    let q0 = base_quantile(sample, alpha)?;
    let scan = QuantileScan::new(sample.outputs());
    let mut out = Vec::with_capacity(parameter_grid.len());
    for &param in parameter_grid {
        let q = match mode {
            EpliMode::MeanShift => {
                let pert = epli_perturbed_density(&nominal, param)?;
                match estimator {
                    QuantileEstimator::ReverseIs => {
                        scan.weighted_quantile_counts(
                            |n| pert.likelihood_ratio(sample.inputs()[n][i]),
                            alpha,
                        )?
                        .0
                    }
                    QuantileEstimator::Resample { model } => {
                        let rows: Vec<Vec<f64>> = sample
                            .inputs()
                            .iter()
                            .map(|row| {
                                let mut row = row.clone();
                                row[i] = pert.push_forward(row[i]);
                                row
                            })
                            .collect();
                        let ys = eval_rows(*model, &rows)?;
                        empirical_quantile(&ys, alpha)?
                    }
                }
            }
            EpliMode::VarianceScale => {
                if !param.is_finite() || param <= 0.0 {
                    return Err(Error::domain(format!(
                        "variance grid values must be > 0, got {param}"
                    )));
                }
                let (mu, sigma) = (nominal.theta()[0], nominal.theta()[1]);
                // Reuse σ bit for bit when the grid hits the nominal variance,
                // keeping the identity perturbation exact.
                let new_sigma = if param == sigma * sigma { sigma } else { param.sqrt() };
                let pert = DistributionSpec::normal(mu, new_sigma)?;
                let est = estimate_perturbed_quantile(sample, i, &pert, alpha, estimator, false)?;
                est.quantile
            }
        };
        out.push(EpliPoint { param, pli: (q - q0) / q0 });
    }
    Ok(out)
}
