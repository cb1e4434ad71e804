//! JSON payload builders for the three demo panels.

use fisherpli::distributions::{self, DistributionSpec};
use fisherpli::error::{Error, Result};
use fisherpli::estimation::IOSample;
use fisherpli::geometry::{
    fisher_sphere, gaussian_fisher_distance, initial_momenta, integrate_geodesic, IntegratorMethod,
};
use fisherpli::models::{generate_sample, Ishigami, ModelSpec};
use fisherpli::robustness::{ofpli_with_sphere, QuantileEstimator};
use serde_json::json;

/// Keep trajectories drawable: at most ~this many vertices per polyline.
const MAX_POLYLINE: usize = 120;

pub fn gaussian_sphere(
    mu: f64,
    sigma: f64,
    delta: f64,
    k: usize,
    n_steps: usize,
) -> Result<serde_json::Value> {
    let center = DistributionSpec::normal(mu, sigma)?;
    let momenta = initial_momenta(&center, delta, k)?;
    let stride = n_steps.div_ceil(MAX_POLYLINE).max(1);
    let mut trajectories = Vec::with_capacity(momenta.len());
    for p0 in &momenta {
        let path = integrate_geodesic(&center, p0, IntegratorMethod::AdamsMoulton, n_steps)?;
        let points: Vec<[f64; 2]> = path
            .steps
            .iter()
            .enumerate()
            .filter(|(i, _)| i % stride == 0 || *i == path.steps.len() - 1)
            .map(|(_, s)| [s.q[0], s.q[1]])
            .collect();
        trajectories.push(json!({
            "status": path.status.label(),
            "max_drift": path.max_drift(),
            "length": path.measured_length(),
            "points": points,
        }));
    }
    let endpoint_check: Vec<f64> = trajectories
        .iter()
        .filter_map(|t| t["points"].as_array())
        .filter_map(|pts| pts.last())
        .map(|q| {
            gaussian_fisher_distance((mu, sigma), (q[0].as_f64().unwrap(), q[1].as_f64().unwrap()))
                .unwrap_or(f64::NAN)
        })
        .collect();
    Ok(json!({
        "center": [mu, sigma],
        "delta": delta,
        "trajectories": trajectories,
        "oracle_distances": endpoint_check,
    }))
}

pub fn perturbed_density(
    spec_json: &str,
    delta: f64,
    angle: f64,
    n_steps: usize,
    n_grid: usize,
) -> Result<serde_json::Value> {
    let spec = DistributionSpec::from_json(spec_json)?;
    if n_grid < 2 {
        return Err(Error::domain("need at least two grid points"));
    }
    let perturbed = if delta == 0.0 {
        spec.clone()
    } else {
        let fim = distributions::fisher_information(&spec)?;
        let l = fim.matrix.cholesky_lower()?;
        let p0 = if spec.r() == 1 {
            let u = if angle.cos() >= 0.0 { 1.0 } else { -1.0 };
            vec![delta * l[0][0] * u]
        } else {
            vec![
                delta * l[0][0] * angle.cos(),
                delta * (l[1][0] * angle.cos() + l[1][1] * angle.sin()),
            ]
        };
        let path = integrate_geodesic(&spec, &p0, IntegratorMethod::AdamsMoulton, n_steps)?;
        let end = path.endpoint().ok_or_else(|| {
            Error::domain(format!(
                "geodesic left the manifold before reaching radius {delta} ({})",
                path.status.label()
            ))
        })?;
        spec.with_theta(end.q.clone())?
    };
    let (lo, hi) = plot_range(&spec);
    let step = (hi - lo) / (n_grid - 1) as f64;
    let xs: Vec<f64> = (0..n_grid).map(|i| lo + step * i as f64).collect();
    let nominal: Vec<f64> = xs.iter().map(|&x| distributions::pdf(&spec, x)).collect();
    let pert: Vec<f64> = xs.iter().map(|&x| distributions::pdf(&perturbed, x)).collect();
    let kl = distributions::kl_divergence(&perturbed, &spec)?;
    Ok(json!({
        "x": xs,
        "nominal": nominal,
        "perturbed": pert,
        "nominal_theta": spec.theta(),
        "perturbed_theta": perturbed.theta(),
        "kl": kl,
        "delta": delta,
    }))
}

fn plot_range(spec: &DistributionSpec) -> (f64, f64) {
    match spec.support() {
        Some((lo, hi)) => (lo, hi),
        None => {
            let t = spec.theta();
            (t[0] - 4.5 * t[1], t[0] + 4.5 * t[1])
        }
    }
}

pub fn ishigami_ofpli(delta: f64, k: usize, n: usize, seed: u64) -> Result<serde_json::Value> {
    let model = ModelSpec::ishigami();
    let sample: IOSample = generate_sample(&model, n, seed)?;
    let center = DistributionSpec::normal(0.0, 1.0)?;
    let sphere = fisher_sphere(&center, delta, k, IntegratorMethod::AdamsMoulton, 400)?;
    let estimator = QuantileEstimator::Resample { model: &Ishigami };
    let result = ofpli_with_sphere(&sample, 2, &sphere, 0.95, &estimator)?;
    let angles: Vec<f64> = result.points.iter().map(|p| p.angle).collect();
    let pli: Vec<f64> = result.points.iter().map(|p| p.pli).collect();
    let sphere_theta: Vec<&[f64]> = result.points.iter().map(|p| p.spec.theta()).collect();
    Ok(json!({
        "delta": delta,
        "alpha": 0.95,
        "angles": angles,
        "pli": pli,
        "sphere_theta": sphere_theta,
        "s_plus": result.s_plus,
        "s_minus": result.s_minus,
        "argmax_theta": result.argmax.theta(),
        "argmin_theta": result.argmin.theta(),
        "n_valid": result.n_valid,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_sphere_payload_is_well_formed() {
        let v = gaussian_sphere(0.0, 1.0, 1.0, 16, 400).unwrap();
        let trajectories = v["trajectories"].as_array().unwrap();
        assert_eq!(trajectories.len(), 16);
        for t in trajectories {
            assert_eq!(t["status"], "complete");
            assert!(t["points"].as_array().unwrap().len() <= super::MAX_POLYLINE + 2);
        }
        for d in v["oracle_distances"].as_array().unwrap() {
            assert!((d.as_f64().unwrap() - 1.0).abs() < 5e-3);
        }
    }

    #[test]
    fn perturbed_density_zero_delta_is_identity() {
        let spec = r#"{"family":"trunc_gumbel","theta":[1013.0,558.0],"support":[500.0,3000.0]}"#;
        let v = perturbed_density(spec, 0.0, 0.0, 200, 64).unwrap();
        assert_eq!(v["nominal"], v["perturbed"]);
        assert!(v["kl"].as_f64().unwrap().abs() < 1e-9);
        let v2 = perturbed_density(spec, 0.25, 1.0, 200, 64).unwrap();
        assert!(v2["kl"].as_f64().unwrap() > 0.0);
        assert_ne!(v2["nominal"], v2["perturbed"]);
    }

    #[test]
    fn perturbed_density_rejects_uniform_and_bad_json() {
        let uniform = r#"{"family":"uniform","theta":[],"support":[0.0,1.0]}"#;
        assert!(perturbed_density(uniform, 0.3, 0.0, 100, 32).is_err());
        assert!(perturbed_density("{", 0.3, 0.0, 100, 32).is_err());
    }

    #[test]
    fn ishigami_panel_reports_variance_directions() {
        let v = ishigami_ofpli(0.9, 24, 1000, 7).unwrap();
        assert_eq!(v["pli"].as_array().unwrap().len(), 24);
        let s_plus = v["s_plus"].as_f64().unwrap();
        let s_minus = v["s_minus"].as_f64().unwrap();
        assert!(s_minus <= s_plus);
        // The strongest upward shift comes with inflated variance.
        assert!(v["argmax_theta"][1].as_f64().unwrap() > 1.0);
    }
}
