//! CSV and run-manifest emission. Every file written is deterministic for a
//! given config and seed; wall time is printed to stdout, never stored.

use anyhow::{Context, Result};
use fisherpli::geometry::{FisherSphere, GeodesicPath};
use fisherpli::robustness::PliCurve;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(OutputDir { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    /// Run manifest: config echo, versions, seed, per-δ admissibility.
    /// Deterministic by construction (`serde_json` maps are ordered).
    pub fn write_manifest(
        &mut self,
        command: &str,
        seed: u64,
        config_echo: serde_json::Value,
        extra: serde_json::Value,
    ) -> Result<PathBuf> {
        let manifest = json!({
            "command": command,
            "config": config_echo,
            "outputs": self.written,
            "results": extra,
            "seed": seed,
            "versions": { "fisherpli": env!("CARGO_PKG_VERSION") },
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

pub fn geodesic_csv(path: &GeodesicPath) -> String {
    let r = path.steps.first().map(|s| s.q.len()).unwrap_or(0);
    let mut out = String::from("t");
    for j in 1..=r {
        let _ = write!(out, ",q{j}");
    }
    for j in 1..=r {
        let _ = write!(out, ",p{j}");
    }
    out.push_str(",H,delta_H\n");
    let drift = path.hamiltonian_drift();
    for (step, d) in path.steps.iter().zip(drift) {
        let _ = write!(out, "{}", step.t);
        for q in &step.q {
            let _ = write!(out, ",{q}");
        }
        for p in &step.p {
            let _ = write!(out, ",{p}");
        }
        let _ = writeln!(out, ",{},{d}", step.hamiltonian);
    }
    out
}

pub fn sphere_csv(sphere: &FisherSphere) -> String {
    let r = sphere.center.r();
    let mut out = String::from("direction_index,angle");
    for j in 1..=r {
        let _ = write!(out, ",theta{j}");
    }
    out.push_str(",status,measured_length\n");
    for p in &sphere.points {
        let _ = write!(out, "{},{}", p.direction_index, p.angle);
        match &p.spec {
            Some(spec) => {
                for t in spec.theta() {
                    let _ = write!(out, ",{t}");
                }
            }
            None => {
                for _ in 0..r {
                    out.push(',');
                }
            }
        }
        let _ = writeln!(out, ",{},{}", p.status.label(), p.measured_length);
    }
    out
}

/// Curve CSV: one row per δ of one input (1-based input numbers, matching
/// the x1..xd sample columns).
pub fn curve_csv(input_number: usize, curve: &PliCurve) -> String {
    let mut out = String::from(
        "input,delta,s_plus,s_minus,ci_lo_plus,ci_hi_plus,ci_lo_minus,ci_hi_minus,admissible,n_valid\n",
    );
    for p in &curve.points {
        let (clp, chp) = p.ci_plus.map_or((String::new(), String::new()), |(lo, hi)| {
            (lo.to_string(), hi.to_string())
        });
        let (clm, chm) = p.ci_minus.map_or((String::new(), String::new()), |(lo, hi)| {
            (lo.to_string(), hi.to_string())
        });
        let _ = writeln!(
            out,
            "{},{},{},{},{clp},{chp},{clm},{chm},{},{}",
            input_number, p.delta, p.s_plus, p.s_minus, p.admissible, p.n_valid
        );
    }
    out
}

/// Sphere-detail CSV: one row per (δ, direction) with the perturbed
/// parameters and the PLI there, ready for a sphere-distribution plot.
pub fn sphere_detail_csv(input_number: usize, curve: &PliCurve, r: usize) -> String {
    let mut out = String::from("input,delta,direction_index");
    for j in 1..=r {
        let _ = write!(out, ",theta{j}");
    }
    out.push_str(",S,admissible\n");
    for point in &curve.points {
        for sp in &point.points {
            let _ = write!(out, "{},{},{}", input_number, point.delta, sp.direction_index);
            for t in sp.spec.theta() {
                let _ = write!(out, ",{t}");
            }
            let _ = writeln!(out, ",{},{}", sp.pli, sp.admissible);
        }
    }
    out
}

pub fn epli_csv(input_number: usize, mode: &str, points: &[fisherpli::robustness::EpliPoint]) -> String {
    let mut out = String::from("input,mode,param,pli\n");
    for p in points {
        let _ = writeln!(out, "{input_number},{mode},{},{}", p.param, p.pli);
    }
    out
}

pub fn sobol_csv(result: &fisherpli::sensitivity::SobolResult) -> String {
    let mut out = String::from(
        "input,first_order,total,target_first_order,target_total,first_order_se,total_se,target_first_order_se,target_total_se\n",
    );
    let v = &result.variance;
    let t = result.target.as_ref();
    let fmt = |x: Option<f64>| x.map(|x| x.to_string()).unwrap_or_default();
    for i in 0..v.first_order.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            i + 1,
            v.first_order[i],
            v.total[i],
            fmt(t.map(|t| t.first_order[i])),
            fmt(t.map(|t| t.total[i])),
            v.first_order_se[i],
            v.total_se[i],
            fmt(t.map(|t| t.first_order_se[i])),
            fmt(t.map(|t| t.total_se[i])),
        );
    }
    out
}

pub fn fim_json(fim: &fisherpli::FisherMatrix) -> String {
    let value = json!({
        "theta": fim.theta_at,
        "matrix": fim.matrix.rows(),
        "min_eigenvalue": fim.matrix.min_eigenvalue(),
        "condition": fim.matrix.condition(),
    });
    serde_json::to_string_pretty(&value).expect("fim serializes")
}
