//! Quantile estimation from a fixed input/output sample.
//!
//! The expensive-code regime never reruns the model: perturbed quantiles are
//! estimated by reweighting the fixed sample with likelihood ratios
//! L⁽ⁿ⁾ = f_δ(xᵢ⁽ⁿ⁾)/f(xᵢ⁽ⁿ⁾) and reading the self-normalized weighted cdf
//! (reverse importance sampling). Bootstrap resampling of the rows provides
//! confidence intervals, and the N_Y ≥ 10 tail-count criterion decides
//! whether a perturbed quantile can be trusted at all.

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::par::par_collect;
use crate::seed::derive_seed;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

/// Smallest number of sample outputs beyond a perturbed quantile for the
/// estimate to be admissible.
pub const MIN_TAIL_COUNT: usize = 10;

const TAG_BOOTSTRAP: u64 = 0xb001;

/// Which tail the admissibility count was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    Upper,
    Lower,
}

/// A fixed Monte Carlo design: N input rows, their paired outputs, and the
/// nominal input laws. The row pairing is immutable; estimators only ever
/// reweight or resample rows.
#[derive(Debug, Clone)]
pub struct IOSample {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<f64>,
    input_specs: Vec<DistributionSpec>,
}

impl IOSample {
    pub fn new(
        inputs: Vec<Vec<f64>>,
        outputs: Vec<f64>,
        input_specs: Vec<DistributionSpec>,
    ) -> Result<Self> {
        if input_specs.is_empty() {
            return Err(Error::sample("need at least one input spec"));
        }
        if inputs.len() != outputs.len() {
            return Err(Error::sample(format!(
                "{} input rows vs {} outputs",
                inputs.len(),
                outputs.len()
            )));
        }
        let d = input_specs.len();
        let mut bad_rows = Vec::new();
        for (n, row) in inputs.iter().enumerate() {
            if row.len() != d {
                return Err(Error::sample(format!(
                    "row {n} has {} columns, expected {d}",
                    row.len()
                )));
            }
            let row_ok = row
                .iter()
                .zip(input_specs.iter())
                .all(|(x, spec)| x.is_finite() && spec.contains(*x))
                && outputs[n].is_finite();
            if !row_ok {
                bad_rows.push(n);
            }
        }
        if !bad_rows.is_empty() {
            let shown: Vec<String> = bad_rows.iter().take(8).map(|n| n.to_string()).collect();
            return Err(Error::sample(format!(
                "{} row(s) outside the input supports or non-finite: rows [{}{}]",
                bad_rows.len(),
                shown.join(", "),
                if bad_rows.len() > 8 { ", ..." } else { "" }
            )));
        }
        Ok(IOSample { inputs, outputs, input_specs })
    }

    /// Rows already validated (internal resampling).
    pub(crate) fn from_validated(
        inputs: Vec<Vec<f64>>,
        outputs: Vec<f64>,
        input_specs: Vec<DistributionSpec>,
    ) -> Self {
        IOSample { inputs, outputs, input_specs }
    }

    pub fn n(&self) -> usize {
        self.outputs.len()
    }

    pub fn d(&self) -> usize {
        self.input_specs.len()
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn input_specs(&self) -> &[DistributionSpec] {
        &self.input_specs
    }

    pub fn input_column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.inputs.iter().map(move |row| row[i])
    }

    /// New sample from the given row indices (paired rows move together).
    pub fn resampled(&self, indices: &[usize]) -> IOSample {
        let inputs = indices.iter().map(|&n| self.inputs[n].clone()).collect();
        let outputs = indices.iter().map(|&n| self.outputs[n]).collect();
        IOSample::from_validated(inputs, outputs, self.input_specs.clone())
    }
}

/// The ⌈αN⌉-th order statistic of the outputs.
pub fn empirical_quantile(outputs: &[f64], alpha: f64) -> Result<f64> {
    if outputs.is_empty() {
        return Err(Error::domain("empirical quantile of an empty sample"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if outputs.iter().any(|y| y.is_nan()) {
        return Err(Error::domain("outputs contain NaN"));
    }
    let n = outputs.len();
    let k = ((alpha * n as f64).ceil() as usize).clamp(1, n);
    let mut buf = outputs.to_vec();
    let (_, kth, _) = buf.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
    Ok(*kth)
}

/// Likelihood ratios f_δ(xᵢ⁽ⁿ⁾)/fᵢ(xᵢ⁽ⁿ⁾) for one input column.
pub fn likelihood_ratios(
    sample: &IOSample,
    i: usize,
    perturbed: &DistributionSpec,
) -> Result<Vec<f64>> {
    if i >= sample.d() {
        return Err(Error::domain(format!(
            "input index {i} out of range for d = {}",
            sample.d()
        )));
    }
    let nominal = &sample.input_specs[i];
    if perturbed.support_interval() != nominal.support_interval() {
        return Err(Error::domain(format!(
            "perturbed support {:?} differs from nominal {:?}; truncation bounds are fixed",
            perturbed.support_interval(),
            nominal.support_interval()
        )));
    }
    let dp = perturbed.density()?;
    let dn = nominal.density()?;
    sample
        .input_column(i)
        .enumerate()
        .map(|(n, x)| {
            let den = dn.pdf(x);
            if !den.is_finite() || den <= 0.0 {
                return Err(Error::numerical(format!(
                    "nominal density vanishes at observed point x[{n}][{i}] = {x}"
                )));
            }
            let ratio = dp.pdf(x) / den;
            if !ratio.is_finite() {
                return Err(Error::numerical(format!(
                    "non-finite likelihood ratio at row {n} (x = {x})"
                )));
            }
            Ok(ratio)
        })
        .collect()
}

/// Stable ascending argsort of the outputs, reused across many weightings of
/// the same sample.
pub(crate) struct QuantileScan {
    sorted_idx: Vec<usize>,
    sorted_values: Vec<f64>,
}

impl QuantileScan {
    pub(crate) fn new(outputs: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..outputs.len()).collect();
        idx.sort_by(|&a, &b| {
            outputs[a]
                .partial_cmp(&outputs[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        let sorted_values = idx.iter().map(|&n| outputs[n]).collect();
        QuantileScan { sorted_idx: idx, sorted_values }
    }

    /// First sorted output whose cumulative weight reaches α (unnormalized
    /// accumulation against α·total, so uniform weights reduce exactly to the
    /// ⌈αN⌉-th order statistic). Also returns the count of outputs strictly
    /// above the returned value.
    pub(crate) fn weighted_quantile(
        &self,
        weight_of: impl Fn(usize) -> f64,
        alpha: f64,
    ) -> Result<(f64, usize)> {
        let (value, above, _) = self.weighted_quantile_counts(weight_of, alpha)?;
        Ok((value, above))
    }

    /// As [`Self::weighted_quantile`], with the strictly-below count as well.
    pub(crate) fn weighted_quantile_counts(
        &self,
        weight_of: impl Fn(usize) -> f64,
        alpha: f64,
    ) -> Result<(f64, usize, usize)> {
        if self.sorted_idx.is_empty() {
            return Err(Error::domain("weighted quantile of an empty sample"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let n = self.sorted_idx.len();
        let mut weights = Vec::with_capacity(n);
        let mut total = 0.0;
        for j in 0..n {
            let w = weight_of(self.sorted_idx[j]);
            if !w.is_finite() || w < 0.0 {
                return Err(Error::numerical(format!(
                    "invalid weight {w} at row {}",
                    self.sorted_idx[j]
                )));
            }
            total += w;
            weights.push(w);
        }
        if total <= 0.0 {
            return Err(Error::numerical("all reweighting weights are zero"));
        }
        let threshold = alpha * total;
        let mut cum = 0.0;
        let mut hit = n - 1;
        for (j, w) in weights.iter().enumerate() {
            cum += w;
            if cum >= threshold {
                hit = j;
                break;
            }
        }
        let value = self.sorted_values[hit];
        let n_above = self.sorted_values[hit..].iter().filter(|v| **v > value).count();
        let n_below = self.sorted_values[..hit].iter().filter(|v| **v < value).count();
        Ok((value, n_above, n_below))
    }
}

/// Self-normalized weighted empirical cdf of the outputs.
#[derive(Debug, Clone)]
pub struct WeightedCdf {
    values: Vec<f64>,
    /// Self-normalized weights, aligned with `values`.
    weights: Vec<f64>,
    cum: Vec<f64>,
}

impl WeightedCdf {
    pub fn new(outputs: &[f64], raw_weights: &[f64]) -> Result<Self> {
        if outputs.len() != raw_weights.len() {
            return Err(Error::domain("outputs and weights must have equal length"));
        }
        if outputs.is_empty() {
            return Err(Error::domain("empty weighted cdf"));
        }
        let scan = QuantileScan::new(outputs);
        let mut weights = Vec::with_capacity(outputs.len());
        let mut total = 0.0;
        for &n in &scan.sorted_idx {
            let w = raw_weights[n];
            if !w.is_finite() || w < 0.0 {
                return Err(Error::numerical(format!("invalid weight {w} at row {n}")));
            }
            total += w;
            weights.push(w);
        }
        if total <= 0.0 {
            return Err(Error::numerical("all reweighting weights are zero"));
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cum.push(acc);
        }
        // Self-normalization pins the right limit to exactly one.
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        Ok(WeightedCdf { values: scan.sorted_values, weights, cum })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// F̂(t) = Σ wₙ 1(yₙ ≤ t).
    pub fn cdf(&self, t: f64) -> f64 {
        let idx = self.values.partition_point(|v| *v <= t);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }
}

/// Reverse-importance-sampling quantile of the outputs after perturbing
/// input `i`, plus the count of sample outputs strictly above it (the
/// admissibility statistic).
pub fn perturbed_quantile(
    sample: &IOSample,
    i: usize,
    perturbed: &DistributionSpec,
    alpha: f64,
) -> Result<(f64, usize)> {
    let ratios = likelihood_ratios(sample, i, perturbed)?;
    let scan = QuantileScan::new(&sample.outputs);
    scan.weighted_quantile(|n| ratios[n], alpha)
}

/// N_Y ≥ 10 criterion: at least ten sample outputs must lie beyond the
/// perturbed quantile (above it for the upper tail, below for the lower —
/// the caller supplies the count taken from the matching side).
pub fn admissible(exceed_count: usize, _alpha: f64, _direction: Tail) -> bool {
    exceed_count >= MIN_TAIL_COUNT
}

/// Percentile bootstrap of a scalar statistic of the sample.
#[derive(Debug, Clone, Copy)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub lo95: f64,
    pub hi95: f64,
    /// Replicates dropped because the statistic failed on them.
    pub n_dropped: usize,
    pub b: usize,
}

/// Resample rows (inputs and paired output jointly) with replacement `b`
/// times; 2.5/97.5-percentile interval. Deterministic for a given seed, with
/// per-replicate derived seeds so parallel scheduling cannot matter.
pub fn bootstrap(
    sample: &IOSample,
    statistic: impl Fn(&IOSample) -> Result<f64> + Sync,
    b: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    if b < 2 {
        return Err(Error::domain(format!("bootstrap needs B >= 2, got {b}")));
    }
    let n = sample.n();
    if n == 0 {
        return Err(Error::domain("bootstrap of an empty sample"));
    }
    let reps = par_collect(b, |r| {
        let mut rng = Pcg64::seed_from_u64(derive_seed(seed, &[TAG_BOOTSTRAP, r as u64]));
        let indices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        statistic(&sample.resampled(&indices)).ok()
    });
    summarize_replicates(&reps, b)
}

pub(crate) fn summarize_replicates(reps: &[Option<f64>], b: usize) -> Result<BootstrapSummary> {
    let mut kept: Vec<f64> = reps.iter().filter_map(|r| *r).collect();
    let n_dropped = b - kept.len();
    if n_dropped * 5 > b {
        return Err(Error::numerical(format!(
            "{n_dropped} of {b} bootstrap replicates failed (> 20%)"
        )));
    }
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = kept.len();
    let mean = kept.iter().sum::<f64>() / m as f64;
    let rank = |q: f64| ((q * m as f64).ceil() as usize).clamp(1, m) - 1;
    Ok(BootstrapSummary {
        mean,
        lo95: kept[rank(0.025)],
        hi95: kept[rank(0.975)],
        n_dropped,
        b,
    })
}
