//! Large-sample numeric oracles for the limiting behavior of the tests.
//!
//! The limiting rejection rate of the robust score and log-rank tests
//! under a covariate-adaptive design is a function of two variance
//! components: the expected within-stratum variance of the per-subject
//! integral terms and the variance of their stratum means. Both are
//! estimated by plain Monte Carlo on a large null sample — no assignments
//! are needed because the terms are assignment-free under the null — and
//! combined into predicted type-I-error rates and Pitman efficacies.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::cox::{self, CoxError};
use crate::randomization::{SchemeSpec, StratumLabel};
use crate::rng::derive_rng;
use crate::test_stats::nu_d;
use crate::trial_data::{gen_case, observe, CaseSpec, DataError, ObservedTrial, Subject};

/// Minimum Monte Carlo size for component estimation.
pub const MIN_MC_SIZE: usize = 100_000;
const GRID_POINTS: usize = 256;
const BATCHES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMode {
    Score,
    LogRank,
}

impl TestMode {
    pub fn name(&self) -> &'static str {
        match self {
            TestMode::Score => "score",
            TestMode::LogRank => "logrank",
        }
    }
}

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("mc size must be at least {need}, got {got}")]
    SampleTooSmall { got: usize, need: usize },
    #[error("too few events ({0}) to build a time grid")]
    InsufficientEvents(usize),
    #[error("the marginal method has no known imbalance limit")]
    SchemeNotApplicable,
    #[error("case {0} uses a misspecified working model; efficacy needs a correct one")]
    RequiresCorrectModel(u8),
    #[error("variance components are degenerate")]
    Degenerate,
    #[error(transparent)]
    Cox(#[from] CoxError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Estimated variance components of the limiting score distribution.
#[derive(Clone, Debug)]
pub struct LimitComponents {
    pub case_id: u8,
    pub scheme: String,
    pub mode: TestMode,
    pub nu_d: Option<f64>,
    /// Expected within-stratum variance of the per-subject terms.
    pub within_var: f64,
    /// Variance of the stratum means of the per-subject terms.
    pub between_var: f64,
    pub beta_star: Vec<f64>,
    pub mc_size: usize,
    /// Right segment boundaries of the time grid.
    pub grid: Vec<f64>,
    /// Hazard-ratio function evaluated at segment midpoints.
    pub p_of_t: Vec<f64>,
    /// Per-batch (within, between) pairs for standard errors.
    pub batch_components: Vec<(f64, f64)>,
}

impl LimitComponents {
    pub fn total_var(&self) -> f64 {
        self.within_var + self.between_var
    }

    pub fn within_se(&self) -> f64 {
        batch_se(self.batch_components.iter().map(|b| b.0))
    }

    pub fn between_se(&self) -> f64 {
        batch_se(self.batch_components.iter().map(|b| b.1))
    }
}

fn batch_se(values: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = values.collect();
    let k = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}

/// Null sample with observed responses (assignment-free at theta = 0).
struct NullSample {
    subjects: Vec<Subject>,
    x: Vec<f64>,
    delta: Vec<u8>,
}

fn draw_null_sample(
    case: &CaseSpec,
    mc_size: usize,
    seed: u64,
    tag: u64,
) -> Result<NullSample, AsymptoticsError> {
    let mut null_case = *case;
    null_case.theta = 0.0;
    null_case.n = mc_size;
    let mut rng = derive_rng(seed, &[u64::from(case.case_id), tag, 0xA5]);
    let subjects = gen_case(&null_case, &mut rng)?;
    let (x, delta): (Vec<f64>, Vec<u8>) = subjects.iter().map(|s| observe(s, 0)).unzip();
    Ok(NullSample { subjects, x, delta })
}

/// Right boundaries of an event-quantile time grid.
fn event_quantile_grid(
    x: &[f64],
    delta: &[u8],
    points: usize,
) -> Result<Vec<f64>, AsymptoticsError> {
    let mut event_times: Vec<f64> = x
        .iter()
        .zip(delta)
        .filter(|(_, &d)| d == 1)
        .map(|(&t, _)| t)
        .collect();
    if event_times.len() < 20 {
        return Err(AsymptoticsError::InsufficientEvents(event_times.len()));
    }
    event_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = event_times.len();
    let g = points.min(m);
    let mut grid: Vec<f64> = (1..=g)
        .map(|j| event_times[(j * m / g).saturating_sub(1).min(m - 1)])
        .collect();
    grid.dedup();
    Ok(grid)
}

fn exp_eta(beta: &[f64], subject: &Subject) -> f64 {
    if beta.is_empty() {
        1.0
    } else {
        beta.iter()
            .zip(&subject.w)
            .map(|(b, w)| b * w)
            .sum::<f64>()
            .exp()
    }
}

/// Ratio-of-means estimate of the hazard-ratio function at the segment
/// midpoints of `grid`: mean at-risk true hazard over mean at-risk
/// relative risk.
fn estimate_p(sample: &NullSample, beta: &[f64], grid: &[f64]) -> Vec<f64> {
    let exp_etas: Vec<f64> = sample.subjects.iter().map(|s| exp_eta(beta, s)).collect();
    let mut p = Vec::with_capacity(grid.len());
    let mut left = 0.0;
    for &right in grid {
        let mid = 0.5 * (left + right);
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, subject) in sample.subjects.iter().enumerate() {
            if sample.x[i] >= mid {
                num += subject.control_hazard.rate_at(mid);
                den += exp_etas[i];
            }
        }
        p.push(if den > 0.0 { num / den } else { 0.0 });
        left = right;
    }
    p
}

/// Integral of the piecewise-constant `p` from 0 to `x`, truncated at the
/// grid end (integrals stop at the last observed event time).
fn integrated_p(grid: &[f64], p: &[f64], cum: &[f64], x: f64) -> f64 {
    let k = grid.partition_point(|&t| t <= x);
    if k == grid.len() {
        return cum[k - 1];
    }
    let left = if k == 0 { 0.0 } else { grid[k - 1] };
    let base = if k == 0 { 0.0 } else { cum[k - 1] };
    base + p[k] * (x - left)
}

fn cumulative(grid: &[f64], p: &[f64]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut left = 0.0;
    for (g, &right) in grid.iter().enumerate() {
        acc += p[g] * (right - left);
        cum.push(acc);
        left = right;
    }
    cum
}

/// Per-subject integral terms: half the event indicator minus the
/// integrated at-risk intensity under the plug-in hazard ratio.
fn o_terms(sample: &NullSample, beta: &[f64], grid: &[f64], p: &[f64]) -> Vec<f64> {
    let cum = cumulative(grid, p);
    sample
        .subjects
        .iter()
        .enumerate()
        .map(|(i, subject)| {
            let e = exp_eta(beta, subject);
            0.5 * (f64::from(sample.delta[i]) - e * integrated_p(grid, p, &cum, sample.x[i]))
        })
        .collect()
}

/// Within/between decomposition of `o` by stratum, overall and per batch.
fn decompose(
    o: &[f64],
    labels: &[StratumLabel],
    batches: usize,
) -> ((f64, f64), Vec<(f64, f64)>) {
    let overall = anova(o, labels, 0, o.len());
    let k = batches.max(1);
    let size = o.len() / k;
    let batch_values = (0..k)
        .map(|b| {
            let lo = b * size;
            let hi = if b + 1 == k { o.len() } else { (b + 1) * size };
            anova(o, labels, lo, hi)
        })
        .collect();
    (overall, batch_values)
}

fn anova(o: &[f64], labels: &[StratumLabel], lo: usize, hi: usize) -> (f64, f64) {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<&StratumLabel, (f64, f64, usize)> = BTreeMap::new();
    for i in lo..hi {
        let entry = groups.entry(&labels[i]).or_insert((0.0, 0.0, 0));
        entry.0 += o[i];
        entry.1 += o[i] * o[i];
        entry.2 += 1;
    }
    let n = (hi - lo) as f64;
    let grand = groups.values().map(|g| g.0).sum::<f64>() / n;
    let mut within = 0.0;
    let mut between = 0.0;
    for &(sum, sumsq, count) in groups.values() {
        let m = sum / count as f64;
        within += sumsq - count as f64 * m * m;
        between += count as f64 * (m - grand).powi(2);
    }
    (within / n, between / n)
}

fn resolve_beta_star(
    case: &CaseSpec,
    sample: &NullSample,
) -> Result<Vec<f64>, AsymptoticsError> {
    if let Some(beta) = case.true_beta() {
        return Ok(beta);
    }
    // Misspecified working model: one large null fit pins the limit.
    let fit_n = sample.subjects.len().min(MIN_MC_SIZE);
    let trial = ObservedTrial {
        strata: sample.subjects[..fit_n]
            .iter()
            .map(|s| s.strata.clone())
            .collect(),
        w: sample.subjects[..fit_n]
            .iter()
            .flat_map(|s| s.w.clone())
            .collect(),
        w_dim: case.w_dim(),
        arm: vec![0; fit_n],
        time: sample.x[..fit_n].to_vec(),
        event: sample.delta[..fit_n].to_vec(),
    };
    Ok(cox::fit_null(&trial)?.beta)
}

/// Estimate the limit components for a case under a scheme.
pub fn estimate_limit_components(
    case: &CaseSpec,
    scheme: &SchemeSpec,
    mc_size: usize,
    seed: u64,
    mode: TestMode,
) -> Result<LimitComponents, AsymptoticsError> {
    if mc_size < MIN_MC_SIZE {
        return Err(AsymptoticsError::SampleTooSmall {
            got: mc_size,
            need: MIN_MC_SIZE,
        });
    }
    let sample = draw_null_sample(case, mc_size, seed, mode as u64)?;
    let beta = match mode {
        TestMode::LogRank => Vec::new(),
        TestMode::Score => resolve_beta_star(case, &sample)?,
    };
    let grid = event_quantile_grid(&sample.x, &sample.delta, GRID_POINTS)?;
    let p = estimate_p(&sample, &beta, &grid);
    let o = o_terms(&sample, &beta, &grid, &p);
    let labels: Vec<StratumLabel> = sample.subjects.iter().map(|s| s.strata.clone()).collect();
    let ((within, between), batches) = decompose(&o, &labels, BATCHES);
    Ok(LimitComponents {
        case_id: case.case_id,
        scheme: scheme.name().to_string(),
        mode,
        nu_d: nu_d(scheme),
        within_var: within,
        between_var: between,
        beta_star: beta,
        mc_size,
        grid,
        p_of_t: p,
        batch_components: batches,
    })
}

fn predicted_from(a: f64, b: f64, nu: f64, alpha: f64) -> Result<f64, AsymptoticsError> {
    let denom = a + nu * b;
    if !(denom > 0.0) {
        return Err(AsymptoticsError::Degenerate);
    }
    let normal = Normal::standard();
    let z = normal.inverse_cdf(1.0 - alpha / 2.0);
    Ok(2.0 * normal.cdf(-z * ((a + b) / denom).sqrt()))
}

/// Limiting rejection probability under the null for the uncalibrated
/// test: `2 Phi(-z_{alpha/2} sqrt((A+B)/(A+nu*B)))`.
pub fn predicted_type1(
    components: &LimitComponents,
    alpha: f64,
) -> Result<f64, AsymptoticsError> {
    let nu = components
        .nu_d
        .ok_or(AsymptoticsError::SchemeNotApplicable)?;
    predicted_from(components.within_var, components.between_var, nu, alpha)
}

/// Predicted rate together with a batch-means standard error.
pub fn predicted_type1_with_se(
    components: &LimitComponents,
    alpha: f64,
) -> Result<(f64, f64), AsymptoticsError> {
    let value = predicted_type1(components, alpha)?;
    let nu = components.nu_d.unwrap();
    let per_batch: Vec<f64> = components
        .batch_components
        .iter()
        .filter_map(|&(a, b)| predicted_from(a, b, nu, alpha).ok())
        .collect();
    Ok((value, batch_se(per_batch.into_iter())))
}

/// Variance pieces entering the Pitman efficacies of the score and
/// calibrated log-rank tests, under a correct working model.
#[derive(Clone, Debug)]
pub struct EfficacyComponents {
    pub case_id: u8,
    pub scheme: String,
    pub nu_d: f64,
    pub sigma_s2: f64,
    pub sigma_l2: f64,
    pub sigma_c2: f64,
    /// Relative efficiency of the calibrated log-rank test against the
    /// score test: `sigma_l2^2 / (sigma_c2 * sigma_s2)`, at most 1.
    pub are: f64,
    pub are_se: f64,
    pub sigma_s2_se: f64,
    /// Local-alternative scale; efficacies are reported at gamma = 1 and
    /// the ratio is gamma-free.
    pub gamma: f64,
}

/// Quadrature of the baseline-hazard integral entering `sigma_l2`, overall
/// and per batch of subjects.
fn baseline_integral(
    sample: &NullSample,
    beta: &[f64],
    grid: &[f64],
    lambda0: f64,
    batches: usize,
) -> (f64, Vec<f64>) {
    let n = sample.subjects.len();
    let k = batches.max(1);
    let size = n / k;
    let exp_etas: Vec<f64> = sample.subjects.iter().map(|s| exp_eta(beta, s)).collect();
    let batch_of = |i: usize| (i / size).min(k - 1);
    let batch_len = |b: usize| -> f64 {
        if b + 1 == k {
            (n - size * (k - 1)) as f64
        } else {
            size as f64
        }
    };
    let mut total = 0.0;
    let mut per_batch = vec![0.0; k];
    let mut left = 0.0;
    for &right in grid {
        let mid = 0.5 * (left + right);
        let dt = right - left;
        // Accumulate E{Y e^{2 beta W}}, E{Y e^{beta W}}, E{Y} per batch.
        let mut acc = vec![(0.0, 0.0, 0.0); k];
        for i in 0..n {
            if sample.x[i] >= mid {
                let slot = &mut acc[batch_of(i)];
                slot.0 += exp_etas[i] * exp_etas[i];
                slot.1 += exp_etas[i];
                slot.2 += 1.0;
            }
        }
        let weight = lambda0 * (lambda0 * mid) * dt;
        let (mut s2, mut s1, mut s0) = (0.0, 0.0, 0.0);
        for (b, &(a2, a1, a0)) in acc.iter().enumerate() {
            let m = batch_len(b);
            if a0 > 0.0 {
                per_batch[b] += weight * (a2 / m - (a1 / m).powi(2) / (a0 / m));
            }
            s2 += a2;
            s1 += a1;
            s0 += a0;
        }
        let m = n as f64;
        if s0 > 0.0 {
            total += weight * (s2 / m - (s1 / m).powi(2) / (s0 / m));
        }
        left = right;
    }
    (total, per_batch)
}

/// Pitman efficacy components and the relative efficiency of the
/// calibrated log-rank test against the score test.
pub fn pitman_are(
    case: &CaseSpec,
    scheme: &SchemeSpec,
    mc_size: usize,
    seed: u64,
) -> Result<EfficacyComponents, AsymptoticsError> {
    if mc_size < 10_000 {
        return Err(AsymptoticsError::SampleTooSmall {
            got: mc_size,
            need: 10_000,
        });
    }
    let beta = case
        .true_beta()
        .ok_or(AsymptoticsError::RequiresCorrectModel(case.case_id))?;
    let nu = nu_d(scheme).ok_or(AsymptoticsError::SchemeNotApplicable)?;
    let sample = draw_null_sample(case, mc_size, seed, 0xE5)?;
    let labels: Vec<StratumLabel> = sample.subjects.iter().map(|s| s.strata.clone()).collect();
    let grid = event_quantile_grid(&sample.x, &sample.delta, GRID_POINTS)?;

    let p_score = estimate_p(&sample, &beta, &grid);
    let o_score = o_terms(&sample, &beta, &grid, &p_score);
    let ((within_s, _), batches_s) = decompose(&o_score, &labels, BATCHES);

    let p_lr = estimate_p(&sample, &[], &grid);
    let o_lr = o_terms(&sample, &[], &grid, &p_lr);
    let ((_, between_lr), batches_lr) = decompose(&o_lr, &labels, BATCHES);

    let (j, j_batches) = baseline_integral(&sample, &beta, &grid, case.lambda0, BATCHES);

    let sigma_s2 = within_s;
    let sigma_l2 = sigma_s2 - 0.25 * j;
    let sigma_c2 = sigma_s2 - (1.0 - nu) * between_lr;
    if !(sigma_c2 > 0.0 && sigma_s2 > 0.0) {
        return Err(AsymptoticsError::Degenerate);
    }
    let are = sigma_l2 * sigma_l2 / (sigma_c2 * sigma_s2);
    let are_batches: Vec<f64> = (0..BATCHES)
        .map(|b| {
            let s2 = batches_s[b].0;
            let l2 = s2 - 0.25 * j_batches[b];
            let c2 = s2 - (1.0 - nu) * batches_lr[b].1;
            l2 * l2 / (c2 * s2)
        })
        .collect();
    Ok(EfficacyComponents {
        case_id: case.case_id,
        scheme: scheme.name().to_string(),
        nu_d: nu,
        sigma_s2,
        sigma_l2,
        sigma_c2,
        are,
        are_se: batch_se(are_batches.into_iter()),
        sigma_s2_se: batch_se(batches_s.iter().map(|b| b.0)),
        gamma: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(a: f64, b: f64, nu: Option<f64>) -> LimitComponents {
        LimitComponents {
            case_id: 1,
            scheme: "synthetic".into(),
            mode: TestMode::LogRank,
            nu_d: nu,
            within_var: a,
            between_var: b,
            beta_star: vec![],
            mc_size: 0,
            grid: vec![],
            p_of_t: vec![],
            batch_components: vec![],
        }
    }

    #[test]
    fn predicted_rate_boundary_cases() {
        // No between-stratum variance: alpha up to quantile round-trip.
        let c = synthetic(0.2, 0.0, Some(0.0));
        assert!((predicted_type1(&c, 0.05).unwrap() - 0.05).abs() < 1e-9);
        // Simple randomization: alpha for any between variance.
        let c = synthetic(0.2, 0.4, Some(1.0));
        assert!((predicted_type1(&c, 0.05).unwrap() - 0.05).abs() < 1e-9);
        // Marginal method: no prediction.
        let c = synthetic(0.2, 0.1, None);
        assert!(predicted_type1(&c, 0.05).is_err());
    }

    #[test]
    fn predicted_rate_decreases_in_between_variance() {
        let mut last = f64::INFINITY;
        for b in [0.0, 0.05, 0.1, 0.2, 0.5] {
            let c = synthetic(0.2, b, Some(0.0));
            let rate = predicted_type1(&c, 0.05).unwrap();
            assert!(rate <= last + 1e-15);
            assert!(rate <= 0.05 + 1e-12);
            last = rate;
        }
    }

    #[test]
    fn covariate_free_outcome_has_no_between_variance() {
        // With the covariate effect scaled to zero the stratification
        // covariate is independent of the outcome.
        let mut case = CaseSpec::new(1, 0.0, MIN_MC_SIZE);
        case.effect_scale = 0.0;
        let c = estimate_limit_components(
            &case,
            &SchemeSpec::permuted_block(4),
            MIN_MC_SIZE,
            31,
            TestMode::LogRank,
        )
        .unwrap();
        assert!(
            c.between_var < 4.0 * c.between_se() + 1e-4,
            "between {} se {}",
            c.between_var,
            c.between_se()
        );
        let rate = predicted_type1(&c, 0.05).unwrap();
        assert!((rate - 0.05).abs() < 0.005, "{rate}");
    }

    #[test]
    fn correct_model_score_components_have_no_between_variance() {
        let case = CaseSpec::new(1, 0.0, MIN_MC_SIZE);
        let c = estimate_limit_components(
            &case,
            &SchemeSpec::permuted_block(4),
            MIN_MC_SIZE,
            32,
            TestMode::Score,
        )
        .unwrap();
        assert!(
            c.between_var < 4.0 * c.between_se() + 1e-4,
            "between {} se {}",
            c.between_var,
            c.between_se()
        );
    }

    #[test]
    fn logrank_components_show_between_variance_for_case1() {
        let case = CaseSpec::new(1, 0.0, MIN_MC_SIZE);
        let c = estimate_limit_components(
            &case,
            &SchemeSpec::permuted_block(4),
            MIN_MC_SIZE,
            33,
            TestMode::LogRank,
        )
        .unwrap();
        assert!(
            c.between_var > 5.0 * c.between_se(),
            "between {} se {}",
            c.between_var,
            c.between_se()
        );
        // Strongly conservative prediction for a (D1) design.
        let rate = predicted_type1(&c, 0.05).unwrap();
        assert!(rate > 0.005 && rate < 0.04, "{rate}");
    }

    #[test]
    fn law_of_total_variance_is_exact() {
        let case = CaseSpec::new(2, 0.0, MIN_MC_SIZE);
        let c = estimate_limit_components(
            &case,
            &SchemeSpec::simple(),
            MIN_MC_SIZE,
            34,
            TestMode::LogRank,
        )
        .unwrap();
        // within + between equals the plain variance of the terms by
        // construction of the decomposition.
        let sample = draw_null_sample(&case, MIN_MC_SIZE, 34, TestMode::LogRank as u64).unwrap();
        let grid = event_quantile_grid(&sample.x, &sample.delta, GRID_POINTS).unwrap();
        let p = estimate_p(&sample, &[], &grid);
        let o = o_terms(&sample, &[], &grid, &p);
        let mean = o.iter().sum::<f64>() / o.len() as f64;
        let var = o.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / o.len() as f64;
        assert!((c.total_var() - var).abs() < 1e-10 * var);
    }

    #[test]
    fn mc_size_floor_is_enforced() {
        let case = CaseSpec::new(1, 0.0, 1000);
        let err = estimate_limit_components(
            &case,
            &SchemeSpec::simple(),
            1000,
            1,
            TestMode::LogRank,
        );
        assert!(matches!(
            err,
            Err(AsymptoticsError::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn are_is_one_without_covariate_effects() {
        let mut case = CaseSpec::new(1, 0.0, 200_000);
        case.effect_scale = 0.0;
        let e = pitman_are(&case, &SchemeSpec::permuted_block(4), 200_000, 35).unwrap();
        assert!(
            (e.are - 1.0).abs() <= 2.0 * e.are_se.max(1e-6),
            "are {} se {}",
            e.are,
            e.are_se
        );
    }

    #[test]
    fn are_is_below_one_for_case1() {
        let case = CaseSpec::new(1, 0.0, 200_000);
        let e = pitman_are(&case, &SchemeSpec::permuted_block(4), 200_000, 36).unwrap();
        assert!(
            e.are < 1.0 - 3.0 * e.are_se,
            "are {} se {}",
            e.are,
            e.are_se
        );
        assert!(e.sigma_c2 <= e.sigma_s2 + 1e-12);
        assert!(e.sigma_l2 <= e.sigma_s2 + 1e-12);
    }

    #[test]
    fn calibrated_logrank_efficacy_decreases_with_nu() {
        let case = CaseSpec::new(1, 0.0, 200_000);
        let schemes = [
            SchemeSpec::permuted_block(4),
            SchemeSpec::wei_urn(1.0, 1.0),
            SchemeSpec::simple(),
        ];
        let mut last_efficacy = f64::INFINITY;
        for scheme in schemes {
            let e = pitman_are(&case, &scheme, 200_000, 37).unwrap();
            let efficacy = e.sigma_l2 * e.sigma_l2 / e.sigma_c2;
            assert!(
                efficacy < last_efficacy + 1e-9,
                "efficacy {} after {}",
                efficacy,
                last_efficacy
            );
            last_efficacy = efficacy;
        }
    }

    #[test]
    fn misspecified_case_is_rejected_for_efficacy() {
        let case = CaseSpec::new(6, 0.0, 200_000);
        assert!(matches!(
            pitman_are(&case, &SchemeSpec::simple(), 200_000, 1),
            Err(AsymptoticsError::RequiresCorrectModel(6))
        ));
    }
}
