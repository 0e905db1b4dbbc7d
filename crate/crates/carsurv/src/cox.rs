//! Null-model partial-likelihood fitting and score/variance building blocks.
//!
//! All statistics are finite sums over observed event times, evaluated in a
//! single sweep over subjects sorted by decreasing time. Tied event times
//! share the same risk set (Breslow convention); generated data are
//! continuous so ties only arise from external datasets.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::randomization::StratumLabel;
use crate::trial_data::ObservedTrial;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 50;

#[derive(Debug, Error)]
pub enum CoxError {
    #[error("no events in the data")]
    NoEvents,
    #[error("times and covariates must be finite, flags must be 0/1")]
    InvalidData,
    #[error("information matrix is singular or not positive definite")]
    SingularInformation,
    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
    },
    #[error("beta has {beta} entries but covariates have dimension {w}")]
    DimensionMismatch { beta: usize, w: usize },
}

/// Null-constrained fit: the working-model coefficients maximize the
/// partial likelihood with the treatment effect pinned at zero, plus every
/// derived quantity the test statistics need.
#[derive(Clone, Debug)]
pub struct NullCoxFit {
    pub beta: Vec<f64>,
    /// Treatment-score at the fitted coefficients.
    pub score_theta: f64,
    /// Model-based information for the treatment effect.
    pub info_a: f64,
    /// Robust variance: mean of squared per-subject residuals.
    pub robust_b: f64,
    pub o_hat: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

fn validate(data: &ObservedTrial) -> Result<(), CoxError> {
    let n = data.n();
    if data.event.len() != n
        || data.arm.len() != n
        || data.strata.len() != n
        || data.w.len() != n * data.w_dim
    {
        return Err(CoxError::InvalidData);
    }
    if data.time.iter().any(|t| !t.is_finite())
        || data.w.iter().any(|w| !w.is_finite())
        || data.event.iter().any(|&d| d > 1)
        || data.arm.iter().any(|&a| a > 1)
    {
        return Err(CoxError::InvalidData);
    }
    Ok(())
}

fn check_beta(beta: &[f64], data: &ObservedTrial) -> Result<(), CoxError> {
    if !beta.is_empty() && beta.len() != data.w_dim {
        return Err(CoxError::DimensionMismatch {
            beta: beta.len(),
            w: data.w_dim,
        });
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(CoxError::InvalidData);
    }
    Ok(())
}

/// Indices sorted by decreasing time. Subjects tied at a time enter the
/// risk sums together before any event at that time is processed.
fn descending_order(data: &ObservedTrial) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.n()).collect();
    order.sort_by(|&a, &b| data.time[b].partial_cmp(&data.time[a]).unwrap());
    order
}

fn linear_predictor(beta: &[f64], data: &ObservedTrial, i: usize) -> f64 {
    if beta.is_empty() {
        0.0
    } else {
        beta.iter()
            .zip(data.w_row(i))
            .map(|(b, w)| b * w)
            .sum()
    }
}

/// Log partial likelihood at `theta = 0`, up to no additive constant.
pub fn log_partial_likelihood(beta: &[f64], data: &ObservedTrial) -> Result<f64, CoxError> {
    validate(data)?;
    check_beta(beta, data)?;
    let order = descending_order(data);
    let mut s0 = 0.0;
    let mut loglik = 0.0;
    let n = data.n();
    let mut pos = 0;
    while pos < n {
        let t = data.time[order[pos]];
        let mut end = pos;
        while end < n && data.time[order[end]] == t {
            s0 += linear_predictor(beta, data, order[end]).exp();
            end += 1;
        }
        for &i in &order[pos..end] {
            if data.event[i] == 1 {
                loglik += linear_predictor(beta, data, i) - s0.ln();
            }
        }
        pos = end;
    }
    Ok(loglik)
}

/// Log partial likelihood, analytic gradient, and information matrix
/// (negative Hessian, row-major `dim x dim`) in the working coefficients.
fn beta_derivatives(
    beta: &[f64],
    data: &ObservedTrial,
) -> Result<(f64, Vec<f64>, Vec<f64>), CoxError> {
    let dim = beta.len();
    let order = descending_order(data);
    let n = data.n();
    let mut s0 = 0.0;
    let mut sw = vec![0.0; dim];
    let mut sww = vec![0.0; dim * dim];
    let mut loglik = 0.0;
    let mut grad = vec![0.0; dim];
    let mut info = vec![0.0; dim * dim];
    let mut pos = 0;
    while pos < n {
        let t = data.time[order[pos]];
        let mut end = pos;
        while end < n && data.time[order[end]] == t {
            let i = order[end];
            let e = linear_predictor(beta, data, i).exp();
            s0 += e;
            let w = data.w_row(i);
            for j in 0..dim {
                sw[j] += e * w[j];
                for k in 0..=j {
                    sww[j * dim + k] += e * w[j] * w[k];
                }
            }
            end += 1;
        }
        for &i in &order[pos..end] {
            if data.event[i] == 1 {
                loglik += linear_predictor(beta, data, i) - s0.ln();
                let w = data.w_row(i);
                for j in 0..dim {
                    let mj = sw[j] / s0;
                    grad[j] += w[j] - mj;
                    for k in 0..=j {
                        let mk = sw[k] / s0;
                        info[j * dim + k] += sww[j * dim + k] / s0 - mj * mk;
                    }
                }
            }
        }
        pos = end;
    }
    for j in 0..dim {
        for k in 0..j {
            info[k * dim + j] = info[j * dim + k];
        }
    }
    Ok((loglik, grad, info))
}

/// Cholesky solve of a symmetric positive definite system; `None` when the
/// matrix is singular or indefinite.
pub(crate) fn solve_spd(a: &[f64], b: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = a[i * dim + j];
            for k in 0..j {
                sum -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(sum > 1e-12 * (1.0 + a[i * dim + i].abs())) {
                    return None;
                }
                l[i * dim + i] = sum.sqrt();
            } else {
                l[i * dim + j] = sum / l[j * dim + j];
            }
        }
    }
    let mut y = vec![0.0; dim];
    for i in 0..dim {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * dim + k] * y[k];
        }
        y[i] = sum / l[i * dim + i];
    }
    let mut x = vec![0.0; dim];
    for i in (0..dim).rev() {
        let mut sum = y[i];
        for k in i + 1..dim {
            sum -= l[k * dim + i] * x[k];
        }
        x[i] = sum / l[i * dim + i];
    }
    Some(x)
}

/// Information matrix for the working coefficients at `beta` (row-major).
pub fn beta_information(beta: &[f64], data: &ObservedTrial) -> Result<Vec<f64>, CoxError> {
    validate(data)?;
    check_beta(beta, data)?;
    let (_, _, info) = beta_derivatives(beta, data)?;
    Ok(info)
}

/// Analytic gradient of the log partial likelihood in the working
/// coefficients at `beta`.
pub fn beta_gradient(beta: &[f64], data: &ObservedTrial) -> Result<Vec<f64>, CoxError> {
    validate(data)?;
    check_beta(beta, data)?;
    let (_, grad, _) = beta_derivatives(beta, data)?;
    Ok(grad)
}

/// Event points in ascending time order with the unnormalized risk sum
/// at each event.
struct EventPoints {
    times: Vec<f64>,
    /// Cumulative sum of 1 / (unnormalized s0) over events up to and
    /// including each position.
    cum_inv_s0: Vec<f64>,
}

impl EventPoints {
    /// Cumulative value over events with time <= x.
    fn cum_at(&self, x: f64) -> f64 {
        let k = self.times.partition_point(|&t| t <= x);
        if k == 0 {
            0.0
        } else {
            self.cum_inv_s0[k - 1]
        }
    }
}

/// Treatment score, treatment information, and event points at fixed beta.
fn theta_quantities(
    beta: &[f64],
    data: &ObservedTrial,
) -> Result<(f64, f64, EventPoints), CoxError> {
    let order = descending_order(data);
    let n = data.n();
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut score = 0.0;
    let mut info = 0.0;
    let mut times_desc = Vec::new();
    let mut inv_desc = Vec::new();
    let mut pos = 0;
    while pos < n {
        let t = data.time[order[pos]];
        let mut end = pos;
        while end < n && data.time[order[end]] == t {
            let i = order[end];
            let e = linear_predictor(beta, data, i).exp();
            s0 += e;
            if data.arm[i] == 1 {
                s1 += e;
            }
            end += 1;
        }
        for &i in &order[pos..end] {
            if data.event[i] == 1 {
                let ratio = s1 / s0;
                score += f64::from(data.arm[i]) - ratio;
                info += ratio * (1.0 - ratio);
                times_desc.push(t);
                inv_desc.push(1.0 / s0);
            }
        }
        pos = end;
    }
    times_desc.reverse();
    inv_desc.reverse();
    let mut cum = 0.0;
    let cum_inv_s0 = inv_desc
        .iter()
        .map(|v| {
            cum += v;
            cum
        })
        .collect();
    Ok((
        score,
        info / n as f64,
        EventPoints {
            times: times_desc,
            cum_inv_s0,
        },
    ))
}

/// Score for the treatment effect at `theta = 0` and coefficients `beta`.
/// An empty `beta` ignores the covariates entirely.
pub fn score_theta(beta: &[f64], data: &ObservedTrial) -> Result<f64, CoxError> {
    validate(data)?;
    check_beta(beta, data)?;
    Ok(theta_quantities(beta, data)?.0)
}

/// Model-based information for the treatment effect at `theta = 0`.
pub fn info_theta(beta: &[f64], data: &ObservedTrial) -> Result<f64, CoxError> {
    validate(data)?;
    check_beta(beta, data)?;
    Ok(theta_quantities(beta, data)?.1)
}

fn o_hats_from_points(beta: &[f64], data: &ObservedTrial, points: &EventPoints) -> Vec<f64> {
    (0..data.n())
        .map(|i| {
            let e = linear_predictor(beta, data, i).exp();
            0.5 * (f64::from(data.event[i]) - e * points.cum_at(data.time[i]))
        })
        .collect()
}

/// Per-subject residuals whose empirical second moment is the robust
/// variance of the treatment score.
pub fn o_hats(beta: &[f64], data: &ObservedTrial) -> Result<Vec<f64>, CoxError> {
    validate(data)?;
    check_beta(beta, data)?;
    let (_, _, points) = theta_quantities(beta, data)?;
    Ok(o_hats_from_points(beta, data, &points))
}

/// Robust variance of the treatment score: mean of squared residuals.
pub fn robust_var_b(beta: &[f64], data: &ObservedTrial) -> Result<f64, CoxError> {
    let o = o_hats(beta, data)?;
    Ok(o.iter().map(|v| v * v).sum::<f64>() / o.len() as f64)
}

/// Log-rank numerator: sum over events of `I_i - (at-risk arm-1 share)`,
/// computed from risk-set counts alone.
pub fn logrank_numerator(data: &ObservedTrial) -> Result<f64, CoxError> {
    validate(data)?;
    let order = descending_order(data);
    let n = data.n();
    let mut y = 0.0;
    let mut y1 = 0.0;
    let mut sum = 0.0;
    let mut pos = 0;
    while pos < n {
        let t = data.time[order[pos]];
        let mut end = pos;
        while end < n && data.time[order[end]] == t {
            let i = order[end];
            y += 1.0;
            y1 += f64::from(data.arm[i]);
            end += 1;
        }
        for &i in &order[pos..end] {
            if data.event[i] == 1 {
                sum += f64::from(data.arm[i]) - y1 / y;
            }
        }
        pos = end;
    }
    Ok(sum)
}

/// Log-rank variance estimator: mean over subjects of the integrated
/// at-risk product `y1 * y0 / y^2` over events.
pub fn logrank_sigma2(data: &ObservedTrial) -> Result<f64, CoxError> {
    validate(data)?;
    let order = descending_order(data);
    let n = data.n();
    let mut y = 0.0;
    let mut y1 = 0.0;
    let mut sum = 0.0;
    let mut pos = 0;
    while pos < n {
        let t = data.time[order[pos]];
        let mut end = pos;
        while end < n && data.time[order[end]] == t {
            let i = order[end];
            y += 1.0;
            y1 += f64::from(data.arm[i]);
            end += 1;
        }
        for &i in &order[pos..end] {
            if data.event[i] == 1 {
                sum += y1 * (y - y1) / (y * y);
            }
        }
        pos = end;
    }
    Ok(sum / n as f64)
}

/// Per-stratum moments of the residuals (variance uses divisor `n_z`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StratumMoment {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StratumMoments {
    pub strata: BTreeMap<StratumLabel, StratumMoment>,
}

impl StratumMoments {
    /// `sum_z n_z (var_z + nu_d * mean_z^2)`, the calibrated denominator.
    pub fn calibration_denominator(&self, nu_d: f64) -> f64 {
        self.strata
            .values()
            .map(|m| m.n as f64 * (m.var + nu_d * m.mean * m.mean))
            .sum()
    }

    /// `sum_z n_z (var_z + mean_z^2)`, which equals the total sum of
    /// squared residuals.
    pub fn total_sum_squares(&self) -> f64 {
        self.calibration_denominator(1.0)
    }
}

pub fn stratum_moments(o_hat: &[f64], strata: &[StratumLabel]) -> StratumMoments {
    assert_eq!(o_hat.len(), strata.len());
    let mut groups: BTreeMap<StratumLabel, Vec<f64>> = BTreeMap::new();
    for (o, label) in o_hat.iter().zip(strata) {
        groups.entry(label.clone()).or_default().push(*o);
    }
    let strata = groups
        .into_iter()
        .map(|(label, os)| {
            let n = os.len();
            let mean = os.iter().sum::<f64>() / n as f64;
            let var = os.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / n as f64;
            (label, StratumMoment { n, mean, var })
        })
        .collect();
    StratumMoments { strata }
}

/// Maximize the partial likelihood in the working coefficients with the
/// treatment effect fixed at zero, by Newton-Raphson from zero with
/// step-halving; then assemble every derived quantity.
pub fn fit_null(data: &ObservedTrial) -> Result<NullCoxFit, CoxError> {
    fit_with_dim(data, data.w_dim)
}

/// Same fit with the covariates ignored (the log-rank configuration);
/// no iteration is needed.
pub fn fit_null_unadjusted(data: &ObservedTrial) -> Result<NullCoxFit, CoxError> {
    fit_with_dim(data, 0)
}

fn fit_with_dim(data: &ObservedTrial, dim: usize) -> Result<NullCoxFit, CoxError> {
    validate(data)?;
    if data.events() == 0 {
        return Err(CoxError::NoEvents);
    }
    let mut beta = vec![0.0; dim];
    let mut iterations = 0;
    let mut gradient_norm = 0.0;
    if dim > 0 {
        let (mut loglik, mut grad, mut info) = beta_derivatives(&beta, data)?;
        loop {
            gradient_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            if gradient_norm <= DEFAULT_TOLERANCE {
                break;
            }
            if iterations >= DEFAULT_MAX_ITER {
                return Err(CoxError::NonConvergence {
                    iterations,
                    gradient_norm,
                });
            }
            let step = solve_spd(&info, &grad, dim).ok_or(CoxError::SingularInformation)?;
            let mut scale = 1.0;
            loop {
                let candidate: Vec<f64> = beta
                    .iter()
                    .zip(&step)
                    .map(|(b, s)| b + scale * s)
                    .collect();
                let (ll_new, g_new, i_new) = beta_derivatives(&candidate, data)?;
                if ll_new.is_finite() && ll_new >= loglik - 1e-12 * (1.0 + loglik.abs()) {
                    beta = candidate;
                    loglik = ll_new;
                    grad = g_new;
                    info = i_new;
                    break;
                }
                scale *= 0.5;
                if scale < 1e-8 {
                    return Err(CoxError::NonConvergence {
                        iterations,
                        gradient_norm,
                    });
                }
            }
            iterations += 1;
        }
    }
    let (score, info_a, points) = theta_quantities(&beta, data)?;
    let o_hat = o_hats_from_points(&beta, data, &points);
    let robust_b = o_hat.iter().map(|o| o * o).sum::<f64>() / o_hat.len() as f64;
    Ok(NullCoxFit {
        beta,
        score_theta: score,
        info_a,
        robust_b,
        o_hat,
        converged: true,
        iterations,
        gradient_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use crate::trial_data::{gen_case, CaseSpec, ObservedTrial};
    use rand::Rng;

    /// times 1,2,3,4; delta 1,1,0,1; arms 1,0,0,1; no covariates.
    fn four_subject() -> ObservedTrial {
        ObservedTrial {
            strata: vec![vec![0]; 4],
            w: vec![],
            w_dim: 0,
            arm: vec![1, 0, 0, 1],
            time: vec![1.0, 2.0, 3.0, 4.0],
            event: vec![1, 1, 0, 1],
        }
    }

    /// Explicit partial log likelihood with a free treatment effect, by
    /// double loop over risk sets. Oracle, independent of the sweep.
    fn brute_loglik(theta: f64, beta: &[f64], data: &ObservedTrial) -> f64 {
        let n = data.n();
        let eta = |i: usize| -> f64 {
            theta * f64::from(data.arm[i])
                + beta
                    .iter()
                    .zip(data.w_row(i))
                    .map(|(b, w)| b * w)
                    .sum::<f64>()
        };
        (0..n)
            .filter(|&i| data.event[i] == 1)
            .map(|i| {
                let denom: f64 = (0..n)
                    .filter(|&k| data.time[k] >= data.time[i])
                    .map(|k| eta(k).exp())
                    .sum();
                eta(i) - denom.ln()
            })
            .sum()
    }

    /// Residuals by the defining double sum. Oracle.
    fn brute_o_hats(beta: &[f64], data: &ObservedTrial) -> Vec<f64> {
        let n = data.n();
        let exp_eta = |i: usize| -> f64 {
            beta.iter()
                .zip(data.w_row(i))
                .map(|(b, w)| b * w)
                .sum::<f64>()
                .exp()
        };
        (0..n)
            .map(|i| {
                let mut inner = 0.0;
                for j in 0..n {
                    if data.event[j] == 1 && data.time[i] >= data.time[j] {
                        let s0: f64 = (0..n)
                            .filter(|&k| data.time[k] >= data.time[j])
                            .map(exp_eta)
                            .sum();
                        inner += exp_eta(i) / s0;
                    }
                }
                0.5 * (f64::from(data.event[i]) - inner)
            })
            .collect()
    }

    fn random_trial(seed: u64, n: usize, w_dim: usize, ties: bool) -> ObservedTrial {
        let mut rng = derive_rng(seed, &[42]);
        let mut time: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 + 0.1).collect();
        if ties {
            for i in (1..n).step_by(3) {
                time[i] = time[i - 1];
            }
        }
        ObservedTrial {
            strata: (0..n).map(|_| vec![rng.random::<u8>() % 3]).collect(),
            w: (0..n * w_dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect(),
            w_dim,
            arm: (0..n).map(|_| rng.random::<u8>() % 2).collect(),
            time,
            event: (0..n).map(|_| u8::from(rng.random::<f64>() < 0.7)).collect(),
        }
    }

    #[test]
    fn four_subject_score_is_one_sixth() {
        let data = four_subject();
        let u = score_theta(&[], &data).unwrap();
        assert!((u - 1.0 / 6.0).abs() < 1e-14, "{u}");
    }

    #[test]
    fn four_subject_info_matches_finite_difference_oracle() {
        // Frozen from the central-difference oracle on the explicit
        // partial likelihood: (1/4)[(2/4)(2/4) + (1/3)(2/3) + 0] = 17/144.
        let data = four_subject();
        let a = info_theta(&[], &data).unwrap();
        assert!((a - 17.0 / 144.0).abs() < 1e-14, "{a}");
        let h = 1e-4;
        let fd = -(brute_loglik(h, &[], &data) - 2.0 * brute_loglik(0.0, &[], &data)
            + brute_loglik(-h, &[], &data))
            / (h * h)
            / 4.0;
        assert!((a - fd).abs() < 1e-6, "analytic {a} vs fd {fd}");
    }

    #[test]
    fn four_subject_residuals_match_brute_force() {
        // Frozen from the double-sum oracle; note they sum to zero.
        let data = four_subject();
        let o = o_hats(&[], &data).unwrap();
        let expected = [3.0 / 8.0, 5.0 / 24.0, -7.0 / 24.0, -7.0 / 24.0];
        for (a, b) in o.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{o:?}");
        }
        let brute = brute_o_hats(&[], &data);
        for (a, b) in o.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(o.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn residuals_match_brute_force_with_covariates_and_ties() {
        for seed in 0..5 {
            let data = random_trial(seed, 25, 2, seed % 2 == 0);
            let beta = [0.3, -0.4];
            let fast = o_hats(&beta, &data).unwrap();
            let brute = brute_o_hats(&beta, &data);
            for (a, b) in fast.iter().zip(&brute) {
                assert!((a - b).abs() < 1e-11, "seed {seed}");
            }
            let b_fast = robust_var_b(&beta, &data).unwrap();
            let b_brute = brute.iter().map(|o| o * o).sum::<f64>() / 25.0;
            assert!((b_fast - b_brute).abs() < 1e-12);
        }
    }

    #[test]
    fn score_gradient_matches_finite_difference() {
        for seed in 10..14 {
            let data = random_trial(seed, 30, 2, false);
            let beta = [0.2, 0.1];
            let u = score_theta(&beta, &data).unwrap();
            let h = 1e-5;
            let fd = (brute_loglik(h, &beta, &data) - brute_loglik(-h, &beta, &data)) / (2.0 * h);
            assert!(
                (u - fd).abs() <= 1e-5 * (1.0 + u.abs()),
                "seed {seed}: {u} vs {fd}"
            );
        }
    }

    #[test]
    fn beta_gradient_matches_finite_difference() {
        for seed in 20..24 {
            let data = random_trial(seed, 30, 2, false);
            let beta = [0.15, -0.25];
            let (_, grad, _) = beta_derivatives(&beta, &data).unwrap();
            let h = 1e-5;
            for j in 0..2 {
                let mut up = beta;
                up[j] += h;
                let mut down = beta;
                down[j] -= h;
                let fd =
                    (brute_loglik(0.0, &up, &data) - brute_loglik(0.0, &down, &data)) / (2.0 * h);
                assert!(
                    (grad[j] - fd).abs() <= 1e-5 * (1.0 + fd.abs()),
                    "seed {seed} coord {j}: {} vs {fd}",
                    grad[j]
                );
            }
        }
    }

    #[test]
    fn info_theta_matches_finite_difference() {
        for seed in 30..33 {
            let data = random_trial(seed, 20, 1, false);
            let beta = [0.3];
            let a = info_theta(&beta, &data).unwrap();
            let h = 1e-4;
            let fd = -(brute_loglik(h, &beta, &data) - 2.0 * brute_loglik(0.0, &beta, &data)
                + brute_loglik(-h, &beta, &data))
                / (h * h)
                / 20.0;
            assert!((a - fd).abs() <= 1e-5 * (1.0 + fd.abs()), "{a} vs {fd}");
        }
    }

    #[test]
    fn fit_matches_grid_search_oracle() {
        // Six subjects, one binary covariate; the grid maximizes the
        // explicit likelihood product to 2e-7 resolution.
        let data = ObservedTrial {
            strata: vec![vec![0]; 6],
            w: vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0],
            w_dim: 1,
            arm: vec![0, 1, 0, 1, 0, 1],
            time: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            event: vec![1, 1, 0, 1, 1, 0],
        };
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut b = -5.0;
        while b <= 5.0 {
            let ll = brute_loglik(0.0, &[b], &data);
            if ll > best.0 {
                best = (ll, b);
            }
            b += 1e-3;
        }
        let center = best.1;
        let mut b = center - 2e-3;
        while b <= center + 2e-3 {
            let ll = brute_loglik(0.0, &[b], &data);
            if ll > best.0 {
                best = (ll, b);
            }
            b += 2e-7;
        }
        let fit = fit_null(&data).unwrap();
        assert!(fit.converged);
        assert!(
            (fit.beta[0] - best.1).abs() < 1e-6,
            "newton {} vs grid {}",
            fit.beta[0],
            best.1
        );
        assert!(fit.gradient_norm <= DEFAULT_TOLERANCE);
    }

    #[test]
    fn empty_covariates_fit_is_trivial() {
        let data = four_subject();
        let fit = fit_null(&data).unwrap();
        assert!(fit.beta.is_empty());
        assert_eq!(fit.iterations, 0);
        assert!((fit.score_theta - logrank_numerator(&data).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn score_with_empty_beta_equals_logrank_numerator() {
        for seed in 40..45 {
            let data = random_trial(seed, 60, 2, seed % 2 == 1);
            let a = score_theta(&[], &data).unwrap();
            let b = logrank_numerator(&data).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn all_censored_gives_zero_score_and_variance() {
        let mut data = four_subject();
        data.event = vec![0, 0, 0, 0];
        assert_eq!(score_theta(&[], &data).unwrap(), 0.0);
        assert_eq!(robust_var_b(&[], &data).unwrap(), 0.0);
        assert!(matches!(fit_null(&data), Err(CoxError::NoEvents)));
    }

    #[test]
    fn one_arm_degenerate_cases() {
        let mut data = four_subject();
        data.arm = vec![1, 1, 1, 1];
        assert_eq!(info_theta(&[], &data).unwrap(), 0.0);
        assert_eq!(logrank_sigma2(&data).unwrap(), 0.0);
    }

    #[test]
    fn logrank_single_event_balanced_arms() {
        // One event with everyone at risk and balanced arms contributes
        // 1/4, so sigma^2 = 1/(4n).
        let data = ObservedTrial {
            strata: vec![vec![0]; 4],
            w: vec![],
            w_dim: 0,
            arm: vec![1, 0, 1, 0],
            time: vec![1.0, 2.0, 3.0, 4.0],
            event: vec![1, 0, 0, 0],
        };
        let s = logrank_sigma2(&data).unwrap();
        assert!((s - 0.25 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn stratum_moments_hand_values_and_identity() {
        let o = [1.0, -1.0, 2.0, -2.0];
        let strata = vec![vec![0u8], vec![0], vec![1], vec![1]];
        let m = stratum_moments(&o, &strata);
        assert_eq!(m.strata[&vec![0u8]].n, 2);
        assert!((m.strata[&vec![0u8]].mean).abs() < 1e-15);
        assert!((m.strata[&vec![0u8]].var - 1.0).abs() < 1e-15);
        assert!((m.strata[&vec![1u8]].var - 4.0).abs() < 1e-15);
        let total: f64 = o.iter().map(|v| v * v).sum();
        assert!((m.total_sum_squares() - total).abs() < 1e-12 * total);
    }

    #[test]
    fn permutation_invariance() {
        let data = random_trial(50, 40, 2, false);
        let beta = [0.2, -0.1];
        let u = score_theta(&beta, &data).unwrap();
        let a = info_theta(&beta, &data).unwrap();
        let b = robust_var_b(&beta, &data).unwrap();
        // Reverse the subject order.
        let idx: Vec<usize> = (0..40).rev().collect();
        let shuffled = ObservedTrial {
            strata: idx.iter().map(|&i| data.strata[i].clone()).collect(),
            w: idx.iter().flat_map(|&i| data.w_row(i).to_vec()).collect(),
            w_dim: 2,
            arm: idx.iter().map(|&i| data.arm[i]).collect(),
            time: idx.iter().map(|&i| data.time[i]).collect(),
            event: idx.iter().map(|&i| data.event[i]).collect(),
        };
        assert!((score_theta(&beta, &shuffled).unwrap() - u).abs() < 1e-12 * (1.0 + u.abs()));
        assert!((info_theta(&beta, &shuffled).unwrap() - a).abs() < 1e-12 * (1.0 + a.abs()));
        assert!((robust_var_b(&beta, &shuffled).unwrap() - b).abs() < 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn time_scale_invariance() {
        let data = random_trial(51, 40, 1, false);
        let beta = [0.4];
        let u = score_theta(&beta, &data).unwrap();
        let o = o_hats(&beta, &data).unwrap();
        let mut scaled = data.clone();
        for t in &mut scaled.time {
            *t *= 37.0;
        }
        assert_eq!(score_theta(&beta, &scaled).unwrap(), u);
        assert_eq!(o_hats(&beta, &scaled).unwrap(), o);
    }

    #[test]
    fn case1_fit_recovers_true_coefficient() {
        let mut rng = derive_rng(60, &[1]);
        let spec = CaseSpec::new(1, 0.0, 5000);
        let subjects = gen_case(&spec, &mut rng).unwrap();
        let arms: Vec<u8> = (0..5000).map(|i| (i % 2) as u8).collect();
        let data = ObservedTrial::from_assignments(&subjects, &arms);
        let fit = fit_null(&data).unwrap();
        let info = beta_information(&fit.beta, &data).unwrap();
        let se = (1.0 / info[0]).sqrt();
        assert!(
            (fit.beta[0] - 1.5).abs() < 3.0 * se,
            "beta {} se {se}",
            fit.beta[0]
        );
        // Correct model: robust and model-based variances agree.
        assert!(
            (fit.robust_b - fit.info_a).abs() < 0.05 * fit.info_a,
            "B {} vs A {}",
            fit.robust_b,
            fit.info_a
        );
    }

    #[test]
    fn logrank_sigma2_consistent_with_residual_moment() {
        let mut rng = derive_rng(61, &[1]);
        let spec = CaseSpec::new(1, 0.0, 5000);
        let subjects = gen_case(&spec, &mut rng).unwrap();
        let arms: Vec<u8> = (0..5000)
            .map(|_| u8::from(rng.random::<f64>() < 0.5))
            .collect();
        let data = ObservedTrial::from_assignments(&subjects, &arms);
        let sigma2 = logrank_sigma2(&data).unwrap();
        let o = o_hats(&[], &data).unwrap();
        let second_moment = o.iter().map(|v| v * v).sum::<f64>() / 5000.0;
        assert!(
            (sigma2 - second_moment).abs() < 0.05 * second_moment,
            "{sigma2} vs {second_moment}"
        );
    }

    #[test]
    fn singular_design_is_reported() {
        // Two perfectly collinear covariates.
        let n = 20;
        let mut data = random_trial(52, n, 1, false);
        let col: Vec<f64> = (0..n).map(|i| data.w[i]).collect();
        data.w = (0..n).flat_map(|i| [col[i], 2.0 * col[i]]).collect();
        data.w_dim = 2;
        assert!(matches!(
            fit_null(&data),
            Err(CoxError::SingularInformation)
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn trial_strategy() -> impl Strategy<Value = ObservedTrial> {
            (5usize..40).prop_flat_map(|n| {
                (
                    proptest::collection::vec(0.05f64..20.0, n),
                    proptest::collection::vec(any::<bool>(), n),
                    proptest::collection::vec(any::<bool>(), n),
                    proptest::collection::vec(-1.0f64..1.0, n),
                    proptest::collection::vec(0u8..3, n),
                )
                    .prop_map(|(time, event, arm, w, strata)| ObservedTrial {
                        strata: strata.into_iter().map(|s| vec![s]).collect(),
                        w,
                        w_dim: 1,
                        arm: arm.into_iter().map(u8::from).collect(),
                        time,
                        event: event.into_iter().map(u8::from).collect(),
                    })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn stratum_decomposition_identity(data in trial_strategy()) {
                let beta = [0.25];
                let o = o_hats(&beta, &data).unwrap();
                let sum_sq: f64 = o.iter().map(|v| v * v).sum();
                let m = stratum_moments(&o, &data.strata);
                prop_assert!(
                    (m.total_sum_squares() - sum_sq).abs() <= 1e-12 * (1.0 + sum_sq)
                );
            }

            #[test]
            fn score_is_rank_based(data in trial_strategy(), scale in 0.1f64..50.0) {
                let beta = [0.25];
                let u = score_theta(&beta, &data).unwrap();
                let b = robust_var_b(&beta, &data).unwrap();
                let mut scaled = data.clone();
                for t in &mut scaled.time {
                    *t *= scale;
                }
                prop_assert!(
                    (score_theta(&beta, &scaled).unwrap() - u).abs() <= 1e-9 * (1.0 + u.abs())
                );
                prop_assert!(
                    (robust_var_b(&beta, &scaled).unwrap() - b).abs() <= 1e-9 * (1.0 + b)
                );
            }
        }
    }
}
