//! Test statistics and rejection decisions.
//!
//!7 families share the same numerator machinery: the treatment score at
//! the null-constrained fit. They differ in the variance that standardizes
//! it — model-based, robust, log-rank, calibrated by randomization strata,
//! or bootstrap with re-randomized assignments.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::cox::{self, CoxError, NullCoxFit};
use crate::randomization::{SchemeError, SchemeKind, SchemeSpec, SchemeState, StratumLabel};
use crate::trial_data::ObservedTrial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestFamily {
    /// Model-based score test.
    Model,
    /// Robust-variance score test.
    Score,
    /// Log-rank test.
    LogRank,
    /// Calibrated score test.
    CalibratedScore,
    /// Calibrated log-rank test.
    CalibratedLogRank,
    /// Bootstrap-variance score test.
    BootstrapScore,
    /// Bootstrap-variance log-rank test.
    BootstrapLogRank,
}

impl TestFamily {
    pub fn label(&self) -> &'static str {
        match self {
            TestFamily::Model => "T_M",
            TestFamily::Score => "T_S",
            TestFamily::LogRank => "T_L",
            TestFamily::CalibratedScore => "T_CS",
            TestFamily::CalibratedLogRank => "T_CL",
            TestFamily::BootstrapScore => "T_BS",
            TestFamily::BootstrapLogRank => "T_BL",
        }
    }
}

impl std::fmt::Display for TestFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One two-sided test decision. `statistic` is the standardized value
/// `n^{-1/2} U / sqrt(variance)` with `variance` on the per-subject scale.
#[derive(Clone, Debug, PartialEq)]
pub struct TestReport {
    pub family: TestFamily,
    pub statistic: f64,
    pub variance: f64,
    pub nu_d: Option<f64>,
    pub reject: bool,
}

#[derive(Debug, Error)]
pub enum TestError {
    #[error("model-based information must be positive")]
    NonPositiveInformation,
    #[error("variance estimate is not positive")]
    ZeroVariance,
    #[error("calibration is not applicable under the marginal method")]
    CalibrationInapplicable,
    #[error("bootstrap size must be at least 50, got {0}")]
    BootstrapTooSmall(usize),
    #[error("too many degenerate bootstrap resamples ({0} attempts)")]
    DegenerateBootstrap(usize),
    #[error("significance level must lie in (0,1), got {0}")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Cox(#[from] CoxError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Two-sided critical value `z_{alpha/2}`.
pub fn critical_value(alpha: f64) -> Result<f64, TestError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(TestError::InvalidAlpha(alpha));
    }
    Ok(Normal::standard().inverse_cdf(1.0 - alpha / 2.0))
}

/// Limiting variance of the normalized within-stratum imbalance for each
/// scheme, assuming the stratified application. `None` for the marginal
/// method, whose limit is unknown.
pub fn nu_d(scheme: &SchemeSpec) -> Option<f64> {
    match scheme.kind {
        SchemeKind::Simple => Some(1.0),
        SchemeKind::PermutedBlock | SchemeKind::EfronBiasedCoin => Some(0.0),
        SchemeKind::WeiUrn => {
            // With omega = 0 the urn never biases the coin and the design
            // is simple randomization.
            if scheme.urn_omega == 0.0 {
                Some(1.0)
            } else {
                Some(1.0 / 3.0)
            }
        }
        SchemeKind::PocockSimon => None,
    }
}

fn report(
    family: TestFamily,
    numerator_scaled: f64,
    variance: f64,
    nu: Option<f64>,
    alpha: f64,
) -> Result<TestReport, TestError> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(TestError::ZeroVariance);
    }
    let statistic = numerator_scaled / variance.sqrt();
    let reject = statistic.abs() > critical_value(alpha)?;
    Ok(TestReport {
        family,
        statistic,
        variance,
        nu_d: nu,
        reject,
    })
}

/// Model-based score test: standardizes by the model information.
pub fn t_model(fit: &NullCoxFit, n: usize, alpha: f64) -> Result<TestReport, TestError> {
    if !(fit.info_a > 0.0) {
        return Err(TestError::NonPositiveInformation);
    }
    let num = fit.score_theta / (n as f64).sqrt();
    report(TestFamily::Model, num, fit.info_a, None, alpha)
}

/// Robust score test: standardizes by the residual second moment.
pub fn t_score(fit: &NullCoxFit, n: usize, alpha: f64) -> Result<TestReport, TestError> {
    let num = fit.score_theta / (n as f64).sqrt();
    report(TestFamily::Score, num, fit.robust_b, None, alpha)
}

/// Log-rank test from risk-set counts alone.
pub fn t_logrank(data: &ObservedTrial, alpha: f64) -> Result<TestReport, TestError> {
    let num = cox::logrank_numerator(data)? / (data.n() as f64).sqrt();
    let sigma2 = cox::logrank_sigma2(data)?;
    report(TestFamily::LogRank, num, sigma2, None, alpha)
}

/// Calibrated test at an explicit imbalance variance `nu`. The family is
/// the calibrated score test when the fit used covariates, the calibrated
/// log-rank test when it did not.
pub fn t_calibrated_with_nu(
    fit: &NullCoxFit,
    strata: &[StratumLabel],
    nu: f64,
    alpha: f64,
) -> Result<TestReport, TestError> {
    let family = if fit.beta.is_empty() {
        TestFamily::CalibratedLogRank
    } else {
        TestFamily::CalibratedScore
    };
    let n = fit.o_hat.len();
    let moments = cox::stratum_moments(&fit.o_hat, strata);
    let variance = moments.calibration_denominator(nu) / n as f64;
    let num = fit.score_theta / (n as f64).sqrt();
    report(family, num, variance, Some(nu), alpha)
}

/// Calibrated test for a scheme; fails for the marginal method.
pub fn t_calibrated(
    fit: &NullCoxFit,
    strata: &[StratumLabel],
    scheme: &SchemeSpec,
    alpha: f64,
) -> Result<TestReport, TestError> {
    let nu = nu_d(scheme).ok_or(TestError::CalibrationInapplicable)?;
    t_calibrated_with_nu(fit, strata, nu, alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BootstrapKind {
    Score,
    LogRank,
}

/// Bootstrap test: resamples subject tuples with replacement, re-runs the
/// same randomization scheme on each resampled stratum sequence for fresh
/// assignments, refits the null model, and standardizes the original
/// numerator by the variance of the resampled numerators. Resamples
/// without events are redrawn up to a bounded number of attempts.
pub fn t_bootstrap(
    data: &ObservedTrial,
    scheme: &SchemeSpec,
    b: usize,
    which: BootstrapKind,
    alpha: f64,
    rng: &mut ChaCha12Rng,
) -> Result<TestReport, TestError> {
    if b < 50 {
        return Err(TestError::BootstrapTooSmall(b));
    }
    let n = data.n();
    let sqrt_n = (n as f64).sqrt();
    let numerator = match which {
        BootstrapKind::Score => cox::fit_null(data)?.score_theta / sqrt_n,
        BootstrapKind::LogRank => cox::logrank_numerator(data)? / sqrt_n,
    };
    let family = match which {
        BootstrapKind::Score => TestFamily::BootstrapScore,
        BootstrapKind::LogRank => TestFamily::BootstrapLogRank,
    };

    let mut values = Vec::with_capacity(b);
    let mut attempts = 0;
    let max_attempts = 5 * b;
    while values.len() < b {
        attempts += 1;
        if attempts > max_attempts {
            return Err(TestError::DegenerateBootstrap(attempts));
        }
        let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let keep_w = which == BootstrapKind::Score;
        let w_dim = if keep_w { data.w_dim } else { 0 };
        let mut resampled = ObservedTrial {
            strata: Vec::with_capacity(n),
            w: Vec::with_capacity(n * w_dim),
            w_dim,
            arm: Vec::with_capacity(n),
            time: Vec::with_capacity(n),
            event: Vec::with_capacity(n),
        };
        let mut state = SchemeState::new(scheme.clone(), ChaCha12Rng::from_rng(rng))?;
        let mut ok = true;
        for &i in &indices {
            let arm = match state.assign_next(&data.strata[i]) {
                Ok(a) => a,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            resampled.strata.push(data.strata[i].clone());
            if keep_w {
                resampled.w.extend_from_slice(data.w_row(i));
            }
            resampled.arm.push(arm);
            resampled.time.push(data.time[i]);
            resampled.event.push(data.event[i]);
        }
        if !ok || resampled.events() == 0 {
            continue;
        }
        let value = match which {
            BootstrapKind::Score => match cox::fit_null(&resampled) {
                Ok(fit) => fit.score_theta / sqrt_n,
                Err(_) => continue,
            },
            BootstrapKind::LogRank => match cox::logrank_numerator(&resampled) {
                Ok(u) => u / sqrt_n,
                Err(_) => continue,
            },
        };
        values.push(value);
    }
    let mean = values.iter().sum::<f64>() / b as f64;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0);
    report(family, numerator, variance, None, alpha)
}
