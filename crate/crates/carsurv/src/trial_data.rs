//! Subjects, potential outcomes, and the simulation case generators.
//!
//! A [`Subject`] carries both potential event times so a trial can be
//! assigned after generation; the same underlying uniform (or error term)
//! drives both arms, so a zero treatment effect yields literally identical
//! outcomes under either assignment without changing the marginal laws.

use std::io::{Read, Write};

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::randomization::StratumLabel;

/// Baseline hazard rate used throughout the simulation studies.
pub const DEFAULT_LAMBDA0: f64 = std::f64::consts::LN_2 / 12.0;

/// True hazard of the control-arm potential time given the subject's
/// covariates. Under a zero treatment effect this is the common hazard of
/// both arms; the large-sample oracles integrate against it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControlHazard {
    /// Constant rate (exponential event time).
    Constant(f64),
    /// Unit rate switching on at `onset` (shifted unit exponential).
    ShiftedUnitExp { onset: f64 },
}

impl ControlHazard {
    pub fn rate_at(&self, t: f64) -> f64 {
        match *self {
            ControlHazard::Constant(rate) => rate,
            ControlHazard::ShiftedUnitExp { onset } => {
                if t >= onset {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// One generated subject: covariates and potential outcomes, unassigned.
#[derive(Clone, Debug)]
pub struct Subject {
    /// Joint levels of the randomization covariates.
    pub strata: StratumLabel,
    /// Working-model covariates.
    pub w: Vec<f64>,
    /// Potential event times, indexed by arm.
    pub event_times: [f64; 2],
    /// Censoring time, shared across arms.
    pub censor_time: f64,
    pub control_hazard: ControlHazard,
}

/// Parameters of one simulation case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub case_id: u8,
    /// Treatment effect on the arm-1 linear predictor.
    pub theta: f64,
    pub n: usize,
    pub lambda0: f64,
    /// Discretization levels for the continuous stratification covariate
    /// of case 3.
    pub k_levels: u8,
    /// Scale applied to every covariate coefficient of the true model;
    /// 0 removes all covariate effects while keeping the same covariates.
    pub effect_scale: f64,
}

impl CaseSpec {
    pub fn new(case_id: u8, theta: f64, n: usize) -> Self {
        CaseSpec {
            case_id,
            theta,
            n,
            lambda0: DEFAULT_LAMBDA0,
            k_levels: 4,
            effect_scale: 1.0,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if !(1..=6).contains(&self.case_id) {
            return Err(DataError::InvalidCase(self.case_id));
        }
        if self.n < 2 {
            return Err(DataError::SampleTooSmall(self.n));
        }
        if !(self.lambda0 > 0.0) || !self.lambda0.is_finite() {
            return Err(DataError::InvalidRate(self.lambda0));
        }
        if self.k_levels < 2 {
            return Err(DataError::InvalidLevels(self.k_levels));
        }
        if !self.theta.is_finite() || !self.effect_scale.is_finite() {
            return Err(DataError::NonFiniteParameter);
        }
        Ok(())
    }

    /// Dimension of the working-model covariate vector.
    pub fn w_dim(&self) -> usize {
        match self.case_id {
            1 | 6 => 1,
            2 => 3,
            _ => 2,
        }
    }

    /// Number of randomization covariate margins.
    pub fn strata_dim(&self) -> usize {
        match self.case_id {
            1 | 6 => 1,
            _ => 2,
        }
    }

    /// True working-model coefficients when the working hazard is correct
    /// (cases 1-3); `None` for the misspecified cases.
    pub fn true_beta(&self) -> Option<Vec<f64>> {
        let s = self.effect_scale;
        match self.case_id {
            1 => Some(vec![1.5 * s]),
            2 => Some(vec![1.5 * s, -1.0 * s, -0.5 * s]),
            3 => Some(vec![-1.5 * s, 0.5 * s]),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("case id must be in 1..=6, got {0}")]
    InvalidCase(u8),
    #[error("sample size must be at least 2, got {0}")]
    SampleTooSmall(usize),
    #[error("hazard rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("discretization needs at least 2 levels, got {0}")]
    InvalidLevels(u8),
    #[error("uniform draw must lie in (0,1), got {0}")]
    InvalidUniform(f64),
    #[error("case parameters must be finite")]
    NonFiniteParameter,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset header must look like id,z1,..,w1,..,I,x,delta; got {0:?}")]
    BadHeader(Vec<String>),
    #[error("dataset row {row}: {message}")]
    BadRow { row: usize, message: String },
}

/// Inverse-CDF draw from the exponential event-time law with hazard
/// `lambda0 * exp(eta)`.
pub fn sample_exp_cox_time(lambda0: f64, eta: f64, u: f64) -> Result<f64, DataError> {
    if !(lambda0 > 0.0) || !lambda0.is_finite() {
        return Err(DataError::InvalidRate(lambda0));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(DataError::InvalidUniform(u));
    }
    Ok(-u.ln() / (lambda0 * eta.exp()))
}

/// Equal-probability category of a standard normal value: category `j`
/// iff the value lies in `(q((j-1)/k), q(j/k)]` with `q` the N(0,1)
/// quantile function.
pub fn discretize_normal(value: f64, k: u8) -> u8 {
    let normal = Normal::standard();
    for j in 1..k {
        if value <= normal.inverse_cdf(f64::from(j) / f64::from(k)) {
            return j;
        }
    }
    k
}

/// Observed response once an arm is assigned: `(min(t, c), event flag)`.
/// An event at exactly the censoring time counts as observed.
pub fn observe(subject: &Subject, arm: u8) -> (f64, u8) {
    let t = subject.event_times[usize::from(arm == 1)];
    let c = subject.censor_time;
    if t <= c {
        (t, 1)
    } else {
        (c, 0)
    }
}

fn unit_open(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn uniform(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn bernoulli(rng: &mut ChaCha12Rng, p: f64) -> u8 {
    u8::from(rng.random::<f64>() < p)
}

/// Draw from {1,2,3} with probabilities (0.4, 0.3, 0.3).
fn categorical3(rng: &mut ChaCha12Rng) -> u8 {
    let u: f64 = rng.random();
    if u < 0.4 {
        1
    } else if u < 0.7 {
        2
    } else {
        3
    }
}

/// Generate the subjects of a simulation case. Per subject the draw order
/// is fixed: covariates, then the shared event-time draw, then censoring.
pub fn gen_case(spec: &CaseSpec, rng: &mut ChaCha12Rng) -> Result<Vec<Subject>, DataError> {
    spec.validate()?;
    let s = spec.effect_scale;
    let lam = spec.lambda0;
    let theta = spec.theta;
    let mut subjects = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let subject = match spec.case_id {
            1 => {
                let z = bernoulli(rng, 0.5);
                let eta = 1.5 * s * f64::from(z);
                let u = unit_open(rng);
                let c = uniform(rng, 20.0, 50.0);
                Subject {
                    strata: vec![z],
                    w: vec![f64::from(z)],
                    event_times: [
                        sample_exp_cox_time(lam, eta, u)?,
                        sample_exp_cox_time(lam, theta + eta, u)?,
                    ],
                    censor_time: c,
                    control_hazard: ControlHazard::Constant(lam * eta.exp()),
                }
            }
            2 => {
                let z1 = bernoulli(rng, 0.5);
                let z2 = categorical3(rng);
                let (z21, z22) = (f64::from(z2 == 1), f64::from(z2 == 2));
                let eta = s * (1.5 * f64::from(z1) - z21 - 0.5 * z22);
                let u = unit_open(rng);
                let c = uniform(rng, 20.0, 40.0);
                Subject {
                    strata: vec![z1, z2],
                    w: vec![f64::from(z1), z21, z22],
                    event_times: [
                        sample_exp_cox_time(lam, eta, u)?,
                        sample_exp_cox_time(lam, theta + eta, u)?,
                    ],
                    censor_time: c,
                    control_hazard: ControlHazard::Constant(lam * eta.exp()),
                }
            }
            3 => {
                let z1 = bernoulli(rng, 0.5);
                let z2: f64 = StandardNormal.sample(rng);
                let eta = s * (-1.5 * f64::from(z1) + 0.5 * z2 * z2);
                let u = unit_open(rng);
                let c = uniform(rng, 10.0, 40.0);
                Subject {
                    strata: vec![z1, discretize_normal(z2, spec.k_levels)],
                    w: vec![f64::from(z1), z2 * z2],
                    event_times: [
                        sample_exp_cox_time(lam, eta, u)?,
                        sample_exp_cox_time(lam, theta + eta, u)?,
                    ],
                    censor_time: c,
                    control_hazard: ControlHazard::Constant(lam * eta.exp()),
                }
            }
            4 => {
                let z1 = bernoulli(rng, 0.5);
                let z2 = categorical3(rng);
                let (z21, z22) = (f64::from(z2 == 1), f64::from(z2 == 2));
                let eta = s * (f64::from(z1) - 2.0 * f64::from(z1) * z21 + f64::from(z1) * z22);
                let u = unit_open(rng);
                let c = uniform(rng, 20.0, 50.0);
                Subject {
                    strata: vec![z1, z2],
                    // Working model takes z2 as a single numeric covariate.
                    w: vec![f64::from(z1), f64::from(z2)],
                    event_times: [
                        sample_exp_cox_time(lam, eta, u)?,
                        sample_exp_cox_time(lam, theta + eta, u)?,
                    ],
                    censor_time: c,
                    control_hazard: ControlHazard::Constant(lam * eta.exp()),
                }
            }
            5 => {
                let z1 = bernoulli(rng, 0.5);
                let z2: f64 = StandardNormal.sample(rng);
                let eta = s * (-0.5 * f64::from(z1) + 1.5 * z2 * z2);
                let u = unit_open(rng);
                // C | Z1 = 10 + Exp(mean 2*Z1); degenerate at 10 when Z1 = 0.
                let u_c = unit_open(rng);
                let c = 10.0 + if z1 == 1 { -2.0 * u_c.ln() } else { 0.0 };
                Subject {
                    strata: vec![z1, discretize_normal(z2, 4)],
                    // Working model misses that the z2 effect is quadratic.
                    w: vec![f64::from(z1), z2],
                    event_times: [
                        sample_exp_cox_time(lam, eta, u)?,
                        sample_exp_cox_time(lam, theta + eta, u)?,
                    ],
                    censor_time: c,
                    control_hazard: ControlHazard::Constant(lam * eta.exp()),
                }
            }
            6 => {
                let z: f64 = StandardNormal.sample(rng);
                let eps = -unit_open(rng).ln();
                let c = uniform(rng, 10.0, 20.0);
                let onset0 = (1.5 * s * z).exp();
                let onset1 = (theta + 1.5 * s * z).exp();
                Subject {
                    strata: vec![discretize_normal(z, 4)],
                    w: vec![z],
                    event_times: [onset0 + eps, onset1 + eps],
                    censor_time: c,
                    control_hazard: ControlHazard::ShiftedUnitExp { onset: onset0 },
                }
            }
            _ => unreachable!("validated above"),
        };
        subjects.push(subject);
    }
    Ok(subjects)
}

/// Observed trial: assignments applied, responses censored.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedTrial {
    pub strata: Vec<StratumLabel>,
    /// Row-major `n x w_dim` working covariates.
    pub w: Vec<f64>,
    pub w_dim: usize,
    pub arm: Vec<u8>,
    pub time: Vec<f64>,
    pub event: Vec<u8>,
}

impl ObservedTrial {
    pub fn n(&self) -> usize {
        self.time.len()
    }

    pub fn w_row(&self, i: usize) -> &[f64] {
        &self.w[i * self.w_dim..(i + 1) * self.w_dim]
    }

    pub fn events(&self) -> usize {
        self.event.iter().filter(|&&d| d == 1).count()
    }

    /// Apply an assignment sequence to generated subjects and observe.
    pub fn from_assignments(subjects: &[Subject], arms: &[u8]) -> Self {
        assert_eq!(subjects.len(), arms.len());
        let w_dim = subjects.first().map_or(0, |s| s.w.len());
        let n = subjects.len();
        let mut trial = ObservedTrial {
            strata: Vec::with_capacity(n),
            w: Vec::with_capacity(n * w_dim),
            w_dim,
            arm: Vec::with_capacity(n),
            time: Vec::with_capacity(n),
            event: Vec::with_capacity(n),
        };
        for (subject, &arm) in subjects.iter().zip(arms) {
            let (x, delta) = observe(subject, arm);
            trial.strata.push(subject.strata.clone());
            trial.w.extend_from_slice(&subject.w);
            trial.arm.push(arm);
            trial.time.push(x);
            trial.event.push(delta);
        }
        trial
    }

    /// Dump as CSV: `id,z1,..,w1,..,I,x,delta`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DataError> {
        let mut writer = csv::Writer::from_writer(out);
        let strata_dim = self.strata.first().map_or(0, |s| s.len());
        let mut header = vec!["id".to_string()];
        for j in 1..=strata_dim {
            header.push(format!("z{j}"));
        }
        for j in 1..=self.w_dim {
            header.push(format!("w{j}"));
        }
        header.extend(["I".to_string(), "x".to_string(), "delta".to_string()]);
        writer.write_record(&header)?;
        for i in 0..self.n() {
            let mut record = vec![(i + 1).to_string()];
            for &level in &self.strata[i] {
                record.push(level.to_string());
            }
            for value in self.w_row(i) {
                record.push(value.to_string());
            }
            record.push(self.arm[i].to_string());
            record.push(self.time[i].to_string());
            record.push(self.event[i].to_string());
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Ingest a dataset previously dumped by [`ObservedTrial::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new().from_reader(input);
        let header: Vec<String> = reader
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let bad = || DataError::BadHeader(header.clone());
        if header.first().map(String::as_str) != Some("id") {
            return Err(bad());
        }
        let mut pos = 1;
        let mut strata_dim = 0;
        while pos < header.len() && header[pos] == format!("z{}", strata_dim + 1) {
            strata_dim += 1;
            pos += 1;
        }
        let mut w_dim = 0;
        while pos < header.len() && header[pos] == format!("w{}", w_dim + 1) {
            w_dim += 1;
            pos += 1;
        }
        if header.len() != pos + 3 || header[pos] != "I" || header[pos + 1] != "x" || header[pos + 2] != "delta" {
            return Err(bad());
        }
        let mut trial = ObservedTrial {
            strata: Vec::new(),
            w: Vec::new(),
            w_dim,
            arm: Vec::new(),
            time: Vec::new(),
            event: Vec::new(),
        };
        for (row_index, record) in reader.records().enumerate() {
            let record = record?;
            let row = row_index + 2;
            let fail = |message: &str| DataError::BadRow {
                row,
                message: message.to_string(),
            };
            if record.len() != header.len() {
                return Err(fail("wrong field count"));
            }
            let mut label = StratumLabel::with_capacity(strata_dim);
            for j in 0..strata_dim {
                label.push(
                    record[1 + j]
                        .trim()
                        .parse::<u8>()
                        .map_err(|_| fail("stratum level must be an integer in 0..=255"))?,
                );
            }
            for j in 0..w_dim {
                let value: f64 = record[1 + strata_dim + j]
                    .trim()
                    .parse()
                    .map_err(|_| fail("covariate must be a number"))?;
                if !value.is_finite() {
                    return Err(fail("covariate must be finite"));
                }
                trial.w.push(value);
            }
            let arm: u8 = record[1 + strata_dim + w_dim]
                .trim()
                .parse()
                .map_err(|_| fail("I must be 0 or 1"))?;
            if arm > 1 {
                return Err(fail("I must be 0 or 1"));
            }
            let time: f64 = record[2 + strata_dim + w_dim]
                .trim()
                .parse()
                .map_err(|_| fail("x must be a number"))?;
            if !time.is_finite() || time < 0.0 {
                return Err(fail("x must be finite and non-negative"));
            }
            let delta: u8 = record[3 + strata_dim + w_dim]
                .trim()
                .parse()
                .map_err(|_| fail("delta must be 0 or 1"))?;
            if delta > 1 {
                return Err(fail("delta must be 0 or 1"));
            }
            trial.strata.push(label);
            trial.arm.push(arm);
            trial.time.push(time);
            trial.event.push(delta);
        }
        Ok(trial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;

    #[test]
    fn exponential_median_identities() {
        // Median of Exp(rate log2/12) is 12; doubling the hazard halves it.
        let t = sample_exp_cox_time(DEFAULT_LAMBDA0, 0.0, 0.5).unwrap();
        assert!((t - 12.0).abs() < 1e-12);
        let t = sample_exp_cox_time(DEFAULT_LAMBDA0, std::f64::consts::LN_2, 0.5).unwrap();
        assert!((t - 6.0).abs() < 1e-12);
        assert!(sample_exp_cox_time(DEFAULT_LAMBDA0, 0.0, 0.0).is_err());
        assert!(sample_exp_cox_time(DEFAULT_LAMBDA0, 0.0, 1.0).is_err());
        assert!(sample_exp_cox_time(-1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn exponential_mean_against_analytic() {
        let mut rng = derive_rng(1, &[1]);
        let eta = 1.5;
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_exp_cox_time(DEFAULT_LAMBDA0, eta, unit_open(&mut rng)).unwrap();
        }
        let mean = sum / n as f64;
        let analytic = 1.0 / (DEFAULT_LAMBDA0 * eta.exp());
        // Exponential sd equals its mean.
        let se = analytic / (n as f64).sqrt();
        assert!(
            (mean - analytic).abs() < 3.0 * se,
            "mean {mean} vs {analytic}"
        );
    }

    #[test]
    fn null_effect_couples_potential_outcomes() {
        let mut rng = derive_rng(2, &[1]);
        let spec = CaseSpec::new(1, 0.0, 500);
        for subject in gen_case(&spec, &mut rng).unwrap() {
            assert_eq!(subject.event_times[0], subject.event_times[1]);
        }
        let mut rng = derive_rng(2, &[2]);
        let spec = CaseSpec::new(6, 0.0, 500);
        for subject in gen_case(&spec, &mut rng).unwrap() {
            assert_eq!(subject.event_times[0], subject.event_times[1]);
        }
    }

    #[test]
    fn case1_event_law_matches_exponential_cdf() {
        let mut rng = derive_rng(3, &[1]);
        let spec = CaseSpec::new(1, 0.0, 100_000);
        let subjects = gen_case(&spec, &mut rng).unwrap();
        for z in [0u8, 1u8] {
            let group: Vec<&Subject> = subjects.iter().filter(|s| s.strata[0] == z).collect();
            let rate = DEFAULT_LAMBDA0 * (1.5 * f64::from(z)).exp();
            let p = 1.0 - (-rate * 20.0).exp();
            let hits = group
                .iter()
                .filter(|s| s.event_times[0] < 20.0)
                .count() as f64;
            let n = group.len() as f64;
            let se = (p * (1.0 - p) / n).sqrt();
            assert!(
                (hits / n - p).abs() < 4.0 * se,
                "z={z}: {} vs {p}",
                hits / n
            );
        }
    }

    #[test]
    fn case5_censoring_degenerates_at_ten() {
        let mut rng = derive_rng(4, &[1]);
        let spec = CaseSpec::new(5, 0.0, 2000);
        for subject in gen_case(&spec, &mut rng).unwrap() {
            if subject.strata[0] == 0 {
                assert_eq!(subject.censor_time, 10.0);
            } else {
                assert!(subject.censor_time >= 10.0);
            }
        }
    }

    #[test]
    fn discretize_boundaries() {
        assert_eq!(discretize_normal(-0.5, 2), 1);
        assert_eq!(discretize_normal(0.5, 2), 2);
        // 0 is the median boundary; right-closed intervals put it below.
        assert_eq!(discretize_normal(0.0, 4), 2);
        assert_eq!(discretize_normal(-100.0, 8), 1);
        assert_eq!(discretize_normal(100.0, 8), 8);
    }

    #[test]
    fn discretize_frequencies_are_equal() {
        let mut rng = derive_rng(5, &[1]);
        let n = 200_000;
        let k = 8u8;
        let mut counts = vec![0usize; k as usize];
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            counts[usize::from(discretize_normal(z, k)) - 1] += 1;
        }
        let p = 1.0 / f64::from(k);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        for (j, &c) in counts.iter().enumerate() {
            let freq = c as f64 / n as f64;
            assert!((freq - p).abs() < 4.0 * se, "level {}: {freq}", j + 1);
        }
    }

    #[test]
    fn observe_handles_censoring_and_ties() {
        let subject = Subject {
            strata: vec![0],
            w: vec![0.0],
            event_times: [5.0, 10.0],
            censor_time: 10.0,
            control_hazard: ControlHazard::Constant(1.0),
        };
        assert_eq!(observe(&subject, 0), (5.0, 1));
        // Event at exactly the censoring time counts as an event.
        assert_eq!(observe(&subject, 1), (10.0, 1));
        let censored = Subject {
            censor_time: 4.0,
            ..subject
        };
        assert_eq!(observe(&censored, 0), (4.0, 0));
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = derive_rng(6, &[1]);
        let spec = CaseSpec::new(2, 0.3, 50);
        let subjects = gen_case(&spec, &mut rng).unwrap();
        let arms: Vec<u8> = (0..50).map(|i| (i % 2) as u8).collect();
        let trial = ObservedTrial::from_assignments(&subjects, &arms);
        let mut buffer = Vec::new();
        trial.write_csv(&mut buffer).unwrap();
        let back = ObservedTrial::read_csv(buffer.as_slice()).unwrap();
        assert_eq!(trial, back);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(ObservedTrial::read_csv(&b"nonsense"[..]).is_err());
        assert!(ObservedTrial::read_csv(&b"id,q1,I,x,delta\n1,0,1,2.0,1\n"[..]).is_err());
        assert!(
            ObservedTrial::read_csv(&b"id,z1,I,x,delta\n1,0,7,2.0,1\n"[..]).is_err(),
            "arm out of range"
        );
        assert!(
            ObservedTrial::read_csv(&b"id,z1,I,x,delta\n1,0,1,-3.0,1\n"[..]).is_err(),
            "negative time"
        );
        assert!(ObservedTrial::read_csv(&b"id,z1,I,x,delta\n1,0,1,nan,1\n"[..]).is_err());
    }

    #[test]
    fn invalid_case_is_rejected() {
        let mut rng = derive_rng(7, &[1]);
        assert!(gen_case(&CaseSpec::new(7, 0.0, 10), &mut rng).is_err());
        assert!(gen_case(&CaseSpec::new(0, 0.0, 10), &mut rng).is_err());
        let mut bad = CaseSpec::new(1, 0.0, 10);
        bad.n = 1;
        assert!(gen_case(&bad, &mut rng).is_err());
    }
}
