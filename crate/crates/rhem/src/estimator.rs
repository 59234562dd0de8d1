//! Maximum partial-likelihood estimation.
//!
//! Each stratum holds one case and its control receiver sets; the log
//! partial likelihood is the sum over strata of the case score minus the
//! log-sum-exp of all row scores. This is a stratified conditional logit
//! with exactly one case per stratum, maximized by Newton-Raphson with
//! step-halving and an optional ridge fallback on the information matrix.
//!
//! Per-stratum terms accumulate blockwise with a fixed reduction order, so
//! results are bit-stable across thread counts.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::comb::{binomial_saturating, for_each_combination};
use crate::covariates::CovariateSet;
use crate::error::{Error, Result};
use crate::history::{DecayConfig, HistoryState};
use crate::io::SampleTable;
use crate::model::{AttributeTable, EventStream};
use crate::sampler::{sample_stream, SampledStratum, SamplerConfig};

/// Strata processed per accumulation block.
const BLOCK: usize = 256;

/// One stratum: row-major covariate rows, the case first.
#[derive(Debug, Clone)]
struct Stratum {
    rows: Vec<f64>,
    n_rows: usize,
}

/// Covariate rows of every stratum, ready for likelihood evaluation.
#[derive(Debug, Clone)]
pub struct EstimationProblem {
    names: Vec<String>,
    dim: usize,
    strata: Vec<Stratum>,
}

impl EstimationProblem {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_strata(&self) -> usize {
        self.strata.len()
    }

    pub fn n_rows(&self) -> usize {
        self.strata.iter().map(|s| s.n_rows).sum()
    }

    /// Builds a problem from sampled strata (case row first in each).
    pub fn from_sampled(strata: &[SampledStratum], names: Vec<String>) -> Result<Self> {
        if strata.is_empty() {
            return Err(Error::EmptyStream);
        }
        let dim = names.len();
        let mut out = Vec::with_capacity(strata.len());
        for s in strata {
            let mut rows = Vec::with_capacity(s.rows.len() * dim);
            for row in &s.rows {
                if row.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
                }
                rows.extend_from_slice(row);
            }
            out.push(Stratum { rows, n_rows: s.rows.len() });
        }
        Ok(Self { names, dim, strata: out })
    }

    /// Builds a problem from a parsed sample CSV. Rows are grouped by their
    /// stratum id; each stratum must contain exactly one case row, which is
    /// moved to the front.
    pub fn from_sample_table(table: &SampleTable) -> Result<Self> {
        if table.rows.is_empty() {
            return Err(Error::EmptyStream);
        }
        let dim = table.covariate_names.len();
        use std::collections::BTreeMap;
        let mut groups: BTreeMap<u64, (Vec<f64>, usize, usize)> = BTreeMap::new();
        for row in &table.rows {
            if row.covariates.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.covariates.len() });
            }
            let entry = groups.entry(row.stratum).or_insert((Vec::new(), 0, 0));
            if row.is_case {
                entry.2 += 1;
                // case goes to the front
                let mut rows = Vec::with_capacity(entry.0.len() + dim);
                rows.extend_from_slice(&row.covariates);
                rows.extend_from_slice(&entry.0);
                entry.0 = rows;
            } else {
                entry.0.extend_from_slice(&row.covariates);
            }
            entry.1 += 1;
        }
        let mut strata = Vec::with_capacity(groups.len());
        for (id, (rows, n_rows, n_cases)) in groups {
            if n_cases != 1 {
                return Err(Error::InvalidConfig(format!(
                    "stratum {id} has {n_cases} case rows, expected exactly 1"
                )));
            }
            strata.push(Stratum { rows, n_rows });
        }
        Ok(Self {
            names: table.covariate_names.clone(),
            dim,
            strata,
        })
    }

    /// Sub-problem restricted to the given covariate columns.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let names = columns.iter().map(|&c| self.names[c].clone()).collect();
        let strata = self
            .strata
            .iter()
            .map(|s| {
                let mut rows = Vec::with_capacity(s.n_rows * columns.len());
                for r in 0..s.n_rows {
                    let base = r * self.dim;
                    for &c in columns {
                        rows.push(s.rows[base + c]);
                    }
                }
                Stratum { rows, n_rows: s.n_rows }
            })
            .collect();
        Self { names, dim: columns.len(), strata }
    }

    /// Log likelihood of the model with no covariates.
    pub fn null_loglik(&self) -> f64 {
        accumulate_blocks(&self.strata, |block, acc: &mut f64| {
            for s in block {
                *acc -= (s.n_rows as f64).ln();
            }
        })
    }

    /// Covariates that vary within at least one stratum. Constant-in-every-
    /// stratum covariates (e.g. functions of the sender alone) cancel from
    /// the conditional likelihood and are non-identifiable.
    pub fn identifiable(&self) -> Vec<bool> {
        let mut varies = vec![false; self.dim];
        for s in &self.strata {
            for d in 0..self.dim {
                if varies[d] {
                    continue;
                }
                let first = s.rows[d];
                for r in 1..s.n_rows {
                    if s.rows[r * self.dim + d] != first {
                        varies[d] = true;
                        break;
                    }
                }
            }
            if varies.iter().all(|&v| v) {
                break;
            }
        }
        varies
    }
}

/// Blockwise map-reduce over strata with a fixed fold order.
fn accumulate_blocks<T, F>(strata: &[Stratum], f: F) -> T
where
    T: Default + Send + std::ops::AddAssign,
    F: Fn(&[Stratum], &mut T) + Sync,
{
    let partials: Vec<T> = strata
        .par_chunks(BLOCK)
        .map(|block| {
            let mut acc = T::default();
            f(block, &mut acc);
            acc
        })
        .collect();
    let mut total = T::default();
    for p in partials {
        total += p;
    }
    total
}

#[derive(Default)]
struct ScoreAcc {
    ll: f64,
    grad: Vec<f64>,
    neg_hess: Vec<f64>,
}

impl std::ops::AddAssign for ScoreAcc {
    fn add_assign(&mut self, rhs: Self) {
        self.ll += rhs.ll;
        if self.grad.is_empty() {
            self.grad = rhs.grad;
            self.neg_hess = rhs.neg_hess;
        } else {
            for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
                *a += b;
            }
            for (a, b) in self.neg_hess.iter_mut().zip(&rhs.neg_hess) {
                *a += b;
            }
        }
    }
}

fn stratum_scores(s: &Stratum, beta: &[f64], scores: &mut Vec<f64>) -> (f64, f64) {
    let dim = beta.len();
    scores.clear();
    let mut max = f64::NEG_INFINITY;
    for r in 0..s.n_rows {
        let base = r * dim;
        let mut v = 0.0;
        for (d, b) in beta.iter().enumerate() {
            v += b * s.rows[base + d];
        }
        scores.push(v);
        if v > max {
            max = v;
        }
    }
    let z: f64 = scores.iter().map(|&v| (v - max).exp()).sum();
    (max, z)
}

fn check_dim(problem: &EstimationProblem, beta: &[f64]) -> Result<()> {
    if beta.len() != problem.dim {
        return Err(Error::DimensionMismatch { expected: problem.dim, got: beta.len() });
    }
    Ok(())
}

/// Sampled log partial likelihood at `beta` (log-sum-exp stabilized).
pub fn loglik(problem: &EstimationProblem, beta: &[f64]) -> Result<f64> {
    check_dim(problem, beta)?;
    Ok(accumulate_blocks(&problem.strata, |block, acc: &mut f64| {
        let mut scores = Vec::new();
        for s in block {
            let (max, z) = stratum_scores(s, beta, &mut scores);
            *acc += scores[0] - max - z.ln();
        }
    }))
}

/// Score vector: sum over strata of (case covariates - expected covariates).
pub fn gradient(problem: &EstimationProblem, beta: &[f64]) -> Result<Vec<f64>> {
    Ok(scores_at(problem, beta)?.1)
}

/// Hessian of the log likelihood (negative semidefinite), dense row-major.
pub fn hessian(problem: &EstimationProblem, beta: &[f64]) -> Result<Vec<f64>> {
    let (_, _, mut neg) = scores_at_full(problem, beta)?;
    for v in &mut neg {
        *v = -*v;
    }
    Ok(neg)
}

fn scores_at(problem: &EstimationProblem, beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (ll, g, _) = scores_at_full(problem, beta)?;
    Ok((ll, g))
}

/// One pass computing (loglik, gradient, negative Hessian).
fn scores_at_full(problem: &EstimationProblem, beta: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    check_dim(problem, beta)?;
    let dim = problem.dim;
    let acc = accumulate_blocks(&problem.strata, |block, acc: &mut ScoreAcc| {
        if acc.grad.is_empty() {
            acc.grad = vec![0.0; dim];
            acc.neg_hess = vec![0.0; dim * dim];
        }
        let mut scores = Vec::new();
        let mut mu = vec![0.0; dim];
        let mut centered = vec![0.0; dim];
        for s in block {
            let (max, z) = stratum_scores(s, beta, &mut scores);
            acc.ll += scores[0] - max - z.ln();
            mu.iter_mut().for_each(|m| *m = 0.0);
            for r in 0..s.n_rows {
                let w = (scores[r] - max).exp() / z;
                let base = r * dim;
                for d in 0..dim {
                    mu[d] += w * s.rows[base + d];
                }
            }
            for d in 0..dim {
                acc.grad[d] += s.rows[d] - mu[d];
            }
            for r in 0..s.n_rows {
                let w = (scores[r] - max).exp() / z;
                let base = r * dim;
                for d in 0..dim {
                    centered[d] = s.rows[base + d] - mu[d];
                }
                for d in 0..dim {
                    let wd = w * centered[d];
                    for e in 0..=d {
                        acc.neg_hess[d * dim + e] += wd * centered[e];
                    }
                }
            }
        }
    });
    let mut neg_hess = acc.neg_hess;
    if neg_hess.is_empty() {
        neg_hess = vec![0.0; dim * dim];
    }
    let mut grad = acc.grad;
    if grad.is_empty() {
        grad = vec![0.0; dim];
    }
    // mirror the lower triangle
    for d in 0..dim {
        for e in d + 1..dim {
            neg_hess[d * dim + e] = neg_hess[e * dim + d];
        }
    }
    Ok((acc.ll, grad, neg_hess))
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Convergence: max |gradient| below this (together with a small Newton
    /// step — under separation the gradient vanishes while the step stays
    /// large, and that must keep iterating until the bound check fires).
    pub tol: f64,
    /// Convergence: |loglik change| / |loglik| below this.
    pub rel_tol: f64,
    /// Newton-step co-criterion for gradient convergence.
    pub step_tol: f64,
    pub max_iter: usize,
    /// Ridge added to the information matrix when it is not positive
    /// definite; reported in the result when used.
    pub ridge: f64,
    /// |beta_j| beyond this with a non-vanishing outward gradient is treated
    /// as separation (unbounded likelihood).
    pub separation_bound: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            rel_tol: 1e-10,
            step_tol: 1e-4,
            max_iter: 100,
            ridge: 1e-8,
            separation_bound: 50.0,
        }
    }
}

/// Coefficients, uncertainty, and fit diagnostics.
#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub std_err: Vec<f64>,
    pub z_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub loglik: f64,
    pub loglik_null: f64,
    pub aic: f64,
    pub bic: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Ridge that was added to the information matrix, if any was needed.
    pub ridge_used: Option<f64>,
    pub n_strata: usize,
    pub n_rows: usize,
}

fn solve_spd(neg_hess: &[f64], rhs: &[f64], dim: usize, ridge: f64) -> Option<Vec<f64>> {
    let mut m = DMatrix::from_row_slice(dim, dim, neg_hess);
    for d in 0..dim {
        m[(d, d)] += ridge;
    }
    let chol = m.cholesky()?;
    let sol = chol.solve(&DVector::from_column_slice(rhs));
    Some(sol.iter().copied().collect())
}

fn invert_spd(neg_hess: &[f64], dim: usize, ridge: f64) -> Option<DMatrix<f64>> {
    let mut m = DMatrix::from_row_slice(dim, dim, neg_hess);
    for d in 0..dim {
        m[(d, d)] += ridge;
    }
    Some(m.cholesky()?.inverse())
}

/// Newton-Raphson maximization of the sampled log partial likelihood.
pub fn fit(problem: &EstimationProblem, options: &FitOptions) -> Result<EstimationResult> {
    let dim = problem.dim;
    if dim == 0 {
        return Err(Error::InvalidConfig("cannot fit a model with no covariates".into()));
    }
    for (d, ok) in problem.identifiable().iter().enumerate() {
        if !ok {
            return Err(Error::NonIdentifiable { name: problem.names[d].clone() });
        }
    }

    let mut beta = vec![0.0; dim];
    let mut ridge_used: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;
    let (mut ll, mut grad, mut neg_hess) = scores_at_full(problem, &beta)?;
    let loglik_null = ll; // beta starts at zero

    while iterations < options.max_iter {
        iterations += 1;

        // A coefficient beyond the bound with the gradient still pointing
        // outward means the maximum lies at infinity.
        for (d, b) in beta.iter().enumerate() {
            if b.abs() > options.separation_bound && grad[d] * b.signum() > 0.0 {
                return Err(Error::Separation { index: d, bound: options.separation_bound });
            }
        }

        let delta = match solve_spd(&neg_hess, &grad, dim, 0.0) {
            Some(d) => d,
            None => {
                ridge_used = Some(options.ridge);
                solve_spd(&neg_hess, &grad, dim, options.ridge)
                    .ok_or(Error::SingularInformation { ridge: options.ridge })?
            }
        };

        let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let step_norm = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if grad_norm < options.tol && step_norm < options.step_tol {
            converged = true;
            break;
        }

        // step halving against overshoot
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=30 {
            let candidate: Vec<f64> = beta
                .iter()
                .zip(&delta)
                .map(|(b, d)| b + step * d)
                .collect();
            let (ll_new, g_new, h_new) = scores_at_full(problem, &candidate)?;
            if ll_new.is_finite() && ll_new >= ll {
                let rel_change = (ll_new - ll).abs() / ll.abs().max(f64::MIN_POSITIVE);
                beta = candidate;
                grad = g_new;
                neg_hess = h_new;
                // the likelihood's supremum is 0 (one case per stratum);
                // reaching it numerically is perfect prediction, not
                // convergence — keep iterating until the bound check fires
                let done = rel_change < options.rel_tol && ll_new < 0.0;
                ll = ll_new;
                accepted = true;
                if done {
                    converged = true;
                }
                break;
            }
            step /= 2.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // no uphill step found: either we are at the maximum or stuck
            let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            if grad_norm < options.tol.max(1e-6) {
                converged = true;
                break;
            }
            return Err(Error::MaxIterations { max_iter: options.max_iter, grad_norm });
        }
    }

    if !converged {
        let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        return Err(Error::MaxIterations { max_iter: options.max_iter, grad_norm });
    }

    // loglik <= 0 with supremum 0; reaching 0 numerically means every case
    // is predicted with probability one, i.e. the maximizer is at infinity
    if ll >= 0.0 {
        let worst = beta
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(d, _)| d)
            .unwrap_or(0);
        return Err(Error::Separation { index: worst, bound: options.separation_bound });
    }

    let inverse = match invert_spd(&neg_hess, dim, 0.0) {
        Some(inv) => inv,
        None => {
            ridge_used = Some(options.ridge);
            invert_spd(&neg_hess, dim, options.ridge)
                .ok_or(Error::SingularInformation { ridge: options.ridge })?
        }
    };
    let std_err: Vec<f64> = (0..dim).map(|d| inverse[(d, d)].sqrt()).collect();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let z_values: Vec<f64> = beta.iter().zip(&std_err).map(|(b, s)| b / s).collect();
    let p_values: Vec<f64> = z_values.iter().map(|z| 2.0 * (1.0 - normal.cdf(z.abs()))).collect();

    let n_strata = problem.n_strata();
    let k = dim as f64;
    Ok(EstimationResult {
        names: problem.names.clone(),
        beta,
        std_err,
        z_values,
        p_values,
        loglik: ll,
        loglik_null,
        aic: 2.0 * k - 2.0 * ll,
        bic: k * (n_strata as f64).ln() - 2.0 * ll,
        iterations,
        converged,
        ridge_used,
        n_strata,
        n_rows: problem.n_rows(),
    })
}

/// Enumeration cap for full risk sets.
pub const FULL_RISK_SET_CAP: u64 = 10_000;

/// Builds the exact-likelihood problem by enumerating, for every event, all
/// same-size receiver sets from the sender's eligible universe.
pub fn full_risk_set_problem(
    stream: &EventStream,
    attrs: &AttributeTable,
    covariates: &CovariateSet,
    decay: DecayConfig,
    max_order: usize,
) -> Result<EstimationProblem> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut hist = HistoryState::new(decay, max_order)?;
    let mut strata = Vec::with_capacity(stream.len());
    for event in stream.events() {
        let eligible = stream.eligible(event.sender);
        let size = event.size();
        let n_sets = binomial_saturating(eligible.len() as u64, size as u64);
        if n_sets > FULL_RISK_SET_CAP {
            return Err(Error::RiskSetTooLarge { size: n_sets, cap: FULL_RISK_SET_CAP });
        }
        let mut sets: Vec<Vec<u32>> = Vec::with_capacity(n_sets as usize);
        for_each_combination(&eligible, size, |subset| {
            if subset != event.receivers.as_slice() {
                sets.push(subset.to_vec());
            }
        });
        let rows: Result<Vec<Vec<f64>>> = std::iter::once(event.receivers.clone())
            .chain(sets)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|receivers| covariates.evaluate_vec(event.sender, receivers, event.time, attrs, &hist))
            .collect();
        let rows = rows?;
        let n_rows = rows.len();
        let mut flat = Vec::with_capacity(n_rows * covariates.len());
        for r in rows {
            flat.extend_from_slice(&r);
        }
        strata.push(Stratum { rows: flat, n_rows });
        hist.advance(event)?;
    }
    Ok(EstimationProblem {
        names: covariates.names().to_vec(),
        dim: covariates.len(),
        strata,
    })
}

/// Per-covariate log-likelihood contributions.
#[derive(Debug, Clone)]
pub struct ContributionRow {
    pub name: String,
    /// loglik(single-covariate model) - loglik(null model)
    pub over_null: f64,
    /// loglik(full model) - loglik(model without this covariate)
    pub in_full: f64,
}

#[derive(Debug, Clone)]
pub struct ContributionReport {
    pub loglik_null: f64,
    pub loglik_full: f64,
    /// Sorted by `over_null`, descending.
    pub rows: Vec<ContributionRow>,
}

/// Improvement in log likelihood from each covariate alone over the null
/// model, and from each covariate on top of all others.
///
/// Covariates that are constant within every stratum span a flat direction
/// of the likelihood; both improvements are exactly 0 for them and they are
/// excluded from the fitted full model.
pub fn contribution_report(problem: &EstimationProblem, options: &FitOptions) -> Result<ContributionReport> {
    let identifiable = problem.identifiable();
    let usable: Vec<usize> = (0..problem.dim).filter(|&d| identifiable[d]).collect();
    if usable.is_empty() {
        return Err(Error::InvalidConfig(
            "no identifiable covariates to report on".into(),
        ));
    }
    let loglik_null = problem.null_loglik();
    let full_problem = problem.select_columns(&usable);
    let loglik_full = fit(&full_problem, options)?.loglik;

    let mut rows = Vec::with_capacity(problem.dim);
    for d in 0..problem.dim {
        if !identifiable[d] {
            rows.push(ContributionRow {
                name: problem.names[d].clone(),
                over_null: 0.0,
                in_full: 0.0,
            });
            continue;
        }
        let single = fit(&problem.select_columns(&[d]), options)?.loglik;
        let without: Vec<usize> = usable.iter().copied().filter(|&c| c != d).collect();
        let in_full = if without.is_empty() {
            loglik_full - loglik_null
        } else {
            loglik_full - fit(&problem.select_columns(&without), options)?.loglik
        };
        rows.push(ContributionRow {
            name: problem.names[d].clone(),
            over_null: single - loglik_null,
            in_full,
        });
    }
    rows.sort_by(|a, b| b.over_null.total_cmp(&a.over_null));
    Ok(ContributionReport { loglik_null, loglik_full, rows })
}

/// Quantile probabilities reported by resampling studies.
pub const RESAMPLE_PROBS: [f64; 5] = [0.0, 0.025, 0.5, 0.975, 1.0];

#[derive(Debug, Clone)]
pub struct ResampleStudy {
    pub names: Vec<String>,
    pub probs: Vec<f64>,
    /// `quantiles[c][q]` = quantile `probs[q]` of covariate `c` over
    /// converged replications.
    pub quantiles: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
    pub n_converged: usize,
    /// (replication index, error message) of failed replications.
    pub failures: Vec<(usize, String)>,
}

/// Linear-interpolation sample quantile (R type 7) of sorted data.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Repeats sampling and estimation once per seed and summarizes coefficient
/// variation across replications. Failed replications are recorded, not
/// fatal, as long as at least one converges.
pub fn resample_study_with_seeds(
    stream: &EventStream,
    attrs: &AttributeTable,
    covariates: &CovariateSet,
    decay: DecayConfig,
    max_order: usize,
    sampler: &SamplerConfig,
    options: &FitOptions,
    seeds: &[u64],
) -> Result<ResampleStudy> {
    if seeds.len() < 2 {
        return Err(Error::InvalidConfig("a resampling study needs at least 2 replications".into()));
    }
    let mut estimates: Vec<Vec<f64>> = vec![Vec::new(); covariates.len()];
    let mut failures = Vec::new();
    for (rep, &seed) in seeds.iter().enumerate() {
        let cfg = SamplerConfig { k: sampler.k, seed };
        let run = sample_stream(stream, attrs, covariates, decay, max_order, &cfg)
            .and_then(|strata| EstimationProblem::from_sampled(&strata, covariates.names().to_vec()))
            .and_then(|problem| fit(&problem, options));
        match run {
            Ok(result) => {
                for (c, b) in result.beta.iter().enumerate() {
                    estimates[c].push(*b);
                }
            }
            Err(e) => failures.push((rep, e.to_string())),
        }
    }
    let n_converged = seeds.len() - failures.len();
    if n_converged == 0 {
        return Err(Error::MaxIterations { max_iter: options.max_iter, grad_norm: f64::NAN });
    }
    let quantiles = estimates
        .iter()
        .map(|values| {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            RESAMPLE_PROBS.iter().map(|&p| quantile_type7(&sorted, p)).collect()
        })
        .collect();
    Ok(ResampleStudy {
        names: covariates.names().to_vec(),
        probs: RESAMPLE_PROBS.to_vec(),
        quantiles,
        seeds: seeds.to_vec(),
        n_converged,
        failures,
    })
}

/// Replication seeds `base_seed + 0 .. base_seed + r - 1`.
pub fn resample_study(
    stream: &EventStream,
    attrs: &AttributeTable,
    covariates: &CovariateSet,
    decay: DecayConfig,
    max_order: usize,
    sampler: &SamplerConfig,
    options: &FitOptions,
    replications: usize,
) -> Result<ResampleStudy> {
    let seeds: Vec<u64> = (0..replications as u64).map(|r| sampler.seed.wrapping_add(r)).collect();
    resample_study_with_seeds(stream, attrs, covariates, decay, max_order, sampler, options, &seeds)
}
