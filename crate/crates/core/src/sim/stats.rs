//! Statistical verification on simulated ensembles: partial-correlation
//! conditional independence tests (Fisher z) and Granger-style local
//! independence tests (nested-model F test). Valid for linear-Gaussian
//! fixtures; functional tests on path space are out of scope.

use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::scalar::Real;

use super::{PathEnsemble, SimError};

#[derive(Debug, Error)]
pub enum StatError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("singular covariance matrix")]
    SingularCovariance,
    #[error("collinear regressors")]
    Collinear,
    #[error("{0}")]
    Invalid(String),
}

pub const DEFAULT_ALPHA: f64 = 0.01;

/// A process evaluated at a grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct Eval {
    pub process: String,
    pub time: f64,
}

impl Eval {
    pub fn new(process: impl Into<String>, time: f64) -> Self {
        Eval {
            process: process.into(),
            time,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CiOutcome {
    /// Largest |z| over the tested pairs.
    pub statistic: f64,
    /// Bonferroni-adjusted when several pairs are tested.
    pub p_value: f64,
    pub independent: bool,
    pub alpha: f64,
}

/// Partial correlation of every pair in `a x b` given `c`, Fisher
/// z-transformed. Samples are paths; each `Eval` is one column.
pub fn ci_test<F: Real>(
    ens: &PathEnsemble<F>,
    a: &[Eval],
    b: &[Eval],
    c: &[Eval],
    alpha: f64,
) -> Result<CiOutcome, StatError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatError::Invalid("a and b must be nonempty".into()));
    }
    let col = |e: &Eval| -> Result<Vec<f64>, StatError> {
        let p = ens.process_index(&e.process)?;
        let k = ens.time_index(e.time)?;
        Ok(ens.column(p, k).into_iter().map(|v| v.as_f64()).collect())
    };
    let cond: Vec<Vec<f64>> = c.iter().map(&col).collect::<Result<_, _>>()?;
    let n = ens.n_paths;
    if n < cond.len() + 5 {
        return Err(StatError::Invalid("not enough paths".into()));
    }

    let mut max_z = 0.0f64;
    let mut min_p = 1.0f64;
    let mut tested = 0usize;
    for ea in a {
        for eb in b {
            if ea.process == eb.process && ens.time_index(ea.time)? == ens.time_index(eb.time)? {
                // Shared variable: dependent by construction.
                max_z = f64::INFINITY;
                min_p = 0.0;
                tested += 1;
                continue;
            }
            let x = col(ea)?;
            let y = col(eb)?;
            let r = partial_correlation(&x, &y, &cond)?;
            let r = r.clamp(-0.999_999_999, 0.999_999_999);
            let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln()
                * ((n as f64) - (cond.len() as f64) - 3.0).sqrt();
            let p = erfc(z.abs() / std::f64::consts::SQRT_2);
            if z.abs() > max_z {
                max_z = z.abs();
            }
            if p < min_p {
                min_p = p;
            }
            tested += 1;
        }
    }
    let p_value = (min_p * tested as f64).min(1.0);
    Ok(CiOutcome {
        statistic: max_z,
        p_value,
        independent: p_value >= alpha,
        alpha,
    })
}

/// Partial correlation of `x` and `y` given conditioning columns, via the
/// precision matrix of the joint covariance.
fn partial_correlation(
    x: &[f64],
    y: &[f64],
    cond: &[Vec<f64>],
) -> Result<f64, StatError> {
    let m = 2 + cond.len();
    let n = x.len();
    let mut cols: Vec<&[f64]> = Vec::with_capacity(m);
    cols.push(x);
    cols.push(y);
    for c in cond {
        cols.push(c);
    }
    let means: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in i..m {
            let mut s = 0.0;
            for k in 0..n {
                s += (cols[i][k] - means[i]) * (cols[j][k] - means[j]);
            }
            let v = s / (n as f64 - 1.0);
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    let prec = invert_symmetric(&cov).ok_or(StatError::SingularCovariance)?;
    let denom = (prec[0][0] * prec[1][1]).sqrt();
    if !denom.is_finite() || denom == 0.0 {
        return Err(StatError::SingularCovariance);
    }
    Ok(-prec[0][1] / denom)
}

/// Gauss-Jordan with partial pivoting; `None` when singular.
fn invert_symmetric(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let d = m[col][col];
        for j in 0..n {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[row][j] -= f * m[col][j];
                inv[row][j] -= f * inv[col][j];
            }
        }
    }
    Some(inv)
}

#[derive(Debug, Clone)]
pub struct LiOutcome {
    pub holds: bool,
    pub f_statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// Number of regressors the `a`-block added beyond the restricted model.
    pub added: usize,
}

/// Granger-style local independence test: regress increments of each `b`
/// process on lagged values of `b ∪ c`, then additionally on lags of `a`,
/// and F-test the joint significance of the `a` block, pooling paths over a
/// fixed spread of time points. `holds` means the block is insignificant.
pub fn local_independence_test<F: Real>(
    ens: &PathEnsemble<F>,
    a: &[&str],
    b: &[&str],
    c: &[&str],
    lags: usize,
    alpha: f64,
) -> Result<LiOutcome, StatError> {
    if b.is_empty() {
        return Err(StatError::Invalid("target set must be nonempty".into()));
    }
    let lags = lags.max(1);
    let steps = ens.steps();
    if steps <= lags {
        return Err(StatError::Invalid("grid too short for the lag order".into()));
    }

    // Restricted regressor processes: b then c; full model appends the
    // members of a that were not already present.
    let mut restricted: Vec<usize> = Vec::new();
    for name in b.iter().chain(c.iter()) {
        let p = ens.process_index(name)?;
        if !restricted.contains(&p) {
            restricted.push(p);
        }
    }
    let mut added: Vec<usize> = Vec::new();
    for name in a {
        let p = ens.process_index(name)?;
        if !restricted.contains(&p) && !added.contains(&p) {
            added.push(p);
        }
    }

    // A fixed set of time points spread over the grid.
    let n_points = 6usize.min(steps - lags);
    let ks: Vec<usize> = (0..n_points)
        .map(|i| lags + i * (steps - lags) / n_points)
        .collect();

    let b_idx: Vec<usize> = b
        .iter()
        .map(|n| ens.process_index(n))
        .collect::<Result<_, _>>()?;

    let p_restricted = 1 + restricted.len() * lags;
    let p_full = p_restricted + added.len() * lags;
    let rows = ens.n_paths * ks.len() * b_idx.len();
    if rows <= p_full + 2 {
        return Err(StatError::Invalid("not enough samples".into()));
    }

    let mut xs: Vec<f64> = Vec::with_capacity(rows * p_full);
    let mut ys: Vec<f64> = Vec::with_capacity(rows);
    for &bp in &b_idx {
        for path in 0..ens.n_paths {
            for &k in &ks {
                ys.push((ens.value(bp, path, k + 1) - ens.value(bp, path, k)).as_f64());
                xs.push(1.0);
                for &p in restricted.iter().chain(added.iter()) {
                    for lag in 0..lags {
                        xs.push(ens.value(p, path, k - lag).as_f64());
                    }
                }
            }
        }
    }

    if added.is_empty() {
        return Ok(LiOutcome {
            holds: true,
            f_statistic: 0.0,
            p_value: 1.0,
            alpha,
            added: 0,
        });
    }

    let rss_full = ols_rss(&xs, &ys, p_full)?;
    // Restricted design: strip the trailing `added` columns.
    let mut xr: Vec<f64> = Vec::with_capacity(rows * p_restricted);
    for r in 0..rows {
        xr.extend_from_slice(&xs[r * p_full..r * p_full + p_restricted]);
    }
    let rss_restricted = ols_rss(&xr, &ys, p_restricted)?;

    let q = (p_full - p_restricted) as f64;
    let dof = (rows - p_full) as f64;
    let f_statistic = ((rss_restricted - rss_full).max(0.0) / q) / (rss_full / dof);
    let dist = FisherSnedecor::new(q, dof)
        .map_err(|e| StatError::Invalid(format!("F distribution: {e}")))?;
    let p_value = 1.0 - dist.cdf(f_statistic);
    Ok(LiOutcome {
        holds: p_value >= alpha,
        f_statistic,
        p_value,
        alpha,
        added: p_full - p_restricted,
    })
}

/// Residual sum of squares of OLS on a row-major design matrix.
fn ols_rss(xs: &[f64], ys: &[f64], p: usize) -> Result<f64, StatError> {
    let n = ys.len();
    let mut xtx = vec![vec![0.0f64; p]; p];
    let mut xty = vec![0.0f64; p];
    for r in 0..n {
        let row = &xs[r * p..(r + 1) * p];
        for i in 0..p {
            xty[i] += row[i] * ys[r];
            for j in i..p {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
    }
    let inv = invert_symmetric(&xtx).ok_or(StatError::Collinear)?;
    let beta: Vec<f64> = (0..p)
        .map(|i| (0..p).map(|j| inv[i][j] * xty[j]).sum())
        .collect();
    let mut rss = 0.0;
    for r in 0..n {
        let row = &xs[r * p..(r + 1) * p];
        let pred: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        let e = ys[r] - pred;
        rss += e * e;
    }
    Ok(rss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use crate::sim::{simulate, SimConfig};
    use crate::verify::fixtures;

    fn chain_ensemble(seed: u64, paths: usize) -> PathEnsemble<f64> {
        let sys = parse_model(fixtures::CHAIN3_MODEL).unwrap().system;
        simulate(&sys, &SimConfig::new(0.02, paths, seed)).unwrap()
    }

    #[test]
    fn shared_variable_is_dependent() {
        let ens = chain_ensemble(3, 3000);
        let out = ci_test(
            &ens,
            &[Eval::new("A", 0.5)],
            &[Eval::new("A", 0.5)],
            &[],
            DEFAULT_ALPHA,
        )
        .unwrap();
        assert!(!out.independent);
    }

    #[test]
    fn directly_coupled_pair_is_detected() {
        let ens = chain_ensemble(4, 5000);
        let out = ci_test(
            &ens,
            &[Eval::new("A", 0.4)],
            &[Eval::new("B", 0.8)],
            &[],
            DEFAULT_ALPHA,
        )
        .unwrap();
        assert!(!out.independent);
    }

    #[test]
    fn singular_covariance_is_an_error() {
        let ens = chain_ensemble(5, 500);
        // Conditioning on the tested variable itself zeroes the residual.
        let res = ci_test(
            &ens,
            &[Eval::new("A", 0.5)],
            &[Eval::new("B", 0.5)],
            &[Eval::new("A", 0.5)],
            DEFAULT_ALPHA,
        );
        assert!(matches!(res, Err(StatError::SingularCovariance)));
    }

    #[test]
    fn granger_blocks_behave_on_chain() {
        let ens = chain_ensemble(6, 4000);
        // A does not enter C's drift given B and C.
        let out = local_independence_test(&ens, &["A"], &["C"], &["B"], 2, DEFAULT_ALPHA).unwrap();
        assert!(out.holds, "p = {}", out.p_value);
        // B drives C.
        let out = local_independence_test(&ens, &["B"], &["C"], &[], 2, DEFAULT_ALPHA).unwrap();
        assert!(!out.holds);
        // Self-dependence is never certified: A = B duplicates columns and
        // adds nothing, which reads as a trivial hold.
        let out = local_independence_test(&ens, &["A"], &["A"], &[], 2, DEFAULT_ALPHA).unwrap();
        assert!(out.holds);
        assert_eq!(out.added, 0);
    }

    #[test]
    fn disconnected_source_holds() {
        let text = "system {
            exogenous T: time;
            exogenous W1: brownian;
            exogenous W2: brownian;
            process P { init = normal(0,1); alpha = {P}; beta = {T, W1}; g = [-0.5 * P, 0.8]; markov = true; }
            process Q { init = normal(0,1); alpha = {Q}; beta = {T, W2}; g = [-0.5 * Q, 0.8]; markov = true; }
            horizon 1;
        }";
        let sys = parse_model(text).unwrap().system;
        let ens: PathEnsemble<f64> = simulate(&sys, &SimConfig::new(0.02, 4000, 9)).unwrap();
        let out = local_independence_test(&ens, &["P"], &["Q"], &[], 2, DEFAULT_ALPHA).unwrap();
        assert!(out.holds, "p = {}", out.p_value);
    }
}
