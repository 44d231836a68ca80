//! Rank-correlation conditional independence tests, the LCD search and the data
//! side of adaptation detection.
//!
//! Correlations are Pearson correlations of mid-ranks. Partial correlations use the
//! recursive formula on the rank-correlation matrix; p-values come from the
//! t-approximation with `n - 2 - |Z|` degrees of freedom.

mod detect;
mod lcd;

pub use detect::{detect_adaptation_from_data, rank_sum_test, RankSumResult, MIN_SHIFT_SAMPLES};
pub use lcd::{lcd, LcdOutcome, LcdTriple};

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::separation::subsets;

/// Largest conditioning set tested unless configured otherwise.
pub const DEFAULT_MAX_COND: usize = 1;
/// Denominators below this make a partial correlation undefined.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndepError {
    #[error("vectors have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("constant input vector")]
    ConstantInput,
    #[error("non-finite input value")]
    NonFiniteInput,
    #[error("{n} samples, need at least {min}")]
    TooFewSamples { n: usize, min: usize },
    #[error("singular conditioning set")]
    SingularConditioning,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` appears more than once in a test")]
    RepeatedColumn(String),
    #[error("datasets have different columns")]
    ColumnMismatch,
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Outcome of one (conditional) independence test.
#[derive(Debug, Clone, PartialEq)]
pub struct CiTestResult {
    pub i: String,
    pub j: String,
    pub z: Vec<String>,
    pub rho: f64,
    pub p: f64,
    /// `p > alpha`.
    pub independent: bool,
}

/// Mid-ranks starting at 1; tied values share the average of their ranks.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let mid = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            r[k] = mid;
        }
        start = end;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn check_inputs(cols: &[&[f64]], min: usize) -> Result<(), IndepError> {
    let n = cols[0].len();
    for c in cols {
        if c.len() != n {
            return Err(IndepError::LengthMismatch(n, c.len()));
        }
    }
    if n < min {
        return Err(IndepError::TooFewSamples { n, min });
    }
    for c in cols {
        if c.iter().any(|v| !v.is_finite()) {
            return Err(IndepError::NonFiniteInput);
        }
        if c.iter().all(|&v| v == c[0]) {
            return Err(IndepError::ConstantInput);
        }
    }
    Ok(())
}

/// Two-sided p-value of correlation `rho` with `df` degrees of freedom.
fn t_test_p(rho: f64, df: usize) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let t = rho * (df as f64 / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Spearman rank correlation and its two-sided p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64), IndepError> {
    partial_rank_corr(x, y, &[])
}

/// Partial rank correlation of `x` and `y` given the columns `z`.
pub fn partial_rank_corr(x: &[f64], y: &[f64], z: &[&[f64]]) -> Result<(f64, f64), IndepError> {
    let cols: Vec<&[f64]> = [x, y].into_iter().chain(z.iter().copied()).collect();
    check_inputs(&cols, z.len() + 4)?;
    let rk: Vec<Vec<f64>> = cols.iter().map(|c| ranks(c)).collect();
    let k = rk.len();
    let mut r = vec![vec![1.0; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let v = pearson(&rk[a], &rk[b]);
            r[a][b] = v;
            r[b][a] = v;
        }
    }
    let given: Vec<usize> = (2..k).collect();
    let rho = partial(&r, 0, 1, &given)?;
    Ok((rho, t_test_p(rho, x.len() - 2 - z.len())))
}

/// `r_{ab . given}` by recursion on the last conditioning index.
fn partial(r: &[Vec<f64>], a: usize, b: usize, given: &[usize]) -> Result<f64, IndepError> {
    let Some((&c, rest)) = given.split_last() else {
        return Ok(r[a][b]);
    };
    let rab = partial(r, a, b, rest)?;
    let rac = partial(r, a, c, rest)?;
    let rbc = partial(r, b, c, rest)?;
    let den = ((1.0 - rac * rac) * (1.0 - rbc * rbc)).max(0.0).sqrt();
    if den < SINGULAR_TOL {
        return Err(IndepError::SingularConditioning);
    }
    Ok(((rab - rac * rbc) / den).clamp(-1.0, 1.0))
}

fn column<'a>(ds: &'a Dataset, name: &str) -> Result<&'a [f64], IndepError> {
    ds.column(name).ok_or_else(|| IndepError::UnknownColumn(name.to_string()))
}

fn check_alpha(alpha: f64) -> Result<(), IndepError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(IndepError::InvalidAlpha(alpha))
    }
}

/// Tests `i ⊥ j | z` on the columns of `ds` at level `alpha`.
pub fn ci_test(ds: &Dataset, i: &str, j: &str, z: &[&str], alpha: f64) -> Result<CiTestResult, IndepError> {
    check_alpha(alpha)?;
    let all: Vec<&str> = [i, j].into_iter().chain(z.iter().copied()).collect();
    for (k, name) in all.iter().enumerate() {
        if all[..k].contains(name) {
            return Err(IndepError::RepeatedColumn(name.to_string()));
        }
    }
    let x = column(ds, i)?;
    let y = column(ds, j)?;
    let zc = z.iter().map(|n| column(ds, n)).collect::<Result<Vec<_>, _>>()?;
    let (rho, p) = partial_rank_corr(x, y, &zc)?;
    Ok(CiTestResult {
        i: i.to_string(),
        j: j.to_string(),
        z: z.iter().map(|s| s.to_string()).collect(),
        rho,
        p,
        independent: p > alpha,
    })
}

/// Tests every pair of `columns` (in list order) given every subset of the other
/// columns with at most `max_cond` elements, smallest sets first.
pub fn independence_table(
    ds: &Dataset,
    columns: &[&str],
    max_cond: usize,
    alpha: f64,
) -> Result<Vec<CiTestResult>, IndepError> {
    let mut out = Vec::new();
    let idx: Vec<usize> = (0..columns.len()).collect();
    for size in 0..=max_cond.min(columns.len().saturating_sub(2)) {
        for a in 0..columns.len() {
            for b in a + 1..columns.len() {
                let rest: Vec<usize> = idx.iter().copied().filter(|&k| k != a && k != b).collect();
                for given in subsets(&rest, size) {
                    let z: Vec<&str> = given.iter().map(|&k| columns[k]).collect();
                    out.push(ci_test(ds, columns[a], columns[b], &z, alpha)?);
                }
            }
        }
    }
    Ok(out)
}
