//! Local causal discovery: triples `(C, X, Y)` with `C` not caused by `X`,
//! `C` dependent on `X`, `X` dependent on `Y`, and `C ⊥ Y | X`.

use rayon::prelude::*;

use super::{check_alpha, ci_test, CiTestResult, IndepError};
use crate::dataset::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub struct LcdTriple {
    pub context: String,
    pub x: String,
    pub y: String,
    pub context_x: CiTestResult,
    pub x_y: CiTestResult,
    pub context_y_given_x: CiTestResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcdOutcome {
    /// Found triples, sorted by `(x, y)`.
    pub triples: Vec<LcdTriple>,
    /// Ordered pairs whose tests failed, with the first error.
    pub skipped: Vec<(String, String, IndepError)>,
}

impl LcdOutcome {
    pub fn pairs(&self) -> Vec<(&str, &str)> {
        self.triples.iter().map(|t| (t.x.as_str(), t.y.as_str())).collect()
    }
}

/// Searches all ordered pairs of distinct `candidates` for LCD triples with context
/// column `context`, which the caller asserts is not caused by any candidate.
pub fn lcd(ds: &Dataset, context: &str, candidates: &[&str], alpha: f64) -> Result<LcdOutcome, IndepError> {
    check_alpha(alpha)?;
    if ds.column(context).is_none() {
        return Err(IndepError::UnknownColumn(context.to_string()));
    }
    let mut cands: Vec<&str> = candidates.to_vec();
    cands.sort_unstable();
    cands.dedup();
    if cands.contains(&context) {
        return Err(IndepError::RepeatedColumn(context.to_string()));
    }
    let pairs: Vec<(&str, &str)> = cands
        .iter()
        .flat_map(|&x| cands.iter().filter(move |&&y| y != x).map(move |&y| (x, y)))
        .collect();
    let results: Vec<Result<Option<LcdTriple>, IndepError>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let context_x = ci_test(ds, context, x, &[], alpha)?;
            let x_y = ci_test(ds, x, y, &[], alpha)?;
            let context_y_given_x = ci_test(ds, context, y, &[x], alpha)?;
            let found = !context_x.independent && !x_y.independent && context_y_given_x.independent;
            Ok(found.then(|| LcdTriple {
                context: context.to_string(),
                x: x.to_string(),
                y: y.to_string(),
                context_x,
                x_y,
                context_y_given_x,
            }))
        })
        .collect();
    let mut out = LcdOutcome { triples: Vec::new(), skipped: Vec::new() };
    for ((x, y), r) in pairs.into_iter().zip(results) {
        match r {
            Ok(Some(t)) => out.triples.push(t),
            Ok(None) => {}
            Err(e @ (IndepError::UnknownColumn(_) | IndepError::InvalidAlpha(_))) => return Err(e),
            Err(e) => out.skipped.push((x.to_string(), y.to_string(), e)),
        }
    }
    Ok(out)
}
