//! Exhaustive references for small systems.

use thiserror::Error;

use crate::slas::SlasWorkspace;

/// Largest `Nt` [`ml_bruteforce`] will enumerate.
pub const MAX_ENUMERATION_NT: usize = 20;

/// Relative gap under which two accumulated likelihoods count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("exhaustive search over 2^{nt} candidates refused (limit is Nt <= {limit})")]
    TooLarge { nt: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlResult {
    pub b_star: Vec<f64>,
    pub lambda_star: f64,
    pub enumerated: u64,
}

fn lexicographically_smaller(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Global maximizer of the likelihood over `{±1}^Nt`.
///
/// Candidates are visited in Gray-code order so each step flips one bit and
/// updates Λ and the gradient in O(Nt). Ties, up to [`TIE_TOLERANCE`] of
/// accumulated round-off, go to the lexicographically smallest vector,
/// ordering −1 before +1.
pub fn ml_bruteforce(ws: &SlasWorkspace) -> Result<MlResult, OracleError> {
    let nt = ws.nt();
    if nt > MAX_ENUMERATION_NT {
        return Err(OracleError::TooLarge {
            nt,
            limit: MAX_ENUMERATION_NT,
        });
    }
    let h_real = ws.h_real();
    let mut b = vec![-1.0; nt];
    let mut g = ws.gradient_full(&b);
    let mut lambda = ws.likelihood(&b);
    let mut best = b.clone();
    let mut best_lambda = lambda;

    let total = 1u64 << nt;
    for k in 1..total {
        let j = k.trailing_zeros() as usize;
        lambda += ws.flip_delta(&b, &g, j);
        let scale = 2.0 * b[j];
        for (gi, hij) in g.iter_mut().zip(h_real.row(j)) {
            *gi += scale * hij;
        }
        b[j] = -b[j];
        let tol = TIE_TOLERANCE * (1.0 + best_lambda.abs());
        if lambda > best_lambda + tol || ((lambda - best_lambda).abs() <= tol && lexicographically_smaller(&b, &best)) {
            best_lambda = lambda;
            best.copy_from_slice(&b);
        }
    }

    Ok(MlResult {
        // report the exact value rather than the accumulated one
        lambda_star: ws.likelihood(&best),
        b_star: best,
        enumerated: total,
    })
}

/// True when no single-bit flip strictly increases Λ.
pub fn is_local_optimum(ws: &SlasWorkspace, b: &[f64]) -> bool {
    let g = ws.gradient_full(b);
    (0..ws.nt()).all(|j| ws.flip_delta(b, &g, j) <= 0.0)
}
