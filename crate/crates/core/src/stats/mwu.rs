//! Two-sided Mann-Whitney U test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest smaller-sample size for which the exact null distribution is used.
pub const EXACT_MAX: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U of the first sample: pairs `(a_i, b_j)` with `a_i > b_j`, ties counted half.
    pub u_a: f64,
    pub u_b: f64,
    pub p: f64,
    pub method: PMethod,
}

/// Midranks (1-based) of the pooled values, and the tie group sizes.
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Number of rank assignments giving each value of U, for sample sizes
/// `n` and `m` without ties: the coefficients of the Gaussian binomial
/// `[n + m choose n]_q`.
pub fn exact_u_counts(n: usize, m: usize) -> Vec<u128> {
    let degree = n * m;
    let mut poly = vec![0i128; degree + 1];
    poly[0] = 1;
    for i in 1..=n {
        // multiply by (1 - q^(m+i))
        let shift = m + i;
        for u in (shift..=degree).rev() {
            poly[u] -= poly[u - shift];
        }
        // divide by (1 - q^i)
        for u in i..=degree {
            poly[u] += poly[u - i];
        }
    }
    poly.into_iter().map(|c| c as u128).collect()
}

fn exact_p(u: f64, n: usize, m: usize) -> f64 {
    let counts = exact_u_counts(n, m);
    let total: u128 = counts.iter().sum();
    // U is an integer without ties.
    let u = u.round() as usize;
    let lower: u128 = counts[..=u].iter().sum();
    let upper: u128 = counts[u..].iter().sum();
    let tail = lower.min(upper) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}

fn normal_p(u: f64, n: usize, m: usize, ties: &[usize]) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let total = nf + mf;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    let var = nf * mf / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if !(var > 0.0) {
        return 1.0;
    }
    let z = ((u - nf * mf / 2.0).abs() - 0.5) / var.sqrt();
    libm::erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-tailed test of `a` against `b`.
///
/// Exact when the smaller sample has at most [`EXACT_MAX`] values and there
/// are no ties; otherwise the normal approximation with tie-corrected
/// variance and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let (n, m) = (a.len(), b.len());
    if n < 2 || m < 2 {
        return Err(Error::degenerate(format!(
            "samples of size {n} and {m}; both need at least 2 values"
        )));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN in sample"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n].iter().sum();
    let u_a = rank_sum_a - (n * (n + 1)) as f64 / 2.0;
    let u_b = (n * m) as f64 - u_a;
    let (p, method) = if n.min(m) <= EXACT_MAX && ties.is_empty() {
        (exact_p(u_a, n, m), PMethod::Exact)
    } else {
        (normal_p(u_a, n, m, &ties), PMethod::Normal)
    };
    Ok(MannWhitney {
        u_a,
        u_b,
        p,
        method,
    })
}
