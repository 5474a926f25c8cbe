use crate::{simple_paths, OracleError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub struct LpResult {
    pub value: BigRational,
    pub x: Vec<BigRational>,
    /// Optimal dual prices, one per row.
    pub y: Vec<BigRational>,
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Maximise `c.x` subject to `A x <= b`, `x >= 0`, with `b >= 0`.
/// Dense tableau simplex with Bland's rule over exact rationals.
/// Returns `None` when unbounded.
pub fn lp_max(c: &[BigRational], a: &[Vec<BigRational>], b: &[BigRational]) -> Option<LpResult> {
    let rows = a.len();
    let cols = c.len();
    let width = cols + rows + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(rows + 1);
    for i in 0..rows {
        assert!(!b[i].is_negative());
        let mut r = vec![BigRational::zero(); width];
        r[..cols].clone_from_slice(&a[i]);
        r[cols + i] = BigRational::one();
        r[width - 1] = b[i].clone();
        t.push(r);
    }
    let mut obj = vec![BigRational::zero(); width];
    for j in 0..cols {
        obj[j] = -c[j].clone();
    }
    t.push(obj);
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    loop {
        let Some(enter) = (0..width - 1).find(|&j| t[rows][j].is_negative()) else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..rows {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (pr, _) = leave?;
        let piv = t[pr][enter].clone();
        for v in t[pr].iter_mut() {
            *v = &*v / &piv;
        }
        let prow = t[pr].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == pr || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        basis[pr] = enter;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < cols {
            x[bv] = t[i][width - 1].clone();
        }
    }
    let y = (0..rows).map(|i| t[rows][cols + i].clone()).collect();
    Some(LpResult { value: t[rows][width - 1].clone(), x, y })
}

/// Maximum fractional multicommodity flow with unit edge capacities,
/// equal to the minimum fractional multicut. Column generation over the
/// enumerated simple paths of every pair.
pub fn frac_mcf(
    n: usize,
    edges: &[(usize, usize)],
    pairs: &[(usize, usize)],
    max_paths: usize,
) -> Result<BigRational, OracleError> {
    let mut pool: Vec<Vec<usize>> = Vec::new();
    for &(s, t) in pairs {
        if s == t {
            return Err(OracleError::LimitExceeded("pair with s = t has unbounded flow".into()));
        }
        pool.extend(simple_paths(n, edges, s, t, max_paths)?);
        if pool.len() > max_paths {
            return Err(OracleError::LimitExceeded(format!("more than {max_paths} paths")));
        }
    }
    let m = edges.len();
    if pool.is_empty() {
        return Ok(BigRational::zero());
    }
    let mut active: Vec<usize> = Vec::new();
    let mut in_active = vec![false; pool.len()];
    // seed with the shortest path of each pair
    let mut start = 0;
    for &(s, t) in pairs {
        let cnt = simple_paths(n, edges, s, t, max_paths)?.len();
        if let Some(best) = (start..start + cnt).min_by_key(|&i| (pool[i].len(), i)) {
            active.push(best);
            in_active[best] = true;
        }
        start += cnt;
    }
    loop {
        let c: Vec<BigRational> = vec![q(1); active.len()];
        let a: Vec<Vec<BigRational>> = (0..m)
            .map(|e| {
                active
                    .iter()
                    .map(|&p| if pool[p].contains(&e) { q(1) } else { q(0) })
                    .collect()
            })
            .collect();
        let b = vec![q(1); m];
        let res = lp_max(&c, &a, &b).expect("bounded by edge capacities");
        let mut entering = None;
        for (i, p) in pool.iter().enumerate() {
            if in_active[i] {
                continue;
            }
            let price: BigRational = p.iter().fold(BigRational::zero(), |acc, &e| acc + &res.y[e]);
            if price < q(1) {
                entering = Some(i);
                break;
            }
        }
        match entering {
            Some(i) => {
                in_active[i] = true;
                active.push(i);
            }
            None => return Ok(res.value),
        }
    }
}
