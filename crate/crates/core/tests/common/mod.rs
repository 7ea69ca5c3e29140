//! Shared test helpers: a brute-force LP oracle and instance tweaks.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stclear::lp::{LinearProgram, Sense};
use stclear::MarketInstance;

#[derive(Clone, Debug, PartialEq)]
pub enum Oracle {
    Optimal { objective: f64, x: Vec<f64> },
    Infeasible,
}

impl Oracle {
    pub fn objective(&self) -> Option<f64> {
        match self {
            Oracle::Optimal { objective, .. } => Some(*objective),
            Oracle::Infeasible => None,
        }
    }
}

#[derive(Clone, Copy)]
enum State {
    Lower,
    Upper,
    Basic,
    Zero,
}

fn options(lo: f64, hi: f64) -> Vec<State> {
    let mut v = vec![State::Basic];
    if lo.is_finite() {
        v.push(State::Lower);
    }
    if hi.is_finite() && hi != lo {
        v.push(State::Upper);
    }
    if !lo.is_finite() && !hi.is_finite() {
        v.push(State::Zero);
    }
    v
}

/// Best objective over every basic solution of `A·x = b, lo <= x <= hi`.
///
/// Each column is fixed at a finite bound (or zero when free) or left basic;
/// basic columns must be linearly independent and reproduce the residual
/// right hand side exactly. Only meaningful for bounded programs, and
/// exponential in the column count.
pub fn enumerate(lp: &LinearProgram) -> Oracle {
    let (m, n) = (lp.num_rows(), lp.num_cols());
    let dense = DMatrix::from_fn(m, n, |r, c| lp.coefficient(r, c));
    let b = DVector::from_column_slice(&lp.rhs);
    let choices: Vec<Vec<State>> = (0..n).map(|j| options(lp.lower[j], lp.upper[j])).collect();
    let mut pick = vec![0usize; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let better = |a: f64, b: f64| match lp.sense {
        Sense::Maximize => a > b,
        Sense::Minimize => a < b,
    };
    loop {
        let mut x = vec![0.0; n];
        let mut basic = Vec::new();
        for j in 0..n {
            match choices[j][pick[j]] {
                State::Lower => x[j] = lp.lower[j],
                State::Upper => x[j] = lp.upper[j],
                State::Zero => x[j] = 0.0,
                State::Basic => basic.push(j),
            }
        }
        if basic.len() <= m {
            if let Some(x) = complete(&dense, &b, &basic, x, lp) {
                let obj = lp.objective_value(&x);
                if best.as_ref().is_none_or(|(v, _)| better(obj, *v)) {
                    best = Some((obj, x));
                }
            }
        }
        // next combination
        let mut k = 0;
        while k < n {
            pick[k] += 1;
            if pick[k] < choices[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    match best {
        Some((objective, x)) => Oracle::Optimal { objective, x },
        None => Oracle::Infeasible,
    }
}

fn complete(a: &DMatrix<f64>, b: &DVector<f64>, basic: &[usize], mut x: Vec<f64>, lp: &LinearProgram) -> Option<Vec<f64>> {
    let fixed = DVector::from_column_slice(&x);
    let r = b - a * fixed;
    let scale = 1.0 + b.amax();
    if basic.is_empty() {
        return (r.amax() <= 1e-9 * scale).then_some(x);
    }
    let ab = a.select_columns(basic);
    // normal equations; the basic columns must be independent
    let gram = ab.transpose() * &ab;
    let lu = gram.clone().full_piv_lu();
    if lu.determinant().abs() <= 1e-9 * gram.amax().powi(basic.len() as i32) {
        return None;
    }
    let xb = lu.solve(&(ab.transpose() * &r))?;
    if (&ab * &xb - &r).amax() > 1e-9 * scale {
        return None;
    }
    for (k, &j) in basic.iter().enumerate() {
        let v = xb[k];
        let tol = 1e-9 * (1.0 + v.abs());
        if v < lp.lower[j] - tol || v > lp.upper[j] + tol {
            return None;
        }
        x[j] = v.clamp(lp.lower[j], lp.upper[j]);
    }
    Some(x)
}

/// A small bounded program. Most have a right hand side built from
/// a point inside the box, so they are feasible; the rest are random and
/// may not be.
pub fn random_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6);
    let m = rng.random_range(1..=4);
    let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut lp = LinearProgram::new(sense);
    let coeffs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| if rng.random_bool(0.4) { 0.0 } else { rng.random_range(-4..=4) as f64 })
                .collect()
        })
        .collect();
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let lo = rng.random_range(-2..=1) as f64;
            (lo, lo + rng.random_range(0..=5) as f64)
        })
        .collect();
    let feasible = rng.random_bool(0.7);
    let point: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
    for r in 0..m {
        let rhs = if feasible {
            (0..n).map(|j| coeffs[j][r] * point[j]).sum()
        } else {
            rng.random_range(-6..=6) as f64
        };
        lp.add_row(format!("r{r}"), rhs);
    }
    for j in 0..n {
        let entries: Vec<(usize, f64)> = (0..m).map(|r| (r, coeffs[j][r])).collect();
        let cost = rng.random_range(-5.0..5.0);
        lp.add_column(format!("x{j}"), cost, bounds[j].0, bounds[j].1, &entries);
    }
    lp
}

/// Every bid multiplied by `k`.
pub fn scale_bids(instance: &MarketInstance, k: f64) -> MarketInstance {
    let mut out = instance.clone();
    out.suppliers.iter_mut().for_each(|s| s.bid *= k);
    out.consumers.iter_mut().for_each(|d| d.bid *= k);
    out.transporters.iter_mut().for_each(|l| l.bid *= k);
    out.technologies.iter_mut().for_each(|t| t.bid *= k);
    out
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}
