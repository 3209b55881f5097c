//! Bessel functions `J₀` and `J₁` of real argument.
//!
//! Ascending power series for `|x| ≤ 8`; Miller's backward recurrence with the
//! `J₀ + 2ΣJ₂ₖ = 1` normalisation beyond that. Both paths stay within ~1e-13.

const SERIES_LIMIT: f64 = 8.0;

pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(ax, 0)
    } else {
        miller(ax).0
    }
}

pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT { series(ax, 1) } else { miller(ax).1 };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `Σ (−1)^k (x/2)^{2k+n} / (k! (k+n)!)` for `n ∈ {0, 1}`.
fn series(x: f64, order: u32) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let n = order as f64;
    for k in 1..200 {
        let k = k as f64;
        term *= -q / (k * (k + n));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> (f64, f64) {
    let mut start = (x + 10.0 * x.cbrt() + 40.0) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0_f64; // J_{k+1}
    let mut cur = 1e-30_f64; // J_k
    let mut norm = 0.0_f64;
    let (mut j0, mut j1) = (0.0, 0.0);
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1}.
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if k - 1 == 1 {
            j1 = cur;
        }
        if k - 1 == 0 {
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}
