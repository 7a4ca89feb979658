//! Sampling grids and small numeric helpers shared by the scans.

/// `count` points spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == count - 1 {
                        hi
                    } else {
                        (a + step * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `count` points spaced evenly from `lo` to `hi` inclusive.
pub fn linear(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Geometric grid with `per_doubling` points per factor of two.
pub fn per_doubling(lo: f64, hi: f64, per_doubling: usize) -> Vec<f64> {
    let doublings = (hi / lo).log2().max(0.0);
    let count = (doublings * per_doubling as f64).ceil() as usize + 1;
    geometric(lo, hi, count.max(2))
}

/// Least-squares line `y = a + b x`; returns `(a, b, r_squared)`.
///
/// A constant `y` is a perfect fit by convention (`r_squared = 1`).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let my = ys.iter().sum::<f64>() / m;
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let scale = ys.iter().map(|y| y.abs()).fold(0.0, f64::max).max(1e-300);
    if syy <= (1e-13 * scale).powi(2) * m {
        return (my, 0.0, 1.0);
    }
    let mx = xs.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - a - b * x;
            e * e
        })
        .sum();
    (a, b, 1.0 - ss_res / syy)
}

/// Running supremum of a sequence.
pub fn running_sup(values: &[f64]) -> Vec<f64> {
    let mut acc = f64::NEG_INFINITY;
    values
        .iter()
        .map(|v| {
            acc = acc.max(*v);
            acc
        })
        .collect()
}
