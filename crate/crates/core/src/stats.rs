//! Small numeric helpers for summarizing runs.

use statrs::distribution::{Binomial, DiscreteCDF};

/// Ordinary least squares `y = slope * x + intercept`.
/// Returns `None` for fewer than two points or constant `x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// One-sided sign test p-value for "first sample tends to be smaller" on
/// paired observations. Ties are dropped.
pub fn sign_test_less(a: &[f64], b: &[f64]) -> SignTest {
    let mut wins = 0u64;
    let mut losses = 0u64;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            wins += 1;
        } else if x > y {
            losses += 1;
        }
    }
    let n = wins + losses;
    let p_value = if n == 0 {
        1.0
    } else {
        // P(X >= wins) for X ~ Bin(n, 1/2).
        let dist = Binomial::new(0.5, n).expect("valid binomial");
        if wins == 0 {
            1.0
        } else {
            1.0 - dist.cdf(wins - 1)
        }
    };
    SignTest { wins, losses, p_value }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SignTest {
    pub wins: u64,
    pub losses: u64,
    pub p_value: f64,
}
