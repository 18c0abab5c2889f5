//! Small estimators shared by the studies.

/// Sample mean and standard error of the mean (`0` for a single sample).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Empirical order: slope of `ln values` against `ln hs`.
pub fn loglog_slope(hs: &[f64], values: &[f64]) -> f64 {
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    linear_slope(&lx, &ly)
}

/// Rate `r` of the best fit `y ≈ C e^{r t}` over the positive entries.
pub fn exp_rate(t: &[f64], y: &[f64]) -> Option<f64> {
    let (tt, ly): (Vec<f64>, Vec<f64>) =
        t.iter().zip(y).filter(|(_, &v)| v > 0.0 && v.is_finite()).map(|(&a, &v)| (a, v.ln())).unzip();
    if tt.len() < 2 {
        return None;
    }
    Some(linear_slope(&tt, &ly))
}
