//! Small numerical helpers shared across modules: stable log-sum-exp,
//! adaptive quadrature, and sample statistics.

/// ln(exp(a) + exp(b)) without overflow. Either argument may be -inf.
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
///
/// The integrand must be finite on the interval. Recursion depth is capped;
/// the result of the deepest level is returned even if the local tolerance
/// was not met (callers pick intervals on which the integrand is smooth).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

/// Euclidean norm.
pub fn norm2(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logaddexp_matches_naive() {
        for &(a, b) in &[(0.0f64, 0.0f64), (-3.0, 2.0), (700.0, 699.0), (-1e9, 0.0)] {
            let naive = if a.abs() < 500.0 && b.abs() < 500.0 {
                (a.exp() + b.exp()).ln()
            } else {
                a.max(b) + ((a - a.max(b)).exp() + (b - a.max(b)).exp()).ln()
            };
            assert!((logaddexp(a, b) - naive).abs() < 1e-12);
        }
        assert_eq!(logaddexp(f64::NEG_INFINITY, 1.5), 1.5);
        assert_eq!(logaddexp(1.5, f64::NEG_INFINITY), 1.5);
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = adaptive_simpson(&f, -10.0, 10.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
    }
}
