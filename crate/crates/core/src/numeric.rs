//! Small numerical helpers shared by the likelihood, information and
//! sampling code.

use std::f64::consts::LN_2;

/// `ln(1 - e^{-x})` for `x > 0`, accurate for both small and large `x`.
#[inline]
pub fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x < LN_2 {
        (-(-x).exp_m1()).ln()
    } else {
        (-(-x).exp()).ln_1p()
    }
}

/// `x / (e^{βx} - 1)`, the per-observation score contribution of
/// `ln(1 - e^{-βx})` with respect to β. Tends to `1/β` as `x → 0`.
#[inline]
pub fn x_over_expm1(beta: f64, x: f64) -> f64 {
    let bx = beta * x;
    if bx == 0.0 {
        1.0 / beta
    } else {
        x / bx.exp_m1()
    }
}

/// `α + 1 - e^{-βc}` without cancellation when both `α` and `βc` are small.
#[inline]
pub fn surv_factor(alpha: f64, beta: f64, c: f64) -> f64 {
    alpha - (-beta * c).exp_m1()
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol * (1.0 + x1.abs().max(x2.abs())) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Root of `f` on a sign-changing bracket `[lo, hi]` by the Illinois
/// variant of regula falsi. Stops when the bracket is narrower than `xtol`
/// or `|f| <= ftol`. Returns `(root, evaluations)`.
pub fn illinois<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Option<(f64, usize)> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return None;
    }
    if f_lo.abs() <= ftol {
        return Some((lo, 2));
    }
    if f_hi.abs() <= ftol {
        return Some((hi, 2));
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    let mut side = 0i8;
    for k in 0..max_iter {
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo.min(hi) && x < lo.max(hi)) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return None;
        }
        if fx.abs() <= ftol || (hi - lo).abs() <= xtol {
            return Some((x, k + 3));
        }
        if fx.signum() == f_hi.signum() {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        } else {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        }
    }
    None
}

/// Normal quantile, used for two-sided interval half widths.
pub fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_one_minus_exp_reference_values() {
        let cases = [
            (1e-12, -27.631021115929048),
            (0.5, -0.9327521295671886),
            (3.0, -0.05106918094270159),
            (40.0, -4.248354255291561e-18),
        ];
        for (x, want) in cases {
            let got = ln_one_minus_exp_neg(x);
            assert!((got - want).abs() <= 1e-14 * want.abs(), "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, _) = golden_max(|x| -(x - 1.3).powi(2), -5.0, 5.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-6);
    }

    #[test]
    fn illinois_solves_cubic() {
        let (x, _) = illinois(|x| x * x * x - 2.0, 0.0, 3.0, 1e-14, 0.0, 200).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-12);
        assert!(illinois(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0, 50).is_none());
    }

    #[test]
    fn z_95() {
        assert!((normal_quantile(0.975) - 1.959964).abs() < 1e-6);
    }
}
