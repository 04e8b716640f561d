//! Piecewise linear-predictor transforms of the Stukel and Czado families.
//!
//! Both return `(h, ln h')` pairs internally so that the link density can be
//! assembled in log space.

/// Below this magnitude an alpha is treated as zero and the limit branch is used.
pub const ALPHA_ZERO: f64 = 1e-8;

/// Stukel's generalized logistic transform `h_alpha(eta)`.
///
/// The exponential branches (`alpha > 0`) saturate to `+inf`/`-inf` once
/// `alpha * |eta|` exceeds the f64 range.
pub fn stukel_transform(alpha1: f64, alpha2: f64, eta: f64) -> f64 {
    stukel_with_log_derivative(alpha1, alpha2, eta).0
}

/// Czado's power transform `h_alpha(eta)`.
pub fn czado_transform(alpha1: f64, alpha2: f64, eta: f64) -> f64 {
    czado_with_log_derivative(alpha1, alpha2, eta).0
}

/// Stukel branch for a nonnegative argument `a = |eta|`, returning the
/// magnitude and the log-derivative.
fn stukel_half(alpha: f64, a: f64) -> (f64, f64) {
    if alpha.abs() < ALPHA_ZERO {
        (a, 0.0)
    } else if alpha > 0.0 {
        ((alpha * a).exp_m1() / alpha, alpha * a)
    } else {
        // 1 - alpha * a > 0 holds for every a >= 0 when alpha < 0
        let m = -alpha;
        ((m * a).ln_1p() / m, -(m * a).ln_1p())
    }
}

pub(crate) fn stukel_with_log_derivative(alpha1: f64, alpha2: f64, eta: f64) -> (f64, f64) {
    if eta >= 0.0 {
        stukel_half(alpha1, eta)
    } else {
        let (h, ld) = stukel_half(alpha2, -eta);
        (-h, ld)
    }
}

fn czado_half(alpha: f64, a: f64) -> (f64, f64) {
    let l = a.ln_1p();
    let h = if alpha.abs() < ALPHA_ZERO { l } else { (alpha * l).exp_m1() / alpha };
    (h, (alpha - 1.0) * l)
}

pub(crate) fn czado_with_log_derivative(alpha1: f64, alpha2: f64, eta: f64) -> (f64, f64) {
    if eta >= 0.0 {
        czado_half(alpha1, eta)
    } else {
        let (h, ld) = czado_half(alpha2, -eta);
        (-h, ld)
    }
}
