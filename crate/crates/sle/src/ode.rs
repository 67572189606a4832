//! Mean-hitting-time oracle for the normalized interface diffusion.
//!
//! The expected r-time for the interface coordinate to travel from 0 to 1
//! equals f(1), where f solves the boundary-value problem
//!
//! ```text
//! 3 f″(x) + 2 f′(x) (1/x − 1/(1−x)) = 1,    f(0) = f′(0) = 0.
//! ```
//!
//! The oracle integrates this ODE numerically and exposes f(1) together
//! with the interior value f(1/2). None of the diffusion machinery is
//! involved: the power series at the regular-singular point 0 launches the
//! solution, a fourth-order Runge–Kutta sweep carries it through the bulk,
//! and the integrating-factor representation
//!
//! ```text
//! f′(x) = (x(1−x))^{−2/3}/3 · ∫₀ˣ (s(1−s))^{2/3} ds
//! ```
//!
//! bridges the final sliver where the coefficient 1/(1−x) blows up. The
//! exact endpoint value is π/(7√3) ≈ 0.259114, which doubles as the Monte
//! Carlo target for the hitting-time experiments.

use std::sync::OnceLock;

use peelab_numerics::quad::{integrate, QuadError};
use peelab_numerics::special::beta;

/// Exact mean travel time π/(7√3) = 0.2591139370… from 0 to 1.
pub fn t1_constant() -> f64 {
    std::f64::consts::PI / (7.0 * 3.0f64.sqrt())
}

/// Power-series coefficients a_m of f(x) = Σ a_m x^m.
///
/// Multiplying the ODE by x(1−x) gives 3x(1−x)f″ + 2(1−2x)f′ = x − x², and
/// matching the coefficient of x^m yields the two-term recurrence
///
/// ```text
/// (m+1)(3m+2) a_{m+1} = m(3m+1) a_m + [m=1] − [m=2],
/// ```
///
/// with a₀ = a₁ = 0, hence a₂ = 1/10, a₃ = 1/60, a₄ = 1/88, …  The ratio
/// a_{m+1}/a_m → 1, so the series converges on |x| < 1.
fn series_coefficients() -> &'static [f64] {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let terms = 400;
        let mut a = vec![0.0f64; terms];
        for m in 1..terms - 1 {
            let forcing = match m {
                1 => 1.0,
                2 => -1.0,
                _ => 0.0,
            };
            let carried = (m * (3 * m + 1)) as f64 * a[m] + forcing;
            a[m + 1] = carried / ((m + 1) * (3 * m + 2)) as f64;
        }
        a
    })
}

/// Evaluates f by its power series. Accurate (and cheap) for |x| ≤ 3/4;
/// the coefficients decay only polynomially, so the series is useless next
/// to x = 1 and callers beyond 3/4 must go through the ODE sweep instead.
pub fn f_series(x: f64) -> f64 {
    assert!(x.abs() <= 0.75, "series evaluation restricted to |x| ≤ 3/4");
    let mut sum = 0.0;
    let mut power = x * x;
    for (m, &a) in series_coefficients().iter().enumerate().skip(2) {
        let term = a * power;
        sum += term;
        power *= x;
        if m > 8 && term.abs() < 1e-25 * sum.abs() {
            break;
        }
    }
    sum
}

/// Evaluates f′ by the term-wise differentiated series, same domain.
pub fn f_series_deriv(x: f64) -> f64 {
    assert!(x.abs() <= 0.75, "series evaluation restricted to |x| ≤ 3/4");
    let mut sum = 0.0;
    let mut power = x;
    for (m, &a) in series_coefficients().iter().enumerate().skip(2) {
        let term = m as f64 * a * power;
        sum += term;
        power *= x;
        if m > 8 && term.abs() < 1e-25 * sum.abs() {
            break;
        }
    }
    sum
}

/// Values of the solved boundary-value problem.
#[derive(Debug, Clone, Copy)]
pub struct OdeSolution {
    /// f(1/2), for cross-checking against the independent series summation.
    pub f_half: f64,
    /// f(1): the mean 0→1 travel time, exactly π/(7√3).
    pub f_one: f64,
}

/// Second-order ODE written as a first-order system in (f, f′).
fn rhs(x: f64, fp: f64) -> f64 {
    (1.0 - 2.0 * fp * (1.0 / x - 1.0 / (1.0 - x))) / 3.0
}

/// Classical RK4 sweep of `steps` equal steps of size `h` from `x`.
fn rk4_segment(mut x: f64, mut f: f64, mut fp: f64, h: f64, steps: usize) -> (f64, f64, f64) {
    for _ in 0..steps {
        let k1f = fp;
        let k1p = rhs(x, fp);
        let k2f = fp + 0.5 * h * k1p;
        let k2p = rhs(x + 0.5 * h, fp + 0.5 * h * k1p);
        let k3f = fp + 0.5 * h * k2p;
        let k3p = rhs(x + 0.5 * h, fp + 0.5 * h * k2p);
        let k4f = fp + h * k3p;
        let k4p = rhs(x + h, fp + h * k3p);
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        fp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        x += h;
    }
    (x, f, fp)
}

/// ∫₀^y (s(1−s))^{2/3} ds for small y, by the binomial series: expanding
/// (1−s)^{2/3} term by term gives Σ_j C(2/3, j)(−1)^j y^{j+5/3}/(j+5/3),
/// which converges to machine precision in a handful of terms for y ≤ 1e-2.
fn weight_integral_near_zero(y: f64) -> f64 {
    debug_assert!((0.0..=1e-2).contains(&y));
    let y53 = y.powf(5.0 / 3.0);
    let mut binom = 1.0; // C(2/3, j) · (−1)^j, updated multiplicatively
    let mut power = 1.0; // y^j
    let mut sum = 0.0;
    for j in 0..20 {
        let term = binom * power / (j as f64 + 5.0 / 3.0);
        sum += term;
        if term.abs() < 1e-22 * sum.abs() {
            break;
        }
        binom *= -(2.0 / 3.0 - j as f64) / (j as f64 + 1.0);
        power *= y;
    }
    y53 * sum
}

/// Solves the boundary-value problem and returns f(1/2) and f(1).
///
/// Accuracy budget: the series launch at x = 1e-3 is exact to machine
/// precision, the RK4 sweeps (h = 1e-5 on [1e-3, 0.9], h = 1e-6 on
/// [0.9, 0.999] where derivatives of f grow like (1−x)^{−k}) contribute
/// O(1e-12), and the closing integral is quadrature-exact. The result lands
/// within 1e-8 of π/(7√3); the advertised tolerance is 1e-6.
pub fn f_ode_oracle() -> Result<OdeSolution, QuadError> {
    let x0 = 1e-3;
    let f0 = f_series(x0);
    let fp0 = f_series_deriv(x0);

    // [1e-3, 0.5] then [0.5, 0.9], so that 0.5 is hit exactly.
    let (x1, f_half, fp_half) = rk4_segment(x0, f0, fp0, 1e-5, 49_900);
    debug_assert!((x1 - 0.5).abs() < 1e-9);
    let (x2, f2, fp2) = rk4_segment(x1, f_half, fp_half, 1e-5, 40_000);
    debug_assert!((x2 - 0.9).abs() < 1e-9);
    let (x3, f3, _fp3) = rk4_segment(x2, f2, fp2, 1e-6, 99_000);
    debug_assert!((x3 - 0.999).abs() < 1e-9);

    // Last sliver [1−δ, 1]: reflect to y = 1−x and use the integrating-factor
    // form of f′. With I(x) = ∫₀ˣ (s(1−s))^{2/3} ds and the symmetry
    // I(1−y) = I(1) − I(y), the remaining mass is
    // ∫₀^δ (I(1) − I(y))/3 · (y(1−y))^{−2/3} dy, whose only singularity
    // (exponent −2/3) sits at the quadrature-exact endpoint 0.
    let delta = 1.0 - x3;
    let total_weight = beta(5.0 / 3.0, 5.0 / 3.0);
    let tail = integrate(
        |y| (total_weight - weight_integral_near_zero(y)) / 3.0 * (y * (1.0 - y)).powf(-2.0 / 3.0),
        0.0,
        delta,
        1e-12,
    )?;

    Ok(OdeSolution {
        f_half,
        f_one: f3 + tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use peelab_numerics::special::beta;

    #[test]
    fn series_solves_the_equation_pointwise() {
        // Residual of 3f″ + 2f′(1/x − 1/(1−x)) − 1 from the raw coefficient
        // sums, at points well inside the disk of convergence. This checks
        // the recurrence itself, independently of the RK4 sweep.
        let coeffs = series_coefficients();
        for &x in &[0.05f64, 0.2, 0.45, 0.6] {
            let mut fp = 0.0;
            let mut fpp = 0.0;
            for (m, &a) in coeffs.iter().enumerate().skip(2) {
                let mf = m as f64;
                fp += mf * a * x.powi(m as i32 - 1);
                fpp += mf * (mf - 1.0) * a * x.powi(m as i32 - 2);
            }
            let residual = 3.0 * fpp + 2.0 * fp * (1.0 / x - 1.0 / (1.0 - x)) - 1.0;
            assert!(residual.abs() < 1e-9, "residual {residual} at x = {x}");
        }
    }

    #[test]
    fn series_starts_quadratically_with_coefficient_one_tenth() {
        let x = 1e-4;
        let f = f_series(x);
        assert!(
            (f / (x * x) - 0.1).abs() < 1e-4,
            "leading behavior {} vs x²/10",
            f / (x * x)
        );
    }

    #[test]
    fn endpoint_value_matches_closed_form() {
        let solution = f_ode_oracle().unwrap();
        assert!(
            (solution.f_one - t1_constant()).abs() < 1e-6,
            "f(1) = {} vs π/(7√3) = {}",
            solution.f_one,
            t1_constant()
        );
    }

    #[test]
    fn endpoint_value_matches_beta_product_identity() {
        // The integrating-factor form integrates in closed form:
        // f(1) = B(5/3, 5/3)·B(1/3, 1/3)/6, because the antisymmetric part
        // of I(x) about x = 1/2 cancels against the symmetric weight. Both
        // routes must agree with π/(7√3) — this pins the special-function
        // plumbing and the ODE sweep against each other.
        let product = beta(5.0 / 3.0, 5.0 / 3.0) * beta(1.0 / 3.0, 1.0 / 3.0) / 6.0;
        assert!((product - t1_constant()).abs() < 1e-12);
        let solution = f_ode_oracle().unwrap();
        assert!((solution.f_one - product).abs() < 1e-6);
    }

    #[test]
    fn sweep_agrees_with_series_at_one_half() {
        let solution = f_ode_oracle().unwrap();
        let series = f_series(0.5);
        assert!(
            (solution.f_half - series).abs() < 1e-8,
            "sweep {} vs series {}",
            solution.f_half,
            series
        );
    }

    #[test]
    fn t1_constant_decimal_expansion() {
        assert!((t1_constant() - 0.259114).abs() < 5e-7);
    }
}
