//! Cylindrical special functions: Bessel J of integer order, the order-zero
//! Hankel function of the first kind for complex argument, its far-field
//! form, and the Jacobi-Anger plane-wave expansion.
//!
//! Evaluation strategy
//! -------------------
//! * `J_s(x)`, real argument: Miller's backward recurrence anchored by the
//!   normalisation `J_0 + 2*sum_m J_{2m} = 1`. One downward pass yields all
//!   orders `0..=s`, which is what the series consumers need anyway. A short
//!   power series handles `x < 1e-4`.
//! * `H_0^(1)(z)`, complex argument: ascending series for `|z| <= 11`, the
//!   Hankel large-argument expansion with optimal truncation beyond. No
//!   single expansion covers the whole envelope at the required accuracy;
//!   the switch radius balances series cancellation against the size of the
//!   smallest asymptotic term.
//!
//! All functions here are pure; concurrent callers need no synchronisation.

use crate::error::{Error, Result};
use crate::geom::Point;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.5772156649015329;

/// Largest order accepted by [`bessel_j`].
pub const MAX_BESSEL_ORDER: i32 = 200;
/// Largest real argument accepted by [`bessel_j`].
pub const MAX_BESSEL_ARG: f64 = 1.0e4;

/// Switch radius between the ascending series and the asymptotic expansion
/// for order-0/1 cylinder functions.
const SERIES_ASYMPTOTIC_SWITCH: f64 = 11.0;

/// Truncation control for symmetrically truncated order series
/// (`s` running over `[-s_max, s_max]` without zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBudget {
    s_max: usize,
    tol: f64,
}

impl SeriesBudget {
    /// `s_max` is the hard cap on the truncation order, `tol` the target
    /// absolute error of the truncated tail.
    pub fn new(s_max: usize, tol: f64) -> Result<Self> {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::Validation(format!(
                "series budget tolerance must be a positive finite number, got {tol}"
            )));
        }
        Ok(SeriesBudget { s_max, tol })
    }

    /// Default budget for a series whose largest Bessel argument is `x`:
    /// `s_max = ceil(x) + 30`, `tol = 1e-12`. Past order ~x the terms decay
    /// super-exponentially, so 30 extra orders are enough for the tolerance.
    pub fn default_for(x: f64) -> Self {
        SeriesBudget {
            s_max: x.abs().ceil() as usize + 30,
            tol: 1e-12,
        }
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Effective truncation order for argument `x`: the smallest order
    /// `>= ceil(x)` whose tail bound drops below `tol`, capped at `s_max`.
    ///
    /// The bound uses `|J_s(x)| <= (x/2)^s / s!` and a geometric majorant for
    /// the tail, with a factor 4 for the paired `+s`/`-s` unit-modulus terms.
    pub fn effective_order(&self, x: f64) -> usize {
        if self.s_max == 0 || x == 0.0 {
            return 0;
        }
        let half = 0.5 * x;
        let start = (x.ceil() as usize).max(1);
        if start >= self.s_max {
            return self.s_max;
        }
        // ln t_{s} for s = start + 1
        let mut ln_t = 0.0;
        for j in 1..=start + 1 {
            ln_t += half.ln() - (j as f64).ln();
        }
        let mut order = start;
        while order < self.s_max {
            let ratio = half / (order + 2) as f64;
            let bound = 4.0 * ln_t.exp() / (1.0 - ratio);
            if bound < self.tol {
                return order;
            }
            order += 1;
            ln_t += half.ln() - ((order + 1) as f64).ln();
        }
        self.s_max
    }
}

/// Bessel function of the first kind `J_s(x)` for integer order.
///
/// Supported envelope: `|s| <= 200`, `0 <= x <= 1e4`; absolute error below
/// 1e-12 inside it. Negative orders use `J_{-s}(x) = (-1)^s J_s(x)`.
pub fn bessel_j(s: i32, x: f64) -> Result<f64> {
    if s.abs() > MAX_BESSEL_ORDER {
        return Err(Error::Domain(format!(
            "Bessel order {s} outside supported range |s| <= {MAX_BESSEL_ORDER}"
        )));
    }
    if !(0.0..=MAX_BESSEL_ARG).contains(&x) {
        return Err(Error::Domain(format!(
            "Bessel argument {x} outside supported range [0, {MAX_BESSEL_ARG}]"
        )));
    }
    let order = s.unsigned_abs() as usize;
    let value = bessel_j_sequence(order, x)[order];
    if s < 0 && s % 2 != 0 {
        Ok(-value)
    } else {
        Ok(value)
    }
}

/// All of `J_0(x) .. J_max_order(x)` in one backward-recurrence pass.
///
/// Requires `x >= 0`. This is the workhorse behind [`bessel_j`],
/// [`jacobi_anger`] and the indicator-structure series, where consecutive
/// orders are always needed together.
pub fn bessel_j_sequence(max_order: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "bessel_j_sequence requires x >= 0, got {x}");
    let mut out = vec![0.0; max_order + 1];
    if x < 1e-4 {
        // Two power-series terms; the third is below 1e-18 relative here.
        let half = 0.5 * x;
        let q = half * half;
        let mut lead = 1.0; // (x/2)^s / s!
        for (s, slot) in out.iter_mut().enumerate() {
            if s > 0 {
                lead *= half / s as f64;
            }
            *slot = lead * (1.0 - q / (s + 1) as f64);
        }
        return out;
    }

    let start = miller_start_order(max_order, x);
    let mut above = 0.0_f64;
    let mut cur = 1.0_f64;
    // Normalisation sum J_0 + 2 sum_{m>=1} J_{2m}, compensated: at x ~ 1e4 it
    // gathers thousands of terms and plain summation would cost ~1e-11.
    let mut norm = 0.0_f64;
    let mut comp = 0.0_f64;
    let kahan = |acc: &mut f64, c: &mut f64, t: f64| {
        let y = t - *c;
        let s = *acc + y;
        *c = (s - *acc) - y;
        *acc = s;
    };

    for k in (1..=start).rev() {
        let next = (2.0 * k as f64 / x) * cur - above;
        above = cur;
        cur = next;
        let ord = k - 1;
        if ord <= max_order {
            out[ord] = cur;
        }
        if ord > 0 && ord % 2 == 0 {
            kahan(&mut norm, &mut comp, 2.0 * cur);
        }
        if cur.abs() > 1e250 {
            let scale = 1e-250;
            cur *= scale;
            above *= scale;
            norm *= scale;
            comp *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }
    kahan(&mut norm, &mut comp, cur); // cur now holds the unnormalised J_0
    let scale = 1.0 / norm;
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// Start order for the backward recurrence: past the Airy transition zone of
/// width ~`x^(1/3)` the minimal solution has decayed below 1e-17 of its peak,
/// which buries the arbitrary-seed error.
fn miller_start_order(max_order: usize, x: f64) -> usize {
    let from_arg = x.ceil() + 14.0 * x.cbrt();
    (from_arg.max(max_order as f64) + 40.0) as usize
}

/// Hankel function of the first kind, order zero: `H_0^(1)(z) = J_0(z) + i Y_0(z)`.
///
/// Accepts complex `z` with `Re(z) >= 0`, `z != 0` (logarithmic singularity at
/// the origin). Absolute error below 1e-10 for `|z| <= 1e4`.
pub fn hankel1_0(z: Complex64) -> Result<Complex64> {
    check_hankel_arg(z)?;
    if z.norm() <= SERIES_ASYMPTOTIC_SWITCH {
        let (j0, y0) = series_j0_y0(z);
        Ok(j0 + Complex64::i() * y0)
    } else {
        Ok(asym_hankel1(0, z))
    }
}

/// `Y_0(x)` for real `x > 0`. Provided for the Wronskian cross-checks of the
/// order-zero kernel.
pub fn bessel_y0(x: f64) -> Result<f64> {
    check_real_y_arg(x)?;
    let z = Complex64::new(x, 0.0);
    if x <= SERIES_ASYMPTOTIC_SWITCH {
        Ok(series_j0_y0(z).1.re)
    } else {
        Ok(asym_hankel1(0, z).im)
    }
}

/// `Y_1(x)` for real `x > 0` (needed for `Y_0' = -Y_1`).
pub fn bessel_y1(x: f64) -> Result<f64> {
    check_real_y_arg(x)?;
    let z = Complex64::new(x, 0.0);
    if x <= SERIES_ASYMPTOTIC_SWITCH {
        Ok(series_j1_y1(z).1.re)
    } else {
        Ok(asym_hankel1(1, z).im)
    }
}

fn check_hankel_arg(z: Complex64) -> Result<()> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Singularity(
            "H_0^(1) has a logarithmic singularity at z = 0".into(),
        ));
    }
    if z.re < 0.0 {
        return Err(Error::Domain(format!(
            "H_0^(1) supported for Re(z) >= 0 only, got {z}"
        )));
    }
    Ok(())
}

fn check_real_y_arg(x: f64) -> Result<()> {
    if x <= 0.0 {
        return Err(Error::Domain(format!(
            "Y_n(x) requires x > 0 on the real line, got {x}"
        )));
    }
    Ok(())
}

/// Ascending series for `J_0(z)` and `Y_0(z)`.
fn series_j0_y0(z: Complex64) -> (Complex64, Complex64) {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0); // (-q)^k / (k!)^2
    let mut j0 = term;
    let mut ysum = Complex64::new(0.0, 0.0); // sum (-1)^{k+1} H_k q^k/(k!)^2
    let mut harmonic = 0.0;
    for k in 1..200 {
        term *= -q / ((k * k) as f64);
        j0 += term;
        harmonic += 1.0 / k as f64;
        ysum -= term * harmonic;
        if term.norm() < 1e-17 * j0.norm().max(1e-300) {
            break;
        }
    }
    let y0 = (2.0 / PI) * (((z * 0.5).ln() + EULER_GAMMA) * j0 + ysum);
    (j0, y0)
}

/// Ascending series for `J_1(z)` and `Y_1(z)`.
fn series_j1_y1(z: Complex64) -> (Complex64, Complex64) {
    let q = z * z * 0.25;
    // J_1 = (z/2) sum (-q)^k / (k! (k+1)!)
    let mut u = Complex64::new(1.0, 0.0); // (-q)^k / (k! (k+1)!)
    let mut jsum = u;
    // psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
    let mut psi = -2.0 * EULER_GAMMA + 1.0;
    let mut psum = u * psi;
    let mut harmonic = 0.0; // H_k
    for k in 1..200 {
        u *= -q / ((k * (k + 1)) as f64);
        jsum += u;
        harmonic += 1.0 / k as f64;
        psi = -2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (k + 1) as f64;
        psum += u * psi;
        if u.norm() < 1e-17 * jsum.norm().max(1e-300) {
            break;
        }
    }
    let j1 = z * 0.5 * jsum;
    let y1 = (2.0 / PI) * (z * 0.5).ln() * j1
        - 2.0 / (PI * z)
        - z / (2.0 * PI) * psum;
    (j1, y1)
}

/// Large-argument expansion of `H_nu^(1)(z)` for `nu` in {0, 1}, optimally
/// truncated. Accurate to ~1e-11 absolute at the switch radius and rapidly
/// better beyond it.
fn asym_hankel1(nu: u32, z: Complex64) -> Complex64 {
    debug_assert!(nu <= 1);
    let nu_term = 4.0 * (nu * nu) as f64;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev_mag = f64::INFINITY;
    for k in 1..=60 {
        let factor = nu_term - (2.0 * k as f64 - 1.0).powi(2);
        term *= Complex64::i() * factor / (8.0 * k as f64) / z;
        let mag = term.norm();
        if mag >= prev_mag {
            break; // past the optimal truncation point
        }
        sum += term;
        prev_mag = mag;
        if mag < 1e-17 * sum.norm() {
            break;
        }
    }
    let omega = z - (0.5 * nu as f64 + 0.25) * PI;
    (Complex64::new(2.0 / PI, 0.0) / z).sqrt() * (Complex64::i() * omega).exp() * sum
}

/// Far-field form of the order-zero Hankel function for an observation point
/// `r` and a source antenna at `a` on a circle of radius `radius`:
///
/// `(1 + i) / (4 sqrt(k pi)) * exp(i k radius) / sqrt(radius) * exp(-i k theta . r)`
///
/// with `theta = a/|a|`. The fixed complex prefactor is kept exactly as used
/// by the indicator-structure derivation; it differs from the exact Hankel
/// asymptotics by a constant factor that normalisation later cancels.
pub fn asymptotic_hankel1_0(k: Complex64, r: Point, a: Point, radius: f64) -> Result<Complex64> {
    if radius <= 0.0 {
        return Err(Error::Domain(format!(
            "far-field form requires radius > 0, got {radius}"
        )));
    }
    if k.norm() == 0.0 {
        return Err(Error::Domain("far-field form requires k != 0".into()));
    }
    let a_norm = a.norm();
    if a_norm == 0.0 {
        return Err(Error::Domain(
            "antenna direction undefined for a at the origin".into(),
        ));
    }
    let theta_dot_r = (a.x * r.x + a.y * r.y) / a_norm;
    let amp = Complex64::new(1.0, 1.0) / (4.0 * (k * PI).sqrt() * radius.sqrt());
    let phase = (Complex64::i() * k * radius).exp() * (-Complex64::i() * k * theta_dot_r).exp();
    Ok(amp * phase)
}

/// Truncated Jacobi-Anger expansion of `exp(i x cos(theta))`:
///
/// `J_0(x) + sum_{s in [-s_eff, s_eff], s != 0} i^s J_s(x) exp(i s theta)`
///
/// The `+s`/`-s` pair folds to `2 i^s J_s(x) cos(s theta)` via
/// `J_{-s} = (-1)^s J_s`. The effective order is chosen by the budget's tail
/// bound and never exceeds `budget.s_max()`.
pub fn jacobi_anger(x: f64, theta: f64, budget: &SeriesBudget) -> Complex64 {
    assert!(x >= 0.0, "jacobi_anger requires x >= 0, got {x}");
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let s_eff = budget.effective_order(x);
    let js = bessel_j_sequence(s_eff, x);
    let mut sum = Complex64::new(js[0], 0.0);
    for (s, &j) in js.iter().enumerate().skip(1) {
        let c = 2.0 * j * (s as f64 * theta).cos();
        sum += i_pow(s) * c;
    }
    sum
}

/// `i^s` for non-negative `s`.
fn i_pow(s: usize) -> Complex64 {
    match s % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent ascending-series oracle for J_s(x), reliable for x <= ~15.
    fn j_series_oracle(s: u32, x: f64) -> f64 {
        let half = 0.5 * x;
        let mut lead = 1.0;
        for j in 1..=s {
            lead *= half / j as f64;
        }
        let q = half * half;
        let mut term = lead;
        let mut sum = term;
        let mut k = 1.0;
        loop {
            term *= -q / (k * (k + s as f64));
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) || k > 200.0 {
                return sum;
            }
            k += 1.0;
        }
    }

    /// Independent ascending-series oracle for Y_0(x), x <= ~15.
    fn y0_series_oracle(x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut j0 = 1.0;
        let mut ysum = 0.0;
        let mut h = 0.0;
        for k in 1..200 {
            term *= -q / ((k * k) as f64);
            j0 += term;
            h += 1.0 / k as f64;
            ysum -= term * h;
        }
        (2.0 / PI) * (((0.5 * x).ln() + EULER_GAMMA) * j0 + ysum)
    }

    #[test]
    fn bessel_j_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(-7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bessel_j_small_args_match_series_oracle() {
        for &(s, x) in &[(0u32, 1.0), (1, 1.0), (3, 0.5), (5, 10.0), (0, 9.0), (12, 14.0)] {
            let oracle = j_series_oracle(s, x);
            let got = bessel_j(s as i32, x).unwrap();
            assert!(
                (got - oracle).abs() <= 1e-13,
                "J_{s}({x}): got {got}, oracle {oracle}"
            );
        }
        // Spec-quoted value, rederived by the oracle above.
        assert!((bessel_j(0, 1.0).unwrap() - 0.7651976865579665).abs() < 1e-14);
    }

    #[test]
    fn bessel_j_reference_values() {
        // Frozen from 40-digit arithmetic.
        let cases = [
            (0, 100.0, 0.019985850304223122),
            (0, 10000.0, -0.007096160353388801),
            (5, 10.0, -0.23406152818679364),
            (50, 80.0, -0.039457764590251249),
            (200, 150.0, 8.0577021983968538e-14),
            (200, 1000.0, 0.0041835315250220756),
            (7, 123.25, 0.010058618040425404),
        ];
        for &(s, x, expect) in &cases {
            let got = bessel_j(s, x).unwrap();
            assert!(
                (got - expect).abs() <= 1e-12,
                "J_{s}({x}): got {got:e}, expected {expect:e}, err {:e}",
                (got - expect).abs()
            );
        }
    }

    #[test]
    fn bessel_j_negative_order_is_exact_reflection() {
        for &(s, x) in &[(1, 2.3), (2, 7.7), (9, 40.0), (50, 3.0)] {
            let pos = bessel_j(s, x).unwrap();
            let neg = bessel_j(-s, x).unwrap();
            let expect = if s % 2 == 0 { pos } else { -pos };
            assert_eq!(neg, expect, "J_-{s}({x}) must equal (-1)^{s} J_{s}({x}) exactly");
        }
    }

    #[test]
    fn bessel_j_envelope_errors() {
        assert!(matches!(bessel_j(201, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_j(0, -0.5), Err(Error::Domain(_))));
        assert!(matches!(bessel_j(0, 1.0001e4), Err(Error::Domain(_))));
    }

    #[test]
    fn hankel_reference_values() {
        // Frozen from 40-digit arithmetic; absolute error budget 1e-10.
        let cases = [
            (1.0, 0.0, 0.7651976865579665, 0.08825696421567696),
            (0.5, 0.1, 0.7951229363876340, -0.4565264817951536),
            (30.0, 2.0, -0.012193113378951951, -0.015455419033794333),
            (1000.0, 10.0, 1.1263406483678414e-6, 2.0846785420907501e-7),
            (10.9, 0.0, -0.18806224596334207, -0.15158319322304511),
            (11.1, 0.0, -0.15276829543567689, -0.18427577162151367),
            (3.0, 0.8, -0.09235563395256561, 0.17802358596088821),
            (0.0, 5.0, 0.0, -0.0023498261812045551),
            (9999.5, 0.5, -0.0027163853466696692, 0.0040052907791409215),
            (171.33, 4.26, 5.447806282623962e-4, 6.663501416300421e-4),
        ];
        for &(re, im, ere, eim) in &cases {
            let got = hankel1_0(Complex64::new(re, im)).unwrap();
            let err = (got - Complex64::new(ere, eim)).norm();
            assert!(err <= 1e-10, "H1_0({re}+{im}i): err {err:e}");
        }
    }

    #[test]
    fn hankel_series_branch_matches_independent_oracle() {
        for &x in &[0.3, 1.0, 4.2, 8.0, 10.5] {
            let h = hankel1_0(Complex64::new(x, 0.0)).unwrap();
            let j = j_series_oracle(0, x);
            let y = y0_series_oracle(x);
            assert!((h.re - j).abs() < 1e-12, "J0({x})");
            assert!((h.im - y).abs() < 1e-12, "Y0({x})");
        }
    }

    #[test]
    fn hankel_rejects_singular_and_left_half_plane() {
        assert!(matches!(
            hankel1_0(Complex64::new(0.0, 0.0)),
            Err(Error::Singularity(_))
        ));
        assert!(matches!(
            hankel1_0(Complex64::new(-1.0, 0.5)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn bessel_y_reference_values() {
        let cases = [
            (bessel_y0(1.0).unwrap(), 0.08825696421567696),
            (bessel_y1(1.0).unwrap(), -0.7812128213002887),
            (bessel_y0(50.0).unwrap(), -0.098064995470077079),
            (bessel_y1(50.0).unwrap(), -0.056795668562014768),
            (bessel_y0(0.1).unwrap(), -1.5342386513503668),
            (bessel_y1(0.1).unwrap(), -6.4589510947020266),
            (bessel_y0(11.5).unwrap(), -0.22523211169118787),
            (bessel_y1(11.5).unwrap(), 0.057942547143000822),
        ];
        for (i, &(got, expect)) in cases.iter().enumerate() {
            assert!(
                (got - expect).abs() < 1e-11,
                "Y case {i}: got {got}, expected {expect}"
            );
        }
        assert!(matches!(bessel_y0(0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_y1(-2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn far_field_form_at_zero_phase() {
        // theta . r = 0 collapses the angular factor.
        let k = Complex64::new(120.0, 3.0);
        let radius: f64 = 0.09;
        let expect = Complex64::new(1.0, 1.0) / (4.0 * (k * PI).sqrt() * radius.sqrt())
            * (Complex64::i() * k * radius).exp();
        // r orthogonal to a
        let got = asymptotic_hankel1_0(k, Point::new(0.0, 0.02), Point::new(radius, 0.0), radius)
            .unwrap();
        assert!((got - expect).norm() < 1e-15 * expect.norm());
        // r = 0 gives the same value for any antenna direction
        for angle in [0.0f64, 1.1, 2.9, 4.4] {
            let a = Point::new(radius * angle.cos(), radius * angle.sin());
            let got = asymptotic_hankel1_0(k, Point::ORIGIN, a, radius).unwrap();
            assert!((got - expect).norm() < 1e-15 * expect.norm());
        }
    }

    #[test]
    fn far_field_form_converges_to_hankel() {
        // The far-field form carries a fixed complex prefactor relative to the
        // exact asymptotics of H_0^(1); compensate by -4i before comparing.
        let k = Complex64::new(1.0, 0.0);
        let r = Point::new(0.3, -0.2);
        let mut prev = f64::INFINITY;
        for radius in [1.0e3, 1.0e4, 1.0e5] {
            let a = Point::new(0.0, -radius);
            let dist = r.distance_to(a);
            let exact = hankel1_0(k * dist).unwrap();
            let far = asymptotic_hankel1_0(k, r, a, radius).unwrap() * Complex64::new(0.0, -4.0);
            let rel = (far - exact).norm() / exact.norm();
            assert!(rel < prev, "deviation must shrink with radius: {rel} vs {prev}");
            prev = rel;
        }
        // At x = 1e3 the compensated deviation is already o(x^{-1/2}).
        let x = 1.0e3;
        let exact = hankel1_0(Complex64::new(x, 0.0)).unwrap();
        let far = asymptotic_hankel1_0(k, Point::ORIGIN, Point::new(x, 0.0), x).unwrap()
            * Complex64::new(0.0, -4.0);
        assert!((far - exact).norm() / exact.norm() < 1e-3);
    }

    #[test]
    fn far_field_form_domain_errors() {
        let k = Complex64::new(1.0, 0.0);
        assert!(asymptotic_hankel1_0(k, Point::ORIGIN, Point::new(1.0, 0.0), 0.0).is_err());
        assert!(asymptotic_hankel1_0(Complex64::new(0.0, 0.0), Point::ORIGIN, Point::new(1.0, 0.0), 1.0).is_err());
        assert!(asymptotic_hankel1_0(k, Point::ORIGIN, Point::ORIGIN, 1.0).is_err());
    }

    #[test]
    fn jacobi_anger_trivial_cases() {
        let budget = SeriesBudget::new(40, 1e-12).unwrap();
        let v = jacobi_anger(0.0, 1.234, &budget);
        assert_eq!(v, Complex64::new(1.0, 0.0));

        // theta = 0 collapses to exp(i x)
        let budget = SeriesBudget::new(20, 1e-12).unwrap();
        let v = jacobi_anger(1.0, 0.0, &budget);
        let expect = Complex64::new(1.0f64.cos(), 1.0f64.sin());
        assert!((v - expect).norm() < 1e-12, "got {v}, expected {expect}");
    }

    #[test]
    fn jacobi_anger_matches_exponential() {
        let mut x: f64 = 0.7;
        let mut theta: f64 = 0.3;
        for _ in 0..25 {
            // crude deterministic scatter over the envelope
            x = (x * 9.7 + 3.1) % 50.0;
            theta = (theta * 5.3 + 1.7) % (2.0 * PI);
            let budget = SeriesBudget::new(x.ceil() as usize + 30, 1e-12).unwrap();
            let got = jacobi_anger(x, theta, &budget);
            let expect = (Complex64::i() * (x * theta.cos())).exp();
            assert!(
                (got - expect).norm() < 1e-10,
                "x={x}, theta={theta}: got {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn jacobi_anger_truncation_error_monotone_in_budget() {
        let x: f64 = 17.3;
        let theta: f64 = 2.1;
        let exact = (Complex64::i() * (x * theta.cos())).exp();
        let mut prev = f64::INFINITY;
        for s_max in (18..=58).step_by(4) {
            // Tight tolerance forces the cap to be the binding constraint.
            let budget = SeriesBudget::new(s_max, 1e-300).unwrap();
            let err = (jacobi_anger(x, theta, &budget) - exact).norm();
            assert!(
                err <= prev + 1e-15,
                "truncation error must not grow with s_max: {err} after {prev}"
            );
            prev = err;
        }
    }

    #[test]
    fn series_budget_validation() {
        assert!(SeriesBudget::new(10, 0.0).is_err());
        assert!(SeriesBudget::new(10, -1e-9).is_err());
        assert!(SeriesBudget::new(0, 1e-12).is_ok());
        let b = SeriesBudget::default_for(12.3);
        assert_eq!(b.s_max(), 43);
        assert!(b.effective_order(12.3) <= 43);
    }

    proptest! {
        #[test]
        fn three_term_recurrence(s in -50i32..=50, x in 0.1f64..100.0) {
            let jm = bessel_j(s - 1, x).unwrap();
            let jp = bessel_j(s + 1, x).unwrap();
            let j = bessel_j(s, x).unwrap();
            let lhs = jm + jp;
            let rhs = 2.0 * s as f64 / x * j;
            prop_assert!((lhs - rhs).abs() < 1e-9, "s={}, x={}: {} vs {}", s, x, lhs, rhs);
        }

        #[test]
        fn wronskian_order_zero(x in 0.1f64..100.0) {
            // J0 Y0' - J0' Y0 = 2/(pi x) with J0' = -J1, Y0' = -Y1.
            let j0 = bessel_j(0, x).unwrap();
            let j1 = bessel_j(1, x).unwrap();
            let y0 = bessel_y0(x).unwrap();
            let y1 = bessel_y1(x).unwrap();
            let w = -j0 * y1 + j1 * y0;
            prop_assert!((w - 2.0 / (PI * x)).abs() < 1e-9, "x={}: wronskian {}", x, w);
        }

        #[test]
        fn negative_order_reflection(s in 1i32..=50, x in 0.0f64..100.0) {
            let pos = bessel_j(s, x).unwrap();
            let neg = bessel_j(-s, x).unwrap();
            let expect = if s % 2 == 0 { pos } else { -pos };
            prop_assert_eq!(neg, expect);
        }
    }
}
