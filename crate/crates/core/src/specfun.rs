//! Integer-order cylinder functions of real argument.
//!
//! `J_m` is obtained by Miller's backward recurrence normalized with
//! `J_0 + 2 Σ J_2k = 1`. `Y_0` and `Y_1` follow from Neumann's expansions
//! over the same `J` sequence, and higher `Y_m` from forward recurrence,
//! which is stable for the second kind. Negative orders use
//! `Z_{-m} = (-1)^m Z_m`.
//!
//! For whole modal sums prefer [`CylinderFunctions`], which computes every
//! order at one argument in a single pass.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// Modal truncation order `⌈x + 6·x^{1/3} + 10⌉` used for every modal sum.
pub fn truncation_order(x: f64) -> usize {
    (x + 6.0 * x.cbrt() + 10.0).ceil() as usize
}

fn check_arg(x: f64, allow_zero: bool) -> Result<()> {
    if !x.is_finite() || x < 0.0 || (x == 0.0 && !allow_zero) {
        return Err(Error::Domain(format!(
            "cylinder function argument must be {}, got {x}",
            if allow_zero { ">= 0" } else { "> 0" }
        )));
    }
    Ok(())
}

fn parity(m: i32) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `J_0(x) ..= J_nmax(x)` for `x > 0` by backward recurrence.
fn j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let base = nmax.max(x.ceil() as usize) as f64;
    let mut start = (base + 20.0 + (40.0 * base).sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    let two_over_x = 2.0 / x;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let next = k as f64 * two_over_x * j[k] - j[k + 1];
        j[k - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in &mut j[k - 1..] {
                *v *= RESCALE_BY;
            }
            norm *= RESCALE_BY;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j[k - 1];
        }
    }
    norm += j[0];
    j.truncate(nmax + 1);
    for v in &mut j {
        *v /= norm;
    }
    j
}

/// Neumann series for `Y_0`, `Y_1` given `J_k` for all `k` where it is
/// non-negligible.
fn y0_y1(x: f64, j: &[f64]) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1usize;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (2.0 * kf + 1.0) / (kf * (kf + 1.0)) * j[2 * k + 1];
        k += 1;
    }
    let y0 = FRAC_2_PI * (log_term * j[0] - 2.0 * s0);
    let y1 = FRAC_2_PI * ((log_term - 1.0) * j[1] - j[0] / x - s1);
    (y0, y1)
}

/// Tabulated `J_m`, `Y_m` for `m = 0..=max_order + 1` at a single argument.
///
/// The extra order lets derivatives be formed for every `|m| <= max_order`.
#[derive(Debug, Clone)]
pub struct CylinderFunctions {
    x: f64,
    max_order: usize,
    j: Vec<f64>,
    y: Vec<f64>,
}

impl CylinderFunctions {
    pub fn new(max_order: usize, x: f64) -> Result<Self> {
        check_arg(x, false)?;
        let top = max_order + 1;
        // Neumann's series needs every J_k that is not negligible.
        let needed = top.max((x + 12.0 * x.cbrt() + 40.0).ceil() as usize);
        let mut j = j_sequence(needed, x);
        let (y0, y1) = y0_y1(x, &j);
        j.truncate(top + 1);
        let mut y = Vec::with_capacity(top + 1);
        y.push(y0);
        y.push(y1);
        for k in 1..top {
            let next = 2.0 * k as f64 / x * y[k] - y[k - 1];
            if !next.is_finite() {
                return Err(Error::Overflow(format!(
                    "Y_{} overflows at x = {x}",
                    k + 1
                )));
            }
            y.push(next);
        }
        y.truncate(top + 1);
        Ok(Self { x, max_order, j, y })
    }

    pub fn argument(&self) -> f64 {
        self.x
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    fn slot(&self, m: i32) -> (usize, f64) {
        let idx = m.unsigned_abs() as usize;
        assert!(
            idx <= self.max_order + 1,
            "order {m} outside table of max order {}",
            self.max_order
        );
        let sign = if m < 0 { parity(m) } else { 1.0 };
        (idx, sign)
    }

    pub fn j(&self, m: i32) -> f64 {
        let (i, s) = self.slot(m);
        s * self.j[i]
    }

    pub fn y(&self, m: i32) -> f64 {
        let (i, s) = self.slot(m);
        s * self.y[i]
    }

    pub fn j_prime(&self, m: i32) -> f64 {
        0.5 * (self.j(m - 1) - self.j(m + 1))
    }

    pub fn y_prime(&self, m: i32) -> f64 {
        0.5 * (self.y(m - 1) - self.y(m + 1))
    }

    /// `H_m^(2) = J_m - j Y_m`.
    pub fn h2(&self, m: i32) -> Complex64 {
        Complex64::new(self.j(m), -self.y(m))
    }

    /// `dH_m^(2)/dx = (H_{m-1} - H_{m+1}) / 2`.
    pub fn h2_prime(&self, m: i32) -> Complex64 {
        0.5 * (self.h2(m - 1) - self.h2(m + 1))
    }
}

/// Bessel function of the first kind `J_m(x)`; `x = 0` is allowed.
pub fn bessel_j(m: i32, x: f64) -> Result<f64> {
    check_arg(x, true)?;
    if x == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let n = m.unsigned_abs() as usize;
    let j = j_sequence(n, x)[n];
    Ok(if m < 0 { parity(m) * j } else { j })
}

/// Bessel function of the second kind `Y_m(x)`, `x > 0`.
pub fn bessel_y(m: i32, x: f64) -> Result<f64> {
    let n = m.unsigned_abs() as usize;
    Ok(CylinderFunctions::new(n, x)?.y(m))
}

/// Hankel function of the second kind.
pub fn hankel2(m: i32, x: f64) -> Result<Complex64> {
    let n = m.unsigned_abs() as usize;
    Ok(CylinderFunctions::new(n, x)?.h2(m))
}

/// Derivative of the Hankel function of the second kind with respect to
/// its argument.
pub fn hankel2_prime(m: i32, x: f64) -> Result<Complex64> {
    let n = m.unsigned_abs() as usize;
    Ok(CylinderFunctions::new(n, x)?.h2_prime(m))
}

/// Truncated Jacobi–Anger series `Σ_{|m|<=order} j^m J_m(x) e^{-jmφ}`,
/// which converges to `exp(j x cos φ)`.
pub fn jacobi_anger(x: f64, phi: f64, order: usize) -> Result<Complex64> {
    if order < 1 {
        return Err(Error::Domain("Jacobi-Anger order must be >= 1".into()));
    }
    check_arg(x, true)?;
    if x == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let j = j_sequence(order, x);
    // Pair ±m: j^m e^{-jmφ} J_m + j^{-m} e^{jmφ} (-1)^m J_m = 2 j^m cos(mφ) J_m.
    let mut sum = Complex64::new(j[0], 0.0);
    let mut jm = Complex64::new(1.0, 0.0);
    for (m, &jv) in j.iter().enumerate().skip(1) {
        jm *= Complex64::i();
        sum += jm * (2.0 * (m as f64 * phi).cos() * jv);
    }
    Ok(sum)
}

/// Large-argument magnitude `sqrt(2 / (π x))` shared by `|H_m^(2)(x)|`.
pub fn hankel_asymptotic_magnitude(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt()
}
