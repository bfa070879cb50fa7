//! One-dimensional maximization of fidelity curves.
//!
//! Golden-section search alone stalls near `√ε` in the argument because the
//! objective is flat at the top. After the bracket is small, the root of a
//! Richardson-extrapolated central-difference derivative is located with the Illinois
//! variant of regula falsi, which resolves the argmax to roughly `1e-12`.

use crate::error::{Error, Result};
use crate::interferometers::{eta_from_q, run_cloner, Limits, Qubit};
use crate::scalar::Real;

const GOLDEN_ITERATIONS: usize = 200;
const ROOT_ITERATIONS: usize = 100;

/// Bracket `[a, b]` of width at most `width` containing the maximizer of a unimodal `f`.
pub fn golden_section_bracket<T, F>(mut f: F, a: T, b: T, width: T) -> Result<(T, T)>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::InvalidParameter("empty search interval".into()));
    }
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..GOLDEN_ITERATIONS {
        if b - a <= width {
            return Ok((a, b));
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Err(Error::NotConverged("golden-section search".into()))
}

/// Five-point central difference with step `h`, Richardson-extrapolated against `h/2`.
pub fn central_derivative<T, F>(f: &mut F, x: T, h: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let two = T::lit(2.0);
    let mut stencil = |h: T| -> Result<T> {
        let num = f(x - two * h)? - T::lit(8.0) * f(x - h)? + T::lit(8.0) * f(x + h)? - f(x + two * h)?;
        Ok(num / (T::lit(12.0) * h))
    };
    let coarse = stencil(h)?;
    let fine = stencil(h / two)?;
    Ok((T::lit(16.0) * fine - coarse) / T::lit(15.0))
}

/// Argmax of `f` over `[lo, hi]`, assuming a single interior maximum.
pub fn argmax<T, F>(mut f: F, lo: T, hi: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let (mut a, mut b) = golden_section_bracket(&mut f, lo, hi, T::lit(1e-4))?;
    let step = |x: T| {
        let room = (x - lo).min(hi - x) / T::lit(4.0);
        T::lit(1e-3).min(room)
    };
    let mut derivative = |x: T| -> Result<T> {
        let h = step(x);
        if h <= T::zero() {
            return Err(Error::InvalidParameter("maximum sits on the interval boundary".into()));
        }
        central_derivative(&mut f, x, h)
    };
    let mut ga = derivative(a)?;
    let mut gb = derivative(b)?;
    if ga < T::zero() || gb > T::zero() {
        // Flat enough that the bracket already pins the maximum.
        return Ok((a + b) / T::lit(2.0));
    }
    let tol = T::epsilon() * T::lit(16.0);
    let mut side = 0i8;
    for _ in 0..ROOT_ITERATIONS {
        if b - a <= tol * b.abs().max(T::one()) || ga == gb {
            break;
        }
        let x = (a * gb - b * ga) / (gb - ga);
        let x = if x > a && x < b { x } else { (a + b) / T::lit(2.0) };
        let gx = derivative(x)?;
        if gx == T::zero() {
            return Ok(x);
        }
        if gx > T::zero() {
            a = x;
            ga = gx;
            if side == 1 {
                gb /= T::lit(2.0);
            }
            side = 1;
        } else {
            b = x;
            gb = gx;
            if side == -1 {
                ga /= T::lit(2.0);
            }
            side = -1;
        }
    }
    Ok((a * gb - b * ga) / (gb - ga))
}

/// `q` maximizing the simulated single-clone fidelity of the `M`-clone circuit.
pub fn optimal_q_numerical<T: Real>(m: usize, limits: &Limits) -> Result<T> {
    let psi = Qubit::<T>::psi();
    argmax(|q: T| Ok(run_cloner(&psi, m, eta_from_q(q), limits)?.fidelity), T::zero(), T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let x = argmax(|x: f64| Ok(-(x - 0.3141592653589793).powi(2)), 0.0, 1.0).unwrap();
        assert!((x - 0.3141592653589793).abs() < 1e-13);
    }

    #[test]
    fn asymmetric_peak() {
        // maximum of x e^{-3x} at 1/3
        let x = argmax(|x: f64| Ok(x * (-3.0 * x).exp()), 0.0, 1.0).unwrap();
        assert!((x - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bad_interval() {
        assert!(golden_section_bracket(|x: f64| Ok(x), 1.0, 0.0, 1e-3).is_err());
    }
}
