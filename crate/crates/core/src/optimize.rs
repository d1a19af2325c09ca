//! One-dimensional search primitives used by the threshold optimizers and
//! the Shannon-limit root finders.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x, f(x))` with the bracket shrunk below `tol`.
pub fn golden_section_max<T, F>(mut f: F, mut a: T, mut b: T, tol: T) -> (T, T)
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Scans `points` evenly spaced interior points of `(a, b)` and refines the
/// best one with golden-section search between its grid neighbours.
///
/// The grid protects against the local maxima that a bare golden-section
/// search would lock onto when `f` is not quasi-concave on the bracket.
pub fn grid_then_golden<T, F>(mut f: F, a: T, b: T, points: usize, tol: T) -> (T, T)
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    debug_assert!(points >= 1 && b > a);
    let step = (b - a) / T::from_usize(points + 1).unwrap();
    let mut best_i = 1;
    let mut best_f = T::neg_infinity();
    for i in 1..=points {
        let x = a + step * T::from_usize(i).unwrap();
        let fx = f(x);
        if fx > best_f {
            best_f = fx;
            best_i = i;
        }
    }
    let lo = a + step * T::from_usize(best_i - 1).unwrap();
    let hi = a + step * T::from_usize(best_i + 1).unwrap();
    let best_x = a + step * T::from_usize(best_i).unwrap();
    let (x, fx) = golden_section_max(&mut f, lo, hi, tol);
    if fx >= best_f {
        (x, fx)
    } else {
        (best_x, best_f)
    }
}

/// Bisection for a root of `f` on `[a, b]`; `f(a)` and `f(b)` must differ in sign.
pub fn bisect<T, F>(mut f: F, mut a: T, mut b: T, tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) || fa.is_nan() || fb.is_nan() {
        return Err(Error::Bracket(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    // Cap iterations so an unreachable tol on f32 cannot spin forever.
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = a + (b - a) * T::lit(0.5);
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(a + (b - a) * T::lit(0.5))
}
