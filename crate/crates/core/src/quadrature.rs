//! Adaptive Gauss–Kronrod (7, 15) integration.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = (a + b) * half;
    let half_len = (b - a) * half;
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kronrod += s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss += s * T::lit(WG[j / 2]);
        }
    }
    (kronrod * half_len, ((kronrod - gauss) * half_len).abs())
}

/// Integrates `f` over `[a, b]`, splitting first at `breaks` (points inside
/// the interval where the integrand changes character), then bisecting the
/// worst subinterval until the summed error estimate is below `tol`.
pub fn integrate<T, F>(mut f: F, a: T, b: T, breaks: &[T], tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let mut edges: Vec<T> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup();

    let mut pieces: Vec<(T, T, T, T)> = edges
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();

    const MAX_PIECES: usize = 4000;
    loop {
        let total_err: T = pieces.iter().map(|p| p.3).sum();
        if total_err <= tol {
            break;
        }
        if pieces.len() >= MAX_PIECES || !total_err.is_finite() {
            return Err(Error::Quadrature {
                tol: tol.as_f64(),
                err: total_err.as_f64(),
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.as_f64().total_cmp(&y.1 .3.as_f64()))
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            // Interval can no longer be split in this precision.
            return Err(Error::Quadrature {
                tol: tol.as_f64(),
                err: total_err.as_f64(),
            });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    // Sum in position order so the result does not depend on refinement order.
    pieces.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(pieces.iter().map(|p| p.2).sum())
}
