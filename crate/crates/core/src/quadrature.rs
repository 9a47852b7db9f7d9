//! Numerical integration: adaptive Gauss-Kronrod (7/15) and fixed
//! three-point Gauss-Legendre rules.

use crate::real::Real;

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (the 7-point rule).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Nodes and weights of the three-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_3<T: Real>() -> ([T; 3], [T; 3]) {
    let x = T::lit(0.6).sqrt();
    (
        [-x, T::zero(), x],
        [T::lit(5.0 / 9.0), T::lit(8.0 / 9.0), T::lit(5.0 / 9.0)],
    )
}

fn kronrod_15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut kronrod = fc * T::lit(KRONROD_WEIGHTS[7]);
    let mut gauss = fc * T::lit(GAUSS_WEIGHTS[3]);
    for k in 0..7 {
        let dx = half * T::lit(KRONROD_NODES[k]);
        let pair = f(mid - dx) + f(mid + dx);
        kronrod = kronrod + pair * T::lit(KRONROD_WEIGHTS[k]);
        if k % 2 == 1 {
            gauss = gauss + pair * T::lit(GAUSS_WEIGHTS[k / 2]);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Intervals are bisected until their Kronrod/Gauss discrepancy falls below
/// their share of the tolerance or the recursion depth reaches 60.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> T {
    if a == b {
        return T::zero();
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let mut total = T::zero();
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((lo, hi, eps, depth)) = stack.pop() {
        let (value, err) = kronrod_15(&f, lo, hi);
        if err <= eps || depth >= 60 || !err.is_finite() {
            total = total + value;
        } else {
            let mid = (lo + hi) / T::lit(2.0);
            let half_eps = eps / T::lit(2.0);
            stack.push((lo, mid, half_eps, depth + 1));
            stack.push((mid, hi, half_eps, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_transcendentals() {
        let v: f64 = integrate(|x: f64| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-12);
        let v: f64 = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
        let v: f64 = integrate(|x: f64| x.ln(), 1.0, 2.0, 1e-12);
        assert!((v - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-12);
        let v: f64 = integrate(|x: f64| x * x, 3.0, 0.0, 1e-12);
        assert!((v + 9.0).abs() < 1e-12);
    }

    #[test]
    fn weakly_singular_integrand() {
        // int_0^1 x^{-1/2} = 2
        let v: f64 = integrate(|x: f64| 1.0 / x.sqrt(), 1e-14, 1.0, 1e-10);
        assert!((v - (2.0 - 2.0 * 1e-7)).abs() < 1e-8, "{v}");
    }

    #[test]
    fn gauss_three_point_is_exact_to_degree_five() {
        let (x, w) = gauss_legendre_3::<f64>();
        let q: f64 = (0..3).map(|k| w[k] * x[k].powi(4)).sum();
        assert!((q - 2.0 / 5.0).abs() < 1e-15);
        let q: f64 = (0..3).map(|k| w[k] * x[k].powi(5)).sum();
        assert!(q.abs() < 1e-15);
    }
}
