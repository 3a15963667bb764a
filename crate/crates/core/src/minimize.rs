//! One-dimensional minimization.

use crate::scalar::Real;

/// Golden-section search for a minimum of `f` inside `[a, b]`.
///
/// Returns `(x, f(x))`, stopping once the bracket is narrower than `x_tol`.
pub fn golden_section<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, x_tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::two();
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > x_tol && iterations < 200 {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_minimum() {
        let (x, fx) = golden_section(|x: f64| (x - 0.3).powi(2) + 2.0, -1.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
        let (x, _) = golden_section(|x: f64| (x - 1.7).cosh(), 1.0, 4.0, 1e-6);
        assert!((x - 1.7).abs() < 1e-4);
    }

    #[test]
    fn minimum_at_bracket_edge() {
        let (x, _) = golden_section(|x: f64| x, 0.0, 1.0, 1e-8);
        assert!(x < 1e-7);
    }

    #[test]
    fn single_precision() {
        let (x, _) = golden_section(|x: f32| (x - 0.25).powi(2), 0.0, 1.0, 1e-5);
        assert!((x - 0.25).abs() < 1e-4);
    }
}
