//! `sin(pi t)` and `cos(pi t)` with exact argument reduction.
//!
//! Reducing `t` modulo 2 before multiplying by pi makes the zeros at integer
//! `t` exact, so boundary values such as `sin(u pi x / W)` at `x = W` come out
//! as 0.0 rather than a rounding residue.

use std::f64::consts::PI;

/// `sin(pi * t)`.
pub fn sin_pi(t: f64) -> f64 {
    let r = t.rem_euclid(2.0);
    if r <= 0.5 {
        (PI * r).sin()
    } else if r <= 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// `cos(pi * t)`.
pub fn cos_pi(t: f64) -> f64 {
    let r = t.rem_euclid(2.0);
    if r <= 1.0 {
        (PI * (0.5 - r)).sin()
    } else {
        (PI * (r - 1.5)).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_zeros_at_integers() {
        for k in -20..=20 {
            assert_eq!(sin_pi(k as f64), 0.0);
            assert_eq!(cos_pi(k as f64 + 0.5), 0.0);
        }
    }

    #[test]
    fn agrees_with_std() {
        let mut t = -7.3;
        while t < 9.1 {
            assert!((sin_pi(t) - (PI * t).sin()).abs() < 1e-13);
            assert!((cos_pi(t) - (PI * t).cos()).abs() < 1e-13);
            t += 0.0137;
        }
    }
}
