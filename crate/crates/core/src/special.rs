//! Bessel function of the first kind of order zero.

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 14.0;

/// `J₀(x)`: power series below `|x| = 14`, Hankel asymptotic expansion above.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        j0_series(x)
    } else {
        j0_asymptotic(x)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 2.0 * x {
            break;
        }
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    sum
}

// J0(x) ~ sqrt(2/(πx)) (P cos χ − Q sin χ), χ = x − π/4, with
// |a_k| = |a_{k−1}| (2k−1)² / (8k); P takes even k and Q odd k.
fn j0_asymptotic(x: f64) -> f64 {
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let kf = k as f64;
            a *= (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
        }
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        // a_k(0) carries the sign (−1)^k on top of the alternation.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q -= sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    // J0(x) = (1/π) ∫_0^π cos(x sin θ) dθ; the trapezoid rule on this
    // periodic integrand converges geometrically once the node count
    // exceeds x.
    fn j0_integral(x: f64) -> f64 {
        let n = (x.abs() as usize) + 60;
        let h = PI / n as f64;
        let mut s = 0.5 * (1.0 + (x * PI.sin()).cos());
        for k in 1..n {
            s += (x * (k as f64 * h).sin()).cos();
        }
        s / n as f64
    }

    #[test]
    fn known_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j0(2.404_825_557_695_773) - 0.0).abs() < 1e-14);
        assert!((bessel_j0(10.0) - (-0.245_935_764_451_348_3)).abs() < 1e-13);
    }

    #[test]
    fn matches_integral_representation() {
        let mut worst: f64 = 0.0;
        let mut x = 0.0;
        while x < 200.0 {
            worst = worst.max((bessel_j0(x) - j0_integral(x)).abs());
            x += 0.173;
        }
        assert!(worst < 1e-11, "worst deviation {worst:e}");
    }

    #[test]
    fn even_function() {
        for &x in &[0.3, 5.0, 17.0] {
            assert_eq!(bessel_j0(x), bessel_j0(-x));
        }
    }
}
