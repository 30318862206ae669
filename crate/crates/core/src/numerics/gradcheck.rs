use super::Pcg32;

/// Denominator floor for the relative error. Central differences of an
/// O(1) loss at ε = 1e-6 carry roughly 1e-10 of rounding noise, so entries
/// below the floor are judged on absolute error.
pub const REL_FLOOR: f64 = 1e-5;

/// Relative error `|a − n| / max(|a|, |n|, REL_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Central-difference check of `analytic` at the listed entries of `theta`.
///
/// Returns the maximum relative error over `indices`.
pub fn grad_check_at(
    mut loss: impl FnMut(&[f64]) -> f64,
    theta: &[f64],
    analytic: &[f64],
    indices: &[usize],
    epsilon: f64,
) -> f64 {
    let mut probe = theta.to_vec();
    let mut worst = 0.0f64;
    for &i in indices {
        let original = probe[i];
        probe[i] = original + epsilon;
        let plus = loss(&probe);
        probe[i] = original - epsilon;
        let minus = loss(&probe);
        probe[i] = original;
        let numeric = (plus - minus) / (2.0 * epsilon);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    worst
}

/// Central-difference check at `probe_count` random entries (all entries if
/// `probe_count >= theta.len()`).
pub fn grad_check(
    loss: impl FnMut(&[f64]) -> f64,
    theta: &[f64],
    analytic: &[f64],
    probe_count: usize,
    epsilon: f64,
    rng: &mut Pcg32,
) -> f64 {
    assert_eq!(theta.len(), analytic.len(), "gradient length must match parameters");
    let indices: Vec<usize> = if probe_count >= theta.len() {
        (0..theta.len()).collect()
    } else {
        (0..probe_count).map(|_| rng.index(theta.len())).collect()
    };
    grad_check_at(loss, theta, analytic, &indices, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic() {
        let theta = [3.0];
        let err = grad_check(|t| t[0] * t[0], &theta, &[6.0], 1, 1e-5, &mut Pcg32::seeded(0));
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn doubled_gradient_is_caught() {
        let theta = [3.0];
        let err = grad_check(|t| t[0] * t[0], &theta, &[12.0], 1, 1e-5, &mut Pcg32::seeded(0));
        assert!((err - 0.5).abs() < 1e-6, "{err}");
    }

    #[test]
    fn tiny_entries_use_the_floor() {
        assert_eq!(relative_error(2e-7, 1e-7), 1e-7 / REL_FLOOR);
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(-1.0, 1.0), 2.0);
    }

    #[test]
    fn multivariate_random_probes() {
        let theta: Vec<f64> = (0..20).map(|i| i as f64 * 0.1 - 1.0).collect();
        let f = |t: &[f64]| t.iter().map(|x| x.sin() * x).sum::<f64>();
        let grad: Vec<f64> = theta.iter().map(|x| x.cos() * x + x.sin()).collect();
        let err = grad_check(f, &theta, &grad, 8, 1e-5, &mut Pcg32::seeded(9));
        assert!(err < 1e-6, "{err}");
    }
}
