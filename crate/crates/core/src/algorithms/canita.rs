//! Parameter schedule of the CANITA method (schedule values only; the method itself is not run).

/// Schedule values at round `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanitaParams {
    pub b: f64,
    pub beta0: f64,
    pub beta: f64,
    pub p: f64,
    pub alpha: f64,
    pub theta: f64,
    pub eta: f64,
}

/// `b = min{ω, √(ω(1+ω)²/n)}`.
pub fn canita_b(n: usize, omega: f64) -> f64 {
    omega.min((omega * (1.0 + omega).powi(2) / n as f64).sqrt())
}

/// Schedule at round `t` for smoothness `l`.
///
/// `η₀ = 1/(L(β₀ + 3/2))` and `η_t = min{(1 + 1/(t + 9(1+b+ω))) η_{t−1}, 1/(L(β + 3/2))}`.
pub fn canita_schedule(n: usize, omega: f64, l: f64, t: usize) -> CanitaParams {
    let b = canita_b(n, omega);
    let c = 1.0 + b + omega;
    let beta0 = 9.0 * c * c / (2.0 * (1.0 + b));
    let beta = 48.0 * omega * (1.0 + omega) * (1.0 + b + 2.0 * (1.0 + omega)) / (n as f64 * (1.0 + b).powi(2));
    let cap = 1.0 / (l * (beta + 1.5));
    let mut eta = 1.0 / (l * (beta0 + 1.5));
    for s in 1..=t {
        eta = ((1.0 + 1.0 / (s as f64 + 9.0 * c)) * eta).min(cap);
    }
    CanitaParams {
        b,
        beta0,
        beta,
        p: 1.0 / (1.0 + b),
        alpha: 1.0 / (1.0 + omega),
        theta: 3.0 * (1.0 + b) / (t as f64 + 9.0 * c),
        eta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_limit() {
        let l = 3.0;
        let p = canita_schedule(10, 0.0, l, 0);
        assert_eq!((p.b, p.beta, p.p), (0.0, 0.0, 1.0));
        assert_eq!(p.beta0, 4.5);
        assert!((p.theta - 1.0 / 3.0).abs() < 1e-15);
        assert!((canita_schedule(10, 0.0, l, 5).theta - 3.0 / 14.0).abs() < 1e-15);
        assert!((canita_schedule(10, 0.0, l, 20_000).eta - 1.0 / (1.5 * l)).abs() < 1e-15);
    }

    #[test]
    fn b_never_exceeds_omega() {
        for n in [1, 4, 100, 10_000] {
            for omega in [0.0, 0.1, 1.0, 19.0, 1e3] {
                assert!(canita_b(n, omega) <= omega);
            }
        }
    }

    #[test]
    fn eta_lower_bound_chain() {
        for (n, omega, l) in [(400, 19.0, 1e4), (4, 1.0, 1.0), (100, 99.0, 2.0)] {
            for t in [0, 10, 1000, 50_000] {
                let p = canita_schedule(n, omega, l, t);
                let c = 1.0 + p.b + omega;
                let lower = ((t as f64 + 1.0 + 9.0 * c) * (1.0 + p.b) / (60.0 * l * c.powi(3)))
                    .min(1.0 / (l * (p.beta + 1.5)));
                assert!(p.eta >= lower * (1.0 - 1e-12), "n={n} omega={omega} t={t}");
            }
        }
    }
}
