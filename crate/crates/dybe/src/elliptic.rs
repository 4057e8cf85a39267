//! Jacobi theta functions and the weight functions built from them.
//!
//! Two families are provided. The `H`/`Θ` pair with half periods `K` and
//! `iK'` (nome `p = exp(-πK'/K)`) underlies the eight-vertex and SOS
//! models, through the composite weight `h(z) = ζ H(λz) Θ(λz)`. The odd
//! theta `θ(z,τ)` with modular parameter `τ` underlies the
//! Andrews-Baxter-Forrester parametrization through the normalized
//! bracket `[z]`, whose trigonometric limit is `sin(πz/g)`.
//!
//! All series are truncated at a relative term threshold of `1e-17` with
//! a hard cap of 10⁴ terms; see [`SERIES_EPS`] and [`SERIES_MAX_TERMS`].

use num_complex::Complex64;
use thiserror::Error;

/// Relative term-size threshold at which series evaluation stops.
pub const SERIES_EPS: f64 = 1e-17;

/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 10_000;

#[derive(Debug, Error)]
pub enum EllipticError {
    #[error("nome must satisfy |p| < 1, got |p| = {0}")]
    NomeOutOfRange(f64),
    #[error("half-period scale K must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("modular parameter needs Im(tau) > 0, got Im(tau) = {0}")]
    TauNotInUpperHalfPlane(f64),
    #[error("level must satisfy L >= 2, got {0}")]
    LevelTooSmall(i64),
    #[error("1/(2L-2) lies on the lattice Z + tau*Z (distance {0:.3e})")]
    DegenerateLevel(f64),
    #[error("theta'(0, tau) is numerically degenerate (|{0:.3e}| < 1e-12)")]
    DegenerateNormalization(f64),
    #[error("trigonometric scale must satisfy g >= 2, got {0}")]
    TrigScaleTooSmall(i64),
}

/// Parameters of the `H`/`Θ` theta pair and the composite weight `h`.
///
/// `zeta` is fixed to `p^{-1/8} φ(p) / φ(p²)²` by [`EllipticParams::new`];
/// `lambda` is the free scale multiplying every theta argument.
#[derive(Debug, Clone, Copy)]
pub struct EllipticParams {
    pub p: Complex64,
    /// Half-period scale `K`; the paper leaves it implicit, default 1.
    pub k_scale: f64,
    pub lambda: Complex64,
    pub zeta: Complex64,
}

impl EllipticParams {
    pub fn new(p: Complex64, k_scale: f64, lambda: Complex64) -> Result<Self, EllipticError> {
        if p.norm() >= 1.0 {
            return Err(EllipticError::NomeOutOfRange(p.norm()));
        }
        if k_scale <= 0.0 {
            return Err(EllipticError::NonPositiveScale(k_scale));
        }
        let phi_p = euler_phi(p)?;
        let phi_p2 = euler_phi(p * p)?;
        let zeta = p.powf(-0.125) * phi_p / (phi_p2 * phi_p2);
        Ok(Self { p, k_scale, lambda, zeta })
    }
}

/// Parameters of the odd theta `θ(z,τ)` and the bracket `[z]`.
#[derive(Debug, Clone, Copy)]
pub struct ThetaParams {
    pub tau: Complex64,
    pub level: i64,
}

impl ThetaParams {
    pub fn new(tau: Complex64, level: i64) -> Result<Self, EllipticError> {
        if tau.im <= 0.0 {
            return Err(EllipticError::TauNotInUpperHalfPlane(tau.im));
        }
        if level < 2 {
            return Err(EllipticError::LevelTooSmall(level));
        }
        // 1/(2L-2) must avoid Z + tau*Z; with Im(tau) > 0 only the n = 0
        // row of the lattice can come close.
        let x = 1.0 / (2.0 * level as f64 - 2.0);
        let dist = (x - x.round()).abs();
        if dist < 1e-9 {
            return Err(EllipticError::DegenerateLevel(dist));
        }
        Ok(Self { tau, level })
    }

    /// The argument scale `2L - 2`.
    pub fn scale(&self) -> f64 {
        2.0 * self.level as f64 - 2.0
    }
}

/// Euler product `φ(p) = ∏_{k≥1} (1 - p^k)`.
pub fn euler_phi(p: Complex64) -> Result<Complex64, EllipticError> {
    if p.norm() >= 1.0 {
        return Err(EllipticError::NomeOutOfRange(p.norm()));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    let mut pk = p;
    for _ in 0..SERIES_MAX_TERMS {
        if pk.norm() < SERIES_EPS {
            break;
        }
        acc *= Complex64::new(1.0, 0.0) - pk;
        pk *= p;
    }
    Ok(acc)
}

/// Jacobi `H(z) = 2 Σ_{n≥1} (-1)^{n-1} p^{(n-1/2)²} sin[(2n-1)πz/(2K)]`.
pub fn jacobi_h(z: Complex64, params: &EllipticParams) -> Complex64 {
    let p = params.p;
    let k = params.k_scale;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut running_max = 0.0f64;
    for n in 1..=SERIES_MAX_TERMS {
        let nf = n as f64;
        let expo = (nf - 0.5) * (nf - 0.5);
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let term = p.powf(expo) * (z * ((2.0 * nf - 1.0) * std::f64::consts::PI / (2.0 * k))).sin() * sign;
        acc += term;
        running_max = running_max.max(term.norm());
        if term.norm() < SERIES_EPS * running_max.max(1e-300) {
            break;
        }
    }
    2.0 * acc
}

/// Jacobi `Θ(z) = 1 + 2 Σ_{n≥1} (-1)^n p^{n²} cos(nπz/K)`.
pub fn jacobi_theta(z: Complex64, params: &EllipticParams) -> Complex64 {
    let p = params.p;
    let k = params.k_scale;
    let mut acc = Complex64::new(1.0, 0.0);
    let mut running_max = 1.0f64;
    for n in 1..=SERIES_MAX_TERMS {
        let nf = n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = 2.0 * sign * p.powf(nf * nf) * (z * (nf * std::f64::consts::PI / k)).cos();
        acc += term;
        running_max = running_max.max(term.norm());
        if term.norm() < SERIES_EPS * running_max {
            break;
        }
    }
    acc
}

/// Composite weight `h(z) = ζ H(λz) Θ(λz)`.
pub fn weight_h(z: Complex64, params: &EllipticParams) -> Complex64 {
    let arg = params.lambda * z;
    params.zeta * jacobi_h(arg, params) * jacobi_theta(arg, params)
}

/// Number of summation indices needed for the odd theta tail bound
/// `exp(-π Im(τ) (N+1/2)²) < 1e-18`.
fn theta_window(im_tau: f64) -> i64 {
    let bound = 18.0 * std::f64::consts::LN_10 / (std::f64::consts::PI * im_tau);
    (bound.sqrt() + 1.0).ceil() as i64
}

/// Odd Jacobi theta `θ(z,τ) = -Σ_{n∈Z} e^{iπ(n+1/2)²τ + 2πi(n+1/2)(z+1/2)}`.
pub fn theta_odd(z: Complex64, params: &ThetaParams) -> Complex64 {
    let i_pi = Complex64::new(0.0, std::f64::consts::PI);
    let n_max = theta_window(params.tau.im);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in -n_max..=n_max {
        let half = n as f64 + 0.5;
        let term = (i_pi * (half * half) * params.tau
            + 2.0 * i_pi * half * (z + 0.5))
            .exp();
        acc += term;
    }
    -acc
}

/// Term-wise derivative `θ'(z,τ)` of the odd theta series.
pub fn theta_odd_deriv(z: Complex64, params: &ThetaParams) -> Complex64 {
    let i_pi = Complex64::new(0.0, std::f64::consts::PI);
    let n_max = theta_window(params.tau.im);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in -n_max..=n_max {
        let half = n as f64 + 0.5;
        let term = 2.0 * i_pi * half
            * (i_pi * (half * half) * params.tau + 2.0 * i_pi * half * (z + 0.5)).exp();
        acc += term;
    }
    -acc
}

/// Normalized bracket `[z] = θ(z/(2L-2), τ) / (θ'(0,τ)/(2L-2))`.
///
/// Normalized so that `d[z]/dz = 1` at `z = 0`.
pub fn bracket(z: Complex64, params: &ThetaParams) -> Result<Complex64, EllipticError> {
    let scale = params.scale();
    let deriv0 = theta_odd_deriv(Complex64::new(0.0, 0.0), params);
    if deriv0.norm() < 1e-12 {
        return Err(EllipticError::DegenerateNormalization(deriv0.norm()));
    }
    Ok(theta_odd(z / scale, params) / (deriv0 / scale))
}

/// Trigonometric bracket `⟨z⟩ = sin(πz/g)`.
pub fn trig_bracket(z: Complex64, g: i64) -> Result<Complex64, EllipticError> {
    if g < 2 {
        return Err(EllipticError::TrigScaleTooSmall(g));
    }
    Ok((z * (std::f64::consts::PI / g as f64)).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn params(p: f64, lambda: f64) -> EllipticParams {
        EllipticParams::new(c64(p, 0.0), 1.0, c64(lambda, 0.0)).unwrap()
    }

    #[test]
    fn euler_phi_empty_product() {
        assert_eq!(euler_phi(c64(0.0, 0.0)).unwrap(), c64(1.0, 0.0));
    }

    #[test]
    fn euler_phi_small_nome() {
        // 200-term product, Kahan-free reference evaluated directly.
        let p = 0.1f64;
        let mut reference = 1.0f64;
        for k in 1..=200 {
            reference *= 1.0 - p.powi(k);
        }
        let got = euler_phi(c64(p, 0.0)).unwrap();
        assert!((got.re - reference).abs() < 1e-15, "got {}", got.re);
        assert!((got.re - 0.8900100).abs() < 1e-7);
    }

    #[test]
    fn euler_phi_rejects_big_nome() {
        assert!(euler_phi(c64(1.0, 0.0)).is_err());
    }

    #[test]
    fn jacobi_h_odd_and_zero() {
        let pr = params(0.05, 1.0);
        assert_eq!(jacobi_h(c64(0.0, 0.0), &pr), c64(0.0, 0.0));
        let z = c64(0.37, 0.1);
        let a = jacobi_h(z, &pr);
        let b = jacobi_h(-z, &pr);
        assert!((a + b).norm() < 1e-14 * a.norm());
    }

    #[test]
    fn jacobi_theta_even_and_nome_zero() {
        let pr = params(0.05, 1.0);
        let z = c64(0.37, 0.1);
        assert!((jacobi_theta(z, &pr) - jacobi_theta(-z, &pr)).norm() < 1e-14);
        let pr0 = params(0.0, 1.0);
        assert_eq!(jacobi_theta(c64(1.23, 4.0), &pr0), c64(1.0, 0.0));
    }

    #[test]
    fn weight_h_odd() {
        let pr = params(0.05, 0.43);
        let z = c64(0.8, -0.05);
        let a = weight_h(z, &pr);
        let b = weight_h(-z, &pr);
        assert!((a + b).norm() < 1e-13 * a.norm().max(1.0));
        assert_eq!(weight_h(c64(0.0, 0.0), &pr), c64(0.0, 0.0));
    }

    #[test]
    fn theta_odd_vanishes_at_zero_and_is_odd() {
        let tp = ThetaParams::new(c64(0.0, 1.5), 4).unwrap();
        assert!(theta_odd(c64(0.0, 0.0), &tp).norm() < 1e-15);
        let z = c64(0.3, 0.07);
        let a = theta_odd(z, &tp);
        assert!((a + theta_odd(-z, &tp)).norm() < 1e-14 * a.norm());
    }

    #[test]
    fn bracket_derivative_is_one() {
        let tp = ThetaParams::new(c64(0.0, 1.2), 4).unwrap();
        let step = 1e-5;
        let d = (bracket(c64(step, 0.0), &tp).unwrap() - bracket(c64(-step, 0.0), &tp).unwrap())
            / (2.0 * step);
        assert!((d - 1.0).norm() < 1e-6, "derivative {}", d);
    }

    #[test]
    fn bracket_reflection() {
        let tp = ThetaParams::new(c64(0.0, 1.2), 4).unwrap();
        let z = c64(0.7, 0.0);
        let lhs = bracket(c64(tp.scale(), 0.0) - z, &tp).unwrap();
        let rhs = bracket(z, &tp).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn trig_bracket_values() {
        assert_eq!(trig_bracket(c64(0.0, 0.0), 12).unwrap(), c64(0.0, 0.0));
        assert!((trig_bracket(c64(6.0, 0.0), 12).unwrap() - 1.0).norm() < 1e-15);
        assert!(trig_bracket(c64(1.0, 0.0), 1).is_err());
    }

    #[test]
    fn bracket_degenerates_to_trig() {
        // Im tau -> infinity: [z] / sin(pi z / (2L-2)) tends to a constant.
        let level = 4;
        let g = 2 * level - 2;
        let zs = [0.3, 0.9, 1.7, 2.8, 4.1];
        let mut prev: Option<Vec<Complex64>> = None;
        for im in [6.0, 9.0, 12.0] {
            let tp = ThetaParams::new(c64(0.0, im), level).unwrap();
            let ratios: Vec<Complex64> = zs
                .iter()
                .map(|&z| {
                    bracket(c64(z, 0.0), &tp).unwrap() / trig_bracket(c64(z, 0.0), g).unwrap()
                })
                .collect();
            let spread: f64 = ratios
                .iter()
                .map(|r| (r - ratios[0]).norm())
                .fold(0.0, f64::max);
            assert!(spread < 1e-6 * ratios[0].norm(), "spread {spread} at im {im}");
            if let Some(prev) = prev {
                assert!((ratios[0] - prev[0]).norm() < 1e-6 * ratios[0].norm());
            }
            prev = Some(ratios);
        }
    }

    #[test]
    fn truncation_stability() {
        // Doubling the theta window does not move the value.
        let tp = ThetaParams::new(c64(0.0, 1.2), 4).unwrap();
        let z = c64(0.41, 0.13);
        let base = theta_odd(z, &tp);
        let wide = {
            let i_pi = c64(0.0, std::f64::consts::PI);
            let n_max = 2 * theta_window(tp.tau.im);
            let mut acc = c64(0.0, 0.0);
            for n in -n_max..=n_max {
                let half = n as f64 + 0.5;
                acc += (i_pi * (half * half) * tp.tau + 2.0 * i_pi * half * (z + 0.5)).exp();
            }
            -acc
        };
        assert!((base - wide).norm() <= 1e-14 * wide.norm());
    }

    #[test]
    fn zeta_matches_definition() {
        let pr = params(0.05, 1.0);
        let phi_p = euler_phi(pr.p).unwrap();
        let phi_p2 = euler_phi(pr.p * pr.p).unwrap();
        let expect = pr.p.powf(-0.125) * phi_p / (phi_p2 * phi_p2);
        assert!((pr.zeta - expect).norm() < 1e-15 * expect.norm());
    }
}
