//! Single-mode Gaussian states.
//!
//! A state is given by its quadrature means and the real symmetric
//! covariance matrix. The Wigner function is
//! `W = (1/sqrt d) exp(-Q sigma^{-1} Q^T / 2)` with `Q = (p - <p>, q - <q>)`
//! and `sigma` laid out in the same `(p, q)` order, normalized so that
//! `(1/2pi) integral W dq dp = 1`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::fock::{
    displacement_matrix, make_state, quadratures, squeeze, DensityMatrix, OperatorMatrix, PhasePoint, StateKind,
};

/// Slack allowed below the uncertainty bound `d >= 1/4`.
pub const PHYSICAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub mean_q: f64,
    pub mean_p: f64,
    pub sigma_qq: f64,
    pub sigma_pp: f64,
    pub sigma_pq: f64,
}

/// `d` (determinant), `T` (trace) and `L = 1 + 2T + 4d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMoments {
    pub d: f64,
    pub t: f64,
    pub l: f64,
}

impl GaussianState {
    /// Validated constructor; requires a positive-definite covariance.
    pub fn new(mean_q: f64, mean_p: f64, sigma_qq: f64, sigma_pp: f64, sigma_pq: f64) -> Result<Self> {
        let g = Self { mean_q, mean_p, sigma_qq, sigma_pp, sigma_pq };
        g.validate()?;
        Ok(g)
    }

    pub fn vacuum() -> Self {
        Self::coherent(C64::new(0.0, 0.0))
    }

    /// Means `(sqrt2 Re alpha, sqrt2 Im alpha)`, vacuum covariance.
    pub fn coherent(alpha: C64) -> Self {
        let s2 = std::f64::consts::SQRT_2;
        Self { mean_q: s2 * alpha.re, mean_p: s2 * alpha.im, sigma_qq: 0.5, sigma_pp: 0.5, sigma_pq: 0.0 }
    }

    pub fn thermal(nbar: f64) -> Self {
        let v = nbar + 0.5;
        Self { mean_q: 0.0, mean_p: 0.0, sigma_qq: v, sigma_pp: v, sigma_pq: 0.0 }
    }

    /// `S(r)|0>`: `sigma_qq = e^{-2r}/2`, `sigma_pp = e^{2r}/2`.
    pub fn squeezed_vacuum(r: f64) -> Self {
        Self {
            mean_q: 0.0,
            mean_p: 0.0,
            sigma_qq: (-2.0 * r).exp() / 2.0,
            sigma_pp: (2.0 * r).exp() / 2.0,
            sigma_pq: 0.0,
        }
    }

    /// `D(alpha) S(r) rho_th(nbar) S^dagger D^dagger`.
    pub fn displaced_squeezed_thermal(alpha: C64, r: f64, nbar: f64) -> Self {
        let v = nbar + 0.5;
        let c = Self::coherent(alpha);
        Self { sigma_qq: v * (-2.0 * r).exp(), sigma_pp: v * (2.0 * r).exp(), ..c }
    }

    pub fn determinant(&self) -> f64 {
        self.sigma_qq * self.sigma_pp - self.sigma_pq * self.sigma_pq
    }

    /// Positive definiteness of the covariance.
    pub fn validate(&self) -> Result<()> {
        let vals = [self.mean_q, self.mean_p, self.sigma_qq, self.sigma_pp, self.sigma_pq];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(TomoError::Domain("Gaussian parameters must be finite".into()));
        }
        if !(self.sigma_qq > 0.0 && self.sigma_pp > 0.0 && self.determinant() > 0.0) {
            return Err(TomoError::Domain(format!(
                "covariance is not positive definite (sigma_qq = {}, sigma_pp = {}, d = {})",
                self.sigma_qq,
                self.sigma_pp,
                self.determinant()
            )));
        }
        Ok(())
    }

    /// Uncertainty bound `d >= 1/4` on top of [`Self::validate`].
    pub fn validate_physical(&self) -> Result<()> {
        self.validate()?;
        let d = self.determinant();
        if d < 0.25 - PHYSICAL_TOL {
            return Err(TomoError::Domain(format!("d = {d} violates the uncertainty bound d >= 1/4")));
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(s)?;
        g.validate()?;
        Ok(g)
    }
}

pub fn moments(g: &GaussianState) -> GaussianMoments {
    let d = g.determinant();
    let t = g.sigma_qq + g.sigma_pp;
    GaussianMoments { d, t, l: 1.0 + 2.0 * t + 4.0 * d }
}

/// Gaussian Wigner function at a phase-space point.
pub fn wigner_eval(g: &GaussianState, point: PhasePoint) -> Result<f64> {
    g.validate()?;
    let d = g.determinant();
    let dp = point.p - g.mean_p;
    let dq = point.q - g.mean_q;
    // inverse of [[spp, spq], [spq, sqq]] applied to (dp, dq)
    let quad = (g.sigma_qq * dp * dp - 2.0 * g.sigma_pq * dp * dq + g.sigma_pp * dq * dq) / d;
    Ok((-0.5 * quad).exp() / d.sqrt())
}

/// Fock-basis embedding together with its truncation bookkeeping.
#[derive(Clone, Debug)]
pub struct GaussianFock {
    pub state: DensityMatrix,
    pub leakage: f64,
    /// Trace lost to truncation and removed by renormalization.
    pub renormalization: f64,
    pub warning: bool,
}

/// Builds `D(alpha) S(r) rho_th S^dagger(r) D^dagger(alpha)` matching `g`.
///
/// Only diagonal covariances (`sigma_pq = 0`) are composable this way; the
/// parameters are `nbar = sqrt(d) - 1/2`, `r = ln(sigma_pp / sigma_qq) / 4`,
/// `alpha = (<q> + i<p>)/sqrt2`.
pub fn to_fock(g: &GaussianState, dim: usize) -> Result<GaussianFock> {
    g.validate_physical()?;
    if g.sigma_pq.abs() > PHYSICAL_TOL {
        return Err(TomoError::UnsupportedCovariance(format!(
            "sigma_pq = {} (rotated covariances are not composable from squeezing along q)",
            g.sigma_pq
        )));
    }
    let d = g.determinant();
    let nbar = (d.sqrt() - 0.5).max(0.0);
    let r = 0.25 * (g.sigma_pp / g.sigma_qq).ln();
    let alpha = PhasePoint::new(g.mean_q, g.mean_p).beta();

    let thermal = make_state(&StateKind::Thermal(nbar), dim)?;
    let mut op = thermal.state.op().clone();
    if r != 0.0 {
        let s = squeeze(r, dim)?;
        op = s.try_mul(&op)?.try_mul(&s.adjoint())?;
    }
    if alpha.norm() != 0.0 {
        let dm = displacement_matrix(alpha, dim)?;
        op = dm.try_mul(&op)?.try_mul(&dm.adjoint())?;
    }
    let trace_before = op.trace().re;
    let (state, renorm) = DensityMatrix::renormalized(&op)?;
    let lost = thermal.truncated_weight + (1.0 - trace_before).abs() + renorm;
    let leakage = state.leakage();
    Ok(GaussianFock { warning: leakage > 1e-8 || lost > 1e-8, state, leakage, renormalization: lost })
}

/// Means and covariances computed from a density matrix with the truncated
/// quadrature operators.
pub fn moments_of(rho: &DensityMatrix) -> Result<GaussianState> {
    let (q, p) = quadratures(rho.dim())?;
    let e = |o: &OperatorMatrix| rho.expectation(o).map(|z| z.re);
    let mq = e(&q)?;
    let mp = e(&p)?;
    let qq = e(&(&q * &q))?;
    let pp = e(&(&p * &p))?;
    let sym = &(&q * &p) + &(&p * &q);
    let qp = e(&sym)? / 2.0;
    Ok(GaussianState {
        mean_q: mq,
        mean_p: mp,
        sigma_qq: qq - mq * mq,
        sigma_pp: pp - mp * mp,
        sigma_pq: qp - mq * mp,
    })
}

/// Largest absolute difference over the five parameters.
pub fn max_parameter_diff(a: &GaussianState, b: &GaussianState) -> f64 {
    [
        a.mean_q - b.mean_q,
        a.mean_p - b.mean_p,
        a.sigma_qq - b.sigma_qq,
        a.sigma_pp - b.sigma_pp,
        a.sigma_pq - b.sigma_pq,
    ]
    .iter()
    .fold(0.0, |m, v| m.max(v.abs()))
}

/// Symplectic tomogram of a Gaussian state: a normal density in `X` with mean
/// `mu <q> + nu <p>` and variance `mu^2 sigma_qq + 2 mu nu sigma_pq + nu^2 sigma_pp`.
pub fn gaussian_tomogram(g: &GaussianState, x: f64, mu: f64, nu: f64) -> Result<f64> {
    if mu == 0.0 && nu == 0.0 {
        return Err(TomoError::DegenerateFrame);
    }
    let mean = mu * g.mean_q + nu * g.mean_p;
    let var = mu * mu * g.sigma_qq + 2.0 * mu * nu * g.sigma_pq + nu * nu * g.sigma_pp;
    let z = x - mean;
    Ok((-z * z / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt())
}

impl crate::symplectic::TomogramSource for GaussianState {
    fn tomogram(&self, x: f64, mu: f64, nu: f64) -> Result<f64> {
        gaussian_tomogram(self, x, mu, nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::wigner_from_fock;

    #[test]
    fn wigner_examples() {
        let vac = GaussianState::vacuum();
        assert!((wigner_eval(&vac, PhasePoint::new(0.0, 0.0)).unwrap() - 2.0).abs() < 1e-15);
        let w = wigner_eval(&vac, PhasePoint::new(1.0, 1.0)).unwrap();
        assert!((w - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        for nbar in [0.0, 0.3, 1.7] {
            let w = wigner_eval(&GaussianState::thermal(nbar), PhasePoint::new(0.0, 0.0)).unwrap();
            assert!((w - 1.0 / (nbar + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn wigner_normalized() {
        let g = GaussianState::new(0.3, -0.2, 0.8, 0.6, 0.25).unwrap();
        let h = 0.05;
        let mut acc = 0.0;
        for i in -200..=200 {
            for j in -200..=200 {
                acc += wigner_eval(&g, PhasePoint::new(i as f64 * h, j as f64 * h)).unwrap();
            }
        }
        assert!((acc * h * h / (2.0 * std::f64::consts::PI) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn singular_covariance_rejected() {
        assert!(GaussianState::new(0.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(GaussianState::new(0.0, 0.0, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn moments_examples() {
        let m = moments(&GaussianState::vacuum());
        assert_eq!((m.d, m.t, m.l), (0.25, 1.0, 4.0));
        let m = moments(&GaussianState::thermal(0.5));
        assert_eq!((m.d, m.t, m.l), (1.0, 2.0, 9.0));
        for r in [0.1, 0.4, 1.0] {
            let m = moments(&GaussianState::squeezed_vacuum(r));
            assert!((m.d - 0.25).abs() < 1e-15);
            assert!((m.t - (2.0 * r).cosh()).abs() < 1e-14);
            assert!((m.l - (2.0 + 2.0 * (2.0 * r).cosh())).abs() < 1e-13);
        }
    }

    #[test]
    fn to_fock_examples() {
        let vac = to_fock(&GaussianState::vacuum(), 16).unwrap().state;
        assert!((vac.op()[(0, 0)].re - 1.0).abs() < 1e-15);
        let th = to_fock(&GaussianState::thermal(0.5), 48).unwrap().state;
        for n in 0..10 {
            let expected = (1.0f64 / 3.0).powi(n as i32) * 2.0 / 3.0;
            assert!((th.op()[(n, n)].re - expected).abs() < 1e-14);
        }
        let coh = to_fock(&GaussianState::new(2f64.sqrt(), 0.0, 0.5, 0.5, 0.0).unwrap(), 48).unwrap().state;
        let reference = make_state(&StateKind::Coherent(C64::new(1.0, 0.0)), 48).unwrap().state;
        assert!(coh.op().max_abs_diff(reference.op()) < 1e-12);
    }

    #[test]
    fn to_fock_moment_closure() {
        let cases = [
            GaussianState::vacuum(),
            GaussianState::thermal(0.7),
            GaussianState::squeezed_vacuum(0.4),
            GaussianState::coherent(C64::new(0.6, -0.9)),
            GaussianState::displaced_squeezed_thermal(C64::new(-0.4, 0.5), 0.3, 0.4),
        ];
        for g in cases {
            let f = to_fock(&g, 64).unwrap();
            assert!(f.leakage < 1e-8, "{g:?} leakage {}", f.leakage);
            let m = moments_of(&f.state).unwrap();
            assert!(max_parameter_diff(&g, &m) < 1e-8, "{g:?} vs {m:?}");
        }
    }

    #[test]
    fn rotated_covariance_unsupported() {
        let g = GaussianState::new(0.0, 0.0, 1.0, 1.0, 0.2).unwrap();
        assert!(matches!(to_fock(&g, 16), Err(TomoError::UnsupportedCovariance(_))));
    }

    #[test]
    fn unphysical_rejected_by_to_fock() {
        let g = GaussianState::new(0.0, 0.0, 0.2, 0.2, 0.0).unwrap();
        assert!(matches!(to_fock(&g, 16), Err(TomoError::Domain(_))));
    }

    #[test]
    fn wigner_matches_fock_route() {
        let g = GaussianState::displaced_squeezed_thermal(C64::new(0.3, -0.2), 0.25, 0.3);
        let rho = to_fock(&g, 64).unwrap().state;
        for i in 0..21 {
            for j in 0..21 {
                let pt = PhasePoint::new(-3.0 + 0.3 * i as f64, -3.0 + 0.3 * j as f64);
                let a = wigner_eval(&g, pt).unwrap();
                let b = wigner_from_fock(&rho, pt).unwrap();
                assert!((a - b).abs() < 1e-6, "{pt:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let g = GaussianState::new(0.1, 0.2, 0.7, 0.9, -0.1).unwrap();
        let s = g.to_json_string().unwrap();
        assert!(s.contains("\"sigma_pq\""));
        assert_eq!(GaussianState::from_json_str(&s).unwrap(), g);
    }

    #[test]
    fn analytic_tomogram_matches_fock() {
        let g = GaussianState::squeezed_vacuum(0.3);
        let rho = to_fock(&g, 48).unwrap().state;
        for (x, mu, nu) in [(0.2, 1.0, 0.0), (-0.7, 0.4, 0.9), (1.1, -0.3, 1.2)] {
            let a = gaussian_tomogram(&g, x, mu, nu).unwrap();
            let b = crate::symplectic::tomogram_from_fock(&rho, x, mu, nu).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }
}
