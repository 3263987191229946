//! Truncated Fock-space linear algebra.
//!
//! Every operator lives in the basis `{|0>, ..., |N-1>}` as a dense complex
//! matrix. Ladder operators follow the usual truncation: `a` drops the
//! component above `|N-1>`, so commutators pick up a defect in the last
//! diagonal entry.

use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::special::{laguerre, ln_factorials};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-10;

/// Fraction of the basis treated as "bulk" by [`DensityMatrix::leakage`].
pub const BULK_FRACTION: f64 = 0.75;

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(TomoError::InvalidDimension { dim });
    }
    Ok(())
}

/// Dense square complex matrix acting on the truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    m: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(TomoError::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        check_dim(m.nrows())?;
        Ok(Self { m })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { m: DMatrix::from_fn(dim, dim, f) })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { m: DMatrix::zeros(dim, dim) })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { m: DMatrix::identity(dim, dim) })
    }

    pub fn diagonal(values: &[C64]) -> Result<Self> {
        let dim = values.len();
        Self::from_fn(dim, |i, j| if i == j { values[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { m: &self.m * factor }
    }

    /// Matrix product with a dimension check.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self { m: &self.m * &other.m })
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        self.same_dim(other)?;
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.m[(i, k)] * other.m[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(TomoError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> Self {
        Self { m: (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0) }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.block_max_abs_diff(other, self.dim().min(other.dim()))
    }

    /// Largest entrywise deviation on the top-left `block x block` corner.
    pub fn block_max_abs_diff(&self, other: &Self, block: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..block {
            for j in 0..block {
                worst = worst.max((self.m[(i, j)] - other.m[(i, j)]).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.hermitian_part().m);
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    /// Matrix exponential (scaling and squaring with a Pade approximant).
    pub fn exp(&self) -> Self {
        Self { m: self.m.clone().exp() }
    }
}

impl Index<(usize, usize)> for OperatorMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.m[idx]
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    /// Panics on a dimension mismatch; use [`OperatorMatrix::try_mul`] for a checked product.
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { m: &self.m * &rhs.m }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { m: &self.m - &rhs.m }
    }
}

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: OperatorMatrix,
}

impl DensityMatrix {
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let herm = op.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(TomoError::NotDensity(format!("hermiticity error {herm:e}")));
        }
        let tr = op.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(TomoError::NotDensity(format!("trace {tr}")));
        }
        let min_eig = op.hermitian_eigenvalues()[0];
        if min_eig < -EIGEN_TOL {
            return Err(TomoError::NotDensity(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { op })
    }

    /// Symmetrizes and renormalizes `op` before validating it. Returns the
    /// state and the trace correction `|1 - Tr op|` that was removed.
    pub fn renormalized(op: &OperatorMatrix) -> Result<(Self, f64)> {
        let herm = op.hermitian_part();
        let tr = herm.trace().re;
        if !(tr > 0.0) {
            return Err(TomoError::NotDensity(format!("nonpositive trace {tr}")));
        }
        let rho = herm.scale(C64::new(1.0 / tr, 0.0));
        Ok((Self::new(rho)?, (1.0 - tr).abs()))
    }

    /// `|psi><psi|` for a normalized amplitude vector.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let dim = amplitudes.len();
        let op = OperatorMatrix::from_fn(dim, |i, j| amplitudes[i] * amplitudes[j].conj())?;
        Self::new(op)
    }

    pub fn op(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.op[(n, n)].re).collect()
    }

    /// `Tr(rho O)`.
    pub fn expectation(&self, o: &OperatorMatrix) -> Result<C64> {
        self.op.trace_product(o)
    }

    pub fn purity(&self) -> f64 {
        self.op.trace_product(&self.op).map(|z| z.re).unwrap_or(f64::NAN)
    }

    /// Truncation leakage: the population outside the lowest 75% of levels.
    pub fn leakage(&self) -> f64 {
        let bulk = ((self.dim() as f64) * BULK_FRACTION).ceil() as usize;
        let inside: f64 = self.populations()[..bulk].iter().sum();
        (1.0 - inside).max(0.0)
    }

    /// Unitary (or merely linear) conjugation `U rho U^dagger`.
    pub fn conjugated(&self, u: &OperatorMatrix) -> Result<OperatorMatrix> {
        let left = u.try_mul(&self.op)?;
        left.try_mul(&u.adjoint())
    }

    pub fn to_json(&self) -> DensityJson {
        let n = self.dim();
        DensityJson {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| self.op[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| self.op[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_json())?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: DensityJson = serde_json::from_str(s)?;
        Self::new(raw.into_operator()?)
    }
}

/// On-disk form of a density matrix: `{"dim": N, "re": [[..]], "im": [[..]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DensityJson {
    pub fn into_operator(self) -> Result<OperatorMatrix> {
        let n = self.dim;
        let rows_ok = self.re.len() == n
            && self.im.len() == n
            && self.re.iter().chain(self.im.iter()).all(|r| r.len() == n);
        if !rows_ok {
            return Err(TomoError::Format(format!("matrix payload is not {n}x{n}")));
        }
        OperatorMatrix::from_fn(n, |i, j| C64::new(self.re[i][j], self.im[i][j]))
    }

    pub fn from_operator(op: &OperatorMatrix) -> Self {
        let n = op.dim();
        Self {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| op[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| op[(i, j)].im).collect()).collect(),
        }
    }
}

/// Phase-space point in dimensionless quadratures (hbar = 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    /// `beta = (q + i p) / sqrt(2)`.
    pub fn beta(&self) -> C64 {
        C64::new(self.q, self.p) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn from_beta(beta: C64) -> Self {
        Self { q: beta.re * std::f64::consts::SQRT_2, p: beta.im * std::f64::consts::SQRT_2 }
    }
}

/// Annihilation and creation operators, `a|n> = sqrt(n)|n-1>`.
pub fn ladder(dim: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let a = OperatorMatrix::from_fn(dim, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })?;
    let ad = a.adjoint();
    Ok((a, ad))
}

/// `q = (a + a^dagger)/sqrt 2`, `p = (a - a^dagger)/(i sqrt 2)`.
pub fn quadratures(dim: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (a, ad) = ladder(dim)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + &ad).scale(C64::new(s, 0.0));
    let p = (&a - &ad).scale(C64::new(0.0, -s));
    Ok((q, p))
}

pub fn number_operator(dim: usize) -> Result<OperatorMatrix> {
    let diag: Vec<C64> = (0..dim).map(|n| C64::new(n as f64, 0.0)).collect();
    OperatorMatrix::diagonal(&diag)
}

/// Photon-number parity `(-1)^{a^dagger a}`.
pub fn parity(dim: usize) -> Result<OperatorMatrix> {
    let diag: Vec<C64> = (0..dim)
        .map(|n| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    OperatorMatrix::diagonal(&diag)
}

/// A displacement operator together with its truncation diagnostics.
#[derive(Clone, Debug)]
pub struct Displacement {
    pub matrix: OperatorMatrix,
    /// Number of leading columns whose norm deficit is below `1e-12`; the
    /// top-left `trusted_dim` block is unitary to working precision.
    pub trusted_dim: usize,
    /// Set when `|alpha|^2 > N/4`.
    pub near_truncation: bool,
}

/// Exact matrix element `<m|D(alpha)|n>` of the untruncated displacement
/// operator, via associated Laguerre polynomials.
pub fn displacement_element(alpha: C64, m: usize, n: usize, ln_fact: &[f64]) -> C64 {
    let x = alpha.norm_sqr();
    let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
    let k = hi - lo;
    // (m >= n): alpha^k ; (m < n): (-alpha*)^k
    let base = if m >= n { alpha } else { -alpha.conj() };
    if k > 0 && base.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let log_mag = 0.5 * (ln_fact[lo] - ln_fact[hi]) - 0.5 * x
        + if k > 0 { k as f64 * base.norm().ln() } else { 0.0 };
    let phase = C64::from_polar(1.0, k as f64 * base.arg());
    phase * (log_mag.exp() * laguerre(lo, k as f64, x))
}

/// All analytic elements `<m|D(alpha)|n>`, `m, n < dim`, in `O(dim^2)`: each
/// diagonal `m - n = k` runs the Laguerre recurrence in the lower index.
pub fn displacement_matrix(alpha: C64, dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    let lf = ln_factorials(dim);
    let x = alpha.norm_sqr();
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        if k > 0 && x == 0.0 {
            break;
        }
        let kf = k as f64;
        let ln_abs = if k > 0 { kf * alpha.norm().ln() } else { 0.0 };
        let below = C64::from_polar(1.0, kf * alpha.arg());
        let above = C64::from_polar(1.0, kf * (-alpha.conj()).arg());
        let (mut prev, mut cur) = (0.0, 1.0);
        for lo in 0..dim - k {
            // cur = L_lo^{(k)}(x)
            if lo == 1 {
                prev = 1.0;
                cur = 1.0 + kf - x;
            } else if lo > 1 {
                let j = (lo - 1) as f64;
                let next = ((2.0 * j + 1.0 + kf - x) * cur - (j + kf) * prev) / (j + 1.0);
                prev = cur;
                cur = next;
            }
            let mag = (0.5 * (lf[lo] - lf[lo + k]) - 0.5 * x + ln_abs).exp() * cur;
            m[(lo + k, lo)] = below * mag;
            if k > 0 {
                m[(lo, lo + k)] = above * mag;
            }
        }
    }
    OperatorMatrix::from_matrix(m)
}

/// `D(alpha) = exp(alpha a^dagger - alpha* a)` from analytic matrix elements.
///
/// This is the compression of the infinite-dimensional operator onto the
/// truncated basis; it is exactly unitary only on the leading block reported
/// in [`Displacement::trusted_dim`].
pub fn displacement(alpha: C64, dim: usize) -> Result<Displacement> {
    let matrix = displacement_matrix(alpha, dim)?;
    let mut trusted_dim = 0;
    for n in 0..dim {
        let norm: f64 = (0..dim).map(|m| matrix[(m, n)].norm_sqr()).sum();
        if (1.0 - norm).abs() < 1e-12 {
            trusted_dim = n + 1;
        } else {
            break;
        }
    }
    Ok(Displacement {
        matrix,
        trusted_dim,
        near_truncation: alpha.norm_sqr() > dim as f64 / 4.0,
    })
}

/// Displacement as the matrix exponential of the truncated generator
/// `alpha a^dagger - alpha* a`. Exactly unitary in the truncated space, but
/// its entries near the top of the basis differ from the analytic ones.
pub fn displacement_expm(alpha: C64, dim: usize) -> Result<OperatorMatrix> {
    let (a, ad) = ladder(dim)?;
    let gen = &ad.scale(alpha) - &a.scale(alpha.conj());
    Ok(gen.exp())
}

/// Squeeze operator `S(r) = exp((r/2)(a^2 - a^dagger^2))`; `S(r)|0>` has
/// `Var(q) = e^{-2r}/2`.
pub fn squeeze(r: f64, dim: usize) -> Result<OperatorMatrix> {
    let (a, ad) = ladder(dim)?;
    let gen = &(&a * &a) - &(&ad * &ad);
    Ok(gen.scale(C64::new(0.5 * r, 0.0)).exp())
}

/// State families used as fixtures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateKind {
    Fock(usize),
    Coherent(C64),
    Thermal(f64),
    SqueezedVacuum(f64),
}

impl std::str::FromStr for StateKind {
    type Err = TomoError;

    /// Accepts `vacuum`, `fock:N`, `coherent:RE[,IM]`, `thermal:NBAR`, `squeezed:R`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || TomoError::Domain(format!("unrecognized state spec '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a)),
            None => (s.trim(), None),
        };
        match (kind, arg) {
            ("vacuum", None) => Ok(StateKind::Fock(0)),
            ("fock", Some(a)) => a.trim().parse().map(StateKind::Fock).map_err(|_| bad()),
            ("coherent", Some(a)) => {
                let mut parts = a.split(',');
                let re = num(parts.next().ok_or_else(bad)?)?;
                let im = match parts.next() {
                    Some(t) => num(t)?,
                    None => 0.0,
                };
                if parts.next().is_some() {
                    return Err(bad());
                }
                Ok(StateKind::Coherent(C64::new(re, im)))
            }
            ("thermal", Some(a)) => Ok(StateKind::Thermal(num(a)?)),
            ("squeezed", Some(a)) => Ok(StateKind::SqueezedVacuum(num(a)?)),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for StateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateKind::Fock(0) => write!(f, "vacuum"),
            StateKind::Fock(n) => write!(f, "fock:{n}"),
            StateKind::Coherent(a) => write!(f, "coherent:{},{}", a.re, a.im),
            StateKind::Thermal(nbar) => write!(f, "thermal:{nbar}"),
            StateKind::SqueezedVacuum(r) => write!(f, "squeezed:{r}"),
        }
    }
}

/// A constructed state with its truncation bookkeeping.
#[derive(Clone, Debug)]
pub struct PreparedState {
    pub state: DensityMatrix,
    /// Probability weight of the untruncated state above `|N-1>`.
    pub truncated_weight: f64,
    /// Trace correction applied by renormalization.
    pub renormalization: f64,
    pub leakage: f64,
    pub warning: bool,
}

/// Builds a fixture state in the truncated basis, renormalized to unit trace.
pub fn make_state(kind: &StateKind, dim: usize) -> Result<PreparedState> {
    check_dim(dim)?;
    let lf = ln_factorials(dim);
    let (op, truncated_weight) = match *kind {
        StateKind::Fock(n) => {
            if n >= dim {
                return Err(TomoError::IndexOutOfRange { index: n, dim });
            }
            let mut amp = vec![C64::new(0.0, 0.0); dim];
            amp[n] = C64::new(1.0, 0.0);
            (outer(&amp)?, 0.0)
        }
        StateKind::Coherent(alpha) => {
            let amp: Vec<C64> = (0..dim).map(|n| displacement_element(alpha, n, 0, &lf)).collect();
            let kept: f64 = amp.iter().map(|c| c.norm_sqr()).sum();
            (outer(&amp)?, (1.0 - kept).max(0.0))
        }
        StateKind::Thermal(nbar) => {
            if !(nbar >= 0.0) || !nbar.is_finite() {
                return Err(TomoError::Domain(format!("thermal occupation must be >= 0, got {nbar}")));
            }
            let ratio = nbar / (nbar + 1.0);
            let probs: Vec<C64> =
                (0..dim).map(|n| C64::new(ratio.powi(n as i32) / (nbar + 1.0), 0.0)).collect();
            (OperatorMatrix::diagonal(&probs)?, ratio.powi(dim as i32))
        }
        StateKind::SqueezedVacuum(r) => {
            if !r.is_finite() {
                return Err(TomoError::Domain(format!("squeezing must be finite, got {r}")));
            }
            let amp = squeezed_vacuum_amplitudes(r, dim, &lf);
            let kept: f64 = amp.iter().map(|c| c.norm_sqr()).sum();
            (outer(&amp)?, (1.0 - kept).max(0.0))
        }
    };
    let (state, renormalization) = DensityMatrix::renormalized(&op)?;
    let leakage = state.leakage();
    Ok(PreparedState {
        warning: truncated_weight > 1e-8 || renormalization > 1e-6,
        state,
        truncated_weight,
        renormalization,
        leakage,
    })
}

fn outer(amp: &[C64]) -> Result<OperatorMatrix> {
    OperatorMatrix::from_fn(amp.len(), |i, j| amp[i] * amp[j].conj())
}

/// `S(r)|0> = (cosh r)^{-1/2} sum_m (-tanh r)^m sqrt((2m)!)/(2^m m!) |2m>`.
fn squeezed_vacuum_amplitudes(r: f64, dim: usize, lf: &[f64]) -> Vec<C64> {
    let t = r.tanh();
    let pref = -0.5 * r.cosh().ln();
    (0..dim)
        .map(|n| {
            if n % 2 == 1 {
                return C64::new(0.0, 0.0);
            }
            let m = n / 2;
            if m > 0 && t == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let log_mag = pref + 0.5 * lf[n] - m as f64 * 2f64.ln() - lf[m]
                + if m > 0 { m as f64 * t.abs().ln() } else { 0.0 };
            // sign of (-tanh r)^m
            let sign = if t > 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
            C64::new(sign * log_mag.exp(), 0.0)
        })
        .collect()
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2` between a
/// reference state and an arbitrary (possibly unphysical) reconstruction.
///
/// `sigma` is Hermitized and negative eigenvalues of the inner product are
/// clipped. For a pure reference this reduces to `<psi|sigma|psi>`.
pub fn fidelity(reference: &DensityMatrix, sigma: &OperatorMatrix) -> Result<f64> {
    reference.op().same_dim(sigma)?;
    let eig = SymmetricEigen::new(reference.op().hermitian_part().into_matrix());
    let sqrt_vals = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let vecs = &eig.eigenvectors;
    let sqrt_rho = vecs * DMatrix::from_diagonal(&sqrt_vals) * vecs.adjoint();
    let inner = &sqrt_rho * sigma.hermitian_part().as_matrix() * &sqrt_rho;
    let inner = OperatorMatrix::from_matrix(inner)?;
    let s: f64 = inner.hermitian_eigenvalues().iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(s * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ladder_small() {
        let (a, ad) = ladder(2).unwrap();
        assert_eq!(a[(0, 1)], c(1.0));
        assert_eq!(a[(0, 0)], c(0.0));
        assert_eq!(a[(1, 0)], c(0.0));
        assert_eq!(a[(1, 1)], c(0.0));
        assert_eq!(ad, a.adjoint());
        let (a3, _) = ladder(3).unwrap();
        assert!((a3[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ladder_commutator_truncation_defect() {
        let n = 16;
        let (a, ad) = ladder(n).unwrap();
        let comm = &(&a * &ad) - &(&ad * &a);
        for i in 0..n {
            for j in 0..n {
                let expected = match (i == j, i == n - 1) {
                    (true, true) => -((n - 1) as f64),
                    (true, false) => 1.0,
                    _ => 0.0,
                };
                assert!((comm[(i, j)] - c(expected)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_dimension() {
        assert!(matches!(ladder(1), Err(TomoError::InvalidDimension { dim: 1 })));
        assert!(parity(0).is_err());
        assert!(quadratures(1).is_err());
    }

    #[test]
    fn quadrature_conventions() {
        let (q, p) = quadratures(2).unwrap();
        assert!((q[(0, 1)].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let (q8, p8) = quadratures(8).unwrap();
        assert!(q8.hermiticity_error() < 1e-15);
        assert!(p8.hermiticity_error() < 1e-15);
        assert!(p.hermiticity_error() < 1e-15);
        let vac = make_state(&StateKind::Fock(0), 32).unwrap().state;
        let (q32, _) = quadratures(32).unwrap();
        let q2 = &q32 * &q32;
        assert!((vac.expectation(&q2).unwrap().re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn parity_diagonal() {
        let p2 = parity(2).unwrap();
        assert_eq!(p2[(0, 0)], c(1.0));
        assert_eq!(p2[(1, 1)], c(-1.0));
        let p5 = parity(5).unwrap();
        let diag: Vec<f64> = (0..5).map(|i| p5[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, 1.0, -1.0, 1.0]);
        assert_eq!(parity(6).unwrap().trace(), c(0.0));
    }

    #[test]
    fn parity_anticommutes_with_annihilation() {
        let n = 10;
        let (a, _) = ladder(n).unwrap();
        let par = parity(n).unwrap();
        let lhs = &par * &a;
        let rhs = (&a * &par).scale(c(-1.0));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn displacement_zero_is_identity() {
        for n in [2, 7, 20] {
            let d = displacement(C64::new(0.0, 0.0), n).unwrap();
            assert_eq!(d.matrix.max_abs_diff(&OperatorMatrix::identity(n).unwrap()), 0.0);
            assert_eq!(d.trusted_dim, n);
        }
    }

    #[test]
    fn displacement_column_zero_is_coherent_state() {
        let d = displacement(c(1.0), 32).unwrap();
        let mut fact = 1.0;
        for n in 0..32 {
            if n > 0 {
                fact *= n as f64;
            }
            let expected = (-0.5f64).exp() / fact.sqrt();
            assert!((d.matrix[(n, 0)] - c(expected)).norm() < 1e-15);
        }
    }

    #[test]
    fn diagonal_recurrence_matches_elementwise() {
        let lf = ln_factorials(40);
        for alpha in [C64::new(0.7, -1.1), C64::new(0.0, 2.0), C64::new(-3.0, 0.5)] {
            let d = displacement_matrix(alpha, 40).unwrap();
            for m in 0..40 {
                for n in 0..40 {
                    let e = displacement_element(alpha, m, n, &lf);
                    assert!((d[(m, n)] - e).norm() < 1e-13, "{m},{n}");
                }
            }
        }
    }

    #[test]
    fn analytic_matches_expm_on_trusted_block() {
        for alpha in [C64::new(0.5, 0.5), C64::new(-1.0, 0.3), C64::new(0.0, 1.5)] {
            let d = displacement(alpha, 48).unwrap();
            let e = displacement_expm(alpha, 48).unwrap();
            assert!(d.trusted_dim >= 16, "trusted {} for {alpha}", d.trusted_dim);
            assert!(d.matrix.block_max_abs_diff(&e, d.trusted_dim) < 1e-10);
        }
    }

    #[test]
    fn displacement_unitarity() {
        let alpha = C64::new(0.5, 0.5);
        let n = 48;
        let id = OperatorMatrix::identity(n).unwrap();
        // full truncated space: the expm route is exactly unitary
        let e = displacement_expm(alpha, n).unwrap();
        assert!((&e * &e.adjoint()).max_abs_diff(&id) <= 1e-10);
        // analytic production route: unitary on its trusted block
        let d = displacement(alpha, n).unwrap();
        let prod = &d.matrix * &d.matrix.adjoint();
        assert!(prod.block_max_abs_diff(&id, d.trusted_dim) <= 1e-10);
        assert!(!d.near_truncation);
        assert!(displacement(C64::new(4.0, 0.0), 48).unwrap().near_truncation);
    }

    #[test]
    fn displacement_inverse() {
        for n in [48, 64] {
            let id = OperatorMatrix::identity(n).unwrap();
            for alpha in [C64::new(2.0, 0.0), C64::new(-1.2, 1.4), C64::new(0.3, -0.9)] {
                let e = &displacement_expm(alpha, n).unwrap() * &displacement_expm(-alpha, n).unwrap();
                assert!(e.max_abs_diff(&id) <= 1e-9);
                let d = displacement(alpha, n).unwrap();
                let prod = &d.matrix * &displacement(-alpha, n).unwrap().matrix;
                assert!(prod.block_max_abs_diff(&id, d.trusted_dim) <= 1e-9);
            }
        }
    }

    #[test]
    fn displacement_composition_phase_law() {
        let n = 64;
        let pairs = [
            (C64::new(0.3, -0.7), C64::new(1.0, 0.5)),
            (C64::new(-0.8, 0.2), C64::new(0.4, 0.9)),
            (C64::new(1.1, 0.0), C64::new(0.0, -1.0)),
        ];
        for (beta, alpha) in pairs {
            let lhs = &displacement(beta, n).unwrap().matrix * &displacement(alpha, n).unwrap().matrix;
            let phase = C64::from_polar(1.0, (beta * alpha.conj()).im);
            let rhs = displacement(alpha + beta, n).unwrap().matrix.scale(phase);
            assert!(lhs.block_max_abs_diff(&rhs, n / 2) <= 1e-8);
        }
    }

    #[test]
    fn fixture_states_are_valid() {
        let kinds = [
            StateKind::Fock(0),
            StateKind::Fock(3),
            StateKind::Coherent(C64::new(1.0, -0.5)),
            StateKind::Thermal(0.5),
            StateKind::SqueezedVacuum(0.4),
        ];
        for k in kinds {
            let prep = make_state(&k, 40).unwrap();
            let rho = prep.state.op();
            assert!(rho.hermiticity_error() <= 1e-12);
            assert!((rho.trace() - 1.0).norm() <= 1e-10);
            assert!(rho.hermitian_eigenvalues()[0] >= -1e-10);
            assert!(!prep.warning, "{k}");
        }
    }

    #[test]
    fn fixture_values() {
        let vac = make_state(&StateKind::Fock(0), 8).unwrap().state;
        for i in 0..8 {
            for j in 0..8 {
                let e = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert_eq!(vac.op()[(i, j)], c(e));
            }
        }
        let th = make_state(&StateKind::Thermal(0.5), 40).unwrap().state;
        assert!((th.op()[(0, 0)].re - 2.0 / 3.0).abs() < 1e-15);
        let coh = make_state(&StateKind::Coherent(c(1.0)), 32).unwrap().state;
        assert!((coh.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn squeezed_vacuum_matches_operator() {
        let n = 60;
        let r = 0.4;
        let sv = make_state(&StateKind::SqueezedVacuum(r), n).unwrap().state;
        let s = squeeze(r, n).unwrap();
        let vac = make_state(&StateKind::Fock(0), n).unwrap().state;
        let via_op = vac.conjugated(&s).unwrap();
        assert!(sv.op().block_max_abs_diff(&via_op, 30) < 1e-10);
        let (q, p) = quadratures(n).unwrap();
        let vq = sv.expectation(&(&q * &q)).unwrap().re;
        let vp = sv.expectation(&(&p * &p)).unwrap().re;
        assert!((vq - (-2.0 * r).exp() / 2.0).abs() < 1e-10);
        assert!((vp - (2.0 * r).exp() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn unphysical_parameters_rejected() {
        assert!(matches!(make_state(&StateKind::Thermal(-0.1), 10), Err(TomoError::Domain(_))));
        assert!(make_state(&StateKind::Fock(10), 10).is_err());
    }

    #[test]
    fn truncation_warning_flag() {
        let prep = make_state(&StateKind::Coherent(c(3.0)), 12).unwrap();
        assert!(prep.warning);
        assert!(prep.truncated_weight > 1e-8);
        assert!(prep.leakage > 0.0);
    }

    #[test]
    fn density_json_round_trip_is_exact() {
        let rho = make_state(&StateKind::Coherent(C64::new(0.7, -0.3)), 12).unwrap().state;
        let s = rho.to_json_string().unwrap();
        let back = DensityMatrix::from_json_str(&s).unwrap();
        assert_eq!(back, rho);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["dim"], 12);
    }

    #[test]
    fn density_json_rejects_ragged() {
        let s = r#"{"dim":2,"re":[[1,0],[0]],"im":[[0,0],[0,0]]}"#;
        assert!(matches!(DensityMatrix::from_json_str(s), Err(TomoError::Format(_))));
    }

    #[test]
    fn fidelity_pure_reference() {
        let vac = make_state(&StateKind::Fock(0), 6).unwrap().state;
        let th = make_state(&StateKind::Thermal(0.3), 6).unwrap().state;
        let f = fidelity(&vac, th.op()).unwrap();
        assert!((f - th.op()[(0, 0)].re).abs() < 1e-12);
        assert!((fidelity(&th, th.op()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn state_spec_parsing() {
        assert_eq!("vacuum".parse::<StateKind>().unwrap(), StateKind::Fock(0));
        assert_eq!("thermal:0.5".parse::<StateKind>().unwrap(), StateKind::Thermal(0.5));
        assert_eq!("coherent:1,0.5".parse::<StateKind>().unwrap(), StateKind::Coherent(C64::new(1.0, 0.5)));
        assert_eq!("squeezed:0.4".parse::<StateKind>().unwrap(), StateKind::SqueezedVacuum(0.4));
        assert!("banana".parse::<StateKind>().is_err());
    }
}
