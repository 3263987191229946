//! Symplectic and classical tomography.
//!
//! The symplectic tomogram `w(X, mu, nu)` is the probability density of the
//! observable `mu q + nu p`. For a Fock-basis state it is computed from the
//! rotated-quadrature eigenbasis; for a phase-space grid it is the Radon
//! transform (a line integral). The inverse map goes through the
//! characteristic function `G(mu, nu) = integral w(X, mu, nu) e^{iX} dX`
//! followed by a 2-D inverse Fourier transform with prefactor `1/4pi^2`.
//!
//! Phase-space grids used for tomography are normalized to unit integral so
//! that each slice integrates to 1 in `X`; grids in the `2 pi` (Wigner)
//! convention are rescaled on the way in and out.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Result, TomoError};
use crate::fock::{displacement_matrix, quadratures, DensityMatrix, OperatorMatrix, PhasePoint};
use crate::formats::{distinct_sorted, Axis, Convention, PhaseGrid, Table};
use crate::special::{hermite_functions, trapezoid_weights};
use crate::star_product::{Dequantizer, SymplecticPoint};

/// Anything that can evaluate `w(X, mu, nu)`.
pub trait TomogramSource: Sync {
    fn tomogram(&self, x: f64, mu: f64, nu: f64) -> Result<f64>;
}

impl TomogramSource for DensityMatrix {
    fn tomogram(&self, x: f64, mu: f64, nu: f64) -> Result<f64> {
        tomogram_from_fock(self, x, mu, nu)
    }
}

/// Adapts a closure into a [`TomogramSource`].
pub struct FnSource<F>(pub F);

impl<F: Fn(f64, f64, f64) -> f64 + Sync> TomogramSource for FnSource<F> {
    fn tomogram(&self, x: f64, mu: f64, nu: f64) -> Result<f64> {
        Ok((self.0)(x, mu, nu))
    }
}

fn frame(mu: f64, nu: f64) -> Result<(f64, f64)> {
    let r = mu.hypot(nu);
    if r == 0.0 {
        return Err(TomoError::DegenerateFrame);
    }
    Ok((r, nu.atan2(mu)))
}

/// `w(X, mu, nu) = <delta(mu q + nu p - X)>`.
///
/// With `r = |(mu, nu)|` and `theta = atan2(nu, mu)`,
/// `w = (1/r) sum_{mn} rho_{mn} e^{i(n-m) theta} psi_m(X/r) psi_n(X/r)`.
pub fn tomogram_from_fock(rho: &DensityMatrix, x: f64, mu: f64, nu: f64) -> Result<f64> {
    let (r, theta) = frame(mu, nu)?;
    let dim = rho.dim();
    let psi = hermite_functions(dim, x / r);
    let v: Vec<C64> = (0..dim).map(|n| C64::from_polar(psi[n], n as f64 * theta)).collect();
    let op = rho.op();
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..dim {
        let mut row = C64::new(0.0, 0.0);
        for n in 0..dim {
            row += op[(m, n)] * v[n];
        }
        acc += v[m].conj() * row;
    }
    Ok(acc.re / r)
}

/// Wigner function `W(q, p) = 2 Tr[rho D(beta) (-1)^{a^dagger a} D(-beta)]`,
/// normalized so that `(1/2pi) integral W dq dp = 1`.
///
/// Uses `D(beta) P D(-beta) = D(2 beta) P` with analytic displacement
/// elements, so no intermediate sum is cut at the truncation.
pub fn wigner_from_fock(rho: &DensityMatrix, point: PhasePoint) -> Result<f64> {
    let dim = rho.dim();
    let d = displacement_matrix(point.beta() * 2.0, dim)?;
    let op = rho.op();
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..dim {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for n in 0..dim {
            acc += op[(m, n)] * d[(n, m)] * sign;
        }
    }
    Ok(2.0 * acc.re)
}

/// Samples [`wigner_from_fock`] on a grid (two-pi convention).
pub fn wigner_grid_from_fock(rho: &DensityMatrix, q: Axis, p: Axis) -> Result<PhaseGrid> {
    let rows = map_indices(q.count, |iq| {
        (0..p.count)
            .map(|ip| wigner_from_fock(rho, PhasePoint::new(q.value(iq), p.value(ip))))
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(PhaseGrid { q, p, convention: Convention::TwoPi, values: rows.concat() })
}

/// `|W_{rho_alpha}(q, p) - W_rho(q + sqrt2 Re alpha, p + sqrt2 Im alpha)|` where
/// `rho_alpha = D^{-1}(alpha) rho D(alpha)` is formed by explicit conjugation.
pub fn wigner_displacement_check(rho: &DensityMatrix, alpha: C64, point: PhasePoint) -> Result<f64> {
    let dinv = displacement_matrix(-alpha, rho.dim())?;
    let (shifted, _) = DensityMatrix::renormalized(&rho.conjugated(&dinv)?)?;
    let lhs = wigner_from_fock(&shifted, point)?;
    let moved = PhasePoint::new(
        point.q + std::f64::consts::SQRT_2 * alpha.re,
        point.p + std::f64::consts::SQRT_2 * alpha.im,
    );
    let rhs = wigner_from_fock(rho, moved)?;
    Ok((lhs - rhs).abs())
}

/// Dequantizer `U(X, mu, nu) = delta(X - mu q - nu p)` in the truncated basis,
/// `(1/r) |x_theta = X/r><x_theta = X/r|` with `<n|x_theta> = e^{i n theta} psi_n`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SymplecticScheme;

impl Dequantizer for SymplecticScheme {
    type Point = SymplecticPoint;

    fn label(&self) -> &str {
        "symplectic"
    }

    fn coordinate_names(&self) -> Vec<String> {
        vec!["X".into(), "mu".into(), "nu".into()]
    }

    fn coordinates(&self, x: &SymplecticPoint) -> Vec<f64> {
        vec![x.x, x.mu, x.nu]
    }

    fn dequantizer(&self, x: &SymplecticPoint, dim: usize) -> Result<OperatorMatrix> {
        let (r, theta) = frame(x.mu, x.nu)?;
        let psi = hermite_functions(dim, x.x / r);
        let v: Vec<C64> = (0..dim).map(|n| C64::from_polar(psi[n], n as f64 * theta)).collect();
        OperatorMatrix::from_fn(dim, |m, n| v[m] * v[n].conj() / r)
    }
}

impl SymplecticScheme {
    /// Quantizer `D(X, mu, nu) = exp(i(X - mu q - nu p)) / 2pi`, via the
    /// eigendecomposition of the truncated `mu q + nu p`.
    pub fn quantizer(&self, x: &SymplecticPoint, dim: usize) -> Result<OperatorMatrix> {
        let (q, p) = quadratures(dim)?;
        let h = &q.scale(C64::new(x.mu, 0.0)) + &p.scale(C64::new(x.nu, 0.0));
        let eig = SymmetricEigen::new(h.hermitian_part().into_matrix());
        let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, -l));
        let v = &eig.eigenvectors;
        let m = v * DMatrix::from_diagonal(&phases) * v.adjoint();
        Ok(OperatorMatrix::from_matrix(m)?.scale(C64::from_polar(1.0 / (2.0 * PI), x.x)))
    }
}

/// One `(mu, nu)` slice of a sampled tomogram.
#[derive(Clone, Debug, PartialEq)]
pub struct TomogramSlice {
    pub mu: f64,
    pub nu: f64,
    pub x: Axis,
    pub w: Vec<f64>,
}

impl TomogramSlice {
    /// Linear interpolation in `X`; `None` outside the sampled range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let t = (x - self.x.start) / self.x.step;
        let last = (self.x.count - 1) as f64;
        if !(-1e-9..=last + 1e-9).contains(&t) {
            return None;
        }
        let t = t.clamp(0.0, last);
        let i = (t.floor() as usize).min(self.x.count - 2);
        let f = t - i as f64;
        Some(self.w[i] * (1.0 - f) + self.w[i + 1] * f)
    }

    /// Trapezoid `integral w dX`.
    pub fn integral(&self) -> f64 {
        trapezoid_weights(self.x.count, self.x.step).iter().zip(&self.w).map(|(a, b)| a * b).sum()
    }
}

/// A symplectic tomogram sampled on a set of `(mu, nu)` slices.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticTomogram {
    pub slices: Vec<TomogramSlice>,
}

impl SymplecticTomogram {
    /// Samples `source` on the given slices, each with its own `X` axis.
    pub fn sample(source: &dyn TomogramSource, slices: &[(f64, f64, Axis)]) -> Result<Self> {
        let out = map_indices(slices.len(), |j| {
            let (mu, nu, axis) = slices[j];
            let w = (0..axis.count)
                .map(|i| source.tomogram(axis.value(i), mu, nu))
                .collect::<Result<Vec<f64>>>()?;
            Ok(TomogramSlice { mu, nu, x: axis, w })
        })?;
        Ok(Self { slices: out })
    }

    /// Optical slices `mu = cos phi`, `nu = sin phi` at `phi_j = j pi / n_angles`.
    pub fn sample_optical(source: &dyn TomogramSource, n_angles: usize, x: Axis) -> Result<Self> {
        let slices: Vec<(f64, f64, Axis)> = optical_angles(n_angles)
            .into_iter()
            .map(|phi| (phi.cos(), phi.sin(), x))
            .collect();
        Self::sample(source, &slices)
    }

    /// Value at a sampled slice with exactly these `(mu, nu)`, interpolated in `X`.
    pub fn lookup_exact(&self, x: f64, mu: f64, nu: f64) -> Option<f64> {
        self.slices
            .iter()
            .find(|s| (s.mu - mu).abs() <= 1e-12 && (s.nu - nu).abs() <= 1e-12)
            .and_then(|s| s.interpolate(x))
    }

    pub fn len(&self) -> usize {
        self.slices.iter().map(|s| s.w.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV with columns `X, mu, nu, w`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["X", "mu", "nu", "w"]);
        for s in &self.slices {
            for (i, w) in s.w.iter().enumerate() {
                t.push(vec![s.x.value(i), s.mu, s.nu, *w]);
            }
        }
        t
    }

    /// Parses the `X, mu, nu, w` table; rows are grouped by `(mu, nu)` and
    /// each group must be uniformly spaced in `X`.
    pub fn from_table(t: &Table) -> Result<Self> {
        let (cx, cm, cn, cw) = (t.column("X")?, t.column("mu")?, t.column("nu")?, t.column("w")?);
        let mut groups: Vec<(f64, f64, Vec<(f64, f64)>)> = Vec::new();
        for row in &t.rows {
            let (mu, nu) = (row[cm], row[cn]);
            match groups.iter_mut().find(|g| g.0 == mu && g.1 == nu) {
                Some(g) => g.2.push((row[cx], row[cw])),
                None => groups.push((mu, nu, vec![(row[cx], row[cw])])),
            }
        }
        let mut slices = Vec::with_capacity(groups.len());
        for (mu, nu, mut pts) in groups {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let xs = distinct_sorted(pts.iter().map(|p| p.0));
            if xs.len() != pts.len() {
                return Err(TomoError::Format(format!("duplicate X samples in slice ({mu}, {nu})")));
            }
            let axis = Axis::from_samples(&xs)?;
            slices.push(TomogramSlice { mu, nu, x: axis, w: pts.into_iter().map(|p| p.1).collect() });
        }
        Ok(Self { slices })
    }
}

impl TomogramSource for SymplecticTomogram {
    /// Looks up a slice along the same direction (either orientation) and
    /// rescales with `w(lX, l mu, l nu) = w(X, mu, nu) / |l|`.
    fn tomogram(&self, x: f64, mu: f64, nu: f64) -> Result<f64> {
        let (r, theta) = frame(mu, nu)?;
        for s in &self.slices {
            let (rs, ts) = frame(s.mu, s.nu)?;
            let dt = (theta - ts).rem_euclid(2.0 * PI);
            let lambda = if dt.abs() < 1e-12 || (2.0 * PI - dt).abs() < 1e-12 {
                r / rs
            } else if (dt - PI).abs() < 1e-12 {
                -r / rs
            } else {
                continue;
            };
            return s
                .interpolate(x / lambda)
                .map(|w| w / lambda.abs())
                .ok_or_else(|| TomoError::Grid(format!("X = {x} outside sampled range")));
        }
        Err(TomoError::Grid(format!("direction ({mu}, {nu}) not sampled")))
    }
}

/// `phi_j = j pi / n` for `j < n`.
pub fn optical_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 * PI / n as f64).collect()
}

/// The homodyne slice `w(X, cos phi, sin phi)` on `x`.
pub fn optical_slice(source: &dyn TomogramSource, phi: f64, x: Axis) -> Result<Vec<f64>> {
    let phi = phi.rem_euclid(2.0 * PI);
    let (mu, nu) = (phi.cos(), phi.sin());
    (0..x.count).map(|i| source.tomogram(x.value(i), mu, nu)).collect()
}

// Keys cubic convolution kernel, a = -1/2.
fn cubic_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        -0.5 * t3 + t2 - 0.5 * t,
        1.5 * t3 - 2.5 * t2 + 1.0,
        -1.5 * t3 + 2.0 * t2 + 0.5 * t,
        0.5 * t3 - 0.5 * t2,
    ]
}

/// Bicubic interpolation of a grid, zero outside.
fn interpolate_grid(g: &PhaseGrid, q: f64, p: f64) -> f64 {
    let fq = (q - g.q.start) / g.q.step;
    let fp = (p - g.p.start) / g.p.step;
    if fq < -1.0 || fp < -1.0 || fq > g.q.count as f64 || fp > g.p.count as f64 {
        return 0.0;
    }
    let iq = fq.floor() as i64;
    let ip = fp.floor() as i64;
    let wq = cubic_weights(fq - iq as f64);
    let wp = cubic_weights(fp - ip as f64);
    let mut acc = 0.0;
    for (a, wa) in wq.iter().enumerate() {
        let jq = iq - 1 + a as i64;
        if jq < 0 || jq >= g.q.count as i64 {
            continue;
        }
        let row = jq as usize * g.p.count;
        for (b, wb) in wp.iter().enumerate() {
            let jp = ip - 1 + b as i64;
            if jp < 0 || jp >= g.p.count as i64 {
                continue;
            }
            acc += wa * wb * g.values[row + jp as usize];
        }
    }
    acc
}

/// Radon transform `w(X, mu, nu) = integral f delta(mu q + nu p - X) dq dp`,
/// returned in the unit-integral normalization (so `integral w dX = 1` for a
/// normalized grid of either convention).
pub fn radon(f: &PhaseGrid, x: f64, mu: f64, nu: f64) -> Result<f64> {
    let (r, theta) = frame(mu, nu)?;
    let (c, s) = (theta.cos(), theta.sin());
    let s0 = x / r;
    let h = f.q.step.min(f.p.step);
    let reach = f.q.start.abs().max(f.q.end().abs()).hypot(f.p.start.abs().max(f.p.end().abs())) + 2.0 * h;
    let n = (reach / h).ceil() as i64;
    let mut acc = 0.0;
    for k in -n..=n {
        let t = k as f64 * h;
        acc += interpolate_grid(f, s0 * c - t * s, s0 * s + t * c);
    }
    Ok(acc * h / r / f.convention.total())
}

/// Radon transform on optical slices `phi_j = j pi / n_angles`.
pub fn radon_tomogram(f: &PhaseGrid, n_angles: usize, x: Axis) -> Result<SymplecticTomogram> {
    let angles = optical_angles(n_angles);
    let slices = map_indices(n_angles, |j| {
        let (mu, nu) = (angles[j].cos(), angles[j].sin());
        let w = (0..x.count).map(|i| radon(f, x.value(i), mu, nu)).collect::<Result<Vec<f64>>>()?;
        Ok(TomogramSlice { mu, nu, x, w })
    })?;
    Ok(SymplecticTomogram { slices })
}

/// Result of [`inverse_radon`].
#[derive(Clone, Debug)]
pub struct InverseRadon {
    pub grid: PhaseGrid,
    /// Largest radius at which `|G|` exceeds `1e-4 |G(0)|`.
    pub bandwidth: f64,
    /// Set when the arc length between neighbouring angles at `bandwidth`
    /// exceeds 0.5, i.e. the angular sampling under-resolves `G`.
    pub aliasing_warning: bool,
}

/// Inverts optical slices back to a phase-space grid.
///
/// Requires slices at `phi_j = j pi / n` sharing one `X` axis. Computes
/// `G(r, phi) = integral w(X, phi) e^{i r X} dX` on a polar frequency grid
/// (the homogeneity `w(X, r cos, r sin) = w(X/r, cos, sin)/r` turns this into
/// the characteristic function at `(r cos phi, r sin phi)`), interpolates it
/// bilinearly onto the Cartesian frequency lattice of the output grid, and
/// applies the inverse Fourier transform
/// `f(q, p) = (1/4pi^2) integral G(mu, nu) e^{-i(mu q + nu p)} dmu dnu`.
pub fn inverse_radon(
    tomo: &SymplecticTomogram,
    q: Axis,
    p: Axis,
    convention: Convention,
) -> Result<InverseRadon> {
    let n_angles = tomo.slices.len();
    if n_angles < 2 {
        return Err(TomoError::Grid("need at least two angles".into()));
    }
    let x_axis = tomo.slices[0].x;
    for (j, s) in tomo.slices.iter().enumerate() {
        let phi = j as f64 * PI / n_angles as f64;
        if (s.mu - phi.cos()).abs() > 1e-9 || (s.nu - phi.sin()).abs() > 1e-9 {
            return Err(TomoError::Grid(format!(
                "slice {j} is not at phi = {j} pi / {n_angles} on the unit circle"
            )));
        }
        if s.x != x_axis {
            return Err(TomoError::Grid("slices must share one X axis".into()));
        }
    }

    // polar characteristic function
    let dk = (2.0 * PI / (q.count as f64 * q.step)).min(2.0 * PI / (p.count as f64 * p.step));
    // radial interpolation error scales as dr^2; dk/16 keeps it well below 1e-4
    let dr = dk / 16.0;
    let r_max = PI / x_axis.step;
    let n_r = (r_max / dr).ceil() as usize + 2;
    let xw = trapezoid_weights(x_axis.count, x_axis.step);
    let xs = x_axis.values();
    let polar: Vec<Vec<C64>> = map_indices(n_angles, |j| {
        let w = &tomo.slices[j].w;
        Ok((0..n_r)
            .map(|l| {
                let r = l as f64 * dr;
                xs.iter()
                    .zip(&xw)
                    .zip(w)
                    .map(|((x, a), v)| C64::from_polar(a * v, r * x))
                    .sum::<C64>()
            })
            .collect())
    })?;

    let g0 = polar.iter().map(|row| row[0].norm()).fold(0.0, f64::max);
    let mut bandwidth: f64 = 0.0;
    for l in 0..n_r {
        if polar.iter().any(|row| row[l].norm() > 1e-4 * g0) {
            bandwidth = l as f64 * dr;
        }
    }
    let aliasing_warning = bandwidth * PI / n_angles as f64 > 0.5;

    let dphi = PI / n_angles as f64;
    let g_at = |kq: f64, kp: f64| -> C64 {
        let mut r = kq.hypot(kp);
        if r > r_max {
            return C64::new(0.0, 0.0);
        }
        let mut phi = kp.atan2(kq);
        let mut conj = false;
        if phi < 0.0 {
            phi += PI;
            conj = !conj;
        }
        if phi >= PI {
            phi -= PI;
            conj = !conj;
        }
        r = r.min(r_max);
        let a = phi / dphi;
        let j0 = (a.floor() as usize).min(n_angles - 1);
        let fa = a - j0 as f64;
        let rl = r / dr;
        let l0 = (rl.floor() as usize).min(n_r - 2);
        let fr = rl - l0 as f64;
        let radial = |j: usize| polar[j][l0] * (1.0 - fr) + polar[j][l0 + 1] * fr;
        let v0 = radial(j0);
        // phi_{n} = pi wraps to phi_0 with r -> -r
        let v1 = if j0 + 1 < n_angles { radial(j0 + 1) } else { radial(0).conj() };
        let v = v0 * (1.0 - fa) + v1 * fa;
        if conj {
            v.conj()
        } else {
            v
        }
    };

    let (mq, mp) = (q.count, p.count);
    let dkq = 2.0 * PI / (mq as f64 * q.step);
    let dkp = 2.0 * PI / (mp as f64 * p.step);
    let freq = |m: usize, count: usize| -> f64 {
        let m = m as i64;
        let c = count as i64;
        (if m < (c + 1) / 2 { m } else { m - c }) as f64
    };
    let mut spectrum = vec![C64::new(0.0, 0.0); mq * mp];
    for a in 0..mq {
        let kq = freq(a, mq) * dkq;
        for b in 0..mp {
            let kp = freq(b, mp) * dkp;
            let shift = C64::from_polar(1.0, -(kq * q.start + kp * p.start));
            spectrum[a * mp + b] = g_at(kq, kp) * shift;
        }
    }
    fft2_forward(&mut spectrum, mq, mp);
    let scale = dkq * dkp / (4.0 * PI * PI) * convention.total();
    let values = spectrum.iter().map(|z| z.re * scale).collect();
    Ok(InverseRadon {
        grid: PhaseGrid { q, p, convention, values },
        bandwidth,
        aliasing_warning,
    })
}

// In-place 2-D forward DFT (kernel e^{-2 pi i jk/N}) of a row-major rows x cols array.
fn fft2_forward(data: &mut [C64], rows: usize, cols: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft_forward(cols);
    for row in data.chunks_mut(cols) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_forward(rows);
    let mut column = vec![C64::new(0.0, 0.0); rows];
    for b in 0..cols {
        for a in 0..rows {
            column[a] = data[a * cols + b];
        }
        col_fft.process(&mut column);
        for a in 0..rows {
            data[a * cols + b] = column[a];
        }
    }
}

/// Residual of the homogeneity law at one scale factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneityResidual {
    pub lambda: f64,
    /// `max |w(lX, l mu, l nu) |l| - w(X, mu, nu)|`, `None` when no scaled
    /// sample was available.
    pub max_residual: Option<f64>,
}

/// Report produced by [`validate_tomogram`].
#[derive(Clone, Debug)]
pub struct TomogramReport {
    /// Most negative sample (0 if none are negative).
    pub max_negativity: f64,
    pub negative_samples: usize,
    /// `|integral w dX - 1|` per slice.
    pub normalization_errors: Vec<f64>,
    pub homogeneity: Vec<HomogeneityResidual>,
}

/// Scale factors probed by [`validate_tomogram`].
pub const HOMOGENEITY_LAMBDAS: [f64; 3] = [-2.0, 0.5, 3.0];

/// Tolerance below which a sample counts as nonnegative.
pub const NEGATIVITY_TOL: f64 = 1e-12;

impl TomogramReport {
    pub fn max_normalization_error(&self) -> f64 {
        self.normalization_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_homogeneity_residual(&self) -> Option<f64> {
        self.homogeneity.iter().filter_map(|h| h.max_residual).reduce(f64::max)
    }

    /// Whether every check holds at the given tolerances.
    pub fn passes(&self, normalization_tol: f64, homogeneity_tol: f64) -> bool {
        self.max_negativity >= -NEGATIVITY_TOL
            && self.max_normalization_error() <= normalization_tol
            && self.max_homogeneity_residual().map_or(true, |r| r <= homogeneity_tol)
    }
}

/// Checks nonnegativity, per-slice normalization, and homogeneity.
///
/// Homogeneity is evaluated against `source` when given; otherwise only
/// sample pairs whose scaled slice is itself stored in the tomogram are
/// compared.
pub fn validate_tomogram(tomo: &SymplecticTomogram, source: Option<&dyn TomogramSource>) -> TomogramReport {
    validate_tomogram_at(tomo, source, &HOMOGENEITY_LAMBDAS)
}

pub fn validate_tomogram_at(
    tomo: &SymplecticTomogram,
    source: Option<&dyn TomogramSource>,
    lambdas: &[f64],
) -> TomogramReport {
    let mut min = 0.0f64;
    let mut negative = 0;
    for s in &tomo.slices {
        for &w in &s.w {
            if w < -NEGATIVITY_TOL {
                negative += 1;
            }
            min = min.min(w);
        }
    }
    let normalization_errors = tomo.slices.iter().map(|s| (s.integral() - 1.0).abs()).collect();
    let homogeneity = lambdas
        .iter()
        .map(|&lambda| {
            let mut worst: Option<f64> = None;
            for s in &tomo.slices {
                for (i, &w) in s.w.iter().enumerate() {
                    let x = s.x.value(i);
                    let scaled = match source {
                        Some(src) => src.tomogram(lambda * x, lambda * s.mu, lambda * s.nu).ok(),
                        None => tomo.lookup_exact(lambda * x, lambda * s.mu, lambda * s.nu),
                    };
                    if let Some(v) = scaled {
                        let res = (v * lambda.abs() - w).abs();
                        worst = Some(worst.map_or(res, |c: f64| c.max(res)));
                    }
                }
            }
            HomogeneityResidual { lambda, max_residual: worst }
        })
        .collect();
    TomogramReport { max_negativity: min, negative_samples: negative, normalization_errors, homogeneity }
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    // collect first so that the reported error is the lowest-index one
    let out: Vec<Result<T>> = (0..n).into_par_iter().map(f).collect();
    out.into_iter().collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).map(f).collect()
}
