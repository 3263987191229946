//! Photon-number tomography.
//!
//! The tomogram is `omega(n, alpha) = <n| D(alpha) rho D^dagger(alpha) |n>`,
//! the photon statistics of the displaced state. This is the symbol of `rho`
//! for the dequantizer `U(n, alpha) = D^dagger(alpha) |n><n| D(alpha)`. The
//! other conjugation order `D^dagger rho D` is the same function at `-alpha`.
//!
//! Reconstruction uses the s-ordered quantizer
//! `c t^{-n} D^dagger(alpha) t^{a^dagger a} D(alpha)` with `t = (s-1)/(s+1)` and
//! `c = 4 / (pi (1 - s^2))`, integrated over a disk in the `alpha` plane.
//!
//! For Gaussian states the tomogram also has a closed form through the
//! two-variable Hermite polynomials, `omega = P0 H_nn(y1, y2) / n!`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::fock::{displacement_matrix, DensityMatrix, OperatorMatrix};
use crate::formats::{distinct_sorted, Axis, Table};
use crate::gaussian::{moments, to_fock, GaussianState};
use crate::hermite2::{HermiteContext, SymmetricMatrix2};
use crate::special::{ln_factorials, trapezoid_weights};
use crate::star_product::{Dequantizer, Quantizer, SampledSymbol};
use crate::symplectic::map_indices;

/// `|alpha|^2` above `dim / 4` is flagged as close to the truncation.
pub fn truncation_warning(alpha: C64, dim: usize) -> bool {
    alpha.norm_sqr() > dim as f64 / 4.0
}

/// `omega(n, alpha)` for `n = 0..=n_max`.
pub fn pn_distribution(rho: &DensityMatrix, alpha: C64, n_max: usize) -> Result<Vec<f64>> {
    let dim = rho.dim();
    if n_max >= dim {
        return Err(TomoError::IndexOutOfRange { index: n_max, dim });
    }
    let d = displacement_matrix(alpha, dim)?;
    let dm = d.as_matrix();
    let r = rho.op().as_matrix();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        // <n|D rho D^dagger|n> = row_n(D) rho row_n(D)^dagger
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..dim {
            let dj = dm[(n, j)];
            if dj == C64::new(0.0, 0.0) {
                continue;
            }
            let mut inner = C64::new(0.0, 0.0);
            for k in 0..dim {
                inner += r[(j, k)] * dm[(n, k)].conj();
            }
            acc += dj * inner;
        }
        out.push(acc.re);
    }
    Ok(out)
}

/// `omega(n, alpha) = <n| D(alpha) rho D^dagger(alpha) |n>`.
///
/// The other conjugation order, `<n| D^dagger rho D |n>`, is `omega(n, -alpha)`.
pub fn pn_tomogram(rho: &DensityMatrix, n: usize, alpha: C64) -> Result<f64> {
    if n >= rho.dim() {
        return Err(TomoError::IndexOutOfRange { index: n, dim: rho.dim() });
    }
    Ok(pn_distribution(rho, alpha, n)?[n])
}

/// Square grid `[-radius, radius]^2` in `(Re alpha, Im alpha)` with `count`
/// points per side; nodes outside the disk of that radius get zero weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub radius: f64,
    pub count: usize,
}

impl AlphaGrid {
    pub fn axis(&self) -> Result<Axis> {
        if !(self.radius > 0.0) || self.count < 2 {
            return Err(TomoError::Grid(format!(
                "alpha grid needs radius > 0 and at least 2 points, got {} and {}",
                self.radius, self.count
            )));
        }
        Axis::symmetric(self.radius, self.count)
    }

    /// Disk nodes in row-major `(Re, Im)` order with their trapezoid weights.
    pub fn nodes(&self) -> Result<Vec<(C64, f64)>> {
        let axis = self.axis()?;
        let w = trapezoid_weights(axis.count, axis.step);
        let mut out = Vec::new();
        for i in 0..axis.count {
            for j in 0..axis.count {
                let alpha = C64::new(axis.value(i), axis.value(j));
                if alpha.norm() <= self.radius + 1e-12 {
                    out.push((alpha, w[i] * w[j]));
                }
            }
        }
        Ok(out)
    }
}

/// Parameters of the s-ordered reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub s: f64,
    pub n_max: usize,
    pub grid: AlphaGrid,
    pub dim: usize,
}

impl ReconstructionConfig {
    /// Accepts `0 <= s < 1` so that `|t| <= 1`; `s = 0` is the parity
    /// (Wigner) quantizer.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.s) {
            return Err(TomoError::Domain(format!("s must satisfy 0 <= s < 1, got {}", self.s)));
        }
        if self.n_max >= self.dim {
            return Err(TomoError::Domain(format!(
                "n_max must be below the truncation N = {}, got {}",
                self.dim, self.n_max
            )));
        }
        self.grid.axis()?;
        Ok(())
    }

    pub fn t(&self) -> f64 {
        (self.s - 1.0) / (self.s + 1.0)
    }

    pub fn prefactor(&self) -> f64 {
        4.0 / (PI * (1.0 - self.s * self.s))
    }
}

/// `c t^{-n} D^dagger(alpha) t^{a^dagger a} D(alpha)`, which equals
/// `c t^{(a^dagger + alpha*)(a + alpha) - n}`.
pub fn pn_quantizer(n: usize, alpha: C64, cfg: &ReconstructionConfig) -> Result<OperatorMatrix> {
    cfg.validate()?;
    let t = cfg.t();
    let d = displacement_matrix(alpha, cfg.dim)?;
    let powers: Vec<C64> = (0..cfg.dim).map(|k| C64::new(t.powi(k as i32), 0.0)).collect();
    let tn = OperatorMatrix::diagonal(&powers)?;
    let core = d.adjoint().try_mul(&tn)?.try_mul(&d)?;
    Ok(core.scale(C64::new(cfg.prefactor() * t.powi(-(n as i32)), 0.0)))
}

/// Label `(n, alpha)` of the photon-number scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonPoint {
    pub n: usize,
    pub alpha: C64,
}

/// Dequantizer/quantizer pair of photon-number tomography.
#[derive(Clone, Copy, Debug)]
pub struct PhotonScheme {
    pub cfg: ReconstructionConfig,
}

impl Dequantizer for PhotonScheme {
    type Point = PhotonPoint;

    fn label(&self) -> &str {
        "photon-number"
    }

    fn coordinate_names(&self) -> Vec<String> {
        vec!["n".into(), "re_alpha".into(), "im_alpha".into()]
    }

    fn coordinates(&self, x: &PhotonPoint) -> Vec<f64> {
        vec![x.n as f64, x.alpha.re, x.alpha.im]
    }

    fn dequantizer(&self, x: &PhotonPoint, dim: usize) -> Result<OperatorMatrix> {
        if x.n >= dim {
            return Err(TomoError::IndexOutOfRange { index: x.n, dim });
        }
        let d = displacement_matrix(x.alpha, dim)?;
        // D^dagger |n> is the conjugated n-th row of D
        let v: Vec<C64> = (0..dim).map(|k| d[(x.n, k)].conj()).collect();
        OperatorMatrix::from_fn(dim, |i, j| v[i] * v[j].conj())
    }
}

impl Quantizer for PhotonScheme {
    type Point = PhotonPoint;

    fn quantizer(&self, x: &PhotonPoint, dim: usize) -> Result<OperatorMatrix> {
        pn_quantizer(x.n, x.alpha, &ReconstructionConfig { dim, ..self.cfg })
    }

    /// For each disk node (row-major), `n = 0..=n_max`.
    fn quadrature(&self) -> Result<Vec<(PhotonPoint, f64)>> {
        self.cfg.validate()?;
        let mut out = Vec::new();
        for (alpha, w) in self.cfg.grid.nodes()? {
            for n in 0..=self.cfg.n_max {
                out.push((PhotonPoint { n, alpha }, w));
            }
        }
        Ok(out)
    }

    fn same_point(&self, a: &PhotonPoint, b: &PhotonPoint) -> bool {
        a.n == b.n && (a.alpha - b.alpha).norm() <= 1e-12
    }

    fn reconstruct(&self, symbol: &SampledSymbol<PhotonPoint>, dim: usize) -> Result<OperatorMatrix> {
        let nodes = self.quadrature()?;
        crate::star_product::check_nodes(self, &nodes, symbol)?;
        let per_alpha = self.cfg.n_max + 1;
        let blocks: Vec<(C64, f64, Vec<f64>)> = nodes
            .chunks(per_alpha)
            .zip(symbol.values.chunks(per_alpha))
            .map(|(ns, vs)| (ns[0].0.alpha, ns[0].1, vs.iter().map(|v| v.re).collect()))
            .collect();
        let cfg = ReconstructionConfig { dim, ..self.cfg };
        Ok(reconstruct_blocks(&blocks, &cfg)?.operator)
    }
}

/// Photon-number tomogram on `n = 0..=n_max` and a rectangular alpha grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonTomogram {
    pub n_max: usize,
    pub re: Axis,
    pub im: Axis,
    /// `values[(i_re * im.count + i_im) * (n_max + 1) + n]`
    pub values: Vec<f64>,
}

impl PhotonTomogram {
    pub fn index(&self, i_re: usize, i_im: usize, n: usize) -> usize {
        (i_re * self.im.count + i_im) * (self.n_max + 1) + n
    }

    pub fn get(&self, i_re: usize, i_im: usize, n: usize) -> f64 {
        self.values[self.index(i_re, i_im, n)]
    }

    /// The distribution over `n` at one grid node.
    pub fn distribution(&self, i_re: usize, i_im: usize) -> &[f64] {
        let start = self.index(i_re, i_im, 0);
        &self.values[start..start + self.n_max + 1]
    }

    pub fn alpha(&self, i_re: usize, i_im: usize) -> C64 {
        C64::new(self.re.value(i_re), self.im.value(i_im))
    }

    /// Samples the matrix route on every grid node.
    pub fn sample(rho: &DensityMatrix, n_max: usize, re: Axis, im: Axis) -> Result<Self> {
        let rows = map_indices(re.count, |i| {
            let mut row = Vec::with_capacity(im.count * (n_max + 1));
            for j in 0..im.count {
                row.extend(pn_distribution(rho, C64::new(re.value(i), im.value(j)), n_max)?);
            }
            Ok(row)
        })?;
        Ok(Self { n_max, re, im, values: rows.concat() })
    }

    /// Samples the Gaussian closed form (with matrix fallback where it is singular).
    pub fn sample_gaussian(g: &GaussianState, n_max: usize, re: Axis, im: Axis) -> Result<(Self, Vec<String>)> {
        let rows = map_indices(re.count, |i| {
            let mut row = Vec::with_capacity(im.count * (n_max + 1));
            let mut notes = Vec::new();
            for j in 0..im.count {
                let out = pn_distribution_gaussian(g, C64::new(re.value(i), im.value(j)), n_max)?;
                if let Some(d) = out.diagnostic {
                    notes.push(d);
                }
                row.extend(out.values);
            }
            Ok((row, notes))
        })?;
        let mut values = Vec::with_capacity(re.count * im.count * (n_max + 1));
        let mut notes = Vec::new();
        for (r, n) in rows {
            values.extend(r);
            notes.extend(n);
        }
        notes.dedup();
        Ok((Self { n_max, re, im, values }, notes))
    }

    pub fn zeros(n_max: usize, re: Axis, im: Axis) -> Self {
        Self { n_max, re, im, values: vec![0.0; re.count * im.count * (n_max + 1)] }
    }

    /// `max_alpha |sum_n omega(n, alpha) - 1|`.
    pub fn max_normalization_error(&self) -> f64 {
        self.values
            .chunks(self.n_max + 1)
            .map(|c| (c.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pointwise `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.re != other.re || self.im != other.im || self.n_max != other.n_max {
            return Err(TomoError::Grid("tomograms are sampled on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { values, ..self.clone() })
    }

    /// CSV with columns `n, re_alpha, im_alpha, omega`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["n", "re_alpha", "im_alpha", "omega"]);
        for i in 0..self.re.count {
            for j in 0..self.im.count {
                for n in 0..=self.n_max {
                    t.push(vec![n as f64, self.re.value(i), self.im.value(j), self.get(i, j, n)]);
                }
            }
        }
        t
    }

    pub fn from_table(t: &Table) -> Result<Self> {
        let (cn, cr, ci, cw) = (t.column("n")?, t.column("re_alpha")?, t.column("im_alpha")?, t.column("omega")?);
        if t.rows.is_empty() {
            return Err(TomoError::Format("empty photon-number tomogram".into()));
        }
        let re = Axis::from_samples(&distinct_sorted(t.rows.iter().map(|r| r[cr])))?;
        let im = Axis::from_samples(&distinct_sorted(t.rows.iter().map(|r| r[ci])))?;
        let mut n_max = 0usize;
        for r in &t.rows {
            let n = r[cn];
            if n < 0.0 || n.fract() != 0.0 {
                return Err(TomoError::Format(format!("photon number {n} is not a nonnegative integer")));
            }
            n_max = n_max.max(n as usize);
        }
        let mut out = Self::zeros(n_max, re, im);
        let mut seen = vec![false; out.values.len()];
        for r in &t.rows {
            let i = re.index_of(r[cr], 1e-9).ok_or_else(|| TomoError::Format("re_alpha off grid".into()))?;
            let j = im.index_of(r[ci], 1e-9).ok_or_else(|| TomoError::Format("im_alpha off grid".into()))?;
            let k = out.index(i, j, r[cn] as usize);
            if seen[k] {
                return Err(TomoError::Format("duplicate (n, alpha) row".into()));
            }
            seen[k] = true;
            out.values[k] = r[cw];
        }
        if seen.iter().any(|s| !s) {
            return Err(TomoError::Format("tomogram does not cover the full (n, alpha) grid".into()));
        }
        Ok(out)
    }
}

/// Output of [`pn_reconstruct`].
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub operator: OperatorMatrix,
    /// `max_alpha |t^{-n_max} omega(n_max, alpha)|`: size of the last term kept in the `n` sum.
    pub n_tail: f64,
    /// `max |sum_n t^{-n} omega|` over disk nodes within one grid step of the rim.
    pub disk_tail: f64,
    pub nodes: usize,
}

const GUARD_BLOCK: usize = 4;

// Largest |term| per block of GUARD_BLOCK consecutive n; growth over the last
// three blocks means the series in t^{-n} is not converging within n_max.
fn diverging(terms: &[f64]) -> bool {
    let mags: Vec<f64> = terms
        .chunks(GUARD_BLOCK)
        .map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    if mags.len() < 3 {
        return false;
    }
    let k = mags.len();
    mags[k - 1] > 1e-10 && mags[k - 3] < mags[k - 2] && mags[k - 2] < mags[k - 1]
}

// blocks: (alpha, weight, omega(0..=n_max))
fn reconstruct_blocks(blocks: &[(C64, f64, Vec<f64>)], cfg: &ReconstructionConfig) -> Result<Reconstruction> {
    cfg.validate()?;
    let t = cfg.t();
    let c = cfg.prefactor();
    let step = cfg.grid.axis()?.step;
    let powers: Vec<C64> = (0..cfg.dim).map(|k| C64::new(t.powi(k as i32), 0.0)).collect();
    let tn = OperatorMatrix::diagonal(&powers)?;

    // per-alpha factors, in node order
    let mut factors = Vec::with_capacity(blocks.len());
    let mut n_tail = 0.0f64;
    let mut disk_tail = 0.0f64;
    for (alpha, w, omega) in blocks {
        let terms: Vec<f64> = omega
            .iter()
            .take(cfg.n_max + 1)
            .enumerate()
            .map(|(n, v)| v * t.powi(-(n as i32)))
            .collect();
        if diverging(&terms) {
            return Err(TomoError::Divergence { re_alpha: alpha.re, im_alpha: alpha.im });
        }
        let s: f64 = terms.iter().sum();
        n_tail = n_tail.max(terms.last().map_or(0.0, |v| v.abs()));
        if alpha.norm() > cfg.grid.radius - step {
            disk_tail = disk_tail.max(s.abs());
        }
        factors.push((*alpha, w * c * s));
    }

    // contiguous chunks summed in parallel, then combined pairwise in a fixed order
    const CHUNK: usize = 32;
    let n_chunks = factors.len().div_ceil(CHUNK);
    let partial = map_indices(n_chunks, |k| {
        let mut acc = OperatorMatrix::zeros(cfg.dim)?;
        for &(alpha, f) in &factors[k * CHUNK..((k + 1) * CHUNK).min(factors.len())] {
            if f == 0.0 {
                continue;
            }
            let d = displacement_matrix(alpha, cfg.dim)?;
            let term = d.adjoint().try_mul(&tn)?.try_mul(&d)?;
            acc = &acc + &term.scale(C64::new(f, 0.0));
        }
        Ok(acc)
    })?;
    let operator = pairwise_sum(partial, cfg.dim)?;
    Ok(Reconstruction { operator, n_tail, disk_tail, nodes: blocks.len() })
}

fn pairwise_sum(mut parts: Vec<OperatorMatrix>, dim: usize) -> Result<OperatorMatrix> {
    if parts.is_empty() {
        return OperatorMatrix::zeros(dim);
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(&a + &b),
                None => next.push(a),
            }
        }
        parts = next;
    }
    Ok(parts.pop().expect("nonempty"))
}

/// Reconstructs the density operator from a photon-number tomogram.
///
/// The tomogram's alpha grid must be the configured square grid; nodes
/// outside the disk are ignored and `n` runs to `cfg.n_max`.
pub fn pn_reconstruct(omega: &PhotonTomogram, cfg: &ReconstructionConfig) -> Result<Reconstruction> {
    cfg.validate()?;
    let axis = cfg.grid.axis()?;
    let same = |a: &Axis| a.count == axis.count && (a.start - axis.start).abs() < 1e-9 && (a.step - axis.step).abs() < 1e-9;
    if !same(&omega.re) || !same(&omega.im) {
        return Err(TomoError::Grid(format!(
            "tomogram grid does not match the configured {}x{} grid on [-{r}, {r}]^2",
            axis.count,
            axis.count,
            r = cfg.grid.radius
        )));
    }
    if omega.n_max < cfg.n_max {
        return Err(TomoError::Grid(format!(
            "tomogram stops at n = {} but n_max = {}",
            omega.n_max, cfg.n_max
        )));
    }
    let w = trapezoid_weights(axis.count, axis.step);
    let mut blocks = Vec::new();
    for i in 0..axis.count {
        for j in 0..axis.count {
            let alpha = omega.alpha(i, j);
            if alpha.norm() <= cfg.grid.radius + 1e-12 {
                blocks.push((alpha, w[i] * w[j], omega.distribution(i, j).to_vec()));
            }
        }
    }
    reconstruct_blocks(&blocks, cfg)
}

/// `R = (1/L) [[2(spp - sqq - 2i spq), 1 - 4d], [1 - 4d, 2(spp - sqq + 2i spq)]]`.
pub fn r_matrix(g: &GaussianState) -> Result<SymmetricMatrix2> {
    let m = moments(g);
    if m.l == 0.0 {
        return Err(TomoError::SingularDenominator("L = 1 + 2T + 4d vanishes".into()));
    }
    let diff = g.sigma_pp - g.sigma_qq;
    let off = C64::new((1.0 - 4.0 * m.d) / m.l, 0.0);
    Ok(SymmetricMatrix2 {
        r11: C64::new(2.0 * diff, -4.0 * g.sigma_pq) / m.l,
        r12: off,
        r22: C64::new(2.0 * diff, 4.0 * g.sigma_pq) / m.l,
    })
}

/// Relative size below which `2T - 4d - 1` counts as zero.
pub const Y_DENOMINATOR_TOL: f64 = 1e-15;

/// Hermite arguments `(y1, y2 = y1*)`.
pub fn y_args(g: &GaussianState, alpha: C64) -> Result<(C64, C64)> {
    let m = moments(g);
    // 2T - 4d - 1 written without cancellation near the coherent-state zero
    let den = 4.0 * g.sigma_pq * g.sigma_pq - (2.0 * g.sigma_qq - 1.0) * (2.0 * g.sigma_pp - 1.0);
    if den.abs() <= Y_DENOMINATOR_TOL * m.l {
        return Err(TomoError::SingularDenominator(format!("2T - 4d - 1 = {den:e}")));
    }
    let mean = C64::new(g.mean_q, g.mean_p);
    let a = mean.conj() + alpha.conj() * SQRT_2;
    let b = mean + alpha * SQRT_2;
    let skew = C64::new(g.sigma_pp - g.sigma_qq, 2.0 * g.sigma_pq);
    let y1 = (a * (m.t - 1.0) + skew * b) * (SQRT_2 / den);
    Ok((y1, y1.conj()))
}

/// Probability of zero photons in the displaced Gaussian state.
pub fn p0(g: &GaussianState, alpha: C64) -> Result<f64> {
    let l = moments(g).l;
    if !(l > 0.0) {
        return Err(TomoError::SingularDenominator(format!("L = {l} is not positive")));
    }
    let pp = g.mean_p + SQRT_2 * alpha.im;
    let qq = g.mean_q + SQRT_2 * alpha.re;
    let quad = (2.0 * g.sigma_qq + 1.0) * pp * pp + (2.0 * g.sigma_pp + 1.0) * qq * qq;
    Ok(2.0 / l.sqrt() * (-quad / l).exp() * (4.0 * g.sigma_pq / l * pp * qq).exp())
}

/// Which evaluation produced a Gaussian photon-number value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PnRoute {
    Analytic,
    Matrix,
}

/// Photon statistics of a Gaussian state at one `alpha`.
#[derive(Clone, Debug)]
pub struct GaussianPn {
    /// `omega(n, alpha)` for `n = 0..=n_max`.
    pub values: Vec<f64>,
    pub route: PnRoute,
    pub diagnostic: Option<String>,
    /// When the closed form is singular: its value for the state thermalized
    /// by `nbar = 1e-6`.
    pub perturbed_estimate: Option<Vec<f64>>,
    /// Set when the closed form returned a value below `-1e-9` or with a
    /// non-negligible imaginary part.
    pub discrepancy: bool,
}

/// Thermal occupation used to step off the singular closed form.
pub const SINGULAR_PERTURBATION: f64 = 1e-6;

fn analytic_distribution(g: &GaussianState, alpha: C64, n_max: usize) -> Result<(Vec<f64>, bool)> {
    let r = r_matrix(g)?;
    let (y1, y2) = y_args(g, alpha)?;
    let p = p0(g, alpha)?;
    let lf = ln_factorials(n_max + 1);
    let mut ctx = HermiteContext::new(r, y1, y2);
    let diag = ctx.diagonal(n_max);
    let mut bad = false;
    let values = diag
        .iter()
        .enumerate()
        .map(|(n, h)| {
            if h.mantissa == C64::new(0.0, 0.0) || p == 0.0 {
                return 0.0;
            }
            let mag = (h.ln_abs() + p.ln() - lf[n]).exp();
            let z = C64::from_polar(mag, h.arg());
            if z.re < -1e-9 || z.im.abs() > 1e-9 * (1.0 + z.re.abs()) {
                bad = true;
            }
            z.re
        })
        .collect();
    Ok((values, bad))
}

/// Truncation large enough for the matrix fallback at this `alpha`.
pub fn fallback_dim(g: &GaussianState, alpha: C64, n_max: usize) -> usize {
    let shift = C64::new(g.mean_q, g.mean_p) / SQRT_2 + alpha;
    let spread = g.sigma_qq + g.sigma_pp;
    let need = 4.0 * (shift.norm() + 1.0).powi(2) + 8.0 * spread;
    64usize.max(n_max + 40).max(need.ceil() as usize + 40)
}

/// `omega(n, alpha)` for `n = 0..=n_max` from the closed form, routed to the
/// matrix branch when the Hermite arguments are singular (coherent states).
pub fn pn_distribution_gaussian(g: &GaussianState, alpha: C64, n_max: usize) -> Result<GaussianPn> {
    g.validate_physical()?;
    match analytic_distribution(g, alpha, n_max) {
        Ok((values, bad)) => Ok(GaussianPn {
            diagnostic: bad.then(|| "closed form returned a negative or complex probability".to_string()),
            values,
            route: PnRoute::Analytic,
            perturbed_estimate: None,
            discrepancy: bad,
        }),
        Err(TomoError::SingularDenominator(why)) => {
            let dim = fallback_dim(g, alpha, n_max);
            let rho = to_fock(g, dim)?.state;
            let values = pn_distribution(&rho, alpha, n_max)?;
            let bump = 1.0 + 2.0 * SINGULAR_PERTURBATION;
            let nudged = GaussianState { sigma_qq: g.sigma_qq * bump, sigma_pp: g.sigma_pp * bump, ..*g };
            let perturbed_estimate = analytic_distribution(&nudged, alpha, n_max).ok().map(|v| v.0);
            Ok(GaussianPn {
                values,
                route: PnRoute::Matrix,
                diagnostic: Some(format!("{why}; evaluated by the matrix route at N = {dim}")),
                perturbed_estimate,
                discrepancy: false,
            })
        }
        Err(e) => Err(e),
    }
}

/// Single value of [`pn_distribution_gaussian`].
pub fn pn_tomogram_gaussian(g: &GaussianState, n: usize, alpha: C64) -> Result<f64> {
    Ok(pn_distribution_gaussian(g, alpha, n)?.values[n])
}
