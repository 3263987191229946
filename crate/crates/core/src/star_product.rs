//! Quantizer/dequantizer engine.
//!
//! A scheme supplies a dequantizer family `U(x)` and, when it can be
//! integrated numerically, a quantizer family `D(x)` with a quadrature rule.
//! Symbols are `w(x) = Tr(rho U(x))`, reconstruction is
//! `rho = sum_k weight_k w(x_k) D(x_k)`, and the star product of two symbols
//! is evaluated by the trace route `Tr(rho1 rho2 U(x))`.
//!
//! The symplectic star-product kernels are kept in factored form
//! `amplitude * delta(delta_argument)`; the delta function is never
//! discretized.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Result, TomoError};
use crate::fock::OperatorMatrix;
use crate::formats::Table;

/// Imaginary part above which a symbol of a Hermitian dequantizer is flagged.
pub const IMAGINARY_FLAG: f64 = 1e-10;

/// A family of dequantizer operators `U(x)`.
pub trait Dequantizer: Sync {
    type Point: Copy + Send + Sync;

    fn label(&self) -> &str;

    /// Names of the label coordinates, in the order returned by [`Self::coordinates`].
    fn coordinate_names(&self) -> Vec<String>;

    fn coordinates(&self, x: &Self::Point) -> Vec<f64>;

    fn dequantizer(&self, x: &Self::Point, dim: usize) -> Result<OperatorMatrix>;

    fn is_hermitian(&self) -> bool {
        true
    }
}

/// A family of quantizer operators `D(x)` with a quadrature rule over a
/// declared domain.
pub trait Quantizer: Sync {
    type Point: Copy + Send + Sync;

    fn quantizer(&self, x: &Self::Point, dim: usize) -> Result<OperatorMatrix>;

    /// Quadrature nodes and their (positive) weights.
    fn quadrature(&self) -> Result<Vec<(Self::Point, f64)>>;

    fn same_point(&self, a: &Self::Point, b: &Self::Point) -> bool;

    /// `sum_k weight_k w(x_k) D(x_k)`. Schemes may override this with a
    /// factored evaluation; the result must be the same sum.
    fn reconstruct(&self, symbol: &SampledSymbol<Self::Point>, dim: usize) -> Result<OperatorMatrix> {
        let nodes = self.quadrature()?;
        check_nodes(self, &nodes, symbol)?;
        let mut acc = OperatorMatrix::zeros(dim)?;
        for ((x, weight), value) in nodes.iter().zip(&symbol.values) {
            if *weight == 0.0 || *value == C64::new(0.0, 0.0) {
                continue;
            }
            let d = self.quantizer(x, dim)?;
            acc = &acc + &d.scale(*value * *weight);
        }
        Ok(acc)
    }
}

/// Checks that sampled points coincide with the scheme's quadrature nodes.
pub fn check_nodes<Q: Quantizer + ?Sized>(
    scheme: &Q,
    nodes: &[(Q::Point, f64)],
    symbol: &SampledSymbol<Q::Point>,
) -> Result<()> {
    if nodes.len() != symbol.points.len() || symbol.values.len() != symbol.points.len() {
        return Err(TomoError::Grid(format!(
            "symbol has {} samples but the quadrature declares {} nodes",
            symbol.points.len(),
            nodes.len()
        )));
    }
    for ((x, _), y) in nodes.iter().zip(&symbol.points) {
        if !scheme.same_point(x, y) {
            return Err(TomoError::Grid("symbol samples do not match the declared grid".into()));
        }
    }
    Ok(())
}

/// Symbol values sampled at a list of label points.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSymbol<P> {
    pub points: Vec<P>,
    pub values: Vec<C64>,
}

impl<P: Copy> SampledSymbol<P> {
    pub fn zeros(points: Vec<P>) -> Self {
        let values = vec![C64::new(0.0, 0.0); points.len()];
        Self { points, values }
    }

    /// Pointwise `a * self + b * other`; both must share the same points.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.values.len() != other.values.len() {
            return Err(TomoError::Grid("cannot combine symbols on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * a + y * b).collect();
        Ok(Self { points: self.points.clone(), values })
    }
}

/// A symbol value with the imaginary-part flag for Hermitian dequantizers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolValue {
    pub value: C64,
    pub imaginary_flag: bool,
}

/// `w(x) = Tr(rho U(x))`.
pub fn symbol<U: Dequantizer>(rho: &OperatorMatrix, scheme: &U, x: &U::Point) -> Result<SymbolValue> {
    let u = scheme.dequantizer(x, rho.dim())?;
    let value = rho.trace_product(&u)?;
    Ok(SymbolValue {
        value,
        imaginary_flag: scheme.is_hermitian() && value.im.abs() > IMAGINARY_FLAG,
    })
}

/// Samples `Tr(rho U(x))` at every point.
pub fn sample_symbol<U: Dequantizer>(
    rho: &OperatorMatrix,
    scheme: &U,
    points: &[U::Point],
) -> Result<SampledSymbol<U::Point>> {
    let values = map_points(points, |x| symbol(rho, scheme, x).map(|s| s.value))?;
    Ok(SampledSymbol { points: points.to_vec(), values })
}

/// Star product by the trace route: the symbol of `rho1 rho2` at `x`.
pub fn star_trace<U: Dequantizer>(
    rho1: &OperatorMatrix,
    rho2: &OperatorMatrix,
    scheme: &U,
    x: &U::Point,
) -> Result<C64> {
    let prod = rho1.try_mul(rho2)?;
    let u = scheme.dequantizer(x, prod.dim())?;
    prod.trace_product(&u)
}

/// Reconstructs an operator from symbol samples on the scheme's quadrature grid.
pub fn reconstruct<Q: Quantizer>(
    symbol: &SampledSymbol<Q::Point>,
    scheme: &Q,
    dim: usize,
) -> Result<OperatorMatrix> {
    scheme.reconstruct(symbol, dim)
}

#[cfg(feature = "parallel")]
fn map_points<P: Sync, T: Send>(
    points: &[P],
    f: impl Fn(&P) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    use rayon::prelude::*;
    let out: Vec<Result<T>> = points.par_iter().map(f).collect();
    out.into_iter().collect()
}

#[cfg(not(feature = "parallel"))]
fn map_points<P: Sync, T: Send>(
    points: &[P],
    f: impl Fn(&P) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    points.iter().map(f).collect()
}

/// Writes a sampled symbol as CSV: one column per label coordinate, then
/// `value` (or `re`, `im` when `complex`).
pub fn symbol_table<U: Dequantizer>(scheme: &U, symbol: &SampledSymbol<U::Point>, complex: bool) -> Table {
    let mut cols = scheme.coordinate_names();
    if complex {
        cols.push("re".into());
        cols.push("im".into());
    } else {
        cols.push("value".into());
    }
    let mut table = Table { columns: cols, rows: Vec::new() };
    for (x, v) in symbol.points.iter().zip(&symbol.values) {
        let mut row = scheme.coordinates(x);
        row.push(v.re);
        if complex {
            row.push(v.im);
        }
        table.rows.push(row);
    }
    table
}

/// Label point `(X, mu, nu)` of the symplectic schemes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymplecticPoint {
    pub x: f64,
    pub mu: f64,
    pub nu: f64,
}

impl SymplecticPoint {
    pub fn new(x: f64, mu: f64, nu: f64) -> Self {
        Self { x, mu, nu }
    }
}

/// Factored kernel value `amplitude * delta(delta_argument)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub amplitude: C64,
    pub delta_argument: f64,
}

impl KernelValue {
    /// Whether two kernels sit on the same delta support. The delta function
    /// is even, so arguments that differ only in sign describe one support.
    pub fn same_support(&self, other: &KernelValue) -> bool {
        (self.delta_argument.abs() - other.delta_argument.abs()).abs() <= 1e-12
    }
}

const KERNEL_NORM: f64 = 1.0 / (4.0 * PI * PI);

/// Kernel of the noncommutative star product of two quantum symplectic tomograms.
///
/// `amplitude = exp{(i/2)[(nu1 mu2 - nu2 mu1) + 2 X1 + 2 X2 - 2 (nu1 + nu2) X / nu]} / 4pi^2`,
/// `delta_argument = mu (nu1 + nu2) - nu (mu1 + mu2)`. Undefined on the `nu = 0` slice.
pub fn kernel_symplectic_quantum(
    x1: SymplecticPoint,
    x2: SymplecticPoint,
    x: SymplecticPoint,
) -> Result<KernelValue> {
    if x.nu == 0.0 {
        return Err(TomoError::SingularSlice);
    }
    let phase = 0.5
        * ((x1.nu * x2.mu - x2.nu * x1.mu) + 2.0 * x1.x + 2.0 * x2.x - 2.0 * (x1.nu + x2.nu) * x.x / x.nu);
    Ok(KernelValue {
        amplitude: C64::from_polar(KERNEL_NORM, phase),
        delta_argument: x.mu * (x1.nu + x2.nu) - x.nu * (x1.mu + x2.mu),
    })
}

/// Kernel of the commutative star product of two classical tomograms.
pub fn kernel_symplectic_classical(
    x1: SymplecticPoint,
    x2: SymplecticPoint,
    x: SymplecticPoint,
) -> Result<KernelValue> {
    if x.nu == 0.0 {
        return Err(TomoError::SingularSlice);
    }
    let phase = x1.x + x2.x - x.x * (x1.nu + x2.nu) / x.nu;
    Ok(KernelValue {
        amplitude: C64::from_polar(KERNEL_NORM, phase),
        delta_argument: x.nu * (x1.mu + x2.mu) - x.mu * (x1.nu + x2.nu),
    })
}

/// Ratio of quantum to classical kernel amplitudes; expected to equal
/// `exp{i (mu2 nu1 - mu1 nu2) / 2}`.
pub fn kernel_relation_check(x1: SymplecticPoint, x2: SymplecticPoint, x: SymplecticPoint) -> Result<C64> {
    let kq = kernel_symplectic_quantum(x1, x2, x)?;
    let kc = kernel_symplectic_classical(x1, x2, x)?;
    if !kq.same_support(&kc) {
        return Err(TomoError::Domain("kernels live on different delta supports".into()));
    }
    if kc.amplitude.norm() == 0.0 {
        return Err(TomoError::SingularDenominator("classical kernel amplitude is zero".into()));
    }
    Ok(kq.amplitude / kc.amplitude)
}

/// The phase factor relating the two kernels.
pub fn kernel_relation_phase(x1: SymplecticPoint, x2: SymplecticPoint) -> C64 {
    C64::from_polar(1.0, 0.5 * (x2.mu * x1.nu - x1.mu * x2.nu))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, mu: f64, nu: f64) -> SymplecticPoint {
        SymplecticPoint::new(x, mu, nu)
    }

    #[test]
    fn quantum_kernel_at_origin() {
        let k = kernel_symplectic_quantum(pt(0.0, 0.0, 0.0), pt(0.0, 0.0, 0.0), pt(0.0, 0.0, 1.0)).unwrap();
        assert!((k.amplitude - C64::new(KERNEL_NORM, 0.0)).norm() < 1e-16);
        assert_eq!(k.delta_argument, 0.0);
    }

    #[test]
    fn quantum_kernel_vanishing_phase() {
        // nu1 mu2 = nu2 mu1 and X1 + X2 = (nu1 + nu2) X / nu
        let x1 = pt(0.4, 1.0, 2.0);
        let x2 = pt(0.8, 0.5, 1.0);
        let nu = 1.5;
        let xx = (x1.x + x2.x) * nu / (x1.nu + x2.nu);
        let k = kernel_symplectic_quantum(x1, x2, pt(xx, 0.3, nu)).unwrap();
        assert!((k.amplitude - C64::new(KERNEL_NORM, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quantum_kernel_swap_conjugates_antisymmetric_phase() {
        let x1 = pt(0.3, -1.2, 0.7);
        let x2 = pt(-0.9, 0.4, 2.1);
        let x = pt(0.5, 0.8, -1.3);
        let a = kernel_symplectic_quantum(x1, x2, x).unwrap();
        let b = kernel_symplectic_quantum(x2, x1, x).unwrap();
        let anti = C64::from_polar(1.0, 0.5 * (x1.nu * x2.mu - x2.nu * x1.mu));
        assert!((b.amplitude - a.amplitude * anti.conj() * anti.conj()).norm() < 1e-15);
        assert_eq!(a.delta_argument, b.delta_argument);
    }

    #[test]
    fn singular_slice() {
        let z = pt(0.0, 1.0, 0.0);
        assert!(matches!(kernel_symplectic_quantum(z, z, z), Err(TomoError::SingularSlice)));
        assert!(matches!(kernel_symplectic_classical(z, z, z), Err(TomoError::SingularSlice)));
    }

    #[test]
    fn classical_kernel_properties() {
        let x1 = pt(0.3, -1.2, 0.7);
        let x2 = pt(-0.9, 0.4, 2.1);
        let x = pt(0.5, 0.8, -1.3);
        let a = kernel_symplectic_classical(x1, x2, x).unwrap();
        let b = kernel_symplectic_classical(x2, x1, x).unwrap();
        assert_eq!(a, b);
        let o = kernel_symplectic_classical(pt(0.0, 0.3, 0.2), pt(0.0, 1.0, -0.5), pt(0.0, 0.7, 0.4)).unwrap();
        assert!((o.amplitude - C64::new(KERNEL_NORM, 0.0)).norm() < 1e-16);
        let q = kernel_symplectic_quantum(x1, x2, x).unwrap();
        assert_eq!(a.delta_argument, -q.delta_argument);
    }

    #[test]
    fn relation_special_cases() {
        // mu1 = nu2 = 0
        let x1 = pt(0.2, 0.0, 1.3);
        let x2 = pt(-0.4, 0.9, 0.0);
        let x = pt(0.1, 0.5, 0.7);
        let ratio = kernel_relation_check(x1, x2, x).unwrap();
        let expected = C64::from_polar(1.0, x2.mu * x1.nu / 2.0);
        assert!((ratio - expected).norm() < 1e-12);
        let same = kernel_relation_check(x1, x1, x).unwrap();
        assert!((same - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
