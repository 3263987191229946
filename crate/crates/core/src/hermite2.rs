//! Two-variable Hermite polynomials `H^{R}_{n1 n2}(y1, y2)`.
//!
//! Defined through the generating function
//!
//! ```text
//! exp(-x^T R x / 2 + y^T R x) = sum_{n1,n2} x1^n1 x2^n2 / (n1! n2!) H_{n1 n2}(y1, y2)
//! ```
//!
//! with `R` complex symmetric. Differentiating the generating function in
//! `x1` (or `x2`) gives the lattice recursions
//!
//! ```text
//! H_{n1+1,n2} = (R11 y1 + R12 y2) H_{n1,n2} - n1 R11 H_{n1-1,n2} - n2 R12 H_{n1,n2-1}
//! H_{n1,n2+1} = (R21 y1 + R22 y2) H_{n1,n2} - n1 R21 H_{n1-1,n2} - n2 R22 H_{n1,n2-1}
//! ```
//!
//! evaluated here by memoized dynamic programming from `H_00 = 1`.

use num_complex::Complex64 as C64;

use crate::error::{Result, TomoError};

/// Magnitude above which a table entry is carried in scaled form.
const SCALE_HIGH: f64 = 1e280;
const SCALE_LOW: f64 = 1e-280;

/// `mantissa * 2^exponent`; the exponent stays zero until the mantissa leaves
/// `[1e-280, 1e280]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: C64,
    pub exponent: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mantissa: C64 { re: 0.0, im: 0.0 }, exponent: 0 };
    pub const ONE: Scaled = Scaled { mantissa: C64 { re: 1.0, im: 0.0 }, exponent: 0 };

    pub fn new(mantissa: C64) -> Self {
        Self { mantissa, exponent: 0 }.normalized()
    }

    fn normalized(mut self) -> Self {
        let mag = self.mantissa.norm();
        if mag == 0.0 || !mag.is_finite() {
            if mag == 0.0 {
                self.exponent = 0;
            }
            return self;
        }
        if !(SCALE_LOW..=SCALE_HIGH).contains(&mag) {
            let shift = mag.log2().floor() as i64;
            self.mantissa = self.mantissa * pow2(-shift);
            self.exponent += shift;
        }
        self
    }

    pub fn is_scaled(&self) -> bool {
        self.exponent != 0
    }

    pub fn scale(self, factor: C64) -> Self {
        Self { mantissa: self.mantissa * factor, exponent: self.exponent }.normalized()
    }

    pub fn add(self, other: Self) -> Self {
        if self.mantissa == C64::new(0.0, 0.0) {
            return other;
        }
        if other.mantissa == C64::new(0.0, 0.0) {
            return self;
        }
        let e = self.exponent.max(other.exponent);
        let m = self.mantissa * pow2(self.exponent - e) + other.mantissa * pow2(other.exponent - e);
        Self { mantissa: m, exponent: e }.normalized()
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.scale(C64::new(-1.0, 0.0)))
    }

    /// Natural log of the magnitude.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.exponent as f64 * std::f64::consts::LN_2
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Plain value; overflows to infinity when the true magnitude exceeds `f64`.
    pub fn to_c64(&self) -> C64 {
        if self.exponent == 0 {
            return self.mantissa;
        }
        C64::from_polar(self.ln_abs().exp(), self.arg())
    }
}

fn pow2(k: i64) -> f64 {
    let k = k.clamp(-2000, 2000) as i32;
    if k < -1000 {
        return 0.0;
    }
    2f64.powi(k)
}

/// Symmetric 2x2 complex matrix `[[r11, r12], [r12, r22]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetricMatrix2 {
    pub r11: C64,
    pub r12: C64,
    pub r22: C64,
}

impl SymmetricMatrix2 {
    /// Rejects `r12 != r21`.
    pub fn from_rows(rows: [[C64; 2]; 2]) -> Result<Self> {
        if rows[0][1] != rows[1][0] {
            return Err(TomoError::Domain(format!(
                "R must be symmetric: R12 = {} but R21 = {}",
                rows[0][1], rows[1][0]
            )));
        }
        Ok(Self { r11: rows[0][0], r12: rows[0][1], r22: rows[1][1] })
    }

    pub fn rows(&self) -> [[C64; 2]; 2] {
        [[self.r11, self.r12], [self.r12, self.r22]]
    }
}

/// Memo table of `H_{n1 n2}` for one `(R, y1, y2)`.
#[derive(Clone, Debug)]
pub struct HermiteContext {
    r: SymmetricMatrix2,
    y1: C64,
    y2: C64,
    // table[n1][n2]
    table: Vec<Vec<Scaled>>,
}

impl HermiteContext {
    pub fn new(r: SymmetricMatrix2, y1: C64, y2: C64) -> Self {
        Self { r, y1, y2, table: vec![vec![Scaled::ONE]] }
    }

    pub fn r(&self) -> SymmetricMatrix2 {
        self.r
    }

    pub fn y(&self) -> (C64, C64) {
        (self.y1, self.y2)
    }

    /// Current extent of the memo table as `(n1_max + 1, n2_max + 1)`.
    pub fn extent(&self) -> (usize, usize) {
        (self.table.len(), self.table[0].len())
    }

    fn grow(&mut self, n1_max: usize, n2_max: usize) {
        let (have1, have2) = self.extent();
        if n1_max < have1 && n2_max < have2 {
            return;
        }
        let rows = (n1_max + 1).max(have1);
        let cols = (n2_max + 1).max(have2);
        let SymmetricMatrix2 { r11, r12, r22 } = self.r;
        let a1 = r11 * self.y1 + r12 * self.y2;
        let a2 = r12 * self.y1 + r22 * self.y2;
        let mut t = vec![vec![Scaled::ZERO; cols]; rows];
        t[0][0] = Scaled::ONE;
        // first row along n2
        for n2 in 0..cols - 1 {
            let mut v = t[0][n2].scale(a2);
            if n2 > 0 {
                v = v.sub(t[0][n2 - 1].scale(r22 * n2 as f64));
            }
            t[0][n2 + 1] = v;
        }
        // remaining rows along n1
        for n1 in 0..rows - 1 {
            for n2 in 0..cols {
                let mut v = t[n1][n2].scale(a1);
                if n1 > 0 {
                    v = v.sub(t[n1 - 1][n2].scale(r11 * n1 as f64));
                }
                if n2 > 0 {
                    v = v.sub(t[n1][n2 - 1].scale(r12 * n2 as f64));
                }
                t[n1 + 1][n2] = v;
            }
        }
        self.table = t;
    }

    /// `H_{n1 n2}` in scaled form.
    pub fn scaled(&mut self, n1: usize, n2: usize) -> Scaled {
        self.grow(n1, n2);
        self.table[n1][n2]
    }

    pub fn value(&mut self, n1: usize, n2: usize) -> C64 {
        self.scaled(n1, n2).to_c64()
    }

    /// Diagonal values `H_{nn}` for `n = 0..=n_max`.
    pub fn diagonal(&mut self, n_max: usize) -> Vec<Scaled> {
        self.grow(n_max, n_max);
        (0..=n_max).map(|n| self.table[n][n]).collect()
    }
}

/// One-shot evaluation of `H^{R}_{n1 n2}(y1, y2)`.
pub fn hermite2(r: SymmetricMatrix2, n1: usize, n2: usize, y1: C64, y2: C64) -> C64 {
    HermiteContext::new(r, y1, y2).value(n1, n2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> (SymmetricMatrix2, C64, C64) {
        let r = SymmetricMatrix2 { r11: c(0.3, -0.2), r12: c(-0.5, 0.1), r22: c(0.7, 0.4) };
        (r, c(0.4, 0.9), c(-1.1, 0.2))
    }

    #[test]
    fn low_orders() {
        let (r, y1, y2) = sample();
        assert_eq!(hermite2(r, 0, 0, y1, y2), c(1.0, 0.0));
        let h10 = r.r11 * y1 + r.r12 * y2;
        assert!((hermite2(r, 1, 0, y1, y2) - h10).norm() < 1e-15);
        let h01 = r.r12 * y1 + r.r22 * y2;
        let h11 = h10 * h01 - r.r12;
        assert!((hermite2(r, 1, 1, y1, y2) - h11).norm() < 1e-14);
    }

    #[test]
    fn swap_symmetry() {
        let (r, y1, y2) = sample();
        let swapped = SymmetricMatrix2 { r11: r.r22, r12: r.r12, r22: r.r11 };
        let mut a = HermiteContext::new(r, y1, y2);
        let mut b = HermiteContext::new(swapped, y2, y1);
        for n1 in 0..8 {
            for n2 in 0..8 {
                let x = a.value(n1, n2);
                let y = b.value(n2, n1);
                assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()), "({n1},{n2})");
            }
        }
    }

    #[test]
    fn asymmetric_r_rejected() {
        let rows = [[c(1.0, 0.0), c(0.5, 0.0)], [c(0.4, 0.0), c(1.0, 0.0)]];
        assert!(SymmetricMatrix2::from_rows(rows).is_err());
    }

    #[test]
    fn table_is_reproducible_from_scratch() {
        let (r, y1, y2) = sample();
        let mut grown = HermiteContext::new(r, y1, y2);
        // grow in several steps
        grown.value(2, 1);
        grown.value(1, 5);
        let v = grown.value(6, 6);
        let fresh = hermite2(r, 6, 6, y1, y2);
        assert_eq!(v, fresh);
    }

    #[test]
    fn scaled_representation_past_overflow() {
        // R = [[0, -1],[-1, 0]], y = 0 gives H_nn = n! (up to sign), far past 1e280 at n = 200
        let r = SymmetricMatrix2 { r11: c(0.0, 0.0), r12: c(-1.0, 0.0), r22: c(0.0, 0.0) };
        let mut ctx = HermiteContext::new(r, c(0.0, 0.0), c(0.0, 0.0));
        let diag = ctx.diagonal(200);
        let ln_fact_200: f64 = (1..=200).map(|k| (k as f64).ln()).sum();
        assert!(diag[200].is_scaled());
        assert!((diag[200].ln_abs() - ln_fact_200).abs() < 1e-9);
        let ln_fact_10: f64 = (1..=10).map(|k| (k as f64).ln()).sum();
        assert!((diag[10].to_c64().norm().ln() - ln_fact_10).abs() < 1e-12);
    }

    #[test]
    fn scaled_arithmetic() {
        let big = Scaled::new(c(1e300, 0.0)).scale(c(1e100, 0.0));
        assert!(big.is_scaled());
        let sum = big.add(big);
        let ln_expected = 2f64.ln() + 400.0 * 10f64.ln();
        assert!((sum.ln_abs() - ln_expected).abs() < 1e-9);
        let diff = sum.sub(big).sub(big);
        assert!(diff.mantissa.norm() < 1e-6);
    }
}
