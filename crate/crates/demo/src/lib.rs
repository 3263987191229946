//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes a state spec such as `vacuum`, `fock:2`,
//! `coherent:1,0.5`, `thermal:0.4` or `squeezed:0.5` and returns a flat
//! `Float64Array`.

use tomokit::fock::{make_state, StateKind};
use tomokit::formats::Axis;
use tomokit::photon_number::pn_distribution;
use tomokit::symplectic::{wigner_grid_from_fock, SymplecticTomogram};
use tomokit::{DensityMatrix, C64};
use wasm_bindgen::prelude::*;

const DIM: usize = 40;

fn state(spec: &str) -> tomokit::Result<DensityMatrix> {
    let kind: StateKind = spec.parse()?;
    Ok(make_state(&kind, DIM)?.state)
}

/// Wigner function on a `count x count` grid over `[-extent, extent]^2`, rows indexed by `p`.
pub fn wigner_rows(spec: &str, extent: f64, count: usize) -> tomokit::Result<Vec<f64>> {
    let axis = Axis::symmetric(extent, count)?;
    let grid = wigner_grid_from_fock(&state(spec)?, axis, axis)?;
    let mut out = Vec::with_capacity(count * count);
    for ip in (0..count).rev() {
        out.extend((0..count).map(|iq| grid.get(iq, ip)));
    }
    Ok(out)
}

/// Optical tomogram, one row of `count` samples over `[-extent, extent]` per angle.
pub fn sinogram_rows(spec: &str, angles: usize, extent: f64, count: usize) -> tomokit::Result<Vec<f64>> {
    let tomo = SymplecticTomogram::sample_optical(&state(spec)?, angles, Axis::symmetric(extent, count)?)?;
    Ok(tomo.slices.into_iter().flat_map(|s| s.w).collect())
}

/// Photon-number distribution of the state displaced by `-alpha`, `n = 0..=n_max`.
pub fn photon_counts(spec: &str, re: f64, im: f64, n_max: usize) -> tomokit::Result<Vec<f64>> {
    pn_distribution(&state(spec)?, C64::new(re, im), n_max.min(DIM - 1))
}

fn js<T>(r: tomokit::Result<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn wigner(spec: &str, extent: f64, count: usize) -> Result<Vec<f64>, JsError> {
    js(wigner_rows(spec, extent, count))
}

#[wasm_bindgen]
pub fn sinogram(spec: &str, angles: usize, extent: f64, count: usize) -> Result<Vec<f64>, JsError> {
    js(sinogram_rows(spec, angles, extent, count))
}

#[wasm_bindgen]
pub fn photon_statistics(spec: &str, re: f64, im: f64, n_max: usize) -> Result<Vec<f64>, JsError> {
    js(photon_counts(spec, re, im, n_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_wigner_peaks_at_origin() {
        let w = wigner_rows("vacuum", 2.0, 5).unwrap();
        assert!((w[12] - 2.0).abs() < 1e-12);
        assert!(w.iter().all(|v| *v <= 2.0 + 1e-12));
    }

    #[test]
    fn sinogram_shape() {
        let s = sinogram_rows("fock:1", 8, 5.0, 51).unwrap();
        assert_eq!(s.len(), 8 * 51);
        assert!(s.iter().all(|v| *v >= -1e-12));
    }

    #[test]
    fn photon_counts_poisson() {
        let p = photon_counts("coherent:1", 0.0, 0.0, 4).unwrap();
        let e = (-1.0f64).exp();
        assert!((p[0] - e).abs() < 1e-12 && (p[2] - e / 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_spec_is_an_error() {
        assert!(photon_counts("cat:1", 0.0, 0.0, 4).is_err());
    }
}
