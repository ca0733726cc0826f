//! Periodic grid, Fourier transforms and frequency-symbol application.
//!
//! The box is `[-L, L)^dim` with `points_per_axis` nodes per axis; the dual
//! lattice is `xi_k = pi k / L` with `k in {-N/2, ..., N/2-1}`. Spectral
//! coefficients are amplitude-normalized: a constant field `c` has the single
//! coefficient `c` at the zero frequency, and
//! `f(x) = sum_k c_k exp(i xi_k . x)`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{DwError, Result};

/// Relative tolerance on the imaginary residue of an inverse transform.
const HERMITIAN_TOL: f64 = 1e-8;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Periodic grid shared by every field of a run.
#[derive(Debug)]
pub struct Grid {
    dim: usize,
    points_per_axis: usize,
    half_length: f64,
    spacing: f64,
    /// Per-axis frequencies in FFT storage order (0, 1, ..., N/2-1, -N/2, ..., -1) * pi/L.
    freq: Vec<f64>,
    /// |xi|^2 per lattice node, row-major.
    freq_sq: Vec<f64>,
}

impl Grid {
    pub fn new(dim: usize, points_per_axis: usize, half_length: f64) -> Result<Arc<Grid>> {
        if !(dim == 1 || dim == 2) {
            return Err(DwError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if points_per_axis < 8 || !points_per_axis.is_power_of_two() {
            return Err(DwError::InvalidGrid(format!(
                "points_per_axis must be a power of two >= 8, got {points_per_axis}"
            )));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(DwError::InvalidGrid(format!(
                "half_length must be positive and finite, got {half_length}"
            )));
        }
        let n = points_per_axis;
        let spacing = 2.0 * half_length / n as f64;
        let base = std::f64::consts::PI / half_length;
        let freq: Vec<f64> = (0..n)
            .map(|i| {
                let k = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
                base * k as f64
            })
            .collect();
        let freq_sq = match dim {
            1 => freq.iter().map(|f| f * f).collect(),
            _ => {
                let mut v = Vec::with_capacity(n * n);
                for f1 in &freq {
                    for f2 in &freq {
                        v.push(f1 * f1 + f2 * f2);
                    }
                }
                v
            }
        };
        Ok(Arc::new(Grid {
            dim,
            points_per_axis,
            half_length,
            spacing,
            freq,
            freq_sq,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn freq_sq(&self) -> &[f64] {
        &self.freq_sq
    }

    /// Per-axis frequency in FFT storage order.
    pub fn freq(&self) -> &[f64] {
        &self.freq
    }

    /// Box volume (2L)^dim.
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_length).powi(self.dim as i32)
    }

    /// Quadrature weight per node.
    pub fn node_weight(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Physical coordinate of the node with row-major index `idx`.
    pub fn coord(&self, idx: usize) -> [f64; 2] {
        let n = self.points_per_axis;
        let x0 = -self.half_length;
        match self.dim {
            1 => [x0 + idx as f64 * self.spacing, 0.0],
            _ => {
                let i = idx / n;
                let j = idx % n;
                [x0 + i as f64 * self.spacing, x0 + j as f64 * self.spacing]
            }
        }
    }
}

/// Real-valued samples on the grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.node_count() {
            return Err(DwError::InvalidArgument(format!(
                "field length {} does not match grid node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DwError::InvalidArgument(
                "field contains non-finite values".into(),
            ));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Field {
        let n = grid.node_count();
        Field {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Field {
        let values = (0..grid.node_count())
            .map(|i| {
                let c = grid.coord(i);
                f(&c[..grid.dim()])
            })
            .collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// Complex Fourier coefficients on the dual lattice.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Arc<Grid>) -> SpectralField {
        let n = grid.node_count();
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_coeffs(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Result<SpectralField> {
        if coeffs.len() != grid.node_count() {
            return Err(DwError::InvalidArgument(format!(
                "coefficient length {} does not match grid node count {}",
                coeffs.len(),
                grid.node_count()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Discrete Parseval L2 norm: sqrt((2L)^dim * sum |c|^2).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt()
    }

    /// Average conjugate index pairs so the inverse transform is exactly real.
    pub fn hermitian_project(&mut self) {
        let n = self.grid.points_per_axis;
        let dim = self.grid.dim;
        let conj_idx = |idx: usize| -> usize {
            match dim {
                1 => (n - idx % n) % n,
                _ => {
                    let i = idx / n;
                    let j = idx % n;
                    ((n - i) % n) * n + (n - j) % n
                }
            }
        };
        for idx in 0..self.coeffs.len() {
            let cj = conj_idx(idx);
            if cj < idx {
                continue;
            }
            if cj == idx {
                self.coeffs[idx] = Complex64::new(self.coeffs[idx].re, 0.0);
            } else {
                let avg = 0.5 * (self.coeffs[idx] + self.coeffs[cj].conj());
                self.coeffs[idx] = avg;
                self.coeffs[cj] = avg.conj();
            }
        }
    }
}

/// In-place FFT along both axes of a row-major `m^dim` block.
fn fft_nd(data: &mut [Complex64], m: usize, dim: usize, inverse: bool) {
    let fft = plan(m, inverse);
    match dim {
        1 => fft.process(data),
        _ => {
            // rows
            for row in data.chunks_exact_mut(m) {
                fft.process(row);
            }
            // columns via transpose
            let mut tr = vec![Complex64::new(0.0, 0.0); m * m];
            for i in 0..m {
                for j in 0..m {
                    tr[j * m + i] = data[i * m + j];
                }
            }
            for row in tr.chunks_exact_mut(m) {
                fft.process(row);
            }
            for i in 0..m {
                for j in 0..m {
                    data[i * m + j] = tr[j * m + i];
                }
            }
        }
    }
}

/// Parity of the frequency index sum; the (-1)^k twist accounts for the
/// grid origin at x = -L instead of 0.
fn twist_sign(idx: usize, m: usize, dim: usize) -> f64 {
    let parity = match dim {
        1 => idx % 2,
        _ => (idx / m + idx % m) % 2,
    };
    if parity == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Forward transform of real samples on an `m^dim` lattice (size-generic; the
/// dealiasing path runs it on the oversampled grid).
pub(crate) fn forward_raw(values: &[f64], m: usize, dim: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, m, dim, false);
    let norm = 1.0 / (m as f64).powi(dim as i32);
    for (idx, c) in data.iter_mut().enumerate() {
        *c *= norm * twist_sign(idx, m, dim);
    }
    data
}

/// Inverse transform to complex samples; callers take the real part after
/// checking the imaginary residue.
pub(crate) fn inverse_raw(coeffs: &[Complex64], m: usize, dim: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| c * twist_sign(idx, m, dim))
        .collect();
    fft_nd(&mut data, m, dim, true);
    data
}

/// Embed an `n^dim` coefficient block into an `m^dim` block (m >= n), keeping
/// amplitude normalization.
pub(crate) fn pad_coeffs(coeffs: &[Complex64], n: usize, dim: usize, m: usize) -> Vec<Complex64> {
    assert!(m >= n);
    let mut out = vec![Complex64::new(0.0, 0.0); m.pow(dim as u32)];
    let map = |i: usize| -> usize {
        if i < n / 2 {
            i
        } else {
            m - n + i
        }
    };
    match dim {
        1 => {
            for i in 0..n {
                out[map(i)] = coeffs[i];
            }
        }
        _ => {
            for i in 0..n {
                for j in 0..n {
                    out[map(i) * m + map(j)] = coeffs[i * n + j];
                }
            }
        }
    }
    out
}

/// Restrict an `m^dim` coefficient block to the centered `n^dim` lattice.
pub(crate) fn truncate_coeffs(
    coeffs: &[Complex64],
    m: usize,
    dim: usize,
    n: usize,
) -> Vec<Complex64> {
    assert!(m >= n);
    let mut out = vec![Complex64::new(0.0, 0.0); n.pow(dim as u32)];
    let map = |i: usize| -> usize {
        if i < n / 2 {
            i
        } else {
            m - n + i
        }
    };
    match dim {
        1 => {
            for i in 0..n {
                out[i] = coeffs[map(i)];
            }
        }
        _ => {
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = coeffs[map(i) * m + map(j)];
                }
            }
        }
    }
    out
}

/// Discrete Fourier coefficients of `f`, normalized so a constant field maps
/// to a single zero-frequency coefficient.
pub fn to_spectral(f: &Field) -> SpectralField {
    let grid = f.grid.clone();
    let coeffs = forward_raw(&f.values, grid.points_per_axis, grid.dim);
    let mut out = SpectralField { grid, coeffs };
    out.hermitian_project();
    out
}

/// Inverse transform back to a real field.
///
/// Fails when the imaginary residue exceeds `1e-8` of the field magnitude,
/// which signals coefficients that lost Hermitian symmetry.
pub fn to_physical(sf: &SpectralField) -> Result<Field> {
    let grid = sf.grid.clone();
    let data = inverse_raw(&sf.coeffs, grid.points_per_axis, grid.dim);
    let mut max_re = 0.0_f64;
    let mut max_im = 0.0_f64;
    for c in &data {
        max_re = max_re.max(c.re.abs());
        max_im = max_im.max(c.im.abs());
    }
    if max_im > HERMITIAN_TOL * max_re.max(1e-300) && max_im > 1e-300 {
        return Err(DwError::CorruptSpectral(format!(
            "imaginary residue {max_im:.3e} vs field magnitude {max_re:.3e}"
        )));
    }
    let values = data.into_iter().map(|c| c.re).collect();
    Field::new(grid, values)
}

/// Multiply coefficientwise by a real radial symbol of |xi|^2.
pub fn apply_symbol(sf: &SpectralField, symbol: impl Fn(f64) -> f64) -> Result<SpectralField> {
    let mut coeffs = Vec::with_capacity(sf.coeffs.len());
    for (c, &xs) in sf.coeffs.iter().zip(sf.grid.freq_sq.iter()) {
        let s = symbol(xs);
        if !s.is_finite() {
            return Err(DwError::InvalidArgument(format!(
                "symbol evaluates to non-finite value {s} at |xi|^2 = {xs}"
            )));
        }
        coeffs.push(c * s);
    }
    Ok(SpectralField {
        grid: sf.grid.clone(),
        coeffs,
    })
}

/// Homogeneous symbol |xi|^s; |0|^s := 0 for s > 0, 1 for s = 0, and NaN for
/// s < 0 (rejected by `apply_symbol`).
pub fn abs_symbol(s: f64) -> impl Fn(f64) -> f64 {
    move |xi_sq: f64| {
        if xi_sq == 0.0 {
            if s > 0.0 {
                0.0
            } else if s == 0.0 {
                1.0
            } else {
                f64::NAN
            }
        } else {
            xi_sq.powf(0.5 * s)
        }
    }
}

/// Inhomogeneous symbol <xi>^s = (1 + |xi|^2)^(s/2).
pub fn bracket_symbol(s: f64) -> impl Fn(f64) -> f64 {
    move |xi_sq: f64| (1.0 + xi_sq).powf(0.5 * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn make_grid_dual_lattice_1d() {
        let g = Grid::new(1, 8, PI).unwrap();
        // L = pi makes xi_k = k; lattice {-4,...,3}
        let max = g.freq_sq().iter().cloned().fold(0.0_f64, f64::max);
        assert!((max - 16.0).abs() < 1e-12);
        let zero_count = g.freq_sq().iter().filter(|&&f| f == 0.0).count();
        assert_eq!(zero_count, 1);
        assert!((g.spacing() * 8.0 - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn make_grid_dual_lattice_2d() {
        let g = Grid::new(2, 8, PI).unwrap();
        // index (3,3) -> k = (3,3), |xi|^2 = 18
        assert!((g.freq_sq()[3 * 8 + 3] - 18.0).abs() < 1e-12);
        let zero_count = g.freq_sq().iter().filter(|&&f| f == 0.0).count();
        assert_eq!(zero_count, 1);
    }

    #[test]
    fn make_grid_halved_dual_lattice() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        assert!((g.freq()[1] - 0.5).abs() < 1e-12);
        let max = g.freq_sq().iter().cloned().fold(0.0_f64, f64::max);
        assert!((max - 4.0).abs() < 1e-12);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(Grid::new(3, 8, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(1, 8, -1.0).is_err());
    }

    #[test]
    fn constant_field_single_coefficient() {
        let g = Grid::new(1, 16, PI).unwrap();
        let f = Field::from_fn(g, |_| 1.0);
        let sf = to_spectral(&f);
        assert!((sf.coeffs()[0].re - 1.0).abs() < 1e-13);
        for c in &sf.coeffs()[1..] {
            assert!(c.norm() < 1e-13);
        }
    }

    #[test]
    fn cosine_two_conjugate_coefficients() {
        let g = Grid::new(1, 16, PI).unwrap();
        let f = Field::from_fn(g, |x| x[0].cos());
        let sf = to_spectral(&f);
        for (i, c) in sf.coeffs().iter().enumerate() {
            if i == 1 || i == 15 {
                assert!((c.re - 0.5).abs() < 1e-13, "coeff {i} = {c}");
                assert!(c.im.abs() < 1e-13);
            } else {
                assert!(c.norm() < 1e-13, "coeff {i} = {c}");
            }
        }
    }

    #[test]
    fn single_pair_gives_cosine() {
        let g = Grid::new(1, 16, PI).unwrap();
        let mut sf = SpectralField::zeros(g.clone());
        sf.coeffs_mut()[1] = Complex64::new(0.5, 0.0);
        sf.coeffs_mut()[15] = Complex64::new(0.5, 0.0);
        let f = to_physical(&sf).unwrap();
        for i in 0..16 {
            let x = g.coord(i)[0];
            assert!((f.values()[i] - x.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_coefficients_zero_field() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let f = to_physical(&SpectralField::zeros(g)).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn roundtrip_random_fields() {
        let mut rng = StdRng::seed_from_u64(7);
        for dim in [1usize, 2] {
            let g = Grid::new(dim, 32, 3.0).unwrap();
            for _ in 0..50 {
                let vals: Vec<f64> = (0..g.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = Field::new(g.clone(), vals).unwrap();
                let back = to_physical(&to_spectral(&f)).unwrap();
                let err = f
                    .values()
                    .iter()
                    .zip(back.values())
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(err < 1e-12 * f.max_abs());
            }
        }
    }

    #[test]
    fn gaussian_roundtrip_relative() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let f = Field::from_fn(g, |x| (-0.5 * x[0] * x[0]).exp());
        let back = to_physical(&to_spectral(&f)).unwrap();
        let err = f
            .values()
            .iter()
            .zip(back.values())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12);
    }

    #[test]
    fn discrete_parseval() {
        let mut rng = StdRng::seed_from_u64(11);
        for dim in [1usize, 2] {
            let g = Grid::new(dim, 32, 2.5).unwrap();
            let vals: Vec<f64> = (0..g.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = Field::new(g.clone(), vals).unwrap();
            let quad = (f.values().iter().map(|v| v * v).sum::<f64>() * g.node_weight()).sqrt();
            let spec = to_spectral(&f).l2_norm();
            assert!((quad - spec).abs() < 1e-10 * quad);
        }
    }

    #[test]
    fn symbol_identity_and_laplacian() {
        let g = Grid::new(1, 16, PI).unwrap();
        let f = Field::from_fn(g, |x| x[0].cos());
        let sf = to_spectral(&f);
        let id = apply_symbol(&sf, |_| 1.0).unwrap();
        let back = to_physical(&id).unwrap();
        assert!(back
            .values()
            .iter()
            .zip(f.values())
            .all(|(a, b)| (a - b).abs() < 1e-13));
        // -Laplacian of cos(x) is cos(x)
        let lap = to_physical(&apply_symbol(&sf, |xs| xs).unwrap()).unwrap();
        assert!(lap
            .values()
            .iter()
            .zip(f.values())
            .all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn abs_symbol_eigenvalue() {
        let g = Grid::new(1, 16, PI).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * x[0]).cos());
        let out = to_physical(&apply_symbol(&to_spectral(&f), abs_symbol(1.0)).unwrap()).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn abs_symbol_negative_exponent_rejected_at_zero() {
        let g = Grid::new(1, 16, PI).unwrap();
        let f = Field::from_fn(g, |x| x[0].cos());
        assert!(apply_symbol(&to_spectral(&f), abs_symbol(-1.0)).is_err());
    }

    #[test]
    fn symbol_composition() {
        let mut rng = StdRng::seed_from_u64(3);
        let g = Grid::new(1, 32, 2.0).unwrap();
        let vals: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sf = to_spectral(&Field::new(g, vals).unwrap());
        let s1 = |xs: f64| (1.0 + xs).sqrt();
        let s2 = |xs: f64| 1.0 / (1.0 + 0.5 * xs);
        let seq = apply_symbol(&apply_symbol(&sf, s1).unwrap(), s2).unwrap();
        let prod = apply_symbol(&sf, |xs| s1(xs) * s2(xs)).unwrap();
        for (a, b) in seq.coeffs().iter().zip(prod.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn pad_truncate_roundtrip() {
        let mut rng = StdRng::seed_from_u64(5);
        for dim in [1usize, 2] {
            let n = 16usize;
            let m = 24;
            let count = n.pow(dim as u32);
            let coeffs: Vec<Complex64> = (0..count)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let back = truncate_coeffs(&pad_coeffs(&coeffs, n, dim, m), m, dim, n);
            assert_eq!(coeffs, back);
        }
    }
}
