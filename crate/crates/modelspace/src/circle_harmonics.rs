//! Uniform circle grid and the spectral bridge: Riesz projection, Herglotz
//! transform, co-analytic Toeplitz operators, H^2 inner products, model-space
//! membership residuals, and Fourier-decay smoothness reports.

use std::sync::Mutex;

use rustfft::FftPlanner;

use crate::{error::ModelError, C64};

// ---------------------------------------------------------------------------
// FFT helpers
// ---------------------------------------------------------------------------

static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn run_fft(buf: &mut [C64], inverse: bool) {
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    drop(guard);
    fft.process(buf);
}

/// Unnormalized forward DFT in place.
pub(crate) fn fft_forward(buf: &mut [C64]) {
    run_fft(buf, false);
}

/// Inverse DFT in place, normalized by 1/len.
pub(crate) fn fft_inverse(buf: &mut [C64]) {
    run_fft(buf, true);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

// ---------------------------------------------------------------------------
// Grid and spectra
// ---------------------------------------------------------------------------

/// Uniform grid `zeta_j = exp(2 pi i j / N)`, `N` a power of two, `N >= 8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleGrid {
    n: usize,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self, ModelError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(ModelError::BadGridSize(n));
        }
        Ok(CircleGrid { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node angle in turns.
    pub fn node_angle(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    /// Node on the unit circle.
    pub fn node(&self, j: usize) -> C64 {
        crate::unit(self.node_angle(j))
    }
}

/// Samples of a boundary function on a [`CircleGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: CircleGrid,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: CircleGrid, values: Vec<C64>) -> Result<Self, ModelError> {
        if values.len() != grid.len() {
            return Err(ModelError::GridMismatch(format!(
                "{} values on a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: CircleGrid, f: impl Fn(C64) -> C64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.node(j))).collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Grid mean (trapezoidal rule on the circle = plain average).
    pub fn mean(&self) -> C64 {
        self.values.iter().sum::<C64>() / self.values.len() as f64
    }

    /// Discrete Fourier coefficients.
    pub fn coefficients(&self) -> FourierCoefficients {
        let mut buf = self.values.clone();
        fft_forward(&mut buf);
        let scale = 1.0 / buf.len() as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
        FourierCoefficients { bins: buf }
    }

    /// Grid L2 norm with respect to normalized arc length.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64).sqrt()
    }
}

/// Fourier coefficients indexed `k = -N/2 .. N/2-1`, stored in DFT bin order
/// (bin `j` holds frequency `j` for `j < N/2` and `j - N` for `j >= N/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    bins: Vec<C64>,
}

impl FourierCoefficients {
    pub fn from_bins(bins: Vec<C64>) -> Self {
        FourierCoefficients { bins }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[C64] {
        &self.bins
    }

    /// Coefficient at signed frequency `k`, `-N/2 <= k < N/2`.
    pub fn get(&self, k: isize) -> C64 {
        let n = self.bins.len() as isize;
        debug_assert!(k >= -n / 2 && k < n / 2);
        self.bins[k.rem_euclid(n) as usize]
    }

    /// The analytic-side coefficients `k = 0 .. N/2 - 1`.
    pub fn analytic(&self) -> &[C64] {
        &self.bins[..self.bins.len() / 2]
    }

    /// Largest modulus over strictly negative frequencies.
    pub fn max_negative_modulus(&self) -> f64 {
        let n = self.bins.len();
        self.bins[n / 2..]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Back to grid samples.
    pub fn synthesize(&self, grid: CircleGrid) -> Result<GridFunction, ModelError> {
        if self.bins.len() != grid.len() {
            return Err(ModelError::GridMismatch(format!(
                "{} coefficients on a grid of {}",
                self.bins.len(),
                grid.len()
            )));
        }
        let mut buf = self.bins.clone();
        run_fft(&mut buf, true);
        GridFunction::new(grid, buf)
    }
}

/// Horner evaluation of an analytic-side coefficient list at `z` in the disk.
pub fn evaluate_power_series(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Riesz projection: zero all strictly negative frequencies (bins `>= N/2`,
/// which hold `k = -N/2 .. -1`).
pub fn riesz_project(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let mut c = f.coefficients();
    let n = c.bins.len();
    for b in c.bins[n / 2..].iter_mut() {
        *b = C64::new(0.0, 0.0);
    }
    c.synthesize(grid).expect("same grid")
}

/// Herglotz transform on the boundary: `Hf = 2 P_+ f - mean(f)`,
/// the boundary trace of `integral (zeta+z)/(zeta-z) f(zeta) dm(zeta)`.
pub fn herglotz(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let mut c = f.coefficients();
    let n = c.bins.len();
    for b in c.bins[1..n / 2].iter_mut() {
        *b *= 2.0;
    }
    for b in c.bins[n / 2..].iter_mut() {
        *b = C64::new(0.0, 0.0);
    }
    c.synthesize(grid).expect("same grid")
}

/// Herglotz integral of grid samples evaluated at an interior point, by the
/// analytic-side expansion `f_hat(0) + 2 sum_{k>=1} f_hat(k) z^k`.
pub fn herglotz_at(f: &GridFunction, z: C64) -> C64 {
    let c = f.coefficients();
    let a = c.analytic();
    let mut coeffs: Vec<C64> = a.to_vec();
    for x in coeffs.iter_mut().skip(1) {
        *x *= 2.0;
    }
    evaluate_power_series(&coeffs, z)
}

/// Direct quadrature of the Herglotz integral (oracle-grade, O(N) per point).
pub fn herglotz_quadrature(f: &GridFunction, z: C64) -> C64 {
    let n = f.grid().len();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let zeta = f.grid().node(j);
        acc += (zeta + z) / (zeta - z) * f.values()[j];
    }
    acc / n as f64
}

/// Co-analytic Toeplitz operator `T_conj(H) f = P_+(conj(H) f)`.
///
/// The pointwise product is formed on a 2x oversampled grid (spectra
/// zero-padded, multiplied in sample space, transformed back) so that the
/// product of two functions of degree < N/2 is alias-free, then projected
/// and downsampled back to the original grid.
pub fn toeplitz_coanalytic(symbol: &GridFunction, f: &GridFunction) -> Result<GridFunction, ModelError> {
    if symbol.grid() != f.grid() {
        return Err(ModelError::GridMismatch("symbol and argument grids differ".into()));
    }
    let n = f.grid().len();
    let up = |g: &GridFunction| -> Vec<C64> {
        let c = g.coefficients();
        let mut padded = vec![C64::new(0.0, 0.0); 2 * n];
        // Reinsert bins at their signed frequencies in the length-2N spectrum.
        for j in 0..n / 2 {
            padded[j] = c.bins[j];
        }
        for j in n / 2..n {
            padded[n + j] = c.bins[j];
        }
        run_fft(&mut padded, true);
        padded
    };
    let hs = up(symbol);
    let fs = up(f);
    let mut prod: Vec<C64> = hs.iter().zip(&fs).map(|(h, v)| h.conj() * v).collect();
    fft_forward(&mut prod);
    let scale = 1.0 / (2 * n) as f64;
    // Keep analytic frequencies 0..N/2-1, downsample to the original grid.
    let mut bins = vec![C64::new(0.0, 0.0); n];
    for (j, b) in bins.iter_mut().enumerate().take(n / 2) {
        *b = prod[j] * scale;
    }
    FourierCoefficients::from_bins(bins).synthesize(f.grid())
}

/// Analytic-side correlation `c_j = sum_{m >= 0} a_{j+m} conj(b_m)`
/// (the coefficient action of `T_conj(B)` on `A`), computed by FFT on
/// length-2K buffers; exact up to roundoff for finite coefficient lists.
pub fn analytic_correlation(a: &[C64], b: &[C64]) -> Vec<C64> {
    let k = a.len();
    assert_eq!(k, b.len());
    let mut fa = vec![C64::new(0.0, 0.0); 2 * k];
    let mut fb = vec![C64::new(0.0, 0.0); 2 * k];
    fa[..k].copy_from_slice(a);
    fb[..k].copy_from_slice(b);
    fft_forward(&mut fa);
    fft_forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y.conj();
    }
    fft_inverse(&mut fa);
    fa.truncate(k);
    fa
}

/// Analytic-side convolution `(a * b)_j = sum_{m <= j} a_m b_{j-m}`,
/// truncated to the first K coefficients.
pub fn analytic_convolution(a: &[C64], b: &[C64]) -> Vec<C64> {
    let k = a.len();
    assert_eq!(k, b.len());
    let mut fa = vec![C64::new(0.0, 0.0); 2 * k];
    let mut fb = vec![C64::new(0.0, 0.0); 2 * k];
    fa[..k].copy_from_slice(a);
    fb[..k].copy_from_slice(b);
    fft_forward(&mut fa);
    fft_forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    fft_inverse(&mut fa);
    fa.truncate(k);
    fa
}

/// Spectral H^2 inner product `sum_{k>=0} f_hat(k) conj(g_hat(k))` of
/// analytic-side grid functions.
pub fn h2_inner(f: &GridFunction, g: &GridFunction) -> Result<C64, ModelError> {
    if f.grid() != g.grid() {
        return Err(ModelError::GridMismatch("inner product grids differ".into()));
    }
    let cf = f.coefficients();
    let cg = g.coefficients();
    Ok(cf
        .analytic()
        .iter()
        .zip(cg.analytic())
        .map(|(a, b)| a * b.conj())
        .sum())
}

pub fn h2_norm(f: &GridFunction) -> f64 {
    let c = f.coefficients();
    c.analytic()
        .iter()
        .map(|a| a.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Coefficient-side H^2 norm.
pub fn h2_norm_coeffs(c: &[C64]) -> f64 {
    c.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Membership residual of `f` in `K_Theta` given boundary samples of the
/// inner function: `|| P_+(conj(Theta) f) ||_{H^2}`. Zero (at grid
/// truncation) exactly when `f` is orthogonal to `Theta H^2`, since
/// `<f, Theta z^j>` is the j-th nonnegative Fourier coefficient of
/// `conj(Theta) f`.
pub fn membership_residual_sampled(theta: &GridFunction, f: &GridFunction) -> Result<f64, ModelError> {
    Ok(h2_norm(&toeplitz_coanalytic(theta, f)?))
}

/// Coefficient-side membership residual: correlation of the analytic-side
/// coefficients of `f` against the Taylor coefficients of `Theta`.
pub fn membership_residual_coeffs(theta: &[C64], f: &[C64]) -> f64 {
    h2_norm_coeffs(&analytic_correlation(f, theta))
}

// ---------------------------------------------------------------------------
// Decay report
// ---------------------------------------------------------------------------

/// Smoothness surrogate read off Fourier-coefficient decay.
#[derive(Debug, Clone)]
pub struct DecayReport {
    /// Fitted exponent `p` in `|f_hat(k)| ~ k^-p` over the window, or `None`
    /// when the windowed tail is below the noise floor (reported as +inf).
    pub exponent: Option<f64>,
    /// `sup_k |f_hat(k)| k^p` over the window, for `p = 1, 2, 3, 4`.
    pub tail_sup: [f64; 4],
    /// Fit window `[k_min, k_max)`.
    pub window: (usize, usize),
}

impl DecayReport {
    /// Exponent with the +inf flag collapsed for comparisons.
    pub fn exponent_value(&self) -> f64 {
        self.exponent.unwrap_or(f64::INFINITY)
    }
}

/// Noise floor below which coefficients are excluded from the fit.
pub const DECAY_FIT_FLOOR: f64 = 1e-13;

/// Least-squares fit of `ln |f_hat(k)|` against `ln k` over
/// `k in [k_min, k_max)` on analytic-side coefficients.
pub fn decay_report_coeffs(coeffs: &[C64], k_min: usize, k_max: usize) -> DecayReport {
    let k_max = k_max.min(coeffs.len());
    let k_min = k_min.max(1).min(k_max);
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut m = 0usize;
    let mut tail_sup = [0.0f64; 4];
    for k in k_min..k_max {
        let a = coeffs[k].norm();
        for (p, t) in tail_sup.iter_mut().enumerate() {
            *t = t.max(a * (k as f64).powi(p as i32 + 1));
        }
        if a > DECAY_FIT_FLOOR {
            let x = (k as f64).ln();
            let y = a.ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            m += 1;
        }
    }
    let exponent = if m < 10 {
        None
    } else {
        let mf = m as f64;
        let denom = sxx - sx * sx / mf;
        let slope = (sxy - sx * sy / mf) / denom;
        Some(-slope)
    };
    DecayReport { exponent, tail_sup, window: (k_min, k_max) }
}

/// Decay report of a grid function with the default window
/// `[max(16, N/8), N/4)`.
pub fn decay_report(f: &GridFunction) -> DecayReport {
    let n = f.grid().len();
    let c = f.coefficients();
    decay_report_coeffs(c.analytic(), (n / 8).max(16), n / 4)
}

/// Default fit window for a grid of size `n`.
pub fn default_decay_window(n: usize) -> (usize, usize) {
    ((n / 8).max(16), n / 4)
}
