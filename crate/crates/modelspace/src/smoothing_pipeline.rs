//! Blow-up profile on the gaps of a boundary set, the associated outer
//! function, the smooth cutoff family, the outer smoothing sequence `H_n`,
//! and the kernel-approximation pipeline
//! `T_conj(H_n) k_Theta -> k_Theta` in `H^2`.

use crate::boundary_measures::{ArcSet, SingularMeasure};
use crate::circle_harmonics::{
    analytic_convolution, analytic_correlation, decay_report_coeffs, fft_forward, fft_inverse,
    h2_norm_coeffs, CircleGrid, DecayReport, GridFunction,
};
use crate::inner_functions::{InnerFunction, KernelSpec, SingularInner};
use crate::{error::ModelError, unit, C64};

/// Soft cap applied to the boundary weight before the spectral outer
/// construction; keeps the weight in exp-representable range and removes
/// sub-grid aliasing from the blow-up at gap endpoints.
pub const WEIGHT_CAP: f64 = 45.0;

/// Exponents of the cutoff ramp on the log scale of the gap coordinate:
/// the ramp rises from 0 at `x = n^-12` to 1 at `x = n^-1`.
const RAMP_LO_EXP: f64 = 12.0;
const RAMP_HI_EXP: f64 = 1.0;

/// Default blow-up exponent used by the kernel pipeline.
pub const DEFAULT_ALPHA: f64 = 3.0;

// ---------------------------------------------------------------------------
// Blow-up profile
// ---------------------------------------------------------------------------

/// Per-gap blow-up profile `h(t) = c (ln(e L_k / delta))^alpha`, where
/// `delta` is the distance (in turns) from `t` to the nearer endpoint of the
/// containing gap of length `L_k`; `h = +inf` on the set itself.
#[derive(Debug, Clone)]
pub struct BlowupProfile {
    set: ArcSet,
    alpha: f64,
    c: f64,
    integral: f64,
}

/// `integral_a^inf u^s e^-u du` (upper incomplete gamma at `s+1`
/// in integrand form), by composite Simpson with refinement.
fn upper_gamma_integral(s: f64, a: f64) -> f64 {
    // integrand e^{-a} (a+v)^s e^{-v}, v in [0, 60 + 10 s]
    let hi = 60.0 + 10.0 * s.max(0.0);
    let f = |v: f64| (a + v).powf(s) * (-v).exp();
    let mut prev = f64::INFINITY;
    let mut n = 256usize;
    loop {
        let h = hi / n as f64;
        let mut acc = f(0.0) + f(hi);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(j as f64 * h);
        }
        let val = acc * h / 3.0 * (-a).exp();
        if (val - prev).abs() < 1e-13 * val.abs().max(1.0) || n >= 1 << 16 {
            return val;
        }
        prev = val;
        n *= 2;
    }
}

impl BlowupProfile {
    /// Closed-form integral of `h` over one gap of length `l`:
    /// substituting `u = ln(e l / delta)` on each half gives
    /// `2 c e l * integral_{ln 2e}^inf u^alpha e^-u du`.
    fn gap_integral(alpha: f64, c: f64, l: f64) -> f64 {
        2.0 * c * std::f64::consts::E * l * upper_gamma_integral(alpha, (2.0 * std::f64::consts::E).ln())
    }

    pub fn new(set: ArcSet, alpha: f64, c: f64) -> Result<Self, ModelError> {
        if !(alpha >= 1.0) || !(c > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "profile needs alpha >= 1 and c > 0, got alpha = {alpha}, c = {c}"
            )));
        }
        if !set.is_measure_zero() {
            return Err(ModelError::NotBeurlingCarleson(format!(
                "profile set must be measure zero (complement length {:.6})",
                set.total_length()
            )));
        }
        // Sum of L_k (ln(1/L_k))^alpha must be finite: automatic for the
        // finite arc lists representable here, but guard against a
        // non-finite sum from degenerate arcs anyway.
        let integral: f64 = set
            .arcs()
            .iter()
            .map(|&(s, e)| Self::gap_integral(alpha, c, e - s))
            .sum();
        if !integral.is_finite() {
            return Err(ModelError::ProfileIntegrability(format!(
                "profile integral diverges (partial sum {integral})"
            )));
        }
        Ok(BlowupProfile { set, alpha, c, integral })
    }

    pub fn set(&self) -> &ArcSet {
        &self.set
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `integral h dm` over all gaps (closed form per gap).
    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// Containing gap of `t` as `(start, length)`, if `t` lies in a gap.
    fn gap_of(&self, t: f64) -> Option<(f64, f64)> {
        let t = t.rem_euclid(1.0);
        for &(s, e) in self.set.arcs() {
            if (t > s && t < e) || (t + 1.0 > s && t + 1.0 < e) {
                return Some((s, e - s));
            }
        }
        None
    }

    /// Profile value at angle `t` (turns); `+inf` on the set.
    pub fn eval(&self, t: f64) -> f64 {
        match self.gap_of(t) {
            None => f64::INFINITY,
            Some((s, l)) => {
                let x = (t.rem_euclid(1.0) - s).rem_euclid(1.0);
                let delta = x.min(l - x);
                self.c * (std::f64::consts::E * l / delta).ln().powf(self.alpha)
            }
        }
    }
}

/// Profile over the gaps of `set` (the set must be measure zero).
pub fn build_profile(set: ArcSet, alpha: f64, c: f64) -> Result<BlowupProfile, ModelError> {
    BlowupProfile::new(set, alpha, c)
}

// ---------------------------------------------------------------------------
// Cutoff family
// ---------------------------------------------------------------------------

/// The standard smooth step `e(x)/(e(x) + e(1-x))`, `e(x) = exp(-1/x)`:
/// 0 on `x <= 0`, 1 on `x >= 1`, C-infinity.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Cutoff `psi_n` on the unit gap coordinate: a log-scale ramp from 0 at
/// `x = n^-12` to 1 at `x = n^-1` on each side, so `psi_n = 1` on
/// `[1/n, 1 - 1/n]`, `psi_n = 0` near the endpoints, and `psi_n` is
/// pointwise nondecreasing in `n`.
#[derive(Debug, Clone, Copy)]
pub struct CutoffFamily {
    pub n: u32,
}

impl CutoffFamily {
    pub fn new(n: u32) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::InvalidParameter(format!(
                "cutoff index must be >= 2, got {n}"
            )));
        }
        Ok(CutoffFamily { n })
    }

    fn ramp(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let n = self.n as f64;
        let lo = -RAMP_LO_EXP * n.ln();
        let hi = -RAMP_HI_EXP * n.ln();
        smooth_step((x.ln() - lo) / (hi - lo))
    }

    /// `psi_n(x)` for `x` in the unit gap coordinate `(0, 1)`.
    pub fn psi(&self, x: f64) -> f64 {
        self.ramp(x) * self.ramp(1.0 - x)
    }

    /// `phi_n(t)` on the circle: `psi_n` composed with the affine
    /// parametrization of the containing gap, restricted to the first `n`
    /// gaps of the profile's arc list; 0 elsewhere.
    pub fn phi(&self, profile: &BlowupProfile, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        for &(s, e) in profile.set().arcs().iter().take(self.n as usize) {
            let x = (t - s).rem_euclid(1.0);
            if x > 0.0 && x < e - s {
                return self.psi(x / (e - s));
            }
        }
        0.0
    }
}

// ---------------------------------------------------------------------------
// Smoothing weight and the spectral outer construction
// ---------------------------------------------------------------------------

/// Capped smoothing weight `w = h (1 - phi_n)` sampled at the grid nodes;
/// nodes on the set carry the cap value. The soft cap
/// `w / (1 + (w/45)^8)^{1/8}` leaves moderate values untouched and clamps
/// the endpoint blow-up smoothly.
pub fn smoothing_weight(profile: &BlowupProfile, cutoff: CutoffFamily, grid: CircleGrid) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|j| {
            let t = grid.node_angle(j);
            let h = profile.eval(t);
            let w = if h.is_finite() {
                h * (1.0 - cutoff.phi(profile, t))
            } else {
                WEIGHT_CAP
            };
            w / (1.0 + (w / WEIGHT_CAP).powi(8)).powf(0.125)
        })
        .collect()
}

/// Outer function of a nonnegative boundary weight, constructed spectrally:
/// `U = idft(dft(w) .* m)` with the Herglotz multiplier
/// `m = [1, 2, 2, ..., 2, 1]` (weight 1 at frequency 0 and Nyquist), and
/// `H = exp(-U)`. At the grid nodes `Re U = w` exactly (an algebraic DFT
/// identity), so `|H| = exp(-w) <= 1` up to roundoff.
pub struct SmoothedOuter {
    grid: CircleGrid,
    weight: Vec<f64>,
    boundary: Vec<C64>,
}

impl SmoothedOuter {
    pub fn from_weight(grid: CircleGrid, weight: Vec<f64>) -> Result<Self, ModelError> {
        let n = grid.len();
        if weight.len() != n {
            return Err(ModelError::GridMismatch(format!(
                "{} weight samples on a grid of {}",
                weight.len(),
                n
            )));
        }
        let mut buf: Vec<C64> = weight.iter().map(|&w| C64::new(w, 0.0)).collect();
        fft_forward(&mut buf);
        for b in buf[1..n / 2].iter_mut() {
            *b *= 2.0;
        }
        for b in buf[n / 2 + 1..].iter_mut() {
            *b = C64::new(0.0, 0.0);
        }
        fft_inverse(&mut buf);
        for b in buf.iter_mut() {
            *b = (-*b).exp();
        }
        Ok(SmoothedOuter { grid, weight, boundary: buf })
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    /// Capped weight samples.
    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    /// Boundary samples of `H`.
    pub fn boundary(&self) -> GridFunction {
        GridFunction::new(self.grid, self.boundary.clone()).expect("lengths match")
    }

    pub fn boundary_values(&self) -> &[C64] {
        &self.boundary
    }

    /// Grid mean of the capped weight (`= -ln |H(0)|`).
    pub fn weight_mean(&self) -> f64 {
        self.weight.iter().sum::<f64>() / self.weight.len() as f64
    }

    pub fn sup_modulus(&self) -> f64 {
        self.boundary.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Median of `|H - 1|` over the grid.
    pub fn median_deviation(&self) -> f64 {
        let mut d: Vec<f64> = self
            .boundary
            .iter()
            .map(|v| (v - C64::new(1.0, 0.0)).norm())
            .collect();
        d.sort_by(f64::total_cmp);
        let n = d.len();
        if n % 2 == 1 {
            d[n / 2]
        } else {
            0.5 * (d[n / 2 - 1] + d[n / 2])
        }
    }

    /// Interior evaluation by trapezoidal quadrature of the Herglotz
    /// integral of the weight samples.
    pub fn eval_interior(&self, z: C64) -> C64 {
        let n = self.grid.len();
        let mut acc = C64::new(0.0, 0.0);
        for (j, &w) in self.weight.iter().enumerate() {
            let zeta = self.grid.node(j);
            acc += w * (zeta + z) / (zeta - z);
        }
        (-acc / n as f64).exp()
    }

    /// Analytic-side Fourier coefficients of the boundary trace
    /// (length `N/2`), with the largest negative-frequency leak.
    pub fn analytic_coefficients(&self) -> (Vec<C64>, f64) {
        let mut buf = self.boundary.clone();
        fft_forward(&mut buf);
        let n = buf.len();
        let scale = 1.0 / n as f64;
        let leak = buf[n / 2 + 1..]
            .iter()
            .map(|c| c.norm() * scale)
            .fold(0.0, f64::max);
        buf.truncate(n / 2);
        for b in buf.iter_mut() {
            *b *= scale;
        }
        (buf, leak)
    }
}

/// The n-th smoothing function `H_n` of the sequence: outer function of the
/// capped weight `h (1 - phi_n)` on the grid.
pub fn smoothing_function(
    profile: &BlowupProfile,
    n: u32,
    grid: CircleGrid,
) -> Result<SmoothedOuter, ModelError> {
    let cutoff = CutoffFamily::new(n)?;
    SmoothedOuter::from_weight(grid, smoothing_weight(profile, cutoff, grid))
}

// ---------------------------------------------------------------------------
// Outer function of the full profile (quadrature-based)
// ---------------------------------------------------------------------------

/// Recursive adaptive Simpson on a complex-valued integrand; `None` when the
/// depth budget is exhausted before the tolerance is met.
fn adaptive_simpson(
    f: &impl Fn(f64) -> C64,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Option<C64> {
    fn simpson(fa: C64, fm: C64, fb: C64, h: f64) -> C64 {
        (fa + fm * 4.0 + fb) * (h / 6.0)
    }
    fn rec(
        f: &impl Fn(f64) -> C64,
        a: f64,
        b: f64,
        fa: C64,
        fm: C64,
        fb: C64,
        whole: C64,
        tol: f64,
        depth: u32,
    ) -> Option<C64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.norm() <= 15.0 * tol {
            return Some(left + right + delta / 15.0);
        }
        if depth == 0 {
            return None;
        }
        let l = rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Some(l + r)
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// The outer function `g(z) = exp(-integral (zeta+z)/(zeta-z) h dm)` of the
/// uncapped profile, evaluated by per-gap quadrature with the substitution
/// `delta = (L/2) e^-v` absorbing the endpoint log-singularity.
#[derive(Debug, Clone)]
pub struct OuterFunction {
    profile: BlowupProfile,
}

pub fn outer_from_profile(profile: &BlowupProfile) -> OuterFunction {
    OuterFunction { profile: profile.clone() }
}

impl OuterFunction {
    /// `|g(0)| = exp(-integral h dm)` in closed form.
    pub fn modulus_at_zero(&self) -> f64 {
        (-self.profile.integral()).exp()
    }

    /// Herglotz integral of `h` at `z`, `|z| < 1`.
    fn herglotz_of_profile(&self, z: C64) -> Result<C64, ModelError> {
        if z.norm() >= 1.0 {
            return Err(ModelError::InvalidParameter(format!(
                "outer evaluation needs |z| < 1, got |z| = {}",
                z.norm()
            )));
        }
        let p = &self.profile;
        let mut total = C64::new(0.0, 0.0);
        for &(s, e) in p.set().arcs() {
            let l = e - s;
            // Two half-gap integrals: t = s + delta and t = e - delta,
            // delta = (l/2) e^-v, v in [0, inf):
            // integral_0^{l/2} K(t, z) h dt
            //   = integral_0^inf K(.) c (ln 2e + v)^alpha (l/2) e^-v dv.
            for endpoint_left in [true, false] {
                let f = |v: f64| -> C64 {
                    let delta = 0.5 * l * (-v).exp();
                    let t = if endpoint_left { s + delta } else { e - delta };
                    let zeta = unit(t);
                    let hval = p.c * ((2.0 * std::f64::consts::E).ln() + v).powf(p.alpha);
                    (zeta + z) / (zeta - z) * hval * 0.5 * l * (-v).exp()
                };
                // e^-v v^alpha decay: truncate where the tail is negligible;
                // adaptive subdivision resolves both the slow tail and the
                // kernel peak when z points at this gap.
                let hi = 80.0 + 10.0 * p.alpha;
                // seed panels: geometric near 0 where the kernel can peak
                let mut cuts = vec![0.0];
                let mut x = 1e-3;
                while x < hi {
                    cuts.push(x);
                    x *= 2.0;
                }
                cuts.push(hi);
                for w in cuts.windows(2) {
                    total += adaptive_simpson(&f, w[0], w[1], 1e-11, 40).ok_or_else(|| {
                        ModelError::QuadratureFailure(format!(
                            "outer quadrature stalled near gap ({s}, {e}) at z = {z}"
                        ))
                    })?;
                }
            }
        }
        Ok(total)
    }

    pub fn eval(&self, z: C64) -> Result<C64, ModelError> {
        Ok((-self.herglotz_of_profile(z)?).exp())
    }
}

// ---------------------------------------------------------------------------
// Smooth product check
// ---------------------------------------------------------------------------

/// Result of the boundary-product smoothness check.
#[derive(Debug, Clone)]
pub struct SmoothProductReport {
    /// Decay report of `P_+(conj(H) S)` on the grid.
    pub product_decay: DecayReport,
    /// Decay report of `S` itself on the same grid (baseline).
    pub raw_decay: DecayReport,
    /// `(r, |S'(r zeta) H(r zeta)|)` along a radius toward a support point.
    pub radial_products: Vec<(f64, f64)>,
}

/// Projects `conj(H_n) S_nu` to the analytic side and reports its coefficient
/// decay against that of `S_nu` alone, plus `|S' H|` along a radius toward
/// the support (the products must die out at the set).
pub fn smooth_product_check(
    s: &SingularInner,
    h: &SmoothedOuter,
) -> Result<SmoothProductReport, ModelError> {
    let grid = h.grid();
    let n = grid.len();
    // Support must sit inside the profile set: every atom of the discretized
    // measure has h = +inf there, checked via the grid weight being capped.
    let s_grid = sample_inner_on_grid(&InnerFunction::new(
        crate::inner_functions::BlaschkeProduct::empty(),
        s.clone(),
    ), grid)?;
    let s_coeffs = {
        let c = s_grid.coefficients();
        c.analytic().to_vec()
    };
    let raw_decay = decay_report_coeffs(&s_coeffs, (n / 8).max(16), n / 4);
    let (h_coeffs, _) = h.analytic_coefficients();
    let prod = analytic_correlation(&s_coeffs, &h_coeffs);
    let product_decay = decay_report_coeffs(&prod, (n / 8).max(16), n / 4);

    // Radial check toward the first support point.
    let target = s
        .measure()
        .atoms
        .first()
        .map(|&(t, _)| t)
        .or_else(|| s.measure().components.first().map(|c| c.schedule.base_start))
        .unwrap_or(0.0);
    let zeta = unit(target);
    let mut radial_products = Vec::new();
    for &r in &[0.9, 0.99, 0.999, 1.0 - 1e-4] {
        let z = zeta * r;
        let sp = s.derivative(z, 1)?.value;
        let hv = h.eval_interior(z);
        radial_products.push((r, (sp * hv).norm()));
    }
    Ok(SmoothProductReport { product_decay, raw_decay, radial_products })
}

/// Samples an inner function on the grid; nodes on the singular support are
/// evaluated half a grid step away and counted.
pub fn sample_inner_on_grid(
    theta: &InnerFunction,
    grid: CircleGrid,
) -> Result<GridFunction, ModelError> {
    let n = grid.len();
    let half = 0.5 / n as f64;
    let mut vals = Vec::with_capacity(n);
    for j in 0..n {
        let t = grid.node_angle(j);
        let v = match theta.eval(unit(t)) {
            Ok(v) => v,
            Err(ModelError::OnSingularSupport { .. }) => theta.eval(unit(t + half))?,
            Err(e) => return Err(e),
        };
        vals.push(v);
    }
    GridFunction::new(grid, vals)
}

// ---------------------------------------------------------------------------
// Kernel approximation pipeline
// ---------------------------------------------------------------------------

/// Scalar outcomes for one smoothing index.
#[derive(Debug, Clone)]
pub struct ApproxRow {
    pub n: u32,
    /// `|| T_conj(H_n) k - k ||_{H^2}` (after re-projection onto `K_Theta`).
    pub h2_error: f64,
    /// Model-space membership residual `|| P_+(conj(Theta) f) ||`.
    pub membership_residual: f64,
    /// Fitted decay exponent of the approximant (`None` = below noise floor).
    pub decay_exponent: Option<f64>,
    /// Dominated-convergence surrogate: grid L2 norm of `(H_n - 1) k`.
    pub domination_norm: f64,
    pub sup_h: f64,
    pub median_h_deviation: f64,
    pub weight_mean: f64,
    pub negative_leak: f64,
}

/// Full pipeline outcome across the configured smoothing indices.
#[derive(Debug, Clone)]
pub struct KernelApproxReport {
    pub kernel_decay: Option<f64>,
    pub kernel_norm: f64,
    /// `integral h dm` of the profile (closed form).
    pub profile_integral: f64,
    pub rows: Vec<ApproxRow>,
}

/// Support set of a singular measure as an `ArcSet` (atom points plus
/// depth-truncated component supports).
pub fn measure_support_set(measure: &SingularMeasure) -> Result<ArcSet, ModelError> {
    let mut set: Option<ArcSet> = None;
    if !measure.atoms.is_empty() {
        let pts: Vec<f64> = measure.atoms.iter().map(|&(t, _)| t).collect();
        set = Some(ArcSet::from_points(&pts)?);
    }
    for c in &measure.components {
        let piece = c.schedule.arc_set(c.schedule.depth.min(12))?;
        set = Some(match set {
            Some(prev) => prev.union_sets(&piece)?,
            None => piece,
        });
    }
    set.ok_or_else(|| {
        ModelError::InvalidMeasure("kernel pipeline needs a nonempty singular measure".into())
    })
}

/// Runs `T_conj(H_n) k_Theta(lambda, .)` for each configured `n` and reports
/// the `H^2` error, the membership residual, and the decay exponents.
///
/// The operator acts on the first `N/2` Taylor coefficients: the correlation
/// `f_j = sum_m khat_{j+m} conj(Hhat_m)` realizes `P_+(conj(H) k)`, and the
/// result is re-projected onto `K_Theta` via
/// `f <- f - Theta P_+(conj(Theta) f)` (spectrally exact up to truncation).
/// Requires the measure of `Theta` to have no Korenblum-Roberts part.
pub fn approximate_kernel(
    theta: &InnerFunction,
    lambda: C64,
    ns: &[u32],
    grid: CircleGrid,
    alpha: f64,
    c: f64,
) -> Result<KernelApproxReport, ModelError> {
    let dec = theta.singular.measure().decompose()?;
    if !dec.nu_k.is_empty() {
        return Err(ModelError::KorenblumRobertsPart(dec.nu_k.total_mass()));
    }
    let n_grid = grid.len();
    let k_len = n_grid / 2;
    let spec = KernelSpec::new(theta.clone(), lambda)?;
    let kh = spec.taylor(k_len)?;
    let th = theta.taylor(k_len);
    let (fit_lo, fit_hi) = ((n_grid / 8).max(16), n_grid / 4);
    let kernel_decay = decay_report_coeffs(&kh, fit_lo, fit_hi).exponent;
    let kernel_norm = h2_norm_coeffs(&kh);

    let profile = BlowupProfile::new(measure_support_set(theta.singular.measure())?, alpha, c)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let outer = smoothing_function(&profile, n, grid)?;
        let (ha, leak) = outer.analytic_coefficients();
        let mut f = analytic_correlation(&kh, &ha);
        // Re-project onto K_Theta.
        let r = analytic_correlation(&f, &th);
        let back = analytic_convolution(&th, &r);
        for (fi, bi) in f.iter_mut().zip(&back) {
            *fi -= bi;
        }
        let h2_error = {
            let mut acc = 0.0;
            for (fi, ki) in f.iter().zip(&kh) {
                acc += (fi - ki).norm_sqr();
            }
            acc.sqrt()
        };
        let membership_residual = h2_norm_coeffs(&analytic_correlation(&f, &th));
        let decay_exponent = decay_report_coeffs(&f, fit_lo, fit_hi).exponent;
        // Dominated-convergence surrogate ||(H_n - 1) k|| on the grid:
        // spectrally, || conv(Hhat - e_0, khat) || over 2K coefficients.
        let domination_norm = {
            let mut hm1 = ha.clone();
            hm1[0] -= C64::new(1.0, 0.0);
            h2_norm_coeffs(&full_convolution(&hm1, &kh))
        };
        rows.push(ApproxRow {
            n,
            h2_error,
            membership_residual,
            decay_exponent,
            domination_norm,
            sup_h: outer.sup_modulus(),
            median_h_deviation: outer.median_deviation(),
            weight_mean: outer.weight_mean(),
            negative_leak: leak,
        });
    }
    Ok(KernelApproxReport {
        kernel_decay,
        kernel_norm,
        profile_integral: profile.integral(),
        rows,
    })
}

/// Untruncated linear convolution (length `2K - 1`, zero-padded FFT).
fn full_convolution(a: &[C64], b: &[C64]) -> Vec<C64> {
    let k = a.len();
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
    fa
}

/// Pipeline for the truncated inner function `Theta_N`, plus the kernel gap
/// `|k_{Theta_N}(lambda, z) - k_Theta(lambda, z)|` at sample points.
#[derive(Debug, Clone)]
pub struct TruncatedApproxReport {
    pub report: KernelApproxReport,
    pub kernel_gaps: Vec<(C64, f64)>,
}

pub fn approximate_truncated(
    theta: &InnerFunction,
    lambda: C64,
    n_factors: usize,
    ns: &[u32],
    grid: CircleGrid,
    alpha: f64,
    c: f64,
) -> Result<TruncatedApproxReport, ModelError> {
    let truncated = theta.factor_truncate(n_factors)?;
    let full_spec = KernelSpec::new(theta.clone(), lambda)?;
    let trunc_spec = KernelSpec::new(truncated.clone(), lambda)?;
    let mut kernel_gaps = Vec::new();
    for z in [C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(-0.3, 0.4)] {
        let gap = (trunc_spec.eval(z)? - full_spec.eval(z)?).norm();
        kernel_gaps.push((z, gap));
    }
    let report = approximate_kernel(&truncated, lambda, ns, grid, alpha, c)?;
    Ok(TruncatedApproxReport { report, kernel_gaps })
}
