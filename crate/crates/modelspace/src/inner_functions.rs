//! Blaschke products, singular inner functions, full inner functions
//! `Theta = B * S_nu`, their derivatives up to order 4, Taylor coefficients,
//! and reproducing kernels of the model space `K_Theta`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::boundary_measures::SingularMeasure;
use crate::circle_harmonics::analytic_convolution;
use crate::{error::ModelError, unit, C64};

/// Default discretization tolerance for evaluating Cantor-type measures.
pub const DEFAULT_EVAL_TOL: f64 = 1e-8;

/// Deepest Cantor discretization level the evaluator will refine to.
const MAX_LEVEL: u32 = 20;

/// Distance below which a boundary point counts as on the singular support.
const SUPPORT_EPS: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Order-4 jets (truncated Taylor arithmetic at a base point)
// ---------------------------------------------------------------------------

type Jet = [C64; 5];

const JET_ZERO: C64 = C64::new(0.0, 0.0);

fn jet_const(c: C64) -> Jet {
    [c, JET_ZERO, JET_ZERO, JET_ZERO, JET_ZERO]
}

fn jet_mul(a: &Jet, b: &Jet) -> Jet {
    let mut out = [JET_ZERO; 5];
    for i in 0..5 {
        for j in 0..5 - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// `exp(u)` for a jet `u` via `h' = u' h`:
/// `h_k = (1/k) sum_{j=1..k} j u_j h_{k-j}`.
fn jet_exp(u: &Jet) -> Jet {
    let mut h = [JET_ZERO; 5];
    h[0] = u[0].exp();
    for k in 1..5 {
        let mut acc = JET_ZERO;
        for j in 1..=k {
            acc += u[j] * h[k - j] * j as f64;
        }
        h[k] = acc / k as f64;
    }
    h
}

// ---------------------------------------------------------------------------
// Blaschke products
// ---------------------------------------------------------------------------

/// Finite Blaschke product with zeros `a_n` in the open disk. The factor at a
/// zero `a != 0` is `(|a|/a)(a - z)/(1 - conj(a) z)`; at `a = 0` the factor is
/// `z` (the prefactor is undefined there).
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<C64>,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<C64>) -> Result<Self, ModelError> {
        for a in &zeros {
            if a.norm() >= 1.0 {
                return Err(ModelError::InvalidParameter(format!(
                    "Blaschke zero {a} not in the open disk"
                )));
            }
        }
        Ok(BlaschkeProduct { zeros })
    }

    pub fn empty() -> Self {
        BlaschkeProduct { zeros: Vec::new() }
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for &a in &self.zeros {
            if a == JET_ZERO {
                acc *= z;
            } else {
                let c = a.norm() / a.norm_sqr() * a.conj(); // |a|/a
                acc *= c * (a - z) / (C64::new(1.0, 0.0) - a.conj() * z);
            }
        }
        acc
    }

    /// Order-4 jet at `z` (Taylor coefficients of the product about `z`).
    fn jet(&self, z: C64) -> Jet {
        let mut acc = jet_const(C64::new(1.0, 0.0));
        for &a in &self.zeros {
            let f = if a == JET_ZERO {
                [z, C64::new(1.0, 0.0), JET_ZERO, JET_ZERO, JET_ZERO]
            } else {
                // b = c/abar + c(abar a - 1)/(abar (1 - abar z));
                // Taylor coefficient k >= 1: c (abar a - 1) abar^{k-1} / (1 - abar z)^{k+1}.
                let c = a.norm() / a.norm_sqr() * a.conj();
                let ab = a.conj();
                let w = C64::new(1.0, 0.0) - ab * z;
                let lead = c * (ab * a - C64::new(1.0, 0.0));
                let mut f = [JET_ZERO; 5];
                f[0] = c * (a - z) / w;
                let mut pw = w * w;
                let mut abk = C64::new(1.0, 0.0);
                for item in f.iter_mut().skip(1) {
                    *item = lead * abk / pw;
                    pw *= w;
                    abk *= ab;
                }
                f
            };
            acc = jet_mul(&acc, &f);
        }
        acc
    }

    /// Taylor coefficients at the origin, length `k_len`.
    pub fn taylor(&self, k_len: usize) -> Vec<C64> {
        let mut acc = vec![JET_ZERO; k_len];
        if k_len == 0 {
            return acc;
        }
        acc[0] = C64::new(1.0, 0.0);
        for &a in &self.zeros {
            let mut f = vec![JET_ZERO; k_len];
            if a == JET_ZERO {
                if k_len > 1 {
                    f[1] = C64::new(1.0, 0.0);
                }
            } else {
                // c (a - z) sum abar^k z^k: f_0 = |a|,
                // f_k = c abar^{k-1} (|a|^2 - 1) for k >= 1.
                let c = a.norm() / a.norm_sqr() * a.conj();
                f[0] = C64::new(a.norm(), 0.0);
                let lead = c * (a.norm_sqr() - 1.0);
                let mut abk = C64::new(1.0, 0.0);
                for item in f.iter_mut().skip(1) {
                    *item = lead * abk;
                    abk *= a.conj();
                }
            }
            acc = analytic_convolution(&acc, &f);
        }
        acc
    }
}

/// Product of Blaschke factors at the given zeros.
pub fn eval_blaschke(zeros: &[C64], z: C64) -> Result<C64, ModelError> {
    Ok(BlaschkeProduct::new(zeros.to_vec())?.eval(z))
}

// ---------------------------------------------------------------------------
// Singular inner functions
// ---------------------------------------------------------------------------

/// `S_nu(z) = exp(-integral (zeta+z)/(zeta-z) dnu(zeta))` for a positive
/// singular measure, evaluated by exact summation over atoms; Cantor-type
/// components are discretized adaptively until the evaluation error bound
/// drops below `tolerance`.
pub struct SingularInner {
    measure: SingularMeasure,
    tolerance: f64,
    cache: Mutex<HashMap<u32, Arc<crate::boundary_measures::DiscretizedMeasure>>>,
}

impl std::fmt::Debug for SingularInner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SingularInner")
            .field("measure", &self.measure)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl Clone for SingularInner {
    fn clone(&self) -> Self {
        SingularInner {
            measure: self.measure.clone(),
            tolerance: self.tolerance,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

/// Evaluation result carrying the discretization error bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundedValue {
    pub value: C64,
    pub error_bound: f64,
}

/// Derivative value with the empirical constant of the crude growth bound
/// `|S^(k)(z)| <= D_k dist(z, supp nu)^{-2k}`.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeValue {
    pub value: C64,
    /// `|value| * dist^{2k}`; finite whenever the evaluation succeeded.
    pub empirical_constant: f64,
}

impl SingularInner {
    pub fn new(measure: SingularMeasure) -> Result<Self, ModelError> {
        Self::with_tolerance(measure, DEFAULT_EVAL_TOL)
    }

    pub fn with_tolerance(measure: SingularMeasure, tolerance: f64) -> Result<Self, ModelError> {
        measure.validate()?;
        if !(tolerance > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(SingularInner { measure, tolerance, cache: Mutex::new(HashMap::new()) })
    }

    pub fn measure(&self) -> &SingularMeasure {
        &self.measure
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn discretized(&self, level: u32) -> Arc<crate::boundary_measures::DiscretizedMeasure> {
        let mut cache = self.cache.lock().unwrap();
        cache
            .entry(level)
            .or_insert_with(|| Arc::new(self.measure.discretize(level)))
            .clone()
    }

    /// Smallest level at which the symmetric discretization bound at distance
    /// `d` meets the tolerance, capped at [`MAX_LEVEL`].
    fn level_for(&self, z: C64, d: f64) -> u32 {
        if self.measure.is_atomic() {
            return 0;
        }
        for level in 2..MAX_LEVEL {
            if self.discretized(level).symmetric_error_bound(z, d) < self.tolerance {
                return level;
            }
        }
        MAX_LEVEL
    }

    fn support_check(&self, z: C64) -> Result<f64, ModelError> {
        let d = self.measure.support_distance(z);
        if d <= SUPPORT_EPS && z.norm() > 1.0 - 1e-9 {
            return Err(ModelError::OnSingularSupport { dist: d });
        }
        if d <= f64::EPSILON {
            return Err(ModelError::OnSingularSupport { dist: d });
        }
        Ok(d)
    }

    /// Value together with the discretization error bound.
    pub fn eval_with_bound(&self, z: C64) -> Result<BoundedValue, ModelError> {
        let d = self.support_check(z)?;
        let level = self.level_for(z, d);
        Ok(self.eval_at_level_with_distance(z, d, level))
    }

    /// Evaluation at a fixed discretization level (bound reported as-is).
    pub fn eval_at_level(&self, z: C64, level: u32) -> Result<BoundedValue, ModelError> {
        let d = self.support_check(z)?;
        Ok(self.eval_at_level_with_distance(z, d, level))
    }

    fn eval_at_level_with_distance(&self, z: C64, d: f64, level: u32) -> BoundedValue {
        let disc = self.discretized(level);
        let mut g = JET_ZERO;
        for &(t, m) in &disc.measure.atoms {
            let zeta = unit(t);
            g += m * (zeta + z) / (zeta - z);
        }
        BoundedValue { value: (-g).exp(), error_bound: disc.symmetric_error_bound(z, d) }
    }

    pub fn eval(&self, z: C64) -> Result<C64, ModelError> {
        Ok(self.eval_with_bound(z)?.value)
    }

    /// Jet of `S` at `z` using the discretized atoms: the Herglotz integral
    /// has Taylor coefficients `g_j = sum m 2 zeta / (zeta - z)^{j+1}` for
    /// `j >= 1`, and `S = exp(-G)`.
    fn jet(&self, z: C64, d: f64) -> Jet {
        let level = self.level_for(z, d);
        let disc = self.discretized(level);
        let mut u = [JET_ZERO; 5];
        for &(t, m) in &disc.measure.atoms {
            let zeta = unit(t);
            let w = zeta - z;
            u[0] -= m * (zeta + z) / w;
            let mut pw = w * w;
            for item in u.iter_mut().skip(1) {
                *item -= m * 2.0 * zeta / pw;
                pw *= w;
            }
        }
        jet_exp(&u)
    }

    /// k-th derivative, `1 <= k <= 4`.
    pub fn derivative(&self, z: C64, k: u32) -> Result<DerivativeValue, ModelError> {
        if k == 0 || k > 4 {
            return Err(ModelError::UnsupportedOrder(k));
        }
        let d = self.support_check(z)?;
        let jet = self.jet(z, d);
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        let value = jet[k as usize] * fact;
        Ok(DerivativeValue {
            value,
            empirical_constant: value.norm() * d.powi(2 * k as i32),
        })
    }

    /// Taylor coefficients at the origin, length `k_len`.
    ///
    /// Atoms use the exact three-term recurrence (see [`atom_taylor`]);
    /// Cantor-type components are discretized at `min(depth, 12)` first.
    pub fn taylor(&self, k_len: usize) -> Vec<C64> {
        let disc = if self.measure.is_atomic() {
            None
        } else {
            let level = self
                .measure
                .components
                .iter()
                .map(|c| c.schedule.depth.min(12))
                .max()
                .unwrap();
            Some(self.discretized(level))
        };
        let atoms: &[(f64, f64)] = match &disc {
            Some(d) => &d.measure.atoms,
            None => &self.measure.atoms,
        };
        atomic_inner_taylor(atoms, k_len)
    }
}

/// Taylor coefficients of `exp(-m (1+z)/(1-z))` (atom of mass `m` at 1).
///
/// From `(1-z)^2 S' = -2m S`: `s_0 = e^{-m}`, `s_1 = -2m s_0`,
/// `(k+1) s_{k+1} = (2k - 2m) s_k - (k-1) s_{k-1}`. The recurrence is exact
/// and numerically benign (validated against extended precision).
pub fn atom_taylor(mass: f64, k_len: usize) -> Vec<f64> {
    let mut s = vec![0.0; k_len];
    if k_len == 0 {
        return s;
    }
    s[0] = (-mass).exp();
    if k_len > 1 {
        s[1] = -2.0 * mass * s[0];
    }
    for k in 1..k_len.saturating_sub(1) {
        let kf = k as f64;
        s[k + 1] = ((2.0 * kf - 2.0 * mass) * s[k] - (kf - 1.0) * s[k - 1]) / (kf + 1.0);
    }
    s
}

/// Taylor coefficients of the atomic singular inner function: each atom at
/// `zeta_0 = unit(t)` contributes the mass-`m` series rotated by
/// `conj(zeta_0)^k`; atoms combine by Cauchy convolution.
pub fn atomic_inner_taylor(atoms: &[(f64, f64)], k_len: usize) -> Vec<C64> {
    let mut acc: Vec<C64> = vec![JET_ZERO; k_len];
    if k_len == 0 {
        return acc;
    }
    acc[0] = C64::new(1.0, 0.0);
    for &(t, m) in atoms {
        let base = atom_taylor(m, k_len);
        let rot = unit(t).conj();
        let mut f: Vec<C64> = Vec::with_capacity(k_len);
        let mut r = C64::new(1.0, 0.0);
        for b in base {
            f.push(b * r);
            r *= rot;
        }
        acc = analytic_convolution(&acc, &f);
    }
    acc
}

/// `S_nu(z)` for a measure given directly.
pub fn eval_singular_inner(measure: &SingularMeasure, z: C64) -> Result<BoundedValue, ModelError> {
    SingularInner::new(measure.clone())?.eval_with_bound(z)
}

// ---------------------------------------------------------------------------
// Full inner functions
// ---------------------------------------------------------------------------

/// `Theta = B * S_nu`.
#[derive(Debug, Clone)]
pub struct InnerFunction {
    pub blaschke: BlaschkeProduct,
    pub singular: SingularInner,
}

impl InnerFunction {
    pub fn new(blaschke: BlaschkeProduct, singular: SingularInner) -> Self {
        InnerFunction { blaschke, singular }
    }

    pub fn from_measure(measure: SingularMeasure) -> Result<Self, ModelError> {
        Ok(InnerFunction::new(BlaschkeProduct::empty(), SingularInner::new(measure)?))
    }

    pub fn from_zeros(zeros: Vec<C64>) -> Result<Self, ModelError> {
        Ok(InnerFunction::new(
            BlaschkeProduct::new(zeros)?,
            SingularInner::new(SingularMeasure::default())?,
        ))
    }

    /// Identically-one inner function (empty product, zero measure).
    pub fn one() -> Self {
        InnerFunction::new(
            BlaschkeProduct::empty(),
            SingularInner::new(SingularMeasure::default()).unwrap(),
        )
    }

    pub fn eval(&self, z: C64) -> Result<C64, ModelError> {
        Ok(self.blaschke.eval(z) * self.singular.eval(z)?)
    }

    pub fn eval_with_bound(&self, z: C64) -> Result<BoundedValue, ModelError> {
        let s = self.singular.eval_with_bound(z)?;
        let b = self.blaschke.eval(z);
        Ok(BoundedValue { value: b * s.value, error_bound: s.error_bound })
    }

    /// k-th derivative of the product, `1 <= k <= 4`, by jet multiplication.
    pub fn derivative(&self, z: C64, k: u32) -> Result<DerivativeValue, ModelError> {
        if k == 0 || k > 4 {
            return Err(ModelError::UnsupportedOrder(k));
        }
        let d = self.singular.support_check(z)?;
        let jet = jet_mul(&self.blaschke.jet(z), &self.singular.jet(z, d));
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        let value = jet[k as usize] * fact;
        Ok(DerivativeValue {
            value,
            empirical_constant: value.norm() * d.powi(2 * k as i32),
        })
    }

    /// Taylor coefficients at the origin, length `k_len`.
    pub fn taylor(&self, k_len: usize) -> Vec<C64> {
        if self.blaschke.zeros().is_empty() {
            return self.singular.taylor(k_len);
        }
        let s = self.singular.taylor(k_len);
        let b = self.blaschke.taylor(k_len);
        analytic_convolution(&s, &b)
    }

    /// Truncation `Theta_N = B_N S_{nu_N}`: the first `N` Blaschke factors
    /// and the restriction of the Beurling-Carleson part of the measure to
    /// the first `N` witnessing pieces (atoms first, then BC components, in
    /// decomposition order). Fails when the measure has a nonzero
    /// Korenblum-Roberts part.
    pub fn factor_truncate(&self, n: usize) -> Result<InnerFunction, ModelError> {
        let dec = self.singular.measure().decompose()?;
        if !dec.nu_k.is_empty() {
            return Err(ModelError::DecompositionRequired(format!(
                "measure has a Korenblum-Roberts part of mass {:.6}; truncate nu_C only",
                dec.nu_k.total_mass()
            )));
        }
        let zeros: Vec<C64> = self.blaschke.zeros().iter().take(n).copied().collect();
        let mut measure = SingularMeasure::default();
        let mut taken = 0usize;
        for &(p, m) in &dec.nu_c.atoms {
            if taken == n {
                break;
            }
            measure.atoms.push((p, m));
            taken += 1;
        }
        for c in &dec.nu_c.components {
            if taken == n {
                break;
            }
            measure.components.push(c.clone());
            taken += 1;
        }
        Ok(InnerFunction::new(
            BlaschkeProduct::new(zeros)?,
            SingularInner::with_tolerance(measure, self.singular.tolerance())?,
        ))
    }
}

// ---------------------------------------------------------------------------
// Reproducing kernels
// ---------------------------------------------------------------------------

/// The kernel `k_Theta(lambda, .)` of the model space `K_Theta`.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub theta: InnerFunction,
    pub lambda: C64,
}

impl KernelSpec {
    pub fn new(theta: InnerFunction, lambda: C64) -> Result<Self, ModelError> {
        if lambda.norm() >= 1.0 {
            return Err(ModelError::InvalidParameter(format!(
                "kernel base point {lambda} not in the open disk"
            )));
        }
        Ok(KernelSpec { theta, lambda })
    }

    /// `(1 - conj(Theta(lambda)) Theta(z)) / (1 - conj(lambda) z)`.
    pub fn eval(&self, z: C64) -> Result<C64, ModelError> {
        let tl = self.theta.eval(self.lambda)?;
        let tz = self.theta.eval(z)?;
        Ok((C64::new(1.0, 0.0) - tl.conj() * tz) / (C64::new(1.0, 0.0) - self.lambda.conj() * z))
    }

    /// Taylor coefficients of `z -> k_Theta(lambda, z)`:
    /// `khat_j = conj(lambda)^j - conj(Theta(lambda)) g_j` with
    /// `g_j = conj(lambda) g_{j-1} + thetahat_j`, `g_0 = thetahat_0`
    /// (the coefficients of `Theta(z)/(1 - conj(lambda) z)`).
    pub fn taylor(&self, k_len: usize) -> Result<Vec<C64>, ModelError> {
        let th = self.theta.taylor(k_len);
        let tl = self.theta.eval(self.lambda)?.conj();
        let lb = self.lambda.conj();
        let mut out = Vec::with_capacity(k_len);
        let mut lb_pow = C64::new(1.0, 0.0);
        let mut g = JET_ZERO;
        for (j, &t) in th.iter().enumerate() {
            g = if j == 0 { t } else { lb * g + t };
            out.push(lb_pow - tl * g);
            lb_pow *= lb;
        }
        Ok(out)
    }
}

/// Convenience wrapper matching the kernel formula directly.
pub fn reproducing_kernel(spec: &KernelSpec, z: C64) -> Result<C64, ModelError> {
    spec.eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_measures::{CantorComponent, Family, GapSchedule};
    use crate::circle_harmonics::{evaluate_power_series, h2_inner, CircleGrid, GridFunction};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn atom_at_one() -> SingularInner {
        SingularInner::new(SingularMeasure::from_atoms(&[(0.0, 1.0)]).unwrap()).unwrap()
    }

    fn thirds_measure(mass: f64) -> SingularMeasure {
        SingularMeasure {
            atoms: vec![],
            components: vec![CantorComponent {
                schedule: GapSchedule::new(Family::Geometric { r: 1.0 / 3.0 }, 0.0, 1.0, 20)
                    .unwrap(),
                mass,
            }],
        }
    }

    #[test]
    fn blaschke_trivia() {
        let b = BlaschkeProduct::new(vec![C64::new(0.5, 0.0)]).unwrap();
        assert_relative_eq!(b.eval(JET_ZERO).re, 0.5, epsilon = 1e-15);
        assert_eq!(BlaschkeProduct::empty().eval(C64::new(0.3, 0.1)), C64::new(1.0, 0.0));
        let z = unit(0.17);
        assert_relative_eq!(b.eval(z).norm(), 1.0, epsilon = 1e-12);
        assert!(BlaschkeProduct::new(vec![C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn blaschke_taylor_matches_eval() {
        let b = BlaschkeProduct::new(vec![
            C64::new(0.5, 0.0),
            JET_ZERO,
            C64::new(-0.2, 0.3),
        ])
        .unwrap();
        let c = b.taylor(128);
        for z in [C64::new(0.3, 0.0), C64::new(-0.1, 0.4), C64::new(0.0, -0.5)] {
            let series = evaluate_power_series(&c, z);
            assert!((series - b.eval(z)).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_inner_closed_forms() {
        let s = atom_at_one();
        assert!((s.eval(JET_ZERO).unwrap() - C64::new((-1.0f64).exp(), 0.0)).norm() < 1e-15);
        let v = s.eval(C64::new(-0.5, 0.0)).unwrap();
        assert!((v - C64::new((-1.0f64 / 3.0).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_inner_rejects_support_points() {
        let s = atom_at_one();
        assert!(matches!(
            s.eval(C64::new(1.0, 0.0)),
            Err(ModelError::OnSingularSupport { .. })
        ));
    }

    /// Self-convergence oracle for the Cantor measure: levels L and L+4 agree
    /// within the stated bounds, and the adaptive value is between them.
    #[test]
    fn cantor_eval_self_convergence() {
        let s = SingularInner::new(thirds_measure(1.0)).unwrap();
        let z = C64::new(0.0, 0.5);
        let lo = s.eval_at_level(z, 6).unwrap();
        let hi = s.eval_at_level(z, 10).unwrap();
        assert!(
            (lo.value - hi.value).norm() <= lo.error_bound + hi.error_bound,
            "levels differ by {} vs bound {}",
            (lo.value - hi.value).norm(),
            lo.error_bound + hi.error_bound
        );
        let adaptive = s.eval_with_bound(z).unwrap();
        assert!(adaptive.error_bound < DEFAULT_EVAL_TOL);
        assert!((adaptive.value - hi.value).norm() <= adaptive.error_bound + hi.error_bound);
    }

    #[test]
    fn unimodular_off_support() {
        let s = SingularInner::new(thirds_measure(0.7)).unwrap();
        // Deepest gap midpoint of level 3 keeps a healthy distance.
        let z = unit(0.5); // center of the level-1 gap (1/3, 2/3)
        let v = s.eval_with_bound(z).unwrap();
        assert!(
            (v.value.norm() - 1.0).abs() <= v.error_bound + 1e-9,
            "modulus {} bound {}",
            v.value.norm(),
            v.error_bound
        );
        // strictly inside the disk the modulus drops below 1
        assert!(s.eval(C64::new(0.3, 0.2)).unwrap().norm() < 1.0);
    }

    #[test]
    fn derivative_closed_form_at_zero() {
        let s = atom_at_one();
        let d = s.derivative(JET_ZERO, 1).unwrap();
        let expect = -2.0 * (-1.0f64).exp();
        assert!((d.value - C64::new(expect, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = SingularInner::new(
            SingularMeasure::from_atoms(&[(0.0, 1.0), (0.4, 0.5)]).unwrap(),
        )
        .unwrap();
        let z = C64::new(0.3, 0.2);
        let f = |w: C64| s.eval(w).unwrap();
        let h = 1e-4;
        let fd1 = (f(z + h) - f(z - h)) / (2.0 * h);
        let d1 = s.derivative(z, 1).unwrap().value;
        assert!((fd1 - d1).norm() / d1.norm() < 1e-6, "k=1: {}", (fd1 - d1).norm());
        let fd2 = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
        let d2 = s.derivative(z, 2).unwrap().value;
        assert!((fd2 - d2).norm() / d2.norm() < 1e-5, "k=2: {}", (fd2 - d2).norm());
        // higher orders: central 5-point stencils with a wider step (the
        // roundoff term eps/h^4 forbids tiny h at order 4)
        let h = 1e-2;
        let fm2 = f(z - 2.0 * h);
        let fm1 = f(z - h);
        let fp1 = f(z + h);
        let fp2 = f(z + 2.0 * h);
        let fd3 = (-fm2 * 0.5 + fm1 - fp1 + fp2 * 0.5) / (h * h * h);
        let d3 = s.derivative(z, 3).unwrap().value;
        assert!((fd3 - d3).norm() / d3.norm() < 1e-2, "k=3: {}", (fd3 - d3).norm() / d3.norm());
        let fd4 = (fm2 - 4.0 * fm1 + 6.0 * f(z) - 4.0 * fp1 + fp2) / (h * h * h * h);
        let d4 = s.derivative(z, 4).unwrap().value;
        assert!((fd4 - d4).norm() / d4.norm() < 1e-2, "k=4: {}", (fd4 - d4).norm() / d4.norm());
        assert!(matches!(s.derivative(z, 5), Err(ModelError::UnsupportedOrder(5))));
    }

    #[test]
    fn full_inner_derivative_matches_finite_differences() {
        let theta = InnerFunction::new(
            BlaschkeProduct::new(vec![C64::new(0.5, 0.0), C64::new(-0.1, 0.3)]).unwrap(),
            atom_at_one(),
        );
        let z = C64::new(0.3, 0.2);
        let f = |w: C64| theta.eval(w).unwrap();
        let h = 1e-4;
        let fd1 = (f(z + h) - f(z - h)) / (2.0 * h);
        let d1 = theta.derivative(z, 1).unwrap().value;
        assert!((fd1 - d1).norm() / d1.norm() < 1e-6);
        let fd2 = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
        let d2 = theta.derivative(z, 2).unwrap().value;
        assert!((fd2 - d2).norm() / d2.norm() < 1e-5);
    }

    #[test]
    fn multiplicativity() {
        let b = BlaschkeProduct::new(vec![C64::new(0.4, 0.1)]).unwrap();
        let s = atom_at_one();
        let theta = InnerFunction::new(b.clone(), s.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let r: f64 = rng.gen_range(0.0..0.95);
            let t: f64 = rng.gen_range(0.0..1.0);
            let z = unit(t) * r;
            let lhs = theta.eval(z).unwrap();
            let rhs = b.eval(z) * s.eval(z).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    /// Oracle for the Taylor recurrence: partial sums of the series against
    /// direct evaluation at interior points, including rotation and the
    /// two-atom convolution.
    #[test]
    fn taylor_matches_direct_eval() {
        let cases = [
            SingularMeasure::from_atoms(&[(0.0, 1.0)]).unwrap(),
            SingularMeasure::from_atoms(&[(0.3, 0.7)]).unwrap(),
            SingularMeasure::from_atoms(&[(0.0, 0.5), (0.37, 1.2)]).unwrap(),
        ];
        for m in cases {
            let s = SingularInner::new(m).unwrap();
            let c = s.taylor(400);
            for z in [C64::new(0.3, 0.0), C64::new(-0.2, 0.4), C64::new(0.1, -0.55)] {
                let series = evaluate_power_series(&c, z);
                let direct = s.eval(z).unwrap();
                assert!(
                    (series - direct).norm() < 1e-10,
                    "series {series} vs direct {direct}"
                );
            }
        }
    }

    #[test]
    fn taylor_recurrence_stays_bounded_deep() {
        // Coefficients of an inner function satisfy |s_k| <= 1; the recurrence
        // must not blow up over long runs.
        let s = atom_taylor(1.0, 1 << 16);
        assert!(s.iter().all(|x| x.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn kernel_trivia_and_symmetry() {
        // Single zero at the origin, lambda = 0: kernel collapses to 1.
        let theta = InnerFunction::from_zeros(vec![JET_ZERO]).unwrap();
        let spec = KernelSpec::new(theta, JET_ZERO).unwrap();
        for z in [C64::new(0.5, 0.2), C64::new(-0.3, 0.6)] {
            assert!((spec.eval(z).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        // Diagonal positivity and conjugate symmetry for a mixed Theta.
        let theta = InnerFunction::new(
            BlaschkeProduct::new(vec![C64::new(0.5, 0.0)]).unwrap(),
            atom_at_one(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let l = C64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let z = C64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let sl = KernelSpec::new(theta.clone(), l).unwrap();
            let sz = KernelSpec::new(theta.clone(), z).unwrap();
            let diag = sl.eval(l).unwrap();
            assert!(diag.im.abs() < 1e-12 && diag.re >= -1e-12);
            assert!((sl.eval(z).unwrap() - sz.eval(l).unwrap().conj()).norm() < 1e-11);
        }
    }

    /// FFT inner-product oracle for the reproducing property: for Theta = z^2
    /// the model space is the polynomials of degree <= 1, and
    /// <f, k(lambda, .)> = f(lambda) for such f.
    #[test]
    fn kernel_reproduces_on_grid() {
        let theta = InnerFunction::from_zeros(vec![JET_ZERO, JET_ZERO]).unwrap();
        let lambda = C64::new(0.3, -0.2);
        let spec = KernelSpec::new(theta, lambda).unwrap();
        let g = CircleGrid::new(64).unwrap();
        let k = GridFunction::from_fn(g, |z| spec.eval(z).unwrap());
        let f = GridFunction::from_fn(g, |z| C64::new(3.0, 0.0) + z * C64::new(2.0, 1.0));
        let ip = h2_inner(&f, &k).unwrap();
        let expect = C64::new(3.0, 0.0) + lambda * C64::new(2.0, 1.0);
        assert!((ip - expect).norm() < 1e-8, "inner product {ip} vs {expect}");
    }

    #[test]
    fn kernel_taylor_matches_eval() {
        let theta = InnerFunction::new(
            BlaschkeProduct::new(vec![C64::new(0.4, 0.2)]).unwrap(),
            SingularInner::new(SingularMeasure::from_atoms(&[(0.25, 0.8)]).unwrap()).unwrap(),
        );
        let spec = KernelSpec::new(theta, C64::new(0.4, 0.0)).unwrap();
        let c = spec.taylor(600).unwrap();
        for z in [C64::new(0.2, 0.3), C64::new(-0.5, 0.1)] {
            let series = evaluate_power_series(&c, z);
            let direct = spec.eval(z).unwrap();
            assert!((series - direct).norm() < 1e-9, "at {z}: {series} vs {direct}");
        }
    }

    #[test]
    fn factor_truncate_basics() {
        let measure = SingularMeasure {
            atoms: vec![(0.0, 1.0), (0.5, 0.5)],
            components: vec![CantorComponent {
                schedule: GapSchedule::new(Family::Geometric { r: 1.0 / 3.0 }, 0.1, 0.2, 10)
                    .unwrap(),
                mass: 0.3,
            }],
        };
        let theta = InnerFunction::new(
            BlaschkeProduct::new(vec![C64::new(0.5, 0.0), C64::new(0.0, 0.3)]).unwrap(),
            SingularInner::new(measure).unwrap(),
        );
        // N = 0: identically one.
        let t0 = theta.factor_truncate(0).unwrap();
        assert!((t0.eval(C64::new(0.3, 0.2)).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-14);
        // N large: all of nu_C (equal here to nu) comes back.
        let t9 = theta.factor_truncate(9).unwrap();
        assert_eq!(t9.singular.measure().atoms.len(), 2);
        assert_eq!(t9.singular.measure().components.len(), 1);
        assert_eq!(t9.blaschke.zeros().len(), 2);
        // Divisibility: |Theta_N| >= |Theta| at random interior points.
        let t1 = theta.factor_truncate(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let z = C64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let full = theta.eval(z).unwrap().norm();
            let trunc = t1.eval(z).unwrap().norm();
            assert!(trunc >= full - 1e-10, "at {z}: |T_1| = {trunc} < |T| = {full}");
        }
    }

    #[test]
    fn factor_truncate_requires_pure_bc_measure() {
        let measure = SingularMeasure {
            atoms: vec![],
            components: vec![CantorComponent {
                schedule: GapSchedule::new(Family::Polylog { beta: 1.0 }, 0.0, 1.0, 10).unwrap(),
                mass: 1.0,
            }],
        };
        let theta = InnerFunction::from_measure(measure).unwrap();
        assert!(matches!(
            theta.factor_truncate(3),
            Err(ModelError::DecompositionRequired(_))
        ));
    }
}
