//! Disc quadrature for normalized area measure, Bergman and analytic Sobolev
//! norms, the backward shift, the weighted-disc Cauchy pairing identity, and
//! the necessity-side experiments: cyclicity distances and the
//! vanishing-pairing obstruction.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex;

use crate::circle_harmonics::evaluate_power_series;
use crate::inner_functions::{InnerFunction, SingularInner};
use crate::{error::ModelError, C64};

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Product quadrature for `integral_D f dA` with `dA` normalized area
/// measure: Gauss-Legendre of order `R` in the radial variable `u = r^2`
/// (so `dA = du * dtheta/(2 pi)`), uniform `M`-point rule in angle.
/// Exact for monomial moments `z^j conj(z)^k` with `j, k < M/2` and
/// `j = k <= 2R - 1`.
#[derive(Debug, Clone)]
pub struct DiscQuadrature {
    /// `(u_i, w_i)` on (0, 1), weights summing to 1.
    radial: Vec<(f64, f64)>,
    angular: usize,
}

/// Gauss-Legendre nodes/weights on [0, 1] by Golub-Welsch (symmetric
/// tridiagonal Jacobi matrix eigendecomposition).
fn gauss_legendre_unit(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i]; // node on [-1, 1]
            let v0 = eig.eigenvectors[(0, i)];
            let w = 2.0 * v0 * v0; // weight on [-1, 1]
            (0.5 * (x + 1.0), 0.5 * w)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = out.iter().map(|&(_, w)| w).sum();
    for (_, w) in &mut out {
        *w /= total;
    }
    out
}

impl DiscQuadrature {
    pub fn new(radial_order: usize, angular: usize) -> Result<Self, ModelError> {
        if radial_order < 2 || angular < 4 {
            return Err(ModelError::InvalidParameter(format!(
                "quadrature needs radial order >= 2 and angular >= 4, got {radial_order}, {angular}"
            )));
        }
        Ok(DiscQuadrature { radial: gauss_legendre_unit(radial_order), angular })
    }

    /// Default orders: radial 64, angular 512.
    pub fn default_orders() -> Self {
        DiscQuadrature::new(64, 512).expect("valid default orders")
    }

    /// Same rule at doubled orders (self-convergence checks).
    pub fn doubled(&self) -> Self {
        DiscQuadrature::new(2 * self.radial.len(), 2 * self.angular).expect("doubling valid orders")
    }

    pub fn radial_order(&self) -> usize {
        self.radial.len()
    }

    pub fn angular_size(&self) -> usize {
        self.angular
    }

    pub fn node_count(&self) -> usize {
        self.radial.len() * self.angular
    }

    /// Quadrature nodes with weights, `(z, w)`; the weights sum to 1.
    pub fn nodes(&self) -> impl Iterator<Item = (C64, f64)> + '_ {
        let m = self.angular;
        self.radial.iter().flat_map(move |&(u, w)| {
            let r = u.sqrt();
            (0..m).map(move |j| (crate::unit(j as f64 / m as f64) * r, w / m as f64))
        })
    }

    /// `integral f dA`.
    pub fn integrate(&self, f: impl Fn(C64) -> C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (z, w) in self.nodes() {
            acc += f(z) * w;
        }
        acc
    }

    pub fn integrate_real(&self, f: impl Fn(C64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (z, w) in self.nodes() {
            acc += f(z) * w;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Disc functions
// ---------------------------------------------------------------------------

/// A function on the disk: polynomial coefficient form (derivative-capable)
/// or raw samples aligned with a quadrature's node order.
#[derive(Debug, Clone)]
pub enum DiscFunction {
    Poly(Vec<C64>),
    Sampled(Vec<C64>),
}

impl DiscFunction {
    pub fn poly(coeffs: Vec<C64>) -> Self {
        DiscFunction::Poly(coeffs)
    }

    pub fn poly_real(coeffs: &[f64]) -> Self {
        DiscFunction::Poly(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn coefficients(&self) -> Result<&[C64], ModelError> {
        match self {
            DiscFunction::Poly(c) => Ok(c),
            DiscFunction::Sampled(_) => Err(ModelError::UnsupportedForm(
                "coefficient form required".into(),
            )),
        }
    }

    pub fn eval(&self, quad: &DiscQuadrature, idx: usize, z: C64) -> C64 {
        match self {
            DiscFunction::Poly(c) => evaluate_power_series(c, z),
            DiscFunction::Sampled(v) => {
                let _ = quad;
                v[idx]
            }
        }
    }

    /// Values at the quadrature nodes (in node order).
    pub fn values_at(&self, quad: &DiscQuadrature) -> Result<Vec<C64>, ModelError> {
        match self {
            DiscFunction::Poly(c) => {
                Ok(quad.nodes().map(|(z, _)| evaluate_power_series(c, z)).collect())
            }
            DiscFunction::Sampled(v) => {
                if v.len() != quad.node_count() {
                    return Err(ModelError::GridMismatch(format!(
                        "{} samples for a quadrature of {} nodes",
                        v.len(),
                        quad.node_count()
                    )));
                }
                Ok(v.clone())
            }
        }
    }

    /// Derivative in coefficient form.
    pub fn derivative(&self) -> Result<DiscFunction, ModelError> {
        match self {
            DiscFunction::Poly(c) => Ok(DiscFunction::Poly(
                c.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, &ck)| ck * k as f64)
                    .collect(),
            )),
            DiscFunction::Sampled(_) => Err(ModelError::DerivativeUnavailable),
        }
    }
}

/// `(integral |f|^p dA)^{1/p}`; `p = inf` (pass `f64::INFINITY`) is the sup
/// over quadrature nodes.
pub fn lp_bergman_norm(f: &DiscFunction, quad: &DiscQuadrature, p: f64) -> Result<f64, ModelError> {
    if !(p > 0.0) {
        return Err(ModelError::InvalidParameter(format!("p must be positive, got {p}")));
    }
    let vals = f.values_at(quad)?;
    if p.is_infinite() {
        return Ok(vals.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let mut acc = 0.0;
    for ((_, w), v) in quad.nodes().zip(&vals) {
        acc += v.norm().powf(p) * w;
    }
    Ok(acc.powf(1.0 / p))
}

/// `||f||_{L^p} + ||f'||_{L^p}` (coefficient form required).
pub fn sobolev_norm(f: &DiscFunction, quad: &DiscQuadrature, p: f64) -> Result<f64, ModelError> {
    let df = f.derivative()?;
    Ok(lp_bergman_norm(f, quad, p)? + lp_bergman_norm(&df, quad, p)?)
}

/// Backward shift `(g(z) - g(0))/z`: coefficient shift-down.
pub fn backward_shift(g: &DiscFunction) -> Result<DiscFunction, ModelError> {
    let c = g.coefficients()?;
    Ok(DiscFunction::Poly(c.iter().skip(1).copied().collect()))
}

// ---------------------------------------------------------------------------
// Cauchy pairing identity
// ---------------------------------------------------------------------------

/// Both sides of the weighted-disc pairing identity and the empirical
/// boundedness ratio.
#[derive(Debug, Clone)]
pub struct PairingReport {
    /// Exact spectral side `sum fhat(k) conj(ghat(k))`.
    pub lhs: C64,
    /// `f(0) conj(g(0)) + integral f' conj(g' + Lg) (1 - |z|^2) dA`.
    pub rhs: C64,
    pub gap: f64,
    /// `|lhs| / (||f||_{W^{1,p}} ||g||_{L^q})`, `1/p + 1/q = 1`.
    pub bound_ratio: f64,
}

/// Cauchy pairing of two polynomials: the spectral sum versus the weighted
/// disc integral, plus the empirical boundedness ratio at exponent `p`.
pub fn cauchy_pairing_disc(
    f: &DiscFunction,
    g: &DiscFunction,
    quad: &DiscQuadrature,
    p: f64,
) -> Result<PairingReport, ModelError> {
    let fc = f.coefficients()?;
    let gc = g.coefficients()?;
    let lhs: C64 = fc.iter().zip(gc).map(|(a, b)| a * b.conj()).sum();

    let df = f.derivative()?;
    let dg = g.derivative()?;
    let lg = backward_shift(g)?;
    let f0 = fc.first().copied().unwrap_or_default();
    let g0 = gc.first().copied().unwrap_or_default();
    let dfc = df.coefficients()?.to_vec();
    let dgc = dg.coefficients()?.to_vec();
    let lgc = lg.coefficients()?.to_vec();
    let integral = quad.integrate(|z| {
        let a = evaluate_power_series(&dfc, z);
        let b = evaluate_power_series(&dgc, z) + evaluate_power_series(&lgc, z);
        a * b.conj() * (1.0 - z.norm_sqr())
    });
    let rhs = f0 * g0.conj() + integral;

    if !(p > 1.0) {
        return Err(ModelError::InvalidParameter(format!(
            "pairing bound needs p > 1, got {p}"
        )));
    }
    let q = p / (p - 1.0);
    let denom = sobolev_norm(f, quad, p)? * lp_bergman_norm(g, quad, q)?;
    let bound_ratio = if denom > 0.0 { lhs.norm() / denom } else { 0.0 };
    Ok(PairingReport { lhs, rhs, gap: (lhs - rhs).norm(), bound_ratio })
}

// ---------------------------------------------------------------------------
// Cyclicity distances
// ---------------------------------------------------------------------------

/// Outcome of the degree-`N` least-squares cyclicity problem.
#[derive(Debug, Clone)]
pub struct CyclicityResult {
    /// `min_p deg<=N ||S p - 1||_{L^2_a}`.
    pub distance: f64,
    /// Optimal coefficients in the orthonormalized basis `z^k sqrt(k+1)`.
    pub coefficients: Vec<C64>,
    /// Cholesky-diagonal condition estimate of the Gram matrix.
    pub condition_estimate: f64,
    /// Whether a ridge term was needed to factor the Gram matrix.
    pub regularized: bool,
}

/// Distance from 1 to `S * {polynomials of degree <= N}` in the Bergman
/// space, by least squares over the orthonormalized monomial basis
/// `e_k = z^k sqrt(k+1)`. `q` must be 2. For measures with Cantor
/// components, `S` is evaluated at the fixed discretization `level`.
pub fn cyclicity_distance(
    s: &SingularInner,
    degree: usize,
    q: f64,
    quad: &DiscQuadrature,
    level: u32,
) -> Result<CyclicityResult, ModelError> {
    let mut profile = cyclicity_profile(s, &[degree], q, quad, level)?;
    Ok(profile.pop().expect("one degree requested"))
}

/// Cyclicity distances for several degrees at once. The inner function is
/// evaluated at the quadrature nodes a single time; each degree reuses the
/// leading block of the shared Gram matrix.
pub fn cyclicity_profile(
    s: &SingularInner,
    degrees: &[usize],
    q: f64,
    quad: &DiscQuadrature,
    level: u32,
) -> Result<Vec<CyclicityResult>, ModelError> {
    if q != 2.0 {
        return Err(ModelError::InvalidParameter(format!(
            "cyclicity distance supports q = 2 only, got {q}"
        )));
    }
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let dim = max_degree + 1;
    // Basis values S(z) e_k(z) at the quadrature nodes, pre-scaled by the
    // square root of the node weight so G = A* A.
    let n_nodes = quad.node_count();
    let mut a = DMatrix::<Complex<f64>>::zeros(n_nodes, dim);
    let mut sqrt_w = Vec::with_capacity(n_nodes);
    for (row, (z, w)) in quad.nodes().enumerate() {
        let sv = if s.measure().is_atomic() {
            s.eval(z)?
        } else {
            s.eval_at_level(z, level)?.value
        };
        let ws = w.sqrt();
        sqrt_w.push(ws);
        let mut pw = C64::new(1.0, 0.0);
        for k in 0..dim {
            a[(row, k)] = sv * pw * ((k + 1) as f64).sqrt() * ws;
            pw *= z;
        }
    }
    // Normal equations: G c = v with v_k = <1, S e_k>.
    let gram_full = a.adjoint() * &a;
    let ones = DVector::<Complex<f64>>::from_iterator(
        n_nodes,
        sqrt_w.iter().map(|&ws| Complex::new(ws, 0.0)),
    );
    let v_full = a.adjoint() * ones;
    degrees
        .iter()
        .map(|&deg| {
            let sub = deg + 1;
            let gram = gram_full.view((0, 0), (sub, sub)).into_owned();
            let v = v_full.rows(0, sub).into_owned();
            solve_cyclicity_block(gram, v)
        })
        .collect()
}

fn solve_cyclicity_block(
    gram: DMatrix<Complex<f64>>,
    v: DVector<Complex<f64>>,
) -> Result<CyclicityResult, ModelError> {
    let dim = gram.nrows();
    let trace: f64 = (0..dim).map(|i| gram[(i, i)].re).sum();
    let mut ridge = 0.0;
    let (chol, regularized) = match Cholesky::new(gram.clone()) {
        Some(c) => (c, false),
        None => {
            ridge = 1e-12 * trace.max(1.0);
            let mut g2 = gram.clone();
            for i in 0..dim {
                g2[(i, i)] += Complex::new(ridge, 0.0);
            }
            (
                Cholesky::new(g2).ok_or_else(|| ModelError::QuadratureFailure(
                    "Gram matrix not positive definite even after regularization".into(),
                ))?,
                true,
            )
        }
    };
    let _ = ridge;
    let l = chol.l();
    let mut dmin = f64::INFINITY;
    let mut dmax: f64 = 0.0;
    for i in 0..dim {
        let d = l[(i, i)].re;
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let condition_estimate = (dmax / dmin).powi(2);
    let c = chol.solve(&v);
    // ||S p - 1||^2 = 1 - Re <v, c> at the optimum.
    let inner: Complex<f64> = v.iter().zip(c.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
    let distance = (1.0 - inner.re).max(0.0).sqrt();
    Ok(CyclicityResult {
        distance,
        coefficients: c.iter().copied().collect(),
        condition_estimate,
        regularized,
    })
}

// ---------------------------------------------------------------------------
// Obstruction functional
// ---------------------------------------------------------------------------

/// Evaluates the boundary pairing `integral Theta_C f conj(g) dm` through the
/// disc identity: pairing of `F = Theta_C f` (coefficient form, truncated)
/// against the polynomial `g`.
pub fn obstruction_functional(
    theta_c: &InnerFunction,
    f: &DiscFunction,
    g: &DiscFunction,
    quad: &DiscQuadrature,
    p: f64,
) -> Result<PairingReport, ModelError> {
    let fc = f.coefficients()?;
    let gc = g.coefficients()?;
    // F needs coefficients only up to deg g for the exact side, but the disc
    // integral uses F'; carry enough terms that the truncated tail is dead
    // at the outermost node radius.
    let k_len = (gc.len() + fc.len() + 512).next_power_of_two();
    let tc = theta_c.taylor(k_len);
    let mut f_coeffs = crate::circle_harmonics::analytic_convolution(
        &tc,
        &{
            let mut padded = fc.to_vec();
            padded.resize(k_len, C64::new(0.0, 0.0));
            padded
        },
    );
    f_coeffs.truncate(k_len);
    cauchy_pairing_disc(&DiscFunction::Poly(f_coeffs), g, quad, p)
}

/// `H^2` projection of the constant 1 onto the orthogonal complement of
/// `span{Theta z^j : j <= degree}`, as a coefficient list of length `k_len`.
/// Used to build test vectors for the obstruction functional.
pub fn orthogonal_complement_of_one(
    theta: &InnerFunction,
    degree: usize,
    k_len: usize,
) -> Vec<C64> {
    // <1, Theta z^j> = conj(thetahat_j); projection of 1 onto Theta H^2 is
    // Theta * P_+(conj(Theta) * 1) truncated to the span degree.
    let th = theta.taylor(k_len);
    // coefficients of P_+(conj(Theta)): r_j = conj(thetahat_j), kept j <= degree
    let mut r = vec![C64::new(0.0, 0.0); k_len];
    for (j, rj) in r.iter_mut().enumerate().take(degree + 1) {
        *rj = th[j].conj();
    }
    let proj = crate::circle_harmonics::analytic_convolution(&th, &r);
    let mut g = vec![C64::new(0.0, 0.0); k_len];
    g[0] = C64::new(1.0, 0.0);
    for (gi, pi) in g.iter_mut().zip(&proj) {
        *gi -= pi;
    }
    g
}
