//! Closed measure-zero boundary sets, structured singular measures, entropy
//! classification, and the decomposition into a part charging
//! Beurling-Carleson sets and a Korenblum-Roberts part.
//!
//! Angles are normalized turns (full circle = 1), logarithms natural.

use crate::{error::ModelError, unit, C64};

/// Fraction of a turn below which two endpoints are considered equal when
/// canonicalizing arc lists.
const MERGE_TOL: f64 = 1e-14;

/// Tolerance on `1 - total arc length` for the measure-zero test.
pub const MEASURE_ZERO_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// ArcSet
// ---------------------------------------------------------------------------

/// A closed subset `E` of the circle represented by its complementary open
/// arcs. Arcs are `(start, end)` in turns with `start < end <= start + 1`;
/// the list is sorted and pairwise disjoint modulo 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSet {
    arcs: Vec<(f64, f64)>,
}

impl ArcSet {
    /// Build from a list of open arcs, canonicalizing (sort, merge arcs that
    /// share an endpoint). Fails on overlapping arcs or arcs of nonpositive
    /// or full length.
    pub fn from_arcs(arcs: &[(f64, f64)]) -> Result<Self, ModelError> {
        let mut norm: Vec<(f64, f64)> = Vec::with_capacity(arcs.len());
        for &(s, e) in arcs {
            let len = e - s;
            if !(len > 0.0) || len > 1.0 + MERGE_TOL {
                return Err(ModelError::ArcRepresentation(format!(
                    "arc ({s}, {e}) has invalid length {len}"
                )));
            }
            let s0 = s.rem_euclid(1.0);
            norm.push((s0, s0 + len.min(1.0)));
        }
        norm.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Reject genuine overlap. Arcs meeting at a common endpoint stay
        // separate: the shared endpoint is a point of the closed set E.
        let merged: Vec<(f64, f64)> = norm;
        for w in merged.windows(2) {
            if w[1].0 < w[0].1 - MERGE_TOL {
                return Err(ModelError::ArcRepresentation(format!(
                    "arcs overlap near t = {}",
                    w[1].0
                )));
            }
        }
        // Wrap-around: last arc may spill past 1 into the first one.
        if merged.len() > 1 {
            let (first, last) = (merged[0], *merged.last().unwrap());
            if last.1 - 1.0 > first.0 + MERGE_TOL {
                return Err(ModelError::ArcRepresentation(
                    "arcs overlap across the wrap point".into(),
                ));
            }
        }
        let total: f64 = merged.iter().map(|(s, e)| e - s).sum();
        if total > 1.0 + 1e-9 {
            return Err(ModelError::ArcRepresentation(format!(
                "total arc length {total} exceeds a full turn"
            )));
        }
        Ok(ArcSet { arcs: merged })
    }

    /// Complement of a finite point set: one arc between each pair of
    /// circularly consecutive points.
    pub fn from_points(points: &[f64]) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::ArcRepresentation(
                "empty point set has no complementary arcs".into(),
            ));
        }
        let mut ps: Vec<f64> = points.iter().map(|p| p.rem_euclid(1.0)).collect();
        ps.sort_by(f64::total_cmp);
        ps.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
        let mut arcs = Vec::with_capacity(ps.len());
        for i in 0..ps.len() {
            let s = ps[i];
            let e = if i + 1 < ps.len() { ps[i + 1] } else { ps[0] + 1.0 };
            if e - s > MERGE_TOL {
                arcs.push((s, e));
            }
        }
        Ok(ArcSet { arcs })
    }

    /// The canonical complementary arcs `(start, end)`.
    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    /// Total length of the complementary arcs.
    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|(s, e)| e - s).sum()
    }

    /// Whether the represented closed set has Lebesgue measure zero
    /// (total complementary length = 1 up to tolerance).
    pub fn is_measure_zero(&self) -> bool {
        (self.total_length() - 1.0).abs() <= MEASURE_ZERO_TOL
    }

    /// Entropy `sum |I_k| ln(1/|I_k|)` over complementary arcs.
    pub fn entropy(&self) -> f64 {
        self.arcs
            .iter()
            .map(|(s, e)| {
                let l = e - s;
                if l >= 1.0 {
                    0.0
                } else {
                    l * (1.0 / l).ln()
                }
            })
            .sum()
    }

    /// Beurling-Carleson test for an explicit arc list: measure zero and
    /// finite entropy (automatic for a finite list).
    pub fn is_beurling_carleson(&self) -> Result<bool, ModelError> {
        if !self.is_measure_zero() {
            return Err(ModelError::NotBeurlingCarleson(format!(
                "set has positive measure (excess {:.3e})",
                1.0 - self.total_length()
            )));
        }
        Ok(true)
    }

    /// Union with another arc-complement set: E1 ∪ E2 has complementary arcs
    /// equal to the intersection of the two open complements.
    pub fn union_sets(&self, other: &ArcSet) -> Result<ArcSet, ModelError> {
        // Intersect every pair of arcs on the circle.
        let mut out = Vec::new();
        for &(s1, e1) in &self.arcs {
            for &(s2, e2) in &other.arcs {
                for shift in [-1.0, 0.0, 1.0] {
                    let (s2, e2) = (s2 + shift, e2 + shift);
                    let s = s1.max(s2);
                    let e = e1.min(e2);
                    if e - s > MERGE_TOL {
                        out.push((s, e));
                    }
                }
            }
        }
        ArcSet::from_arcs(&out)
    }

    /// Euclidean distance from `z` to the closed set `E`.
    ///
    /// `E` is the complement of the open arcs: the union of the closed arcs
    /// between consecutive complementary arcs (single points when the
    /// complementary arcs share endpoints).
    pub fn boundary_distance(&self, z: C64) -> f64 {
        if self.arcs.is_empty() {
            // E is the whole circle.
            return (z.norm() - 1.0).abs();
        }
        let mut best = f64::INFINITY;
        let n = self.arcs.len();
        for i in 0..n {
            // Closed arc of E from end of arc i to start of arc i+1.
            let s = self.arcs[i].1;
            let e = if i + 1 < n {
                self.arcs[i + 1].0 + if self.arcs[i + 1].0 < s { 1.0 } else { 0.0 }
            } else {
                self.arcs[0].0 + 1.0
            };
            let e = e.max(s); // degenerate: single point
            best = best.min(dist_to_closed_arc(z, s, e));
        }
        best
    }
}

/// Distance from `z` to the closed circular arc `{e^{2πit} : t in [s, e]}`.
fn dist_to_closed_arc(z: C64, s: f64, e: f64) -> f64 {
    debug_assert!(e >= s);
    if e - s >= 1.0 {
        return (z.norm() - 1.0).abs();
    }
    let a = z.im.atan2(z.re) / std::f64::consts::TAU; // in (-1/2, 1/2]
    // Does the angular projection of z land inside [s, e] mod 1?
    let rel = (a - s).rem_euclid(1.0);
    if rel <= e - s {
        (z.norm() - 1.0).abs()
    } else {
        let d1 = (z - unit(s)).norm();
        let d2 = (z - unit(e)).norm();
        d1.min(d2)
    }
}

// ---------------------------------------------------------------------------
// GapSchedule
// ---------------------------------------------------------------------------

/// Parametric family of Cantor-type constructions on a base arc.
///
/// The construction is by nested intervals: level 0 is the base arc of length
/// `lambda_0 = base_len`; every level-n interval contains two level-(n+1)
/// children of length `lambda_{n+1}` at its ends, leaving a centered gap of
/// length `ell_{n+1} = lambda_n - 2 lambda_{n+1}`. There are `2^{n-1}` gaps
/// of level n.
///
/// * `Geometric { r }`: `lambda_n = base_len * r^n` (requires `0 < r < 1/2`),
///   so gaps are `ell_n = c r^n` with `c = base_len (1 - 2r)/r`.
/// * `Polylog { beta }`: `lambda_n = (base_len/2) / (2^n n^beta)` for `n >= 1`
///   (requires `beta > 0`); gap lengths decay like `2^-n n^-(beta+1)`.
///   The resulting set is measure zero for every `beta > 0` and is
///   Beurling-Carleson exactly when `beta > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Geometric { r: f64 },
    Polylog { beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSchedule {
    pub family: Family,
    /// Start of the base arc, in turns.
    pub base_start: f64,
    /// Length of the base arc, in turns.
    pub base_len: f64,
    /// Truncation depth used when the set must be materialized.
    pub depth: u32,
}

/// Entropy of a schedule: partial sum to the schedule depth plus an analytic
/// tail bound, and the analytic convergence verdict for the family.
#[derive(Debug, Clone, Copy)]
pub struct EntropyReport {
    pub partial_sum: f64,
    pub tail_bound: f64,
    pub converges: bool,
}

/// Divergence certificate for non-BC schedules: growing partial entropy sums.
#[derive(Debug, Clone)]
pub struct DivergenceWitness {
    /// `(depth, partial entropy sum)` at geometrically spaced depths.
    pub partial_sums: Vec<(u32, f64)>,
}

impl GapSchedule {
    pub fn new(family: Family, base_start: f64, base_len: f64, depth: u32) -> Result<Self, ModelError> {
        if !(base_len > 0.0 && base_len <= 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "base_len must be in (0, 1], got {base_len}"
            )));
        }
        match family {
            Family::Geometric { r } => {
                if !(r > 0.0 && r < 0.5) {
                    return Err(ModelError::InvalidParameter(format!(
                        "geometric ratio must satisfy 0 < r < 1/2, got {r}"
                    )));
                }
            }
            Family::Polylog { beta } => {
                if !(beta > 0.0) {
                    return Err(ModelError::InvalidParameter(format!(
                        "polylog exponent must be positive, got {beta}"
                    )));
                }
            }
        }
        if depth == 0 || depth > 40 {
            return Err(ModelError::InvalidParameter(format!(
                "depth must be in 1..=40, got {depth}"
            )));
        }
        Ok(GapSchedule { family, base_start, base_len, depth })
    }

    /// Length `lambda_n` of a level-n interval.
    pub fn interval_len(&self, n: u32) -> f64 {
        if n == 0 {
            return self.base_len;
        }
        match self.family {
            Family::Geometric { r } => self.base_len * r.powi(n as i32),
            Family::Polylog { beta } => {
                self.base_len / 2.0 * (0.5f64).powi(n as i32) * (n as f64).powf(-beta)
            }
        }
    }

    /// Length of each of the `2^{n-1}` level-n gaps (n >= 1).
    pub fn gap_len(&self, n: u32) -> f64 {
        debug_assert!(n >= 1);
        self.interval_len(n - 1) - 2.0 * self.interval_len(n)
    }

    /// The `2^level` level-`level` intervals as `(start, len)`.
    pub fn level_intervals(&self, level: u32) -> Vec<(f64, f64)> {
        let mut iv = vec![(self.base_start, self.base_len)];
        for n in 1..=level {
            let len = self.interval_len(n);
            let mut next = Vec::with_capacity(iv.len() * 2);
            for &(s, l) in &iv {
                next.push((s, len));
                next.push((s + l - len, len));
            }
            iv = next;
        }
        iv
    }

    /// All gaps of levels `1..=depth` as `(start, len)`, in construction order.
    pub fn gaps_to_depth(&self, depth: u32) -> Vec<(f64, f64)> {
        let mut gaps = Vec::new();
        let mut iv = vec![(self.base_start, self.base_len)];
        for n in 1..=depth {
            let len = self.interval_len(n);
            let mut next = Vec::with_capacity(iv.len() * 2);
            for &(s, l) in &iv {
                gaps.push((s + len, l - 2.0 * len));
                next.push((s, len));
                next.push((s + l - len, len));
            }
            iv = next;
        }
        gaps
    }

    /// Depth-truncated approximation of the Cantor set as an `ArcSet`:
    /// complement of (the outside of the base arc plus all gaps to `depth`).
    /// The represented closed set contains the true Cantor set; its measure
    /// excess is `2^depth * lambda_depth`.
    pub fn arc_set(&self, depth: u32) -> Result<ArcSet, ModelError> {
        let mut arcs: Vec<(f64, f64)> = self
            .gaps_to_depth(depth)
            .into_iter()
            .map(|(s, l)| (s, s + l))
            .collect();
        if self.base_len < 1.0 {
            arcs.push((self.base_start + self.base_len, self.base_start + 1.0));
        }
        ArcSet::from_arcs(&arcs)
    }

    /// Partial entropy sum over gaps of levels `1..=depth`
    /// (the outside-of-base arc, if any, is not part of the schedule).
    ///
    /// Terms are `2^{n-1} ell_n ln(1/ell_n)`; they are formed from per-family
    /// closed forms so that neither the count overflows nor the gap length
    /// underflows at large depth.
    pub fn entropy_partial(&self, depth: u32) -> f64 {
        (1..=depth)
            .map(|n| {
                // total gap length at level n and ln(1/ell_n), both stable
                let (count_times_len, neg_ln_len) = match self.family {
                    Family::Geometric { r } => {
                        // ell_n = c r^n, c = base (1-2r)/r
                        let c = self.base_len * (1.0 - 2.0 * r) / r;
                        let x = (2.0f64 * r).powi(n as i32); // 2^n r^n, underflows to 0 safely
                        (0.5 * c * x, n as f64 * (1.0 / r).ln() - c.ln())
                    }
                    Family::Polylog { .. } => {
                        // 2^n ell_n = base (diff of successive lambda weights)
                        let nf = n as f64;
                        let diff = if n == 1 {
                            // ell_1 = base/2
                            1.0
                        } else {
                            self.polylog_weight(nf - 1.0) - self.polylog_weight(nf)
                        };
                        (
                            0.5 * self.base_len * diff,
                            nf * (2.0f64).ln() - (self.base_len * diff).ln(),
                        )
                    }
                };
                if count_times_len > 0.0 {
                    count_times_len * neg_ln_len
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// `n^{-beta}` weight of the polylog family.
    fn polylog_weight(&self, n: f64) -> f64 {
        match self.family {
            Family::Polylog { beta } => n.powf(-beta),
            Family::Geometric { .. } => unreachable!(),
        }
    }

    /// Entropy with analytic tail bound at the schedule depth.
    pub fn entropy_report(&self) -> EntropyReport {
        let partial = self.entropy_partial(self.depth);
        let converges = self.is_beurling_carleson();
        let tail = if !converges {
            f64::INFINITY
        } else {
            match self.family {
                Family::Geometric { r } => {
                    // Terms (c/2) x^n (n ln(1/r) + ln(1/c)), x = 2r < 1,
                    // with c = base_len (1-2r)/r; closed-form geometric tails.
                    let c = self.base_len * (1.0 - 2.0 * r) / r;
                    let x = 2.0 * r;
                    let l = (1.0 / r).ln();
                    let m = (1.0 / c).ln();
                    let n0 = self.depth as f64 + 1.0;
                    // sum_{n>=n0} x^n = x^{n0}/(1-x);
                    // sum_{n>=n0} n x^n = x^{n0} (n0 + x/(1-x)) / (1-x).
                    let s0 = x.powf(n0) / (1.0 - x);
                    let s1 = x.powf(n0) * (n0 + x / (1.0 - x)) / (1.0 - x);
                    (c / 2.0) * (l * s1 + m.max(0.0) * s0)
                }
                Family::Polylog { beta } => {
                    // term_n = (base/2) diff_n (n ln2 - ln(base diff_n)) with
                    // diff_n = (n-1)^-b - n^-b; using
                    // diff_n <= b (n-1)^{-b-1}, diff_n >= b n^{-b-1} and
                    // n <= 2(n-1), ln n <= ln2 + ln(n-1):
                    // term_n <= (base/2) b m^{-b-1} (2 m ln2
                    //           + (b+1)(ln2 + ln m) + K), m = n-1,
                    // K = max(0, ln(1/(base b))); summed over m >= depth via
                    // the integral test from m0 = depth - 1.
                    let b = beta;
                    let ln2 = std::f64::consts::LN_2;
                    let k = (1.0 / (self.base_len * b)).ln().max(0.0);
                    let m0 = (self.depth as f64 - 1.0).max(1.0);
                    let s_b = m0.powf(1.0 - b) / (b - 1.0).max(1e-300);
                    let s_b1 = m0.powf(-b) / b;
                    let s_log = m0.powf(-b) * (m0.ln() / b + 1.0 / (b * b));
                    0.5 * self.base_len
                        * b
                        * (2.0 * ln2 * s_b + (b + 1.0) * (ln2 * s_b1 + s_log) + k * s_b1)
                }
            }
        };
        EntropyReport { partial_sum: partial, tail_bound: tail, converges }
    }

    /// Analytic Beurling-Carleson verdict for the family (never decided by
    /// truncated summation).
    pub fn is_beurling_carleson(&self) -> bool {
        match self.family {
            // Entropy terms ~ (2r)^n n: geometric, convergent for all r < 1/2.
            Family::Geometric { .. } => true,
            // Entropy terms ~ beta ln2 n^{-beta}: convergent iff beta > 1.
            Family::Polylog { beta } => beta > 1.0,
        }
    }

    /// Partial entropy sums at geometrically spaced depths, as a divergence
    /// witness for non-BC schedules.
    pub fn divergence_witness(&self) -> DivergenceWitness {
        let partial_sums = [8u32, 16, 32, 64, 128, 256]
            .iter()
            .map(|&d| (d, self.entropy_partial(d)))
            .collect();
        DivergenceWitness { partial_sums }
    }
}

// ---------------------------------------------------------------------------
// SingularMeasure
// ---------------------------------------------------------------------------

/// One Cantor-type component: a schedule carrying `mass`, equidistributed
/// over the `2^n` level-n intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorComponent {
    pub schedule: GapSchedule,
    pub mass: f64,
}

/// Finite positive singular measure: atoms plus Cantor-type components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SingularMeasure {
    pub atoms: Vec<(f64, f64)>, // (position in turns, mass)
    pub components: Vec<CantorComponent>,
}

/// Per-piece classification certificate produced by [`SingularMeasure::decompose`].
#[derive(Debug, Clone)]
pub enum Certificate {
    Atom { position: f64, mass: f64 },
    BeurlingCarlesonComponent { mass: f64, entropy: EntropyReport },
    KorenblumRobertsComponent { mass: f64, witness: DivergenceWitness },
}

/// Result of the decomposition `nu = nu_C + nu_K`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub nu_c: SingularMeasure,
    pub nu_k: SingularMeasure,
    pub certificates: Vec<Certificate>,
    /// Witnessing increasing sequence of BC sets for `nu_C`: `E_n` is the
    /// union of the first `n` entries (atom singletons first, then
    /// depth-truncated BC component supports).
    pub witness_sets: Vec<ArcSet>,
}

impl SingularMeasure {
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self, ModelError> {
        let m = SingularMeasure { atoms: atoms.to_vec(), components: Vec::new() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for &(_, m) in &self.atoms {
            if !(m > 0.0) {
                return Err(ModelError::InvalidMeasure(format!("atom mass {m} must be positive")));
            }
        }
        for c in &self.components {
            if !(c.mass > 0.0) {
                return Err(ModelError::InvalidMeasure(format!(
                    "component mass {} must be positive",
                    c.mass
                )));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum::<f64>()
            + self.components.iter().map(|c| c.mass).sum::<f64>()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.components.is_empty()
    }

    pub fn is_atomic(&self) -> bool {
        self.components.is_empty()
    }

    /// Split into the part charging Beurling-Carleson sets (all atoms, all
    /// components with BC schedule) and the Korenblum-Roberts part
    /// (components with divergent entropy). Masses are partitioned exactly.
    pub fn decompose(&self) -> Result<Decomposition, ModelError> {
        self.validate()?;
        let mut nu_c = SingularMeasure::default();
        let mut nu_k = SingularMeasure::default();
        let mut certificates = Vec::new();
        let mut pieces: Vec<ArcSet> = Vec::new();
        for &(p, m) in &self.atoms {
            nu_c.atoms.push((p, m));
            certificates.push(Certificate::Atom { position: p, mass: m });
            pieces.push(ArcSet::from_points(&[p])?);
        }
        for c in &self.components {
            if c.schedule.is_beurling_carleson() {
                certificates.push(Certificate::BeurlingCarlesonComponent {
                    mass: c.mass,
                    entropy: c.schedule.entropy_report(),
                });
                pieces.push(c.schedule.arc_set(c.schedule.depth)?);
                nu_c.components.push(c.clone());
            } else {
                certificates.push(Certificate::KorenblumRobertsComponent {
                    mass: c.mass,
                    witness: c.schedule.divergence_witness(),
                });
                nu_k.components.push(c.clone());
            }
        }
        // Increasing unions E_1 ⊆ E_2 ⊆ ...
        let mut witness_sets: Vec<ArcSet> = Vec::with_capacity(pieces.len());
        for piece in pieces {
            let next = match witness_sets.last() {
                Some(prev) => prev.union_sets(&piece)?,
                None => piece,
            };
            witness_sets.push(next);
        }
        Ok(Decomposition { nu_c, nu_k, certificates, witness_sets })
    }

    /// Replace every Cantor component by `2^level` equal-mass atoms at the
    /// level-`level` interval midpoints. Atomic input is returned unchanged.
    pub fn discretize(&self, level: u32) -> DiscretizedMeasure {
        let mut atoms = self.atoms.clone();
        let mut max_spread = 0.0f64;
        for c in &self.components {
            let iv = c.schedule.level_intervals(level);
            let mass = c.mass / iv.len() as f64;
            max_spread = max_spread.max(c.schedule.interval_len(level));
            for (s, l) in iv {
                atoms.push(((s + l / 2.0).rem_euclid(1.0), mass));
            }
        }
        DiscretizedMeasure {
            measure: SingularMeasure { atoms, components: Vec::new() },
            component_mass: self.components.iter().map(|c| c.mass).sum(),
            max_interval_len: max_spread,
        }
    }

    /// Distance from `z` to the support (atoms and depth-truncated component
    /// sets; truncated sets contain the true supports).
    pub fn support_distance(&self, z: C64) -> f64 {
        let mut d = f64::INFINITY;
        for &(p, _) in &self.atoms {
            d = d.min((z - unit(p)).norm());
        }
        for c in &self.components {
            for (s, l) in c.schedule.level_intervals(c.schedule.depth.min(14)) {
                d = d.min(dist_to_closed_arc(z, s, s + l));
            }
        }
        d
    }
}

/// Atomic approximation of a measure, with the data needed for the
/// evaluation error bound of the associated singular inner function.
#[derive(Debug, Clone)]
pub struct DiscretizedMeasure {
    pub measure: SingularMeasure,
    component_mass: f64,
    max_interval_len: f64,
}

impl DiscretizedMeasure {
    /// Bound on `|S_nu(z) - S_discretized(z)|`.
    ///
    /// Moving mass within a level-L interval of turn-length `lambda` moves the
    /// kernel argument by at most the chord `2 pi lambda`, and
    /// `|d/d zeta (zeta+z)/(zeta-z)| = 2|z|/|zeta-z|^2`, so the Herglotz
    /// integral moves by at most `4 pi |z| mass lambda / d^2` with `d` the
    /// distance from `z` to the support. `|e^-a - e^-b| <= |a-b|` for
    /// arguments with nonnegative real part.
    pub fn error_bound(&self, z: C64, support_distance: f64) -> f64 {
        if self.component_mass == 0.0 {
            return 0.0;
        }
        let d = support_distance;
        if !(d > 0.0) {
            return f64::INFINITY;
        }
        4.0 * std::f64::consts::PI * z.norm() * self.component_mass * self.max_interval_len
            / (d * d)
    }

    pub fn max_interval_len(&self) -> f64 {
        self.max_interval_len
    }

    pub fn component_mass(&self) -> f64 {
        self.component_mass
    }

    /// Second-order bound exploiting the symmetry of each component about its
    /// level-L interval midpoints: the first angular moment of the mass in an
    /// interval about the midpoint atom vanishes, so Taylor expansion of the
    /// kernel `f(t) = (zeta(t)+z)/(zeta(t)-z)` leaves
    /// `(1/2) sup|f''| (lambda/2)^2` per unit mass, with
    /// `|f''| <= (2 pi)^2 (2|z|/d^2 + 4|z|/d^3) <= 6 (2 pi)^2 |z| / d^3`
    /// for `d <= 2`.
    pub fn symmetric_error_bound(&self, z: C64, support_distance: f64) -> f64 {
        if self.component_mass == 0.0 {
            return 0.0;
        }
        let d = support_distance;
        if !(d > 0.0) {
            return f64::INFINITY;
        }
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let second = 3.0 * pi2 * z.norm() * self.component_mass * self.max_interval_len
            * self.max_interval_len
            / (d * d * d);
        second.min(self.error_bound(z, d))
    }
}
