//! Recursive construction of integer point sequences realizing prescribed
//! norm growth, together with the unit directions they determine.
//!
//! Given a growth sequence `A_1 >= 1`, `A_{i+1} >= 4 A_i`, the driver builds
//! points `x_i` with `A_i <= |x_i| <= 2 A_i` such that every `n` consecutive
//! points form a basis of `Z^n`, every window of `n-1` consecutive points is
//! almost orthogonal and primitive, and the integer normals `w_i` of the
//! windows converge projectively. The limit direction is never materialized:
//! downstream code consumes the last normal together with a certified tail
//! radius.
//!
//! All structural identities (unimodularity, `|x_i . w_{i+1}| = 1`) are
//! integer assertions; the only interval decisions are coefficient rounding
//! and the norm window checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact_linalg::{
    determinant, generalized_cross, hyperplane_representative, is_almost_orthogonal,
    is_primitive_tuple, IntVector, LinalgError,
};
use crate::interval::{BigFloat, Cert, Interval, IntervalError, PrecisionPolicy};
use crate::rational::{ceil as rational_ceil, floor as rational_floor};
use crate::systems::MeshSequence;

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("growth sequence must satisfy A_1 >= 1 and A_(i+1) >= 4 A_i (violated at index {0})")]
    InvalidGrowth(usize),
    #[error("mesh must have gap at least log 4 to induce a growth sequence")]
    MeshGapTooSmall,
    #[error("growth sequence has {have} terms, need {need}")]
    TooFewTerms { have: usize, need: usize },
    #[error("stage count M = {m} must be at least n = {n}")]
    TooFewStages { m: usize, n: usize },
    #[error("window precondition failed: A must certifiably exceed 2 + sum of window norms")]
    GapPrecondition,
    #[error("postcondition failed at point {index}: {what}")]
    Postcondition { index: usize, what: &'static str },
    #[error("cannot reach requested direction accuracy with {stages} stages")]
    NeedMoreStages { stages: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// One term of a growth sequence: an exact rational, or `exp(X)` for an
/// exact rational `X` (mesh provenance).
#[derive(Clone, Debug)]
pub enum GrowthTerm {
    Exact(BigRational),
    ExpOf(BigRational),
}

impl GrowthTerm {
    pub fn interval(&self, bits: u32) -> Interval {
        match self {
            GrowthTerm::Exact(r) => Interval::from_ratio(r, bits),
            GrowthTerm::ExpOf(x) => Interval::from_ratio(x, bits + 16).exp(bits),
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            GrowthTerm::Exact(r) => Some(r),
            GrowthTerm::ExpOf(_) => None,
        }
    }

    /// Ceiling as an exact integer, escalating precision for `exp` terms
    /// until the enclosure pins it down. The working precision is offset by
    /// the magnitude of the value: resolving an integer boundary is an
    /// absolute-precision decision.
    fn ceil(&self, policy: &PrecisionPolicy) -> Result<BigInt, IntervalError> {
        match self {
            GrowthTerm::Exact(r) => Ok(rational_ceil(r)),
            GrowthTerm::ExpOf(x) => {
                let mag = magnitude_bits_of_exp(x);
                let policy = policy.offset(mag);
                policy.escalate(|bits| {
                    let iv = self.interval(bits);
                    let lo = iv.lo().ceil_int();
                    let hi = iv.hi().ceil_int();
                    if lo == hi {
                        Ok(lo)
                    } else {
                        Err(IntervalError::Indeterminate { bits })
                    }
                })
            }
        }
    }
}

/// Bits in the integer part of `exp(x)`, roughly `x / log 2`, never
/// negative. Used to offset working precisions for absolute decisions.
fn magnitude_bits_of_exp(x: &BigRational) -> u32 {
    if !x.is_positive() {
        return 0;
    }
    let approx = BigFloat::from_ratio(x, 32, crate::interval::Dir::Up).to_f64_approx();
    ((approx * std::f64::consts::LOG2_E).ceil() as u32).saturating_add(4)
}

/// Growth sequence `A_1 >= 1`, `A_{i+1} >= 4 A_i`, either supplied directly
/// as rationals or derived as `A_i = exp(X_i)` from a mesh with gap at least
/// `log 4`.
#[derive(Clone, Debug)]
pub struct GrowthSequence {
    terms: Vec<GrowthTerm>,
    mesh: Option<MeshSequence>,
}

impl GrowthSequence {
    pub fn from_rationals(values: Vec<BigRational>) -> Result<Self, ConstructionError> {
        if values.is_empty() || values[0] < BigRational::one() {
            return Err(ConstructionError::InvalidGrowth(1));
        }
        let four = BigRational::from_integer(BigInt::from(4));
        for (i, w) in values.windows(2).enumerate() {
            if w[1] < &four * &w[0] {
                return Err(ConstructionError::InvalidGrowth(i + 2));
            }
        }
        Ok(GrowthSequence {
            terms: values.into_iter().map(GrowthTerm::Exact).collect(),
            mesh: None,
        })
    }

    /// `A_i = exp(X_i)`. The ratio condition `A_{i+1} >= 4 A_i` is exactly
    /// the gap condition `X_{i+1} - X_i >= log 4`, checked on every prefix
    /// pair through the mesh-gap certificate.
    pub fn from_mesh(
        mesh: &MeshSequence,
        policy: &PrecisionPolicy,
    ) -> Result<Self, ConstructionError> {
        let gap_ok = policy.escalate(|bits| match mesh.has_mesh_at_least_log4(bits) {
            Cert::True => Ok(true),
            Cert::False => Ok(false),
            Cert::Unknown => Err(IntervalError::Indeterminate { bits }),
        })?;
        if !gap_ok {
            return Err(ConstructionError::MeshGapTooSmall);
        }
        Ok(GrowthSequence {
            terms: mesh
                .values()
                .iter()
                .map(|x| GrowthTerm::ExpOf(x.clone()))
                .collect(),
            mesh: Some(mesh.clone()),
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// 1-based term access.
    pub fn term(&self, i: usize) -> &GrowthTerm {
        &self.terms[i - 1]
    }

    pub fn mesh(&self) -> Option<&MeshSequence> {
        self.mesh.as_ref()
    }

    /// Longer prefix of the same sequence when mesh provenance with a
    /// generator allows it.
    pub fn extended(&self, count: usize, policy: &PrecisionPolicy) -> Option<GrowthSequence> {
        if count <= self.len() {
            return Some(self.clone());
        }
        let mesh = self.mesh.as_ref()?.extended(count)?;
        GrowthSequence::from_mesh(&mesh, policy).ok()
    }

    /// Interval for `A_i` when `i` is in range; for `i = len+1` falls back
    /// to the lower bound `4 A_len`, valid for every admissible continuation
    /// of the sequence.
    fn term_or_continuation(&self, i: usize, bits: u32) -> Interval {
        if i <= self.len() {
            self.term(i).interval(bits)
        } else {
            assert_eq!(i, self.len() + 1, "only one continuation step is used");
            self.term(self.len()).interval(bits).scale2(2)
        }
    }
}

/// Record of one rounding step: the hyperplane representative `z`, the
/// coefficient enclosures, the rounded integers, and the residuals
/// `eps_i = c_i - round(c_i)` in `[-1/2, 1/2]`.
#[derive(Clone, Debug)]
pub struct RoundingRecord {
    pub point_index: usize,
    pub z: IntVector,
    pub coeffs: Vec<Interval>,
    pub rounded: Vec<BigInt>,
    pub eps: Vec<Interval>,
}

/// Per-point certificates produced during the run.
#[derive(Clone, Debug)]
pub struct StageRecord {
    /// 1-based index of the produced point (always >= n).
    pub point_index: usize,
    /// Exact determinant of the n-point window ending here (+-1).
    pub det: BigInt,
    /// Exact dual pairing `x_i . w_{i+1}` for `i = point_index - n + 1`.
    pub dual_pairing: BigInt,
    pub rounding: RoundingRecord,
}

/// Output of a construction run: points, sign-aligned window normals with
/// exact squared heights, certified tail radii, per-stage certificates.
#[derive(Clone, Debug)]
pub struct ConstructionResult {
    n: usize,
    growth: GrowthSequence,
    points: Vec<IntVector>,
    normals: Vec<IntVector>,
    heights_sq: Vec<BigInt>,
    tails: Vec<Interval>,
    stages: Vec<StageRecord>,
}

/// Final direction data: integer normal `w` of the last window plus a
/// certified radius with `dist(w/|w|, u) <= tail.hi` for the limit direction
/// `u` of any admissible continuation of the run.
#[derive(Clone, Debug)]
pub struct DirectionProxy {
    pub n: usize,
    pub w: IntVector,
    pub norm_sq: BigInt,
    pub tail: Interval,
    pub stage: usize,
}

impl ConstructionResult {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn growth(&self) -> &GrowthSequence {
        &self.growth
    }

    /// Constructed points `x_1, .., x_M`.
    pub fn points(&self) -> &[IntVector] {
        &self.points
    }

    /// 1-based point access.
    pub fn point(&self, i: usize) -> &IntVector {
        &self.points[i - 1]
    }

    pub fn stage_count(&self) -> usize {
        self.points.len()
    }

    /// Sign-aligned window normals `w_i`, `i = 1 ..= M - n + 2`.
    pub fn normals(&self) -> &[IntVector] {
        &self.normals
    }

    /// Exact squared heights `H(U_i)^2` of the windows.
    pub fn heights_sq(&self) -> &[BigInt] {
        &self.heights_sq
    }

    /// Certified tail radii: `dist(u_i, u) <= tails[i-1].hi`.
    pub fn tails(&self) -> &[Interval] {
        &self.tails
    }

    pub fn stages(&self) -> &[StageRecord] {
        &self.stages
    }

    /// Direction proxy from the last window; errors when the requested
    /// radius cannot be met at this stage count.
    pub fn direction(
        &self,
        needed_radius: Option<&Interval>,
    ) -> Result<DirectionProxy, ConstructionError> {
        let stage = self.normals.len();
        let w = self.normals[stage - 1].clone();
        let tail = self.tails[stage - 1].clone();
        if let Some(need) = needed_radius {
            if tail.certainly_le(need) != Cert::True {
                return Err(ConstructionError::NeedMoreStages {
                    stages: self.stage_count(),
                });
            }
        }
        let norm_sq = w.norm_sq();
        Ok(DirectionProxy {
            n: self.n,
            w,
            norm_sq,
            tail,
            stage,
        })
    }
}

/// Initial almost-orthogonal primitive tuple `x_i = B_i e_i + e_{i+1}` with
/// `B_i = ceil(A_i)`, for `i = 1 .. n-1`.
///
/// For `A_1` just above 1 the ceiling can overshoot the norm window
/// (`ceil(A_1)^2 + 1 > 4 A_1^2`); the first coefficient then drops by one,
/// which restores both sides of the window.
pub fn initial_tuple(
    n: usize,
    growth: &GrowthSequence,
    policy: &PrecisionPolicy,
) -> Result<Vec<IntVector>, ConstructionError> {
    assert!(n >= 2);
    if growth.len() < n - 1 {
        return Err(ConstructionError::TooFewTerms {
            have: growth.len(),
            need: n - 1,
        });
    }
    let mut points = Vec::with_capacity(n - 1);
    for i in 1..=n - 1 {
        let term = growth.term(i);
        let mut b = term.ceil(policy)?;
        let min_b = BigInt::one() << (i - 1);
        assert!(b >= min_b, "growth conditions force B_i >= 2^(i-1)");
        let ns = &b * &b + BigInt::one();
        if cert_norm_window(&ns, term, policy)? != Cert::True {
            let b_down = &b - BigInt::one();
            let ns_down = &b_down * &b_down + BigInt::one();
            if i == 1
                && b_down >= min_b
                && cert_norm_window(&ns_down, term, policy)? == Cert::True
            {
                b = b_down;
            } else {
                return Err(ConstructionError::Postcondition {
                    index: i,
                    what: "initial point norm window",
                });
            }
        }
        let mut coords = vec![BigInt::zero(); n];
        coords[i - 1] = b;
        coords[i] = BigInt::one();
        points.push(IntVector::new(coords)?);
    }
    let refs: Vec<&IntVector> = points.iter().collect();
    let (ao, _) = is_almost_orthogonal(&refs, policy.start_bits)?;
    if !ao {
        return Err(ConstructionError::Postcondition {
            index: 0,
            what: "initial tuple almost orthogonal",
        });
    }
    if !is_primitive_tuple(&refs)? {
        return Err(ConstructionError::Postcondition {
            index: 0,
            what: "initial tuple primitive",
        });
    }
    Ok(points)
}

/// Certified `A^2 <= norm_sq <= 4 A^2`; exact when `A` is rational.
fn cert_norm_window(
    norm_sq: &BigInt,
    a: &GrowthTerm,
    policy: &PrecisionPolicy,
) -> Result<Cert, ConstructionError> {
    if let Some(r) = a.exact() {
        let ns = BigRational::from_integer(norm_sq.clone());
        let a2 = r * r;
        let four_a2 = &a2 * BigRational::from_integer(BigInt::from(4));
        return Ok(Cert::from_bool(a2 <= ns && ns <= four_a2));
    }
    let out = policy.escalate(|bits| {
        let iv = a.interval(bits);
        let a2 = iv.mul(&iv, bits);
        let ns = Interval::from_int(norm_sq);
        match (a2.certainly_le(&ns), ns.certainly_le(&a2.scale2(2))) {
            (Cert::True, Cert::True) => Ok(Cert::True),
            (Cert::False, _) | (_, Cert::False) => Ok(Cert::False),
            _ => Err(IntervalError::Indeterminate { bits }),
        }
    })?;
    Ok(out)
}

/// Cofactor-transpose adjugate of a small square integer matrix.
fn adjugate(m: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let k = m.len();
    if k == 1 {
        return vec![vec![BigInt::one()]];
    }
    let mut adj = vec![vec![BigInt::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            let minor: Vec<Vec<BigInt>> = (0..k)
                .filter(|&r| r != i)
                .map(|r| {
                    (0..k)
                        .filter(|&c| c != j)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let cof = bareiss_det_local(minor);
            adj[j][i] = if (i + j) % 2 == 0 { cof } else { -cof };
        }
    }
    adj
}

fn bareiss_det_local(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = &t / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Upper estimate of the integer-part bits of `(p + sigma kappa) / d`.
fn coefficient_magnitude_bits(
    p: &BigInt,
    sigma: &BigInt,
    d: &BigInt,
    kappa_rough: &Interval,
) -> u32 {
    let kappa_bits = kappa_rough
        .hi()
        .abs()
        .msb_exp_pub()
        .unwrap_or(0)
        .max(0) as u64;
    let term = (sigma.bits() + kappa_bits).max(p.bits());
    (term.saturating_sub(d.bits()) as u32).saturating_add(8)
}

/// Decides `round(c)` for `c = (p + sigma * kappa) / d` with integers
/// `p, sigma, d > 0` and `kappa` an enclosure rebuilt per precision.
///
/// A coefficient with `sigma = 0` is exactly rational: ties at half-integers
/// take the downward integer. Otherwise the enclosure must certifiably avoid
/// a guard band of 10^-3 around the half-integers; once its width drops to
/// resolution scale it only has to exclude the half-integer itself.
fn decide_round(
    p: &BigInt,
    sigma: &BigInt,
    d: &BigInt,
    kappa_at: &dyn Fn(u32) -> Interval,
    policy: &PrecisionPolicy,
) -> Result<(BigInt, Interval), ConstructionError> {
    if sigma.is_zero() {
        let c = BigRational::new(p.clone(), d.clone());
        let shifted = &c + BigRational::new(BigInt::one(), BigInt::from(2));
        let m = if shifted.is_integer() {
            rational_floor(&c)
        } else {
            rational_floor(&shifted)
        };
        let iv = Interval::from_ratio(&c, policy.start_bits);
        return Ok((m, iv));
    }
    let half = Interval::point(BigFloat::pow2(-1));
    let guard = Interval::from_ratio(&BigRational::new(BigInt::one(), BigInt::from(1000)), 32);
    let out = policy.escalate(|bits| {
        let kappa = kappa_at(bits);
        let c = Interval::from_int(p)
            .add(&Interval::from_int(sigma).mul(&kappa, bits), bits)
            .div(&Interval::from_int(d), bits)
            .expect("d > 0");
        // candidate integer nearest to the midpoint
        let k = c.midpoint(bits).add_exact(&BigFloat::pow2(-1)).floor_int();
        let delta = c.sub(&Interval::from_int(&k), bits);
        let safe_band = half.sub(&guard, bits);
        if delta.abs().certainly_lt(&safe_band) == Cert::True {
            return Ok((k, c));
        }
        // near a half-integer: demand resolution before trusting the side
        let width_tiny =
            c.width(32).cmp_val(&BigFloat::pow2(-40)) == std::cmp::Ordering::Less;
        if width_tiny && delta.abs().certainly_lt(&half) == Cert::True {
            return Ok((k, c));
        }
        Err(IntervalError::Indeterminate { bits })
    })?;
    Ok(out)
}

/// One recursive step: from an almost orthogonal primitive window
/// `(y_1, .., y_{n-1})` and a growth value `A >= 2 + sum |y_i|`, produce an
/// integer point `y_n` with `A <= |y_n| <= 2A`, `|det(y_1, .., y_n)| = 1`,
/// `(y_2, .., y_n)` almost orthogonal, and `|y_1 . cross(y_2, .., y_n)| = 1`.
/// All four properties are re-verified before returning.
pub fn next_point(
    window: &[IntVector],
    a: &GrowthTerm,
    policy: &PrecisionPolicy,
) -> Result<(IntVector, RoundingRecord), ConstructionError> {
    next_point_impl(window, a, policy, 0)
}

fn next_point_impl(
    window: &[IntVector],
    a: &GrowthTerm,
    policy: &PrecisionPolicy,
    point_index: usize,
) -> Result<(IntVector, RoundingRecord), ConstructionError> {
    let n = window[0].dim();
    assert_eq!(window.len(), n - 1, "window must hold n-1 points");
    let refs: Vec<&IntVector> = window.iter().collect();

    let (ao, _) = is_almost_orthogonal(&refs, policy.start_bits)?;
    if !ao {
        return Err(ConstructionError::Postcondition {
            index: point_index,
            what: "window almost orthogonal (precondition)",
        });
    }

    // A >= 2 + sum |y_i|, certified.
    let gap_ok = policy.escalate(|bits| {
        let mut need = Interval::from_i64(2);
        for y in window {
            need = need.add(&y.norm(bits), bits);
        }
        match a.interval(bits).certainly_ge(&need) {
            Cert::True => Ok(true),
            Cert::False => Ok(false),
            Cert::Unknown => Err(IntervalError::Indeterminate { bits }),
        }
    })?;
    if !gap_ok {
        return Err(ConstructionError::GapPrecondition);
    }

    // Integer normal and hyperplane representative z with z . w = 1.
    let w = generalized_cross(&refs)?;
    let z = hyperplane_representative(&w)?;

    // Gram data: D = det G, its adjugate, and the tail determinant
    // D_tail = det Gram(y_2, .., y_{n-1}), so the squared norm of the
    // component of y_1 orthogonal to the later window vectors is D / D_tail.
    let k = n - 1;
    let mut gram = vec![vec![BigInt::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            gram[i][j] = window[i].dot(&window[j])?;
        }
    }
    let d = bareiss_det_local(gram.clone());
    assert!(d.is_positive(), "Gram determinant of independent vectors");
    let adj = adjugate(&gram);
    let d_tail = bareiss_det_local(
        (1..k)
            .map(|i| (1..k).map(|j| gram[i][j].clone()).collect())
            .collect(),
    );

    // Target point: y = w / |w|^2 + (3/2) A v, where v is the unit vector of
    // the window span orthogonal to y_2, .., y_{n-1} with y_1 . v > 0. The
    // window is orthogonal to w, so the coefficients of y - z in the window
    // basis are c_i = (p_i + sigma_i * kappa) / D with
    // kappa = (3/2) A sqrt(D / D_tail).
    let mut ps = Vec::with_capacity(k);
    let mut sigmas = Vec::with_capacity(k);
    for i in 0..k {
        let mut p = BigInt::zero();
        for j in 0..k {
            p += &adj[i][j] * -window[j].dot(&z)?;
        }
        ps.push(p);
        sigmas.push(adj[i][0].clone());
    }
    let d_num = d.clone();
    let d_den = d_tail.clone();
    let a_term = a.clone();
    let kappa_cache: std::cell::RefCell<std::collections::HashMap<u32, Interval>> =
        std::cell::RefCell::new(std::collections::HashMap::new());
    let kappa_at = move |bits: u32| -> Interval {
        if let Some(v) = kappa_cache.borrow().get(&bits) {
            return v.clone();
        }
        let vnorm = crate::interval::sqrt_ratio(&d_num, &d_den, bits);
        let three_half =
            Interval::from_ratio(&BigRational::new(BigInt::from(3), BigInt::from(2)), bits);
        let v = a_term
            .interval(bits)
            .mul(&vnorm, bits)
            .mul(&three_half, bits);
        kappa_cache.borrow_mut().insert(bits, v.clone());
        v
    };

    // Deciding round(c_i) is an absolute-resolution question; the working
    // precision must absorb the integer magnitude of sigma_i kappa / D.
    let kappa_rough = kappa_at(48);
    let mut rounded = Vec::with_capacity(k);
    let mut coeffs = Vec::with_capacity(k);
    for i in 0..k {
        let mag = coefficient_magnitude_bits(&ps[i], &sigmas[i], &d, &kappa_rough);
        let local = policy.offset(mag);
        let (m, c) = decide_round(&ps[i], &sigmas[i], &d, &kappa_at, &local)?;
        rounded.push(m);
        coeffs.push(c);
    }

    let mut point = z.clone();
    for (m, y) in rounded.iter().zip(window) {
        point = point.add(&y.scaled(m))?;
    }

    // Residuals eps_i = c_i - m_i stay in [-1/2, 1/2].
    let eps: Vec<Interval> = coeffs
        .iter()
        .zip(&rounded)
        .map(|(c, m)| c.sub(&Interval::from_int(m), policy.start_bits))
        .collect();
    let half = Interval::point(BigFloat::pow2(-1));
    for e in &eps {
        assert!(
            e.abs().certainly_le(&half) != Cert::False,
            "rounding residual escaped [-1/2, 1/2]"
        );
    }

    // Postconditions.
    if cert_norm_window(&point.norm_sq(), a, policy)? != Cert::True {
        return Err(ConstructionError::Postcondition {
            index: point_index,
            what: "A <= |y_n| <= 2A",
        });
    }
    let mut basis: Vec<&IntVector> = window.iter().collect();
    basis.push(&point);
    let det = determinant(&basis)?;
    if !det.abs().is_one() {
        return Err(ConstructionError::Postcondition {
            index: point_index,
            what: "|det| = 1",
        });
    }
    let mut shifted: Vec<&IntVector> = window[1..].iter().collect();
    shifted.push(&point);
    let (ao, _) = is_almost_orthogonal(&shifted, policy.start_bits)?;
    if !ao {
        return Err(ConstructionError::Postcondition {
            index: point_index,
            what: "shifted window almost orthogonal",
        });
    }
    let w_next = generalized_cross(&shifted)?;
    if !window[0].dot(&w_next)?.abs().is_one() {
        return Err(ConstructionError::Postcondition {
            index: point_index,
            what: "|y_1 . cross(y_2, .., y_n)| = 1",
        });
    }

    Ok((
        point,
        RoundingRecord {
            point_index,
            z,
            coeffs,
            rounded,
            eps,
        },
    ))
}

/// Full driver: initial tuple, then one `next_point` step per stage up to
/// `m` points, maintaining sign-aligned normals, exact dual pairings,
/// heights, and certified tail radii.
pub fn run(
    n: usize,
    growth: &GrowthSequence,
    m: usize,
    policy: &PrecisionPolicy,
) -> Result<ConstructionResult, ConstructionError> {
    assert!(n >= 2);
    if m < n {
        return Err(ConstructionError::TooFewStages { m, n });
    }
    if growth.len() < m {
        return Err(ConstructionError::TooFewTerms {
            have: growth.len(),
            need: m,
        });
    }

    let mut points = initial_tuple(n, growth, policy)?;
    let mut normals: Vec<IntVector> = Vec::new();
    let mut heights_sq: Vec<BigInt> = Vec::new();
    let mut stages: Vec<StageRecord> = Vec::new();

    {
        let refs: Vec<&IntVector> = points.iter().collect();
        let w = generalized_cross(&refs)?;
        heights_sq.push(w.norm_sq());
        normals.push(w);
    }

    for point_index in n..=m {
        let window: Vec<IntVector> = points[point_index - n..point_index - 1].to_vec();
        let (point, rounding) =
            next_point_impl(&window, growth.term(point_index), policy, point_index)?;

        let mut basis_refs: Vec<&IntVector> = window.iter().collect();
        basis_refs.push(&point);
        let det = determinant(&basis_refs)?;

        // New window normal, sign-aligned to its predecessor.
        let shifted: Vec<&IntVector> = basis_refs[1..].to_vec();
        let mut w_next = generalized_cross(&shifted)?;
        let prev = normals.last().expect("at least one normal");
        if prev.dot(&w_next)?.is_negative() {
            w_next = w_next.neg();
        }
        let dual = window[0].dot(&w_next)?;
        if !dual.abs().is_one() {
            return Err(ConstructionError::Postcondition {
                index: point_index,
                what: "exact dual pairing |x_i . w_(i+1)| = 1",
            });
        }
        heights_sq.push(w_next.norm_sq());
        normals.push(w_next);
        points.push(point);
        stages.push(StageRecord {
            point_index,
            det,
            dual_pairing: dual,
            rounding,
        });
    }

    // Tail radii: dist(u_i, u) <= sum over later steps of
    // 1 / (A_{j+n-1} H(U_j)) <= 2 / (A_{i+n-1} H(U_i)); upper endpoints only.
    let bits = policy.start_bits;
    let mut tails = Vec::with_capacity(normals.len());
    for i in 1..=normals.len() {
        let a_next = growth.term_or_continuation(i + n - 1, bits);
        let h = Interval::from_int(&heights_sq[i - 1]).sqrt(bits);
        let denom = a_next.mul(&h, bits);
        let bound = Interval::from_i64(2).div(&denom, bits)?;
        tails.push(Interval::new(BigFloat::zero(), bound.hi().clone())?);
    }

    Ok(ConstructionResult {
        n,
        growth: growth.clone(),
        points,
        normals,
        heights_sq,
        tails,
        stages,
    })
}
