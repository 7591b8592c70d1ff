//! Distance functions, point trajectories, brute-force successive minima,
//! body volumes, and the product-bound certificate that brackets the minima
//! profile of the slab-ball bodies
//! `C_u(Q) = { x : |x| <= Q, |x . u| <= Q^-(n-1) }`.
//!
//! Directions come in two flavors: exactly rational unit data (an integer
//! normal `w`, the body direction being `w/|w|`), where every comparison of
//! squared distance values is an exact rational test, and proxy directions
//! from a construction run, where every dot product is a certified interval
//! widened by the tail radius.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::construction::DirectionProxy;
use crate::exact_linalg::{wedge, IntVector, LinalgError};
use crate::interval::{ln2, ln_factorial, pi, sqrt_ratio, BigFloat, Cert, Dir, Interval, IntervalError};

#[derive(Debug, Error)]
pub enum MinimaError {
    #[error("direction normal must be nonzero")]
    ZeroDirection,
    #[error("zero vector has no distance value")]
    ZeroVector,
    #[error("Q must be at least 1")]
    QTooSmall,
    #[error("enumeration budget of {budget} candidate points exceeded")]
    BudgetExceeded { budget: usize },
    #[error("direction enclosure too coarse: |x . u| interval touches zero")]
    DirectionTooCoarse,
    #[error("profile orderings not decisive at the available direction accuracy")]
    AmbiguousProfile,
    #[error("volume tolerance unreachable")]
    VolumeTolerance,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

#[derive(Clone, Debug)]
enum Direction {
    /// Unit direction `w/|w|` for an exact integer normal `w`.
    RationalUnit { w: IntVector, norm_sq: BigInt },
    /// Constructed proxy: last window normal plus certified tail radius.
    Proxy(DirectionProxy),
}

/// The family `C_u(Q)` for a fixed direction and varying `Q >= 1`.
#[derive(Clone, Debug)]
pub struct BodyFamily {
    n: usize,
    direction: Direction,
}

impl BodyFamily {
    pub fn rational_unit(w: IntVector) -> Result<Self, MinimaError> {
        if w.is_zero() {
            return Err(MinimaError::ZeroDirection);
        }
        let n = w.dim();
        let norm_sq = w.norm_sq();
        Ok(BodyFamily {
            n,
            direction: Direction::RationalUnit { w, norm_sq },
        })
    }

    pub fn from_proxy(proxy: DirectionProxy) -> Self {
        BodyFamily {
            n: proxy.n,
            direction: Direction::Proxy(proxy),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.direction, Direction::RationalUnit { .. })
    }

    /// Exact `|x . u|^2` when the direction is rational.
    pub fn dot_abs_sq_exact(&self, x: &IntVector) -> Result<Option<BigRational>, MinimaError> {
        match &self.direction {
            Direction::RationalUnit { w, norm_sq } => {
                let d = x.dot(w)?;
                Ok(Some(BigRational::new(&d * &d, norm_sq.clone())))
            }
            Direction::Proxy(_) => Ok(None),
        }
    }

    /// Certified enclosure of `|x . u|`. For proxies the enclosure is
    /// `|x . w|/|w|` widened by `2 |x| tail` (chord bound for sign-aligned
    /// unit vectors).
    pub fn dot_abs(&self, x: &IntVector, bits: u32) -> Result<Interval, MinimaError> {
        match &self.direction {
            Direction::RationalUnit { w, norm_sq } => {
                let d = x.dot(w)?;
                Ok(sqrt_ratio(&(&d * &d), norm_sq, bits))
            }
            Direction::Proxy(p) => {
                let d = x.dot(&p.w)?;
                let base = sqrt_ratio(&(&d * &d), &p.norm_sq, bits);
                let err = x.norm(bits).mul(&p.tail, bits).scale2(1);
                let lo = base.lo().sub_round(err.hi(), bits, Dir::Down);
                let lo = if lo.is_negative() {
                    BigFloat::zero()
                } else {
                    lo
                };
                let hi = base.hi().add_round(err.hi(), bits, Dir::Up);
                Ok(Interval::new(lo, hi)?)
            }
        }
    }
}

/// Exact `lambda(x, C_u(Q))^2` for rational directions and rational `Q`:
/// `max( |x|^2 / Q^2, |x . u|^2 Q^(2n-2) )`.
pub fn lambda_sq_exact(
    x: &IntVector,
    body: &BodyFamily,
    q: &BigRational,
) -> Result<Option<BigRational>, MinimaError> {
    if x.is_zero() {
        return Err(MinimaError::ZeroVector);
    }
    if q < &BigRational::one() {
        return Err(MinimaError::QTooSmall);
    }
    let dot_sq = match body.dot_abs_sq_exact(x)? {
        Some(d) => d,
        None => return Ok(None),
    };
    let n = body.n();
    let q2 = q * q;
    let norm_term = BigRational::from_integer(x.norm_sq()) / &q2;
    let mut qpow = BigRational::one();
    for _ in 0..n - 1 {
        qpow *= &q2;
    }
    let slab_term = dot_sq * qpow;
    Ok(Some(norm_term.max(slab_term)))
}

/// Distance value `lambda(x, C_u(Q)) = max(|x| / Q, |x . u| Q^(n-1))` as a
/// certified interval; `q_val` is an enclosure of `Q >= 1`.
pub fn lambda_point(
    x: &IntVector,
    body: &BodyFamily,
    q_val: &Interval,
    bits: u32,
) -> Result<Interval, MinimaError> {
    if x.is_zero() {
        return Err(MinimaError::ZeroVector);
    }
    let norm_term = x.norm(bits).div(q_val, bits)?;
    let qpow = q_val.powi(body.n() as u32 - 1, bits);
    let slab_term = body.dot_abs(x, bits)?.mul(&qpow, bits);
    Ok(norm_term.max(&slab_term))
}

/// Piecewise-linear trajectory descriptor of a point: `q` maps to
/// `log lambda(x, C_u(e^q))`, a slope -1 segment followed by a slope n-1
/// half-line.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub n: usize,
    pub log_norm: Interval,
    pub log_dot: Interval,
}

impl Trajectory {
    /// `L_x(q) = max(log_norm - q, log_dot + (n-1) q)`.
    pub fn eval(&self, q: &Interval, bits: u32) -> Interval {
        let falling = self.log_norm.sub(q, bits);
        let rising = self
            .log_dot
            .add(&q.mul(&Interval::from_i64(self.n as i64 - 1), bits), bits);
        falling.max(&rising)
    }

    pub fn eval_rational(&self, q: &BigRational, bits: u32) -> Interval {
        self.eval(&Interval::from_ratio(q, bits), bits)
    }

    /// Breakpoint `q* = (log_norm - log_dot) / n` where the slope changes.
    pub fn breakpoint_q(&self, bits: u32) -> Interval {
        self.log_norm
            .sub(&self.log_dot, bits)
            .div(&Interval::from_i64(self.n as i64), bits)
            .expect("n >= 2")
    }

    /// Minimum value `((n-1) log_norm + log_dot) / n`, attained at the
    /// breakpoint.
    pub fn min_value(&self, bits: u32) -> Interval {
        self.log_norm
            .mul(&Interval::from_i64(self.n as i64 - 1), bits)
            .add(&self.log_dot, bits)
            .div(&Interval::from_i64(self.n as i64), bits)
            .expect("n >= 2")
    }
}

/// Builds the trajectory of `x`; requires `0 < |x . u| < |x|` certified.
pub fn trajectory(x: &IntVector, body: &BodyFamily, bits: u32) -> Result<Trajectory, MinimaError> {
    if x.is_zero() {
        return Err(MinimaError::ZeroVector);
    }
    let dot = body.dot_abs(x, bits)?;
    if !dot.lo().is_positive() {
        return Err(MinimaError::DirectionTooCoarse);
    }
    let norm = x.norm(bits);
    if dot.certainly_lt(&norm) != Cert::True {
        return Err(MinimaError::DirectionTooCoarse);
    }
    Ok(Trajectory {
        n: body.n(),
        log_norm: norm.ln(bits)?,
        log_dot: dot.ln(bits)?,
    })
}

/// Successive minima profile at one `Q`: monotone lambda enclosures with
/// independent integer witnesses realizing them.
#[derive(Clone, Debug)]
pub struct MinimaProfile {
    pub q: BigRational,
    pub lambdas: Vec<Interval>,
    /// Exact squared values in the rational-direction path.
    pub lambdas_sq: Option<Vec<BigRational>>,
    pub witnesses: Vec<IntVector>,
    /// Whether every ordering decision was certified.
    pub decisive: bool,
}

/// Canonical enumeration of nonzero integer points with `|x|^2 <= r2`
/// (first nonzero coordinate positive). Each visited leaf counts toward the
/// budget.
fn enumerate_ball(n: usize, r2: &BigRational, budget: usize) -> Result<Vec<IntVector>, MinimaError> {
    let bound = {
        let f = r2.floor().to_integer();
        if f.is_negative() {
            BigInt::zero()
        } else {
            f.sqrt()
        }
    };
    let bound = bound
        .to_i64()
        .ok_or(MinimaError::BudgetExceeded { budget })?;

    struct Ctx<'a> {
        n: usize,
        bound: i64,
        r2: &'a BigRational,
        out: Vec<IntVector>,
        visited: usize,
        budget: usize,
    }

    fn rec(
        ctx: &mut Ctx,
        idx: usize,
        coords: &mut Vec<BigInt>,
        norm_sq: BigInt,
        nonzero_seen: bool,
    ) -> Result<(), MinimaError> {
        if idx == ctx.n {
            ctx.visited += 1;
            if ctx.visited > ctx.budget {
                return Err(MinimaError::BudgetExceeded { budget: ctx.budget });
            }
            if nonzero_seen {
                ctx.out.push(IntVector::new(coords.clone()).expect("n >= 2"));
            }
            return Ok(());
        }
        let lo = if nonzero_seen { -ctx.bound } else { 0 };
        for c in lo..=ctx.bound {
            let cb = BigInt::from(c);
            let ns = &norm_sq + &cb * &cb;
            if &BigRational::from_integer(ns.clone()) > ctx.r2 {
                continue;
            }
            coords[idx] = cb;
            rec(ctx, idx + 1, coords, ns, nonzero_seen || c != 0)?;
        }
        coords[idx] = BigInt::zero();
        Ok(())
    }

    let mut ctx = Ctx {
        n,
        bound,
        r2,
        out: Vec::new(),
        visited: 0,
        budget,
    };
    let mut coords = vec![BigInt::zero(); n];
    rec(&mut ctx, 0, &mut coords, BigInt::zero(), false)?;
    Ok(ctx.out)
}

fn independent_of(selected: &[IntVector], cand: &IntVector) -> bool {
    if selected.is_empty() {
        return !cand.is_zero();
    }
    let mut refs: Vec<&IntVector> = selected.iter().collect();
    refs.push(cand);
    match wedge(&refs) {
        Ok(w) => !w.is_zero(),
        Err(_) => false,
    }
}

/// Exact greedy successive minima by enumeration: every candidate with
/// `lambda(x) <= t` satisfies `|x| <= t Q`, so enumerating the ball of
/// radius `t Q` and doubling `t` until `n` independent points appear within
/// threshold yields the exact profile.
pub fn successive_minima_bruteforce(
    body: &BodyFamily,
    q: &BigRational,
    budget: usize,
    bits: u32,
) -> Result<MinimaProfile, MinimaError> {
    if q < &BigRational::one() {
        return Err(MinimaError::QTooSmall);
    }
    let n = body.n();
    if !body.is_rational() {
        return successive_minima_proxy(body, q, budget, bits);
    }
    let mut t_sq = BigRational::one();
    let q2 = q * q;
    loop {
        let r2 = &t_sq * &q2;
        let cands = enumerate_ball(n, &r2, budget)?;
        let mut scored: Vec<(BigRational, IntVector)> = Vec::with_capacity(cands.len());
        for c in cands {
            let l2 = lambda_sq_exact(&c, body, q)?.expect("rational path");
            scored.push((l2, c));
        }
        scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.coords().cmp(b.1.coords())));
        let mut witnesses: Vec<IntVector> = Vec::with_capacity(n);
        let mut lambdas_sq: Vec<BigRational> = Vec::with_capacity(n);
        for (l2, c) in &scored {
            if witnesses.len() == n {
                break;
            }
            if independent_of(&witnesses, c) {
                witnesses.push(c.clone());
                lambdas_sq.push(l2.clone());
            }
        }
        if witnesses.len() == n && lambdas_sq[n - 1] <= t_sq {
            // The ball of radius lambda_n Q lies inside the enumerated one,
            // so no smaller witness was missed.
            let lambdas = lambdas_sq
                .iter()
                .map(|l2| Interval::from_ratio(l2, bits + 8).sqrt(bits))
                .collect();
            return Ok(MinimaProfile {
                q: q.clone(),
                lambdas,
                lambdas_sq: Some(lambdas_sq),
                witnesses,
                decisive: true,
            });
        }
        t_sq *= BigRational::from_integer(BigInt::from(4));
    }
}

/// Proxy-direction variant: orderings are decided on certified intervals;
/// instances whose ordering cannot be certified are reported, not guessed.
fn successive_minima_proxy(
    body: &BodyFamily,
    q: &BigRational,
    budget: usize,
    bits: u32,
) -> Result<MinimaProfile, MinimaError> {
    let n = body.n();
    let q_iv = Interval::from_ratio(q, bits);
    let mut t = BigRational::one();
    loop {
        let r2 = &t * &t * q * q;
        let cands = enumerate_ball(n, &r2, budget)?;
        let mut scored: Vec<(Interval, IntVector)> = Vec::with_capacity(cands.len());
        for c in cands {
            let l = lambda_point(&c, body, &q_iv, bits)?;
            scored.push((l, c));
        }
        scored.sort_by(|a, b| {
            a.0.hi()
                .cmp_val(b.0.hi())
                .then_with(|| a.1.coords().cmp(b.1.coords()))
        });
        let mut witnesses: Vec<IntVector> = Vec::with_capacity(n);
        let mut uppers: Vec<Interval> = Vec::with_capacity(n);
        for (l, c) in &scored {
            if witnesses.len() == n {
                break;
            }
            if independent_of(&witnesses, c) {
                witnesses.push(c.clone());
                uppers.push(l.clone());
            }
        }
        let t_iv = Interval::from_ratio(&t, bits);
        if witnesses.len() == n && uppers[n - 1].certainly_le(&t_iv) == Cert::True {
            // Lower bounds: the j-th smallest lower end over all candidates
            // bounds the j-th minimum from below (witnesses are among the
            // candidates and independence only pushes minima up).
            let mut lows: Vec<_> = scored.iter().map(|(l, _)| l.lo().clone()).collect();
            lows.sort_by(|a, b| a.cmp_val(b));
            let mut lambdas = Vec::with_capacity(n);
            let mut decisive = true;
            for (j, up) in uppers.iter().enumerate() {
                let mut lo = lows[j].clone();
                if lo.cmp_val(up.lo()) == std::cmp::Ordering::Greater {
                    lo = up.lo().clone();
                }
                let iv = Interval::new(lo, up.hi().clone())?;
                if iv.rel_width_approx().is_none_or(|w| w > 1e-3) {
                    decisive = false;
                }
                lambdas.push(iv);
            }
            if !decisive {
                return Err(MinimaError::AmbiguousProfile);
            }
            return Ok(MinimaProfile {
                q: q.clone(),
                lambdas,
                lambdas_sq: None,
                witnesses,
                decisive,
            });
        }
        t *= BigRational::from_integer(BigInt::from(2));
    }
}

/// Unit k-ball volume as an interval, via `V_k = V_{k-2} 2 pi / k`.
pub fn unit_ball_volume(k: usize, bits: u32) -> Interval {
    match k {
        0 => Interval::one(),
        1 => Interval::from_i64(2),
        _ => {
            let two_pi = pi(bits).scale2(1);
            unit_ball_volume(k - 2, bits)
                .mul(&two_pi, bits)
                .div(&Interval::from_i64(k as i64), bits)
                .expect("k > 0")
        }
    }
}

/// Volume of `C_u(Q)`: `2 * integral_0^t V_{n-1} (Q^2 - s^2)^((n-1)/2) ds`
/// with `t = min(Q, Q^-(n-1))`, evaluated through the closed-form reduction
/// `I_k = ( t (Q^2-t^2)^(k/2) + k Q^2 I_{k-2} ) / (k+1)` down to
/// `I_0 = t`, `I_1 = ( t sqrt(Q^2-t^2) + Q^2 asin(t/Q) ) / 2`. Precision is
/// escalated internally until the requested relative tolerance holds. Also
/// returns the cheap upper bound `min(V_n Q^n, 2 V_{n-1})`.
pub fn volume(
    n: usize,
    q_val: &Interval,
    tol_rel: f64,
    bits: u32,
) -> Result<(Interval, Interval), MinimaError> {
    if q_val.certainly_ge(&Interval::one()) != Cert::True {
        return Err(MinimaError::QTooSmall);
    }
    let cheap = {
        let ball = unit_ball_volume(n, bits).mul(&q_val.powi(n as u32, bits), bits);
        let cylinder = unit_ball_volume(n - 1, bits).scale2(1);
        ball.min(&cylinder)
    };
    let mut wp = bits;
    loop {
        let one = Interval::one();
        let q_pow = q_val.powi(n as u32 - 1, wp);
        let t = q_val.min(&one.div(&q_pow, wp)?);
        let q2 = q_val.mul(q_val, wp);
        let t2 = t.mul(&t, wp);
        let base = q2.sub(&t2, wp).max(&Interval::zero());
        let root = base.sqrt(wp);

        let i0 = t.clone();
        let i1 = {
            let ratio = t.div(q_val, wp)?;
            t.mul(&root, wp)
                .add(&q2.mul(&ratio.asin(wp), wp), wp)
                .scale2(-1)
        };
        let k_target = n - 1;
        let mut ik = if k_target % 2 == 0 { i0 } else { i1 };
        let mut k = if k_target % 2 == 0 { 0usize } else { 1usize };
        // (Q^2 - t^2)^(k/2) maintained alongside the recursion
        let mut pow = if k_target % 2 == 0 {
            Interval::one()
        } else {
            root.clone()
        };
        while k < k_target {
            k += 2;
            pow = pow.mul(&base, wp);
            ik = t
                .mul(&pow, wp)
                .add(&q2.mul(&ik, wp).mul(&Interval::from_i64(k as i64), wp), wp)
                .div(&Interval::from_i64(k as i64 + 1), wp)?;
        }
        let vol = unit_ball_volume(n - 1, wp).mul(&ik, wp).scale2(1);
        if vol.rel_width_approx().is_some_and(|w| w <= tol_rel) {
            return Ok((vol, cheap));
        }
        if wp >= bits.saturating_mul(16).max(2048) {
            return Err(MinimaError::VolumeTolerance);
        }
        wp *= 2;
    }
}

/// Componentwise bracket of the successive minima from the product bound of
/// Minkowski's second theorem: given enclosures of `lambda(y_j, C)` for `n`
/// independent points and of `vol(C)`, the sorted values `s_j` satisfy
/// `lambda_j(C) <= s_j <= factor * lambda_j(C)` with `factor = n! B / 2^n`,
/// `B = prod lambda(y_j) * vol`.
pub fn minkowski_sandwich(
    point_lambdas: &[Interval],
    vol: &Interval,
    bits: u32,
) -> (Vec<Interval>, Interval) {
    let n = point_lambdas.len();
    let sorted = sort_intervals(point_lambdas);
    let mut b = vol.clone();
    for l in point_lambdas {
        b = b.mul(l, bits);
    }
    let mut factorial = BigInt::one();
    for k in 2..=n {
        factorial *= BigInt::from(k as u64);
    }
    let factor = b
        .mul(&Interval::from_int(&factorial), bits)
        .scale2(-(n as i64));
    (sorted, factor)
}

/// Sorted interval vector: the j-th entry encloses the j-th smallest of the
/// true values (monotone sorting maps: j-th smallest lower ends paired with
/// j-th smallest upper ends).
pub fn sort_intervals(vals: &[Interval]) -> Vec<Interval> {
    let mut los: Vec<_> = vals.iter().map(|v| v.lo().clone()).collect();
    let mut his: Vec<_> = vals.iter().map(|v| v.hi().clone()).collect();
    los.sort_by(|a, b| a.cmp_val(b));
    his.sort_by(|a, b| a.cmp_val(b));
    los.into_iter()
        .zip(his)
        .map(|(lo, hi)| Interval::new(lo, hi).expect("sorted endpoints stay ordered"))
        .collect()
}

/// Certificate profile at parameter `q`: the sorted trajectory values of a
/// unimodular window of `n` points, plus a slack such that the true
/// `log lambda_j(C(e^q))` lies in `[center_j - slack, center_j]`. The slack
/// is `log(n!) - n log 2 + log B`, with `log B` the smaller of the analytic
/// ceiling `(n^2 + n) log 2` and the runtime product bound.
pub fn certified_profile(
    window: &[&IntVector],
    body: &BodyFamily,
    q: &BigRational,
    bits: u32,
) -> Result<(Vec<Interval>, Interval), MinimaError> {
    let n = body.n();
    assert_eq!(window.len(), n, "window must hold n points");
    let mut lvals = Vec::with_capacity(n);
    for x in window {
        let tr = trajectory(x, body, bits)?;
        lvals.push(tr.eval_rational(q, bits));
    }
    let center = sort_intervals(&lvals);

    let mut sum_l = Interval::zero();
    for l in &lvals {
        sum_l = sum_l.add(l, bits);
    }
    let q_exp = Interval::from_ratio(q, bits).exp(bits);
    let (vol, _) = volume(n, &q_exp, 1e-6, bits)?;
    let ln_b_runtime = sum_l.add(&vol.ln(bits)?, bits);
    let ln_b_analytic = ln2(bits).mul(&Interval::from_i64((n * n + n) as i64), bits);
    let ln_b = if ln_b_runtime.hi().cmp_val(ln_b_analytic.hi()) == std::cmp::Ordering::Less {
        ln_b_runtime
    } else {
        ln_b_analytic
    };
    let slack = ln_factorial(n as u32, bits)
        .sub(&ln2(bits).mul(&Interval::from_i64(n as i64), bits), bits)
        .add(&ln_b, bits);
    Ok((center, slack))
}
