//! End-to-end certification that a constructed direction realizes a given
//! quasi-regular (n,0)-system: per-point trajectory residuals, the
//! multiplicative distance-value envelope, and the uniform deviation report
//! against the bound `2 n^2`.
//!
//! The deviation between the system `P` and the minima profile `L_u`
//! decomposes per grid point into two certified legs: the distance from
//! `P(q)` to the sorted trajectory values of the active window (analytic
//! ceiling `n log 2`), and the certificate slack from the product bound
//! (analytic ceiling `(n^2 + n) log 2 + log(n!/2^n)`). Both `P` and the
//! certificate center are piecewise linear with slopes below `n`, so a grid
//! of spacing `h` certifies all intermediate `q` up to an extra `n h`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::construction::{
    run, ConstructionError, ConstructionResult, DirectionProxy, GrowthSequence,
};
use crate::interval::{
    ln2, ln_factorial, BigFloat, Cert, Dir, Interval, IntervalError, PrecisionPolicy,
};
use crate::minima::{
    lambda_point, sort_intervals, trajectory, volume, BodyFamily, MinimaError, Trajectory,
};
use crate::systems::{QuasiRegularSystem, SystemError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("system mesh must have gap at least log 4")]
    MeshGapTooSmall,
    #[error("construction was not built from this system's mesh")]
    ProvenanceMismatch,
    #[error("construction covers {have} points but the domain needs {need}")]
    DomainNotCovered { have: usize, need: usize },
    #[error("direction tail too wide for certification; extend the construction")]
    TailTooWide,
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Minima(#[from] MinimaError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// Outcome of a certification run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertStatus {
    Pass,
    Fail,
    Indeterminate,
}

/// One residual of the trajectory of `x_j` against its ideal piecewise
/// linear profile `X_j + n max(0, q - q_j) - q`, with the certified
/// comparison against `n log 2`.
#[derive(Clone, Debug)]
pub struct ResidualRow {
    pub point_index: usize,
    pub q: BigRational,
    pub residual: Interval,
    pub within_bound: Cert,
}

/// One multiplicative envelope row: certified containment of
/// `lambda(x_i, C_u(Q))` in `2^(+-n) (A_i / Q) max(1, Q/Q_i)^n`.
#[derive(Clone, Debug)]
pub struct EnvelopeRow {
    pub point_index: usize,
    pub q_log: BigRational,
    pub lambda: Interval,
    pub lower: Interval,
    pub upper: Interval,
    pub within: Cert,
}

/// Per-grid-point deviation data.
#[derive(Clone, Debug)]
pub struct DeviationRow {
    pub q: BigRational,
    pub interval_index: usize,
    /// `max_j |P_j(q) - center_j(q)|` (first leg).
    pub leg_center: Interval,
    /// Certificate slack (second leg).
    pub slack: Interval,
    /// Upper/lower bounds on `max_j |P_j(q) - log lambda_j(C(e^q))|`.
    pub deviation_upper: BigFloat,
    pub deviation_lower: BigFloat,
    pub leg_center_within: Cert,
}

/// Full certification report for one system and construction.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub n: usize,
    pub status: CertStatus,
    pub bound: u64,
    pub covered_range: (BigRational, BigRational),
    pub grid: Vec<BigRational>,
    pub rows: Vec<DeviationRow>,
    pub residuals: Vec<ResidualRow>,
    pub max_deviation_upper: BigFloat,
    pub max_deviation_lower: BigFloat,
    pub max_residual_upper: BigFloat,
    /// Largest gap between consecutive grid points.
    pub grid_spacing: BigRational,
    /// Slope-based sampling error `n h`.
    pub sampling_error: BigRational,
    /// First-leg analytic ceiling `n log 2`.
    pub leg_center_ceiling: Interval,
    /// Certificate-slack analytic ceiling `(n^2+n) log 2 + log(n!/2^n)`.
    pub slack_ceiling: Interval,
    /// Whole-deviation analytic ceiling (sum of the two legs).
    pub analytic_ceiling: Interval,
    /// Whether the certified max deviation sits below the analytic ceiling.
    pub below_analytic_ceiling: Cert,
    pub stages_used: usize,
    pub precision_bits: u32,
}

/// Residual table of the trajectories of `x_j` (stages `1..=K`, `K` the
/// breakpoint count) over a grid of `q >= 0` values:
/// `|L(x_j, q) - X_j - n max(0, q - q_j) + q|`, each compared to `n log 2`.
/// `trajectories[j-1]` must be the trajectory of `x_j`.
pub fn residual_table(
    trajectories: &[Trajectory],
    sys: &QuasiRegularSystem,
    grid: &[BigRational],
    bits: u32,
) -> Result<Vec<ResidualRow>, VerifyError> {
    let n = sys.n();
    let j_max = sys.breakpoints().len();
    assert!(trajectories.len() >= j_max, "need a trajectory per stage");
    let xs = sys.mesh().values();
    let qs = sys.breakpoints();
    let bound = ln2(bits).mul(&Interval::from_i64(n as i64), bits);
    let mut rows = Vec::with_capacity(j_max * grid.len());
    for j in 1..=j_max {
        let tr = &trajectories[j - 1];
        for q in grid {
            if q.is_negative() {
                continue;
            }
            let l = tr.eval_rational(q, bits);
            let kink = q - &qs[j - 1];
            let ramp = if kink.is_positive() {
                BigRational::from_integer(BigInt::from(n as u64)) * kink
            } else {
                BigRational::zero()
            };
            let ideal = &xs[j - 1] + ramp - q;
            let residual = l.sub(&Interval::from_ratio(&ideal, bits), bits).abs();
            let within_bound = residual.certainly_le(&bound);
            rows.push(ResidualRow {
                point_index: j,
                q: q.clone(),
                residual,
                within_bound,
            });
        }
    }
    Ok(rows)
}

/// Multiplicative envelope check at `Q = e^q`: certified containment of the
/// distance value in `2^(+-n) (A_i / Q) max(1, Q / Q_i)^n` where
/// `Q_i = e^(q_i)`.
pub fn lambda_envelope(
    result: &ConstructionResult,
    body: &BodyFamily,
    sys: &QuasiRegularSystem,
    q_logs: &[BigRational],
    bits: u32,
) -> Result<Vec<EnvelopeRow>, VerifyError> {
    let n = result.n();
    let j_max = sys.breakpoints().len();
    let xs = sys.mesh().values();
    let qs = sys.breakpoints();
    let mut rows = Vec::with_capacity(j_max * q_logs.len());
    for i in 1..=j_max {
        let a_i = Interval::from_ratio(&xs[i - 1], bits + 16).exp(bits);
        let q_i = Interval::from_ratio(&qs[i - 1], bits + 16).exp(bits);
        for q_log in q_logs {
            if q_log.is_negative() {
                continue;
            }
            let q_val = Interval::from_ratio(q_log, bits + 16).exp(bits);
            let lambda = lambda_point(result.point(i), body, &q_val, bits)?;
            let ratio = q_val.div(&q_i, bits)?.max(&Interval::one());
            let base = a_i
                .div(&q_val, bits)?
                .mul(&ratio.powi(n as u32, bits), bits);
            let lower = base.scale2(-(n as i64));
            let upper = base.scale2(n as i64);
            let within = match (lower.certainly_le(&lambda), lambda.certainly_le(&upper)) {
                (Cert::True, Cert::True) => Cert::True,
                (Cert::False, _) | (_, Cert::False) => Cert::False,
                _ => Cert::Unknown,
            };
            rows.push(EnvelopeRow {
                point_index: i,
                q_log: q_log.clone(),
                lambda,
                lower,
                upper,
                within,
            });
        }
    }
    Ok(rows)
}

/// Configuration of the certification grid and tolerances.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Uniform samples per breakpoint interval (besides endpoints and
    /// trajectory minima).
    pub samples_per_interval: usize,
    /// Relative width demanded of every `|x . u|` enclosure.
    pub tail_rel_target: f64,
    pub policy: PrecisionPolicy,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples_per_interval: 16,
            tail_rel_target: 1e-6,
            policy: PrecisionPolicy::default(),
        }
    }
}

/// Certification grid: all breakpoints, the trajectory minima of the
/// involved points (dyadic midpoints), and uniform samples per interval.
fn build_grid(
    sys: &QuasiRegularSystem,
    trajectories: &[Trajectory],
    samples: usize,
    bits: u32,
) -> Vec<BigRational> {
    let qs = sys.breakpoints();
    let (lo, hi) = sys.domain();
    let mut grid: Vec<BigRational> = qs.to_vec();
    for tr in trajectories {
        let q_star = tr.breakpoint_q(bits).midpoint(64).to_rational();
        if &q_star > lo && &q_star < hi {
            grid.push(q_star);
        }
    }
    let samples = samples.max(1);
    for w in qs.windows(2) {
        let step = (&w[1] - &w[0]) / BigRational::from_integer(BigInt::from(samples as u64));
        let mut q = w[0].clone();
        for _ in 1..samples {
            q += &step;
            grid.push(q.clone());
        }
    }
    grid.sort();
    grid.dedup();
    grid
}

/// Certification on a prepared construction: deviation report over the grid
/// and a pass / fail / indeterminate decision against `2 n^2` including the
/// `n h` sampling term.
pub fn certify(
    sys: &QuasiRegularSystem,
    result: &ConstructionResult,
    proxy: &DirectionProxy,
    config: &VerifyConfig,
) -> Result<VerificationReport, VerifyError> {
    let n = sys.n();
    let bits = config.policy.start_bits;
    let policy = &config.policy;

    // The construction must come from this system's mesh.
    match result.growth().mesh() {
        Some(mesh) => {
            let sys_vals = sys.mesh().values();
            if mesh.len() < sys_vals.len() || &mesh.values()[..sys_vals.len()] != sys_vals {
                return Err(VerifyError::ProvenanceMismatch);
            }
        }
        None => return Err(VerifyError::ProvenanceMismatch),
    }
    let gap_ok = policy.escalate(|b| match sys.mesh().has_mesh_at_least_log4(b) {
        Cert::True => Ok(true),
        Cert::False => Ok(false),
        Cert::Unknown => Err(IntervalError::Indeterminate { bits: b }),
    })?;
    if !gap_ok {
        return Err(VerifyError::MeshGapTooSmall);
    }

    let k = sys.breakpoints().len();
    let need_points = k + n - 2;
    if result.stage_count() < need_points {
        return Err(VerifyError::DomainNotCovered {
            have: result.stage_count(),
            need: need_points,
        });
    }

    let body = BodyFamily::from_proxy(proxy.clone());

    // Trajectories of all involved points. The width of log|x . u| equals
    // the relative width of the dot enclosure, so it doubles as the
    // tail-quality gate.
    let mut trajectories = Vec::with_capacity(need_points);
    for j in 1..=need_points {
        let tr = trajectory(result.point(j), &body, bits).map_err(|e| match e {
            MinimaError::DirectionTooCoarse => VerifyError::TailTooWide,
            other => VerifyError::Minima(other),
        })?;
        let w = tr.log_dot.width(32).to_f64_approx();
        if w.is_nan() || w > 2.0 * config.tail_rel_target {
            return Err(VerifyError::TailTooWide);
        }
        trajectories.push(tr);
    }

    let grid = build_grid(sys, &trajectories, config.samples_per_interval, bits);

    // Analytic ceilings.
    let l2 = ln2(bits);
    let leg_center_ceiling = l2.mul(&Interval::from_i64(n as i64), bits);
    let slack_ceiling = l2.mul(&Interval::from_i64((n * n + n) as i64), bits).add(
        &ln_factorial(n as u32, bits).sub(&l2.mul(&Interval::from_i64(n as i64), bits), bits),
        bits,
    );
    let analytic_ceiling = leg_center_ceiling.add(&slack_ceiling, bits);

    // Loop-invariant pieces of the slack formula.
    let ln_b_analytic = l2.mul(&Interval::from_i64((n * n + n) as i64), bits);
    let slack_prefix =
        ln_factorial(n as u32, bits).sub(&l2.mul(&Interval::from_i64(n as i64), bits), bits);

    let mut rows = Vec::with_capacity(grid.len());
    let mut max_dev_up = BigFloat::zero();
    let mut max_dev_lo = BigFloat::zero();
    for q in &grid {
        let i = sys.interval_index(q)?;
        let p = sys.evaluate_in_interval(i, q);
        let lvals: Vec<Interval> = (0..n)
            .map(|t| trajectories[i - 1 + t].eval_rational(q, bits))
            .collect();
        let center = sort_intervals(&lvals);

        // Certificate slack: log(n!) - n log 2 + min(runtime log B, analytic).
        let mut sum_l = Interval::zero();
        for l in &lvals {
            sum_l = sum_l.add(l, bits);
        }
        let q_exp = Interval::from_ratio(q, bits + 16).exp(bits);
        let (vol, _) = volume(n, &q_exp, 1e-9, bits)?;
        let ln_b_runtime = sum_l.add(&vol.ln(bits)?, bits);
        let ln_b = if ln_b_runtime.hi().cmp_val(ln_b_analytic.hi()) == std::cmp::Ordering::Less {
            ln_b_runtime
        } else {
            ln_b_analytic.clone()
        };
        let slack = slack_prefix.add(&ln_b, bits);

        // First leg and full deviation per component.
        let mut leg = Interval::zero();
        let mut dev_up = BigFloat::zero();
        let mut dev_lo = BigFloat::zero();
        for (pj, cj) in p.iter().zip(&center) {
            let pj_iv = Interval::from_ratio(pj, bits);
            let d = pj_iv.sub(cj, bits).abs();
            leg = leg.max(&d);
            // true log lambda_j lies in [c_j.lo - slack.hi, c_j.hi]
            let lu = Interval::new(
                cj.lo().sub_round(slack.hi(), bits, Dir::Down),
                cj.hi().clone(),
            )?;
            let dj = pj_iv.sub(&lu, bits).abs();
            if dj.hi().cmp_val(&dev_up) == std::cmp::Ordering::Greater {
                dev_up = dj.hi().clone();
            }
            if dj.lo().cmp_val(&dev_lo) == std::cmp::Ordering::Greater {
                dev_lo = dj.lo().clone();
            }
        }
        if dev_up.cmp_val(&max_dev_up) == std::cmp::Ordering::Greater {
            max_dev_up = dev_up.clone();
        }
        if dev_lo.cmp_val(&max_dev_lo) == std::cmp::Ordering::Greater {
            max_dev_lo = dev_lo.clone();
        }
        rows.push(DeviationRow {
            q: q.clone(),
            interval_index: i,
            leg_center_within: leg.certainly_le(&leg_center_ceiling),
            leg_center: leg,
            slack,
            deviation_upper: dev_up,
            deviation_lower: dev_lo,
        });
    }

    // Residual table over the same grid.
    let residuals = residual_table(&trajectories, sys, &grid, bits)?;
    let mut max_residual_upper = BigFloat::zero();
    for r in &residuals {
        if r.residual.hi().cmp_val(&max_residual_upper) == std::cmp::Ordering::Greater {
            max_residual_upper = r.residual.hi().clone();
        }
    }

    // Sampling term n h and the decision.
    let mut h = BigRational::zero();
    for w in grid.windows(2) {
        let gap = &w[1] - &w[0];
        if gap > h {
            h = gap;
        }
    }
    let sampling_error = BigRational::from_integer(BigInt::from(n as u64)) * &h;
    let bound = 2 * (n as u64) * (n as u64);
    let total = Interval::point(max_dev_up.clone())
        .add(&Interval::from_ratio(&sampling_error, bits), bits);
    let bound_iv = Interval::from_i64(bound as i64);
    let status = if total.certainly_lt(&bound_iv) == Cert::True {
        CertStatus::Pass
    } else if Interval::point(max_dev_lo.clone()).certainly_gt(&bound_iv) == Cert::True {
        CertStatus::Fail
    } else {
        CertStatus::Indeterminate
    };
    let below_analytic_ceiling =
        Interval::point(max_dev_up.clone()).certainly_le(&analytic_ceiling);

    let (lo, hi) = sys.domain();
    Ok(VerificationReport {
        n,
        status,
        bound,
        covered_range: (lo.clone(), hi.clone()),
        grid: grid.clone(),
        rows,
        residuals,
        max_deviation_upper: max_dev_up,
        max_deviation_lower: max_dev_lo,
        max_residual_upper,
        grid_spacing: h,
        sampling_error,
        leg_center_ceiling,
        slack_ceiling,
        analytic_ceiling,
        below_analytic_ceiling,
        stages_used: result.stage_count(),
        precision_bits: bits,
    })
}

/// Top-level driver: builds the construction for the system (stage margin
/// `(K-1) + n + 2`, extended while the direction tail is too wide), then
/// certifies. Returns the report with the construction used.
pub fn certify_system(
    sys: &QuasiRegularSystem,
    config: &VerifyConfig,
) -> Result<(VerificationReport, ConstructionResult), VerifyError> {
    let n = sys.n();
    let gap_ok = config
        .policy
        .escalate(|b| match sys.mesh().has_mesh_at_least_log4(b) {
            Cert::True => Ok(true),
            Cert::False => Ok(false),
            Cert::Unknown => Err(IntervalError::Indeterminate { bits: b }),
        })?;
    if !gap_ok {
        return Err(VerifyError::MeshGapTooSmall);
    }
    let k = sys.breakpoints().len();
    let mut m = (k - 1) + n + 2;
    let mut attempts = 0;
    loop {
        let mesh = sys.mesh().extended(m).ok_or(VerifyError::DomainNotCovered {
            have: sys.mesh().len(),
            need: m,
        })?;
        let growth = GrowthSequence::from_mesh(&mesh, &config.policy)?;
        let result = run(n, &growth, m, &config.policy)?;
        let proxy = result.direction(None)?;
        match certify(sys, &result, &proxy, config) {
            Ok(report) => return Ok((report, result)),
            Err(VerifyError::TailTooWide) if attempts < 8 => {
                attempts += 1;
                m += 2;
            }
            Err(e) => return Err(e),
        }
    }
}

// ---------------------------------------------------------------------------
// serializable records (decimal strings only)
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct ReportRecord {
    pub schema: u32,
    pub n: usize,
    pub status: CertStatus,
    pub bound: u64,
    pub covered_range: [String; 2],
    pub max_deviation_upper: String,
    pub max_deviation_lower: String,
    pub max_residual_upper: String,
    pub residual_bound: [String; 2],
    pub grid_points: usize,
    pub grid_spacing: String,
    pub sampling_error: String,
    pub leg_center_ceiling: [String; 2],
    pub slack_ceiling: [String; 2],
    pub analytic_ceiling: [String; 2],
    pub below_analytic_ceiling: String,
    pub stages_used: usize,
    pub precision_bits: u32,
    pub rows: Vec<ReportRowRecord>,
    pub residual_rows: Vec<ResidualRowRecord>,
}

#[derive(Debug, Serialize)]
pub struct ReportRowRecord {
    pub q: String,
    pub interval_index: usize,
    pub leg_center: [String; 2],
    pub slack: [String; 2],
    pub deviation_upper: String,
    pub deviation_lower: String,
}

#[derive(Debug, Serialize)]
pub struct ResidualRowRecord {
    pub point_index: usize,
    pub q: String,
    pub residual: [String; 2],
    pub within_bound: String,
}

fn cert_str(c: Cert) -> String {
    match c {
        Cert::True => "true".into(),
        Cert::False => "false".into(),
        Cert::Unknown => "indeterminate".into(),
    }
}

fn pair(iv: &Interval, digits: u32) -> [String; 2] {
    let (lo, hi) = iv.to_decimal_pair(digits);
    [lo, hi]
}

impl VerificationReport {
    /// Plain-data record with every numeric value rendered as a decimal
    /// string (36 significant digits, outward for interval endpoints).
    pub fn to_record(&self) -> ReportRecord {
        let digits = 36;
        let bits = self.precision_bits;
        let nl2 = ln2(bits).mul(&Interval::from_i64(self.n as i64), bits);
        ReportRecord {
            schema: 1,
            n: self.n,
            status: self.status,
            bound: self.bound,
            covered_range: [
                crate::rational::format_exact(&self.covered_range.0),
                crate::rational::format_exact(&self.covered_range.1),
            ],
            max_deviation_upper: self.max_deviation_upper.to_decimal(digits, Dir::Up),
            max_deviation_lower: self.max_deviation_lower.to_decimal(digits, Dir::Down),
            max_residual_upper: self.max_residual_upper.to_decimal(digits, Dir::Up),
            residual_bound: pair(&nl2, digits),
            grid_points: self.grid.len(),
            grid_spacing: crate::rational::format_exact(&self.grid_spacing),
            sampling_error: crate::rational::format_exact(&self.sampling_error),
            leg_center_ceiling: pair(&self.leg_center_ceiling, digits),
            slack_ceiling: pair(&self.slack_ceiling, digits),
            analytic_ceiling: pair(&self.analytic_ceiling, digits),
            below_analytic_ceiling: cert_str(self.below_analytic_ceiling),
            stages_used: self.stages_used,
            precision_bits: self.precision_bits,
            rows: self
                .rows
                .iter()
                .map(|r| ReportRowRecord {
                    q: crate::rational::format_exact(&r.q),
                    interval_index: r.interval_index,
                    leg_center: pair(&r.leg_center, digits),
                    slack: pair(&r.slack, digits),
                    deviation_upper: r.deviation_upper.to_decimal(digits, Dir::Up),
                    deviation_lower: r.deviation_lower.to_decimal(digits, Dir::Down),
                })
                .collect(),
            residual_rows: self
                .residuals
                .iter()
                .map(|r| ResidualRowRecord {
                    point_index: r.point_index,
                    q: crate::rational::format_exact(&r.q),
                    residual: pair(&r.residual, digits),
                    within_bound: cert_str(r.within_bound),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::MeshSequence;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn small_system(n: usize, count: usize) -> QuasiRegularSystem {
        let mesh = MeshSequence::regular(ratio(2, 1), ratio(2, 1), count).unwrap();
        QuasiRegularSystem::new(mesh, n).unwrap()
    }

    #[test]
    fn certify_small_two_dim() {
        let sys = small_system(2, 5);
        let config = VerifyConfig {
            samples_per_interval: 8,
            ..VerifyConfig::default()
        };
        let (report, result) = certify_system(&sys, &config).unwrap();
        assert_eq!(report.n, 2);
        assert_eq!(report.bound, 8);
        assert_eq!(result.stage_count(), 7);
        for r in &report.residuals {
            assert_eq!(r.within_bound, Cert::True, "residual at q={}", r.q);
        }
        for row in &report.rows {
            assert_eq!(row.leg_center_within, Cert::True, "leg at q={}", row.q);
        }
        assert!(report.max_deviation_upper.to_f64_approx() < 8.0);
        assert_eq!(report.below_analytic_ceiling, Cert::True);
    }

    #[test]
    fn pass_requires_fine_grid() {
        // With few samples the n h term dominates and the status degrades to
        // indeterminate, never to a spurious fail.
        let sys = small_system(2, 6);
        let coarse = VerifyConfig {
            samples_per_interval: 1,
            ..VerifyConfig::default()
        };
        let (report, _) = certify_system(&sys, &coarse).unwrap();
        assert_ne!(report.status, CertStatus::Fail);

        let fine = VerifyConfig {
            samples_per_interval: 64,
            ..VerifyConfig::default()
        };
        let (report, _) = certify_system(&sys, &fine).unwrap();
        assert_eq!(report.status, CertStatus::Pass);
    }

    #[test]
    fn provenance_checked() {
        let sys = small_system(2, 5);
        let other = MeshSequence::regular(ratio(3, 1), ratio(2, 1), 10).unwrap();
        let policy = PrecisionPolicy::default();
        let growth = GrowthSequence::from_mesh(&other, &policy).unwrap();
        let result = run(2, &growth, 8, &policy).unwrap();
        let proxy = result.direction(None).unwrap();
        let err = certify(&sys, &result, &proxy, &VerifyConfig::default());
        assert!(matches!(err, Err(VerifyError::ProvenanceMismatch)));
    }

    #[test]
    fn envelope_rows_certify() {
        let sys = small_system(2, 5);
        let config = VerifyConfig {
            samples_per_interval: 4,
            ..VerifyConfig::default()
        };
        let (_, result) = certify_system(&sys, &config).unwrap();
        let proxy = result.direction(None).unwrap();
        let body = BodyFamily::from_proxy(proxy);
        let q_logs = vec![ratio(0, 1), ratio(2, 1), ratio(5, 1), ratio(9, 1)];
        let rows = lambda_envelope(&result, &body, &sys, &q_logs, 192).unwrap();
        assert!(!rows.is_empty());
        for row in &rows {
            assert_eq!(row.within, Cert::True, "i={} q={}", row.point_index, row.q_log);
        }
    }

    #[test]
    fn report_record_serializes() {
        let sys = small_system(2, 4);
        let config = VerifyConfig {
            samples_per_interval: 2,
            ..VerifyConfig::default()
        };
        let (report, _) = certify_system(&sys, &config).unwrap();
        let rec = report.to_record();
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.contains("\"schema\":1"));
        assert!(json.contains("max_deviation_upper"));
    }
}
