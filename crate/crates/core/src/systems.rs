//! Quasi-regular (n,0)-systems: mesh sequences, breakpoints, exact piecewise
//! linear evaluation and combined-graph extraction.
//!
//! A mesh sequence is a strictly increasing list of positive rationals
//! `X_1 < X_2 < ..`; the induced system `P` is evaluated exactly over the
//! rationals on its truncated domain `[q_1, q_{N-n+1}]`, where
//! `q_i = (X_i + .. + X_{i+n-1}) / n`. Above each `[q_i, q_{i+1}]` the
//! combined graph is one segment of slope `n-1` from the lowest point on the
//! left to the highest point on the right, plus `n-1` segments of slope `-1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::interval::{Cert, Interval, ln4};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("mesh values must be strictly increasing and positive")]
    InvalidMesh,
    #[error("regular spec requires x1 > 0 and rho > 1")]
    InvalidRegularSpec,
    #[error("need at least {need} mesh values, got {got}")]
    TooFewValues { need: usize, got: usize },
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("q = {q} outside the truncated domain [{lo}, {hi}]")]
    OutsideDomain { q: String, lo: String, hi: String },
    #[error("interval index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
}

/// Optional generator behind a mesh: geometric `X_{i+1} = rho X_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularSpec {
    pub x1: BigRational,
    pub rho: BigRational,
}

/// Finite prefix of an unbounded strictly increasing sequence of positive
/// rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeshSequence {
    values: Vec<BigRational>,
    generator: Option<RegularSpec>,
}

impl MeshSequence {
    pub fn explicit(values: Vec<BigRational>) -> Result<Self, SystemError> {
        if values.is_empty() || !values[0].is_positive() {
            return Err(SystemError::InvalidMesh);
        }
        for w in values.windows(2) {
            if w[1] <= w[0] {
                return Err(SystemError::InvalidMesh);
            }
        }
        Ok(MeshSequence {
            values,
            generator: None,
        })
    }

    /// Geometric mesh `x1, x1*rho, .., x1*rho^(count-1)`, exactly.
    pub fn regular(x1: BigRational, rho: BigRational, count: usize) -> Result<Self, SystemError> {
        if !x1.is_positive() || rho <= BigRational::one() {
            return Err(SystemError::InvalidRegularSpec);
        }
        if count == 0 {
            return Err(SystemError::InvalidMesh);
        }
        let mut values = Vec::with_capacity(count);
        let mut cur = x1.clone();
        for _ in 0..count {
            values.push(cur.clone());
            cur *= &rho;
        }
        Ok(MeshSequence {
            values,
            generator: Some(RegularSpec { x1, rho }),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &BigRational {
        &self.values[i - 1]
    }

    pub fn generator(&self) -> Option<&RegularSpec> {
        self.generator.as_ref()
    }

    /// Returns a longer prefix of the same sequence when a generator is
    /// known; `None` for explicit meshes that cannot be extended.
    pub fn extended(&self, count: usize) -> Option<MeshSequence> {
        if count <= self.len() {
            return Some(self.clone());
        }
        let spec = self.generator.as_ref()?;
        Some(MeshSequence::regular(spec.x1.clone(), spec.rho.clone(), count).expect("valid spec"))
    }

    /// Minimum gap `X_{i+1} - X_i` over the stored prefix.
    pub fn mesh_gap(&self) -> Option<BigRational> {
        self.values
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .min()
    }

    /// Exact-vs-interval comparison of the mesh gap against a threshold
    /// interval (outward rounded). `Unknown` when the gap falls inside the
    /// threshold enclosure.
    pub fn has_mesh_at_least(&self, threshold: &Interval, bits: u32) -> Cert {
        let gap = match self.mesh_gap() {
            Some(g) => g,
            None => return Cert::Unknown, // single value: no gap information
        };
        // For a geometric mesh the gaps grow, so the prefix minimum is the
        // true infimum; for explicit prefixes this checks the prefix only.
        let g = Interval::from_ratio(&gap, bits);
        match g.certainly_ge(threshold) {
            Cert::True => Cert::True,
            Cert::False => Cert::False,
            Cert::Unknown => {
                if g.certainly_lt(threshold) == Cert::True {
                    Cert::False
                } else {
                    Cert::Unknown
                }
            }
        }
    }

    /// Convenience: mesh gap against log 4.
    pub fn has_mesh_at_least_log4(&self, bits: u32) -> Cert {
        self.has_mesh_at_least(&ln4(bits), bits)
    }

    /// Exact ratio test: returns rho when `X_{i+1} = rho X_i` for every
    /// stored pair, `None` otherwise (including too-short sequences).
    pub fn is_regular(&self) -> Option<BigRational> {
        if self.len() < 2 {
            return None;
        }
        let rho = &self.values[1] / &self.values[0];
        for w in self.values.windows(2) {
            if &w[1] / &w[0] != rho {
                return None;
            }
        }
        Some(rho)
    }
}

/// Sorts the coordinates of a point into monotone increasing order (the map
/// into the cone of nondecreasing tuples). Stable, so ties keep input order.
pub fn phi_sort<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    let mut out = v.to_vec();
    out.sort();
    out
}

/// Breakpoints `q_i = (X_i + .. + X_{i+n-1}) / n`, exact and strictly
/// increasing.
pub fn breakpoints(mesh: &MeshSequence, n: usize) -> Result<Vec<BigRational>, SystemError> {
    if n < 2 {
        return Err(SystemError::DimensionTooSmall(n));
    }
    if mesh.len() < n {
        return Err(SystemError::TooFewValues {
            need: n,
            got: mesh.len(),
        });
    }
    let nn = BigRational::from_integer(BigInt::from(n as u64));
    let vals = mesh.values();
    let mut out = Vec::with_capacity(mesh.len() - n + 1);
    let mut window_sum: BigRational = vals[..n].iter().sum();
    out.push(&window_sum / &nn);
    for i in n..vals.len() {
        window_sum += &vals[i] - &vals[i - n];
        out.push(&window_sum / &nn);
    }
    Ok(out)
}

/// One line segment of the combined graph, with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSegment {
    /// Component the segment belongs to at the right endpoint (1-based).
    pub component_index: usize,
    pub q_start: BigRational,
    pub y_start: BigRational,
    pub q_end: BigRational,
    pub y_end: BigRational,
    /// Either -1 or n-1.
    pub slope: i64,
}

impl GraphSegment {
    /// Exact slope identity `slope * (q_end - q_start) = y_end - y_start`.
    pub fn slope_consistent(&self) -> bool {
        let ds = &self.q_end - &self.q_start;
        let dy = &self.y_end - &self.y_start;
        BigRational::from_integer(BigInt::from(self.slope)) * ds == dy
    }
}

/// A quasi-regular (n,0)-system over the truncated domain of its mesh.
#[derive(Clone, Debug)]
pub struct QuasiRegularSystem {
    n: usize,
    mesh: MeshSequence,
    breakpoints: Vec<BigRational>,
}

impl QuasiRegularSystem {
    pub fn new(mesh: MeshSequence, n: usize) -> Result<Self, SystemError> {
        let breakpoints = breakpoints(&mesh, n)?;
        Ok(QuasiRegularSystem {
            n,
            mesh,
            breakpoints,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mesh(&self) -> &MeshSequence {
        &self.mesh
    }

    pub fn breakpoints(&self) -> &[BigRational] {
        &self.breakpoints
    }

    /// Truncated evaluation domain `[q_1, q_{N-n+1}]`.
    pub fn domain(&self) -> (&BigRational, &BigRational) {
        (
            self.breakpoints.first().expect("nonempty"),
            self.breakpoints.last().expect("nonempty"),
        )
    }

    /// Index `i` with `q_i <= q <= q_{i+1}` (1-based), by binary search.
    /// The last breakpoint maps to the final interval.
    pub fn interval_index(&self, q: &BigRational) -> Result<usize, SystemError> {
        let (lo, hi) = self.domain();
        if q < lo || q > hi {
            return Err(SystemError::OutsideDomain {
                q: q.to_string(),
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        let pos = self.breakpoints.partition_point(|b| b <= q);
        Ok(pos.min(self.breakpoints.len() - 1))
    }

    /// Exact evaluation `P(q)` as a sorted rational n-tuple.
    pub fn evaluate(&self, q: &BigRational) -> Result<Vec<BigRational>, SystemError> {
        let i = self.interval_index(q)?;
        Ok(self.evaluate_in_interval(i, q))
    }

    /// Evaluation through the formula of a specific interval; exposed so the
    /// breakpoint-continuity property can be asserted exactly.
    pub fn evaluate_in_interval(&self, i: usize, q: &BigRational) -> Vec<BigRational> {
        let n = self.n;
        let qi = &self.breakpoints[i - 1];
        let xs = self.mesh.values();
        let nn = BigRational::from_integer(BigInt::from(n as u64));
        let mut comps = Vec::with_capacity(n);
        // rising component: X_i + n (q - q_i) - q
        comps.push(&xs[i - 1] + &nn * (q - qi) - q);
        for j in 1..n {
            comps.push(&xs[i - 1 + j] - q);
        }
        phi_sort(&comps)
    }

    /// Combined graph above the intervals `[q_i, q_{i+1}]` for `i` in
    /// `i_range` (1-based, inclusive). Per interval: one slope-(n-1) segment
    /// from the lowest left point to the highest right point, then the n-1
    /// slope-(-1) segments.
    pub fn combined_graph(
        &self,
        i_from: usize,
        i_to: usize,
    ) -> Result<Vec<GraphSegment>, SystemError> {
        let max = self.breakpoints.len() - 1;
        if i_from == 0 || i_from > i_to || i_to > max {
            return Err(SystemError::IndexOutOfRange {
                index: if i_from == 0 { 0 } else { i_to },
                max,
            });
        }
        let n = self.n;
        let mut out = Vec::with_capacity((i_to - i_from + 1) * n);
        for i in i_from..=i_to {
            let qa = self.breakpoints[i - 1].clone();
            let qb = self.breakpoints[i].clone();
            let pa = self.evaluate_in_interval(i, &qa);
            let pb = self.evaluate_in_interval(i, &qb);
            out.push(GraphSegment {
                component_index: n,
                q_start: qa.clone(),
                y_start: pa[0].clone(),
                q_end: qb.clone(),
                y_end: pb[n - 1].clone(),
                slope: n as i64 - 1,
            });
            for j in 1..n {
                out.push(GraphSegment {
                    component_index: j,
                    q_start: qa.clone(),
                    y_start: pa[j].clone(),
                    q_end: qb.clone(),
                    y_end: pb[j - 1].clone(),
                    slope: -1,
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_decimal;
    use num_traits::Zero;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn mesh(vals: &[i64]) -> MeshSequence {
        MeshSequence::explicit(vals.iter().map(|&v| ratio(v, 1)).collect()).unwrap()
    }

    #[test]
    fn breakpoints_examples() {
        let m = mesh(&[2, 4, 8, 16, 32]);
        let q = breakpoints(&m, 3).unwrap();
        assert_eq!(q, vec![ratio(14, 3), ratio(28, 3), ratio(56, 3)]);

        let m = mesh(&[1, 2, 3]);
        let q = breakpoints(&m, 2).unwrap();
        assert_eq!(q, vec![ratio(3, 2), ratio(5, 2)]);

        let m = mesh(&[3, 7]);
        let q = breakpoints(&m, 2).unwrap();
        assert_eq!(q, vec![ratio(5, 1)]);

        assert!(matches!(
            breakpoints(&mesh(&[1, 2]), 3),
            Err(SystemError::TooFewValues { .. })
        ));
    }

    #[test]
    fn phi_sort_examples() {
        assert_eq!(phi_sort(&[3, 1, 2]), vec![1, 2, 3]);
        assert_eq!(phi_sort(&[0, 0]), vec![0, 0]);
        assert_eq!(phi_sort(&[-1, 5, -3, 2]), vec![-3, -1, 2, 5]);
    }

    #[test]
    fn evaluate_examples() {
        let sys = QuasiRegularSystem::new(mesh(&[2, 4, 8, 16, 32]), 3).unwrap();
        // at the first breakpoint: (X_i - q_i, ..)
        let p = sys.evaluate(&ratio(14, 3)).unwrap();
        assert_eq!(p, vec![ratio(-8, 3), ratio(-2, 3), ratio(10, 3)]);
        // interior point q = 6
        let p = sys.evaluate(&ratio(6, 1)).unwrap();
        assert_eq!(p, vec![ratio(-2, 1), ratio(0, 1), ratio(2, 1)]);
        // zero-sum
        let s: BigRational = p.iter().sum();
        assert!(s.is_zero());
        // outside the domain
        assert!(sys.evaluate(&ratio(1, 1)).is_err());
        assert!(sys.evaluate(&ratio(100, 1)).is_err());
    }

    #[test]
    fn continuity_at_breakpoints() {
        let sys = QuasiRegularSystem::new(mesh(&[2, 4, 8, 16, 32]), 3).unwrap();
        let q2 = sys.breakpoints()[1].clone();
        let via_first = sys.evaluate_in_interval(1, &q2);
        let via_second = sys.evaluate_in_interval(2, &q2);
        assert_eq!(via_first, via_second);
    }

    #[test]
    fn mesh_gap_and_log4() {
        let m = mesh(&[2, 4, 8, 16]);
        assert_eq!(m.mesh_gap().unwrap(), ratio(2, 1));
        assert_eq!(m.has_mesh_at_least_log4(96), Cert::True);

        let m = mesh(&[1, 2, 4]);
        assert_eq!(m.mesh_gap().unwrap(), ratio(1, 1));
        assert_eq!(m.has_mesh_at_least_log4(96), Cert::False);

        let m = MeshSequence::explicit(vec![parse_decimal("0.5").unwrap(), ratio(3, 1)]).unwrap();
        assert_eq!(m.mesh_gap().unwrap(), ratio(5, 2));
    }

    #[test]
    fn regularity_detection() {
        assert_eq!(mesh(&[2, 4, 8, 16]).is_regular(), Some(ratio(2, 1)));
        assert_eq!(mesh(&[2, 4, 9]).is_regular(), None);
        let single = MeshSequence::explicit(vec![ratio(3, 1)]).unwrap();
        assert_eq!(single.is_regular(), None);
    }

    #[test]
    fn regular_generator_and_extension() {
        let m = MeshSequence::regular(ratio(2, 1), ratio(2, 1), 5).unwrap();
        assert_eq!(m.values()[4], ratio(32, 1));
        let ext = m.extended(8).unwrap();
        assert_eq!(ext.values()[7], ratio(256, 1));
        assert_eq!(&ext.values()[..5], m.values());
        assert!(mesh(&[1, 5, 9]).extended(4).is_none());
        assert!(MeshSequence::regular(ratio(2, 1), ratio(1, 1), 5).is_err());
        assert!(MeshSequence::regular(ratio(-1, 1), ratio(2, 1), 5).is_err());
    }

    #[test]
    fn invalid_meshes_rejected() {
        assert!(MeshSequence::explicit(vec![ratio(0, 1), ratio(1, 1)]).is_err());
        assert!(MeshSequence::explicit(vec![ratio(2, 1), ratio(2, 1)]).is_err());
        assert!(MeshSequence::explicit(vec![ratio(3, 1), ratio(1, 1)]).is_err());
    }

    mod properties {
        use super::*;
        use num_traits::Zero;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn zero_sum_and_sorted(
                n in 2usize..=5,
                increments in proptest::collection::vec((1i64..=40, 1i64..=6), 7),
                t in 0u32..=1000,
            ) {
                let mut values = Vec::new();
                let mut cur = BigRational::new(BigInt::from(increments[0].0), BigInt::from(increments[0].1));
                for (a, b) in &increments {
                    values.push(cur.clone());
                    cur += BigRational::new(BigInt::from(*a), BigInt::from(*b));
                }
                prop_assume!(values.len() >= n);
                let mesh = MeshSequence::explicit(values).unwrap();
                let sys = QuasiRegularSystem::new(mesh, n).unwrap();
                let (lo, hi) = sys.domain();
                let q = lo + (hi - lo) * BigRational::new(BigInt::from(t), BigInt::from(1000u32));
                let p = sys.evaluate(&q).unwrap();
                let sum: BigRational = p.iter().sum();
                prop_assert!(sum.is_zero());
                for w in p.windows(2) {
                    prop_assert!(w[0] <= w[1]);
                }
            }

            #[test]
            fn phi_sort_is_sorted_permutation(v in proptest::collection::vec(-100i64..100, 1..8)) {
                let sorted = phi_sort(&v);
                let mut expect = v.clone();
                expect.sort();
                prop_assert_eq!(sorted, expect);
            }
        }
    }

    #[test]
    fn combined_graph_two_dim() {
        let sys = QuasiRegularSystem::new(mesh(&[1, 3, 9]), 2).unwrap();
        // interval [2, 6]: rising (2,-1) -> (6,3); falling (2,1) -> (6,-3)
        let segs = sys.combined_graph(1, 1).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].slope, 1);
        assert_eq!(segs[0].q_start, ratio(2, 1));
        assert_eq!(segs[0].y_start, ratio(-1, 1));
        assert_eq!(segs[0].q_end, ratio(6, 1));
        assert_eq!(segs[0].y_end, ratio(3, 1));
        assert_eq!(segs[1].slope, -1);
        assert_eq!(segs[1].y_start, ratio(1, 1));
        assert_eq!(segs[1].y_end, ratio(-3, 1));
        for s in &segs {
            assert!(s.slope_consistent());
        }
    }

    #[test]
    fn combined_graph_three_dim_slopes() {
        let sys = QuasiRegularSystem::new(mesh(&[2, 4, 8, 16, 32]), 3).unwrap();
        let segs = sys.combined_graph(1, 1).unwrap();
        let slopes: Vec<i64> = segs.iter().map(|s| s.slope).collect();
        assert_eq!(slopes, vec![2, -1, -1]);
        // endpoints reproduce evaluate at both ends
        let qa = sys.breakpoints()[0].clone();
        let qb = sys.breakpoints()[1].clone();
        let pa = sys.evaluate(&qa).unwrap();
        let pb = sys.evaluate(&qb).unwrap();
        assert_eq!(segs[0].y_start, pa[0]);
        assert_eq!(segs[0].y_end, pb[2]);
        assert!(sys.combined_graph(1, 5).is_err());
        assert!(sys.combined_graph(0, 1).is_err());
    }
}
