//! Exact exterior algebra over integer vectors: wedge products, generalized
//! cross products, determinants, projective distances, almost orthogonality,
//! primitivity and subspace heights.
//!
//! Everything that the downstream construction relies on as an identity
//! (unimodularity, dual pairings, wedge-norm equalities) is computed over
//! arbitrary-precision integers; only the distances and heights themselves
//! are returned as enclosing intervals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::interval::{sqrt_ratio, Cert, Interval, IntervalError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("vector dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grade {grade} exceeds dimension {dim}")]
    GradeTooLarge { grade: usize, dim: usize },
    #[error("expected {expected} vectors, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("zero vector not allowed here")]
    ZeroVector,
    #[error("vectors are linearly dependent")]
    DependentBasis,
    #[error("target does not lie in the span of the basis")]
    NotInSpan,
    #[error("normal vector is not primitive (gcd {0})")]
    NotPrimitive(BigInt),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// Integer coordinate vector of R^n, n >= 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntVector {
    coords: Vec<BigInt>,
}

impl IntVector {
    pub fn new(coords: Vec<BigInt>) -> Result<Self, LinalgError> {
        if coords.len() < 2 {
            return Err(LinalgError::DimensionTooSmall(coords.len()));
        }
        Ok(IntVector { coords })
    }

    pub fn from_i64(coords: &[i64]) -> Result<Self, LinalgError> {
        Self::new(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zeros(dim: usize) -> Result<Self, LinalgError> {
        Self::new(vec![BigInt::zero(); dim])
    }

    /// Canonical basis vector e_i (1-based index).
    pub fn unit(dim: usize, i: usize) -> Result<Self, LinalgError> {
        let mut v = vec![BigInt::zero(); dim];
        assert!(i >= 1 && i <= dim, "unit index out of range");
        v[i - 1] = BigInt::one();
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn dot(&self, other: &IntVector) -> Result<BigInt, LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Exact squared Euclidean norm.
    pub fn norm_sq(&self) -> BigInt {
        self.coords.iter().map(|c| c * c).sum()
    }

    /// Interval enclosure of the Euclidean norm.
    pub fn norm(&self, bits: u32) -> Interval {
        Interval::from_int(&self.norm_sq()).sqrt(bits)
    }

    pub fn neg(&self) -> Self {
        IntVector {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, other: &IntVector) -> Result<Self, LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(IntVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scaled(&self, k: &BigInt) -> Self {
        IntVector {
            coords: self.coords.iter().map(|c| c * k).collect(),
        }
    }
}

impl std::fmt::Display for IntVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Strictly increasing k-subsets of {0, .., n-1} in lexicographic order.
pub fn index_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Grade-k element of the exterior algebra over Z^n, stored on the
/// lexicographic basis of strictly increasing index tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multivector {
    dim: usize,
    grade: usize,
    coords: Vec<BigInt>,
}

impl Multivector {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn norm_sq(&self) -> BigInt {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self, bits: u32) -> Interval {
        Interval::from_int(&self.norm_sq()).sqrt(bits)
    }

    /// gcd of all coordinates (zero for the zero multivector).
    pub fn coord_gcd(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coords {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }
}

/// Exact determinant of the k x k minor of `vs` (rows) on columns `cols`.
fn minor_det(vs: &[&IntVector], cols: &[usize]) -> BigInt {
    let k = vs.len();
    debug_assert_eq!(cols.len(), k);
    let mat: Vec<Vec<BigInt>> = vs
        .iter()
        .map(|v| cols.iter().map(|&c| v.coords[c].clone()).collect())
        .collect();
    bareiss_det(mat)
}

/// Fraction-free Bareiss determinant; exact over BigInt.
fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            // find a pivot row below
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
                m[i][j] = &t / &prev; // exact division in Bareiss
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

fn check_same_dim(vs: &[&IntVector]) -> Result<usize, LinalgError> {
    let dim = vs.first().map(|v| v.dim()).unwrap_or(0);
    for v in vs {
        if v.dim() != dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
    }
    Ok(dim)
}

/// Wedge product of 1 <= k <= n integer vectors: the vector of k x k
/// cofactor minors on the lexicographic basis. Zero iff the input is
/// linearly dependent.
pub fn wedge(vs: &[&IntVector]) -> Result<Multivector, LinalgError> {
    let k = vs.len();
    if k == 0 {
        return Err(LinalgError::WrongCount {
            expected: 1,
            got: 0,
        });
    }
    let dim = check_same_dim(vs)?;
    if k > dim {
        return Err(LinalgError::GradeTooLarge { grade: k, dim });
    }
    let coords = index_tuples(dim, k)
        .iter()
        .map(|cols| minor_det(vs, cols))
        .collect();
    Ok(Multivector {
        dim,
        grade: k,
        coords,
    })
}

/// Generalized cross product of n-1 vectors of R^n: the integer vector `w`
/// with `x . w = det(x, v_1, .., v_{n-1})` for every `x`. Its squared norm
/// equals the squared norm of the wedge of the inputs, and it vanishes iff
/// the inputs are dependent.
pub fn generalized_cross(vs: &[&IntVector]) -> Result<IntVector, LinalgError> {
    let dim = check_same_dim(vs)?;
    if vs.len() + 1 != dim {
        return Err(LinalgError::WrongCount {
            expected: dim.saturating_sub(1),
            got: vs.len(),
        });
    }
    let mut coords = Vec::with_capacity(dim);
    for j in 0..dim {
        let cols: Vec<usize> = (0..dim).filter(|&c| c != j).collect();
        let d = minor_det(vs, &cols);
        coords.push(if j % 2 == 0 { d } else { -d });
    }
    IntVector::new(coords)
}

/// Exact determinant of n vectors of R^n (as rows).
pub fn determinant(vs: &[&IntVector]) -> Result<BigInt, LinalgError> {
    let dim = check_same_dim(vs)?;
    if vs.len() != dim {
        return Err(LinalgError::WrongCount {
            expected: dim,
            got: vs.len(),
        });
    }
    let mat: Vec<Vec<BigInt>> = vs.iter().map(|v| v.coords.to_vec()).collect();
    Ok(bareiss_det(mat))
}

/// Exact squared projective distance `|x ^ y|^2 / (|x|^2 |y|^2)`.
pub fn proj_dist_sq(x: &IntVector, y: &IntVector) -> Result<BigRational, LinalgError> {
    if x.is_zero() || y.is_zero() {
        return Err(LinalgError::ZeroVector);
    }
    let w = wedge(&[x, y])?;
    Ok(BigRational::new(w.norm_sq(), x.norm_sq() * y.norm_sq()))
}

/// Projective distance `|x ^ y| / (|x| |y|)`, the sine of the angle between
/// the lines spanned by x and y. Exactly zero when the wedge vanishes.
pub fn proj_dist(x: &IntVector, y: &IntVector, bits: u32) -> Result<Interval, LinalgError> {
    if x.is_zero() || y.is_zero() {
        return Err(LinalgError::ZeroVector);
    }
    let w = wedge(&[x, y])?;
    Ok(sqrt_ratio(&w.norm_sq(), &(x.norm_sq() * y.norm_sq()), bits))
}

/// Nonzero subspace of R^n spanned by an independent integer basis, with its
/// cached wedge and exact squared height.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: Vec<IntVector>,
    wedge: Multivector,
    height_sq: BigInt,
}

impl Subspace {
    pub fn new(basis: Vec<IntVector>) -> Result<Self, LinalgError> {
        let refs: Vec<&IntVector> = basis.iter().collect();
        let dim = check_same_dim(&refs)?;
        if basis.len() >= dim {
            return Err(LinalgError::GradeTooLarge {
                grade: basis.len(),
                dim,
            });
        }
        let w = wedge(&refs)?;
        if w.is_zero() {
            return Err(LinalgError::DependentBasis);
        }
        let height_sq = w.norm_sq();
        Ok(Subspace {
            basis,
            wedge: w,
            height_sq,
        })
    }

    pub fn basis(&self) -> &[IntVector] {
        &self.basis
    }

    pub fn wedge(&self) -> &Multivector {
        &self.wedge
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis[0].dim()
    }

    /// Exact squared height. Equals H(U)^2 when the basis is primitive;
    /// otherwise a square multiple of it.
    pub fn height_sq(&self) -> &BigInt {
        &self.height_sq
    }

    /// Interval enclosure of the height, plus a primitivity report.
    pub fn height(&self, bits: u32) -> (Interval, bool) {
        let h = Interval::from_int(&self.height_sq).sqrt(bits);
        (h, self.is_primitive())
    }

    pub fn is_primitive(&self) -> bool {
        self.wedge.coord_gcd().is_one()
    }
}

/// Exact squared distance from `x` to the subspace `U`:
/// `|x ^ b_1 ^ .. ^ b_k|^2 / (|x|^2 |b_1 ^ .. ^ b_k|^2)`.
pub fn dist_to_subspace_sq(x: &IntVector, u: &Subspace) -> Result<BigRational, LinalgError> {
    if x.is_zero() {
        return Err(LinalgError::ZeroVector);
    }
    if x.dim() != u.ambient_dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: u.ambient_dim(),
            got: x.dim(),
        });
    }
    let mut vs: Vec<&IntVector> = vec![x];
    vs.extend(u.basis().iter());
    let top = wedge(&vs)?;
    Ok(BigRational::new(
        top.norm_sq(),
        x.norm_sq() * u.height_sq(),
    ))
}

/// Distance from `x` to `U` as an interval; exactly zero for `x` in `U`.
pub fn dist_to_subspace(x: &IntVector, u: &Subspace, bits: u32) -> Result<Interval, LinalgError> {
    if x.is_zero() {
        return Err(LinalgError::ZeroVector);
    }
    if x.dim() != u.ambient_dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: u.ambient_dim(),
            got: x.dim(),
        });
    }
    let mut vs: Vec<&IntVector> = vec![x];
    vs.extend(u.basis().iter());
    let top = wedge(&vs)?;
    Ok(sqrt_ratio(
        &top.norm_sq(),
        &(x.norm_sq() * u.height_sq()),
        bits,
    ))
}

/// Almost-orthogonality test: each vector at projective distance >= 1/2 from
/// the span of its predecessors. The decision is exact (squared integer
/// comparison); the returned witnesses are interval enclosures of the
/// distances. A dependent tuple is reported as not almost orthogonal with a
/// zero witness at the offending position.
pub fn is_almost_orthogonal(
    vs: &[&IntVector],
    bits: u32,
) -> Result<(bool, Vec<Interval>), LinalgError> {
    let dim = check_same_dim(vs)?;
    if vs.is_empty() || vs.len() > dim {
        return Err(LinalgError::WrongCount {
            expected: dim,
            got: vs.len(),
        });
    }
    if vs[0].is_zero() {
        return Ok((false, vec![Interval::zero()]));
    }
    let mut ok = true;
    let mut witnesses = Vec::with_capacity(vs.len().saturating_sub(1));
    let mut prev_norm_sq = vs[0].norm_sq();
    for j in 1..vs.len() {
        let cur = wedge(&vs[..=j])?;
        let cur_norm_sq = cur.norm_sq();
        // dist^2 = |W_j|^2 / (|W_{j-1}|^2 |x_j|^2) >= 1/4
        let lhs = BigInt::from(4u32) * &cur_norm_sq;
        let rhs = &prev_norm_sq * vs[j].norm_sq();
        if lhs < rhs {
            ok = false;
        }
        if cur_norm_sq.is_zero() {
            witnesses.push(Interval::zero());
            ok = false;
        } else {
            witnesses.push(sqrt_ratio(&cur_norm_sq, &rhs, bits));
        }
        prev_norm_sq = cur_norm_sq;
        if prev_norm_sq.is_zero() {
            break;
        }
    }
    Ok((ok, witnesses))
}

/// True iff the wedge of the tuple has coprime coordinates, equivalently the
/// tuple extends to a basis of Z^n.
pub fn is_primitive_tuple(vs: &[&IntVector]) -> Result<bool, LinalgError> {
    let w = wedge(vs)?;
    if w.is_zero() {
        return Err(LinalgError::DependentBasis);
    }
    Ok(w.coord_gcd().is_one())
}

/// Integer point `z` with `z . w = 1` for a primitive `w`, obtained from the
/// Bezout coefficients of the running gcd of the coordinates. This realizes
/// the unimodular extension of a primitive (n-1)-tuple: appending `z` to any
/// tuple with cross product `w` yields determinant +-1.
pub fn hyperplane_representative(w: &IntVector) -> Result<IntVector, LinalgError> {
    if w.is_zero() {
        return Err(LinalgError::ZeroVector);
    }
    let mut g = BigInt::zero();
    let mut coeffs: Vec<BigInt> = Vec::with_capacity(w.dim());
    for c in w.coords() {
        let e = g.extended_gcd(c);
        // e.gcd = e.x * g + e.y * c
        for prev in coeffs.iter_mut() {
            *prev *= &e.x;
        }
        coeffs.push(e.y.clone());
        g = e.gcd;
    }
    if !g.abs().is_one() {
        return Err(LinalgError::NotPrimitive(g.abs()));
    }
    if g.is_negative() {
        for c in coeffs.iter_mut() {
            *c = -&*c;
        }
    }
    let z = IntVector::new(coeffs)?;
    debug_assert!(z.dot(w).unwrap().is_one());
    Ok(z)
}

/// Solves `target = sum c_i basis_i` exactly over the rationals via the
/// normal equations; errors if the basis is dependent or the target falls
/// outside the span.
pub fn solve_in_basis_exact(
    target: &[BigRational],
    basis: &[&IntVector],
) -> Result<Vec<BigRational>, LinalgError> {
    let dim = check_same_dim(basis)?;
    if target.len() != dim {
        return Err(LinalgError::DimensionMismatch {
            expected: dim,
            got: target.len(),
        });
    }
    let k = basis.len();
    // Gram matrix and right-hand side B * target.
    let mut aug: Vec<Vec<BigRational>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = Vec::with_capacity(k + 1);
        for j in 0..k {
            row.push(BigRational::from_integer(basis[i].dot(basis[j])?));
        }
        let rhs: BigRational = basis[i]
            .coords()
            .iter()
            .zip(target)
            .map(|(b, t)| BigRational::from_integer(b.clone()) * t)
            .sum();
        row.push(rhs);
        aug.push(row);
    }
    let coeffs = gauss_solve_rational(&mut aug).ok_or(LinalgError::DependentBasis)?;
    // Residual must vanish for the target to lie in the span.
    for d in 0..dim {
        let mut acc = BigRational::zero();
        for (i, c) in coeffs.iter().enumerate() {
            acc += c * BigRational::from_integer(basis[i].coords()[d].clone());
        }
        if acc != target[d] {
            return Err(LinalgError::NotInSpan);
        }
    }
    Ok(coeffs)
}

/// Solves `target = sum c_i basis_i` for an interval-valued target lying in
/// the span; returns interval coefficients.
pub fn solve_in_basis_interval(
    target: &[Interval],
    basis: &[&IntVector],
    bits: u32,
) -> Result<Vec<Interval>, LinalgError> {
    let dim = check_same_dim(basis)?;
    if target.len() != dim {
        return Err(LinalgError::DimensionMismatch {
            expected: dim,
            got: target.len(),
        });
    }
    let k = basis.len();
    let mut aug: Vec<Vec<Interval>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = Vec::with_capacity(k + 1);
        for j in 0..k {
            row.push(Interval::from_int(&basis[i].dot(basis[j])?));
        }
        let mut rhs = Interval::zero();
        for (b, t) in basis[i].coords().iter().zip(target) {
            rhs = rhs.add(&t.mul(&Interval::from_int(b), bits), bits);
        }
        row.push(rhs);
        aug.push(row);
    }
    gauss_solve_interval(&mut aug, bits)
}

fn gauss_solve_rational(aug: &mut [Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let k = aug.len();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot);
        let p = aug[col][col].clone();
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = &aug[r][col] / &p;
            if f.is_zero() {
                continue;
            }
            for c in col..=k {
                let delta = &f * &aug[col][c];
                aug[r][c] -= delta;
            }
        }
    }
    Some((0..k).map(|i| &aug[i][k] / &aug[i][i]).collect())
}

fn gauss_solve_interval(
    aug: &mut [Vec<Interval>],
    bits: u32,
) -> Result<Vec<Interval>, LinalgError> {
    let k = aug.len();
    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| !aug[r][col].contains_zero())
            .ok_or(LinalgError::DependentBasis)?;
        aug.swap(col, pivot);
        let p = aug[col][col].clone();
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = aug[r][col].div(&p, bits)?;
            for c in col..=k {
                let delta = f.mul(&aug[col][c], bits);
                aug[r][c] = aug[r][c].sub(&delta, bits);
            }
        }
    }
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        out.push(aug[i][k].div(&aug[i][i], bits)?);
    }
    Ok(out)
}

/// Certified Hadamard comparison `|x_1 ^ .. ^ x_k| <= |x_1| .. |x_k|`,
/// decided exactly on squares.
pub fn hadamard_holds(vs: &[&IntVector]) -> Result<Cert, LinalgError> {
    let w = wedge(vs)?;
    let lhs = w.norm_sq();
    let rhs: BigInt = vs.iter().map(|v| v.norm_sq()).product();
    Ok(Cert::from_bool(lhs <= rhs))
}
