//! Problem definitions.
//!
//! [`NqpProblem`] is `min 1/2 x^T A x - x^T b` over a box `lower <= x <= upper`
//! (the nonnegative orthant by default). [`NnlsProblem`] is
//! `min ||C x - d||^2` over a box, handled through column actions on `C`.

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, ColumnAction, ColumnOperator, SparseSymMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct NqpProblem {
    a: SparseSymMatrix,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl NqpProblem {
    /// Nonnegativity-constrained problem (`x >= 0`).
    pub fn new(a: SparseSymMatrix, b: Vec<f64>) -> Result<Self> {
        let n = a.dim();
        Self::with_bounds(a, b, vec![0.0; n], vec![f64::INFINITY; n])
    }

    pub fn with_bounds(a: SparseSymMatrix, b: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = a.dim();
        check_len(n, b.len())?;
        check_len(n, lower.len())?;
        check_len(n, upper.len())?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("right-hand side must be finite".into()));
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() {
                return Err(Error::InvalidParameter(format!("lower bound {i} is not finite")));
            }
            if u.is_nan() || l > u {
                return Err(Error::InvalidParameter(format!("empty box at component {i}")));
            }
        }
        Ok(Self { a, b, lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// `V(x) = 1/2 x^T A x - x^T b`
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let ax = self.a.matvec(x)?;
        Ok(0.5 * dot(x, &ax) - dot(x, &self.b))
    }

    /// `A x - b`
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.a.matvec(x)?;
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        Ok(g)
    }

    /// The problem with `A` replaced by `A + sigma I`.
    pub fn shift(&self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("shift must be positive, got {sigma}")));
        }
        Ok(Self { a: self.a.shifted(sigma), b: self.b.clone(), lower: self.lower.clone(), upper: self.upper.clone() })
    }

    /// Componentwise clamp onto the feasible box.
    pub fn project(&self, x: &mut [f64]) {
        for ((xi, &l), &u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = clamp(*xi, l, u);
        }
    }

    /// Projection of the origin onto the box: the default initial guess.
    pub fn default_start(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.project(&mut x);
        x
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lower).zip(&self.upper).all(|((&v, &l), &u)| v >= l && v <= u)
    }
}

/// `min ||C x - d||^2` subject to `lower <= x <= upper`.
#[derive(Debug, Clone)]
pub struct NnlsProblem<Op = ColumnOperator> {
    op: Op,
    d: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<Op: ColumnAction> NnlsProblem<Op> {
    pub fn new(op: Op, d: Vec<f64>) -> Result<Self> {
        let n = op.cols();
        Self::with_bounds(op, d, vec![0.0; n], vec![f64::INFINITY; n])
    }

    pub fn with_bounds(op: Op, d: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_len(op.rows(), d.len())?;
        check_len(op.cols(), lower.len())?;
        check_len(op.cols(), upper.len())?;
        for j in 0..op.cols() {
            if !(op.col_sq_norm(j) > 0.0) {
                return Err(Error::ZeroColumn(j));
            }
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || u.is_nan() || l > u {
                return Err(Error::InvalidParameter(format!("invalid bounds at component {i}")));
            }
        }
        Ok(Self { op, d, lower, upper })
    }

    pub fn operator(&self) -> &Op {
        &self.op
    }

    pub fn data(&self) -> &[f64] {
        &self.d
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.op.cols()
    }

    /// `d - C x`
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.op.apply(x)?;
        for (ri, di) in r.iter_mut().zip(&self.d) {
            *ri = di - *ri;
        }
        Ok(r)
    }

    /// The equivalent quadratic objective `1/2 ||C x - d||^2 - 1/2 ||d||^2`,
    /// i.e. `1/2 x^T C^T C x - x^T C^T d`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(0.5 * (dot(&r, &r) - dot(&self.d, &self.d)))
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((xi, &l), &u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = clamp(*xi, l, u);
        }
    }
}

impl NnlsProblem<ColumnOperator> {
    /// Rewrites the least-squares problem as a quadratic program with
    /// `A = C^T C` and `b = C^T d`.
    pub fn to_nqp(&self) -> Result<NqpProblem> {
        let a = self.op.build_explicit_normal()?;
        let b = self.op.apply_transpose(&self.d)?;
        NqpProblem::with_bounds(a, b, self.lower.clone(), self.upper.clone())
    }
}

#[inline]
pub(crate) fn clamp(v: f64, lower: f64, upper: f64) -> f64 {
    if v < lower {
        lower
    } else if v > upper {
        upper
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cycle3() -> NqpProblem {
        let a =
            SparseSymMatrix::from_dense(&[vec![2.0, -1.0, 0.5], vec![-1.0, 2.0, -1.0], vec![0.5, -1.0, 2.0]]).unwrap();
        NqpProblem::new(a, vec![2.0, -2.0, 2.0]).unwrap()
    }

    #[test]
    fn objective_examples() {
        let p = cycle3();
        assert!((p.objective(&[0.8, 0.0, 0.8]).unwrap() + 1.6).abs() < 1e-14);
        assert_eq!(p.objective(&[0.0; 3]).unwrap(), 0.0);
        let s = NqpProblem::new(SparseSymMatrix::from_dense(&[vec![2.0]]).unwrap(), vec![2.0]).unwrap();
        assert_eq!(s.objective(&[1.0]).unwrap(), -1.0);
        assert!(p.objective(&[1.0]).is_err());
    }

    #[test]
    fn gradient_examples() {
        let p = cycle3();
        let g = p.gradient(&[0.8, 0.0, 0.8]).unwrap();
        for (got, want) in g.iter().zip([0.0, 0.4, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(p.gradient(&[0.0; 3]).unwrap(), vec![-2.0, 2.0, -2.0]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = cycle3();
        let x = [0.3, 0.7, 0.2];
        let g = p.gradient(&x).unwrap();
        let eps = 1e-5;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += eps;
            xm[i] -= eps;
            let fd = (p.objective(&xp).unwrap() - p.objective(&xm).unwrap()) / (2.0 * eps);
            assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0));
        }
    }

    #[test]
    fn shift_examples() {
        let p = cycle3();
        let q = p.shift(1.0).unwrap();
        assert_eq!(q.matrix().diag(), &[3.0, 3.0, 3.0]);
        assert_eq!(q.matrix().get(0, 1), Some(-1.0));
        assert_eq!(q.objective(&[0.0; 3]).unwrap(), 0.0);
        assert!(p.shift(0.0).is_err());
        assert!(p.shift(-1.0).is_err());
    }

    #[test]
    fn nnls_to_nqp_example() {
        let c = ColumnOperator::from_dense(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let q = NnlsProblem::new(c, vec![1.0, 2.0, 3.0]).unwrap();
        let p = q.to_nqp().unwrap();
        assert_eq!(p.matrix().to_dense(), vec![vec![2.0, 1.0], vec![1.0, 5.0]]);
        assert_eq!(p.rhs(), &[4.0, 7.0]);
        // objectives agree up to the constant
        let x = [0.4, 1.3];
        assert!((q.objective(&x).unwrap() - p.objective(&x).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn box_validation() {
        let a = SparseSymMatrix::from_dense(&[vec![1.0]]).unwrap();
        assert!(NqpProblem::with_bounds(a.clone(), vec![1.0], vec![1.0], vec![0.0]).is_err());
        assert!(NqpProblem::with_bounds(a.clone(), vec![1.0], vec![f64::NEG_INFINITY], vec![0.0]).is_err());
        let p = NqpProblem::with_bounds(a, vec![1.0], vec![0.5], vec![2.0]).unwrap();
        assert_eq!(p.default_start(), vec![0.5]);
    }
}
