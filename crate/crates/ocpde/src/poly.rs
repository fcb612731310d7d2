//! Dense multivariate polynomials in a shifted monomial basis.
//!
//! A `Poly` stores coefficients for the monomials `(x - c)^alpha` about a
//! fixed center `c`, listed in graded lexicographic order (grades ascending,
//! tuples lexicographically descending within a grade). Keeping pieces
//! centered at their cell midpoint makes Taylor data round-trip exactly:
//! building a piece from derivatives at the center and reading them back is
//! a plain scale by `alpha!`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("coefficient count {got} does not match {expected} monomials")]
    CoeffCount { expected: usize, got: usize },
    #[error("centers differ; polynomials must share a basis point")]
    CenterMismatch,
    #[error("coefficient is not finite")]
    NonFiniteCoeff,
}

/// Binomial coefficient, saturating is unnecessary at the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All exponent tuples of `n` variables with total degree up to `max_deg`,
/// grades ascending and lexicographically descending within each grade, so
/// for two variables: (0,0); (1,0), (0,1); (2,0), (1,1), (0,2); ...
pub fn monomials(n: usize, max_deg: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(binomial(n + max_deg as usize, n));
    for g in 0..=max_deg {
        push_grade(n, g, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

fn push_grade(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if n == 1 {
        prefix.push(left);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for a in (0..=left).rev() {
        prefix.push(a);
        push_grade(n - 1, left - a, prefix, out);
        prefix.pop();
    }
}

/// Position of `alpha` in the `monomials(n, max_deg)` listing.
pub fn monomial_index(alpha: &[u32], max_deg: u32) -> Option<usize> {
    let n = alpha.len();
    let total: u32 = alpha.iter().sum();
    if total > max_deg {
        return None;
    }
    // Linear scan is fine at the sizes in play (n <= 3, degree <= 12 or so).
    monomials(n, max_deg).iter().position(|m| m == alpha)
}

/// Product of factorials of the entries, as f64 (entries stay tiny).
pub fn multi_factorial(alpha: &[u32]) -> f64 {
    let mut acc = 1.0;
    for &a in alpha {
        for i in 2..=a {
            acc *= i as f64;
        }
    }
    acc
}

/// Polynomial in `n` variables about a center point.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    dim: usize,
    degree: u32,
    center: Vec<f64>,
    /// One coefficient per entry of `monomials(dim, degree)`.
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(center: Vec<f64>, degree: u32, coeffs: Vec<f64>) -> Result<Self, PolyError> {
        let dim = center.len();
        let expected = binomial(dim + degree as usize, dim);
        if coeffs.len() != expected {
            return Err(PolyError::CoeffCount {
                expected,
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(PolyError::NonFiniteCoeff);
        }
        Ok(Poly {
            dim,
            degree,
            center,
            coeffs,
        })
    }

    pub fn constant(center: Vec<f64>, value: f64) -> Self {
        Poly::new(center, 0, vec![value]).expect("constant is always well formed")
    }

    /// Taylor data to polynomial: coefficient of `(x-c)^alpha` is
    /// `jet[alpha] / alpha!` for every `|alpha| <= order`; higher
    /// coefficients up to `degree` are zero.
    pub fn from_jet(
        center: Vec<f64>,
        order: u32,
        degree: u32,
        jet: &[f64],
    ) -> Result<Self, PolyError> {
        let dim = center.len();
        let jet_monos = monomials(dim, order);
        if jet.len() != jet_monos.len() {
            return Err(PolyError::CoeffCount {
                expected: jet_monos.len(),
                got: jet.len(),
            });
        }
        let degree = degree.max(order);
        let mut coeffs = vec![0.0; binomial(dim + degree as usize, dim)];
        for (pos, alpha) in jet_monos.iter().enumerate() {
            let idx = monomial_index(alpha, degree).expect("jet monomial within degree");
            coeffs[idx] = jet[pos] / multi_factorial(alpha);
        }
        Poly::new(center, degree, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        // Per-axis power tables of (x_i - c_i), then a dot product.
        let d = self.degree as usize;
        let mut powers = vec![[0.0; 0].to_vec(); 0];
        powers.reserve(self.dim);
        for i in 0..self.dim {
            let y = x[i] - self.center[i];
            let mut table = Vec::with_capacity(d + 1);
            table.push(1.0);
            for p in 1..=d {
                table.push(table[p - 1] * y);
            }
            powers.push(table);
        }
        let mut acc = 0.0;
        for (pos, alpha) in monomials(self.dim, self.degree).iter().enumerate() {
            let c = self.coeffs[pos];
            if c == 0.0 {
                continue;
            }
            let mut term = c;
            for (i, &a) in alpha.iter().enumerate() {
                term *= powers[i][a as usize];
            }
            acc += term;
        }
        acc
    }

    /// Partial derivative along one axis.
    pub fn deriv(&self, axis: usize) -> Poly {
        assert!(axis < self.dim, "axis out of range");
        let new_degree = self.degree.saturating_sub(1);
        let monos = monomials(self.dim, self.degree);
        let mut coeffs = vec![0.0; binomial(self.dim + new_degree as usize, self.dim)];
        for (pos, alpha) in monos.iter().enumerate() {
            let a = alpha[axis];
            if a == 0 || self.coeffs[pos] == 0.0 {
                continue;
            }
            let mut beta = alpha.clone();
            beta[axis] -= 1;
            let idx = monomial_index(&beta, new_degree).expect("reduced monomial in range");
            coeffs[idx] += self.coeffs[pos] * a as f64;
        }
        Poly::new(self.center.clone(), new_degree, coeffs).expect("derivative well formed")
    }

    /// Iterated partial derivative `D^alpha`.
    pub fn partial(&self, alpha: &[u32]) -> Poly {
        debug_assert_eq!(alpha.len(), self.dim);
        let mut p = self.clone();
        for (axis, &count) in alpha.iter().enumerate() {
            for _ in 0..count {
                p = p.deriv(axis);
            }
        }
        p
    }

    /// Derivatives at the center up to `order`, in graded-lex listing:
    /// exact scale of the stored coefficients by `alpha!`.
    pub fn jet_at_center(&self, order: u32) -> Vec<f64> {
        monomials(self.dim, order)
            .iter()
            .map(|alpha| {
                match monomial_index(alpha, self.degree) {
                    Some(idx) => self.coeffs[idx] * multi_factorial(alpha),
                    None => 0.0,
                }
            })
            .collect()
    }

    /// Sum, requiring a common center and taking the larger degree.
    pub fn add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.combine(other, 1.0)
    }

    /// Difference, requiring a common center.
    pub fn sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Poly, sign: f64) -> Result<Poly, PolyError> {
        if self.dim != other.dim {
            return Err(PolyError::DimMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.center != other.center {
            return Err(PolyError::CenterMismatch);
        }
        let degree = self.degree.max(other.degree);
        let monos = monomials(self.dim, degree);
        let mut coeffs = vec![0.0; monos.len()];
        for (pos, alpha) in monos.iter().enumerate() {
            let a = monomial_index(alpha, self.degree)
                .map(|i| self.coeffs[i])
                .unwrap_or(0.0);
            let b = monomial_index(alpha, other.degree)
                .map(|i| other.coeffs[i])
                .unwrap_or(0.0);
            coeffs[pos] = a + sign * b;
        }
        Poly::new(self.center.clone(), degree, coeffs)
    }

    pub fn scale(&self, factor: f64) -> Poly {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        Poly::new(self.center.clone(), self.degree, coeffs).expect("scale well formed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_listing_two_vars() {
        let m = monomials(2, 2);
        assert_eq!(
            m,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2],
            ]
        );
    }

    #[test]
    fn monomial_count_matches_binomial() {
        for n in 1..=3 {
            for d in 0..=5u32 {
                assert_eq!(monomials(n, d).len(), binomial(n + d as usize, n));
            }
        }
    }

    #[test]
    fn eval_univariate() {
        // p(x) = 2 + 3(x-1) + 0.5(x-1)^2
        let p = Poly::new(vec![1.0], 2, vec![2.0, 3.0, 0.5]).unwrap();
        assert_eq!(p.eval(&[1.0]), 2.0);
        assert_eq!(p.eval(&[3.0]), 2.0 + 6.0 + 2.0);
    }

    #[test]
    fn eval_bivariate() {
        // p(x,y) = (x-0)^2 - (y-0)^2 about the origin
        let p = Poly::new(vec![0.0, 0.0], 2, vec![0.0, 0.0, 0.0, 1.0, 0.0, -1.0]).unwrap();
        assert_eq!(p.eval(&[2.0, 1.0]), 3.0);
        assert_eq!(p.eval(&[0.5, 0.5]), 0.0);
    }

    #[test]
    fn deriv_drops_degree() {
        let p = Poly::new(vec![0.0], 3, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let dp = p.deriv(0);
        assert_eq!(dp.degree(), 2);
        // d/dx (1 + 2x + 3x^2 + 4x^3) = 2 + 6x + 12x^2
        assert_eq!(dp.coeffs(), &[2.0, 6.0, 12.0]);
    }

    #[test]
    fn mixed_partial_commutes() {
        // p = x^2 y about (0,0): coefficient on alpha=(2,1)
        let monos = monomials(2, 3);
        let mut coeffs = vec![0.0; monos.len()];
        let idx = monos.iter().position(|m| m == &vec![2, 1]).unwrap();
        coeffs[idx] = 1.0;
        let p = Poly::new(vec![0.0, 0.0], 3, coeffs).unwrap();
        let dxy = p.deriv(0).deriv(1);
        let dyx = p.deriv(1).deriv(0);
        for x in [[0.3, -0.7], [1.5, 2.0]] {
            assert_eq!(dxy.eval(&x), dyx.eval(&x));
        }
    }

    #[test]
    fn jet_round_trip_is_exact_through_order_two() {
        // Derivative data at the center must be recoverable bit for bit
        // for orders whose factorials are powers of two.
        let jet = vec![0.1, -2.5, 0.75, 1.0 / 3.0, 0.2, -0.625];
        let p = Poly::from_jet(vec![0.5, -0.25], 2, 2, &jet).unwrap();
        assert_eq!(p.jet_at_center(2), jet);
    }

    #[test]
    fn jet_reconstruction_matches_partials() {
        let jet = vec![1.0, 2.0, -3.0, 4.0, 5.0, -6.0];
        let p = Poly::from_jet(vec![0.25, 0.75], 2, 2, &jet).unwrap();
        let monos = monomials(2, 2);
        for (pos, alpha) in monos.iter().enumerate() {
            let d = p.partial(alpha);
            let got = d.eval(&[0.25, 0.75]);
            assert!((got - jet[pos]).abs() < 1e-12, "alpha {alpha:?}: {got}");
        }
    }

    #[test]
    fn add_sub_require_common_center() {
        let a = Poly::constant(vec![0.0], 1.0);
        let b = Poly::constant(vec![0.5], 1.0);
        assert_eq!(a.sub(&b).unwrap_err(), PolyError::CenterMismatch);
    }
}
