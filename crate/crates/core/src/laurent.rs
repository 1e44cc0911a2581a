//! Sparse Laurent polynomials in the symplectic variables
//! q_1..q_n, p_1..p_n with exact rational-complex coefficients, plus the
//! Poisson bracket.

use crate::rational::{C64, CQ};
use std::collections::BTreeMap;

/// A Laurent polynomial in 2n variables: exponent vectors of length 2n,
/// q-exponents first, p-exponents (possibly negative) second.
#[derive(Clone, Debug)]
pub struct Laurent {
    pub n: usize,
    pub terms: BTreeMap<Vec<i64>, CQ>,
}

impl Laurent {
    pub fn zero(n: usize) -> Self {
        Laurent {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(n: usize, coeff: CQ, exps: Vec<i64>) -> Self {
        assert_eq!(exps.len(), 2 * n);
        let mut l = Laurent::zero(n);
        if !coeff.is_zero() {
            l.terms.insert(exps, coeff);
        }
        l
    }

    /// The monomial q_j.
    pub fn q(n: usize, j: usize) -> Self {
        let mut e = vec![0; 2 * n];
        e[j] = 1;
        Laurent::term(n, CQ::one(), e)
    }

    /// The monomial p_j^pow (pow may be negative).
    pub fn p(n: usize, j: usize, pow: i64) -> Self {
        let mut e = vec![0; 2 * n];
        e[n + j] = pow;
        Laurent::term(n, CQ::one(), e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &CQ) -> Self {
        if c.is_zero() {
            return Laurent::zero(self.n);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn add(&self, rhs: &Laurent) -> Self {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            let entry = out.terms.entry(e.clone()).or_insert_with(CQ::zero);
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(e);
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Laurent) -> Self {
        self.add(&rhs.scale(&CQ::from_int(-1)))
    }

    pub fn mul(&self, rhs: &Laurent) -> Self {
        assert_eq!(self.n, rhs.n);
        let mut out = Laurent::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let c = c1 * c2;
                let entry = out.terms.entry(e).or_insert_with(CQ::zero);
                *entry += &c;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    fn derivative(&self, var: usize) -> Self {
        let mut out = Laurent::zero(self.n);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            let k = e2[var];
            e2[var] -= 1;
            let coeff = c * &CQ::from_int(k);
            let entry = out.terms.entry(e2).or_insert_with(CQ::zero);
            *entry += &coeff;
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn d_dq(&self, j: usize) -> Self {
        self.derivative(j)
    }

    pub fn d_dp(&self, j: usize) -> Self {
        self.derivative(self.n + j)
    }

    /// Evaluate at complex (q, p); all p_j must be nonzero if negative
    /// exponents occur.
    pub fn eval(&self, q: &[C64], p: &[C64]) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = c.to_c64();
            for (j, &pow) in e.iter().enumerate() {
                if pow == 0 {
                    continue;
                }
                let base = if j < self.n { q[j] } else { p[j - self.n] };
                t *= base.powi(pow as i32);
            }
            total += t;
        }
        total
    }
}

/// Poisson bracket {f, g} = sum_j (df/dq_j dg/dp_j - df/dp_j dg/dq_j),
/// computed exactly on the symbolic representation.
pub fn poisson_bracket(f: &Laurent, g: &Laurent) -> Laurent {
    assert_eq!(f.n, g.n);
    let mut out = Laurent::zero(f.n);
    for j in 0..f.n {
        out = out.add(&f.d_dq(j).mul(&g.d_dp(j)));
        out = out.sub(&f.d_dp(j).mul(&g.d_dq(j)));
    }
    out
}
