//! Univariate polynomials over ℚ with exact real-root isolation.
//!
//! The flow boundary analysis needs the real roots of a quartic together
//! with their exact multiplicities, because the integrable endpoint
//! substitution depends on the multiplicity. Floating point cannot be
//! trusted to separate a triple root from three clustered simple ones, so
//! everything here is exact: Yun square-free decomposition splits off each
//! multiplicity, Sturm chains isolate the roots of the square-free parts,
//! and sign-based bisection narrows each isolating interval to any
//! requested rational width.

use crate::scalar::{int, Rational};
use num::{One, Signed, Zero};
use std::fmt;

/// Polynomial with exact rational coefficients; `c[i]` multiplies `x^i`.
/// Invariant: the leading stored coefficient is nonzero (zero polynomial
/// stores an empty vector).
#[derive(Clone, PartialEq)]
pub struct Poly {
    c: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn constant(v: Rational) -> Self {
        Poly::from_coeffs(vec![v])
    }

    pub fn x() -> Self {
        Poly::from_coeffs(vec![Rational::zero(), Rational::one()])
    }

    pub fn from_coeffs(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(Rational::is_zero) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Poly::from_coeffs(c.iter().map(|&v| int(v)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.c.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn leading(&self) -> Rational {
        self.c.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.c.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.c.iter().map(crate::scalar::Scalar::to_f64).collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.c.iter().rev() {
            acc = acc * x + crate::scalar::Scalar::to_f64(c);
        }
        acc
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly { c: self.c.iter().map(|v| -v.clone()).collect() }
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Rational::zero(); self.c.len() + rhs.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::from_coeffs(c)
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::constant(Rational::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero();
        }
        Poly::from_coeffs(
            self.c[1..]
                .iter()
                .enumerate()
                .map(|(i, v)| v * Rational::from_integer((i as i64 + 1).into()))
                .collect(),
        )
    }

    /// Substitute `x ↦ inner(x)`.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.c.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Euclidean division: returns `(q, r)` with `self = q·rhs + r`,
    /// `deg r < deg rhs`.
    pub fn divrem(&self, rhs: &Poly) -> (Poly, Poly) {
        assert!(!rhs.is_zero(), "division by the zero polynomial");
        let dr = rhs.degree().unwrap();
        let lead_inv = Rational::one() / rhs.leading();
        let mut rem = self.clone();
        let mut q = vec![Rational::zero(); self.c.len().saturating_sub(dr)];
        while let Some(d) = rem.degree() {
            if d < dr {
                break;
            }
            let f = rem.leading() * &lead_inv;
            q[d - dr] = f.clone();
            for i in 0..=dr {
                let delta = &f * &rhs.c[i];
                rem.c[d - dr + i] -= delta;
            }
            rem = Poly::from_coeffs(rem.c);
        }
        (Poly::from_coeffs(q), rem)
    }

    /// Exact quotient; panics when the division leaves a remainder.
    pub fn div_exact(&self, rhs: &Poly) -> Poly {
        let (q, r) = self.divrem(rhs);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = Rational::one() / self.leading();
        self.scale(&inv)
    }

    /// Monic gcd by the Euclidean algorithm (remainders are renormalised to
    /// monic each round to keep coefficients small).
    pub fn gcd(&self, rhs: &Poly) -> Poly {
        let mut a = self.monic();
        let mut b = rhs.monic();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic();
        }
        a
    }

    /// Yun square-free decomposition: pairs `(gᵢ, i)` with each `gᵢ` monic,
    /// square-free and pairwise coprime, and `self = lc · Π gᵢ^i`.
    pub fn square_free_decomposition(&self) -> Vec<(Poly, usize)> {
        assert!(!self.is_zero(), "square-free decomposition of zero");
        let p = self.monic();
        if p.degree() == Some(0) {
            return Vec::new();
        }
        let dp = p.derivative();
        let u = p.gcd(&dp);
        let mut v = p.div_exact(&u);
        let mut w = dp.div_exact(&u);
        let mut out = Vec::new();
        let mut i = 1;
        while v.degree().unwrap_or(0) > 0 {
            let s = w.sub(&v.derivative());
            let g = v.gcd(&s);
            if g.degree().unwrap_or(0) > 0 {
                out.push((g.clone(), i));
            }
            v = v.div_exact(&g);
            w = s.div_exact(&g);
            i += 1;
        }
        out
    }

    /// Multiplicity of `x0` as a root (0 when not a root).
    pub fn root_multiplicity(&self, x0: &Rational) -> usize {
        let mut p = self.clone();
        let mut m = 0;
        while !p.is_zero() && p.eval(x0).is_zero() {
            m += 1;
            p = p.derivative();
        }
        m
    }

    /// Cauchy bound: every real root lies in `(-B, B)`.
    pub fn cauchy_root_bound(&self) -> Rational {
        let lead = self.leading();
        assert!(!lead.is_zero());
        let mut m = Rational::zero();
        for c in &self.c[..self.c.len() - 1] {
            let q = (c / &lead).abs();
            if q > m {
                m = q;
            }
        }
        m + Rational::one()
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            parts.push(match i {
                0 => format!("{c}"),
                1 => format!("{c}*x"),
                _ => format!("{c}*x^{i}"),
            });
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Sturm chain of a polynomial, for counting distinct real roots.
pub struct SturmChain {
    chain: Vec<Poly>,
}

impl SturmChain {
    pub fn new(p: &Poly) -> Self {
        let mut chain = vec![p.clone(), p.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let (_, r) = chain[n - 2].divrem(&chain[n - 1]);
            chain.push(r.neg());
        }
        SturmChain { chain }
    }

    fn variations(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let v = p.eval(x);
            let s = if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            };
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count_roots(&self, a: &Rational, b: &Rational) -> usize {
        assert!(a <= b);
        self.variations(a) - self.variations(b)
    }
}

/// Isolated real root: `value` is known to lie in `[lo, hi]`; when
/// `lo == hi` the root is exactly rational.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRoot {
    pub lo: Rational,
    pub hi: Rational,
    pub multiplicity: usize,
}

impl RealRoot {
    pub fn midpoint_f64(&self) -> f64 {
        let mid = (&self.lo + &self.hi) / int(2);
        crate::scalar::Scalar::to_f64(&mid)
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

/// All real roots of `p` in `(a, b]` with exact multiplicities, sorted
/// ascending, each refined until its interval is no wider than `width`.
/// Endpoint values of `p` at `a` and `b` may be anything; a root exactly at
/// `b` is reported, one exactly at `a` is not.
pub fn real_roots_in(p: &Poly, a: &Rational, b: &Rational, width: &Rational) -> Vec<RealRoot> {
    assert!(!p.is_zero());
    let mut out = Vec::new();
    for (g, m) in p.square_free_decomposition() {
        if g.degree().unwrap_or(0) == 0 {
            continue;
        }
        let chain = SturmChain::new(&g);
        for (lo, hi) in isolate(&g, &chain, a.clone(), b.clone()) {
            let (mut lo, mut hi) = refine(&g, lo, hi, width);
            if lo != hi {
                // A rational root of moderate height is the simplest
                // rational in its own tight isolating interval.
                let c = simplest_rational_in(&lo, &hi);
                if g.eval(&c).is_zero() {
                    lo = c.clone();
                    hi = c;
                }
            }
            out.push(RealRoot { lo, hi, multiplicity: m });
        }
    }
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    out
}

/// The rational with the smallest denominator (then smallest numerator) in
/// the closed interval `[lo, hi]`, by the continued-fraction walk.
pub fn simplest_rational_in(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi);
    let floor_lo = lo.floor();
    // An integer inside the interval is always simplest.
    let ceil_lo = lo.ceil();
    if ceil_lo <= *hi {
        if lo <= &Rational::zero() && &Rational::zero() <= hi {
            return Rational::zero();
        }
        return if *lo > Rational::zero() { ceil_lo } else { hi.floor() };
    }
    // Same integer part; recurse on the fractional parts, reciprocated.
    let f = floor_lo;
    let inner = simplest_rational_in(
        &(Rational::one() / (hi - &f)),
        &(Rational::one() / (lo - &f)),
    );
    f + Rational::one() / inner
}

/// Convenience: all real roots of `p` (Cauchy bound on both sides).
pub fn real_roots(p: &Poly, width: &Rational) -> Vec<RealRoot> {
    let b = p.cauchy_root_bound();
    real_roots_in(p, &(-b.clone()), &b, width)
}

fn isolate(
    g: &Poly,
    chain: &SturmChain,
    a: Rational,
    b: Rational,
) -> Vec<(Rational, Rational)> {
    let n = chain.count_roots(&a, &b);
    match n {
        0 => Vec::new(),
        1 => vec![(a, b)],
        _ => {
            let mid = (&a + &b) / int(2);
            let mut out = isolate(g, chain, a, mid.clone());
            out.extend(isolate(g, chain, mid, b));
            out
        }
    }
}

/// Narrow `(a, b]` (containing exactly one root of square-free `g`) until
/// `b − a ≤ width`, by exact-sign bisection. Returns a point interval when
/// the root is hit exactly.
fn refine(g: &Poly, mut a: Rational, mut b: Rational, width: &Rational) -> (Rational, Rational) {
    if g.eval(&b).is_zero() {
        return (b.clone(), b);
    }
    // g(a) ≠ 0 ≠ g(b), so the sign at `a` is fixed throughout: `a` only ever
    // moves to points with that same sign.
    let sign_a = g.eval(&a).is_positive();
    debug_assert!(!g.eval(&a).is_zero());
    while &b - &a > *width {
        let mid = (&a + &b) / int(2);
        let v = g.eval(&mid);
        if v.is_zero() {
            return (mid.clone(), mid);
        }
        if v.is_positive() == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a, b)
}

/// `width` helper: 10^(−k) as an exact rational.
pub fn pow10_neg(k: u32) -> Rational {
    Rational::one() / Rational::from_integer(num::BigInt::from(10u32).pow(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn arithmetic_roundtrip() {
        let p = Poly::from_i64(&[2, 0, 1]); // x² + 2
        let q = Poly::from_i64(&[-1, 1]); // x − 1
        let prod = p.mul(&q);
        let (quot, rem) = prod.divrem(&q);
        assert!(rem.is_zero());
        assert_eq!(quot, p);
        assert_eq!(prod.eval(&int(3)), int(22));
    }

    #[test]
    fn derivative_and_compose() {
        let p = Poly::from_i64(&[0, 0, 0, 1]); // x³
        assert_eq!(p.derivative(), Poly::from_i64(&[0, 0, 3]));
        let shifted = p.compose(&Poly::from_i64(&[1, 1])); // (x+1)³
        assert_eq!(shifted, Poly::from_i64(&[1, 3, 3, 1]));
    }

    #[test]
    fn square_free_decomposition_recovers_multiplicities() {
        // x³(x − 2)²(x + 1)
        let p = Poly::x()
            .pow(3)
            .mul(&Poly::from_i64(&[-2, 1]).pow(2))
            .mul(&Poly::from_i64(&[1, 1]));
        let parts = p.square_free_decomposition();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0], (Poly::from_i64(&[1, 1]), 1));
        assert_eq!(parts[1], (Poly::from_i64(&[-2, 1]), 2));
        assert_eq!(parts[2], (Poly::x(), 3));
    }

    #[test]
    fn sturm_counts_distinct_roots() {
        // (x−1)(x−2)(x−3)
        let p = Poly::from_i64(&[-1, 1]).mul(&Poly::from_i64(&[-2, 1])).mul(&Poly::from_i64(&[-3, 1]));
        let chain = SturmChain::new(&p);
        assert_eq!(chain.count_roots(&int(0), &int(4)), 3);
        assert_eq!(chain.count_roots(&ratio(3, 2), &ratio(5, 2)), 1);
        // Half-open semantics: root at the left endpoint is excluded.
        assert_eq!(chain.count_roots(&int(1), &int(3)), 2);
    }

    #[test]
    fn root_isolation_with_multiplicity() {
        // f = 4x³(4 − 3x): roots 0 (mult 3) and 4/3 (mult 1).
        let p = Poly::x().pow(3).mul(&Poly::from_i64(&[4, -3])).scale(&int(4));
        let roots = real_roots(&p, &pow10_neg(30));
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].multiplicity, 3);
        assert!(roots[0].is_exact() && roots[0].lo == int(0));
        assert_eq!(roots[1].multiplicity, 1);
        assert!(roots[1].is_exact() && roots[1].lo == ratio(4, 3));
    }

    #[test]
    fn irrational_root_refined() {
        // x² − 2, root √2 to 30 digits.
        let p = Poly::from_i64(&[-2, 0, 1]);
        let roots = real_roots_in(&p, &int(0), &int(2), &pow10_neg(30));
        assert_eq!(roots.len(), 1);
        let r = &roots[0];
        assert!(!r.is_exact());
        assert!((r.midpoint_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(&r.hi - &r.lo <= pow10_neg(30));
    }

    #[test]
    fn multiplicity_at_point() {
        let p = Poly::from_i64(&[-1, 1]).pow(4).mul(&Poly::from_i64(&[5, 1]));
        assert_eq!(p.root_multiplicity(&int(1)), 4);
        assert_eq!(p.root_multiplicity(&int(-5)), 1);
        assert_eq!(p.root_multiplicity(&int(0)), 0);
    }
}
