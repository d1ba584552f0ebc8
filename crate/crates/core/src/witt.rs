//! The Witt algebra W = Der A(1) with basis `e_i = x^{i+1} d/dx`,
//! `-1 <= i <= p-2`, its dual space, the bracket, the p-map and the
//! characteristic-polynomial invariant.

use std::fmt;

use thiserror::Error;

use crate::ffield::{Field, FieldElem, FieldError};
use crate::sympoly::{berkowitz_charpoly, MultiPoly, Var};
use crate::trunc::{TruncPoly, TruncSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WittError {
    #[error("malformed element {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("the p-th power of {0} is not a derivation of A(1)")]
    NotDerivation(String),
    #[error("characteristic polynomial of {elem} has a nonzero X^{power} coefficient")]
    ShapeViolation { elem: String, power: usize },
    #[error("exponent {0} outside 1..=p")]
    Exponent(u32),
}

macro_rules! coord_type {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq, Eq, Hash)]
        pub struct $name {
            coeffs: Vec<FieldElem>,
        }

        impl $name {
            /// Coordinates for indices `-1..=p-2`, in order.
            pub fn from_coeffs(coeffs: Vec<FieldElem>) -> Self {
                assert!(coeffs.len() >= 5, "need p >= 5 coordinates");
                let ctx = coeffs[0].ctx();
                assert_eq!(coeffs.len(), ctx.characteristic() as usize, "need exactly p coordinates");
                assert!(coeffs.iter().all(|c| c.ctx() == ctx), "mixed field contexts");
                $name { coeffs }
            }

            pub fn zero(ctx: Field) -> Self {
                $name { coeffs: vec![ctx.zero(); ctx.characteristic() as usize] }
            }

            pub fn basis(ctx: Field, i: i32) -> Self {
                let mut out = Self::zero(ctx);
                out.set(i, ctx.one());
                out
            }

            pub fn from_pairs(ctx: Field, pairs: &[(i32, FieldElem)]) -> Self {
                let mut out = Self::zero(ctx);
                for &(i, c) in pairs {
                    out.set(i, out.coeff(i) + c);
                }
                out
            }

            pub fn ctx(&self) -> Field {
                self.coeffs[0].ctx()
            }

            pub fn p(&self) -> usize {
                self.coeffs.len()
            }

            pub fn coeff(&self, i: i32) -> FieldElem {
                self.coeffs[(i + 1) as usize]
            }

            pub fn set(&mut self, i: i32, c: FieldElem) {
                self.coeffs[(i + 1) as usize] = c;
            }

            pub fn coeffs(&self) -> &[FieldElem] {
                &self.coeffs
            }

            pub fn is_zero(&self) -> bool {
                self.coeffs.iter().all(|c| c.is_zero())
            }

            pub fn add(&self, other: &Self) -> Self {
                $name { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect() }
            }

            pub fn sub(&self, other: &Self) -> Self {
                $name { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a - *b).collect() }
            }

            pub fn scale(&self, c: FieldElem) -> Self {
                $name { coeffs: self.coeffs.iter().map(|a| *a * c).collect() }
            }

            pub fn embed(&self, into: Field) -> Result<Self, FieldError> {
                Ok($name { coeffs: self.coeffs.iter().map(|c| into.embed(*c)).collect::<Result<_, _>>()? })
            }

            /// Preimage in `base` of every coordinate, if all lie there.
            pub fn restrict(&self, base: Field) -> Option<Self> {
                Some($name { coeffs: self.coeffs.iter().map(|c| base.restrict(*c)).collect::<Option<_>>()? })
            }

            /// Parses `index:elem` pairs separated by `;`. The empty string is zero.
            pub fn parse(ctx: Field, text: &str) -> Result<Self, WittError> {
                let fail = |reason: String| WittError::Parse { text: text.to_string(), reason };
                let mut out = Self::zero(ctx);
                let top = ctx.characteristic() as i32 - 2;
                let mut seen = vec![false; ctx.characteristic() as usize];
                if text.trim().is_empty() {
                    return Ok(out);
                }
                for part in text.split(';') {
                    let (idx, val) = part.split_once(':').ok_or_else(|| fail(format!("expected index:elem in {part:?}")))?;
                    let idx: i32 = idx.trim().parse().map_err(|_| fail(format!("bad index {idx:?}")))?;
                    if !(-1..=top).contains(&idx) {
                        return Err(fail(format!("index {idx} outside -1..={top}")));
                    }
                    if seen[(idx + 1) as usize] {
                        return Err(fail(format!("index {idx} repeated")));
                    }
                    seen[(idx + 1) as usize] = true;
                    out.set(idx, FieldElem::parse(ctx, val.trim())?);
                }
                Ok(out)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let parts: Vec<String> = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| format!("{}:{}", k as i32 - 1, c))
                    .collect();
                write!(f, "{}", parts.join(";"))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}[{}]@{:?}", stringify!($name), self, self.ctx())
            }
        }
    };
}

coord_type!(WittElem, "An element `sum w_i e_i` of W.");
coord_type!(Character, "An element `sum chi_i e_i'` of the dual space, `e_i'(e_j) = delta_ij`.");

impl WittElem {
    /// Least `i` with `w_i != 0`.
    pub fn degree(&self) -> Option<i32> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|k| k as i32 - 1)
    }

    /// `w(x) = sum w_i x^{i+1}`.
    pub fn series(&self) -> TruncPoly {
        TruncSeries::new(self.coeffs.clone())
    }

    pub fn from_series(s: &TruncPoly) -> WittElem {
        WittElem::from_coeffs(s.coeffs().to_vec())
    }
}

impl Character {
    pub fn pair(&self, w: &WittElem) -> FieldElem {
        self.coeffs.iter().zip(w.coeffs()).fold(self.ctx().zero(), |acc, (a, b)| acc + *a * *b)
    }
}

/// `[e_i, e_j] = (j - i) e_{i+j}`, zero outside the index range.
pub fn bracket(u: &WittElem, v: &WittElem) -> WittElem {
    assert_eq!(u.ctx(), v.ctx(), "field context mismatch");
    let ctx = u.ctx();
    let top = u.p() as i32 - 2;
    let mut out = WittElem::zero(ctx);
    for i in -1..=top {
        let a = u.coeff(i);
        if a.is_zero() {
            continue;
        }
        for j in -1..=top {
            let b = v.coeff(j);
            if b.is_zero() || !(-1..=top).contains(&(i + j)) {
                continue;
            }
            let c = out.coeff(i + j) + a * b * ctx.from_i64((j - i) as i64);
            out.set(i + j, c);
        }
    }
    out
}

pub type Matrix = Vec<Vec<FieldElem>>;

/// Matrix of `w` on the basis `1, x, ..., x^{p-1}`; column `j` holds `w(x^j)`.
pub fn as_endo(w: &WittElem) -> Matrix {
    let p = w.p();
    let ctx = w.ctx();
    let mut m = vec![vec![ctx.zero(); p]; p];
    for j in 1..p {
        for i in -1..=(p as i32 - 2) {
            let row = i + j as i32;
            if row < 0 || row >= p as i32 {
                continue;
            }
            m[row as usize][j] += w.coeff(i) * ctx.from_i64(j as i64);
        }
    }
    m
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let zero = a[0][0].ctx().zero();
    let mut out = vec![vec![zero; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Reads a derivation back from its matrix, verifying the Leibniz rule
/// `D(x^j) = j x^{j-1} D(x)` on every basis monomial.
pub fn from_endo(m: &Matrix) -> Option<WittElem> {
    let p = m.len();
    let ctx = m[0][0].ctx();
    let dx: Vec<FieldElem> = (0..p).map(|r| m[r][1]).collect();
    for j in 0..p {
        for r in 0..p {
            // coefficient of x^r in j x^{j-1} D(x)
            let expected = if j == 0 || r + 1 < j { ctx.zero() } else { dx[r + 1 - j] * ctx.from_i64(j as i64) };
            if m[r][j] != expected {
                return None;
            }
        }
    }
    Some(WittElem::from_coeffs(dx))
}

/// `w^{[p]}`: the p-th power of `w` as an operator on A(1).
pub fn p_power(w: &WittElem) -> Result<WittElem, WittError> {
    let m = as_endo(w);
    let mut acc = m.clone();
    for _ in 1..w.p() {
        acc = mat_mul(&acc, &m);
    }
    from_endo(&acc).ok_or_else(|| WittError::NotDerivation(w.to_string()))
}

/// Coefficients `c_0..c_p` of `det(X I - as_endo(w))`.
pub fn char_poly(w: &WittElem) -> Vec<FieldElem> {
    berkowitz_charpoly(&as_endo(w), &w.ctx().one())
}

/// The invariant `phi(w)`: `char(w) = X^p + phi(w) X`. Errors if any other
/// coefficient below `X^p` is nonzero.
pub fn char_phi(w: &WittElem) -> Result<FieldElem, WittError> {
    let cp = char_poly(w);
    let p = w.p();
    for (k, c) in cp.iter().enumerate() {
        if k != 1 && k != p && !c.is_zero() {
            return Err(WittError::ShapeViolation { elem: w.to_string(), power: k });
        }
    }
    Ok(cp[1])
}

/// The unique `lambda` with `w^{[p]} = lambda w`, for nonzero `w`.
pub fn p_eigenvalue(w: &WittElem) -> Result<Option<FieldElem>, WittError> {
    let Some(d) = w.degree() else { return Ok(None) };
    let pw = p_power(w)?;
    let lambda = pw.coeff(d) / w.coeff(d);
    Ok((pw == w.scale(lambda)).then_some(lambda))
}

/// `w^i(x)`, the i-fold application of `w` to `x`, for `1 <= i <= p`.
pub fn d_power(w: &WittElem, i: u32) -> Result<TruncPoly, WittError> {
    let p = w.p() as u32;
    if !(1..=p).contains(&i) {
        return Err(WittError::Exponent(i));
    }
    let ws = w.series();
    let mut h = TruncSeries::monomial(&w.ctx().one(), p as usize, 1);
    for _ in 0..i {
        h = h.derivative().mul(&ws);
    }
    Ok(h)
}

/// `phi` as a polynomial in the coordinates `X_{-1}..X_{p-2}`.
/// Only offered for `p <= 7`; the expansion grows quickly beyond that.
pub fn char_phi_symbolic(p: u32) -> Result<MultiPoly, WittError> {
    assert!(p <= 7, "symbolic phi is only offered for p <= 7");
    let n = p as usize;
    let mut m = vec![vec![MultiPoly::zero(p); n]; n];
    for j in 1..n {
        for i in -1..=(p as i32 - 2) {
            let row = i + j as i32;
            if (0..p as i32).contains(&row) {
                let add = MultiPoly::var(p, Var::X(i)).scale(j as i64);
                m[row as usize][j] = m[row as usize][j].add(&add);
            }
        }
    }
    let cp = berkowitz_charpoly(&m, &MultiPoly::constant(p, 1));
    for (k, c) in cp.iter().enumerate() {
        if k != 1 && k != n && !c.is_zero() {
            return Err(WittError::ShapeViolation { elem: "generic element".into(), power: k });
        }
    }
    Ok(cp[1].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::make_field;
    use crate::trunc::{act_witt, Automorphism};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(ctx: Field, i: i32) -> WittElem {
        WittElem::basis(ctx, i)
    }

    #[test]
    fn bracket_examples() {
        for p in [5u32, 7] {
            let f = make_field(p, 1).unwrap();
            assert_eq!(bracket(&e(f, -1), &e(f, 1)), e(f, 0).scale(f.from_i64(2)));
            assert!(bracket(&e(f, 1), &e(f, 1)).is_zero());
            assert!(bracket(&e(f, 2), &e(f, p as i32 - 2)).is_zero());
        }
    }

    #[test]
    fn jacobi_and_antisymmetry_all_basis_triples() {
        for p in [5u32, 7, 11, 13] {
            let f = make_field(p, 1).unwrap();
            let top = p as i32 - 2;
            for i in -1..=top {
                for j in -1..=top {
                    let (a, b) = (e(f, i), e(f, j));
                    assert!(bracket(&a, &b).add(&bracket(&b, &a)).is_zero());
                    for k in -1..=top {
                        let c = e(f, k);
                        let jac = bracket(&a, &bracket(&b, &c))
                            .add(&bracket(&b, &bracket(&c, &a)))
                            .add(&bracket(&c, &bracket(&a, &b)));
                        assert!(jac.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn endo_examples() {
        let f = make_field(7, 1).unwrap();
        let d = as_endo(&e(f, -1));
        let x0 = as_endo(&e(f, 0));
        for j in 0..7 {
            for r in 0..7 {
                let want = if j >= 1 && r == j - 1 { f.from_i64(j as i64) } else { f.zero() };
                assert_eq!(d[r][j], want);
                let want0 = if r == j { f.from_i64(j as i64) } else { f.zero() };
                assert_eq!(x0[r][j], want0);
            }
        }
        let w = WittElem::parse(f, "-1:3;2:5;5:1").unwrap();
        let m = as_endo(&w);
        let col1: Vec<FieldElem> = (0..7).map(|r| m[r][1]).collect();
        assert_eq!(col1, w.coeffs().to_vec());
        assert_eq!(from_endo(&m), Some(w));
    }

    #[test]
    fn p_power_examples() {
        for p in [5u32, 7, 11] {
            let f = make_field(p, 1).unwrap();
            assert_eq!(p_power(&e(f, 0)).unwrap(), e(f, 0));
            assert!(p_power(&e(f, 1)).unwrap().is_zero());
            for a in f.elements() {
                let d = e(f, -1).add(&e(f, p as i32 - 2).scale(a));
                assert_eq!(p_power(&d).unwrap(), d.scale(-a));
                assert_eq!(char_phi(&d).unwrap(), a);
            }
        }
    }

    #[test]
    fn char_phi_examples() {
        let f = make_field(7, 1).unwrap();
        assert!(char_phi(&e(f, 1)).unwrap().is_zero());
        assert_eq!(char_phi(&e(f, 0)).unwrap(), f.from_i64(-1));
        // X^7 - X: direct oracle, the diagonal matrix diag(0..6)
        let cp = char_poly(&e(f, 0));
        let direct = f.elements().all(|x| {
            let v = cp.iter().rev().fold(f.zero(), |acc, c| acc * x + *c);
            v == (0..7).fold(f.one(), |acc, k| acc * (x - f.from_i64(k)))
        });
        assert!(direct);
    }

    #[test]
    fn d_power_examples() {
        for p in [5u32, 7, 11] {
            let f = make_field(p, 1).unwrap();
            for a in f.elements() {
                let d = e(f, -1).add(&e(f, p as i32 - 2).scale(a));
                let one = d_power(&d, 1).unwrap();
                let mut expect = TruncSeries::monomial(&f.one(), p as usize, 0);
                expect.set(p as usize - 1, a);
                assert_eq!(one, expect);
                for i in 2..p {
                    // a (p-1)!/(p-i)! x^{p-i}
                    let fact = (p - i + 1..p).fold(f.one(), |acc, k| acc * f.from_i64(k as i64));
                    let mut want = TruncSeries::zero(&f.one(), p as usize);
                    want.set((p - i) as usize, a * fact);
                    assert_eq!(d_power(&d, i).unwrap(), want, "p={p} i={i}");
                }
                let mut minus_ax = TruncSeries::zero(&f.one(), p as usize);
                minus_ax.set(1, -a);
                assert_eq!(d_power(&d, p - 1).unwrap(), minus_ax);
            }
        }
        let f5 = make_field(5, 1).unwrap();
        let a = f5.from_i64(3);
        let d = e(f5, -1).add(&e(f5, 3).scale(a));
        assert_eq!(*d_power(&d, 2).unwrap().coeff(3), f5.from_i64(4) * a);
    }

    #[test]
    fn restrictedness_bridge_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [7u32, 11, 13] {
            let f = make_field(p, 1).unwrap();
            for _ in 0..200 {
                let w = WittElem::from_coeffs((0..p).map(|_| f.elem(rng.gen_range(0..p))).collect());
                let phi = char_phi(&w).unwrap();
                assert_eq!(p_power(&w).unwrap(), w.scale(-phi));
                let t = f.elem(rng.gen_range(1..p));
                assert_eq!(char_phi(&w.scale(t)).unwrap(), phi * t.pow(p as u64 - 1));
                let s = Automorphism::new(
                    f.elem(rng.gen_range(1..p)),
                    (2..p).map(|_| f.elem(rng.gen_range(0..p))).collect(),
                )
                .unwrap();
                assert_eq!(act_witt(&s, &p_power(&w).unwrap()), p_power(&act_witt(&s, &w)).unwrap());
            }
        }
    }

    #[test]
    fn symbolic_phi_agrees_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [5u32, 7] {
            let f = make_field(p, 1).unwrap();
            let sym = char_phi_symbolic(p).unwrap();
            let weights: std::collections::BTreeMap<Var, i64> = (-1..=p as i32 - 2).map(|j| (Var::X(j), 1)).collect();
            assert!(sym.is_weighted_homogeneous(&weights, p as i64 - 1));
            for _ in 0..100 {
                let w = WittElem::from_coeffs((0..p).map(|_| f.elem(rng.gen_range(0..p))).collect());
                let v = sym.evaluate(f, |x| match x {
                    Var::X(j) => Some(w.coeff(j)),
                    _ => None,
                });
                assert_eq!(v.unwrap(), char_phi(&w).unwrap());
            }
        }
    }

    #[test]
    fn text_form() {
        let f = make_field(7, 1).unwrap();
        let w = WittElem::parse(f, "-1:1;3:2").unwrap();
        assert_eq!(w, e(f, -1).add(&e(f, 3).scale(f.from_i64(2))));
        assert_eq!(w.to_string(), "-1:1;3:2");
        assert!(WittElem::parse(f, "").unwrap().is_zero());
        for bad in ["6:1", "-2:1", "1:1;1:2", "1", "x:1", "1:7"] {
            assert!(WittElem::parse(f, bad).is_err(), "{bad}");
        }
    }
}
