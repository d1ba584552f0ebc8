//! Sparse multivariate polynomials over F_p.
//!
//! Variables are the coordinate functions `X_j` (j = -1..p-2), the unipotent
//! coordinates `b_k`, and one parameter `A`. Exponents are unbounded. Terms are
//! kept in graded lexicographic order, which is also the printing order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ffield::{Field, FieldElem};
use crate::ring::Ring;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("malformed polynomial {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("expression {index} is not triangular: {reason}")]
    NotTriangular { index: usize, reason: String },
    #[error("leading unit of expression {index} (variable {var}) vanishes mod p")]
    VanishingUnit { index: usize, var: Var },
    #[error("no value supplied for variable {0}")]
    Unassigned(Var),
    #[error("value for {0} does not lie in the prime field")]
    NotPrimeField(Var),
}

/// Variable order: `A < b_2 < b_3 < ... < X_-1 < X_0 < ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    A,
    B(u32),
    X(i32),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::A => write!(f, "A"),
            Var::B(k) => write!(f, "b_{k}"),
            Var::X(j) => write!(f, "X_{j}"),
        }
    }
}

/// A power product, stored sparsely with strictly increasing variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Monomial {
        Monomial(vec![(v, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, u32)>) -> Monomial {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map_or(0, |&(_, e)| e)
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < v {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == v {
                let f = other.0[j].1;
                if f > e {
                    return None;
                }
                if e > f {
                    out.push((v, e - f));
                }
                j += 1;
            } else {
                out.push((v, e));
            }
        }
        (j == other.0.len()).then_some(Monomial(out))
    }

    pub fn weighted_degree(&self, weights: &BTreeMap<Var, i64>) -> Option<i64> {
        let mut total = 0i64;
        for &(v, e) in &self.0 {
            total += weights.get(&v)? * e as i64;
        }
        Some(total)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree, then exponents compared in
    /// variable order (larger exponent of the first differing variable wins).
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (mut i, mut j) = (0, 0);
            loop {
                match (self.0.get(i), other.0.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(&(a, ea)), Some(&(b, eb))) => match a.cmp(&b) {
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => {
                            if ea != eb {
                                return ea.cmp(&eb);
                            }
                            i += 1;
                            j += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (n, &(v, e)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    p: u32,
    terms: BTreeMap<Monomial, u32>,
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[p={}]({})", self.p, self)
    }
}

fn mulmod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

fn invmod(a: u32, p: u32) -> u32 {
    let mut r = 1u32;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, base, p);
        }
        base = mulmod(base, base, p);
        e >>= 1;
    }
    r
}

impl MultiPoly {
    pub fn zero(p: u32) -> MultiPoly {
        MultiPoly { p, terms: BTreeMap::new() }
    }

    pub fn constant(p: u32, c: i64) -> MultiPoly {
        let c = c.rem_euclid(p as i64) as u32;
        let mut out = MultiPoly::zero(p);
        if c != 0 {
            out.terms.insert(Monomial::one(), c);
        }
        out
    }

    pub fn var(p: u32, v: Var) -> MultiPoly {
        MultiPoly::term(p, 1, Monomial::var(v))
    }

    pub fn term(p: u32, c: i64, m: Monomial) -> MultiPoly {
        let c = c.rem_euclid(p as i64) as u32;
        let mut out = MultiPoly::zero(p);
        if c != 0 {
            out.terms.insert(m, c);
        }
        out
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, u32)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> u32 {
        self.coeff(&Monomial::one())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = self.terms.keys().flat_map(|m| m.0.iter().map(|&(v, _)| v)).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn leading(&self) -> Option<(&Monomial, u32)> {
        self.terms.iter().next_back().map(|(m, &c)| (m, c))
    }

    fn add_term(&mut self, m: Monomial, c: u32) {
        if c == 0 {
            return;
        }
        let p = self.p;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = (*e.get() + c) % p;
                if s == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.p, other.p, "characteristic mismatch");
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly { p: self.p, terms: self.terms.iter().map(|(m, &c)| (m.clone(), self.p - c)).collect() }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: i64) -> MultiPoly {
        let c = c.rem_euclid(self.p as i64) as u32;
        if c == 0 {
            return MultiPoly::zero(self.p);
        }
        MultiPoly { p: self.p, terms: self.terms.iter().map(|(m, &d)| (m.clone(), mulmod(c, d, self.p))).collect() }
    }

    pub fn mul_term(&self, m: &Monomial, c: u32) -> MultiPoly {
        let mut out = MultiPoly::zero(self.p);
        if c % self.p == 0 {
            return out;
        }
        for (n, &d) in &self.terms {
            out.terms.insert(n.mul(m), mulmod(c, d, self.p));
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.p, other.p, "characteristic mismatch");
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut acc: BTreeMap<Monomial, u64> = BTreeMap::new();
        let p = self.p as u64;
        for (m, &c) in &small.terms {
            for (n, &d) in &big.terms {
                let e = acc.entry(m.mul(n)).or_insert(0);
                *e = (*e + c as u64 * d as u64) % p;
            }
        }
        MultiPoly { p: self.p, terms: acc.into_iter().filter(|&(_, c)| c != 0).map(|(m, c)| (m, c as u32)).collect() }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        self.pow_u32(e)
    }

    /// Splits into weighted-homogeneous components. Panics if a variable has
    /// no weight.
    pub fn weighted_components(&self, weights: &BTreeMap<Var, i64>) -> BTreeMap<i64, MultiPoly> {
        let mut out: BTreeMap<i64, MultiPoly> = BTreeMap::new();
        for (m, &c) in &self.terms {
            let w = m.weighted_degree(weights).unwrap_or_else(|| panic!("no weight for a variable of {m}"));
            out.entry(w).or_insert_with(|| MultiPoly::zero(self.p)).terms.insert(m.clone(), c);
        }
        out
    }

    /// Components by ordinary total degree.
    pub fn homogeneous_components(&self) -> BTreeMap<u32, MultiPoly> {
        let mut out: BTreeMap<u32, MultiPoly> = BTreeMap::new();
        for (m, &c) in &self.terms {
            out.entry(m.degree()).or_insert_with(|| MultiPoly::zero(self.p)).terms.insert(m.clone(), c);
        }
        out
    }

    /// True when every monomial has weighted degree `d`.
    pub fn is_weighted_homogeneous(&self, weights: &BTreeMap<Var, i64>, d: i64) -> bool {
        self.terms.keys().all(|m| m.weighted_degree(weights) == Some(d))
    }

    /// Replaces every assigned variable by its polynomial; unassigned
    /// variables are kept.
    pub fn substitute(&self, assignment: &BTreeMap<Var, MultiPoly>) -> MultiPoly {
        let mut power_cache: BTreeMap<(Var, u32), MultiPoly> = BTreeMap::new();
        let mut out = MultiPoly::zero(self.p);
        for (m, &c) in &self.terms {
            let mut kept = Vec::new();
            let mut acc = MultiPoly::constant(self.p, c as i64);
            for &(v, e) in &m.0 {
                match assignment.get(&v) {
                    Some(q) => {
                        let pw = power_cache.entry((v, e)).or_insert_with(|| q.pow(e)).clone();
                        acc = acc.mul(&pw);
                    }
                    None => kept.push((v, e)),
                }
                if acc.is_zero() {
                    break;
                }
            }
            if !kept.is_empty() {
                acc = acc.mul_term(&Monomial(kept), 1);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Substitutes prime-field constants.
    pub fn specialize(&self, assignment: &BTreeMap<Var, i64>) -> MultiPoly {
        let map: BTreeMap<Var, MultiPoly> =
            assignment.iter().map(|(&v, &c)| (v, MultiPoly::constant(self.p, c))).collect();
        self.substitute(&map)
    }

    /// Like [`substitute`](Self::substitute) with field elements, which must lie in F_p.
    pub fn substitute_elems(&self, assignment: &BTreeMap<Var, FieldElem>) -> Result<MultiPoly, PolyError> {
        let mut map = BTreeMap::new();
        for (&v, x) in assignment {
            if x.ctx().degree() != 1 {
                return Err(PolyError::NotPrimeField(v));
            }
            map.insert(v, MultiPoly::constant(self.p, x.encoding() as i64));
        }
        Ok(self.substitute(&map))
    }

    /// Evaluates at a point of `field` (coefficients are mapped through F_p).
    pub fn evaluate(&self, field: Field, value: impl Fn(Var) -> Option<FieldElem>) -> Result<FieldElem, PolyError> {
        assert_eq!(field.characteristic(), self.p);
        let mut total = field.zero();
        let mut cache: BTreeMap<Var, FieldElem> = BTreeMap::new();
        for (m, &c) in &self.terms {
            let mut acc = field.from_i64(c as i64);
            for &(v, e) in &m.0 {
                let x = match cache.get(&v) {
                    Some(x) => *x,
                    None => {
                        let x = value(v).ok_or(PolyError::Unassigned(v))?;
                        cache.insert(v, x);
                        x
                    }
                };
                acc *= x.pow(e as u64);
            }
            total += acc;
        }
        Ok(total)
    }

    /// Exact division test: `Some(h)` with `self == g * h`, else `None`.
    ///
    /// A single nonzero polynomial is a Groebner basis of the ideal it
    /// generates, so the remainder of multivariate division by `g` vanishes
    /// exactly when `g` divides `self`.
    pub fn divides_into(&self, g: &MultiPoly) -> Option<MultiPoly> {
        assert!(!g.is_zero(), "division by the zero polynomial");
        let (lm, lc) = g.leading().map(|(m, c)| (m.clone(), c)).unwrap();
        let lc_inv = invmod(lc, self.p);
        let mut rest = self.clone();
        let mut quotient = MultiPoly::zero(self.p);
        while let Some((m, c)) = rest.leading().map(|(m, c)| (m.clone(), c)) {
            let q = m.div(&lm)?;
            let coef = mulmod(c, lc_inv, self.p);
            quotient.add_term(q.clone(), coef);
            rest = rest.sub(&g.mul_term(&q, coef));
        }
        Some(quotient)
    }

    pub fn parse(p: u32, text: &str) -> Result<MultiPoly, PolyError> {
        let fail = |reason: &str| PolyError::Parse { text: text.to_string(), reason: reason.to_string() };
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(fail("empty"));
        }
        // split into signed terms; a '-' right after '_' or '{' belongs to an index
        let bytes = cleaned.as_bytes();
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut negative = false;
        for (n, &ch) in bytes.iter().enumerate() {
            let sign = ch == b'+' || ch == b'-';
            let index_sign = ch == b'-' && n > 0 && (bytes[n - 1] == b'_' || bytes[n - 1] == b'{');
            if sign && !index_sign {
                if n > 0 {
                    if cur.is_empty() {
                        return Err(fail("empty term"));
                    }
                    pieces.push((negative, std::mem::take(&mut cur)));
                }
                negative = ch == b'-';
            } else {
                cur.push(ch as char);
            }
        }
        if cur.is_empty() {
            return Err(fail("empty term"));
        }
        pieces.push((negative, cur));
        let mut out = MultiPoly::zero(p);
        for (neg, piece) in pieces {
            let mut coef: i64 = 1;
            let mut pairs = Vec::new();
            for factor in piece.split('*') {
                if factor.is_empty() {
                    return Err(fail("empty factor"));
                }
                if factor.bytes().all(|b| b.is_ascii_digit()) {
                    let c: i64 = factor.parse().map_err(|_| fail("coefficient out of range"))?;
                    coef = coef * (c % p as i64) % p as i64;
                    continue;
                }
                let (base, exp) = match factor.split_once('^') {
                    Some((b, e)) => {
                        let e = e.trim_start_matches('{').trim_end_matches('}');
                        if e.is_empty() || !e.bytes().all(|b| b.is_ascii_digit()) {
                            return Err(fail("bad exponent"));
                        }
                        (b, e.parse::<u32>().map_err(|_| fail("bad exponent"))?)
                    }
                    None => (factor, 1),
                };
                let var = parse_var(base).ok_or_else(|| fail("unknown variable"))?;
                pairs.push((var, exp));
            }
            let c = if neg { -coef } else { coef };
            out = out.add(&MultiPoly::term(p, c, Monomial::from_pairs(pairs)));
        }
        Ok(out)
    }
}

fn parse_var(s: &str) -> Option<Var> {
    if s == "A" {
        return Some(Var::A);
    }
    let (head, idx) = s.split_once('_')?;
    let idx = idx.trim_start_matches('{').trim_end_matches('}');
    let valid = !idx.is_empty()
        && idx.strip_prefix('-').unwrap_or(idx).bytes().all(|b| b.is_ascii_digit())
        && idx != "-";
    if !valid {
        return None;
    }
    match head {
        "X" => idx.parse().ok().map(Var::X),
        "b" => idx.parse().ok().map(Var::B),
        _ => None,
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, &c)) in self.terms.iter().enumerate() {
            let (neg, mag) = if c > self.p / 2 { (true, self.p - c) } else { (false, c) };
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl Ring for MultiPoly {
    fn zero_like(&self) -> Self {
        MultiPoly::zero(self.p)
    }
    fn one_like(&self) -> Self {
        MultiPoly::constant(self.p, 1)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        MultiPoly::constant(self.p, n)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.sub(rhs)
    }
    fn times(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn negated(&self) -> Self {
        self.neg()
    }
}

/// Solves a triangular system `exprs[n] = new_vars[n]` for `solve_vars`.
///
/// `exprs[n]` must be `u_n * solve_vars[n] + (polynomial in solve_vars[..n])`
/// with `u_n` a nonzero constant. Returns `solve_vars[n]` as polynomials in
/// `new_vars`.
pub fn triangular_invert(exprs: &[MultiPoly], solve_vars: &[Var], new_vars: &[Var]) -> Result<Vec<MultiPoly>, PolyError> {
    assert_eq!(exprs.len(), solve_vars.len());
    assert_eq!(exprs.len(), new_vars.len());
    let mut solved: BTreeMap<Var, MultiPoly> = BTreeMap::new();
    let mut out = Vec::with_capacity(exprs.len());
    for (n, e) in exprs.iter().enumerate() {
        let p = e.characteristic();
        let v = solve_vars[n];
        let unit = e.coeff(&Monomial::var(v));
        let rest = e.sub(&MultiPoly::term(p, unit as i64, Monomial::var(v)));
        if let Some(bad) = rest.vars().into_iter().find(|w| solve_vars[n..].contains(w)) {
            return Err(PolyError::NotTriangular { index: n, reason: format!("{bad} occurs outside the leading term") });
        }
        if let Some(bad) = rest.vars().into_iter().find(|w| !solve_vars[..n].contains(w)) {
            return Err(PolyError::NotTriangular { index: n, reason: format!("unexpected variable {bad}") });
        }
        if unit == 0 {
            return Err(PolyError::VanishingUnit { index: n, var: v });
        }
        let value = MultiPoly::var(p, new_vars[n]).sub(&rest.substitute(&solved)).scale(invmod(unit, p) as i64);
        solved.insert(v, value.clone());
        out.push(value);
    }
    Ok(out)
}

/// Generic division-free characteristic polynomial `det(X*I - M)` by
/// Berkowitz's algorithm; returns coefficients of `X^0..X^n`.
pub fn berkowitz_charpoly<R: Ring>(m: &[Vec<R>], one: &R) -> Vec<R> {
    let n = m.len();
    let zero = one.zero_like();
    // coefficients of the char poly of the leading k x k block, highest first
    let mut poly: Vec<R> = vec![one.clone()];
    for k in 0..n {
        // block: A = m[..k][..k], R row = m[k][..k], C col = m[..k][k], a = m[k][k]
        // Toeplitz column: 1, -a, -R C, -R A C, -R A^2 C, ...
        let mut col = Vec::with_capacity(k + 2);
        col.push(one.clone());
        col.push(m[k][k].negated());
        let mut v: Vec<R> = (0..k).map(|i| m[i][k].clone()).collect();
        for _ in 0..k {
            let rc = (0..k).fold(zero.clone(), |acc, j| acc.plus(&m[k][j].times(&v[j])));
            col.push(rc.negated());
            v = (0..k).map(|i| (0..k).fold(zero.clone(), |acc, j| acc.plus(&m[i][j].times(&v[j])))).collect();
        }
        // new = T * poly, T lower-triangular Toeplitz of size (k+2) x (k+1)
        let mut next = vec![zero.clone(); k + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, c) in poly.iter().enumerate() {
                if i >= j && i - j < col.len() {
                    *slot = slot.plus(&col[i - j].times(c));
                }
            }
        }
        poly = next;
    }
    poly.reverse();
    poly
}
