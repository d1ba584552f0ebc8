//! Exact arithmetic in F_p and its extensions F_{p^n}.
//!
//! Every field F_{p^n} is built from the least monic irreducible polynomial of
//! degree n over F_p, where candidates are compared lexicographically on their
//! ascending coefficient sequence `(c_0, c_1, ..., c_{n-1})`. Elements are
//! stored as their integer encoding `sum c_i p^i`, which is also the
//! deterministic element order used for every tie-break in the crate.
//!
//! Contexts are interned: `make_field(p, n)` returns the same `&'static`
//! context on every call, which keeps `FieldElem` a small `Copy` value.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

use crate::ring::Ring;

/// Largest field order we are willing to tabulate.
pub const MAX_FIELD_SIZE: u64 = 1 << 22;
/// Default bound on the relative extension degree searched by [`nth_root`].
pub const DEFAULT_ROOT_EXT_BOUND: u32 = 4;

pub const MAX_DEGREE: usize = 24;
const ADD_TABLE_LIMIT: u32 = 729;

pub type Field = &'static FieldCtx;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("characteristic must exceed 3, got {0}")]
    CharacteristicTooSmall(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of order {p}^{degree} exceeds the supported size {MAX_FIELD_SIZE}")]
    TooLarge { p: u32, degree: u32 },
    #[error("cannot embed F_{p}^{from} into F_{p}^{to}")]
    NoEmbedding { p: u32, from: u32, to: u32 },
    #[error("no {r}-th root of {value} in any extension of relative degree <= {bound}")]
    NoRoot { value: String, r: u64, bound: u32 },
    #[error("malformed field element {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Option<Vec<u32>>,
}

pub struct FieldCtx {
    p: u32,
    degree: u32,
    size: u32,
    modulus: Vec<u32>,
    tables: Tables,
    embed_gens: [OnceLock<Option<u32>>; MAX_DEGREE + 1],
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.p, self.degree)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
    }
}
impl Eq for FieldCtx {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Returns the interned context for F_{p^degree}.
pub fn make_field(p: u32, degree: u32) -> Result<Field, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if p <= 3 {
        return Err(FieldError::CharacteristicTooSmall(p));
    }
    if degree == 0 {
        return Err(FieldError::ZeroDegree);
    }
    let size = (p as u64).checked_pow(degree);
    match size {
        Some(s) if s <= MAX_FIELD_SIZE && (degree as usize) <= MAX_DEGREE => {}
        _ => return Err(FieldError::TooLarge { p, degree }),
    }
    static REGISTRY: OnceLock<Mutex<HashMap<(u32, u32), Field>>> = OnceLock::new();
    let registry = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = registry.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(ctx) = guard.get(&(p, degree)) {
        return Ok(ctx);
    }
    let ctx: Field = Box::leak(Box::new(FieldCtx::build(p, degree)));
    guard.insert((p, degree), ctx);
    Ok(ctx)
}

// ---------------------------------------------------------------------------
// dense polynomials over F_p used while constructing fields

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let n = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    // reduce by the monic modulus
    for k in (n..prod.len()).rev() {
        let c = prod[k] % p as u64;
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for (j, &m) in modulus[..n].iter().enumerate() {
            let idx = k - n + j;
            prod[idx] = (prod[idx] + (p as u64 - c) * m as u64) % p as u64;
        }
    }
    let mut out: Vec<u32> = prod.into_iter().take(n).map(|c| (c % p as u64) as u32).collect();
    poly_trim(&mut out);
    out
}

fn poly_powmod(base: &[u32], mut e: u64, modulus: &[u32], p: u32) -> Vec<u32> {
    let mut acc = vec![1u32];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, modulus, p);
        }
        e >>= 1;
        if e > 0 {
            b = poly_mulmod(&b, &b, modulus, p);
        }
    }
    acc
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p) as u64;
    while r.len() > db {
        let k = r.len() - 1;
        let c = r[k] as u64 * lead_inv % p as u64;
        for j in 0..=db {
            let idx = k - db + j;
            r[idx] = ((r[idx] as u64 + (p as u64 - c) * b[j] as u64) % p as u64) as u32;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// Rabin's irreducibility test for a monic polynomial of degree n over F_p.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let n = f.len() - 1;
    if n == 1 {
        return true;
    }
    let x = vec![0u32, 1];
    let frob = |k: usize| -> Vec<u32> { poly_powmod(&x, (p as u64).pow(k as u32), f, p) };
    let full = frob(n);
    if full != x {
        return false;
    }
    for r in prime_factors(n as u64) {
        let mut h = frob(n / r as usize);
        // h - x
        if h.len() < 2 {
            h.resize(2, 0);
        }
        h[1] = (h[1] + p - 1) % p;
        poly_trim(&mut h);
        let g = poly_gcd(f, &h, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn least_irreducible(p: u32, degree: u32) -> Vec<u32> {
    let n = degree as usize;
    let count = (p as u64).pow(degree);
    for k in 0..count {
        // c_0 is the most significant position of the lexicographic order
        let mut coeffs = vec![0u32; n + 1];
        let mut rest = k;
        for i in (0..n).rev() {
            coeffs[i] = (rest % p as u64) as u32;
            rest /= p as u64;
        }
        coeffs[n] = 1;
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn decode(v: u32, p: u32, degree: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(degree as usize);
    let mut rest = v;
    for _ in 0..degree {
        out.push(rest % p);
        rest /= p;
    }
    out
}

fn encode(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0u32, |acc, &d| acc * p + d)
}

impl FieldCtx {
    fn build(p: u32, degree: u32) -> FieldCtx {
        let modulus = least_irreducible(p, degree);
        let size = p.pow(degree);
        let order = (size - 1) as u64;
        let factors = prime_factors(order);
        let mulv = |a: u32, b: u32| -> u32 {
            let r = poly_mulmod(&decode(a, p, degree), &decode(b, p, degree), &modulus, p);
            encode(&r, p)
        };
        let powv = |a: u32, e: u64| -> u32 {
            let r = poly_powmod(&decode(a, p, degree), e, &modulus, p);
            let mut padded = r.clone();
            padded.resize(degree as usize, 0);
            encode(&padded, p)
        };
        let generator = (2..size.max(3))
            .chain(std::iter::once(1))
            .find(|&g| g < size && factors.iter().all(|&r| order == 1 || powv(g, order / r) != 1))
            .expect("multiplicative group is cyclic");
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; size as usize];
        let mut cur = 1u32;
        for k in 0..order as usize {
            exp[k] = cur;
            log[cur as usize] = k as u32;
            cur = if degree == 1 {
                ((cur as u64 * generator as u64) % p as u64) as u32
            } else {
                mulv(cur, generator)
            };
        }
        for k in order as usize..2 * order as usize {
            exp[k] = exp[k - order as usize];
        }
        let neg = (0..size)
            .map(|v| {
                let d: Vec<u32> = decode(v, p, degree).into_iter().map(|c| (p - c) % p).collect();
                encode(&d, p)
            })
            .collect();
        let add = if degree > 1 && size <= ADD_TABLE_LIMIT {
            let mut t = vec![0u32; (size * size) as usize];
            for a in 0..size {
                let da = decode(a, p, degree);
                for b in 0..size {
                    let db = decode(b, p, degree);
                    let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                    t[(a * size + b) as usize] = encode(&s, p);
                }
            }
            Some(t)
        } else {
            None
        };
        FieldCtx {
            p,
            degree,
            size,
            modulus,
            tables: Tables { exp, log, neg, add },
            embed_gens: std::array::from_fn(|_| OnceLock::new()),
        }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// Absolute degree over F_p.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Monic modulus, ascending coefficients.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn prime_field(&'static self) -> Field {
        make_field(self.p, 1).expect("prime field of an existing field")
    }

    /// The field F_{p^{degree * rel}}.
    pub fn extension(&'static self, rel: u32) -> Result<Field, FieldError> {
        make_field(self.p, self.degree * rel)
    }

    pub fn zero(&'static self) -> FieldElem {
        FieldElem { ctx: self, v: 0 }
    }

    pub fn one(&'static self) -> FieldElem {
        FieldElem { ctx: self, v: 1 }
    }

    pub fn from_i64(&'static self, n: i64) -> FieldElem {
        let v = n.rem_euclid(self.p as i64) as u32;
        FieldElem { ctx: self, v }
    }

    /// Element with the given integer encoding.
    pub fn elem(&'static self, v: u32) -> FieldElem {
        assert!(v < self.size, "encoding {v} out of range for {self:?}");
        FieldElem { ctx: self, v }
    }

    pub fn from_coeffs(&'static self, coeffs: &[u32]) -> FieldElem {
        assert!(coeffs.len() <= self.degree as usize);
        let digits: Vec<u32> = coeffs.iter().map(|c| c % self.p).collect();
        FieldElem { ctx: self, v: encode(&digits, self.p) }
    }

    /// All elements in encoding order.
    pub fn elements(&'static self) -> impl Iterator<Item = FieldElem> + Clone {
        (0..self.size).map(move |v| FieldElem { ctx: self, v })
    }

    pub fn nonzero_elements(&'static self) -> impl Iterator<Item = FieldElem> + Clone {
        (1..self.size).map(move |v| FieldElem { ctx: self, v })
    }

    /// A fixed primitive element (the one the log tables are built on).
    pub fn primitive(&'static self) -> FieldElem {
        FieldElem { ctx: self, v: self.tables.exp[1] }
    }

    #[inline]
    fn add_v(&self, a: u32, b: u32) -> u32 {
        if self.degree == 1 {
            let s = a + b;
            if s >= self.p {
                s - self.p
            } else {
                s
            }
        } else if let Some(t) = &self.tables.add {
            t[(a * self.size + b) as usize]
        } else {
            let (mut x, mut y, mut place, mut out) = (a, b, 1u32, 0u32);
            while x > 0 || y > 0 {
                let s = (x % self.p + y % self.p) % self.p;
                out += s * place;
                place *= self.p;
                x /= self.p;
                y /= self.p;
            }
            out
        }
    }

    #[inline]
    fn neg_v(&self, a: u32) -> u32 {
        if self.degree == 1 {
            if a == 0 {
                0
            } else {
                self.p - a
            }
        } else {
            self.tables.neg[a as usize]
        }
    }

    #[inline]
    fn mul_v(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.degree == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let l = self.tables.log[a as usize] + self.tables.log[b as usize];
        self.tables.exp[l as usize]
    }

    fn inv_v(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let order = self.size - 1;
        let l = self.tables.log[a as usize];
        Some(self.tables.exp[((order - l) % order) as usize])
    }

    fn log_v(&self, a: u32) -> u32 {
        self.tables.log[a as usize]
    }

    fn exp_v(&self, k: u64) -> u32 {
        self.tables.exp[(k % (self.size as u64 - 1)) as usize]
    }

    /// Image of the generator of F_{p^d} under the canonical embedding
    /// (least root of its modulus), or `None` when d does not divide the degree.
    fn embed_gen(&'static self, d: u32) -> Option<u32> {
        if d == 0 || self.degree % d != 0 || d as usize > MAX_DEGREE {
            return None;
        }
        *self.embed_gens[d as usize].get_or_init(|| {
            if d == 1 {
                // prime field: modulus X, generator 0
                return Some(0);
            }
            let small = make_field(self.p, d).ok()?;
            let m = small.modulus.clone();
            self.elements()
                .find(|y| eval_int_poly(&m, *y).is_zero())
                .map(|y| y.v)
        })
    }

    fn embed_with_gen(&'static self, x: FieldElem, gen_image: FieldElem) -> FieldElem {
        let digits = decode(x.v, x.ctx.p, x.ctx.degree);
        let mut acc = self.zero();
        for &d in digits.iter().rev() {
            acc = acc * gen_image + self.from_i64(d as i64);
        }
        acc
    }

    /// Canonical embedding of `x` into this field.
    pub fn embed(&'static self, x: FieldElem) -> Result<FieldElem, FieldError> {
        if std::ptr::eq(x.ctx, self) {
            return Ok(x);
        }
        let err = FieldError::NoEmbedding { p: self.p, from: x.ctx.degree, to: self.degree };
        if x.ctx.p != self.p {
            return Err(err);
        }
        if x.ctx.degree == 1 {
            return Ok(FieldElem { ctx: self, v: x.v });
        }
        let g = self.embed_gen(x.ctx.degree).ok_or(err)?;
        Ok(self.embed_with_gen(x, FieldElem { ctx: self, v: g }))
    }

    /// Embeds `x` (living in an extension of `base`) so that the composite
    /// `base -> x.ctx -> self` agrees with the canonical `base -> self`.
    pub fn embed_over(&'static self, x: FieldElem, base: Field) -> Result<FieldElem, FieldError> {
        if base.degree == 1 || std::ptr::eq(x.ctx, self) {
            return self.embed(x);
        }
        let err = FieldError::NoEmbedding { p: self.p, from: x.ctx.degree, to: self.degree };
        if x.ctx.p != self.p || self.degree % x.ctx.degree != 0 {
            return Err(err);
        }
        let base_gen = FieldElem { ctx: base, v: if base.degree == 1 { 0 } else { base.p } };
        let target = self.embed(base_gen)?;
        let mid = x.ctx.embed(base_gen)?;
        let m = x.ctx.modulus.clone();
        for y in self.elements() {
            if eval_int_poly(&m, y).is_zero() && self.embed_with_gen(mid, y) == target {
                return Ok(self.embed_with_gen(x, y));
            }
        }
        Err(err)
    }

    /// Preimage of `x` under the canonical embedding of this field, if any.
    pub fn restrict(&'static self, x: FieldElem) -> Option<FieldElem> {
        if std::ptr::eq(x.ctx, self) {
            return Some(x);
        }
        if x.ctx.p != self.p || x.ctx.degree % self.degree != 0 {
            return None;
        }
        if self.degree == 1 {
            return (x.v < self.p).then(|| FieldElem { ctx: self, v: x.v });
        }
        self.elements().find(|e| x.ctx.embed(*e).ok() == Some(x))
    }

    /// All `y` in this field with `y^r = x`, ascending.
    pub fn roots(&'static self, x: FieldElem, r: u64) -> Vec<FieldElem> {
        assert!(std::ptr::eq(x.ctx, self));
        assert!(r >= 1);
        if x.is_zero() {
            return vec![self.zero()];
        }
        let order = self.size as u64 - 1;
        let k = self.log_v(x.v) as u64;
        let d = gcd(r % order, order);
        let d = if d == 0 { order } else { d };
        if k % d != 0 {
            return Vec::new();
        }
        let m = order / d;
        let rr = (r / d) % m;
        let kk = k / d;
        let j0 = if m == 1 { 0 } else { kk % m * mod_inverse(rr, m) % m };
        let mut out: Vec<FieldElem> =
            (0..d).map(|t| FieldElem { ctx: self, v: self.exp_v(j0 + t * m) }).collect();
        out.sort();
        out
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m as i128) as u64
}

fn eval_int_poly(coeffs: &[u32], y: FieldElem) -> FieldElem {
    let mut acc = y.ctx.zero();
    for &c in coeffs.iter().rev() {
        acc = acc * y + y.ctx.from_i64(c as i64);
    }
    acc
}

/// An element of some interned field.
#[derive(Clone, Copy)]
pub struct FieldElem {
    ctx: Field,
    v: u32,
}

impl FieldElem {
    pub fn ctx(&self) -> Field {
        self.ctx
    }

    /// Integer encoding `sum c_i p^i`.
    pub fn encoding(&self) -> u32 {
        self.v
    }

    /// Coefficients in the power basis of the generator, ascending.
    pub fn coeffs(&self) -> Vec<u32> {
        decode(self.v, self.ctx.p, self.ctx.degree)
    }

    pub fn is_zero(&self) -> bool {
        self.v == 0
    }

    pub fn is_one(&self) -> bool {
        self.v == 1
    }

    pub fn inv(&self) -> Option<FieldElem> {
        self.ctx.inv_v(self.v).map(|v| FieldElem { ctx: self.ctx, v })
    }

    pub fn pow(&self, e: u64) -> FieldElem {
        if e == 0 {
            return self.ctx.one();
        }
        if self.v == 0 {
            return *self;
        }
        let order = self.ctx.size as u64 - 1;
        let l = self.ctx.log_v(self.v) as u64;
        let k = ((l as u128 * (e % order) as u128) % order as u128) as u64;
        FieldElem { ctx: self.ctx, v: self.ctx.exp_v(k) }
    }

    /// Integer power, negative exponents through the inverse. Panics on
    /// `0^(negative)`.
    pub fn powi(&self, e: i64) -> FieldElem {
        if e >= 0 {
            self.pow(e as u64)
        } else {
            self.inv().expect("negative power of zero").pow(e.unsigned_abs())
        }
    }

    pub fn parse(ctx: Field, text: &str) -> Result<FieldElem, FieldError> {
        let fail = |reason: &str| FieldError::Parse { text: text.to_string(), reason: reason.to_string() };
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(fail("empty"));
        }
        let mut digits = vec![0u32; ctx.degree as usize];
        let mut seen = vec![false; ctx.degree as usize];
        for term in trimmed.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(fail("empty term"));
            }
            let (coef_txt, power) = match term.find('g') {
                None => (term, 0usize),
                Some(pos) => {
                    let rest = &term[pos + 1..];
                    let power = if rest.is_empty() {
                        1
                    } else if let Some(e) = rest.strip_prefix('^') {
                        if e.is_empty() || !e.bytes().all(|b| b.is_ascii_digit()) {
                            return Err(fail("bad exponent"));
                        }
                        let e: usize = e.parse().map_err(|_| fail("bad exponent"))?;
                        if e < 2 {
                            return Err(fail("write g^0 as a constant and g^1 as g"));
                        }
                        e
                    } else {
                        return Err(fail("unexpected text after g"));
                    };
                    (&term[..pos], power)
                }
            };
            let coef = if coef_txt.is_empty() && power > 0 {
                1
            } else {
                if coef_txt.is_empty() || !coef_txt.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(fail("coefficient must be a decimal integer"));
                }
                let c: u64 = coef_txt.parse().map_err(|_| fail("coefficient out of range"))?;
                if c >= ctx.p as u64 {
                    return Err(fail("coefficient not reduced mod p"));
                }
                c as u32
            };
            if power >= ctx.degree as usize {
                return Err(fail("power of g not below the field degree"));
            }
            if seen[power] {
                return Err(fail("repeated power of g"));
            }
            seen[power] = true;
            digits[power] = coef;
        }
        Ok(FieldElem { ctx, v: encode(&digits, ctx.p) })
    }
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v && std::ptr::eq(self.ctx, other.ctx)
    }
}
impl Eq for FieldElem {}

impl Hash for FieldElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ctx.degree.hash(state);
        self.v.hash(state);
    }
}

impl PartialOrd for FieldElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElem {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.ctx.degree, self.v).cmp(&(other.ctx.degree, other.v))
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v == 0 {
            return write!(f, "0");
        }
        let mut first = true;
        for (power, c) in self.coeffs().into_iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (power, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "g")?,
                (1, c) => write!(f, "{c}g")?,
                (e, 1) => write!(f, "g^{e}")?,
                (e, c) => write!(f, "{c}g^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{:?}", self, self.ctx)
    }
}

#[inline]
fn same_ctx(a: &FieldElem, b: &FieldElem) {
    assert!(std::ptr::eq(a.ctx, b.ctx), "field context mismatch: {:?} vs {:?}", a.ctx, b.ctx);
}

impl Add for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn add(self, rhs: FieldElem) -> FieldElem {
        same_ctx(&self, &rhs);
        FieldElem { ctx: self.ctx, v: self.ctx.add_v(self.v, rhs.v) }
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn sub(self, rhs: FieldElem) -> FieldElem {
        same_ctx(&self, &rhs);
        FieldElem { ctx: self.ctx, v: self.ctx.add_v(self.v, self.ctx.neg_v(rhs.v)) }
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn mul(self, rhs: FieldElem) -> FieldElem {
        same_ctx(&self, &rhs);
        FieldElem { ctx: self.ctx, v: self.ctx.mul_v(self.v, rhs.v) }
    }
}

impl Div for FieldElem {
    type Output = FieldElem;
    fn div(self, rhs: FieldElem) -> FieldElem {
        self * rhs.inv().expect("division by zero in finite field")
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn neg(self) -> FieldElem {
        FieldElem { ctx: self.ctx, v: self.ctx.neg_v(self.v) }
    }
}

impl AddAssign for FieldElem {
    fn add_assign(&mut self, rhs: FieldElem) {
        *self = *self + rhs;
    }
}

impl SubAssign for FieldElem {
    fn sub_assign(&mut self, rhs: FieldElem) {
        *self = *self - rhs;
    }
}

impl MulAssign for FieldElem {
    fn mul_assign(&mut self, rhs: FieldElem) {
        *self = *self * rhs;
    }
}

impl Ring for FieldElem {
    fn zero_like(&self) -> Self {
        self.ctx.zero()
    }
    fn one_like(&self) -> Self {
        self.ctx.one()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.ctx.from_i64(n)
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn plus(&self, rhs: &Self) -> Self {
        *self + *rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        *self - *rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        *self * *rhs
    }
    fn negated(&self) -> Self {
        -*self
    }
}

/// A root of `x^r = value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Root {
    pub root: FieldElem,
    /// Relative degree of the field holding `root` over the field of `value`.
    pub ext_degree: u32,
}

/// Least `y` (in encoding order) with `y^r = x`, in the smallest extension of
/// `x`'s field that contains one, searching relative degrees up to
/// [`DEFAULT_ROOT_EXT_BOUND`].
pub fn nth_root(x: FieldElem, r: u64) -> Result<Root, FieldError> {
    nth_root_bounded(x, r, DEFAULT_ROOT_EXT_BOUND)
}

pub fn nth_root_bounded(x: FieldElem, r: u64, bound: u32) -> Result<Root, FieldError> {
    assert!(r >= 1, "root index must be positive");
    if x.is_zero() {
        return Ok(Root { root: x, ext_degree: 1 });
    }
    let base = x.ctx;
    for rel in 1..=bound {
        let field = match base.extension(rel) {
            Ok(f) => f,
            Err(FieldError::TooLarge { .. }) => break,
            Err(e) => return Err(e),
        };
        let xe = field.embed(x)?;
        if let Some(&y) = field.roots(xe, r).first() {
            return Ok(Root { root: y, ext_degree: rel });
        }
    }
    Err(FieldError::NoRoot { value: x.to_string(), r, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_irreducible_quadratic(p: u32, c0: u32, c1: u32) -> bool {
        (0..p).all(|x| (x * x + c1 * x + c0) % p != 0)
    }

    #[test]
    fn prime_field_has_trivial_modulus() {
        let f = make_field(5, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.size(), 5);
    }

    #[test]
    fn f25_uses_least_irreducible_quadratic() {
        // exhaustive scan in (c0, c1) lexicographic order
        let expected = (0..25u32)
            .map(|k| (k / 5, k % 5))
            .find(|&(c0, c1)| brute_irreducible_quadratic(5, c0, c1))
            .unwrap();
        let f = make_field(5, 2).unwrap();
        assert_eq!(f.modulus(), &[expected.0, expected.1, 1]);
        assert_eq!(f.modulus(), &[1, 1, 1]);
    }

    #[test]
    fn rejects_bad_characteristics() {
        assert_eq!(make_field(4, 1).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(make_field(3, 1).unwrap_err(), FieldError::CharacteristicTooSmall(3));
        assert_eq!(make_field(5, 0).unwrap_err(), FieldError::ZeroDegree);
        assert!(matches!(make_field(13, 9), Err(FieldError::TooLarge { .. })));
    }

    #[test]
    fn interned_contexts_are_shared() {
        assert!(std::ptr::eq(make_field(7, 2).unwrap(), make_field(7, 2).unwrap()));
    }

    #[test]
    fn inverses_exhaustive() {
        for f in [make_field(5, 1).unwrap(), make_field(5, 2).unwrap(), make_field(7, 3).unwrap()] {
            for a in f.nonzero_elements() {
                assert!((a * a.inv().unwrap()).is_one(), "{a:?}");
            }
            assert!(f.zero().inv().is_none());
        }
    }

    #[test]
    fn multiplication_matches_polynomial_product() {
        let f = make_field(5, 2).unwrap();
        // g^2 = -g - 1 for modulus X^2+X+1
        let g = FieldElem::parse(f, "g").unwrap();
        assert_eq!(g * g, FieldElem::parse(f, "4+4g").unwrap());
        assert_eq!(g.pow(3), f.one());
    }

    #[test]
    fn embedding_is_a_ring_homomorphism() {
        let base = make_field(5, 1).unwrap();
        let big = make_field(5, 2).unwrap();
        for a in base.elements() {
            for b in base.elements() {
                let (ea, eb) = (big.embed(a).unwrap(), big.embed(b).unwrap());
                assert_eq!(big.embed(a + b).unwrap(), ea + eb);
                assert_eq!(big.embed(a * b).unwrap(), ea * eb);
            }
            assert_eq!(base.restrict(big.embed(a).unwrap()), Some(a));
        }
    }

    #[test]
    fn embedding_between_extensions() {
        let f25 = make_field(5, 2).unwrap();
        let f625 = make_field(5, 4).unwrap();
        for a in f25.elements() {
            for b in f25.elements().step_by(3) {
                let (ea, eb) = (f625.embed(a).unwrap(), f625.embed(b).unwrap());
                assert_eq!(f625.embed(a * b).unwrap(), ea * eb);
                assert_eq!(f625.embed(a + b).unwrap(), ea + eb);
            }
            assert_eq!(f25.restrict(f625.embed(a).unwrap()), Some(a));
        }
        assert!(make_field(5, 3).unwrap().embed(f25.one()).is_err());
    }

    #[test]
    fn embed_over_is_compatible_with_base() {
        let base = make_field(5, 2).unwrap();
        let mid = make_field(5, 4).unwrap();
        let top = make_field(5, 8).unwrap();
        for a in base.elements() {
            let via = top.embed_over(mid.embed(a).unwrap(), base).unwrap();
            assert_eq!(via, top.embed(a).unwrap());
        }
    }

    #[test]
    fn nth_root_examples() {
        let f5 = make_field(5, 1).unwrap();
        let x = f5.from_i64(3);
        assert_eq!(nth_root(x, 1).unwrap(), Root { root: x, ext_degree: 1 });
        assert_eq!(nth_root(f5.zero(), 3).unwrap(), Root { root: f5.zero(), ext_degree: 1 });
        // 2 is a non-residue mod 5
        let squares: Vec<u32> = f5.elements().map(|y| (y * y).encoding()).collect();
        assert!(!squares.contains(&2));
        let r = nth_root(f5.from_i64(2), 2).unwrap();
        assert_eq!(r.ext_degree, 2);
        assert_eq!(r.root * r.root, r.root.ctx().embed(f5.from_i64(2)).unwrap());
        // least by exhaustive search in F_25
        let f25 = make_field(5, 2).unwrap();
        let two = f25.embed(f5.from_i64(2)).unwrap();
        let least = f25.elements().find(|y| *y * *y == two).unwrap();
        assert_eq!(r.root, least);
    }

    #[test]
    fn roots_are_complete() {
        let f = make_field(13, 2).unwrap();
        for x in f.elements().step_by(7) {
            for r in [2u64, 3, 4, 5, 12] {
                let fast = f.roots(x, r);
                let slow: Vec<FieldElem> = f.elements().filter(|y| y.pow(r) == x).collect();
                assert_eq!(fast, slow, "x={x} r={r}");
            }
        }
    }

    #[test]
    fn text_form() {
        let f = make_field(5, 3).unwrap();
        for (txt, canon) in [("3", "3"), ("2+3g", "2+3g"), ("1+0g+4g^2", "1+4g^2"), ("g", "g"), ("0", "0")] {
            assert_eq!(FieldElem::parse(f, txt).unwrap().to_string(), canon);
        }
        for bad in ["", "5", "1+1", "g^3", "2x", "g^1", "-1", "1++g"] {
            assert!(FieldElem::parse(f, bad).is_err(), "{bad}");
        }
        for a in f.elements() {
            assert_eq!(FieldElem::parse(f, &a.to_string()).unwrap(), a);
        }
    }
}
