//! The truncated polynomial ring A(1) = k[X]/(X^p), its automorphism group
//! G = T x U, and the induced actions on W and on the dual space.
//!
//! An automorphism is stored as `(t, b_2, ..., b_{p-1})` and sends `x` to
//! `t * (x + b_2 x^2 + ... + b_{p-1} x^{p-1})`. The Lie algebra automorphism
//! attached to it is `D -> phi o D o phi^{-1}`.

use std::fmt;

use thiserror::Error;

use crate::ffield::{Field, FieldElem, FieldError};
use crate::ring::Ring;
use crate::sympoly::{MultiPoly, Var};
use crate::witt::{Character, WittElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TruncError {
    #[error("inner series has nonzero constant term; composition leaves the augmentation ideal")]
    NonZeroConstant,
    #[error("series with non-invertible constant term")]
    NotUnit,
    #[error("not an automorphism: the coefficient of x is zero")]
    Singular,
    #[error("expected {expected} coefficients, got {got}")]
    Length { expected: usize, got: usize },
    #[error("malformed automorphism {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Truncated power series `sum c_k x^k`, `k < n`, over a ring.
#[derive(Clone, PartialEq)]
pub struct TruncSeries<R> {
    coeffs: Vec<R>,
}

pub type TruncPoly = TruncSeries<FieldElem>;

impl<R: Ring> fmt::Debug for TruncSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coeffs).finish()
    }
}

impl<R: Ring> TruncSeries<R> {
    pub fn new(coeffs: Vec<R>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient");
        TruncSeries { coeffs }
    }

    pub fn zero(template: &R, n: usize) -> Self {
        TruncSeries { coeffs: vec![template.zero_like(); n] }
    }

    pub fn monomial(template: &R, n: usize, k: usize) -> Self {
        let mut s = Self::zero(template, n);
        if k < n {
            s.coeffs[k] = template.one_like();
        }
        s
    }

    /// Truncation length (`p` for A(1)).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &R {
        &self.coeffs[k]
    }

    pub fn set(&mut self, k: usize, v: R) {
        self.coeffs[k] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Ring::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        TruncSeries { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.plus(b)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        TruncSeries { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.minus(b)).collect() }
    }

    pub fn scale(&self, c: &R) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|a| a.times(c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.len();
        assert_eq!(n, other.len());
        let mut out = Self::zero(&self.coeffs[0], n);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] = out.coeffs[i + j].plus(&a.times(b));
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::monomial(&self.coeffs[0], self.len(), 0);
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

    pub fn derivative(&self) -> Self {
        let n = self.len();
        let mut out = Self::zero(&self.coeffs[0], n);
        for k in 1..n {
            out.coeffs[k - 1] = self.coeffs[k].scaled(k as i64);
        }
        out
    }

    /// `self(g(x))`, truncated. `g` must have zero constant term.
    pub fn compose(&self, g: &Self) -> Result<Self, TruncError> {
        assert_eq!(self.len(), g.len());
        if !g.coeffs[0].is_zero() {
            return Err(TruncError::NonZeroConstant);
        }
        // Horner
        let n = self.len();
        let mut acc = Self::zero(&self.coeffs[0], n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g);
            acc.coeffs[0] = acc.coeffs[0].plus(c);
        }
        Ok(acc)
    }

    /// Multiplicative inverse of a series with constant term one.
    pub fn inverse_monic(&self) -> Result<Self, TruncError> {
        if !self.coeffs[0].is_one() {
            return Err(TruncError::NotUnit);
        }
        let n = self.len();
        let mut inv = Self::zero(&self.coeffs[0], n);
        inv.coeffs[0] = self.coeffs[0].one_like();
        for k in 1..n {
            let mut s = self.coeffs[0].zero_like();
            for j in 1..=k {
                s = s.plus(&self.coeffs[j].times(&inv.coeffs[k - j]));
            }
            inv.coeffs[k] = s.negated();
        }
        Ok(inv)
    }
}

impl TruncPoly {
    pub fn ctx(&self) -> Field {
        self.coeffs[0].ctx()
    }

    /// Inverse of a series with nonzero constant term.
    pub fn inverse(&self) -> Result<TruncPoly, TruncError> {
        let c = self.coeffs[0].inv().ok_or(TruncError::NotUnit)?;
        Ok(self.scale(&c).inverse_monic()?.scale(&c))
    }

    pub fn embed(&self, into: Field) -> Result<TruncPoly, FieldError> {
        Ok(TruncSeries { coeffs: self.coeffs.iter().map(|c| into.embed(*c)).collect::<Result<_, _>>()? })
    }

    pub fn parse(ctx: Field, text: &str) -> Result<TruncPoly, TruncError> {
        let p = ctx.characteristic() as usize;
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != p {
            return Err(TruncError::Length { expected: p, got: parts.len() });
        }
        let coeffs = parts.iter().map(|s| FieldElem::parse(ctx, s)).collect::<Result<Vec<_>, _>>()?;
        Ok(TruncSeries { coeffs })
    }
}

impl fmt::Display for TruncPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Coefficients `c_2..c_{n-1}` of the compositional inverse of
/// `x + b_2 x^2 + ... + b_{n-1} x^{n-1}` (input `b[k-2] = b_k`).
///
/// Comparing coefficients in `u^{-1}(u(x)) = x` gives
/// `c_m = -b_m - sum_{s=2}^{m-1} c_s [x^m] u(x)^s`.
pub fn invert_unipotent<R: Ring>(b: &[R], one: &R) -> Vec<R> {
    let n = b.len() + 2;
    let mut u = TruncSeries::zero(one, n);
    u.coeffs[1] = one.clone();
    for (k, bk) in b.iter().enumerate() {
        u.coeffs[k + 2] = bk.clone();
    }
    // powers u^s for s = 2..n-1
    let mut powers = vec![TruncSeries::monomial(one, n, 0), u.clone()];
    for s in 2..n {
        let next = powers[s - 1].mul(&u);
        powers.push(next);
    }
    let mut c: Vec<R> = Vec::with_capacity(b.len());
    for m in 2..n {
        let mut acc = b[m - 2].negated();
        for s in 2..m {
            acc = acc.minus(&c[s - 2].times(&powers[s].coeffs[m]));
        }
        c.push(acc);
    }
    c
}

/// An automorphism of A(1): `x -> t * (x + sum b_k x^k)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    t: FieldElem,
    b: Vec<FieldElem>,
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Automorphism({self})")
    }
}

impl Automorphism {
    pub fn new(t: FieldElem, b: Vec<FieldElem>) -> Result<Automorphism, TruncError> {
        let p = t.ctx().characteristic() as usize;
        if b.len() != p - 2 {
            return Err(TruncError::Length { expected: p - 2, got: b.len() });
        }
        if t.is_zero() {
            return Err(TruncError::Singular);
        }
        assert!(b.iter().all(|x| x.ctx() == t.ctx()), "mixed field contexts");
        Ok(Automorphism { t, b })
    }

    pub fn identity(ctx: Field) -> Automorphism {
        Self::torus(ctx.one())
    }

    pub fn torus(t: FieldElem) -> Automorphism {
        let p = t.ctx().characteristic() as usize;
        Automorphism::new(t, vec![t.ctx().zero(); p - 2]).expect("nonzero torus element")
    }

    pub fn unipotent(ctx: Field, b: Vec<FieldElem>) -> Result<Automorphism, TruncError> {
        Automorphism::new(ctx.one(), b)
    }

    pub fn ctx(&self) -> Field {
        self.t.ctx()
    }

    pub fn p(&self) -> usize {
        self.t.ctx().characteristic() as usize
    }

    pub fn t(&self) -> FieldElem {
        self.t
    }

    /// `b_k` for `2 <= k <= p-1`.
    pub fn b(&self, k: usize) -> FieldElem {
        self.b[k - 2]
    }

    pub fn bs(&self) -> &[FieldElem] {
        &self.b
    }

    pub fn is_identity(&self) -> bool {
        self.t.is_one() && self.b.iter().all(|x| x.is_zero())
    }

    /// The image `phi(x)` in A(1).
    pub fn image(&self) -> TruncPoly {
        let p = self.p();
        let mut coeffs = vec![self.ctx().zero(); p];
        coeffs[1] = self.t;
        for (k, bk) in self.b.iter().enumerate() {
            coeffs[k + 2] = self.t * *bk;
        }
        TruncSeries::new(coeffs)
    }

    /// Decomposes an arbitrary image `phi(x)` with zero constant term and
    /// invertible linear term.
    pub fn from_image(img: &TruncPoly) -> Result<Automorphism, TruncError> {
        if !img.coeff(0).is_zero() {
            return Err(TruncError::NonZeroConstant);
        }
        let t = *img.coeff(1);
        let ti = t.inv().ok_or(TruncError::Singular)?;
        let b = img.coeffs()[2..].iter().map(|c| *c * ti).collect();
        Automorphism::new(t, b)
    }

    /// `self o other` as algebra maps: `x -> other(x)` with `x` replaced by `self(x)`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        let img = other.image().compose(&self.image()).expect("images have zero constant term");
        Automorphism::from_image(&img).expect("composition of automorphisms is invertible")
    }

    pub fn inverse(&self) -> Automorphism {
        aut_invert(self)
    }

    pub fn embed(&self, into: Field) -> Result<Automorphism, FieldError> {
        Ok(Automorphism {
            t: into.embed(self.t)?,
            b: self.b.iter().map(|x| into.embed(*x)).collect::<Result<_, _>>()?,
        })
    }

    pub fn parse(ctx: Field, text: &str) -> Result<Automorphism, TruncError> {
        let fail = |reason: &str| TruncError::Parse { text: text.to_string(), reason: reason.to_string() };
        let (tp, bp) = text.split_once(';').ok_or_else(|| fail("expected t=...;b=[...]"))?;
        let t = tp.trim().strip_prefix("t=").ok_or_else(|| fail("missing t="))?;
        let b = bp
            .trim()
            .strip_prefix("b=[")
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| fail("missing b=[...]"))?;
        let t = FieldElem::parse(ctx, t)?;
        let b: Vec<FieldElem> = if b.trim().is_empty() {
            Vec::new()
        } else {
            b.split(',').map(|s| FieldElem::parse(ctx, s.trim())).collect::<Result<_, _>>()?
        };
        Automorphism::new(t, b)
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b: Vec<String> = self.b.iter().map(|x| x.to_string()).collect();
        write!(f, "t={};b=[{}]", self.t, b.join(","))
    }
}

/// Inverse automorphism: `phi^{-1}(x) = C(x / t)` with `C` the inverse of the
/// unipotent part.
pub fn aut_invert(sigma: &Automorphism) -> Automorphism {
    let ctx = sigma.ctx();
    let c = invert_unipotent(&sigma.b, &ctx.one());
    let ti = sigma.t.inv().expect("torus part is nonzero");
    // C(x/t) = (1/t) * (x + sum c_n t^{1-n} x^n)
    let b = c.iter().enumerate().map(|(k, cn)| *cn * ti.pow(k as u64 + 1)).collect();
    Automorphism { t: ti, b }
}

fn witt_series(w: &WittElem) -> TruncPoly {
    let p = w.p();
    let mut coeffs = vec![w.ctx().zero(); p];
    for i in -1..=(p as i32 - 2) {
        coeffs[(i + 1) as usize] = w.coeff(i);
    }
    TruncSeries::new(coeffs)
}

fn series_witt(s: &TruncPoly) -> WittElem {
    WittElem::from_coeffs(s.coeffs().to_vec())
}

/// `sigma(w) = phi o w o phi^{-1}`, read off through `D = D(x) d/dx`:
/// `sigma(w)(x) = (phi^{-1})'(phi(x)) * w(x)|_{x = phi(x)}`.
pub fn act_witt(sigma: &Automorphism, w: &WittElem) -> WittElem {
    assert_eq!(sigma.ctx(), w.ctx(), "field context mismatch");
    let pimg = sigma.image();
    let qimg = aut_invert(sigma).image();
    let wp = witt_series(w).compose(&pimg).expect("zero constant term");
    let qd = qimg.derivative().compose(&pimg).expect("zero constant term");
    series_witt(&wp.mul(&qd))
}

/// `(sigma . chi)(w) = chi(sigma^{-1}(w))`.
pub fn act_dual(sigma: &Automorphism, chi: &Character) -> Character {
    assert_eq!(sigma.ctx(), chi.ctx(), "field context mismatch");
    let ctx = chi.ctx();
    let p = chi.p();
    let pimg = sigma.image();
    let qimg = aut_invert(sigma).image();
    // sigma^{-1}(e_j)(x) = phi'(q(x)) * q(x)^{j+1}
    let pd_q = pimg.derivative().compose(&qimg).expect("zero constant term");
    let mut qpow = TruncSeries::monomial(&ctx.one(), p, 0);
    let mut out = vec![ctx.zero(); p];
    for slot in out.iter_mut() {
        let col = pd_q.mul(&qpow);
        let mut acc = ctx.zero();
        for (k, c) in col.coeffs().iter().enumerate() {
            acc += chi.coeff(k as i32 - 1) * *c;
        }
        *slot = acc;
        qpow = qpow.mul(&qimg);
    }
    Character::from_coeffs(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    Witt,
    Dual,
}

/// Coefficient polynomials in `b_2..b_{p-1}` of the unipotent action.
///
/// Witt mode: entry `j+1` is the `e_j`-coefficient of `sigma_phi(e_i)`.
/// Dual mode: entry `j+1` is the `e_j'`-coefficient of `sigma_phi^{-1}(e_i')`,
/// i.e. the coefficient of `x^{i+1}` in `sigma_phi(e_j)(x)`.
/// Both use `sigma_phi(e_j)(x) = phi(x)^{j+1} / phi'(x)`.
pub fn sym_action(p: u32, i: i32, mode: ActionMode) -> Vec<MultiPoly> {
    assert!((-1..=p as i32 - 2).contains(&i), "basis index out of range");
    let n = p as usize;
    let one = MultiPoly::constant(p, 1);
    let mut phi = TruncSeries::zero(&one, n);
    phi.set(1, one.clone());
    for k in 2..n {
        phi.set(k, MultiPoly::var(p, Var::B(k as u32)));
    }
    let inv_d = phi.derivative().inverse_monic().expect("phi' has constant term 1");
    let image_of = |j: i32| -> TruncSeries<MultiPoly> { phi.pow((j + 1) as u32).mul(&inv_d) };
    match mode {
        ActionMode::Witt => image_of(i).coeffs().to_vec(),
        ActionMode::Dual => (-1..=p as i32 - 2).map(|j| image_of(j).coeff((i + 1) as usize).clone()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::make_field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(ctx: Field, c: &[i64]) -> TruncPoly {
        TruncSeries::new(c.iter().map(|&v| ctx.from_i64(v)).collect())
    }

    fn random_aut(ctx: Field, rng: &mut ChaCha8Rng) -> Automorphism {
        let p = ctx.characteristic() as usize;
        let t = ctx.elem(rng.gen_range(1..ctx.size()));
        let b = (0..p - 2).map(|_| ctx.elem(rng.gen_range(0..ctx.size()))).collect();
        Automorphism::new(t, b).unwrap()
    }

    fn random_witt(ctx: Field, rng: &mut ChaCha8Rng) -> WittElem {
        let p = ctx.characteristic() as usize;
        WittElem::from_coeffs((0..p).map(|_| ctx.elem(rng.gen_range(0..ctx.size()))).collect())
    }

    fn random_char(ctx: Field, rng: &mut ChaCha8Rng) -> Character {
        let p = ctx.characteristic() as usize;
        Character::from_coeffs((0..p).map(|_| ctx.elem(rng.gen_range(0..ctx.size()))).collect())
    }

    #[test]
    fn compose_examples() {
        let f5 = make_field(5, 1).unwrap();
        let x = series(f5, &[0, 1, 0, 0, 0]);
        let f = series(f5, &[1, 2, 3, 4, 0]);
        assert_eq!(f.compose(&x).unwrap(), f);
        let sq = series(f5, &[0, 0, 1, 0, 0]);
        let g = series(f5, &[0, 1, 1, 0, 0]);
        let got = sq.compose(&g).unwrap();
        assert_eq!(got, series(f5, &[0, 0, 1, 2, 1]));
        // (y + y^2)^2 has degree 4, so nothing is truncated: compare pointwise
        for y in f5.elements() {
            let direct = (y + y * y) * (y + y * y);
            assert_eq!(got.coeffs().iter().rev().fold(f5.zero(), |acc, c| acc * y + *c), direct);
        }
        let cube = series(f5, &[0, 0, 0, 1, 0]);
        assert!(cube.compose(&sq).unwrap().is_zero());
        assert_eq!(f.compose(&f).unwrap_err(), TruncError::NonZeroConstant);
    }

    #[test]
    fn inversion_example_p5() {
        let f5 = make_field(5, 1).unwrap();
        for b in f5.elements() {
            let phi = Automorphism::unipotent(f5, vec![b, f5.zero(), f5.zero()]).unwrap();
            let inv = aut_invert(&phi);
            let expected = series(f5, &[0, 1, 0, 0, 0])
                .sub(&series(f5, &[0, 0, 1, 0, 0]).scale(&b))
                .add(&series(f5, &[0, 0, 0, 2, 0]).scale(&(b * b)));
            assert_eq!(inv.image(), expected);
            assert_eq!(inv.b(2), -b);
            assert!(phi.compose(&inv).is_identity());
        }
    }

    #[test]
    fn inversion_exhaustive_over_u_f5() {
        let f5 = make_field(5, 1).unwrap();
        let mut count = 0;
        for v in 0..125u32 {
            let b = vec![f5.elem(v % 5), f5.elem(v / 5 % 5), f5.elem(v / 25)];
            let phi = Automorphism::unipotent(f5, b).unwrap();
            let inv = phi.inverse();
            assert!(phi.compose(&inv).is_identity());
            assert!(inv.compose(&phi).is_identity());
            count += 1;
        }
        assert_eq!(count, 125);
    }

    #[test]
    fn inversion_random_larger_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [7, 11, 13] {
            let f = make_field(p, 1).unwrap();
            for _ in 0..200 {
                let s = random_aut(f, &mut rng);
                assert!(s.compose(&s.inverse()).is_identity());
                assert!(s.inverse().compose(&s).is_identity());
            }
        }
    }

    #[test]
    fn torus_weights() {
        let f = make_field(7, 1).unwrap();
        let t = f.from_i64(3);
        let tau = Automorphism::torus(t);
        for i in -1..=5 {
            let e = WittElem::basis(f, i);
            assert_eq!(act_witt(&tau, &e), e.scale(t.powi(i as i64)));
            let c = Character::basis(f, i);
            assert_eq!(act_dual(&tau, &c), c.scale(t.powi(-(i as i64))));
        }
    }

    #[test]
    fn unipotent_fixes_top_basis_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [5, 7, 11] {
            let f = make_field(p, 1).unwrap();
            for _ in 0..20 {
                let mut u = random_aut(f, &mut rng);
                u = Automorphism::unipotent(f, u.bs().to_vec()).unwrap();
                let top = WittElem::basis(f, p as i32 - 2);
                assert_eq!(act_witt(&u, &top), top);
            }
        }
    }

    #[test]
    fn jantzen_automorphism_images() {
        for p in [5u32, 7, 11, 13] {
            let f = make_field(p, 1).unwrap();
            let s = (p as i32 - 1) / 2;
            for bv in f.elements() {
                let mut b = vec![f.zero(); p as usize - 2];
                b[(s + 1 - 2) as usize] = bv;
                let phi = Automorphism::unipotent(f, b).unwrap();
                for j in 0..s {
                    let expected = WittElem::basis(f, j).sub(&WittElem::basis(f, s + j).scale(bv * f.from_i64((s - j) as i64)));
                    assert_eq!(act_witt(&phi, &WittElem::basis(f, j)), expected);
                }
            }
        }
    }

    #[test]
    fn dual_unipotent_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = make_field(7, 1).unwrap();
        for _ in 0..30 {
            let u = Automorphism::unipotent(f, random_aut(f, &mut rng).bs().to_vec()).unwrap();
            for i in -1..=5 {
                let img = act_dual(&u.inverse(), &Character::basis(f, i));
                assert!(img.coeff(i).is_one());
                for j in i + 1..=5 {
                    assert!(img.coeff(j).is_zero());
                }
            }
        }
        assert!(act_dual(&random_aut(f, &mut rng), &Character::zero(f)).is_zero());
    }

    #[test]
    fn group_action_and_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, m) in [(5, 1), (7, 1), (5, 2)] {
            let f = make_field(p, m).unwrap();
            for _ in 0..100 {
                let (s, t) = (random_aut(f, &mut rng), random_aut(f, &mut rng));
                let w = random_witt(f, &mut rng);
                let chi = random_char(f, &mut rng);
                let st = s.compose(&t);
                assert_eq!(act_witt(&st, &w), act_witt(&s, &act_witt(&t, &w)));
                assert_eq!(act_dual(&st, &chi), act_dual(&s, &act_dual(&t, &chi)));
                assert_eq!(act_dual(&s, &chi).pair(&act_witt(&s, &w)), chi.pair(&w));
                assert_eq!(act_witt(&s, &w).degree(), w.degree());
                assert_eq!(crate::dorbit::height(&act_dual(&s, &chi)), crate::dorbit::height(&chi));
            }
        }
    }

    #[test]
    fn automorphism_text_round_trip() {
        let f = make_field(5, 2).unwrap();
        let s = Automorphism::parse(f, "t=2+3g;b=[g,0,4]").unwrap();
        assert_eq!(s.to_string(), "t=2+3g;b=[g,0,4]");
        assert!(Automorphism::parse(f, "t=0;b=[0,0,0]").is_err());
        assert!(Automorphism::parse(f, "t=1;b=[0,0]").is_err());
        let tp = TruncPoly::parse(f, "0,1,g,0,3").unwrap();
        assert_eq!(tp.to_string(), "0,1,g,0,3");
    }

    #[test]
    fn sym_action_structure() {
        use std::collections::BTreeMap;
        for p in [5u32, 7, 11] {
            let weights: BTreeMap<Var, i64> = (2..p).map(|k| (Var::B(k), k as i64 - 1)).collect();
            for i in -1..=(p as i32 - 2) {
                let w = sym_action(p, i, ActionMode::Witt);
                assert!(w[(i + 1) as usize].to_string() == "1");
                for j in -1..=(p as i32 - 2) {
                    let a = &w[(j + 1) as usize];
                    if j < i {
                        assert!(a.is_zero());
                    } else {
                        assert!(a.is_weighted_homogeneous(&weights, (j - i) as i64), "p={p} i={i} j={j}");
                    }
                    if j > i && j - i + 1 <= p as i32 - 1 {
                        let k = (j - i + 1) as u32;
                        let lin = a.coeff(&crate::sympoly::Monomial::var(Var::B(k)));
                        assert_eq!(lin as i64, ((2 * i - j) as i64).rem_euclid(p as i64));
                    }
                }
                let d = sym_action(p, i, ActionMode::Dual);
                assert!(d[(i + 1) as usize].to_string() == "1");
                for j in -1..=(p as i32 - 2) {
                    let a = &d[(j + 1) as usize];
                    if j > i {
                        assert!(a.is_zero());
                    } else {
                        assert!(a.is_weighted_homogeneous(&weights, (i - j) as i64));
                    }
                    if j < i && i - j + 1 <= p as i32 - 1 {
                        let k = (i - j + 1) as u32;
                        let lin = a.coeff(&crate::sympoly::Monomial::var(Var::B(k)));
                        assert_eq!(lin as i64, ((2 * j - i) as i64).rem_euclid(p as i64));
                    }
                }
            }
        }
    }

    #[test]
    fn sym_action_specializes_to_numeric_action_exhaustively_f5() {
        use std::collections::BTreeMap;
        let f = make_field(5, 1).unwrap();
        let sym_w: Vec<Vec<MultiPoly>> = (-1..=3).map(|i| sym_action(5, i, ActionMode::Witt)).collect();
        let sym_d: Vec<Vec<MultiPoly>> = (-1..=3).map(|i| sym_action(5, i, ActionMode::Dual)).collect();
        for v in 0..125u32 {
            let bv = [v % 5, v / 5 % 5, v / 25];
            let b: Vec<FieldElem> = bv.iter().map(|&c| f.elem(c)).collect();
            let u = Automorphism::unipotent(f, b).unwrap();
            let uinv = u.inverse();
            let assign: BTreeMap<Var, FieldElem> = (0..3).map(|k| (Var::B(k as u32 + 2), f.elem(bv[k]))).collect();
            for i in -1..=3 {
                let w = act_witt(&u, &WittElem::basis(f, i));
                let c = act_dual(&uinv, &Character::basis(f, i));
                for j in -1..=3 {
                    let sw = sym_w[(i + 1) as usize][(j + 1) as usize].evaluate(f, |x| assign.get(&x).copied()).unwrap();
                    assert_eq!(sw, w.coeff(j));
                    let sd = sym_d[(i + 1) as usize][(j + 1) as usize].evaluate(f, |x| assign.get(&x).copied()).unwrap();
                    assert_eq!(sd, c.coeff(j));
                }
            }
        }
    }
}
