//! Orbits of G = Aut(W) on W: canonical representatives with explicit
//! witnesses, the orbit-closure polynomials and closure membership.
//!
//! Representatives by degree i:
//! `e_{-1} + a e_{p-2}` (i = -1), `a e_0` (i = 0, a != 0),
//! `e_i + a e_{2i}` (1 <= i < (p-1)/2), `e_i` otherwise.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffield::{nth_root_bounded, Field, FieldElem, FieldError, Root};
use crate::sympoly::{triangular_invert, Monomial, MultiPoly, PolyError, Var};
use crate::trunc::{act_witt, sym_action, ActionMode, Automorphism};
use crate::witt::{char_phi, WittElem, WittError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbitError {
    #[error("zero element has no orbit class")]
    ZeroElement,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error("invalid orbit class: {0}")]
    InvalidClass(String),
    #[error("closure of height p-1 orbits is conditional for p = {0}; run the height p-1 resolver first")]
    Conditional(u32),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// One step of the recursive unipotent normalization.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Step {
    /// Choose `b_var` so that coordinate `coord` hits its target.
    Solve { coord: i32, var: usize },
    /// Coordinate `coord` is obstructed; it determines the orbit parameter.
    Param { coord: i32 },
}

/// Runs the steps in order. `eval(u, a)` returns the coordinates (index
/// `j + 1`) of `u` applied to the representative with parameter `a`. Each
/// solved coordinate is affine in its variable once the earlier variables
/// are fixed, so two evaluations determine it exactly.
pub(crate) fn run_steps(
    ctx: Field,
    steps: &[Step],
    a_init: FieldElem,
    target: impl Fn(i32) -> FieldElem,
    eval: impl Fn(&Automorphism, FieldElem) -> Vec<FieldElem>,
) -> Result<(Automorphism, FieldElem), OrbitError> {
    let p = ctx.characteristic() as usize;
    let mut b = vec![ctx.zero(); p - 2];
    let mut a = a_init;
    let unip = |b: &Vec<FieldElem>| Automorphism::unipotent(ctx, b.clone()).expect("unipotent element");
    for step in steps {
        match *step {
            Step::Solve { coord, var } => {
                b[var - 2] = ctx.zero();
                let c0 = eval(&unip(&b), a)[(coord + 1) as usize];
                b[var - 2] = ctx.one();
                let c1 = eval(&unip(&b), a)[(coord + 1) as usize];
                let slope = c1 - c0;
                let inv = slope
                    .inv()
                    .ok_or_else(|| OrbitError::Internal(format!("coordinate {coord} does not depend on b_{var}")))?;
                b[var - 2] = (target(coord) - c0) * inv;
            }
            Step::Param { coord } => {
                let c0 = eval(&unip(&b), ctx.zero())[(coord + 1) as usize];
                let c1 = eval(&unip(&b), ctx.one())[(coord + 1) as usize];
                let inv = (c1 - c0)
                    .inv()
                    .ok_or_else(|| OrbitError::Internal(format!("parameter invisible at coordinate {coord}")))?;
                a = (target(coord) - c0) * inv;
            }
        }
    }
    Ok((unip(&b), a))
}

/// A G-orbit in W, identified by degree and (where present) parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrbitClassW {
    p: u32,
    degree: i32,
    param: Option<FieldElem>,
}

/// Which of the four representative families a degree belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseW {
    /// degree -1
    Regular,
    /// degree 0
    Toral,
    /// 1 <= i < (p-1)/2
    Hypersurface,
    /// (p-1)/2 <= i <= p-2
    Single,
}

pub fn case_w(p: u32, i: i32) -> CaseW {
    let half = (p as i32 - 1) / 2;
    match i {
        -1 => CaseW::Regular,
        0 => CaseW::Toral,
        i if i >= 1 && i < half => CaseW::Hypersurface,
        _ => CaseW::Single,
    }
}

impl OrbitClassW {
    pub fn new(p: u32, degree: i32, param: Option<FieldElem>) -> Result<OrbitClassW, OrbitError> {
        if !(-1..=p as i32 - 2).contains(&degree) {
            return Err(OrbitError::InvalidClass(format!("degree {degree} outside -1..={}", p - 2)));
        }
        let needs = case_w(p, degree) != CaseW::Single;
        match (&param, needs) {
            (Some(_), false) => return Err(OrbitError::InvalidClass(format!("degree {degree} has no parameter"))),
            (None, true) => return Err(OrbitError::InvalidClass(format!("degree {degree} needs a parameter"))),
            _ => {}
        }
        if let Some(a) = param {
            if a.ctx().characteristic() != p {
                return Err(OrbitError::InvalidClass("parameter from another characteristic".into()));
            }
            if degree == 0 && a.is_zero() {
                return Err(OrbitError::InvalidClass("a e_0 needs a != 0".into()));
            }
        }
        Ok(OrbitClassW { p, degree, param })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn param(&self) -> Option<FieldElem> {
        self.param
    }

    pub fn case(&self) -> CaseW {
        case_w(self.p, self.degree)
    }

    /// Representative over `ctx` (the parameter is embedded there).
    pub fn representative(&self, ctx: Field) -> Result<WittElem, OrbitError> {
        let i = self.degree;
        let p = self.p as i32;
        let a = match self.param {
            Some(a) => ctx.embed(a)?,
            None => ctx.zero(),
        };
        let e = |j: i32| WittElem::basis(ctx, j);
        Ok(match self.case() {
            CaseW::Regular => e(-1).add(&e(p - 2).scale(a)),
            CaseW::Toral => e(0).scale(a),
            CaseW::Hypersurface => e(i).add(&e(2 * i).scale(a)),
            CaseW::Single => e(i),
        })
    }

    pub fn dimension(&self) -> usize {
        let p = self.p as usize;
        let i = self.degree;
        match self.case() {
            CaseW::Regular => p - 1,
            CaseW::Toral => p - 2,
            CaseW::Hypersurface => p - i as usize - 2,
            CaseW::Single => p - i as usize - 1,
        }
    }
}

/// Group element `sigma` over `F_{q^ext}` with `sigma(representative) = input`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessW {
    pub sigma: Automorphism,
    pub ext_degree: u32,
}

/// Normalization steps for degree `i`.
fn steps_w(p: u32, i: i32) -> Vec<Step> {
    let top = p as i32 - 2;
    let mut steps = Vec::new();
    match case_w(p, i) {
        CaseW::Regular => {
            for j in 0..top {
                steps.push(Step::Solve { coord: j, var: (j + 2) as usize });
            }
            steps.push(Step::Param { coord: top });
        }
        CaseW::Toral | CaseW::Single => {
            for j in i + 1..=top {
                steps.push(Step::Solve { coord: j, var: (j - i + 1) as usize });
            }
        }
        CaseW::Hypersurface => {
            for j in i + 1..=top {
                if j == 2 * i {
                    steps.push(Step::Param { coord: j });
                } else {
                    steps.push(Step::Solve { coord: j, var: (j - i + 1) as usize });
                }
            }
        }
    }
    steps
}

fn rep_with(p: u32, ctx: Field, i: i32, a: FieldElem) -> WittElem {
    let top = p as i32 - 2;
    let e = |j: i32| WittElem::basis(ctx, j);
    match case_w(p, i) {
        CaseW::Regular => e(-1).add(&e(top).scale(a)),
        CaseW::Toral => e(0).scale(a),
        CaseW::Hypersurface => e(i).add(&e(2 * i).scale(a)),
        CaseW::Single => e(i),
    }
}

/// Normalizes `w` (already over the working field) with a prescribed torus
/// element `t`; returns the witness and the raw parameter.
pub fn normalize_w_with_torus(w: &WittElem, t: FieldElem) -> Result<(Automorphism, FieldElem), OrbitError> {
    let ctx = w.ctx();
    let p = ctx.characteristic();
    let i = w.degree().ok_or(OrbitError::ZeroElement)?;
    let tau = Automorphism::torus(t);
    let wn = act_witt(&tau.inverse(), w);
    let a_init = if i == 0 { wn.coeff(0) } else { ctx.zero() };
    let steps = steps_w(p, i);
    let (u, a) = run_steps(ctx, &steps, a_init, |j| wn.coeff(j), |u, a| {
        act_witt(u, &rep_with(p, ctx, i, a)).coeffs().to_vec()
    })?;
    let sigma = tau.compose(&u);
    if act_witt(&sigma, &rep_with(p, ctx, i, a)) != *w {
        return Err(OrbitError::Internal(format!("witness check failed for {w}")));
    }
    Ok((sigma, a))
}

/// Root search for torus elements: the needed extension can have degree up
/// to the root index, so the search only stops at the field-size limit.
pub fn wide_root(x: FieldElem, r: u64) -> Result<Root, FieldError> {
    nth_root_bounded(x, r, crate::ffield::MAX_DEGREE as u32)
}

/// Torus values that normalize the leading coefficient of a degree-`i`
/// element: `t^i = w_i` (for `i = -1`: `t = 1 / w_{-1}`; for `i = 0`: `t = 1`).
fn torus_target(w: &WittElem, i: i32) -> (FieldElem, u64, bool) {
    let lead = w.coeff(i);
    match i {
        -1 => (lead.inv().expect("nonzero lead"), 1, false),
        0 => (w.ctx().one(), 1, false),
        _ => (lead, i as u64, true),
    }
}

/// Canonical class and witness for a nonzero `w`.
pub fn canonicalize_w(w: &WittElem) -> Result<(OrbitClassW, WitnessW), OrbitError> {
    let base = w.ctx();
    let p = base.characteristic();
    let i = w.degree().ok_or(OrbitError::ZeroElement)?;
    let (value, r, needs_root) = torus_target(w, i);
    let (t, ext) = if needs_root {
        let root = wide_root(value, r)?;
        (root.root, root.ext_degree)
    } else {
        (value, 1)
    };
    let field = t.ctx();
    let we = w.embed(field)?;
    let (sigma, a) = normalize_w_with_torus(&we, t)?;
    let param = match case_w(p, i) {
        CaseW::Single => None,
        _ => Some(
            base.restrict(a)
                .ok_or_else(|| OrbitError::Internal(format!("parameter {a} of {w} is not in the base field")))?,
        ),
    };
    let class = OrbitClassW::new(p, i, param)?;
    Ok((class, WitnessW { sigma, ext_degree: ext }))
}

/// Parameters obtained from every admissible torus element in the minimal
/// extension (used to check that the parameter is well defined).
pub fn params_over_all_roots(w: &WittElem) -> Result<Vec<FieldElem>, OrbitError> {
    let i = w.degree().ok_or(OrbitError::ZeroElement)?;
    let (value, r, needs_root) = torus_target(w, i);
    if !needs_root {
        return Ok(vec![normalize_w_with_torus(w, value)?.1]);
    }
    let root = wide_root(value, r)?;
    let field = root.root.ctx();
    let we = w.embed(field)?;
    let roots = field.roots(field.embed(value)?, r);
    roots.into_iter().map(|t| normalize_w_with_torus(&we, t).map(|x| x.1)).collect()
}

pub fn same_orbit_w(u: &WittElem, v: &WittElem) -> Result<bool, OrbitError> {
    let (cu, _) = canonicalize_w(u)?;
    let (cv, _) = canonicalize_w(v)?;
    if cu.degree != cv.degree {
        return Ok(false);
    }
    Ok(match (cu.param, cv.param) {
        (Some(a), Some(b)) => same_elem(a, b),
        _ => true,
    })
}

/// Equality across possibly different field contexts.
pub(crate) fn same_elem(a: FieldElem, b: FieldElem) -> bool {
    if a.ctx() == b.ctx() {
        return a == b;
    }
    let (small, big) = if a.ctx().degree() <= b.ctx().degree() { (a, b) } else { (b, a) };
    big.ctx().embed(small).map(|x| x == big).unwrap_or(false)
}

/// Output of the elimination behind a hypersurface orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Elimination {
    /// The obstructed coordinate as a polynomial in the free coordinates.
    pub f: MultiPoly,
    /// Components of `f` by ordinary degree.
    pub components: BTreeMap<u32, MultiPoly>,
    /// Coefficient of the pure power of the weight-one variable.
    pub c: u32,
    pub weights: BTreeMap<Var, i64>,
}

/// Eliminates the unipotent coordinates: `coords[n]` is solved by `b_{n+2}`,
/// and the polynomial `obstructed` is rewritten in the coordinate variables.
pub(crate) fn eliminate(
    p: u32,
    exprs: &[MultiPoly],
    coords: &[i32],
    obstructed: &MultiPoly,
) -> Result<MultiPoly, OrbitError> {
    let solve: Vec<Var> = (0..coords.len()).map(|n| Var::B(n as u32 + 2)).collect();
    let new: Vec<Var> = coords.iter().map(|&j| Var::X(j)).collect();
    let sol = triangular_invert(exprs, &solve, &new)?;
    let map: BTreeMap<Var, MultiPoly> = solve.iter().copied().zip(sol.iter().cloned()).collect();
    // round trip: the expressions evaluated at the solution give the new variables back
    for (n, e) in exprs.iter().enumerate() {
        if e.substitute(&map) != MultiPoly::var(p, new[n]) {
            return Err(OrbitError::Internal(format!("triangular inversion does not round-trip at {}", new[n])));
        }
    }
    let f = obstructed.substitute(&map);
    if f.vars().iter().any(|v| matches!(v, Var::B(_))) {
        return Err(OrbitError::Internal("obstructed coordinate depends on unsolved variables".into()));
    }
    Ok(f)
}

/// Checks the weight and leading-component structure of `f`.
pub(crate) fn check_structure(
    f: &MultiPoly,
    weights: &BTreeMap<Var, i64>,
    weight: i64,
    max_degree: u32,
    lead_var: Var,
) -> Result<(BTreeMap<u32, MultiPoly>, u32), OrbitError> {
    if !f.is_weighted_homogeneous(weights, weight) {
        return Err(OrbitError::Internal(format!("{f} is not weighted homogeneous of weight {weight}")));
    }
    if f.degree().unwrap_or(0) > max_degree {
        return Err(OrbitError::Internal(format!("{f} has degree above {max_degree}")));
    }
    let components = f.homogeneous_components();
    let lead = Monomial::from_pairs([(lead_var, max_degree)]);
    let c = f.coeff(&lead);
    if let Some(top) = components.get(&max_degree) {
        if *top != MultiPoly::term(f.characteristic(), c as i64, lead) {
            return Err(OrbitError::Internal(format!("top component {top} is not a pure power of {lead_var}")));
        }
    }
    Ok((components, c))
}

/// Closure data for one degree.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosureDataW {
    /// `cl G(e_{-1} + a e_{p-2}) = V(phi - a)` (a != 0) resp. `G e_{-1} u W_{>=1}`.
    Regular { phi: Option<MultiPoly> },
    /// `G(a e_0)` is closed: `w_{-1} = 0, w_0 = a`.
    Toral,
    /// `cl G(e_i + a e_{2i}) = V(g) n W_{>=i}` with `A` standing for `a`.
    Hypersurface { i: i32, elim: Elimination, g: MultiPoly },
    /// `cl G e_i = W_{>=i}`.
    Single { i: i32 },
}

impl ClosureDataW {
    pub fn g(&self) -> Option<&MultiPoly> {
        match self {
            ClosureDataW::Hypersurface { g, .. } => Some(g),
            _ => None,
        }
    }

    /// JSON record `{"i", "c", "f", "g"}` for the hypersurface case.
    pub fn to_json(&self, p: u32) -> serde_json::Value {
        match self {
            ClosureDataW::Hypersurface { i, elim, g } => serde_json::json!({
                "i": i,
                "c": crate::harness::signed(elim.c, p),
                "f": elim.components.iter().map(|(d, c)| format!("f_{d} = {c}")).collect::<Vec<_>>(),
                "g": g.to_string(),
            }),
            ClosureDataW::Regular { phi } => serde_json::json!({
                "i": -1,
                "phi": phi.as_ref().map(|f| f.to_string()),
                "description": "V(phi - a); for a = 0: G e_-1 u W_>=1",
            }),
            ClosureDataW::Toral => serde_json::json!({"i": 0, "description": "X_-1 = 0, X_0 = a"}),
            ClosureDataW::Single { i } => serde_json::json!({"i": i, "description": format!("W_>={i}")}),
        }
    }
}

/// The weighted elimination for `e_i + a e_{2i}`, `1 <= i < (p-1)/2`.
pub fn eliminate_w(p: u32, i: i32) -> Result<Elimination, OrbitError> {
    let a = sym_action(p, i, ActionMode::Witt);
    let coords: Vec<i32> = (i + 1..2 * i).collect();
    let exprs: Vec<MultiPoly> = coords.iter().map(|&j| a[(j + 1) as usize].clone()).collect();
    let f = eliminate(p, &exprs, &coords, &a[(2 * i + 1) as usize])?;
    let weights: BTreeMap<Var, i64> = coords.iter().map(|&j| (Var::X(j), (j - i) as i64)).collect();
    let (components, c) = check_structure(&f, &weights, i as i64, i as u32, Var::X(i + 1))?;
    Ok(Elimination { f, components, c, weights })
}

pub fn compute_closure_w(p: u32, i: i32) -> Result<ClosureDataW, OrbitError> {
    Ok(match case_w(p, i) {
        CaseW::Regular => ClosureDataW::Regular {
            phi: if p <= 7 { Some(crate::witt::char_phi_symbolic(p)?) } else { None },
        },
        CaseW::Toral => ClosureDataW::Toral,
        CaseW::Single => ClosureDataW::Single { i },
        CaseW::Hypersurface => {
            let elim = eliminate_w(p, i)?;
            if i >= 2 && elim.c == 0 {
                return Err(OrbitError::Internal(format!("c vanishes for p = {p}, i = {i}")));
            }
            if i == 1 && !elim.f.is_zero() {
                return Err(OrbitError::Internal("f is nonzero for i = 1".into()));
            }
            let x = |j: i32| MultiPoly::var(p, Var::X(j));
            let mut g = x(2 * i).mul(&x(i).pow(i as u32 - 1));
            g = g.sub(&x(i + 1).pow(i as u32).scale(elim.c as i64));
            for (&d, comp) in &elim.components {
                if d < i as u32 {
                    g = g.sub(&x(i).pow(i as u32 - d).mul(comp));
                }
            }
            g = g.sub(&MultiPoly::var(p, Var::A).mul(&x(i).pow(i as u32 + 1)));
            ClosureDataW::Hypersurface { i, elim, g }
        }
    })
}

/// Closure data for every degree of one prime, computed once.
#[derive(Debug, Clone)]
pub struct ClosureTableW {
    p: u32,
    data: BTreeMap<i32, ClosureDataW>,
}

impl ClosureTableW {
    pub fn new(p: u32) -> Result<ClosureTableW, OrbitError> {
        let mut data = BTreeMap::new();
        for i in -1..=p as i32 - 2 {
            data.insert(i, compute_closure_w(p, i)?);
        }
        Ok(ClosureTableW { p, data })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn get(&self, i: i32) -> &ClosureDataW {
        &self.data[&i]
    }

    /// Orbit class of `w` from the closure invariants alone (no witness):
    /// `phi` for degree -1, `w_0` for degree 0, the value of `A` that makes
    /// `g` vanish for the hypersurface degrees.
    pub fn classify(&self, w: &WittElem) -> Result<OrbitClassW, OrbitError> {
        let i = w.degree().ok_or(OrbitError::ZeroElement)?;
        let param = match self.get(i) {
            ClosureDataW::Regular { .. } => Some(char_phi(w)?),
            ClosureDataW::Toral => Some(w.coeff(0)),
            ClosureDataW::Single { .. } => None,
            ClosureDataW::Hypersurface { g, .. } => {
                let ctx = w.ctx();
                let at = |a: FieldElem| g.evaluate(ctx, |v| eval_var(w, v, a));
                let g0 = at(ctx.zero())?;
                let g1 = at(ctx.one())?;
                Some(-g0 / (g1 - g0))
            }
        };
        OrbitClassW::new(self.p, i, param)
    }

    pub fn in_closure(&self, w: &WittElem, cls: &OrbitClassW) -> Result<bool, OrbitError> {
        if cls.p != self.p || w.p() as u32 != self.p {
            return Err(OrbitError::InvalidClass("characteristic mismatch".into()));
        }
        let ctx = w.ctx();
        let a = match cls.param {
            Some(a) => Some(embed_param(ctx, a)?),
            None => None,
        };
        let i = cls.degree;
        let in_w_geq = |k: i32| (-1..k).all(|j| w.coeff(j).is_zero());
        Ok(match self.get(i) {
            ClosureDataW::Regular { .. } => {
                let a = a.expect("regular class has a parameter");
                char_phi(w)? == a
            }
            ClosureDataW::Toral => w.coeff(-1).is_zero() && w.coeff(0) == a.expect("toral class has a parameter"),
            ClosureDataW::Single { i } => in_w_geq(*i),
            ClosureDataW::Hypersurface { g, .. } => {
                let a = a.expect("hypersurface class has a parameter");
                in_w_geq(i) && g.evaluate(ctx, |v| eval_var(w, v, a))?.is_zero()
            }
        })
    }
}

fn embed_param(ctx: Field, a: FieldElem) -> Result<FieldElem, OrbitError> {
    if a.ctx() == ctx {
        return Ok(a);
    }
    Ok(ctx.embed(a)?)
}

fn eval_var(w: &WittElem, v: Var, a: FieldElem) -> Option<FieldElem> {
    match v {
        Var::X(j) => Some(w.coeff(j)),
        Var::A => Some(a),
        Var::B(_) => None,
    }
}

pub fn in_closure_w(w: &WittElem, cls: &OrbitClassW) -> Result<bool, OrbitError> {
    let p = cls.p;
    let data = compute_closure_w(p, cls.degree)?;
    let table = ClosureTableW { p, data: [(cls.degree, data)].into_iter().collect() };
    table.in_closure(w, cls)
}

/// Certificate record for one canonicalization.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CertificateW {
    pub p: u32,
    pub ext: u32,
    pub input: String,
    pub class: ClassRecord,
    pub witness: WitnessRecord,
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClassRecord {
    pub degree: i32,
    pub param: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WitnessRecord {
    pub t: String,
    pub b: Vec<String>,
    pub ext_degree: u32,
    pub field: String,
}

pub(crate) fn witness_record(sigma: &Automorphism, ext_degree: u32) -> WitnessRecord {
    let f = sigma.ctx();
    WitnessRecord {
        t: sigma.t().to_string(),
        b: sigma.bs().iter().map(|x| x.to_string()).collect(),
        ext_degree,
        field: format!("F_{}^{}", f.characteristic(), f.degree()),
    }
}

pub fn certificate_w(w: &WittElem) -> Result<CertificateW, OrbitError> {
    let (class, wit) = canonicalize_w(w)?;
    let rep = class.representative(wit.sigma.ctx())?;
    let ok = act_witt(&wit.sigma, &rep) == w.embed(wit.sigma.ctx())?;
    Ok(CertificateW {
        p: class.p,
        ext: w.ctx().degree(),
        input: w.to_string(),
        class: ClassRecord { degree: class.degree, param: class.param.map(|a| a.to_string()) },
        witness: witness_record(&wit.sigma, wit.ext_degree),
        checks: vec![format!("act_witt(witness, representative) == input: {ok}")],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::make_field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_aut(ctx: Field, rng: &mut ChaCha8Rng) -> Automorphism {
        let p = ctx.characteristic() as usize;
        Automorphism::new(
            ctx.elem(rng.gen_range(1..ctx.size())),
            (0..p - 2).map(|_| ctx.elem(rng.gen_range(0..ctx.size()))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn canonical_examples() {
        let f = make_field(5, 1).unwrap();
        let w = WittElem::parse(f, "0:3;1:1").unwrap();
        let (c, _) = canonicalize_w(&w).unwrap();
        assert_eq!((c.degree(), c.param()), (0, Some(f.from_i64(3))));
        let w = WittElem::parse(f, "1:1;2:2").unwrap();
        let (c, _) = canonicalize_w(&w).unwrap();
        assert_eq!((c.degree(), c.param()), (1, Some(f.from_i64(2))));
        let (c, _) = canonicalize_w(&WittElem::basis(f, 3)).unwrap();
        assert_eq!((c.degree(), c.param()), (3, None));
        assert_eq!(canonicalize_w(&WittElem::zero(f)).unwrap_err(), OrbitError::ZeroElement);
    }

    #[test]
    fn same_orbit_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in [5u32, 7, 11] {
            let f = make_field(p, 1).unwrap();
            let (a, b) = (f.from_i64(2), f.from_i64(3));
            let e = |i: i32| WittElem::basis(f, i);
            assert!(!same_orbit_w(&e(0).scale(a), &e(0).scale(b)).unwrap());
            for i in (p as i32 - 1) / 2..=p as i32 - 2 {
                assert!(same_orbit_w(&e(i), &e(i).scale(f.from_i64(2))).unwrap());
            }
            for _ in 0..30 {
                let w = WittElem::from_coeffs((0..p).map(|_| f.elem(rng.gen_range(0..p))).collect());
                if w.is_zero() {
                    continue;
                }
                let s = random_aut(f, &mut rng);
                assert!(same_orbit_w(&w, &act_witt(&s, &w)).unwrap());
            }
        }
    }

    #[test]
    fn closure_i1_and_i2() {
        for p in [7u32, 11, 13] {
            let d = compute_closure_w(p, 1).unwrap();
            assert_eq!(d.g().unwrap().to_string(), "X_2 - A*X_1^2");
        }
        let d = compute_closure_w(7, 2).unwrap();
        let ClosureDataW::Hypersurface { elim, g, .. } = &d else { panic!() };
        assert!(elim.components.keys().all(|&k| k == 2));
        let c = elim.c;
        assert_ne!(c, 0);
        let expected = MultiPoly::parse(7, &format!("X_2*X_4 - {c}*X_3^2 - A*X_2^3")).unwrap();
        assert_eq!(*g, expected);
        let d3 = compute_closure_w(11, 3).unwrap();
        let ClosureDataW::Hypersurface { elim, .. } = &d3 else { panic!() };
        let allowed = [Monomial::from_pairs([(Var::X(4), 3)]), Monomial::from_pairs([(Var::X(4), 1), (Var::X(5), 1)])];
        assert!(elim.f.terms().all(|(m, _)| allowed.contains(m)));
    }

    #[test]
    fn orbit_points_satisfy_g() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in [7u32, 11, 13] {
            let f = make_field(p, 1).unwrap();
            let table = ClosureTableW::new(p).unwrap();
            for i in 1..(p as i32 - 1) / 2 {
                for _ in 0..20 {
                    let a = f.elem(rng.gen_range(0..p));
                    let cls = OrbitClassW::new(p, i, Some(a)).unwrap();
                    let w = act_witt(&random_aut(f, &mut rng), &cls.representative(f).unwrap());
                    assert!(table.in_closure(&w, &cls).unwrap());
                    assert_eq!(table.classify(&w).unwrap(), cls);
                }
            }
        }
    }

    #[test]
    fn closure_examples() {
        let f = make_field(7, 1).unwrap();
        let table = ClosureTableW::new(7).unwrap();
        for i in 1..3 {
            let cls = OrbitClassW::new(7, i, Some(f.from_i64(3))).unwrap();
            assert!(table.in_closure(&WittElem::basis(f, i + 2), &cls).unwrap());
            assert!(!table.in_closure(&WittElem::basis(f, i + 1), &cls).unwrap());
        }
        // b e_0 with b^{p-1} = -a lies in the closure of G(e_-1 + a e_{p-2})
        let f5 = make_field(5, 1).unwrap();
        let t5 = ClosureTableW::new(5).unwrap();
        let a = f5.from_i64(-1);
        let cls = OrbitClassW::new(5, -1, Some(a)).unwrap();
        for b in f5.nonzero_elements() {
            assert_eq!(b.pow(4), -a);
            assert!(t5.in_closure(&WittElem::basis(f5, 0).scale(b), &cls).unwrap());
        }
        let cls0 = OrbitClassW::new(5, -1, Some(f5.zero())).unwrap();
        assert!(t5.in_closure(&WittElem::basis(f5, 1), &cls0).unwrap());
        assert!(t5.in_closure(&WittElem::zero(f5), &cls0).unwrap());
        assert!(!t5.in_closure(&WittElem::zero(f5), &cls).unwrap());
    }

    #[test]
    fn parameter_independent_of_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for p in [5u32, 7] {
            let f = make_field(p, 1).unwrap();
            for _ in 0..200 {
                let w = WittElem::from_coeffs((0..p).map(|_| f.elem(rng.gen_range(0..p))).collect());
                if w.is_zero() {
                    continue;
                }
                let params = params_over_all_roots(&w).unwrap();
                assert!(params.windows(2).all(|x| x[0] == x[1]), "{w}: {params:?}");
            }
        }
    }

    #[test]
    fn witnesses_random_larger_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for p in [7u32, 11, 13] {
            let f = make_field(p, 1).unwrap();
            for _ in 0..100 {
                let w = WittElem::from_coeffs((0..p).map(|_| f.elem(rng.gen_range(0..p))).collect());
                if w.is_zero() {
                    continue;
                }
                let (cls, wit) = canonicalize_w(&w).unwrap();
                let rep = cls.representative(wit.sigma.ctx()).unwrap();
                assert_eq!(act_witt(&wit.sigma, &rep), w.embed(wit.sigma.ctx()).unwrap());
            }
        }
    }
}
