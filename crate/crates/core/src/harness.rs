//! Verification suites and report plumbing.
//!
//! Every suite scans a finite domain (exhaustively when it is small enough,
//! otherwise a seeded sample), counts passes and failures and keeps up to
//! ten failure exemplars. Work is split into contiguous index chunks and
//! merged in chunk order, so `jobs` never changes a count or an exemplar.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dorbit::{
    self, canonicalize_dual, height, invariants_check, resolve_height_p1, ClosureDataDual, ClosureTableDual,
    OrbitClassDual,
};
use crate::ffield::{make_field, Field, FieldElem, FieldError};
use crate::trunc::{act_dual, act_witt};
use crate::witt::{bracket, char_phi, char_poly, p_power, Character, WittElem};
use crate::worbit::{canonicalize_w, ClosureDataW, ClosureTableW, OrbitClassW, OrbitError};

pub const SUITES: [&str; 8] =
    ["witt-core", "orbits-w", "closures-w", "wlambda", "orbits-dual", "closures-dual", "height-p1", "invariants"];

pub const DEFAULT_SEED: u64 = 0x5eed_0001;
/// Domains up to this size are scanned exhaustively.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;
/// Sample size for larger domains.
pub const SAMPLE_SIZE: u64 = 10_000;
/// The pointwise W(lambda) identity is cheap enough to scan further.
pub const WLAMBDA_LIMIT: u64 = 10_000_000;
const MAX_EXEMPLARS: usize = 10;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown suite {0:?}; expected one of {SUITES:?}")]
    UnknownSuite(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// Symmetric representative of `c mod p`.
pub fn signed(c: u32, p: u32) -> i64 {
    if c > p / 2 {
        c as i64 - p as i64
    } else {
        c as i64
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: String,
    pub p: u32,
    pub ext: u32,
    pub seed: u64,
    pub jobs: usize,
}

impl SuiteConfig {
    pub fn new(suite: &str, p: u32) -> SuiteConfig {
        SuiteConfig { suite: suite.to_string(), p, ext: 1, seed: DEFAULT_SEED, jobs: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub p: u32,
    pub field: String,
    pub seed: u64,
    pub exhaustive: bool,
    pub points: u64,
    pub passes: u64,
    pub failures: u64,
    pub elapsed_ms: u64,
    pub failure_exemplars: Vec<String>,
    pub payload: serde_json::Value,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Running counts for one scan. Inside [`Tally::point`] every check belongs
/// to that point, which passes only if all of them do; elsewhere each check
/// is a point of its own.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub points: u64,
    pub passes: u64,
    pub failures: u64,
    pub exemplars: Vec<String>,
    /// Set when some part of the scan was sampled rather than exhaustive.
    pub sampled: bool,
    open: Option<bool>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        if !ok && self.exemplars.len() < MAX_EXEMPLARS {
            self.exemplars.push(describe());
        }
        match &mut self.open {
            Some(all) => *all &= ok,
            None => self.count(ok),
        }
    }

    /// Groups the checks made by `f` into one point.
    pub fn point(&mut self, f: impl FnOnce(&mut Tally)) {
        self.open = Some(true);
        f(self);
        let ok = self.open.take().unwrap();
        self.count(ok);
    }

    fn count(&mut self, ok: bool) {
        self.points += 1;
        if ok {
            self.passes += 1;
        } else {
            self.failures += 1;
        }
    }

    /// Records a fallible check; an error counts as a failure.
    pub fn check_result(&mut self, r: Result<bool, OrbitError>, describe: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.check(ok, describe),
            Err(e) => self.check(false, || format!("{}: {e}", describe())),
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.points += other.points;
        self.passes += other.passes;
        self.failures += other.failures;
        self.sampled |= other.sampled;
        for e in other.exemplars {
            if self.exemplars.len() < MAX_EXEMPLARS {
                self.exemplars.push(e);
            }
        }
    }
}

/// Runs `f(idx, tally)` for `idx in 0..n`, split over `jobs` threads.
pub fn scan(n: u64, jobs: usize, f: impl Fn(u64, &mut Tally) + Sync) -> Tally {
    let jobs = jobs.max(1) as u64;
    let chunk = n.div_ceil(jobs).max(1);
    let parts: Vec<Tally> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|k| {
                let f = &f;
                s.spawn(move || {
                    let mut t = Tally::default();
                    for idx in (k * chunk).min(n)..((k + 1) * chunk).min(n) {
                        t.point(|t| f(idx, t));
                    }
                    t
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut total = Tally::default();
    for t in parts {
        total.merge(t);
    }
    total
}

/// Coordinates `-1..p-2` of the `idx`-th vector of `F_q^p` (base-q digits).
pub fn nth_vector(f: Field, idx: u64) -> Vec<FieldElem> {
    let q = f.size() as u64;
    let mut rest = idx;
    (0..f.characteristic())
        .map(|_| {
            let d = (rest % q) as u32;
            rest /= q;
            f.elem(d)
        })
        .collect()
}

/// Indices to visit in a domain of size `n`: everything when `n <= limit`,
/// else a seeded sample.
pub fn domain(n: u64, limit: u64, seed: u64) -> (Vec<u64>, bool) {
    if n <= limit {
        return ((0..n).collect(), true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ((0..SAMPLE_SIZE).map(|_| rng.gen_range(0..n)).collect(), false)
}

fn vector_count(f: Field) -> u64 {
    (f.size() as u64).saturating_pow(f.characteristic())
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, HarnessError> {
    if !SUITES.contains(&cfg.suite.as_str()) {
        return Err(HarnessError::UnknownSuite(cfg.suite.clone()));
    }
    let f = make_field(cfg.p, cfg.ext)?;
    let start = Instant::now();
    let (tally, payload) = match cfg.suite.as_str() {
        "witt-core" => witt_core(f, cfg),
        "orbits-w" => orbits_w(f, cfg),
        "closures-w" => closures_w(f, cfg)?,
        "wlambda" => wlambda(f, cfg),
        "orbits-dual" => orbits_dual(f, cfg),
        "closures-dual" => closures_dual(f, cfg)?,
        "height-p1" => height_p1(cfg)?,
        "invariants" => invariants(f),
        _ => unreachable!(),
    };
    Ok(SuiteReport {
        suite: cfg.suite.clone(),
        p: cfg.p,
        field: field_name(f),
        seed: cfg.seed,
        exhaustive: !tally.sampled,
        points: tally.points,
        passes: tally.passes,
        failures: tally.failures,
        elapsed_ms: start.elapsed().as_millis() as u64,
        failure_exemplars: tally.exemplars,
        payload,
    })
}

pub fn field_name(f: Field) -> String {
    if f.degree() == 1 {
        format!("F_{}", f.characteristic())
    } else {
        format!("F_{}", f.size())
    }
}

fn witt_core(f: Field, cfg: &SuiteConfig) -> (Tally, serde_json::Value) {
    let p = f.characteristic() as i32;
    let mut tally = Tally::default();
    let e = |i: i32| WittElem::basis(f, i);
    for i in -1..=p - 2 {
        for j in -1..=p - 2 {
            tally.check(bracket(&e(i), &e(j)) == bracket(&e(j), &e(i)).scale(-f.one()), || {
                format!("antisymmetry fails for e_{i}, e_{j}")
            });
            for k in -1..=p - 2 {
                let (x, y, z) = (e(i), e(j), e(k));
                let jac = bracket(&x, &bracket(&y, &z))
                    .add(&bracket(&y, &bracket(&z, &x)))
                    .add(&bracket(&z, &bracket(&x, &y)));
                tally.check(jac.is_zero(), || format!("Jacobi fails for e_{i}, e_{j}, e_{k}"));
            }
        }
    }
    for a in f.elements() {
        let w = e(-1).add(&e(p - 2).scale(a));
        tally.check(char_phi(&w).ok() == Some(a), || format!("phi(e_-1 + {a} e_{}) != {a}", p - 2));
    }
    let (idx, exhaustive) = domain(vector_count(f), EXHAUSTIVE_LIMIT, cfg.seed);
    let t = scan(idx.len() as u64, cfg.jobs, |k, t| {
        let w = WittElem::from_coeffs(nth_vector(f, idx[k as usize]));
        let cp = char_poly(&w);
        let shape = cp.iter().enumerate().all(|(d, c)| d == 1 || d == p as usize || c.is_zero());
        t.check(shape, || format!("char poly of {w} has extra terms"));
        let ok = match (p_power(&w), char_phi(&w)) {
            (Ok(wp), Ok(phi)) => wp == w.scale(-phi),
            _ => false,
        };
        t.check(ok, || format!("w^[p] != -phi(w) w for w = {w}"));
    });
    tally.merge(t);
    tally.sampled = !exhaustive;
    (tally, serde_json::json!({"elements": idx.len()}))
}

fn wlambda(f: Field, cfg: &SuiteConfig) -> (Tally, serde_json::Value) {
    let (idx, exhaustive) = domain(vector_count(f), WLAMBDA_LIMIT, cfg.seed);
    let mut tally = scan(idx.len() as u64, cfg.jobs, |k, t| {
        let w = WittElem::from_coeffs(nth_vector(f, idx[k as usize]));
        if w.is_zero() {
            return;
        }
        let (Ok(wp), Ok(phi)) = (p_power(&w), char_phi(&w)) else {
            t.check(false, || format!("p-map or phi failed for {w}"));
            return;
        };
        // w in W(-a) <=> phi(w) = a, for every a; w^[p] is a multiple of w
        // exactly once, so compare the eigenvalue with -phi
        let lambda = if wp.is_zero() {
            Some(f.zero())
        } else {
            let i = w.degree().unwrap();
            let l = wp.coeff(i) / w.coeff(i);
            (wp == w.scale(l)).then_some(l)
        };
        t.check(lambda == Some(-phi), || format!("{w}: w^[p] = {wp}, phi = {phi}"));
    });
    tally.sampled = !exhaustive;
    (tally, serde_json::json!({"identity": "w^[p] = -a w <=> phi(w) = a"}))
}

fn orbits_w(f: Field, cfg: &SuiteConfig) -> (Tally, serde_json::Value) {
    let table = ClosureTableW::new(f.characteristic()).expect("closure data");
    let (idx, exhaustive) = domain(vector_count(f), EXHAUSTIVE_LIMIT, cfg.seed);
    let mut tally = scan(idx.len() as u64, cfg.jobs, |k, t| {
        let w = WittElem::from_coeffs(nth_vector(f, idx[k as usize]));
        if w.is_zero() {
            t.check(canonicalize_w(&w) == Err(OrbitError::ZeroElement), || "zero element accepted".into());
            return;
        }
        match canonicalize_w(&w) {
            Ok((cls, wit)) => {
                let ctx = wit.sigma.ctx();
                let ok = cls.representative(ctx).is_ok_and(|rep| Ok(act_witt(&wit.sigma, &rep)) == w.embed(ctx));
                t.check(ok, || format!("witness for {w} does not map the representative to it"));
                t.check(table.classify(&w).as_ref() == Ok(&cls), || format!("invariants disagree on the class of {w}"));
                if cls.degree() == 0 {
                    t.check(cls.param() == Some(w.coeff(0)), || format!("a e_0 class of {w} has the wrong parameter"));
                }
            }
            Err(e) => t.check(false, || format!("{w}: {e}")),
        }
    });
    tally.sampled = !exhaustive;
    (tally, serde_json::json!({}))
}

/// `{g = 0, x_i != 0}` equals the parametrized set, and both equal the orbit.
pub fn parametrization_check_w(f: Field, table: &ClosureTableW, i: i32, a: FieldElem, t: &mut Tally) {
    let p = f.characteristic() as i32;
    let ClosureDataW::Hypersurface { elim, g, .. } = table.get(i) else { return };
    let q = f.size() as u64;
    let free = (p - 1 - i) as u32;
    let cls = OrbitClassW::new(p as u32, i, Some(a)).expect("class");
    for idx in 0..q.pow(free) {
        t.point(|t| {
            let mut w = WittElem::zero(f);
            let mut rest = idx;
            for j in i..=p - 2 {
                w.set(j, f.elem((rest % q) as u32));
                rest /= q;
            }
            let xi = w.coeff(i);
            if xi.is_zero() {
                return;
            }
            let val = |v| match v {
                crate::sympoly::Var::X(j) => Some(w.coeff(j)),
                crate::sympoly::Var::A => Some(a),
                _ => None,
            };
            let on_g = g.evaluate(f, val).map(|x| x.is_zero()).unwrap_or(false);
            // x_{2i} = sum_j f_j(x) / x_i^{j-1} + a x_i^2
            let mut rhs = a * xi * xi;
            for (&d, comp) in &elim.components {
                rhs += comp.evaluate(f, val).unwrap() * xi.powi(1 - d as i64);
            }
            let in_param = w.coeff(2 * i) == rhs;
            t.check(on_g == in_param, || format!("i = {i}, a = {a}: g = 0 is {on_g}, parametrized is {in_param} at {w}"));
            let in_orbit = canonicalize_w(&w).is_ok_and(|(c, _)| c == cls);
            t.check(in_orbit == in_param, || format!("i = {i}, a = {a}: orbit membership {in_orbit} at {w}"));
        });
    }
}

/// Whether `w` lies in the closure of `cls`, read off from the orbit of `w`:
/// `cl G(e_-1 + a e_{p-2})` adds the `G(b e_0)` with `b^{p-1} = -a` (or all of
/// `W_{>=1}` when `a = 0`), `G(a e_0)` is closed, `cl G(e_i + a e_{2i})` adds
/// `W_{>=i+2}` and `cl G e_i = W_{>=i}`.
pub fn expected_closure_w(w: &WittElem, cls: &OrbitClassW, class_of_w: Option<&OrbitClassW>) -> bool {
    let p = cls.p() as i32;
    let f = w.ctx();
    let in_geq = |k: i32| w.degree().is_none_or(|d| d >= k);
    let a = cls.param().map(|a| f.embed(a).unwrap());
    let same = |c: &OrbitClassW| c.degree() == cls.degree() && c.param().map(|x| f.embed(x).unwrap()) == a;
    match cls.case() {
        crate::worbit::CaseW::Regular => {
            let a = a.unwrap();
            if a.is_zero() {
                class_of_w.is_some_and(|c| same(c)) || in_geq(1)
            } else {
                class_of_w.is_some_and(|c| {
                    same(c) || (c.degree() == 0 && c.param().unwrap().pow(p as u64 - 1) == -a)
                })
            }
        }
        crate::worbit::CaseW::Toral => class_of_w.is_some_and(|c| same(c)),
        crate::worbit::CaseW::Hypersurface => class_of_w.is_some_and(|c| same(c)) || in_geq(cls.degree() + 2),
        crate::worbit::CaseW::Single => in_geq(cls.degree()),
    }
}

/// Every class with parameters in `f`.
pub fn all_classes_w(f: Field) -> Vec<OrbitClassW> {
    let p = f.characteristic();
    let mut out = Vec::new();
    for i in -1..=p as i32 - 2 {
        match crate::worbit::case_w(p, i) {
            crate::worbit::CaseW::Single => out.push(OrbitClassW::new(p, i, None).unwrap()),
            crate::worbit::CaseW::Toral => {
                out.extend(f.nonzero_elements().map(|a| OrbitClassW::new(p, i, Some(a)).unwrap()))
            }
            _ => out.extend(f.elements().map(|a| OrbitClassW::new(p, i, Some(a)).unwrap())),
        }
    }
    out
}

fn closures_w(f: Field, cfg: &SuiteConfig) -> Result<(Tally, serde_json::Value), HarnessError> {
    let p = f.characteristic();
    let table = ClosureTableW::new(p)?;
    let mut tally = Tally::default();
    let mut data = Vec::new();
    for i in 1..(p as i32 - 1) / 2 {
        data.push(table.get(i).to_json(p));
        for a in f.elements() {
            parametrization_check_w(f, &table, i, a, &mut tally);
            // boundary of the hypersurface orbit inside W_{>=i}: exactly W_{>=i+2}
            boundary_check_w(f, &table, i, a, &mut tally);
        }
    }
    let classes = all_classes_w(f);
    let (idx, exhaustive) = domain(vector_count(f), EXHAUSTIVE_LIMIT / 100, cfg.seed);
    let t = scan(idx.len() as u64, cfg.jobs, |k, t| {
        let w = WittElem::from_coeffs(nth_vector(f, idx[k as usize]));
        let class_of_w = if w.is_zero() { None } else { canonicalize_w(&w).ok().map(|x| x.0) };
        for cls in &classes {
            let want = expected_closure_w(&w, cls, class_of_w.as_ref());
            t.check_result(table.in_closure(&w, cls).map(|got| got == want), || {
                format!("closure of class (degree {}, a = {:?}) at {w}: expected {want}", cls.degree(), cls.param())
            });
        }
    });
    tally.merge(t);
    tally.sampled = !exhaustive;
    Ok((tally, serde_json::json!({"closures": data})))
}

/// Points of `V(g) n W_{>=i}` outside the orbit are exactly `W_{>=i+2}`.
pub fn boundary_check_w(f: Field, table: &ClosureTableW, i: i32, a: FieldElem, t: &mut Tally) {
    let p = f.characteristic() as i32;
    let q = f.size() as u64;
    let cls = OrbitClassW::new(p as u32, i, Some(a)).unwrap();
    for idx in 0..q.pow((p - 1 - i) as u32) {
        t.point(|t| {
            let mut w = WittElem::zero(f);
            let mut rest = idx;
            for j in i..=p - 2 {
                w.set(j, f.elem((rest % q) as u32));
                rest /= q;
            }
            let Ok(member) = table.in_closure(&w, &cls) else {
                t.check(false, || format!("closure predicate failed at {w}"));
                return;
            };
            if !member {
                return;
            }
            let in_orbit = !w.is_zero() && canonicalize_w(&w).is_ok_and(|(c, _)| c == cls);
            let boundary = !in_orbit;
            let deep = w.degree().is_none_or(|d| d >= i + 2);
            t.check(boundary == deep, || format!("i = {i}, a = {a}: boundary point {w} has degree {:?}", w.degree()));
        });
    }
}

fn orbits_dual(f: Field, cfg: &SuiteConfig) -> (Tally, serde_json::Value) {
    let p = f.characteristic();
    let table = ClosureTableDual::new(p).expect("closure data");
    let (idx, exhaustive) = domain(vector_count(f), EXHAUSTIVE_LIMIT, cfg.seed);
    let mut tally = scan(idx.len() as u64, cfg.jobs, |k, t| {
        let chi = Character::from_coeffs(nth_vector(f, idx[k as usize]));
        if chi.is_zero() {
            t.check(height(&chi) == -1, || "height of 0".into());
            return;
        }
        match canonicalize_dual(&chi) {
            Ok((cls, wit)) => {
                let ctx = wit.sigma.ctx();
                let ok = cls.representative(ctx).is_ok_and(|rep| Ok(act_dual(&wit.sigma, &rep)) == chi.embed(ctx));
                t.check(ok, || format!("witness for {chi} does not map the representative to it"));
                t.check(cls.height() == height(&chi), || format!("height mismatch for {chi}"));
                let agree = table.classify(&chi).is_ok_and(|c| c.same_class(&cls));
                t.check(agree, || format!("invariants disagree on the class of {chi}"));
            }
            Err(e) => t.check(false, || format!("{chi}: {e}")),
        }
    });
    // k^(2) classes on the representatives themselves
    for r in (3..=p as i32 - 2).step_by(2) {
        let s = (r - 1) / 2;
        for a in f.elements() {
            for b in f.elements() {
                let rep = |x: FieldElem| Character::basis(f, r - 1).add(&Character::basis(f, s).scale(x));
                let same = canonicalize_dual(&rep(a))
                    .and_then(|(x, _)| Ok(x.same_class(&canonicalize_dual(&rep(b))?.0)))
                    .unwrap_or(false);
                tally.check(same == (a * a == b * b), || format!("height {r}: classes of a = {a}, {b}"));
            }
        }
    }
    tally.sampled = !exhaustive;
    (tally, serde_json::json!({}))
}

/// Squared-polynomial description of a case-3 orbit against the explicit
/// parametrization (square root taken in `F_{q^2}`) and the canonical class.
pub fn parametrization_check_dual(f: Field, table: &ClosureTableDual, r: i32, a: FieldElem, t: &mut Tally) {
    let p = f.characteristic();
    let ClosureDataDual::Hypersurface { elim, .. } = table.get(r) else { return };
    let m = r - 1;
    let s = m / 2;
    let q = f.size() as u64;
    let big = f.extension(2).expect("quadratic extension");
    let cls = OrbitClassDual::new(p, r, Some(a)).unwrap();
    for idx in 0..q.pow((m + 2) as u32) {
        t.point(|t| {
            let mut chi = Character::zero(f);
            let mut rest = idx;
            for j in -1..=m {
                chi.set(j, f.elem((rest % q) as u32));
                rest /= q;
            }
            let xm = chi.coeff(m);
            if xm.is_zero() {
                return;
            }
            let on_poly = table.get(r).eval_poly(p, &chi, a).map(|v| v.is_zero()).unwrap_or(false);
            let val = |v| match v {
                crate::sympoly::Var::X(j) => Some(chi.coeff(j)),
                _ => None,
            };
            let mut base = f.zero();
            for (&d, comp) in &elim.components {
                base += comp.evaluate(f, val).unwrap() * xm.powi(1 - d as i64);
            }
            let target = big.embed(chi.coeff(s) - base).unwrap();
            let ae = big.embed(a).unwrap();
            let in_param = big.roots(big.embed(xm).unwrap(), 2).into_iter().any(|y| ae * y == target);
            t.check(on_poly == in_param, || format!("height {r}, a = {a}: polynomial {on_poly}, parametrized {in_param} at {chi}"));
            let in_orbit = canonicalize_dual(&chi).is_ok_and(|(c, _)| c.same_class(&cls));
            t.check(in_orbit == in_param, || format!("height {r}, a = {a}: orbit membership {in_orbit} at {chi}"));
        });
    }
}

/// Dual counterpart of [`expected_closure_w`] for heights up to p-2: `G(a e_0')`
/// is closed, `cl G e_{r-1}' = {height <= r}` and a case-3 closure adds all
/// heights `<= r-2`.
pub fn expected_closure_dual(chi: &Character, cls: &OrbitClassDual, class_of_chi: Option<&OrbitClassDual>) -> bool {
    let h = height(chi);
    let r = cls.height();
    match cls.case() {
        dorbit::CaseDual::Toral | dorbit::CaseDual::Top => class_of_chi.is_some_and(|c| c.same_class(cls)),
        dorbit::CaseDual::Single => h <= r,
        dorbit::CaseDual::Hypersurface => class_of_chi.is_some_and(|c| c.same_class(cls)) || h <= r - 2,
    }
}

pub fn all_classes_dual(f: Field) -> Vec<OrbitClassDual> {
    let p = f.characteristic();
    let mut out = Vec::new();
    for r in 0..=p as i32 - 2 {
        match dorbit::case_dual(p, r) {
            dorbit::CaseDual::Single => out.push(OrbitClassDual::new(p, r, None).unwrap()),
            dorbit::CaseDual::Toral => {
                out.extend(f.nonzero_elements().map(|a| OrbitClassDual::new(p, r, Some(a)).unwrap()))
            }
            _ => out.extend(f.elements().map(|a| OrbitClassDual::new(p, r, Some(a)).unwrap())),
        }
    }
    out
}

fn closures_dual(f: Field, cfg: &SuiteConfig) -> Result<(Tally, serde_json::Value), HarnessError> {
    let p = f.characteristic();
    let table = ClosureTableDual::new(p)?;
    let mut tally = Tally::default();
    let mut data = Vec::new();
    for r in (3..=p as i32 - 2).step_by(2) {
        data.push(table.get(r).to_json(p));
        if (f.size() as u64).pow(r as u32 + 1) <= EXHAUSTIVE_LIMIT {
            for a in f.elements() {
                parametrization_check_dual(f, &table, r, a, &mut tally);
            }
        } else {
            tally.sampled = true;
        }
    }
    let classes = all_classes_dual(f);
    let (idx, exhaustive) = domain(vector_count(f), EXHAUSTIVE_LIMIT / 100, cfg.seed);
    let t = scan(idx.len() as u64, cfg.jobs, |k, t| {
        let chi = Character::from_coeffs(nth_vector(f, idx[k as usize]));
        let class_of = if chi.is_zero() { None } else { canonicalize_dual(&chi).ok().map(|x| x.0) };
        for cls in &classes {
            let want = expected_closure_dual(&chi, cls, class_of.as_ref());
            t.check_result(table.in_closure(&chi, cls, None).map(|got| got == want), || {
                format!("closure of class (height {}, a = {:?}) at {chi}: expected {want}", cls.height(), cls.param())
            });
        }
    });
    tally.merge(t);
    tally.sampled |= !exhaustive;
    Ok((tally, serde_json::json!({"closures": data})))
}

fn height_p1(cfg: &SuiteConfig) -> Result<(Tally, serde_json::Value), HarnessError> {
    let mut tally = Tally::default();
    let report = resolve_height_p1(cfg.p)?;
    tally.check(report.verified, || "resolver certificate not verified".into());
    for c in &report.checks {
        tally.check(true, || c.clone());
    }
    Ok((tally, serde_json::to_value(&report).expect("serializable report")))
}

fn invariants(f: Field) -> (Tally, serde_json::Value) {
    let mut tally = Tally::default();
    let mut certs = Vec::new();
    for a in f.prime_field().elements() {
        match invariants_check(f.characteristic(), a) {
            Ok(c) => {
                tally.check(c.psi_zero && c.psi_members == f.characteristic() - 1, || format!("a = {a}: psi check incomplete"));
                certs.push(serde_json::to_value(&c).expect("serializable"));
            }
            Err(e) => tally.check(false, || format!("a = {a}: {e}")),
        }
    }
    (tally, serde_json::json!({"certificates": certs}))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_representatives() {
        assert_eq!(signed(4, 5), -1);
        assert_eq!(signed(2, 5), 2);
        assert_eq!(signed(0, 7), 0);
    }

    #[test]
    fn scan_is_independent_of_jobs() {
        let run = |jobs| {
            scan(1000, jobs, |i, t| t.check(i % 7 != 3, || format!("bad {i}")))
        };
        let one = run(1);
        assert_eq!(one.failures, 143);
        assert_eq!(one.exemplars.len(), MAX_EXEMPLARS);
        for jobs in [2, 3, 8] {
            assert_eq!(run(jobs), one);
        }
    }

    #[test]
    fn report_round_trip() {
        let rep = run_suite(&SuiteConfig::new("height-p1", 5)).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<SuiteReport>(&text).unwrap(), rep);
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_suite(&SuiteConfig::new("nope", 5)), Err(HarnessError::UnknownSuite(_))));
    }
}
