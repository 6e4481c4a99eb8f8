//! Truncated noncommutative power series over F_p in Lazard-ordered variables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::chevmodel::{lazard_coordinates, variable_labels, GroupElement, Model};
use crate::error::{Error, Result};
use crate::modular::{binomial_mod_p, digits};

/// Truncation value meaning "exact polynomial".
pub const UNTRUNCATED: u32 = u32::MAX;

/// Normal-ordered monomial `y_1^{e_1} ... y_d^{e_d}`; ordered by degree, then exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: u32,
    exps: Box<[u16]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { degree: 0, exps: vec![0; nvars].into_boxed_slice() }
    }

    pub fn var(nvars: usize, i: usize, e: u32) -> Self {
        let mut exps = vec![0u16; nvars];
        exps[i] = e as u16;
        Monomial { degree: e, exps: exps.into_boxed_slice() }
    }

    pub fn from_exponents(exps: Vec<u32>) -> Result<Self> {
        let degree = exps.iter().sum();
        let exps = exps
            .into_iter()
            .map(|e| u16::try_from(e).map_err(|_| Error::Domain(format!("exponent {e} too large"))))
            .collect::<Result<Vec<u16>>>()?;
        Ok(Monomial { degree, exps: exps.into_boxed_slice() })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> Vec<u32> {
        self.exps.iter().map(|&e| e as u32).collect()
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.exps[i] as u32
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    pub fn first_var(&self) -> Option<usize> {
        self.exps.iter().position(|&e| e > 0)
    }

    pub fn last_var(&self) -> Option<usize> {
        self.exps.iter().rposition(|&e| e > 0)
    }

    /// Exponent-wise sum; equals the noncommutative product only when already ordered.
    pub fn times(&self, o: &Monomial) -> Monomial {
        let exps: Vec<u16> = self.exps.iter().zip(o.exps.iter()).map(|(a, b)| a + b).collect();
        Monomial { degree: self.degree + o.degree, exps: exps.into_boxed_slice() }
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        self.exps.iter().zip(o.exps.iter()).all(|(a, b)| a <= b)
    }

    /// Exponent-wise difference; caller guarantees `o` divides `self`.
    pub fn quotient(&self, o: &Monomial) -> Monomial {
        let exps: Vec<u16> = self.exps.iter().zip(o.exps.iter()).map(|(a, b)| a - b).collect();
        Monomial { degree: self.degree - o.degree, exps: exps.into_boxed_slice() }
    }

    fn with_exponent(&self, i: usize, e: u32) -> Monomial {
        let mut exps = self.exps.to_vec();
        let old = exps[i] as u32;
        exps[i] = e as u16;
        Monomial { degree: self.degree + e - old, exps: exps.into_boxed_slice() }
    }

    pub fn render(&self, vars: &[String]) -> String {
        if self.is_one() {
            return "1".into();
        }
        let parts: Vec<String> = self
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    format!("y[{}]", vars[i])
                } else {
                    format!("y[{}]^{}", vars[i], e)
                }
            })
            .collect();
        parts.join("*")
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

/// Identifies the algebra a series lives in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeriesContext {
    pub label: String,
    pub p: u64,
    pub vars: Vec<String>,
}

impl SeriesContext {
    pub fn new(label: impl Into<String>, p: u64, vars: Vec<String>) -> Arc<Self> {
        Arc::new(SeriesContext { label: label.into(), p, vars })
    }

    pub fn for_model(model: &Model) -> Arc<Self> {
        Self::new(model.root_system().label(), model.p(), variable_labels(model.root_system()))
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn describe(&self) -> String {
        format!("{} at p={} ({} vars)", self.label, self.p, self.vars.len())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct IwasawaSeries {
    ctx: Arc<SeriesContext>,
    trunc: u32,
    terms: BTreeMap<Monomial, u32>,
}

impl fmt::Debug for IwasawaSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for IwasawaSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, &c)| {
                if m.is_one() {
                    c.to_string()
                } else if c == 1 {
                    m.render(&self.ctx.vars)
                } else {
                    format!("{}*{}", c, m.render(&self.ctx.vars))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl IwasawaSeries {
    pub fn zero(ctx: &Arc<SeriesContext>, trunc: u32) -> Self {
        IwasawaSeries { ctx: ctx.clone(), trunc, terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &Arc<SeriesContext>, trunc: u32, c: i64) -> Self {
        let mut s = Self::zero(ctx, trunc);
        s.add_term(Monomial::one(ctx.nvars()), reduce(c, ctx.p));
        s
    }

    pub fn one(ctx: &Arc<SeriesContext>, trunc: u32) -> Self {
        Self::constant(ctx, trunc, 1)
    }

    pub fn variable(ctx: &Arc<SeriesContext>, trunc: u32, i: usize) -> Self {
        Self::monomial(ctx, trunc, Monomial::var(ctx.nvars(), i, 1), 1)
    }

    pub fn monomial(ctx: &Arc<SeriesContext>, trunc: u32, m: Monomial, c: i64) -> Self {
        let mut s = Self::zero(ctx, trunc);
        s.add_term(m, reduce(c, ctx.p));
        s
    }

    pub fn from_terms(ctx: &Arc<SeriesContext>, trunc: u32, terms: impl IntoIterator<Item = (Monomial, i64)>) -> Self {
        let mut s = Self::zero(ctx, trunc);
        for (m, c) in terms {
            s.add_term(m, reduce(c, ctx.p));
        }
        s
    }

    pub fn context(&self) -> &Arc<SeriesContext> {
        &self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p
    }

    pub fn truncation(&self) -> u32 {
        self.trunc
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, u32> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> u32 {
        self.coefficient(&Monomial::one(self.ctx.nvars()))
    }

    /// Adds `c * m`, dropping terms above the truncation and zero coefficients.
    pub fn add_term(&mut self, m: Monomial, c: u32) {
        if c == 0 || m.degree > self.trunc {
            return;
        }
        let p = self.ctx.p as u32;
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c % p);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = (*o.get() + c) % p;
                if v == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    fn check_ctx(&self, o: &IwasawaSeries) -> Result<()> {
        if self.ctx != o.ctx {
            return Err(Error::Context(self.ctx.describe(), o.ctx.describe()));
        }
        Ok(())
    }

    pub fn add(&self, o: &IwasawaSeries) -> Result<IwasawaSeries> {
        self.check_ctx(o)?;
        let mut out = self.truncate(self.trunc.min(o.trunc));
        for (m, &c) in &o.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &IwasawaSeries) -> Result<IwasawaSeries> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> IwasawaSeries {
        self.scale(-1)
    }

    pub fn scale(&self, c: i64) -> IwasawaSeries {
        let p = self.ctx.p;
        let c = reduce(c, p) as u64;
        let mut out = Self::zero(&self.ctx, self.trunc);
        for (m, &v) in &self.terms {
            out.add_term(m.clone(), (v as u64 * c % p) as u32);
        }
        out
    }

    pub fn truncate(&self, d: u32) -> IwasawaSeries {
        let trunc = self.trunc.min(d);
        IwasawaSeries {
            ctx: self.ctx.clone(),
            trunc,
            terms: self.terms.iter().filter(|(m, _)| m.degree <= trunc).map(|(m, &c)| (m.clone(), c)).collect(),
        }
    }

    pub fn with_truncation(&self, d: u32) -> IwasawaSeries {
        let mut s = self.truncate(d);
        s.trunc = d;
        s
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree)
    }

    pub fn homogeneous_part(&self, d: u32) -> HomogeneousPolynomial {
        let terms = self.terms.iter().filter(|(m, _)| m.degree == d).map(|(m, &c)| (m.clone(), c)).collect();
        HomogeneousPolynomial {
            series: IwasawaSeries { ctx: self.ctx.clone(), trunc: UNTRUNCATED, terms },
            degree: d,
        }
    }

    /// Homogeneous parts in increasing degree.
    pub fn homogeneous_parts(&self) -> Vec<HomogeneousPolynomial> {
        let mut out: Vec<HomogeneousPolynomial> = Vec::new();
        for (m, &c) in &self.terms {
            if out.last().map(|h| h.degree) != Some(m.degree) {
                out.push(HomogeneousPolynomial::zero(&self.ctx, m.degree));
            }
            out.last_mut().unwrap().series.add_term(m.clone(), c);
        }
        out
    }

    pub fn leading_term(&self) -> Result<HomogeneousPolynomial> {
        let d = self.min_degree().ok_or(Error::NoLeadingTerm)?;
        Ok(self.homogeneous_part(d))
    }

    /// Exponent-wise (commutative) product, used in the associated graded ring.
    pub fn commutative_mul(&self, o: &IwasawaSeries) -> Result<IwasawaSeries> {
        self.check_ctx(o)?;
        let p = self.ctx.p;
        let mut out = Self::zero(&self.ctx, self.trunc.min(o.trunc));
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &o.terms {
                out.add_term(ma.times(mb), (ca as u64 * cb as u64 % p) as u32);
            }
        }
        Ok(out)
    }

    /// Each variable raised to the `q`-th power: `f(y) -> f(y^q)`.
    pub fn frobenius_substitute(&self, q: u32) -> Result<IwasawaSeries> {
        let mut out = Self::zero(&self.ctx, UNTRUNCATED);
        for (m, &c) in &self.terms {
            let exps = m.exponents().into_iter().map(|e| e * q).collect();
            out.add_term(Monomial::from_exponents(exps)?, c);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            p: self.ctx.p,
            trunc: self.trunc,
            vars: self.ctx.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| TermJson { e: m.exponents(), c })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("series JSON is always serializable")
    }

    pub fn from_json(json: &SeriesJson, ctx: &Arc<SeriesContext>) -> Result<IwasawaSeries> {
        if json.p != ctx.p || json.vars != ctx.vars {
            return Err(Error::Context(
                format!("p={} vars={:?}", json.p, json.vars),
                ctx.describe(),
            ));
        }
        let mut s = Self::zero(ctx, json.trunc);
        for t in &json.terms {
            if t.e.len() != ctx.nvars() {
                return Err(Error::Parse(format!("exponent vector of length {} expected", ctx.nvars())));
            }
            s.add_term(Monomial::from_exponents(t.e.clone())?, (t.c as u64 % ctx.p) as u32);
        }
        Ok(s)
    }
}

fn reduce(c: i64, p: u64) -> u32 {
    c.rem_euclid(p as i64) as u32
}

/// A series whose terms all share one total degree.
#[derive(Clone, PartialEq, Eq)]
pub struct HomogeneousPolynomial {
    series: IwasawaSeries,
    degree: u32,
}

impl fmt::Debug for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[deg {}] {}", self.degree, self.series)
    }
}

impl fmt::Display for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.series)
    }
}

impl HomogeneousPolynomial {
    pub fn zero(ctx: &Arc<SeriesContext>, degree: u32) -> Self {
        HomogeneousPolynomial { series: IwasawaSeries::zero(ctx, UNTRUNCATED), degree }
    }

    pub fn new(series: IwasawaSeries) -> Result<Self> {
        let degree = series.min_degree().unwrap_or(0);
        if series.max_degree().unwrap_or(0) != degree {
            return Err(Error::Domain("series is not homogeneous".into()));
        }
        Ok(HomogeneousPolynomial { series: series.with_truncation(UNTRUNCATED), degree })
    }

    pub fn with_degree(series: IwasawaSeries, degree: u32) -> Result<Self> {
        if series.terms.keys().any(|m| m.degree != degree) {
            return Err(Error::Domain("series is not homogeneous of the given degree".into()));
        }
        Ok(HomogeneousPolynomial { series: series.with_truncation(UNTRUNCATED), degree })
    }

    pub fn series(&self) -> &IwasawaSeries {
        &self.series
    }

    pub fn into_series(self) -> IwasawaSeries {
        self.series
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    pub fn context(&self) -> &Arc<SeriesContext> {
        &self.series.ctx
    }
}

/// `sum_k C(lambda, k) y_i^k` for `k <= d`, coefficients mod p by Lucas' theorem.
pub fn binomial_expand(ctx: &Arc<SeriesContext>, var: usize, lambda: u64, d: u32) -> IwasawaSeries {
    let mut s = IwasawaSeries::zero(ctx, d);
    for (k, c) in binomial_support(lambda, ctx.p, d) {
        s.add_term(Monomial::var(ctx.nvars(), var, k), c);
    }
    s
}

/// Nonzero `(k, C(lambda,k) mod p)` with `k <= d`, generated digit by digit.
fn binomial_support(lambda: u64, p: u64, d: u32) -> Vec<(u32, u32)> {
    let mut len = 1;
    while p.checked_pow(len as u32).is_some_and(|q| q <= d as u64) {
        len += 1;
    }
    let ld = digits(lambda, p, len);
    let mut out = vec![(0u64, 1u64)];
    let mut place = 1u64;
    for &dig in &ld {
        let mut next = Vec::new();
        for &(k, c) in &out {
            for kd in 0..=dig {
                let nk = k + kd * place;
                if nk > d as u64 {
                    break;
                }
                let cc = c * binomial_mod_p(dig, kd, p) % p;
                if cc != 0 {
                    next.push((nk, cc));
                }
            }
        }
        out = next;
        place *= p;
    }
    out.sort();
    out.into_iter().map(|(k, c)| (k as u32, c as u32)).collect()
}

/// Expansion of `prod_i (1 + y_i)^{lambda_i}` in variable order, truncated at `d`.
pub fn coordinates_to_series(ctx: &Arc<SeriesContext>, lambda: &[u64], d: u32) -> IwasawaSeries {
    let n = ctx.nvars();
    let mut partial: Vec<(Vec<u16>, u32, u32)> = vec![(vec![0u16; n], 0, 1)];
    let p = ctx.p;
    for (var, &l) in lambda.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let support = binomial_support(l, p, d);
        let mut next = Vec::with_capacity(partial.len() * support.len());
        for (exps, deg, c) in &partial {
            for &(k, ck) in &support {
                if deg + k > d {
                    break;
                }
                let mut e = exps.clone();
                e[var] = k as u16;
                next.push((e, deg + k, (*c as u64 * ck as u64 % p) as u32));
            }
        }
        partial = next;
    }
    let mut s = IwasawaSeries::zero(ctx, d);
    for (exps, deg, c) in partial {
        s.add_term(Monomial { degree: deg, exps: exps.into_boxed_slice() }, c);
    }
    s
}

/// Checks that Lazard exponents mod p^{N-1} determine all coefficients up to degree `d`.
pub fn check_precision(model: &Model, d: u32) -> Result<()> {
    let p = model.p();
    let lambda_mod = model.ring().modulus / p;
    if (d as u64) >= lambda_mod {
        return Err(Error::Precision(format!(
            "degree {d} needs p^(N-1) > {d}, but p^(N-1) = {lambda_mod}"
        )));
    }
    Ok(())
}

/// The image `prod (1+y_i)^{lambda_i}` of a group element, truncated at `d`.
pub fn element_to_series(model: &Model, g: &GroupElement, d: u32) -> Result<IwasawaSeries> {
    check_precision(model, d)?;
    let lam = lazard_coordinates(model, g)?;
    Ok(coordinates_to_series(&SeriesContext::for_model(model), &lam.lambda, d))
}

/// Formal derivative in `z = y_var^{p^s}`.
pub fn partial_derivative(w: &IwasawaSeries, var: usize, s: u32) -> Result<IwasawaSeries> {
    let p = w.ctx.p;
    let q = p.pow(s) as u32;
    let mut out = IwasawaSeries::zero(&w.ctx, w.trunc);
    for (m, &c) in &w.terms {
        let e = m.exponent(var);
        if e % q != 0 {
            return Err(Error::Domain(format!(
                "exponent {e} of {} is not divisible by p^{s}",
                w.ctx.vars[var]
            )));
        }
        let n = (e / q) as u64;
        let coef = n % p * c as u64 % p;
        if coef == 0 {
            continue;
        }
        out.add_term(m.with_exponent(var, e - q), coef as u32);
    }
    Ok(out)
}

type Terms = Vec<(Monomial, u32)>;

/// Multiplication engine: normal-form rewriting with precomputed commutation rules.
pub struct SeriesAlgebra {
    ctx: Arc<SeriesContext>,
    trunc: u32,
    /// `corrections[j][i] = y_j y_i - y_i y_j` for `j > i`.
    corrections: Vec<Vec<Arc<Terms>>>,
    memo: Mutex<HashMap<(Monomial, Monomial), Arc<Terms>>>,
}

impl fmt::Debug for SeriesAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesAlgebra").field("ctx", &self.ctx).field("trunc", &self.trunc).finish()
    }
}

impl SeriesAlgebra {
    pub fn new(model: &Model, trunc: u32) -> Result<Self> {
        check_precision(model, trunc)?;
        let ctx = SeriesContext::for_model(model);
        let n = ctx.nvars();
        let gens: Vec<GroupElement> = (0..n).map(|v| model.generator(v)).collect();
        let mut corrections = Vec::with_capacity(n);
        for j in 0..n {
            let mut row = Vec::with_capacity(j);
            for i in 0..j {
                let gji = model.mul(&gens[j], &gens[i]);
                let mut s = element_to_series(model, &gji, trunc)?;
                // subtract (1 + y_i)(1 + y_j)
                let mut ordered = vec![0u64; n];
                ordered[i] = 1;
                ordered[j] = 1;
                s = s.sub(&coordinates_to_series(&ctx, &ordered, trunc))?;
                if let Some(low) = s.min_degree() {
                    if low < 3 {
                        return Err(Error::Domain(format!(
                            "commutation correction of degree {low} would not terminate"
                        )));
                    }
                }
                row.push(Arc::new(s.terms.into_iter().collect::<Terms>()));
            }
            corrections.push(row);
        }
        Ok(SeriesAlgebra { ctx, trunc, corrections, memo: Mutex::new(HashMap::new()) })
    }

    pub fn context(&self) -> &Arc<SeriesContext> {
        &self.ctx
    }

    pub fn truncation(&self) -> u32 {
        self.trunc
    }

    pub fn p(&self) -> u64 {
        self.ctx.p
    }

    pub fn nvars(&self) -> usize {
        self.ctx.nvars()
    }

    pub fn one(&self) -> IwasawaSeries {
        IwasawaSeries::one(&self.ctx, self.trunc)
    }

    pub fn zero(&self) -> IwasawaSeries {
        IwasawaSeries::zero(&self.ctx, self.trunc)
    }

    pub fn variable(&self, i: usize) -> IwasawaSeries {
        IwasawaSeries::variable(&self.ctx, self.trunc, i)
    }

    pub fn variable_power(&self, i: usize, e: u32) -> IwasawaSeries {
        IwasawaSeries::monomial(&self.ctx, self.trunc, Monomial::var(self.nvars(), i, e), 1)
    }

    /// `y_j y_i - y_i y_j` for `j > i`, truncated at the algebra's degree.
    pub fn correction(&self, j: usize, i: usize) -> IwasawaSeries {
        let mut s = IwasawaSeries::zero(&self.ctx, self.trunc);
        for (m, c) in self.corrections[j][i].iter() {
            s.add_term(m.clone(), *c);
        }
        s
    }

    fn check(&self, a: &IwasawaSeries) -> Result<()> {
        if *a.ctx != *self.ctx {
            return Err(Error::Context(a.ctx.describe(), self.ctx.describe()));
        }
        Ok(())
    }

    pub fn multiply(&self, a: &IwasawaSeries, b: &IwasawaSeries) -> Result<IwasawaSeries> {
        self.check(a)?;
        self.check(b)?;
        let trunc = a.trunc.min(b.trunc).min(self.trunc);
        let p = self.ctx.p;
        let mut acc: HashMap<Monomial, u64> = HashMap::new();
        for (ma, &ca) in &a.terms {
            if ma.degree > trunc {
                break;
            }
            for (mb, &cb) in &b.terms {
                if ma.degree + mb.degree > trunc {
                    break;
                }
                let cab = ca as u64 * cb as u64 % p;
                for (m, c) in self.mul_mono(ma, mb).iter() {
                    if m.degree <= trunc {
                        let e = acc.entry(m.clone()).or_insert(0);
                        *e = (*e + cab * *c as u64) % p;
                    }
                }
            }
        }
        let mut out = IwasawaSeries::zero(&self.ctx, trunc);
        for (m, c) in acc {
            out.add_term(m, c as u32);
        }
        Ok(out)
    }

    pub fn commutator(&self, a: &IwasawaSeries, b: &IwasawaSeries) -> Result<IwasawaSeries> {
        self.multiply(a, b)?.sub(&self.multiply(b, a)?)
    }

    pub fn power(&self, a: &IwasawaSeries, n: u32) -> Result<IwasawaSeries> {
        let mut acc = self.one().truncate(a.trunc);
        for _ in 0..n {
            acc = self.multiply(&acc, a)?;
        }
        Ok(acc)
    }

    /// Normal form of the product of two normal-ordered monomials.
    fn mul_mono(&self, a: &Monomial, b: &Monomial) -> Arc<Terms> {
        if a.degree + b.degree > self.trunc {
            return Arc::new(Vec::new());
        }
        let (Some(last_a), Some(first_b)) = (a.last_var(), b.first_var()) else {
            return Arc::new(vec![(a.times(b), 1)]);
        };
        if last_a <= first_b {
            return Arc::new(vec![(a.times(b), 1)]);
        }
        let key = (a.clone(), b.clone());
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return hit.clone();
        }
        let p = self.ctx.p;
        let n = self.nvars();
        let mut acc: HashMap<Monomial, u64> = HashMap::new();
        let mut push = |m: &Monomial, c: u64| {
            let e = acc.entry(m.clone()).or_insert(0);
            *e = (*e + c) % p;
        };
        let yi = Monomial::var(n, first_b, 1);
        if b.degree > 1 {
            let rest = b.quotient(&yi);
            for (m, c) in self.mul_mono(a, &yi).iter() {
                for (m2, c2) in self.mul_mono(m, &rest).iter() {
                    push(m2, *c as u64 * *c2 as u64);
                }
            }
        } else {
            let yj = Monomial::var(n, last_a, 1);
            let a0 = a.quotient(&yj);
            for (m, c) in self.mul_mono(&a0, &yi).iter() {
                for (m2, c2) in self.mul_mono(m, &yj).iter() {
                    push(m2, *c as u64 * *c2 as u64);
                }
            }
            for (m, c) in self.corrections[last_a][first_b].iter() {
                for (m2, c2) in self.mul_mono(&a0, m).iter() {
                    push(m2, *c as u64 * *c2 as u64);
                }
            }
        }
        let mut terms: Terms = acc.into_iter().filter(|(_, c)| *c != 0).map(|(m, c)| (m, c as u32)).collect();
        terms.sort();
        let terms = Arc::new(terms);
        self.memo.lock().expect("memo lock").insert(key, terms.clone());
        terms
    }

    pub fn memo_size(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub e: Vec<u32>,
    pub c: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub p: u64,
    pub trunc: u32,
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}
