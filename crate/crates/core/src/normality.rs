//! Normality obstructions: principal right-ideal membership at a degree budget,
//! divisibility in the associated graded ring, and the Dynkin-diagram divisibility chase.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chevmodel::{root_variable, torus_variable, variable_labels};
use crate::error::{Error, Result};
use crate::kernel_verify::LeadingTermTable;
use crate::lazseries::{
    partial_derivative, HomogeneousPolynomial, IwasawaSeries, Monomial, SeriesAlgebra, SeriesContext, UNTRUNCATED,
};
use crate::modular::inv_mod_p;
use crate::rootsys::RootSystem;

/// Exact commutative division `f / g` over F_p; `None` when `g` does not divide `f`.
pub fn exact_divide(f: &IwasawaSeries, g: &IwasawaSeries) -> Result<Option<IwasawaSeries>> {
    let ctx = f.context().clone();
    let (lead_m, &lead_c) = g
        .terms()
        .iter()
        .next_back()
        .ok_or_else(|| Error::Precondition("division by zero polynomial".into()))?;
    let p = ctx.p;
    let lead_inv = inv_mod_p(lead_c as u64, p);
    let mut rem = f.with_truncation(UNTRUNCATED);
    let g = g.with_truncation(UNTRUNCATED);
    let mut quotient = IwasawaSeries::zero(&ctx, UNTRUNCATED);
    while let Some((m, &c)) = rem.terms().iter().next_back() {
        if !lead_m.divides(m) {
            return Ok(None);
        }
        let qm = m.quotient(lead_m);
        let qc = (c as u64 * lead_inv % p) as i64;
        let step = IwasawaSeries::monomial(&ctx, UNTRUNCATED, qm, qc);
        quotient = quotient.add(&step)?;
        rem = rem.sub(&g.commutative_mul(&step)?)?;
    }
    Ok(Some(quotient))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisionResult {
    pub divides: bool,
    pub quotient: Option<HomogeneousPolynomial>,
}

/// Divisibility of homogeneous polynomials in the commutative graded ring.
pub fn graded_divides(w_m: &HomogeneousPolynomial, f: &HomogeneousPolynomial) -> Result<DivisionResult> {
    if w_m.is_zero() {
        return Err(Error::Precondition("divisor must be nonzero".into()));
    }
    if f.is_zero() {
        return Ok(DivisionResult {
            divides: true,
            quotient: Some(HomogeneousPolynomial::zero(w_m.context(), f.degree().saturating_sub(w_m.degree()))),
        });
    }
    match exact_divide(f.series(), w_m.series())? {
        Some(q) => Ok(DivisionResult {
            divides: true,
            quotient: Some(HomogeneousPolynomial::with_degree(q, f.degree() - w_m.degree())?),
        }),
        None => Ok(DivisionResult { divides: false, quotient: None }),
    }
}

/// Largest `s` with `p^s` dividing every nonzero exponent; `None` for constants.
pub fn exponent_level(poly: &IwasawaSeries) -> Option<u32> {
    let p = poly.p() as u32;
    let mut best: Option<u32> = None;
    for m in poly.terms().keys() {
        for e in m.exponents() {
            if e == 0 {
                continue;
            }
            let mut v = 0;
            let mut x = e;
            while x % p == 0 {
                x /= p;
                v += 1;
            }
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateCase {
    /// The overall level is attained by the leading part.
    LeadingLevel,
    /// Some higher part has a smaller level than the leading part.
    LowerLevelAbove,
}

#[derive(Clone, Debug)]
pub struct NormalCandidate {
    pub series: IwasawaSeries,
    pub parts: Vec<HomogeneousPolynomial>,
    /// `(degree, level)` for each nonconstant part.
    pub levels: Vec<(u32, Option<u32>)>,
    pub leading_degree: u32,
    pub level: Option<u32>,
    pub case: CandidateCase,
}

pub fn decompose_candidate(w: &IwasawaSeries) -> Result<NormalCandidate> {
    if w.is_zero() {
        return Err(Error::Precondition("candidate must be nonzero".into()));
    }
    let parts = w.homogeneous_parts();
    let levels: Vec<(u32, Option<u32>)> = parts
        .iter()
        .filter(|h| h.degree() > 0)
        .map(|h| (h.degree(), exponent_level(h.series())))
        .collect();
    let level = levels.iter().filter_map(|&(_, s)| s).min();
    let leading = levels.first().map(|&(d, s)| (d, s));
    let leading_degree = leading.map(|(d, _)| d).unwrap_or(0);
    let case = match (leading.and_then(|(_, s)| s), level) {
        (Some(sm), Some(s)) if s < sm => CandidateCase::LowerLevelAbove,
        _ => CandidateCase::LeadingLevel,
    };
    Ok(NormalCandidate { series: w.clone(), parts, levels, leading_degree, level, case })
}

#[derive(Clone, Debug)]
pub struct MembershipWitness {
    pub gamma: usize,
    pub r: u32,
    pub budget: u32,
    /// `D` with `W D = [y_gamma^{p^r}, W]` through the budget (partial when obstructed).
    pub quotient: IwasawaSeries,
    pub residual: IwasawaSeries,
    pub obstruction_degree: Option<u32>,
}

impl MembershipWitness {
    pub fn is_member(&self) -> bool {
        self.obstruction_degree.is_none()
    }
}

/// Solves `W D = [y_gamma^{p^r}, W]` degree by degree through `budget`.
pub fn ideal_membership(alg: &SeriesAlgebra, w: &IwasawaSeries, gamma: usize, r: u32, budget: u32) -> Result<MembershipWitness> {
    if w.is_zero() {
        return Err(Error::Precondition("candidate must be nonzero".into()));
    }
    if budget > alg.truncation() {
        return Err(Error::Inconclusive(format!(
            "budget {budget} exceeds engine truncation {}",
            alg.truncation()
        )));
    }
    let ctx = alg.context().clone();
    let w = w.truncate(budget).with_truncation(budget);
    let y = alg.variable_power(gamma, (ctx.p as u32).pow(r)).with_truncation(budget);
    let target = alg.commutator(&y, &w)?;
    if target.is_zero() {
        return Err(Error::Inconclusive(format!(
            "commutator with y[{}] vanishes through degree {budget}",
            ctx.vars[gamma]
        )));
    }
    let lead = w.leading_term()?;
    let mut quotient = IwasawaSeries::zero(&ctx, budget);
    let mut residual = target;
    while let Some(t) = residual.min_degree() {
        let part = residual.homogeneous_part(t);
        let Some(step) = exact_divide(part.series(), lead.series())? else {
            return Ok(MembershipWitness {
                gamma,
                r,
                budget,
                quotient,
                residual,
                obstruction_degree: Some(t),
            });
        };
        let step = step.with_truncation(budget);
        quotient = quotient.add(&step)?;
        residual = residual.sub(&alg.multiply(&w, &step)?)?;
        if residual.min_degree() == Some(t) {
            return Err(Error::Domain("graded quotient failed to cancel the leading residual".into()));
        }
    }
    Ok(MembershipWitness { gamma, r, budget, quotient, residual, obstruction_degree: None })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "UPPERCASE")]
pub enum ObstructionVerdict {
    Obstructed { gamma: String, degree: u32 },
    Member { budget: u32 },
    Unit,
    Inconclusive { reason: String },
}

impl fmt::Display for ObstructionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObstructionVerdict::Obstructed { gamma, degree } => write!(f, "OBSTRUCTED({gamma}, {degree})"),
            ObstructionVerdict::Member { budget } => write!(f, "MEMBER({budget})"),
            ObstructionVerdict::Unit => write!(f, "UNIT"),
            ObstructionVerdict::Inconclusive { reason } => write!(f, "INCONCLUSIVE({reason})"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub candidate: String,
    pub budget: u32,
    #[serde(flatten)]
    pub verdict: ObstructionVerdict,
}

/// Sweeps every generator at `r = 0` and reports the first failing membership.
pub fn normal_obstruction(alg: &SeriesAlgebra, w: &IwasawaSeries, budget: u32) -> Result<ObstructionReport> {
    if w.is_zero() {
        return Err(Error::Precondition("candidate must be nonzero".into()));
    }
    let candidate = w.to_string();
    if w.constant_term() != 0 {
        return Ok(ObstructionReport { candidate, budget, verdict: ObstructionVerdict::Unit });
    }
    let ctx = alg.context().clone();
    let outcomes: Vec<Result<MembershipWitness>> =
        (0..ctx.nvars()).into_par_iter().map(|g| ideal_membership(alg, w, g, 0, budget)).collect();
    let mut inconclusive = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(wit) => {
                if let Some(degree) = wit.obstruction_degree {
                    return Ok(ObstructionReport {
                        candidate,
                        budget,
                        verdict: ObstructionVerdict::Obstructed { gamma: ctx.vars[wit.gamma].clone(), degree },
                    });
                }
            }
            Err(Error::Inconclusive(reason)) => inconclusive.push(reason),
            Err(e) => return Err(e),
        }
    }
    let verdict = if inconclusive.is_empty() {
        ObstructionVerdict::Member { budget }
    } else {
        ObstructionVerdict::Inconclusive { reason: inconclusive.join("; ") }
    };
    Ok(ObstructionReport { candidate, budget, verdict })
}

/// First generator `y_gamma` with `[y_gamma, W] != 0` through the budget, and that degree.
pub fn centrality_failure(alg: &SeriesAlgebra, w: &IwasawaSeries, budget: u32) -> Result<Option<(usize, u32)>> {
    let w = w.truncate(budget).with_truncation(budget);
    for g in 0..alg.nvars() {
        let c = alg.commutator(&alg.variable(g).with_truncation(budget), &w)?;
        if let Some(d) = c.min_degree() {
            return Ok(Some((g, d)));
        }
    }
    Ok(None)
}

/// True iff some variable has a nonzero derivative in `y^{p^s}`.
pub fn claim52_check(w_m: &HomogeneousPolynomial, s: u32) -> Result<bool> {
    let level = exponent_level(w_m.series());
    if level != Some(s) {
        return Err(Error::Precondition(format!(
            "polynomial must lie in F_p[y^(p^{s})] but not in F_p[y^(p^{})]",
            s + 1
        )));
    }
    for v in 0..w_m.context().nvars() {
        if !partial_derivative(w_m.series(), v, s)?.is_zero() {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug)]
pub struct MultipleDecomposition {
    /// In `F_p[y^{p^s}]`.
    pub u: IwasawaSeries,
    /// In `F_p[y^{p^{s+1}}]`.
    pub v: IwasawaSeries,
}

/// Splits `w_d = w_m u + v` from the residue classes of exponents mod `p^{s+1}`.
pub fn claim54_decompose(
    w_m: &HomogeneousPolynomial,
    w_d: &HomogeneousPolynomial,
    s: u32,
    certificate: &ChaseCertificate,
) -> Result<MultipleDecomposition> {
    if !certificate.is_certified() {
        return Err(Error::Precondition("divisibility of all derivatives is not certified".into()));
    }
    let ctx = w_m.context().clone();
    let p = ctx.p as u32;
    let q = p.pow(s);
    let q1 = q * p;
    let wm = w_m.series();
    let in_upper = |poly: &IwasawaSeries| poly.terms().keys().all(|m| m.exponents().iter().all(|e| e % q1 == 0));
    let mut u = IwasawaSeries::zero(&ctx, UNTRUNCATED);
    let mut v = IwasawaSeries::zero(&ctx, UNTRUNCATED);
    if in_upper(wm) {
        // group w_d by the residue vector n of exponents / p^s mod p
        let mut classes: BTreeMap<Vec<u32>, IwasawaSeries> = BTreeMap::new();
        for (m, &c) in w_d.series().terms() {
            let exps = m.exponents();
            if exps.iter().any(|e| e % q != 0) {
                return Err(Error::Domain(format!("w_d is not in F_p[y^(p^{s})]")));
            }
            let residue: Vec<u32> = exps.iter().map(|e| e % q1).collect();
            let base: Vec<u32> = exps.iter().zip(&residue).map(|(e, r)| e - r).collect();
            let entry = classes.entry(residue).or_insert_with(|| IwasawaSeries::zero(&ctx, UNTRUNCATED));
            entry.add_term(Monomial::from_exponents(base)?, c);
        }
        for (residue, h) in classes {
            let shift = IwasawaSeries::monomial(&ctx, UNTRUNCATED, Monomial::from_exponents(residue.clone())?, 1);
            let divided = exact_divide(&h, wm)?;
            if residue.iter().all(|&e| e == 0) {
                match divided {
                    Some(hq) => u = u.add(&hq)?,
                    None => v = v.add(&h)?,
                }
            } else {
                let hq = divided.ok_or_else(|| {
                    Error::Domain("a residue-class coefficient is not divisible by w_m".into())
                })?;
                u = u.add(&hq.commutative_mul(&shift)?)?;
            }
        }
    } else {
        u = exact_divide(w_d.series(), wm)?
            .ok_or_else(|| Error::Precondition("w_m must lie in F_p[y^(p^(s+1))] or divide w_d".into()))?;
    }
    let rebuilt = wm.commutative_mul(&u)?.add(&v)?;
    if rebuilt != w_d.series().with_truncation(UNTRUNCATED) {
        return Err(Error::Domain("decomposition does not reproduce w_d".into()));
    }
    Ok(MultipleDecomposition { u, v })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PremiseKind {
    /// `sum_i <gamma, delta_i> x_{delta_i}` for a probe root.
    Torus { probe: String, pairing: Vec<i64> },
    /// `x_eta` times the leading term of a commutator with a probe generator.
    RootWeighted { target: String, probe: String, multiplier: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct Premise {
    pub name: String,
    #[serde(flatten)]
    pub kind: PremiseKind,
    pub holds: bool,
    #[serde(skip)]
    pub polynomial: IwasawaSeries,
}

#[derive(Clone, Debug, Serialize)]
pub struct Conclusion {
    pub variable: String,
    /// `multiplier * x = sum d_premise * premise`; `None` when no combination exists.
    pub multiplier: Option<i64>,
    pub combination: Vec<(String, i64)>,
    pub method: String,
    /// The multiplier is divisible by p, so the combination proves nothing.
    pub flagged: bool,
    /// Independent recheck of `w_m | x` by exact division.
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ChaseStatus {
    Certified,
    PremiseFailure { premises: Vec<String> },
    Flagged { variables: Vec<String> },
    ConclusionFailure { variables: Vec<String> },
}

#[derive(Clone, Debug, Serialize)]
pub struct ChaseCertificate {
    #[serde(rename = "type")]
    pub type_label: String,
    pub p: u64,
    pub s: u32,
    pub premises: Vec<Premise>,
    pub conclusions: Vec<Conclusion>,
    pub status: ChaseStatus,
}

impl ChaseCertificate {
    pub fn is_certified(&self) -> bool {
        self.status == ChaseStatus::Certified
    }

    pub fn failing_premises(&self) -> Vec<&str> {
        self.premises.iter().filter(|p| !p.holds).map(|p| p.name.as_str()).collect()
    }
}

/// Probe roots: simple roots, their negatives, the highest root and its negative.
pub fn probe_roots(rs: &RootSystem) -> Vec<usize> {
    let mut out = Vec::new();
    let top = rs.num_roots() - 1;
    let mut push = |r: usize| {
        if !out.contains(&r) {
            out.push(r);
        }
    };
    for i in 0..rs.rank() {
        push(rs.simple_index(i));
    }
    for i in 0..rs.rank() {
        push(rs.negate_index(rs.simple_index(i)));
    }
    push(top);
    push(rs.negate_index(top));
    out
}

/// Integer combination of `rows` equal to `k e_col` with the least positive `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeCombination {
    pub multiplier: i64,
    pub coefficients: Vec<i64>,
}

/// Least multiples of unit vectors in the integer row lattice, one per column.
pub fn lattice_eliminate(rows: &[Vec<i64>]) -> Vec<Option<LatticeCombination>> {
    let n = rows.len();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut h: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut t: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= n {
            break;
        }
        loop {
            let best = (row..n).filter(|&i| h[i][col] != 0).min_by_key(|&i| h[i][col].abs());
            let Some(b) = best else { break };
            h.swap(row, b);
            t.swap(row, b);
            let mut done = true;
            for i in row + 1..n {
                if h[i][col] != 0 {
                    let q = Integer::div_floor(&h[i][col], &h[row][col]);
                    for c in 0..cols {
                        h[i][c] -= q * h[row][c];
                    }
                    for c in 0..n {
                        t[i][c] -= q * t[row][c];
                    }
                    if h[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h[row][col] == 0 {
            continue;
        }
        if h[row][col] < 0 {
            h[row].iter_mut().for_each(|x| *x = -*x);
            t[row].iter_mut().for_each(|x| *x = -*x);
        }
        pivots.push((row, col));
        row += 1;
    }
    (0..cols)
        .map(|target| {
            let start = pivots.iter().position(|&(_, c)| c == target)?;
            let mut coef: Vec<Ratio<i128>> = vec![Ratio::from_integer(0); pivots.len()];
            coef[start] = Ratio::from_integer(1);
            for j in start + 1..pivots.len() {
                let (pr, pc) = pivots[j];
                let mut acc = Ratio::from_integer(0);
                for (jj, c) in coef.iter().enumerate().take(j).skip(start) {
                    acc += *c * Ratio::from_integer(h[pivots[jj].0][pc]);
                }
                coef[j] = -acc / Ratio::from_integer(h[pr][pc]);
            }
            let scale = coef.iter().fold(1i128, |l, c| l.lcm(c.denom()));
            let ints: Vec<i128> = coef.iter().map(|c| (*c * Ratio::from_integer(scale)).to_integer()).collect();
            let multiplier = scale * h[pivots[start].0][target];
            let mut d = vec![0i128; n];
            for (j, &cj) in ints.iter().enumerate() {
                if cj != 0 {
                    for (k, dk) in d.iter_mut().enumerate() {
                        *dk += cj * t[pivots[j].0][k];
                    }
                }
            }
            Some(LatticeCombination {
                multiplier: multiplier as i64,
                coefficients: d.into_iter().map(|x| x as i64).collect(),
            })
        })
        .collect()
}

/// Chain elimination for type A: positive weights on the probes `-delta_3, ..., -delta_l`
/// and the highest root giving `a x_1 + x_2`. Returns `(weights by probe label, a)`.
pub fn a_chain_elimination(rank: usize) -> (Vec<(String, i64)>, i64) {
    let mut weights = Vec::new();
    for i in 3..=rank {
        weights.push((format!("-a{i}"), i as i64 - 2));
    }
    let a = rank as i64 - 1;
    weights.push(("max".to_string(), a));
    (weights, a)
}

fn torus_combination(premises: &[Premise], idx: &[usize], d: &[i64], p: u64, ctx: &Arc<SeriesContext>) -> Result<IwasawaSeries> {
    let mut acc = IwasawaSeries::zero(ctx, UNTRUNCATED);
    for (&pi, &di) in idx.iter().zip(d) {
        if di != 0 {
            acc = acc.add(&premises[pi].polynomial.scale(di.rem_euclid(p as i64)))?;
        }
    }
    Ok(acc)
}

/// Certifies `w_m | dw_d/d(y_v^{p^s})` for every variable `v` from the probe premises.
pub fn diagram_chase(rs: &RootSystem, w_m: &HomogeneousPolynomial, w_d: &HomogeneousPolynomial, s: u32) -> Result<ChaseCertificate> {
    let ctx = w_m.context().clone();
    let p = ctx.p;
    let labels = variable_labels(rs);
    if labels != ctx.vars {
        return Err(Error::Context(rs.label(), ctx.describe()));
    }
    let n = ctx.nvars();
    let derivs: Vec<IwasawaSeries> = (0..n)
        .map(|v| partial_derivative(w_d.series(), v, s).map(|x| x.with_truncation(UNTRUNCATED)))
        .collect::<Result<_>>()?;
    let divides = |f: &IwasawaSeries| -> Result<bool> {
        if f.is_zero() {
            return Ok(true);
        }
        Ok(exact_divide(f, w_m.series())?.is_some())
    };
    let rank = rs.rank();
    let mut premises: Vec<Premise> = Vec::new();
    let mut torus_idx = Vec::new();
    for g in probe_roots(rs) {
        let coeffs = &rs.root(g).coeffs;
        let pairing: Vec<i64> = (0..rank).map(|i| rs.cartan_integer_simple(coeffs, i) as i64).collect();
        let mut poly = IwasawaSeries::zero(&ctx, UNTRUNCATED);
        for (i, &c) in pairing.iter().enumerate() {
            if c != 0 {
                poly = poly.add(&derivs[torus_variable(rs, i)].scale(c))?;
            }
        }
        let label = rs.root(g).label();
        torus_idx.push(premises.len());
        premises.push(Premise {
            name: format!("probe {label}"),
            kind: PremiseKind::Torus { probe: label, pairing },
            holds: divides(&poly)?,
            polynomial: poly,
        });
    }
    let table = LeadingTermTable::symbolic(rs, p, 0, s)?;
    let mut root_idx: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for eta in 0..rs.num_roots() {
        let var = root_variable(rs, eta);
        let torus_probe = (0..rank).find(|&i| rs.cartan_integer_simple(&rs.root(eta).coeffs, i) as i64 % p as i64 != 0);
        let mut probes: Vec<usize> = Vec::new();
        if let Some(i) = torus_probe {
            probes.push(torus_variable(rs, i));
        }
        probes.push(root_variable(rs, rs.negate_index(eta)));
        for probe in probes {
            let Some(mult) = table.get(probe, var) else { continue };
            let poly = derivs[var].commutative_mul(mult.series())?;
            root_idx.entry(var).or_default().push(premises.len());
            premises.push(Premise {
                name: format!("root {} via {}", labels[var], labels[probe]),
                kind: PremiseKind::RootWeighted {
                    target: labels[var].clone(),
                    probe: labels[probe].clone(),
                    multiplier: mult.to_string(),
                },
                holds: divides(&poly)?,
                polynomial: poly,
            });
        }
    }
    let failing: Vec<String> = premises.iter().filter(|p| !p.holds).map(|p| p.name.clone()).collect();
    let mut conclusions = Vec::new();
    if failing.is_empty() {
        let rows: Vec<Vec<i64>> = torus_idx
            .iter()
            .map(|&i| match &premises[i].kind {
                PremiseKind::Torus { pairing, .. } => pairing.clone(),
                _ => unreachable!(),
            })
            .collect();
        for (i, comb) in lattice_eliminate(&rows).into_iter().enumerate() {
            let var = torus_variable(rs, i);
            let Some(comb) = comb else {
                conclusions.push(Conclusion {
                    variable: labels[var].clone(),
                    multiplier: None,
                    combination: vec![],
                    method: "lattice".into(),
                    flagged: true,
                    verified: divides(&derivs[var])?,
                });
                continue;
            };
            let combined = torus_combination(&premises, &torus_idx, &comb.coefficients, p, &ctx)?;
            if combined != derivs[var].scale(comb.multiplier) {
                return Err(Error::Domain("lattice combination does not reproduce its multiple".into()));
            }
            let flagged = comb.multiplier % p as i64 == 0;
            conclusions.push(Conclusion {
                variable: labels[var].clone(),
                multiplier: Some(comb.multiplier),
                combination: torus_idx
                    .iter()
                    .zip(&comb.coefficients)
                    .filter(|(_, &d)| d != 0)
                    .map(|(&pi, &d)| (premises[pi].name.clone(), d))
                    .collect(),
                method: "lattice".into(),
                flagged,
                verified: divides(&derivs[var])?,
            });
        }
        for (&var, idx) in &root_idx {
            // two premises whose multipliers are coprime (one is a power of y_var, the other
            // has no y_var) give w_m | x_var
            let coprime = idx.len() >= 2 && {
                let a = &premises[idx[0]];
                let b = &premises[idx[1]];
                let pure = |prem: &Premise| match &prem.kind {
                    PremiseKind::RootWeighted { probe, .. } => ctx.vars.iter().position(|l| l == probe),
                    _ => None,
                };
                let (pa, pb) = (pure(a), pure(b));
                let mult_a = table.get(pa.unwrap(), var).unwrap();
                let mult_b = table.get(pb.unwrap(), var).unwrap();
                let only_var = |m: &HomogeneousPolynomial| {
                    m.series().terms().keys().all(|mono| mono.first_var() == Some(var) && mono.last_var() == Some(var))
                };
                let free_of_var = |m: &HomogeneousPolynomial| m.series().terms().keys().any(|mono| mono.exponent(var) == 0);
                only_var(mult_a) && mult_a.series().len() == 1 && free_of_var(mult_b)
            };
            conclusions.push(Conclusion {
                variable: labels[var].clone(),
                multiplier: if coprime { Some(1) } else { None },
                combination: idx.iter().map(|&i| (premises[i].name.clone(), 1)).collect(),
                method: "gcd".into(),
                flagged: !coprime,
                verified: divides(&derivs[var])?,
            });
        }
    }
    let status = if !failing.is_empty() {
        ChaseStatus::PremiseFailure { premises: failing }
    } else {
        let broken: Vec<String> = conclusions.iter().filter(|c| !c.flagged && !c.verified).map(|c| c.variable.clone()).collect();
        let flagged: Vec<String> = conclusions.iter().filter(|c| c.flagged).map(|c| c.variable.clone()).collect();
        if !broken.is_empty() {
            ChaseStatus::ConclusionFailure { variables: broken }
        } else if !flagged.is_empty() {
            ChaseStatus::Flagged { variables: flagged }
        } else {
            ChaseStatus::Certified
        }
    };
    Ok(ChaseCertificate { type_label: rs.label(), p, s, premises, conclusions, status })
}

/// A constructed instance `w_d = w_m u + v`.
#[derive(Clone, Debug)]
pub struct SyntheticInstance {
    pub w_m: HomogeneousPolynomial,
    pub w_d: HomogeneousPolynomial,
    pub u: IwasawaSeries,
    pub v: IwasawaSeries,
}

fn random_monomial<R: Rng>(n: usize, total: u32, step: u32, rng: &mut R) -> Monomial {
    let mut exps = vec![0u32; n];
    for _ in 0..total {
        exps[rng.gen_range(0..n)] += step;
    }
    Monomial::from_exponents(exps).expect("small exponents")
}

/// `w_m = y_{delta_1}^{p^{s+1}}`, `u` of degree `p^{s+1}` in `y^{p^s}`, `v` of degree
/// `2 p^{s+1}` in `y^{p^{s+1}}`.
pub fn synthetic_instance<R: Rng>(rs: &RootSystem, p: u64, s: u32, terms: usize, rng: &mut R) -> Result<SyntheticInstance> {
    let ctx = SeriesContext::new(rs.label(), p, variable_labels(rs));
    let n = ctx.nvars();
    let q = (p as u32).pow(s);
    let q1 = q * p as u32;
    let wm = IwasawaSeries::monomial(&ctx, UNTRUNCATED, Monomial::var(n, torus_variable(rs, 0), q1), 1);
    let mut u = IwasawaSeries::zero(&ctx, UNTRUNCATED);
    let mut v = IwasawaSeries::zero(&ctx, UNTRUNCATED);
    while u.is_zero() {
        for _ in 0..terms {
            let c = rng.gen_range(1..p) as i64;
            u = u.add(&IwasawaSeries::monomial(&ctx, UNTRUNCATED, random_monomial(n, p as u32, q, rng), c))?;
        }
    }
    for _ in 0..terms {
        let c = rng.gen_range(1..p) as i64;
        v = v.add(&IwasawaSeries::monomial(&ctx, UNTRUNCATED, random_monomial(n, 2, q1, rng), c))?;
    }
    let wd = wm.commutative_mul(&u)?.add(&v)?;
    if wd.is_zero() {
        return synthetic_instance(rs, p, s, terms, rng);
    }
    Ok(SyntheticInstance {
        w_m: HomogeneousPolynomial::with_degree(wm, q1)?,
        w_d: HomogeneousPolynomial::with_degree(wd, 2 * q1)?,
        u,
        v,
    })
}

/// Adds `y_{delta_1}^{p^s} y_{delta_2}^{(2p-1) p^s}` (or a pure `y_{delta_1}` term in rank one),
/// breaking divisibility of the `delta_1` derivative.
pub fn mutate_instance(rs: &RootSystem, inst: &SyntheticInstance, s: u32) -> Result<HomogeneousPolynomial> {
    let ctx = inst.w_m.context().clone();
    let n = ctx.nvars();
    let p = ctx.p as u32;
    let q = p.pow(s);
    let mut exps = vec![0u32; n];
    exps[torus_variable(rs, 0)] = q;
    if rs.rank() > 1 {
        exps[torus_variable(rs, 1)] = (2 * p - 1) * q;
    } else {
        exps[rs.num_positive() + rs.rank()] = (2 * p - 1) * q;
    }
    let extra = IwasawaSeries::monomial(&ctx, UNTRUNCATED, Monomial::from_exponents(exps)?, 1);
    HomogeneousPolynomial::with_degree(inst.w_d.series().add(&extra)?, inst.w_d.degree())
}

/// Catalog of constant-free candidates: single variables, binomials and random sparse
/// homogeneous polynomials of degree at most four with at least one exponent prime to p.
pub fn candidate_catalog<R: Rng>(ctx: &Arc<SeriesContext>, trunc: u32, random: usize, rng: &mut R) -> Vec<(String, IwasawaSeries)> {
    let n = ctx.nvars();
    let p = ctx.p as u32;
    let mut out = Vec::new();
    for v in 0..n {
        out.push((format!("single {}", ctx.vars[v]), IwasawaSeries::variable(ctx, trunc, v)));
    }
    for a in 0..n {
        let b = (a + 1 + a % (n - 1).max(1)) % n;
        if a != b {
            let w = IwasawaSeries::variable(ctx, trunc, a).add(&IwasawaSeries::variable(ctx, trunc, b)).expect("same context");
            out.push((format!("binomial {} + {}", ctx.vars[a], ctx.vars[b]), w));
        }
    }
    let mut k = 0;
    while k < random {
        let degree = rng.gen_range(2..=4);
        let terms = rng.gen_range(1..=3);
        let mut w = IwasawaSeries::zero(ctx, trunc);
        for _ in 0..terms {
            let c = rng.gen_range(1..p) as i64;
            w = w.add(&IwasawaSeries::monomial(ctx, trunc, random_monomial(n, degree, 1, rng), c)).expect("same context");
        }
        if w.is_zero() || exponent_level(&w) != Some(0) {
            continue;
        }
        out.push((format!("random #{k} deg {degree}"), w));
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx2(p: u64) -> Arc<SeriesContext> {
        SeriesContext::new("t", p, vec!["y1".into(), "y2".into()])
    }

    fn poly(ctx: &Arc<SeriesContext>, terms: &[(&[u32], i64)]) -> IwasawaSeries {
        IwasawaSeries::from_terms(ctx, UNTRUNCATED, terms.iter().map(|(e, c)| (Monomial::from_exponents(e.to_vec()).unwrap(), *c)))
    }

    fn homog(s: IwasawaSeries) -> HomogeneousPolynomial {
        HomogeneousPolynomial::new(s).unwrap()
    }

    #[test]
    fn divides_zero() {
        let ctx = ctx2(5);
        let wm = homog(poly(&ctx, &[(&[1, 0], 1)]));
        let r = graded_divides(&wm, &HomogeneousPolynomial::zero(&ctx, 3)).unwrap();
        assert!(r.divides);
        assert!(r.quotient.unwrap().is_zero());
    }

    #[test]
    fn degree_obstructs_division() {
        let ctx = ctx2(5);
        let wm = homog(poly(&ctx, &[(&[3, 0], 1)]));
        let f = homog(poly(&ctx, &[(&[2, 1], 1)]));
        assert!(!graded_divides(&wm, &f).unwrap().divides);
    }

    #[test]
    fn difference_of_squares() {
        let ctx = ctx2(5);
        let wm = homog(poly(&ctx, &[(&[1, 0], 1), (&[0, 1], 1)]));
        let f = homog(poly(&ctx, &[(&[2, 0], 1), (&[0, 2], -1)]));
        let r = graded_divides(&wm, &f).unwrap();
        assert!(r.divides);
        assert_eq!(r.quotient.unwrap().into_series(), poly(&ctx, &[(&[1, 0], 1), (&[0, 1], -1)]));
    }

    #[test]
    fn decomposition_examples() {
        let ctx = ctx2(3);
        let c = decompose_candidate(&poly(&ctx, &[(&[1, 0], 1)])).unwrap();
        assert_eq!((c.leading_degree, c.level, c.case), (1, Some(0), CandidateCase::LeadingLevel));
        let c = decompose_candidate(&poly(&ctx, &[(&[3, 0], 1), (&[0, 1], 1)])).unwrap();
        assert_eq!(c.levels, vec![(1, Some(0)), (3, Some(1))]);
        assert_eq!((c.leading_degree, c.level, c.case), (1, Some(0), CandidateCase::LeadingLevel));
        let c = decompose_candidate(&poly(&ctx, &[(&[3, 0], 1), (&[1, 1], 1)])).unwrap();
        assert_eq!(c.levels, vec![(2, Some(0)), (3, Some(1))]);
        assert_eq!((c.leading_degree, c.level), (2, Some(0)));
        let c = decompose_candidate(&poly(&ctx, &[(&[3, 0], 1), (&[1, 3], 1)])).unwrap();
        assert_eq!(c.case, CandidateCase::LowerLevelAbove);
        assert!(decompose_candidate(&IwasawaSeries::zero(&ctx, 4)).is_err());
    }

    #[test]
    fn derivative_witness_examples() {
        let ctx = ctx2(3);
        assert!(claim52_check(&homog(poly(&ctx, &[(&[3, 0], 1)])), 1).unwrap());
        assert!(matches!(claim52_check(&homog(poly(&ctx, &[(&[9, 0], 1)])), 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn lattice_for_a2_and_e6_pairs() {
        // 2x + y and x + 2y: least multiple of x is 3
        let rows = vec![vec![2, 1], vec![1, 2]];
        let res = lattice_eliminate(&rows);
        let c = res[0].clone().unwrap();
        assert_eq!(c.multiplier, 3);
        let combo: Vec<i64> = (0..2).map(|j| rows.iter().zip(&c.coefficients).map(|(r, d)| r[j] * d).sum()).collect();
        assert_eq!(combo, vec![3, 0]);
    }

    #[test]
    fn lattice_finds_unit_when_possible() {
        let rows = vec![vec![2, -1], vec![-1, 2], vec![1, 1]];
        for (i, c) in lattice_eliminate(&rows).into_iter().enumerate() {
            let c = c.unwrap();
            let combo: Vec<i64> = (0..2).map(|j| rows.iter().zip(&c.coefficients).map(|(r, d)| r[j] * d).sum()).collect();
            let mut e = vec![0, 0];
            e[i] = c.multiplier;
            assert_eq!(combo, e);
            assert_eq!(c.multiplier, 3);
        }
    }

    #[test]
    fn a_chain_weights_give_positive_form() {
        for l in 2..=7usize {
            let rs = RootSystem::from_label(&format!("A{l}")).unwrap();
            let (weights, a) = a_chain_elimination(l);
            assert!(a > 0);
            let mut acc = vec![0i64; l];
            for (name, d) in &weights {
                assert!(*d > 0);
                let coeffs: Vec<i32> = if name == "max" {
                    rs.highest_root().coeffs.clone()
                } else {
                    let i: usize = name.trim_start_matches("-a").parse().unwrap();
                    rs.simple_roots()[i - 1].negated().coeffs
                };
                for (j, x) in acc.iter_mut().enumerate() {
                    *x += d * rs.cartan_integer_simple(&coeffs, j) as i64;
                }
            }
            let mut expect = vec![0i64; l];
            expect[0] = a;
            expect[1] += 1;
            assert_eq!(acc, expect, "A{l}");
        }
    }
}
