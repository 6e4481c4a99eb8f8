//! Leading terms of commutators of Lazard variables: symbolic predictions checked
//! against the matrix model, and the first-order derivative identity.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chevmodel::{build_model, root_variable, torus_variable, variable_labels, Model};
use crate::error::{Error, Result};
use crate::lazseries::{
    element_to_series, partial_derivative, HomogeneousPolynomial, IwasawaSeries, Monomial, SeriesAlgebra,
    SeriesContext,
};
use crate::modular::{digits, int_valuation, PadicRing};
use crate::rootsys::{check_prime, RootSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    NonAdjacent,
    SumIsRoot,
    RootVsTorus,
    Opposite,
}

impl CaseTag {
    pub const ALL: [CaseTag; 4] = [CaseTag::NonAdjacent, CaseTag::SumIsRoot, CaseTag::RootVsTorus, CaseTag::Opposite];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::NonAdjacent => "non-adjacent",
            CaseTag::SumIsRoot => "sum-is-root",
            CaseTag::RootVsTorus => "root-vs-torus",
            CaseTag::Opposite => "opposite",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The commutator `[y_first^{p^r}, y_second^{p^s}]`; `first` is a root index,
/// `second` a root index or (for root-vs-torus) a simple-root position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutatorCase {
    pub tag: CaseTag,
    pub first: usize,
    pub second: usize,
    pub r: u32,
    pub s: u32,
}

impl CommutatorCase {
    pub fn roots(rs: &RootSystem, first: usize, second: usize, r: u32, s: u32) -> Result<Self> {
        if first >= rs.num_roots() || second >= rs.num_roots() {
            return Err(Error::Domain("root index out of range".into()));
        }
        let tag = if rs.negate_index(first) == second {
            CaseTag::Opposite
        } else if rs.sum_index(first, second).is_some() {
            CaseTag::SumIsRoot
        } else {
            CaseTag::NonAdjacent
        };
        Ok(CommutatorCase { tag, first, second, r, s })
    }

    pub fn torus(rs: &RootSystem, first: usize, simple: usize, r: u32, s: u32) -> Result<Self> {
        if first >= rs.num_roots() || simple >= rs.rank() {
            return Err(Error::Domain("root or simple index out of range".into()));
        }
        Ok(CommutatorCase { tag: CaseTag::RootVsTorus, first, second: simple, r, s })
    }

    pub fn first_variable(&self, rs: &RootSystem) -> usize {
        root_variable(rs, self.first)
    }

    pub fn second_variable(&self, rs: &RootSystem) -> usize {
        match self.tag {
            CaseTag::RootVsTorus => torus_variable(rs, self.second),
            _ => root_variable(rs, self.second),
        }
    }

    pub fn describe(&self, rs: &RootSystem) -> String {
        let labels = variable_labels(rs);
        format!(
            "[y[{}]^(p^{}), y[{}]^(p^{})]",
            labels[self.first_variable(rs)],
            self.r,
            labels[self.second_variable(rs)],
            self.s
        )
    }
}

/// All cases of one tag at levels `(r, s)`, in index order.
pub fn enumerate_cases(rs: &RootSystem, tag: CaseTag, r: u32, s: u32) -> Vec<CommutatorCase> {
    let mut out = Vec::new();
    if tag == CaseTag::RootVsTorus {
        for a in 0..rs.num_roots() {
            for i in 0..rs.rank() {
                out.push(CommutatorCase { tag, first: a, second: i, r, s });
            }
        }
        return out;
    }
    for a in 0..rs.num_roots() {
        for b in 0..rs.num_roots() {
            if a == b {
                continue;
            }
            let c = CommutatorCase::roots(rs, a, b, r, s).expect("indices in range");
            if c.tag == tag {
                out.push(c);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "generic")]
    Generic,
    /// Opposite roots at p = 5 with some highest-root coefficient at least 5.
    #[serde(rename = "p5-E8")]
    P5Truncation,
    /// Opposite roots at p = 3 with some highest-root coefficient at least 3.
    #[serde(rename = "p3-opposite")]
    P3Opposite,
    /// Sum-is-root at p = 3 with `c_11 = +-3`; only the support is predicted.
    #[serde(rename = "p3-c11=±3")]
    P3C11,
    /// Root-vs-torus with a Cartan integer divisible by p.
    #[serde(rename = "p3-cartan-three")]
    P3CartanThree,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaTerm {
    pub variable: usize,
    pub label: String,
    pub exponent: u32,
    /// Residue in `[0, p)`.
    pub coefficient: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternativeFormula {
    pub name: String,
    pub terms: Vec<FormulaTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadingTermFormula {
    pub p: u64,
    /// `None` for the zero formula.
    pub degree: Option<u32>,
    pub terms: Vec<FormulaTerm>,
    pub support_only: bool,
    /// Variables allowed in a support-only prediction.
    pub support: Vec<usize>,
    /// Variable whose coefficient must be nonzero in a support-only prediction.
    pub anchor: Option<usize>,
    pub predicted_anchor_coefficient: Option<u64>,
    pub provenance: Provenance,
    pub alternatives: Vec<AlternativeFormula>,
}

impl LeadingTermFormula {
    fn zero(p: u64) -> Self {
        LeadingTermFormula {
            p,
            degree: None,
            terms: vec![],
            support_only: false,
            support: vec![],
            anchor: None,
            predicted_anchor_coefficient: None,
            provenance: Provenance::Generic,
            alternatives: vec![],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.degree.is_none()
    }

    pub fn to_polynomial(&self, ctx: &std::sync::Arc<SeriesContext>) -> HomogeneousPolynomial {
        terms_to_polynomial(ctx, self.degree.unwrap_or(0), &self.terms)
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        if self.support_only {
            let anchor = self.anchor.map(|a| a.to_string()).unwrap_or_default();
            return format!(
                "support within variables {:?} at degree {} (anchor variable {anchor}, predicted coefficient {})",
                self.support,
                self.degree.unwrap(),
                self.predicted_anchor_coefficient.unwrap_or(0)
            );
        }
        render_terms(&self.terms)
    }
}

fn render_terms(terms: &[FormulaTerm]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms
        .iter()
        .map(|t| format!("{}*y[{}]^{}", t.coefficient, t.label, t.exponent))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn terms_to_polynomial(ctx: &std::sync::Arc<SeriesContext>, degree: u32, terms: &[FormulaTerm]) -> HomogeneousPolynomial {
    let n = ctx.nvars();
    let s = IwasawaSeries::from_terms(
        ctx,
        crate::lazseries::UNTRUNCATED,
        terms.iter().map(|t| (Monomial::var(n, t.variable, t.exponent), t.coefficient as i64)),
    );
    HomogeneousPolynomial::with_degree(s, degree).expect("formula terms share one degree")
}

fn residue(c: i64, p: u64) -> u64 {
    c.rem_euclid(p as i64) as u64
}

/// Symbolic leading term of the commutator described by `case`.
pub fn expected_leading_term(rs: &RootSystem, p: u64, case: &CommutatorCase) -> Result<LeadingTermFormula> {
    check_prime(p)?;
    let labels = variable_labels(rs);
    let base = p.checked_pow(case.r + case.s + 1).ok_or_else(|| Error::Domain("level too large".into()))?;
    let base = u32::try_from(base).map_err(|_| Error::Domain("level too large".into()))?;
    let mut f = LeadingTermFormula::zero(p);
    match case.tag {
        CaseTag::NonAdjacent => {}
        CaseTag::SumIsRoot => {
            let constants = crate::constants::structure_constants(rs);
            let terms = constants.commutator_terms(rs, case.first, case.second);
            let c11 = terms.iter().find(|t| t.i == 1 && t.j == 1).expect("sum is a root").coefficient;
            let sum = rs.sum_index(case.first, case.second).expect("sum is a root");
            let sum_var = root_variable(rs, sum);
            if c11 % p as i64 != 0 {
                f.degree = Some(base);
                f.terms.push(FormulaTerm {
                    variable: sum_var,
                    label: labels[sum_var].clone(),
                    exponent: base,
                    coefficient: residue(c11, p),
                });
            } else {
                f.degree = Some(base * p as u32);
                f.support_only = true;
                f.support = terms.iter().map(|t| root_variable(rs, t.root)).collect();
                f.anchor = Some(sum_var);
                f.predicted_anchor_coefficient = Some(residue(c11 / p as i64, p));
                f.provenance = Provenance::P3C11;
            }
        }
        CaseTag::RootVsTorus => {
            let c = rs.cartan_integer_simple(&rs.root(case.first).coeffs, case.second) as i64;
            if c != 0 {
                let v = int_valuation(c, p);
                let unit = c / (p as i64).pow(v);
                let var = root_variable(rs, case.first);
                let exponent = base * (p as u32).pow(v);
                f.degree = Some(exponent);
                f.terms.push(FormulaTerm {
                    variable: var,
                    label: labels[var].clone(),
                    exponent,
                    coefficient: residue(-unit, p),
                });
                if v > 0 {
                    f.provenance = Provenance::P3CartanThree;
                    f.alternatives.push(AlternativeFormula {
                        name: "cartan-integer-unreduced".into(),
                        terms: nonzero_terms(vec![FormulaTerm {
                            variable: var,
                            label: labels[var].clone(),
                            exponent: base,
                            coefficient: residue(-c, p),
                        }]),
                    });
                }
            }
        }
        CaseTag::Opposite => {
            let alpha = &rs.root(case.first).coeffs;
            let coroot = rs.coroot_coeffs(alpha);
            let hyp = rs.hyp_phi(p)?;
            let mut terms = Vec::new();
            let mut literal = Vec::new();
            for i in 0..rs.rank() {
                let var = torus_variable(rs, i);
                terms.push(FormulaTerm {
                    variable: var,
                    label: labels[var].clone(),
                    exponent: base,
                    coefficient: residue(coroot[i] as i64, p),
                });
                let n = alpha[i].unsigned_abs() as u64;
                let m = if n < p { n } else { 0 };
                let sign = if alpha[i] < 0 { -1 } else { 1 };
                literal.push(FormulaTerm {
                    variable: var,
                    label: labels[var].clone(),
                    exponent: base,
                    coefficient: residue(sign * m as i64, p),
                });
            }
            let negate = |ts: &[FormulaTerm]| -> Vec<FormulaTerm> {
                ts.iter().map(|t| FormulaTerm { coefficient: (p - t.coefficient) % p, ..t.clone() }).collect()
            };
            f.alternatives.push(AlternativeFormula { name: "opposite-sign".into(), terms: nonzero_terms(negate(&terms)) });
            f.alternatives.push(AlternativeFormula { name: "root-coefficients-minus".into(), terms: nonzero_terms(negate(&literal)) });
            f.alternatives.push(AlternativeFormula { name: "root-coefficients-plus".into(), terms: nonzero_terms(literal) });
            f.terms = nonzero_terms(terms);
            f.degree = if f.terms.is_empty() { None } else { Some(base) };
            if !hyp {
                f.provenance = match p {
                    3 => Provenance::P3Opposite,
                    5 => Provenance::P5Truncation,
                    _ => Provenance::Generic,
                };
            }
        }
    }
    Ok(f)
}

fn nonzero_terms(ts: Vec<FormulaTerm>) -> Vec<FormulaTerm> {
    ts.into_iter().filter(|t| t.coefficient != 0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
    Inconclusive,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Skipped => "SKIPPED",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlternativeCheck {
    pub name: String,
    pub formula: String,
    pub agrees: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub case: String,
    pub inputs: serde_json::Value,
    pub expected: String,
    pub observed: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<AlternativeCheck>,
    /// Coefficients realized by the oracle in support-only mode.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub realized: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip)]
    pub observed_leading: Option<HomogeneousPolynomial>,
}

impl VerificationReport {
    fn new(case: impl Into<String>, inputs: serde_json::Value) -> Self {
        VerificationReport {
            case: case.into(),
            inputs,
            expected: String::new(),
            observed: String::new(),
            verdict: Verdict::Inconclusive,
            provenance: None,
            alternatives: vec![],
            realized: BTreeMap::new(),
            notes: vec![],
            observed_leading: None,
        }
    }
}

/// Smallest `N` with `p^{N-1} > d`.
pub fn precision_for_degree(p: u64, d: u32) -> u32 {
    let mut n = 2;
    while p.pow(n - 1) <= d as u64 {
        n += 1;
    }
    n
}

/// `series(G H) - series(H G)` for `G = g_a^{p^r}`, `H = g_b^{p^s}`, truncated at `d`.
pub fn commutator_series(model: &Model, var_a: usize, r: u32, var_b: usize, s: u32, d: u32) -> Result<IwasawaSeries> {
    let p = model.p() as i64;
    let g = model.generator_power(var_a, p.pow(r))?;
    let h = model.generator_power(var_b, p.pow(s))?;
    let gh = element_to_series(model, &model.mul(&g, &h), d)?;
    let hg = element_to_series(model, &model.mul(&h, &g), d)?;
    gh.sub(&hg)
}

fn commute_exactly(model: &Model, var_a: usize, r: u32, var_b: usize, s: u32) -> Result<bool> {
    let p = model.p() as i64;
    let g = model.generator_power(var_a, p.pow(r))?;
    let h = model.generator_power(var_b, p.pow(s))?;
    Ok(model.mul(&g, &h).matrix == model.mul(&h, &g).matrix)
}

fn case_inputs(model: &Model, case: &CommutatorCase, d: Option<u32>) -> serde_json::Value {
    let rs = model.root_system();
    json!({
        "type": rs.label(),
        "p": model.p(),
        "r": case.r,
        "s": case.s,
        "first": rs.root(case.first).label(),
        "second": if case.tag == CaseTag::RootVsTorus { format!("d{}", case.second + 1) } else { rs.root(case.second).label() },
        "trunc": d,
        "precision": model.precision(),
        "representation": model.representation(),
    })
}

/// Checks one commutator case against the matrix model. The truncation defaults to the
/// predicted degree; an explicit smaller truncation yields INCONCLUSIVE.
pub fn verify_prop31(model: &Model, case: &CommutatorCase, trunc: Option<u32>) -> Result<VerificationReport> {
    let rs = model.root_system();
    let p = model.p();
    let formula = expected_leading_term(rs, p, case)?;
    let var_a = case.first_variable(rs);
    let var_b = case.second_variable(rs);
    let mut report = VerificationReport::new(case.tag.name(), case_inputs(model, case, trunc.or(formula.degree)));
    report.expected = formula.render();
    report.provenance = Some(formula.provenance);
    report.notes.push(case.describe(rs));

    let Some(degree) = formula.degree else {
        let ok = commute_exactly(model, var_a, case.r, var_b, case.s)?;
        report.observed = if ok { "0 (exact matrix commutation)".into() } else { "matrices do not commute".into() };
        report.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        return Ok(report);
    };
    let d = trunc.unwrap_or(degree);
    if d < degree {
        report.observed = format!("truncation {d} below predicted degree {degree}");
        report.verdict = Verdict::Inconclusive;
        return Ok(report);
    }
    if (p as u128).pow(model.precision() - 1) <= d as u128 {
        report.observed = format!("precision {} cannot resolve degree {d}", model.precision());
        report.verdict = Verdict::Inconclusive;
        return Ok(report);
    }
    let obs = commutator_series(model, var_a, case.r, var_b, case.s, d)?;
    let Ok(lead) = obs.leading_term() else {
        report.observed = format!("0 up to degree {d}");
        report.verdict = Verdict::Fail;
        return Ok(report);
    };
    report.observed = format!("[deg {}] {}", lead.degree(), lead);
    let ctx = obs.context().clone();
    if formula.support_only {
        let anchor = formula.anchor.expect("support-only formulas carry an anchor");
        let mut inside = lead.degree() == degree;
        for (m, &c) in lead.series().terms() {
            let single = m.first_var() == m.last_var();
            let var = m.first_var().unwrap_or(0);
            if !single || !formula.support.contains(&var) {
                inside = false;
            }
            report.realized.insert(ctx.vars[var].clone(), c as u64);
        }
        let anchor_coef = lead.series().coefficient(&Monomial::var(ctx.nvars(), anchor, degree));
        report.notes.push(format!(
            "anchor coefficient {anchor_coef}, predicted {}",
            formula.predicted_anchor_coefficient.unwrap_or(0)
        ));
        report.verdict = if inside && anchor_coef != 0 { Verdict::Pass } else { Verdict::Fail };
    } else {
        let expected = formula.to_polynomial(&ctx);
        report.verdict = if lead == expected { Verdict::Pass } else { Verdict::Fail };
    }
    for alt in &formula.alternatives {
        let poly = terms_to_polynomial(&ctx, formula.degree.unwrap_or(lead.degree()), &alt.terms);
        let agrees = !alt.terms.is_empty() && alt.terms[0].exponent == lead.degree() && poly == lead;
        report.alternatives.push(AlternativeCheck { name: alt.name.clone(), formula: render_terms(&alt.terms), agrees });
    }
    report.observed_leading = Some(lead);
    Ok(report)
}

/// Model precision that resolves every case at levels `(r, s)`.
pub fn sweep_precision(p: u64, r: u32, s: u32) -> u32 {
    precision_for_degree(p, (p as u32).pow(r + s + 2))
}

/// Full sweep over all four tags and the given levels; VACUOUS rows mark tags without pairs.
pub fn prop31_sweep(rs: &RootSystem, p: u64, levels: &[(u32, u32)]) -> Result<Vec<VerificationReport>> {
    check_prime(p)?;
    let mut jobs: Vec<(u32, u32, Option<CommutatorCase>, CaseTag)> = Vec::new();
    for &(r, s) in levels {
        for tag in CaseTag::ALL {
            let cases = enumerate_cases(rs, tag, r, s);
            if cases.is_empty() {
                jobs.push((r, s, None, tag));
            }
            jobs.extend(cases.into_iter().map(|c| (r, s, Some(c), tag)));
        }
    }
    let mut models: BTreeMap<(u32, u32), std::result::Result<Model, Error>> = BTreeMap::new();
    for &(r, s) in levels {
        models.entry((r, s)).or_insert_with(|| build_model(rs, p, sweep_precision(p, r, s)));
    }
    jobs.par_iter()
        .map(|(r, s, case, tag)| -> Result<VerificationReport> {
            let Some(case) = case else {
                let mut rep = VerificationReport::new(
                    tag.name(),
                    json!({"type": rs.label(), "p": p, "r": r, "s": s}),
                );
                rep.expected = "no qualifying pair".into();
                rep.observed = "case vacuous".into();
                rep.verdict = Verdict::Vacuous;
                return Ok(rep);
            };
            match &models[&(*r, *s)] {
                Ok(model) => verify_prop31(model, case, None),
                Err(e) => {
                    let formula = expected_leading_term(rs, p, case)?;
                    let mut rep = VerificationReport::new(
                        tag.name(),
                        json!({"type": rs.label(), "p": p, "r": r, "s": s, "first": case.first, "second": case.second}),
                    );
                    rep.expected = formula.render();
                    rep.provenance = Some(formula.provenance);
                    rep.observed = format!("oracle unavailable: {e}");
                    rep.verdict = Verdict::Skipped;
                    Ok(rep)
                }
            }
        })
        .collect()
}

/// Base-p digits of `beta` with `(1+p)^beta = (1+p^{r+s+2})^{-1}`, computed mod `p^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaDigits {
    pub p: u64,
    pub r: u32,
    pub s: u32,
    pub digits: Vec<u64>,
}

impl BetaDigits {
    pub fn value(&self) -> u64 {
        self.digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    /// Digit predicted at position `r+s+2` by the closed form `((p^{r+s+1}-1)/2 - 1) mod p`.
    pub fn closed_form_digit(&self) -> u64 {
        let q = self.p.pow(self.r + self.s + 1);
        (((q - 1) / 2) as i64 - 1).rem_euclid(self.p as i64) as u64
    }
}

pub fn beta_digits(p: u64, r: u32, s: u32, k: u32) -> Result<BetaDigits> {
    check_prime(p)?;
    if k < r + s + 3 {
        return Err(Error::Precondition(format!("need at least {} digits", r + s + 3)));
    }
    let ring = PadicRing::new(p, k + 1)?;
    let target = ring.inv(1 + p.pow(r + s + 2))?;
    let mut beta = 0u64;
    let mut place = 1u64;
    for t in 0..k {
        let check = p.pow(t + 2);
        let digit = (0..p)
            .find(|&dg| ring.pow(1 + p, beta + dg * place) % check == target % check)
            .ok_or_else(|| Error::Domain("no matching digit".into()))?;
        beta += digit * place;
        place *= p;
    }
    Ok(BetaDigits { p, r, s, digits: digits(beta, p, k as usize) })
}

/// Leading terms `L(a, b)` of `[y_a^{p^r}, y_b^{p^s}]` for every ordered pair of variables.
#[derive(Clone, Debug)]
pub struct LeadingTermTable {
    pub p: u64,
    pub r: u32,
    pub s: u32,
    entries: BTreeMap<(usize, usize), HomogeneousPolynomial>,
}

enum PairKind {
    Commuting,
    Case(CommutatorCase, bool),
}

/// Maps an ordered variable pair to a case with the root first; the flag marks a swap.
fn pair_kind(rs: &RootSystem, a: usize, b: usize, r: u32, s: u32) -> PairKind {
    let npos = rs.num_positive();
    let rank = rs.rank();
    let as_root = |v: usize| -> Option<usize> {
        if v < npos {
            Some(v)
        } else if v >= npos + rank {
            Some(v - rank)
        } else {
            None
        }
    };
    if a == b {
        return PairKind::Commuting;
    }
    match (as_root(a), as_root(b)) {
        (Some(x), Some(y)) => PairKind::Case(CommutatorCase::roots(rs, x, y, r, s).unwrap(), false),
        (Some(x), None) => PairKind::Case(CommutatorCase::torus(rs, x, b - npos, r, s).unwrap(), false),
        (None, Some(y)) => PairKind::Case(CommutatorCase::torus(rs, y, a - npos, s, r).unwrap(), true),
        (None, None) => PairKind::Commuting,
    }
}

impl LeadingTermTable {
    /// Table observed from the matrix model (each entry verified against its prediction).
    pub fn from_oracle(model: &Model, r: u32, s: u32) -> Result<Self> {
        let rs = model.root_system();
        let ctx = SeriesContext::for_model(model);
        let n = ctx.nvars();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
        let results: Vec<Result<Option<((usize, usize), HomogeneousPolynomial)>>> = pairs
            .par_iter()
            .map(|&(a, b)| match pair_kind(rs, a, b, r, s) {
                PairKind::Commuting => Ok(None),
                PairKind::Case(case, swapped) => {
                    let rep = verify_prop31(model, &case, None)?;
                    match rep.verdict {
                        Verdict::Pass => {}
                        Verdict::Inconclusive => return Err(Error::Inconclusive(rep.observed)),
                        _ => {
                            return Err(Error::Domain(format!(
                                "leading term of {} disagrees with prediction",
                                case.describe(rs)
                            )))
                        }
                    }
                    let Some(lead) = rep.observed_leading else {
                        return Ok(None);
                    };
                    let lead = if swapped {
                        HomogeneousPolynomial::with_degree(lead.series().neg(), lead.degree())?
                    } else {
                        lead
                    };
                    Ok(Some(((a, b), lead)))
                }
            })
            .collect();
        let mut entries = BTreeMap::new();
        for res in results {
            if let Some((k, v)) = res? {
                entries.insert(k, v);
            }
        }
        Ok(LeadingTermTable { p: model.p(), r, s, entries })
    }

    /// Table built from predicted formulas only; support-only entries use the predicted anchor term.
    pub fn symbolic(rs: &RootSystem, p: u64, r: u32, s: u32) -> Result<Self> {
        let ctx = SeriesContext::new(rs.label(), p, variable_labels(rs));
        let n = ctx.nvars();
        let mut entries = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                let PairKind::Case(case, swapped) = pair_kind(rs, a, b, r, s) else {
                    continue;
                };
                let f = expected_leading_term(rs, p, &case)?;
                let Some(degree) = f.degree else { continue };
                let poly = if f.support_only {
                    let anchor = f.anchor.unwrap();
                    let c = f.predicted_anchor_coefficient.unwrap_or(0);
                    let term = FormulaTerm { variable: anchor, label: ctx.vars[anchor].clone(), exponent: degree, coefficient: c };
                    terms_to_polynomial(&ctx, degree, &nonzero_terms(vec![term]))
                } else {
                    f.to_polynomial(&ctx)
                };
                let poly = if swapped { HomogeneousPolynomial::with_degree(poly.series().neg(), degree)? } else { poly };
                if !poly.is_zero() {
                    entries.insert((a, b), poly);
                }
            }
        }
        Ok(LeadingTermTable { p, r, s, entries })
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&HomogeneousPolynomial> {
        self.entries.get(&(a, b))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `sum_eta dw/d(y_eta^{p^s}) * L(gamma, eta)` in the commutative graded ring.
pub fn pde_right_side(w: &IwasawaSeries, gamma: usize, table: &LeadingTermTable) -> Result<IwasawaSeries> {
    let ctx = w.context().clone();
    let mut rhs = IwasawaSeries::zero(&ctx, crate::lazseries::UNTRUNCATED);
    for eta in 0..ctx.nvars() {
        let Some(lead) = table.get(gamma, eta) else { continue };
        let dw = partial_derivative(w, eta, table.s)?.with_truncation(crate::lazseries::UNTRUNCATED);
        if dw.is_zero() {
            continue;
        }
        rhs = rhs.add(&dw.commutative_mul(lead.series())?)?;
    }
    Ok(rhs)
}

/// Degree at which the derivative identity is compared for `w`.
pub fn pde_degree(w: &IwasawaSeries, gamma: usize, table: &LeadingTermTable) -> Result<u32> {
    let rhs = pde_right_side(w, gamma, table)?;
    if let Some(d) = rhs.min_degree() {
        return Ok(d);
    }
    let p = table.p as u32;
    let wmin = w.min_degree().ok_or_else(|| Error::Precondition("w must be nonzero".into()))?;
    Ok(wmin + p.pow(table.r + table.s + 1) - p.pow(table.s))
}

/// Compares the lowest-degree part of `[y_gamma^{p^r}, w]` with the derivative formula.
pub fn verify_pde(alg: &SeriesAlgebra, table: &LeadingTermTable, gamma: usize, w: &IwasawaSeries) -> Result<VerificationReport> {
    let ctx = alg.context().clone();
    let inputs = json!({
        "type": ctx.label,
        "p": ctx.p,
        "r": table.r,
        "s": table.s,
        "gamma": ctx.vars[gamma],
        "w": w.to_string(),
    });
    let mut report = VerificationReport::new("pde", inputs);
    if w.is_zero() {
        return Err(Error::Precondition("w must be nonzero".into()));
    }
    let rhs = pde_right_side(w, gamma, table)?;
    let d = pde_degree(w, gamma, table)?;
    report.expected = if rhs.is_zero() { format!("0 through degree {d}") } else { format!("[deg {d}] {rhs}") };
    if alg.truncation() < d {
        report.observed = format!("engine truncation {} below comparison degree {d}", alg.truncation());
        report.verdict = Verdict::Inconclusive;
        return Ok(report);
    }
    let y = alg.variable_power(gamma, (ctx.p as u32).pow(table.r)).with_truncation(d);
    let lhs = alg.commutator(&y, &w.truncate(d).with_truncation(d))?;
    let expected_low = rhs.homogeneous_part(d);
    match lhs.leading_term() {
        Err(_) => {
            report.observed = format!("0 through degree {d}");
            report.verdict = if rhs.is_zero() { Verdict::Pass } else { Verdict::Fail };
        }
        Ok(lead) => {
            report.observed = format!("[deg {}] {}", lead.degree(), lead);
            report.verdict = if lead.degree() == d && lead == expected_low && !rhs.is_zero() {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            report.observed_leading = Some(lead);
        }
    }
    Ok(report)
}

/// Random nonzero `w` in the variables `y^{p^s}`, homogeneous of degree `z_degree` in them,
/// with at least one exponent not divisible by `p` (so `s` is exact).
pub fn random_pde_polynomial<R: rand::Rng>(
    ctx: &std::sync::Arc<SeriesContext>,
    s: u32,
    z_degree: u32,
    max_terms: usize,
    rng: &mut R,
) -> IwasawaSeries {
    let p = ctx.p;
    let n = ctx.nvars();
    let q = (p as u32).pow(s);
    loop {
        let mut w = IwasawaSeries::zero(ctx, crate::lazseries::UNTRUNCATED);
        let terms = rng.gen_range(1..=max_terms);
        for _ in 0..terms {
            let mut exps = vec![0u32; n];
            for _ in 0..z_degree {
                exps[rng.gen_range(0..n)] += q;
            }
            let c = rng.gen_range(1..p) as i64;
            let m = Monomial::from_exponents(exps).expect("small exponents");
            w = w.add(&IwasawaSeries::monomial(ctx, crate::lazseries::UNTRUNCATED, m, c)).expect("same context");
        }
        let exact_level = w.terms().keys().any(|m| m.exponents().iter().any(|&e| e % (q * p as u32) != 0));
        if !w.is_zero() && exact_level {
            return w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(label: &str) -> RootSystem {
        RootSystem::from_label(label).unwrap()
    }

    #[test]
    fn non_adjacent_is_zero() {
        let a2 = rs("A2");
        let a = a2.index_of(&[1, 0]).unwrap();
        let b = a2.index_of(&[1, 1]).unwrap();
        let c = CommutatorCase::roots(&a2, a, b, 0, 0).unwrap();
        assert_eq!(c.tag, CaseTag::NonAdjacent);
        assert!(expected_leading_term(&a2, 5, &c).unwrap().is_zero());
    }

    #[test]
    fn torus_case_a2_seven() {
        let a2 = rs("A2");
        let a = a2.index_of(&[1, 0]).unwrap();
        let c = CommutatorCase::torus(&a2, a, 0, 0, 0).unwrap();
        let f = expected_leading_term(&a2, 7, &c).unwrap();
        assert_eq!(f.degree, Some(7));
        assert_eq!(f.terms.len(), 1);
        assert_eq!(f.terms[0].coefficient, 5); // -2 mod 7
        assert_eq!(f.terms[0].variable, root_variable(&a2, a));
    }

    #[test]
    fn opposite_e8_at_five_literal_zeroes_large_coefficients() {
        let e8 = rs("E8");
        let top = e8.num_roots() - 1;
        let c = CommutatorCase::roots(&e8, top, e8.negate_index(top), 0, 0).unwrap();
        let f = expected_leading_term(&e8, 5, &c).unwrap();
        assert_eq!(f.provenance, Provenance::P5Truncation);
        let coeffs = &e8.root(top).coeffs;
        let literal = f.alternatives.iter().find(|a| a.name == "root-coefficients-plus").unwrap();
        for (i, &n) in coeffs.iter().enumerate() {
            let var = torus_variable(&e8, i);
            let lit = literal.terms.iter().find(|t| t.variable == var).map(|t| t.coefficient).unwrap_or(0);
            assert_eq!(lit == 0, n >= 5, "literal rule at node {i}");
            let ours = f.terms.iter().find(|t| t.variable == var).map(|t| t.coefficient).unwrap_or(0);
            assert_eq!(ours, n as u64 % 5);
        }
    }

    #[test]
    fn g2_sum_branch_at_three_is_support_only() {
        let g2 = rs("G2");
        let mut found = false;
        for c in enumerate_cases(&g2, CaseTag::SumIsRoot, 0, 0) {
            let f = expected_leading_term(&g2, 3, &c).unwrap();
            if f.support_only {
                found = true;
                assert_eq!(f.degree, Some(9));
                assert_eq!(f.provenance, Provenance::P3C11);
                assert!(f.predicted_anchor_coefficient.unwrap() != 0);
            }
        }
        assert!(found);
    }

    #[test]
    fn a1_has_no_non_adjacent_pairs() {
        assert!(enumerate_cases(&rs("A1"), CaseTag::NonAdjacent, 0, 0).is_empty());
        assert!(enumerate_cases(&rs("A1"), CaseTag::SumIsRoot, 0, 0).is_empty());
    }

    #[test]
    fn beta_digit_value_matches_power() {
        for p in [3u64, 5, 7] {
            for (r, s) in [(0, 0), (1, 0), (1, 2)] {
                let b = beta_digits(p, r, s, r + s + 4).unwrap();
                let ring = PadicRing::new(p, r + s + 5).unwrap();
                let lhs = ring.pow(1 + p, b.value());
                let rhs = ring.inv(1 + p.pow(r + s + 2)).unwrap();
                assert_eq!(lhs, rhs, "p={p} r={r} s={s}");
            }
        }
    }

    #[test]
    fn beta_example_three() {
        let b = beta_digits(3, 0, 0, 3).unwrap();
        assert_eq!(b.digits, vec![0, 2, 1]);
        assert_eq!(b.value(), 15);
        assert!(beta_digits(3, 0, 0, 2).is_err());
    }

    #[test]
    fn a1_torus_case_passes() {
        let m = build_model(&rs("A1"), 3, 3).unwrap();
        let c = CommutatorCase::torus(m.root_system(), 1, 0, 0, 0).unwrap();
        let rep = verify_prop31(&m, &c, None).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
    }

    #[test]
    fn small_truncation_is_inconclusive() {
        let m = build_model(&rs("A2"), 5, 3).unwrap();
        let a2 = m.root_system();
        let c = CommutatorCase::roots(a2, a2.index_of(&[1, 0]).unwrap(), a2.index_of(&[0, 1]).unwrap(), 0, 0).unwrap();
        assert_eq!(verify_prop31(&m, &c, Some(4)).unwrap().verdict, Verdict::Inconclusive);
        let low = build_model(a2, 5, 2).unwrap();
        assert_eq!(verify_prop31(&low, &c, None).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn a2_sum_case_five() {
        let m = build_model(&rs("A2"), 5, 3).unwrap();
        let a2 = m.root_system();
        let c = CommutatorCase::roots(a2, a2.index_of(&[1, 0]).unwrap(), a2.index_of(&[0, 1]).unwrap(), 0, 0).unwrap();
        let rep = verify_prop31(&m, &c, None).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let lead = rep.observed_leading.unwrap();
        assert_eq!(lead.degree(), 5);
        let c = lead.series().terms().values().next().copied().unwrap();
        assert!(c == 1 || c == 4);
    }

    #[test]
    fn report_json_shape() {
        let m = build_model(&rs("A1"), 3, 3).unwrap();
        let c = CommutatorCase::roots(m.root_system(), 0, 1, 0, 0).unwrap();
        let rep = verify_prop31(&m, &c, None).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        for key in ["case", "inputs", "expected", "observed", "verdict"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["case"], "opposite");
    }

    #[test]
    fn pde_trivial_examples() {
        let m = build_model(&rs("A1"), 3, 3).unwrap();
        let table = LeadingTermTable::from_oracle(&m, 0, 0).unwrap();
        let alg = SeriesAlgebra::new(&m, 4).unwrap();
        let ctx = alg.context().clone();
        // w = y_eta: both sides are the commutator itself
        let w = alg.variable(0);
        let rep = verify_pde(&alg, &table, 2, &w).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        assert_eq!(rep.observed_leading.unwrap(), *table.get(2, 0).unwrap());
        let c = IwasawaSeries::constant(&ctx, 4, 2);
        let rep = verify_pde(&alg, &table, 2, &c).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }
}
