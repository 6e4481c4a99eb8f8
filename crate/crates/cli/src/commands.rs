use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

use iwasawa_core::kernel_verify::{precision_for_degree, random_pde_polynomial};
use iwasawa_core::lazseries::SeriesJson;
use iwasawa_core::normality::{
    candidate_catalog, centrality_failure, claim54_decompose, diagram_chase, mutate_instance, normal_obstruction,
    synthetic_instance, ChaseStatus, ObstructionVerdict,
};
use iwasawa_core::{
    build_model, prop31_sweep, verify_pde, CartanType, Error, IwasawaSeries, LeadingTermTable, RootSystem,
    SeriesAlgebra, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{Format, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success,
    Inconclusive,
    Failure,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Failure => 1,
            Status::Inconclusive => 3,
        }
    }
}

pub struct Report {
    pub json: Value,
    pub table: String,
    pub status: Status,
}

pub type Outcome = Result<Report, Error>;

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Inconclusive(_) => 3,
        Error::Configuration { .. }
        | Error::UnsupportedPrime(_)
        | Error::Parse(_)
        | Error::Context(..)
        | Error::Precondition(_)
        | Error::Precision(_)
        | Error::ModelNotFaithful(_) => 2,
        _ => 1,
    }
}

pub fn finish(config: &RunConfig, outcome: Outcome) -> ExitCode {
    match outcome {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.json).expect("report is valid JSON");
            if let Some(path) = &config.out {
                if let Err(e) = fs::write(path, format!("{text}\n")) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            match config.format {
                Format::Json => println!("{text}"),
                Format::Table => print!("{}", report.table),
            }
            ExitCode::from(report.status.code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}

fn root_system(config: &RunConfig) -> Result<RootSystem, Error> {
    RootSystem::new(CartanType::parse(&config.type_label, config.rank)?)
}

fn levels(value: Option<u32>) -> Vec<u32> {
    value.map_or_else(|| vec![0, 1], |v| vec![v])
}

fn verdict_status<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> Status {
    let mut status = Status::Success;
    for v in verdicts {
        match v {
            Verdict::Fail => return Status::Failure,
            Verdict::Inconclusive => status = Status::Inconclusive,
            _ => {}
        }
    }
    status
}

pub fn roots(config: &RunConfig) -> Outcome {
    let rs = root_system(config)?;
    let top = rs.highest_root();
    let json = json!({
        "command": "roots",
        "type": rs.label(),
        "num_roots": rs.num_roots(),
        "num_positive": rs.num_positive(),
        "highest_root": top.label(),
        "max_coefficient": rs.max_coefficient(),
        "cartan_determinant": rs.cartan_determinant(),
        "root_system": rs.to_json(),
    });
    let mut table = String::new();
    writeln!(table, "type               {}", rs.label()).unwrap();
    writeln!(table, "roots              {} ({} positive)", rs.num_roots(), rs.num_positive()).unwrap();
    writeln!(table, "highest root       {}", top.label()).unwrap();
    writeln!(table, "max coefficient    {}", rs.max_coefficient()).unwrap();
    writeln!(table, "Cartan determinant {}", rs.cartan_determinant()).unwrap();
    Ok(Report { json, table, status: Status::Success })
}

pub fn prop31(config: &RunConfig) -> Outcome {
    let rs = root_system(config)?;
    let pairs: Vec<(u32, u32)> =
        levels(config.r).into_iter().flat_map(|r| levels(config.s).into_iter().map(move |s| (r, s))).collect();
    let reports = prop31_sweep(&rs, config.p, &pairs)?;
    let status = verdict_status(reports.iter().map(|r| &r.verdict));
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for rep in &reports {
        let verdict = serde_json::to_value(rep.verdict).unwrap().as_str().unwrap().to_string();
        *counts.entry(rep.case.clone()).or_default().entry(verdict).or_default() += 1;
    }
    let mut table = String::new();
    writeln!(table, "{} p={} levels {:?}", rs.label(), config.p, pairs).unwrap();
    for (case, by_verdict) in &counts {
        let cells: Vec<String> = by_verdict.iter().map(|(v, n)| format!("{v}={n}")).collect();
        writeln!(table, "  {case:<16} {}", cells.join(" ")).unwrap();
    }
    let json = json!({
        "command": "prop31",
        "type": rs.label(),
        "p": config.p,
        "levels": pairs,
        "summary": counts,
        "reports": reports,
    });
    Ok(Report { json, table, status })
}

pub fn pde(config: &RunConfig) -> Outcome {
    let rs = root_system(config)?;
    let p = config.p;
    iwasawa_core::rootsys::check_prime(p)?;
    let r = config.r.unwrap_or(0);
    let z_degree = 2u32;
    let mut runs = Vec::new();
    let mut all = Vec::new();
    let mut table = String::new();
    for s in levels(config.s) {
        let q = (p as u32).pow(s);
        let degree = config.trunc.unwrap_or(z_degree * q - q + q * (p as u32).pow(r + 1));
        let precision = config.precision.unwrap_or_else(|| precision_for_degree(p, degree.max(p.pow(r + s + 2) as u32)));
        let model = build_model(&rs, p, precision)?;
        let table_l = LeadingTermTable::from_oracle(&model, r, s)?;
        let alg = SeriesAlgebra::new(&model, degree)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut reports = Vec::with_capacity(config.samples);
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for _ in 0..config.samples {
            let w = random_pde_polynomial(alg.context(), s, z_degree, 3, &mut rng);
            let gamma = rng.gen_range(0..alg.nvars());
            let rep = verify_pde(&alg, &table_l, gamma, &w)?;
            *counts.entry(serde_json::to_value(rep.verdict).unwrap().as_str().unwrap().to_string()).or_default() += 1;
            all.push(rep.verdict);
            reports.push(rep);
        }
        let cells: Vec<String> = counts.iter().map(|(v, n)| format!("{v}={n}")).collect();
        writeln!(table, "{} p={p} r={r} s={s} D={degree} N={precision}: {}", rs.label(), cells.join(" ")).unwrap();
        runs.push(json!({ "r": r, "s": s, "degree": degree, "precision": precision, "counts": counts, "reports": reports }));
    }
    let json = json!({
        "command": "pde",
        "type": rs.label(),
        "p": p,
        "seed": config.seed,
        "samples": config.samples,
        "runs": runs,
    });
    Ok(Report { json, table, status: verdict_status(&all) })
}

pub fn normality(config: &RunConfig) -> Outcome {
    let rs = root_system(config)?;
    let p = config.p;
    iwasawa_core::rootsys::check_prime(p)?;
    let budget = config.trunc.unwrap_or(2 * p as u32 + 2);
    let precision = config.precision.unwrap_or_else(|| precision_for_degree(p, budget));
    let model = build_model(&rs, p, precision)?;
    let alg = SeriesAlgebra::new(&model, budget)?;
    let ctx = alg.context().clone();
    let candidates: Vec<(String, IwasawaSeries)> = match &config.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let parsed: SeriesJson = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            vec![("input".to_string(), IwasawaSeries::from_json(&parsed, &ctx)?)]
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            candidate_catalog(&ctx, budget, config.samples, &mut rng)
        }
    };
    let mut status = Status::Success;
    let mut rows = Vec::new();
    let mut table = String::new();
    writeln!(table, "{} p={p} D={budget} N={precision}", rs.label()).unwrap();
    for (name, w) in &candidates {
        if w.is_zero() {
            return Err(Error::Precondition(format!("candidate {name} is zero")));
        }
        let report = normal_obstruction(&alg, w, budget)?;
        let central = centrality_failure(&alg, w, budget)?;
        let row_status = match report.verdict {
            ObstructionVerdict::Obstructed { .. } | ObstructionVerdict::Unit => Status::Success,
            ObstructionVerdict::Member { .. } => Status::Failure,
            ObstructionVerdict::Inconclusive { .. } => Status::Inconclusive,
        };
        status = status.max(row_status);
        let centrality = central.map(|(g, d)| json!({ "gamma": ctx.vars[g], "degree": d }));
        writeln!(
            table,
            "  {name:<24} {:<28} {}",
            report.verdict.to_string(),
            central.map_or("central".to_string(), |(g, d)| format!("non-central via {} at {d}", ctx.vars[g]))
        )
        .unwrap();
        rows.push(json!({ "name": name, "report": report, "centrality_failure": centrality }));
    }
    let json = json!({
        "command": "normality",
        "type": rs.label(),
        "p": p,
        "budget": budget,
        "precision": precision,
        "seed": config.seed,
        "candidates": rows,
    });
    Ok(Report { json, table, status })
}

pub fn chase(config: &RunConfig) -> Outcome {
    let rs = root_system(config)?;
    let p = config.p;
    iwasawa_core::rootsys::check_prime(p)?;
    let s = config.s.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let inst = synthetic_instance(&rs, p, s, 3, &mut rng)?;
    let cert = diagram_chase(&rs, &inst.w_m, &inst.w_d, s)?;
    let decomposition = if cert.is_certified() {
        let dec = claim54_decompose(&inst.w_m, &inst.w_d, s, &cert)?;
        Some(json!({ "u": dec.u.to_json(), "v": dec.v.to_json() }))
    } else {
        None
    };
    let mutated = mutate_instance(&rs, &inst, s)?;
    let broken = diagram_chase(&rs, &inst.w_m, &mutated, s)?;
    let status = match (&cert.status, &broken.status) {
        (ChaseStatus::Certified, ChaseStatus::PremiseFailure { .. }) => Status::Success,
        (ChaseStatus::Flagged { .. }, _) => Status::Inconclusive,
        _ => Status::Failure,
    };
    let mut table = String::new();
    writeln!(table, "{} p={p} s={s} seed={}", rs.label(), config.seed).unwrap();
    writeln!(table, "  w_m      {}", inst.w_m.series()).unwrap();
    writeln!(table, "  premises {} ({} hold)", cert.premises.len(), cert.premises.iter().filter(|p| p.holds).count()).unwrap();
    writeln!(table, "  status   {:?}", cert.status).unwrap();
    writeln!(table, "  mutated  {:?}", broken.status).unwrap();
    let json = json!({
        "command": "chase",
        "type": rs.label(),
        "p": p,
        "s": s,
        "seed": config.seed,
        "w_m": inst.w_m.series().to_json(),
        "w_d": inst.w_d.series().to_json(),
        "certificate": cert,
        "decomposition": decomposition,
        "mutated": { "w_d": mutated.series().to_json(), "certificate": broken },
    });
    Ok(Report { json, table, status })
}
