//! Matrix models of the first congruence kernel over Z/p^N and Lazard coordinates.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::constants::{structure_constants, ChevalleyConstants};
use crate::error::{Error, Result};
use crate::modular::{invert_mod_p, row_reduce_mod_p, ModpPowerInt, PadicRing, QMatrix, ZpMatrix};
use crate::rootsys::{Family, RootSystem};

type Q = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Defining,
    Adjoint,
}

impl Representation {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::A | Family::B | Family::C | Family::D => Representation::Defining,
            _ => Representation::Adjoint,
        }
    }
}

/// A generator of the Lazard ordered basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    /// `x_a(p)` for the root with this index.
    Root(usize),
    /// `h_{delta_i}(1+p)` for the simple root at this position.
    Torus(usize),
}

/// Lazard order: negative roots, then torus generators, then positive roots.
pub fn lazard_generators(rs: &RootSystem) -> Vec<Generator> {
    let npos = rs.num_positive();
    let mut out: Vec<Generator> = (0..npos).map(Generator::Root).collect();
    out.extend((0..rs.rank()).map(Generator::Torus));
    out.extend((npos..rs.num_roots()).map(Generator::Root));
    out
}

/// Variable labels in Lazard order, e.g. `-a1-a2`, `d1`, `a1+a2`.
pub fn variable_labels(rs: &RootSystem) -> Vec<String> {
    lazard_generators(rs)
        .into_iter()
        .map(|g| match g {
            Generator::Root(i) => rs.root(i).label(),
            Generator::Torus(i) => format!("d{}", i + 1),
        })
        .collect()
}

/// Variable index of a root in Lazard order.
pub fn root_variable(rs: &RootSystem, root: usize) -> usize {
    if rs.is_positive_index(root) {
        root + rs.rank()
    } else {
        root
    }
}

/// Variable index of the torus generator for simple position `i`.
pub fn torus_variable(rs: &RootSystem, i: usize) -> usize {
    rs.num_positive() + i
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelTag {
    pub label: String,
    pub representation: Representation,
    pub p: u64,
    pub precision: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub matrix: ZpMatrix,
    pub tag: Arc<ModelTag>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CongruenceLevel {
    Exact(u32),
    /// Congruent to the identity modulo the full precision.
    AtLeast(u32),
}

impl fmt::Display for CongruenceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CongruenceLevel::Exact(k) => write!(f, "{k}"),
            CongruenceLevel::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LazardCoordinates {
    /// Exponents in Z/p^{N-1}, Lazard order.
    pub lambda: Vec<u64>,
    pub p: u64,
    pub precision: u32,
}

struct LevelSolver {
    /// Sparse images `(g_i - 1)/p mod p`, vectorized.
    columns: Vec<Vec<(usize, u64)>>,
    pivot_rows: Vec<usize>,
    pivot_inverse: Vec<Vec<u64>>,
}

pub struct Model {
    rs: Arc<RootSystem>,
    constants: Arc<ChevalleyConstants>,
    representation: Representation,
    ring: PadicRing,
    dim: usize,
    x_rational: Vec<QMatrix>,
    h_rational: Vec<QMatrix>,
    /// `X_a^k mod p^N` for `k = 1..` until nilpotent.
    x_powers: Vec<Vec<ZpMatrix>>,
    /// Diagonal of `H_i`, i.e. the weight of each basis vector against the coroot.
    h_weights: Vec<Vec<i64>>,
    generators: Vec<Generator>,
    solver: LevelSolver,
    tag: Arc<ModelTag>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model").field("tag", &self.tag).field("dim", &self.dim).finish()
    }
}

pub fn build_model(rs: &RootSystem, p: u64, precision: u32) -> Result<Model> {
    Model::build(rs, p, precision, Representation::default_for(rs.cartan_type().family))
}

impl Model {
    pub fn build(rs: &RootSystem, p: u64, precision: u32, representation: Representation) -> Result<Model> {
        let ring = PadicRing::new(p, precision)?;
        if precision < 2 {
            return Err(Error::Precision("model precision N must be at least 2".into()));
        }
        let rs = Arc::new(rs.clone());
        let constants = Arc::new(structure_constants(&rs));
        if representation == Representation::Adjoint && rs.cartan_determinant() % p as i64 == 0 {
            return Err(Error::ModelNotFaithful(format!(
                "adjoint model of {} at p={p}: the Lie algebra has a center mod p",
                rs.label()
            )));
        }
        let (x_rational, h_rational) = match representation {
            Representation::Defining => defining_generators(&rs, &constants)?,
            Representation::Adjoint => adjoint_generators(&rs, &constants),
        };
        let dim = x_rational[0].dim;
        let mut x_powers = Vec::with_capacity(x_rational.len());
        for x in &x_rational {
            let mut list = Vec::new();
            let mut pw = x.clone();
            while !pw.is_zero() {
                list.push(ZpMatrix::from_rational(ring, &pw)?);
                pw = pw.mul(x);
            }
            x_powers.push(list);
        }
        let mut h_weights = Vec::with_capacity(h_rational.len());
        for h in &h_rational {
            let mut w = Vec::with_capacity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    if i != j && *h.get(i, j).numer() != 0 {
                        return Err(Error::ModelNotFaithful("torus generator is not diagonal".into()));
                    }
                }
                let d = h.get(i, i);
                if !d.is_integer() {
                    return Err(Error::ModelNotFaithful("non-integral torus weight".into()));
                }
                w.push(d.to_integer());
            }
            h_weights.push(w);
        }
        let generators = lazard_generators(&rs);
        let tag = Arc::new(ModelTag {
            label: rs.label(),
            representation,
            p,
            precision,
        });
        let solver = build_solver(&generators, &x_powers, &h_weights, ring, dim)?;
        Ok(Model {
            rs,
            constants,
            representation,
            ring,
            dim,
            x_rational,
            h_rational,
            x_powers,
            h_weights,
            generators,
            solver,
            tag,
        })
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    pub fn root_system_arc(&self) -> Arc<RootSystem> {
        self.rs.clone()
    }

    pub fn constants(&self) -> &ChevalleyConstants {
        &self.constants
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn ring(&self) -> PadicRing {
        self.ring
    }

    pub fn p(&self) -> u64 {
        self.ring.p
    }

    pub fn precision(&self) -> u32 {
        self.ring.precision
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> &Arc<ModelTag> {
        &self.tag
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn num_variables(&self) -> usize {
        self.generators.len()
    }

    /// Rational matrix of `X_a`.
    pub fn x_matrix(&self, root: usize) -> &QMatrix {
        &self.x_rational[root]
    }

    /// Rational matrix of `H_i`.
    pub fn h_matrix(&self, i: usize) -> &QMatrix {
        &self.h_rational[i]
    }

    pub fn identity(&self) -> GroupElement {
        self.wrap(ZpMatrix::identity(self.ring, self.dim))
    }

    fn wrap(&self, matrix: ZpMatrix) -> GroupElement {
        GroupElement { matrix, tag: self.tag.clone() }
    }

    pub fn element(&self, matrix: ZpMatrix) -> Result<GroupElement> {
        if matrix.dim != self.dim || matrix.ring != self.ring {
            return Err(Error::Domain("matrix shape or ring does not match the model".into()));
        }
        if matrix.congruence_level() == 0 {
            return Err(Error::NotInKernel("matrix is not congruent to I mod p".into()));
        }
        Ok(self.wrap(matrix))
    }

    /// `x_a(t) = exp(t X_a)` for a raw residue `t` divisible by p.
    pub fn x_raw(&self, root: usize, t: u64) -> Result<GroupElement> {
        let t = t % self.ring.modulus;
        if t != 0 && t % self.ring.p != 0 {
            return Err(Error::NotInKernel(format!("x-parameter {t} is not divisible by p")));
        }
        let mut m = ZpMatrix::identity(self.ring, self.dim);
        for (k, pw) in self.x_powers[root].iter().enumerate() {
            let c = self.ring.divided_power(t, k as u64 + 1)?;
            m.add_scaled(pw, c);
        }
        Ok(self.wrap(m))
    }

    pub fn x_signed(&self, root: usize, t: i64) -> Result<GroupElement> {
        self.x_raw(root, self.ring.reduce_i64(t))
    }

    /// `h_{delta_i}(u)` for a raw residue `u = 1 mod p`.
    pub fn h_raw(&self, i: usize, u: u64) -> Result<GroupElement> {
        let u = u % self.ring.modulus;
        if u % self.ring.p != 1 {
            return Err(Error::NotInKernel(format!("torus parameter {u} is not 1 mod p")));
        }
        let mut m = ZpMatrix::zero(self.ring, self.dim);
        for (k, &w) in self.h_weights[i].iter().enumerate() {
            m.data[k * self.dim + k] = self.ring.pow_signed(u, w)?;
        }
        Ok(self.wrap(m))
    }

    /// `g_i^lambda` for the Lazard generator at variable index `var`.
    pub fn generator_power(&self, var: usize, lambda: i64) -> Result<GroupElement> {
        match self.generators[var] {
            Generator::Root(r) => {
                let t = self.ring.mul(self.ring.reduce_i64(lambda), self.ring.p);
                self.x_raw(r, t)
            }
            Generator::Torus(i) => {
                let u = self.ring.pow_signed(1 + self.ring.p, lambda)?;
                self.h_raw(i, u)
            }
        }
    }

    pub fn generator(&self, var: usize) -> GroupElement {
        self.generator_power(var, 1).expect("generators lie in the kernel")
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.wrap(a.matrix.mul(&b.matrix))
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        Ok(self.wrap(a.matrix.inverse_unipotent()?))
    }

    /// `a b a^{-1} b^{-1}`.
    pub fn group_commutator(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let ab = self.mul(a, b);
        let ai = self.inverse(a)?;
        let bi = self.inverse(b)?;
        Ok(self.mul(&self.mul(&ab, &ai), &bi))
    }

    /// Ordered product `prod_i g_i^{lambda_i}`.
    pub fn from_coordinates(&self, lambda: &[u64]) -> Result<GroupElement> {
        let mut acc = ZpMatrix::identity(self.ring, self.dim);
        for (var, &l) in lambda.iter().enumerate() {
            if l != 0 {
                acc = self.right_multiply_generator(&acc, var, l as i64)?;
            }
        }
        Ok(self.wrap(acc))
    }

    fn right_multiply_generator(&self, acc: &ZpMatrix, var: usize, lambda: i64) -> Result<ZpMatrix> {
        match self.generators[var] {
            Generator::Torus(i) => {
                let u = self.ring.pow_signed(1 + self.ring.p, lambda)?;
                let mut out = acc.clone();
                for (k, &w) in self.h_weights[i].iter().enumerate() {
                    let s = self.ring.pow_signed(u, w)?;
                    for row in 0..self.dim {
                        let idx = row * self.dim + k;
                        out.data[idx] = self.ring.mul(out.data[idx], s);
                    }
                }
                Ok(out)
            }
            Generator::Root(_) => Ok(acc.mul(&self.generator_power(var, lambda)?.matrix)),
        }
    }

    pub fn lazard_coordinates(&self, g: &GroupElement) -> Result<LazardCoordinates> {
        lazard_coordinates(self, g)
    }

    /// Checks `[H_i, X_a] = <a, delta_i> X_a`, `[X_a, X_b] = N_{a,b} X_{a+b}` and
    /// `[X_a, X_{-a}] = H_a` exactly; returns the list of violations.
    pub fn relation_violations(&self) -> Vec<String> {
        let rs = &self.rs;
        let mut bad = Vec::new();
        for a in 0..rs.num_roots() {
            let xa = &self.x_rational[a];
            for i in 0..rs.rank() {
                let c = rs.cartan_integer_simple(&rs.root(a).coeffs, i) as i64;
                if self.h_rational[i].bracket(xa) != xa.scale(Q::from_integer(c)) {
                    bad.push(format!("[H_{}, X_{}]", i + 1, rs.root(a).label()));
                }
            }
            for b in 0..rs.num_roots() {
                let br = xa.bracket(&self.x_rational[b]);
                let expect = if rs.negate_index(a) == b {
                    let m = rs.coroot_coeffs(&rs.root(a).coeffs);
                    let mut h = QMatrix::zero(self.dim);
                    for (i, &mi) in m.iter().enumerate() {
                        h = h.add(&self.h_rational[i].scale(Q::from_integer(mi as i64)));
                    }
                    h
                } else if let Some(s) = rs.sum_index(a, b) {
                    self.x_rational[s].scale(Q::from_integer(self.constants.n(a, b) as i64))
                } else {
                    QMatrix::zero(self.dim)
                };
                if br != expect {
                    bad.push(format!("[X_{}, X_{}]", rs.root(a).label(), rs.root(b).label()));
                }
            }
        }
        bad
    }

    /// Right-hand side of the commutator formula for `x_a(t) x_b(u) x_a(-t) x_b(-u)`.
    pub fn commutator_formula(&self, a: usize, b: usize, t: u64, u: u64) -> Result<GroupElement> {
        let ring = self.ring;
        let mut acc = self.identity();
        for term in self.constants.commutator_terms(&self.rs, a, b) {
            let param = ring.mul(
                ring.mul(ring.pow(t, term.i as u64), ring.pow(u, term.j as u64)),
                ring.reduce_i64(term.coefficient),
            );
            acc = self.mul(&acc, &self.x_raw(term.root, param)?);
        }
        Ok(acc)
    }

    /// Pairs `(a, b)` with `a != -b` for which the group commutator formula fails at `(t, u)`.
    pub fn commutator_violations(&self, t: u64, u: u64) -> Result<Vec<String>> {
        let rs = &self.rs;
        let mut bad = Vec::new();
        for a in 0..rs.num_roots() {
            for b in 0..rs.num_roots() {
                if a == b || rs.negate_index(a) == b {
                    continue;
                }
                let xa = self.x_raw(a, t)?;
                let xb = self.x_raw(b, u)?;
                let lhs = self.group_commutator(&xa, &xb)?;
                if lhs.matrix != self.commutator_formula(a, b, t, u)?.matrix {
                    bad.push(format!("({}, {})", rs.root(a).label(), rs.root(b).label()));
                }
            }
        }
        Ok(bad)
    }

    /// Pairs `(a, i)` for which `h_i(u) x_a(t) h_i(u)^{-1} = x_a(u^{<a, delta_i>} t)` fails.
    pub fn torus_conjugation_violations(&self, u: u64, t: u64) -> Result<Vec<String>> {
        let rs = &self.rs;
        let mut bad = Vec::new();
        for i in 0..rs.rank() {
            let h = self.h_raw(i, u)?;
            let hi = self.inverse(&h)?;
            for a in 0..rs.num_roots() {
                let c = rs.cartan_integer_simple(&rs.root(a).coeffs, i) as i64;
                let lhs = self.mul(&self.mul(&h, &self.x_raw(a, t)?), &hi);
                let rhs = self.x_raw(a, self.ring.mul(self.ring.pow_signed(u, c)?, t))?;
                if lhs.matrix != rhs.matrix {
                    bad.push(format!("(d{}, {})", i + 1, rs.root(a).label()));
                }
            }
        }
        Ok(bad)
    }
}

pub fn x_element(model: &Model, root: usize, t: ModpPowerInt) -> Result<GroupElement> {
    if t.ring != model.ring() {
        return Err(Error::Domain("parameter ring does not match the model".into()));
    }
    model.x_raw(root, t.value)
}

pub fn h_element(model: &Model, simple: usize, u: ModpPowerInt) -> Result<GroupElement> {
    if u.ring != model.ring() {
        return Err(Error::Domain("parameter ring does not match the model".into()));
    }
    model.h_raw(simple, u.value)
}

pub fn congruence_level(g: &GroupElement) -> CongruenceLevel {
    let n = g.matrix.ring.precision;
    let k = g.matrix.congruence_level();
    if k >= n {
        CongruenceLevel::AtLeast(n)
    } else {
        CongruenceLevel::Exact(k)
    }
}

/// Digit-peeling decomposition `g = prod_i g_i^{lambda_i} mod p^N`.
pub fn lazard_coordinates(model: &Model, g: &GroupElement) -> Result<LazardCoordinates> {
    let ring = model.ring;
    let p = ring.p;
    let n = model.dim;
    let d = model.generators.len();
    if g.matrix.dim != n || g.matrix.ring != ring {
        return Err(Error::Domain("element does not belong to this model".into()));
    }
    if g.matrix.congruence_level() == 0 {
        return Err(Error::NotInKernel("element is not congruent to I mod p".into()));
    }
    let mut lambda = vec![0u64; d];
    let lambda_modulus = ring.modulus / p;
    let mut pk = 1u64; // p^{k-1}
    for k in 1..ring.precision {
        // residual = (prod g_i^{lambda_i})^{-1} g
        let mut residual = g.matrix.clone();
        for (var, &lam) in lambda.iter().enumerate() {
            if lam != 0 {
                let inv = model.generator_power(var, -(lam as i64))?;
                residual = inv.matrix.mul(&residual);
            }
        }
        let pk_full = pk * p; // p^k
        let mut target = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = residual.get(i, j);
                if i == j {
                    v = ring.sub(v, 1);
                }
                if v % pk_full != 0 {
                    return Err(Error::ModelNotFaithful(format!(
                        "residual not in level {k} during digit peeling"
                    )));
                }
                target[i * n + j] = (v / pk_full) % p;
            }
        }
        let digits = model.solver.solve(&target, p)?;
        for (var, a) in digits.into_iter().enumerate() {
            if a != 0 {
                lambda[var] = (lambda[var] + a * pk) % lambda_modulus;
            }
        }
        pk = pk_full;
    }
    Ok(LazardCoordinates { lambda, p, precision: ring.precision })
}

impl LevelSolver {
    fn solve(&self, target: &[u64], p: u64) -> Result<Vec<u64>> {
        let d = self.columns.len();
        let mut a = vec![0u64; d];
        for (i, row) in self.pivot_inverse.iter().enumerate() {
            let mut s = 0u64;
            for (j, &c) in row.iter().enumerate() {
                s = (s + c * target[self.pivot_rows[j]]) % p;
            }
            a[i] = s;
        }
        let mut check = vec![0u64; target.len()];
        for (col, &ai) in self.columns.iter().zip(&a) {
            if ai == 0 {
                continue;
            }
            for &(pos, v) in col {
                check[pos] = (check[pos] + ai * v) % p;
            }
        }
        if check != target {
            return Err(Error::ModelNotFaithful(
                "level system inconsistent: element outside the model's congruence kernel".into(),
            ));
        }
        Ok(a)
    }
}

fn build_solver(
    generators: &[Generator],
    x_powers: &[Vec<ZpMatrix>],
    h_weights: &[Vec<i64>],
    ring: PadicRing,
    dim: usize,
) -> Result<LevelSolver> {
    let p = ring.p;
    let mut columns = Vec::with_capacity(generators.len());
    for g in generators {
        let mut col = Vec::new();
        match *g {
            Generator::Root(r) => {
                let x = &x_powers[r][0];
                for (pos, &v) in x.data.iter().enumerate() {
                    if v % p != 0 {
                        col.push((pos, v % p));
                    }
                }
            }
            Generator::Torus(i) => {
                for (k, &w) in h_weights[i].iter().enumerate() {
                    let v = w.rem_euclid(p as i64) as u64;
                    if v != 0 {
                        col.push((k * dim + k, v));
                    }
                }
            }
        }
        columns.push(col);
    }
    // Transpose: rows are generators, columns are matrix positions.
    let used: std::collections::BTreeSet<usize> =
        columns.iter().flat_map(|c| c.iter().map(|&(pos, _)| pos)).collect();
    let used: Vec<usize> = used.into_iter().collect();
    let mut mt: Vec<Vec<u64>> = columns
        .iter()
        .map(|c| {
            let mut row = vec![0u64; used.len()];
            for &(pos, v) in c {
                row[used.binary_search(&pos).unwrap()] = v;
            }
            row
        })
        .collect();
    let (rank, pivots) = row_reduce_mod_p(&mut mt, p);
    if rank < generators.len() {
        return Err(Error::ModelNotFaithful(format!(
            "graded level images have rank {rank} < {} at p={p}",
            generators.len()
        )));
    }
    let pivot_rows: Vec<usize> = pivots.iter().map(|&c| used[c]).collect();
    let block: Vec<Vec<u64>> = pivot_rows
        .iter()
        .map(|&pos| {
            columns
                .iter()
                .map(|c| c.iter().find(|&&(q, _)| q == pos).map_or(0, |&(_, v)| v))
                .collect()
        })
        .collect();
    let pivot_inverse = invert_mod_p(&block, p)
        .ok_or_else(|| Error::ModelNotFaithful("pivot block is singular".into()))?;
    Ok(LevelSolver { columns, pivot_rows, pivot_inverse })
}

/// Basis position of `v_k` (k > 0), `v_0`, or `v_{-k}` in the defining representation.
fn slot(n: usize, k: i64) -> usize {
    if k > 0 {
        k as usize - 1
    } else if k == 0 {
        n / 2
    } else {
        n - (-k) as usize
    }
}

fn defining_generators(rs: &RootSystem, c: &ChevalleyConstants) -> Result<(Vec<QMatrix>, Vec<QMatrix>)> {
    let l = rs.rank();
    let fam = rs.cartan_type().family;
    let n = match fam {
        Family::A => l + 1,
        Family::B => 2 * l + 1,
        Family::C | Family::D => 2 * l,
        _ => {
            return Err(Error::Configuration {
                label: rs.label(),
                reason: "no defining representation for exceptional types".into(),
            })
        }
    };
    let e = |a: usize, b: usize| QMatrix::unit(n, a, b);
    let mut es = Vec::with_capacity(l);
    let mut fs = Vec::with_capacity(l);
    for i in 1..=l as i64 {
        let (ei, fi) = if fam == Family::A {
            let m = e(i as usize - 1, i as usize);
            (m.clone(), m.transpose())
        } else if i < l as i64 {
            let m = e(slot(n, i), slot(n, i + 1)).sub(&e(slot(n, -(i + 1)), slot(n, -i)));
            (m.clone(), m.transpose())
        } else {
            match fam {
                Family::B => {
                    let m = e(slot(n, i), slot(n, 0)).sub(&e(slot(n, 0), slot(n, -i)));
                    (m.clone(), m.transpose().scale(Q::from_integer(2)))
                }
                Family::C => {
                    let m = e(slot(n, i), slot(n, -i));
                    (m.clone(), m.transpose())
                }
                _ => {
                    let m = e(slot(n, i - 1), slot(n, -i)).sub(&e(slot(n, i), slot(n, -(i - 1))));
                    (m.clone(), m.transpose())
                }
            }
        };
        es.push(ei);
        fs.push(fi);
    }
    let hs: Vec<QMatrix> = es.iter().zip(&fs).map(|(e, f)| e.bracket(f)).collect();
    let xs = root_vectors_from_simple(rs, c, &es, &fs);
    Ok((xs, hs))
}

/// Builds all root vectors from the simple ones via extraspecial pairs.
fn root_vectors_from_simple(rs: &RootSystem, c: &ChevalleyConstants, es: &[QMatrix], fs: &[QMatrix]) -> Vec<QMatrix> {
    let nr = rs.num_roots();
    let npos = rs.num_positive();
    let dim = es[0].dim;
    let mut xs: Vec<Option<QMatrix>> = vec![None; nr];
    for i in 0..rs.rank() {
        let s = rs.simple_index(i);
        xs[s] = Some(es[i].clone());
        xs[rs.negate_index(s)] = Some(fs[i].clone());
    }
    for xi in npos + rs.rank()..nr {
        let xc = &rs.root(xi).coeffs;
        let alpha_pos = (0..rs.rank())
            .find(|&i| {
                let mut v = xc.clone();
                v[i] -= 1;
                rs.index_of(&v).is_some_and(|k| rs.is_positive_index(k))
            })
            .unwrap();
        let alpha = rs.simple_index(alpha_pos);
        let mut bc = xc.clone();
        bc[alpha_pos] -= 1;
        let beta = rs.index_of(&bc).unwrap();
        let pos = xs[alpha].as_ref().unwrap().bracket(xs[beta].as_ref().unwrap());
        xs[xi] = Some(pos.scale(Q::new(1, c.n(alpha, beta) as i64)));
        let (na, nb) = (rs.negate_index(alpha), rs.negate_index(beta));
        let neg = xs[na].as_ref().unwrap().bracket(xs[nb].as_ref().unwrap());
        xs[rs.negate_index(xi)] = Some(neg.scale(Q::new(1, c.n(na, nb) as i64)));
    }
    xs.into_iter().map(|x| x.unwrap_or_else(|| QMatrix::zero(dim))).collect()
}

fn adjoint_generators(rs: &RootSystem, c: &ChevalleyConstants) -> (Vec<QMatrix>, Vec<QMatrix>) {
    let nr = rs.num_roots();
    let l = rs.rank();
    let dim = nr + l;
    // Basis in Lazard order: negative roots, H_1..H_l, positive roots.
    let pos_of_root = |r: usize| root_variable(rs, r);
    let pos_of_h = |i: usize| rs.num_positive() + i;
    let mut xs = Vec::with_capacity(nr);
    for a in 0..nr {
        let mut m = QMatrix::zero(dim);
        let ac = &rs.root(a).coeffs;
        for b in 0..nr {
            if rs.negate_index(a) == b {
                for (i, &mi) in rs.coroot_coeffs(ac).iter().enumerate() {
                    if mi != 0 {
                        m.set(pos_of_h(i), pos_of_root(b), Q::from_integer(mi as i64));
                    }
                }
            } else if let Some(s) = rs.sum_index(a, b) {
                m.set(pos_of_root(s), pos_of_root(b), Q::from_integer(c.n(a, b) as i64));
            }
        }
        for i in 0..l {
            let v = rs.cartan_integer_simple(ac, i) as i64;
            if v != 0 {
                m.set(pos_of_root(a), pos_of_h(i), Q::from_integer(-v));
            }
        }
        xs.push(m);
    }
    let mut hs = Vec::with_capacity(l);
    for i in 0..l {
        let mut m = QMatrix::zero(dim);
        for b in 0..nr {
            let v = rs.cartan_integer_simple(&rs.root(b).coeffs, i) as i64;
            m.set(pos_of_root(b), pos_of_root(b), Q::from_integer(v));
        }
        hs.push(m);
    }
    (xs, hs)
}
