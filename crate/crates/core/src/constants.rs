//! Structure constants of a Chevalley basis and the commutator-formula coefficients.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::rootsys::RootSystem;

type Q = Ratio<i64>;

/// One factor `x_{i a + j b}(c t^i u^j)` of a group commutator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutatorTerm {
    pub i: u32,
    pub j: u32,
    pub root: usize,
    pub coefficient: i64,
}

#[derive(Clone, Debug)]
pub struct ChevalleyConstants {
    nroots: usize,
    /// `n[a * nroots + b] = N_{a,b}`, zero when `a + b` is not a root.
    n: Vec<i32>,
}

pub fn structure_constants(rs: &RootSystem) -> ChevalleyConstants {
    ChevalleyConstants::new(rs)
}

impl ChevalleyConstants {
    pub fn new(rs: &RootSystem) -> Self {
        let nroots = rs.num_roots();
        let npos = rs.num_positive();
        let mut pos: BTreeMap<(usize, usize), i64> = BTreeMap::new();

        for xi in npos + rs.rank()..nroots {
            let xc = &rs.root(xi).coeffs;
            let alpha_pos = (0..rs.rank())
                .find(|&i| {
                    let mut c = xc.clone();
                    c[i] -= 1;
                    rs.index_of(&c).is_some_and(|k| rs.is_positive_index(k))
                })
                .expect("non-simple positive roots have a simple summand");
            let alpha = rs.simple_index(alpha_pos);
            let mut bc = xc.clone();
            bc[alpha_pos] -= 1;
            let beta = rs.index_of(&bc).unwrap();
            let r = rs.string_below(&rs.root(alpha).coeffs, &bc) as i64;
            let n_ab = r + 1;
            pos.insert((alpha, beta), n_ab);
            pos.insert((beta, alpha), -n_ab);

            let norm_xi = rs.norm(xc);
            for gamma in npos..nroots {
                let Some(delta) = diff_index(rs, xi, gamma) else {
                    continue;
                };
                if !rs.is_positive_index(delta) || (gamma == alpha || gamma == beta) {
                    continue;
                }
                let neg_alpha = rs.negate_index(alpha);
                let neg_beta = rs.negate_index(beta);
                let mut acc = Q::from_integer(0);
                // N_{delta,-alpha} N_{gamma,-beta} / |delta - alpha|^2
                if let Some(d_a) = rs.sum_index(delta, neg_alpha) {
                    let t = Q::from_integer(lookup(rs, &pos, delta, neg_alpha) * lookup(rs, &pos, gamma, neg_beta));
                    acc += t / rs.norm(&rs.root(d_a).coeffs);
                }
                // N_{-alpha,gamma} N_{delta,-beta} / |gamma - alpha|^2
                if let Some(g_a) = rs.sum_index(gamma, neg_alpha) {
                    let t = Q::from_integer(lookup(rs, &pos, neg_alpha, gamma) * lookup(rs, &pos, delta, neg_beta));
                    acc += t / rs.norm(&rs.root(g_a).coeffs);
                }
                let value = acc * norm_xi / n_ab;
                assert!(value.is_integer(), "non-integral structure constant");
                pos.insert((gamma, delta), value.to_integer());
            }
        }

        let mut n = vec![0i32; nroots * nroots];
        for a in 0..nroots {
            for b in 0..nroots {
                if rs.sum_index(a, b).is_some() {
                    n[a * nroots + b] = lookup(rs, &pos, a, b) as i32;
                }
            }
        }
        ChevalleyConstants { nroots, n }
    }

    /// `N_{a,b}` for root indices.
    pub fn n(&self, a: usize, b: usize) -> i32 {
        self.n[a * self.nroots + b]
    }

    /// All nonzero `N_{a,b}` keyed by root index pairs.
    pub fn n_table(&self) -> BTreeMap<(usize, usize), i32> {
        let mut out = BTreeMap::new();
        for a in 0..self.nroots {
            for b in 0..self.nroots {
                let v = self.n(a, b);
                if v != 0 {
                    out.insert((a, b), v);
                }
            }
        }
        out
    }

    /// `M_{a,b,i} = (1/i!) prod_{k<i} N_{a, k a + b}`.
    fn m(&self, rs: &RootSystem, a: usize, b: usize, i: u32) -> Q {
        let mut acc = Q::from_integer(1);
        let mut cur = b;
        for k in 0..i {
            let v = self.n(a, cur);
            if v == 0 {
                return Q::from_integer(0);
            }
            acc = acc * v as i64 / (k as i64 + 1);
            if k + 1 < i {
                cur = rs.sum_index(a, cur).unwrap();
            }
        }
        acc
    }

    /// Factors of `x_a(t) x_b(u) x_a(-t) x_b(-u)` in order of increasing `i + j`.
    pub fn commutator_terms(&self, rs: &RootSystem, a: usize, b: usize) -> Vec<CommutatorTerm> {
        let l = rs.rank();
        let ac = &rs.root(a).coeffs;
        let bc = &rs.root(b).coeffs;
        if ac.iter().zip(bc).all(|(x, y)| x + y == 0) {
            return vec![];
        }
        let mut out = Vec::new();
        for total in 2..=5u32 {
            for i in 1..total {
                let j = total - i;
                let coeffs: Vec<i32> = (0..l).map(|k| i as i32 * ac[k] + j as i32 * bc[k]).collect();
                let Some(root) = rs.index_of(&coeffs) else {
                    continue;
                };
                let c = if j == 1 {
                    self.m(rs, a, b, i)
                } else if i == 1 {
                    -self.m(rs, b, a, j)
                } else {
                    let ab = rs.sum_index(a, b).unwrap();
                    match (i, j) {
                        (3, 2) => self.m(rs, ab, a, 2) * 2 / 3,
                        (2, 3) => self.m(rs, ab, b, 2) / 3,
                        _ => unreachable!("no further root strings in rank-two subsystems"),
                    }
                };
                assert!(c.is_integer(), "non-integral commutator coefficient");
                out.push(CommutatorTerm { i, j, root, coefficient: c.to_integer() });
            }
        }
        out
    }

    /// Full commutator coefficient table keyed by `(a, b, i, j)`.
    pub fn c_table(&self, rs: &RootSystem) -> BTreeMap<(usize, usize, u32, u32), i64> {
        let mut out = BTreeMap::new();
        for a in 0..self.nroots {
            for b in 0..self.nroots {
                for t in self.commutator_terms(rs, a, b) {
                    out.insert((a, b, t.i, t.j), t.coefficient);
                }
            }
        }
        out
    }
}

fn diff_index(rs: &RootSystem, a: usize, b: usize) -> Option<usize> {
    let c: Vec<i32> = rs
        .root(a)
        .coeffs
        .iter()
        .zip(&rs.root(b).coeffs)
        .map(|(x, y)| x - y)
        .collect();
    rs.index_of(&c)
}

/// Evaluates `N_{a,b}` from the positive-pair table using the sign rules of a Chevalley basis.
fn lookup(rs: &RootSystem, pos: &BTreeMap<(usize, usize), i64>, a: usize, b: usize) -> i64 {
    let Some(sum) = rs.sum_index(a, b) else {
        return 0;
    };
    let pa = rs.is_positive_index(a);
    let pb = rs.is_positive_index(b);
    match (pa, pb) {
        (true, true) => *pos.get(&(a, b)).expect("positive pair computed earlier"),
        (false, false) => -lookup(rs, pos, rs.negate_index(a), rs.negate_index(b)),
        _ => {
            // a + b + c = 0 with c = -(a+b): N_{a,b} = (c|c)/(a|a) N_{b,c} = (c|c)/(b|b) N_{c,a}
            let c = rs.negate_index(sum);
            let nc = rs.norm(&rs.root(c).coeffs);
            let v = if rs.is_positive_index(sum) == pa {
                // sum has the sign of a, so c and b share a sign
                Q::from_integer(nc) / rs.norm(&rs.root(a).coeffs) * lookup(rs, pos, b, c)
            } else {
                Q::from_integer(nc) / rs.norm(&rs.root(b).coeffs) * lookup(rs, pos, c, a)
            };
            assert!(v.is_integer());
            v.to_integer()
        }
    }
}
