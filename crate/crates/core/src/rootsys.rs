//! Root systems of the simple types, built from Bourbaki Cartan data.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }

    /// Rank implied by the family alone, for the exceptional types with one choice.
    pub fn implied_rank(self) -> Option<usize> {
        match self {
            Family::F => Some(4),
            Family::G => Some(2),
            _ => None,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "E" => Ok(Family::E),
            "F" => Ok(Family::F),
            "G" => Ok(Family::G),
            other => Err(Error::Configuration {
                label: other.to_string(),
                reason: "unknown type letter".into(),
            }),
        }
    }
}

/// A family letter together with a rank, validated against the legal ranges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CartanType {
    pub family: Family,
    pub rank: usize,
}

impl CartanType {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let legal = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 3,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if !legal {
            return Err(Error::Configuration {
                label: format!("{}{}", family.letter(), rank),
                reason: "rank outside the legal range for this type".into(),
            });
        }
        Ok(CartanType { family, rank })
    }

    /// Parses labels such as `A2`, `E8`, `G2`, or a bare letter plus an explicit rank.
    pub fn parse(label: &str, rank: Option<usize>) -> Result<Self> {
        let label = label.trim();
        let mut chars = label.chars();
        let letter = chars.next().ok_or_else(|| Error::Configuration {
            label: String::new(),
            reason: "empty type label".into(),
        })?;
        let family: Family = letter.to_string().parse()?;
        let rest: String = chars.collect();
        let embedded = if rest.is_empty() {
            None
        } else {
            Some(rest.parse::<usize>().map_err(|_| Error::Configuration {
                label: label.to_string(),
                reason: "rank suffix is not a number".into(),
            })?)
        };
        let rank = match (embedded, rank) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Configuration {
                    label: label.to_string(),
                    reason: format!("conflicting ranks {a} and {b}"),
                })
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => family.implied_rank().ok_or_else(|| Error::Configuration {
                label: label.to_string(),
                reason: "rank required".into(),
            })?,
        };
        CartanType::new(family, rank)
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.family.letter(), self.rank)
    }

    /// Bourbaki Cartan matrix with `cartan[i][j] = <delta_i, delta_j>`.
    pub fn cartan_matrix(&self) -> Vec<Vec<i32>> {
        let l = self.rank;
        let mut a = vec![vec![0i32; l]; l];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 2;
        }
        let mut link = |i: usize, j: usize| {
            a[i][j] = -1;
            a[j][i] = -1;
        };
        match self.family {
            Family::A | Family::B | Family::C => {
                for i in 0..l - 1 {
                    link(i, i + 1);
                }
            }
            Family::D => {
                for i in 0..l - 2 {
                    link(i, i + 1);
                }
                link(l - 3, l - 1);
            }
            Family::E => {
                link(0, 2);
                link(2, 3);
                link(1, 3);
                for i in 3..l - 1 {
                    link(i, i + 1);
                }
            }
            Family::F => {
                link(0, 1);
                link(1, 2);
                link(2, 3);
            }
            Family::G => link(0, 1),
        }
        match self.family {
            Family::B => a[l - 2][l - 1] = -2,
            Family::C => a[l - 1][l - 2] = -2,
            Family::F => a[1][2] = -2,
            Family::G => a[1][0] = -3,
            _ => {}
        }
        a
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Root {
    pub coeffs: Vec<i32>,
    pub height: i32,
}

impl Root {
    pub fn new(coeffs: Vec<i32>) -> Self {
        let height = coeffs.iter().sum();
        Root { coeffs, height }
    }

    pub fn is_positive(&self) -> bool {
        self.height > 0
    }

    pub fn negated(&self) -> Root {
        Root::new(self.coeffs.iter().map(|c| -c).collect())
    }

    /// Label such as `a1+2a2` or `-a1-a2`.
    pub fn label(&self) -> String {
        let mut out = String::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if c < 0 {
                out.push('-');
            } else if !out.is_empty() {
                out.push('+');
            }
            if c.abs() != 1 {
                out.push_str(&c.abs().to_string());
            }
            out.push_str(&format!("a{}", i + 1));
        }
        out
    }
}

/// Ordering key: height, then coefficient vector descending.
fn order_key(a: &Root, b: &Root) -> std::cmp::Ordering {
    a.height.cmp(&b.height).then_with(|| b.coeffs.cmp(&a.coeffs))
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    cartan_type: CartanType,
    cartan: Vec<Vec<i32>>,
    /// Half squared lengths of the simple roots, shortest equal to 1.
    symmetrizer: Vec<i64>,
    /// Negative roots by increasing height, then positive roots by increasing height.
    roots: Vec<Root>,
    index: HashMap<Vec<i32>, usize>,
}

pub fn build_root_system(family: Family, rank: usize) -> Result<RootSystem> {
    RootSystem::new(CartanType::new(family, rank)?)
}

impl RootSystem {
    pub fn new(cartan_type: CartanType) -> Result<Self> {
        let cartan = cartan_type.cartan_matrix();
        let symmetrizer = symmetrizer(&cartan);
        let positive = positive_roots(&cartan);
        let mut negative: Vec<Root> = positive.iter().map(Root::negated).collect();
        negative.sort_by(order_key);
        let mut roots = negative;
        roots.extend(positive);
        let index = roots
            .iter()
            .enumerate()
            .map(|(i, r)| (r.coeffs.clone(), i))
            .collect();
        Ok(RootSystem {
            cartan_type,
            cartan,
            symmetrizer,
            roots,
            index,
        })
    }

    pub fn from_label(label: &str) -> Result<Self> {
        RootSystem::new(CartanType::parse(label, None)?)
    }

    pub fn cartan_type(&self) -> CartanType {
        self.cartan_type
    }

    pub fn label(&self) -> String {
        self.cartan_type.label()
    }

    pub fn rank(&self) -> usize {
        self.cartan_type.rank
    }

    pub fn cartan_matrix(&self) -> &[Vec<i32>] {
        &self.cartan
    }

    pub fn symmetrizer(&self) -> &[i64] {
        &self.symmetrizer
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn num_positive(&self) -> usize {
        self.roots.len() / 2
    }

    pub fn root(&self, idx: usize) -> &Root {
        &self.roots[idx]
    }

    pub fn index_of(&self, coeffs: &[i32]) -> Option<usize> {
        self.index.get(coeffs).copied()
    }

    pub fn is_root(&self, coeffs: &[i32]) -> bool {
        self.index.contains_key(coeffs)
    }

    /// Index of the simple root `delta_{i+1}` (0-based `i`).
    pub fn simple_index(&self, i: usize) -> usize {
        self.num_positive() + i
    }

    pub fn simple_roots(&self) -> &[Root] {
        let n = self.num_positive();
        &self.roots[n..n + self.rank()]
    }

    /// Simple-root position of a root index, if the root is simple.
    pub fn simple_position(&self, idx: usize) -> Option<usize> {
        let n = self.num_positive();
        (idx >= n && idx < n + self.rank()).then(|| idx - n)
    }

    pub fn is_positive_index(&self, idx: usize) -> bool {
        idx >= self.num_positive()
    }

    pub fn negate_index(&self, idx: usize) -> usize {
        let neg: Vec<i32> = self.roots[idx].coeffs.iter().map(|c| -c).collect();
        self.index[&neg]
    }

    /// Index of `a + b` when it is a root.
    pub fn sum_index(&self, a: usize, b: usize) -> Option<usize> {
        let s = add(&self.roots[a].coeffs, &self.roots[b].coeffs);
        self.index_of(&s)
    }

    /// Symmetric form with `(delta_i|delta_i) = 2 d_i`.
    pub fn inner(&self, a: &[i32], b: &[i32]) -> i64 {
        let l = self.rank();
        let mut total = 0i64;
        for i in 0..l {
            if a[i] == 0 {
                continue;
            }
            for j in 0..l {
                if b[j] == 0 {
                    continue;
                }
                total += a[i] as i64 * b[j] as i64 * self.cartan[i][j] as i64 * self.symmetrizer[j];
            }
        }
        total
    }

    pub fn norm(&self, a: &[i32]) -> i64 {
        self.inner(a, a)
    }

    /// `<a, b> = 2(a|b)/(b|b)` for arbitrary roots.
    pub fn pairing(&self, a: &[i32], b: &[i32]) -> i64 {
        2 * self.inner(a, b) / self.norm(b)
    }

    /// `<alpha, delta_j>` against the simple root with 0-based position `j`.
    pub fn cartan_integer_simple(&self, alpha: &[i32], j: usize) -> i32 {
        alpha
            .iter()
            .enumerate()
            .map(|(i, &n)| n * self.cartan[i][j])
            .sum()
    }

    /// Coefficients of the coroot of `alpha` over the simple coroots.
    pub fn coroot_coeffs(&self, alpha: &[i32]) -> Vec<i32> {
        let half_norm = self.norm(alpha) / 2;
        alpha
            .iter()
            .zip(&self.symmetrizer)
            .map(|(&n, &d)| (n as i64 * d / half_norm) as i32)
            .collect()
    }

    /// Torus weights of `alpha`: `<alpha, delta_j>` for every simple root.
    pub fn weights(&self, alpha: &[i32]) -> Vec<i32> {
        (0..self.rank())
            .map(|j| self.cartan_integer_simple(alpha, j))
            .collect()
    }

    pub fn highest_root(&self) -> &Root {
        self.roots.last().expect("root systems are nonempty")
    }

    pub fn max_coefficient(&self) -> i32 {
        *self.highest_root().coeffs.iter().max().unwrap()
    }

    pub fn hyp_phi(&self, p: u64) -> Result<bool> {
        check_prime(p)?;
        Ok(p > self.max_coefficient() as u64)
    }

    pub fn cartan_determinant(&self) -> i64 {
        determinant(&self.cartan)
    }

    /// Largest `r` with `beta - r alpha` a root.
    pub fn string_below(&self, alpha: &[i32], beta: &[i32]) -> i32 {
        let mut r = 0;
        let mut cur = beta.to_vec();
        loop {
            cur = sub(&cur, alpha);
            if !self.is_root(&cur) {
                return r;
            }
            r += 1;
        }
    }

    pub fn to_json(&self) -> RootSystemJson {
        RootSystemJson {
            type_label: self.cartan_type.family.letter().to_string(),
            rank: self.rank(),
            roots: self.roots.clone(),
            cartan: self.cartan.clone(),
        }
    }
}

/// `<alpha, delta>` for a root and a simple root.
pub fn cartan_integer(rs: &RootSystem, alpha: &Root, delta: &Root) -> Result<i32> {
    if !rs.is_root(&alpha.coeffs) {
        return Err(Error::Domain(format!("{} is not a root", alpha.label())));
    }
    let j = rs
        .index_of(&delta.coeffs)
        .and_then(|i| rs.simple_position(i))
        .ok_or_else(|| Error::Domain(format!("{} is not a simple root", delta.label())))?;
    Ok(rs.cartan_integer_simple(&alpha.coeffs, j))
}

pub fn highest_root(rs: &RootSystem) -> &Root {
    rs.highest_root()
}

pub fn hyp_phi(rs: &RootSystem, p: u64) -> Result<bool> {
    rs.hyp_phi(p)
}

pub fn check_prime(p: u64) -> Result<()> {
    if p <= 2 || !is_prime(p) {
        return Err(Error::UnsupportedPrime(p));
    }
    Ok(())
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSystemJson {
    #[serde(rename = "type")]
    pub type_label: String,
    pub rank: usize,
    pub roots: Vec<Root>,
    pub cartan: Vec<Vec<i32>>,
}

fn add(a: &[i32], b: &[i32]) -> Vec<i32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[i32], b: &[i32]) -> Vec<i32> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn symmetrizer(cartan: &[Vec<i32>]) -> Vec<i64> {
    // Propagate length ratios along the (connected) Dynkin diagram.
    let l = cartan.len();
    let mut num = vec![0i64; l];
    let mut den = vec![1i64; l];
    num[0] = 1;
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        for j in 0..l {
            if j != i && cartan[i][j] != 0 && num[j] == 0 {
                // a_ij d_j = a_ji d_i
                num[j] = num[i] * cartan[j][i] as i64;
                den[j] = den[i] * cartan[i][j] as i64;
                stack.push(j);
            }
        }
    }
    let lcm_den = den
        .iter()
        .fold(1i64, |acc, &d| num_integer::lcm(acc, d.abs()));
    let mut d: Vec<i64> = (0..l).map(|i| num[i] * (lcm_den / den[i])).collect();
    let g = d.iter().fold(0i64, |acc, &x| num_integer::gcd(acc, x));
    for x in &mut d {
        *x /= g;
    }
    d
}

fn positive_roots(cartan: &[Vec<i32>]) -> Vec<Root> {
    let l = cartan.len();
    let mut known: BTreeSet<Vec<i32>> = BTreeSet::new();
    let mut level: Vec<Vec<i32>> = (0..l)
        .map(|i| {
            let mut v = vec![0; l];
            v[i] = 1;
            v
        })
        .collect();
    let mut all = Vec::new();
    while !level.is_empty() {
        for r in &level {
            known.insert(r.clone());
        }
        let mut next: BTreeSet<Vec<i32>> = BTreeSet::new();
        for beta in &level {
            for j in 0..l {
                let mut r = 0;
                let mut cur = beta.clone();
                loop {
                    cur[j] -= 1;
                    if known.contains(&cur) {
                        r += 1;
                    } else {
                        break;
                    }
                }
                let pairing: i32 = (0..l).map(|i| beta[i] * cartan[i][j]).sum();
                if r - pairing > 0 {
                    let mut up = beta.clone();
                    up[j] += 1;
                    next.insert(up);
                }
            }
        }
        all.extend(level.drain(..).map(Root::new));
        level = next.into_iter().collect();
    }
    all.sort_by(order_key);
    all
}

pub(crate) fn determinant(m: &[Vec<i32>]) -> i64 {
    use num_rational::Ratio;
    let n = m.len();
    let mut a: Vec<Vec<Ratio<i64>>> = m
        .iter()
        .map(|r| r.iter().map(|&x| Ratio::from_integer(x as i64)).collect())
        .collect();
    let mut det = Ratio::from_integer(1i64);
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| a[r][c] != Ratio::from_integer(0)) else {
            return 0;
        };
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
        }
    }
    det.to_integer()
}
