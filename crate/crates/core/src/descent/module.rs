use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use super::Character;
use crate::error::{Error, Result};
use crate::rootnum::Sign;

/// Largest module checked exhaustively.
pub const MAX_MODULE_SIZE: u64 = 1 << 16;

pub type Matrix = Vec<Vec<u64>>;

/// (Z/2^k)^n with r commuting involutions acting on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignedModule {
    pub k: u32,
    pub n: usize,
    pub generators: Vec<Matrix>,
}

impl SignedModule {
    pub fn new(k: u32, n: usize, generators: Vec<Matrix>) -> Result<Self> {
        if k == 0 || n == 0 || k > 16 {
            return Err(Error::InvalidArgument(format!("module (Z/2^{k})^{n} not supported")));
        }
        let m = SignedModule { k, n, generators };
        let modulus = m.modulus();
        for g in &m.generators {
            if g.len() != n || g.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidArgument(format!("generator is not {n}x{n}")));
            }
        }
        let generators: Vec<Matrix> = m
            .generators
            .iter()
            .map(|g| g.iter().map(|row| row.iter().map(|&v| v % modulus).collect()).collect())
            .collect();
        let m = SignedModule { generators, ..m };
        let id = identity(n);
        for (i, g) in m.generators.iter().enumerate() {
            if m.mat_mul(g, g) != id {
                return Err(Error::NonInvolutiveAction(i));
            }
        }
        for (i, j) in (0..m.rank()).tuple_combinations() {
            let (a, b) = (&m.generators[i], &m.generators[j]);
            if m.mat_mul(a, b) != m.mat_mul(b, a) {
                return Err(Error::NonCommutingAction(i, j));
            }
        }
        Ok(m)
    }

    pub fn modulus(&self) -> u64 {
        1 << self.k
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn size(&self) -> u64 {
        self.modulus().saturating_pow(self.n as u32)
    }

    fn mat_mul(&self, a: &Matrix, b: &Matrix) -> Matrix {
        let q = self.modulus();
        (0..self.n)
            .map(|i| (0..self.n).map(|j| (0..self.n).map(|l| a[i][l] * b[l][j]).sum::<u64>() % q).collect())
            .collect()
    }

    pub fn apply(&self, g: &Matrix, v: &[u64]) -> Vec<u64> {
        let q = self.modulus();
        g.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum::<u64>() % q).collect()
    }

    /// Matrix of the group element given by a subset of generators.
    pub fn element(&self, sigma_mask: u32) -> Matrix {
        let mut m = identity(self.n);
        for (i, g) in self.generators.iter().enumerate() {
            if sigma_mask >> i & 1 == 1 {
                m = self.mat_mul(&m, g);
            }
        }
        m
    }

    /// The i-th element of (Z/2^k)^n in base-2^k digits.
    pub fn vector(&self, index: u64) -> Vec<u64> {
        let q = self.modulus();
        (0..self.n).map(|i| index / q.pow(i as u32) % q).collect()
    }

    fn signed(&self, s: Sign, v: &[u64]) -> Vec<u64> {
        let q = self.modulus();
        match s {
            Sign::Plus => v.to_vec(),
            Sign::Minus => v.iter().map(|&x| (q - x) % q).collect(),
        }
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.modulus()).collect()
    }

    /// sum_sigma s(sigma) m^sigma
    pub fn projection(&self, s: &Character, m: &[u64]) -> Vec<u64> {
        (0..1u32 << self.rank()).fold(vec![0; self.n], |acc, sigma| {
            let image = self.apply(&self.element(sigma), m);
            self.add(&acc, &self.signed(s.eval(sigma), &image))
        })
    }

    /// m^sigma = s(sigma) m for every group element.
    pub fn in_eigenspace(&self, s: &Character, m: &[u64]) -> bool {
        (0..1u32 << self.rank()).all(|sigma| self.apply(&self.element(sigma), m) == self.signed(s.eval(sigma), m))
    }
}

fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub m: Vec<u64>,
    /// (s, sum_sigma s(sigma) m^sigma), one entry per character.
    pub parts: Vec<(Character, Vec<u64>)>,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SumCertificate {
    pub k: u32,
    pub n: usize,
    pub r: usize,
    pub decompositions: Vec<Decomposition>,
}

impl SumCertificate {
    pub fn pass(&self) -> bool {
        self.decompositions.iter().all(|d| d.verified)
    }
}

/// Writes 2^r m as a sum of elements of the eigenspaces M_s, for every m.
pub fn lemma_sum_check(module: &SignedModule) -> Result<SumCertificate> {
    if module.size() > MAX_MODULE_SIZE {
        return Err(Error::InvalidArgument(format!(
            "module of size {} exceeds {MAX_MODULE_SIZE}",
            module.size()
        )));
    }
    let r = module.rank();
    let characters = Character::all(r);
    let decompositions = (0..module.size())
        .into_par_iter()
        .map(|index| {
            let m = module.vector(index);
            let parts: Vec<(Character, Vec<u64>)> =
                characters.iter().map(|s| (s.clone(), module.projection(s, &m))).collect();
            let total = parts.iter().fold(vec![0; module.n], |acc, (_, c)| module.add(&acc, c));
            let target: Vec<u64> = m.iter().map(|&x| (x << r) % module.modulus()).collect();
            let verified = total == target && parts.iter().all(|(s, c)| module.in_eigenspace(s, c));
            Decomposition { m, parts, verified }
        })
        .collect();
    Ok(SumCertificate { k: module.k, n: module.n, r, decompositions })
}

/// Involutions of (Z/2^k)^n given by signed permutation matrices.
pub fn signed_permutation_involutions(k: u32, n: usize) -> Vec<Matrix> {
    let q = 1u64 << k;
    let mut out: Vec<Matrix> = Vec::new();
    for perm in (0..n).permutations(n) {
        for signs in 0..1u32 << n {
            let mut m = vec![vec![0; n]; n];
            for (i, &j) in perm.iter().enumerate() {
                m[i][j] = if signs >> i & 1 == 1 { q - 1 } else { 1 };
            }
            if let Ok(module) = SignedModule::new(k, n, vec![m.clone()]) {
                let m = module.generators.into_iter().next().expect("one generator");
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Every module (Z/2^k)^n, k <= kmax, n <= nmax, with 1..=rmax pairwise
/// commuting signed-permutation involutions as generators.
pub fn signed_module_family(kmax: u32, nmax: usize, rmax: usize) -> Vec<SignedModule> {
    let mut out = Vec::new();
    for k in 1..=kmax {
        for n in 1..=nmax {
            let gens = signed_permutation_involutions(k, n);
            for r in 1..=rmax {
                for choice in (0..r).map(|_| 0..gens.len()).multi_cartesian_product() {
                    let chosen = choice.iter().map(|&i| gens[i].clone()).collect();
                    if let Ok(m) = SignedModule::new(k, n, chosen) {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}
