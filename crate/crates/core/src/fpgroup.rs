//! Abelianization, quotients, and semidirect products with finite cyclic groups.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{smith_normal_form, IntMatrix, SnfResult};
use crate::rep::Representation;
use crate::word::{is_valid_name, Presentation, Word, WordError};

#[derive(Debug, Error)]
pub enum GroupError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("invalid cyclic action: {0}")]
    InvalidAction(String),
}

/// `Γ/[Γ,Γ] ≅ Z^rank ⊕ ⊕ Z/torsionᵢ`, together with the coordinate change
/// that realizes the splitting.
#[derive(Clone, Debug)]
pub struct AbelianizationData {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
    /// For each generator, its coordinates in the free part.
    pub basis_map: Vec<Vec<BigInt>>,
    generators: usize,
    diagonal: Vec<BigInt>,
    snf: SnfResult,
    v_inverse: IntMatrix,
}

/// Relator exponent-sum matrix: one row per relator, one column per generator.
pub fn relation_matrix(p: &Presentation) -> IntMatrix {
    let n = p.generator_count();
    let rows: Vec<Vec<i64>> = p.relators().iter().map(|r| r.exponent_sums(n)).collect();
    IntMatrix::from_fn(rows.len(), n, |i, j| BigInt::from(rows[i][j]))
}

pub fn abelianization(p: &Presentation) -> AbelianizationData {
    let n = p.generator_count();
    let snf = smith_normal_form(&relation_matrix(p));
    let diagonal: Vec<BigInt> = snf.invariant_factors();
    let nonzero = diagonal.len();
    let torsion = diagonal.iter().filter(|d| !d.is_one()).cloned().collect();
    let basis_map = (0..n)
        .map(|i| (nonzero..n).map(|j| snf.v.get(i, j).clone()).collect())
        .collect();
    let v_inverse = invert_unimodular(&snf.v);
    AbelianizationData {
        rank: n - nonzero,
        torsion,
        basis_map,
        generators: n,
        diagonal,
        snf,
        v_inverse,
    }
}

fn invert_unimodular(v: &IntMatrix) -> IntMatrix {
    let inv = v.to_rational().inverse().expect("unimodular matrix is invertible");
    IntMatrix::from_fn(inv.rows(), inv.cols(), |i, j| {
        let e = inv.get(i, j);
        assert!(e.is_integer(), "inverse of a unimodular matrix is integral");
        e.to_integer()
    })
}

impl AbelianizationData {
    pub fn betti1(&self) -> usize {
        self.rank
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion.is_empty()
    }

    pub fn generator_count(&self) -> usize {
        self.generators
    }

    /// Nonzero invariant factors of the relation matrix, units included.
    pub fn diagonal_factors(&self) -> &[BigInt] {
        &self.diagonal
    }

    /// Exponent sums in the Smith basis: the first `diagonal_factors().len()`
    /// coordinates are read modulo the matching factor, the rest are free.
    pub fn transformed(&self, sums: &[BigInt]) -> Vec<BigInt> {
        let n = self.generators;
        (0..n)
            .map(|j| {
                (0..n).fold(BigInt::zero(), |acc, i| {
                    if sums[i].is_zero() {
                        acc
                    } else {
                        acc + &sums[i] * self.snf.v.get(i, j)
                    }
                })
            })
            .collect()
    }

    /// Coordinates of an exponent-sum vector in the free part.
    pub fn free_coordinates(&self, sums: &[BigInt]) -> Vec<BigInt> {
        self.transformed(sums)[self.diagonal.len()..].to_vec()
    }

    pub fn word_free_coordinates(&self, w: &Word) -> Vec<BigInt> {
        self.free_coordinates(&to_big(&w.exponent_sums(self.generators)))
    }

    /// True when the exponent-sum vector is zero in the abelianization,
    /// torsion included.
    pub fn is_trivial(&self, sums: &[BigInt]) -> bool {
        let x = self.transformed(sums);
        let k = self.diagonal.len();
        x[..k].iter().zip(&self.diagonal).all(|(xi, d)| xi.is_multiple_of(d)) && x[k..].iter().all(Zero::is_zero)
    }

    pub fn word_is_trivial(&self, w: &Word) -> bool {
        self.is_trivial(&to_big(&w.exponent_sums(self.generators)))
    }

    /// Order of the image of `w` in the abelianization, `None` if infinite.
    pub fn word_order(&self, w: &Word) -> Option<BigInt> {
        let x = self.transformed(&to_big(&w.exponent_sums(self.generators)));
        let k = self.diagonal.len();
        if x[k..].iter().any(|e| !e.is_zero()) {
            return None;
        }
        Some(x[..k].iter().zip(&self.diagonal).fold(BigInt::one(), |acc, (xi, d)| {
            let ord = d / xi.gcd(d);
            acc.lcm(&ord)
        }))
    }

    /// Exponent vector (over the generators) of a word representing the
    /// `j`-th free basis element.
    pub fn free_basis_preimage(&self, j: usize) -> Vec<BigInt> {
        self.v_inverse.row(self.diagonal.len() + j).to_vec()
    }

    /// Matrix of the endomorphism `generator i ↦ images[i]` on the free part.
    /// Column `j` holds the coordinates of the image of basis element `j`.
    pub fn induced_matrix(&self, images: &[Word]) -> IntMatrix {
        let n = self.generators;
        let image_sums: Vec<Vec<BigInt>> = images.iter().map(|w| to_big(&w.exponent_sums(n))).collect();
        let mut columns = Vec::with_capacity(self.rank);
        for j in 0..self.rank {
            let pre = self.free_basis_preimage(j);
            let mut sums = vec![BigInt::zero(); n];
            for (i, c) in pre.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (s, e) in sums.iter_mut().zip(&image_sums[i]) {
                    *s += c * e;
                }
            }
            columns.push(self.free_coordinates(&sums));
        }
        IntMatrix::from_fn(self.rank, self.rank, |i, j| columns[j][i].clone())
    }

    pub fn torsion_i64(&self) -> Vec<i64> {
        self.torsion.iter().map(|t| t.to_i64().unwrap_or(i64::MAX)).collect()
    }
}

pub(crate) fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn betti1(p: &Presentation) -> usize {
    abelianization(p).rank
}

/// `P` with `extra` appended as relators.
pub fn quotient_by(p: &Presentation, extra: &[Word]) -> Result<Presentation, GroupError> {
    for w in extra {
        p.check_word(w)?;
    }
    let mut relators = p.relators().to_vec();
    relators.extend(extra.iter().cloned());
    Ok(p.with_relators(relators)?)
}

/// A candidate automorphism of order dividing `order`, given by generator images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicAction {
    pub order: u32,
    pub images: Vec<Word>,
}

impl CyclicAction {
    pub fn identity(generators: usize, order: u32) -> Self {
        CyclicAction {
            order,
            images: (0..generators).map(Word::generator).collect(),
        }
    }

    pub fn apply(&self, w: &Word) -> Word {
        w.substitute(&self.images)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ActionDiagnostics {
    pub failures: Vec<String>,
}

impl ActionDiagnostics {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Layered validation of a cyclic action: abelianized automorphism of order
/// dividing N, relator images trivial in the abelianization, and exact checks
/// on the supplied sample representations.
pub fn validate_action(pk: &Presentation, action: &CyclicAction, samples: &[&Representation]) -> ActionDiagnostics {
    let mut diag = ActionDiagnostics::default();
    let n = pk.generator_count();
    if action.order == 0 {
        diag.failures.push("order must be at least 1".into());
        return diag;
    }
    if action.images.len() != n {
        diag.failures
            .push(format!("expected {n} generator images, found {}", action.images.len()));
        return diag;
    }
    for (i, img) in action.images.iter().enumerate() {
        if let Err(e) = pk.check_word(img) {
            diag.failures.push(format!("image of generator {i}: {e}"));
        }
    }
    if !diag.is_ok() {
        return diag;
    }

    let ab = abelianization(pk);

    // (ii) relators map to zero in the abelianization
    for (k, r) in pk.relators().iter().enumerate() {
        if !ab.word_is_trivial(&action.apply(r)) {
            diag.failures.push(format!(
                "image of relator {k} ({}) is nontrivial in the abelianization",
                pk.format_word(r)
            ));
        }
    }

    // (i) abelianized map is an automorphism whose order divides N
    let free = ab.induced_matrix(&action.images);
    if let Ok(det) = free.determinant() {
        if !det.abs().is_one() {
            diag.failures.push(format!(
                "abelianized map has determinant {det} on the free part; not an automorphism"
            ));
        }
    }
    let mut iterated: Vec<Word> = (0..n).map(Word::generator).collect();
    for _ in 0..action.order {
        iterated = iterated.iter().map(|w| action.apply(w)).collect();
    }
    for (i, w) in iterated.iter().enumerate() {
        let back = w.mul(&Word::generator(i).inverse());
        if !ab.word_is_trivial(&back) {
            diag.failures.push(format!(
                "abelianized map does not have order dividing {}: generator {} is moved by the {}-th iterate",
                action.order,
                pk.generators()[i],
                action.order
            ));
        }
    }

    // (iii) sample representations: R∘γ is a representation and R∘γᴺ = R
    for (s, rep) in samples.iter().enumerate() {
        let mut current: Vec<_> = rep.matrices().to_vec();
        for step in 1..=action.order {
            let next: Vec<_> = action
                .images
                .iter()
                .map(|w| Representation::evaluate_with(&current, w))
                .collect();
            current = next;
            if step == 1 {
                if let Some(k) = pk
                    .relators()
                    .iter()
                    .position(|r| !Representation::evaluate_with(&current, r).is_identity())
                {
                    diag.failures
                        .push(format!("sample {s}: composing with the action breaks relator {k}"));
                    break;
                }
            }
        }
        if current.as_slice() != rep.matrices() {
            diag.failures.push(format!(
                "sample {s}: {}-th power of the action is not the identity on generator images",
                action.order
            ));
        }
    }
    diag
}

/// Name for an extra generator that does not clash with existing ones.
pub(crate) fn fresh_name(p: &Presentation, base: &str) -> String {
    if p.generator_index(base).is_none() {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|c| p.generator_index(c).is_none() && is_valid_name(c))
        .expect("infinitely many candidates")
}

/// `P_K ⋊ Z/N`: generators of `P_K` plus `t`, relators of `P_K`, `t^N`, and
/// `t·a·t⁻¹·γ(a)⁻¹` for each generator `a`. The new generator is last.
pub fn semidirect_cyclic(pk: &Presentation, action: &CyclicAction) -> Result<Presentation, GroupError> {
    let diag = validate_action(pk, action, &[]);
    if !diag.is_ok() {
        return Err(GroupError::InvalidAction(diag.failures.join("; ")));
    }
    let n = pk.generator_count();
    let mut names = pk.generators().to_vec();
    names.push(fresh_name(pk, "t"));
    let t = Word::generator(n);
    let mut relators = pk.relators().to_vec();
    relators.push(Word::power_of(n, i64::from(action.order)));
    for (a, img) in action.images.iter().enumerate() {
        relators.push(Word::generator(a).conjugate_by(&t).mul(&img.inverse()));
    }
    Ok(Presentation::new(names, relators)?)
}

/// `max Σ d(Nᵢ)` over partitions `N₁ + … + N_r = N`; missing ranks count as 0.
pub fn combine_dimensions(d: &BTreeMap<u32, u64>, n: u32) -> u64 {
    let n = n as usize;
    let mut best = vec![0u64; n + 1];
    for k in 1..=n {
        best[k] = (1..=k)
            .map(|m| best[k - m] + d.get(&(m as u32)).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
    }
    best[n]
}
