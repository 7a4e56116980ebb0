//! Rational matrix representations of finitely presented groups: rank-one
//! characters, restriction and induction along finite-index kernels, the
//! Burnside irreducibility test, and semisimple equivalence.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::fpgroup::{abelianization, AbelianizationData};
use crate::linalg::{IntMatrix, ModMatrix, ModSpan, RatMatrix, Rational, Span};
use crate::subgroup::SubgroupData;
use crate::word::{Presentation, Word};

#[derive(Debug, Error)]
pub enum RepError {
    #[error("expected {expected} matrices, found {found}")]
    MatrixCount { expected: usize, found: usize },
    #[error("matrix for generator {generator} is {rows}x{cols}, expected {dim}x{dim}")]
    Shape {
        generator: usize,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("matrix for generator {0} is singular")]
    Singular(usize),
    #[error("relator {index} ({relator}) does not evaluate to the identity")]
    RelatorFails { index: usize, relator: String },
    #[error("the abelianization has torsion {0:?}; a character on the free part must be requested explicitly")]
    TorsionObstruction(Vec<i64>),
    #[error("character values must be nonzero and one per free coordinate ({expected})")]
    BadCharacter { expected: usize },
    #[error("representations are over different groups")]
    GroupMismatch,
    #[error("exponent {0} does not fit in 32 bits")]
    ExponentOverflow(BigInt),
}

#[derive(Clone, Debug)]
pub struct Representation {
    group: Presentation,
    dim: usize,
    matrices: Vec<RatMatrix>,
    inverses: Vec<RatMatrix>,
}

impl PartialEq for Representation {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.dim == other.dim && self.matrices == other.matrices
    }
}

impl Representation {
    /// Assigns invertible matrices to the generators without checking relators.
    pub fn assign(group: Presentation, matrices: Vec<RatMatrix>) -> Result<Self, RepError> {
        let n = group.generator_count();
        if matrices.len() != n {
            return Err(RepError::MatrixCount {
                expected: n,
                found: matrices.len(),
            });
        }
        let dim = matrices.first().map_or(0, RatMatrix::rows);
        let mut inverses = Vec::with_capacity(n);
        for (g, m) in matrices.iter().enumerate() {
            if m.rows() != dim || m.cols() != dim {
                return Err(RepError::Shape {
                    generator: g,
                    rows: m.rows(),
                    cols: m.cols(),
                    dim,
                });
            }
            inverses.push(m.inverse().map_err(|_| RepError::Singular(g))?);
        }
        Ok(Representation {
            group,
            dim,
            matrices,
            inverses,
        })
    }

    /// Assigns matrices and checks every relator exactly.
    pub fn new(group: Presentation, matrices: Vec<RatMatrix>) -> Result<Self, RepError> {
        let rep = Representation::assign(group, matrices)?;
        rep.validate()?;
        Ok(rep)
    }

    pub fn trivial(group: Presentation, dim: usize) -> Self {
        let n = group.generator_count();
        Representation {
            group,
            dim,
            matrices: vec![RatMatrix::identity(dim); n],
            inverses: vec![RatMatrix::identity(dim); n],
        }
    }

    /// Reports the first relator that fails.
    pub fn validate(&self) -> Result<(), RepError> {
        for (index, r) in self.group.relators().iter().enumerate() {
            if !self.evaluate(r).is_identity() {
                return Err(RepError::RelatorFails {
                    index,
                    relator: self.group.format_word(r),
                });
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Presentation {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrices(&self) -> &[RatMatrix] {
        &self.matrices
    }

    pub fn evaluate(&self, w: &Word) -> RatMatrix {
        let mut out = RatMatrix::identity(self.dim);
        for l in w.letters() {
            let base = if l.exponent > 0 {
                &self.matrices[l.generator]
            } else {
                &self.inverses[l.generator]
            };
            out = out.mul(&power(base, l.exponent.unsigned_abs()));
        }
        out
    }

    /// Evaluates `w` on arbitrary invertible generator images.
    pub fn evaluate_with(matrices: &[RatMatrix], w: &Word) -> RatMatrix {
        let dim = matrices.first().map_or(0, RatMatrix::rows);
        let mut out = RatMatrix::identity(dim);
        for l in w.letters() {
            let m = &matrices[l.generator];
            let p = if l.exponent > 0 {
                power(m, l.exponent.unsigned_abs())
            } else {
                power(
                    &m.inverse().expect("generator image must be invertible"),
                    l.exponent.unsigned_abs(),
                )
            };
            out = out.mul(&p);
        }
        out
    }

    pub fn trace(&self, w: &Word) -> Rational {
        self.evaluate(w).trace()
    }

    /// `P⁻¹ R(g) P` for every generator.
    pub fn conjugate(&self, p: &RatMatrix) -> Result<Self, RepError> {
        let inv = p.inverse().map_err(|_| RepError::Singular(0))?;
        let mats = self.matrices.iter().map(|m| inv.mul(m).mul(p)).collect();
        Representation::assign(self.group.clone(), mats)
    }

    pub fn direct_sum(&self, other: &Representation) -> Result<Self, RepError> {
        if self.group != other.group {
            return Err(RepError::GroupMismatch);
        }
        let mats = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        Representation::assign(self.group.clone(), mats)
    }
}

fn power(m: &RatMatrix, mut k: u64) -> RatMatrix {
    if k == 1 {
        return m.clone();
    }
    let mut base = m.clone();
    let mut out = RatMatrix::identity(m.rows());
    while k > 0 {
        if k & 1 == 1 {
            out = out.mul(&base);
        }
        k >>= 1;
        if k > 0 {
            base = base.mul(&base);
        }
    }
    out
}

/// The group a character lives on, with its abelianization.
#[derive(Debug)]
pub struct CharacterBase {
    pub group: Presentation,
    pub abelianization: AbelianizationData,
}

impl CharacterBase {
    pub fn new(group: Presentation) -> Arc<Self> {
        let abelianization = abelianization(&group);
        Arc::new(CharacterBase { group, abelianization })
    }
}

/// A rank-one character, given by its values on the free basis of `H₁`.
#[derive(Clone, Debug)]
pub struct CharacterVector {
    pub base: Arc<CharacterBase>,
    pub values: Vec<Rational>,
    free_part_only: bool,
}

impl PartialEq for CharacterVector {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.base, &other.base) && self.values == other.values
    }
}

impl CharacterVector {
    pub fn new(base: Arc<CharacterBase>, values: Vec<Rational>) -> Result<Self, RepError> {
        let expected = base.abelianization.rank;
        if values.len() != expected || values.iter().any(Zero::is_zero) {
            return Err(RepError::BadCharacter { expected });
        }
        Ok(CharacterVector {
            base,
            values,
            free_part_only: false,
        })
    }

    /// A character that is trivial on the torsion of `H₁` by request.
    pub fn on_free_part(base: Arc<CharacterBase>, values: Vec<Rational>) -> Result<Self, RepError> {
        let mut chi = CharacterVector::new(base, values)?;
        chi.free_part_only = true;
        Ok(chi)
    }

    fn value_on(&self, coords: &[BigInt]) -> Result<Rational, RepError> {
        let mut out = Rational::one();
        for (v, c) in self.values.iter().zip(coords) {
            let e = c.to_i32().ok_or_else(|| RepError::ExponentOverflow(c.clone()))?;
            out *= v.pow(e);
        }
        Ok(out)
    }

    /// Value on an element given by its exponent sums over the generators.
    pub fn value_of_sums(&self, sums: &[i64]) -> Result<Rational, RepError> {
        let big: Vec<BigInt> = sums.iter().map(|&x| BigInt::from(x)).collect();
        self.value_on(&self.base.abelianization.free_coordinates(&big))
    }

    pub fn value(&self, w: &Word) -> Result<Rational, RepError> {
        self.value_on(&self.base.abelianization.word_free_coordinates(w))
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(One::is_one)
    }
}

/// The one-dimensional representation of a character.
pub fn character_rep(chi: &CharacterVector) -> Result<Representation, RepError> {
    let ab = &chi.base.abelianization;
    if !ab.is_torsion_free() && !chi.free_part_only {
        return Err(RepError::TorsionObstruction(ab.torsion_i64()));
    }
    let mats = ab
        .basis_map
        .iter()
        .map(|coords| Ok(RatMatrix::scalar(1, chi.value_on(coords)?)))
        .collect::<Result<Vec<_>, RepError>>()?;
    Representation::new(chi.base.group.clone(), mats)
}

/// `χ ∘ γ` where `A` is the matrix of `γ` on the free part of `H₁`
/// (column `j` is the image of basis element `j`).
pub fn twist_by_action(chi: &CharacterVector, a: &IntMatrix) -> Result<CharacterVector, RepError> {
    let values = (0..a.cols())
        .map(|j| {
            let column: Vec<BigInt> = (0..a.rows()).map(|k| a.get(k, j).clone()).collect();
            chi.value_on(&column)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CharacterVector {
        base: chi.base.clone(),
        values,
        free_part_only: chi.free_part_only,
    })
}

/// The orbit `χ, χ∘γ, …, χ∘γ^{N−1}`.
pub fn character_orbit(chi: &CharacterVector, a: &IntMatrix, n: u32) -> Result<Vec<CharacterVector>, RepError> {
    let mut orbit = vec![chi.clone()];
    for _ in 1..n {
        let next = twist_by_action(orbit.last().expect("nonempty"), a)?;
        orbit.push(next);
    }
    Ok(orbit)
}

/// True when the `N` characters of the orbit are pairwise distinct.
pub fn orbit_distinct(chi: &CharacterVector, a: &IntMatrix, n: u32) -> Result<bool, RepError> {
    let orbit = character_orbit(chi, a, n)?;
    Ok((0..orbit.len()).all(|i| (i + 1..orbit.len()).all(|j| orbit[i].values != orbit[j].values)))
}

pub fn restrict(s: &SubgroupData, r: &Representation) -> Result<Representation, RepError> {
    if r.group != s.ambient {
        return Err(RepError::GroupMismatch);
    }
    let mats = s.schreier_gens.iter().map(|g| r.evaluate(&g.word)).collect();
    Representation::new(s.kernel_presentation.clone(), mats)
}

/// Induction along the transversal: generator `x` acts by the block matrix
/// with block `W(s_{i,x})` in position `(i, i·x)`.
pub fn induce(s: &SubgroupData, w: &Representation) -> Result<Representation, RepError> {
    if w.group != s.kernel_presentation {
        return Err(RepError::GroupMismatch);
    }
    let m = w.dim;
    let r = s.index();
    let identity = RatMatrix::identity(m);
    let mats = (0..s.ambient.generator_count())
        .map(|x| {
            let mut big = RatMatrix::zeros(r * m, r * m);
            for i in 0..r {
                let j = s.step(i, x, 1);
                let block = s.schreier_index(i, x).map_or(&identity, |k| &w.matrices[k]);
                for a in 0..m {
                    for b in 0..m {
                        big.set(i * m + a, j * m + b, block.get(a, b).clone());
                    }
                }
            }
            big
        })
        .collect();
    Representation::new(s.ambient.clone(), mats)
}

/// Trace of `Ind(W)(g)` from the coset formula: the sum of `tr W(t_i g t_i⁻¹)`
/// over cosets fixed by `g`.
pub fn induced_trace(s: &SubgroupData, w: &Representation, g: &Word) -> Rational {
    let mut total = Rational::zero();
    for i in 0..s.index() {
        if s.coset_after(i, g) != i {
            continue;
        }
        let k = s
            .rewrite(&g.conjugate_by(&s.transversal[i]))
            .expect("conjugate of a coset-fixing element lies in the kernel");
        total += w.trace(&k);
    }
    total
}

/// Spanning words of the algebra generated by one or more representations of
/// the same group.
#[derive(Clone, Debug)]
pub struct AlgebraBasis {
    pub words: Vec<Word>,
    pub dim: usize,
}

/// Closure of the identity under right multiplication by generator images,
/// one image per representation. `insert` adds flattened images to a span and
/// reports whether they were new; `keep_going` may stop the search at a new
/// element. Returns the new words and whether the search ran to completion.
fn closure<M>(
    generators: &[Vec<M>],
    identity: Vec<M>,
    cap: usize,
    mul: impl Fn(&M, &M) -> M,
    mut insert: impl FnMut(&[M]) -> bool,
    mut keep_going: impl FnMut(&[M]) -> bool,
) -> (Vec<Word>, bool) {
    if cap == 0 {
        return (Vec::new(), true);
    }
    insert(&identity);
    let mut words = vec![Word::identity()];
    if !keep_going(&identity) {
        return (words, false);
    }
    let mut images = vec![identity];
    let mut next = 0;
    while next < words.len() && words.len() < cap {
        for (x, gen) in generators.iter().enumerate() {
            let prod: Vec<M> = images[next].iter().zip(gen).map(|(m, g)| mul(m, g)).collect();
            if insert(&prod) {
                words.push(words[next].mul(&Word::generator(x)));
                if !keep_going(&prod) {
                    return (words, false);
                }
                images.push(prod);
                if words.len() >= cap {
                    break;
                }
            }
        }
        next += 1;
    }
    (words, true)
}

fn exact_generators(reps: &[&Representation]) -> (Vec<Vec<RatMatrix>>, Vec<RatMatrix>) {
    let gens = reps.first().map_or(0, |r| r.group.generator_count());
    let generators = (0..gens)
        .map(|x| reps.iter().map(|r| r.matrices[x].clone()).collect())
        .collect();
    (generators, reps.iter().map(|r| RatMatrix::identity(r.dim)).collect())
}

/// Generator images modulo [`PRIME`](crate::linalg::PRIME), unless a denominator vanishes there.
fn modular_generators(reps: &[&Representation]) -> Option<(Vec<Vec<ModMatrix>>, Vec<ModMatrix>)> {
    let gens = reps.first().map_or(0, |r| r.group.generator_count());
    let generators = (0..gens)
        .map(|x| reps.iter().map(|r| ModMatrix::reduce(&r.matrices[x])).collect())
        .collect::<Option<Vec<Vec<_>>>>()?;
    Some((generators, reps.iter().map(|r| ModMatrix::identity(r.dim)).collect()))
}

fn flatten_exact(mats: &[RatMatrix]) -> Vec<Rational> {
    mats.iter().flat_map(|m| m.entries().iter().cloned()).collect()
}

fn flatten_mod(mats: &[ModMatrix]) -> Vec<u64> {
    mats.iter().flat_map(|m| m.entries().iter().copied()).collect()
}

/// Exact spanning words of the unital algebra generated by the images; it
/// already contains their inverses. Stops early once `cap` is reached.
pub fn algebra_closure(reps: &[&Representation], cap: Option<usize>) -> AlgebraBasis {
    let total: usize = reps.iter().map(|r| r.dim * r.dim).sum();
    let cap = cap.unwrap_or(total).min(total);
    let (generators, identity) = exact_generators(reps);
    let mut span = Span::new(total);
    let (words, _) = closure(
        &generators,
        identity,
        cap,
        RatMatrix::mul,
        |m| span.insert(&flatten_exact(m)),
        |_| true,
    );
    AlgebraBasis {
        dim: words.len(),
        words,
    }
}

/// Burnside: `R` is absolutely irreducible iff its images span all `N×N`
/// matrices. A full span modulo [`PRIME`](crate::linalg::PRIME) already certifies this; otherwise
/// the span is computed exactly.
pub fn burnside(r: &Representation) -> (bool, AlgebraBasis) {
    let full = r.dim * r.dim;
    if let Some((generators, identity)) = modular_generators(&[r]) {
        let mut span = ModSpan::new(full);
        let (words, _) = closure(
            &generators,
            identity,
            full,
            ModMatrix::mul,
            |m| span.insert(m[0].entries()),
            |_| true,
        );
        if words.len() == full {
            return (true, AlgebraBasis { dim: full, words });
        }
    }
    let basis = algebra_closure(&[r], None);
    (basis.dim == full, basis)
}

/// Equivalence of semisimple representations: traces agree on a spanning set
/// of the algebra generated by `R₁ ⊕ R₂`, hence on the whole group algebra.
/// A trace difference modulo [`PRIME`](crate::linalg::PRIME) is a difference over `Q`, so the
/// modular search can only shortcut a negative answer.
pub fn equivalent_semisimple(r1: &Representation, r2: &Representation) -> Result<bool, RepError> {
    if r1.group != r2.group {
        return Err(RepError::GroupMismatch);
    }
    if r1.dim != r2.dim {
        return Ok(false);
    }
    let gens = r1.group.generator_count();
    if (0..gens).any(|x| r1.matrices[x].trace() != r2.matrices[x].trace()) {
        return Ok(false);
    }
    let total = 2 * r1.dim * r1.dim;
    if let Some((generators, identity)) = modular_generators(&[r1, r2]) {
        let mut span = ModSpan::new(total);
        let (_, same) = closure(
            &generators,
            identity,
            total,
            ModMatrix::mul,
            |m| span.insert(&flatten_mod(m)),
            |m| m[0].trace() == m[1].trace(),
        );
        if !same {
            return Ok(false);
        }
    }
    let (generators, identity) = exact_generators(&[r1, r2]);
    let mut span = Span::new(total);
    let (_, same) = closure(
        &generators,
        identity,
        total,
        RatMatrix::mul,
        |m| span.insert(&flatten_exact(m)),
        |m| m[0].trace() == m[1].trace(),
    );
    Ok(same)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PicardLefschetzCheck {
    /// `R(γ)² = I` for each word of the first kind.
    pub squares_trivial: Vec<bool>,
    /// `R(γ) = I` for each word of the second kind.
    pub trivial: Vec<bool>,
}

impl PicardLefschetzCheck {
    pub fn holds(&self) -> bool {
        self.squares_trivial.iter().chain(&self.trivial).all(|&b| b)
    }
}

pub fn picard_lefschetz_check(r: &Representation, gamma1: &[Word], gamma2: &[Word]) -> PicardLefschetzCheck {
    PicardLefschetzCheck {
        squares_trivial: gamma1
            .iter()
            .map(|g| {
                let m = r.evaluate(g);
                m.mul(&m).is_identity()
            })
            .collect(),
        trivial: gamma2.iter().map(|g| r.evaluate(g).is_identity()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rat_int};
    use crate::parse::parse_presentation;
    use crate::subgroup::{kernel_subgroup, FiniteHom, FiniteTarget};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unipotent_pair() -> (Presentation, Representation) {
        let f2 = Presentation::free(["a", "b"]).unwrap();
        let rep = Representation::new(
            f2.clone(),
            vec![
                RatMatrix::from_i64_rows(&[vec![1, 1], vec![0, 1]]),
                RatMatrix::from_i64_rows(&[vec![1, 0], vec![1, 1]]),
            ],
        )
        .unwrap();
        (f2, rep)
    }

    fn random_word(rng: &mut ChaCha8Rng, gens: usize, len: usize) -> Word {
        Word::reduce((0..len).map(|_| (rng.gen_range(0..gens), if rng.gen_bool(0.5) { 1 } else { -1 })))
    }

    #[test]
    fn relator_failure_is_reported() {
        let p = parse_presentation("gens: a, b\nrels: [a,b]").unwrap();
        let (_, free_rep) = unipotent_pair();
        let err = Representation::new(p.clone(), free_rep.matrices().to_vec()).unwrap_err();
        assert!(matches!(err, RepError::RelatorFails { index: 0, .. }));
        assert!(Representation::trivial(p, 3).validate().is_ok());
    }

    #[test]
    fn singular_and_misshapen_matrices_are_rejected() {
        let z = Presentation::free(["a"]).unwrap();
        assert!(matches!(
            Representation::assign(z.clone(), vec![RatMatrix::zeros(2, 2)]),
            Err(RepError::Singular(0))
        ));
        assert!(matches!(
            Representation::assign(z, vec![]),
            Err(RepError::MatrixCount { .. })
        ));
    }

    #[test]
    fn evaluation_is_multiplicative() {
        let (_, rep) = unipotent_pair();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let u = random_word(&mut rng, 2, 8);
            let v = random_word(&mut rng, 2, 8);
            assert_eq!(rep.evaluate(&u.mul(&v)), rep.evaluate(&u).mul(&rep.evaluate(&v)));
            assert_eq!(Representation::evaluate_with(rep.matrices(), &u), rep.evaluate(&u));
        }
    }

    #[test]
    fn characters_on_z2() {
        let base = CharacterBase::new(parse_presentation("gens: a, b\nrels: [a,b]").unwrap());
        let chi = CharacterVector::new(base.clone(), vec![rat_int(2), rat(1, 3)]).unwrap();
        let rep = character_rep(&chi).unwrap();
        let w = Word::reduce([(0, 3), (1, -1), (0, -1)]);
        // value is the product of the generator values raised to exponent sums
        let expected = rat_int(2).pow(2) * rat(1, 3).pow(-1);
        assert_eq!(rep.evaluate(&w).get(0, 0), &expected);
        assert_eq!(chi.value(&w).unwrap(), expected);
        assert!(CharacterVector::new(base, vec![rat_int(0), rat_int(1)]).is_err());
    }

    #[test]
    fn torsion_needs_opt_in() {
        let base = CharacterBase::new(parse_presentation("gens: a, b\nrels: a^2").unwrap());
        let chi = CharacterVector::new(base.clone(), vec![rat_int(5)]).unwrap();
        assert!(matches!(character_rep(&chi), Err(RepError::TorsionObstruction(v)) if v == vec![2]));
        let chi = CharacterVector::on_free_part(base, vec![rat_int(5)]).unwrap();
        let rep = character_rep(&chi).unwrap();
        assert!(rep.matrices()[0].is_identity());
        assert_eq!(rep.matrices()[1].get(0, 0), &rat_int(5));
    }

    #[test]
    fn inversion_twist_and_orbits() {
        let base = CharacterBase::new(parse_presentation("gens: a, b\nrels: [a,b]").unwrap());
        let minus = IntMatrix::from_i64_rows(&[vec![-1, 0], vec![0, -1]]);
        let chi = CharacterVector::new(base.clone(), vec![rat_int(2), rat_int(3)]).unwrap();
        let twisted = twist_by_action(&chi, &minus).unwrap();
        assert_eq!(twisted.values, vec![rat(1, 2), rat(1, 3)]);
        assert!(orbit_distinct(&chi, &minus, 2).unwrap());
        let fixed = CharacterVector::new(base, vec![rat_int(-1), rat_int(1)]).unwrap();
        assert!(!orbit_distinct(&fixed, &minus, 2).unwrap());
    }

    #[test]
    fn burnside_examples() {
        let (f2, rep) = unipotent_pair();
        let (irr, basis) = burnside(&rep);
        assert!(irr);
        assert_eq!(basis.dim, 4);
        let diag = Representation::new(
            f2,
            vec![
                RatMatrix::diagonal(&[rat_int(2), rat_int(3)]),
                RatMatrix::diagonal(&[rat_int(5), rat_int(7)]),
            ],
        )
        .unwrap();
        let (irr, basis) = burnside(&diag);
        assert!(!irr);
        assert_eq!(basis.dim, 2);
        assert_eq!(basis.words, vec![Word::identity(), Word::generator(0)]);
    }

    #[test]
    fn conjugate_representations_are_equivalent() {
        let (_, rep) = unipotent_pair();
        let p = RatMatrix::from_i64_rows(&[vec![2, 1], vec![1, 1]]);
        let conj = rep.conjugate(&p).unwrap();
        assert!(equivalent_semisimple(&rep, &conj).unwrap());
        let other = Representation::new(
            rep.group().clone(),
            vec![
                RatMatrix::from_i64_rows(&[vec![1, 2], vec![0, 1]]),
                RatMatrix::from_i64_rows(&[vec![1, 0], vec![1, 1]]),
            ],
        )
        .unwrap();
        assert!(!equivalent_semisimple(&rep, &other).unwrap());
    }

    #[test]
    fn same_traces_on_generators_is_not_enough() {
        // diag(2,3) ⊕ diag(5,7) against diag(2,3) ⊕ diag(7,5): generator
        // traces agree, the product traces do not
        let f2 = Presentation::free(["a", "b"]).unwrap();
        let r1 = Representation::new(
            f2.clone(),
            vec![
                RatMatrix::diagonal(&[rat_int(2), rat_int(3)]),
                RatMatrix::diagonal(&[rat_int(5), rat_int(7)]),
            ],
        )
        .unwrap();
        let r2 = Representation::new(
            f2,
            vec![
                RatMatrix::diagonal(&[rat_int(2), rat_int(3)]),
                RatMatrix::diagonal(&[rat_int(7), rat_int(5)]),
            ],
        )
        .unwrap();
        assert!(!equivalent_semisimple(&r1, &r2).unwrap());
    }

    fn z_mod(n: usize) -> SubgroupData {
        let z = Presentation::free(["x"]).unwrap();
        let hom = FiniteHom::new(&z, FiniteTarget::cyclic(n), vec![1]).unwrap();
        kernel_subgroup(&z, &hom).unwrap()
    }

    #[test]
    fn induce_from_even_integers() {
        let s = z_mod(2);
        let w = Representation::new(s.kernel_presentation.clone(), vec![RatMatrix::scalar(1, rat_int(5))]).unwrap();
        let ind = induce(&s, &w).unwrap();
        assert_eq!(ind.matrices()[0], RatMatrix::from_i64_rows(&[vec![0, 1], vec![5, 0]]));
        let back = restrict(&s, &ind).unwrap();
        assert_eq!(back.matrices()[0], RatMatrix::scalar(2, rat_int(5)));
    }

    #[test]
    fn induced_trace_matches_coset_formula() {
        let f2 = Presentation::free(["a", "b"]).unwrap();
        let s3 = FiniteTarget::symmetric(3);
        let hom = FiniteHom::new(&f2, s3, vec![1, 2]).unwrap();
        let s = kernel_subgroup(&f2, &hom).unwrap();
        let k = s.kernel_presentation.generator_count();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mats = (0..k)
            .map(|_| RatMatrix::scalar(1, rat(rng.gen_range(1..5), rng.gen_range(1..5))))
            .collect();
        let w = Representation::new(s.kernel_presentation.clone(), mats).unwrap();
        let ind = induce(&s, &w).unwrap();
        assert_eq!(ind.dim(), 6);
        for _ in 0..30 {
            let g = random_word(&mut rng, 2, 10);
            assert_eq!(ind.trace(&g), induced_trace(&s, &w, &g));
        }
    }

    #[test]
    fn induction_in_stages() {
        // Ind_{4Z}^{Z} χ ≅ Ind_{2Z}^{Z} Ind_{4Z}^{2Z} χ
        let direct = z_mod(4);
        let chi = Representation::new(
            direct.kernel_presentation.clone(),
            vec![RatMatrix::scalar(1, rat_int(3))],
        )
        .unwrap();
        let one_step = induce(&direct, &chi).unwrap();

        let outer = z_mod(2);
        let inner_hom = FiniteHom::new(&outer.kernel_presentation, FiniteTarget::cyclic(2), vec![1]).unwrap();
        let inner = kernel_subgroup(&outer.kernel_presentation, &inner_hom).unwrap();
        let chi2 = Representation::new(
            inner.kernel_presentation.clone(),
            vec![RatMatrix::scalar(1, rat_int(3))],
        )
        .unwrap();
        let two_step = induce(&outer, &induce(&inner, &chi2).unwrap()).unwrap();
        assert!(equivalent_semisimple(&one_step, &two_step).unwrap());
    }

    #[test]
    fn picard_lefschetz_predicates() {
        let p = parse_presentation("gens: a, b\nrels: a^2").unwrap();
        let rep = Representation::new(
            p,
            vec![RatMatrix::scalar(1, rat_int(-1)), RatMatrix::scalar(1, rat_int(2))],
        )
        .unwrap();
        let check = picard_lefschetz_check(&rep, &[Word::generator(0)], &[Word::power_of(1, 0)]);
        assert!(check.holds());
        let check = picard_lefschetz_check(&rep, &[Word::generator(1)], &[Word::generator(0)]);
        assert_eq!(check.squares_trivial, vec![false]);
        assert_eq!(check.trivial, vec![false]);
        assert!(!check.holds());
    }
}
