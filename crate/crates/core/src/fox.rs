//! Fox free differential calculus and `H¹(Γ, V)` for a finite-dimensional
//! rational module `V`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{rank_and_kernel, RatMatrix, Rational};
use crate::rep::{burnside, RepError, Representation};
use crate::word::{Presentation, Word};

#[derive(Debug, Error)]
pub enum FoxError {
    #[error("module does not respect the relators: {0}")]
    InvalidAction(#[from] RepError),
    #[error("module is over a different presentation")]
    GroupMismatch,
    #[error("representation is not absolutely irreducible (algebra dimension {algebra} < {full})")]
    NotIrreducible { algebra: usize, full: usize },
}

/// Finite `Q`-linear combination of group words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<Word, Rational>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        GroupRingElement::default()
    }

    pub fn one() -> Self {
        GroupRingElement::from_word(Word::identity())
    }

    pub fn from_word(w: Word) -> Self {
        GroupRingElement::from_terms([(w, Rational::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, Rational)>) -> Self {
        let mut out = GroupRingElement::zero();
        for (w, c) in terms {
            out.add_term(w, c);
        }
        out
    }

    fn add_term(&mut self, w: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &GroupRingElement) -> GroupRingElement {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> GroupRingElement {
        GroupRingElement {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &GroupRingElement) -> GroupRingElement {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &GroupRingElement) -> GroupRingElement {
        let mut out = GroupRingElement::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.add_term(u.mul(v), a * b);
            }
        }
        out
    }

    /// `w · self`
    pub fn left_mul_word(&self, w: &Word) -> GroupRingElement {
        GroupRingElement::from_terms(self.terms.iter().map(|(u, c)| (w.mul(u), c.clone())))
    }

    /// Image in a module: `Σ c · act(w)`.
    pub fn evaluate(&self, act: &Representation) -> RatMatrix {
        let mut out = RatMatrix::zeros(act.dim(), act.dim());
        for (w, c) in &self.terms {
            out = out.add(&act.evaluate(w).scale(c));
        }
        out
    }
}

/// `∂w/∂x`, using `∂(uv) = ∂u + u·∂v` and `∂(x⁻¹) = −x⁻¹`.
pub fn fox_derivative(w: &Word, x: usize) -> GroupRingElement {
    let mut out = GroupRingElement::zero();
    let mut prefix = Word::identity();
    for (g, sign) in w.unit_letters() {
        let letter = Word::power_of(g, sign);
        if sign > 0 {
            if g == x {
                out.add_term(prefix.clone(), Rational::one());
            }
            prefix = prefix.mul(&letter);
        } else {
            prefix = prefix.mul(&letter);
            if g == x {
                out.add_term(prefix.clone(), -Rational::one());
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct H1Report {
    #[serde(rename = "dimZ1")]
    pub dim_z1: usize,
    #[serde(rename = "dimB1")]
    pub dim_b1: usize,
    #[serde(rename = "dimH1")]
    pub dim_h1: usize,
    pub module_dim: usize,
    pub is_even: bool,
    #[serde(skip)]
    pub at: String,
}

/// Module images of all Fox derivatives: block `(r, i)` is `act(∂r/∂xᵢ)`.
/// Computed in a single pass per relator by tracking the prefix image.
pub fn fox_jacobian(p: &Presentation, act: &Representation) -> RatMatrix {
    let n = p.generator_count();
    let m = act.dim();
    let inverses: Vec<RatMatrix> = act
        .matrices()
        .iter()
        .map(|a| a.inverse().expect("module images are invertible"))
        .collect();
    let blocks: Vec<Vec<RatMatrix>> = p
        .relators()
        .par_iter()
        .map(|r| {
            let mut row = vec![RatMatrix::zeros(m, m); n];
            let mut prefix = RatMatrix::identity(m);
            for (g, sign) in r.unit_letters() {
                if sign > 0 {
                    row[g] = row[g].add(&prefix);
                    prefix = prefix.mul(&act.matrices()[g]);
                } else {
                    prefix = prefix.mul(&inverses[g]);
                    row[g] = row[g].sub(&prefix);
                }
            }
            row
        })
        .collect();
    let mut jac = RatMatrix::zeros(blocks.len() * m, n * m);
    for (r, row) in blocks.iter().enumerate() {
        for (i, block) in row.iter().enumerate() {
            for a in 0..m {
                for b in 0..m {
                    let v = block.get(a, b);
                    if !v.is_zero() {
                        jac.set(r * m + a, i * m + b, v.clone());
                    }
                }
            }
        }
    }
    jac
}

/// Coboundary of `v`: the cochain `(act(xᵢ)v − v)ᵢ`.
pub fn coboundary(act: &Representation, v: &[Rational]) -> Vec<Rational> {
    act.matrices()
        .iter()
        .flat_map(|a| a.mul_vec(v).into_iter().zip(v).map(|(x, y)| x - y).collect::<Vec<_>>())
        .collect()
}

/// `dim H¹(Γ, V) = (n·m − rank J) − (m − dim V^Γ)`.
pub fn h1_dimension(p: &Presentation, act: &Representation) -> Result<H1Report, FoxError> {
    if act.group() != p {
        return Err(FoxError::GroupMismatch);
    }
    act.validate()?;
    let n = p.generator_count();
    let m = act.dim();
    let jac = fox_jacobian(p, act);
    let dim_z1 = n * m - jac.rank();

    // invariants: common kernel of act(x) − I
    let mut stacked = RatMatrix::zeros(n * m, m);
    for (i, a) in act.matrices().iter().enumerate() {
        let d = a.sub(&RatMatrix::identity(m));
        for r in 0..m {
            for c in 0..m {
                stacked.set(i * m + r, c, d.get(r, c).clone());
            }
        }
    }
    let invariants = if n == 0 { m } else { rank_and_kernel(&stacked).1.len() };
    let dim_b1 = m - invariants;
    let dim_h1 = dim_z1 - dim_b1;
    Ok(H1Report {
        dim_z1,
        dim_b1,
        dim_h1,
        module_dim: m,
        is_even: dim_h1.is_multiple_of(2),
        at: format!("{m}-dimensional module"),
    })
}

/// The conjugation module `M ↦ R·M·R⁻¹` on all `N×N` matrices, in row-major
/// coordinates: `Ad(g) = R(g) ⊗ R(g)⁻ᵀ`.
pub fn adjoint(r: &Representation) -> Representation {
    let mats = r
        .matrices()
        .iter()
        .map(|a| a.kron(&a.inverse().expect("invertible").transpose()))
        .collect();
    Representation::assign(r.group().clone(), mats).expect("adjoint of a representation is invertible")
}

/// Tangent dimension of the character variety at an absolutely irreducible
/// representation: the local dimension at this sample, a lower-bound witness
/// only.
pub fn local_charvar_dim(r: &Representation) -> Result<H1Report, FoxError> {
    let (irreducible, basis) = burnside(r);
    if !irreducible {
        return Err(FoxError::NotIrreducible {
            algebra: basis.dim,
            full: r.dim() * r.dim(),
        });
    }
    let mut report = h1_dimension(r.group(), &adjoint(r))?;
    report.at = format!("local dimension at a {}-dimensional sample", r.dim());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, rat_int};
    use crate::parse::parse_presentation;
    use proptest::prelude::*;

    fn x() -> Word {
        Word::generator(0)
    }

    fn y() -> Word {
        Word::generator(1)
    }

    #[test]
    fn axioms() {
        assert_eq!(fox_derivative(&x(), 0), GroupRingElement::one());
        assert!(fox_derivative(&y(), 0).is_zero());
        assert_eq!(
            fox_derivative(&x().inverse(), 0),
            GroupRingElement::from_word(x().inverse()).neg()
        );
        assert_eq!(fox_derivative(&x().mul(&y()), 1), GroupRingElement::from_word(x()));
    }

    #[test]
    fn commutator_derivative() {
        // ∂[x,y]/∂x = 1 − x y x⁻¹
        let c = Word::reduce([(0, 1), (1, 1), (0, -1), (1, -1)]);
        let expected =
            GroupRingElement::one().sub(&GroupRingElement::from_word(Word::reduce([(0, 1), (1, 1), (0, -1)])));
        assert_eq!(fox_derivative(&c, 0), expected);
    }

    #[test]
    fn power_derivative() {
        // ∂x³/∂x = 1 + x + x²
        let expected = GroupRingElement::from_terms((0..3).map(|k| (Word::power_of(0, k), rat_int(1))));
        assert_eq!(fox_derivative(&Word::power_of(0, 3), 0), expected);
    }

    #[test]
    fn trivial_module_on_z2() {
        let p = parse_presentation("gens: a, b\nrels: [a,b]").unwrap();
        let report = h1_dimension(&p, &Representation::trivial(p.clone(), 1)).unwrap();
        assert_eq!((report.dim_z1, report.dim_b1, report.dim_h1), (2, 0, 2));
    }

    #[test]
    fn trivial_module_detects_torsion_free_rank() {
        let p = parse_presentation("gens: a, b\nrels: a^2, b^3").unwrap();
        assert_eq!(
            h1_dimension(&p, &Representation::trivial(p.clone(), 1)).unwrap().dim_h1,
            0
        );
    }

    #[test]
    fn free_group_adjoint() {
        let f2 = Presentation::free(["a", "b"]).unwrap();
        let r = Representation::new(
            f2,
            vec![
                RatMatrix::from_i64_rows(&[vec![1, 1], vec![0, 1]]),
                RatMatrix::from_i64_rows(&[vec![1, 0], vec![1, 1]]),
            ],
        )
        .unwrap();
        let report = local_charvar_dim(&r).unwrap();
        assert_eq!(report.dim_h1, 5);
        assert!(!report.is_even);
    }

    #[test]
    fn reducible_point_is_refused() {
        let f2 = Presentation::free(["a", "b"]).unwrap();
        let r = Representation::new(
            f2,
            vec![RatMatrix::diagonal(&[rat_int(2), rat_int(3)]), RatMatrix::identity(2)],
        )
        .unwrap();
        assert!(matches!(local_charvar_dim(&r), Err(FoxError::NotIrreducible { .. })));
    }

    #[test]
    fn character_of_z2_has_even_local_dimension() {
        let p = parse_presentation("gens: a, b\nrels: [a,b]").unwrap();
        let r = Representation::new(
            p,
            vec![RatMatrix::scalar(1, rat_int(2)), RatMatrix::scalar(1, rat(1, 5))],
        )
        .unwrap();
        let report = local_charvar_dim(&r).unwrap();
        assert_eq!(report.dim_h1, 2);
        assert!(report.is_even);
    }

    #[test]
    fn invalid_module_is_rejected() {
        let p = parse_presentation("gens: a\nrels: a^2").unwrap();
        let bad = Representation::assign(p.clone(), vec![RatMatrix::scalar(1, rat_int(3))]).unwrap();
        assert!(matches!(h1_dimension(&p, &bad), Err(FoxError::InvalidAction(_))));
    }

    #[test]
    fn relator_permutation_and_conjugation_preserve_h1() {
        let p = parse_presentation("gens: a, b, c\nrels: [a,b], c^2 a c^-2 a^-1").unwrap();
        let q = parse_presentation("gens: a, b, c\nrels: c^2 a c^-2 a^-1, b [a,b] b^-1").unwrap();
        let mats = |g: &Presentation| {
            Representation::new(
                g.clone(),
                vec![
                    RatMatrix::scalar(1, rat_int(2)),
                    RatMatrix::scalar(1, rat_int(3)),
                    RatMatrix::scalar(1, rat_int(-1)),
                ],
            )
            .unwrap()
        };
        assert_eq!(
            h1_dimension(&p, &mats(&p)).unwrap().dim_h1,
            h1_dimension(&q, &mats(&q)).unwrap().dim_h1
        );
    }

    fn word_strategy() -> impl Strategy<Value = Word> {
        prop::collection::vec((0usize..3, prop_oneof![Just(-1i64), Just(1), Just(2), Just(-2)]), 0..8)
            .prop_map(Word::reduce)
    }

    proptest! {
        #[test]
        fn product_rule(u in word_strategy(), v in word_strategy(), x in 0usize..3) {
            let lhs = fox_derivative(&u.mul(&v), x);
            let rhs = fox_derivative(&u, x).add(&fox_derivative(&v, x).left_mul_word(&u));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
