//! Finite-index kernel subgroups via Reidemeister–Schreier, cyclic branched
//! covers of the sphere, and the search for finite quotients that keep a list
//! of torsion elements nontrivial.
//!
//! Cosets of `ker φ` are identified with elements of the image of `φ`. The
//! Schreier transversal is built breadth first from the identity, visiting
//! generators in index order and, for each, `x` before `x⁻¹`. This makes every
//! transversal, Schreier generator list and induced matrix reproducible.

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::fpgroup::{abelianization, quotient_by, AbelianizationData, CyclicAction, GroupError};
use crate::linalg::{rank_and_kernel, IntMatrix};
use crate::word::{Presentation, Word, WordError};

#[derive(Debug, Error)]
pub enum SubgroupError {
    #[error("not a group law: {0}")]
    NotAGroup(String),
    #[error("homomorphism sends relator {index} to a nontrivial element")]
    InvalidHom { index: usize },
    #[error("expected {expected} generator images, found {found}")]
    ImageCount { expected: usize, found: usize },
    #[error("word is not in the kernel (it ends in coset {coset})")]
    NotInKernel { coset: usize },
    #[error("torsion {0:?} in the abelianization of the cover group")]
    TorsionInH1(Vec<i64>),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("avoidance search exhausted its budget; uncovered elements: {0:?}")]
    BudgetExhausted(Vec<usize>),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTarget {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
    labels: Vec<String>,
}

impl FiniteTarget {
    /// Builds a target from a table, verifying closure, identity, inverses and
    /// associativity.
    pub fn from_table(table: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self, SubgroupError> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n) || labels.len() != n {
            return Err(SubgroupError::NotAGroup("table must be square and labelled".into()));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(SubgroupError::NotAGroup("entry out of range".into()));
        }
        let flat: Vec<usize> = table.into_iter().flatten().collect();
        let target = FiniteTarget::assemble(n, flat, labels)?;
        let all: Vec<usize> = (0..n).collect();
        target.check_associative(&all)?;
        Ok(target)
    }

    fn assemble(n: usize, table: Vec<usize>, labels: Vec<String>) -> Result<Self, SubgroupError> {
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e * n + a] == a && table[a * n + e] == a))
            .ok_or_else(|| SubgroupError::NotAGroup("no identity".into()))?;
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| table[a * n + b] == identity && table[b * n + a] == identity)
                .ok_or_else(|| SubgroupError::NotAGroup(format!("element {a} has no inverse")))?;
            inverses.push(inv);
        }
        Ok(FiniteTarget {
            order: n,
            table,
            identity,
            inverses,
            labels,
        })
    }

    /// Light's test: `(a·b)·g = a·(b·g)` for all `a, b` and `g` in a generating set.
    fn check_associative(&self, gens: &[usize]) -> Result<(), SubgroupError> {
        for a in 0..self.order {
            for b in 0..self.order {
                let ab = self.mul(a, b);
                for &g in gens {
                    if self.mul(ab, g) != self.mul(a, self.mul(b, g)) {
                        return Err(SubgroupError::NotAGroup(format!(
                            "associativity fails at ({a}, {b}, {g})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn trivial() -> Self {
        FiniteTarget::cyclic(1)
    }

    /// `Z/n` with elements labelled `0..n`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1, "cyclic group of order 0");
        let table = (0..n * n).map(|k| (k / n + k % n) % n).collect();
        let labels = (0..n).map(|k| k.to_string()).collect();
        FiniteTarget::assemble(n, table, labels).expect("Z/n is a group")
    }

    /// Closure of a set of permutations of `0..degree`. Elements are listed
    /// breadth first from the identity; returns the target and the element
    /// index of each generating permutation.
    pub fn from_permutations(degree: usize, gens: &[Vec<usize>]) -> (Self, Vec<usize>) {
        let identity: Vec<usize> = (0..degree).collect();
        let mut elements = vec![identity.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(identity, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let p = compose(&elements[i], g);
                if !index.contains_key(&p) {
                    index.insert(p.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(p);
                }
            }
        }
        let n = elements.len();
        let mut table = Vec::with_capacity(n * n);
        for a in &elements {
            for b in &elements {
                table.push(index[&compose(a, b)]);
            }
        }
        let labels = elements.iter().map(|p| cycle_label(p)).collect();
        let target = FiniteTarget::assemble(n, table, labels).expect("permutations form a group");
        let gen_ids: Vec<usize> = gens.iter().map(|g| index[g]).collect();
        debug_assert!(target.check_associative(&gen_ids).is_ok());
        (target, gen_ids)
    }

    /// Full symmetric group on `degree` points.
    pub fn symmetric(degree: usize) -> Self {
        let mut gens = Vec::new();
        if degree >= 2 {
            let mut swap: Vec<usize> = (0..degree).collect();
            swap.swap(0, 1);
            let cycle: Vec<usize> = (0..degree).map(|i| (i + 1) % degree).collect();
            gens.push(swap);
            gens.push(cycle);
        }
        FiniteTarget::from_permutations(degree, &gens).0
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn pow(&self, a: usize, e: i64) -> usize {
        let mut base = if e < 0 { self.inv(a) } else { a };
        let mut k = e.unsigned_abs();
        let mut out = self.identity;
        while k > 0 {
            if k & 1 == 1 {
                out = self.mul(out, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        out
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(<[usize]>::to_vec).collect()
    }
}

/// `(p·q)[i] = q[p[i]]`: apply `p`, then `q`.
fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    p.iter().map(|&i| q[i]).collect()
}

fn cycle_label(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        out.push('(');
        let mut i = start;
        let mut first = true;
        while !seen[i] {
            seen[i] = true;
            if !first {
                out.push(' ');
            }
            out.push_str(&(i + 1).to_string());
            first = false;
            i = p[i];
        }
        out.push(')');
    }
    if out.is_empty() {
        "()".into()
    } else {
        out
    }
}

/// A homomorphism from a finitely presented group to a finite group.
#[derive(Clone, Debug)]
pub struct FiniteHom {
    pub source: Presentation,
    pub target: FiniteTarget,
    pub images: Vec<usize>,
}

impl FiniteHom {
    pub fn new(source: &Presentation, target: FiniteTarget, images: Vec<usize>) -> Result<Self, SubgroupError> {
        if images.len() != source.generator_count() {
            return Err(SubgroupError::ImageCount {
                expected: source.generator_count(),
                found: images.len(),
            });
        }
        if images.iter().any(|&x| x >= target.order()) {
            return Err(SubgroupError::NotAGroup("image outside the target".into()));
        }
        let hom = FiniteHom {
            source: source.clone(),
            target,
            images,
        };
        if let Some(index) = source
            .relators()
            .iter()
            .position(|r| hom.evaluate(r) != hom.target.identity())
        {
            return Err(SubgroupError::InvalidHom { index });
        }
        Ok(hom)
    }

    pub fn evaluate(&self, w: &Word) -> usize {
        w.letters().iter().fold(self.target.identity(), |acc, l| {
            self.target
                .mul(acc, self.target.pow(self.images[l.generator], l.exponent))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchreierGenerator {
    pub coset: usize,
    pub generator: usize,
    /// `t_c · x · t_{c·φ(x)}⁻¹` in the ambient group.
    pub word: Word,
}

/// A finite-index kernel subgroup with its Reidemeister–Schreier presentation.
#[derive(Clone, Debug)]
pub struct SubgroupData {
    pub ambient: Presentation,
    pub hom: FiniteHom,
    /// Target element of each coset, in transversal order; coset 0 is the identity.
    pub cosets: Vec<usize>,
    pub transversal: Vec<Word>,
    pub schreier_gens: Vec<SchreierGenerator>,
    pub kernel_presentation: Presentation,
    coset_of: HashMap<usize, usize>,
    lookup: Vec<Option<usize>>,
}

pub fn kernel_subgroup(p: &Presentation, hom: &FiniteHom) -> Result<SubgroupData, SubgroupError> {
    let hom = FiniteHom::new(p, hom.target.clone(), hom.images.clone())?;
    let n = p.generator_count();
    let t = &hom.target;

    let mut cosets = vec![t.identity()];
    let mut transversal = vec![Word::identity()];
    let mut coset_of = HashMap::from([(t.identity(), 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for x in 0..n {
            for sign in [1i64, -1] {
                let elem = t.mul(cosets[c], t.pow(hom.images[x], sign));
                if coset_of.contains_key(&elem) {
                    continue;
                }
                let d = cosets.len();
                coset_of.insert(elem, d);
                cosets.push(elem);
                transversal.push(transversal[c].mul(&Word::power_of(x, sign)));
                queue.push_back(d);
            }
        }
    }

    let index = cosets.len();
    let mut schreier_gens = Vec::new();
    let mut lookup = vec![None; index * n];
    for c in 0..index {
        for x in 0..n {
            let d = coset_of[&t.mul(cosets[c], hom.images[x])];
            let word = transversal[c].mul(&Word::generator(x)).mul(&transversal[d].inverse());
            if word.is_identity() {
                continue;
            }
            lookup[c * n + x] = Some(schreier_gens.len());
            schreier_gens.push(SchreierGenerator {
                coset: c,
                generator: x,
                word,
            });
        }
    }
    let names: Vec<String> = schreier_gens
        .iter()
        .map(|s| format!("s{}_{}", s.coset, p.generators()[s.generator]))
        .collect();

    let mut data = SubgroupData {
        ambient: p.clone(),
        hom,
        cosets,
        transversal,
        schreier_gens,
        kernel_presentation: Presentation::new(names.clone(), Vec::new())?,
        coset_of,
        lookup,
    };

    let mut relators = Vec::new();
    let mut seen = HashSet::new();
    for c in 0..index {
        for r in p.relators() {
            let (w, end) = data.rewrite_from(c, r);
            debug_assert_eq!(end, c, "relators lie in the kernel");
            if !w.is_identity() && seen.insert(w.clone()) {
                relators.push(w);
            }
        }
    }
    data.kernel_presentation = Presentation::new(names, relators)?;
    Ok(data)
}

impl SubgroupData {
    pub fn index(&self) -> usize {
        self.cosets.len()
    }

    pub fn coset_of_element(&self, elem: usize) -> Option<usize> {
        self.coset_of.get(&elem).copied()
    }

    /// Coset reached from `coset` by the unit letter `x^sign`.
    pub fn step(&self, coset: usize, x: usize, sign: i64) -> usize {
        let t = &self.hom.target;
        self.coset_of[&t.mul(self.cosets[coset], t.pow(self.hom.images[x], sign))]
    }

    /// Coset of `t_coset · w`.
    pub fn coset_after(&self, coset: usize, w: &Word) -> usize {
        let t = &self.hom.target;
        self.coset_of[&t.mul(self.cosets[coset], self.hom.evaluate(w))]
    }

    /// Index of the Schreier generator `s_{c,x}`, `None` on tree edges.
    pub fn schreier_index(&self, coset: usize, x: usize) -> Option<usize> {
        self.lookup[coset * self.ambient.generator_count() + x]
    }

    /// Rewrites `t_c · w` letter by letter; returns the Schreier word and the
    /// final coset.
    pub fn rewrite_from(&self, coset: usize, w: &Word) -> (Word, usize) {
        let mut c = coset;
        let mut raw: Vec<(usize, i64)> = Vec::new();
        for (x, sign) in w.unit_letters() {
            if sign > 0 {
                if let Some(s) = self.schreier_index(c, x) {
                    raw.push((s, 1));
                }
                c = self.step(c, x, 1);
            } else {
                let d = self.step(c, x, -1);
                if let Some(s) = self.schreier_index(d, x) {
                    raw.push((s, -1));
                }
                c = d;
            }
        }
        (Word::reduce(raw), c)
    }

    /// Rewrites a kernel element over the Schreier generators.
    pub fn rewrite(&self, w: &Word) -> Result<Word, SubgroupError> {
        self.ambient.check_word(w)?;
        let (out, end) = self.rewrite_from(0, w);
        if end != 0 {
            return Err(SubgroupError::NotInKernel { coset: end });
        }
        Ok(out)
    }

    /// Substitutes Schreier generators by their ambient words.
    pub fn to_ambient(&self, w: &Word) -> Word {
        let images: Vec<Word> = self.schreier_gens.iter().map(|s| s.word.clone()).collect();
        w.substitute(&images)
    }

    /// `w · t_{c(w)}⁻¹`, which lies in the kernel.
    pub fn close_to_kernel(&self, w: &Word) -> Word {
        let c = self.coset_after(0, w);
        w.mul(&self.transversal[c].inverse())
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.hom.evaluate(w) == self.hom.target.identity()
    }
}

/// The fundamental group of a cyclic branched cover together with its deck
/// transformation.
#[derive(Clone, Debug)]
pub struct GroupWithAction {
    pub n: u32,
    pub cover_group: Presentation,
    pub action: CyclicAction,
    pub genus: usize,
    pub h1: AbelianizationData,
    pub action_matrix: IntMatrix,
    pub branch: Option<BranchData>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchData {
    pub finite_branch_points: usize,
    pub infinity_branched: bool,
    /// Monodromy of each puncture loop, finite roots first.
    pub monodromy: Vec<u32>,
    /// Kernel of the punctured-sphere group before the punctures are filled.
    #[serde(skip)]
    pub punctured: SubgroupData,
}

impl BranchData {
    pub fn effective_branch_points(&self) -> usize {
        self.monodromy.iter().filter(|&&m| m != 0).count()
    }
}

impl GroupWithAction {
    /// Packages an arbitrary group with a cyclic action; the abelianization
    /// must be torsion free of even rank.
    pub fn from_parts(cover_group: Presentation, action: CyclicAction) -> Result<Self, SubgroupError> {
        let h1 = abelianization(&cover_group);
        if !h1.is_torsion_free() {
            return Err(SubgroupError::TorsionInH1(h1.torsion_i64()));
        }
        if !h1.rank.is_multiple_of(2) {
            return Err(SubgroupError::InvalidCover(format!(
                "odd first Betti number {}",
                h1.rank
            )));
        }
        let action_matrix = h1.induced_matrix(&action.images);
        Ok(GroupWithAction {
            n: action.order,
            genus: h1.rank / 2,
            cover_group,
            action,
            h1,
            action_matrix,
            branch: None,
        })
    }

    pub fn betti1(&self) -> usize {
        self.h1.rank
    }
}

/// Fundamental group of the curve `y^N = f(x)` with `deg f = branch_count`
/// distinct roots, built from the punctured sphere.
pub fn cyclic_cover_group(n: u32, branch_count: usize) -> Result<GroupWithAction, SubgroupError> {
    if n < 2 {
        return Err(SubgroupError::InvalidCover("N must be at least 2".into()));
    }
    if branch_count == 0 {
        return Err(SubgroupError::InvalidCover(
            "at least one branch point is required".into(),
        ));
    }
    let nn = n as usize;
    let infinity_branched = !branch_count.is_multiple_of(nn);
    // free generators: every finite root loop except the last when infinity
    // is unbranched (then the last root loop closes the product relation)
    let free_count = if infinity_branched {
        branch_count
    } else {
        branch_count - 1
    };
    let names: Vec<String> = (1..=free_count).map(|i| format!("g{i}")).collect();
    let ambient = Presentation::new(names, Vec::new())?;

    let closing = Word::reduce((0..free_count).map(|i| (i, 1))).inverse();
    let mut loops: Vec<(Word, u32)> = (0..free_count).map(|i| (Word::generator(i), 1)).collect();
    if infinity_branched {
        let m = (nn - branch_count % nn) % nn;
        loops.push((closing, m as u32));
    } else {
        loops.push((closing, 1));
    }

    let target = FiniteTarget::cyclic(nn);
    let hom = FiniteHom::new(&ambient, target, vec![1; free_count])?;
    let sub = kernel_subgroup(&ambient, &hom)?;

    let mut fillers = Vec::new();
    let mut seen = HashSet::new();
    for (ell, m) in &loops {
        let e = nn / (*m as usize).gcd(&nn);
        let power = ell.pow(e as i64);
        for c in 0..sub.index() {
            let w = sub.rewrite(&power.conjugate_by(&sub.transversal[c]))?;
            if !w.is_identity() && seen.insert(w.clone()) {
                fillers.push(w);
            }
        }
    }
    let cover_group = quotient_by(&sub.kernel_presentation, &fillers)?;

    let deck_coset = sub
        .coset_of_element(1)
        .ok_or_else(|| SubgroupError::InvalidCover("monodromy is not surjective".into()))?;
    let deck = sub.transversal[deck_coset].clone();
    let images = sub
        .schreier_gens
        .iter()
        .map(|s| sub.rewrite(&s.word.conjugate_by(&deck)))
        .collect::<Result<Vec<_>, _>>()?;
    let action = CyclicAction { order: n, images };

    let mut gwa = GroupWithAction::from_parts(cover_group, action)?;
    gwa.branch = Some(BranchData {
        finite_branch_points: branch_count,
        infinity_branched,
        monodromy: {
            let mut m = vec![1u32; branch_count];
            if infinity_branched {
                m.push(loops.last().map(|l| l.1).unwrap_or(0));
            }
            m
        },
        punctured: sub,
    });
    Ok(gwa)
}

/// Riemann–Hurwitz genus of `y^N = f(x)`, `deg f = branch_count`, with the
/// point at infinity ramified when `N ∤ deg f`.
pub fn riemann_hurwitz_genus(n: u32, branch_count: usize) -> Option<usize> {
    let n = n as i64;
    let b = branch_count as i64;
    let inf = (-b).rem_euclid(n);
    // χ(C) = N·χ(P¹) − Σ_p (N − #preimages(p))
    let mut euler = 2 * n - b * (n - 1);
    if inf != 0 {
        euler -= n - inf.gcd(&n);
    }
    let twice_g = 2 - euler;
    (twice_g >= 0 && twice_g % 2 == 0).then_some((twice_g / 2) as usize)
}

/// Matrix of the deck generator on `H₁` in the free basis of the
/// abelianization; column `j` is the image of basis element `j`.
pub fn h1_action(gwa: &GroupWithAction) -> Result<IntMatrix, SubgroupError> {
    if !gwa.h1.is_torsion_free() {
        return Err(SubgroupError::TorsionInH1(gwa.h1.torsion_i64()));
    }
    Ok(gwa.h1.induced_matrix(&gwa.action.images))
}

/// Dimension of the rational fixed space `ker(A − I)`.
pub fn fixed_space_dim(a: &IntMatrix) -> usize {
    let m = a.to_rational().sub(&crate::linalg::RatMatrix::identity(a.rows()));
    rank_and_kernel(&m).1.len()
}

/// Limits for [`avoidance_subgroup`].
#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct SearchBudget {
    pub max_degree: usize,
    pub max_modulus: u32,
    pub max_quotient_order: usize,
    pub exhaustive_limit: u64,
    pub random_trials: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_degree: 4,
            max_modulus: 6,
            max_quotient_order: 720,
            exhaustive_limit: 200_000,
            random_trials: 20_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientRecord {
    pub kind: String,
    pub degree: usize,
    pub generator_images: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ElementImage {
    pub word: String,
    pub claimed_order: u32,
    pub image: String,
    pub image_order: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AvoidanceCertificate {
    pub quotients: Vec<QuotientRecord>,
    pub quotient_order: usize,
    pub table: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    pub elements: Vec<ElementImage>,
    pub index: usize,
}

struct Candidate {
    record: QuotientRecord,
}

impl Candidate {
    fn evaluate(&self, w: &Word) -> Vec<usize> {
        let d = self.record.degree;
        let mut p: Vec<usize> = (0..d).collect();
        for (x, sign) in w.unit_letters() {
            let g = &self.record.generator_images[x];
            p = if sign > 0 {
                compose(&p, g)
            } else {
                compose(&p, &invert(g))
            };
        }
        p
    }

    fn is_hom(&self, p: &Presentation) -> bool {
        let id: Vec<usize> = (0..self.record.degree).collect();
        p.relators().iter().all(|r| self.evaluate(r) == id)
    }

    fn detects(&self, w: &Word) -> bool {
        let p = self.evaluate(w);
        p.iter().enumerate().any(|(i, &j)| i != j)
    }
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut out = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        out[j] = i;
    }
    out
}

fn cycle_perm(offset: usize, len: usize, total: usize, shift: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..total).collect();
    for k in 0..len {
        p[offset + k] = offset + (k + shift) % len;
    }
    p
}

/// Cyclic factors `(coordinate, modulus)` of `Ab ⊗ Z/m` in the Smith basis,
/// torsion coordinates first.
fn abelian_factors(ab: &AbelianizationData, m: u32) -> Vec<(usize, usize)> {
    let m_big = BigInt::from(m);
    let k = ab.diagonal_factors().len();
    let mut factors = Vec::new();
    for (j, d) in ab.diagonal_factors().iter().enumerate() {
        if let Some(g) = d.gcd(&m_big).to_usize() {
            if g > 1 {
                factors.push((j, g));
            }
        }
    }
    if m > 1 {
        factors.extend((0..ab.rank).map(|j| (k + j, m as usize)));
    }
    factors
}

/// The quotient of `Ab` onto the given cyclic factors, realized as
/// permutations on disjoint cycles.
fn abelian_candidate(p: &Presentation, ab: &AbelianizationData, factors: &[(usize, usize)], kind: String) -> Candidate {
    let n = p.generator_count();
    let degree: usize = factors.iter().map(|f| f.1).sum();
    let images = (0..n)
        .map(|i| {
            let mut e = vec![BigInt::zero(); n];
            e[i] = BigInt::from(1);
            let coords = ab.transformed(&e);
            let mut perm: Vec<usize> = (0..degree).collect();
            let mut offset = 0;
            for &(j, modulus) in factors {
                let shift = coords[j]
                    .mod_floor(&BigInt::from(modulus))
                    .to_usize()
                    .expect("residue fits");
                perm = compose(&perm, &cycle_perm(offset, modulus, degree, shift));
                offset += modulus;
            }
            perm
        })
        .collect();
    Candidate {
        record: QuotientRecord {
            kind,
            degree,
            generator_images: images,
        },
    }
}

/// Cyclic quotients on single Smith coordinates, then the full `Ab ⊗ Z/m`,
/// for each modulus in turn; sorted by quotient order.
fn abelian_candidates(p: &Presentation, ab: &AbelianizationData, moduli: &[u32], max_order: usize) -> Vec<Candidate> {
    let mut out: Vec<(usize, Candidate)> = Vec::new();
    let mut seen = HashSet::new();
    for &m in moduli {
        let factors = abelian_factors(ab, m);
        for &f in &factors {
            if f.1 <= max_order && seen.insert(vec![f]) {
                out.push((
                    f.1,
                    abelian_candidate(p, ab, &[f], format!("abelian Z/{} on coordinate {}", f.1, f.0)),
                ));
            }
        }
        let order: usize = factors.iter().map(|f| f.1).product();
        if factors.len() > 1 && order <= max_order && seen.insert(factors.clone()) {
            out.push((order, abelian_candidate(p, ab, &factors, format!("abelian mod {m}"))));
        }
    }
    out.sort_by_key(|c| c.0);
    out.into_iter().map(|c| c.1).collect()
}

/// Finds a finite quotient in which every listed element has nontrivial
/// image, and returns its kernel with a certificate.
///
/// Candidates are abelian quotients (single cyclic coordinates first, then
/// `Ab ⊗ Z/m`), followed by permutation representations of degree
/// `2..=max_degree`, enumerated exhaustively when the number of assignments
/// is within `exhaustive_limit` and by seeded sampling otherwise. A single
/// candidate that separates every element is preferred; failing that, the
/// candidates are combined greedily and the kernel of their product is used.
pub fn avoidance_subgroup(
    p: &Presentation,
    elements: &[(Word, u32)],
    budget: &SearchBudget,
) -> Result<(SubgroupData, AvoidanceCertificate), SubgroupError> {
    for (w, _) in elements {
        p.check_word(w)?;
    }
    let targets: Vec<usize> = (0..elements.len()).collect();
    let trivial: Vec<usize> = targets
        .iter()
        .copied()
        .filter(|&i| elements[i].0.is_identity())
        .collect();
    if !trivial.is_empty() {
        return Err(SubgroupError::BudgetExhausted(trivial));
    }

    let mut chosen: Vec<Candidate> = Vec::new();
    let mut covered = vec![false; elements.len()];
    if !elements.is_empty() {
        let ab = abelianization(p);
        let mut moduli: Vec<u32> = Vec::new();
        moduli.push(elements.iter().fold(1u32, |acc, (_, o)| acc.lcm(&(*o).max(1))));
        let exponent = ab.torsion.iter().fold(BigInt::from(1), |acc, t| acc.lcm(t));
        moduli.extend(exponent.to_u32());
        moduli.extend(ab.torsion.iter().filter_map(ToPrimitive::to_u32));
        moduli.extend(2..=budget.max_modulus);
        let mut seen = HashSet::new();
        moduli.retain(|m| *m > 1 && seen.insert(*m));
        let abelian = abelian_candidates(p, &ab, &moduli, budget.max_quotient_order);

        let separates_all = |c: &Candidate| elements.iter().all(|(w, _)| c.detects(w));
        let mut single: Option<Candidate> = None;
        if let Some(i) = abelian.iter().position(separates_all) {
            single = abelian.into_iter().nth(i);
        } else {
            symmetric_search(p, budget, &mut |cand| {
                if separates_all(&cand) {
                    single = Some(cand);
                    true
                } else {
                    false
                }
            });
            if single.is_none() {
                let mut absorb = |cand: Candidate| -> bool {
                    let hits: Vec<bool> = elements.iter().map(|(w, _)| cand.detects(w)).collect();
                    if hits.iter().zip(&covered).any(|(&h, &c)| h && !c) {
                        for (c, h) in covered.iter_mut().zip(hits) {
                            *c |= h;
                        }
                        chosen.push(cand);
                    }
                    covered.iter().all(|&c| c)
                };
                let abelian = abelian_candidates(p, &ab, &moduli, budget.max_quotient_order);
                let mut done = false;
                for cand in abelian {
                    if absorb(cand) {
                        done = true;
                        break;
                    }
                }
                if !done {
                    symmetric_search(p, budget, &mut absorb);
                }
            }
        }
        if let Some(c) = single {
            chosen = vec![c];
            covered = vec![true; elements.len()];
        }
    }
    if covered.iter().any(|c| !c) {
        let missing = covered
            .iter()
            .enumerate()
            .filter(|(_, c)| !**c)
            .map(|(i, _)| i)
            .collect();
        return Err(SubgroupError::BudgetExhausted(missing));
    }

    // product of the chosen quotients on the disjoint union of their points
    let degree: usize = chosen.iter().map(|c| c.record.degree).sum();
    let n = p.generator_count();
    let gen_perms: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut perm = Vec::with_capacity(degree);
            let mut offset = 0;
            for c in &chosen {
                perm.extend(c.record.generator_images[i].iter().map(|&x| x + offset));
                offset += c.record.degree;
            }
            perm
        })
        .collect();
    let (target, gen_ids) = FiniteTarget::from_permutations(degree, &gen_perms);
    if target.order() > budget.max_quotient_order.max(1) && !chosen.is_empty() {
        return Err(SubgroupError::BudgetExhausted(targets));
    }
    let hom = FiniteHom::new(p, target, gen_ids)?;
    let sub = kernel_subgroup(p, &hom)?;

    let element_images = elements
        .iter()
        .map(|(w, o)| {
            let img = hom.evaluate(w);
            ElementImage {
                word: p.format_word(w),
                claimed_order: *o,
                image: hom.target.label(img).to_string(),
                image_order: hom.target.element_order(img),
            }
        })
        .collect();
    let cert = AvoidanceCertificate {
        quotients: chosen.into_iter().map(|c| c.record).collect(),
        quotient_order: hom.target.order(),
        table: hom.target.table_rows(),
        labels: hom.target.labels().to_vec(),
        elements: element_images,
        index: sub.index(),
    };
    Ok((sub, cert))
}

fn all_permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let d = used.len();
        if prefix.len() == d {
            out.push(prefix.clone());
            return;
        }
        for i in 0..d {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

/// Feeds permutation representations to `accept` until it returns true.
fn symmetric_search(p: &Presentation, budget: &SearchBudget, accept: &mut dyn FnMut(Candidate) -> bool) -> bool {
    let n = p.generator_count();
    if n == 0 {
        return false;
    }
    for d in 2..=budget.max_degree {
        let perms = all_permutations(d);
        let total = (perms.len() as u64).checked_pow(n as u32);
        let make = |choice: &[usize]| Candidate {
            record: QuotientRecord {
                kind: format!("permutation degree {d}"),
                degree: d,
                generator_images: choice.iter().map(|&k| perms[k].clone()).collect(),
            },
        };
        match total {
            Some(total) if total <= budget.exhaustive_limit => {
                let mut choice = vec![0usize; n];
                loop {
                    let cand = make(&choice);
                    if cand.is_hom(p) && accept(cand) {
                        return true;
                    }
                    // odometer, last generator fastest
                    let mut k = n;
                    loop {
                        if k == 0 {
                            break;
                        }
                        k -= 1;
                        choice[k] += 1;
                        if choice[k] < perms.len() {
                            break;
                        }
                        choice[k] = 0;
                        if k == 0 {
                            k = usize::MAX;
                            break;
                        }
                    }
                    if k == usize::MAX {
                        break;
                    }
                }
            }
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ (d as u64).wrapping_mul(0x9E37_79B9));
                for _ in 0..budget.random_trials {
                    let choice: Vec<usize> = (0..n).map(|_| rng.gen_range(0..perms.len())).collect();
                    let cand = make(&choice);
                    if cand.is_hom(p) && accept(cand) {
                        return true;
                    }
                }
            }
        }
    }
    false
}
