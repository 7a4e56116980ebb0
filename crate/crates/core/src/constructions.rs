//! End-to-end pipelines.
//!
//! `build_theorem1` starts from the curve `y^N = f(x)`, forms
//! `π₁(X) = π₁(C) ⋊ Z/N`, and certifies the induced family `V_χ` sample by
//! sample. `descent_chain` runs the group-theoretic descent on a user supplied
//! presentation: quotient by the Picard–Lefschetz relations, index-two kernel,
//! finite quotient avoiding the link elements, and induction back up.

use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fox::{local_charvar_dim, FoxError, H1Report};
use crate::fpgroup::{abelianization, quotient_by, semidirect_cyclic, GroupError};
use crate::linalg::{rat, IntMatrix, Rational};
use crate::rep::{
    burnside, character_orbit, character_rep, equivalent_semisimple, induce, picard_lefschetz_check, CharacterBase,
    CharacterVector, PicardLefschetzCheck, RepError, Representation,
};
use crate::subgroup::{
    avoidance_subgroup, cyclic_cover_group, fixed_space_dim, h1_action, kernel_subgroup, AvoidanceCertificate,
    FiniteHom, FiniteTarget, GroupWithAction, SearchBudget, SubgroupData, SubgroupError,
};
use crate::word::{Presentation, Word};

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("rejected: {0}")]
    Rejected(String),
    #[error(transparent)]
    Subgroup(#[from] SubgroupError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Fox(#[from] FoxError),
}

pub(crate) fn rat_string(q: &Rational) -> String {
    q.to_string()
}

pub(crate) fn int_rows(m: &IntMatrix) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(BigInt::to_string).collect())
        .collect()
}

/// Headline data of a cyclic cover.
#[derive(Clone, Debug, Serialize)]
pub struct CoverSummary {
    pub n: u32,
    pub deg_f: usize,
    pub effective_branch_points: usize,
    pub infinity_branched: bool,
    pub genus: usize,
    pub betti1: usize,
    pub riemann_hurwitz_genus: Option<usize>,
    pub generators: usize,
    pub relators: usize,
    pub action_matrix: Vec<Vec<String>>,
    pub action_order_divides_n: bool,
    pub fixed_space_dim: usize,
}

pub fn cover_summary(gwa: &GroupWithAction) -> Result<CoverSummary, ConstructionError> {
    let branch = gwa
        .branch
        .as_ref()
        .ok_or_else(|| ConstructionError::Rejected("not a branched cover".into()))?;
    let a = h1_action(gwa)?;
    let order_ok = a.pow(gwa.n).map(|p| p.is_identity()).unwrap_or(false);
    Ok(CoverSummary {
        n: gwa.n,
        deg_f: branch.finite_branch_points,
        effective_branch_points: branch.effective_branch_points(),
        infinity_branched: branch.infinity_branched,
        genus: gwa.genus,
        betti1: gwa.betti1(),
        riemann_hurwitz_genus: crate::subgroup::riemann_hurwitz_genus(gwa.n, branch.finite_branch_points),
        generators: gwa.cover_group.generator_count(),
        relators: gwa.cover_group.relators().len(),
        action_matrix: int_rows(&a),
        action_order_divides_n: order_ok,
        fixed_space_dim: fixed_space_dim(&a),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub chi: Vec<String>,
    pub orbit_distinct: bool,
    /// Set only for orbit-distinct samples.
    pub certified: Option<SampleCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleCertificate {
    pub dim: usize,
    pub valid: bool,
    pub irreducible: bool,
    pub algebra_dim: usize,
    pub res_words_checked: usize,
    pub res_matches_orbit_sum: bool,
    pub equivalent_to_twist: bool,
    pub h1: H1Report,
    pub h1_at_least_2g: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub seed: u64,
    pub cover: CoverSummary,
    pub total_generators: usize,
    pub total_relators: usize,
    pub betti1_total: usize,
    pub samples: Vec<SampleRecord>,
    /// `equivalence[i][j]`: `V_χᵢ ≅ V_χⱼ` for certified samples.
    pub equivalence: Vec<Vec<Option<bool>>>,
    /// `same_orbit[i][j]`: `χⱼ` lies in the orbit of `χᵢ`.
    pub same_orbit: Vec<Vec<bool>>,
    pub genericity_failures: usize,
    pub genericity_failure_fraction: String,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl Theorem1Report {
    pub fn first_failure(&self) -> Option<&str> {
        self.failures.first().map(String::as_str)
    }
}

/// Pipeline parameters for `build_theorem1`.
#[derive(Clone, Debug)]
pub struct Theorem1Config {
    pub n: u32,
    pub deg_f: usize,
    pub samples: usize,
    pub seed: u64,
    /// Random kernel words used to compare `Res V_χ` with the orbit sum.
    pub res_words: usize,
    pub value_bound: i64,
}

impl Theorem1Config {
    pub fn new(n: u32, deg_f: usize, samples: usize, seed: u64) -> Self {
        Theorem1Config {
            n,
            deg_f,
            samples,
            seed,
            res_words: 50,
            value_bound: DEFAULT_VALUE_BOUND,
        }
    }
}

/// Exponent sums in `π₁(C)` of words in `π₁(C) ⋊ Z/N`, obtained by pushing
/// every `t` to the right through `t·a·t⁻¹ = γ(a)`.
struct Collector {
    cover_gens: usize,
    order: u32,
    /// `powers[c][a]`: exponent sums of `γᶜ(a)`.
    powers: Vec<Vec<Vec<i64>>>,
}

impl Collector {
    fn new(gwa: &GroupWithAction) -> Self {
        let k = gwa.cover_group.generator_count();
        let first: Vec<Vec<i64>> = gwa.action.images.iter().map(|w| w.exponent_sums(k)).collect();
        let identity: Vec<Vec<i64>> = (0..k).map(|a| (0..k).map(|b| i64::from(a == b)).collect()).collect();
        let mut powers = vec![identity];
        for c in 1..gwa.n as usize {
            let prev = &powers[c - 1];
            let next: Vec<Vec<i64>> = (0..k)
                .map(|a| {
                    let mut v = vec![0i64; k];
                    for (b, e) in first[a].iter().enumerate() {
                        for (vi, p) in v.iter_mut().zip(&prev[b]) {
                            *vi += e * p;
                        }
                    }
                    v
                })
                .collect();
            powers.push(next);
        }
        Collector {
            cover_gens: k,
            order: gwa.n,
            powers,
        }
    }

    /// Returns the exponent sums and the residual power of `t` modulo `N`.
    fn collect(&self, w: &Word) -> (Vec<i64>, u32) {
        let k = self.cover_gens;
        let mut sums = vec![0i64; k];
        let mut c: u32 = 0;
        for l in w.letters() {
            if l.generator == k {
                c = (i64::from(c) + l.exponent).rem_euclid(i64::from(self.order)) as u32;
            } else {
                for (s, p) in sums.iter_mut().zip(&self.powers[c as usize][l.generator]) {
                    *s += l.exponent * p;
                }
            }
        }
        (sums, c)
    }
}

/// Default bound on numerators and denominators of sampled character values.
pub const DEFAULT_VALUE_BOUND: i64 = 1_000_000;

fn sample_rational(rng: &mut ChaCha8Rng, bound: i64) -> Rational {
    let num = rng.gen_range(1..=bound) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let den = rng.gen_range(1..=bound);
    rat(num, den)
}

fn random_word(rng: &mut ChaCha8Rng, gens: usize, len: usize) -> Word {
    Word::reduce((0..len).map(|_| (rng.gen_range(0..gens), if rng.gen_bool(0.5) { 1 } else { -1 })))
}

/// The family `χ ↦ V_χ = Ind χ` on `π₁(X) = π₁(C) ⋊ Z/N`.
pub struct Theorem1Family {
    pub cover: GroupWithAction,
    pub total: Presentation,
    pub kernel: SubgroupData,
    pub base: Arc<CharacterBase>,
    pub action_matrix: IntMatrix,
    collector: Collector,
}

impl Theorem1Family {
    pub fn new(n: u32, deg_f: usize) -> Result<Self, ConstructionError> {
        let cover = cyclic_cover_group(n, deg_f)?;
        if cover.genus == 0 {
            return Err(ConstructionError::Rejected(format!(
                "genus 0 cover (N={n}, deg f={deg_f}) has no characters to vary"
            )));
        }
        let action_matrix = h1_action(&cover)?;
        let total = semidirect_cyclic(&cover.cover_group, &cover.action)?;
        let k = cover.cover_group.generator_count();
        let mut images = vec![0usize; k];
        images.push(1);
        let hom = FiniteHom::new(&total, FiniteTarget::cyclic(n as usize), images)?;
        let kernel = kernel_subgroup(&total, &hom)?;
        let base = CharacterBase::new(cover.cover_group.clone());
        let collector = Collector::new(&cover);
        Ok(Theorem1Family {
            cover,
            total,
            kernel,
            base,
            action_matrix,
            collector,
        })
    }

    pub fn character(&self, values: Vec<Rational>) -> Result<CharacterVector, RepError> {
        CharacterVector::new(self.base.clone(), values)
    }

    /// `Ind χ` from the kernel of `π₁(X) → Z/N`; the kernel generators are
    /// evaluated through their images in `π₁(C)`.
    pub fn induced(&self, chi: &CharacterVector) -> Result<Representation, RepError> {
        let mats = self
            .kernel
            .schreier_gens
            .iter()
            .map(|s| {
                let (sums, c) = self.collector.collect(&s.word);
                debug_assert_eq!(c, 0);
                chi.value_of_sums(&sums).map(|v| crate::linalg::RatMatrix::scalar(1, v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let w = Representation::new(self.kernel.kernel_presentation.clone(), mats)?;
        induce(&self.kernel, &w)
    }

    pub fn orbit(&self, chi: &CharacterVector) -> Result<Vec<CharacterVector>, RepError> {
        character_orbit(chi, &self.action_matrix, self.cover.n)
    }

    /// Compares `tr V_χ(w)` with `Σ_c (χ∘γᶜ)(w)` on random kernel words.
    pub fn check_restriction(
        &self,
        v: &Representation,
        orbit: &[CharacterVector],
        words: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<bool, RepError> {
        let gens = self.total.generator_count();
        for _ in 0..words {
            let len = rng.gen_range(1..=10);
            let w = self.kernel.close_to_kernel(&random_word(rng, gens, len));
            let (sums, c) = self.collector.collect(&w);
            debug_assert_eq!(c, 0);
            let mut expected = Rational::from_integer(0.into());
            for chi in orbit {
                expected += chi.value_of_sums(&sums)?;
            }
            if v.trace(&w) != expected {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn build_theorem1(config: &Theorem1Config) -> Result<Theorem1Report, ConstructionError> {
    if config.n < 2 {
        return Err(ConstructionError::Rejected("N must be at least 2".into()));
    }
    if config.deg_f == 0 {
        return Err(ConstructionError::Rejected("deg f must be at least 1".into()));
    }
    let family = Theorem1Family::new(config.n, config.deg_f)?;
    let cover = cover_summary(&family.cover)?;
    let genus = family.cover.genus;
    let mut failures = Vec::new();
    if !cover.action_order_divides_n {
        failures.push(format!("deck action: A^{} is not the identity", config.n));
    }
    if cover.fixed_space_dim != 0 {
        failures.push(format!(
            "deck action: fixed space has dimension {}",
            cover.fixed_space_dim
        ));
    }
    let betti1_total = abelianization(&family.total).rank;
    if betti1_total != 0 {
        failures.push(format!(
            "betti1 of the semidirect product is {betti1_total}, expected 0"
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rank = family.base.abelianization.rank;
    let chis: Vec<CharacterVector> = (0..config.samples)
        .map(|_| {
            family.character(
                (0..rank)
                    .map(|_| sample_rational(&mut rng, config.value_bound))
                    .collect(),
            )
        })
        .collect::<Result<_, _>>()?;
    let word_seeds: Vec<u64> = (0..config.samples).map(|_| rng.gen()).collect();

    let results: Vec<Result<SampleOutcome, ConstructionError>> = chis
        .par_iter()
        .enumerate()
        .map(|(i, chi)| certify_sample(&family, i, chi, config, genus, word_seeds[i]))
        .collect();

    let mut samples = Vec::new();
    let mut reps = Vec::new();
    for r in results {
        let (record, rep, fails) = r?;
        failures.extend(fails);
        samples.push(record);
        reps.push(rep);
    }

    let orbits: Vec<Vec<CharacterVector>> = chis.iter().map(|c| family.orbit(c)).collect::<Result<_, _>>()?;
    let same_orbit: Vec<Vec<bool>> = (0..chis.len())
        .map(|i| {
            (0..chis.len())
                .map(|j| orbits[i].iter().any(|o| o.values == chis[j].values))
                .collect()
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..reps.len())
        .flat_map(|i| (0..reps.len()).map(move |j| (i, j)))
        .filter(|(i, j)| i < j)
        .collect();
    let verdicts: Vec<Option<bool>> = pairs
        .par_iter()
        .map(|&(i, j)| match (&reps[i], &reps[j]) {
            (Some(a), Some(b)) => equivalent_semisimple(a, b).ok(),
            _ => None,
        })
        .collect();
    let mut equivalence = vec![vec![None; reps.len()]; reps.len()];
    for (i, r) in reps.iter().enumerate() {
        equivalence[i][i] = r.as_ref().map(|_| true);
    }
    for (&(i, j), v) in pairs.iter().zip(&verdicts) {
        equivalence[i][j] = *v;
        equivalence[j][i] = *v;
        if let Some(eq) = v {
            if *eq != same_orbit[i][j] {
                failures.push(format!(
                    "quasifinite: samples {i} and {j} are {} but their characters are {}",
                    if *eq { "equivalent" } else { "inequivalent" },
                    if same_orbit[i][j] {
                        "in one orbit"
                    } else {
                        "in different orbits"
                    }
                ));
            }
        }
    }

    let genericity_failures = samples.iter().filter(|s| !s.orbit_distinct).count();
    let passed = failures.is_empty();
    Ok(Theorem1Report {
        seed: config.seed,
        cover,
        total_generators: family.total.generator_count(),
        total_relators: family.total.relators().len(),
        betti1_total,
        genericity_failure_fraction: format!("{genericity_failures}/{}", samples.len()),
        genericity_failures,
        samples,
        equivalence,
        same_orbit,
        failures,
        passed,
    })
}

type SampleOutcome = (SampleRecord, Option<Representation>, Vec<String>);

fn certify_sample(
    family: &Theorem1Family,
    index: usize,
    chi: &CharacterVector,
    config: &Theorem1Config,
    genus: usize,
    word_seed: u64,
) -> Result<SampleOutcome, ConstructionError> {
    let chi_strings = chi.values.iter().map(rat_string).collect();
    let orbit = family.orbit(chi)?;
    let distinct = (0..orbit.len()).all(|i| (i + 1..orbit.len()).all(|j| orbit[i].values != orbit[j].values));
    if !distinct {
        return Ok((
            SampleRecord {
                index,
                chi: chi_strings,
                orbit_distinct: false,
                certified: None,
            },
            None,
            Vec::new(),
        ));
    }
    let mut failures = Vec::new();
    let v = family.induced(chi)?;
    let (irreducible, basis) = burnside(&v);
    if !irreducible {
        failures.push(format!("sample {index}: V_chi is not absolutely irreducible"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(word_seed);
    let res_ok = family.check_restriction(&v, &orbit, config.res_words, &mut rng)?;
    if !res_ok {
        failures.push(format!("sample {index}: Res V_chi does not match the orbit sum"));
    }
    let twisted = family.induced(&orbit[1])?;
    let twist_eq = equivalent_semisimple(&v, &twisted)?;
    if !twist_eq {
        failures.push(format!("sample {index}: V_chi and V_(chi o gamma) are inequivalent"));
    }
    let h1 = if irreducible {
        local_charvar_dim(&v)?
    } else {
        H1Report {
            dim_z1: 0,
            dim_b1: 0,
            dim_h1: 0,
            module_dim: 0,
            is_even: false,
            at: String::new(),
        }
    };
    let bound = h1.dim_h1 >= 2 * genus;
    if irreducible && !h1.is_even {
        failures.push(format!("sample {index}: local H1 dimension {} is odd", h1.dim_h1));
    }
    if irreducible && !bound {
        failures.push(format!(
            "sample {index}: local H1 dimension {} < 2g = {}",
            h1.dim_h1,
            2 * genus
        ));
    }
    Ok((
        SampleRecord {
            index,
            chi: chi_strings,
            orbit_distinct: true,
            certified: Some(SampleCertificate {
                dim: v.dim(),
                valid: v.validate().is_ok(),
                irreducible,
                algebra_dim: basis.dim,
                res_words_checked: config.res_words,
                res_matches_orbit_sum: res_ok,
                equivalent_to_twist: twist_eq,
                h1,
                h1_at_least_2g: bound,
            }),
        },
        Some(v),
        failures,
    ))
}

/// Where the characters of the avoidance subgroup come from.
#[derive(Clone, Debug)]
pub enum CharacterSource {
    /// Values on the free part of `H₁`, one vector per character.
    Explicit(Vec<Vec<Rational>>),
    Sampled {
        count: usize,
        seed: u64,
        bound: i64,
    },
}

#[derive(Clone, Debug)]
pub struct DescentInput {
    pub presentation: Presentation,
    pub gamma1: Vec<Word>,
    pub gamma2: Vec<Word>,
    /// Representation of `presentation` on which the relations are tested.
    pub monodromy: Representation,
    /// Image in `Z/2` of each generator.
    pub parity: Vec<u8>,
    pub links: Vec<(Word, u32)>,
    pub allow_any_link_order: bool,
    pub characters: CharacterSource,
    pub budget: SearchBudget,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageOne {
    pub predicates: PicardLefschetzCheck,
    pub quotient: Option<String>,
    pub monodromy_descends: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTwo {
    pub index: usize,
    pub kernel_generators: usize,
    pub kernel_relators: usize,
    pub kernel_betti1: usize,
    pub kernel_torsion: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkRecord {
    pub word: String,
    pub claimed_order: u32,
    pub in_kernel: bool,
    pub kernel_word: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageThree {
    pub surrogate: &'static str,
    pub links: Vec<LinkRecord>,
    pub certificate: AvoidanceCertificate,
    pub all_nontrivial: bool,
    pub orders_consistent: bool,
    pub subgroup_generators: usize,
    pub subgroup_betti1: usize,
    pub subgroup_torsion: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InducedRecord {
    pub character: Vec<String>,
    pub free_part_only: bool,
    pub dim: usize,
    pub valid: bool,
    pub irreducible: bool,
    pub algebra_dim: usize,
    pub generator_images: Vec<(String, Vec<Vec<String>>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageFour {
    pub induced: Vec<InducedRecord>,
    pub equivalence: Vec<Vec<bool>>,
    pub family_nontrivial: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentChainReport {
    pub input: String,
    pub stage1: StageOne,
    pub stage2: Option<StageTwo>,
    pub stage3: Option<StageThree>,
    pub stage4: Option<StageFour>,
    pub stopped_at: Option<String>,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl DescentChainReport {
    pub fn first_failure(&self) -> Option<&str> {
        self.failures.first().map(String::as_str)
    }
}

fn stop(mut report: DescentChainReport, stage: &str, why: String) -> DescentChainReport {
    report.stopped_at = Some(stage.to_string());
    report.failures.push(format!("{stage}: {why}"));
    report.passed = false;
    report
}

fn torsion_strings(p: &Presentation) -> (usize, Vec<String>) {
    let ab = abelianization(p);
    (ab.rank, ab.torsion.iter().map(BigInt::to_string).collect())
}

pub fn descent_chain(input: &DescentInput) -> Result<DescentChainReport, ConstructionError> {
    let p = &input.presentation;
    for w in input
        .gamma1
        .iter()
        .chain(&input.gamma2)
        .chain(input.links.iter().map(|l| &l.0))
    {
        p.check_word(w).map_err(GroupError::from)?;
    }
    if input.monodromy.group() != p {
        return Err(ConstructionError::Rejected(
            "monodromy is over a different presentation".into(),
        ));
    }
    if !input.allow_any_link_order {
        if let Some((w, o)) = input.links.iter().find(|(_, o)| *o != 2 && *o != 3) {
            return Err(ConstructionError::Rejected(format!(
                "link element {} has order {o}; only 2 and 3 are allowed by default",
                p.format_word(w)
            )));
        }
    }
    if input.parity.len() != p.generator_count() {
        return Err(ConstructionError::Rejected(format!(
            "parity needs {} entries, found {}",
            p.generator_count(),
            input.parity.len()
        )));
    }

    // stage 1: Picard–Lefschetz relations
    let predicates = picard_lefschetz_check(&input.monodromy, &input.gamma1, &input.gamma2);
    let mut report = DescentChainReport {
        input: p.to_string(),
        stage1: StageOne {
            predicates: predicates.clone(),
            quotient: None,
            monodromy_descends: false,
        },
        stage2: None,
        stage3: None,
        stage4: None,
        stopped_at: None,
        failures: Vec::new(),
        passed: true,
    };
    if !predicates.holds() {
        return Ok(stop(report, "stage 1", "Picard-Lefschetz predicates fail".into()));
    }
    let extra: Vec<Word> = input
        .gamma1
        .iter()
        .map(|g| g.pow(2))
        .chain(input.gamma2.iter().cloned())
        .collect();
    let q = quotient_by(p, &extra)?;
    report.stage1.quotient = Some(q.to_string());
    report.stage1.monodromy_descends = Representation::new(q.clone(), input.monodromy.matrices().to_vec()).is_ok();
    if !report.stage1.monodromy_descends {
        return Ok(stop(
            report,
            "stage 1",
            "monodromy does not descend to the quotient".into(),
        ));
    }

    // stage 2: index-two kernel
    let images: Vec<usize> = input.parity.iter().map(|&b| usize::from(b % 2)).collect();
    let hom = match FiniteHom::new(&q, FiniteTarget::cyclic(2), images) {
        Ok(h) => h,
        Err(e) => return Ok(stop(report, "stage 2", format!("parity is not a homomorphism: {e}"))),
    };
    let pi = kernel_subgroup(&q, &hom)?;
    let (pi_rank, pi_torsion) = torsion_strings(&pi.kernel_presentation);
    report.stage2 = Some(StageTwo {
        index: pi.index(),
        kernel_generators: pi.kernel_presentation.generator_count(),
        kernel_relators: pi.kernel_presentation.relators().len(),
        kernel_betti1: pi_rank,
        kernel_torsion: pi_torsion,
    });
    if pi.index() != 2 {
        return Ok(stop(
            report,
            "stage 2",
            format!("parity has image of order {}", pi.index()),
        ));
    }

    // stage 3: avoidance subgroup
    let mut links = Vec::new();
    let mut kernel_links = Vec::new();
    for (w, o) in &input.links {
        match pi.rewrite(w) {
            Ok(k) => {
                links.push(LinkRecord {
                    word: q.format_word(w),
                    claimed_order: *o,
                    in_kernel: true,
                    kernel_word: pi.kernel_presentation.format_word(&k),
                });
                kernel_links.push((k, *o));
            }
            Err(_) => {
                links.push(LinkRecord {
                    word: q.format_word(w),
                    claimed_order: *o,
                    in_kernel: false,
                    kernel_word: String::new(),
                });
            }
        }
    }
    if links.iter().any(|l| !l.in_kernel) {
        let bad = links
            .iter()
            .find(|l| !l.in_kernel)
            .map(|l| l.word.clone())
            .unwrap_or_default();
        return Ok(stop(
            report,
            "stage 3",
            format!("link element {bad} is not in the index-two kernel"),
        ));
    }
    let (gamma, certificate) = match avoidance_subgroup(&pi.kernel_presentation, &kernel_links, &input.budget) {
        Ok(x) => x,
        Err(e) => return Ok(stop(report, "stage 3", e.to_string())),
    };
    let all_nontrivial = certificate.elements.iter().all(|e| e.image_order > 1);
    let orders_consistent = certificate
        .elements
        .iter()
        .all(|e| (e.claimed_order as usize).is_multiple_of(e.image_order));
    let (g_rank, g_torsion) = torsion_strings(&gamma.kernel_presentation);
    report.stage3 = Some(StageThree {
        surrogate: "finite-quotient surrogate for the profinite kernel",
        links,
        certificate,
        all_nontrivial,
        orders_consistent,
        subgroup_generators: gamma.kernel_presentation.generator_count(),
        subgroup_betti1: g_rank,
        subgroup_torsion: g_torsion,
    });
    if !all_nontrivial {
        return Ok(stop(report, "stage 3", "a link element maps trivially".into()));
    }
    if !orders_consistent {
        return Ok(stop(
            report,
            "stage 3",
            "an image order does not divide the claimed order".into(),
        ));
    }

    // stage 4: induce characters of the avoidance subgroup up to the quotient
    let base = CharacterBase::new(gamma.kernel_presentation.clone());
    let rank = base.abelianization.rank;
    let torsion = !base.abelianization.is_torsion_free();
    let vectors: Vec<Vec<Rational>> = match &input.characters {
        CharacterSource::Explicit(v) => v.clone(),
        CharacterSource::Sampled { count, seed, bound } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count)
                .map(|_| (0..rank).map(|_| sample_rational(&mut rng, *bound)).collect())
                .collect()
        }
    };
    let reps: Vec<Result<(InducedRecord, Representation), ConstructionError>> = vectors
        .par_iter()
        .map(|values| {
            let chi = if torsion {
                CharacterVector::on_free_part(base.clone(), values.clone())?
            } else {
                CharacterVector::new(base.clone(), values.clone())?
            };
            let w = character_rep(&chi)?;
            let up = induce(&gamma, &w)?;
            let v = induce(&pi, &up)?;
            let (irreducible, basis) = burnside(&v);
            let record = InducedRecord {
                character: values.iter().map(rat_string).collect(),
                free_part_only: torsion,
                dim: v.dim(),
                valid: v.validate().is_ok(),
                irreducible,
                algebra_dim: basis.dim,
                generator_images: q
                    .generators()
                    .iter()
                    .zip(v.matrices())
                    .map(|(name, m)| {
                        (
                            name.clone(),
                            m.to_rows().iter().map(|r| r.iter().map(rat_string).collect()).collect(),
                        )
                    })
                    .collect(),
            };
            Ok((record, v))
        })
        .collect();
    let mut induced = Vec::new();
    let mut built = Vec::new();
    for r in reps {
        match r {
            Ok((rec, v)) => {
                induced.push(rec);
                built.push(v);
            }
            Err(e) => return Ok(stop(report, "stage 4", e.to_string())),
        }
    }
    let k = built.len();
    let mut equivalence = vec![vec![true; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let eq = equivalent_semisimple(&built[i], &built[j])?;
            equivalence[i][j] = eq;
            equivalence[j][i] = eq;
        }
    }
    let family_nontrivial = (0..k).any(|i| (i + 1..k).any(|j| !equivalence[i][j]));
    let all_valid = induced.iter().all(|r| r.valid);
    report.stage4 = Some(StageFour {
        induced,
        equivalence,
        family_nontrivial,
    });
    if !all_valid {
        return Ok(stop(
            report,
            "stage 4",
            "an induced representation fails a relator".into(),
        ));
    }
    if k >= 2 && !family_nontrivial {
        return Ok(stop(
            report,
            "stage 4",
            "all induced representations are equivalent".into(),
        ));
    }
    Ok(report)
}

/// The free-group smoke chain: `⟨a, g |⟩`, `γ₁ = {g}`, no links, two
/// characters of the index-two kernel.
pub fn toy_descent_input() -> DescentInput {
    let p = Presentation::free(["a", "g"]).expect("valid names");
    let monodromy = Representation::new(
        p.clone(),
        vec![
            crate::linalg::RatMatrix::scalar(1, rat(2, 1)),
            crate::linalg::RatMatrix::scalar(1, rat(-1, 1)),
        ],
    )
    .expect("free group");
    DescentInput {
        presentation: p,
        gamma1: vec![Word::generator(1)],
        gamma2: vec![],
        monodromy,
        parity: vec![0, 1],
        links: vec![],
        allow_any_link_order: false,
        characters: CharacterSource::Explicit(vec![vec![rat(2, 1), rat(3, 1)], vec![rat(5, 1), rat(1, 3)]]),
        budget: SearchBudget::default(),
    }
}

/// `⟨x, y, g | x², y³, (xy)²⟩` with `γ₁ = {g}`: after the quotient the
/// index-two kernel is `S₃ * S₃`. The links are `x`, `y` and their images
/// under the deck involution; keeping all four nontrivial needs a permutation
/// quotient, and its kernel is free.
pub fn s3_link_descent_input() -> DescentInput {
    let p = crate::parse::parse_presentation("gens: x, y, g\nrels: x^2, y^3, (x y)^2").expect("valid presentation");
    let sign = |v: i64| crate::linalg::RatMatrix::scalar(1, rat(v, 1));
    let monodromy = Representation::new(p.clone(), vec![sign(-1), sign(1), sign(-1)]).expect("sign character");
    let g = Word::generator(2);
    DescentInput {
        presentation: p,
        gamma1: vec![Word::generator(2)],
        gamma2: vec![],
        monodromy,
        parity: vec![0, 0, 1],
        links: vec![
            (Word::generator(0), 2),
            (Word::generator(1), 3),
            (Word::generator(0).conjugate_by(&g), 2),
            (Word::generator(1).conjugate_by(&g), 3),
        ],
        allow_any_link_order: false,
        characters: CharacterSource::Sampled {
            count: 2,
            seed: 11,
            bound: DEFAULT_VALUE_BOUND,
        },
        budget: SearchBudget::default(),
    }
}
