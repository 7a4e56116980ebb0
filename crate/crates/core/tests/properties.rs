use charvar::constructions::{build_theorem1, Theorem1Config, Theorem1Family};
use charvar::fox::{coboundary, fox_jacobian, h1_dimension};
use charvar::fpgroup::validate_action;
use charvar::linalg::{rat, rat_int, IntMatrix, RatMatrix, Rational};
use charvar::parse::parse_presentation;
use charvar::rep::{
    algebra_closure, burnside, character_orbit, character_rep, equivalent_semisimple, induce, restrict,
    twist_by_action, CharacterBase, CharacterVector, Representation,
};
use charvar::subgroup::{cyclic_cover_group, fixed_space_dim, kernel_subgroup, FiniteHom, FiniteTarget};
use charvar::word::Presentation;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS: &[&str] = &[
    "gens: a, b\nrels:",
    "gens: t\nrels: t^3",
    "gens: a, b\nrels: [a,b]",
    "gens: a1, b1, a2, b2\nrels: [a1,b1][a2,b2]",
    "gens: x, y\nrels: x^2, y^3, (x y)^2",
    "gens: a, b, c\nrels: a b a^-1 b^-1 c",
];

fn corpus() -> Vec<Presentation> {
    CORPUS.iter().map(|s| parse_presentation(s).unwrap()).collect()
}

fn nonzero(rng: &mut ChaCha8Rng) -> Rational {
    let n = rng.gen_range(1..=7i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
    rat(n, rng.gen_range(1..=4))
}

/// Trivial, permutation representations through `S₃`, and a generic
/// character when the abelianization has free rank.
fn sample_reps(p: &Presentation, rng: &mut ChaCha8Rng) -> Vec<Representation> {
    let mut reps = vec![Representation::trivial(p.clone(), 2)];
    let perms = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    let gens = p.generator_count();
    let total = 6usize.pow(gens as u32);
    // exhaustive for at most two generators, a random sample otherwise
    let codes: Vec<usize> = if total <= 36 {
        (0..total).collect()
    } else {
        (0..24).map(|_| rng.gen_range(0..total)).collect()
    };
    for code in codes {
        let mats = (0..gens)
            .map(|i| {
                let perm = perms[code / 6usize.pow(i as u32) % 6];
                RatMatrix::from_fn(3, 3, |r, c| rat_int((perm[r] == c) as i64))
            })
            .collect();
        if let Ok(r) = Representation::new(p.clone(), mats) {
            reps.push(r);
        }
    }
    let base = CharacterBase::new(p.clone());
    let rank = base.abelianization.rank;
    if rank > 0 {
        let chi = CharacterVector::on_free_part(base, (0..rank).map(|_| nonzero(rng)).collect()).unwrap();
        reps.push(character_rep(&chi).unwrap());
    }
    reps
}

#[test]
fn coboundaries_are_cocycles() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in corpus() {
        for rep in sample_reps(&p, &mut rng) {
            let j = fox_jacobian(&p, &rep);
            for _ in 0..3 {
                let v: Vec<Rational> = (0..rep.dim()).map(|_| nonzero(&mut rng)).collect();
                let d = coboundary(&rep, &v);
                assert!(j.mul_vec(&d).iter().all(Zero::is_zero), "{p}");
            }
            let h = h1_dimension(&p, &rep).unwrap();
            assert!(h.dim_b1 <= h.dim_z1);
            assert_eq!(h.dim_h1, h.dim_z1 - h.dim_b1);
        }
    }
}

#[test]
fn restriction_and_induction_stay_representations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in corpus() {
        let gens = p.generator_count();
        for n in [2usize, 3] {
            let images = vec![1 % n; gens];
            let Ok(hom) = FiniteHom::new(&p, FiniteTarget::cyclic(n), images) else {
                continue;
            };
            let sub = kernel_subgroup(&p, &hom).unwrap();
            for rep in sample_reps(&p, &mut rng) {
                let res = restrict(&sub, &rep).unwrap();
                res.validate().unwrap();
                let ind = induce(&sub, &res).unwrap();
                ind.validate().unwrap();
                assert_eq!(ind.dim(), n * rep.dim());
            }
        }
    }
}

#[test]
fn induced_trivial_has_constant_fixed_vector() {
    let p = parse_presentation("gens: a, b\nrels:").unwrap();
    let hom = FiniteHom::new(&p, FiniteTarget::cyclic(3), vec![1, 2]).unwrap();
    let sub = kernel_subgroup(&p, &hom).unwrap();
    let w = Representation::trivial(sub.kernel_presentation.clone(), 1);
    let ind = induce(&sub, &w).unwrap();
    let ones = vec![rat_int(1); 3];
    for m in ind.matrices() {
        assert_eq!(m.mul_vec(&ones), ones);
    }

    let z = parse_presentation("gens: a\nrels:").unwrap();
    let hom = FiniteHom::new(&z, FiniteTarget::cyclic(2), vec![1]).unwrap();
    let sub = kernel_subgroup(&z, &hom).unwrap();
    let w = Representation::trivial(sub.kernel_presentation.clone(), 1);
    let ind = induce(&sub, &w).unwrap();
    assert_eq!(ind.matrices()[0], RatMatrix::from_i64_rows(&[vec![0, 1], vec![1, 0]]));
}

#[test]
fn equivalence_is_reflexive_symmetric_and_conjugation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in corpus() {
        let reps = sample_reps(&p, &mut rng);
        for a in &reps {
            assert!(equivalent_semisimple(a, a).unwrap());
            let d = a.dim();
            let conj = loop {
                let m = RatMatrix::from_fn(d, d, |_, _| rat_int(rng.gen_range(-2..=2)));
                if !m.determinant().unwrap().is_zero() {
                    break m;
                }
            };
            assert!(equivalent_semisimple(a, &a.conjugate(&conj).unwrap()).unwrap());
            for b in &reps {
                assert_eq!(
                    equivalent_semisimple(a, b).unwrap(),
                    equivalent_semisimple(b, a).unwrap()
                );
            }
        }
    }
}

#[test]
fn closure_dimension_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in corpus() {
        for rep in sample_reps(&p, &mut rng) {
            let basis = algebra_closure(&[&rep], None);
            assert!(basis.dim >= 1 && basis.dim <= rep.dim() * rep.dim());
            assert_eq!(basis.words.len(), basis.dim);
        }
    }
}

#[test]
fn small_covers_have_valid_actions() {
    for n in 2..=4u32 {
        for b in 1..=8usize {
            let cover = cyclic_cover_group(n, b).unwrap();
            // finite roots are totally ramified; infinity has gcd(N, b) preimages
            let (n_, b_) = (n as i64, b as i64);
            let twice_genus = b_ * (n_ - 1) + n_ - gcd(n_, b_) - 2 * n_ + 2;
            assert_eq!(cover.betti1() as i64, twice_genus, "N={n}, b={b}");
            let a = &cover.action_matrix;
            assert!(a.pow(n).unwrap().is_identity());
            assert_eq!(fixed_space_dim(a), 0);
            let diag = validate_action(&cover.cover_group, &cover.action, &[]);
            assert!(diag.is_ok(), "N={n}, b={b}: {:?}", diag.failures);
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn orbits_have_period_dividing_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (n, b) in [(2u32, 5usize), (3, 4), (4, 3)] {
        let cover = cyclic_cover_group(n, b).unwrap();
        let base = CharacterBase::new(cover.cover_group.clone());
        for _ in 0..100 {
            let chi =
                CharacterVector::new(base.clone(), (0..cover.betti1()).map(|_| nonzero(&mut rng)).collect()).unwrap();
            let orbit = character_orbit(&chi, &cover.action_matrix, n).unwrap();
            let period = (1..=n as usize).find(|&k| orbit[k % n as usize] == chi).unwrap();
            assert_eq!(n as usize % period, 0);
            let mut back = chi.clone();
            for _ in 0..n {
                back = twist_by_action(&back, &cover.action_matrix).unwrap();
            }
            assert_eq!(back, chi);
        }
    }
}

#[test]
fn inversion_twist_inverts_values() {
    let p = parse_presentation("gens: a1, b1, a2, b2\nrels: [a1,b1][a2,b2]").unwrap();
    let base = CharacterBase::new(p);
    let chi = CharacterVector::new(base, [2, 3, 5, 7].iter().map(|&v| rat_int(v)).collect()).unwrap();
    let minus = IntMatrix::from_i64_rows(&[
        vec![-1, 0, 0, 0],
        vec![0, -1, 0, 0],
        vec![0, 0, -1, 0],
        vec![0, 0, 0, -1],
    ]);
    let twisted = twist_by_action(&chi, &minus).unwrap();
    let expected: Vec<Rational> = [2, 3, 5, 7].iter().map(|&v| rat(1, v)).collect();
    assert_eq!(twisted.values, expected);
}

#[test]
fn genus_two_cover_characters_validate() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cover = cyclic_cover_group(2, 6).unwrap();
    let base = CharacterBase::new(cover.cover_group.clone());
    for _ in 0..10 {
        let chi = CharacterVector::new(base.clone(), (0..4).map(|_| nonzero(&mut rng)).collect()).unwrap();
        let rep = character_rep(&chi).unwrap();
        rep.validate().unwrap();
        for r in cover.cover_group.relators() {
            assert!(rep.evaluate(r).is_identity());
        }
    }
}

#[test]
fn three_fold_cover_family() {
    let report = build_theorem1(&Theorem1Config::new(3, 4, 3, 9)).unwrap();
    assert!(report.passed, "{:?}", report.failures);
    assert_eq!(report.cover.genus, 3);
    assert_eq!(report.betti1_total, 0);
    let g = report.cover.genus;
    // Shapiro: 2g from the trivial twist, 2g - 2 from each of the other two
    let expected = 2 * g + 2 * (2 * g - 2);
    let mut certified = 0;
    for s in &report.samples {
        if let Some(c) = &s.certified {
            assert_eq!(c.dim, 3);
            assert!(c.irreducible && c.res_matches_orbit_sum);
            assert_eq!(c.h1.dim_h1, expected);
            certified += 1;
        }
    }
    assert!(certified > 0);
}

#[test]
fn restriction_of_induced_is_the_orbit_sum() {
    let family = Theorem1Family::new(2, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..3 {
        let chi = family.character((0..4).map(|_| nonzero(&mut rng)).collect()).unwrap();
        let v = family.induced(&chi).unwrap();
        let orbit = family.orbit(&chi).unwrap();
        assert_eq!(v.dim(), 2);
        assert!(family.check_restriction(&v, &orbit, 30, &mut rng).unwrap());
    }
}

#[test]
fn burnside_agrees_with_exact_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f2 = Presentation::free(["a", "b"]).unwrap();
    for _ in 0..40 {
        let n = rng.gen_range(1..=3);
        let mats: Vec<RatMatrix> = (0..2)
            .map(|_| loop {
                // sparse entries make reducible samples common
                let m = RatMatrix::from_fn(n, n, |i, j| {
                    if i == j || rng.gen_bool(0.3) {
                        rat(rng.gen_range(1..=4), rng.gen_range(1..=3))
                    } else {
                        rat_int(0)
                    }
                });
                if !m.determinant().unwrap().is_zero() {
                    break m;
                }
            })
            .collect();
        let r = Representation::new(f2.clone(), mats).unwrap();
        let exact = algebra_closure(&[&r], None).dim == n * n;
        assert_eq!(burnside(&r).0, exact);
        assert!(equivalent_semisimple(&r, &r).unwrap());
    }
}
