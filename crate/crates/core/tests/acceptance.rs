//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Reference values are computed here independently of the library code paths
//! they check (Riemann–Hurwitz, Nielsen–Schreier, minor gcds, closed-form
//! tangent dimensions, Shapiro decomposition of the conjugation module).

use std::time::{Duration, Instant};

use charvar::constructions::{
    build_theorem1, descent_chain, s3_link_descent_input, toy_descent_input, Theorem1Config, Theorem1Family,
};
use charvar::fox::{h1_dimension, local_charvar_dim};
use charvar::fpgroup::betti1;
use charvar::linalg::{rat, smith_normal_form, IntMatrix, RatMatrix};
use charvar::parse::parse_presentation;
use charvar::rep::{burnside, character_orbit, character_rep, Representation};
use charvar::report::to_json;
use charvar::subgroup::{cyclic_cover_group, h1_action, kernel_subgroup, FiniteHom, FiniteTarget};
use charvar::word::{Presentation, Word};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// 2g − 2 = N(−2) + Σ (N − #fibre) over the branch points, infinity included
/// when N does not divide deg f.
fn riemann_hurwitz(n: i64, b: i64) -> i64 {
    let mut ramification = b * (n - 1);
    let inf = (-b).rem_euclid(n);
    if inf != 0 {
        ramification += n - inf.gcd(&n);
    }
    (ramification - 2 * n + 2) / 2
}

fn criterion1() -> Check {
    let mut detail = Vec::new();
    for (n, b) in [(2u32, 6usize), (2, 2), (3, 4)] {
        let start = Instant::now();
        let gwa = cyclic_cover_group(n, b).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let g = riemann_hurwitz(i64::from(n), b as i64);
        ensure(
            gwa.betti1() as i64 == 2 * g,
            format!("N={n} b={b}: betti1 {} but Riemann-Hurwitz gives g={g}", gwa.betti1()),
        )?;
        ensure(
            elapsed < Duration::from_secs(5),
            format!("N={n} b={b} took {elapsed:?}"),
        )?;
        detail.push(format!("N={n},b={b}: betti1={}", gwa.betti1()));
    }
    Ok(detail.join("; "))
}

fn criterion2() -> Check {
    let start = Instant::now();
    let gwa = cyclic_cover_group(2, 6).map_err(|e| e.to_string())?;
    let a = h1_action(&gwa).map_err(|e| e.to_string())?;
    let minus = IntMatrix::from_fn(4, 4, |i, j| BigInt::from(if i == j { -1 } else { 0 }));
    ensure(a == minus, format!("action matrix is\n{a}"))?;
    ensure(a.mul(&a).unwrap().is_identity(), "A^2 != I")?;
    // fixed space of A is zero iff A − I is nonsingular
    let shifted = a.to_rational().sub(&RatMatrix::identity(4));
    ensure(!shifted.determinant().unwrap().is_zero(), "A - I is singular")?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("A = -I on H1 of rank 4 ({elapsed:.2?})"))
}

/// `dim H¹(π₁X, Ad V_χ) = dim H¹(π₁C, 1) + Σ_{c≠0} dim H¹(π₁C, χ / χ∘γᶜ)` by
/// Shapiro's lemma, with each term a rank-one Fox computation on the cover.
fn shapiro_oracle(family: &Theorem1Family, chi_values: &[String]) -> Result<usize, String> {
    let values = chi_values
        .iter()
        .map(|s| s.parse().map_err(|_| format!("bad rational {s}")))
        .collect::<Result<Vec<_>, String>>()?;
    let chi = family.character(values).map_err(|e| e.to_string())?;
    let orbit = character_orbit(&chi, &family.action_matrix, family.cover.n).map_err(|e| e.to_string())?;
    let cover = &family.cover.cover_group;
    let mut total = 0;
    for twisted in &orbit {
        let quotient: Vec<_> = chi.values.iter().zip(&twisted.values).map(|(a, b)| a / b).collect();
        let psi = family.character(quotient).map_err(|e| e.to_string())?;
        let rep = character_rep(&psi).map_err(|e| e.to_string())?;
        total += h1_dimension(cover, &rep).map_err(|e| e.to_string())?.dim_h1;
    }
    Ok(total)
}

fn theorem1_json(seed: u64) -> Result<String, String> {
    let report = build_theorem1(&Theorem1Config::new(2, 6, 5, seed)).map_err(|e| e.to_string())?;
    Ok(to_json("theorem1", &report))
}

fn criterion3() -> Check {
    let start = Instant::now();
    let report = build_theorem1(&Theorem1Config::new(2, 6, 5, 7)).map_err(|e| e.to_string())?;
    ensure(report.passed, format!("failures: {:?}", report.failures))?;
    ensure(
        report.betti1_total == 0,
        format!("betti1 total {}", report.betti1_total),
    )?;
    ensure(report.cover.genus == 2, "genus != 2")?;
    let family = Theorem1Family::new(2, 6).map_err(|e| e.to_string())?;
    let mut dims = Vec::new();
    for s in &report.samples {
        let Some(c) = &s.certified else { continue };
        ensure(
            c.irreducible && c.dim == 2,
            format!("sample {}: not an irreducible rank-2 V", s.index),
        )?;
        ensure(
            c.res_matches_orbit_sum && c.res_words_checked == 50,
            format!("sample {}: restriction check", s.index),
        )?;
        ensure(
            c.equivalent_to_twist,
            format!("sample {}: V_chi vs V_(chi o gamma)", s.index),
        )?;
        ensure(
            c.h1.is_even && c.h1.dim_h1 >= 4,
            format!("sample {}: dim H1 {}", s.index, c.h1.dim_h1),
        )?;
        let oracle = shapiro_oracle(&family, &s.chi)?;
        ensure(
            oracle == c.h1.dim_h1,
            format!(
                "sample {}: dim H1 {} but the decomposition gives {oracle}",
                s.index, c.h1.dim_h1
            ),
        )?;
        dims.push(c.h1.dim_h1);
    }
    ensure(!dims.is_empty(), "no orbit-distinct samples")?;
    for i in 0..report.samples.len() {
        for j in 0..report.samples.len() {
            if i != j && !report.same_orbit[i][j] {
                if let Some(eq) = report.equivalence[i][j] {
                    ensure(!eq, format!("samples {i} and {j} in different orbits are equivalent"))?;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} certified samples, dim H1 {:?}, genericity failures {} ({elapsed:.2?})",
        dims.len(),
        dims,
        report.genericity_failure_fraction
    ))
}

fn random_irreducible(p: &Presentation, n: usize, rng: &mut ChaCha8Rng) -> Representation {
    loop {
        let mats: Vec<RatMatrix> = (0..p.generator_count())
            .map(|_| RatMatrix::from_fn(n, n, |_, _| rat(rng.gen_range(-3..=3), 1)))
            .collect();
        if mats.iter().any(|m| m.determinant().unwrap().is_zero()) {
            continue;
        }
        let Ok(r) = Representation::new(p.clone(), mats) else {
            continue;
        };
        if burnside(&r).0 {
            return r;
        }
    }
}

fn criterion4() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for r in 1..=3usize {
        let free = Presentation::new((1..=r).map(|i| format!("x{i}")).collect(), vec![]).unwrap();
        for n in 1..=3usize {
            if r == 1 && n > 1 {
                continue; // Z has no irreducible representations of dimension > 1
            }
            let rep = random_irreducible(&free, n, &mut rng);
            let got = local_charvar_dim(&rep).map_err(|e| e.to_string())?.dim_h1;
            let expected = (r - 1) * n * n + 1;
            ensure(got == expected, format!("F{r}, N={n}: {got} != {expected}"))?;
            checked += 1;
        }
    }
    let surface = parse_presentation("gens: a1, b1, a2, b2\nrels: [a1,b1][a2,b2]").unwrap();
    let pair = Presentation::free(["a", "b"]).unwrap();
    for n in [1usize, 2] {
        // (A, B, B, A) satisfies [A,B][B,A] = 1 and is irreducible with (A, B)
        let base = random_irreducible(&pair, n, &mut rng);
        let (a, b) = (base.matrices()[0].clone(), base.matrices()[1].clone());
        let rep = Representation::new(surface.clone(), vec![a.clone(), b.clone(), b, a]).map_err(|e| e.to_string())?;
        let got = local_charvar_dim(&rep).map_err(|e| e.to_string())?.dim_h1;
        let expected = 2 * n * n + 2;
        ensure(got == expected, format!("genus 2, N={n}: {got} != {expected}"))?;
        checked += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("{checked} closed forms matched ({elapsed:.2?})"))
}

fn criterion5() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut subgroups = 0;
    let mut words = 0;
    for r in 1..=4usize {
        let free = Presentation::new((1..=r).map(|i| format!("x{i}")).collect(), vec![]).unwrap();
        let mut homs = Vec::new();
        for n in 1..=6 {
            homs.push(FiniteHom::new(&free, FiniteTarget::cyclic(n), vec![1 % n; r]).unwrap());
        }
        for d in 2..=3 {
            let sym = FiniteTarget::symmetric(d);
            for _ in 0..4 {
                let images = (0..r).map(|_| rng.gen_range(0..sym.order())).collect();
                homs.push(FiniteHom::new(&free, sym.clone(), images).unwrap());
            }
        }
        for hom in homs {
            let s = kernel_subgroup(&free, &hom).map_err(|e| e.to_string())?;
            let index = s.index();
            ensure(index <= 6, "index above 6")?;
            // index = size of the image, counted directly
            let mut image = std::collections::BTreeSet::from([hom.target.identity()]);
            loop {
                let before = image.len();
                let current: Vec<usize> = image.iter().copied().collect();
                for e in current {
                    for &g in &hom.images {
                        image.insert(hom.target.mul(e, g));
                    }
                }
                if image.len() == before {
                    break;
                }
            }
            ensure(
                image.len() == index,
                format!("index {index} but image has {} elements", image.len()),
            )?;
            let expected = 1 + index * (r - 1);
            let rank = s.kernel_presentation.generator_count();
            ensure(
                rank == expected,
                format!("F{r}, index {index}: rank {rank} != {expected}"),
            )?;
            ensure(betti1(&s.kernel_presentation) == expected, "kernel betti1")?;
            for _ in 0..200 {
                let len = rng.gen_range(0..16);
                let raw = Word::reduce((0..len).map(|_| (rng.gen_range(0..r), if rng.gen_bool(0.5) { 1 } else { -1 })));
                let w = s.close_to_kernel(&raw);
                let rewritten = s.rewrite(&w).map_err(|e| e.to_string())?;
                ensure(s.to_ambient(&rewritten) == w, "rewrite round trip")?;
                words += 1;
            }
            subgroups += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("{subgroups} subgroups, {words} round trips ({elapsed:.2?})"))
}

fn det(m: &[Vec<BigInt>]) -> BigInt {
    if m.is_empty() {
        return BigInt::one();
    }
    let mut total = BigInt::zero();
    for (j, a) in m[0].iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigInt>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = a * det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn minor_gcd(a: &[Vec<BigInt>], k: usize) -> BigInt {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut g = BigInt::zero();
    for rs in subsets(rows, k) {
        for cs in subsets(cols, k) {
            let sub: Vec<Vec<BigInt>> = rs
                .iter()
                .map(|&i| cs.iter().map(|&j| a[i][j].clone()).collect())
                .collect();
            g = g.gcd(&det(&sub));
        }
    }
    g
}

fn criterion6() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..1000 {
        let rows = rng.gen_range(1..=4);
        let cols = rng.gen_range(1..=4);
        let a = IntMatrix::from_fn(rows, cols, |_, _| BigInt::from(rng.gen_range(-5..=5)));
        let snf = smith_normal_form(&a);
        let uav = snf.u.mul(&a).unwrap().mul(&snf.v).unwrap();
        ensure(uav == snf.d, format!("trial {trial}: U A V != D"))?;
        ensure(
            snf.u.determinant().unwrap().abs().is_one(),
            format!("trial {trial}: U not unimodular"),
        )?;
        ensure(
            snf.v.determinant().unwrap().abs().is_one(),
            format!("trial {trial}: V not unimodular"),
        )?;
        for i in 0..rows {
            for j in 0..cols {
                ensure(
                    i == j || snf.d.get(i, j).is_zero(),
                    format!("trial {trial}: D not diagonal"),
                )?;
            }
        }
        let diag = snf.invariant_factors();
        for w in diag.windows(2) {
            ensure(w[1].is_multiple_of(&w[0]), format!("trial {trial}: divisibility chain"))?;
        }
        let entries = a.to_rows();
        let mut product = BigInt::one();
        for k in 1..=rows.min(cols) {
            let expected = minor_gcd(&entries, k);
            if k <= diag.len() {
                product *= &diag[k - 1];
                ensure(product == expected, format!("trial {trial}: {k}-minor gcd"))?;
            } else {
                ensure(expected.is_zero(), format!("trial {trial}: rank"))?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("1000 matrices ({elapsed:.2?})"))
}

fn descent_jsons() -> Result<(String, String), String> {
    let toy = descent_chain(&toy_descent_input()).map_err(|e| e.to_string())?;
    let s3 = descent_chain(&s3_link_descent_input()).map_err(|e| e.to_string())?;
    Ok((to_json("descent", &toy), to_json("descent", &s3)))
}

fn criterion7() -> Check {
    let start = Instant::now();
    let mut detail = Vec::new();
    for (name, input) in [("toy", toy_descent_input()), ("S3-link", s3_link_descent_input())] {
        let report = descent_chain(&input).map_err(|e| e.to_string())?;
        ensure(report.passed, format!("{name}: {:?}", report.failures))?;
        ensure(
            report.stage1.predicates.holds() && report.stage1.monodromy_descends,
            format!("{name}: stage 1"),
        )?;
        let s2 = report.stage2.as_ref().ok_or(format!("{name}: no stage 2"))?;
        ensure(s2.index == 2, format!("{name}: index {}", s2.index))?;
        let s3 = report.stage3.as_ref().ok_or(format!("{name}: no stage 3"))?;
        ensure(s3.links.iter().all(|l| l.in_kernel), format!("{name}: link membership"))?;
        ensure(
            s3.certificate
                .elements
                .iter()
                .all(|e| e.image_order > 1 && (e.claimed_order as usize).is_multiple_of(e.image_order)),
            format!("{name}: avoidance"),
        )?;
        let s4 = report.stage4.as_ref().ok_or(format!("{name}: no stage 4"))?;
        ensure(
            s4.induced.len() >= 2 && s4.induced.iter().all(|r| r.valid),
            format!("{name}: induced validity"),
        )?;
        ensure(
            !s4.equivalence[0][1],
            format!("{name}: the two characters give equivalent representations"),
        )?;
        detail.push(format!(
            "{name}: quotient order {}, dim {}",
            s3.certificate.quotient_order, s4.induced[0].dim
        ));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("{} ({elapsed:.2?})", detail.join("; ")))
}

fn criterion8() -> Check {
    let a = theorem1_json(7)?;
    let b = theorem1_json(7)?;
    ensure(a == b, "theorem1 reports differ")?;
    let (t1, s1) = descent_jsons()?;
    let (t2, s2) = descent_jsons()?;
    ensure(t1 == t2 && s1 == s2, "descent reports differ")?;
    Ok(format!("{} + {} + {} bytes identical", a.len(), t1.len(), s1.len()))
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("cover genus", criterion1),
        ("deck action", criterion2),
        ("induced family", criterion3),
        ("tangent dimensions", criterion4),
        ("Reidemeister-Schreier", criterion5),
        ("Smith normal form", criterion6),
        ("descent chain", criterion7),
        ("determinism", criterion8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} [{name}]: PASS - {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL - {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
