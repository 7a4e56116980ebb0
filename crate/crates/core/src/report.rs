//! Versioned JSON envelopes and markdown summaries for pipeline reports.

use serde::Serialize;

use crate::constructions::{CoverSummary, DescentChainReport, Theorem1Report};
use crate::fpgroup::abelianization;
use crate::word::Presentation;

pub const SCHEMA: &str = "charvar-report/1";

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    kind: &'a str,
    #[serde(flatten)]
    report: &'a T,
}

/// Pretty JSON with the schema tag first. Field order follows the report
/// structs, so equal inputs give byte-identical output.
pub fn to_json<T: Serialize>(kind: &str, report: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope {
        schema: SCHEMA,
        kind,
        report,
    })
    .expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub generators: usize,
    pub relators: usize,
    pub rank: usize,
    pub torsion: Vec<String>,
}

pub fn group_summary(p: &Presentation) -> GroupSummary {
    let ab = abelianization(p);
    GroupSummary {
        generators: p.generator_count(),
        relators: p.relators().len(),
        rank: ab.rank,
        torsion: ab.torsion.iter().map(ToString::to_string).collect(),
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn group_markdown(g: &GroupSummary) -> String {
    format!(
        "| generators | relators | rank | torsion |\n|---|---|---|---|\n| {} | {} | {} | [{}] |\n",
        g.generators,
        g.relators,
        g.rank,
        g.torsion.join(", ")
    )
}

pub fn cover_markdown(c: &CoverSummary) -> String {
    let mut out = format!(
        "# Cyclic cover y^{} = f(x), deg f = {}\n\n| genus | betti1 | branch points | fixed space | A^N = I |\n|---|---|---|---|---|\n| {} | {} | {} | {} | {} |\n",
        c.n,
        c.deg_f,
        c.genus,
        c.betti1,
        c.effective_branch_points,
        c.fixed_space_dim,
        yes(c.action_order_divides_n)
    );
    if c.genus == 0 {
        out.push_str("\nwarning: genus 0, no character family\n");
    }
    out
}

pub fn theorem1_markdown(r: &Theorem1Report) -> String {
    let mut out = format!(
        "# Induced family, N = {}, deg f = {}\n\ngenus {}, betti1(cover) {}, betti1(total) {}, seed {}\n\n",
        r.cover.n, r.cover.deg_f, r.cover.genus, r.cover.betti1, r.betti1_total, r.seed
    );
    out.push_str("| sample | orbit distinct | irreducible | Res check | dim H1 | even |\n|---|---|---|---|---|---|\n");
    for s in &r.samples {
        match &s.certified {
            Some(c) => out.push_str(&format!(
                "| {} | yes | {} | {} | {} | {} |\n",
                s.index,
                yes(c.irreducible),
                yes(c.res_matches_orbit_sum),
                c.h1.dim_h1,
                yes(c.h1.is_even)
            )),
            None => out.push_str(&format!("| {} | no | - | - | - | - |\n", s.index)),
        }
    }
    let classes = equivalence_classes(&r.equivalence);
    out.push_str(&format!(
        "\nequivalence classes: {classes}\ngenericity failures: {}\nresult: {}\n",
        r.genericity_failure_fraction,
        if r.passed { "pass" } else { "FAIL" }
    ));
    for f in &r.failures {
        out.push_str(&format!("- {f}\n"));
    }
    out
}

fn equivalence_classes(m: &[Vec<Option<bool>>]) -> usize {
    let mut seen = vec![false; m.len()];
    let mut classes = 0;
    for i in 0..m.len() {
        if seen[i] || m[i][i].is_none() {
            continue;
        }
        classes += 1;
        for j in i..m.len() {
            if m[i][j] == Some(true) {
                seen[j] = true;
            }
        }
    }
    classes
}

pub fn descent_markdown(r: &DescentChainReport) -> String {
    let mut out = String::from("# Descent chain\n\n| stage | result |\n|---|---|\n");
    out.push_str(&format!(
        "| 1 Picard-Lefschetz | {} |\n",
        yes(r.stage1.predicates.holds() && r.stage1.monodromy_descends)
    ));
    if let Some(s) = &r.stage2 {
        out.push_str(&format!(
            "| 2 index-two kernel | index {}, betti1 {} |\n",
            s.index, s.kernel_betti1
        ));
    }
    if let Some(s) = &r.stage3 {
        out.push_str(&format!(
            "| 3 avoidance | quotient order {}, index {}, links separated: {} |\n",
            s.certificate.quotient_order,
            s.certificate.index,
            yes(s.all_nontrivial)
        ));
    }
    if let Some(s) = &r.stage4 {
        let dims: Vec<String> = s.induced.iter().map(|i| i.dim.to_string()).collect();
        out.push_str(&format!(
            "| 4 induction | dims [{}], nontrivial family: {} |\n",
            dims.join(", "),
            yes(s.family_nontrivial)
        ));
    }
    out.push_str(&format!("\nresult: {}\n", if r.passed { "pass" } else { "FAIL" }));
    for f in &r.failures {
        out.push_str(&format!("- {f}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_presentation;

    #[test]
    fn envelope_puts_schema_first() {
        let g = group_summary(&parse_presentation("gens: t\nrels: t^3").unwrap());
        let json = to_json("group", &g);
        assert!(json.starts_with("{\n  \"schema\": \"charvar-report/1\",\n  \"kind\": \"group\""));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rank"], 0);
        assert_eq!(v["torsion"][0], "3");
    }

    #[test]
    fn classes_count() {
        let m = vec![
            vec![Some(true), Some(true), Some(false)],
            vec![Some(true), Some(true), Some(false)],
            vec![Some(false), Some(false), Some(true)],
        ];
        assert_eq!(equivalence_classes(&m), 2);
    }
}
