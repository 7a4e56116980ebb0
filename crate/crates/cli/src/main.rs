use std::path::PathBuf;
use std::process::ExitCode;

use charvar::constructions::{
    build_theorem1, cover_summary, descent_chain, s3_link_descent_input, toy_descent_input, Theorem1Config,
};
use charvar::fox::{adjoint, h1_dimension, H1Report};
use charvar::linalg::{RatMatrix, Rational};
use charvar::rep::{burnside, character_rep, induce, CharacterBase, CharacterVector, Representation};
use charvar::report::{
    cover_markdown, descent_markdown, group_markdown, group_summary, theorem1_markdown, to_json, GroupSummary,
};
use charvar::subgroup::{cyclic_cover_group, kernel_subgroup, FiniteHom, FiniteTarget};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod config;

#[derive(Parser)]
#[command(
    name = "charvar",
    version,
    about = "Exact computations with representations of finitely presented groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the report here instead of stdout. For `theorem1` and `descent`
    /// in JSON mode a markdown summary is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Abelianization of a presentation file.
    Group { file: String },
    /// Fundamental group of y^N = f(x) and its deck action on H1.
    Cover {
        #[arg(long = "N")]
        n: Option<u32>,
        /// Number of distinct roots of f.
        #[arg(long)]
        degf: Option<usize>,
        #[arg(long)]
        config: Option<String>,
    },
    /// Induced family on the semidirect product of a cyclic cover.
    Theorem1 {
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long)]
        degf: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<String>,
    },
    /// Four-stage descent chain from a JSON config or a built-in example.
    Descent {
        #[arg(required_unless_present = "example", conflicts_with = "example")]
        config: Option<String>,
        #[arg(long, value_enum)]
        example: Option<Example>,
        /// Largest permutation degree tried by the avoidance search.
        #[arg(long)]
        budget_degree: Option<usize>,
    },
    /// Twisted first cohomology of a presentation with coefficients in a
    /// representation (trivial one-dimensional by default).
    H1 {
        file: String,
        /// JSON list of matrices, one per generator.
        #[arg(long)]
        rep: Option<String>,
        /// Use the adjoint module of the representation.
        #[arg(long)]
        adjoint: bool,
    },
    /// Induce a character from the kernel of a map onto Z/N.
    Induce {
        file: String,
        #[arg(long = "N")]
        n: usize,
        /// Image in Z/N of each generator, comma separated.
        #[arg(long, value_delimiter = ',')]
        images: Vec<usize>,
        /// Character values on the free part of the kernel's H1; trivial if
        /// omitted.
        #[arg(long)]
        chi: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    Toy,
    S3,
}

enum Failure {
    Compute(String),
    Input(String),
}

struct Output {
    kind: &'static str,
    json: String,
    markdown: String,
    /// First failed certificate, if any; the report is still written.
    failed: Option<String>,
    summary_file: bool,
}

impl Output {
    fn new<T: Serialize>(kind: &'static str, report: &T, markdown: String) -> Self {
        Output {
            kind,
            json: to_json(kind, report),
            markdown,
            failed: None,
            summary_file: false,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli.command).and_then(|out| emit(&cli, &out).map(|()| out));
    match result {
        Ok(Output { failed: None, .. }) => ExitCode::SUCCESS,
        Ok(Output {
            kind, failed: Some(f), ..
        }) => {
            eprintln!("{kind}: certificate failed: {f}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> Result<(), Failure> {
    let body = match cli.format {
        Format::Json => &out.json,
        Format::Md => &out.markdown,
    };
    let Some(path) = &cli.out else {
        print!("{body}");
        return Ok(());
    };
    let write =
        |p: &PathBuf, s: &str| std::fs::write(p, s).map_err(|e| Failure::Input(format!("{}: {e}", p.display())));
    write(path, body)?;
    if out.summary_file && cli.format == Format::Json {
        write(&path.with_extension("md"), &out.markdown)?;
    }
    Ok(())
}

fn input<T>(r: Result<T, String>) -> Result<T, Failure> {
    r.map_err(Failure::Input)
}

fn run(cmd: &Command) -> Result<Output, Failure> {
    match cmd {
        Command::Group { file } => {
            let p = input(config::presentation_file(file))?;
            let g: GroupSummary = group_summary(&p);
            Ok(Output::new("group", &g, group_markdown(&g)))
        }
        Command::Cover { n, degf, config } => {
            let cfg = input(config::run_config(config.as_deref()))?;
            let n = input(n.or(cfg.n).ok_or_else(|| "--N is required".to_string()))?;
            let b = input(degf.or(cfg.degf).ok_or_else(|| "--degf is required".to_string()))?;
            if n < 2 || b == 0 {
                return Err(Failure::Input("need N >= 2 and deg f >= 1".into()));
            }
            let gwa = cyclic_cover_group(n, b).map_err(|e| Failure::Compute(e.to_string()))?;
            let c = cover_summary(&gwa).map_err(|e| Failure::Compute(e.to_string()))?;
            let mut out = Output::new("cover", &c, cover_markdown(&c));
            if c.riemann_hurwitz_genus != Some(c.genus) {
                out.failed = Some(format!("genus {} disagrees with Riemann-Hurwitz", c.genus));
            } else if !c.action_order_divides_n {
                out.failed = Some(format!("deck action does not have order dividing {n}"));
            } else if c.fixed_space_dim != 0 {
                out.failed = Some(format!(
                    "deck action fixes a {}-dimensional subspace",
                    c.fixed_space_dim
                ));
            }
            if c.genus == 0 {
                eprintln!("warning: genus 0 cover, no character family");
            }
            Ok(out)
        }
        Command::Theorem1 {
            n,
            degf,
            samples,
            seed,
            config,
        } => {
            let cfg = input(config::run_config(config.as_deref()))?;
            let n = input(n.or(cfg.n).ok_or_else(|| "--N is required".to_string()))?;
            let b = input(degf.or(cfg.degf).ok_or_else(|| "--degf is required".to_string()))?;
            let mut tc = Theorem1Config::new(
                n,
                b,
                samples.or(cfg.samples).unwrap_or(5),
                seed.or(cfg.seed).unwrap_or(0),
            );
            if let Some(bound) = cfg.value_bound {
                if bound < 1 {
                    return Err(Failure::Input("value_bound must be positive".into()));
                }
                tc.value_bound = bound;
            }
            let report = build_theorem1(&tc).map_err(|e| Failure::Compute(e.to_string()))?;
            let mut out = Output::new("theorem1", &report, theorem1_markdown(&report));
            out.failed = report.first_failure().map(str::to_string);
            out.summary_file = true;
            Ok(out)
        }
        Command::Descent {
            config,
            example,
            budget_degree,
        } => {
            let mut di = match (config, example) {
                (Some(path), _) => input(config::descent_file(path))?,
                (None, Some(Example::Toy)) => toy_descent_input(),
                (None, Some(Example::S3)) => s3_link_descent_input(),
                (None, None) => return Err(Failure::Input("a config file or --example is required".into())),
            };
            if let Some(d) = budget_degree {
                if *d == 0 {
                    return Err(Failure::Input("--budget-degree must be positive".into()));
                }
                di.budget.max_degree = *d;
            }
            let report = descent_chain(&di).map_err(|e| Failure::Compute(e.to_string()))?;
            let mut out = Output::new("descent", &report, descent_markdown(&report));
            out.failed = report.first_failure().map(str::to_string);
            out.summary_file = true;
            Ok(out)
        }
        Command::H1 { file, rep, adjoint: ad } => {
            let p = input(config::presentation_file(file))?;
            let r = match rep {
                Some(path) => input(config::representation_file(&p, path))?,
                None => Representation::trivial(p.clone(), 1),
            };
            let module = if *ad { adjoint(&r) } else { r };
            let h = h1_dimension(&p, &module).map_err(|e| Failure::Compute(e.to_string()))?;
            let report = H1Output {
                generators: p.generator_count(),
                relators: p.relators().len(),
                adjoint: *ad,
                h1: h,
            };
            let md = format!(
                "| module dim | dim Z1 | dim B1 | dim H1 |\n|---|---|---|---|\n| {} | {} | {} | {} |\n",
                report.h1.module_dim, report.h1.dim_z1, report.h1.dim_b1, report.h1.dim_h1
            );
            Ok(Output::new("h1", &report, md))
        }
        Command::Induce { file, n, images, chi } => {
            let p = input(config::presentation_file(file))?;
            if *n == 0 || images.len() != p.generator_count() || images.iter().any(|&i| i >= *n) {
                return Err(Failure::Input(format!(
                    "--images needs {} residues mod {n}",
                    p.generator_count()
                )));
            }
            let hom = FiniteHom::new(&p, FiniteTarget::cyclic(*n), images.clone())
                .map_err(|e| Failure::Input(e.to_string()))?;
            let sub = kernel_subgroup(&p, &hom).map_err(|e| Failure::Compute(e.to_string()))?;
            let base = CharacterBase::new(sub.kernel_presentation.clone());
            let rank = base.abelianization.rank;
            let values = match chi {
                Some(text) => input(config::rational_list(text))?,
                None => vec![Rational::from_integer(1.into()); rank],
            };
            let chi = CharacterVector::on_free_part(base, values).map_err(|e| Failure::Input(e.to_string()))?;
            let w = character_rep(&chi).map_err(|e| Failure::Compute(e.to_string()))?;
            let v = induce(&sub, &w).map_err(|e| Failure::Compute(e.to_string()))?;
            let (irreducible, basis) = burnside(&v);
            let report = InduceOutput {
                index: sub.index(),
                kernel_generators: sub.kernel_presentation.generator_count(),
                kernel_rank: rank,
                chi: chi.values.iter().map(ToString::to_string).collect(),
                dim: v.dim(),
                irreducible,
                algebra_dim: basis.dim,
                matrices: v.matrices().iter().map(rows).collect(),
            };
            let md = format!(
                "| index | kernel rank | dim | irreducible | algebra dim |\n|---|---|---|---|---|\n| {} | {} | {} | {} | {} |\n",
                report.index,
                report.kernel_rank,
                report.dim,
                if irreducible { "yes" } else { "no" },
                report.algebra_dim
            );
            Ok(Output::new("induce", &report, md))
        }
    }
}

fn rows(m: &RatMatrix) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect())
        .collect()
}

#[derive(Serialize)]
struct H1Output {
    generators: usize,
    relators: usize,
    adjoint: bool,
    #[serde(flatten)]
    h1: H1Report,
}

#[derive(Serialize)]
struct InduceOutput {
    index: usize,
    kernel_generators: usize,
    kernel_rank: usize,
    chi: Vec<String>,
    dim: usize,
    irreducible: bool,
    algebra_dim: usize,
    matrices: Vec<Vec<Vec<String>>>,
}
