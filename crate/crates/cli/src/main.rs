use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use galois_points::catalog::{
    fermat_quartic, gk, hermitian, perturb, skabelund_ree, skabelund_suzuki, Perturbation,
    ReeConfig, Scenario, ScenarioDoc,
};
use galois_points::pipeline::{run, Report, RunOptions};
use galois_points::Error;

#[derive(Parser)]
#[command(name = "galois-points", version, about = "Verify Galois-point criteria on curves over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in scenarios.
    List {
        /// Only entries whose name contains this string.
        filter: Option<String>,
    },
    /// Run every declared check on a scenario.
    Verify(Box<VerifyArgs>),
    /// Describe a condition and the evidence it reports.
    Explain { id: String },
}

#[derive(Args)]
struct VerifyArgs {
    /// Built-in scenario name; omit with --scenario-file.
    scenario: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    q0: Option<u64>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    s: Option<u64>,
    #[arg(long)]
    h: Option<u64>,
    /// Use the other cube root of unity (fermat-quartic).
    #[arg(long)]
    alt_root: bool,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sample_degree: Option<u32>,
    /// Largest group order the closure may reach.
    #[arg(long, default_value_t = galois_points::autos::DEFAULT_GROUP_CAP)]
    cap: usize,
    /// Fibers sampled in the invariance check of each witness.
    #[arg(long, default_value_t = galois_points::criterion::DEFAULT_SAMPLE_COUNT)]
    sample_count: usize,
    /// JSON scenario document.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// JSON group configuration for skabelund-ree.
    #[arg(long)]
    generators: Option<PathBuf>,
    /// Negative control: one of b, c, d, e, f.
    #[arg(long)]
    perturb: Option<String>,
    /// Also check the single-point variant at this place, e.g. "(0:1:1)".
    #[arg(long)]
    outer: Option<String>,
    /// Record per-stage wall time in the report.
    #[arg(long)]
    timing: bool,
}

struct Entry {
    name: &'static str,
    params: &'static str,
    degree: &'static str,
    statement: &'static str,
}

const ENTRIES: &[Entry] = &[
    Entry {
        name: "gk",
        params: "--q prime power, --h dividing q^2-q+1 (default 1)",
        degree: "q^3+1",
        statement: "quotients of the Giulietti-Korchmaros curve by H have two outer Galois points",
    },
    Entry {
        name: "hermitian",
        params: "--q prime power, --s dividing q+1 (default 1)",
        degree: "q+1",
        statement: "y^m = x^q + x (m = (q+1)/s) has two Galois points; checked on the Hermitian cover",
    },
    Entry {
        name: "skabelund-suzuki",
        params: "--q0 power of 2, q = 2 q0^2, --h dividing q-2q0+1 (default 1)",
        degree: "q^2+1",
        statement: "quotients of the Skabelund cover of the Suzuki curve have two Galois points",
    },
    Entry {
        name: "skabelund-ree",
        params: "--q0 power of 3, q = 3 q0^2, --h dividing q-3q0+1, --generators FILE (required)",
        degree: "q^3+1",
        statement: "Skabelund cover of the Ree curve; groups must be supplied externally",
    },
    Entry {
        name: "fermat-quartic",
        params: "--p prime other than 2 and 3, --alt-root for the other cube root of unity",
        degree: "4",
        statement: "the quotient y^2 + x^3 + 1 = 0 of x^3 + y^4 + 1 = 0 by y -> -y has two Galois points",
    },
];

const EXPLAIN: &[(&[&str], &str, &str)] = &[
    (&["a"], "C/G1 and C/G2 are rational curves.",
     "Decided by a witness w_i fixed by G_i: over the sample field every fiber of w_i has at most |G_i| places, some fiber has exactly |G_i|, and w_i is G_i-invariant on seeded fibers. Evidence: witness, fiber_histogram, max_fiber, violation, failure."),
    (&["b"], "G1 ∩ G2 = {1}.",
     "Intersection of the closed groups, compared by action on the probe places. Evidence: intersection_order, g1_order, g2_order."),
    (&["c"], "P1 + Σ_{σ∈G1} σ(P2) = P2 + Σ_{τ∈G2} τ(P1).",
     "Exact divisor equality. Evidence: lhs, rhs as [place, multiplicity] lists, degree."),
    (&["a'", "a-prime"], "C/G1 and C/G2 are rational, for the groups Ĝ_i = H ⋊ G_i.",
     "Same method as (a), with witnesses the H-norms of w_i."),
    (&["b'", "b-prime"], "G1 ∩ G2 = H, for the groups Ĝ_i.",
     "Evidence: intersection_order, h_order."),
    (&["c'", "c-prime"], "Σ_{h∈H} h(P1) + Σ_{σ∈G1} σ(P2) = Σ_{h∈H} h(P2) + Σ_{τ∈G2} τ(P1), for the groups Ĝ_i.",
     "Exact divisor equality on the curve. Evidence: lhs, rhs, degree."),
    (&["d'", "d-prime"], "HP1 ≠ HP2.",
     "Evidence: orbit sizes and whether the H-orbits coincide."),
    (&["d"], "H ∩ G1G2 = {1}.",
     "Counts the elements of H in the product set G1G2, which must be the identity alone. Evidence: product_size, h_elements_in_product."),
    (&["e"], "HG_i = H ⋊ G_i for i = 1, 2.",
     "H normalized by G_i with trivial intersection. Evidence: verdict per i (Semidirect, Direct, NotNormal, NontrivialIntersection, NotAGroup)."),
    (&["f"], "HP1 ≠ HP2.",
     "Evidence: orbit sizes and whether the H-orbits coincide."),
    (&["equivalence"], "The four conditions on the curve agree with (a)(b)(c) on C/H.",
     "Pushforward of both sides of (c') equals |H| times the downstairs sides, pullback of the downstairs sides gives (c') back, n·D = n·D' iff D = D', and the downstairs (b)(c) verdicts agree with (b')(c')."),
    (&["descent"], "Conditions (d)(e)(f) together with (a)(b)(c) yield the four conditions for H ⋊ G_i.",
     "Fails only if the descent and the direct check disagree. Evidence: hat_orders, expected_orders."),
    (&["model"], "The quotient by H maps onto the declared plane model.",
     "Invariant coordinates send every sample place to the model, are constant on H-orbits, have largest fiber |H|, and separate the images of P1 and P2."),
    (&["orbit-sum"], "Σ_{σ∈G1} σ(Q) = Σ_{τ∈G2} τ(Q) for the given place Q.",
     "Exact divisor equality. Evidence: lhs, rhs."),
    (&["preserves-curve"], "Every group element maps the probe places to places of the curve.",
     "Evidence: images_checked, off_curve examples."),
    (&["degree"], "The plane model has degree |G1| + 1.",
     "Compares the derived degree with the expected formula."),
];

fn parse_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn build_doc(a: &VerifyArgs) -> Result<ScenarioDoc> {
    if let Some(path) = &a.scenario_file {
        return parse_json(path);
    }
    let name = a
        .scenario
        .as_deref()
        .context("give a scenario name or --scenario-file")?;
    let doc = match name {
        "gk" => gk(a.q.unwrap_or(2), a.h.unwrap_or(1))?,
        "hermitian" => hermitian(a.q.unwrap_or(2), a.s.unwrap_or(1))?,
        "skabelund-suzuki" => skabelund_suzuki(a.q0.unwrap_or(2), a.h.unwrap_or(1))?,
        "skabelund-ree" => {
            let cfg: Option<ReeConfig> = a.generators.as_ref().map(parse_json).transpose()?;
            skabelund_ree(a.q0.unwrap_or(3), a.h.unwrap_or(1), cfg)?
        }
        "fermat-quartic" => fermat_quartic(a.p.unwrap_or(7), usize::from(a.alt_root))?,
        other => anyhow::bail!("unknown scenario `{other}`; see `galois-points list`"),
    };
    Ok(doc)
}

fn verify(a: &VerifyArgs) -> Result<Report> {
    let mut doc = build_doc(a)?;
    if let Some(k) = &a.perturb {
        doc = perturb(doc, k.parse::<Perturbation>()?)?;
    }
    let scenario = Scenario::from_doc_with(doc, a.sample_degree)?;
    let opts = RunOptions {
        seed: a.seed,
        cap: a.cap,
        sample_count: a.sample_count,
        outer: a.outer.clone(),
        timing: a.timing,
    };
    Ok(run(&scenario, &opts)?)
}

fn print_text(r: &Report) {
    let j = &r.json;
    let f = &j["field"];
    println!(
        "{} {} over GF({}^{}), test degree {}, sample degree {}",
        j["scenario"].as_str().unwrap_or(""),
        j["params"],
        f["p"],
        f["N"],
        f["test_degree"],
        f["sample_degree"],
    );
    println!(
        "P1 = {}, P2 = {}, groups {}",
        j["places"]["p1"].as_str().unwrap_or(""),
        j["places"]["p2"].as_str().unwrap_or(""),
        j["derived"]["group_orders"],
    );
    for c in &r.conditions {
        let mark = if c.passed() { "PASS" } else { "FAIL" };
        println!("  [{mark}] {}/{}", c.stage, c.id);
    }
    if let Some(flags) = j["flags"].as_array().filter(|f| !f.is_empty()) {
        let names: Vec<&str> = flags.iter().filter_map(Value::as_str).collect();
        println!("flags: {}", names.join(", "));
    }
    println!(
        "verdict: {} (degree {})",
        if r.passed() { "PASS" } else { "FAIL" },
        j["derived"]["degree"]
    );
}

fn report_error(e: &anyhow::Error, as_json: bool) {
    let kind = e
        .downcast_ref::<Error>()
        .map(Error::kind)
        .or_else(|| {
            e.downcast_ref::<galois_points::catalog::CatalogError>()
                .map(|c| Error::Catalog(c.clone()).kind())
        })
        .unwrap_or("ConfigurationError");
    if as_json {
        let v = json!({"error": {"kind": kind, "message": format!("{e:#}")}});
        println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
    } else {
        eprintln!("error [{kind}]: {e:#}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { filter } => {
            for e in ENTRIES
                .iter()
                .filter(|e| filter.as_deref().is_none_or(|f| e.name.contains(f)))
            {
                println!("{:<18} degree {:<6} {}", e.name, e.degree, e.statement);
                println!("{:<18} {}", "", e.params);
            }
            ExitCode::SUCCESS
        }
        Command::Explain { id } => match EXPLAIN.iter().find(|(ids, _, _)| ids.contains(&id.as_str())) {
            Some((ids, statement, evidence)) => {
                println!("({}) {statement}", ids[0]);
                println!("{evidence}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown condition `{id}`");
                ExitCode::from(2)
            }
        },
        Command::Verify(args) => match verify(&args) {
            Ok(r) => {
                if args.json {
                    println!("{}", serde_json::to_string_pretty(&r.json).expect("serializable"));
                } else {
                    print_text(&r);
                }
                ExitCode::from(r.exit_code() as u8)
            }
            Err(e) => {
                report_error(&e, args.json);
                ExitCode::from(2)
            }
        },
    }
}
