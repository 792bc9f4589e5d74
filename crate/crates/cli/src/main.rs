//! `barhillel`: intersect weighted grammars with ε-automata, compute string
//! weights, and check the derivation/path correspondence from the shell.
//!
//! Exit codes: 0 success, 1 a check failed, 2 unreadable or malformed
//! input, 3 semiring or alphabet mismatch, 4 divergent ε-closure, 5 a
//! truncated sum did not converge.

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use barhillel::correspondence::{check_strong_equivalence, check_weak_equivalence, strings_up_to};
use barhillel::{Construction, Error, Family, IntersectionGrammar, JoinBounds, SemiringId, Wcfg, Wfsa};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "barhillel", version, about = "Weighted grammar / ε-automaton intersection toolkit")]
struct Cli {
    /// Semiring for inputs without a header; must agree with any header.
    #[arg(long, global = true, value_name = "NAME")]
    semiring: Option<SemiringId>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the intersection grammar and write it with a provenance sidecar.
    Intersect {
        #[arg(short = 'g', long)]
        grammar: PathBuf,
        #[arg(short = 'a', long)]
        automaton: PathBuf,
        /// Output grammar; provenance goes to OUT.prov.
        #[arg(short = 'o', long)]
        out: PathBuf,
        /// Use the classical construction, which ignores ε-arcs.
        #[arg(long)]
        legacy: bool,
        /// Keep useless rules.
        #[arg(long)]
        no_trim: bool,
    },
    /// Weight of a string under a grammar or an automaton.
    Weight {
        #[command(flatten)]
        model: OneModel,
        /// Symbols separated by spaces.
        #[arg(short = 's', long = "string")]
        string: String,
        /// Largest derivation size summed for grammars.
        #[arg(long, default_value_t = 100)]
        max_size: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Check the derivation/pair bijection and the string-weight identity.
    Check {
        #[arg(short = 'g', long)]
        grammar: PathBuf,
        #[arg(short = 'a', long)]
        automaton: PathBuf,
        /// Check the classical construction instead (string weights only).
        #[arg(long)]
        legacy: bool,
        #[arg(long, default_value_t = 6)]
        max_tree: usize,
        #[arg(long, default_value_t = 6)]
        max_path: usize,
        /// Largest derivation size for truncated string weights.
        #[arg(long, default_value_t = 150)]
        max_size: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Seed for the sampled strings; also labels the report line.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Strings to check; default: all strings up to length 2 plus ten
        /// sampled strings of length 3 or 4.
        #[arg(short = 's', long = "string")]
        strings: Vec<String>,
    },
    /// Sizes of a grammar, and of both intersections when an automaton is given.
    Stats {
        #[arg(short = 'g', long)]
        grammar: PathBuf,
        #[arg(short = 'a', long)]
        automaton: Option<PathBuf>,
    },
    /// Write a DOT rendering of a grammar, an automaton or a derivation.
    Render {
        #[command(flatten)]
        model: RenderInput,
        /// Bracketed derivation over the grammar given with -g.
        #[arg(short = 'd', long, requires = "grammar")]
        derivation: Option<PathBuf>,
        /// Provenance sidecar; defaults to GRAMMAR.prov when that exists.
        #[arg(long, requires = "derivation")]
        provenance: Option<PathBuf>,
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct OneModel {
    #[arg(short = 'g', long)]
    grammar: Option<PathBuf>,
    #[arg(short = 'a', long)]
    automaton: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RenderInput {
    #[arg(short = 'g', long)]
    grammar: Option<PathBuf>,
    #[arg(short = 'a', long)]
    automaton: Option<PathBuf>,
}

/// A failed command: message for standard error plus exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn from_error(context: &str, e: Error) -> Self {
        let code = match &e {
            Error::Semiring(barhillel::semiring::SemiringError::Mismatch(..)) | Error::AlphabetMismatch(_) => 3,
            Error::Divergent(_) => 4,
            _ => 2,
        };
        Failure::new(code, format!("{context}: {e}"))
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn load_grammar(path: &Path, semiring: Option<SemiringId>) -> Result<Wcfg, Failure> {
    Wcfg::parse(&read(path)?, semiring).map_err(|e| Failure::from_error(&path.display().to_string(), e))
}

fn load_automaton(path: &Path, semiring: Option<SemiringId>) -> Result<Wfsa, Failure> {
    Wfsa::parse(&read(path)?, semiring).map_err(|e| Failure::from_error(&path.display().to_string(), e))
}

/// Loads both models; when no semiring is forced, the grammar's decides.
fn load_pair(g: &Path, a: &Path, semiring: Option<SemiringId>) -> Result<(Wcfg, Wfsa), Failure> {
    let grammar = load_grammar(g, semiring)?;
    let automaton = load_automaton(a, semiring.or(Some(grammar.semiring())))?;
    Ok((grammar, automaton))
}

/// Splits a string into symbols. Whitespace separates symbols; a single
/// unknown token whose characters are all known symbols is read
/// character by character, so `ab` means `a b`.
fn split_string(text: &str, known: &dyn Fn(&str) -> bool) -> Result<Vec<String>, Failure> {
    let toks = barhillel::tokens(text);
    if let [only] = toks.as_slice() {
        if !known(only) && only.chars().count() > 1 && only.chars().all(|c| known(&c.to_string())) {
            return Ok(only.chars().map(|c| c.to_string()).collect());
        }
    }
    if let Some(bad) = toks.iter().find(|t| !known(t)) {
        return Err(Failure::new(2, format!("unknown symbol `{bad}` in \"{text}\"")));
    }
    Ok(toks)
}

fn prov_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".prov");
    PathBuf::from(s)
}

fn print_family_counts(gc: &IntersectionGrammar) -> Result<(), Failure> {
    let counts = gc.rule_family_counts().map_err(|e| Failure::from_error("counts", e))?;
    let closed = gc.closed_form_counts();
    println!("rule families ({} construction, before trimming):", gc.construction());
    for (family, n) in &counts {
        let tag = family.tag(gc.construction());
        let mark = if closed[family] == *n { "" } else { "  MISMATCH" };
        println!("  {tag}  {n:>8}  (closed form {}){mark}", closed[family]);
    }
    if let Some(lifted) = counts.get(&Family::Lifted) {
        println!("  lifted rules {lifted} <= |R|*|Q|^(1+longest rhs) = {}", gc.lifted_bound());
    }
    Ok(())
}

fn cmd_intersect(g: &Path, a: &Path, out: &Path, legacy: bool, no_trim: bool, s: Option<SemiringId>) -> CmdResult {
    let (grammar, automaton) = load_pair(g, a, s)?;
    let construction = if legacy { Construction::Legacy } else { Construction::Generalized };
    let gc = IntersectionGrammar::build(&grammar, &automaton, construction)
        .map_err(|e| Failure::from_error("intersection", e))?;
    print_family_counts(&gc)?;
    let gc = if no_trim { gc } else { gc.trim() };
    let rules = gc.grammar().rules().len();
    println!("{rules} rules written to {}", out.display());
    if rules == 0 {
        eprintln!("warning: the intersection grammar is empty");
    }
    write(out, &gc.grammar().to_text())?;
    write(&prov_path(out), &gc.provenance_text())?;
    Ok(0)
}

fn cmd_weight(model: &OneModel, string: &str, max_size: usize, tol: f64, s: Option<SemiringId>) -> CmdResult {
    if let Some(path) = &model.automaton {
        let a = load_automaton(path, s)?;
        let y = split_string(string, &|t| a.alphabet().contains(t))?;
        let w = a.string_weight(&y).map_err(|e| Failure::from_error("weight", e.into()))?;
        println!("{w}");
        println!("converged true (exact)");
        return Ok(0);
    }
    let path = model.grammar.as_ref().expect("clap requires one model");
    let g = load_grammar(path, s)?;
    let y = split_string(string, &|t| g.terminal_id(t).is_some())?;
    let tw = g.string_weight_truncated(&y, max_size, tol);
    println!("{}", tw.weight);
    println!("converged {} (derivations up to {max_size} rule applications)", tw.converged);
    if tw.converged {
        Ok(0)
    } else {
        eprintln!("error: the sum did not converge within size {max_size} at tolerance {tol}");
        Ok(5)
    }
}

/// All strings up to length 2 plus ten sampled strings of length 3 or 4.
fn default_strings(alphabet: &[String], seed: u64) -> Vec<Vec<String>> {
    let mut out = strings_up_to(alphabet, 2);
    if alphabet.is_empty() {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10 {
        let len = rng.gen_range(3..=4);
        let y: Vec<String> = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())].clone()).collect();
        if !out.contains(&y) {
            out.push(y);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    g: &Path,
    a: &Path,
    legacy: bool,
    bounds: JoinBounds,
    max_size: usize,
    tol: f64,
    seed: u64,
    strings: &[String],
    s: Option<SemiringId>,
) -> CmdResult {
    let (grammar, automaton) = load_pair(g, a, s)?;
    let mut alphabet: Vec<String> = grammar.terminals().to_vec();
    alphabet.extend(automaton.alphabet().iter().filter(|x| !grammar.terminals().contains(x)).cloned());
    let known = |t: &str| alphabet.iter().any(|x| x == t);
    let ys = if strings.is_empty() {
        default_strings(&alphabet, seed)
    } else {
        strings.iter().map(|t| split_string(t, &known)).collect::<Result<_, _>>()?
    };

    let mut ok = true;
    if legacy {
        println!("strong equivalence: skipped (the legacy construction has no derivation/path correspondence)");
    } else {
        let report = check_strong_equivalence(&grammar, &automaton, bounds)
            .map_err(|e| Failure::from_error("strong check", e))?;
        print!("{report}");
        println!("{}", report.machine_line(seed));
        ok &= report.passed();
    }
    let construction = if legacy { Construction::Legacy } else { Construction::Generalized };
    let weak = check_weak_equivalence(&grammar, &automaton, &ys, construction, max_size, tol)
        .map_err(|e| Failure::from_error("weak check", e))?;
    print!("{weak}");
    let mismatch = weak.entries.iter().any(|e| e.converged() && !e.matches);
    if !ok || mismatch {
        eprintln!("check failed");
        Ok(1)
    } else if !weak.all_converged() {
        eprintln!("error: some string weights did not converge within size {max_size}");
        Ok(5)
    } else {
        Ok(0)
    }
}

fn cmd_stats(g: &Path, a: Option<&Path>, s: Option<SemiringId>) -> CmdResult {
    let grammar = load_grammar(g, s)?;
    let eps_rules = grammar.rules().iter().filter(|r| r.rhs.is_empty()).count();
    let (trimmed, _) = grammar.trim();
    println!("grammar {}", g.display());
    println!("  semiring       {}", grammar.semiring());
    println!("  start          {}", grammar.nonterminal_name(grammar.start()));
    println!("  nonterminals   {}", grammar.num_nonterminals());
    println!("  terminals      {}", grammar.terminals().len());
    println!("  rules          {} ({eps_rules} epsilon)", grammar.rules().len());
    println!("  longest rhs    {}", grammar.longest_rhs());
    println!("  useful rules   {}", trimmed.rules().len());
    let Some(a) = a else { return Ok(0) };
    let automaton = load_automaton(a, Some(grammar.semiring()))?;
    println!("automaton {}", a.display());
    println!("  states         {}", automaton.num_states());
    println!(
        "  arcs           {} ({} epsilon)",
        automaton.arcs().len(),
        automaton.arcs().iter().filter(|x| x.label.is_epsilon()).count()
    );
    println!("  initial/final  {}/{}", automaton.initial_states().len(), automaton.final_states().len());
    for c in [Construction::Generalized, Construction::Legacy] {
        let gc = IntersectionGrammar::build(&grammar, &automaton, c).map_err(|e| Failure::from_error("stats", e))?;
        println!(
            "{c} intersection: {} rules, {} after trimming",
            gc.grammar().rules().len(),
            gc.trim().grammar().rules().len()
        );
    }
    Ok(0)
}

fn cmd_render(
    model: &RenderInput,
    derivation: Option<&Path>,
    provenance: Option<&Path>,
    out: &Path,
    s: Option<SemiringId>,
) -> CmdResult {
    let dot = match (derivation, &model.grammar, &model.automaton) {
        (Some(d), Some(g), _) => {
            let grammar = load_grammar(g, s)?;
            let tree = grammar
                .parse_bracketed(&read(d)?)
                .map_err(|e| Failure::from_error(&d.display().to_string(), e))?;
            let sidecar = provenance.map(Path::to_path_buf).unwrap_or_else(|| prov_path(g));
            let tags = if sidecar.exists() {
                let families = barhillel::intersection::parse_provenance(&read(&sidecar)?)
                    .map_err(|e| Failure::from_error(&sidecar.display().to_string(), e))?;
                if families.len() != grammar.rules().len() {
                    return Err(Failure::new(2, format!("{}: wrong number of rules", sidecar.display())));
                }
                Some(families.iter().map(|&(f, c)| f.tag(c)).collect::<Vec<_>>())
            } else {
                None
            };
            render::derivation(&grammar, &tree, tags.as_deref())
        }
        (_, Some(g), _) => render::grammar(&load_grammar(g, s)?),
        (_, _, Some(a)) => render::automaton(&load_automaton(a, s)?),
        _ => unreachable!("clap requires one model"),
    };
    write(out, &dot)?;
    Ok(0)
}

fn run(cli: Cli) -> CmdResult {
    let s = cli.semiring;
    match cli.command {
        Command::Intersect {
            grammar,
            automaton,
            out,
            legacy,
            no_trim,
        } => cmd_intersect(&grammar, &automaton, &out, legacy, no_trim, s),
        Command::Weight {
            model,
            string,
            max_size,
            tol,
        } => cmd_weight(&model, &string, max_size, tol, s),
        Command::Check {
            grammar,
            automaton,
            legacy,
            max_tree,
            max_path,
            max_size,
            tol,
            seed,
            strings,
        } => cmd_check(
            &grammar,
            &automaton,
            legacy,
            JoinBounds::new(max_tree, max_path),
            max_size,
            tol,
            seed,
            &strings,
            s,
        ),
        Command::Stats { grammar, automaton } => cmd_stats(&grammar, automaton.as_deref(), s),
        Command::Render {
            model,
            derivation,
            provenance,
            out,
        } => cmd_render(&model, derivation.as_deref(), provenance.as_deref(), &out, s),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
