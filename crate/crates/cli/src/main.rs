mod selftest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ptolemy_core::automorphism::{induced_automorphism, is_identity, surface_group, truncate};
use ptolemy_core::chains::{bar_boundary, BarChain, FreeGroup};
use ptolemy_core::fatgraph::{
    caterpillar, word_string, z_chain, zeta_chain, FatgraphError, GenCheck, MarkedFatgraph, MoveSequence,
};
use ptolemy_core::hall::{surface_names, HallBasis};
use ptolemy_core::homomorphisms::{
    classical_tau, iota, k1_closed_form, m_tilde_moves, morita_free, trivector_as_johnson,
    HomError, ReducedKoszul3, TauRoute,
};
use ptolemy_core::nilpotent::{FreeWord, NilpotentGroup};
use ptolemy_core::rational::Rational;
use ptolemy_core::registry::Registry;
use ptolemy_core::search::{torelli_products, trivial_at};
use ptolemy_core::sw::sw;
use ptolemy_core::wedge::WedgeChain;

#[derive(Parser)]
#[command(name = "ptolemy", version, about = "Morita and Johnson extensions on Whitehead move sequences")]
struct Cli {
    /// Genus of the default fixture and of algebraic commands.
    #[arg(long, global = true, default_value_t = 1)]
    genus: usize,
    /// Level k of the homomorphisms; nilpotency class for algebraic commands.
    #[arg(long, short = 'k', global = true, default_value_t = 1)]
    class: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Length bound for searched sequences.
    #[arg(long, global = true, default_value_t = 10)]
    depth: usize,
    #[arg(long, global = true, value_enum, default_value_t = GenArg::Pi)]
    gen_check: GenArg,
    /// Marked fatgraph file; defaults to the caterpillar of the given genus.
    #[arg(long, global = true)]
    fixture: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenArg {
    Pi,
    H,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the marking and print the diagnostic report.
    Validate,
    /// Print Z_G and certify its boundary.
    Zchain,
    /// Print T_W for every move of a sequence and certify the boundaries.
    Tchain { moves: PathBuf },
    /// Apply a sequence and print the resulting marked fatgraph.
    ApplySeq {
        moves: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// M~_k as a T-chain sum and its reduced Koszul value m~_k.
    Morita { moves: PathBuf },
    /// tau~_k by both routes, and tau_k when the sequence is a loop in M[k].
    Johnson { moves: PathBuf },
    /// bch(a, b) of two Lie elements in bracket notation.
    Bch {
        a: String,
        b: String,
        /// Use generators g1..gN instead of the surface generators.
        #[arg(long)]
        rank: Option<usize>,
    },
    /// SW_n of a tuple of surface words, e.g. `"x1 y1" "Y1"`.
    Sw { words: Vec<String> },
    /// Print the Hall basis.
    Hall {
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Search return sequences from the fixture.
    SearchLoops {
        #[arg(long, default_value = "tree-cycles")]
        policy: String,
        /// Keep only loops acting trivially on H, adding products of loops with equal action.
        #[arg(long)]
        torelli: bool,
        #[arg(long, default_value_t = 20)]
        max: usize,
        /// Write each loop as `loop_N.seq` here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Selftest,
}

enum Failure {
    Parse(String),
    Invalid(String),
}

impl From<FatgraphError> for Failure {
    fn from(e: FatgraphError) -> Self {
        match e {
            FatgraphError::Parse { .. } => Failure::Parse(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<HomError> for Failure {
    fn from(e: HomError) -> Self {
        match e {
            HomError::Fatgraph(f) => f.into(),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(msg)) => {
            print!("{msg}");
            if !msg.ends_with('\n') {
                println!();
            }
            ExitCode::from(1)
        }
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    if cli.class == 0 || cli.genus == 0 {
        return Err(Failure::Parse("genus and class must be at least 1".into()));
    }
    match &cli.cmd {
        Cmd::Validate => validate(cli),
        Cmd::Zchain => zchain(cli),
        Cmd::Tchain { moves } => tchain(cli, moves),
        Cmd::ApplySeq { moves, out } => apply_seq(cli, moves, out.as_deref()),
        Cmd::Morita { moves } => morita(cli, moves),
        Cmd::Johnson { moves } => johnson(cli, moves),
        Cmd::Bch { a, b, rank } => bch(cli, a, b, *rank),
        Cmd::Sw { words } => sw_cmd(cli, words),
        Cmd::Hall { rank } => hall(cli, *rank),
        Cmd::SearchLoops { policy, torelli, max, out_dir } => search(cli, policy, *torelli, *max, out_dir.as_deref()),
        Cmd::Selftest => selftest::run(),
    }
}

fn gen_check(cli: &Cli) -> GenCheck {
    match cli.gen_check {
        GenArg::Pi => GenCheck::Pi,
        GenArg::H => GenCheck::H,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

/// The fixture, parsed and validated.
fn fixture(cli: &Cli) -> Result<MarkedFatgraph, Failure> {
    let m = match &cli.fixture {
        Some(p) => MarkedFatgraph::parse(&read(p)?).map_err(|e| Failure::Parse(format!("{}: {e}", p.display())))?,
        None => caterpillar(cli.genus),
    };
    let report = m.validate(gen_check(cli));
    if !report.is_valid() {
        return Err(Failure::Invalid(report.to_string()));
    }
    Ok(m)
}

fn sequence(cli: &Cli, moves: &Path) -> Result<MoveSequence, Failure> {
    let start = fixture(cli)?;
    let steps = MoveSequence::parse_steps(&read(moves)?)
        .map_err(|e| Failure::Parse(format!("{}: {e}", moves.display())))?;
    Ok(MoveSequence::new(start, steps))
}

fn bar_words(c: &BarChain<FreeWord>) -> String {
    if c.is_zero() {
        return "0\n".into();
    }
    let mut s = String::new();
    for (t, q) in c.iter() {
        let parts: Vec<String> = t.iter().map(word_string).collect();
        let _ = writeln!(s, "{q} * ({})", parts.join(" | "));
    }
    s
}

fn status(ok: bool) -> &'static str {
    if ok {
        "OK"
    } else {
        "FAILED"
    }
}

fn finish(out: String, ok: bool) -> Outcome {
    if ok {
        Ok(out)
    } else {
        Err(Failure::Invalid(out))
    }
}

fn validate(cli: &Cli) -> Outcome {
    let m = match &cli.fixture {
        Some(p) => MarkedFatgraph::parse(&read(p)?).map_err(|e| Failure::Parse(format!("{}: {e}", p.display())))?,
        None => caterpillar(cli.genus),
    };
    let report = m.validate(gen_check(cli));
    finish(report.to_string(), report.is_valid())
}

fn zchain(cli: &Cli) -> Outcome {
    let m = fixture(cli)?;
    let z = z_chain(&m);
    let ok = bar_boundary(&FreeGroup, &z) == zeta_chain(m.genus).scaled(&Rational::from_int(-1));
    let mut s = bar_words(&z);
    let _ = writeln!(s, "boundary = -(zeta) : {}", status(ok));
    finish(s, ok)
}

fn tchain(cli: &Cli, moves: &Path) -> Outcome {
    let seq = sequence(cli, moves)?;
    let mut s = String::new();
    let mut ok = true;
    for (i, mv) in seq.evaluate()?.iter().enumerate() {
        let t = mv.t_chain();
        let want = z_chain(&mv.source).sub(&z_chain(&mv.target));
        let good = bar_boundary(&FreeGroup, &t) == want;
        ok &= good;
        let _ = writeln!(s, "move {}: {} {} type {} s = {}", i + 1, mv.edge, mv.resolution, mv.type_index, mv.s);
        s += &bar_words(&t);
        let _ = writeln!(s, "boundary = Z(G) - Z(G') : {}", status(good));
    }
    finish(s, ok)
}

fn apply_seq(cli: &Cli, moves: &Path, out: Option<&Path>) -> Outcome {
    let seq = sequence(cli, moves)?;
    let end = seq.end()?;
    let text = end.to_file_string();
    if let Some(p) = out {
        fs::write(p, &text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
    }
    Ok(text)
}

/// Whether the sequence closes up, and its automorphism at `class` if so.
fn loop_map(seq: &MoveSequence, class: usize) -> Option<ptolemy_core::nilpotent::InducedLieMap> {
    let end = seq.end().ok()?;
    induced_automorphism(&seq.start, &end, class).ok()
}

fn morita(cli: &Cli, moves: &Path) -> Outcome {
    let seq = sequence(cli, moves)?;
    let k = cli.class;
    let genus = seq.start.genus;
    let mvs = seq.evaluate()?;
    let mut s = String::new();
    let _ = writeln!(s, "M~_{k} (entries in pi / Gamma_{}):", k + 1);
    s += &bar_words(&morita_free(&mvs));
    let raw = m_tilde_moves(genus, &mvs, k);
    let b = HallBasis::surface(genus, k);
    let _ = writeln!(s, "sw_3:\n{}", raw.format(&b));
    let red = ReducedKoszul3::new(b, &raw);
    let _ = writeln!(s, "m~_{k} mod Im d_4:\n{red}");
    if let Some(f) = loop_map(&seq, k) {
        let _ = writeln!(s, "loop: automorphism trivial at class {k}: {}", is_identity(&f));
    }
    Ok(s)
}

fn johnson(cli: &Cli, moves: &Path) -> Outcome {
    let seq = sequence(cli, moves)?;
    let k = cli.class;
    let genus = seq.start.genus;
    let mvs = seq.evaluate()?;
    let reg = Registry::standard();
    let mut s = String::new();
    let mut ok = true;
    let mut values = Vec::new();
    for route in [TauRoute::Differential, TauRoute::Bivector] {
        let v = reg.tau(route.name()).expect("registered").tau(genus, &mvs, k);
        let _ = writeln!(s, "tau~_{k} ({}):\n{v}", route.name());
        values.push(v);
    }
    let agree = values[0] == values[1];
    ok &= agree;
    let _ = writeln!(s, "routes agree : {}", status(agree));
    if k == 1 {
        let b1 = HallBasis::surface(genus, 1);
        let b2 = HallBasis::surface(genus, 2);
        let mut tri = WedgeChain::new();
        for (i, mv) in mvs.iter().enumerate() {
            let h: Vec<String> = mv.outer[..3].iter().map(word_string).collect();
            let _ = writeln!(s, "move {}: h1 = {}, h2 = {}, h3 = {} : -1/6 * [h1 ^ h2 ^ h3]", i + 1, h[0], h[1], h[2]);
            tri.add_assign(&k1_closed_form(genus, mv).scaled(&Rational::from_int(-1)));
        }
        let _ = writeln!(s, "closed form in Lambda^3 H:\n{}", tri.format(&b1));
        let got = iota(&trivector_as_johnson(&b2, &tri)) == values[0];
        ok &= got;
        let _ = writeln!(s, "iota(closed form) = tau~_1 : {}", status(got));
    }
    if let Some(f) = loop_map(&seq, k + 1) {
        if is_identity(&truncate(&f, k)) {
            let t = classical_tau(&f, k)?;
            let _ = writeln!(s, "tau_{k}:\n{t}");
            let same = iota(&t) == values[0];
            ok &= same;
            let _ = writeln!(s, "iota(tau_{k}) = tau~_{k} : {}", status(same));
        } else {
            let _ = writeln!(s, "loop is not trivial at class {k}; classical tau_{k} undefined");
        }
    }
    finish(s, ok)
}

fn algebra_basis(cli: &Cli, rank: Option<usize>) -> std::sync::Arc<HallBasis> {
    match rank {
        Some(n) => HallBasis::new(n, cli.class),
        None => HallBasis::with_names(surface_names(cli.genus), cli.class),
    }
}

fn bch(cli: &Cli, a: &str, b: &str, rank: Option<usize>) -> Outcome {
    let basis = algebra_basis(cli, rank);
    let x = basis.parse_element(a).map_err(Failure::Parse)?;
    let y = basis.parse_element(b).map_err(Failure::Parse)?;
    let g = NilpotentGroup::new(basis.clone());
    Ok(format!("{}\n", basis.format(&g.bch(&x, &y))))
}

fn sw_cmd(cli: &Cli, words: &[String]) -> Outcome {
    let g = surface_group(cli.genus, cli.class);
    let mut tuple = Vec::new();
    for w in words {
        let fw = FreeWord::parse_surface(w).map_err(|e| Failure::Parse(e.to_string()))?;
        if fw.support_rank() > 2 * cli.genus {
            return Err(Failure::Parse(format!("`{w}` uses generators beyond genus {}", cli.genus)));
        }
        tuple.push(g.log_of_word(&fw));
    }
    Ok(format!("{}\n", sw(&g, &tuple).format(g.basis())))
}

fn hall(cli: &Cli, rank: Option<usize>) -> Outcome {
    let b = algebra_basis(cli, rank);
    let mut s = String::new();
    for i in 0..b.dim() {
        let _ = writeln!(s, "{i} {} {}", b.degree(i), b.word_string(i));
    }
    Ok(s)
}

fn search(cli: &Cli, policy: &str, torelli: bool, max: usize, out_dir: Option<&Path>) -> Outcome {
    let m = fixture(cli)?;
    let reg = Registry::standard();
    let p = reg
        .loops(policy)
        .ok_or_else(|| Failure::Parse(format!("unknown policy `{policy}`")))?;
    let mut loops = p.search(&m, cli.seed, cli.depth);
    if torelli {
        let mut t: Vec<MoveSequence> = trivial_at(&loops, 1)
            .into_iter()
            .filter(|s| loop_map(s, 2).is_some_and(|f| !is_identity(&f)))
            .collect();
        t.extend(torelli_products(&loops, 2, max));
        loops = t;
    }
    loops.truncate(max);
    let mut s = String::new();
    for (i, l) in loops.iter().enumerate() {
        let action = loop_map(l, 1).is_some_and(|f| is_identity(&f));
        let _ = writeln!(s, "loop {} length {} trivial on H: {}", i + 1, l.len(), action);
        s += &l.steps_string();
        if let Some(d) = out_dir {
            let path = d.join(format!("loop_{}.seq", i + 1));
            fs::write(&path, l.steps_string()).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        }
    }
    let _ = writeln!(s, "{} loops", loops.len());
    Ok(s)
}
