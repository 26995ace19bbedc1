//! Unified command-line front end for the agt-core subsystems.
//!
//! JSON is the canonical machine output (schema key "agt/1"), CSV is
//! used for tabular family sweeps and DOT for graphs. Exit codes:
//! 0 success, 1 certificate or computation failure, 2 usage error.

use agt_core::btree::{self, LatticeClass};
use agt_core::cayley::{
    self, FreeOracle, GenSet, GroupOracle, Z2Oracle, ZOracle, DEFAULT_BUDGET,
};
use agt_core::ergodic::{self, TrigPoly};
use agt_core::expander;
use agt_core::graph::FiniteGraph;
use agt_core::padic;
use agt_core::pingpong::{self, MatZ, ProjSlope, SlopeIntervalSet};
use agt_core::projdyn::{self, ConstructParams, RealMat};
use agt_core::words;
use clap::{Args, Parser, Subcommand};
use num::complex::Complex64;
use num::{BigInt, BigRational};
use serde::Deserialize;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "agt", version, about = "analytic group theory toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free-group words and the paradoxical decomposition of F_2
    Words {
        #[command(subcommand)]
        action: WordsAction,
    },
    /// Exact ping-pong freeness certificates on the projective line
    Pingpong {
        #[command(subcommand)]
        action: PingpongAction,
    },
    /// Cayley-ball growth, Cheeger quotients and Folner search
    Cayley {
        #[command(subcommand)]
        action: CayleyAction,
    },
    /// Spectral gaps and expansion across graph families
    Expander(ExpanderArgs),
    /// Truncated p-adic arithmetic
    Padic {
        #[command(subcommand)]
        action: PadicAction,
    },
    /// Bruhat-Tits tree balls of SL_2(Q_p)
    Tree(TreeArgs),
    /// Numeric ping-pong-player construction (Tits alternative pipeline)
    Tits {
        #[command(subcommand)]
        action: TitsAction,
    },
    /// Von Neumann ergodic averages for circle rotations
    Ergodic(ErgodicArgs),
}

#[derive(Subcommand)]
enum WordsAction {
    /// Verify the paradoxical-decomposition identities exhaustively
    Paradox {
        #[arg(long)]
        depth: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum PingpongAction {
    /// Check a ping-pong table from a JSON config
    Certify {
        /// JSON file with matrices and interval endpoints; omit to use
        /// the standard SL_2(Z) pair
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        oracle_maxlen: u64,
    },
}

#[derive(Subcommand)]
enum CayleyAction {
    Growth {
        #[arg(long)]
        group: String,
        #[arg(long = "max-n")]
        max_n: u64,
        #[arg(long)]
        json: bool,
        /// DOT export of the radius max-n ball graph
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    Cheeger {
        #[arg(long)]
        group: String,
        #[arg(long = "max-n")]
        max_n: u64,
        #[arg(long)]
        json: bool,
    },
    Folner {
        #[arg(long)]
        group: String,
        #[arg(long = "max-n")]
        max_n: u64,
        /// Folner threshold as an exact rational
        #[arg(long, default_value = "1/100")]
        eps: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct ExpanderArgs {
    /// Graph family: cycle or slk
    #[arg(long)]
    family: String,
    /// Matrix size for slk
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Comma-separated cycle lengths or moduli
    #[arg(long, value_delimiter = ',')]
    moduli: Vec<u32>,
    /// CSV output path (stdout if omitted)
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PadicAction {
    Eval {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        prec: u32,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    radius: u64,
    /// DOT export labelled by canonical forms (a, b, c)
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum TitsAction {
    Construct {
        /// JSON file with a list of generator matrices
        #[arg(long)]
        gens: PathBuf,
        #[arg(long)]
        dim: usize,
        /// Certificate JSON output path (stdout if omitted)
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ErgodicArgs {
    /// Rotation number: "sqrt2", "golden" or an exact rational "p/q"
    #[arg(long)]
    alpha: String,
    /// Frequencies as "k:re" or "k:re:im", comma separated
    #[arg(long)]
    freqs: String,
    /// Average lengths
    #[arg(long, value_delimiter = ',')]
    ns: Vec<u64>,
    /// CSV output path (stdout if omitted)
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Failure during a correctly invoked run: exit code 1.
struct RunFailure(String);

impl<E: std::fmt::Display> From<E> for RunFailure {
    fn from(e: E) -> Self {
        RunFailure(e.to_string())
    }
}

fn main() -> ExitCode {
    if let Some(threads) = std::env::var_os("AGT_THREADS") {
        match threads.to_str().and_then(|s| s.parse::<usize>().ok()) {
            Some(n) if n >= 1 => {} // modules are single-threaded; any cap >= 1 is honoured
            _ => {
                eprintln!("AGT_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunFailure(msg)) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "schema": "agt/1",
                    "status": "fail",
                    "error": msg,
                }))
                .unwrap()
            );
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), RunFailure> {
    match cli.command {
        Command::Words { action } => run_words(action),
        Command::Pingpong { action } => run_pingpong(action),
        Command::Cayley { action } => run_cayley(action),
        Command::Expander(args) => run_expander(args),
        Command::Padic { action } => run_padic(action),
        Command::Tree(args) => run_tree(args),
        Command::Tits { action } => run_tits(action),
        Command::Ergodic(args) => run_ergodic(args),
    }
}

fn emit_json(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
}

fn run_words(action: WordsAction) -> Result<(), RunFailure> {
    let WordsAction::Paradox { depth, json: as_json } = action;
    if depth == 0 || depth > 12 {
        return Err(RunFailure("depth must be between 1 and 12".into()));
    }
    let report = words::verify_paradox(depth);
    if as_json {
        emit_json(json!({
            "schema": "agt/1",
            "depth": report.depth,
            "piece_counts": report.piece_counts,
            "identities": report.identities,
            "passed": report.passed(),
        }));
    } else {
        println!("paradox check at depth {}", report.depth);
        for id in &report.identities {
            println!("  {}: {}", id.name, if id.status { "ok" } else { "FAIL" });
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(RunFailure("paradox identities failed".into()))
    }
}

#[derive(Deserialize)]
struct PingpongConfig {
    a: [[i64; 2]; 2],
    b: [[i64; 2]; 2],
    a_plus: Vec<[String; 2]>,
    a_minus: Vec<[String; 2]>,
    b_plus: Vec<[String; 2]>,
    b_minus: Vec<[String; 2]>,
}

fn parse_slope(s: &str) -> Result<ProjSlope, RunFailure> {
    if s.trim() == "inf" {
        return Ok(ProjSlope::Inf);
    }
    let q = BigRational::from_str(s.trim())
        .map_err(|e| RunFailure(format!("bad slope '{}': {}", s, e)))?;
    Ok(ProjSlope::Finite(q))
}

fn parse_interval_set(arcs: &[[String; 2]]) -> Result<SlopeIntervalSet, RunFailure> {
    let mut parsed = Vec::new();
    for [start, end] in arcs {
        parsed.push((parse_slope(start)?, parse_slope(end)?));
    }
    let first = parsed
        .first()
        .ok_or_else(|| RunFailure("interval set must be nonempty".into()))?
        .clone();
    let mut set = SlopeIntervalSet::single(first.0, first.1);
    for (s, e) in parsed.into_iter().skip(1) {
        set = set.union(&SlopeIntervalSet::single(s, e));
    }
    Ok(set)
}

fn run_pingpong(action: PingpongAction) -> Result<(), RunFailure> {
    let PingpongAction::Certify { config, oracle_maxlen } = action;
    let (a, b, ap, am, bp, bm) = match config {
        None => pingpong::standard_sl2_pair(),
        Some(path) => {
            let text = std::fs::read_to_string(&path)?;
            let cfg: PingpongConfig = serde_json::from_str(&text)?;
            (
                MatZ::new(cfg.a)?,
                MatZ::new(cfg.b)?,
                parse_interval_set(&cfg.a_plus)?,
                parse_interval_set(&cfg.a_minus)?,
                parse_interval_set(&cfg.b_plus)?,
                parse_interval_set(&cfg.b_minus)?,
            )
        }
    };
    let cert = pingpong::certify_first_form(&a, &b, &ap, &am, &bp, &bm)
        .map_err(|e| RunFailure(format!("{}: {}", kind_of(&e), e)))?;
    let oracle = if oracle_maxlen > 0 {
        Some(pingpong::exhaustive_nontriviality(&a, &b, oracle_maxlen)?)
    } else {
        None
    };
    emit_json(json!({
        "schema": "agt/1",
        "certificate": cert,
        "oracle": oracle,
    }));
    Ok(())
}

fn kind_of<E: std::fmt::Debug>(e: &E) -> String {
    let dbg = format!("{:?}", e);
    dbg.split(|c: char| c == '(' || c == '{' || c.is_whitespace())
        .next()
        .unwrap_or("Error")
        .to_string()
}

/// Ball data shared by the cayley subcommands, computed per group name.
struct BallSummary {
    counts: Vec<u64>,
    cheeger: Vec<String>,
    folner: Option<cayley::FolnerSearch>,
    dot: Option<String>,
}

fn summarize<G: GroupOracle>(
    oracle: &G,
    gens: &[G::Elem],
    max_n: u64,
    eps: Option<&BigRational>,
    label: impl Fn(&G::Elem) -> String,
    want_dot: bool,
) -> Result<BallSummary, RunFailure>
where
    G::Elem: Ord + std::hash::Hash,
{
    let s = GenSet::symmetrized(oracle, gens);
    let data = cayley::ball(oracle, &s, max_n, DEFAULT_BUDGET)?;
    let mut cheeger = Vec::new();
    for radius in 0..=max_n as usize {
        let elems = data.ball_elements(radius);
        cheeger.push(cayley::cheeger_quotient(oracle, &elems, &s).to_string());
    }
    let folner = eps
        .map(|eps| cayley::folner_ball_search(oracle, &s, eps, max_n, DEFAULT_BUDGET))
        .transpose()?;
    let dot = want_dot.then(|| {
        let elems = data.ball_elements(max_n as usize);
        let index: std::collections::HashMap<&G::Elem, usize> =
            elems.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut graph = FiniteGraph::new(elems.len());
        for (i, g) in elems.iter().enumerate() {
            for t in s.elements() {
                let h = oracle.multiply(g, t);
                if let Some(&j) = index.get(&h) {
                    if i < j {
                        graph.add_edge(i, j);
                    }
                }
            }
        }
        let labels: Vec<String> = elems.iter().map(&label).collect();
        graph.to_dot(Some(&labels))
    });
    Ok(BallSummary { counts: data.counts, cheeger, folner, dot })
}

fn group_summary(
    group: &str,
    max_n: u64,
    eps: Option<&BigRational>,
    want_dot: bool,
) -> Result<BallSummary, RunFailure> {
    match group {
        "z" => summarize(&ZOracle, &[1i64], max_n, eps, |g| g.to_string(), want_dot),
        "z2" => summarize(
            &Z2Oracle,
            &[(1i64, 0i64), (0, 1)],
            max_n,
            eps,
            |g| format!("({},{})", g.0, g.1),
            want_dot,
        ),
        "free2" => {
            let oracle = FreeOracle { rank: 2 };
            let gens = oracle.standard_gens();
            summarize(&oracle, &gens, max_n, eps, |g| g.to_string(), want_dot)
        }
        other => Err(RunFailure(format!(
            "unknown group '{}' (expected z, z2 or free2)",
            other
        ))),
    }
}

fn run_cayley(action: CayleyAction) -> Result<(), RunFailure> {
    match action {
        CayleyAction::Growth { group, max_n, json: as_json, dot } => {
            if max_n < 2 {
                return Err(RunFailure("--max-n must be at least 2".into()));
            }
            let summary = group_summary(&group, max_n, None, dot.is_some())?;
            if let (Some(path), Some(text)) = (&dot, &summary.dot) {
                std::fs::write(path, text)?;
            }
            let est = cayley::growth_rate_estimate(&summary.counts);
            if as_json {
                emit_json(json!({
                    "schema": "agt/1",
                    "group": group,
                    "counts": summary.counts,
                    "roots": est.roots,
                    "running_infimum": est.running_infimum,
                    "quotients": est.quotients,
                    "quotient_infimum": est.quotient_infimum,
                }));
            } else {
                println!("ball sizes: {:?}", summary.counts);
                println!("growth quotient infimum: {}", est.quotient_infimum);
            }
        }
        CayleyAction::Cheeger { group, max_n, json: as_json } => {
            let summary = group_summary(&group, max_n, None, false)?;
            if as_json {
                emit_json(json!({
                    "schema": "agt/1",
                    "group": group,
                    "cheeger_quotients": summary.cheeger,
                }));
            } else {
                for (r, q) in summary.cheeger.iter().enumerate() {
                    println!("radius {}: |boundary|/|ball| = {}", r, q);
                }
            }
        }
        CayleyAction::Folner { group, max_n, eps, json: as_json } => {
            let eps: BigRational = eps
                .parse()
                .map_err(|e| RunFailure(format!("bad --eps: {}", e)))?;
            let summary = group_summary(&group, max_n, Some(&eps), false)?;
            let result = summary.folner.unwrap();
            if as_json {
                emit_json(json!({
                    "schema": "agt/1",
                    "group": group,
                    "eps": eps.to_string(),
                    "result": result,
                }));
            } else {
                match result {
                    cayley::FolnerSearch::Found { radius, ratio } => {
                        println!("Folner ball found at radius {} (ratio {})", radius, ratio)
                    }
                    cayley::FolnerSearch::Exhausted { maxn, last_ratio } => println!(
                        "no Folner ball up to radius {} (last ratio {}); not evidence of non-amenability",
                        maxn, last_ratio
                    ),
                }
            }
        }
    }
    Ok(())
}

fn run_expander(args: ExpanderArgs) -> Result<(), RunFailure> {
    if args.moduli.is_empty() {
        return Err(RunFailure("--moduli must list at least one value".into()));
    }
    let mut rows = vec![
        "family,parameter,vertices,degree,lambda2,gap,expansion_exact_or_NA".to_string(),
    ];
    for &m in &args.moduli {
        let (graph, family) = match args.family.as_str() {
            "cycle" => (FiniteGraph::cycle(m as usize), "cycle"),
            "slk" => (
                expander::build_sl_cayley(args.k, m, None)?.graph,
                "slk",
            ),
            other => return Err(RunFailure(format!("unknown family '{}'", other))),
        };
        let spectral = expander::spectral_gap(&graph)?;
        let expansion = match expander::edge_expansion_exact(&graph) {
            Ok(rep) => rep.value.to_string(),
            Err(_) => "NA".to_string(),
        };
        rows.push(format!(
            "{},{},{},{},{},{},{}",
            family,
            m,
            graph.num_vertices(),
            spectral.degree,
            spectral.lambda2,
            spectral.normalized_gap,
            expansion
        ));
    }
    let text = rows.join("\n") + "\n";
    match args.csv {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{}", text),
    }
    Ok(())
}

// expression grammar: expr := term (('+'|'-') term)*;
// term := factor (('*'|'/') factor)*; factor := '-' factor | '(' expr ')'
// | integer ('^' signed-integer)?
struct ExprParser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Open,
    Close,
}

impl<'a> ExprParser<'a> {
    fn new(src: &'a str) -> Result<Self, RunFailure> {
        let mut tokens = Vec::new();
        let mut chars = src.chars().peekable();
        while let Some(&c) = chars.peek() {
            match c {
                ' ' | '\t' => {
                    chars.next();
                }
                '0'..='9' => {
                    let mut digits = String::new();
                    while let Some(&d) = chars.peek() {
                        if d.is_ascii_digit() {
                            digits.push(d);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    tokens.push(Token::Int(digits.parse().unwrap()));
                }
                '+' => drop_push(&mut chars, &mut tokens, Token::Plus),
                '-' => drop_push(&mut chars, &mut tokens, Token::Minus),
                '*' => drop_push(&mut chars, &mut tokens, Token::Star),
                '/' => drop_push(&mut chars, &mut tokens, Token::Slash),
                '^' => drop_push(&mut chars, &mut tokens, Token::Caret),
                '(' => drop_push(&mut chars, &mut tokens, Token::Open),
                ')' => drop_push(&mut chars, &mut tokens, Token::Close),
                other => {
                    return Err(RunFailure(format!("unexpected character '{}'", other)))
                }
            }
        }
        Ok(ExprParser { tokens, pos: 0, src })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<BigRational, RunFailure> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Token::Plus) {
                acc += self.term()?;
            } else if self.eat(&Token::Minus) {
                acc -= self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<BigRational, RunFailure> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(&Token::Star) {
                acc *= self.factor()?;
            } else if self.eat(&Token::Slash) {
                let rhs = self.factor()?;
                if rhs == BigRational::from_integer(0.into()) {
                    return Err(RunFailure("division by zero".into()));
                }
                acc /= rhs;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<BigRational, RunFailure> {
        if self.eat(&Token::Minus) {
            return Ok(-self.factor()?);
        }
        if self.eat(&Token::Open) {
            let inner = self.expr()?;
            if !self.eat(&Token::Close) {
                return Err(RunFailure(format!("missing ')' in '{}'", self.src)));
            }
            return self.maybe_power(inner);
        }
        match self.peek().cloned() {
            Some(Token::Int(n)) => {
                self.pos += 1;
                self.maybe_power(BigRational::from_integer(n))
            }
            _ => Err(RunFailure(format!("malformed expression '{}'", self.src))),
        }
    }

    fn maybe_power(&mut self, base: BigRational) -> Result<BigRational, RunFailure> {
        if !self.eat(&Token::Caret) {
            return Ok(base);
        }
        let negative = self.eat(&Token::Minus);
        let exponent = match self.peek().cloned() {
            Some(Token::Int(n)) => {
                self.pos += 1;
                i32::try_from(&n).map_err(|_| RunFailure("exponent too large".into()))?
            }
            _ => return Err(RunFailure("missing exponent after '^'".into())),
        };
        let e = if negative { -exponent } else { exponent };
        if e < 0 && base == BigRational::from_integer(0.into()) {
            return Err(RunFailure("division by zero".into()));
        }
        Ok(num::pow::Pow::pow(base, e))
    }

    fn parse_all(mut self) -> Result<BigRational, RunFailure> {
        let value = self.expr()?;
        if self.pos != self.tokens.len() {
            return Err(RunFailure(format!("trailing tokens in '{}'", self.src)));
        }
        Ok(value)
    }
}

fn drop_push(
    chars: &mut std::iter::Peekable<std::str::Chars<'_>>,
    tokens: &mut Vec<Token>,
    t: Token,
) {
    chars.next();
    tokens.push(t);
}

fn run_padic(action: PadicAction) -> Result<(), RunFailure> {
    let PadicAction::Eval { p, expr, prec, json: as_json } = action;
    let value = ExprParser::new(&expr)?.parse_all()?;
    let x = padic::from_rational(&value, p, prec)?;
    let digits: Vec<u32> = x.digits().to_vec();
    if as_json {
        emit_json(json!({
            "schema": "agt/1",
            "p": p,
            "precision": prec,
            "value": value.to_string(),
            "is_zero": x.is_zero(),
            "valuation": x.valuation(),
            "digits_lsb_first": digits,
            "abs": x.abs_value().to_string(),
        }));
    } else {
        println!("{} in Q_{} (precision {}):", value, p, prec);
        if x.is_zero() {
            println!("  zero");
        } else {
            let rendered: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
            println!(
                "  digits (lsb first): {} | valuation {} | |x|_p = {}",
                rendered.join(" "),
                x.valuation().unwrap(),
                x.abs_value()
            );
        }
    }
    Ok(())
}

fn run_tree(args: TreeArgs) -> Result<(), RunFailure> {
    let base = LatticeClass::base(args.p);
    let ball = btree::build_ball(&base, args.radius)?;
    let report = btree::verify_tree(&ball)?;
    if let Some(path) = &args.dot {
        let mut graph = FiniteGraph::new(ball.vertices.len());
        for &(u, v) in &ball.edges {
            graph.add_edge(u, v);
        }
        let labels: Vec<String> = ball.vertices.iter().map(|v| v.to_string()).collect();
        std::fs::write(path, graph.to_dot(Some(&labels)))?;
    }
    if args.json {
        emit_json(json!({
            "schema": "agt/1",
            "p": args.p,
            "radius": args.radius,
            "report": report,
            "passed": report.passed(),
        }));
    } else {
        println!(
            "tree ball p={} radius={}: {} vertices, {} edges, {}",
            args.p,
            args.radius,
            report.vertex_count,
            report.edge_count,
            if report.passed() { "ok" } else { "FAIL" }
        );
    }
    if report.passed() {
        Ok(())
    } else {
        Err(RunFailure("tree ball verification failed".into()))
    }
}

fn run_tits(action: TitsAction) -> Result<(), RunFailure> {
    let TitsAction::Construct { gens, dim, json: out } = action;
    let text = std::fs::read_to_string(&gens)?;
    let raw: Vec<Vec<Vec<f64>>> = serde_json::from_str(&text)?;
    let mut mats = Vec::new();
    for rows in &raw {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(RunFailure(format!("generators must be {}x{}", dim, dim)));
        }
        mats.push(RealMat::from_fn(dim, dim, |i, j| rows[i][j]));
    }
    let cert = projdyn::construct_free_pair(&mats, &ConstructParams::default())
        .map_err(|e| RunFailure(format!("{}: {}", kind_of(&e), e)))?;
    let payload = json!({
        "schema": "agt/1",
        "certificate": cert,
    });
    let rendered = serde_json::to_string_pretty(&payload).unwrap();
    match out {
        Some(path) => {
            std::fs::write(path, &rendered)?;
            println!(
                "certificate written: C = {}, r = {}, epsilon = {}, exact_check = {:?}",
                cert.c, cert.r, cert.epsilon, cert.exact_check
            );
        }
        None => println!("{}", rendered),
    }
    Ok(())
}

fn parse_alpha(s: &str) -> Result<BigRational, RunFailure> {
    match s {
        "sqrt2" => Ok(ergodic::sqrt2_convergent(30)),
        "golden" => Ok(ergodic::golden_convergent(40)),
        other => other
            .parse()
            .map_err(|e| RunFailure(format!("bad --alpha '{}': {}", other, e))),
    }
}

fn parse_freqs(s: &str) -> Result<TrigPoly, RunFailure> {
    let mut terms = Vec::new();
    for part in s.split(',') {
        let pieces: Vec<&str> = part.split(':').collect();
        let parse_f64 = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| RunFailure(format!("bad coefficient '{}': {}", t, e)))
        };
        match pieces.as_slice() {
            [k, re] => terms.push((
                k.trim()
                    .parse::<i64>()
                    .map_err(|e| RunFailure(format!("bad frequency '{}': {}", k, e)))?,
                Complex64::new(parse_f64(re)?, 0.0),
            )),
            [k, re, im] => terms.push((
                k.trim()
                    .parse::<i64>()
                    .map_err(|e| RunFailure(format!("bad frequency '{}': {}", k, e)))?,
                Complex64::new(parse_f64(re)?, parse_f64(im)?),
            )),
            _ => {
                return Err(RunFailure(format!(
                    "bad --freqs entry '{}' (expected k:re or k:re:im)",
                    part
                )))
            }
        }
    }
    Ok(TrigPoly::new(terms))
}

fn run_ergodic(args: ErgodicArgs) -> Result<(), RunFailure> {
    let alpha = parse_alpha(&args.alpha)?;
    let f = parse_freqs(&args.freqs)?;
    if args.ns.is_empty() {
        return Err(RunFailure("--ns must list at least one value".into()));
    }
    let resonant: Vec<i64> = f
        .support()
        .into_iter()
        .filter(|&k| k != 0 && ergodic::is_resonant(k, &alpha))
        .collect();
    let mut rows = vec!["n,l2_distance_to_mean".to_string()];
    for &n in &args.ns {
        if n == 0 {
            return Err(RunFailure("--ns entries must be positive".into()));
        }
        let d = ergodic::l2_distance_to_mean(&f, &alpha, n);
        rows.push(format!("{},{}", n, d));
    }
    if !resonant.is_empty() {
        rows.push(format!(
            "# resonant frequencies (invariant non-constant modes): {:?}",
            resonant
        ));
    }
    let text = rows.join("\n") + "\n";
    match args.csv {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{}", text),
    }
    Ok(())
}
