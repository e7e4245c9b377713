use std::path::Path;
use std::sync::Arc;

use num_bigint::BigUint;
use phidim::construct::{build_chased_sequence, verify_chase, ChaseOptions, Slack, StageMode};
use phidim::covering::{CoveringFamily, CoveringSet, Family, TieRule, VerifyOptions, Window};
use phidim::dimension::{
    cdim_estimate, cdim_phi_estimate, default_phi_kmax, dilution_witness, kr_point, parse_oracle, plain_grid,
    ComplexityOracle, KrBounds,
};
use phidim::faithfulness::{classify, decimal, loglimit_terms};
use phidim::gale::{
    cover_to_gale, gale_to_cover, kraft_check, read_gale_csv, success_profile, validate_supergale, write_gale_csv,
    Supergale,
};
use phidim::numeric::{format_rational, parse_rational, Exponent, QSequence, Rational};
use phidim::representation::{parse_digits, rebase, write_digits, BitSequence, ReprSpec};
use phidim::sampling::{bernoulli_bits, pseudorandom_bits};

use crate::args::*;
use crate::error::CliError;
use crate::run::Run;

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    /// A checked property failed; outputs are still written.
    Soft(String),
}

type Res = Result<Status, CliError>;

pub fn dispatch(cmd: &Command, run: &mut Run) -> Res {
    match cmd {
        Command::Convert(a) => convert(a, run),
        Command::Estimate(a) => estimate(a, run),
        Command::Faithfulness(a) => faithfulness(a, run),
        Command::Gale(g) => match g {
            GaleCommand::Constant(a) => gale_constant(a, run),
            GaleCommand::Validate(a) => gale_validate(a, run),
            GaleCommand::Kraft(a) => gale_kraft(a, run),
            GaleCommand::FromCover(a) => gale_from_cover(a, run),
            GaleCommand::ToCover(a) => gale_to_cover_cmd(a, run),
            GaleCommand::Success(a) => gale_success(a, run),
        },
        Command::VerifyFamily(a) => verify_family(a, run),
        Command::Chase(a) => chase(a, run),
        Command::Dilute(a) => dilute(a, run),
        Command::Sample(a) => sample(a, run),
        Command::Kr(a) => kr(a, run),
        Command::Rerun(_) => Err(CliError::usage("rerun cannot be nested")),
    }
}

fn rational(text: &str, what: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|_| CliError::usage(format!("--{what}: malformed rational `{text}`")))
}

fn exponent(text: &str) -> Result<Exponent, CliError> {
    Ok(Exponent::from_rational(&rational(text, "s")?)?)
}

fn family(a: &FamilyArgs) -> Result<(Arc<CoveringFamily>, Window), CliError> {
    let f = CoveringFamily::parse(&a.family)?;
    let w = match a.max_term {
        Some(t) => Window::max_term(t),
        None => Window::all(),
    };
    Ok((Arc::new(f), w))
}

fn oracle(spec: &str, run: &mut Run) -> Result<Box<dyn ComplexityOracle>, CliError> {
    let o = parse_oracle(spec)?;
    run.oracles.push(o.label());
    Ok(o)
}

fn read_bits(run: &mut Run, path: &Path) -> Result<Vec<bool>, CliError> {
    let text = run.read(path)?;
    Ok(BitSequence::parse(&text)?.into_vec())
}

fn packed(bits: &[bool]) -> String {
    let mut s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
    s.push('\n');
    s
}

fn read_sets(run: &mut Run, path: &Path, fam: &CoveringFamily) -> Result<Vec<CoveringSet>, CliError> {
    let text = run.read(path)?;
    let mut sets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("level") {
            continue;
        }
        let bad = || CliError::codec(format!("{}:{}: expected `level,index`", path.display(), i + 1));
        let mut parts = line.split(',').map(str::trim);
        let level: u32 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let index: BigUint = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        sets.push(fam.set_at(level, &index)?);
    }
    Ok(sets)
}

fn convert(a: &ConvertArgs, run: &mut Run) -> Res {
    let from = a.from.as_deref().map(ReprSpec::parse).transpose()?;
    let to = ReprSpec::parse(&a.to)?;
    let text = run.read(&a.input)?;
    let digits = parse_digits(&text, from.as_ref())?;
    let out = write_digits(&rebase(&digits, &to, a.depth)?);
    run.say(&out);
    run.output("digits.txt", out);
    Ok(Status::Ok)
}

fn estimate(a: &EstimateArgs, run: &mut Run) -> Res {
    if a.no_plain && a.phi.is_none() {
        return Err(CliError::usage("--no-plain leaves nothing to estimate; pass --phi"));
    }
    let q = match &a.phi {
        Some(spec) => {
            let body = spec
                .strip_prefix("cantor:")
                .ok_or_else(|| CliError::usage(format!("--phi expects `cantor:<Q>`, got `{spec}`")))?;
            Some(QSequence::parse(body)?)
        }
        None => None,
    };
    let o = oracle(&a.oracle, run)?;
    let x = read_bits(run, &a.input)?;
    let mut heads = Vec::new();
    if !a.no_plain {
        let n = a.length.unwrap_or(x.len());
        if n > x.len() {
            return Err(CliError::insufficient(format!("--length {n} needs {n} bits, input has {}", x.len())));
        }
        let p = cdim_estimate(&x, o.as_ref(), &plain_grid(n))?;
        run.say(format!("plain: {p}"));
        heads.push(p.headline());
        run.output("plain.csv", p.to_csv());
    }
    if let Some(q) = q {
        let kmax = match a.kmax {
            Some(k) => k,
            None => match default_phi_kmax(&q, x.len()) {
                0 => {
                    let need = q.scale_index(1)?;
                    return Err(CliError::insufficient(format!("need at least m_1 = {need} bits, input has {}", x.len())));
                }
                k => k,
            },
        };
        let p = cdim_phi_estimate(&x, &q, o.as_ref(), kmax)?;
        run.say(format!("phi:   {p}"));
        heads.push(p.headline());
        run.output("phi.csv", p.to_csv());
    }
    if let [plain, phi] = &heads[..] {
        run.say(format!("gap (phi - plain): {}", decimal(&(phi - plain), 6)));
    }
    Ok(Status::Ok)
}

fn window(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::usage(format!("--window expects `a..b`, got `{text}`"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn faithfulness(a: &FaithfulnessArgs, run: &mut Run) -> Res {
    let q = QSequence::parse(&a.q)?;
    let zero = rational(&a.zero_tol, "zero-tol")?;
    let away = rational(&a.away_tol, "away-tol")?;
    let w = a.window.as_deref().map(window).transpose()?;
    let p = loglimit_terms(&q, a.kmax)?;
    let c = classify(&p, w, &zero, &away)?;
    run.say(format!("q = {q}  k_max = {}  terms = {}", a.kmax, p.terms.len()));
    run.say(c.to_string());
    run.output("lambda.csv", p.to_csv());
    Ok(Status::Ok)
}

fn load_gale(run: &mut Run, path: &Path) -> Result<Supergale, CliError> {
    let text = run.read(path)?;
    Ok(read_gale_csv(&text)?)
}

fn gale_constant(a: &GaleConstantArgs, run: &mut Run) -> Res {
    let (fam, w) = family(&a.family)?;
    let s = exponent(&a.s)?;
    let v = rational(&a.value, "value")?;
    let g = Supergale::constant(fam, s, a.depth, w, &v)?;
    run.say(format!("constant gale {} on {} sets (family {}, s = {s}, depth {})", format_rational(&v), g.len(), g.family(), a.depth));
    run.output("gale.csv", write_gale_csv(&g));
    Ok(Status::Ok)
}

fn gale_validate(a: &GaleFileArgs, run: &mut Run) -> Res {
    let g = load_gale(run, &a.file)?;
    let rep = validate_supergale(&g)?;
    run.say(rep.to_string());
    run.say(if rep.is_valid() { "valid" } else { "INVALID" });
    Ok(if rep.is_valid() { Status::Ok } else { Status::Soft("supergale condition fails".into()) })
}

fn gale_kraft(a: &GaleKraftArgs, run: &mut Run) -> Res {
    let g = load_gale(run, &a.file)?;
    let sets = read_sets(run, &a.antichain, g.family())?;
    let k = kraft_check(&g, &sets)?;
    run.say(format!("antichain of {} sets: mass {} ({:.6})", sets.len(), k.antichain_mass, k.antichain_mass.to_f64()));
    run.say(format!("root mass {} ({:.6})", k.root_mass, k.root_mass.to_f64()));
    run.say(if k.holds { "kraft bound holds" } else { "KRAFT BOUND FAILS" });
    Ok(if k.holds { Status::Ok } else { Status::Soft("antichain mass exceeds root mass".into()) })
}

fn gale_from_cover(a: &GaleFromCoverArgs, run: &mut Run) -> Res {
    let (fam, _) = family(&a.family)?;
    let s = exponent(&a.s)?;
    let sets = read_sets(run, &a.cover, &fam)?;
    let g = cover_to_gale(&sets, s, fam, a.depth)?;
    let root = g.root_mass()?;
    run.say(format!("gale on {} sets from a cover of {}; root mass {root} ({:.6})", g.len(), sets.len(), root.to_f64()));
    run.output("gale.csv", write_gale_csv(&g));
    Ok(Status::Ok)
}

fn gale_to_cover_cmd(a: &GaleToCoverArgs, run: &mut Run) -> Res {
    let g = load_gale(run, &a.file)?;
    let delta = rational(&a.delta, "delta")?;
    let c = gale_to_cover(&g, a.r, &delta)?;
    let mut csv = String::from("level,index,lo,hi\n");
    for u in &c.antichain {
        csv.push_str(&format!("{},{},{},{}\n", u.level(), u.index(), format_rational(u.lo()), format_rational(u.hi())));
    }
    run.say(format!("{} sets with capital >= {} ({:.6})", c.antichain.len(), c.threshold, c.threshold.to_f64()));
    run.say(format!("root mass {} ({:.6}); diameter bound forced: {}", c.root_mass, c.root_mass.to_f64(), c.bound_forced));
    run.say(format!("sets not below delta: {}", c.wide_sets.len()));
    run.output("cover.csv", csv);
    Ok(Status::Ok)
}

fn gale_success(a: &GaleSuccessArgs, run: &mut Run) -> Res {
    let g = load_gale(run, &a.file)?;
    let x = rational(&a.x, "x")?;
    let tie = match a.tie {
        Tie::Left => TieRule::Left,
        Tie::Right => TieRule::Right,
    };
    run.say(success_profile(&g, &x, tie)?.to_string());
    Ok(Status::Ok)
}

fn verify_family(a: &VerifyFamilyArgs, run: &mut Run) -> Res {
    let (fam, w) = family(&a.family)?;
    let mut opts = VerifyOptions::new(a.depth);
    opts.window = w;
    if let Some(s) = &a.samples {
        opts.samples = s.split(',').map(|t| rational(t, "samples")).collect::<Result<_, _>>()?;
    }
    opts.epsilon = a.epsilon.as_deref().map(|e| rational(e, "epsilon")).transpose()?;
    let rep = phidim::covering::verify_family_axioms(fam.as_ref() as &dyn Family, &opts);
    run.say(rep.to_text());
    run.output("axioms.csv", rep.to_csv());
    Ok(if rep.all_pass() { Status::Ok } else { Status::Soft("axiom failures".into()) })
}

fn slack(text: &str) -> Result<Slack, CliError> {
    let bad = || CliError::usage(format!("--slack expects `fitted`, `c:<x>` or `bits:<x>`, got `{text}`"));
    if text == "fitted" {
        return Ok(Slack::Fitted);
    }
    let (k, v) = text.split_once(':').ok_or_else(bad)?;
    let v: f64 = v.parse().map_err(|_| bad())?;
    if !v.is_finite() || v < 0.0 {
        return Err(bad());
    }
    match k {
        "c" => Ok(Slack::Scaled(v)),
        "bits" => Ok(Slack::Constant(v)),
        _ => Err(bad()),
    }
}

fn chase(a: &ChaseArgs, run: &mut Run) -> Res {
    let sl = slack(&a.slack)?;
    let oa = oracle(&a.oracle_a, run)?;
    let ob = oracle(&a.oracle_b, run)?;
    run.seeds.push(a.seed);
    let x = read_bits(run, &a.input)?;
    let opts = ChaseOptions { offset: a.offset, count: a.stages, budget: a.budget, seed: a.seed, max_deficit: a.max_deficit };
    let res = build_chased_sequence(&x, oa.as_ref(), ob.as_ref(), &opts)?;
    let rep = verify_chase(&x, &res.y, &res, oa.as_ref(), ob.as_ref(), sl)?;
    let complex = res.log.iter().filter(|l| l.mode == StageMode::Complex).count();
    let clamped = res.log.iter().filter(|l| l.clamped).count();
    run.say(format!(
        "Y: {} bits over {} stages ({complex} complex, {} zeros, {clamped} clamped); measured c_K = {}",
        res.y.len(),
        res.log.len(),
        res.log.len() - complex,
        res.c_k
    ));
    run.say(rep.to_string());
    run.output("y.bits", packed(&res.y));
    run.output("stages.jsonl", res.log_jsonl());
    Ok(match (rep.structural_ok(), rep.tracking_ok()) {
        (true, true) => Status::Ok,
        (false, _) => Status::Soft("structural check failed".into()),
        (true, false) => Status::Soft("complexity tracking exceeded the slack".into()),
    })
}

fn dilute(a: &DiluteArgs, run: &mut Run) -> Res {
    let q = QSequence::parse(&a.q)?;
    let s = rational(&a.s, "s")?;
    run.seeds.push(a.seed);
    let w = dilution_witness(&q, &s, a.k_lo, a.k_hi, a.seed)?;
    let mut csv = String::from("k,start,end,zeros,random\n");
    for b in &w.blocks {
        csv.push_str(&format!("{},{},{},{},{}\n", b.k, b.start, b.end, b.zeros, b.random));
    }
    run.say(format!("witness for {q} at s = {}: {} bits, {} blocks, {} valleys", format_rational(&s), w.bits.len(), w.blocks.len(), w.valleys.len()));
    match w.predicted_tail_valley() {
        Some(v) => run.say(format!("predicted valley density in the last half: {}", decimal(&v, 6))),
        None => run.say("no valley in the last half"),
    }
    run.output("witness.bits", packed(&w.bits));
    run.output("blocks.csv", csv);
    Ok(Status::Ok)
}

fn sample(a: &SampleArgs, run: &mut Run) -> Res {
    run.seeds.push(a.seed);
    let bits = match a.kind {
        SampleKind::Random => pseudorandom_bits(a.seed, a.n),
        SampleKind::Zeros => vec![false; a.n],
        SampleKind::Bernoulli => {
            let p = a.p.as_deref().ok_or_else(|| CliError::usage("--kind bernoulli needs --p"))?;
            let p = rational(p, "p")?;
            if p < Rational::from_integer(0.into()) || p > Rational::from_integer(1.into()) {
                return Err(CliError::usage("--p must lie in [0, 1]"));
            }
            bernoulli_bits(a.seed, a.n, &p)
        }
        SampleKind::Interleaved => {
            let r = pseudorandom_bits(a.seed, a.n.div_ceil(2));
            r.iter().flat_map(|&b| [b, false]).take(a.n).collect()
        }
    };
    let ones = bits.iter().filter(|&&b| b).count();
    run.say(format!("{} bits, {ones} ones", bits.len()));
    run.output("x.bits", packed(&bits));
    Ok(Status::Ok)
}

fn kr(a: &KrArgs, run: &mut Run) -> Res {
    let x = rational(&a.x, "x")?;
    let (fam, _) = family(&a.family)?;
    let o = oracle(&a.oracle, run)?;
    let r = kr_point(&x, &fam, a.r, o.as_ref(), KrBounds { max_denominator: a.max_den, max_level: a.max_level })?;
    run.say(format!("K_{}({}) ~ {} bits", a.r, format_rational(&x), r.value));
    run.say(format!("witness set {}", r.witness));
    run.say(format!("witness rational {}", format_rational(&r.witness_rational)));
    run.say(format!("{} candidates searched", r.candidates));
    Ok(Status::Ok)
}
