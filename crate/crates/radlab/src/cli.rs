//! Command-line driver: configuration, subcommands, and report emission.
//!
//! Exit codes: 0 = all checks pass, 2 = check failure, 3 = config error.

use crate::atoms::{extract_coefficients, reconstruct_pipeline, AtomCoefficients, AtomParams};
use crate::geometry::{verify_regular, ProbeConfig, RadialCovering};
use crate::grid::GridFunction;
use crate::lp::{make_lp_pair, random_band_limited_radial};
use crate::norms::{
    besov_morrey_norm, besov_type_norm, lp_norm, morrey_norm, sobolev_morrey_norm, BallFamily,
    CubeFamily,
};
use crate::radial::{predicted_envelope, psi0, witness_phi_jr, Region};
use crate::regions::{classify, classify_sobolev_morrey, embedding_check, Ext, ParameterPoint};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::Rational64;
use rand::SeedableRng;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "radlab", about = "Radial function-space laboratory")]
pub struct Cli {
    /// JSON configuration file; CLI flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for all randomized test families.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for reports and curves.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Exit nonzero if any acceptance assertion fails.
    #[arg(long, global = true)]
    pub check: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a radial covering and verify its regularity clauses.
    Covering(CoveringArgs),
    /// Compute a norm of a stored grid function.
    Norm(NormArgs),
    /// Atomic decomposition: coefficients plus reconstruction error.
    Decompose(DecomposeArgs),
    /// Generate decay witnesses and fit slopes against the predicted envelope.
    Decay(DecayArgs),
    /// Classify a parameter point, or compare two spaces.
    Classify(ClassifyArgs),
}

#[derive(Args, Debug, Default)]
pub struct CoveringArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub j_max: Option<u32>,
    #[arg(long)]
    pub k_max: Option<u32>,
}

#[derive(Args, Debug, Default)]
pub struct NormArgs {
    /// GFN1 grid-function file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// One of: lp, morrey, sobolev-morrey, besov-type, besov-morrey.
    #[arg(long)]
    pub kind: Option<String>,
    /// Plain L^p path (alias for --kind lp).
    #[arg(long)]
    pub lp: bool,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub j_max: Option<u32>,
}

#[derive(Args, Debug, Default)]
pub struct DecomposeArgs {
    /// GFN1 input; a seeded radial test function is generated if absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub j_max: Option<u32>,
    #[arg(long)]
    pub k_max: Option<u32>,
    /// Maximum allowed relative reconstruction error in --check mode.
    #[arg(long)]
    pub max_error: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct DecayArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Witness probe radii exponents (peaks at 2^r), comma separated.
    #[arg(long)]
    pub r_exponents: Option<String>,
    /// Allowed |fitted - predicted| slope deviation in --check mode.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// Rational, e.g. "1/2".
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Emit a Markdown sweep table over a small grid instead of one point.
    #[arg(long)]
    pub sweep: bool,
}

fn parse_rat(s: &str) -> Result<Rational64> {
    s.parse()
        .map_err(|e| Error::Config(format!("bad rational {s:?}: {e}")))
}

fn parse_ext(s: &str) -> Result<Ext> {
    if s == "inf" || s == "infinity" {
        Ok(Ext::Infinity)
    } else {
        Ok(Ext::Finite(parse_rat(s)?))
    }
}

/// Config lookup helper: flag override, then config file, then default.
struct Cfg(Value);

impl Cfg {
    fn load(path: &Option<PathBuf>, section: &str) -> Result<Cfg> {
        let v = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                let root: Value = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                root.get(section).cloned().unwrap_or(Value::Null)
            }
            None => Value::Null,
        };
        Ok(Cfg(v))
    }

    fn f64(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.0.get(key) {
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::Config(format!("config field {key} must be a number"))),
            None => Ok(default),
        }
    }

    fn usize(&self, key: &str, flag: Option<usize>, default: usize) -> Result<usize> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.0.get(key) {
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::Config(format!("config field {key} must be an integer"))),
            None => Ok(default),
        }
    }

    fn u32(&self, key: &str, flag: Option<u32>, default: u32) -> Result<u32> {
        Ok(self.usize(key, flag.map(|v| v as usize), default as usize)? as u32)
    }

    fn string(&self, key: &str, flag: Option<&String>, default: &str) -> String {
        if let Some(v) = flag {
            return v.clone();
        }
        self.0
            .get(key)
            .and_then(|v| v.as_str())
            .unwrap_or(default)
            .to_string()
    }
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(path)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn timestamp() -> String {
    // Wall-clock seconds; excluded from determinism comparisons.
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default()
}

/// Run the parsed command; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match dispatch(cli) {
        Ok(all_checks_pass) => {
            if cli.check && !all_checks_pass {
                2
            } else {
                0
            }
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("config error: {e}");
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Covering(a) => cmd_covering(cli, a),
        Command::Norm(a) => cmd_norm(cli, a),
        Command::Decompose(a) => cmd_decompose(cli, a),
        Command::Decay(a) => cmd_decay(cli, a),
        Command::Classify(a) => cmd_classify(cli, a),
    }
}

fn cmd_covering(cli: &Cli, a: &CoveringArgs) -> Result<bool> {
    let cfg = Cfg::load(&cli.config, "covering")?;
    let n = cfg.usize("n", a.n, 2)?;
    let j_max = cfg.u32("j_max", a.j_max, 3)?;
    let k_max = cfg.u32("k_max", a.k_max, 64)?;
    let cov = RadialCovering::build(n, j_max, k_max)?;
    let report = verify_regular(&cov, &ProbeConfig::default());
    let doc = json!({
        "timestamp": timestamp(),
        "covering": cov.to_json(),
        "report": serde_json::to_value(&report)?,
    });
    let path = write_json(&cli.out, "covering.json", &doc)?;
    println!(
        "covering n={n} j_max={j_max} k_max={k_max}: {} ({} cells) -> {}",
        if report.pass { "regular" } else { "FAILED" },
        cov.total_cells(),
        path.display()
    );
    Ok(report.pass)
}

fn cmd_norm(cli: &Cli, a: &NormArgs) -> Result<bool> {
    let cfg = Cfg::load(&cli.config, "norm")?;
    let input = a
        .input
        .clone()
        .or_else(|| cfg.0.get("input").and_then(|v| v.as_str()).map(Into::into))
        .ok_or_else(|| Error::Config("norm requires --input FILE (GFN1)".into()))?;
    let f = GridFunction::load(&input)?;
    let kind = if a.lp {
        "lp".to_string()
    } else {
        cfg.string("kind", a.kind.as_ref(), "lp")
    };
    let p = cfg.f64("p", a.p, 2.0)?;
    let pair = make_lp_pair();
    let j_max = cfg.u32(
        "j_max",
        a.j_max,
        pair.max_level(f.h()).max(0) as u32,
    )?;
    let value = match kind.as_str() {
        "lp" => json!({"value": lp_norm(&f, p)}),
        "morrey" => {
            let u = cfg.f64("u", a.u, p)?;
            let fam = BallFamily::default_for(&f);
            morrey_norm(&f, p, u, &fam)?.to_json()
        }
        "sobolev-morrey" => {
            let u = cfg.f64("u", a.u, p)?;
            let m = cfg.usize("m", a.m, 1)?;
            let fam = BallFamily::default_for(&f);
            sobolev_morrey_norm(&f, m, p, u, &fam)?.to_json()
        }
        "besov-type" => {
            let s = cfg.f64("s", a.s, 1.0)?;
            let q = cfg.f64("q", a.q, 2.0)?;
            let tau = cfg.f64("tau", a.tau, 0.0)?;
            let fam = CubeFamily::default_for(&f);
            besov_type_norm(&f, s, tau, p, q, &pair, &fam, j_max)?.to_json()
        }
        "besov-morrey" => {
            let s = cfg.f64("s", a.s, 1.0)?;
            let q = cfg.f64("q", a.q, 2.0)?;
            let u = cfg.f64("u", a.u, p)?;
            let fam = BallFamily::default_for(&f);
            besov_morrey_norm(&f, s, u, p, q, &pair, &fam, j_max)?.to_json()
        }
        other => return Err(Error::Config(format!("unknown norm kind {other:?}"))),
    };
    let doc = json!({
        "timestamp": timestamp(),
        "input": input.display().to_string(),
        "kind": kind,
        "result": value,
    });
    let path = write_json(&cli.out, "norm.json", &doc)?;
    println!("{kind} norm -> {}", path.display());
    println!("{}", serde_json::to_string(&doc["result"])?);
    Ok(true)
}

fn cmd_decompose(cli: &Cli, a: &DecomposeArgs) -> Result<bool> {
    let cfg = Cfg::load(&cli.config, "decompose")?;
    let s = cfg.f64("s", a.s, 1.0)?;
    let p = cfg.f64("p", a.p, 2.0)?;
    let q = cfg.f64("q", a.q, 2.0)?;
    let tau = cfg.f64("tau", a.tau, 0.0)?;
    let j_max = cfg.u32("j_max", a.j_max, 4)?;
    let k_max = cfg.u32("k_max", a.k_max, 64)?;
    let max_error = cfg.f64("max_error", a.max_error, 0.05)?;
    let f = match &a.input {
        Some(path) => GridFunction::load(path)?,
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
            random_band_limited_radial(2, 256, 8.0, 3.0, &mut rng)
        }
    };
    let pair = make_lp_pair();
    let cov = RadialCovering::build(f.n, j_max, k_max)?;
    let params = AtomParams::minimal(f.n, s, p, tau);
    let coeffs = extract_coefficients(&f, &cov, &pair, &params)?;
    let rec = reconstruct_pipeline(&f, &cov, &pair, j_max)?;
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (x, y) in rec.data.iter().zip(&f.data) {
        diff += (x - y).norm_sqr();
        norm += y.norm_sqr();
    }
    let rel_err = if norm > 0.0 { (diff / norm).sqrt() } else { 0.0 };
    write_text(&cli.out, "coefficients.csv", &coeffs.to_csv())?;
    let nonzero = match &coeffs {
        AtomCoefficients::General(m) => m.len(),
        AtomCoefficients::Radial(m) => m.len(),
    };
    let doc = json!({
        "timestamp": timestamp(),
        "params": {"s": s, "p": p, "q": q, "tau": tau, "j_max": j_max, "k_max": k_max,
                    "L": params.big_l, "M": params.big_m},
        "coefficients": nonzero,
        "max_coefficient": coeffs.max_abs(),
        "reconstruction_relative_l2": rel_err,
    });
    let path = write_json(&cli.out, "decompose.json", &doc)?;
    println!(
        "decompose: {nonzero} coefficients, reconstruction error {rel_err:.3e} -> {}",
        path.display()
    );
    Ok(rel_err <= max_error)
}

fn cmd_decay(cli: &Cli, a: &DecayArgs) -> Result<bool> {
    let cfg = Cfg::load(&cli.config, "decay")?;
    let n = cfg.usize("n", a.n, 2)?;
    let s = cfg.f64("s", a.s, 1.0)?;
    let p = cfg.f64("p", a.p, 2.0)?;
    let q = cfg.f64("q", a.q, 2.0)?;
    let tau = cfg.f64("tau", a.tau, 0.0)?;
    let tolerance = cfg.f64("tolerance", a.tolerance, 0.15)?;
    let r_str = cfg.string("r_exponents", a.r_exponents.as_ref(), "2,3,4,5,6");
    let r_exps: Vec<i32> = r_str
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad exponent {t:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if r_exps.len() < 4 {
        return Err(Error::Config("need at least 4 probe exponents".into()));
    }
    let pp = float_point(n as u32, s, tau, p, q)?;
    let envelope = predicted_envelope(&pp, Region::Far)?;
    let predicted = envelope
        .exponent()
        .ok_or_else(|| Error::Regime("predicted envelope is not a power law".into()))?;

    // Witness family: peaks of phi_{0,r} at radii 2^r, normalized by the
    // computed Besov-type norm of the corresponding grid function.
    let pair = make_lp_pair();
    let mut samples = Vec::new();
    let mut csv = String::from("radius,value,predicted\n");
    for &r in &r_exps {
        let radius = (2.0f64).powi(r);
        let big_r = (radius * 4.0).max(32.0);
        let npts = 1024usize;
        let g = GridFunction::from_radial_fn(n, npts, big_r, |t| psi0((t - radius).abs()))?;
        let fam = CubeFamily::default_for(&g);
        let jm = pair.max_level(g.h()).max(0) as u32;
        let norm = besov_type_norm(&g, s, tau, p, q, &pair, &fam, jm)?.value;
        let prof = witness_phi_jr(0, r, psi0, n, big_r, 1 << 14)?;
        let peak = prof.window_sup(radius)?;
        let value = peak / norm;
        csv.push_str(&format!(
            "{radius},{value},{}\n",
            radius.powf(predicted)
        ));
        samples.push((radius, value));
    }
    let fit = fit_loglog(&samples)?;
    write_text(&cli.out, "decay.csv", &csv)?;
    let doc = json!({
        "timestamp": timestamp(),
        "params": {"n": n, "s": s, "p": p, "q": q, "tau": tau},
        "predicted_exponent": predicted,
        "fitted_slope": fit.0,
        "residual": fit.1,
        "tolerance": tolerance,
    });
    let path = write_json(&cli.out, "decay.json", &doc)?;
    println!(
        "decay: fitted slope {:.4} vs predicted {predicted:.4} -> {}",
        fit.0,
        path.display()
    );
    Ok((fit.0 - predicted).abs() <= tolerance)
}

fn fit_loglog(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(_, v)| v > 0.0)
        .map(|&(r, v)| (r.log2(), v.log2()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::OutOfRange("fewer than 4 nonzero samples".into()));
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;
    let residual = (pts
        .iter()
        .map(|&(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok((slope, residual))
}

/// Convert float CLI parameters to the nearest small rationals for the
/// exact classifier (denominators up to 64).
fn float_point(n: u32, s: f64, tau: f64, p: f64, q: f64) -> Result<ParameterPoint> {
    let to_rat = |v: f64| -> Rational64 {
        let den = 64i64;
        Rational64::new((v * den as f64).round() as i64, den)
    };
    let to_ext = |v: f64| -> Ext {
        if v.is_infinite() {
            Ext::Infinity
        } else {
            Ext::Finite(to_rat(v))
        }
    };
    ParameterPoint::new(n, to_rat(s), to_rat(tau), to_ext(p), to_ext(q))
}

fn cmd_classify(cli: &Cli, a: &ClassifyArgs) -> Result<bool> {
    let cfg = Cfg::load(&cli.config, "classify")?;
    let n = cfg.u32("n", a.n, 2)?;
    if a.sweep {
        return classify_sweep(cli, n);
    }
    let s = parse_rat(&cfg.string("s", a.s.as_ref(), "1"))?;
    let tau = parse_rat(&cfg.string("tau", a.tau.as_ref(), "0"))?;
    let p = parse_ext(&cfg.string("p", a.p.as_ref(), "2"))?;
    let q = parse_ext(&cfg.string("q", a.q.as_ref(), "2"))?;
    let mut pp = ParameterPoint::new(n, s, tau, p, q)?;
    let report = if a.u.is_some() || a.m.is_some() || cfg.0.get("u").is_some() {
        let u = parse_ext(&cfg.string("u", a.u.as_ref(), "2"))?;
        let m = cfg.u32("m", a.m, 1)?;
        pp = pp.with_morrey(u, Some(m))?;
        classify_sobolev_morrey(&pp)?
    } else {
        classify(&pp)?
    };
    let doc = json!({
        "timestamp": timestamp(),
        "point": serde_json::to_value(pp)?,
        "report": serde_json::to_value(&report)?,
    });
    let path = write_json(&cli.out, "classify.json", &doc)?;
    println!("{}", serde_json::to_string_pretty(&doc["report"])?);
    println!("-> {}", path.display());
    Ok(true)
}

fn classify_sweep(cli: &Cli, n: u32) -> Result<bool> {
    let mut md = String::from("| s | tau | p | q | far | near | sharpness |\n|---|---|---|---|---|---|---|\n");
    for s_num in [-1i64, 1, 2, 3, 4] {
        for tau_num in [0i64, 1, 2] {
            for p_num in [1i64, 2, 4] {
                for q in [Ext::int(1), Ext::int(2), Ext::Infinity] {
                    let pp = ParameterPoint::new(
                        n,
                        Rational64::new(s_num, 2),
                        Rational64::new(tau_num, 8),
                        Ext::int(p_num),
                        q,
                    )?;
                    let rep = classify(&pp)?;
                    md.push_str(&format!(
                        "| {} | {} | {} | {} | {:?} | {:?} | {:?} |\n",
                        pp.s, pp.tau, pp.p, pp.q, rep.far.value, rep.near.value,
                        rep.sharpness.value
                    ));
                }
            }
        }
    }
    let path = write_text(&cli.out, "classify_sweep.md", &md)?;
    println!("sweep table -> {}", path.display());
    Ok(true)
}

/// Helper for tests: check two spaces.
pub fn relation_json(a: &crate::regions::Space, b: &crate::regions::Space) -> Value {
    json!({ "relation": format!("{:?}", embedding_check(a, b)) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_helpers() {
        assert_eq!(parse_ext("inf").unwrap(), Ext::Infinity);
        assert_eq!(parse_ext("3/4").unwrap(), Ext::ratio(3, 4));
        assert!(parse_ext("x/y").is_err());
    }

    #[test]
    fn classify_command_radial_lemma_point() {
        let dir = std::env::temp_dir().join("radlab-test-classify");
        let cli = Cli {
            config: None,
            seed: 0,
            out: dir.clone(),
            check: false,
            jobs: None,
            command: Command::Classify(ClassifyArgs {
                n: Some(2),
                s: Some("1".into()),
                tau: Some("0".into()),
                p: Some("2".into()),
                q: Some("2".into()),
                u: None,
                m: None,
                sweep: false,
            }),
        };
        assert_eq!(run(&cli), 0);
        let text = std::fs::read_to_string(dir.join("classify.json")).unwrap();
        assert!(text.contains("-1/2"), "{text}");
    }

    #[test]
    fn norm_lp_matches_morrey_u_eq_p() {
        let dir = std::env::temp_dir().join("radlab-test-norm");
        std::fs::create_dir_all(&dir).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f = random_band_limited_radial(2, 64, 8.0, 2.0, &mut rng);
        let input = dir.join("f.gfn1");
        f.save(&input).unwrap();
        let run_kind = |kind: &str, lp: bool, out: &str| -> f64 {
            let out_dir = dir.join(out);
            let cli = Cli {
                config: None,
                seed: 0,
                out: out_dir.clone(),
                check: false,
                jobs: None,
                command: Command::Norm(NormArgs {
                    input: Some(input.clone()),
                    kind: Some(kind.into()),
                    lp,
                    p: Some(2.0),
                    u: Some(2.0),
                    ..Default::default()
                }),
            };
            assert_eq!(run(&cli), 0);
            let text = std::fs::read_to_string(out_dir.join("norm.json")).unwrap();
            let v: Value = serde_json::from_str(&text).unwrap();
            v["result"]["value"].as_f64().unwrap()
        };
        let lp = run_kind("lp", true, "lp");
        let morrey = run_kind("morrey", false, "morrey");
        assert!(
            (lp - morrey).abs() <= 1e-12 * lp,
            "lp = {lp}, morrey = {morrey}"
        );
    }

    #[test]
    fn decompose_deterministic_outputs() {
        let base = std::env::temp_dir().join("radlab-test-decompose");
        let mut outputs = Vec::new();
        for run_idx in 0..2 {
            let out_dir = base.join(format!("run{run_idx}"));
            let cli = Cli {
                config: None,
                seed: 42,
                out: out_dir.clone(),
                check: true,
                jobs: None,
                command: Command::Decompose(DecomposeArgs {
                    j_max: Some(2),
                    k_max: Some(32),
                    max_error: Some(0.5),
                    ..Default::default()
                }),
            };
            assert_eq!(run(&cli), 0);
            outputs.push(
                std::fs::read_to_string(out_dir.join("coefficients.csv")).unwrap(),
            );
        }
        assert_eq!(outputs[0], outputs[1], "coefficient CSV not deterministic");
    }

    #[test]
    fn config_error_exit_code() {
        let cli = Cli {
            config: Some(PathBuf::from("/nonexistent/config.json")),
            seed: 0,
            out: std::env::temp_dir().join("radlab-test-cfg"),
            check: false,
            jobs: None,
            command: Command::Covering(CoveringArgs::default()),
        };
        assert_eq!(run(&cli), 3);
    }
}
