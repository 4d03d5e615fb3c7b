use std::time::Instant;

use serde::Serialize;
use symsub::dmcg::{self, DmcgConfig, Variant};
use symsub::instance::InstanceDoc;
use symsub::mcg::{self, McgConfig};
use symsub::multilinear::{self, Estimator, Mode};
use symsub::oracle::{self, CardinalityMode, BRUTE_LIMIT};
use symsub::pipage::pipage_round;
use symsub::selfcheck::{run_self_check, SelfCheckConfig};
use symsub::twosided::{natural_order, run_two_sided};
use symsub::welfare::{self, WelfareInstance};
use symsub::{Oracle, Polytope, Report, Subset};

use crate::report::{self, Format, Metadata, RunReport};
use crate::{Algorithm, Cli, Exit, Failure};

pub const DEFAULT_WELFARE_TRIALS: usize = 100_000;

fn load(cli: &Cli) -> Result<(String, InstanceDoc), Failure> {
    let path = cli
        .instance
        .as_ref()
        .ok_or_else(|| Failure::flags("--instance is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(Exit::Parse, format!("cannot read {}: {e}", path.display())))?;
    let doc =
        InstanceDoc::from_json(&text).map_err(|e| Failure::new(Exit::Parse, format!("{}: {e}", path.display())))?;
    Ok((path.display().to_string(), doc))
}

/// Rejects flags the algorithm does not read.
fn check_flags(cli: &Cli, alg: Algorithm) -> Result<(), Failure> {
    use Algorithm::*;
    let continuous = matches!(alg, Mcg | DmcgSymmetric | DmcgGeneral);
    if !continuous && cli.t.is_some() {
        return Err(Failure::flags(format!("--T does not apply to {}", alg.name())));
    }
    if !continuous && cli.steps.is_some() {
        return Err(Failure::flags(format!("--steps does not apply to {}", alg.name())));
    }
    if matches!(alg, TwoSided | BruteUnconstrained) && cli.k.is_some() {
        return Err(Failure::flags(format!("--k does not apply to {}", alg.name())));
    }
    if matches!(
        alg,
        TwoSided | BruteUnconstrained | BruteCardinality | BruteCardinalityLe | BrutePolytope | BruteWelfare
    ) && cli.samples.is_some()
    {
        return Err(Failure::flags(format!("--samples does not apply to {}", alg.name())));
    }
    if let Some(t) = cli.t {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Failure::flags("--T must be finite and non-negative"));
        }
    }
    if cli.steps == Some(0) || cli.samples == Some(0) {
        return Err(Failure::flags("--steps and --samples must be positive"));
    }
    Ok(())
}

fn objective(doc: &InstanceDoc, alg: Algorithm) -> Result<Oracle, Failure> {
    let spec = doc.objective().ok_or_else(|| {
        Failure::flags(format!(
            "{} needs a set-function instance, not a welfare instance",
            alg.name()
        ))
    })?;
    Ok(spec.build()?)
}

/// The polytope of a constrained document, or `|S| <= k` from `--k`.
fn polytope(cli: &Cli, doc: &InstanceDoc, n: usize) -> Result<Polytope, Failure> {
    match (doc, cli.k) {
        (InstanceDoc::Constrained(c), None) => Ok(c.polytope.build(n)?),
        (InstanceDoc::Constrained(_), Some(_)) => Err(Failure::flags("the instance carries a polytope; drop --k")),
        (_, Some(k)) => Ok(Polytope::cardinality(n, k)?),
        (_, None) => Err(Failure::flags("needs --k or a constrained instance")),
    }
}

/// `k` from `--k` or from a cardinality polytope in the instance.
fn cardinality(cli: &Cli, doc: &InstanceDoc, n: usize) -> Result<usize, Failure> {
    let k = match (doc, cli.k) {
        (InstanceDoc::Constrained(c), None) => c
            .polytope
            .build(n)?
            .cardinality_bound()
            .ok_or_else(|| Failure::flags("the instance polytope is not a cardinality constraint"))?,
        (InstanceDoc::Constrained(_), Some(_)) => {
            return Err(Failure::flags("the instance carries a polytope; drop --k"))
        }
        (_, Some(k)) => k,
        (_, None) => return Err(Failure::flags("--k is required")),
    };
    if k > n {
        return Err(Failure::flags(format!("k = {k} exceeds n = {n}")));
    }
    Ok(k)
}

fn estimator(cli: &Cli, n: usize) -> Estimator {
    match cli.samples {
        Some(s) => Estimator::sampled(s, cli.seed),
        None => Estimator::auto(n, cli.seed),
    }
}

fn mode_name(est: &Estimator) -> &'static str {
    match est.mode {
        Mode::Exact => "exact",
        Mode::Sampled => "sampled",
    }
}

/// Computes the optimum with a separate query counter, honouring
/// `--require-oracle` when `n` is out of reach.
fn optimum<F>(cli: &Cli, n: usize, solve: F) -> Result<Option<f64>, Failure>
where
    F: FnOnce() -> symsub::Result<f64>,
{
    if n > BRUTE_LIMIT {
        return if cli.require_oracle {
            Err(Failure::new(
                Exit::OracleLimit,
                format!("n = {n} exceeds the brute-force limit of {BRUTE_LIMIT}"),
            ))
        } else {
            Ok(None)
        };
    }
    match solve() {
        Ok(v) => Ok(Some(v)),
        Err(symsub::Error::TooLarge { .. }) if !cli.require_oracle => Ok(None),
        Err(e @ symsub::Error::TooLarge { .. }) => Err(Failure::new(Exit::OracleLimit, e.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn ratio(value: f64, opt: Option<f64>) -> Option<f64> {
    opt.map(|o| if o > 0.0 { value / o } else { 1.0 })
}

fn base_report(cli: &Cli, alg: Algorithm, instance: String, n: usize) -> RunReport {
    RunReport {
        algorithm: alg.name(),
        instance,
        n,
        k: None,
        t: None,
        steps: None,
        samples: cli.samples,
        seed: cli.seed,
        estimator: None,
        value: 0.0,
        value_std_err: None,
        fractional_value: None,
        opt: None,
        ratio: None,
        theoretical_ratio: 1.0,
        theoretical_regime: None,
        queries: 0,
        solution: None,
        warnings: Vec::new(),
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let alg = cli
        .algorithm
        .ok_or_else(|| Failure::flags("--algorithm is required (or use --self-check or the sweep subcommand)"))?;
    check_flags(cli, alg)?;
    let (path, doc) = load(cli)?;
    let start = Instant::now();
    let report = match alg {
        Algorithm::Mcg => run_mcg(cli, path, &doc)?,
        Algorithm::DmcgSymmetric => run_dmcg(cli, path, &doc, Variant::Symmetric)?,
        Algorithm::DmcgGeneral => run_dmcg(cli, path, &doc, Variant::General)?,
        Algorithm::TwoSided => run_two_sided_alg(cli, path, &doc)?,
        Algorithm::WelfareRandom | Algorithm::BruteWelfare => run_welfare(cli, alg, path, &doc)?,
        _ => run_brute(cli, alg, path, &doc)?,
    };
    let meta = Metadata::collect(start.elapsed());
    log::info!("{} finished in {:.1} ms", report.algorithm, meta.wall_time_ms);
    match cli.format {
        Format::Json => report::write_json(cli.out.as_deref(), &report, &meta),
        Format::Csv => {
            let row = report.csv_row();
            let header: Vec<&str> = row.iter().map(|(h, _)| *h).collect();
            report::write_csv(
                cli.out.as_deref(),
                &header,
                &[row.into_iter().map(|(_, v)| v).collect()],
            )
        }
    }
}

fn run_mcg(cli: &Cli, path: String, doc: &InstanceDoc) -> Result<RunReport, Failure> {
    let f = objective(doc, Algorithm::Mcg)?;
    let n = f.n();
    let p = polytope(cli, doc, n)?;
    let est = estimator(cli, n);
    let defaults = McgConfig::default_for(&p, est);
    let cfg = McgConfig::new(cli.t.unwrap_or(defaults.t), cli.steps.unwrap_or(defaults.steps), est);
    let (y, traj) = mcg::run_mcg(&f, &p, &cfg)?;
    let mut r = base_report(cli, Algorithm::Mcg, path, n);
    if !f.is_symmetric() {
        r.warnings
            .push("objective is not symmetric; the guarantee does not apply".into());
    }
    r.warnings.extend(traj.warning.clone());
    r.k = p.cardinality_bound();
    r.t = Some(cfg.t);
    r.steps = Some(cfg.steps);
    r.estimator = Some(mode_name(&est));
    r.theoretical_regime = Some(traj.theoretical_regime);
    r.fractional_value = Some(traj.last().value);
    match p.groups() {
        Ok(_) => {
            let s = pipage_round(&f, &y, &p, &est, cli.seed)?;
            r.value = f.eval(&s);
            r.solution = Some(s.to_vec());
        }
        Err(_) => {
            r.warnings
                .push(format!("{} polytope is not rounded; value is F(y)", p.kind_name()));
            r.value = traj.last().value;
        }
    }
    r.queries = f.query_count();
    let g = f.fresh();
    r.opt = optimum(cli, n, || Ok(oracle::brute_polytope_integral(&g, &p)?.1))?;
    r.ratio = ratio(r.value, r.opt);
    r.theoretical_ratio = 0.5 * (1.0 - (-2.0 * cfg.t).exp());
    Ok(r)
}

fn run_dmcg(cli: &Cli, path: String, doc: &InstanceDoc, variant: Variant) -> Result<RunReport, Failure> {
    let alg = match variant {
        Variant::Symmetric => Algorithm::DmcgSymmetric,
        Variant::General => Algorithm::DmcgGeneral,
    };
    let f = objective(doc, alg)?;
    let n = f.n();
    if variant == Variant::Symmetric && !f.is_symmetric() {
        return Err(Failure::flags(
            "dmcg-symmetric needs a symmetric objective; use dmcg-general",
        ));
    }
    let k = cardinality(cli, doc, n)?;
    let est = estimator(cli, n);
    let mut cfg = DmcgConfig::new(variant, cli.steps.unwrap_or(100 * n.max(1)), est);
    cfg.t = cli.t;
    let (y, traj) = dmcg::run_dmcg(&f, k, &cfg)?;
    let mut r = base_report(cli, alg, path, n);
    r.k = Some(k);
    r.t = Some(traj.t);
    r.steps = Some(cfg.steps);
    r.estimator = Some(mode_name(&est));
    r.theoretical_regime = Some(traj.theoretical_regime);
    r.fractional_value = Some(multilinear::eval(&f, &y, &est)?);
    let p = Polytope::cardinality(n, k)?;
    let s = pipage_round(&f, &y, &p, &est, cli.seed)?;
    r.value = f.eval(&s);
    r.solution = Some(s.to_vec());
    r.queries = f.query_count();
    let g = f.fresh();
    r.opt = optimum(cli, n, || Ok(oracle::brute_cardinality(&g, k, CardinalityMode::Eq)?.1))?;
    r.ratio = ratio(r.value, r.opt);
    let small = k.min(n - k);
    r.theoretical_ratio = match variant {
        Variant::Symmetric if small == 0 => 1.0,
        Variant::Symmetric => dmcg::symmetric_ratio(n, small),
        Variant::General => (-1.0f64).exp(),
    };
    Ok(r)
}

fn run_two_sided_alg(cli: &Cli, path: String, doc: &InstanceDoc) -> Result<RunReport, Failure> {
    if matches!(doc, InstanceDoc::Constrained(_)) {
        return Err(Failure::flags(
            "two-sided is unconstrained; the instance carries a polytope",
        ));
    }
    let f = objective(doc, Algorithm::TwoSided)?;
    let n = f.n();
    let (s, _) = run_two_sided(&f, &natural_order(n))?;
    let mut r = base_report(cli, Algorithm::TwoSided, path, n);
    r.value = f.eval(&s);
    r.solution = Some(s.to_vec());
    r.queries = f.query_count();
    let g = f.fresh();
    r.opt = optimum(cli, n, || Ok(oracle::brute_unconstrained(&g)?.1))?;
    r.ratio = ratio(r.value, r.opt);
    r.theoretical_ratio = if f.is_symmetric() { 0.5 } else { 1.0 / 3.0 };
    Ok(r)
}

fn welfare_instance(cli: &Cli, doc: &InstanceDoc) -> Result<WelfareInstance, Failure> {
    match (doc, cli.k) {
        (InstanceDoc::Welfare(w), None) => Ok(w.build()?),
        (InstanceDoc::Welfare(_), Some(_)) => Err(Failure::flags("the welfare instance fixes k; drop --k")),
        (InstanceDoc::Objective(f), Some(k)) => Ok(WelfareInstance::new(k, f.build()?)?),
        (InstanceDoc::Objective(_), None) => Err(Failure::flags("--k (player count) is required")),
        (InstanceDoc::Constrained(_), _) => Err(Failure::flags("welfare takes no polytope")),
    }
}

fn run_welfare(cli: &Cli, alg: Algorithm, path: String, doc: &InstanceDoc) -> Result<RunReport, Failure> {
    let inst = welfare_instance(cli, doc)?;
    let n = inst.items();
    let mut r = base_report(cli, alg, path, n);
    r.k = Some(inst.k);
    let opt_inst = WelfareInstance::new(inst.k, inst.utility.fresh())?;
    let opt = if alg == Algorithm::BruteWelfare || n <= BRUTE_LIMIT {
        match welfare::brute_force_welfare(&opt_inst) {
            Ok((a, v)) => Some((a, v)),
            Err(e @ symsub::Error::TooLarge { .. }) => {
                if cli.require_oracle || alg == Algorithm::BruteWelfare {
                    return Err(Failure::new(Exit::OracleLimit, e.to_string()));
                }
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else if cli.require_oracle {
        return Err(Failure::new(
            Exit::OracleLimit,
            format!("n = {n} exceeds the brute-force limit"),
        ));
    } else {
        None
    };
    r.opt = opt.as_ref().map(|o| o.1);
    if alg == Algorithm::BruteWelfare {
        let (a, v) = opt.expect("brute-welfare errors without an optimum");
        r.value = v;
        r.solution = Some(a.assignment);
        r.queries = opt_inst.utility.query_count();
        r.ratio = Some(1.0);
        return Ok(r);
    }
    let trials = cli.samples.unwrap_or(DEFAULT_WELFARE_TRIALS);
    r.samples = Some(trials);
    let est = welfare::mean_random_total(&inst, trials, cli.seed);
    r.value = est.mean;
    r.value_std_err = Some(est.std_err);
    r.solution = Some(welfare::random_assign(&inst, cli.seed).assignment);
    r.queries = inst.utility.query_count();
    r.ratio = ratio(r.value, r.opt);
    r.theoretical_ratio = welfare::ratio_floor(inst.k);
    Ok(r)
}

fn run_brute(cli: &Cli, alg: Algorithm, path: String, doc: &InstanceDoc) -> Result<RunReport, Failure> {
    let f = objective(doc, alg)?;
    let n = f.n();
    if n > BRUTE_LIMIT {
        return Err(Failure::new(
            Exit::OracleLimit,
            format!("n = {n} exceeds the brute-force limit of {BRUTE_LIMIT}"),
        ));
    }
    let mut r = base_report(cli, alg, path, n);
    let (s, v): (Subset, f64) = match alg {
        Algorithm::BruteUnconstrained => {
            if matches!(doc, InstanceDoc::Constrained(_)) {
                return Err(Failure::flags(
                    "brute-unconstrained takes no polytope; use brute-polytope",
                ));
            }
            oracle::brute_unconstrained(&f)?
        }
        Algorithm::BruteCardinality | Algorithm::BruteCardinalityLe => {
            let k = cardinality(cli, doc, n)?;
            r.k = Some(k);
            let mode = if alg == Algorithm::BruteCardinality {
                CardinalityMode::Eq
            } else {
                CardinalityMode::Le
            };
            oracle::brute_cardinality(&f, k, mode)?
        }
        Algorithm::BrutePolytope => {
            let p = polytope(cli, doc, n)?;
            r.k = p.cardinality_bound();
            oracle::brute_polytope_integral(&f, &p)?
        }
        _ => unreachable!("dispatched elsewhere"),
    };
    r.value = v;
    r.opt = Some(v);
    r.ratio = Some(1.0);
    r.solution = Some(s.to_vec());
    r.queries = f.query_count();
    Ok(r)
}

#[derive(Serialize)]
struct SelfCheckDoc {
    seed: u64,
    trials: usize,
    passed: bool,
    suite: Report,
}

pub fn self_check(cli: &Cli) -> Result<(), Failure> {
    if cli.steps.is_some() && cli.steps == Some(0) {
        return Err(Failure::flags("--steps must be positive"));
    }
    let cfg = SelfCheckConfig {
        trials: cli.samples.unwrap_or(SelfCheckConfig::default().trials),
        steps: cli.steps,
        seed: cli.seed,
    };
    if cfg.trials < 2 {
        return Err(Failure::flags("--samples must be at least 2 for the self-check"));
    }
    let start = Instant::now();
    let suite = run_self_check(&cfg)?;
    let meta = Metadata::collect(start.elapsed());
    let passed = suite.passed();
    for c in suite.checks.iter().filter(|c| !c.passed()) {
        log::warn!("{} failed: margin {:.3e} {}", c.name, c.margin, c.note);
    }
    match cli.format {
        Format::Json => report::write_json(
            cli.out.as_deref(),
            &SelfCheckDoc {
                seed: cfg.seed,
                trials: cfg.trials,
                passed,
                suite,
            },
            &meta,
        )?,
        Format::Csv => {
            let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let rows: Vec<Vec<String>> = suite
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        serde_json::to_value(c.status)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_owned))
                            .unwrap_or_default(),
                        c.cases.to_string(),
                        c.margin.to_string(),
                        num(c.estimate),
                        num(c.sigma),
                        num(c.bound),
                    ]
                })
                .collect();
            report::write_csv(
                cli.out.as_deref(),
                &["check", "status", "cases", "margin", "estimate", "sigma", "bound"],
                &rows,
            )?
        }
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::new(Exit::SelfCheckFailed, "self-check failed"))
    }
}
