//! Empirical ratio of the symmetric double greedy against the closed-form
//! curve, over random cut instances and a grid of `k/n`.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use symsub::dmcg::{self, DmcgConfig, Variant};
use symsub::oracle::{brute_cardinality, CardinalityMode, BRUTE_LIMIT};
use symsub::pipage::pipage_round;
use symsub::{fixtures, multilinear, par, rng, Estimator, Oracle, Polytope};

use crate::report;
use crate::{Exit, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Graph,
    Hypergraph,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Family::Graph)]
    family: Family,

    /// Ground-set sizes.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    n: Vec<usize>,

    /// Values of `k/n` in (0, 1); `k` is rounded to the nearest integer.
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,

    /// Random instances per grid point.
    #[arg(long, default_value_t = 3)]
    seeds: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 2000)]
    steps: usize,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    n: usize,
    k: usize,
    ratio: f64,
    instance: u64,
}

const HEADER: [&str; 11] = [
    "family",
    "n",
    "k",
    "k_over_n",
    "seed",
    "fractional",
    "value",
    "opt",
    "ratio",
    "curve",
    "margin",
];

fn instance(family: Family, n: usize, seed: u64) -> symsub::Result<Oracle> {
    match family {
        Family::Graph => fixtures::random_graph_cut(n, 0.5, seed),
        Family::Hypergraph => fixtures::random_hypergraph_cut(n, seed),
    }
}

fn solve(args: &SweepArgs, job: Job) -> symsub::Result<Vec<String>> {
    let seed = rng::derive_seed(args.seed, &[job.n as u64, job.k as u64, job.instance]);
    let f = instance(args.family, job.n, seed)?;
    let est = Estimator::auto(job.n, seed);
    let (y, _) = dmcg::run_dmcg(&f, job.k, &DmcgConfig::new(Variant::Symmetric, args.steps, est))?;
    let fractional = multilinear::eval(&f, &y, &est)?;
    let s = pipage_round(&f, &y, &Polytope::cardinality(job.n, job.k)?, &est, seed)?;
    let value = f.eval(&s);
    let (_, opt) = brute_cardinality(&f, job.k, CardinalityMode::Eq)?;
    let ratio = if opt > 0.0 { value / opt } else { 1.0 };
    let small = job.k.min(job.n - job.k);
    let curve = if small == 0 {
        1.0
    } else {
        dmcg::symmetric_ratio(job.n, small)
    };
    let family = args.family.to_possible_value().expect("no skipped variants");
    Ok(vec![
        family.get_name().to_owned(),
        job.n.to_string(),
        job.k.to_string(),
        job.ratio.to_string(),
        seed.to_string(),
        fractional.to_string(),
        value.to_string(),
        opt.to_string(),
        ratio.to_string(),
        curve.to_string(),
        (ratio - curve).to_string(),
    ])
}

pub fn run(args: &SweepArgs) -> Result<(), Failure> {
    if let Some(r) = args.ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Failure::flags(format!("ratio {r} is outside (0, 1)")));
    }
    if args.steps == 0 {
        return Err(Failure::flags("--steps must be positive"));
    }
    if let Some(n) = args.n.iter().find(|n| **n < 2) {
        return Err(Failure::flags(format!("n = {n} is too small; need n >= 2")));
    }
    if !args.ratios.is_empty() {
        if let Some(n) = args.n.iter().find(|n| **n > BRUTE_LIMIT) {
            return Err(Failure::new(
                Exit::OracleLimit,
                format!("n = {n} exceeds the brute-force limit of {BRUTE_LIMIT}"),
            ));
        }
    }
    let mut jobs = Vec::new();
    for &n in &args.n {
        for &ratio in &args.ratios {
            let k = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
            for instance in 0..args.seeds {
                jobs.push(Job { n, k, ratio, instance });
            }
        }
    }
    log::info!("sweep over {} grid points", jobs.len());
    let rows = par::map_slice(&jobs, |job| solve(args, *job))
        .into_iter()
        .collect::<symsub::Result<Vec<_>>>()?;
    report::write_csv(args.out.as_deref(), &HEADER, &rows)
}
