//! Random knapsack experiments comparing the sample-average solution with the
//! robust solutions over a grid of radii.
//!
//! One instance is generated per run; every sample, every radius and every
//! method is evaluated on the same Monte Carlo sample, so differences between
//! methods are not blurred by evaluation noise.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use plotters::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::distort::solve_distr_approx;
use crate::error::{check_dim, Error, Result};
use crate::milp::Status;
use crate::model::{AmbiguitySpec, EmpiricalDistribution, FeasibleSet, Norm, RiskSpec, Selection, SupportSet};
use crate::problems::KnapsackInstance;
use crate::risk::{cvar_discrete, solve_cvar};
use crate::rowgen::solve_distr_rowgen;

/// Below this acceptance probability the sampler switches to the inverse CDF.
pub const MIN_ACCEPTANCE: f64 = 0.01;
const EVAL_CHUNK: usize = 1024;

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const STREAM_INSTANCE: u64 = 0;
const STREAM_SAMPLE: u64 = 1 << 32;
const STREAM_EVAL: u64 = 2 << 32;

/// Normal law conditioned on an interval.
#[derive(Clone, Debug)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub sd: f64,
    pub low: f64,
    pub high: f64,
    sampler: Sampler,
}

#[derive(Clone, Debug)]
enum Sampler {
    Point(f64),
    Rejection(rand_distr::Normal<f64>),
    Inverse { normal: Normal, cdf_low: f64, cdf_high: f64 },
}

impl TruncatedNormal {
    pub fn new(mean: f64, sd: f64, low: f64, high: f64) -> Result<Self> {
        if !(low <= high) || !mean.is_finite() || !sd.is_finite() || sd < 0.0 {
            return Err(Error::invalid("truncated normal needs low <= high and a finite sd >= 0"));
        }
        let sampler = if sd == 0.0 || high == low {
            Sampler::Point(mean.clamp(low, high))
        } else {
            let normal = Normal::new(mean, sd).map_err(|e| Error::invalid(e.to_string()))?;
            let (cdf_low, cdf_high) = (normal.cdf(low), normal.cdf(high));
            if cdf_high - cdf_low >= MIN_ACCEPTANCE {
                Sampler::Rejection(rand_distr::Normal::new(mean, sd).map_err(|e| Error::invalid(e.to_string()))?)
            } else {
                Sampler::Inverse {
                    normal,
                    cdf_low,
                    cdf_high,
                }
            }
        };
        Ok(TruncatedNormal {
            mean,
            sd,
            low,
            high,
            sampler,
        })
    }

    pub fn uses_inverse_cdf(&self) -> bool {
        matches!(self.sampler, Sampler::Inverse { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.sampler {
            Sampler::Point(v) => *v,
            Sampler::Rejection(normal) => loop {
                let v = normal.sample(rng);
                if v >= self.low && v <= self.high {
                    return v;
                }
            },
            Sampler::Inverse {
                normal,
                cdf_low,
                cdf_high,
            } => {
                let u: f64 = rng.random();
                let p = cdf_low + u * (cdf_high - cdf_low);
                normal.inverse_cdf(p).clamp(self.low, self.high)
            }
        }
    }
}

/// A random knapsack instance with independent truncated-normal item costs.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub weights: Vec<f64>,
    pub capacity: f64,
    pub laws: Vec<TruncatedNormal>,
    pub seed: u64,
}

impl GeneratedInstance {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn knapsack(&self) -> Result<KnapsackInstance> {
        KnapsackInstance::new(self.weights.clone(), self.capacity)
    }

    /// The box spanned by the cost intervals.
    pub fn support(&self) -> Result<SupportSet> {
        SupportSet::boxed(
            self.laws.iter().map(|l| l.low).collect(),
            self.laws.iter().map(|l| l.high).collect(),
        )
    }

    fn draw_row<R: Rng + ?Sized>(&self, rng: &mut R, row: &mut [f64]) {
        for (v, law) in row.iter_mut().zip(&self.laws) {
            *v = law.sample(rng);
        }
    }
}

/// `w_i ~ U[0,1]`, `W = 0.4 sum w`, cost of item `i` normal with mean `w_i` and
/// sd `0.7 w_i` truncated to `[max(0, w_i - a_i), max(0, w_i - a_i) + 2 b_i]`
/// with `a_i, b_i ~ U[0,1]`.
pub fn generate_instance(n: usize, seed: u64) -> Result<GeneratedInstance> {
    if n == 0 {
        return Err(Error::invalid("instance size must be positive"));
    }
    let mut rng = stream(seed, STREAM_INSTANCE);
    let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let capacity = 0.4 * weights.iter().sum::<f64>();
    let laws = weights
        .iter()
        .map(|&w| {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            let low = (w - a).max(0.0);
            TruncatedNormal::new(w, 0.7 * w, low, low + 2.0 * b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratedInstance {
        weights,
        capacity,
        laws,
        seed,
    })
}

/// `n_samples` independent cost vectors.
pub fn sample_costs(instance: &GeneratedInstance, n_samples: usize, seed: u64) -> Result<EmpiricalDistribution> {
    let mut rng = stream(seed, STREAM_SAMPLE);
    let rows = (0..n_samples)
        .map(|_| {
            let mut row = vec![0.0; instance.n()];
            instance.draw_row(&mut rng, &mut row);
            row
        })
        .collect();
    EmpiricalDistribution::new(rows)
}

/// A fixed Monte Carlo sample used to estimate cost quantiles of solutions.
#[derive(Clone, Debug)]
pub struct EvaluationSample {
    n: usize,
    rows: usize,
    data: Vec<f64>,
}

impl EvaluationSample {
    /// Rows are generated in chunks with their own streams, so the result does
    /// not depend on the number of threads.
    pub fn new(instance: &GeneratedInstance, size: usize, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("Monte Carlo sample size must be positive"));
        }
        let n = instance.n();
        let mut data = vec![0.0; size * n];
        data.par_chunks_mut(EVAL_CHUNK * n).enumerate().for_each(|(c, chunk)| {
            let mut rng = stream(seed, STREAM_EVAL + c as u64);
            for row in chunk.chunks_mut(n) {
                instance.draw_row(&mut rng, row);
            }
        });
        Ok(EvaluationSample { n, rows: size, data })
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn costs(&self, x: &Selection) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        let idx: Vec<usize> = x.indices().collect();
        Ok(self
            .data
            .chunks(self.n)
            .map(|row| idx.iter().map(|&j| row[j]).sum())
            .collect())
    }

    /// Order statistic `ceil(level * M)` (1-based) of the sampled costs of `x`.
    pub fn quantile(&self, x: &Selection, level: f64) -> Result<f64> {
        if !(level > 0.0 && level <= 1.0) {
            return Err(Error::invalid("quantile level must lie in (0, 1]"));
        }
        let mut costs = self.costs(x)?;
        let k = ((level * self.rows as f64).ceil() as usize).clamp(1, self.rows);
        let (_, v, _) = costs.select_nth_unstable_by(k - 1, f64::total_cmp);
        Ok(*v)
    }
}

/// Monte Carlo estimate of the `level`-quantile of the cost of `x`.
pub fn estimate_quantile(x: &Selection, instance: &GeneratedInstance, level: f64, size: usize, seed: u64) -> Result<f64> {
    EvaluationSample::new(instance, size, seed)?.quantile(x, level)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Method {
    Saa,
    RowGen,
    Distort,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Saa => "SAA",
            Method::RowGen => "RowGen",
            Method::Distort => "Distort",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().as_str() {
            "saa" => Ok(Method::Saa),
            "rowgen" => Ok(Method::RowGen),
            "distort" => Ok(Method::Distort),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExperimentKind {
    Exp1,
    Exp2,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Number of items.
    pub n: usize,
    /// Size `N` of every sample.
    pub sample_size: usize,
    /// Number of samples drawn from the instance.
    pub samples: usize,
    pub alpha: f64,
    pub epsilon_grid: Vec<f64>,
    #[serde(serialize_with = "norm_label")]
    pub norm: Norm,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub mc_size: usize,
    pub quantile_level: f64,
    pub rel_gap: f64,
    pub max_iter: usize,
    pub gap_tol: f64,
}

fn norm_label<S: serde::Serializer>(norm: &Norm, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(norm.label())
}

/// `step * k` for `k = 1..=count`.
pub fn arithmetic_grid(step: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| step * k as f64).collect()
}

impl ExperimentConfig {
    /// `n = 100`, `N = 30`, 10 samples, `alpha = 0.1`, max-norm ball, radii `0.0025 k`.
    pub fn exp1(seed: u64) -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Exp1,
            n: 100,
            sample_size: 30,
            samples: 10,
            alpha: 0.1,
            epsilon_grid: arithmetic_grid(0.0025, 40),
            norm: Norm::LInf,
            methods: vec![Method::Saa, Method::RowGen, Method::Distort],
            seed,
            mc_size: 100_000,
            quantile_level: 0.9,
            rel_gap: 1e-4,
            max_iter: 200,
            gap_tol: 0.0,
        }
    }

    /// As [`Self::exp1`] with `alpha = 0.5`, radii `0.025 k` up to 1, and no row generation.
    pub fn exp2(seed: u64) -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Exp2,
            alpha: 0.5,
            epsilon_grid: arithmetic_grid(0.025, 40),
            methods: vec![Method::Saa, Method::Distort],
            ..Self::exp1(seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.sample_size == 0 || self.samples == 0 {
            return Err(Error::invalid("experiment sizes must be positive"));
        }
        RiskSpec::new(self.alpha, self.sample_size)?;
        if self.epsilon_grid.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::invalid("radii must be finite and nonnegative"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method is required"));
        }
        Ok(())
    }
}

/// One solved cell of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub sample_id: usize,
    pub epsilon: f64,
    pub method: Method,
    pub x: Option<Selection>,
    /// Empirical CVaR of `x` on the sample.
    pub objective: Option<f64>,
    pub q90: Option<f64>,
    pub solve_ms: f64,
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    /// Monte Carlo sample size behind every quantile.
    pub mc_size: usize,
    /// Sorted by sample, radius, method.
    pub records: Vec<SweepRecord>,
}

fn status_label(status: Status) -> &'static str {
    match status {
        Status::Optimal => "optimal",
        Status::GapReached => "gap_reached",
        Status::Infeasible => "infeasible",
        Status::Unbounded => "unbounded",
    }
}

struct CellContext<'a> {
    config: &'a ExperimentConfig,
    set: &'a FeasibleSet,
    support: &'a SupportSet,
    eval: &'a EvaluationSample,
}

impl CellContext<'_> {
    fn solve(&self, dist: &EmpiricalDistribution, epsilon: f64, method: Method) -> Result<(Selection, Status)> {
        let cfg = self.config;
        if method == Method::Saa || epsilon == 0.0 {
            let r = solve_cvar(self.set, dist, cfg.alpha, cfg.gap_tol)?;
            return Ok((r.x, r.status));
        }
        let spec = AmbiguitySpec::new(epsilon, cfg.norm)?;
        let risk = RiskSpec::new(cfg.alpha, dist.len())?;
        match method {
            Method::Distort => {
                let r = solve_distr_approx(self.set, dist, self.support, &spec, &risk, cfg.gap_tol)?;
                Ok((r.report.x, r.report.status))
            }
            Method::RowGen => {
                let (r, _) = solve_distr_rowgen(self.set, dist, self.support, &spec, &risk, cfg.rel_gap, cfg.max_iter)?;
                Ok((r.x, r.status))
            }
            Method::Saa => unreachable!(),
        }
    }

    fn run(&self, sample_id: usize, dist: &EmpiricalDistribution, epsilon: f64, method: Method) -> SweepRecord {
        let start = Instant::now();
        let outcome = self.solve(dist, epsilon, method).and_then(|(x, status)| {
            let objective = cvar_discrete(dist, &x, self.config.alpha)?;
            let q90 = self.eval.quantile(&x, self.config.quantile_level)?;
            Ok((x, status, objective, q90))
        });
        let solve_ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok((x, status, objective, q90)) => SweepRecord {
                sample_id,
                epsilon,
                method,
                x: Some(x),
                objective: Some(objective),
                q90: Some(q90),
                solve_ms,
                status: status_label(status).to_string(),
            },
            Err(e) => SweepRecord {
                sample_id,
                epsilon,
                method,
                x: None,
                objective: None,
                q90: None,
                solve_ms,
                status: format!("error: {e}"),
            },
        }
    }
}

/// Run a sweep on `jobs` worker threads (`None`: all cores). The result does
/// not depend on `jobs`.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<SweepResult> {
    config.validate()?;
    let instance = generate_instance(config.n, config.seed)?;
    let set = instance.knapsack()?.encode()?;
    let support = instance.support()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Solver(e.to_string()))?;
    pool.install(|| {
        let eval = EvaluationSample::new(&instance, config.mc_size, config.seed)?;
        let dists = (0..config.samples)
            .map(|s| sample_costs(&instance, config.sample_size, config.seed.wrapping_add(1 + s as u64)))
            .collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::new();
        for s in 0..config.samples {
            for &method in &config.methods {
                if method == Method::Saa {
                    cells.push((s, 0.0, method));
                } else {
                    cells.extend(config.epsilon_grid.iter().map(|&e| (s, e, method)));
                }
            }
        }
        let ctx = CellContext {
            config,
            set: &set,
            support: &support,
            eval: &eval,
        };
        let mut records: Vec<SweepRecord> = cells
            .par_iter()
            .map(|&(s, e, m)| ctx.run(s, &dists[s], e, m))
            .collect();
        records.sort_by(|a, b| {
            a.sample_id
                .cmp(&b.sample_id)
                .then(a.epsilon.total_cmp(&b.epsilon))
                .then(a.method.cmp(&b.method))
        });
        Ok(SweepResult {
            config: config.clone(),
            mc_size: config.mc_size,
            records,
        })
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl SweepResult {
    /// `sample_id,epsilon,method,objective,q90,solve_ms,status`; `solve_ms` is
    /// left empty unless `timing` is set, keeping the file reproducible.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from("sample_id,epsilon,method,objective,q90,solve_ms,status\n");
        for r in &self.records {
            let ms = if timing { format!("{:.3}", r.solve_ms) } else { String::new() };
            let status = r.status.replace([',', '\n'], ";");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.sample_id,
                r.epsilon,
                r.method.label(),
                opt(r.objective),
                opt(r.q90),
                ms,
                status
            );
        }
        out
    }

    /// SAA quantile of a sample.
    pub fn saa_q90(&self, sample_id: usize) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.sample_id == sample_id && r.method == Method::Saa)
            .and_then(|r| r.q90)
    }

    /// `(epsilon, q90)` curve of one method on one sample.
    pub fn curve(&self, sample_id: usize, method: Method) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter(|r| r.sample_id == sample_id && r.method == method)
            .filter_map(|r| r.q90.map(|q| (r.epsilon, q)))
            .collect()
    }

    /// Per-radius mean over samples of a method's quantile (radii where every sample succeeded).
    pub fn mean_curve(&self, method: Method) -> Vec<(f64, f64)> {
        let samples = self.config.samples;
        self.config
            .epsilon_grid
            .iter()
            .filter_map(|&e| {
                let vals: Vec<f64> = (0..samples)
                    .filter_map(|s| {
                        self.records
                            .iter()
                            .find(|r| r.sample_id == s && r.method == method && r.epsilon == e)
                            .and_then(|r| r.q90)
                    })
                    .collect();
                (vals.len() == samples).then(|| (e, vals.iter().sum::<f64>() / samples as f64))
            })
            .collect()
    }

    pub fn mean_saa_q90(&self) -> Option<f64> {
        let vals: Vec<f64> = (0..self.config.samples).filter_map(|s| self.saa_q90(s)).collect();
        (vals.len() == self.config.samples).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Write `results.csv`, `config.json` and one SVG plot per sample plus `aggregate.svg`.
    pub fn write_outputs(&self, dir: &Path, timing: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let csv = dir.join("results.csv");
        fs::write(&csv, self.to_csv(timing))?;
        written.push(csv);
        let cfg = dir.join("config.json");
        fs::write(&cfg, serde_json::to_string_pretty(&self.config)? + "\n")?;
        written.push(cfg);
        let dro: Vec<Method> = self.config.methods.iter().copied().filter(|m| *m != Method::Saa).collect();
        for s in 0..self.config.samples {
            let path = dir.join(format!("sample_{s:02}.svg"));
            let curves: Vec<(Method, Vec<(f64, f64)>)> = dro.iter().map(|&m| (m, self.curve(s, m))).collect();
            plot(&path, &format!("sample {s}"), self.saa_q90(s), &curves, &self.config.epsilon_grid)?;
            written.push(path);
        }
        let path = dir.join("aggregate.svg");
        let curves: Vec<(Method, Vec<(f64, f64)>)> = dro.iter().map(|&m| (m, self.mean_curve(m))).collect();
        plot(&path, "mean over samples", self.mean_saa_q90(), &curves, &self.config.epsilon_grid)?;
        written.push(path);
        Ok(written)
    }
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Solver(format!("plot rendering failed: {e}"))
}

fn plot(path: &Path, title: &str, saa: Option<f64>, curves: &[(Method, Vec<(f64, f64)>)], grid: &[f64]) -> Result<()> {
    let x_max = grid.iter().copied().fold(0.0, f64::max).max(1e-9);
    let ys: Vec<f64> = curves
        .iter()
        .flat_map(|(_, c)| c.iter().map(|p| p.1))
        .chain(saa)
        .collect();
    let (mut y_min, mut y_max) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !y_min.is_finite() {
        (y_min, y_max) = (0.0, 1.0);
    }
    let pad = ((y_max - y_min) * 0.05).max(1e-6);
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("q90 vs epsilon ({title})"), ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..x_max, (y_min - pad)..(y_max + pad))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("epsilon")
        .y_desc("q90")
        .draw()
        .map_err(plot_err)?;
    if let Some(q) = saa {
        chart
            .draw_series(LineSeries::new([(0.0, q), (x_max, q)], BLACK.stroke_width(2)))
            .map_err(plot_err)?
            .label("SAA")
            .legend(|(x, y)| PathElement::new([(x, y), (x + 20, y)], BLACK));
    }
    let palette = [BLUE, RED, GREEN];
    for (k, (method, curve)) in curves.iter().enumerate() {
        let color = palette[k % palette.len()];
        chart
            .draw_series(LineSeries::new(curve.iter().copied(), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(method.label())
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_is_deterministic() {
        let a = generate_instance(100, 7).unwrap();
        let b = generate_instance(100, 7).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.capacity, 0.4 * a.weights.iter().sum::<f64>());
        for law in &a.laws {
            assert!(law.low >= 0.0 && law.low <= law.high);
        }
        assert_ne!(generate_instance(100, 8).unwrap().weights, a.weights);
    }

    #[test]
    fn draws_respect_intervals() {
        let inst = generate_instance(30, 3).unwrap();
        let d = sample_costs(&inst, 50, 4).unwrap();
        let support = inst.support().unwrap();
        assert!(crate::model::validate_support_membership(&d, &support).unwrap());
    }

    #[test]
    fn point_mass_quantile() {
        let law = TruncatedNormal::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let inst = GeneratedInstance {
            weights: vec![0.5, 0.5],
            capacity: 0.4,
            laws: vec![law, TruncatedNormal::new(2.0, 1.0, 3.0, 3.0).unwrap()],
            seed: 0,
        };
        let x = Selection::new(vec![true, true]);
        assert_eq!(estimate_quantile(&x, &inst, 0.9, 100, 1).unwrap(), 3.0);
    }

    #[test]
    fn level_one_is_maximum() {
        let inst = generate_instance(5, 11).unwrap();
        let eval = EvaluationSample::new(&inst, 500, 2).unwrap();
        let x = Selection::new(vec![true; 5]);
        let max = eval.costs(&x).unwrap().into_iter().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(eval.quantile(&x, 1.0).unwrap(), max);
    }

    #[test]
    fn narrow_tail_uses_inverse_cdf() {
        let law = TruncatedNormal::new(0.0, 0.1, 1.0, 1.5).unwrap();
        assert!(law.uses_inverse_cdf());
        let mut rng = stream(1, 0);
        for _ in 0..100 {
            let v = law.sample(&mut rng);
            assert!((1.0..=1.5).contains(&v));
        }
    }
}
