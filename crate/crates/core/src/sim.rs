//! Sample paths and Monte Carlo forecast experiments.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`.
//! Replication `i` uses stream `i` of that key (`set_stream(i)`), so any
//! replication can be regenerated on its own and results do not depend on
//! thread scheduling.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use thiserror::Error;

use crate::forecast::{mse_profile, predict, ForecastError, ForecastOrigin};
use crate::model::PeriodicModel;
use crate::moments::{check_convergence, default_probe_lag, default_truncation, DEFAULT_MARGIN};
use crate::numfmt::sig12;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error("replication count must be at least 1")]
    NoReplications,
    #[error("burn-in {given} is shorter than the minimum {minimum} (10 periods)")]
    BurnInTooShort { given: usize, minimum: usize },
    #[error("Student-t degrees of freedom must exceed 2, got {0}")]
    DegreesOfFreedom(f64),
    #[error("custom innovation pool is empty or holds non-finite values")]
    BadCustomPool,
    #[error("variance override has {found} seasons, model has {expected}")]
    VarianceOverride { expected: usize, found: usize },
    #[error(transparent)]
    Forecast(#[from] ForecastError),
}

/// Standardised innovation law; draws are scaled by σ(t).
#[derive(Clone, Debug, PartialEq)]
pub enum Innovation {
    Gaussian,
    /// Student-t rescaled to unit variance.
    StudentT {
        df: f64,
    },
    /// Draws uniformly with replacement from the supplied standardised values.
    Custom(Vec<f64>),
}

impl Innovation {
    fn check(&self) -> Result<(), SimError> {
        match self {
            Innovation::Gaussian => Ok(()),
            Innovation::StudentT { df } if *df > 2.0 && df.is_finite() => Ok(()),
            Innovation::StudentT { df } => Err(SimError::DegreesOfFreedom(*df)),
            Innovation::Custom(pool) if !pool.is_empty() && pool.iter().all(|x| x.is_finite()) => {
                Ok(())
            }
            Innovation::Custom(_) => Err(SimError::BadCustomPool),
        }
    }

    fn sampler(&self) -> Sampler<'_> {
        match self {
            Innovation::Gaussian => Sampler::Gaussian,
            Innovation::StudentT { df } => Sampler::StudentT {
                dist: StudentT::new(*df).expect("checked df"),
                scale: ((df - 2.0) / df).sqrt(),
            },
            Innovation::Custom(pool) => Sampler::Custom(pool),
        }
    }
}

enum Sampler<'a> {
    Gaussian,
    StudentT { dist: StudentT<f64>, scale: f64 },
    Custom(&'a [f64]),
}

impl Sampler<'_> {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian => StandardNormal.sample(rng),
            Sampler::StudentT { dist, scale } => scale * dist.sample(rng),
            Sampler::Custom(pool) => pool[rng.random_range(0..pool.len())],
        }
    }
}

/// Everything that determines a batch of simulated paths.
#[derive(Clone, Debug, PartialEq)]
pub struct SimPlan {
    model: PeriodicModel,
    burn_in: usize,
    length: usize,
    replications: usize,
    seed: u64,
    innovation: Innovation,
    start: i64,
    stationary: bool,
}

impl SimPlan {
    /// One Gaussian path of `length` observations starting at t = 1.
    ///
    /// Models whose Green weights decay get a burn-in from a zero start long
    /// enough for the start-up transient to fall below 1e-14 of the weights
    /// (never less than 10 periods). Other models start from exact zero
    /// initial conditions with no burn-in.
    pub fn new(model: PeriodicModel, length: usize, seed: u64) -> Self {
        let l = model.period();
        let stationary = check_convergence(&model, default_probe_lag(l), DEFAULT_MARGIN).passed;
        let burn_in = if stationary {
            default_truncation(&model).max(10 * l)
        } else {
            0
        };
        Self {
            model,
            burn_in,
            length,
            replications: 1,
            seed,
            innovation: Innovation::Gaussian,
            start: 1,
            stationary,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Result<Self, SimError> {
        let minimum = 10 * self.model.period();
        if self.stationary && burn_in < minimum {
            return Err(SimError::BurnInTooShort {
                given: burn_in,
                minimum,
            });
        }
        self.burn_in = burn_in;
        Ok(self)
    }

    pub fn with_replications(mut self, n: usize) -> Result<Self, SimError> {
        if n == 0 {
            return Err(SimError::NoReplications);
        }
        self.replications = n;
        Ok(self)
    }

    pub fn with_innovation(mut self, innovation: Innovation) -> Result<Self, SimError> {
        innovation.check()?;
        self.innovation = innovation;
        Ok(self)
    }

    /// Replaces the model's σ² schedule for the simulation only.
    pub fn with_variances(mut self, sigma2: Vec<f64>) -> Result<Self, SimError> {
        let l = self.model.period();
        if sigma2.len() != l {
            return Err(SimError::VarianceOverride {
                expected: l,
                found: sigma2.len(),
            });
        }
        let spec = crate::model::ModelSpec {
            sigma2,
            ..self.model.to_spec()
        };
        self.model = crate::model::validate(spec).map_err(|_| SimError::VarianceOverride {
            expected: l,
            found: l,
        })?;
        Ok(self)
    }

    /// Time index of the first reported observation.
    pub fn with_start(mut self, start: i64) -> Self {
        self.start = start;
        self
    }

    pub fn model(&self) -> &PeriodicModel {
        &self.model
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Whether the convergence diagnostic passed when the plan was made.
    pub fn is_stationary(&self) -> bool {
        self.stationary
    }
}

/// Generator for replication `replication` of `seed`.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// y_t from its predecessors (`y_prev` oldest first, at least p values) and
/// innovations (`eps` oldest first ending with ε_t, at least q + 1 values).
pub fn step(model: &PeriodicModel, t: i64, y_prev: &[f64], eps: &[f64]) -> f64 {
    let (ny, ne) = (y_prev.len(), eps.len());
    let mut acc = model.phi0(t);
    for m in 1..=model.ar_order() {
        acc += model.phi(m, t) * y_prev[ny - m];
    }
    acc += eps[ne - 1];
    for j in 1..=model.ma_order() {
        acc += model.theta(j, t) * eps[ne - 1 - j];
    }
    acc
}

/// One simulated path together with the pre-sample values it depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    pub start: i64,
    /// season of `start`
    pub start_season: usize,
    pub y: Vec<f64>,
    pub eps: Vec<f64>,
    /// p values of y just before `start`, oldest first
    pub presample_y: Vec<f64>,
    /// q values of ε just before `start`, oldest first
    pub presample_eps: Vec<f64>,
}

impl SamplePath {
    pub fn times(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.y.len() as i64).map(move |i| self.start + i)
    }

    /// Recomputes every y_t from the stored innovations and predecessors.
    pub fn replay(&self, model: &PeriodicModel) -> Vec<f64> {
        let mut y = self.presample_y.clone();
        let mut eps = self.presample_eps.clone();
        let (p, q) = (y.len(), eps.len());
        for (i, e) in self.eps.iter().enumerate() {
            eps.push(*e);
            let t = self.start + i as i64;
            let next = step(model, t, &y[y.len() - p..], &eps[eps.len() - q - 1..]);
            y.push(next);
        }
        y.split_off(p)
    }

    /// Writes `time,season,y,epsilon` rows.
    pub fn write_csv<W: Write>(&self, model: &PeriodicModel, mut out: W) -> io::Result<()> {
        writeln!(out, "time,season,y,epsilon")?;
        let clock = model.clock();
        for (i, t) in self.times().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                t,
                clock.season(t),
                sig12(self.y[i]),
                sig12(self.eps[i])
            )?;
        }
        Ok(())
    }
}

/// Simulates replication `replication` of `plan`.
pub fn simulate_path(plan: &SimPlan, replication: usize) -> SamplePath {
    let model = &plan.model;
    let (p, q) = (model.ar_order(), model.ma_order());
    let mut rng = replication_rng(plan.seed, replication as u64);
    let sampler = plan.innovation.sampler();

    let first = plan.start - plan.burn_in as i64;
    let total = plan.burn_in + plan.length;
    // zero pre-sample before the first simulated time
    let mut y = vec![0.0; p];
    let mut eps = vec![0.0; q];
    y.reserve(total);
    eps.reserve(total);
    for i in 0..total {
        let t = first + i as i64;
        let e = model.sigma2(t).sqrt() * sampler.draw(&mut rng);
        eps.push(e);
        let next = step(model, t, &y[y.len() - p..], &eps[eps.len() - q - 1..]);
        y.push(next);
    }
    let cut_y = p + plan.burn_in;
    let cut_e = q + plan.burn_in;
    SamplePath {
        start: plan.start,
        start_season: model.clock().season(plan.start),
        presample_y: y[cut_y - p..cut_y].to_vec(),
        presample_eps: eps[cut_e - q..cut_e].to_vec(),
        y: y[cut_y..].to_vec(),
        eps: eps[cut_e..].to_vec(),
    }
}

/// All replications of `plan`, in replication order.
pub fn simulate(plan: &SimPlan) -> Vec<SamplePath> {
    (0..plan.replications)
        .into_par_iter()
        .map(|i| simulate_path(plan, i))
        .collect()
}

/// One row of a Monte Carlo forecast experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct McRow {
    pub h: usize,
    pub target_season: usize,
    pub bias: f64,
    pub bias_se: f64,
    pub empirical_mse: f64,
    pub mse_se: f64,
    pub theoretical_mse: f64,
    /// (empirical − theoretical) / mse_se
    pub z_mse: f64,
    /// bias / sqrt(theoretical / N)
    pub z_bias: f64,
    /// |z_mse| <= 3
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McReport {
    pub replications: usize,
    pub seed: u64,
    pub rows: Vec<McRow>,
}

impl McReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Draws `replications` futures from a fixed origin and compares realised
/// forecast errors with the theoretical MSE profile.
pub fn mc_forecast_experiment(
    model: &PeriodicModel,
    origin: &ForecastOrigin,
    horizon: usize,
    replications: usize,
    seed: u64,
    innovation: &Innovation,
) -> Result<McReport, SimError> {
    if replications == 0 {
        return Err(SimError::NoReplications);
    }
    innovation.check()?;
    let report = predict(model, origin, horizon)?;
    let points = report.points();
    let theo = mse_profile(model, origin.time, horizon);
    let (p, q) = (model.ar_order(), model.ma_order());
    let sampler = innovation.sampler();

    // fixed chunking keeps the floating-point sums independent of threads
    const CHUNKS: usize = 64;
    let per_chunk = replications.div_ceil(CHUNKS);
    let partials: Vec<Moments> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut acc = Moments::new(horizon);
            let lo = c * per_chunk;
            let hi = ((c + 1) * per_chunk).min(replications);
            let mut y = Vec::with_capacity(p + horizon);
            let mut eps = Vec::with_capacity(q + horizon);
            for rep in lo..hi {
                let mut rng = replication_rng(seed, rep as u64);
                y.clear();
                eps.clear();
                y.extend(origin.y_tail.iter().rev());
                eps.extend(origin.eps_tail.iter().rev());
                for h in 1..=horizon {
                    let t = origin.time + h as i64;
                    let e = model.sigma2(t).sqrt() * sampler.draw(&mut rng);
                    eps.push(e);
                    let next = step(model, t, &y[y.len() - p..], &eps[eps.len() - q - 1..]);
                    y.push(next);
                    acc.add(h - 1, next - points[h - 1]);
                }
            }
            acc
        })
        .collect();
    let mut total = Moments::new(horizon);
    for part in &partials {
        total.merge(part);
    }

    let n = replications as f64;
    let rows = (1..=horizon)
        .map(|h| {
            let i = h - 1;
            let mean = total.s1[i] / n;
            let mse = total.s2[i] / n;
            let var_e = (mse - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
            let var_e2 = (total.s4[i] / n - mse * mse).max(0.0) * n / (n - 1.0).max(1.0);
            let mse_se = (var_e2 / n).sqrt();
            let z_mse = (mse - theo[i]) / mse_se;
            McRow {
                h,
                target_season: model.clock().season(origin.time + h as i64),
                bias: mean,
                bias_se: (var_e / n).sqrt(),
                empirical_mse: mse,
                mse_se,
                theoretical_mse: theo[i],
                z_mse,
                z_bias: mean / (theo[i] / n).sqrt(),
                pass: z_mse.abs() <= 3.0,
            }
        })
        .collect();
    Ok(McReport {
        replications,
        seed,
        rows,
    })
}

/// Power sums of forecast errors per horizon.
struct Moments {
    s1: Vec<f64>,
    s2: Vec<f64>,
    s4: Vec<f64>,
}

impl Moments {
    fn new(h: usize) -> Self {
        Self {
            s1: vec![0.0; h],
            s2: vec![0.0; h],
            s4: vec![0.0; h],
        }
    }

    fn add(&mut self, i: usize, e: f64) {
        let e2 = e * e;
        self.s1[i] += e;
        self.s2[i] += e2;
        self.s4[i] += e2 * e2;
    }

    fn merge(&mut self, other: &Moments) {
        for i in 0..self.s1.len() {
            self.s1[i] += other.s1[i];
            self.s2[i] += other.s2[i];
            self.s4[i] += other.s4[i];
        }
    }
}
