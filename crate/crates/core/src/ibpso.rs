//! Binary particle swarm with population-fitness-variance stagnation
//! detection and Tent-map chaotic reseeding. Minimizes.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{create, finish, sig6};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmConfig {
    pub n_particles: usize,
    pub max_iter: usize,
    pub w_max: f64,
    pub w_min: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_clamp: f64,
    pub low_thr: f64,
    pub up_thr: f64,
    pub seed: u64,
    /// Tent iterations applied to a particle's seed before bits are drawn.
    pub chaos_warmup: usize,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            n_particles: 50,
            max_iter: 100,
            w_max: 0.9,
            w_min: 0.4,
            c1: 2.0,
            c2: 2.0,
            v_clamp: 6.0,
            low_thr: 0.99,
            up_thr: 1.01,
            seed: 0,
            chaos_warmup: 5,
        }
    }
}

impl SwarmConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_size(mut self, n_particles: usize, max_iter: usize) -> Self {
        self.n_particles = n_particles;
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::ParameterDomain("a swarm needs at least 2 particles".into()));
        }
        if !(0.0 < self.low_thr && self.low_thr < 1.0 && 1.0 < self.up_thr) {
            return Err(Error::ParameterDomain("stagnation band must satisfy 0 < low < 1 < up".into()));
        }
        if !(self.v_clamp > 0.0 && self.w_min <= self.w_max && self.c1 >= 0.0 && self.c2 >= 0.0) {
            return Err(Error::ParameterDomain("invalid swarm coefficients".into()));
        }
        Ok(())
    }

    fn inertia(&self, iteration: usize) -> f64 {
        if self.max_iter <= 1 {
            return self.w_max;
        }
        let frac = (iteration - 1) as f64 / (self.max_iter - 1) as f64;
        self.w_max - (self.w_max - self.w_min) * frac
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<bool>,
    pub velocity: Vec<f64>,
    pub pbest_position: Vec<bool>,
    pub pbest_fitness: f64,
}

impl Particle {
    pub fn new(position: Vec<bool>, velocity: Vec<f64>) -> Self {
        Self {
            pbest_position: position.clone(),
            position,
            velocity,
            pbest_fitness: f64::INFINITY,
        }
    }
}

fn bit(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Inertia plus cognitive and social pulls, with fresh random factors per
/// component, clamped to `[-v_clamp, v_clamp]`.
pub fn velocity_update<R: Rng + ?Sized>(
    particle: &Particle,
    gbest: &[bool],
    w: f64,
    c1: f64,
    c2: f64,
    v_clamp: f64,
    rng: &mut R,
) -> Vec<f64> {
    particle
        .velocity
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let x = bit(particle.position[k]);
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let nv = w * v
                + c1 * r1 * (bit(particle.pbest_position[k]) - x)
                + c2 * r2 * (bit(gbest[k]) - x);
            nv.clamp(-v_clamp, v_clamp)
        })
        .collect()
}

pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Draw a bit that is set with probability `sigmoid(v)`.
pub fn position_update<R: Rng + ?Sized>(v: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < sigmoid(v)
}

/// Population fitness variance normalized by the best (smallest) fitness.
pub fn pfv(fitnesses: &[f64]) -> Result<f64> {
    if fitnesses.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let n = fitnesses.len() as f64;
    let avg = fitnesses.iter().sum::<f64>() / n;
    let best = fitnesses.iter().copied().fold(f64::INFINITY, f64::min);
    let norm = if best.abs() < 1e-12 { 1.0 } else { best };
    Ok(fitnesses.iter().map(|f| ((f - avg) / norm).powi(2)).sum())
}

pub fn stagnation_detected(sigma2_prev: f64, sigma2_curr: f64, low_thr: f64, up_thr: f64) -> bool {
    if sigma2_prev == 0.0 {
        return true;
    }
    let ratio = sigma2_curr / sigma2_prev;
    low_thr < ratio && ratio < up_thr
}

const TENT_TRAPS: [f64; 8] = [0.0, 0.25, 0.5, 0.75, 0.2, 0.4, 0.6, 0.8];

/// One Tent-map iterate, nudged off small-period orbits.
pub fn tent_step<R: Rng + ?Sized>(t: f64, rng: &mut R) -> f64 {
    let t = t.clamp(0.0, 1.0);
    let next = if t <= 0.5 { 2.0 * t } else { 2.0 * (1.0 - t) };
    if TENT_TRAPS.iter().any(|p| (next - p).abs() < 1e-12) {
        (next + rng.random::<f64>()) / 2.0
    } else {
        next
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub pfv: f64,
    pub chaos_triggered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmOutcome {
    pub best: Vec<bool>,
    pub best_fitness: f64,
    pub history: Vec<IterationRecord>,
    pub evaluations: usize,
}

/// Deterministically mix a base seed with a tag (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream ids keep every (iteration, particle, purpose) draw independent of
/// scheduling, so parallel and serial runs agree.
fn stream_rng(seed: u64, iteration: usize, particle: usize, chaos: bool) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = if chaos { 1u64 << 19 } else { 0 };
    rng.set_stream(((iteration as u64) << 20) | tag | particle as u64);
    rng
}

/// Chaotic candidate derived from a particle's current position.
fn chaotic_position<R: Rng + ?Sized>(position: &[bool], warmup: usize, rng: &mut R) -> Vec<bool> {
    let ones = position.iter().filter(|&&b| b).count() as f64;
    let mut t = 0.5 * ones / position.len() as f64 + 0.5 * rng.random::<f64>();
    for _ in 0..warmup {
        t = tent_step(t, rng);
    }
    position
        .iter()
        .map(|_| {
            t = tent_step(t, rng);
            t >= 0.5
        })
        .collect()
}

/// Minimize `fitness` over bit vectors of length `dim`.
pub fn run<F>(dim: usize, fitness: F, cfg: &SwarmConfig) -> Result<SwarmOutcome>
where
    F: Fn(&[bool]) -> f64 + Sync,
{
    run_seeded(dim, fitness, cfg, &[])
}

/// Like [`run`], but the first particles start at the given positions
/// instead of random ones. At most `n_particles` seeds are used.
pub fn run_seeded<F>(dim: usize, fitness: F, cfg: &SwarmConfig, seeds: &[Vec<bool>]) -> Result<SwarmOutcome>
where
    F: Fn(&[bool]) -> f64 + Sync,
{
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::ParameterDomain("genome length must be >= 1".into()));
    }
    if let Some(bad) = seeds.iter().find(|s| s.len() != dim) {
        return Err(Error::ParameterDomain(format!(
            "seed position has {} bits, expected {dim}",
            bad.len()
        )));
    }
    let mut swarm: Vec<Particle> = (0..cfg.n_particles)
        .map(|n| {
            let mut rng = stream_rng(cfg.seed, 0, n, false);
            let mut position: Vec<bool> = (0..dim).map(|_| rng.random::<bool>()).collect();
            if let Some(seed) = seeds.get(n) {
                position.clone_from(seed);
            }
            let velocity = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            Particle::new(position, velocity)
        })
        .collect();
    let mut fit: Vec<f64> = swarm.par_iter().map(|p| fitness(&p.position)).collect();
    let mut evaluations = fit.len();
    let mut gbest = swarm[0].position.clone();
    let mut gbest_fit = f64::INFINITY;
    let mut owner = 0;
    absorb(&mut swarm, &fit, &mut gbest, &mut gbest_fit, &mut owner);
    let mut prev = pfv(&fit)?;
    let mut history = vec![IterationRecord {
        iteration: 0,
        best_fitness: gbest_fit,
        mean_fitness: mean(&fit),
        pfv: prev,
        chaos_triggered: false,
    }];

    for it in 1..=cfg.max_iter {
        let w = cfg.inertia(it);
        let gb = &gbest;
        fit = swarm
            .par_iter_mut()
            .enumerate()
            .map(|(n, p)| {
                let mut rng = stream_rng(cfg.seed, it, n, false);
                p.velocity = velocity_update(p, gb, w, cfg.c1, cfg.c2, cfg.v_clamp, &mut rng);
                for k in 0..dim {
                    p.position[k] = position_update(p.velocity[k], &mut rng);
                }
                fitness(&p.position)
            })
            .collect();
        evaluations += fit.len();
        absorb(&mut swarm, &fit, &mut gbest, &mut gbest_fit, &mut owner);
        let mut curr = pfv(&fit)?;
        let chaos = stagnation_detected(prev, curr, cfg.low_thr, cfg.up_thr);
        if chaos {
            let keep = owner;
            let reseeded: Vec<Option<f64>> = swarm
                .par_iter_mut()
                .enumerate()
                .map(|(n, p)| {
                    if n == keep {
                        return None;
                    }
                    let mut rng = stream_rng(cfg.seed, it, n, true);
                    p.position = chaotic_position(&p.position, cfg.chaos_warmup, &mut rng);
                    p.velocity.iter_mut().for_each(|v| *v = 0.0);
                    Some(fitness(&p.position))
                })
                .collect();
            for (n, f) in reseeded.into_iter().enumerate() {
                if let Some(f) = f {
                    fit[n] = f;
                    evaluations += 1;
                }
            }
            absorb(&mut swarm, &fit, &mut gbest, &mut gbest_fit, &mut owner);
            curr = pfv(&fit)?;
        }
        history.push(IterationRecord {
            iteration: it,
            best_fitness: gbest_fit,
            mean_fitness: mean(&fit),
            pfv: curr,
            chaos_triggered: chaos,
        });
        prev = curr;
    }
    Ok(SwarmOutcome {
        best: gbest,
        best_fitness: gbest_fit,
        history,
        evaluations,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn absorb(swarm: &mut [Particle], fit: &[f64], gbest: &mut Vec<bool>, gbest_fit: &mut f64, owner: &mut usize) {
    for (n, (p, &f)) in swarm.iter_mut().zip(fit).enumerate() {
        if f < p.pbest_fitness {
            p.pbest_fitness = f;
            p.pbest_position.clone_from(&p.position);
        }
        if f < *gbest_fit {
            *gbest_fit = f;
            gbest.clone_from(&p.position);
            *owner = n;
        }
    }
}

pub fn write_history_csv(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let mut w = create(path)?;
    write_history(&mut w, history).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn write_history<W: Write>(w: &mut W, history: &[IterationRecord]) -> std::io::Result<()> {
    writeln!(w, "iteration,best_fitness,mean_fitness,pfv,chaos_triggered")?;
    for r in history {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.iteration,
            sig6(r.best_fitness),
            sig6(r.mean_fitness),
            sig6(r.pfv),
            r.chaos_triggered
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    /// Every uniform draw is exactly 0.5.
    struct Half;

    impl RngCore for Half {
        fn next_u32(&mut self) -> u32 {
            1 << 31
        }
        fn next_u64(&mut self) -> u64 {
            1 << 63
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0);
        }
    }

    #[test]
    fn velocity_examples() {
        let p = Particle {
            position: vec![true, false],
            velocity: vec![0.7, -3.0],
            pbest_position: vec![true, false],
            pbest_fitness: 0.0,
        };
        let v = velocity_update(&p, &[true, false], 1.0, 2.0, 2.0, 6.0, &mut Half);
        assert_eq!(v, vec![0.7, -3.0]);

        let p = Particle {
            position: vec![false],
            velocity: vec![0.0],
            pbest_position: vec![true],
            pbest_fitness: 0.0,
        };
        let v = velocity_update(&p, &[true], 0.9, 2.0, 2.0, 6.0, &mut Half);
        assert!((v[0] - 2.0).abs() < 1e-15);

        let p = Particle {
            position: vec![false; 3],
            velocity: vec![5.9, -5.9, 100.0],
            pbest_position: vec![true; 3],
            pbest_fitness: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = velocity_update(&p, &[true; 3], 1.0, 2.0, 2.0, 6.0, &mut rng);
        assert!(v.iter().all(|x| x.abs() <= 6.0));
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(50.0) > 1.0 - 1e-9);
        assert!((sigmoid(2.0) - 0.880_797_077_977_882_3).abs() < 1e-15);
    }

    #[test]
    fn position_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let freq = |v: f64, rng: &mut ChaCha8Rng| {
            (0..100_000).filter(|_| position_update(v, rng)).count() as f64 / 1e5
        };
        assert!(freq(50.0, &mut rng) > 0.999);
        assert!((freq(0.0, &mut rng) - 0.5).abs() < 0.01);
        assert!((freq(2.0, &mut rng) - 0.881).abs() < 0.01);
    }

    #[test]
    fn pfv_examples() {
        assert_eq!(pfv(&[4.0, 4.0, 4.0]).unwrap(), 0.0);
        assert!((pfv(&[1.0, 3.0]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(pfv(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(pfv(&[]), Err(Error::EmptyPopulation)));
    }

    #[test]
    fn stagnation_band() {
        assert!(stagnation_detected(2.0, 2.0, 0.99, 1.01));
        assert!(!stagnation_detected(2.0, 1.0, 0.99, 1.01));
        assert!(stagnation_detected(0.0, 0.0, 0.99, 1.01));
        assert!(!stagnation_detected(1.0, 1.01, 0.99, 1.01));
    }

    #[test]
    fn tent_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((tent_step(0.15, &mut rng) - 0.3).abs() < 1e-15);
        for t in [0.3, 0.9] {
            let target = if t <= 0.5 { 2.0 * t } else { 2.0 * (1.0 - t) };
            let mut hits = 0;
            for _ in 0..100 {
                let next = tent_step(t, &mut rng);
                assert!((0.0..=1.0).contains(&next));
                assert!(next >= target / 2.0 && next <= (target + 1.0) / 2.0);
                if (next - target).abs() > 1e-9 {
                    hits += 1;
                }
            }
            assert!(hits > 95, "periodic point {target} should be perturbed");
        }
        let mut t = 0.123;
        for _ in 0..10_000 {
            t = tent_step(t, &mut rng);
            assert!((0.0..=1.0).contains(&t));
        }
    }

    #[test]
    fn single_bit_problem_is_immediate() {
        let cfg = SwarmConfig::default().with_size(10, 5).with_seed(4);
        let out = run(1, |b| if b[0] { 0.0 } else { 1.0 }, &cfg).unwrap();
        assert_eq!(out.best, vec![true]);
        assert!(out.history.iter().position(|r| r.best_fitness == 0.0).unwrap() <= 2);
    }

    #[test]
    fn constant_landscape_triggers_chaos() {
        let cfg = SwarmConfig::default().with_size(8, 6).with_seed(1);
        let out = run(12, |_| 3.0, &cfg).unwrap();
        assert!(out.history[1..=3].iter().any(|r| r.chaos_triggered));
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = SwarmConfig::default().with_size(12, 20).with_seed(77);
        let f = |b: &[bool]| b.iter().enumerate().map(|(i, &x)| if x { (i % 3) as f64 - 1.0 } else { 0.0 }).sum();
        let a = run(16, f, &cfg).unwrap();
        let b = run(16, f, &cfg).unwrap();
        assert_eq!(a, b);
        for pair in a.history.windows(2) {
            assert!(pair[1].best_fitness <= pair[0].best_fitness);
        }
    }

    #[test]
    fn history_csv_has_header_and_rows() {
        let cfg = SwarmConfig::default().with_size(4, 3);
        let out = run(3, |b| b.iter().filter(|&&x| x).count() as f64, &cfg).unwrap();
        let mut buf = Vec::new();
        write_history(&mut buf, &out.history).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("iteration,best_fitness,mean_fitness,pfv,chaos_triggered"));
    }
}
