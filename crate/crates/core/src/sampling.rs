//! Stratified difference-quotient sampling.
//!
//! Both the hyperplane modulus of continuity and the "Lipschitz when fixing
//! the first variable" estimate are suprema of
//!
//! ```text
//! ‖g(a) − g(b)‖ / ‖a − b‖
//! ```
//!
//! over pairs in some region. This module draws such pairs at separations
//! `R·2⁻ᵏ` for `k = 0..=12`. The coarse strata (`k < 8`) spread their pairs
//! over the whole region. The fine strata zoom: half their pairs sit next to
//! the origin of the sampling coordinates, the other half next to the worst
//! pair of the previous stratum, so that a singular set anywhere in the
//! region is found and then followed down in scale.
//!
//! A power-law blow-up `r^(−α)` shows up as growth of the stratum maxima.
//! The flag fires when the last stratum is at least twice the fourth-last.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::FieldError;
use crate::linalg::{norm2, Vector};

/// Number of separation scales.
pub const STRATA: usize = 13;
/// First stratum of the zooming half of the budget.
pub const FINE_START: usize = 8;
/// Growth between stratum `STRATA − 5` and the last that signals blow-up.
pub const BLOWUP_FACTOR: f64 = 2.0;
/// Maxima below this are treated as this when testing growth.
pub const BLOWUP_FLOOR: f64 = 1e-6;
/// Focused pairs jitter within `scale * FOCUS_REACH^u`, `u` uniform in `[0, 1)`.
pub const FOCUS_REACH: f64 = 32.0;
pub const MIN_BUDGET: usize = 100;
pub const DEFAULT_BUDGET: usize = 4096;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("budget {0} is below the minimum of {MIN_BUDGET} pairs")]
    Budget(usize),
    #[error("sampling radius {0} must be positive and finite")]
    Radius(f64),
    #[error("no free coordinates to sample")]
    NoFreeCoordinates,
    #[error("fixed direction has dimension {found}, expected {expected}")]
    Direction { expected: usize, found: usize },
    #[error("fixed direction is zero")]
    ZeroDirection,
    #[error("evaluation failed at {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: FieldError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Euclidean ball of the free coordinates.
    Ball,
    /// Cube `[−R, R]` in every free coordinate.
    Box,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairDirection {
    /// Gaussian direction, normalised.
    Random,
    /// Always this (normalised) direction.
    Fixed(Vector),
}

/// Where pairs live.
///
/// Sample coordinates are `(pinned.., free..)`. The pinned coordinates are
/// shared by both points of a pair and drawn from `[−R, R]`. The free
/// coordinates range over the ball or box of radius `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDomain {
    pub pinned: usize,
    pub free: usize,
    pub shape: Shape,
    pub radius: f64,
    pub direction: PairDirection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub scale: f64,
    pub pairs: usize,
    pub max_quotient: f64,
}

/// One evaluated pair, in sample coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub stratum: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSample {
    pub value: f64,
    pub strata: Vec<Stratum>,
    pub pairs_used: usize,
    pub blowup: bool,
    /// The worst pair found, in sample coordinates.
    pub argmax: Option<(Vec<f64>, Vec<f64>)>,
}

impl QuotientSample {
    /// Ratio of the last stratum maximum to the one four halvings coarser.
    pub fn growth(&self) -> f64 {
        growth(&self.strata)
    }
}

fn growth(strata: &[Stratum]) -> f64 {
    let last = strata[STRATA - 1].max_quotient;
    let earlier = strata[STRATA - 5].max_quotient.max(BLOWUP_FLOOR);
    last / earlier
}

/// Pairs per stratum: half the budget over the coarse strata, half over the
/// fine ones, remainders going to the earliest strata of each half.
pub fn stratum_budgets(budget: usize) -> [usize; STRATA] {
    let mut out = [0; STRATA];
    let coarse = budget / 2;
    let fine = budget - coarse;
    let split = |total: usize, slots: &mut [usize]| {
        let n = slots.len();
        for (i, s) in slots.iter_mut().enumerate() {
            *s = total / n + usize::from(i < total % n);
        }
    };
    split(coarse, &mut out[..FINE_START]);
    split(fine, &mut out[FINE_START..]);
    out
}

struct Drawer<'a> {
    domain: &'a SampleDomain,
    rng: ChaCha8Rng,
    fixed: Option<Vec<f64>>,
}

impl Drawer<'_> {
    fn gaussian_unit(&mut self, n: usize) -> Vec<f64> {
        loop {
            let g: Vec<f64> = (0..n).map(|_| self.rng.sample(StandardNormal)).collect();
            let norm = norm2(&g);
            if norm > 1e-12 {
                return g.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    fn direction(&mut self) -> Vec<f64> {
        match &self.fixed {
            Some(d) => d.clone(),
            None => self.gaussian_unit(self.domain.free),
        }
    }

    /// Uniform point of the ball of radius `rho` in `n` dimensions.
    fn in_ball(&mut self, n: usize, rho: f64) -> Vec<f64> {
        let u: f64 = self.rng.random();
        let r = rho * u.powf(1.0 / n as f64);
        self.gaussian_unit(n).into_iter().map(|x| x * r).collect()
    }

    fn in_region(&mut self, n: usize, rho: f64) -> Vec<f64> {
        match self.domain.shape {
            Shape::Ball => self.in_ball(n, rho),
            Shape::Box => (0..n).map(|_| self.rng.random_range(-rho..=rho)).collect(),
        }
    }

    fn pinned(&mut self, around: Option<&[f64]>, jitter: f64) -> Vec<f64> {
        let r = self.domain.radius;
        (0..self.domain.pinned)
            .map(|i| {
                let c = around.map_or(0.0, |a| a[i]);
                let j = jitter.min(r);
                (c + self.rng.random_range(-j..=j)).clamp(-r, r)
            })
            .collect()
    }

    /// Moves a pair centre so both endpoints stay in the region.
    fn clamp_centre(&self, c: &mut [f64], half: f64) {
        let limit = self.domain.radius - half;
        match self.domain.shape {
            Shape::Ball => {
                let n = norm2(c);
                if n > limit {
                    let k = limit / n;
                    c.iter_mut().for_each(|x| *x *= k);
                }
            }
            Shape::Box => c.iter_mut().for_each(|x| *x = x.clamp(-limit, limit)),
        }
    }

    fn pair(&mut self, pinned: Vec<f64>, centre: &[f64], scale: f64) -> (Vec<f64>, Vec<f64>) {
        let d = self.direction();
        let half = 0.5 * scale;
        let mut a = pinned.clone();
        let mut b = pinned;
        a.extend(centre.iter().zip(&d).map(|(c, di)| c - half * di));
        b.extend(centre.iter().zip(&d).map(|(c, di)| c + half * di));
        (a, b)
    }

    fn spread_pair(&mut self, scale: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * scale;
        let pinned = self.pinned(None, self.domain.radius);
        let mut c = self.in_region(self.domain.free, self.domain.radius - half);
        self.clamp_centre(&mut c, half);
        self.pair(pinned, &c, scale)
    }

    fn focused_pair(&mut self, around: &[f64], scale: f64) -> (Vec<f64>, Vec<f64>) {
        let (pin, free) = around.split_at(self.domain.pinned);
        let half = 0.5 * scale;
        let reach = scale * FOCUS_REACH.powf(self.rng.random::<f64>());
        let pinned = self.pinned(Some(pin), reach);
        let jitter = self.in_ball(self.domain.free, reach);
        let mut c: Vec<f64> = free.iter().zip(&jitter).map(|(a, j)| a + j).collect();
        self.clamp_centre(&mut c, half);
        self.pair(pinned, &c, scale)
    }

    fn anchored_pair(&mut self, scale: f64) -> (Vec<f64>, Vec<f64>) {
        let d = self.direction();
        let pinned = vec![0.0; self.domain.pinned];
        let mut a = pinned.clone();
        let mut b = pinned;
        a.extend(std::iter::repeat_n(0.0, self.domain.free));
        b.extend(d.iter().map(|x| scale * x));
        (a, b)
    }
}

/// Samples the supremum of difference quotients of `g` over `domain`.
///
/// `g` receives sample coordinates. Pairs within a stratum are evaluated in
/// parallel and reduced in index order, so the result depends only on
/// `seed` and `budget`.
pub fn sample_quotients<G>(
    g: G,
    domain: &SampleDomain,
    budget: usize,
    seed: u64,
) -> Result<QuotientSample, SamplingError>
where
    G: Fn(&[f64]) -> Result<Vector, FieldError> + Sync,
{
    run(g, domain, budget, seed, false).map(|(s, _)| s)
}

/// [`sample_quotients`] that also returns every evaluated pair.
pub fn sample_quotients_traced<G>(
    g: G,
    domain: &SampleDomain,
    budget: usize,
    seed: u64,
) -> Result<(QuotientSample, Vec<PairRecord>), SamplingError>
where
    G: Fn(&[f64]) -> Result<Vector, FieldError> + Sync,
{
    run(g, domain, budget, seed, true)
}

fn validate(domain: &SampleDomain, budget: usize) -> Result<Option<Vec<f64>>, SamplingError> {
    if budget < MIN_BUDGET {
        return Err(SamplingError::Budget(budget));
    }
    if !(domain.radius > 0.0 && domain.radius.is_finite()) {
        return Err(SamplingError::Radius(domain.radius));
    }
    if domain.free == 0 {
        return Err(SamplingError::NoFreeCoordinates);
    }
    match &domain.direction {
        PairDirection::Random => Ok(None),
        PairDirection::Fixed(d) => {
            if d.dim() != domain.free {
                return Err(SamplingError::Direction {
                    expected: domain.free,
                    found: d.dim(),
                });
            }
            let unit = d.normalized().map_err(|_| SamplingError::ZeroDirection)?;
            Ok(Some(unit.into_vec()))
        }
    }
}

fn run<G>(
    g: G,
    domain: &SampleDomain,
    budget: usize,
    seed: u64,
    trace: bool,
) -> Result<(QuotientSample, Vec<PairRecord>), SamplingError>
where
    G: Fn(&[f64]) -> Result<Vector, FieldError> + Sync,
{
    let fixed = validate(domain, budget)?;
    let counts = stratum_budgets(budget);
    let mut strata = Vec::with_capacity(STRATA);
    let mut records = Vec::new();
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut previous_argmax: Option<Vec<f64>> = None;

    for (k, &count) in counts.iter().enumerate() {
        let scale = domain.radius * 0.5f64.powi(k as i32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut drawer = Drawer {
            domain,
            rng,
            fixed: fixed.clone(),
        };
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..count)
            .map(|i| {
                if k < FINE_START {
                    return drawer.spread_pair(scale);
                }
                let near_origin = previous_argmax.is_none() || i % 2 == 0;
                match (i, near_origin) {
                    (0, _) => drawer.anchored_pair(scale),
                    (_, true) => {
                        let origin = vec![0.0; domain.pinned + domain.free];
                        drawer.focused_pair(&origin, scale)
                    }
                    (_, false) => {
                        let around = previous_argmax.as_deref().expect("checked above");
                        drawer.focused_pair(around, scale)
                    }
                }
            })
            .collect();

        let quotients: Vec<Result<f64, SamplingError>> = pairs
            .par_iter()
            .map(|(a, b)| {
                let fa = g(a).map_err(|source| SamplingError::Eval {
                    point: a.clone(),
                    source,
                })?;
                let fb = g(b).map_err(|source| SamplingError::Eval {
                    point: b.clone(),
                    source,
                })?;
                let sep: f64 = norm2(
                    &a[domain.pinned..]
                        .iter()
                        .zip(&b[domain.pinned..])
                        .map(|(x, y)| x - y)
                        .collect::<Vec<_>>(),
                );
                Ok(fa.distance(&fb) / sep)
            })
            .collect();

        let mut stratum_max = 0.0_f64;
        let mut stratum_arg: Option<usize> = None;
        for (i, q) in quotients.into_iter().enumerate() {
            let q = q?;
            if stratum_arg.is_none() || q > stratum_max {
                stratum_max = q;
                stratum_arg = Some(i);
            }
            if trace {
                records.push(PairRecord {
                    stratum: k,
                    a: pairs[i].0.clone(),
                    b: pairs[i].1.clone(),
                    quotient: q,
                });
            }
        }
        if let Some(i) = stratum_arg {
            let (a, b) = &pairs[i];
            let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
            previous_argmax = Some(mid);
            if best.as_ref().is_none_or(|(v, ..)| stratum_max > *v) {
                best = Some((stratum_max, a.clone(), b.clone()));
            }
        }
        strata.push(Stratum {
            scale,
            pairs: count,
            max_quotient: stratum_max,
        });
    }

    let blowup = growth(&strata) >= BLOWUP_FACTOR;
    let (value, argmax) = match best {
        Some((v, a, b)) => (v, Some((a, b))),
        None => (0.0, None),
    };
    Ok((
        QuotientSample {
            value,
            strata,
            pairs_used: counts.iter().sum(),
            blowup,
            argmax,
        },
        records,
    ))
}
