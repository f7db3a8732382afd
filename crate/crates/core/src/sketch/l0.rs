//! ℓ0-samplers over integer vectors indexed by `0..n`.
//!
//! Each repetition hashes indices into nested geometric levels; level `j`
//! holds every index whose hash has at least `j` leading zeros. A level keeps
//! the sum of deltas, the index-weighted sum and a polynomial fingerprint
//! modulo the Mersenne prime `2^61 - 1`, all of which are linear in the
//! update stream.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::rng;

const P: u64 = (1 << 61) - 1;

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let prod = a as u128 * b as u128;
    let lo = (prod as u64) & P;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

/// `delta · z^i mod P`, with negative deltas mapped to the additive inverse.
#[inline]
fn signed_term(delta: i64, zpow: u64) -> u64 {
    let mag = mul_mod(delta.unsigned_abs() % P, zpow);
    if delta >= 0 || mag == 0 {
        mag
    } else {
        P - mag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Level {
    count: i64,
    index_sum: i64,
    fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Repetition {
    mul: u128,
    add: u128,
    levels: Vec<Level>,
}

impl Repetition {
    #[inline]
    fn depth(&self, index: usize, max: usize) -> usize {
        let h = (self.mul.wrapping_mul(index as u128).wrapping_add(self.add) >> 64) as u64;
        (h.leading_zeros() as usize).min(max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L0Outcome {
    Index(usize),
    /// The sketched vector is zero.
    Empty,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L0Sampler {
    n: usize,
    z: u64,
    reps: Vec<Repetition>,
}

pub fn num_levels(n: usize) -> usize {
    (n.max(2) as f64).log2().ceil() as usize + 2
}

pub fn num_repetitions(delta: f64) -> usize {
    ((1.0 / delta).ln() / 4f64.ln()).ceil().max(1.0) as usize
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("failure probability must be in (0, 1), got {delta}")))
    }
}

impl L0Sampler {
    pub fn new(n: usize, delta: f64, seed: u64) -> Result<Self> {
        check_delta(delta)?;
        let mut rng = rng::rng_from(seed);
        let z = rng.gen_range(2..P);
        Ok(Self::with_base(n, delta, z, &mut rng))
    }

    fn with_base(n: usize, delta: f64, z: u64, rng: &mut impl Rng) -> Self {
        let levels = num_levels(n);
        let reps = (0..num_repetitions(delta))
            .map(|_| Repetition {
                mul: rng.gen::<u128>() | 1,
                add: rng.gen(),
                levels: vec![Level::default(); levels],
            })
            .collect();
        Self { n, z, reps }
    }

    pub fn update(&mut self, index: usize, delta: i64) {
        let zpow = pow_mod(self.z, index as u64);
        self.update_with_power(index, delta, zpow);
    }

    #[inline]
    fn update_with_power(&mut self, index: usize, delta: i64, zpow: u64) {
        debug_assert!(index < self.n);
        let term = signed_term(delta, zpow);
        let weighted = delta * index as i64;
        for rep in &mut self.reps {
            let top = rep.levels.len() - 1;
            let depth = rep.depth(index, top);
            for level in &mut rep.levels[..=depth] {
                level.count += delta;
                level.index_sum += weighted;
                level.fingerprint = add_mod(level.fingerprint, term);
            }
        }
    }

    fn decode(&self, level: &Level) -> Option<usize> {
        if level.count == 0 || level.index_sum % level.count != 0 {
            return None;
        }
        let idx = level.index_sum / level.count;
        if idx < 0 || idx as usize >= self.n {
            return None;
        }
        let expect = signed_term(level.count, pow_mod(self.z, idx as u64));
        (expect == level.fingerprint).then_some(idx as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.reps.iter().all(|r| r.levels[0] == Level::default())
    }

    /// The first one-sparse level, scanning repetitions in order and levels
    /// from the densest up.
    pub fn sample(&self) -> L0Outcome {
        if self.is_zero() {
            return L0Outcome::Empty;
        }
        for rep in &self.reps {
            for level in &rep.levels {
                if level.count == 0 && level.fingerprint == 0 {
                    break;
                }
                if let Some(i) = self.decode(level) {
                    return L0Outcome::Index(i);
                }
            }
        }
        L0Outcome::Fail
    }

    pub fn words(&self) -> usize {
        self.reps.len() * (3 * num_levels(self.n) + 5)
    }
}

pub fn l0_update(s: &mut L0Sampler, index: usize, delta: i64) {
    s.update(index, delta);
}

pub fn l0_sample(s: &L0Sampler) -> L0Outcome {
    s.sample()
}

/// Per-vertex groups of samplers over positive adjacency vectors. Samplers of
/// one vertex share their fingerprint base so an update costs one power.
#[derive(Debug, Clone)]
pub struct SamplerBank {
    n: usize,
    bases: Vec<u64>,
    samplers: Vec<Vec<L0Sampler>>,
}

/// Result of recovering a vertex's neighbourhood from its samplers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovery {
    pub neighbors: Vec<Vertex>,
    pub complete: bool,
}

impl SamplerBank {
    pub fn new(n: usize, counts: &[usize], delta: f64, seed: u64) -> Result<Self> {
        check_delta(delta)?;
        if counts.len() != n {
            return Err(Error::Parameter(format!(
                "{} sampler counts for {n} vertices",
                counts.len()
            )));
        }
        let mut bases = Vec::with_capacity(n);
        let mut samplers = Vec::with_capacity(n);
        for (u, &k) in counts.iter().enumerate() {
            let mut rng = rng::rng_from(rng::derive_seed(seed, u as u64));
            let z = rng.gen_range(2..P);
            bases.push(z);
            samplers.push((0..k).map(|_| L0Sampler::with_base(n, delta, z, &mut rng)).collect());
        }
        Ok(Self { n, bases, samplers })
    }

    /// Apply `delta` at coordinate `index` of `owner`'s vector.
    pub fn update(&mut self, owner: Vertex, index: Vertex, delta: i64) {
        let group = &mut self.samplers[owner];
        if group.is_empty() {
            return;
        }
        let zpow = pow_mod(self.bases[owner], index as u64);
        for s in group {
            s.update_with_power(index, delta, zpow);
        }
    }

    pub fn count(&self, owner: Vertex) -> usize {
        self.samplers[owner].len()
    }

    pub fn samplers(&self, owner: Vertex) -> &[L0Sampler] {
        &self.samplers[owner]
    }

    /// Repeatedly sample a neighbour and subtract it from every sampler of the
    /// group. `complete` is set when the group decodes to the zero vector.
    pub fn recover(&self, owner: Vertex) -> Recovery {
        let mut group = self.samplers[owner].clone();
        let mut neighbors = Vec::new();
        if group.is_empty() {
            return Recovery {
                neighbors,
                complete: false,
            };
        }
        let mut seen = vec![false; self.n];
        loop {
            if group[0].is_zero() {
                neighbors.sort_unstable();
                return Recovery {
                    neighbors,
                    complete: true,
                };
            }
            let found = group.iter().find_map(|s| match s.sample() {
                L0Outcome::Index(i) => Some(i),
                _ => None,
            });
            let Some(v) = found else { break };
            if seen[v] {
                break;
            }
            seen[v] = true;
            neighbors.push(v);
            let zpow = pow_mod(self.bases[owner], v as u64);
            for s in &mut group {
                s.update_with_power(v, -1, zpow);
            }
        }
        neighbors.sort_unstable();
        Recovery {
            neighbors,
            complete: false,
        }
    }

    pub fn words(&self) -> usize {
        self.samplers.iter().flatten().map(L0Sampler::words).sum::<usize>() + self.n
    }
}
