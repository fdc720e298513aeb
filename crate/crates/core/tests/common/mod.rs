#![allow(dead_code)]

pub mod cli;

use mre::{ConstraintSet, Distribution, Event, OutcomeSpace};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn space(n: usize) -> OutcomeSpace {
    OutcomeSpace::new((0..n).map(|i| format!("o{i}"))).unwrap()
}

/// Strictly positive random distribution.
pub fn positive_dist(rng: &mut impl Rng, space: &OutcomeSpace) -> Distribution {
    let w = (0..space.len()).map(|_| rng.gen_range(0.01..1.0)).collect();
    Distribution::new(space.clone(), w).unwrap()
}

/// Random distribution with some exact zeros (never all).
pub fn sparse_dist(rng: &mut impl Rng, space: &OutcomeSpace) -> Distribution {
    let mut w: Vec<f64> = (0..space.len())
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.01..1.0)
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        let i = rng.gen_range(0..w.len());
        w[i] = 1.0;
    }
    Distribution::new(space.clone(), w).unwrap()
}

pub fn random_event(rng: &mut impl Rng, space: &OutcomeSpace) -> Event {
    let mask = (0..space.len()).map(|_| rng.gen_bool(0.5)).collect();
    Event::from_mask(space.clone(), mask).unwrap()
}

/// Random strictly feasible moment problem: targets are expectations of
/// the coefficient rows under a random positive distribution.
pub fn feasible_moments(rng: &mut impl Rng, space: &OutcomeSpace, count: usize) -> ConstraintSet {
    let witness = positive_dist(rng, space);
    let mut c = ConstraintSet::new(space.clone());
    for _ in 0..count {
        let coeffs: Vec<f64> = (0..space.len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let target = coeffs.iter().zip(witness.weights()).map(|(a, w)| a * w).sum();
        c = c.with_moment(coeffs, target).unwrap();
    }
    c
}

/// Random direction `d` with `Σ d = 0`, `Σ a_j d = 0` for every moment, and
/// `d_i = 0` wherever `q_i = 0`; then a random step keeping `q + t d ≥ 0`.
pub fn feasible_competitor(rng: &mut impl Rng, q: &Distribution, c: &ConstraintSet) -> Distribution {
    let n = q.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0; n]];
    rows.extend(c.moments().iter().map(|m| m.coeffs.clone()));
    for (i, &w) in q.weights().iter().enumerate() {
        if w == 0.0 {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            rows.push(e);
        }
    }
    // Gram-Schmidt over the constraint rows
    for row in rows {
        let mut v = row;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for _ in 0..2 {
        for b in &basis {
            let dot: f64 = d.iter().zip(b).map(|(x, y)| x * y).sum();
            d.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
    }
    let t_max = q
        .weights()
        .iter()
        .zip(&d)
        .filter(|(_, &di)| di < -1e-15)
        .map(|(&w, &di)| w / -di)
        .fold(f64::INFINITY, f64::min);
    let t = if t_max.is_finite() {
        rng.gen_range(0.0..1.0) * t_max
    } else {
        0.0
    };
    let w: Vec<f64> = q
        .weights()
        .iter()
        .zip(&d)
        .map(|(&qi, &di)| if qi == 0.0 { 0.0 } else { (qi + t * di).max(0.0) })
        .collect();
    Distribution::new(q.space().clone(), w).unwrap()
}

/// Mean of the fair-die tilt `q ∝ e^{−λ v}`, computed directly.
fn die_tilt(lambda: f64) -> Vec<f64> {
    let w: Vec<f64> = (1..=6).map(|v| (-lambda * v as f64).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn die_mean(lambda: f64) -> f64 {
    die_tilt(lambda)
        .iter()
        .enumerate()
        .map(|(i, q)| (i + 1) as f64 * q)
        .sum()
}

/// Fair-die distribution with the given mean, found by a dense λ grid on
/// [−2, 2] followed by bisection on the mean residual. Independent of the
/// Newton solver.
pub fn die_mean_oracle(target: f64) -> Vec<f64> {
    let steps = 4000;
    let grid = |k: usize| -2.0 + 4.0 * k as f64 / steps as f64;
    let residual = |l: f64| die_mean(l) - target;
    let k = (0..steps)
        .find(|&k| residual(grid(k)) >= 0.0 && residual(grid(k + 1)) <= 0.0)
        .expect("target bracketed on [-2, 2]");
    let (mut lo, mut hi) = (grid(k), grid(k + 1));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    die_tilt(0.5 * (lo + hi))
}

/// Exact counts of `(first die, sum)` over all `6^n` rolls, as the
/// conditional law of the first die given the sum.
pub fn enumerate_first_die(n: u32, sum: u32) -> Vec<f64> {
    let mut counts = [0u64; 6];
    let total = 6u64.pow(n);
    for code in 0..total {
        let mut c = code;
        let mut s = 0;
        let mut first = 0;
        for k in 0..n {
            let face = (c % 6) as u32 + 1;
            c /= 6;
            if k == 0 {
                first = face;
            }
            s += face;
        }
        if s == sum {
            counts[(first - 1) as usize] += 1;
        }
    }
    let hits: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / hits as f64).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
