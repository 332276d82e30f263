//! Gaussian multiplier bootstrap for `T`.
//!
//! Each replicate replaces the errors in the linearisation of `f̂_1 − f̂_2` by
//! `σ̂_s(j/n_s) V_{j,s}` with standard normal `V`, and integrates the squared
//! difference over the same window as `T`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::KernelSpec;
use crate::lrv::LrvEstimate;
use crate::quadrature::trapezoid_samples;
use crate::rng::{stream_rng, DOMAIN_BOOTSTRAP};
use crate::scalar::{linspace, Scalar};
use crate::shift::{DensityEstimate, ShiftEstimate};
use crate::statistic::TestStatistic;

pub const DEFAULT_REPLICATES: usize = 500;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Which sample's multipliers are drawn first from a replicate's stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierOrder {
    #[default]
    FirstThenSecond,
    SecondThenFirst,
}

/// Compressed rows: `row i` holds `(column, weight)` pairs.
#[derive(Debug, Clone)]
struct SparseRows<T> {
    offsets: Vec<usize>,
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> SparseRows<T> {
    fn build(rows: usize, mut row: impl FnMut(usize, &mut Vec<(usize, T)>)) -> Self {
        let mut offsets = Vec::with_capacity(rows + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for i in 0..rows {
            row(i, &mut entries);
            offsets.push(entries.len());
        }
        SparseRows { offsets, entries }
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.entries[self.offsets[i]..self.offsets[i + 1]]
                .iter()
                .fold(T::zero(), |acc, &(j, w)| acc + w * x[j]);
        }
    }
}

#[derive(Debug, Clone)]
struct SidePlan<T> {
    n: usize,
    /// `K°((j/n − i/N)/b) σ̂(j/n)` for atom `i` and design index `j`.
    band: SparseRows<T>,
    /// `K_d'((m̂'(i/N) − t_k)/h)` for grid node `k` and atom `i`.
    slope: SparseRows<T>,
    scale: T,
}

impl<T: Scalar> SidePlan<T> {
    fn new(density: &DensityEstimate<T>, lrv: &LrvEstimate<T>, grid: &[T], spec: &KernelSpec<T>) -> Result<Self> {
        let curve = density.source();
        let n = curve.n();
        if lrv.n() != n {
            return Err(invalid(format!("LRV estimate has n = {} but the curve has n = {n}", lrv.n())));
        }
        let big_n = density.grid_size();
        let b = curve.bandwidth();
        let h = density.bandwidth();
        let nf = T::from_count(n);
        let bigf = T::from_count(big_n);
        let sd = lrv.sd_at_design();
        let band = SparseRows::build(big_n, |i, row| {
            let x = T::from_count(i + 1) / bigf;
            let lo = ((x - b) * nf).ceil().to_usize().unwrap_or(0).max(1);
            let hi = ((x + b) * nf).floor().to_usize().unwrap_or(0).min(n);
            for j in lo..=hi {
                let w = spec.equivalent_kernel((T::from_count(j) / nf - x) / b) * sd[j - 1];
                if w != T::zero() {
                    row.push((j - 1, w));
                }
            }
        });

        let atoms = density.atoms();
        let mut order: Vec<usize> = (0..big_n).collect();
        order.sort_by(|&a, &c| atoms[a].partial_cmp(&atoms[c]).expect("finite atoms"));
        let sorted: Vec<T> = order.iter().map(|&i| atoms[i]).collect();
        let kernel = density.kernel();
        let slope = SparseRows::build(grid.len(), |k, row| {
            let t = grid[k];
            let lo = sorted.partition_point(|&v| v < t - h);
            let hi = sorted.partition_point(|&v| v <= t + h);
            for p in lo..hi {
                let w = kernel.derivative((sorted[p] - t) / h);
                if w != T::zero() {
                    row.push((order[p], w));
                }
            }
        });
        let scale = T::one() / (nf * bigf * b * b * h * h);
        Ok(SidePlan { n, band, slope, scale })
    }

    /// `Ξ_s(t_k)` times the normalisation, for multipliers `v`.
    fn process(&self, v: &[T], atoms_buf: &mut [T], out: &mut [T]) {
        self.band.apply(v, atoms_buf);
        self.slope.apply(atoms_buf, out);
        for o in out.iter_mut() {
            *o = *o * self.scale;
        }
    }
}

/// Precomputed tables shared by all replicates of one test.
#[derive(Debug, Clone)]
pub struct BootstrapPlan<T> {
    sides: [SidePlan<T>; 2],
    atoms: [usize; 2],
    window: (T, T),
    nodes: usize,
}

impl<T: Scalar> BootstrapPlan<T> {
    /// Inputs are in the caller's ordering; `nodes` is the quadrature size `M`.
    pub fn new(
        dens: [&DensityEstimate<T>; 2],
        lrv: [&LrvEstimate<T>; 2],
        shift: &ShiftEstimate<T>,
        nodes: usize,
        spec: &KernelSpec<T>,
    ) -> Result<Self> {
        if nodes < 100 {
            return Err(invalid(format!("bootstrap grid M = {nodes} must be at least 100")));
        }
        let (lo, hi) = shift.window();
        if !(hi > lo) {
            return Err(crate::error::Error::DegenerateWindow {
                a_hat: shift.a_hat.as_f64(),
                b_hat: shift.b_hat.as_f64(),
                eta: shift.eta.as_f64(),
            });
        }
        let grid = linspace(lo, hi, nodes);
        let first = SidePlan::new(dens[0], lrv[0], &grid, spec)?;
        let second = SidePlan::new(dens[1], lrv[1], &grid, spec)?;
        Ok(BootstrapPlan {
            sides: [first, second],
            atoms: [dens[0].grid_size(), dens[1].grid_size()],
            window: (lo, hi),
            nodes,
        })
    }

    pub fn window(&self) -> (T, T) {
        self.window
    }

    /// One draw of `W` with multipliers taken from `rng` in the given order.
    pub fn replicate_with<R: Rng + ?Sized>(&self, rng: &mut R, order: MultiplierOrder) -> T {
        let mut draw = |count: usize| -> Vec<T> {
            (0..count).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect()
        };
        let (v1, v2) = match order {
            MultiplierOrder::FirstThenSecond => {
                let a = draw(self.sides[0].n);
                (a, draw(self.sides[1].n))
            }
            MultiplierOrder::SecondThenFirst => {
                let b = draw(self.sides[1].n);
                (draw(self.sides[0].n), b)
            }
        };
        self.evaluate(&v1, &v2)
    }

    /// `W` for explicit multipliers.
    pub fn evaluate(&self, v1: &[T], v2: &[T]) -> T {
        assert_eq!(v1.len(), self.sides[0].n, "multiplier count for the first sample");
        assert_eq!(v2.len(), self.sides[1].n, "multiplier count for the second sample");
        let mut xi1 = vec![T::zero(); self.nodes];
        let mut xi2 = vec![T::zero(); self.nodes];
        let mut buf1 = vec![T::zero(); self.atoms[0]];
        let mut buf2 = vec![T::zero(); self.atoms[1]];
        self.sides[0].process(v1, &mut buf1, &mut xi1);
        self.sides[1].process(v2, &mut buf2, &mut xi2);
        let squares: Vec<T> = xi1.iter().zip(&xi2).map(|(&a, &b)| (a - b) * (a - b)).collect();
        let step = (self.window.1 - self.window.0) / T::from_count(self.nodes - 1);
        trapezoid_samples(&squares, step)
    }

    /// `E[W]` over the multipliers, `Σ_s Σ_j ∫ G_s(j, t)² dt` with `G_s(j, ·)` the
    /// response of the normalised `Ξ_s` to a unit multiplier at `j`.
    pub fn expected_draw(&self) -> T {
        let step = (self.window.1 - self.window.0) / T::from_count(self.nodes - 1);
        let mut values = vec![T::zero(); self.nodes];
        for side in &self.sides {
            let mut row = vec![T::zero(); side.n];
            for (k, v) in values.iter_mut().enumerate() {
                row.iter_mut().for_each(|r| *r = T::zero());
                for &(i, ws) in &side.slope.entries[side.slope.offsets[k]..side.slope.offsets[k + 1]] {
                    for &(j, wb) in &side.band.entries[side.band.offsets[i]..side.band.offsets[i + 1]] {
                        row[j] = row[j] + ws * wb;
                    }
                }
                let sq: T = row.iter().map(|&r| r * r).sum();
                *v = *v + sq * side.scale * side.scale;
            }
        }
        trapezoid_samples(&values, step)
    }

    /// Replicate `k` under `seed`.
    pub fn replicate(&self, seed: u64, k: u64, order: MultiplierOrder) -> T {
        self.replicate_with(&mut stream_rng(seed, DOMAIN_BOOTSTRAP, k), order)
    }

    /// Replicates `0..count`, computed in parallel, in index order.
    pub fn draws(&self, seed: u64, count: usize, order: MultiplierOrder) -> Vec<T> {
        (0..count as u64).into_par_iter().map(|k| self.replicate(seed, k, order)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    #[serde(default)]
    pub order: MultiplierOrder,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { replicates: DEFAULT_REPLICATES, alpha: DEFAULT_ALPHA, seed: 0, order: MultiplierOrder::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult<T> {
    /// Sorted draws `W_(1) ≤ … ≤ W_(B)`.
    pub draws: Vec<T>,
    pub replicates: usize,
    pub p_value: T,
    pub decision: bool,
    pub alpha: T,
    pub seed: u64,
    /// `W_(⌊B(1−α)⌋)`.
    pub critical_value: T,
}

impl<T: Scalar> BootstrapResult<T> {
    /// Builds the result from unsorted draws.
    pub fn from_draws(statistic: T, mut draws: Vec<T>, alpha: T, seed: u64) -> Result<Self> {
        if draws.is_empty() {
            return Err(invalid("at least one bootstrap draw is required"));
        }
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(invalid(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        draws.sort_by(|a, b| a.partial_cmp(b).expect("finite bootstrap draws"));
        let b = draws.len();
        let rank = ((b as f64) * (1.0 - alpha.as_f64()) + 1e-9).floor() as usize;
        let critical_value = draws[rank.clamp(1, b) - 1];
        let p_value = p_value(&draws, statistic);
        Ok(BootstrapResult {
            replicates: b,
            p_value,
            decision: statistic > critical_value,
            alpha,
            seed,
            critical_value,
            draws,
        })
    }

    /// `1 − B*/B` for another value of the statistic against the same draws.
    pub fn p_value_for(&self, statistic: T) -> T {
        p_value(&self.draws, statistic)
    }
}

fn p_value<T: Scalar>(sorted: &[T], statistic: T) -> T {
    let below = sorted.partition_point(|&w| w <= statistic);
    T::one() - T::from_count(below) / T::from_count(sorted.len())
}

/// Runs the bootstrap test of `statistic`.
pub fn bootstrap_test<T: Scalar>(
    statistic: &TestStatistic<T>,
    plan: &BootstrapPlan<T>,
    config: &BootstrapConfig,
) -> Result<BootstrapResult<T>> {
    if config.replicates < 100 {
        return Err(invalid(format!("B = {} must be at least 100", config.replicates)));
    }
    let draws = plan.draws(config.seed, config.replicates, config.order);
    BootstrapResult::from_draws(statistic.value, draws, T::lit(config.alpha), config.seed)
}
