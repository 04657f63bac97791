//! Geometric measure of entanglement, `G(ρ) = -log2 max <a|ρ|a>` over
//! product states `|a>` of a given partition.
//!
//! The general optimizer is a multistart see-saw over complex product
//! states. For the rank-7 four-qubit family there are also closed forms: `g`
//! over the Bloch-type parameters `(μ_j, ν_j)` and, after folding real
//! states to `λ_j`, the function `h`. A grid search supplies an independent
//! lower bound.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{PartyLayout, ProductVector};
use crate::coarse::CoarsePartition;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigensystem, kron, permute_operator, reduced_contraction, HermitianOp, Ket, C64,
};
use crate::ppt::{DensityMatrix, PSD_TOL};
use crate::uom::AngleAssignment;

/// `(3/28) √(3/2)`, the maximal product overlap of the rank-7 state at
/// all angles `π/4`.
pub fn analytic_max_overlap() -> f64 {
    3.0 / 28.0 * 1.5f64.sqrt()
}

/// `½ arcsin((√6 - 2)/2)`, the common value of `λ_2 = λ_3 = λ_4` at the
/// optimum.
pub fn lambda_star() -> f64 {
    0.5 * ((6f64.sqrt() - 2.0) / 2.0).asin()
}

pub fn ebits(max_overlap: f64) -> f64 {
    -max_overlap.log2()
}

/// `<a|ρ|a>` for a product state on the state's own layout.
pub fn overlap(rho: &DensityMatrix, state: &ProductVector) -> Result<f64> {
    if state.dims() != rho.layout().dims() {
        return Err(Error::InvalidLayout(format!(
            "state dims {:?} vs layout {:?}",
            state.dims(),
            rho.layout().dims()
        )));
    }
    Ok(rho.op().expectation(&state.full()))
}

/// Local qubit states `[cos ν_j, e^{iμ_j} sin ν_j]` for four parties.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizationPoint {
    pub mu: [f64; 4],
    pub nu: [f64; 4],
}

const PHASE_TOL: f64 = 1e-9;

impl OptimizationPoint {
    pub fn new(mu: [f64; 4], nu: [f64; 4]) -> Result<Self> {
        for &m in &mu {
            if !(0.0..=2.0 * PI).contains(&m) {
                return Err(Error::InvalidArgument(format!("mu = {m} outside [0, 2pi]")));
            }
        }
        for &n in &nu {
            if !(0.0..=FRAC_PI_2).contains(&n) {
                return Err(Error::InvalidArgument(format!("nu = {n} outside [0, pi/2]")));
            }
        }
        Ok(OptimizationPoint { mu, nu })
    }

    /// Real states `[cos λ_j, sin λ_j]`: `μ_j = π` for negative `λ_j`, else 0,
    /// and `ν_j = |λ_j|`.
    pub fn from_lambdas(lambdas: [f64; 4]) -> Result<Self> {
        if let Some(l) = lambdas.iter().find(|l| l.abs() > FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!("lambda = {l} outside [-pi/2, pi/2]")));
        }
        Self::new(
            lambdas.map(|l| if l < 0.0 { PI } else { 0.0 }),
            lambdas.map(f64::abs),
        )
    }

    /// Reads the parameters off a four-qubit product state, fixing each
    /// component's global phase so its first amplitude is real and
    /// nonnegative.
    pub fn from_product_vector(v: &ProductVector) -> Result<Self> {
        if v.dims() != [2, 2, 2, 2] {
            return Err(Error::InvalidLayout("four-qubit product state required".into()));
        }
        let mut mu = [0.0; 4];
        let mut nu = [0.0; 4];
        for (j, c) in v.components().iter().enumerate() {
            let [a, b] = [c.amplitudes()[0], c.amplitudes()[1]];
            nu[j] = b.norm().atan2(a.norm());
            mu[j] = if b.norm() < PHASE_TOL || a.norm() < PHASE_TOL {
                0.0
            } else {
                (b.arg() - a.arg()).rem_euclid(2.0 * PI)
            };
        }
        Ok(OptimizationPoint { mu, nu })
    }

    pub fn to_product_vector(&self) -> ProductVector {
        let comps = (0..4)
            .map(|j| {
                let (s, c) = self.nu[j].sin_cos();
                Ket::new(vec![C64::new(c, 0.0), C64::from_polar(s, self.mu[j])])
            })
            .collect();
        ProductVector::new(comps).expect("unit components")
    }

    /// `λ_j = ν_j cos μ_j` when every `cos μ_j` is `±1` within `tol`
    /// (components with `ν_j = 0` have no phase and always qualify).
    pub fn lambdas(&self, tol: f64) -> Option<[f64; 4]> {
        let mut out = [0.0; 4];
        for ((slot, mu), nu) in out.iter_mut().zip(self.mu).zip(self.nu) {
            let c = mu.cos();
            if nu > tol && (c.abs() - 1.0).abs() > tol {
                return None;
            }
            *slot = if c < 0.0 { -nu } else { nu };
        }
        Some(out)
    }
}

/// The closed form of `<a_1..a_4|ρ|a_1..a_4>` for the rank-7 state at the
/// given angles.
pub fn general_g(angles: &AngleAssignment, point: &OptimizationPoint) -> f64 {
    let theta = angles.as_array();
    let f: Vec<f64> = (0..4)
        .map(|j| {
            let (st, ct) = theta[j].sin_cos();
            let (sn, cn) = point.nu[j].sin_cos();
            st * st * cn * cn + ct * ct * sn * sn - 2.0 * point.mu[j].cos() * st * cn * ct * sn
        })
        .collect();
    let c: Vec<f64> = point.nu.iter().map(|n| n.cos().powi(2)).collect();
    let s: Vec<f64> = point.nu.iter().map(|n| n.sin().powi(2)).collect();
    (f[0] * (c[1] * c[2] * c[3] + s[1] * s[2] * s[3])
        + f[1] * (s[0] * s[2] * c[3] + c[0] * c[2] * s[3])
        + f[2] * (s[0] * c[1] * s[3] + c[0] * s[1] * c[3])
        + f[3] * (s[0] * s[1] * c[2] + c[0] * c[1] * s[2])
        - f[0] * f[1] * f[2] * f[3])
        / 7.0
}

/// `f_i` and `g_i` of the folded problem at all angles `π/4`.
pub fn symmetric_parts(l: [f64; 4]) -> ([f64; 4], [f64; 4]) {
    let f = l.map(|x| 0.5 - 0.5 * (2.0 * x).sin());
    let s = l.map(|x| x.sin().powi(2));
    let c = l.map(|x| x.cos().powi(2));
    let g = [
        c[1] * c[2] * c[3] + s[1] * s[2] * s[3],
        s[0] * s[2] * c[3] + c[0] * c[2] * s[3],
        s[0] * s[3] * c[1] + c[0] * c[3] * s[1],
        s[0] * s[1] * c[2] + c[0] * c[1] * s[2],
    ];
    (f, g)
}

/// `h = (Σ f_i g_i - f_1 f_2 f_3 f_4) / 7`, the overlap of the rank-7 state
/// at all angles `π/4` with `⊗_j [cos λ_j, sin λ_j]`.
pub fn symmetric_h(l: [f64; 4]) -> f64 {
    let (f, g) = symmetric_parts(l);
    (f.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() - f.iter().product::<f64>()) / 7.0
}

/// `h` along `λ_1 = π/4` (where `sin 2λ_1 = 1`) with `λ_2 = λ_3 = λ_4 = λ`.
pub fn h_plus_branch(lambda: f64) -> f64 {
    symmetric_h([FRAC_PI_4, lambda, lambda, lambda])
}

/// Stationary points of [`h_plus_branch`] in `sin 2λ ∈ [-1, 1]`: `λ = 0`
/// and `λ = ½ arcsin(2/3)`.
pub fn h_plus_branch_stationary_points() -> [f64; 2] {
    [0.0, 0.5 * (2.0f64 / 3.0).asin()]
}

/// Collapses the symmetry orbit of a four-qubit real optimum: returns the
/// index of the party with `|λ|` closest to `π/4` and the other three
/// values mapped to `min(|λ|, π/2 - |λ|)`.
pub fn orbit_representative(l: [f64; 4]) -> (usize, [f64; 3]) {
    let special = (0..4)
        .min_by(|&a, &b| {
            (l[a].abs() - FRAC_PI_4)
                .abs()
                .total_cmp(&(l[b].abs() - FRAC_PI_4).abs())
        })
        .expect("four parties");
    let mut rest = [0.0; 3];
    for (slot, j) in rest.iter_mut().zip((0..4).filter(|&j| j != special)) {
        let a = l[j].abs();
        *slot = a.min(FRAC_PI_2 - a);
    }
    (special, rest)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// A run stops once a full sweep gains less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions {
            restarts: 64,
            max_iters: 500,
            tol: 1e-12,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GmeResult {
    pub partition: String,
    pub max_overlap: f64,
    pub g_ebits: f64,
    /// Optimal product state, one component per block of the partition.
    pub argmax: ProductVector,
    pub restarts_used: usize,
    /// Sweeps taken by the winning restart.
    pub converged_iterations: usize,
    pub best_restart: usize,
    /// Every update in every restart was nondecreasing within `1e-12`.
    pub monotone: bool,
    /// Overlap after each sweep of the winning restart.
    pub trace: Vec<f64>,
}

struct RunOutcome {
    overlap: f64,
    states: Vec<Ket>,
    sweeps: usize,
    monotone: bool,
    trace: Vec<f64>,
}

const MONOTONE_SLACK: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-12;

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Ket {
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(k) = Ket::new(amps).normalized() {
            return k;
        }
    }
}

/// Top eigenvector; within a degenerate top eigenspace the basis vector
/// whose real parts are lexicographically largest after phase fixing wins.
fn top_eigenvector(op: &HermitianOp) -> Result<(f64, Ket)> {
    let eig = hermitian_eigensystem(op)?;
    let top = eig.values[0];
    let best = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .take_while(|(v, _)| top - **v <= DEGENERACY_TOL)
        .map(|(_, k)| k.with_canonical_phase())
        .max_by(|a, b| {
            let ra = a.amplitudes().iter().map(|z| z.re);
            let rb = b.amplitudes().iter().map(|z| z.re);
            ra.zip(rb)
                .map(|(x, y)| x.total_cmp(&y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(std::cmp::Ordering::Greater)
        })
        .expect("nonempty spectrum");
    Ok((top, best))
}

fn run_seesaw(op: &HermitianOp, dims: &[usize], opts: &SeesawOptions, restart: usize) -> Result<RunOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let mut states: Vec<Option<Ket>> = dims.iter().map(|&d| Some(random_unit(&mut rng, d))).collect();
    let full = |s: &[Option<Ket>]| {
        s.iter()
            .map(|k| k.clone().expect("all parties set"))
            .reduce(|a, b| kron(&a, &b))
            .expect("at least one party")
    };
    let mut current = op.expectation(&full(&states));
    let mut monotone = true;
    let mut trace = Vec::new();
    let mut sweeps = 0;
    while sweeps < opts.max_iters {
        let start = current;
        for p in 0..dims.len() {
            let m = reduced_contraction(op, dims, &states, p)?;
            let (value, vec) = top_eigenvector(&m)?;
            if value < current - MONOTONE_SLACK {
                monotone = false;
            }
            current = value;
            states[p] = Some(vec);
        }
        sweeps += 1;
        trace.push(current);
        if current - start < opts.tol {
            break;
        }
    }
    Ok(RunOutcome {
        overlap: current,
        states: states.into_iter().map(|k| k.expect("set")).collect(),
        sweeps,
        monotone,
        trace,
    })
}

/// See-saw over product states of an operator on `dims`. Each update sets
/// one party to the top eigenvector of the contraction with the others,
/// which cannot lower the overlap. Restarts run in parallel and the best
/// one wins, ties going to the lowest index.
pub fn seesaw_on_operator(op: &HermitianOp, dims: &[usize], opts: &SeesawOptions) -> Result<(f64, Vec<Ket>, GmeDiagnostics)> {
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let eig = hermitian_eigensystem(op)?;
    if eig.min_value() < -PSD_TOL {
        return Err(Error::NotPsd(eig.min_value()));
    }
    let runs = (0..opts.restarts)
        .into_par_iter()
        .map(|r| run_seesaw(op, dims, opts, r))
        .collect::<Result<Vec<_>>>()?;
    let monotone = runs.iter().all(|r| r.monotone);
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.overlap > runs[best].overlap {
            best = i;
        }
    }
    let winner = &runs[best];
    if winner.overlap > eig.max_value() + 1e-10 {
        return Err(Error::Consistency(format!(
            "product overlap {} exceeds the largest eigenvalue {}",
            winner.overlap,
            eig.max_value()
        )));
    }
    Ok((
        winner.overlap,
        winner.states.clone(),
        GmeDiagnostics {
            restarts_used: runs.len(),
            converged_iterations: winner.sweeps,
            best_restart: best,
            monotone,
            trace: winner.trace.clone(),
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct GmeDiagnostics {
    pub restarts_used: usize,
    pub converged_iterations: usize,
    pub best_restart: usize,
    pub monotone: bool,
    pub trace: Vec<f64>,
}

/// The state regrouped so the blocks of `partition` are contiguous, with the
/// merged block dimensions.
fn grouped(rho: &DensityMatrix, partition: &CoarsePartition) -> Result<(HermitianOp, Vec<usize>)> {
    let layout = rho.layout();
    if partition.parties() != layout.parties() {
        return Err(Error::InvalidPartition(format!(
            "partition over {} parties, state has {}",
            partition.parties(),
            layout.parties()
        )));
    }
    let op = permute_operator(rho.op(), layout.dims(), &partition.party_order())?;
    Ok((op, partition.merged_dims(layout)))
}

pub fn seesaw_maximize(
    rho: &DensityMatrix,
    partition: &CoarsePartition,
    opts: &SeesawOptions,
) -> Result<GmeResult> {
    let (op, dims) = grouped(rho, partition)?;
    let (max_overlap, states, diag) = seesaw_on_operator(&op, &dims, opts)?;
    Ok(GmeResult {
        partition: partition.label_string(rho.layout().labels()),
        max_overlap,
        g_ebits: ebits(max_overlap),
        argmax: ProductVector::new(states)?,
        restarts_used: diag.restarts_used,
        converged_iterations: diag.converged_iterations,
        best_restart: diag.best_restart,
        monotone: diag.monotone,
        trace: diag.trace,
    })
}

pub const MAX_GRID_POINTS: f64 = 1e8;

/// Grid of unit vectors in `C^d`: hyperspherical magnitude angles with
/// `steps` values in `[0, π/2]` and relative phases with `steps` values in
/// `[0, 2π)`.
fn grid_states(dim: usize, steps: usize) -> Vec<Ket> {
    let mags: Vec<f64> = (0..steps)
        .map(|k| if steps == 1 { 0.0 } else { FRAC_PI_2 * k as f64 / (steps - 1) as f64 })
        .collect();
    let phases: Vec<f64> = (0..steps).map(|k| 2.0 * PI * k as f64 / steps as f64).collect();
    let vars = 2 * (dim - 1);
    let total = steps.pow(vars as u32);
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut digits = Vec::with_capacity(vars);
        for _ in 0..vars {
            digits.push(code % steps);
            code /= steps;
        }
        let mut amps = Vec::with_capacity(dim);
        let mut rest = 1.0;
        for k in 0..dim {
            let mag = if k + 1 == dim {
                rest
            } else {
                let (s, c) = mags[digits[k]].sin_cos();
                let m = rest * c;
                rest *= s;
                m
            };
            let phase = if k == 0 { 0.0 } else { phases[digits[dim - 1 + k - 1]] };
            amps.push(C64::from_polar(mag, phase));
        }
        out.push(Ket::new(amps));
    }
    out
}

/// Largest overlap over a product grid of `steps` values per real
/// parameter; a lower bound on the true maximum.
pub fn grid_oracle(rho: &DensityMatrix, partition: &CoarsePartition, steps: usize) -> Result<f64> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let (op, dims) = grouped(rho, partition)?;
    let vars: usize = dims.iter().map(|d| 2 * (d - 1)).sum();
    let points = (steps as f64).powi(vars as i32);
    if points > MAX_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "grid of {points:.3e} points exceeds {MAX_GRID_POINTS:.0e}"
        )));
    }
    let per_party: Vec<Vec<Ket>> = dims.iter().map(|&d| grid_states(d, steps)).collect();
    let best = per_party[0]
        .par_iter()
        .map(|first| {
            let mut best = f64::NEG_INFINITY;
            let mut idx = vec![0usize; dims.len() - 1];
            loop {
                let v = idx
                    .iter()
                    .enumerate()
                    .fold(first.clone(), |acc, (p, &i)| kron(&acc, &per_party[p + 1][i]));
                best = best.max(op.expectation(&v));
                let mut p = 0;
                loop {
                    if p == idx.len() {
                        return best;
                    }
                    idx[p] += 1;
                    if idx[p] < per_party[p + 1].len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
            }
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

/// Grid over real four-qubit states `[cos λ_1, sin λ_1] ⊗ [cos λ, sin λ]^{⊗3}`
/// with `steps + 1` values of each `λ` in `[-π/2, π/2]`. Returns the best
/// overlap and the `(λ_1, λ)` attaining it.
pub fn symmetric_slice_grid(rho: &DensityMatrix, steps: usize) -> Result<(f64, [f64; 2])> {
    if rho.layout().dims() != [2, 2, 2, 2] {
        return Err(Error::InvalidLayout("four-qubit state required".into()));
    }
    if steps == 0 || ((steps + 1) as f64).powi(2) > MAX_GRID_POINTS {
        return Err(Error::InvalidArgument(format!("bad step count {steps}")));
    }
    let lam = |k: usize| -FRAC_PI_2 + PI * k as f64 / steps as f64;
    let op = rho.op();
    let (value, k1, k2) = (0..=steps)
        .into_par_iter()
        .map(|k1| {
            let (s1, c1) = lam(k1).sin_cos();
            let a = Ket::from_real(&[c1, s1]);
            let mut best = (f64::NEG_INFINITY, k1, 0);
            for k2 in 0..=steps {
                let (s, c) = lam(k2).sin_cos();
                let b = Ket::from_real(&[c, s]);
                let v = kron(&kron(&kron(&a, &b), &b), &b);
                let o = op.expectation(&v);
                if o > best.0 {
                    best = (o, k1, k2);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, 0, 0),
            |x, y| if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) { y } else { x },
        );
    Ok((value, [lam(k1), lam(k2)]))
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    /// `(partition, G)` along the chain.
    pub values: Vec<(String, f64)>,
    pub nonincreasing: bool,
}

pub const MONOTONICITY_SLACK: f64 = 1e-6;

/// Computes `G` along a chain of successively coarser partitions and checks
/// that it never increases by more than [`MONOTONICITY_SLACK`].
pub fn monotonicity_check(
    rho: &DensityMatrix,
    chain: &[CoarsePartition],
    opts: &SeesawOptions,
) -> Result<MonotonicityReport> {
    for w in chain.windows(2) {
        if !w[0].refines(&w[1]) {
            let labels = rho.layout().labels();
            return Err(Error::InvalidPartition(format!(
                "{} does not refine {}",
                w[0].label_string(labels),
                w[1].label_string(labels)
            )));
        }
    }
    let values = chain
        .iter()
        .map(|p| seesaw_maximize(rho, p, opts).map(|r| (r.partition, r.g_ebits)))
        .collect::<Result<Vec<_>>>()?;
    let nonincreasing = values.windows(2).all(|w| w[1].1 <= w[0].1 + MONOTONICITY_SLACK);
    Ok(MonotonicityReport {
        values,
        nonincreasing,
    })
}

/// `A|B|C|D`-style partition into single parties.
pub fn finest(layout: &PartyLayout) -> CoarsePartition {
    CoarsePartition::trivial(layout.parties())
}
