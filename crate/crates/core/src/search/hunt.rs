//! Randomized search for small covers without packing.
//!
//! Restart `i` starts from `t` uniformly random options and performs local
//! moves: pick a surviving packing matrix uniformly, pick one of the options
//! blocking it uniformly, and put that option in place of the column whose
//! removal uncovers the fewest matrices (a uniformly random column with
//! probability [`HuntParams::noise`]).
//!
//! Restart `i` draws from ChaCha8 seeded with `splitmix64(seed ^ splitmix64(i))`.
//! Restarts run in waves of [`HuntParams::wave`]; the lowest successful index
//! of the first successful wave wins, so the outcome does not depend on the
//! number of worker threads.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::blocking::{BlockingSystem, CoverSpace, SpaceKind};
use super::SearchBudget;
use crate::cover::CorrespondenceCover;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuntParams {
    pub moves_per_restart: u64,
    /// Restarts evaluated together; fixed so results ignore the thread count.
    pub wave: u64,
    /// Probability of replacing a random column instead of the best one.
    pub noise: f64,
}

impl Default for HuntParams {
    fn default() -> Self {
        Self { moves_per_restart: 200_000, wave: 8, noise: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuntResult {
    /// A cover with no packing, if one was found.
    pub cover: Option<CorrespondenceCover>,
    pub winning_restart: Option<u64>,
    pub restarts: u64,
    /// Fewest surviving matrices seen in any restart.
    pub best_surviving: usize,
    /// Set when the time cutoff ended the search early.
    pub timed_out: bool,
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of restart `index`.
pub fn restart_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Searches for a `k`-fold cover of `K_{d,t}` with no packing. The budget's
/// `max_candidates` bounds the total number of moves.
pub fn random_unpackable_cover_search(
    d: usize,
    k: usize,
    t: usize,
    budget: &SearchBudget,
    params: &HuntParams,
) -> Result<HuntResult> {
    if t == 0 || d == 0 {
        return Err(invalid("d and t must be positive"));
    }
    if params.moves_per_restart == 0 || params.wave == 0 {
        return Err(invalid("moves per restart and wave size must be positive"));
    }
    let space = CoverSpace::new(SpaceKind::Packing, d, k)?;
    let system = space.system();
    let blockers = system.blockers();
    let restarts = budget.max_candidates.div_ceil(params.moves_per_restart).max(1);
    let deadline = budget.deadline();
    let mut best_surviving = usize::MAX;
    let mut wave_start = 0;
    while wave_start < restarts {
        if deadline.is_some_and(|dl| Instant::now() > dl) {
            return Ok(HuntResult { cover: None, winning_restart: None, restarts: wave_start, best_surviving, timed_out: true });
        }
        let wave_end = (wave_start + params.wave).min(restarts);
        let results: Vec<(u64, RestartOutcome)> = (wave_start..wave_end)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(budget.seed, i));
                (i, run_restart(system, &blockers, t, params, &mut rng))
            })
            .collect();
        for (_, r) in &results {
            best_surviving = best_surviving.min(r.best);
        }
        if let Some((i, r)) = results.into_iter().find(|(_, r)| r.solution.is_some()) {
            let cover = space.cover_of(&r.solution.expect("checked"))?;
            return Ok(HuntResult {
                cover: Some(cover),
                winning_restart: Some(i),
                restarts: wave_end,
                best_surviving: 0,
                timed_out: false,
            });
        }
        wave_start = wave_end;
    }
    Ok(HuntResult { cover: None, winning_restart: None, restarts, best_surviving, timed_out: false })
}

struct RestartOutcome {
    solution: Option<Vec<usize>>,
    best: usize,
}

fn run_restart(
    system: &BlockingSystem,
    blockers: &[Vec<u32>],
    t: usize,
    params: &HuntParams,
    rng: &mut ChaCha8Rng,
) -> RestartOutcome {
    let n = system.element_count();
    let n_opts = system.option_count();
    let mut cols: Vec<usize> = (0..t).map(|_| rng.gen_range(0..n_opts)).collect();
    let mut cov = vec![0u32; n];
    for &o in &cols {
        for &e in system.blocked(o) {
            cov[e as usize] += 1;
        }
    }
    // Survivors with O(1) insert, remove and uniform sampling.
    let mut alive: Vec<u32> = Vec::new();
    let mut slot = vec![u32::MAX; n];
    for e in 0..n {
        if cov[e] == 0 {
            slot[e] = alive.len() as u32;
            alive.push(e as u32);
        }
    }
    let mut best = alive.len();
    let mut marks = vec![false; n];
    for _ in 0..params.moves_per_restart {
        if alive.is_empty() {
            return RestartOutcome { solution: Some(cols), best: 0 };
        }
        let target = alive[rng.gen_range(0..alive.len())] as usize;
        let options = &blockers[target];
        let incoming = options[rng.gen_range(0..options.len())] as usize;
        for &e in system.blocked(incoming) {
            marks[e as usize] = true;
        }
        let column = if rng.gen_bool(params.noise) {
            rng.gen_range(0..t)
        } else {
            let mut best_col = 0;
            let mut best_break = usize::MAX;
            for (j, &o) in cols.iter().enumerate() {
                let breaks = system
                    .blocked(o)
                    .iter()
                    .filter(|&&e| cov[e as usize] == 1 && !marks[e as usize])
                    .count();
                if breaks < best_break {
                    best_break = breaks;
                    best_col = j;
                }
            }
            best_col
        };
        for &e in system.blocked(incoming) {
            marks[e as usize] = false;
        }
        let outgoing = cols[column];
        cols[column] = incoming;
        for &e in system.blocked(outgoing) {
            let e = e as usize;
            cov[e] -= 1;
            if cov[e] == 0 {
                slot[e] = alive.len() as u32;
                alive.push(e as u32);
            }
        }
        for &e in system.blocked(incoming) {
            let e = e as usize;
            if cov[e] == 0 {
                let s = slot[e] as usize;
                let last = *alive.last().expect("e is alive");
                alive[s] = last;
                slot[last as usize] = s as u32;
                alive.pop();
                slot[e] = u32::MAX;
            }
            cov[e] += 1;
        }
        best = best.min(alive.len());
    }
    if alive.is_empty() {
        return RestartOutcome { solution: Some(cols), best: 0 };
    }
    RestartOutcome { solution: None, best }
}
