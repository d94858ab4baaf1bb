//! Exact chromatic-type numbers of small complete bipartite graphs.
//!
//! For each `k` from 1 upwards the question "is there a bad `k`-fold
//! instance on `K_{a,b}`" is a set cover: the configurations of the smaller
//! side are the elements, the possible lists or matchings of one vertex on
//! the larger side are the options, and a bad instance is a choice of at
//! most `max(a, b)` options blocking every configuration.
//!
//! List options are restricted to `k`-subsets of the colours on the smaller
//! side. A colour outside them never conflicts, so swapping it for an
//! unused inside colour can only block more.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::blocking::{list_extends, BlockingSystem, CoverSpace, SetCoverOutcome, SpaceKind};
use super::cases::{list_types, ListType};
use super::SearchBudget;
use crate::cover::{CorrespondenceCover, ListAssignment};
use crate::error::{invalid, resource, Error, Result};
use crate::packing::for_each_combination;
use crate::perm::{all_permutations, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiKind {
    /// Correspondence colouring.
    Colouring,
    /// Correspondence packing.
    Packing,
    ListColouring,
    ListPacking,
}

impl ChiKind {
    /// Short name used on the command line.
    pub fn code(self) -> &'static str {
        match self {
            ChiKind::Colouring => "c",
            ChiKind::Packing => "cstar",
            ChiKind::ListColouring => "l",
            ChiKind::ListPacking => "lstar",
        }
    }

    fn is_packing(self) -> bool {
        matches!(self, ChiKind::Packing | ChiKind::ListPacking)
    }

    /// Smallest `k` at which every instance is good for a side of `d`
    /// vertices: colourings always extend once `k > d`, packings once
    /// `k >= 2d`.
    pub fn automatic_from(self, d: usize) -> usize {
        if self.is_packing() {
            2 * d
        } else {
            d + 1
        }
    }
}

impl fmt::Display for ChiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ChiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c" => Ok(ChiKind::Colouring),
            "cstar" => Ok(ChiKind::Packing),
            "l" => Ok(ChiKind::ListColouring),
            "lstar" => Ok(ChiKind::ListPacking),
            _ => Err(invalid(format!("unknown parameter {s:?}; expected c, cstar, l or lstar"))),
        }
    }
}

/// A bad instance on `K_{a,b}` with the `a`-side as U.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BadInstance {
    Cover(CorrespondenceCover),
    Assignment(ListAssignment),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChiStep {
    pub k: usize,
    /// Every `k`-fold instance is good.
    pub good: bool,
    /// Decided by [`ChiKind::automatic_from`] without search.
    pub automatic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChiReport {
    pub kind: ChiKind,
    pub a: usize,
    pub b: usize,
    pub value: usize,
    pub steps: Vec<ChiStep>,
    /// A bad instance for `k = value - 1`, when `value > 1`.
    pub bad_instance: Option<BadInstance>,
}

/// Least `k` for which every `k`-fold instance of `kind` on `K_{a,b}` is
/// good. The budget's `max_candidates` caps the size of each blocking table
/// and `max_seconds` the whole computation.
pub fn chi_exact(kind: ChiKind, a: usize, b: usize, budget: &SearchBudget) -> Result<ChiReport> {
    if a == 0 || b == 0 {
        return Err(invalid("both sides need at least one vertex"));
    }
    let (d, t) = (a.min(b), a.max(b));
    let flip = a > b;
    let deadline = budget.deadline();
    let mut steps = Vec::new();
    let mut bad_instance = None;
    for k in 1.. {
        if k >= kind.automatic_from(d) {
            steps.push(ChiStep { k, good: true, automatic: true });
            return Ok(ChiReport { kind, a, b, value: k, steps, bad_instance });
        }
        let bad = match kind {
            ChiKind::Colouring | ChiKind::Packing => {
                let space_kind = if kind == ChiKind::Packing { SpaceKind::Packing } else { SpaceKind::Colouring };
                let space = CoverSpace::with_limit(space_kind, d, k, budget.max_candidates)?;
                match space.system().min_cover(t, deadline)? {
                    SetCoverOutcome::NoCover => None,
                    SetCoverOutcome::Covered(opts) => {
                        let cover = space.cover_of(&padded(opts, t))?;
                        Some(BadInstance::Cover(if flip { cover.transpose() } else { cover }))
                    }
                }
            }
            ChiKind::ListColouring | ChiKind::ListPacking => {
                let mut found = None;
                for ty in list_types(d, k, false)? {
                    if let Some(v_lists) = bad_lists(kind, &ty, t, budget, deadline)? {
                        let assignment = ListAssignment::new(ty.lists(), v_lists)?;
                        found = Some(BadInstance::Assignment(if flip { assignment.transpose() } else { assignment }));
                        break;
                    }
                }
                found
            }
        };
        let good = bad.is_none();
        steps.push(ChiStep { k, good, automatic: false });
        if good {
            return Ok(ChiReport { kind, a, b, value: k, steps, bad_instance });
        }
        bad_instance = bad;
    }
    unreachable!("the automatic bound ends the loop")
}

fn padded(mut opts: Vec<usize>, t: usize) -> Vec<usize> {
    let last = *opts.last().expect("a cover of a nonempty set is nonempty");
    opts.resize(t, last);
    opts
}

/// V-side lists (at most `t`, padded to `t`) blocking every configuration of
/// the lists of `ty`, if any.
fn bad_lists(
    kind: ChiKind,
    ty: &ListType,
    t: usize,
    budget: &SearchBudget,
    deadline: Option<std::time::Instant>,
) -> Result<Option<Vec<Vec<u32>>>> {
    let u_lists = ty.lists();
    let k = u_lists[0].len();
    let n_colours = ty.colour_count();
    let mut options: Vec<Vec<u32>> = Vec::new();
    for_each_combination(n_colours, k, |mask| {
        options.push((0..n_colours as u32).filter(|&c| mask >> c & 1 == 1).map(|c| c + 1).collect());
    });
    let elements = configurations(kind, &u_lists)?;
    let cost = elements.len() as u128 * options.len() as u128;
    if cost > budget.max_candidates as u128 {
        return Err(resource(format!("{cost} list checks exceed the budget of {}", budget.max_candidates)));
    }
    let blocked: Vec<Vec<u32>> = options
        .par_iter()
        .map(|list| {
            elements
                .iter()
                .enumerate()
                .filter(|(_, rows)| blocks(kind, rows, list))
                .map(|(e, _)| e as u32)
                .collect()
        })
        .collect();
    let system = BlockingSystem::new(elements.len(), blocked)?;
    Ok(match system.min_cover(t, deadline)? {
        SetCoverOutcome::NoCover => None,
        SetCoverOutcome::Covered(opts) => Some(padded(opts, t).into_iter().map(|o| options[o].clone()).collect()),
    })
}

/// Colour rows of every configuration: one-entry rows for colourings,
/// orderings of each list (the first fixed) for packings.
fn configurations(kind: ChiKind, u_lists: &[Vec<u32>]) -> Result<Vec<Vec<Vec<u32>>>> {
    let k = u_lists[0].len();
    let mut out: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for (i, list) in u_lists.iter().enumerate() {
        let choices: Vec<Vec<u32>> = if kind == ChiKind::ListColouring {
            list.iter().map(|&c| vec![c]).collect()
        } else if i == 0 {
            vec![list.clone()]
        } else {
            all_permutations(k)?.map(|p: Permutation| (0..k).map(|x| list[p.image(x)]).collect()).collect()
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut rows = prefix.clone();
                    rows.push(c.clone());
                    rows
                })
            })
            .collect();
    }
    Ok(out)
}

fn blocks(kind: ChiKind, rows: &[Vec<u32>], list: &[u32]) -> bool {
    if kind == ChiKind::ListColouring {
        list.iter().all(|c| rows.iter().any(|r| r[0] == *c))
    } else {
        let rows: Vec<&[u32]> = rows.iter().map(Vec::as_slice).collect();
        !list_extends(&rows, list)
    }
}

pub fn chi_c_exact(a: usize, b: usize, budget: &SearchBudget) -> Result<usize> {
    chi_exact(ChiKind::Colouring, a, b, budget).map(|r| r.value)
}

pub fn chi_c_star_exact(a: usize, b: usize, budget: &SearchBudget) -> Result<usize> {
    chi_exact(ChiKind::Packing, a, b, budget).map(|r| r.value)
}

pub fn chi_l_exact(a: usize, b: usize, budget: &SearchBudget) -> Result<usize> {
    chi_exact(ChiKind::ListColouring, a, b, budget).map(|r| r.value)
}

pub fn chi_l_star_exact(a: usize, b: usize, budget: &SearchBudget) -> Result<usize> {
    chi_exact(ChiKind::ListPacking, a, b, budget).map(|r| r.value)
}
