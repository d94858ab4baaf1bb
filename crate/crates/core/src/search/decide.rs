//! Exact packability and colourability of concrete instances.
//!
//! `V` is independent, so once the colour vectors of `U` are fixed every
//! `v_j` can be extended on its own by a Hall matching. The deciders
//! enumerate `U` in lexicographic order (the first row fixed to the identity
//! by relabelling colourings) and prune a prefix as soon as some `v_j` has no
//! extension even against the rows chosen so far.

use std::time::Instant;

use rayon::prelude::*;

use super::{
    ColouringWitness, ListColouringWitness, ListPackingOutcome, ListPackingWitness, PackingOutcome,
    PackingWitness, SearchBudget,
};
use crate::cover::{CorrespondenceCover, ListAssignment, PartialMatchingCover};
use crate::error::{resource, Error, Result};
use crate::matching::{has_left_perfect_matching, left_perfect_matching};
use crate::packing::full_mask;
use crate::perm::{all_permutations, factorial_u64, Permutation};

const NONE: u8 = u8::MAX;

/// Matchings of a partial cover as flat lookup tables.
struct Edges {
    d: usize,
    t: usize,
    k: usize,
    map: Vec<u8>,
}

impl Edges {
    fn new(cover: &PartialMatchingCover) -> Self {
        let (d, t, k) = (cover.d(), cover.t(), cover.k());
        let mut map = vec![NONE; d * t * k];
        for i in 0..d {
            for j in 0..t {
                for p in 0..k {
                    if let Some(q) = cover.get(i, j).image(p) {
                        map[(i * t + j) * k + p] = q as u8;
                    }
                }
            }
        }
        Self { d, t, k, map }
    }

    #[inline]
    fn image(&self, i: usize, j: usize, p: u8) -> u8 {
        self.map[(i * self.t + j) * self.k + p as usize]
    }
}

fn timed_out(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() > d)
}

fn timeout_error() -> Error {
    resource("time budget exhausted before the search finished")
}

fn packing_cost(rows: usize, k: usize) -> u128 {
    (factorial_u64(k) as u128).saturating_pow(rows as u32 - 1)
}

pub fn decide_correspondence_packing(cover: &CorrespondenceCover, budget: &SearchBudget) -> Result<PackingOutcome> {
    decide_partial_packing(&cover.to_partial(), budget)
}

/// Packability of a cover whose matchings may be partial (unmatched list
/// positions never conflict).
pub fn decide_partial_packing(cover: &PartialMatchingCover, budget: &SearchBudget) -> Result<PackingOutcome> {
    let (d, t, k) = (cover.d(), cover.t(), cover.k());
    if packing_cost(t, k) < packing_cost(d, k) {
        let outcome = decide_oriented_packing(&cover.transpose(), budget)?;
        return Ok(match outcome {
            PackingOutcome::Packable(w) => PackingOutcome::Packable(w.transposed()),
            other => other,
        });
    }
    decide_oriented_packing(cover, budget)
}

fn decide_oriented_packing(cover: &PartialMatchingCover, budget: &SearchBudget) -> Result<PackingOutcome> {
    let edges = Edges::new(cover);
    let (d, t, k) = (edges.d, edges.t, edges.k);
    let cost = packing_cost(d, k);
    if cost > budget.max_candidates as u128 {
        return Err(resource(format!(
            "{cost} candidate packing matrices exceed the budget of {}",
            budget.max_candidates
        )));
    }
    let perms: Vec<Vec<u8>> = all_permutations(k)?.map(|p| p.images().to_vec()).collect();
    let deadline = budget.deadline();

    let mut excl = vec![0u64; t * k];
    add_row(&edges, 0, &perms[0], &mut excl);
    if !all_extend(&excl, t, k) {
        return Ok(PackingOutcome::NotPackable);
    }
    let found = if d == 1 {
        Some(Ok(vec![0]))
    } else {
        (0..perms.len()).into_par_iter().find_map_first(|r| {
            let mut excl = excl.clone();
            add_row(&edges, 1, &perms[r], &mut excl);
            if !all_extend(&excl, t, k) {
                return None;
            }
            let mut chosen = vec![0, r];
            match extend_rows(&edges, &perms, 2, &mut excl, &mut chosen, deadline) {
                Ok(true) => Some(Ok(chosen)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        })
    };
    let Some(chosen) = found.transpose()? else {
        return Ok(PackingOutcome::NotPackable);
    };
    let mut excl = vec![0u64; t * k];
    for (i, &r) in chosen.iter().enumerate() {
        add_row(&edges, i, &perms[r], &mut excl);
    }
    let full = full_mask(k);
    let v_rows = (0..t)
        .map(|j| {
            let adj: Vec<u64> = excl[j * k..(j + 1) * k].iter().map(|&e| full & !e).collect();
            let m = left_perfect_matching(&adj).ok_or_else(|| Error::Internal("extension vanished".into()))?;
            Ok(Permutation::from_images_unchecked(m.into_iter().map(|c| c as u8).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    let u_rows = chosen.iter().map(|&r| Permutation::from_images_unchecked(perms[r].clone())).collect();
    Ok(PackingOutcome::Packable(PackingWitness { u_rows, v_rows }))
}

fn add_row(edges: &Edges, i: usize, row: &[u8], excl: &mut [u64]) {
    let k = edges.k;
    for j in 0..edges.t {
        for (x, &p) in row.iter().enumerate() {
            let q = edges.image(i, j, p);
            if q != NONE {
                excl[j * k + x] |= 1 << q;
            }
        }
    }
}

fn all_extend(excl: &[u64], t: usize, k: usize) -> bool {
    let full = full_mask(k);
    let mut adj = [0u64; 64];
    (0..t).all(|j| {
        for x in 0..k {
            adj[x] = full & !excl[j * k + x];
        }
        has_left_perfect_matching(&adj[..k])
    })
}

fn extend_rows(
    edges: &Edges,
    perms: &[Vec<u8>],
    level: usize,
    excl: &mut Vec<u64>,
    chosen: &mut Vec<usize>,
    deadline: Option<Instant>,
) -> Result<bool> {
    if level == edges.d {
        return Ok(true);
    }
    if timed_out(deadline) {
        return Err(timeout_error());
    }
    let saved = excl.clone();
    for (r, row) in perms.iter().enumerate() {
        add_row(edges, level, row, excl);
        if all_extend(excl, edges.t, edges.k) {
            chosen.push(r);
            if extend_rows(edges, perms, level + 1, excl, chosen, deadline)? {
                return Ok(true);
            }
            chosen.pop();
        }
        excl.copy_from_slice(&saved);
    }
    Ok(false)
}

/// Packability of a list assignment, decided on the exact partial matchings
/// between lists (shared colours only); the witness is in original colours.
pub fn decide_list_packing(assignment: &ListAssignment, budget: &SearchBudget) -> Result<ListPackingOutcome> {
    let lc = assignment.to_correspondence();
    Ok(match decide_partial_packing(&lc.partial, budget)? {
        PackingOutcome::NotPackable => ListPackingOutcome::NotPackable,
        PackingOutcome::Packable(w) => {
            let colour = |rows: &[Permutation], lists: &[Vec<u32>]| -> Vec<Vec<u32>> {
                rows.iter()
                    .zip(lists)
                    .map(|(r, l)| (0..r.k()).map(|x| l[r.image(x)]).collect())
                    .collect()
            };
            ListPackingOutcome::Packable(ListPackingWitness {
                u_colourings: colour(&w.u_rows, &lc.u_colours),
                v_colourings: colour(&w.v_rows, &lc.v_colours),
            })
        }
    })
}

pub fn decide_correspondence_colouring(
    cover: &CorrespondenceCover,
    budget: &SearchBudget,
) -> Result<Option<ColouringWitness>> {
    decide_partial_colouring(&cover.to_partial(), budget)
}

pub fn decide_partial_colouring(
    cover: &PartialMatchingCover,
    budget: &SearchBudget,
) -> Result<Option<ColouringWitness>> {
    if cover.t() < cover.d() {
        return Ok(decide_oriented_colouring(&cover.transpose(), budget)?
            .map(|w| ColouringWitness { u: w.v, v: w.u }));
    }
    decide_oriented_colouring(cover, budget)
}

fn decide_oriented_colouring(cover: &PartialMatchingCover, budget: &SearchBudget) -> Result<Option<ColouringWitness>> {
    let edges = Edges::new(cover);
    let (d, t, k) = (edges.d, edges.t, edges.k);
    let cost = (k as u128).saturating_pow(d as u32);
    if cost > budget.max_candidates as u128 {
        return Err(resource(format!(
            "{cost} candidate colourings exceed the budget of {}",
            budget.max_candidates
        )));
    }
    let deadline = budget.deadline();
    let mut blocked = vec![0u64; t];
    let mut chosen = Vec::with_capacity(d);
    if !colour_rows(&edges, &mut blocked, &mut chosen, deadline)? {
        return Ok(None);
    }
    let full = full_mask(k);
    let v = blocked.iter().map(|&b| (full & !b).trailing_zeros() as usize).collect();
    Ok(Some(ColouringWitness { u: chosen, v }))
}

fn colour_rows(edges: &Edges, blocked: &mut [u64], chosen: &mut Vec<usize>, deadline: Option<Instant>) -> Result<bool> {
    let i = chosen.len();
    if i == edges.d {
        return Ok(true);
    }
    if timed_out(deadline) {
        return Err(timeout_error());
    }
    let full = full_mask(edges.k);
    let saved = blocked.to_vec();
    for c in 0..edges.k {
        let mut ok = true;
        for (j, b) in blocked.iter_mut().enumerate() {
            let q = edges.image(i, j, c as u8);
            if q != NONE {
                *b |= 1 << q;
                ok &= *b != full;
            }
        }
        if ok {
            chosen.push(c);
            if colour_rows(edges, blocked, chosen, deadline)? {
                return Ok(true);
            }
            chosen.pop();
        }
        blocked.copy_from_slice(&saved);
    }
    Ok(false)
}

pub fn decide_list_colouring(
    assignment: &ListAssignment,
    budget: &SearchBudget,
) -> Result<Option<ListColouringWitness>> {
    let lc = assignment.to_correspondence();
    Ok(decide_partial_colouring(&lc.partial, budget)?.map(|w| ListColouringWitness {
        u: w.u.iter().zip(&lc.u_colours).map(|(&p, l)| l[p]).collect(),
        v: w.v.iter().zip(&lc.v_colours).map(|(&p, l)| l[p]).collect(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> SearchBudget {
        SearchBudget::default()
    }

    #[test]
    fn two_by_two_is_not_packable() {
        let f = CorrespondenceCover::two_by_two_unpackable();
        assert_eq!(decide_correspondence_packing(&f, &budget()).unwrap(), PackingOutcome::NotPackable);
        let fixed = f.with_entry(1, 1, Permutation::identity(3).unwrap()).unwrap();
        let out = decide_correspondence_packing(&fixed, &budget()).unwrap();
        assert!(out.witness().unwrap().is_valid(&fixed));
    }

    #[test]
    fn standard_covers_pack() {
        // One colour per vertex cannot colour an edge.
        let single = CorrespondenceCover::standard(1, 3, 1).unwrap();
        assert_eq!(decide_correspondence_packing(&single, &budget()).unwrap(), PackingOutcome::NotPackable);
        for d in 2..=3 {
            for t in [1, 2, 5, 10] {
                let c = CorrespondenceCover::standard(d, t, 2 * d - 1).unwrap();
                let out = decide_correspondence_packing(&c, &budget()).unwrap();
                assert!(out.witness().unwrap().is_valid(&c), "d={d} t={t}");
            }
        }
        let c = CorrespondenceCover::standard(2, 2, 3).unwrap();
        let w = decide_correspondence_packing(&c, &budget()).unwrap().witness().unwrap().clone();
        assert!(w.u_rows[0].is_identity());
    }

    #[test]
    fn budget_is_a_resource_error() {
        let c = CorrespondenceCover::standard(4, 4, 6).unwrap();
        let b = SearchBudget::with_candidates(1000);
        assert!(matches!(decide_correspondence_packing(&c, &b), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn side_swap_keeps_witness_valid() {
        let f = CorrespondenceCover::two_by_two_unpackable();
        let wide = CorrespondenceCover::from_columns(vec![f.column(0), f.column(0), f.column(0)]).unwrap();
        let tall = wide.transpose();
        assert_eq!((tall.d(), tall.t()), (3, 2));
        let out = decide_correspondence_packing(&tall, &budget()).unwrap();
        assert!(out.witness().unwrap().is_valid(&tall));
    }

    #[test]
    fn colouring_examples() {
        let s = CorrespondenceCover::standard(3, 4, 2).unwrap();
        let w = decide_correspondence_colouring(&s, &budget()).unwrap().unwrap();
        assert!(w.check(&s).is_ok());
        let one = CorrespondenceCover::standard(1, 1, 1).unwrap();
        assert_eq!(decide_correspondence_colouring(&one, &budget()).unwrap(), None);
    }

    #[test]
    fn list_fixtures() {
        // Pairwise disjoint lists on U.
        let l = ListAssignment::new(
            vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]],
            vec![vec![1, 4, 7], vec![2, 5, 8], vec![3, 6, 9], vec![1, 2, 3]],
        )
        .unwrap();
        match decide_list_packing(&l, &budget()).unwrap() {
            ListPackingOutcome::Packable(w) => assert!(w.check(&l).is_ok()),
            ListPackingOutcome::NotPackable => panic!("expected a packing"),
        }
        let c = decide_list_colouring(&l, &budget()).unwrap().unwrap();
        assert!(c.check(&l).is_ok());
    }
}
