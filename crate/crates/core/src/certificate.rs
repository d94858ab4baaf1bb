//! Checkable claims about a cover or list assignment, and their verifier.
//!
//! The verifier rebuilds every constraint from the instance itself and uses
//! only permutations and the matching engine. Exhaustive claims run over
//! the smaller side: all packing matrices with first row the identity, or
//! all colourings.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cover::{CorrespondenceCover, ListAssignment};
use crate::error::{invalid, resource, Error, Result};
use crate::matching::left_perfect_matching;
use crate::perm::{all_permutations_with_limit, Permutation};
use crate::search::{
    decide_correspondence_colouring, decide_correspondence_packing, decide_list_colouring, decide_list_packing,
    ColouringWitness, ListColouringWitness, ListPackingOutcome, ListPackingWitness, PackingOutcome, PackingWitness,
    SearchBudget,
};

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    NoKPacking,
    PackingWitness,
    NoKColouring,
    ColouringWitness,
}

impl Claim {
    pub fn needs_witness(self) -> bool {
        matches!(self, Claim::PackingWitness | Claim::ColouringWitness)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instance {
    Cover(CorrespondenceCover),
    Assignment(ListAssignment),
}

impl Instance {
    /// `(d, t, k)`: sides and list size.
    pub fn shape(&self) -> (usize, usize, usize) {
        match self {
            Instance::Cover(c) => (c.d(), c.t(), c.k()),
            Instance::Assignment(l) => (l.a(), l.b(), l.k()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Packing(PackingWitness),
    Colouring(ColouringWitness),
    ListPacking(ListPackingWitness),
    ListColouring(ListColouringWitness),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub generator: String,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock
    /// for reproducible files.
    pub timestamp: u64,
    pub tool_version: String,
    /// SHA-256 of the compact JSON of the instance.
    pub instance_sha256: String,
}

impl Metadata {
    pub fn new(generator: impl Into<String>, seed: Option<u64>, budget: Option<u64>, instance: &Instance) -> Self {
        Self {
            generator: generator.into(),
            seed,
            budget,
            timestamp: current_timestamp(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            instance_sha256: instance_digest(instance),
        }
    }
}

fn current_timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn instance_digest(instance: &Instance) -> String {
    let json = serde_json::to_string(instance).expect("instances serialize");
    let mut out = String::with_capacity(64);
    for b in Sha256::digest(json.as_bytes()) {
        write!(out, "{b:02x}").expect("writing to a string");
    }
    out
}

/// Fields serialize in declaration order, so files diff cleanly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub version: u32,
    pub claim: Claim,
    pub instance: Instance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub metadata: Metadata,
}

impl Certificate {
    pub fn new(claim: Claim, instance: Instance, witness: Option<Witness>, metadata: Metadata) -> Result<Self> {
        let cert = Self { version: CERTIFICATE_VERSION, claim, instance, witness, metadata };
        cert.check_form()?;
        Ok(cert)
    }

    /// Structural checks: version, claim/witness agreement, witness kind.
    pub fn check_form(&self) -> Result<()> {
        if self.version != CERTIFICATE_VERSION {
            return Err(Error::Parse(format!(
                "unsupported certificate version {}, expected {CERTIFICATE_VERSION}",
                self.version
            )));
        }
        if self.claim.needs_witness() != self.witness.is_some() {
            return Err(invalid(format!("claim {:?} and witness presence disagree", self.claim)));
        }
        let fits = match (&self.claim, &self.instance, &self.witness) {
            (_, _, None) => true,
            (Claim::PackingWitness, Instance::Cover(_), Some(Witness::Packing(_)))
            | (Claim::PackingWitness, Instance::Assignment(_), Some(Witness::ListPacking(_)))
            | (Claim::ColouringWitness, Instance::Cover(_), Some(Witness::Colouring(_)))
            | (Claim::ColouringWitness, Instance::Assignment(_), Some(Witness::ListColouring(_))) => true,
            _ => false,
        };
        if !fits {
            return Err(invalid("witness kind does not fit the claim and instance"));
        }
        Ok(())
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates serialize");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cert: Certificate = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cert.check_form()?;
        Ok(cert)
    }
}

/// Runs the packing decider and records its answer.
pub fn certify_packing(instance: Instance, budget: &SearchBudget, generator: &str) -> Result<Certificate> {
    let (claim, witness) = match &instance {
        Instance::Cover(c) => match decide_correspondence_packing(c, budget)? {
            PackingOutcome::Packable(w) => (Claim::PackingWitness, Some(Witness::Packing(w))),
            PackingOutcome::NotPackable => (Claim::NoKPacking, None),
        },
        Instance::Assignment(l) => match decide_list_packing(l, budget)? {
            ListPackingOutcome::Packable(w) => (Claim::PackingWitness, Some(Witness::ListPacking(w))),
            ListPackingOutcome::NotPackable => (Claim::NoKPacking, None),
        },
    };
    let meta = Metadata::new(generator, Some(budget.seed), Some(budget.max_candidates), &instance);
    Certificate::new(claim, instance, witness, meta)
}

/// Runs the colouring decider and records its answer.
pub fn certify_colouring(instance: Instance, budget: &SearchBudget, generator: &str) -> Result<Certificate> {
    let witness = match &instance {
        Instance::Cover(c) => decide_correspondence_colouring(c, budget)?.map(Witness::Colouring),
        Instance::Assignment(l) => decide_list_colouring(l, budget)?.map(Witness::ListColouring),
    };
    let claim = if witness.is_some() { Claim::ColouringWitness } else { Claim::NoKColouring };
    let meta = Metadata::new(generator, Some(budget.seed), Some(budget.max_candidates), &instance);
    Certificate::new(claim, instance, witness, meta)
}

/// Largest exhaustive claims the verifier accepts to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyLimits {
    /// Bound on the smaller side.
    pub max_d: usize,
    pub max_k: usize,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        Self { max_d: 4, max_k: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// A monochromatic or clashing edge of a witness (1-based; `colouring`
    /// names the clashing colouring index for packings).
    Edge { u: usize, v: usize, colouring: Option<usize> },
    /// A packing or colouring the exhaustive claim denies: rows of 1-based
    /// list positions (of colours, for list assignments) of every vertex.
    Counterexample { u_rows: Vec<Vec<u32>>, v_rows: Vec<Vec<u32>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub reason: String,
    pub evidence: Option<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject(Rejection),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    fn reject(reason: impl Into<String>, evidence: Option<Evidence>) -> Self {
        Verdict::Reject(Rejection { reason: reason.into(), evidence })
    }
}

/// `clash[(i * t + j) * k + p]`: position of `L(v_j)` joined to position `p`
/// of `L(u_i)`, if any.
struct Clashes {
    d: usize,
    t: usize,
    k: usize,
    clash: Vec<Option<u8>>,
}

impl Clashes {
    fn of(instance: &Instance) -> Self {
        let (d, t, k) = instance.shape();
        let mut clash = Vec::with_capacity(d * t * k);
        match instance {
            Instance::Cover(c) => {
                for row in c.sigma() {
                    for m in row {
                        clash.extend((0..k).map(|p| Some(m.image(p) as u8)));
                    }
                }
            }
            Instance::Assignment(l) => {
                for lu in l.u_lists() {
                    for lv in l.v_lists() {
                        clash.extend(lu.iter().map(|c| lv.iter().position(|x| x == c).map(|q| q as u8)));
                    }
                }
            }
        }
        Self { d, t, k, clash }
    }

    fn get(&self, i: usize, j: usize, p: usize) -> Option<usize> {
        self.clash[(i * self.t + j) * self.k + p].map(usize::from)
    }

    fn transposed(&self) -> Self {
        let mut clash = vec![None; self.clash.len()];
        for i in 0..self.d {
            for j in 0..self.t {
                for p in 0..self.k {
                    if let Some(q) = self.get(i, j, p) {
                        clash[(j * self.d + i) * self.k + q] = Some(p as u8);
                    }
                }
            }
        }
        Self { d: self.t, t: self.d, k: self.k, clash }
    }
}

/// Checks a certificate. Errors mean the certificate could not be checked
/// (malformed, or beyond `limits`); a wrong claim is a [`Verdict::Reject`].
pub fn verify_certificate(cert: &Certificate, limits: &VerifyLimits) -> Result<Verdict> {
    cert.check_form()?;
    let digest = instance_digest(&cert.instance);
    if digest != cert.metadata.instance_sha256 {
        return Ok(Verdict::reject(
            format!("instance digest {digest} differs from the recorded {}", cert.metadata.instance_sha256),
            None,
        ));
    }
    let clashes = Clashes::of(&cert.instance);
    match (&cert.instance, &cert.witness) {
        (_, None) => verify_exhaustive(cert, &clashes, limits),
        (Instance::Cover(_), Some(Witness::Packing(w))) => Ok(check_packing(&clashes, &w.u_rows, &w.v_rows)),
        (Instance::Cover(_), Some(Witness::Colouring(w))) => Ok(check_colouring(&clashes, &w.u, &w.v)),
        (Instance::Assignment(l), Some(Witness::ListPacking(w))) => {
            let (Some(u), Some(v)) = (orderings(&w.u_colourings, l.u_lists()), orderings(&w.v_colourings, l.v_lists()))
            else {
                return Ok(Verdict::reject("a colouring row is not an ordering of its list", None));
            };
            Ok(check_packing(&clashes, &u, &v))
        }
        (Instance::Assignment(l), Some(Witness::ListColouring(w))) => {
            let (Some(u), Some(v)) = (positions(&w.u, l.u_lists()), positions(&w.v, l.v_lists())) else {
                return Ok(Verdict::reject("a colour is missing from its list", None));
            };
            Ok(check_colouring(&clashes, &u, &v))
        }
        _ => Err(invalid("witness kind does not fit the instance")),
    }
}

fn orderings(rows: &[Vec<u32>], lists: &[Vec<u32>]) -> Option<Vec<Permutation>> {
    if rows.len() != lists.len() {
        return None;
    }
    rows.iter()
        .zip(lists)
        .map(|(r, l)| {
            let pos: Option<Vec<usize>> = r.iter().map(|c| l.iter().position(|x| x == c)).collect();
            Permutation::from_images(pos?.into_iter().map(|p| p as u8).collect()).ok().filter(|p| p.k() == l.len())
        })
        .collect()
}

fn positions(colours: &[u32], lists: &[Vec<u32>]) -> Option<Vec<usize>> {
    if colours.len() != lists.len() {
        return None;
    }
    colours.iter().zip(lists).map(|(c, l)| l.iter().position(|x| x == c)).collect()
}

fn check_packing(cl: &Clashes, u: &[Permutation], v: &[Permutation]) -> Verdict {
    if u.len() != cl.d || v.len() != cl.t || u.iter().chain(v).any(|r| r.k() != cl.k) {
        return Verdict::reject("witness rows do not match the instance shape", None);
    }
    for (i, ru) in u.iter().enumerate() {
        for (j, rv) in v.iter().enumerate() {
            if let Some(x) = (0..cl.k).find(|&x| cl.get(i, j, ru.image(x)) == Some(rv.image(x))) {
                return Verdict::reject(
                    format!("colouring {} clashes on edge u{}-v{}", x + 1, i + 1, j + 1),
                    Some(Evidence::Edge { u: i + 1, v: j + 1, colouring: Some(x + 1) }),
                );
            }
        }
    }
    Verdict::Accept
}

fn check_colouring(cl: &Clashes, u: &[usize], v: &[usize]) -> Verdict {
    if u.len() != cl.d || v.len() != cl.t || u.iter().chain(v).any(|&p| p >= cl.k) {
        return Verdict::reject("colouring does not match the instance shape", None);
    }
    for (i, &pu) in u.iter().enumerate() {
        for (j, &pv) in v.iter().enumerate() {
            if cl.get(i, j, pu) == Some(pv) {
                return Verdict::reject(
                    format!("edge u{}-v{} is monochromatic", i + 1, j + 1),
                    Some(Evidence::Edge { u: i + 1, v: j + 1, colouring: None }),
                );
            }
        }
    }
    Verdict::Accept
}

fn verify_exhaustive(cert: &Certificate, clashes: &Clashes, limits: &VerifyLimits) -> Result<Verdict> {
    let (d, t, k) = cert.instance.shape();
    if d.min(t) > limits.max_d || k > limits.max_k {
        return Err(resource(format!(
            "exhaustive check of K_{{{d},{t}}} with k={k} is beyond the verifier limits (smaller side <= {}, k <= {})",
            limits.max_d, limits.max_k
        )));
    }
    let flip = t < d;
    let owned;
    let cl = if flip {
        owned = clashes.transposed();
        &owned
    } else {
        clashes
    };
    let found = match cert.claim {
        Claim::NoKPacking => surviving_packing(cl, limits)?,
        Claim::NoKColouring => surviving_colouring(cl),
        _ => return Err(invalid("witness claim without a witness")),
    };
    Ok(match found {
        None => Verdict::Accept,
        Some((small, large)) => {
            let (u_rows, v_rows) = if flip { (large, small) } else { (small, large) };
            let (u_rows, v_rows) = (to_labels(&cert.instance, u_rows, true), to_labels(&cert.instance, v_rows, false));
            Verdict::reject(
                "the claimed impossibility has a counterexample",
                Some(Evidence::Counterexample { u_rows, v_rows }),
            )
        }
    })
}

/// 1-based positions for covers, colours for list assignments.
fn to_labels(instance: &Instance, rows: Vec<Vec<usize>>, u_side: bool) -> Vec<Vec<u32>> {
    rows.into_iter()
        .enumerate()
        .map(|(n, r)| match instance {
            Instance::Cover(_) => r.iter().map(|&p| p as u32 + 1).collect(),
            Instance::Assignment(l) => {
                let list = if u_side { &l.u_lists()[n] } else { &l.v_lists()[n] };
                r.iter().map(|&p| list[p]).collect()
            }
        })
        .collect()
}

type Rows = Vec<Vec<usize>>;

/// First packing (row 0 of the smaller side the identity) in lexicographic
/// order of the remaining rows' ranks.
fn surviving_packing(cl: &Clashes, limits: &VerifyLimits) -> Result<Option<(Rows, Rows)>> {
    let perms: Vec<Vec<usize>> =
        all_permutations_with_limit(cl.k, limits.max_k)?.map(|p| p.one_line().iter().map(|x| x - 1).collect()).collect();
    let n = perms.len() as u64;
    let total = n.checked_pow(cl.d as u32 - 1).ok_or_else(|| resource("too many packing matrices"))?;
    let full: u64 = if cl.k == 64 { u64::MAX } else { (1 << cl.k) - 1 };
    Ok((0..total).into_par_iter().find_map_first(|mut index| {
        let mut rows = vec![(0..cl.k).collect::<Vec<usize>>(); cl.d];
        for row in rows.iter_mut().skip(1).rev() {
            row.clone_from(&perms[(index % n) as usize]);
            index /= n;
        }
        let mut v_rows = Vec::with_capacity(cl.t);
        for j in 0..cl.t {
            let adj: Vec<u64> = (0..cl.k)
                .map(|x| {
                    let taken = (0..cl.d).filter_map(|i| cl.get(i, j, rows[i][x])).fold(0u64, |m, q| m | 1 << q);
                    full & !taken
                })
                .collect();
            v_rows.push(left_perfect_matching(&adj)?);
        }
        Some((rows, v_rows))
    }))
}

/// First colouring of the smaller side (lexicographic) extending everywhere.
fn surviving_colouring(cl: &Clashes) -> Option<(Rows, Rows)> {
    let total = (cl.k as u64).pow(cl.d as u32);
    (0..total).into_par_iter().find_map_first(|mut index| {
        let mut u = vec![0usize; cl.d];
        for c in u.iter_mut().rev() {
            *c = (index % cl.k as u64) as usize;
            index /= cl.k as u64;
        }
        let mut v = Vec::with_capacity(cl.t);
        for j in 0..cl.t {
            let free = (0..cl.k).find(|&q| (0..cl.d).all(|i| cl.get(i, j, u[i]) != Some(q)))?;
            v.push(vec![free]);
        }
        Some((u.into_iter().map(|c| vec![c]).collect(), v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two_cert() -> Certificate {
        certify_packing(Instance::Cover(CorrespondenceCover::two_by_two_unpackable()), &SearchBudget::default(), "test").unwrap()
    }

    fn limits() -> VerifyLimits {
        VerifyLimits::default()
    }

    #[test]
    fn two_by_two_no_packing_accepted() {
        let c = two_by_two_cert();
        assert_eq!(c.claim, Claim::NoKPacking);
        assert!(verify_certificate(&c, &limits()).unwrap().is_accept());
    }

    #[test]
    fn repaired_two_by_two_rejected_with_counterexample() {
        let mut c = two_by_two_cert();
        let Instance::Cover(cover) = &c.instance else { panic!() };
        c.instance = Instance::Cover(cover.with_entry(1, 1, Permutation::identity(3).unwrap()).unwrap());
        c.metadata.instance_sha256 = instance_digest(&c.instance);
        match verify_certificate(&c, &limits()).unwrap() {
            Verdict::Reject(r) => assert!(matches!(r.evidence, Some(Evidence::Counterexample { .. }))),
            Verdict::Accept => panic!("packable cover accepted"),
        }
    }

    #[test]
    fn standard_cover_witness_accepted() {
        let c = certify_packing(
            Instance::Cover(CorrespondenceCover::standard(2, 2, 3).unwrap()),
            &SearchBudget::default(),
            "test",
        )
        .unwrap();
        assert_eq!(c.claim, Claim::PackingWitness);
        assert!(verify_certificate(&c, &limits()).unwrap().is_accept());
    }

    #[test]
    fn broken_witness_names_edge() {
        let mut c = certify_packing(
            Instance::Cover(CorrespondenceCover::standard(2, 2, 3).unwrap()),
            &SearchBudget::default(),
            "test",
        )
        .unwrap();
        let Some(Witness::Packing(w)) = &mut c.witness else { panic!() };
        w.v_rows[0] = w.u_rows[0].clone();
        let Verdict::Reject(r) = verify_certificate(&c, &limits()).unwrap() else { panic!() };
        assert_eq!(r.evidence, Some(Evidence::Edge { u: 1, v: 1, colouring: Some(1) }));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let c = two_by_two_cert();
        let s = c.to_json();
        let back = Certificate::from_json(&s).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), s);
        let keys: Vec<usize> =
            ["\"version\"", "\"claim\"", "\"instance\"", "\"metadata\""].iter().map(|k| s.find(k).unwrap()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn list_certificates() {
        let k39 = ListAssignment::new(
            vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]],
            (1..=3).flat_map(|a| (4..=6).map(move |b| vec![a, b, 7])).collect(),
        )
        .unwrap();
        let c = certify_packing(Instance::Assignment(k39.clone()), &SearchBudget::default(), "test").unwrap();
        assert_eq!(c.claim, Claim::NoKPacking);
        assert!(verify_certificate(&c, &limits()).unwrap().is_accept());
        let c = certify_colouring(Instance::Assignment(k39), &SearchBudget::default(), "test").unwrap();
        assert_eq!(c.claim, Claim::ColouringWitness);
        assert!(verify_certificate(&c, &limits()).unwrap().is_accept());
    }

    #[test]
    fn refuses_large_exhaustive_claims() {
        let cover = CorrespondenceCover::standard(5, 5, 3).unwrap();
        let instance = Instance::Cover(cover);
        let meta = Metadata::new("test", None, None, &instance);
        let c = Certificate::new(Claim::NoKPacking, instance, None, meta).unwrap();
        assert!(matches!(verify_certificate(&c, &limits()), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn transposed_exhaustion_matches() {
        // Taller than wide: the verifier exhausts the two-vertex side.
        let mut cover = CorrespondenceCover::two_by_two_unpackable();
        for _ in 0..3 {
            cover.push_column(cover.column(1)).unwrap();
        }
        let wide = cover.transpose();
        assert_eq!((wide.d(), wide.t()), (5, 2));
        let c = certify_packing(Instance::Cover(wide), &SearchBudget::default(), "test").unwrap();
        assert_eq!(c.claim, Claim::NoKPacking);
        assert!(verify_certificate(&c, &limits()).unwrap().is_accept());
    }

    #[test]
    fn mismatched_witness_kind_is_malformed() {
        let instance = Instance::Cover(CorrespondenceCover::two_by_two_unpackable());
        let meta = Metadata::new("test", None, None, &instance);
        let w = Witness::Colouring(ColouringWitness { u: vec![0, 0], v: vec![1, 1] });
        assert!(Certificate::new(Claim::PackingWitness, instance.clone(), Some(w), meta.clone()).is_err());
        assert!(Certificate::new(Claim::NoKPacking, instance, Some(Witness::Colouring(ColouringWitness { u: vec![], v: vec![] })), meta).is_err());
    }
}
