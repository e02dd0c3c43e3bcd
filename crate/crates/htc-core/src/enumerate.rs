//! Isomorph-free enumeration of unlabeled mixed graphs, classification
//! censuses, and random-graph simulation.
//!
//! Enumeration walks labeled edge subsets, deduplicates by canonical key and
//! re-materializes each class from its key, so the output representative and
//! order are deterministic regardless of scheduling. Acyclic enumeration
//! only draws directed edges above the diagonal: every acyclic graph has a
//! topologically relabeled copy there, and deduplication does the rest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{MixedGraph, SlotLayout};
use crate::htc::{classify, VerdictKind};

/// Which directed-part population a census ranges over.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GraphClass {
    Acyclic,
    /// Graphs whose directed part contains a cycle.
    Cyclic,
    All,
}

impl GraphClass {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphClass::Acyclic => "acyclic",
            GraphClass::Cyclic => "cyclic",
            GraphClass::All => "all",
        }
    }
}

impl std::str::FromStr for GraphClass {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "acyclic" => Ok(GraphClass::Acyclic),
            "cyclic" => Ok(GraphClass::Cyclic),
            "all" => Ok(GraphClass::All),
            other => Err(format!("unknown graph class '{other}'")),
        }
    }
}

const ENUMERATION_MAX_NODES: usize = 6;

/// Enumerates one representative per isomorphism class of mixed graphs on
/// `m` nodes with at most `max_edges` edges, in ascending canonical-key
/// order. `m` is capped at 6; beyond 5 the non-acyclic classes are out of
/// desk-scale reach anyway.
pub fn enumerate_unlabeled(
    m: usize,
    class: GraphClass,
    max_edges: usize,
) -> Result<Vec<MixedGraph>> {
    if m == 0 || m > ENUMERATION_MAX_NODES {
        return Err(Error::Capability(format!(
            "enumeration requires 1 <= m <= {ENUMERATION_MAX_NODES}, got {m}"
        )));
    }
    let keys = enumerate_keys(m, class, max_edges);
    keys.into_iter()
        .map(|key| MixedGraph::from_canonical_key(m, key))
        .collect()
}

fn enumerate_keys(m: usize, class: GraphClass, max_edges: usize) -> Vec<u128> {
    let layout = SlotLayout::new(m);
    let b_count = layout.bidirected_slot_count();
    // in acyclic mode directed edges only use the upper-triangular slots
    let directed_slots: Vec<usize> = match class {
        GraphClass::Acyclic => {
            let mut slots = Vec::new();
            for u in 0..m {
                for v in (u + 1)..m {
                    slots.push(layout.directed_slot(u, v));
                }
            }
            slots
        }
        _ => (0..layout.directed_slot_count()).collect(),
    };
    let bidirected_slots: Vec<usize> =
        (layout.directed_slot_count()..layout.directed_slot_count() + b_count).collect();

    // all directed-edge masks, grouped for the parallel sweep
    let mut d_masks: Vec<u128> = Vec::new();
    collect_subset_masks(&directed_slots, max_edges, &mut d_masks);
    let mut keys: Vec<u128> = d_masks
        .par_iter()
        .map(|&d_mask| {
            let d_edges = d_mask.count_ones() as usize;
            let mut local = Vec::new();
            let mut b_masks = Vec::new();
            collect_subset_masks(&bidirected_slots, max_edges - d_edges, &mut b_masks);
            for b_mask in b_masks {
                let g = MixedGraph::from_canonical_key(m, d_mask | b_mask)
                    .expect("slot masks decode to valid graphs");
                let keep = match class {
                    GraphClass::Acyclic => g.is_acyclic(),
                    GraphClass::Cyclic => !g.is_acyclic(),
                    GraphClass::All => true,
                };
                if keep {
                    local.push(g.canonical_key().expect("m is within the canonical cap"));
                }
            }
            local
        })
        .flatten()
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys
}

/// Pushes the slot-set masks of all subsets of `slots` with at most
/// `max_size` elements.
fn collect_subset_masks(slots: &[usize], max_size: usize, out: &mut Vec<u128>) {
    fn rec(slots: &[usize], from: usize, left: usize, acc: u128, out: &mut Vec<u128>) {
        out.push(acc);
        if left == 0 {
            return;
        }
        for ix in from..slots.len() {
            rec(slots, ix + 1, left - 1, acc | (1u128 << slots[ix]), out);
        }
    }
    rec(slots, 0, max_size, 0, out);
}

/// One census row: classification counts over the isomorphism classes with
/// at most `m choose 2` edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusRow {
    pub m: usize,
    pub mode: GraphClass,
    pub total: u64,
    pub htc_identifiable: u64,
    pub htc_infinite: u64,
    pub inconclusive: u64,
}

impl CensusRow {
    pub fn csv_header() -> &'static str {
        "m,mode,total,htc_identifiable,htc_infinite,inconclusive"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.m,
            self.mode.as_str(),
            self.total,
            self.htc_identifiable,
            self.htc_infinite,
            self.inconclusive
        )
    }
}

const CENSUS_MAX_NODES: usize = 5;

/// Classifies every enumerated class with at most `m choose 2` edges.
/// `m = 5` takes minutes in the non-acyclic modes and is intended as an
/// explicit opt-in.
pub fn tabulate(m: usize, mode: GraphClass) -> Result<CensusRow> {
    if m == 0 || m > CENSUS_MAX_NODES {
        return Err(Error::Capability(format!(
            "census requires 1 <= m <= {CENSUS_MAX_NODES}, got {m}"
        )));
    }
    let graphs = enumerate_unlabeled(m, mode, m * (m - 1) / 2)?;
    let verdicts: Vec<VerdictKind> = graphs.par_iter().map(|g| classify(g).kind()).collect();
    let count = |k: VerdictKind| verdicts.iter().filter(|&&v| v == k).count() as u64;
    Ok(CensusRow {
        m,
        mode,
        total: graphs.len() as u64,
        htc_identifiable: count(VerdictKind::Identifiable),
        htc_infinite: count(VerdictKind::InfiniteToOne),
        inconclusive: count(VerdictKind::Inconclusive),
    })
}

/// One simulation row: verdict fractions over random labeled graphs with a
/// fixed number of edges.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationRow {
    pub m: usize,
    pub n_edges: usize,
    pub samples: usize,
    pub acyclic_only: bool,
    pub seed: u64,
    pub frac_identifiable: f64,
    pub frac_infinite: f64,
    pub frac_inconclusive: f64,
}

impl SimulationRow {
    pub fn csv_header() -> &'static str {
        "m,n_edges,samples,seed,frac_id,frac_inf,frac_inc"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.m,
            self.n_edges,
            self.samples,
            self.seed,
            self.frac_identifiable,
            self.frac_infinite,
            self.frac_inconclusive
        )
    }
}

/// The labeled edge slots a simulation samples from: all `2 * (m choose 2)`
/// directed plus `(m choose 2)` bidirected slots, or upward directed slots
/// only in acyclic mode.
pub fn edge_slot_count(m: usize, acyclic_only: bool) -> usize {
    let pairs = m * (m - 1) / 2;
    if acyclic_only {
        2 * pairs
    } else {
        3 * pairs
    }
}

/// Draws one uniformly random labeled graph with exactly `n_edges` edges.
pub fn sample_graph(
    m: usize,
    n_edges: usize,
    acyclic_only: bool,
    rng: &mut impl Rng,
) -> Result<MixedGraph> {
    let mut slots: Vec<(bool, usize, usize)> = Vec::with_capacity(edge_slot_count(m, acyclic_only));
    for u in 1..=m {
        for v in (u + 1)..=m {
            slots.push((true, u, v));
            if !acyclic_only {
                slots.push((true, v, u));
            }
            slots.push((false, u, v));
        }
    }
    if n_edges > slots.len() {
        return Err(Error::Contract(format!(
            "{n_edges} edges requested but only {} slots exist",
            slots.len()
        )));
    }
    // partial Fisher-Yates: the first n_edges entries become the sample
    for i in 0..n_edges {
        let j = rng.random_range(i..slots.len());
        slots.swap(i, j);
    }
    slots.truncate(n_edges);
    MixedGraph::new(
        m,
        slots.iter().filter(|s| s.0).map(|&(_, u, v)| (u, v)),
        slots.iter().filter(|s| !s.0).map(|&(_, u, v)| (u, v)),
    )
}

/// Samples and classifies `samples` random labeled graphs. Sub-seeds derive
/// from the master seed by sample index (independent RNG streams), so the
/// result does not depend on worker scheduling.
pub fn simulate(
    m: usize,
    n_edges: usize,
    samples: usize,
    acyclic_only: bool,
    seed: u64,
) -> Result<SimulationRow> {
    if samples == 0 {
        return Err(Error::Contract("at least one sample is required".into()));
    }
    if n_edges > edge_slot_count(m, acyclic_only) {
        return Err(Error::Contract(format!(
            "{n_edges} edges do not fit in {} slots",
            edge_slot_count(m, acyclic_only)
        )));
    }
    let verdicts: Vec<VerdictKind> = (0..samples)
        .into_par_iter()
        .map(|ix| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ix as u64 + 1);
            let g = sample_graph(m, n_edges, acyclic_only, &mut rng)
                .expect("slot count was checked");
            classify(&g).kind()
        })
        .collect();
    let frac = |k: VerdictKind| {
        verdicts.iter().filter(|&&v| v == k).count() as f64 / samples as f64
    };
    Ok(SimulationRow {
        m,
        n_edges,
        samples,
        acyclic_only,
        seed,
        frac_identifiable: frac(VerdictKind::Identifiable),
        frac_infinite: frac(VerdictKind::InfiniteToOne),
        frac_inconclusive: frac(VerdictKind::Inconclusive),
    })
}
