//! Synthetic instances shaped like assembly graphs of related bacterial
//! strains: per genome window, an edge-centric de Bruijn graph weighted by
//! strain abundances, unitig-compacted, optionally Poisson-perturbed, with
//! simulated reads as subset constraints.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use thiserror::Error;

use crate::graph::{compact_unitigs_keeping, condense, normalize_sources_sinks, EdgeId, Graph, GraphError, VertexId};

const BASES: [u8; 4] = *b"ACGT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    None,
    Poisson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Strains derived from one base genome.
    pub genome_count: usize,
    pub genome_length: usize,
    pub window_length: usize,
    pub kmer_size: usize,
    /// Per-base substitution rate applied independently to each strain.
    pub snp_rate: f64,
    /// Copies of a 3k-long substring placed inside every window of the base genome.
    pub repeats_per_window: usize,
    /// Abundance = ceil(scale * LogNormal(mu, sigma)).
    pub abundance_mu: f64,
    pub abundance_sigma: f64,
    pub abundance_scale: f64,
    pub noise: Noise,
    pub reads_per_window: usize,
    pub read_length: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            genome_count: 5,
            genome_length: 3000,
            window_length: 1000,
            kmer_size: 15,
            snp_rate: 0.002,
            repeats_per_window: 1,
            abundance_mu: 1.0,
            abundance_sigma: 1.0,
            abundance_scale: 10.0,
            noise: Noise::None,
            reads_per_window: 5,
            read_length: 1000,
            seed: 1,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("window length {window} is shorter than k = {k}")]
    WindowTooShort { window: usize, k: usize },
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub graph: Graph,
    /// Edge sets of simulated reads.
    pub subsets: Vec<Vec<EdgeId>>,
    /// Ground-truth walks of the strains with their summed abundances.
    pub truth: Vec<(Vec<VertexId>, u64)>,
    /// Edge weights before noise.
    pub exact_weights: Vec<u64>,
}

impl GeneratorConfig {
    fn validate(&self) -> Result<(), GenError> {
        if self.kmer_size < 2 {
            return Err(GenError::InvalidConfig("k must be at least 2".into()));
        }
        if self.window_length < self.kmer_size {
            return Err(GenError::WindowTooShort { window: self.window_length, k: self.kmer_size });
        }
        if self.genome_count == 0 || self.genome_length == 0 {
            return Err(GenError::InvalidConfig("genome count and length must be positive".into()));
        }
        Ok(())
    }
}

/// Strain sequences and abundances: one random base genome with repeats,
/// mutated independently per strain.
pub fn synthetic_genomes(cfg: &GeneratorConfig) -> Result<Vec<(Vec<u8>, u64)>, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut base: Vec<u8> = (0..cfg.genome_length).map(|_| BASES[rng.random_range(0..4)]).collect();
    let rep = 3 * cfg.kmer_size;
    let mut start = 0;
    while start < base.len() {
        let end = (start + cfg.window_length).min(base.len());
        if end - start >= 2 * rep {
            for _ in 0..cfg.repeats_per_window {
                let from = rng.random_range(start..=end - rep);
                let to = rng.random_range(start..=end - rep);
                let chunk = base[from..from + rep].to_vec();
                base[to..to + rep].copy_from_slice(&chunk);
            }
        }
        start = end;
    }
    let lognormal = LogNormal::new(cfg.abundance_mu, cfg.abundance_sigma)
        .map_err(|e| GenError::InvalidConfig(format!("abundance distribution: {e}")))?;
    let mut out = Vec::with_capacity(cfg.genome_count);
    for _ in 0..cfg.genome_count {
        let mut g = base.clone();
        for b in g.iter_mut() {
            if rng.random_bool(cfg.snp_rate.clamp(0.0, 1.0)) {
                let choices: Vec<u8> = BASES.iter().copied().filter(|&c| c != *b).collect();
                *b = choices[rng.random_range(0..3)];
            }
        }
        let abundance = (cfg.abundance_scale * lognormal.sample(&mut rng)).ceil().max(1.0) as u64;
        out.push((g, abundance));
    }
    Ok(out)
}

/// Perturbs every edge weight `f` by drawing from Poisson(f); zeros stay zero.
pub fn poisson_perturb<R: Rng>(weights: &[u64], rng: &mut R) -> Vec<u64> {
    weights
        .iter()
        .map(|&f| if f == 0 { 0 } else { Poisson::new(f as f64).expect("positive rate").sample(rng) as u64 })
        .collect()
}

/// One instance per window (kept only if its graph has a cycle).
pub fn generate_instances(cfg: &GeneratorConfig, genomes: &[(Vec<u8>, u64)]) -> Result<Vec<Instance>, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_ba5e);
    let longest = genomes.iter().map(|g| g.0.len()).max().unwrap_or(0);
    let mut out = Vec::new();
    let mut start = 0;
    let mut window = 0;
    while start < longest {
        let end = start + cfg.window_length;
        if let Some(inst) = window_instance(cfg, genomes, start, end, window, &mut rng)? {
            out.push(inst);
        }
        start = end;
        window += 1;
    }
    Ok(out)
}

fn window_instance(
    cfg: &GeneratorConfig,
    genomes: &[(Vec<u8>, u64)],
    start: usize,
    end: usize,
    window: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Instance>, GenError> {
    let k = cfg.kmer_size;
    let mut weights: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut walks: Vec<(Vec<String>, u64)> = Vec::new();
    for (seq, abundance) in genomes {
        let seg = &seq[start.min(seq.len())..end.min(seq.len())];
        if seg.len() < k {
            continue;
        }
        let nodes = node_walk(seg, k);
        for p in nodes.windows(2) {
            *weights.entry((p[0].clone(), p[1].clone())).or_default() += abundance;
        }
        walks.push((nodes, *abundance));
    }
    if walks.is_empty() {
        return Ok(None);
    }
    let vertices: BTreeSet<String> = weights.keys().flat_map(|(u, v)| [u.clone(), v.clone()]).collect();
    let vertices: Vec<String> = vertices.into_iter().collect();
    let edges: Vec<(String, String, u64)> = weights.iter().map(|((u, v), &w)| (u.clone(), v.clone(), w)).collect();
    let starts: Vec<String> = walks.iter().map(|w| w.0[0].clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let ends: Vec<String> =
        walks.iter().map(|w| w.0.last().unwrap().clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let (dbg, _) = normalize_sources_sinks(&vertices, &edges, &starts, &ends)?;
    let keep: BTreeSet<VertexId> = starts.iter().chain(&ends).map(|name| dbg.vertex(name).unwrap()).collect();
    let comp = compact_unitigs_keeping(&dbg, |v| keep.contains(&v));
    let g = comp.graph;
    if !condense(&g).has_cycle() {
        return Ok(None);
    }

    // Strain walks in compacted vertex ids: kept vertices survive by name.
    let to_compact = |names: &[String]| -> Vec<VertexId> {
        let mut w = vec![g.source()];
        w.extend(names.iter().filter_map(|n| g.vertex(n)));
        w.push(g.sink());
        w
    };
    let mut truth: Vec<(Vec<VertexId>, u64)> = Vec::new();
    for (names, a) in &walks {
        let w = to_compact(names);
        match truth.iter_mut().find(|t| t.0 == w) {
            Some(t) => t.1 += a,
            None => truth.push((w, *a)),
        }
    }

    let mut subsets = Vec::new();
    for _ in 0..cfg.reads_per_window {
        let (seq, _) = &genomes[rng.random_range(0..genomes.len())];
        let seg_end = end.min(seq.len());
        if seg_end < start + k {
            continue;
        }
        let from = rng.random_range(start..=seg_end - k);
        let to = (from + cfg.read_length).min(seg_end);
        if to - from < k {
            continue;
        }
        let nodes = node_walk(&seq[from..to], k);
        let mut set = BTreeSet::new();
        for p in nodes.windows(2) {
            let e = dbg.find_edge(dbg.vertex(&p[0]).unwrap(), dbg.vertex(&p[1]).unwrap()).unwrap();
            set.insert(comp.edge_map[e]);
        }
        if !set.is_empty() {
            subsets.push(set.into_iter().collect());
        }
    }

    let exact_weights = g.weights().to_vec();
    let graph = match cfg.noise {
        Noise::None => g,
        Noise::Poisson => {
            let noisy = poisson_perturb(&exact_weights, rng);
            g.with_weights(noisy)
        }
    };
    Ok(Some(Instance { name: format!("w{window}"), graph, subsets, truth, exact_weights }))
}

/// (k-1)-mers visited by the k-mers of `seq`, in order.
fn node_walk(seq: &[u8], k: usize) -> Vec<String> {
    (0..=seq.len() - (k - 1)).map(|i| String::from_utf8_lossy(&seq[i..i + k - 1]).into_owned()).collect()
}

/// Convenience: genomes from `cfg` then their instances.
pub fn generate(cfg: &GeneratorConfig) -> Result<Vec<Instance>, GenError> {
    let genomes = synthetic_genomes(cfg)?;
    generate_instances(cfg, &genomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::edge_counts;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            genome_count: 3,
            genome_length: 1200,
            window_length: 300,
            kmer_size: 11,
            snp_rate: 0.004,
            ..Default::default()
        }
    }

    #[test]
    fn truth_is_a_decomposition() {
        let insts = generate(&small()).unwrap();
        assert!(!insts.is_empty());
        for inst in &insts {
            let g = &inst.graph;
            let mut sum = vec![0u64; g.m()];
            for (walk, w) in &inst.truth {
                for (e, c) in edge_counts(g, walk).into_iter().enumerate() {
                    sum[e] += c * w;
                }
            }
            for e in 0..g.m() {
                if !g.is_auxiliary(e) {
                    assert_eq!(sum[e], g.weight(e), "{} edge {}", inst.name, g.edge_label(e));
                }
            }
            assert!(condense(g).has_cycle());
            for s in &inst.subsets {
                let covered = inst.truth.iter().any(|(walk, _)| {
                    let c = edge_counts(g, walk);
                    s.iter().all(|&e| c[e] > 0)
                });
                assert!(covered);
            }
        }
    }

    #[test]
    fn identical_strains_sum() {
        let cfg = GeneratorConfig { kmer_size: 5, window_length: 40, reads_per_window: 0, ..small() };
        let seq = b"ACGTTGCAAGCTTAGGCATCCGATTACAGGCTAACGTTGA".to_vec();
        let mut cyc = seq.clone();
        cyc[30..35].copy_from_slice(&seq[10..15]);
        let insts = generate_instances(&cfg, &[(cyc.clone(), 3), (cyc, 7)]).unwrap();
        assert_eq!(insts.len(), 1);
        assert_eq!(insts[0].truth.len(), 1);
        assert_eq!(insts[0].truth[0].1, 10);
    }

    #[test]
    fn deterministic() {
        let a: Vec<String> = generate(&small()).unwrap().iter().map(|i| i.graph.to_text()).collect();
        let b: Vec<String> = generate(&small()).unwrap().iter().map(|i| i.graph.to_text()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn poisson_keeps_zeros_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 4000;
        let mut total = 0u64;
        for _ in 0..draws {
            let w = poisson_perturb(&[0, 20], &mut rng);
            assert_eq!(w[0], 0);
            total += w[1];
        }
        let mean = total as f64 / draws as f64;
        let sigma = (20.0f64 / draws as f64).sqrt();
        assert!((mean - 20.0).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn short_window_rejected() {
        let cfg = GeneratorConfig { window_length: 10, kmer_size: 15, ..Default::default() };
        assert_eq!(generate(&cfg).unwrap_err(), GenError::WindowTooShort { window: 10, k: 15 });
    }
}
