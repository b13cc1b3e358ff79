//! Reference partitioners: exhaustive search for tiny instances, the random
//! baseline, and a greedy overlap heuristic.

use rand::seq::SliceRandom;

use crate::capkmeans::{make_capacities, Partition};
use crate::dataset::Dataset;
use crate::{Error, Result};

/// Upper limit on the number of set partitions `brute_force_optimal` visits.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Number of distinct set partitions of `n` items into blocks with the given
/// sizes (blocks of equal size are interchangeable).
pub fn partition_count(capacities: &[usize]) -> f64 {
    let n: usize = capacities.iter().sum();
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    let mut ln = ln_fact(n);
    for &s in capacities {
        ln -= ln_fact(s);
    }
    let mut sizes = capacities.to_vec();
    sizes.sort_unstable();
    let mut i = 0;
    while i < sizes.len() {
        let j = sizes[i..].iter().take_while(|&&s| s == sizes[i]).count();
        ln -= ln_fact(j);
        i += j;
    }
    ln.exp().round()
}

struct Search<'a> {
    bits: Vec<Vec<u64>>,
    words: usize,
    capacities: &'a [usize],
    sizes: Vec<(usize, usize)>,
    used: Vec<bool>,
    blocks: Vec<Vec<usize>>,
    cost: u64,
    best: Option<(u64, Vec<usize>)>,
}

impl Search<'_> {
    fn union_size(&self, block: &[usize]) -> u64 {
        (0..self.words)
            .map(|w| {
                block
                    .iter()
                    .fold(0u64, |acc, &i| acc | self.bits[i][w])
                    .count_ones() as u64
            })
            .sum()
    }

    fn labels(&self) -> Vec<usize> {
        let n = self.used.len();
        let mut taken = vec![false; self.capacities.len()];
        let mut assignment = vec![0; n];
        // blocks are generated in order of their smallest member
        for block in &self.blocks {
            let b = (0..self.capacities.len())
                .find(|&b| !taken[b] && self.capacities[b] == block.len())
                .expect("block sizes come from the capacities");
            taken[b] = true;
            for &i in block {
                assignment[i] = b;
            }
        }
        assignment
    }

    fn run(&mut self) {
        if let Some((best, _)) = &self.best {
            if self.cost > *best {
                return;
            }
        }
        let Some(first) = self.used.iter().position(|&u| !u) else {
            let labels = self.labels();
            let better = match &self.best {
                None => true,
                Some((c, a)) => self.cost < *c || (self.cost == *c && labels < *a),
            };
            if better {
                self.best = Some((self.cost, labels));
            }
            return;
        };
        self.used[first] = true;
        for si in 0..self.sizes.len() {
            let (size, count) = self.sizes[si];
            if count == 0 {
                continue;
            }
            self.sizes[si].1 -= 1;
            let mut block = vec![first];
            self.choose(first + 1, size - 1, &mut block);
            self.sizes[si].1 += 1;
        }
        self.used[first] = false;
    }

    fn choose(&mut self, from: usize, need: usize, block: &mut Vec<usize>) {
        if need == 0 {
            let c = self.union_size(block);
            self.cost += c;
            self.blocks.push(block.clone());
            self.run();
            self.blocks.pop();
            self.cost -= c;
            return;
        }
        let n = self.used.len();
        for i in from..n {
            if self.used[i] {
                continue;
            }
            self.used[i] = true;
            block.push(i);
            self.choose(i + 1, need - 1, block);
            block.pop();
            self.used[i] = false;
        }
    }
}

/// Exhaustive minimizer of the objective over all partitions with
/// `make_capacities(n, k)` batch sizes. Ties go to the lexicographically
/// smallest assignment vector.
pub fn brute_force_optimal(dataset: &Dataset, k: usize) -> Result<(Partition, u64)> {
    let n = dataset.len();
    let capacities = make_capacities(n, k)?;
    let count = partition_count(&capacities);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let m = dataset.num_descriptions();
    let words = m.div_ceil(64);
    let bits = dataset
        .samples()
        .iter()
        .map(|s| {
            let mut b = vec![0u64; words];
            for &t in &s.descriptions {
                b[t as usize / 64] |= 1 << (t % 64);
            }
            b
        })
        .collect();
    let mut sizes: Vec<(usize, usize)> = Vec::new();
    let mut sorted = capacities.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    for s in sorted {
        match sizes.last_mut() {
            Some((size, c)) if *size == s => *c += 1,
            _ => sizes.push((s, 1)),
        }
    }
    let mut search = Search {
        bits,
        words,
        capacities: &capacities,
        sizes,
        used: vec![false; n],
        blocks: Vec::with_capacity(k),
        cost: 0,
        best: None,
    };
    search.run();
    let (cost, assignment) = search.best.expect("at least one partition exists");
    Ok((Partition::new(assignment, capacities)?, cost))
}

/// Uniformly random permutation chunked into `make_capacities(n, k)` batches.
pub fn random_partition(n: usize, k: usize, seed: u64) -> Result<Partition> {
    let capacities = make_capacities(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut crate::seeded_rng(seed, crate::streams::RANDOM_PARTITION));
    let mut assignment = vec![0; n];
    let mut pos = 0;
    for (b, &c) in capacities.iter().enumerate() {
        for &i in &order[pos..pos + c] {
            assignment[i] = b;
        }
        pos += c;
    }
    Partition::new(assignment, capacities)
}

/// Greedy heuristic: samples in descending set size go to the non-full batch
/// whose current union overlaps them most; ties prefer the batch with more
/// free room, then the lower index.
pub fn greedy_partition(dataset: &Dataset, k: usize) -> Result<Partition> {
    let n = dataset.len();
    let capacities = make_capacities(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(dataset.descriptions(i).len()));

    // holders[t]: batches whose union already contains t
    let mut holders: Vec<Vec<u32>> = vec![Vec::new(); dataset.num_descriptions()];
    let mut load = vec![0usize; k];
    let mut overlap = vec![0usize; k];
    let mut assignment = vec![0; n];
    for i in order {
        let set = dataset.descriptions(i);
        for &t in set {
            for &b in &holders[t as usize] {
                overlap[b as usize] += 1;
            }
        }
        let best = (0..k)
            .filter(|&b| load[b] < capacities[b])
            .max_by(|&a, &b| {
                overlap[a]
                    .cmp(&overlap[b])
                    .then((capacities[a] - load[a]).cmp(&(capacities[b] - load[b])))
                    .then(b.cmp(&a))
            })
            .expect("capacities sum to n");
        for &t in set {
            for &b in &holders[t as usize] {
                overlap[b as usize] = 0;
            }
        }
        for &t in set {
            let h = &mut holders[t as usize];
            if !h.contains(&(best as u32)) {
                h.push(best as u32);
            }
        }
        load[best] += 1;
        assignment[i] = best;
    }
    Partition::new(assignment, capacities)
}
