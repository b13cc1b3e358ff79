//! Samples annotated with knowledge-description sets.
//!
//! Description IDs are remapped to a dense `0..M` range on ingestion so the
//! rest of the crate can index arrays by description. The original IDs are
//! kept and written back out by [`write_dataset`].

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::capkmeans::Partition;
use crate::{Error, Result};

/// Dense 0-based description index.
pub type DescriptionId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    /// Position in the dataset.
    pub sample_id: usize,
    /// Identifier as it appeared in the source file.
    pub source_id: u64,
    /// Sorted, duplicate-free.
    pub descriptions: Vec<DescriptionId>,
    pub label: Option<String>,
    pub text: Option<String>,
}

/// Immutable collection of samples with dense description IDs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    samples: Vec<Sample>,
    /// `description_ids[dense]` is the original ID.
    description_ids: Vec<u64>,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: i64,
    descriptions: Vec<i64>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    text: Option<String>,
}

#[derive(Debug, Serialize)]
struct OutRecord<'a> {
    id: u64,
    descriptions: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<&'a str>,
}

/// A sample before description remapping.
#[derive(Debug, Clone, Default)]
pub struct RawSample {
    pub source_id: u64,
    pub descriptions: Vec<u64>,
    pub label: Option<String>,
    pub text: Option<String>,
}

impl Dataset {
    /// Builds a dataset from raw samples, remapping description IDs to a dense
    /// range ordered by original ID.
    pub fn from_raw(raw: Vec<RawSample>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(raw.len());
        for r in &raw {
            if !seen.insert(r.source_id) {
                return Err(Error::DuplicateSampleId(r.source_id));
            }
        }
        let mut originals: Vec<u64> = raw
            .iter()
            .flat_map(|r| r.descriptions.iter().copied())
            .collect();
        originals.sort_unstable();
        originals.dedup();
        if originals.len() > DescriptionId::MAX as usize {
            return Err(Error::InvalidArgument(
                "too many distinct descriptions".into(),
            ));
        }
        let dense: BTreeMap<u64, DescriptionId> = originals
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i as DescriptionId))
            .collect();
        let samples = raw
            .into_iter()
            .enumerate()
            .map(|(pos, r)| {
                let mut descriptions: Vec<DescriptionId> =
                    r.descriptions.iter().map(|d| dense[d]).collect();
                descriptions.sort_unstable();
                descriptions.dedup();
                Sample {
                    sample_id: pos,
                    source_id: r.source_id,
                    descriptions,
                    label: r.label,
                    text: r.text,
                }
            })
            .collect();
        Ok(Dataset {
            samples,
            description_ids: originals,
        })
    }

    /// Convenience constructor: sample `i` gets source ID `i` and the given set.
    pub fn from_sets<I, S>(sets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = u64>,
    {
        let raw = sets
            .into_iter()
            .enumerate()
            .map(|(i, s)| RawSample {
                source_id: i as u64,
                descriptions: s.into_iter().collect(),
                ..RawSample::default()
            })
            .collect();
        Self::from_raw(raw).expect("sequential sample ids are unique")
    }

    /// Dataset whose description IDs are already dense; `num_descriptions`
    /// must bound every ID.
    fn from_dense(sets: Vec<Vec<DescriptionId>>, num_descriptions: usize) -> Self {
        let samples = sets
            .into_iter()
            .enumerate()
            .map(|(i, mut descriptions)| {
                descriptions.sort_unstable();
                descriptions.dedup();
                debug_assert!(descriptions
                    .iter()
                    .all(|&d| (d as usize) < num_descriptions));
                Sample {
                    sample_id: i,
                    source_id: i as u64,
                    descriptions,
                    label: None,
                    text: None,
                }
            })
            .collect();
        Dataset {
            samples,
            description_ids: (0..num_descriptions as u64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn descriptions(&self, sample: usize) -> &[DescriptionId] {
        &self.samples[sample].descriptions
    }

    /// Number of distinct descriptions `M`.
    pub fn num_descriptions(&self) -> usize {
        self.description_ids.len()
    }

    /// Original ID of a dense description index.
    pub fn original_description_id(&self, id: DescriptionId) -> u64 {
        self.description_ids[id as usize]
    }

    pub fn source_ids(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.source_id).collect()
    }

    /// `Σ |T(x)|` over all samples.
    pub fn sum_set_sizes(&self) -> u64 {
        self.samples
            .iter()
            .map(|s| s.descriptions.len() as u64)
            .sum()
    }

    /// Keeps at most the first `cap` descriptions (by ID) of every sample.
    /// The description ID space is left unchanged.
    pub fn truncated(&self, cap: usize) -> Dataset {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                descriptions: s.descriptions.iter().take(cap).copied().collect(),
                ..s.clone()
            })
            .collect();
        Dataset {
            samples,
            description_ids: self.description_ids.clone(),
        }
    }

    /// Reorders samples so that new position `p` holds old sample `order[p]`.
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        assert_eq!(order.len(), self.len());
        let samples = order
            .iter()
            .enumerate()
            .map(|(p, &old)| Sample {
                sample_id: p,
                ..self.samples[old].clone()
            })
            .collect();
        Dataset {
            samples,
            description_ids: self.description_ids.clone(),
        }
    }
}

/// Reads a JSONL dataset file.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(BufReader::new(file))
}

/// Parses JSONL records `{"id", "descriptions", "label"?, "text"?}`.
pub fn read_jsonl<R: Read>(reader: R) -> Result<Dataset> {
    let reader = BufReader::new(reader);
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let source_id = u64::try_from(rec.id).map_err(|_| Error::Parse {
            line: lineno,
            message: format!("negative sample id {}", rec.id),
        })?;
        let descriptions = rec
            .descriptions
            .iter()
            .map(|&d| {
                u64::try_from(d).map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("negative description id {d}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        raw.push(RawSample {
            source_id,
            descriptions,
            label: rec.label,
            text: rec.text,
        });
    }
    if raw.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::from_raw(raw)
}

/// Writes the dataset in the same JSONL schema, with original IDs.
pub fn write_dataset<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for s in dataset.samples() {
        let rec = OutRecord {
            id: s.source_id,
            descriptions: s
                .descriptions
                .iter()
                .map(|&d| dataset.original_description_id(d))
                .collect(),
            label: s.label.as_deref(),
            text: s.text.as_deref(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// Trigger phrases mapped to (original) description IDs.
#[derive(Debug, Clone, Default)]
pub struct TriggerLexicon {
    entries: Vec<(Vec<String>, u64)>,
}

impl TriggerLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a trigger. The phrase is lowercased and split on whitespace.
    pub fn insert(&mut self, phrase: &str, description_id: u64) -> Result<()> {
        let tokens = tokenize(phrase);
        if tokens.is_empty() {
            return Err(Error::InvalidArgument("empty trigger phrase".into()));
        }
        self.entries.push((tokens, description_id));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses TSV lines `trigger_phrase<TAB>description_id`.
    pub fn from_tsv<R: Read>(reader: R) -> Result<Self> {
        let mut lex = TriggerLexicon::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let (phrase, id) = line.rsplit_once('\t').ok_or_else(|| Error::Parse {
                line: lineno,
                message: "expected `phrase<TAB>description_id`".into(),
            })?;
            let id: u64 = id.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid description id {:?}", id.trim()),
            })?;
            lex.insert(phrase, id).map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(file)
    }
}

// Whitespace tokens, lowercased, with surrounding punctuation stripped so that
// "late." matches "late".
fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Retrieves description sets by exact phrase matching on token boundaries.
pub fn match_triggers<S: AsRef<str>>(texts: &[S], lexicon: &TriggerLexicon) -> Result<Dataset> {
    if lexicon.is_empty() {
        return Err(Error::InvalidArgument("trigger lexicon is empty".into()));
    }
    let raw = texts
        .iter()
        .enumerate()
        .map(|(i, text)| {
            let tokens = tokenize(text.as_ref());
            let mut found: Vec<u64> = lexicon
                .entries
                .iter()
                .filter(|(phrase, _)| {
                    phrase.len() <= tokens.len()
                        && tokens.windows(phrase.len()).any(|w| w == phrase.as_slice())
                })
                .map(|&(_, id)| id)
                .collect();
            found.sort_unstable();
            found.dedup();
            RawSample {
                source_id: i as u64,
                descriptions: found,
                label: None,
                text: Some(text.as_ref().to_owned()),
            }
        })
        .collect();
    Dataset::from_raw(raw)
}

/// Parameters of the planted-cluster generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedConfig {
    pub n: usize,
    pub clusters: usize,
    pub shared_per_cluster: usize,
    pub private_per_sample: usize,
    /// Probability that a sample also receives one shared description of a
    /// different, uniformly chosen cluster.
    pub noise_overlap: f64,
    pub seed: u64,
}

/// Synthesizes a dataset with a known cluster structure.
///
/// Cluster `c` owns `shared_per_cluster` descriptions held by all of its
/// members; every sample also owns `private_per_sample` descriptions of its
/// own. Cluster membership is a seeded random permutation chunked into equal
/// groups, so the planted partition does not follow sample order.
pub fn generate_planted(cfg: &PlantedConfig) -> Result<(Dataset, Partition)> {
    let PlantedConfig {
        n,
        clusters,
        shared_per_cluster,
        private_per_sample,
        noise_overlap,
        seed,
    } = *cfg;
    if clusters == 0 || n == 0 || n % clusters != 0 {
        return Err(Error::InvalidArgument(format!(
            "n={n} must be a positive multiple of clusters={clusters}"
        )));
    }
    if !(0.0..=1.0).contains(&noise_overlap) {
        return Err(Error::InvalidArgument(format!(
            "noise_overlap={noise_overlap} is not a probability"
        )));
    }
    let mut rng = crate::seeded_rng(seed, crate::streams::PLANTED);
    let size = n / clusters;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut cluster_of = vec![0usize; n];
    for (pos, &sample) in order.iter().enumerate() {
        cluster_of[sample] = pos / size;
    }

    let private_base = clusters * shared_per_cluster;
    let num_descriptions = private_base + n * private_per_sample;
    let mut sets = Vec::with_capacity(n);
    for (i, &c) in cluster_of.iter().enumerate() {
        let mut set: Vec<DescriptionId> = (0..shared_per_cluster)
            .map(|j| (c * shared_per_cluster + j) as DescriptionId)
            .collect();
        set.extend(
            (0..private_per_sample).map(|j| (private_base + i * private_per_sample + j) as DescriptionId),
        );
        if clusters > 1 && shared_per_cluster > 0 && rng.gen_bool(noise_overlap) {
            let mut other = rng.gen_range(0..clusters - 1);
            if other >= c {
                other += 1;
            }
            let j = rng.gen_range(0..shared_per_cluster);
            set.push((other * shared_per_cluster + j) as DescriptionId);
        }
        sets.push(set);
    }
    let dataset = Dataset::from_dense(sets, num_descriptions);
    let planted = Partition::new(cluster_of, vec![size; clusters])?;
    Ok((dataset, planted))
}
