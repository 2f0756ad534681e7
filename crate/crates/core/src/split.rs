//! Deterministic training/validation/test split of the `data` subset.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::{DatasetManifest, Subset};

/// Split proportions in tenths: 0.6 / 0.2 / 0.2.
const RATIO_TENTHS: [usize; 3] = [6, 2, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    Training,
    Validation,
    Test,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::Training, Bucket::Validation, Bucket::Test];

    pub fn name(self) -> &'static str {
        match self {
            Bucket::Training => "training",
            Bucket::Validation => "validation",
            Bucket::Test => "test",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Bucket::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown split bucket {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitAssignment {
    pub assignments: BTreeMap<String, Bucket>,
}

impl SplitAssignment {
    pub fn bucket(&self, sample_id: &str) -> Option<Bucket> {
        self.assignments.get(sample_id).copied()
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for b in self.assignments.values() {
            counts[*b as usize] += 1;
        }
        counts
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["sample_id", "split"])?;
        for (id, bucket) in &self.assignments {
            w.write_record([id.as_str(), bucket.name()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut assignments = BTreeMap::new();
        for record in r.records() {
            let record = record?;
            let (Some(id), Some(bucket)) = (record.get(0), record.get(1)) else {
                return Err(Error::Invalid("split rows need sample_id and split".into()));
            };
            assignments.insert(id.to_string(), bucket.parse()?);
        }
        Ok(Self { assignments })
    }
}

/// Bucket sizes by largest-remainder rounding; ties in the remainder go to
/// the earlier bucket.
pub fn split_sizes(n: usize) -> [usize; 3] {
    let mut sizes = RATIO_TENTHS.map(|t| n * t / 10);
    let remainders = RATIO_TENTHS.map(|t| n * t % 10);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
    let assigned: usize = sizes.iter().sum();
    for &i in order.iter().take(n - assigned) {
        sizes[i] += 1;
    }
    sizes
}

/// Shuffles the `data` subset (sorted by id, then seeded) and cuts it 60/20/20.
/// Samples from `examples` and `warmup` are never assigned.
pub fn split(manifest: &DatasetManifest, seed: u64) -> Result<SplitAssignment> {
    let mut ids: Vec<&str> = manifest
        .subset(Subset::Data)
        .map(|s| s.sample_id.as_str())
        .collect();
    if ids.is_empty() {
        return Err(Error::Invalid("the data subset is empty".into()));
    }
    ids.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let [train, val, _] = split_sizes(ids.len());
    let assignments = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let bucket = if i < train {
                Bucket::Training
            } else if i < train + val {
                Bucket::Validation
            } else {
                Bucket::Test
            };
            (id.to_string(), bucket)
        })
        .collect();
    Ok(SplitAssignment { assignments })
}
