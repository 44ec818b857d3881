//! Seeded synthetic corpus generator: Zipf-distributed term usage with
//! planted signals, emitting the same record format the ingestion pipeline
//! consumes.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::MappingConfig;
use crate::corpus::Record;
use crate::error::{Result, TthError};
use crate::grid::Interval;

/// A term boosted in one interval so it dominates there: the extra
/// occurrences injected are at least `boost` times the term's background
/// expectation in that interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSignal {
    /// Index of the term in the synthetic vocabulary.
    pub term: usize,
    pub interval: Interval,
    pub boost: f64,
}

/// Generator parameters. Generation is a pure function of the spec: a fixed
/// seed reproduces the byte-identical record stream.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub num_docs: usize,
    pub vocab_size: usize,
    /// Zipf exponent; 0 gives uniform term usage.
    pub zipf_s: f64,
    /// Number of daily intervals documents spread over.
    pub intervals: usize,
    pub tokens_per_doc: usize,
    pub planted: Vec<PlantedSignal>,
    /// Category attribute domains, e.g. ("city", ["NY", "LA"]).
    pub aux: Vec<(String, Vec<String>)>,
    pub origin: NaiveDate,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            num_docs: 100,
            vocab_size: 50,
            zipf_s: 1.0,
            intervals: 10,
            tokens_per_doc: 20,
            planted: Vec::new(),
            aux: Vec::new(),
            origin: NaiveDate::from_ymd_opt(2017, 1, 1).unwrap(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenRecord {
    pub id: u64,
    pub date: NaiveDate,
    pub text: String,
    pub aux: BTreeMap<String, String>,
}

impl GenRecord {
    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.insert("id".into(), self.id.to_string());
        r.insert("date".into(), self.date.to_string());
        r.insert("text".into(), self.text.clone());
        for (k, v) in &self.aux {
            r.insert(k.clone(), v.clone());
        }
        r
    }

    pub fn to_json_line(&self) -> String {
        let mut map = serde_json::Map::new();
        map.insert("id".into(), serde_json::json!(self.id));
        map.insert("date".into(), serde_json::json!(self.date.to_string()));
        map.insert("text".into(), serde_json::json!(self.text));
        for (k, v) in &self.aux {
            map.insert(k.clone(), serde_json::json!(v));
        }
        serde_json::Value::Object(map).to_string()
    }
}

/// The synthetic term string for a vocabulary index.
pub fn term_name(index: usize) -> String {
    format!("t{index}")
}

/// Mapping configuration matching the generated record layout.
pub fn mapping_config(corpus: &str, spec: &GenSpec) -> MappingConfig {
    MappingConfig {
        corpus: corpus.to_string(),
        id_field: "id".into(),
        temporal_field: "date".into(),
        temporal_format: "%Y-%m-%d".into(),
        term_index: vec!["text".into()],
        categories: spec.aux.iter().map(|(name, _)| name.clone()).collect(),
        stopwords: Default::default(),
        phrases: Vec::new(),
        grid_origin: spec.origin,
        grid_width_days: 1,
    }
}

/// Inverse-CDF sampler over ranks 1..=n with probability proportional to
/// 1/rank^s.
pub struct ZipfTable {
    cumulative: Vec<f64>,
}

impl ZipfTable {
    pub fn new(n: usize, s: f64) -> Result<ZipfTable> {
        if n == 0 {
            return Err(TthError::Argument("vocabulary size must be >= 1".into()));
        }
        if s < 0.0 || !s.is_finite() {
            return Err(TthError::Argument(format!(
                "zipf exponent must be a finite non-negative number, got {s}"
            )));
        }
        let mut cumulative = Vec::with_capacity(n);
        let mut total = 0.0;
        for rank in 1..=n {
            total += 1.0 / (rank as f64).powf(s);
            cumulative.push(total);
        }
        Ok(ZipfTable { cumulative })
    }

    /// Zero-based index sampled from the distribution.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u: f64 = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c < u)
    }

    /// Probability of the zero-based index.
    pub fn probability(&self, index: usize) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let lo = if index == 0 {
            0.0
        } else {
            self.cumulative[index - 1]
        };
        (self.cumulative[index] - lo) / total
    }
}

/// Generate the corpus records for `spec`.
pub fn generate(spec: &GenSpec) -> Result<Vec<GenRecord>> {
    if spec.intervals == 0 {
        return Err(TthError::Argument("need at least one interval".into()));
    }
    for signal in &spec.planted {
        if signal.term >= spec.vocab_size {
            return Err(TthError::Argument(format!(
                "planted term index {} is outside the vocabulary of size {}",
                signal.term, spec.vocab_size
            )));
        }
        if signal.interval < 0 || signal.interval >= spec.intervals as i64 {
            return Err(TthError::Argument(format!(
                "planted interval {} is outside 0..{}",
                signal.interval, spec.intervals
            )));
        }
        if signal.boost < 0.0 {
            return Err(TthError::Argument("planted boost must be >= 0".into()));
        }
    }
    let zipf = ZipfTable::new(spec.vocab_size, spec.zipf_s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Interval assignment, then a deterministic fix-up so every planted
    // interval has at least one document to carry the boost.
    let mut doc_intervals: Vec<Interval> = (0..spec.num_docs)
        .map(|_| rng.random_range(0..spec.intervals) as Interval)
        .collect();
    for (i, signal) in spec.planted.iter().enumerate() {
        if spec.num_docs > 0 && !doc_intervals.contains(&signal.interval) {
            let slot = i % spec.num_docs;
            doc_intervals[slot] = signal.interval;
        }
    }

    let mut records = Vec::with_capacity(spec.num_docs);
    for (idx, &interval) in doc_intervals.iter().enumerate() {
        let mut tokens: Vec<String> = (0..spec.tokens_per_doc)
            .map(|_| term_name(zipf.sample(&mut rng)))
            .collect();
        let aux: BTreeMap<String, String> = spec
            .aux
            .iter()
            .map(|(name, domain)| {
                let v = domain[rng.random_range(0..domain.len())].clone();
                (name.clone(), v)
            })
            .collect();
        tokens.extend(planted_tokens(spec, interval, &doc_intervals, idx));
        records.push(GenRecord {
            id: idx as u64 + 1,
            date: spec.origin + Duration::days(interval),
            text: tokens.join(" "),
            aux,
        });
    }
    Ok(records)
}

/// Extra planted occurrences this document carries: the interval's total
/// extra count is split round-robin over its documents.
fn planted_tokens(
    spec: &GenSpec,
    interval: Interval,
    doc_intervals: &[Interval],
    doc_idx: usize,
) -> Vec<String> {
    let mut out = Vec::new();
    let zipf = match ZipfTable::new(spec.vocab_size, spec.zipf_s) {
        Ok(z) => z,
        Err(_) => return out,
    };
    for signal in &spec.planted {
        if signal.interval != interval {
            continue;
        }
        let docs_here: Vec<usize> = doc_intervals
            .iter()
            .enumerate()
            .filter(|(_, &iv)| iv == interval)
            .map(|(i, _)| i)
            .collect();
        let position = docs_here.iter().position(|&i| i == doc_idx).unwrap();
        let expectation = docs_here.len() as f64
            * spec.tokens_per_doc as f64
            * zipf.probability(signal.term);
        let total_extra = (signal.boost * expectation).ceil() as usize;
        let share = total_extra / docs_here.len()
            + usize::from(position < total_extra % docs_here.len());
        out.extend(std::iter::repeat_n(term_name(signal.term), share));
    }
    out
}

/// Records rendered as newline-delimited JSON.
pub fn to_jsonl(records: &[GenRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_corpus;
    use crate::index::build_indexes;
    use crate::tth::{build_tth, BuildFilter};

    #[test]
    fn fixed_seed_reproduces_byte_identical_output() {
        let spec = GenSpec {
            num_docs: 40,
            planted: vec![PlantedSignal {
                term: 3,
                interval: 2,
                boost: 5.0,
            }],
            aux: vec![("city".into(), vec!["NY".into(), "LA".into()])],
            ..Default::default()
        };
        let a = to_jsonl(&generate(&spec).unwrap());
        let b = to_jsonl(&generate(&spec).unwrap());
        assert_eq!(a, b);
        let different = GenSpec { seed: 1, ..spec };
        assert_ne!(a, to_jsonl(&generate(&different).unwrap()));
    }

    #[test]
    fn uniform_usage_passes_chi_square_at_one_percent() {
        let spec = GenSpec {
            num_docs: 500,
            vocab_size: 20,
            zipf_s: 0.0,
            intervals: 5,
            tokens_per_doc: 20,
            ..Default::default()
        };
        let records = generate(&spec).unwrap();
        let mut counts = vec![0u64; spec.vocab_size];
        let mut total = 0u64;
        for r in &records {
            for tok in r.text.split_whitespace() {
                let idx: usize = tok[1..].parse().unwrap();
                counts[idx] += 1;
                total += 1;
            }
        }
        assert_eq!(total, 10_000);
        let expected = total as f64 / spec.vocab_size as f64;
        let stat: f64 = counts
            .iter()
            .map(|&o| {
                let d = o as f64 - expected;
                d * d / expected
            })
            .sum();
        // Chi-square critical value for df = 19 at the 0.01 level.
        assert!(stat < 36.191, "chi-square statistic {stat} too large");
    }

    #[test]
    fn planted_term_tops_its_interval() {
        // Boost 10 on a mid-rank term: its boosted expectation (10x its own
        // background) comfortably exceeds the head term's expectation.
        let spec = GenSpec {
            num_docs: 120,
            vocab_size: 30,
            zipf_s: 1.0,
            intervals: 6,
            tokens_per_doc: 15,
            planted: vec![PlantedSignal {
                term: 3,
                interval: 4,
                boost: 10.0,
            }],
            seed: 7,
            ..Default::default()
        };
        let records = generate(&spec).unwrap();
        let config = mapping_config("synthetic", &spec);
        let corpus = load_corpus(
            &config,
            records.iter().map(|r| Ok(r.to_record())),
        )
        .unwrap();
        let index = build_indexes(&corpus, "text").unwrap();
        let tth = build_tth(&corpus, &index, 1, &BuildFilter::default(), &[]).unwrap();

        let mut best: Option<(u64, String)> = None;
        for (key, data) in tth.iter() {
            if key.interval == 4 {
                let term = index.vocab.term(key.term).unwrap().to_string();
                if best.as_ref().is_none_or(|(c, _)| data.count > *c) {
                    best = Some((data.count, term));
                }
            }
        }
        assert_eq!(best.unwrap().1, term_name(3));
    }

    #[test]
    fn inconsistent_spec_is_argument_error() {
        let spec = GenSpec {
            vocab_size: 5,
            planted: vec![PlantedSignal {
                term: 9,
                interval: 0,
                boost: 2.0,
            }],
            ..Default::default()
        };
        assert!(matches!(generate(&spec), Err(TthError::Argument(_))));
        let neg = GenSpec {
            zipf_s: -1.0,
            ..Default::default()
        };
        assert!(matches!(generate(&neg), Err(TthError::Argument(_))));
    }

    #[test]
    fn generated_corpora_satisfy_index_invariants() {
        let spec = GenSpec {
            num_docs: 60,
            aux: vec![("city".into(), vec!["NY".into(), "LA".into(), "SF".into()])],
            seed: 3,
            ..Default::default()
        };
        let records = generate(&spec).unwrap();
        let config = mapping_config("synthetic", &spec);
        let corpus =
            load_corpus(&config, records.iter().map(|r| Ok(r.to_record()))).unwrap();
        let index = build_indexes(&corpus, "text").unwrap();
        for hist in &index.doc_hists {
            for &(term, count) in &hist.rows {
                assert_eq!(index.forward.get(term, hist.doc_id), Some(count));
            }
        }
    }
}
