//! Corpus ingestion: manifest parsing, text preprocessing, and the
//! term-id indexing that the sampler consumes.
//!
//! Preprocessing follows a fixed order per whitespace-separated token:
//! punctuation and digit characters are deleted (Unicode `P*` and `N*`
//! classes, so typographic quotes and dashes go too), the remainder is
//! optionally lowercased, and then short tokens, stopwords, and
//! blocklisted terms are dropped. Diacritics are preserved throughout:
//! "economía" and "economia" are distinct terms.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{Error, Result};

/// Rules applied to raw text before indexing.
#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub stopwords: BTreeSet<String>,
    pub blocklist: BTreeSet<String>,
    pub lowercase: bool,
    /// Minimum surviving token length, in characters.
    pub min_token_length: usize,
    /// Minimum number of documents a term must appear in to stay in the
    /// vocabulary. 1 means no pruning.
    pub min_doc_frequency: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopwords: BTreeSet::new(),
            blocklist: BTreeSet::new(),
            lowercase: true,
            min_token_length: 2,
            min_doc_frequency: 1,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_length < 1 {
            return Err(Error::InvalidPreprocessConfig(
                "min_token_length must be at least 1".into(),
            ));
        }
        if self.min_doc_frequency < 1 {
            return Err(Error::InvalidPreprocessConfig(
                "min_doc_frequency must be at least 1".into(),
            ));
        }
        if self.stopwords.contains("") || self.blocklist.contains("") {
            return Err(Error::InvalidPreprocessConfig(
                "term lists must not contain empty strings".into(),
            ));
        }
        Ok(())
    }
}

/// Reads a term list: one term per line, `#` starts a comment, blank
/// lines ignored.
pub fn load_term_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut terms = BTreeSet::new();
    for line in text.lines() {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let term = line.trim();
        if !term.is_empty() {
            terms.insert(term.to_string());
        }
    }
    Ok(terms)
}

/// One manifest row: a document file plus its metadata.
#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub file_path: PathBuf,
    pub doc_id: String,
    pub country: String,
    pub year: i32,
    /// Aligned with [`Manifest::covariate_names`]; `None` marks a missing value.
    pub covariates: Vec<Option<f64>>,
}

/// Parsed and validated document manifest.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub covariate_names: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

const MANIFEST_FIXED_COLUMNS: [&str; 4] = ["file", "doc_id", "country", "year"];

/// Loads a manifest CSV. `file` paths are resolved relative to the
/// manifest's own directory. Every referenced file must exist.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => Error::Csv(e),
        })?;

    let headers = reader.headers()?.clone();
    if headers.len() < MANIFEST_FIXED_COLUMNS.len()
        || !headers
            .iter()
            .take(MANIFEST_FIXED_COLUMNS.len())
            .eq(MANIFEST_FIXED_COLUMNS)
    {
        return Err(Error::ManifestRow {
            row: 1,
            message: format!(
                "header must start with `{}`",
                MANIFEST_FIXED_COLUMNS.join(",")
            ),
        });
    }
    let covariate_names: Vec<String> = headers
        .iter()
        .skip(MANIFEST_FIXED_COLUMNS.len())
        .map(str::to_string)
        .collect();

    let base_dir = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    let mut seen_ids = HashSet::new();

    for record in reader.records() {
        let record = record?;
        let row = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(entries.len() + 2);
        if record.len() != headers.len() {
            return Err(Error::ManifestRow {
                row,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }

        let doc_id = record[1].to_string();
        if doc_id.is_empty() {
            return Err(Error::ManifestRow {
                row,
                message: "doc_id is empty".into(),
            });
        }
        if !seen_ids.insert(doc_id.clone()) {
            return Err(Error::DuplicateDocId { id: doc_id });
        }

        let year: i32 = record[3].parse().map_err(|_| Error::ManifestRow {
            row,
            message: format!("year {:?} is not an integer", &record[3]),
        })?;
        if !(1500..=2500).contains(&year) {
            return Err(Error::ManifestRow {
                row,
                message: format!("year {year} outside [1500, 2500]"),
            });
        }

        let file_path = base_dir.join(&record[0]);
        if !file_path.is_file() {
            return Err(Error::MissingDocFile { path: file_path });
        }

        let mut covariates = Vec::with_capacity(covariate_names.len());
        for (name, cell) in covariate_names.iter().zip(record.iter().skip(4)) {
            if cell.is_empty() {
                covariates.push(None);
            } else {
                let value: f64 = cell.parse().map_err(|_| Error::ManifestRow {
                    row,
                    message: format!("covariate {name:?} value {cell:?} is not numeric"),
                })?;
                covariates.push(Some(value));
            }
        }

        entries.push(ManifestEntry {
            file_path,
            doc_id,
            country: record[2].to_string(),
            year,
            covariates,
        });
    }

    Ok(Manifest {
        covariate_names,
        entries,
    })
}

/// Dense bijection between surface terms and integer term ids.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_terms<I: IntoIterator<Item = String>>(terms: I) -> Self {
        let mut vocab = Vocabulary::default();
        for term in terms {
            vocab.intern(&term);
        }
        vocab
    }

    fn intern(&mut self, term: &str) -> u32 {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(term.to_string());
        self.index.insert(term.to_string(), id);
        id
    }

    pub fn id_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term_of(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Hex SHA-256 over the term list, one term per line. Model files
    /// carry this so a model is never reported against the wrong corpus.
    pub fn sha256(&self) -> String {
        let mut hasher = Sha256::new();
        for term in &self.terms {
            hasher.update(term.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

/// One preprocessed document: metadata plus its token-id stream.
#[derive(Debug, Clone)]
pub struct Doc {
    pub doc_id: String,
    pub country: String,
    pub year: i32,
    pub covariates: Vec<Option<f64>>,
    pub token_ids: Vec<u32>,
}

/// The indexed corpus the sampler operates on.
#[derive(Debug, Clone)]
pub struct TokenCorpus {
    pub covariate_names: Vec<String>,
    pub docs: Vec<Doc>,
    pub n_total: u64,
}

impl TokenCorpus {
    pub fn doc_ids(&self) -> Vec<String> {
        self.docs.iter().map(|d| d.doc_id.clone()).collect()
    }
}

/// What preprocessing did, for the run log.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct PreprocessReport {
    pub documents_total: usize,
    pub documents_kept: usize,
    pub dropped_doc_ids: Vec<String>,
    pub vocabulary_size: usize,
    pub tokens_kept: u64,
    pub removed_nonalpha: u64,
    pub removed_short: u64,
    pub removed_stopword: u64,
    pub removed_blocklist: u64,
    pub removed_low_doc_frequency: u64,
}

#[derive(Debug, Default, Clone, Copy)]
struct TokenizeStats {
    nonalpha: u64,
    short: u64,
    stopword: u64,
    blocklist: u64,
}

fn is_deleted_char(c: char) -> bool {
    matches!(
        c.general_category_group(),
        GeneralCategoryGroup::Punctuation | GeneralCategoryGroup::Number
    )
}

fn tokenize_counted(text: &str, config: &PreprocessConfig, stats: &mut TokenizeStats) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let stripped: String = raw.chars().filter(|&c| !is_deleted_char(c)).collect();
        if stripped.is_empty() {
            stats.nonalpha += 1;
            continue;
        }
        let term = if config.lowercase {
            stripped.to_lowercase()
        } else {
            stripped
        };
        if term.chars().count() < config.min_token_length {
            stats.short += 1;
            continue;
        }
        if config.stopwords.contains(&term) {
            stats.stopword += 1;
            continue;
        }
        if config.blocklist.contains(&term) {
            stats.blocklist += 1;
            continue;
        }
        out.push(term);
    }
    out
}

/// Splits on whitespace after deleting punctuation and digit characters,
/// lowercases if configured, then drops short, stopword, and blocklisted
/// tokens.
pub fn tokenize(text: &str, config: &PreprocessConfig) -> Vec<String> {
    tokenize_counted(text, config, &mut TokenizeStats::default())
}

/// Reads every manifest document, preprocesses it, and builds the indexed
/// corpus plus its vocabulary. Term ids are dense, assigned in order of
/// first appearance. Documents with no surviving tokens are dropped with
/// a warning; it is an error for every document to end up empty.
pub fn build_corpus(
    manifest: &Manifest,
    config: &PreprocessConfig,
) -> Result<(Vocabulary, TokenCorpus, PreprocessReport)> {
    config.validate()?;

    let mut stats = TokenizeStats::default();
    let mut tokenized: Vec<Vec<String>> = Vec::with_capacity(manifest.entries.len());
    let mut doc_frequency: HashMap<String, usize> = HashMap::new();

    for entry in &manifest.entries {
        let text = fs::read_to_string(&entry.file_path).map_err(|source| Error::Io {
            path: entry.file_path.clone(),
            source,
        })?;
        let tokens = tokenize_counted(&text, config, &mut stats);
        let distinct: HashSet<&String> = tokens.iter().collect();
        for term in distinct {
            *doc_frequency.entry(term.clone()).or_insert(0) += 1;
        }
        tokenized.push(tokens);
    }

    let mut vocabulary = Vocabulary::default();
    for tokens in &tokenized {
        for term in tokens {
            if doc_frequency[term] >= config.min_doc_frequency {
                vocabulary.intern(term);
            }
        }
    }

    let mut report = PreprocessReport {
        documents_total: manifest.entries.len(),
        removed_nonalpha: stats.nonalpha,
        removed_short: stats.short,
        removed_stopword: stats.stopword,
        removed_blocklist: stats.blocklist,
        ..PreprocessReport::default()
    };

    let mut docs = Vec::new();
    let mut n_total = 0u64;
    for (entry, tokens) in manifest.entries.iter().zip(tokenized) {
        let mut token_ids = Vec::with_capacity(tokens.len());
        for term in &tokens {
            match vocabulary.id_of(term) {
                Some(id) => token_ids.push(id),
                None => report.removed_low_doc_frequency += 1,
            }
        }
        if token_ids.is_empty() {
            log::warn!("document {:?} is empty after preprocessing; dropped", entry.doc_id);
            report.dropped_doc_ids.push(entry.doc_id.clone());
            continue;
        }
        n_total += token_ids.len() as u64;
        docs.push(Doc {
            doc_id: entry.doc_id.clone(),
            country: entry.country.clone(),
            year: entry.year,
            covariates: entry.covariates.clone(),
            token_ids,
        });
    }

    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    report.documents_kept = docs.len();
    report.vocabulary_size = vocabulary.len();
    report.tokens_kept = n_total;

    let corpus = TokenCorpus {
        covariate_names: manifest.covariate_names.clone(),
        docs,
        n_total,
    };
    Ok((vocabulary, corpus, report))
}
