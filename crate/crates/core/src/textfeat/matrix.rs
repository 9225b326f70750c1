//! Feature matrix CSV: `article_id,subgroup,<feature names...>`.
//!
//! Lines starting with `#` are comments; writers use a single leading
//! comment line for provenance.

use std::io::{Read, Write};

use crate::corpus::{Corpus, Subgroup};

use super::features::{extract_features, FeatureSchema};
use super::lexicon::LexiconSet;
use super::TextError;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub article_id: String,
    pub subgroup: Subgroup,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    /// Extracts canonical features for every article, in corpus order.
    pub fn from_corpus(corpus: &Corpus, lexicons: &LexiconSet) -> Result<Self, TextError> {
        let mut rows = Vec::with_capacity(corpus.len());
        for a in corpus.articles() {
            let fv = extract_features(a, lexicons)?;
            rows.push(FeatureRow {
                article_id: fv.article_id,
                subgroup: a.subgroup(),
                values: fv.values,
            });
        }
        Ok(FeatureMatrix {
            names: FeatureSchema::canonical().names().to_vec(),
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    /// Rows restricted to the given columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Vec<Vec<f64>>, TextError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| TextError::Matrix(format!("unknown feature column {n:?}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(self
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| r.values[i]).collect())
            .collect())
    }

    /// Keeps only rows whose id is in `ids`, in matrix order.
    pub fn filter_ids(&self, ids: &std::collections::HashSet<&str>) -> FeatureMatrix {
        FeatureMatrix {
            names: self.names.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| ids.contains(r.article_id.as_str()))
                .cloned()
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W, provenance: Option<&str>) -> Result<(), TextError> {
        let io = |e: std::io::Error| TextError::Matrix(e.to_string());
        if let Some(p) = provenance {
            writeln!(out, "# {p}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| TextError::Matrix(e.to_string());
        let mut header = vec!["article_id".to_string(), "subgroup".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.article_id.clone(), r.subgroup.to_string()];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TextError> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(true)
            .from_reader(input);
        let csv_err = |e: csv::Error| TextError::Matrix(e.to_string());
        let header = r.headers().map_err(csv_err)?.clone();
        if header.len() < 3 || &header[0] != "article_id" || &header[1] != "subgroup" {
            return Err(TextError::Matrix(
                "header must start with article_id,subgroup and name at least one feature".into(),
            ));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map(|p| p.line()).unwrap_or(i as u64 + 2);
            if rec.len() != header.len() {
                return Err(TextError::Matrix(format!(
                    "line {line}: expected {} fields, found {}",
                    header.len(),
                    rec.len()
                )));
            }
            let subgroup: Subgroup = rec[1]
                .parse()
                .map_err(|_| TextError::Matrix(format!("line {line}: bad subgroup {:?}", &rec[1])))?;
            let values = rec
                .iter()
                .skip(2)
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| TextError::Matrix(format!("line {line}: bad value {s:?}")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(FeatureRow {
                article_id: rec[0].to_string(),
                subgroup,
                values,
            });
        }
        Ok(FeatureMatrix { names, rows })
    }
}
