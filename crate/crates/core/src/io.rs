//! Record formats: labeled CSV (`y,f1,...,fd`), triplet JSONL
//! (`{"anchor":[..],"c1":[..],"c2":[..]}`) and unlabeled JSONL (`{"x":[..]}`).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{FeatureVector, Label, LabeledExample, UncertainTriplet};

pub fn write_labeled_csv<W: Write>(out: W, examples: &[LabeledExample]) -> Result<()> {
    let dim = examples.first().map_or(0, |e| e.x.dim());
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = std::iter::once("y".to_string()).chain((1..=dim).map(|i| format!("f{i}"))).collect();
    w.write_record(&header)?;
    for e in examples {
        if e.x.dim() != dim {
            return Err(Error::Shape { expected: dim, found: e.x.dim() });
        }
        let row: Vec<String> = std::iter::once(e.y.to_string()).chain(e.x.iter().map(|v| v.to_string())).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labeled_csv<R: std::io::Read>(input: R) -> Result<Vec<LabeledExample>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("y") {
        return Err(Error::Parse { line: 1, message: "header must start with column `y`".into() });
    }
    for (i, name) in header.iter().enumerate().skip(1) {
        if name != format!("f{i}") {
            return Err(Error::Parse { line: 1, message: format!("expected column f{i}, found {name:?}") });
        }
    }
    let dim = header.len() - 1;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let parse_err = |message: String| Error::Parse { line, message };
        if rec.len() != dim + 1 {
            return Err(parse_err(format!("expected {} fields, found {}", dim + 1, rec.len())));
        }
        let y: Label = rec[0].parse().map_err(|e: Error| parse_err(e.to_string()))?;
        let values = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| parse_err(format!("{v:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let x = FeatureVector::new(values).map_err(|e| parse_err(e.to_string()))?;
        out.push(LabeledExample { x, y });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnlabeledRecord {
    x: FeatureVector,
}

fn write_jsonl<W: Write, T: Serialize>(mut out: W, items: impl IntoIterator<Item = T>) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, &item)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn read_jsonl<R: BufRead, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

pub fn write_triplets_jsonl<W: Write>(out: W, triplets: &[UncertainTriplet]) -> Result<()> {
    write_jsonl(out, triplets)
}

pub fn read_triplets_jsonl<R: BufRead>(input: R) -> Result<Vec<UncertainTriplet>> {
    read_jsonl(input)
}

pub fn write_unlabeled_jsonl<W: Write>(out: W, xs: &[FeatureVector]) -> Result<()> {
    write_jsonl(out, xs.iter().map(|x| UnlabeledRecord { x: x.clone() }))
}

pub fn read_unlabeled_jsonl<R: BufRead>(input: R) -> Result<Vec<FeatureVector>> {
    Ok(read_jsonl::<_, UnlabeledRecord>(input)?.into_iter().map(|r| r.x).collect())
}
