//! lcov `.info` tracefile reader and writer.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LcovError {
    #[error("tracefile line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("tracefile line {line}: record outside of an SF section")]
    OutsideSection { line: usize },
    #[error("tracefile ends inside the section for {0}")]
    Unterminated(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct FileCoverage {
    pub source_path: String,
    /// Demangled function name to execution count.
    pub function_hits: BTreeMap<String, u64>,
    /// Demangled function name to its first line.
    pub function_lines: BTreeMap<String, u32>,
    pub line_hits: BTreeMap<u32, u64>,
    pub lines_found: u64,
    pub lines_hit: u64,
}

impl FileCoverage {
    pub fn new(source_path: impl Into<String>) -> Self {
        Self {
            source_path: source_path.into(),
            ..Self::default()
        }
    }

    /// Recompute LF/LH from the DA records.
    pub fn recount(&mut self) {
        self.lines_found = self.line_hits.len() as u64;
        self.lines_hit = self.line_hits.values().filter(|c| **c > 0).count() as u64;
    }

    /// Fold another section for the same file into this one.
    pub fn merge(&mut self, other: &FileCoverage) {
        for (l, c) in &other.line_hits {
            *self.line_hits.entry(*l).or_default() += c;
        }
        for (f, c) in &other.function_hits {
            *self.function_hits.entry(f.clone()).or_default() += c;
        }
        for (f, l) in &other.function_lines {
            self.function_lines.entry(f.clone()).or_insert(*l);
        }
        self.recount();
    }
}

/// Sum LF and LH over files.
pub fn totals(files: &[FileCoverage]) -> (u64, u64) {
    files
        .iter()
        .fold((0, 0), |(f, h), c| (f + c.lines_found, h + c.lines_hit))
}

/// Merge sections naming the same source file, sorted by path.
pub fn merge_by_path(files: Vec<FileCoverage>) -> Vec<FileCoverage> {
    let mut map: BTreeMap<String, FileCoverage> = BTreeMap::new();
    for f in files {
        match map.get_mut(&f.source_path) {
            Some(existing) => existing.merge(&f),
            None => {
                map.insert(f.source_path.clone(), f);
            }
        }
    }
    map.into_values().collect()
}

fn num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, LcovError> {
    s.trim().parse::<T>().map_err(|_| LcovError::Malformed {
        line,
        message: format!("invalid {what} `{s}`"),
    })
}

/// Parse a tracefile into one [`FileCoverage`] per `SF` section.
///
/// Branch records (`BRDA`, `BRF`, `BRH`) are accepted and ignored. When a
/// section carries `LF`/`LH` those values are kept as written; otherwise they
/// are derived from the `DA` records.
pub fn parse_lcov(text: &str) -> Result<Vec<FileCoverage>, LcovError> {
    let mut out = Vec::new();
    let mut current: Option<FileCoverage> = None;
    let mut explicit_lf = None;
    let mut explicit_lh = None;
    // lcov 2 indexes functions: FNL gives the line, FNA the name and count.
    let mut fn_index_lines: BTreeMap<String, u32> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "end_of_record" {
            let mut fc = current.take().ok_or(LcovError::OutsideSection { line: n })?;
            let (lf, lh) = (
                fc.line_hits.len() as u64,
                fc.line_hits.values().filter(|c| **c > 0).count() as u64,
            );
            fc.lines_found = explicit_lf.take().unwrap_or(lf);
            fc.lines_hit = explicit_lh.take().unwrap_or(lh);
            if fc.lines_hit > fc.lines_found {
                return Err(LcovError::Malformed {
                    line: n,
                    message: format!("LH {} exceeds LF {}", fc.lines_hit, fc.lines_found),
                });
            }
            fn_index_lines.clear();
            out.push(fc);
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(LcovError::Malformed {
                line: n,
                message: format!("unrecognised record `{line}`"),
            });
        };
        match key {
            "TN" | "VER" => continue,
            "SF" => {
                if current.is_some() {
                    return Err(LcovError::Malformed {
                        line: n,
                        message: "SF inside an open section".into(),
                    });
                }
                current = Some(FileCoverage::new(value.trim()));
                continue;
            }
            _ => {}
        }
        let fc = current.as_mut().ok_or(LcovError::OutsideSection { line: n })?;
        match key {
            "FN" => {
                let (first, rest) = value.split_once(',').ok_or_else(|| LcovError::Malformed {
                    line: n,
                    message: "FN needs a line and a name".into(),
                })?;
                let start: u32 = num(first, n, "line number")?;
                // Optional end line: FN:<start>,<end>,<name>
                let name = match rest.split_once(',') {
                    Some((maybe_end, name)) if maybe_end.trim().parse::<u32>().is_ok() => name,
                    _ => rest,
                };
                fc.function_lines.insert(name.to_string(), start);
                fc.function_hits.entry(name.to_string()).or_insert(0);
            }
            "FNDA" => {
                let (count, name) = value.split_once(',').ok_or_else(|| LcovError::Malformed {
                    line: n,
                    message: "FNDA needs a count and a name".into(),
                })?;
                let count: u64 = num(count, n, "execution count")?;
                *fc.function_hits.entry(name.to_string()).or_insert(0) += count;
            }
            "FNL" => {
                let mut parts = value.splitn(3, ',');
                let idx = parts.next().unwrap_or("").trim().to_string();
                let start: u32 = num(parts.next().unwrap_or(""), n, "line number")?;
                fn_index_lines.insert(idx, start);
            }
            "FNA" => {
                let mut parts = value.splitn(3, ',');
                let idx = parts.next().unwrap_or("").trim().to_string();
                let count: u64 = num(parts.next().unwrap_or(""), n, "execution count")?;
                let name = parts.next().ok_or_else(|| LcovError::Malformed {
                    line: n,
                    message: "FNA needs index, count and name".into(),
                })?;
                *fc.function_hits.entry(name.to_string()).or_insert(0) += count;
                if let Some(l) = fn_index_lines.get(&idx) {
                    fc.function_lines.insert(name.to_string(), *l);
                }
            }
            "DA" => {
                let mut parts = value.split(',');
                let l: u32 = num(parts.next().unwrap_or(""), n, "line number")?;
                if l == 0 {
                    return Err(LcovError::Malformed {
                        line: n,
                        message: "line numbers start at 1".into(),
                    });
                }
                let count: u64 = num(parts.next().unwrap_or(""), n, "execution count")?;
                *fc.line_hits.entry(l).or_insert(0) += count;
            }
            "LF" => explicit_lf = Some(num(value, n, "LF")?),
            "LH" => explicit_lh = Some(num(value, n, "LH")?),
            "FNF" | "FNH" => {
                num::<u64>(value, n, key)?;
            }
            "BRDA" | "BRF" | "BRH" => {}
            _ => {
                return Err(LcovError::Malformed {
                    line: n,
                    message: format!("unknown record type `{key}`"),
                })
            }
        }
    }
    if let Some(fc) = current {
        return Err(LcovError::Unterminated(fc.source_path));
    }
    Ok(out)
}

/// Serialise files as a tracefile (functions sorted by line, then name).
pub fn write_lcov(files: &[FileCoverage]) -> String {
    let mut s = String::new();
    for f in files {
        let _ = writeln!(s, "TN:");
        let _ = writeln!(s, "SF:{}", f.source_path);
        let mut fns: Vec<(&String, u32)> = f
            .function_hits
            .keys()
            .map(|name| (name, f.function_lines.get(name).copied().unwrap_or(0)))
            .collect();
        fns.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        for (name, line) in &fns {
            let _ = writeln!(s, "FN:{line},{name}");
        }
        for (name, _) in &fns {
            let _ = writeln!(s, "FNDA:{},{name}", f.function_hits[*name]);
        }
        let _ = writeln!(s, "FNF:{}", fns.len());
        let _ = writeln!(s, "FNH:{}", f.function_hits.values().filter(|c| **c > 0).count());
        for (l, c) in &f.line_hits {
            let _ = writeln!(s, "DA:{l},{c}");
        }
        let _ = writeln!(s, "LF:{}", f.lines_found);
        let _ = writeln!(s, "LH:{}", f.lines_hit);
        let _ = writeln!(s, "end_of_record");
    }
    s
}
