//! Plain-text instance files.
//!
//! ```text
//! scenagg-instance 1
//! name example1
//! seed 42
//! generator example1
//! structure parallel 1 1 1
//! scenarios 4 3
//! 4 1 0
//! 0 1 4
//! 0 1 0
//! 0 1 0
//! ```
//!
//! The first line carries the format version. `name`, `seed` and
//! `generator` are optional and take the rest of their line. `structure` is
//! one of `layered <layers> <width>`, `parallel <len>...` or
//! `selection <n> <p>`. `scenarios <K> <n>` is followed by `K` rows of `n`
//! whitespace-separated decimal costs, written in shortest round-trip form
//! so that reading a written file reproduces every cost bit for bit.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{CostVector, GroundStructure, Instance, ScenarioSet};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "scenagg-instance";

fn err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: message.into() })
}

fn number<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .or_else(|_| err(line, format!("{what}: '{token}' is not a valid number")))
}

pub fn write_instance_string(inst: &Instance) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {FORMAT_VERSION}");
    for (key, value) in [("name", &inst.name), ("generator", &inst.generator)] {
        if let Some(v) = value {
            if v.contains(['\n', '\r']) {
                return Err(Error::Validation(format!("{key} must be a single line")));
            }
        }
    }
    if let Some(name) = &inst.name {
        let _ = writeln!(s, "name {name}");
    }
    if let Some(seed) = inst.seed {
        let _ = writeln!(s, "seed {seed}");
    }
    if let Some(generator) = &inst.generator {
        let _ = writeln!(s, "generator {generator}");
    }
    match &inst.structure {
        GroundStructure::LayeredPath { layers, width } => {
            let _ = writeln!(s, "structure layered {layers} {width}");
        }
        GroundStructure::ParallelPaths { lengths } => {
            let lens: Vec<String> = lengths.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "structure parallel {}", lens.join(" "));
        }
        GroundStructure::Selection { n, p } => {
            let _ = writeln!(s, "structure selection {n} {p}");
        }
    }
    let _ = writeln!(s, "scenarios {} {}", inst.k(), inst.ground_size());
    for c in inst.scenarios.iter() {
        let row: Vec<String> = c.entries().iter().map(f64::to_string).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    Ok(s)
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_instance_string(inst)?)?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

fn parse_structure(line: usize, rest: &str) -> Result<GroundStructure> {
    let mut tokens = rest.split_whitespace();
    let kind = tokens.next().unwrap_or("");
    let values: Vec<usize> = tokens
        .map(|t| number(line, t, "structure parameter"))
        .collect::<Result<_>>()?;
    let s = match (kind, values.as_slice()) {
        ("layered", [layers, width]) => GroundStructure::LayeredPath { layers: *layers, width: *width },
        ("selection", [n, p]) => GroundStructure::Selection { n: *n, p: *p },
        ("parallel", lengths) if !lengths.is_empty() => GroundStructure::ParallelPaths { lengths: lengths.to_vec() },
        _ => return err(line, format!("unrecognized structure '{rest}'")),
    };
    if let Err(e) = s.validate() {
        return err(line, e.to_string());
    }
    Ok(s)
}

/// Parses an instance file, reporting the first problem with its line number.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let Some((ln, header)) = lines.next() else {
        return err(1, "empty file");
    };
    let mut head = header.split_whitespace();
    if head.next() != Some(MAGIC) {
        return err(ln, format!("expected header '{MAGIC} <version>'"));
    }
    let version: u32 = number(ln, head.next().unwrap_or(""), "format version")?;
    if version != FORMAT_VERSION {
        return err(ln, format!("unsupported format version {version}"));
    }

    let mut name = None;
    let mut seed = None;
    let mut generator = None;
    let mut structure = None;
    let mut shape = None;
    for (ln, line) in lines.by_ref() {
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "name" => name = Some(rest.to_string()),
            "generator" => generator = Some(rest.to_string()),
            "seed" => seed = Some(number::<u64>(ln, rest.trim(), "seed")?),
            "structure" => structure = Some((ln, parse_structure(ln, rest)?)),
            "scenarios" => {
                let dims: Vec<usize> = rest
                    .split_whitespace()
                    .map(|t| number(ln, t, "scenario dimensions"))
                    .collect::<Result<_>>()?;
                let [k, n] = dims[..] else {
                    return err(ln, "expected 'scenarios <K> <n>'");
                };
                if k == 0 {
                    return err(ln, "scenario count K must be >= 1");
                }
                shape = Some((ln, k, n));
                break;
            }
            other => return err(ln, format!("unknown field '{other}'")),
        }
    }
    let Some((sln, structure)) = structure else {
        return err(ln, "missing 'structure' line");
    };
    let Some((kln, k, n)) = shape else {
        return err(ln, "missing 'scenarios' line");
    };
    if n != structure.ground_size() {
        return err(
            kln,
            format!("{n} columns declared but the structure on line {sln} has {} elements", structure.ground_size()),
        );
    }

    let mut rows = Vec::with_capacity(k);
    for (ln, line) in lines.by_ref() {
        if rows.len() == k {
            return err(ln, "unexpected content after the scenario rows");
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .enumerate()
            .map(|(col, t)| number(ln, t, &format!("scenario {} column {}", rows.len() + 1, col + 1)))
            .collect::<Result<_>>()?;
        if row.len() != n {
            return err(ln, format!("expected {n} costs, found {}", row.len()));
        }
        match CostVector::new(row) {
            Ok(c) => rows.push(c),
            Err(e) => return err(ln, e.to_string()),
        }
    }
    if rows.len() != k {
        return err(kln, format!("declared {k} scenarios, found {}", rows.len()));
    }
    let mut inst = Instance::new(structure, ScenarioSet::new(rows)?)?;
    inst.name = name;
    inst.seed = seed;
    inst.generator = generator;
    Ok(inst)
}
