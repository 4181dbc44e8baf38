//! Stand-alone auditor for packing dumps. It reads the instance and dump
//! formats on its own and shares no code with the solvers.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;

type R = BigRational;

/// Distinct sizes relative to capacity one, largest first, with demands.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeTable {
    pub sizes: Vec<R>,
    pub demand: Vec<R>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Format(String),
    UnknownType { entry: usize, index: usize },
    Overfull { entry: usize, load: String },
    NotIntegral { entry: usize },
    Uncovered { index: usize, placed: String, demand: String },
    CostMismatch { packing: String, certificate: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Format(m) => write!(f, "format error: {m}"),
            Violation::UnknownType { entry, index } => write!(f, "entry {entry}: unknown item type {index}"),
            Violation::Overfull { entry, load } => write!(f, "entry {entry}: bin load {load} exceeds 1"),
            Violation::NotIntegral { entry } => write!(f, "entry {entry}: bin count is not a non-negative integer"),
            Violation::Uncovered { index, placed, demand } => write!(f, "item type {index}: placed {placed} < demand {demand}"),
            Violation::CostMismatch { packing, certificate } => write!(f, "packing has {packing} bins, certificate claims {certificate}"),
        }
    }
}

impl std::error::Error for Violation {}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub bins: BigInt,
    pub types: usize,
}

#[derive(Deserialize)]
struct NativeInstance {
    sizes: Vec<[String; 2]>,
    multiplicities: Option<Vec<[String; 2]>>,
}

#[derive(Deserialize)]
struct Entry {
    counts: BTreeMap<usize, u64>,
    kind: String,
    weight: [String; 2],
}

fn ratio(p: &[String; 2]) -> Result<R, Violation> {
    let num: BigInt = p[0].trim().parse().map_err(|_| Violation::Format(format!("bad numerator {:?}", p[0])))?;
    let den: BigInt = p[1].trim().parse().map_err(|_| Violation::Format(format!("bad denominator {:?}", p[1])))?;
    if den.is_zero() {
        return Err(Violation::Format("zero denominator".into()));
    }
    Ok(R::new(num, den))
}

fn table(pairs: Vec<(R, R)>) -> Result<TypeTable, Violation> {
    let mut merged: BTreeMap<R, R> = BTreeMap::new();
    for (k, (s, b)) in pairs.into_iter().enumerate() {
        if !s.is_positive() || s > R::one() {
            return Err(Violation::Format(format!("item {k}: size {s} outside (0, 1]")));
        }
        if b.is_negative() {
            return Err(Violation::Format(format!("item {k}: negative multiplicity")));
        }
        *merged.entry(s).or_insert_with(R::zero) += b;
    }
    if merged.is_empty() {
        return Err(Violation::Format("instance has no items".into()));
    }
    let (sizes, demand) = merged.into_iter().rev().unzip();
    Ok(TypeTable { sizes, demand })
}

/// Reads a BPPLIB text instance (count, capacity, weights) or a native JSON
/// instance (`sizes` and optional `multiplicities` as string pairs).
pub fn parse_instance(text: &str) -> Result<TypeTable, Violation> {
    if text.trim_start().starts_with('{') {
        let raw: NativeInstance = serde_json::from_str(text).map_err(|e| Violation::Format(e.to_string()))?;
        let sizes = raw.sizes.iter().map(ratio).collect::<Result<Vec<_>, _>>()?;
        let mult = match raw.multiplicities {
            Some(ms) => ms.iter().map(ratio).collect::<Result<Vec<_>, _>>()?,
            None => vec![R::one(); sizes.len()],
        };
        if mult.len() != sizes.len() {
            return Err(Violation::Format("sizes and multiplicities differ in length".into()));
        }
        return table(sizes.into_iter().zip(mult).collect());
    }
    let nums: Vec<u64> = text
        .split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| Violation::Format(format!("bad token {t:?}"))))
        .collect::<Result<_, _>>()?;
    let [n, cap, rest @ ..] = nums.as_slice() else {
        return Err(Violation::Format("missing count or capacity".into()));
    };
    if *cap == 0 {
        return Err(Violation::Format("capacity must be positive".into()));
    }
    if rest.len() as u64 != *n {
        return Err(Violation::Format(format!("expected {n} weights, found {}", rest.len())));
    }
    let c = BigInt::from(*cap);
    table(rest.iter().map(|&w| (R::new(BigInt::from(w), c.clone()), R::one())).collect())
}

/// Checks that every entry of the dump is a regular bin with a non-negative
/// integral count that fits exactly, and that every type is covered.
pub fn verify_packing(table: &TypeTable, dump: &str) -> Result<Verdict, Violation> {
    let entries: Vec<Entry> = serde_json::from_str(dump).map_err(|e| Violation::Format(e.to_string()))?;
    let mut placed = vec![R::zero(); table.sizes.len()];
    let mut bins = BigInt::zero();
    for (k, e) in entries.iter().enumerate() {
        if e.kind != "regular" {
            return Err(Violation::Format(format!("entry {k}: kind {:?} in a final packing", e.kind)));
        }
        let x = ratio(&e.weight)?;
        if x.is_negative() || !x.is_integer() {
            return Err(Violation::NotIntegral { entry: k });
        }
        let mut load = R::zero();
        for (&i, &c) in &e.counts {
            let s = table.sizes.get(i).ok_or(Violation::UnknownType { entry: k, index: i })?;
            load += s * R::from_integer(BigInt::from(c));
            placed[i] += &x * R::from_integer(BigInt::from(c));
        }
        if load > R::one() {
            return Err(Violation::Overfull { entry: k, load: load.to_string() });
        }
        bins += x.to_integer();
    }
    for (i, (p, d)) in placed.iter().zip(&table.demand).enumerate() {
        if p < d {
            return Err(Violation::Uncovered { index: i, placed: p.to_string(), demand: d.to_string() });
        }
    }
    Ok(Verdict { bins, types: table.sizes.len() })
}

/// Compares the verdict with the `cost` field of a certificate.
pub fn check_certificate(verdict: &Verdict, cert: &str) -> Result<(), Violation> {
    let v: serde_json::Value = serde_json::from_str(cert).map_err(|e| Violation::Format(e.to_string()))?;
    let cost = v.get("cost").and_then(|c| c.as_u64()).ok_or_else(|| Violation::Format("certificate has no cost".into()))?;
    if verdict.bins != BigInt::from(cost) {
        return Err(Violation::CostMismatch { packing: verdict.bins.to_string(), certificate: cost });
    }
    Ok(())
}
