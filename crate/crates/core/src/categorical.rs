//! Finite categorical domains, dense mass functions and seeded sampling.
//!
//! Joint tables are stored row-major over `(class, f_1, ..., f_N)`: the class
//! index varies slowest, then the features in declaration order, each
//! ascending. Sampling and CSV dumps both follow this enumeration.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Tolerance on `|sum - 1|` for every validated distribution.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Largest dense joint table accepted.
pub const MAX_JOINT_CELLS: usize = 10_000_000;

/// Formats a float with 17 significant digits, enough to round-trip any f64.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain", into = "RawDomain")]
pub struct DomainSpec {
    num_classes: usize,
    feature_cards: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawDomain {
    num_classes: usize,
    feature_cards: Vec<usize>,
}

impl TryFrom<RawDomain> for DomainSpec {
    type Error = Error;
    fn try_from(raw: RawDomain) -> Result<Self> {
        DomainSpec::new(raw.num_classes, raw.feature_cards)
    }
}

impl From<DomainSpec> for RawDomain {
    fn from(d: DomainSpec) -> Self {
        RawDomain {
            num_classes: d.num_classes,
            feature_cards: d.feature_cards,
        }
    }
}

impl DomainSpec {
    pub fn new(num_classes: usize, feature_cards: Vec<usize>) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidDomain(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        if feature_cards.is_empty() {
            return Err(Error::InvalidDomain("need at least one feature".into()));
        }
        if let Some((i, &k)) = feature_cards.iter().enumerate().find(|(_, &k)| k < 2) {
            return Err(Error::InvalidDomain(format!(
                "feature {} has cardinality {k}, need at least 2",
                i + 1
            )));
        }
        let mut cells = num_classes as u128;
        for &k in &feature_cards {
            cells = cells.saturating_mul(k as u128);
        }
        if cells > MAX_JOINT_CELLS as u128 {
            return Err(Error::InvalidDomain(format!(
                "joint table has {cells} cells, limit is {MAX_JOINT_CELLS}"
            )));
        }
        Ok(Self {
            num_classes,
            feature_cards,
        })
    }

    /// Three classes and four features with 2, 3, 3 and 4 values.
    pub fn benchmark() -> Self {
        Self::new(3, vec![2, 3, 3, 4]).expect("valid benchmark domain")
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_cards(&self) -> &[usize] {
        &self.feature_cards
    }

    pub fn num_features(&self) -> usize {
        self.feature_cards.len()
    }

    /// Number of distinct feature vectors, `|F_1| * ... * |F_N|`.
    pub fn feature_space_size(&self) -> usize {
        self.feature_cards.iter().product()
    }

    pub fn joint_size(&self) -> usize {
        self.num_classes * self.feature_space_size()
    }

    pub fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.num_classes {
            return Err(Error::OutOfDomain(format!(
                "class {class} >= {}",
                self.num_classes
            )));
        }
        Ok(())
    }

    pub fn check_features(&self, features: &[usize]) -> Result<()> {
        if features.len() != self.num_features() {
            return Err(Error::OutOfDomain(format!(
                "expected {} feature values, got {}",
                self.num_features(),
                features.len()
            )));
        }
        for (i, (&v, &k)) in features.iter().zip(&self.feature_cards).enumerate() {
            if v >= k {
                return Err(Error::OutOfDomain(format!(
                    "feature {} value {v} >= cardinality {k}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Row-major index of a feature vector. Assumes the vector is in range.
    pub fn feature_index(&self, features: &[usize]) -> usize {
        features
            .iter()
            .zip(&self.feature_cards)
            .fold(0, |acc, (&v, &k)| acc * k + v)
    }

    pub fn feature_vector(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.num_features()];
        for (slot, &k) in out.iter_mut().zip(&self.feature_cards).rev() {
            *slot = index % k;
            index /= k;
        }
        out
    }

    /// All feature vectors in enumeration order.
    pub fn feature_vectors(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.feature_space_size()).map(move |i| self.feature_vector(i))
    }

    pub fn cell_index(&self, class: usize, features: &[usize]) -> usize {
        class * self.feature_space_size() + self.feature_index(features)
    }

    pub fn decode_cell(&self, cell: usize) -> (usize, Vec<usize>) {
        let fs = self.feature_space_size();
        (cell / fs, self.feature_vector(cell % fs))
    }
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("no outcomes".into()));
    }
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::InvalidDistribution(format!(
            "entry {i} is {p}, must be finite and non-negative"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {total}, expected 1"
        )));
    }
    Ok(())
}

fn normalized(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::DegenerateWeights("no weights".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::DegenerateWeights(format!(
            "weight {w} is negative or not finite"
        )));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateWeights("all weights are zero".into()));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

fn mixed(p: &[f64], q: &[f64], w: f64) -> Result<Vec<f64>> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} outcomes vs {}",
            p.len(),
            q.len()
        )));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidParameter(format!(
            "mixture weight {w} outside [0, 1]"
        )));
    }
    Ok(p.iter()
        .zip(q)
        .map(|(&a, &b)| (1.0 - w) * a + w * b)
        .collect())
}

fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} outcomes vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Inverse-CDF sampling over the fixed outcome order.
fn inverse_cdf_draws(probs: &[f64], n: usize, seed: u64) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    // Rounding may leave the last cumulative value a hair below 1; draws that
    // land there go to the last outcome with positive mass.
    let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|_| {
            let u = rng.uniform();
            let k = cdf.partition_point(|&c| c <= u);
            k.min(last_positive)
        })
        .collect()
}

/// A distribution over `0..len` outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MassFunction {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for MassFunction {
    type Error = Error;
    fn try_from(probs: Vec<f64>) -> Result<Self> {
        MassFunction::new(probs)
    }
}

impl From<MassFunction> for Vec<f64> {
    fn from(m: MassFunction) -> Self {
        m.probs
    }
}

impl MassFunction {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs)?;
        Ok(Self { probs })
    }

    /// Rescales non-negative weights to sum to one.
    pub fn normalize(weights: &[f64]) -> Result<Self> {
        Ok(Self {
            probs: normalized(weights)?,
        })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        Self::normalize(&vec![1.0; len])
    }

    pub fn point(len: usize, outcome: usize) -> Result<Self> {
        if outcome >= len {
            return Err(Error::OutOfDomain(format!("outcome {outcome} >= {len}")));
        }
        let mut probs = vec![0.0; len];
        probs[outcome] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    /// `(1 - w) * self + w * other`, entrywise.
    pub fn mix(&self, other: &MassFunction, w: f64) -> Result<Self> {
        Ok(Self {
            probs: mixed(&self.probs, &other.probs, w)?,
        })
    }

    pub fn total_variation(&self, other: &MassFunction) -> Result<f64> {
        tv_distance(&self.probs, &other.probs)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<usize> {
        inverse_cdf_draws(&self.probs, n, seed)
    }
}

/// Dense joint mass function over classes and feature vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct JointMassFunction {
    domain: DomainSpec,
    probs: Vec<f64>,
}

impl JointMassFunction {
    pub fn new(domain: DomainSpec, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != domain.joint_size() {
            return Err(Error::ShapeMismatch(format!(
                "domain has {} cells, got {} probabilities",
                domain.joint_size(),
                probs.len()
            )));
        }
        check_probs(&probs)?;
        Ok(Self { domain, probs })
    }

    pub fn from_weights(domain: DomainSpec, weights: &[f64]) -> Result<Self> {
        if weights.len() != domain.joint_size() {
            return Err(Error::ShapeMismatch(format!(
                "domain has {} cells, got {} weights",
                domain.joint_size(),
                weights.len()
            )));
        }
        Ok(Self {
            domain,
            probs: normalized(weights)?,
        })
    }

    /// Caller guarantees the table is a distribution up to product rounding.
    pub(crate) fn from_probs_unchecked(domain: DomainSpec, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), domain.joint_size());
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        Self { domain, probs }
    }

    pub fn uniform(domain: DomainSpec) -> Self {
        let n = domain.joint_size();
        Self {
            domain,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(domain: DomainSpec, cell: usize) -> Result<Self> {
        let n = domain.joint_size();
        if cell >= n {
            return Err(Error::OutOfDomain(format!("cell {cell} >= {n}")));
        }
        let mut probs = vec![0.0; n];
        probs[cell] = 1.0;
        Ok(Self { domain, probs })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, class: usize, features: &[usize]) -> f64 {
        self.probs[self.domain.cell_index(class, features)]
    }

    /// `p(c, f)` for every class `c` at a fixed feature vector.
    pub fn class_slice(&self, features: &[usize]) -> Vec<f64> {
        let fs = self.domain.feature_space_size();
        let fi = self.domain.feature_index(features);
        (0..self.domain.num_classes())
            .map(|c| self.probs[c * fs + fi])
            .collect()
    }

    fn check_same_domain(&self, other: &JointMassFunction) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::ShapeMismatch(format!(
                "domains differ: {:?} vs {:?}",
                self.domain, other.domain
            )));
        }
        Ok(())
    }

    pub fn mix(&self, other: &JointMassFunction, w: f64) -> Result<Self> {
        self.check_same_domain(other)?;
        Ok(Self {
            domain: self.domain.clone(),
            probs: mixed(&self.probs, &other.probs, w)?,
        })
    }

    pub fn total_variation(&self, other: &JointMassFunction) -> Result<f64> {
        self.check_same_domain(other)?;
        tv_distance(&self.probs, &other.probs)
    }

    /// `p(. | f)`; fails when `p(f) = 0`.
    pub fn condition_on_features(&self, features: &[usize]) -> Result<MassFunction> {
        self.domain.check_features(features)?;
        let slice = self.class_slice(features);
        MassFunction::normalize(&slice).map_err(|_| Error::ZeroMarginal(features.to_vec()))
    }

    pub fn marginal_class(&self) -> MassFunction {
        let fs = self.domain.feature_space_size();
        let probs = self.probs.chunks(fs).map(|row| row.iter().sum()).collect();
        MassFunction { probs }
    }

    /// Marginal of feature `i` within the slice of class `c`, normalized.
    /// Returns `None` when the class has zero mass.
    pub fn feature_marginal_given_class(&self, class: usize, feature: usize) -> Option<Vec<f64>> {
        let fs = self.domain.feature_space_size();
        let row = &self.probs[class * fs..(class + 1) * fs];
        let mut out = vec![0.0; self.domain.feature_cards()[feature]];
        for (fi, &p) in row.iter().enumerate() {
            out[self.domain.feature_vector(fi)[feature]] += p;
        }
        normalized(&out).ok()
    }

    /// Largest absolute deviation between the table and the product of its own
    /// class marginal and per-class feature marginals. Zero for tables that
    /// satisfy conditional independence of the features given the class.
    pub fn factorization_residual(&self) -> f64 {
        let fs = self.domain.feature_space_size();
        let marg = self.marginal_class();
        let mut worst: f64 = 0.0;
        for c in 0..self.domain.num_classes() {
            let conds: Vec<Vec<f64>> = (0..self.domain.num_features())
                .map(|i| {
                    self.feature_marginal_given_class(c, i)
                        .unwrap_or_else(|| vec![0.0; self.domain.feature_cards()[i]])
                })
                .collect();
            for fi in 0..fs {
                let f = self.domain.feature_vector(fi);
                let product = f
                    .iter()
                    .enumerate()
                    .fold(marg.get(c), |acc, (i, &v)| acc * conds[i][v]);
                worst = worst.max((self.probs[c * fs + fi] - product).abs());
            }
        }
        worst
    }

    /// `n` i.i.d. labeled draws by inverse CDF over the cell enumeration.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        let instances = inverse_cdf_draws(&self.probs, n, seed)
            .into_iter()
            .map(|cell| {
                let (class, features) = self.domain.decode_cell(cell);
                LabeledInstance { class, features }
            })
            .collect();
        Dataset {
            domain: self.domain.clone(),
            instances,
        }
    }

    /// CSV with header `class,f1,...,fN,prob`, one row per cell in
    /// enumeration order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["class".to_string()];
        header.extend((1..=self.domain.num_features()).map(|i| format!("f{i}")));
        header.push("prob".into());
        w.write_record(&header).map_err(csv_err)?;
        for (cell, &p) in self.probs.iter().enumerate() {
            let (c, f) = self.domain.decode_cell(cell);
            let mut rec = vec![c.to_string()];
            rec.extend(f.iter().map(|v| v.to_string()));
            rec.push(format_f64(p));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv). Cardinalities are inferred
    /// from the largest value in each column; rows must be complete and in
    /// enumeration order.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(csv_err)?.clone();
        let width = header.len();
        if width < 3 || &header[0] != "class" || &header[width - 1] != "prob" {
            return Err(Error::parse(1, "expected header `class,f1,...,fN,prob`"));
        }
        let mut rows: Vec<(Vec<usize>, f64)> = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(csv_err)?;
            if rec.len() != width {
                return Err(Error::parse(line, format!("expected {width} fields")));
            }
            let mut idx = Vec::with_capacity(width - 1);
            for field in rec.iter().take(width - 1) {
                idx.push(parse_index(field, line)?);
            }
            let p: f64 = rec[width - 1]
                .trim()
                .parse()
                .map_err(|_| Error::parse(line, format!("bad probability `{}`", &rec[width - 1])))?;
            rows.push((idx, p));
        }
        if rows.is_empty() {
            return Err(Error::parse(2, "no rows"));
        }
        let cards: Vec<usize> = (0..width - 1)
            .map(|j| rows.iter().map(|(idx, _)| idx[j]).max().unwrap_or(0) + 1)
            .collect();
        let domain = DomainSpec::new(cards[0], cards[1..].to_vec())?;
        if rows.len() != domain.joint_size() {
            return Err(Error::parse(
                rows.len() + 1,
                format!("expected {} rows, got {}", domain.joint_size(), rows.len()),
            ));
        }
        for (cell, (idx, _)) in rows.iter().enumerate() {
            let (c, f) = domain.decode_cell(cell);
            if idx[0] != c || idx[1..] != f[..] {
                return Err(Error::parse(cell + 2, "row out of enumeration order"));
            }
        }
        Self::new(domain, rows.into_iter().map(|(_, p)| p).collect())
    }
}

fn parse_index(field: &str, line: usize) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("bad index `{field}`")))
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::parse(line, e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub class: usize,
    pub features: Vec<usize>,
}

/// Ordered collection of labeled instances over one domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    domain: DomainSpec,
    instances: Vec<LabeledInstance>,
}

impl Dataset {
    pub fn new(domain: DomainSpec, instances: Vec<LabeledInstance>) -> Result<Self> {
        for inst in &instances {
            domain.check_class(inst.class)?;
            domain.check_features(&inst.features)?;
        }
        Ok(Self { domain, instances })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn instances(&self) -> &[LabeledInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Instances at the given positions, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            domain: self.domain.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// CSV with header `class,f1,...,fN`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["class".to_string()];
        header.extend((1..=self.domain.num_features()).map(|i| format!("f{i}")));
        w.write_record(&header).map_err(csv_err)?;
        for inst in &self.instances {
            let mut rec = vec![inst.class.to_string()];
            rec.extend(inst.features.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(domain: DomainSpec, reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(csv_err)?.clone();
        let width = domain.num_features() + 1;
        if header.len() != width || &header[0] != "class" {
            return Err(Error::parse(
                1,
                format!("expected header `class,f1,...,f{}`", domain.num_features()),
            ));
        }
        let mut instances = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(csv_err)?;
            if rec.len() != width {
                return Err(Error::parse(line, format!("expected {width} fields")));
            }
            let class = parse_index(&rec[0], line)?;
            let features = rec
                .iter()
                .skip(1)
                .map(|f| parse_index(f, line))
                .collect::<Result<Vec<_>>>()?;
            domain
                .check_class(class)
                .and_then(|_| domain.check_features(&features))
                .map_err(|e| Error::parse(line, e.to_string()))?;
            instances.push(LabeledInstance { class, features });
        }
        Ok(Self { domain, instances })
    }
}
