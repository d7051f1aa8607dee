//! The monodromy automorphism as a product of cluster Dehn twists, and the
//! resulting presentation
//!
//! ```text
//! < x1, ..., xd, delta | x1*...*xd = 1, delta^-1*xi*delta = w_i >
//! ```
//!
//! whose prime-to-p completion is the fundamental group of the punctured
//! line over the local field.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::clusters::{compute_clusters, Cluster, ClusterForest};
use crate::error::{Error, Result};
use crate::freegroup::{FreeAutomorphism, FreeWord, Letter};
use crate::intersection::{canonical_order, compute_matrix, BranchInput};

/// Dehn twist about the circle enclosing the cluster: generators in the
/// interval are conjugated by the product of the interval's generators.
pub fn dehn_twist_automorphism(c: &Cluster, d: usize) -> Result<FreeAutomorphism> {
    if c.len == 0 || c.start == 0 || c.end() > d {
        return Err(Error::IntervalOutOfRange { start: c.start, len: c.len, rank: d });
    }
    let product = FreeWord::product_range(c.start, c.len);
    let images = (1..=d)
        .map(|i| {
            let x = FreeWord::generator(i);
            if c.contains_index(i) {
                x.conjugate_by(&product)
            } else {
                x
            }
        })
        .collect();
    FreeAutomorphism::new(images)
}

/// Composite of the twists of all clusters, in forest order
/// (`D_1 ∘ D_2 ∘ ... ∘ D_k`). The twists commute, so the order is immaterial.
pub fn monodromy_automorphism(f: &ClusterForest) -> FreeAutomorphism {
    compose_twists(f.d, &f.clusters)
}

/// Composite of the twists of `clusters` in the given order.
pub fn compose_twists(d: usize, clusters: &[Cluster]) -> FreeAutomorphism {
    clusters.iter().rev().fold(FreeAutomorphism::identity(d), |acc, c| {
        dehn_twist_automorphism(c, d)
            .and_then(|t| t.compose(&acc))
            .expect("forest clusters fit inside d")
    })
}

/// Context carried along with a presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationMetadata {
    /// Residue characteristic, 0 when unknown or in equal characteristic 0.
    pub p: u64,
    /// Labels of the original points, in input order.
    pub labels: Vec<String>,
    /// `order[k]` is the 1-based input index of the point behind `x_{k+1}`.
    pub order: Vec<usize>,
}

impl PresentationMetadata {
    pub fn unlabelled(d: usize, p: u64) -> Self {
        PresentationMetadata {
            p,
            labels: (1..=d).map(|i| format!("P{i}")).collect(),
            order: (1..=d).collect(),
        }
    }
}

/// Validates a branch-point document, puts it in canonical order and returns
/// its clusters together with the metadata linking generators to points.
pub fn prepare(input: &BranchInput) -> Result<(ClusterForest, PresentationMetadata)> {
    let m = compute_matrix(input)?;
    let (order, sorted) = canonical_order(&m);
    let forest = compute_clusters(&sorted)?;
    let metadata = PresentationMetadata {
        p: input.p.unwrap_or(0),
        labels: input.labels(),
        order: order.iter().map(|i| i + 1).collect(),
    };
    Ok((forest, metadata))
}

/// A power of a positive word, used only to display conjugators compactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerFactor {
    pub base: FreeWord,
    pub exponent: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    /// `x1 * ... * xd = 1`
    Product(FreeWord),
    /// `delta^-1 * x_i * delta = image`, displayed as
    /// `c * x_i * c^-1` with `c` a product of powers.
    Conjugation { generator: usize, image: FreeWord, conjugator: Vec<PowerFactor> },
    /// `[delta, x_i] = 1`
    Commutator { generator: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub d: usize,
    pub relations: Vec<Relation>,
    pub metadata: PresentationMetadata,
}

/// Conjugator of `x_i` under the composite twist: the interval products of
/// the clusters containing `i`, outermost first, with repeats grouped.
fn display_conjugator(f: &ClusterForest, i: usize) -> Vec<PowerFactor> {
    let mut out: Vec<PowerFactor> = Vec::new();
    for c in f.containing(i) {
        let base = FreeWord::product_range(c.start, c.len);
        match out.last_mut() {
            Some(last) if last.base == base => last.exponent += 1,
            _ => out.push(PowerFactor { base, exponent: 1 }),
        }
    }
    out
}

fn expand(factors: &[PowerFactor]) -> FreeWord {
    factors
        .iter()
        .fold(FreeWord::identity(), |acc, f| acc.mul(&f.base.pow(f.exponent)))
}

/// Builds the presentation. Relations are only freely reduced; the product
/// relation is never used to simplify the others.
pub fn emit_presentation(f: &ClusterForest, metadata: PresentationMetadata) -> Presentation {
    let d = f.d;
    let a = monodromy_automorphism(f);
    let mut relations = vec![Relation::Product(FreeWord::product_range(1, d))];
    for i in 1..=d {
        let image = a.image(i).clone();
        if image == FreeWord::generator(i) {
            relations.push(Relation::Commutator { generator: i });
        } else {
            let conjugator = display_conjugator(f, i);
            debug_assert_eq!(FreeWord::generator(i).conjugate_by(&expand(&conjugator)), image);
            relations.push(Relation::Conjugation { generator: i, image, conjugator });
        }
    }
    Presentation { d, relations, metadata }
}

fn render_factor(f: &PowerFactor, sign: i64) -> String {
    let body = if f.base.len() == 1 { f.base.to_string() } else { format!("({})", f.base) };
    match f.exponent * sign {
        1 => body,
        e => format!("{body}^{e}"),
    }
}

/// Word over `x1..xd` plus `delta` (encoded as generator `d + 1`).
fn render_with_delta(w: &FreeWord, d: usize) -> String {
    if w.is_identity() {
        return "1".into();
    }
    w.letters()
        .iter()
        .map(|l| {
            let name = if l.index == d + 1 { "delta".to_string() } else { format!("x{}", l.index) };
            if l.inverse {
                format!("{name}^-1")
            } else {
                name
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

impl Relation {
    pub fn lhs(&self) -> String {
        match self {
            Relation::Product(w) => w.to_string(),
            Relation::Conjugation { generator, .. } => format!("delta^-1*x{generator}*delta"),
            Relation::Commutator { generator } => format!("[delta, x{generator}]"),
        }
    }

    /// Right-hand side with conjugators shown as powers.
    pub fn display_rhs(&self) -> String {
        match self {
            Relation::Product(_) | Relation::Commutator { .. } => "1".into(),
            Relation::Conjugation { generator, conjugator, .. } => {
                let left: Vec<String> = conjugator.iter().map(|f| render_factor(f, 1)).collect();
                let right: Vec<String> = conjugator.iter().rev().map(|f| render_factor(f, -1)).collect();
                format!("{}*x{generator}*{}", left.join("*"), right.join("*"))
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Relation::Product(_) => "product",
            Relation::Conjugation { .. } => "conjugation",
            Relation::Commutator { .. } => "commutator",
        }
    }

    /// The relation as a single reduced word equal to 1, with `delta` as
    /// generator `d + 1`. Commutators use `[a, b] = a^-1 b^-1 a b`.
    pub fn relator(&self, d: usize) -> FreeWord {
        let delta = FreeWord::generator(d + 1);
        match self {
            Relation::Product(w) => w.clone(),
            Relation::Conjugation { generator, image, .. } => delta
                .inverse()
                .mul(&FreeWord::generator(*generator))
                .mul(&delta)
                .mul(&image.inverse()),
            Relation::Commutator { generator } => {
                let x = FreeWord::generator(*generator);
                delta.inverse().mul(&x.inverse()).mul(&delta).mul(&x)
            }
        }
    }
}

/// One relation in the JSON document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDoc {
    pub kind: String,
    pub lhs: String,
    pub rhs: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointDoc {
    pub generator: String,
    pub input_index: usize,
    pub label: String,
}

/// JSON form of a presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationDoc {
    pub schema_version: u32,
    pub p: u64,
    pub points: Vec<PointDoc>,
    pub generators: Vec<String>,
    pub relations: Vec<RelationDoc>,
}

impl Presentation {
    pub fn generators(&self) -> Vec<String> {
        (1..=self.d).map(|i| format!("x{i}")).chain(["delta".to_string()]).collect()
    }

    /// The image of `x_i` under the monodromy automorphism.
    pub fn image(&self, i: usize) -> FreeWord {
        self.relations
            .iter()
            .find_map(|r| match r {
                Relation::Conjugation { generator, image, .. } if *generator == i => Some(image.clone()),
                Relation::Commutator { generator } if *generator == i => Some(FreeWord::generator(i)),
                _ => None,
            })
            .expect("every generator has a relation")
    }

    pub fn automorphism(&self) -> FreeAutomorphism {
        FreeAutomorphism::new((1..=self.d).map(|i| self.image(i)).collect()).expect("images in range")
    }

    /// Human-readable form, one relation per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(out, "# residue characteristic p = {}", m.p);
        for (k, &orig) in m.order.iter().enumerate() {
            let _ = writeln!(out, "# x{} <- point {} ({})", k + 1, orig, m.labels[orig - 1]);
        }
        let _ = writeln!(out, "< {} |", self.generators().join(", "));
        let n = self.relations.len();
        for (idx, r) in self.relations.iter().enumerate() {
            let sep = if idx + 1 == n { " >" } else { "," };
            let _ = writeln!(out, "  {} = {}{}", r.lhs(), r.display_rhs(), sep);
        }
        out
    }

    pub fn to_doc(&self) -> PresentationDoc {
        let m = &self.metadata;
        PresentationDoc {
            schema_version: crate::SCHEMA_VERSION,
            p: m.p,
            points: m
                .order
                .iter()
                .enumerate()
                .map(|(k, &orig)| PointDoc {
                    generator: format!("x{}", k + 1),
                    input_index: orig,
                    label: m.labels[orig - 1].clone(),
                })
                .collect(),
            generators: self.generators(),
            relations: self
                .relations
                .iter()
                .map(|r| match r {
                    Relation::Conjugation { image, .. } => RelationDoc {
                        kind: r.kind().into(),
                        lhs: r.lhs(),
                        rhs: image.to_string(),
                        display: Some(r.display_rhs()),
                    },
                    _ => RelationDoc { kind: r.kind().into(), lhs: r.lhs(), rhs: "1".into(), display: None },
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("presentation serializes") + "\n"
    }

    /// Flat relator list, one word per line, for computer algebra systems.
    pub fn to_relators(&self) -> String {
        let mut out = String::new();
        for r in &self.relations {
            out.push_str(&render_with_delta(&r.relator(self.d), self.d));
            out.push('\n');
        }
        out
    }
}

/// Reads a relator line back into a word over `x1..xd, delta`.
pub fn parse_relator(s: &str, d: usize) -> Result<FreeWord> {
    let replaced = s.replace("delta", &format!("x{}", d + 1));
    let w: FreeWord = replaced.parse()?;
    if w.letters().iter().any(|l: &Letter| l.index > d + 1) {
        return Err(Error::IndexOutOfRange { index: w.max_index(), rank: d + 1 });
    }
    Ok(w)
}
