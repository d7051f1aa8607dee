//! Branch-point input and the matrix of pairwise intersection multiplicities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{valuation, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    Padic,
    Series,
    Matrix,
}

/// Points given either as rationals (p-adic mode), as truncated power series
/// with rational coefficients (series mode), or as a ready-made matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Points {
    Rationals(Vec<Rational>),
    Series(Vec<Vec<Rational>>),
}

/// The JSON input document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchInput {
    pub mode: InputMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Points>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

impl BranchInput {
    pub fn padic(p: u64, points: Vec<Rational>) -> Self {
        BranchInput {
            mode: InputMode::Padic,
            p: Some(p),
            points: Some(Points::Rationals(points)),
            matrix: None,
            truncation: None,
        }
    }

    pub fn series(truncation: usize, points: Vec<Vec<Rational>>) -> Self {
        BranchInput {
            mode: InputMode::Series,
            p: None,
            points: Some(Points::Series(points)),
            matrix: None,
            truncation: Some(truncation),
        }
    }

    pub fn matrix(matrix: Vec<Vec<u32>>) -> Self {
        BranchInput { mode: InputMode::Matrix, p: None, points: None, matrix: Some(matrix), truncation: None }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::MalformedInput(e.to_string()))
    }

    /// Number of branch points.
    pub fn len(&self) -> usize {
        match (&self.points, &self.matrix) {
            (Some(Points::Rationals(v)), _) => v.len(),
            (Some(Points::Series(v)), _) => v.len(),
            (None, Some(m)) => m.len(),
            _ => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Display labels for the points, in input order.
    pub fn labels(&self) -> Vec<String> {
        match &self.points {
            Some(Points::Rationals(v)) => v.iter().map(|q| q.to_string()).collect(),
            Some(Points::Series(v)) => v
                .iter()
                .map(|cs| cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
                .map(|s| format!("[{s}]"))
                .collect(),
            None => (1..=self.len()).map(|i| format!("P{i}")).collect(),
        }
    }
}

/// Symmetric matrix of intersection multiplicities. The diagonal is ignored
/// and stored as 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntersectionMatrix {
    entries: Vec<Vec<u32>>,
}

impl IntersectionMatrix {
    /// Validates shape, symmetry and the ultrametric rule.
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        let d = rows.len();
        if d < 2 {
            return Err(Error::MalformedInput(format!("need at least 2 points, got {d}")));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::MalformedInput(format!("row {} has length {}, expected {d}", r + 1, rows[r].len())));
        }
        let mut entries = rows;
        #[allow(clippy::needless_range_loop)]
        for i in 0..d {
            entries[i][i] = 0;
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::MalformedInput(format!(
                        "matrix not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let m = IntersectionMatrix { entries };
        m.check_ultrametric()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Entry for 0-based indices `i != j`.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.entries
    }

    pub fn max_entry(&self) -> u32 {
        self.entries.iter().flatten().copied().max().unwrap_or(0)
    }

    /// The two-minima rule on every triple of distinct indices.
    pub fn check_ultrametric(&self) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let (a, b, c) = (self.get(i, j), self.get(i, k), self.get(j, k));
                    let min = a.min(b).min(c);
                    let hits = [a, b, c].iter().filter(|&&v| v == min).count();
                    if hits < 2 {
                        return Err(Error::UltrametricViolation {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                            detail: format!(
                                "e[{}][{}]={a}, e[{}][{}]={b}, e[{}][{}]={c}: minimum attained once",
                                i + 1,
                                j + 1,
                                i + 1,
                                k + 1,
                                j + 1,
                                k + 1
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Reindexes so that new index `k` is old index `order[k]` (0-based).
    pub fn reindex(&self, order: &[usize]) -> Self {
        let entries = order
            .iter()
            .map(|&i| order.iter().map(|&j| if i == j { 0 } else { self.entries[i][j] }).collect())
            .collect();
        IntersectionMatrix { entries }
    }

    /// Every cluster is a contiguous block: for each row, entries to the right
    /// of the diagonal are weakly decreasing.
    pub fn is_interval_ordered(&self) -> bool {
        let d = self.dim();
        (0..d).all(|m| (m + 1..d.saturating_sub(1)).all(|i| self.get(m, i) >= self.get(m, i + 1)))
    }
}

/// Intersection matrix of exactly known polynomials or series: the index of
/// the first differing coefficient (missing coefficients are zero).
pub fn series_matrix(coeffs: &[Vec<Rational>]) -> Result<IntersectionMatrix> {
    let d = coeffs.len();
    let mut e = vec![vec![0u32; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let n = coeffs[i].len().max(coeffs[j].len());
            let zero = Rational::zero();
            let at = |v: &Vec<Rational>, k: usize| v.get(k).unwrap_or(&zero).clone();
            let first = (0..n).find(|&k| at(&coeffs[i], k) != at(&coeffs[j], k));
            match first {
                Some(k) => {
                    e[i][j] = k as u32;
                    e[j][i] = k as u32;
                }
                None => return Err(Error::DuplicatePoint { i: i + 1, j: j + 1 }),
            }
        }
    }
    IntersectionMatrix::new(e)
}

/// Builds and validates the intersection matrix of `input`.
pub fn compute_matrix(input: &BranchInput) -> Result<IntersectionMatrix> {
    let d = input.len();
    if d < 2 {
        return Err(Error::MalformedInput(format!("need at least 2 points, got {d}")));
    }
    match input.mode {
        InputMode::Matrix => {
            let m = input
                .matrix
                .clone()
                .ok_or_else(|| Error::MalformedInput("matrix mode requires \"matrix\"".into()))?;
            IntersectionMatrix::new(m)
        }
        InputMode::Padic => {
            let p = input
                .p
                .ok_or_else(|| Error::MalformedInput("p-adic mode requires \"p\"".into()))?;
            if p < 2 || !is_prime(p) {
                return Err(Error::MalformedInput(format!("p = {p} is not prime")));
            }
            let Some(Points::Rationals(pts)) = &input.points else {
                return Err(Error::MalformedInput("p-adic mode requires a list of rational points".into()));
            };
            for (idx, q) in pts.iter().enumerate() {
                if let Some(v) = valuation(&q.0, p) {
                    if v < 0 {
                        return Err(Error::NonIntegralPoint { index: idx + 1, valuation: v });
                    }
                }
            }
            let mut e = vec![vec![0u32; d]; d];
            for i in 0..d {
                for j in i + 1..d {
                    let diff = &pts[i].0 - &pts[j].0;
                    let v = valuation(&diff, p).ok_or(Error::DuplicatePoint { i: i + 1, j: j + 1 })?;
                    e[i][j] = v as u32;
                    e[j][i] = v as u32;
                }
            }
            IntersectionMatrix::new(e)
        }
        InputMode::Series => {
            let t = input
                .truncation
                .ok_or_else(|| Error::MalformedInput("series mode requires \"truncation\"".into()))?;
            if t == 0 {
                return Err(Error::MalformedInput("truncation must be at least 1".into()));
            }
            let Some(Points::Series(cs)) = &input.points else {
                return Err(Error::MalformedInput("series mode requires coefficient lists".into()));
            };
            if let Some(i) = cs.iter().position(|c| c.len() != t) {
                return Err(Error::MalformedInput(format!(
                    "point {} has {} coefficients, expected {t}",
                    i + 1,
                    cs[i].len()
                )));
            }
            series_matrix(cs).map_err(|e| match e {
                Error::DuplicatePoint { i, j } => Error::IndistinguishableTruncation { i, j, truncation: t },
                other => other,
            })
        }
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

/// Permutation putting the matrix in interval order, and the reindexed
/// matrix. `order[k]` is the original (0-based) index placed at position `k`.
///
/// Among all orders in which every cluster is contiguous this returns the
/// lexicographically least: children of each node of the cluster tree are
/// visited by increasing smallest member.
pub fn canonical_order(m: &IntersectionMatrix) -> (Vec<usize>, IntersectionMatrix) {
    fn visit(m: &IntersectionMatrix, members: &[usize], depth: u32, out: &mut Vec<usize>) {
        if members.len() == 1 {
            out.push(members[0]);
            return;
        }
        // blocks of the relation e >= depth; members is sorted so blocks come
        // out ordered by their least element
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for &i in members {
            let found = blocks.iter().position(|b| m.get(b[0], i) >= depth);
            match found {
                Some(bi) => blocks[bi].push(i),
                None => blocks.push(vec![i]),
            }
        }
        if blocks.len() == 1 {
            visit(m, members, depth + 1, out);
        } else {
            for b in &blocks {
                visit(m, b, depth + 1, out);
            }
        }
    }
    let members: Vec<usize> = (0..m.dim()).collect();
    let mut order = Vec::with_capacity(m.dim());
    // depth 0 splits nothing; start at 1
    visit(m, &members, 1, &mut order);
    let reindexed = m.reindex(&order);
    (order, reindexed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rats(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&n| Rational::from_integer(n)).collect()
    }

    #[test]
    fn padic_example_two() {
        let m = compute_matrix(&BranchInput::padic(3, rats(&[0, 3, 1, 2]))).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let want = if (i, j) == (0, 1) || (i, j) == (1, 0) { 1 } else { 0 };
                    assert_eq!(m.get(i, j), want, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn padic_distinct_residues() {
        let m = compute_matrix(&BranchInput::padic(5, rats(&[0, 1, 2]))).unwrap();
        assert_eq!(m.max_entry(), 0);
    }

    #[test]
    fn padic_rationals_and_errors() {
        let pts = vec![Rational::new(1, 2), Rational::new(7, 2), Rational::from_integer(0)];
        let m = compute_matrix(&BranchInput::padic(3, pts)).unwrap();
        assert_eq!(m.get(0, 1), 1);
        let bad = BranchInput::padic(3, vec![Rational::new(1, 3), Rational::zero()]);
        assert_eq!(compute_matrix(&bad), Err(Error::NonIntegralPoint { index: 1, valuation: -1 }));
        let dup = BranchInput::padic(3, rats(&[4, 4]));
        assert_eq!(compute_matrix(&dup), Err(Error::DuplicatePoint { i: 1, j: 2 }));
        let notprime = BranchInput::padic(9, rats(&[0, 1]));
        assert!(matches!(compute_matrix(&notprime), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn matrix_mode_rejects_single_minimum() {
        let m = vec![vec![0, 2, 0], vec![2, 0, 1], vec![0, 1, 0]];
        let err = compute_matrix(&BranchInput::matrix(m)).unwrap_err();
        assert_eq!(err.code(), "ULTRAMETRIC_VIOLATION");
        // brute check of the triple: min of {2, 0, 1} is 0, attained once
        let vals = [2u32, 0, 1];
        let min = *vals.iter().min().unwrap();
        assert_eq!(vals.iter().filter(|&&v| v == min).count(), 1);
    }

    #[test]
    fn matrix_mode_shape_errors() {
        assert!(compute_matrix(&BranchInput::matrix(vec![vec![0]])).is_err());
        assert!(compute_matrix(&BranchInput::matrix(vec![vec![0, 1], vec![2, 0]])).is_err());
        assert!(compute_matrix(&BranchInput::matrix(vec![vec![0, 1], vec![1]])).is_err());
    }

    #[test]
    fn series_mode() {
        let pts = vec![rats(&[0, 0, 0]), rats(&[0, 0, 1]), rats(&[0, 1, 0])];
        let m = compute_matrix(&BranchInput::series(3, pts)).unwrap();
        assert_eq!((m.get(0, 1), m.get(0, 2), m.get(1, 2)), (2, 1, 1));

        let pts = vec![rats(&[0, 1]), rats(&[0, 1])];
        assert_eq!(
            compute_matrix(&BranchInput::series(2, pts)),
            Err(Error::IndistinguishableTruncation { i: 1, j: 2, truncation: 2 })
        );
        let ragged = vec![rats(&[0, 1]), rats(&[0])];
        assert!(matches!(compute_matrix(&BranchInput::series(2, ragged)), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn json_documents() {
        let doc = r#"{"mode": "padic", "p": 3, "points": ["0", 9, "1/2", 2]}"#;
        let input = BranchInput::from_json(doc).unwrap();
        assert_eq!(input.len(), 4);
        assert_eq!(compute_matrix(&input).unwrap().get(0, 1), 2);

        let doc = r#"{"mode": "series", "truncation": 2, "points": [["0", "1"], [0, 0]]}"#;
        let input = BranchInput::from_json(doc).unwrap();
        assert_eq!(compute_matrix(&input).unwrap().get(0, 1), 1);

        let doc = r#"{"mode": "matrix", "matrix": [[0, 1], [1, 0]]}"#;
        let input = BranchInput::from_json(doc).unwrap();
        assert_eq!(input.labels(), vec!["P1", "P2"]);

        assert!(BranchInput::from_json(r#"{"mode": "other"}"#).is_err());
        assert!(BranchInput::from_json(r#"{"mode": "matrix", "bogus": 1}"#).is_err());
    }

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out.sort();
        out
    }

    fn brute_canonical(m: &IntersectionMatrix) -> Vec<usize> {
        all_perms(m.dim()).into_iter().find(|p| m.reindex(p).is_interval_ordered()).unwrap()
    }

    #[test]
    fn canonical_order_examples() {
        let m = IntersectionMatrix::new(vec![vec![0, 0, 2], vec![0, 0, 0], vec![2, 0, 0]]).unwrap();
        let (order, re) = canonical_order(&m);
        assert_eq!(order, brute_canonical(&m));
        assert_eq!(order, vec![0, 2, 1]);
        assert_eq!(re.get(0, 1), 2);

        let ex2 = compute_matrix(&BranchInput::padic(3, rats(&[0, 3, 1, 2]))).unwrap();
        assert_eq!(canonical_order(&ex2).0, vec![0, 1, 2, 3]);

        let zero = IntersectionMatrix::new(vec![vec![0; 4]; 4]).unwrap();
        assert_eq!(canonical_order(&zero).0, vec![0, 1, 2, 3]);
    }

    /// Random ultrametric matrices from common-prefix lengths of digit strings.
    fn prefix_matrix(strings: &[Vec<u8>]) -> IntersectionMatrix {
        let d = strings.len();
        let mut e = vec![vec![0; d]; d];
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    e[i][j] = strings[i].iter().zip(&strings[j]).take_while(|(a, b)| a == b).count() as u32;
                }
            }
        }
        IntersectionMatrix::new(e).unwrap()
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn canonical_matches_brute_force(strings in prop::collection::vec(prop::collection::vec(0u8..3, 3), 2..7)) {
            let m = prefix_matrix(&strings);
            let (order, re) = canonical_order(&m);
            prop_assert_eq!(&order, &brute_canonical(&m));
            prop_assert!(re.is_interval_ordered());
            let (again, _) = canonical_order(&re);
            prop_assert_eq!(again, (0..m.dim()).collect::<Vec<_>>());
        }

        #[test]
        fn padic_matrices_are_ultrametric(pts in prop::collection::btree_set(0i64..500, 2..8)) {
            let pts: Vec<Rational> = pts.into_iter().map(Rational::from_integer).collect();
            let m = compute_matrix(&BranchInput::padic(3, pts));
            prop_assert!(m.is_ok());
        }
    }
}
