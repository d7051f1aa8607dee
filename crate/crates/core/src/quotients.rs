//! Finite quotients: G-cover classes (tuples with product 1 up to
//! simultaneous conjugation), the monodromy action on them, and the degree
//! of each class's field of moduli.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freegroup::{FreeAutomorphism, FreeWord};

pub const DEFAULT_TUPLE_CAP: u128 = 10_000_000;

/// A finite group as a validated Cayley table on `0..order`, with 0 the
/// identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    n: usize,
    table: Vec<usize>,
    inverse: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct TableDoc {
    #[serde(default)]
    name: Option<String>,
    table: Vec<Vec<usize>>,
}

impl FiniteGroup {
    /// Checks closure, identity, inverses and associativity.
    pub fn from_table(name: impl Into<String>, rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotAGroup("table is not square".into()));
        }
        if rows.iter().flatten().any(|&x| x >= n) {
            return Err(Error::NotAGroup(format!("entries must lie in 0..{n}")));
        }
        let table: Vec<usize> = rows.into_iter().flatten().collect();
        let at = |a: usize, b: usize| table[a * n + b];
        for a in 0..n {
            if at(0, a) != a || at(a, 0) != a {
                return Err(Error::NotAGroup(format!("0 is not a two-sided identity (element {a})")));
            }
        }
        let mut inverse = vec![usize::MAX; n];
        #[allow(clippy::needless_range_loop)]
        for a in 0..n {
            match (0..n).find(|&b| at(a, b) == 0 && at(b, a) == 0) {
                Some(b) => inverse[a] = b,
                None => return Err(Error::NotAGroup(format!("element {a} has no inverse"))),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = at(a, b);
                for c in 0..n {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(Error::NotAGroup(format!("associativity fails for ({a}, {b}, {c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { name: name.into(), n, table, inverse })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TableDoc = serde_json::from_str(s).map_err(|e| Error::MalformedInput(e.to_string()))?;
        FiniteGroup::from_table(doc.name.unwrap_or_else(|| "table".into()), doc.table)
    }

    pub fn to_json(&self) -> String {
        let doc = TableDoc {
            name: Some(self.name.clone()),
            table: (0..self.n).map(|a| (0..self.n).map(|b| self.mul(a, b)).collect()).collect(),
        };
        serde_json::to_string(&doc).expect("table serializes")
    }

    /// Built-in groups: `cyclic n`, `dihedral n` (order 2n), `symmetric n`
    /// and `alternating n` (n <= 5), `quaternion 8`. Short forms such as
    /// `z5`, `c5`, `d4`, `s3`, `a4`, `q8` are accepted too.
    pub fn builtin(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownBuiltin(name.to_string());
        let s = name.trim().to_lowercase().replace(['/', '_', '-'], " ");
        let split = s.find(|c: char| c.is_ascii_digit()).ok_or_else(unknown)?;
        let (kind, num) = s.split_at(split);
        let n: usize = num.trim().parse().map_err(|_| unknown())?;
        match kind.trim() {
            "cyclic" | "c" | "z" => cyclic(n),
            "dihedral" | "d" => dihedral(n),
            "symmetric" | "s" if (1..=5).contains(&n) => permutation_group(format!("S{n}"), n, false),
            "alternating" | "a" if (1..=5).contains(&n) => permutation_group(format!("A{n}"), n, true),
            "quaternion" | "q" if n == 8 => quaternion(),
            _ => Err(unknown()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// `h^-1 * g * h`
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(self.inverse[h], g), h)
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Size of the subgroup generated by `gens`.
    pub fn generated_order(&self, gens: &[usize]) -> usize {
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut stack = vec![0];
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count
    }

    /// Evaluates `w` at `x_i -> tuple[i - 1]`.
    pub fn evaluate(&self, w: &FreeWord, tuple: &[usize]) -> usize {
        w.letters().iter().fold(0, |acc, l| {
            let g = tuple[l.index - 1];
            self.mul(acc, if l.inverse { self.inverse[g] } else { g })
        })
    }
}

fn cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::UnknownBuiltin("cyclic 0".into()));
    }
    let rows = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    FiniteGroup::from_table(format!("Z/{n}"), rows)
}

fn dihedral(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::UnknownBuiltin("dihedral 0".into()));
    }
    // index k + n*e stands for r^k s^e, with s r s = r^-1
    let mul = |x: usize, y: usize| {
        let (a, e) = (x % n, x / n);
        let (b, f) = (y % n, y / n);
        let k = if e == 0 { (a + b) % n } else { (a + n - b) % n };
        k + n * ((e + f) % 2)
    };
    let rows = (0..2 * n).map(|x| (0..2 * n).map(|y| mul(x, y)).collect()).collect();
    FiniteGroup::from_table(format!("D{n}"), rows)
}

fn quaternion() -> Result<FiniteGroup> {
    // 2u + s encodes (-1)^s * unit u, units 1, i, j, k
    const UNIT: [[(usize, usize); 4]; 4] = [
        [(0, 0), (1, 0), (2, 0), (3, 0)],
        [(1, 0), (0, 1), (3, 0), (2, 1)],
        [(2, 0), (3, 1), (0, 1), (1, 0)],
        [(3, 0), (2, 0), (1, 1), (0, 1)],
    ];
    let mul = |x: usize, y: usize| {
        let (u, s) = (x / 2, x % 2);
        let (v, t) = (y / 2, y % 2);
        let (w, sign) = UNIT[u][v];
        2 * w + (s + t + sign) % 2
    };
    let rows = (0..8).map(|x| (0..8).map(|y| mul(x, y)).collect()).collect();
    FiniteGroup::from_table("Q8", rows)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn is_even(p: &[usize]) -> bool {
    let inversions: usize = (0..p.len()).map(|i| (i + 1..p.len()).filter(|&j| p[i] > p[j]).count()).sum();
    inversions.is_multiple_of(2)
}

/// Permutations in lexicographic order (identity first); product is
/// composition `(a * b)(i) = a(b(i))`.
fn permutation_group(name: String, n: usize, even_only: bool) -> Result<FiniteGroup> {
    let elems: Vec<Vec<usize>> = permutations(n).into_iter().filter(|p| !even_only || is_even(p)).collect();
    let index = |p: &Vec<usize>| elems.iter().position(|q| q == p).expect("closed under composition");
    let rows = elems
        .iter()
        .map(|a| {
            elems
                .iter()
                .map(|b| index(&b.iter().map(|&i| a[i]).collect()))
                .collect()
        })
        .collect();
    FiniteGroup::from_table(name, rows)
}

/// A built-in name or a path to a Cayley-table JSON document.
pub fn load_group(name_or_path: &str) -> Result<FiniteGroup> {
    let path = Path::new(name_or_path);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::MalformedInput(format!("{name_or_path}: {e}")))?;
        FiniteGroup::from_json(&text)
    } else {
        FiniteGroup::builtin(name_or_path)
    }
}

/// Center of `g` and the exponent of `g / Z(g)`.
pub fn center_and_exponent(g: &FiniteGroup) -> (Vec<usize>, u64) {
    let n = g.order();
    let center: Vec<usize> = (0..n).filter(|&z| (0..n).all(|a| g.mul(z, a) == g.mul(a, z))).collect();
    let mut in_center = vec![false; n];
    for &z in &center {
        in_center[z] = true;
    }
    let coset_order = |a: usize| {
        let mut x = a;
        let mut k = 1u64;
        while !in_center[x] {
            x = g.mul(x, a);
            k += 1;
        }
        k
    };
    let exponent = (0..n).map(coset_order).fold(1, num_integer::lcm);
    (center, exponent)
}

/// Refuses groups whose order is divisible by the residue characteristic.
pub fn check_prime_to_p(g: &FiniteGroup, p: u64) -> Result<()> {
    if p != 0 && (g.order() as u64).is_multiple_of(p) {
        return Err(Error::PrimeToPViolation { order: g.order(), p });
    }
    Ok(())
}

/// A tuple `(g_1, ..., g_d)` with product 1, stored as the lexicographically
/// least member of its simultaneous-conjugation orbit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoverClass {
    pub representative: Vec<usize>,
}

impl CoverClass {
    /// Canonicalizes an arbitrary tuple with product 1.
    pub fn from_tuple(g: &FiniteGroup, tuple: &[usize]) -> Self {
        CoverClass { representative: canonical_tuple(g, tuple) }
    }

    pub fn generates(&self, g: &FiniteGroup) -> bool {
        g.generated_order(&self.representative) == g.order()
    }
}

fn conjugate_tuple(g: &FiniteGroup, tuple: &[usize], h: usize) -> Vec<usize> {
    tuple.iter().map(|&x| g.conj(x, h)).collect()
}

pub fn canonical_tuple(g: &FiniteGroup, tuple: &[usize]) -> Vec<usize> {
    (0..g.order())
        .map(|h| conjugate_tuple(g, tuple, h))
        .min()
        .expect("group is nonempty")
}

fn is_canonical(g: &FiniteGroup, tuple: &[usize]) -> bool {
    (1..g.order()).all(|h| {
        for &x in tuple {
            let y = g.conj(x, h);
            if y != x {
                return y > x;
            }
        }
        true
    })
}

fn tuple_count(g: &FiniteGroup, d: usize) -> u128 {
    (g.order() as u128).saturating_pow(d.saturating_sub(1) as u32)
}

/// Enumeration options.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub surjective_only: bool,
    pub max_tuples: u128,
    pub threads: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { surjective_only: true, max_tuples: DEFAULT_TUPLE_CAP, threads: 1 }
    }
}

/// Canonical classes whose tuples start with `first`, in lexicographic order.
fn classes_with_prefix(g: &FiniteGroup, d: usize, first: usize, surjective_only: bool) -> Vec<CoverClass> {
    let n = g.order();
    let mut out = Vec::new();
    let mut free = vec![0usize; d - 1];
    free[0] = first;
    loop {
        let prod = free.iter().fold(0, |acc, &x| g.mul(acc, x));
        let mut tuple = free.clone();
        tuple.push(g.inv(prod));
        let keep = is_canonical(g, &tuple) && (!surjective_only || g.generated_order(&tuple) == n);
        if keep {
            out.push(CoverClass { representative: tuple });
        }
        // odometer over positions 1..d-1 of the free part
        let mut pos = d - 2;
        loop {
            if pos == 0 {
                return out;
            }
            free[pos] += 1;
            if free[pos] < n {
                break;
            }
            free[pos] = 0;
            pos -= 1;
        }
    }
}

/// All cover classes of `d`-tuples in `g`, sorted by representative.
pub fn enumerate_classes(g: &FiniteGroup, d: usize, opts: EnumerationOptions) -> Result<Vec<CoverClass>> {
    if d < 2 {
        return Err(Error::MalformedInput(format!("need at least 2 branch points, got {d}")));
    }
    let tuples = tuple_count(g, d);
    if tuples > opts.max_tuples {
        return Err(Error::SizeLimit { tuples, cap: opts.max_tuples });
    }
    let n = g.order();
    let threads = opts.threads.clamp(1, n);
    let per_first: Vec<Vec<CoverClass>> = if threads == 1 {
        (0..n).map(|first| classes_with_prefix(g, d, first, opts.surjective_only)).collect()
    } else {
        let mut slots: Vec<Vec<CoverClass>> = vec![Vec::new(); n];
        std::thread::scope(|s| {
            for (t, chunk) in slots.chunks_mut(n.div_ceil(threads)).enumerate() {
                let base = t * n.div_ceil(threads);
                s.spawn(move || {
                    for (k, slot) in chunk.iter_mut().enumerate() {
                        *slot = classes_with_prefix(g, d, base + k, opts.surjective_only);
                    }
                });
            }
        });
        slots
    };
    Ok(per_first.into_iter().flatten().collect())
}

fn check_dims(c: &CoverClass, a: &FreeAutomorphism) -> Result<()> {
    if c.representative.len() != a.rank() {
        return Err(Error::DimensionMismatch { expected: a.rank(), found: c.representative.len() });
    }
    Ok(())
}

/// The tuple `(phi(a(x_1)), ..., phi(a(x_d)))` where `phi(x_i) = g_i`.
pub fn act_on_tuple(tuple: &[usize], a: &FreeAutomorphism, g: &FiniteGroup) -> Vec<usize> {
    a.images().iter().map(|w| g.evaluate(w, tuple)).collect()
}

/// Image of a class under the monodromy automorphism.
pub fn delta_on_class(c: &CoverClass, a: &FreeAutomorphism, g: &FiniteGroup) -> Result<CoverClass> {
    check_dims(c, a)?;
    Ok(CoverClass::from_tuple(g, &act_on_tuple(&c.representative, a, g)))
}

/// Least `N >= 1` with `delta^N` fixing the class.
pub fn moduli_degree(c: &CoverClass, a: &FreeAutomorphism, g: &FiniteGroup) -> Result<u64> {
    check_dims(c, a)?;
    let mut seen = HashSet::new();
    let mut cur = delta_on_class(c, a, g)?;
    let mut n = 1;
    while cur != *c {
        if !seen.insert(cur.clone()) {
            return Err(Error::MalformedInput("automorphism does not permute cover classes".into()));
        }
        cur = delta_on_class(&cur, a, g)?;
        n += 1;
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDegree {
    pub representative: Vec<usize>,
    pub degree: u64,
}

/// Per-class degrees and the divisibility verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub schema_version: u32,
    pub group: String,
    pub order: usize,
    pub center_order: usize,
    pub exponent_mod_center: u64,
    pub d: usize,
    pub p: u64,
    pub surjective_only: bool,
    pub classes: Vec<ClassDegree>,
    pub max_degree: u64,
    pub all_divide: bool,
    pub verdict: String,
}

impl OrbitReport {
    fn describe(&self) -> String {
        if self.all_divide {
            format!("all degrees divide {}", self.exponent_mod_center)
        } else {
            let bad = self.classes.iter().filter(|c| !self.exponent_mod_center.is_multiple_of(c.degree)).count();
            format!("{bad} classes have degree not dividing {}", self.exponent_mod_center)
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("representative,degree\n");
        for c in &self.classes {
            let rep: Vec<String> = c.representative.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("{},{}\n", rep.join(" "), c.degree));
        }
        out
    }
}

/// Enumerates classes and measures every field-of-moduli degree.
pub fn orbit_report(g: &FiniteGroup, a: &FreeAutomorphism, p: u64, opts: EnumerationOptions) -> Result<OrbitReport> {
    check_prime_to_p(g, p)?;
    let d = a.rank();
    let (center, exponent) = center_and_exponent(g);
    let classes = enumerate_classes(g, d, opts)?;
    let mut out = Vec::with_capacity(classes.len());
    for c in &classes {
        out.push(ClassDegree { representative: c.representative.clone(), degree: moduli_degree(c, a, g)? });
    }
    let max_degree = out.iter().map(|c| c.degree).max().unwrap_or(1);
    let all_divide = out.iter().all(|c| exponent % c.degree == 0);
    let mut report = OrbitReport {
        schema_version: crate::SCHEMA_VERSION,
        group: g.name().to_string(),
        order: g.order(),
        center_order: center.len(),
        exponent_mod_center: exponent,
        d,
        p,
        surjective_only: opts.surjective_only,
        classes: out,
        max_degree,
        all_divide,
        verdict: String::new(),
    };
    report.verdict = report.describe();
    Ok(report)
}
