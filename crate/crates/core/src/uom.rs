//! Symbolic orthogonal matrices for multiqubit product sets.
//!
//! Each row lists the local states of one product vector using the symbols
//! `0, 1` (computational pair) and `x, x'` for `x ∈ {a, b, c, d}`. Two rows
//! are orthogonal exactly when some column holds the two members of one pair.
//! Letters bind to angles per letter: `|x> = cos θ|0> + sin θ|1>`,
//! `|x'> = sin θ|0> - cos θ|1>`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::basis::{check_pairwise_orthogonality, PartyLayout, ProductBasis, ProductVector, ORTHO_TOL};
use crate::error::{Error, Result};
use crate::linalg::Ket;

/// An orthonormal pair of qubit states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pair {
    /// `{|0>, |1>}`; the primed member is `|1>`.
    Computational,
    /// `{|x>, |x'>}` for a letter in `a..=d`.
    Letter(char),
}

impl Pair {
    pub const LETTERS: [char; 4] = ['a', 'b', 'c', 'd'];

    pub fn letter(c: char) -> Option<Pair> {
        Self::LETTERS.contains(&c).then_some(Pair::Letter(c))
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pair::Computational => write!(f, "01"),
            Pair::Letter(c) => write!(f, "{c}"),
        }
    }
}

impl Serialize for Pair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Pair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "01" => Ok(Pair::Computational),
            _ => {
                let mut chars = s.chars();
                match (chars.next().and_then(Pair::letter), chars.next()) {
                    (Some(p), None) => Ok(p),
                    _ => Err(serde::de::Error::custom(format!("unknown pair {s:?}"))),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub pair: Pair,
    pub primed: bool,
}

impl Symbol {
    pub const ZERO: Symbol = Symbol {
        pair: Pair::Computational,
        primed: false,
    };
    pub const ONE: Symbol = Symbol {
        pair: Pair::Computational,
        primed: true,
    };

    pub fn letter(c: char, primed: bool) -> Option<Symbol> {
        Pair::letter(c).map(|pair| Symbol { pair, primed })
    }

    /// The other member of the pair.
    pub fn partner(self) -> Symbol {
        Symbol {
            primed: !self.primed,
            ..self
        }
    }

    pub fn is_orthogonal_to(self, other: Symbol) -> bool {
        self.pair == other.pair && self.primed != other.primed
    }

    pub fn parse(text: &str) -> Option<Symbol> {
        let text = text.trim();
        match text {
            "0" => return Some(Symbol::ZERO),
            "1" => return Some(Symbol::ONE),
            _ => {}
        }
        let mut chars = text.chars();
        let c = chars.next()?;
        let primed = match chars.as_str() {
            "" => false,
            "'" | "′" => true,
            _ => return None,
        };
        Symbol::letter(c, primed)
    }

    pub fn ket(self, angles: &AngleAssignment) -> Ket {
        match (self.pair, self.primed) {
            (Pair::Computational, false) => Ket::basis(2, 0),
            (Pair::Computational, true) => Ket::basis(2, 1),
            (Pair::Letter(c), primed) => {
                let t = angles.angle_for(c);
                if primed {
                    Ket::from_real(&[t.sin(), -t.cos()])
                } else {
                    Ket::from_real(&[t.cos(), t.sin()])
                }
            }
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.pair, self.primed) {
            (Pair::Computational, false) => write!(f, "0"),
            (Pair::Computational, true) => write!(f, "1"),
            (Pair::Letter(c), false) => write!(f, "{c}"),
            (Pair::Letter(c), true) => write!(f, "{c}'"),
        }
    }
}

/// Angles bound to the letters `a, b, c, d`, each strictly inside `(0, π/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleAssignment {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl AngleAssignment {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let a = AngleAssignment {
            alpha,
            beta,
            gamma,
            delta,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ] {
            if !(value > 0.0 && value < std::f64::consts::FRAC_PI_2) {
                return Err(Error::AngleOutOfRange { name, value });
            }
        }
        Ok(())
    }

    pub fn uniform(theta: f64) -> Result<Self> {
        Self::new(theta, theta, theta, theta)
    }

    /// `(0.3, 0.7, 1.1, 0.4)`: no two letters share an angle and none sits
    /// on a symmetric value.
    pub fn generic() -> Self {
        AngleAssignment {
            alpha: 0.3,
            beta: 0.7,
            gamma: 1.1,
            delta: 0.4,
        }
    }

    pub fn all_pi_over_4() -> Self {
        let t = std::f64::consts::FRAC_PI_4;
        AngleAssignment {
            alpha: t,
            beta: t,
            gamma: t,
            delta: t,
        }
    }

    pub fn angle_for(&self, letter: char) -> f64 {
        match letter {
            'a' => self.alpha,
            'b' => self.beta,
            'c' => self.gamma,
            'd' => self.delta,
            _ => panic!("no angle for letter {letter:?}"),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicUom {
    rows: Vec<Vec<Symbol>>,
    binding: Option<AngleAssignment>,
}

impl SymbolicUom {
    pub fn new(rows: Vec<Vec<Symbol>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).ok_or(Error::Empty("matrix without rows"))?;
        if width == 0 {
            return Err(Error::Empty("matrix without columns"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: bad.len(),
            });
        }
        Ok(SymbolicUom {
            rows,
            binding: None,
        })
    }

    /// Parses whitespace-separated symbols, one row per `/`-separated chunk,
    /// e.g. `"0 0 1 a / 0 1 a 0"`.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = text
            .split(['/', '\n'])
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .enumerate()
            .map(|(i, r)| {
                r.split_whitespace()
                    .enumerate()
                    .map(|(j, s)| {
                        Symbol::parse(s).ok_or_else(|| Error::InvalidSymbol {
                            symbol: s.to_string(),
                            row: i,
                            column: j,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn with_binding(mut self, angles: AngleAssignment) -> Self {
        self.binding = Some(angles);
        self
    }

    pub fn binding(&self) -> Option<AngleAssignment> {
        self.binding
    }

    pub fn rows(&self) -> &[Vec<Symbol>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.rows[0].len()
    }

    pub fn column(&self, j: usize) -> Vec<Symbol> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows are orthogonal under every binding.
    pub fn is_symbolically_orthogonal(&self) -> bool {
        self.first_non_orthogonal_pair().is_none()
    }

    fn first_non_orthogonal_pair(&self) -> Option<(usize, usize)> {
        for i in 0..self.rows.len() {
            for j in i + 1..self.rows.len() {
                let ok = self.rows[i]
                    .iter()
                    .zip(&self.rows[j])
                    .any(|(x, y)| x.is_orthogonal_to(*y));
                if !ok {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Distinct pairs appearing anywhere in the matrix, sorted.
    pub fn pairs(&self) -> Vec<Pair> {
        let mut v: Vec<Pair> = self.rows.iter().flatten().map(|s| s.pair).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Renames letter `from` to `to` in one column. The target letter must not
    /// already occur in that column.
    pub fn rename_letter(&self, column: usize, from: char, to: char) -> Result<Self> {
        let (Some(from_pair), Some(to_pair)) = (Pair::letter(from), Pair::letter(to)) else {
            return Err(Error::InvalidArgument(format!("cannot rename {from:?} to {to:?}")));
        };
        if column >= self.column_count() {
            return Err(Error::InvalidArgument(format!("no column {column}")));
        }
        if from != to && self.column(column).iter().any(|s| s.pair == to_pair) {
            return Err(Error::InvalidArgument(format!(
                "letter {to:?} already used in column {column}"
            )));
        }
        let mut out = self.clone();
        for row in &mut out.rows {
            if row[column].pair == from_pair {
                row[column].pair = to_pair;
            }
        }
        Ok(out)
    }

    /// Gives column `j` the `j`-th letter (`a, b, c, d`), so each column's
    /// letter pair denotes its own basis. Requires at most one letter pair
    /// per column and at most four columns.
    pub fn with_column_letters(&self) -> Result<Self> {
        if self.column_count() > Pair::LETTERS.len() {
            return Err(Error::InvalidArgument("more columns than letters".into()));
        }
        let mut out = self.clone();
        for j in 0..self.column_count() {
            let mut letters: Vec<char> = self
                .column(j)
                .iter()
                .filter_map(|s| match s.pair {
                    Pair::Letter(c) => Some(c),
                    Pair::Computational => None,
                })
                .collect();
            letters.sort_unstable();
            letters.dedup();
            match letters.as_slice() {
                [] => {}
                [only] => {
                    for row in &mut out.rows {
                        if row[j].pair == Pair::Letter(*only) {
                            row[j].pair = Pair::Letter(Pair::LETTERS[j]);
                        }
                    }
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "column {j} mixes letters {letters:?}"
                    )))
                }
            }
        }
        Ok(out)
    }

    /// Rows sorted; equal for matrices that differ only by a row permutation.
    pub fn fingerprint(&self) -> Vec<Vec<Symbol>> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }

    pub fn to_doc(&self) -> UomDoc {
        UomDoc {
            name: None,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(Symbol::to_string).collect())
                .collect(),
            angles: self.binding,
        }
    }

    pub fn from_doc(doc: &UomDoc) -> Result<Self> {
        let rows = doc
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .map(|(j, s)| {
                        Symbol::parse(s).ok_or_else(|| Error::InvalidSymbol {
                            symbol: s.clone(),
                            row: i,
                            column: j,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut uom = Self::new(rows)?;
        if let Some(a) = doc.angles {
            a.validate()?;
            uom.binding = Some(a);
        }
        Ok(uom)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(text)?)
    }
}

impl fmt::Display for SymbolicUom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|s| format!("{s:<2}")).collect();
            write!(f, "{}", cells.join(" ").trim_end())?;
        }
        Ok(())
    }
}

/// Wire format: `{ "rows": [["0","0","1","a"], ..], "angles": {"alpha": .., ..} }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UomDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub rows: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<AngleAssignment>,
}

/// Builds the numeric product basis; fails naming the first pair of rows
/// that come out non-orthogonal.
pub fn instantiate(uom: &SymbolicUom, angles: &AngleAssignment) -> Result<ProductBasis> {
    angles.validate()?;
    let layout = PartyLayout::qubits(uom.column_count().max(2));
    if uom.column_count() < 2 {
        return Err(Error::InvalidLayout("need at least two columns".into()));
    }
    let members = uom
        .rows
        .iter()
        .map(|r| ProductVector::new(r.iter().map(|s| s.ket(angles)).collect()))
        .collect::<Result<Vec<_>>>()?;
    let basis = ProductBasis::new(layout, members)?;
    let report = check_pairwise_orthogonality(&basis, ORTHO_TOL);
    if !report.orthogonal {
        let (i, j) = report.worst_pair.expect("at least two rows");
        return Err(Error::NotOrthogonal(i, j, report.max_overlap));
    }
    Ok(basis)
}

/// One symbol-level move. Each is invertible and corresponds to a party
/// permutation, a row reordering, or a local unitary on one qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformStep {
    /// Row `i` of the result is row `perm[i]` of the input.
    RowPermute { perm: Vec<usize> },
    /// Column `j` of the result is column `perm[j]` of the input.
    ColumnPermute { perm: Vec<usize> },
    /// Exchanges the two members of `pair` in one column.
    SymbolSwap { column: usize, pair: Pair },
    /// Exchanges `first` with `second` (unprimed with unprimed, primed with
    /// primed) in one column.
    BasisRelabel {
        column: usize,
        first: Pair,
        second: Pair,
    },
}

fn validate_perm(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    Ok(())
}

pub fn apply_transform(uom: &SymbolicUom, step: &TransformStep) -> Result<SymbolicUom> {
    let mut out = uom.clone();
    match step {
        TransformStep::RowPermute { perm } => {
            validate_perm(perm, uom.row_count())?;
            out.rows = perm.iter().map(|&i| uom.rows[i].clone()).collect();
        }
        TransformStep::ColumnPermute { perm } => {
            validate_perm(perm, uom.column_count())?;
            out.rows = uom
                .rows
                .iter()
                .map(|r| perm.iter().map(|&j| r[j]).collect())
                .collect();
        }
        TransformStep::SymbolSwap { column, pair } => {
            if *column >= uom.column_count() {
                return Err(Error::InvalidArgument(format!("no column {column}")));
            }
            for row in &mut out.rows {
                if row[*column].pair == *pair {
                    row[*column] = row[*column].partner();
                }
            }
        }
        TransformStep::BasisRelabel {
            column,
            first,
            second,
        } => {
            if *column >= uom.column_count() || first == second {
                return Err(Error::InvalidArgument(format!(
                    "bad relabel of column {column}: {first} <-> {second}"
                )));
            }
            for row in &mut out.rows {
                let s = &mut row[*column];
                if s.pair == *first {
                    s.pair = *second;
                } else if s.pair == *second {
                    s.pair = *first;
                }
            }
        }
    }
    Ok(out)
}

pub fn apply_transforms(uom: &SymbolicUom, steps: &[TransformStep]) -> Result<SymbolicUom> {
    steps.iter().try_fold(uom.clone(), |u, s| apply_transform(&u, s))
}

/// Checks that each link's steps turn its matrix into the next matrix,
/// symbol for symbol. Steps attached to the last matrix are ignored.
pub fn verify_chain(chain: &[(SymbolicUom, Vec<TransformStep>)]) -> bool {
    if chain.is_empty() {
        return false;
    }
    chain.windows(2).all(|w| {
        let (from, steps) = &w[0];
        match apply_transforms(from, steps) {
            Ok(got) => got.rows == w[1].0.rows,
            Err(_) => false,
        }
    })
}

pub const DEFAULT_EQUIVALENCE_BUDGET: usize = 1_000_000;
const MAX_SEARCH_DEPTH: usize = 10;

struct EquivalenceSearch<'a> {
    moves: Vec<TransformStep>,
    target: Vec<Vec<Symbol>>,
    target_rows: &'a [Vec<Symbol>],
    seen: HashMap<Vec<Vec<Symbol>>, usize>,
    nodes: usize,
    budget: usize,
}

impl EquivalenceSearch<'_> {
    /// Depth-limited search; `Err(())` signals an exhausted budget.
    fn dfs(
        &mut self,
        current: &SymbolicUom,
        remaining: usize,
        path: &mut Vec<TransformStep>,
    ) -> std::result::Result<bool, ()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(());
        }
        let fp = current.fingerprint();
        if fp == self.target {
            let mut used = vec![false; self.target_rows.len()];
            let perm: Vec<usize> = self
                .target_rows
                .iter()
                .map(|row| {
                    let i = (0..current.rows.len())
                        .find(|&i| !used[i] && current.rows[i] == *row)
                        .expect("fingerprints match");
                    used[i] = true;
                    i
                })
                .collect();
            if perm.iter().enumerate().any(|(i, &p)| i != p) {
                path.push(TransformStep::RowPermute { perm });
            }
            return Ok(true);
        }
        if remaining == 0 {
            return Ok(false);
        }
        match self.seen.get(&fp) {
            Some(&r) if r >= remaining => return Ok(false),
            _ => {
                self.seen.insert(fp, remaining);
            }
        }
        for k in 0..self.moves.len() {
            let step = self.moves[k].clone();
            let next = apply_transform(current, &step).expect("moves are valid for this shape");
            path.push(step);
            if self.dfs(&next, remaining - 1, path)? {
                return Ok(true);
            }
            path.pop();
        }
        Ok(false)
    }
}

/// Searches for a step sequence turning `a` into `b`, by iterative
/// deepening over column transpositions, symbol swaps and basis relabels,
/// finishing with one row permutation. `None` means nothing was found within
/// `budget` visited nodes; it does not prove inequivalence.
pub fn equivalent(
    a: &SymbolicUom,
    b: &SymbolicUom,
    budget: usize,
) -> Result<Option<Vec<TransformStep>>> {
    if a.row_count() != b.row_count() || a.column_count() != b.column_count() {
        return Err(Error::InvalidArgument(format!(
            "shape {}x{} vs {}x{}",
            a.row_count(),
            a.column_count(),
            b.row_count(),
            b.column_count()
        )));
    }
    let mut pairs = a.pairs();
    pairs.extend(b.pairs());
    pairs.sort();
    pairs.dedup();
    let cols = a.column_count();
    let mut moves = Vec::new();
    for i in 0..cols {
        for j in i + 1..cols {
            let mut perm: Vec<usize> = (0..cols).collect();
            perm.swap(i, j);
            moves.push(TransformStep::ColumnPermute { perm });
        }
    }
    for column in 0..cols {
        for &pair in &pairs {
            moves.push(TransformStep::SymbolSwap { column, pair });
        }
        for (x, &first) in pairs.iter().enumerate() {
            for &second in &pairs[x + 1..] {
                moves.push(TransformStep::BasisRelabel {
                    column,
                    first,
                    second,
                });
            }
        }
    }
    let mut search = EquivalenceSearch {
        moves,
        target: b.fingerprint(),
        target_rows: &b.rows,
        seen: HashMap::new(),
        nodes: 0,
        budget,
    };
    for depth in 0..=MAX_SEARCH_DEPTH {
        search.seen.clear();
        let mut path = Vec::new();
        match search.dfs(a, depth, &mut path) {
            Ok(true) => return Ok(Some(path)),
            Ok(false) => {}
            Err(()) => return Ok(None),
        }
    }
    Ok(None)
}

/// Identical-symbol structure of a 9×4 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Size9Category {
    /// Four rows share a symbol in one column; two of the other rows share a
    /// symbol in another column.
    Cat1,
    /// Three plus three.
    Cat2,
    /// Three plus two, and two of the remaining rows agree on both of the
    /// other columns.
    Cat3,
    None,
}

fn combos(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in combos(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn has_structure(uom: &SymbolicUom, first: usize, second: usize, need_pair: bool) -> bool {
    let n = uom.row_count();
    let all: Vec<usize> = (0..n).collect();
    for x in 0..4 {
        for y in (0..4).filter(|&y| y != x) {
            for k_rows in combos(&all, first) {
                let s = uom.rows[k_rows[0]][x];
                if k_rows.iter().any(|&i| uom.rows[i][x] != s) {
                    continue;
                }
                let rest: Vec<usize> = all.iter().copied().filter(|i| !k_rows.contains(i)).collect();
                for j_rows in combos(&rest, second) {
                    let t = uom.rows[j_rows[0]][y];
                    if j_rows.iter().any(|&i| uom.rows[i][y] != t) {
                        continue;
                    }
                    if !need_pair {
                        return true;
                    }
                    let others: Vec<usize> =
                        rest.iter().copied().filter(|i| !j_rows.contains(i)).collect();
                    let z: Vec<usize> = (0..4).filter(|&c| c != x && c != y).collect();
                    let dependent = others.iter().enumerate().any(|(a, &i)| {
                        others[a + 1..].iter().any(|&j| {
                            uom.rows[i][z[0]] == uom.rows[j][z[0]]
                                && uom.rows[i][z[1]] == uom.rows[j][z[1]]
                        })
                    });
                    if dependent {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Classifies a 9×4 matrix into the three identical-symbol templates, tried
/// in order. Anything else, including near misses, is `None`.
pub fn classify_size9_category(uom: &SymbolicUom) -> Result<Size9Category> {
    if uom.row_count() != 9 || uom.column_count() != 4 {
        return Err(Error::InvalidArgument(format!(
            "expected a 9x4 matrix, got {}x{}",
            uom.row_count(),
            uom.column_count()
        )));
    }
    Ok(if has_structure(uom, 4, 2, false) {
        Size9Category::Cat1
    } else if has_structure(uom, 3, 3, false) {
        Size9Category::Cat2
    } else if has_structure(uom, 3, 2, true) {
        Size9Category::Cat3
    } else {
        Size9Category::None
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_parsing_and_display() {
        for s in ["0", "1", "a", "a'", "d'"] {
            assert_eq!(Symbol::parse(s).unwrap().to_string(), s);
        }
        assert_eq!(Symbol::parse("b′").unwrap().to_string(), "b'");
        assert!(Symbol::parse("e").is_none());
        assert!(Symbol::parse("0'").is_none());
        assert!(Symbol::parse("a''").is_none());
    }

    #[test]
    fn parse_reports_position_of_bad_symbol() {
        match SymbolicUom::parse("0 0 / 1 e") {
            Err(Error::InvalidSymbol { symbol, row, column }) => {
                assert_eq!((symbol.as_str(), row, column), ("e", 1, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_row_instantiates_to_computational_state() {
        let u = SymbolicUom::parse("0 0").unwrap();
        let b = instantiate(&u, &AngleAssignment::generic()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.members()[0].full(), Ket::basis(4, 0));
    }

    #[test]
    fn instantiate_names_non_orthogonal_rows() {
        let u = SymbolicUom::parse("0 0 / 0 1 / 0 a").unwrap();
        match instantiate(&u, &AngleAssignment::generic()) {
            Err(Error::NotOrthogonal(i, j, _)) => assert!((i, j) == (0, 2) || (i, j) == (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn angle_bounds_are_strict() {
        assert!(AngleAssignment::new(0.0, 0.1, 0.1, 0.1).is_err());
        assert!(AngleAssignment::new(0.1, std::f64::consts::FRAC_PI_2, 0.1, 0.1).is_err());
        assert!(AngleAssignment::new(0.1, 0.2, 0.3, 1.5).is_ok());
    }

    #[test]
    fn transforms_are_involutions_where_expected() {
        let u = SymbolicUom::parse("0 a 1 / 1 a' a / a 0 0").unwrap();
        let swap = TransformStep::SymbolSwap {
            column: 1,
            pair: Pair::Letter('a'),
        };
        let twice = apply_transforms(&u, &[swap.clone(), swap]).unwrap();
        assert_eq!(twice, u);
        let relabel = TransformStep::BasisRelabel {
            column: 2,
            first: Pair::Computational,
            second: Pair::Letter('a'),
        };
        let once = apply_transform(&u, &relabel).unwrap();
        assert_eq!(once.column(2), SymbolicUom::parse("a' / 0 / a").unwrap().column(0));
        assert_eq!(apply_transform(&once, &relabel).unwrap(), u);
        let id = TransformStep::RowPermute { perm: vec![0, 1, 2] };
        assert_eq!(apply_transform(&u, &id).unwrap(), u);
    }

    #[test]
    fn invalid_transform_parameters() {
        let u = SymbolicUom::parse("0 a / 1 a'").unwrap();
        assert!(apply_transform(&u, &TransformStep::RowPermute { perm: vec![0, 0] }).is_err());
        assert!(apply_transform(&u, &TransformStep::ColumnPermute { perm: vec![1] }).is_err());
        assert!(apply_transform(
            &u,
            &TransformStep::SymbolSwap {
                column: 2,
                pair: Pair::Computational
            }
        )
        .is_err());
    }

    #[test]
    fn equivalence_with_self_is_empty() {
        let u = SymbolicUom::parse("0 a 1 / 1 a' a / a 0 0").unwrap();
        assert_eq!(equivalent(&u, &u, 1000).unwrap(), Some(vec![]));
    }

    #[test]
    fn equivalence_recovers_a_known_sequence() {
        let u = SymbolicUom::parse("0 0 0 / 1 a a' / a' 1 a / a a' 1").unwrap();
        let steps = vec![
            TransformStep::ColumnPermute { perm: vec![2, 0, 1] },
            TransformStep::SymbolSwap {
                column: 0,
                pair: Pair::Computational,
            },
            TransformStep::RowPermute {
                perm: vec![3, 2, 1, 0],
            },
        ];
        let target = apply_transforms(&u, &steps).unwrap();
        let found = equivalent(&u, &target, DEFAULT_EQUIVALENCE_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!(apply_transforms(&u, &found).unwrap(), target);
    }

    #[test]
    fn equivalence_shape_mismatch() {
        let a = SymbolicUom::parse("0 0").unwrap();
        let b = SymbolicUom::parse("0 0 0").unwrap();
        assert!(equivalent(&a, &b, 10).is_err());
    }

    #[test]
    fn equivalence_budget_exhaustion_returns_none() {
        let a = SymbolicUom::parse("0 0 0 0 / 1 1 1 1").unwrap();
        let b = SymbolicUom::parse("a 0 0 0 / a' 1 1 1").unwrap();
        assert_eq!(equivalent(&a, &b, 1).unwrap(), None);
        assert!(equivalent(&a, &b, 10_000).unwrap().is_some());
    }

    #[test]
    fn renaming_letters() {
        let u = SymbolicUom::parse("a a / a' 1").unwrap();
        let r = u.with_column_letters().unwrap();
        assert_eq!(r, SymbolicUom::parse("a b / a' 1").unwrap());
        assert!(u.rename_letter(0, 'a', 'a').is_ok());
        let mixed = SymbolicUom::parse("a / b").unwrap();
        assert!(mixed.with_column_letters().is_err());
        assert!(mixed.rename_letter(0, 'a', 'b').is_err());
    }

    #[test]
    fn category_requires_shape() {
        let u = SymbolicUom::parse("0 0 0 0").unwrap();
        assert!(classify_size9_category(&u).is_err());
    }

    #[test]
    fn json_round_trip() {
        let u = SymbolicUom::parse("0 a' / 1 b")
            .unwrap()
            .with_binding(AngleAssignment::generic());
        assert_eq!(SymbolicUom::from_json(&u.to_json()).unwrap(), u);
        let step = TransformStep::BasisRelabel {
            column: 3,
            first: Pair::Computational,
            second: Pair::Letter('a'),
        };
        let text = serde_json::to_string(&step).unwrap();
        assert_eq!(serde_json::from_str::<TransformStep>(&text).unwrap(), step);
    }
}
