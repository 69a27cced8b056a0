//! Exact ground types: lattice points, canonically ordered point sets,
//! nonnegative mass functions, and mod-2 parity classes.
//!
//! Coordinates are unbounded-precision integers throughout; sets of the shape
//! `{a + 100^b·N}` overflow fixed-width arithmetic immediately. `PointSet`
//! keeps its points deduplicated in lexicographic order so that equality and
//! hashing are structural and every downstream trace is reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::{Error, Result};

/// A point of `ℤ^d` with exact integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint {
    coords: Vec<BigInt>,
}

impl LatticePoint {
    pub fn new(coords: Vec<BigInt>) -> Self {
        assert!(!coords.is_empty(), "points need at least one coordinate");
        LatticePoint { coords }
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        Self::new(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(c: i64) -> Self {
        Self::from_i64(&[c])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![BigInt::zero(); dim])
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coords.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, lambda: &BigInt) -> Self {
        Self::new(self.coords.iter().map(|a| a * lambda).collect())
    }

    /// Componentwise reduction into `[0, m)`.
    pub fn reduce_mod(&self, m: &BigInt) -> Self {
        Self::new(
            self.coords
                .iter()
                .map(|a| {
                    let r = a % m;
                    if r.is_negative() {
                        r + m
                    } else {
                        r
                    }
                })
                .collect(),
        )
    }

    /// Embed into `ℤ^{d+k}` by appending zero coordinates.
    pub fn pad(&self, extra: usize) -> Self {
        let mut coords = self.coords.clone();
        coords.extend(std::iter::repeat(BigInt::zero()).take(extra));
        Self::new(coords)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The residue of a point modulo 2: an element of `𝔽₂^d`.
///
/// Bits are packed little-endian into 64-bit words (coordinate `j` is bit
/// `j % 64` of word `j / 64`). Ordering is lexicographic by coordinate, which
/// matches the lexicographic order of any representative point's parity
/// vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParityClass {
    dim: usize,
    words: Vec<u64>,
}

impl ParityClass {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1);
        ParityClass {
            dim,
            words: vec![0; dim.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut c = Self::zero(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            assert!(b <= 1);
            if b == 1 {
                c.set_bit(j);
            }
        }
        c
    }

    /// The class with packed word `w` in dimension `dim ≤ 64`.
    pub fn from_word(dim: usize, w: u64) -> Self {
        assert!(dim >= 1 && dim <= 64);
        if dim < 64 {
            assert!(w < (1u64 << dim));
        }
        ParityClass {
            dim,
            words: vec![w],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bit(&self, j: usize) -> u8 {
        ((self.words[j / 64] >> (j % 64)) & 1) as u8
    }

    fn set_bit(&mut self, j: usize) {
        self.words[j / 64] |= 1u64 << (j % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        ParityClass {
            dim: self.dim,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    /// Parity of the inner product `⟨self, other⟩` over `𝔽₂`.
    pub fn dot(&self, other: &Self) -> u8 {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        (acc & 1) as u8
    }

    /// Bitstring form, coordinate 0 first: e.g. `"0110"`.
    pub fn to_bitstring(&self) -> String {
        (0..self.dim).map(|j| if self.bit(j) == 1 { '1' } else { '0' }).collect()
    }
}

impl FromStr for ParityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty parity bitstring".into()));
        }
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => return Err(Error::Parse(format!("bad parity bit {ch:?}"))),
            }
        }
        Ok(ParityClass::from_bits(&bits))
    }
}

impl fmt::Display for ParityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bitstring())
    }
}

impl Ord for ParityClass {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Lexicographic by coordinate: the lowest differing bit decides.
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.words.iter().zip(&other.words) {
            let x = a ^ b;
            if x != 0 {
                let j = x.trailing_zeros();
                return if (a >> j) & 1 == 0 {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                };
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl PartialOrd for ParityClass {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// The parity class of a point.
pub fn parity_of(p: &LatticePoint) -> ParityClass {
    use num_integer::Integer;
    let mut c = ParityClass::zero(p.dim());
    for (j, coord) in p.coords().iter().enumerate() {
        if coord.is_odd() {
            c.set_bit(j);
        }
    }
    c
}

/// A finite subset of `ℤ^d`, deduplicated and lexicographically sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    dim: usize,
    points: Vec<LatticePoint>,
}

impl PointSet {
    /// Builds a set, sorting and deduplicating. Fails if any point has the
    /// wrong dimension.
    pub fn new(dim: usize, mut points: Vec<LatticePoint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be ≥ 1".into()));
        }
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(dim, p.dim()));
            }
        }
        points.sort();
        points.dedup();
        Ok(PointSet { dim, points })
    }

    pub fn empty(dim: usize) -> Self {
        PointSet {
            dim,
            points: Vec::new(),
        }
    }

    /// One-dimensional set from integer values.
    pub fn from_i64(values: &[i64]) -> Self {
        PointSet::new(1, values.iter().map(|&v| LatticePoint::scalar(v)).collect()).unwrap()
    }

    /// Set in `ℤ^d` from rows of coordinates.
    pub fn from_rows(dim: usize, rows: &[&[i64]]) -> Result<Self> {
        PointSet::new(dim, rows.iter().map(|r| LatticePoint::from_i64(r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.points.iter()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// Index of `p` in canonical order.
    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    pub fn translate(&self, c: &LatticePoint) -> Result<Self> {
        if c.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, c.dim()));
        }
        PointSet::new(self.dim, self.points.iter().map(|p| p.add(c)).collect())
    }

    pub fn reflect(&self) -> Self {
        PointSet::new(self.dim, self.points.iter().map(|p| p.neg()).collect()).unwrap()
    }

    /// Embed into `ℤ^{d+k}` by appending zero coordinates.
    pub fn pad(&self, extra: usize) -> Self {
        PointSet {
            dim: self.dim + extra,
            points: self.points.iter().map(|p| p.pad(extra)).collect(),
        }
    }

    /// Subset of the points whose parity class lies in `classes`
    /// (`classes` must be sorted).
    pub fn restrict_to_classes(&self, classes: &[ParityClass]) -> Self {
        debug_assert!(classes.windows(2).all(|w| w[0] < w[1]));
        let points = self
            .points
            .iter()
            .filter(|p| classes.binary_search(&parity_of(p)).is_ok())
            .cloned()
            .collect();
        PointSet {
            dim: self.dim,
            points,
        }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points.iter().all(|p| other.contains(p))
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Sign for each operand of [`sumset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `{ s₁·x + s₂·y : x ∈ X, y ∈ Y }`, deduplicated.
pub fn sumset(x: &PointSet, y: &PointSet, signs: (Sign, Sign)) -> Result<PointSet> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    let mut points = Vec::with_capacity(x.len() * y.len());
    for p in x.iter() {
        let p = match signs.0 {
            Sign::Plus => p.clone(),
            Sign::Minus => p.neg(),
        };
        for q in y.iter() {
            let q = match signs.1 {
                Sign::Plus => q.clone(),
                Sign::Minus => q.neg(),
            };
            points.push(p.add(&q));
        }
    }
    PointSet::new(x.dim(), points)
}

/// `X + Y`.
pub fn add_sets(x: &PointSet, y: &PointSet) -> Result<PointSet> {
    sumset(x, y, (Sign::Plus, Sign::Plus))
}

/// `X − Y`.
pub fn sub_sets(x: &PointSet, y: &PointSet) -> Result<PointSet> {
    sumset(x, y, (Sign::Plus, Sign::Minus))
}

/// The dilate `{ λ·x : x ∈ X }` (collapses to `{0}` for `λ = 0`).
pub fn dilate(x: &PointSet, lambda: &BigInt) -> PointSet {
    PointSet::new(x.dim(), x.iter().map(|p| p.scale(lambda)).collect()).unwrap()
}

/// `|A+A| / |A|` as an exact rational.
pub fn doubling_constant(a: &PointSet) -> Result<BigRational> {
    if a.is_empty() {
        return Err(Error::EmptySet("doubling_constant"));
    }
    let aa = add_sets(a, a)?;
    Ok(BigRational::new(BigInt::from(aa.len()), BigInt::from(a.len())))
}

/// Componentwise reduction of `A` modulo `m ≥ 2`, with multiplicities.
///
/// Residues are canonical representatives in `[0, m)^d`; multiplicities sum
/// to `|A|`.
pub fn reduce_mod(a: &PointSet, m: &BigInt) -> Result<BTreeMap<LatticePoint, usize>> {
    if m < &BigInt::from(2u8) {
        return Err(Error::InvalidArgument(format!("modulus {m} must be ≥ 2")));
    }
    let mut out: BTreeMap<LatticePoint, usize> = BTreeMap::new();
    for p in a.iter() {
        *out.entry(p.reduce_mod(m)).or_insert(0) += 1;
    }
    Ok(out)
}

/// A finitely supported function `ℤ^d → ℚ_{≥0}`; zero weights are dropped on
/// construction so the stored support is exactly the support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MassFunction {
    dim: usize,
    weights: BTreeMap<LatticePoint, BigRational>,
}

impl MassFunction {
    pub fn new(dim: usize, entries: Vec<(LatticePoint, BigRational)>) -> Result<Self> {
        let mut weights = BTreeMap::new();
        for (p, w) in entries {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(dim, p.dim()));
            }
            if w.is_negative() {
                return Err(Error::InvalidArgument(format!("negative weight at {p}")));
            }
            if w.is_zero() {
                continue;
            }
            let slot = weights.entry(p).or_insert_with(BigRational::zero);
            *slot += w;
        }
        Ok(MassFunction { dim, weights })
    }

    /// The indicator function `1_A`.
    pub fn indicator(a: &PointSet) -> Self {
        MassFunction {
            dim: a.dim(),
            weights: a
                .iter()
                .map(|p| (p.clone(), BigRational::one()))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, p: &LatticePoint) -> Option<&BigRational> {
        self.weights.get(p)
    }

    /// Support in canonical order with weights.
    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, &BigRational)> {
        self.weights.iter()
    }

    /// `‖f‖₁ = Σ f(x)`.
    pub fn l1(&self) -> BigRational {
        self.weights.values().sum()
    }

    /// `‖f‖₂² = Σ f(x)²`.
    pub fn l2_sq(&self) -> BigRational {
        self.weights.values().map(|w| w * w).sum()
    }

    /// `‖f‖₄⁴ = Σ f(x)⁴`.
    pub fn l4_4(&self) -> BigRational {
        self.weights.values().map(|w| w * w * w * w).sum()
    }

    /// Restriction of `f` to the points whose parity class lies in the sorted
    /// slice `classes`.
    pub fn restrict_to_classes(&self, classes: &[ParityClass]) -> Self {
        debug_assert!(classes.windows(2).all(|w| w[0] < w[1]));
        MassFunction {
            dim: self.dim,
            weights: self
                .weights
                .iter()
                .filter(|(p, _)| classes.binary_search(&parity_of(p)).is_ok())
                .map(|(p, w)| (p.clone(), w.clone()))
                .collect(),
        }
    }

    /// Clears denominators: returns the support with integer weights `n_i`
    /// and the common denominator `D`, so that `f(x_i) = n_i / D`.
    ///
    /// Energy kernels run on the integer form; a degree-`k` energy of `f` is
    /// the integer energy divided by `D^k`.
    pub fn scaled(&self) -> (Vec<(LatticePoint, BigInt)>, BigInt) {
        use num_integer::Integer;
        let mut denom = BigInt::one();
        for w in self.weights.values() {
            denom = denom.lcm(w.denom());
        }
        let support = self
            .weights
            .iter()
            .map(|(p, w)| (p.clone(), w.numer() * (&denom / w.denom())))
            .collect();
        (support, denom)
    }
}

// ---------------------------------------------------------------------------
// JSON set format: {"dim": d, "points": [[c1,...,cd], ...]} with coordinates
// as JSON numbers when |c| < 2^53 and as decimal strings otherwise.
// ---------------------------------------------------------------------------

const SAFE_INT: i64 = 1 << 53;

fn bigint_to_json(c: &BigInt) -> Value {
    match c.to_i64() {
        Some(v) if v.abs() < SAFE_INT => json!(v),
        _ => json!(c.to_string()),
    }
}

fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(Error::Parse(format!("non-integer coordinate {n}")))
            }
        }
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad coordinate {s:?}: {e}"))),
        other => Err(Error::Parse(format!("bad coordinate {other}"))),
    }
}

/// Serializes a set in the interchange format.
pub fn set_to_json(a: &PointSet) -> Value {
    json!({
        "dim": a.dim(),
        "points": a
            .iter()
            .map(|p| Value::Array(p.coords().iter().map(bigint_to_json).collect()))
            .collect::<Vec<_>>(),
    })
}

/// Parses a set from the interchange format.
pub fn set_from_json(v: &Value) -> Result<PointSet> {
    let dim = v
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("missing or bad \"dim\"".into()))? as usize;
    let rows = v
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing or bad \"points\"".into()))?;
    let mut points = Vec::with_capacity(rows.len());
    for row in rows {
        let coords = row
            .as_array()
            .ok_or_else(|| Error::Parse("point is not an array".into()))?
            .iter()
            .map(bigint_from_json)
            .collect::<Result<Vec<_>>>()?;
        points.push(LatticePoint::new(coords));
    }
    PointSet::new(dim, points)
}

/// Exact rational as a display string: `"19"` or `"19/10"`.
pub fn rational_str(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"p"` or `"p/q"`.
pub fn rational_from_str(s: &str) -> Result<BigRational> {
    let parse = |t: &str| {
        t.parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
    };
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(parse(s)?)),
        Some((p, q)) => {
            let den = parse(q)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(parse(p)?, den))
        }
    }
}
