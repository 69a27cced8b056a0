//! The mod-2 mass machinery over `𝔽₂^d`: η profiles, the constrained
//! quadruple sum, `L^{8/3}` clustering, fiber norms γ, sparse Gowers norms,
//! and the hyperplane-imbalance search used by the near-coset case.
//!
//! Everything is sparse in the support; the ambient `2^d` space is never
//! allocated except inside the exhaustive hyperplane transform, which is
//! capped at `d ≤ 20`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::energy::{eighth_root, pow_rational, rational_to_f64, u3_energy_set};
use crate::lattice::{parity_of, rational_str, MassFunction, ParityClass, PointSet};
use crate::{Error, Result};

/// The distribution of the `L²` mass of `f` modulo 2: for each parity class
/// `ω`, the stored value is `η(ω)² = Σ_{x ≡ ω (2)} f(x)²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaProfile {
    dim: usize,
    /// Sorted by class; all masses strictly positive.
    entries: Vec<(ParityClass, BigRational)>,
    /// `Σ η² = ‖f‖₂²`.
    total: BigRational,
}

impl EtaProfile {
    /// Builds a profile from explicit `η(ω)²` values (zeros dropped).
    pub fn from_mass_sq(dim: usize, entries: Vec<(ParityClass, BigRational)>) -> Result<Self> {
        let mut map: std::collections::BTreeMap<ParityClass, BigRational> =
            std::collections::BTreeMap::new();
        for (c, m) in entries {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch(dim, c.dim()));
            }
            if m.is_negative() {
                return Err(Error::InvalidArgument("negative mass".into()));
            }
            if m.is_zero() {
                continue;
            }
            *map.entry(c).or_insert_with(BigRational::zero) += m;
        }
        if map.is_empty() {
            return Err(Error::ZeroFunction("eta profile"));
        }
        let total = map.values().sum();
        Ok(EtaProfile {
            dim,
            entries: map.into_iter().collect(),
            total,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// `‖η‖₂² = ‖f‖₂²`.
    pub fn total(&self) -> &BigRational {
        &self.total
    }

    /// `η(ω)²` (zero off the support).
    pub fn mass_sq(&self, c: &ParityClass) -> BigRational {
        match self.entries.binary_search_by(|(e, _)| e.cmp(c)) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    /// Support with `η²` values, in canonical class order.
    pub fn iter(&self) -> impl Iterator<Item = &(ParityClass, BigRational)> {
        self.entries.iter()
    }

    /// The heaviest class (ties resolved toward the canonically smaller one).
    pub fn heaviest_class(&self) -> &ParityClass {
        let mut best = &self.entries[0];
        for e in &self.entries[1..] {
            if e.1 > best.1 {
                best = e;
            }
        }
        &best.0
    }

    /// `η` as eighth powers: `η(ω)⁸ = (η(ω)²)⁴`, the form [`sparse_u3_f2`]
    /// consumes.
    pub fn as_pow8(&self) -> Vec<(ParityClass, BigRational)> {
        self.entries
            .iter()
            .map(|(c, m)| (c.clone(), pow_rational(m, 4)))
            .collect()
    }

    /// JSON map from bitstring keys to decimal-string masses (`η²` values).
    pub fn to_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        for (c, m) in &self.entries {
            map.insert(c.to_bitstring(), json!(rational_str(m)));
        }
        Value::Object(map)
    }
}

/// `η(f)`: mass_sq[ω] = `Σ_{x ≡ ω (2)} f(x)²`, exactly.
pub fn eta_profile(f: &MassFunction) -> Result<EtaProfile> {
    if f.is_zero() {
        return Err(Error::ZeroFunction("eta_profile"));
    }
    let entries = f
        .iter()
        .map(|(p, w)| (parity_of(p), w * w))
        .collect();
    EtaProfile::from_mass_sq(f.dim(), entries)
}

/// `‖g‖_{U²}⁴` over `𝔽₂^d` with counting measure, exactly:
/// `Σ_{a⊕b⊕c⊕e = 0} g(a)g(b)g(c)g(e)`, sparse in the support.
pub fn sparse_u2_f2(values: &[(ParityClass, BigRational)]) -> BigRational {
    let lookup: HashMap<&ParityClass, &BigRational> =
        values.iter().map(|(c, v)| (c, v)).collect();
    let mut total = BigRational::zero();
    for (a, va) in values {
        for (b, vb) in values {
            let ab = a.xor(b);
            let vab = va * vb;
            for (c, vc) in values {
                if let Some(ve) = lookup.get(&ab.xor(c)) {
                    total += &vab * vc * *ve;
                }
            }
        }
    }
    total
}

/// The right-hand side of the mod-2 constraint inequality for `f`:
/// `Σ_{r+s+t+u ≡ 0 (mod 2)} f(r)²f(s)²f(t)²f(u)²`, computed as
/// `‖η²‖_{U²}⁴` over `𝔽₂^d` (the two agree identically; the 4-fold
/// enumeration in [`crate::naive`] is the test oracle).
pub fn constrained_quad_sum(f: &MassFunction) -> BigRational {
    if f.is_zero() {
        return BigRational::zero();
    }
    let eta = eta_profile(f).expect("nonzero checked");
    let values: Vec<(ParityClass, BigRational)> =
        eta.iter().cloned().collect();
    sparse_u2_f2(&values)
}

/// `‖η‖_p = (Σ_ω η(ω)^p)^{1/p}` from the exact `η²` masses.
pub fn eta_lp(eta: &EtaProfile, p: f64) -> f64 {
    assert!(p > 0.0);
    let sum: f64 = eta
        .iter()
        .map(|(_, m)| rational_to_f64(m).powf(p / 2.0))
        .sum();
    sum.powf(1.0 / p)
}

/// Fiber `U³` norms of a set `A′ ⊆ ℤ^d`: `γ(ω) = ‖A′_ω‖_{U³}`, stored as
/// exact eighth powers `γ(ω)⁸ = E_{U³}(A′_ω)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberGamma {
    dim: usize,
    entries: Vec<(ParityClass, BigRational)>,
}

impl FiberGamma {
    pub fn from_pow8(dim: usize, mut entries: Vec<(ParityClass, BigRational)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.retain(|(_, v)| !v.is_zero());
        FiberGamma { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// `γ(ω)⁸` (zero off the support).
    pub fn pow8(&self, c: &ParityClass) -> BigRational {
        match self.entries.binary_search_by(|(e, _)| e.cmp(c)) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    /// `γ(ω)` as a float.
    pub fn value(&self, c: &ParityClass) -> f64 {
        eighth_root(&self.pow8(c))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(ParityClass, BigRational)> {
        self.entries.iter()
    }

    pub fn as_pow8(&self) -> &[(ParityClass, BigRational)] {
        &self.entries
    }
}

/// Partition of a set by parity class, in canonical class order.
pub fn parity_fibers(a: &PointSet) -> Vec<(ParityClass, PointSet)> {
    let mut map: std::collections::BTreeMap<ParityClass, Vec<_>> =
        std::collections::BTreeMap::new();
    for p in a.iter() {
        map.entry(parity_of(p)).or_default().push(p.clone());
    }
    map.into_iter()
        .map(|(c, pts)| (c, PointSet::new(a.dim(), pts).expect("fiber of valid set")))
        .collect()
}

/// `γ` of `A′`: partitions by parity class and computes each fiber's `U³`
/// energy.
pub fn fiber_gamma(aprime: &PointSet) -> Result<FiberGamma> {
    if aprime.is_empty() {
        return Err(Error::EmptySet("fiber_gamma"));
    }
    let entries = parity_fibers(aprime)
        .into_iter()
        .map(|(c, fiber)| (c, u3_energy_set(&fiber)))
        .collect();
    Ok(FiberGamma::from_pow8(aprime.dim(), entries))
}

/// `‖g‖_{U³}` over `𝔽₂^d` with counting measure for a sparse nonnegative `g`
/// given by exact eighth powers of its values.
///
/// Enumerates corner quadruples `(c₀,c₁,c₂,c₃) = (x, x⊕h₁, x⊕h₂, x⊕h₃)` of
/// the support and reconstructs the remaining four corners by XOR; `2^d`
/// storage is never touched. Terms are summed in canonical support order
/// with Kahan compensation, so the result is deterministic.
pub fn sparse_u3_f2(values_pow8: &[(ParityClass, BigRational)]) -> f64 {
    sparse_u3_f2_pow8(values_pow8).powf(0.125)
}

/// Eighth power `‖g‖_{U³}⁸` of [`sparse_u3_f2`].
pub fn sparse_u3_f2_pow8(values_pow8: &[(ParityClass, BigRational)]) -> f64 {
    let mut support: Vec<(ParityClass, f64)> = values_pow8
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(c, v)| (c.clone(), eighth_root(v)))
        .collect();
    support.sort_by(|a, b| a.0.cmp(&b.0));
    let lookup: HashMap<&ParityClass, f64> =
        support.iter().map(|(c, v)| (c, *v)).collect();

    let mut sum = 0.0f64;
    let mut comp = 0.0f64; // Kahan compensation
    let mut add = |term: f64, sum: &mut f64, comp: &mut f64| {
        let y = term - *comp;
        let t = *sum + y;
        *comp = (t - *sum) - y;
        *sum = t;
    };

    for (c0, v0) in &support {
        for (c1, v1) in &support {
            let w01 = v0 * v1;
            for (c2, v2) in &support {
                let m12 = c0.xor(c1).xor(c2);
                let Some(&vm12) = lookup.get(&m12) else {
                    continue;
                };
                let w012 = w01 * v2 * vm12;
                for (c3, v3) in &support {
                    let Some(&vm13) = lookup.get(&c0.xor(c1).xor(c3)) else {
                        continue;
                    };
                    let Some(&vm23) = lookup.get(&c0.xor(c2).xor(c3)) else {
                        continue;
                    };
                    let Some(&vm123) = lookup.get(&c1.xor(c2).xor(c3)) else {
                        continue;
                    };
                    add(w012 * v3 * vm13 * vm23 * vm123, &mut sum, &mut comp);
                }
            }
        }
    }
    sum
}

/// `𝓔(η) = ‖η‖_{U³}/‖η‖₂` as a float.
pub fn eta_normalized_energy(eta: &EtaProfile) -> f64 {
    sparse_u3_f2(&eta.as_pow8()) / rational_to_f64(eta.total()).sqrt()
}

/// An affine hyperplane split of `𝔽₂^d`: sides `{ω : θ·ω = 0}` and
/// `{ω : θ·ω = 1}` with their exact `L²` mass fractions.
#[derive(Debug, Clone)]
pub struct HyperplaneSplit {
    /// `θ ≠ 0`.
    pub normal: ParityClass,
    /// Bit value of the heavy side.
    pub offset: u8,
    /// Exact mass fractions `αᵢ² = massᵢ/total`; they sum to one exactly.
    pub frac0: BigRational,
    pub frac1: BigRational,
}

impl HyperplaneSplit {
    pub fn alpha0(&self) -> f64 {
        rational_to_f64(&self.frac0).sqrt()
    }

    pub fn alpha1(&self) -> f64 {
        rational_to_f64(&self.frac1).sqrt()
    }

    pub fn min_alpha(&self) -> f64 {
        self.alpha0().min(self.alpha1())
    }

    pub fn minority_frac(&self) -> &BigRational {
        if self.frac0 <= self.frac1 {
            &self.frac0
        } else {
            &self.frac1
        }
    }
}

/// Searches for a hyperplane `{ω : θ·ω = c}` whose light side carries at most
/// a `τ²` fraction of the `L²` mass.
///
/// * `d ≤ 20`: exhaustive over all `2^d − 1` nonzero `θ` via a
///   Walsh–Hadamard transform of the exact masses.
/// * `d > 20`: sparse detection — grow the `𝔽₂`-span of offsets from the
///   heaviest class in decreasing mass order until a `(1 − τ²)` fraction is
///   covered; if that span is proper, separate a stray class by `𝔽₂` linear
///   algebra.
///
/// Splits with a positive-mass minority are preferred; a zero-minority split
/// (every support class on one side) is returned only when nothing better
/// qualifies. Absence is an ordinary outcome.
pub fn hyperplane_imbalance_search(eta: &EtaProfile, tau: f64) -> Option<HyperplaneSplit> {
    let tau_sq = BigRational::from_float(tau).expect("finite tau") .pow(2);
    if eta.dim() <= 20 {
        exhaustive_split_search(eta, &tau_sq)
    } else {
        span_split_search(eta, &tau_sq)
    }
}

fn make_split(eta: &EtaProfile, theta: ParityClass, mass0: BigRational) -> HyperplaneSplit {
    let frac0 = &mass0 / eta.total();
    let frac1 = BigRational::one() - &frac0;
    let offset = if frac0 >= frac1 { 0 } else { 1 };
    HyperplaneSplit {
        normal: theta,
        offset,
        frac0,
        frac1,
    }
}

fn exhaustive_split_search(eta: &EtaProfile, tau_sq: &BigRational) -> Option<HyperplaneSplit> {
    let d = eta.dim();
    // Clear denominators so the transform runs on integers.
    let mut denom = BigInt::one();
    for (_, m) in eta.iter() {
        denom = denom.lcm(m.denom());
    }
    let mut table = vec![BigInt::zero(); 1usize << d];
    for (c, m) in eta.iter() {
        let mut idx = 0usize;
        for j in 0..d {
            if c.bit(j) == 1 {
                idx |= 1 << j;
            }
        }
        table[idx] = m.numer() * (&denom / m.denom());
    }
    let total_scaled: BigInt = table.iter().sum();

    // In-place Walsh–Hadamard: afterwards table[θ] = m₀(θ) − m₁(θ).
    let mut h = 1usize;
    while h < table.len() {
        let mut i = 0;
        while i < table.len() {
            for j in i..(i + h) {
                let x = table[j].clone();
                let y = table[j + h].clone();
                table[j] = &x + &y;
                table[j + h] = x - y;
            }
            i += 2 * h;
        }
        h *= 2;
    }

    // Qualification: min(m₀,m₁) ≤ τ²·total, compared in integers via
    // min2 := 2·min(m₀,m₁) = total − |m₀ − m₁|.
    let threshold2 = BigInt::from(2) * tau_sq.numer() * &total_scaled;

    let mut best: Option<(bool, BigInt, usize)> = None; // (positive minority, min2, θ index)
    for theta in 1..table.len() {
        let min2 = &total_scaled - table[theta].abs();
        if &min2 * tau_sq.denom() > threshold2 {
            continue;
        }
        let cand = (!min2.is_zero(), min2, theta);
        best = Some(match best.take() {
            None => cand,
            Some(b) => {
                // Prefer positive minority, then smaller minority mass, then
                // smaller θ index.
                if (cand.0 && !b.0)
                    || (cand.0 == b.0 && (cand.1 < b.1 || (cand.1 == b.1 && cand.2 < b.2)))
                {
                    cand
                } else {
                    b
                }
            }
        });
    }
    let (_, _, theta_idx) = best?;
    let theta = ParityClass::from_word(d, theta_idx as u64);
    // Recompute side-0 mass exactly from the profile.
    let mut mass0 = BigRational::zero();
    for (c, m) in eta.iter() {
        if c.dot(&theta) == 0 {
            mass0 += m;
        }
    }
    Some(make_split(eta, theta, mass0))
}

/// Row-echelon basis of a set of `𝔽₂` vectors, pivoting on the lowest set
/// coordinate.
struct F2Span {
    dim: usize,
    /// Rows with distinct pivot positions, kept reduced.
    rows: Vec<(usize, ParityClass)>,
}

impl F2Span {
    fn new(dim: usize) -> Self {
        F2Span { dim, rows: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &ParityClass) -> ParityClass {
        let mut v = v.clone();
        for (pivot, row) in &self.rows {
            if v.bit(*pivot) == 1 {
                v = v.xor(row);
            }
        }
        v
    }

    fn contains(&self, v: &ParityClass) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns false if it was already in the span.
    fn insert(&mut self, v: &ParityClass) -> bool {
        let r = self.reduce(v);
        if r.is_zero() {
            return false;
        }
        let pivot = (0..self.dim).find(|&j| r.bit(j) == 1).expect("nonzero");
        self.rows.push((pivot, r));
        self.rows.sort_by_key(|(p, _)| *p);
        true
    }
}

fn span_split_search(eta: &EtaProfile, tau_sq: &BigRational) -> Option<HyperplaneSplit> {
    let d = eta.dim();
    let x0 = eta.heaviest_class().clone();
    // Classes in decreasing mass order, ties canonical.
    let mut order: Vec<&(ParityClass, BigRational)> = eta.iter().collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let target = (BigRational::one() - tau_sq) * eta.total();
    let mut span = F2Span::new(d);
    let mut covered = BigRational::zero();
    for (c, m) in &order {
        span.insert(&c.xor(&x0));
        covered += m;
        if covered >= target {
            break;
        }
    }
    if span.rank() == d {
        return None;
    }
    // Separate a stray class when one exists outside x₀ ⊕ H.
    let stray = eta
        .iter()
        .map(|(c, _)| c.xor(&x0))
        .find(|off| !span.contains(off));
    let theta = solve_functional(d, &span, stray.as_ref())?;
    let mut mass0 = BigRational::zero();
    for (c, m) in eta.iter() {
        if c.dot(&theta) == 0 {
            mass0 += m;
        }
    }
    Some(make_split(eta, theta, mass0))
}

/// Finds `θ ≠ 0` with `θ · h = 0` for every `h` in the span and, when `stray`
/// is given, `θ · stray = 1`. Deterministic: solves the echelonized system
/// with free variables set to zero (plus the first free variable forced when
/// a nonzero homogeneous solution is required).
fn solve_functional(dim: usize, span: &F2Span, stray: Option<&ParityClass>) -> Option<ParityClass> {
    // Unknown θ has d bits; constraints: θ·row = 0, θ·stray = 1 (optional).
    // Gaussian elimination over the constraint rows in (vector | rhs) form.
    let mut rows: Vec<(ParityClass, u8)> = span
        .rows
        .iter()
        .map(|(_, r)| (r.clone(), 0u8))
        .collect();
    if let Some(s) = stray {
        rows.push((s.clone(), 1));
    }
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut used = vec![false; rows.len()];
    for col in 0..dim {
        let Some(r) = (0..rows.len()).find(|&r| !used[r] && rows[r].0.bit(col) == 1) else {
            continue;
        };
        used[r] = true;
        pivots.push((r, col));
        for other in 0..rows.len() {
            if other != r && rows[other].0.bit(col) == 1 {
                let (v, rhs) = rows[r].clone();
                rows[other].0 = rows[other].0.xor(&v);
                rows[other].1 ^= rhs;
            }
        }
    }
    // Inconsistent system (can only come from the stray row reducing to 0=1).
    if rows
        .iter()
        .enumerate()
        .any(|(i, (v, rhs))| !used[i] && v.is_zero() && *rhs == 1)
    {
        return None;
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut theta_bits = vec![0u8; dim];
    if stray.is_none() {
        // Need any nonzero θ in the null space: force the first free column.
        let free = (0..dim).find(|c| !pivot_cols.contains(c))?;
        theta_bits[free] = 1;
    }
    // Back-substitute pivot variables.
    for &(r, c) in pivots.iter().rev() {
        let (v, rhs) = &rows[r];
        let mut val = *rhs;
        for j in 0..dim {
            if j != c && v.bit(j) == 1 {
                val ^= theta_bits[j];
            }
        }
        theta_bits[c] = val;
    }
    let theta = ParityClass::from_bits(&theta_bits);
    if theta.is_zero() {
        None
    } else {
        Some(theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naive;
    use num_traits::FromPrimitive;

    fn indicator(values: &[i64]) -> MassFunction {
        MassFunction::indicator(&PointSet::from_i64(values))
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn eta_profile_examples() {
        let a = PointSet::from_rows(2, &[&[0, 0], &[1, 1], &[2, 0]]).unwrap();
        let eta = eta_profile(&MassFunction::indicator(&a)).unwrap();
        assert_eq!(eta.mass_sq(&"00".parse().unwrap()), int(2));
        assert_eq!(eta.mass_sq(&"11".parse().unwrap()), int(1));
        assert_eq!(*eta.total(), int(3));

        let ap: Vec<i64> = (0..10).collect();
        let eta = eta_profile(&indicator(&ap)).unwrap();
        assert_eq!(eta.mass_sq(&"0".parse().unwrap()), int(5));
        assert_eq!(eta.mass_sq(&"1".parse().unwrap()), int(5));

        // Weights 3 at 0 and 4 at 2: single class mass 9 + 16 = 25.
        let f = MassFunction::new(
            1,
            vec![
                (crate::lattice::LatticePoint::scalar(0), int(3)),
                (crate::lattice::LatticePoint::scalar(2), int(4)),
            ],
        )
        .unwrap();
        let eta = eta_profile(&f).unwrap();
        assert_eq!(eta.support_size(), 1);
        assert_eq!(eta.mass_sq(&"0".parse().unwrap()), int(25));

        assert!(eta_profile(&MassFunction::new(1, vec![]).unwrap()).is_err());
    }

    #[test]
    fn eta_json_has_bitstring_keys() {
        let a = PointSet::from_rows(2, &[&[0, 1], &[1, 0], &[3, 2]]).unwrap();
        let eta = eta_profile(&MassFunction::indicator(&a)).unwrap();
        let v = eta.to_json();
        assert_eq!(v["01"], "1");
        assert_eq!(v["10"], "2");
    }

    #[test]
    fn constrained_quad_examples() {
        // Single point with weight w → w⁸.
        let f = MassFunction::new(
            2,
            vec![(crate::lattice::LatticePoint::from_i64(&[1, 2]), int(3))],
        )
        .unwrap();
        assert_eq!(constrained_quad_sum(&f), int(6561));

        // {0,1} ⊆ ℤ hits both classes equally: ‖f‖₂⁸/2 = 16/2 = 8, and the
        // U³ energy 8 meets it with equality.
        let f = indicator(&[0, 1]);
        assert_eq!(constrained_quad_sum(&f), int(8));
        assert_eq!(crate::energy::u3_energy(&f), int(8));
    }

    #[test]
    fn constrained_quad_matches_direct_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let f = crate::checks::sample_mass_function(&mut rng, 2, 8, &[3, 10]);
            assert_eq!(constrained_quad_sum(&f), naive::constrained_quad_direct(&f));
        }
    }

    #[test]
    fn eta_lp_closed_forms() {
        let eta = EtaProfile::from_mass_sq(
            3,
            vec![("000".parse().unwrap(), int(4))],
        )
        .unwrap();
        assert!((eta_lp(&eta, 8.0 / 3.0) - 2.0).abs() < 1e-12);
        assert!((eta_lp(&eta, 2.0) - 2.0).abs() < 1e-12);

        let eta = EtaProfile::from_mass_sq(
            1,
            vec![("0".parse().unwrap(), int(1)), ("1".parse().unwrap(), int(1))],
        )
        .unwrap();
        assert!((eta_lp(&eta, 8.0 / 3.0) - 2f64.powf(0.375)).abs() < 1e-12);

        let ap: Vec<i64> = (0..10).collect();
        let eta = eta_profile(&indicator(&ap)).unwrap();
        let expect = (2.0 * 5f64.powf(4.0 / 3.0)).powf(0.375);
        assert!((eta_lp(&eta, 8.0 / 3.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn fiber_gamma_examples() {
        let g = fiber_gamma(&PointSet::from_i64(&[0, 2, 4])).unwrap();
        assert_eq!(g.support_size(), 1);
        assert_eq!(g.pow8(&"0".parse().unwrap()), int(33));

        let g = fiber_gamma(&PointSet::from_i64(&[0, 1])).unwrap();
        assert_eq!(g.pow8(&"0".parse().unwrap()), int(1));
        assert_eq!(g.pow8(&"1".parse().unwrap()), int(1));
    }

    #[test]
    fn gamma_support_inside_eta_support_and_pointwise_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..25 {
            let a = crate::checks::sample_point_set(&mut rng, 3, 8, 6);
            let f = MassFunction::indicator(&a);
            let eta = eta_profile(&f).unwrap();
            let gamma = fiber_gamma(&a).unwrap();
            for (c, g8) in gamma.iter() {
                let m = eta.mass_sq(c);
                assert!(!m.is_zero(), "supp γ ⊆ supp η");
                // γ(ω)⁸ ≤ η(ω)⁸ = (η²)⁴ exactly.
                assert!(g8 <= &pow_rational(&m, 4), "γ ≤ η pointwise");
            }
        }
    }

    #[test]
    fn sparse_u3_f2_small_cases() {
        // Singleton support with value v: norm is v.
        let v = sparse_u3_f2(&[("01".parse().unwrap(), int(390625))]); // 5⁸
        assert!((v - 5.0).abs() < 1e-9);

        // Indicator of the 2-element subgroup {0, e₁} of 𝔽₂²: ‖g‖_{U³}⁸ = 16.
        let vals = vec![
            ("00".parse().unwrap(), int(1)),
            ("10".parse().unwrap(), int(1)),
        ];
        let p8 = sparse_u3_f2_pow8(&vals);
        assert!((p8 - 16.0).abs() < 1e-9);
        assert!((sparse_u3_f2(&vals) - 2f64.sqrt()).abs() < 1e-12);

        // Uniform on a coset of a 4-element subgroup of 𝔽₂³: 𝓔 = 1.
        let h: Vec<ParityClass> =
            ["001", "011", "101", "111"].iter().map(|s| s.parse().unwrap()).collect();
        let vals: Vec<(ParityClass, BigRational)> =
            h.into_iter().map(|c| (c, int(1))).collect();
        let p8 = sparse_u3_f2_pow8(&vals);
        assert!((p8 - 256.0).abs() < 1e-9); // |H|⁴
        let eta = EtaProfile::from_mass_sq(
            3,
            vals.iter().map(|(c, _)| (c.clone(), int(1))).collect(),
        )
        .unwrap();
        assert!((eta_normalized_energy(&eta) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_u3_f2_matches_dense_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d = rng.gen_range(1..=4);
            let size = rng.gen_range(1..=6).min(1 << d);
            let mut vals: Vec<(ParityClass, BigRational)> = Vec::new();
            let mut used = std::collections::BTreeSet::new();
            while vals.len() < size {
                let w = rng.gen_range(0..(1u64 << d));
                if used.insert(w) {
                    let v = rng.gen_range(1..=4i64);
                    vals.push((ParityClass::from_word(d, w), int(v).pow(8)));
                }
            }
            let dense: HashMap<ParityClass, f64> = vals
                .iter()
                .map(|(c, v8)| (c.clone(), eighth_root(v8)))
                .collect();
            let expect = naive::u3_f2_dense(d, &dense);
            let got = sparse_u3_f2_pow8(&vals);
            assert!(
                (got - expect).abs() <= 1e-9 * expect.max(1.0),
                "{got} vs {expect}"
            );
        }
    }

    #[test]
    fn hyperplane_search_single_class() {
        let eta = EtaProfile::from_mass_sq(3, vec![("101".parse().unwrap(), int(7))]).unwrap();
        let split = hyperplane_imbalance_search(&eta, 0.1).unwrap();
        assert!(!split.normal.is_zero());
        assert_eq!(split.min_alpha(), 0.0);
        // The single class sits on the heavy side.
        let c: ParityClass = "101".parse().unwrap();
        assert_eq!(c.dot(&split.normal), split.offset);
    }

    #[test]
    fn hyperplane_search_uniform_none() {
        let vals: Vec<(ParityClass, BigRational)> = (0..4)
            .map(|w| (ParityClass::from_word(2, w), int(1)))
            .collect();
        let eta = EtaProfile::from_mass_sq(2, vals).unwrap();
        assert!(hyperplane_imbalance_search(&eta, 0.1).is_none());
    }

    #[test]
    fn hyperplane_search_planted_stray() {
        // Mass 1 on the coset (1,0,0,0) + span{e₂, e₃} of 𝔽₂⁴, mass 0.01 on a
        // stray class outside.
        let mut vals: Vec<(ParityClass, BigRational)> = Vec::new();
        for c in ["1000", "1010", "1001", "1011"] {
            vals.push((c.parse().unwrap(), BigRational::new(1.into(), 4.into())));
        }
        vals.push(("0100".parse().unwrap(), BigRational::from_f64(0.01).unwrap()));
        let eta = EtaProfile::from_mass_sq(4, vals).unwrap();
        let split = hyperplane_imbalance_search(&eta, 0.1).unwrap();
        let stray: ParityClass = "0100".parse().unwrap();
        assert_ne!(stray.dot(&split.normal), split.offset, "stray separated");
        let min_frac = split.minority_frac();
        let expect = BigRational::from_f64(0.01).unwrap() / eta.total();
        assert_eq!(*min_frac, expect);
        // Cross-check against exhaustive enumeration guarantee: min α ≤ τ.
        assert!(split.min_alpha() <= 0.1 + 1e-12);
    }

    #[test]
    fn hyperplane_search_sparse_path_high_dim() {
        // d = 30 forces the span detector. Coset = x₀ ⊕ span{e₁}, stray at e₅.
        let d = 30;
        let x0 = ParityClass::from_word(d, 1); // e₀
        let mut vals = vec![
            (x0.clone(), int(50)),
            (x0.xor(&ParityClass::from_word(d, 2)), int(50)),
        ];
        vals.push((ParityClass::from_word(d, 32), int(1))); // stray
        let eta = EtaProfile::from_mass_sq(d, vals).unwrap();
        let split = hyperplane_imbalance_search(&eta, 0.1).unwrap();
        assert_eq!(
            *split.minority_frac(),
            BigRational::new(1.into(), 101.into())
        );
        let stray = ParityClass::from_word(d, 32);
        assert_ne!(stray.dot(&split.normal), split.offset);
        assert_eq!(x0.dot(&split.normal), split.offset);
    }

    #[test]
    fn eta_l2_matches_f_l2() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let f = crate::checks::sample_mass_function(&mut rng, 2, 9, &[3, 10, 100]);
            if f.is_zero() {
                continue;
            }
            let eta = eta_profile(&f).unwrap();
            assert_eq!(*eta.total(), f.l2_sq());
        }
    }
}
