//! Additive (`U²`) and `U³` energies under counting measure, the
//! representation matrix `R(a,b)`, Gowers inner products, and normalized
//! energy.
//!
//! For a nonnegative finitely supported `f` on `ℤ^d`,
//!
//! ```text
//!   R(a,b)     = Σ_x f(x) f(x+a) f(x+b) f(x+a+b)
//!   ‖f‖_{U²}⁴  = Σ_{a,b} R(a,b)      = Σ_d r(d)²,  r(d) = Σ_x f(x) f(x+d)
//!   ‖f‖_{U³}⁸  = Σ_{a,b} R(a,b)²
//! ```
//!
//! The `R`-route is the production path (`O(|supp f|³)`); the naive
//! parallelepiped enumerations live in [`crate::naive`] and are used as test
//! oracles only. Energies are exact rationals; fractional powers are
//! materialized as `f64` only at comparison boundaries, and every comparison
//! the increment engine depends on is made on eighth powers exactly.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::lattice::{rational_str, LatticePoint, MassFunction};
use crate::{Error, Result};

/// Sparse matrix of parallelepiped counts `R(a,b)`, weighted by `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepMatrix {
    dim: usize,
    entries: BTreeMap<(LatticePoint, LatticePoint), BigRational>,
}

impl RepMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: &LatticePoint, b: &LatticePoint) -> BigRational {
        self.entries
            .get(&(a.clone(), b.clone()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(LatticePoint, LatticePoint), &BigRational)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ_{a,b} R(a,b)` — equals the additive energy.
    pub fn sum(&self) -> BigRational {
        self.entries.values().sum()
    }

    /// `Σ_{a,b} R(a,b)²` — equals the `U³` energy.
    pub fn sum_squares(&self) -> BigRational {
        self.entries.values().map(|v| v * v).sum()
    }

    /// Row marginal `Σ_b R(a,b)`.
    pub fn row_sum(&self, a: &LatticePoint) -> BigRational {
        self.entries
            .iter()
            .filter(|((ra, _), _)| ra == a)
            .map(|(_, v)| v)
            .sum()
    }
}

/// Support of `f` with denominators cleared: sorted points, integer weights,
/// the common denominator, and an index lookup.
struct Scaled {
    points: Vec<LatticePoint>,
    weights: Vec<BigInt>,
    denom: BigInt,
    index: HashMap<LatticePoint, usize>,
}

impl Scaled {
    fn new(f: &MassFunction) -> Self {
        let (support, denom) = f.scaled();
        let points: Vec<LatticePoint> = support.iter().map(|(p, _)| p.clone()).collect();
        let weights: Vec<BigInt> = support.into_iter().map(|(_, w)| w).collect();
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Scaled {
            points,
            weights,
            denom,
            index,
        }
    }

    fn weight_of(&self, p: &LatticePoint) -> Option<&BigInt> {
        self.index.get(p).map(|&i| &self.weights[i])
    }

    /// All difference pairs grouped by difference `d`: for each `d`, the list
    /// of `(x index, y index)` with `points[y] − points[x] = d`.
    fn pairs_by_difference(&self) -> BTreeMap<LatticePoint, Vec<(usize, usize)>> {
        let mut map: BTreeMap<LatticePoint, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, p) in self.points.iter().enumerate() {
            for (j, q) in self.points.iter().enumerate() {
                map.entry(q.sub(p)).or_default().push((i, j));
            }
        }
        map
    }
}

/// The representation matrix of `f`, exactly.
pub fn rep_matrix(f: &MassFunction) -> RepMatrix {
    let s = Scaled::new(f);
    let mut entries = BTreeMap::new();
    let d4 = pow(&s.denom, 4);
    // A pair of difference-a pairs ((x, x+a), (z, z+a)) contributes to
    // R(a, z−x): the corners are x, x+a, x+b, x+a+b with b = z−x.
    for (a, pairs) in s.pairs_by_difference() {
        for &(xi, yi) in &pairs {
            let wx = &s.weights[xi] * &s.weights[yi];
            for &(zi, wi) in &pairs {
                let b = s.points[zi].sub(&s.points[xi]);
                let w = &wx * (&s.weights[zi] * &s.weights[wi]);
                let slot = entries
                    .entry((a.clone(), b))
                    .or_insert_with(BigRational::zero);
                *slot += BigRational::new(w, d4.clone());
            }
        }
    }
    entries.retain(|_, v: &mut BigRational| !v.is_zero());
    RepMatrix {
        dim: f.dim(),
        entries,
    }
}

/// `‖f‖_{U²}⁴ = Σ_d r(d)²` with `r(d) = Σ_x f(x) f(x+d)`, exactly.
///
/// For an indicator function this is the additive energy
/// `#{x,y,z,w ∈ A : x − y = z − w}`.
pub fn additive_energy(f: &MassFunction) -> BigRational {
    let s = Scaled::new(f);
    let mut r: BTreeMap<LatticePoint, BigInt> = BTreeMap::new();
    for (i, p) in s.points.iter().enumerate() {
        for (j, q) in s.points.iter().enumerate() {
            *r.entry(q.sub(p)).or_insert_with(BigInt::zero) +=
                &s.weights[i] * &s.weights[j];
        }
    }
    let total: BigInt = r.values().map(|v| v * v).sum();
    BigRational::new(total, pow(&s.denom, 4))
}

/// `‖f‖_{U³}⁸ = Σ_{a,b} R(a,b)²`, exactly, grouped by difference to avoid
/// materializing the full matrix.
pub fn u3_energy(f: &MassFunction) -> BigRational {
    let s = Scaled::new(f);
    let mut total = BigInt::zero();
    for (_, pairs) in s.pairs_by_difference() {
        // Row R(a, ·): accumulate over b = z − x, then square.
        let mut row: BTreeMap<LatticePoint, BigInt> = BTreeMap::new();
        for &(xi, yi) in &pairs {
            let wx = &s.weights[xi] * &s.weights[yi];
            for &(zi, wi) in &pairs {
                let b = s.points[zi].sub(&s.points[xi]);
                *row.entry(b).or_insert_with(BigInt::zero) +=
                    &wx * (&s.weights[zi] * &s.weights[wi]);
            }
        }
        total += row.values().map(|v| v * v).sum::<BigInt>();
    }
    BigRational::new(total, pow(&s.denom, 8))
}

/// `U³` energy of a set: `E_{U³}(A) = ‖1_A‖_{U³}⁸`.
pub fn u3_energy_set(a: &crate::lattice::PointSet) -> BigRational {
    u3_energy(&MassFunction::indicator(a))
}

/// Additive energy of a set: `E(A) = ‖1_A‖_{U²}⁴`.
pub fn additive_energy_set(a: &crate::lattice::PointSet) -> BigRational {
    additive_energy(&MassFunction::indicator(a))
}

/// The `U³` Gowers inner product
/// `⟪f₁,…,f₈⟫ = Σ_{x,h₁,h₂,h₃} f₁(x) f₂(x+h₁) f₃(x+h₂) f₄(x+h₁+h₂) f₅(x+h₃)
/// f₆(x+h₁+h₃) f₇(x+h₂+h₃) f₈(x+h₁+h₂+h₃)`, exactly.
pub fn gowers_inner_u3(fs: &[&MassFunction; 8]) -> Result<BigRational> {
    let dim = fs[0].dim();
    for f in fs.iter() {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch(dim, f.dim()));
        }
    }
    if fs.iter().any(|f| f.is_zero()) {
        return Ok(BigRational::zero());
    }
    let scaled: Vec<Scaled> = fs.iter().map(|f| Scaled::new(f)).collect();
    let mut total = BigInt::zero();
    for (x, w1) in scaled[0].points.iter().zip(&scaled[0].weights) {
        for (p2, w2) in scaled[1].points.iter().zip(&scaled[1].weights) {
            let h1 = p2.sub(x);
            for (p3, w3) in scaled[2].points.iter().zip(&scaled[2].weights) {
                let h2 = p3.sub(x);
                let Some(w4) = scaled[3].weight_of(&p2.add(&h2)) else {
                    continue;
                };
                let w123 = w1 * w2 * w3 * w4;
                for (p5, w5) in scaled[4].points.iter().zip(&scaled[4].weights) {
                    let h3 = p5.sub(x);
                    let Some(w6) = scaled[5].weight_of(&p2.add(&h3)) else {
                        continue;
                    };
                    let Some(w7) = scaled[6].weight_of(&p3.add(&h3)) else {
                        continue;
                    };
                    let Some(w8) = scaled[7].weight_of(&p2.add(&h2).add(&h3)) else {
                        continue;
                    };
                    total += &w123 * w5 * w6 * w7 * w8;
                }
            }
        }
    }
    let denom: BigInt = scaled.iter().map(|s| s.denom.clone()).product();
    Ok(BigRational::new(total, denom))
}

/// Exact eighth power of the normalized energy:
/// `𝓔(f)⁸ = ‖f‖_{U³}⁸ / ‖f‖₂⁸ = u3_energy(f) / l2_sq(f)⁴`.
pub fn normalized_energy_pow8(f: &MassFunction) -> Result<BigRational> {
    if f.is_zero() {
        return Err(Error::ZeroFunction("normalized_energy"));
    }
    Ok(u3_energy(f) / pow_rational(&f.l2_sq(), 4))
}

/// `𝓔(f) = ‖f‖_{U³} / ‖f‖₂ ∈ (0, 1]`.
pub fn normalized_energy(f: &MassFunction) -> Result<f64> {
    Ok(eighth_root(&normalized_energy_pow8(f)?))
}

/// Everything at once, with exact fields.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// `‖f‖_{U²}⁴` (the additive energy).
    pub e_u2: BigRational,
    /// `‖f‖_{U³}⁸` (the U³ energy).
    pub e_u3: BigRational,
    pub l1: BigRational,
    pub l2_sq: BigRational,
    pub l4_4: BigRational,
    /// `𝓔(f) = ‖f‖_{U³}/‖f‖₂` as a float.
    pub normalized: f64,
}

impl EnergyReport {
    /// `K = 1/𝓔(f)`.
    pub fn k(&self) -> f64 {
        1.0 / self.normalized
    }

    pub fn to_json(&self) -> Value {
        json!({
            "e_u2": rational_str(&self.e_u2),
            "e_u3": rational_str(&self.e_u3),
            "l1": rational_str(&self.l1),
            "l2_sq": rational_str(&self.l2_sq),
            "l4_4": rational_str(&self.l4_4),
            "normalized": self.normalized,
        })
    }
}

pub fn energy_report(f: &MassFunction) -> Result<EnergyReport> {
    if f.is_zero() {
        return Err(Error::ZeroFunction("energy_report"));
    }
    let e_u3 = u3_energy(f);
    let l2_sq = f.l2_sq();
    let normalized = eighth_root(&(&e_u3 / pow_rational(&l2_sq, 4)));
    Ok(EnergyReport {
        e_u2: additive_energy(f),
        e_u3,
        l1: f.l1(),
        l2_sq,
        l4_4: f.l4_4(),
        normalized,
    })
}

pub(crate) fn pow(b: &BigInt, e: u32) -> BigInt {
    b.pow(e)
}

pub(crate) fn pow_rational(q: &BigRational, e: i32) -> BigRational {
    q.pow(e)
}

/// `q^{1/8}` as a float; `q` must be nonnegative.
pub fn eighth_root(q: &BigRational) -> f64 {
    debug_assert!(!q.is_negative());
    rational_to_f64(q).powf(0.125)
}

/// Exact rational to nearest float (handles values far outside `f64` range
/// by falling back through the numerator/denominator bit lengths).
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().bits() as i64;
        let d = q.denom().bits() as i64;
        if n > d {
            f64::INFINITY
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PointSet;
    use crate::naive;

    fn indicator(values: &[i64]) -> MassFunction {
        MassFunction::indicator(&PointSet::from_i64(values))
    }

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn rep_matrix_pair() {
        // f = 1_{{0,1}}: R(0,0)=2, R(±1,0)=R(0,±1)=1, everything else 0.
        let r = rep_matrix(&indicator(&[0, 1]));
        let p = LatticePoint::scalar;
        assert_eq!(r.get(&p(0), &p(0)), int(2));
        assert_eq!(r.get(&p(1), &p(0)), int(1));
        assert_eq!(r.get(&p(-1), &p(0)), int(1));
        assert_eq!(r.get(&p(0), &p(1)), int(1));
        assert_eq!(r.get(&p(0), &p(-1)), int(1));
        assert_eq!(r.get(&p(1), &p(1)), int(0));
        assert_eq!(r.len(), 5);

        let r = rep_matrix(&indicator(&[0]));
        assert_eq!(r.len(), 1);
        assert_eq!(r.get(&p(0), &p(0)), int(1));
    }

    #[test]
    fn rep_matrix_symmetries() {
        let f = indicator(&[0, 1, 3, 4]);
        let r = rep_matrix(&f);
        for ((a, b), v) in r.iter() {
            assert_eq!(r.get(b, a), *v, "R(a,b) = R(b,a)");
            assert_eq!(r.get(&a.neg(), &b.neg()), *v, "R(-a,-b) = R(a,b)");
        }
        // rprop1 on this fixture.
        assert_eq!(r.sum(), additive_energy(&f));
    }

    #[test]
    fn additive_energy_values() {
        assert_eq!(additive_energy(&indicator(&[0])), int(1));
        assert_eq!(additive_energy(&indicator(&[0, 1, 2])), int(19));
        // Sidon: 2·3² − 3.
        assert_eq!(additive_energy(&indicator(&[0, 1, 3])), int(15));
    }

    #[test]
    fn u3_energy_values() {
        assert_eq!(u3_energy(&indicator(&[0])), int(1));
        assert_eq!(u3_energy(&indicator(&[0, 1])), int(8));
        assert_eq!(u3_energy(&indicator(&[0, 1, 2])), int(33));
    }

    #[test]
    fn u3_energy_matches_direct_enumeration() {
        for values in [
            vec![0, 1, 3],
            vec![0, 2, 3, 7],
            vec![-1, 0, 1, 4, 6],
            vec![0, 1, 2, 3, 4],
        ] {
            let f = indicator(&values);
            assert_eq!(u3_energy(&f), naive::u3_energy_direct(&f), "{values:?}");
        }
    }

    #[test]
    fn energies_on_weighted_functions_match_oracles() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let f = crate::checks::sample_mass_function(&mut rng, 2, 6, &[3, 10]);
            assert_eq!(u3_energy(&f), naive::u3_energy_direct(&f));
            assert_eq!(additive_energy(&f), naive::additive_energy_direct(&f));
            let r = rep_matrix(&f);
            assert_eq!(r.sum(), additive_energy(&f), "rprop1");
            assert_eq!(r.sum_squares(), u3_energy(&f), "rprop2");
        }
    }

    #[test]
    fn gowers_inner_diagonal_equals_u3() {
        let f = indicator(&[0, 1]);
        let refs = [&f, &f, &f, &f, &f, &f, &f, &f];
        assert_eq!(gowers_inner_u3(&refs).unwrap(), int(8));

        let g = indicator(&[0, 1, 3]);
        let refs = [&g, &g, &g, &g, &g, &g, &g, &g];
        assert_eq!(gowers_inner_u3(&refs).unwrap(), u3_energy(&g));
    }

    #[test]
    fn gowers_inner_zero_and_mismatch() {
        let f = indicator(&[0, 1]);
        let z = MassFunction::new(1, vec![]).unwrap();
        let refs = [&f, &f, &f, &z, &f, &f, &f, &f];
        assert_eq!(gowers_inner_u3(&refs).unwrap(), int(0));

        let g2 = MassFunction::indicator(&PointSet::from_rows(2, &[&[0, 0]]).unwrap());
        let refs = [&f, &f, &f, &f, &f, &f, &f, &g2];
        assert!(gowers_inner_u3(&refs).is_err());
    }

    #[test]
    fn normalized_energy_values() {
        assert_eq!(normalized_energy(&indicator(&[0])).unwrap(), 1.0);
        let v = normalized_energy(&indicator(&[0, 1])).unwrap();
        assert!((v - 2f64.powf(-0.125)).abs() < 1e-12);
        let z = MassFunction::new(1, vec![]).unwrap();
        assert!(normalized_energy(&z).is_err());
    }

    #[test]
    fn energies_are_translation_reflection_and_padding_invariant() {
        let a = PointSet::from_i64(&[0, 1, 3, 4, 9]);
        let f = MassFunction::indicator(&a);
        let e2 = additive_energy(&f);
        let e3 = u3_energy(&f);

        let t = a.translate(&LatticePoint::scalar(17)).unwrap();
        assert_eq!(additive_energy(&MassFunction::indicator(&t)), e2);
        assert_eq!(u3_energy(&MassFunction::indicator(&t)), e3);

        let r = a.reflect();
        assert_eq!(additive_energy(&MassFunction::indicator(&r)), e2);
        assert_eq!(u3_energy(&MassFunction::indicator(&r)), e3);

        let p = a.pad(1);
        assert_eq!(additive_energy(&MassFunction::indicator(&p)), e2);
        assert_eq!(u3_energy(&MassFunction::indicator(&p)), e3);
    }

    #[test]
    fn report_fixture() {
        let rep = energy_report(&indicator(&[0, 1, 2])).unwrap();
        assert_eq!(rep.e_u2, int(19));
        assert_eq!(rep.e_u3, int(33));
        assert_eq!(rep.l1, int(3));
        assert_eq!(rep.l2_sq, int(3));
        assert_eq!(rep.l4_4, int(3));
        assert!((rep.normalized - (33.0f64 / 81.0).powf(0.125)).abs() < 1e-12);
        let v = rep.to_json();
        assert_eq!(v["e_u2"], "19");
        assert_eq!(v["e_u3"], "33");
    }
}
