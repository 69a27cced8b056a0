//! Freiman homomorphisms, the universal 2-Freiman model of a set, and
//! Freiman dimension.
//!
//! The model of `A = {a₁ < … < a_n}` is built from the free abelian group on
//! symbols `[aᵢ]` modulo the lattice generated by `[aᵢ]+[aⱼ]−[aₖ]−[aₗ]` over
//! the additive quadruples of `A`. Smith normal form of the relation matrix
//! produces explicit images; the difference lattice of the images, re-based
//! to a lattice basis, affinely generates `ℤ^d` with `d = n − 1 − rank`.
//! The construction self-verifies: the point map must be a Freiman
//! isomorphism in both directions and the image must affinely generate, or
//! the operation fails loudly carrying its SNF certificate.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::energy::rational_to_f64;
use crate::lattice::{doubling_constant, set_to_json, LatticePoint, PointSet};
use crate::snf::{hermite_basis, smith_normal_form, solve_in_hermite_basis, IntMat};
use crate::{Error, Result};

/// An additive quadruple `aᵢ + aⱼ = aₖ + aₗ` in canonical form:
/// `i ≤ j`, `k ≤ l`, `(i,j) < (k,l)` lexicographically (so it is nontrivial).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Quadruple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
}

/// Groups the unordered index pairs of `A` by their sum, in canonical order.
fn pairs_by_sum(points: &[LatticePoint]) -> BTreeMap<LatticePoint, Vec<(usize, usize)>> {
    let mut map: BTreeMap<LatticePoint, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..points.len() {
        for j in i..points.len() {
            map.entry(points[i].add(&points[j])).or_default().push((i, j));
        }
    }
    map
}

/// All canonical nontrivial quadruples of `A`.
pub fn enumerate_quadruples(a: &PointSet) -> Vec<Quadruple> {
    let mut out = Vec::new();
    for (_, reps) in pairs_by_sum(a.points()) {
        for u in 0..reps.len() {
            for v in (u + 1)..reps.len() {
                let (i, j) = reps[u];
                let (k, l) = reps[v];
                out.push(Quadruple { i, j, k, l });
            }
        }
    }
    debug_assert!(quadruple_count_consistent(a, &out));
    out.sort();
    out
}

/// Cross-check: the ordered-representation counts implied by the canonical
/// quadruple enumeration must reproduce the additive energy.
fn quadruple_count_consistent(a: &PointSet, _quads: &[Quadruple]) -> bool {
    let mut energy = BigInt::zero();
    for (_, reps) in pairs_by_sum(a.points()) {
        let doubles = reps.iter().filter(|(i, j)| i == j).count();
        let ordered = BigInt::from(2 * reps.len() - doubles);
        energy += &ordered * &ordered;
    }
    BigRational::from_integer(energy)
        == crate::energy::additive_energy_set(a)
}

/// Certificate of the relation-lattice reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfCertificate {
    pub rank: usize,
    pub elementary_divisors: Vec<BigInt>,
}

/// The universal 2-Freiman model of an integer set.
#[derive(Debug, Clone)]
pub struct UniversalModel {
    source: PointSet,
    dimension: usize,
    /// Aligned with `source.points()`.
    images: Vec<LatticePoint>,
    torsion_invariants: Vec<BigInt>,
    snf_certificate: SnfCertificate,
}

impl UniversalModel {
    pub fn source(&self) -> &PointSet {
        &self.source
    }

    /// The Freiman dimension of the source set.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Image points, aligned with the sorted source set.
    pub fn images(&self) -> &[LatticePoint] {
        &self.images
    }

    pub fn torsion_invariants(&self) -> &[BigInt] {
        &self.torsion_invariants
    }

    pub fn snf_certificate(&self) -> &SnfCertificate {
        &self.snf_certificate
    }

    pub fn image_set(&self) -> PointSet {
        PointSet::new(self.dimension.max(1), self.images.clone()).expect("verified images")
    }

    /// Image of a source point.
    pub fn image_of(&self, p: &LatticePoint) -> Option<&LatticePoint> {
        self.source.index_of(p).map(|i| &self.images[i])
    }

    /// Pulls a subset of the image back to the corresponding subset of the
    /// source, through the stored bijection.
    pub fn pullback(&self, image_subset: &PointSet) -> Result<PointSet> {
        let by_image: BTreeMap<&LatticePoint, &LatticePoint> = self
            .images
            .iter()
            .zip(self.source.iter())
            .collect();
        let mut points = Vec::with_capacity(image_subset.len());
        for q in image_subset.iter() {
            let p = by_image
                .get(q)
                .ok_or_else(|| Error::InvalidArgument(format!("{q} is not an image point")))?;
            points.push((*p).clone());
        }
        PointSet::new(self.source.dim(), points)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dimension": self.dimension,
            "size": self.source.len(),
            "images": set_to_json(&self.image_set())["points"],
            "torsion_invariants": self
                .torsion_invariants
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>(),
            "relation_rank": self.snf_certificate.rank,
        })
    }
}

/// One generating relation per extra representation of each pairwise sum:
/// for a sum with representations `p₁ < p₂ < …` the rows are
/// `[p₁] − [p_u]` in symbol coordinates, `u ≥ 2`. This generates the same
/// lattice as all quadruple relations with only `Σ(mult − 1)` rows.
fn relation_matrix(points: &[LatticePoint]) -> IntMat {
    let n = points.len();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for (_, reps) in pairs_by_sum(points) {
        let (bi, bj) = reps[0];
        for &(i, j) in &reps[1..] {
            let mut row = vec![BigInt::zero(); n];
            row[bi] += 1;
            row[bj] += 1;
            row[i] -= 1;
            row[j] -= 1;
            rows.push(row);
        }
    }
    if rows.is_empty() {
        IntMat::zeros(0, n)
    } else {
        IntMat::from_rows(rows)
    }
}

/// Builds the universal model of `A` (`|A| ≥ 2`), verifying the result.
pub fn universal_model(a: &PointSet) -> Result<UniversalModel> {
    if a.len() < 2 {
        return Err(Error::TooSmall {
            need: 2,
            got: a.len(),
        });
    }
    let n = a.len();
    let relations = relation_matrix(a.points());
    let snf = smith_normal_form(relations);
    let rank = snf.rank;
    let certificate = SnfCertificate {
        rank,
        elementary_divisors: snf.diag.iter().filter(|d| !d.is_zero()).cloned().collect(),
    };
    let fail = |reason: &str| Error::ModelVerification {
        reason: reason.to_string(),
        rank: certificate.rank,
        divisors: certificate.elementary_divisors.clone(),
    };

    // In the coordinates y = x·Q the relation lattice is diagonal, so the
    // torsion-free quotient keeps the last n − rank coordinates of each
    // symbol row of Q.
    let free = n - rank;
    let raw: Vec<Vec<BigInt>> = (0..n)
        .map(|i| snf.right.row(i)[rank..].to_vec())
        .collect();

    // Re-base the difference lattice to one of its own bases so the images
    // affinely generate by construction.
    let dimension = n - 1 - rank;
    let diffs = IntMat::from_rows(
        (1..n)
            .map(|i| {
                (0..free)
                    .map(|j| &raw[i][j] - &raw[0][j])
                    .collect::<Vec<BigInt>>()
            })
            .collect(),
    );
    let basis = hermite_basis(diffs);
    if basis.rows != dimension {
        return Err(fail("difference lattice rank does not match n - 1 - rank"));
    }

    let images: Vec<LatticePoint> = if dimension == 0 {
        return Err(fail("degenerate model: dimension 0 for |A| ≥ 2"));
    } else {
        (0..n)
            .map(|i| {
                let diff: Vec<BigInt> = (0..free).map(|j| &raw[i][j] - &raw[0][j]).collect();
                solve_in_hermite_basis(&basis, &diff)
                    .map(LatticePoint::new)
                    .ok_or_else(|| fail("difference not expressible in lattice basis"))
            })
            .collect::<Result<_>>()?
    };

    // Verification 1: the map is a Freiman isomorphism in both directions.
    if !verify_freiman_iso_paired(a.points(), &images) {
        return Err(fail("image is not Freiman isomorphic to the source"));
    }
    // Verification 2: the images affinely generate ℤ^d — the difference
    // lattice has full rank with all elementary divisors 1.
    if !affinely_generates(&images) {
        return Err(fail("images do not affinely generate"));
    }

    Ok(UniversalModel {
        source: a.clone(),
        dimension,
        images,
        torsion_invariants: snf.torsion_invariants(),
        snf_certificate: certificate,
    })
}

/// True when the differences from the first point span all of `ℤ^d` (rank
/// `d`, all elementary divisors 1).
pub fn affinely_generates(points: &[LatticePoint]) -> bool {
    let Some(first) = points.first() else {
        return false;
    };
    let d = first.dim();
    if points.len() < d + 1 {
        return false;
    }
    let diffs = IntMat::from_rows(
        points[1..]
            .iter()
            .map(|p| p.sub(first).coords().to_vec())
            .collect(),
    );
    let snf = smith_normal_form(diffs);
    snf.rank == d && snf.diag.iter().take(d).all(|v| v.is_one())
}

/// The Freiman dimension of `A`: 0 for a single point, otherwise the
/// dimension of the universal model.
pub fn freiman_dimension(a: &PointSet) -> Result<usize> {
    match a.len() {
        0 => Err(Error::EmptySet("freiman_dimension")),
        1 => Ok(0),
        _ => Ok(universal_model(a)?.dimension),
    }
}

/// Checks whether pairing `a[i] ↔ b[i]` is a Freiman isomorphism (quadruples
/// preserved in both directions), by comparing the partitions of unordered
/// index pairs by sum.
pub fn verify_freiman_iso_paired(a: &[LatticePoint], b: &[LatticePoint]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let groups = pairs_by_sum(a);
    let mut seen_b_sums: std::collections::BTreeSet<LatticePoint> = Default::default();
    for (_, reps) in groups {
        let (i0, j0) = reps[0];
        let b_sum = b[i0].add(&b[j0]);
        // Forward: every pair in the group must have the same sum in B.
        for &(i, j) in &reps[1..] {
            if b[i].add(&b[j]) != b_sum {
                return false;
            }
        }
        // Backward: sums in B must stay distinct across groups.
        if !seen_b_sums.insert(b_sum) {
            return false;
        }
    }
    true
}

/// Freiman-isomorphism check for two sets paired by canonical order.
pub fn verify_freiman_iso(a: &PointSet, b: &PointSet) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "size mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(verify_freiman_iso_paired(a.points(), b.points()))
}

/// Advisory report on the dimension-lemma bound `dim(A) ≤ K − 1 + C·K²/|A|`
/// for doubling constant `K`.
#[derive(Debug, Clone)]
pub struct DimensionLemmaReport {
    pub dim: usize,
    pub doubling: BigRational,
    pub constant: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

impl DimensionLemmaReport {
    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.dim,
            "doubling": crate::lattice::rational_str(&self.doubling),
            "constant": self.constant,
            "bound": self.bound,
            "margin": self.margin,
            "holds": self.holds,
        })
    }
}

/// Evaluates the dimension lemma with configurable constant `C` (the paper's
/// implied constant is unspecified; this is a soft corpus check).
pub fn check_dimension_lemma(a: &PointSet, c: f64) -> Result<DimensionLemmaReport> {
    if a.is_empty() {
        return Err(Error::EmptySet("check_dimension_lemma"));
    }
    let dim = freiman_dimension(a)?;
    let doubling = doubling_constant(a)?;
    let k = rational_to_f64(&doubling);
    let bound = k - 1.0 + c * k * k / (a.len() as f64);
    let margin = bound - dim as f64;
    Ok(DimensionLemmaReport {
        dim,
        doubling,
        constant: c,
        bound,
        margin,
        holds: margin >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{additive_energy_set, u3_energy_set};
    use crate::naive;

    fn set(values: &[i64]) -> PointSet {
        PointSet::from_i64(values)
    }

    #[test]
    fn quadruples_examples() {
        let q = enumerate_quadruples(&set(&[0, 1, 2]));
        assert_eq!(q, vec![Quadruple { i: 0, j: 2, k: 1, l: 1 }]);

        assert!(enumerate_quadruples(&set(&[0, 1, 3, 7])).is_empty());

        let q = enumerate_quadruples(&set(&[0, 1, 2, 3]));
        assert_eq!(
            q,
            vec![
                Quadruple { i: 0, j: 2, k: 1, l: 1 },
                Quadruple { i: 0, j: 3, k: 1, l: 2 },
                Quadruple { i: 1, j: 3, k: 2, l: 2 },
            ]
        );
    }

    #[test]
    fn dimensions_of_known_sets() {
        let ap: Vec<i64> = (0..10).collect();
        assert_eq!(freiman_dimension(&set(&ap)).unwrap(), 1);
        assert_eq!(freiman_dimension(&set(&[0, 1, 2, 3])).unwrap(), 1);
        assert_eq!(freiman_dimension(&set(&[0, 1, 3, 7])).unwrap(), 3);
        assert_eq!(freiman_dimension(&set(&[5])).unwrap(), 0);

        let plane = PointSet::from_rows(2, &[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        assert_eq!(freiman_dimension(&plane).unwrap(), 2);
    }

    #[test]
    fn union_example_has_dimension_k() {
        let u = crate::gen::union_example(3, 2).unwrap();
        assert_eq!(
            u,
            set(&[301, 302, 303, 30001, 30002, 30003])
        );
        assert_eq!(freiman_dimension(&u).unwrap(), 2);

        let u3 = crate::gen::union_example(3, 3).unwrap();
        assert_eq!(freiman_dimension(&u3).unwrap(), 3);
    }

    #[test]
    fn model_images_are_freiman_isomorphic_and_energy_preserving() {
        for a in [
            set(&[0, 1, 2, 3, 4, 5, 6]),
            set(&[0, 1, 3, 7]),
            set(&[0, 2, 3, 10, 11]),
            crate::gen::union_example(3, 2).unwrap(),
        ] {
            let m = universal_model(&a).unwrap();
            let image = m.image_set();
            assert_eq!(image.len(), a.len());
            // Prop-style invariants: energies preserved exactly.
            assert_eq!(u3_energy_set(&a), u3_energy_set(&image));
            assert_eq!(additive_energy_set(&a), additive_energy_set(&image));
            // Cross-check the partition-based iso verifier against the naive
            // O(n⁴) one.
            assert!(naive::freiman_iso_direct(a.points(), m.images()));
            // Pullback of the whole image is the source.
            assert_eq!(m.pullback(&image).unwrap(), a);
        }
    }

    #[test]
    fn model_idempotence_and_affine_invariance() {
        for a in [set(&[0, 1, 2, 5, 6]), set(&[0, 1, 3, 7, 12])] {
            let m = universal_model(&a).unwrap();
            let again = universal_model(&m.image_set()).unwrap();
            assert_eq!(again.dimension(), m.dimension());

            let scaled = crate::lattice::dilate(&a, &BigInt::from(3));
            let translated = scaled.translate(&LatticePoint::scalar(-17)).unwrap();
            assert_eq!(
                freiman_dimension(&translated).unwrap(),
                freiman_dimension(&a).unwrap()
            );
        }
    }

    #[test]
    fn removing_a_point_drops_dimension_by_at_most_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..15 {
            let a = crate::checks::sample_point_set(&mut rng, 1, 7, 30);
            if a.len() < 3 {
                continue;
            }
            let dim = freiman_dimension(&a).unwrap();
            let mut pts = a.points().to_vec();
            let removed = pts.remove(rng.gen_range(0..pts.len()));
            let b = PointSet::new(a.dim(), pts).unwrap();
            let dim_b = freiman_dimension(&b).unwrap();
            assert!(
                dim <= dim_b + 1,
                "dim({a}) = {dim} vs dim(minus {removed}) = {dim_b}"
            );
        }
    }

    #[test]
    fn sidon_dimension_is_size_minus_one() {
        for m in [2usize, 4, 6, 8] {
            let s = crate::gen::greedy_sidon(m as u64).unwrap();
            assert_eq!(freiman_dimension(&s).unwrap(), m - 1);
        }
    }

    #[test]
    fn iso_verifier_examples() {
        let a = set(&[0, 1, 2]);
        assert!(verify_freiman_iso(&a, &a).unwrap());

        let b = PointSet::from_rows(2, &[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        assert!(!verify_freiman_iso(&a, &b).unwrap());

        let sidon = set(&[0, 1, 3, 7]);
        let basis = PointSet::from_rows(
            3,
            &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]],
        )
        .unwrap();
        assert!(verify_freiman_iso(&sidon, &basis).unwrap());

        assert!(verify_freiman_iso(&a, &sidon).is_err());
    }

    #[test]
    fn dimension_lemma_reports() {
        let ap: Vec<i64> = (0..10).collect();
        let r = check_dimension_lemma(&set(&ap), 1.0).unwrap();
        assert!(r.holds);

        let r = check_dimension_lemma(&set(&[0]), 1.0).unwrap();
        assert_eq!(r.dim, 0);
        assert!(r.holds);

        let r = check_dimension_lemma(&set(&[0, 1, 3, 7]), 1.0).unwrap();
        assert_eq!(r.dim, 3);
        assert!(r.holds); // 1.5 + 6.25/4 = 3.0625 ≥ 3
        let r_small = check_dimension_lemma(&set(&[0, 1, 3, 7]), 0.5).unwrap();
        assert!(!r_small.holds);
    }

    #[test]
    fn model_rejects_singletons() {
        assert!(universal_model(&set(&[3])).is_err());
    }
}
