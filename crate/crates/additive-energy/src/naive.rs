//! Brute-force reference implementations.
//!
//! These deliberately share no code with the production kernels: the
//! production `U³` path goes through the representation matrix, the ones here
//! enumerate parallelepipeds directly. Tests freeze expected values computed
//! by these and assert the production paths against them.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::lattice::{parity_of, LatticePoint, MassFunction, ParityClass};

fn weight_map(f: &MassFunction) -> HashMap<LatticePoint, BigRational> {
    f.iter().map(|(p, w)| (p.clone(), w.clone())).collect()
}

fn get(map: &HashMap<LatticePoint, BigRational>, p: &LatticePoint) -> Option<BigRational> {
    map.get(p).cloned()
}

/// `Σ_{x,h₁,h₂,h₃} Π f(corner)` by direct `O(|supp|⁴)` enumeration.
pub fn u3_energy_direct(f: &MassFunction) -> BigRational {
    let map = weight_map(f);
    let supp: Vec<&LatticePoint> = f.iter().map(|(p, _)| p).collect();
    let mut total = BigRational::zero();
    for &x in &supp {
        for &y in &supp {
            let h1 = y.sub(x);
            for &z in &supp {
                let h2 = z.sub(x);
                let Some(w4) = get(&map, &y.add(&h2)) else {
                    continue;
                };
                for &w in &supp {
                    let h3 = w.sub(x);
                    let Some(w6) = get(&map, &y.add(&h3)) else {
                        continue;
                    };
                    let Some(w7) = get(&map, &z.add(&h3)) else {
                        continue;
                    };
                    let Some(w8) = get(&map, &y.add(&h2).add(&h3)) else {
                        continue;
                    };
                    total += &map[x] * &map[y] * &map[z] * &w4 * &map[w] * w6 * w7 * w8;
                }
            }
        }
    }
    total
}

/// `Σ_{x,y,z} f(x) f(y) f(z) f(z−x+y)` — the quadruple count `x − y = z − w`
/// without going through difference representations.
pub fn additive_energy_direct(f: &MassFunction) -> BigRational {
    let map = weight_map(f);
    let supp: Vec<&LatticePoint> = f.iter().map(|(p, _)| p).collect();
    let mut total = BigRational::zero();
    for &x in &supp {
        for &y in &supp {
            for &z in &supp {
                let w = z.sub(x).add(y);
                if let Some(fw) = get(&map, &w) {
                    total += &map[x] * &map[y] * &map[z] * fw;
                }
            }
        }
    }
    total
}

/// The right-hand side of the mod-2 constraint inequality,
/// `Σ_{r+s+t+u ≡ 0 (2)} f(r)² f(s)² f(t)² f(u)²`, by 4-fold enumeration.
pub fn constrained_quad_direct(f: &MassFunction) -> BigRational {
    let supp: Vec<(&LatticePoint, &BigRational)> = f.iter().collect();
    let mut total = BigRational::zero();
    for (r, fr) in &supp {
        for (s, fs) in &supp {
            let rs = r.add(s);
            for (t, ft) in &supp {
                let rst = rs.add(t);
                for (u, fu) in &supp {
                    if parity_of(&rst.add(u)).is_zero() {
                        total +=
                            *fr * *fr * *fs * *fs * *ft * *ft * *fu * *fu;
                    }
                }
            }
        }
    }
    total
}

/// `‖g‖_{U²}⁴` over `𝔽₂^d` by dense enumeration of `(x, h₁, h₂)`; only
/// sensible for small `d`.
pub fn u2_f2_dense(dim: usize, g: &HashMap<ParityClass, BigRational>) -> BigRational {
    assert!(dim <= 10, "dense 𝔽₂ oracle limited to small d");
    let classes: Vec<ParityClass> = (0..(1u64 << dim))
        .map(|w| ParityClass::from_word(dim, w))
        .collect();
    let val = |c: &ParityClass| g.get(c).cloned().unwrap_or_else(BigRational::zero);
    let mut total = BigRational::zero();
    for x in &classes {
        for h1 in &classes {
            for h2 in &classes {
                total += val(x)
                    * val(&x.xor(h1))
                    * val(&x.xor(h2))
                    * val(&x.xor(h1).xor(h2));
            }
        }
    }
    total
}

/// `‖g‖_{U³}⁸` over `𝔽₂^d` by dense enumeration of `(x, h₁, h₂, h₃)` in
/// `f64`; only sensible for small `d`.
pub fn u3_f2_dense(dim: usize, g: &HashMap<ParityClass, f64>) -> f64 {
    assert!(dim <= 6, "dense 𝔽₂ oracle limited to small d");
    let classes: Vec<ParityClass> = (0..(1u64 << dim))
        .map(|w| ParityClass::from_word(dim, w))
        .collect();
    let val = |c: &ParityClass| g.get(c).copied().unwrap_or(0.0);
    let mut total = 0.0;
    for x in &classes {
        for h1 in &classes {
            for h2 in &classes {
                for h3 in &classes {
                    total += val(x)
                        * val(&x.xor(h1))
                        * val(&x.xor(h2))
                        * val(&x.xor(h1).xor(h2))
                        * val(&x.xor(h3))
                        * val(&x.xor(h1).xor(h3))
                        * val(&x.xor(h2).xor(h3))
                        * val(&x.xor(h1).xor(h2).xor(h3));
                }
            }
        }
    }
    total
}

/// Freiman-isomorphism test by full `O(n⁴)` quadruple comparison in both
/// directions; `a[i]` is paired with `b[i]`.
pub fn freiman_iso_direct(a: &[LatticePoint], b: &[LatticePoint]) -> bool {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                for l in k..n {
                    let in_a = a[i].add(&a[j]) == a[k].add(&a[l]);
                    let in_b = b[i].add(&b[j]) == b[k].add(&b[l]);
                    if in_a != in_b {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// `U³` energy over `ℤ/N` by direct dense enumeration (wraparound included).
pub fn cyclic_u3_direct(values: &[BigRational]) -> BigRational {
    let n = values.len();
    let mut total = BigRational::zero();
    for x in 0..n {
        for h1 in 0..n {
            for h2 in 0..n {
                for h3 in 0..n {
                    total += &values[x]
                        * &values[(x + h1) % n]
                        * &values[(x + h2) % n]
                        * &values[(x + h1 + h2) % n]
                        * &values[(x + h3) % n]
                        * &values[(x + h1 + h3) % n]
                        * &values[(x + h2 + h3) % n]
                        * &values[(x + h1 + h2 + h3) % n];
                }
            }
        }
    }
    total
}
