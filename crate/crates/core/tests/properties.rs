//! Property tests for the structural invariants: bijections, isometries,
//! involutions, cone inclusions and cross-checks between independent
//! computation routes.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use sepwit_core::bipartite::{BipartiteOperator, Factor};
use sepwit_core::choi::{
    apply_to_left_factor, is_completely_positive, jamiolkowski, jamiolkowski_inverse,
    SuperOperator,
};
use sepwit_core::cones::random_sp_k_with_rng;
use sepwit_core::eig;
use sepwit_core::matrix::{ComplexMatrix, HermitianOperator};
use sepwit_core::polypos::{count_real_roots, minor_sums, RealPolynomial};
use sepwit_core::rng::{ginibre_matrix, random_hermitian, RandomModel};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| c64(re, im))
}

fn complex_square(side: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec(complex_entry(), side * side)
        .prop_map(move |data| ComplexMatrix::new(side, side, data).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn realign_is_a_bijective_isometry(m in complex_square(6)) {
        let op = BipartiteOperator::new(2, 3, m.clone()).unwrap();
        let r = op.realign();
        prop_assert!((r.fro_norm() - m.fro_norm()).abs() <= 1e-12 * m.fro_norm().max(1.0));
        let back = BipartiteOperator::realign_inverse(&r, 2, 3).unwrap();
        prop_assert!(back.matrix().approx_eq(&m, 0.0));
    }

    #[test]
    fn partial_transpose_involution_and_trace(m in complex_square(6)) {
        let op = BipartiteOperator::new(3, 2, m.clone()).unwrap();
        for which in [Factor::Left, Factor::Right] {
            let pt = op.partial_transpose(which);
            prop_assert!((pt.matrix().trace() - m.trace()).norm() <= 1e-12);
            let back = pt.partial_transpose(which);
            prop_assert!(back.matrix().approx_eq(&m, 0.0));
        }
    }

    #[test]
    fn partial_transpose_preserves_hermiticity(m in complex_square(4)) {
        let h = HermitianOperator::symmetrize(&m).unwrap();
        let op = BipartiteOperator::new(2, 2, h.matrix().clone()).unwrap();
        let pt = op.partial_transpose(Factor::Right);
        prop_assert!(pt.herm_deviation() <= 1e-12 * pt.matrix().max_norm().max(1.0));
    }

    #[test]
    fn jamiolkowski_round_trip_exact(m in complex_square(9)) {
        let phi = SuperOperator::from_rep(3, 3, m.clone()).unwrap();
        let j = jamiolkowski(&phi);
        let back = jamiolkowski_inverse(&j);
        prop_assert!(back.rep().approx_eq(&m, 1e-12));
    }

    #[test]
    fn sturm_counts_constructed_roots(
        roots in proptest::collection::btree_set(-12i64..12, 1..6),
        lo in -15i64..-13,
        hi in 13i64..15,
    ) {
        let mut p = RealPolynomial::from_i64_coeffs(&[1]);
        for &r in &roots {
            p = p.mul(&RealPolynomial::from_i64_coeffs(&[-r, 1]));
        }
        let lo_r = num_rational::BigRational::from_integer(lo.into());
        let hi_r = num_rational::BigRational::from_integer(hi.into());
        let count = count_real_roots(&p, &lo_r, &hi_r).unwrap();
        prop_assert_eq!(count, roots.len());
        // squaring the polynomial must not change the distinct-root count
        let sq = p.mul(&p);
        prop_assert_eq!(count_real_roots(&sq, &lo_r, &hi_r).unwrap(), roots.len());
    }
}

#[test]
fn eig_reconstruction_up_to_side_64() {
    let model = RandomModel::new(2101);
    let mut rng = model.stream(0);
    for n in [8usize, 32, 64] {
        let h = random_hermitian(&mut rng, n);
        let e = eig::eig_hermitian(&h).unwrap();
        let resid = e.reconstruct().sub(h.matrix()).unwrap().fro_norm();
        assert!(
            resid <= 1e-10 * h.matrix().fro_norm(),
            "n={n}: residual {resid}"
        );
    }
}

#[test]
fn psd_iff_minor_sums_nonnegative() {
    // elementary positivity cross-check on random 3x3 Hermitians, both
    // directions, including shifted copies that straddle the PSD boundary
    let model = RandomModel::new(2102);
    let mut rng = model.stream(0);
    for i in 0..500usize {
        let h = random_hermitian(&mut rng, 3);
        let shift = if i % 2 == 0 { 2.5 } else { -2.5 };
        let m = h
            .matrix()
            .add(&ComplexMatrix::identity(3).scale_re(shift))
            .unwrap();
        let hs = HermitianOperator::symmetrize(&m).unwrap();
        let psd = eig::is_psd(&hs, 1e-10).unwrap();
        let sums = minor_sums(&hs);
        let scale = hs.matrix().max_norm().max(1.0);
        let all_nonneg = sums.iter().all(|&w| w >= -1e-8 * scale);
        assert_eq!(psd, all_nonneg, "instance {i}: eigs vs minor sums disagree ({sums:?})");
    }
}

#[test]
fn cp_test_agrees_with_direct_k_positivity_sampling() {
    // (Phi (x) 1_d) must map PSD inputs to PSD outputs exactly when Phi is
    // CP; the sample battery includes the maximally entangled projector,
    // which witnesses every CP failure.
    let model = RandomModel::new(2103);
    let mut rng = model.stream(0);
    let d = 2;
    let psi = sepwit_core::bipartite::max_entangled_projector(d).scale_re(1.0 / d as f64);
    let mut checked = 0usize;
    for i in 0..100usize {
        let phi = if i % 4 == 3 {
            // maps with Hermitian Choi image, often not CP
            let h = random_hermitian(&mut rng, d * d);
            jamiolkowski_inverse(&BipartiteOperator::new(d, d, h.matrix().clone()).unwrap())
        } else {
            random_sp_k_with_rng(&mut rng, d, 1 + i % d, 1 + i % 3)
                .unwrap()
                .map()
                .clone()
        };
        let cp = is_completely_positive(&phi, 1e-10);
        let mut sampled_positive = true;
        let mut states: Vec<BipartiteOperator> = vec![psi.clone()];
        for _ in 0..5 {
            let p = sepwit_core::rng::random_state(&mut rng, d * d);
            states.push(BipartiteOperator::new(d, d, p.matrix().clone()).unwrap());
        }
        for st in &states {
            let out = apply_to_left_factor(&phi, st).unwrap();
            let h = match HermitianOperator::symmetrize(out.matrix()) {
                Ok(h) => h,
                Err(_) => {
                    sampled_positive = false;
                    break;
                }
            };
            let min = eig::eig_hermitian(&h).unwrap().min_eigenvalue();
            if min < -1e-9 * out.matrix().max_norm().max(1.0) {
                sampled_positive = false;
                break;
            }
        }
        checked += 1;
        assert_eq!(cp, sampled_positive, "map {i}: Choi test vs sampling");
    }
    assert_eq!(checked, 100);
}

#[test]
fn duality_sign_on_certified_pairs() {
    // Tr(A B) >= -tol for A k-block positive by construction and B
    // k-entangled by construction, 1000 trials, d <= 3
    let model = RandomModel::new(2104);
    let mut rng = model.stream(0);
    for trial in 0..1000usize {
        let d = 2 + trial % 2;
        // block positive by construction: shifted Hermitian kept PSD (hence
        // k-block positive for every k), or the swap / reduction images at k=1
        let a = match trial % 3 {
            0 => {
                let h = random_hermitian(&mut rng, d * d);
                let e = eig::eig_hermitian(&h).unwrap();
                let shift = -e.min_eigenvalue() + 0.1;
                BipartiteOperator::new(
                    d,
                    d,
                    h.matrix()
                        .add(&ComplexMatrix::identity(d * d).scale_re(shift))
                        .unwrap(),
                )
                .unwrap()
            }
            1 => sepwit_core::bipartite::swap_operator(d),
            _ => jamiolkowski(&SuperOperator::reduction(d)),
        };
        let k = if trial % 3 == 0 { d } else { 1 };
        // k-entangled by construction
        let terms: Vec<Vec<(Vec<Complex64>, Vec<Complex64>)>> = (0..1 + trial % 2)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        (
                            sepwit_core::rng::ginibre_vector(&mut rng, d),
                            sepwit_core::rng::ginibre_vector(&mut rng, d),
                        )
                    })
                    .collect()
            })
            .collect();
        let weights = vec![1.0; terms.len()];
        let b = sepwit_core::cones::k_entangled_from_vectors(&terms, &weights).unwrap();
        let val = sepwit_core::cones::check_pairing_duality(&a, b.operator()).unwrap();
        let scale = a.matrix().max_norm() * b.operator().matrix().max_norm();
        assert!(
            val >= -1e-10 * scale.max(1.0),
            "trial {trial}: pairing {val}"
        );
    }
}

#[test]
fn nonneg_infeasibility_reverified_by_rational_grid_oracle() {
    // Independent oracle for small nonnegative-rank decisions: enumerate
    // left factors column-wise on a coarse simplex grid (denominator q),
    // solve the right factors by exact NNLS, and accept when the residual
    // vanishes. The grid cannot prove infeasibility, but on the
    // infeasible-claimed instances it must find nothing, and on easy
    // feasible instances it must succeed.
    fn oracle_finds(m: &[Vec<f64>], l: usize, q: usize) -> bool {
        let n = m.len();
        let cols = m[0].len();
        // enumerate simplex points with denominator q for one column
        fn simplex_points(n: usize, q: usize) -> Vec<Vec<f64>> {
            fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
                if n == 1 {
                    cur.push(left);
                    out.push(cur.clone());
                    cur.pop();
                    return;
                }
                for k in 0..=left {
                    cur.push(k);
                    rec(n - 1, left - k, cur, out);
                    cur.pop();
                }
            }
            let mut raw = Vec::new();
            rec(n, q, &mut Vec::new(), &mut raw);
            raw.into_iter()
                .map(|v| v.into_iter().map(|k| k as f64 / q as f64).collect())
                .collect()
        }
        let pts = simplex_points(n, q);
        let mut choice = vec![0usize; l];
        loop {
            // candidate left factors (columns sum to 1)
            let a: Vec<Vec<f64>> = choice.iter().map(|&i| pts[i].clone()).collect();
            // solve each right-factor row by exact NNLS over the candidates
            let mut ok = true;
            let mut residual = 0.0f64;
            for kcol in 0..cols {
                let target: Vec<f64> = (0..n).map(|j| m[j][kcol]).collect();
                // exhaustive active sets over <= l <= 3 candidates
                let mut best = f64::INFINITY;
                for subset in 0u32..(1 << l) {
                    let idx: Vec<usize> = (0..l).filter(|i| subset & (1 << i) != 0).collect();
                    let kk = idx.len();
                    let mut gram = vec![vec![0.0; kk]; kk];
                    let mut rhs = vec![0.0; kk];
                    for (p, &ip) in idx.iter().enumerate() {
                        rhs[p] = a[ip].iter().zip(&target).map(|(x, y)| x * y).sum();
                        for (qd, &iq) in idx.iter().enumerate() {
                            gram[p][qd] = a[ip].iter().zip(&a[iq]).map(|(x, y)| x * y).sum();
                        }
                    }
                    // tiny Gaussian solve
                    let x = solve(&gram, &rhs);
                    let Some(x) = x else { continue };
                    if x.iter().any(|&v| v < -1e-12) {
                        continue;
                    }
                    let mut res = 0.0;
                    for j in 0..n {
                        let mut acc = 0.0;
                        for (p, &ip) in idx.iter().enumerate() {
                            acc += x[p].max(0.0) * a[ip][j];
                        }
                        res += (target[j] - acc) * (target[j] - acc);
                    }
                    best = best.min(res);
                    if subset == 0 {
                        best = best.min(target.iter().map(|t| t * t).sum());
                    }
                }
                residual += best;
                if residual > 1e-16 {
                    ok = false;
                    break;
                }
            }
            if ok && residual <= 1e-16 {
                return true;
            }
            // next multiset choice (nondecreasing indices)
            let mut pos = l;
            loop {
                if pos == 0 {
                    return false;
                }
                pos -= 1;
                if choice[pos] + 1 < pts.len() {
                    choice[pos] += 1;
                    for p in pos + 1..l {
                        choice[p] = choice[pos];
                    }
                    break;
                }
            }
        }
    }

    fn solve(g: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
        let k = rhs.len();
        if k == 0 {
            return Some(vec![]);
        }
        let mut a: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let mut row = g[i].clone();
                row.push(rhs[i]);
                row
            })
            .collect();
        for col in 0..k {
            let (piv, val) = (col..k)
                .map(|r| (r, a[r][col].abs()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
            if val < 1e-12 {
                return None;
            }
            a.swap(col, piv);
            for r in 0..k {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for cc in col..=k {
                        let v = a[col][cc];
                        a[r][cc] -= f * v;
                    }
                }
            }
        }
        Some((0..k).map(|i| a[i][k] / a[i][i]).collect())
    }

    // identity 2x2 is infeasible at l = 1: the oracle agrees (finds nothing)
    let id2 = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let rep = sepwit_core::separability::nonneg_rank_decide(&id2, 1, &RandomModel::new(1)).unwrap();
    assert_eq!(rep.verdict, sepwit_core::Verdict::Infeasible);
    assert!(!oracle_finds(&id2, 1, 4));

    // the length-4 diagonal state's matrix is infeasible at l = 3: the
    // oracle's coarse grid must also come up empty
    let m: Vec<Vec<f64>> = [
        [2.0, 1.0, 1.0, 0.0],
        [1.0, 2.0, 0.0, 1.0],
        [1.0, 0.0, 2.0, 1.0],
        [0.0, 1.0, 1.0, 2.0],
    ]
    .iter()
    .map(|r| r.iter().map(|&x| x / 16.0).collect())
    .collect();
    let rep = sepwit_core::separability::nonneg_rank_decide(&m, 3, &RandomModel::new(1)).unwrap();
    assert_eq!(rep.verdict, sepwit_core::Verdict::Infeasible);
    assert!(!oracle_finds(&m, 3, 4));

    // a feasible instance on the oracle grid is found by both routes
    let ones = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
    let rep = sepwit_core::separability::nonneg_rank_decide(&ones, 1, &RandomModel::new(1)).unwrap();
    assert_eq!(rep.verdict, sepwit_core::Verdict::Feasible);
    assert!(oracle_finds(&ones, 1, 4));
}

#[test]
fn spk_products_with_battery_maps_are_cp() {
    // products of certified k-superpositive maps with certified k-positive
    // battery maps stay completely positive, both orders
    let model = RandomModel::new(2105);
    let mut rng = model.stream(0);
    for trial in 0..50usize {
        let d = 2 + trial % 2;
        let k = 1 + trial % d;
        let sp = random_sp_k_with_rng(&mut rng, d, k, 1 + trial % 3).unwrap();
        let battery: Vec<sepwit_core::cones::CertifiedPositiveMap> = if k == 1 {
            vec![
                sepwit_core::cones::CertifiedPositiveMap::Transposition(d),
                sepwit_core::cones::CertifiedPositiveMap::Reduction(d),
            ]
        } else {
            vec![sepwit_core::cones::CertifiedPositiveMap::CompletelyPositive(
                random_sp_k_with_rng(&mut rng, d, d, 2).unwrap().map().clone(),
            )]
        };
        for psi in &battery {
            let rep = sepwit_core::cones::check_product_theorem(&sp, psi, k, 1e-9).unwrap();
            assert_eq!(rep.verdict, sepwit_core::Verdict::Passed, "trial {trial}");
        }
    }
}

#[test]
fn ginibre_matrices_have_generic_rank() {
    let model = RandomModel::new(2106);
    let mut rng = model.stream(0);
    let g = ginibre_matrix(&mut rng, 5, 5);
    assert_eq!(eig::numeric_rank(&g, 1e-10), 5);
}

#[test]
fn interval_nonnegativity_matches_grid_oracle_on_random_quartics() {
    // 500 random quartics with dyadic coefficients; decisions compared to a
    // 10^5-point grid oracle, skipping instances whose grid minimum is
    // within 1e-6 of zero
    let model = RandomModel::new(2107);
    let mut rng = model.stream(0);
    let mut compared = 0usize;
    for trial in 0..500usize {
        let coeffs: Vec<f64> = (0..5)
            .map(|_| {
                let x: f64 = 4.0 * rng.gen::<f64>() - 2.0;
                // keep some touching-root-like cases in the mix
                if rng.gen::<f64>() < 0.2 {
                    x * x
                } else {
                    x
                }
            })
            .collect();
        let p = RealPolynomial::from_f64_coeffs(&coeffs).unwrap();
        let mut grid_min = f64::INFINITY;
        for i in 0..=100_000usize {
            let t = -1.0 + 2.0 * i as f64 / 100_000.0;
            let mut v = 0.0;
            for c in coeffs.iter().rev() {
                v = v * t + c;
            }
            grid_min = grid_min.min(v);
        }
        if grid_min.abs() <= 1e-6 {
            continue;
        }
        compared += 1;
        let lo = num_rational::BigRational::from_integer((-1).into());
        let hi = num_rational::BigRational::from_integer(1.into());
        let exact = sepwit_core::polypos::is_nonnegative_on(&p, &lo, &hi).unwrap();
        assert_eq!(exact, grid_min > 0.0, "trial {trial}: grid min {grid_min}");
    }
    assert!(compared >= 450, "only {compared} quartics compared");
}
