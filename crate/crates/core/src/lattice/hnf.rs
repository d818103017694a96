//! Integer normal forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::IntMatrix;

fn row_axpy(m: &mut IntMatrix, target: usize, source: usize, factor: &BigInt) {
    if factor.is_zero() {
        return;
    }
    for j in 0..m.cols() {
        let v = &m[(target, j)] - factor * &m[(source, j)];
        m[(target, j)] = v;
    }
}

fn negate_row(m: &mut IntMatrix, i: usize) {
    for x in m.row_mut(i) {
        *x = -x.clone();
    }
}

/// Row-style Hermite normal form.
///
/// Returns `(h, u)` with `u * m == h`, `u` unimodular, `h` in echelon form with
/// positive pivots and entries above each pivot reduced into `[0, pivot)`.
/// Zero rows of `h` are at the bottom.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows());
    let mut p = 0;
    for c in 0..h.cols() {
        if p == h.rows() {
            break;
        }
        loop {
            // smallest nonzero entry in this column at or below the pivot row
            let best = (p..h.rows())
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&a, &b| h[(a, c)].abs().cmp(&h[(b, c)].abs()));
            let Some(best) = best else { break };
            h.swap_rows(p, best);
            u.swap_rows(p, best);
            let mut done = true;
            for i in p + 1..h.rows() {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = h[(i, c)].div_floor(&h[(p, c)]);
                row_axpy(&mut h, i, p, &q);
                row_axpy(&mut u, i, p, &q);
                if !h[(i, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(p, c)].is_zero() {
            continue;
        }
        if h[(p, c)].is_negative() {
            negate_row(&mut h, p);
            negate_row(&mut u, p);
        }
        for i in 0..p {
            let q = h[(i, c)].div_floor(&h[(p, c)]);
            row_axpy(&mut h, i, p, &q);
            row_axpy(&mut u, i, p, &q);
        }
        p += 1;
    }
    (h, u)
}

/// Nonzero invariant factors of the Smith normal form, in divisibility order.
pub fn smith_invariants(m: &IntMatrix) -> Vec<BigInt> {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pick the smallest nonzero entry of the remaining block
        let mut pos = None;
        for i in t..rows {
            for j in t..cols {
                if !a[(i, j)].is_zero()
                    && pos.is_none_or(|(pi, pj)| a[(i, j)].abs() < a[(pi, pj)].abs())
                {
                    pos = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pos else { break };
        a.swap_rows(t, pi);
        for i in 0..rows {
            let tmp = a[(i, t)].clone();
            a[(i, t)] = a[(i, pj)].clone();
            a[(i, pj)] = tmp;
        }
        let mut clean = true;
        for i in t + 1..rows {
            let q = a[(i, t)].div_floor(&a[(t, t)]);
            row_axpy(&mut a, i, t, &q);
            if !a[(i, t)].is_zero() {
                clean = false;
            }
        }
        for j in t + 1..cols {
            let q = a[(t, j)].div_floor(&a[(t, t)]);
            if !q.is_zero() {
                for i in 0..rows {
                    let v = &a[(i, j)] - &q * &a[(i, t)];
                    a[(i, j)] = v;
                }
            }
            if !a[(t, j)].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // divisibility: the pivot must divide the rest of the block
        let pivot = a[(t, t)].clone();
        let offender = (t + 1..rows)
            .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
            .find(|&(i, j)| !a[(i, j)].is_multiple_of(&pivot));
        if let Some((i, _)) = offender {
            let one = BigInt::from(-1);
            row_axpy(&mut a, t, i, &one);
            continue;
        }
        out.push(pivot.abs());
        t += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_hnf(h: &IntMatrix) -> bool {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for i in 0..h.rows() {
            let lead = (0..h.cols()).find(|&j| !h[(i, j)].is_zero());
            match lead {
                None => seen_zero = true,
                Some(c) => {
                    if seen_zero || last_pivot.is_some_and(|lp| c <= lp) || h[(i, c)] <= BigInt::zero() {
                        return false;
                    }
                    for k in 0..i {
                        if h[(k, c)].is_negative() || h[(k, c)] >= h[(i, c)] {
                            return false;
                        }
                    }
                    last_pivot = Some(c);
                }
            }
        }
        true
    }

    #[test]
    fn identity_is_fixed() {
        let m = IntMatrix::identity(3);
        let (h, u) = hermite_normal_form(&m);
        assert_eq!(h, m);
        assert_eq!(u, m);
    }

    #[test]
    fn two_by_two_reduces() {
        let m = IntMatrix::from_i64_rows(&[&[2, 4], &[6, 8]]);
        let (h, u) = hermite_normal_form(&m);
        assert_eq!(u.mul(&m), h);
        assert_eq!(u.determinant().abs(), BigInt::from(1));
        assert!(is_hnf(&h));
        // |det m| = 8 = product of the pivots
        assert_eq!(&h[(0, 0)] * &h[(1, 1)], BigInt::from(8));
        assert_eq!(smith_invariants(&m), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn zero_row_stays_zero() {
        let m = IntMatrix::from_i64_rows(&[&[0, 0, 0], &[1, 2, 3]]);
        let (h, u) = hermite_normal_form(&m);
        assert_eq!(u.mul(&m), h);
        assert!(h.row(1).iter().all(Zero::is_zero));
    }

    #[test]
    fn smith_of_unimodular_is_all_ones() {
        let m = IntMatrix::from_i64_rows(&[&[2, 1], &[1, 1]]);
        assert_eq!(smith_invariants(&m), vec![BigInt::from(1), BigInt::from(1)]);
    }

    proptest::proptest! {
        #[test]
        fn hnf_certificate(entries in proptest::collection::vec(-20i64..20, 12), rows in 1usize..5) {
            let cols = 12 / rows.max(1);
            let rows = 12 / cols;
            let m = IntMatrix::from_vec(rows, cols, entries[..rows * cols].iter().map(|&x| BigInt::from(x)).collect());
            let (h, u) = hermite_normal_form(&m);
            proptest::prop_assert_eq!(u.mul(&m), h.clone());
            proptest::prop_assert_eq!(u.determinant().abs(), BigInt::from(1));
            proptest::prop_assert!(is_hnf(&h));
        }
    }
}
