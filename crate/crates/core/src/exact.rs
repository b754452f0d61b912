//! Exact integer rank by fraction-free (Bareiss) elimination.
//!
//! Runs in `i128` and restarts in arbitrary precision on the first overflow.

use num_bigint::BigInt;
use num_traits::Zero;

pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| i128::from(x)).collect()).collect();
    match bareiss_i128(&mut a) {
        Some(rank) => rank,
        None => {
            let mut b: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            bareiss_big(&mut b)
        }
    }
}

fn bareiss_i128(a: &mut [Vec<i128>]) -> Option<usize> {
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev: i128 = 1;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(pivot) = (rank..nrows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, pivot);
        let p = a[rank][col];
        for r in rank + 1..nrows {
            let f = a[r][col];
            for c in col..ncols {
                let v = p.checked_mul(a[r][c])?.checked_sub(f.checked_mul(a[rank][c])?)?;
                // exact by Sylvester's identity
                a[r][c] = v / prev;
            }
        }
        prev = p;
        rank += 1;
    }
    Some(rank)
}

pub(crate) fn bareiss_big(a: &mut [Vec<BigInt>]) -> usize {
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(pivot) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let p = a[rank][col].clone();
        for r in rank + 1..nrows {
            let f = a[r][col].clone();
            for c in col..ncols {
                let v = &p * &a[r][c] - &f * &a[rank][c];
                a[r][c] = v / &prev;
            }
        }
        prev = p;
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranks() {
        assert_eq!(integer_rank(&[]), 0);
        assert_eq!(integer_rank(&[vec![0, 0], vec![0, 0]]), 0);
        assert_eq!(integer_rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(integer_rank(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]), 3);
        assert_eq!(integer_rank(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]), 2);
    }

    #[test]
    fn overflow_falls_back_to_big_integers() {
        // Vandermonde-like rows with huge entries: full rank, forces overflow in i128
        let big = i64::MAX / 3;
        let rows = vec![vec![big, big - 1, 1], vec![big - 7, big, 3], vec![1, big, big - 11]];
        let mut b: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        assert_eq!(bareiss_big(&mut b), 3);
        assert_eq!(integer_rank(&rows), 3);
        let dependent = vec![rows[0].clone(), rows[0].clone(), rows[1].clone()];
        assert_eq!(integer_rank(&dependent), 2);
    }
}
