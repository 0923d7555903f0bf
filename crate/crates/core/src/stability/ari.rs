use super::StabilityError;
use crate::clustering::Partition;

fn check_assets(p: &Partition, q: &Partition) -> Result<(), StabilityError> {
    if p.asset_ids() != q.asset_ids() {
        return Err(StabilityError::MismatchedAssets);
    }
    Ok(())
}

/// `K_p x K_q` table of shared members.
pub fn contingency(p: &Partition, q: &Partition) -> Result<Vec<Vec<usize>>, StabilityError> {
    check_assets(p, q)?;
    let mut table = vec![vec![0usize; q.k()]; p.k()];
    for (&a, &b) in p.labels().iter().zip(q.labels()) {
        table[a][b] += 1;
    }
    Ok(table)
}

fn pairs(n: usize) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

/// Adjusted Rand Index (Hubert-Arabie).
///
/// When the maximum index equals its expectation (both partitions trivial)
/// the result is 1 for identical clusterings and 0 otherwise.
pub fn ari(p: &Partition, q: &Partition) -> Result<f64, StabilityError> {
    let table = contingency(p, q)?;
    let n = p.len();
    if n < 2 {
        return Err(StabilityError::TooFewAssets(n));
    }
    let index: u128 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let a: u128 = table.iter().map(|row| pairs(row.iter().sum())).sum();
    let b: u128 = (0..q.k()).map(|j| pairs(table.iter().map(|row| row[j]).sum())).sum();
    // multiply through by 2 C(N,2): exact integers, a single rounding at the end
    let total = pairs(n) as i128;
    let (index, a, b) = (index as i128, a as i128, b as i128);
    let num = 2 * (index * total - a * b);
    let den = (a + b) * total - 2 * a * b;
    if den == 0 {
        return Ok(if p.same_clustering(q) { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(labels: &[usize]) -> Partition {
        let ids = (0..labels.len()).map(|i| format!("x{i}")).collect();
        Partition::canonical(ids, labels).unwrap()
    }

    #[test]
    fn contingency_examples() {
        assert_eq!(contingency(&part(&[0, 0, 0, 1, 1]), &part(&[0, 0, 0, 1, 1])).unwrap(), [[3, 0], [0, 2]]);
        assert_eq!(contingency(&part(&[0; 4]), &part(&[0, 1, 2, 3])).unwrap(), [[1, 1, 1, 1]]);
        assert_eq!(contingency(&part(&[0, 0, 1, 1]), &part(&[0, 1, 0, 1])).unwrap(), [[1, 1], [1, 1]]);
    }

    #[test]
    fn ari_examples() {
        let p = part(&[0, 0, 0, 1, 1, 1]);
        let q = part(&[0, 0, 1, 0, 1, 1]);
        assert!((ari(&p, &q).unwrap() + 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(ari(&p, &p).unwrap(), 1.0);
        let relabelled = Partition::new(p.asset_ids().to_vec(), vec![1, 1, 1, 0, 0, 0]).unwrap();
        assert_eq!(ari(&p, &relabelled).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_cases() {
        assert_eq!(ari(&part(&[0; 5]), &part(&[0; 5])).unwrap(), 1.0);
        assert_eq!(ari(&part(&[0, 1, 2, 3]), &part(&[0, 1, 2, 3])).unwrap(), 1.0);
        assert_eq!(ari(&part(&[0; 4]), &part(&[0, 1, 2, 3])).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_assets() {
        let other = Partition::new(vec!["y0".into(), "y1".into()], vec![0, 1]).unwrap();
        assert!(matches!(ari(&part(&[0, 1]), &other), Err(StabilityError::MismatchedAssets)));
    }

    fn label_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (2usize..30).prop_flat_map(|n| (prop::collection::vec(0usize..5, n), prop::collection::vec(0usize..5, n)))
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded((a, b) in label_pair()) {
            let (p, q) = (part(&a), part(&b));
            let pq = ari(&p, &q).unwrap();
            prop_assert_eq!(pq, ari(&q, &p).unwrap());
            prop_assert!((-1.0..=1.0).contains(&pq));
        }

        #[test]
        fn label_permutation_invariant((a, b) in label_pair(), shift in 1usize..5) {
            let p = part(&a);
            let k = p.k();
            let permuted: Vec<usize> = p.labels().iter().map(|l| (l + shift) % k).collect();
            let pp = Partition::new(p.asset_ids().to_vec(), permuted).unwrap();
            let q = part(&b);
            prop_assert_eq!(ari(&p, &q).unwrap(), ari(&pp, &q).unwrap());
        }

        #[test]
        fn one_iff_same_clustering((a, b) in label_pair()) {
            let (p, q) = (part(&a), part(&b));
            prop_assert_eq!(ari(&p, &q).unwrap() == 1.0, p.same_clustering(&q));
        }
    }
}
