use hybridsearch_core::{cosine, dot, l2_normalize, sparse_dot, DenseVec, SparseVec};
use proptest::prelude::*;

fn dense(dim: usize) -> impl Strategy<Value = DenseVec> {
    proptest::collection::vec(-10.0f32..10.0, dim).prop_map(|v| DenseVec::new(v).unwrap())
}

fn sparse() -> impl Strategy<Value = SparseVec> {
    proptest::collection::btree_map(0u32..1000, 1e-3f32..50.0, 0..30)
        .prop_map(|m| SparseVec::from_pairs(1000, m.into_iter().collect()).unwrap())
}

proptest! {
    #[test]
    fn dot_and_sparse_dot_are_symmetric(a in dense(16), b in dense(16), s in sparse(), t in sparse()) {
        prop_assert_eq!(dot(&a, &b).unwrap(), dot(&b, &a).unwrap());
        prop_assert_eq!(sparse_dot(&s, &t).unwrap(), sparse_dot(&t, &s).unwrap());
    }

    #[test]
    fn normalize_is_idempotent(v in dense(16)) {
        prop_assume!(v.norm() > 1e-3);
        let once = l2_normalize(&v).unwrap();
        let twice = l2_normalize(&once).unwrap();
        prop_assert!(once.is_unit());
        for (x, y) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn cosine_is_bounded(a in dense(8), b in dense(8)) {
        prop_assume!(a.norm() > 0.0 && b.norm() > 0.0);
        let c = cosine(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&c));
    }

    #[test]
    fn sparse_rebuild_is_exact(s in sparse()) {
        let rebuilt = SparseVec::new(s.vocab_dim(), s.indices().to_vec(), s.values().to_vec()).unwrap();
        prop_assert_eq!(rebuilt, s);
    }
}
