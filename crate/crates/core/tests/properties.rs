use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use structsync::fixtures::random_ss;
use structsync::graphs::{self, incidence, Edge, Interconnection};
use structsync::laplacians::{sample_laplacian, validate_laplacian, WeightRange};
use structsync::spectral::spectrum;
use structsync::structural::{is_ss, is_sss, SssOptions};

fn interconnection() -> impl Strategy<Value = Interconnection> {
    (2usize..=7).prop_flat_map(|q| {
        let pairs: Vec<(usize, usize)> = (1..=q)
            .flat_map(|i| (i + 1..=q).map(move |j| (i, j)))
            .collect();
        let n = pairs.len();
        proptest::collection::vec(0u8..4, n).prop_map(move |labels| {
            let mut d = Vec::new();
            let mut r = Vec::new();
            for (&(i, j), l) in pairs.iter().zip(labels) {
                let e = Edge::new(i, j).unwrap();
                // 0 none, 1 dissipative, 2 restorative, 3 both
                if l & 1 == 1 {
                    d.push(e);
                }
                if l & 2 == 2 {
                    r.push(e);
                }
            }
            Interconnection::new(q, d, r).unwrap()
        })
    })
}

fn search(ic: &Interconnection) -> bool {
    is_sss(
        ic,
        SssOptions {
            budget: 8,
            jobs: Some(1),
        },
    )
    .unwrap()
    .is_sss
}

fn small(ic: &Interconnection) -> bool {
    graphs::reduce(ic).restorative().len() <= 8
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduce_is_idempotent(ic in interconnection()) {
        let once = graphs::reduce(&ic);
        prop_assert_eq!(graphs::reduce(&once), once.clone());
        prop_assert!(once.is_disjoint());
    }

    #[test]
    fn components_match_incidence_rank(ic in interconnection()) {
        let edges = ic.union_edges();
        let count = graphs::components(ic.q(), &edges).unwrap().count();
        let g = incidence(ic.q(), &edges).unwrap().to_dense();
        let rank = if g.ncols() == 0 { 0 } else { g.rank(1e-9) };
        prop_assert_eq!(count, ic.q() - rank);
    }

    #[test]
    fn sss_implies_ss(ic in interconnection()) {
        prop_assume!(small(&ic));
        if search(&ic) {
            prop_assert!(is_ss(&ic).is_ss);
        }
    }

    #[test]
    fn reduction_preserves_sss(ic in interconnection()) {
        prop_assume!(small(&ic));
        prop_assert_eq!(search(&ic), search(&graphs::reduce(&ic)));
    }

    #[test]
    fn sampled_laplacians_are_valid(ic in interconnection(), seed in any::<u64>()) {
        let range = WeightRange::new(0.1, 10.0).unwrap();
        let d = sample_laplacian(ic.q(), ic.dissipative(), seed, range).unwrap();
        let r = sample_laplacian(ic.q(), ic.restorative(), seed ^ 1, range).unwrap();
        prop_assert!(validate_laplacian(d.matrix(), ic.dissipative()).is_valid());
        prop_assert!(validate_laplacian(r.matrix(), ic.restorative()).is_valid());
        let s = spectrum(&d, &r).unwrap();
        prop_assert!(s.min_real() >= -s.tau());
    }
}

#[test]
fn sss_verdicts_are_positive_on_sampled_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let range = WeightRange::new(0.1, 10.0).unwrap();
    let mut checked = 0;
    for k in 0..150u64 {
        let ic = random_ss(&mut rng, 7);
        if !small(&ic) || !search(&ic) {
            continue;
        }
        checked += 1;
        for s in 0..5 {
            let d = sample_laplacian(ic.q(), ic.dissipative(), k * 10 + s, range).unwrap();
            let r = sample_laplacian(ic.q(), ic.restorative(), k * 10 + s + 5, range).unwrap();
            let rep = spectrum(&d, &r).unwrap();
            assert!(rep.margin() > 0.0, "{ic:?}: {}", rep.margin());
        }
    }
    assert!(checked > 10);
}
