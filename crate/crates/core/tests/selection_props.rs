use mpggm::graph::{pair_count, Graph, PackedBits};
use mpggm::sampler::{ChainTrace, KernelTallies, TraceRecord};
use mpggm::selection::{compute_mpp, median_model};
use proptest::prelude::*;

const P: usize = 5;
const GROUPS: usize = 2;

fn record(it: usize, bits: &[Vec<bool>], gamma: bool) -> TraceRecord {
    TraceRecord {
        iteration: it,
        graphs: vec![bits.iter().map(|b| PackedBits::pack(b.iter().copied())).collect()],
        thetas: vec![vec![if gamma { 0.5 } else { 0.0 }]],
        gammas: vec![vec![gamma]],
        phis: vec![],
        zetas: vec![],
    }
}

fn trace(records: Vec<TraceRecord>) -> ChainTrace {
    ChainTrace {
        p: vec![P],
        groups: GROUPS,
        iterations: records.len(),
        records,
        theta_samples: vec![vec![vec![]]],
        phi_samples: vec![],
        tallies: KernelTallies::default(),
        burnin: 0,
        thinning: 1,
        seed: 0,
        stream: 0,
        pd_checks: 0,
        pd_failures: 0,
    }
}

fn arb_record() -> impl Strategy<Value = (Vec<Vec<bool>>, bool)> {
    (
        prop::collection::vec(prop::collection::vec(any::<bool>(), pair_count(P)), GROUPS),
        any::<bool>(),
    )
}

proptest! {
    #[test]
    fn mpp_ignores_record_and_chain_order(
        recs in prop::collection::vec(arb_record(), 2..40),
        split in 1usize..39,
        seed in any::<u64>(),
    ) {
        let split = split.min(recs.len() - 1);
        let all: Vec<TraceRecord> = recs.iter().enumerate().map(|(i, (b, g))| record(i, b, *g)).collect();
        let base = compute_mpp(&[trace(all.clone())]).unwrap();

        let mut shuffled = all.clone();
        let mut rng = mpggm::numerics::RngStream::new(seed, 0);
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng);
        let (a, b) = shuffled.split_at(split);
        let forward = compute_mpp(&[trace(a.to_vec()), trace(b.to_vec())]).unwrap();
        let backward = compute_mpp(&[trace(b.to_vec()), trace(a.to_vec())]).unwrap();
        prop_assert_eq!(&base.edge_mpp, &forward.edge_mpp);
        prop_assert_eq!(&base.edge_mpp, &backward.edge_mpp);
        prop_assert_eq!(&base.gamma_mpp, &forward.gamma_mpp);
        prop_assert_eq!(&base.selected, &backward.selected);
    }

    #[test]
    fn median_model_is_idempotent(recs in prop::collection::vec(arb_record(), 1..30)) {
        let all: Vec<TraceRecord> = recs.iter().enumerate().map(|(i, (b, g))| record(i, b, *g)).collect();
        let summary = compute_mpp(&[trace(all)]).unwrap();
        let selected = median_model(&summary, 0.5).unwrap();
        for m in summary.edge_mpp.iter().flatten() {
            for v in m.as_slice() {
                prop_assert!((0.0..=1.0).contains(v));
            }
        }
        // Summarize a trace that only contains the selected graphs.
        let bits: Vec<Vec<bool>> = selected[0].iter().map(Graph::upper_bits).collect();
        let again = compute_mpp(&[trace(vec![record(0, &bits, false)])]).unwrap();
        prop_assert_eq!(median_model(&again, 0.5).unwrap(), selected);
    }
}
