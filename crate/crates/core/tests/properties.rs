use idws_core::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn static_partition_tiles_the_space(n in 0usize..5000, p in 1usize..64) {
        let parts = partition_static(n, p).unwrap();
        prop_assert_eq!(parts.len(), p);
        prop_assert_eq!(parts[0].start, 0);
        prop_assert_eq!(parts[p - 1].end, n);
        for w in parts.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
            // first n % p blocks are exactly one longer
            prop_assert!(w[0].len() == w[1].len() || w[0].len() == w[1].len() + 1);
        }
        let total: usize = parts.iter().map(|r| r.len()).sum();
        prop_assert_eq!(total, n);
    }

    #[test]
    fn interleaved_owner_round_robin(i in 0usize..100_000, chunk in 1usize..16, p in 1usize..32) {
        let owner = interleaved_owner(i, chunk, p);
        prop_assert!(owner < p);
        // all indices of one chunk share an owner
        let first = (i / chunk) * chunk;
        prop_assert_eq!(interleaved_owner(first, chunk, p), owner);
        prop_assert_eq!(interleaved_owner(i + chunk * p, chunk, p), owner);
    }

    #[test]
    fn donation_is_a_conserving_suffix(start in 0usize..1000, len in 0usize..1000, processed in 0usize..1200) {
        let end = start + len;
        match split_donation(start, end, processed) {
            Some(d) => {
                let remaining = estimate_remaining(start, end, processed);
                let given = d.thief_range.len();
                prop_assert!(given >= 1);
                prop_assert_eq!(d.thief_range.end, end);
                prop_assert_eq!(d.thief_range.start, d.victim_end);
                // victim keeps its own cursor, the margin, and at least half
                prop_assert!(start + processed < d.victim_end);
                prop_assert!(given <= remaining - 1 - given);
                prop_assert!(remaining - 1 - given <= given + 1);
            }
            None => prop_assert!(estimate_remaining(start, end, processed) < 3),
        }
    }

    #[test]
    fn guided_grabs_shrink_and_cover(n in 0usize..20_000, p in 1usize..32, mult in 1usize..4) {
        let sizes = guided_grab_sizes(n, p, mult);
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        prop_assert!(sizes.iter().all(|&s| s >= 1));
        for w in sizes.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        if let Some(&first) = sizes.first() {
            prop_assert_eq!(first, guided_next_chunk(n, p, mult).min(n));
        }
    }

    #[test]
    fn guided_next_chunk_bounds(rem in 0usize..1_000_000, p in 1usize..128, mult in 1usize..8) {
        let c = guided_next_chunk(rem, p, mult);
        prop_assert!(c >= 1);
        prop_assert!(c * mult * p >= rem);
        prop_assert!(rem == 0 || (c - 1) * mult * p < rem);
    }

    #[test]
    fn verifier_matches_a_count_table(
        n in 0usize..300,
        logs in proptest::collection::vec(proptest::collection::vec(0usize..330, 0..200), 1..5),
    ) {
        let report = verify_exactly_once(n, &logs);
        let mut counts = vec![0usize; n];
        let mut outside = 0;
        for &i in logs.iter().flatten() {
            if i < n { counts[i] += 1 } else { outside += 1 }
        }
        let missing: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
        let dups: Vec<usize> = (0..n).filter(|&i| counts[i] > 1).collect();
        prop_assert_eq!(report.missing_count, missing.len());
        prop_assert_eq!(report.duplicate_count, dups.len());
        prop_assert_eq!(report.out_of_range, outside);
        prop_assert_eq!(&report.missing[..], &missing[..missing.len().min(10)]);
        prop_assert_eq!(&report.duplicates[..], &dups[..dups.len().min(10)]);
        prop_assert_eq!(report.ok(), missing.is_empty() && dups.is_empty() && outside == 0);
    }

    #[test]
    fn states_are_in_range_and_reproducible(n in 0usize..3000, seed in any::<u64>()) {
        for d in Distribution::ALL {
            let spec = WorkloadSpec::new(d, n, seed);
            let a = gen_states(&spec).unwrap();
            prop_assert_eq!(a.len(), n);
            prop_assert!(a.as_slice().iter().all(|&s| s <= 3));
            prop_assert_eq!(a, gen_states(&spec).unwrap());
        }
    }
}

fn brute_force_victim(
    snapshot: &[Candidate],
    self_id: usize,
    ctx: u64,
    free: &[bool],
) -> Option<usize> {
    let mut best: Option<&Candidate> = None;
    for c in snapshot {
        if c.id == self_id || !c.active || c.context != ctx || !free[c.id] {
            continue;
        }
        best = match best {
            Some(b) if b.remaining > c.remaining || (b.remaining == c.remaining && b.id < c.id) => {
                Some(b)
            }
            _ => Some(c),
        };
    }
    best.map(|c| c.id)
}

fn snapshot_strategy() -> impl Strategy<Value = (Vec<Candidate>, Vec<bool>, usize, u64)> {
    (1usize..24).prop_flat_map(|p| {
        (
            proptest::collection::vec((any::<bool>(), 0u64..3, 0usize..6, any::<bool>()), p),
            0..p,
            0u64..3,
        )
            .prop_map(|(raw, self_id, ctx)| {
                let snap = raw
                    .iter()
                    .enumerate()
                    .map(|(id, &(active, context, remaining, _))| Candidate {
                        id,
                        active,
                        context,
                        remaining,
                    })
                    .collect();
                let free = raw.iter().map(|r| r.3).collect();
                (snap, free, self_id, ctx)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn select_victim_matches_brute_force((snap, free, self_id, ctx) in snapshot_strategy()) {
        let mut tried = Vec::new();
        let got = select_victim(&snap, self_id, ctx, |id| {
            tried.push(id);
            free[id]
        });
        prop_assert_eq!(got, brute_force_victim(&snap, self_id, ctx, &free));
        // each gate is attempted at most once
        let mut sorted = tried.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), tried.len());
    }
}

#[test]
fn random_victims_cover_the_others_uniformly() {
    use rand::SeedableRng;
    let p = 8;
    let probes = 40_000;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for self_id in [0, 3, 7] {
        let mut hits = vec![0usize; p];
        for _ in 0..probes {
            hits[pick_random_victim(&mut rng, self_id, p).unwrap()] += 1;
        }
        assert_eq!(hits[self_id], 0);
        let expected = probes as f64 / (p - 1) as f64;
        for (id, &h) in hits.iter().enumerate().filter(|&(id, _)| id != self_id) {
            let dev = (h as f64 - expected).abs() / expected;
            assert!(
                dev < 0.2,
                "victim {id} hit {h} times, expected about {expected}"
            );
        }
    }
    assert_eq!(pick_random_victim(&mut rng, 0, 1), None);
}

#[test]
fn heavier_states_cost_more() {
    use std::time::Instant;
    let sample = |state: u8| {
        let times: Vec<f64> = (0..15)
            .map(|_| {
                let t = Instant::now();
                let mut acc = 0.0;
                for i in 0..2000 {
                    acc += kernel_cost(std::hint::black_box(i), state, DEFAULT_WORK);
                }
                std::hint::black_box(acc);
                t.elapsed().as_secs_f64()
            })
            .collect();
        median(&times).unwrap()
    };
    let t: Vec<f64> = (0..4).map(sample).collect();
    assert!(
        t[0] < t[1] && t[1] < t[2] && t[2] < t[3],
        "median times {t:?}"
    );
}
