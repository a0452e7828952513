use proptest::prelude::*;
use vanlam_core::bits::{bits, interleave, is_prefix_free, BitString};
use vanlam_core::capital::Capital;
use vanlam_core::coding::{
    decode_qmn, decode_qn, encode_qmn, encode_qn, kc_allocate, kraft_sum, qmn_program, qn_program,
    CodeKind, PrefixCodeSet, RequestSet,
};
use vanlam_core::kolmo::GrammarSolver;
use vanlam_core::machine::gamma::gamma_len;
use vanlam_core::machine::{run, Decoder, ExecBudget, MachineConfig, ProgramSpace};

/// Dyadic interval `[v/2^ℓ, (v+1)/2^ℓ)` of a code, scaled to `2^-depth` units.
fn interval(code: &BitString, depth: usize) -> (u64, u64) {
    let start = code.to_uint().unwrap() << (depth - code.len());
    (start, start + (1 << (depth - code.len())))
}

fn intervals_disjoint(codes: &[BitString]) -> bool {
    let depth = codes.iter().map(BitString::len).max().unwrap_or(0);
    let mut ivs: Vec<_> = codes.iter().map(|c| interval(c, depth)).collect();
    ivs.sort();
    ivs.windows(2).all(|w| w[0].1 <= w[1].0)
}

#[test]
fn allocation_examples_match_interval_packing() {
    for (lens, want) in [
        (vec![1, 2, 3], vec!["0", "10", "110"]),
        (vec![1, 1], vec!["0", "1"]),
        (vec![3], vec!["000"]),
    ] {
        let got = kc_allocate(&RequestSet::from_lengths(&lens)).unwrap().codes;
        let want: Vec<BitString> = want.into_iter().map(bits).collect();
        assert_eq!(got, want);
        assert!(intervals_disjoint(&got));
        // leftmost: each code starts at the lowest point not covered by earlier ones
        let depth = 3;
        let mut covered = vec![false; 1 << depth];
        for c in &got {
            let (s, e) = interval(c, depth);
            let first_free = covered.iter().position(|&x| !x).unwrap() as u64;
            assert_eq!(s, first_free);
            for slot in &mut covered[s as usize..e as usize] {
                *slot = true;
            }
        }
    }
}

fn bounded_lengths() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=16, 0..=64).prop_map(|mut lens| {
        // drop requests from the back until the set is bounded
        while kraft_sum(&RequestSet::from_lengths(&lens)) > Capital::one() {
            lens.pop();
        }
        lens
    })
}

proptest! {
    #[test]
    fn allocation_is_prefix_free_and_exact(lens in bounded_lengths()) {
        let r = RequestSet::from_lengths(&lens);
        let codes = kc_allocate(&r).unwrap().codes;
        prop_assert_eq!(codes.len(), lens.len());
        for (c, &l) in codes.iter().zip(&lens) {
            prop_assert_eq!(c.len(), l);
        }
        prop_assert!(is_prefix_free(&codes));
        prop_assert!(intervals_disjoint(&codes));
    }

    #[test]
    fn allocation_is_online(lens in bounded_lengths(), cut in 0usize..=64) {
        let cut = cut.min(lens.len());
        let full = kc_allocate(&RequestSet::from_lengths(&lens)).unwrap().codes;
        let part = kc_allocate(&RequestSet::from_lengths(&lens[..cut])).unwrap().codes;
        prop_assert_eq!(&full[..cut], &part[..]);
    }

    #[test]
    fn tight_sets_always_fit(seed in any::<u64>()) {
        // split the unit interval at random into a complete code
        let mut lens = vec![0usize];
        let mut s = seed | 1;
        for _ in 0..24 {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            let i = (s as usize) % lens.len();
            if lens[i] < 16 {
                let l = lens.remove(i) + 1;
                lens.push(l);
                lens.push(l);
            }
        }
        lens.retain(|&l| l > 0);
        let r = RequestSet::from_lengths(&lens);
        if !lens.is_empty() {
            prop_assert_eq!(kraft_sum(&r), Capital::one());
        }
        prop_assert!(is_prefix_free(&kc_allocate(&r).unwrap().codes));
    }
}

fn generous() -> ExecBudget {
    ExecBudget::quadratic(64)
}

#[test]
fn qn_round_trip_exhaustive() {
    let cfg = MachineConfig::default();
    let space = ProgramSpace::build(&cfg, 10).unwrap();
    let mut checked = 0;
    for p in space.iter().filter(|p| p.out_len() <= 3) {
        let Some(b) = run(p, &BitString::new(), None).output else {
            continue;
        };
        for a in BitString::all_of_len(b.len()) {
            let code = encode_qn(p, &a).unwrap();
            assert_eq!(code.len(), p.len() + b.len());
            assert_eq!(
                decode_qn(&cfg, &code, &generous()).unwrap(),
                interleave(&a, &b).unwrap()
            );
            checked += 1;
        }
    }
    assert!(checked > 50, "{checked}");
}

#[test]
fn qmn_round_trip_exhaustive() {
    let cfg = MachineConfig::default();
    let space = ProgramSpace::build(&cfg, 10).unwrap();
    let mut checked = 0;
    for p in space.iter().filter(|p| p.out_len() <= 3) {
        let n = p.out_len();
        for m in n.max(1)..=3 {
            for b in BitString::all_of_len(m) {
                let Some(head) = run(p, &b, None).output else {
                    continue;
                };
                for tail in BitString::all_of_len(m - n) {
                    let code = encode_qmn(p, &b, &tail).unwrap();
                    assert_eq!(code.len(), p.len() + 2 * m - n);
                    let want = interleave(&head.concat(&tail), &b).unwrap();
                    assert_eq!(decode_qmn(&cfg, &code, m, &generous()).unwrap(), want);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 500, "{checked}");
}

#[test]
fn membership_sets_are_prefix_free() {
    let cfg = MachineConfig::default();
    let space = ProgramSpace::build(&cfg, 12).unwrap();
    let mut kinds = vec![];
    for n in 0..=3 {
        kinds.push(CodeKind::Qn { n });
        for m in n..=3 {
            kinds.push(CodeKind::Qmn { m, n });
        }
    }
    for kind in kinds {
        let set = PrefixCodeSet {
            kind,
            base: cfg.clone(),
        };
        let members = set.members(&space);
        assert!(members.iter().all(|c| set.contains(c)));
        assert!(is_prefix_free(&members), "{kind:?}");
    }
}

#[test]
fn compression_transfers_to_the_join() {
    // B↾n compressible by c bits under the budget gives a Q_n code for
    // (A⊎B)↾2n of length 2n − c + k₀, replayable under the same budget
    let cfg = MachineConfig::default();
    let k0 = cfg.header_len(Decoder::InterleaveTail).unwrap();
    let t = ExecBudget::quadratic(4);
    let mut solver = GrammarSolver::new(&cfg);
    for n in [24usize, 48, 60] {
        let b: BitString = (0..n).map(|i| i % 3 == 0).collect();
        let a: BitString = (0..n).map(|i| (i * 7 + 3) % 5 < 2).collect();
        let w = solver.witness(&b, &BitString::new());
        let c = n as isize - w.len() as isize;
        assert!(c > 0, "B↾{n} should be compressible");
        let code = encode_qn(&w, &a).unwrap();
        let p = qn_program(&cfg, &code).unwrap();
        assert_eq!(p.len() as isize, 2 * n as isize - c + k0 as isize);
        let out = run(&p, &BitString::new(), Some(&t));
        assert_eq!(out.output, Some(interleave(&a, &b).unwrap()));

        // conditional form: A↾n' compressible given B↾m
        let m = n;
        let head = b.slice(0, m / 2);
        let w = solver.witness(&head, &b);
        let tail = a.slice(m / 2, m);
        let code = encode_qmn(&w, &b, &tail).unwrap();
        let p = qmn_program(&cfg, &code, m).unwrap();
        let c = (m / 2) as isize - w.len() as isize;
        let k0m = cfg.header_len(Decoder::ConditionalInterleave).unwrap() + gamma_len(m as u64);
        assert_eq!(p.len() as isize, 2 * m as isize - c + k0m as isize);
        let want = interleave(&head.concat(&tail), &b).unwrap();
        assert_eq!(run(&p, &BitString::new(), Some(&t)).output, Some(want));
    }
}
