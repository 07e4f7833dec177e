use cbpir::analysis::{gaussian_binomial_exact, gaussian_binomial_logq};
use cbpir::gf::{BasisGamma, FieldTower};
use cbpir::matfq::{kron, MatFq, MatFqs};
use cbpir::wire::frame::{Frame, MsgType};
use num::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tower(b: u32, s: usize) -> FieldTower {
    FieldTower::new(b, s, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flattened_rank_ignores_basis(b in 1u32..=3, rows in 1usize..8, cols in 1usize..4, seed: u64) {
        let t = tower(b, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = MatFqs::random(&t, rows, cols, &mut rng);
        let basis = BasisGamma::sample(&t, 1, &mut rng).unwrap();
        prop_assert_eq!(a.flatten(&basis).rank(), a.flatten_power().rank());
    }

    #[test]
    fn rank_of_transpose(b in 1u32..=4, rows in 1usize..12, cols in 1usize..12, seed: u64) {
        let t = tower(b, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = MatFq::random(t.base(), rows, cols, &mut rng);
        let r = a.rank();
        prop_assert_eq!(r, a.transpose().rank());
        prop_assert!(r <= rows.min(cols));
        prop_assert_eq!(a.kernel().rows(), cols - r);
    }

    #[test]
    fn deleting_blocks_never_raises_rank(
        b in 1u32..=2,
        blocks in 2usize..6,
        first in 0usize..6,
        second in 0usize..6,
        seed: u64,
    ) {
        let t = tower(b, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = MatFqs::random(&t, blocks * 2, 3, &mut rng);
        let one = [first % blocks];
        let two = [first % blocks, second % blocks];
        let r0 = q.flatten_power().rank();
        let r1 = q.delete_row_blocks(2, &one).flatten_power().rank();
        let r2 = q.delete_row_blocks(2, &two).flatten_power().rank();
        prop_assert!(r2 <= r1 && r1 <= r0);
    }

    #[test]
    fn matrices_serialize_round_trip(b in 1u32..=16, rows in 0usize..5, cols in 0usize..5, seed: u64) {
        let t = tower(b, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = MatFq::random(t.base(), rows, cols, &mut rng);
        let bytes = a.to_bytes();
        prop_assert_eq!(bytes.len() as u64, 16 + a.payload_bits().div_ceil(8));
        prop_assert_eq!(MatFq::from_bytes(t.base(), &bytes).unwrap(), (a, bytes.len()));
        let x = MatFqs::random(&t, rows, cols, &mut rng);
        let bytes = x.to_bytes();
        prop_assert_eq!(MatFqs::from_bytes(&t, &bytes).unwrap(), (x, bytes.len()));
    }

    #[test]
    fn kron_blocks_are_scaled_copies(b in 1u32..=3, m in 1usize..6, seed: u64) {
        let t = tower(b, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let delta = MatFqs::random(&t, 3, 4, &mut rng);
        let w: Vec<u16> = (0..m).map(|_| t.base().random(&mut rng)).collect();
        let k = kron(&delta, &w);
        for (j, &c) in w.iter().enumerate() {
            prop_assert_eq!(k.row_block(j, 3), delta.scale(c));
        }
    }

    #[test]
    fn frames_round_trip(kind in 1u8..=5, payload in proptest::collection::vec(any::<u8>(), 0..64)) {
        let f = Frame::new(MsgType::try_from(kind).unwrap(), payload);
        let bytes = f.encode();
        prop_assert_eq!(Frame::decode(&bytes).unwrap(), (f, bytes.len()));
    }
}

#[test]
fn gaussian_binomial_log_matches_exact() {
    for q in [2usize, 4, 8] {
        for a in 0..14 {
            for b in 0..=a {
                let exact = gaussian_binomial_exact(a, b, q).to_f64().unwrap();
                let want = exact.ln() / (q as f64).ln();
                let got = gaussian_binomial_logq(a, b, q);
                assert!((got - want).abs() < 1e-9 * want.max(1.0), "[{a} {b}]_{q}");
            }
        }
    }
}
