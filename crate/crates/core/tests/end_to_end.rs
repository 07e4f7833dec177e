use cbpir::analysis::rate_exact;
use cbpir::gf::FieldTower;
use cbpir::scheme::{server_respond, Batch, Database, SchemeParams};
use cbpir::wire::codec::{
    decode_database, decode_query, decode_response, encode_database, encode_query, encode_response,
};
use cbpir::wire::PublicParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(b: u32, f: usize) -> SchemeParams {
    SchemeParams {
        b,
        s: 4,
        v: 2,
        n: 6,
        k: 3,
        m: 6,
        l: 5,
        f,
        weight_target: None,
    }
}

/// Every object crosses its byte encoding, as it would between processes.
#[test]
fn batch_through_serialized_objects() {
    for (b, f) in [(1, 1), (2, 3), (3, 2)] {
        let p = params(b, f);
        let tower = FieldTower::new(b, p.s, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(b as u64);
        let db = Database::random(&p, &tower, &mut rng).unwrap();
        let (db, tower) = decode_database(&encode_database(&db, &tower)).unwrap();
        let public = PublicParams::new(&p, &tower);

        let idx: Vec<usize> = (0..f).map(|t| (2 * t + 1) % p.m).collect();
        let (batch, queries) = Batch::prepare(&p, &tower, &idx, &mut rng).unwrap();
        assert_eq!(queries.len(), f + 1);

        let mut up_bits = 0;
        let mut down_bits = 0;
        let mut responses = Vec::new();
        for q in &queries {
            up_bits += q.0.payload_bits();
            let (_, q) = decode_query(&encode_query(&public, q)).unwrap();
            let a = server_respond(&db, &q).unwrap();
            down_bits += a.0.payload_bits();
            responses.push(decode_response(&encode_response(&public, &a)).unwrap().1);
        }
        let files = batch.finish(&responses, None).unwrap();
        for (t, &j) in idx.iter().enumerate() {
            assert_eq!(files[t], db.file(j));
        }
        let r = rate_exact(&p);
        assert_eq!(up_bits as u128, r.upload_bits);
        assert_eq!(down_bits as u128, r.download_bits);
    }
}

#[test]
fn reused_beta_saves_a_query() {
    let p = params(2, 2);
    let tower = FieldTower::new(2, p.s, 22).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let db = Database::random(&p, &tower, &mut rng).unwrap();

    let (first, queries) = Batch::prepare(&p, &tower, &[0, 4], &mut rng).unwrap();
    let responses: Vec<_> = queries.iter().map(|q| server_respond(&db, q).unwrap()).collect();
    let combos = first.decode(&responses).unwrap();
    let beta_combo = combos.last().unwrap().clone();
    assert_eq!(beta_combo, db.combination(first.plan().beta()));

    let beta = first.plan().beta().to_vec();
    let (second, queries) = Batch::prepare_reusing_beta(&p, &tower, &[2, 5], &beta, &mut rng).unwrap();
    assert_eq!(queries.len(), 2);
    let responses: Vec<_> = queries.iter().map(|q| server_respond(&db, q).unwrap()).collect();
    let files = second.finish(&responses, Some(&beta_combo)).unwrap();
    assert_eq!(files, vec![db.file(2), db.file(5)]);
}
