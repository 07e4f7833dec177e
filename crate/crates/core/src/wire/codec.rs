//! Self-describing byte layout for databases, queries and responses.
//!
//! ```text
//! magic "CBPIR\0" | version u8 | kind u8 | params block | matrix
//! params block: b s v n k m L f (u32 LE each) | base modulus (u32 LE)
//!               | extension modulus, s + 1 coefficients (u16 LE each)
//! ```
//! The matrix uses the matfq serialization. Trailing bytes are rejected.

use crate::error::{Error, Result};
use crate::gf::{FieldTower, Fq};
use crate::matfq::{MatFq, MatFqs};
use crate::scheme::{Database, QueryMatrix, ResponseMatrix, SchemeParams};

pub const MAGIC: &[u8; 6] = b"CBPIR\0";
pub const FORMAT_VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ObjectKind {
    Database = 1,
    Query = 2,
    Response = 3,
}

impl TryFrom<u8> for ObjectKind {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        match b {
            1 => Ok(Self::Database),
            2 => Ok(Self::Query),
            3 => Ok(Self::Response),
            _ => Err(Error::Format(format!("unknown object kind {b}"))),
        }
    }
}

/// Public parameters as carried on the wire: the scheme shape plus the
/// field moduli. The client-side weight target is not part of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParams {
    pub params: SchemeParams,
    pub tower: FieldTower,
}

impl PublicParams {
    pub fn new(params: &SchemeParams, tower: &FieldTower) -> Self {
        Self {
            params: SchemeParams {
                weight_target: None,
                ..params.clone()
            },
            tower: tower.clone(),
        }
    }

    /// Same scheme shape and same field moduli.
    pub fn compatible(&self, other: &Self) -> bool {
        self == other
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let have = self.bytes.len() - self.at;
        if have < n {
            return Err(Error::Truncated { needed: n, have });
        }
        let out = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.at..]
    }
}

pub fn encode_params_block(pp: &PublicParams) -> Vec<u8> {
    let p = &pp.params;
    let mut out = Vec::with_capacity(36 + 2 * (p.s + 1));
    for x in [p.b as usize, p.s, p.v, p.n, p.k, p.m, p.l, p.f] {
        out.extend((x as u32).to_le_bytes());
    }
    out.extend(pp.tower.base_modulus().to_le_bytes());
    for &c in pp.tower.ext_modulus() {
        out.extend(c.to_le_bytes());
    }
    out
}

fn read_params(r: &mut Reader) -> Result<PublicParams> {
    let mut f = [0usize; 8];
    for x in &mut f {
        *x = r.u32()? as usize;
    }
    let params = SchemeParams {
        b: f[0] as u32,
        s: f[1],
        v: f[2],
        n: f[3],
        k: f[4],
        m: f[5],
        l: f[6],
        f: f[7],
        weight_target: None,
    };
    params.validate()?;
    let base_modulus = r.u32()?;
    // bound the allocation by what is actually present
    if r.rest().len() < 2 * (params.s + 1) {
        return Err(Error::Truncated {
            needed: 2 * (params.s + 1),
            have: r.rest().len(),
        });
    }
    let ext: Vec<Fq> = (0..=params.s).map(|_| r.u16()).collect::<Result<_>>()?;
    let tower = FieldTower::from_moduli(params.b, base_modulus, &ext)?;
    Ok(PublicParams { params, tower })
}

pub fn decode_params_block(bytes: &[u8]) -> Result<PublicParams> {
    let mut r = Reader { bytes, at: 0 };
    let pp = read_params(&mut r)?;
    if !r.rest().is_empty() {
        return Err(Error::Format("trailing bytes after params block".into()));
    }
    Ok(pp)
}

fn encode_object(kind: ObjectKind, pp: &PublicParams, matrix: Vec<u8>) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + matrix.len() + 64);
    out.extend(MAGIC);
    out.push(FORMAT_VERSION);
    out.push(kind as u8);
    out.extend(encode_params_block(pp));
    out.extend(matrix);
    out
}

/// Parses the header of any object, returning its kind, its parameters
/// and the offset of the matrix payload.
pub fn decode_header(bytes: &[u8]) -> Result<(ObjectKind, PublicParams, usize)> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(6)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let head = r.take(2)?;
    if head[0] != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {}", head[0])));
    }
    let kind = ObjectKind::try_from(head[1])?;
    let pp = read_params(&mut r)?;
    Ok((kind, pp, r.at))
}

fn expect_kind(bytes: &[u8], want: ObjectKind) -> Result<(PublicParams, usize)> {
    let (kind, pp, at) = decode_header(bytes)?;
    if kind != want {
        return Err(Error::Format(format!("expected {want:?}, found {kind:?}")));
    }
    Ok((pp, at))
}

fn check_consumed(used: usize, have: usize) -> Result<()> {
    if used != have {
        return Err(Error::Format(format!(
            "{} trailing bytes after matrix",
            have - used
        )));
    }
    Ok(())
}

fn check_dims(what: &str, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got != want {
        return Err(Error::Format(format!(
            "{what} is {} x {}, parameters require {} x {}",
            got.0, got.1, want.0, want.1
        )));
    }
    Ok(())
}

pub fn encode_database(db: &Database, tower: &FieldTower) -> Vec<u8> {
    let pp = PublicParams::new(db.params(), tower);
    encode_object(ObjectKind::Database, &pp, db.matrix().to_bytes())
}

pub fn decode_database(bytes: &[u8]) -> Result<(Database, FieldTower)> {
    let (pp, at) = expect_kind(bytes, ObjectKind::Database)?;
    let (x, used) = MatFq::from_bytes(pp.tower.base(), &bytes[at..])?;
    check_consumed(used, bytes.len() - at)?;
    let p = &pp.params;
    check_dims("database", (x.rows(), x.cols()), (p.l, p.m * p.delta()))?;
    Ok((Database::new(p, x)?, pp.tower))
}

pub fn encode_query(pp: &PublicParams, q: &QueryMatrix) -> Vec<u8> {
    encode_object(ObjectKind::Query, pp, q.0.to_bytes())
}

/// The query's parameters are returned so a server can compare them with
/// its own before answering.
pub fn decode_query(bytes: &[u8]) -> Result<(PublicParams, QueryMatrix)> {
    let (pp, at) = expect_kind(bytes, ObjectKind::Query)?;
    let (q, used) = MatFqs::from_bytes(&pp.tower, &bytes[at..])?;
    check_consumed(used, bytes.len() - at)?;
    let p = &pp.params;
    check_dims("query", (q.rows(), q.cols()), (p.m * p.delta(), p.n))?;
    Ok((pp, QueryMatrix(q)))
}

pub fn encode_response(pp: &PublicParams, a: &ResponseMatrix) -> Vec<u8> {
    encode_object(ObjectKind::Response, pp, a.0.to_bytes())
}

pub fn decode_response(bytes: &[u8]) -> Result<(PublicParams, ResponseMatrix)> {
    let (pp, at) = expect_kind(bytes, ObjectKind::Response)?;
    let (a, used) = MatFqs::from_bytes(&pp.tower, &bytes[at..])?;
    check_consumed(used, bytes.len() - at)?;
    let p = &pp.params;
    check_dims("response", (a.rows(), a.cols()), (p.l, p.n))?;
    Ok((pp, ResponseMatrix(a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{gen_query_original, server_respond};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (SchemeParams, FieldTower, Database, ChaCha8Rng) {
        let p = SchemeParams {
            b: 2,
            s: 4,
            v: 2,
            n: 6,
            k: 3,
            m: 4,
            l: 3,
            f: 1,
            weight_target: None,
        };
        let t = FieldTower::new(2, 4, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let db = Database::random(&p, &t, &mut rng).unwrap();
        (p, t, db, rng)
    }

    #[test]
    fn params_block_round_trip() {
        let (p, t, _, _) = setup();
        let pp = PublicParams::new(&p, &t);
        let bytes = encode_params_block(&pp);
        assert_eq!(bytes.len(), 32 + 4 + 2 * 5);
        assert_eq!(decode_params_block(&bytes).unwrap(), pp);
        assert!(matches!(
            decode_params_block(&bytes[..40]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn objects_round_trip() {
        let (p, t, db, mut rng) = setup();
        let pp = PublicParams::new(&p, &t);
        let bytes = encode_database(&db, &t);
        assert_eq!(&bytes[..6], MAGIC);
        let (db2, t2) = decode_database(&bytes).unwrap();
        assert_eq!(db2, db);
        assert_eq!(t2, t);

        let (_, q) = gen_query_original(&p, &t, 2, &mut rng).unwrap();
        let qb = encode_query(&pp, &q);
        let (pq, q2) = decode_query(&qb).unwrap();
        assert!(pq.compatible(&pp));
        assert_eq!(q2, q);
        assert_eq!(encode_query(&pq, &q2), qb);

        let a = server_respond(&db, &q).unwrap();
        let (_, a2) = decode_response(&encode_response(&pp, &a)).unwrap();
        assert_eq!(a2, a);
    }

    #[test]
    fn rejects_corruption() {
        let (p, t, db, _) = setup();
        let mut bytes = encode_database(&db, &t);
        assert!(decode_query(&bytes).is_err());
        bytes.push(0);
        assert!(decode_database(&bytes).is_err());
        bytes.pop();
        bytes[0] = b'X';
        assert!(decode_database(&bytes).is_err());

        // a response whose shape disagrees with its params
        let pp = PublicParams::new(&p, &t);
        let wrong = ResponseMatrix(MatFqs::zeros(&t, p.l + 1, p.n));
        assert!(decode_response(&encode_response(&pp, &wrong)).is_err());
    }

    #[test]
    fn weight_target_is_not_public() {
        let (p, t, _, _) = setup();
        let a = PublicParams::new(&p, &t);
        let b = PublicParams::new(
            &SchemeParams {
                weight_target: Some(3),
                ..p.clone()
            },
            &t,
        );
        assert!(a.compatible(&b));
        let c = PublicParams::new(&SchemeParams { l: 5, ..p }, &t);
        assert!(!a.compatible(&c));
    }
}
