use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cbpir::analysis::{
    attack_failure_logq, example_params, m_zero, rate_exact, rate_original, weight_threshold,
    write_bounds_csv, write_fig3_csv, write_rates_csv,
};
use cbpir::attack::{
    attack_modified, attack_original, write_reports_csv, AttackReport, DEFAULT_ENUMERATION_CAP,
};
use cbpir::gf::{FieldTower, Fq};
use cbpir::matfq::MatFq;
use cbpir::scheme::{
    gen_query, gen_query_original, server_respond, weight, Batch, Database, QueryMatrix,
    ResponseMatrix, SchemeParams, SecretPlan,
};
use cbpir::wire::codec::{
    decode_database, decode_response, encode_database, encode_params_block, encode_query,
    encode_response,
};
use cbpir::wire::{Client, PublicParams, Server, ServerConfig};
use num::rational::BigRational;
use num::{BigInt, ToPrimitive};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::params::ParamsFile;
use crate::{Failure, Rule, SchemeKind};

const DEFAULT_ADDR: &str = "127.0.0.1:7878";

pub struct Context {
    pub params: Option<PathBuf>,
    pub seed: Option<u64>,
    pub endpoint: Option<String>,
    pub out: Option<PathBuf>,
}

impl Context {
    fn params_file(&self) -> Result<ParamsFile, Failure> {
        let path = self
            .params
            .as_ref()
            .ok_or_else(|| Failure::Usage("--params is required".into()))?;
        ParamsFile::load(path).map_err(Failure::Usage)
    }

    /// Validated params plus the tower fixed by the file's seed.
    fn load(&self) -> Result<(ParamsFile, SchemeParams, FieldTower), Failure> {
        let file = self.params_file()?;
        let p = file.scheme();
        p.validate()?;
        let tower = FieldTower::new(p.b, p.s, file.seed)?;
        Ok((file, p, tower))
    }

    fn seed(&self, file: &ParamsFile) -> u64 {
        self.seed.unwrap_or(file.seed)
    }

    fn out(&self) -> Result<&Path, Failure> {
        self.out
            .as_deref()
            .ok_or_else(|| Failure::Usage("--out is required".into()))
    }
}

fn fraction(r: &BigRational) -> String {
    let approx = r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN);
    format!("{r} ({approx:.6})")
}

fn params_hash(p: &SchemeParams, tower: &FieldTower) -> String {
    hex::encode(Sha256::digest(encode_params_block(&PublicParams::new(p, tower))))
}

pub fn validate(ctx: &Context) -> Result<(), Failure> {
    let file = ctx.params_file()?;
    let p = file.scheme();
    p.validate()?;
    let rates = rate_exact(&p);
    let original = rate_original(&p);
    let target = p.effective_weight_target();
    let mz = m_zero(&p, target);
    println!("delta: {}", p.delta());
    println!("ns: {}", p.ns());
    println!("rate_exact: {}", fraction(&rates.exact_rate));
    println!("rate_asymptotic: {}", fraction(&rates.asymptotic_rate));
    println!("rate_original_asymptotic: {}", fraction(&original.asymptotic_rate));
    println!("weight_target: {target}");
    println!("weight_threshold: {}", weight_threshold(&p, p.m)?);
    println!("m0_increment: {}", mz.increment);
    println!("m0: {}", mz.m0);
    match attack_failure_logq(&p, p.m, target) {
        Some(e) => println!("attack_failure_logq: {e}"),
        None => println!("attack_failure_logq: none (m < m0)"),
    }
    Ok(())
}

pub fn gendb(ctx: &Context) -> Result<(), Failure> {
    let (file, p, tower) = ctx.load()?;
    let out = ctx.out()?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(&file));
    let db = Database::random(&p, &tower, &mut rng)?;
    fs::write(out, encode_database(&db, &tower))?;
    eprintln!(
        "wrote {} ({} payload bits)",
        out.display(),
        db.matrix().payload_bits()
    );
    Ok(())
}

pub fn serve(ctx: &Context, db_path: &Path) -> Result<(), Failure> {
    let (db, tower) = decode_database(&fs::read(db_path)?)?;
    if ctx.params.is_some() {
        let (_, p, t) = ctx.load()?;
        if !PublicParams::new(&p, &t).compatible(&PublicParams::new(db.params(), &tower)) {
            return Err(Failure::Domain("database does not match --params".into()));
        }
    }
    let addr = ctx.endpoint.as_deref().unwrap_or(DEFAULT_ADDR);
    let server = Server::bind(addr, db, tower, ServerConfig::from_env())?;
    eprintln!("listening on {}", server.local_addr()?);
    server.serve()?;
    Ok(())
}

#[derive(Serialize)]
struct Transcript {
    seed: u64,
    params_sha256: String,
    params: ParamsFile,
    mode: &'static str,
    indices: Vec<usize>,
    queries: usize,
    query_object_bytes: usize,
    query_payload_bits: u64,
    response_object_bytes: usize,
    response_payload_bits: u64,
    file_payload_bits: u64,
    measured_rate: String,
    rate_exact: String,
    rate_match: bool,
    verified: Option<bool>,
}

pub fn retrieve(ctx: &Context, indices: &[usize], db_path: Option<&Path>) -> Result<(), Failure> {
    let (file, p, tower) = ctx.load()?;
    if indices.len() != p.f {
        return Err(Failure::Usage(format!(
            "expected {} indices, got {}",
            p.f,
            indices.len()
        )));
    }
    let public = PublicParams::new(&p, &tower);
    let local = match db_path {
        Some(path) => {
            let (db, t) = decode_database(&fs::read(path)?)?;
            if !PublicParams::new(db.params(), &t).compatible(&public) {
                return Err(Failure::Domain("database does not match --params".into()));
            }
            Some(db)
        }
        None => None,
    };
    let mut remote = match &ctx.endpoint {
        Some(addr) => {
            let mut c = Client::connect(addr.as_str())?;
            if !c.params()?.compatible(&public) {
                return Err(Failure::Domain("param-mismatch with server".into()));
            }
            Some(c)
        }
        None => None,
    };
    if remote.is_none() && local.is_none() {
        return Err(Failure::Usage("need --endpoint or --db".into()));
    }

    let seed = ctx.seed(&file);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (batch, queries) = Batch::prepare(&p, &tower, indices, &mut rng)?;
    let mut t = Transcript {
        seed,
        params_sha256: params_hash(&p, &tower),
        params: file.clone(),
        mode: if remote.is_some() { "remote" } else { "in-process" },
        indices: indices.to_vec(),
        queries: queries.len(),
        query_object_bytes: 0,
        query_payload_bits: 0,
        response_object_bytes: 0,
        response_payload_bits: 0,
        file_payload_bits: 0,
        measured_rate: String::new(),
        rate_exact: String::new(),
        rate_match: false,
        verified: None,
    };
    let mut responses = Vec::with_capacity(queries.len());
    for q in &queries {
        t.query_object_bytes += encode_query(&public, q).len();
        t.query_payload_bits += q.0.payload_bits();
        let a = answer(&mut remote, local.as_ref(), &public, q)?;
        t.response_object_bytes += encode_response(&public, &a).len();
        t.response_payload_bits += a.0.payload_bits();
        responses.push(a);
    }
    let files = batch.finish(&responses, None)?;
    t.file_payload_bits = files.iter().map(MatFq::payload_bits).sum();

    let big = |x: u64| BigInt::from(x);
    let measured = BigRational::new(
        big(t.file_payload_bits),
        big(t.query_payload_bits + t.response_payload_bits),
    );
    let expected = rate_exact(&p).exact_rate;
    t.rate_match = measured == expected;
    t.measured_rate = measured.to_string();
    t.rate_exact = expected.to_string();
    if let Some(db) = &local {
        t.verified = Some(
            indices
                .iter()
                .zip(&files)
                .all(|(&j, x)| db.file(j) == *x),
        );
    }

    let json = serde_json::to_string_pretty(&t).expect("transcript serializes");
    match &ctx.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (&j, x) in indices.iter().zip(&files) {
                fs::write(dir.join(format!("file_{j}.bin")), x.to_bytes())?;
            }
            fs::write(dir.join("transcript.json"), json + "\n")?;
        }
        None => println!("{json}"),
    }
    if t.verified == Some(false) {
        return Err(Failure::Domain("recovered files differ from the database".into()));
    }
    if !t.rate_match {
        return Err(Failure::Domain(format!(
            "measured rate {} differs from {}",
            t.measured_rate, t.rate_exact
        )));
    }
    Ok(())
}

fn answer(
    remote: &mut Option<Client>,
    local: Option<&Database>,
    public: &PublicParams,
    q: &QueryMatrix,
) -> Result<ResponseMatrix, Failure> {
    match (remote, local) {
        (Some(c), _) => Ok(c.query(public, q)?),
        (None, Some(db)) => {
            // through the byte format, as a remote answer would be
            let a = server_respond(db, q)?;
            Ok(decode_response(&encode_response(public, &a))?.1)
        }
        (None, None) => unreachable!("checked by the caller"),
    }
}

fn support(row: &[Fq]) -> Vec<usize> {
    (0..row.len()).filter(|&j| row[j] != 0).collect()
}

pub fn attack(
    ctx: &Context,
    scheme: SchemeKind,
    trials: usize,
    weight_override: Option<usize>,
    rule: Option<Rule>,
    allow_large: bool,
) -> Result<(), Failure> {
    let (file, p, tower) = ctx.load()?;
    if weight_override.is_some_and(|w| w > p.m) {
        return Err(Failure::Usage(format!("--weight exceeds m = {}", p.m)));
    }
    let rule = rule.unwrap_or(match scheme {
        SchemeKind::Original => Rule::Single,
        SchemeKind::Modified => Rule::Subset,
    });
    let cap = if allow_large {
        u128::MAX
    } else {
        DEFAULT_ENUMERATION_CAP
    };
    let field = tower.base();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(&file));
    let mut reports: Vec<AttackReport> = Vec::with_capacity(trials);
    let mut hits = 0;
    for _ in 0..trials {
        // the secret row and the index set the attacker should find
        let (secret, truth): (Vec<Fq>, Vec<usize>) = match (weight_override, scheme) {
            (Some(w), _) => {
                let mut row = vec![0; p.m];
                for j in index::sample(&mut rng, p.m, w) {
                    row[j] = field.random_nonzero(&mut rng);
                }
                let s = support(&row);
                (row, s)
            }
            (None, SchemeKind::Original) => {
                let i = rng.gen_range(0..p.m);
                let mut row = vec![0; p.m];
                row[i] = 1;
                (row, vec![i])
            }
            (None, SchemeKind::Modified) => {
                let idx = index::sample(&mut rng, p.m, p.f).into_vec();
                let plan = SecretPlan::build(&p, &tower, &idx, &mut rng)?;
                let row = plan.rows()[0].clone();
                let truth = match rule {
                    Rule::Single => vec![idx[0]],
                    Rule::Subset => support(&row),
                };
                (row, truth)
            }
        };
        let q = if scheme == SchemeKind::Original && weight_override.is_none() {
            gen_query_original(&p, &tower, truth[0], &mut rng)?.1
        } else {
            gen_query(&p, &tower, &secret, &mut rng)?.1
        };
        let mut report = match rule {
            Rule::Single => attack_original(&q, &p)?,
            Rule::Subset => attack_modified(&q, &p, weight(&secret), cap)?,
        };
        if report.judge(&truth) {
            hits += 1;
        }
        reports.push(report);
    }
    match &ctx.out {
        Some(path) => write_reports_csv(fs::File::create(path)?, &reports)?,
        None => write_reports_csv(std::io::stdout().lock(), &reports)?,
    }
    let rate = if trials == 0 {
        0.0
    } else {
        hits as f64 / trials as f64
    };
    eprintln!("success {hits}/{trials} ({rate:.3})");
    Ok(())
}

pub fn tables(ctx: &Context) -> Result<(), Failure> {
    let dir = ctx.out()?;
    fs::create_dir_all(dir)?;
    let p = example_params(100);
    let ms = [100, 10_000];
    let open = |name: &str| fs::File::create(dir.join(name)).map(std::io::BufWriter::new);
    write_rates_csv(open("rates.csv")?)?;
    write_fig3_csv(open("fig3.csv")?, &p, &ms)?;
    write_bounds_csv(open("bounds.csv")?, &p, &ms)?;
    std::io::stderr().flush()?;
    eprintln!("wrote rates.csv, fig3.csv, bounds.csv to {}", dir.display());
    Ok(())
}
