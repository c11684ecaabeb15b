//! Timing harness: per-algorithm and per-protocol-step costs across modulus
//! sizes, reported as CSV.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;

use crate::access::{dealer_register_acs, joint_public_key, JointPublicKey};
use crate::arith;
use crate::bcp::{
    self, decrypt, encrypt_in, keygen, pdec1, pdec2, Domain, NonceRange, Plaintext, PublicParams,
};
use crate::engine::{
    AccessControlServer, CiphertextStore, CloudServer, DataProvider, DataRequester, Op,
};
use crate::error::{invariant, Error, Result};

pub const CSV_HEADER: [&str; 5] = [
    "subject",
    "n_bits",
    "mean_micros",
    "stddev_micros",
    "iterations",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Setup,
    Keygen,
    Enc,
    Dec,
    Pdec1,
    Pdec2,
    AddCsp,
    AddAcs,
    AddDr,
    MultCsp,
    MultAcs,
    MultDr,
}

impl Subject {
    pub const ALL: [Subject; 12] = [
        Subject::Setup,
        Subject::Keygen,
        Subject::Enc,
        Subject::Dec,
        Subject::Pdec1,
        Subject::Pdec2,
        Subject::AddCsp,
        Subject::AddAcs,
        Subject::AddDr,
        Subject::MultCsp,
        Subject::MultAcs,
        Subject::MultDr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subject::Setup => "setup",
            Subject::Keygen => "keygen",
            Subject::Enc => "enc",
            Subject::Dec => "dec",
            Subject::Pdec1 => "pdec1",
            Subject::Pdec2 => "pdec2",
            Subject::AddCsp => "add.csp",
            Subject::AddAcs => "add.acs",
            Subject::AddDr => "add.dr",
            Subject::MultCsp => "mult.csp",
            Subject::MultAcs => "mult.acs",
            Subject::MultDr => "mult.dr",
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subject {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subject::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameters(format!("unknown bench subject {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub n_bits_list: Vec<u64>,
    pub iterations: usize,
    pub keybits: u64,
    pub databits: u64,
    /// Randomness range for every encryption the harness performs.
    pub nonce: NonceRange,
    /// Operand count for ADD sessions.
    pub add_inputs: usize,
    /// Operand count for MULT sessions.
    pub mult_inputs: usize,
    pub subjects: Vec<Subject>,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_bits_list: vec![512, 768, 1024, 1280],
            iterations: 500,
            keybits: bcp::DEFAULT_KEY_BITS,
            databits: 200,
            nonce: NonceRange::Bits(500),
            add_inputs: 10,
            mult_inputs: 2,
            subjects: Subject::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        let Some(&smallest) = self.n_bits_list.first() else {
            return bad("n_bits_list is empty".into());
        };
        if self.n_bits_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_bits_list must be strictly ascending".into());
        }
        if smallest < 16 || self.n_bits_list.iter().any(|b| b % 2 == 1) {
            return bad("modulus sizes must be even and at least 16 bits".into());
        }
        if self.keybits < 16 {
            return bad("keybits must be at least 16".into());
        }
        if self.databits == 0 || self.databits >= smallest {
            return bad(format!("databits must be in [1, {smallest})"));
        }
        if self.add_inputs < Op::Add.min_operands() || self.mult_inputs < Op::Mult.min_operands() {
            return bad("too few protocol inputs".into());
        }
        if self.subjects.is_empty() {
            return bad("no subjects selected".into());
        }
        Ok(())
    }

    fn wants(&self, s: Subject) -> bool {
        self.subjects.contains(&s)
    }

    fn wants_any(&self, s: &[Subject]) -> bool {
        s.iter().any(|&x| self.wants(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub subject: Subject,
    pub n_bits: u64,
    pub mean_micros: f64,
    pub stddev_micros: f64,
    pub iterations: u64,
}

impl BenchRecord {
    /// Mean and population standard deviation of the samples.
    pub fn from_samples(subject: Subject, n_bits: u64, samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        BenchRecord {
            subject,
            n_bits,
            mean_micros: mean,
            stddev_micros: var.sqrt(),
            iterations: samples.len() as u64,
        }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64() * 1e6))
}

fn data_value(
    pp: &PublicParams,
    bits: u64,
    nonzero: bool,
    rng: &mut ChaCha20Rng,
) -> Result<Plaintext> {
    let bound = BigUint::one() << bits;
    let v = if nonzero {
        arith::random_nonzero_below(&bound, rng)
    } else {
        arith::random_below(&bound, rng)
    };
    pp.plaintext(v)
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(invariant(format!("benchmark sanity check failed: {what}")))
    }
}

struct Protocol {
    csp_sk: BigUint,
    joint: JointPublicKey,
    dp: DataProvider,
    csp: CloudServer,
    acs: AccessControlServer,
    dr: DataRequester,
}

impl Protocol {
    fn new(
        pp: &PublicParams,
        mk: &bcp::MasterKey,
        cfg: &BenchConfig,
        rng: &mut ChaCha20Rng,
    ) -> Result<Self> {
        let csp_keys = keygen(pp, cfg.keybits, rng)?;
        let material = dealer_register_acs(mk, pp, cfg.keybits, rng)?;
        let dr_keys = keygen(pp, cfg.keybits, rng)?;
        let joint = joint_public_key(pp, csp_keys.pk(), material.pk());
        let dr = DataRequester::new(pp.clone(), dr_keys);
        let mut acs = AccessControlServer::new(pp.clone(), material).with_nonce(cfg.nonce);
        acs.allow(dr.public_key().clone());
        Ok(Protocol {
            csp_sk: csp_keys.sk().clone(),
            joint: joint.clone(),
            dp: DataProvider::new(pp.clone(), joint).with_nonce(cfg.nonce),
            csp: CloudServer::new(pp.clone(), csp_keys, CiphertextStore::new())
                .with_nonce(cfg.nonce),
            acs,
            dr,
        })
    }

    /// One session with each role's step timed separately. Returns the result and
    /// the CSP, ACS and DR times.
    fn session(
        &self,
        op: Op,
        values: &[Plaintext],
        rng: &mut ChaCha20Rng,
    ) -> Result<(Plaintext, [f64; 3])> {
        let ids = self.csp.ingest(&self.dp.upload(values, rng)?)?;
        let auth = self.acs.authorize(&self.dr.request(op, ids)?)?;
        let (package, t_csp) = timed(|| self.csp.execute(&auth, rng))?;
        let (finalized, t_acs) = timed(|| self.acs.finalize(&package, rng))?;
        let (value, t_dr) = timed(|| self.dr.decrypt(&finalized.result))?;
        Ok((value, [t_csp, t_acs, t_dr]))
    }
}

fn expected(pp: &PublicParams, op: Op, values: &[Plaintext]) -> BigUint {
    let n = pp.n();
    match op {
        Op::Add => values
            .iter()
            .fold(BigUint::zero(), |acc, v| (acc + v.value()) % n),
        Op::Mult => values
            .iter()
            .fold(BigUint::one(), |acc, v| acc * v.value() % n),
    }
}

/// Runs the sweep. Subjects are interleaved within each iteration; every
/// iteration draws fresh plaintexts of `databits` bits.
pub fn bench_run(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();

    for &n_bits in &cfg.n_bits_list {
        let mut samples: HashMap<Subject, Vec<f64>> = HashMap::new();
        let mut push = |s: Subject, t: f64| samples.entry(s).or_default().push(t);

        let (pp, mk) = bcp::setup(n_bits, &mut rng)?;
        let keys = keygen(&pp, cfg.keybits, &mut rng)?;
        let protocol = Protocol::new(&pp, &mk, cfg, &mut rng)?;
        // The standalone partial decryptions reuse the protocol's key shares.
        let (csp_sk, acs_b) = (&protocol.csp_sk, protocol.acs.material().b());
        let joint_pk = protocol.joint.joint();

        for _ in 0..cfg.iterations {
            if cfg.wants(Subject::Setup) {
                let (_, t) = timed(|| bcp::setup(n_bits, &mut rng))?;
                push(Subject::Setup, t);
            }
            if cfg.wants(Subject::Keygen) {
                let (_, t) = timed(|| keygen(&pp, cfg.keybits, &mut rng))?;
                push(Subject::Keygen, t);
            }
            if cfg.wants_any(&[Subject::Enc, Subject::Dec]) {
                let m = data_value(&pp, cfg.databits, false, &mut rng)?;
                let (c, t) =
                    timed(|| encrypt_in(&pp, keys.pk(), &m, Domain::Single, cfg.nonce, &mut rng))?;
                let (back, t_dec) = timed(|| decrypt(&pp, keys.sk(), &c))?;
                check(back == m, "decrypt(encrypt(m)) = m")?;
                if cfg.wants(Subject::Enc) {
                    push(Subject::Enc, t);
                }
                if cfg.wants(Subject::Dec) {
                    push(Subject::Dec, t_dec);
                }
            }
            if cfg.wants_any(&[Subject::Pdec1, Subject::Pdec2]) {
                let m = data_value(&pp, cfg.databits, false, &mut rng)?;
                let c = encrypt_in(&pp, joint_pk, &m, Domain::Joint, cfg.nonce, &mut rng)?;
                let (partial, t1) = timed(|| pdec1(&pp, csp_sk, &c))?;
                let (back, t2) = timed(|| pdec2(&pp, acs_b, &partial))?;
                check(back == m, "pdec2(pdec1(c)) = m")?;
                if cfg.wants(Subject::Pdec1) {
                    push(Subject::Pdec1, t1);
                }
                if cfg.wants(Subject::Pdec2) {
                    push(Subject::Pdec2, t2);
                }
            }
            for (op, inputs, steps) in [
                (
                    Op::Add,
                    cfg.add_inputs,
                    [Subject::AddCsp, Subject::AddAcs, Subject::AddDr],
                ),
                (
                    Op::Mult,
                    cfg.mult_inputs,
                    [Subject::MultCsp, Subject::MultAcs, Subject::MultDr],
                ),
            ] {
                if !cfg.wants_any(&steps) {
                    continue;
                }
                let values = (0..inputs)
                    .map(|_| data_value(&pp, cfg.databits, op == Op::Mult, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let (value, times) = protocol.session(op, &values, &mut rng)?;
                check(
                    *value.value() == expected(&pp, op, &values),
                    "protocol result",
                )?;
                for (s, t) in steps.into_iter().zip(times) {
                    if cfg.wants(s) {
                        push(s, t);
                    }
                }
            }
        }

        records.extend(
            Subject::ALL
                .into_iter()
                .filter(|s| cfg.wants(*s))
                .map(|s| BenchRecord::from_samples(s, n_bits, &samples[&s])),
        );
    }
    Ok(records)
}

/// Formats with six significant digits, without exponent for ordinary magnitudes.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..15).contains(&exp) {
        return format!("{x:.5e}");
    }
    if exp > 5 {
        // Round to six significant digits; the integer digits past them become zeros.
        let rounded: f64 = format!("{x:.5e}").parse().expect("valid float");
        return format!("{rounded:.0}");
    }
    let decimals = (5 - exp) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Transport(e.into());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.subject.name().to_string(),
            r.n_bits.to_string(),
            format_sig6(r.mean_micros),
            format_sig6(r.stddev_micros),
            r.iterations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct CsvRow {
    subject: String,
    n_bits: u64,
    mean_micros: f64,
    stddev_micros: f64,
    iterations: u64,
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let parse_err = |e: csv::Error| Error::Parse {
        offset: e.position().map_or(0, |p| p.byte() as usize),
        message: e.to_string(),
    };
    let header = reader.headers().map_err(parse_err)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            offset: 0,
            message: format!("expected header {}", CSV_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in reader.deserialize::<CsvRow>() {
        let row = row.map_err(parse_err)?;
        let subject = row.subject.parse()?;
        if [row.mean_micros, row.stddev_micros]
            .iter()
            .any(|t| t.is_nan() || *t < 0.0)
        {
            return Err(invariant("negative or NaN timing in CSV"));
        }
        out.push(BenchRecord {
            subject,
            n_bits: row.n_bits,
            mean_micros: row.mean_micros,
            stddev_micros: row.stddev_micros,
            iterations: row.iterations,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1234.5678), "1234.57");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(123456789.0), "123457000");
        assert_eq!(format_sig6(1.5e-7), "1.50000e-7");
    }

    #[test]
    fn population_stddev() {
        let r =
            BenchRecord::from_samples(Subject::Enc, 16, &[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(r.mean_micros, 5.0);
        assert_eq!(r.stddev_micros, 2.0);
        let one = BenchRecord::from_samples(Subject::Enc, 16, &[3.0]);
        assert_eq!(one.stddev_micros, 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(BenchConfig::default().validate().is_ok());
        let bad = [
            BenchConfig {
                iterations: 0,
                ..Default::default()
            },
            BenchConfig {
                n_bits_list: vec![768, 512],
                ..Default::default()
            },
            BenchConfig {
                n_bits_list: vec![],
                ..Default::default()
            },
            BenchConfig {
                databits: 512,
                ..Default::default()
            },
            BenchConfig {
                mult_inputs: 1,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn subject_names_roundtrip() {
        for s in Subject::ALL {
            assert_eq!(s.name().parse::<Subject>().unwrap(), s);
        }
        assert!("add".parse::<Subject>().is_err());
    }
}
