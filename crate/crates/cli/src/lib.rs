//! `hesuite` command-line front end.
//!
//! Artifacts are canonical JSON records (see `hesuite_core::codec`). A key
//! directory for `request` holds `params.json`, `csp.json`, `acs.json` and
//! `dr.json`; a store directory holds one `ct-<id>.json` per ciphertext.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint, Sign};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use hesuite_core::access::dealer_register_acs;
use hesuite_core::bcp::{self, decode_signed, encode_signed, NonceRange, Plaintext, PublicParams};
use hesuite_core::bench::{self, BenchConfig, Subject};
use hesuite_core::codec::{self, AcsKeyFile, Entity, JointKeyFile, KeyFile};
use hesuite_core::engine::{
    run_session, AccessControlServer, ByteStream, CiphertextId, CiphertextStore, CloudServer,
    DataProvider, DataRequester, InProcess, Op, Parties, Role,
};
use hesuite_core::Error;

pub const SEED_VAR: &str = "HESUITE_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "hesuite",
    version,
    about = "Outsourced computation over BCP ciphertexts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate public parameters and the dealer's master key.
    Setup {
        /// Modulus size in bits.
        #[arg(long)]
        bits: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Use the given safe primes instead of generating them.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        toy: Option<Vec<BigUint>>,
        /// Master key destination [default: <OUT>.master].
        #[arg(long)]
        master_out: Option<PathBuf>,
    },
    /// Generate a key pair for a role.
    Keygen {
        #[arg(long)]
        role: RoleArg,
        #[arg(long)]
        params: PathBuf,
        /// Secret key size in bits.
        #[arg(long, default_value_t = bcp::DEFAULT_KEY_BITS)]
        bits: u64,
        #[arg(long)]
        out: PathBuf,
        /// Master key; required for the acs role.
        #[arg(long)]
        master: Option<PathBuf>,
    },
    /// Combine the CSP and ACS public keys.
    JointPk {
        #[arg(long)]
        csp: PathBuf,
        #[arg(long)]
        acs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt values under the joint key and add them to a store.
    Upload {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        jointpk: PathBuf,
        /// Comma-separated integers; negative values use the signed encoding.
        #[arg(
            long,
            value_delimiter = ',',
            num_args = 1,
            required = true,
            allow_hyphen_values = true
        )]
        values: Vec<BigInt>,
        #[arg(long)]
        store: PathBuf,
    },
    /// Run one ADD or MULT session and print the decrypted result.
    Request {
        #[arg(long)]
        op: OpArg,
        #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
        ids: Vec<u64>,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Print the result in the signed encoding.
        #[arg(long)]
        signed: bool,
        /// Carry messages in-process or over the framed byte stream.
        #[arg(long, value_enum, default_value_t = TransportArg::Memory)]
        transport: TransportArg,
    },
    /// Time every algorithm and protocol step and write CSV.
    Bench {
        #[arg(
            long,
            value_delimiter = ',',
            num_args = 1,
            default_value = "512,768,1024,1280"
        )]
        bits: Vec<u64>,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = bcp::DEFAULT_KEY_BITS)]
        keybits: u64,
        #[arg(long, default_value_t = 200)]
        databits: u64,
        /// Encryption randomness: a bit length, or "full" for [1, N^2).
        #[arg(long, default_value = "500")]
        nonce: String,
        #[arg(long, default_value_t = 10)]
        add_inputs: usize,
        #[arg(long, default_value_t = 2)]
        mult_inputs: usize,
        /// Comma-separated subset of subjects [default: all].
        #[arg(long, value_delimiter = ',', num_args = 1)]
        subjects: Option<Vec<String>>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RoleArg {
    Csp,
    Acs,
    Dr,
    Dp,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Role {
        match r {
            RoleArg::Csp => Role::Csp,
            RoleArg::Acs => Role::Acs,
            RoleArg::Dr => Role::Dr,
            RoleArg::Dp => Role::Dp,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OpArg {
    Add,
    Mult,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TransportArg {
    Memory,
    Stream,
}

/// Failure classes, mapped to exit codes 2 and 1.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Failed(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn rng() -> CliResult<ChaCha20Rng> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(ChaCha20Rng::seed_from_u64)
            .map_err(|_| {
                Failure::Usage(format!("{SEED_VAR} must be an unsigned integer, got {s:?}"))
            }),
        Err(_) => Ok(ChaCha20Rng::from_entropy()),
    }
}

fn read_entity(path: &Path) -> CliResult<Entity> {
    let bytes = fs::read(path).map_err(|e| Failure::Failed(format!("{}: {e}", path.display())))?;
    codec::decode_entity(&bytes).map_err(|e| Failure::Failed(format!("{}: {e}", path.display())))
}

fn read_as<T: TryFrom<Entity, Error = Error>>(path: &Path) -> CliResult<T> {
    T::try_from(read_entity(path)?).map_err(|e| Failure::Failed(format!("{}: {e}", path.display())))
}

fn write_entity(path: &Path, e: impl Into<Entity>) -> CliResult<()> {
    let mut bytes = codec::encode_entity(&e.into());
    bytes.push(b'\n');
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::Failed(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::Failed(format!("{}: {e}", path.display())))
}

fn default_master_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".master");
    PathBuf::from(s)
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Setup {
            bits,
            out,
            toy,
            master_out,
        } => {
            let mut rng = rng()?;
            let (pp, mk) = match (toy, bits) {
                (Some(primes), _) => {
                    let [p, q] = <[BigUint; 2]>::try_from(primes)
                        .map_err(|_| Failure::Usage("--toy takes exactly two primes P,Q".into()))?;
                    let (pp, mk) = bcp::setup_from_primes(p, q, &mut rng)?;
                    if let Some(b) = bits.filter(|&b| b != pp.kappa()) {
                        return Err(Failure::Usage(format!(
                            "--bits {b} does not match the {}-bit toy modulus",
                            pp.kappa()
                        )));
                    }
                    (pp, mk)
                }
                (None, Some(bits)) => bcp::setup(bits, &mut rng)?,
                (None, None) => return Err(Failure::Usage("setup needs --bits or --toy".into())),
            };
            let master_out = master_out.unwrap_or_else(|| default_master_path(&out));
            write_entity(&out, pp)?;
            write_entity(&master_out, mk)
        }
        Command::Keygen {
            role,
            params,
            bits,
            out,
            master,
        } => {
            let pp: PublicParams = read_as(&params)?;
            let mut rng = rng()?;
            match (role, master) {
                (RoleArg::Acs, None) => Err(Failure::Usage("--role acs requires --master".into())),
                (RoleArg::Acs, Some(master)) => {
                    let mk: bcp::MasterKey = read_as(&master)?;
                    let material = dealer_register_acs(&mk, &pp, bits, &mut rng)?;
                    write_entity(&out, AcsKeyFile::new(&pp, &material))
                }
                (role, _) => {
                    let keys = bcp::keygen(&pp, bits, &mut rng)?;
                    write_entity(&out, KeyFile::new(role.into(), &pp, &keys))
                }
            }
        }
        Command::JointPk { csp, acs, out } => {
            let csp: KeyFile = read_as(&csp)?;
            let acs: AcsKeyFile = read_as(&acs)?;
            if csp.role != Role::Csp {
                return Err(Failure::Usage(format!("--csp holds a {} key", csp.role)));
            }
            if csp.modulus != acs.modulus {
                return Err(Failure::Failed(
                    "CSP and ACS keys use different moduli".into(),
                ));
            }
            let n_sq = &csp.modulus * &csp.modulus;
            let joint = &csp.pk * &acs.pk % n_sq;
            write_entity(
                &out,
                JointKeyFile {
                    modulus: csp.modulus,
                    joint,
                    csp: csp.pk,
                    acs: acs.pk,
                },
            )
        }
        Command::Upload {
            params,
            jointpk,
            values,
            store,
        } => {
            let pp: PublicParams = read_as(&params)?;
            let joint = read_as::<JointKeyFile>(&jointpk)?.key(&pp)?;
            let plaintexts = values
                .iter()
                .map(|v| to_plaintext(&pp, v))
                .collect::<CliResult<Vec<_>>>()?;
            let mut rng = rng()?;
            let msg = DataProvider::new(pp, joint).upload(&plaintexts, &mut rng)?;
            fs::create_dir_all(&store)
                .map_err(|e| Failure::Failed(format!("{}: {e}", store.display())))?;
            let existing = load_store(&store)?;
            let ids = existing.ingest(&msg)?;
            for (id, c) in ids.iter().zip(&msg.ciphertexts) {
                write_entity(&store_path(&store, *id), c.clone())?;
            }
            let ids: Vec<String> = ids.iter().map(|id| id.to_string()).collect();
            println!("{}", ids.join(","));
            Ok(())
        }
        Command::Request {
            op,
            ids,
            keys,
            store,
            signed,
            transport,
        } => {
            let pp: PublicParams = read_as(&keys.join("params.json"))?;
            let csp_keys = read_as::<KeyFile>(&keys.join("csp.json"))?.keypair(&pp)?;
            let material = read_as::<AcsKeyFile>(&keys.join("acs.json"))?.material(&pp)?;
            let dr_keys = read_as::<KeyFile>(&keys.join("dr.json"))?.keypair(&pp)?;
            let store = load_store(&store)?;

            let csp = CloudServer::new(pp.clone(), csp_keys, store);
            let dr = DataRequester::new(pp.clone(), dr_keys);
            let mut acs = AccessControlServer::new(pp.clone(), material);
            acs.allow(dr.public_key().clone());
            let op = match op {
                OpArg::Add => Op::Add,
                OpArg::Mult => Op::Mult,
            };
            let request = dr.request(op, ids.into_iter().map(CiphertextId).collect())?;
            let parties = Parties {
                csp: &csp,
                acs: &acs,
                dr: &dr,
            };
            let mut rng = rng()?;
            let outcome = match transport {
                TransportArg::Memory => run_session(&mut InProcess, parties, request, &mut rng)?,
                TransportArg::Stream => {
                    run_session(&mut ByteStream::loopback(), parties, request, &mut rng)?
                }
            };
            if signed {
                println!("{}", decode_signed(&pp, &outcome.result));
            } else {
                println!("{}", outcome.result);
            }
            Ok(())
        }
        Command::Bench {
            bits,
            iters,
            csv,
            keybits,
            databits,
            nonce,
            add_inputs,
            mult_inputs,
            subjects,
        } => {
            let nonce = match nonce.as_str() {
                "full" => NonceRange::Full,
                s => NonceRange::Bits(s.parse().ok().filter(|&b| b > 0).ok_or_else(|| {
                    Failure::Usage(format!(
                        "--nonce must be a bit length or \"full\", got {s:?}"
                    ))
                })?),
            };
            let subjects = match subjects {
                None => Subject::ALL.to_vec(),
                Some(names) => names
                    .iter()
                    .map(|s| s.parse::<Subject>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Failure::Usage(e.to_string()))?,
            };
            let seed = match std::env::var(SEED_VAR) {
                Ok(_) => rand::RngCore::next_u64(&mut rng()?),
                Err(_) => rand::random(),
            };
            let cfg = BenchConfig {
                n_bits_list: bits,
                iterations: iters,
                keybits,
                databits,
                nonce,
                add_inputs,
                mult_inputs,
                subjects,
                seed,
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let records = bench::bench_run(&cfg)?;
            let file = fs::File::create(&csv)
                .map_err(|e| Failure::Failed(format!("{}: {e}", csv.display())))?;
            bench::write_csv(&records, file)?;
            Ok(())
        }
    }
}

fn to_plaintext(pp: &PublicParams, v: &BigInt) -> CliResult<Plaintext> {
    match v.sign() {
        Sign::Minus => Ok(encode_signed(pp, v)?),
        _ => Ok(pp.plaintext(v.magnitude().clone())?),
    }
}

fn store_path(dir: &Path, id: CiphertextId) -> PathBuf {
    dir.join(format!("ct-{id}.json"))
}

/// Loads every `ct-<id>.json` in `dir`; a missing directory is an empty store.
fn load_store(dir: &Path) -> CliResult<CiphertextStore> {
    let store = CiphertextStore::new();
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(store),
        Err(e) => return Err(Failure::Failed(format!("{}: {e}", dir.display()))),
    };
    for entry in entries {
        let path = entry.map_err(|e| Failure::Failed(e.to_string()))?.path();
        let id = path.file_name().and_then(|n| n.to_str()).and_then(|n| {
            n.strip_prefix("ct-")?
                .strip_suffix(".json")?
                .parse::<u64>()
                .ok()
        });
        if let Some(id) = id {
            store.insert_with_id(CiphertextId(id), read_as(&path)?)?;
        }
    }
    Ok(store)
}
