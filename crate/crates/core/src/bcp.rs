//! The BCP additively homomorphic cryptosystem over `Z*_{N^2}`.
//!
//! Ciphertexts are pairs `(A, B) = (g^r, (1 + mN) h^r) mod N^2` for a public
//! value `h = g^x`. Decryption strips `A^x` from `B` and applies
//! `L(u) = (u - 1) / N`. A secret split `x = x1 + x2` allows decryption in two
//! phases: [`pdec1`] strips `x1` and yields a ciphertext decryptable by `x2`
//! through [`pdec2`].
//!
//! Only the per-user ("weak") secret key decryption path is provided.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::arith::{self, is_unit, l_function, mod_inverse};
use crate::error::{domain_check, Error, Result};

/// Default secret-key length in bits.
pub const DEFAULT_KEY_BITS: u64 = 500;

/// Key-domain tag: which key a ciphertext is currently bound to.
///
/// Only `Joint -> Acs` (partial decryption) and `Rk -> Dr` (re-encryption)
/// transitions exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Encrypted under the joint CSP+ACS public key.
    Joint,
    /// Partially decrypted by the CSP; decryptable by the ACS secret.
    Acs,
    /// Encrypted under a re-encryption key.
    Rk,
    /// Decryptable by a data requester.
    Dr,
    /// Plain single-key encryption.
    Single,
}

impl Domain {
    pub const ALL: [Domain; 5] = [
        Domain::Joint,
        Domain::Acs,
        Domain::Rk,
        Domain::Dr,
        Domain::Single,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Joint => "joint",
            Domain::Acs => "acs",
            Domain::Rk => "rk",
            Domain::Dr => "dr",
            Domain::Single => "single",
        }
    }

    pub fn parse(s: &str) -> Option<Domain> {
        Domain::ALL.into_iter().find(|d| d.as_str() == s)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_ascii_uppercase())
    }
}

/// Public parameters `(N, g)` shared by every party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParams {
    kappa: u64,
    n: BigUint,
    n_sq: BigUint,
    g: BigUint,
}

impl PublicParams {
    /// Validates `N` odd and `g` a unit of `Z_{N^2}`. `kappa` is the bit length of `N`.
    pub fn new(n: BigUint, g: BigUint) -> Result<Self> {
        if n.is_even() || n <= BigUint::one() {
            return Err(Error::InvalidParameters("N must be odd and > 1".into()));
        }
        let n_sq = &n * &n;
        if g.is_zero() || g >= n_sq || !is_unit(&g, &n) {
            return Err(Error::InvalidParameters(
                "g must lie in [1, N^2) and be coprime to N".into(),
            ));
        }
        Ok(PublicParams {
            kappa: n.bits(),
            n,
            n_sq,
            g,
        })
    }

    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_sq(&self) -> &BigUint {
        &self.n_sq
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    /// Builds a plaintext, rejecting values `>= N`.
    pub fn plaintext(&self, value: impl Into<BigUint>) -> Result<Plaintext> {
        Plaintext::new(value.into(), self)
    }

    fn pow(&self, base: &BigUint, exp: &BigUint) -> BigUint {
        base.modpow(exp, &self.n_sq)
    }

    fn mul(&self, x: &BigUint, y: &BigUint) -> BigUint {
        x * y % &self.n_sq
    }

    /// `b * (a^sk)^{-1} mod N^2`, or `None` if `a` is not a unit.
    fn strip(&self, a: &BigUint, b: &BigUint, sk: &BigUint) -> Option<BigUint> {
        let mask = self.pow(a, sk);
        let inv = mod_inverse(&mask, &self.n_sq)?;
        Some(self.mul(b, &inv))
    }
}

/// The dealer's factorization of `N` into safe primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterKey {
    p: BigUint,
    q: BigUint,
    p_prime: BigUint,
    q_prime: BigUint,
    group_order: BigUint,
}

impl MasterKey {
    /// Checks that `p`, `q` are distinct safe primes with `p, q, p', q'` pairwise distinct.
    pub fn from_safe_primes(p: BigUint, q: BigUint) -> Result<Self> {
        // Fixed-seed witnesses: the check is deterministic for a given input.
        let mut rng = ChaCha20Rng::seed_from_u64(0x5afe);
        for x in [&p, &q] {
            if !arith::is_safe_prime(x, &mut rng) {
                return Err(Error::InvalidParameters(format!("{x} is not a safe prime")));
            }
        }
        let p_prime: BigUint = &p >> 1u32;
        let q_prime: BigUint = &q >> 1u32;
        let distinct = [&p, &q, &p_prime, &q_prime];
        for i in 0..distinct.len() {
            for j in i + 1..distinct.len() {
                if distinct[i] == distinct[j] {
                    return Err(Error::InvalidParameters(
                        "p, q, p', q' must be pairwise distinct".into(),
                    ));
                }
            }
        }
        let group_order = &p * &p_prime * &q * &q_prime;
        Ok(MasterKey {
            p,
            q,
            p_prime,
            q_prime,
            group_order,
        })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn p_prime(&self) -> &BigUint {
        &self.p_prime
    }

    pub fn q_prime(&self) -> &BigUint {
        &self.q_prime
    }

    /// Order of the group of quadratic residues mod `N^2`: `p p' q q'`.
    pub fn group_order(&self) -> &BigUint {
        &self.group_order
    }

    pub fn modulus(&self) -> BigUint {
        &self.p * &self.q
    }

    /// The four prime factors of the group order.
    pub fn order_factors(&self) -> [&BigUint; 4] {
        [&self.p, &self.q, &self.p_prime, &self.q_prime]
    }
}

/// Search bounds for [`setup_with_limits`].
#[derive(Clone, Copy, Debug)]
pub struct SetupLimits {
    pub max_prime_candidates: u64,
    pub max_modulus_attempts: u64,
    pub max_generator_attempts: u64,
}

impl Default for SetupLimits {
    fn default() -> Self {
        SetupLimits {
            max_prime_candidates: 50_000_000,
            max_modulus_attempts: 64,
            max_generator_attempts: 1_000,
        }
    }
}

/// Generates `(N, g)` with `N = pq` for safe primes of `kappa / 2` bits each.
pub fn setup<R: RngCore + CryptoRng>(kappa: u64, rng: &mut R) -> Result<(PublicParams, MasterKey)> {
    setup_with_limits(kappa, SetupLimits::default(), rng)
}

pub fn setup_with_limits<R: RngCore + CryptoRng>(
    kappa: u64,
    limits: SetupLimits,
    rng: &mut R,
) -> Result<(PublicParams, MasterKey)> {
    if kappa < 16 || !kappa.is_multiple_of(2) {
        return Err(Error::InvalidParameters(format!(
            "security parameter must be even and >= 16, got {kappa}"
        )));
    }
    let half = kappa / 2;
    let p = arith::gen_safe_prime(half, limits.max_prime_candidates, rng)?;
    for _ in 0..limits.max_modulus_attempts {
        let q = arith::gen_safe_prime(half, limits.max_prime_candidates, rng)?;
        if q == p || (&p * &q).bits() != kappa {
            continue;
        }
        let mk = MasterKey::from_safe_primes(p, q)?;
        let pp = params_for(&mk, limits.max_generator_attempts, rng)?;
        return Ok((pp, mk));
    }
    Err(Error::AttemptsExhausted {
        what: "finding a modulus of the requested length",
        attempts: limits.max_modulus_attempts,
    })
}

/// Setup from injected safe primes, bypassing the prime search.
pub fn setup_from_primes<R: RngCore + CryptoRng>(
    p: BigUint,
    q: BigUint,
    rng: &mut R,
) -> Result<(PublicParams, MasterKey)> {
    let mk = MasterKey::from_safe_primes(p, q)?;
    let pp = params_for(&mk, SetupLimits::default().max_generator_attempts, rng)?;
    Ok((pp, mk))
}

fn params_for<R: RngCore + CryptoRng>(
    mk: &MasterKey,
    max_attempts: u64,
    rng: &mut R,
) -> Result<PublicParams> {
    let n = mk.modulus();
    let n_sq = &n * &n;
    for _ in 0..max_attempts {
        let alpha = arith::random_unit(&n_sq, 1_000, rng)?;
        let g = &alpha * &alpha % &n_sq;
        if has_maximal_order(mk, &g, &n_sq) {
            return PublicParams::new(n, g);
        }
    }
    Err(Error::AttemptsExhausted {
        what: "sampling a generator of maximal order",
        attempts: max_attempts,
    })
}

/// True iff `g^{ord/l} != 1 mod N^2` for every prime `l` dividing `ord = p p' q q'`.
///
/// Meaningful for quadratic residues `g`, whose order divides `ord`.
pub fn has_maximal_order(mk: &MasterKey, g: &BigUint, n_sq: &BigUint) -> bool {
    if g.is_one() || g.is_zero() {
        return false;
    }
    let order = mk.group_order();
    mk.order_factors()
        .iter()
        .all(|l| !g.modpow(&(order / *l), n_sq).is_one())
}

pub fn maximal_order_check(mk: &MasterKey, pp: &PublicParams) -> bool {
    has_maximal_order(mk, pp.g(), pp.n_sq())
}

/// A public value `h = g^x mod N^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PublicKey(BigUint);

impl PublicKey {
    /// Wraps a raw public value after checking it is a unit mod `N^2`.
    pub fn new(value: BigUint, pp: &PublicParams) -> Result<Self> {
        if value >= *pp.n_sq() || !is_unit(&value, pp.n()) {
            return Err(Error::InvalidParameters(
                "public value must be a unit mod N^2".into(),
            ));
        }
        Ok(PublicKey(value))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub(crate) fn from_raw(value: BigUint) -> Self {
        PublicKey(value)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    sk: BigUint,
    pk: PublicKey,
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("sk", &"<redacted>")
            .field("pk", &self.pk)
            .finish()
    }
}

impl KeyPair {
    /// Derives `pk = g^sk mod N^2` from an explicit secret.
    pub fn from_secret(pp: &PublicParams, sk: BigUint) -> Self {
        let pk = PublicKey(pp.pow(pp.g(), &sk));
        KeyPair { sk, pk }
    }

    /// Pairs a secret with a stored public value, checking they agree.
    pub fn from_parts(pp: &PublicParams, sk: BigUint, pk: BigUint) -> Result<Self> {
        let kp = KeyPair::from_secret(pp, sk);
        if kp.pk.0 != pk {
            return Err(Error::Invariant("public key is not g^sk mod N^2".into()));
        }
        Ok(kp)
    }

    pub(crate) fn from_unchecked(sk: BigUint, pk: PublicKey) -> Self {
        KeyPair { sk, pk }
    }

    pub fn sk(&self) -> &BigUint {
        &self.sk
    }

    pub fn pk(&self) -> &PublicKey {
        &self.pk
    }
}

/// Samples `sk` uniformly from `[1, 2^keybits]`.
pub fn keygen<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    keybits: u64,
    rng: &mut R,
) -> Result<KeyPair> {
    if keybits < 16 {
        return Err(Error::InvalidParameters(format!(
            "key length must be >= 16 bits, got {keybits}"
        )));
    }
    Ok(KeyPair::from_secret(
        pp,
        arith::random_upto_pow2(keybits, rng),
    ))
}

/// An element of `Z_N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plaintext(BigUint);

impl Plaintext {
    pub fn new(value: BigUint, pp: &PublicParams) -> Result<Self> {
        if value >= *pp.n() {
            return Err(Error::out_of_range(&value));
        }
        Ok(Plaintext(value))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub(crate) fn from_raw(value: BigUint) -> Self {
        Plaintext(value)
    }
}

impl fmt::Display for Plaintext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    a: BigUint,
    b: BigUint,
    domain: Domain,
}

impl Ciphertext {
    /// Raw constructor; see [`Ciphertext::validate`] for the unit checks.
    pub fn from_parts(a: BigUint, b: BigUint, domain: Domain) -> Self {
        Ciphertext { a, b, domain }
    }

    pub fn a(&self) -> &BigUint {
        &self.a
    }

    pub fn b(&self) -> &BigUint {
        &self.b
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Both components must be residues mod `N^2` coprime to `N`.
    pub fn validate(&self, pp: &PublicParams) -> Result<()> {
        for (name, x) in [("A", &self.a), ("B", &self.b)] {
            if x >= pp.n_sq() || !is_unit(x, pp.n()) {
                return Err(Error::Invariant(format!(
                    "ciphertext component {name} is not a unit mod N^2"
                )));
            }
        }
        Ok(())
    }
}

/// Range of the encryption randomness `r`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NonceRange {
    /// `r` uniform in `[1, N^2)`.
    #[default]
    Full,
    /// `r` uniform in `[1, 2^bits]`.
    Bits(u64),
}

impl NonceRange {
    pub fn sample<R: RngCore + CryptoRng>(self, pp: &PublicParams, rng: &mut R) -> BigUint {
        match self {
            NonceRange::Full => arith::random_nonzero_below(pp.n_sq(), rng),
            NonceRange::Bits(bits) => arith::random_upto_pow2(bits, rng),
        }
    }
}

/// Encrypts `m` under `pk` with `r` uniform in `[1, N^2)`.
pub fn encrypt<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    pk: &PublicKey,
    m: &Plaintext,
    domain: Domain,
    rng: &mut R,
) -> Result<Ciphertext> {
    encrypt_in(pp, pk, m, domain, NonceRange::Full, rng)
}

pub fn encrypt_in<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    pk: &PublicKey,
    m: &Plaintext,
    domain: Domain,
    nonce: NonceRange,
    rng: &mut R,
) -> Result<Ciphertext> {
    let r = nonce.sample(pp, rng);
    encrypt_with_nonce(pp, pk, m, &r, domain)
}

/// `(g^r, (1 + mN) pk^r) mod N^2` for caller-chosen `r`.
pub fn encrypt_with_nonce(
    pp: &PublicParams,
    pk: &PublicKey,
    m: &Plaintext,
    r: &BigUint,
    domain: Domain,
) -> Result<Ciphertext> {
    if m.value() >= pp.n() {
        return Err(Error::out_of_range(m.value()));
    }
    let a = pp.pow(pp.g(), r);
    let shifted = (m.value() * pp.n() + 1u32) % pp.n_sq();
    let b = pp.mul(&shifted, &pp.pow(pk.value(), r));
    Ok(Ciphertext { a, b, domain })
}

fn extract(pp: &PublicParams, u: Option<BigUint>) -> Result<Plaintext> {
    let u = u.ok_or(Error::MalformedCiphertext)?;
    l_function(&u, pp.n())
        .map(Plaintext)
        .ok_or(Error::MalformedCiphertext)
}

/// `L(B / A^sk mod N^2)`. The domain tag is not consulted.
pub fn decrypt(pp: &PublicParams, sk: &BigUint, c: &Ciphertext) -> Result<Plaintext> {
    extract(pp, pp.strip(&c.a, &c.b, sk))
}

/// First decryption phase: strips `sk1` from a joint-key ciphertext.
pub fn pdec1(pp: &PublicParams, sk1: &BigUint, c: &Ciphertext) -> Result<Ciphertext> {
    domain_check(Domain::Joint, c.domain)?;
    let b = pp
        .strip(&c.a, &c.b, sk1)
        .ok_or(Error::MalformedCiphertext)?;
    Ok(Ciphertext {
        a: c.a.clone(),
        b,
        domain: Domain::Acs,
    })
}

/// Second decryption phase on the output of [`pdec1`].
pub fn pdec2(pp: &PublicParams, sk2: &BigUint, c: &Ciphertext) -> Result<Plaintext> {
    domain_check(Domain::Acs, c.domain)?;
    decrypt(pp, sk2, c)
}

/// `[m1] ⊙ [m2] = [m1 + m2]`.
pub fn hom_add(pp: &PublicParams, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    domain_check(c1.domain, c2.domain)?;
    Ok(Ciphertext {
        a: pp.mul(&c1.a, &c2.a),
        b: pp.mul(&c1.b, &c2.b),
        domain: c1.domain,
    })
}

/// `[m]^k = [k m]`; `k` is reduced mod `N` first.
pub fn hom_scalar_mul(pp: &PublicParams, c: &Ciphertext, k: &BigUint) -> Ciphertext {
    let k = k % pp.n();
    Ciphertext {
        a: pp.pow(&c.a, &k),
        b: pp.pow(&c.b, &k),
        domain: c.domain,
    }
}

/// `[m]^{-1} = [-m]`, computed as componentwise inverses.
pub fn hom_negate(pp: &PublicParams, c: &Ciphertext) -> Result<Ciphertext> {
    let inv = |x: &BigUint| {
        mod_inverse(x, pp.n_sq())
            .ok_or_else(|| Error::Invariant("ciphertext component is not a unit".into()))
    };
    Ok(Ciphertext {
        a: inv(&c.a)?,
        b: inv(&c.b)?,
        domain: c.domain,
    })
}

/// Maps `v` in `[-floor(N/2), ceil(N/2))` to `v mod N`.
pub fn encode_signed(pp: &PublicParams, v: &BigInt) -> Result<Plaintext> {
    let n = BigInt::from_biguint(Sign::Plus, pp.n().clone());
    let low: BigInt = -(&n / 2u32);
    let high: BigInt = (&n + 1u32) / 2u32;
    if *v < low || *v >= high {
        return Err(Error::out_of_range(v));
    }
    let wrapped = v.mod_floor(&n);
    Ok(Plaintext(
        wrapped.to_biguint().expect("mod_floor is non-negative"),
    ))
}

/// Inverse of [`encode_signed`]: values at or above `N/2` map to `m - N`.
pub fn decode_signed(pp: &PublicParams, m: &Plaintext) -> BigInt {
    let v = BigInt::from_biguint(Sign::Plus, m.0.clone());
    if &m.0 * 2u32 < *pp.n() {
        v
    } else {
        v - BigInt::from_biguint(Sign::Plus, pp.n().clone())
    }
}
