//! Plain-integer reference arithmetic for the toy modulus N = 7 * 11.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const P: u64 = 7;
pub const Q: u64 = 11;
pub const N: u64 = P * Q;
pub const N2: u64 = N * N;
/// |QR_{N^2}| maximal element order: p * p' * q * q'.
pub const ORDER: u64 = 7 * 3 * 11 * 5;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

pub fn small(x: &BigUint) -> u64 {
    x.to_u64().expect("toy value fits in u64")
}

pub fn pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Inverse via the extended Euclidean algorithm on signed integers.
pub fn inv(x: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i64, (x % m) as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(m as i64) as u64)
}

/// Multiplicative order by exhaustive search.
pub fn order(g: u64, m: u64) -> u64 {
    let mut x = g % m;
    let mut k = 1;
    while x != 1 {
        x = x * g % m;
        k += 1;
        assert!(k <= m, "{g} is not a unit mod {m}");
    }
    k
}

pub fn enc(g: u64, h: u64, m: u64, r: u64) -> (u64, u64) {
    (pow(g, r, N2), (1 + m * N) % N2 * pow(h, r, N2) % N2)
}

/// `None` where the real scheme reports a malformed ciphertext.
pub fn dec(a: u64, b: u64, x: u64) -> Option<u64> {
    let u = b * inv(pow(a, x, N2), N2)? % N2;
    (u % N == 1).then(|| (u - 1) / N)
}

use hesuite_core::access::{dealer_register_acs, joint_public_key};
use hesuite_core::bcp::{keygen, setup_from_primes, MasterKey, PublicParams};
use hesuite_core::engine::{
    AccessControlServer, Blinding, CiphertextStore, CloudServer, DataProvider, DataRequester,
    Parties,
};

/// All four parties over one set of parameters, with the DR allowlisted.
pub struct World {
    pub pp: PublicParams,
    pub mk: MasterKey,
    pub dp: DataProvider,
    pub csp: CloudServer,
    pub acs: AccessControlServer,
    pub dr: DataRequester,
}

impl World {
    pub fn new(pp: PublicParams, mk: MasterKey, keybits: u64, r: &mut ChaCha20Rng) -> World {
        let csp_keys = keygen(&pp, keybits, r).unwrap();
        let material = dealer_register_acs(&mk, &pp, keybits, r).unwrap();
        let joint = joint_public_key(&pp, csp_keys.pk(), material.pk());
        let dr = DataRequester::new(pp.clone(), keygen(&pp, keybits, r).unwrap());
        let mut acs = AccessControlServer::new(pp.clone(), material);
        acs.allow(dr.public_key().clone());
        World {
            dp: DataProvider::new(pp.clone(), joint),
            csp: CloudServer::new(pp.clone(), csp_keys, CiphertextStore::new()),
            acs,
            dr,
            pp,
            mk,
        }
    }

    pub fn toy(seed: u64) -> World {
        let mut r = rng(seed);
        let (pp, mk) = setup_from_primes(big(P), big(Q), &mut r).unwrap();
        World::new(pp, mk, 16, &mut r)
    }

    pub fn with_blinding(self, blinding: Blinding) -> World {
        World {
            csp: self.csp.with_blinding(blinding),
            ..self
        }
    }

    pub fn parties(&self) -> Parties<'_> {
        Parties {
            csp: &self.csp,
            acs: &self.acs,
            dr: &self.dr,
        }
    }
}
