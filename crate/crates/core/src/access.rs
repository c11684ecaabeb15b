//! Key ceremonies beyond single key pairs.
//!
//! The CSP (secret `a`) and ACS (secret `b`) publish a joint key `g^{a+b}`
//! for data providers. To hand results to a data requester with public value
//! `g^c`, the ACS issues `rk = g^{c/b}`. Inverting `b` modulo the group order
//! needs the factorization of `N`, so the dealer computes `b^{-1}` once at
//! registration time and hands it to the ACS; no running party holds `(p, q)`.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::{CryptoRng, RngCore};

use crate::arith::{self, mod_inverse};
use crate::bcp::{Ciphertext, Domain, KeyPair, MasterKey, PublicKey, PublicParams};
use crate::error::{domain_check, Error, Result};

/// `g^{a+b}` together with its two factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointPublicKey {
    joint: PublicKey,
    csp: PublicKey,
    acs: PublicKey,
}

impl JointPublicKey {
    /// Rebuilds a stored joint key, checking `joint = csp * acs mod N^2`.
    pub fn from_parts(
        pp: &PublicParams,
        joint: PublicKey,
        csp: PublicKey,
        acs: PublicKey,
    ) -> Result<Self> {
        let expected = joint_public_key(pp, &csp, &acs);
        if expected.joint != joint {
            return Err(Error::Invariant(
                "joint key is not the product of its factors".into(),
            ));
        }
        Ok(expected)
    }

    pub fn joint(&self) -> &PublicKey {
        &self.joint
    }

    pub fn csp(&self) -> &PublicKey {
        &self.csp
    }

    pub fn acs(&self) -> &PublicKey {
        &self.acs
    }
}

pub fn joint_public_key(
    pp: &PublicParams,
    pk_csp: &PublicKey,
    pk_acs: &PublicKey,
) -> JointPublicKey {
    let joint = pk_csp.value() * pk_acs.value() % pp.n_sq();
    JointPublicKey {
        joint: PublicKey::from_raw(joint),
        csp: pk_csp.clone(),
        acs: pk_acs.clone(),
    }
}

/// The ACS secret `b`, its inverse modulo the group order, and `g^b`.
#[derive(Clone, PartialEq, Eq)]
pub struct AcsKeyMaterial {
    b: BigUint,
    b_inv: BigUint,
    pk: PublicKey,
}

impl fmt::Debug for AcsKeyMaterial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AcsKeyMaterial")
            .field("pk", &self.pk)
            .finish_non_exhaustive()
    }
}

impl AcsKeyMaterial {
    /// Rebuilds stored material. Checks `pk = g^b` and `(g^b)^{b_inv} = g`,
    /// both of which are testable without the factorization.
    pub fn from_parts(pp: &PublicParams, b: BigUint, b_inv: BigUint, pk: BigUint) -> Result<Self> {
        let kp = KeyPair::from_parts(pp, b, pk)?;
        let material = AcsKeyMaterial {
            b: kp.sk().clone(),
            b_inv,
            pk: kp.pk().clone(),
        };
        if !material.inverse_holds(pp) {
            return Err(Error::Invariant("(g^b)^b_inv != g".into()));
        }
        Ok(material)
    }

    pub fn b(&self) -> &BigUint {
        &self.b
    }

    pub fn b_inv(&self) -> &BigUint {
        &self.b_inv
    }

    pub fn pk(&self) -> &PublicKey {
        &self.pk
    }

    /// The plain key pair `(b, g^b)`.
    pub fn keypair(&self) -> KeyPair {
        KeyPair::from_unchecked(self.b.clone(), self.pk.clone())
    }

    /// `(g^b)^{b_inv} == g mod N^2`.
    pub fn inverse_holds(&self, pp: &PublicParams) -> bool {
        &self.pk.value().modpow(&self.b_inv, pp.n_sq()) == pp.g()
    }
}

/// Dealer-side ACS registration: samples `b` coprime to the group order.
pub fn dealer_register_acs<R: RngCore + CryptoRng>(
    mk: &MasterKey,
    pp: &PublicParams,
    keybits: u64,
    rng: &mut R,
) -> Result<AcsKeyMaterial> {
    const MAX_ATTEMPTS: u64 = 10_000;
    if keybits < 16 {
        return Err(Error::InvalidParameters(format!(
            "key length must be >= 16 bits, got {keybits}"
        )));
    }
    if mk.modulus() != *pp.n() {
        return Err(Error::InvalidParameters(
            "master key does not match the public parameters".into(),
        ));
    }
    for _ in 0..MAX_ATTEMPTS {
        let b = arith::random_upto_pow2(keybits, rng);
        if let Ok(material) = register_with_secret(mk, pp, b) {
            return Ok(material);
        }
    }
    Err(Error::AttemptsExhausted {
        what: "sampling an invertible ACS secret",
        attempts: MAX_ATTEMPTS,
    })
}

/// Registration with an injected secret `b`.
pub fn register_with_secret(
    mk: &MasterKey,
    pp: &PublicParams,
    b: BigUint,
) -> Result<AcsKeyMaterial> {
    let order = mk.group_order();
    if !b.gcd(order).is_one() {
        return Err(Error::InvalidParameters(
            "ACS secret is not invertible modulo the group order".into(),
        ));
    }
    let b_inv = mod_inverse(&(&b % order), order).expect("gcd checked");
    let kp = KeyPair::from_secret(pp, b);
    Ok(AcsKeyMaterial {
        b: kp.sk().clone(),
        b_inv,
        pk: kp.pk().clone(),
    })
}

/// `rk = g^{c/b}` for a requester key `g^c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReEncKey {
    rk: PublicKey,
    target: PublicKey,
}

impl ReEncKey {
    pub fn from_parts(rk: PublicKey, target: PublicKey) -> Self {
        ReEncKey { rk, target }
    }

    /// The value handed to the CSP; it encrypts under this like a public key.
    pub fn rk(&self) -> &PublicKey {
        &self.rk
    }

    /// The requester public value the key was derived from.
    pub fn target(&self) -> &PublicKey {
        &self.target
    }
}

/// `rk = pk_dr^{b_inv} mod N^2`. Deterministic in its inputs.
pub fn rekeygen(acs: &AcsKeyMaterial, pk_dr: &PublicKey, pp: &PublicParams) -> ReEncKey {
    let rk = pk_dr.value().modpow(&acs.b_inv, pp.n_sq());
    ReEncKey {
        rk: PublicKey::from_raw(rk),
        target: pk_dr.clone(),
    }
}

/// Moves an rk-domain ciphertext `(g^s, (1+mN) g^{sc/b})` to the requester
/// domain by raising `A` to `b^{-1}`: `(g^{s/b}, B)` decrypts under `c`.
pub fn reencrypt(acs: &AcsKeyMaterial, c: &Ciphertext, pp: &PublicParams) -> Result<Ciphertext> {
    domain_check(Domain::Rk, c.domain())?;
    let a = c.a().modpow(&acs.b_inv, pp.n_sq());
    Ok(Ciphertext::from_parts(a, c.b().clone(), Domain::Dr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcp::{decrypt, encrypt, keygen, pdec1, setup_from_primes};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy(seed: u64) -> (PublicParams, MasterKey, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (pp, mk) = setup_from_primes(7u32.into(), 11u32.into(), &mut rng).unwrap();
        (pp, mk, rng)
    }

    #[test]
    fn unit_secrets_give_g_squared() {
        let (pp, mk, _) = toy(1);
        let one = KeyPair::from_secret(&pp, BigUint::one());
        let jpk = joint_public_key(&pp, one.pk(), one.pk());
        assert_eq!(jpk.joint().value(), &(pp.g() * pp.g() % pp.n_sq()));

        let acs = register_with_secret(&mk, &pp, BigUint::one()).unwrap();
        assert!(acs.b_inv().is_one());
        assert_eq!(acs.pk().value(), pp.g());
        let dr = keygen(&pp, 16, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert_eq!(rekeygen(&acs, dr.pk(), &pp).rk(), dr.pk());
    }

    #[test]
    fn registration_rejects_non_invertible_secret() {
        let (pp, mk, _) = toy(2);
        assert!(register_with_secret(&mk, &pp, BigUint::from(15u32)).is_err());
        assert!(register_with_secret(&mk, &pp, BigUint::from(1155u32 * 2 + 1)).is_ok());
    }

    #[test]
    fn registration_rejects_foreign_master_key() {
        let (pp, _, mut rng) = toy(3);
        let other = MasterKey::from_safe_primes(23u32.into(), 7u32.into()).unwrap();
        assert!(dealer_register_acs(&other, &pp, 16, &mut rng).is_err());
    }

    #[test]
    fn stored_material_is_checked() {
        let (pp, mk, mut rng) = toy(4);
        let acs = dealer_register_acs(&mk, &pp, 16, &mut rng).unwrap();
        assert!(AcsKeyMaterial::from_parts(
            &pp,
            acs.b().clone(),
            acs.b_inv().clone(),
            acs.pk().value().clone()
        )
        .is_ok());
        assert!(AcsKeyMaterial::from_parts(
            &pp,
            acs.b().clone(),
            acs.b_inv() + 1u32,
            acs.pk().value().clone()
        )
        .is_err());
    }

    #[test]
    fn reencrypt_rejects_other_domains() {
        let (pp, mk, mut rng) = toy(5);
        let acs = dealer_register_acs(&mk, &pp, 16, &mut rng).unwrap();
        let m = pp.plaintext(4u32).unwrap();
        for domain in [Domain::Joint, Domain::Acs, Domain::Dr, Domain::Single] {
            let c = encrypt(&pp, acs.pk(), &m, domain, &mut rng).unwrap();
            assert!(matches!(
                reencrypt(&acs, &c, &pp),
                Err(Error::DomainMismatch {
                    expected: Domain::Rk,
                    ..
                })
            ));
        }
        let rk_ct = encrypt(&pp, acs.pk(), &m, Domain::Rk, &mut rng).unwrap();
        assert!(pdec1(&pp, acs.b(), &rk_ct).is_err());
    }

    #[test]
    fn joint_pipeline_small_sample() {
        let (pp, mk, mut rng) = toy(6);
        let csp = keygen(&pp, 16, &mut rng).unwrap();
        let acs = dealer_register_acs(&mk, &pp, 16, &mut rng).unwrap();
        let jpk = joint_public_key(&pp, csp.pk(), acs.pk());
        assert!(JointPublicKey::from_parts(
            &pp,
            jpk.joint().clone(),
            csp.pk().clone(),
            acs.pk().clone()
        )
        .is_ok());
        assert!(JointPublicKey::from_parts(
            &pp,
            csp.pk().clone(),
            csp.pk().clone(),
            acs.pk().clone()
        )
        .is_err());
        let m = pp.plaintext(42u32).unwrap();
        let c = encrypt(&pp, jpk.joint(), &m, Domain::Joint, &mut rng).unwrap();
        let sum = csp.sk() + acs.b();
        assert_eq!(decrypt(&pp, &sum, &c).unwrap(), m);
        let partial = pdec1(&pp, csp.sk(), &c).unwrap();
        assert_eq!(decrypt(&pp, acs.b(), &partial).unwrap(), m);
    }
}
