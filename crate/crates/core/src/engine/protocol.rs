//! The individual protocol steps, as pure functions over keys and messages.
//!
//! Party structs in `party.rs` hold the keys and per-session state and call
//! into these.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::One;
use rand::{CryptoRng, RngCore};

use crate::access::{reencrypt, rekeygen, AcsKeyMaterial, JointPublicKey};
use crate::arith::{self, mod_inverse};
use crate::bcp::{
    encrypt_in, hom_add, hom_negate, hom_scalar_mul, pdec1, pdec2, Ciphertext, Domain, NonceRange,
    Plaintext, PublicKey, PublicParams,
};
use crate::error::{domain_check, Error, Result};

use super::message::check_ids;
use super::{
    AddPackage, AuthorizedRequest, CiphertextId, CiphertextStore, ComputeRequest, MultPackage, Op,
    RequestId, ResultMsg, UploadMsg,
};

const UNIT_ATTEMPTS: u64 = 1_000;

/// Source of the CSP's blinding values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Blinding {
    /// `δ` uniform in `[0, N)`, each `r_i` uniform in `Z*_N`.
    #[default]
    Random,
    /// Pinned values for oracle tests. `factors` must hold one unit per operand.
    Fixed {
        delta: BigUint,
        factors: Vec<BigUint>,
    },
}

impl Blinding {
    fn delta<R: RngCore + CryptoRng>(&self, pp: &PublicParams, rng: &mut R) -> BigUint {
        match self {
            Blinding::Random => arith::random_below(pp.n(), rng),
            Blinding::Fixed { delta, .. } => delta % pp.n(),
        }
    }

    fn factors<R: RngCore + CryptoRng>(
        &self,
        count: usize,
        pp: &PublicParams,
        rng: &mut R,
    ) -> Result<Vec<BigUint>> {
        match self {
            Blinding::Random => (0..count)
                .map(|_| arith::random_unit(pp.n(), UNIT_ATTEMPTS, rng))
                .collect(),
            Blinding::Fixed { factors, .. } => {
                if factors.len() != count {
                    return Err(Error::InvalidParameters(format!(
                        "{} pinned factors for {count} operands",
                        factors.len()
                    )));
                }
                if factors.iter().any(|r| !arith::is_unit(r, pp.n())) {
                    return Err(Error::InvalidParameters(
                        "pinned factors must be units mod N".into(),
                    ));
                }
                Ok(factors.clone())
            }
        }
    }
}

/// Encrypts each value under the joint key.
pub fn dp_upload<R: RngCore + CryptoRng>(
    pp: &PublicParams,
    joint_pk: &JointPublicKey,
    values: &[Plaintext],
    nonce: NonceRange,
    rng: &mut R,
) -> Result<UploadMsg> {
    let ciphertexts = values
        .iter()
        .map(|m| encrypt_in(pp, joint_pk.joint(), m, Domain::Joint, nonce, rng))
        .collect::<Result<_>>()?;
    Ok(UploadMsg { ciphertexts })
}

pub fn csp_ingest(store: &CiphertextStore, msg: &UploadMsg) -> Result<Vec<CiphertextId>> {
    store.ingest(msg)
}

/// Checks the allowlist, issues `rk` for the requester and strips its public value.
pub fn acs_authorize(
    acs: &AcsKeyMaterial,
    allowlist: &HashSet<PublicKey>,
    req: &ComputeRequest,
    request_id: RequestId,
    pp: &PublicParams,
) -> Result<AuthorizedRequest> {
    check_ids(req.op(), req.ids())?;
    if !allowlist.contains(req.requester()) {
        return Err(Error::AccessDenied);
    }
    let rk = rekeygen(acs, req.requester(), pp);
    Ok(AuthorizedRequest {
        request_id,
        op: req.op(),
        ids: req.ids().to_vec(),
        rk: rk.rk().clone(),
    })
}

fn expect_op(auth: &AuthorizedRequest, op: Op) -> Result<()> {
    if auth.op != op {
        return Err(Error::MalformedRequest(format!(
            "expected a {op} request, got {}",
            auth.op
        )));
    }
    check_ids(op, &auth.ids)
}

/// Sums the operands homomorphically, strips the CSP share and blinds with `δ`.
pub fn csp_execute_add<R: RngCore + CryptoRng>(
    store: &CiphertextStore,
    auth: &AuthorizedRequest,
    sk_csp: &BigUint,
    pp: &PublicParams,
    blinding: &Blinding,
    nonce: NonceRange,
    rng: &mut R,
) -> Result<AddPackage> {
    expect_op(auth, Op::Add)?;
    let operands = store.resolve(&auth.ids)?;
    let (first, rest) = operands.split_first().expect("at least one operand");
    let sum = rest
        .iter()
        .try_fold(first.clone(), |acc, c| hom_add(pp, &acc, c))?;
    let partial = pdec1(pp, sk_csp, &sum)?;

    let delta = blinding.delta(pp, rng);
    // (1 + δN) multiplies the plaintext shift: [m]_ACS -> [m + δ]_ACS.
    let shift = (&delta * pp.n() + 1u32) % pp.n_sq();
    let blinded = Ciphertext::from_parts(
        partial.a().clone(),
        partial.b() * &shift % pp.n_sq(),
        Domain::Acs,
    );
    let noise = encrypt_in(
        pp,
        &auth.rk,
        &Plaintext::from_raw(delta),
        Domain::Rk,
        nonce,
        rng,
    )?;
    Ok(AddPackage {
        request_id: auth.request_id,
        blinded,
        noise,
    })
}

/// Strips the ACS share (seeing only `m + δ`), then re-targets the sum to the requester.
///
/// Returns the result together with the plaintexts the ACS observed.
pub fn acs_finalize_add<R: RngCore + CryptoRng>(
    acs: &AcsKeyMaterial,
    pkg: &AddPackage,
    pk_dr: &PublicKey,
    pp: &PublicParams,
    nonce: NonceRange,
    rng: &mut R,
) -> Result<(ResultMsg, Vec<Plaintext>)> {
    let blinded_sum = pdec2(pp, acs.b(), &pkg.blinded)?;
    let fresh = encrypt_in(pp, pk_dr, &blinded_sum, Domain::Dr, nonce, rng)?;
    let minus_delta = hom_negate(pp, &reencrypt(acs, &pkg.noise, pp)?)?;
    let result = hom_add(pp, &fresh, &minus_delta)?;
    Ok((
        ResultMsg {
            request_id: pkg.request_id,
            result,
        },
        vec![blinded_sum],
    ))
}

/// Blinds each operand multiplicatively by its own unit `r_i` and encrypts
/// `(∏ r_i)^{-1} mod N` under `rk`.
pub fn csp_execute_mult<R: RngCore + CryptoRng>(
    store: &CiphertextStore,
    auth: &AuthorizedRequest,
    sk_csp: &BigUint,
    pp: &PublicParams,
    blinding: &Blinding,
    nonce: NonceRange,
    rng: &mut R,
) -> Result<MultPackage> {
    expect_op(auth, Op::Mult)?;
    let operands = store.resolve(&auth.ids)?;
    let factors = blinding.factors(operands.len(), pp, rng)?;
    let product = factors
        .iter()
        .fold(BigUint::one(), |acc, r| acc * r % pp.n());
    let unblind = mod_inverse(&product, pp.n()).expect("product of units is a unit");

    let blinded = operands
        .iter()
        .zip(&factors)
        .map(|(c, r)| Ok(hom_scalar_mul(pp, &pdec1(pp, sk_csp, c)?, r)))
        .collect::<Result<Vec<_>>>()?;
    let unblinder = encrypt_in(
        pp,
        &auth.rk,
        &Plaintext::from_raw(unblind),
        Domain::Rk,
        nonce,
        rng,
    )?;
    Ok(MultPackage {
        request_id: auth.request_id,
        blinded,
        unblinder,
    })
}

/// Multiplies the blinded operands in the clear (`w`) and raises the
/// re-encrypted `[r_3]_DR` to `w`.
///
/// Returns the result together with the plaintexts the ACS observed: each
/// `m_i r_i` followed by `w`.
pub fn acs_finalize_mult(
    acs: &AcsKeyMaterial,
    pkg: &MultPackage,
    pp: &PublicParams,
) -> Result<(ResultMsg, Vec<Plaintext>)> {
    if pkg.blinded.len() < Op::Mult.min_operands() {
        return Err(Error::MalformedRequest(
            "multiplication package with fewer than two operands".into(),
        ));
    }
    let mut observed = pkg
        .blinded
        .iter()
        .map(|c| pdec2(pp, acs.b(), c))
        .collect::<Result<Vec<_>>>()?;
    let w = observed
        .iter()
        .fold(BigUint::one(), |acc, v| acc * v.value() % pp.n());
    let unblinder = reencrypt(acs, &pkg.unblinder, pp)?;
    let result = hom_scalar_mul(pp, &unblinder, &w);
    observed.push(Plaintext::from_raw(w));
    Ok((
        ResultMsg {
            request_id: pkg.request_id,
            result,
        },
        observed,
    ))
}

pub fn dr_decrypt(sk_dr: &BigUint, msg: &ResultMsg, pp: &PublicParams) -> Result<Plaintext> {
    domain_check(Domain::Dr, msg.result.domain())?;
    crate::bcp::decrypt(pp, sk_dr, &msg.result)
}
