//! Canonical JSON records for every artifact the system exchanges or stores.
//!
//! Each top-level record is one object with a `"kind"` field. Big integers are
//! lowercase big-endian hex strings without leading zeros (`"0"` for zero);
//! decoding rejects any other spelling, as well as unknown fields, so
//! `encode(decode(bytes)) == bytes` for every accepted input produced by
//! [`encode_entity`].
//!
//! Decoding checks what can be checked from the record alone. Checks that
//! need the public parameters (units mod `N`, `pk = g^sk`) live on the
//! `*File` types and [`Ciphertext::validate`].

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::access::{AcsKeyMaterial, JointPublicKey, ReEncKey};
use crate::bcp::{Ciphertext, Domain, KeyPair, MasterKey, Plaintext, PublicKey, PublicParams};
use crate::engine::{
    AddPackage, AuthorizedRequest, CiphertextId, ComputeRequest, Envelope, Message, MultPackage,
    Op, RequestId, ResultMsg, Role, UploadMsg,
};
use crate::error::{invariant, Error, Result};

/// Lowercase hex, no leading zeros.
pub fn to_hex(x: &BigUint) -> String {
    x.to_str_radix(16)
}

/// Strict inverse of [`to_hex`].
pub fn from_hex(s: &str) -> Option<BigUint> {
    let canonical = !s.is_empty()
        && s.bytes().all(|c| matches!(c, b'0'..=b'9' | b'a'..=b'f'))
        && (s == "0" || !s.starts_with('0'));
    if !canonical {
        return None;
    }
    BigUint::parse_bytes(s.as_bytes(), 16)
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Hex(BigUint);

impl Serialize for Hex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_hex(&self.0))
    }
}

impl<'de> Deserialize<'de> for Hex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct HexVisitor;
        impl Visitor<'_> for HexVisitor {
            type Value = Hex;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a lowercase hex string without leading zeros")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Hex, E> {
                from_hex(v)
                    .map(Hex)
                    .ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }
        d.deserialize_str(HexVisitor)
    }
}

fn hex(x: &BigUint) -> Hex {
    Hex(x.clone())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DomainTag {
    Joint,
    Acs,
    Rk,
    Dr,
    Single,
}

impl From<Domain> for DomainTag {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Joint => DomainTag::Joint,
            Domain::Acs => DomainTag::Acs,
            Domain::Rk => DomainTag::Rk,
            Domain::Dr => DomainTag::Dr,
            Domain::Single => DomainTag::Single,
        }
    }
}

impl From<DomainTag> for Domain {
    fn from(d: DomainTag) -> Self {
        match d {
            DomainTag::Joint => Domain::Joint,
            DomainTag::Acs => Domain::Acs,
            DomainTag::Rk => Domain::Rk,
            DomainTag::Dr => Domain::Dr,
            DomainTag::Single => Domain::Single,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RoleTag {
    Dp,
    Csp,
    Acs,
    Dr,
}

impl From<Role> for RoleTag {
    fn from(r: Role) -> Self {
        match r {
            Role::Dp => RoleTag::Dp,
            Role::Csp => RoleTag::Csp,
            Role::Acs => RoleTag::Acs,
            Role::Dr => RoleTag::Dr,
        }
    }
}

impl From<RoleTag> for Role {
    fn from(r: RoleTag) -> Self {
        match r {
            RoleTag::Dp => Role::Dp,
            RoleTag::Csp => Role::Csp,
            RoleTag::Acs => Role::Acs,
            RoleTag::Dr => Role::Dr,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OpTag {
    Add,
    Mult,
}

impl From<Op> for OpTag {
    fn from(o: Op) -> Self {
        match o {
            Op::Add => OpTag::Add,
            Op::Mult => OpTag::Mult,
        }
    }
}

impl From<OpTag> for Op {
    fn from(o: OpTag) -> Self {
        match o {
            OpTag::Add => Op::Add,
            OpTag::Mult => Op::Mult,
        }
    }
}

/// A key pair as stored on disk, bound to a role and a modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyFile {
    pub role: Role,
    pub modulus: BigUint,
    pub sk: BigUint,
    pub pk: BigUint,
}

impl KeyFile {
    pub fn new(role: Role, pp: &PublicParams, keys: &KeyPair) -> Self {
        KeyFile {
            role,
            modulus: pp.n().clone(),
            sk: keys.sk().clone(),
            pk: keys.pk().value().clone(),
        }
    }

    /// Checks the modulus and `pk = g^sk`.
    pub fn keypair(&self, pp: &PublicParams) -> Result<KeyPair> {
        check_modulus(&self.modulus, pp)?;
        KeyPair::from_parts(pp, self.sk.clone(), self.pk.clone())
    }

    pub fn public_key(&self, pp: &PublicParams) -> Result<PublicKey> {
        check_modulus(&self.modulus, pp)?;
        PublicKey::new(self.pk.clone(), pp)
    }
}

/// ACS key material as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcsKeyFile {
    pub modulus: BigUint,
    pub b: BigUint,
    pub b_inv: BigUint,
    pub pk: BigUint,
}

impl AcsKeyFile {
    pub fn new(pp: &PublicParams, material: &AcsKeyMaterial) -> Self {
        AcsKeyFile {
            modulus: pp.n().clone(),
            b: material.b().clone(),
            b_inv: material.b_inv().clone(),
            pk: material.pk().value().clone(),
        }
    }

    pub fn material(&self, pp: &PublicParams) -> Result<AcsKeyMaterial> {
        check_modulus(&self.modulus, pp)?;
        AcsKeyMaterial::from_parts(pp, self.b.clone(), self.b_inv.clone(), self.pk.clone())
    }
}

/// A joint public key as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointKeyFile {
    pub modulus: BigUint,
    pub joint: BigUint,
    pub csp: BigUint,
    pub acs: BigUint,
}

impl JointKeyFile {
    pub fn new(pp: &PublicParams, key: &JointPublicKey) -> Self {
        JointKeyFile {
            modulus: pp.n().clone(),
            joint: key.joint().value().clone(),
            csp: key.csp().value().clone(),
            acs: key.acs().value().clone(),
        }
    }

    /// Product check needs only the stored modulus.
    fn product_holds(&self) -> bool {
        let n_sq = &self.modulus * &self.modulus;
        &self.csp * &self.acs % n_sq == self.joint
    }

    pub fn key(&self, pp: &PublicParams) -> Result<JointPublicKey> {
        check_modulus(&self.modulus, pp)?;
        JointPublicKey::from_parts(
            pp,
            PublicKey::new(self.joint.clone(), pp)?,
            PublicKey::new(self.csp.clone(), pp)?,
            PublicKey::new(self.acs.clone(), pp)?,
        )
    }
}

fn check_modulus(modulus: &BigUint, pp: &PublicParams) -> Result<()> {
    if modulus != pp.n() {
        return Err(invariant("record belongs to a different modulus"));
    }
    Ok(())
}

/// Every artifact that has a canonical record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entity {
    Params(PublicParams),
    MasterKey(MasterKey),
    KeyPair(KeyFile),
    AcsKey(AcsKeyFile),
    JointPublicKey(JointKeyFile),
    PublicKey(PublicKey),
    ReEncKey(ReEncKey),
    Ciphertext(Ciphertext),
    Plaintext(Plaintext),
    Message(Message),
    Envelope(Envelope),
}

impl Entity {
    pub fn kind(&self) -> &'static str {
        match self {
            Entity::Params(_) => "params",
            Entity::MasterKey(_) => "master_key",
            Entity::KeyPair(_) => "keypair",
            Entity::AcsKey(_) => "acs_key",
            Entity::JointPublicKey(_) => "joint_public_key",
            Entity::PublicKey(_) => "public_key",
            Entity::ReEncKey(_) => "reenc_key",
            Entity::Ciphertext(_) => "ciphertext",
            Entity::Plaintext(_) => "plaintext",
            Entity::Message(m) => m.kind(),
            Entity::Envelope(_) => "envelope",
        }
    }
}

macro_rules! entity_conversions {
    ($($variant:ident($ty:ty)),* $(,)?) => {$(
        impl From<$ty> for Entity {
            fn from(x: $ty) -> Self {
                Entity::$variant(x)
            }
        }

        impl TryFrom<Entity> for $ty {
            type Error = Error;
            fn try_from(e: Entity) -> Result<Self> {
                match e {
                    Entity::$variant(x) => Ok(x),
                    other => Err(invariant(format!(
                        "expected a {} record, found {}",
                        stringify!($variant),
                        other.kind()
                    ))),
                }
            }
        }
    )*};
}

entity_conversions!(
    Params(PublicParams),
    MasterKey(MasterKey),
    KeyPair(KeyFile),
    AcsKey(AcsKeyFile),
    JointPublicKey(JointKeyFile),
    PublicKey(PublicKey),
    ReEncKey(ReEncKey),
    Ciphertext(Ciphertext),
    Plaintext(Plaintext),
    Message(Message),
    Envelope(Envelope),
);

// ---- wire records ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRec {
    kappa: u64,
    n: Hex,
    g: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MasterKeyRec {
    p: Hex,
    q: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyPairRec {
    role: RoleTag,
    n: Hex,
    sk: Hex,
    pk: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AcsKeyRec {
    n: Hex,
    b: Hex,
    b_inv: Hex,
    pk: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointKeyRec {
    n: Hex,
    joint: Hex,
    csp: Hex,
    acs: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PublicKeyRec {
    pk: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReEncKeyRec {
    rk: Hex,
    target: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CiphertextRec {
    a: Hex,
    b: Hex,
    domain: DomainTag,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaintextRec {
    value: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UploadRec {
    ciphertexts: Vec<CiphertextRec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComputeRequestRec {
    op: OpTag,
    ids: Vec<u64>,
    requester: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuthorizedRec {
    request_id: u64,
    op: OpTag,
    ids: Vec<u64>,
    rk: Hex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AddPackageRec {
    request_id: u64,
    blinded: CiphertextRec,
    noise: CiphertextRec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultPackageRec {
    request_id: u64,
    blinded: Vec<CiphertextRec>,
    unblinder: CiphertextRec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResultRec {
    request_id: u64,
    result: CiphertextRec,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MessageRec {
    Upload(UploadRec),
    ComputeRequest(ComputeRequestRec),
    AuthorizedRequest(AuthorizedRec),
    AddPackage(AddPackageRec),
    MultPackage(MultPackageRec),
    Result(ResultRec),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeRec {
    from: RoleTag,
    to: RoleTag,
    message: MessageRec,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Params(ParamsRec),
    MasterKey(MasterKeyRec),
    Keypair(KeyPairRec),
    AcsKey(AcsKeyRec),
    JointPublicKey(JointKeyRec),
    PublicKey(PublicKeyRec),
    ReencKey(ReEncKeyRec),
    Ciphertext(CiphertextRec),
    Plaintext(PlaintextRec),
    Upload(UploadRec),
    ComputeRequest(ComputeRequestRec),
    AuthorizedRequest(AuthorizedRec),
    AddPackage(AddPackageRec),
    MultPackage(MultPackageRec),
    Result(ResultRec),
    Envelope(EnvelopeRec),
}

fn ct_rec(c: &Ciphertext) -> CiphertextRec {
    CiphertextRec {
        a: hex(c.a()),
        b: hex(c.b()),
        domain: c.domain().into(),
    }
}

fn ct_from(r: CiphertextRec) -> Result<Ciphertext> {
    if r.a.0.is_zero() || r.b.0.is_zero() {
        return Err(invariant("ciphertext component is zero"));
    }
    Ok(Ciphertext::from_parts(r.a.0, r.b.0, r.domain.into()))
}

fn ids_from(ids: Vec<u64>) -> Vec<CiphertextId> {
    ids.into_iter().map(CiphertextId).collect()
}

fn ids_rec(ids: &[CiphertextId]) -> Vec<u64> {
    ids.iter().map(|id| id.0).collect()
}

fn message_rec(m: &Message) -> MessageRec {
    match m {
        Message::Upload(u) => MessageRec::Upload(UploadRec {
            ciphertexts: u.ciphertexts.iter().map(ct_rec).collect(),
        }),
        Message::Request(r) => MessageRec::ComputeRequest(ComputeRequestRec {
            op: r.op().into(),
            ids: ids_rec(r.ids()),
            requester: hex(r.requester().value()),
        }),
        Message::Authorized(a) => MessageRec::AuthorizedRequest(AuthorizedRec {
            request_id: a.request_id.0,
            op: a.op.into(),
            ids: ids_rec(&a.ids),
            rk: hex(a.rk.value()),
        }),
        Message::AddPackage(p) => MessageRec::AddPackage(AddPackageRec {
            request_id: p.request_id.0,
            blinded: ct_rec(&p.blinded),
            noise: ct_rec(&p.noise),
        }),
        Message::MultPackage(p) => MessageRec::MultPackage(MultPackageRec {
            request_id: p.request_id.0,
            blinded: p.blinded.iter().map(ct_rec).collect(),
            unblinder: ct_rec(&p.unblinder),
        }),
        Message::Result(r) => MessageRec::Result(ResultRec {
            request_id: r.request_id.0,
            result: ct_rec(&r.result),
        }),
    }
}

fn message_from(m: MessageRec) -> Result<Message> {
    Ok(match m {
        MessageRec::Upload(u) => Message::Upload(UploadMsg {
            ciphertexts: u
                .ciphertexts
                .into_iter()
                .map(ct_from)
                .collect::<Result<_>>()?,
        }),
        MessageRec::ComputeRequest(r) => Message::Request(
            ComputeRequest::new(
                r.op.into(),
                ids_from(r.ids),
                PublicKey::from_raw(r.requester.0),
            )
            .map_err(|e| invariant(e.to_string()))?,
        ),
        MessageRec::AuthorizedRequest(a) => {
            let op: Op = a.op.into();
            let ids = ids_from(a.ids);
            crate::engine::ComputeRequest::new(
                op,
                ids.clone(),
                PublicKey::from_raw(a.rk.0.clone()),
            )
            .map_err(|e| invariant(e.to_string()))?;
            Message::Authorized(AuthorizedRequest {
                request_id: RequestId(a.request_id),
                op,
                ids,
                rk: PublicKey::from_raw(a.rk.0),
            })
        }
        MessageRec::AddPackage(p) => Message::AddPackage(AddPackage {
            request_id: RequestId(p.request_id),
            blinded: ct_from(p.blinded)?,
            noise: ct_from(p.noise)?,
        }),
        MessageRec::MultPackage(p) => {
            if p.blinded.len() < 2 {
                return Err(invariant(
                    "multiplication package needs two or more operands",
                ));
            }
            Message::MultPackage(MultPackage {
                request_id: RequestId(p.request_id),
                blinded: p.blinded.into_iter().map(ct_from).collect::<Result<_>>()?,
                unblinder: ct_from(p.unblinder)?,
            })
        }
        MessageRec::Result(r) => Message::Result(ResultMsg {
            request_id: RequestId(r.request_id),
            result: ct_from(r.result)?,
        }),
    })
}

fn record(e: &Entity) -> Record {
    match e {
        Entity::Params(pp) => Record::Params(ParamsRec {
            kappa: pp.kappa(),
            n: hex(pp.n()),
            g: hex(pp.g()),
        }),
        Entity::MasterKey(mk) => Record::MasterKey(MasterKeyRec {
            p: hex(mk.p()),
            q: hex(mk.q()),
        }),
        Entity::KeyPair(k) => Record::Keypair(KeyPairRec {
            role: k.role.into(),
            n: hex(&k.modulus),
            sk: hex(&k.sk),
            pk: hex(&k.pk),
        }),
        Entity::AcsKey(k) => Record::AcsKey(AcsKeyRec {
            n: hex(&k.modulus),
            b: hex(&k.b),
            b_inv: hex(&k.b_inv),
            pk: hex(&k.pk),
        }),
        Entity::JointPublicKey(k) => Record::JointPublicKey(JointKeyRec {
            n: hex(&k.modulus),
            joint: hex(&k.joint),
            csp: hex(&k.csp),
            acs: hex(&k.acs),
        }),
        Entity::PublicKey(pk) => Record::PublicKey(PublicKeyRec {
            pk: hex(pk.value()),
        }),
        Entity::ReEncKey(rk) => Record::ReencKey(ReEncKeyRec {
            rk: hex(rk.rk().value()),
            target: hex(rk.target().value()),
        }),
        Entity::Ciphertext(c) => Record::Ciphertext(ct_rec(c)),
        Entity::Plaintext(m) => Record::Plaintext(PlaintextRec {
            value: hex(m.value()),
        }),
        Entity::Message(m) => match message_rec(m) {
            MessageRec::Upload(r) => Record::Upload(r),
            MessageRec::ComputeRequest(r) => Record::ComputeRequest(r),
            MessageRec::AuthorizedRequest(r) => Record::AuthorizedRequest(r),
            MessageRec::AddPackage(r) => Record::AddPackage(r),
            MessageRec::MultPackage(r) => Record::MultPackage(r),
            MessageRec::Result(r) => Record::Result(r),
        },
        Entity::Envelope(env) => Record::Envelope(EnvelopeRec {
            from: env.from.into(),
            to: env.to.into(),
            message: message_rec(&env.message),
        }),
    }
}

fn entity(r: Record) -> Result<Entity> {
    let msg = |m| message_from(m).map(Entity::Message);
    match r {
        Record::Params(p) => {
            let pp = PublicParams::new(p.n.0, p.g.0).map_err(|e| invariant(e.to_string()))?;
            if pp.kappa() != p.kappa {
                return Err(invariant(format!(
                    "kappa {} does not match the {}-bit modulus",
                    p.kappa,
                    pp.kappa()
                )));
            }
            Ok(Entity::Params(pp))
        }
        Record::MasterKey(k) => MasterKey::from_safe_primes(k.p.0, k.q.0)
            .map(Entity::MasterKey)
            .map_err(|e| invariant(e.to_string())),
        Record::Keypair(k) => {
            if k.sk.0.is_zero() || k.pk.0.is_zero() {
                return Err(invariant("key pair with a zero component"));
            }
            Ok(Entity::KeyPair(KeyFile {
                role: k.role.into(),
                modulus: k.n.0,
                sk: k.sk.0,
                pk: k.pk.0,
            }))
        }
        Record::AcsKey(k) => {
            if k.b.0.is_zero() || k.b_inv.0.is_zero() || k.pk.0.is_zero() {
                return Err(invariant("ACS key with a zero component"));
            }
            Ok(Entity::AcsKey(AcsKeyFile {
                modulus: k.n.0,
                b: k.b.0,
                b_inv: k.b_inv.0,
                pk: k.pk.0,
            }))
        }
        Record::JointPublicKey(k) => {
            let file = JointKeyFile {
                modulus: k.n.0,
                joint: k.joint.0,
                csp: k.csp.0,
                acs: k.acs.0,
            };
            if file.modulus.is_zero() || !file.product_holds() {
                return Err(invariant("joint key is not the product of its factors"));
            }
            Ok(Entity::JointPublicKey(file))
        }
        Record::PublicKey(k) => Ok(Entity::PublicKey(PublicKey::from_raw(k.pk.0))),
        Record::ReencKey(k) => Ok(Entity::ReEncKey(ReEncKey::from_parts(
            PublicKey::from_raw(k.rk.0),
            PublicKey::from_raw(k.target.0),
        ))),
        Record::Ciphertext(c) => ct_from(c).map(Entity::Ciphertext),
        Record::Plaintext(p) => Ok(Entity::Plaintext(Plaintext::from_raw(p.value.0))),
        Record::Upload(r) => msg(MessageRec::Upload(r)),
        Record::ComputeRequest(r) => msg(MessageRec::ComputeRequest(r)),
        Record::AuthorizedRequest(r) => msg(MessageRec::AuthorizedRequest(r)),
        Record::AddPackage(r) => msg(MessageRec::AddPackage(r)),
        Record::MultPackage(r) => msg(MessageRec::MultPackage(r)),
        Record::Result(r) => msg(MessageRec::Result(r)),
        Record::Envelope(e) => Ok(Entity::Envelope(Envelope::new(
            e.from.into(),
            e.to.into(),
            message_from(e.message)?,
        ))),
    }
}

pub fn encode_entity(e: &Entity) -> Vec<u8> {
    serde_json::to_vec(&record(e)).expect("records always serialize")
}

pub fn decode_entity(bytes: &[u8]) -> Result<Entity> {
    let rec: Record = serde_json::from_slice(bytes).map_err(|e| parse_error(bytes, &e))?;
    entity(rec)
}

/// Decodes and converts to a specific entity type.
pub fn decode_as<T: TryFrom<Entity, Error = Error>>(bytes: &[u8]) -> Result<T> {
    T::try_from(decode_entity(bytes)?)
}

pub fn encode_envelope(env: &Envelope) -> Vec<u8> {
    encode_entity(&Entity::Envelope(env.clone()))
}

pub fn decode_envelope(bytes: &[u8]) -> Result<Envelope> {
    decode_as(bytes)
}

fn parse_error(input: &[u8], e: &serde_json::Error) -> Error {
    Error::Parse {
        offset: byte_offset(input, e.line(), e.column()),
        message: e.to_string(),
    }
}

/// Converts serde_json's 1-based line/column into a byte offset.
fn byte_offset(input: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return input.len();
    }
    let line_start: usize = input
        .split(|&b| b == b'\n')
        .take(line - 1)
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(input.len())
}
