mod common;

use std::sync::OnceLock;

use common::*;
use hesuite_core::bcp::{self, keygen, Domain, MasterKey, Plaintext, PublicParams};
use hesuite_core::codec::{decode_entity, encode_entity, Entity};
use hesuite_core::engine::{
    run_session, Blinding, ByteStream, CiphertextId, DataRequester, Envelope, InProcess, Message,
    Op, Role, SessionOutcome, UploadMsg,
};
use hesuite_core::Error;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

fn params_256() -> &'static (PublicParams, MasterKey) {
    static P: OnceLock<(PublicParams, MasterKey)> = OnceLock::new();
    P.get_or_init(|| bcp::setup(256, &mut rng(256)).unwrap())
}

fn upload(w: &World, values: &[u64], r: &mut ChaCha20Rng) -> Vec<CiphertextId> {
    let pts: Vec<Plaintext> = values.iter().map(|v| w.pp.plaintext(*v).unwrap()).collect();
    w.csp.ingest(&w.dp.upload(&pts, r).unwrap()).unwrap()
}

fn session(w: &World, op: Op, ids: Vec<CiphertextId>, r: &mut ChaCha20Rng) -> SessionOutcome {
    let req = w.dr.request(op, ids).unwrap();
    run_session(&mut InProcess, w.parties(), req, r).unwrap()
}

/// CSP output carries ciphertexts only; the DR gets exactly one DR-domain ciphertext.
fn check_transcript(t: &[Envelope]) {
    let hops: Vec<(Role, Role)> = t.iter().map(|e| (e.from, e.to)).collect();
    assert_eq!(
        hops,
        [
            (Role::Dr, Role::Acs),
            (Role::Acs, Role::Csp),
            (Role::Csp, Role::Acs),
            (Role::Acs, Role::Dr)
        ]
    );
    let csp_out = &t[2].message;
    assert!(matches!(
        csp_out,
        Message::AddPackage(_) | Message::MultPackage(_)
    ));
    let json: serde_json::Value =
        serde_json::from_slice(&encode_entity(&Entity::Message(csp_out.clone()))).unwrap();
    assert!(only_ciphertexts(&json), "{json}");
    let to_dr: Vec<_> = t.iter().filter(|e| e.to == Role::Dr).collect();
    assert_eq!(to_dr.len(), 1);
    assert_eq!(to_dr[0].message.ciphertexts().len(), 1);
    assert_eq!(to_dr[0].message.dr_ciphertexts(), 1);
}

fn only_ciphertexts(v: &serde_json::Value) -> bool {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let keys: Vec<&str> = map.keys().map(|k| k.as_str()).collect();
            if keys.len() == 3 && ["a", "b", "domain"].iter().all(|k| keys.contains(k)) {
                return true;
            }
            map.iter().all(|(k, v)| match k.as_str() {
                "kind" | "request_id" => true,
                "blinded" | "noise" | "unblinder" => only_ciphertexts(v),
                _ => false,
            })
        }
        Value::Array(items) => items.iter().all(only_ciphertexts),
        _ => false,
    }
}

#[test]
fn add_and_mult_at_256_bits() {
    let (pp, mk) = params_256().clone();
    let mut r = rng(10);
    let w = World::new(pp, mk, 128, &mut r);
    let n = w.pp.n().clone();
    for k in 1..=6 {
        let values: Vec<u64> = (0..k).map(|_| r.gen()).collect();
        let ids = upload(&w, &values, &mut r);
        let out = session(&w, Op::Add, ids, &mut r);
        let expect = values.iter().fold(BigUint::zero(), |a, v| (a + v) % &n);
        assert_eq!(*out.result.value(), expect);
        check_transcript(&out.transcript);
    }
    for k in 2..=4 {
        let values: Vec<u64> = (0..k).map(|_| r.gen_range(1..u64::MAX)).collect();
        let ids = upload(&w, &values, &mut r);
        let out = session(&w, Op::Mult, ids, &mut r);
        let expect = values.iter().fold(BigUint::one(), |a, v| a * v % &n);
        assert_eq!(*out.result.value(), expect);
        check_transcript(&out.transcript);
    }
    assert_eq!(w.acs.pending(), 0);
}

#[test]
fn toy_sessions_match_mod_77_oracle() {
    let w = World::toy(11);
    let mut r = rng(11);
    for _ in 0..300 {
        let k = r.gen_range(1..6);
        let values: Vec<u64> = (0..k).map(|_| r.gen_range(0..N)).collect();
        let ids = upload(&w, &values, &mut r);
        let out = session(&w, Op::Add, ids, &mut r);
        assert_eq!(small(out.result.value()), values.iter().sum::<u64>() % N);
    }
    for _ in 0..300 {
        let k = r.gen_range(2..5);
        let values: Vec<u64> = (0..k).map(|_| r.gen_range(0..N)).collect();
        let ids = upload(&w, &values, &mut r);
        let out = session(&w, Op::Mult, ids, &mut r);
        assert_eq!(
            small(out.result.value()),
            values.iter().product::<u64>() % N
        );
    }
}

#[test]
fn pinned_blinding_fixes_what_the_acs_sees() {
    let w = World::toy(12).with_blinding(Blinding::Fixed {
        delta: big(70),
        factors: vec![big(2), big(13)],
    });
    let mut r = rng(12);
    let ids = upload(&w, &[30], &mut r);
    let out = session(&w, Op::Add, ids, &mut r);
    assert_eq!(small(out.result.value()), 30);
    let seen: Vec<u64> = out.acs_observed.iter().map(|p| small(p.value())).collect();
    assert_eq!(seen, [(30 + 70) % N]);

    let ids = upload(&w, &[6, 7], &mut r);
    let out = session(&w, Op::Mult, ids, &mut r);
    assert_eq!(small(out.result.value()), 42);
    let seen: Vec<u64> = out.acs_observed.iter().map(|p| small(p.value())).collect();
    assert_eq!(seen, [12, 91 % N, 12 * 14 % N]);

    // Three operands against two pinned factors is a CSP-side failure.
    let ids = upload(&w, &[1, 2, 3], &mut r);
    let req = w.dr.request(Op::Mult, ids).unwrap();
    let err = run_session(&mut InProcess, w.parties(), req, &mut r).unwrap_err();
    assert!(matches!(err, Error::Hop { hop: Role::Csp, .. }), "{err}");
}

#[test]
fn unlisted_requester_is_denied_at_the_acs() {
    let w = World::toy(13);
    let mut r = rng(13);
    let ids = upload(&w, &[1, 2], &mut r);
    let outsider = DataRequester::new(w.pp.clone(), keygen(&w.pp, 16, &mut r).unwrap());
    let req = outsider.request(Op::Add, ids).unwrap();
    let err = run_session(&mut InProcess, w.parties(), req, &mut r).unwrap_err();
    assert!(matches!(err, Error::Hop { hop: Role::Acs, .. }), "{err}");
    assert!(matches!(err.root(), Error::AccessDenied));
    assert_eq!(w.acs.pending(), 0);
}

#[test]
fn unknown_id_fails_at_the_csp() {
    let w = World::toy(14);
    let mut r = rng(14);
    upload(&w, &[1, 2], &mut r);
    let req =
        w.dr.request(Op::Add, vec![CiphertextId(0), CiphertextId(99)])
            .unwrap();
    let err = run_session(&mut InProcess, w.parties(), req, &mut r).unwrap_err();
    assert!(matches!(err, Error::Hop { hop: Role::Csp, .. }), "{err}");
    assert!(matches!(err.root(), Error::UnknownId(CiphertextId(99))));
}

#[test]
fn malformed_requests_are_rejected() {
    let w = World::toy(15);
    assert!(matches!(
        w.dr.request(Op::Mult, vec![CiphertextId(0)]),
        Err(Error::MalformedRequest(_))
    ));
    assert!(matches!(
        w.dr.request(Op::Add, vec![]),
        Err(Error::MalformedRequest(_))
    ));
    assert!(matches!(
        w.dr.request(Op::Add, vec![CiphertextId(1), CiphertextId(1)]),
        Err(Error::MalformedRequest(_))
    ));
}

#[test]
fn store_only_accepts_joint_ciphertexts() {
    let w = World::toy(16);
    let mut r = rng(16);
    let single = bcp::encrypt(
        &w.pp,
        w.dr.public_key(),
        &w.pp.plaintext(3u32).unwrap(),
        Domain::Single,
        &mut r,
    )
    .unwrap();
    let err = w
        .csp
        .ingest(&UploadMsg {
            ciphertexts: vec![single],
        })
        .unwrap_err();
    assert!(matches!(
        err,
        Error::DomainMismatch {
            expected: Domain::Joint,
            ..
        }
    ));
    assert!(w.csp.store().is_empty());
}

#[test]
fn packages_are_finalized_once() {
    let w = World::toy(17);
    let mut r = rng(17);
    let ids = upload(&w, &[4, 5], &mut r);
    let auth = w
        .acs
        .authorize(&w.dr.request(Op::Add, ids.clone()).unwrap())
        .unwrap();
    let package = w.csp.execute(&auth, &mut r).unwrap();
    let done = w.acs.finalize(&package, &mut r).unwrap();
    assert_eq!(small(w.dr.decrypt(&done.result).unwrap().value()), 9);
    assert!(matches!(
        w.acs.finalize(&package, &mut r),
        Err(Error::UnknownRequest(_))
    ));

    // A package whose operation disagrees with the pending request.
    let auth = w
        .acs
        .authorize(&w.dr.request(Op::Mult, ids).unwrap())
        .unwrap();
    let mut wrong = auth.clone();
    wrong.op = Op::Add;
    let package = w.csp.execute(&wrong, &mut r).unwrap();
    assert!(matches!(
        w.acs.finalize(&package, &mut r),
        Err(Error::UnexpectedMessage(_))
    ));
    assert_eq!(w.acs.pending(), 1);
}

#[test]
fn byte_stream_transcript_matches_in_process() {
    let w = World::toy(18);
    let mut r = rng(18);
    let ids = upload(&w, &[3, 5, 9], &mut r);
    let mut stream = ByteStream::loopback();
    let req = w.dr.request(Op::Add, ids).unwrap();
    let out = run_session(&mut stream, w.parties(), req, &mut r).unwrap();
    assert_eq!(small(out.result.value()), 17);
    check_transcript(&out.transcript);
    let framed: u64 = out
        .transcript
        .iter()
        .map(|e| 4 + encode_entity(&Entity::Envelope(e.clone())).len() as u64)
        .sum();
    assert_eq!(stream.bytes_sent(), framed);
    for env in &out.transcript {
        let bytes = encode_entity(&Entity::Envelope(env.clone()));
        assert_eq!(
            decode_entity(&bytes).unwrap(),
            Entity::Envelope(env.clone())
        );
    }
}

#[test]
fn shared_parties_serve_concurrent_sessions() {
    let w = World::toy(19);
    let mut r = rng(19);
    let batches: Vec<(Vec<u64>, Vec<CiphertextId>)> = (0..16)
        .map(|_| {
            let values: Vec<u64> = (0..3).map(|_| r.gen_range(0..N)).collect();
            let ids = upload(&w, &values, &mut r);
            (values, ids)
        })
        .collect();
    std::thread::scope(|s| {
        for (i, (values, ids)) in batches.iter().enumerate() {
            let w = &w;
            s.spawn(move || {
                let mut r = rng(100 + i as u64);
                for _ in 0..20 {
                    let op = if i % 2 == 0 { Op::Add } else { Op::Mult };
                    let out = session(w, op, ids.clone(), &mut r);
                    let expect = match op {
                        Op::Add => values.iter().sum::<u64>() % N,
                        Op::Mult => values.iter().product::<u64>() % N,
                    };
                    assert_eq!(small(out.result.value()), expect);
                }
            });
        }
    });
    assert_eq!(w.acs.pending(), 0);
}
