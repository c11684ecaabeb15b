use rand::{CryptoRng, RngCore};

use crate::bcp::Plaintext;
use crate::error::{Error, Result};

use super::{
    AccessControlServer, CloudServer, ComputeRequest, DataRequester, Envelope, Message, RequestId,
    Role, Transport,
};

/// The parties taking part in a session.
#[derive(Clone, Copy)]
pub struct Parties<'a> {
    pub csp: &'a CloudServer,
    pub acs: &'a AccessControlServer,
    pub dr: &'a DataRequester,
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub request_id: RequestId,
    /// The requester's decrypted result.
    pub result: Plaintext,
    /// Every delivered envelope, in order.
    pub transcript: Vec<Envelope>,
    /// Plaintexts the ACS saw while finishing the request.
    pub acs_observed: Vec<Plaintext>,
}

fn send<T: Transport>(
    transport: &mut T,
    transcript: &mut Vec<Envelope>,
    from: Role,
    to: Role,
    message: Message,
) -> Result<Message> {
    let delivered = transport
        .deliver(Envelope::new(from, to, message))
        .map_err(|e| e.at_hop(from))?;
    if delivered.from != from || delivered.to != to {
        return Err(Error::UnexpectedMessage(format!(
            "envelope addressed {}->{} arrived as {}->{}",
            from, to, delivered.from, delivered.to
        ))
        .at_hop(from));
    }
    let message = delivered.message.clone();
    transcript.push(delivered);
    Ok(message)
}

fn unexpected(hop: Role, got: &Message) -> Error {
    Error::UnexpectedMessage(format!("{hop} received a {}", got.kind())).at_hop(hop)
}

/// Drives one request through DR -> ACS -> CSP -> ACS -> DR.
///
/// Each hop is a single delivery, so the transcript always holds four
/// envelopes. Failures are tagged with the role whose step failed.
pub fn run_session<T: Transport, R: RngCore + CryptoRng>(
    transport: &mut T,
    parties: Parties<'_>,
    request: ComputeRequest,
    rng: &mut R,
) -> Result<SessionOutcome> {
    let mut transcript = Vec::with_capacity(4);

    let request = match send(
        transport,
        &mut transcript,
        Role::Dr,
        Role::Acs,
        Message::Request(request),
    )? {
        Message::Request(r) => r,
        other => return Err(unexpected(Role::Acs, &other)),
    };
    let authorized = parties
        .acs
        .authorize(&request)
        .map_err(|e| e.at_hop(Role::Acs))?;
    let request_id = authorized.request_id;

    let authorized = match send(
        transport,
        &mut transcript,
        Role::Acs,
        Role::Csp,
        Message::Authorized(authorized),
    )? {
        Message::Authorized(a) => a,
        other => return Err(unexpected(Role::Csp, &other)),
    };
    let package = parties
        .csp
        .execute(&authorized, rng)
        .map_err(|e| e.at_hop(Role::Csp))?;

    let package = send(transport, &mut transcript, Role::Csp, Role::Acs, package)?;
    let finalized = parties
        .acs
        .finalize(&package, rng)
        .map_err(|e| e.at_hop(Role::Acs))?;

    let result = match send(
        transport,
        &mut transcript,
        Role::Acs,
        Role::Dr,
        Message::Result(finalized.result),
    )? {
        Message::Result(r) => r,
        other => return Err(unexpected(Role::Dr, &other)),
    };
    let value = parties
        .dr
        .decrypt(&result)
        .map_err(|e| e.at_hop(Role::Dr))?;

    Ok(SessionOutcome {
        request_id,
        result: value,
        transcript,
        acs_observed: finalized.observed,
    })
}
