use serde::{Deserialize, Serialize};

use super::{Instance, PacketRequest};
use crate::error::Result;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    n: usize,
    #[serde(rename = "B")]
    buffer: u32,
    c: u32,
    #[serde(default)]
    requests: Vec<RequestDoc>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RequestDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<usize>,
    a: i64,
    b: i64,
    t: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deadline: Option<i64>,
}

/// Parses an instance document. Requests without an explicit `id` take their array position.
pub fn load_instance(bytes: &[u8]) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_slice(bytes)?;
    let requests = doc
        .requests
        .into_iter()
        .enumerate()
        .map(|(pos, r)| PacketRequest {
            id: r.id.unwrap_or(pos),
            a: r.a,
            b: r.b,
            t: r.t,
            deadline: r.deadline,
        })
        .collect();
    let inst = Instance {
        n: doc.n,
        buffer: doc.buffer,
        link: doc.c,
        requests,
    };
    inst.validate()?;
    for id in inst.unservable() {
        let r = inst.request(id);
        log::warn!(
            "request {id}: deadline {:?} is before the earliest arrival {}; it will be rejected",
            r.deadline,
            r.t + r.distance()
        );
    }
    Ok(inst)
}

/// Canonical form: keys `n, B, c, requests`; requests sorted by `(t, a, b, id)`, one per line.
pub fn save_instance(inst: &Instance) -> Vec<u8> {
    let mut reqs = inst.requests.clone();
    reqs.sort_by_key(|r| (r.t, r.a, r.b, r.id));
    let mut out = format!(
        "{{\n  \"n\": {},\n  \"B\": {},\n  \"c\": {},\n  \"requests\": [",
        inst.n, inst.buffer, inst.link
    );
    for (i, r) in reqs.iter().enumerate() {
        let doc = RequestDoc {
            id: Some(r.id),
            a: r.a,
            b: r.b,
            t: r.t,
            deadline: r.deadline,
        };
        out.push_str(if i == 0 { "\n    " } else { ",\n    " });
        out.push_str(&serde_json::to_string(&doc).expect("plain struct serializes"));
    }
    if !reqs.is_empty() {
        out.push_str("\n  ");
    }
    out.push_str("]\n}\n");
    out.into_bytes()
}
